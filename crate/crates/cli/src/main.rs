use clap::Parser;
use rieszlab_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let res = run(&cli);
    if res.exit_code == 0 || res.exit_code == 4 {
        println!("{}", res.message);
        println!("wrote {} file(s) to {}", res.files.len(), res.out_dir.display());
    } else {
        eprintln!("{}", res.message);
    }
    std::process::exit(res.exit_code);
}
