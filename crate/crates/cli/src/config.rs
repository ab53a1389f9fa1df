//! Run configuration: TOML file plus `--set a.b=value` overrides, validated
//! before any computation starts.

use crate::error::CliError;
use rieszlab::model_catalog::{LebesgueIndex, ModelId};
use rieszlab::operator_lab::{
    check_supported, ContourNodes, LabError, PotentialSpec, ProjectionMethod, Truncation, DEFAULT_TRUST_FRACTION,
};
use rieszlab::projection_norms::WitnessFamily;
use rieszlab::riesz_core::{CutoffRule, DEFAULT_J_MAX, DEFAULT_THRESHOLD};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    HarmonicOscillator,
    Landau,
    Sphere,
    SphereDeltaCircle,
}

/// A number, or a string such as `"inf"` or `"5/2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberOrText {
    Number(f64),
    Text(String),
}

impl NumberOrText {
    /// `inf`/`infinity` map to `f64::INFINITY`; `a/b` is evaluated.
    pub fn to_f64(&self) -> Option<f64> {
        match self {
            NumberOrText::Number(x) => Some(*x),
            NumberOrText::Text(s) => {
                let t = s.trim().to_ascii_lowercase();
                if t == "inf" || t == "infinity" {
                    return Some(f64::INFINITY);
                }
                if let Some((a, b)) = t.split_once('/') {
                    let (a, b): (f64, f64) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
                    return (b != 0.0).then_some(a / b);
                }
                t.parse().ok()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub d: u32,
    /// Integrability index of the potential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<NumberOrText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
}

impl ModelSection {
    pub fn id(&self) -> ModelId {
        let d = self.d;
        match self.kind {
            ModelKind::HarmonicOscillator => ModelId::HarmonicOscillator { d },
            ModelKind::Landau => ModelId::Landau { d },
            ModelKind::Sphere => ModelId::Sphere { d },
            ModelKind::SphereDeltaCircle => ModelId::SphereDeltaCircle { d },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaSource {
    /// Power law with the catalog exponent for `model.r`.
    #[default]
    Catalog,
    PowerLaw,
    Zero,
    /// Level-block norms of the assembled matrix.
    Matrix,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OmegaSection {
    pub source: OmegaSource,
    /// Prefactor of the catalog power law.
    pub scale: f64,
    pub coeff: f64,
    pub alpha: f64,
    pub beta: f64,
    pub values: Vec<f64>,
}

impl Default for OmegaSection {
    fn default() -> Self {
        Self {
            source: OmegaSource::Catalog,
            scale: 1.0,
            coeff: 1.0,
            alpha: 0.0,
            beta: 0.0,
            values: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnclosureSection {
    pub cutoff_rule: CutoffRule,
    pub epsilon: f64,
    pub threshold: f64,
    pub n_cap: usize,
    pub h_cap_exp: u32,
    pub k_max: Option<usize>,
    pub real_samples: usize,
    pub circle_samples: usize,
    pub j_max: usize,
}

impl Default for EnclosureSection {
    fn default() -> Self {
        Self {
            cutoff_rule: CutoffRule::Sigma,
            epsilon: 0.1,
            threshold: DEFAULT_THRESHOLD,
            n_cap: 4096,
            h_cap_exp: 40,
            k_max: None,
            real_samples: 129,
            circle_samples: 64,
            j_max: DEFAULT_J_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerificationSection {
    /// First level of the Bari sum; defaults to `N0 + 1`.
    pub nstar: Option<usize>,
    pub random_vectors: usize,
    pub probes: usize,
    /// Probes are supported on levels `<= probe_max_level`.
    pub probe_max_level: usize,
    pub trust_fraction: f64,
    pub methods: Vec<ProjectionMethod>,
    pub agreement_tol: f64,
    pub bari_bound: f64,
}

impl Default for VerificationSection {
    fn default() -> Self {
        Self {
            nstar: None,
            random_vectors: 100,
            probes: 5,
            probe_max_level: 3,
            trust_fraction: DEFAULT_TRUST_FRACTION,
            methods: vec![ProjectionMethod::Contour, ProjectionMethod::Eigen],
            agreement_tol: 1e-7,
            bari_bound: 2.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionsSection {
    /// Levels `N` at which `sigma_N` is tabulated.
    pub sigma_n: Vec<usize>,
}

impl Default for ConditionsSection {
    fn default() -> Self {
        Self {
            sigma_n: vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsSection {
    /// `hermite_ground`, `zonal`, `highest_weight`, `equator_zonal`, `equator_highest_weight`.
    pub families: Vec<String>,
    /// Dimension of the `hermite_ground` family.
    pub hermite_d: u32,
    pub ps: Vec<NumberOrText>,
    /// Explicit levels; otherwise `k_count` log-spaced levels in `[k_min, k_max]`.
    pub ks: Option<Vec<usize>>,
    pub k_min: usize,
    pub k_max: usize,
    pub k_count: usize,
    pub tol: f64,
}

impl Default for NormsSection {
    fn default() -> Self {
        Self {
            families: vec!["zonal".into()],
            hermite_d: 2,
            ps: vec![
                NumberOrText::Number(2.0),
                NumberOrText::Number(4.0),
                NumberOrText::Number(6.0),
                NumberOrText::Text("inf".into()),
            ],
            ks: None,
            k_min: 10,
            k_max: 200,
            k_count: 24,
            tol: 0.05,
        }
    }
}

impl NormsSection {
    pub fn levels(&self) -> Vec<usize> {
        if let Some(ks) = &self.ks {
            return ks.clone();
        }
        let n = self.k_count.max(2);
        let (a, b) = (self.k_min as f64, self.k_max as f64);
        let mut ks: Vec<usize> = (0..n)
            .map(|i| (a * (b / a).powf(i as f64 / (n - 1) as f64)).round() as usize)
            .collect();
        ks.dedup();
        ks
    }

    pub fn family(&self, name: &str) -> Option<WitnessFamily> {
        Some(match name {
            "hermite_ground" => WitnessFamily::HermiteGround { d: self.hermite_d },
            "zonal" | "zonal_harmonic" => WitnessFamily::ZonalHarmonic,
            "highest_weight" => WitnessFamily::HighestWeight,
            "equator_zonal" => WitnessFamily::EquatorZonal,
            "equator_highest_weight" => WitnessFamily::EquatorHighestWeight,
            _ => return None,
        })
    }
}

fn default_seed() -> u64 {
    20240917
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub omega: OmegaSection,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default)]
    pub enclosure: EnclosureSection,
    #[serde(default)]
    pub contour: ContourNodes,
    #[serde(default)]
    pub verification: VerificationSection,
    #[serde(default)]
    pub conditions: ConditionsSection,
    #[serde(default)]
    pub norms: NormsSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Which checks apply; each subcommand only validates what it uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Conditions,
    Localize,
    Simulate,
    Norms,
    Report,
}

fn bad(path: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.into(),
        reason: reason.into(),
    }
}

fn positive(path: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(bad(path, format!("must be positive and finite, got {x}")))
    }
}

impl RunConfig {
    pub fn lebesgue_index(&self) -> Result<Option<LebesgueIndex>, CliError> {
        let Some(r) = &self.model.r else {
            return Ok(None);
        };
        let x = r
            .to_f64()
            .ok_or_else(|| bad("model.r", format!("cannot read {r:?} as a number or \"inf\"")))?;
        LebesgueIndex::from_f64(x)
            .map(Some)
            .map_err(|e| bad("model.r", e.to_string()))
    }

    pub fn p_values(&self) -> Result<Vec<f64>, CliError> {
        self.norms
            .ps
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let path = format!("norms.ps[{i}]");
                match p.to_f64() {
                    Some(x) if x >= 2.0 => Ok(x),
                    _ => Err(bad(&path, format!("p must be a number >= 2 or \"inf\", got {p:?}"))),
                }
            })
            .collect()
    }

    pub fn witness_families(&self) -> Result<Vec<WitnessFamily>, CliError> {
        self.norms
            .families
            .iter()
            .enumerate()
            .map(|(i, name)| {
                self.norms
                    .family(name)
                    .ok_or_else(|| bad(&format!("norms.families[{i}]"), format!("unknown family {name:?}")))
            })
            .collect()
    }

    /// Check every field the given subcommand depends on; the error names
    /// the first failing path.
    pub fn validate(&self, purpose: Purpose) -> Result<(), CliError> {
        if purpose == Purpose::Report {
            return Ok(());
        }
        let id = self.model.id();
        id.validate().map_err(|e| bad("model.d", e.to_string()))?;
        if let Some(s) = self.model.shift {
            if !s.is_finite() {
                return Err(bad("model.shift", "must be finite"));
            }
            if self.truncation.shift.is_some_and(|t| t != s) {
                return Err(bad("truncation.shift", "conflicts with model.shift"));
            }
        }
        let r = self.lebesgue_index()?;

        match purpose {
            Purpose::Conditions => {
                if r.is_none() {
                    return Err(bad("model.r", "required by check-conditions"));
                }
                if self.conditions.sigma_n.is_empty() || self.conditions.sigma_n.contains(&0) {
                    return Err(bad("conditions.sigma_n", "needs at least one level, all >= 1"));
                }
                self.validate_omega(r.is_some(), false)?;
                self.validate_enclosure()?;
            }
            Purpose::Localize => {
                let needs_matrix = self.enclosure.cutoff_rule == CutoffRule::LevelBlock
                    || self.omega.source == OmegaSource::Matrix;
                if self.enclosure.cutoff_rule == CutoffRule::LevelBlock && self.omega.source != OmegaSource::Matrix {
                    return Err(bad("omega.source", "the level_block cutoff rule requires source = \"matrix\""));
                }
                self.validate_omega(r.is_some(), needs_matrix)?;
                self.validate_enclosure()?;
                if needs_matrix {
                    self.validate_matrix()?;
                }
            }
            Purpose::Simulate => {
                self.validate_enclosure()?;
                self.validate_matrix()?;
                self.validate_verification()?;
            }
            Purpose::Norms => {
                let fams = self.witness_families()?;
                if fams.is_empty() {
                    return Err(bad("norms.families", "needs at least one family"));
                }
                if !(1..=16).contains(&self.norms.hermite_d) {
                    return Err(bad("norms.hermite_d", "must be in 1..=16"));
                }
                if self.p_values()?.is_empty() {
                    return Err(bad("norms.ps", "needs at least one exponent"));
                }
                if self.norms.ks.is_none() {
                    if self.norms.k_min == 0 || self.norms.k_max <= self.norms.k_min {
                        return Err(bad("norms.k_max", "needs 1 <= k_min < k_max"));
                    }
                    if self.norms.k_count < 2 {
                        return Err(bad("norms.k_count", "needs at least 2 levels"));
                    }
                } else if self.norms.levels().contains(&0) {
                    return Err(bad("norms.ks", "levels start at 1"));
                }
                if !(self.norms.tol >= 0.0) {
                    return Err(bad("norms.tol", "must be non-negative"));
                }
            }
            Purpose::Report => {}
        }
        Ok(())
    }

    fn validate_omega(&self, has_r: bool, matrix_ok: bool) -> Result<(), CliError> {
        let o = &self.omega;
        match o.source {
            OmegaSource::Catalog => {
                if !has_r {
                    return Err(bad("model.r", "required by omega.source = \"catalog\""));
                }
                if !(o.scale >= 0.0 && o.scale.is_finite()) {
                    return Err(bad("omega.scale", "must be non-negative and finite"));
                }
            }
            OmegaSource::PowerLaw => {
                if !(o.coeff >= 0.0 && o.coeff.is_finite()) {
                    return Err(bad("omega.coeff", "must be non-negative and finite"));
                }
                if !o.alpha.is_finite() {
                    return Err(bad("omega.alpha", "must be finite"));
                }
                if !o.beta.is_finite() {
                    return Err(bad("omega.beta", "must be finite"));
                }
            }
            OmegaSource::Explicit => {
                if o.values.is_empty() {
                    return Err(bad("omega.values", "needs at least one value"));
                }
                if let Some(i) = o.values.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(bad(&format!("omega.values[{i}]"), "must be non-negative and finite"));
                }
            }
            OmegaSource::Matrix if !matrix_ok => {
                return Err(bad("omega.source", "\"matrix\" is not available for this subcommand"));
            }
            OmegaSource::Matrix | OmegaSource::Zero => {}
        }
        Ok(())
    }

    fn validate_enclosure(&self) -> Result<(), CliError> {
        let e = &self.enclosure;
        positive("enclosure.epsilon", e.epsilon)?;
        if !(e.threshold > 0.0 && e.threshold < 1.0) {
            return Err(bad("enclosure.threshold", "must lie in (0, 1)"));
        }
        if e.n_cap == 0 {
            return Err(bad("enclosure.n_cap", "must be >= 1"));
        }
        if e.h_cap_exp > 1000 {
            return Err(bad("enclosure.h_cap_exp", "must be <= 1000"));
        }
        if e.k_max == Some(0) {
            return Err(bad("enclosure.k_max", "must be >= 1"));
        }
        if e.real_samples < 2 {
            return Err(bad("enclosure.real_samples", "must be >= 2"));
        }
        if e.circle_samples < 4 {
            return Err(bad("enclosure.circle_samples", "must be >= 4"));
        }
        if e.j_max < 2 {
            return Err(bad("enclosure.j_max", "must be >= 2"));
        }
        Ok(())
    }

    fn validate_matrix(&self) -> Result<(), CliError> {
        let Some(pot) = &self.potential else {
            return Err(bad("potential", "required for matrix assembly"));
        };
        check_supported(self.model.id(), pot).map_err(|e| match e {
            LabError::UnsupportedPotential { .. } => bad("potential", e.to_string()),
            _ => bad("model.d", e.to_string()),
        })?;
        let t = &self.truncation;
        if t.levels < 2 {
            return Err(bad("truncation.levels", "must be >= 2"));
        }
        if t.levels > 400 {
            return Err(bad("truncation.levels", "must be <= 400"));
        }
        if t.landau_sectors == 0 {
            return Err(bad("truncation.landau_sectors", "must be >= 1"));
        }
        if !(t.prune_tol >= 0.0 && t.prune_tol < 1.0) {
            return Err(bad("truncation.prune_tol", "must lie in [0, 1)"));
        }
        let c = &self.contour;
        if c.circle < 8 {
            return Err(bad("contour.circle", "must be >= 8"));
        }
        if c.panel < 2 {
            return Err(bad("contour.panel", "must be >= 2"));
        }
        if c.min_panels == 0 {
            return Err(bad("contour.min_panels", "must be >= 1"));
        }
        if c.max_circle < c.circle {
            return Err(bad("contour.max_circle", "must be >= contour.circle"));
        }
        Ok(())
    }

    fn validate_verification(&self) -> Result<(), CliError> {
        let v = &self.verification;
        if !(v.trust_fraction > 0.0 && v.trust_fraction <= 1.0) {
            return Err(bad("verification.trust_fraction", "must lie in (0, 1]"));
        }
        if v.methods.is_empty() {
            return Err(bad("verification.methods", "needs at least one method"));
        }
        if v.nstar == Some(0) {
            return Err(bad("verification.nstar", "must be >= 1"));
        }
        if v.probe_max_level == 0 {
            return Err(bad("verification.probe_max_level", "must be >= 1"));
        }
        positive("verification.agreement_tol", v.agreement_tol)?;
        positive("verification.bari_bound", v.bari_bound)?;
        Ok(())
    }

    /// Model shift as used by the catalog and the assembly.
    pub fn shift(&self) -> Option<f64> {
        self.model.shift.or(self.truncation.shift)
    }

    pub fn truncation(&self) -> Truncation {
        Truncation {
            shift: self.shift(),
            ..self.truncation
        }
    }
}

/// Parse `value` of a `--set` override as a TOML literal, falling back to a
/// plain string (so `--set model.kind=landau` works without quotes).
fn parse_literal(value: &str) -> toml::Value {
    let doc = format!("v = {value}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(value.into())),
        Err(_) => toml::Value::String(value.into()),
    }
}

/// Apply `a.b.c=value` to `root`, creating intermediate tables.
pub fn apply_override(root: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (path, value) = spec
        .split_once('=')
        .ok_or_else(|| bad(spec, "override must look like a.b=value"))?;
    let keys: Vec<&str> = path.trim().split('.').map(str::trim).collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(bad(path, "empty key in override path"));
    }
    let mut table = root;
    for (i, key) in keys[..keys.len() - 1].iter().enumerate() {
        let entry = table
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| bad(&keys[..=i].join("."), "is not a table"))?;
    }
    table.insert(keys[keys.len() - 1].to_string(), parse_literal(value.trim()));
    Ok(())
}

/// Read the config file (if any), apply overrides, and deserialize.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| bad("<config>", format!("{}: {e}", p.display())))?;
            text.parse::<toml::Table>()
                .map_err(|e| bad("<config>", e.message().to_string()))?
        }
        None => toml::Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    from_table(table)
}

pub fn from_table(table: toml::Table) -> Result<RunConfig, CliError> {
    let de = toml::Value::Table(table);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let mut path = e.path().to_string();
        if path == "." {
            path.clear();
        }
        let reason = e.into_inner().to_string();
        // name the missing key itself rather than its parent
        if let Some(field) = reason
            .strip_prefix("missing field `")
            .and_then(|r| r.split('`').next())
        {
            path = if path.is_empty() { field.to_string() } else { format!("{path}.{field}") };
        }
        bad(if path.is_empty() { "<root>" } else { &path }, reason)
    })
}
