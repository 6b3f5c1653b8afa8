//! Experiment configuration files (TOML).

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use warpcone_core::algebra::{diagnose, library, GeneratorSet, Rational5, RationalMatrix};
use warpcone_core::manifold::ManifoldModel;
use warpcone_core::net::expected_net_size;
use warpcone_core::spectral::{Control, ControlFunctions};
use warpcone_core::warped::ActionSpec;

use crate::CliError;

pub const WARNING: &str = "warning: ";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// `sphere:d`, `torus:d` or `so3`.
    pub model: String,
    pub generators: GeneratorSpec,
    #[serde(default)]
    pub t_sequence: Vec<f64>,
    #[serde(default)]
    pub samples: SampleConfig,
    pub seeds: Seeds,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default)]
    pub probes: Probes,
    #[serde(default)]
    pub certificate: CertificateConfig,
    #[serde(default)]
    pub coarse: CoarseConfig,
    #[serde(default)]
    pub limits: Limits,
}

fn default_out_dir() -> String {
    "out".into()
}

/// Either a library name or explicit matrices with their inverse pairs.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub library: Option<String>,
    pub dim: Option<usize>,
    #[serde(default)]
    pub matrix: Vec<MatrixSpec>,
    /// Inverse pairs `[a, A]`; an involution is paired with itself.
    #[serde(default)]
    pub pairs: Vec<[String; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub label: String,
    /// Row-major entries such as `"3/5"`, `"-24/25"` or `"1"`.
    pub entries: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    #[serde(default = "default_per_region")]
    pub per_region: usize,
    #[serde(default = "default_threshold")]
    pub edge_threshold: usize,
}

fn default_per_region() -> usize {
    100
}

fn default_threshold() -> usize {
    1
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            per_region: default_per_region(),
            edge_threshold: default_threshold(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub net: u64,
    pub samples: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probes {
    #[serde(default = "yes")]
    pub spectrum: bool,
    #[serde(default = "yes")]
    pub cheeger: bool,
    #[serde(default = "yes")]
    pub gap: bool,
    #[serde(default = "yes")]
    pub chi: bool,
    #[serde(default = "default_chi_r")]
    pub chi_r: f64,
    #[serde(default = "default_eigenvalues")]
    pub eigenvalues: usize,
}

fn yes() -> bool {
    true
}

fn default_chi_r() -> f64 {
    1.0
}

fn default_eigenvalues() -> usize {
    4
}

impl Default for Probes {
    fn default() -> Self {
        Probes {
            spectrum: true,
            cheeger: true,
            gap: true,
            chi: true,
            chi_r: default_chi_r(),
            eigenvalues: default_eigenvalues(),
        }
    }
}

/// Certificate inputs; any value left out is taken from the last
/// successful level of the run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    pub p_size: Option<u64>,
    pub q: Option<f64>,
    pub d: Option<u64>,
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub rho_minus: ControlSpec,
    #[serde(default)]
    pub rho_plus: ControlSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSpec {
    #[serde(default = "default_family")]
    pub family: String,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub scale: Option<f64>,
    #[serde(default)]
    pub table: Vec<[f64; 2]>,
}

fn default_family() -> String {
    "identity".into()
}

impl Default for ControlSpec {
    fn default() -> Self {
        ControlSpec {
            family: default_family(),
            slope: None,
            intercept: None,
            scale: None,
            table: Vec::new(),
        }
    }
}

impl ControlSpec {
    pub fn to_control(&self) -> Result<Control, String> {
        let c = match self.family.as_str() {
            "identity" => Control::Identity,
            "affine" => Control::Affine {
                slope: self.slope.ok_or("affine control needs slope")?,
                intercept: self.intercept.unwrap_or(0.0),
            },
            "log" => Control::Log {
                scale: self.scale.ok_or("log control needs scale")?,
                intercept: self.intercept.unwrap_or(0.0),
            },
            "table" => Control::Table(self.table.iter().map(|p| (p[0], p[1])).collect()),
            other => return Err(format!("unknown control family {other:?}")),
        };
        c.validate().map_err(|e| e.to_string())?;
        Ok(c)
    }
}

impl CertificateConfig {
    pub fn controls(&self) -> Result<ControlFunctions, String> {
        Ok(ControlFunctions {
            rho_minus: self.rho_minus.to_control()?,
            rho_plus: self.rho_plus.to_control()?,
        })
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseConfig {
    /// Radius `r` for the subsequence separation over the run's graph sizes.
    pub separation_radius: Option<u32>,
    /// Exact vertex counts to schedule.
    #[serde(default)]
    pub schedule_targets: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    #[serde(default = "default_ball_cap")]
    pub ball_cap: usize,
    #[serde(default = "default_max_net")]
    pub max_net: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_ball_cap() -> usize {
    warpcone_core::algebra::DEFAULT_BALL_CAP
}

fn default_max_net() -> usize {
    200_000
}

fn default_workers() -> usize {
    1
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            ball_cap: default_ball_cap(),
            max_net: default_max_net(),
            workers: default_workers(),
        }
    }
}

/// A parsed configuration with the raw document it came from.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub raw: toml::Value,
}

pub fn parse(text: &str) -> Result<LoadedConfig, CliError> {
    let raw: toml::Value = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let config: ExperimentConfig = raw.clone().try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    Ok(LoadedConfig { config, raw })
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text)
}

/// SHA-256 of the canonical JSON form of the document: keys sorted at every
/// level, so reordering fields leaves it unchanged.
pub fn config_hash(raw: &toml::Value) -> String {
    let json = serde_json::to_value(raw).expect("TOML values convert to JSON");
    let canonical = serde_json::to_string(&json).expect("serializable");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl ExperimentConfig {
    pub fn model(&self) -> Result<ManifoldModel, String> {
        self.model.parse::<ManifoldModel>().map_err(|e| e.to_string())
    }

    fn explicit_generators(&self) -> Result<(usize, Vec<(String, RationalMatrix)>, Vec<(String, String)>), String> {
        let spec = &self.generators;
        let dim = spec.dim.ok_or("explicit generators need dim")?;
        let mut gens = Vec::new();
        for m in &spec.matrix {
            if m.entries.len() != dim * dim {
                return Err(format!(
                    "generator {:?} has {} entries, expected {}",
                    m.label,
                    m.entries.len(),
                    dim * dim
                ));
            }
            let entries = m
                .entries
                .iter()
                .map(|e| e.parse::<Rational5>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format!("generator {:?}: {e}", m.label))?;
            let mat = RationalMatrix::from_entries(dim, &entries).map_err(|e| e.to_string())?;
            gens.push((m.label.clone(), mat));
        }
        let pairs = spec.pairs.iter().map(|[a, b]| (a.clone(), b.clone())).collect();
        Ok((dim, gens, pairs))
    }

    pub fn generator_set(&self) -> Result<GeneratorSet, String> {
        match (&self.generators.library, self.generators.matrix.is_empty()) {
            (Some(name), true) => library::by_name(name).map_err(|e| e.to_string()),
            (Some(_), false) => Err("give either a generator library name or matrices, not both".into()),
            (None, _) => {
                let (dim, gens, pairs) = self.explicit_generators()?;
                GeneratorSet::new(dim, gens, &pairs).map_err(|e| e.to_string())
            }
        }
    }

    pub fn action(&self) -> Result<ActionSpec, CliError> {
        let model = self.model().map_err(CliError::Config)?;
        let gens = self.generator_set().map_err(CliError::Config)?;
        ActionSpec::new(model, gens).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Static checks. Entries starting with [`WARNING`] are estimates (caps
    /// that may be exceeded) and do not stop a run.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let model = match self.model() {
            Ok(m) => Some(m),
            Err(e) => {
                out.push(e);
                None
            }
        };
        let gens = if self.generators.library.is_some() {
            self.generator_set().map_err(|e| out.push(e)).ok()
        } else {
            match self.explicit_generators() {
                Ok((dim, gens, pairs)) => {
                    let problems = diagnose(dim, &gens, &pairs);
                    if problems.is_empty() {
                        self.generator_set().map_err(|e| out.push(e)).ok()
                    } else {
                        out.extend(problems);
                        None
                    }
                }
                Err(e) => {
                    out.push(e);
                    None
                }
            }
        };
        if let (Some(model), Some(gens)) = (model, &gens) {
            if let Err(e) = ActionSpec::new(model, gens.clone()) {
                out.push(e.to_string());
            }
        }
        if self.t_sequence.windows(2).any(|w| !(w[1] > w[0])) {
            out.push("t_sequence is not increasing".into());
        }
        if self.t_sequence.iter().any(|&t| !(t >= 1.0) || !t.is_finite()) {
            out.push("every t in t_sequence must be a finite number >= 1".into());
        }
        if self.samples.per_region < 100 {
            out.push(format!("samples.per_region is {}, at least 100 are required", self.samples.per_region));
        }
        if self.samples.edge_threshold == 0 {
            out.push("samples.edge_threshold must be at least 1".into());
        }
        if let (Some(model), Some(&t)) = (model, self.t_sequence.last()) {
            let n = expected_net_size(&model, 1.0 / t);
            if n > self.limits.max_net {
                out.push(format!(
                    "{WARNING}a net at t = {t} may reach {n} points, above limits.max_net = {}",
                    self.limits.max_net
                ));
            }
        }
        if let Some(gens) = &gens {
            let radius = libm_floor(6.0 * self.probes.chi_r);
            let bound = free_ball_bound(gens.len(), radius);
            if self.probes.chi && bound > self.limits.ball_cap as f64 && free_ball_bound(gens.len(), 1) > 1.0 {
                out.push(format!(
                    "{WARNING}the chi probe enumerates words up to length {radius}; up to {bound:.0} elements exceed limits.ball_cap = {}",
                    self.limits.ball_cap
                ));
            }
        }
        if !(self.probes.chi_r >= 0.0) {
            out.push("probes.chi_r must be non-negative".into());
        }
        if self.limits.workers == 0 {
            out.push("limits.workers must be at least 1".into());
        }
        if let Err(e) = self.certificate.controls() {
            out.push(e);
        }
        let mut seen = BTreeSet::new();
        if self.coarse.schedule_targets.iter().any(|t| !seen.insert(*t))
            || self.coarse.schedule_targets.windows(2).any(|w| w[1] <= w[0])
        {
            out.push("coarse.schedule_targets must be strictly increasing".into());
        }
        out
    }
}

/// Diagnostics that are not errors.
pub fn errors(diagnostics: &[String]) -> Vec<&String> {
    diagnostics.iter().filter(|d| !d.starts_with(WARNING)).collect()
}

fn libm_floor(x: f64) -> usize {
    (x + 1e-12).floor() as usize
}

/// Size of the ball of radius `r` in a free group on `s` symmetric
/// generators, an upper bound for any group with `s` generators.
fn free_ball_bound(s: usize, r: usize) -> f64 {
    if s == 0 {
        return 1.0;
    }
    let mut total = 1.0;
    let mut sphere = s as f64;
    for _ in 0..r {
        total += sphere;
        sphere *= (s as f64 - 1.0).max(1.0);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
name = "demo"
model = "sphere:2"
t_sequence = [8, 16]
[generators]
library = "rotation-s1"
[seeds]
net = 1
samples = 2
"#;

    #[test]
    fn hash_ignores_field_order() {
        let reordered = r#"
model = "sphere:2"
name = "demo"
[seeds]
samples = 2
net = 1
[generators]
library = "rotation-s1"
"#;
        let a = parse(BASIC).unwrap();
        let b = parse(&format!("t_sequence = [8, 16]\n{reordered}")).unwrap();
        assert_eq!(config_hash(&a.raw), config_hash(&b.raw));
        let c = parse(&BASIC.replace("samples = 2", "samples = 3")).unwrap();
        assert_ne!(config_hash(&a.raw), config_hash(&c.raw));
    }

    #[test]
    fn diagnostics() {
        assert!(parse(BASIC).unwrap().config.validate().is_empty());
        let big = parse(&BASIC.replace("rotation-s1", "lps-s2").replace("sphere:2", "sphere:3").replace("[seeds]", "[probes]\nchi_r = 2.0\n[limits]\nball_cap = 1000\n[seeds]"))
            .unwrap()
            .config
            .validate();
        assert_eq!(big.len(), 1, "{big:?}");
        assert!(big[0].starts_with(WARNING) && errors(&big).is_empty());
        let bad = parse(&BASIC.replace("[8, 16]", "[8, 4]")).unwrap().config;
        assert!(bad.validate().iter().any(|d| d.contains("not increasing")));
        let asym = r#"
name = "asym"
model = "sphere:2"
[generators]
dim = 2
[[generators.matrix]]
label = "a"
entries = ["3/5", "-4/5", "4/5", "3/5"]
[seeds]
net = 1
samples = 2
"#;
        let d = parse(asym).unwrap().config.validate();
        assert!(d.iter().any(|m| m.contains("not closed under inverse")), "{d:?}");
        assert!(parse("name = 1").is_err());
    }

    #[test]
    fn explicit_generators_build_an_action() {
        let text = r#"
name = "explicit"
model = "sphere:2"
[generators]
dim = 2
pairs = [["a", "A"]]
[[generators.matrix]]
label = "a"
entries = ["3/5", "-4/5", "4/5", "3/5"]
[[generators.matrix]]
label = "A"
entries = ["3/5", "4/5", "-4/5", "3/5"]
[seeds]
net = 1
samples = 2
"#;
        let cfg = parse(text).unwrap().config;
        assert!(cfg.validate().is_empty(), "{:?}", cfg.validate());
        assert_eq!(cfg.action().unwrap().gens.len(), 2);
    }
}
