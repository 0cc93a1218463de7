//! Config-driven experiments: wedge locality, commutator decay, clustering
//! and the algebraic/geometric check suites, each producing a report.

mod checks;
mod cluster;
pub mod fit;
mod locality;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::TestFunction;
use crate::geometry::{transform_theta, LorentzTransform, MinkowskiVector, ThetaMatrix, Wedge};
use crate::numerics::fmt_g17;
use crate::wick::{FreeField, QuadratureSpec};

pub use checks::{run_space_checks, run_star_checks};
pub use cluster::run_cluster_scan;
pub use fit::{fit_decay, DecayFit, FitOutcome, ScanPoint};
pub use locality::{run_decay_scan, run_wedge_locality};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    WedgeLocality,
    DecayScan,
    ClusterScan,
    StarChecks,
    SpaceChecks,
}

impl ExperimentKind {
    pub fn subcommand(&self) -> &'static str {
        match self {
            ExperimentKind::WedgeLocality => "wedge-locality",
            ExperimentKind::DecayScan => "decay-scan",
            ExperimentKind::ClusterScan => "cluster-scan",
            ExperimentKind::StarChecks => "star-checks",
            ExperimentKind::SpaceChecks => "space-checks",
        }
    }
}

/// `θ = Λ θ₁ Λᵀ` with `Λ` the x¹-boost of the given rapidity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaDescriptor {
    pub vartheta_e: f64,
    pub vartheta_m: f64,
    pub rapidity: f64,
}

impl Default for ThetaDescriptor {
    fn default() -> Self {
        Self { vartheta_e: 1.0, vartheta_m: 0.0, rapidity: 0.0 }
    }
}

impl ThetaDescriptor {
    pub fn boost(&self, dim: usize) -> Result<LorentzTransform> {
        LorentzTransform::boost(dim, 1, self.rapidity)
    }

    pub fn theta(&self, dim: usize) -> Result<ThetaMatrix> {
        let reference = ThetaMatrix::reference(self.vartheta_e, self.vartheta_m, dim)?;
        transform_theta(&self.boost(dim)?, &reference)
    }

    pub fn wedge(&self, dim: usize) -> Result<Wedge> {
        Ok(Wedge::boosted(self.boost(dim)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub lambdas: Vec<f64>,
    pub direction: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub report: String,
    pub table: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { report: "report.json".into(), table: "table.csv".into() }
    }
}

/// One experiment, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_mass")]
    pub mass: f64,
    #[serde(default)]
    pub theta: ThetaDescriptor,
    /// Named test functions referenced by the slot lists below.
    #[serde(default)]
    pub functions: BTreeMap<String, TestFunction>,
    #[serde(default)]
    pub bra: Vec<String>,
    #[serde(default)]
    pub left: Option<String>,
    #[serde(default)]
    pub right: Option<String>,
    #[serde(default)]
    pub ket: Vec<String>,
    /// Cluster scan: the fixed pair and the translated pair.
    #[serde(default)]
    pub first: Vec<String>,
    #[serde(default)]
    pub second: Vec<String>,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    /// Wedge locality: common translation of the commutator slots.
    #[serde(default)]
    pub translation: Option<Vec<f64>>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Decay scan: repeat at doubled resolution and compare exponents.
    #[serde(default = "default_true")]
    pub check_doubling: bool,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_dim() -> usize {
    2
}

fn default_mass() -> f64 {
    1.0
}

fn default_tolerance() -> f64 {
    0.01
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        for (name, f) in cfg.functions.iter_mut() {
            *f = f.clone().validated().map_err(|e| Error::Config(format!("function `{name}`: {e}")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!("schema_version {} not supported", self.schema_version)));
        }
        if self.dim != 2 && self.dim != 4 {
            return Err(Error::Config(format!("dim {} not supported", self.dim)));
        }
        if !(self.mass > 0.0) {
            return Err(Error::Config("mass must be positive".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        for (name, f) in &self.functions {
            let f = f.clone().validated().map_err(|e| Error::Config(format!("function `{name}`: {e}")))?;
            if f.dim() != self.dim {
                return Err(Error::Config(format!("function `{name}` has dimension {}", f.dim())));
            }
        }
        let names = self.bra.iter().chain(&self.ket).chain(&self.first).chain(&self.second).chain(self.left.iter()).chain(self.right.iter());
        for n in names {
            if !self.functions.contains_key(n) {
                return Err(Error::Config(format!("unknown function `{n}`")));
            }
        }
        if let Some(scan) = &self.scan {
            if scan.lambdas.is_empty() || scan.lambdas.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Config("scan.lambdas must be nonempty and strictly increasing".into()));
            }
            if scan.direction.len() != self.dim {
                return Err(Error::Config("scan.direction has the wrong dimension".into()));
            }
        }
        self.quadrature.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.theta.theta(self.dim).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn field(&self) -> Result<FreeField> {
        FreeField::new(self.mass, self.dim)
    }

    pub fn function(&self, name: &str) -> Result<TestFunction> {
        self.functions.get(name).cloned().ok_or_else(|| Error::Config(format!("unknown function `{name}`")))
    }

    pub fn functions_named(&self, names: &[String]) -> Result<Vec<TestFunction>> {
        names.iter().map(|n| self.function(n)).collect()
    }

    fn required(&self, slot: &Option<String>, what: &str) -> Result<TestFunction> {
        let name = slot.as_ref().ok_or_else(|| Error::Config(format!("`{what}` is required")))?;
        self.function(name)
    }

    fn scan(&self) -> Result<&ScanConfig> {
        self.scan.as_ref().ok_or_else(|| Error::Config("`scan` is required".into()))
    }

    fn require_dim2(&self) -> Result<()> {
        if self.dim != 2 {
            return Err(Error::Config(format!("{} runs in d = 2 only", self.experiment.subcommand())));
        }
        Ok(())
    }

    /// Applies command-line overrides.
    pub fn with_overrides(mut self, resolution_scale: Option<f64>, seed: Option<u64>) -> Self {
        if let Some(s) = resolution_scale {
            self.quadrature.resolution_scale *= s;
        }
        if let Some(s) = seed {
            self.seed = s;
        }
        self
    }
}

fn spacelike_direction(v: &[f64]) -> Result<MinkowskiVector> {
    let a = MinkowskiVector::new(v)?;
    if !(a.square() < 0.0) {
        return Err(Error::Config("scan.direction must be spacelike".into()));
    }
    Ok(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

/// A single measured quantity against its criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_quad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contrast: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complex: Option<Complex64>,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, ok: bool, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::from_bool(ok),
            value,
            threshold,
            eps_quad: None,
            contrast: None,
            complex: None,
            detail: detail.into(),
        }
    }

    /// `value < threshold`.
    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self::new(name, value < threshold, value, threshold, format!("{} < {}", fmt_g17(value), fmt_g17(threshold)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub file: String,
    pub rows: Vec<ScanPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: FitOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub status: Status,
    pub config: ExperimentConfig,
    pub elementary_length: f64,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub fits: Vec<NamedFit>,
    pub notes: Vec<String>,
}

impl Report {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            experiment: cfg.experiment,
            status: Status::Pass,
            config: cfg.clone(),
            elementary_length: cfg.theta.theta(cfg.dim)?.elementary_length(),
            checks: Vec::new(),
            tables: Vec::new(),
            fits: Vec::new(),
            notes: Vec::new(),
        })
    }

    /// Worst status over the checks.
    fn finish(mut self) -> Self {
        self.status = self.checks.iter().map(|c| c.status).max().unwrap_or(Status::Inconclusive);
        self
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn fit(&self, name: &str) -> Option<&FitOutcome> {
        self.fits.iter().find(|f| f.name == name).map(|f| &f.fit)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes the report and every table into `dir`; returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        let report = dir.join(&self.config.output.report);
        fs::write(&report, self.to_json()? + "\n")?;
        out.push(report);
        for t in &self.tables {
            let path = dir.join(&t.file);
            fs::write(&path, csv_table(&t.rows))?;
            out.push(path);
        }
        Ok(out)
    }
}

/// `lambda,abs_u,eps_quad` rows in `%.17g`.
pub fn csv_table(rows: &[ScanPoint]) -> String {
    let mut s = String::from("lambda,abs_u,eps_quad\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", fmt_g17(r.lambda), fmt_g17(r.abs_u), fmt_g17(r.eps_quad)));
    }
    s
}

/// `table.csv` → `table_<suffix>.csv`.
fn suffixed(file: &str, suffix: &str) -> String {
    match file.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}_{suffix}.{ext}"),
        None => format!("{file}_{suffix}"),
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::WedgeLocality => run_wedge_locality(cfg),
        ExperimentKind::DecayScan => run_decay_scan(cfg),
        ExperimentKind::ClusterScan => run_cluster_scan(cfg),
        ExperimentKind::StarChecks => run_star_checks(cfg),
        ExperimentKind::SpaceChecks => run_space_checks(cfg),
    }
}

#[cfg(test)]
mod tests;
