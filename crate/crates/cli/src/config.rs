//! JSON configuration files and their merge with command line flags. Flags
//! take precedence over the file, the file over built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use pcd_core::distribution::QuadratureConfig;
use pcd_core::inference::{Alternative, Statistic, TestConfig};
use pcd_core::pcd::Expansion;
use pcd_core::simulation::{
    association_delta, association_epsilon, segregation_delta, segregation_epsilon, AlternativeSpec,
    YSource,
};
use pcd_core::{CenterSpec, PcdError, PcdParams, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cli::{AlternativeArg, PatternArg, SimulateArgs, StatisticArg, TestArgs};

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| PcdError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| PcdError::Parse(format!("{}: {e}", path.display())))
}

/// Hex SHA-256 of the canonical JSON form of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("configuration serializes");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

fn usage(msg: impl Into<String>) -> PcdError {
    PcdError::InvalidParameter(msg.into())
}

/// `mc`/`t1`/... or, when absent, `M_C` for `r ≥ 3/2` and `t_1(r)` below.
pub fn resolve_center(spec: Option<&str>, r: Expansion) -> Result<CenterSpec> {
    match spec {
        Some(s) if !s.eq_ignore_ascii_case("auto") => s.parse(),
        _ if r.value() >= 1.5 => Ok(CenterSpec::CenterOfMass),
        _ => Ok(CenterSpec::TauVertex(0)),
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFile {
    pub x: Option<PathBuf>,
    pub y: Option<PathBuf>,
    pub r: Option<Expansion>,
    pub center: Option<String>,
    pub alpha: Option<f64>,
    pub alternative: Option<Alternative>,
    pub statistic: Option<Statistic>,
    pub hull_correction: Option<bool>,
    pub small_sample: Option<bool>,
    pub rel_tol: Option<f64>,
}

/// Fully resolved `test` invocation.
#[derive(Debug, Clone, Serialize)]
pub struct TestPlan {
    pub x: PathBuf,
    pub y: PathBuf,
    pub config: TestConfig,
}

impl TestPlan {
    pub fn resolve(args: &TestArgs) -> Result<Self> {
        let file: TestFile = match &args.config {
            Some(p) => load_json(p)?,
            None => TestFile::default(),
        };
        let x = args.x.clone().or(file.x).ok_or_else(|| usage("missing --x (target points)"))?;
        let y = args.y.clone().or(file.y).ok_or_else(|| usage("missing --y (reference points)"))?;
        let alternative = match args.alternative {
            Some(AlternativeArg::Segregation) => Alternative::Segregation,
            Some(AlternativeArg::Association) => Alternative::Association,
            None => file.alternative.unwrap_or(Alternative::Segregation),
        };
        let statistic = match args.statistic {
            Some(StatisticArg::Normal) => Statistic::Normal,
            Some(StatisticArg::Binomial) => Statistic::Binomial,
            None => file.statistic.unwrap_or(Statistic::Normal),
        };
        let r = match &args.r {
            Some(s) => s.parse()?,
            None => file.r.unwrap_or(Expansion::Finite(match alternative {
                Alternative::Segregation => 1.30,
                Alternative::Association => 1.35,
            })),
        };
        let center = resolve_center(args.center.as_deref().or(file.center.as_deref()), r)?;
        let small_sample = args.small_sample || file.small_sample.unwrap_or(false);
        if small_sample && statistic == Statistic::Binomial {
            return Err(usage("--small-sample conflicts with --statistic binomial"));
        }
        let mut quadrature = QuadratureConfig::default();
        if let Some(t) = args.rel_tol.or(file.rel_tol) {
            quadrature.rel_tol = t;
        }
        let config = TestConfig {
            params: PcdParams { r, center },
            alpha: args.alpha.or(file.alpha).unwrap_or(0.05),
            alternative,
            statistic,
            hull_correction: args.hull_correction || file.hull_correction.unwrap_or(false),
            small_sample_correction: small_sample,
            quadrature,
        };
        config.validate()?;
        Ok(TestPlan { x, y, config })
    }
}

/// Point pattern given by either `epsilon` or the area fraction `delta`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternFile {
    #[serde(default)]
    pub kind: PatternArg,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
}

/// An alternative together with both of its parametrizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedPattern {
    pub spec: AlternativeSpec,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
}

impl ResolvedPattern {
    pub fn metadata(&self) -> Vec<(String, String)> {
        let mut m = vec![("pattern".to_string(), self.spec.label())];
        if let (Some(e), Some(d)) = (self.epsilon, self.delta) {
            m.push(("epsilon".into(), format!("{e}")));
            m.push(("delta".into(), format!("{d}")));
        }
        m
    }
}

impl PatternFile {
    pub fn resolve(&self) -> Result<ResolvedPattern> {
        let kind = self.kind;
        if kind == PatternArg::Csr {
            if self.epsilon.is_some() || self.delta.is_some() {
                return Err(usage("--epsilon/--delta conflict with --pattern csr"));
            }
            return Ok(ResolvedPattern {
                spec: AlternativeSpec::Csr,
                epsilon: None,
                delta: None,
            });
        }
        let seg = kind == PatternArg::Segregation;
        let epsilon = match (self.epsilon, self.delta) {
            (Some(_), Some(_)) => return Err(usage("--epsilon conflicts with --delta")),
            (Some(e), None) => e,
            (None, Some(d)) if seg => segregation_epsilon(d)?,
            (None, Some(d)) => association_epsilon(d)?,
            (None, None) => return Err(usage("this pattern needs --epsilon or --delta")),
        };
        let (spec, delta) = if seg {
            (AlternativeSpec::Segregation { epsilon }, segregation_delta(epsilon)?)
        } else {
            (AlternativeSpec::Association { epsilon }, association_delta(epsilon)?)
        };
        spec.validate()?;
        Ok(ResolvedPattern {
            spec,
            epsilon: Some(epsilon),
            delta: Some(delta),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencySpec {
    pub n: Vec<usize>,
    pub r: Vec<Expansion>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizePowerSpec {
    pub n: usize,
    pub r: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiOutSpec {
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    /// Defaults to the top-level `n_mc`.
    pub n_mc: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramSpec {
    pub n: usize,
    pub r: Expansion,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_n_mc() -> usize {
    1000
}

fn default_y_source() -> YSource {
    YSource::Frozen
}

/// `simulate` configuration. Each experiment section is optional and
/// produces one output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimFile {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default = "default_y_source")]
    pub y_source: YSource,
    #[serde(default)]
    pub pattern: PatternFile,
    /// `mc`, `t1`.. or `auto`.
    pub center: Option<String>,
    /// r at which a `t_i` center is placed for frequency tables and
    /// histograms (default 1.5).
    pub center_r: Option<f64>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    pub frequency: Option<FrequencySpec>,
    pub size_power: Option<SizePowerSpec>,
    pub pi_out: Option<PiOutSpec>,
    pub histogram: Option<HistogramSpec>,
}

impl SimFile {
    /// Reads the file and applies flag overrides.
    pub fn resolve(args: &SimulateArgs) -> Result<Self> {
        let mut f: SimFile = load_json(&args.config)?;
        if let Some(s) = args.seed {
            f.seed = s;
        }
        if let Some(n) = args.n_mc {
            f.n_mc = n;
        }
        if let Some(p) = args.pattern {
            f.pattern.kind = p;
        }
        if args.epsilon.is_some() || args.delta.is_some() {
            f.pattern.epsilon = args.epsilon;
            f.pattern.delta = args.delta;
        }
        if let Some(c) = &args.center {
            f.center = Some(c.clone());
        }
        if f.n_mc == 0 {
            return Err(usage("--n-mc must be at least 1"));
        }
        f.quadrature.validate()?;
        if f.frequency.is_none() && f.size_power.is_none() && f.pi_out.is_none() && f.histogram.is_none() {
            return Err(usage(
                "configuration enables no experiment (frequency, size_power, pi_out, histogram)",
            ));
        }
        f.pattern.resolve()?;
        Ok(f)
    }
}
