use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemKind;
use crate::regularization::DEFAULT_TAU;

/// Noise levels of the convergence sweep.
pub const SWEEP_EPSILONS: [f64; 6] = [3.2e-2, 1.6e-2, 8e-3, 4e-3, 2e-3, 1e-3];

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Dp,
    Lc,
    Oracle,
    Maxiter,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Dp => "dp",
            RuleKind::Lc => "lc",
            RuleKind::Oracle => "oracle",
            RuleKind::Maxiter => "maxiter",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Wlsqr,
    Lsqr,
    TikhOpt,
    Twsvd,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Wlsqr => "wlsqr",
            Method::Lsqr => "lsqr",
            Method::TikhOpt => "tikh-opt",
            Method::Twsvd => "twsvd",
        }
    }

    /// Whether the method needs a dense weighted SVD of the matrix.
    pub fn needs_wsvd(self) -> bool {
        matches!(self, Method::TikhOpt | Method::Twsvd)
    }

    /// Tikhonov's parameter is only ever chosen against the true solution.
    pub fn supports(self, rule: RuleKind) -> bool {
        self != Method::TikhOpt || rule == RuleKind::Oracle
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything an experiment run depends on. Serializes to TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemKind>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub epsilons: Vec<f64>,
    pub seeds: Vec<u64>,
    pub rules: Vec<RuleKind>,
    pub methods: Vec<Method>,
    pub tau: f64,
    pub max_iter: usize,
    pub reorth: bool,
    pub paper_h: bool,
    pub jobs: Option<usize>,
    /// Read the problem from a directory written by `gen` instead of
    /// generating it.
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problems: vec![ProblemKind::Shaw],
            m: None,
            n: None,
            epsilons: vec![1e-3],
            seeds: vec![0],
            rules: vec![RuleKind::Dp],
            methods: vec![Method::Wlsqr],
            tau: DEFAULT_TAU,
            max_iter: 200,
            reorth: true,
            paper_h: false,
            jobs: None,
            input: None,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))
    }

    /// `(m, n)` for `kind`. A lone `n` scales `m` by the reference aspect ratio.
    pub fn dims(&self, kind: ProblemKind) -> (usize, usize) {
        let (m0, n0) = kind.default_dims();
        match (self.m, self.n) {
            (Some(m), Some(n)) => (m, n),
            (Some(m), None) => (m, n0),
            (None, Some(n)) => (((m0 * n) as f64 / n0 as f64).round() as usize, n),
            (None, None) => (m0, n0),
        }
    }

    /// Checks every value up front so that no run starts on a bad config.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.problems.is_empty() && self.input.is_none() {
            return bad("at least one problem is required".into());
        }
        for &kind in &self.problems {
            let (m, n) = self.dims(kind);
            if n < 3 || n % 2 == 0 {
                return bad(format!("{kind}: n must be odd and >= 3, got {n}"));
            }
            if m == 0 {
                return bad(format!("{kind}: m must be positive"));
            }
        }
        if self.epsilons.is_empty() {
            return bad("at least one noise level is required".into());
        }
        if let Some(e) = self
            .epsilons
            .iter()
            .find(|e| !(e.is_finite() && **e >= 0.0))
        {
            return bad(format!("noise level must be finite and >= 0, got {e}"));
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if let Some(s) = self.seeds.iter().find(|&&s| s > i64::MAX as u64) {
            return bad(format!("seed {s} does not fit in a signed 64-bit integer"));
        }
        if self.rules.is_empty() || self.methods.is_empty() {
            return bad("at least one rule and one method are required".into());
        }
        if !(self.tau > 1.0 && self.tau.is_finite()) {
            return bad(format!("tau must exceed 1, got {}", self.tau));
        }
        if self.max_iter == 0 {
            return bad("max-iter must be at least 1".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        if self.input.is_none()
            && self.rules.contains(&RuleKind::Dp)
            && self.epsilons.contains(&0.0)
        {
            return bad("the discrepancy principle needs a positive noise level".into());
        }
        Ok(())
    }
}
