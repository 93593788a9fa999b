use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The four first-kind Fredholm test problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// 1-D image restoration kernel on `[-π/2, π/2]^2`.
    Shaw,
    /// Convolution with a raised cosine on `[-6, 6]^2`.
    Phillips,
    /// `e^{st}` on `[0, 1]^2`.
    Expst,
    /// Green's function of `-d²/ds²` on `[0, 1]^2`.
    Green,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [Self::Shaw, Self::Phillips, Self::Expst, Self::Green];

    pub fn name(self) -> &'static str {
        match self {
            Self::Shaw => "shaw",
            Self::Phillips => "phillips",
            Self::Expst => "expst",
            Self::Green => "green",
        }
    }

    /// `(s1, s2, t1, t2)`.
    pub fn domain(self) -> (f64, f64, f64, f64) {
        match self {
            Self::Shaw => (-FRAC_PI_2, FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2),
            Self::Phillips => (-6.0, 6.0, -6.0, 6.0),
            Self::Expst | Self::Green => (0.0, 1.0, 0.0, 1.0),
        }
    }

    /// Reference sizes `(m, n)`.
    pub fn default_dims(self) -> (usize, usize) {
        match self {
            Self::Shaw => (2500, 2001),
            Self::Phillips => (3000, 2501),
            Self::Expst => (3500, 3001),
            Self::Green => (4000, 3501),
        }
    }

    pub fn kernel(self, s: f64, t: f64) -> f64 {
        match self {
            Self::Shaw => {
                let c = s.cos() + t.cos();
                let u = PI * (s.sin() + t.sin());
                c * c * sinc_squared(u)
            }
            Self::Phillips => phillips_bump(s - t),
            Self::Expst => (s * t).exp(),
            Self::Green => {
                if s < t {
                    s * (1.0 - t)
                } else {
                    t * (1.0 - s)
                }
            }
        }
    }

    pub fn solution(self, t: f64) -> f64 {
        match self {
            Self::Shaw => 2.0 * (-6.0 * (t - 0.8).powi(2)).exp() + (-2.0 * (t + 0.5).powi(2)).exp(),
            Self::Phillips => phillips_bump(t),
            Self::Expst => t.exp() * t.cos(),
            Self::Green => t - 2.0 * t * t + t * t * t,
        }
    }
}

/// `(sin u / u)^2`, continuous at `u = 0`.
fn sinc_squared(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 3.0
    } else {
        let r = u.sin() / u;
        r * r
    }
}

/// `1 + cos(π x / 3)` on `|x| < 3`, zero elsewhere.
fn phillips_bump(x: f64) -> f64 {
    if x.abs() < 3.0 {
        1.0 + (PI * x / 3.0).cos()
    } else {
        0.0
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "shaw" => Ok(Self::Shaw),
            "phillips" => Ok(Self::Phillips),
            "expst" => Ok(Self::Expst),
            "green" => Ok(Self::Green),
            _ => Err(Error::UnknownProblem(s.to_string())),
        }
    }
}
