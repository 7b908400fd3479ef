//! Analytic field rules evaluated on point coordinates.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::ScalarField;
use crate::space::MetricMeasureSpace;

/// Radial profile supported on `|u| < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(rename_all = "kebab-case")]
pub enum BumpProfile {
    /// `(1 − u²)³`.
    C2,
    /// `1 − |u|`.
    Triangle,
}

impl BumpProfile {
    pub fn eval(self, u: f64) -> f64 {
        let a = u.abs();
        if a >= 1.0 {
            return 0.0;
        }
        match self {
            BumpProfile::C2 => (1.0 - u * u).powi(3),
            BumpProfile::Triangle => 1.0 - a,
        }
    }

    /// Derivative in `u` (the one-sided value `∓1` at the triangle's apex is taken as 0).
    pub fn derivative(self, u: f64) -> f64 {
        let a = u.abs();
        if a >= 1.0 {
            return 0.0;
        }
        match self {
            BumpProfile::C2 => -6.0 * u * (1.0 - u * u).powi(2),
            BumpProfile::Triangle => -u.signum(),
        }
    }
}

fn default_one() -> f64 {
    1.0
}

fn default_c2() -> BumpProfile {
    BumpProfile::C2
}

/// JSON description of a scalar field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    /// `amplitude · sin(2π · frequency · x₀ + phase)`.
    Sin {
        #[serde(default = "default_one")]
        frequency: f64,
        #[serde(default = "default_one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `offset + Σ_d coefficients[d] · x_d`.
    Linear {
        coefficients: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// `amplitude · φ(|x − center| / width)`.
    Bump {
        center: Vec<f64>,
        width: f64,
        #[serde(default = "default_one")]
        amplitude: f64,
        #[serde(default = "default_c2")]
        profile: BumpProfile,
    },
    Constant {
        value: f64,
    },
    /// Independent uniform values on `[low, high)`.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default)]
        low: f64,
        #[serde(default = "default_one")]
        high: f64,
    },
    Values {
        values: Vec<f64>,
    },
}

impl FieldSpec {
    pub fn needs_seed(&self) -> bool {
        matches!(self, FieldSpec::Random { seed: None, .. })
    }

    pub fn with_seed(&self, fallback: u64) -> FieldSpec {
        match self {
            FieldSpec::Random {
                seed: None,
                low,
                high,
            } => FieldSpec::Random {
                seed: Some(fallback),
                low: *low,
                high: *high,
            },
            other => other.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        match self {
            FieldSpec::Sin {
                frequency,
                amplitude,
                phase,
            } if !(frequency.is_finite() && amplitude.is_finite() && phase.is_finite()) => {
                bad("sin parameters must be finite")
            }
            FieldSpec::Bump { width, .. } if !(*width > 0.0 && width.is_finite()) => {
                bad("bump width must be positive")
            }
            FieldSpec::Random { low, high, .. }
                if !(low < high && high.is_finite() && low.is_finite()) =>
            {
                bad("random field needs finite low < high")
            }
            _ => Ok(()),
        }
    }

    /// Value at a point, for rules that depend only on coordinates.
    pub fn eval_at(&self, x: &[f64]) -> Result<f64> {
        self.validate()?;
        Ok(match self {
            FieldSpec::Sin {
                frequency,
                amplitude,
                phase,
            } => amplitude * (2.0 * PI * frequency * x[0] + phase).sin(),
            FieldSpec::Linear {
                coefficients,
                offset,
            } => {
                if coefficients.len() != x.len() {
                    return Err(Error::DimensionMismatch {
                        expected: x.len(),
                        got: coefficients.len(),
                    });
                }
                offset + coefficients.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
            }
            FieldSpec::Bump {
                center,
                width,
                amplitude,
                profile,
            } => {
                if center.len() != x.len() {
                    return Err(Error::DimensionMismatch {
                        expected: x.len(),
                        got: center.len(),
                    });
                }
                let r = center
                    .iter()
                    .zip(x)
                    .map(|(c, v)| (v - c) * (v - c))
                    .sum::<f64>()
                    .sqrt();
                amplitude * profile.eval(r / width)
            }
            FieldSpec::Constant { value } => *value,
            FieldSpec::Random { .. } | FieldSpec::Values { .. } => {
                return Err(Error::Config(
                    "rule is not a function of coordinates".into(),
                ))
            }
        })
    }

    pub fn evaluate(&self, space: &MetricMeasureSpace) -> Result<ScalarField> {
        self.validate()?;
        let n = space.len();
        match self {
            FieldSpec::Constant { value } => ScalarField::new(vec![*value; n]),
            FieldSpec::Values { values } => {
                if values.len() != n {
                    return Err(Error::FieldLength {
                        expected: n,
                        got: values.len(),
                    });
                }
                ScalarField::new(values.clone())
            }
            FieldSpec::Random { seed, low, high } => {
                let seed =
                    seed.ok_or_else(|| Error::Config("random field requires a seed".into()))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                ScalarField::new((0..n).map(|_| rng.gen_range(*low..*high)).collect())
            }
            _ => {
                if !space.has_coords() {
                    return Err(Error::MissingCoordinates("field rule needs coordinates"));
                }
                let values = (0..n)
                    .map(|i| self.eval_at(space.coords(i).unwrap()))
                    .collect::<Result<Vec<_>>>()?;
                ScalarField::new(values)
            }
        }
    }

    /// Derivative of a one-dimensional rule.
    fn derivative_1d(&self, x: f64) -> Option<f64> {
        Some(match self {
            FieldSpec::Sin {
                frequency,
                amplitude,
                phase,
            } => amplitude * 2.0 * PI * frequency * (2.0 * PI * frequency * x + phase).cos(),
            FieldSpec::Linear { coefficients, .. } if coefficients.len() == 1 => coefficients[0],
            FieldSpec::Bump {
                center,
                width,
                amplitude,
                profile,
            } if center.len() == 1 => {
                amplitude / width * profile.derivative((x - center[0]) / width)
            }
            FieldSpec::Constant { .. } => 0.0,
            _ => return None,
        })
    }

    /// `∫_lo^hi |f′|^p dx` for one-dimensional rules, with a note on how it
    /// was obtained. Closed forms are used where available.
    pub fn gradient_integral_1d(&self, p: f64, lo: f64, hi: f64) -> Option<(f64, &'static str)> {
        if let FieldSpec::Bump {
            center,
            width,
            amplitude,
            profile: BumpProfile::C2,
        } = self
        {
            if p == 2.0 && center.len() == 1 && center[0] - width >= lo && center[0] + width <= hi {
                return Some((
                    amplitude * amplitude * 9216.0 / (3465.0 * width),
                    "closed form",
                ));
            }
        }
        if let FieldSpec::Bump {
            center,
            width,
            amplitude,
            profile: BumpProfile::Triangle,
        } = self
        {
            if center.len() == 1 && center[0] - width >= lo && center[0] + width <= hi {
                return Some((
                    2.0 * width * (amplitude.abs() / width).powf(p),
                    "closed form",
                ));
            }
        }
        if let FieldSpec::Constant { .. } = self {
            return Some((0.0, "closed form"));
        }
        self.derivative_1d(lo)?;
        Some((
            simpson(
                |x| self.derivative_1d(x).unwrap().abs().powf(p),
                lo,
                hi,
                1 << 16,
            ),
            "composite Simpson, 65536 panels",
        ))
    }
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut acc = f(lo) + f(hi);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + k as f64 * h);
    }
    acc * h / 3.0
}
