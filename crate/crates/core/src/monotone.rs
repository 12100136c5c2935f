//! Representatives of smooth strictly monotone reparametrizations `F`, and
//! the chain rule `D²{F[u]} = F''[u] Du Duᵀ + F'[u] D²u`.
//!
//! The obstruction checked elsewhere in the crate does not depend on which
//! `F` is used; these families exist so that claim can be exercised.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{eval_u, grad_u, hess_u, pow, Alpha, PointE, Sym3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum MonotoneF {
    Identity,
    /// `scale·t + shift`
    Affine {
        scale: f64,
        shift: f64,
    },
    /// `exp(rate·t)`
    Exponential {
        rate: f64,
    },
    /// `(t + shift)^exponent`, defined where `t + shift > 0`
    ShiftedPower {
        shift: f64,
        exponent: f64,
    },
    /// `Σ coefficients[k]·t^k`
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl MonotoneF {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidFamily(msg.to_string()));
        match self {
            MonotoneF::Identity => Ok(()),
            MonotoneF::Affine { scale, shift } => {
                if !scale.is_finite() || !shift.is_finite() || *scale == 0.0 {
                    bad("affine scale must be finite and non-zero")
                } else {
                    Ok(())
                }
            }
            MonotoneF::Exponential { rate } => {
                if !rate.is_finite() || *rate == 0.0 {
                    bad("exponential rate must be finite and non-zero")
                } else {
                    Ok(())
                }
            }
            MonotoneF::ShiftedPower { shift, exponent } => {
                if !shift.is_finite() || !exponent.is_finite() || *exponent == 0.0 {
                    bad("power exponent must be finite and non-zero")
                } else {
                    Ok(())
                }
            }
            MonotoneF::Polynomial { coefficients } => {
                if coefficients.len() < 2 || coefficients.iter().any(|c| !c.is_finite()) {
                    bad("polynomial needs at least a linear term and finite coefficients")
                } else {
                    Ok(())
                }
            }
        }
    }

    /// The families exercised by the obstruction checks.
    pub fn test_families() -> Vec<MonotoneF> {
        vec![
            MonotoneF::Identity,
            MonotoneF::Affine {
                scale: 3.0,
                shift: 7.0,
            },
            MonotoneF::Affine {
                scale: -0.5,
                shift: 1.0,
            },
            MonotoneF::Exponential { rate: 1.0 },
            MonotoneF::Exponential { rate: 5.0 },
            MonotoneF::Exponential { rate: -2.0 },
            MonotoneF::ShiftedPower {
                shift: 1.0,
                exponent: 3.0,
            },
            MonotoneF::ShiftedPower {
                shift: 0.5,
                exponent: 0.5,
            },
            MonotoneF::Polynomial {
                coefficients: vec![0.0, 1.0, 0.5, 0.1],
            },
        ]
    }

    pub fn label(&self) -> String {
        match self {
            MonotoneF::Identity => "identity".into(),
            MonotoneF::Affine { scale, shift } => format!("affine({scale},{shift})"),
            MonotoneF::Exponential { rate } => format!("exp({rate})"),
            MonotoneF::ShiftedPower { shift, exponent } => format!("power({shift},{exponent})"),
            MonotoneF::Polynomial { coefficients } => {
                let c: Vec<String> = coefficients.iter().map(|c| c.to_string()).collect();
                format!("poly({})", c.join(","))
            }
        }
    }

    fn shifted_base(shift: f64, t: f64) -> Result<f64> {
        let b = t + shift;
        if b > 0.0 && b.is_finite() {
            Ok(b)
        } else {
            Err(Error::InvalidFamily(format!(
                "power base t + shift = {b} is not positive"
            )))
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        let v = match self {
            MonotoneF::Identity => t,
            MonotoneF::Affine { scale, shift } => scale * t + shift,
            MonotoneF::Exponential { rate } => (rate * t).exp(),
            MonotoneF::ShiftedPower { shift, exponent } => {
                pow(Self::shifted_base(*shift, t)?, *exponent)
            }
            MonotoneF::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
            }
        };
        finite(v, "F")
    }

    pub fn first(&self, t: f64) -> Result<f64> {
        let d = match self {
            MonotoneF::Identity => 1.0,
            MonotoneF::Affine { scale, .. } => *scale,
            MonotoneF::Exponential { rate } => rate * (rate * t).exp(),
            MonotoneF::ShiftedPower { shift, exponent } => {
                exponent * pow(Self::shifted_base(*shift, t)?, exponent - 1.0)
            }
            MonotoneF::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * t + k as f64 * c),
        };
        finite(d, "F'")
    }

    pub fn second(&self, t: f64) -> Result<f64> {
        let d = match self {
            MonotoneF::Identity | MonotoneF::Affine { .. } => 0.0,
            MonotoneF::Exponential { rate } => rate * rate * (rate * t).exp(),
            MonotoneF::ShiftedPower { shift, exponent } => {
                exponent * (exponent - 1.0) * pow(Self::shifted_base(*shift, t)?, exponent - 2.0)
            }
            MonotoneF::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * t + (k * (k - 1)) as f64 * c),
        };
        finite(d, "F''")
    }

    /// `F''(t)/F'(t)`, evaluated without forming either factor where the
    /// family allows it.
    pub fn curvature_ratio(&self, t: f64) -> Result<f64> {
        match self {
            MonotoneF::Identity | MonotoneF::Affine { .. } => Ok(0.0),
            MonotoneF::Exponential { rate } => Ok(*rate),
            MonotoneF::ShiftedPower { shift, exponent } => {
                Ok((exponent - 1.0) / Self::shifted_base(*shift, t)?)
            }
            MonotoneF::Polynomial { .. } => {
                let d1 = self.strict_first(t)?;
                Ok(self.second(t)? / d1)
            }
        }
    }

    /// `F'(t)`, failing when it vanishes.
    pub fn strict_first(&self, t: f64) -> Result<f64> {
        let d = self.first(t)?;
        if d == 0.0 {
            Err(Error::NotStrictlyMonotone { t, derivative: d })
        } else {
            Ok(d)
        }
    }
}

fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { what })
    }
}

pub fn compose_hessian(f: &MonotoneF, p: &PointE, a: Alpha) -> Result<Sym3> {
    f.validate()?;
    let u = eval_u(p, a)?;
    let g = grad_u(p, a)?;
    let h = hess_u(p, a)?;
    let m = Sym3::outer(&g).scale(f.second(u)?) + h.scale(f.first(u)?);
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::Overflow { what: "D²{F[u]}" })
    }
}

/// `D²{F[u]} / F'[u] = D²u + (F''/F')[u] Du Duᵀ`. Same eigenvalue signs as
/// [`compose_hessian`] up to the sign of `F'`, and finite where `F[u]` is not.
pub fn normalized_compose_hessian(f: &MonotoneF, p: &PointE, a: Alpha) -> Result<Sym3> {
    f.validate()?;
    let u = eval_u(p, a)?;
    let g = grad_u(p, a)?;
    let h = hess_u(p, a)?;
    Ok(h + Sym3::outer(&g).scale(f.curvature_ratio(u)?))
}
