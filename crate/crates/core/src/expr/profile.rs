//! Grid-based sanity checks for the profile function `f` of the
//! Levi-Civita family. This is a heuristic guard: a function can pass on
//! the grid and still dip below the bound between grid points.

use serde::{Deserialize, Serialize};

use super::{Expression, Program};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    /// Required clearance above 1.
    pub margin: f64,
    pub tol_periodic: f64,
    /// Minimum spread `max f - min f`.
    pub margin_nonconst: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            margin: 1e-6,
            tol_periodic: 1e-9,
            margin_nonconst: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileViolation {
    /// `min f <= 1 + margin` on the grid.
    NotAboveOne { min: f64, at: f64 },
    NotPeriodic { f0: f64, f1: f64 },
    Constant { spread: f64 },
}

impl std::fmt::Display for ProfileViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProfileViolation::NotAboveOne { min, at } => write!(f, "f <= 1: min {min} at {at}"),
            ProfileViolation::NotPeriodic { f0, f1 } => {
                write!(f, "not 1-periodic: f(0) = {f0}, f(1) = {f1}")
            }
            ProfileViolation::Constant { spread } => {
                write!(f, "f is constant on the grid (spread {spread:e})")
            }
        }
    }
}

/// Checks `f > 1`, 1-periodicity and nonconstancy of `expr` (a function of
/// `var`) on the grid `{i / grid}`.
pub fn validate_profile(
    expr: &Expression,
    var: &str,
    grid: usize,
    opts: &ProfileOptions,
) -> Result<Vec<ProfileViolation>> {
    if grid < 16 {
        return Err(Error::Invalid(format!("profile grid {grid} < 16")));
    }
    let program = Program::compile(expr, &[var])?;
    let eval = |t: f64| {
        program.eval(&[t]).map_err(|e| Error::AtGridPoint {
            point: t,
            source: Box::new(e),
        })
    };
    let mut min = (f64::INFINITY, 0.0);
    let mut max = f64::NEG_INFINITY;
    for i in 0..=grid {
        let t = i as f64 / grid as f64;
        let v = eval(t)?;
        if v < min.0 {
            min = (v, t);
        }
        max = max.max(v);
    }
    let mut out = Vec::new();
    if min.0 <= 1.0 + opts.margin {
        out.push(ProfileViolation::NotAboveOne {
            min: min.0,
            at: min.1,
        });
    }
    let (f0, f1) = (eval(0.0)?, eval(1.0)?);
    if (f0 - f1).abs() > opts.tol_periodic {
        out.push(ProfileViolation::NotPeriodic { f0, f1 });
    }
    if max - min.0 <= opts.margin_nonconst {
        out.push(ProfileViolation::Constant {
            spread: max - min.0,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn run(src: &str) -> Vec<ProfileViolation> {
        validate_profile(&parse(src).unwrap(), "x", 256, &ProfileOptions::default()).unwrap()
    }

    #[test]
    fn default_profile_passes() {
        assert!(run("2 + 0.5*cos(2*pi*x)").is_empty());
    }

    #[test]
    fn low_profile_rejected() {
        let v = run("1 + 0.5*cos(2*pi*x)");
        assert_eq!(v.len(), 1);
        match v[0] {
            ProfileViolation::NotAboveOne { min, at } => {
                assert!((min - 0.5).abs() < 1e-12);
                assert_eq!(at, 0.5);
            }
            ref other => panic!("{other:?}"),
        }
    }

    #[test]
    fn linear_function_not_periodic() {
        let v = run("x");
        assert!(v.contains(&ProfileViolation::NotPeriodic { f0: 0.0, f1: 1.0 }));
    }

    #[test]
    fn constant_flagged() {
        assert_eq!(run("2"), vec![ProfileViolation::Constant { spread: 0.0 }]);
    }

    #[test]
    fn evaluation_error_carries_grid_point() {
        let err = validate_profile(&parse("log(x)").unwrap(), "x", 16, &ProfileOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::AtGridPoint { point, .. } if point == 0.0));
    }

    #[test]
    fn small_grid_rejected() {
        assert!(validate_profile(&parse("x").unwrap(), "x", 8, &ProfileOptions::default()).is_err());
    }
}
