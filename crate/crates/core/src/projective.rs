//! Projective, affine and isometric comparison of metrics, at sampled
//! resolution.
//!
//! Two Levi-Civita connections have the same unparameterized geodesics iff
//! their difference has the form `D^i_{jk} = δ^i_j ψ_k + δ^i_k ψ_j`. Taking
//! the trace gives `ψ_k = D^s_{sk}/(n+1)`; the residual is what is left of
//! `D` after removing that part. Residuals are reported relative to
//! `max(‖Γ‖, ‖Γ̄‖, 1)` at the same point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charts::{pullback_field, pullback_metric, Diffeomorphism, MetricField, Point};
use crate::error::{Error, Result};
use crate::geodesics::{christoffel, Christoffel};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub iso: f64,
    pub aff: f64,
    pub proj: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::uniform(1e-8)
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            iso: tol,
            aff: tol,
            proj: tol,
        }
    }
}

fn connection_scale<T: Real>(a: &Christoffel<T>, b: &Christoffel<T>) -> T {
    a.max_abs().max(b.max_abs()).max(T::one())
}

/// `D = Γ̄ − Γ`.
pub fn connection_difference<T: Real>(g: &MetricField, gbar: &MetricField, p: &Point<T>) -> Result<Christoffel<T>> {
    Ok(christoffel(g, p)?.difference(&christoffel(gbar, p)?))
}

/// Relative max-norm of `Γ̄ − Γ`.
pub fn affine_residual<T: Real>(g: &MetricField, gbar: &MetricField, p: &Point<T>) -> Result<T> {
    let (a, b) = (christoffel(g, p)?, christoffel(gbar, p)?);
    Ok(a.difference(&b).max_abs() / connection_scale(&a, &b))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivePoint<T> {
    pub psi: Vec<T>,
    /// Absolute max-norm of `D − δψ − δψ`.
    pub absolute: T,
    /// `absolute` divided by the connection scale.
    pub residual: T,
}

pub fn projective_residual<T: Real>(g: &MetricField, gbar: &MetricField, p: &Point<T>) -> Result<ProjectivePoint<T>> {
    let (a, b) = (christoffel(g, p)?, christoffel(gbar, p)?);
    let d = a.difference(&b);
    let n = d.dim();
    let denom = T::lit((n + 1) as f64);
    let psi: Vec<T> = (0..n)
        .map(|k| (0..n).fold(T::zero(), |s, i| s + d.get(i, i, k)) / denom)
        .collect();
    let mut absolute = T::zero();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut r = d.get(i, j, k);
                if i == j {
                    r = r - psi[k];
                }
                if i == k {
                    r = r - psi[j];
                }
                absolute = absolute.max(r.abs());
            }
        }
    }
    Ok(ProjectivePoint {
        residual: absolute / connection_scale(&a, &b),
        psi,
        absolute,
    })
}

/// `∂_k ln(det ḡ / det g) / (2(n+1))`, from `tr(g⁻¹ ∂_k g)`.
pub fn psi_from_volume<T: Real>(g: &MetricField, gbar: &MetricField, p: &Point<T>) -> Result<Vec<T>> {
    let log_det_grad = |m: &MetricField| -> Result<Vec<T>> {
        let jet = m.jet(p)?;
        let inv = jet.value.inverse()?;
        Ok(jet.partials.iter().map(|dk| (&inv * dk).trace()).collect())
    };
    let (a, b) = (log_det_grad(g)?, log_det_grad(gbar)?);
    let denom = T::lit(2.0 * (g.dim() + 1) as f64);
    Ok(a.iter().zip(&b).map(|(&x, &y)| (y - x) / denom).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveReport {
    pub psi: Vec<Vec<f64>>,
    pub residual_per_point: Vec<f64>,
    pub residual_max: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Projective comparison of `g` and `ḡ` over sample points.
pub fn projective_report(
    g: &MetricField,
    gbar: &MetricField,
    samples: &[Point<f64>],
    tolerance: f64,
) -> Result<ProjectiveReport> {
    let per: Vec<ProjectivePoint<f64>> = samples
        .par_iter()
        .map(|p| projective_residual(g, gbar, p))
        .collect::<Result<_>>()?;
    let residual_per_point: Vec<f64> = per.iter().map(|r| r.residual).collect();
    let residual_max = residual_per_point.iter().copied().fold(0.0, f64::max);
    Ok(ProjectiveReport {
        psi: per.into_iter().map(|r| r.psi).collect(),
        residual_per_point,
        residual_max,
        tolerance,
        verdict: if residual_max <= tolerance {
            Verdict::Equivalent
        } else {
            Verdict::NotEquivalent
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapClass {
    Isometry,
    AffineNonisometric,
    ProjectiveNonaffine,
    NotProjective,
}

impl std::fmt::Display for MapClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MapClass::Isometry => "isometry",
            MapClass::AffineNonisometric => "affine-nonisometric",
            MapClass::ProjectiveNonaffine => "projective-nonaffine",
            MapClass::NotProjective => "not-projective",
        })
    }
}

/// Classification of a map together with every supporting residual (all
/// three are always computed so margins can be reported).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapClassification {
    pub class: MapClass,
    /// max over samples of `‖φ*g − g‖ / ‖g‖`.
    pub iso_residual: f64,
    /// max over samples of the relative connection difference.
    pub aff_residual: f64,
    /// max over samples of the relative projective residual.
    pub proj_residual: f64,
    pub tolerances: Tolerances,
    pub samples: usize,
}

fn max_of(values: Vec<f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Tests `φ` against `g` in the order isometry → affine → projective.
pub fn classify_map(
    phi: &Diffeomorphism,
    g: &MetricField,
    samples: &[Point<f64>],
    tol: &Tolerances,
) -> Result<MapClassification> {
    if phi.chart() != g.chart() {
        return Err(Error::Invalid(format!(
            "map `{}` and metric `{}` live on different charts",
            phi.label(),
            g.id()
        )));
    }
    let pulled = pullback_field(phi, g)?;
    let rows: Vec<(f64, f64, f64)> = samples
        .par_iter()
        .map(|p| {
            let gp = g.eval(p)?;
            let iso = (&pullback_metric(phi, g, p)? - &gp).max_abs() / gp.max_abs();
            let aff = affine_residual(g, &pulled, p)?;
            let proj = projective_residual(g, &pulled, p)?.residual;
            Ok((iso, aff, proj))
        })
        .collect::<Result<_>>()?;
    let iso_residual = max_of(rows.iter().map(|r| r.0).collect());
    let aff_residual = max_of(rows.iter().map(|r| r.1).collect());
    let proj_residual = max_of(rows.iter().map(|r| r.2).collect());
    let class = if iso_residual <= tol.iso {
        MapClass::Isometry
    } else if aff_residual <= tol.aff {
        MapClass::AffineNonisometric
    } else if proj_residual <= tol.proj {
        MapClass::ProjectiveNonaffine
    } else {
        MapClass::NotProjective
    };
    Ok(MapClassification {
        class,
        iso_residual,
        aff_residual,
        proj_residual,
        tolerances: *tol,
        samples: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{Chart, Coordinate, Signature};
    use crate::expr::parse;
    use crate::linalg::Matrix;

    fn plane() -> Chart {
        Chart::new(vec![Coordinate::open("x", -2.0, 2.0), Coordinate::open("y", -2.0, 2.0)]).unwrap()
    }

    fn curved() -> MetricField {
        MetricField::new(
            "c",
            plane(),
            vec![
                vec![parse("2 + sin(x*y)").unwrap(), parse("0.2*x").unwrap()],
                vec![parse("0").unwrap(), parse("1 + y^2").unwrap()],
            ],
            Signature::Riemannian,
        )
        .unwrap()
    }

    #[test]
    fn metric_against_itself() {
        let p = Point::new(vec![0.3, -0.4]);
        let r = projective_residual(&curved(), &curved(), &p).unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(r.psi.iter().all(|&v| v == 0.0));
        assert_eq!(connection_difference(&curved(), &curved(), &p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn constant_homothety_is_affine() {
        let g = MetricField::flat("g", plane());
        let scaled = MetricField::diagonal("3g", plane(), vec![parse("3").unwrap(); 2], Signature::Riemannian).unwrap();
        let d = connection_difference(&g, &scaled, &Point::new(vec![0.1, 0.1])).unwrap();
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn conformal_change_is_not_projective() {
        let g = MetricField::flat("g", plane());
        let conf = MetricField::diagonal("e^x g", plane(), vec![parse("exp(x)").unwrap(); 2], Signature::Riemannian).unwrap();
        let r = projective_residual(&g, &conf, &Point::new(vec![0.1, 0.1])).unwrap();
        assert!(r.residual > 0.1);
    }

    #[test]
    fn identity_is_isometry() {
        let samples: Vec<Point<f64>> = (0..10).map(|i| Point::new(vec![0.1 * i as f64 - 0.5, 0.3])).collect();
        let c = classify_map(&Diffeomorphism::identity(&plane()), &curved(), &samples, &Tolerances::default()).unwrap();
        assert_eq!(c.class, MapClass::Isometry);
        assert_eq!(c.iso_residual, 0.0);
    }

    #[test]
    fn linear_map_of_flat_plane_is_affine() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        let shear = Diffeomorphism::affine("shear", &plane(), &a, &[0.0, 0.0]).unwrap();
        let samples = vec![Point::new(vec![0.1, 0.2]), Point::new(vec![-0.3, 0.5])];
        let c = classify_map(&shear, &MetricField::flat("g", plane()), &samples, &Tolerances::default()).unwrap();
        assert_eq!(c.class, MapClass::AffineNonisometric);
    }

    #[test]
    fn report_verdict() {
        let samples = vec![Point::new(vec![0.1, 0.2])];
        let rep = projective_report(&curved(), &curved(), &samples, 1e-8).unwrap();
        assert_eq!(rep.verdict, Verdict::Equivalent);
        assert_eq!(rep.residual_max, 0.0);
        let conf = MetricField::diagonal("e^x g", plane(), vec![parse("exp(x)").unwrap(); 2], Signature::Riemannian).unwrap();
        let rep = projective_report(&MetricField::flat("g", plane()), &conf, &samples, 1e-8).unwrap();
        assert_eq!(rep.verdict, Verdict::NotEquivalent);
    }
}
