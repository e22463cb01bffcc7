//! The 2×2 representation of projective transformations on a two-element
//! solution basis, its normal forms, and the rotation-positivity argument.
//!
//! Row convention: `φ*σ = aσ + bσ̄`, `φ*σ̄ = cσ + dσ̄`, i.e. the rows of
//! `A_φ = [[a, b], [c, d]]` hold the coefficients of the pulled-back basis
//! elements. Since `(ψ∘φ)* = φ*∘ψ*`, this gives `A_{ψ∘φ} = A_ψ·A_φ`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::charts::{Diffeomorphism, Point};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrization::{pullback_sol, SolBasis};

pub const ROW_CONVENTION: &str =
    "rows of A hold coefficients: phi*sigma = a sigma + b sigma_bar, phi*sigma_bar = c sigma + d sigma_bar";

/// Default search horizon for [`find_violating_k`].
pub const DEFAULT_K_MAX: u64 = 1_000_000;

/// Reduced angles below this are treated as the trivial rotation.
pub const TOL_ANGLE: f64 = 1e-12;

/// Orthogonality tolerance for `A/C` when reading off normal forms.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RepMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub det: f64,
    pub fit_residual: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RepMatrix {
    pub fn from_entries(a: f64, b: f64, c: f64, d: f64) -> RepMatrix {
        RepMatrix {
            a,
            b,
            c,
            d,
            det: a * d - b * c,
            fit_residual: 0.0,
            samples: 0,
            seed: None,
        }
    }

    pub fn from_matrix(m: &Matrix<f64>) -> RepMatrix {
        RepMatrix::from_entries(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn matrix(&self) -> Matrix<f64> {
        Matrix::from_rows(&[vec![self.a, self.b], vec![self.c, self.d]])
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// `A^k` for `k ≥ 0`.
    pub fn power(&self, k: u32) -> Matrix<f64> {
        let base = self.matrix();
        (0..k).fold(Matrix::identity(2), |acc, _| &acc * &base)
    }
}

/// Least-squares fit of `A_φ` over all flattened upper-triangular solution
/// components at all sample points.
pub fn compute_rep(phi: &Diffeomorphism, basis: &SolBasis, samples: &[Point<f64>]) -> Result<RepMatrix> {
    if samples.len() < 3 {
        return Err(Error::Invalid(format!(
            "representation fit needs at least 3 sample points, got {}",
            samples.len()
        )));
    }
    let n = basis.first.chart().dim();
    let per_point: Vec<[Matrix<f64>; 4]> = samples
        .par_iter()
        .map(|p| {
            Ok([
                basis.first.eval(p)?,
                basis.second.eval(p)?,
                pullback_sol(phi, &basis.first, p)?,
                pullback_sol(phi, &basis.second, p)?,
            ])
        })
        .collect::<Result<_>>()?;

    let mut cols: [Vec<f64>; 4] = Default::default();
    for mats in &per_point {
        for i in 0..n {
            for j in i..n {
                for (col, m) in cols.iter_mut().zip(mats) {
                    col.push(m[(i, j)]);
                }
            }
        }
    }
    let [u, v, t0, t1] = cols;
    let fit = TwoColumnQr::new(&u, &v)?;
    let (a, b) = fit.solve(&t0);
    let (c, d) = fit.solve(&t1);

    let mut worst: f64 = 0.0;
    for (target, (x, y)) in [(&t0, (a, b)), (&t1, (c, d))] {
        let scale = target.iter().fold(0.0_f64, |m, t| m.max(t.abs())).max(f64::MIN_POSITIVE);
        for k in 0..u.len() {
            worst = worst.max((x * u[k] + y * v[k] - target[k]).abs() / scale);
        }
    }
    Ok(RepMatrix {
        fit_residual: worst,
        samples: samples.len(),
        ..RepMatrix::from_entries(a, b, c, d)
    })
}

/// Thin QR of an `m×2` design matrix by modified Gram-Schmidt.
struct TwoColumnQr {
    q0: Vec<f64>,
    q1: Vec<f64>,
    r00: f64,
    r01: f64,
    r11: f64,
}

impl TwoColumnQr {
    fn new(u: &[f64], v: &[f64]) -> Result<TwoColumnQr> {
        let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        let r00 = norm(u);
        let vn = norm(v);
        if r00 == 0.0 || vn == 0.0 {
            return Err(Error::RankDeficient("a basis element vanishes at every sample".into()));
        }
        let q0: Vec<f64> = u.iter().map(|x| x / r00).collect();
        let r01 = dot(&q0, v);
        let w: Vec<f64> = v.iter().zip(&q0).map(|(x, q)| x - r01 * q).collect();
        let r11 = norm(&w);
        if r11 <= 1e-10 * vn {
            return Err(Error::RankDeficient(format!(
                "basis elements proportional at the samples (r11/|v| = {:e})",
                r11 / vn
            )));
        }
        let q1 = w.iter().map(|x| x / r11).collect();
        Ok(TwoColumnQr { q0, q1, r00, r01, r11 })
    }

    fn solve(&self, t: &[f64]) -> (f64, f64) {
        let y0: f64 = self.q0.iter().zip(t).map(|(a, b)| a * b).sum();
        let y1: f64 = self.q1.iter().zip(t).map(|(a, b)| a * b).sum();
        let x1 = y1 / self.r11;
        ((y0 - self.r01 * x1) / self.r00, x1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComposeCheck {
    /// `A_{ψ∘φ}` fitted directly.
    pub composite: RepMatrix,
    pub a_phi: RepMatrix,
    pub a_psi: RepMatrix,
    /// `‖A_{ψ∘φ} − A_ψ·A_φ‖_max`, the order implied by the row convention.
    pub residual: f64,
    /// `‖A_{ψ∘φ} − A_φ·A_ψ‖_max`.
    pub reversed_residual: f64,
}

/// Fits `A_φ`, `A_ψ` and `A_{ψ∘φ}` and compares against both products.
pub fn rep_compose_check(
    phi: &Diffeomorphism,
    psi: &Diffeomorphism,
    basis: &SolBasis,
    samples: &[Point<f64>],
) -> Result<ComposeCheck> {
    let composite = psi.compose(phi)?;
    let a_phi = compute_rep(phi, basis, samples)?;
    let a_psi = compute_rep(psi, basis, samples)?;
    let a_comp = compute_rep(&composite, basis, samples)?;
    let m = a_comp.matrix();
    let residual = (&m - &(&a_psi.matrix() * &a_phi.matrix())).max_abs();
    let reversed_residual = (&m - &(&a_phi.matrix() * &a_psi.matrix())).max_abs();
    Ok(ComposeCheck {
        composite: a_comp,
        a_phi,
        a_psi,
        residual,
        reversed_residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepKind {
    Identity,
    RotationType,
    ReflectionType,
    RealDiagonalizable,
    Degenerate,
}

impl std::fmt::Display for RepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RepKind::Identity => "identity",
            RepKind::RotationType => "rotation-type",
            RepKind::ReflectionType => "reflection-type",
            RepKind::RealDiagonalizable => "real-diagonalizable",
            RepKind::Degenerate => "degenerate",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RepClass {
    pub kind: RepKind,
    /// `√|det A|`.
    #[serde(rename = "C")]
    pub c: f64,
    /// In `(−π, π]`; meaningful for rotation- and reflection-type.
    pub alpha: f64,
    pub det: f64,
}

impl RepClass {
    pub fn rotation(c: f64, alpha: f64) -> RepClass {
        RepClass {
            kind: RepKind::RotationType,
            c,
            alpha,
            det: c * c,
        }
    }

    pub fn reflection(c: f64, alpha: f64) -> RepClass {
        RepClass {
            kind: RepKind::ReflectionType,
            c,
            alpha,
            det: -c * c,
        }
    }

    pub fn identity() -> RepClass {
        RepClass {
            kind: RepKind::Identity,
            c: 1.0,
            alpha: 0.0,
            det: 1.0,
        }
    }

    /// Normal-form matrix `C·[[cos α, sin α], [∓sin α, ±cos α]]`.
    pub fn normal_form(&self) -> Option<Matrix<f64>> {
        let (s, co) = self.alpha.sin_cos();
        let c = self.c;
        match self.kind {
            RepKind::Identity => Some(Matrix::identity(2)),
            RepKind::RotationType => Some(Matrix::from_rows(&[vec![c * co, c * s], vec![-c * s, c * co]])),
            RepKind::ReflectionType => Some(Matrix::from_rows(&[vec![c * co, c * s], vec![c * s, -c * co]])),
            _ => None,
        }
    }
}

/// Classifies by determinant sign and normal form.
///
/// Rotation-type is decided by nonreal eigenvalues or `A/C` orthogonal, so the
/// kind does not depend on the chosen basis; `α` is read off `A/C` with atan2
/// when it is already in normal form, otherwise from the trace.
pub fn classify_rep(a: &RepMatrix, tol: f64) -> RepClass {
    let det = a.det;
    if !(det.abs() > tol) {
        return RepClass {
            kind: RepKind::Degenerate,
            c: det.abs().sqrt(),
            alpha: 0.0,
            det,
        };
    }
    let c = det.abs().sqrt();
    let (an, bn, cn, dn) = (a.a / c, a.b / c, a.c / c, a.d / c);
    if det < 0.0 {
        return RepClass {
            kind: RepKind::ReflectionType,
            c,
            alpha: canonical_angle(bn.atan2(an)),
            det,
        };
    }
    if (&a.matrix() - &Matrix::identity(2)).max_abs() <= tol {
        return RepClass { det, ..RepClass::identity() };
    }
    let orthogonal = (an - dn).abs() <= ORTHOGONALITY_TOL && (bn + cn).abs() <= ORTHOGONALITY_TOL;
    let disc = a.trace() * a.trace() - 4.0 * det;
    if orthogonal {
        return RepClass {
            kind: RepKind::RotationType,
            c,
            alpha: canonical_angle(bn.atan2(an)),
            det,
        };
    }
    if disc < 0.0 {
        let magnitude = (a.trace() / (2.0 * c)).clamp(-1.0, 1.0).acos();
        return RepClass {
            kind: RepKind::RotationType,
            c,
            alpha: if a.b < 0.0 { -magnitude } else { magnitude },
            det,
        };
    }
    RepClass {
        kind: RepKind::RealDiagonalizable,
        c,
        alpha: 0.0,
        det,
    }
}

/// Maps atan2 output onto `(−π, π]`.
fn canonical_angle(alpha: f64) -> f64 {
    if alpha <= -PI {
        alpha + TAU
    } else {
        alpha
    }
}

/// `C^k (cos kα + s_i sin kα)` for each `s_i`.
pub fn eigen_sequence(c: f64, alpha: f64, s: &[f64], k: u32) -> Vec<f64> {
    let scale = c.powi(k as i32);
    let (sin, cos) = (k as f64 * alpha).sin_cos();
    s.iter().map(|si| scale * (cos + si * sin)).collect()
}

/// Eigenvalues of `σ⁻¹ (φ^k)*σ` from the first row of `A^k`, valid for any
/// `A` (not only normal forms).
pub fn pullback_spectrum(a: &RepMatrix, s: &[f64], k: u32) -> Vec<f64> {
    let ak = a.power(k);
    s.iter().map(|si| ak[(0, 0)] + ak[(0, 1)] * si).collect()
}

/// Reduces `α` to `(0, π]` using `α ↦ 2π − α` (which flips `s`).
pub fn reduced_angle(alpha: f64) -> f64 {
    let a = alpha.rem_euclid(TAU);
    if a > PI {
        TAU - a
    } else {
        a
    }
}

/// Upper bound `⌈2π/α_red⌉ + 1` on the first violating `k`, or `None` for a
/// trivial rotation.
pub fn violation_bound(alpha: f64) -> Option<u64> {
    let red = reduced_angle(alpha);
    if red < TOL_ANGLE {
        None
    } else {
        Some((TAU / red).ceil() as u64 + 1)
    }
}

/// Smallest `k ∈ [1, k_max]` with `cos kα + s sin kα ≤ 0`.
pub fn find_violating_k(alpha: f64, s: f64, k_max: u64) -> Option<u64> {
    (1..=k_max).find(|&k| lemma_term(alpha, s, k) <= 0.0)
}

fn lemma_term(alpha: f64, s: f64, k: u64) -> f64 {
    let (sin, cos) = (k as f64 * alpha).sin_cos();
    cos + s * sin
}

/// Record of one positivity search, for reports.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaSearch {
    pub alpha: f64,
    pub s: f64,
    pub k_max: u64,
    pub alpha_reduced: f64,
    pub bound: Option<u64>,
    pub k: Option<u64>,
    pub value: Option<f64>,
    /// `cos kα + s sin kα` for `k = 1..` up to the hit (at most 32 terms).
    pub transcript: Vec<f64>,
    pub within_bound: bool,
}

pub fn lemma_search(alpha: f64, s: f64, k_max: u64) -> LemmaSearch {
    let k = find_violating_k(alpha, s, k_max);
    let bound = violation_bound(alpha);
    let shown = k.unwrap_or(k_max).min(32);
    LemmaSearch {
        alpha,
        s,
        k_max,
        alpha_reduced: reduced_angle(alpha),
        bound,
        k,
        value: k.map(|k| lemma_term(alpha, s, k)),
        transcript: (1..=shown).map(|k| lemma_term(alpha, s, k)).collect(),
        within_bound: match (k, bound) {
            (Some(k), Some(b)) => k <= b,
            (None, None) => true,
            _ => false,
        },
    }
}

/// A classified map, optionally with the simultaneous-diagonalization
/// spectrum `s` of its basis at some point.
#[derive(Clone, Debug, Serialize)]
pub struct LabeledClass {
    pub label: String,
    pub class: RepClass,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReflectionPair {
    pub first: String,
    pub second: String,
    pub det: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityContradiction {
    pub label: String,
    pub index: usize,
    pub s: f64,
    pub k: u64,
    /// `C^k (cos kα + s sin kα)`.
    pub value: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct QuotientReport {
    pub verdicts: Vec<String>,
    pub bound_consistent: bool,
    pub all_isometries: bool,
    pub reflection_pairs: Vec<ReflectionPair>,
    pub contradictions: Vec<PositivityContradiction>,
    pub homothety_impossible: Vec<String>,
    pub unresolved: Vec<String>,
}

pub const VERDICT_BOUND: &str = "bound ≤ 2 consistent";
pub const VERDICT_ISOMETRIES: &str = "all maps isometries at rep level";

pub fn quotient_conclusion(entries: &[LabeledClass], tol: f64) -> QuotientReport {
    let mut report = QuotientReport::default();
    let reflections: Vec<&LabeledClass> =
        entries.iter().filter(|e| e.class.kind == RepKind::ReflectionType).collect();
    for (i, p) in reflections.iter().enumerate() {
        for q in &reflections[i..] {
            report.reflection_pairs.push(ReflectionPair {
                first: p.label.clone(),
                second: q.label.clone(),
                det: p.class.det * q.class.det,
            });
        }
    }

    for e in entries {
        let class = &e.class;
        match class.kind {
            RepKind::RotationType => {
                if (class.c - 1.0).abs() > tol {
                    report.homothety_impossible.push(e.label.clone());
                    report.verdicts.push(format!(
                        "{}: rotation-type with C = {} is a nontrivial homothety, impossible on a closed manifold",
                        e.label, class.c
                    ));
                }
                if let Some(spectrum) = &e.spectrum {
                    let hit = spectrum
                        .iter()
                        .enumerate()
                        .filter_map(|(i, &s)| find_violating_k(class.alpha, s, DEFAULT_K_MAX).map(|k| (k, i, s)))
                        .min_by_key(|(k, i, _)| (*k, *i));
                    if let Some((k, index, s)) = hit {
                        let value = eigen_sequence(class.c, class.alpha, &[s], k as u32)[0];
                        report.verdicts.push(format!(
                            "{}: positivity contradiction at k = {k} (eigenvalue {value:.6} for s = {s})",
                            e.label
                        ));
                        report.contradictions.push(PositivityContradiction {
                            label: e.label.clone(),
                            index,
                            s,
                            k,
                            value,
                        });
                    }
                }
            }
            RepKind::RealDiagonalizable | RepKind::Degenerate => {
                report.unresolved.push(e.label.clone());
                report.verdicts.push(format!("{}: {} representation not covered by the counting argument", e.label, class.kind));
            }
            RepKind::Identity | RepKind::ReflectionType => {}
        }
    }

    report.all_isometries = entries.iter().all(|e| e.class.kind == RepKind::Identity);
    if report.all_isometries {
        report.verdicts.insert(0, VERDICT_ISOMETRIES.to_string());
    }
    report.bound_consistent = !reflections.is_empty() && report.reflection_pairs.iter().all(|p| p.det > 0.0);
    if report.bound_consistent {
        report.verdicts.insert(0, VERDICT_BOUND.to_string());
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{Chart, Coordinate, MetricField, Signature};
    use crate::expr::Expression;
    use crate::metrization::WeightedSolution;
    use crate::sampling::{sample_points, SampleConfig};
    use proptest::prelude::*;

    fn plane() -> Chart {
        Chart::new(vec![Coordinate::open("x", -2.0, 2.0), Coordinate::open("y", -2.0, 2.0)]).unwrap()
    }

    fn constant_solution(id: &str, diag: [f64; 2]) -> WeightedSolution {
        WeightedSolution::Field(
            MetricField::diagonal(id, plane(), diag.iter().map(|&v| Expression::num(v)).collect(), Signature::Riemannian)
                .unwrap(),
        )
    }

    /// Flat plane: every constant symmetric field solves the metrization
    /// equation, and linear maps preserving "diagonal" keep `span(I, diag(2,1))`.
    fn flat_basis() -> (SolBasis, Vec<Point<f64>>) {
        let pts = sample_points(&plane(), &SampleConfig::default().with_count(12));
        let basis = SolBasis::new(constant_solution("I", [1.0, 1.0]), constant_solution("D", [2.0, 1.0]), &pts).unwrap();
        (basis, pts)
    }

    fn linear(label: &str, rows: [[f64; 2]; 2]) -> Diffeomorphism {
        let m = Matrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()]);
        Diffeomorphism::affine(label, &plane(), &m, &[0.0, 0.0]).unwrap()
    }

    fn close(m: &Matrix<f64>, rows: [[f64; 2]; 2], tol: f64) -> bool {
        (m - &Matrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()])).max_abs() <= tol
    }

    #[test]
    fn identity_rep() {
        let (basis, pts) = flat_basis();
        let a = compute_rep(&Diffeomorphism::identity(&plane()), &basis, &pts).unwrap();
        assert!(close(&a.matrix(), [[1.0, 0.0], [0.0, 1.0]], 1e-14));
        assert!(a.fit_residual < 1e-14);
        let check = rep_compose_check(
            &Diffeomorphism::identity(&plane()),
            &Diffeomorphism::identity(&plane()),
            &basis,
            &pts,
        )
        .unwrap();
        assert!(check.residual < 1e-14 && check.reversed_residual < 1e-14);
        assert!(compute_rep(&Diffeomorphism::identity(&plane()), &basis, &pts[..2]).is_err());
    }

    #[test]
    fn swap_and_scaling_reps() {
        let (basis, pts) = flat_basis();
        // swap: I ↦ I, diag(2,1) ↦ diag(1,2) = 3I − diag(2,1)
        let a = compute_rep(&linear("P", [[0.0, 1.0], [1.0, 0.0]]), &basis, &pts).unwrap();
        assert!(close(&a.matrix(), [[1.0, 0.0], [3.0, -1.0]], 1e-12), "{a:?}");
        assert!((a.det + 1.0).abs() < 1e-12);
        // D = diag(2,1): |det|^{2/3} D⁻¹σD⁻¹
        let w = 2f64.powf(2.0 / 3.0);
        let a = compute_rep(&linear("D", [[2.0, 0.0], [0.0, 1.0]]), &basis, &pts).unwrap();
        // diag(w/4, w) = α I + β diag(2,1) → β = −3w/4, α = w − β
        assert!(close(&a.matrix(), [[w * 1.75, -0.75 * w], [w * 1.5, -w * 0.5]], 1e-12), "{a:?}");
    }

    #[test]
    fn composition_follows_row_convention() {
        let (basis, pts) = flat_basis();
        let p = linear("P", [[0.0, 1.0], [1.0, 0.0]]);
        let d = linear("D", [[2.0, 0.0], [0.0, 1.0]]);
        for (phi, psi) in [(&p, &d), (&d, &p)] {
            let check = rep_compose_check(phi, psi, &basis, &pts).unwrap();
            assert!(check.residual < 1e-12, "{check:?}");
            // these two do not commute at the representation level
            assert!(check.reversed_residual > 0.1);
        }
    }

    #[test]
    fn dependent_basis_rejected() {
        let pts = sample_points(&plane(), &SampleConfig::default().with_count(12));
        let basis = SolBasis {
            first: constant_solution("I", [1.0, 1.0]),
            second: constant_solution("2I", [2.0, 2.0]),
        };
        assert!(matches!(
            compute_rep(&Diffeomorphism::identity(&plane()), &basis, &pts),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn classify_examples() {
        let r = classify_rep(&RepMatrix::from_entries(0.0, 1.0, 1.0, 0.0), 1e-8);
        assert_eq!(r.kind, RepKind::ReflectionType);
        assert!((r.c - 1.0).abs() < 1e-15 && (r.alpha - PI / 2.0).abs() < 1e-15 && r.det == -1.0);
        let r = classify_rep(&RepMatrix::from_entries(0.0, 1.0, -1.0, 0.0), 1e-8);
        assert_eq!(r.kind, RepKind::RotationType);
        assert!((r.c - 1.0).abs() < 1e-15 && (r.alpha - PI / 2.0).abs() < 1e-15);
        let r = classify_rep(&RepMatrix::from_entries(2.0, 0.0, 0.0, 3.0), 1e-8);
        assert_eq!(r.kind, RepKind::RealDiagonalizable);
        assert_eq!(classify_rep(&RepMatrix::from_entries(1.0, 0.0, 0.0, 1.0), 1e-8).kind, RepKind::Identity);
        assert_eq!(classify_rep(&RepMatrix::from_entries(1.0, 2.0, 0.5, 1.0), 1e-8).kind, RepKind::Degenerate);
        let r = classify_rep(&RepMatrix::from_entries(-1.0, 0.0, 0.0, -1.0), 1e-8);
        assert_eq!(r.kind, RepKind::RotationType);
        assert!((r.alpha - PI).abs() < 1e-15);
        let r = classify_rep(&RepMatrix::from_entries(2.0, 0.0, 0.0, 2.0), 1e-8);
        assert_eq!(r.kind, RepKind::RotationType);
        assert!((r.c - 2.0).abs() < 1e-15 && r.alpha == 0.0);
    }

    #[test]
    fn normal_forms_roundtrip() {
        for alpha in [-2.5, -0.3, 0.7, 1.9, 3.0] {
            for c in [0.5, 1.0, 3.0] {
                for class in [RepClass::rotation(c, alpha), RepClass::reflection(c, alpha)] {
                    let back = classify_rep(&RepMatrix::from_matrix(&class.normal_form().unwrap()), 1e-8);
                    assert_eq!(back.kind, class.kind);
                    assert!((back.c - c).abs() < 1e-12 && (back.alpha - alpha).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eigen_sequence_examples() {
        assert_eq!(eigen_sequence(1.7, 0.4, &[1.0, -3.0, 2.0], 0), vec![1.0, 1.0, 1.0]);
        let v = eigen_sequence(1.0, PI / 2.0, &[1.0, 2.0], 2);
        assert!(v.iter().all(|x| (x + 1.0).abs() < 1e-15));
        let v = eigen_sequence(2.0, 0.0, &[5.0, -1.0], 3);
        assert!(v.iter().all(|x| (x - 8.0).abs() < 1e-15));
        // matches the first row of A^k for a rotation normal form
        let class = RepClass::rotation(1.3, 0.9);
        let a = RepMatrix::from_matrix(&class.normal_form().unwrap());
        for k in 0..6 {
            let lhs = eigen_sequence(1.3, 0.9, &[0.5, 2.0], k);
            let rhs = pullback_spectrum(&a, &[0.5, 2.0], k);
            assert!(lhs.iter().zip(&rhs).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn lemma_examples() {
        assert_eq!(find_violating_k(PI / 2.0, 1.0, 100), Some(2));
        assert_eq!(find_violating_k(0.0, 7.0, 10_000), None);
        assert_eq!(find_violating_k(2.0 * PI / 3.0, 0.0, 100), Some(1));
        assert_eq!(find_violating_k(PI / 3.0, 1.0, 100), Some(3));
        assert_eq!(find_violating_k(PI / 3.0, 2.0, 100), Some(3));
        assert_eq!(violation_bound(0.0), None);
        assert_eq!(violation_bound(PI), Some(3));
        assert!((reduced_angle(5.0) - (TAU - 5.0)).abs() < 1e-15);
        let s = lemma_search(PI / 2.0, 1.0, 100);
        assert_eq!(s.k, Some(2));
        assert!(s.within_bound && s.transcript.len() == 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn violation_within_bound(alpha in 1e-2..PI, flip in any::<bool>(), s in -50.0..50.0f64) {
            let alpha = if flip { TAU - alpha } else { alpha };
            let bound = violation_bound(alpha).unwrap();
            let k = find_violating_k(alpha, s, DEFAULT_K_MAX);
            prop_assert!(matches!(k, Some(k) if k <= bound), "alpha {alpha} s {s}: {k:?} > {bound}");
        }
    }

    #[test]
    fn quotient_examples() {
        let entries = vec![
            LabeledClass { label: "phi".into(), class: RepClass::reflection(1.0, PI / 2.0), spectrum: None },
            LabeledClass { label: "psi".into(), class: RepClass::reflection(1.0, PI / 4.0), spectrum: None },
        ];
        let r = quotient_conclusion(&entries, 1e-8);
        assert_eq!(r.verdicts, vec![VERDICT_BOUND.to_string()]);
        assert!(r.reflection_pairs.iter().all(|p| (p.det - 1.0).abs() < 1e-15));

        let r = quotient_conclusion(
            &[LabeledClass { label: "id".into(), class: RepClass::identity(), spectrum: None }],
            1e-8,
        );
        assert_eq!(r.verdicts, vec![VERDICT_ISOMETRIES.to_string()]);

        let r = quotient_conclusion(
            &[LabeledClass {
                label: "rot".into(),
                class: RepClass::rotation(1.0, PI / 3.0),
                spectrum: Some(vec![1.0, 2.0]),
            }],
            1e-8,
        );
        let oracle = find_violating_k(PI / 3.0, 1.0, DEFAULT_K_MAX).unwrap();
        assert_eq!(r.contradictions.len(), 1);
        assert_eq!(r.contradictions[0].k, oracle);
        assert!(r.contradictions[0].value <= 0.0);
        assert!(!r.bound_consistent);

        let r = quotient_conclusion(
            &[LabeledClass { label: "h".into(), class: RepClass::rotation(2.0, 0.0), spectrum: None }],
            1e-8,
        );
        assert_eq!(r.homothety_impossible, vec!["h".to_string()]);
    }
}
