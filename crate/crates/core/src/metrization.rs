//! Weighted solutions of the metrization equation and their relation to
//! metrics.
//!
//! A nondegenerate solution `σ^{ij}` corresponds to the metric with
//! `g^{ij} = |det σ| σ^{ij}`; conversely `σ = g⁻¹ |det g|^{1/(n+1)}`. Under a
//! diffeomorphism a solution pulls back as a symmetric (2,0)-tensor density of
//! weight `2/(n+1)`:
//!
//! ```text
//! (φ*σ)(p) = |det J|^{2/(n+1)} J⁻¹ σ(φ(p)) J⁻ᵀ
//! ```
//!
//! which is exactly what makes `metric_to_sol(φ*g) = φ*(metric_to_sol(g))`.
//! The solution space itself is spanned by explicitly supplied solutions;
//! the underlying PDE is never solved here.

use crate::charts::{Chart, Diffeomorphism, MetricField, Point};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;

/// `|det σ|` must exceed this times `‖σ‖ⁿ`.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// Density weight `2/(n+1)` of solutions in dimension `n`.
pub fn weight(n: usize) -> f64 {
    2.0 / (n as f64 + 1.0)
}

/// `σ = g⁻¹ |det g|^{1/(n+1)}` for a metric matrix.
pub fn metric_to_sol_matrix<T: Real>(g: &Matrix<T>) -> Result<Matrix<T>> {
    let n = g.rows();
    let inv = g.inverse()?;
    let factor = g.det().abs().powf(T::lit(1.0 / (n as f64 + 1.0)));
    Ok(inv.scale(factor).symmetrized())
}

pub fn metric_to_sol<T: Real>(g: &MetricField, p: &Point<T>) -> Result<Matrix<T>> {
    metric_to_sol_matrix(&g.eval(p)?)
}

/// Inverse metric `g^{ij} = |det σ| σ^{ij}`.
pub fn sol_to_metric<T: Real>(sigma: &Matrix<T>) -> Result<Matrix<T>> {
    let n = sigma.rows();
    let det = sigma.det();
    let threshold = T::lit(DEGENERACY_THRESHOLD) * sigma.max_abs().powi(n as i32);
    if !(det.abs() >= threshold) || det == T::zero() {
        return Err(Error::DegenerateSolution {
            det: det.to_f64_lossy(),
            threshold: threshold.to_f64_lossy(),
        });
    }
    Ok(sigma.scale(det.abs()))
}

/// Metric `g_ij` (lower indices) of a nondegenerate solution.
pub fn sol_to_metric_lower<T: Real>(sigma: &Matrix<T>) -> Result<Matrix<T>> {
    sol_to_metric(sigma)?.inverse()
}

/// Weighted pullback of a solution value `σ(φ(p))` with Jacobian `J` at `p`.
pub fn pullback_sol_matrix<T: Real>(jacobian: &Matrix<T>, sigma_at_image: &Matrix<T>) -> Result<Matrix<T>> {
    let n = jacobian.rows();
    let jinv = jacobian.inverse()?;
    let factor = jacobian.det().abs().powf(T::lit(weight(n)));
    Ok((&(&jinv * sigma_at_image) * &jinv.transpose()).scale(factor).symmetrized())
}

pub fn pullback_sol<T: Real>(phi: &Diffeomorphism, sigma: &WeightedSolution, p: &Point<T>) -> Result<Matrix<T>> {
    let j = phi.jacobian(p)?;
    let image = phi.apply(p)?;
    pullback_sol_matrix(&j.matrix, &sigma.eval(&image)?)
}

/// Comparison tensor `L = σ⁻¹ σ̄`.
pub fn benenti<T: Real>(sigma: &Matrix<T>, sigma_bar: &Matrix<T>) -> Result<Matrix<T>> {
    Ok(&sigma
        .inverse()
        .map_err(|e| Error::Singular(format!("solution σ: {e}")))?
        * sigma_bar)
}

/// The same tensor from the metrics: `|det ḡ / det g|^{1/(n+1)} g ḡ⁻¹`
/// (index placement matching `σ⁻¹σ̄`).
pub fn benenti_from_metrics<T: Real>(g: &Matrix<T>, gbar: &Matrix<T>) -> Result<Matrix<T>> {
    let n = g.rows();
    let factor = (gbar.det() / g.det()).abs().powf(T::lit(1.0 / (n as f64 + 1.0)));
    Ok((g * &gbar.inverse()?).scale(factor))
}

#[derive(Clone, Debug)]
pub struct SimultaneousDiag<T> {
    /// Ascending.
    pub s: Vec<T>,
    /// Columns form the basis: `BᵀσB = I`, `Bᵀσ̄B = diag(s)`.
    pub basis: Matrix<T>,
}

/// Congruence basis making `σ` the identity and `σ̄` diagonal: Cholesky
/// `σ = LLᵀ`, then the symmetric eigenproblem of `L⁻¹ σ̄ L⁻ᵀ`.
pub fn simultaneous_diag<T: Real>(sigma: &Matrix<T>, sigma_bar: &Matrix<T>) -> Result<SimultaneousDiag<T>> {
    let l = sigma.cholesky()?;
    let li = l.lower_inverse();
    let reduced = &(&li * sigma_bar) * &li.transpose();
    let (s, q) = reduced.symmetric_eigen();
    Ok(SimultaneousDiag {
        s,
        basis: &li.transpose() * &q,
    })
}

/// An element of the solution space, evaluable pointwise.
#[derive(Clone, Debug)]
pub enum WeightedSolution {
    /// `metric_to_sol` of a metric field.
    FromMetric(MetricField),
    /// Components `σ^{ij}` given directly as a symmetric field.
    Field(MetricField),
    /// Constant linear combination of solutions.
    Combination(Vec<(f64, WeightedSolution)>),
}

impl WeightedSolution {
    pub fn chart(&self) -> &Chart {
        match self {
            WeightedSolution::FromMetric(g) | WeightedSolution::Field(g) => g.chart(),
            WeightedSolution::Combination(terms) => terms[0].1.chart(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            WeightedSolution::FromMetric(g) => format!("σ[{}]", g.id()),
            WeightedSolution::Field(g) => g.id().to_string(),
            WeightedSolution::Combination(terms) => terms
                .iter()
                .map(|(c, s)| format!("{c}·{}", s.label()))
                .collect::<Vec<_>>()
                .join(" + "),
        }
    }

    pub fn weight(&self) -> f64 {
        weight(self.chart().dim())
    }

    pub fn eval<T: Real>(&self, p: &[T]) -> Result<Matrix<T>> {
        match self {
            WeightedSolution::FromMetric(g) => metric_to_sol_matrix(&g.eval(p)?),
            WeightedSolution::Field(s) => s.eval(p),
            WeightedSolution::Combination(terms) => {
                let n = self.chart().dim();
                let mut acc = Matrix::zeros(n, n);
                for (c, s) in terms {
                    acc = &acc + &s.eval(p)?.scale(T::lit(*c));
                }
                Ok(acc)
            }
        }
    }
}

/// Ordered basis `(σ, σ̄)` of a two-dimensional solution space.
#[derive(Clone, Debug)]
pub struct SolBasis {
    pub first: WeightedSolution,
    pub second: WeightedSolution,
}

impl SolBasis {
    /// Checks that `σ̄ ≠ c·σ` for a single constant `c` across the witness
    /// points.
    pub fn new(first: WeightedSolution, second: WeightedSolution, witness: &[Point<f64>]) -> Result<SolBasis> {
        if first.chart() != second.chart() {
            return Err(Error::Invalid("basis elements on different charts".into()));
        }
        let basis = SolBasis { first, second };
        let dependence = basis.dependence_residual(witness)?;
        if dependence <= 1e-10 {
            return Err(Error::RankDeficient(format!(
                "basis elements proportional at witness points (residual {dependence:e})"
            )));
        }
        Ok(basis)
    }

    pub fn elements(&self) -> [&WeightedSolution; 2] {
        [&self.first, &self.second]
    }

    /// Relative residual of the best fit `σ̄ ≈ c·σ` over the points.
    pub fn dependence_residual(&self, points: &[Point<f64>]) -> Result<f64> {
        let mut ss = 0.0;
        let mut sb = 0.0;
        let mut pairs = Vec::new();
        for p in points {
            let (a, b) = (self.first.eval(p)?, self.second.eval(p)?);
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                ss += x * x;
                sb += x * y;
                pairs.push((*x, *y));
            }
        }
        if ss == 0.0 {
            return Ok(0.0);
        }
        let c = sb / ss;
        let scale = pairs.iter().fold(0.0_f64, |m, (_, y)| m.max(y.abs())).max(f64::MIN_POSITIVE);
        Ok(pairs.iter().fold(0.0_f64, |m, (x, y)| m.max((y - c * x).abs())) / scale)
    }

    /// New basis with rows `B · (σ, σ̄)ᵀ`.
    pub fn transformed(&self, b: &Matrix<f64>) -> SolBasis {
        let row = |i: usize| {
            WeightedSolution::Combination(vec![(b[(i, 0)], self.first.clone()), (b[(i, 1)], self.second.clone())])
        };
        SolBasis {
            first: row(0),
            second: row(1),
        }
    }
}
