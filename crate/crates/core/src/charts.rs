//! Single-box coordinate charts, expression-defined metric fields and
//! diffeomorphisms.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dual::{Dual, MAX_VARS};
use crate::error::{Error, Result};
use crate::expr::{Expression, Program};
use crate::linalg::Matrix;
use crate::real::Real;

/// Jacobians with `|det J|` below this are treated as singular.
pub const SINGULAR_JACOBIAN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoordKind {
    /// Period 1, canonical range `[0, 1)`.
    Periodic,
    Open { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coordinate {
    pub name: String,
    #[serde(flatten)]
    pub kind: CoordKind,
}

impl Coordinate {
    pub fn periodic(name: &str) -> Self {
        Coordinate {
            name: name.into(),
            kind: CoordKind::Periodic,
        }
    }

    pub fn open(name: &str, lo: f64, hi: f64) -> Self {
        Coordinate {
            name: name.into(),
            kind: CoordKind::Open { lo, hi },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChartRepr", into = "ChartRepr")]
pub struct Chart {
    coords: Vec<Coordinate>,
}

#[derive(Serialize, Deserialize)]
struct ChartRepr {
    coords: Vec<Coordinate>,
}

impl TryFrom<ChartRepr> for Chart {
    type Error = Error;
    fn try_from(r: ChartRepr) -> Result<Chart> {
        Chart::new(r.coords)
    }
}

impl From<Chart> for ChartRepr {
    fn from(c: Chart) -> ChartRepr {
        ChartRepr { coords: c.coords }
    }
}

impl Chart {
    pub fn new(coords: Vec<Coordinate>) -> Result<Chart> {
        let n = coords.len();
        if n < 2 {
            return Err(Error::InvalidChart(format!("dimension {n} < 2")));
        }
        if n > MAX_VARS {
            return Err(Error::InvalidChart(format!("dimension {n} > {MAX_VARS}")));
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::InvalidChart(format!("duplicate coordinate `{}`", c.name)));
            }
            if crate::expr::parse(&c.name) != Ok(Expression::var(&c.name)) {
                return Err(Error::InvalidChart(format!("bad coordinate name `{}`", c.name)));
            }
            if let CoordKind::Open { lo, hi } = c.kind {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::InvalidChart(format!("bad interval ({lo}, {hi})")));
                }
            }
        }
        Ok(Chart { coords })
    }

    /// All coordinates periodic: the torus `ℝⁿ/ℤⁿ`.
    pub fn torus(names: &[&str]) -> Result<Chart> {
        Chart::new(names.iter().map(|n| Coordinate::periodic(n)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn names(&self) -> Vec<&str> {
        self.coords.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn kind(&self, i: usize) -> CoordKind {
        self.coords[i].kind
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c.name == name)
    }

    /// Reduces periodic entries into `[0, 1)`, leaving open entries as they are.
    pub fn reduce_periodic<T: Real>(&self, x: &mut [T]) {
        for (v, c) in x.iter_mut().zip(&self.coords) {
            if c.kind == CoordKind::Periodic {
                *v = wrap_unit(*v);
            }
        }
    }

    pub fn canonicalize<T: Real>(&self, raw: &[T]) -> Result<Point<T>> {
        if raw.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: raw.len(),
            });
        }
        let mut coords = raw.to_vec();
        for (i, (v, c)) in coords.iter_mut().zip(&self.coords).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("coordinate {i} = {v}")));
            }
            match c.kind {
                CoordKind::Periodic => *v = wrap_unit(*v),
                CoordKind::Open { lo, hi } => {
                    if !(*v > T::lit(lo) && *v < T::lit(hi)) {
                        return Err(Error::OutsideChart {
                            index: i,
                            value: v.to_f64_lossy(),
                            lo,
                            hi,
                        });
                    }
                }
            }
        }
        Ok(Point { coords })
    }

    /// Coordinate difference `b - a`, periodic entries taken as the
    /// representative of smallest magnitude.
    pub fn difference<T: Real>(&self, a: &[T], b: &[T]) -> Vec<T> {
        a.iter()
            .zip(b)
            .zip(&self.coords)
            .map(|((&x, &y), c)| match c.kind {
                CoordKind::Periodic => wrap_half(y - x),
                CoordKind::Open { .. } => y - x,
            })
            .collect()
    }

    /// Euclidean chart distance with wrapped periodic differences.
    pub fn distance<T: Real>(&self, a: &[T], b: &[T]) -> T {
        self.difference(a, b)
            .iter()
            .fold(T::zero(), |s, &d| s + d * d)
            .sqrt()
    }

    /// Whether `x` lies in the open chart box (periodic entries always do).
    pub fn contains<T: Real>(&self, x: &[T]) -> bool {
        x.iter().zip(&self.coords).all(|(&v, c)| match c.kind {
            CoordKind::Periodic => v.is_finite(),
            CoordKind::Open { lo, hi } => v > T::lit(lo) && v < T::lit(hi),
        })
    }
}

/// `x mod 1` in `[0, 1)`.
pub fn wrap_unit<T: Real>(x: T) -> T {
    let r = x - x.floor();
    if r >= T::one() {
        T::zero()
    } else {
        r
    }
}

/// Representative of `d mod 1` in `[-1/2, 1/2)`.
pub fn wrap_half<T: Real>(d: T) -> T {
    let half = T::lit(0.5);
    wrap_unit(d + half) - half
}

/// A point of a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<T> {
    pub coords: Vec<T>,
}

impl<T: Real> Point<T> {
    pub fn new(coords: Vec<T>) -> Self {
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    fn seeded(&self) -> Vec<Dual<T>> {
        let n = self.coords.len();
        self.coords
            .iter()
            .enumerate()
            .map(|(i, &v)| Dual::variable(v, i, n))
            .collect()
    }
}

impl<T> std::ops::Deref for Point<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.coords
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Signature {
    Riemannian,
    Indefinite,
}

/// Metric value and first partials at a point: `partials[k] = ∂_k g`.
#[derive(Clone, Debug)]
pub struct MetricJet<T> {
    pub value: Matrix<T>,
    pub partials: Vec<Matrix<T>>,
}

/// Symmetric (0,2)-tensor field with expression components; the upper
/// triangle is authoritative and the lower triangle mirrors it.
#[derive(Clone, Debug)]
pub struct MetricField {
    id: String,
    chart: Chart,
    upper: Vec<Expression>,
    signature: Signature,
    programs: Vec<Program>,
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl MetricField {
    /// Builds a field from a full `n × n` grid; entries below the diagonal
    /// are ignored.
    pub fn new(
        id: impl Into<String>,
        chart: Chart,
        components: Vec<Vec<Expression>>,
        signature: Signature,
    ) -> Result<MetricField> {
        let n = chart.dim();
        if components.len() != n || components.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension {
                expected: n,
                got: components.len(),
            });
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for (i, row) in components.into_iter().enumerate() {
            upper.extend(row.into_iter().skip(i));
        }
        Self::from_upper(id, chart, upper, signature)
    }

    /// Builds from the row-major upper triangle.
    pub fn from_upper(
        id: impl Into<String>,
        chart: Chart,
        upper: Vec<Expression>,
        signature: Signature,
    ) -> Result<MetricField> {
        let n = chart.dim();
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::Dimension {
                expected: n * (n + 1) / 2,
                got: upper.len(),
            });
        }
        let names = chart.names();
        let programs = upper
            .iter()
            .map(|e| Program::compile(e, &names))
            .collect::<Result<_>>()?;
        Ok(MetricField {
            id: id.into(),
            chart,
            upper,
            signature,
            programs,
        })
    }

    pub fn diagonal(
        id: impl Into<String>,
        chart: Chart,
        diag: Vec<Expression>,
        signature: Signature,
    ) -> Result<MetricField> {
        let n = chart.dim();
        let comps = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { diag[i].clone() } else { Expression::Num(0.0) })
                    .collect()
            })
            .collect();
        Self::new(id, chart, comps, signature)
    }

    /// Constant Euclidean metric.
    pub fn flat(id: impl Into<String>, chart: Chart) -> MetricField {
        let n = chart.dim();
        Self::diagonal(id, chart, vec![Expression::Num(1.0); n], Signature::Riemannian)
            .expect("flat metric is well formed")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn component(&self, i: usize, j: usize) -> &Expression {
        &self.upper[upper_index(self.dim(), i, j)]
    }

    /// Full component grid (lower triangle mirrored).
    pub fn components(&self) -> Vec<Vec<Expression>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.component(i, j).clone()).collect())
            .collect()
    }

    pub fn eval<T: Real>(&self, p: &[T]) -> Result<Matrix<T>> {
        let n = self.dim();
        let mut g = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.programs[upper_index(n, i, j)].eval(p)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// Metric and its first partials from one dual evaluation per component.
    pub fn jet<T: Real>(&self, p: &Point<T>) -> Result<MetricJet<T>> {
        let n = self.dim();
        let args = p.seeded();
        let mut value = Matrix::zeros(n, n);
        let mut partials = vec![Matrix::zeros(n, n); n];
        for i in 0..n {
            for j in i..n {
                let d = self.programs[upper_index(n, i, j)].eval_dual(&args)?;
                value[(i, j)] = d.value();
                value[(j, i)] = d.value();
                for (k, pk) in partials.iter_mut().enumerate() {
                    pk[(i, j)] = d.partial(k);
                    pk[(j, i)] = d.partial(k);
                }
            }
        }
        Ok(MetricJet { value, partials })
    }

    /// Cholesky test at every point; returns the first failing point.
    pub fn check_positive_definite<T: Real>(&self, samples: &[Point<T>]) -> Result<()> {
        for p in samples {
            self.eval(p)?.cholesky().map_err(|e| {
                Error::NotPositiveDefinite(format!("metric `{}` at {:?}: {e}", self.id, p.coords))
            })?;
        }
        Ok(())
    }

    /// `self + ε·h` componentwise.
    pub fn perturbed(&self, epsilon: f64, h: &MetricField) -> Result<MetricField> {
        let upper = self
            .upper
            .iter()
            .zip(&h.upper)
            .map(|(a, b)| Expression::add(a.clone(), Expression::mul(Expression::num(epsilon), b.clone())))
            .collect();
        MetricField::from_upper(format!("{}+{epsilon}h", self.id), self.chart.clone(), upper, self.signature)
    }

    /// Max deviation from 1-periodicity of each component along each periodic
    /// coordinate, measured at `base` against `base + e_k`.
    pub fn periodicity_defect(&self, base: &[f64]) -> Result<f64> {
        let g0 = self.eval(base)?;
        let mut worst = 0.0_f64;
        for k in 0..self.dim() {
            if self.chart.kind(k) == CoordKind::Periodic {
                let mut shifted = base.to_vec();
                shifted[k] += 1.0;
                worst = worst.max((&self.eval(&shifted)? - &g0).max_abs());
            }
        }
        Ok(worst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    Preserving,
    Reversing,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct Jacobian<T> {
    pub matrix: Matrix<T>,
    pub det: T,
}

/// A point map of a chart given by component expressions, optionally with
/// its inverse.
#[derive(Clone, Debug)]
pub struct Diffeomorphism {
    label: String,
    chart: Chart,
    components: Vec<Expression>,
    inverse: Option<Vec<Expression>>,
    orientation: Orientation,
    programs: Vec<Program>,
}

impl Diffeomorphism {
    pub fn new(
        label: impl Into<String>,
        chart: Chart,
        components: Vec<Expression>,
        inverse: Option<Vec<Expression>>,
    ) -> Result<Diffeomorphism> {
        let n = chart.dim();
        if components.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: components.len(),
            });
        }
        if let Some(inv) = &inverse {
            if inv.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: inv.len(),
                });
            }
            let names = chart.names();
            for e in inv {
                Program::compile(e, &names)?;
            }
        }
        let names = chart.names();
        let programs = components
            .iter()
            .map(|e| Program::compile(e, &names))
            .collect::<Result<_>>()?;
        let mut map = Diffeomorphism {
            label: label.into(),
            chart,
            components,
            inverse,
            orientation: Orientation::Unknown,
            programs,
        };
        map.orientation = map.detect_orientation();
        Ok(map)
    }

    pub fn identity(chart: &Chart) -> Diffeomorphism {
        let comps: Vec<Expression> = chart.names().iter().map(|n| Expression::var(n)).collect();
        Diffeomorphism::new("id", chart.clone(), comps.clone(), Some(comps)).expect("identity")
    }

    /// The linear map `x ↦ Ax` (plus `shift`), with its inverse when `A` is
    /// invertible.
    pub fn affine(label: impl Into<String>, chart: &Chart, a: &Matrix<f64>, shift: &[f64]) -> Result<Diffeomorphism> {
        let names = chart.names();
        let n = names.len();
        let build = |m: &Matrix<f64>, b: &[f64]| -> Vec<Expression> {
            (0..n)
                .map(|i| {
                    let lin = Expression::sum(
                        (0..n).map(|j| Expression::mul(Expression::num(m[(i, j)]), Expression::var(names[j]))),
                    );
                    Expression::add(lin, Expression::num(b[i]))
                })
                .collect()
        };
        let forward = build(a, shift);
        let inverse = a.inverse().ok().map(|ai| {
            let back: Vec<f64> = (0..n)
                .map(|i| -(0..n).map(|j| ai[(i, j)] * shift[j]).sum::<f64>())
                .collect();
            build(&ai, &back)
        });
        Diffeomorphism::new(label, chart.clone(), forward, inverse)
    }

    fn detect_orientation(&self) -> Orientation {
        let reference: Vec<f64> = self
            .chart
            .coords()
            .iter()
            .map(|c| match c.kind {
                CoordKind::Periodic => 0.37,
                CoordKind::Open { lo, hi } => 0.5 * (lo + hi),
            })
            .collect();
        match self.jacobian(&Point::new(reference)) {
            Ok(j) if j.det > 0.0 => Orientation::Preserving,
            Ok(_) => Orientation::Reversing,
            Err(_) => Orientation::Unknown,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[Expression] {
        &self.components
    }

    pub fn inverse_components(&self) -> Option<&[Expression]> {
        self.inverse.as_deref()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Image point without periodic reduction.
    pub fn apply_raw<T: Real>(&self, p: &[T]) -> Result<Vec<T>> {
        self.programs.iter().map(|prog| prog.eval(p)).collect()
    }

    /// Image point with periodic coordinates reduced into `[0, 1)`.
    pub fn apply<T: Real>(&self, p: &[T]) -> Result<Point<T>> {
        let mut x = self.apply_raw(p)?;
        self.chart.reduce_periodic(&mut x);
        Ok(Point::new(x))
    }

    /// `J^i_a = ∂φ^i/∂x^a`; errors when `|det J| < 1e-12`.
    pub fn jacobian<T: Real>(&self, p: &Point<T>) -> Result<Jacobian<T>> {
        let n = self.chart.dim();
        let args = p.seeded();
        let mut matrix = Matrix::zeros(n, n);
        for (i, prog) in self.programs.iter().enumerate() {
            let d = prog.eval_dual(&args)?;
            for a in 0..n {
                matrix[(i, a)] = d.partial(a);
            }
        }
        let det = matrix.det();
        if det.abs() < T::lit(SINGULAR_JACOBIAN) {
            return Err(Error::Singular(format!(
                "Jacobian of `{}` has det {det} at {:?}",
                self.label, p.coords
            )));
        }
        Ok(Jacobian { matrix, det })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Diffeomorphism) -> Result<Diffeomorphism> {
        let subst: HashMap<String, Expression> = self
            .chart
            .names()
            .iter()
            .map(|n| n.to_string())
            .zip(inner.components.iter().cloned())
            .collect();
        let comps = self.components.iter().map(|e| e.substitute(&subst)).collect();
        let inverse = match (&self.inverse, &inner.inverse) {
            (Some(outer_inv), Some(inner_inv)) => {
                let subst: HashMap<String, Expression> = self
                    .chart
                    .names()
                    .iter()
                    .map(|n| n.to_string())
                    .zip(outer_inv.iter().cloned())
                    .collect();
                Some(inner_inv.iter().map(|e| e.substitute(&subst)).collect())
            }
            _ => None,
        };
        Diffeomorphism::new(
            format!("{}∘{}", self.label, inner.label),
            self.chart.clone(),
            comps,
            inverse,
        )
    }

    pub fn inverse(&self) -> Option<Diffeomorphism> {
        let inv = self.inverse.clone()?;
        Diffeomorphism::new(
            format!("{}⁻¹", self.label),
            self.chart.clone(),
            inv,
            Some(self.components.clone()),
        )
        .ok()
    }

    /// Max chart distance between `φ(φ⁻¹(p))` and `p` over the samples.
    pub fn inverse_defect(&self, samples: &[Point<f64>]) -> Result<Option<f64>> {
        let Some(inv) = self.inverse() else {
            return Ok(None);
        };
        let mut worst = 0.0_f64;
        for p in samples {
            let back = self.apply(&inv.apply(p)?)?;
            worst = worst.max(self.chart.distance(p, &back));
        }
        Ok(Some(worst))
    }

    /// Max `1 / |det J|` hint: smallest `|det J|` over samples.
    pub fn min_abs_det(&self, samples: &[Point<f64>]) -> Result<f64> {
        let mut m = f64::INFINITY;
        for p in samples {
            m = m.min(self.jacobian(p)?.det.abs());
        }
        Ok(m)
    }
}

/// `(φ*g)_ab(p) = J^i_a J^j_b g_ij(φ(p))`.
pub fn pullback_metric<T: Real>(phi: &Diffeomorphism, g: &MetricField, p: &Point<T>) -> Result<Matrix<T>> {
    let j = phi.jacobian(p)?;
    let q = phi.apply(p)?;
    Ok(j.matrix.congruence(&g.eval(&q)?))
}

/// The pullback `φ*g` materialized as an expression-defined field.
pub fn pullback_field(phi: &Diffeomorphism, g: &MetricField) -> Result<MetricField> {
    let names = g.chart().names();
    let n = names.len();
    let subst: HashMap<String, Expression> = names
        .iter()
        .map(|s| s.to_string())
        .zip(phi.components().iter().cloned())
        .collect();
    let moved: Vec<Vec<Expression>> = (0..n)
        .map(|i| (0..n).map(|j| g.component(i, j).substitute(&subst)).collect())
        .collect();
    let dphi: Vec<Vec<Expression>> = phi
        .components()
        .iter()
        .map(|c| names.iter().map(|v| c.derivative(v)).collect())
        .collect();
    let mut upper = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            let mut terms = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let t = Expression::mul(
                        Expression::mul(dphi[i][a].clone(), dphi[j][b].clone()),
                        moved[i][j].clone(),
                    );
                    if t.as_literal() != Some(0.0) {
                        terms.push(t);
                    }
                }
            }
            upper.push(Expression::sum(terms));
        }
    }
    MetricField::from_upper(
        format!("{}*{}", phi.label(), g.id()),
        g.chart().clone(),
        upper,
        g.signature(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn e(s: &str) -> Expression {
        parse(s).unwrap()
    }

    fn plane() -> Chart {
        Chart::new(vec![Coordinate::open("x", -5.0, 5.0), Coordinate::open("y", -5.0, 5.0)]).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let c = Chart::new(vec![Coordinate::periodic("x"), Coordinate::open("u", 0.0, 1.0)]).unwrap();
        assert!((c.canonicalize(&[1.25_f64, 0.5]).unwrap().coords[0] - 0.25).abs() < 1e-15);
        assert!((c.canonicalize(&[-0.1_f64, 0.5]).unwrap().coords[0] - 0.9).abs() < 1e-15);
        assert_eq!(c.canonicalize(&[0.0, 0.5]).unwrap().coords[1], 0.5);
        assert!(matches!(c.canonicalize(&[0.0, 1.5]), Err(Error::OutsideChart { index: 1, .. })));
        assert!(matches!(c.canonicalize(&[f64::NAN, 0.5]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn chart_needs_two_dimensions() {
        assert!(Chart::torus(&["x"]).is_err());
        assert!(Chart::torus(&["x", "x"]).is_err());
    }

    #[test]
    fn wrapped_distance() {
        let c = Chart::torus(&["x", "y"]).unwrap();
        assert!((c.distance(&[0.05_f64, 0.0], &[0.95, 0.0]) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn flat_jet_is_trivial() {
        let g = MetricField::flat("flat", plane());
        let jet = g.jet(&Point::new(vec![0.3, -0.2])).unwrap();
        assert_eq!(jet.value, Matrix::identity(2));
        assert!(jet.partials.iter().all(|m| m.max_abs() == 0.0));
    }

    #[test]
    fn exponential_warp_jet() {
        let g = MetricField::diagonal("warp", plane(), vec![e("1"), e("exp(2*x)")], Signature::Riemannian).unwrap();
        let jet = g.jet(&Point::new(vec![0.0, 0.4])).unwrap();
        assert_eq!(jet.value, Matrix::identity(2));
        assert_eq!(jet.partials[0], Matrix::diag(&[0.0, 2.0]));
        assert_eq!(jet.partials[1].max_abs(), 0.0);
    }

    #[test]
    fn jet_vanishes_at_critical_point() {
        let g = MetricField::diagonal("s", plane(), vec![e("2 + sin(x)"), e("1")], Signature::Riemannian).unwrap();
        let jet = g.jet(&Point::new(vec![std::f64::consts::FRAC_PI_2, 0.0])).unwrap();
        assert!(jet.partials[0][(0, 0)].abs() < 1e-15);
    }

    #[test]
    fn lower_triangle_mirrors_upper() {
        let g = MetricField::new(
            "m",
            plane(),
            vec![vec![e("2"), e("x")], vec![e("999"), e("3")]],
            Signature::Riemannian,
        )
        .unwrap();
        let v = g.eval(&[0.5, 0.0]).unwrap();
        assert_eq!(v[(1, 0)], 0.5);
        assert_eq!(v[(0, 1)], 0.5);
    }

    #[test]
    fn swap_jacobian() {
        let chart = Chart::torus(&["x", "y", "z"]).unwrap();
        let swap = Diffeomorphism::new("swap", chart, vec![e("z"), e("y"), e("x")], None).unwrap();
        let j = swap.jacobian(&Point::new(vec![0.1, 0.2, 0.3])).unwrap();
        assert_eq!(j.det, -1.0);
        assert_eq!(j.matrix[(0, 2)], 1.0);
        assert_eq!(j.matrix[(2, 0)], 1.0);
        assert_eq!(j.matrix[(1, 1)], 1.0);
        assert_eq!(swap.orientation(), Orientation::Reversing);
    }

    #[test]
    fn linear_map_pullback_is_ata() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.5, -1.0]]);
        let phi = Diffeomorphism::affine("A", &plane(), &a, &[0.0, 0.0]).unwrap();
        let p = Point::new(vec![0.2, 0.1]);
        assert_eq!(phi.jacobian(&p).unwrap().matrix, a);
        let g = MetricField::flat("flat", plane());
        let pb = pullback_metric(&phi, &g, &p).unwrap();
        assert!((&pb - &(&a.transpose() * &a)).max_abs() < 1e-15);
        let id = Diffeomorphism::identity(&plane());
        assert_eq!(pullback_metric(&id, &g, &p).unwrap(), g.eval(&p).unwrap());
    }

    #[test]
    fn singular_jacobian_flagged() {
        let fold = Diffeomorphism::new("fold", plane(), vec![e("x^2"), e("y")], None).unwrap();
        assert!(matches!(fold.jacobian(&Point::new(vec![0.0, 1.0])), Err(Error::Singular(_))));
    }

    #[test]
    fn symbolic_pullback_agrees_with_pointwise() {
        let g = MetricField::new(
            "g",
            plane(),
            vec![vec![e("2 + sin(x)"), e("0.1*x*y")], vec![e("0"), e("1 + y^2")]],
            Signature::Riemannian,
        )
        .unwrap();
        let phi = Diffeomorphism::new("phi", plane(), vec![e("x + 0.3*sin(y)"), e("y*exp(0.1*x)")], None).unwrap();
        let field = pullback_field(&phi, &g).unwrap();
        for p in [[0.1, 0.2], [-1.0, 0.7], [2.0, -1.5]] {
            let p = Point::new(p.to_vec());
            let a = pullback_metric(&phi, &g, &p).unwrap();
            let b = field.eval(&p).unwrap();
            assert!((&a - &b).max_abs() < 1e-13);
        }
    }

    #[test]
    fn composition_and_inverse() {
        let chart = Chart::torus(&["x", "y"]).unwrap();
        let shift = Diffeomorphism::new("t", chart.clone(), vec![e("x + 0.3"), e("y")], Some(vec![e("x - 0.3"), e("y")])).unwrap();
        let swap = Diffeomorphism::new("s", chart.clone(), vec![e("y"), e("x")], Some(vec![e("y"), e("x")])).unwrap();
        let st = swap.compose(&shift).unwrap();
        let p = [0.9_f64, 0.25];
        let img = st.apply(&p).unwrap();
        assert!((img.coords[0] - 0.25).abs() < 1e-15 && (img.coords[1] - 0.2).abs() < 1e-14);
        let samples = vec![Point::new(vec![0.1, 0.2]), Point::new(vec![0.95, 0.5])];
        assert!(st.inverse_defect(&samples).unwrap().unwrap() < 1e-14);
    }

    #[test]
    fn pullback_composition_is_contravariant() {
        let g = MetricField::diagonal("g", plane(), vec![e("1 + x^2"), e("2 + cos(y)")], Signature::Riemannian).unwrap();
        let phi = Diffeomorphism::new("phi", plane(), vec![e("x + 0.1*y^2"), e("y")], None).unwrap();
        let psi = Diffeomorphism::new("psi", plane(), vec![e("0.5*x"), e("y + 0.2*sin(x)")], None).unwrap();
        let composed = phi.compose(&psi).unwrap();
        let phi_g = pullback_field(&phi, &g).unwrap();
        for p in [[0.3, 0.4], [-0.8, 1.1]] {
            let p = Point::new(p.to_vec());
            let lhs = pullback_metric(&composed, &g, &p).unwrap();
            let rhs = pullback_metric(&psi, &phi_g, &p).unwrap();
            assert!((&lhs - &rhs).max_abs() < 1e-10);
        }
    }
}
