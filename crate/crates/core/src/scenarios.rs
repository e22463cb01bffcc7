//! Concrete scenarios: the Levi-Civita family on `S¹ × T^{n−2} × S¹` with its
//! swap map, the flat torus with integer unimodular maps, and a gnomonic
//! sphere patch with projective-linear maps.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::charts::{Chart, Coordinate, Diffeomorphism, MetricField, Point, Signature};
use crate::error::{Error, Result};
use crate::expr::{parse, validate_profile, Expression, ProfileOptions, ProfileViolation, Program};
use crate::linalg::Matrix;
use crate::metrization::{SolBasis, WeightedSolution};
use crate::projective::MapClass;
use crate::sampling::{sample_points, SampleConfig};

pub const DEFAULT_PROFILE: &str = "2 + 0.5*cos(2*pi*x)";

/// Shift used for the stock base-torus translations.
pub const TRANSLATION_SHIFT: f64 = 0.3;

/// Grid used for profile validation and the evenness check.
pub const PROFILE_GRID: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapRole {
    /// Candidate projective (non-affine) transformation.
    Candidate,
    /// Known isometry.
    Isometry,
}

#[derive(Clone, Debug)]
pub struct LabeledMap {
    pub map: Diffeomorphism,
    pub role: MapRole,
    pub expected: Option<MapClass>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub chart: Chart,
    pub metric: MetricField,
    pub companion: Option<MetricField>,
    pub maps: Vec<LabeledMap>,
    pub sol_basis: Option<SolBasis>,
    pub sampling: SampleConfig,
    pub note: String,
}

impl Scenario {
    pub fn map(&self, label: &str) -> Option<&LabeledMap> {
        self.maps.iter().find(|m| m.map.label() == label)
    }

    pub fn labels(&self) -> Vec<&str> {
        self.maps.iter().map(|m| m.map.label()).collect()
    }

    pub fn with_role(&self, role: MapRole) -> impl Iterator<Item = &LabeledMap> {
        self.maps.iter().filter(move |m| m.role == role)
    }

    pub fn samples(&self) -> Vec<Point<f64>> {
        sample_points(&self.chart, &self.sampling)
    }

    /// Checks that every field lives on the scenario chart.
    pub fn validate(&self) -> Result<()> {
        let mismatch = |what: &str| Err(Error::Invalid(format!("{what} is not on the scenario chart")));
        if self.metric.chart() != &self.chart {
            return mismatch("metric");
        }
        if let Some(c) = &self.companion {
            if c.chart() != &self.chart {
                return mismatch("companion metric");
            }
        }
        for m in &self.maps {
            if m.map.chart() != &self.chart {
                return mismatch(m.map.label());
            }
        }
        if let Some(b) = &self.sol_basis {
            if b.first.chart() != &self.chart || b.second.chart() != &self.chart {
                return mismatch("solution basis");
            }
        }
        Ok(())
    }
}

/// Constant metric on the base torus `T^{n−2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseMetric {
    matrix: Matrix<f64>,
}

impl BaseMetric {
    pub fn flat(dim: usize) -> BaseMetric {
        BaseMetric {
            matrix: Matrix::identity(dim),
        }
    }

    pub fn constant(matrix: Matrix<f64>) -> Result<BaseMetric> {
        if !matrix.is_symmetric(1e-14) {
            return Err(Error::Invalid("base metric must be symmetric".into()));
        }
        if matrix.rows() > 0 {
            matrix
                .cholesky()
                .map_err(|_| Error::NotPositiveDefinite("base metric is not Riemannian".into()))?;
        }
        Ok(BaseMetric { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<f64> {
        &self.matrix
    }
}

/// Inputs of [`build_levi_civita_family`].
#[derive(Clone, Debug)]
pub struct LeviCivitaSpec {
    pub n: usize,
    /// Profile as a function of `x`.
    pub f: Expression,
    pub base: BaseMetric,
    pub orientable: bool,
    /// Orientation-reversing base isometry for the orientable variant in
    /// dimension ≥ 3, as expressions in `y1..`; defaults to `y1 ↦ −y1`.
    pub alpha: Option<Vec<Expression>>,
    /// Accept constant profiles (for checking the pullback identity only).
    pub identity_check: bool,
    pub profile: ProfileOptions,
    pub sampling: SampleConfig,
}

impl LeviCivitaSpec {
    pub fn new(n: usize) -> LeviCivitaSpec {
        LeviCivitaSpec {
            n,
            f: parse(DEFAULT_PROFILE).expect("default profile parses"),
            base: BaseMetric::flat(n.saturating_sub(2)),
            orientable: false,
            alpha: None,
            identity_check: false,
            profile: ProfileOptions::default(),
            sampling: SampleConfig::default(),
        }
    }

    pub fn with_profile(mut self, f: Expression) -> Self {
        self.f = f;
        self
    }

    pub fn orientable(mut self, yes: bool) -> Self {
        self.orientable = yes;
        self
    }
}

/// Coordinate names `x, y1, .., y_{n−2}, z`.
pub fn family_names(n: usize) -> Vec<String> {
    let mut names = vec!["x".to_string()];
    names.extend((1..n - 1).map(|i| format!("y{i}")));
    names.push("z".into());
    names
}

pub fn family_chart(n: usize) -> Result<Chart> {
    let names = family_names(n);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Chart::torus(&refs)
}

fn check_profile(f: &Expression, opts: &ProfileOptions, allow_constant: bool) -> Result<()> {
    if let Some(v) = f.variables().into_iter().find(|v| v != "x") {
        return Err(Error::InvalidProfile(format!("f may only depend on x, found `{v}`")));
    }
    let violations: Vec<ProfileViolation> = validate_profile(f, "x", PROFILE_GRID, opts)?
        .into_iter()
        .filter(|v| !(allow_constant && matches!(v, ProfileViolation::Constant { .. })))
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidProfile(
            violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
        ))
    }
}

/// Max `|f(t) − f(−t mod 1)|` over the profile grid.
pub fn evenness_defect(f: &Expression) -> Result<f64> {
    let prog = Program::compile(f, &["x"])?;
    let mut worst = 0.0_f64;
    for i in 0..=PROFILE_GRID {
        let t = i as f64 / PROFILE_GRID as f64;
        worst = worst.max((prog.eval(&[t])? - prog.eval(&[1.0 - t])?).abs());
    }
    Ok(worst)
}

/// `f(x)` and `f(z)` as expressions.
fn profile_pair(f: &Expression) -> (Expression, Expression) {
    let subst = HashMap::from([("x".to_string(), Expression::var("z"))]);
    (f.clone(), f.substitute(&subst))
}

/// The three coefficient functions `(A, B, C)` of
/// `A dx² + B Σ g_ij dy^i dy^j + C dz²`.
fn family_coefficients(f: &Expression) -> [Expression; 3] {
    let (fx, fz) = profile_pair(f);
    let one = || Expression::num(1.0);
    let fx_minus_inv = Expression::sub(fx.clone(), Expression::div(one(), fz.clone()));
    let fx_minus_one = Expression::sub(fx, one());
    let one_minus_inv = Expression::sub(one(), Expression::div(one(), fz));
    [
        Expression::mul(fx_minus_inv.clone(), fx_minus_one.clone()),
        Expression::mul(fx_minus_one, one_minus_inv.clone()),
        Expression::mul(fx_minus_inv, one_minus_inv),
    ]
}

/// Closed-form companion coefficients: the family coefficients times
/// `f(z)/f(x)²`, `f(z)/f(x)` and `f(z)²/f(x)`.
fn displayed_coefficients(f: &Expression) -> [Expression; 3] {
    let (fx, fz) = profile_pair(f);
    let [a, b, c] = family_coefficients(f);
    [
        Expression::mul(a, Expression::div(fz.clone(), Expression::powi(fx.clone(), 2.0))),
        Expression::mul(b, Expression::div(fz.clone(), fx.clone())),
        Expression::mul(c, Expression::div(Expression::powi(fz, 2.0), fx)),
    ]
}

fn assemble(id: &str, n: usize, coeffs: [Expression; 3], base: &BaseMetric) -> Result<MetricField> {
    let chart = family_chart(n)?;
    let [a, b, c] = coeffs;
    let comps = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i, j) {
                    (0, 0) => a.clone(),
                    _ if i == n - 1 && j == n - 1 => c.clone(),
                    _ if i > 0 && j > 0 && i < n - 1 && j < n - 1 => {
                        Expression::mul(b.clone(), Expression::num(base.matrix[(i - 1, j - 1)]))
                    }
                    _ => Expression::num(0.0),
                })
                .collect()
        })
        .collect();
    MetricField::new(id, chart, comps, Signature::Riemannian)
}

/// The family metric `g` for profile `f` (no profile validation).
pub fn family_metric(f: &Expression, n: usize, base: &BaseMetric) -> Result<MetricField> {
    if n < 2 || base.dim() != n - 2 {
        return Err(Error::Dimension {
            expected: n.saturating_sub(2),
            got: base.dim(),
        });
    }
    assemble("g", n, family_coefficients(f), base)
}

/// The swap pullback written out in closed form.
pub fn displayed_companion(f: &Expression, n: usize, base: &BaseMetric) -> Result<MetricField> {
    family_metric(f, n, base)?;
    assemble("g_bar_formula", n, displayed_coefficients(f), base)
}

/// `(x, y, z) ↦ (z, y, x)`.
pub fn swap_map(chart: &Chart) -> Result<Diffeomorphism> {
    let names = chart.names();
    let n = names.len();
    let comps: Vec<Expression> = (0..n)
        .map(|i| {
            let k = if i == 0 { n - 1 } else if i == n - 1 { 0 } else { i };
            Expression::var(names[k])
        })
        .collect();
    Diffeomorphism::new("swap", chart.clone(), comps.clone(), Some(comps))
}

/// `y_i ↦ y_i + shift` (index counted from 1).
pub fn translation_map(chart: &Chart, i: usize, shift: f64) -> Result<Diffeomorphism> {
    let names = chart.names();
    let build = |s: f64| -> Vec<Expression> {
        names
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if k == i {
                    Expression::add(Expression::var(v), Expression::num(s))
                } else {
                    Expression::var(v)
                }
            })
            .collect()
    };
    Diffeomorphism::new(format!("t{i}"), chart.clone(), build(shift), Some(build(-shift)))
}

/// Orientation-preserving variant of the swap.
fn orientable_swap(chart: &Chart, alpha: Option<&[Expression]>) -> Result<Diffeomorphism> {
    let names = chart.names();
    let n = names.len();
    let v = |k: usize| Expression::var(names[k]);
    if n == 2 {
        // reflection (x, z) ↦ (−x, z) after the swap
        return Diffeomorphism::new(
            "swap-or",
            chart.clone(),
            vec![Expression::neg(v(1)), v(0)],
            Some(vec![v(1), Expression::neg(v(0))]),
        );
    }
    let (middle, inverse_middle) = match alpha {
        Some(a) => {
            if a.len() != n - 2 {
                return Err(Error::Dimension {
                    expected: n - 2,
                    got: a.len(),
                });
            }
            (a.to_vec(), None)
        }
        None => {
            let flip: Vec<Expression> = (1..n - 1)
                .map(|k| if k == 1 { Expression::neg(v(k)) } else { v(k) })
                .collect();
            (flip.clone(), Some(flip))
        }
    };
    let assemble = |mid: Vec<Expression>| {
        let mut c = vec![v(n - 1)];
        c.extend(mid);
        c.push(v(0));
        c
    };
    let map = Diffeomorphism::new(
        "swap-or",
        chart.clone(),
        assemble(middle),
        inverse_middle.map(assemble),
    )?;
    Ok(map)
}

/// The Levi-Civita family with companion `ḡ = swap*g`, candidate maps, base
/// translations and the solution basis `(σ_g, σ_ḡ)`.
pub fn build_levi_civita_family(spec: &LeviCivitaSpec) -> Result<Scenario> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::Invalid(format!("family needs n >= 2, got {n}")));
    }
    check_profile(&spec.f, &spec.profile, spec.identity_check)?;
    if spec.orientable && n == 2 {
        let defect = evenness_defect(&spec.f)?;
        if defect > 1e-9 {
            return Err(Error::InvalidProfile(format!(
                "orientable variant in dimension 2 needs an even profile (defect {defect:e})"
            )));
        }
    }
    let g = family_metric(&spec.f, n, &spec.base)?;
    let chart = g.chart().clone();
    let swap = swap_map(&chart)?;
    let companion = crate::charts::pullback_field(&swap, &g)?.with_id("g_bar");

    let phi = if spec.orientable {
        orientable_swap(&chart, spec.alpha.as_deref())?
    } else {
        swap.clone()
    };
    let expected = (!spec.identity_check).then_some(MapClass::ProjectiveNonaffine);
    let mut maps = vec![LabeledMap {
        map: phi.clone(),
        role: MapRole::Candidate,
        expected,
    }];
    let translations: Vec<Diffeomorphism> = (1..n - 1)
        .map(|i| translation_map(&chart, i, TRANSLATION_SHIFT))
        .collect::<Result<_>>()?;
    if let Some(t1) = translations.first() {
        maps.push(LabeledMap {
            map: phi.compose(t1)?,
            role: MapRole::Candidate,
            expected,
        });
    }
    for t in translations {
        maps.push(LabeledMap {
            map: t,
            role: MapRole::Isometry,
            expected: Some(MapClass::Isometry),
        });
    }
    if spec.orientable && n == 2 {
        let names = chart.names();
        let reflect = vec![Expression::neg(Expression::var(names[0])), Expression::var(names[1])];
        maps.push(LabeledMap {
            map: Diffeomorphism::new("reflect-x", chart.clone(), reflect.clone(), Some(reflect))?,
            role: MapRole::Isometry,
            expected: Some(MapClass::Isometry),
        });
    }

    let witness = sample_points(&chart, &spec.sampling.with_count(10));
    let sol_basis = SolBasis::new(
        WeightedSolution::FromMetric(g.clone()),
        WeightedSolution::FromMetric(companion.clone()),
        &witness,
    )?;
    let name = format!("levi-civita-n{n}{}", if spec.orientable { "-orientable" } else { "" });
    Ok(Scenario {
        name,
        chart,
        metric: g,
        companion: Some(companion),
        maps,
        sol_basis: Some(sol_basis),
        sampling: spec.sampling,
        note: format!(
            "Levi-Civita family on S1 x T^{} x S1 with f(x) = {}; companion is the pullback by {}",
            n - 2,
            spec.f,
            phi.label()
        ),
    })
}

fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Max componentwise relative deviation between the numeric swap pullback of
/// `g` and the closed-form companion at `p` (flat base).
pub fn pullback_formula_residual(f: &Expression, n: usize, p: &Point<f64>) -> Result<f64> {
    check_profile(f, &ProfileOptions::default(), true)?;
    let base = BaseMetric::flat(n.saturating_sub(2));
    let g = family_metric(f, n, &base)?;
    let swap = swap_map(g.chart())?;
    let direct = crate::charts::pullback_metric(&swap, &g, p)?;
    let displayed = displayed_companion(f, n, &base)?.eval(p)?;
    Ok(direct
        .as_slice()
        .iter()
        .zip(displayed.as_slice())
        .fold(0.0, |m, (a, b)| m.max(relative_deviation(*a, *b))))
}

/// The pullback identity as an algebraic statement in `F = f(x)`,
/// `G = f(z)`, checked on a `grid × grid` set of values in `(1, 5]`.
pub fn algebraic_identity_residual(grid: usize) -> f64 {
    let values: Vec<f64> = (1..=grid).map(|i| 1.0 + 4.0 * i as f64 / grid as f64).collect();
    let mut worst = 0.0_f64;
    for &fx in &values {
        for &fz in &values {
            // swapped family coefficients: A(z, x), B(z, x), C(z, x) with the
            // dx²/dz² roles exchanged
            let direct = [
                (fz - 1.0 / fx) * (1.0 - 1.0 / fx),
                (fz - 1.0) * (1.0 - 1.0 / fx),
                (fz - 1.0 / fx) * (fz - 1.0),
            ];
            let displayed = [
                (fx - 1.0 / fz) * (fx - 1.0) * fz / (fx * fx),
                (fx - 1.0) * (1.0 - 1.0 / fz) * fz / fx,
                (fx - 1.0 / fz) * (1.0 - 1.0 / fz) * fz * fz / fx,
            ];
            for (a, b) in direct.iter().zip(&displayed) {
                worst = worst.max(relative_deviation(*a, *b));
            }
        }
    }
    worst
}

/// Smooth periodic symmetric perturbation field:
/// `h_ii = cos 2π(x_first + x_last)`, `h_{0,n−1} = ½ sin 2π x_first`.
pub fn perturbation(chart: &Chart) -> Result<MetricField> {
    let names = chart.names();
    let n = names.len();
    let diag = parse(&format!("cos(2*pi*({} + {}))", names[0], names[n - 1]))?;
    let off = parse(&format!("0.5*sin(2*pi*{})", names[0]))?;
    let comps = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (i, j) {
                    _ if i == j => diag.clone(),
                    (0, j) if j == n - 1 => off.clone(),
                    _ => Expression::num(0.0),
                })
                .collect()
        })
        .collect();
    MetricField::new("h", chart.clone(), comps, Signature::Indefinite)
}

fn integer_matrix(a: [[i64; 2]; 2]) -> Matrix<f64> {
    Matrix::from_fn(2, 2, |i, j| a[i][j] as f64)
}

/// Flat `T² = ℝ²/ℤ²` with `u ↦ Au mod 1` for `A ∈ SL(2, ℤ)`.
pub fn build_flat_torus(a: [[i64; 2]; 2]) -> Result<Scenario> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det != 1 {
        return Err(Error::Invalid(format!("torus map must have det 1, got {det}")));
    }
    let chart = Chart::torus(&["u", "v"])?;
    let m = integer_matrix(a);
    let map = Diffeomorphism::affine(format!("A{:?}", a), &chart, &m, &[0.0, 0.0])?;
    let orthogonal = (&(&m.transpose() * &m) - &Matrix::identity(2)).max_abs() == 0.0;
    let metric = MetricField::flat("g", chart.clone());
    Ok(Scenario {
        name: "flat-torus".into(),
        chart: chart.clone(),
        companion: Some(crate::charts::pullback_field(&map, &metric)?.with_id("A*g")),
        metric,
        maps: vec![LabeledMap {
            map,
            role: if orthogonal { MapRole::Isometry } else { MapRole::Candidate },
            expected: Some(if orthogonal {
                MapClass::Isometry
            } else {
                MapClass::AffineNonisometric
            }),
        }],
        sol_basis: None,
        sampling: SampleConfig::default(),
        note: format!("flat torus with the linear map {a:?} mod 1"),
    })
}

/// Half-width of the sphere chart box; with the default sampling margin the
/// samples fill `[−1, 1]²`.
pub const SPHERE_CHART_HALF_WIDTH: f64 = 1.05;

/// Round metric in the gnomonic chart, `((1+|u|²)δ − uuᵀ)/(1+|u|²)²`.
pub fn gnomonic_metric() -> Result<MetricField> {
    let w = SPHERE_CHART_HALF_WIDTH;
    let chart = Chart::new(vec![Coordinate::open("u", -w, w), Coordinate::open("v", -w, w)])?;
    let comps = vec![
        vec![parse("(1 + v^2)/(1 + u^2 + v^2)^2")?, parse("-u*v/(1 + u^2 + v^2)^2")?],
        vec![Expression::num(0.0), parse("(1 + u^2)/(1 + u^2 + v^2)^2")?],
    ];
    MetricField::new("g_round", chart, comps, Signature::Riemannian)
}

fn projective_linear(chart: &Chart, a: &Matrix<f64>) -> Vec<Expression> {
    let names = chart.names();
    let row = |i: usize| {
        Expression::sum([
            Expression::mul(Expression::num(a[(i, 0)]), Expression::var(names[0])),
            Expression::mul(Expression::num(a[(i, 1)]), Expression::var(names[1])),
            Expression::num(a[(i, 2)]),
        ])
    };
    let den = row(2);
    vec![Expression::div(row(0), den.clone()), Expression::div(row(1), den)]
}

/// Gnomonic sphere patch with `u ↦ [A(u, 1)]` for `det A = 1`.
pub fn build_sphere_projective(a: &Matrix<f64>) -> Result<Scenario> {
    if a.rows() != 3 || a.cols() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: a.rows(),
        });
    }
    let det = a.det();
    if (det - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!("sphere map must have det 1, got {det}")));
    }
    // the denominator is affine in u, so its extremes on the box are corners
    let corners = [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)];
    let dens: Vec<f64> = corners.iter().map(|(u, v)| a[(2, 0)] * u + a[(2, 1)] * v + a[(2, 2)]).collect();
    let same_sign = dens.iter().all(|d| *d > 0.0) || dens.iter().all(|d| *d < 0.0);
    let min = dens.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    if !same_sign || min < 1e-6 * a.max_abs() {
        return Err(Error::Singular(format!(
            "projective denominator vanishes on the sampling box (corner values {dens:?})"
        )));
    }
    let metric = gnomonic_metric()?;
    let chart = metric.chart().clone();
    let inverse = a.inverse()?;
    let map = Diffeomorphism::new(
        "phi_A",
        chart.clone(),
        projective_linear(&chart, a),
        Some(projective_linear(&chart, &inverse)),
    )?;
    let orthogonal = (&(&a.transpose() * a) - &Matrix::identity(3)).max_abs() <= 1e-9;
    Ok(Scenario {
        name: "sphere-gnomonic".into(),
        chart,
        companion: Some(crate::charts::pullback_field(&map, &metric)?.with_id("phi_A*g")),
        metric,
        maps: vec![LabeledMap {
            map,
            role: if orthogonal { MapRole::Isometry } else { MapRole::Candidate },
            expected: Some(if orthogonal {
                MapClass::Isometry
            } else {
                MapClass::ProjectiveNonaffine
            }),
        }],
        sol_basis: None,
        sampling: SampleConfig::default(),
        note: "round sphere in one gnomonic chart, sampled on |u|,|v| <= 1 (local check)".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::pullback_metric;
    use crate::projective::{classify_map, projective_report, Tolerances, Verdict};

    fn samples(s: &Scenario, count: usize) -> Vec<Point<f64>> {
        sample_points(&s.chart, &s.sampling.with_count(count))
    }

    #[test]
    fn family_n3_projective() {
        let s = build_levi_civita_family(&LeviCivitaSpec::new(3)).unwrap();
        s.validate().unwrap();
        let pts = samples(&s, 100);
        let report = projective_report(&s.metric, s.companion.as_ref().unwrap(), &pts, 1e-8).unwrap();
        assert_eq!(report.verdict, Verdict::Equivalent, "{}", report.residual_max);
        assert_eq!(s.labels(), vec!["swap", "swap∘t1", "t1"]);
    }

    #[test]
    fn constant_profile_identity_mode() {
        let two = parse("2").unwrap();
        assert!(matches!(
            build_levi_civita_family(&LeviCivitaSpec::new(3).with_profile(two.clone())),
            Err(Error::InvalidProfile(_))
        ));
        let mut spec = LeviCivitaSpec::new(3).with_profile(two.clone());
        spec.identity_check = true;
        let s = build_levi_civita_family(&spec).unwrap();
        let p = Point::new(vec![0.2, 0.4, 0.7]);
        assert!((s.metric.eval(&p).unwrap()[(0, 0)] - 1.5_f64).abs() < 1e-15);
        let gbar = s.companion.as_ref().unwrap().eval(&p).unwrap();
        assert!((gbar[(0, 0)] - 0.75_f64).abs() < 1e-15);
        let displayed = displayed_companion(&two, 3, &BaseMetric::flat(1)).unwrap().eval(&p).unwrap();
        assert!((displayed[(0, 0)] - 0.75_f64).abs() < 1e-15);
        assert!(pullback_formula_residual(&two, 3, &p).unwrap() < 1e-15);
    }

    #[test]
    fn low_profile_rejected() {
        let spec = LeviCivitaSpec::new(3).with_profile(parse("1 + 0.1*cos(2*pi*x)").unwrap());
        match build_levi_civita_family(&spec) {
            Err(Error::InvalidProfile(msg)) => assert!(msg.contains("0.9"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pullback_formula_matches() {
        let f = parse(DEFAULT_PROFILE).unwrap();
        for n in [2, 3, 4] {
            let mut p = vec![0.1; n];
            p[n - 1] = 0.3;
            assert!(pullback_formula_residual(&f, n, &Point::new(p)).unwrap() <= 1e-12);
        }
        assert!(algebraic_identity_residual(50) <= 1e-12);
    }

    #[test]
    fn companions_agree() {
        let s = build_levi_civita_family(&LeviCivitaSpec::new(4)).unwrap();
        let displayed = displayed_companion(&parse(DEFAULT_PROFILE).unwrap(), 4, &BaseMetric::flat(2)).unwrap();
        for p in samples(&s, 200) {
            let a = s.companion.as_ref().unwrap().eval(&p).unwrap();
            let b = displayed.eval(&p).unwrap();
            assert!((&a - &b).max_abs() <= 1e-12 * b.max_abs());
        }
    }

    #[test]
    fn swap_is_involution_and_translations_are_isometries() {
        let s = build_levi_civita_family(&LeviCivitaSpec::new(4)).unwrap();
        let pts = samples(&s, 100);
        let swap = &s.map("swap").unwrap().map;
        for p in &pts {
            let back = swap.apply(&swap.apply(p).unwrap()).unwrap();
            assert!(s.chart.distance(p, &back) <= 1e-12);
        }
        let tol = Tolerances::default();
        for m in s.with_role(MapRole::Isometry) {
            let c = classify_map(&m.map, &s.metric, &pts, &tol).unwrap();
            assert_eq!(c.class, MapClass::Isometry);
            let gbar = s.companion.as_ref().unwrap();
            for p in pts.iter().take(20) {
                let moved = pullback_metric(&m.map, gbar, p).unwrap();
                assert!((&moved - &gbar.eval(p).unwrap()).max_abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn orientable_variants() {
        for n in [2, 3] {
            let s = build_levi_civita_family(&LeviCivitaSpec::new(n).orientable(true)).unwrap();
            let phi = &s.maps[0].map;
            assert_eq!(phi.label(), "swap-or");
            assert_eq!(phi.orientation(), crate::charts::Orientation::Preserving);
            let gbar = s.companion.as_ref().unwrap();
            for p in samples(&s, 30) {
                let moved = pullback_metric(phi, &s.metric, &p).unwrap();
                assert!((&moved - &gbar.eval(&p).unwrap()).max_abs() <= 1e-12);
            }
        }
        let odd = LeviCivitaSpec::new(2)
            .with_profile(parse("2 + 0.5*sin(2*pi*x)").unwrap())
            .orientable(true);
        assert!(matches!(build_levi_civita_family(&odd), Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn torus_examples() {
        let s = build_flat_torus([[1, 1], [0, 1]]).unwrap();
        let pts = samples(&s, 50);
        let m = &s.maps[0].map;
        let c = classify_map(m, &s.metric, &pts, &Tolerances::default()).unwrap();
        assert_eq!(c.class, MapClass::AffineNonisometric);
        let pulled = pullback_metric(m, &s.metric, &pts[0]).unwrap();
        assert_eq!(pulled.to_rows(), vec![vec![1.0, 1.0], vec![1.0, 2.0]]);
        let s = build_flat_torus([[0, -1], [1, 0]]).unwrap();
        let c = classify_map(&s.maps[0].map, &s.metric, &pts, &Tolerances::default()).unwrap();
        assert_eq!(c.class, MapClass::Isometry);
        assert!(build_flat_torus([[2, 0], [0, 1]]).is_err());
    }

    #[test]
    fn sphere_examples() {
        let tol = Tolerances::default();
        let s = build_sphere_projective(&Matrix::identity(3)).unwrap();
        let pts = samples(&s, 60);
        assert_eq!(classify_map(&s.maps[0].map, &s.metric, &pts, &tol).unwrap().class, MapClass::Isometry);
        let s = build_sphere_projective(&Matrix::diag(&[2.0, 1.0, 0.5])).unwrap();
        let c = classify_map(&s.maps[0].map, &s.metric, &pts, &tol).unwrap();
        assert_eq!(c.class, MapClass::ProjectiveNonaffine, "{c:?}");
        let (sn, cs) = 0.7f64.sin_cos();
        let rot = Matrix::from_rows(&[vec![cs, -sn, 0.0], vec![sn, cs, 0.0], vec![0.0, 0.0, 1.0]]);
        let s = build_sphere_projective(&rot).unwrap();
        let m = &s.maps[0].map;
        for p in &pts {
            assert!((&pullback_metric(m, &s.metric, p).unwrap() - &s.metric.eval(p).unwrap()).max_abs() <= 1e-10);
        }
        assert!(build_sphere_projective(&Matrix::diag(&[2.0, 1.0, 1.0])).is_err());
        let bad = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![2.0, 0.0, 1.0]]);
        assert!(matches!(build_sphere_projective(&bad), Err(Error::Singular(_))));
    }
}
