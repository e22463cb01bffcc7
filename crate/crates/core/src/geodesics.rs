//! Levi-Civita connection, RK4 geodesic integration and comparison of
//! geodesics as unparameterized curves.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charts::{Chart, MetricField, Point};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;
use crate::sampling::{rng, sample_points, SampleConfig};

/// Connection coefficients `Γ^i_{jk}`, stored `[(i·n + j)·n + k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Christoffel<T> {
    pub fn zeros(n: usize) -> Self {
        Christoffel {
            n,
            data: vec![T::zero(); n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.data[(i * self.n + j) * self.n + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: T) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    pub fn max_abs(&self) -> T {
        crate::real::max_abs(&self.data)
    }

    pub fn difference(&self, other: &Christoffel<T>) -> Christoffel<T> {
        Christoffel {
            n: self.n,
            data: other.data.iter().zip(&self.data).map(|(&b, &a)| b - a).collect(),
        }
    }

    /// `-Γ^i_{jk} v^j v^k`.
    pub fn acceleration(&self, v: &[T]) -> Vec<T> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut s = T::zero();
                for j in 0..n {
                    for k in 0..n {
                        s = s + self.get(i, j, k) * v[j] * v[k];
                    }
                }
                -s
            })
            .collect()
    }
}

/// `Γ^i_{jk} = ½ g^{il}(∂_j g_{lk} + ∂_k g_{jl} − ∂_l g_{jk})`, computed for
/// `j ≤ k` and mirrored, so symmetry in `(j, k)` is exact.
pub fn christoffel<T: Real>(g: &MetricField, p: &Point<T>) -> Result<Christoffel<T>> {
    let jet = g.jet(p)?;
    let inv = jet
        .value
        .inverse()
        .map_err(|e| Error::Singular(format!("metric `{}` at {:?}: {e}", g.id(), p.coords)))?;
    Ok(christoffel_from_jet(&inv, &jet.partials))
}

pub(crate) fn christoffel_from_jet<T: Real>(inv: &Matrix<T>, d: &[Matrix<T>]) -> Christoffel<T> {
    let n = inv.rows();
    let half = T::lit(0.5);
    let mut gamma = Christoffel::zeros(n);
    for j in 0..n {
        for k in j..n {
            // lowered symbol Γ_{l jk}
            let lowered: Vec<T> = (0..n)
                .map(|l| (d[j][(l, k)] + d[k][(j, l)] - d[l][(j, k)]) * half)
                .collect();
            for i in 0..n {
                let v = (0..n).fold(T::zero(), |s, l| s + inv[(i, l)] * lowered[l]);
                gamma.set(i, j, k, v);
                gamma.set(i, k, j, v);
            }
        }
    }
    gamma
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameterization {
    /// Integrate with the given initial velocity.
    Affine,
    /// Normalize the initial velocity to unit speed first.
    ArcLength,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub h: f64,
    pub steps: usize,
    /// Relative energy tolerance; drift beyond 10× this aborts the run.
    pub rel_tol: f64,
    pub mode: Parameterization,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            h: 1e-3,
            steps: 2000,
            rel_tol: 1e-6,
            mode: Parameterization::Affine,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::Invalid(format!("step size {} must be positive", self.h)));
        }
        if self.steps < 1 {
            return Err(Error::Invalid("at least one step required".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    /// The next step left an open chart; the trace is truncated there.
    DomainExit { last_index: usize },
}

/// A sampled geodesic. Points are canonical; `windings` records how many
/// periods each periodic coordinate has been unwrapped by.
#[derive(Clone, Debug)]
pub struct GeodesicTrace<T> {
    pub metric_id: String,
    pub params: Vec<T>,
    pub points: Vec<Point<T>>,
    pub windings: Vec<Vec<i64>>,
    pub velocities: Vec<Vec<T>>,
    pub energies: Vec<T>,
    pub termination: Termination,
}

impl<T: Real> GeodesicTrace<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Continuous (unwrapped) coordinates of point `i`.
    pub fn unwrapped(&self, i: usize) -> Vec<T> {
        self.points[i]
            .coords
            .iter()
            .zip(&self.windings[i])
            .map(|(&x, &w)| x + T::lit(w as f64))
            .collect()
    }

    pub fn unwrapped_points(&self) -> Vec<Vec<T>> {
        (0..self.len()).map(|i| self.unwrapped(i)).collect()
    }

    /// Largest relative deviation of the energy from its initial value.
    pub fn energy_drift(&self) -> T {
        let e0 = self.energies[0];
        self.energies
            .iter()
            .fold(T::zero(), |m, &e| m.max(((e - e0) / e0).abs()))
    }

    pub fn reversed(&self) -> GeodesicTrace<T> {
        let mut t = self.clone();
        t.params.reverse();
        t.points.reverse();
        t.windings.reverse();
        t.velocities.reverse();
        t.energies.reverse();
        for v in &mut t.velocities {
            for c in v.iter_mut() {
                *c = -*c;
            }
        }
        t
    }

    /// Writes one row per step: parameter, canonical coordinates, velocity
    /// components, energy. The first line is a `#` comment carrying the
    /// metric id and `config_hash`.
    pub fn write_csv<W: Write>(&self, chart: &Chart, config_hash: &str, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# metric={} config={}", self.metric_id, config_hash)?;
        let names = chart.names();
        let mut header = vec!["t".to_string()];
        header.extend(names.iter().map(|n| n.to_string()));
        header.extend(names.iter().map(|n| format!("v_{n}")));
        header.push("energy".into());
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.len() {
            let mut row = vec![self.params[i].to_string()];
            row.extend(self.points[i].coords.iter().map(|c| c.to_string()));
            row.extend(self.velocities[i].iter().map(|c| c.to_string()));
            row.push(self.energies[i].to_string());
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn quadratic<T: Real>(g: &Matrix<T>, v: &[T]) -> T {
    let n = v.len();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            s = s + g[(i, j)] * v[i] * v[j];
        }
    }
    s
}

fn axpy<T: Real>(x: &[T], a: T, y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&xi, &yi)| xi + a * yi).collect()
}

/// Integrates `ẍ^i + Γ^i_{jk} ẋ^j ẋ^k = 0` from `(p, v)` with classical RK4.
pub fn integrate_geodesic<T: Real>(
    g: &MetricField,
    p: &Point<T>,
    v: &[T],
    cfg: &IntegratorConfig,
) -> Result<GeodesicTrace<T>> {
    cfg.validate()?;
    let chart = g.chart();
    let n = chart.dim();
    if v.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: v.len(),
        });
    }
    if v.iter().all(|c| *c == T::zero()) {
        return Err(Error::Invalid("zero initial velocity".into()));
    }
    let start = chart.canonicalize(&p.coords)?;
    let g0 = g.eval(&start)?;
    let mut vel = v.to_vec();
    if cfg.mode == Parameterization::ArcLength {
        let speed = quadratic(&g0, &vel).sqrt();
        vel.iter_mut().for_each(|c| *c = *c / speed);
    }
    let e0 = quadratic(&g0, &vel);
    let h = T::lit(cfg.h);
    let limit = T::lit(10.0 * cfg.rel_tol);

    let accel = |x: &[T], v: &[T]| -> Result<Vec<T>> {
        let mut reduced = x.to_vec();
        chart.reduce_periodic(&mut reduced);
        Ok(christoffel(g, &Point::new(reduced))?.acceleration(v))
    };

    let mut x = start.coords.clone();
    let mut trace = GeodesicTrace {
        metric_id: g.id().to_string(),
        params: vec![T::zero()],
        points: vec![start.clone()],
        windings: vec![vec![0; n]],
        velocities: vec![vel.clone()],
        energies: vec![e0],
        termination: Termination::Completed,
    };
    let two = T::lit(2.0);
    let sixth = T::lit(1.0 / 6.0);
    let half_h = h / two;
    for step in 1..=cfg.steps {
        let k1x = vel.clone();
        let k1v = accel(&x, &vel)?;
        let k2x = axpy(&vel, half_h, &k1v);
        let k2v = accel(&axpy(&x, half_h, &k1x), &k2x)?;
        let k3x = axpy(&vel, half_h, &k2v);
        let k3v = accel(&axpy(&x, half_h, &k2x), &k3x)?;
        let k4x = axpy(&vel, h, &k3v);
        let k4v = accel(&axpy(&x, h, &k3x), &k4x)?;
        let nx: Vec<T> = (0..n)
            .map(|i| x[i] + h * sixth * (k1x[i] + two * k2x[i] + two * k3x[i] + k4x[i]))
            .collect();
        let nv: Vec<T> = (0..n)
            .map(|i| vel[i] + h * sixth * (k1v[i] + two * k2v[i] + two * k3v[i] + k4v[i]))
            .collect();
        if !chart.contains(&nx) {
            trace.termination = Termination::DomainExit {
                last_index: trace.len() - 1,
            };
            break;
        }
        x = nx;
        vel = nv;
        let mut canonical = x.clone();
        chart.reduce_periodic(&mut canonical);
        let windings = x
            .iter()
            .zip(&canonical)
            .map(|(&u, &c)| (u - c).round().to_i64().unwrap_or(0))
            .collect();
        let e = quadratic(&g.eval(&canonical)?, &vel);
        let drift = ((e - e0) / e0).abs();
        if drift > limit {
            return Err(Error::EnergyDrift {
                step,
                drift: drift.to_f64_lossy(),
                limit: limit.to_f64_lossy(),
            });
        }
        trace.params.push(T::lit(step as f64) * h);
        trace.points.push(Point::new(canonical));
        trace.windings.push(windings);
        trace.velocities.push(vel.clone());
        trace.energies.push(e);
    }
    Ok(trace)
}

fn point_segment_distance<T: Real>(q: &[T], a: &[T], b: &[T]) -> T {
    let mut ab2 = T::zero();
    let mut aq_ab = T::zero();
    for i in 0..q.len() {
        let d = b[i] - a[i];
        ab2 = ab2 + d * d;
        aq_ab = aq_ab + (q[i] - a[i]) * d;
    }
    let t = if ab2 > T::zero() {
        (aq_ab / ab2).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    q.iter()
        .zip(a.iter().zip(b))
        .fold(T::zero(), |s, (&qi, (&ai, &bi))| {
            let d = qi - (ai + t * (bi - ai));
            s + d * d
        })
        .sqrt()
}

/// One-sided Hausdorff distance from the vertices of `a` to the polyline `b`.
/// Points are unwrapped coordinates; each query point is shifted by whole
/// periods to the representative nearest the segment start.
fn one_sided<T: Real>(chart: &Chart, a: &[Vec<T>], b: &[Vec<T>]) -> T {
    let mut worst = T::zero();
    for q in a {
        let mut best = T::infinity();
        if b.len() == 1 {
            best = chart.distance(q, &b[0]);
        }
        for seg in b.windows(2) {
            let shift = chart.difference(&seg[0], q);
            let q_near: Vec<T> = seg[0].iter().zip(&shift).map(|(&s, &d)| s + d).collect();
            best = best.min(point_segment_distance(&q_near, &seg[0], &seg[1]));
        }
        worst = worst.max(best);
    }
    worst
}

/// Symmetric Hausdorff distance between two polylines of unwrapped points.
pub fn polyline_distance<T: Real>(chart: &Chart, a: &[Vec<T>], b: &[Vec<T>]) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Invalid("empty polyline".into()));
    }
    Ok(one_sided(chart, a, b).max(one_sided(chart, b, a)))
}

pub fn trace_distance<T: Real>(chart: &Chart, a: &GeodesicTrace<T>, b: &GeodesicTrace<T>) -> Result<T> {
    polyline_distance(chart, &a.unwrapped_points(), &b.unwrapped_points())
}

/// Cumulative `metric`-arc length along the unwrapped points (midpoint rule).
pub fn arc_lengths<T: Real>(metric: &MetricField, pts: &[Vec<T>]) -> Result<Vec<T>> {
    let chart = metric.chart();
    let mut out = Vec::with_capacity(pts.len());
    let mut s = T::zero();
    out.push(s);
    let half = T::lit(0.5);
    for w in pts.windows(2) {
        let d: Vec<T> = w[1].iter().zip(&w[0]).map(|(&b, &a)| b - a).collect();
        let mut mid: Vec<T> = w[0].iter().zip(&d).map(|(&a, &di)| a + half * di).collect();
        chart.reduce_periodic(&mut mid);
        s = s + quadratic(&metric.eval(&mid)?, &d).max(T::zero()).sqrt();
        out.push(s);
    }
    Ok(out)
}

/// Resamples a polyline at `count` stations uniformly spaced in arc length
/// over `[0, length]`.
pub fn resample<T: Real>(pts: &[Vec<T>], lengths: &[T], length: T, count: usize) -> Vec<Vec<T>> {
    let count = count.max(2);
    let mut out = Vec::with_capacity(count);
    let mut seg = 0usize;
    for s in 0..count {
        let target = length * T::lit(s as f64 / (count - 1) as f64);
        while seg + 2 < lengths.len() && lengths[seg + 1] < target {
            seg += 1;
        }
        let (l0, l1) = (lengths[seg], lengths[(seg + 1).min(lengths.len() - 1)]);
        let t = if l1 > l0 {
            ((target - l0) / (l1 - l0)).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        let a = &pts[seg];
        let b = &pts[(seg + 1).min(pts.len() - 1)];
        out.push(a.iter().zip(b).map(|(&x, &y)| x + t * (y - x)).collect());
    }
    out
}

/// Distance between two traces as unparameterized curves: both are measured
/// with the arc length of `first_metric`, cut to the common length, resampled
/// at `stations` points and compared by symmetric Hausdorff distance.
pub fn unparameterized_distance<T: Real>(
    first_metric: &MetricField,
    a: &GeodesicTrace<T>,
    b: &GeodesicTrace<T>,
    stations: usize,
) -> Result<T> {
    let (pa, pb) = (a.unwrapped_points(), b.unwrapped_points());
    let (la, lb) = (arc_lengths(first_metric, &pa)?, arc_lengths(first_metric, &pb)?);
    let length = la.last().copied().unwrap_or(T::zero()).min(lb.last().copied().unwrap_or(T::zero()));
    let ra = resample(&pa, &la, length, stations);
    let rb = resample(&pb, &lb, length, stations);
    polyline_distance(first_metric.chart(), &ra, &rb)
}

/// Largest distance of the trace's unwrapped points from the straight line
/// through its first point along `direction`.
pub fn collinearity_residual<T: Real>(trace: &GeodesicTrace<T>, direction: &[T]) -> T {
    let norm = direction.iter().fold(T::zero(), |s, &d| s + d * d).sqrt();
    let u: Vec<T> = direction.iter().map(|&d| d / norm).collect();
    let origin = trace.unwrapped(0);
    let mut worst = T::zero();
    for i in 0..trace.len() {
        let q = trace.unwrapped(i);
        let w: Vec<T> = q.iter().zip(&origin).map(|(&a, &b)| a - b).collect();
        let along = w.iter().zip(&u).fold(T::zero(), |s, (&a, &b)| s + a * b);
        let perp = w
            .iter()
            .zip(&u)
            .fold(T::zero(), |s, (&a, &b)| s + (a - along * b) * (a - along * b))
            .sqrt();
        worst = worst.max(perp);
    }
    worst
}

/// Initial data for one geodesic comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub start: Vec<f64>,
    /// Euclidean unit vector in chart coordinates.
    pub direction: Vec<f64>,
}

/// Seeded shots: sample points of the chart paired with random directions.
pub fn seeded_shots(chart: &Chart, cfg: &SampleConfig, count: usize) -> Vec<Shot> {
    let starts = sample_points(chart, &cfg.with_count(count));
    let mut r = rng(cfg.seed, 1);
    starts
        .into_iter()
        .map(|p| {
            let direction = loop {
                let v: Vec<f64> = (0..chart.dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.1 && norm <= 1.0 {
                    break v.iter().map(|x| x / norm).collect();
                }
            };
            Shot {
                start: p.coords.clone(),
                direction,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotComparison {
    pub shot: Shot,
    /// Unparameterized distance between the two geodesics.
    pub distance: f64,
    pub first_termination: Termination,
    pub second_termination: Termination,
}

/// Unit-speed `g`- and `ḡ`-geodesics from one shot.
pub fn shot_traces(
    g: &MetricField,
    gbar: &MetricField,
    shot: &Shot,
    cfg: &IntegratorConfig,
) -> Result<(GeodesicTrace<f64>, GeodesicTrace<f64>)> {
    let cfg = IntegratorConfig {
        mode: Parameterization::ArcLength,
        ..*cfg
    };
    let p = g.chart().canonicalize(&shot.start)?;
    Ok((
        integrate_geodesic(g, &p, &shot.direction, &cfg)?,
        integrate_geodesic(gbar, &p, &shot.direction, &cfg)?,
    ))
}

/// Integrates the `g`- and `ḡ`-geodesics with the same initial point and
/// direction (each at unit speed) and compares them as unparameterized
/// curves with `stations` arc-length stations.
pub fn cross_validate(
    g: &MetricField,
    gbar: &MetricField,
    shots: &[Shot],
    cfg: &IntegratorConfig,
    stations: usize,
) -> Result<Vec<ShotComparison>> {
    shots
        .par_iter()
        .map(|shot| {
            let (a, b) = shot_traces(g, gbar, shot, cfg)?;
            Ok(ShotComparison {
                shot: shot.clone(),
                distance: unparameterized_distance(g, &a, &b, stations)?,
                first_termination: a.termination,
                second_termination: b.termination,
            })
        })
        .collect()
}
