//! Reproducible low-discrepancy sample points.
//!
//! Points follow the additive recurrence `u_i = frac(offset + i·α)` with
//! `α_j = φ_d^{-(j+1)}`, `φ_d` the positive root of `x^{d+1} = x + 1`.
//! The offset is drawn from a ChaCha stream seeded by the config seed, so a
//! given `(chart, seed, count, margin)` always yields identical points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::charts::{Chart, CoordKind, Point};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub count: usize,
    /// Distance kept from open-chart boundaries.
    pub margin: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: 1,
            count: 200,
            margin: 0.05,
        }
    }
}

impl SampleConfig {
    pub fn with_count(self, count: usize) -> Self {
        SampleConfig { count, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SampleConfig { seed, ..self }
    }
}

fn generalized_golden_ratio(d: usize) -> f64 {
    let mut x = 2.0_f64;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / (d as f64 + 1.0));
    }
    x
}

/// Unit-cube points of the recurrence.
pub fn unit_cube(dim: usize, seed: u64, count: usize) -> Vec<Vec<f64>> {
    let phi = generalized_golden_ratio(dim);
    let alpha: Vec<f64> = (0..dim).map(|j| phi.powi(-(j as i32 + 1))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    (0..count)
        .map(|i| {
            (0..dim)
                .map(|j| (offset[j] + (i as f64 + 1.0) * alpha[j]).fract())
                .collect()
        })
        .collect()
}

/// Sample points of `chart`; open coordinates are mapped into
/// `[lo + margin, hi - margin]`.
pub fn sample_points(chart: &Chart, cfg: &SampleConfig) -> Vec<Point<f64>> {
    unit_cube(chart.dim(), cfg.seed, cfg.count)
        .into_iter()
        .map(|u| {
            let coords = u
                .iter()
                .zip(chart.coords())
                .map(|(&t, c)| match c.kind {
                    CoordKind::Periodic => t,
                    CoordKind::Open { lo, hi } => {
                        let (a, b) = (lo + cfg.margin, hi - cfg.margin);
                        a + t * (b - a)
                    }
                })
                .collect();
            Point::new(coords)
        })
        .collect()
}

/// A seeded generator for auxiliary randomness (initial velocities etc.).
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}
