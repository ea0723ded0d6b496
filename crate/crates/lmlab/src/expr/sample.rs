//! Deterministic sampling of the chart box and sampling-based zero tests.
//!
//! The point with a given index depends only on `(seed, index)`, so
//! parallel evaluation of samples cannot change any verdict, and two runs
//! with the same seed produce bitwise-equal results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

use super::{Chart, ScalarExpr};

/// Project-wide default relative tolerance for zero tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Deterministic point source over a chart box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampler {
    pub seed: u64,
    pub count: usize,
    pub guard_tol: f64,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler {
            seed: 42,
            count: 64,
            guard_tol: 1e-6,
        }
    }
}

impl Sampler {
    pub fn new(seed: u64, count: usize, guard_tol: f64) -> Sampler {
        assert!(count > 0, "sampler count must be positive");
        assert!(guard_tol > 0.0, "guard tolerance must be positive");
        Sampler {
            seed,
            count,
            guard_tol,
        }
    }

    /// The `index`-th sample point, uniform in the chart box. Each point
    /// comes from its own cipher stream keyed by `(seed, index)`.
    pub fn point(&self, chart: &Chart, index: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        chart
            .domain()
            .iter()
            .map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
            .collect()
    }

    /// All sample points in index order.
    pub fn points(&self, chart: &Chart) -> Vec<Vec<f64>> {
        (0..self.count).map(|i| self.point(chart, i)).collect()
    }

    /// A sampler with a seed derived from this one and a salt; used to give
    /// every check in a document its own reproducible stream.
    pub fn derive(&self, salt: u64) -> Sampler {
        Sampler {
            seed: splitmix(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..*self
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Outcome of a sampled check.
///
/// `max_abs_residual` is the largest scale-normalized residual
/// `|e(p)| / (1 + scale(p))` over the used samples, where `scale(p)` is the
/// largest magnitude among the top-level additive terms of the expression
/// at `p`. `passed` holds exactly when `max_abs_residual <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckVerdict {
    pub passed: bool,
    pub max_abs_residual: f64,
    pub mean_abs_residual: f64,
    pub witness: Vec<f64>,
    pub samples_used: usize,
    pub samples_skipped: usize,
    pub tolerance: f64,
    /// Set when the checked multiplier is identically zero at the samples:
    /// the identity holds but carries no information.
    pub trivial: bool,
}

impl CheckVerdict {
    pub(crate) fn with_trivial(mut self, trivial: bool) -> CheckVerdict {
        self.trivial = trivial;
        self
    }
}

/// Tests whether `e` vanishes on the domain box; see [`zero_on_domain_multi`].
pub fn zero_on_domain(e: &ScalarExpr, sampler: &Sampler, tol: f64) -> Result<CheckVerdict> {
    zero_on_domain_multi(std::slice::from_ref(e), &[], sampler, tol)
}

/// Tests whether every expression in `exprs` vanishes on the domain box.
///
/// Points are skipped when any expression hits a singularity, when any
/// denominator magnitude falls below the sampler guard, or when any guard
/// expression in `guards` has magnitude below the guard tolerance. All
/// expressions are evaluated at the same points, so the used-sample set is
/// shared. Fails if more than half of the samples are skipped.
pub fn zero_on_domain_multi(
    exprs: &[ScalarExpr],
    guards: &[ScalarExpr],
    sampler: &Sampler,
    tol: f64,
) -> Result<CheckVerdict> {
    assert!(tol > 0.0, "zero-test tolerance must be positive");
    let chart = exprs
        .first()
        .map(|e| e.chart().clone())
        .or_else(|| guards.first().map(|g| g.chart().clone()))
        .expect("zero_on_domain_multi needs at least one expression or guard");
    for e in exprs.iter().chain(guards.iter()) {
        if *e.chart() != chart {
            return Err(Error::ChartMismatch);
        }
    }

    let term_lists: Vec<Vec<ScalarExpr>> = exprs.iter().map(|e| e.additive_terms()).collect();

    let mut used = 0usize;
    let mut skipped = 0usize;
    let mut max_residual = 0.0f64;
    let mut sum_residual = 0.0f64;
    let mut witness: Option<Vec<f64>> = None;

    'points: for i in 0..sampler.count {
        let p = sampler.point(&chart, i);

        for g in guards {
            match g.evaluate_guarded(&p) {
                Ok((v, min_den)) => {
                    if v.abs() < sampler.guard_tol || min_den < sampler.guard_tol {
                        skipped += 1;
                        continue 'points;
                    }
                }
                Err(_) => {
                    skipped += 1;
                    continue 'points;
                }
            }
        }

        let mut point_residual = 0.0f64;
        for (e, terms) in exprs.iter().zip(&term_lists) {
            let (value, min_den) = match e.evaluate_guarded(&p) {
                Ok(v) => v,
                Err(_) => {
                    skipped += 1;
                    continue 'points;
                }
            };
            if min_den < sampler.guard_tol {
                skipped += 1;
                continue 'points;
            }
            let mut scale = 0.0f64;
            for t in terms {
                match t.evaluate_guarded(&p) {
                    Ok((tv, _)) => scale = scale.max(tv.abs()),
                    Err(_) => {
                        skipped += 1;
                        continue 'points;
                    }
                }
            }
            point_residual = point_residual.max(value.abs() / (1.0 + scale));
        }

        used += 1;
        sum_residual += point_residual;
        // first sample attaining the maximum wins
        if witness.is_none() || point_residual > max_residual {
            max_residual = point_residual;
            witness = Some(p);
        }
    }

    if skipped * 2 > sampler.count {
        return Err(Error::TooManySkipped {
            skipped,
            count: sampler.count,
        });
    }

    Ok(CheckVerdict {
        passed: max_residual <= tol,
        max_abs_residual: max_residual,
        mean_abs_residual: if used > 0 {
            sum_residual / used as f64
        } else {
            0.0
        },
        witness: witness.unwrap_or_default(),
        samples_used: used,
        samples_skipped: skipped,
        tolerance: tol,
        trivial: false,
    })
}
