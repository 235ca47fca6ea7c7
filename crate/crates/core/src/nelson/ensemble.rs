//! Ensembles of configurations evolved by the forward diffusion
//! `dX = b(X) dt + sqrt(2 nu) dW` with Euler–Maruyama steps.
//!
//! Randomness is split deterministically from one master seed: each
//! (stream, chunk of points) pair gets its own ChaCha8 position, so results
//! do not depend on the number of worker threads. Stream 0 is initial
//! sampling; step `k` (0-based) uses stream `k + 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::field::{positive, Config, VelocityField};
use super::gaussian::GaussianTwoParticleState;
use crate::error::NelsonError;

const CHUNK: usize = 4096;
/// Word offset between consecutive chunks inside one stream.
const CHUNK_WORDS: u128 = 1 << 36;

fn chunk_rng(seed: u64, stream: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(chunk as u128 * CHUNK_WORDS);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub points: Vec<Config>,
    pub time: f64,
    pub seed: u64,
    /// Euler–Maruyama steps taken so far.
    pub steps: u64,
}

/// Summary statistics of one ensemble snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentRow {
    pub t: f64,
    pub mean_x1: f64,
    pub mean_x2: f64,
    pub var_u: f64,
    pub var_s: f64,
    pub cov_x1x2: f64,
}

impl Ensemble {
    pub fn new(points: Vec<Config>, seed: u64) -> Result<Self, NelsonError> {
        if points.is_empty() {
            return Err(NelsonError::EmptyEnsemble);
        }
        Ok(Ensemble {
            points,
            time: 0.0,
            seed,
            steps: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn x1(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[0]).collect()
    }

    pub fn x2(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[1]).collect()
    }

    /// Relative coordinates `x1 - x2`.
    pub fn relative(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[0] - p[1]).collect()
    }

    /// Center-of-mass coordinates `x1 + x2`.
    pub fn center(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[0] + p[1]).collect()
    }

    /// Means and unbiased (co)variances; variances are 0 for a single point.
    pub fn moment_row(&self) -> MomentRow {
        let n = self.points.len() as f64;
        let (m1, m2) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
        let (m1, m2) = (m1 / n, m2 / n);
        let (mut vu, mut vs, mut c) = (0.0, 0.0, 0.0);
        let (mu, ms) = (m1 - m2, m1 + m2);
        for p in &self.points {
            let du = p[0] - p[1] - mu;
            let ds = p[0] + p[1] - ms;
            vu += du * du;
            vs += ds * ds;
            c += (p[0] - m1) * (p[1] - m2);
        }
        let denom = if self.points.len() > 1 { n - 1.0 } else { 1.0 };
        MomentRow {
            t: self.time,
            mean_x1: m1,
            mean_x2: m2,
            var_u: vu / denom,
            var_s: vs / denom,
            cov_x1x2: c / denom,
        }
    }
}

/// Exact draws from the joint density: `u ~ N(0, sigma^2)`,
/// `s ~ N(0, Sigma^2)`, `x1 = (s + u) / 2`, `x2 = (s - u) / 2`.
pub fn sample_initial(state: &GaussianTwoParticleState, n: usize, seed: u64) -> Result<Ensemble, NelsonError> {
    if n == 0 {
        return Err(NelsonError::EmptyEnsemble);
    }
    let (sigma, big_sigma) = (state.sigma(), state.big_sigma());
    let mut points = vec![[0.0; 2]; n];
    points.par_chunks_mut(CHUNK).enumerate().for_each(|(chunk, pts)| {
        let mut rng = chunk_rng(seed, 0, chunk);
        for p in pts {
            let u: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
            let s: f64 = big_sigma * rng.sample::<f64, _>(StandardNormal);
            *p = [(s + u) / 2.0, (s - u) / 2.0];
        }
    });
    Ensemble::new(points, seed)
}

/// Noise term of an Euler–Maruyama step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Noise {
    /// Drift only.
    Off,
    /// Independent Wiener increments derived from this master seed.
    Wiener(u64),
}

/// One step: `q <- q + b(q) dt + sqrt(2 nu dt) xi`, `xi` standard normal pair.
pub fn em_step<F>(ens: &Ensemble, field: &F, dt: f64, noise: Noise) -> Result<Ensemble, NelsonError>
where
    F: VelocityField + Sync + ?Sized,
{
    positive("dt", dt)?;
    let nu = field.nu();
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(NelsonError::InvalidParameter { name: "nu", value: nu });
    }
    let amp = (2.0 * nu * dt).sqrt();
    let stream = ens.steps + 1;
    let mut points = ens.points.clone();
    let results: Vec<Result<(), NelsonError>> = points
        .par_chunks_mut(CHUNK)
        .enumerate()
        .map(|(chunk, pts)| {
            let mut rng = match noise {
                Noise::Wiener(seed) => Some(chunk_rng(seed, stream, chunk)),
                Noise::Off => None,
            };
            for p in pts {
                let b = field.forward_drift(*p);
                if !(b[0].is_finite() && b[1].is_finite()) {
                    return Err(NelsonError::NonFiniteDrift {
                        x1: p[0],
                        x2: p[1],
                        drift: b,
                    });
                }
                let (xi1, xi2): (f64, f64) = match rng.as_mut() {
                    Some(r) => (r.sample(StandardNormal), r.sample(StandardNormal)),
                    None => (0.0, 0.0),
                };
                p[0] += b[0] * dt + amp * xi1;
                p[1] += b[1] * dt + amp * xi2;
            }
            Ok(())
        })
        .collect();
    results.into_iter().collect::<Result<(), _>>()?;
    Ok(Ensemble {
        points,
        time: ens.time + dt,
        seed: ens.seed,
        steps: ens.steps + 1,
    })
}

/// Sub-ensemble with `|x1 - y| <= delta`. `delta = inf` keeps every point.
pub fn condition_ensemble(ens: &Ensemble, y: f64, delta: f64) -> Result<Ensemble, NelsonError> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(NelsonError::InvalidParameter { name: "delta", value: delta });
    }
    let points: Vec<Config> = ens
        .points
        .iter()
        .copied()
        .filter(|p| (p[0] - y).abs() <= delta)
        .collect();
    if points.is_empty() {
        return Err(NelsonError::EmptySubEnsemble { y, delta, n: ens.len() });
    }
    Ok(Ensemble {
        points,
        time: ens.time,
        seed: ens.seed,
        steps: ens.steps,
    })
}

/// `x2` values of the sub-ensembles conditioned on a grid of windows
/// `|x1 - y_k| <= delta`, `y_k = 2 delta k`, that tile the `x1` range.
/// Each window contributes in proportion to its probability, so the pooled
/// sample is the mixture of conditionals over `y`.
pub fn pool_conditioned_x2(ens: &Ensemble, delta: f64) -> Result<Vec<f64>, NelsonError> {
    positive("delta", delta)?;
    // Window k is the half-open interval [y_k - delta, y_k + delta).
    let mut keyed: Vec<(i64, f64)> = ens
        .points
        .iter()
        .map(|p| (((p[0] + delta) / (2.0 * delta)).floor() as i64, p[1]))
        .collect();
    keyed.sort_by_key(|&(k, _)| k);
    Ok(keyed.into_iter().map(|(_, x2)| x2).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimulationParams {
    pub n: usize,
    pub dt: f64,
    pub steps: u64,
    pub seed: u64,
    /// Record a moment row every this many steps (and at step 0).
    pub record_every: u64,
}

/// Samples the stationary density, then integrates `steps` forward steps
/// with `b = u`. Calls `on_record` on every recorded snapshot.
pub fn simulate(
    state: &GaussianTwoParticleState,
    params: &SimulationParams,
    mut on_record: impl FnMut(&Ensemble),
) -> Result<(Ensemble, Vec<MomentRow>), NelsonError> {
    positive("dt", params.dt)?;
    let every = params.record_every.max(1);
    let field = state.velocity_field();
    let mut ens = sample_initial(state, params.n, params.seed)?;
    let mut rows = vec![ens.moment_row()];
    on_record(&ens);
    for k in 1..=params.steps {
        ens = em_step(&ens, &field, params.dt, Noise::Wiener(params.seed))?;
        // k dt rather than a running sum, so recorded times are exact multiples.
        ens.time = k as f64 * params.dt;
        if k % every == 0 || k == params.steps {
            rows.push(ens.moment_row());
            on_record(&ens);
        }
    }
    Ok((ens, rows))
}
