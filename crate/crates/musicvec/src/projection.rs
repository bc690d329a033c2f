//! Exact t-SNE projection of word vectors to 2D.
//!
//! The O(N²) reference algorithm: per-point Gaussian bandwidths calibrated
//! by bisection to a target perplexity, symmetrized affinities, Student-t
//! low-dimensional similarities, and gradient descent on KL(P‖Q) with
//! momentum and early exaggeration. Intended for tag sub-vocabularies
//! (≲ 5000 points), where exactness beats Barnes-Hut complexity.
//!
//! Parallel row computations write to disjoint slots and every cross-row
//! reduction runs sequentially, so results are bit-identical regardless of
//! thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ProjectionError {
    #[error("t-SNE needs at least 4 points, got {n}")]
    TooFewPoints { n: usize },
    #[error("input vectors contain a non-finite value")]
    NonFiniteInput,
    #[error("degenerate distance row: {0}")]
    DegenerateRow(String),
    #[error("invalid projection configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TsneConfig {
    /// Target perplexity; must satisfy 3·perplexity < N.
    pub perplexity: f64,
    pub iterations: u32,
    /// Affinity multiplier during the early exaggeration phase.
    pub early_exaggeration_factor: f64,
    pub early_exaggeration_iters: u32,
    pub learning_rate: f64,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    /// Iteration at which momentum switches from initial to final.
    pub momentum_switch_iter: u32,
    pub rng_seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            early_exaggeration_factor: 12.0,
            early_exaggeration_iters: 250,
            learning_rate: 200.0,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            momentum_switch_iter: 250,
            rng_seed: 42,
        }
    }
}

impl TsneConfig {
    pub fn validate(&self) -> Result<(), ProjectionError> {
        let fail = |m: String| Err(ProjectionError::InvalidConfig(m));
        if !(self.perplexity >= 2.0 && self.perplexity.is_finite()) {
            return fail(format!("perplexity must be at least 2, got {}", self.perplexity));
        }
        if self.iterations < 1 {
            return fail("iterations must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning rate must be positive".into());
        }
        if !(self.early_exaggeration_factor >= 1.0 && self.early_exaggeration_factor.is_finite()) {
            return fail("early exaggeration factor must be at least 1".into());
        }
        for m in [self.initial_momentum, self.final_momentum] {
            if !(0.0..1.0).contains(&m) {
                return fail(format!("momentum must lie in [0, 1), got {m}"));
            }
        }
        Ok(())
    }
}

/// A finished 2D embedding with the KL divergence before and after
/// optimization (both measured on the unexaggerated affinities).
#[derive(Debug, Clone)]
pub struct Projection {
    pub points: Vec<[f64; 2]>,
    pub initial_kl: f64,
    pub final_kl: f64,
}

/// Fills `out` with the conditional distribution p_{j|i} ∝ exp(−β·d_j) over
/// one row of squared distances and returns its Shannon entropy in nats.
/// Weights are shifted by the minimum distance for numerical stability.
/// The achieved perplexity of the row is `entropy.exp()`.
pub fn conditional_row(distances: &[f64], beta: f64, out: &mut [f64]) -> f64 {
    let d_min = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (o, &d) in out.iter_mut().zip(distances) {
        let w = (-beta * (d - d_min)).exp();
        *o = w;
        sum += w;
    }
    let mut expected_shifted = 0.0;
    for (o, &d) in out.iter_mut().zip(distances) {
        *o /= sum;
        expected_shifted += *o * (d - d_min);
    }
    beta * expected_shifted + sum.ln()
}

/// Bisects the Gaussian precision for one point so the conditional
/// distribution over its squared distances hits the target perplexity
/// (e^entropy, with entropy in nats) within 1e-5 relative, or returns the
/// best bandwidth after 64 steps. Returns σ.
pub fn calibrate_sigma(distances_row: &[f64], perplexity: f64) -> Result<f64, ProjectionError> {
    if distances_row.iter().any(|d| !d.is_finite()) {
        return Err(ProjectionError::NonFiniteInput);
    }
    let positive = distances_row.iter().filter(|&&d| d > 0.0).count();
    if positive == 0 {
        return Err(ProjectionError::DegenerateRow(
            "all squared distances are zero".into(),
        ));
    }
    if positive < 2 {
        return Err(ProjectionError::DegenerateRow(format!(
            "need at least 2 positive distances, got {positive}"
        )));
    }
    let mut scratch = vec![0.0; distances_row.len()];
    let mut beta = 1.0_f64;
    let mut beta_min = 0.0_f64;
    let mut beta_max = f64::INFINITY;
    for _ in 0..64 {
        let entropy = conditional_row(distances_row, beta, &mut scratch);
        let achieved = entropy.exp();
        if ((achieved - perplexity) / perplexity).abs() < 1e-5 {
            break;
        }
        if achieved > perplexity {
            // Distribution too flat: sharpen by raising the precision.
            beta_min = beta;
            beta = if beta_max.is_finite() {
                (beta + beta_max) / 2.0
            } else {
                beta * 2.0
            };
        } else {
            beta_max = beta;
            beta = (beta + beta_min) / 2.0;
        }
    }
    Ok((1.0 / (2.0 * beta)).sqrt())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Symmetrized joint affinities P (row-major N×N, zero diagonal):
/// calibrated conditionals averaged with their transpose and normalized by
/// 2N, so the full matrix sums to 1.
fn joint_probabilities(
    vectors: &[Vec<f64>],
    perplexity: f64,
) -> Result<Vec<f64>, ProjectionError> {
    let n = vectors.len();
    let mut conditionals = vec![0.0; n * n];
    conditionals
        .par_chunks_mut(n)
        .enumerate()
        .try_for_each(|(i, row)| -> Result<(), ProjectionError> {
            let mut others = Vec::with_capacity(n - 1);
            for (j, v) in vectors.iter().enumerate() {
                if j != i {
                    others.push(squared_distance(&vectors[i], v));
                }
            }
            let sigma = calibrate_sigma(&others, perplexity).map_err(|e| match e {
                ProjectionError::DegenerateRow(m) => {
                    ProjectionError::DegenerateRow(format!("point {i}: {m}"))
                }
                other => other,
            })?;
            let beta = 1.0 / (2.0 * sigma * sigma);
            let mut probs = vec![0.0; n - 1];
            conditional_row(&others, beta, &mut probs);
            let mut k = 0;
            for j in 0..n {
                if j != i {
                    row[j] = probs[k];
                    k += 1;
                }
            }
            Ok(())
        })?;
    let mut p = vec![0.0; n * n];
    let scale = 1.0 / (2.0 * n as f64);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (conditionals[i * n + j] + conditionals[j * n + i]) * scale;
            p[i * n + j] = v;
            p[j * n + i] = v;
        }
    }
    Ok(p)
}

/// Student-t weight sums per row, written in index order so the caller's
/// sequential total is reproducible.
fn student_t_row_sums(y: &[[f64; 2]]) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut sum = 0.0;
            for j in 0..n {
                if j != i {
                    sum += 1.0 / (1.0 + squared_distance(&y[i], &y[j]));
                }
            }
            sum
        })
        .collect()
}

/// KL(P‖Q) at the current layout, on unexaggerated P.
fn kl_divergence(p: &[f64], y: &[[f64; 2]]) -> f64 {
    let n = y.len();
    let w_total: f64 = student_t_row_sums(y).iter().sum();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n {
                let pij = p[i * n + j];
                if j != i && pij > 0.0 {
                    let q = (1.0 / (1.0 + squared_distance(&y[i], &y[j]))) / w_total;
                    acc += pij * (pij / q).ln();
                }
            }
            acc
        })
        .collect();
    rows.iter().sum()
}

/// Projects N input vectors to 2D with exact t-SNE. Deterministic given the
/// seed at any thread count; the output is centered at the origin.
pub fn tsne_project(
    vectors: &[Vec<f64>],
    config: &TsneConfig,
) -> Result<Projection, ProjectionError> {
    config.validate()?;
    let n = vectors.len();
    if n < 4 {
        return Err(ProjectionError::TooFewPoints { n });
    }
    let dim = vectors[0].len();
    assert!(
        vectors.iter().all(|v| v.len() == dim),
        "all input vectors must share one dimensionality"
    );
    if vectors.iter().flatten().any(|x| !x.is_finite()) {
        return Err(ProjectionError::NonFiniteInput);
    }
    if 3.0 * config.perplexity >= n as f64 {
        return Err(ProjectionError::InvalidConfig(format!(
            "3·perplexity must stay below the point count: 3·{} >= {n}",
            config.perplexity
        )));
    }

    let p = joint_probabilities(vectors, config.perplexity)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let init = Normal::new(0.0, 1e-4).expect("valid normal distribution");
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| [init.sample(&mut rng), init.sample(&mut rng)])
        .collect();
    let mut velocity = vec![[0.0_f64; 2]; n];
    // Per-coordinate adaptive step multipliers ("gains"): grown additively
    // while a coordinate keeps reversing direction, shrunk geometrically
    // while gradient and velocity agree. Without them a fixed learning rate
    // of 200 overshoots badly on small point sets.
    let mut gains = vec![[1.0_f64; 2]; n];

    let initial_kl = kl_divergence(&p, &y);
    for iteration in 0..config.iterations {
        let exaggeration = if iteration < config.early_exaggeration_iters {
            config.early_exaggeration_factor
        } else {
            1.0
        };
        let momentum = if iteration < config.momentum_switch_iter {
            config.initial_momentum
        } else {
            config.final_momentum
        };
        let w_total: f64 = student_t_row_sums(&y).iter().sum();
        let gradients: Vec<[f64; 2]> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut g = [0.0_f64; 2];
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let dx = y[i][0] - y[j][0];
                    let dy = y[i][1] - y[j][1];
                    let w = 1.0 / (1.0 + dx * dx + dy * dy);
                    let q = w / w_total;
                    let coefficient = 4.0 * (exaggeration * p[i * n + j] - q) * w;
                    g[0] += coefficient * dx;
                    g[1] += coefficient * dy;
                }
                g
            })
            .collect();
        let mut mean = [0.0_f64; 2];
        for i in 0..n {
            for c in 0..2 {
                let g = gradients[i][c];
                gains[i][c] = if (g > 0.0) != (velocity[i][c] > 0.0) {
                    gains[i][c] + 0.2
                } else {
                    (gains[i][c] * 0.8).max(0.01)
                };
                velocity[i][c] =
                    momentum * velocity[i][c] - config.learning_rate * gains[i][c] * g;
                y[i][c] += velocity[i][c];
                mean[c] += y[i][c];
            }
        }
        for point in &mut y {
            point[0] -= mean[0] / n as f64;
            point[1] -= mean[1] / n as f64;
        }
    }
    let final_kl = kl_divergence(&p, &y);
    Ok(Projection {
        points: y,
        initial_kl,
        final_kl,
    })
}
