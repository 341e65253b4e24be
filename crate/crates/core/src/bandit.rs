//! Flat multi-objective bandits for checking the selection policy's
//! convergence behaviour empirically.
//!
//! A bandit is the depth-one special case of the tree search: every arm is
//! a child of the root with a fixed oracle vector, rewards are the arm's
//! mean vector plus bounded noise, and the same PUCB + Pareto-front rule
//! picks the next arm.
//!
//! Two checks are provided:
//!
//! * [`check_log_bound`]: selection counts of dominated arms should grow
//!   like `a ln n + b`; we compare that fit against a linear one.
//! * [`check_failure_decay`]: the probability of pulling an arm outside the
//!   Pareto-optimal set, estimated across seeds, should fall polynomially.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{pucb, SelectionPolicy};
use crate::pareto::dominates_unchecked;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BanditError {
    #[error("invalid bandit instance: {0}")]
    Instance(String),
    #[error("horizon {horizon} shorter than {needed}")]
    Horizon { horizon: usize, needed: usize },
    #[error("need at least {needed} seeds, got {got}")]
    Seeds { needed: usize, got: usize },
    #[error("instance has no dominated arm")]
    NoDominatedArm,
}

/// Vanishing shift `amplitude / (1 + n_k)^decay` added to every component
/// of arm `k`'s mean after its `n_k`-th pull.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub amplitude: f64,
    pub decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditInstance {
    pub name: String,
    /// Mean reward vector per arm, components in `[0,1]`.
    pub means: Vec<Vec<f64>>,
    /// Oracle vectors scaling the exploration bonus; the means when absent.
    #[serde(default)]
    pub ora: Option<Vec<Vec<f64>>>,
    /// Half-width of the uniform noise added to each reward component.
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default)]
    pub drift: Option<Drift>,
    #[serde(default = "default_exploration")]
    pub exploration: f64,
}

fn default_noise() -> f64 {
    0.05
}

fn default_exploration() -> f64 {
    1.0
}

impl BanditInstance {
    pub fn new(name: impl Into<String>, means: Vec<Vec<f64>>) -> Result<Self, BanditError> {
        let instance = Self {
            name: name.into(),
            means,
            ora: None,
            noise: default_noise(),
            drift: None,
            exploration: default_exploration(),
        };
        instance.validate()?;
        Ok(instance)
    }

    /// Three arms in two objectives; the third is dominated by both others.
    pub fn dominated_arm() -> Self {
        Self::new(
            "dominated-arm",
            vec![vec![0.9, 0.1], vec![0.1, 0.9], vec![0.05, 0.05]],
        )
        .unwrap()
    }

    /// Three mutually incomparable arms.
    pub fn all_optimal() -> Self {
        Self::new(
            "all-optimal",
            vec![vec![0.9, 0.1], vec![0.1, 0.9], vec![0.5, 0.5]],
        )
        .unwrap()
    }

    /// An optimal arm at `(0.9, 0.9)` and one trailing it by `gap` in both objectives.
    pub fn with_gap(gap: f64) -> Result<Self, BanditError> {
        Self::new(
            format!("gap-{gap}"),
            vec![vec![0.9, 0.9], vec![0.9 - gap, 0.9 - gap]],
        )
    }

    pub fn bundled(name: &str) -> Option<Self> {
        match name {
            "dominated-arm" => Some(Self::dominated_arm()),
            "all-optimal" => Some(Self::all_optimal()),
            _ => None,
        }
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<(), BanditError> {
        let bad = |m: &str| Err(BanditError::Instance(m.to_string()));
        if self.arms() < 2 {
            return bad("need at least two arms");
        }
        let dim = self.dim();
        if dim == 0 || self.means.iter().any(|m| m.len() != dim) {
            return bad("mean vectors must share a non-zero dimension");
        }
        if self
            .means
            .iter()
            .flatten()
            .any(|v| !(0.0..=1.0).contains(v))
        {
            return bad("means must lie in [0,1]");
        }
        if let Some(ora) = &self.ora {
            if ora.len() != self.arms() || ora.iter().any(|o| o.len() != dim) {
                return bad("ora must have one vector per arm of the means' dimension");
            }
            if ora.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
                return bad("ora values must lie in [0,1]");
            }
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return bad("noise must be finite and non-negative");
        }
        if let Some(d) = self.drift {
            if !(d.decay > 0.0) || !d.amplitude.is_finite() {
                return bad("drift needs a finite amplitude and positive decay");
            }
        }
        if !(self.exploration > 0.0) {
            return bad("exploration constant must be positive");
        }
        Ok(())
    }

    pub fn ora(&self, arm: usize) -> &[f64] {
        self.ora.as_ref().map_or(&self.means[arm], |o| &o[arm])
    }

    /// Arms whose mean is not dominated by another arm's mean.
    pub fn pareto_optimal(&self) -> Vec<bool> {
        (0..self.arms())
            .map(|k| {
                !self
                    .means
                    .iter()
                    .any(|m| dominates_unchecked(m, &self.means[k]))
            })
            .collect()
    }

    /// Smallest per-objective gap between a dominated arm and the closest
    /// optimal arm that dominates it.
    pub fn min_gap(&self, arm: usize) -> Option<f64> {
        let optimal = self.pareto_optimal();
        (0..self.arms())
            .filter(|&j| optimal[j] && dominates_unchecked(&self.means[j], &self.means[arm]))
            .map(|j| {
                self.means[j]
                    .iter()
                    .zip(&self.means[arm])
                    .map(|(a, b)| a - b)
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(None, |acc: Option<f64>, g| {
                Some(acc.map_or(g, |a| a.max(g)))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    /// Pull every arm once, in order, before the policy takes over.
    #[default]
    Sweep,
    /// No initial sweep; unvisited arms rely on the zero-mean PUCB guard,
    /// exactly as children in the tree search do.
    Guard,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BanditOptions {
    pub init: InitMode,
    /// Keep a per-step bitmask of the arms on the PUCB front (K <= 64).
    pub record_fronts: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub seed: u64,
    /// Arm pulled at each step, step 1 first.
    pub selections: Vec<u16>,
    /// Per-arm pull totals after the final step.
    pub counts: Vec<u64>,
    /// Pareto-optimal arm set of the instance.
    pub optimal: Vec<bool>,
    /// Front membership bitmask per step, when requested.
    pub fronts: Option<Vec<u64>>,
}

impl RegretTrace {
    pub fn horizon(&self) -> usize {
        self.selections.len()
    }

    /// `T_k(n)`: pulls of `arm` during the first `n` steps.
    pub fn count_at(&self, arm: usize, n: usize) -> u64 {
        self.selections[..n]
            .iter()
            .filter(|&&s| s as usize == arm)
            .count() as u64
    }

    /// Counts of `arm` after each step in `points` (ascending).
    pub fn counts_at(&self, arm: usize, points: &[usize]) -> Vec<u64> {
        let mut out = Vec::with_capacity(points.len());
        let mut count = 0u64;
        let mut step = 0usize;
        for &p in points {
            while step < p {
                if self.selections[step] as usize == arm {
                    count += 1;
                }
                step += 1;
            }
            out.push(count);
        }
        out
    }

    /// Whether step `t` (1-based) pulled a non-optimal arm.
    pub fn failed(&self, t: usize) -> bool {
        !self.optimal[self.selections[t - 1] as usize]
    }
}

pub fn run_bandit(
    instance: &BanditInstance,
    policy: &SelectionPolicy,
    horizon: usize,
    seed: u64,
    options: &BanditOptions,
) -> Result<RegretTrace, BanditError> {
    instance.validate()?;
    let k = instance.arms();
    if horizon < k {
        return Err(BanditError::Horizon { horizon, needed: k });
    }
    if options.record_fronts && k > 64 {
        return Err(BanditError::Instance(
            "front recording supports at most 64 arms".into(),
        ));
    }
    if let SelectionPolicy::Scalarized(w) = policy {
        if w.len() != instance.dim() {
            return Err(BanditError::Instance(
                "weight count differs from dimension".into(),
            ));
        }
    }
    let dim = instance.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; k];
    let mut rewards = vec![vec![0.0; dim]; k];
    let mut selections = Vec::with_capacity(horizon);
    let mut fronts = options.record_fronts.then(|| Vec::with_capacity(horizon));
    let mut scores = vec![Vec::new(); k];

    for t in 0..horizon {
        let parent_visits = t as u64;
        for (arm, score) in scores.iter_mut().enumerate() {
            *score = pucb(
                &rewards[arm],
                counts[arm],
                instance.ora(arm),
                parent_visits,
                instance.exploration,
                dim,
            );
        }
        if let Some(f) = fronts.as_mut() {
            let first = crate::pareto::pareto_partition(&scores).expect("uniform dimension");
            f.push(first[0].iter().fold(0u64, |m, &i| m | 1 << i));
        }
        let arm = if options.init == InitMode::Sweep && t < k {
            t
        } else {
            policy.choose(&scores, &mut rng)
        };

        let drift = instance.drift.map_or(0.0, |d| {
            d.amplitude / (1.0 + counts[arm] as f64).powf(d.decay)
        });
        for (w, &mu) in rewards[arm].iter_mut().zip(&instance.means[arm]) {
            let noise = if instance.noise > 0.0 {
                rng.gen_range(-instance.noise..=instance.noise)
            } else {
                0.0
            };
            *w += (mu + drift + noise).clamp(0.0, 1.0);
        }
        counts[arm] += 1;
        selections.push(arm as u16);
    }

    Ok(RegretTrace {
        seed,
        selections,
        counts,
        optimal: instance.pareto_optimal(),
        fronts,
    })
}

/// Independent traces for `seeds`, computed in parallel.
pub fn run_bandit_seeds(
    instance: &BanditInstance,
    policy: &SelectionPolicy,
    horizon: usize,
    seeds: std::ops::Range<u64>,
    options: &BanditOptions,
) -> Result<Vec<RegretTrace>, BanditError> {
    seeds
        .into_par_iter()
        .map(|s| run_bandit(instance, policy, horizon, s, options))
        .collect()
}

/// Least-squares line `y = slope * x + intercept` with its R².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need two points for a line");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    LineFit {
        slope,
        intercept,
        r2,
    }
}

/// `count` integers spread log-uniformly over `[lo, hi]`, deduplicated.
pub fn log_points(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut pts: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .map(|p| p.clamp(lo, hi))
        .collect();
    pts.dedup();
    pts
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmFit {
    pub arm: usize,
    pub dominated: bool,
    /// `T_k(n) ~ a ln n + b`.
    pub log_fit: LineFit,
    /// `T_k(n) ~ a n + b`.
    pub linear_fit: LineFit,
    /// `sup_n T_k(n) / ln n` over the fit window.
    pub max_ratio: f64,
    /// The logarithmic model explains the counts at least as well as the linear one.
    pub log_preferred: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogBoundReport {
    pub window: (usize, usize),
    pub seeds: usize,
    pub arms: Vec<ArmFit>,
    pub passed: bool,
}

/// Default fit window for [`check_log_bound`].
pub const LOG_FIT_WINDOW: (usize, usize) = (1_000, 100_000);

/// Fits the cross-seed mean counts of every arm over `window`, clipped to
/// the horizon. Passes when every dominated arm is fit at least as well by
/// `a ln n + b` as by a line in `n`.
pub fn check_log_bound(
    traces: &[RegretTrace],
    instance: &BanditInstance,
    window: (usize, usize),
) -> Result<LogBoundReport, BanditError> {
    let horizon = traces.iter().map(RegretTrace::horizon).min().unwrap_or(0);
    let (lo, hi) = (window.0.max(1), window.1.min(horizon));
    if horizon < 10 * window.0.max(1) {
        return Err(BanditError::Horizon {
            horizon,
            needed: 10 * window.0.max(1),
        });
    }
    let optimal = instance.pareto_optimal();
    if optimal.iter().all(|&o| o) {
        return Err(BanditError::NoDominatedArm);
    }
    let points = log_points(lo, hi, 40);
    let ln_n: Vec<f64> = points.iter().map(|&p| (p as f64).ln()).collect();
    let n: Vec<f64> = points.iter().map(|&p| p as f64).collect();

    let arms: Vec<ArmFit> = (0..instance.arms())
        .map(|arm| {
            let mut mean = vec![0.0; points.len()];
            for t in traces {
                for (m, c) in mean.iter_mut().zip(t.counts_at(arm, &points)) {
                    *m += c as f64;
                }
            }
            for m in &mut mean {
                *m /= traces.len() as f64;
            }
            let log_fit = fit_line(&ln_n, &mean);
            let linear_fit = fit_line(&n, &mean);
            let max_ratio = mean
                .iter()
                .zip(&ln_n)
                .map(|(c, l)| c / l)
                .fold(0.0, f64::max);
            ArmFit {
                arm,
                dominated: !optimal[arm],
                log_fit,
                linear_fit,
                max_ratio,
                log_preferred: log_fit.r2 >= linear_fit.r2,
            }
        })
        .collect();
    let passed = arms.iter().filter(|a| a.dominated).all(|a| a.log_preferred);
    Ok(LogBoundReport {
        window: (lo, hi),
        seeds: traces.len(),
        arms,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayPoint {
    pub t: usize,
    /// Mean failure indicator over seeds and steps `(t/10, t]`.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub seeds: usize,
    /// Failure rate over the initial `K` steps.
    pub initial: f64,
    pub points: Vec<DecayPoint>,
    /// Slope of `ln P` against `ln t` over the non-zero points.
    pub slope: Option<f64>,
    pub strictly_decreasing: bool,
    pub passed: bool,
}

/// Minimum number of seeds for [`check_failure_decay`].
pub const MIN_DECAY_SEEDS: usize = 100;

/// Estimates the failure probability at every decade `t = 10^j` from 100
/// up to the horizon, averaging the failure indicator over seeds and over
/// the steps of the decade ending at `t`.
pub fn check_failure_decay(
    traces: &[RegretTrace],
    instance: &BanditInstance,
) -> Result<DecayReport, BanditError> {
    if traces.len() < MIN_DECAY_SEEDS {
        return Err(BanditError::Seeds {
            needed: MIN_DECAY_SEEDS,
            got: traces.len(),
        });
    }
    let horizon = traces.iter().map(RegretTrace::horizon).min().unwrap_or(0);
    if horizon < 1_000 {
        return Err(BanditError::Horizon {
            horizon,
            needed: 1_000,
        });
    }
    let k = instance.arms();
    let rate = |from: usize, to: usize| {
        // steps from+1 ..= to, 1-based
        let fails: usize = traces
            .iter()
            .map(|tr| (from + 1..=to).filter(|&s| tr.failed(s)).count())
            .sum();
        fails as f64 / (traces.len() * (to - from)) as f64
    };
    let initial = rate(0, k);
    let mut points = Vec::new();
    let mut t = 100;
    while t <= horizon {
        points.push(DecayPoint {
            t,
            probability: rate(t / 10, t),
        });
        t *= 10;
    }

    let positive: Vec<&DecayPoint> = points.iter().filter(|p| p.probability > 0.0).collect();
    let slope = (positive.len() >= 2).then(|| {
        let x: Vec<f64> = positive.iter().map(|p| (p.t as f64).ln()).collect();
        let y: Vec<f64> = positive.iter().map(|p| p.probability.ln()).collect();
        fit_line(&x, &y).slope
    });
    let strictly_decreasing = points
        .windows(2)
        .all(|w| w[1].probability < w[0].probability);
    let last = points.last().map_or(0.0, |p| p.probability);
    let passed = if initial == 0.0 && points.iter().all(|p| p.probability == 0.0) {
        true
    } else {
        slope.is_some_and(|s| s < 0.0) && last < initial
    };
    Ok(DecayReport {
        seeds: traces.len(),
        initial,
        points,
        slope,
        strictly_decreasing,
        passed,
    })
}
