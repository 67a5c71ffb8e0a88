//! Monte Carlo estimation of chaos probability over random initial
//! conditions.
//!
//! Every trial draws its initial state from its own ChaCha stream, keyed by
//! `(master_seed, trial_index)`, so tallies do not depend on how trials are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{classify_trajectory, ClassificationPolicy, PhaseState, TrajectoryLabel};
use crate::error::{Error, Result};
use crate::melnikov;
use crate::params::{DimensionlessParams, LatticeConfig};

/// Two-sided 95% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Box of initial conditions `R in r, R' in rp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialBox {
    pub r: (f64, f64),
    pub rp: (f64, f64),
}

impl Default for InitialBox {
    fn default() -> Self {
        InitialBox {
            r: (-2.1, 2.1),
            rp: (-2.2, 2.2),
        }
    }
}

impl InitialBox {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("r_range", self.r), ("rp_range", self.rp)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(
                    name,
                    format!("[{lo}, {hi}] is not a proper interval"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MonteCarloOptions {
    pub initial_box: InitialBox,
    /// Drop unbounded trials from the denominator of `p_hat`.
    pub exclude_unbounded: bool,
}

/// Uniform initial state for one trial, drawn from the ChaCha stream
/// `trial_index` under `master_seed`.
pub fn sample_initial(trial_index: u64, master_seed: u64, ic: &InitialBox) -> PhaseState {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    let r = rng.gen_range(ic.r.0..=ic.r.1);
    let rp = rng.gen_range(ic.rp.0..=ic.rp.1);
    PhaseState::new(r, rp)
}

/// 95% Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (
        (center - half).max(0.0).min(p),
        (center + half).min(1.0).max(p),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub initial: PhaseState,
    pub label: TrajectoryLabel,
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosProbabilityEstimate {
    pub n_trials: usize,
    pub n_chaotic: usize,
    pub n_regular: usize,
    pub n_unbounded: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
    pub policy: ClassificationPolicy,
    pub options: MonteCarloOptions,
}

impl ChaosProbabilityEstimate {
    fn from_records(
        records: &[TrialRecord],
        master_seed: u64,
        policy: &ClassificationPolicy,
        options: &MonteCarloOptions,
    ) -> Self {
        let count = |label| records.iter().filter(|r| r.label == label).count();
        let n_chaotic = count(TrajectoryLabel::Chaotic);
        let n_regular = count(TrajectoryLabel::Regular);
        let n_unbounded = count(TrajectoryLabel::Unbounded);
        let denominator = if options.exclude_unbounded {
            records.len() - n_unbounded
        } else {
            records.len()
        };
        let p_hat = if denominator == 0 {
            0.0
        } else {
            n_chaotic as f64 / denominator as f64
        };
        let (ci_low, ci_high) = wilson_interval(n_chaotic, denominator);
        ChaosProbabilityEstimate {
            n_trials: records.len(),
            n_chaotic,
            n_regular,
            n_unbounded,
            p_hat,
            ci_low,
            ci_high,
            master_seed,
            policy: *policy,
            options: *options,
        }
    }
}

/// Classifies `n_trials` random trajectories; returns the tally and the
/// per-trial records in trial order.
pub fn estimate_probability_with_trials(
    d: &DimensionlessParams,
    l: &LatticeConfig,
    n_trials: usize,
    master_seed: u64,
    policy: &ClassificationPolicy,
    options: &MonteCarloOptions,
) -> Result<(ChaosProbabilityEstimate, Vec<TrialRecord>)> {
    if n_trials == 0 {
        return Err(Error::invalid("n_trials", "must be at least 1"));
    }
    policy.validate()?;
    options.initial_box.validate()?;
    l.validate()?;
    let records = (0..n_trials as u64)
        .into_par_iter()
        .map(|index| {
            let initial = sample_initial(index, master_seed, &options.initial_box);
            let class = classify_trajectory(initial, d, l, policy)?;
            Ok(TrialRecord {
                index,
                initial,
                label: class.label,
                lambda: class.lambda,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let estimate = ChaosProbabilityEstimate::from_records(&records, master_seed, policy, options);
    Ok((estimate, records))
}

pub fn estimate_probability(
    d: &DimensionlessParams,
    l: &LatticeConfig,
    n_trials: usize,
    master_seed: u64,
    policy: &ClassificationPolicy,
    options: &MonteCarloOptions,
) -> Result<ChaosProbabilityEstimate> {
    estimate_probability_with_trials(d, l, n_trials, master_seed, policy, options).map(|(e, _)| e)
}

/// Ratio `p_A / p_B` of two chaos probabilities with its 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionComparison {
    pub estimate_a: ChaosProbabilityEstimate,
    pub estimate_b: ChaosProbabilityEstimate,
    /// `None` when `p_B = 0`.
    pub ratio: Option<f64>,
    /// Katz log interval; the upper end is infinite when `p_B = 0`.
    pub ratio_ci: (f64, f64),
    /// `n_A / n_B` from the Melnikov zero counts, when both are defined.
    pub predicted_ratio: Option<f64>,
    /// Whether `predicted_ratio` lies inside `ratio_ci`.
    pub consistent: Option<bool>,
}

/// Interval for the ratio of two independent binomial proportions.
pub fn ratio_interval(x_a: usize, n_a: usize, x_b: usize, n_b: usize) -> (Option<f64>, (f64, f64)) {
    let pa = x_a as f64 / n_a as f64;
    let pb = x_b as f64 / n_b as f64;
    if x_b == 0 {
        let (lo_a, _) = wilson_interval(x_a, n_a);
        let (_, hi_b) = wilson_interval(x_b, n_b);
        return (None, (lo_a / hi_b, f64::INFINITY));
    }
    if x_a == 0 {
        let (_, hi_a) = wilson_interval(x_a, n_a);
        let (lo_b, _) = wilson_interval(x_b, n_b);
        return (Some(0.0), (0.0, hi_a / lo_b));
    }
    let ratio = pa / pb;
    let se = ((1.0 - pa) / x_a as f64 + (1.0 - pb) / x_b as f64).sqrt();
    (
        Some(ratio),
        (ratio * (-Z95 * se).exp(), ratio * (Z95 * se).exp()),
    )
}

pub fn compare_regions(
    d: &DimensionlessParams,
    l_a: &LatticeConfig,
    l_b: &LatticeConfig,
    n_trials: usize,
    master_seed: u64,
    policy: &ClassificationPolicy,
    options: &MonteCarloOptions,
) -> Result<RegionComparison> {
    let estimate_a = estimate_probability(d, l_a, n_trials, master_seed, policy, options)?;
    let estimate_b = estimate_probability(d, l_b, n_trials, master_seed, policy, options)?;
    let denom = |e: &ChaosProbabilityEstimate| {
        if e.options.exclude_unbounded {
            e.n_trials - e.n_unbounded
        } else {
            e.n_trials
        }
    };
    let (ratio, ratio_ci) = ratio_interval(
        estimate_a.n_chaotic,
        denom(&estimate_a),
        estimate_b.n_chaotic,
        denom(&estimate_b),
    );
    let predicted_ratio = match (
        melnikov::count_zeros_per_period(d, l_a, melnikov::DEFAULT_RESOLUTION, None),
        melnikov::count_zeros_per_period(d, l_b, melnikov::DEFAULT_RESOLUTION, None),
    ) {
        (Ok(a), Ok(b)) if b.n > 0 => Some(a.n as f64 / b.n as f64),
        _ => None,
    };
    let consistent = predicted_ratio.map(|r| ratio_ci.0 <= r && r <= ratio_ci.1);
    Ok(RegionComparison {
        estimate_a,
        estimate_b,
        ratio,
        ratio_ci,
        predicted_ratio,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_and_in_range() {
        let ic = InitialBox::default();
        for i in 0..200 {
            let a = sample_initial(i, 42, &ic);
            let b = sample_initial(i, 42, &ic);
            assert_eq!(a, b);
            assert!((-2.1..=2.1).contains(&a.r));
            assert!((-2.2..=2.2).contains(&a.rp));
        }
        assert_ne!(sample_initial(0, 42, &ic), sample_initial(0, 43, &ic));
        assert_ne!(sample_initial(0, 42, &ic), sample_initial(1, 42, &ic));
    }

    #[test]
    fn wilson_contains_point_estimate() {
        for n in [1usize, 7, 100, 500] {
            for x in 0..=n.min(40) {
                let (lo, hi) = wilson_interval(x, n);
                let p = x as f64 / n as f64;
                assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
            }
        }
        // statsmodels proportion_confint(85, 500, method="wilson")
        let (lo, hi) = wilson_interval(85, 500);
        assert!((lo - 0.139_620_366_103_961_17).abs() < 1e-12);
        assert!((hi - 0.205_411_698_600_663_33).abs() < 1e-12);
    }

    #[test]
    fn wilson_narrows_with_trials() {
        let widths: Vec<f64> = [100usize, 500, 2000]
            .iter()
            .map(|&n| {
                let (lo, hi) = wilson_interval(n * 17 / 100, n);
                hi - lo
            })
            .collect();
        assert!(widths[0] > widths[1] && widths[1] > widths[2]);
    }

    #[test]
    fn ratio_interval_guards_zero_denominator() {
        let (r, (lo, hi)) = ratio_interval(10, 100, 0, 100);
        assert!(r.is_none());
        assert!(lo > 0.0 && hi.is_infinite());
        let (r, (lo, hi)) = ratio_interval(30, 100, 30, 100);
        assert_eq!(r, Some(1.0));
        assert!(lo < 1.0 && hi > 1.0);
    }
}
