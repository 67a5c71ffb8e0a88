//! Chaos suppression by sudden changes of the secondary lattice.
//!
//! Method 1 replaces an integer wavelength ratio by an irrational one;
//! method 2 turns on a relative phase. Either removes a given Melnikov zero
//! `c0` unless both drive terms vanish there independently.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    self, ClassificationPolicy, GrowthStats, PhaseState, TangentIntegrator, TrajectoryLabel,
};
use crate::error::{Error, Result};
use crate::melnikov;
use crate::montecarlo::{self, InitialBox};
use crate::params::{DimensionlessParams, LatticeConfig, WaveRatio};

/// Switches an integer `gamma` to the irrational `gamma_new`, `phi = 0`.
pub fn apply_method1(l: &LatticeConfig, gamma_new: &WaveRatio) -> Result<LatticeConfig> {
    l.validate()?;
    if l.phi != 0.0 {
        return Err(Error::invalid("phi", "method 1 starts from phi = 0"));
    }
    if l.gamma.as_integer().is_none() {
        return Err(Error::invalid(
            "gamma",
            format!("method 1 starts from an integer ratio, got {}", l.gamma),
        ));
    }
    if gamma_new.is_rational() {
        return Err(Error::invalid("gamma_new", "must be flagged irrational"));
    }
    gamma_new.validate()?;
    if gamma_new.value() == l.gamma.value() {
        return Err(Error::invalid(
            "gamma_new",
            "numerically equal to the current integer ratio; irrational flag is inconsistent",
        ));
    }
    let mut out = l.clone();
    out.gamma = gamma_new.clone();
    Ok(out)
}

/// Switches the relative phase of a `gamma = 2` lattice from 0 to `phi_new`
/// (radians).
pub fn apply_method2(l: &LatticeConfig, phi_new: f64) -> Result<LatticeConfig> {
    l.validate()?;
    if l.gamma.as_integer() != Some(2) {
        return Err(Error::invalid(
            "gamma",
            format!("method 2 starts from gamma = 2, got {}", l.gamma),
        ));
    }
    if l.phi != 0.0 {
        return Err(Error::invalid("phi", "method 2 starts from phi = 0"));
    }
    if !phi_new.is_finite() || phi_new == 0.0 {
        return Err(Error::invalid("phi_new", "must be finite and nonzero"));
    }
    let mut out = l.clone();
    out.phi = phi_new;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuppressionReport {
    pub c0: f64,
    #[serde(rename = "M_before")]
    pub m_before: f64,
    #[serde(rename = "M_after")]
    pub m_after: f64,
    pub suppressed: bool,
}

/// Evaluates `M(c0)` before and after a lattice change. `c0` must be a zero
/// of the original configuration within `tol`; the zero counts as removed
/// when `|M_after(c0)| > tol`.
pub fn suppression_check(
    c0: f64,
    l_before: &LatticeConfig,
    l_after: &LatticeConfig,
    d: &DimensionlessParams,
    tol: f64,
) -> Result<SuppressionReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let m_before = melnikov::melnikov(c0, d, l_before)?;
    if m_before.abs() >= tol {
        return Err(Error::NotAZero {
            c0,
            value: m_before,
            tol,
        });
    }
    let m_after = melnikov::melnikov(c0, d, l_after)?;
    Ok(SuppressionReport {
        c0,
        m_before,
        m_after,
        suppressed: m_after.abs() > tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingResult {
    pub xi_switch: f64,
    pub lambda_before: f64,
    pub lambda_after: f64,
}

/// Minimum number of averaged periods on each side of the switch.
pub const MIN_SEGMENT_PERIODS: usize = 1000;

fn segment_error(e: Error, segment: &'static str) -> Error {
    match e {
        Error::Unbounded { xi, iteration, .. } => Error::Unbounded {
            xi,
            iteration,
            segment: Some(segment),
        },
        other => other,
    }
}

/// Integrates one trajectory under `l_before` up to `xi_switch` and under
/// `l_after` beyond, and returns the largest Lyapunov exponent of each
/// segment.
///
/// The first `policy.drop` periods of each segment are discarded. The
/// before-segment covers the whole periods that fit below `xi_switch`; the
/// after-segment runs `policy.n_iters` periods of the new lattice.
pub fn switching_experiment(
    s0: PhaseState,
    xi_switch: f64,
    l_before: &LatticeConfig,
    l_after: &LatticeConfig,
    d: &DimensionlessParams,
    policy: &ClassificationPolicy,
) -> Result<SwitchingResult> {
    policy.validate()?;
    l_before.validate()?;
    l_after.validate()?;
    if !s0.is_finite() {
        return Err(Error::invalid("initial state", "must be finite"));
    }
    let t_before = l_before.drive_period();
    let t_after = l_after.drive_period();
    if !(xi_switch.is_finite() && xi_switch > 0.0) {
        return Err(Error::invalid("xi_switch", "must be positive and finite"));
    }
    let whole = (xi_switch / t_before).floor() as usize;
    if whole < policy.drop + MIN_SEGMENT_PERIODS {
        return Err(Error::invalid(
            "xi_switch",
            format!(
                "{whole} periods before the switch; need at least {}",
                policy.drop + MIN_SEGMENT_PERIODS
            ),
        ));
    }
    if policy.n_iters < policy.drop + MIN_SEGMENT_PERIODS {
        return Err(Error::invalid(
            "n_iters",
            format!(
                "after-switch segment needs at least {} periods",
                policy.drop + MIN_SEGMENT_PERIODS
            ),
        ));
    }

    let mut tangent = TangentIntegrator::new(s0, 0.0, d, &policy.step);
    let mut before = GrowthStats::default();
    for j in 1..=whole {
        let g = tangent
            .period(t_before, l_before)
            .map_err(|e| segment_error(e, "before"))?;
        if j > policy.drop {
            before.push(g);
        }
    }
    let rest = xi_switch - tangent.xi;
    if rest > 0.0 {
        tangent
            .period(rest, l_before)
            .map_err(|e| segment_error(e, "before"))?;
    }

    let mut after = GrowthStats::default();
    for j in 1..=policy.n_iters {
        let g = tangent
            .period(t_after, l_after)
            .map_err(|e| segment_error(e, "after"))?;
        if j > policy.drop {
            after.push(g);
        }
    }
    Ok(SwitchingResult {
        xi_switch,
        lambda_before: before.sum() / (before.count() as f64 * t_before),
        lambda_after: after.sum() / (after.count() as f64 * t_after),
    })
}

/// First initial state from the `master_seed` stream that the policy labels
/// chaotic under `l`, with its trial index.
pub fn find_chaotic_seed(
    d: &DimensionlessParams,
    l: &LatticeConfig,
    policy: &ClassificationPolicy,
    master_seed: u64,
    ic: &InitialBox,
    max_tries: u64,
) -> Result<Option<(u64, PhaseState)>> {
    for index in 0..max_tries {
        let s0 = montecarlo::sample_initial(index, master_seed, ic);
        if dynamics::classify_trajectory(s0, d, l, policy)?.label == TrajectoryLabel::Chaotic {
            return Ok(Some((index, s0)));
        }
    }
    Ok(None)
}
