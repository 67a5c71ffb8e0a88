//! Integration of the driven Duffing equation, stroboscopic Poincaré
//! sections, largest Lyapunov exponents and trajectory classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::Dopri5;
use crate::params::{duffing_rhs, DimensionlessParams, LatticeConfig};

/// A point `(R, R')` of the equivalent phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseState {
    pub r: f64,
    pub rp: f64,
}

impl PhaseState {
    pub const fn new(r: f64, rp: f64) -> Self {
        PhaseState { r, rp }
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.rp.is_finite()
    }

    /// Conserved energy of the undriven flow,
    /// `H = R'^2/2 + D R^2/2 - g1 R^4/4`.
    pub fn energy(&self, d: &DimensionlessParams) -> f64 {
        let r2 = self.r * self.r;
        0.5 * self.rp * self.rp + 0.5 * d.d() * r2 - 0.25 * d.g1() * r2 * r2
    }
}

/// Tolerances and guards for trajectory integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Trajectories with `|R|` or `|R'|` beyond this are reported unbounded.
    pub escape_radius: f64,
    /// Step budget for a single `advance` call (one drive period, or one
    /// `integrate` span).
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-10,
            atol: 1e-12,
            escape_radius: 1e3,
            max_steps: 1_000_000,
        }
    }
}

impl StepControl {
    fn integrator(&self) -> Dopri5 {
        Dopri5::new(self.rtol, self.atol, self.max_steps)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::invalid("rtol/atol", "tolerances must be positive"));
        }
        if !(self.escape_radius > 0.0) {
            return Err(Error::invalid("escape_radius", "must be positive"));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps", "must be positive"));
        }
        Ok(())
    }
}

#[inline]
fn flow(xi: f64, y: &[f64; 2], d: &DimensionlessParams, l: &LatticeConfig) -> [f64; 2] {
    let ds = duffing_rhs(PhaseState::new(y[0], y[1]), xi, d, l);
    [ds.r, ds.rp]
}

/// Flow together with the variational system
/// `dR'' = (-D + 3 g1 R^2 + V(xi)) dR`.
#[inline]
fn tangent_flow(xi: f64, y: &[f64; 4], d: &DimensionlessParams, l: &LatticeConfig) -> [f64; 4] {
    let r = y[0];
    let v = l.potential(xi);
    let r2 = r * r;
    [
        y[1],
        d.g1() * r2 * r - d.d() * r + v * r,
        y[3],
        (-d.d() + 3.0 * d.g1() * r2 + v) * y[2],
    ]
}

/// Integrates the driven Duffing equation from `xi0` to `xi1`.
pub fn integrate(
    s0: PhaseState,
    xi0: f64,
    xi1: f64,
    d: &DimensionlessParams,
    l: &LatticeConfig,
    ctrl: &StepControl,
) -> Result<PhaseState> {
    if !s0.is_finite() {
        return Err(Error::invalid("initial state", "must be finite"));
    }
    if xi1 < xi0 {
        return Err(Error::invalid("xi span", "integration runs forward in xi"));
    }
    let radius = ctrl.escape_radius;
    let y = ctrl.integrator().advance(
        |xi, y: &[f64; 2]| flow(xi, y, d, l),
        xi0,
        [s0.r, s0.rp],
        xi1,
        |y| escaped(y[0], y[1], radius),
    )?;
    Ok(PhaseState::new(y[0], y[1]))
}

#[inline]
fn escaped(r: f64, rp: f64, radius: f64) -> bool {
    !(r.abs() <= radius && rp.abs() <= radius)
}

fn tag_iteration(e: Error, iteration: usize) -> Error {
    match e {
        Error::Unbounded { xi, segment, .. } => Error::Unbounded {
            xi,
            iteration,
            segment,
        },
        other => other,
    }
}

/// Stroboscopic samples of one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareSection {
    /// `(j, state)` at `xi = j T`, for `j = drop..=n_iters`.
    pub points: Vec<(usize, PhaseState)>,
    pub period: f64,
    pub drop: usize,
    pub n_iters: usize,
    pub origin: PhaseState,
    /// True when the secondary lattice is incommensurate, so the section is
    /// taken at the primary period of a quasiperiodically forced system.
    pub quasiperiodic: bool,
}

/// Iterates the stroboscopic map `n_iters` times from `xi = 0` and keeps
/// the iterates from `drop` onward (the initial state is iterate 0).
pub fn poincare_section(
    s0: PhaseState,
    n_iters: usize,
    drop: usize,
    d: &DimensionlessParams,
    l: &LatticeConfig,
    ctrl: &StepControl,
) -> Result<PoincareSection> {
    if drop > n_iters {
        return Err(Error::invalid(
            "drop",
            format!("{drop} exceeds n_iters = {n_iters}"),
        ));
    }
    if !s0.is_finite() {
        return Err(Error::invalid("initial state", "must be finite"));
    }
    let period = l.drive_period();
    let radius = ctrl.escape_radius;
    let mut ode = ctrl.integrator();
    let mut y = [s0.r, s0.rp];
    let mut points = Vec::with_capacity(n_iters + 1 - drop);
    if drop == 0 {
        points.push((0, s0));
    }
    for j in 1..=n_iters {
        let xi0 = (j - 1) as f64 * period;
        let xi1 = j as f64 * period;
        y = ode
            .advance(
                |xi, y: &[f64; 2]| flow(xi, y, d, l),
                xi0,
                y,
                xi1,
                |y| escaped(y[0], y[1], radius),
            )
            .map_err(|e| tag_iteration(e, j))?;
        if j >= drop {
            points.push((j, PhaseState::new(y[0], y[1])));
        }
    }
    Ok(PoincareSection {
        points,
        period,
        drop,
        n_iters,
        origin: s0,
        quasiperiodic: !l.gamma.is_rational(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Largest exponent per unit `xi`.
    pub lambda: f64,
    pub renormalizations: usize,
    /// Variance of the per-period logarithmic growth over the averaged span.
    pub log_growth_variance: f64,
    /// Largest distance of a post-transient stroboscopic iterate from the
    /// first one; zero for an equilibrium.
    pub section_spread: f64,
    pub final_state: PhaseState,
}

/// Integrates state and tangent vector across drive periods, renormalizing
/// the tangent vector after each period.
pub(crate) struct TangentIntegrator<'a> {
    d: &'a DimensionlessParams,
    ode: Dopri5,
    radius: f64,
    pub(crate) y: [f64; 4],
    pub(crate) xi: f64,
}

impl<'a> TangentIntegrator<'a> {
    pub(crate) fn new(
        s0: PhaseState,
        xi: f64,
        d: &'a DimensionlessParams,
        ctrl: &StepControl,
    ) -> Self {
        TangentIntegrator {
            d,
            ode: ctrl.integrator(),
            radius: ctrl.escape_radius,
            y: [s0.r, s0.rp, 1.0, 0.0],
            xi,
        }
    }

    /// Advances by `span` under lattice `l`; returns the log growth of the
    /// tangent vector, which is then renormalized to unit length.
    pub(crate) fn period(&mut self, span: f64, l: &LatticeConfig) -> Result<f64> {
        let d = self.d;
        let radius = self.radius;
        let next = self.xi + span;
        self.y = self.ode.advance(
            |xi, y: &[f64; 4]| tangent_flow(xi, y, d, l),
            self.xi,
            self.y,
            next,
            |y| escaped(y[0], y[1], radius),
        )?;
        self.xi = next;
        let norm = self.y[2].hypot(self.y[3]);
        self.y[2] /= norm;
        self.y[3] /= norm;
        Ok(norm.ln())
    }

    pub(crate) fn state(&self) -> PhaseState {
        PhaseState::new(self.y[0], self.y[1])
    }
}

/// Running mean/variance of per-period log growth.
#[derive(Default)]
pub(crate) struct GrowthStats {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl GrowthStats {
    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub(crate) fn count(&self) -> usize {
        self.n
    }

    pub(crate) fn sum(&self) -> f64 {
        self.sum
    }

    pub(crate) fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        (self.sum_sq / n - mean * mean).max(0.0)
    }
}

/// Largest Lyapunov exponent from the variational equations, averaged over
/// stroboscopic periods `drop + 1 ..= n_iters`.
pub fn lyapunov(
    s0: PhaseState,
    n_iters: usize,
    drop: usize,
    d: &DimensionlessParams,
    l: &LatticeConfig,
    ctrl: &StepControl,
) -> Result<LyapunovEstimate> {
    if drop >= n_iters {
        return Err(Error::invalid(
            "drop",
            format!("{drop} leaves no periods out of {n_iters}"),
        ));
    }
    if !s0.is_finite() {
        return Err(Error::invalid("initial state", "must be finite"));
    }
    let period = l.drive_period();
    let mut tangent = TangentIntegrator::new(s0, 0.0, d, ctrl);
    let mut stats = GrowthStats::default();
    let mut anchor = s0;
    let mut spread: f64 = 0.0;
    for j in 1..=n_iters {
        let growth = tangent.period(period, l).map_err(|e| tag_iteration(e, j))?;
        if j == drop {
            anchor = tangent.state();
        }
        if j > drop {
            stats.push(growth);
            let s = tangent.state();
            spread = spread.max((s.r - anchor.r).hypot(s.rp - anchor.rp));
        }
    }
    Ok(LyapunovEstimate {
        lambda: stats.sum() / (stats.count() as f64 * period),
        renormalizations: n_iters,
        log_growth_variance: stats.variance(),
        section_spread: spread,
        final_state: tangent.state(),
    })
}

/// Two-trajectory (Benettin) estimate of the largest exponent: a companion
/// orbit at distance `separation` is integrated alongside and pulled back
/// to that distance after every period. Independent of the variational
/// route and used to cross-check it.
pub fn lyapunov_two_trajectory(
    s0: PhaseState,
    n_iters: usize,
    drop: usize,
    separation: f64,
    d: &DimensionlessParams,
    l: &LatticeConfig,
    ctrl: &StepControl,
) -> Result<f64> {
    if drop >= n_iters {
        return Err(Error::invalid("drop", "no periods left to average"));
    }
    if !(separation > 0.0) {
        return Err(Error::invalid("separation", "must be positive"));
    }
    let period = l.drive_period();
    let radius = ctrl.escape_radius;
    let mut ode_a = ctrl.integrator();
    let mut ode_b = ctrl.integrator();
    let mut a = [s0.r, s0.rp];
    let mut b = [s0.r + separation, s0.rp];
    let mut sum = 0.0;
    for j in 1..=n_iters {
        let xi0 = (j - 1) as f64 * period;
        let xi1 = j as f64 * period;
        a = ode_a
            .advance(
                |xi, y: &[f64; 2]| flow(xi, y, d, l),
                xi0,
                a,
                xi1,
                |y| escaped(y[0], y[1], radius),
            )
            .map_err(|e| tag_iteration(e, j))?;
        b = ode_b
            .advance(
                |xi, y: &[f64; 2]| flow(xi, y, d, l),
                xi0,
                b,
                xi1,
                |y| escaped(y[0], y[1], radius),
            )
            .map_err(|e| tag_iteration(e, j))?;
        let dr = b[0] - a[0];
        let dp = b[1] - a[1];
        let dist = dr.hypot(dp);
        if j > drop {
            sum += (dist / separation).ln();
        }
        let scale = separation / dist;
        b = [a[0] + dr * scale, a[1] + dp * scale];
    }
    Ok(sum / ((n_iters - drop) as f64 * period))
}

/// Parameters of the chaotic/regular decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassificationPolicy {
    pub n_iters: usize,
    pub drop: usize,
    /// Exponents above this (per unit `xi`) count as chaotic.
    pub lambda_threshold: f64,
    #[serde(flatten)]
    pub step: StepControl,
}

impl Default for ClassificationPolicy {
    fn default() -> Self {
        ClassificationPolicy {
            n_iters: 3000,
            drop: 100,
            lambda_threshold: 0.01,
            step: StepControl::default(),
        }
    }
}

impl ClassificationPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.drop >= self.n_iters {
            return Err(Error::invalid("drop", "must be smaller than n_iters"));
        }
        if !self.lambda_threshold.is_finite() {
            return Err(Error::invalid("lambda_threshold", "must be finite"));
        }
        self.step.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrajectoryLabel {
    Regular,
    Chaotic,
    Unbounded,
}

impl TrajectoryLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrajectoryLabel::Regular => "Regular",
            TrajectoryLabel::Chaotic => "Chaotic",
            TrajectoryLabel::Unbounded => "Unbounded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryClass {
    pub label: TrajectoryLabel,
    /// `None` for unbounded trajectories.
    pub lambda: Option<f64>,
    pub log_growth_variance: f64,
    pub section_spread: f64,
    pub renormalizations: usize,
}

/// Stroboscopic spread below which a trajectory is treated as sitting on an
/// equilibrium: regular whatever the local (saddle) expansion rate.
const STATIONARY_SPREAD: f64 = 1e-12;

/// Labels a trajectory by its largest Lyapunov exponent.
///
/// A trajectory pinned to an equilibrium (the origin is one for every
/// drive) is regular even though the exponent there is the saddle rate.
/// Escaping trajectories are labeled [`TrajectoryLabel::Unbounded`]; other
/// numerical failures are returned as errors.
pub fn classify_trajectory(
    s0: PhaseState,
    d: &DimensionlessParams,
    l: &LatticeConfig,
    policy: &ClassificationPolicy,
) -> Result<TrajectoryClass> {
    match lyapunov(s0, policy.n_iters, policy.drop, d, l, &policy.step) {
        Ok(est) => Ok(TrajectoryClass {
            label: if est.lambda > policy.lambda_threshold && est.section_spread > STATIONARY_SPREAD
            {
                TrajectoryLabel::Chaotic
            } else {
                TrajectoryLabel::Regular
            },
            lambda: Some(est.lambda),
            log_growth_variance: est.log_growth_variance,
            section_spread: est.section_spread,
            renormalizations: est.renormalizations,
        }),
        Err(Error::Unbounded { iteration, .. }) => Ok(TrajectoryClass {
            label: TrajectoryLabel::Unbounded,
            lambda: None,
            log_growth_variance: f64::NAN,
            section_spread: f64::INFINITY,
            renormalizations: iteration.saturating_sub(1),
        }),
        Err(e) => Err(e),
    }
}
