//! Melnikov function of the driven Duffing equation and the chaos
//! probabilities predicted from its zeros.
//!
//! For the bright-soliton homoclinic orbit the Melnikov integral has the
//! closed form
//!
//! ```text
//! M(c0) = (2 k^2 pi / g1) [ V1 csch(k pi / s) sin(2 c0 k)
//!                         + V2 gamma^2 csch(gamma k pi / s) sin(2 c0 gamma k - 2 phi) ]
//! ```
//!
//! with `s = sqrt(-D)`. Every zero of `M` in one period is a value of the
//! integration constant `c0` at which chaos can set in; the zero count `n`
//! gives the predicted probability `P = n P0 / 2` relative to the
//! single-lattice reference `P0`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DimensionlessParams, LatticeConfig, WaveRatio};
use crate::quadrature::{self, QuadOptions};
use crate::soliton;

/// Samples per period used when none is requested.
pub const DEFAULT_RESOLUTION: usize = 4096;
/// Relative band around the boundary value classified as `Boundary`.
pub const DEFAULT_BOUNDARY_TOLERANCE: f64 = 1e-9;
/// Default zero tolerance, relative to `max |M|` over the period.
pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-10;
/// A zero is tangential when `|M'|` there is below this fraction of
/// `max |M'|` over the period.
const TANGENTIAL_SLOPE: f64 = 1e-6;
const MIN_SAMPLES_PER_OSCILLATION: f64 = 8.0;

fn csch(x: f64) -> f64 {
    1.0 / x.sinh()
}

/// Analytic Melnikov function `M(c0)`.
pub fn melnikov(c0: f64, d: &DimensionlessParams, l: &LatticeConfig) -> Result<f64> {
    let s = d.decay_rate()?;
    if d.g1() == 0.0 {
        return Err(Error::Domain("g1 = 0 has no homoclinic orbit".into()));
    }
    Ok(melnikov_unchecked(c0, s, d.g1(), l))
}

#[inline]
fn melnikov_unchecked(c0: f64, s: f64, g1: f64, l: &LatticeConfig) -> f64 {
    let k = l.k;
    let gamma = l.gamma_value();
    let eta = 2.0 * k * k * PI / g1;
    let mut m = 0.0;
    if l.v1 != 0.0 {
        m += l.v1 * csch(k * PI / s) * (2.0 * c0 * k).sin();
    }
    if l.v2 != 0.0 {
        m += l.v2
            * gamma
            * gamma
            * csch(gamma * k * PI / s)
            * (2.0 * c0 * gamma * k - 2.0 * l.phi).sin();
    }
    eta * m
}

/// Derivative `dM/dc0`.
pub fn melnikov_derivative(c0: f64, d: &DimensionlessParams, l: &LatticeConfig) -> Result<f64> {
    let s = d.decay_rate()?;
    if d.g1() == 0.0 {
        return Err(Error::Domain("g1 = 0 has no homoclinic orbit".into()));
    }
    Ok(derivative_unchecked(c0, s, d.g1(), l))
}

fn derivative_unchecked(c0: f64, s: f64, g1: f64, l: &LatticeConfig) -> f64 {
    let k = l.k;
    let gamma = l.gamma_value();
    let eta = 2.0 * k * k * PI / g1;
    let mut m = 0.0;
    if l.v1 != 0.0 {
        m += l.v1 * csch(k * PI / s) * 2.0 * k * (2.0 * c0 * k).cos();
    }
    if l.v2 != 0.0 {
        m += l.v2
            * gamma.powi(3)
            * csch(gamma * k * PI / s)
            * 2.0
            * k
            * (2.0 * c0 * gamma * k - 2.0 * l.phi).cos();
    }
    eta * m
}

/// Default symmetric cutoff `L = 40 / sqrt(-D)` for the improper integrals.
pub fn default_cutoff(d: &DimensionlessParams) -> Result<f64> {
    Ok(40.0 / d.decay_rate()?)
}

/// Melnikov function by direct quadrature of `f(xi) eps(xi)` over `[-L, L]`
/// around the soliton peak, using the soliton module's `f` and `eps`.
pub fn melnikov_numeric(
    c0: f64,
    d: &DimensionlessParams,
    l: &LatticeConfig,
    cutoff: f64,
    quad_tol: f64,
) -> Result<f64> {
    let cfg = soliton::SolitonConfig::new(*d, l.clone(), c0, 0.0)?;
    check_cutoff(&cfg, cutoff)?;
    if l.is_undriven() {
        return Ok(0.0);
    }
    let q = quadrature::integrate(
        |xi| soliton::f(xi, &cfg) * soliton::epsilon(xi, &cfg),
        -c0 - cutoff,
        -c0 + cutoff,
        QuadOptions::absolute(quad_tol),
    )?;
    Ok(q.value)
}

/// Same integral by adaptive Simpson; an independent second scheme.
pub fn melnikov_numeric_simpson(
    c0: f64,
    d: &DimensionlessParams,
    l: &LatticeConfig,
    cutoff: f64,
    quad_tol: f64,
) -> Result<f64> {
    let cfg = soliton::SolitonConfig::new(*d, l.clone(), c0, 0.0)?;
    check_cutoff(&cfg, cutoff)?;
    if l.is_undriven() {
        return Ok(0.0);
    }
    let panels = (2.0 * cutoff * l.k * l.gamma_value().max(1.0)).ceil() as usize * 4;
    let q = quadrature::integrate_simpson(
        |xi| soliton::f(xi, &cfg) * soliton::epsilon(xi, &cfg),
        -c0 - cutoff,
        -c0 + cutoff,
        panels,
        QuadOptions {
            max_intervals: 2_000_000,
            ..QuadOptions::absolute(quad_tol)
        },
    )?;
    Ok(q.value)
}

fn check_cutoff(cfg: &soliton::SolitonConfig, cutoff: f64) -> Result<()> {
    let tail = 1.0 / (cfg.decay_rate() * cutoff).cosh();
    if !(cutoff > 0.0) || tail >= 1e-12 {
        return Err(Error::invalid(
            "cutoff",
            format!("sech(sqrt(-D) L) = {tail:e} must be below 1e-12"),
        ));
    }
    Ok(())
}

fn integer_gamma_phi_zero(l: &LatticeConfig) -> Result<u32> {
    let n = l
        .gamma
        .as_integer()
        .ok_or_else(|| Error::Domain(format!("gamma = {} is not an integer", l.gamma)))?;
    if l.phi != 0.0 {
        return Err(Error::Domain(format!(
            "the factorization needs phi = 0, got {}",
            l.phi
        )));
    }
    Ok(n)
}

/// `X1(c0) = sin(2 c0 k)`.
pub fn factor_x1(c0: f64, k: f64) -> f64 {
    (2.0 * c0 * k).sin()
}

/// `eta = 2 k^2 pi / g1`.
pub fn factor_eta(d: &DimensionlessParams, l: &LatticeConfig) -> f64 {
    2.0 * l.k * l.k * PI / d.g1()
}

/// `X_N(c0) = V1 csch(k pi/s) + V2 N^2 csch(N k pi/s) sin(2 N c0 k)/sin(2 c0 k)`
/// for integer `gamma = N` and `phi = 0`, so that `M = eta X1 X_N`.
///
/// The ratio `sin(N x)/sin(x)` is the Chebyshev polynomial `U_{N-1}(cos x)`,
/// which is evaluated directly and is regular at the zeros of `sin x`. For
/// `N = 2` this is `V1 csch(k pi/s) + 8 V2 csch(2 k pi/s) cos(2 c0 k)`.
pub fn factor_xn(c0: f64, d: &DimensionlessParams, l: &LatticeConfig) -> Result<f64> {
    let n = integer_gamma_phi_zero(l)?;
    let s = d.decay_rate()?;
    let k = l.k;
    let nf = f64::from(n);
    let ratio = chebyshev_u(n - 1, (2.0 * c0 * k).cos());
    Ok(l.v1 * csch(k * PI / s) + l.v2 * nf * nf * csch(nf * k * PI / s) * ratio)
}

/// Chebyshev polynomial of the second kind `U_m(x)`.
fn chebyshev_u(m: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if m == 0 {
        return prev;
    }
    for _ in 1..m {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Length of one `c0`-period of `M`: `q pi / k` for `gamma = p/q`, or
/// `pi / k` when the secondary lattice is off.
pub fn melnikov_period(l: &LatticeConfig) -> Result<f64> {
    match &l.gamma {
        WaveRatio::Rational { q, .. } => {
            if l.v2 == 0.0 {
                Ok(PI / l.k)
            } else {
                Ok(f64::from(*q) * PI / l.k)
            }
        }
        WaveRatio::Irrational { tag, .. } => {
            if l.v2 == 0.0 {
                Ok(PI / l.k)
            } else {
                Err(Error::NoPeriod { tag: tag.clone() })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroKind {
    /// `M` crosses zero with non-vanishing slope.
    Simple,
    /// `M` touches zero, or crosses it with vanishing slope.
    Tangential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MelnikovZero {
    pub c0: f64,
    pub kind: ZeroKind,
}

/// `M` sampled over one period with its located zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelnikovProfile {
    pub params: DimensionlessParams,
    pub lattice: LatticeConfig,
    pub period: f64,
    pub samples: Vec<(f64, f64)>,
    pub zeros: Vec<MelnikovZero>,
    /// Number of distinct zero locations in `[0, period)`.
    pub n: usize,
    pub zero_tolerance: f64,
}

/// JSON summary of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub period: f64,
    pub n: usize,
    pub zeros: Vec<f64>,
    pub kinds: Vec<ZeroKind>,
}

impl MelnikovProfile {
    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            period: self.period,
            n: self.n,
            zeros: self.zeros.iter().map(|z| z.c0).collect(),
            kinds: self.zeros.iter().map(|z| z.kind).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, &(_, v)| m.max(v.abs()))
    }
}

/// Bisection on a bracketed sign change, down to adjacent floats.
fn bisect(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    if g(a).abs() <= g(b).abs() {
        a
    } else {
        b
    }
}

/// Golden-section minimization of `|g|` on `[a, b]`.
fn minimize_abs(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = g(x1).abs();
    let mut f2 = g(x2).abs();
    while b - a > 1e-13 * (1.0 + a.abs()) {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = g(x1).abs();
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = g(x2).abs();
        }
    }
    0.5 * (a + b)
}

/// Samples `M` over one period and locates its distinct zeros.
///
/// Sign changes between samples are refined by bisection; local minima of
/// `|M|` without a sign change are refined by golden-section search and
/// kept when `|M|` drops below the zero tolerance (default
/// `1e-10 max|M|`).
pub fn count_zeros_per_period(
    d: &DimensionlessParams,
    l: &LatticeConfig,
    resolution: usize,
    zero_tolerance: Option<f64>,
) -> Result<MelnikovProfile> {
    l.validate()?;
    let s = d.decay_rate()?;
    if d.g1() == 0.0 {
        return Err(Error::Domain("g1 = 0 has no homoclinic orbit".into()));
    }
    let period = melnikov_period(l)?;
    if l.is_undriven() {
        return Err(Error::IdenticallyZero);
    }

    // Shortest oscillation of M: pi/(gamma k) from the secondary term.
    let shortest = if l.v2 != 0.0 {
        PI / (l.gamma_value().max(1.0) * l.k)
    } else {
        PI / l.k
    };
    let per_oscillation = resolution as f64 * shortest / period;
    if per_oscillation < MIN_SAMPLES_PER_OSCILLATION {
        return Err(Error::ResolutionTooCoarse {
            resolution,
            per_oscillation,
        });
    }

    let g1 = d.g1();
    let m = |c: f64| melnikov_unchecked(c, s, g1, l);
    let step = period / resolution as f64;
    // One extra sample closes the last interval at the period boundary.
    let samples: Vec<(f64, f64)> = (0..=resolution)
        .map(|i| {
            let c = i as f64 * step;
            (c, m(c))
        })
        .collect();
    let max_abs = samples.iter().fold(0.0f64, |acc, &(_, v)| acc.max(v.abs()));
    let tol = zero_tolerance.unwrap_or(DEFAULT_ZERO_TOLERANCE * max_abs);
    let max_slope = samples
        .iter()
        .map(|&(c, _)| derivative_unchecked(c, s, g1, l).abs())
        .fold(0.0f64, f64::max);

    let mut found: Vec<f64> = Vec::new();
    for i in 0..resolution {
        let (a, ga) = samples[i];
        let (b, gb) = samples[i + 1];
        if ga == 0.0 {
            found.push(a);
            continue;
        }
        if gb != 0.0 && (ga < 0.0) != (gb < 0.0) {
            found.push(bisect(m, a, b, ga));
        }
    }
    // Touching zeros: interior minima of |M| with no sign change around them.
    for i in 0..resolution {
        let prev = if i == 0 {
            samples[resolution - 1].1
        } else {
            samples[i - 1].1
        };
        let (c, cur) = samples[i];
        let next = samples[i + 1].1;
        let same_sign = cur != 0.0 && (prev < 0.0) == (cur < 0.0) && (next < 0.0) == (cur < 0.0);
        if same_sign && cur.abs() <= prev.abs() && cur.abs() <= next.abs() {
            let z = minimize_abs(m, c - step, c + step);
            if m(z).abs() < tol {
                found.push(z.rem_euclid(period));
            }
        }
    }

    // Fold onto [0, period) and merge coincident locations.
    let merge = 1e-7 * period;
    let mut folded: Vec<f64> = found
        .into_iter()
        .map(|z| {
            let z = z.rem_euclid(period);
            if period - z < merge {
                0.0
            } else {
                z
            }
        })
        .collect();
    folded.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::with_capacity(folded.len());
    for z in folded {
        match distinct.last() {
            Some(&last) if z - last < merge => {
                // keep the better-resolved of the two
                if m(z).abs() < m(last).abs() {
                    *distinct.last_mut().unwrap() = z;
                }
            }
            _ => distinct.push(z),
        }
    }

    let zeros: Vec<MelnikovZero> = distinct
        .into_iter()
        .map(|c0| {
            let slope = derivative_unchecked(c0, s, g1, l).abs();
            MelnikovZero {
                c0,
                kind: if slope <= TANGENTIAL_SLOPE * max_slope {
                    ZeroKind::Tangential
                } else {
                    ZeroKind::Simple
                },
            }
        })
        .collect();

    Ok(MelnikovProfile {
        params: *d,
        lattice: l.clone(),
        period,
        n: zeros.len(),
        samples: samples[..resolution].to_vec(),
        zeros,
        zero_tolerance: tol,
    })
}

/// Boundary between regions A and B for `gamma = 2`:
/// `V2b = V1 csch(k pi/s) / (8 csch(2 k pi/s)) = (V1/4) cosh(k pi/s)`.
pub fn boundary_v2b(k: f64, d: f64, v1: f64) -> Result<f64> {
    if d >= 0.0 {
        return Err(Error::Domain(format!("D = {d} must be negative")));
    }
    if !(k > 0.0) {
        return Err(Error::invalid("k", "must be positive"));
    }
    Ok(v1 / 4.0 * (k * PI / (-d).sqrt()).cosh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// Double chaotic region, `V2 > V2b`: four zeros per period.
    A,
    /// `V2 < V2b`: two zeros per period.
    B,
    Boundary,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::A => "A",
            Region::B => "B",
            Region::Boundary => "Boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub region: Region,
    pub v2b: f64,
}

/// Classifies a `gamma = 2`, `phi = 0` superlattice into region A, B or the
/// boundary between them. `boundary_tolerance` is relative to `V2b`.
pub fn classify_region(
    d: &DimensionlessParams,
    l: &LatticeConfig,
    boundary_tolerance: f64,
) -> Result<RegionLabel> {
    if l.gamma.as_integer() != Some(2) {
        return Err(Error::Domain(format!(
            "region classification needs gamma = 2, got {}",
            l.gamma
        )));
    }
    if l.phi != 0.0 {
        return Err(Error::Domain(format!(
            "region classification needs phi = 0, got {}",
            l.phi
        )));
    }
    let v2b = boundary_v2b(l.k, d.d(), l.v1)?;
    let band = boundary_tolerance * v2b;
    let region = if l.v2 > v2b + band {
        Region::A
    } else if l.v2 < v2b - band {
        Region::B
    } else {
        Region::Boundary
    };
    Ok(RegionLabel { region, v2b })
}

/// `P = n P0 / 2`.
pub fn probability_from_count(n: usize, p0: f64) -> f64 {
    n as f64 * p0 / 2.0
}

/// Predicted chaos probability relative to the single-lattice reference
/// `p0`. An undriven lattice has no Melnikov zeros and predicts zero.
pub fn predicted_probability(d: &DimensionlessParams, l: &LatticeConfig, p0: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::invalid(
            "P0",
            format!("must lie in (0, 1), got {p0}"),
        ));
    }
    match count_zeros_per_period(d, l, DEFAULT_RESOLUTION, None) {
        Ok(profile) => Ok(probability_from_count(profile.n, p0)),
        Err(Error::IdenticallyZero) => Ok(0.0),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub k: f64,
    pub v2: f64,
    /// Only defined for `gamma = 2`.
    pub label: Option<Region>,
    pub n: Option<usize>,
    pub v2b: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub k_axis: Vec<f64>,
    pub v2_axis: Vec<f64>,
    pub gamma: WaveRatio,
    /// Row-major over `(k, V2)`: index `ik * v2_axis.len() + iv`.
    pub cells: Vec<RegionCell>,
}

impl RegionMap {
    pub fn cell(&self, ik: usize, iv: usize) -> &RegionCell {
        &self.cells[ik * self.v2_axis.len() + iv]
    }

    pub fn max_n(&self) -> Option<usize> {
        self.cells.iter().filter_map(|c| c.n).max()
    }

    pub fn min_n(&self) -> Option<usize> {
        self.cells.iter().filter_map(|c| c.n).min()
    }
}

fn strictly_increasing(axis: &[f64]) -> bool {
    !axis.is_empty() && axis.windows(2).all(|w| w[0] < w[1]) && axis.iter().all(|x| x.is_finite())
}

/// Region labels and zero counts over a `(k, V2)` grid. Cell failures are
/// recorded per cell; the map itself only fails on malformed axes.
pub fn region_map(
    k_axis: &[f64],
    v2_axis: &[f64],
    d: &DimensionlessParams,
    v1: f64,
    gamma: &WaveRatio,
    resolution: usize,
) -> Result<RegionMap> {
    if !strictly_increasing(k_axis) {
        return Err(Error::invalid(
            "k_axis",
            "must be non-empty and strictly increasing",
        ));
    }
    if !strictly_increasing(v2_axis) {
        return Err(Error::invalid(
            "v2_axis",
            "must be non-empty and strictly increasing",
        ));
    }
    let nv = v2_axis.len();
    let cells = (0..k_axis.len() * nv)
        .into_par_iter()
        .map(|idx| {
            let k = k_axis[idx / nv];
            let v2 = v2_axis[idx % nv];
            let mut cell = RegionCell {
                k,
                v2,
                label: None,
                n: None,
                v2b: None,
                error: None,
            };
            let lattice = match LatticeConfig::new(v1, v2, k, gamma.clone(), 0.0) {
                Ok(l) => l,
                Err(e) => {
                    cell.error = Some(e.to_string());
                    return cell;
                }
            };
            if gamma.as_integer() == Some(2) {
                match classify_region(d, &lattice, DEFAULT_BOUNDARY_TOLERANCE) {
                    Ok(label) => {
                        cell.label = Some(label.region);
                        cell.v2b = Some(label.v2b);
                    }
                    Err(e) => cell.error = Some(e.to_string()),
                }
            }
            match count_zeros_per_period(d, &lattice, resolution, None) {
                Ok(p) => cell.n = Some(p.n),
                Err(e) => {
                    cell.error.get_or_insert_with(|| e.to_string());
                }
            }
            cell
        })
        .collect();
    Ok(RegionMap {
        k_axis: k_axis.to_vec(),
        v2_axis: v2_axis.to_vec(),
        gamma: gamma.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> DimensionlessParams {
        DimensionlessParams::new(-2.0, -0.5).unwrap()
    }

    fn lattice(v2: f64) -> LatticeConfig {
        LatticeConfig::new(0.04, v2, 1.0, WaveRatio::integer(2).unwrap(), 0.0).unwrap()
    }

    fn v2b() -> f64 {
        0.01 * (PI / 2f64.sqrt()).cosh()
    }

    #[test]
    fn undriven_melnikov_vanishes() {
        let l = LatticeConfig::new(0.0, 0.0, 1.0, WaveRatio::integer(2).unwrap(), 0.0).unwrap();
        for c in [0.0, 0.3, 1.7] {
            assert_eq!(melnikov(c, &params(), &l).unwrap(), 0.0);
        }
        assert!(matches!(
            count_zeros_per_period(&params(), &l, DEFAULT_RESOLUTION, None),
            Err(Error::IdenticallyZero)
        ));
        assert_eq!(predicted_probability(&params(), &l, 0.17).unwrap(), 0.0);
    }

    #[test]
    fn single_lattice_zero_at_half_period() {
        let l = LatticeConfig::new(0.04, 0.0, 1.3, WaveRatio::integer(2).unwrap(), 0.0).unwrap();
        let m = melnikov(PI / (2.0 * 1.3), &params(), &l).unwrap();
        assert!(m.abs() < 1e-16);
    }

    #[test]
    fn domain_errors() {
        let pos = DimensionlessParams::new(1.0, -0.5).unwrap();
        assert!(matches!(
            melnikov(0.1, &pos, &lattice(0.08)),
            Err(Error::Domain(_))
        ));
        let zero_g = DimensionlessParams::new(-2.0, 0.0).unwrap();
        assert!(matches!(
            melnikov(0.1, &zero_g, &lattice(0.08)),
            Err(Error::Domain(_))
        ));
        assert!(boundary_v2b(1.0, 0.5, 0.04).is_err());
    }

    #[test]
    fn factors_at_quarter_period() {
        assert!((factor_x1(PI / 4.0, 1.0) - 1.0).abs() < 1e-15);
        let l = lattice(v2b());
        let x2 = factor_xn(PI / 2.0, &params(), &l).unwrap();
        assert!(x2.abs() < 1e-15, "{x2}");
    }

    #[test]
    fn n2_closed_form_matches_chebyshev() {
        let d = params();
        let l = lattice(0.08);
        let s = 2f64.sqrt();
        for i in 0..20 {
            let c = 0.157 * f64::from(i);
            let closed = 0.04 * csch(PI / s) + 8.0 * 0.08 * csch(2.0 * PI / s) * (2.0 * c).cos();
            assert!((factor_xn(c, &d, &l).unwrap() - closed).abs() < 1e-15);
        }
    }

    #[test]
    fn factor_xn_rejects_non_integer_or_phase() {
        let mut l = lattice(0.08);
        l.phi = 0.2;
        assert!(factor_xn(0.3, &params(), &l).is_err());
        let l = LatticeConfig::new(0.04, 0.08, 1.0, WaveRatio::sqrt2(), 0.0).unwrap();
        assert!(factor_xn(0.3, &params(), &l).is_err());
    }

    #[test]
    fn figure_two_zero_counts() {
        let d = params();
        let count =
            |v2| count_zeros_per_period(&d, &lattice(v2), DEFAULT_RESOLUTION, None).unwrap();
        let a = count(0.0);
        assert_eq!(a.n, 2);
        assert!(a.zeros[0].c0.abs() < 1e-12);
        assert!((a.zeros[1].c0 - PI / 2.0).abs() < 1e-12);
        assert_eq!(count(0.08).n, 4);
        assert_eq!(count(0.01).n, 2);
        let c = count(v2b());
        assert_eq!(c.n, 2);
        assert_eq!(
            c.zeros
                .iter()
                .filter(|z| z.kind == ZeroKind::Tangential)
                .count(),
            1
        );
    }

    #[test]
    fn zeros_are_sorted_in_period_and_below_tolerance() {
        let d = params();
        for v2 in [0.02, 0.05, 0.08, 0.3] {
            let p = count_zeros_per_period(&d, &lattice(v2), DEFAULT_RESOLUTION, None).unwrap();
            assert!(p.zeros.windows(2).all(|w| w[0].c0 < w[1].c0));
            for z in &p.zeros {
                assert!((0.0..p.period).contains(&z.c0));
                assert!(melnikov(z.c0, &d, &p.lattice).unwrap().abs() < p.zero_tolerance);
            }
        }
    }

    #[test]
    fn irrational_gamma_has_no_period() {
        let l = LatticeConfig::new(0.04, 0.08, 1.0, WaveRatio::sqrt2(), 0.0).unwrap();
        assert!(matches!(
            count_zeros_per_period(&params(), &l, DEFAULT_RESOLUTION, None),
            Err(Error::NoPeriod { .. })
        ));
    }

    #[test]
    fn coarse_resolution_rejected() {
        let l = LatticeConfig::new(0.04, 0.08, 1.0, WaveRatio::integer(5).unwrap(), 0.0).unwrap();
        assert!(matches!(
            count_zeros_per_period(&params(), &l, 32, None),
            Err(Error::ResolutionTooCoarse { .. })
        ));
        assert!(count_zeros_per_period(&params(), &l, 40, None).is_ok());
    }

    #[test]
    fn rational_gamma_period() {
        let l =
            LatticeConfig::new(0.04, 0.08, 1.0, WaveRatio::rational(3, 2).unwrap(), 0.0).unwrap();
        let p = count_zeros_per_period(&params(), &l, DEFAULT_RESOLUTION, None).unwrap();
        assert!((p.period - 2.0 * PI).abs() < 1e-15);
        for i in 0..20 {
            let c = 0.31 * f64::from(i);
            let a = melnikov(c, &params(), &l).unwrap();
            let b = melnikov(c + p.period, &params(), &l).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-3));
        }
    }

    #[test]
    fn boundary_values() {
        let b = boundary_v2b(1.0, -2.0, 0.04).unwrap();
        assert!((b - 0.0466).abs() < 5e-5);
        assert_eq!(boundary_v2b(1.0, -2.0, 0.0).unwrap(), 0.0);
        assert!((boundary_v2b(1e-9, -2.0, 0.04).unwrap() - 0.01).abs() < 1e-15);
        // csch ratio form
        let s = 2f64.sqrt();
        let ratio_form = 0.04 * csch(PI / s) / (8.0 * csch(2.0 * PI / s));
        assert!((b - ratio_form).abs() < 1e-15);
    }

    #[test]
    fn regions_of_figure_two() {
        let d = params();
        assert_eq!(
            classify_region(&d, &lattice(0.08), 1e-9).unwrap().region,
            Region::A
        );
        assert_eq!(
            classify_region(&d, &lattice(0.01), 1e-9).unwrap().region,
            Region::B
        );
        assert_eq!(
            classify_region(&d, &lattice(v2b()), 1e-9).unwrap().region,
            Region::Boundary
        );
        let mut shifted = lattice(0.08);
        shifted.phi = 0.3;
        assert!(classify_region(&d, &shifted, 1e-9).is_err());
    }

    #[test]
    fn predicted_probabilities() {
        let d = params();
        assert!((predicted_probability(&d, &lattice(0.0), 0.17).unwrap() - 0.17).abs() < 1e-15);
        assert!((predicted_probability(&d, &lattice(0.08), 0.17).unwrap() - 0.34).abs() < 1e-15);
        assert_eq!(probability_from_count(0, 0.17), 0.0);
        assert!(predicted_probability(&d, &lattice(0.08), 1.5).is_err());
    }

    #[test]
    fn region_map_marks_bad_cells_without_failing() {
        let d = params();
        let map = region_map(
            &[0.5, 1.0],
            &[0.0, 0.08],
            &d,
            0.04,
            &WaveRatio::integer(2).unwrap(),
            1024,
        )
        .unwrap();
        assert_eq!(map.cells.len(), 4);
        assert_eq!(map.cell(1, 1).label, Some(Region::A));
        assert_eq!(map.cell(1, 1).n, Some(4));

        let pos = DimensionlessParams::new(1.0, -0.5).unwrap();
        let map = region_map(
            &[1.0],
            &[0.08],
            &pos,
            0.04,
            &WaveRatio::integer(2).unwrap(),
            1024,
        )
        .unwrap();
        assert!(map.cells[0].error.is_some());
        assert!(region_map(
            &[1.0, 0.5],
            &[0.0],
            &d,
            0.04,
            &WaveRatio::integer(2).unwrap(),
            1024
        )
        .is_err());
    }
}
