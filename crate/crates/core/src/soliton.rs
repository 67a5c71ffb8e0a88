//! Bright soliton of the undriven equation and its first-order response to
//! the superlattice drive.
//!
//! With `s = sqrt(-D)` and `u = s (xi + c0)` the zeroth order is the
//! homoclinic orbit `R0 = sqrt(2D/g1) sech u`. The homogeneous first-order
//! equation `w'' + D w - 3 g1 R0^2 w = 0` has the solutions `f = R0'` and
//! `h = f * int f^-2`, normalized so that `f h' - f' h = 1`:
//!
//! ```text
//! h = -sqrt(-2 g1) / (8 (-D)^(3/2)) * sech u tanh u * (6u - 4 coth u + sinh 2u)
//!   = -sqrt(-2 g1) / (8 (-D)^(3/2)) * (6 u tanh u sech u - 4 sech u + 2 tanh u sinh u)
//! ```
//!
//! The second line is algebraically identical and has no singularity at the
//! soliton peak. The driven correction is
//! `R1 = h int_P^xi f eps - f int_Q^xi h eps` with `P -> -inf`; it stays
//! bounded iff `int f eps` over the whole line (the Melnikov function)
//! vanishes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DimensionlessParams, LatticeConfig};
use crate::quadrature::{self, QuadOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonConfig {
    pub params: DimensionlessParams,
    pub lattice: LatticeConfig,
    /// Integration constant locating the soliton peak at `xi = -c0`.
    pub c0: f64,
    /// Combined initial coordinate `k0 (x0 + v_L t0)`.
    pub xi0: f64,
    #[serde(skip)]
    cache: Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Derived {
    rate: f64,
    amplitude: f64,
    h_scale: f64,
}

impl SolitonConfig {
    pub fn new(
        params: DimensionlessParams,
        lattice: LatticeConfig,
        c0: f64,
        xi0: f64,
    ) -> Result<Self> {
        params.require_soliton_regime()?;
        lattice.validate()?;
        if !(c0.is_finite() && xi0.is_finite()) {
            return Err(Error::invalid("c0/xi0", "must be finite"));
        }
        let (d, g1) = (params.d(), params.g1());
        let rate = (-d).sqrt();
        let cache = Derived {
            rate,
            amplitude: (2.0 * d / g1).sqrt(),
            h_scale: -(-2.0 * g1).sqrt() / (8.0 * (-d).powf(1.5)),
        };
        Ok(SolitonConfig {
            params,
            lattice,
            c0,
            xi0,
            cache,
        })
    }

    /// Builds the configuration whose homoclinic orbit passes through
    /// `R(xi0) = r_at_xi0` with the given slope sign.
    pub fn from_condition(
        params: DimensionlessParams,
        lattice: LatticeConfig,
        xi0: f64,
        r_at_xi0: f64,
        slope_sign: f64,
    ) -> Result<Self> {
        let c0 = c0_from_condition(xi0, r_at_xi0, slope_sign, &params)?;
        Self::new(params, lattice, c0, xi0)
    }

    /// `sqrt(-D)`.
    pub fn decay_rate(&self) -> f64 {
        self.cache.rate
    }

    /// Peak value `sqrt(2D/g1)`.
    pub fn amplitude(&self) -> f64 {
        self.cache.amplitude
    }

    fn u(&self, xi: f64) -> f64 {
        self.cache.rate * (xi + self.c0)
    }
}

/// Homoclinic (bright-soliton) amplitude `R0(xi)`.
pub fn r0(xi: f64, cfg: &SolitonConfig) -> f64 {
    cfg.amplitude() / cfg.u(xi).cosh()
}

/// `f = dR0/dxi = D sqrt(2/-g1) sech u tanh u`.
pub fn f(xi: f64, cfg: &SolitonConfig) -> f64 {
    let u = cfg.u(xi);
    -cfg.amplitude() * cfg.decay_rate() * u.tanh() / u.cosh()
}

/// Second homogeneous solution with unit Wronskian against [`f`].
pub fn h(xi: f64, cfg: &SolitonConfig) -> f64 {
    let u = cfg.u(xi);
    let t = u.tanh();
    let sech = 1.0 / u.cosh();
    cfg.cache.h_scale * (6.0 * u * t * sech - 4.0 * sech + 2.0 * t * u.sinh())
}

/// `df/dxi`.
pub fn f_prime(xi: f64, cfg: &SolitonConfig) -> f64 {
    let u = cfg.u(xi);
    let t = u.tanh();
    let s = cfg.decay_rate();
    -cfg.amplitude() * s * s * (1.0 - 2.0 * t * t) / u.cosh()
}

/// `dh/dxi`.
pub fn h_prime(xi: f64, cfg: &SolitonConfig) -> f64 {
    let u = cfg.u(xi);
    let t = u.tanh();
    let sech = 1.0 / u.cosh();
    let g = 12.0 * t * sech + 6.0 * u * sech * (1.0 - 2.0 * t * t) + 2.0 * u.sinh();
    cfg.cache.h_scale * cfg.decay_rate() * g
}

/// `f h' - f' h`; identically 1.
pub fn wronskian(xi: f64, cfg: &SolitonConfig) -> f64 {
    f(xi, cfg) * h_prime(xi, cfg) - f_prime(xi, cfg) * h(xi, cfg)
}

/// Drive term `eps = [V1 cos^2(k xi) + V2 cos^2(gamma k xi + phi)] R0`.
pub fn epsilon(xi: f64, cfg: &SolitonConfig) -> f64 {
    cfg.lattice.potential(xi) * r0(xi, cfg)
}

/// Integration constant `c0` placing the point `(xi0, R)` on the homoclinic
/// orbit; `slope_sign` picks the rising (+1) or falling (-1) flank and is
/// ignored at the peak.
pub fn c0_from_condition(
    xi0: f64,
    r_at_xi0: f64,
    slope_sign: f64,
    d: &DimensionlessParams,
) -> Result<f64> {
    d.require_soliton_regime()?;
    let rate = (-d.d()).sqrt();
    let peak = (2.0 * d.d() / d.g1()).sqrt();
    if !(r_at_xi0 > 0.0 && r_at_xi0 <= peak * (1.0 + 4.0 * f64::EPSILON)) {
        return Err(Error::OffOrbit {
            value: r_at_xi0,
            peak,
        });
    }
    let ratio = (r_at_xi0 / peak).min(1.0);
    let arsech = (1.0 / ratio).acosh();
    // R0' < 0 for u > 0, so a rising flank needs u(xi0) < 0.
    let u0 = if slope_sign > 0.0 { -arsech } else { arsech };
    Ok(u0 / rate - xi0)
}

/// Settings for the first-order correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FirstOrderOptions {
    /// Half-width `L` of the window standing in for infinite limits;
    /// defaults to `40 / sqrt(-D)`.
    pub cutoff: Option<f64>,
    /// Reference point `Q` of the second integral; defaults to the soliton
    /// peak `-c0`.
    pub q_ref: Option<f64>,
    pub quad_tol: f64,
    /// `|I+|` below this fraction of `int |f eps|` counts as zero.
    pub bound_tol: f64,
}

impl Default for FirstOrderOptions {
    fn default() -> Self {
        FirstOrderOptions {
            cutoff: None,
            q_ref: None,
            quad_tol: 1e-13,
            bound_tol: 1e-8,
        }
    }
}

/// Precomputed first-order solution for one configuration.
#[derive(Debug, Clone)]
pub struct FirstOrder {
    cfg: SolitonConfig,
    cutoff: f64,
    q_ref: f64,
    quad_tol: f64,
    /// `int f eps` over the whole line.
    pub i_plus: f64,
    /// `int |f eps|` over the whole line.
    pub scale: f64,
    /// Whether the boundedness condition holds within `bound_tol`.
    pub bounded: bool,
}

fn tail_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_intervals: 20_000,
    }
}

impl FirstOrder {
    pub fn new(cfg: &SolitonConfig, opts: &FirstOrderOptions) -> Result<Self> {
        let cutoff = opts.cutoff.unwrap_or(40.0 / cfg.decay_rate());
        if !(cutoff > 0.0) {
            return Err(Error::invalid("cutoff", "must be positive"));
        }
        let q_ref = opts.q_ref.unwrap_or(-cfg.c0);
        let lo = -cfg.c0 - cutoff;
        let hi = -cfg.c0 + cutoff;
        let i_plus = if cfg.lattice.is_undriven() {
            0.0
        } else {
            quadrature::integrate(
                |x| f(x, cfg) * epsilon(x, cfg),
                lo,
                hi,
                QuadOptions::absolute(opts.quad_tol),
            )?
            .value
        };
        let scale = quadrature::integrate(
            |x| (f(x, cfg) * epsilon(x, cfg)).abs(),
            lo,
            hi,
            QuadOptions::absolute(opts.quad_tol),
        )?
        .value;
        let bounded = i_plus.abs() <= opts.bound_tol * scale;
        if !bounded {
            log::warn!(
                "boundedness condition fails at c0 = {}: |I+| = {:e}; first-order correction grows like h",
                cfg.c0,
                i_plus.abs()
            );
        }
        Ok(FirstOrder {
            cfg: cfg.clone(),
            cutoff,
            q_ref,
            quad_tol: opts.quad_tol,
            i_plus,
            scale,
            bounded,
        })
    }

    pub fn config(&self) -> &SolitonConfig {
        &self.cfg
    }

    /// `int_{-inf}^xi f eps`, split at the peak so each side is computed from
    /// its own decaying tail. On the bounded branch the full-line integral is
    /// taken as exactly zero.
    fn lower_integral(&self, xi: f64) -> Result<f64> {
        let cfg = &self.cfg;
        let peak = -cfg.c0;
        let fe = |x: f64| f(x, cfg) * epsilon(x, cfg);
        if xi <= peak {
            Ok(quadrature::integrate(fe, xi - self.cutoff, xi, tail_opts())?.value)
        } else {
            let total = if self.bounded { 0.0 } else { self.i_plus };
            let tail = quadrature::integrate(fe, xi, xi + self.cutoff, tail_opts())?.value;
            Ok(total - tail)
        }
    }

    /// First-order correction `R1(xi)`.
    pub fn r1(&self, xi: f64) -> Result<f64> {
        if self.cfg.lattice.is_undriven() {
            return Ok(0.0);
        }
        let cfg = &self.cfg;
        let lower = self.lower_integral(xi)?;
        let second = quadrature::integrate(
            |x| h(x, cfg) * epsilon(x, cfg),
            self.q_ref,
            xi,
            QuadOptions {
                abs_tol: self.quad_tol,
                rel_tol: 1e-12,
                max_intervals: 50_000,
            },
        )?
        .value;
        Ok(h(xi, cfg) * lower - f(xi, cfg) * second)
    }
}

/// `R1(xi)` with a fresh [`FirstOrder`]; prefer building one `FirstOrder`
/// when evaluating many points.
pub fn r1(xi: f64, cfg: &SolitonConfig, opts: &FirstOrderOptions) -> Result<f64> {
    FirstOrder::new(cfg, opts)?.r1(xi)
}

/// Boundedness integrals `(I+, I-) = (int_P^{+L} f eps, int_P^{-L} f eps)`
/// with `+-L` measured from the soliton peak. `P` defaults to the lower
/// cutoff, so `I-` vanishes and `I+ - I-` is the Melnikov integral.
pub fn boundedness_integrals(
    cfg: &SolitonConfig,
    cutoff: f64,
    p_limit: Option<f64>,
    quad_tol: f64,
) -> Result<(f64, f64)> {
    let lo = -cfg.c0 - cutoff;
    let hi = -cfg.c0 + cutoff;
    let p = p_limit.unwrap_or(lo);
    let fe = |x: f64| f(x, cfg) * epsilon(x, cfg);
    let opts = QuadOptions::absolute(quad_tol);
    let i_plus = quadrature::integrate(fe, p, hi, opts)?.value;
    let i_minus = quadrature::integrate(fe, p, lo, opts)?.value;
    Ok((i_plus, i_minus))
}

/// Residual `R'' + D R - g1 R^3 - V(xi) R` of the full amplitude equation
/// for `R = R0 + R1`, with `R''` from a five-point stencil of width `step`.
pub fn equation_residual(xi: f64, first: &FirstOrder, step: f64) -> Result<f64> {
    let cfg = first.config();
    let r = |x: f64| -> Result<f64> { Ok(r0(x, cfg) + first.r1(x)?) };
    let (m2, m1, c, p1, p2) = (
        r(xi - 2.0 * step)?,
        r(xi - step)?,
        r(xi)?,
        r(xi + step)?,
        r(xi + 2.0 * step)?,
    );
    let second = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * step * step);
    let d = &cfg.params;
    Ok(second + d.d() * c - d.g1() * c * c * c - cfg.lattice.potential(xi) * c)
}

/// Conversion from SI `(x, t)` to the dimensionless `X = k0 x`,
/// `tau = E_r0 t / hbar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScale {
    pub k0: f64,
    /// `E_r0 / hbar`, 1/s.
    pub recoil_rate: f64,
}

impl PhysicalScale {
    pub fn from_physical(p: &crate::params::PhysicalParams) -> Self {
        PhysicalScale {
            k0: p.k0,
            recoil_rate: p.recoil_energy() / crate::params::HBAR,
        }
    }

    /// Unit scale: coordinates are already dimensionless.
    pub fn unit() -> Self {
        PhysicalScale {
            k0: 1.0,
            recoil_rate: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSample {
    pub xi: f64,
    pub r0: f64,
    pub r1: f64,
    pub r: f64,
    pub theta: f64,
    pub psi_re: f64,
    pub psi_im: f64,
    /// `|R1| / |R0|`; the expansion is trustworthy while this is small.
    pub perturb_ratio: f64,
}

/// Phase `theta(xi) = -(v/2 + alpha) xi + offset` of the `C = 0` branch.
pub fn theta(xi: f64, d: &DimensionlessParams, offset: f64) -> f64 {
    -(0.5 * d.v() + d.alpha()) * xi + offset
}

fn sample_at(
    x_dimless: f64,
    tau: f64,
    first: &FirstOrder,
    theta_offset: f64,
) -> Result<WaveSample> {
    let cfg = first.config();
    let d = &cfg.params;
    let xi = x_dimless + d.v() * tau;
    let r0v = r0(xi, cfg);
    let r1v = first.r1(xi)?;
    let r = r0v + r1v;
    let th = theta(xi, d, theta_offset);
    let psi = Complex64::from_polar(r, th + d.alpha() * x_dimless + d.beta() * tau);
    Ok(WaveSample {
        xi,
        r0: r0v,
        r1: r1v,
        r,
        theta: th,
        psi_re: psi.re,
        psi_im: psi.im,
        perturb_ratio: if r0v == 0.0 {
            f64::INFINITY
        } else {
            (r1v / r0v).abs()
        },
    })
}

/// Condensate wavefunction `Psi(x, t) = R(xi) exp(i[theta(xi) + alpha x + beta t])`
/// at SI coordinates, with `R = R0 + R1`.
pub fn wavefunction(
    x: f64,
    t: f64,
    first: &FirstOrder,
    scale: &PhysicalScale,
    theta_offset: f64,
) -> Result<Complex64> {
    let s = sample_at(scale.k0 * x, scale.recoil_rate * t, first, theta_offset)?;
    Ok(Complex64::new(s.psi_re, s.psi_im))
}

/// Profile at `t = 0` over the given `xi` values.
pub fn wave_profile(xis: &[f64], first: &FirstOrder, theta_offset: f64) -> Result<Vec<WaveSample>> {
    use rayon::prelude::*;
    xis.par_iter()
        .map(|&xi| sample_at(xi, 0.0, first, theta_offset))
        .collect()
}
