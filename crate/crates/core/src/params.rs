//! Physical and dimensionless parameters of the condensate in a moving
//! optical superlattice, and the reduction between them.
//!
//! Everything downstream of this module works in the dimensionless frame
//! `xi = k0 (x + v_L t)`, where the amplitude equation (with the angular
//! integration constant fixed to zero) is the driven Duffing equation
//!
//! ```text
//! R'' = g1 R^3 - D R + [V1 cos^2(k xi) + V2 cos^2(gamma k xi + phi)] R
//! ```

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::PhaseState;
use crate::error::{Error, Result};

/// Reduced Planck constant (CODATA 2018), J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Largest denominator checked when validating that an irrational-flagged
/// ratio is not a small-denominator rational in disguise.
const IRRATIONAL_PROBE_DENOMINATOR: u32 = 64;

/// Ratio gamma of the secondary to primary lattice wave vector.
///
/// Rationality is declared, not inferred from the float: period-dependent
/// code branches on the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveRatio {
    Rational { p: u32, q: u32 },
    Irrational { tag: String, value: f64 },
}

impl WaveRatio {
    /// Rational ratio `p / q`, reduced to lowest terms.
    pub fn rational(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::invalid(
                "gamma",
                format!("p/q = {p}/{q} must be positive"),
            ));
        }
        let g = gcd(p, q);
        Ok(WaveRatio::Rational { p: p / g, q: q / g })
    }

    pub fn integer(n: u32) -> Result<Self> {
        Self::rational(n, 1)
    }

    /// Ratio flagged irrational. Values that coincide with a rational of small
    /// denominator are rejected as an inconsistent flag.
    pub fn irrational(tag: impl Into<String>, value: f64) -> Result<Self> {
        let tag = tag.into();
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::invalid(
                "gamma",
                format!("irrational ratio `{tag}` = {value} must be positive"),
            ));
        }
        for q in 1..=IRRATIONAL_PROBE_DENOMINATOR {
            let qf = f64::from(q);
            let p = (value * qf).round();
            if (value - p / qf).abs() <= 1e-12 * value.max(1.0) {
                return Err(Error::invalid(
                    "gamma",
                    format!("`{tag}` = {value} equals the rational {p}/{q}; it cannot be flagged irrational"),
                ));
            }
        }
        Ok(WaveRatio::Irrational { tag, value })
    }

    pub fn sqrt2() -> Self {
        WaveRatio::Irrational {
            tag: "sqrt2".into(),
            value: std::f64::consts::SQRT_2,
        }
    }

    pub fn golden() -> Self {
        WaveRatio::Irrational {
            tag: "golden".into(),
            value: (1.0 + 5f64.sqrt()) / 2.0,
        }
    }

    /// Resolve a named irrational constant.
    pub fn named_irrational(tag: &str) -> Option<Self> {
        match tag {
            "sqrt2" => Some(Self::sqrt2()),
            "golden" => Some(Self::golden()),
            "sqrt3" => Some(WaveRatio::Irrational {
                tag: "sqrt3".into(),
                value: 3f64.sqrt(),
            }),
            "sqrt5" => Some(WaveRatio::Irrational {
                tag: "sqrt5".into(),
                value: 5f64.sqrt(),
            }),
            "pi" => Some(WaveRatio::Irrational {
                tag: "pi".into(),
                value: PI,
            }),
            _ => None,
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            WaveRatio::Rational { p, q } => f64::from(*p) / f64::from(*q),
            WaveRatio::Irrational { value, .. } => *value,
        }
    }

    /// `Some(N)` when the ratio is a positive integer.
    pub fn as_integer(&self) -> Option<u32> {
        match self {
            WaveRatio::Rational { p, q: 1 } => Some(*p),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, WaveRatio::Rational { .. })
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            WaveRatio::Rational { p, q } => {
                if *p == 0 || *q == 0 {
                    return Err(Error::invalid("gamma", "p and q must be positive"));
                }
                if gcd(*p, *q) != 1 {
                    return Err(Error::invalid(
                        "gamma",
                        format!("{p}/{q} is not in lowest terms"),
                    ));
                }
                Ok(())
            }
            WaveRatio::Irrational { tag, value } => {
                Self::irrational(tag.clone(), *value).map(|_| ())
            }
        }
    }
}

impl fmt::Display for WaveRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaveRatio::Rational { p, q: 1 } => write!(f, "{p}"),
            WaveRatio::Rational { p, q } => write!(f, "{p}/{q}"),
            WaveRatio::Irrational { tag, value } => write!(f, "{tag}({value})"),
        }
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// SI description of the condensate and the superlattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Atomic mass, kg.
    pub mass: f64,
    /// Transverse trap frequency, rad/s.
    pub omega_r: f64,
    /// s-wave scattering length, m. Negative for the bright-soliton regime.
    pub scattering_length: f64,
    /// Unit of wave vector k0, 1/m.
    pub k0: f64,
    /// Primary lattice wave vector, 1/m.
    pub lattice_wavevector: f64,
    /// Lattice depths, J.
    pub v1: f64,
    pub v2: f64,
    pub gamma: WaveRatio,
    /// Phase difference of the secondary lattice, rad.
    pub phi: f64,
    /// Lattice velocity v_L, m/s.
    pub v_lattice: f64,
    /// Ansatz constants alpha (1/m) and beta (1/s).
    pub alpha: f64,
    pub beta: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("mass", self.mass),
            ("omega_r", self.omega_r),
            ("k0", self.k0),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be positive and finite, got {value}"),
                ));
            }
        }
        if !(self.lattice_wavevector.is_finite() && self.lattice_wavevector > 0.0) {
            return Err(Error::invalid("lattice_wavevector", "must be positive"));
        }
        for (name, value) in [
            ("scattering_length", self.scattering_length),
            ("v1", self.v1),
            ("v2", self.v2),
            ("phi", self.phi),
            ("v_lattice", self.v_lattice),
            ("alpha", self.alpha),
            ("beta", self.beta),
        ] {
            if !value.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.v1 < 0.0 || self.v2 < 0.0 {
            return Err(Error::invalid(
                "v1/v2",
                "lattice depths must be non-negative",
            ));
        }
        self.gamma.validate()
    }

    /// Recoil energy `E_r0 = hbar^2 k0^2 / (2 m)`.
    pub fn recoil_energy(&self) -> f64 {
        recoil_energy(self.mass, self.k0)
    }

    /// Radial oscillator length `l_r = sqrt(hbar / (m omega_r))`.
    pub fn radial_length(&self) -> f64 {
        (HBAR / (self.mass * self.omega_r)).sqrt()
    }
}

fn recoil_energy(mass: f64, k0: f64) -> f64 {
    HBAR * HBAR * k0 * k0 / (2.0 * mass)
}

/// Constants of the reduced amplitude equation.
///
/// `D = v^2/4 + v alpha - beta` always holds for the stored values, and the
/// angular integration constant `C` is fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    d: f64,
    g1: f64,
    v: f64,
    alpha: f64,
    beta: f64,
    c: f64,
}

impl DimensionlessParams {
    /// Build from the reduced velocity and ansatz constants; `D` is derived.
    pub fn from_ansatz(v: f64, alpha: f64, beta: f64, g1: f64) -> Result<Self> {
        for (name, value) in [("v", v), ("alpha", alpha), ("beta", beta), ("g1", g1)] {
            if !value.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        let d = v * v / 4.0 + v * alpha - beta;
        let params = DimensionlessParams {
            d,
            g1,
            v,
            alpha,
            beta,
            c: 0.0,
        };
        params.warn_if_outside_soliton_regime();
        Ok(params)
    }

    /// Static-lattice parameters (`v = alpha = 0`, so `beta = -D`).
    pub fn new(d: f64, g1: f64) -> Result<Self> {
        if !d.is_finite() {
            return Err(Error::invalid("D", "must be finite"));
        }
        Self::from_ansatz(0.0, 0.0, -d, g1)
    }

    /// Rejects any non-zero angular integration constant.
    pub fn with_c(self, c: f64) -> Result<Self> {
        if c != 0.0 {
            return Err(Error::invalid(
                "C",
                format!("only C = 0 (the driven Duffing branch) is supported, got {c}"),
            ));
        }
        Ok(self)
    }

    fn warn_if_outside_soliton_regime(&self) {
        if self.d >= 0.0 || self.g1 >= 0.0 {
            log::warn!(
                "D = {}, g1 = {}: outside the bright-soliton regime (need D < 0, g1 < 0)",
                self.d,
                self.g1
            );
        }
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn g1(&self) -> f64 {
        self.g1
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn in_soliton_regime(&self) -> bool {
        self.d < 0.0 && self.g1 < 0.0
    }

    /// `sqrt(-D)`, the inverse soliton width; domain error unless `D < 0`.
    pub fn decay_rate(&self) -> Result<f64> {
        if self.d < 0.0 {
            Ok((-self.d).sqrt())
        } else {
            Err(Error::Domain(format!("D = {} must be negative", self.d)))
        }
    }

    pub(crate) fn require_soliton_regime(&self) -> Result<()> {
        if self.d >= 0.0 {
            return Err(Error::Domain(format!("D = {} must be negative", self.d)));
        }
        if self.g1 >= 0.0 {
            return Err(Error::Domain(format!("g1 = {} must be negative", self.g1)));
        }
        Ok(())
    }
}

/// Dimensionless superlattice drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub v1: f64,
    pub v2: f64,
    pub k: f64,
    pub gamma: WaveRatio,
    pub phi: f64,
}

impl LatticeConfig {
    pub fn new(v1: f64, v2: f64, k: f64, gamma: WaveRatio, phi: f64) -> Result<Self> {
        let lattice = LatticeConfig {
            v1,
            v2,
            k,
            gamma,
            phi,
        };
        lattice.validate()?;
        Ok(lattice)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v1.is_finite() && self.v1 >= 0.0) {
            return Err(Error::invalid(
                "V1",
                format!("must be >= 0, got {}", self.v1),
            ));
        }
        if !(self.v2.is_finite() && self.v2 >= 0.0) {
            return Err(Error::invalid(
                "V2",
                format!("must be >= 0, got {}", self.v2),
            ));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::invalid("k", format!("must be > 0, got {}", self.k)));
        }
        if !self.phi.is_finite() {
            return Err(Error::invalid("phi", "must be finite"));
        }
        self.gamma.validate()
    }

    pub fn gamma_value(&self) -> f64 {
        self.gamma.value()
    }

    pub fn is_undriven(&self) -> bool {
        self.v1 == 0.0 && self.v2 == 0.0
    }

    /// Superlattice potential `V1 cos^2(k xi) + V2 cos^2(gamma k xi + phi)`.
    #[inline]
    pub fn potential(&self, xi: f64) -> f64 {
        let kx = self.k * xi;
        let c1 = kx.cos();
        let c2 = (self.gamma.value() * kx + self.phi).cos();
        self.v1 * c1 * c1 + self.v2 * c2 * c2
    }

    /// Stroboscopic drive period: `q pi / k` for `gamma = p/q`, `pi / k`
    /// (primary period) for irrational `gamma`.
    pub fn drive_period(&self) -> f64 {
        match self.gamma {
            WaveRatio::Rational { q, .. } => f64::from(q) * PI / self.k,
            WaveRatio::Irrational { .. } => PI / self.k,
        }
    }
}

/// Converts SI parameters to the dimensionless frame.
pub fn reduce_to_dimensionless(p: &PhysicalParams) -> Result<(DimensionlessParams, LatticeConfig)> {
    p.validate()?;
    let e_r0 = p.recoil_energy();
    let l_r = p.radial_length();
    let v = 2.0 * p.mass * p.v_lattice / (HBAR * p.k0);
    let beta = HBAR * p.beta / e_r0;
    let alpha = p.alpha / p.k0;
    let g1 = 4.0 * p.scattering_length / (p.k0 * l_r * l_r);
    let dimless = DimensionlessParams::from_ansatz(v, alpha, beta, g1)?;
    let lattice = LatticeConfig::new(
        p.v1 / e_r0,
        p.v2 / e_r0,
        p.lattice_wavevector / p.k0,
        p.gamma.clone(),
        p.phi,
    )?;
    Ok((dimless, lattice))
}

/// Inverse of [`reduce_to_dimensionless`] for a given mass, trap frequency
/// and wave-vector unit.
pub fn rescale_to_physical(
    d: &DimensionlessParams,
    l: &LatticeConfig,
    mass: f64,
    omega_r: f64,
    k0: f64,
) -> Result<PhysicalParams> {
    let e_r0 = recoil_energy(mass, k0);
    let l_r2 = HBAR / (mass * omega_r);
    let params = PhysicalParams {
        mass,
        omega_r,
        scattering_length: d.g1 * k0 * l_r2 / 4.0,
        k0,
        lattice_wavevector: l.k * k0,
        v1: l.v1 * e_r0,
        v2: l.v2 * e_r0,
        gamma: l.gamma.clone(),
        phi: l.phi,
        v_lattice: d.v * HBAR * k0 / (2.0 * mass),
        alpha: d.alpha * k0,
        beta: d.beta * e_r0 / HBAR,
    };
    params.validate()?;
    Ok(params)
}

/// Right-hand side of the driven Duffing system `(R', R'')`.
#[inline]
pub fn duffing_rhs(
    s: PhaseState,
    xi: f64,
    d: &DimensionlessParams,
    l: &LatticeConfig,
) -> PhaseState {
    let r = s.r;
    PhaseState {
        r: s.rp,
        rp: d.g1 * r * r * r - d.d * r + l.potential(xi) * r,
    }
}
