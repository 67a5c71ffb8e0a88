//! Run configuration loaded from TOML.
//!
//! ```toml
//! [dimensionless]          # or a [physical] block, never both
//! D = -2.0                 # or v / alpha / beta, from which D is derived
//! g1 = -0.5
//!
//! [lattice]
//! V1 = 0.04
//! V2 = 0.01
//! k = 1.0
//! gamma = 2                # or { p = 3, q = 2 } or { irrational = "sqrt2" }
//! phi = 0.0                # radians
//!
//! [policy]                 # optional
//! n_iters = 3000
//! drop = 100
//! lambda_threshold = 0.01
//!
//! [montecarlo]             # optional
//! trials = 500
//! seed = 1
//! ```
//!
//! Dotted `key=value` overrides (for example `lattice.V2=0.08`) are applied
//! to the parsed document before it is resolved.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::ClassificationPolicy;
use crate::error::{Error, Result};
use crate::montecarlo::{InitialBox, MonteCarloOptions};
use crate::params::{self, DimensionlessParams, LatticeConfig, PhysicalParams, WaveRatio};

/// `gamma` as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Integer(u32),
    Rational {
        p: u32,
        q: u32,
    },
    Irrational {
        irrational: String,
        value: Option<f64>,
    },
}

impl GammaSpec {
    pub fn resolve(&self) -> Result<WaveRatio> {
        match self {
            GammaSpec::Integer(n) => WaveRatio::integer(*n),
            GammaSpec::Rational { p, q } => WaveRatio::rational(*p, *q),
            GammaSpec::Irrational { irrational, value } => {
                match (WaveRatio::named_irrational(irrational), value) {
                    (Some(named), None) => Ok(named),
                    (Some(named), Some(v)) if (named.value() - v).abs() <= 1e-12 * v.abs() => {
                        Ok(named)
                    }
                    (Some(_), Some(v)) => Err(Error::Config(format!(
                        "gamma: value {v} disagrees with the named irrational `{irrational}`"
                    ))),
                    (None, Some(v)) => WaveRatio::irrational(irrational.clone(), *v),
                    (None, None) => Err(Error::Config(format!(
                        "gamma: unknown irrational `{irrational}`; give an explicit value"
                    ))),
                }
            }
        }
    }

    pub fn from_ratio(r: &WaveRatio) -> Self {
        match r {
            WaveRatio::Rational { p, q: 1 } => GammaSpec::Integer(*p),
            WaveRatio::Rational { p, q } => GammaSpec::Rational { p: *p, q: *q },
            WaveRatio::Irrational { tag, value } => GammaSpec::Irrational {
                irrational: tag.clone(),
                value: Some(*value),
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDimensionless {
    #[serde(rename = "D")]
    d: Option<f64>,
    g1: f64,
    v: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    #[serde(rename = "C", default)]
    c: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLattice {
    #[serde(rename = "V1")]
    v1: f64,
    #[serde(rename = "V2")]
    v2: f64,
    k: f64,
    gamma: GammaSpec,
    #[serde(default)]
    phi: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysical {
    mass: f64,
    omega_r: f64,
    scattering_length: f64,
    k0: f64,
    lattice_wavevector: f64,
    v1: f64,
    v2: f64,
    gamma: GammaSpec,
    #[serde(default)]
    phi: f64,
    #[serde(default)]
    v_lattice: f64,
    #[serde(default)]
    alpha: f64,
    beta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonteCarlo {
    trials: Option<usize>,
    seed: Option<u64>,
    r_range: Option<(f64, f64)>,
    rp_range: Option<(f64, f64)>,
    exclude_unbounded: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSoliton {
    c0: Option<f64>,
    xi0: Option<f64>,
    theta_offset: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    physical: Option<RawPhysical>,
    dimensionless: Option<RawDimensionless>,
    lattice: Option<RawLattice>,
    policy: Option<ClassificationPolicy>,
    montecarlo: Option<RawMonteCarlo>,
    soliton: Option<RawSoliton>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSettings {
    pub trials: usize,
    pub seed: u64,
    pub options: MonteCarloOptions,
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        MonteCarloSettings {
            trials: 500,
            seed: 1,
            options: MonteCarloOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolitonSettings {
    pub c0: f64,
    pub xi0: f64,
    pub theta_offset: f64,
}

/// Fully resolved parameters of one run; embedded in every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// SI input, when the run was configured physically.
    pub physical: Option<PhysicalParams>,
    pub params: DimensionlessParams,
    pub lattice: LatticeConfig,
    pub policy: ClassificationPolicy,
    pub montecarlo: MonteCarloSettings,
    pub soliton: SolitonSettings,
}

impl RunConfig {
    /// Static superlattice with `D = -2`, `g1 = -0.5`, `V1 = 0.04`,
    /// `V2 = 0.01`, `k = 1`, `gamma = 2`, `phi = 0`.
    pub fn reference() -> Self {
        RunConfig {
            physical: None,
            params: DimensionlessParams::new(-2.0, -0.5).expect("finite"),
            lattice: LatticeConfig::new(
                0.04,
                0.01,
                1.0,
                WaveRatio::integer(2).expect("nonzero"),
                0.0,
            )
            .expect("valid lattice"),
            policy: ClassificationPolicy::default(),
            montecarlo: MonteCarloSettings::default(),
            soliton: SolitonSettings::default(),
        }
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let raw: RawConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        resolve(raw)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, overrides)
    }

    /// Single-line JSON snapshot.
    pub fn snapshot(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let (physical, params, lattice) = match (raw.physical, raw.dimensionless, raw.lattice) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(Error::Config(
                "give either [physical] or [dimensionless] + [lattice], not both".into(),
            ))
        }
        (Some(p), None, None) => {
            let p = PhysicalParams {
                mass: p.mass,
                omega_r: p.omega_r,
                scattering_length: p.scattering_length,
                k0: p.k0,
                lattice_wavevector: p.lattice_wavevector,
                v1: p.v1,
                v2: p.v2,
                gamma: p.gamma.resolve()?,
                phi: p.phi,
                v_lattice: p.v_lattice,
                alpha: p.alpha,
                beta: p.beta,
            };
            let (d, l) = params::reduce_to_dimensionless(&p)?;
            (Some(p), d, l)
        }
        (None, Some(d), Some(l)) => {
            let params = match (d.d, d.v, d.alpha, d.beta) {
                (Some(dv), None, None, None) => DimensionlessParams::new(dv, d.g1)?,
                (None, v, alpha, Some(beta)) => DimensionlessParams::from_ansatz(
                    v.unwrap_or(0.0),
                    alpha.unwrap_or(0.0),
                    beta,
                    d.g1,
                )?,
                (Some(_), ..) => {
                    return Err(Error::Config(
                        "[dimensionless]: give D or (v, alpha, beta), not both".into(),
                    ))
                }
                (None, ..) => {
                    return Err(Error::Config(
                        "[dimensionless]: D or beta is required".into(),
                    ))
                }
            }
            .with_c(d.c)?;
            let lattice = LatticeConfig::new(l.v1, l.v2, l.k, l.gamma.resolve()?, l.phi)?;
            (None, params, lattice)
        }
        (None, None, _) | (None, _, None) => {
            return Err(Error::Config(
                "missing parameters: need [physical] or both [dimensionless] and [lattice]".into(),
            ))
        }
    };

    let policy = raw.policy.unwrap_or_default();
    policy.validate()?;

    let mut montecarlo = MonteCarloSettings::default();
    if let Some(mc) = raw.montecarlo {
        let defaults = InitialBox::default();
        montecarlo = MonteCarloSettings {
            trials: mc.trials.unwrap_or(montecarlo.trials),
            seed: mc.seed.unwrap_or(montecarlo.seed),
            options: MonteCarloOptions {
                initial_box: InitialBox {
                    r: mc.r_range.unwrap_or(defaults.r),
                    rp: mc.rp_range.unwrap_or(defaults.rp),
                },
                exclude_unbounded: mc.exclude_unbounded.unwrap_or(false),
            },
        };
    }
    montecarlo.options.initial_box.validate()?;

    let soliton = raw
        .soliton
        .map(|s| SolitonSettings {
            c0: s.c0.unwrap_or(0.0),
            xi0: s.xi0.unwrap_or(0.0),
            theta_offset: s.theta_offset.unwrap_or(0.0),
        })
        .unwrap_or_default();

    Ok(RunConfig {
        physical,
        params,
        lattice,
        policy,
        montecarlo,
        soliton,
    })
}

/// Applies `a.b.c=value`. The value is read as a TOML literal when it
/// parses as one (numbers, booleans, inline tables, arrays) and as a bare
/// string otherwise.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!(
            "override `{assignment}` has an empty key"
        )));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = keys.split_last().expect("non-empty");
    let mut table = doc;
    for key in parents {
        let entry = table
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| {
            Error::Config(format!("override `{assignment}`: `{key}` is not a table"))
        })?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}
