//! Thresholds, parameter sweeps and reference baselines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::encoding::pfail_bound;
use crate::error::{Error, Result};
use crate::markov::{
    build_level2_chain, build_level3_chain, propagated_bit_error, steady_state, ErrorChain,
};
use crate::netsim::{estimate_logical_rate, GateNoise, RunOptions, ScheduleKind, StopRule};
use crate::rates::{derive_rates, WIRE_PREP_SHARE};

/// Measurement error of the unitary encoder per unit `p` at small `p`.
pub const MEASUREMENT_SLOPE: f64 = 32.0 / 63.0;

/// A bracketed root of a scalar function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: f64,
    /// `f(lo) < 0 <= f(hi)`.
    pub lo: f64,
    pub hi: f64,
}

/// Bisection for a sign change from negative at `lo` to non-negative at
/// `hi`, stopping once the bracket is narrower than `tol`.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if !(f_lo < 0.0 && f_hi >= 0.0) {
        return Err(Error::NoCrossing {
            what: "bisection bracket",
            lo,
            hi,
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Root {
        value: 0.5 * (lo + hi),
        lo,
        hi,
    })
}

const THRESHOLD_SCAN_MAX: f64 = 0.25;
const THRESHOLD_SCAN_STEPS: usize = 100;
const ROOT_TOL: f64 = 1e-6;

/// The error rate at which the per-phase logical failure probability
/// first reaches the component error rate itself.
///
/// Scans `(0, 0.25]` on a uniform grid for the first point where
/// `p_ss(e) >= e`, then bisects the enclosing cell.
pub fn correction_threshold(chain: &ErrorChain) -> Result<Root> {
    let gap = |e: f64| -> Result<f64> { Ok(steady_state(chain, e)?.p_ss - e) };
    let step = THRESHOLD_SCAN_MAX / THRESHOLD_SCAN_STEPS as f64;
    let mut prev = 1e-9;
    for k in 1..=THRESHOLD_SCAN_STEPS {
        let e = step * k as f64;
        if gap(e)? >= 0.0 {
            return bisect(gap, prev, e, ROOT_TOL);
        }
        prev = e;
    }
    Err(Error::NoCrossing {
        what: "p_ss(epsilon) - epsilon",
        lo: 0.0,
        hi: THRESHOLD_SCAN_MAX,
    })
}

/// Error of one output bit of a target MAJ3 in a transversal logical MAJ
/// whose inputs come from coded bits in steady state.
pub fn computation_target_error(chain: &ErrorChain, p: f64) -> Result<f64> {
    let r = derive_rates(p)?;
    let eps = r.maj3.epsilon;
    let eps_prime = r.maj3.epsilon_prime;
    let eta = propagated_bit_error(chain, eps)?;
    let p_in = eps_prime + (1.0 - eps_prime) * eta;
    Ok(1.0 - (1.0 - p_in).powi(2) * (1.0 - eps) * (1.0 - WIRE_PREP_SHARE * p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniversalThreshold {
    pub p_star: f64,
    pub eps_star: f64,
    pub bracket: Root,
}

/// Largest `p` for which a computational step still leaves target bits
/// with error below 1/2, using the level-3 chain for the input bits.
pub fn universal_threshold() -> Result<UniversalThreshold> {
    universal_threshold_with(&build_level3_chain()?)
}

pub fn universal_threshold_with(chain: &ErrorChain) -> Result<UniversalThreshold> {
    let root = bisect(
        |p| Ok(computation_target_error(chain, p)? - 0.5),
        0.0,
        0.2,
        ROOT_TOL,
    )?;
    Ok(UniversalThreshold {
        p_star: root.value,
        eps_star: derive_rates(root.value)?.maj3.epsilon,
        bracket: root,
    })
}

/// Logical error of a hypothetical concatenated code with threshold `1/t`
/// at `levels` levels: `t^(2^L - 1) e^(2^L)`.
pub fn concat_baseline(t: u32, levels: u32, epsilon: f64) -> f64 {
    let t = t as f64;
    (t * epsilon).powi(1 << levels) / t
}

/// Asymptotic `(measurement, feedback)` error of the unitary replacement
/// of a measure-and-feed-back step: `(32/63) p` and `p + (32/63) p`.
pub fn feedback_constants(p: f64) -> Result<(f64, f64)> {
    if !(p >= 0.0) {
        return Err(Error::OutOfDomain {
            name: "p",
            value: p,
            domain: "[0, inf)",
        });
    }
    let meas = MEASUREMENT_SLOPE * p;
    Ok((meas, p + meas))
}

/// What a row of a result table was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelTag {
    Level2,
    Level3,
    Concat { t: u32, levels: u32 },
    VnMc,
    HypercubeMc,
    /// Encoding failure bound.
    Pfail,
    /// Encoding cascade Monte Carlo.
    CascadeMc,
    /// Universal-computation threshold.
    Universal,
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelTag::Level2 => write!(f, "level2"),
            ModelTag::Level3 => write!(f, "level3"),
            ModelTag::Concat { t, levels } => write!(f, "concat-{t}-{levels}"),
            ModelTag::VnMc => write!(f, "vn_mc"),
            ModelTag::HypercubeMc => write!(f, "hypercube_mc"),
            ModelTag::Pfail => write!(f, "pfail"),
            ModelTag::CascadeMc => write!(f, "cascade_mc"),
            ModelTag::Universal => write!(f, "universal"),
        }
    }
}

impl FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "level2" => ModelTag::Level2,
            "level3" => ModelTag::Level3,
            "vn_mc" => ModelTag::VnMc,
            "hypercube_mc" => ModelTag::HypercubeMc,
            "pfail" => ModelTag::Pfail,
            "cascade_mc" => ModelTag::CascadeMc,
            "universal" => ModelTag::Universal,
            _ => {
                let parts: Vec<&str> = s.split('-').collect();
                match parts.as_slice() {
                    ["concat", t, l] => ModelTag::Concat {
                        t: t.parse().map_err(|_| Error::Parse(format!("bad model `{s}`")))?,
                        levels: l.parse().map_err(|_| Error::Parse(format!("bad model `{s}`")))?,
                    },
                    _ => return Err(Error::Parse(format!("unknown model `{s}`"))),
                }
            }
        })
    }
}

impl Serialize for ModelTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ModelTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One row of an output table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub x: f64,
    pub y: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub model: ModelTag,
    pub n: u32,
    pub seed: Option<u64>,
}

impl SweepRecord {
    pub fn exact(x: f64, y: f64, model: ModelTag, n: u32) -> Self {
        Self {
            x,
            y,
            y_lo: y,
            y_hi: y,
            model,
            n,
            seed: None,
        }
    }
}

/// Which quantity the grid values are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    /// MAJ3 output error `epsilon`.
    Eps,
    /// Physical gate error `p`; `epsilon` follows from it.
    P,
}

/// Monte Carlo settings for the simulated models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub level: u32,
    pub seed: u64,
    pub stop: StopRule,
    pub options: RunOptions,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            level: 3,
            seed: 0,
            stop: StopRule {
                min_flips: 300,
                max_phases: 10_000_000,
            },
            options: RunOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPoint {
    pub x: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sweep {
    pub records: Vec<SweepRecord>,
    pub skipped: Vec<SkippedPoint>,
}

/// Evaluate `model` at every grid point. Points outside the model's domain
/// are reported in `skipped` instead of failing the sweep.
pub fn sweep(model: ModelTag, param: Param, grid: &[f64], mc: &McSettings) -> Result<Sweep> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    let chain = match model {
        ModelTag::Level2 => Some(build_level2_chain()),
        ModelTag::Level3 => Some(build_level3_chain()?),
        _ => None,
    };
    let mut out = Sweep::default();
    for &x in grid {
        match point(model, param, x, chain.as_ref(), mc) {
            Ok(rec) => out.records.push(rec),
            Err(Error::InvalidConfig(msg)) => return Err(Error::InvalidConfig(msg)),
            Err(e) => out.skipped.push(SkippedPoint {
                x,
                reason: e.to_string(),
            }),
        }
    }
    Ok(out)
}

fn epsilon_for(param: Param, x: f64) -> Result<f64> {
    match param {
        Param::Eps => {
            if (0.0..1.0).contains(&x) {
                Ok(x)
            } else {
                Err(Error::OutOfDomain {
                    name: "epsilon",
                    value: x,
                    domain: "[0, 1)",
                })
            }
        }
        Param::P => {
            let r = derive_rates(x)?;
            if r.clamped || r.maj3.epsilon >= 1.0 {
                return Err(Error::OutOfDomain {
                    name: "p",
                    value: x,
                    domain: "epsilon(p) < 1",
                });
            }
            Ok(r.maj3.epsilon)
        }
    }
}

fn point(
    model: ModelTag,
    param: Param,
    x: f64,
    chain: Option<&ErrorChain>,
    mc: &McSettings,
) -> Result<SweepRecord> {
    match model {
        ModelTag::Level2 | ModelTag::Level3 => {
            let chain = chain.expect("chain built for analytic models");
            let eps = epsilon_for(param, x)?;
            let ss = steady_state(chain, eps)?;
            Ok(SweepRecord::exact(x, ss.p_ss, model, chain.level()))
        }
        ModelTag::Concat { t, levels } => {
            let eps = epsilon_for(param, x)?;
            Ok(SweepRecord::exact(x, concat_baseline(t, levels, eps), model, levels))
        }
        ModelTag::Pfail => {
            if param != Param::P {
                return Err(Error::InvalidConfig("the encoding bound is a function of p".into()));
            }
            Ok(SweepRecord::exact(x, pfail_bound(x)?.p_fail, model, 3))
        }
        ModelTag::VnMc | ModelTag::HypercubeMc => {
            let kind = if model == ModelTag::VnMc {
                ScheduleKind::Randomized
            } else {
                ScheduleKind::Hypercube
            };
            let noise = match param {
                Param::Eps => GateNoise::idealized(epsilon_for(param, x)?)?,
                Param::P => GateNoise::componentwise(x)?,
            };
            let stats = estimate_logical_rate(mc.level, kind, &noise, mc.seed, mc.stop, &mc.options)?;
            Ok(SweepRecord {
                x,
                y: stats.p_hat,
                y_lo: stats.ci95.0,
                y_hi: stats.ci95.1,
                model,
                n: mc.level,
                seed: Some(mc.seed),
            })
        }
        ModelTag::CascadeMc | ModelTag::Universal => Err(Error::InvalidConfig(format!(
            "model `{model}` is not a sweep model"
        ))),
    }
}
