//! Encoding one bit into the 81-bit code with a cascade of AMP gates.
//!
//! The first AMP copies the input bit three ways (level zero), and each
//! later level feeds every output into the control of a fresh AMP, so after
//! four steps there are 81 copies. Leaf `d0 + 3 d1 + 9 d2 + 27 d3` descends
//! from output `d0` at level zero, `d1` at level one and so on. Axis 0 of the
//! hypercube therefore joins leaves from the three distinct level-zero
//! thirds, which is the axis the first correction layer acts along.

use rayon::prelude::*;

use crate::analysis::{bisect, Root};
use crate::error::{Error, Result};
use crate::netsim::{amp, restorative_phase, CodeRegister, GateNoise, Schedule, TrialStats};
use crate::rates::{derive_rates, PhysicalNoise};
use crate::rng::{substream, SimRng};

/// Shape of the encoding cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CascadeSpec {
    pub depth: u32,
}

impl Default for CascadeSpec {
    fn default() -> Self {
        Self { depth: 4 }
    }
}

impl CascadeSpec {
    pub fn outputs(&self) -> usize {
        3usize.pow(self.depth)
    }

    /// Code level of the register the leaves fill.
    pub fn code_level(&self) -> u32 {
        self.depth - 1
    }

    /// Register index of the leaf reached by choosing output `path[k]` at
    /// cascade level `k`.
    pub fn leaf_index(&self, path: &[usize]) -> usize {
        path.iter().rev().fold(0, |acc, &d| acc * 3 + d)
    }

    /// The AMP output at cascade `level` that leaf `index` descends from.
    pub fn ancestor(&self, index: usize, level: u32) -> usize {
        (index / 3usize.pow(level)) % 3
    }
}

/// Upper bound on the probability that the cascade encodes the wrong value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodeBound {
    pub p_fail: f64,
    /// Initial measurement, two level-one errors, one level-one error plus
    /// a logical error downstream, and downstream errors alone.
    pub terms: [f64; 4],
    /// Probability of two or more of three independent `ap` errors.
    pub alpha: f64,
    /// Logical error given exactly one level-one error.
    pub p_logical_given_one: f64,
}

/// `3x^2 - 2x^3`, written without cancellation.
fn two_of_three(x: f64) -> f64 {
    x * x * (3.0 - 2.0 * x)
}

pub fn pfail_bound(p: f64) -> Result<EncodeBound> {
    if !(0.0..=0.2).contains(&p) {
        return Err(Error::OutOfDomain {
            name: "p",
            value: p,
            domain: "[0, 0.2]",
        });
    }
    let enc = derive_rates(p)?.encoding;
    let q_i = enc.q_i;
    let a = enc.ap;
    let alpha = two_of_three(a);
    // one failing gate with one propagated input, then two of three
    let pp = a * (2.0 - a);
    let p_logical_given_one = pp * pp * (3.0 - 2.0 * pp);
    let survive = 1.0 - q_i;
    let one_minus_a = 1.0 - a;
    let terms = [
        q_i,
        survive * alpha,
        survive * 3.0 * a * one_minus_a * one_minus_a * p_logical_given_one,
        survive * one_minus_a.powi(3) * two_of_three(alpha),
    ];
    Ok(EncodeBound {
        p_fail: terms.iter().sum(),
        terms,
        alpha,
        p_logical_given_one,
    })
}

/// Largest `p` below which the encoding bound stays under `p` itself.
pub fn p_crit() -> Result<Root> {
    bisect(
        |p| Ok(pfail_bound(p)?.p_fail - p),
        1e-6,
        0.2,
        1e-6,
    )
}

/// Run the cascade on `input` and return the 81 leaves in register order.
pub fn encode_cascade(
    spec: &CascadeSpec,
    input: bool,
    noise: &PhysicalNoise,
    rng: &mut SimRng,
) -> Vec<bool> {
    let mut bits = vec![input];
    for _ in 0..spec.depth {
        let stride = bits.len();
        let mut next = vec![false; bits.len() * 3];
        for (i, &b) in bits.iter().enumerate() {
            let out = amp(b, noise, rng);
            for (j, o) in out.into_iter().enumerate() {
                next[i + stride * j] = o;
            }
        }
        bits = next;
    }
    bits
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CascadeOptions {
    /// Correction phases after encoding before the register is scored.
    pub phases: u32,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    pub input: bool,
    /// Trials per RNG substream.
    pub block: u64,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        Self {
            phases: 12,
            workers: 0,
            input: false,
            block: 1 << 14,
        }
    }
}

fn cascade_block(
    p: f64,
    noise: &PhysicalNoise,
    correct: &GateNoise,
    seed: u64,
    index: u64,
    trials: u64,
    opts: &CascadeOptions,
) -> u64 {
    let spec = CascadeSpec::default();
    let mut rng = substream(seed, index);
    let mut failures = 0;
    for _ in 0..trials {
        let leaves = encode_cascade(&spec, opts.input, noise, &mut rng);
        let mut reg = CodeRegister::from_bits(spec.code_level(), leaves, opts.input)
            .expect("cascade fills the register");
        let mut sched = Schedule::hypercube(spec.code_level());
        if p > 0.0 {
            for _ in 0..opts.phases {
                restorative_phase(&mut reg, &mut sched, correct, &mut rng)
                    .expect("sizes agree");
            }
        }
        if reg.majority_disagrees() {
            failures += 1;
        }
    }
    failures
}

/// Frequency with which an encoded-then-corrected register ends up with the
/// wrong majority. The cascade uses componentwise noise at `p`; correction
/// uses idealized MAJ3 noise at `epsilon(p)`.
pub fn cascade_mc(p: f64, seed: u64, trials: u64, opts: &CascadeOptions) -> Result<TrialStats> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if opts.block == 0 {
        return Err(Error::InvalidConfig("block size must be positive".into()));
    }
    let rates = derive_rates(p)?;
    if rates.clamped {
        return Err(Error::OutOfDomain {
            name: "p",
            value: p,
            domain: "epsilon(p) <= 1",
        });
    }
    let noise = rates.noise;
    let correct = GateNoise::idealized(rates.maj3.epsilon)?;
    let blocks = trials.div_ceil(opts.block);

    let run = || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let n = opts.block.min(trials - b * opts.block);
                cascade_block(p, &noise, &correct, seed, b, n, opts)
            })
            .sum::<u64>()
    };
    let failures = if opts.workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(run)
    };
    Ok(TrialStats::from_counts(failures, trials))
}
