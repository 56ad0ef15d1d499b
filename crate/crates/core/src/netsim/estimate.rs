use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::gate::{apply_maj3, GateNoise};
use crate::netsim::register::CodeRegister;
use crate::netsim::schedule::{Schedule, ScheduleKind};
use crate::rng::{substream, SimRng};

const Z95: f64 = 1.959_963_984_540_054;

/// Monte Carlo tallies with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub phases: u64,
    pub flips: u64,
    pub p_hat: f64,
    pub ci95: (f64, f64),
    /// No events were seen; only the upper end of `ci95` is informative.
    pub upper_bound_only: bool,
}

impl TrialStats {
    pub fn from_counts(flips: u64, phases: u64) -> Self {
        let (p_hat, ci95) = if phases == 0 {
            (0.0, (0.0, 1.0))
        } else {
            (flips as f64 / phases as f64, wilson(flips, phases))
        };
        Self {
            phases,
            flips,
            p_hat,
            ci95,
            upper_bound_only: flips == 0,
        }
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self::from_counts(self.flips + other.flips, self.phases + other.phases)
    }

    /// Binomial standard error of `p_hat`.
    pub fn sigma(&self) -> f64 {
        if self.phases == 0 {
            return 0.0;
        }
        (self.p_hat * (1.0 - self.p_hat) / self.phases as f64).sqrt()
    }
}

fn wilson(k: u64, n: u64) -> (f64, f64) {
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// When a run stops: after `min_flips` logical flips, or at `max_phases`
/// tallied phases, whichever comes first. Checked between rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub min_flips: u64,
    pub max_phases: u64,
}

/// How the logical value of a register is read after each phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// Strict majority of the physical bits.
    Majority,
    /// Value reached by finishing the hypercube cycle without noise.
    Corrected,
}

impl Readout {
    pub fn default_for(kind: ScheduleKind) -> Self {
        match kind {
            ScheduleKind::Hypercube => Readout::Corrected,
            ScheduleKind::Randomized => Readout::Majority,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Phases run at the start of each segment before tallying.
    pub warmup: u64,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    /// `None` picks [`Readout::default_for`] the schedule.
    pub readout: Option<Readout>,
    /// Tallied phases per independent segment.
    pub segment_phases: u64,
    /// Segments per round. Fixed so the stopping point does not depend on
    /// the worker count.
    pub round_segments: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            warmup: 50,
            workers: 0,
            readout: None,
            segment_phases: 1 << 15,
            round_segments: 16,
        }
    }
}

/// One layer of MAJ3 gates over the register.
pub fn restorative_phase(
    reg: &mut CodeRegister,
    sched: &mut Schedule,
    noise: &GateNoise,
    rng: &mut SimRng,
) -> Result<()> {
    if sched.size() != reg.len() {
        return Err(Error::InvalidRegister(format!(
            "schedule covers {} bits, register has {}",
            sched.size(),
            reg.len()
        )));
    }
    let triples = sched.next_triples(rng);
    let bits = reg.bits_mut();
    for t in triples {
        let out = apply_maj3([bits[t[0]], bits[t[1]], bits[t[2]]], noise, rng);
        bits[t[0]] = out[0];
        bits[t[1]] = out[1];
        bits[t[2]] = out[2];
    }
    Ok(())
}

/// A register evolving under one schedule, with its logical value tracked
/// after every phase.
pub struct Chain {
    reg: CodeRegister,
    sched: Schedule,
    readout: Readout,
    scratch: Vec<bool>,
}

impl Chain {
    pub fn new(level: u32, kind: ScheduleKind, readout: Readout) -> Result<Self> {
        if readout == Readout::Corrected && kind != ScheduleKind::Hypercube {
            return Err(Error::InvalidConfig(
                "corrected readout needs the hypercube schedule".into(),
            ));
        }
        Ok(Self {
            reg: CodeRegister::new(level),
            sched: Schedule::for_level(kind, level)?,
            readout,
            scratch: Vec::new(),
        })
    }

    pub fn from_register(reg: CodeRegister, sched: Schedule, readout: Readout) -> Result<Self> {
        if sched.size() != reg.len() {
            return Err(Error::InvalidRegister("schedule/register size mismatch".into()));
        }
        if readout == Readout::Corrected && sched.kind() != ScheduleKind::Hypercube {
            return Err(Error::InvalidConfig(
                "corrected readout needs the hypercube schedule".into(),
            ));
        }
        Ok(Self {
            reg,
            sched,
            readout,
            scratch: Vec::new(),
        })
    }

    pub fn register(&self) -> &CodeRegister {
        &self.reg
    }

    pub fn decoded(&mut self) -> bool {
        match self.readout {
            Readout::Majority => self.reg.majority(),
            Readout::Corrected => self
                .sched
                .noiseless_readout(self.reg.bits(), &mut self.scratch)
                .expect("checked at construction"),
        }
    }

    /// Run one phase; returns whether the logical value flipped. The
    /// reference follows the new value so the chain keeps going.
    pub fn step(&mut self, noise: &GateNoise, rng: &mut SimRng) -> bool {
        restorative_phase(&mut self.reg, &mut self.sched, noise, rng)
            .expect("sizes checked at construction");
        let value = self.decoded();
        let flipped = value != self.reg.logical();
        self.reg.set_logical(value);
        flipped
    }
}

fn run_segment(
    level: u32,
    kind: ScheduleKind,
    readout: Readout,
    noise: &GateNoise,
    seed: u64,
    index: u64,
    warmup: u64,
    phases: u64,
) -> (u64, u64) {
    let mut rng = substream(seed, index);
    let mut chain = Chain::new(level, kind, readout).expect("validated by caller");
    for _ in 0..warmup {
        chain.step(noise, &mut rng);
    }
    let flips = (0..phases).filter(|_| chain.step(noise, &mut rng)).count() as u64;
    (flips, phases)
}

/// Per-phase logical flip rate of a level-`level` register.
///
/// Work is cut into independent segments, each with its own RNG substream
/// and warm-up, and processed in rounds of `round_segments`. The stop rule
/// is checked after every round, so the result depends only on the seed and
/// the parameters.
pub fn estimate_logical_rate(
    level: u32,
    kind: ScheduleKind,
    noise: &GateNoise,
    seed: u64,
    stop: StopRule,
    opts: &RunOptions,
) -> Result<TrialStats> {
    let readout = opts.readout.unwrap_or_else(|| Readout::default_for(kind));
    // validate once up front
    Chain::new(level, kind, readout)?;
    if opts.segment_phases == 0 || opts.round_segments == 0 {
        return Err(Error::InvalidConfig("segment sizes must be positive".into()));
    }

    let run = || {
        let mut flips = 0u64;
        let mut phases = 0u64;
        let mut next_segment = 0u64;
        while phases < stop.max_phases && (flips < stop.min_flips || stop.min_flips == 0) {
            let mut jobs = Vec::new();
            let mut planned = phases;
            for _ in 0..opts.round_segments {
                if planned >= stop.max_phases {
                    break;
                }
                let len = opts.segment_phases.min(stop.max_phases - planned);
                jobs.push((next_segment, len));
                next_segment += 1;
                planned += len;
            }
            let results: Vec<(u64, u64)> = jobs
                .par_iter()
                .map(|&(index, len)| {
                    run_segment(level, kind, readout, noise, seed, index, opts.warmup, len)
                })
                .collect();
            for (f, n) in results {
                flips += f;
                phases += n;
            }
        }
        TrialStats::from_counts(flips, phases)
    };

    if opts.workers == 0 {
        Ok(run())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(pool.install(run))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        for &(k, n) in &[(0u64, 10u64), (1, 10), (5, 10), (10, 10), (300, 100_000)] {
            let s = TrialStats::from_counts(k, n);
            assert!(s.ci95.0 <= s.p_hat && s.p_hat <= s.ci95.1);
        }
        let s = TrialStats::from_counts(0, 1000);
        assert!(s.upper_bound_only);
        assert!(s.ci95.1 > 0.0 && s.ci95.1 < 0.01);
    }

    #[test]
    fn merge_adds_counts() {
        let a = TrialStats::from_counts(3, 100);
        let b = TrialStats::from_counts(7, 900);
        let m = a.merge(&b);
        assert_eq!((m.flips, m.phases), (10, 1000));
        assert!((m.p_hat - 0.01).abs() < 1e-15);
    }

    #[test]
    fn single_error_corrected_in_two_phases() {
        let noise = GateNoise::idealized(0.0).unwrap();
        for i in 0..9 {
            let mut reg = CodeRegister::new(1);
            reg.flip(i);
            let mut sched = Schedule::hypercube(1);
            let mut rng = substream(0, 0);
            restorative_phase(&mut reg, &mut sched, &noise, &mut rng).unwrap();
            restorative_phase(&mut reg, &mut sched, &noise, &mut rng).unwrap();
            assert_eq!(reg.error_count(), 0, "bit {i}");
        }
    }

    #[test]
    fn bad_row_ignored_by_column_phase() {
        // a full row (fixed coordinate 1) in error: every column gate sees
        // exactly one wrong input
        let noise = GateNoise::idealized(0.0).unwrap();
        let mut reg = CodeRegister::new(1);
        for i in [3, 4, 5] {
            reg.flip(i);
        }
        let mut sched = Schedule::hypercube_with_order(1, vec![1, 0]).unwrap();
        let mut rng = substream(0, 0);
        restorative_phase(&mut reg, &mut sched, &noise, &mut rng).unwrap();
        assert_eq!(reg.error_count(), 0);
    }

    #[test]
    fn size_mismatch_rejected() {
        let mut reg = CodeRegister::new(1);
        let mut sched = Schedule::hypercube(2);
        let noise = GateNoise::idealized(0.0).unwrap();
        let mut rng = substream(0, 0);
        assert!(restorative_phase(&mut reg, &mut sched, &noise, &mut rng).is_err());
    }

    #[test]
    fn noiseless_run_is_upper_bound_only() {
        let noise = GateNoise::idealized(0.0).unwrap();
        let stop = StopRule {
            min_flips: 10,
            max_phases: 5_000,
        };
        let s = estimate_logical_rate(2, ScheduleKind::Hypercube, &noise, 1, stop, &RunOptions::default())
            .unwrap();
        assert_eq!(s.flips, 0);
        assert_eq!(s.phases, 5_000);
        assert!(s.upper_bound_only);
    }

    #[test]
    fn corrected_readout_rejected_for_randomized() {
        let noise = GateNoise::idealized(0.1).unwrap();
        let opts = RunOptions {
            readout: Some(Readout::Corrected),
            ..RunOptions::default()
        };
        let stop = StopRule {
            min_flips: 1,
            max_phases: 10,
        };
        assert!(estimate_logical_rate(2, ScheduleKind::Randomized, &noise, 1, stop, &opts).is_err());
    }
}
