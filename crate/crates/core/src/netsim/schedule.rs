use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::gate::majority;
use crate::netsim::register::code_size;
use crate::rng::{shuffle, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// Fixed wiring: MAJ3 along one hypercube axis per phase, axes cycling.
    Hypercube,
    /// Fresh uniform random partition into triples every phase.
    Randomized,
}

/// The wiring of successive restorative phases.
#[derive(Debug, Clone)]
pub struct Schedule {
    kind: ScheduleKind,
    size: usize,
    axis_order: Vec<usize>,
    cursor: usize,
    /// Hypercube only: the `3^n` gate triples of each axis.
    axis_triples: Vec<Vec<[usize; 3]>>,
    /// Randomized only: current permutation, regrouped into triples.
    perm: Vec<usize>,
    triples: Vec<[usize; 3]>,
}

/// Gate triples along `axis` of a side-3 hypercube with `size` cells. Cell
/// index `i` has coordinate `k` equal to the `k`-th base-3 digit of `i`.
pub fn axis_triples(size: usize, axis: usize) -> Vec<[usize; 3]> {
    let stride = 3usize.pow(axis as u32);
    (0..size)
        .filter(|i| (i / stride).is_multiple_of(3))
        .map(|i| [i, i + stride, i + 2 * stride])
        .collect()
}

impl Schedule {
    /// Hypercube wiring for a level-`level` code with axes `0, 1, .., level`.
    pub fn hypercube(level: u32) -> Self {
        let order = (0..=level as usize).collect();
        Self::hypercube_with_order(level, order).expect("canonical axis order is valid")
    }

    pub fn hypercube_with_order(level: u32, axis_order: Vec<usize>) -> Result<Self> {
        let dims = level as usize + 1;
        let mut seen = vec![false; dims];
        for &a in &axis_order {
            if a >= dims || seen[a] {
                return Err(Error::InvalidConfig(format!(
                    "axis order {axis_order:?} is not a permutation of 0..{dims}"
                )));
            }
            seen[a] = true;
        }
        if axis_order.len() != dims {
            return Err(Error::InvalidConfig(format!(
                "axis order {axis_order:?} is not a permutation of 0..{dims}"
            )));
        }
        let size = code_size(level);
        Ok(Self {
            kind: ScheduleKind::Hypercube,
            size,
            axis_triples: (0..dims).map(|a| axis_triples(size, a)).collect(),
            axis_order,
            cursor: 0,
            perm: Vec::new(),
            triples: Vec::new(),
        })
    }

    /// Randomized multiplexing over `size` bits.
    pub fn randomized(size: usize) -> Result<Self> {
        if size == 0 || !size.is_multiple_of(3) {
            return Err(Error::InvalidConfig(format!(
                "randomized schedule needs a positive multiple of 3 bits, got {size}"
            )));
        }
        Ok(Self {
            kind: ScheduleKind::Randomized,
            size,
            axis_order: Vec::new(),
            cursor: 0,
            axis_triples: Vec::new(),
            perm: (0..size).collect(),
            triples: vec![[0; 3]; size / 3],
        })
    }

    pub fn for_level(kind: ScheduleKind, level: u32) -> Result<Self> {
        match kind {
            ScheduleKind::Hypercube => Ok(Self::hypercube(level)),
            ScheduleKind::Randomized => Self::randomized(code_size(level)),
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn axis_order(&self) -> &[usize] {
        &self.axis_order
    }

    /// Axis of the next hypercube phase.
    pub fn current_axis(&self) -> Option<usize> {
        self.axis_order.get(self.cursor).copied()
    }

    /// Triples for the next phase; advances the axis cursor or draws a new
    /// permutation.
    pub fn next_triples(&mut self, rng: &mut SimRng) -> &[[usize; 3]] {
        match self.kind {
            ScheduleKind::Hypercube => {
                let axis = self.axis_order[self.cursor];
                self.cursor = (self.cursor + 1) % self.axis_order.len();
                &self.axis_triples[axis]
            }
            ScheduleKind::Randomized => {
                shuffle(rng, &mut self.perm);
                for (t, chunk) in self.triples.iter_mut().zip(self.perm.chunks_exact(3)) {
                    *t = [chunk[0], chunk[1], chunk[2]];
                }
                &self.triples
            }
        }
    }

    /// The value every bit takes if the remaining hypercube cycle, starting
    /// at the next axis, is run without noise. `None` for randomized wiring.
    pub fn noiseless_readout(&self, bits: &[bool], scratch: &mut Vec<bool>) -> Option<bool> {
        if self.kind != ScheduleKind::Hypercube {
            return None;
        }
        scratch.clear();
        scratch.extend_from_slice(bits);
        let dims = self.axis_order.len();
        for step in 0..dims {
            let axis = self.axis_order[(self.cursor + step) % dims];
            for t in &self.axis_triples[axis] {
                let m = majority([scratch[t[0]], scratch[t[1]], scratch[t[2]]]);
                scratch[t[0]] = m;
                scratch[t[1]] = m;
                scratch[t[2]] = m;
            }
        }
        Some(scratch[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn hypercube_touches_every_bit_once_per_phase() {
        for level in 0..4 {
            let mut s = Schedule::hypercube(level);
            let mut rng = substream(0, 0);
            for _ in 0..=level {
                let mut hits = vec![0u8; s.size()];
                let triples = s.next_triples(&mut rng);
                assert_eq!(triples.len(), 3usize.pow(level));
                for t in triples {
                    for &i in t {
                        hits[i] += 1;
                    }
                }
                assert!(hits.iter().all(|&h| h == 1));
            }
        }
    }

    #[test]
    fn axes_cycle_in_order() {
        let mut s = Schedule::hypercube_with_order(2, vec![2, 0, 1]).unwrap();
        let mut rng = substream(0, 0);
        let mut seen = Vec::new();
        for _ in 0..6 {
            seen.push(s.current_axis().unwrap());
            s.next_triples(&mut rng);
        }
        assert_eq!(seen, vec![2, 0, 1, 2, 0, 1]);
    }

    #[test]
    fn bad_axis_order_rejected() {
        assert!(Schedule::hypercube_with_order(2, vec![0, 0, 1]).is_err());
        assert!(Schedule::hypercube_with_order(2, vec![0, 1]).is_err());
    }

    #[test]
    fn randomized_needs_multiple_of_three() {
        assert!(Schedule::randomized(10).is_err());
        assert!(Schedule::randomized(0).is_err());
        let mut s = Schedule::randomized(81).unwrap();
        let mut rng = substream(9, 0);
        let mut hits = vec![0u8; 81];
        for t in s.next_triples(&mut rng) {
            for &i in t {
                hits[i] += 1;
            }
        }
        assert!(hits.iter().all(|&h| h == 1));
    }

    #[test]
    fn readout_follows_recursive_majority() {
        let s = Schedule::hypercube(1);
        let mut scratch = Vec::new();
        // one bad column, one stray bit: still decodes to zero
        let mut bits = vec![false; 9];
        bits[0] = true;
        bits[3] = true;
        bits[6] = true;
        bits[4] = true;
        assert_eq!(s.noiseless_readout(&bits, &mut scratch), Some(false));
        let r = Schedule::randomized(9).unwrap();
        assert_eq!(r.noiseless_readout(&bits, &mut scratch), None);
    }
}
