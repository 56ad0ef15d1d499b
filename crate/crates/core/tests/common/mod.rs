#![allow(dead_code)]

use ftcc::rng::{bernoulli, below, substream, SimRng};

/// Direct bundle-level simulation of one correction step of the 81-bit
/// code. The state is 27 bundle flags, `bad[square][row][column]`. Gate
/// `(square l, line k)` reads the three bundles of row `k` in square `l`;
/// its inputs that carry no propagated error each fail independently with
/// probability `eps`, and the gate fails once two or more inputs are bad. A
/// failed gate `(l, k)` corrupts bundle `(row l, column k)` of every square
/// for the next step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bundles {
    pub bad: [[[bool; 3]; 3]; 3],
}

impl Bundles {
    pub fn clean() -> Self {
        Self {
            bad: [[[false; 3]; 3]; 3],
        }
    }

    /// Same 3x3 picture in every square; `cells[r][k]`.
    pub fn replicated(cells: [[bool; 3]; 3]) -> Self {
        Self { bad: [cells; 3] }
    }

    fn row_counts(&self, square: usize) -> [usize; 3] {
        self.bad[square].map(|row| row.iter().filter(|&&b| b).count())
    }

    /// `None` for a logical error, otherwise the state index `0..7`.
    pub fn class(&self) -> Option<usize> {
        let mut c = self.row_counts(0);
        c.sort_unstable_by(|a, b| b.cmp(a));
        if c[1] >= 2 {
            return None;
        }
        let ones = c.iter().filter(|&&x| x == 1).count();
        Some(if c[0] >= 2 { 4 + ones } else { ones })
    }

    pub fn step(&self, eps: f64, rng: &mut SimRng) -> Bundles {
        let mut failed = [[false; 3]; 3];
        for (l, row) in failed.iter_mut().enumerate() {
            let counts = self.row_counts(l);
            for (k, f) in row.iter_mut().enumerate() {
                let propagated = counts[k];
                let mut bad = propagated;
                if propagated < 2 {
                    for _ in 0..3 - propagated {
                        bad += bernoulli(rng, eps) as usize;
                    }
                }
                *f = bad >= 2;
            }
        }
        let mut next = Bundles::clean();
        for square in next.bad.iter_mut() {
            for (l, row) in failed.iter().enumerate() {
                for (k, &f) in row.iter().enumerate() {
                    square[l][k] = f;
                }
            }
        }
        next
    }
}

fn picture(bits: usize) -> Bundles {
    let mut cells = [[false; 3]; 3];
    for (i, cell) in cells.iter_mut().flatten().enumerate() {
        *cell = bits >> i & 1 == 1;
    }
    Bundles::replicated(cells)
}

/// Every replicated picture of class `class`.
pub fn members(class: usize) -> Vec<Bundles> {
    (0..512).map(picture).filter(|b| b.class() == Some(class)).collect()
}

/// A uniformly random replicated picture of class `class`.
pub fn random_member(class: usize, rng: &mut SimRng) -> Bundles {
    let all = members(class);
    all[below(rng, all.len())]
}

/// Counts of next classes (index 7 = logical error) from random members of
/// `class`, `steps` samples.
pub fn bundle_row(class: usize, eps: f64, steps: u64, seed: u64) -> [u64; 8] {
    let mut rng = substream(seed, class as u64);
    let all = members(class);
    let mut counts = [0u64; 8];
    for _ in 0..steps {
        let start = all[below(&mut rng, all.len())];
        let next = start.step(eps, &mut rng);
        counts[next.class().unwrap_or(7)] += 1;
    }
    counts
}

/// Long-run fraction of bad bundles in the chain conditioned on no logical
/// error (a step that would be logical is redrawn). Returns the mean and a
/// batch-means standard error.
pub fn bundle_eta(eps: f64, batches: u64, steps_per_batch: u64, seed: u64) -> (f64, f64) {
    let mut rng = substream(seed, 99);
    let mut state = Bundles::clean();
    let mut means = Vec::with_capacity(batches as usize);
    for _ in 0..batches {
        let mut total = 0.0;
        for _ in 0..steps_per_batch {
            let next = loop {
                let n = state.step(eps, &mut rng);
                if n.class().is_some() {
                    break n;
                }
            };
            total += next.bad[0].iter().flatten().filter(|&&b| b).count() as f64 / 9.0;
            state = next;
        }
        means.push(total / steps_per_batch as f64);
    }
    let k = means.len() as f64;
    let mean = means.iter().sum::<f64>() / k;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Number of ways to place `errors` failed MAJ3s among the 9 of a 27-bit
/// code (three level-1 MAJs of three MAJ3s) such that exactly `failures`
/// level-1 MAJs fail.
pub fn level2_placements(errors: u32, failures: usize) -> (usize, usize) {
    let mut total = 0;
    let mut hits = 0;
    for mask in 0u32..512 {
        if mask.count_ones() != errors {
            continue;
        }
        total += 1;
        let failed = (0..3)
            .filter(|g| (mask >> (3 * g) & 0b111).count_ones() >= 2)
            .count();
        if failed == failures {
            hits += 1;
        }
    }
    (total, hits)
}

/// Binomial agreement: `|k/n - p| <= z sqrt(p (1-p) / n)`.
pub fn within_sigma(k: u64, n: u64, p: f64, z: f64) -> bool {
    let p_hat = k as f64 / n as f64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    (p_hat - p).abs() <= z * sigma
}
