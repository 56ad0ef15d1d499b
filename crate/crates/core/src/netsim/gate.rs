//! Noisy MAJ1, AMP and MAJ3 gates acting on classical bits.

use crate::error::{check_probability, Result};
use crate::rates::{PhysicalNoise, CLASS_ONE, CLASS_THREE, CLASS_TWO};
use crate::rng::{below, bernoulli, uniform, SimRng};

/// How a MAJ3 fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateNoise {
    /// Three copies of the majority, all flipped together with probability
    /// `epsilon`.
    Idealized { epsilon: f64 },
    /// MAJ1 then AMP, each with its own error class, plus independent flips
    /// on the prepared ancillas and on every output wire.
    Componentwise(PhysicalNoise),
}

impl GateNoise {
    pub fn idealized(epsilon: f64) -> Result<Self> {
        Ok(Self::Idealized {
            epsilon: check_probability("epsilon", epsilon)?,
        })
    }

    pub fn componentwise(p: f64) -> Result<Self> {
        Ok(Self::Componentwise(PhysicalNoise::new(p)?))
    }
}

#[inline]
pub fn majority(inputs: [bool; 3]) -> bool {
    (inputs[0] as u8 + inputs[1] as u8 + inputs[2] as u8) >= 2
}

/// Which outputs of an elementary three-bit gate are wrong. Consumes two
/// words: one for the class, one for the position.
fn error_class(noise: &PhysicalNoise, rng: &mut SimRng) -> [bool; 3] {
    let u = uniform(rng);
    let slot = below(rng, 3);
    let one = CLASS_ONE * noise.p_c;
    let two = one + CLASS_TWO * noise.p_c;
    let three = two + CLASS_THREE * noise.p_c;
    let mut mask = [false; 3];
    if u < one {
        mask[slot] = true;
    } else if u < two {
        mask = [true; 3];
        mask[slot] = false;
    } else if u < three {
        mask = [true; 3];
    }
    mask
}

/// MAJ1: majority with one usable output. Consumes two words.
pub fn maj1(inputs: [bool; 3], noise: &PhysicalNoise, rng: &mut SimRng) -> bool {
    let mask = error_class(noise, rng);
    majority(inputs) ^ mask[0]
}

/// AMP: copies `control` onto two prepared zeros. The control output carries
/// an extra independent `(2/3)p` flip so all three outputs are symmetric,
/// and each output picks up one wire error. Consumes eight words.
pub fn amp(control: bool, noise: &PhysicalNoise, rng: &mut SimRng) -> [bool; 3] {
    let mut out = [control; 3];
    for bit in out.iter_mut() {
        *bit ^= bernoulli(rng, noise.wire_prep);
    }
    let mask = error_class(noise, rng);
    for (bit, m) in out.iter_mut().zip(mask) {
        *bit ^= m;
    }
    for bit in out.iter_mut() {
        *bit ^= bernoulli(rng, noise.wire_prep);
    }
    out
}

/// Apply one MAJ3 to three input bits.
pub fn apply_maj3(inputs: [bool; 3], noise: &GateNoise, rng: &mut SimRng) -> [bool; 3] {
    match noise {
        GateNoise::Idealized { epsilon } => {
            let m = majority(inputs) ^ bernoulli(rng, *epsilon);
            [m; 3]
        }
        GateNoise::Componentwise(physical) => amp(maj1(inputs, physical, rng), physical, rng),
    }
}
