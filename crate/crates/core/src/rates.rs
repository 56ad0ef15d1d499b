//! Per-location error rates derived from the base three-qubit gate error `p`.
//!
//! Every rate used by the simulators and the analytic models is a fixed
//! linear function of `p`:
//!
//! | rate        | value                         |
//! |-------------|-------------------------------|
//! | `p_c`       | `(8/9) p`                     |
//! | wire / prep | `(2/3) p`                     |
//! | `epsilon`   | `(4/3) p + (8/7) p_c = (148/63) p` |
//! | `epsilon'`  | `epsilon / 2`                 |
//! | `q_i`       | `(4/7) p_c`                   |
//! | `q_o`       | `(4/3) p + (1/7) p_c`         |
//! | `ap`        | `q_i + q_o`                   |
//! | `epsilon_0` | `ap + (4/3) p`                |
//!
//! The MAJ3 output rate is the plain sum of its location rates (MAJ1 and AMP
//! per-output shares, one prepared ancilla and one wire), which makes it an
//! overestimate of the true marginal.

use crate::error::{check_probability, Error, Result};

/// Share of a three-qubit Pauli error that flips at least one output in the
/// computational basis: 56 of the 63 non-identity Pauli strings.
pub const CLASSICAL_SHARE: f64 = 8.0 / 9.0;

/// Error on a single wire or on a prepared `|0>`, relative to `p`.
pub const WIRE_PREP_SHARE: f64 = 2.0 / 3.0;

/// Per-output error of a MAJ3 in units of `p`, from the componentwise sum.
pub const EPSILON_PER_P: f64 = 148.0 / 63.0;

/// Alternate MAJ3 constant `52/21`, kept for reproducing headline figures
/// quoted with it. Not used by any model.
pub const EPSILON_PER_P_ALT: f64 = 52.0 / 21.0;

/// Error-class probabilities of an elementary three-bit gate, as fractions of
/// `p_c`: exactly one, exactly two, all three outputs wrong.
pub const CLASS_ONE: f64 = 3.0 / 7.0;
pub const CLASS_TWO: f64 = 3.0 / 7.0;
pub const CLASS_THREE: f64 = 1.0 / 7.0;

/// Marginal per-output error of an elementary gate, as a fraction of `p_c`.
pub const PER_OUTPUT_SHARE: f64 = 4.0 / 7.0;

/// The physical noise level and its two directly derived location rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalNoise {
    pub p: f64,
    pub p_c: f64,
    pub wire_prep: f64,
}

impl PhysicalNoise {
    pub fn new(p: f64) -> Result<Self> {
        let p = check_probability("p", p)?;
        Ok(Self {
            p,
            p_c: CLASSICAL_SHARE * p,
            wire_prep: WIRE_PREP_SHARE * p,
        })
    }
}

/// Output error rates of a full MAJ3 (MAJ1 followed by AMP).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maj3Rates {
    pub epsilon: f64,
    /// Output rate of a MAJ1 whose trailing AMP has been cut off for a
    /// computational step.
    pub epsilon_prime: f64,
    /// Incipient-equivalent rate of the last encoding layer.
    pub epsilon_zero: f64,
}

/// Location rates of the AMP encoding cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingRates {
    pub q_i: f64,
    pub q_o: f64,
    pub ap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    pub noise: PhysicalNoise,
    pub maj3: Maj3Rates,
    pub encoding: EncodingRates,
    /// Set when a rate exceeded 1 and was projected back onto [0, 1].
    pub clamped: bool,
}

/// Derive every location rate from `p`.
pub fn derive_rates(p: f64) -> Result<DerivedRates> {
    let noise = PhysicalNoise::new(p)?;
    let wire_prep = noise.wire_prep;

    let q_i = PER_OUTPUT_SHARE * noise.p_c;
    let q_o = 2.0 * wire_prep + noise.p_c / 7.0;
    let ap = q_i + q_o;
    let epsilon = 2.0 * wire_prep + 2.0 * PER_OUTPUT_SHARE * noise.p_c;
    let epsilon_zero = ap + 2.0 * wire_prep;

    let mut clamped = false;
    let mut clamp = |x: f64| {
        if x > 1.0 {
            clamped = true;
            1.0
        } else {
            x
        }
    };
    let epsilon = clamp(epsilon);
    let epsilon_zero = clamp(epsilon_zero);
    let ap = clamp(ap);
    let q_o = clamp(q_o);

    Ok(DerivedRates {
        noise,
        maj3: Maj3Rates {
            epsilon,
            epsilon_prime: epsilon / 2.0,
            epsilon_zero,
        },
        encoding: EncodingRates { q_i, q_o, ap },
        clamped,
    })
}

/// `epsilon(p)`, clamped to 1.
pub fn epsilon_of_p(p: f64) -> Result<f64> {
    Ok(derive_rates(p)?.maj3.epsilon)
}

/// The two stable per-bit error probabilities of a MAJ3 with independent
/// inputs, `1/2 (1 -+ sqrt((1 - 6e) / (1 - 2e)))`.
pub fn jvn_stable_eta(epsilon: f64) -> Result<(f64, f64)> {
    check_probability("epsilon", epsilon)?;
    let sixth = 1.0 / 6.0;
    if epsilon > sixth + 1e-15 {
        return Err(Error::AboveFixedPointThreshold { epsilon });
    }
    let ratio = ((1.0 - 6.0 * epsilon) / (1.0 - 2.0 * epsilon)).max(0.0);
    let root = ratio.sqrt();
    Ok((0.5 * (1.0 - root), 0.5 * (1.0 + root)))
}

/// One restorative step of the per-bit error probability for a MAJ3 whose
/// three inputs err independently with probability `eta`.
pub fn single_triple_map(eta: f64, epsilon: f64) -> f64 {
    let wrong = eta * eta * (3.0 - 2.0 * eta);
    (1.0 - epsilon) * wrong + epsilon * (1.0 - wrong)
}
