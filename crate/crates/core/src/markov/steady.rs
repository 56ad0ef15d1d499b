use crate::error::{check_probability, Error, Result};
use crate::markov::chain::ErrorChain;

const MAX_ITERATIONS: usize = 1_000_000;
const ABS_TOL: f64 = 1e-15;
const REL_TOL: f64 = 1e-12;

/// Stationary behaviour of a chain conditioned on no logical error.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub pi: Vec<f64>,
    /// Logical failure probability per restorative phase, `pi . fail`.
    pub p_ss: f64,
    pub iterations: usize,
}

/// Rows of the transition matrix scaled to sum to one.
pub fn normalized_matrix(chain: &ErrorChain, epsilon: f64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let at = chain.evaluate(epsilon);
    let mut rows = Vec::with_capacity(at.trans.len());
    for (m, row) in at.trans.iter().enumerate() {
        let survive: f64 = row.iter().sum();
        if survive <= 0.0 {
            return Err(Error::InvalidChain(format!(
                "state {m} fails with certainty at epsilon = {epsilon}"
            )));
        }
        rows.push(row.iter().map(|x| x / survive).collect());
    }
    Ok((rows, at.fail))
}

/// Power iteration from the error-free state until the largest change is
/// below `1e-15` absolute and `1e-12` relative to each component.
pub fn steady_state(chain: &ErrorChain, epsilon: f64) -> Result<SteadyState> {
    check_probability("epsilon", epsilon)?;
    let k = chain.states();
    let mut pi = vec![0.0; k];
    pi[0] = 1.0;
    if epsilon == 0.0 {
        return Ok(SteadyState {
            pi,
            p_ss: 0.0,
            iterations: 0,
        });
    }
    let (norm, fail) = normalized_matrix(chain, epsilon)?;
    let mut next = vec![0.0; k];
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (m, &w) in pi.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (x, t) in next.iter_mut().zip(&norm[m]) {
                *x += w * t;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);

        let mut abs = 0.0f64;
        let mut rel = 0.0f64;
        for (a, b) in next.iter().zip(&pi) {
            let d = (a - b).abs();
            abs = abs.max(d);
            if *a > 0.0 {
                rel = rel.max(d / a);
            }
        }
        std::mem::swap(&mut pi, &mut next);
        residual = abs;
        if abs < ABS_TOL && rel < REL_TOL {
            let p_ss = pi.iter().zip(&fail).map(|(a, f)| a * f).sum();
            return Ok(SteadyState {
                pi,
                p_ss,
                iterations: it,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: MAX_ITERATIONS,
        residual,
    })
}

/// Stationary probability that a randomly chosen physical bit carries a
/// propagated error.
pub fn propagated_bit_error(chain: &ErrorChain, epsilon: f64) -> Result<f64> {
    let ss = steady_state(chain, epsilon)?;
    if epsilon == 0.0 {
        return Ok(0.0);
    }
    let weights = chain.bit_error_weight(epsilon);
    Ok(ss.pi.iter().zip(&weights).map(|(a, w)| a * w).sum())
}
