//! Transition probabilities as positive sums of gate-outcome monomials.
//!
//! Every probability in the jump-process models is a sum of products of the
//! per-gate outcome probabilities
//!
//! * `I = 3e^2 - 2e^3` and `1 - I = (1 - e)^2 (1 + 2e)`: gate with no
//!   propagated input fails / survives,
//! * `P = 2e - e^2` and `1 - P = (1 - e)^2`: gate with one propagated input
//!   fails / survives,
//!
//! so each entry is stored as `sum c * I^a (1-I)^b P^c (1-P)^d` with
//! non-negative integer `c`. Evaluating it never subtracts, which keeps full
//! relative precision down to probabilities far below `1e-16`.

use std::collections::BTreeMap;
use std::fmt;

/// Exponents of `I`, `1 - I`, `P`, `1 - P`.
pub type Exponents = [u8; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis {
    pub i: f64,
    pub not_i: f64,
    pub p: f64,
    pub not_p: f64,
}

impl Basis {
    pub fn at(epsilon: f64) -> Self {
        let e = epsilon;
        let one_minus = 1.0 - e;
        Self {
            i: e * e * (3.0 - 2.0 * e),
            not_i: one_minus * one_minus * (1.0 + 2.0 * e),
            p: e * (2.0 - e),
            not_p: one_minus * one_minus,
        }
    }
}

/// Probability that a gate with `propagated` erroneous inputs fails or
/// survives this step: `(fail, survive)` monomials, `None` for probability 0.
pub fn gate_outcome(propagated: usize) -> (Option<Exponents>, Option<Exponents>) {
    match propagated {
        0 => (Some([1, 0, 0, 0]), Some([0, 1, 0, 0])),
        1 => (Some([0, 0, 1, 0]), Some([0, 0, 0, 1])),
        _ => (Some([0; 4]), None),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Exponents, u64>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, [0; 4])
    }

    pub fn monomial(coef: u64, exps: Exponents) -> Self {
        let mut p = Self::zero();
        p.add_term(coef, exps);
        p
    }

    pub fn add_term(&mut self, coef: u64, exps: Exponents) {
        if coef == 0 {
            return;
        }
        *self.terms.entry(exps).or_insert(0) += coef;
    }

    pub fn add(&mut self, other: &Poly) {
        for (&e, &c) in &other.terms {
            self.add_term(c, e);
        }
    }

    pub fn scaled(&self, k: u64) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|_| k != 0)
                .map(|(&e, &c)| (e, c * k))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
                out.add_term(ca * cb, e);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exponents, u64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn eval_basis(&self, b: &Basis) -> f64 {
        self.terms
            .iter()
            .map(|(e, &c)| {
                c as f64
                    * b.i.powi(e[0] as i32)
                    * b.not_i.powi(e[1] as i32)
                    * b.p.powi(e[2] as i32)
                    * b.not_p.powi(e[3] as i32)
            })
            .sum()
    }

    pub fn eval(&self, epsilon: f64) -> f64 {
        self.eval_basis(&Basis::at(epsilon))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = ["I", "(1-I)", "P", "(1-P)"];
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (name, &x) in names.iter().zip(e.iter()) {
                match x {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{x}")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_complements() {
        for k in 0..=100 {
            let e = k as f64 / 100.0;
            let b = Basis::at(e);
            assert!((b.i + b.not_i - 1.0).abs() < 1e-15);
            assert!((b.p + b.not_p - 1.0).abs() < 1e-15);
            assert!((b.i - (3.0 * e * e - 2.0 * e * e * e)).abs() < 1e-15);
        }
    }

    #[test]
    fn product_and_eval() {
        // (I + (1-I))^3 == 1
        let x = {
            let mut p = Poly::monomial(1, [1, 0, 0, 0]);
            p.add_term(1, [0, 1, 0, 0]);
            p
        };
        let cube = x.mul(&x).mul(&x);
        assert_eq!(cube.terms().count(), 4);
        for &e in &[0.0, 0.01, 0.3, 0.9] {
            assert!((cube.eval(e) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn display() {
        let mut p = Poly::monomial(3, [1, 2, 0, 0]);
        p.add_term(1, [0, 0, 0, 3]);
        assert_eq!(p.to_string(), "1*(1-P)^3 + 3*I*(1-I)^2");
        assert_eq!(Poly::zero().to_string(), "0");
    }

    #[test]
    fn tiny_epsilon_keeps_relative_precision() {
        let p = Poly::monomial(27, [2, 0, 0, 0]);
        let e: f64 = 1e-6;
        let exact = 27.0 * (e * e * (3.0 - 2.0 * e)).powi(2);
        assert!((p.eval(e) / exact - 1.0).abs() < 1e-14);
    }
}
