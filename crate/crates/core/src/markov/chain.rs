use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::markov::poly::{gate_outcome, Exponents, Poly};

/// A finite jump process over propagated-error states.
///
/// `trans[m][n]` is the probability of moving from state `m` to state `n`
/// in one correction step without a logical error, and `fail[m]` the
/// probability of a logical error from `m`; `sum_n trans[m][n] + fail[m] =
/// 1`. `weight[m] / weight_scale` is the expected fraction of erroneous
/// physical bits after a step from `m` that did not fail, multiplied by the
/// probability of not failing.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorChain {
    level: u32,
    labels: Vec<String>,
    trans: Vec<Vec<Poly>>,
    fail: Vec<Poly>,
    weight: Vec<Poly>,
    weight_scale: u64,
}

/// An [`ErrorChain`] evaluated at one `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainAt {
    pub trans: Vec<Vec<f64>>,
    pub fail: Vec<f64>,
    /// Expected erroneous-bit fraction after a step, weighted by the
    /// probability of not failing.
    pub weight: Vec<f64>,
}

const CHECK_POINTS: [f64; 6] = [0.0, 1e-3, 0.05, 0.15, 0.5, 0.97];

impl ErrorChain {
    pub fn new(
        level: u32,
        labels: Vec<String>,
        trans: Vec<Vec<Poly>>,
        fail: Vec<Poly>,
        weight: Vec<Poly>,
        weight_scale: u64,
    ) -> Result<Self> {
        let k = labels.len();
        if k == 0 {
            return Err(Error::InvalidChain("no states".into()));
        }
        if trans.len() != k || trans.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidChain(format!("transition matrix is not {k}x{k}")));
        }
        if fail.len() != k || weight.len() != k {
            return Err(Error::InvalidChain("fail/weight length mismatch".into()));
        }
        if weight_scale == 0 {
            return Err(Error::InvalidChain("weight scale must be positive".into()));
        }
        let chain = Self {
            level,
            labels,
            trans,
            fail,
            weight,
            weight_scale,
        };
        for &e in &CHECK_POINTS {
            let at = chain.evaluate(e);
            for m in 0..k {
                let total: f64 = at.trans[m].iter().sum::<f64>() + at.fail[m];
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidChain(format!(
                        "row {m} sums to {total} at epsilon = {e}"
                    )));
                }
            }
        }
        Ok(chain)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn states(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn transition(&self, from: usize, to: usize) -> &Poly {
        &self.trans[from][to]
    }

    pub fn failure(&self, from: usize) -> &Poly {
        &self.fail[from]
    }

    pub fn weight_scale(&self) -> u64 {
        self.weight_scale
    }

    pub fn evaluate(&self, epsilon: f64) -> ChainAt {
        let basis = crate::markov::poly::Basis::at(epsilon);
        let scale = self.weight_scale as f64;
        ChainAt {
            trans: self
                .trans
                .iter()
                .map(|row| row.iter().map(|p| p.eval_basis(&basis).min(1.0)).collect())
                .collect(),
            fail: self.fail.iter().map(|p| p.eval_basis(&basis).min(1.0)).collect(),
            weight: self
                .weight
                .iter()
                .map(|p| p.eval_basis(&basis) / scale)
                .collect(),
        }
    }

    /// Expected fraction of erroneous bits one step after state `m`, given
    /// that the step did not produce a logical error.
    pub fn bit_error_weight(&self, epsilon: f64) -> Vec<f64> {
        let at = self.evaluate(epsilon);
        at.trans
            .iter()
            .zip(&at.weight)
            .map(|(row, w)| {
                let survive: f64 = row.iter().sum();
                if survive > 0.0 {
                    w / survive
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Text form: a header, one `label` line per state, then one line per
    /// monomial. See the crate README for the grammar.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ftcc-chain v1");
        let _ = writeln!(out, "level {}", self.level);
        let _ = writeln!(out, "states {}", self.states());
        let _ = writeln!(out, "weight-scale {}", self.weight_scale);
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "label {i} {l}");
        }
        let term = |out: &mut String, head: String, p: &Poly| {
            for (e, c) in p.terms() {
                let _ = writeln!(out, "{head} {c} {} {} {} {}", e[0], e[1], e[2], e[3]);
            }
        };
        for (m, row) in self.trans.iter().enumerate() {
            for (n, p) in row.iter().enumerate() {
                term(&mut out, format!("T {m} {n}"), p);
            }
        }
        for (m, p) in self.fail.iter().enumerate() {
            term(&mut out, format!("F {m}"), p);
        }
        for (m, p) in self.weight.iter().enumerate() {
            term(&mut out, format!("W {m}"), p);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Parse(format!("chain line {}: {msg}", line + 1));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut header = |key: &str| -> Result<String> {
            let (i, l) = lines.next().ok_or_else(|| Error::Parse("truncated chain".into()))?;
            l.strip_prefix(key)
                .map(|rest| rest.trim().to_string())
                .ok_or_else(|| bad(i, &format!("expected `{key}`")))
        };
        if header("ftcc-chain")? != "v1" {
            return Err(Error::Parse("unsupported chain version".into()));
        }
        let num = |s: String| s.parse::<u64>().map_err(|e| Error::Parse(e.to_string()));
        let level = num(header("level")?)? as u32;
        let k = num(header("states")?)? as usize;
        let weight_scale = num(header("weight-scale")?)?;

        let mut labels = vec![String::new(); k];
        let mut trans = vec![vec![Poly::zero(); k]; k];
        let mut fail = vec![Poly::zero(); k];
        let mut weight = vec![Poly::zero(); k];
        for (i, l) in lines {
            let mut parts = l.split_whitespace();
            let tag = parts.next().unwrap_or_default();
            if tag == "label" {
                let (idx, text) = l["label".len()..]
                    .trim_start()
                    .split_once(' ')
                    .ok_or_else(|| bad(i, "malformed label"))?;
                let idx: usize = idx.parse().map_err(|_| bad(i, "bad label index"))?;
                *labels.get_mut(idx).ok_or_else(|| bad(i, "label index out of range"))? =
                    text.to_string();
                continue;
            }
            let fields: Vec<u64> = parts
                .map(|s| s.parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(i, "non-integer field"))?;
            let (target, rest) = match (tag, fields.len()) {
                ("T", 7) => {
                    let (m, n) = (fields[0] as usize, fields[1] as usize);
                    if m >= k || n >= k {
                        return Err(bad(i, "state out of range"));
                    }
                    (&mut trans[m][n], &fields[2..])
                }
                ("F", 6) | ("W", 6) => {
                    let m = fields[0] as usize;
                    if m >= k {
                        return Err(bad(i, "state out of range"));
                    }
                    let v = if tag == "F" { &mut fail } else { &mut weight };
                    (&mut v[m], &fields[1..])
                }
                _ => return Err(bad(i, "unknown record")),
            };
            let exps: Exponents = [rest[1] as u8, rest[2] as u8, rest[3] as u8, rest[4] as u8];
            target.add_term(rest[0], exps);
        }
        Self::new(level, labels, trans, fail, weight, weight_scale)
    }
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// The three-state model of the 27-bit code: no propagated error (A), one
/// failed level-1 MAJ carried over (B), logical error (C).
///
/// With `g = I` the failure probability of a clean level-1 MAJ:
/// `P(B|A) = 3g(1-g)^2`, `P(C|A) = 3g^2 - 2g^3`, `P(A|B) = (1-e)^6`,
/// `P(B|B) = 3P(1-P)^2 = 6e(1-e)^5 + 3e^2(1-e)^4`.
pub fn build_level2_chain() -> ErrorChain {
    // from each state the three next-layer gates fail independently with
    // the same probability: I from A, P from B
    let row = |fail: Exponents, ok: Exponents| {
        let none = Poly::monomial(1, [3 * ok[0], 3 * ok[1], 3 * ok[2], 3 * ok[3]]);
        let one = Poly::monomial(
            3,
            [fail[0] + 2 * ok[0], fail[1] + 2 * ok[1], fail[2] + 2 * ok[2], fail[3] + 2 * ok[3]],
        );
        let mut two_plus = Poly::monomial(
            3,
            [2 * fail[0] + ok[0], 2 * fail[1] + ok[1], 2 * fail[2] + ok[2], 2 * fail[3] + ok[3]],
        );
        two_plus.add_term(1, [3 * fail[0], 3 * fail[1], 3 * fail[2], 3 * fail[3]]);
        (none, one, two_plus)
    };
    let (aa, ab, ac) = row([1, 0, 0, 0], [0, 1, 0, 0]);
    let (ba, bb, bc) = row([0, 0, 1, 0], [0, 0, 0, 1]);
    // one failed level-1 MAJ corrupts a third of the bits
    let weight = vec![ab.clone(), bb.clone()];
    ErrorChain::new(
        2,
        labels(&["no propagated error", "one failed level-1 MAJ"]),
        vec![vec![aa, ab], vec![ba, bb]],
        vec![ac, bc],
        weight,
        3,
    )
    .expect("level-2 rows are complete binomial expansions")
}

/// Propagated-error pattern of one 3x3 square, oriented so that the lines
/// of the next gate layer are rows: bit `3 * line + position`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pattern(pub u16);

impl Pattern {
    pub fn get(self, line: usize, position: usize) -> bool {
        self.0 >> (3 * line + position) & 1 == 1
    }

    pub fn line_counts(self) -> [usize; 3] {
        [0, 1, 2].map(|l| (0..3).filter(|&p| self.get(l, p)).count())
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }
}

/// State of the level-3 chain reached by a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level3Class {
    State(usize),
    Logical,
}

pub const LEVEL3_LABELS: [&str; 7] = [
    "no propagated errors",
    "1 propagated error",
    "2 propagated errors on distinct lines",
    "3 propagated errors on distinct lines",
    "2-3 errors on one line, no others",
    "2-3 errors on one line, 1 other",
    "2-3 errors on one line, 2 others on distinct lines",
];

/// Two lines each holding two or more propagated errors make every gate of
/// the following layer fail: a logical error. Otherwise the class depends
/// only on how many lines hold one error and whether one line holds more.
pub fn classify_level3(p: Pattern) -> Level3Class {
    let counts = p.line_counts();
    let heavy = counts.iter().filter(|&&c| c >= 2).count();
    let single = counts.iter().filter(|&&c| c == 1).count();
    match heavy {
        0 => Level3Class::State(single),
        1 => Level3Class::State(4 + single),
        _ => Level3Class::Logical,
    }
}

struct Row {
    trans: Vec<Poly>,
    fail: Poly,
    weight: Poly,
}

/// All next-step outcomes from pattern `p`.
///
/// Gate `(square s, line j)` of the next layer sees the propagated errors of
/// line `j`, identical in every square. When it fails it leaves one
/// propagated error at position `j` of line `s` for the layer after (the
/// failed column `k` of square `l` lands at row `l`, column `k` of every
/// square, and the rows are the next lines).
fn level3_row(p: Pattern) -> Row {
    let counts = p.line_counts();
    let outcome: Vec<_> = counts.iter().map(|&c| gate_outcome(c)).collect();
    let mut row = Row {
        trans: vec![Poly::zero(); 7],
        fail: Poly::zero(),
        weight: Poly::zero(),
    };
    'mask: for mask in 0u16..512 {
        let mut exps = [0u8; 4];
        for s in 0..3 {
            for j in 0..3 {
                let failed = mask >> (3 * s + j) & 1 == 1;
                let (f, ok) = outcome[j];
                match if failed { f } else { ok } {
                    Some(e) => {
                        for (x, y) in exps.iter_mut().zip(e) {
                            *x += y;
                        }
                    }
                    None => continue 'mask,
                }
            }
        }
        let next = Pattern(mask);
        match classify_level3(next) {
            Level3Class::Logical => row.fail.add_term(1, exps),
            Level3Class::State(n) => {
                row.trans[n].add_term(1, exps);
                row.weight.add_term(next.count() as u64, exps);
            }
        }
    }
    row
}

/// The seven-state model of the 81-bit code, derived by enumerating every
/// propagated-error pattern and every pattern of gate failures of the next
/// layer.
///
/// Accidental corrections are ignored: a gate with two or more propagated
/// inputs always fails. All 512 patterns are enumerated and every pattern of
/// a class must produce exactly the same outcome polynomials, otherwise the
/// build aborts.
pub fn build_level3_chain() -> Result<ErrorChain> {
    let mut rows: Vec<Option<(Pattern, Row)>> = (0..7).map(|_| None).collect();
    for bits in 0u16..512 {
        let p = Pattern(bits);
        let Level3Class::State(m) = classify_level3(p) else {
            continue;
        };
        let row = level3_row(p);
        match &rows[m] {
            None => rows[m] = Some((p, row)),
            Some((rep, first)) => {
                if first.trans != row.trans || first.fail != row.fail || first.weight != row.weight {
                    return Err(Error::Enumeration(format!(
                        "patterns {:09b} and {:09b} share class {m} but have different transitions",
                        rep.0, p.0
                    )));
                }
            }
        }
    }
    let mut trans = Vec::with_capacity(7);
    let mut fail = Vec::with_capacity(7);
    let mut weight = Vec::with_capacity(7);
    for (m, slot) in rows.into_iter().enumerate() {
        let (_, row) = slot.ok_or_else(|| Error::Enumeration(format!("class {m} is empty")))?;
        trans.push(row.trans);
        fail.push(row.fail);
        weight.push(row.weight);
    }
    ErrorChain::new(3, labels(&LEVEL3_LABELS), trans, fail, weight, 9)
        .map_err(|e| Error::Enumeration(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level2_matches_table_formulas() {
        let c = build_level2_chain();
        for &e in &[1e-4, 0.01, 0.1, 0.2, 0.5] {
            let g: f64 = 3.0 * e * e - 2.0 * e * e * e;
            let at = c.evaluate(e);
            let ba = 3.0 * g * (1.0 - g).powi(2);
            let ca = 3.0 * g * g - 2.0 * g * g * g;
            let ab = (1.0f64 - e).powi(6);
            let bb = 6.0 * e * (1.0f64 - e).powi(5) + 3.0 * e * e * (1.0f64 - e).powi(4);
            assert!((at.trans[0][1] - ba).abs() < 1e-15);
            assert!((at.fail[0] - ca).abs() < 1e-15);
            assert!((at.trans[0][0] - (1.0 - ba - ca)).abs() < 1e-14);
            assert!((at.trans[1][0] - ab).abs() < 1e-14);
            assert!((at.trans[1][1] - bb).abs() < 1e-14);
            assert!((at.fail[1] - (1.0 - ab - bb)).abs() < 1e-14);
        }
    }

    #[test]
    fn level2_examples() {
        let c = build_level2_chain();
        let at = c.evaluate(0.0);
        assert_eq!(at.trans[0][0], 1.0);
        assert_eq!(at.fail, vec![0.0, 0.0]);
        let at = c.evaluate(0.1);
        // gamma = 0.028
        assert!((at.trans[0][1] - 3.0 * 0.028 * 0.972 * 0.972).abs() < 1e-15);
        assert!((at.trans[0][1] - 0.07936).abs() < 1e-5);
        // leading order of P(C|A) is 27 e^4
        let e = 1e-4;
        let fail = c.evaluate(e).fail[0];
        assert!(fail <= 27.0 * e.powi(4));
        assert!((fail / (27.0 * e.powi(4)) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn level3_has_seven_states() {
        let c = build_level3_chain().unwrap();
        assert_eq!(c.states(), 7);
        assert_eq!(c.level(), 3);
    }

    #[test]
    fn level3_clean_state_is_absorbing_without_noise() {
        let c = build_level3_chain().unwrap();
        let at = c.evaluate(0.0);
        assert_eq!(at.trans[0][0], 1.0);
        assert_eq!(at.fail[0], 0.0);
    }

    #[test]
    fn single_propagated_error_row() {
        // one propagated error: the three gates on its line (one per square)
        // fail with P, the other six with I
        let c = build_level3_chain().unwrap();
        let e = 0.1;
        let at = c.evaluate(e);
        let p = 2.0 * e - e * e;
        assert!((p - 0.19).abs() < 1e-15);
        let i = 3.0 * e * e - 2.0 * e * e * e;
        let clean = (1.0 - p).powi(3) * (1.0 - i).powi(6);
        assert!((at.trans[1][0] - clean).abs() < 1e-15);
    }

    #[test]
    fn classification_examples() {
        // rows are lines
        assert_eq!(classify_level3(Pattern(0)), Level3Class::State(0));
        assert_eq!(classify_level3(Pattern(0b000_000_001)), Level3Class::State(1));
        assert_eq!(classify_level3(Pattern(0b000_001_001)), Level3Class::State(2));
        assert_eq!(classify_level3(Pattern(0b100_010_001)), Level3Class::State(3));
        assert_eq!(classify_level3(Pattern(0b000_000_011)), Level3Class::State(4));
        assert_eq!(classify_level3(Pattern(0b000_000_111)), Level3Class::State(4));
        assert_eq!(classify_level3(Pattern(0b000_100_011)), Level3Class::State(5));
        assert_eq!(classify_level3(Pattern(0b010_100_111)), Level3Class::State(6));
        assert_eq!(classify_level3(Pattern(0b000_011_011)), Level3Class::Logical);
    }

    #[test]
    fn text_round_trip() {
        for c in [build_level2_chain(), build_level3_chain().unwrap()] {
            let text = c.to_text();
            let back = ErrorChain::from_text(&text).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn text_rejects_garbage() {
        assert!(ErrorChain::from_text("").is_err());
        assert!(ErrorChain::from_text("ftcc-chain v2\n").is_err());
        let mut t = build_level2_chain().to_text();
        t.push_str("T 0 5 1 0 0 0 0\n");
        assert!(ErrorChain::from_text(&t).is_err());
    }

    #[test]
    fn incomplete_rows_rejected() {
        let err = ErrorChain::new(
            1,
            vec!["a".into()],
            vec![vec![Poly::monomial(1, [0, 1, 0, 0])]],
            vec![Poly::zero()],
            vec![Poly::zero()],
            1,
        );
        assert!(err.is_err());
    }
}
