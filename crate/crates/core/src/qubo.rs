//! Compilation of a siting instance into quadratic unconstrained binary
//! optimization form, plus energy evaluation and a plain-text exchange format.
//!
//! The compiled energy is
//!
//! ```text
//! E(x) = offset + sum_j linear[j] x_j + sum_{i<j} quadratic[(i,j)] x_i x_j
//! ```
//!
//! and equals the placement objective plus the cardinality penalty
//! `lambda_card * (sum_j x_j - cs_count)^2`. The penalty expands (using
//! `x_j^2 = x_j`) into `lambda*(1 - 2*CS)` on every linear term, `2*lambda`
//! on every pair, and a constant `lambda*CS^2` kept in `offset`, so the
//! compiled form reproduces the constrained objective exactly on feasible
//! assignments and dominates it on infeasible ones.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::{linear_objective_coeffs, Assignment, ModelError, ProblemInstance, Weights};
use crate::scalar::Scalar;

/// Failures while parsing the text exchange format.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuboParseError {
    #[error("line {line}: expected `{expected}`, got `{got}`")]
    Malformed {
        line: usize,
        expected: &'static str,
        got: String,
    },
    #[error("line {line}: variable index {index} out of range for n = {n}")]
    IndexOutOfRange { line: usize, index: usize, n: usize },
    #[error("line {line}: duplicate coefficient for ({i}, {j})")]
    DuplicateEntry { line: usize, i: usize, j: usize },
    #[error("missing `n <count>` header line")]
    MissingHeader,
}

/// An upper-triangular QUBO over `n` binary variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubo<T> {
    n: usize,
    linear: Vec<T>,
    /// Keys are `(i, j)` with `i < j`; exact zeros are not stored.
    quadratic: BTreeMap<(usize, usize), T>,
    offset: T,
}

impl<T: Scalar> Qubo<T> {
    /// Assemble from parts. Panics if a key is not upper-triangular or out of
    /// range; this constructor is for tests and parsers, not hot paths.
    pub fn from_parts(
        n: usize,
        linear: Vec<T>,
        quadratic: BTreeMap<(usize, usize), T>,
        offset: T,
    ) -> Self {
        assert_eq!(linear.len(), n, "linear coefficient count must equal n");
        for &(i, j) in quadratic.keys() {
            assert!(
                i < j && j < n,
                "quadratic key ({i}, {j}) out of range for n = {n}"
            );
        }
        let quadratic = quadratic
            .into_iter()
            .filter(|&(_, c)| c != T::zero())
            .collect();
        Self {
            n,
            linear,
            quadratic,
            offset,
        }
    }

    /// Number of binary variables.
    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn linear(&self) -> &[T] {
        &self.linear
    }

    /// Stored pair coefficients; keys satisfy `i < j`, values are nonzero.
    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), T> {
        &self.quadratic
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    /// Coefficient for the pair `(i, j)` in either index order; zero if absent.
    pub fn pair(&self, i: usize, j: usize) -> T {
        let key = if i < j { (i, j) } else { (j, i) };
        self.quadratic.get(&key).copied().unwrap_or_else(T::zero)
    }

    /// Largest magnitude among linear and quadratic coefficients. Zero for an
    /// empty model; the offset does not participate.
    pub fn max_abs_coefficient(&self) -> T {
        let mut m = T::zero();
        for &a in &self.linear {
            m = m.max(a.abs());
        }
        for &c in self.quadratic.values() {
            m = m.max(c.abs());
        }
        m
    }

    /// Energy of one assignment.
    pub fn energy(&self, x: &Assignment) -> Result<T, ModelError> {
        if x.len() != self.n {
            return Err(ModelError::AssignmentLength {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut e = self.offset;
        for (j, &a) in self.linear.iter().enumerate() {
            if x.get(j) {
                e = e + a;
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            if x.get(i) && x.get(j) {
                e = e + c;
            }
        }
        Ok(e)
    }

    /// Serialize to the text exchange format:
    ///
    /// ```text
    /// # optional comments
    /// n 3
    /// offset 10
    /// 0 0 -9        <- linear (equal indices)
    /// 0 1 14        <- quadratic (i < j)
    /// ```
    ///
    /// Zero linear entries are written so the variable count is recoverable by
    /// inspection; zero quadratic entries are omitted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "n {}", self.n).unwrap();
        writeln!(out, "offset {}", self.offset).unwrap();
        for (j, a) in self.linear.iter().enumerate() {
            writeln!(out, "{j} {j} {a}").unwrap();
        }
        for (&(i, j), c) in &self.quadratic {
            writeln!(out, "{i} {j} {c}").unwrap();
        }
        out
    }

    /// Parse the text exchange format. Accepts `#` comments and blank lines;
    /// linear entries may be omitted (they default to zero).
    pub fn parse_text(text: &str) -> Result<Self, QuboParseError> {
        let mut n: Option<usize> = None;
        let mut offset = T::zero();
        let mut linear: Vec<T> = Vec::new();
        let mut seen_linear: Vec<bool> = Vec::new();
        let mut quadratic = BTreeMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["n", count] => {
                    let parsed = count
                        .parse::<usize>()
                        .map_err(|_| QuboParseError::Malformed {
                            line: line_no,
                            expected: "n <count>",
                            got: raw.to_string(),
                        })?;
                    n = Some(parsed);
                    linear = vec![T::zero(); parsed];
                    seen_linear = vec![false; parsed];
                }
                ["offset", value] => {
                    offset = parse_coeff(value, line_no, raw)?;
                }
                [i, j, c] => {
                    let n = n.ok_or(QuboParseError::MissingHeader)?;
                    let i = parse_index(i, line_no, raw)?;
                    let j = parse_index(j, line_no, raw)?;
                    let c = parse_coeff(c, line_no, raw)?;
                    let (lo, hi) = (i.min(j), i.max(j));
                    if hi >= n {
                        return Err(QuboParseError::IndexOutOfRange {
                            line: line_no,
                            index: hi,
                            n,
                        });
                    }
                    if lo == hi {
                        if seen_linear[lo] {
                            return Err(QuboParseError::DuplicateEntry {
                                line: line_no,
                                i: lo,
                                j: hi,
                            });
                        }
                        seen_linear[lo] = true;
                        linear[lo] = c;
                    } else {
                        if quadratic.insert((lo, hi), c).is_some() {
                            return Err(QuboParseError::DuplicateEntry {
                                line: line_no,
                                i: lo,
                                j: hi,
                            });
                        }
                    }
                }
                _ => {
                    return Err(QuboParseError::Malformed {
                        line: line_no,
                        expected: "`n <count>`, `offset <c>`, or `<i> <j> <c>`",
                        got: raw.to_string(),
                    })
                }
            }
        }

        let n = n.ok_or(QuboParseError::MissingHeader)?;
        Ok(Self::from_parts(n, linear, quadratic, offset))
    }
}

fn parse_index(s: &str, line: usize, raw: &str) -> Result<usize, QuboParseError> {
    s.parse::<usize>().map_err(|_| QuboParseError::Malformed {
        line,
        expected: "<i> <j> <c>",
        got: raw.to_string(),
    })
}

fn parse_coeff<T: Scalar>(s: &str, line: usize, raw: &str) -> Result<T, QuboParseError> {
    let v: f64 = s.parse().map_err(|_| QuboParseError::Malformed {
        line,
        expected: "a numeric coefficient",
        got: raw.to_string(),
    })?;
    Ok(T::of(v))
}

/// Compile an instance and weights into QUBO form.
///
/// The result satisfies, for every assignment `x`,
/// `energy(x) = objective_total(x) + lambda_card * (count(x) - cs_count)^2`.
pub fn build_qubo<T: Scalar>(
    inst: &ProblemInstance<T>,
    w: &Weights<T>,
) -> Result<Qubo<T>, ModelError> {
    w.validate()?;
    let e = inst.candidate_count();
    let cs = T::of_usize(inst.cs_count());
    let lambda = w.lambda_card;

    let mut linear = linear_objective_coeffs(inst, w);
    let linear_penalty = lambda * (T::one() - T::of(2.0) * cs);
    for a in &mut linear {
        *a = *a + linear_penalty;
    }

    let mut quadratic = BTreeMap::new();
    let pair_penalty = T::of(2.0) * lambda;
    for i in 0..e {
        for j in (i + 1)..e {
            let c = -(w.gamma3 * inst.pair_dist().get(i, j)) + pair_penalty;
            if c != T::zero() {
                quadratic.insert((i, j), c);
            }
        }
    }

    Ok(Qubo {
        n: e,
        linear,
        quadratic,
        offset: lambda * cs * cs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_instance, toy_instance};
    use crate::model::objective_components;
    use approx::assert_relative_eq;

    #[test]
    fn toy_compilation_hand_values() {
        // E=2, CS=1, gammas all 1, lambda = 10:
        //   linear_j = colsum_d_j - colsum_e_j + 10*(1 - 2) = a_j - 10
        //   a_0 = 2 - 1 = 1, a_1 = 4 - 3 = 1  -> linear = [-9, -9]
        //   quad_{01} = -6 + 20 = 14, offset = 10.
        let inst = toy_instance();
        let w = Weights::new(1.0, 1.0, 1.0, 10.0).unwrap();
        let q = build_qubo(&inst, &w).unwrap();
        assert_eq!(q.num_vars(), 2);
        assert_eq!(q.linear(), &[-9.0, -9.0]);
        assert_eq!(q.pair(0, 1), 14.0);
        assert_eq!(q.offset(), 10.0);

        let e10 = q.energy(&Assignment::from_bits(vec![true, false])).unwrap();
        assert_eq!(e10, 1.0);
        let e11 = q.energy(&Assignment::from_bits(vec![true, true])).unwrap();
        assert_eq!(e11, 6.0);
    }

    #[test]
    fn zero_weights_compile_to_zero_model() {
        let inst = toy_instance();
        let w = Weights::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let q = build_qubo(&inst, &w).unwrap();
        assert_eq!(q.linear(), &[0.0, 0.0]);
        assert!(q.quadratic().is_empty());
        assert_eq!(q.offset(), 0.0);
        assert_eq!(q.max_abs_coefficient(), 0.0);
    }

    #[test]
    fn energy_rejects_wrong_length() {
        let inst = toy_instance();
        let w = Weights::new(1.0, 1.0, 1.0, 10.0).unwrap();
        let q = build_qubo(&inst, &w).unwrap();
        let err = q.energy(&Assignment::zeros(5)).unwrap_err();
        assert_eq!(
            err,
            ModelError::AssignmentLength {
                expected: 2,
                got: 5
            }
        );
    }

    #[test]
    fn text_round_trip() {
        let inst = random_instance(5, 3, 2, 6, 2);
        let w = Weights::auto_for(&inst);
        let q = build_qubo(&inst, &w).unwrap();
        let text = q.to_text();
        let parsed = Qubo::<f64>::parse_text(&text).unwrap();
        assert_eq!(parsed, q);
    }

    #[test]
    fn parse_accepts_comments_and_reversed_indices() {
        let text = "# a comment\n\nn 3\noffset 2.5\n0 0 1.25\n2 1 -4\n";
        let q = Qubo::<f64>::parse_text(text).unwrap();
        assert_eq!(q.num_vars(), 3);
        assert_eq!(q.offset(), 2.5);
        assert_eq!(q.linear(), &[1.25, 0.0, 0.0]);
        assert_eq!(q.pair(1, 2), -4.0);
        assert_eq!(q.pair(2, 1), -4.0);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert_eq!(
            Qubo::<f64>::parse_text("0 0 1\n").unwrap_err(),
            QuboParseError::MissingHeader
        );
        assert!(matches!(
            Qubo::<f64>::parse_text("n 2\n0 5 1\n").unwrap_err(),
            QuboParseError::IndexOutOfRange { index: 5, n: 2, .. }
        ));
        assert!(matches!(
            Qubo::<f64>::parse_text("n 2\n0 1 1\n1 0 2\n").unwrap_err(),
            QuboParseError::DuplicateEntry { i: 0, j: 1, .. }
        ));
        assert!(matches!(
            Qubo::<f64>::parse_text("n 2\nhello\n").unwrap_err(),
            QuboParseError::Malformed { .. }
        ));
    }

    /// The defining identity: energy = objective + cardinality penalty.
    #[test]
    fn energy_identity_exhaustive_small() {
        for seed in 0..20u64 {
            let inst = random_instance(seed, 4, 2, 6, 2);
            let w = Weights::auto_for(&inst);
            let q = build_qubo(&inst, &w).unwrap();
            for mask in 0u32..(1 << 6) {
                let bits: Vec<bool> = (0..6).map(|j| mask >> j & 1 == 1).collect();
                let x = Assignment::from_bits(bits);
                let t = objective_components(&inst, &w, &x).unwrap();
                let k = x.count_selected() as f64 - inst.cs_count() as f64;
                let expected = t.total + w.lambda_card * k * k;
                let got = q.energy(&x).unwrap();
                assert_relative_eq!(got, expected, max_relative = 1e-9, epsilon = 1e-9);
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            /// Energy identity on random assignments of random instances.
            #[test]
            fn energy_matches_objective_plus_penalty(
                seed in 0u64..500,
                e in 2usize..10,
                mask in 0u32..1024,
            ) {
                let inst = random_instance(seed, 3, 2, e, (e / 2).max(1));
                let w = Weights::auto_for(&inst);
                let q = build_qubo(&inst, &w).unwrap();
                let bits: Vec<bool> = (0..e).map(|j| mask >> (j % 10) & 1 == 1).collect();
                let x = Assignment::from_bits(bits);
                let t = objective_components(&inst, &w, &x).unwrap();
                let k = x.count_selected() as f64 - inst.cs_count() as f64;
                let expected = t.total + w.lambda_card * k * k;
                let got = q.energy(&x).unwrap();
                let scale = 1.0 + expected.abs();
                prop_assert!((got - expected).abs() <= 1e-9 * scale);
            }

            /// With the automatic penalty weight, every infeasible assignment
            /// has strictly higher energy than the best feasible one.
            #[test]
            fn auto_penalty_keeps_minima_feasible(seed in 0u64..200) {
                let e = 7usize;
                let inst = random_instance(seed, 3, 2, e, 3);
                let w = Weights::auto_for(&inst);
                let q = build_qubo(&inst, &w).unwrap();
                let mut best_feasible = f64::INFINITY;
                let mut best_infeasible = f64::INFINITY;
                for mask in 0u32..(1 << e) {
                    let bits: Vec<bool> = (0..e).map(|j| mask >> j & 1 == 1).collect();
                    let x = Assignment::from_bits(bits);
                    let en = q.energy(&x).unwrap();
                    if x.count_selected() == inst.cs_count() {
                        best_feasible = best_feasible.min(en);
                    } else {
                        best_infeasible = best_infeasible.min(en);
                    }
                }
                prop_assert!(best_feasible < best_infeasible);
            }

            /// Round trip through the text format preserves the model.
            #[test]
            fn text_round_trip_random(seed in 0u64..200, e in 2usize..9) {
                let inst = random_instance(seed, 3, 1, e, 2.min(e));
                let w = Weights::auto_for(&inst);
                let q = build_qubo(&inst, &w).unwrap();
                let parsed = Qubo::<f64>::parse_text(&q.to_text()).unwrap();
                prop_assert_eq!(parsed, q);
            }
        }
    }
}
