//! Diagonal Padé acceleration of a power series evaluated at `q = 1`.
//!
//! Uses Wynn's epsilon algorithm on the partial sums `S_0, S_1, ...`: the
//! even column `eps_{2m}` started at `S_0` equals the `[m, m]` Padé
//! approximant of `sum_k c_k q^k` at `q = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{PrecisionContext, Real};

/// One diagonal approximant.
#[derive(Clone, Debug, PartialEq)]
pub struct PadeResult {
    pub m: usize,
    pub value: Real,
    /// Set when the `[m, m]` entry hit a vanishing epsilon denominator; the
    /// value is then the last diagonal entry that could be formed.
    pub degenerate: bool,
}

/// `[m, m]` Padé approximant at `q = 1` of the series with coefficients
/// `terms`. Needs at least `2m + 1` terms.
pub fn homotopy_pade(ctx: &PrecisionContext, terms: &[Real], m: usize) -> Result<PadeResult> {
    let table = pade_table(ctx, terms, m)?;
    Ok(table.into_iter().last().expect("table holds m + 1 entries"))
}

/// `[k, k]` approximants for `k = 0..=max_m`.
pub fn pade_table(ctx: &PrecisionContext, terms: &[Real], max_m: usize) -> Result<Vec<PadeResult>> {
    let needed = 2 * max_m + 1;
    if terms.len() < needed {
        return Err(Error::InsufficientTerms { needed, got: terms.len() });
    }
    let mut partial = Vec::with_capacity(needed);
    let mut acc = ctx.zero();
    for t in &terms[..needed] {
        acc += t;
        partial.push(acc.clone());
    }

    // prev2 = eps_{k-1}, prev = eps_k; None marks entries that could not be
    // formed because a difference vanished somewhere in their cone
    let mut prev2: Vec<Option<Real>> = vec![Some(ctx.zero()); needed + 1];
    let mut prev: Vec<Option<Real>> = partial.iter().cloned().map(Some).collect();
    let mut diagonal = vec![Some(partial[0].clone())];
    for k in 0..2 * max_m {
        let len = prev.len() - 1;
        let mut next = Vec::with_capacity(len);
        for j in 0..len {
            let entry = match (&prev[j], &prev[j + 1], &prev2[j + 1]) {
                (Some(a), Some(b), Some(c)) => {
                    let diff = b - a;
                    if diff.abs() < *ctx.epsilon() {
                        None
                    } else {
                        Some(c + &diff.recip())
                    }
                }
                _ => None,
            };
            next.push(entry);
        }
        prev2 = prev;
        prev = next;
        if k % 2 == 1 {
            diagonal.push(prev[0].clone());
        }
    }

    let mut out = Vec::with_capacity(max_m + 1);
    let mut last_good = partial[0].clone();
    for (m, entry) in diagonal.into_iter().enumerate() {
        match entry {
            Some(value) => {
                last_good = value.clone();
                out.push(PadeResult { m, value, degenerate: false });
            }
            None => out.push(PadeResult { m, value: last_good.clone(), degenerate: true }),
        }
    }
    Ok(out)
}

/// Serializable form of a [`PadeResult`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadeRow {
    pub m: usize,
    pub value: String,
    pub degenerate: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::make_context;

    #[test]
    fn constant_series() {
        let ctx = make_context(50).unwrap();
        let c = ctx.ratio(7, 3);
        let mut terms = vec![c.clone()];
        terms.extend((0..10).map(|_| ctx.zero()));
        for m in 0..=5 {
            let r = homotopy_pade(&ctx, &terms, m).unwrap();
            assert_eq!(r.value, c);
            assert_eq!(r.degenerate, m > 0);
        }
    }

    #[test]
    fn geometric_series_is_exact_at_first_diagonal() {
        let ctx = make_context(50).unwrap();
        let terms: Vec<Real> = (0..3).map(|k| ctx.ratio(-1, 2).powi(k)).collect();
        let r = homotopy_pade(&ctx, &terms, 1).unwrap();
        assert!(!r.degenerate);
        assert!((r.value - ctx.ratio(2, 3)).abs() < ctx.pow10(-48));
    }

    #[test]
    fn too_few_terms() {
        let ctx = make_context(50).unwrap();
        let terms = vec![ctx.one(); 4];
        assert!(matches!(homotopy_pade(&ctx, &terms, 2), Err(Error::InsufficientTerms { needed: 5, got: 4 })));
    }

    #[test]
    fn log_series_converges_faster_than_partial_sums() {
        // ln 2 = sum (-1)^k / (k+1)
        let ctx = make_context(50).unwrap();
        let terms: Vec<Real> = (0..21).map(|k| ctx.ratio(if k % 2 == 0 { 1 } else { -1 }, k + 1)).collect();
        let ln2 = ctx.int(2).as_float().clone().ln();
        let ln2 = Real::from_float(ln2);
        let r = homotopy_pade(&ctx, &terms, 10).unwrap();
        assert!((r.value - &ln2).abs() < ctx.pow10(-14));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Maclaurin coefficients of P(q)/Q(q) by long division.
        fn series(ctx: &PrecisionContext, p: &[i64], q: &[i64], count: usize) -> Vec<Real> {
            let mut out: Vec<Real> = Vec::with_capacity(count);
            let q0 = ctx.int(q[0]);
            for k in 0..count {
                let mut acc = p.get(k).map(|&c| ctx.int(c)).unwrap_or_else(|| ctx.zero());
                for j in 1..q.len().min(k + 1) {
                    acc -= ctx.int(q[j]) * &out[k - j];
                }
                out.push(acc / &q0);
            }
            out
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn exact_on_rational_functions(
                m in 1usize..5,
                p in proptest::collection::vec(-9i64..9, 5),
                q in proptest::collection::vec(-4i64..4, 5),
            ) {
                let ctx = make_context(60).unwrap();
                let p = &p[..=m];
                let mut q = q[..=m].to_vec();
                q[0] = 10; // keeps Q(1) away from zero and Q(0) != 0
                let terms = series(&ctx, p, &q, 2 * m + 1);
                let r = homotopy_pade(&ctx, &terms, m).unwrap();
                let p1 = p.iter().sum::<i64>();
                let q1 = q.iter().sum::<i64>();
                prop_assume!(q1 != 0);
                prop_assume!(!r.degenerate);
                let exact = ctx.ratio(p1, q1);
                prop_assert!((r.value - &exact).abs() < ctx.pow10(-(60 - 10)) * exact.abs().max(ctx.one()),
                    "m={} p={:?} q={:?}", m, p, q);
            }
        }
    }
}
