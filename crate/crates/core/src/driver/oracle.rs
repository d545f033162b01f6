//! Reference eigenvalues of the truncated Hamiltonian matrix.
//!
//! Bisection on the eigenvalue count: by Sylvester's law of inertia the
//! number of negative pivots in the `LDL^T` factorization of `H - sigma I`
//! equals the number of eigenvalues below `sigma`. The band (offsets up to
//! 4) is preserved by the factorization, so each count costs `O(N)`.

use crate::oscillator::{build_hamiltonian, BandedOperator, BasisSpec};
use crate::scalar::{PrecisionContext, Real};

const BAND: usize = 4;

/// Number of eigenvalues of `h` strictly below `sigma`.
pub fn count_below(ctx: &PrecisionContext, h: &BandedOperator, sigma: &Real) -> usize {
    let n = h.dim();
    // rows[i][j] holds L[i][i-j-1] * d[i-j-1] style band entries of the
    // partially factored matrix: we store the working band U[i][i+j]
    let mut band: Vec<Vec<Real>> = (0..n)
        .map(|i| {
            (0..=BAND)
                .map(|j| {
                    if i + j >= n {
                        ctx.zero()
                    } else if j == 0 {
                        h.entry(ctx, i, i) - sigma
                    } else {
                        h.entry(ctx, i, i + j)
                    }
                })
                .collect()
        })
        .collect();
    let tiny = ctx.epsilon().square();
    let mut negatives = 0;
    for i in 0..n {
        let mut pivot = band[i][0].clone();
        if pivot.is_zero() {
            pivot = tiny.clone();
        }
        if pivot.is_sign_negative() {
            negatives += 1;
        }
        // eliminate below the pivot inside the band
        for j in 1..=BAND.min(n - 1 - i) {
            let factor = &band[i][j] / &pivot;
            if factor.is_zero() {
                continue;
            }
            for l in j..=BAND.min(n - 1 - i) {
                let update = &factor * &band[i][l];
                band[i + j][l - j] -= update;
            }
        }
    }
    negatives
}

/// Lowest `how_many` eigenvalues of the `(N_s + 1)`-dimensional matrix of
/// `H`, ascending, each to within `10^-digits` relative.
pub fn diagonalize_oracle(ctx: &PrecisionContext, spec: &BasisSpec, how_many: usize) -> crate::Result<Vec<Real>> {
    if how_many > spec.dim() {
        return Err(crate::Error::Config(format!("requested {how_many} eigenvalues of a {}-dimensional matrix", spec.dim())));
    }
    let h = build_hamiltonian(ctx, spec);
    let (lo, hi) = gershgorin(ctx, &h);
    let tol = ctx.pow10(-(ctx.digits() as i32));
    let mut out = Vec::with_capacity(how_many);
    for k in 0..how_many {
        // smallest sigma with more than k eigenvalues below it
        let mut a = lo.clone();
        let mut b = hi.clone();
        let start = out.last().cloned().unwrap_or_else(|| lo.clone());
        if start > a {
            a = start;
        }
        loop {
            let mid = (&a + &b) / 2;
            if count_below(ctx, &h, &mid) > k {
                b = mid;
            } else {
                a = mid;
            }
            let width = (&b - &a).abs();
            if width <= &tol * b.abs().max(ctx.one()) {
                break;
            }
        }
        out.push((&a + &b) / 2);
    }
    Ok(out)
}

fn gershgorin(ctx: &PrecisionContext, h: &BandedOperator) -> (Real, Real) {
    let n = h.dim();
    let mut lo: Option<Real> = None;
    let mut hi: Option<Real> = None;
    for i in 0..n {
        let mut radius = ctx.zero();
        for j in i.saturating_sub(BAND)..(i + BAND + 1).min(n) {
            if j != i {
                radius += h.entry(ctx, i, j).abs();
            }
        }
        let d = h.entry(ctx, i, i);
        let l = &d - &radius;
        let u = &d + &radius;
        lo = Some(match lo {
            Some(x) if x < l => x,
            _ => l,
        });
        hi = Some(match hi {
            Some(x) if x > u => x,
            _ => u,
        });
    }
    let pad = ctx.one();
    (lo.expect("nonempty matrix") - &pad, hi.expect("nonempty matrix") + &pad)
}
