//! Gauss–Hermite quadrature at context precision.
//!
//! Used as an independent check on the closed-form matrix elements: a
//! `k`-node rule integrates `exp(-xi^2) p(xi)` exactly for polynomials of
//! degree `<= 2k - 1`, and `psi_m xi^p psi_n` is such an integrand.

use super::normalized_recurrence;
use crate::scalar::{PrecisionContext, Real};

/// Nodes and weights of the `count`-point rule for `∫ exp(-x^2) f(x) dx`.
pub fn gauss_hermite(ctx: &PrecisionContext, count: usize) -> (Vec<Real>, Vec<Real>) {
    assert!(count > 0, "quadrature needs at least one node");
    let mut nodes = vec![ctx.zero(); count];
    let mut weights = vec![ctx.zero(); count];
    let n = count as f64;
    let mut guesses: Vec<f64> = Vec::with_capacity(count.div_ceil(2));
    let mut z = 0.0f64;
    for i in 0..count.div_ceil(2) {
        // asymptotic starting points for the largest roots, descending
        z = match i {
            0 => (2.0 * n + 1.0).sqrt() - 1.85575 * (2.0 * n + 1.0).powf(-0.16667),
            1 => z - 1.14 * n.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * guesses[0],
            3 => 1.91 * z - 0.91 * guesses[1],
            _ => 2.0 * z - guesses[i - 2],
        };
        z = newton_f64(z, count);
        guesses.push(z);
    }
    let pim4 = ctx.pi().sqrt().sqrt().recip();
    let scale = ctx.int(2 * count as i64).sqrt();
    for (i, &guess) in guesses.iter().enumerate() {
        let mut x = ctx.from_f64(guess);
        for _ in 0..64 {
            let p = normalized_recurrence(ctx, &x, pim4.clone(), count + 1);
            let deriv = &scale * &p[count - 1];
            let step = &p[count] / &deriv;
            x -= &step;
            if step.abs() <= ctx.pow10(-(ctx.digits() as i32 + 3)) * x.abs().max(ctx.one()) {
                break;
            }
        }
        let p = normalized_recurrence(ctx, &x, pim4.clone(), count + 1);
        let deriv = &scale * &p[count - 1];
        let w = ctx.int(2) / &(&deriv * &deriv);
        nodes[i] = x.clone();
        nodes[count - 1 - i] = -x;
        weights[i] = w.clone();
        weights[count - 1 - i] = w;
    }
    (nodes, weights)
}

fn newton_f64(mut z: f64, count: usize) -> f64 {
    let pim4 = std::f64::consts::PI.powf(-0.25);
    for _ in 0..100 {
        let (mut p1, mut p2) = (pim4, 0.0);
        for j in 0..count {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
        }
        let pp = (2.0 * count as f64).sqrt() * p2;
        let z1 = z;
        z = z1 - p1 / pp;
        if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
            break;
        }
    }
    z
}

/// `∫ psi_m(xi) xi^power psi_n(xi) dxi` by Gauss–Hermite quadrature with
/// `(m + n + power) / 2 + 8` nodes.
pub fn quadrature_element_oracle(ctx: &PrecisionContext, m: usize, n: usize, power: u32) -> Real {
    let count = (m + n + power as usize) / 2 + 8;
    let (nodes, weights) = gauss_hermite(ctx, count);
    let pim4 = ctx.pi().sqrt().sqrt().recip();
    let top = m.max(n) + 1;
    let mut acc = ctx.zero();
    for (x, w) in nodes.iter().zip(&weights) {
        let h = normalized_recurrence(ctx, x, pim4.clone(), top);
        let term = &h[m] * &h[n] * x.powi(power as i32);
        acc.add_mul(w, &term);
    }
    acc
}
