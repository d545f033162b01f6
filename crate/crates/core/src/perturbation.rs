//! Rayleigh–Schrödinger perturbation series in `H' = beta xi^4`.
//!
//! Corrections are expanded on the unperturbed states with no component
//! along `e_n` beyond zeroth order, and all matrix elements come from the
//! same closed-form `xi^4` band as the full Hamiltonian.

use crate::error::{Error, Result};
use crate::ham::residual_error_square;
use crate::oscillator::{base_energy, build_hamiltonian, build_perturbation, ApplyMode, BasisSpec, WaveVector};
use crate::scalar::{PrecisionContext, Real};

/// Terms and partial sums of a perturbation expansion.
#[derive(Clone, Debug)]
pub struct PerturbState {
    pub state: usize,
    /// `E^(k)`, `k = 0..=M`.
    pub e_terms: Vec<Real>,
    /// `coeff_table[k][l] = a_{n,l}^(k)`; row 0 is `e_n`.
    pub coeff_table: Vec<Vec<Real>>,
    /// `E^(0) + ... + E^(k)` for each `k`.
    pub e_partial: Vec<Real>,
    /// Residual error square of the `k`-th partial sums.
    pub residuals: Vec<Real>,
}

impl PerturbState {
    pub fn e_hat(&self) -> &Real {
        self.e_partial.last().expect("at least the zeroth order is present")
    }

    /// Wavefunction partial sum through `order`.
    pub fn psi_partial(&self, ctx: &PrecisionContext, order: usize) -> WaveVector {
        let dim = self.coeff_table[0].len();
        let mut psi = WaveVector::zeros(ctx, dim);
        for row in &self.coeff_table[..=order] {
            psi.add_assign(&WaveVector::from_coeffs(row.clone()));
        }
        psi
    }
}

/// Runs the perturbation recursion to `order` for state `n` on `N_s + 1`
/// basis functions. Residuals are reported in `mode`.
pub fn perturb_solve(ctx: &PrecisionContext, n: usize, beta: &Real, order: usize, n_s: usize, mode: ApplyMode) -> Result<PerturbState> {
    if n + 4 > n_s {
        return Err(Error::Config(format!("state {n} needs a truncation order of at least {}", n + 4)));
    }
    if order == 0 {
        return Err(Error::Config("order must be at least 1".into()));
    }
    let spec = BasisSpec::new(n_s, beta.clone())?;
    let dim = spec.dim();
    let h = build_hamiltonian(ctx, &spec);
    let h_prime = build_perturbation(ctx, &spec);
    let e_n = base_energy(ctx, n);
    let gaps: Vec<Option<Real>> = (0..dim).map(|l| if l == n { None } else { Some(&e_n - &base_energy(ctx, l)) }).collect();
    if let Some(l) = gaps.iter().position(|g| g.as_ref().is_some_and(Real::is_zero)) {
        return Err(Error::Degeneracy { first: n, second: l });
    }

    let perturbation_image = |v: &[Real]| -> Result<Vec<Real>> {
        let v = WaveVector::from_coeffs(v.to_vec());
        Ok(h_prime.apply_shifted(ctx, &v, None, ApplyMode::Truncated)?.coeffs)
    };

    let mut table = vec![WaveVector::unit(ctx, dim, n).coeffs];
    let mut e_terms = vec![e_n.clone()];
    for m in 1..=order {
        let delta = perturbation_image(&table[m - 1])?;
        let mut e_m = delta[n].clone();
        for k in 1..m {
            e_m -= &e_terms[k] * &table[m - k][n];
        }
        e_terms.push(e_m);
        let mut row = vec![ctx.zero(); dim];
        for l in (0..dim).filter(|&l| l != n) {
            let mut num = delta[l].clone();
            for k in 1..=m {
                num -= &e_terms[k] * &table[m - k][l];
            }
            let gap = gaps[l].as_ref().expect("off-diagonal gap");
            row[l] = num / gap;
        }
        table.push(row);
    }

    let mut e_partial = Vec::with_capacity(order + 1);
    let mut residuals = Vec::with_capacity(order + 1);
    let mut e_acc = ctx.zero();
    let mut psi = WaveVector::zeros(ctx, dim);
    for (e, row) in e_terms.iter().zip(&table) {
        e_acc += e;
        psi.add_assign(&WaveVector::from_coeffs(row.clone()));
        residuals.push(residual_error_square(ctx, &psi, &e_acc, &h, mode)?);
        e_partial.push(e_acc.clone());
    }
    Ok(PerturbState { state: n, e_terms, coeff_table: table, e_partial, residuals })
}

/// Exact rational `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactRational {
    pub num: i64,
    pub den: i64,
}

impl ExactRational {
    pub fn to_real(self, ctx: &PrecisionContext) -> Real {
        ctx.ratio(self.num, self.den)
    }
}

const E0_SERIES: [ExactRational; 7] = [
    ExactRational { num: 1, den: 2 },
    ExactRational { num: 3, den: 4 },
    ExactRational { num: -21, den: 8 },
    ExactRational { num: 333, den: 16 },
    ExactRational { num: -30885, den: 128 },
    ExactRational { num: 916731, den: 256 },
    ExactRational { num: -65518401, den: 1024 },
];

/// Coefficients of the ground-state energy series in powers of `beta`,
/// orders `0..=order`.
pub fn e0_series_coefficients(order: usize) -> Result<Vec<ExactRational>> {
    if order >= E0_SERIES.len() {
        return Err(Error::NotTabulated(order));
    }
    Ok(E0_SERIES[..=order].to_vec())
}

/// Recovers the `beta^k` series coefficients of `E_n` from two runs of the
/// recursion. Each order is homogeneous, `E^(k)(beta) = c_k beta^k`, so
/// `c_k` follows from either run; returns `(from_first, from_second)` for
/// `k = 0..=order`.
pub fn recover_series_coefficients(
    ctx: &PrecisionContext,
    n: usize,
    betas: (&Real, &Real),
    order: usize,
    n_s: usize,
) -> Result<Vec<(Real, Real)>> {
    let run = |beta: &Real| -> Result<Vec<Real>> {
        if beta.is_zero() {
            return Err(Error::Config("coefficient recovery needs nonzero couplings".into()));
        }
        let state = perturb_solve(ctx, n, beta, order, n_s, ApplyMode::Truncated)?;
        Ok(state.e_terms.iter().enumerate().map(|(k, e)| e / &beta.powi(k as i32)).collect())
    };
    let a = run(betas.0)?;
    let b = run(betas.1)?;
    Ok(a.into_iter().zip(b).collect())
}
