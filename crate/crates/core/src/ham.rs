//! Homotopy-series solver for a single eigenpair.
//!
//! The deformation uses the auxiliary operator `H0 - E_n^b`, so every order
//! reduces to a diagonal solve in the oscillator basis. At order `k`:
//!
//! 1. `R_{k-1} = H psi^(k-1) - sum_{j<k} E^(j) psi^(k-1-j)`;
//! 2. off-diagonal coefficients `c0 <R_{k-1}, e_m> / (E_m^b - E_n^b)`,
//!    plus the carried term `psi^(k-1)` for `k >= 2`;
//! 3. the free coefficient on `e_n` is chosen to minimize the residual
//!    `||(H - E_hat) psi_hat||^2` of the partial sum;
//! 4. `E^(k)` is fixed by the solvability condition `<R_k, e_n> = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscillator::{base_energy, build_hamiltonian, inner, ApplyMode, BandedOperator, BasisSpec, WaveVector};
use crate::scalar::{PrecisionContext, Real};

/// Parameters of one homotopy solve.
#[derive(Clone, Debug)]
pub struct HamConfig {
    /// Index `n` of the target eigenstate.
    pub state: usize,
    /// Convergence-control parameter; must be nonzero.
    pub c0: Real,
    /// Highest order `M` of the series.
    pub order: usize,
    pub spec: BasisSpec,
    /// How `(H - E) psi` is formed for the diagonal optimization and for
    /// reported residuals.
    pub residual_mode: ApplyMode,
}

impl HamConfig {
    pub fn new(state: usize, c0: Real, order: usize, spec: BasisSpec) -> Result<Self> {
        let config = Self { state, c0, order, spec, residual_mode: ApplyMode::Truncated };
        config.validate()?;
        Ok(config)
    }

    pub fn with_residual_mode(mut self, mode: ApplyMode) -> Self {
        self.residual_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.c0.is_zero() {
            return Err(Error::Config("convergence-control parameter c0 must be nonzero".into()));
        }
        if !self.c0.is_finite() {
            return Err(Error::Config("convergence-control parameter c0 must be finite".into()));
        }
        if self.order == 0 {
            return Err(Error::Config("order must be at least 1".into()));
        }
        let n_s = self.spec.n_s();
        if self.state + 4 > n_s {
            return Err(Error::Config(format!("state {} needs a truncation order of at least {}", self.state, self.state + 4)));
        }
        Ok(())
    }
}

/// Per-order summary of a solve.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderRecord {
    pub order: usize,
    /// Partial sum `E^(0) + ... + E^(order)`.
    pub e_hat: Real,
    /// Residual error square of the partial sums at this order.
    pub residual: Real,
    /// `|<R_order, e_n>|`, zero up to rounding by construction.
    pub solvability: Real,
}

/// Terms and partial sums of a homotopy solve.
#[derive(Clone, Debug)]
pub struct HamState {
    pub state: usize,
    /// `psi^(k)`, `k = 0..=M`.
    pub psi_terms: Vec<WaveVector>,
    /// `E^(k)`, `k = 0..=M`.
    pub e_terms: Vec<Real>,
    /// `a_{n,n}^(k)` for `k = 1..=M` (index 0 holds order 1).
    pub diag_coeffs: Vec<Real>,
    pub psi_hat: WaveVector,
    pub e_hat: Real,
    /// One entry per order `0..=M`.
    pub records: Vec<OrderRecord>,
    /// `<psi^(0), e_n>`.
    overlap: Real,
}

impl HamState {
    /// Starts a state from an initial guess, before `E^(0)` is known.
    pub fn new(ctx: &PrecisionContext, state: usize, initial_guess: WaveVector) -> Result<Self> {
        let overlap = initial_guess.get(state).cloned().ok_or_else(|| Error::Domain(format!("initial guess has no component {state}")))?;
        if overlap.abs() <= *ctx.epsilon() {
            return Err(Error::DegenerateGuess { state });
        }
        Ok(Self {
            state,
            psi_hat: initial_guess.clone(),
            psi_terms: vec![initial_guess],
            e_terms: Vec::new(),
            diag_coeffs: Vec::new(),
            e_hat: ctx.zero(),
            records: Vec::new(),
            overlap,
        })
    }

    /// Highest completed order.
    pub fn order(&self) -> usize {
        self.e_terms.len().saturating_sub(1)
    }

    pub fn overlap(&self) -> &Real {
        &self.overlap
    }

    pub fn residual_history(&self) -> Vec<Real> {
        self.records.iter().map(|r| r.residual.clone()).collect()
    }

    pub fn e_hat_history(&self) -> Vec<Real> {
        self.records.iter().map(|r| r.e_hat.clone()).collect()
    }

    /// Residual of the highest completed order.
    pub fn final_residual(&self) -> Option<&Real> {
        self.records.last().map(|r| &r.residual)
    }
}

/// `E^(0) = <H psi0, e_n> / <psi0, e_n>`.
pub fn initial_energy(ctx: &PrecisionContext, psi0: &WaveVector, n: usize, h: &BandedOperator) -> Result<Real> {
    let overlap = psi0.get(n).cloned().unwrap_or_else(|| ctx.zero());
    if overlap.abs() <= *ctx.epsilon() {
        return Err(Error::DegenerateGuess { state: n });
    }
    Ok(row_product(ctx, h, n, psi0)? / &overlap)
}

/// `(H v)_row` for `row < dim`.
fn row_product(ctx: &PrecisionContext, h: &BandedOperator, row: usize, v: &WaveVector) -> Result<Real> {
    if v.len() != h.dim() {
        return Err(Error::Domain(format!("operator of dimension {} applied to a vector of length {}", h.dim(), v.len())));
    }
    let mut acc = ctx.zero();
    let lo = row.saturating_sub(4);
    let hi = (row + 4).min(h.dim() - 1);
    for col in lo..=hi {
        if matches!(row.abs_diff(col), 0 | 2 | 4) {
            acc.add_mul(&h.entry(ctx, row, col), &v.coeffs[col]);
        }
    }
    Ok(acc)
}

/// `R_k = H psi^(k) - sum_{j=0}^{k} E^(j) psi^(k-j)`, extended image.
pub fn residual_term(ctx: &PrecisionContext, state: &HamState, k: usize, h: &BandedOperator) -> Result<WaveVector> {
    if state.psi_terms.len() <= k || state.e_terms.len() <= k {
        return Err(Error::Sequencing(format!(
            "residual of order {k} needs psi and E terms through order {k}; have {} and {}",
            state.psi_terms.len(),
            state.e_terms.len()
        )));
    }
    let mut r = h.apply_shifted(ctx, &state.psi_terms[k], None, ApplyMode::Extended)?;
    for j in 0..=k {
        let neg = -&state.e_terms[j];
        r.axpy(&neg, &state.psi_terms[k - j]);
    }
    Ok(r)
}

/// `Delta^{n,m} = <R, e_m>`.
pub fn projection_delta(ctx: &PrecisionContext, r: &WaveVector, m: usize) -> Real {
    r.get(m).cloned().unwrap_or_else(|| ctx.zero())
}

/// Off-diagonal part of the next term: component `m != n` is
/// `c0 <R, e_m> / (E_m^b - E_n^b)` for `m = 0..=N_s`; component `n` is zero.
pub fn offdiagonal_update(ctx: &PrecisionContext, r_prev: &WaveVector, n: usize, c0: &Real, spec: &BasisSpec) -> Result<WaveVector> {
    if c0.is_zero() {
        return Err(Error::Config("convergence-control parameter c0 must be nonzero".into()));
    }
    let dim = spec.dim();
    let e_n = base_energy(ctx, n);
    let mut out = WaveVector::zeros(ctx, dim);
    for m in (0..dim).filter(|&m| m != n) {
        let delta = projection_delta(ctx, r_prev, m);
        if delta.is_zero() {
            continue;
        }
        let gap = base_energy(ctx, m) - &e_n;
        if gap.is_zero() {
            return Err(Error::Degeneracy { first: n, second: m });
        }
        out.coeffs[m] = c0 * &delta / &gap;
    }
    Ok(out)
}

/// Coefficient `a` on `e_n` minimizing `||(H - e_hat)(psi' + a e_n)||^2`:
/// `a = -<(H - e_hat) psi', (H - e_hat) e_n> / ||(H - e_hat) e_n||^2`.
///
/// When `(H - e_hat)` annihilates `e_n` the residual does not depend on `a`.
/// That is harmless if `psi'` is already an eigenvector at `e_hat` (the
/// coefficient is then 0) and an error otherwise.
pub fn optimal_diagonal_coefficient(
    ctx: &PrecisionContext,
    psi_hat_prime: &WaveVector,
    e_hat: &Real,
    n: usize,
    h: &BandedOperator,
    mode: ApplyMode,
) -> Result<Real> {
    let unit = WaveVector::unit(ctx, h.dim(), n);
    let shifted_unit = h.apply_shifted(ctx, &unit, Some(e_hat), mode)?;
    let denom = inner(ctx, &shifted_unit, &shifted_unit);
    let shifted = h.apply_shifted(ctx, psi_hat_prime, Some(e_hat), mode)?;
    if denom <= *ctx.epsilon() {
        if inner(ctx, &shifted, &shifted) <= *ctx.epsilon() {
            return Ok(ctx.zero());
        }
        return Err(Error::DegenerateOperator { state: n });
    }
    Ok(-(inner(ctx, &shifted, &shifted_unit) / &denom))
}

/// `E^(k) = <F_k, e_n> / <psi^(0), e_n>` with
/// `F_k = H psi^(k) - sum_{j=0}^{k-1} E^(j) psi^(k-j)`.
pub fn next_energy_term(ctx: &PrecisionContext, state: &HamState, k: usize, h: &BandedOperator) -> Result<Real> {
    if k == 0 {
        return initial_energy(ctx, &state.psi_terms[0], state.state, h);
    }
    if state.psi_terms.len() <= k || state.e_terms.len() < k {
        return Err(Error::Sequencing(format!("energy term {k} needs psi terms through order {k} and E terms through order {}", k - 1)));
    }
    let n = state.state;
    if state.overlap.abs() <= *ctx.epsilon() {
        return Err(Error::DegenerateGuess { state: n });
    }
    let mut f_n = row_product(ctx, h, n, &state.psi_terms[k])?;
    for j in 0..k {
        let neg = -&state.e_terms[j];
        f_n.add_mul(&neg, &state.psi_terms[k - j].coeffs[n]);
    }
    Ok(f_n / &state.overlap)
}

/// `||(H - e_hat) psi_hat||^2`.
pub fn residual_error_square(
    ctx: &PrecisionContext,
    psi_hat: &WaveVector,
    e_hat: &Real,
    h: &BandedOperator,
    mode: ApplyMode,
) -> Result<Real> {
    let r = h.apply_shifted(ctx, psi_hat, Some(e_hat), mode)?;
    Ok(inner(ctx, &r, &r))
}

/// Runs the homotopy series to `config.order` from `initial_guess`.
pub fn run_ham(ctx: &PrecisionContext, config: &HamConfig, initial_guess: WaveVector) -> Result<HamState> {
    config.validate()?;
    let h = build_hamiltonian(ctx, &config.spec);
    run_ham_with_operator(ctx, config, &h, initial_guess)
}

/// [`run_ham`] with a prebuilt Hamiltonian, for callers sharing one operator
/// between many solves.
pub fn run_ham_with_operator(
    ctx: &PrecisionContext,
    config: &HamConfig,
    h: &BandedOperator,
    initial_guess: WaveVector,
) -> Result<HamState> {
    config.validate()?;
    if h.dim() != config.spec.dim() {
        return Err(Error::Domain(format!("operator dimension {} does not match N_s + 1 = {}", h.dim(), config.spec.dim())));
    }
    if initial_guess.len() != h.dim() {
        return Err(Error::Domain(format!("initial guess has length {}, expected {}", initial_guess.len(), h.dim())));
    }
    let n = config.state;
    let mode = config.residual_mode;
    let mut state = HamState::new(ctx, n, initial_guess)?;

    let e0 = initial_energy(ctx, &state.psi_terms[0], n, h).map_err(|e| e.at_order(0))?;
    state.e_hat = e0.clone();
    state.e_terms.push(e0);
    let mut r = residual_term(ctx, &state, 0, h)?;
    let residual = residual_error_square(ctx, &state.psi_hat, &state.e_hat, h, mode)?;
    state.records.push(OrderRecord { order: 0, e_hat: state.e_hat.clone(), residual, solvability: projection_delta(ctx, &r, n).abs() });

    for k in 1..=config.order {
        let step = (|| -> Result<()> {
            let mut term = offdiagonal_update(ctx, &r, n, &config.c0, &config.spec)?;
            if k >= 2 {
                term.add_assign(&state.psi_terms[k - 1]);
            }
            let mut psi_prime = state.psi_hat.clone();
            psi_prime.add_assign(&term);
            let a = optimal_diagonal_coefficient(ctx, &psi_prime, &state.e_hat, n, h, mode)?;
            term.coeffs[n] += &a;
            state.diag_coeffs.push(a);

            // psi^(k) must be in place before E^(k) is formed
            state.psi_hat.add_assign(&term);
            state.psi_terms.push(term);
            let e_k = next_energy_term(ctx, &state, k, h)?;
            state.e_hat += &e_k;
            state.e_terms.push(e_k);

            r = residual_term(ctx, &state, k, h)?;
            let residual = residual_error_square(ctx, &state.psi_hat, &state.e_hat, h, mode)?;
            state.records.push(OrderRecord {
                order: k,
                e_hat: state.e_hat.clone(),
                residual,
                solvability: projection_delta(ctx, &r, n).abs(),
            });
            Ok(())
        })();
        step.map_err(|e| e.at_order(k))?;
    }
    Ok(state)
}

/// Serializable view of one order, formatted at full precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderRow {
    pub order: usize,
    pub e_hat: String,
    pub residual: String,
}
