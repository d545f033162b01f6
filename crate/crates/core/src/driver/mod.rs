//! Experiment orchestration on top of the solver: convergence-control
//! sweeps, iterative restarts, continuation in `beta`, a reference
//! eigensolver and report output.

mod continuation;
mod oracle;
mod report;
mod sweep;

pub use continuation::{continuation, ContinuationOutcome, ContinuationPlan, ContinuationRow, ContinuationStage, StageOutcome};
pub use oracle::{count_below, diagonalize_oracle};
pub use report::{emit_report, pade_sidecar, write_csv, EigenRow, PassRow, ReportFormat, SolveReport};
pub use sweep::{sweep_c0, SweepGrid, SweepPoint, SweepResult, SweepRow};

use crate::error::{Error, Result};
use crate::ham::{run_ham_with_operator, HamConfig, HamState};
use crate::oscillator::{build_hamiltonian, BandedOperator, WaveVector};
use crate::scalar::{PrecisionContext, Real};

/// Energy and residual after one restart pass.
#[derive(Clone, Debug, PartialEq)]
pub struct PassRecord {
    pub pass: usize,
    pub e_hat: Real,
    pub residual: Real,
}

#[derive(Clone, Debug)]
pub struct IterateOutcome {
    /// Solve of the last pass, before rescaling.
    pub state: HamState,
    /// Last `psi_hat` rescaled to unit overlap with `e_n`.
    pub guess: WaveVector,
    pub passes: Vec<PassRecord>,
}

/// `passes` restarts of an order-`base.order` solve, each seeded with the
/// previous `psi_hat` rescaled so that its `e_n` component is one.
pub fn iterate(ctx: &PrecisionContext, base: &HamConfig, passes: usize, guess: WaveVector) -> Result<IterateOutcome> {
    base.validate()?;
    let h = build_hamiltonian(ctx, &base.spec);
    iterate_with_operator(ctx, base, &h, passes, guess, None)
}

/// [`iterate`] that stops early once the residual drops below `target`.
pub(crate) fn iterate_with_operator(
    ctx: &PrecisionContext,
    base: &HamConfig,
    h: &BandedOperator,
    passes: usize,
    guess: WaveVector,
    target: Option<&Real>,
) -> Result<IterateOutcome> {
    if passes == 0 {
        return Err(Error::Config("at least one iteration pass is needed".into()));
    }
    let n = base.state;
    let mut guess = guess;
    let mut records = Vec::with_capacity(passes);
    let mut last = None;
    for pass in 1..=passes {
        let state = run_ham_with_operator(ctx, base, h, guess)?;
        let residual = state.final_residual().expect("order >= 1 gives records").clone();
        if !residual.is_finite() {
            return Err(Error::Diverged { state: n, pass });
        }
        records.push(PassRecord { pass, e_hat: state.e_hat.clone(), residual: residual.clone() });
        guess = unit_overlap(ctx, &state.psi_hat, n).ok_or(Error::LostState { state: n, pass })?;
        last = Some(state);
        if target.is_some_and(|t| residual < *t) {
            break;
        }
    }
    Ok(IterateOutcome { state: last.expect("at least one pass"), guess, passes: records })
}

fn unit_overlap(ctx: &PrecisionContext, psi: &WaveVector, n: usize) -> Option<WaveVector> {
    let overlap = psi.get(n)?;
    if overlap.abs() < *ctx.epsilon() {
        return None;
    }
    Some(psi.scaled(&overlap.recip()))
}
