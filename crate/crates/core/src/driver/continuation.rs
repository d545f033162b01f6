use serde::{Deserialize, Serialize};

use super::iterate_with_operator;
use crate::error::{Error, Result};
use crate::ham::HamConfig;
use crate::oscillator::{build_hamiltonian, BasisSpec, WaveVector};
use crate::scalar::{format_scalar, PrecisionContext, Real};

/// One step of a continuation plan. `beta` and `c0` keep the text they were
/// given so reports echo them verbatim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuationStage {
    #[serde(deserialize_with = "number_or_string")]
    pub beta: String,
    #[serde(deserialize_with = "number_or_string")]
    pub c0: String,
    #[serde(alias = "n_s")]
    pub ns: usize,
    /// Order of each restart pass.
    pub order: usize,
    /// Maximum number of restart passes.
    pub passes: usize,
}

fn number_or_string<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    match serde_json::Value::deserialize(d)? {
        serde_json::Value::String(s) => Ok(s),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(serde::de::Error::custom(format!("expected a number or string, got {other}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContinuationPlan {
    pub stages: Vec<ContinuationStage>,
}

impl ContinuationPlan {
    /// Checks the plan against `ctx`: betas strictly increasing, truncation
    /// never shrinking, nonzero `c0`, positive orders and pass counts.
    pub fn validate(&self, ctx: &PrecisionContext) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Config("continuation plan has no stages".into()));
        }
        let mut prev: Option<(Real, usize)> = None;
        for (i, stage) in self.stages.iter().enumerate() {
            let beta = ctx.parse(&stage.beta)?;
            let c0 = ctx.parse(&stage.c0)?;
            BasisSpec::new(stage.ns, beta.clone())?;
            if c0.is_zero() {
                return Err(Error::Config(format!("stage {}: c0 must be nonzero", i + 1)));
            }
            if stage.order == 0 || stage.passes == 0 {
                return Err(Error::Config(format!("stage {}: order and passes must be positive", i + 1)));
            }
            if let Some((b, ns)) = &prev {
                if beta <= *b {
                    return Err(Error::Config(format!("stage {}: beta must increase from stage to stage", i + 1)));
                }
                if stage.ns < *ns {
                    return Err(Error::Config(format!("stage {}: truncation order may not shrink", i + 1)));
                }
            }
            prev = Some((beta, stage.ns));
        }
        Ok(())
    }
}

/// Table row: `beta,e_hat,c0,n_s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuationRow {
    pub beta: String,
    pub e_hat: String,
    pub c0: String,
    pub n_s: usize,
}

#[derive(Clone, Debug)]
pub struct StageOutcome {
    pub e_hat: Real,
    pub residual: Real,
    pub passes_used: usize,
    /// Converged eigenvector with unit overlap on `e_n`.
    pub psi_hat: WaveVector,
}

#[derive(Clone, Debug)]
pub struct ContinuationOutcome {
    pub rows: Vec<ContinuationRow>,
    pub stages: Vec<StageOutcome>,
}

/// Walks the plan for state `n`. Stage one starts from `e_n`; each later
/// stage starts from the previous eigenvector, zero-padded to the new
/// truncation. A stage succeeds once a pass ends with residual below
/// `10^-(2 digits_wanted)`.
pub fn continuation(ctx: &PrecisionContext, plan: &ContinuationPlan, n: usize, digits_wanted: u32) -> Result<ContinuationOutcome> {
    plan.validate(ctx)?;
    let target = ctx.pow10(-2 * digits_wanted as i32);
    let digits = ctx.digits() as usize;
    let mut rows = Vec::with_capacity(plan.stages.len());
    let mut stages: Vec<StageOutcome> = Vec::with_capacity(plan.stages.len());
    for (i, stage) in plan.stages.iter().enumerate() {
        let spec = BasisSpec::new(stage.ns, ctx.parse(&stage.beta)?)?;
        let config = HamConfig::new(n, ctx.parse(&stage.c0)?, stage.order, spec.clone())?;
        let guess = match stages.last() {
            Some(prev) => prev.psi_hat.padded(ctx, spec.dim())?,
            None => WaveVector::unit(ctx, spec.dim(), n),
        };
        let h = build_hamiltonian(ctx, &spec);
        let failure = |achieved: String, completed: Vec<ContinuationRow>| Error::StageFailure {
            stage: i + 1,
            beta: stage.beta.clone(),
            target: format_scalar(&target, 2),
            achieved,
            completed,
        };
        let out = match iterate_with_operator(ctx, &config, &h, stage.passes, guess, Some(&target)) {
            Ok(out) => out,
            Err(Error::Diverged { .. }) => return Err(failure("a non-finite residual".into(), rows)),
            Err(e) => return Err(e),
        };
        let last = out.passes.last().expect("at least one pass");
        if last.residual >= target {
            return Err(failure(format_scalar(&last.residual, 2), rows));
        }
        rows.push(ContinuationRow {
            beta: stage.beta.clone(),
            e_hat: format_scalar(&last.e_hat, digits),
            c0: stage.c0.clone(),
            n_s: stage.ns,
        });
        stages.push(StageOutcome {
            e_hat: last.e_hat.clone(),
            residual: last.residual.clone(),
            passes_used: out.passes.len(),
            psi_hat: out.guess,
        });
    }
    Ok(ContinuationOutcome { rows, stages })
}
