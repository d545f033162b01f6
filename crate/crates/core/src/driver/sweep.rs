use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ham::{run_ham_with_operator, HamConfig};
use crate::oscillator::{build_hamiltonian, WaveVector};
use crate::scalar::{format_scalar, PrecisionContext, Real};

/// Grid of convergence-control values plus the orders sampled at each.
#[derive(Clone, Debug)]
pub struct SweepGrid {
    pub start: Real,
    pub end: Real,
    pub step: Real,
    pub orders: Vec<usize>,
}

impl SweepGrid {
    pub fn new(start: Real, end: Real, step: Real, orders: Vec<usize>) -> Result<Self> {
        let grid = Self { start, end, step, orders };
        grid.points()?;
        Ok(grid)
    }

    /// `start, start + step, ...` up to and including `end`.
    pub fn points(&self) -> Result<Vec<Real>> {
        if self.step.is_sign_negative() || self.step.is_zero() {
            return Err(Error::Config("c0 step must be positive".into()));
        }
        if self.end < self.start {
            return Err(Error::Config("c0 grid end lies below its start".into()));
        }
        if self.orders.is_empty() || self.orders.contains(&0) {
            return Err(Error::Config("sweep orders must be a non-empty list of positive integers".into()));
        }
        let span = ((&self.end - &self.start) / &self.step).to_f64();
        let count = (span + 1e-9).floor() as usize + 1;
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let mut c0 = &self.start + &(&self.step * i as i64);
            if c0 > self.end {
                c0 = self.end.clone();
            }
            if c0.abs() < &self.step.abs() / 1_000_000_000i64 {
                return Err(Error::Config("c0 grid contains zero".into()));
            }
            out.push(c0);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub c0: Real,
    pub order: usize,
    pub residual: Real,
    pub e_hat: Real,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    /// Sorted by `(c0, order)`.
    pub rows: Vec<SweepPoint>,
    /// Grid point with the smallest residual at the highest sampled order.
    pub best_c0: Real,
    pub best_residual: Real,
}

/// Runs `run_ham` at every grid point to the highest sampled order. The
/// order stored in `base` is ignored; grid points run in parallel.
pub fn sweep_c0(ctx: &PrecisionContext, base: &HamConfig, grid: &SweepGrid, guess: &WaveVector) -> Result<SweepResult> {
    let points = grid.points()?;
    let top = *grid.orders.iter().max().expect("orders checked non-empty");
    let h = build_hamiltonian(ctx, &base.spec);
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(points.len());
    let chunk = points.len().div_ceil(workers);

    let run_point = |c0: &Real| -> Result<Vec<SweepPoint>> {
        let mut config = base.clone();
        config.c0 = c0.clone();
        config.order = top;
        let state = run_ham_with_operator(ctx, &config, &h, guess.clone())?;
        Ok(grid
            .orders
            .iter()
            .map(|&k| {
                let rec = &state.records[k];
                SweepPoint { c0: c0.clone(), order: k, residual: rec.residual.clone(), e_hat: rec.e_hat.clone() }
            })
            .collect())
    };

    let mut rows = thread::scope(|scope| -> Result<Vec<SweepPoint>> {
        let handles: Vec<_> =
            points.chunks(chunk).map(|part| scope.spawn(move || part.iter().map(run_point).collect::<Result<Vec<_>>>())).collect();
        let mut rows = Vec::new();
        for handle in handles {
            let part = handle.join().expect("sweep worker panicked")?;
            rows.extend(part.into_iter().flatten());
        }
        Ok(rows)
    })?;
    rows.sort_by(|a, b| a.c0.total_cmp(&b.c0).then(a.order.cmp(&b.order)));

    let best = rows
        .iter()
        .filter(|r| r.order == top)
        .min_by(|a, b| a.residual.total_cmp(&b.residual).then(a.c0.total_cmp(&b.c0)))
        .expect("at least one grid point");
    Ok(SweepResult { best_c0: best.c0.clone(), best_residual: best.residual.clone(), rows })
}

/// CSV/JSON row of a sweep: `c0,order,e_hat,residual`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub c0: String,
    pub order: usize,
    pub e_hat: String,
    pub residual: String,
}

impl SweepPoint {
    pub fn to_row(&self, digits: usize) -> SweepRow {
        SweepRow {
            c0: format_scalar(&self.c0, digits),
            order: self.order,
            e_hat: format_scalar(&self.e_hat, digits),
            residual: format_scalar(&self.residual, digits),
        }
    }
}
