//! Python bindings. Real numbers cross the boundary as decimal strings so
//! no precision is lost; pass `"-1/3"`-style fractions where exact values
//! matter.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use ham_eigen::driver::{self, ContinuationPlan, SweepGrid};
use ham_eigen::ham::{run_ham, HamConfig};
use ham_eigen::oscillator::{self, ApplyMode, BasisSpec, WaveVector};
use ham_eigen::{format_scalar, pade, perturbation, Error, PrecisionContext, Real};

fn to_py(err: Error) -> PyErr {
    if err.is_config() {
        PyValueError::new_err(err.to_string())
    } else {
        PyArithmeticError::new_err(err.to_string())
    }
}

/// `(c0, order, e_hat, residual)`
type SweepTuple = (String, usize, String, String);

/// Result of a homotopy solve: one entry per order `0..=order`.
#[pyclass(frozen, get_all)]
pub struct HamResult {
    pub e_hat: String,
    pub e_terms: Vec<String>,
    pub e_partial: Vec<String>,
    pub residuals: Vec<String>,
    /// Eigenvector coefficients in the oscillator basis.
    pub psi_hat: Vec<String>,
}

#[pymethods]
impl HamResult {
    fn __repr__(&self) -> String {
        format!("HamResult(e_hat={}, orders={})", self.e_hat, self.e_terms.len())
    }
}

/// Solver bound to a working precision of `digits` significant digits.
#[pyclass(frozen)]
pub struct Solver {
    ctx: PrecisionContext,
}

impl Solver {
    fn parse(&self, text: &str) -> PyResult<Real> {
        self.ctx.parse(text).map_err(to_py)
    }

    fn fmt(&self, x: &Real) -> String {
        format_scalar(x, self.ctx.digits() as usize)
    }

    fn fmt_all<'a>(&self, xs: impl IntoIterator<Item = &'a Real>) -> Vec<String> {
        xs.into_iter().map(|x| self.fmt(x)).collect()
    }

    fn config(&self, n: usize, beta: &str, c0: &str, order: usize, ns: usize, mode: &str) -> PyResult<HamConfig> {
        let mode: ApplyMode = mode.parse().map_err(to_py)?;
        let spec = BasisSpec::new(ns, self.parse(beta)?).map_err(to_py)?;
        Ok(HamConfig::new(n, self.parse(c0)?, order, spec).map_err(to_py)?.with_residual_mode(mode))
    }
}

#[pymethods]
impl Solver {
    #[new]
    #[pyo3(signature = (digits = 50))]
    fn new(digits: u32) -> PyResult<Self> {
        Ok(Self { ctx: ham_eigen::make_context(digits).map_err(to_py)? })
    }

    #[getter]
    fn digits(&self) -> u32 {
        self.ctx.digits()
    }

    /// Homotopy series for state `n` to `order`, starting from the basis
    /// state `e_n`.
    #[pyo3(signature = (beta, c0, order, ns, n = 0, residual_mode = "truncated"))]
    #[allow(clippy::too_many_arguments)]
    fn solve(&self, py: Python<'_>, beta: &str, c0: &str, order: usize, ns: usize, n: usize, residual_mode: &str) -> PyResult<HamResult> {
        let config = self.config(n, beta, c0, order, ns, residual_mode)?;
        let state = py.detach(|| run_ham(&self.ctx, &config, WaveVector::unit(&self.ctx, config.spec.dim(), n))).map_err(to_py)?;
        Ok(HamResult {
            e_hat: self.fmt(&state.e_hat),
            e_terms: self.fmt_all(&state.e_terms),
            e_partial: state.records.iter().map(|r| self.fmt(&r.e_hat)).collect(),
            residuals: state.records.iter().map(|r| self.fmt(&r.residual)).collect(),
            psi_hat: self.fmt_all(&state.psi_hat.coeffs),
        })
    }

    /// `[m, m]` Padé approximants at `q = 1` for `m = 0..=max_m`, as
    /// `(m, value, degenerate)`.
    fn pade(&self, terms: Vec<String>, max_m: usize) -> PyResult<Vec<(usize, String, bool)>> {
        let terms = terms.iter().map(|t| self.parse(t)).collect::<PyResult<Vec<_>>>()?;
        let table = pade::pade_table(&self.ctx, &terms, max_m).map_err(to_py)?;
        Ok(table.iter().map(|p| (p.m, self.fmt(&p.value), p.degenerate)).collect())
    }

    /// Rayleigh-Schrodinger series; returns `(partial_sums, residuals)`.
    #[pyo3(signature = (beta, order, ns, n = 0, residual_mode = "truncated"))]
    fn perturb(&self, beta: &str, order: usize, ns: usize, n: usize, residual_mode: &str) -> PyResult<(Vec<String>, Vec<String>)> {
        let mode: ApplyMode = residual_mode.parse().map_err(to_py)?;
        let s = perturbation::perturb_solve(&self.ctx, n, &self.parse(beta)?, order, ns, mode).map_err(to_py)?;
        Ok((self.fmt_all(&s.e_partial), self.fmt_all(&s.residuals)))
    }

    /// Lowest `count` eigenvalues of the truncated Hamiltonian matrix.
    #[pyo3(signature = (beta, ns, count = 1))]
    fn oracle(&self, py: Python<'_>, beta: &str, ns: usize, count: usize) -> PyResult<Vec<String>> {
        let spec = BasisSpec::new(ns, self.parse(beta)?).map_err(to_py)?;
        let values = py.detach(|| driver::diagonalize_oracle(&self.ctx, &spec, count)).map_err(to_py)?;
        Ok(self.fmt_all(&values))
    }

    /// Residual sweep over `c0`; returns rows `(c0, order, e_hat, residual)`
    /// and the best `c0` at the highest order.
    #[pyo3(signature = (beta, ns, c0_start, c0_end, c0_step, orders, n = 0))]
    #[allow(clippy::too_many_arguments)]
    fn sweep(
        &self,
        py: Python<'_>,
        beta: &str,
        ns: usize,
        c0_start: &str,
        c0_end: &str,
        c0_step: &str,
        orders: Vec<usize>,
        n: usize,
    ) -> PyResult<(Vec<SweepTuple>, String)> {
        let grid = SweepGrid::new(self.parse(c0_start)?, self.parse(c0_end)?, self.parse(c0_step)?, orders).map_err(to_py)?;
        let base = self.config(n, beta, c0_start, 1, ns, "truncated")?;
        let guess = WaveVector::unit(&self.ctx, base.spec.dim(), n);
        let out = py.detach(|| driver::sweep_c0(&self.ctx, &base, &grid, &guess)).map_err(to_py)?;
        let rows = out.rows.iter().map(|r| (self.fmt(&r.c0), r.order, self.fmt(&r.e_hat), self.fmt(&r.residual))).collect();
        Ok((rows, self.fmt(&out.best_c0)))
    }

    /// Restarted order-`m` solves; returns `(e_hat, residual)` per pass.
    #[pyo3(signature = (beta, c0, ns, m, passes, n = 0))]
    #[allow(clippy::too_many_arguments)]
    fn iterate(
        &self,
        py: Python<'_>,
        beta: &str,
        c0: &str,
        ns: usize,
        m: usize,
        passes: usize,
        n: usize,
    ) -> PyResult<Vec<(String, String)>> {
        let config = self.config(n, beta, c0, m, ns, "truncated")?;
        let guess = WaveVector::unit(&self.ctx, config.spec.dim(), n);
        let out = py.detach(|| driver::iterate(&self.ctx, &config, passes, guess)).map_err(to_py)?;
        Ok(out.passes.iter().map(|p| (self.fmt(&p.e_hat), self.fmt(&p.residual))).collect())
    }

    /// Continuation in `beta` from a JSON plan
    /// `[{"beta", "c0", "ns", "order", "passes"}, ...]`; returns rows
    /// `(beta, e_hat, c0, n_s)`.
    #[pyo3(signature = (plan_json, n = 0, digits_wanted = 10))]
    fn continuation(
        &self,
        py: Python<'_>,
        plan_json: &str,
        n: usize,
        digits_wanted: u32,
    ) -> PyResult<Vec<(String, String, String, usize)>> {
        let plan: ContinuationPlan = serde_json::from_str(plan_json).map_err(|e| to_py(e.into()))?;
        let out = py.detach(|| driver::continuation(&self.ctx, &plan, n, digits_wanted)).map_err(to_py)?;
        Ok(out.rows.into_iter().map(|r| (r.beta, r.e_hat, r.c0, r.n_s)).collect())
    }

    /// `<psi_m | xi^4 | psi_n>`.
    fn x4_element(&self, m: usize, n: usize) -> String {
        self.fmt(&oscillator::x4_element(&self.ctx, m, n))
    }
}

#[pymodule]
pub fn ham_eigen_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Solver>()?;
    m.add_class::<HamResult>()?;
    Ok(())
}
