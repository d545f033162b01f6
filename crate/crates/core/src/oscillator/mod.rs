//! Harmonic-oscillator basis and the quartic Hamiltonian in that basis.
//!
//! The basis functions are the normalized Hermite functions
//! `psi_m(xi) = (pi^(1/4) sqrt(2^m m!))^-1 H_m(xi) exp(-xi^2 / 2)`, which are
//! eigenfunctions of `H0 = -1/2 d^2/dxi^2 + 1/2 xi^2` with energies `m + 1/2`.
//! The full Hamiltonian `H = H0 + beta xi^4` is banded in this basis: `xi^4`
//! couples indices that differ by 0, 2 or 4.

pub mod quadrature;

use crate::error::{Error, Result};
use crate::scalar::{PrecisionContext, Real};

/// Truncation order and quartic coupling of a basis expansion.
#[derive(Clone, Debug)]
pub struct BasisSpec {
    n_s: usize,
    beta: Real,
}

impl BasisSpec {
    /// Smallest truncation order that leaves room for the `±4` band.
    pub const MIN_TRUNCATION: usize = 8;

    pub fn new(n_s: usize, beta: Real) -> Result<Self> {
        if n_s < Self::MIN_TRUNCATION {
            return Err(Error::Config(format!("truncation order {n_s} is below the minimum of {}", Self::MIN_TRUNCATION)));
        }
        if beta.is_sign_negative() || !beta.is_finite() {
            return Err(Error::Config(format!("quartic coupling must be finite and >= 0, got {beta}")));
        }
        Ok(Self { n_s, beta })
    }

    /// Highest retained basis index `N_s`.
    pub fn n_s(&self) -> usize {
        self.n_s
    }

    /// Number of retained basis functions, `N_s + 1`.
    pub fn dim(&self) -> usize {
        self.n_s + 1
    }

    pub fn beta(&self) -> &Real {
        &self.beta
    }

    /// Unperturbed energy `E_m^b = m + 1/2`.
    pub fn base_energy(&self, ctx: &PrecisionContext, m: usize) -> Real {
        base_energy(ctx, m)
    }
}

pub fn base_energy(ctx: &PrecisionContext, m: usize) -> Real {
    ctx.ratio(2 * m as i64 + 1, 2)
}

/// Coefficients of a state on the basis functions `psi_0 .. psi_{len-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveVector {
    pub coeffs: Vec<Real>,
}

impl WaveVector {
    pub fn zeros(ctx: &PrecisionContext, len: usize) -> Self {
        Self { coeffs: vec![ctx.zero(); len] }
    }

    /// The basis function `psi_index` as a vector of length `len`.
    pub fn unit(ctx: &PrecisionContext, len: usize, index: usize) -> Self {
        let mut v = Self::zeros(ctx, len);
        v.coeffs[index] = ctx.one();
        v
    }

    pub fn from_coeffs(coeffs: Vec<Real>) -> Self {
        Self { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Real> {
        self.coeffs.get(index)
    }

    pub fn scaled(&self, factor: &Real) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    /// `self += factor * other`; `other` may be shorter than `self`.
    pub fn axpy(&mut self, factor: &Real, other: &WaveVector) {
        assert!(other.len() <= self.len(), "axpy target is shorter than source");
        for (dst, src) in self.coeffs.iter_mut().zip(&other.coeffs) {
            dst.add_mul(factor, src);
        }
    }

    pub fn add_assign(&mut self, other: &WaveVector) {
        assert!(other.len() <= self.len(), "add target is shorter than source");
        for (dst, src) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *dst += src;
        }
    }

    /// Zero-pads (never truncates) to `len`.
    pub fn padded(&self, ctx: &PrecisionContext, len: usize) -> Result<Self> {
        if len < self.len() {
            return Err(Error::Domain(format!("cannot shrink a vector of length {} to {len}", self.len())));
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(len, ctx.zero());
        Ok(Self { coeffs })
    }

    pub fn norm_sqr(&self, ctx: &PrecisionContext) -> Real {
        inner(ctx, self, self)
    }
}

/// Whether an operator image is clipped to the retained basis or keeps the
/// four rows that `xi^4` pushes beyond it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApplyMode {
    #[default]
    Truncated,
    Extended,
}

impl ApplyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ApplyMode::Truncated => "truncated",
            ApplyMode::Extended => "extended",
        }
    }
}

impl std::str::FromStr for ApplyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truncated" => Ok(ApplyMode::Truncated),
            "extended" => Ok(ApplyMode::Extended),
            other => Err(Error::Config(format!("unknown residual mode `{other}`"))),
        }
    }
}

/// Symmetric matrix with nonzero diagonals at offsets 0, ±2 and ±4.
///
/// `diag0[m] = H[m][m]`, `diag2[m] = H[m][m+2]`, `diag4[m] = H[m][m+4]`.
/// The arrays run over `dim + 4` rows so that the extended image of a
/// `dim`-vector uses exact matrix elements in its extra rows.
#[derive(Clone, Debug)]
pub struct BandedOperator {
    dim: usize,
    diag0: Vec<Real>,
    diag2: Vec<Real>,
    diag4: Vec<Real>,
}

impl BandedOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Length of an extended image, `dim + 4`.
    pub fn extended_dim(&self) -> usize {
        self.dim + 4
    }

    pub fn diag0(&self) -> &[Real] {
        &self.diag0[..self.dim]
    }

    pub fn diag2(&self) -> &[Real] {
        &self.diag2[..self.dim.saturating_sub(2)]
    }

    pub fn diag4(&self) -> &[Real] {
        &self.diag4[..self.dim.saturating_sub(4)]
    }

    /// Matrix element `H[m][n]` for `m, n < dim + 4`.
    pub fn entry(&self, ctx: &PrecisionContext, m: usize, n: usize) -> Real {
        let (lo, hi) = if m <= n { (m, n) } else { (n, m) };
        match hi - lo {
            0 => self.diag0[lo].clone(),
            2 => self.diag2[lo].clone(),
            4 => self.diag4[lo].clone(),
            _ => ctx.zero(),
        }
    }

    fn output_len(&self, mode: ApplyMode) -> usize {
        match mode {
            ApplyMode::Truncated => self.dim,
            ApplyMode::Extended => self.dim + 4,
        }
    }

    /// `(H - shift) v`. `v` must have length `dim`.
    pub fn apply_shifted(&self, ctx: &PrecisionContext, v: &WaveVector, shift: Option<&Real>, mode: ApplyMode) -> Result<WaveVector> {
        if v.len() != self.dim {
            return Err(Error::Domain(format!("operator of dimension {} applied to a vector of length {}", self.dim, v.len())));
        }
        let out_len = self.output_len(mode);
        let mut out = Vec::with_capacity(out_len);
        let x = &v.coeffs;
        for m in 0..out_len {
            let mut acc = ctx.zero();
            if m < self.dim {
                match shift {
                    Some(s) => acc.add_mul(&(&self.diag0[m] - s), &x[m]),
                    None => acc.add_mul(&self.diag0[m], &x[m]),
                }
                if m + 2 < self.dim {
                    acc.add_mul(&self.diag2[m], &x[m + 2]);
                }
                if m + 4 < self.dim {
                    acc.add_mul(&self.diag4[m], &x[m + 4]);
                }
            }
            if m >= 2 && m - 2 < self.dim {
                acc.add_mul(&self.diag2[m - 2], &x[m - 2]);
            }
            if m >= 4 && m - 4 < self.dim {
                acc.add_mul(&self.diag4[m - 4], &x[m - 4]);
            }
            out.push(acc);
        }
        Ok(WaveVector { coeffs: out })
    }
}

/// `<psi_m | xi^4 | psi_n>` from the ladder-operator closed forms.
pub fn x4_element(ctx: &PrecisionContext, m: usize, n: usize) -> Real {
    let (lo, hi) = if m <= n { (m, n) } else { (n, m) };
    let k = lo as i64;
    match hi - lo {
        // 3 (2k^2 + 2k + 1) / 4
        0 => ctx.ratio(3 * (2 * k * k + 2 * k + 1), 4),
        // (2k + 3) sqrt((k+1)(k+2)) / 2
        2 => ctx.int((k + 1) * (k + 2)).sqrt() * ctx.ratio(2 * k + 3, 2),
        // sqrt((k+1)(k+2)(k+3)(k+4)) / 4
        4 => (ctx.int((k + 1) * (k + 2)) * ctx.int((k + 3) * (k + 4))).sqrt() / 4,
        _ => ctx.zero(),
    }
}

/// `<psi_m | xi^2 | psi_n>`.
pub fn x2_element(ctx: &PrecisionContext, m: usize, n: usize) -> Real {
    let (lo, hi) = if m <= n { (m, n) } else { (n, m) };
    let k = lo as i64;
    match hi - lo {
        0 => ctx.ratio(2 * k + 1, 2),
        2 => ctx.int((k + 1) * (k + 2)).sqrt() / 2,
        _ => ctx.zero(),
    }
}

/// Signed-index front end for [`x4_element`].
pub fn x4_element_checked(ctx: &PrecisionContext, m: i64, n: i64) -> Result<Real> {
    if m < 0 || n < 0 {
        return Err(Error::Domain(format!("basis indices must be nonnegative, got ({m}, {n})")));
    }
    Ok(x4_element(ctx, m as usize, n as usize))
}

/// Matrix of `H = H0 + beta xi^4` on `N_s + 1` basis functions. With
/// `beta = 0` this is `H0`, diagonal with entries `m + 1/2`.
pub fn build_hamiltonian(ctx: &PrecisionContext, spec: &BasisSpec) -> BandedOperator {
    banded(ctx, spec, true)
}

/// Matrix of the perturbation `beta xi^4` alone, same band as
/// [`build_hamiltonian`].
pub fn build_perturbation(ctx: &PrecisionContext, spec: &BasisSpec) -> BandedOperator {
    banded(ctx, spec, false)
}

fn banded(ctx: &PrecisionContext, spec: &BasisSpec, with_h0: bool) -> BandedOperator {
    let dim = spec.dim();
    let rows = dim + 4;
    let beta = spec.beta();
    let diag0 = (0..rows)
        .map(|m| {
            let quartic = beta * x4_element(ctx, m, m);
            if with_h0 {
                base_energy(ctx, m) + quartic
            } else {
                quartic
            }
        })
        .collect();
    let diag2 = (0..rows).map(|m| beta * x4_element(ctx, m, m + 2)).collect();
    let diag4 = (0..rows).map(|m| beta * x4_element(ctx, m, m + 4)).collect();
    BandedOperator { dim, diag0, diag2, diag4 }
}

/// `H v`, clipped to the retained basis or extended by four rows.
pub fn apply_hamiltonian(ctx: &PrecisionContext, op: &BandedOperator, v: &WaveVector, mode: ApplyMode) -> Result<WaveVector> {
    op.apply_shifted(ctx, v, None, mode)
}

/// Coefficient-space inner product. The shorter vector is implicitly
/// zero-padded, so truncated and extended vectors can be mixed.
pub fn inner(ctx: &PrecisionContext, u: &WaveVector, v: &WaveVector) -> Real {
    let mut acc = ctx.zero();
    for (a, b) in u.coeffs.iter().zip(&v.coeffs) {
        acc.add_mul(a, b);
    }
    acc
}

/// `psi_0(xi) .. psi_{count-1}(xi)` by the normalized three-term recurrence
/// `psi_{k+1} = xi sqrt(2/(k+1)) psi_k - sqrt(k/(k+1)) psi_{k-1}`.
pub fn hermite_functions(ctx: &PrecisionContext, xi: &Real, count: usize) -> Vec<Real> {
    let gauss = (-(xi * xi) / &ctx.int(2)).exp();
    normalized_recurrence(ctx, xi, ctx.pi().sqrt().sqrt().recip() * gauss, count)
}

/// Runs the normalized recurrence from `start = psi_0(xi)`. With
/// `start = pi^(-1/4)` it yields the Hermite polynomials orthonormal under
/// the weight `exp(-xi^2)`.
pub(crate) fn normalized_recurrence(ctx: &PrecisionContext, xi: &Real, start: Real, count: usize) -> Vec<Real> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(start);
    if count == 1 {
        return out;
    }
    out.push(xi * &out[0] * ctx.int(2).sqrt());
    for k in 1..count - 1 {
        let kk = k as i64;
        let a = ctx.ratio(2, kk + 1).sqrt();
        let b = ctx.ratio(kk, kk + 1).sqrt();
        let next = xi * &a * &out[k] - b * &out[k - 1];
        out.push(next);
    }
    out
}

/// `sum_m v[m] psi_m(xi)`.
pub fn evaluate_wavefunction(ctx: &PrecisionContext, v: &WaveVector, xi: &Real) -> Real {
    let values = hermite_functions(ctx, xi, v.len());
    let mut acc = ctx.zero();
    for (c, psi) in v.coeffs.iter().zip(&values) {
        acc.add_mul(c, psi);
    }
    acc
}

/// Mass, frequency, Planck constant and `x^4` coefficient of the oscillator
/// in physical units.
#[derive(Clone, Debug)]
pub struct PhysicalParams {
    pub mass: Real,
    pub omega: Real,
    pub hbar: Real,
    /// Full coefficient of `x^4` in the potential.
    pub beta_phys: Real,
}

impl PhysicalParams {
    fn validate(&self) -> Result<()> {
        for (name, value) in [("mass", &self.mass), ("omega", &self.omega), ("hbar", &self.hbar)] {
            if value.is_zero() || value.is_sign_negative() {
                return Err(Error::Domain(format!("{name} must be positive, got {value}")));
            }
        }
        if self.beta_phys.is_sign_negative() {
            return Err(Error::Domain(format!("x^4 coefficient must be >= 0, got {}", self.beta_phys)));
        }
        Ok(())
    }

    /// Length unit `sqrt(hbar / (m omega))` with `x = length_scale * xi`.
    pub fn length_scale(&self) -> Result<Real> {
        self.validate()?;
        Ok((&self.hbar / &(&self.mass * &self.omega)).sqrt())
    }

    /// `E_phys = hbar omega E`.
    pub fn energy_to_physical(&self, energy: &Real) -> Result<Real> {
        self.validate()?;
        Ok(&self.hbar * &self.omega * energy)
    }
}

/// Dimensionless coupling: with `xi = sqrt(m omega / hbar) x` and energies
/// in units of `hbar omega`, the term `beta_phys x^4` becomes `beta xi^4`
/// with `beta = beta_phys hbar / (m^2 omega^3)`.
pub fn to_dimensionless(p: &PhysicalParams) -> Result<Real> {
    p.validate()?;
    let denom = &p.mass * &p.mass * &p.omega * &p.omega * &p.omega;
    Ok(&p.beta_phys * &p.hbar / &denom)
}

/// `E_phys = hbar omega E` for explicit `hbar` and `omega`.
pub fn energy_to_physical(hbar: &Real, omega: &Real, energy: &Real) -> Real {
    hbar * omega * energy
}
