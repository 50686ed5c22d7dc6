//! Matrix-variate hierarchy: Wishart and inverse-Wishart conditionals, the
//! covariance chain and Gaussian returns drawn from it.
//!
//! The conditional densities are written in the β-parameterisation
//!
//! ```text
//! Wishart:          f(Σ|Σ') ∝ |Σ|^{β−(p+1)/2} exp(−β Tr Σ'⁻¹Σ)
//! inverse-Wishart:  f(Σ|Σ') ∝ |Σ|^{−β−p−1}     exp(−β Tr Σ'Σ⁻¹)
//! ```
//!
//! Matching against the standard forms `|X|^{(ν−p−1)/2} exp(−½Tr S⁻¹X)` and
//! `|X|^{−(ν+p+1)/2} exp(−½Tr ΨX⁻¹)` gives `ν = 2β, S = Σ'/(2β)` and
//! `ν = 2β + p + 1, Ψ = 2βΣ'`. Both have conditional mean `Σ'`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::ModelClass;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
}

type Result<T> = std::result::Result<T, MatrixError>;

/// Symmetric, strictly positive definite `p × p` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CovRepr", into = "CovRepr")]
pub struct CovMatrix {
    m: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct CovRepr {
    dim: usize,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<CovRepr> for CovMatrix {
    type Error = MatrixError;

    fn try_from(r: CovRepr) -> Result<Self> {
        if r.entries.len() != r.dim {
            return Err(MatrixError::Parameter(
                "row count does not match dim".into(),
            ));
        }
        CovMatrix::from_rows(&r.entries)
    }
}

impl From<CovMatrix> for CovRepr {
    fn from(c: CovMatrix) -> Self {
        CovRepr {
            dim: c.dim(),
            entries: c.rows(),
        }
    }
}

impl CovMatrix {
    /// Validates symmetry (to 1e-12 relative to the largest entry) and
    /// positive definiteness, then stores the exactly symmetrised matrix.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || !m.is_square() {
            return Err(MatrixError::Parameter(format!(
                "covariance must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(MatrixError::Domain("non-finite covariance entry".into()));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(MatrixError::Domain(format!(
                "matrix not symmetric (|A − Aᵀ| = {asym:e})"
            )));
        }
        let m = (&m + m.transpose()) * 0.5;
        if m.clone().cholesky().is_none() {
            return Err(MatrixError::Domain("matrix not positive definite".into()));
        }
        Ok(CovMatrix { m })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(MatrixError::Parameter("ragged covariance rows".into()));
        }
        Self::new(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
    }

    pub fn identity(p: usize) -> Self {
        Self::scaled_identity(p, 1.0)
    }

    pub fn scaled_identity(p: usize, s: f64) -> Self {
        assert!(p > 0 && s > 0.0, "scaled identity needs p > 0 and s > 0");
        CovMatrix {
            m: DMatrix::identity(p, p) * s,
        }
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.m
            .row_iter()
            .map(|r| r.iter().cloned().collect())
            .collect()
    }

    /// Lower Cholesky factor.
    pub fn cholesky_l(&self) -> DMatrix<f64> {
        self.m.clone().cholesky().expect("validated PD").l()
    }

    /// Symmetric square root through the eigendecomposition.
    pub fn sqrt(&self) -> DMatrix<f64> {
        let e = self.m.clone().symmetric_eigen();
        let d = e.eigenvalues.map(|l| l.max(0.0).sqrt());
        &e.eigenvectors * DMatrix::from_diagonal(&d) * e.eigenvectors.transpose()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.m.clone().cholesky().expect("validated PD").inverse()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Dense CSV, one matrix row per line, no header.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        for row in self.rows() {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    fn from_sampled(m: DMatrix<f64>) -> Result<Self> {
        let m = (&m + m.transpose()) * 0.5;
        if m.clone().cholesky().is_none() {
            return Err(MatrixError::Domain(
                "sampled matrix lost positive definiteness".into(),
            ));
        }
        Ok(CovMatrix { m })
    }
}

/// Hierarchy of covariance conditionals started from `sigma0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub model_class: ModelClass,
    pub beta: Vec<f64>,
    pub sigma0: CovMatrix,
}

impl ChainSpec {
    pub fn new(model_class: ModelClass, beta: Vec<f64>, sigma0: CovMatrix) -> Result<Self> {
        if beta.is_empty() || beta.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(MatrixError::Parameter(
                "chain needs N >= 1 positive betas".into(),
            ));
        }
        let spec = ChainSpec {
            model_class,
            beta,
            sigma0,
        };
        if model_class == ModelClass::Wishart {
            for &b in &spec.beta {
                check_wishart_beta(b, spec.sigma0.dim())?;
            }
        }
        Ok(spec)
    }

    pub fn levels(&self) -> usize {
        self.beta.len()
    }
}

fn check_wishart_beta(beta: f64, p: usize) -> Result<()> {
    if !(beta > 0.0 && 2.0 * beta > p as f64 - 1.0) {
        return Err(MatrixError::Parameter(format!(
            "Wishart step needs 2β > p − 1, got β = {beta}, p = {p}"
        )));
    }
    Ok(())
}

/// Standard Wishart(ν, S) draw via the Bartlett decomposition, given the
/// lower Cholesky factor of `S`.
fn bartlett<R: Rng + ?Sized>(l: &DMatrix<f64>, nu: f64, rng: &mut R) -> DMatrix<f64> {
    let p = l.nrows();
    let mut a = DMatrix::zeros(p, p);
    for i in 0..p {
        // χ²_k = Gamma(k/2, scale 2).
        let k = nu - i as f64;
        let chi2 = Gamma::new(0.5 * k, 2.0).expect("k > 0").sample(rng);
        a[(i, i)] = chi2.sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let la = l * a;
    &la * la.transpose()
}

/// One Wishart conditional draw with mean `prev`, using `rng`.
pub fn wishart_step<R: Rng + ?Sized>(
    prev: &CovMatrix,
    beta: f64,
    rng: &mut R,
) -> Result<CovMatrix> {
    check_wishart_beta(beta, prev.dim())?;
    let l = prev.cholesky_l() / (2.0 * beta).sqrt();
    CovMatrix::from_sampled(bartlett(&l, 2.0 * beta, rng))
}

/// One inverse-Wishart conditional draw with mean `prev`, using `rng`.
pub fn inv_wishart_step<R: Rng + ?Sized>(
    prev: &CovMatrix,
    beta: f64,
    rng: &mut R,
) -> Result<CovMatrix> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(MatrixError::Parameter(format!(
            "β must be positive, got {beta}"
        )));
    }
    let p = prev.dim() as f64;
    let nu = 2.0 * beta + p + 1.0;
    // W ~ Wishart(ν, Ψ⁻¹) with Ψ = 2βΣ', then Σ = W⁻¹.
    let psi_inv = prev.inverse() / (2.0 * beta);
    let l = psi_inv
        .cholesky()
        .ok_or_else(|| MatrixError::Domain("Ψ⁻¹ not PD".into()))?
        .l();
    let w = bartlett(&l, nu, rng);
    let inv = w
        .cholesky()
        .ok_or_else(|| MatrixError::Domain("singular Wishart draw".into()))?
        .inverse();
    CovMatrix::from_sampled(inv)
}

/// Seeded Wishart conditional draw.
pub fn sample_wishart_step(prev: &CovMatrix, beta: f64, seed: u64) -> Result<CovMatrix> {
    wishart_step(prev, beta, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Seeded inverse-Wishart conditional draw.
pub fn sample_inv_wishart_step(prev: &CovMatrix, beta: f64, seed: u64) -> Result<CovMatrix> {
    inv_wishart_step(prev, beta, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Σ_N by composing the N conditionals from Σ₀, using `rng`.
pub fn chain_draw<R: Rng + ?Sized>(spec: &ChainSpec, rng: &mut R) -> Result<CovMatrix> {
    let mut sigma = spec.sigma0.clone();
    for &b in &spec.beta {
        sigma = match spec.model_class {
            ModelClass::Wishart => wishart_step(&sigma, b, rng)?,
            ModelClass::InverseWishart => inv_wishart_step(&sigma, b, rng)?,
        };
    }
    Ok(sigma)
}

/// Seeded Σ_N draw.
pub fn sample_chain(spec: &ChainSpec, seed: u64) -> Result<CovMatrix> {
    chain_draw(spec, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `count` i.i.d. `N(0, Σ)` vectors, using `rng`.
pub fn returns_draw<R: Rng + ?Sized>(
    sigma: &CovMatrix,
    count: usize,
    rng: &mut R,
) -> Vec<DVector<f64>> {
    let l = sigma.cholesky_l();
    let p = sigma.dim();
    (0..count)
        .map(|_| {
            let z = DVector::from_fn(p, |_, _| StandardNormal.sample(rng));
            &l * z
        })
        .collect()
}

/// Seeded Gaussian returns.
pub fn sample_returns(sigma: &CovMatrix, count: usize, seed: u64) -> Vec<DVector<f64>> {
    returns_draw(sigma, count, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `(det(1 + A^{½} r rᵀ A^{½}), 1 + rᵀ A r)`.
pub fn rank1_det_identity(a: &CovMatrix, r: &[f64]) -> Result<(f64, f64)> {
    let p = a.dim();
    if r.len() != p {
        return Err(MatrixError::Parameter(format!(
            "r has length {}, expected {p}",
            r.len()
        )));
    }
    let r = DVector::from_column_slice(r);
    let v = a.sqrt() * &r;
    let lhs = (DMatrix::identity(p, p) + &v * v.transpose()).determinant();
    let rhs = 1.0 + (r.transpose() * a.matrix() * &r)[(0, 0)];
    Ok((lhs, rhs))
}

/// Both sides of the gamma reduction identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CftCheck {
    /// Monte Carlo estimate of the p-dimensional matrix integral.
    pub matrix_side: f64,
    /// Its standard error.
    pub std_error: f64,
    /// `(1 + rᵀAr)^{−ν}`.
    pub scalar_side: f64,
}

impl CftCheck {
    /// Distance between the two sides in standard errors.
    pub fn z_score(&self) -> f64 {
        let d = (self.matrix_side - self.scalar_side).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Estimates `Γ_p(ν)⁻¹ ∫ |X|^{ν−(p+1)/2} exp(−Tr X − rᵀA^{½}XA^{½}r) dX`.
///
/// The weight is the Wishart(2ν, ½·1) density, so only the exponential
/// factor is averaged over exact Wishart draws.
pub fn verify_gamma_cft(
    nu: f64,
    a: &CovMatrix,
    r: &[f64],
    samples: usize,
    seed: u64,
) -> Result<CftCheck> {
    let p = a.dim();
    if !(nu > (p as f64 + 1.0) / 2.0) {
        return Err(MatrixError::Parameter(format!(
            "need ν > (p+1)/2, got ν = {nu}, p = {p}"
        )));
    }
    if r.len() != p {
        return Err(MatrixError::Parameter(format!(
            "r has length {}, expected {p}",
            r.len()
        )));
    }
    let rv = DVector::from_column_slice(r);
    let scalar_side = (1.0 + (rv.transpose() * a.matrix() * &rv)[(0, 0)]).powf(-nu);
    if p == 1 {
        return Ok(CftCheck {
            matrix_side: scalar_side,
            std_error: 0.0,
            scalar_side,
        });
    }
    if samples < 2 {
        return Err(MatrixError::Parameter("need at least two samples".into()));
    }
    let v = a.sqrt() * rv;
    let l = DMatrix::identity(p, p) * 0.5f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let x = bartlett(&l, 2.0 * nu, &mut rng);
        let w = (-(v.transpose() * &x * &v)[(0, 0)]).exp();
        s1 += w;
        s2 += w * w;
    }
    let n = samples as f64;
    let mean = s1 / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(CftCheck {
        matrix_side: mean,
        std_error: (var / n).sqrt(),
        scalar_side,
    })
}
