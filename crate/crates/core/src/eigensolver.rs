//! Dense generalized eigensolver for `A x = μ B x` and the `μ ↔ λ` map.
//!
//! Eigenvalues come from shifted QR on the Hessenberg form of `B⁻¹A`
//! (real double-shift when the pencil is real, complex single-shift
//! otherwise). Eigenvectors are then computed by inverse iteration on the
//! original banded pencil, which keeps residuals at backward-error level
//! even when `B` is sign-indefinite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    balance, complex_hessenberg_eigenvalues, dot_c, dot_t, norm2, real_hessenberg_eigenvalues,
    reduce_to_hessenberg, BandLu, Matrix, Scalar, C64,
};

/// Condition-number ceiling for the mass matrix reduction.
pub const MASS_CONDITION_LIMIT: f64 = 1e12;

/// Default residual tolerance for returned eigenpairs.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub mu: C64,
    pub lambda_minus: C64,
    pub lambda_plus: C64,
    /// Eigenvector, normalized to unit Euclidean norm.
    pub vector: Vec<C64>,
    /// `‖Ax − μBx‖ / ((‖A‖₁ + |μ|‖B‖₁)‖x‖)`.
    pub residual: f64,
}

/// Roots of `λ(λ+1) = μ` with the principal square root:
/// `λ± = −1/2 ± sqrt(1/4 + μ)`.
pub fn mu_to_lambda(mu: C64) -> (C64, C64) {
    let s = (mu + 0.25).sqrt();
    let plus = C64::new(-0.5, 0.0) + s;
    let minus = C64::new(-1.0, 0.0) - plus;
    (minus, plus)
}

/// Lexicographic `(Re, Im)` order used for every returned spectrum.
pub fn canonical_order(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Relative backward error of an approximate eigenpair.
pub fn residual(a: &Matrix<C64>, b: &Matrix<C64>, mu: C64, x: &[C64]) -> f64 {
    let ax = a.matvec(x);
    let bx = b.matvec(x);
    let r: Vec<C64> = ax.iter().zip(&bx).map(|(&p, &q)| p - mu * q).collect();
    let scale = (a.norm1() + mu.norm() * b.norm1()) * norm2(x);
    if scale == 0.0 {
        0.0
    } else {
        norm2(&r) / scale
    }
}

fn check_pencil(a: &Matrix<C64>, b: &Matrix<C64>) -> Result<()> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::InvalidInput(format!(
            "pencil shapes {}x{} and {}x{} do not match",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if a.as_slice().iter().chain(b.as_slice()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("pencil has non-finite entries".into()));
    }
    Ok(())
}

fn band_of(a: &Matrix<C64>, b: &Matrix<C64>) -> (usize, usize) {
    let (al, au) = a.bandwidth();
    let (bl, bu) = b.bandwidth();
    (al.max(bl), au.max(bu))
}

/// All generalized eigenvalues, in canonical order.
pub fn pencil_eigenvalues(a: &Matrix<C64>, b: &Matrix<C64>) -> Result<Vec<C64>> {
    check_pencil(a, b)?;
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (kl, ku) = b.bandwidth();
    let lu = BandLu::factor_band(b, kl, ku, false);
    let condition = lu.condition_estimate();
    if !(condition <= MASS_CONDITION_LIMIT) {
        return Err(Error::MassMatrixSingular { condition });
    }
    let real = a.is_real() && b.is_real();
    let mut c = a.clone();
    for j in 0..n {
        lu.solve_in_place(c.col_mut(j));
    }
    let mut mus = if real {
        let mut h = c.map(|z| z.re);
        balance(&mut h);
        reduce_to_hessenberg(&mut h);
        real_hessenberg_eigenvalues(&mut h)?
    } else {
        balance(&mut c);
        reduce_to_hessenberg(&mut c);
        complex_hessenberg_eigenvalues(&mut c)?
    };
    mus.sort_by(canonical_order);
    Ok(mus)
}

struct InverseIteration<'p> {
    a: &'p Matrix<C64>,
    b: &'p Matrix<C64>,
    kl: usize,
    ku: usize,
    norm_a: f64,
    norm_b: f64,
    symmetric: bool,
}

impl<'p> InverseIteration<'p> {
    fn new(a: &'p Matrix<C64>, b: &'p Matrix<C64>) -> Self {
        let (kl, ku) = band_of(a, b);
        let norm_a = a.norm1();
        let norm_b = b.norm1();
        let scale = a.norm_fro().max(b.norm_fro()).max(f64::MIN_POSITIVE);
        let symmetric = a.asymmetry() <= 1e-12 * scale && b.asymmetry() <= 1e-12 * scale;
        InverseIteration {
            a,
            b,
            kl,
            ku,
            norm_a,
            norm_b,
            symmetric,
        }
    }

    fn residual(&self, mu: C64, x: &[C64]) -> f64 {
        let ax = self.a.matvec_banded(x, self.kl, self.ku);
        let bx = self.b.matvec_banded(x, self.kl, self.ku);
        let r: Vec<C64> = ax.iter().zip(&bx).map(|(&p, &q)| p - mu * q).collect();
        let scale = (self.norm_a + mu.norm() * self.norm_b) * norm2(x);
        if scale == 0.0 {
            0.0
        } else {
            norm2(&r) / scale
        }
    }

    /// Eigenvector for `mu`, orthogonalized against `deflate` (a cluster of
    /// vectors already found for numerically equal eigenvalues).
    fn run(&self, mu: C64, seed: u64, deflate: &[&[C64]], tol: f64) -> (C64, Vec<C64>, f64) {
        let n = self.a.rows();
        let (a, b) = (self.a, self.b);
        let lu = BandLu::factor_with(n, self.kl, self.ku, true, |i, j| a[(i, j)] - mu * b[(i, j)]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let mut best = (f64::INFINITY, x.clone());
        for _ in 0..6 {
            let bx = self.b.matvec_banded(&x, self.kl, self.ku);
            x = bx;
            lu.solve_in_place(&mut x);
            for v in deflate {
                let p = dot_c(v, &x);
                for (xi, &vi) in x.iter_mut().zip(v.iter()) {
                    *xi -= p * vi;
                }
            }
            let nrm = norm2(&x);
            if !(nrm > 0.0) || !nrm.is_finite() {
                break;
            }
            x.iter_mut().for_each(|v| *v = v.scale(1.0 / nrm));
            let r = self.residual(mu, &x);
            if r < best.0 {
                best = (r, x.clone());
            }
            if r <= 0.1 * tol {
                break;
            }
        }
        let (mut res, x) = best;
        let mut mu_out = mu;
        if self.symmetric {
            let num = dot_t(&x, &self.a.matvec_banded(&x, self.kl, self.ku));
            let den = dot_t(&x, &self.b.matvec_banded(&x, self.kl, self.ku));
            if den.norm() > 0.0 {
                let refined = num / den;
                let r = self.residual(refined, &x);
                if r < res && (refined - mu).norm() <= 1e-8 * (1.0 + mu.norm()) {
                    mu_out = refined;
                    res = r;
                }
            }
        }
        (mu_out, x, res)
    }
}

fn same_cluster(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-6 * (1.0 + a.norm().max(b.norm()))
}

/// Full eigendecomposition: every eigenvalue with its eigenvector and residual.
///
/// Fails with `NoConvergence` when an eigenvector cannot reach `tol`.
pub fn solve_gevp(a: &Matrix<C64>, b: &Matrix<C64>, tol: f64) -> Result<Vec<EigenSolution>> {
    let mus = pencil_eigenvalues(a, b)?;
    let it = InverseIteration::new(a, b);
    let mut out: Vec<EigenSolution> = Vec::with_capacity(mus.len());
    for (k, &mu) in mus.iter().enumerate() {
        let cluster: Vec<&[C64]> = out
            .iter()
            .rev()
            .take_while(|s| same_cluster(s.mu, mu))
            .map(|s| s.vector.as_slice())
            .collect();
        let (mu_ref, x, res) = it.run(mu, k as u64, &cluster, tol);
        if !(res <= tol) {
            return Err(Error::NoConvergence(format!(
                "inverse iteration for mu = {mu} stalled at residual {res:.3e}"
            )));
        }
        let (lambda_minus, lambda_plus) = mu_to_lambda(mu_ref);
        out.push(EigenSolution {
            mu: mu_ref,
            lambda_minus,
            lambda_plus,
            vector: x,
            residual: res,
        });
    }
    out.sort_by(|p, q| canonical_order(&p.mu, &q.mu));
    Ok(out)
}

/// Eigenpair for a single eigenvalue estimate `mu` (typically taken from
/// [`pencil_eigenvalues`]).
pub fn eigenpair(a: &Matrix<C64>, b: &Matrix<C64>, mu: C64, tol: f64) -> Result<EigenSolution> {
    check_pencil(a, b)?;
    let it = InverseIteration::new(a, b);
    let (mu_ref, x, res) = it.run(mu, 0, &[], tol);
    if !(res <= tol) {
        return Err(Error::NoConvergence(format!(
            "inverse iteration for mu = {mu} stalled at residual {res:.3e}"
        )));
    }
    let (lambda_minus, lambda_plus) = mu_to_lambda(mu_ref);
    Ok(EigenSolution {
        mu: mu_ref,
        lambda_minus,
        lambda_plus,
        vector: x,
        residual: res,
    })
}
