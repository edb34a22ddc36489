//! Dense numerical kernels: Cholesky, SVD, eigendecompositions, linear
//! solves, and the matrix exponential.
//!
//! Backward-stable factorizations (SVD, QR, LU, eigensolvers) delegate to
//! `faer`; the Cholesky factorization and the triangular solves built on it
//! are implemented here because the rest of the crate depends on their exact
//! pivot tolerance and on the upper-triangular convention `F^H F = M`.
//!
//! Every routine that returns vectors fixes a deterministic representative:
//! in each column the entry of largest modulus is made real and nonnegative,
//! and eigenvalues are sorted (ascending for Hermitian problems,
//! lexicographically by real then imaginary part otherwise).

use crate::error::Error;
use crate::matrix::{vec_dot, vec_norm2, ComplexMatrix};
use crate::Result;
use faer::prelude::Solve;
use num_complex::Complex64;

/// Relative tolerance below which a Cholesky pivot is treated as a failure
/// of positive definiteness.
pub const CHOLESKY_PIVOT_RTOL: f64 = 1e-13;

/// Relative Hermitian defect accepted before an input is rejected.
pub const HERMITIAN_RTOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// faer interop
// ---------------------------------------------------------------------------

fn to_faer(a: &ComplexMatrix) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, faer::c64>) -> Result<ComplexMatrix> {
    let mut data = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            data.push(m[(i, j)]);
        }
    }
    ComplexMatrix::new(m.nrows(), m.ncols(), data)
}

/// Scales `col` so its largest-modulus entry becomes real nonnegative.
/// Returns the unit scalar that was applied.
fn normalize_phase(col: &mut [Complex64]) -> Complex64 {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in col.iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return Complex64::ONE;
    }
    let w = col[best].conj() / best_mag;
    for z in col.iter_mut() {
        *z *= w;
    }
    w
}

fn phase_fix_column(m: &mut ComplexMatrix, j: usize) -> Complex64 {
    let mut col = m.column(j);
    let w = normalize_phase(&mut col);
    m.set_column(j, &col);
    w
}

fn scale_column(m: &mut ComplexMatrix, j: usize, s: Complex64) {
    let col: Vec<Complex64> = m.column(j).iter().map(|z| z * s).collect();
    m.set_column(j, &col);
}

// ---------------------------------------------------------------------------
// Cholesky
// ---------------------------------------------------------------------------

/// Upper-triangular Cholesky factor `F` of a Hermitian positive definite
/// matrix, with `F^H F = M`.
///
/// The factor is kept upper triangular so that two-sided reductions
/// `F^{-H} X F^{-1}` and the associated solves stay cheap; no inverse is
/// ever formed.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    f: ComplexMatrix,
}

/// Factors a Hermitian positive definite matrix as `M = F^H F` with `F`
/// upper triangular and a real positive diagonal.
///
/// Rejects matrices whose Hermitian defect exceeds [`HERMITIAN_RTOL`]
/// relative to the largest entry, and reports [`Error::NotPositiveDefinite`]
/// as soon as a pivot falls below [`CHOLESKY_PIVOT_RTOL`] times the largest
/// diagonal entry.
pub fn cholesky_upper(m: &ComplexMatrix) -> Result<CholeskyFactor> {
    if !m.is_square() {
        return Err(Error::shape(format!(
            "cholesky needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_RTOL {
        return Err(Error::NotHermitian { defect });
    }
    let n = m.rows();
    let max_diag = (0..n).map(|i| m[(i, i)].re).fold(f64::NEG_INFINITY, f64::max);
    let threshold = CHOLESKY_PIVOT_RTOL * max_diag.max(0.0);

    // Build the lower factor L with M = L L^H row by row, then store F = L^H.
    let mut l = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)].conj();
            }
            if i == j {
                let pivot = sum.re;
                if !(pivot > threshold) {
                    return Err(Error::NotPositiveDefinite { index: i, pivot });
                }
                l[(i, i)] = Complex64::new(pivot.sqrt(), 0.0);
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(CholeskyFactor { f: l.adjoint() })
}

impl CholeskyFactor {
    /// The upper-triangular factor `F`.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.f
    }

    pub fn order(&self) -> usize {
        self.f.rows()
    }

    /// Recomputes `F^H F`, mainly for round-trip checks.
    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.f.adjoint() * &self.f
    }

    /// Solves `F x = b` by back substitution.
    pub fn solve_upper_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.order();
        assert!(b.len() == n, "solve shape mismatch");
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.f[(i, j)] * x[j];
            }
            x[i] = acc / self.f[(i, i)];
        }
        x
    }

    /// Solves `F^H x = b` by forward substitution.
    pub fn solve_adjoint_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.order();
        assert!(b.len() == n, "solve shape mismatch");
        let mut x = b.to_vec();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.f[(j, i)].conj() * x[j];
            }
            x[i] = acc / self.f[(i, i)].conj();
        }
        x
    }

    /// Solves `F X = B` columnwise.
    pub fn solve_upper(&self, b: &ComplexMatrix) -> ComplexMatrix {
        assert!(b.rows() == self.order(), "solve shape mismatch");
        let mut x = ComplexMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            x.set_column(j, &self.solve_upper_vec(&b.column(j)));
        }
        x
    }

    /// Solves `F^H X = B` columnwise.
    pub fn solve_adjoint(&self, b: &ComplexMatrix) -> ComplexMatrix {
        assert!(b.rows() == self.order(), "solve shape mismatch");
        let mut x = ComplexMatrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            x.set_column(j, &self.solve_adjoint_vec(&b.column(j)));
        }
        x
    }

    /// Solves `X F = B`, i.e. applies `F^{-1}` from the right.
    pub fn solve_upper_right(&self, b: &ComplexMatrix) -> ComplexMatrix {
        self.solve_adjoint(&b.adjoint()).adjoint()
    }

    /// Two-sided reduction `F^{-H} X F^{-1}`, which carries a pencil
    /// `(X, M)` to an equivalent standard problem.
    pub fn reduce(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.solve_upper_right(&self.solve_adjoint(x))
    }
}

// ---------------------------------------------------------------------------
// SVD
// ---------------------------------------------------------------------------

/// Full singular value decomposition `A = U diag(sigma) V^H` with square
/// unitary `U` (m by m) and `V` (n by n) and `sigma` descending.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Full SVD with descending singular values and deterministic column phases:
/// paired columns take their phase from `V`, leftover columns of the larger
/// factor are fixed independently.
pub fn svd(a: &ComplexMatrix) -> Result<SvdResult> {
    let fa = to_faer(a);
    let dec = fa.svd().map_err(|_| Error::NoConvergence)?;
    let mut u = from_faer(dec.U()).map_err(|_| Error::NoConvergence)?;
    let mut v = from_faer(dec.V()).map_err(|_| Error::NoConvergence)?;
    let k = a.rows().min(a.cols());
    let sv = dec.S().column_vector();
    let mut sigma = Vec::with_capacity(k);
    for i in 0..k {
        let s = sv[i].re;
        if !s.is_finite() {
            return Err(Error::NoConvergence);
        }
        sigma.push(s.max(0.0));
    }
    // faer returns descending order; keep the invariant explicit.
    debug_assert!(sigma.windows(2).all(|w| w[0] >= w[1]));

    for j in 0..k {
        let w = phase_fix_column(&mut v, j);
        scale_column(&mut u, j, w);
    }
    for j in k..u.cols() {
        phase_fix_column(&mut u, j);
    }
    for j in k..v.cols() {
        phase_fix_column(&mut v, j);
    }
    Ok(SvdResult { u, sigma, v })
}

/// Smallest singular value of `a`.
pub fn sigma_min(a: &ComplexMatrix) -> Result<f64> {
    let vals = to_faer(a)
        .singular_values()
        .map_err(|_| Error::NoConvergence)?;
    vals.last()
        .copied()
        .filter(|s| s.is_finite())
        .map(|s| s.max(0.0))
        .ok_or(Error::NoConvergence)
}

/// Largest singular value of `a`, the spectral norm.
pub fn op_norm(a: &ComplexMatrix) -> Result<f64> {
    let vals = to_faer(a)
        .singular_values()
        .map_err(|_| Error::NoConvergence)?;
    vals.first()
        .copied()
        .filter(|s| s.is_finite())
        .ok_or(Error::NoConvergence)
}

/// All singular values of `a`, descending.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let vals = to_faer(a)
        .singular_values()
        .map_err(|_| Error::NoConvergence)?;
    if vals.iter().any(|s| !s.is_finite()) {
        return Err(Error::NoConvergence);
    }
    Ok(vals)
}

// ---------------------------------------------------------------------------
// Eigendecompositions
// ---------------------------------------------------------------------------

/// Which inner product the eigenvector columns are normalized in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Euclidean unit norm.
    Unit2Norm,
    /// Unit norm in the `M` inner product, `e^H M e = 1`.
    UnitMNorm,
}

/// Eigenvalues, optionally with eigenvector columns in matching order.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub lambdas: Vec<Complex64>,
    pub vectors: Option<ComplexMatrix>,
    pub normalization: Normalization,
}

fn lex_order(vals: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| {
        vals[a]
            .re
            .total_cmp(&vals[b].re)
            .then(vals[a].im.total_cmp(&vals[b].im))
    });
    idx
}

fn permute_pairs(
    lambdas: Vec<Complex64>,
    vectors: Option<ComplexMatrix>,
    order: &[usize],
) -> (Vec<Complex64>, Option<ComplexMatrix>) {
    let sorted: Vec<Complex64> = order.iter().map(|&i| lambdas[i]).collect();
    let verts = vectors.map(|vm| {
        let mut out = ComplexMatrix::zeros(vm.rows(), vm.cols());
        for (dst, &src) in order.iter().enumerate() {
            out.set_column(dst, &vm.column(src));
        }
        out
    });
    (sorted, verts)
}

fn unit_columns(m: &mut ComplexMatrix) {
    for j in 0..m.cols() {
        let col = m.column(j);
        let nrm = vec_norm2(&col);
        if nrm > 0.0 {
            let scaled: Vec<Complex64> = col.iter().map(|z| z / nrm).collect();
            m.set_column(j, &scaled);
        }
        phase_fix_column(m, j);
    }
}

/// Dense (non-Hermitian) eigendecomposition. Eigenvalues come back sorted
/// lexicographically by real part, then imaginary part; eigenvectors, when
/// requested, have unit Euclidean norm.
pub fn eig_dense(a: &ComplexMatrix, want_vectors: bool) -> Result<EigenPairs> {
    if !a.is_square() {
        return Err(Error::shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let fa = to_faer(a);
    if want_vectors {
        let dec = fa.eigen().map_err(|_| Error::NoConvergence)?;
        let vecs = from_faer(dec.U()).map_err(|_| Error::NoConvergence)?;
        let sv = dec.S().column_vector();
        let mut lambdas = Vec::with_capacity(a.rows());
        for i in 0..a.rows() {
            let z = sv[i];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NoConvergence);
            }
            lambdas.push(z);
        }
        let order = lex_order(&lambdas);
        let (lambdas, vectors) = permute_pairs(lambdas, Some(vecs), &order);
        let mut vm = vectors.unwrap();
        unit_columns(&mut vm);
        Ok(EigenPairs {
            lambdas,
            vectors: Some(vm),
            normalization: Normalization::Unit2Norm,
        })
    } else {
        let mut lambdas: Vec<Complex64> =
            fa.eigenvalues().map_err(|_| Error::NoConvergence)?;
        if lambdas.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NoConvergence);
        }
        let order = lex_order(&lambdas);
        lambdas = order.iter().map(|&i| lambdas[i]).collect();
        Ok(EigenPairs {
            lambdas,
            vectors: None,
            normalization: Normalization::Unit2Norm,
        })
    }
}

/// Hermitian eigendecomposition with real eigenvalues in ascending order.
/// Rejects inputs whose Hermitian defect exceeds [`HERMITIAN_RTOL`].
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<EigenPairs> {
    if !h.is_square() {
        return Err(Error::shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let defect = h.hermitian_defect();
    if defect > HERMITIAN_RTOL {
        return Err(Error::NotHermitian { defect });
    }
    let dec = to_faer(h)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::NoConvergence)?;
    let mut vecs = from_faer(dec.U()).map_err(|_| Error::NoConvergence)?;
    let sv = dec.S().column_vector();
    let mut lambdas = Vec::with_capacity(h.rows());
    for i in 0..h.rows() {
        let v = sv[i].re;
        if !v.is_finite() {
            return Err(Error::NoConvergence);
        }
        lambdas.push(Complex64::new(v, 0.0));
    }
    let order = lex_order(&lambdas);
    let (lambdas, vectors) = permute_pairs(lambdas, Some(vecs), &order);
    vecs = vectors.unwrap();
    unit_columns(&mut vecs);
    Ok(EigenPairs {
        lambdas,
        vectors: Some(vecs),
        normalization: Normalization::Unit2Norm,
    })
}

fn m_normalize_columns(vecs: &mut ComplexMatrix, m: &ComplexMatrix) {
    for j in 0..vecs.cols() {
        let col = vecs.column(j);
        let me = m.mul_vec(&col);
        let nrm = vec_dot(&col, &me).re.max(0.0).sqrt();
        if nrm > 0.0 {
            let scaled: Vec<Complex64> = col.iter().map(|z| z / nrm).collect();
            vecs.set_column(j, &scaled);
        }
        phase_fix_column(vecs, j);
    }
}

fn check_pencil_shapes(a: &ComplexMatrix, m: &ComplexMatrix) -> Result<()> {
    if !a.is_square() || !m.is_square() || a.rows() != m.rows() {
        return Err(Error::shape(format!(
            "pencil needs square matrices of equal order, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Generalized eigenproblem `A e = lambda M e` with Hermitian positive
/// definite `M`, solved through the Cholesky reduction
/// `F^{-H} A F^{-1} y = lambda y`, `e = F^{-1} y`.
///
/// Eigenvectors are normalized to `e^H M e = 1` and ordered like
/// [`eig_dense`].
pub fn geneig(a: &ComplexMatrix, m: &ComplexMatrix) -> Result<EigenPairs> {
    check_pencil_shapes(a, m)?;
    let f = cholesky_upper(m)?;
    let reduced = f.reduce(a);
    let ep = eig_dense(&reduced, true)?;
    let ym = ep.vectors.expect("eig_dense was asked for vectors");
    let mut vecs = f.solve_upper(&ym);
    m_normalize_columns(&mut vecs, m);
    Ok(EigenPairs {
        lambdas: ep.lambdas,
        vectors: Some(vecs),
        normalization: Normalization::UnitMNorm,
    })
}

/// Hermitian definite pencil `H e = lambda M e`: both matrices Hermitian,
/// `M` positive definite. Real eigenvalues ascending, vectors with
/// `e^H M e = 1`.
pub fn geneig_hermitian(h: &ComplexMatrix, m: &ComplexMatrix) -> Result<EigenPairs> {
    check_pencil_shapes(h, m)?;
    let defect = h.hermitian_defect();
    if defect > HERMITIAN_RTOL {
        return Err(Error::NotHermitian { defect });
    }
    let f = cholesky_upper(m)?;
    let reduced = f.reduce(h);
    // The reduction of a Hermitian matrix is Hermitian in exact arithmetic;
    // fold roundoff back so the symmetric solver stays applicable.
    let sym = (&reduced + &reduced.adjoint()).scale(Complex64::new(0.5, 0.0));
    let ep = eig_hermitian(&sym)?;
    let ym = ep.vectors.expect("eig_hermitian always returns vectors");
    let mut vecs = f.solve_upper(&ym);
    m_normalize_columns(&mut vecs, m);
    Ok(EigenPairs {
        lambdas: ep.lambdas,
        vectors: Some(vecs),
        normalization: Normalization::UnitMNorm,
    })
}

// ---------------------------------------------------------------------------
// Linear solve and QR
// ---------------------------------------------------------------------------

/// Solves `A X = B` by partially pivoted LU. Reports [`Error::Singular`]
/// when elimination produces non-finite values; conditioning short of that
/// is the caller's concern.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::shape(format!(
            "solve needs square A matching B, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let x = to_faer(a).partial_piv_lu().solve(to_faer(b));
    from_faer(x.as_ref()).map_err(|_| Error::Singular)
}

/// QR factorization with `Q` square unitary, used by the random problem
/// generators.
pub(crate) fn qr(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let dec = to_faer(a).qr();
    let q = from_faer(dec.compute_Q().as_ref()).map_err(|_| Error::NoConvergence)?;
    let r = from_faer(dec.R()).map_err(|_| Error::NoConvergence)?;
    Ok((q, r))
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

// Degree-by-degree 1-norm thresholds for the Pade approximants used by the
// scaling and squaring method (Higham 2005).
const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn add_scaled_identity(m: &ComplexMatrix, c: f64) -> ComplexMatrix {
    let mut out = m.clone();
    for i in 0..m.rows() {
        out[(i, i)] += Complex64::new(c, 0.0);
    }
    out
}

fn real_scale(m: &ComplexMatrix, c: f64) -> ComplexMatrix {
    m.scale(Complex64::new(c, 0.0))
}

fn pade_from_parts(
    a: &ComplexMatrix,
    odd: &ComplexMatrix,
    even: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let u = a * odd;
    let num = even + &u;
    let den = even - &u;
    solve(&den, &num)
}

fn pade_low(a: &ComplexMatrix, coeff: &[f64]) -> Result<ComplexMatrix> {
    let n = a.rows();
    let a2 = a * a;
    let mut powers = vec![ComplexMatrix::identity(n), a2.clone()];
    // powers[k] holds A^(2k); the degree-m approximant needs up to A^(m-1).
    while powers.len() < (coeff.len() / 2) {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut odd = ComplexMatrix::zeros(n, n);
    let mut even = ComplexMatrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        odd = &odd + &real_scale(p, coeff[2 * k + 1]);
        even = &even + &real_scale(p, coeff[2 * k]);
    }
    pade_from_parts(a, &odd, &even)
}

fn pade_13(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let c = &PADE_13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let odd_hi = &(&real_scale(&a6, c[13]) + &real_scale(&a4, c[11])) + &real_scale(&a2, c[9]);
    let odd_lo = &(&real_scale(&a6, c[7]) + &real_scale(&a4, c[5]))
        + &add_scaled_identity(&real_scale(&a2, c[3]), c[1]);
    let odd = &(&a6 * &odd_hi) + &odd_lo;
    let even_hi = &(&real_scale(&a6, c[12]) + &real_scale(&a4, c[10])) + &real_scale(&a2, c[8]);
    let even_lo = &(&real_scale(&a6, c[6]) + &real_scale(&a4, c[4]))
        + &add_scaled_identity(&real_scale(&a2, c[2]), c[0]);
    let even = &(&a6 * &even_hi) + &even_lo;
    pade_from_parts(a, &odd, &even)
}

/// Matrix exponential by Pade approximation with scaling and squaring.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::shape(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let nrm = a.one_norm();
    if nrm <= THETA_3 {
        return pade_low(a, &PADE_3);
    }
    if nrm <= THETA_5 {
        return pade_low(a, &PADE_5);
    }
    if nrm <= THETA_7 {
        return pade_low(a, &PADE_7);
    }
    if nrm <= THETA_9 {
        return pade_low(a, &PADE_9);
    }
    let s = ((nrm / THETA_13).log2().ceil()).max(0.0) as u32;
    let scaled = real_scale(a, 0.5f64.powi(s as i32));
    let mut e = pade_13(&scaled)?;
    for _ in 0..s {
        e = &e * &e;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::outer;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        (a - b).max_abs()
    }

    // -- Cholesky ---------------------------------------------------------

    #[test]
    fn cholesky_of_diagonal_is_sqrt() {
        let m = ComplexMatrix::from_diag(&[c(4.0, 0.0), c(9.0, 0.0)]);
        let f = cholesky_upper(&m).unwrap();
        assert!((f.matrix()[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((f.matrix()[(1, 1)] - c(3.0, 0.0)).norm() < 1e-15);
        assert_eq!(f.matrix()[(1, 0)], Complex64::ZERO);
    }

    #[test]
    fn cholesky_round_trips_complex_hpd() {
        let m = ComplexMatrix::from_rows(&[
            &[c(2.0, 0.0), c(0.0, 1.0)],
            &[c(0.0, -1.0), c(2.0, 0.0)],
        ]);
        let f = cholesky_upper(&m).unwrap();
        assert!(max_diff(&f.reconstruct(), &m) < 1e-14);
        // diagonal of F is real positive
        for i in 0..2 {
            let d = f.matrix()[(i, i)];
            assert!(d.im == 0.0 && d.re > 0.0);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        match cholesky_upper(&m) {
            Err(Error::NotPositiveDefinite { index, pivot }) => {
                assert_eq!(index, 1);
                assert!(pivot < 0.0);
            }
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn cholesky_rejects_near_singular() {
        // second pivot is ~1e-15, far below the 1e-13 relative floor
        let m = ComplexMatrix::from_rows(&[
            &[c(1.0, 0.0), c(1.0, 0.0)],
            &[c(1.0, 0.0), c(1.0 + 1e-15, 0.0)],
        ]);
        assert!(matches!(
            cholesky_upper(&m),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn cholesky_rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[
            &[c(2.0, 0.0), c(1.0, 0.0)],
            &[c(0.5, 0.0), c(2.0, 0.0)],
        ]);
        assert!(matches!(cholesky_upper(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn triangular_solves_round_trip() {
        let m = ComplexMatrix::from_rows(&[
            &[c(4.0, 0.0), c(1.0, 1.0), c(0.0, 0.5)],
            &[c(1.0, -1.0), c(5.0, 0.0), c(2.0, 0.0)],
            &[c(0.0, -0.5), c(2.0, 0.0), c(6.0, 0.0)],
        ]);
        let f = cholesky_upper(&m).unwrap();
        let b = ComplexMatrix::from_rows(&[
            &[c(1.0, 0.0)],
            &[c(0.0, 2.0)],
            &[c(-1.0, 1.0)],
        ]);
        let x = f.solve_upper(&b);
        assert!(max_diff(&(f.matrix() * &x), &b) < 1e-13);
        let y = f.solve_adjoint(&b);
        assert!(max_diff(&(&f.matrix().adjoint() * &y), &b) < 1e-13);
        let r = f.solve_upper_right(&b.adjoint());
        assert!(max_diff(&(&r * f.matrix()), &b.adjoint()) < 1e-13);
    }

    #[test]
    fn reduce_carries_m_to_identity() {
        let m = ComplexMatrix::from_rows(&[
            &[c(3.0, 0.0), c(0.0, 1.0)],
            &[c(0.0, -1.0), c(2.0, 0.0)],
        ]);
        let f = cholesky_upper(&m).unwrap();
        let reduced = f.reduce(&m);
        assert!(max_diff(&reduced, &ComplexMatrix::identity(2)) < 1e-14);
    }

    // -- SVD ---------------------------------------------------------------

    #[test]
    fn svd_golden_ratio_pair() {
        // [[-1, 1], [0, -1]] has singular values phi and 1/phi
        let a = ComplexMatrix::from_rows(&[
            &[c(-1.0, 0.0), c(1.0, 0.0)],
            &[c(0.0, 0.0), c(-1.0, 0.0)],
        ]);
        let dec = svd(&a).unwrap();
        assert!((dec.sigma[0] - 1.618033988749895).abs() < 1e-14);
        assert!((dec.sigma[1] - 0.618033988749895).abs() < 1e-14);
    }

    #[test]
    fn svd_reconstructs_and_is_unitary() {
        let a = ComplexMatrix::from_rows(&[
            &[c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.0)],
            &[c(0.0, 0.0), c(2.0, 2.0), c(1.0, 1.0)],
        ]);
        let dec = svd(&a).unwrap();
        assert_eq!(dec.u.rows(), 2);
        assert_eq!(dec.u.cols(), 2);
        assert_eq!(dec.v.rows(), 3);
        assert_eq!(dec.v.cols(), 3);
        let mut s = ComplexMatrix::zeros(2, 3);
        for (i, &sv) in dec.sigma.iter().enumerate() {
            s[(i, i)] = c(sv, 0.0);
        }
        let recon = &(&dec.u * &s) * &dec.v.adjoint();
        assert!(max_diff(&recon, &a) < 1e-13);
        assert!(max_diff(&(&dec.u.adjoint() * &dec.u), &ComplexMatrix::identity(2)) < 1e-13);
        assert!(max_diff(&(&dec.v.adjoint() * &dec.v), &ComplexMatrix::identity(3)) < 1e-13);
    }

    #[test]
    fn svd_phase_convention_is_deterministic() {
        let a = ComplexMatrix::from_rows(&[
            &[c(0.0, 2.0), c(1.0, 0.0)],
            &[c(-1.0, 0.0), c(0.0, 3.0)],
        ]);
        let dec = svd(&a).unwrap();
        for j in 0..2 {
            let col = dec.v.column(j);
            let (mut best, mut mag) = (0usize, 0.0f64);
            for (i, z) in col.iter().enumerate() {
                if z.norm() > mag {
                    mag = z.norm();
                    best = i;
                }
            }
            assert!(col[best].im.abs() < 1e-14);
            assert!(col[best].re >= 0.0);
        }
        // rerun gives bitwise identical factors
        let again = svd(&a).unwrap();
        assert_eq!(dec.u.data(), again.u.data());
        assert_eq!(dec.v.data(), again.v.data());
    }

    #[test]
    fn sigma_min_matches_jordan_block_formula() {
        // For the 2x2 Jordan block at 0, sigma_min(A - zI)^2
        // = |z|^2 + 1/2 - sqrt(1/4 + |z|^2).
        let z = c(0.3, 0.4);
        let a = ComplexMatrix::from_rows(&[
            &[-z, c(1.0, 0.0)],
            &[c(0.0, 0.0), -z],
        ]);
        let r2 = z.norm_sqr();
        let expected = (r2 + 0.5 - (0.25 + r2).sqrt()).sqrt();
        assert!((sigma_min(&a).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn op_norm_of_rank_one_is_product_of_norms() {
        let u = [c(3.0, 0.0), c(4.0, 0.0)];
        let v = [c(0.0, 1.0), c(0.0, 0.0)];
        let a = outer(&u, &v);
        assert!((op_norm(&a).unwrap() - 5.0).abs() < 1e-14);
    }

    // -- Eigen --------------------------------------------------------------

    #[test]
    fn eig_hermitian_two_by_two() {
        let h = ComplexMatrix::from_rows(&[
            &[c(2.0, 0.0), c(0.0, 1.0)],
            &[c(0.0, -1.0), c(2.0, 0.0)],
        ]);
        let ep = eig_hermitian(&h).unwrap();
        assert!((ep.lambdas[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((ep.lambdas[1] - c(3.0, 0.0)).norm() < 1e-14);
        let vm = ep.vectors.unwrap();
        for j in 0..2 {
            let x = vm.column(j);
            let hx = h.mul_vec(&x);
            let lx: Vec<Complex64> = x.iter().map(|z| z * ep.lambdas[j]).collect();
            let res: f64 = hx.iter().zip(&lx).map(|(a, b)| (a - b).norm()).sum();
            assert!(res < 1e-13);
        }
    }

    #[test]
    fn eig_hermitian_rejects_asymmetric_input() {
        let g = ComplexMatrix::from_rows(&[
            &[c(1.0, 0.0), c(1.0, 0.0)],
            &[c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        assert!(matches!(eig_hermitian(&g), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eig_dense_companion_matrix() {
        // companion of z^2 - 3z + 2, eigenvalues 1 and 2
        let a = ComplexMatrix::from_rows(&[
            &[c(0.0, 0.0), c(-2.0, 0.0)],
            &[c(1.0, 0.0), c(3.0, 0.0)],
        ]);
        let ep = eig_dense(&a, true).unwrap();
        assert!((ep.lambdas[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((ep.lambdas[1] - c(2.0, 0.0)).norm() < 1e-12);
        let vm = ep.vectors.unwrap();
        for j in 0..2 {
            let x = vm.column(j);
            assert!((vec_norm2(&x) - 1.0).abs() < 1e-13);
            let ax = a.mul_vec(&x);
            let res: f64 = ax
                .iter()
                .zip(&x)
                .map(|(axi, xi)| (axi - ep.lambdas[j] * xi).norm())
                .sum();
            assert!(res < 1e-12);
        }
    }

    #[test]
    fn eig_dense_orders_lexicographically() {
        let a = ComplexMatrix::from_diag(&[c(1.0, 1.0), c(1.0, -1.0), c(0.0, 0.0)]);
        let ep = eig_dense(&a, false).unwrap();
        assert!((ep.lambdas[0] - c(0.0, 0.0)).norm() < 1e-14);
        assert!((ep.lambdas[1] - c(1.0, -1.0)).norm() < 1e-14);
        assert!((ep.lambdas[2] - c(1.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn geneig_diagonal_pencil() {
        let a = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let m = ComplexMatrix::from_diag(&[c(4.0, 0.0), c(1.0, 0.0)]);
        let ep = geneig(&a, &m).unwrap();
        assert!((ep.lambdas[0] - c(0.25, 0.0)).norm() < 1e-13);
        assert!((ep.lambdas[1] - c(2.0, 0.0)).norm() < 1e-13);
        assert_eq!(ep.normalization, Normalization::UnitMNorm);
        let vm = ep.vectors.unwrap();
        for j in 0..2 {
            let e = vm.column(j);
            let me = m.mul_vec(&e);
            assert!((vec_dot(&e, &me).re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn geneig_residuals_on_dense_pencil() {
        let a = ComplexMatrix::from_rows(&[
            &[c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0)],
            &[c(0.0, 0.0), c(-1.0, 0.5), c(1.0, 0.0)],
            &[c(3.0, 0.0), c(0.0, 0.0), c(0.5, -2.0)],
        ]);
        let m = ComplexMatrix::from_rows(&[
            &[c(4.0, 0.0), c(1.0, 1.0), c(0.0, 0.0)],
            &[c(1.0, -1.0), c(5.0, 0.0), c(0.5, 0.0)],
            &[c(0.0, 0.0), c(0.5, 0.0), c(3.0, 0.0)],
        ]);
        let ep = geneig(&a, &m).unwrap();
        let vm = ep.vectors.unwrap();
        let a_norm = op_norm(&a).unwrap();
        let m_norm = op_norm(&m).unwrap();
        for j in 0..3 {
            let e = vm.column(j);
            let ae = a.mul_vec(&e);
            let me = m.mul_vec(&e);
            let res: f64 = ae
                .iter()
                .zip(&me)
                .map(|(x, y)| (x - ep.lambdas[j] * y).norm())
                .sum();
            assert!(res <= 1e-8 * (a_norm + ep.lambdas[j].norm() * m_norm));
        }
    }

    #[test]
    fn geneig_hermitian_diagonal_pencil() {
        let h = ComplexMatrix::from_diag(&[c(2.0, 0.0), c(8.0, 0.0)]);
        let m = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let ep = geneig_hermitian(&h, &m).unwrap();
        assert!((ep.lambdas[0] - c(2.0, 0.0)).norm() < 1e-13);
        assert!((ep.lambdas[1] - c(4.0, 0.0)).norm() < 1e-13);
        let vm = ep.vectors.unwrap();
        let e = vm.column(1);
        let me = m.mul_vec(&e);
        assert!((vec_dot(&e, &me).re - 1.0).abs() < 1e-12);
    }

    // -- solve / expm --------------------------------------------------------

    #[test]
    fn solve_inverts_small_system() {
        let a = ComplexMatrix::from_rows(&[
            &[c(2.0, 0.0), c(1.0, 0.0)],
            &[c(1.0, 0.0), c(3.0, 0.0)],
        ]);
        let b = ComplexMatrix::from_rows(&[&[c(3.0, 0.0)], &[c(4.0, 0.0)]]);
        let x = solve(&a, &b).unwrap();
        assert!(max_diff(&(&a * &x), &b) < 1e-13);
    }

    #[test]
    fn solve_reports_singularity() {
        let a = ComplexMatrix::from_rows(&[
            &[c(1.0, 0.0), c(2.0, 0.0)],
            &[c(2.0, 0.0), c(4.0, 0.0)],
        ]);
        let b = ComplexMatrix::identity(2);
        assert!(matches!(solve(&a, &b), Err(Error::Singular)));
    }

    #[test]
    fn expm_of_diagonal() {
        use std::f64::consts::PI;
        let a = ComplexMatrix::from_diag(&[c(0.0, 0.0), c(0.0, PI)]);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - c(1.0, 0.0)).norm() < 1e-13);
        assert!((e[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-13);
        assert!(e[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn expm_of_nilpotent() {
        let a = ComplexMatrix::from_rows(&[
            &[c(0.0, 0.0), c(1.0, 0.0)],
            &[c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        let e = expm(&a).unwrap();
        let want = ComplexMatrix::from_rows(&[
            &[c(1.0, 0.0), c(1.0, 0.0)],
            &[c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        assert!(max_diff(&e, &want) < 1e-14);
    }

    #[test]
    fn expm_of_rotation_generator_small_and_large() {
        for &theta in &[1.3f64, 20.0] {
            let a = ComplexMatrix::from_rows(&[
                &[c(0.0, 0.0), c(-theta, 0.0)],
                &[c(theta, 0.0), c(0.0, 0.0)],
            ]);
            let e = expm(&a).unwrap();
            let want = ComplexMatrix::from_rows(&[
                &[c(theta.cos(), 0.0), c(-theta.sin(), 0.0)],
                &[c(theta.sin(), 0.0), c(theta.cos(), 0.0)],
            ]);
            assert!(max_diff(&e, &want) < 1e-12, "theta = {theta}");
        }
    }

    #[test]
    fn expm_inverse_is_exp_of_negation() {
        let a = ComplexMatrix::from_rows(&[
            &[c(0.1, 0.3), c(1.0, -0.4)],
            &[c(0.0, 0.7), c(-0.2, 0.0)],
        ]);
        let e = expm(&a).unwrap();
        let einv = expm(&(-&a)).unwrap();
        assert!(max_diff(&(&e * &einv), &ComplexMatrix::identity(2)) < 1e-13);
    }
}
