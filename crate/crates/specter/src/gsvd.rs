//! Generalized singular value decompositions: B-singular values of a matrix
//! pair and (S, T)-singular values with respect to a pair of Hermitian
//! positive definite weights.

use crate::error::Error;
use crate::matrix::{vec_dot, vec_norm2, ComplexMatrix};
use crate::numcore::{cholesky_upper, svd};
use crate::Result;
use num_complex::Complex64;

/// Relative threshold below which an alpha paired with a zero beta counts as
/// zero, making the B-singular value set degenerate.
pub const DEGENERACY_RTOL: f64 = 1e-12;

/// Relative singular value threshold for numerical rank decisions.
const RANK_RTOL: f64 = 1e-13;

/// Factors of the B-singular value decomposition
/// `U^H A X = diag(alphas)`, `V^H B X = diag(betas)`.
///
/// `betas` is nonincreasing with exactly `rank_b` positive entries, and the
/// finite B-singular values are `alphas[i] / betas[i]` for `i < rank_b`.
/// When `degenerate` is set, some alpha paired with a zero beta vanishes and
/// the value set is every nonnegative real instead.
#[derive(Debug, Clone)]
pub struct BsvResult {
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
    pub x: ComplexMatrix,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub rank_b: usize,
    pub degenerate: bool,
}

/// The value set described by a [`BsvResult`].
#[derive(Debug, Clone, PartialEq)]
pub enum BsvValues {
    /// Finite B-singular values, descending.
    Values(Vec<f64>),
    /// Degenerate case: every `mu >= 0` is a B-singular value.
    AllNonnegative,
}

/// Factors of the (S, T)-singular value decomposition: `U` is S-unitary,
/// `V` is T-unitary, and `U^{-1} A V = diag(mus)` with `mus` descending.
#[derive(Debug, Clone)]
pub struct StsvdResult {
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
    pub mus: Vec<f64>,
}

/// (S, T)-singular values of an m by n matrix (m >= n) with HPD weights
/// `s` (m by m) and `t` (n by n).
///
/// With Cholesky factors `S = L L^H` and `T = K K^H`, the values are the
/// ordinary singular values of `L^H A K^{-H}`, and the returned factors are
/// the back-transformed singular vector matrices, so `U^H S U = I`,
/// `V^H T V = I`, and `A V = U diag(mus)`.
pub fn st_singular_values(
    a: &ComplexMatrix,
    s: &ComplexMatrix,
    t: &ComplexMatrix,
) -> Result<StsvdResult> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::shape(format!(
            "need at least as many rows as columns, got {m}x{n}"
        )));
    }
    if s.rows() != m || s.cols() != m || t.rows() != n || t.cols() != n {
        return Err(Error::shape(format!(
            "weights must be {m}x{m} and {n}x{n}, got {}x{} and {}x{}",
            s.rows(),
            s.cols(),
            t.rows(),
            t.cols()
        )));
    }
    // S = F_s^H F_s and T = F_t^H F_t put the lower factors at L = F_s^H,
    // K = F_t^H, so L^H A K^{-H} = F_s A F_t^{-1}.
    let f_s = cholesky_upper(s)?;
    let f_t = cholesky_upper(t)?;
    let c = f_t.solve_upper_right(&(f_s.matrix() * a));
    let dec = svd(&c)?;
    let u = f_s.solve_upper(&dec.u);
    let v = f_t.solve_upper(&dec.v);
    Ok(StsvdResult {
        u,
        v,
        mus: dec.sigma,
    })
}

/// Extends a set of orthonormal columns to a full unitary basis of C^dim by
/// Gram-Schmidt over the standard basis vectors, with reorthogonalization.
fn complete_to_unitary(basis: &[Vec<Complex64>], dim: usize) -> ComplexMatrix {
    assert!(basis.len() <= dim);
    let mut cols: Vec<Vec<Complex64>> = basis.to_vec();
    while cols.len() < dim {
        let before = cols.len();
        for cand in 0..dim {
            if cols.len() == dim {
                break;
            }
            let mut w = vec![Complex64::ZERO; dim];
            w[cand] = Complex64::ONE;
            for _ in 0..2 {
                for c in &cols {
                    let proj = vec_dot(c, &w);
                    for (wi, ci) in w.iter_mut().zip(c) {
                        *wi -= proj * ci;
                    }
                }
            }
            let nrm = vec_norm2(&w);
            if nrm > 1e-8 {
                for wi in w.iter_mut() {
                    *wi /= nrm;
                }
                cols.push(w);
            }
        }
        assert!(
            cols.len() > before,
            "orthonormal completion made no progress"
        );
    }
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// B-singular value decomposition of the pair `(a, b)` with `a` m_a by n
/// (m_a >= n) and `b` m_b by n.
///
/// When `b^H b` is numerically nonsingular the problem reduces to
/// [`st_singular_values`] with weights `(I, b^H b)`. Otherwise the columns
/// are split by the numerical rank of `b`: the null directions of `b` carry
/// zero betas, their alphas come from an SVD of the corresponding block of
/// `a`, and the remaining block is deflated against it so `U` stays unitary.
pub fn bsv(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<BsvResult> {
    let (m_a, n) = (a.rows(), a.cols());
    if m_a < n {
        return Err(Error::shape(format!(
            "need at least as many rows as columns in a, got {m_a}x{n}"
        )));
    }
    if b.cols() != n {
        return Err(Error::shape(format!(
            "a and b need equal column counts, got {n} and {}",
            b.cols()
        )));
    }
    let gram = &b.adjoint() * b;
    match cholesky_upper(&gram) {
        Ok(_) => bsv_full_rank(a, b, &gram),
        Err(Error::NotPositiveDefinite { .. }) => bsv_rank_deficient(a, b),
        Err(e) => Err(e),
    }
}

fn bsv_full_rank(a: &ComplexMatrix, b: &ComplexMatrix, gram: &ComplexMatrix) -> Result<BsvResult> {
    let (m_a, n) = (a.rows(), a.cols());
    let st = st_singular_values(a, &ComplexMatrix::identity(m_a), gram)?;
    // V^H (B^H B) V = I makes the columns of BV orthonormal, so they are the
    // leading columns of the unitary factor on the B side.
    let bx = b * &st.v;
    let bx_cols: Vec<Vec<Complex64>> = (0..n).map(|j| bx.column(j)).collect();
    let v = complete_to_unitary(&bx_cols, b.rows());
    Ok(BsvResult {
        u: st.u,
        v,
        x: st.v,
        alphas: st.mus,
        betas: vec![1.0; n],
        rank_b: n,
        degenerate: false,
    })
}

fn bsv_rank_deficient(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<BsvResult> {
    let (m_a, n) = (a.rows(), a.cols());
    let m_b = b.rows();
    let dec_b = svd(b)?;
    let sig_max = dec_b.sigma.first().copied().unwrap_or(0.0);
    let r = dec_b
        .sigma
        .iter()
        .take_while(|&&s| s > RANK_RTOL * sig_max && s > 0.0)
        .count();

    // X0 = V_B diag(1/sigma_1..1/sigma_r, 1..1) sends the range columns of B
    // to orthonormal vectors and its null columns to (numerically) zero.
    let mut scale = vec![Complex64::ONE; n];
    for (i, s) in scale.iter_mut().enumerate().take(r) {
        *s = Complex64::new(1.0 / dec_b.sigma[i], 0.0);
    }
    let x0 = &dec_b.v * &ComplexMatrix::from_diag(&scale);
    let c = a * &x0;

    let mut alphas = vec![0.0f64; n];
    let mut u_slots: Vec<Option<Vec<Complex64>>> = vec![None; n];
    let mut x = x0.clone();

    // Null-of-B block: rotate it to U2 Sigma2 form; its sigmas are the
    // alphas paired with zero betas.
    let mut u2_range: Vec<Vec<Complex64>> = Vec::new();
    if r < n {
        let c2 = ComplexMatrix::from_fn(m_a, n - r, |i, j| c[(i, r + j)]);
        let dec2 = svd(&c2)?;
        let s2_max = dec2.sigma.first().copied().unwrap_or(0.0);
        let r2 = dec2
            .sigma
            .iter()
            .take_while(|&&s| s > RANK_RTOL * s2_max && s > 0.0)
            .count();
        for (k, &s2) in dec2.sigma.iter().enumerate() {
            alphas[r + k] = s2;
            if k < r2 {
                u_slots[r + k] = Some(dec2.u.column(k));
                u2_range.push(dec2.u.column(k));
            }
        }
        // carry the W2 rotation into X's null block
        let x_null = ComplexMatrix::from_fn(n, n - r, |i, j| x0[(i, r + j)]);
        let x_null_rot = &x_null * &dec2.v;
        for j in 0..(n - r) {
            x.set_column(r + j, &x_null_rot.column(j));
        }

        if r > 0 {
            let c1 = ComplexMatrix::from_fn(m_a, r, |i, j| c[(i, j)]);
            // Deflate C1 against the realized null-block directions by
            // column operations that add null columns of X (invisible to B).
            let mut c1_defl = c1.clone();
            let mut n_mat = ComplexMatrix::zeros(n - r, r);
            for (k, u2k) in u2_range.iter().enumerate() {
                for j in 0..r {
                    let coef = vec_dot(u2k, &c1.column(j));
                    n_mat[(k, j)] = -coef / dec2.sigma[k];
                    let col: Vec<Complex64> = c1_defl
                        .column(j)
                        .iter()
                        .zip(u2k)
                        .map(|(ci, ui)| ci - coef * ui)
                        .collect();
                    c1_defl.set_column(j, &col);
                }
            }
            let x_shift = &x_null_rot * &n_mat;
            for j in 0..r {
                let col: Vec<Complex64> = (0..n)
                    .map(|i| x[(i, j)] + x_shift[(i, j)])
                    .collect();
                x.set_column(j, &col);
            }
            finish_range_block(&c1_defl, r, &mut x, &mut alphas, &mut u_slots)?;
        }
    } else if r > 0 {
        let c1 = c.clone();
        finish_range_block(&c1, r, &mut x, &mut alphas, &mut u_slots)?;
    }

    // Assemble the unitary U: filled slots first, completion in the gaps and
    // the trailing columns.
    let filled: Vec<Vec<Complex64>> = u_slots.iter().flatten().cloned().collect();
    let completion = complete_to_unitary(&filled, m_a);
    let mut u = ComplexMatrix::zeros(m_a, m_a);
    let mut next_completion = filled.len();
    for (j, slot) in u_slots.iter().enumerate() {
        match slot {
            Some(col) => u.set_column(j, col),
            None => {
                u.set_column(j, &completion.column(next_completion));
                next_completion += 1;
            }
        }
    }
    for j in n..m_a {
        u.set_column(j, &completion.column(next_completion));
        next_completion += 1;
    }

    // V: leading r columns are B X (orthonormal by construction of X0).
    let v = if r > 0 {
        let bx = b * &x;
        let lead: Vec<Vec<Complex64>> = (0..r).map(|j| bx.column(j)).collect();
        complete_to_unitary(&lead, m_b)
    } else {
        ComplexMatrix::identity(m_b)
    };

    let mut betas = vec![0.0f64; n];
    for beta in betas.iter_mut().take(r) {
        *beta = 1.0;
    }
    let alpha_max = alphas.iter().copied().fold(0.0, f64::max);
    let degenerate = (r..n).any(|j| alphas[j] <= DEGENERACY_RTOL * alpha_max);
    Ok(BsvResult {
        u,
        v,
        x,
        alphas,
        betas,
        rank_b: r,
        degenerate,
    })
}

/// SVD of the deflated range block: fills its alphas, rotates X's leading
/// columns by W1, and claims U slots for directions with nonzero alphas.
fn finish_range_block(
    c1_defl: &ComplexMatrix,
    r: usize,
    x: &mut ComplexMatrix,
    alphas: &mut [f64],
    u_slots: &mut [Option<Vec<Complex64>>],
) -> Result<()> {
    let dec1 = svd(c1_defl)?;
    let s1_max = dec1.sigma.first().copied().unwrap_or(0.0);
    let r1 = dec1
        .sigma
        .iter()
        .take_while(|&&s| s > RANK_RTOL * s1_max && s > 0.0)
        .count();
    for (j, &s1) in dec1.sigma.iter().enumerate() {
        alphas[j] = s1;
        if j < r1 {
            u_slots[j] = Some(dec1.u.column(j));
        }
    }
    let x_range = ComplexMatrix::from_fn(x.rows(), r, |i, j| x[(i, j)]);
    let x_range_rot = &x_range * &dec1.v;
    for j in 0..r {
        x.set_column(j, &x_range_rot.column(j));
    }
    Ok(())
}

/// The B-singular value set of `(a, b)`: either the finite descending list
/// or the degenerate "all nonnegative reals" answer.
pub fn b_singular_values(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<BsvValues> {
    let dec = bsv(a, b)?;
    if dec.degenerate {
        return Ok(BsvValues::AllNonnegative);
    }
    let vals: Vec<f64> = (0..dec.rank_b)
        .map(|i| dec.alphas[i] / dec.betas[i])
        .collect();
    Ok(BsvValues::Values(vals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{op_norm, sigma_min};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag_real(vals: &[f64]) -> ComplexMatrix {
        let d: Vec<Complex64> = vals.iter().map(|&v| c(v, 0.0)).collect();
        ComplexMatrix::from_diag(&d)
    }

    fn is_unitary(q: &ComplexMatrix, tol: f64) -> bool {
        (&(&q.adjoint() * q) - &ComplexMatrix::identity(q.cols())).max_abs() < tol
    }

    fn check_bsv_reconstruction(a: &ComplexMatrix, b: &ComplexMatrix, dec: &BsvResult) {
        let n = a.cols();
        let scale_a = op_norm(a).unwrap() * op_norm(&dec.x).unwrap() + 1.0;
        let scale_b = op_norm(b).unwrap() * op_norm(&dec.x).unwrap() + 1.0;
        let uax = &(&dec.u.adjoint() * a) * &dec.x;
        let vbx = &(&dec.v.adjoint() * b) * &dec.x;
        for i in 0..uax.rows() {
            for j in 0..n {
                let want_a = if i == j { c(dec.alphas[j], 0.0) } else { Complex64::ZERO };
                assert!(
                    (uax[(i, j)] - want_a).norm() <= 1e-8 * scale_a,
                    "U^H A X mismatch at ({i},{j})"
                );
            }
        }
        for i in 0..vbx.rows() {
            for j in 0..n {
                let want_b = if i == j { c(dec.betas[j], 0.0) } else { Complex64::ZERO };
                assert!(
                    (vbx[(i, j)] - want_b).norm() <= 1e-8 * scale_b,
                    "V^H B X mismatch at ({i},{j})"
                );
            }
        }
        assert!(is_unitary(&dec.u, 1e-10));
        assert!(is_unitary(&dec.v, 1e-10));
        assert!(sigma_min(&dec.x).unwrap() > 0.0);
        for w in dec.betas.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    // -- (S, T)-singular values -------------------------------------------

    #[test]
    fn stsvd_identity_with_scaled_s() {
        let a = ComplexMatrix::identity(2);
        let s = diag_real(&[4.0, 4.0]);
        let t = ComplexMatrix::identity(2);
        let st = st_singular_values(&a, &s, &t).unwrap();
        assert!((st.mus[0] - 2.0).abs() < 1e-13);
        assert!((st.mus[1] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn stsvd_reduces_to_svd_for_identity_weights() {
        let a = ComplexMatrix::from_rows(&[
            &[c(1.0, 1.0), c(2.0, 0.0)],
            &[c(0.0, -1.0), c(1.0, 0.0)],
            &[c(3.0, 0.0), c(0.0, 2.0)],
        ]);
        let st =
            st_singular_values(&a, &ComplexMatrix::identity(3), &ComplexMatrix::identity(2))
                .unwrap();
        let plain = svd(&a).unwrap();
        for (m, s) in st.mus.iter().zip(&plain.sigma) {
            assert!((m - s).abs() < 1e-12);
        }
    }

    #[test]
    fn stsvd_diagonal_weights_cancel() {
        let a = diag_real(&[3.0, 1.0]);
        let s = ComplexMatrix::identity(2);
        let t = diag_real(&[9.0, 1.0]);
        let st = st_singular_values(&a, &s, &t).unwrap();
        assert!((st.mus[0] - 1.0).abs() < 1e-13);
        assert!((st.mus[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn stsvd_factors_satisfy_weighted_unitarity() {
        let a = ComplexMatrix::from_rows(&[
            &[c(1.0, 0.5), c(0.0, 2.0)],
            &[c(2.0, 0.0), c(1.0, -1.0)],
            &[c(0.0, 1.0), c(3.0, 0.0)],
        ]);
        let s = ComplexMatrix::from_rows(&[
            &[c(4.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            &[c(1.0, 0.0), c(3.0, 0.0), c(0.0, 1.0)],
            &[c(0.0, 0.0), c(0.0, -1.0), c(5.0, 0.0)],
        ]);
        let t = ComplexMatrix::from_rows(&[
            &[c(2.0, 0.0), c(0.0, 0.5)],
            &[c(0.0, -0.5), c(1.0, 0.0)],
        ]);
        let st = st_singular_values(&a, &s, &t).unwrap();
        let usu = &(&st.u.adjoint() * &s) * &st.u;
        let vtv = &(&st.v.adjoint() * &t) * &st.v;
        assert!((&usu - &ComplexMatrix::identity(3)).max_abs() < 1e-8);
        assert!((&vtv - &ComplexMatrix::identity(2)).max_abs() < 1e-8);
        // A V = U diag(mus)
        let av = &a * &st.v;
        let mut d = ComplexMatrix::zeros(3, 2);
        d[(0, 0)] = c(st.mus[0], 0.0);
        d[(1, 1)] = c(st.mus[1], 0.0);
        let ud = &st.u * &d;
        assert!((&av - &ud).max_abs() <= 1e-8 * (op_norm(&a).unwrap() + 1.0));
        // descending
        assert!(st.mus[0] >= st.mus[1]);
    }

    #[test]
    fn stsvd_scales_linearly() {
        let a = ComplexMatrix::from_rows(&[
            &[c(1.0, 2.0), c(0.0, 1.0)],
            &[c(2.0, 0.0), c(1.0, 1.0)],
        ]);
        let s = diag_real(&[2.0, 5.0]);
        let t = diag_real(&[1.0, 3.0]);
        let base = st_singular_values(&a, &s, &t).unwrap();
        for scalar in [c(2.0, 0.0), c(1.0, 1.0)] {
            let scaled = st_singular_values(&a.scale(scalar), &s, &t).unwrap();
            for (ms, mb) in scaled.mus.iter().zip(&base.mus) {
                assert!((ms - scalar.norm() * mb).abs() < 1e-10 * (1.0 + mb));
            }
        }
    }

    // -- B-singular values ---------------------------------------------------

    #[test]
    fn bsv_diagonal_pair() {
        let a = diag_real(&[3.0, 8.0]);
        let b = diag_real(&[1.0, 2.0]);
        let dec = bsv(&a, &b).unwrap();
        assert!(!dec.degenerate);
        assert_eq!(dec.rank_b, 2);
        check_bsv_reconstruction(&a, &b, &dec);
        match b_singular_values(&a, &b).unwrap() {
            BsvValues::Values(v) => {
                assert!((v[0] - 4.0).abs() < 1e-12);
                assert!((v[1] - 3.0).abs() < 1e-12);
            }
            BsvValues::AllNonnegative => panic!("unexpected degenerate answer"),
        }
    }

    #[test]
    fn bsv_identity_b_reduces_to_svd() {
        let a = ComplexMatrix::from_rows(&[
            &[c(1.0, 1.0), c(0.0, 2.0)],
            &[c(2.0, 0.0), c(1.0, 0.0)],
            &[c(0.0, 0.0), c(0.0, 1.0)],
        ]);
        let b = ComplexMatrix::identity(2);
        let vals = match b_singular_values(&a, &b).unwrap() {
            BsvValues::Values(v) => v,
            BsvValues::AllNonnegative => panic!("unexpected degenerate answer"),
        };
        let plain = svd(&a).unwrap();
        for (v, s) in vals.iter().zip(&plain.sigma) {
            assert!((v - s).abs() < 1e-10);
        }
    }

    #[test]
    fn bsv_rectangular_a_against_determinant_roots() {
        let a = ComplexMatrix::from_rows(&[
            &[c(1.0, 0.0), c(0.0, 0.0)],
            &[c(0.0, 0.0), c(1.0, 0.0)],
            &[c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        let b = diag_real(&[2.0, 5.0]);
        let vals = match b_singular_values(&a, &b).unwrap() {
            BsvValues::Values(v) => v,
            BsvValues::AllNonnegative => panic!("unexpected degenerate answer"),
        };
        assert!((vals[0] - 0.5).abs() < 1e-12);
        assert!((vals[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn bsv_shared_null_column_is_degenerate() {
        let a = diag_real(&[1.0, 0.0]);
        let b = diag_real(&[1.0, 0.0]);
        let dec = bsv(&a, &b).unwrap();
        assert!(dec.degenerate);
        assert_eq!(dec.rank_b, 1);
        check_bsv_reconstruction(&a, &b, &dec);
        assert_eq!(
            b_singular_values(&a, &b).unwrap(),
            BsvValues::AllNonnegative
        );
    }

    #[test]
    fn bsv_rank_deficient_b_nondegenerate() {
        // b has rank 2 on 3 columns; a is full rank, so no alpha in the null
        // block vanishes and the finite value set has two members.
        let a = ComplexMatrix::from_rows(&[
            &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0)],
            &[c(0.0, 1.0), c(1.0, 0.0), c(3.0, 0.0)],
            &[c(2.0, 0.0), c(0.0, 0.0), c(1.0, 1.0)],
            &[c(0.0, 0.0), c(1.0, 1.0), c(0.0, 0.0)],
        ]);
        let b = ComplexMatrix::from_rows(&[
            &[c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            &[c(0.0, 0.0), c(3.0, 0.0), c(0.0, 1.0)],
        ]);
        let dec = bsv(&a, &b).unwrap();
        assert_eq!(dec.rank_b, 2);
        assert!(!dec.degenerate);
        check_bsv_reconstruction(&a, &b, &dec);
        // each finite value mu solves det(A^H A - mu^2 B^H B) = 0
        let aa = &a.adjoint() * &a;
        let bb = &b.adjoint() * &b;
        let vals = match b_singular_values(&a, &b).unwrap() {
            BsvValues::Values(v) => v,
            BsvValues::AllNonnegative => panic!("unexpected degenerate answer"),
        };
        assert_eq!(vals.len(), 2);
        for mu in vals {
            let pencil = &aa - &bb.scale(c(mu * mu, 0.0));
            let s = sigma_min(&pencil).unwrap();
            assert!(
                s <= 1e-8 * op_norm(&aa).unwrap(),
                "mu = {mu} is not a determinant root, sigma_min = {s}"
            );
        }
    }

    #[test]
    fn bsv_zero_b_gives_empty_value_set_for_full_rank_a() {
        let a = diag_real(&[2.0, 1.0]);
        let b = ComplexMatrix::zeros(2, 2);
        let dec = bsv(&a, &b).unwrap();
        assert_eq!(dec.rank_b, 0);
        assert!(!dec.degenerate);
        check_bsv_reconstruction(&a, &b, &dec);
        match b_singular_values(&a, &b).unwrap() {
            BsvValues::Values(v) => assert!(v.is_empty()),
            BsvValues::AllNonnegative => panic!("unexpected degenerate answer"),
        }
    }
}
