//! Transient behaviour of `M du/dt = A u`: the numerical range of the
//! pencil, and the maximum energy growth factor over initial conditions,
//! computed through a modal expansion.

use crate::error::Error;
use crate::gsvd::{b_singular_values, BsvValues};
use crate::matrix::{vec_dot, ComplexMatrix};
use crate::numcore::{
    cholesky_upper, expm, geneig, geneig_hermitian, op_norm, singular_values, solve,
    CholeskyFactor,
};
use crate::pseudospectra::PencilProblem;
use crate::Result;
use num_complex::Complex64;

/// Condition number of the modal Gram matrix above which the eigenbasis is
/// treated as numerically defective.
pub const Q0_CONDITION_LIMIT: f64 = 1e12;

/// How a growth factor is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Largest eigenvalue of the pencil `(Q(t), Q(0))` of modal Gram
    /// matrices. Also yields the optimal coefficient vector.
    Eig,
    /// Largest generalized singular value of the scaled modal basis against
    /// the unscaled one, squared.
    Gsvd,
    /// Direct reference: squared largest singular value of the similarity-
    /// transformed matrix exponential. Slowest, no modal expansion.
    Oracle,
}

/// Boundary data of the numerical range `{ e^H A e : e^H M e = 1 }`.
#[derive(Debug, Clone)]
pub struct NumericalRangeBoundary {
    /// Sample angles, equispaced on the half-open interval `[-pi, pi)`.
    pub thetas: Vec<f64>,
    /// Support function values: the largest eigenvalue of the Hermitian part
    /// of `e^{-i theta} A` against `M`.
    pub support_values: Vec<f64>,
    /// Boundary points `e^H A e` at the maximizing vectors.
    pub support_points: Vec<Complex64>,
}

impl NumericalRangeBoundary {
    /// Convex hull of the support points, counterclockwise.
    pub fn hull(&self) -> Vec<Complex64> {
        convex_hull(&self.support_points)
    }
}

fn hermitian_half_sum(x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        out[(k, k)] = Complex64::new(x[(k, k)].re, 0.0);
        for l in k + 1..n {
            let v = 0.5 * (x[(k, l)] + x[(l, k)].conj());
            out[(k, l)] = v;
            out[(l, k)] = v.conj();
        }
    }
    out
}

/// Samples the boundary of the numerical range at `n_theta` equispaced
/// support directions.
pub fn numerical_range(p: &PencilProblem, n_theta: usize) -> Result<NumericalRangeBoundary> {
    if n_theta < 3 {
        return Err(Error::invalid("numerical range needs n_theta >= 3"));
    }
    let n = p.size();
    let mut thetas = Vec::with_capacity(n_theta);
    let mut support_values = Vec::with_capacity(n_theta);
    let mut support_points = Vec::with_capacity(n_theta);
    for j in 0..n_theta {
        let theta = -std::f64::consts::PI
            + j as f64 * (2.0 * std::f64::consts::PI / n_theta as f64);
        let rotated = p.a().scale(Complex64::from_polar(1.0, -theta));
        let h = hermitian_half_sum(&rotated);
        let pairs = geneig_hermitian(&h, p.m())?;
        let lam = pairs.lambdas[n - 1].re;
        let e = pairs
            .vectors
            .as_ref()
            .expect("hermitian solver returns vectors")
            .column(n - 1);
        let z = vec_dot(&e, &p.a().mul_vec(&e));
        thetas.push(theta);
        support_values.push(lam);
        support_points.push(z);
    }
    Ok(NumericalRangeBoundary {
        thetas,
        support_values,
        support_points,
    })
}

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Convex hull of a planar point set, counterclockwise, collinear points
/// dropped. A singleton input yields a single vertex.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup_by(|a, b| a.re == b.re && a.im == b.im);
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Complex64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.is_empty() {
        // every point was collinear with the extremes
        return vec![pts[0], *pts.last().expect("nonempty")];
    }
    lower
}

fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((d.conj() * (p - a)).re / len2).clamp(0.0, 1.0);
    (p - (a + d * Complex64::new(t, 0.0))).norm()
}

/// Euclidean distance from `z` to a convex polygon given counterclockwise;
/// zero inside.
pub fn hull_distance(hull: &[Complex64], z: Complex64) -> f64 {
    assert!(!hull.is_empty(), "hull must have at least one vertex");
    match hull.len() {
        1 => (z - hull[0]).norm(),
        2 => point_segment_distance(z, hull[0], hull[1]),
        n => {
            let inside = (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], z) >= 0.0);
            if inside {
                return 0.0;
            }
            (0..n)
                .map(|i| point_segment_distance(z, hull[i], hull[(i + 1) % n]))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Growth factors along a time grid.
#[derive(Debug, Clone)]
pub struct GrowthCurve {
    pub times: Vec<f64>,
    /// Maximum of `||u(t)||^2 / ||u(0)||^2` over initial conditions, in the
    /// energy norm.
    pub growth: Vec<f64>,
    pub route: Route,
    /// Optimal modal coefficient vectors per time, normalized to unit
    /// initial energy. Only the eigenvalue route produces them.
    pub coefficients: Option<Vec<Vec<Complex64>>>,
}

struct ModalBasis {
    lambdas: Vec<Complex64>,
    vectors: ComplexMatrix,
    gram: ComplexMatrix,
    cond: f64,
}

/// Eigenbasis of the pencil plus the Gram matrix of its vectors in the
/// `energy` inner product, rejected when too ill conditioned to separate
/// modal coefficients.
fn modal_basis(p: &PencilProblem, energy: &ComplexMatrix) -> Result<ModalBasis> {
    let pairs = geneig(p.a(), p.m())?;
    let vectors = pairs.vectors.expect("geneig returns vectors");
    let n = p.size();
    let ne = energy * &vectors;
    let cols: Vec<Vec<Complex64>> = (0..n).map(|j| vectors.column(j)).collect();
    let ne_cols: Vec<Vec<Complex64>> = (0..n).map(|j| ne.column(j)).collect();
    let mut gram = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        gram[(k, k)] = Complex64::new(vec_dot(&cols[k], &ne_cols[k]).re, 0.0);
        for l in k + 1..n {
            let g = vec_dot(&cols[k], &ne_cols[l]);
            gram[(k, l)] = g;
            gram[(l, k)] = g.conj();
        }
    }
    let sv = singular_values(&gram)?;
    let smin = *sv.last().expect("gram has singular values");
    let cond = if smin == 0.0 { f64::INFINITY } else { sv[0] / smin };
    if !(cond <= Q0_CONDITION_LIMIT) {
        return Err(Error::NearDefective { cond });
    }
    Ok(ModalBasis {
        lambdas: pairs.lambdas,
        vectors,
        gram,
        cond,
    })
}

/// `Q(t)`: the Gram matrix of the propagated modes,
/// `Q_kl(t) = Q_kl(0) exp((conj(lambda_k) + lambda_l) t)`.
fn q_of_t(basis: &ModalBasis, t: f64) -> ComplexMatrix {
    let n = basis.lambdas.len();
    let mut q = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let dkk = basis.gram[(k, k)].re * (2.0 * basis.lambdas[k].re * t).exp();
        q[(k, k)] = Complex64::new(dkk, 0.0);
        for l in k + 1..n {
            let factor = ((basis.lambdas[k].conj() + basis.lambdas[l]) * t).exp();
            let v = basis.gram[(k, l)] * factor;
            q[(k, l)] = v;
            q[(l, k)] = v.conj();
        }
    }
    q
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid("time must be finite and nonnegative"));
    }
    Ok(())
}

fn growth_eig_at(basis: &ModalBasis, q0: &ComplexMatrix, t: f64) -> Result<(f64, Vec<Complex64>)> {
    let n = basis.lambdas.len();
    let qt = q_of_t(basis, t);
    let pairs = geneig_hermitian(&qt, q0)?;
    let lam = pairs.lambdas[n - 1].re;
    let coeff = pairs
        .vectors
        .expect("hermitian solver returns vectors")
        .column(n - 1);
    Ok((lam, coeff))
}

fn growth_gsvd_at(f_energy: &CholeskyFactor, basis: &ModalBasis, t: f64) -> Result<f64> {
    let n = basis.lambdas.len();
    let b = f_energy.matrix() * &basis.vectors;
    let a = ComplexMatrix::from_fn(n, n, |i, j| b[(i, j)] * (basis.lambdas[j] * t).exp());
    match b_singular_values(&a, &b)? {
        BsvValues::Values(v) => match v.first() {
            Some(mu) => Ok(mu * mu),
            None => Err(Error::NearDefective { cond: basis.cond }),
        },
        BsvValues::AllNonnegative => Err(Error::NearDefective { cond: basis.cond }),
    }
}

fn growth_oracle_at(
    k_op: &ComplexMatrix,
    f_energy: &CholeskyFactor,
    t: f64,
) -> Result<f64> {
    let propagator = expm(&k_op.scale(Complex64::new(t, 0.0)))?;
    let similar = f_energy.solve_upper_right(&(f_energy.matrix() * &propagator));
    let sigma = op_norm(&similar)?;
    Ok(sigma * sigma)
}

fn propagation_operator(p: &PencilProblem) -> Result<ComplexMatrix> {
    if p.is_standard() {
        Ok(p.a().clone())
    } else {
        solve(p.m(), p.a())
    }
}

/// Maximum energy growth at time `t` through the modal pencil eigenproblem,
/// with the optimal initial coefficient vector.
pub fn growth_factor_eig(p: &PencilProblem, t: f64) -> Result<(f64, Vec<Complex64>)> {
    check_time(t)?;
    let basis = modal_basis(p, p.m())?;
    let q0 = q_of_t(&basis, 0.0);
    growth_eig_at(&basis, &q0, t)
}

/// Maximum energy growth at time `t` through generalized singular values of
/// the propagated modal basis.
pub fn growth_factor_gsvd(p: &PencilProblem, t: f64) -> Result<f64> {
    check_time(t)?;
    let basis = modal_basis(p, p.m())?;
    growth_gsvd_at(p.cholesky(), &basis, t)
}

/// Reference growth factor from the matrix exponential of `M^{-1} A`,
/// bypassing the modal expansion.
pub fn growth_factor_oracle(p: &PencilProblem, t: f64) -> Result<f64> {
    check_time(t)?;
    let k_op = propagation_operator(p)?;
    growth_oracle_at(&k_op, p.cholesky(), t)
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid("time grid must be nonempty"));
    }
    for (i, &t) in times.iter().enumerate() {
        check_time(t)?;
        if i > 0 && t < times[i - 1] {
            return Err(Error::invalid("time grid must be ascending"));
        }
    }
    Ok(())
}

fn curve_impl(
    p: &PencilProblem,
    times: &[f64],
    route: Route,
    energy: &ComplexMatrix,
) -> Result<GrowthCurve> {
    check_times(times)?;
    let mut growth = Vec::with_capacity(times.len());
    let mut coefficients = None;
    match route {
        Route::Eig => {
            let basis = modal_basis(p, energy)?;
            let q0 = q_of_t(&basis, 0.0);
            let mut coeffs = Vec::with_capacity(times.len());
            for &t in times {
                let (g, a) = growth_eig_at(&basis, &q0, t)?;
                growth.push(g);
                coeffs.push(a);
            }
            coefficients = Some(coeffs);
        }
        Route::Gsvd => {
            let basis = modal_basis(p, energy)?;
            let f_energy = cholesky_upper(energy)?;
            for &t in times {
                growth.push(growth_gsvd_at(&f_energy, &basis, t)?);
            }
        }
        Route::Oracle => {
            let k_op = propagation_operator(p)?;
            let f_energy = cholesky_upper(energy)?;
            for &t in times {
                growth.push(growth_oracle_at(&k_op, &f_energy, t)?);
            }
        }
    }
    Ok(GrowthCurve {
        times: times.to_vec(),
        growth,
        route,
        coefficients,
    })
}

/// Growth factors over a time grid, energy measured by `M` itself.
pub fn growth_curve(p: &PencilProblem, times: &[f64], route: Route) -> Result<GrowthCurve> {
    curve_impl(p, times, route, p.m())
}

/// Growth factors over a time grid with the energy measured by an arbitrary
/// Hermitian positive definite matrix `n_mat` instead of `M`. The dynamics
/// stay those of the pencil; only the norm changes.
pub fn growth_curve_with_norm(
    p: &PencilProblem,
    times: &[f64],
    route: Route,
    n_mat: &ComplexMatrix,
) -> Result<GrowthCurve> {
    if !n_mat.is_square() || n_mat.rows() != p.size() {
        return Err(Error::shape(format!(
            "energy matrix must be {0}x{0}, got {1}x{2}",
            p.size(),
            n_mat.rows(),
            n_mat.cols()
        )));
    }
    cholesky_upper(n_mat)?;
    curve_impl(p, times, route, n_mat)
}
