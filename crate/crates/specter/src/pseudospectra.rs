//! Epsilon-pseudospectra of matrix pencils: pointwise evaluation, grid
//! sweeps, optimal rank-one perturbations, random perturbation scatter
//! sampling, the coupled two-matrix perturbation split, and the stability
//! radius along the imaginary axis.

use crate::error::Error;
use crate::matrix::{outer, vec_dot, vec_norm2, ComplexMatrix};
use crate::numcore::{
    cholesky_upper, eig_dense, singular_values, svd, CholeskyFactor, EigenPairs,
};
use crate::Result;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Relative threshold below which `M` counts as numerically singular and the
/// weighted mode switches to its fallback normalization.
const SINGULAR_M_RTOL: f64 = 1e-13;

/// Which pseudospectrum definition a computation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `sigma_min(A - zI)`; requires the pencil to be standard (`M = I`).
    Standard,
    /// `sigma_min(F^{-H} (A - zM) F^{-1})` with `M = F^H F`.
    Generalized,
    /// `sigma_min(A - zM)` rescaled so the result is comparable with the
    /// perturbation size epsilon of the M-weighted definition.
    Weighted,
}

/// How random perturbations are drawn in [`perturbation_scatter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Dense matrix with i.i.d. complex-normal entries, scaled to norm one.
    Full,
    /// Rank-one `v2 v1^H` with both vectors uniform on the unit sphere.
    Rank1,
    /// Rank-one residual perturbation built from a random vector's Rayleigh
    /// quotient, rescaled to norm one.
    Residual,
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    /// Validates ordering and finiteness. Degenerate (zero-width) regions
    /// are allowed; they pin the corresponding coordinate.
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let vals = [re_min, re_max, im_min, im_max];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("region bounds must be finite"));
        }
        if re_min > re_max || im_min > im_max {
            return Err(Error::invalid(format!(
                "region is not well ordered: [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Region {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }
}

/// A pencil `(A, M)` with Hermitian positive definite `M`, together with the
/// cached Cholesky factor `F` (`F^H F = M`) and the extreme singular values
/// of `M` used by the weighted mode.
#[derive(Debug, Clone)]
pub struct PencilProblem {
    a: ComplexMatrix,
    m: ComplexMatrix,
    f: CholeskyFactor,
    standard: bool,
    m_sigma_max: f64,
    m_sigma_min: f64,
    weighted_scale: f64,
}

impl PencilProblem {
    /// Standard problem, `M = I`.
    pub fn standard(a: ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::shape(format!(
                "problem matrix must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let m = ComplexMatrix::identity(a.rows());
        Self::generalized(a, m)
    }

    /// Generalized problem with HPD mass matrix `m`. An identity `m` is
    /// recognized and the problem behaves as standard.
    pub fn generalized(a: ComplexMatrix, m: ComplexMatrix) -> Result<Self> {
        if !a.is_square() || !m.is_square() || a.rows() != m.rows() {
            return Err(Error::shape(format!(
                "pencil needs square matrices of equal order, got {}x{} and {}x{}",
                a.rows(),
                a.cols(),
                m.rows(),
                m.cols()
            )));
        }
        let f = cholesky_upper(&m)?;
        let standard = m.is_identity();
        let sv = singular_values(&m)?;
        let m_sigma_max = sv[0];
        let m_sigma_min = *sv.last().expect("square matrix has singular values");
        // Weighted mode reports sigma_min(A - zM) in units of the epsilon of
        // the M-weighted definition. When M is numerically singular the
        // primary normalization degenerates and the fallback divides by
        // ||M|| alone.
        let weighted_scale = if m_sigma_min <= SINGULAR_M_RTOL * m_sigma_max {
            1.0 / m_sigma_max
        } else {
            1.0 / (m_sigma_min * m_sigma_max).sqrt()
        };
        Ok(PencilProblem {
            a,
            m,
            f,
            standard,
            m_sigma_max,
            m_sigma_min,
            weighted_scale,
        })
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn m(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn cholesky(&self) -> &CholeskyFactor {
        &self.f
    }

    pub fn size(&self) -> usize {
        self.a.rows()
    }

    pub fn is_standard(&self) -> bool {
        self.standard
    }

    pub fn m_sigma_max(&self) -> f64 {
        self.m_sigma_max
    }

    pub fn m_sigma_min(&self) -> f64 {
        self.m_sigma_min
    }

    /// Eigenvalues of the pencil, sorted lexicographically.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        self.eigenvalues_of(&self.a)
    }

    /// Full eigenpairs of the pencil with unit-M-norm vectors.
    pub fn eigenpairs(&self) -> Result<EigenPairs> {
        crate::numcore::geneig(&self.a, &self.m)
    }

    /// Eigenvalues of the pencil `(a_mod, M)` for a perturbed matrix, via
    /// the cached Cholesky reduction.
    fn eigenvalues_of(&self, a_mod: &ComplexMatrix) -> Result<Vec<Complex64>> {
        let reduced = self.f.reduce(a_mod);
        Ok(eig_dense(&reduced, false)?.lambdas)
    }

    /// `A - zM`.
    fn shifted(&self, z: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.size(), self.size(), |i, j| {
            self.a[(i, j)] - z * self.m[(i, j)]
        })
    }
}

fn check_z(z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::invalid("evaluation point must be finite"));
    }
    Ok(())
}

fn require_standard(p: &PencilProblem) -> Result<()> {
    if !p.is_standard() {
        return Err(Error::ModeMismatch {
            context: "standard mode needs an identity mass matrix".into(),
        });
    }
    Ok(())
}

/// Distance-to-pseudospectrum function: the value epsilon for which `z`
/// first enters the epsilon-pseudospectrum in the chosen definition.
pub fn eps_b(p: &PencilProblem, z: Complex64, mode: Mode) -> Result<f64> {
    check_z(z)?;
    match mode {
        Mode::Standard => {
            require_standard(p)?;
            crate::numcore::sigma_min(&p.shifted(z))
        }
        Mode::Generalized => {
            let reduced = p.f.reduce(&p.shifted(z));
            crate::numcore::sigma_min(&reduced)
        }
        Mode::Weighted => {
            let s = crate::numcore::sigma_min(&p.shifted(z))?;
            Ok(s * p.weighted_scale)
        }
    }
}

/// Rectangular sweep of [`eps_b`] values, row major: row `j` fixes the
/// imaginary part, column `k` the real part.
#[derive(Debug, Clone)]
pub struct PseudospectrumGrid {
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
    pub mode: Mode,
    pub values: Vec<f64>,
}

impl PseudospectrumGrid {
    /// Lattice point for row `j`, column `k`.
    pub fn point(&self, j: usize, k: usize) -> Complex64 {
        assert!(j < self.ny && k < self.nx, "grid index out of range");
        let dre = if self.nx > 1 {
            (self.region.re_max - self.region.re_min) / (self.nx - 1) as f64
        } else {
            0.0
        };
        let dim = if self.ny > 1 {
            (self.region.im_max - self.region.im_min) / (self.ny - 1) as f64
        } else {
            0.0
        };
        Complex64::new(
            self.region.re_min + k as f64 * dre,
            self.region.im_min + j as f64 * dim,
        )
    }

    pub fn value(&self, j: usize, k: usize) -> f64 {
        assert!(j < self.ny && k < self.nx, "grid index out of range");
        self.values[j * self.nx + k]
    }
}

/// Evaluates [`eps_b`] over an `nx` by `ny` lattice covering `region`.
pub fn grid(
    p: &PencilProblem,
    region: Region,
    nx: usize,
    ny: usize,
    mode: Mode,
) -> Result<PseudospectrumGrid> {
    if nx == 0 || ny == 0 {
        return Err(Error::invalid("grid needs nx, ny >= 1"));
    }
    let mut out = PseudospectrumGrid {
        region,
        nx,
        ny,
        mode,
        values: Vec::with_capacity(nx * ny),
    };
    for j in 0..ny {
        for k in 0..nx {
            let z = out.point(j, k);
            out.values.push(eps_b(p, z, mode)?);
        }
    }
    Ok(out)
}

/// Smallest perturbation that moves an eigenvalue of the pencil exactly to
/// `z`, together with its size in the norm the mode measures.
///
/// The perturbation is rank one. In standard mode it is
/// `-(Av - zv) v^H` for the minimizing right singular vector `v` and its
/// spectral norm equals `eps_b(p, z, Standard)`. In generalized mode the
/// construction is pushed through the Cholesky change of variables: with
/// `u = F^{-1} v~` and `w = Mu` the perturbation `-(Au - zMu) w^H` has
/// M-weighted norm `eps_b(p, z, Generalized)`. Weighted mode measures the
/// same Euclidean construction as standard but against the pencil, and the
/// returned epsilon is in the weighted definition's units.
pub fn optimal_perturbation(
    p: &PencilProblem,
    z: Complex64,
    mode: Mode,
) -> Result<(ComplexMatrix, f64)> {
    check_z(z)?;
    let n = p.size();
    match mode {
        Mode::Standard => {
            require_standard(p)?;
            let dec = svd(&p.shifted(z))?;
            let sig = dec.sigma[n - 1];
            let u_min = dec.u.column(n - 1);
            let v_min = dec.v.column(n - 1);
            let e = outer(&u_min, &v_min).scale(Complex64::new(-sig, 0.0));
            Ok((e, sig))
        }
        Mode::Generalized => {
            let reduced = p.f.reduce(&p.shifted(z));
            let dec = svd(&reduced)?;
            let sig = dec.sigma[n - 1];
            let u_tilde = dec.u.column(n - 1);
            let v_tilde = dec.v.column(n - 1);
            // A u - z M u = F^H (reduced v~) = sig F^H u~, and w = M u = F^H v~.
            let fh = p.f.matrix().adjoint();
            let left = fh.mul_vec(&u_tilde);
            let w = fh.mul_vec(&v_tilde);
            let e = outer(&left, &w).scale(Complex64::new(-sig, 0.0));
            Ok((e, sig))
        }
        Mode::Weighted => {
            let dec = svd(&p.shifted(z))?;
            let sig = dec.sigma[n - 1];
            let u_min = dec.u.column(n - 1);
            let v_min = dec.v.column(n - 1);
            let e = outer(&u_min, &v_min).scale(Complex64::new(-sig, 0.0));
            Ok((e, sig * p.weighted_scale))
        }
    }
}

/// Eigenvalue cloud of randomly perturbed problems.
#[derive(Debug, Clone)]
pub struct ScatterSample {
    /// Concatenated eigenvalues, `count` blocks of `n` in draw order.
    pub eigenvalues: Vec<Complex64>,
    pub epsilon: f64,
    pub strategy: Strategy,
    pub seed: u64,
    pub count: usize,
}

fn substream(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect()
}

fn unit_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    loop {
        let mut v = gaussian_vec(rng, n);
        let nrm = vec_norm2(&v);
        if nrm > 0.0 {
            for x in v.iter_mut() {
                *x /= nrm;
            }
            return v;
        }
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let data = gaussian_vec(rng, n * n);
    ComplexMatrix::new(n, n, data).expect("gaussian entries are finite")
}

/// Unit-norm perturbation direction for one draw, in the coordinates where
/// the problem is standard (`op` is the matrix whose Rayleigh residual the
/// residual strategy uses).
fn draw_direction(
    rng: &mut ChaCha8Rng,
    op: &ComplexMatrix,
    strategy: Strategy,
) -> Result<ComplexMatrix> {
    let n = op.rows();
    match strategy {
        Strategy::Full => {
            let g = gaussian_matrix(rng, n);
            let nrm = crate::numcore::op_norm(&g)?;
            Ok(g.scale(Complex64::new(1.0 / nrm, 0.0)))
        }
        Strategy::Rank1 => {
            let v1 = unit_vec(rng, n);
            let v2 = unit_vec(rng, n);
            Ok(outer(&v2, &v1))
        }
        Strategy::Residual => {
            let v = unit_vec(rng, n);
            let av = op.mul_vec(&v);
            let z = vec_dot(&v, &av);
            let r: Vec<Complex64> = av.iter().zip(&v).map(|(a, x)| a - z * x).collect();
            let nrm = vec_norm2(&r);
            if nrm == 0.0 {
                // v is an exact eigenvector; there is no residual direction
                return Ok(ComplexMatrix::zeros(n, n));
            }
            Ok(outer(&r, &v).scale(Complex64::new(-1.0 / nrm, 0.0)))
        }
    }
}

/// Samples the epsilon-pseudospectrum by perturbing the problem `n_pert`
/// times with perturbations of size exactly `epsilon` in the norm the mode
/// measures, collecting all pencil eigenvalues.
///
/// Draw `k` uses its own counter-derived random substream, so the result is
/// independent of evaluation order and reproducible from `(seed, k)`.
pub fn perturbation_scatter(
    p: &PencilProblem,
    epsilon: f64,
    n_pert: usize,
    seed: u64,
    strategy: Strategy,
    mode: Mode,
) -> Result<ScatterSample> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid("epsilon must be finite and nonnegative"));
    }
    if n_pert == 0 {
        return Err(Error::invalid("need at least one perturbation"));
    }
    if mode == Mode::Standard {
        require_standard(p)?;
    }
    let n = p.size();
    let mut eigenvalues = Vec::with_capacity(n_pert * n);

    // Directions are drawn where the measuring norm is Euclidean: for the
    // generalized mode that is the Cholesky-reduced space, and E~ maps back
    // as F^H E~ F, which preserves the M-weighted norm. The weighted mode
    // measures perturbations in the plain spectral norm but against the
    // pencil, with epsilon converted from the weighted definition's units.
    let reduced_a = match mode {
        Mode::Generalized => Some(p.f.reduce(&p.a)),
        _ => None,
    };
    let residual_op = reduced_a.as_ref().unwrap_or(&p.a);
    let eps_applied = match mode {
        Mode::Weighted => epsilon / p.weighted_scale,
        _ => epsilon,
    };

    for k in 0..n_pert {
        let mut rng = substream(seed, k);
        let dir = match (mode, strategy) {
            // the weighted residual uses the pencil Rayleigh quotient, not A's
            (Mode::Weighted, Strategy::Residual) => {
                let v = unit_vec(&mut rng, n);
                let av = p.a.mul_vec(&v);
                let mv = p.m.mul_vec(&v);
                let z = vec_dot(&v, &av) / vec_dot(&v, &mv);
                let r: Vec<Complex64> = av.iter().zip(&mv).map(|(a, m)| a - z * m).collect();
                let nrm = vec_norm2(&r);
                if nrm == 0.0 {
                    ComplexMatrix::zeros(n, n)
                } else {
                    outer(&r, &v).scale(Complex64::new(-1.0 / nrm, 0.0))
                }
            }
            _ => draw_direction(&mut rng, residual_op, strategy)?,
        };
        let e = match mode {
            Mode::Generalized => {
                let fh = p.f.matrix().adjoint();
                &(&fh * &dir) * p.f.matrix()
            }
            _ => dir,
        };
        let perturbed = ComplexMatrix::from_fn(n, n, |i, j| {
            p.a[(i, j)] + Complex64::new(eps_applied, 0.0) * e[(i, j)]
        });
        eigenvalues.extend(p.eigenvalues_of(&perturbed)?);
    }
    Ok(ScatterSample {
        eigenvalues,
        epsilon,
        strategy,
        seed,
        count: n_pert,
    })
}

/// The coupled perturbation pair that moves an eigenvalue to `z` while
/// spreading the budget over both pencil matrices.
#[derive(Debug, Clone)]
pub struct TwoNormSplit {
    pub e1: ComplexMatrix,
    pub e2: ComplexMatrix,
    /// `sigma_min(A - zM) / sqrt(1 + |z|^2)`, the combined budget
    /// `sqrt(||E1||^2 + ||E2||^2)`.
    pub eps_crit: f64,
    /// Whether `M + E2` is still Hermitian positive definite. Not
    /// guaranteed by the construction.
    pub m_perturbed_pd: bool,
}

/// Splits the optimal single-matrix perturbation for the pencil across
/// `(A, M)`: `E1 = E / (1+|z|^2)` perturbs `A`, `E2 = -conj(z) E / (1+|z|^2)`
/// perturbs `M`, and `z` becomes an eigenvalue of `(A+E1, M+E2)`.
pub fn two_norm_split(p: &PencilProblem, z: Complex64) -> Result<TwoNormSplit> {
    check_z(z)?;
    let n = p.size();
    let dec = svd(&p.shifted(z))?;
    let sig = dec.sigma[n - 1];
    let u_min = dec.u.column(n - 1);
    let v_min = dec.v.column(n - 1);
    let e = outer(&u_min, &v_min).scale(Complex64::new(-sig, 0.0));
    let denom = 1.0 + z.norm_sqr();
    let e1 = e.scale(Complex64::new(1.0 / denom, 0.0));
    let e2 = e.scale(-z.conj() / denom);
    let m2 = &p.m + &e2;
    let m_perturbed_pd =
        m2.hermitian_defect() <= crate::numcore::HERMITIAN_RTOL && cholesky_upper(&m2).is_ok();
    Ok(TwoNormSplit {
        e1,
        e2,
        eps_crit: sig / denom.sqrt(),
        m_perturbed_pd,
    })
}

/// Result of the imaginary-axis scan for the distance to instability.
#[derive(Debug, Clone, Copy)]
pub struct StabilityReport {
    pub radius: f64,
    /// Frequency `y` achieving the reported minimum of `eps_b(iy)`.
    pub argmin_y: f64,
    /// Always false for this scan-based optimizer: the minimum is found by
    /// coarse sampling plus local refinement, not a certified global method.
    pub global_guarantee: bool,
}

const GOLDEN_INV: f64 = 0.6180339887498949;

fn golden_min(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let mut x1 = b - GOLDEN_INV * (b - a);
    let mut x2 = a + GOLDEN_INV * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN_INV * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN_INV * (b - a);
            f2 = f(x2)?;
        }
    }
    let y = 0.5 * (a + b);
    Ok((y, f(y)?))
}

/// Distance to instability: the infimum of `eps_b(p, iy, mode)` over real
/// frequencies `y`, located by a bracketed coarse scan with golden-section
/// refinement around every local minimum.
///
/// A pencil that already has an eigenvalue with nonnegative real part gets
/// radius zero, with `argmin_y` at that eigenvalue's imaginary part.
pub fn stability_radius(p: &PencilProblem, mode: Mode) -> Result<StabilityReport> {
    let lambdas = p.eigenvalues()?;
    let worst = lambdas
        .iter()
        .copied()
        .max_by(|a, b| a.re.total_cmp(&b.re))
        .expect("pencil has at least one eigenvalue");
    if worst.re >= 0.0 {
        return Ok(StabilityReport {
            radius: 0.0,
            argmin_y: worst.im,
            global_guarantee: false,
        });
    }

    // sigma_min(A - iyM) >= |y| sigma_min(M) - ||A|| in every mode's scaling,
    // so once |y| passes 2||A|| / sigma_min(M) the value exceeds the one at
    // y = 0 and the axis minimum must lie inside the guarded bracket.
    let im_lo = lambdas.iter().map(|l| l.im).fold(f64::INFINITY, f64::min);
    let im_hi = lambdas
        .iter()
        .map(|l| l.im)
        .fold(f64::NEG_INFINITY, f64::max);
    let guard = 2.0 * crate::numcore::op_norm(&p.a)? / p.m_sigma_min + 1.0;
    let s = (im_hi - im_lo) + guard;
    let lo = im_lo - s;
    let hi = im_hi + s;

    const COARSE_POINTS: usize = 2049;
    let step = (hi - lo) / (COARSE_POINTS - 1) as f64;
    let eval = |y: f64| eps_b(p, Complex64::new(0.0, y), mode);
    let mut coarse = Vec::with_capacity(COARSE_POINTS);
    for i in 0..COARSE_POINTS {
        coarse.push(eval(lo + i as f64 * step)?);
    }

    let scale = lo.abs().max(hi.abs()).max(1.0);
    let tol = 1e-10 * scale;
    let mut best_val = f64::INFINITY;
    let mut best_y = 0.0;
    for i in 0..COARSE_POINTS {
        let left_ok = i == 0 || coarse[i] <= coarse[i - 1];
        let right_ok = i == COARSE_POINTS - 1 || coarse[i] <= coarse[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let a = lo + (i.saturating_sub(1)) as f64 * step;
        let b = lo + ((i + 1).min(COARSE_POINTS - 1)) as f64 * step;
        let (y, v) = golden_min(eval, a, b, tol)?;
        if v < best_val {
            best_val = v;
            best_y = y;
        }
    }
    Ok(StabilityReport {
        radius: best_val,
        argmin_y: best_y,
        global_guarantee: false,
    })
}
