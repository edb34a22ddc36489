//! Built-in test problems: Jordan blocks, random normal matrices with a
//! prescribed spectrum, and a discretized advection-diffusion pencil.

use crate::error::Error;
use crate::matrix::ComplexMatrix;
use crate::pseudospectra::PencilProblem;
use crate::Result;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Symbolic description of a built-in problem, precise enough to rebuild it
/// bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Jordan { n: usize, lambda: Complex64 },
    NormalFromSpectrum { lambdas: Vec<Complex64>, seed: u64 },
    FemAdvectionDiffusion { n: usize, c: f64, nu: f64 },
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Jordan { .. } => "jordan",
            ProblemSpec::NormalFromSpectrum { .. } => "normal",
            ProblemSpec::FemAdvectionDiffusion { .. } => "fem",
        }
    }

    pub fn build(&self) -> Result<PencilProblem> {
        match self {
            ProblemSpec::Jordan { n, lambda } => jordan(*n, *lambda),
            ProblemSpec::NormalFromSpectrum { lambdas, seed } => {
                normal_from_spectrum(lambdas, *seed)
            }
            ProblemSpec::FemAdvectionDiffusion { n, c, nu } => {
                fem_advection_diffusion(*n, *c, *nu)
            }
        }
    }
}

/// Single Jordan block of order `n` with eigenvalue `lambda`, as a standard
/// problem.
pub fn jordan(n: usize, lambda: Complex64) -> Result<PencilProblem> {
    if n == 0 {
        return Err(Error::invalid("jordan block needs n >= 1"));
    }
    if !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::invalid("jordan eigenvalue must be finite"));
    }
    let a = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            lambda
        } else if j == i + 1 {
            Complex64::ONE
        } else {
            Complex64::ZERO
        }
    });
    PencilProblem::standard(a)
}

/// Random normal matrix `Q diag(lambdas) Q^H` with Haar-distributed unitary
/// `Q` drawn deterministically from `seed`, as a standard problem.
pub fn normal_from_spectrum(lambdas: &[Complex64], seed: u64) -> Result<PencilProblem> {
    if lambdas.is_empty() {
        return Err(Error::invalid("spectrum must be nonempty"));
    }
    if lambdas
        .iter()
        .any(|l| !l.re.is_finite() || !l.im.is_finite())
    {
        return Err(Error::invalid("spectrum entries must be finite"));
    }
    let n = lambdas.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<Complex64> = (0..n * n)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let g = ComplexMatrix::new(n, n, data).expect("gaussian entries are finite");
    let (mut q, r) = crate::numcore::qr(&g)?;
    // Absorbing the phases of R's diagonal into Q makes the factor Haar
    // distributed rather than merely orthonormal.
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| q[(i, j)] * lambdas[j]);
    let a = &scaled * &q.adjoint();
    PencilProblem::standard(a)
}

/// Mass and stiffness pencil of a 1-D advection-diffusion operator
/// `nu u'' - c u'` on `(0, 1)` with zero boundary values, discretized with
/// `n` piecewise-linear elements on a uniform interior grid.
///
/// Returns the generalized problem `(A, M)` with `A = -nu K + c C` for the
/// stiffness matrix `K`, the skew-symmetric advection matrix `C`, and the
/// tridiagonal mass matrix `M`.
pub fn fem_advection_diffusion(n: usize, c: f64, nu: f64) -> Result<PencilProblem> {
    if n < 2 {
        return Err(Error::invalid("discretization needs n >= 2"));
    }
    if !c.is_finite() || !nu.is_finite() || nu <= 0.0 {
        return Err(Error::invalid("need finite c and nu > 0"));
    }
    let h = 1.0 / (n + 1) as f64;
    let real = |v: f64| Complex64::new(v, 0.0);
    let m = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            real(4.0 * h / 6.0)
        } else if i.abs_diff(j) == 1 {
            real(h / 6.0)
        } else {
            Complex64::ZERO
        }
    });
    let a = ComplexMatrix::from_fn(n, n, |i, j| {
        let k_part = if i == j {
            2.0 / h
        } else if i.abs_diff(j) == 1 {
            -1.0 / h
        } else {
            0.0
        };
        let c_part = if j == i + 1 {
            0.5
        } else if i == j + 1 {
            -0.5
        } else {
            0.0
        };
        real(-nu * k_part + c * c_part)
    });
    PencilProblem::generalized(a, m)
}
