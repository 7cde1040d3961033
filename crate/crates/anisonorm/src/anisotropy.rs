//! Entropy-theoretic anisotropy of zero-mean Gaussian random vectors.
//!
//! The anisotropy of a random vector is its minimum relative entropy to
//! the family of zero-mean Gaussian laws with scalar covariance. For
//! Gaussian vectors every quantity here is closed-form in the covariance
//! matrix; non-Gaussian laws enter only through a caller-supplied
//! differential entropy.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Zero-mean Gaussian law identified by its covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLaw<T: Scalar> {
    covariance: DMatrix<T>,
}

impl<T: Scalar> GaussianLaw<T> {
    /// Wraps a covariance matrix, requiring symmetry (within `1e-12`
    /// relative) and positive definiteness.
    pub fn new(covariance: DMatrix<T>) -> Result<Self> {
        if covariance.nrows() != covariance.ncols() || covariance.is_empty() {
            return Err(Error::InvalidArgument {
                arg: "covariance",
                reason: "covariance must be square and nonempty".into(),
            });
        }
        let scale = linalg::max_abs(&covariance).max(T::one());
        let asym = linalg::max_abs(&(&covariance - covariance.transpose()));
        if asym > T::from_f64_approx(1e-12) * scale {
            return Err(Error::InvalidArgument {
                arg: "covariance",
                reason: "covariance is not symmetric".into(),
            });
        }
        if linalg::cholesky(&covariance).is_none() {
            return Err(Error::NotPositiveDefinite {
                what: "covariance",
                index: None,
            });
        }
        Ok(GaussianLaw { covariance })
    }

    /// Isotropic law `λ I_ℓ`.
    pub fn isotropic(dim: usize, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) {
            return Err(Error::InvalidArgument {
                arg: "lambda",
                reason: "isotropic variance must be positive".into(),
            });
        }
        Self::new(DMatrix::identity(dim, dim).scale(lambda))
    }

    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn covariance(&self) -> &DMatrix<T> {
        &self.covariance
    }

    /// Mean energy `E|W|² = Tr Σ`.
    pub fn second_moment_trace(&self) -> T {
        self.covariance.trace()
    }

    fn logdet(&self) -> T {
        let l = linalg::cholesky(&self.covariance).expect("validated covariance");
        linalg::logdet_from_cholesky(&l)
    }
}

/// Differential entropy `½ ln((2πe)^ℓ det Σ)` in nats.
pub fn gaussian_differential_entropy<T: Scalar>(law: &GaussianLaw<T>) -> T {
    let ell = T::from_f64_approx(law.dim() as f64);
    let half: T = T::from_f64_approx(0.5);
    let two_pi_e = T::two_pi() * T::e();
    half * (ell * two_pi_e.ln() + law.logdet())
}

/// Relative entropy of the law to the isotropic Gaussian `λ I_ℓ`:
/// `(ℓ/2) ln(2πλ) + Tr Σ/(2λ) - h(W)`.
pub fn relative_entropy_to_isotropic<T: Scalar>(law: &GaussianLaw<T>, lambda: T) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidArgument {
            arg: "lambda",
            reason: "isotropic variance must be positive".into(),
        });
    }
    let ell = T::from_f64_approx(law.dim() as f64);
    let half: T = T::from_f64_approx(0.5);
    let two = T::one() + T::one();
    Ok(half * ell * (T::two_pi() * lambda).ln() + law.second_moment_trace() / (two * lambda)
        - gaussian_differential_entropy(law))
}

/// The variance minimizing the relative entropy: `λ* = Tr Σ / ℓ`.
pub fn optimal_lambda<T: Scalar>(law: &GaussianLaw<T>) -> T {
    law.second_moment_trace() / T::from_f64_approx(law.dim() as f64)
}

/// Anisotropy of a Gaussian law: `-½ ln det(ℓ Σ / Tr Σ)` in nats.
///
/// Zero exactly for scalar covariances; invariant under rotation and
/// scaling; superadditive over block partitions.
pub fn gaussian_anisotropy<T: Scalar>(law: &GaussianLaw<T>) -> T {
    let ell = T::from_f64_approx(law.dim() as f64);
    let half: T = T::from_f64_approx(0.5);
    let trace = law.second_moment_trace();
    -half * (ell * ell.ln() + law.logdet() - ell * trace.ln())
}

/// Anisotropy from raw moments: `(ℓ/2) ln(2πe Tr Σ / ℓ) - h`, for
/// caller-supplied differential entropies of possibly non-Gaussian laws.
pub fn anisotropy_from_moments<T: Scalar>(
    ell: usize,
    second_moment_trace: T,
    diff_entropy: T,
) -> Result<T> {
    if !(second_moment_trace > T::zero()) {
        return Err(Error::InvalidArgument {
            arg: "second_moment_trace",
            reason: "mean energy must be positive".into(),
        });
    }
    let l = T::from_f64_approx(ell as f64);
    let half: T = T::from_f64_approx(0.5);
    Ok(half * l * (T::two_pi() * T::e() * second_moment_trace / l).ln() - diff_entropy)
}

/// The nearest isotropic Gaussian: covariance `(Tr Σ / ℓ) I_ℓ`.
pub fn nearest_isotropic<T: Scalar>(law: &GaussianLaw<T>) -> GaussianLaw<T> {
    GaussianLaw::isotropic(law.dim(), optimal_lambda(law)).expect("positive trace")
}
