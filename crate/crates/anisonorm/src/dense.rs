//! Dense stacked-operator analysis: the oracle path.
//!
//! Everything here is defined directly on the Gram matrix
//! `Λ = F_{0:N}ᵀ F_{0:N}` of the stacked operator: the classical norms,
//! the parametric family `S(q) = (I - qΛ)⁻¹` with its anisotropy and
//! gain maps, the decision function `𝔄(q, γ)`, and the a-anisotropic
//! norm by inverting the anisotropy map. The Riccati module reproduces
//! these results without ever assembling `Λ`; the two paths
//! cross-validate each other.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use crate::system::LdtvSystem;

/// Iteration cap for the bisection root finders.
const BISECTION_MAX_ITER: usize = 200;

/// Relative offset from the feasibility boundary used when a root lies
/// numerically at the boundary.
const BOUNDARY_MARGIN: f64 = 1e-9;

/// Gram matrix of the stacked operator with its spectral radius.
#[derive(Debug, Clone, PartialEq)]
pub struct GramOperator<T: Scalar> {
    lambda: DMatrix<T>,
    ell: usize,
    hinf_sq: T,
}

/// One evaluation of the q-parametric family: `S(q)`, the anisotropy
/// `𝒜(q)` and the gain `𝒩(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QPoint<T: Scalar> {
    pub q: T,
    pub s_of_q: DMatrix<T>,
    pub aniso: T,
    pub gain: T,
}

/// Outcome of asking for the anisotropy needed to reach a gain level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RequiredAnisotropy<T> {
    /// The gain level is reached at this input anisotropy.
    Achievable(T),
    /// The level is at or above the operator norm; no finite anisotropy
    /// reaches it.
    Unreachable,
}

struct QEvaluation<T: Scalar> {
    logdet_i_minus_q_lambda: T,
    s: DMatrix<T>,
    trace_s: T,
    trace_lambda_s: T,
}

impl<T: Scalar> GramOperator<T> {
    /// Wraps a precomputed Gram matrix, validating symmetry and positive
    /// semidefiniteness.
    pub fn new(lambda: DMatrix<T>) -> Result<Self> {
        if lambda.nrows() != lambda.ncols() || lambda.is_empty() {
            return Err(Error::InvalidArgument {
                arg: "lambda",
                reason: "Gram matrix must be square and nonempty".into(),
            });
        }
        let scale = linalg::max_abs(&lambda).max(T::one());
        let asym = linalg::max_abs(&(&lambda - lambda.transpose()));
        if asym > T::from_f64_approx(1e-12) * scale {
            return Err(Error::InvalidArgument {
                arg: "lambda",
                reason: "Gram matrix is not symmetric".into(),
            });
        }
        if linalg::smallest_eigenvalue(&lambda) < -T::from_f64_approx(1e-10) * scale {
            return Err(Error::InvalidArgument {
                arg: "lambda",
                reason: "Gram matrix has a negative eigenvalue".into(),
            });
        }
        let ell = lambda.nrows();
        let hinf_sq = linalg::largest_eigenvalue(&lambda);
        Ok(GramOperator { lambda, ell, hinf_sq })
    }

    /// Assembles `Λ = F_{0:N}ᵀ F_{0:N}` from the stacked operator of the
    /// full horizon.
    pub fn from_system(sys: &LdtvSystem<T>) -> Result<Self> {
        let f = sys.assemble_stacked(0, sys.horizon())?;
        let lambda = f.matrix().tr_mul(f.matrix());
        Self::new(linalg::sym_part(&lambda))
    }

    pub fn lambda(&self) -> &DMatrix<T> {
        &self.lambda
    }

    /// Stacked input dimension `ℓ = m (N+1)`.
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// `‖F‖_∞²`, the largest eigenvalue of `Λ`.
    pub fn hinf_sq(&self) -> T {
        self.hinf_sq
    }

    /// Frobenius norm `‖F‖₂ = sqrt(Tr Λ)`.
    pub fn h2_norm(&self) -> T {
        self.lambda.trace().max(T::zero()).sqrt()
    }

    /// Operator norm `‖F‖_∞`.
    pub fn hinf_norm(&self) -> T {
        self.hinf_sq.sqrt()
    }

    /// Scaled Frobenius norm `‖F‖₂/√ℓ`, the a = 0 limit of the
    /// anisotropic norm.
    pub fn scaled_h2_norm(&self) -> T {
        self.h2_norm() / T::from_f64_approx(self.ell as f64).sqrt()
    }

    /// Whether `Λ` is a scalar multiple of the identity (all RMS gains
    /// coincide, so the anisotropic norm degenerates to `‖F‖_∞`).
    pub fn is_scalar(&self) -> bool {
        let mean = self.lambda.trace() / T::from_f64_approx(self.ell as f64);
        let mut dev = self.lambda.clone();
        for i in 0..self.ell {
            dev[(i, i)] -= mean;
        }
        linalg::max_abs(&dev) <= T::from_f64_approx(1e-12) * mean.abs()
    }

    /// Whether the operator is identically zero.
    pub fn is_zero(&self) -> bool {
        self.hinf_sq == T::zero()
    }

    fn check_q(&self, q: T) -> Result<()> {
        if !(q >= T::zero()) || !q.is_finite() {
            return Err(self.q_range_error(q));
        }
        Ok(())
    }

    fn q_range_error(&self, q: T) -> Error {
        let sup = if self.hinf_sq > T::zero() {
            (T::one() / self.hinf_sq).as_f64()
        } else {
            f64::INFINITY
        };
        Error::QOutOfRange { q: q.as_f64(), sup }
    }

    fn factor_i_minus_q_lambda(&self, q: T) -> Result<DMatrix<T>> {
        self.check_q(q)?;
        let mut m = -self.lambda.clone();
        m *= q;
        for i in 0..self.ell {
            m[(i, i)] += T::one();
        }
        linalg::cholesky(&m).ok_or_else(|| self.q_range_error(q))
    }

    fn evaluate_q(&self, q: T) -> Result<QEvaluation<T>> {
        let l = self.factor_i_minus_q_lambda(q)?;
        let logdet = linalg::logdet_from_cholesky(&l);
        let s = linalg::inverse_from_cholesky(&l);
        let s = linalg::sym_part(&s);
        let trace_s = s.trace();
        let trace_lambda_s = self.lambda.dot(&s);
        Ok(QEvaluation {
            logdet_i_minus_q_lambda: logdet,
            s,
            trace_s,
            trace_lambda_s,
        })
    }

    /// `S(q) = (I_ℓ - qΛ)⁻¹`, positive definite for feasible q.
    pub fn s_of_q(&self, q: T) -> Result<DMatrix<T>> {
        Ok(self.evaluate_q(q)?.s)
    }

    /// Input anisotropy `𝒜(q) = -½ ln det(ℓ S(q) / Tr S(q))`, in nats.
    pub fn aniso_of_q(&self, q: T) -> Result<T> {
        let eval = self.evaluate_q(q)?;
        Ok(self.aniso_from_eval(&eval))
    }

    fn aniso_from_eval(&self, eval: &QEvaluation<T>) -> T {
        let ell = T::from_f64_approx(self.ell as f64);
        let half: T = T::from_f64_approx(0.5);
        // ln det S = -ln det(I - qΛ).
        -half * (ell * ell.ln() - eval.logdet_i_minus_q_lambda - ell * eval.trace_s.ln())
    }

    /// RMS gain `𝒩(q) = sqrt(Tr(Λ S(q)) / Tr S(q))` of the worst-case
    /// input at parameter q.
    pub fn gain_of_q(&self, q: T) -> Result<T> {
        let eval = self.evaluate_q(q)?;
        Ok(Self::gain_from_eval(&eval))
    }

    fn gain_from_eval(eval: &QEvaluation<T>) -> T {
        (eval.trace_lambda_s / eval.trace_s).max(T::zero()).sqrt()
    }

    /// Anisotropy map, gain map and `S(q)` in one evaluation.
    pub fn q_point(&self, q: T) -> Result<QPoint<T>> {
        let eval = self.evaluate_q(q)?;
        Ok(QPoint {
            q,
            aniso: self.aniso_from_eval(&eval),
            gain: Self::gain_from_eval(&eval),
            s_of_q: eval.s,
        })
    }

    /// Decision function
    /// `𝔄(q, γ) = ½ ln det(I_ℓ - qΛ) - (ℓ/2) ln(1 - qγ²)`.
    ///
    /// Coincides with `𝒜(q)` when `γ = 𝒩(q)`, and its sign pattern in q
    /// decides the norm bound.
    pub fn fa(&self, q: T, gamma: T) -> Result<T> {
        let one_minus = T::one() - q * gamma * gamma;
        if one_minus <= T::zero() {
            return Err(Error::QOutOfRange {
                q: q.as_f64(),
                sup: (T::one() / (gamma * gamma)).as_f64(),
            });
        }
        let l = self.factor_i_minus_q_lambda(q)?;
        let logdet = linalg::logdet_from_cholesky(&l);
        let ell = T::from_f64_approx(self.ell as f64);
        let half: T = T::from_f64_approx(0.5);
        Ok(half * logdet - half * ell * one_minus.ln())
    }

    /// Largest feasible q strictly below `‖F‖_∞⁻²` that the dense path
    /// can evaluate, or `None` for the zero operator (every q is
    /// feasible).
    fn feasible_probe(&self) -> Option<T> {
        if self.is_zero() {
            return None;
        }
        let sup = T::one() / self.hinf_sq;
        let mut offset = BOUNDARY_MARGIN;
        while offset < 1e-2 {
            let q = sup * (T::one() - T::from_f64_approx(offset));
            if self.factor_i_minus_q_lambda(q).is_ok() {
                return Some(q);
            }
            offset *= 10.0;
        }
        Some(T::zero())
    }

    /// The a-anisotropic norm `|||F|||_a = 𝒩(𝒜⁻¹(a))` by bisection on
    /// the strictly increasing anisotropy map.
    ///
    /// `tol` is the absolute tolerance on the anisotropy residual at the
    /// root. Degenerate cases (zero operator, scalar `Λ`) short-circuit
    /// to the exact value.
    pub fn anisotropic_norm(&self, a: T, tol: T) -> Result<T> {
        if !(a >= T::zero()) {
            return Err(Error::InvalidArgument {
                arg: "a",
                reason: "anisotropy bound must be nonnegative".into(),
            });
        }
        if !(tol > T::zero()) {
            return Err(Error::InvalidArgument {
                arg: "tol",
                reason: "tolerance must be positive".into(),
            });
        }
        if self.is_zero() {
            return Ok(T::zero());
        }
        if self.is_scalar() {
            return Ok(self.hinf_norm());
        }
        if a == T::zero() {
            return Ok(self.scaled_h2_norm());
        }
        let hi_cap = self.feasible_probe().expect("nonzero operator");
        let aniso_cap = self.aniso_of_q(hi_cap)?;
        if aniso_cap <= a {
            // The root sits between hi_cap and the feasibility boundary;
            // the gain there differs from ‖F‖_∞ only at the boundary
            // margin scale.
            return self.gain_of_q(hi_cap);
        }
        let mut lo = T::zero();
        let mut hi = hi_cap;
        let half: T = T::from_f64_approx(0.5);
        for _ in 0..BISECTION_MAX_ITER {
            let mid = (lo + hi) * half;
            let aniso = self.aniso_of_q(mid)?;
            if (aniso - a).abs() <= tol {
                return self.gain_of_q(mid);
            }
            if aniso > a {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        self.gain_of_q((lo + hi) * half)
    }

    /// Minimum input anisotropy required to reach RMS gain `gamma`
    /// (the value of the constrained minimization the norm inverts).
    pub fn min_required_anisotropy(&self, gamma: T) -> Result<RequiredAnisotropy<T>> {
        if !(gamma >= T::zero()) || !gamma.is_finite() {
            return Err(Error::InvalidArgument {
                arg: "gamma",
                reason: "gain level must be nonnegative".into(),
            });
        }
        if gamma <= self.scaled_h2_norm() {
            return Ok(RequiredAnisotropy::Achievable(T::zero()));
        }
        if gamma >= self.hinf_norm() {
            return Ok(RequiredAnisotropy::Unreachable);
        }
        let hi_cap = self.feasible_probe().expect("nonzero operator");
        if self.gain_of_q(hi_cap)? <= gamma {
            // Saturated within the boundary margin of ‖F‖_∞.
            return Ok(RequiredAnisotropy::Achievable(self.aniso_of_q(hi_cap)?));
        }
        let mut lo = T::zero();
        let mut hi = hi_cap;
        let width_tol = T::from_f64_approx(1e-10) * (T::one() / self.hinf_sq);
        let half: T = T::from_f64_approx(0.5);
        for _ in 0..BISECTION_MAX_ITER {
            let mid = (lo + hi) * half;
            if self.gain_of_q(mid)? > gamma {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= width_tol {
                break;
            }
        }
        Ok(RequiredAnisotropy::Achievable(
            self.aniso_of_q((lo + hi) * half)?,
        ))
    }

    /// Worst-case input covariance direction `Π = S(q)/Tr S(q)`:
    /// unit trace, positive definite, and `rms_gain(Π) = 𝒩(q)`.
    pub fn worst_case_covariance(&self, q: T) -> Result<DMatrix<T>> {
        let eval = self.evaluate_q(q)?;
        Ok(eval.s / eval.trace_s)
    }

    /// RMS gain `sqrt(Tr(Λ Π))` of the zero-mean input with unit-trace
    /// covariance direction `Π`.
    pub fn rms_gain(&self, pi: &DMatrix<T>) -> Result<T> {
        if pi.nrows() != self.ell || pi.ncols() != self.ell {
            return Err(Error::InvalidArgument {
                arg: "pi",
                reason: format!("covariance must be {0}x{0}", self.ell),
            });
        }
        if (pi.trace() - T::one()).abs() > T::from_f64_approx(1e-10) {
            return Err(Error::InvalidArgument {
                arg: "pi",
                reason: "covariance direction must have unit trace".into(),
            });
        }
        if linalg::smallest_eigenvalue(pi) < -T::from_f64_approx(1e-10) {
            return Err(Error::NotPositiveDefinite {
                what: "input covariance",
                index: None,
            });
        }
        Ok(self.lambda.dot(pi).max(T::zero()).sqrt())
    }
}

/// Gram operator of a system's full-horizon stacked operator.
pub fn gram_operator<T: Scalar>(sys: &LdtvSystem<T>) -> Result<GramOperator<T>> {
    GramOperator::from_system(sys)
}

/// Frobenius norm of the stacked operator.
pub fn h2_norm<T: Scalar>(sys: &LdtvSystem<T>) -> Result<T> {
    Ok(gram_operator(sys)?.h2_norm())
}

/// Operator norm of the stacked operator.
pub fn hinf_norm<T: Scalar>(sys: &LdtvSystem<T>) -> Result<T> {
    Ok(gram_operator(sys)?.hinf_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    fn e1() -> LdtvSystem<f64> {
        LdtvSystem::from_constant(dmatrix![0.5], dmatrix![1.0], dmatrix![1.0], dmatrix![0.0], 1)
            .unwrap()
    }

    fn e1_gram() -> GramOperator<f64> {
        gram_operator(&e1()).unwrap()
    }

    fn identity_passthrough(m: usize, horizon: usize) -> LdtvSystem<f64> {
        LdtvSystem::from_constant(
            DMatrix::zeros(1, 1),
            DMatrix::zeros(1, m),
            DMatrix::zeros(m, 1),
            DMatrix::identity(m, m),
            horizon,
        )
        .unwrap()
    }

    fn zero_system() -> LdtvSystem<f64> {
        LdtvSystem::from_constant(dmatrix![0.5], dmatrix![1.0], dmatrix![0.0], dmatrix![0.0], 2)
            .unwrap()
    }

    #[test]
    fn gram_of_e1_is_diag_1_0() {
        let g = e1_gram();
        assert_relative_eq!(g.lambda().clone(), dmatrix![1.0, 0.0; 0.0, 0.0]);
        assert_eq!(g.ell(), 2);
        assert_relative_eq!(g.hinf_sq(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn gram_of_zero_system_is_zero() {
        let g = gram_operator(&zero_system()).unwrap();
        assert!(g.is_zero());
        assert_eq!(g.h2_norm(), 0.0);
        assert_eq!(g.hinf_norm(), 0.0);
        assert_eq!(g.anisotropic_norm(3.0, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn classical_norms_of_e1() {
        let g = e1_gram();
        assert_relative_eq!(g.h2_norm(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(g.hinf_norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn identity_passthrough_norms() {
        let g = gram_operator(&identity_passthrough(3, 4)).unwrap();
        assert_relative_eq!(g.h2_norm(), (15.0f64).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(g.hinf_norm(), 1.0, epsilon = 1e-12);
        assert!(g.is_scalar());
    }

    #[test]
    fn output_scaling_scales_hinf() {
        let sys = LdtvSystem::from_constant(
            dmatrix![0.5],
            dmatrix![1.0],
            dmatrix![3.0],
            dmatrix![0.0],
            1,
        )
        .unwrap();
        assert_relative_eq!(hinf_norm(&sys).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn s_of_q_values() {
        let g = e1_gram();
        assert_relative_eq!(g.s_of_q(0.0).unwrap(), DMatrix::identity(2, 2), epsilon = 1e-14);
        assert_relative_eq!(
            g.s_of_q(0.5).unwrap(),
            dmatrix![2.0, 0.0; 0.0, 1.0],
            epsilon = 1e-13
        );
        let near = g.s_of_q(0.999).unwrap();
        assert_relative_eq!(crate::linalg::largest_eigenvalue(&near), 1000.0, max_relative = 1e-9);
        assert!(matches!(g.s_of_q(1.0), Err(Error::QOutOfRange { .. })));
        assert!(matches!(g.s_of_q(-0.1), Err(Error::QOutOfRange { .. })));
    }

    #[test]
    fn aniso_of_q_values() {
        let g = e1_gram();
        assert_relative_eq!(g.aniso_of_q(0.0).unwrap(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(
            g.aniso_of_q(0.5).unwrap(),
            -0.5 * (8.0f64 / 9.0).ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn scalar_gram_has_zero_anisotropy_everywhere() {
        let g = GramOperator::new(DMatrix::identity(3, 3).scale(2.0)).unwrap();
        for q in [0.0, 0.1, 0.3, 0.49] {
            assert_relative_eq!(g.aniso_of_q(q).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gain_of_q_values() {
        let g = e1_gram();
        assert_relative_eq!(g.gain_of_q(0.0).unwrap(), 0.5f64.sqrt(), epsilon = 1e-13);
        assert_relative_eq!(
            g.gain_of_q(0.5).unwrap(),
            (2.0f64 / 3.0).sqrt(),
            epsilon = 1e-12
        );
        // Approaches the operator norm at the feasibility boundary.
        let gain = g.gain_of_q(1.0 - 1e-6).unwrap();
        assert!((gain - 1.0).abs() < 1e-5, "gain = {gain}");
    }

    #[test]
    fn fa_values() {
        let g = e1_gram();
        assert_relative_eq!(g.fa(0.0, 0.7).unwrap(), 0.0, epsilon = 1e-14);
        let gain = g.gain_of_q(0.5).unwrap();
        assert_relative_eq!(
            g.fa(0.5, gain).unwrap(),
            g.aniso_of_q(0.5).unwrap(),
            epsilon = 1e-12
        );
        // Direct evaluation at gamma = 0.9.
        let expected = 0.5 * 0.5f64.ln() - (1.0 - 0.5 * 0.81f64).ln();
        assert_relative_eq!(g.fa(0.5, 0.9).unwrap(), expected, epsilon = 1e-12);
        assert!(matches!(g.fa(0.5, 1.5), Err(Error::QOutOfRange { .. })));
    }

    #[test]
    fn anisotropic_norm_limits_and_inverse() {
        let g = e1_gram();
        assert_relative_eq!(
            g.anisotropic_norm(0.0, 1e-10).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-13
        );
        let a_star = -0.5 * (8.0f64 / 9.0).ln();
        assert_relative_eq!(
            g.anisotropic_norm(a_star, 1e-12).unwrap(),
            (2.0f64 / 3.0).sqrt(),
            epsilon = 1e-8
        );
        let near_hinf = g.anisotropic_norm(50.0, 1e-10).unwrap();
        assert!((near_hinf - 1.0).abs() < 1e-3, "norm = {near_hinf}");
    }

    #[test]
    fn min_required_anisotropy_cases() {
        let g = e1_gram();
        match g.min_required_anisotropy((2.0f64 / 3.0).sqrt()).unwrap() {
            RequiredAnisotropy::Achievable(a) => {
                assert_relative_eq!(a, -0.5 * (8.0f64 / 9.0).ln(), epsilon = 1e-7);
            }
            RequiredAnisotropy::Unreachable => panic!("gain below hinf is reachable"),
        }
        assert_eq!(
            g.min_required_anisotropy(0.5f64.sqrt()).unwrap(),
            RequiredAnisotropy::Achievable(0.0)
        );
        assert_eq!(
            g.min_required_anisotropy(1.5).unwrap(),
            RequiredAnisotropy::Unreachable
        );
    }

    #[test]
    fn worst_case_covariance_values() {
        let g = e1_gram();
        assert_relative_eq!(
            g.worst_case_covariance(0.0).unwrap(),
            DMatrix::identity(2, 2).scale(0.5),
            epsilon = 1e-14
        );
        let pi = g.worst_case_covariance(0.5).unwrap();
        assert_relative_eq!(pi, dmatrix![2.0/3.0, 0.0; 0.0, 1.0/3.0], epsilon = 1e-12);
        assert_relative_eq!(pi.trace(), 1.0, epsilon = 1e-14);
        // By construction the worst-case direction realizes the gain map.
        assert_relative_eq!(
            g.rms_gain(&pi).unwrap(),
            g.gain_of_q(0.5).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn rms_gain_values_and_validation() {
        let g = e1_gram();
        assert_relative_eq!(
            g.rms_gain(&DMatrix::identity(2, 2).scale(0.5)).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-14
        );
        // Projector onto the top eigenvector of Λ attains ‖F‖_∞.
        assert_relative_eq!(
            g.rms_gain(&dmatrix![1.0, 0.0; 0.0, 0.0]).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert!(g.rms_gain(&dmatrix![2.0, 0.0; 0.0, 0.0]).is_err());
        assert!(g.rms_gain(&dmatrix![1.5, 0.0; 0.0, -0.5]).is_err());
    }

    #[test]
    fn trace_identities_hold() {
        // Eq-style sanity on a nontrivial gram: Tr(ΛS) = (Tr S - ℓ)/q and
        // Tr S = ℓ/(1 - q N(q)²).
        let lambda = dmatrix![2.0, 0.3, 0.0; 0.3, 1.0, 0.1; 0.0, 0.1, 0.5];
        let g = GramOperator::new(lambda).unwrap();
        let q = 0.2;
        let s = g.s_of_q(q).unwrap();
        let ell = 3.0;
        let tr_s = s.trace();
        let tr_ls = g.lambda().dot(&s);
        assert_relative_eq!(tr_ls, (tr_s - ell) / q, max_relative = 1e-11);
        let gain = g.gain_of_q(q).unwrap();
        assert_relative_eq!(tr_s, ell / (1.0 - q * gain * gain), max_relative = 1e-11);
    }

    #[test]
    fn q_point_bundles_the_maps() {
        let g = e1_gram();
        let p = g.q_point(0.5).unwrap();
        assert_relative_eq!(p.aniso, g.aniso_of_q(0.5).unwrap());
        assert_relative_eq!(p.gain, g.gain_of_q(0.5).unwrap());
        assert_relative_eq!(p.s_of_q, g.s_of_q(0.5).unwrap());
    }
}
