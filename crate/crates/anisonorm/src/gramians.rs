//! Controllability/observability gramians and the outerness criterion.
//!
//! The gramians obey difference Lyapunov recursions: `P` forward from
//! `P_0 = 0`, `Q` backward from `Q_{N+1} = 0`. A system with `r <= m` is
//! outer (its stacked operator satisfies `F F^T = I`) exactly when, at
//! every step, the output covariance is the identity and the
//! state-output cross term is annihilated by the downstream
//! observability gramian.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use crate::system::LdtvSystem;

/// Controllability gramians `P_0..P_{N+1}` and observability gramians
/// `Q_0..Q_{N+1}` of a system.
#[derive(Debug, Clone, PartialEq)]
pub struct GramianSet<T: Scalar> {
    p: Vec<DMatrix<T>>,
    q: Vec<DMatrix<T>>,
}

impl<T: Scalar> GramianSet<T> {
    /// Controllability gramian at time j; `P_0 = 0`.
    pub fn controllability(&self, j: usize) -> &DMatrix<T> {
        &self.p[j]
    }

    /// Observability gramian at time k; `Q_{N+1} = 0`.
    pub fn observability(&self, k: usize) -> &DMatrix<T> {
        &self.q[k]
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Per-step residuals of the two outerness conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct OuternessStep<T: Scalar> {
    /// Max-abs residual of `C_k P_k C_kᵀ + D_k D_kᵀ - I_r`.
    pub covariance_residual: T,
    /// Max-abs residual of `Q_{k+1} (A_k P_k C_kᵀ + B_k D_kᵀ)`.
    pub cross_residual: T,
}

/// Outcome of the state-space outerness test with per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct OuternessReport<T: Scalar> {
    pub outer: bool,
    pub steps: Vec<OuternessStep<T>>,
}

impl<T: Scalar> OuternessReport<T> {
    /// Largest residual over both conditions and all steps.
    pub fn worst_residual(&self) -> T {
        self.steps.iter().fold(T::zero(), |acc, s| {
            acc.max(s.covariance_residual).max(s.cross_residual)
        })
    }
}

/// Runs both Lyapunov recursions:
/// `P_{j+1} = A_j P_j A_jᵀ + B_j B_jᵀ` and
/// `Q_k = A_kᵀ Q_{k+1} A_k + C_kᵀ C_k`.
pub fn compute_gramians<T: Scalar>(sys: &LdtvSystem<T>) -> GramianSet<T> {
    let n = sys.state_dim();
    let steps = sys.horizon() + 1;
    let mut p = Vec::with_capacity(steps + 1);
    p.push(DMatrix::<T>::zeros(n, n));
    for j in 0..steps {
        let a = sys.a(j);
        let b = sys.b(j);
        let next = a * &p[j] * a.transpose() + b * b.transpose();
        p.push(linalg::sym_part(&next));
    }
    let mut q = vec![DMatrix::<T>::zeros(n, n); steps + 1];
    for k in (0..steps).rev() {
        let a = sys.a(k);
        let c = sys.c(k);
        let prev = a.transpose() * &q[k + 1] * a + c.transpose() * c;
        q[k] = linalg::sym_part(&prev);
    }
    GramianSet { p, q }
}

/// Covariance of output `z_k` under unit-variance Gaussian white noise
/// input: `C_k P_k C_kᵀ + D_k D_kᵀ`.
pub fn output_covariance<T: Scalar>(sys: &LdtvSystem<T>, k: usize) -> Result<DMatrix<T>> {
    if k > sys.horizon() {
        return Err(Error::IndexOutOfRange {
            index: k,
            max: sys.horizon(),
        });
    }
    let grams = compute_gramians(sys);
    Ok(output_covariance_with(sys, &grams, k))
}

fn output_covariance_with<T: Scalar>(
    sys: &LdtvSystem<T>,
    grams: &GramianSet<T>,
    k: usize,
) -> DMatrix<T> {
    let c = sys.c(k);
    let d = sys.d(k);
    c * grams.controllability(k) * c.transpose() + d * d.transpose()
}

/// Squared Frobenius norm of the stacked operator computed from the
/// state-space side: the total output energy under white noise,
/// `Σ_k Tr(C_k P_k C_kᵀ + D_k D_kᵀ)`.
pub fn h2_norm_squared<T: Scalar>(sys: &LdtvSystem<T>) -> T {
    let grams = compute_gramians(sys);
    let mut acc = T::zero();
    for k in 0..=sys.horizon() {
        acc += output_covariance_with(sys, &grams, k).trace();
    }
    acc
}

/// State-space outerness test with per-step residual diagnostics.
///
/// Requires `r <= m`. The cross condition is tested directly as
/// `Q_{k+1} (A_k P_k C_kᵀ + B_k D_kᵀ) = 0`, avoiding the matrix square
/// root of `Q_{k+1}`.
pub fn is_outer<T: Scalar>(sys: &LdtvSystem<T>, tol: T) -> Result<OuternessReport<T>> {
    if sys.output_dim() > sys.input_dim() {
        return Err(Error::InvalidArgument {
            arg: "system",
            reason: format!(
                "outerness requires r <= m, got r = {}, m = {}",
                sys.output_dim(),
                sys.input_dim()
            ),
        });
    }
    let grams = compute_gramians(sys);
    let r = sys.output_dim();
    let mut steps = Vec::with_capacity(sys.horizon() + 1);
    let mut outer = true;
    for k in 0..=sys.horizon() {
        let mut cov = output_covariance_with(sys, &grams, k);
        for i in 0..r {
            cov[(i, i)] -= T::one();
        }
        let covariance_residual = linalg::max_abs(&cov);
        let cross =
            sys.a(k) * grams.controllability(k) * sys.c(k).transpose() + sys.b(k) * sys.d(k).transpose();
        let cross_residual = linalg::max_abs(&(grams.observability(k + 1) * cross));
        if covariance_residual > tol || cross_residual > tol {
            outer = false;
        }
        steps.push(OuternessStep {
            covariance_residual,
            cross_residual,
        });
    }
    Ok(OuternessReport { outer, steps })
}

/// Dense outerness oracle: assembles `F_{0:N}` and checks
/// `max-abs(F F^T - I) <= tol` directly.
pub fn outerness_oracle<T: Scalar>(sys: &LdtvSystem<T>, tol: T) -> Result<bool> {
    if sys.output_dim() > sys.input_dim() {
        return Err(Error::InvalidArgument {
            arg: "system",
            reason: format!(
                "outerness requires r <= m, got r = {}, m = {}",
                sys.output_dim(),
                sys.input_dim()
            ),
        });
    }
    let f = sys.assemble_stacked(0, sys.horizon())?;
    let mut gram = f.matrix() * f.matrix().transpose();
    for i in 0..gram.nrows() {
        gram[(i, i)] -= T::one();
    }
    Ok(linalg::max_abs(&gram) <= tol)
}

/// Default max-abs residual tolerance for outerness decisions.
pub fn default_outerness_tolerance<T: Scalar>() -> T {
    T::from_f64_approx(1e-8)
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

    #[test]
    fn gramians_of_e1() {
        let g = compute_gramians(&e1());
        assert_relative_eq!(g.controllability(0)[(0, 0)], 0.0);
        assert_relative_eq!(g.controllability(1)[(0, 0)], 1.0);
        assert_relative_eq!(g.controllability(2)[(0, 0)], 1.25);
        assert_relative_eq!(g.observability(2)[(0, 0)], 0.0);
        assert_relative_eq!(g.observability(1)[(0, 0)], 1.0);
        assert_relative_eq!(g.observability(0)[(0, 0)], 1.25);
    }

    #[test]
    fn zero_b_gives_zero_controllability() {
        let sys = LdtvSystem::from_constant(
            dmatrix![0.5],
            dmatrix![0.0],
            dmatrix![1.0],
            dmatrix![0.0],
            3,
        )
        .unwrap();
        let g = compute_gramians(&sys);
        for j in 0..g.len() {
            assert_eq!(g.controllability(j)[(0, 0)], 0.0);
        }
    }

    #[test]
    fn zero_c_gives_zero_observability() {
        let sys = LdtvSystem::from_constant(
            dmatrix![0.5],
            dmatrix![1.0],
            dmatrix![0.0],
            dmatrix![1.0],
            3,
        )
        .unwrap();
        let g = compute_gramians(&sys);
        for k in 0..g.len() {
            assert_eq!(g.observability(k)[(0, 0)], 0.0);
        }
    }

    #[test]
    fn gramians_match_transition_sums() {
        // P_j = Σ_{k<j} Φ_{j,k+1} B_k B_kᵀ Φ_{j,k+1}ᵀ and dually for Q.
        let sys = LdtvSystem::new(
            vec![dmatrix![0.3, 1.0; 0.0, -0.4], dmatrix![0.1, 0.0; 0.5, 0.2]],
            vec![dmatrix![1.0; 0.5], dmatrix![0.0; 1.0]],
            vec![dmatrix![1.0, -1.0], dmatrix![0.5, 0.5]],
            vec![dmatrix![0.0], dmatrix![0.0]],
        )
        .unwrap();
        let g = compute_gramians(&sys);
        for j in 0..=sys.horizon() + 1 {
            let mut sum = DMatrix::<f64>::zeros(2, 2);
            for k in 0..j {
                let phi = sys.state_transition(j, k + 1).unwrap();
                sum += &phi * sys.b(k) * sys.b(k).transpose() * phi.transpose();
            }
            assert_relative_eq!(g.controllability(j).clone(), sum, epsilon = 1e-10);
        }
        for k in 0..=sys.horizon() + 1 {
            let mut sum = DMatrix::<f64>::zeros(2, 2);
            for j in k..=sys.horizon() {
                let phi = sys.state_transition(j, k).unwrap();
                sum += phi.transpose() * sys.c(j).transpose() * sys.c(j) * &phi;
            }
            assert_relative_eq!(g.observability(k).clone(), sum, epsilon = 1e-10);
        }
    }

    #[test]
    fn output_covariance_of_e1() {
        let sys = e1();
        assert_relative_eq!(output_covariance(&sys, 0).unwrap()[(0, 0)], 0.0);
        assert_relative_eq!(output_covariance(&sys, 1).unwrap()[(0, 0)], 1.0);
        assert!(output_covariance(&sys, 2).is_err());
    }

    #[test]
    fn h2_squared_matches_dense_frobenius() {
        let sys = e1();
        let f = sys.assemble_stacked(0, 1).unwrap();
        let frob_sq: f64 = f.matrix().iter().map(|x| x * x).sum();
        assert_relative_eq!(h2_norm_squared(&sys), frob_sq, epsilon = 1e-12);
    }

    #[test]
    fn orthonormal_feedthrough_is_outer() {
        // C = 0 and D with orthonormal rows: both conditions immediate.
        let sys = LdtvSystem::from_constant(
            dmatrix![0.5],
            dmatrix![1.0, 0.0],
            dmatrix![0.0],
            dmatrix![1.0, 0.0],
            2,
        )
        .unwrap();
        let report = is_outer(&sys, 1e-8).unwrap();
        assert!(report.outer);
        assert!(report.worst_residual() <= 1e-15);
        assert!(outerness_oracle(&sys, 1e-8).unwrap());
    }

    #[test]
    fn e1_is_not_outer() {
        let report = is_outer(&e1(), 1e-8).unwrap();
        assert!(!report.outer);
        // At k = 0 the output covariance is 0, not I.
        assert_relative_eq!(report.steps[0].covariance_residual, 1.0);
        assert!(!outerness_oracle(&e1(), 1e-8).unwrap());
    }

    #[test]
    fn wide_output_is_a_dimension_error() {
        let sys = LdtvSystem::from_constant(
            dmatrix![0.5],
            dmatrix![1.0],
            dmatrix![1.0; 1.0],
            dmatrix![1.0; 0.0],
            1,
        )
        .unwrap();
        assert!(is_outer(&sys, 1e-8).is_err());
        assert!(outerness_oracle(&sys, 1e-8).is_err());
    }

    #[test]
    fn cross_covariance_identity() {
        // Σ_{j>k} ‖cov(z_j, z_k)‖² equals ‖√Q_{k+1}(A_k P_k C_kᵀ + B_k D_kᵀ)‖²;
        // the dense side reads the cross-covariances off F Fᵀ blocks.
        let sys = LdtvSystem::new(
            vec![dmatrix![0.3, 1.0; 0.0, -0.4]; 3],
            vec![dmatrix![1.0; 0.5]; 3],
            vec![dmatrix![1.0, -1.0]; 3],
            vec![dmatrix![0.7]; 3],
        )
        .unwrap();
        let f = sys.assemble_stacked(0, 2).unwrap();
        let ff = f.matrix() * f.matrix().transpose();
        let grams = compute_gramians(&sys);
        for k in 0..=2usize {
            let dense: f64 = ((k + 1)..=2).map(|j| ff[(j, k)] * ff[(j, k)]).sum();
            let cross = sys.a(k) * grams.controllability(k) * sys.c(k).transpose()
                + sys.b(k) * sys.d(k).transpose();
            let root = crate::linalg::symmetric_sqrt(grams.observability(k + 1));
            let weighted = &root * &cross;
            let state: f64 = weighted.iter().map(|x| x * x).sum();
            assert_relative_eq!(dense, state, epsilon = 1e-10);
        }
    }
}
