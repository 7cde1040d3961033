//! Forward difference Riccati recursion and the anisotropic norm
//! bounded real lemma.
//!
//! For a parameter `q >= 0` the recursion
//!
//! ```text
//! S_k = I_r - C_k R_k C_kᵀ - q D_k D_kᵀ,
//! M_k = -(A_k R_k C_kᵀ + q B_k D_kᵀ) S_k⁻¹,
//! R_{k+1} = A_k R_k A_kᵀ + q B_k B_kᵀ + M_k S_k M_kᵀ,       R_0 = 0,
//! ```
//!
//! runs forward in time. All `S_k` stay positive definite exactly when
//! `q < ‖F‖_∞⁻²`, and then `Σ ln det S_k = ln det(I - qΛ)`, which turns
//! the norm bound `|||F|||_a <= γ` into the inequality
//! `Σ ln det S_k >= m(N+1) ln(1 - qγ²) + 2a` for some feasible q. The
//! same recursion yields the spectral factor `H` completing `√q F` to an
//! outer system, and at `q = γ⁻²` it degenerates to the classical
//! H-infinity bounded real lemma.

use nalgebra::DMatrix;

use crate::dense;
use crate::error::{Error, Result};
use crate::gramians;
use crate::linalg;
use crate::scalar::Scalar;
use crate::system::LdtvSystem;

/// Iteration cap for feasibility and norm bisections.
const BISECTION_MAX_ITER: usize = 200;

/// Iteration cap for the golden-section search over q.
const GOLDEN_MAX_ITER: usize = 300;

/// Decision tolerance on the margin: the bound holds when the best
/// margin is at least `-DECISION_TOLERANCE`.
pub const DECISION_TOLERANCE: f64 = 1e-9;

/// Relative backoff from interval endpoints in the q-search.
const ENDPOINT_MARGIN: f64 = 1e-12;

/// Evidence record of one Riccati sweep at a fixed q.
///
/// On failure the sequences are truncated at the first step whose `S_k`
/// is not positive definite: `r` keeps the states computed so far
/// (including the one at the failing step), while `m`, `s` and
/// `logdet_s` keep only the successful steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiTrace<T: Scalar> {
    q: T,
    r: Vec<DMatrix<T>>,
    m: Vec<DMatrix<T>>,
    s: Vec<DMatrix<T>>,
    logdet_s: Vec<T>,
    first_failure: Option<usize>,
}

impl<T: Scalar> RiccatiTrace<T> {
    pub fn q(&self) -> T {
        self.q
    }

    /// State matrix `R_k`.
    pub fn r(&self, k: usize) -> &DMatrix<T> {
        &self.r[k]
    }

    /// Gain matrix `M_k`.
    pub fn m(&self, k: usize) -> &DMatrix<T> {
        &self.m[k]
    }

    /// Innovation matrix `S_k`.
    pub fn s(&self, k: usize) -> &DMatrix<T> {
        &self.s[k]
    }

    pub fn logdet_s(&self) -> &[T] {
        &self.logdet_s
    }

    /// `Σ_k ln det S_k` over the successful steps.
    pub fn sum_logdet_s(&self) -> T {
        self.logdet_s.iter().fold(T::zero(), |acc, &x| acc + x)
    }

    /// Whether every `S_k` on the horizon was positive definite.
    pub fn all_pd(&self) -> bool {
        self.first_failure.is_none()
    }

    /// Earliest step with a non-positive-definite `S_k`, if any.
    pub fn first_failure(&self) -> Option<usize> {
        self.first_failure
    }

    fn require_all_pd(&self) -> Result<()> {
        match self.first_failure {
            None => Ok(()),
            Some(k) => Err(Error::NotPositiveDefinite {
                what: "S",
                index: Some(k),
            }),
        }
    }
}

/// Outcome of one Riccati step.
#[derive(Debug, Clone, PartialEq)]
pub enum RiccatiStep<T: Scalar> {
    /// The step succeeded; carries `R_{k+1}`, `M_k`, `S_k` and
    /// `ln det S_k`.
    Step {
        r_next: DMatrix<T>,
        m: DMatrix<T>,
        s: DMatrix<T>,
        logdet_s: T,
    },
    /// `S_k` failed the positive-definiteness test.
    NotPositiveDefinite { s: DMatrix<T> },
}

/// Verdict of the anisotropic norm bound `|||F|||_a <= γ`.
///
/// `witness_q` and `margin` are present when a q-search ran (and always
/// when the bound holds); the margin is the slack of the determinant
/// inequality at the witness, in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct AnbrlVerdict<T: Scalar> {
    pub holds: bool,
    pub gamma: T,
    pub a: T,
    /// Anisotropy production rate per step, `a / (N+1)`.
    pub alpha: T,
    pub q_lower: T,
    pub q_upper: T,
    pub witness_q: Option<T>,
    pub margin: Option<T>,
}

/// Spectral factor `H` of `I - q F Fᵀ = H Hᵀ`, realized as
/// `(A_k, M_k √S_k, C_k, √S_k)` from the Riccati outputs.
///
/// Square roots use the symmetric PSD convention (eigen-decomposition);
/// any factor with `√S √Sᵀ = S`, such as a Cholesky factor, satisfies
/// the same identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFactor<T: Scalar> {
    system: LdtvSystem<T>,
    q: T,
}

impl<T: Scalar> SpectralFactor<T> {
    /// The realization of `H` as an r-input, r-output system.
    pub fn system(&self) -> &LdtvSystem<T> {
        &self.system
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn into_system(self) -> LdtvSystem<T> {
        self.system
    }
}

fn check_q_nonnegative<T: Scalar>(q: T) -> Result<()> {
    if !(q >= T::zero()) || !q.is_finite() {
        return Err(Error::QOutOfRange {
            q: q.as_f64(),
            sup: f64::INFINITY,
        });
    }
    Ok(())
}

/// One step of the forward Riccati recursion at time k.
pub fn riccati_step<T: Scalar>(
    sys: &LdtvSystem<T>,
    k: usize,
    r_k: &DMatrix<T>,
    q: T,
) -> Result<RiccatiStep<T>> {
    check_q_nonnegative(q)?;
    if k > sys.horizon() {
        return Err(Error::IndexOutOfRange {
            index: k,
            max: sys.horizon(),
        });
    }
    let n = sys.state_dim();
    if r_k.nrows() != n || r_k.ncols() != n {
        return Err(Error::DimensionMismatch {
            matrix: "R",
            index: k,
            expected: (n, n),
            found: (r_k.nrows(), r_k.ncols()),
        });
    }
    let a = sys.a(k);
    let b = sys.b(k);
    let c = sys.c(k);
    let d = sys.d(k);
    let mut s = -(c * r_k * c.transpose()) - (d * d.transpose()).scale(q);
    for i in 0..sys.output_dim() {
        s[(i, i)] += T::one();
    }
    let s = linalg::sym_part(&s);
    let Some(factor) = linalg::cholesky(&s) else {
        return Ok(RiccatiStep::NotPositiveDefinite { s });
    };
    let logdet_s = linalg::logdet_from_cholesky(&factor);
    // M_k = -(A R Cᵀ + q B Dᵀ) S⁻¹ via a symmetric solve against S.
    let g = a * r_k * c.transpose() + (b * d.transpose()).scale(q);
    let m = -linalg::cholesky_solve(&factor, &g.transpose()).transpose();
    let r_next = a * r_k * a.transpose() + (b * b.transpose()).scale(q) + &m * &s * m.transpose();
    Ok(RiccatiStep::Step {
        r_next: linalg::sym_part(&r_next),
        m,
        s,
        logdet_s,
    })
}

/// Runs the recursion over the whole horizon from `R_0 = 0`.
///
/// A non-positive-definite `S_k` is recorded in the trace, not raised
/// as an error.
pub fn run_riccati<T: Scalar>(sys: &LdtvSystem<T>, q: T) -> Result<RiccatiTrace<T>> {
    check_q_nonnegative(q)?;
    let steps = sys.horizon() + 1;
    let n = sys.state_dim();
    let mut trace = RiccatiTrace {
        q,
        r: Vec::with_capacity(steps),
        m: Vec::with_capacity(steps),
        s: Vec::with_capacity(steps),
        logdet_s: Vec::with_capacity(steps),
        first_failure: None,
    };
    let mut r_k = DMatrix::<T>::zeros(n, n);
    for k in 0..steps {
        trace.r.push(r_k.clone());
        match riccati_step(sys, k, &r_k, q)? {
            RiccatiStep::Step {
                r_next,
                m,
                s,
                logdet_s,
            } => {
                trace.m.push(m);
                trace.s.push(s);
                trace.logdet_s.push(logdet_s);
                r_k = r_next;
            }
            RiccatiStep::NotPositiveDefinite { .. } => {
                trace.first_failure = Some(k);
                return Ok(trace);
            }
        }
    }
    Ok(trace)
}

fn is_feasible<T: Scalar>(sys: &LdtvSystem<T>, q: T) -> bool {
    run_riccati(sys, q).map(|t| t.all_pd()).unwrap_or(false)
}

/// Both sides of the determinant identity
/// `ln det(I - qΛ) = Σ ln det S_k` and their absolute difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterminantIdentity<T> {
    pub dense_logdet: T,
    pub riccati_logdet: T,
    pub abs_diff: T,
}

/// Cross-validates the Riccati log-determinants against the dense path.
pub fn determinant_identity_check<T: Scalar>(
    sys: &LdtvSystem<T>,
    q: T,
) -> Result<DeterminantIdentity<T>> {
    let trace = run_riccati(sys, q)?;
    trace.require_all_pd()?;
    let gram = dense::gram_operator(sys)?;
    let s = gram.s_of_q(q)?;
    // ln det(I - qΛ) = -ln det S(q).
    let l = linalg::cholesky(&s).ok_or(Error::NotPositiveDefinite {
        what: "S(q)",
        index: None,
    })?;
    let dense_logdet = -linalg::logdet_from_cholesky(&l);
    let riccati_logdet = trace.sum_logdet_s();
    Ok(DeterminantIdentity {
        dense_logdet,
        riccati_logdet,
        abs_diff: (dense_logdet - riccati_logdet).abs(),
    })
}

fn stacked_input_count<T: Scalar>(sys: &LdtvSystem<T>) -> T {
    T::from_f64_approx(sys.stacked_input_dim() as f64)
}

/// Margin of the determinant inequality at a fixed q:
/// `Σ ln det S_k - m(N+1) ln(1 - qγ²) - 2a`, in nats.
pub fn anbrl_margin<T: Scalar>(sys: &LdtvSystem<T>, q: T, gamma: T, a: T) -> Result<T> {
    check_q_nonnegative(q)?;
    let one_minus = T::one() - q * gamma * gamma;
    if one_minus <= T::zero() {
        return Err(Error::QOutOfRange {
            q: q.as_f64(),
            sup: (T::one() / (gamma * gamma)).as_f64(),
        });
    }
    let trace = run_riccati(sys, q)?;
    trace.require_all_pd()?;
    let two = T::one() + T::one();
    Ok(trace.sum_logdet_s() - stacked_input_count(sys) * one_minus.ln() - two * a)
}

/// Candidate interval for q from the inequality structure:
/// `γ⁻²(1 - e^{-2α/m}) <= q < γ⁻²` with `α = a/(N+1)`.
pub fn q_localization<T: Scalar>(gamma: T, a: T, horizon: usize, input_dim: usize) -> (T, T) {
    debug_assert!(gamma > T::zero());
    debug_assert!(a >= T::zero());
    let alpha = a / T::from_f64_approx((horizon + 1) as f64);
    let m = T::from_f64_approx(input_dim as f64);
    let two = T::one() + T::one();
    let q_upper = T::one() / (gamma * gamma);
    let q_lower = q_upper * (T::one() - (-two * alpha / m).exp());
    (q_lower, q_upper)
}

fn validate_gamma_a<T: Scalar>(gamma: T, a: T) -> Result<()> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::InvalidArgument {
            arg: "gamma",
            reason: "threshold must be positive and finite".into(),
        });
    }
    if !(a >= T::zero()) || !a.is_finite() {
        return Err(Error::InvalidArgument {
            arg: "a",
            reason: "anisotropy bound must be nonnegative and finite".into(),
        });
    }
    Ok(())
}

/// Largest q in `(0, cap]` with an all-positive-definite sweep, located
/// by bisection on the monotone feasible set, or `None` when even tiny
/// q fail (cannot happen for `cap` below the feasibility boundary).
fn feasible_sup_below<T: Scalar>(sys: &LdtvSystem<T>, cap: T) -> Option<T> {
    if is_feasible(sys, cap) {
        return Some(cap);
    }
    let mut lo = T::zero();
    let mut hi = cap;
    let half: T = T::from_f64_approx(0.5);
    let width_tol = T::from_f64_approx(1e-14) * cap;
    for _ in 0..BISECTION_MAX_ITER {
        let mid = (lo + hi) * half;
        if is_feasible(sys, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= width_tol {
            break;
        }
    }
    (lo > T::zero()).then_some(lo)
}

struct MarginSearch<T> {
    best_margin: T,
    witness_q: T,
}

/// Golden-section maximization of the margin over `[lo, hi]`; the
/// margin is unimodal in q, rising while the gain map is below γ and
/// falling after.
fn maximize_margin<T: Scalar>(
    sys: &LdtvSystem<T>,
    gamma: T,
    a: T,
    lo: T,
    hi: T,
) -> MarginSearch<T> {
    let eval = |q: T| {
        anbrl_margin(sys, q, gamma, a)
            .unwrap_or_else(|_| T::from_f64_approx(f64::NEG_INFINITY))
    };
    let inv_phi: T = T::from_f64_approx(0.618_033_988_749_894_9);
    let width_tol = T::from_f64_approx(1e-9) * hi;
    let mut a_end = lo;
    let mut b_end = hi;
    let mut c = b_end - inv_phi * (b_end - a_end);
    let mut d = a_end + inv_phi * (b_end - a_end);
    let mut fc = eval(c);
    let mut fd = eval(d);
    for _ in 0..GOLDEN_MAX_ITER {
        if b_end - a_end <= width_tol {
            break;
        }
        if fc < fd {
            a_end = c;
            c = d;
            fc = fd;
            d = a_end + inv_phi * (b_end - a_end);
            fd = eval(d);
        } else {
            b_end = d;
            d = c;
            fd = fc;
            c = b_end - inv_phi * (b_end - a_end);
            fc = eval(c);
        }
    }
    let mut best_margin = fc;
    let mut witness_q = c;
    for (q, f) in [(d, fd), (lo, eval(lo)), (hi, eval(hi))] {
        if f > best_margin {
            best_margin = f;
            witness_q = q;
        }
    }
    MarginSearch {
        best_margin,
        witness_q,
    }
}

fn check_anbrl_with_sup<T: Scalar>(
    sys: &LdtvSystem<T>,
    gamma: T,
    a: T,
    tol: T,
    known_feasible_sup: Option<T>,
) -> Result<AnbrlVerdict<T>> {
    validate_gamma_a(gamma, a)?;
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument {
            arg: "tol",
            reason: "decision tolerance must be positive".into(),
        });
    }
    let (q_lower, q_upper) = q_localization(gamma, a, sys.horizon(), sys.input_dim());
    let alpha = a / T::from_f64_approx((sys.horizon() + 1) as f64);
    let mut verdict = AnbrlVerdict {
        holds: false,
        gamma,
        a,
        alpha,
        q_lower,
        q_upper,
        witness_q: None,
        margin: None,
    };
    if a == T::zero() {
        // At q = 0 the inequality degenerates (both sides vanish for
        // every γ), so the zero-anisotropy bound is decided directly
        // against the scaled Frobenius norm.
        let ell = stacked_input_count(sys);
        let scaled_h2 = gramians::h2_norm_squared(sys).max(T::zero()).sqrt() / ell.sqrt();
        if scaled_h2 <= gamma {
            verdict.holds = true;
            verdict.witness_q = Some(T::zero());
            verdict.margin = Some(T::zero());
        }
        return Ok(verdict);
    }
    let endpoint = T::from_f64_approx(ENDPOINT_MARGIN) * q_upper;
    let cap = q_upper - endpoint;
    let feasible_cap = match known_feasible_sup {
        Some(sup) => {
            let backed_off = sup * (T::one() - T::from_f64_approx(ENDPOINT_MARGIN));
            if backed_off >= cap {
                Some(cap)
            } else {
                Some(backed_off)
            }
        }
        None => feasible_sup_below(sys, cap),
    };
    let Some(hi) = feasible_cap else {
        return Ok(verdict);
    };
    let lo = q_lower.max(endpoint);
    if lo >= hi {
        return Ok(verdict);
    }
    let search = maximize_margin(sys, gamma, a, lo, hi);
    if search.best_margin.is_finite() {
        verdict.margin = Some(search.best_margin);
        verdict.witness_q = Some(search.witness_q);
        verdict.holds = search.best_margin >= -tol;
    }
    Ok(verdict)
}

/// Decides `|||F|||_a <= γ` by searching the candidate q-interval for a
/// point where the determinant inequality holds.
///
/// The margin is maximized by golden-section over the intersection of
/// the localization interval with the feasible set; the bound holds
/// when the best margin is at least `-tol`.
pub fn check_anbrl<T: Scalar>(
    sys: &LdtvSystem<T>,
    gamma: T,
    a: T,
    tol: T,
) -> Result<AnbrlVerdict<T>> {
    check_anbrl_with_sup(sys, gamma, a, tol, None)
}

/// Operator norm via the Riccati feasibility boundary: all `S_k` are
/// positive definite iff `q < ‖F‖_∞⁻²`, so `‖F‖_∞ = q_sup^{-1/2}`.
///
/// The zero system (every q feasible) returns 0.
pub fn hinf_norm_riccati<T: Scalar>(sys: &LdtvSystem<T>, tol: T) -> Result<T> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument {
            arg: "tol",
            reason: "tolerance must be positive".into(),
        });
    }
    if gramians::h2_norm_squared(sys) == T::zero() {
        return Ok(T::zero());
    }
    let four = T::from_f64_approx(4.0);
    let huge = T::from_f64_approx(1e300);
    let mut hi = T::one();
    let mut lo = T::zero();
    while is_feasible(sys, hi) {
        lo = hi;
        hi *= four;
        if hi > huge {
            // Norm below ~1e-150: numerically indistinguishable from zero.
            return Ok(T::zero());
        }
    }
    let half: T = T::from_f64_approx(0.5);
    let width_tol = T::from_f64_approx(1e-15);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = (lo + hi) * half;
        if is_feasible(sys, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= width_tol * hi {
            break;
        }
    }
    Ok(T::one() / ((lo + hi) * half).sqrt())
}

/// The a-anisotropic norm from the Riccati side alone: bisection on γ
/// with the bounded real lemma as the decision oracle.
pub fn anisotropic_norm_riccati<T: Scalar>(sys: &LdtvSystem<T>, a: T, tol: T) -> Result<T> {
    if !(a >= T::zero()) || !a.is_finite() {
        return Err(Error::InvalidArgument {
            arg: "a",
            reason: "anisotropy bound must be nonnegative and finite".into(),
        });
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument {
            arg: "tol",
            reason: "tolerance must be positive".into(),
        });
    }
    let ell = stacked_input_count(sys);
    let scaled_h2 = gramians::h2_norm_squared(sys).max(T::zero()).sqrt() / ell.sqrt();
    if a == T::zero() {
        return Ok(scaled_h2);
    }
    let hinf = hinf_norm_riccati(sys, tol)?;
    if hinf == T::zero() {
        return Ok(T::zero());
    }
    let decision_tol = T::from_f64_approx(DECISION_TOLERANCE);
    let q_sup = T::one() / (hinf * hinf);
    let holds_at = |gamma: T| -> Result<bool> {
        Ok(check_anbrl_with_sup(sys, gamma, a, decision_tol, Some(q_sup))?.holds)
    };
    let mut lo = scaled_h2;
    let mut hi = hinf;
    if hi - lo <= tol {
        return Ok(hi);
    }
    if !holds_at(hi)? {
        // The bound saturates at the operator norm faster than the
        // representable margin; the norm is hinf to within tolerance.
        return Ok(hi);
    }
    if holds_at(lo)? {
        return Ok(lo);
    }
    let half: T = T::from_f64_approx(0.5);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = (lo + hi) * half;
        if holds_at(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    Ok((lo + hi) * half)
}

/// Classical bounded real lemma: `‖F‖_∞ < γ` iff the recursion at
/// `q = γ⁻²` keeps every `S_k` positive definite.
pub fn brl_check<T: Scalar>(sys: &LdtvSystem<T>, gamma: T) -> Result<bool> {
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(Error::InvalidArgument {
            arg: "gamma",
            reason: "threshold must be positive and finite".into(),
        });
    }
    Ok(is_feasible(sys, T::one() / (gamma * gamma)))
}

/// Builds the spectral factor `H = (A, M √S, C, √S)` at a feasible q.
pub fn spectral_factor<T: Scalar>(sys: &LdtvSystem<T>, q: T) -> Result<SpectralFactor<T>> {
    let trace = run_riccati(sys, q)?;
    trace.require_all_pd()?;
    let steps = sys.horizon() + 1;
    let mut a = Vec::with_capacity(steps);
    let mut b = Vec::with_capacity(steps);
    let mut c = Vec::with_capacity(steps);
    let mut d = Vec::with_capacity(steps);
    for k in 0..steps {
        let root = linalg::symmetric_sqrt(trace.s(k));
        a.push(sys.a(k).clone());
        b.push(trace.m(k) * &root);
        c.push(sys.c(k).clone());
        d.push(root);
    }
    Ok(SpectralFactor {
        system: LdtvSystem::new(a, b, c, d)?,
        q,
    })
}

/// Max-abs residual of the factorization identity
/// `I - q F_{0:N} F_{0:N}ᵀ = H_{0:N} H_{0:N}ᵀ`, both sides assembled
/// densely.
pub fn verify_factorization<T: Scalar>(sys: &LdtvSystem<T>, q: T) -> Result<T> {
    let factor = spectral_factor(sys, q)?;
    let f = sys.assemble_stacked(0, sys.horizon())?;
    let h = factor.system().assemble_stacked(0, sys.horizon())?;
    let mut residual =
        (f.matrix() * f.matrix().transpose()).scale(q) + h.matrix() * h.matrix().transpose();
    for i in 0..residual.nrows() {
        residual[(i, i)] -= T::one();
    }
    Ok(linalg::max_abs(&residual))
}

/// Assembles the outer completion `Ψ = [√q F  H]` as an
/// `(m+r)`-input, r-output system.
pub fn build_psi<T: Scalar>(sys: &LdtvSystem<T>, q: T) -> Result<LdtvSystem<T>> {
    let factor = spectral_factor(sys, q)?;
    let sqrt_q = q.sqrt();
    let n = sys.state_dim();
    let m = sys.input_dim();
    let r = sys.output_dim();
    let steps = sys.horizon() + 1;
    let mut a = Vec::with_capacity(steps);
    let mut b = Vec::with_capacity(steps);
    let mut c = Vec::with_capacity(steps);
    let mut d = Vec::with_capacity(steps);
    for k in 0..steps {
        let mut bk = DMatrix::<T>::zeros(n, m + r);
        bk.view_mut((0, 0), (n, m))
            .copy_from(&sys.b(k).scale(sqrt_q));
        bk.view_mut((0, m), (n, r)).copy_from(factor.system().b(k));
        let mut dk = DMatrix::<T>::zeros(r, m + r);
        dk.view_mut((0, 0), (r, m))
            .copy_from(&sys.d(k).scale(sqrt_q));
        dk.view_mut((0, m), (r, r)).copy_from(factor.system().d(k));
        a.push(sys.a(k).clone());
        b.push(bk);
        c.push(sys.c(k).clone());
        d.push(dk);
    }
    LdtvSystem::new(a, b, c, d)
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

    fn e1_astar() -> f64 {
        -0.5 * (8.0f64 / 9.0).ln()
    }

    #[test]
    fn riccati_steps_of_e1_at_half() {
        let sys = e1();
        let r0 = DMatrix::zeros(1, 1);
        let RiccatiStep::Step { r_next, m, s, .. } = riccati_step(&sys, 0, &r0, 0.5).unwrap()
        else {
            panic!("step 0 feasible");
        };
        assert_relative_eq!(s[(0, 0)], 1.0);
        assert_relative_eq!(m[(0, 0)], 0.0);
        assert_relative_eq!(r_next[(0, 0)], 0.5);
        let RiccatiStep::Step { r_next, m, s, .. } = riccati_step(&sys, 1, &r_next, 0.5).unwrap()
        else {
            panic!("step 1 feasible");
        };
        assert_relative_eq!(s[(0, 0)], 0.5);
        assert_relative_eq!(m[(0, 0)], -0.5);
        assert_relative_eq!(r_next[(0, 0)], 0.75);
    }

    #[test]
    fn zero_q_collapses_the_recursion() {
        let sys = e1();
        let trace = run_riccati(&sys, 0.0).unwrap();
        assert!(trace.all_pd());
        for k in 0..2 {
            assert_relative_eq!(trace.s(k)[(0, 0)], 1.0);
            assert_relative_eq!(trace.m(k)[(0, 0)], 0.0);
            assert_relative_eq!(trace.r(k)[(0, 0)], 0.0);
        }
        assert_relative_eq!(trace.sum_logdet_s(), 0.0);
    }

    #[test]
    fn trace_of_e1_at_half() {
        let trace = run_riccati(&e1(), 0.5).unwrap();
        assert!(trace.all_pd());
        assert_relative_eq!(trace.logdet_s()[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(trace.logdet_s()[1], 0.5f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn infeasible_q_truncates_the_trace() {
        let trace = run_riccati(&e1(), 1.0).unwrap();
        assert!(!trace.all_pd());
        assert_eq!(trace.first_failure(), Some(1));
        assert_eq!(trace.logdet_s().len(), 1);
        assert!(run_riccati(&e1(), -0.5).is_err());
    }

    #[test]
    fn determinant_identity_on_e1() {
        let check = determinant_identity_check(&e1(), 0.5).unwrap();
        assert_relative_eq!(check.dense_logdet, 0.5f64.ln(), epsilon = 1e-12);
        assert!(check.abs_diff < 1e-12);
        let at_zero = determinant_identity_check(&e1(), 0.0).unwrap();
        assert_relative_eq!(at_zero.dense_logdet, 0.0, epsilon = 1e-14);
        assert_relative_eq!(at_zero.riccati_logdet, 0.0, epsilon = 1e-14);
        assert!(matches!(
            determinant_identity_check(&e1(), 1.0),
            Err(Error::NotPositiveDefinite { index: Some(1), .. })
        ));
    }

    #[test]
    fn margin_vanishes_on_the_norm_curve() {
        let sys = e1();
        let gamma = (2.0f64 / 3.0).sqrt();
        let margin = anbrl_margin(&sys, 0.5, gamma, e1_astar()).unwrap();
        assert!(margin.abs() < 1e-9, "margin = {margin}");
        // With the rounded fixture values the margin stays within 1e-6.
        let rounded = anbrl_margin(&sys, 0.5, 0.816497, 0.058892).unwrap();
        assert!(rounded.abs() < 1e-6, "margin = {rounded}");
    }

    #[test]
    fn margin_signs_and_range_errors() {
        let sys = e1();
        assert_relative_eq!(anbrl_margin(&sys, 0.0, 0.9, 0.0).unwrap(), 0.0);
        let above = anbrl_margin(&sys, 0.5, 0.9, 0.058892).unwrap();
        assert!(above > 0.0);
        assert!(matches!(
            anbrl_margin(&sys, 2.0, 0.9, 0.0),
            Err(Error::QOutOfRange { .. })
        ));
        // q = 1.1 passes the gamma range check but defeats S_1 = 1 - q.
        assert!(matches!(
            anbrl_margin(&sys, 1.1, 0.9, 0.1),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn margin_agrees_with_dense_decision_function() {
        let sys = e1();
        let gram = dense::gram_operator(&sys).unwrap();
        for q in [0.1, 0.3, 0.5, 0.8] {
            for gamma in [0.75, 0.9] {
                let a = 0.02;
                let margin = anbrl_margin(&sys, q, gamma, a).unwrap();
                let fa = gram.fa(q, gamma).unwrap();
                assert_relative_eq!(margin, 2.0 * (fa - a), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn q_localization_examples() {
        let (lo, hi) = q_localization(0.9, 0.0, 3, 2);
        assert_relative_eq!(lo, 0.0);
        assert_relative_eq!(hi, 1.0 / 0.81, epsilon = 1e-12);
        let (lo, hi) = q_localization(0.816497, 0.058892, 1, 1);
        assert_relative_eq!(lo, 0.0858, epsilon = 1e-4);
        assert_relative_eq!(hi, 1.5, epsilon = 1e-5);
        // Large per-step anisotropy pins q against the upper end.
        let (lo, hi) = q_localization(2.0, 800.0, 3, 1);
        assert!(hi - lo < 1e-10 * hi);
    }

    #[test]
    fn check_anbrl_on_e1() {
        let sys = e1();
        let astar = e1_astar();
        let hold = check_anbrl(&sys, 0.9, astar, 1e-9).unwrap();
        assert!(hold.holds);
        let witness = hold.witness_q.unwrap();
        assert!(witness >= hold.q_lower && witness < hold.q_upper);
        assert!(hold.margin.unwrap() > 0.0);
        let fail = check_anbrl(&sys, 0.75, astar, 1e-9).unwrap();
        assert!(!fail.holds);
        // Any threshold above the operator norm holds for any a.
        let above = check_anbrl(&sys, 1.2, 5.0, 1e-9).unwrap();
        assert!(above.holds);
        assert!(above.witness_q.unwrap() < above.q_upper);
    }

    #[test]
    fn check_anbrl_zero_anisotropy_compares_scaled_h2() {
        let sys = e1();
        let hold = check_anbrl(&sys, 0.8, 0.0, 1e-9).unwrap();
        assert!(hold.holds);
        assert_eq!(hold.witness_q, Some(0.0));
        let fail = check_anbrl(&sys, 0.7, 0.0, 1e-9).unwrap();
        assert!(!fail.holds);
        assert_eq!(fail.witness_q, None);
    }

    #[test]
    fn check_anbrl_validates_arguments() {
        let sys = e1();
        assert!(check_anbrl(&sys, 0.0, 0.1, 1e-9).is_err());
        assert!(check_anbrl(&sys, 0.9, -0.1, 1e-9).is_err());
        assert!(check_anbrl(&sys, 0.9, 0.1, 0.0).is_err());
    }

    #[test]
    fn hinf_norm_riccati_values() {
        assert_relative_eq!(hinf_norm_riccati(&e1(), 1e-9).unwrap(), 1.0, epsilon = 1e-9);
        let passthrough = LdtvSystem::from_constant(
            dmatrix![0.0],
            dmatrix![0.0, 0.0],
            dmatrix![0.0; 0.0],
            DMatrix::identity(2, 2),
            2,
        )
        .unwrap();
        assert_relative_eq!(
            hinf_norm_riccati(&passthrough, 1e-9).unwrap(),
            1.0,
            epsilon = 1e-9
        );
        let scaled = LdtvSystem::from_constant(
            dmatrix![0.5],
            dmatrix![1.0],
            dmatrix![3.0],
            dmatrix![0.0],
            1,
        )
        .unwrap();
        assert_relative_eq!(hinf_norm_riccati(&scaled, 1e-9).unwrap(), 3.0, epsilon = 1e-8);
        let zero = LdtvSystem::from_constant(
            dmatrix![0.5],
            dmatrix![1.0],
            dmatrix![0.0],
            dmatrix![0.0],
            1,
        )
        .unwrap();
        assert_eq!(hinf_norm_riccati(&zero, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn anisotropic_norm_riccati_on_e1() {
        let sys = e1();
        assert_relative_eq!(
            anisotropic_norm_riccati(&sys, 0.0, 1e-8).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            anisotropic_norm_riccati(&sys, e1_astar(), 1e-8).unwrap(),
            (2.0f64 / 3.0).sqrt(),
            epsilon = 1e-6
        );
        let saturated = anisotropic_norm_riccati(&sys, 50.0, 1e-8).unwrap();
        assert!((saturated - 1.0).abs() < 1e-3, "norm = {saturated}");
    }

    #[test]
    fn brl_check_on_e1() {
        let sys = e1();
        assert!(brl_check(&sys, 1.1).unwrap());
        assert!(!brl_check(&sys, 1.0).unwrap());
        assert!(!brl_check(&sys, 0.9).unwrap());
        assert!(brl_check(&sys, 0.0).is_err());
    }

    #[test]
    fn spectral_factor_of_e1() {
        let factor = spectral_factor(&e1(), 0.5).unwrap();
        let h = factor.system();
        assert_relative_eq!(h.b(0)[(0, 0)], 0.0, epsilon = 1e-14);
        assert_relative_eq!(h.b(1)[(0, 0)], -0.5 * 0.5f64.sqrt(), epsilon = 1e-13);
        assert_relative_eq!(h.d(0)[(0, 0)], 1.0, epsilon = 1e-14);
        assert_relative_eq!(h.d(1)[(0, 0)], 0.5f64.sqrt(), epsilon = 1e-13);
        let stacked = h.assemble_stacked(0, 1).unwrap();
        assert_relative_eq!(
            stacked.matrix().clone(),
            dmatrix![1.0, 0.0; 0.0, 0.5f64.sqrt()],
            epsilon = 1e-13
        );
        assert!(spectral_factor(&e1(), 1.2).is_err());
    }

    #[test]
    fn spectral_factor_at_zero_q_is_identity() {
        let factor = spectral_factor(&e1(), 0.0).unwrap();
        let h = factor.system().assemble_stacked(0, 1).unwrap();
        assert_relative_eq!(h.matrix().clone(), DMatrix::identity(2, 2), epsilon = 1e-14);
    }

    #[test]
    fn factorization_residual_of_e1() {
        assert!(verify_factorization(&e1(), 0.5).unwrap() < 1e-14);
        assert!(verify_factorization(&e1(), 0.0).unwrap() < 1e-14);
    }

    #[test]
    fn psi_is_outer_on_e1() {
        let psi = build_psi(&e1(), 0.5).unwrap();
        assert_eq!(psi.input_dim(), 2);
        assert_eq!(psi.output_dim(), 1);
        let report = gramians::is_outer(&psi, 1e-8).unwrap();
        assert!(report.outer, "worst residual {}", report.worst_residual());
        let stacked = psi.assemble_stacked(0, 1).unwrap();
        let gram = stacked.matrix() * stacked.matrix().transpose();
        assert_relative_eq!(gram, DMatrix::identity(2, 2), epsilon = 1e-12);
    }
}
