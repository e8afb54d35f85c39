//! Quantum Fisher information for the source-separation estimate.
//!
//! The information splits into two physically distinct pieces: the Fisher
//! information of the measured photon-count distributions (`prob_term`) and
//! the information carried by how the mode shapes themselves rotate with the
//! separation (`op_term`). Closed forms for the noiseless and dark-count
//! cases are provided independently of the two-term decomposition so each
//! route can check the other.

use crate::error::{Error, Result};
use crate::photostat::{check_functionals, prob_fisher_term};
use crate::psf::OverlapFunctionals;
use crate::scalar::Scalar;

/// Quantum Fisher information at one separation, split into its sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiBreakdown<T> {
    /// `prob_term + op_term`.
    pub total: T,
    /// Contribution of the photon-count statistics.
    pub prob_term: T,
    /// Contribution of the separation-dependence of the mode shapes.
    pub op_term: T,
    /// `total * rayleigh_length^2 / (2 * eta_n)`, the dimensionless form in
    /// which the ideal value plateaus at `delta_k2 * rayleigh_length^2`.
    pub normalized: T,
}

/// Mode-shape contribution `2 eta_n (delta_k2 - gamma^2 / (1 - delta^2))`.
///
/// At `|delta| = 1` the sources are indistinguishable in overlap; the
/// derivative `gamma` must vanish there, and the term takes its limiting
/// value `2 eta_n delta_k2`. A unit overlap paired with a nonzero `gamma`
/// is inconsistent input and is rejected.
pub fn operator_term<T: Scalar>(eta_n: T, f: &OverlapFunctionals<T>) -> Result<T> {
    check_eta_n("operator_term", eta_n)?;
    check_functionals("operator_term", f)?;
    let two = T::one() + T::one();
    if f.delta.abs() == T::one() {
        if f.gamma == T::zero() {
            return Ok(two * eta_n * f.delta_k2);
        }
        return Err(Error::domain(
            "operator_term",
            format!("|delta| = 1 requires gamma = 0, got gamma = {}", f.gamma),
        ));
    }
    let complement = (T::one() - f.delta) * (T::one() + f.delta);
    Ok(two * eta_n * (f.delta_k2 - f.gamma * f.gamma / complement))
}

/// Full quantum Fisher information via the two-term decomposition.
///
/// `rayleigh_length` only scales the `normalized` field; `total` is reported
/// in the inverse-squared length units of the functionals themselves.
pub fn qfi_exact<T: Scalar>(
    eta_n: T,
    epsilon: T,
    f: &OverlapFunctionals<T>,
    rayleigh_length: T,
) -> Result<QfiBreakdown<T>> {
    if !(rayleigh_length.is_finite() && rayleigh_length > T::zero()) {
        return Err(Error::domain(
            "qfi_exact",
            format!("rayleigh_length must be positive, got {rayleigh_length}"),
        ));
    }
    let prob_term = prob_fisher_term(eta_n, epsilon, f)?;
    let op_term = operator_term(eta_n, f)?;
    let total = prob_term + op_term;
    let two = T::one() + T::one();
    let normalized = if eta_n == T::zero() {
        T::zero()
    } else {
        total * rayleigh_length * rayleigh_length / (two * eta_n)
    };
    Ok(QfiBreakdown {
        total,
        prob_term,
        op_term,
        normalized,
    })
}

/// Closed form for the noiseless (`epsilon = 0`) information:
/// `2 eta_n (delta_k2 - eta_n (1 + eta_n) gamma^2 / ((1 + eta_n)^2 - delta^2 eta_n^2))`.
///
/// Unlike the decomposition this expression never divides by `1 - delta^2`,
/// so it stays finite through `|delta| = 1`.
pub fn qfi_ideal_closed_form<T: Scalar>(eta_n: T, f: &OverlapFunctionals<T>) -> Result<T> {
    check_eta_n("qfi_ideal_closed_form", eta_n)?;
    check_functionals("qfi_ideal_closed_form", f)?;
    let two = T::one() + T::one();
    if f.gamma == T::zero() {
        return Ok(two * eta_n * f.delta_k2);
    }
    let succ = T::one() + eta_n;
    let da = f.delta * eta_n;
    let denom = (succ - da) * (succ + da);
    Ok(two * eta_n * (f.delta_k2 - eta_n * succ * f.gamma * f.gamma / denom))
}

/// Closed form for the dark-count information, written with
/// `r = epsilon / eta_n + 1` and `t = eta_n + epsilon + 1`:
///
/// `2 eta_n (delta_k2 - gamma^2 / (1 - delta^2))
///  + 2 eta_n gamma^2 (r t + delta^2 eta_n) / ((r^2 - delta^2)(t^2 - delta^2 eta_n^2))`.
///
/// Singular at `|delta| = 1`; use [`qfi_exact`] or [`qfi_ideal_closed_form`]
/// to cover that edge.
pub fn qfi_noisy_closed_form<T: Scalar>(
    eta_n: T,
    epsilon: T,
    f: &OverlapFunctionals<T>,
) -> Result<T> {
    check_eta_n("qfi_noisy_closed_form", eta_n)?;
    if !epsilon.is_finite() || epsilon < T::zero() {
        return Err(Error::domain(
            "qfi_noisy_closed_form",
            format!("epsilon must be finite and non-negative, got {epsilon}"),
        ));
    }
    check_functionals("qfi_noisy_closed_form", f)?;
    let two = T::one() + T::one();
    if eta_n == T::zero() {
        return Ok(T::zero());
    }
    if f.gamma == T::zero() {
        return Ok(two * eta_n * f.delta_k2);
    }
    if f.delta.abs() == T::one() {
        return Err(Error::domain(
            "qfi_noisy_closed_form",
            "expression is singular at |delta| = 1; evaluate via qfi_exact",
        ));
    }
    let g2 = f.gamma * f.gamma;
    let complement = (T::one() - f.delta) * (T::one() + f.delta);
    let r = epsilon / eta_n + T::one();
    let t = eta_n + epsilon + T::one();
    let da = f.delta * eta_n;
    let denom = (r - f.delta) * (r + f.delta) * (t - da) * (t + da);
    let base = two * eta_n * (f.delta_k2 - g2 / complement);
    let correction = two * eta_n * g2 * (r * t + f.delta * da) / denom;
    Ok(base + correction)
}

/// Bright-source limit `delta_k2 - gamma^2 / (1 - delta^2)` of the
/// per-photon information `total / (2 eta_n)`; also its vanishing-SNR limit.
pub fn classical_limit<T: Scalar>(f: &OverlapFunctionals<T>) -> Result<T> {
    check_functionals("classical_limit", f)?;
    if f.delta.abs() == T::one() {
        if f.gamma == T::zero() {
            return Ok(f.delta_k2);
        }
        return Err(Error::domain(
            "classical_limit",
            format!("|delta| = 1 requires gamma = 0, got gamma = {}", f.gamma),
        ));
    }
    let complement = (T::one() - f.delta) * (T::one() + f.delta);
    Ok(f.delta_k2 - f.gamma * f.gamma / complement)
}

/// Cramer-Rao error floor `1 / sqrt(copies * qfi)` for `copies` independent
/// repetitions. Infinite information yields a zero floor; non-positive
/// information admits no unbiased estimate at all and is rejected.
pub fn cramer_rao_error<T: Scalar>(qfi: T, copies: u64) -> Result<T> {
    if copies == 0 {
        return Err(Error::domain(
            "cramer_rao_error",
            "copies must be at least 1",
        ));
    }
    if qfi.is_nan() {
        return Err(Error::domain("cramer_rao_error", "qfi is NaN"));
    }
    if qfi == T::infinity() {
        return Ok(T::zero());
    }
    if qfi <= T::zero() {
        return Err(Error::domain(
            "cramer_rao_error",
            format!("qfi must be positive for a finite error bound, got {qfi}"),
        ));
    }
    let n = crate::scalar::lit::<T>(copies as f64);
    Ok(T::one() / (n * qfi).sqrt())
}

fn check_eta_n<T: Scalar>(op: &'static str, eta_n: T) -> Result<()> {
    if !eta_n.is_finite() || eta_n < T::zero() {
        return Err(Error::domain(
            op,
            format!("eta_n must be finite and non-negative, got {eta_n}"),
        ));
    }
    Ok(())
}
