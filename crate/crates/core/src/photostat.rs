//! Photon-counting statistics of the two detected image modes.
//!
//! Light from two equally bright thermal sources, collected through the
//! imaging system, populates a symmetric and an antisymmetric detection mode.
//! Both are thermally distributed with means `(1 ± delta) * eta_n`; detector
//! dark counts add a constant `epsilon` to each mean. This module provides
//! the geometric number distribution of such a mode, the exact measured
//! Fisher-information contribution of the pair, and a brute-force series
//! evaluation of the same quantity kept around purely as a cross-check.

use crate::error::{Error, Result};
use crate::psf::{OverlapFunctionals, PointSpreadFunction, QuadratureConfig};
use crate::scalar::{as_f64, lit, Scalar};

/// Probability mass the series oracle may leave beyond its truncation index.
const ORACLE_TAIL_TOL: f64 = 1e-10;

/// Physical configuration of one estimation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceScenario<T> {
    /// Mean detected photon number per source, `eta * N`.
    pub eta_n: T,
    /// Dark counts added to each mode mean.
    pub epsilon: T,
    /// Transverse separation of the two sources (length units).
    pub separation: T,
    /// Rayleigh length of the imaging system (length units).
    pub rayleigh_length: T,
}

impl<T: Scalar> SourceScenario<T> {
    /// Validates and builds a scenario.
    pub fn new(eta_n: T, epsilon: T, separation: T, rayleigh_length: T) -> Result<Self> {
        for (name, v, strict) in [
            ("eta_n", eta_n, false),
            ("epsilon", epsilon, false),
            ("separation", separation, false),
            ("rayleigh_length", rayleigh_length, true),
        ] {
            if !v.is_finite() || v < T::zero() || (strict && v == T::zero()) {
                return Err(Error::domain(
                    "SourceScenario::new",
                    format!(
                        "{name} must be finite and {}, got {v}",
                        if strict { "positive" } else { "non-negative" }
                    ),
                ));
            }
        }
        Ok(SourceScenario {
            eta_n,
            epsilon,
            separation,
            rayleigh_length,
        })
    }

    /// Signal-to-noise ratio `eta_n / epsilon`; `None` for a noiseless
    /// detector, where the ratio is not defined.
    pub fn snr(&self) -> Option<T> {
        (self.epsilon > T::zero()).then(|| self.eta_n / self.epsilon)
    }
}

/// Mean photon numbers of the symmetric (`plus`) and antisymmetric (`minus`)
/// detection modes, before dark counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMeans<T> {
    /// Mean of the symmetric mode, `(1 + delta) * eta_n`.
    pub plus: T,
    /// Mean of the antisymmetric mode, `(1 - delta) * eta_n`.
    pub minus: T,
}

/// Noiseless mode means for a given overlap.
pub fn mode_means<T: Scalar>(eta_n: T, delta: T) -> Result<ModeMeans<T>> {
    if !eta_n.is_finite() || eta_n < T::zero() {
        return Err(Error::domain(
            "mode_means",
            format!("eta_n must be non-negative, got {eta_n}"),
        ));
    }
    if !delta.is_finite() || delta.abs() > T::one() {
        return Err(Error::domain(
            "mode_means",
            format!("|delta| must not exceed 1, got {delta}"),
        ));
    }
    Ok(ModeMeans {
        plus: (T::one() + delta) * eta_n,
        minus: (T::one() - delta) * eta_n,
    })
}

/// Thermal (geometric) number distribution with the given mean:
/// `p(n) = mean^n / (mean + 1)^(n + 1)`.
pub fn pmf<T: Scalar>(mean: T, n: u32) -> Result<T> {
    if !mean.is_finite() || mean < T::zero() {
        return Err(Error::domain(
            "pmf",
            format!("mean must be non-negative, got {mean}"),
        ));
    }
    if mean == T::zero() {
        return Ok(if n == 0 { T::one() } else { T::zero() });
    }
    let ratio = mean / (mean + T::one());
    Ok(ratio.powi(n as i32) / (mean + T::one()))
}

/// Exact measured-statistics contribution to the Fisher information,
/// `sum_± (eta_n * gamma)^2 / (mu_± (mu_± + 1))` with
/// `mu_± = (1 ± delta) * eta_n + epsilon`.
///
/// Returns `0` when `gamma = 0` (the mode means are then stationary in `s`).
/// A mode mean of exactly zero with `gamma != 0` makes the contribution
/// diverge; that degenerate case is reported as `+infinity` rather than an
/// error so parameter sweeps can render the point.
pub fn prob_fisher_term<T: Scalar>(eta_n: T, epsilon: T, f: &OverlapFunctionals<T>) -> Result<T> {
    check_rates("prob_fisher_term", eta_n, epsilon)?;
    check_functionals("prob_fisher_term", f)?;
    let d_mu = eta_n * f.gamma;
    let num = d_mu * d_mu;
    if num == T::zero() {
        return Ok(T::zero());
    }
    let mut total = T::zero();
    for sign in [T::one(), -T::one()] {
        let mu = (T::one() + sign * f.delta) * eta_n + epsilon;
        if mu == T::zero() {
            return Ok(T::infinity());
        }
        total = total + num / (mu * (mu + T::one()));
    }
    Ok(total)
}

/// Brute-force series evaluation of [`prob_fisher_term`], used only to
/// cross-check it.
///
/// Builds the mode distributions at separations `s - ds`, `s`, `s + ds`
/// from the profile and sums `p(n) * ((ln p(n))')^2` over `n <= n_max`,
/// differencing the log-probabilities centrally. Fails with
/// [`Error::TruncationWarning`] when the geometric tail beyond `n_max`
/// carries more than `1e-10` probability in either mode.
#[allow(clippy::too_many_arguments)]
pub fn series_oracle_fisher<T: Scalar>(
    eta_n: T,
    epsilon: T,
    psf: &PointSpreadFunction<T>,
    s: T,
    cfg: &QuadratureConfig<T>,
    n_max: usize,
    ds: T,
) -> Result<T> {
    check_rates("series_oracle_fisher", eta_n, epsilon)?;
    if !(ds.is_finite() && ds > T::zero()) {
        return Err(Error::domain(
            "series_oracle_fisher",
            format!("ds must be positive, got {ds}"),
        ));
    }
    if n_max == 0 {
        return Err(Error::domain(
            "series_oracle_fisher",
            "n_max must be at least 1",
        ));
    }
    // The overlap is even in s, so displaced separations can be folded back
    // into the non-negative domain.
    let delta_at = |sep: T| psf.overlap_delta(sep.abs(), cfg);
    let d_lo = delta_at(s - ds)?;
    let d_mid = delta_at(s)?;
    let d_hi = delta_at(s + ds)?;

    let mean = |delta: T, sign: T| (T::one() + sign * delta) * eta_n + epsilon;
    let two_ds = lit::<T>(2.0) * ds;
    let tail_tol = lit::<T>(ORACLE_TAIL_TOL);

    let mut total = T::zero();
    for sign in [T::one(), -T::one()] {
        let m_lo = mean(d_lo, sign);
        let m_mid = mean(d_mid, sign);
        let m_hi = mean(d_hi, sign);
        let worst = m_lo.max(m_mid).max(m_hi);
        let tail = tail_mass(worst, n_max);
        if tail > tail_tol {
            return Err(Error::TruncationWarning {
                n_max,
                tail_mass: as_f64(tail),
                tolerance: ORACLE_TAIL_TOL,
            });
        }
        for n in 0..=n_max {
            let p = pmf_large_n(m_mid, n);
            if p == T::zero() {
                continue;
            }
            let score = (ln_pmf(m_hi, n) - ln_pmf(m_lo, n)) / two_ds;
            total = total + p * score * score;
        }
    }
    Ok(total)
}

/// Geometric tail mass beyond `n_max`: `(m / (m + 1))^(n_max + 1)`.
fn tail_mass<T: Scalar>(mean: T, n_max: usize) -> T {
    if mean == T::zero() {
        return T::zero();
    }
    let ratio = mean / (mean + T::one());
    (lit::<T>((n_max + 1) as f64) * ratio.ln()).exp()
}

/// `pmf` in log space so large `n` cannot underflow pairwise products.
fn pmf_large_n<T: Scalar>(mean: T, n: usize) -> T {
    if mean == T::zero() {
        return if n == 0 { T::one() } else { T::zero() };
    }
    ln_pmf(mean, n).exp()
}

fn ln_pmf<T: Scalar>(mean: T, n: usize) -> T {
    if mean == T::zero() {
        return if n == 0 { T::zero() } else { T::neg_infinity() };
    }
    let succ = mean + T::one();
    lit::<T>(n as f64) * (mean / succ).ln() - succ.ln()
}

fn check_rates<T: Scalar>(op: &'static str, eta_n: T, epsilon: T) -> Result<()> {
    for (name, v) in [("eta_n", eta_n), ("epsilon", epsilon)] {
        if !v.is_finite() || v < T::zero() {
            return Err(Error::domain(
                op,
                format!("{name} must be finite and non-negative, got {v}"),
            ));
        }
    }
    Ok(())
}

pub(crate) fn check_functionals<T: Scalar>(
    op: &'static str,
    f: &OverlapFunctionals<T>,
) -> Result<()> {
    if !f.delta.is_finite() || f.delta.abs() > T::one() {
        return Err(Error::domain(
            op,
            format!("|delta| must not exceed 1, got {}", f.delta),
        ));
    }
    if !f.gamma.is_finite() {
        return Err(Error::domain(
            op,
            format!("gamma must be finite, got {}", f.gamma),
        ));
    }
    if !f.delta_k2.is_finite() || f.delta_k2 < T::zero() {
        return Err(Error::domain(
            op,
            format!("delta_k2 must be non-negative, got {}", f.delta_k2),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psf::PointSpreadFunction;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn f(delta: f64, gamma: f64) -> OverlapFunctionals<f64> {
        OverlapFunctionals {
            delta,
            gamma,
            delta_k2: 0.25,
        }
    }

    #[test]
    fn mode_means_split_the_detected_flux() {
        let m = mode_means(1.0, 0.5).unwrap();
        assert_eq!((m.plus, m.minus), (1.5, 0.5));
        let m = mode_means(0.01, 1.0).unwrap();
        assert_eq!((m.plus, m.minus), (0.02, 0.0));
        assert!(mode_means(1.0, 1.2).is_err());
        assert!(mode_means(-0.1, 0.0).is_err());
    }

    #[test]
    fn scenario_validates_and_reports_snr() {
        let sc = SourceScenario::new(0.01, 1e-4, 1.0, 1.0).unwrap();
        assert_relative_eq!(sc.snr().unwrap(), 100.0);
        let noiseless = SourceScenario::new(0.01, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(noiseless.snr(), None);
        assert!(SourceScenario::new(0.01, 0.0, 1.0, 0.0).is_err());
        assert!(SourceScenario::new(-1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn pmf_reference_values() {
        assert_eq!(pmf(0.0, 0).unwrap(), 1.0);
        assert_eq!(pmf(0.0, 3).unwrap(), 0.0);
        assert_relative_eq!(pmf(1.0, 1).unwrap(), 0.25, max_relative = 1e-15);
        assert_relative_eq!(
            pmf(0.11, 2).unwrap(),
            0.008_847_415_713_741_499,
            max_relative = 1e-13
        );
        assert!(pmf(-0.5, 0).is_err());
    }

    #[test]
    fn pmf_sums_to_one_up_to_geometric_tail() {
        for mean in [0.11, 1.0, 7.3] {
            let partial: f64 = (0..=400).map(|n| pmf(mean, n).unwrap()).sum();
            let tail = tail_mass(mean, 400usize);
            assert_abs_diff_eq!(partial + tail, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fisher_term_reference_values() {
        // Flat overlap: both modes at mean eta_n, score scale gamma = 1.
        let v = prob_fisher_term(0.01, 0.0, &f(0.0, 1.0)).unwrap();
        assert_relative_eq!(v, 0.019_801_980_198_019_802, max_relative = 1e-13);
        let v = prob_fisher_term(0.01, 0.001, &f(0.5, -0.2)).unwrap();
        assert_relative_eq!(v, 9.087_535_156_514_978e-4, max_relative = 1e-13);
    }

    #[test]
    fn fisher_term_edge_cases() {
        assert_eq!(prob_fisher_term(0.5, 0.0, &f(0.3, 0.0)).unwrap(), 0.0);
        // Fully overlapped sources with no dark counts empty the minus mode;
        // its vanishing variance makes the information diverge.
        assert_eq!(
            prob_fisher_term(0.5, 0.0, &f(1.0, 0.1)).unwrap(),
            f64::INFINITY
        );
        // Dark counts regularize the same point.
        assert!(prob_fisher_term(0.5, 1e-3, &f(1.0, 0.1))
            .unwrap()
            .is_finite());
        assert!(prob_fisher_term(-0.5, 0.0, &f(0.0, 1.0)).is_err());
        assert!(prob_fisher_term(0.5, 0.0, &f(1.5, 1.0)).is_err());
    }

    #[test]
    fn fisher_term_noiseless_two_bracket_identity() {
        // With epsilon = 0 the pair term reduces to
        // 2 eta_n [g^2/(2(1+d)(1+(1+d)a)) + g^2/(2(1-d)(1+(1-d)a))].
        for a in [0.01, 0.1, 1.0, 5.0, 20.0] {
            for d in [-0.9, -0.3, 0.0, 0.5, 0.99] {
                for g in [-0.7, 0.2, 1.3] {
                    let direct = prob_fisher_term(a, 0.0, &f(d, g)).unwrap();
                    let bracket = 2.0
                        * a
                        * (g * g / (2.0 * (1.0 + d) * (1.0 + (1.0 + d) * a))
                            + g * g / (2.0 * (1.0 - d) * (1.0 + (1.0 - d) * a)));
                    assert_relative_eq!(direct, bracket, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn series_oracle_matches_exact_term() {
        let psf = PointSpreadFunction::gaussian(1.0).unwrap();
        let cfg = crate::psf::QuadratureConfig::for_rayleigh_length(1.0);
        for eta_n in [0.01, 1.0, 5.0] {
            for epsilon in [0.0, 1e-2] {
                for s in [0.2, 1.0, 3.0] {
                    let fun = psf.functionals(s, &cfg).unwrap();
                    let exact = prob_fisher_term(eta_n, epsilon, &fun).unwrap();
                    let series =
                        series_oracle_fisher(eta_n, epsilon, &psf, s, &cfg, 500, 1e-5).unwrap();
                    assert_relative_eq!(series, exact, max_relative = 1e-5);
                }
            }
        }
    }

    #[test]
    fn series_oracle_degenerate_inputs() {
        let psf = PointSpreadFunction::gaussian(1.0).unwrap();
        let cfg = crate::psf::QuadratureConfig::for_rayleigh_length(1.0);
        // gamma = 0 at s = 0: both displaced overlaps coincide.
        let v: f64 = series_oracle_fisher(1.0, 0.01, &psf, 0.0, &cfg, 300, 1e-5).unwrap();
        assert!(v.abs() <= 1e-10, "got {v}");
        // No detected photons at all: nothing depends on s.
        let v = series_oracle_fisher(0.0, 0.5, &psf, 1.0, &cfg, 300, 1e-5).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn series_oracle_reports_excess_tail() {
        let psf = PointSpreadFunction::gaussian(1.0).unwrap();
        let cfg = crate::psf::QuadratureConfig::for_rayleigh_length(1.0);
        let err = series_oracle_fisher(5.0, 0.0, &psf, 1.0, &cfg, 50, 1e-5).unwrap_err();
        assert!(
            matches!(err, Error::TruncationWarning { n_max: 50, .. }),
            "got {err:?}"
        );
    }

    proptest! {
        #[test]
        fn fisher_term_is_even_in_gamma(
            a in 1e-3f64..10.0,
            eps in 0.0f64..0.5,
            d in -0.99f64..0.99,
            g in -2.0f64..2.0,
        ) {
            let plus = prob_fisher_term(a, eps, &f(d, g)).unwrap();
            let minus = prob_fisher_term(a, eps, &f(d, -g)).unwrap();
            prop_assert_eq!(plus, minus);
        }

        #[test]
        fn fisher_term_never_grows_with_dark_counts(
            a in 1e-3f64..10.0,
            d in -0.99f64..0.99,
            g in 0.01f64..2.0,
            eps in 1e-6f64..1.0,
            factor in 1.001f64..100.0,
        ) {
            let lo = prob_fisher_term(a, eps, &f(d, g)).unwrap();
            let hi = prob_fisher_term(a, eps * factor, &f(d, g)).unwrap();
            prop_assert!(hi <= lo);
        }

        #[test]
        fn pmf_partial_sums_stay_below_one(mean in 0.0f64..20.0, n_max in 0u32..200) {
            let partial: f64 = (0..=n_max).map(|n| pmf(mean, n).unwrap()).sum();
            prop_assert!(partial <= 1.0 + 1e-12);
        }
    }
}
