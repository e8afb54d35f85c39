//! Self-check battery: every closed form in the crate is re-derived by an
//! independent route (quadrature, finite differences, or series summation)
//! and the two answers are compared at fixed tolerances.
//!
//! The battery is what the command-line `validate` subcommand runs. It works
//! in `f64` and is deliberately deterministic: random tuples come from a
//! seeded generator so a failure can be replayed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::photostat::{prob_fisher_term, series_oracle_fisher};
use crate::psf::{OverlapFunctionals, PointSpreadFunction, QuadratureConfig};
use crate::qfi::{qfi_exact, qfi_ideal_closed_form, qfi_noisy_closed_form};

/// Outcome of one named consistency check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Human-readable evidence: worst error observed, values compared, etc.
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// Knobs for [`run_battery`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryOptions {
    /// Override the finite-difference step used by the derivative check, in
    /// Rayleigh lengths. `None` keeps the configured default. Deliberately
    /// breaking the step (say, 10 Rayleigh lengths) must make that check
    /// fail; this is how the battery itself is audited.
    pub fd_step_over_xr: Option<f64>,
    /// Random tuples per identity check.
    pub tuples: usize,
    /// Seed for the tuple generator.
    pub seed: u64,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        BatteryOptions {
            fd_step_over_xr: None,
            tuples: 2000,
            seed: 42,
        }
    }
}

/// Draws overlap functionals satisfying the Cauchy-Schwarz constraint
/// `gamma^2 <= (1 - delta^2) * delta_k2` that every genuine profile obeys.
/// Using physical tuples keeps the closed-form identities well conditioned,
/// so tight tolerances are meaningful rather than flaky.
pub fn sample_functionals(rng: &mut impl Rng) -> OverlapFunctionals<f64> {
    let delta_k2 = rng.random_range(-3.2f64..1.4).exp();
    let delta = rng.random_range(-0.999f64..0.999);
    let rho = rng.random_range(0.0f64..1.0);
    let magnitude = (rho * (1.0 - delta * delta) * delta_k2).sqrt();
    let gamma = if rng.random_range(0.0f64..1.0) < 0.5 {
        -magnitude
    } else {
        magnitude
    };
    OverlapFunctionals {
        delta,
        gamma,
        delta_k2,
    }
}

/// Log-uniform detected flux in `[1e-3, 30]`.
pub fn sample_eta_n(rng: &mut impl Rng) -> f64 {
    rng.random_range(1e-3f64.ln()..30f64.ln()).exp()
}

/// Log-uniform dark-count rate in `[1e-6, 1]`.
pub fn sample_epsilon(rng: &mut impl Rng) -> f64 {
    rng.random_range(1e-6f64.ln()..0.0).exp()
}

/// Runs every consistency check and reports one outcome per check.
pub fn run_battery(opts: &BatteryOptions) -> Vec<CheckOutcome> {
    vec![
        gaussian_quadrature_agreement(),
        derivative_consistency(opts.fd_step_over_xr),
        mode_pmf_oracle(),
        noiseless_identity(opts),
        noisy_identity(opts),
        printed_overlap_discrepancy(),
    ]
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    (a - b).abs() / scale
}

/// Closed-form Gaussian overlap and bandwidth against adaptive quadrature of
/// the amplitude products.
fn gaussian_quadrature_agreement() -> CheckOutcome {
    const TOL: f64 = 1e-8;
    let psf = PointSpreadFunction::gaussian(1.0).expect("unit Rayleigh length is valid");
    let closed_cfg = QuadratureConfig::for_rayleigh_length(1.0);
    let mut quad_cfg = closed_cfg;
    quad_cfg.force_quadrature = true;

    let mut worst = 0.0f64;
    let mut failed = false;
    let mut detail = String::new();
    for s in [0.5, 1.0, 2.0, 4.0] {
        match (
            psf.overlap_delta(s, &closed_cfg),
            psf.overlap_delta(s, &quad_cfg),
        ) {
            (Ok(closed), Ok(quad)) => worst = worst.max(relative_gap(closed, quad)),
            (a, b) => {
                failed = true;
                detail = format!("evaluation failed at s = {s}: {a:?} vs {b:?}");
                break;
            }
        }
    }
    if !failed {
        match (psf.delta_k2(&closed_cfg), psf.delta_k2(&quad_cfg)) {
            (Ok(closed), Ok(quad)) => worst = worst.max(relative_gap(closed, quad)),
            (a, b) => {
                failed = true;
                detail = format!("bandwidth evaluation failed: {a:?} vs {b:?}");
            }
        }
    }
    if !failed {
        detail = format!("worst relative gap {worst:.3e} (tolerance {TOL:.0e})");
    }
    CheckOutcome {
        name: "gaussian-quadrature-agreement",
        passed: !failed && worst <= TOL,
        detail,
    }
}

/// Analytic overlap derivative against a central difference of the overlap.
fn derivative_consistency(fd_step_over_xr: Option<f64>) -> CheckOutcome {
    const TOL: f64 = 1e-4;
    let cfg = QuadratureConfig::for_rayleigh_length(1.0);
    let step = fd_step_over_xr.unwrap_or(cfg.fd_step);

    let profiles = [
        PointSpreadFunction::gaussian(1.0).expect("unit Rayleigh length is valid"),
        PointSpreadFunction::gaussian_paper_printed(1.0).expect("unit Rayleigh length is valid"),
    ];
    let mut worst = 0.0f64;
    let mut detail = String::new();
    let mut failed = false;
    'outer: for psf in &profiles {
        for s in [0.1, 0.5, 1.0, 2.0, 4.0] {
            // The overlap is even in s, so a displaced separation can be
            // folded back into the non-negative domain.
            let diff = (|| -> crate::Result<f64> {
                let hi = psf.overlap_delta((s + step).abs(), &cfg)?;
                let lo = psf.overlap_delta((s - step).abs(), &cfg)?;
                let fd = (hi - lo) / (2.0 * step);
                let gamma = psf.overlap_gamma(s, &cfg)?;
                Ok(relative_gap(fd, gamma).min((fd - gamma).abs()))
            })();
            match diff {
                Ok(d) => worst = worst.max(d),
                Err(e) => {
                    failed = true;
                    detail = format!("evaluation failed at s = {s}: {e}");
                    break 'outer;
                }
            }
        }
    }
    if !failed {
        detail = format!(
            "worst derivative mismatch {worst:.3e} at step {step:.3e} (tolerance {TOL:.0e})"
        );
    }
    CheckOutcome {
        name: "derivative-consistency",
        passed: !failed && worst <= TOL,
        detail,
    }
}

/// Closed-form count-statistics information against direct summation of the
/// score over the thermal distributions.
fn mode_pmf_oracle() -> CheckOutcome {
    const TOL: f64 = 1e-5;
    let psf = PointSpreadFunction::gaussian(1.0).expect("unit Rayleigh length is valid");
    let cfg = QuadratureConfig::for_rayleigh_length(1.0);

    let mut worst = 0.0f64;
    for eta_n in [0.01, 1.0] {
        for epsilon in [0.0, 0.01] {
            for s in [0.2, 1.0, 3.0] {
                let outcome = (|| -> crate::Result<f64> {
                    let f = psf.functionals(s, &cfg)?;
                    let exact = prob_fisher_term(eta_n, epsilon, &f)?;
                    let series = series_oracle_fisher(eta_n, epsilon, &psf, s, &cfg, 500, 1e-5)?;
                    Ok(relative_gap(exact, series))
                })();
                match outcome {
                    Ok(d) => worst = worst.max(d),
                    Err(e) => {
                        return CheckOutcome {
                            name: "mode-pmf-oracle",
                            passed: false,
                            detail: format!("evaluation failed at eta_n = {eta_n}, s = {s}: {e}"),
                        }
                    }
                }
            }
        }
    }
    CheckOutcome {
        name: "mode-pmf-oracle",
        passed: worst <= TOL,
        detail: format!("worst relative gap {worst:.3e} (tolerance {TOL:.0e})"),
    }
}

/// Two-term decomposition against the noiseless closed form on random
/// physical tuples.
fn noiseless_identity(opts: &BatteryOptions) -> CheckOutcome {
    const TOL: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = 0.0f64;
    for _ in 0..opts.tuples {
        let f = sample_functionals(&mut rng);
        let a = sample_eta_n(&mut rng);
        let exact = qfi_exact(a, 0.0, &f, 1.0).map(|b| b.total);
        let closed = qfi_ideal_closed_form(a, &f);
        match (exact, closed) {
            (Ok(x), Ok(c)) => worst = worst.max(relative_gap(x, c)),
            (x, c) => {
                return CheckOutcome {
                    name: "noiseless-identity",
                    passed: false,
                    detail: format!("evaluation failed on a physical tuple: {x:?} vs {c:?}"),
                }
            }
        }
    }
    CheckOutcome {
        name: "noiseless-identity",
        passed: worst <= TOL,
        detail: format!(
            "{} tuples, worst relative gap {worst:.3e} (tolerance {TOL:.0e})",
            opts.tuples
        ),
    }
}

/// Two-term decomposition against the dark-count closed form on random
/// physical tuples.
fn noisy_identity(opts: &BatteryOptions) -> CheckOutcome {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
    let mut worst = 0.0f64;
    for _ in 0..opts.tuples {
        let f = sample_functionals(&mut rng);
        let a = sample_eta_n(&mut rng);
        let eps = sample_epsilon(&mut rng);
        let exact = qfi_exact(a, eps, &f, 1.0).map(|b| b.total);
        let closed = qfi_noisy_closed_form(a, eps, &f);
        match (exact, closed) {
            (Ok(x), Ok(c)) => worst = worst.max(relative_gap(x, c)),
            (x, c) => {
                return CheckOutcome {
                    name: "noisy-identity",
                    passed: false,
                    detail: format!("evaluation failed on a physical tuple: {x:?} vs {c:?}"),
                }
            }
        }
    }
    CheckOutcome {
        name: "noisy-identity",
        passed: worst <= TOL,
        detail: format!(
            "{} tuples, worst relative gap {worst:.3e} (tolerance {TOL:.0e})",
            opts.tuples
        ),
    }
}

/// Confirms the documented inconsistency of the published Gaussian overlap:
/// integrating the amplitude pair must NOT reproduce the printed formula.
/// This check passes when the discrepancy is present.
fn printed_overlap_discrepancy() -> CheckOutcome {
    let psf =
        PointSpreadFunction::gaussian_paper_printed(1.0).expect("unit Rayleigh length is valid");
    let closed_cfg = QuadratureConfig::for_rayleigh_length(1.0);
    let mut quad_cfg = closed_cfg;
    quad_cfg.force_quadrature = true;

    let s = 2.0;
    let (printed, quad) = match (
        psf.overlap_delta(s, &closed_cfg),
        psf.overlap_delta(s, &quad_cfg),
    ) {
        (Ok(p), Ok(q)) => (p, q),
        (p, q) => {
            return CheckOutcome {
                name: "printed-overlap-discrepancy",
                passed: false,
                detail: format!("evaluation failed: {p:?} vs {q:?}"),
            }
        }
    };
    // The quadrature of the stated amplitude gives exp(-1/2); the printed
    // formula gives exp(-1). Both being reproduced is what "confirmed" means.
    let quad_ok = relative_gap(quad, 0.606_530_659_712_633_4) <= 1e-8;
    let printed_ok = relative_gap(printed, 0.367_879_441_171_442_32) <= 1e-12;
    let gap = (quad - printed).abs();
    CheckOutcome {
        name: "printed-overlap-discrepancy",
        passed: quad_ok && printed_ok && gap > 0.1,
        detail: format!(
            "quadrature overlap at s = 2 x_R is {quad:.9} vs printed formula {printed:.9} (gap {gap:.3})"
        ),
    }
}
