//! Parameter sweeps and derived resolution figures.
//!
//! Everything here composes the per-point information routines into the
//! quantities one actually plots or quotes: normalized-information curves
//! over a separation grid, the separation at which the information falls to
//! half its plateau, and the power-law scaling of that half-point with the
//! signal-to-noise ratio.

use crate::error::{Error, Result};
use crate::photostat::SourceScenario;
use crate::psf::{PointSpreadFunction, QuadratureConfig};
use crate::qfi::{classical_limit, qfi_exact};
use crate::scalar::{as_f64, lit, Scalar};

/// Separation below which the half-plateau scan starts, in Rayleigh lengths.
/// Much smaller and the overlap rounds to exactly 1 in double precision.
const SCAN_FLOOR_OVER_XR: f64 = 1e-6;
/// Upper end of the half-plateau scan, in Rayleigh lengths.
const SCAN_CEILING_OVER_XR: f64 = 10.0;
/// Linear scan resolution between the floor and ceiling.
const SCAN_LINEAR_STEPS: usize = 256;
/// Bisection stops when the bracket is this narrow, in Rayleigh lengths.
const BISECTION_WIDTH_OVER_XR: f64 = 1e-10;

/// One labeled curve of a sweep: `(s / x_R, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSeries<T> {
    pub label: String,
    pub points: Vec<(T, T)>,
}

/// A full sweep result: shared abscissa label, one series per variant, and
/// key-value metadata describing how the table was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable<T> {
    pub parameter_label: String,
    pub series: Vec<SweepSeries<T>>,
    pub metadata: Vec<(String, String)>,
}

/// What a sweep variant overrides relative to the base scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariantKind<T> {
    /// Override the detected flux, keep the base dark counts.
    EtaN(T),
    /// Override the dark counts, keep the base flux.
    Epsilon(T),
    /// The flux-independent limit `delta_k2 - gamma^2 / (1 - delta^2)`,
    /// reached both for bright sources and for vanishing SNR.
    ClassicalLimit,
}

/// A labeled curve request.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepVariant<T> {
    pub label: String,
    pub kind: VariantKind<T>,
}

/// Evaluates the normalized information for each variant over a common
/// separation grid (given in Rayleigh lengths).
///
/// The sweep never aborts on a per-point failure: cells whose evaluation is
/// rejected (for example an unphysical variant) are recorded as NaN, and a
/// divergent cell propagates as `+infinity`. The base scenario supplies the
/// defaults a variant does not override; its `separation` field is unused
/// because the grid provides the separations.
pub fn sweep_qfi<T: Scalar>(
    base: &SourceScenario<T>,
    psf: &PointSpreadFunction<T>,
    cfg: &QuadratureConfig<T>,
    s_over_xr: &[T],
    variants: &[SweepVariant<T>],
) -> Result<SweepTable<T>> {
    if s_over_xr.is_empty() {
        return Err(Error::domain(
            "sweep_qfi",
            "separation grid must not be empty",
        ));
    }
    if variants.is_empty() {
        return Err(Error::domain(
            "sweep_qfi",
            "at least one variant is required",
        ));
    }
    for &x in s_over_xr {
        if !x.is_finite() || x < T::zero() {
            return Err(Error::domain(
                "sweep_qfi",
                format!("grid entries must be finite and non-negative, got {x}"),
            ));
        }
    }
    if base.rayleigh_length != psf.rayleigh_length() {
        return Err(Error::domain(
            "sweep_qfi",
            "scenario and profile disagree on the Rayleigh length",
        ));
    }

    let xr = psf.rayleigh_length();
    let mut series: Vec<SweepSeries<T>> = variants
        .iter()
        .map(|v| SweepSeries {
            label: v.label.clone(),
            points: Vec::with_capacity(s_over_xr.len()),
        })
        .collect();

    for &x in s_over_xr {
        let functionals = psf.functionals(x * xr, cfg);
        for (variant, out) in variants.iter().zip(series.iter_mut()) {
            let value = match &functionals {
                Err(_) => T::nan(),
                Ok(f) => match variant.kind {
                    VariantKind::EtaN(a) => {
                        qfi_exact(a, base.epsilon, f, xr).map_or(T::nan(), |b| b.normalized)
                    }
                    VariantKind::Epsilon(e) => {
                        qfi_exact(base.eta_n, e, f, xr).map_or(T::nan(), |b| b.normalized)
                    }
                    VariantKind::ClassicalLimit => {
                        classical_limit(f).map_or(T::nan(), |c| c * xr * xr)
                    }
                },
            };
            out.points.push((x, value));
        }
    }

    let metadata = vec![
        ("psf".to_string(), psf.kind().label().to_string()),
        ("rayleigh_length".to_string(), format!("{}", as_f64(xr))),
        ("eta_n".to_string(), format!("{}", as_f64(base.eta_n))),
        ("epsilon".to_string(), format!("{}", as_f64(base.epsilon))),
    ];

    Ok(SweepTable {
        parameter_label: "s_over_xr".to_string(),
        series,
        metadata,
    })
}

/// Result of the half-plateau search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfMaxResult<T> {
    /// Separation at which the information equals half its plateau value.
    pub s_half: T,
    /// Final bisection bracket around the root.
    pub bracket: (T, T),
    /// Number of bisection steps taken after the scan.
    pub iterations: u32,
}

/// Finds the separation where the information crosses half of its
/// wide-separation plateau `2 eta_n delta_k2`.
///
/// Scans a geometric-plus-linear ladder of separations up to ten Rayleigh
/// lengths for a sign change, skipping any point that fails to evaluate,
/// then bisects the first bracket found down to a relative width of 1e-10.
/// Returns [`Error::NoCrossing`] when the curve never reaches the half
/// level; that genuinely happens for noiseless faint sources, whose
/// information stays near the plateau at all separations.
pub fn find_s_half<T: Scalar>(
    eta_n: T,
    epsilon: T,
    psf: &PointSpreadFunction<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<HalfMaxResult<T>> {
    if !eta_n.is_finite() || eta_n <= T::zero() {
        return Err(Error::domain(
            "find_s_half",
            format!("eta_n must be positive, got {eta_n}"),
        ));
    }
    if !epsilon.is_finite() || epsilon < T::zero() {
        return Err(Error::domain(
            "find_s_half",
            format!("epsilon must be finite and non-negative, got {epsilon}"),
        ));
    }
    let xr = psf.rayleigh_length();
    let target = eta_n * psf.delta_k2(cfg)?;
    let residual = |s: T| -> Result<T> {
        let f = psf.functionals(s, cfg)?;
        Ok(qfi_exact(eta_n, epsilon, &f, xr)?.total - target)
    };

    let ceiling = lit::<T>(SCAN_CEILING_OVER_XR) * xr;
    let mut grid: Vec<T> = Vec::with_capacity(SCAN_LINEAR_STEPS + 64);
    let mut g = lit::<T>(SCAN_FLOOR_OVER_XR) * xr;
    let two = lit::<T>(2.0);
    while g < ceiling {
        grid.push(g);
        g = g * two;
    }
    for i in 1..=SCAN_LINEAR_STEPS {
        grid.push(ceiling * lit::<T>(i as f64) / lit::<T>(SCAN_LINEAR_STEPS as f64));
    }
    grid.sort_unstable_by(|a, b| a.partial_cmp(b).expect("scan grid entries are finite"));
    grid.dedup();

    let mut prev: Option<(T, T)> = None;
    let mut bracket: Option<((T, T), T)> = None;
    for &s in &grid {
        // Points too degenerate to evaluate cannot host the crossing; the
        // scan just moves past them.
        let Ok(v) = residual(s) else { continue };
        if v == T::zero() {
            return Ok(HalfMaxResult {
                s_half: s,
                bracket: (s, s),
                iterations: 0,
            });
        }
        if let Some((ps, pv)) = prev {
            if (pv < T::zero()) != (v < T::zero()) {
                bracket = Some(((ps, s), pv));
                break;
            }
        }
        prev = Some((s, v));
    }
    let Some(((mut lo, mut hi), mut lo_sign_value)) = bracket else {
        return Err(Error::NoCrossing {
            s_max: as_f64(ceiling),
        });
    };

    let width_tol = lit::<T>(BISECTION_WIDTH_OVER_XR) * xr;
    let mut iterations = 0u32;
    while hi - lo > width_tol && iterations < 200 {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let v = residual(mid)?;
        iterations += 1;
        if v == T::zero() {
            lo = mid;
            hi = mid;
            break;
        }
        if (v < T::zero()) == (lo_sign_value < T::zero()) {
            lo = mid;
            lo_sign_value = v;
        } else {
            hi = mid;
        }
    }
    Ok(HalfMaxResult {
        s_half: (lo + hi) / two,
        bracket: (lo, hi),
        iterations,
    })
}

/// Least-squares power law fitted to half-plateau separations over an SNR
/// grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit<T> {
    /// Slope of `ln(s_half / x_R)` against `ln SNR`.
    pub exponent: T,
    /// Geometric mean of `s_half * sqrt(SNR) / x_R`, the constant in
    /// `s_half = prefactor * x_R / sqrt(SNR)`.
    pub prefactor: T,
    /// The fitted `(SNR, s_half / x_R)` samples.
    pub points: Vec<(T, T)>,
}

/// Fits `s_half(SNR)` to a power law for a fixed detected flux.
///
/// Each grid entry is interpreted as `SNR = eta_n / epsilon` and must exceed
/// 10 so the half-point exists well inside the scan range; the grid needs at
/// least four entries spanning two decades for the fit to be meaningful.
pub fn snr_scaling_fit<T: Scalar>(
    eta_n: T,
    snr_grid: &[T],
    psf: &PointSpreadFunction<T>,
    cfg: &QuadratureConfig<T>,
) -> Result<ScalingFit<T>> {
    if !eta_n.is_finite() || eta_n <= T::zero() {
        return Err(Error::domain(
            "snr_scaling_fit",
            format!("eta_n must be positive, got {eta_n}"),
        ));
    }
    if snr_grid.len() < 4 {
        return Err(Error::domain(
            "snr_scaling_fit",
            format!("need at least 4 SNR values, got {}", snr_grid.len()),
        ));
    }
    let floor = lit::<T>(10.0);
    let mut min = T::infinity();
    let mut max = T::zero();
    for &snr in snr_grid {
        if !snr.is_finite() || snr <= floor {
            return Err(Error::domain(
                "snr_scaling_fit",
                format!("every SNR must be finite and above 10, got {snr}"),
            ));
        }
        min = min.min(snr);
        max = max.max(snr);
    }
    if max / min < lit::<T>(100.0) {
        return Err(Error::domain(
            "snr_scaling_fit",
            "SNR grid must span at least two decades",
        ));
    }

    let xr = psf.rayleigh_length();
    let mut points = Vec::with_capacity(snr_grid.len());
    for &snr in snr_grid {
        let epsilon = eta_n / snr;
        let half = find_s_half(eta_n, epsilon, psf, cfg)?;
        points.push((snr, half.s_half / xr));
    }

    let n = lit::<T>(points.len() as f64);
    let half = lit::<T>(0.5);
    let mut mean_x = T::zero();
    let mut mean_y = T::zero();
    for &(snr, s) in &points {
        mean_x = mean_x + snr.ln();
        mean_y = mean_y + s.ln();
    }
    mean_x = mean_x / n;
    mean_y = mean_y / n;
    let mut cov = T::zero();
    let mut var = T::zero();
    let mut log_prefactor = T::zero();
    for &(snr, s) in &points {
        let dx = snr.ln() - mean_x;
        cov = cov + dx * (s.ln() - mean_y);
        var = var + dx * dx;
        log_prefactor = log_prefactor + s.ln() + half * snr.ln();
    }
    Ok(ScalingFit {
        exponent: cov / var,
        prefactor: (log_prefactor / n).exp(),
        points,
    })
}
