//! Gauss-Kronrod integration used by the profile functionals.
//!
//! Two drivers share one 15-point Kronrod kernel: an adaptive bisection loop
//! for analytic integrands, and a fixed composite rule whose panels the caller
//! aligns with the knots of a piecewise-polynomial integrand. The kernel is
//! exact through polynomial degree 22, so the composite rule integrates
//! products of cubic interpolant pieces without error beyond roundoff.

// The node and weight tables keep their full published precision even though
// f64 rounds the last digits.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::scalar::{as_f64, lit, Scalar};

/// 15-point Kronrod abscissae (positive half, descending).
const XGK: [f64; 7] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
];

/// Kronrod weights paired with `XGK`, center weight last.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Embedded 7-point Gauss weights (odd `XGK` entries), center weight last.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Integral value together with its error estimate and panel count.
/// The diagnostic fields back the convergence assertions in the tests.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Quadrature<T> {
    pub value: T,
    #[cfg_attr(not(test), allow(dead_code))]
    pub error_estimate: T,
    #[cfg_attr(not(test), allow(dead_code))]
    pub panels: usize,
}

/// One Kronrod pass over `[a, b]`; returns (value, |kronrod - gauss|).
fn kronrod_panel<T: Scalar>(f: &mut impl FnMut(T) -> T, a: T, b: T) -> (T, T) {
    let two = lit::<T>(2.0);
    let half = (b - a) / two;
    let mid = (a + b) / two;

    let fc = f(mid);
    let mut result_k = lit::<T>(WGK[7]) * fc;
    let mut result_g = lit::<T>(WG[3]) * fc;
    for (j, &x) in XGK.iter().enumerate() {
        let offset = half * lit::<T>(x);
        let pair = f(mid - offset) + f(mid + offset);
        result_k = result_k + lit::<T>(WGK[j]) * pair;
        if j % 2 == 1 {
            result_g = result_g + lit::<T>(WG[j / 2]) * pair;
        }
    }
    (result_k * half, ((result_k - result_g) * half).abs())
}

/// Adaptive bisection driver for smooth integrands.
///
/// Splits the panel with the largest error estimate until the summed estimate
/// falls below `max(abs_tol, rel_tol * |integral|)` or the panel budget is
/// exhausted, in which case `QuadratureNonConvergence` is returned.
pub(crate) fn adaptive<T: Scalar>(
    f: &mut impl FnMut(T) -> T,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    max_panels: usize,
) -> Result<Quadrature<T>> {
    if a >= b {
        return Ok(Quadrature {
            value: T::zero(),
            error_estimate: T::zero(),
            panels: 0,
        });
    }

    struct Panel<T> {
        a: T,
        b: T,
        value: T,
        err: T,
    }

    let (value, err) = kronrod_panel(f, a, b);
    let mut panels = vec![Panel { a, b, value, err }];

    loop {
        let mut total = T::zero();
        let mut total_err = T::zero();
        let mut worst = 0usize;
        for (i, p) in panels.iter().enumerate() {
            total = total + p.value;
            total_err = total_err + p.err;
            if p.err > panels[worst].err {
                worst = i;
            }
        }
        let required = abs_tol.max(rel_tol * total.abs());
        if total_err <= required {
            return Ok(Quadrature {
                value: total,
                error_estimate: total_err,
                panels: panels.len(),
            });
        }
        if panels.len() >= max_panels {
            return Err(Error::QuadratureNonConvergence {
                panels: panels.len(),
                error_estimate: as_f64(total_err),
                required: as_f64(required),
            });
        }
        let Panel { a, b, .. } = panels[worst];
        let mid = (a + b) / lit::<T>(2.0);
        // A panel the width of one representable step cannot be split further.
        if mid <= a || mid >= b {
            return Err(Error::QuadratureNonConvergence {
                panels: panels.len(),
                error_estimate: as_f64(total_err),
                required: as_f64(required),
            });
        }
        let (v1, e1) = kronrod_panel(f, a, mid);
        let (v2, e2) = kronrod_panel(f, mid, b);
        panels[worst] = Panel {
            a,
            b: mid,
            value: v1,
            err: e1,
        };
        panels.push(Panel {
            a: mid,
            b,
            value: v2,
            err: e2,
        });
    }
}

/// Fixed composite rule over caller-supplied breakpoints.
///
/// Breakpoints must be sorted ascending; panels of zero width are skipped.
/// Intended for integrands that are polynomial between breakpoints, where a
/// single Kronrod pass per panel is already exact.
pub(crate) fn composite<T: Scalar>(f: &mut impl FnMut(T) -> T, breakpoints: &[T]) -> Quadrature<T> {
    let mut total = T::zero();
    let mut total_err = T::zero();
    let mut panels = 0usize;
    for w in breakpoints.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = kronrod_panel(f, w[0], w[1]);
        total = total + v;
        total_err = total_err + e;
        panels += 1;
    }
    Quadrature {
        value: total,
        error_estimate: total_err,
        panels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_standard_gaussian() {
        let mut f = |x: f64| (-x * x / 2.0).exp();
        let q = adaptive(&mut f, -12.0, 12.0, 1e-12, 1e-12, 2000).unwrap();
        assert_relative_eq!(
            q.value,
            (2.0 * std::f64::consts::PI).sqrt(),
            max_relative = 1e-12
        );
        assert!(q.error_estimate < 1e-10);
    }

    #[test]
    fn polynomial_is_exact_per_panel() {
        // Degree 6 is well inside the degree-22 exactness of the kernel.
        let mut f = |x: f64| x.powi(6) - 3.0 * x.powi(4) + x;
        let q = adaptive(&mut f, 0.0, 2.0, 1e-13, 1e-13, 100).unwrap();
        assert_relative_eq!(
            q.value,
            128.0 / 7.0 - 96.0 / 5.0 + 2.0,
            max_relative = 1e-14
        );
        assert_eq!(q.panels, 1);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        // |x|^0.1 has an unbounded derivative at 0; a two-panel budget cannot
        // reach 1e-15.
        let mut f = |x: f64| x.abs().powf(0.1);
        let err = adaptive(&mut f, -1.0, 1.0, 1e-15, 1e-15, 2).unwrap_err();
        match err {
            Error::QuadratureNonConvergence { panels, .. } => assert_eq!(panels, 2),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn composite_matches_adaptive_on_smooth_integrand() {
        let mut f = |x: f64| (-x * x / 4.0).exp();
        let grid: Vec<f64> = (0..=64).map(|i| -8.0 + 16.0 * i as f64 / 64.0).collect();
        let fixed = composite(&mut f, &grid);
        let mut f2 = |x: f64| (-x * x / 4.0).exp();
        let adapt = adaptive(&mut f2, -8.0, 8.0, 1e-13, 1e-13, 2000).unwrap();
        assert_relative_eq!(fixed.value, adapt.value, max_relative = 1e-13);
    }

    #[test]
    fn empty_interval_integrates_to_zero() {
        let mut f = |x: f64| x;
        let q = adaptive(&mut f, 1.0, 1.0, 1e-10, 1e-8, 10).unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn works_in_f32() {
        let mut f = |x: f32| x * x;
        let q = adaptive(&mut f, 0.0f32, 3.0f32, 1e-5, 1e-5, 100).unwrap();
        assert_relative_eq!(q.value, 9.0f32, max_relative = 1e-5);
    }
}
