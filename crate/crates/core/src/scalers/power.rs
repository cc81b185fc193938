//! Yeo-Johnson power transform and maximum-likelihood estimation of its
//! exponent.

use super::ScalerError;

/// Search interval the optimiser starts from.
const INITIAL_BRACKET: (f64, f64) = (-2.0, 2.0);
/// Hard limit the interval may be grown to.
const MAX_LAMBDA: f64 = 50.0;
const LAMBDA_TOL: f64 = 1e-8;

/// Yeo-Johnson transform of one value.
///
/// Both branches are written with `expm1`/`ln_1p` so that the expression is
/// continuous through `lambda = 0` (resp. `2`) and accurate close to it.
pub fn yeo_johnson_point(x: f64, lambda: f64) -> f64 {
    if x >= 0.0 {
        if lambda == 0.0 {
            x.ln_1p()
        } else {
            (lambda * x.ln_1p()).exp_m1() / lambda
        }
    } else {
        let mirrored = 2.0 - lambda;
        if mirrored == 0.0 {
            -(-x).ln_1p()
        } else {
            -(mirrored * (-x).ln_1p()).exp_m1() / mirrored
        }
    }
}

/// Profile log-likelihood of `lambda` under a normal model of the transformed
/// values. Returns `None` when the transformed variance is zero or overflows.
pub fn log_likelihood(values: &[f64], lambda: f64) -> Option<f64> {
    let n = values.len() as f64;
    let log_var = log_transformed_variance(values, lambda);
    if !log_var.is_finite() {
        return None;
    }
    let jacobian: f64 = values.iter().map(|&x| x.signum() * x.abs().ln_1p()).sum();
    let ll = -0.5 * n * log_var + (lambda - 1.0) * jacobian;
    ll.is_finite().then_some(ll)
}

fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n
}

/// `ln Var(psi(x, lambda))`.
///
/// On a one-signed set every psi is `(exp(a_i) - 1) / k` with a common `k`,
/// so the variance is `exp(2 max a) / k^2 * Var(expm1(a_i - max a))`. Computed
/// that way it keeps its relative precision at large `|lambda|`, where the
/// direct form is swamped by the constant term.
fn log_transformed_variance(values: &[f64], lambda: f64) -> f64 {
    let one_signed = if values.iter().all(|&x| x >= 0.0) {
        Some((lambda, 1.0))
    } else if values.iter().all(|&x| x < 0.0) {
        Some((2.0 - lambda, -1.0))
    } else {
        None
    };
    match one_signed {
        Some((k, sign)) if k != 0.0 => {
            let exponents: Vec<f64> = values.iter().map(|&x| k * (sign * x).ln_1p()).collect();
            let top = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let shifted: Vec<f64> = exponents.iter().map(|a| (a - top).exp_m1()).collect();
            2.0 * top - 2.0 * k.abs().ln() + population_variance(&shifted).ln()
        }
        _ => {
            let transformed: Vec<f64> = values.iter().map(|&x| yeo_johnson_point(x, lambda)).collect();
            population_variance(&transformed).ln()
        }
    }
}

/// Maximum-likelihood exponent for the Yeo-Johnson transform.
///
/// Brent minimisation of the negative log-likelihood on `(-2, 2)`; whenever the
/// optimum lands on an edge of the interval that edge is doubled outwards,
/// up to `[-50, 50]`.
pub fn fit_lambda(values: &[f64]) -> Result<f64, ScalerError> {
    if values.len() < 2 {
        return Err(ScalerError::TooFewValues { needed: 2, got: values.len() });
    }
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return Err(ScalerError::ConstantInput);
    }
    let objective = |lambda: f64| log_likelihood(values, lambda).map_or(f64::INFINITY, |ll| -ll);

    let (mut lo, mut hi) = INITIAL_BRACKET;
    loop {
        let (best, _) = brent_minimize(&objective, lo, hi, LAMBDA_TOL, 500);
        // Brent's stopping rule has a relative term, so the edge window scales
        let edge = 1e-6 * (hi - lo);
        let grow_lo = best - lo <= edge && lo > -MAX_LAMBDA;
        let grow_hi = hi - best <= edge && hi < MAX_LAMBDA;
        if !(grow_lo || grow_hi) {
            return Ok(best);
        }
        if grow_lo {
            lo = (2.0 * lo).max(-MAX_LAMBDA);
        }
        if grow_hi {
            hi = (2.0 * hi).min(MAX_LAMBDA);
        }
    }
}

/// Brent's bounded scalar minimiser (golden section with parabolic steps).
///
/// Returns `(argmin, min)`. `abs_tol` is the absolute tolerance on the
/// abscissa; a relative term of `sqrt(eps)` is added as usual.
pub fn brent_minimize<F>(f: F, lower: f64, upper: f64, abs_tol: f64, max_iter: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    let sqrt_eps = f64::EPSILON.sqrt();

    let (mut a, mut b) = if lower <= upper { (lower, upper) } else { (upper, lower) };
    let mut x = a + GOLDEN * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for _ in 0..max_iter {
        let mid = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + abs_tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }

        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            // NaN from infinite objective values fails every comparison and
            // falls through to a golden-section step.
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if mid >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= mid { a - x } else { b - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 { x + d } else if d > 0.0 { x + tol1 } else { x - tol1 };
        let fu = f(u);

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}
