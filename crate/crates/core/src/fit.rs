//! Weighted power-law fits on log-log scale.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Result of a power-law fit `value = amplitude * n^exponent`.
#[derive(Debug, Clone, Copy)]
pub struct PowerLawFit<S> {
    pub exponent: S,
    pub exponent_se: S,
    pub amplitude: S,
    /// Reduced chi-square of the weighted fit (residual variance when the
    /// points carry no errors).
    pub goodness: S,
    /// Exponent shift when the smallest-n point is dropped (0 with only
    /// three points, where no refit is possible).
    pub window_sensitivity: S,
}

/// Weighted least squares of `ln value` against `ln n`. Needs at least three
/// points with strictly positive `n` and `value`; error bars propagate as
/// `sigma_ln = err / value`, and an unweighted fit is used when no point
/// carries an error.
pub fn fit_power_law<S: Scalar>(points: &[(S, S, S)]) -> Result<PowerLawFit<S>> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "power-law fit needs >= 3 points, got {}",
            points.len()
        )));
    }
    for &(n, v, e) in points {
        if !(n > S::zero()) || !(v > S::zero()) {
            return Err(Error::InvalidArgument(
                "power-law fit needs positive n and value".into(),
            ));
        }
        if e < S::zero() {
            return Err(Error::InvalidArgument("negative error bar".into()));
        }
    }
    let fit = wls(points)?;
    let window_sensitivity = if points.len() > 3 {
        let refit = wls(&points[1..])?;
        (refit.0 - fit.0).abs()
    } else {
        S::zero()
    };
    Ok(PowerLawFit {
        exponent: fit.0,
        exponent_se: fit.1,
        amplitude: fit.2.exp(),
        goodness: fit.3,
        window_sensitivity,
    })
}

/// Returns (slope, slope_se, intercept, reduced chi2).
fn wls<S: Scalar>(points: &[(S, S, S)]) -> Result<(S, S, S, S)> {
    let weighted = points.iter().any(|&(_, _, e)| e > S::zero());
    let data: Vec<(S, S, S)> = points
        .iter()
        .map(|&(n, v, e)| {
            let w = if weighted {
                let sigma = (e / v).max(S::from_f64(1e-12));
                S::one() / (sigma * sigma)
            } else {
                S::one()
            };
            (n.ln(), v.ln(), w)
        })
        .collect();
    let sw: S = data.iter().map(|&(_, _, w)| w).fold(S::zero(), |a, b| a + b);
    let sx: S = data.iter().map(|&(x, _, w)| w * x).fold(S::zero(), |a, b| a + b);
    let sy: S = data.iter().map(|&(_, y, w)| w * y).fold(S::zero(), |a, b| a + b);
    let sxx: S = data
        .iter()
        .map(|&(x, _, w)| w * x * x)
        .fold(S::zero(), |a, b| a + b);
    let sxy: S = data
        .iter()
        .map(|&(x, y, w)| w * x * y)
        .fold(S::zero(), |a, b| a + b);
    let det = sw * sxx - sx * sx;
    if det.abs() < S::from_f64(1e-30) {
        return Err(Error::InvalidArgument(
            "degenerate abscissas in power-law fit".into(),
        ));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let chi2: S = data
        .iter()
        .map(|&(x, y, w)| {
            let r = y - intercept - slope * x;
            w * r * r
        })
        .fold(S::zero(), |a, b| a + b);
    let dof = S::from_usize_(points.len().saturating_sub(2).max(1));
    let slope_var = if weighted {
        sw / det
    } else {
        // scale by residual variance
        (sw / det) * (chi2 / dof)
    };
    Ok((slope, slope_var.sqrt(), intercept, chi2 / dof))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_square_law() {
        let pts: Vec<(f64, f64, f64)> = (2..8)
            .map(|n| (n as f64, 5.0 * (n as f64).powi(2), 0.0))
            .collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.exponent - 2.0).abs() < 1e-12);
        assert!((fit.amplitude - 5.0).abs() < 1e-9);
        assert!(fit.exponent_se < 1e-10);
        assert!(fit.window_sensitivity < 1e-12);
    }

    #[test]
    fn noisy_inverse_square() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let pts: Vec<(f64, f64, f64)> = (3..12)
            .map(|n| {
                let n = n as f64;
                let v = n.powi(-2);
                let noise = 1.0 + 0.02 * (rng.gen::<f64>() - 0.5);
                (n, v * noise, 0.01 * v)
            })
            .collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!(
            (fit.exponent + 2.0).abs() < 3.0 * fit.exponent_se.max(0.01),
            "exponent {} +- {}",
            fit.exponent,
            fit.exponent_se
        );
    }

    #[test]
    fn constant_data_has_zero_exponent() {
        let pts: Vec<(f64, f64, f64)> = (1..6).map(|n| (n as f64, 3.5, 0.0)).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(fit_power_law(&[(1.0, 1.0, 0.0), (2.0, 4.0, 0.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0, 0.0), (2.0, -4.0, 0.0), (3.0, 9.0, 0.0)]).is_err());
        assert!(fit_power_law(&[(0.0, 1.0, 0.0), (2.0, 4.0, 0.0), (3.0, 9.0, 0.0)]).is_err());
    }
}
