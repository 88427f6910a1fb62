//! Least-squares fits for profiles and growth series.
//!
//! Kink and charge profiles are fitted with a hyperbolic-tangent wall by
//! Gauss-Newton iteration; width histories are fitted with a power law on
//! log-log axes. All coordinates are site units; widths convert to length
//! by one factor of the lattice spacing.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, Mat};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Sites dropped from each end of a profile before fitting.
pub const FIT_EXCLUSION: usize = 4;

/// Two-sided 95% normal quantile used for the linearized confidence widths.
const Z_95: f64 = 1.959_963_984_540_054;

/// Outcome of a least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Parameter estimates, in the order documented by the producing fit.
    pub params: Vec<f64>,
    /// 95% confidence half-widths from the linearized covariance, matching
    /// `params` in length.
    pub confidence: Vec<f64>,
    /// Root of the summed squared residuals over the fit window.
    pub residual_norm: f64,
    /// Fitted sample range `[lo, hi)`.
    pub window: (usize, usize),
    /// Whether the iteration met its tolerance; a flagged result still
    /// carries the best parameters found.
    pub converged: bool,
}

/// Model interface for Gauss-Newton: value and gradient per sample.
trait TanhModel {
    const NP: usize;
    fn value(&self, params: &[f64], x: f64) -> f64;
    fn gradient(&self, params: &[f64], x: f64, out: &mut [f64]);
}

/// `A tanh((x - c)/w)`, params `[A, c, w]`.
struct Wall;

/// `A tanh((x - c)/w) + B`, params `[A, c, w, B]`.
struct WallWithOffset;

fn sech_sq(z: f64) -> f64 {
    let e = libm::exp(-2.0 * libm::fabs(z));
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

impl TanhModel for Wall {
    const NP: usize = 3;
    fn value(&self, p: &[f64], x: f64) -> f64 {
        p[0] * libm::tanh((x - p[1]) / p[2])
    }
    fn gradient(&self, p: &[f64], x: f64, out: &mut [f64]) {
        let u = (x - p[1]) / p[2];
        let s = sech_sq(u);
        out[0] = libm::tanh(u);
        out[1] = -p[0] * s / p[2];
        out[2] = -p[0] * u * s / p[2];
    }
}

impl TanhModel for WallWithOffset {
    const NP: usize = 4;
    fn value(&self, p: &[f64], x: f64) -> f64 {
        p[0] * libm::tanh((x - p[1]) / p[2]) + p[3]
    }
    fn gradient(&self, p: &[f64], x: f64, out: &mut [f64]) {
        let u = (x - p[1]) / p[2];
        let s = sech_sq(u);
        out[0] = libm::tanh(u);
        out[1] = -p[0] * s / p[2];
        out[2] = -p[0] * u * s / p[2];
        out[3] = 1.0;
    }
}

fn sum_sq_residuals<M: TanhModel>(model: &M, params: &[f64], y: &[f64], lo: usize) -> f64 {
    y.iter()
        .enumerate()
        .map(|(i, &v)| {
            let r = v - model.value(params, (lo + i) as f64);
            r * r
        })
        .sum()
}

/// Gauss-Newton with step halving; widths are kept positive by flooring the
/// update. Returns the result with `converged` reporting whether the
/// relative decrease tolerance was met before the iteration budget ran out.
fn gauss_newton<M: TanhModel>(
    model: &M,
    mut params: Vec<f64>,
    y: &[f64],
    window: (usize, usize),
) -> Result<FitResult> {
    let (lo, hi) = window;
    let m = hi - lo;
    let np = M::NP;
    if m <= np {
        return Err(Error::InvalidParameter(format!(
            "fit window of {m} samples cannot constrain {np} parameters"
        )));
    }
    let mut ssr = sum_sq_residuals(model, &params, &y[lo..hi], lo);
    let mut converged = false;
    let mut grad = vec![0.0; np];
    for _ in 0..200 {
        let mut jtj = Mat::zeros(np, np);
        let mut jtr = vec![0.0; np];
        for i in lo..hi {
            let x = i as f64;
            let r = y[i] - model.value(&params, x);
            model.gradient(&params, x, &mut grad);
            for a in 0..np {
                jtr[a] += grad[a] * r;
                for b in a..np {
                    jtj[(a, b)] += grad[a] * grad[b];
                }
            }
        }
        for a in 0..np {
            for b in 0..a {
                jtj[(a, b)] = jtj[(b, a)];
            }
        }
        let mut delta = jtr.clone();
        if cholesky_solve(&mut jtj, &mut delta).is_err() {
            break;
        }
        // Backtrack until the step reduces the residual.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial = params.clone();
            for a in 0..np {
                trial[a] += scale * delta[a];
            }
            // Width lives in params[2] for both models and must stay
            // positive for the model to make sense.
            if trial[2] > 1e-6 {
                let trial_ssr = sum_sq_residuals(model, &trial, &y[lo..hi], lo);
                if trial_ssr <= ssr {
                    let rel = (ssr - trial_ssr) / ssr.max(f64::MIN_POSITIVE);
                    params = trial;
                    ssr = trial_ssr;
                    accepted = true;
                    if rel < 1e-14 {
                        converged = true;
                    }
                    break;
                }
            }
            scale *= 0.5;
        }
        if !accepted {
            converged = ssr < 1e-20;
            break;
        }
        if converged {
            break;
        }
    }
    let confidence = confidence_half_widths(model, &params, window, ssr)?;
    Ok(FitResult {
        params,
        confidence,
        residual_norm: libm::sqrt(ssr),
        window,
        converged,
    })
}

/// 95% half-widths from the linearized covariance
/// `ssr/(m - p) · (JᵀJ)⁻¹` at the solution.
fn confidence_half_widths<M: TanhModel>(
    model: &M,
    params: &[f64],
    window: (usize, usize),
    ssr: f64,
) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    let np = M::NP;
    let m = hi - lo;
    let sigma_sq = ssr / (m - np) as f64;
    let mut grad = vec![0.0; np];
    let mut jtj = Mat::zeros(np, np);
    for i in lo..hi {
        model.gradient(params, i as f64, &mut grad);
        for a in 0..np {
            for b in 0..np {
                jtj[(a, b)] += grad[a] * grad[b];
            }
        }
    }
    let mut out = vec![0.0; np];
    for a in 0..np {
        let mut work = jtj.clone();
        let mut e = vec![0.0; np];
        e[a] = 1.0;
        if cholesky_solve(&mut work, &mut e).is_err() {
            // Degenerate Jacobian; report an unbounded interval rather than
            // failing the whole fit.
            out[a] = f64::INFINITY;
            continue;
        }
        out[a] = Z_95 * libm::sqrt(libm::fabs(sigma_sq * e[a]));
    }
    Ok(out)
}

/// Interior zero crossings of a profile, linearly interpolated.
fn crossings(y: &[f64], lo: usize, hi: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for i in lo..hi.saturating_sub(1) {
        if y[i] == 0.0 {
            out.push(i as f64);
        } else if y[i] * y[i + 1] < 0.0 {
            out.push(i as f64 + y[i] / (y[i] - y[i + 1]));
        }
    }
    out
}

fn single_crossing(y: &[f64], lo: usize, hi: usize) -> Result<f64> {
    let c = crossings(y, lo, hi);
    match c.len() {
        1 => Ok(c[0]),
        0 => Err(Error::InvalidParameter("profile has no interior zero crossing".into())),
        n => Err(Error::InvalidParameter(format!(
            "profile has {n} interior zero crossings, expected one"
        ))),
    }
}

/// Initial width guess from the 10-90% rise distance around the crossing;
/// for a hyperbolic tangent that distance is `2 atanh(0.8) ≈ 2.197` widths.
fn rise_width_guess(y: &[f64], lo: usize, hi: usize, center: f64, amp: f64) -> f64 {
    let level = 0.8 * libm::fabs(amp);
    let mut left = center;
    let mut right = center;
    let c = center as usize;
    for i in (lo..=c.min(hi - 1)).rev() {
        if libm::fabs(y[i]) >= level {
            left = i as f64;
            break;
        }
    }
    for i in c..hi {
        if libm::fabs(y[i]) >= level {
            right = i as f64;
            break;
        }
    }
    ((right - left) / (2.0 * libm::atanh(0.8))).max(0.5)
}

/// Fits `A tanh((n - c)/w)` to a wall profile over the boundary-excluded
/// window. Parameters `[A, c, w]` in site units; `A` carries the sign of the
/// wall, `w > 0`.
///
/// # Errors
///
/// [`Error::InvalidParameter`] unless the windowed profile has exactly one
/// zero crossing and enough samples; [`Error::NoConvergence`] never, a stuck
/// iteration returns a flagged result instead.
pub fn fit_kink(phi: &[f64]) -> Result<FitResult> {
    let n = phi.len();
    if n < 2 * FIT_EXCLUSION + 8 {
        return Err(Error::InvalidParameter(format!("profile of {n} sites is too short to fit")));
    }
    let window = (FIT_EXCLUSION, n - FIT_EXCLUSION);
    let center = single_crossing(phi, window.0, window.1)?;
    // Amplitude guess from the windowed extremes; sign from the right side.
    let amp = 0.5 * (phi[window.1 - 1] - phi[window.0]);
    let width = rise_width_guess(phi, window.0, window.1, center, amp);
    gauss_newton(&Wall, vec![amp, center, width], phi, window)
}

/// Fits `A tanh((n - c)/w) + B` to an accumulated-charge profile over the
/// boundary-excluded window. Parameters `[A, c, w, B]` in site units.
///
/// # Errors
///
/// As [`fit_kink`], with the crossing precondition applied to the
/// offset-subtracted profile.
pub fn fit_accumulated_charge(dq: &[f64]) -> Result<FitResult> {
    let n = dq.len();
    if n < 2 * FIT_EXCLUSION + 10 {
        return Err(Error::InvalidParameter(format!("profile of {n} sites is too short to fit")));
    }
    let window = (FIT_EXCLUSION, n - FIT_EXCLUSION);
    let offset = 0.5 * (dq[window.0] + dq[window.1 - 1]);
    let shifted: Vec<f64> = dq.iter().map(|v| v - offset).collect();
    let center = single_crossing(&shifted, window.0, window.1)?;
    let amp = 0.5 * (dq[window.1 - 1] - dq[window.0]);
    let width = rise_width_guess(&shifted, window.0, window.1, center, amp);
    gauss_newton(&WallWithOffset, vec![amp, center, width, offset], dq, window)
}

/// Fits `v = c·tᵃ` by linear regression of `log v` on `log t`, skipping an
/// initial transient. Parameters `[c, a]`; the confidence entry for `c`
/// is propagated from the intercept. `skip_fraction` defaults to 0.1 via
/// [`fit_power_law`].
///
/// # Errors
///
/// [`Error::ShapeMismatch`] on length disagreement,
/// [`Error::InvalidParameter`] for a window with fewer than three points or
/// any non-positive time or value inside it.
pub fn fit_power_law_with(times: &[f64], values: &[f64], skip_fraction: f64) -> Result<FitResult> {
    if times.len() != values.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} times vs {} values",
            times.len(),
            values.len()
        )));
    }
    if !(0.0..1.0).contains(&skip_fraction) {
        return Err(Error::InvalidParameter(format!(
            "skip fraction must lie in [0, 1), got {skip_fraction}"
        )));
    }
    let lo = libm::ceil(skip_fraction * times.len() as f64) as usize;
    let hi = times.len();
    if hi - lo < 3 {
        return Err(Error::InvalidParameter(format!(
            "power-law window [{lo}, {hi}) needs at least 3 points"
        )));
    }
    let mut xs = Vec::with_capacity(hi - lo);
    let mut ys = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        if times[i] <= 0.0 || values[i] <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "non-positive entry at sample {i}: t={}, v={}",
                times[i], values[i]
            )));
        }
        xs.push(libm::log(times[i]));
        ys.push(libm::log(values[i]));
    }
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all window times coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let alpha = sxy / sxx;
    let intercept = ybar - alpha * xbar;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - intercept - alpha * x;
            r * r
        })
        .sum();
    let dof = (xs.len().max(3) - 2) as f64;
    let sigma_sq = ssr / dof;
    let se_alpha = libm::sqrt(sigma_sq / sxx);
    let se_intercept = libm::sqrt(sigma_sq * (1.0 / m + xbar * xbar / sxx));
    let c = libm::exp(intercept);
    Ok(FitResult {
        params: vec![c, alpha],
        // The prefactor interval propagates through exp as a relative width.
        confidence: vec![c * (libm::exp(Z_95 * se_intercept) - 1.0), Z_95 * se_alpha],
        residual_norm: libm::sqrt(ssr),
        window: (lo, hi),
        converged: true,
    })
}

/// [`fit_power_law_with`] skipping the default initial 10% of samples.
///
/// # Errors
///
/// As [`fit_power_law_with`].
pub fn fit_power_law(times: &[f64], values: &[f64]) -> Result<FitResult> {
    fit_power_law_with(times, values, 0.1)
}

/// Verdict of [`classify_growth`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthClass {
    /// The series follows `c·tᵃ` within the residual threshold.
    PowerLaw {
        /// Fitted exponent.
        alpha: f64,
    },
    /// The power law is rejected and the series stays within a bounded band
    /// around its window mean.
    BoundedOscillation {
        /// Half-width of the band relative to the mean.
        relative_band: f64,
    },
    /// The power law is rejected without the series being bounded.
    Irregular,
}

/// RMS log-residual threshold above which a power law is rejected.
const POWER_LAW_RMS_TOL: f64 = 0.05;

/// Classifies a width history as power-law growth, bounded oscillation, or
/// neither. Uses the same skip window as [`fit_power_law`].
///
/// # Errors
///
/// As [`fit_power_law`].
pub fn classify_growth(times: &[f64], values: &[f64]) -> Result<GrowthClass> {
    let fit = fit_power_law(times, values)?;
    let (lo, hi) = fit.window;
    let rms = fit.residual_norm / libm::sqrt((hi - lo) as f64);
    if rms < POWER_LAW_RMS_TOL {
        return Ok(GrowthClass::PowerLaw { alpha: fit.params[1] });
    }
    let w = &values[lo..hi];
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let spread = w.iter().map(|v| libm::fabs(v - mean)).fold(0.0, f64::max);
    // Bounded means the band stays well under the mean level and the series
    // keeps returning through it rather than trending away.
    let last = values[hi - 1];
    if spread < 0.5 * libm::fabs(mean) && libm::fabs(last - mean) < spread + 1e-12 {
        Ok(GrowthClass::BoundedOscillation { relative_band: spread / libm::fabs(mean) })
    } else {
        Ok(GrowthClass::Irregular)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianSampler;
    use approx::assert_abs_diff_eq;

    fn tanh_profile(n: usize, amp: f64, center: f64, width: f64) -> Vec<f64> {
        (0..n).map(|i| amp * libm::tanh((i as f64 - center) / width)).collect()
    }

    #[test]
    fn exact_wall_is_recovered_to_machine_precision() {
        let y = tanh_profile(100, 5.0, 50.3, 3.0);
        let fit = fit_kink(&y).unwrap();
        assert!(fit.converged);
        assert_abs_diff_eq!(fit.params[0], 5.0, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.params[1], 50.3, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.params[2], 3.0, epsilon = 1e-8);
        assert!(fit.residual_norm < 1e-10);
        assert_eq!(fit.window, (FIT_EXCLUSION, 100 - FIT_EXCLUSION));
    }

    #[test]
    fn antikink_amplitude_keeps_its_sign() {
        let y = tanh_profile(80, -2.5, 39.5, 2.0);
        let fit = fit_kink(&y).unwrap();
        assert_abs_diff_eq!(fit.params[0], -2.5, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.params[2], 2.0, epsilon = 1e-8);
    }

    #[test]
    fn noisy_wall_width_is_recovered_within_five_percent() {
        let mut rng = GaussianSampler::for_trajectory(42, 0);
        let clean = tanh_profile(100, 5.0, 49.5, 3.0);
        let noisy: Vec<f64> =
            clean.iter().map(|v| v + 0.05 * 5.0 * rng.standard_normal()).collect();
        let fit = fit_kink(&noisy).unwrap();
        assert!(fit.converged);
        assert!((fit.params[2] - 3.0).abs() / 3.0 < 0.05, "width {}", fit.params[2]);
        // The linearized interval is meaningful at this noise level.
        assert!(fit.confidence[2] > 1e-3 && fit.confidence[2] < 1.0);
    }

    #[test]
    fn charge_profile_offset_and_amplitude_recover_exactly() {
        let n = 100;
        let y: Vec<f64> = (0..n)
            .map(|i| 0.25 * libm::tanh((i as f64 - 47.2) / 4.0) + 0.25)
            .collect();
        let fit = fit_accumulated_charge(&y).unwrap();
        assert!(fit.converged);
        assert_abs_diff_eq!(fit.params[0], 0.25, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.params[1], 47.2, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.params[2], 4.0, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.params[3], 0.25, epsilon = 1e-8);
    }

    #[test]
    fn crossing_preconditions_are_enforced() {
        assert!(fit_kink(&vec![1.0; 64]).is_err());
        let two_walls: Vec<f64> = (0..100)
            .map(|i| {
                let x = i as f64;
                libm::tanh((x - 30.0) / 2.0) - libm::tanh((x - 70.0) / 2.0) - 1.0
            })
            .collect();
        assert!(fit_kink(&two_walls).is_err());
        assert!(fit_kink(&[0.0; 10]).is_err());
    }

    #[test]
    fn pure_power_law_exponent_is_exact() {
        let times: Vec<f64> = (1..200).map(|i| 0.1 * i as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| 2.0 * libm::pow(*t, 0.5)).collect();
        let fit = fit_power_law(&times, &values).unwrap();
        assert_abs_diff_eq!(fit.params[1], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.params[0], 2.0, epsilon = 1e-9);
        assert!(fit.residual_norm < 1e-10);
    }

    #[test]
    fn initial_transient_is_excluded_from_the_window() {
        let times: Vec<f64> = (1..=200).map(|i| 0.1 * i as f64).collect();
        let mut values: Vec<f64> = times.iter().map(|t| 2.0 * libm::pow(*t, 0.5)).collect();
        // Corrupt the skipped prefix only.
        for v in values.iter_mut().take(20) {
            *v = 77.0;
        }
        let fit = fit_power_law(&times, &values).unwrap();
        assert_eq!(fit.window.0, 20);
        assert_abs_diff_eq!(fit.params[1], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn non_positive_window_entries_are_rejected() {
        let times: Vec<f64> = (1..=50).map(|i| i as f64).collect();
        let mut values: Vec<f64> = times.iter().map(|t| t.sqrt()).collect();
        values[30] = 0.0;
        assert!(fit_power_law(&times, &values).is_err());
        values[30] = -1.0;
        assert!(fit_power_law(&times, &values).is_err());
        let bad_times: Vec<f64> = (0..50).map(|i| i as f64 - 10.0).collect();
        let ones = vec![1.0; 50];
        assert!(fit_power_law(&bad_times, &ones).is_err());
    }

    #[test]
    fn growth_classifier_separates_power_law_from_oscillation() {
        let times: Vec<f64> = (1..=300).map(|i| 0.1 * i as f64).collect();
        let growing: Vec<f64> = times.iter().map(|t| 1.5 * libm::pow(*t, 0.6)).collect();
        match classify_growth(&times, &growing).unwrap() {
            GrowthClass::PowerLaw { alpha } => assert_abs_diff_eq!(alpha, 0.6, epsilon = 1e-6),
            other => panic!("expected power law, got {other:?}"),
        }
        let pinned: Vec<f64> =
            times.iter().map(|t| 3.0 + 0.3 * libm::sin(2.0 * t)).collect();
        match classify_growth(&times, &pinned).unwrap() {
            GrowthClass::BoundedOscillation { relative_band } => {
                assert!(relative_band > 0.05 && relative_band < 0.2);
            }
            other => panic!("expected bounded oscillation, got {other:?}"),
        }
    }

    #[test]
    fn amplitude_confidence_shrinks_with_more_data() {
        // The amplitude gradient spans the whole window, so tail samples
        // keep tightening it; the center gradient is localized at the wall
        // and would not shrink this way.
        let mut rng = GaussianSampler::for_trajectory(7, 0);
        let mut half_widths = Vec::new();
        for n in [60usize, 240] {
            let clean = tanh_profile(n, 5.0, n as f64 / 2.0 - 0.5, 3.0);
            let noisy: Vec<f64> =
                clean.iter().map(|v| v + 0.1 * rng.standard_normal()).collect();
            let fit = fit_kink(&noisy).unwrap();
            half_widths.push(fit.confidence[0]);
        }
        assert!(half_widths[1] < 0.7 * half_widths[0]);
    }
}
