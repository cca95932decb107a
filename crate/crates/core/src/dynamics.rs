//! Frequency-domain solvers for the two-mode filter, the degenerate
//! parametric amplifier, and the optical loss budget.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, I, ZERO};
use crate::statespace::{ss_to_tf, StateSpace};
use crate::synthesis::C_LIGHT;

/// Main mode `a` coupled to a fast auxiliary mode `b` by two-mode squeezing,
/// with `b` coupled to the external field and loss ports on both modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoModeModel {
    pub s0: f64,
    pub gamma: f64,
    #[serde(default)]
    pub gamma_a_loss: f64,
    #[serde(default)]
    pub gamma_b_loss: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_b: Option<f64>,
}

impl TwoModeModel {
    pub fn lossless(s0: f64, gamma: f64) -> Self {
        TwoModeModel {
            s0,
            gamma,
            gamma_a_loss: 0.0,
            gamma_b_loss: 0.0,
            length_a: None,
            length_b: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [self.s0, self.gamma, self.gamma_a_loss, self.gamma_b_loss];
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidParameter("rates must be finite and non-negative".into()));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter("auxiliary bandwidth must be positive".into()));
        }
        Ok(())
    }

    /// `eps c / (4 L)` for a round-trip loss `eps` in a cavity of length `length`.
    pub fn loss_rate(eps: f64, length: f64) -> f64 {
        eps * C_LIGHT / (4.0 * length)
    }

    /// Doubled-up model with ports `(u, n_a, n_b)` and state `(a, a^H, b, b^H)`.
    pub fn state_space(&self) -> Result<StateSpace> {
        self.validate()?;
        let g = (self.s0 * self.gamma).sqrt();
        let (ga, gb, gm) = (self.gamma_a_loss, self.gamma_b_loss, self.gamma);
        let r = |x: f64| C64::new(x, 0.0);
        let a = CMat::from_row_slice(
            4,
            4,
            &[
                r(-ga), ZERO, ZERO, I * g,
                ZERO, r(-ga), -I * g, ZERO,
                ZERO, I * g, r(-(gm + gb)), ZERO,
                -I * g, ZERO, ZERO, r(-(gm + gb)),
            ],
        );
        let (ka, kb, kg) = ((2.0 * ga).sqrt(), (2.0 * gb).sqrt(), (2.0 * gm).sqrt());
        let mut b = CMat::zeros(4, 6);
        b[(2, 0)] = r(kg);
        b[(3, 1)] = r(kg);
        b[(0, 2)] = r(ka);
        b[(1, 3)] = r(ka);
        b[(2, 4)] = r(kb);
        b[(3, 5)] = r(kb);
        let c = b.transpose();
        let d = CMat::identity(6, 6).scale(-1.0);
        StateSpace::new(a, b, c, d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IoResponse {
    #[serde(with = "crate::tfio::cx")]
    pub signal: C64,
    /// Coefficient of `n_a^H` in `y`.
    #[serde(with = "crate::tfio::cx")]
    pub noise_a: C64,
    /// Coefficient of `n_b` in `y`.
    #[serde(with = "crate::tfio::cx")]
    pub noise_b: C64,
    /// `|y <- n_a|^2 + |y <- n_a^H|^2`.
    pub noise_a_power: f64,
    /// `|y <- n_b|^2 + |y <- n_b^H|^2`.
    pub noise_b_power: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossyResponse {
    pub omega: f64,
    pub full: IoResponse,
    pub approx: IoResponse,
    /// `max(|signal difference|, |noise_a difference|)`.
    pub difference: f64,
}

fn solve_response(model: &TwoModeModel, omega: f64) -> Result<IoResponse> {
    let ss = model.state_space()?;
    let g = ss_to_tf(&ss, C64::new(0.0, omega))?;
    Ok(IoResponse {
        signal: g[(0, 0)],
        noise_a: g[(0, 3)],
        noise_b: g[(0, 4)],
        noise_a_power: g[(0, 2)].norm_sqr() + g[(0, 3)].norm_sqr(),
        noise_b_power: g[(0, 4)].norm_sqr() + g[(0, 5)].norm_sqr(),
    })
}

/// Exact `u -> y` coefficient of the lossless two-mode model.
pub fn two_mode_transfer(model: &TwoModeModel, omega: f64) -> Result<C64> {
    if model.gamma_a_loss != 0.0 || model.gamma_b_loss != 0.0 {
        return Err(Error::InvalidParameter("two_mode_transfer expects a lossless model".into()));
    }
    Ok(solve_response(model, omega)?.signal)
}

/// `(i w - s0)/(i w + s0)`, the target response.
pub fn target_response(s0: f64, omega: f64) -> C64 {
    (C64::new(-s0, omega)) / (C64::new(s0, omega))
}

/// First-order loss closed form for `signal` and `n_a^H` coefficients.
pub fn lossy_closed_form(s0: f64, gamma_a: f64, omega: f64) -> (C64, C64) {
    let den = C64::new(omega, gamma_a - s0);
    let signal = C64::new(omega, gamma_a + s0) / den;
    let noise = C64::new(2.0 * (s0 * gamma_a).sqrt(), 0.0) / den;
    (signal, noise)
}

/// Full four-operator solve alongside the closed form.
pub fn lossy_transfer(model: &TwoModeModel, omega: f64) -> Result<LossyResponse> {
    let full = solve_response(model, omega)?;
    let (signal, noise) = lossy_closed_form(model.s0, model.gamma_a_loss, omega);
    let approx = IoResponse {
        signal,
        noise_a: noise,
        noise_b: ZERO,
        noise_a_power: noise.norm_sqr(),
        noise_b_power: 0.0,
    };
    let difference = (full.signal - approx.signal)
        .norm()
        .max((full.noise_a.norm() - approx.noise_a.norm()).abs());
    Ok(LossyResponse {
        omega,
        full,
        approx,
        difference,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseRatio {
    pub omega: f64,
    /// `w^2 gamma_b / (s0 gamma gamma_a)`.
    pub formula: f64,
    /// Full-solve noise power ratio `b / a`.
    pub full: f64,
}

pub fn noise_ratio_b_over_a(model: &TwoModeModel, omega: f64) -> Result<NoiseRatio> {
    if model.gamma_a_loss <= 0.0 {
        return Err(Error::InvalidParameter("noise ratio needs a positive main-mode loss rate".into()));
    }
    let formula = omega * omega * model.gamma_b_loss / (model.s0 * model.gamma * model.gamma_a_loss);
    let r = solve_response(model, omega)?;
    Ok(NoiseRatio {
        omega,
        formula,
        full: r.noise_b_power / r.noise_a_power,
    })
}

/// Amplitude-quadrature reflection of a cavity with a single-pass gain crystal.
pub fn dpa_exact_io(reflectivity: f64, r: f64, length: f64, omega: f64) -> Result<C64> {
    if !(reflectivity > 0.0 && reflectivity < 1.0) || !(r >= 0.0) || !(length > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < R < 1, r >= 0, L > 0; got R = {reflectivity}, r = {r}, L = {length}"
        )));
    }
    let sr = reflectivity.sqrt();
    let prop = C64::from_polar((2.0 * r).exp(), 2.0 * omega * length / C_LIGHT);
    let den = C64::new(1.0, 0.0) - sr * prop;
    if den.norm() < 1e-12 {
        return Err(Error::Singular {
            s: format!("{omega}"),
            sigma_min: den.norm(),
        });
    }
    Ok((prop - sr) / den)
}

/// Adiabatic form `(gamma + 2 sqrt(s0 gamma) + i w) / (gamma - 2 sqrt(s0 gamma) - i w)`.
///
/// The degenerate pump `-sqrt(s0 gamma) (a^H^2 + a^2)` drives the amplitude
/// quadrature at twice the pump coefficient.
pub fn dpa_adiabatic_io(gamma: f64, s0: f64, omega: f64) -> Result<C64> {
    let k = 2.0 * (s0 * gamma).sqrt();
    let den = C64::new(gamma - k, -omega);
    if den.norm() <= 1e-12 * (gamma + k + omega.abs()) {
        return Err(Error::Singular {
            s: format!("{omega}"),
            sigma_min: den.norm(),
        });
    }
    Ok(C64::new(gamma + k, omega) / den)
}

/// Definition of the noise-to-signal figure used for loss budgets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioConvention {
    /// `|noise|^2 / |signal|^2`.
    Power,
    /// `|noise| / |signal|`.
    Amplitude,
}

impl RatioConvention {
    pub fn name(&self) -> &'static str {
        match self {
            RatioConvention::Power => "power",
            RatioConvention::Amplitude => "amplitude",
        }
    }
}

/// DC noise-to-signal figure of the closed-form loss model.
pub fn dc_noise_ratio(s0: f64, gamma_a: f64, conv: RatioConvention) -> f64 {
    let (s, n) = lossy_closed_form(s0, gamma_a, 0.0);
    let p = n.norm_sqr() / s.norm_sqr();
    match conv {
        RatioConvention::Power => p,
        RatioConvention::Amplitude => p.sqrt(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossPoint {
    pub length_a: f64,
    pub eps_a: f64,
    pub eps_per_length: f64,
}

/// Main-mode loss rate at which the DC noise figure equals `target`.
pub fn solve_loss_rate(s0: f64, target: f64, conv: RatioConvention) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidParameter(format!("target ratio {target} must lie in (0, 1)")));
    }
    let (mut lo, mut hi) = (0.0, s0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dc_noise_ratio(s0, mid, conv) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Required main-cavity loss for each cavity length, with `s0 = c / L_arm`.
pub fn loss_requirement_curve(
    l_arm: f64,
    target: f64,
    lengths: &[f64],
    conv: RatioConvention,
) -> Result<Vec<LossPoint>> {
    if !(l_arm > 0.0) {
        return Err(Error::InvalidParameter("arm length must be positive".into()));
    }
    let s0 = C_LIGHT / l_arm;
    let ga = solve_loss_rate(s0, target, conv)?;
    lengths
        .iter()
        .map(|&l| {
            if !(l > 0.0) {
                return Err(Error::InvalidParameter(format!("cavity length {l} must be positive")));
            }
            let eps = 4.0 * l * ga / C_LIGHT;
            Ok(LossPoint {
                length_a: l,
                eps_a: eps,
                eps_per_length: eps / l,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega: f64,
    #[serde(with = "crate::tfio::cx")]
    pub signal: C64,
    pub signal_power: f64,
    pub noise_a_power: f64,
    pub noise_b_power: f64,
    /// `None` when the main-mode loss rate is zero.
    pub formula_ratio: Option<f64>,
}

/// Evaluates the lossy model over `omegas`; output order follows the input.
pub fn sweep(model: &TwoModeModel, omegas: &[f64]) -> Result<Vec<SweepRow>> {
    omegas
        .iter()
        .map(|&w| {
            let r = solve_response(model, w)?;
            let formula_ratio = if model.gamma_a_loss > 0.0 {
                Some(w * w * model.gamma_b_loss / (model.s0 * model.gamma * model.gamma_a_loss))
            } else {
                None
            };
            Ok(SweepRow {
                omega: w,
                signal: r.signal,
                signal_power: r.signal.norm_sqr(),
                noise_a_power: r.noise_a_power,
                noise_b_power: r.noise_b_power,
                formula_ratio,
            })
        })
        .collect()
}
