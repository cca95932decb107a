//! Decomposition of an oscillator into one-mode parts and mapping of every
//! term onto optical hardware parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{identity, CMat, C64, I};
use crate::oscillator::GeneralizedOpenOscillator;
use crate::tfio::cx;

/// Speed of light in m/s.
pub const C_LIGHT: f64 = 299_792_458.0;

const ZERO_ROW_TOL: f64 = 1e-14;

/// Coupling of one mode to one external channel through an auxiliary mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRealization {
    pub channel: usize,
    #[serde(with = "cx")]
    pub alpha: C64,
    #[serde(with = "cx")]
    pub beta: C64,
    pub gamma_aux: f64,
    /// Beamsplitter coupling for the `alpha` part.
    #[serde(with = "cx")]
    pub eps2: C64,
    /// Two-mode-squeezing pump for the `beta` part.
    #[serde(with = "cx")]
    pub eps1: C64,
    pub theta_bs: f64,
    pub phi: f64,
}

impl CouplingRealization {
    /// Residual of `alpha = -conj(eps2) sqrt(2/gamma)`, `beta = eps1 sqrt(2/gamma)`, `eps2 = 2 theta e^{-i phi}`.
    pub fn consistency_residual(&self) -> f64 {
        let k = (2.0 / self.gamma_aux).sqrt();
        let ra = (self.alpha + self.eps2.conj() * k).norm();
        let rb = (self.beta - self.eps1 * k).norm();
        let re = (self.eps2 - C64::from_polar(2.0 * self.theta_bs, -self.phi)).norm();
        ra.max(rb).max(re)
    }
}

/// Internal Hamiltonian `Delta a^H a + eps (a^H)^2 + conj(eps) a^2` as a detuned parametric amplifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InternalRealization {
    pub delta: f64,
    #[serde(with = "cx")]
    pub epsilon: C64,
    /// Single-pass squeezing factor `2 |eps| L / c` when a cavity length is given.
    pub crystal_r: Option<f64>,
    pub cavity_length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneModeRealization {
    pub mode_id: usize,
    pub internal: InternalRealization,
    pub couplings: Vec<CouplingRealization>,
}

/// `eps2 a_k^H a_l + eps1 a_k^H a_l^H` plus Hermitian conjugates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionTerm {
    pub modes: (usize, usize),
    #[serde(with = "cx")]
    pub eps1: C64,
    #[serde(with = "cx")]
    pub eps2: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionHardware {
    pub modes: (usize, usize),
    pub theta_bs: f64,
    pub phi: f64,
    /// Effective crystal pump `-2 i eps1`.
    #[serde(with = "cx")]
    pub pump: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrystalParams {
    pub mode_id: usize,
    pub channel: usize,
    pub r: f64,
    pub cavity_length: f64,
    pub mirror_transmissivity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalRealization {
    pub oscillators: Vec<OneModeRealization>,
    pub interactions: Vec<InteractionHardware>,
    pub interaction_terms: Vec<InteractionTerm>,
    pub series_order: Vec<usize>,
    pub crystal_params: Vec<CrystalParams>,
    pub gamma_aux: f64,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub oscillators: Vec<GeneralizedOpenOscillator>,
    pub interactions: Vec<InteractionTerm>,
    pub series_order: Vec<usize>,
}

fn block_is_zero(k: &CMat, mode: usize) -> bool {
    k.columns(2 * mode, 2).iter().all(|z| z.norm() <= ZERO_ROW_TOL)
}

/// Splits into one-mode oscillators, direct interactions and the cascade order.
pub fn decompose_network(goo: &GeneralizedOpenOscillator) -> Result<Decomposition> {
    let (n, m) = (goo.n(), goo.m());
    let series_order: Vec<usize> = (0..n).filter(|&k| !block_is_zero(goo.k(), k)).collect();
    let first = series_order.first().copied().unwrap_or(0);
    let o = goo.omega();
    let mut oscillators = Vec::with_capacity(n);
    for k in 0..n {
        let s = if k == first { goo.s().clone() } else { identity(m) };
        let kk = goo.k().columns(2 * k, 2).into_owned();
        let ok = o.view((2 * k, 2 * k), (2, 2)).into_owned();
        oscillators.push(GeneralizedOpenOscillator::new(s, kk, ok)?);
    }
    let mut interactions = Vec::new();
    for k in 0..n {
        for l in (k + 1)..n {
            let eps2 = o[(2 * k, 2 * l)] + o[(2 * l + 1, 2 * k + 1)];
            let eps1 = o[(2 * k, 2 * l + 1)] + o[(2 * l, 2 * k + 1)];
            if eps1.norm() > 0.0 || eps2.norm() > 0.0 {
                interactions.push(InteractionTerm {
                    modes: (k, l),
                    eps1,
                    eps2,
                });
            }
        }
    }
    Ok(Decomposition {
        oscillators,
        interactions,
        series_order,
    })
}

/// Reassembles `Omega` from the diagonal blocks and the interaction terms.
pub fn reconstruct_omega(dec: &Decomposition) -> CMat {
    let n = dec.oscillators.len();
    let mut o = CMat::zeros(2 * n, 2 * n);
    for (k, osc) in dec.oscillators.iter().enumerate() {
        o.view_mut((2 * k, 2 * k), (2, 2)).copy_from(osc.omega());
    }
    for t in &dec.interactions {
        let (k, l) = t.modes;
        let (h2, h1) = (t.eps2 * 0.5, t.eps1 * 0.5);
        o[(2 * k, 2 * l)] = h2;
        o[(2 * l + 1, 2 * k + 1)] = h2;
        o[(2 * l, 2 * k)] = h2.conj();
        o[(2 * k + 1, 2 * l + 1)] = h2.conj();
        o[(2 * k, 2 * l + 1)] = h1;
        o[(2 * l, 2 * k + 1)] = h1;
        o[(2 * l + 1, 2 * k)] = h1.conj();
        o[(2 * k + 1, 2 * l)] = h1.conj();
    }
    o
}

/// Couples `L = alpha a + beta a^H` through an auxiliary mode of bandwidth `gamma_aux`.
///
/// Returns `None` for a zero row, which needs no auxiliary mode.
pub fn realize_coupling(alpha: C64, beta: C64, gamma_aux: f64, channel: usize) -> Result<Option<CouplingRealization>> {
    if !(gamma_aux > 0.0 && gamma_aux.is_finite()) {
        return Err(Error::InvalidParameter(format!("auxiliary bandwidth {gamma_aux} must be positive")));
    }
    if alpha.norm() <= ZERO_ROW_TOL && beta.norm() <= ZERO_ROW_TOL {
        return Ok(None);
    }
    let k = (gamma_aux / 2.0).sqrt();
    let eps2 = -alpha.conj() * k;
    let eps1 = beta * k;
    let phi = if eps2.norm() == 0.0 { 0.0 } else { -eps2.arg() };
    let out = CouplingRealization {
        channel,
        alpha,
        beta,
        gamma_aux,
        eps2,
        eps1,
        theta_bs: eps2.norm() / 2.0,
        phi,
    };
    let scale = alpha.norm().max(beta.norm()).max(eps1.norm()).max(eps2.norm());
    if out.consistency_residual() > 1e-12 * scale.max(1.0) {
        return Err(Error::Invariant("coupling parameters are inconsistent".into()));
    }
    Ok(Some(out))
}

/// Detuning and internal pump from a Hermitian `2 x 2` block of `Omega`.
pub fn realize_internal(block: &CMat, cavity_length: Option<f64>) -> Result<InternalRealization> {
    if block.shape() != (2, 2) {
        return Err(Error::Dimension(format!("internal block is {}x{}", block.nrows(), block.ncols())));
    }
    let herm = (block[(0, 1)] - block[(1, 0)].conj()).norm()
        + block[(0, 0)].im.abs()
        + block[(1, 1)].im.abs();
    if herm > 1e-12 * crate::linalg::max_abs(block).max(1.0) {
        return Err(Error::Invariant("internal block is not Hermitian".into()));
    }
    let delta = (block[(0, 0)] + block[(1, 1)]).re;
    let epsilon = block[(0, 1)];
    let crystal_r = match cavity_length {
        Some(l) if l > 0.0 => Some(2.0 * epsilon.norm() * l / C_LIGHT),
        Some(l) => return Err(Error::InvalidParameter(format!("cavity length {l} must be positive"))),
        None => None,
    };
    Ok(InternalRealization {
        delta,
        epsilon,
        crystal_r,
        cavity_length,
    })
}

/// Beamsplitter angle, phase and crystal pump for a direct interaction.
pub fn realize_interaction(term: &InteractionTerm) -> InteractionHardware {
    InteractionHardware {
        modes: term.modes,
        theta_bs: term.eps2.norm() / 2.0,
        phi: if term.eps2.norm() == 0.0 { 0.0 } else { -term.eps2.arg() },
        pump: -2.0 * I * term.eps1,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrystalMapping {
    /// `T c / (4 L)`.
    pub gamma: f64,
    /// `sqrt(s0 gamma)`.
    pub coupling_rate: f64,
    /// `2 sqrt(s0 gamma) L / c`.
    pub r: f64,
}

/// Cavity bandwidth and single-pass squeezing factor for a target rate `s0`.
pub fn map_crystal_params(s0: f64, length: f64, transmissivity: f64) -> Result<CrystalMapping> {
    if !(length > 0.0) {
        return Err(Error::InvalidParameter(format!("cavity length {length} must be positive")));
    }
    if !(0.0..1.0).contains(&transmissivity) || !(s0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= T < 1 and s0 >= 0, got T = {transmissivity}, s0 = {s0}"
        )));
    }
    let gamma = transmissivity * C_LIGHT / (4.0 * length);
    let coupling_rate = (s0 * gamma).sqrt();
    Ok(CrystalMapping {
        gamma,
        coupling_rate,
        r: 2.0 * coupling_rate * length / C_LIGHT,
    })
}

/// Mirror transmissivity giving bandwidth `gamma` for a cavity of length `length`.
pub fn transmissivity_for(gamma: f64, length: f64) -> f64 {
    4.0 * length * gamma / C_LIGHT
}

/// Squeezing factor for the unstable filter with `s0 = c / L_arm`.
pub fn required_squeezing(t_b: f64, l_b: f64, l_arm: f64) -> Result<f64> {
    if !(l_arm > 0.0 && t_b > 0.0) {
        return Err(Error::InvalidParameter("inputs must be positive".into()));
    }
    Ok(map_crystal_params(C_LIGHT / l_arm, l_b, t_b)?.r)
}

/// Full hardware mapping of an oscillator.
pub fn synthesize(
    goo: &GeneralizedOpenOscillator,
    gamma_aux: f64,
    cavity_length: Option<f64>,
) -> Result<PhysicalRealization> {
    let dec = decompose_network(goo)?;
    let mut oscillators = Vec::new();
    let mut crystal_params = Vec::new();
    for (mode, osc) in dec.oscillators.iter().enumerate() {
        let internal = realize_internal(osc.omega(), cavity_length)?;
        let mut couplings = Vec::new();
        for ch in 0..osc.m() {
            if let Some(cr) = realize_coupling(osc.k()[(ch, 0)], osc.k()[(ch, 1)], gamma_aux, ch)? {
                if let Some(l) = cavity_length {
                    let t = transmissivity_for(gamma_aux, l);
                    crystal_params.push(CrystalParams {
                        mode_id: mode,
                        channel: ch,
                        r: 2.0 * cr.eps1.norm() * l / C_LIGHT,
                        cavity_length: l,
                        mirror_transmissivity: t,
                    });
                }
                couplings.push(cr);
            }
        }
        oscillators.push(OneModeRealization {
            mode_id: mode,
            internal,
            couplings,
        });
    }
    Ok(PhysicalRealization {
        oscillators,
        interactions: dec.interactions.iter().map(realize_interaction).collect(),
        interaction_terms: dec.interactions.clone(),
        series_order: dec.series_order,
        crystal_params,
        gamma_aux,
    })
}

/// Zero-padded `Omega` block helper for a single detuned mode.
pub fn detuned_block(delta: f64, epsilon: C64) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[C64::new(delta / 2.0, 0.0), epsilon, epsilon.conj(), C64::new(delta / 2.0, 0.0)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re, ZERO};

    #[test]
    fn unstable_filter_coupling() {
        let (s0, g) = (1.0, 100.0);
        let cr = realize_coupling(ZERO, re(-(2.0 * s0 as f64).sqrt()), g, 0).unwrap().unwrap();
        assert!((cr.eps1 - re(-(s0 * g as f64).sqrt())).norm() < 1e-12);
        assert_eq!(cr.eps2, ZERO);
        assert_eq!(cr.theta_bs, 0.0);
    }

    #[test]
    fn passive_decay_coupling() {
        let g0 = 0.3;
        let cr = realize_coupling(re((2.0f64 * g0).sqrt()), ZERO, 50.0, 0).unwrap().unwrap();
        assert_eq!(cr.eps1, ZERO);
        assert!((cr.eps2.norm() - (g0 * 50.0f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_coupling_needs_no_aux_mode() {
        assert!(realize_coupling(ZERO, ZERO, 10.0, 0).unwrap().is_none());
    }

    #[test]
    fn internal_block_examples() {
        let r = realize_internal(&CMat::zeros(2, 2), None).unwrap();
        assert_eq!((r.delta, r.epsilon), (0.0, ZERO));
        let r = realize_internal(&detuned_block(0.4, ZERO), None).unwrap();
        assert!((r.delta - 0.4).abs() < 1e-15);
        let r = realize_internal(&detuned_block(0.0, re(1e4)), Some(1.0)).unwrap();
        assert!((r.crystal_r.unwrap() - 2e4 / C_LIGHT).abs() < 1e-18);
    }

    #[test]
    fn interaction_hardware() {
        let h = realize_interaction(&InteractionTerm {
            modes: (0, 1),
            eps1: ZERO,
            eps2: re(0.8),
        });
        assert_eq!((h.theta_bs, h.phi), (0.4, 0.0));
        let h = realize_interaction(&InteractionTerm {
            modes: (0, 1),
            eps1: c(0.0, 3.0),
            eps2: ZERO,
        });
        assert!((h.pump - re(6.0)).norm() < 1e-15);
    }

    #[test]
    fn squeezing_scaling() {
        let r0 = required_squeezing(100e-6, 0.24, 4000.0).unwrap();
        let r1 = required_squeezing(400e-6, 0.24, 4000.0).unwrap();
        let r2 = required_squeezing(100e-6, 0.24, 16000.0).unwrap();
        assert!((r1 / r0 - 2.0).abs() < 1e-12);
        assert!((r2 / r0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn crystal_mapping_limits() {
        let m = map_crystal_params(1e5, 0.24, 0.0).unwrap();
        assert_eq!((m.gamma, m.r), (0.0, 0.0));
        let g0 = 1234.5;
        let t = transmissivity_for(g0, 0.3);
        assert!((map_crystal_params(1.0, 0.3, t).unwrap().gamma - g0).abs() < 1e-9);
    }
}
