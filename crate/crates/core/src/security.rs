//! Asymptotic security analysis against collective attacks.
//!
//! The per-channel lower bound on the secret key rate is
//! `K̃_(k) = β·I_AB - S_BE` with the Holevo bound evaluated on the Gaussian
//! equivalent state. The channel contributes `χ_line`, the detector `χ_h/T`,
//! and the subcarrier scheme adds the intermodulation source noise `ε_S(k)`
//! on top of the modulation variance wherever `V` appears.
//!
//! Conventions (shot-noise units throughout):
//! - `V = V_A + 1`, and every covariance formula uses `V' = V + ε_S(k)`.
//! - `χ_line = 1/T - 1 + ε` with the excess noise `ε` referred to the channel
//!   input, so a vacuum input reaches Bob with variance `1 + Tε`. The
//!   alternative of keeping `ε` out of `χ_line` would make the simulated
//!   excess noise a no-op; this placement is the one that reproduces the
//!   expected loss/noise trade-off.
//! - `χ_h = (1 - η + v_el)/η` referred to Bob's input.

use crate::error::{Error, Result};
use crate::intermod::{intermod_noise_ratio, ModulationConfig};
use crate::spectrum::ChannelPlan;

/// Relative tolerance for clamping tiny negative discriminants and
/// eigenvalue dips produced by floating-point cancellation near pure-state
/// limits. Anything more negative is a hard numerical error.
const CLAMP_TOL: f64 = 1e-9;

/// Fiber loss model: `T = 10^(-0.02 L)`, i.e. 0.2 dB/km.
const LOSS_DB_PER_KM: f64 = 0.2;

/// Quantum channel: distance, transmittance and excess noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkModel {
    distance_km: f64,
    transmittance: f64,
    excess_noise: f64,
}

impl LinkModel {
    /// Builds the link from a fiber length at 0.2 dB/km.
    pub fn from_distance(distance_km: f64, excess_noise: f64) -> Result<Self> {
        if !(distance_km >= 0.0) || !distance_km.is_finite() {
            return Err(Error::invalid("distance_km", "must be >= 0 and finite"));
        }
        check_excess(excess_noise)?;
        Ok(LinkModel {
            distance_km,
            transmittance: 10f64.powf(-LOSS_DB_PER_KM / 10.0 * distance_km),
            excess_noise,
        })
    }

    /// Builds the link from a transmittance in `(0, 1]`.
    pub fn from_transmittance(transmittance: f64, excess_noise: f64) -> Result<Self> {
        if !(transmittance > 0.0 && transmittance <= 1.0) {
            return Err(Error::invalid("transmittance", "must be in (0, 1]"));
        }
        check_excess(excess_noise)?;
        Ok(LinkModel {
            distance_km: -10.0 / LOSS_DB_PER_KM * transmittance.log10(),
            transmittance,
            excess_noise,
        })
    }

    pub fn distance_km(&self) -> f64 {
        self.distance_km
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    pub fn excess_noise(&self) -> f64 {
        self.excess_noise
    }

    /// Channel-added noise referred to the channel input:
    /// `χ_line = 1/T - 1 + ε`.
    pub fn chi_line(&self) -> f64 {
        1.0 / self.transmittance - 1.0 + self.excess_noise
    }
}

fn check_excess(excess_noise: f64) -> Result<()> {
    if !(excess_noise >= 0.0) || !excess_noise.is_finite() {
        return Err(Error::invalid("excess_noise", "must be >= 0 and finite"));
    }
    Ok(())
}

/// Homodyne detector: efficiency and electronic noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    efficiency: f64,
    electronic_noise: f64,
}

impl DetectorModel {
    pub fn new(efficiency: f64, electronic_noise: f64) -> Result<Self> {
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::invalid("efficiency", "must be in (0, 1]"));
        }
        if !(electronic_noise >= 0.0) || !electronic_noise.is_finite() {
            return Err(Error::invalid("electronic_noise", "must be >= 0 and finite"));
        }
        Ok(DetectorModel {
            efficiency,
            electronic_noise,
        })
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn electronic_noise(&self) -> f64 {
        self.electronic_noise
    }

    /// Detector-added noise referred to Bob's input:
    /// `χ_h = (1 - η + v_el)/η`.
    pub fn chi_h(&self) -> f64 {
        (1.0 - self.efficiency + self.electronic_noise) / self.efficiency
    }

    /// Variance of the EPR state that models the detector in the
    /// entanglement-based picture, `v = (1 - η + v_el)/(1 - η)`.
    ///
    /// `None` for a unit-efficiency detector: the value is singular there
    /// and never enters the computable bound (only `χ_h` does).
    pub fn epr_variance(&self) -> Option<f64> {
        if self.efficiency >= 1.0 {
            None
        } else {
            Some((1.0 - self.efficiency + self.electronic_noise) / (1.0 - self.efficiency))
        }
    }
}

/// Reference experimental detector: `η = 0.552`, `v_el = 0.015`.
impl Default for DetectorModel {
    fn default() -> Self {
        DetectorModel::new(0.552, 0.015).expect("static preset")
    }
}

/// Protocol-level knobs: modulation variance, reconciliation efficiency and
/// pulse repetition rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    mod_variance: f64,
    reconciliation_efficiency: f64,
    rep_rate_hz: f64,
}

impl ProtocolParams {
    pub fn new(
        mod_variance: f64,
        reconciliation_efficiency: f64,
        rep_rate_hz: f64,
    ) -> Result<Self> {
        if !(mod_variance > 0.0) || !mod_variance.is_finite() {
            return Err(Error::invalid("mod_variance", "must be positive and finite"));
        }
        if !(reconciliation_efficiency > 0.0 && reconciliation_efficiency <= 1.0) {
            return Err(Error::invalid(
                "reconciliation_efficiency",
                "must be in (0, 1]",
            ));
        }
        if !(rep_rate_hz > 0.0) || !rep_rate_hz.is_finite() {
            return Err(Error::invalid("rep_rate_hz", "must be positive and finite"));
        }
        Ok(ProtocolParams {
            mod_variance,
            reconciliation_efficiency,
            rep_rate_hz,
        })
    }

    pub fn mod_variance(&self) -> f64 {
        self.mod_variance
    }

    pub fn reconciliation_efficiency(&self) -> f64 {
        self.reconciliation_efficiency
    }

    pub fn rep_rate_hz(&self) -> f64 {
        self.rep_rate_hz
    }

    /// `V = V_A + 1`.
    pub fn v(&self) -> f64 {
        self.mod_variance + 1.0
    }
}

/// Reference experimental protocol: `V_A = 10`, `β = 0.93`, `f_rep = 1 MHz`.
impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams::new(10.0, 0.93, 1e6).expect("static preset")
    }
}

/// Per-channel key-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateResult {
    pub channel_index: usize,
    /// Intermodulation source noise `ε_S(k)` in shot-noise units.
    pub source_noise: f64,
    pub mutual_info_bits: f64,
    pub holevo_bits: f64,
    /// `β·I_AB - S_BE`; may be negative (reported raw).
    pub key_rate_bits_per_pulse: f64,
    /// `f_rep · max(K̃, 0)`.
    pub key_rate_bits_per_sec: f64,
}

/// Total detection-chain noise referred to the channel input,
/// `χ_tot = χ_line + χ_h/T`.
pub fn chi_tot(link: &LinkModel, det: &DetectorModel) -> f64 {
    link.chi_line() + det.chi_h() / link.transmittance()
}

/// Shannon mutual information between Alice and Bob in bits:
/// `I_AB = ½ log₂[(V + ε_S + χ_tot) / (1 + ε_S + χ_tot)]`.
pub fn mutual_information(
    params: &ProtocolParams,
    link: &LinkModel,
    det: &DetectorModel,
    eps_s: f64,
) -> Result<f64> {
    check_eps_s(eps_s)?;
    let ct = chi_tot(link, det);
    Ok(((params.v() + eps_s + ct) / (1.0 + eps_s + ct)).log2() / 2.0)
}

/// Symplectic spectrum `(λ₁, λ₂, λ₃)` of the shared Gaussian state, with
/// `λ₁ ≥ λ₂` and `λ₃ = 1`:
/// `λ²₁,₂ = (A ± sqrt(A² - 4B))/2`.
pub fn symplectic_eigenvalues_state(
    params: &ProtocolParams,
    link: &LinkModel,
    eps_s: f64,
) -> Result<(f64, f64, f64)> {
    check_eps_s(eps_s)?;
    let (a, b) = state_invariants(params, link, eps_s);
    let (l1, l2) = eigenvalue_pair(a, b)?;
    Ok((l1, l2, 1.0))
}

/// Symplectic spectrum `(λ₄, λ₅, λ₆, λ₇)` of the state conditioned on Bob's
/// measurement, with `λ₄ ≥ λ₅` and `λ₆ = λ₇ = 1`:
/// `λ²₄,₅ = (C ± sqrt(C² - 4D))/2`.
pub fn symplectic_eigenvalues_conditional(
    params: &ProtocolParams,
    link: &LinkModel,
    det: &DetectorModel,
    eps_s: f64,
) -> Result<(f64, f64, f64, f64)> {
    check_eps_s(eps_s)?;
    let (c, d) = conditional_invariants(params, link, det, eps_s);
    let (l4, l5) = eigenvalue_pair(c, d)?;
    Ok((l4, l5, 1.0, 1.0))
}

/// `A` and `B` of the two-mode state:
/// `A = V'² - 2T(V'² - 1) + T²(V' + χ_line)²`, `B = T²(1 + V'χ_line)²`.
fn state_invariants(params: &ProtocolParams, link: &LinkModel, eps_s: f64) -> (f64, f64) {
    let vp = params.v() + eps_s;
    let t = link.transmittance();
    let cl = link.chi_line();
    let a = vp * vp - 2.0 * t * (vp * vp - 1.0) + t * t * (vp + cl) * (vp + cl);
    let b = t * t * (1.0 + vp * cl) * (1.0 + vp * cl);
    (a, b)
}

/// `C` and `D` of the conditional state:
/// `C = (Aχ_h + V'√B + T(V' + χ_line)) / (T(V' + χ_line) + χ_h)`,
/// `D = (√B·V' + Bχ_h) / (T(V' + χ_line) + χ_h)`.
fn conditional_invariants(
    params: &ProtocolParams,
    link: &LinkModel,
    det: &DetectorModel,
    eps_s: f64,
) -> (f64, f64) {
    let vp = params.v() + eps_s;
    let t = link.transmittance();
    let cl = link.chi_line();
    let ch = det.chi_h();
    let (a, b) = state_invariants(params, link, eps_s);
    let den = t * (vp + cl) + ch;
    let c = (a * ch + vp * b.sqrt() + t * (vp + cl)) / den;
    let d = (b.sqrt() * vp + b * ch) / den;
    (c, d)
}

/// Solves `λ² = (inv ± sqrt(inv² - 4 det))/2` with a cancellation-free form
/// for the smaller root and a guard for tiny negative discriminants.
fn eigenvalue_pair(inv: f64, det: f64) -> Result<(f64, f64)> {
    let disc = inv * inv - 4.0 * det;
    let scale = (inv * inv).max(4.0 * det.abs()).max(1.0);
    let disc = if disc < 0.0 {
        if disc > -CLAMP_TOL * scale {
            0.0
        } else {
            return Err(Error::Numerical(format!(
                "negative symplectic discriminant {disc} (invariant {inv}, determinant {det})"
            )));
        }
    } else {
        disc
    };
    let root = disc.sqrt();
    let big = (inv + root) / 2.0;
    // The smaller eigenvalue via det/(big) avoids catastrophic cancellation
    // near pure-state limits (inv² ≈ 4 det).
    let small = if big > 0.0 { det / big } else { 0.0 };
    if big < 0.0 || small < 0.0 {
        return Err(Error::Numerical(format!(
            "negative squared symplectic eigenvalue (invariant {inv}, determinant {det})"
        )));
    }
    Ok((big.sqrt(), small.sqrt()))
}

/// Von Neumann entropy kernel `G(x) = (x+1) log₂(x+1) - x log₂ x`,
/// with `G(0) = 0` as the continuous limit.
pub fn g_function(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid("x", format!("G requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * (x + 1.0).log2() - x * x.log2())
}

/// Holevo bound `S_BE` on Eve's information about Bob's measurement, in bits:
/// `G((λ₁-1)/2) + G((λ₂-1)/2) - G((λ₄-1)/2) - G((λ₅-1)/2)`
/// (unit eigenvalues contribute nothing).
pub fn holevo_bound(
    params: &ProtocolParams,
    link: &LinkModel,
    det: &DetectorModel,
    eps_s: f64,
) -> Result<f64> {
    let (l1, l2, _) = symplectic_eigenvalues_state(params, link, eps_s)?;
    let (l4, l5, _, _) = symplectic_eigenvalues_conditional(params, link, det, eps_s)?;
    Ok(g_function(entropy_arg(l1)?)? + g_function(entropy_arg(l2)?)?
        - g_function(entropy_arg(l4)?)?
        - g_function(entropy_arg(l5)?)?)
}

/// `(λ - 1)/2`, absorbing sub-tolerance dips of λ below 1.
fn entropy_arg(lambda: f64) -> Result<f64> {
    let x = (lambda - 1.0) / 2.0;
    if x >= 0.0 {
        Ok(x)
    } else if x > -CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!(
            "symplectic eigenvalue {lambda} below 1"
        )))
    }
}

/// Key rate for a given source noise; the building block behind both the
/// per-channel rate and the single-channel reference.
pub fn key_rate_with_source_noise(
    params: &ProtocolParams,
    link: &LinkModel,
    det: &DetectorModel,
    eps_s: f64,
    channel_index: usize,
) -> Result<KeyRateResult> {
    let iab = mutual_information(params, link, det, eps_s)?;
    let sbe = holevo_bound(params, link, det, eps_s)?;
    let per_pulse = params.reconciliation_efficiency() * iab - sbe;
    Ok(KeyRateResult {
        channel_index,
        source_noise: eps_s,
        mutual_info_bits: iab,
        holevo_bits: sbe,
        key_rate_bits_per_pulse: per_pulse,
        key_rate_bits_per_sec: params.rep_rate_hz() * per_pulse.max(0.0),
    })
}

/// Secret key rate of channel `k` in an `N`-channel plan.
///
/// The intermodulation ratio comes from the modulation config; the absolute
/// noise uses the protocol's modulation variance, which is the single source
/// of truth for `V_A` in the security analysis.
pub fn channel_key_rate(
    plan: &ChannelPlan,
    k: usize,
    cfg: &ModulationConfig,
    params: &ProtocolParams,
    link: &LinkModel,
    det: &DetectorModel,
) -> Result<KeyRateResult> {
    let eps_s = intermod_noise_ratio(plan, k, cfg)? * params.mod_variance();
    key_rate_with_source_noise(params, link, det, eps_s, k)
}

/// Key rate of a conventional single-channel system (`ε_S = 0`) at the same
/// parameters.
pub fn single_channel_key_rate(
    params: &ProtocolParams,
    link: &LinkModel,
    det: &DetectorModel,
) -> Result<KeyRateResult> {
    key_rate_with_source_noise(params, link, det, 0.0, 1)
}

/// Total secret key bit rate `R_tot = Σ_k max(R_(k), 0)` plus the
/// per-channel breakdown in index order.
pub fn total_key_rate(
    plan: &ChannelPlan,
    cfg: &ModulationConfig,
    params: &ProtocolParams,
    link: &LinkModel,
    det: &DetectorModel,
) -> Result<(f64, Vec<KeyRateResult>)> {
    let per_channel = (1..=plan.n_channels())
        .map(|k| channel_key_rate(plan, k, cfg, params, link, det))
        .collect::<Result<Vec<_>>>()?;
    let r_tot = per_channel.iter().map(|r| r.key_rate_bits_per_sec).sum();
    Ok((r_tot, per_channel))
}

/// Multi-channel gain `G_M = R_tot / R_sc`.
///
/// `None` when the single-channel reference rate is zero (past its cutoff
/// distance) — the gain is undefined there rather than infinite or zero.
pub fn multichannel_gain(
    plan: &ChannelPlan,
    cfg: &ModulationConfig,
    params: &ProtocolParams,
    link: &LinkModel,
    det: &DetectorModel,
) -> Result<Option<f64>> {
    let r_sc = single_channel_key_rate(params, link, det)?.key_rate_bits_per_sec;
    if r_sc <= 0.0 {
        return Ok(None);
    }
    let (r_tot, _) = total_key_rate(plan, cfg, params, link, det)?;
    Ok(Some(r_tot / r_sc))
}

fn check_eps_s(eps_s: f64) -> Result<()> {
    if !(eps_s >= 0.0) || !eps_s.is_finite() {
        return Err(Error::invalid("eps_s", "must be >= 0 and finite"));
    }
    Ok(())
}
