//! Modulation statistics: closed-form intermodulation source noise, the
//! product-Gaussian density behind it, and a Monte Carlo sampler that
//! regenerates the mixing noise from raw Rayleigh/uniform draws.
//!
//! Channel `k` of an `N`-channel plan sees, besides its own Gaussian
//! modulation of variance `V_A`, a second-order mixing term
//!
//! ```text
//! ΔX_(k) = (α₀/8) Σ_{r+s=k} m_r m_s sin(φ_r + φ_s)
//! ```
//!
//! summed over the `M₂(N,k)` ordered signed index pairs with distinct
//! indices. With amplitudes Rayleigh(σ) and phases uniform, its variance is
//! `ε_S(k) = M₂(N,k) · m̄² · V_A / (2π)` where `m̄ = σ·sqrt(π/2)` is the mean
//! modulation index. The sampler checks that closed form (and the
//! non-Gaussian shape of the noise) by direct simulation.
//!
//! Everything is expressed in shot-noise units through the pair `(V_A, m̄)`;
//! the carrier amplitude `α₀ = 2·sqrt(V_A)/σ` is internal because no
//! downstream formula depends on it separately.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::bessel_k0;
use crate::spectrum::{m2_count, ChannelPlan};

/// Largest mean modulation index for which the second-order expansion of the
/// phase modulator is trustworthy.
pub const TAYLOR_VALIDITY_LIMIT: f64 = 0.02;

/// Trials per RNG stream. Fixed so that results are identical no matter how
/// the batches are scheduled across workers.
const BATCH_TRIALS: u64 = 10_000;

/// Gaussian-modulation parameters shared by every channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationConfig {
    mean_index: f64,
    mod_variance: f64,
    lo_index: f64,
}

impl ModulationConfig {
    /// `mean_index` is the mean modulation index m̄, `mod_variance` the
    /// quadrature modulation variance V_A in shot-noise units, `lo_index`
    /// the local-oscillator modulation index.
    pub fn new(mean_index: f64, mod_variance: f64, lo_index: f64) -> Result<Self> {
        if !(mean_index > 0.0) || !mean_index.is_finite() {
            return Err(Error::invalid("mean_index", "must be positive and finite"));
        }
        if !(mod_variance > 0.0) || !mod_variance.is_finite() {
            return Err(Error::invalid("mod_variance", "must be positive and finite"));
        }
        if !(lo_index > 0.0) || !lo_index.is_finite() {
            return Err(Error::invalid("lo_index", "must be positive and finite"));
        }
        Ok(ModulationConfig {
            mean_index,
            mod_variance,
            lo_index,
        })
    }

    pub fn mean_index(&self) -> f64 {
        self.mean_index
    }

    pub fn mod_variance(&self) -> f64 {
        self.mod_variance
    }

    pub fn lo_index(&self) -> f64 {
        self.lo_index
    }

    /// Rayleigh scale of the per-channel amplitude draw, `σ = m̄·sqrt(2/π)`.
    pub fn rayleigh_scale(&self) -> f64 {
        self.mean_index * (2.0 / PI).sqrt()
    }

    /// True when the mean index exceeds the second-order expansion's
    /// validity range; callers should surface this as a warning.
    pub fn exceeds_taylor_validity(&self) -> bool {
        self.mean_index > TAYLOR_VALIDITY_LIMIT
    }

    /// Carrier amplitude implied by `(V_A, m̄)`.
    fn carrier_amplitude(&self) -> f64 {
        2.0 * self.mod_variance.sqrt() / self.rayleigh_scale()
    }
}

/// Ratio `ε_S(k) / V_A = M₂(N,k) · m̄² / (2π)` of intermodulation noise to
/// modulation variance on channel `k`.
pub fn intermod_noise_ratio(plan: &ChannelPlan, k: usize, cfg: &ModulationConfig) -> Result<f64> {
    plan.check_index(k)?;
    let m2 = m2_count(plan.n_channels(), k)? as f64;
    Ok(m2 * cfg.mean_index * cfg.mean_index / (2.0 * PI))
}

/// Absolute intermodulation source noise `ε_S(k)` in shot-noise units.
pub fn source_noise(plan: &ChannelPlan, k: usize, cfg: &ModulationConfig) -> Result<f64> {
    Ok(intermod_noise_ratio(plan, k, cfg)? * cfg.mod_variance)
}

/// Per-channel noise-to-modulation ratios for a whole plan.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseProfile {
    plan: ChannelPlan,
    ratios: Vec<f64>,
}

impl NoiseProfile {
    pub fn compute(plan: &ChannelPlan, cfg: &ModulationConfig) -> Result<Self> {
        let ratios = (1..=plan.n_channels())
            .map(|k| intermod_noise_ratio(plan, k, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(NoiseProfile {
            plan: plan.clone(),
            ratios,
        })
    }

    pub fn plan(&self) -> &ChannelPlan {
        &self.plan
    }

    /// `ε_S(k)/V_A` for `k = 1..=N`, in index order.
    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn ratio(&self, k: usize) -> Result<f64> {
        self.plan.check_index(k)?;
        Ok(self.ratios[k - 1])
    }
}

/// Density of the product of two independent centered Gaussians of standard
/// deviation `sigma`: `f(z) = K₀(|z|/σ²) / (π σ²)`.
///
/// The density has an integrable log singularity at `z = 0`; that point is
/// rejected so that no infinite sentinel can leak into downstream
/// integration (quadrature must use open rules around the origin).
pub fn product_gaussian_pdf(z: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma", "must be positive and finite"));
    }
    if z == 0.0 {
        return Err(Error::Numerical(
            "product-Gaussian density diverges at z = 0".into(),
        ));
    }
    let s2 = sigma * sigma;
    Ok(bessel_k0(z.abs() / s2)? / (PI * s2))
}

/// Variance of one mixing term `m_r m_s sin(φ_r + φ_s)`:
/// `2σ⁴` for distinct indices, `4σ⁴` for the self-mixing term `r = s`.
pub fn pairwise_term_variance(sigma: f64, equal_indices: bool) -> f64 {
    let s4 = sigma * sigma * sigma * sigma;
    if equal_indices {
        4.0 * s4
    } else {
        2.0 * s4
    }
}

/// Which quadrature the sampler accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quadrature {
    /// `sin(φ_r + φ_s)` mixing terms (X).
    X,
    /// `cos(φ_r + φ_s)` mixing terms (P).
    P,
}

/// Summary statistics of a Monte Carlo sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub trials: u64,
    pub mean: f64,
    /// Bessel-corrected sample variance.
    pub variance: f64,
    /// `m₄/m₂² - 3`.
    pub excess_kurtosis: f64,
    /// Standard error of the sample mean.
    pub se_mean: f64,
    /// Large-sample standard error of the sample variance,
    /// `sqrt((m₄ - m₂²)/n)`.
    pub se_variance: f64,
    /// Significance of the excess kurtosis against a Gaussian null,
    /// `excess / sqrt(24/n)`.
    pub kurtosis_z: f64,
}

/// Raw moment sums about zero; combined across batches in batch order so the
/// result is bit-identical regardless of worker count.
#[derive(Debug, Clone, Copy, Default)]
struct MomentSums {
    n: u64,
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
}

impl MomentSums {
    fn add(&mut self, x: f64) {
        let x2 = x * x;
        self.n += 1;
        self.s1 += x;
        self.s2 += x2;
        self.s3 += x2 * x;
        self.s4 += x2 * x2;
    }

    fn merge(&mut self, other: &MomentSums) {
        self.n += other.n;
        self.s1 += other.s1;
        self.s2 += other.s2;
        self.s3 += other.s3;
        self.s4 += other.s4;
    }

    fn stats(&self) -> SampleStats {
        let n = self.n as f64;
        let mean = self.s1 / n;
        let m2 = (self.s2 / n - mean * mean).max(0.0);
        let m4 = (self.s4 / n - 4.0 * mean * self.s3 / n + 6.0 * mean * mean * self.s2 / n
            - 3.0 * mean.powi(4))
        .max(0.0);
        let variance = m2 * n / (n - 1.0);
        SampleStats {
            trials: self.n,
            mean,
            variance,
            excess_kurtosis: m4 / (m2 * m2) - 3.0,
            se_mean: (m2 / n).sqrt(),
            se_variance: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
            kurtosis_z: (m4 / (m2 * m2) - 3.0) / (24.0 / n).sqrt(),
        }
    }
}

/// Samples the X-quadrature mixing noise `ΔX_(k)` and returns its moments.
///
/// Per trial, every channel `j = 1..=N` draws an amplitude
/// `m_j = σ·sqrt(-2 ln u)`, `u ~ U(0,1]`, and a phase `φ_j ~ U[0,2π)`; the
/// signed extension and the pair sum then produce one realization of the
/// noise, normalized so its expected variance is `ε_S(k)`. Deterministic for
/// a fixed `(seed, trials)` pair: trials are split into fixed-size batches,
/// each on its own counter-derived RNG stream, and combined in batch order.
pub fn sample_delta_x(
    plan: &ChannelPlan,
    k: usize,
    cfg: &ModulationConfig,
    trials: u64,
    seed: u64,
) -> Result<SampleStats> {
    sample_mixing(plan, k, cfg, trials, seed, Quadrature::X)
}

/// P-quadrature counterpart of [`sample_delta_x`] (sin and cos interchanged).
pub fn sample_delta_p(
    plan: &ChannelPlan,
    k: usize,
    cfg: &ModulationConfig,
    trials: u64,
    seed: u64,
) -> Result<SampleStats> {
    sample_mixing(plan, k, cfg, trials, seed, Quadrature::P)
}

/// Samples the Gaussian signal part `X_A(k) = (α₀/2) m_k cos(-φ_k)`, whose
/// variance is `V_A` and whose distribution is exactly normal.
pub fn sample_signal(
    plan: &ChannelPlan,
    k: usize,
    cfg: &ModulationConfig,
    trials: u64,
    seed: u64,
) -> Result<SampleStats> {
    plan.check_index(k)?;
    check_trials(trials)?;
    let n = plan.n_channels();
    let sigma = cfg.rayleigh_scale();
    let half_amp = cfg.carrier_amplitude() / 2.0;
    let sums = run_batches(trials, seed, move |rng, count, sums| {
        for _ in 0..count {
            let mut m_k = 0.0;
            let mut phi_k = 0.0;
            for j in 1..=n {
                let (m, phi) = draw_channel(rng, sigma);
                if j == k {
                    m_k = m;
                    phi_k = phi;
                }
            }
            sums.add(half_amp * m_k * (-phi_k).cos());
        }
    });
    Ok(sums.stats())
}

fn sample_mixing(
    plan: &ChannelPlan,
    k: usize,
    cfg: &ModulationConfig,
    trials: u64,
    seed: u64,
    quad: Quadrature,
) -> Result<SampleStats> {
    plan.check_index(k)?;
    check_trials(trials)?;
    let n = plan.n_channels();
    let pairs = signed_pairs(n, k);
    debug_assert_eq!(pairs.len() as u64, m2_count(n, k).unwrap());
    let sigma = cfg.rayleigh_scale();
    let scale = cfg.carrier_amplitude() / 8.0;

    let sums = run_batches(trials, seed, move |rng, count, sums| {
        // Amplitude and phase per channel; index 0 unused.
        let mut m = vec![0.0f64; n + 1];
        let mut phi = vec![0.0f64; n + 1];
        for _ in 0..count {
            for j in 1..=n {
                let (mj, pj) = draw_channel(rng, sigma);
                m[j] = mj;
                phi[j] = pj;
            }
            let mut acc = 0.0;
            for &(r, s) in &pairs {
                let (mr, pr) = signed_draw(&m, &phi, r);
                let (ms, ps) = signed_draw(&m, &phi, s);
                let angle = pr + ps;
                acc += mr
                    * ms
                    * match quad {
                        Quadrature::X => angle.sin(),
                        Quadrature::P => angle.cos(),
                    };
            }
            sums.add(scale * acc);
        }
    });
    Ok(sums.stats())
}

/// Ordered signed index pairs `(r, s)` with `r + s = k` and `r ≠ s`,
/// matching the distinct-index convention of `M₂(N, k)`.
fn signed_pairs(n: usize, k: usize) -> Vec<(i32, i32)> {
    let n = n as i32;
    let k = k as i32;
    let mut pairs = Vec::new();
    for r in -n..=n {
        if r == 0 {
            continue;
        }
        let s = k - r;
        if s != 0 && s != r && (-n..=n).contains(&s) {
            pairs.push((r, s));
        }
    }
    pairs
}

#[inline]
fn signed_draw(m: &[f64], phi: &[f64], idx: i32) -> (f64, f64) {
    let j = idx.unsigned_abs() as usize;
    if idx > 0 {
        (m[j], phi[j])
    } else {
        (m[j], -phi[j])
    }
}

/// One channel's draw: Rayleigh amplitude via the inverse CDF
/// `m = σ·sqrt(-2 ln u)` with `u ∈ (0, 1]`, then a uniform phase.
#[inline]
fn draw_channel(rng: &mut ChaCha8Rng, sigma: f64) -> (f64, f64) {
    let u = 1.0 - rng.random::<f64>();
    let m = sigma * (-2.0 * u.ln()).sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    (m, phi)
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < BATCH_TRIALS {
        return Err(Error::invalid(
            "trials",
            format!("need at least {BATCH_TRIALS} trials, got {trials}"),
        ));
    }
    Ok(())
}

/// Splits `trials` into fixed-size batches, runs each on its own RNG stream
/// (seed fixed, stream = batch index) in parallel, and merges the moment
/// sums sequentially in batch order.
fn run_batches<F>(trials: u64, seed: u64, run_batch: F) -> MomentSums
where
    F: Fn(&mut ChaCha8Rng, u64, &mut MomentSums) + Sync,
{
    let n_batches = trials.div_ceil(BATCH_TRIALS);
    let batches: Vec<MomentSums> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BATCH_TRIALS.min(trials - b * BATCH_TRIALS);
            let mut sums = MomentSums::default();
            run_batch(&mut rng, count, &mut sums);
            sums
        })
        .collect();
    let mut total = MomentSums::default();
    for b in &batches {
        total.merge(b);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(mbar: f64) -> ModulationConfig {
        ModulationConfig::new(mbar, 10.0, 0.01).unwrap()
    }

    #[test]
    fn ratio_reference_points() {
        let plan = ChannelPlan::high();
        let c = cfg(0.01);
        // 78 · 1e-4 / (2π) and 38 · 1e-4 / (2π)
        assert_relative_eq!(
            intermod_noise_ratio(&plan, 1, &c).unwrap(),
            1.241_408_556e-3,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            intermod_noise_ratio(&plan, 40, &c).unwrap(),
            6.047_887_837e-4,
            max_relative = 1e-9
        );
    }

    #[test]
    fn ratio_vanishes_for_two_channel_last() {
        let plan = ChannelPlan::new(2, 1.0, "pair").unwrap();
        assert_eq!(intermod_noise_ratio(&plan, 2, &cfg(0.013)).unwrap(), 0.0);
    }

    #[test]
    fn ratio_scales_quadratically_in_mean_index() {
        let plan = ChannelPlan::medium();
        let base = intermod_noise_ratio(&plan, 3, &cfg(0.005)).unwrap();
        let doubled = intermod_noise_ratio(&plan, 3, &cfg(0.01)).unwrap();
        assert_relative_eq!(doubled, 4.0 * base, max_relative = 1e-12);
    }

    #[test]
    fn profile_shape() {
        let plan = ChannelPlan::high();
        let profile = NoiseProfile::compute(&plan, &cfg(0.01)).unwrap();
        let ratios = profile.ratios();
        assert_eq!(ratios.len(), 40);
        assert!(ratios.iter().all(|&r| r > 0.0));
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert_eq!(ratios[0], max);
        assert_eq!(ratios[39], min);
    }

    #[test]
    fn pairwise_variances() {
        assert_relative_eq!(pairwise_term_variance(1.0, false), 2.0);
        assert_relative_eq!(pairwise_term_variance(1.0, true), 4.0);
        assert_relative_eq!(pairwise_term_variance(2.0, false), 32.0);
    }

    #[test]
    fn pdf_rejects_origin_and_bad_sigma() {
        assert!(product_gaussian_pdf(0.0, 1.0).is_err());
        assert!(product_gaussian_pdf(0.1, 0.0).is_err());
        assert!(product_gaussian_pdf(0.1, -1.0).is_err());
    }

    #[test]
    fn pdf_is_even_and_decaying() {
        for &z in &[0.05, 0.3, 1.0, 4.0] {
            let plus = product_gaussian_pdf(z, 1.0).unwrap();
            let minus = product_gaussian_pdf(-z, 1.0).unwrap();
            assert_eq!(plus, minus);
        }
        assert!(
            product_gaussian_pdf(0.1, 1.0).unwrap() > product_gaussian_pdf(1.0, 1.0).unwrap()
        );
    }

    #[test]
    fn modulation_config_validation() {
        assert!(ModulationConfig::new(0.0, 10.0, 0.01).is_err());
        assert!(ModulationConfig::new(0.01, 0.0, 0.01).is_err());
        assert!(ModulationConfig::new(0.01, 10.0, 0.0).is_err());
        assert!(cfg(0.01).rayleigh_scale() > 0.0);
        assert!(!cfg(0.02).exceeds_taylor_validity());
        assert!(cfg(0.021).exceeds_taylor_validity());
    }

    #[test]
    fn sampler_matches_closed_form_small_plan() {
        let plan = ChannelPlan::low();
        let c = cfg(0.01);
        let stats = sample_delta_x(&plan, 1, &c, 100_000, 7).unwrap();
        let expected = source_noise(&plan, 1, &c).unwrap();
        assert!((stats.variance - expected).abs() < 3.0 * stats.se_variance);
        assert!(stats.mean.abs() < 3.0 * stats.se_mean);
    }

    #[test]
    fn sampler_p_quadrature_agrees() {
        let plan = ChannelPlan::low();
        let c = cfg(0.01);
        let stats = sample_delta_p(&plan, 5, &c, 100_000, 11).unwrap();
        let expected = source_noise(&plan, 5, &c).unwrap();
        assert!((stats.variance - expected).abs() < 3.0 * stats.se_variance);
    }

    #[test]
    fn sampler_is_deterministic() {
        let plan = ChannelPlan::low();
        let c = cfg(0.01);
        let a = sample_delta_x(&plan, 1, &c, 20_000, 99).unwrap();
        let b = sample_delta_x(&plan, 1, &c, 20_000, 99).unwrap();
        assert_eq!(a, b);
        let other_seed = sample_delta_x(&plan, 1, &c, 20_000, 100).unwrap();
        assert_ne!(a.variance, other_seed.variance);
    }

    #[test]
    fn sampler_rejects_small_runs() {
        let plan = ChannelPlan::low();
        assert!(sample_delta_x(&plan, 1, &cfg(0.01), 9_999, 1).is_err());
        assert!(sample_delta_x(&plan, 6, &cfg(0.01), 20_000, 1).is_err());
    }

    #[test]
    fn signal_part_is_gaussian_with_va_variance() {
        let plan = ChannelPlan::low();
        let c = cfg(0.01);
        let stats = sample_signal(&plan, 2, &c, 200_000, 5).unwrap();
        assert!((stats.variance - c.mod_variance()).abs() < 3.0 * stats.se_variance);
        // Kurtosis consistent with a normal distribution.
        assert!(stats.kurtosis_z.abs() < 4.0);
    }

    #[test]
    fn mixing_noise_is_leptokurtic() {
        let plan = ChannelPlan::low();
        let stats = sample_delta_x(&plan, 1, &cfg(0.01), 200_000, 3).unwrap();
        assert!(stats.kurtosis_z > 5.0);
    }

    #[test]
    fn signed_pair_enumeration_matches_count() {
        for n in [1usize, 2, 5, 15, 40] {
            for k in 1..=n {
                assert_eq!(
                    signed_pairs(n, k).len() as u64,
                    m2_count(n, k).unwrap(),
                    "n={n} k={k}"
                );
            }
        }
    }
}
