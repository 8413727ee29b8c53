//! Channel plans and second-order intermodulation combinatorics.
//!
//! A plan places `N` subcarrier channels on an evenly spaced frequency grid,
//! `Ω_k = k·Ω_1` for `k = 1..=N`. Second-order mixing couples channel `k` to
//! every ordered pair of signed indices `(r, s)` with `r + s = k`, where the
//! signed extension obeys `m_{-k} = m_k`, `Ω_{-k} = -Ω_k`, `φ_{-k} = -φ_k`.
//! The pair count `M_2(N, k)` drives both the local-oscillator distortion and
//! the extra source noise on each channel.

use crate::error::{Error, Result};

/// An evenly spaced subcarrier channel plan.
///
/// Frequencies are bookkeeping only: every operation in this crate depends on
/// channel *indices*, never on absolute GHz values. Uneven grids are rejected
/// at construction because index arithmetic (`r + s = k`) only models the
/// evenly spaced case.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlan {
    n_channels: usize,
    spacing_ghz: f64,
    label: String,
}

impl ChannelPlan {
    /// Builds an evenly spaced plan with channel `k` at `k * spacing_ghz`.
    pub fn new(n_channels: usize, spacing_ghz: f64, label: impl Into<String>) -> Result<Self> {
        if n_channels == 0 {
            return Err(Error::invalid("n_channels", "must be at least 1"));
        }
        if !(spacing_ghz > 0.0) || !spacing_ghz.is_finite() {
            return Err(Error::invalid(
                "spacing_ghz",
                format!("must be a positive finite number, got {spacing_ghz}"),
            ));
        }
        Ok(ChannelPlan {
            n_channels,
            spacing_ghz,
            label: label.into(),
        })
    }

    /// Low-count plan: 5 channels, 5 GHz spacing (5–25 GHz).
    pub fn low() -> Self {
        ChannelPlan::new(5, 5.0, "low").expect("static plan")
    }

    /// Medium-count plan: 15 channels, 2 GHz spacing (2–30 GHz).
    pub fn medium() -> Self {
        ChannelPlan::new(15, 2.0, "medium").expect("static plan")
    }

    /// High-count plan: 40 channels, 1 GHz spacing (1–40 GHz).
    pub fn high() -> Self {
        ChannelPlan::new(40, 1.0, "high").expect("static plan")
    }

    /// Custom plan with `n` channels on a 1 GHz grid.
    pub fn custom(n: usize) -> Result<Self> {
        ChannelPlan::new(n, 1.0, format!("custom:{n}"))
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn spacing_ghz(&self) -> f64 {
        self.spacing_ghz
    }

    /// Frequency of channel 1, equal to the grid spacing.
    pub fn base_offset_ghz(&self) -> f64 {
        self.spacing_ghz
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Frequency of channel `k` in GHz.
    pub fn channel_frequency_ghz(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        Ok(k as f64 * self.spacing_ghz)
    }

    /// Pair count `M_2(N, k)` for this plan.
    pub fn m2(&self, k: usize) -> Result<u64> {
        m2_count(self.n_channels, k)
    }

    pub(crate) fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.n_channels {
            return Err(Error::ChannelIndex {
                k,
                n: self.n_channels,
            });
        }
        Ok(())
    }
}

/// Closed-form count of ordered signed index pairs `(r, s)` with `r + s = k`
/// and `r ≠ s`.
///
/// Evaluates `2N - k - 3/2 - (-1)^k / 2` and asserts that the fractional
/// parts cancel; a non-integral value would indicate an index-convention bug,
/// so it is never rounded away silently.
///
/// Even-`k` note: the parity term removes the degenerate decomposition
/// `2Ω_{k/2} = Ω_k`, so the count covers distinct-index mixing only. The
/// noise model and the Monte Carlo sampler use the same convention.
pub fn m2_count(n: usize, k: usize) -> Result<u64> {
    check_k(n, k)?;
    let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
    let raw = 2.0 * n as f64 - k as f64 - 1.5 - 0.5 * parity;
    let rounded = raw.round();
    debug_assert!(
        (raw - rounded).abs() < 1e-9,
        "M_2({n},{k}) = {raw} is not integral"
    );
    if (raw - rounded).abs() >= 1e-9 {
        return Err(Error::Numerical(format!(
            "M_2({n},{k}) evaluated to non-integer {raw}"
        )));
    }
    Ok(rounded as u64)
}

/// Brute-force oracle for [`m2_count`]: loops over all signed index pairs.
///
/// Counts ordered pairs `(r, s)` with `r, s ∈ {-n..-1, 1..n}`, `r + s = k`
/// and `r ≠ s`. On an even grid `Ω_r + Ω_s = Ω_k` is exactly this index
/// condition; the self-mixing pair `(k/2, k/2)` of an even channel is not
/// part of the count (see the even-`k` note on [`m2_count`]).
pub fn m2_enumerate(n: usize, k: usize) -> Result<u64> {
    check_k(n, k)?;
    let n = n as i64;
    let k = k as i64;
    let mut count = 0u64;
    for r in -n..=n {
        if r == 0 {
            continue;
        }
        let s = k - r;
        if s != 0 && s != r && s >= -n && s <= n {
            count += 1;
        }
    }
    Ok(count)
}

/// Checks `N - 2 <= M_2(N, k) <= 2N - 2` for every `k` in `1..=n`.
pub fn m2_bounds_check(n: usize) -> Result<bool> {
    if n < 2 {
        return Err(Error::invalid("n", "bounds check needs n >= 2"));
    }
    let lower = n as i64 - 2;
    let upper = 2 * n as i64 - 2;
    for k in 1..=n {
        let m2 = m2_count(n, k)? as i64;
        if m2 < lower || m2 > upper {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Relative magnitude deviation of the local-oscillator tone on channel `k`
/// caused by second-order mixing:
/// `sqrt(1 + (M_2(N,k)·m_lo/4)^2) - 1`.
///
/// Note: this is not always below the 1.5% level sometimes quoted for
/// `m_lo <= 0.01`, `N <= 40` — at `(n=40, k=1, m_lo=0.01)` the deviation is
/// ≈1.9%. Callers should evaluate rather than assume it negligible.
pub fn lo_distortion(n: usize, k: usize, m_lo: f64) -> Result<f64> {
    if !(m_lo > 0.0 && m_lo <= 0.1) {
        return Err(Error::invalid(
            "m_lo",
            format!("must be in (0, 0.1], got {m_lo}"),
        ));
    }
    let m2 = m2_count(n, k)? as f64;
    let q = m2 * m_lo / 4.0;
    // sqrt(1+q^2)-1 loses precision for tiny q; (sqrt(1+q^2)+1) rationalization
    // keeps the small-modulation limit exact.
    Ok(q * q / ((1.0 + q * q).sqrt() + 1.0))
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if k == 0 || k > n {
        return Err(Error::ChannelIndex { k, n });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn m2_known_values() {
        assert_eq!(m2_count(40, 1).unwrap(), 78);
        assert_eq!(m2_count(5, 5).unwrap(), 4);
        assert_eq!(m2_count(2, 2).unwrap(), 0);
        assert_eq!(m2_count(1, 1).unwrap(), 0);
    }

    #[test]
    fn m2_enumerate_known_values() {
        assert_eq!(m2_enumerate(40, 1).unwrap(), 78);
        assert_eq!(m2_enumerate(5, 5).unwrap(), 4);
        assert_eq!(m2_enumerate(1, 1).unwrap(), 0);
    }

    #[test]
    fn m2_upper_bound_attained_at_k1() {
        for n in 2..=64 {
            assert_eq!(m2_count(n, 1).unwrap(), 2 * n as u64 - 2);
        }
    }

    #[test]
    fn m2_rejects_out_of_range() {
        assert!(matches!(
            m2_count(5, 0),
            Err(Error::ChannelIndex { k: 0, n: 5 })
        ));
        assert!(matches!(
            m2_count(5, 6),
            Err(Error::ChannelIndex { k: 6, n: 5 })
        ));
        assert!(m2_enumerate(5, 6).is_err());
    }

    #[test]
    fn m2_bounds_hold_for_canonical_plans() {
        assert!(m2_bounds_check(2).unwrap());
        assert!(m2_bounds_check(5).unwrap());
        assert!(m2_bounds_check(15).unwrap());
        assert!(m2_bounds_check(40).unwrap());
    }

    #[test]
    fn m2_decreasing_in_k_within_parity() {
        for n in [5usize, 15, 40] {
            for k in 1..=(n - 2) {
                assert!(m2_count(n, k).unwrap() > m2_count(n, k + 2).unwrap());
            }
        }
    }

    #[test]
    fn lo_distortion_known_values() {
        // M_2(40,40) = 38: sqrt(1 + 0.095^2) - 1
        assert_relative_eq!(
            lo_distortion(40, 40, 0.01).unwrap(),
            4.502364358e-3,
            max_relative = 1e-8
        );
        // M_2(40,1) = 78: exceeds the oft-quoted 1.5% level.
        assert_relative_eq!(
            lo_distortion(40, 1, 0.01).unwrap(),
            1.883511914e-2,
            max_relative = 1e-8
        );
        assert!(lo_distortion(40, 1, 0.01).unwrap() > 0.015);
    }

    #[test]
    fn lo_distortion_vanishes_with_modulation() {
        let d = lo_distortion(40, 1, 1e-9).unwrap();
        assert!(d > 0.0 && d < 1e-15);
    }

    #[test]
    fn lo_distortion_rejects_bad_lo_index() {
        assert!(lo_distortion(40, 1, 0.0).is_err());
        assert!(lo_distortion(40, 1, 0.2).is_err());
        assert!(lo_distortion(40, 41, 0.01).is_err());
    }

    #[test]
    fn canonical_plans() {
        let low = ChannelPlan::low();
        assert_eq!(low.n_channels(), 5);
        assert_eq!(low.channel_frequency_ghz(1).unwrap(), 5.0);
        assert_eq!(low.channel_frequency_ghz(5).unwrap(), 25.0);

        let medium = ChannelPlan::medium();
        assert_eq!(medium.n_channels(), 15);
        assert_eq!(medium.channel_frequency_ghz(15).unwrap(), 30.0);

        let high = ChannelPlan::high();
        assert_eq!(high.n_channels(), 40);
        assert_eq!(high.channel_frequency_ghz(1).unwrap(), 1.0);
        assert_eq!(high.channel_frequency_ghz(40).unwrap(), 40.0);
    }

    #[test]
    fn plan_rejects_degenerate_input() {
        assert!(ChannelPlan::new(0, 1.0, "x").is_err());
        assert!(ChannelPlan::new(5, 0.0, "x").is_err());
        assert!(ChannelPlan::new(5, -1.0, "x").is_err());
        assert!(ChannelPlan::low().channel_frequency_ghz(6).is_err());
    }

    proptest! {
        #[test]
        fn m2_matches_enumeration(n in 1usize..120, offset in 0usize..120) {
            let k = 1 + offset % n;
            prop_assert_eq!(m2_count(n, k).unwrap(), m2_enumerate(n, k).unwrap());
        }

        #[test]
        fn m2_within_bounds(n in 2usize..120, offset in 0usize..120) {
            let k = 1 + offset % n;
            let m2 = m2_count(n, k).unwrap() as i64;
            prop_assert!(m2 >= n as i64 - 2);
            prop_assert!(m2 <= 2 * n as i64 - 2);
        }

        #[test]
        fn lo_distortion_monotone(n in 2usize..80, offset in 0usize..80) {
            let k = 1 + offset % n;
            let lo = lo_distortion(n, k, 0.005).unwrap();
            let hi = lo_distortion(n, k, 0.01).unwrap();
            if m2_count(n, k).unwrap() > 0 {
                prop_assert!(hi > lo);
            } else {
                prop_assert_eq!(hi, 0.0);
                prop_assert_eq!(lo, 0.0);
            }
        }
    }
}
