//! Composed wireless channels, SNR and per-block rates, and TTI-granular
//! transmission delays.

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex<f64>;

/// Radio constants of the scenario.
///
/// `noise_psd_dbm_hz` is a spectral density; the per-pRB noise power used
/// in the SNR denominators is `prb_bandwidth_hz` times the linear density
/// raised by the receiving side's noise figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub carrier_ghz: f64,
    /// pRB bandwidth, Hz.
    pub prb_bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_rsu_db: f64,
    pub noise_figure_vehicle_db: f64,
    /// Downlink transmit power per pRB, dBm.
    pub tx_power_rsu_dbm: f64,
    /// Uplink transmit power, dBm.
    pub tx_power_vehicle_dbm: f64,
    pub antenna_height_rsu_m: f64,
    pub antenna_height_vehicle_m: f64,
    pub antenna_gain_rsu_dbi: f64,
    pub antenna_gain_vehicle_dbi: f64,
    /// Transmission time interval, seconds.
    pub tti_s: f64,
    /// Log-normal shadowing standard deviation, dB.
    pub shadow_sigma_db: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            carrier_ghz: 2.4,
            prb_bandwidth_hz: 180_000.0,
            noise_psd_dbm_hz: -174.0,
            noise_figure_rsu_db: 5.0,
            noise_figure_vehicle_db: 9.0,
            tx_power_rsu_dbm: 30.0,
            tx_power_vehicle_dbm: 23.0,
            antenna_height_rsu_m: 25.0,
            antenna_height_vehicle_m: 3.0,
            antenna_gain_rsu_dbi: 8.0,
            antenna_gain_vehicle_dbi: 3.0,
            tti_s: 1e-3,
            shadow_sigma_db: 4.0,
        }
    }
}

impl ChannelParams {
    pub fn dl_tx_power_w(&self) -> f64 {
        dbm_to_watts(self.tx_power_rsu_dbm)
    }

    pub fn ul_tx_power_w(&self) -> f64 {
        dbm_to_watts(self.tx_power_vehicle_dbm)
    }

    /// Noise density seen by the vehicle receiver (downlink), W/Hz.
    pub fn dl_noise_w_hz(&self) -> f64 {
        dbm_to_watts(self.noise_psd_dbm_hz + self.noise_figure_vehicle_db)
    }

    /// Noise density seen by the RSU receiver (uplink), W/Hz.
    pub fn ul_noise_w_hz(&self) -> f64 {
        dbm_to_watts(self.noise_psd_dbm_hz + self.noise_figure_rsu_db)
    }

    pub fn total_antenna_gain_db(&self) -> f64 {
        self.antenna_gain_rsu_dbi + self.antenna_gain_vehicle_dbi
    }
}

/// Composed channel realization for one (vehicle, RSU, pRB) link block.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    /// Composed channel: large-scale amplitude times the fast-fading draw.
    pub h: Vec<C64>,
    pub pathloss_db: f64,
    /// Shadowing gain (negative values attenuate).
    pub shadow_db: f64,
}

impl LinkState {
    pub fn norm_sq(&self) -> f64 {
        self.h.iter().map(|c| c.norm_sqr()).sum()
    }
}

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("3-D distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("payload not deliverable: {bits_remaining} bits left after stream end")]
    StreamExhausted { bits_remaining: f64 },
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Urban-macro line-of-sight pathloss in dB.
///
/// Below the breakpoint: `28.0 + 22 log10(d3d) + 20 log10(fc)`. Beyond it,
/// the second branch with the same constants:
/// `28.0 + 40 log10(d3d) + 20 log10(fc) - 9 log10(dbp^2 + (h_b - h_v)^2)`,
/// with `dbp = 4 (h_b - 1)(h_v - 1) fc / c`.
pub fn pathloss_uma(d3d: f64, fc_ghz: f64, h_bs_m: f64, h_ut_m: f64) -> f64 {
    assert!(d3d > 0.0, "d3d must be positive");
    let dbp = 4.0 * (h_bs_m - 1.0).max(0.0) * (h_ut_m - 1.0).max(0.0) * fc_ghz * 1e9 / 3e8;
    if dbp <= 0.0 || d3d <= dbp {
        28.0 + 22.0 * d3d.log10() + 20.0 * fc_ghz.log10()
    } else {
        28.0 + 40.0 * d3d.log10() + 20.0 * fc_ghz.log10()
            - 9.0 * (dbp * dbp + (h_bs_m - h_ut_m).powi(2)).log10()
    }
}

/// Link geometry and large-scale state feeding a fading draw.
#[derive(Debug, Clone, Copy)]
pub struct LinkGeometry {
    pub d3d_m: f64,
    pub n_antennas: usize,
}

/// Draw one quasi-static block realization: i.i.d. circularly-symmetric
/// unit-variance complex Gaussian entries scaled by pathloss, antenna
/// gains, and the shadowing gain `shadow_db`. Deterministic for a given
/// rng stream; callers key streams by (vehicle, RSU, round, TTI).
pub fn draw_channel(
    geometry: LinkGeometry,
    params: &ChannelParams,
    shadow_db: f64,
    rng: &mut ChaCha8Rng,
) -> Result<LinkState, ChannelError> {
    if geometry.d3d_m <= 0.0 {
        return Err(ChannelError::NonPositiveDistance(geometry.d3d_m));
    }
    let pl = pathloss_uma(
        geometry.d3d_m,
        params.carrier_ghz,
        params.antenna_height_rsu_m,
        params.antenna_height_vehicle_m,
    );
    let scale_db = -pl + params.total_antenna_gain_db() + shadow_db;
    let amp = 10f64.powf(scale_db / 20.0);
    let h = (0..geometry.n_antennas)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2 * amp
        })
        .collect();
    Ok(LinkState {
        h,
        pathloss_db: pl,
        shadow_db,
    })
}

/// Downlink SNR: `P |h^H g|^2 / (omega sigma^2)`.
pub fn downlink_snr(p_w: f64, h: &[C64], g: &[C64], omega_hz: f64, noise_w_hz: f64) -> f64 {
    let dot: C64 = h
        .iter()
        .zip(g)
        .map(|(hv, gv)| hv.conj() * gv)
        .sum();
    p_w * dot.norm_sqr() / (omega_hz * noise_w_hz)
}

/// Uplink SNR with a maximal-ratio-combining receiver:
/// `P ||h||^2 / (omega sigma^2)`.
pub fn uplink_snr_mrc(p_w: f64, h: &[C64], omega_hz: f64, noise_w_hz: f64) -> f64 {
    let norm_sq: f64 = h.iter().map(|c| c.norm_sqr()).sum();
    p_w * norm_sq / (omega_hz * noise_w_hz)
}

/// Shannon rate over the assigned pRBs: `omega * sum log2(1 + snr_z)`.
pub fn block_rate(snrs: &[f64], omega_hz: f64) -> f64 {
    omega_hz * snrs.iter().map(|s| (1.0 + s).log2()).sum::<f64>()
}

/// Smallest TTI count whose cumulative delivered bits reach `s_bits`, as a
/// delay `kappa * T`. A zero payload takes zero time. If the stream ends
/// first, the shortfall is reported.
pub fn transmission_delay<I>(s_bits: f64, per_tti_bits: I, kappa_s: f64) -> Result<f64, ChannelError>
where
    I: IntoIterator<Item = f64>,
{
    if s_bits <= 0.0 {
        return Ok(0.0);
    }
    let mut delivered = 0.0;
    let mut ttis = 0u64;
    for bits in per_tti_bits {
        delivered += bits;
        ttis += 1;
        if delivered >= s_bits {
            return Ok(kappa_s * ttis as f64);
        }
    }
    Err(ChannelError::StreamExhausted {
        bits_remaining: s_bits - delivered,
    })
}
