//! Line-of-sight link budget: path loss, received power, thermal noise and
//! Shannon rate.

use serde::Serialize;

use crate::antenna::{self, PatternParams};
use crate::exposure::{self, TissueParams};
use crate::layout::{LinkGeometry, SectorId};
use crate::profiles::{PathLossCoefficients, SystemProfile};
use crate::units::{dbm_to_watts, linear_to_db};
use crate::{Error, Result};

pub const BOLTZMANN: f64 = 1.380649e-23;

/// Everything known about one (sector, UE) link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkSample {
    pub sector: SectorId,
    pub path_loss_db: f64,
    pub rss_dbm: f64,
    pub snr_db: f64,
    pub rate_bps: f64,
    /// Power density at the UE, W/m².
    pub pd: f64,
    /// Air-skin boundary SAR at the UE, W/kg.
    pub sar: f64,
}

fn pathloss_with(coeffs: &PathLossCoefficients, carrier_hz: f64, distance_3d: f64) -> f64 {
    coeffs.intercept_db
        + coeffs.distance_slope_db * distance_3d.log10()
        + coeffs.frequency_slope_db * (carrier_hz / 1e9).log10()
}

/// UMi LOS path loss in dB over the 3D distance.
pub fn path_loss(profile: &SystemProfile, geom: &LinkGeometry) -> Result<f64> {
    if !geom.distance_3d.is_finite() {
        return Err(Error::NonFiniteDistance(geom.distance_3d));
    }
    Ok(pathloss_with(
        &profile.pathloss(),
        profile.carrier_frequency_hz,
        geom.distance_3d,
    ))
}

/// Received signal strength in dBm.
pub fn rss(profile: &SystemProfile, geom: &LinkGeometry, pattern: &PatternParams) -> Result<f64> {
    let g = antenna::gain(pattern, geom.azimuth_offset_deg, geom.elevation_angle_deg);
    Ok(profile.effective_tx_power_dbm() + g - path_loss(profile, geom)?)
}

/// Thermal noise plus UE noise figure over the channel bandwidth, in dBm.
pub fn noise_floor(profile: &SystemProfile) -> f64 {
    linear_to_db(BOLTZMANN * profile.temperature_k * profile.bandwidth_hz * 1000.0)
        + profile.ue_noise_figure_db
}

/// `B·log2(1 + SNR)` in bit/s.
pub fn shannon_rate(profile: &SystemProfile, snr_db: f64) -> f64 {
    capacity(profile.bandwidth_hz, snr_db)
}

pub fn capacity(bandwidth_hz: f64, snr_db: f64) -> f64 {
    bandwidth_hz * (10f64.powf(snr_db / 10.0)).ln_1p() / std::f64::consts::LN_2
}

/// Per-profile constants folded once for the hot evaluation loop.
#[derive(Debug, Clone)]
pub struct LinkBudget {
    pub pattern: PatternParams,
    pub tx_power_dbm: f64,
    pub tx_power_watts: f64,
    pub noise_floor_dbm: f64,
    pub bandwidth_hz: f64,
    pub tissue: TissueParams,
    carrier_hz: f64,
    pathloss: PathLossCoefficients,
}

impl LinkBudget {
    pub fn new(profile: &SystemProfile) -> Self {
        let tx_power_dbm = profile.effective_tx_power_dbm();
        LinkBudget {
            pattern: PatternParams::from_profile(profile),
            tx_power_dbm,
            tx_power_watts: dbm_to_watts(tx_power_dbm),
            noise_floor_dbm: noise_floor(profile),
            bandwidth_hz: profile.bandwidth_hz,
            tissue: profile.tissue,
            carrier_hz: profile.carrier_frequency_hz,
            pathloss: profile.pathloss(),
        }
    }

    pub fn evaluate(&self, sector: SectorId, geom: &LinkGeometry) -> LinkSample {
        let gain_dbi = antenna::gain(
            &self.pattern,
            geom.azimuth_offset_deg,
            geom.elevation_angle_deg,
        );
        let path_loss_db = pathloss_with(&self.pathloss, self.carrier_hz, geom.distance_3d);
        let rss_dbm = self.tx_power_dbm + gain_dbi - path_loss_db;
        let snr_db = rss_dbm - self.noise_floor_dbm;
        let pd = exposure::power_density(self.tx_power_watts, gain_dbi, geom.distance_3d);
        LinkSample {
            sector,
            path_loss_db,
            rss_dbm,
            snr_db,
            rate_bps: capacity(self.bandwidth_hz, snr_db),
            pd,
            sar: exposure::sar_boundary(pd, &self.tissue),
        }
    }
}
