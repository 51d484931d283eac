//! Sectorized BS antenna pattern.
//!
//! Horizontal and vertical cuts are parabolic in dB, each capped, and the
//! combined attenuation is capped at the front-to-back ratio:
//!
//! ```text
//! A_h(φ) = min(12·(φ/φ_3dB)², A_m)
//! A_v(θ) = min(12·(θ/θ_3dB)², SLA_v)
//! A(φ,θ) = min(A_h(φ) + A_v(θ), A_m)
//! G(φ,θ) = G_max − A(φ,θ)
//! ```

use serde::{Deserialize, Serialize};

use crate::profiles::{BeamwidthConvention, SystemProfile};
use crate::units::linear_to_db;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternParams {
    pub az_3db_deg: f64,
    pub el_3db_deg: f64,
    /// Front-to-back ratio; caps the azimuth cut and the combined pattern.
    pub a_m_db: f64,
    /// Elevation side-lobe limit.
    pub sla_v_db: f64,
    /// Boresight gain including the array factor.
    pub g_max_dbi: f64,
    /// Disables the azimuth cut entirely.
    pub omnidirectional_azimuth: bool,
}

impl PatternParams {
    pub fn from_profile(profile: &SystemProfile) -> Self {
        let az_3db_deg = match profile.beamwidth_convention {
            BeamwidthConvention::HalfPowerBeamwidth => profile.az_3db_deg,
            // 12·(φ/x)² = 3 at φ = az_3db  =>  x = 2·az_3db
            BeamwidthConvention::LossAngle => 2.0 * profile.az_3db_deg,
        };
        PatternParams {
            az_3db_deg,
            el_3db_deg: profile.el_3db_deg,
            a_m_db: profile.front_to_back_db,
            sla_v_db: profile.sla_v_db,
            g_max_dbi: profile.element_gain_max_dbi
                + linear_to_db(f64::from(profile.array_elements)),
            omnidirectional_azimuth: profile.omnidirectional_azimuth,
        }
    }

    pub fn azimuth_attenuation(&self, azimuth_offset_deg: f64) -> f64 {
        if self.omnidirectional_azimuth {
            return 0.0;
        }
        let ratio = azimuth_offset_deg / self.az_3db_deg;
        (12.0 * ratio * ratio).min(self.a_m_db)
    }

    pub fn elevation_attenuation(&self, elevation_offset_deg: f64) -> f64 {
        let ratio = elevation_offset_deg / self.el_3db_deg;
        (12.0 * ratio * ratio).min(self.sla_v_db)
    }
}

/// Combined pattern attenuation in dB, within `[0, a_m]`.
pub fn attenuation(
    params: &PatternParams,
    azimuth_offset_deg: f64,
    elevation_offset_deg: f64,
) -> f64 {
    (params.azimuth_attenuation(azimuth_offset_deg)
        + params.elevation_attenuation(elevation_offset_deg))
    .min(params.a_m_db)
}

/// Antenna gain in dBi.
pub fn gain(params: &PatternParams, azimuth_offset_deg: f64, elevation_offset_deg: f64) -> f64 {
    params.g_max_dbi - attenuation(params, azimuth_offset_deg, elevation_offset_deg)
}
