//! Power density and specific absorption rate.
//!
//! PD follows from either the incident field (`|E|²/η₀`) or the transmitter
//! (`P·G/(4πd²)`). SAR is evaluated at the air-skin boundary as
//! `2·PD·(1−R²)/(δ·ρ)`; the point form `σ|E|²/ρ` is available standalone.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antenna::{self, PatternParams};
use crate::channel::LinkBudget;
use crate::layout::{link_geometry, sample_ue, LinkGeometry, SectorGeometry, UeDrop};
use crate::profiles::SystemProfile;
use crate::stats::MeanEstimate;
use crate::units::db_to_linear;
use crate::{Error, Result};

/// Characteristic impedance of free space, ohm.
pub const FREE_SPACE_IMPEDANCE: f64 = 376.73;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TissueParams {
    /// Field reflection coefficient at the air-skin boundary, in [0, 1).
    pub reflection_coefficient: f64,
    pub penetration_depth_m: f64,
    /// kg/m³.
    pub mass_density: f64,
    /// S/m; only used by [`sar_point`].
    pub conductivity: f64,
}

impl Default for TissueParams {
    fn default() -> Self {
        TissueParams {
            reflection_coefficient: 0.6,
            penetration_depth_m: 1e-3,
            mass_density: 1000.0,
            conductivity: 38.2,
        }
    }
}

impl TissueParams {
    pub fn validate(&self) -> Result<()> {
        let r = self.reflection_coefficient;
        if !(0.0..1.0).contains(&r) {
            return Err(Error::InvalidProfile(format!(
                "reflection coefficient must lie in [0, 1), got {r}"
            )));
        }
        if !(self.penetration_depth_m > 0.0 && self.mass_density > 0.0) {
            return Err(Error::InvalidProfile(
                "penetration depth and mass density must be positive".into(),
            ));
        }
        if self.conductivity.is_nan() || self.conductivity < 0.0 {
            return Err(Error::InvalidProfile(
                "conductivity must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeSpaceParams {
    pub characteristic_impedance: f64,
}

impl Default for FreeSpaceParams {
    fn default() -> Self {
        FreeSpaceParams {
            characteristic_impedance: FREE_SPACE_IMPEDANCE,
        }
    }
}

/// PD in W/m² from the incident field amplitude (V/m).
pub fn pd_from_field(e_field_amplitude: f64) -> f64 {
    pd_from_field_with(e_field_amplitude, &FreeSpaceParams::default())
}

pub fn pd_from_field_with(e_field_amplitude: f64, free_space: &FreeSpaceParams) -> f64 {
    e_field_amplitude * e_field_amplitude / free_space.characteristic_impedance
}

/// `P·G/(4πd²)` with `P` in W, `G` in dBi and `d` in m.
#[inline]
pub fn power_density(tx_power_watts: f64, gain_dbi: f64, distance_m: f64) -> f64 {
    tx_power_watts * db_to_linear(gain_dbi) / (4.0 * std::f64::consts::PI * distance_m * distance_m)
}

/// PD at the UE from the transmitter's parameters, over the 3D distance.
pub fn pd_from_link(profile: &SystemProfile, geom: &LinkGeometry, pattern: &PatternParams) -> f64 {
    let g = antenna::gain(pattern, geom.azimuth_offset_deg, geom.elevation_angle_deg);
    power_density(profile.effective_tx_power_watts(), g, geom.distance_3d)
}

/// Local SAR `σ|E|²/ρ` in W/kg.
pub fn sar_point(e_field_amplitude: f64, tissue: &TissueParams) -> f64 {
    tissue.conductivity * e_field_amplitude * e_field_amplitude / tissue.mass_density
}

/// Air-skin boundary SAR `2·PD·(1−R²)/(δ·ρ)` in W/kg.
#[inline]
pub fn sar_boundary(pd: f64, tissue: &TissueParams) -> f64 {
    let r = tissue.reflection_coefficient;
    2.0 * pd * (1.0 - r * r) / (tissue.penetration_depth_m * tissue.mass_density)
}

/// Monte Carlo area average of `integrand` over the sector region.
///
/// Positions are drawn sequentially from `rng`; the integrand may run in
/// parallel, and the reduction order is fixed, so the result only depends on
/// the stream.
pub fn sector_average<R, F>(
    sector: &SectorGeometry,
    ue_height_m: f64,
    num_samples: usize,
    rng: &mut R,
    integrand: F,
) -> MeanEstimate
where
    R: Rng + ?Sized,
    F: Fn(&UeDrop) -> f64 + Sync,
{
    let drops: Vec<UeDrop> = (0..num_samples.max(1))
        .map(|_| sample_ue(sector, ue_height_m, rng))
        .collect();
    let values: Vec<f64> = drops.par_iter().map(&integrand).collect();
    MeanEstimate::from_samples(&values)
}

/// Sector-averaged boundary SAR from the sector's own transmitter.
pub fn sector_average_sar<R: Rng + ?Sized>(
    sector: &SectorGeometry,
    profile: &SystemProfile,
    num_samples: usize,
    rng: &mut R,
) -> MeanEstimate {
    let budget = LinkBudget::new(profile);
    sector_average(sector, profile.ue_height_m, num_samples, rng, |ue| {
        budget.evaluate(sector.id, &link_geometry(sector, ue)).sar
    })
}
