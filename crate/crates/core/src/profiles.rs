//! System parameter sets for the three simulated generations.
//!
//! A [`SystemProfile`] carries everything the link budget and exposure
//! models need for one generation: carrier, bandwidth, antenna geometry,
//! transmit power, site spacing, path-loss model and tissue parameters.
//! Profiles serialize to TOML; a config file may start from a built-in
//! profile (`base = "5g"`) and override individual fields.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::exposure::TissueParams;
use crate::units::{dbm_to_watts, linear_to_db};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generation {
    #[serde(rename = "5g")]
    FiveG,
    #[serde(rename = "4g")]
    FourG,
    #[serde(rename = "3.9g")]
    ThreePointNineG,
}

impl Generation {
    pub const ALL: [Generation; 3] = [
        Generation::FiveG,
        Generation::FourG,
        Generation::ThreePointNineG,
    ];

    /// Short tag used in file names and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            Generation::FiveG => "5g",
            Generation::FourG => "4g",
            Generation::ThreePointNineG => "3.9g",
        }
    }
}

impl fmt::Display for Generation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Generation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "5g" => Ok(Generation::FiveG),
            "4g" => Ok(Generation::FourG),
            "3.9g" | "39g" => Ok(Generation::ThreePointNineG),
            other => Err(Error::InvalidConfig(format!(
                "unknown generation '{other}'"
            ))),
        }
    }
}

/// UMi street-canyon line-of-sight path-loss variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathLossModel {
    Umi38901,
    Umi36873,
    Umi25996,
}

/// `PL = intercept + distance_slope·log10(d_3d / 1 m) + frequency_slope·log10(f / 1 GHz)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossCoefficients {
    pub intercept_db: f64,
    pub distance_slope_db: f64,
    pub frequency_slope_db: f64,
}

impl PathLossModel {
    pub fn coefficients(self) -> PathLossCoefficients {
        let (intercept_db, distance_slope_db, frequency_slope_db) = match self {
            PathLossModel::Umi38901 => (32.4, 21.0, 20.0),
            PathLossModel::Umi36873 => (28.0, 22.0, 20.0),
            PathLossModel::Umi25996 => (34.53, 38.0, 0.0),
        };
        PathLossCoefficients {
            intercept_db,
            distance_slope_db,
            frequency_slope_db,
        }
    }
}

/// How `az_3db_deg` is interpreted by the azimuth pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamwidthConvention {
    /// `az_3db_deg` is the half-power beamwidth: 3 dB loss at half of it.
    #[default]
    HalfPowerBeamwidth,
    /// `az_3db_deg` is the off-boresight angle at which the loss is 3 dB.
    LossAngle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemProfile {
    pub generation: Generation,
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub inter_site_distance_m: f64,
    /// Hexagon circumradius; defaults to `ISD / sqrt(3)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_radius_m: Option<f64>,
    /// Rings of sites around the center site used by default (0, 1 or 2).
    pub default_rings: u32,
    pub sectors_per_site: u32,
    /// Per-element gain when `array_elements > 1`, total gain otherwise.
    pub element_gain_max_dbi: f64,
    pub tx_power_dbm: f64,
    /// Whether `tx_power_dbm` is quoted per array element.
    pub tx_power_per_element: bool,
    pub array_elements: u32,
    pub bs_antenna_height_m: f64,
    pub ue_height_m: f64,
    pub az_3db_deg: f64,
    #[serde(default)]
    pub beamwidth_convention: BeamwidthConvention,
    pub el_3db_deg: f64,
    pub front_to_back_db: f64,
    pub sla_v_db: f64,
    pub omnidirectional_azimuth: bool,
    pub ue_noise_figure_db: f64,
    pub temperature_k: f64,
    pub pathloss_model: PathLossModel,
    /// Replaces the model's built-in coefficient row when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pathloss_coefficients: Option<PathLossCoefficients>,
    pub tissue: TissueParams,
}

/// Returns the built-in parameter set for `generation`.
pub fn builtin_profile(generation: Generation) -> SystemProfile {
    let tissue = TissueParams::default();
    match generation {
        Generation::FiveG => SystemProfile {
            generation,
            carrier_frequency_hz: 28e9,
            bandwidth_hz: 850e6,
            inter_site_distance_m: 200.0,
            cell_radius_m: None,
            default_rings: 2,
            sectors_per_site: 3,
            element_gain_max_dbi: 8.0,
            tx_power_dbm: 21.0,
            tx_power_per_element: true,
            array_elements: 64,
            bs_antenna_height_m: 10.0,
            ue_height_m: 1.5,
            az_3db_deg: 65.0,
            beamwidth_convention: BeamwidthConvention::HalfPowerBeamwidth,
            el_3db_deg: 65.0,
            front_to_back_db: 30.0,
            sla_v_db: 30.0,
            omnidirectional_azimuth: false,
            ue_noise_figure_db: 7.0,
            temperature_k: 290.0,
            pathloss_model: PathLossModel::Umi38901,
            pathloss_coefficients: None,
            tissue,
        },
        Generation::FourG => SystemProfile {
            generation,
            carrier_frequency_hz: 2e9,
            bandwidth_hz: 20e6,
            inter_site_distance_m: 200.0,
            cell_radius_m: None,
            default_rings: 2,
            sectors_per_site: 3,
            element_gain_max_dbi: 8.0,
            tx_power_dbm: 44.0,
            tx_power_per_element: false,
            array_elements: 4,
            bs_antenna_height_m: 10.0,
            ue_height_m: 1.5,
            az_3db_deg: 65.0,
            beamwidth_convention: BeamwidthConvention::HalfPowerBeamwidth,
            el_3db_deg: 65.0,
            front_to_back_db: 30.0,
            sla_v_db: 30.0,
            omnidirectional_azimuth: false,
            ue_noise_figure_db: 7.0,
            temperature_k: 290.0,
            pathloss_model: PathLossModel::Umi36873,
            pathloss_coefficients: None,
            tissue,
        },
        Generation::ThreePointNineG => SystemProfile {
            generation,
            carrier_frequency_hz: 1.9e9,
            bandwidth_hz: 20e6,
            inter_site_distance_m: 1000.0,
            cell_radius_m: Some(500.0),
            default_rings: 0,
            sectors_per_site: 3,
            element_gain_max_dbi: 17.0,
            tx_power_dbm: 43.0,
            tx_power_per_element: false,
            array_elements: 1,
            bs_antenna_height_m: 32.0,
            ue_height_m: 1.5,
            az_3db_deg: 35.0,
            beamwidth_convention: BeamwidthConvention::HalfPowerBeamwidth,
            el_3db_deg: 35.0,
            front_to_back_db: 23.0,
            sla_v_db: 23.0,
            omnidirectional_azimuth: true,
            ue_noise_figure_db: 7.0,
            temperature_k: 290.0,
            pathloss_model: PathLossModel::Umi25996,
            pathloss_coefficients: None,
            tissue,
        },
    }
}

/// Total conducted transmit power in dBm.
///
/// Per-element powers are summed over the array (`+10·log10(N)`); a quoted
/// total is returned unchanged.
pub fn effective_tx_power(profile: &SystemProfile) -> f64 {
    if profile.tx_power_per_element {
        profile.tx_power_dbm + linear_to_db(f64::from(profile.array_elements))
    } else {
        profile.tx_power_dbm
    }
}

impl SystemProfile {
    pub fn builtin(generation: Generation) -> Self {
        builtin_profile(generation)
    }

    pub fn effective_tx_power_dbm(&self) -> f64 {
        effective_tx_power(self)
    }

    pub fn effective_tx_power_watts(&self) -> f64 {
        dbm_to_watts(effective_tx_power(self))
    }

    pub fn cell_radius(&self) -> f64 {
        self.cell_radius_m
            .unwrap_or(self.inter_site_distance_m / 3f64.sqrt())
    }

    pub fn pathloss(&self) -> PathLossCoefficients {
        self.pathloss_coefficients
            .unwrap_or_else(|| self.pathloss_model.coefficients())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_frequency_hz", self.carrier_frequency_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("inter_site_distance_m", self.inter_site_distance_m),
            ("cell_radius_m", self.cell_radius()),
            ("bs_antenna_height_m", self.bs_antenna_height_m),
            ("ue_height_m", self.ue_height_m),
            ("az_3db_deg", self.az_3db_deg),
            ("el_3db_deg", self.el_3db_deg),
            ("front_to_back_db", self.front_to_back_db),
            ("sla_v_db", self.sla_v_db),
            ("temperature_k", self.temperature_k),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "{name} must be finite and positive, got {value}"
                )));
            }
        }
        // Gains and powers are in dB and may legitimately be any finite value.
        for (name, value) in [
            ("element_gain_max_dbi", self.element_gain_max_dbi),
            ("tx_power_dbm", self.tx_power_dbm),
            ("ue_noise_figure_db", self.ue_noise_figure_db),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidProfile(format!("{name} must be finite")));
            }
        }
        if self.sectors_per_site != 3 {
            return Err(Error::InvalidProfile(format!(
                "only 3 sectors per site are modeled, got {}",
                self.sectors_per_site
            )));
        }
        if self.array_elements == 0 {
            return Err(Error::InvalidProfile(
                "array_elements must be at least 1".into(),
            ));
        }
        if self.default_rings > 2 {
            return Err(Error::UnsupportedRings(self.default_rings));
        }
        if self.front_to_back_db > 60.0 || self.sla_v_db > 60.0 {
            return Err(Error::InvalidProfile(
                "pattern attenuation caps must not exceed 60 dB".into(),
            ));
        }
        let pl = self.pathloss();
        if ![pl.intercept_db, pl.distance_slope_db, pl.frequency_slope_db]
            .iter()
            .all(|c| c.is_finite())
        {
            return Err(Error::InvalidProfile(
                "path-loss coefficients must be finite".into(),
            ));
        }
        self.tissue.validate()
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Parses a profile table.
    ///
    /// With a `base = "<generation>"` key the remaining keys override the
    /// built-in profile (nested tables merge key by key); without it the
    /// table must describe a complete profile.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse()?;
        Self::from_table(&table)
    }

    pub fn from_table(table: &toml::Table) -> Result<Self> {
        let mut table = table.clone();
        let profile = match table.remove("base") {
            Some(toml::Value::String(base)) => {
                builtin_profile(base.parse()?).with_overrides(&table)?
            }
            Some(other) => {
                return Err(Error::InvalidConfig(format!(
                    "'base' must be a generation string, got {other}"
                )))
            }
            None => toml::Value::Table(table).try_into::<SystemProfile>()?,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Returns a copy with the fields in `overrides` replaced.
    pub fn with_overrides(&self, overrides: &toml::Table) -> Result<Self> {
        let mut merged = toml::Table::try_from(self)?;
        merge_tables(&mut merged, overrides);
        let profile: SystemProfile = toml::Value::Table(merged).try_into()?;
        profile.validate()?;
        Ok(profile)
    }
}

fn merge_tables(into: &mut toml::Table, from: &toml::Table) {
    for (key, value) in from {
        match (into.get_mut(key), value) {
            (Some(toml::Value::Table(dst)), toml::Value::Table(src)) => merge_tables(dst, src),
            _ => {
                into.insert(key.clone(), value.clone());
            }
        }
    }
}

/// Regulatory exposure limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureLimits {
    /// Power-density guideline, W/m².
    pub pd_limit: f64,
    /// SAR guideline (sub-6 GHz), W/kg.
    pub sar_limit: f64,
}

impl Default for ExposureLimits {
    fn default() -> Self {
        ExposureLimits {
            pd_limit: 10.0,
            sar_limit: 1.6,
        }
    }
}

impl ExposureLimits {
    pub fn validate(&self) -> Result<()> {
        if self.pd_limit > 0.0 && self.sar_limit > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "exposure limits must be positive".into(),
            ))
        }
    }
}
