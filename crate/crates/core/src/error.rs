use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported ring count {0}; at most 2 rings (19 sites) are modeled")]
    UnsupportedRings(u32),

    #[error("distance must be finite, got {0}")]
    NonFiniteDistance(f64),

    #[error("empty candidate list")]
    NoCandidates,

    #[error("distance {distance} m lies outside the sector region")]
    OutsideSector { distance: f64 },

    #[error("failed to parse profile: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("failed to serialize profile: {0}")]
    Serialize(#[from] toml::ser::Error),

    #[error("failed to encode report: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}
