use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] lattice_energy::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown inequality tag {0:?}; expected one of floma, sio2, iter3d, zee11, kz2, trives, lowerbd")]
    UnknownTag(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
