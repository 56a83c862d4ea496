use thiserror::Error;

use crate::domain::{ChargingProviderId, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("node {0} has no coordinates")]
    MissingCoordinates(NodeId),

    #[error("node {0} has no charging station record")]
    MissingStation(NodeId),

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("unknown charging provider {0}")]
    UnknownChargingProvider(ChargingProviderId),

    #[error("network is empty")]
    EmptyNetwork,

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no provider can carry the request")]
    NoFeasibleProvider,

    #[error("no successful composition to recommend from")]
    NoRecommendation,

    #[error("leg needs {needed:.3} Wh but battery holds {capacity:.3} Wh")]
    InfeasibleLeg { needed: f64, capacity: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
