//! Exit-code classification: 1 for data problems, 2 for bad configuration.

use std::fmt;

#[derive(Debug)]
pub enum Failure {
    Data(anyhow::Error),
    Config(anyhow::Error),
}

pub type CmdResult<T> = Result<T, Failure>;

impl Failure {
    pub fn data(e: impl Into<anyhow::Error>) -> Self {
        Failure::Data(e.into())
    }

    pub fn config(e: impl Into<anyhow::Error>) -> Self {
        Failure::Config(e.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Data(_) => 1,
            Failure::Config(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Data(_) => "data",
            Failure::Config(_) => "config",
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Data(e) | Failure::Config(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<trade_strength::Error> for Failure {
    fn from(e: trade_strength::Error) -> Self {
        if e.is_config() {
            Failure::Config(e.into())
        } else {
            Failure::Data(e.into())
        }
    }
}
