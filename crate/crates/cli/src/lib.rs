//! Configuration, output and command plumbing behind the `dualpace` binary.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

pub use config::{resolve, Command, ConfigError, EnvSpec, RawConfig, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] dualpace::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ASSUMPTION: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use dualpace::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(E::Domain(_)) => EXIT_CONFIG,
            CliError::Core(E::AssumptionViolated(_) | E::NoCrossing { .. }) => EXIT_ASSUMPTION,
            CliError::Core(E::Invariant(_) | E::State(_) | E::UnboundedMultiplier) => EXIT_INVARIANT,
            CliError::Io(_) | CliError::Csv(_) => EXIT_IO,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_category() {
        assert_eq!(CliError::from(ConfigError::Missing("env")).exit_code(), EXIT_CONFIG);
        let core = |e: dualpace::Error| CliError::from(e).exit_code();
        assert_eq!(core(dualpace::Error::AssumptionViolated("x".into())), EXIT_ASSUMPTION);
        assert_eq!(core(dualpace::Error::NoCrossing { curve: "budget", k_max: 4.0 }), EXIT_ASSUMPTION);
        assert_eq!(core(dualpace::Error::Invariant("x".into())), EXIT_INVARIANT);
        assert_eq!(core(dualpace::Error::Domain("x".into())), EXIT_CONFIG);
        assert_eq!(CliError::from(std::io::Error::other("x")).exit_code(), EXIT_IO);
    }
}
