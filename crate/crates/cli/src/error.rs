use strategia::dynamics::DynamicsError;
use strategia::evalprobe::EvalError;
use strategia::rules::RulesError;
use strategia::strategy::StrategyError;
use strategia::tablebase::TablebaseError;
use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Io(_) => EXIT_IO,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Budget(_) => "budget",
            CliError::Io(_) => "io",
        }
    }
}

impl From<TablebaseError> for CliError {
    fn from(e: TablebaseError) -> Self {
        let msg = e.to_string();
        match e {
            TablebaseError::BudgetExceeded { .. } => CliError::Budget(msg),
            TablebaseError::Io(_)
            | TablebaseError::BadMagic
            | TablebaseError::UnsupportedVersion(_)
            | TablebaseError::Truncated
            | TablebaseError::Checksum { .. }
            | TablebaseError::Corrupt(_) => CliError::Io(msg),
            _ => CliError::Validation(msg),
        }
    }
}

impl From<StrategyError> for CliError {
    fn from(e: StrategyError) -> Self {
        match e {
            StrategyError::Tablebase(t) => t.into(),
            StrategyError::Drawn | StrategyError::Terminal(_) => CliError::Validation(format!("unsupported case: {e}")),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Strategy(s) => s.into(),
            DynamicsError::Tablebase(t) => t.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Tablebase(t) => t.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<RulesError> for CliError {
    fn from(e: RulesError) -> Self {
        CliError::Validation(e.to_string())
    }
}
