use serde_json::error::Category;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("gamble {gamble} has {got} values for {expected} atoms")]
    Dimension {
        gamble: String,
        expected: usize,
        got: usize,
    },
    #[error("expression error at offset {offset}: {message}")]
    Expression { offset: usize, message: String },
    #[error("unknown identifier {0}")]
    UnknownIdentifier(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] impbounds::Error),
}

impl CliError {
    pub fn from_json(e: serde_json::Error) -> CliError {
        match e.classify() {
            Category::Data => CliError::Schema(e.to_string()),
            _ => CliError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Schema(_) => "schema",
            CliError::Dimension { .. } => "dimension",
            CliError::Expression { .. } => "expression",
            CliError::UnknownIdentifier(_) => "unknown-identifier",
            CliError::Eval(_) => "evaluation",
            CliError::Io(_) => "io",
            CliError::Usage(_) => "usage",
            CliError::Core(e) if is_infeasible(e) => "infeasible",
            CliError::Core(_) => "domain",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if is_infeasible(e) => 3,
            _ => 2,
        }
    }
}

fn is_infeasible(e: &impbounds::Error) -> bool {
    matches!(
        e,
        impbounds::Error::EmptyCredalSet | impbounds::Error::EmptyConstrainedCredalSet { .. }
    )
}
