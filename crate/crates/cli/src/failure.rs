use std::fmt;

/// A failed command, classified by exit status.
#[derive(Debug)]
pub enum Failure {
    /// Invalid arguments or configuration: status 2.
    Config(String),
    /// Anything that went wrong while running: status 3.
    Runtime(String),
    /// `analyze --check` found a violated check: status 4.
    Check(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
            Failure::Check(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) | Failure::Runtime(m) => f.write_str(m),
            Failure::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<bbnet::Error> for Failure {
    fn from(e: bbnet::Error) -> Self {
        use bbnet::Error::*;
        match e {
            Param(_) | Domain(_) | Config(_) | Parse { .. } => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}
