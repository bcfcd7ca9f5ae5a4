use std::process::ExitCode;

/// A failed command, tagged with the exit status it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad input or configuration: exit 1.
    User(anyhow::Error),
    /// Something broke while doing valid work: exit 2.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::User(_) => ExitCode::from(1),
            Failure::Runtime(_) => ExitCode::from(2),
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::User(e) | Failure::Runtime(e) => e,
        }
    }

    pub fn user(msg: impl std::fmt::Display) -> Failure {
        Failure::User(anyhow::anyhow!("{msg}"))
    }
}

pub trait ResultExt<T> {
    fn user(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ResultExt<T> for Result<T, E> {
    fn user(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::User(e.into()))
    }

    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}
