use contactq::contact::ContactError;
use contactq::fedosov::FedosovError;
use contactq::obstruct::ObstructError;
use contactq::weyl::WeylError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("spec parse error: {0}")]
    Parse(String),
    #[error("spec field `{field}`: {msg}")]
    Field { field: String, msg: String },
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Fedosov(#[from] FedosovError),
    #[error(transparent)]
    Obstruct(#[from] ObstructError),
}

impl CliError {
    pub fn field(field: &str, msg: impl Into<String>) -> Self {
        CliError::Field {
            field: field.to_string(),
            msg: msg.into(),
        }
    }

    fn is_invariant(&self) -> bool {
        match self {
            CliError::Contact(ContactError::Invariant { .. })
            | CliError::Weyl(WeylError::Invariant { .. })
            | CliError::Fedosov(FedosovError::Invariant { .. }) => true,
            CliError::Fedosov(FedosovError::Contact(e)) | CliError::Obstruct(ObstructError::Contact(e)) => {
                matches!(e, ContactError::Invariant { .. })
            }
            CliError::Fedosov(FedosovError::Weyl(e)) => matches!(e, WeylError::Invariant { .. }),
            CliError::Obstruct(ObstructError::Fedosov(e)) => {
                CliError::Fedosov(e.clone()).is_invariant()
            }
            _ => false,
        }
    }

    /// 3 for a failed internal identity, 1 for anything wrong with the input.
    pub fn exit_code(&self) -> i32 {
        if self.is_invariant() {
            3
        } else {
            1
        }
    }
}
