use std::fmt;

/// LDAP result codes used by the directory. The numeric values are the
/// RFC 4511 assignments and appear verbatim on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResultCode {
    Success,
    ProtocolError,
    ConfidentialityRequired,
    NoSuchObject,
    InvalidCredentials,
    InsufficientAccessRights,
    UnwillingToPerform,
    /// Code 65 (`objectClassViolation` in RFC 4511).
    SchemaViolation,
    EntryAlreadyExists,
}

impl ResultCode {
    pub const ALL: [ResultCode; 9] = [
        ResultCode::Success,
        ResultCode::ProtocolError,
        ResultCode::ConfidentialityRequired,
        ResultCode::NoSuchObject,
        ResultCode::InvalidCredentials,
        ResultCode::InsufficientAccessRights,
        ResultCode::UnwillingToPerform,
        ResultCode::SchemaViolation,
        ResultCode::EntryAlreadyExists,
    ];

    pub fn code(self) -> u32 {
        match self {
            ResultCode::Success => 0,
            ResultCode::ProtocolError => 2,
            ResultCode::ConfidentialityRequired => 13,
            ResultCode::NoSuchObject => 32,
            ResultCode::InvalidCredentials => 49,
            ResultCode::InsufficientAccessRights => 50,
            ResultCode::UnwillingToPerform => 53,
            ResultCode::SchemaViolation => 65,
            ResultCode::EntryAlreadyExists => 68,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.code() == code)
    }

    pub fn name(self) -> &'static str {
        match self {
            ResultCode::Success => "success",
            ResultCode::ProtocolError => "protocolError",
            ResultCode::ConfidentialityRequired => "confidentialityRequired",
            ResultCode::NoSuchObject => "noSuchObject",
            ResultCode::InvalidCredentials => "invalidCredentials",
            ResultCode::InsufficientAccessRights => "insufficientAccessRights",
            ResultCode::UnwillingToPerform => "unwillingToPerform",
            ResultCode::SchemaViolation => "schemaViolation",
            ResultCode::EntryAlreadyExists => "entryAlreadyExists",
        }
    }
}

impl fmt::Display for ResultCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.code())
    }
}

/// A failed directory operation: an LDAP result code plus diagnostic text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{code}: {message}")]
pub struct DirectoryError {
    pub code: ResultCode,
    pub message: String,
}

impl DirectoryError {
    pub fn new(code: ResultCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn no_such_object(dn: impl fmt::Display) -> Self {
        Self::new(ResultCode::NoSuchObject, format!("no entry at `{dn}`"))
    }

    pub fn access_denied(message: impl Into<String>) -> Self {
        Self::new(ResultCode::InsufficientAccessRights, message)
    }

    pub fn schema(message: impl Into<String>) -> Self {
        Self::new(ResultCode::SchemaViolation, message)
    }
}
