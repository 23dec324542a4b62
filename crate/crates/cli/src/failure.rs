use std::fmt;

use dirpki_core::agent::AgentError;
use dirpki_core::ca::CaError;
use dirpki_core::crypto::CryptoError;
use dirpki_core::directory::{ResultCode, SessionError};

/// A failed command: a stable token for scripts plus a human message.
#[derive(Debug)]
pub struct Failure {
    pub token: &'static str,
    pub message: String,
}

impl Failure {
    pub fn new(token: &'static str, message: impl Into<String>) -> Self {
        Self {
            token,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new("INVALID_INPUT", message)
    }

    pub fn io(what: &str, e: impl fmt::Display) -> Self {
        Self::new("IO_ERROR", format!("{what}: {e}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.token, self.message)
    }
}

pub fn code_token(code: ResultCode) -> &'static str {
    match code {
        ResultCode::Success => "SUCCESS",
        ResultCode::ProtocolError => "PROTOCOL_ERROR",
        ResultCode::ConfidentialityRequired => "CONFIDENTIALITY_REQUIRED",
        ResultCode::NoSuchObject => "NO_SUCH_OBJECT",
        ResultCode::InvalidCredentials => "INVALID_CREDENTIALS",
        ResultCode::InsufficientAccessRights => "ACCESS_DENIED",
        ResultCode::UnwillingToPerform => "UNWILLING_TO_PERFORM",
        ResultCode::SchemaViolation => "SCHEMA_VIOLATION",
        ResultCode::EntryAlreadyExists => "ENTRY_ALREADY_EXISTS",
    }
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        match &e {
            SessionError::Directory(d) => Failure::new(code_token(d.code), e.to_string()),
            SessionError::Transport(_) => Failure::new("TRANSPORT_ERROR", e.to_string()),
        }
    }
}

impl From<CryptoError> for Failure {
    fn from(e: CryptoError) -> Self {
        let token = match e {
            CryptoError::DecryptFailed => "DECRYPT_FAILED",
            CryptoError::WrongPassword => "WRONG_PASSWORD",
            _ => "CRYPTO_ERROR",
        };
        Failure::new(token, e.to_string())
    }
}

impl From<AgentError> for Failure {
    fn from(e: AgentError) -> Self {
        let token = match &e {
            AgentError::DecryptFailed => "DECRYPT_FAILED",
            AgentError::WrongPassword => "WRONG_PASSWORD",
            AgentError::Directory(d) => code_token(d.code),
            AgentError::Transport(_) => "TRANSPORT_ERROR",
            AgentError::MissingAttribute(_) => "MISSING_ATTRIBUTE",
            AgentError::InvalidCertificate(_) => "INVALID_CERTIFICATE",
            AgentError::InvalidInput(_) => "INVALID_INPUT",
            AgentError::Crypto(_) => "CRYPTO_ERROR",
        };
        Failure::new(token, e.to_string())
    }
}

impl From<CaError> for Failure {
    fn from(e: CaError) -> Self {
        match e {
            CaError::Directory(s) => s.into(),
            CaError::Crypto(c) => c.into(),
            CaError::NotRegistered(_) => Failure::new("NOT_REGISTERED", e.to_string()),
            CaError::AlreadyRegistered(_) => Failure::new("ALREADY_REGISTERED", e.to_string()),
            CaError::InvalidRegistration(_) => Failure::new("INVALID_REGISTRATION", e.to_string()),
            CaError::NotIssued(_) => Failure::new("NOT_ISSUED", e.to_string()),
            CaError::State(_) | CaError::Io(_) => Failure::new("CA_STATE_ERROR", e.to_string()),
        }
    }
}
