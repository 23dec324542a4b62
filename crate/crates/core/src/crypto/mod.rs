//! Fixed algorithm suite: RSA-2048 with OAEP(SHA-256) for key transport and
//! PSS(SHA-256) for signatures, AES-256-GCM for content, and
//! PBKDF2-HMAC-SHA256 for password-derived keys. Every artifact serializes
//! to canonical JSON text with base64 binaries; those exact bytes are what
//! directory attributes hold.

pub mod certificate;
pub mod hybrid;
pub mod keys;
pub mod pse;

pub use certificate::Certificate;
pub use hybrid::{hybrid_decrypt, hybrid_encrypt, EncryptedBlob};
pub use keys::{KeyPair, PrivateKey, PublicKey};
pub use pse::{PseContainer, PseContents};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CryptoError {
    /// Wrong private key, or the envelope was altered.
    #[error("decryption failed")]
    DecryptFailed,
    /// The container did not authenticate under the given password.
    #[error("wrong password or corrupted container")]
    WrongPassword,
    #[error("malformed {what}: {reason}")]
    Malformed { what: &'static str, reason: String },
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("validity period must be positive")]
    InvalidValidity,
    #[error("RSA operation failed: {0}")]
    Rsa(String),
}

impl CryptoError {
    pub(crate) fn malformed(what: &'static str, reason: impl ToString) -> Self {
        Self::Malformed {
            what,
            reason: reason.to_string(),
        }
    }
}

/// Parses canonical JSON bytes, rejecting anything that is not canonical.
pub(crate) fn parse_canonical(
    what: &'static str,
    bytes: &[u8],
) -> Result<serde_json::Value, CryptoError> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| CryptoError::malformed(what, e))?;
    if crate::encoding::to_canonical_vec(&value) != bytes {
        return Err(CryptoError::malformed(what, "not in canonical form"));
    }
    Ok(value)
}
