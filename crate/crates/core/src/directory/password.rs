//! Salted SHA-256 password hashes in the `{SSHA256}` userPassword format:
//! the scheme tag followed by base64(SHA-256(password ‖ salt) ‖ salt).

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::encoding::{b64_decode, b64_encode};

pub const SCHEME_TAG: &str = "{SSHA256}";
pub const SALT_LEN: usize = 16;
const DIGEST_LEN: usize = 32;

#[derive(Clone, PartialEq, Eq)]
pub struct PasswordHash {
    salt: [u8; SALT_LEN],
    digest: [u8; DIGEST_LEN],
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PasswordHashError {
    #[error("password must not be empty")]
    EmptyPassword,
    #[error("stored hash does not start with {SCHEME_TAG}")]
    UnknownScheme,
    #[error("stored hash body is malformed")]
    Malformed,
}

fn digest(password: &[u8], salt: &[u8]) -> [u8; DIGEST_LEN] {
    let mut h = Sha256::new();
    h.update(password);
    h.update(salt);
    h.finalize().into()
}

/// Hashes `password` under a fresh random salt.
pub fn hash_password(password: &[u8]) -> Result<PasswordHash, PasswordHashError> {
    let mut salt = [0u8; SALT_LEN];
    rand::thread_rng().fill_bytes(&mut salt);
    PasswordHash::with_salt(password, salt)
}

/// Verifies `password` against a rendered hash. Malformed stored values
/// simply fail verification.
pub fn verify_password(password: &[u8], stored: &str) -> bool {
    stored
        .parse::<PasswordHash>()
        .map(|h| h.verify(password))
        .unwrap_or(false)
}

impl PasswordHash {
    pub fn with_salt(password: &[u8], salt: [u8; SALT_LEN]) -> Result<Self, PasswordHashError> {
        if password.is_empty() {
            return Err(PasswordHashError::EmptyPassword);
        }
        Ok(Self {
            salt,
            digest: digest(password, &salt),
        })
    }

    pub fn scheme(&self) -> &'static str {
        SCHEME_TAG
    }

    pub fn salt(&self) -> &[u8; SALT_LEN] {
        &self.salt
    }

    pub fn digest(&self) -> &[u8; DIGEST_LEN] {
        &self.digest
    }

    pub fn verify(&self, password: &[u8]) -> bool {
        let candidate = digest(password, &self.salt);
        // Constant-time comparison.
        candidate
            .iter()
            .zip(self.digest.iter())
            .fold(0u8, |acc, (a, b)| acc | (a ^ b))
            == 0
    }

    pub fn render(&self) -> String {
        let mut body = Vec::with_capacity(DIGEST_LEN + SALT_LEN);
        body.extend_from_slice(&self.digest);
        body.extend_from_slice(&self.salt);
        format!("{SCHEME_TAG}{}", b64_encode(&body))
    }
}

impl FromStr for PasswordHash {
    type Err = PasswordHashError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .strip_prefix(SCHEME_TAG)
            .ok_or(PasswordHashError::UnknownScheme)?;
        let raw = b64_decode(body).map_err(|_| PasswordHashError::Malformed)?;
        if raw.len() != DIGEST_LEN + SALT_LEN {
            return Err(PasswordHashError::Malformed);
        }
        let (d, s) = raw.split_at(DIGEST_LEN);
        Ok(Self {
            digest: d.try_into().expect("length checked"),
            salt: s.try_into().expect("length checked"),
        })
    }
}

impl fmt::Display for PasswordHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for PasswordHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PasswordHash({})", self.render())
    }
}
