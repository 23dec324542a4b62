//! Hybrid public-key envelope.
//!
//! A fresh 32-octet AES-256-GCM content key encrypts the payload; the
//! content key itself is wrapped with RSA-OAEP(SHA-256) under the
//! recipient's public key. RSA never touches the payload, so plaintext size
//! is unbounded.
//!
//! Serialized form: `{"ciphertext":<b64>,"nonce":<b64>,"wrappedKey":<b64>}`
//! where `ciphertext` carries the GCM tag in its last 16 octets.

use aes_gcm::aead::{Aead, KeyInit};
use aes_gcm::{Aes256Gcm, Key, Nonce};
use rand::RngCore;
use rsa::Oaep;
use serde_json::{json, Value};
use sha2::Sha256;
use zeroize::Zeroizing;

use super::keys::{PrivateKey, PublicKey};
use super::{parse_canonical, CryptoError};
use crate::encoding::{b64_encode, to_canonical_vec, Fields};

pub const CONTENT_KEY_LEN: usize = 32;
pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptedBlob {
    pub wrapped_key: Vec<u8>,
    pub nonce: [u8; NONCE_LEN],
    pub ciphertext: Vec<u8>,
}

pub fn hybrid_encrypt(
    recipient: &PublicKey,
    plaintext: &[u8],
) -> Result<EncryptedBlob, CryptoError> {
    if plaintext.is_empty() {
        return Err(CryptoError::Empty("plaintext"));
    }
    let mut rng = rand::thread_rng();
    let mut content_key = Zeroizing::new([0u8; CONTENT_KEY_LEN]);
    rng.fill_bytes(content_key.as_mut());
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);

    let wrapped_key = recipient
        .inner()
        .encrypt(&mut rng, Oaep::new::<Sha256>(), content_key.as_ref())
        .map_err(|e| CryptoError::Rsa(e.to_string()))?;
    let cipher = Aes256Gcm::new(Key::<Aes256Gcm>::from_slice(content_key.as_ref()));
    let ciphertext = cipher
        .encrypt(Nonce::from_slice(&nonce), plaintext)
        .map_err(|_| CryptoError::Rsa("AES-GCM encryption failed".into()))?;
    Ok(EncryptedBlob {
        wrapped_key,
        nonce,
        ciphertext,
    })
}

/// Any failure (wrong key, altered envelope) is reported uniformly as
/// [`CryptoError::DecryptFailed`].
pub fn hybrid_decrypt(key: &PrivateKey, blob: &EncryptedBlob) -> Result<Vec<u8>, CryptoError> {
    let content_key = Zeroizing::new(
        key.inner()
            .decrypt(Oaep::new::<Sha256>(), &blob.wrapped_key)
            .map_err(|_| CryptoError::DecryptFailed)?,
    );
    if content_key.len() != CONTENT_KEY_LEN {
        return Err(CryptoError::DecryptFailed);
    }
    let cipher = Aes256Gcm::new(Key::<Aes256Gcm>::from_slice(&content_key));
    cipher
        .decrypt(Nonce::from_slice(&blob.nonce), blob.ciphertext.as_slice())
        .map_err(|_| CryptoError::DecryptFailed)
}

impl EncryptedBlob {
    pub fn to_json(&self) -> Value {
        json!({
            "ciphertext": b64_encode(&self.ciphertext),
            "nonce": b64_encode(&self.nonce),
            "wrappedKey": b64_encode(&self.wrapped_key),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, CryptoError> {
        const WHAT: &str = "encrypted blob";
        let m = |e| CryptoError::malformed(WHAT, e);
        let f = Fields::new(v, &["ciphertext", "nonce", "wrappedKey"]).map_err(m)?;
        let nonce = f.bytes("nonce").map_err(m)?;
        let ciphertext = f.bytes("ciphertext").map_err(m)?;
        if ciphertext.len() <= TAG_LEN {
            return Err(CryptoError::malformed(WHAT, "ciphertext shorter than tag"));
        }
        Ok(Self {
            wrapped_key: f.bytes("wrappedKey").map_err(m)?,
            nonce: nonce
                .try_into()
                .map_err(|_| CryptoError::malformed(WHAT, "nonce must be 12 octets"))?,
            ciphertext,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        to_canonical_vec(&self.to_json())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        Self::from_json(&parse_canonical("encrypted blob", bytes)?)
    }
}

/// Decrypts serialized envelope bytes as stored in a directory attribute.
/// Malformed bytes are reported as a decryption failure.
pub fn open_envelope(key: &PrivateKey, bytes: &[u8]) -> Result<Vec<u8>, CryptoError> {
    let blob = EncryptedBlob::from_bytes(bytes).map_err(|_| CryptoError::DecryptFailed)?;
    hybrid_decrypt(key, &blob)
}
