//! Password-protected personal security environment: a private key and its
//! certificate chain sealed with AES-256-GCM under a PBKDF2-HMAC-SHA256
//! derived key.
//!
//! Container bytes:
//! `{"ciphertext":..,"kdfIterations":..,"kdfSalt":..,"nonce":..,"version":1}`.
//! The sealed plaintext is `{"certificates":[<b64 cert bytes>..],"privateKey":{..}}`.

use aes_gcm::aead::{Aead, KeyInit};
use aes_gcm::{Aes256Gcm, Key, Nonce};
use rand::RngCore;
use serde_json::{json, Value};
use sha2::Sha256;
use zeroize::Zeroizing;

use super::certificate::Certificate;
use super::hybrid::{NONCE_LEN, TAG_LEN};
use super::keys::PrivateKey;
use super::{parse_canonical, CryptoError};
use crate::encoding::{b64_decode, b64_encode, to_canonical_vec, Fields};

pub const VERSION: u64 = 1;
pub const SALT_LEN: usize = 16;
pub const MIN_ITERATIONS: u32 = 100_000;
/// Upper bound accepted when opening, so a hostile container cannot demand
/// unbounded work.
pub const MAX_ITERATIONS: u32 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseContainer {
    pub version: u64,
    pub kdf_salt: [u8; SALT_LEN],
    pub kdf_iterations: u32,
    pub nonce: [u8; NONCE_LEN],
    pub ciphertext: Vec<u8>,
}

/// What a container holds once opened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseContents {
    pub private_key: PrivateKey,
    pub certificates: Vec<Certificate>,
}

fn derive_key(password: &[u8], salt: &[u8], iterations: u32) -> Zeroizing<[u8; 32]> {
    let mut key = Zeroizing::new([0u8; 32]);
    pbkdf2::pbkdf2_hmac::<Sha256>(password, salt, iterations, key.as_mut());
    key
}

impl PseContainer {
    pub fn build(
        private_key: &PrivateKey,
        certificates: &[Certificate],
        password: &[u8],
    ) -> Result<Self, CryptoError> {
        Self::build_with_iterations(private_key, certificates, password, MIN_ITERATIONS)
    }

    pub fn build_with_iterations(
        private_key: &PrivateKey,
        certificates: &[Certificate],
        password: &[u8],
        iterations: u32,
    ) -> Result<Self, CryptoError> {
        if password.is_empty() {
            return Err(CryptoError::Empty("PSE password"));
        }
        if !(MIN_ITERATIONS..=MAX_ITERATIONS).contains(&iterations) {
            return Err(CryptoError::malformed(
                "PSE container",
                "iteration count out of range",
            ));
        }
        let plaintext = Zeroizing::new(to_canonical_vec(&json!({
            "certificates": certificates.iter().map(|c| b64_encode(&c.to_bytes())).collect::<Vec<_>>(),
            "privateKey": private_key.to_json(),
        })));

        let mut rng = rand::thread_rng();
        let mut kdf_salt = [0u8; SALT_LEN];
        rng.fill_bytes(&mut kdf_salt);
        let mut nonce = [0u8; NONCE_LEN];
        rng.fill_bytes(&mut nonce);

        let key = derive_key(password, &kdf_salt, iterations);
        let ciphertext = Aes256Gcm::new(Key::<Aes256Gcm>::from_slice(key.as_ref()))
            .encrypt(Nonce::from_slice(&nonce), plaintext.as_slice())
            .map_err(|_| CryptoError::Rsa("AES-GCM encryption failed".into()))?;
        Ok(Self {
            version: VERSION,
            kdf_salt,
            kdf_iterations: iterations,
            nonce,
            ciphertext,
        })
    }

    /// Opens the container. A wrong password and a tampered ciphertext are
    /// indistinguishable and both yield [`CryptoError::WrongPassword`].
    pub fn open(&self, password: &[u8]) -> Result<PseContents, CryptoError> {
        const WHAT: &str = "PSE contents";
        let key = derive_key(password, &self.kdf_salt, self.kdf_iterations);
        let plaintext = Zeroizing::new(
            Aes256Gcm::new(Key::<Aes256Gcm>::from_slice(key.as_ref()))
                .decrypt(Nonce::from_slice(&self.nonce), self.ciphertext.as_slice())
                .map_err(|_| CryptoError::WrongPassword)?,
        );
        let value = parse_canonical(WHAT, &plaintext)?;
        let m = |e| CryptoError::malformed(WHAT, e);
        let f = Fields::new(&value, &["certificates", "privateKey"]).map_err(m)?;
        let private_key = PrivateKey::from_json(f.value("privateKey").map_err(m)?)?;
        let mut certificates = Vec::new();
        for c in f.array("certificates").map_err(m)? {
            let bytes = c
                .as_str()
                .and_then(|s| b64_decode(s).ok())
                .ok_or_else(|| CryptoError::malformed(WHAT, "certificate entry is not base64"))?;
            certificates.push(Certificate::from_bytes(&bytes)?);
        }
        Ok(PseContents {
            private_key,
            certificates,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ciphertext": b64_encode(&self.ciphertext),
            "kdfIterations": self.kdf_iterations,
            "kdfSalt": b64_encode(&self.kdf_salt),
            "nonce": b64_encode(&self.nonce),
            "version": self.version,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, CryptoError> {
        const WHAT: &str = "PSE container";
        let m = |e| CryptoError::malformed(WHAT, e);
        let f = Fields::new(
            v,
            &["ciphertext", "kdfIterations", "kdfSalt", "nonce", "version"],
        )
        .map_err(m)?;
        let version = f.u64("version").map_err(m)?;
        if version != VERSION {
            return Err(CryptoError::malformed(
                WHAT,
                format!("unsupported version {version}"),
            ));
        }
        let iterations = u32::try_from(f.u64("kdfIterations").map_err(m)?)
            .ok()
            .filter(|i| (MIN_ITERATIONS..=MAX_ITERATIONS).contains(i))
            .ok_or_else(|| CryptoError::malformed(WHAT, "iteration count out of range"))?;
        let ciphertext = f.bytes("ciphertext").map_err(m)?;
        if ciphertext.len() <= TAG_LEN {
            return Err(CryptoError::malformed(WHAT, "ciphertext shorter than tag"));
        }
        Ok(Self {
            version,
            kdf_salt: f
                .bytes("kdfSalt")
                .map_err(m)?
                .try_into()
                .map_err(|_| CryptoError::malformed(WHAT, "salt must be 16 octets"))?,
            kdf_iterations: iterations,
            nonce: f
                .bytes("nonce")
                .map_err(m)?
                .try_into()
                .map_err(|_| CryptoError::malformed(WHAT, "nonce must be 12 octets"))?,
            ciphertext,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        to_canonical_vec(&self.to_json())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        Self::from_json(&parse_canonical("PSE container", bytes)?)
    }
}

/// Parses and opens serialized container bytes in one step.
pub fn open_pse_bytes(bytes: &[u8], password: &[u8]) -> Result<PseContents, CryptoError> {
    PseContainer::from_bytes(bytes)?.open(password)
}
