use std::fmt;

use rsa::traits::{PrivateKeyParts, PublicKeyParts};
use rsa::{BigUint, RsaPrivateKey, RsaPublicKey};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use zeroize::Zeroizing;

use super::{parse_canonical, CryptoError};
use crate::encoding::{b64_decode, b64_encode, to_canonical_vec, Fields};

pub const KEY_BITS: usize = 2048;

/// RSA public key, serialized as `{"e":<b64>,"n":<b64>}` with big-endian
/// unsigned integers.
#[derive(Clone, PartialEq, Eq)]
pub struct PublicKey(RsaPublicKey);

/// RSA private key. Key material is zeroized when dropped.
#[derive(Clone, PartialEq, Eq)]
pub struct PrivateKey(RsaPrivateKey);

#[derive(Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub public: PublicKey,
    pub private: PrivateKey,
}

fn uint_json(n: &BigUint) -> Value {
    Value::String(b64_encode(&n.to_bytes_be()))
}

fn uint_from_value(
    v: &Value,
    key: &'static str,
    what: &'static str,
) -> Result<BigUint, CryptoError> {
    let bytes = v
        .as_str()
        .and_then(|s| b64_decode(s).ok())
        .ok_or_else(|| CryptoError::malformed(what, format!("`{key}` is not base64 text")))?;
    if bytes.is_empty() || bytes[0] == 0 {
        return Err(CryptoError::malformed(
            what,
            format!("`{key}` is not a minimal integer"),
        ));
    }
    Ok(BigUint::from_bytes_be(&bytes))
}

fn uint_field(
    f: &Fields<'_>,
    key: &'static str,
    what: &'static str,
) -> Result<BigUint, CryptoError> {
    let v = f.value(key).map_err(|e| CryptoError::malformed(what, e))?;
    uint_from_value(v, key, what)
}

impl PublicKey {
    pub fn inner(&self) -> &RsaPublicKey {
        &self.0
    }

    pub fn to_json(&self) -> Value {
        json!({"e": uint_json(self.0.e()), "n": uint_json(self.0.n())})
    }

    pub fn from_json(v: &Value) -> Result<Self, CryptoError> {
        const WHAT: &str = "public key";
        let f = Fields::new(v, &["e", "n"]).map_err(|e| CryptoError::malformed(WHAT, e))?;
        let n = uint_field(&f, "n", WHAT)?;
        let e = uint_field(&f, "e", WHAT)?;
        RsaPublicKey::new(n, e)
            .map(Self)
            .map_err(|e| CryptoError::malformed(WHAT, e))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        to_canonical_vec(&self.to_json())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        Self::from_json(&parse_canonical("public key", bytes)?)
    }

    /// Hex SHA-256 of the canonical encoding.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_bytes()))
    }

    pub fn bits(&self) -> usize {
        self.0.n().bits()
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({})", &self.fingerprint()[..16])
    }
}

impl PrivateKey {
    pub fn inner(&self) -> &RsaPrivateKey {
        &self.0
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey(self.0.to_public_key())
    }

    /// `{"d","e","n","primes":[..]}`, all big-endian base64.
    pub fn to_json(&self) -> Value {
        json!({
            "d": uint_json(self.0.d()),
            "e": uint_json(self.0.e()),
            "n": uint_json(self.0.n()),
            "primes": self.0.primes().iter().map(uint_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, CryptoError> {
        const WHAT: &str = "private key";
        let f = Fields::new(v, &["d", "e", "n", "primes"])
            .map_err(|e| CryptoError::malformed(WHAT, e))?;
        let n = uint_field(&f, "n", WHAT)?;
        let e = uint_field(&f, "e", WHAT)?;
        let d = uint_field(&f, "d", WHAT)?;
        let mut primes = Vec::new();
        for p in f
            .array("primes")
            .map_err(|e| CryptoError::malformed(WHAT, e))?
        {
            primes.push(uint_from_value(p, "primes", WHAT)?);
        }
        let mut key = RsaPrivateKey::from_components(n, e, d, primes)
            .map_err(|e| CryptoError::malformed(WHAT, e))?;
        key.validate()
            .map_err(|e| CryptoError::malformed(WHAT, e))?;
        key.precompute()
            .map_err(|e| CryptoError::malformed(WHAT, e))?;
        Ok(Self(key))
    }

    pub fn to_bytes(&self) -> Zeroizing<Vec<u8>> {
        Zeroizing::new(to_canonical_vec(&self.to_json()))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        Self::from_json(&parse_canonical("private key", bytes)?)
    }
}

impl fmt::Debug for PrivateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrivateKey(for {:?})", self.public_key())
    }
}

impl KeyPair {
    /// Generates a fresh RSA-2048 key pair.
    pub fn generate() -> Result<Self, CryptoError> {
        let private = RsaPrivateKey::new(&mut rand::thread_rng(), KEY_BITS)
            .map_err(|e| CryptoError::Rsa(e.to_string()))?;
        Ok(Self::from_private(PrivateKey(private)))
    }

    pub fn from_private(private: PrivateKey) -> Self {
        Self {
            public: private.public_key(),
            private,
        }
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}
