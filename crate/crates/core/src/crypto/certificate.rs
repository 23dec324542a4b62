//! Simplified certificate binding a subject name to an RSA public key.
//!
//! The signature is RSA-PSS(SHA-256) over the canonical JSON encoding of
//! every other field:
//!
//! ```text
//! {"issuer":..,"notAfter":..,"notBefore":..,"serial":..,"subject":..,"subjectPublicKey":{"e":..,"n":..}}
//! ```
//!
//! The full certificate adds a `"signature"` key (base64) to that object.

use rsa::pss::{BlindedSigningKey, Signature, VerifyingKey};
use rsa::signature::{RandomizedSigner, SignatureEncoding, Verifier};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::keys::{PrivateKey, PublicKey};
use super::{parse_canonical, CryptoError};
use crate::directory::DistinguishedName;
use crate::encoding::{b64_encode, to_canonical_vec, Fields};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub serial: u64,
    pub subject: DistinguishedName,
    pub subject_public_key: PublicKey,
    pub not_before: u64,
    pub not_after: u64,
    pub issuer: DistinguishedName,
    pub signature: Vec<u8>,
}

impl Certificate {
    /// Issues a certificate valid from `not_before` for `validity_seconds`.
    pub fn issue(
        issuer_key: &PrivateKey,
        issuer: &DistinguishedName,
        serial: u64,
        subject: &DistinguishedName,
        subject_public_key: &PublicKey,
        not_before: u64,
        validity_seconds: u64,
    ) -> Result<Self, CryptoError> {
        if validity_seconds == 0 {
            return Err(CryptoError::InvalidValidity);
        }
        let not_after = not_before
            .checked_add(validity_seconds)
            .ok_or(CryptoError::InvalidValidity)?;
        let mut cert = Self {
            serial,
            subject: subject.clone(),
            subject_public_key: subject_public_key.clone(),
            not_before,
            not_after,
            issuer: issuer.clone(),
            signature: Vec::new(),
        };
        let signer = BlindedSigningKey::<Sha256>::new(issuer_key.inner().clone());
        cert.signature = signer
            .sign_with_rng(&mut rand::thread_rng(), &cert.tbs_bytes())
            .to_vec();
        Ok(cert)
    }

    fn tbs_json(&self) -> Value {
        json!({
            "issuer": self.issuer.to_string(),
            "notAfter": self.not_after,
            "notBefore": self.not_before,
            "serial": self.serial,
            "subject": self.subject.to_string(),
            "subjectPublicKey": self.subject_public_key.to_json(),
        })
    }

    /// The signed portion in canonical form.
    pub fn tbs_bytes(&self) -> Vec<u8> {
        to_canonical_vec(&self.tbs_json())
    }

    pub fn verify_signature(&self, issuer_key: &PublicKey) -> bool {
        let Ok(signature) = Signature::try_from(self.signature.as_slice()) else {
            return false;
        };
        VerifyingKey::<Sha256>::new(issuer_key.inner().clone())
            .verify(&self.tbs_bytes(), &signature)
            .is_ok()
    }

    /// Signature check plus `not_before <= now <= not_after`.
    pub fn verify(&self, issuer_key: &PublicKey, now: u64) -> bool {
        self.not_before <= now && now <= self.not_after && self.verify_signature(issuer_key)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.tbs_json();
        v["signature"] = Value::String(b64_encode(&self.signature));
        v
    }

    pub fn from_json(v: &Value) -> Result<Self, CryptoError> {
        const WHAT: &str = "certificate";
        let m = |e| CryptoError::malformed(WHAT, e);
        let f = Fields::new(
            v,
            &[
                "issuer",
                "notAfter",
                "notBefore",
                "serial",
                "signature",
                "subject",
                "subjectPublicKey",
            ],
        )
        .map_err(m)?;
        let dn = |key| -> Result<DistinguishedName, CryptoError> {
            DistinguishedName::parse(f.str(key).map_err(m)?)
                .map_err(|e| CryptoError::malformed(WHAT, e))
        };
        Ok(Self {
            serial: f.u64("serial").map_err(m)?,
            subject: dn("subject")?,
            subject_public_key: PublicKey::from_json(f.value("subjectPublicKey").map_err(m)?)?,
            not_before: f.u64("notBefore").map_err(m)?,
            not_after: f.u64("notAfter").map_err(m)?,
            issuer: dn("issuer")?,
            signature: f.bytes("signature").map_err(m)?,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        to_canonical_vec(&self.to_json())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        Self::from_json(&parse_canonical("certificate", bytes)?)
    }

    /// Hex SHA-256 of the full encoding.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_bytes()))
    }
}
