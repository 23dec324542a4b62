//! End-entity side of both flows.
//!
//! Activation decrypts the certificate (and password, per variant) before
//! opening an authenticated session, so a party without the private key
//! never produces a bind attempt. The private key itself never leaves this
//! process.

use std::fmt;

use zeroize::Zeroizing;

use crate::ca::PopVariant;
use crate::crypto::hybrid::open_envelope;
use crate::crypto::{Certificate, CryptoError, PrivateKey, PseContainer, PseContents, PublicKey};
use crate::directory::schema::{
    USER_CERTIFICATE, USER_ENCRYPTED_CERTIFICATE, USER_ENCRYPTED_PASSWORD, USER_PKCS12,
};
use crate::directory::{
    AttributeValue, DirectoryError, DirectorySession, DistinguishedName, ResultCode, SessionError,
};

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    /// The envelope could not be opened with the supplied private key.
    #[error("decryption failed: the private key does not match")]
    DecryptFailed,
    #[error(transparent)]
    Directory(DirectoryError),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("entry has no readable `{0}`")]
    MissingAttribute(&'static str),
    #[error("wrong PSE password")]
    WrongPassword,
    #[error("decrypted certificate is not valid: {0}")]
    InvalidCertificate(String),
    #[error("invalid activation input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Crypto(CryptoError),
}

impl AgentError {
    pub fn result_code(&self) -> Option<ResultCode> {
        match self {
            AgentError::Directory(e) => Some(e.code),
            _ => None,
        }
    }

    fn confidentiality_required() -> Self {
        AgentError::Directory(DirectoryError::new(
            ResultCode::ConfidentialityRequired,
            "refusing to send a password over an insecure channel",
        ))
    }
}

impl From<SessionError> for AgentError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Directory(d) => AgentError::Directory(d),
            SessionError::Transport(t) => AgentError::Transport(t),
        }
    }
}

/// What the key holder brings to activation.
pub struct ActivationInput {
    pub dn: DistinguishedName,
    pub private_key: PrivateKey,
    pub variant: PopVariant,
    shared_secret: Option<Zeroizing<Vec<u8>>>,
    /// When set, the decrypted certificate must verify under this key.
    pub ca_public_key: Option<PublicKey>,
}

impl fmt::Debug for ActivationInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ActivationInput")
            .field("dn", &self.dn.to_string())
            .field("variant", &self.variant)
            .finish_non_exhaustive()
    }
}

impl ActivationInput {
    /// A shared secret must be given exactly when the variant uses one.
    pub fn new(
        dn: DistinguishedName,
        private_key: PrivateKey,
        variant: PopVariant,
        shared_secret: Option<Vec<u8>>,
    ) -> Result<Self, AgentError> {
        if variant.uses_shared_secret() != shared_secret.is_some() {
            return Err(AgentError::InvalidInput(format!(
                "variant `{variant}` {} a shared secret",
                if variant.uses_shared_secret() {
                    "requires"
                } else {
                    "does not take"
                }
            )));
        }
        Ok(Self {
            dn,
            private_key,
            variant,
            shared_secret: shared_secret.map(Zeroizing::new),
            ca_public_key: None,
        })
    }

    pub fn with_ca_key(mut self, ca: PublicKey) -> Self {
        self.ca_public_key = Some(ca);
        self
    }
}

fn decrypt_attribute(
    entry: &crate::directory::DirectoryEntry,
    name: &'static str,
    key: &PrivateKey,
) -> Result<Zeroizing<Vec<u8>>, AgentError> {
    let value = entry
        .first(name)
        .ok_or(AgentError::MissingAttribute(name))?;
    open_envelope(key, value.as_bytes())
        .map(Zeroizing::new)
        .map_err(|_| AgentError::DecryptFailed)
}

/// Completes proof of possession: fetch both ciphertexts anonymously,
/// decrypt them, bind with the recovered password and write the plain
/// certificate into the entry's own `userCertificate`.
///
/// Every failure happens before the single write, so on error the entry is
/// unchanged.
pub fn complete_pop(
    session: &mut dyn DirectorySession,
    input: &ActivationInput,
) -> Result<Certificate, AgentError> {
    let entry = session.search(&input.dn)?;

    let cert_bytes = decrypt_attribute(&entry, USER_ENCRYPTED_CERTIFICATE, &input.private_key)?;
    let password: Zeroizing<Vec<u8>> = match input.variant {
        PopVariant::FullEncrypted => {
            decrypt_attribute(&entry, USER_ENCRYPTED_PASSWORD, &input.private_key)?
        }
        PopVariant::HalfHalf => {
            let second = decrypt_attribute(&entry, USER_ENCRYPTED_PASSWORD, &input.private_key)?;
            let mut combined =
                Zeroizing::new(input.shared_secret.as_deref().cloned().unwrap_or_default());
            combined.extend_from_slice(&second);
            combined
        }
        PopVariant::SharedSecretOnly => {
            Zeroizing::new(input.shared_secret.as_deref().cloned().unwrap_or_default())
        }
    };

    let cert = Certificate::from_bytes(&cert_bytes)
        .map_err(|e| AgentError::InvalidCertificate(e.to_string()))?;
    if cert.subject_public_key != input.private_key.public_key() {
        return Err(AgentError::InvalidCertificate(
            "certificate is for a different key".into(),
        ));
    }
    if cert.subject != input.dn {
        return Err(AgentError::InvalidCertificate(
            "certificate names a different subject".into(),
        ));
    }
    if let Some(ca) = &input.ca_public_key {
        if !cert.verify_signature(ca) {
            return Err(AgentError::InvalidCertificate(
                "signature does not verify under the CA key".into(),
            ));
        }
    }

    if !session.channel_secure() {
        return Err(AgentError::confidentiality_required());
    }
    session.bind(Some(&input.dn), &password)?;
    drop(password);
    session.modify(
        &input.dn,
        USER_CERTIFICATE,
        Some(AttributeValue::binary(cert_bytes.to_vec())),
    )?;
    let _ = session.unbind();
    Ok(cert)
}

/// A downloaded PSE: the opened contents plus the sealed container bytes
/// exactly as stored in the directory.
#[derive(Debug, Clone)]
pub struct DownloadedPse {
    pub contents: PseContents,
    pub container: Vec<u8>,
}

/// Authenticates as `dn`, reads its own `userPKCS12` and opens it.
pub fn download_pse(
    session: &mut dyn DirectorySession,
    dn: &DistinguishedName,
    registration_password: &[u8],
    pse_password: &[u8],
) -> Result<DownloadedPse, AgentError> {
    if !session.channel_secure() {
        return Err(AgentError::confidentiality_required());
    }
    session.bind(Some(dn), registration_password)?;
    let entry = session.search(dn)?;
    let _ = session.unbind();
    let container = entry
        .first(USER_PKCS12)
        .ok_or(AgentError::MissingAttribute(USER_PKCS12))?
        .as_bytes()
        .to_vec();
    let contents = PseContainer::from_bytes(&container)
        .and_then(|c| c.open(pse_password))
        .map_err(|e| match e {
            CryptoError::WrongPassword => AgentError::WrongPassword,
            other => AgentError::Crypto(other),
        })?;
    Ok(DownloadedPse {
        contents,
        container,
    })
}
