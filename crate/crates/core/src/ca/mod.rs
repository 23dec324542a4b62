//! Certification authority workflow.
//!
//! The CA acts on the directory only through an administrator-bound
//! [`DirectorySession`]. After provisioning it receives nothing from the
//! end entity: activation is detected by polling the entry
//! ([`CertificationAuthority::verify_activation`]).

pub mod acl;
pub mod store;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::RngCore;
use zeroize::Zeroizing;

use crate::clock::Clock;
use crate::crypto::{
    hybrid_encrypt, Certificate, CryptoError, KeyPair, PrivateKey, PseContainer, PublicKey,
};
use crate::directory::schema::{
    PKI_USER_MANAGEMENT, USER_CERTIFICATE, USER_ENCRYPTED_CERTIFICATE, USER_ENCRYPTED_PASSWORD,
    USER_PASSWORD, USER_PKCS12,
};
use crate::directory::{
    hash_password, AttributeValue, DirectoryEntry, DirectorySession, DistinguishedName, ResultCode,
    SessionError,
};
use crate::encoding::b64_encode;

pub use acl::{configure_acls, standard_acl};
pub use store::AuditLog;
use store::{LoadedState, Meta};

/// Three days.
pub const DEFAULT_ACTIVATION_DEADLINE: u64 = 259_200;
pub const DEFAULT_VALIDITY_SECONDS: u64 = 365 * 24 * 3600;
/// Random octets behind a generated bind password.
pub const PASSWORD_OCTETS: usize = 32;

/// How the bind password of a proof-of-possession entry is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PopVariant {
    /// The whole password is encrypted to the subject key.
    FullEncrypted,
    /// Half is given at registration, half is encrypted to the subject key;
    /// the bind password is the registration half followed by the decrypted half.
    HalfHalf,
    /// The registration secret is the whole password; only the certificate
    /// is encrypted.
    SharedSecretOnly,
}

impl PopVariant {
    pub const ALL: [PopVariant; 3] = [
        PopVariant::FullEncrypted,
        PopVariant::HalfHalf,
        PopVariant::SharedSecretOnly,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PopVariant::FullEncrypted => "full",
            PopVariant::HalfHalf => "half",
            PopVariant::SharedSecretOnly => "secret",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.as_str() == s)
    }

    pub fn uses_shared_secret(self) -> bool {
        self != PopVariant::FullEncrypted
    }
}

impl fmt::Display for PopVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyConfig {
    pub activation_deadline_seconds: u64,
    pub delete_password_after_activation: bool,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            activation_deadline_seconds: DEFAULT_ACTIVATION_DEADLINE,
            delete_password_after_activation: false,
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct RegistrationRecord {
    pub subject: DistinguishedName,
    /// Present for proof-of-possession registrations, absent for PSE ones.
    pub subject_public_key: Option<PublicKey>,
    pub variant: PopVariant,
    pub shared_secret: Option<Vec<u8>>,
    pub created_at: u64,
}

impl fmt::Debug for RegistrationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegistrationRecord")
            .field("subject", &self.subject.to_string())
            .field("subject_public_key", &self.subject_public_key)
            .field("variant", &self.variant)
            .field(
                "shared_secret",
                &self.shared_secret.as_ref().map(|_| "<redacted>"),
            )
            .field("created_at", &self.created_at)
            .finish()
    }
}

impl RegistrationRecord {
    pub fn validate(&self) -> Result<(), CaError> {
        match (
            self.variant.uses_shared_secret(),
            self.shared_secret.is_some(),
        ) {
            (true, false) => Err(CaError::InvalidRegistration(format!(
                "variant `{}` requires a shared secret",
                self.variant
            ))),
            (false, true) => Err(CaError::InvalidRegistration(
                "variant `full` must not carry a shared secret".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Pop(PopVariant),
    Pse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordStatus {
    Pending,
    Activated,
    Deleted,
}

impl RecordStatus {
    fn as_str(self) -> &'static str {
        match self {
            RecordStatus::Pending => "pending",
            RecordStatus::Activated => "activated",
            RecordStatus::Deleted => "deleted",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            RecordStatus::Pending,
            RecordStatus::Activated,
            RecordStatus::Deleted,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

/// What the CA remembers about an issued certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssuedRecord {
    pub dn: DistinguishedName,
    pub kind: RecordKind,
    pub serial: u64,
    pub subject_public_key: PublicKey,
    /// Canonical certificate bytes.
    pub certificate: Vec<u8>,
    pub provisioned_at: u64,
    /// Activation deadline, for proof-of-possession entries.
    pub deadline: Option<u64>,
    pub status: RecordStatus,
    pub password_removed: bool,
}

/// A directory change made by [`CertificationAuthority::enforce_policy`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyAction {
    Deleted(DistinguishedName),
    PasswordRemoved(DistinguishedName),
}

impl fmt::Display for PolicyAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyAction::Deleted(dn) => write!(f, "DELETED {dn}"),
            PolicyAction::PasswordRemoved(dn) => write!(f, "PASSWORD_REMOVED {dn}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CaError {
    #[error(transparent)]
    Directory(#[from] SessionError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("`{0}` is not registered")]
    NotRegistered(DistinguishedName),
    #[error("`{0}` is already registered")]
    AlreadyRegistered(DistinguishedName),
    #[error("invalid registration: {0}")]
    InvalidRegistration(String),
    #[error("no certificate was issued for `{0}`")]
    NotIssued(DistinguishedName),
    #[error("CA state: {0}")]
    State(String),
    #[error("CA state I/O: {0}")]
    Io(#[from] std::io::Error),
}

impl CaError {
    /// The LDAP result code behind this error, if the directory produced one.
    pub fn result_code(&self) -> Option<ResultCode> {
        match self {
            CaError::Directory(e) => e.code(),
            _ => None,
        }
    }
}

/// Returned by registration: the record plus any secret the registrant
/// must receive out of band.
#[derive(Debug, Clone)]
pub struct Registration {
    pub record: RegistrationRecord,
    pub shared_secret: Option<String>,
}

fn random_password(octets: usize) -> Zeroizing<String> {
    let mut raw = Zeroizing::new(vec![0u8; octets]);
    rand::thread_rng().fill_bytes(&mut raw);
    Zeroizing::new(b64_encode(&raw))
}

pub struct CertificationAuthority {
    meta: Meta,
    key: PrivateKey,
    certificate: Certificate,
    registrations: BTreeMap<DistinguishedName, RegistrationRecord>,
    issued: BTreeMap<DistinguishedName, IssuedRecord>,
    audit: AuditLog,
    clock: Arc<dyn Clock>,
    dir: Option<PathBuf>,
}

impl fmt::Debug for CertificationAuthority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CertificationAuthority")
            .field("name", &self.meta.name.to_string())
            .field("registrations", &self.registrations.len())
            .field("issued", &self.issued.len())
            .field("dir", &self.dir)
            .finish_non_exhaustive()
    }
}

impl CertificationAuthority {
    /// Creates an in-memory CA with a fresh signing key and a self-signed
    /// certificate.
    pub fn create(
        name: DistinguishedName,
        policy: PolicyConfig,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, CaError> {
        let key = KeyPair::generate()?;
        Self::with_key(name, key.private, policy, clock)
    }

    pub fn with_key(
        name: DistinguishedName,
        key: PrivateKey,
        policy: PolicyConfig,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, CaError> {
        if policy.activation_deadline_seconds == 0 {
            return Err(CaError::State(
                "activation deadline must be positive".into(),
            ));
        }
        let now = clock.now();
        let certificate = Certificate::issue(
            &key,
            &name,
            1,
            &name,
            &key.public_key(),
            now,
            10 * DEFAULT_VALIDITY_SECONDS,
        )?;
        Ok(Self {
            meta: Meta {
                name,
                next_serial: 2,
                inbound_messages: 0,
                policy,
                validity_seconds: DEFAULT_VALIDITY_SECONDS,
            },
            key,
            certificate,
            registrations: BTreeMap::new(),
            issued: BTreeMap::new(),
            audit: AuditLog::in_memory(),
            clock,
            dir: None,
        })
    }

    /// Creates a CA persisted under `dir`: signing key, CA certificate,
    /// state file and audit log.
    pub fn init(
        dir: &Path,
        name: DistinguishedName,
        policy: PolicyConfig,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, CaError> {
        std::fs::create_dir_all(dir)?;
        if dir.join(store::STATE_FILE).exists() {
            return Err(CaError::State(format!(
                "{} already holds a CA",
                dir.display()
            )));
        }
        let mut ca = Self::create(name, policy, clock)?;
        crate::files::write_private(&dir.join(store::KEY_FILE), &ca.key.to_bytes())?;
        std::fs::write(dir.join(store::CERT_FILE), ca.certificate.to_bytes())?;
        ca.audit = AuditLog::at(dir.join(store::AUDIT_FILE));
        ca.dir = Some(dir.to_path_buf());
        ca.save()?;
        let now = ca.clock.now();
        let detail = format!(
            "name={} certificate={}",
            ca.meta.name,
            ca.certificate.fingerprint()
        );
        ca.audit.record(now, "CA_INITIALIZED", &detail)?;
        Ok(ca)
    }

    pub fn open(dir: &Path, clock: Arc<dyn Clock>) -> Result<Self, CaError> {
        let key = PrivateKey::from_bytes(&std::fs::read(dir.join(store::KEY_FILE))?)?;
        let certificate = Certificate::from_bytes(&std::fs::read(dir.join(store::CERT_FILE))?)?;
        let file = std::fs::File::open(dir.join(store::STATE_FILE))?;
        let LoadedState {
            meta,
            registrations,
            issued,
        } = store::read_state(std::io::BufReader::new(file))?;
        if certificate.subject_public_key != key.public_key() {
            return Err(CaError::State(
                "CA certificate does not match the CA key".into(),
            ));
        }
        Ok(Self {
            meta,
            key,
            certificate,
            registrations: registrations
                .into_iter()
                .map(|r| (r.subject.clone(), r))
                .collect(),
            issued: issued.into_iter().map(|r| (r.dn.clone(), r)).collect(),
            audit: AuditLog::at(dir.join(store::AUDIT_FILE)),
            clock,
            dir: Some(dir.to_path_buf()),
        })
    }

    fn save(&self) -> Result<(), CaError> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        store::write_state(
            &dir.join(store::STATE_FILE),
            &self.meta,
            &self.registrations.values().collect::<Vec<_>>(),
            &self.issued.values().collect::<Vec<_>>(),
        )
    }

    pub fn name(&self) -> &DistinguishedName {
        &self.meta.name
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn public_key(&self) -> PublicKey {
        self.key.public_key()
    }

    pub fn policy(&self) -> PolicyConfig {
        self.meta.policy
    }

    pub fn set_policy(&mut self, policy: PolicyConfig) -> Result<(), CaError> {
        if policy.activation_deadline_seconds == 0 {
            return Err(CaError::State(
                "activation deadline must be positive".into(),
            ));
        }
        self.meta.policy = policy;
        self.save()
    }

    pub fn set_validity(&mut self, seconds: u64) -> Result<(), CaError> {
        if seconds == 0 {
            return Err(CryptoError::InvalidValidity.into());
        }
        self.meta.validity_seconds = seconds;
        self.save()
    }

    /// Number of protocol messages the CA has received from end entities.
    /// Only registration requests count; nothing else reaches the CA.
    pub fn inbound_messages(&self) -> u64 {
        self.meta.inbound_messages
    }

    pub fn audit(&self) -> &AuditLog {
        &self.audit
    }

    pub fn registration(&self, subject: &DistinguishedName) -> Option<&RegistrationRecord> {
        self.registrations.get(subject)
    }

    pub fn issued(&self, dn: &DistinguishedName) -> Option<&IssuedRecord> {
        self.issued.get(dn)
    }

    pub fn issued_records(&self) -> impl Iterator<Item = &IssuedRecord> {
        self.issued.values()
    }

    fn next_serial(&mut self) -> u64 {
        let s = self.meta.next_serial;
        self.meta.next_serial += 1;
        s
    }

    /// Accepts a proof-of-possession registration for `subject`'s encryption
    /// key. For the half/secret variants a fresh shared secret is generated
    /// and returned for out-of-band delivery.
    pub fn register(
        &mut self,
        subject: DistinguishedName,
        public_key: PublicKey,
        variant: PopVariant,
    ) -> Result<Registration, CaError> {
        self.meta.inbound_messages += 1;
        if self.registrations.contains_key(&subject) {
            return Err(CaError::AlreadyRegistered(subject));
        }
        let secret = match variant {
            PopVariant::FullEncrypted => None,
            // Each half carries half of the password entropy.
            PopVariant::HalfHalf => Some(random_password(PASSWORD_OCTETS / 2)),
            PopVariant::SharedSecretOnly => Some(random_password(PASSWORD_OCTETS)),
        };
        let record = RegistrationRecord {
            subject: subject.clone(),
            subject_public_key: Some(public_key),
            variant,
            shared_secret: secret.as_ref().map(|s| s.as_bytes().to_vec()),
            created_at: self.clock.now(),
        };
        record.validate()?;
        self.registrations.insert(subject.clone(), record.clone());
        self.save()?;
        self.audit.record(
            self.clock.now(),
            "REGISTERED",
            &format!("dn={subject} variant={variant}"),
        )?;
        Ok(Registration {
            record,
            shared_secret: secret.map(|s| s.to_string()),
        })
    }

    /// Issues the certificate for a registered key and creates the entry
    /// from which the key holder activates it.
    ///
    /// The entry carries `userPassword` (hash) and
    /// `userEncryptedCertificate`, plus `userEncryptedPassword` unless the
    /// variant is shared-secret-only. `userCertificate` stays unset until
    /// activation.
    pub fn provision_pop_entry(
        &mut self,
        session: &mut dyn DirectorySession,
        subject: &DistinguishedName,
    ) -> Result<(DistinguishedName, Certificate), CaError> {
        let reg = self
            .registrations
            .get(subject)
            .cloned()
            .ok_or_else(|| CaError::NotRegistered(subject.clone()))?;
        reg.validate()?;
        let subject_pk = reg
            .subject_public_key
            .clone()
            .ok_or_else(|| CaError::InvalidRegistration("registration has no public key".into()))?;
        if self
            .issued
            .get(subject)
            .is_some_and(|r| r.status != RecordStatus::Deleted)
        {
            return Err(CaError::InvalidRegistration(format!(
                "`{subject}` was already provisioned"
            )));
        }

        let now = self.clock.now();
        let serial = self.next_serial();
        let cert = Certificate::issue(
            &self.key,
            &self.meta.name,
            serial,
            subject,
            &subject_pk,
            now,
            self.meta.validity_seconds,
        )?;
        let cert_bytes = cert.to_bytes();

        let (bind_password, encrypted_part): (Zeroizing<Vec<u8>>, Option<Zeroizing<String>>) =
            match reg.variant {
                PopVariant::FullEncrypted => {
                    let p = random_password(PASSWORD_OCTETS);
                    (Zeroizing::new(p.as_bytes().to_vec()), Some(p))
                }
                PopVariant::HalfHalf => {
                    let p2 = random_password(PASSWORD_OCTETS / 2);
                    let mut combined =
                        Zeroizing::new(reg.shared_secret.clone().unwrap_or_default());
                    combined.extend_from_slice(p2.as_bytes());
                    (combined, Some(p2))
                }
                PopVariant::SharedSecretOnly => (
                    Zeroizing::new(reg.shared_secret.clone().unwrap_or_default()),
                    None,
                ),
            };

        let (naming_attr, naming_value) = subject.leaf();
        let mut entry = DirectoryEntry::new(subject.clone())
            .with_class("top")
            .with_class("person")
            .with_class(PKI_USER_MANAGEMENT)
            .with_value(naming_attr, AttributeValue::text(naming_value))
            .with_value(
                USER_PASSWORD,
                AttributeValue::text(
                    hash_password(&bind_password)
                        .map_err(|e| CaError::State(e.to_string()))?
                        .render(),
                ),
            )
            .with_value(
                USER_ENCRYPTED_CERTIFICATE,
                AttributeValue::binary(hybrid_encrypt(&subject_pk, &cert_bytes)?.to_bytes()),
            );
        if let Some(part) = &encrypted_part {
            entry.add_value(
                USER_ENCRYPTED_PASSWORD,
                AttributeValue::binary(hybrid_encrypt(&subject_pk, part.as_bytes())?.to_bytes()),
            );
        }
        session.add(&entry)?;

        let deadline = now + self.meta.policy.activation_deadline_seconds;
        self.issued.insert(
            subject.clone(),
            IssuedRecord {
                dn: subject.clone(),
                kind: RecordKind::Pop(reg.variant),
                serial,
                subject_public_key: subject_pk,
                certificate: cert_bytes,
                provisioned_at: now,
                deadline: Some(deadline),
                status: RecordStatus::Pending,
                password_removed: false,
            },
        );
        self.save()?;
        self.audit.record(
            now,
            "PROVISIONED_POP",
            &format!(
                "dn={subject} variant={} serial={serial} deadline={deadline}",
                reg.variant
            ),
        )?;
        Ok((subject.clone(), cert))
    }

    /// Generates a key pair for `subject`, seals it with its certificate
    /// under `pse_password` into `userPKCS12`, and sets `userPassword` from
    /// `registration_password`. The CA keeps no copy of the private key.
    pub fn provision_pse_entry(
        &mut self,
        session: &mut dyn DirectorySession,
        subject: &DistinguishedName,
        registration_password: &[u8],
        pse_password: &[u8],
    ) -> Result<DistinguishedName, CaError> {
        if registration_password.is_empty() || pse_password.is_empty() {
            return Err(CaError::InvalidRegistration(
                "passwords must not be empty".into(),
            ));
        }
        // The registration request for a CA-generated key.
        self.meta.inbound_messages += 1;
        let now = self.clock.now();
        let serial = self.next_serial();
        let (public_key, cert, container) = {
            let pair = KeyPair::generate()?;
            let cert = Certificate::issue(
                &self.key,
                &self.meta.name,
                serial,
                subject,
                &pair.public,
                now,
                self.meta.validity_seconds,
            )?;
            let container = PseContainer::build(
                &pair.private,
                &[cert.clone(), self.certificate.clone()],
                pse_password,
            )?;
            (pair.public.clone(), cert, container)
            // `pair` drops here; private key material is zeroized on drop.
        };
        let (naming_attr, naming_value) = subject.leaf();
        let entry = DirectoryEntry::new(subject.clone())
            .with_class("top")
            .with_class("person")
            .with_value(naming_attr, AttributeValue::text(naming_value))
            .with_value(
                USER_PASSWORD,
                AttributeValue::text(
                    hash_password(registration_password)
                        .map_err(|e| CaError::State(e.to_string()))?
                        .render(),
                ),
            )
            .with_value(USER_CERTIFICATE, AttributeValue::binary(cert.to_bytes()))
            .with_value(USER_PKCS12, AttributeValue::binary(container.to_bytes()));
        let added = session.add(&entry);
        self.audit.record(
            now,
            "KEY_DESTROYED",
            &format!("dn={subject} publicKey={}", public_key.fingerprint()),
        )?;
        added?;

        self.issued.insert(
            subject.clone(),
            IssuedRecord {
                dn: subject.clone(),
                kind: RecordKind::Pse,
                serial,
                subject_public_key: public_key,
                certificate: cert.to_bytes(),
                provisioned_at: now,
                deadline: None,
                status: RecordStatus::Activated,
                password_removed: false,
            },
        );
        self.save()?;
        self.audit.record(
            now,
            "PROVISIONED_PSE",
            &format!("dn={subject} serial={serial}"),
        )?;
        Ok(subject.clone())
    }

    /// True iff the entry's `userCertificate` is a certificate this CA
    /// signed, valid now, naming `dn` and carrying the public key the CA
    /// issued for `dn`.
    pub fn verify_activation(
        &mut self,
        session: &mut dyn DirectorySession,
        dn: &DistinguishedName,
    ) -> Result<bool, CaError> {
        let now = self.clock.now();
        self.check_activation(session, dn, now)
    }

    fn check_activation(
        &mut self,
        session: &mut dyn DirectorySession,
        dn: &DistinguishedName,
        now: u64,
    ) -> Result<bool, CaError> {
        let entry = session.search(dn)?;
        let Some(record) = self.issued.get(dn) else {
            return Ok(false);
        };
        let ca_pk = self.key.public_key();
        let activated = entry.values(USER_CERTIFICATE).iter().any(|value| {
            Certificate::from_bytes(value.as_bytes()).is_ok_and(|cert| {
                cert.verify(&ca_pk, now)
                    && cert.subject == *dn
                    && cert.subject_public_key == record.subject_public_key
            })
        });
        if activated && record.status == RecordStatus::Pending {
            let record = self.issued.get_mut(dn).expect("checked above");
            record.status = RecordStatus::Activated;
            self.save()?;
            self.audit.record(now, "ACTIVATED", &format!("dn={dn}"))?;
        }
        Ok(activated)
    }

    /// Applies the activation deadline and, if configured, removes the bind
    /// password of activated entries. Idempotent.
    pub fn enforce_policy(
        &mut self,
        session: &mut dyn DirectorySession,
        now: u64,
    ) -> Result<Vec<PolicyAction>, CaError> {
        let mut actions = Vec::new();
        let pending: Vec<_> = self
            .issued
            .values()
            .filter(|r| matches!(r.kind, RecordKind::Pop(_)) && r.status == RecordStatus::Pending)
            .map(|r| (r.dn.clone(), r.deadline.unwrap_or(u64::MAX)))
            .collect();
        for (dn, deadline) in pending {
            let activated = match self.check_activation(session, &dn, now) {
                Ok(a) => a,
                Err(CaError::Directory(e)) if e.code() == Some(ResultCode::NoSuchObject) => false,
                Err(e) => return Err(e),
            };
            if activated || now <= deadline {
                continue;
            }
            match session.delete(&dn) {
                Ok(()) => {}
                Err(e) if e.code() == Some(ResultCode::NoSuchObject) => {}
                Err(e) => return Err(e.into()),
            }
            self.issued.get_mut(&dn).expect("listed above").status = RecordStatus::Deleted;
            self.audit
                .record(now, "DELETED", &format!("dn={dn} deadline={deadline}"))?;
            actions.push(PolicyAction::Deleted(dn));
        }

        if self.meta.policy.delete_password_after_activation {
            let activated: Vec<_> = self
                .issued
                .values()
                .filter(|r| {
                    matches!(r.kind, RecordKind::Pop(_))
                        && r.status == RecordStatus::Activated
                        && !r.password_removed
                })
                .map(|r| r.dn.clone())
                .collect();
            for dn in activated {
                match session.modify(&dn, USER_PASSWORD, None) {
                    Ok(()) => {}
                    Err(e) if e.code() == Some(ResultCode::NoSuchObject) => {}
                    Err(e) => return Err(e.into()),
                }
                self.issued
                    .get_mut(&dn)
                    .expect("listed above")
                    .password_removed = true;
                self.audit
                    .record(now, "PASSWORD_REMOVED", &format!("dn={dn}"))?;
                actions.push(PolicyAction::PasswordRemoved(dn));
            }
        }
        self.save()?;
        Ok(actions)
    }
}
