#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use dirpki_core::ca::{configure_acls, CertificationAuthority, PolicyConfig};
use dirpki_core::clock::ManualClock;
use dirpki_core::crypto::KeyPair;
use dirpki_core::directory::{
    hash_password, Access, AdminIdentity, AttributeValue, BindState, Directory, DirectoryEntry,
    DistinguishedName, LocalSession,
};
use dirpki_core::wire::{
    spawn_listener, ClientSecurity, ConnectOptions, Connection, ListenerSecurity, ServerHandle,
};

pub const BASE: &str = "ou=people,dc=example,dc=com";
pub const ADMIN_DN: &str = "cn=admin,dc=example,dc=com";
pub const ADMIN_PW: &[u8] = b"admin-secret";
pub const CA_NAME: &str = "cn=Example CA,dc=example,dc=com";
pub const T0: u64 = 1_700_000_000;

pub fn dn(s: &str) -> DistinguishedName {
    s.parse().unwrap()
}

pub fn user(name: &str) -> DistinguishedName {
    dn(&format!("cn={name},{BASE}"))
}

/// Key pairs generated once per test binary, in parallel.
pub fn keys() -> &'static [KeyPair] {
    static KEYS: OnceLock<Vec<KeyPair>> = OnceLock::new();
    KEYS.get_or_init(|| {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..6)
                .map(|_| s.spawn(|| KeyPair::generate().unwrap()))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    })
}

pub fn ca_key() -> &'static KeyPair {
    &keys()[0]
}

/// A directory with the CA's rule set installed.
pub fn directory() -> Arc<Directory> {
    let dir = Directory::new(AdminIdentity {
        dn: dn(ADMIN_DN),
        password: hash_password(ADMIN_PW).unwrap(),
    })
    .into_shared();
    let admin = dir
        .simple_bind(Some(&dn(ADMIN_DN)), ADMIN_PW, true)
        .unwrap();
    configure_acls(&dir, &admin, &dn(BASE)).unwrap();
    dir
}

pub fn admin_state(dir: &Directory) -> BindState {
    dir.simple_bind(Some(&dn(ADMIN_DN)), ADMIN_PW, true)
        .unwrap()
}

pub fn admin_session(dir: &Arc<Directory>) -> LocalSession {
    use dirpki_core::DirectorySession;
    let mut s = LocalSession::new(Arc::clone(dir), true);
    s.bind(Some(&dn(ADMIN_DN)), ADMIN_PW).unwrap();
    s
}

pub fn ca_with_policy(clock: Arc<ManualClock>, policy: PolicyConfig) -> CertificationAuthority {
    CertificationAuthority::with_key(dn(CA_NAME), ca_key().private.clone(), policy, clock).unwrap()
}

/// An entry populated with every scheme attribute, for access checks.
pub fn full_entry(name: &str) -> DirectoryEntry {
    DirectoryEntry::new(user(name))
        .with_class("top")
        .with_class("person")
        .with_class("pkiUserManagement")
        .with_value("cn", AttributeValue::text(name))
        .with_value(
            "userPassword",
            AttributeValue::text(
                hash_password(format!("{name}-pw").as_bytes())
                    .unwrap()
                    .render(),
            ),
        )
        .with_value(
            "userCertificate",
            AttributeValue::binary(format!("{name}-cert").into_bytes()),
        )
        .with_value(
            "userEncryptedPassword",
            AttributeValue::binary(format!("{name}-encpw").into_bytes()),
        )
        .with_value(
            "userEncryptedCertificate",
            AttributeValue::binary(format!("{name}-enccert").into_bytes()),
        )
        .with_value(
            "userPKCS12",
            AttributeValue::binary(format!("{name}-p12").into_bytes()),
        )
}

pub fn spawn(dir: &Arc<Directory>, security: ListenerSecurity) -> ServerHandle {
    spawn_listener(Arc::clone(dir), "127.0.0.1:0", security).unwrap()
}

pub fn connect(server: &ServerHandle, security: ClientSecurity) -> Connection {
    Connection::connect(&ConnectOptions {
        address: server.local_addr().to_string(),
        security,
    })
    .unwrap()
}

pub const SCHEME: [&str; 5] = [
    "userPassword",
    "userCertificate",
    "userEncryptedPassword",
    "userEncryptedCertificate",
    "userPKCS12",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Who {
    Anonymous,
    SelfUser,
    Other,
    Admin,
}

pub const EVERYONE: [Who; 4] = [Who::Anonymous, Who::SelfUser, Who::Other, Who::Admin];

/// Independent statement of the intended policy, written from the
/// requirements rather than from the installed rule list.
pub fn oracle(who: Who, attr: &str, access: Access) -> bool {
    let public = matches!(
        attr,
        "userEncryptedPassword" | "userEncryptedCertificate" | "userCertificate"
    );
    match (who, access) {
        (Who::Admin, _) => true,
        (Who::SelfUser, Access::Read) => public || attr == "userPKCS12",
        (Who::SelfUser, Access::Write) => attr == "userCertificate",
        (Who::Anonymous | Who::Other, Access::Read) => public,
        (_, _) => false,
    }
}
