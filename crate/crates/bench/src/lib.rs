//! Fixtures shared by the benchmarks.

use dirpki_core::directory::{
    hash_password, AdminIdentity, AttributeValue, Directory, DirectoryEntry,
};
use dirpki_core::DistinguishedName;

pub const BASE: &str = "ou=people,dc=example,dc=com";
pub const ADMIN_DN: &str = "cn=admin,dc=example,dc=com";
pub const ADMIN_PW: &[u8] = b"admin-secret";

pub fn dn(s: &str) -> DistinguishedName {
    s.parse().expect("fixture DN")
}

pub fn user(name: &str) -> DistinguishedName {
    dn(&format!("cn={name},{BASE}"))
}

/// An entry carrying every scheme attribute with payloads of realistic size.
pub fn sample_entry(name: &str) -> DirectoryEntry {
    DirectoryEntry::new(user(name))
        .with_class("top")
        .with_class("person")
        .with_class("pkiUserManagement")
        .with_value("cn", AttributeValue::text(name))
        .with_value(
            "userPassword",
            AttributeValue::text(hash_password(name.as_bytes()).expect("non-empty").render()),
        )
        .with_value("userCertificate", AttributeValue::binary(vec![0x30; 900]))
        .with_value(
            "userEncryptedPassword",
            AttributeValue::binary(vec![0x41; 330]),
        )
        .with_value(
            "userEncryptedCertificate",
            AttributeValue::binary(vec![0x42; 1200]),
        )
        .with_value("userPKCS12", AttributeValue::binary(vec![0x43; 2400]))
}

/// A directory with the standard rules and `n` user entries.
pub fn populated_directory(n: usize) -> Directory {
    let admin = AdminIdentity {
        dn: dn(ADMIN_DN),
        password: hash_password(ADMIN_PW).expect("non-empty"),
    };
    let dir = Directory::new(admin).with_acl(dirpki_core::ca::standard_acl(&dn(BASE)));
    let state = dir
        .simple_bind(Some(&dn(ADMIN_DN)), ADMIN_PW, true)
        .expect("admin bind");
    for i in 0..n {
        dir.add_entry(sample_entry(&format!("user{i}")), &state)
            .expect("add");
    }
    dir
}
