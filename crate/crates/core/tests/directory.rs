mod common;

use std::sync::Arc;

use common::*;
use dirpki_core::directory::{
    Access, AttributeValue, BindState, Directory, DirectoryEntry, DistinguishedName, ResultCode,
};

fn fixture() -> Arc<Directory> {
    let dir = directory();
    let admin = admin_state(&dir);
    for name in ["alice", "bob", "carol"] {
        dir.add_entry(full_entry(name), &admin).unwrap();
    }
    dir
}

fn state_for(dir: &Directory, who: Who) -> BindState {
    match who {
        Who::Anonymous => BindState::anonymous(true),
        Who::SelfUser => dir
            .simple_bind(Some(&user("alice")), b"alice-pw", true)
            .unwrap(),
        Who::Other => dir
            .simple_bind(Some(&user("bob")), b"bob-pw", true)
            .unwrap(),
        Who::Admin => admin_state(dir),
    }
}

fn observed(
    dir: &Directory,
    state: &BindState,
    target: &DistinguishedName,
    attr: &str,
    access: Access,
) -> bool {
    match access {
        Access::Read => dir.search_entry(target, state).unwrap().has(attr),
        Access::Write => {
            // Write back the stored value so the fixture never changes.
            let current = dir.raw_entry(target).unwrap().first(attr).cloned();
            match dir.modify_attribute(target, attr, current, state) {
                Ok(()) => true,
                Err(e) => {
                    assert_eq!(e.code, ResultCode::InsufficientAccessRights, "{attr}: {e}");
                    false
                }
            }
        }
        Access::None => unreachable!(),
    }
}

#[test]
fn acl_decision_table_matches_oracle() {
    let dir = fixture();
    let alice = user("alice");
    let before: Vec<_> = ["alice", "bob", "carol"]
        .map(|n| dir.raw_entry(&user(n)).unwrap())
        .into();
    let mut cells = 0;
    for who in EVERYONE {
        let state = state_for(&dir, who);
        for attr in SCHEME {
            for access in [Access::Read, Access::Write] {
                assert_eq!(
                    observed(&dir, &state, &alice, attr, access),
                    oracle(who, attr, access),
                    "{who:?} {access} {attr}"
                );
                cells += 1;
            }
        }
    }
    assert_eq!(cells, 40);
    let after: Vec<_> = ["alice", "bob", "carol"]
        .map(|n| dir.raw_entry(&user(n)).unwrap())
        .into();
    assert_eq!(before, after);
}

#[test]
fn default_deny_outside_the_rule_set() {
    let dir = fixture();
    for who in [Who::Anonymous, Who::SelfUser, Who::Other] {
        let state = state_for(&dir, who);
        for target in ["alice", "bob", "carol"] {
            let target = user(target);
            let seen = dir.search_entry(&target, &state).unwrap();
            assert!(!seen.has("cn"), "{who:?} reads cn");
            assert!(seen.object_classes().is_empty());
            assert!(!observed(&dir, &state, &target, "cn", Access::Write));
            assert!(!seen.has("userPassword"), "{who:?} reads userPassword");
            let expected_self = (who == Who::SelfUser && target == user("alice"))
                || (who == Who::Other && target == user("bob"));
            assert_eq!(seen.has("userPKCS12"), expected_self);
        }
    }
    // Entries outside the managed subtree are denied even to the admin.
    let admin = admin_state(&dir);
    let stray = DirectoryEntry::new(dn("cn=stray,dc=other"))
        .with_value("cn", AttributeValue::text("stray"));
    assert_eq!(
        dir.add_entry(stray, &admin).unwrap_err().code,
        ResultCode::InsufficientAccessRights
    );
}

#[test]
fn search_examples() {
    let dir = fixture();
    let alice = user("alice");
    let anon = dir
        .search_entry(&alice, &BindState::anonymous(false))
        .unwrap();
    let names: Vec<_> = anon.attributes().keys().cloned().collect();
    assert_eq!(
        names,
        [
            "userCertificate",
            "userEncryptedCertificate",
            "userEncryptedPassword"
        ]
    );
    let own = dir
        .search_entry(&alice, &state_for(&dir, Who::SelfUser))
        .unwrap();
    assert!(own.has("userPKCS12"));
    assert!(!own.has("userPassword"));
    let other = dir
        .search_entry(&alice, &state_for(&dir, Who::Other))
        .unwrap();
    assert!(!other.has("userPKCS12"));
    let admin = dir.search_entry(&alice, &admin_state(&dir)).unwrap();
    assert!(admin.has("userPassword"));
    assert!(admin.has_object_class("pkiUserManagement"));
    assert_eq!(
        dir.search_entry(&user("nobody"), &admin_state(&dir))
            .unwrap_err()
            .code,
        ResultCode::NoSuchObject
    );
}

#[test]
fn add_examples() {
    let dir = directory();
    let admin = admin_state(&dir);
    dir.add_entry(full_entry("alice"), &admin).unwrap();
    assert_eq!(
        dir.add_entry(full_entry("alice"), &admin).unwrap_err().code,
        ResultCode::EntryAlreadyExists
    );
    assert_eq!(
        dir.add_entry(full_entry("bob"), &BindState::anonymous(true))
            .unwrap_err()
            .code,
        ResultCode::InsufficientAccessRights
    );
    let alice_state = dir
        .simple_bind(Some(&user("alice")), b"alice-pw", true)
        .unwrap();
    assert_eq!(
        dir.add_entry(full_entry("bob"), &alice_state)
            .unwrap_err()
            .code,
        ResultCode::InsufficientAccessRights
    );

    let two_passwords = DirectoryEntry::new(user("dave"))
        .with_value("userPassword", AttributeValue::text("a"))
        .with_value("userPassword", AttributeValue::text("b"));
    assert_eq!(
        dir.add_entry(two_passwords, &admin).unwrap_err().code,
        ResultCode::SchemaViolation
    );
    let missing_class = DirectoryEntry::new(user("erin"))
        .with_value("userEncryptedCertificate", AttributeValue::binary(vec![1]));
    assert_eq!(
        dir.add_entry(missing_class, &admin).unwrap_err().code,
        ResultCode::SchemaViolation
    );
    assert_eq!(dir.len(), 1);
}

#[test]
fn modify_examples() {
    let dir = fixture();
    let alice = dir
        .simple_bind(Some(&user("alice")), b"alice-pw", true)
        .unwrap();
    let cert = Some(AttributeValue::binary(b"new cert".to_vec()));
    dir.modify_attribute(&user("alice"), "userCertificate", cert.clone(), &alice)
        .unwrap();
    assert_eq!(
        dir.raw_entry(&user("alice"))
            .unwrap()
            .first("userCertificate"),
        cert.as_ref()
    );

    let err = dir
        .modify_attribute(&user("bob"), "userCertificate", cert.clone(), &alice)
        .unwrap_err();
    assert_eq!(err.code, ResultCode::InsufficientAccessRights);
    let err = dir
        .modify_attribute(
            &user("alice"),
            "userPassword",
            Some(AttributeValue::text("x")),
            &alice,
        )
        .unwrap_err();
    assert_eq!(err.code, ResultCode::InsufficientAccessRights);
    let err = dir
        .modify_attribute(&user("zed"), "userCertificate", cert, &alice)
        .unwrap_err();
    assert_eq!(err.code, ResultCode::NoSuchObject);

    // Admin removes an encrypted attribute, then the schema still holds.
    let admin = admin_state(&dir);
    dir.modify_attribute(&user("alice"), "userEncryptedPassword", None, &admin)
        .unwrap();
    assert!(!dir
        .raw_entry(&user("alice"))
        .unwrap()
        .has("userEncryptedPassword"));
    // The alternate attribute spelling maps to the same attribute.
    dir.modify_attribute(
        &user("alice"),
        "encryptedUserPassword",
        Some(AttributeValue::binary(vec![9])),
        &admin,
    )
    .unwrap();
    assert_eq!(
        dir.raw_entry(&user("alice"))
            .unwrap()
            .values("userEncryptedPassword"),
        &[AttributeValue::binary(vec![9])]
    );
}

#[test]
fn schema_violation_on_modify_is_rolled_back() {
    let dir = directory();
    let admin = admin_state(&dir);
    let plain = DirectoryEntry::new(user("frank")).with_value("cn", AttributeValue::text("frank"));
    dir.add_entry(plain.clone(), &admin).unwrap();
    let err = dir
        .modify_attribute(
            &user("frank"),
            "userEncryptedPassword",
            Some(AttributeValue::binary(vec![1])),
            &admin,
        )
        .unwrap_err();
    assert_eq!(err.code, ResultCode::SchemaViolation);
    assert_eq!(dir.raw_entry(&user("frank")).unwrap(), plain);
    let err = dir
        .modify_attribute(
            &user("frank"),
            "objectClass",
            Some(AttributeValue::text("x")),
            &admin,
        )
        .unwrap_err();
    assert_eq!(err.code, ResultCode::SchemaViolation);
}

#[test]
fn delete_examples() {
    let dir = fixture();
    let alice = dir
        .simple_bind(Some(&user("alice")), b"alice-pw", true)
        .unwrap();
    assert_eq!(
        dir.delete_entry(&user("alice"), &alice).unwrap_err().code,
        ResultCode::InsufficientAccessRights
    );
    let admin = admin_state(&dir);
    dir.delete_entry(&user("alice"), &admin).unwrap();
    assert_eq!(
        dir.search_entry(&user("alice"), &admin).unwrap_err().code,
        ResultCode::NoSuchObject
    );
    assert_eq!(
        dir.delete_entry(&user("alice"), &admin).unwrap_err().code,
        ResultCode::NoSuchObject
    );
}

#[test]
fn bind_examples() {
    let dir = fixture();
    let alice = user("alice");
    let state = dir.simple_bind(Some(&alice), b"alice-pw", true).unwrap();
    assert_eq!(state.bound_dn(), Some(&alice));
    assert!(state.channel_secure());

    let code = |dn: Option<&DistinguishedName>, pw: &[u8], secure| {
        dir.simple_bind(dn, pw, secure).unwrap_err().code
    };
    assert_eq!(
        code(Some(&alice), b"alice-pw", false),
        ResultCode::ConfidentialityRequired
    );
    assert_eq!(
        code(Some(&alice), b"wrong", true),
        ResultCode::InvalidCredentials
    );
    assert_eq!(
        code(Some(&alice), b"wrong", false),
        ResultCode::ConfidentialityRequired
    );
    assert_eq!(
        code(Some(&user("nobody")), b"x", true),
        ResultCode::InvalidCredentials
    );
    assert_eq!(code(None, b"x", true), ResultCode::InvalidCredentials);
    assert_eq!(
        code(Some(&alice), b"", true),
        ResultCode::UnwillingToPerform
    );
    assert_eq!(
        code(Some(&dn(ADMIN_DN)), b"nope", true),
        ResultCode::InvalidCredentials
    );

    let anon = dir.simple_bind(None, b"", false).unwrap();
    assert!(anon.is_anonymous());

    // Entry without a password cannot be bound to.
    let admin = admin_state(&dir);
    dir.modify_attribute(&alice, "userPassword", None, &admin)
        .unwrap();
    assert_eq!(
        code(Some(&alice), b"alice-pw", true),
        ResultCode::InvalidCredentials
    );
}

#[test]
fn only_admin_installs_acls() {
    let dir = fixture();
    let alice = state_for(&dir, Who::SelfUser);
    let err = dir.install_acl(Default::default(), &alice).unwrap_err();
    assert_eq!(err.code, ResultCode::InsufficientAccessRights);
}

#[test]
fn snapshot_export_import_round_trip() {
    let dir = fixture();
    let admin = admin_state(&dir);
    dir.add_entry(
        DirectoryEntry::new(user("dave"))
            .with_value("cn", AttributeValue::text("Dave, Jr. = ünïcode"))
            .with_value(
                "userPKCS12",
                AttributeValue::binary((0..=255u8).collect::<Vec<_>>()),
            ),
        &admin,
    )
    .unwrap();
    let mut exported = Vec::new();
    dir.export(&mut exported).unwrap();
    assert_eq!(exported.iter().filter(|&&b| b == b'\n').count(), 4);

    let copy = directory();
    assert_eq!(copy.import(exported.as_slice()).unwrap(), 4);
    for name in ["alice", "bob", "carol", "dave"] {
        let a = dir.raw_entry(&user(name)).unwrap();
        let b = copy.raw_entry(&user(name)).unwrap();
        assert_eq!(a, b);
        for (attr, values) in a.attributes() {
            let other: Vec<_> = b
                .values(attr)
                .iter()
                .map(|v| v.as_bytes().to_vec())
                .collect();
            let mine: Vec<_> = values.iter().map(|v| v.as_bytes().to_vec()).collect();
            assert_eq!(mine, other);
        }
    }
    let mut again = Vec::new();
    copy.export(&mut again).unwrap();
    assert_eq!(again, exported);
}

#[test]
fn snapshot_import_rejects_bad_input() {
    let dir = directory();
    assert!(dir.import(&b"not json\n"[..]).is_err());
    let dup = format!(
        "{0}\n{0}\n",
        r#"{"attributes":{},"dn":"cn=a,ou=people,dc=example,dc=com","objectClasses":[]}"#
    );
    assert!(dir.import(dup.as_bytes()).is_err());
    let bad_schema = r#"{"attributes":{"userEncryptedPassword":[{"kind":"binary","value":"AQ=="}]},"dn":"cn=a,dc=x","objectClasses":[]}"#;
    assert!(dir.import(bad_schema.as_bytes()).is_err());
}

#[test]
fn persisted_directory_survives_restart() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("dir.ndjson");
    let admin_id = || dirpki_core::directory::AdminIdentity {
        dn: dn(ADMIN_DN),
        password: dirpki_core::directory::hash_password(ADMIN_PW).unwrap(),
    };
    {
        let dir = Directory::with_snapshot(admin_id(), &path).unwrap();
        let admin = admin_state(&dir);
        dirpki_core::ca::configure_acls(&dir, &admin, &dn(BASE)).unwrap();
        dir.add_entry(full_entry("alice"), &admin).unwrap();
        dir.add_entry(full_entry("bob"), &admin).unwrap();
        dir.delete_entry(&user("bob"), &admin).unwrap();
    }
    let reopened = Directory::with_snapshot(admin_id(), &path).unwrap();
    assert_eq!(reopened.len(), 1);
    assert!(reopened.raw_entry(&user("alice")).is_some());
}

#[test]
fn concurrent_writers_are_serialized() {
    let dir = directory();
    let admin = admin_state(&dir);
    std::thread::scope(|s| {
        for t in 0..8 {
            let dir = &dir;
            let admin = &admin;
            s.spawn(move || {
                for i in 0..25 {
                    let name = format!("u{t}-{i}");
                    dir.add_entry(full_entry(&name), admin).unwrap();
                    // Read-after-write on the same entry.
                    assert!(dir
                        .search_entry(&user(&name), admin)
                        .unwrap()
                        .has("userPassword"));
                }
            });
        }
    });
    assert_eq!(dir.len(), 200);
}
