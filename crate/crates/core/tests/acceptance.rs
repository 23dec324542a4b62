//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use common::*;
use dirpki_core::agent::{complete_pop, download_pse, ActivationInput, AgentError};
use dirpki_core::ca::{CertificationAuthority, PolicyAction, PolicyConfig, PopVariant};
use dirpki_core::clock::{Clock, ManualClock};
use dirpki_core::crypto::hybrid::open_envelope;
use dirpki_core::crypto::{
    hybrid_decrypt, hybrid_encrypt, Certificate, EncryptedBlob, PseContainer,
};
use dirpki_core::directory::json::entry_to_json;
use dirpki_core::directory::{
    hash_password, verify_password, Access, AttributeValue, Directory, DirectorySession,
    DistinguishedName, LocalSession, PasswordHash, ResultCode,
};
use dirpki_core::encoding::{b64_encode, to_canonical_vec};
use dirpki_core::wire::{
    ClientSecurity, Connection, ListenerSecurity, Operation, RequestMessage, ResponseMessage,
    ServerHandle,
};
use rand::rngs::StdRng;
use rand::{Rng, RngCore, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type Mutation = (&'static str, Box<dyn Fn(&mut Certificate)>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn setup(policy: PolicyConfig) -> (Arc<Directory>, Arc<ManualClock>, CertificationAuthority) {
    let clock = Arc::new(ManualClock::new(T0));
    let ca = ca_with_policy(Arc::clone(&clock), policy);
    (directory(), clock, ca)
}

fn provision(
    dir: &Arc<Directory>,
    ca: &mut CertificationAuthority,
    name: &str,
    key: usize,
    variant: PopVariant,
) -> Option<Vec<u8>> {
    let reg = ca
        .register(user(name), keys()[key].public.clone(), variant)
        .unwrap();
    ca.provision_pop_entry(&mut admin_session(dir), &user(name))
        .unwrap();
    reg.shared_secret.map(String::into_bytes)
}

fn activation(
    name: &str,
    key: usize,
    variant: PopVariant,
    secret: Option<Vec<u8>>,
) -> ActivationInput {
    ActivationInput::new(user(name), keys()[key].private.clone(), variant, secret).unwrap()
}

fn entry_bytes(dir: &Directory, dn: &DistinguishedName) -> Vec<u8> {
    to_canonical_vec(&entry_to_json(&dir.raw_entry(dn).unwrap()))
}

fn secure_conn(server: &ServerHandle) -> Connection {
    connect(server, ClientSecurity::AssumeSecure)
}

fn ac1_honest_pop() -> Outcome {
    let (dir, _clock, mut ca) = setup(PolicyConfig::default());
    let server = spawn(&dir, ListenerSecurity::AssumeSecure);
    let mut passed = 0;
    for (i, variant) in PopVariant::ALL.into_iter().enumerate() {
        let name = format!("honest-{variant}");
        let secret = provision(&dir, &mut ca, &name, i + 1, variant);
        let inbound = ca.inbound_messages();
        let input = activation(&name, i + 1, variant, secret).with_ca_key(ca.public_key());
        complete_pop(&mut secure_conn(&server), &input).map_err(|e| format!("{variant}: {e}"))?;
        let mut admin = secure_conn(&server);
        admin.bind(Some(&dn(ADMIN_DN)), ADMIN_PW).unwrap();
        let ok = ca
            .verify_activation(&mut admin, &user(&name))
            .map_err(|e| e.to_string())?;
        ensure!(ok, "{variant}: verifyActivation returned false");
        ensure!(
            ca.inbound_messages() == inbound,
            "{variant}: {} CA-inbound messages after provisioning",
            ca.inbound_messages() - inbound
        );
        passed += 1;
    }
    server.shutdown();
    Ok(format!(
        "{passed}/3 variants activated, 0 CA-inbound messages after provisioning"
    ))
}

#[derive(Debug, Clone, Copy)]
enum Attack {
    RandomCertificate,
    ReplayCiphertext,
    OtherUsersCertificate,
    GuessedPassword,
}

fn ac2_pop_soundness() -> Outcome {
    const TRIALS: usize = 120;
    let (dir, _clock, mut ca) = setup(PolicyConfig::default());
    let victims: Vec<(String, PopVariant)> = PopVariant::ALL
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let name = format!("victim-{v}");
            provision(&dir, &mut ca, &name, i + 1, v);
            (name, v)
        })
        .collect();
    provision(&dir, &mut ca, "mallory", 4, PopVariant::FullEncrypted);
    let mallory_cert = complete_pop(
        &mut LocalSession::new(Arc::clone(&dir), true),
        &activation("mallory", 4, PopVariant::FullEncrypted, None),
    )
    .map_err(|e| e.to_string())?;
    let mallory_pw = open_envelope(
        &keys()[4].private,
        dir.raw_entry(&user("mallory"))
            .unwrap()
            .first("userEncryptedPassword")
            .unwrap()
            .as_bytes(),
    )
    .unwrap();

    let mut rng = rng(2);
    let attacks = [
        Attack::RandomCertificate,
        Attack::ReplayCiphertext,
        Attack::OtherUsersCertificate,
        Attack::GuessedPassword,
    ];
    let mut successes = 0;
    for trial in 0..TRIALS {
        let (victim_name, variant) = &victims[rng.gen_range(0..victims.len())];
        let victim = user(victim_name);
        let attack = attacks[trial % attacks.len()];
        let before = entry_bytes(&dir, &victim);
        let victim_entry = dir.raw_entry(&victim).unwrap();

        let payload = match attack {
            Attack::RandomCertificate => {
                let mut b = vec![0u8; rng.gen_range(1..2048)];
                rng.fill_bytes(&mut b);
                b
            }
            Attack::ReplayCiphertext => {
                let attr = if rng.gen() || !victim_entry.has("userEncryptedPassword") {
                    "userEncryptedCertificate"
                } else {
                    "userEncryptedPassword"
                };
                victim_entry.first(attr).unwrap().as_bytes().to_vec()
            }
            Attack::OtherUsersCertificate => mallory_cert.to_bytes(),
            Attack::GuessedPassword => Vec::new(),
        };

        let mut session = LocalSession::new(Arc::clone(&dir), true);
        match attack {
            Attack::GuessedPassword => {
                let mut guess = vec![0u8; 32];
                rng.fill_bytes(&mut guess);
                let guess = match variant {
                    PopVariant::HalfHalf if trial % 8 == 3 => {
                        // Knows nothing but tries the ciphertext as the second half.
                        let mut g = b64_encode(&guess[..16]).into_bytes();
                        g.extend_from_slice(b64_encode(&guess[16..]).as_bytes());
                        g
                    }
                    _ => b64_encode(&guess).into_bytes(),
                };
                let err = session
                    .bind(Some(&victim), &guess)
                    .err()
                    .and_then(|e| e.code());
                ensure!(
                    err == Some(ResultCode::InvalidCredentials),
                    "guessed bind gave {err:?}"
                );
                let write = session.modify(
                    &victim,
                    "userCertificate",
                    Some(AttributeValue::binary(guess)),
                );
                ensure!(write.is_err(), "anonymous write accepted");
            }
            _ => {
                // As the authenticated adversary, on the victim and on its own entry.
                session.bind(Some(&user("mallory")), &mallory_pw).unwrap();
                let value = AttributeValue::binary(payload.clone());
                let err = session
                    .modify(&victim, "userCertificate", Some(value.clone()))
                    .err()
                    .and_then(|e| e.code());
                ensure!(
                    err == Some(ResultCode::InsufficientAccessRights),
                    "{attack:?}: write gave {err:?}"
                );
                session
                    .modify(&user("mallory"), "userCertificate", Some(value))
                    .unwrap();
                // Anonymous cannot write either.
                let mut anon = LocalSession::new(Arc::clone(&dir), true);
                ensure!(
                    anon.modify(
                        &victim,
                        "userCertificate",
                        Some(AttributeValue::binary(payload))
                    )
                    .is_err(),
                    "anonymous write accepted"
                );
                // Activation with the adversary's own key fails before any write.
                let secret = ca.registration(&victim).unwrap().shared_secret.clone();
                let try_own_key = ActivationInput::new(
                    victim.clone(),
                    keys()[4].private.clone(),
                    *variant,
                    secret,
                )
                .unwrap();
                let r = complete_pop(&mut LocalSession::new(Arc::clone(&dir), true), &try_own_key);
                if !matches!(r, Err(AgentError::DecryptFailed)) {
                    return Err(format!(
                        "{attack:?}: activation with a foreign key gave {r:?}"
                    ));
                }
            }
        }
        if ca
            .verify_activation(&mut admin_session(&dir), &victim)
            .map_err(|e| e.to_string())?
        {
            successes += 1;
        }
        ensure!(
            entry_bytes(&dir, &victim) == before,
            "{attack:?}: victim entry changed"
        );
    }
    ensure!(successes == 0, "{successes} successful attacks");
    Ok(format!("0 successes in {TRIALS} randomized trials"))
}

fn ac3_acl_table() -> Outcome {
    let dir = directory();
    let admin = admin_state(&dir);
    for name in ["alice", "bob"] {
        dir.add_entry(full_entry(name), &admin).unwrap();
    }
    let server = spawn(&dir, ListenerSecurity::AssumeSecure);
    let alice = user("alice");
    let reference = dir.raw_entry(&alice).unwrap();
    let mut cells = 0;
    let mut mismatches = Vec::new();
    for who in EVERYONE {
        let mut conn = secure_conn(&server);
        match who {
            Who::Anonymous => {}
            Who::SelfUser => conn.bind(Some(&alice), b"alice-pw").unwrap(),
            Who::Other => conn.bind(Some(&user("bob")), b"bob-pw").unwrap(),
            Who::Admin => conn.bind(Some(&dn(ADMIN_DN)), ADMIN_PW).unwrap(),
        }
        for attr in SCHEME {
            for access in [Access::Read, Access::Write] {
                let observed = match access {
                    Access::Read => conn.search(&alice).unwrap().has(attr),
                    _ => conn
                        .modify(&alice, attr, reference.first(attr).cloned())
                        .is_ok(),
                };
                if observed != oracle(who, attr, access) {
                    mismatches.push(format!("{who:?}/{attr}/{access}"));
                }
                cells += 1;
            }
        }
    }
    server.shutdown();
    ensure!(
        mismatches.is_empty(),
        "mismatched cells: {}",
        mismatches.join(", ")
    );
    ensure!(
        dir.raw_entry(&alice).unwrap() == reference,
        "fixture entry changed"
    );
    Ok(format!("{cells}/40 cells match the oracle"))
}

fn ac4_channel_security() -> Outcome {
    let (dir, _clock, mut ca) = setup(PolicyConfig::default());
    provision(&dir, &mut ca, "pop", 1, PopVariant::FullEncrypted);
    ca.provision_pse_entry(&mut admin_session(&dir), &user("pse"), b"reg-pw", b"pse-pw")
        .unwrap();
    let pw = open_envelope(
        &keys()[1].private,
        dir.raw_entry(&user("pop"))
            .unwrap()
            .first("userEncryptedPassword")
            .unwrap()
            .as_bytes(),
    )
    .unwrap();
    let plain = spawn(&dir, ListenerSecurity::Plaintext);
    let secure = spawn(&dir, ListenerSecurity::AssumeSecure);
    let credentials: [(DistinguishedName, Vec<u8>); 4] = [
        (user("pop"), pw.clone()),
        (user("pse"), b"reg-pw".to_vec()),
        (dn(ADMIN_DN), ADMIN_PW.to_vec()),
        (user("pop"), b"wrong".to_vec()),
    ];
    let mut sites = 0;
    for (who, password) in &credentials {
        let genuine = password != b"wrong";
        let code =
            |r: Result<(), dirpki_core::directory::SessionError>| r.err().and_then(|e| e.code());
        let insecure_results = [
            dir.simple_bind(Some(who), password, false)
                .err()
                .map(|e| e.code),
            code(LocalSession::new(Arc::clone(&dir), false).bind(Some(who), password)),
            code(connect(&plain, ClientSecurity::Plaintext).bind(Some(who), password)),
        ];
        for r in insecure_results {
            ensure!(
                r == Some(ResultCode::ConfidentialityRequired),
                "insecure bind of {who} gave {r:?}"
            );
            sites += 1;
        }
        let secure_results = [
            dir.simple_bind(Some(who), password, true)
                .err()
                .map(|e| e.code),
            code(LocalSession::new(Arc::clone(&dir), true).bind(Some(who), password)),
            code(secure_conn(&secure).bind(Some(who), password)),
        ];
        for r in secure_results {
            let expected = if genuine {
                None
            } else {
                Some(ResultCode::InvalidCredentials)
            };
            ensure!(r == expected, "secure bind of {who} gave {r:?}");
        }
    }
    // Client agent call sites.
    let pop = activation("pop", 1, PopVariant::FullEncrypted, None);
    let r = complete_pop(&mut connect(&plain, ClientSecurity::Plaintext), &pop).map(|_| ());
    ensure!(
        r.as_ref().err().and_then(AgentError::result_code)
            == Some(ResultCode::ConfidentialityRequired),
        "activation over plaintext gave {r:?}"
    );
    let r = download_pse(
        &mut connect(&plain, ClientSecurity::Plaintext),
        &user("pse"),
        b"reg-pw",
        b"pse-pw",
    )
    .map(|_| ());
    ensure!(
        r.as_ref().err().and_then(AgentError::result_code)
            == Some(ResultCode::ConfidentialityRequired),
        "PSE download over plaintext gave {r:?}"
    );
    sites += 2;
    complete_pop(&mut secure_conn(&secure), &pop).map_err(|e| format!("secure activation: {e}"))?;
    download_pse(
        &mut secure_conn(&secure),
        &user("pse"),
        b"reg-pw",
        b"pse-pw",
    )
    .map_err(|e| format!("secure PSE download: {e}"))?;
    // Anonymous binds and reads stay available in the clear.
    let mut anon = connect(&plain, ClientSecurity::Plaintext);
    anon.bind(None, b"").map_err(|e| e.to_string())?;
    anon.search(&user("pop")).map_err(|e| e.to_string())?;
    plain.shutdown();
    secure.shutdown();
    Ok(format!(
        "{sites}/{sites} insecure password binds refused with 13; secure binds succeed"
    ))
}

fn ac5_policy_clock() -> Outcome {
    let deadline = PolicyConfig::default().activation_deadline_seconds;
    ensure!(deadline == 259_200, "default deadline is {deadline}");
    let (dir, _clock, mut ca) = setup(PolicyConfig::default());
    provision(&dir, &mut ca, "idle", 1, PopVariant::HalfHalf);
    let mut admin = admin_session(&dir);
    let early = ca
        .enforce_policy(&mut admin, T0 + deadline - 1)
        .map_err(|e| e.to_string())?;
    ensure!(
        early.is_empty() && dir.raw_entry(&user("idle")).is_some(),
        "deleted before the deadline"
    );
    let late = ca
        .enforce_policy(&mut admin, T0 + deadline + 1)
        .map_err(|e| e.to_string())?;
    ensure!(
        late == [PolicyAction::Deleted(user("idle"))],
        "actions at deadline + 1: {late:?}"
    );
    ensure!(
        dir.raw_entry(&user("idle")).is_none(),
        "entry survived the deadline"
    );

    let policy = PolicyConfig {
        delete_password_after_activation: true,
        ..PolicyConfig::default()
    };
    let (dir, clock, mut ca) = setup(policy);
    provision(&dir, &mut ca, "active", 1, PopVariant::FullEncrypted);
    let pw = open_envelope(
        &keys()[1].private,
        dir.raw_entry(&user("active"))
            .unwrap()
            .first("userEncryptedPassword")
            .unwrap()
            .as_bytes(),
    )
    .unwrap();
    let cert = complete_pop(
        &mut LocalSession::new(Arc::clone(&dir), true),
        &activation("active", 1, PopVariant::FullEncrypted, None),
    )
    .map_err(|e| e.to_string())?;
    clock.advance(60);
    ca.enforce_policy(&mut admin_session(&dir), clock.now())
        .map_err(|e| e.to_string())?;
    let bind = dir
        .simple_bind(Some(&user("active")), &pw, true)
        .err()
        .map(|e| e.code);
    ensure!(
        bind == Some(ResultCode::InvalidCredentials),
        "post-activation bind gave {bind:?}"
    );
    let public = LocalSession::new(Arc::clone(&dir), false)
        .search(&user("active"))
        .unwrap();
    ensure!(
        public
            .first("userCertificate")
            .map(|v| v.as_bytes().to_vec())
            == Some(cert.to_bytes()),
        "userCertificate not readable after password removal"
    );
    Ok("kept at deadline - 1, deleted at deadline + 1; password removal gives 49, certificate readable".into())
}

fn ac6_pse_delivery() -> Outcome {
    let (dir, _clock, mut ca) = setup(PolicyConfig::default());
    let server = spawn(&dir, ListenerSecurity::AssumeSecure);
    let mut admin = admin_session(&dir);
    ca.provision_pse_entry(&mut admin, &user("owner"), b"owner-reg", b"owner-pse")
        .unwrap();
    ca.provision_pse_entry(&mut admin, &user("peer"), b"peer-reg", b"peer-pse")
        .unwrap();
    let record = ca.issued(&user("owner")).unwrap().clone();

    let got = download_pse(
        &mut secure_conn(&server),
        &user("owner"),
        b"owner-reg",
        b"owner-pse",
    )
    .map_err(|e| e.to_string())?;
    let stored = dir
        .raw_entry(&user("owner"))
        .unwrap()
        .first("userPKCS12")
        .unwrap()
        .as_bytes()
        .to_vec();
    ensure!(
        got.container == stored,
        "container differs from the directory copy"
    );
    ensure!(
        got.contents.private_key.public_key() == record.subject_public_key,
        "key pair mismatch"
    );
    ensure!(
        got.contents.certificates[0].to_bytes() == record.certificate,
        "certificate mismatch"
    );
    ensure!(
        got.contents.certificates[1] == *ca.certificate(),
        "CA certificate mismatch"
    );
    let again = PseContainer::from_bytes(&got.container)
        .unwrap()
        .open(b"owner-pse")
        .unwrap();
    ensure!(
        *again.private_key.to_bytes() == *got.contents.private_key.to_bytes(),
        "private key not bit-exact across opens"
    );
    let probe = hybrid_encrypt(&record.subject_public_key, b"probe").unwrap();
    ensure!(
        hybrid_decrypt(&got.contents.private_key, &probe)
            .ok()
            .as_deref()
            == Some(&b"probe"[..]),
        "downloaded key cannot decrypt for the certified key"
    );

    let mut anon = secure_conn(&server);
    let mut peer = secure_conn(&server);
    peer.bind(Some(&user("peer")), b"peer-reg").unwrap();
    for (label, session) in [("anonymous", &mut anon), ("non-owner", &mut peer)] {
        let seen = session.search(&user("owner")).unwrap();
        ensure!(!seen.has("userPKCS12"), "{label} read userPKCS12");
    }

    let mut rng = rng(6);
    let mut rejected = 0;
    for _ in 0..100 {
        let mut bytes = got.container.clone();
        let bit = rng.gen_range(0..bytes.len() * 8);
        bytes[bit / 8] ^= 1 << (bit % 8);
        match PseContainer::from_bytes(&bytes).and_then(|c| c.open(b"owner-pse")) {
            Err(_) => rejected += 1,
            Ok(c) => {
                return Err(format!(
                    "bit {bit} flipped still opened (key intact: {})",
                    c.private_key.public_key() == record.subject_public_key
                ))
            }
        }
    }
    server.shutdown();
    Ok(format!("owner round trip exact; userPKCS12 hidden from 2/2 others; {rejected}/100 bit-flips rejected"))
}

fn ac7_crypto_properties() -> Outcome {
    let mut rng = rng(7);
    let ks = keys();
    for i in 0..100 {
        let mut msg = vec![0u8; rng.gen_range(1..4096)];
        rng.fill_bytes(&mut msg);
        let k = &ks[i % ks.len()];
        let blob = hybrid_encrypt(&k.public, &msg).unwrap();
        let blob = EncryptedBlob::from_bytes(&blob.to_bytes()).unwrap();
        ensure!(
            hybrid_decrypt(&k.private, &blob).unwrap() == msg,
            "hybrid round trip {i}"
        );
        ensure!(
            hybrid_decrypt(&ks[(i + 1) % ks.len()].private, &blob).is_err(),
            "hybrid decrypt with the wrong key succeeded ({i})"
        );
    }

    let ca_cert = ca_with_policy(Arc::new(ManualClock::new(T0)), PolicyConfig::default())
        .certificate()
        .clone();
    for i in 0..100 {
        let k = &ks[i % ks.len()];
        let n_certs = rng.gen_range(0..3);
        let certs: Vec<Certificate> = (0..n_certs)
            .map(|j| {
                Certificate::issue(
                    &ca_key().private,
                    &dn(CA_NAME),
                    rng.gen_range(2..u64::MAX),
                    &user(&format!("p{i}-{j}")),
                    &k.public,
                    rng.gen_range(0..T0),
                    rng.gen_range(1..1_000_000),
                )
                .unwrap()
            })
            .chain((n_certs == 2).then(|| ca_cert.clone()))
            .collect();
        let mut pw = vec![0u8; rng.gen_range(1..64)];
        rng.fill_bytes(&mut pw);
        let bytes = PseContainer::build(&k.private, &certs, &pw)
            .unwrap()
            .to_bytes();
        let opened = PseContainer::from_bytes(&bytes).unwrap().open(&pw).unwrap();
        ensure!(
            *opened.private_key.to_bytes() == *k.private.to_bytes(),
            "PSE key round trip {i}"
        );
        ensure!(
            opened.certificates == certs,
            "PSE certificate round trip {i}"
        );
    }

    let cert = Certificate::issue(
        &ca_key().private,
        &dn(CA_NAME),
        42,
        &user("m"),
        &ks[1].public,
        T0,
        1000,
    )
    .unwrap();
    ensure!(
        cert.verify(&ca_key().public, T0 + 10),
        "genuine certificate rejected"
    );
    let mutations: Vec<Mutation> = vec![
        ("serial", Box::new(|c| c.serial += 1)),
        ("subject", Box::new(|c| c.subject = user("n"))),
        (
            "subjectPublicKey",
            Box::new(|c| c.subject_public_key = keys()[2].public.clone()),
        ),
        ("notBefore", Box::new(|c| c.not_before -= 1)),
        ("notAfter", Box::new(|c| c.not_after += 1)),
        ("issuer", Box::new(|c| c.issuer = dn("cn=Other CA"))),
        ("signature", Box::new(|c| c.signature[0] ^= 1)),
    ];
    for (field, mutate) in &mutations {
        let mut m = cert.clone();
        mutate(&mut m);
        ensure!(
            !m.verify(&ca_key().public, T0 + 10),
            "mutated {field} still verifies"
        );
    }

    for _ in 0..100 {
        let mut pw = vec![0u8; rng.gen_range(1..48)];
        rng.fill_bytes(&mut pw);
        let stored = hash_password(&pw).unwrap().render();
        ensure!(
            verify_password(&pw, &stored),
            "hash does not verify its password"
        );
        let mut other = pw.clone();
        let i = rng.gen_range(0..other.len());
        other[i] ^= 1 << rng.gen_range(0..8);
        ensure!(
            !verify_password(&other, &stored),
            "hash verifies a different password"
        );
        ensure!(
            hash_password(&pw).unwrap().render() != stored,
            "salts repeat"
        );
        let parsed: PasswordHash = stored.parse().unwrap();
        ensure!(parsed.render() == stored, "hash rendering unstable");
        // Same salt, attacker-chosen password.
        let forged = PasswordHash::with_salt(b"attacker", *parsed.salt()).unwrap();
        ensure!(!forged.verify(&pw), "forged hash verifies");
    }
    Ok(format!(
        "100 hybrid and 100 PSE round trips; {}/{} certificate mutations rejected; 100 password hash checks",
        mutations.len(),
        mutations.len()
    ))
}

fn random_request(rng: &mut StdRng) -> RequestMessage {
    let name = |rng: &mut StdRng| user(&format!("u{}", rng.gen_range(0..1000)));
    let value = |rng: &mut StdRng| {
        if rng.gen() {
            AttributeValue::text(format!("t{}", rng.gen::<u32>()))
        } else {
            let mut b = vec![0u8; rng.gen_range(0..64)];
            rng.fill_bytes(&mut b);
            AttributeValue::binary(b)
        }
    };
    let op = match rng.gen_range(0..6) {
        0 => Operation::Bind {
            dn: rng.gen::<bool>().then(|| name(rng)),
            password: (0..rng.gen_range(0..20)).map(|_| rng.gen()).collect(),
        },
        1 => Operation::Add {
            entry: full_entry(&format!("a{}", rng.gen::<u16>())),
        },
        2 => Operation::Search { dn: name(rng) },
        3 => Operation::Modify {
            dn: name(rng),
            attribute: SCHEME[rng.gen_range(0..SCHEME.len())].to_string(),
            value: rng.gen::<bool>().then(|| value(rng)),
        },
        4 => Operation::Delete { dn: name(rng) },
        _ => Operation::Unbind,
    };
    RequestMessage::new(rng.gen_range(1..u64::MAX >> 11), op)
}

fn ac8_wire_protocol() -> Outcome {
    let mut rng = rng(8);
    for i in 0..500 {
        let req = random_request(&mut rng);
        let bytes = req.encode();
        let decoded = RequestMessage::decode(&bytes).map_err(|e| format!("request {i}: {e}"))?;
        ensure!(
            decoded == req && decoded.encode() == bytes,
            "request {i} not byte-stable"
        );
        let resp = match rng.gen_range(0..3) {
            0 => ResponseMessage::ok(req.id),
            1 => ResponseMessage::with_entry(req.id, full_entry("r")),
            _ => ResponseMessage::error(
                req.id,
                ResultCode::ALL[rng.gen_range(1..ResultCode::ALL.len())],
                "e",
            ),
        };
        let bytes = resp.encode();
        let decoded = ResponseMessage::decode(&bytes).map_err(|e| format!("response {i}: {e}"))?;
        ensure!(decoded.encode() == bytes, "response {i} not byte-stable");
    }

    let dir = directory();
    dir.add_entry(full_entry("alice"), &admin_state(&dir))
        .unwrap();
    let server = spawn(&dir, ListenerSecurity::AssumeSecure);
    let valid: Vec<Vec<u8>> = (0..16).map(|_| random_request(&mut rng).encode()).collect();
    let mut protocol_errors = 0;
    for i in 0..1000 {
        let mut line: Vec<u8> = match i % 3 {
            0 => (0..rng.gen_range(0..300))
                .map(|_| rng.gen::<u8>())
                .collect(),
            1 => {
                let f = &valid[rng.gen_range(0..valid.len())];
                f[..rng.gen_range(0..f.len() - 1)].to_vec()
            }
            _ => {
                let mut f = valid[rng.gen_range(0..valid.len())].clone();
                let j = rng.gen_range(0..f.len() - 1);
                f[j] = rng.gen();
                f
            }
        };
        line.retain(|&b| b != b'\n');
        line.push(b'\n');
        // The codec never panics; the server answers or closes.
        let decoded = catch_unwind(|| RequestMessage::decode(&line));
        ensure!(decoded.is_ok(), "decoder panicked on line {i}");
        let mut s = std::net::TcpStream::connect(server.local_addr())
            .map_err(|e| format!("line {i}: {e}"))?;
        std::io::Write::write_all(&mut s, &line).map_err(|e| e.to_string())?;
        s.shutdown(std::net::Shutdown::Write).unwrap();
        let mut reply = String::new();
        std::io::Read::read_to_string(&mut s, &mut reply).map_err(|e| e.to_string())?;
        for l in reply.lines() {
            let r = ResponseMessage::decode(l.as_bytes())
                .map_err(|e| format!("line {i}: bad reply {e}"))?;
            if r.code == ResultCode::ProtocolError {
                protocol_errors += 1;
            }
        }
    }
    let mut alive = secure_conn(&server);
    alive
        .bind(Some(&user("alice")), b"alice-pw")
        .map_err(|e| format!("server unusable after fuzzing: {e}"))?;
    server.shutdown();
    Ok(format!(
        "500 request/response encodings byte-stable; 1000 malformed lines, 0 crashes, {protocol_errors} protocol errors"
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("AC1 honest proof of possession", ac1_honest_pop),
        ("AC2 proof-of-possession soundness", ac2_pop_soundness),
        ("AC3 ACL decision table", ac3_acl_table),
        ("AC4 channel security", ac4_channel_security),
        ("AC5 policy clock", ac5_policy_clock),
        ("AC6 PSE delivery", ac6_pse_delivery),
        ("AC7 crypto properties", ac7_crypto_properties),
        ("AC8 wire protocol", ac8_wire_protocol),
    ];
    // Warm the shared key pool before timing individual criteria.
    keys();
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} ({secs:.1}s)");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
