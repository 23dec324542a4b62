//! CA state file (one JSON record per line) and the append-only audit log.

use std::fs::OpenOptions;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::{
    CaError, IssuedRecord, PolicyConfig, PopVariant, RecordKind, RecordStatus, RegistrationRecord,
};
use crate::crypto::PublicKey;
use crate::directory::DistinguishedName;
use crate::encoding::{b64_encode, to_canonical_vec, Fields};

pub const KEY_FILE: &str = "ca-key.json";
pub const CERT_FILE: &str = "ca-cert.json";
pub const STATE_FILE: &str = "state.ndjson";
pub const AUDIT_FILE: &str = "audit.log";

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Meta {
    pub name: DistinguishedName,
    pub next_serial: u64,
    pub inbound_messages: u64,
    pub policy: PolicyConfig,
    pub validity_seconds: u64,
}

fn state_err(e: impl std::fmt::Display) -> CaError {
    CaError::State(e.to_string())
}

fn meta_json(m: &Meta) -> Value {
    json!({
        "inboundMessages": m.inbound_messages,
        "kind": "meta",
        "name": m.name.to_string(),
        "nextSerial": m.next_serial,
        "policy": {
            "activationDeadlineSeconds": m.policy.activation_deadline_seconds,
            "deletePasswordAfterActivation": m.policy.delete_password_after_activation,
        },
        "validitySeconds": m.validity_seconds,
    })
}

fn registration_json(r: &RegistrationRecord) -> Value {
    json!({
        "createdAt": r.created_at,
        "kind": "registration",
        "sharedSecret": r.shared_secret.as_deref().map(b64_encode),
        "subject": r.subject.to_string(),
        "subjectPublicKey": r.subject_public_key.as_ref().map(PublicKey::to_json),
        "variant": r.variant.as_str(),
    })
}

fn issued_json(r: &IssuedRecord) -> Value {
    json!({
        "certificate": b64_encode(&r.certificate),
        "deadline": r.deadline,
        "dn": r.dn.to_string(),
        "kind": "issued",
        "passwordRemoved": r.password_removed,
        "provisionedAt": r.provisioned_at,
        "recordKind": match r.kind {
            RecordKind::Pop(v) => v.as_str(),
            RecordKind::Pse => "pse",
        },
        "serial": r.serial,
        "status": r.status.as_str(),
        "subjectPublicKey": r.subject_public_key.to_json(),
    })
}

pub(crate) fn write_state(
    path: &Path,
    meta: &Meta,
    registrations: &[&RegistrationRecord],
    issued: &[&IssuedRecord],
) -> Result<(), CaError> {
    let mut out = Vec::new();
    let lines = std::iter::once(meta_json(meta))
        .chain(registrations.iter().map(|r| registration_json(r)))
        .chain(issued.iter().map(|r| issued_json(r)));
    for line in lines {
        out.extend_from_slice(&to_canonical_vec(&line));
        out.push(b'\n');
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, out)?;
    std::fs::rename(tmp, path)?;
    Ok(())
}

fn dn(f: &Fields<'_>, key: &'static str) -> Result<DistinguishedName, CaError> {
    DistinguishedName::parse(f.str(key).map_err(state_err)?).map_err(state_err)
}

fn optional<'a>(f: &Fields<'a>, key: &'static str) -> Result<Option<&'a Value>, CaError> {
    Ok(Some(f.value(key).map_err(state_err)?).filter(|v| !v.is_null()))
}

pub(crate) struct LoadedState {
    pub meta: Meta,
    pub registrations: Vec<RegistrationRecord>,
    pub issued: Vec<IssuedRecord>,
}

pub(crate) fn read_state(input: impl BufRead) -> Result<LoadedState, CaError> {
    let mut meta = None;
    let mut registrations = Vec::new();
    let mut issued = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).map_err(state_err)?;
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        match kind.as_str() {
            "meta" => {
                let f = Fields::new(
                    &v,
                    &[
                        "inboundMessages",
                        "kind",
                        "name",
                        "nextSerial",
                        "policy",
                        "validitySeconds",
                    ],
                )
                .map_err(state_err)?;
                let p = Fields::new(
                    f.value("policy").map_err(state_err)?,
                    &["activationDeadlineSeconds", "deletePasswordAfterActivation"],
                )
                .map_err(state_err)?;
                meta = Some(Meta {
                    name: dn(&f, "name")?,
                    next_serial: f.u64("nextSerial").map_err(state_err)?,
                    inbound_messages: f.u64("inboundMessages").map_err(state_err)?,
                    policy: PolicyConfig {
                        activation_deadline_seconds: p
                            .u64("activationDeadlineSeconds")
                            .map_err(state_err)?,
                        delete_password_after_activation: p
                            .value("deletePasswordAfterActivation")
                            .map_err(state_err)?
                            .as_bool()
                            .ok_or_else(|| state_err("policy flag is not a boolean"))?,
                    },
                    validity_seconds: f.u64("validitySeconds").map_err(state_err)?,
                });
            }
            "registration" => {
                let f = Fields::new(
                    &v,
                    &[
                        "createdAt",
                        "kind",
                        "sharedSecret",
                        "subject",
                        "subjectPublicKey",
                        "variant",
                    ],
                )
                .map_err(state_err)?;
                let shared_secret = match optional(&f, "sharedSecret")? {
                    Some(_) => Some(f.bytes("sharedSecret").map_err(state_err)?),
                    None => None,
                };
                let subject_public_key = match optional(&f, "subjectPublicKey")? {
                    Some(pk) => Some(PublicKey::from_json(pk).map_err(state_err)?),
                    None => None,
                };
                let variant = PopVariant::parse(f.str("variant").map_err(state_err)?)
                    .ok_or_else(|| state_err("unknown variant"))?;
                let record = RegistrationRecord {
                    subject: dn(&f, "subject")?,
                    subject_public_key,
                    variant,
                    shared_secret,
                    created_at: f.u64("createdAt").map_err(state_err)?,
                };
                record.validate()?;
                registrations.push(record);
            }
            "issued" => {
                let f = Fields::new(
                    &v,
                    &[
                        "certificate",
                        "deadline",
                        "dn",
                        "kind",
                        "passwordRemoved",
                        "provisionedAt",
                        "recordKind",
                        "serial",
                        "status",
                        "subjectPublicKey",
                    ],
                )
                .map_err(state_err)?;
                let kind = match f.str("recordKind").map_err(state_err)? {
                    "pse" => RecordKind::Pse,
                    other => RecordKind::Pop(
                        PopVariant::parse(other).ok_or_else(|| state_err("unknown record kind"))?,
                    ),
                };
                let deadline = match optional(&f, "deadline")? {
                    Some(d) => Some(
                        d.as_u64()
                            .ok_or_else(|| state_err("deadline is not an integer"))?,
                    ),
                    None => None,
                };
                issued.push(IssuedRecord {
                    dn: dn(&f, "dn")?,
                    kind,
                    serial: f.u64("serial").map_err(state_err)?,
                    subject_public_key: PublicKey::from_json(
                        f.value("subjectPublicKey").map_err(state_err)?,
                    )
                    .map_err(state_err)?,
                    certificate: f.bytes("certificate").map_err(state_err)?,
                    provisioned_at: f.u64("provisionedAt").map_err(state_err)?,
                    deadline,
                    status: RecordStatus::parse(f.str("status").map_err(state_err)?)
                        .ok_or_else(|| state_err("unknown status"))?,
                    password_removed: f
                        .value("passwordRemoved")
                        .map_err(state_err)?
                        .as_bool()
                        .ok_or_else(|| state_err("passwordRemoved is not a boolean"))?,
                });
            }
            other => return Err(state_err(format!("unknown record kind `{other}`"))),
        }
    }
    let meta = meta.ok_or_else(|| state_err("state file has no meta record"))?;
    Ok(LoadedState {
        meta,
        registrations,
        issued,
    })
}

/// Append-only audit trail, mirrored in memory.
#[derive(Debug, Default)]
pub struct AuditLog {
    path: Option<PathBuf>,
    lines: Vec<String>,
}

impl AuditLog {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn at(path: PathBuf) -> Self {
        Self {
            path: Some(path),
            lines: Vec::new(),
        }
    }

    pub fn record(&mut self, now: u64, event: &str, detail: &str) -> Result<(), CaError> {
        let line = format!("{now} {event} {detail}");
        log::info!("audit: {line}");
        if let Some(path) = &self.path {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            writeln!(f, "{line}")?;
        }
        self.lines.push(line);
        Ok(())
    }

    /// Events recorded by this process.
    pub fn lines(&self) -> &[String] {
        &self.lines
    }
}
