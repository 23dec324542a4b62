//! Request and response messages: one canonical JSON object per
//! LF-terminated UTF-8 line.
//!
//! ```text
//! {"dn":"cn=alice,dc=example","id":1,"op":"bind","password":"cHc="}
//! {"dn":"cn=alice,dc=example","entry":{"attributes":{..},"objectClasses":[..]},"id":2,"op":"add"}
//! {"dn":"cn=alice,dc=example","id":3,"op":"search"}
//! {"attribute":"userCertificate","dn":"..","id":4,"op":"modify","value":{"kind":"binary","value":".."}}
//! {"dn":"..","id":5,"op":"delete"}
//! {"id":6,"op":"unbind"}
//!
//! {"code":0,"id":3,"status":"ok","entry":{"attributes":{..},"dn":"..","objectClasses":[..]}}
//! {"code":50,"id":4,"message":"..","status":"err"}
//! ```
//!
//! A modify with `"value":null` removes the attribute. A bind with an empty
//! `dn` and empty `password` is anonymous.

use serde_json::{json, Value};

use crate::directory::json::{
    body_from_json, body_to_json, entry_from_json, entry_to_json, value_from_json, value_to_json,
    EntryJsonError,
};
use crate::directory::{AttributeValue, DirectoryEntry, DistinguishedName, DnError, ResultCode};
use crate::encoding::{b64_encode, to_canonical_vec, FieldError, Fields};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operation {
    Bind {
        dn: Option<DistinguishedName>,
        password: Vec<u8>,
    },
    Add {
        entry: DirectoryEntry,
    },
    Search {
        dn: DistinguishedName,
    },
    Modify {
        dn: DistinguishedName,
        attribute: String,
        value: Option<AttributeValue>,
    },
    Delete {
        dn: DistinguishedName,
    },
    Unbind,
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::Bind { .. } => "bind",
            Operation::Add { .. } => "add",
            Operation::Search { .. } => "search",
            Operation::Modify { .. } => "modify",
            Operation::Delete { .. } => "delete",
            Operation::Unbind => "unbind",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestMessage {
    pub id: u64,
    pub op: Operation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseMessage {
    pub id: u64,
    pub code: ResultCode,
    /// Diagnostic text; present only on errors.
    pub message: Option<String>,
    /// The (filtered) entry returned by a successful search.
    pub entry: Option<DirectoryEntry>,
}

impl ResponseMessage {
    pub fn ok(id: u64) -> Self {
        Self {
            id,
            code: ResultCode::Success,
            message: None,
            entry: None,
        }
    }

    pub fn with_entry(id: u64, entry: DirectoryEntry) -> Self {
        Self {
            entry: Some(entry),
            ..Self::ok(id)
        }
    }

    pub fn error(id: u64, code: ResultCode, message: impl Into<String>) -> Self {
        debug_assert_ne!(code, ResultCode::Success);
        Self {
            id,
            code,
            message: Some(message.into()),
            entry: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.code == ResultCode::Success
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("frame is not valid UTF-8")]
    Utf8,
    #[error("frame contains an embedded line feed")]
    EmbeddedNewline,
    #[error("frame is not valid JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("message id must be a positive integer")]
    BadId,
    #[error("invalid distinguished name: {0}")]
    Dn(#[from] DnError),
    #[error("invalid entry: {0}")]
    Entry(#[from] EntryJsonError),
    #[error("unknown result code {0}")]
    UnknownCode(u64),
    #[error("status does not agree with result code")]
    StatusMismatch,
    #[error("frame exceeds {0} octets")]
    TooLong(usize),
    #[error("connection closed mid-frame")]
    Truncated,
}

/// Strips the LF terminator, rejects embedded LFs and parses JSON text.
fn parse_line(bytes: &[u8]) -> Result<Value, WireError> {
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    if body.contains(&b'\n') {
        return Err(WireError::EmbeddedNewline);
    }
    let text = std::str::from_utf8(body).map_err(|_| WireError::Utf8)?;
    serde_json::from_str(text).map_err(|e| WireError::Json(e.to_string()))
}

fn line(value: &Value) -> Vec<u8> {
    let mut out = to_canonical_vec(value);
    out.push(b'\n');
    out
}

fn positive_id(f: &Fields<'_>) -> Result<u64, WireError> {
    match f.u64("id") {
        Ok(0) | Err(FieldError::WrongType(_)) => Err(WireError::BadId),
        Ok(id) => Ok(id),
        Err(e) => Err(e.into()),
    }
}

fn dn_field(f: &Fields<'_>) -> Result<DistinguishedName, WireError> {
    Ok(DistinguishedName::parse(f.str("dn")?)?)
}

impl RequestMessage {
    pub fn new(id: u64, op: Operation) -> Self {
        Self { id, op }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({"id": self.id, "op": self.op.name()});
        match &self.op {
            Operation::Bind { dn, password } => {
                v["dn"] = json!(dn.as_ref().map(ToString::to_string).unwrap_or_default());
                v["password"] = json!(b64_encode(password));
            }
            Operation::Add { entry } => {
                v["dn"] = json!(entry.dn().to_string());
                v["entry"] = body_to_json(entry);
            }
            Operation::Search { dn } | Operation::Delete { dn } => {
                v["dn"] = json!(dn.to_string());
            }
            Operation::Modify {
                dn,
                attribute,
                value,
            } => {
                v["dn"] = json!(dn.to_string());
                v["attribute"] = json!(attribute);
                v["value"] = value.as_ref().map_or(Value::Null, value_to_json);
            }
            Operation::Unbind => {}
        }
        v
    }

    /// Canonical, LF-terminated frame.
    pub fn encode(&self) -> Vec<u8> {
        line(&self.to_json())
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        let value = parse_line(bytes)?;
        let op = Fields::new(
            &value,
            &["id", "op", "dn", "password", "entry", "attribute", "value"],
        )?
        .str("op")?
        .to_string();
        let allowed: &[&str] = match op.as_str() {
            "bind" => &["id", "op", "dn", "password"],
            "add" => &["id", "op", "dn", "entry"],
            "search" | "delete" => &["id", "op", "dn"],
            "modify" => &["id", "op", "dn", "attribute", "value"],
            "unbind" => &["id", "op"],
            _ => return Err(WireError::UnknownOp(op)),
        };
        let f = Fields::new(&value, allowed)?;
        let id = positive_id(&f)?;
        let op = match op.as_str() {
            "bind" => {
                let dn = f.str("dn")?;
                Operation::Bind {
                    dn: if dn.is_empty() {
                        None
                    } else {
                        Some(DistinguishedName::parse(dn)?)
                    },
                    password: f.bytes("password")?,
                }
            }
            "add" => Operation::Add {
                entry: body_from_json(dn_field(&f)?, f.value("entry")?)?,
            },
            "search" => Operation::Search { dn: dn_field(&f)? },
            "delete" => Operation::Delete { dn: dn_field(&f)? },
            "modify" => {
                let raw = f.value("value")?;
                Operation::Modify {
                    dn: dn_field(&f)?,
                    attribute: f.str("attribute")?.to_string(),
                    value: if raw.is_null() {
                        None
                    } else {
                        Some(value_from_json(raw)?)
                    },
                }
            }
            _ => Operation::Unbind,
        };
        Ok(Self { id, op })
    }
}

impl ResponseMessage {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "code": self.code.code(),
            "id": self.id,
            "status": if self.is_ok() { "ok" } else { "err" },
        });
        if let Some(m) = &self.message {
            v["message"] = json!(m);
        }
        if let Some(e) = &self.entry {
            v["entry"] = entry_to_json(e);
        }
        v
    }

    pub fn encode(&self) -> Vec<u8> {
        line(&self.to_json())
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        let value = parse_line(bytes)?;
        let f = Fields::new(&value, &["code", "id", "status", "message", "entry"])?;
        // Id 0 is reserved for errors on frames whose id could not be read.
        let id = f.u64("id")?;
        let raw_code = f.u64("code")?;
        let code = u32::try_from(raw_code)
            .ok()
            .and_then(ResultCode::from_code)
            .ok_or(WireError::UnknownCode(raw_code))?;
        let ok = match f.str("status")? {
            "ok" => true,
            "err" => false,
            _ => return Err(WireError::StatusMismatch),
        };
        if ok != (code == ResultCode::Success) {
            return Err(WireError::StatusMismatch);
        }
        let message = if f.has("message") {
            Some(f.str("message")?.to_string())
        } else {
            None
        };
        let entry = if f.has("entry") {
            Some(entry_from_json(f.value("entry")?)?)
        } else {
            None
        };
        if (ok && message.is_some()) || (!ok && entry.is_some()) {
            return Err(WireError::StatusMismatch);
        }
        Ok(Self {
            id,
            code,
            message,
            entry,
        })
    }
}
