//! JSON-text form of entries, shared by the wire protocol and the snapshot
//! file. Values are tagged objects: `{"kind":"text","value":"..."}` or
//! `{"kind":"binary","value":"<base64>"}`.

use serde_json::{json, Map, Value};

use super::dn::DistinguishedName;
use super::entry::{AttributeValue, DirectoryEntry, ValueKind};
use crate::encoding::{b64_encode, FieldError, Fields};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EntryJsonError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid distinguished name: {0}")]
    Dn(#[from] super::dn::DnError),
    #[error("unknown value kind `{0}`")]
    UnknownKind(String),
    #[error("text value is not valid UTF-8")]
    Utf8,
}

pub fn value_to_json(value: &AttributeValue) -> Value {
    match value.as_text() {
        Some(text) => json!({"kind": "text", "value": text}),
        None => json!({"kind": "binary", "value": b64_encode(value.as_bytes())}),
    }
}

pub fn value_from_json(v: &Value) -> Result<AttributeValue, EntryJsonError> {
    let f = Fields::new(v, &["kind", "value"])?;
    match f.str("kind")? {
        "text" => Ok(AttributeValue::text(f.str("value")?)),
        "binary" => AttributeValue::from_parts(ValueKind::Binary, f.bytes("value")?)
            .map_err(|_| EntryJsonError::Utf8),
        other => Err(EntryJsonError::UnknownKind(other.to_string())),
    }
}

/// Attribute map and object classes, without the DN.
pub fn body_to_json(entry: &DirectoryEntry) -> Value {
    let attributes: Map<String, Value> = entry
        .attributes()
        .iter()
        .map(|(name, values)| {
            (
                name.clone(),
                Value::Array(values.iter().map(value_to_json).collect()),
            )
        })
        .collect();
    json!({
        "attributes": attributes,
        "objectClasses": entry.object_classes().iter().collect::<Vec<_>>(),
    })
}

pub fn body_from_json(dn: DistinguishedName, v: &Value) -> Result<DirectoryEntry, EntryJsonError> {
    let f = Fields::new(v, &["attributes", "objectClasses"])?;
    let mut entry = DirectoryEntry::new(dn);
    for class in f.array("objectClasses")? {
        let class = class
            .as_str()
            .ok_or(FieldError::WrongType("objectClasses"))?;
        entry.add_object_class(class);
    }
    for (name, values) in f.object("attributes")? {
        let values = values
            .as_array()
            .ok_or(FieldError::WrongType("attributes"))?;
        for value in values {
            entry.add_value(name, value_from_json(value)?);
        }
    }
    Ok(entry)
}

pub fn entry_to_json(entry: &DirectoryEntry) -> Value {
    let mut v = body_to_json(entry);
    v["dn"] = Value::String(entry.dn().to_string());
    v
}

pub fn entry_from_json(v: &Value) -> Result<DirectoryEntry, EntryJsonError> {
    let f = Fields::new(v, &["attributes", "dn", "objectClasses"])?;
    let dn = DistinguishedName::parse(f.str("dn")?)?;
    let mut body = v.as_object().cloned().unwrap_or_default();
    body.remove("dn");
    body_from_json(dn, &Value::Object(body))
}
