//! Canonical JSON text and base64 helpers shared by the wire format, the
//! snapshot file and every serialized crypto artifact.
//!
//! Canonical form: object keys sorted lexicographically by their UTF-8
//! bytes, no insignificant whitespace, binary data as standard padded
//! base64.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde_json::{Map, Value};

/// Renders a JSON value in canonical form.
///
/// `serde_json::Map` is backed by a `BTreeMap` in this build, so
/// serialization already emits keys in sorted order.
pub fn to_canonical_vec(value: &Value) -> Vec<u8> {
    serde_json::to_vec(value).expect("serializing a JSON value cannot fail")
}

pub fn to_canonical_string(value: &Value) -> String {
    serde_json::to_string(value).expect("serializing a JSON value cannot fail")
}

pub fn b64_encode(bytes: &[u8]) -> String {
    STANDARD.encode(bytes)
}

/// Strict decode: rejects missing padding and non-zero trailing bits, so
/// every byte string has exactly one accepted encoding.
pub fn b64_decode(text: &str) -> Result<Vec<u8>, base64::DecodeError> {
    STANDARD.decode(text)
}

/// Error raised while picking fields out of a JSON object.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("expected a JSON object")]
    NotAnObject,
    #[error("missing field `{0}`")]
    Missing(&'static str),
    #[error("unknown field `{0}`")]
    Unknown(String),
    #[error("field `{0}` has the wrong type")]
    WrongType(&'static str),
    #[error("field `{0}` is not valid base64")]
    Base64(&'static str),
}

/// Strict accessor over a JSON object: every lookup is typed and the set of
/// permitted keys is checked up front.
pub struct Fields<'a> {
    map: &'a Map<String, Value>,
}

impl<'a> Fields<'a> {
    pub fn new(value: &'a Value, allowed: &[&str]) -> Result<Self, FieldError> {
        let map = value.as_object().ok_or(FieldError::NotAnObject)?;
        if let Some(extra) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(FieldError::Unknown(extra.clone()));
        }
        Ok(Self { map })
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn value(&self, key: &'static str) -> Result<&'a Value, FieldError> {
        self.map.get(key).ok_or(FieldError::Missing(key))
    }

    pub fn str(&self, key: &'static str) -> Result<&'a str, FieldError> {
        self.value(key)?.as_str().ok_or(FieldError::WrongType(key))
    }

    pub fn u64(&self, key: &'static str) -> Result<u64, FieldError> {
        self.value(key)?.as_u64().ok_or(FieldError::WrongType(key))
    }

    pub fn bytes(&self, key: &'static str) -> Result<Vec<u8>, FieldError> {
        b64_decode(self.str(key)?).map_err(|_| FieldError::Base64(key))
    }

    pub fn array(&self, key: &'static str) -> Result<&'a Vec<Value>, FieldError> {
        self.value(key)?
            .as_array()
            .ok_or(FieldError::WrongType(key))
    }

    pub fn object(&self, key: &'static str) -> Result<&'a Map<String, Value>, FieldError> {
        self.value(key)?
            .as_object()
            .ok_or(FieldError::WrongType(key))
    }
}
