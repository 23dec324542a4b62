use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::dn::DistinguishedName;
use super::result::DirectoryError;
use super::schema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueKind {
    Text,
    Binary,
}

/// A single attribute value. Text values are always valid UTF-8; binary
/// values are arbitrary octets.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttributeValue {
    kind: ValueKind,
    bytes: Vec<u8>,
}

impl AttributeValue {
    pub fn text(value: impl Into<String>) -> Self {
        Self {
            kind: ValueKind::Text,
            bytes: value.into().into_bytes(),
        }
    }

    pub fn binary(bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            kind: ValueKind::Binary,
            bytes: bytes.into(),
        }
    }

    /// Builds a value of the given kind, validating UTF-8 for text.
    pub fn from_parts(kind: ValueKind, bytes: Vec<u8>) -> Result<Self, std::str::Utf8Error> {
        if kind == ValueKind::Text {
            std::str::from_utf8(&bytes)?;
        }
        Ok(Self { kind, bytes })
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn as_text(&self) -> Option<&str> {
        match self.kind {
            ValueKind::Text => Some(std::str::from_utf8(&self.bytes).expect("validated UTF-8")),
            ValueKind::Binary => None,
        }
    }
}

impl fmt::Debug for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_text() {
            Some(t) => write!(f, "Text({t:?})"),
            None => write!(f, "Binary({} octets)", self.bytes.len()),
        }
    }
}

/// A directory entry: its name, object classes and attribute values keyed
/// by canonical attribute name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectoryEntry {
    dn: DistinguishedName,
    object_classes: BTreeSet<String>,
    attributes: BTreeMap<String, Vec<AttributeValue>>,
}

impl DirectoryEntry {
    pub fn new(dn: DistinguishedName) -> Self {
        Self {
            dn,
            object_classes: BTreeSet::new(),
            attributes: BTreeMap::new(),
        }
    }

    pub fn with_class(mut self, class: &str) -> Self {
        self.add_object_class(class);
        self
    }

    pub fn with_value(mut self, name: &str, value: AttributeValue) -> Self {
        self.add_value(name, value);
        self
    }

    pub fn dn(&self) -> &DistinguishedName {
        &self.dn
    }

    pub fn object_classes(&self) -> &BTreeSet<String> {
        &self.object_classes
    }

    pub fn has_object_class(&self, class: &str) -> bool {
        self.object_classes
            .iter()
            .any(|c| c.eq_ignore_ascii_case(class))
    }

    pub fn add_object_class(&mut self, class: &str) {
        if !self.has_object_class(class) {
            self.object_classes.insert(class.to_string());
        }
    }

    pub fn attributes(&self) -> &BTreeMap<String, Vec<AttributeValue>> {
        &self.attributes
    }

    pub fn values(&self, name: &str) -> &[AttributeValue] {
        self.attributes
            .get(&schema::canonical_attribute(name))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn first(&self, name: &str) -> Option<&AttributeValue> {
        self.values(name).first()
    }

    pub fn has(&self, name: &str) -> bool {
        !self.values(name).is_empty()
    }

    pub fn add_value(&mut self, name: &str, value: AttributeValue) {
        self.attributes
            .entry(schema::canonical_attribute(name))
            .or_default()
            .push(value);
    }

    /// Replaces all values of `name`; `None` removes the attribute.
    pub fn replace(&mut self, name: &str, value: Option<AttributeValue>) {
        let name = schema::canonical_attribute(name);
        match value {
            Some(v) => {
                self.attributes.insert(name, vec![v]);
            }
            None => {
                self.attributes.remove(&name);
            }
        }
    }

    pub(crate) fn retain_attributes(&mut self, mut keep: impl FnMut(&str) -> bool) {
        self.attributes.retain(|name, _| keep(name));
    }

    pub(crate) fn clear_object_classes(&mut self) {
        self.object_classes.clear();
    }

    /// Checks the schema constraints every stored entry satisfies.
    pub fn check_schema(&self) -> Result<(), DirectoryError> {
        for (name, values) in &self.attributes {
            if values.is_empty() {
                return Err(DirectoryError::schema(format!(
                    "attribute `{name}` has no values"
                )));
            }
            if schema::is_single_valued(name) && values.len() > 1 {
                return Err(DirectoryError::schema(format!(
                    "attribute `{name}` is SINGLE-VALUE but has {} values",
                    values.len()
                )));
            }
            if schema::requires_pki_user_management(name)
                && !self.has_object_class(schema::PKI_USER_MANAGEMENT)
            {
                return Err(DirectoryError::schema(format!(
                    "attribute `{name}` requires object class `{}`",
                    schema::PKI_USER_MANAGEMENT
                )));
            }
        }
        Ok(())
    }
}
