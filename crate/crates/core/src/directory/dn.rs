use std::fmt;
use std::str::FromStr;

/// A distinguished name: relative distinguished names ordered most-specific
/// first, e.g. `cn=John Doe,ou=people,dc=example,dc=com`.
///
/// Attribute names are stored case-folded and values whitespace-trimmed, so
/// derived equality is the directory's name-matching rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DistinguishedName {
    rdns: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DnError {
    #[error("distinguished name is empty")]
    Empty,
    #[error("RDN `{0}` is missing `=`")]
    MissingEquals(String),
    #[error("RDN `{0}` has an invalid attribute name")]
    BadAttribute(String),
    #[error("RDN `{0}` has an empty value")]
    EmptyValue(String),
    #[error("dangling escape at end of distinguished name")]
    DanglingEscape,
}

fn valid_attribute_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '-')
}

impl DistinguishedName {
    pub fn new<I, A, V>(rdns: I) -> Result<Self, DnError>
    where
        I: IntoIterator<Item = (A, V)>,
        A: AsRef<str>,
        V: AsRef<str>,
    {
        let mut out = Vec::new();
        for (attr, value) in rdns {
            let attr = attr.as_ref().trim();
            let value = value.as_ref().trim();
            let raw = format!("{attr}={value}");
            if !valid_attribute_name(attr) {
                return Err(DnError::BadAttribute(raw));
            }
            if value.is_empty() {
                return Err(DnError::EmptyValue(raw));
            }
            out.push((attr.to_ascii_lowercase(), value.to_string()));
        }
        if out.is_empty() {
            return Err(DnError::Empty);
        }
        Ok(Self { rdns: out })
    }

    pub fn parse(text: &str) -> Result<Self, DnError> {
        let mut components = Vec::new();
        let mut current = String::new();
        let mut chars = text.chars();
        while let Some(c) = chars.next() {
            match c {
                '\\' => {
                    let escaped = chars.next().ok_or(DnError::DanglingEscape)?;
                    // Keep the escape so `=` inside a value survives splitting.
                    current.push('\\');
                    current.push(escaped);
                }
                ',' => components.push(std::mem::take(&mut current)),
                _ => current.push(c),
            }
        }
        components.push(current);
        if components.len() == 1 && components[0].trim().is_empty() {
            return Err(DnError::Empty);
        }

        let mut rdns = Vec::with_capacity(components.len());
        for component in components {
            let eq = find_unescaped_equals(&component)
                .ok_or_else(|| DnError::MissingEquals(component.clone()))?;
            let attr = &component[..eq];
            let value = unescape(&component[eq + 1..]);
            rdns.push((attr.to_string(), value));
        }
        Self::new(rdns)
    }

    pub fn rdns(&self) -> &[(String, String)] {
        &self.rdns
    }

    /// The naming attribute and value of the most specific RDN.
    pub fn leaf(&self) -> (&str, &str) {
        let (a, v) = &self.rdns[0];
        (a, v)
    }

    pub fn parent(&self) -> Option<DistinguishedName> {
        (self.rdns.len() > 1).then(|| Self {
            rdns: self.rdns[1..].to_vec(),
        })
    }

    /// True when `self` equals `base` or lies below it.
    pub fn is_within(&self, base: &DistinguishedName) -> bool {
        self.rdns.len() >= base.rdns.len() && self.rdns.ends_with(&base.rdns)
    }

    pub fn child(&self, attr: &str, value: &str) -> Result<Self, DnError> {
        let mut rdns = vec![(attr.to_string(), value.to_string())];
        rdns.extend(self.rdns.iter().cloned());
        Self::new(rdns)
    }
}

fn find_unescaped_equals(s: &str) -> Option<usize> {
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' => escaped = true,
            '=' => return Some(i),
            _ => {}
        }
    }
    None
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn escape_value(value: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for c in value.chars() {
        if matches!(c, ',' | '\\' | '=') {
            write!(f, "\\")?;
        }
        write!(f, "{c}")?;
    }
    Ok(())
}

impl fmt::Display for DistinguishedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (attr, value)) in self.rdns.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{attr}=")?;
            escape_value(value, f)?;
        }
        Ok(())
    }
}

impl FromStr for DistinguishedName {
    type Err = DnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}
