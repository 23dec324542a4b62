//! Ordered, first-match access control rules evaluated per attribute.

use std::fmt;

use super::dn::DistinguishedName;
use super::schema;

/// Who a rule applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subject {
    Anonymous,
    /// A bound user acting on the entry named by its own bind DN.
    SelfEntry,
    /// Any bound identity, including the administrator.
    Authenticated,
    Admin,
}

/// Which entries a rule applies to.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    ExactDn(DistinguishedName),
    Subtree(DistinguishedName),
    /// The entry named by the requester's bind DN.
    OwnEntry,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AttributeSelector {
    Any,
    Named(String),
}

impl AttributeSelector {
    pub fn named(name: &str) -> Self {
        Self::Named(schema::canonical_attribute(name))
    }

    fn matches(&self, canonical: &str) -> bool {
        match self {
            AttributeSelector::Any => true,
            AttributeSelector::Named(n) => n == canonical,
        }
    }
}

/// Access levels; each level includes the ones below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Access {
    None,
    Read,
    Write,
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Access::None => "none",
            Access::Read => "read",
            Access::Write => "write",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AclRule {
    pub subject: Subject,
    pub target: Target,
    pub attribute: AttributeSelector,
    pub access: Access,
}

impl AclRule {
    pub fn new(
        subject: Subject,
        target: Target,
        attribute: AttributeSelector,
        access: Access,
    ) -> Self {
        Self {
            subject,
            target,
            attribute,
            access,
        }
    }
}

/// The identity an access decision is made for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Requester {
    Anonymous,
    User(DistinguishedName),
    Admin(DistinguishedName),
}

impl Requester {
    pub fn bound_dn(&self) -> Option<&DistinguishedName> {
        match self {
            Requester::Anonymous => None,
            Requester::User(dn) | Requester::Admin(dn) => Some(dn),
        }
    }
}

impl AclRule {
    fn matches(&self, who: &Requester, entry: &DistinguishedName, attribute: &str) -> bool {
        let subject_ok = match (self.subject, who) {
            (Subject::Anonymous, Requester::Anonymous) => true,
            (Subject::SelfEntry, Requester::User(dn)) => dn == entry,
            (Subject::Authenticated, Requester::User(_) | Requester::Admin(_)) => true,
            (Subject::Admin, Requester::Admin(_)) => true,
            _ => false,
        };
        let target_ok = match &self.target {
            Target::ExactDn(dn) => dn == entry,
            Target::Subtree(base) => entry.is_within(base),
            Target::OwnEntry => who.bound_dn() == Some(entry),
        };
        subject_ok && target_ok && self.attribute.matches(attribute)
    }
}

/// An ordered rule list. The first rule matching subject, target and
/// attribute decides; when nothing matches, access is denied.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Acl {
    rules: Vec<AclRule>,
}

impl Acl {
    pub fn new(rules: Vec<AclRule>) -> Self {
        Self { rules }
    }

    pub fn rules(&self) -> &[AclRule] {
        &self.rules
    }

    /// The level granted by the first matching rule, or `Access::None`.
    pub fn granted(&self, who: &Requester, entry: &DistinguishedName, attribute: &str) -> Access {
        let attribute = schema::canonical_attribute(attribute);
        self.rules
            .iter()
            .find(|r| r.matches(who, entry, &attribute))
            .map_or(Access::None, |r| r.access)
    }

    pub fn allows(
        &self,
        who: &Requester,
        entry: &DistinguishedName,
        attribute: &str,
        access: Access,
    ) -> bool {
        access != Access::None && self.granted(who, entry, attribute) >= access
    }
}
