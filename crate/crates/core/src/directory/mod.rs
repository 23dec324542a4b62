//! Directory with LDAP semantics: named entries, per-attribute access
//! control, salted password hashes and simple bind gated on channel
//! security.

pub mod acl;
pub mod dn;
pub mod entry;
pub mod json;
pub mod password;
pub mod result;
pub mod schema;
pub mod session;
pub mod store;

pub use acl::{Access, Acl, AclRule, AttributeSelector, Requester, Subject, Target};
pub use dn::{DistinguishedName, DnError};
pub use entry::{AttributeValue, DirectoryEntry, ValueKind};
pub use password::{hash_password, verify_password, PasswordHash, PasswordHashError};
pub use result::{DirectoryError, ResultCode};
pub use session::{DirectorySession, LocalSession, SessionError};
pub use store::{
    read_snapshot, write_snapshot, AdminIdentity, BindState, Directory, SnapshotError,
};
