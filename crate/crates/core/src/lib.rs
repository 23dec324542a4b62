//! Directory-mediated certificate management.
//!
//! Two provisioning flows share one directory:
//!
//! * **Indirect proof-of-possession.** The CA issues a certificate for an
//!   encryption key, stores it encrypted under that same key together with
//!   an encrypted bind password, and the key holder activates it by
//!   decrypting both and writing the plain certificate back to its own
//!   entry. No confirmation message returns to the CA.
//! * **PSE delivery.** The CA generates the key pair, seals it in a
//!   password-protected container and places it in the owner's
//!   `userPKCS12` attribute, readable only by the owner over a secure
//!   channel.
//!
//! Modules: [`directory`] (entries, ACLs, bind), [`wire`] (NDJSON protocol,
//! TCP/TLS server and client), [`crypto`] (keys, hybrid envelope,
//! certificates, PSE container), [`ca`] (provisioning and policy) and
//! [`agent`] (the end-entity side).

pub mod agent;
pub mod ca;
pub mod clock;
pub mod crypto;
pub mod directory;
pub mod encoding;
pub mod files;
pub mod wire;

pub use directory::{
    AttributeValue, DirectoryEntry, DirectoryError, DirectorySession, DistinguishedName, ResultCode,
};
