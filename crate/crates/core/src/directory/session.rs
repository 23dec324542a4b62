use std::sync::Arc;

use super::dn::DistinguishedName;
use super::entry::{AttributeValue, DirectoryEntry};
use super::result::{DirectoryError, ResultCode};
use super::store::{BindState, Directory};

/// Failure of a directory operation issued through a session.
#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    Directory(#[from] DirectoryError),
    #[error("transport failure: {0}")]
    Transport(String),
}

impl SessionError {
    /// The LDAP result code, when the server produced one.
    pub fn code(&self) -> Option<ResultCode> {
        match self {
            SessionError::Directory(e) => Some(e.code),
            SessionError::Transport(_) => None,
        }
    }
}

/// One authenticated conversation with a directory, local or remote.
///
/// A fresh session is anonymous. A failed bind leaves it anonymous.
pub trait DirectorySession {
    fn channel_secure(&self) -> bool;

    fn bind(&mut self, dn: Option<&DistinguishedName>, password: &[u8])
        -> Result<(), SessionError>;

    fn add(&mut self, entry: &DirectoryEntry) -> Result<(), SessionError>;

    fn search(&mut self, dn: &DistinguishedName) -> Result<DirectoryEntry, SessionError>;

    fn modify(
        &mut self,
        dn: &DistinguishedName,
        attribute: &str,
        value: Option<AttributeValue>,
    ) -> Result<(), SessionError>;

    fn delete(&mut self, dn: &DistinguishedName) -> Result<(), SessionError>;

    fn unbind(&mut self) -> Result<(), SessionError>;
}

/// In-process session against a shared [`Directory`].
#[derive(Debug, Clone)]
pub struct LocalSession {
    directory: Arc<Directory>,
    state: BindState,
}

impl LocalSession {
    pub fn new(directory: Arc<Directory>, channel_secure: bool) -> Self {
        Self {
            directory,
            state: BindState::anonymous(channel_secure),
        }
    }

    pub fn state(&self) -> &BindState {
        &self.state
    }

    pub fn directory(&self) -> &Arc<Directory> {
        &self.directory
    }
}

impl DirectorySession for LocalSession {
    fn channel_secure(&self) -> bool {
        self.state.channel_secure()
    }

    fn bind(
        &mut self,
        dn: Option<&DistinguishedName>,
        password: &[u8],
    ) -> Result<(), SessionError> {
        let secure = self.state.channel_secure();
        self.state = BindState::anonymous(secure);
        self.state = self.directory.simple_bind(dn, password, secure)?;
        Ok(())
    }

    fn add(&mut self, entry: &DirectoryEntry) -> Result<(), SessionError> {
        Ok(self.directory.add_entry(entry.clone(), &self.state)?)
    }

    fn search(&mut self, dn: &DistinguishedName) -> Result<DirectoryEntry, SessionError> {
        Ok(self.directory.search_entry(dn, &self.state)?)
    }

    fn modify(
        &mut self,
        dn: &DistinguishedName,
        attribute: &str,
        value: Option<AttributeValue>,
    ) -> Result<(), SessionError> {
        Ok(self
            .directory
            .modify_attribute(dn, attribute, value, &self.state)?)
    }

    fn delete(&mut self, dn: &DistinguishedName) -> Result<(), SessionError> {
        Ok(self.directory.delete_entry(dn, &self.state)?)
    }

    fn unbind(&mut self) -> Result<(), SessionError> {
        self.state = BindState::anonymous(self.state.channel_secure());
        Ok(())
    }
}
