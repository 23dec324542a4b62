use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use log::{debug, warn};

use super::acl::{Access, Acl, Requester};
use super::dn::DistinguishedName;
use super::entry::{AttributeValue, DirectoryEntry};
use super::json::{entry_from_json, entry_to_json};
use super::password::{verify_password, PasswordHash};
use super::result::{DirectoryError, ResultCode};
use super::schema;
use crate::encoding::to_canonical_vec;

/// Authentication state of one connection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindState {
    bound: Option<DistinguishedName>,
    channel_secure: bool,
}

impl BindState {
    pub fn anonymous(channel_secure: bool) -> Self {
        Self {
            bound: None,
            channel_secure,
        }
    }

    pub fn bound_dn(&self) -> Option<&DistinguishedName> {
        self.bound.as_ref()
    }

    pub fn is_anonymous(&self) -> bool {
        self.bound.is_none()
    }

    pub fn channel_secure(&self) -> bool {
        self.channel_secure
    }
}

/// Identity of the directory superuser. It lives outside the user tree and
/// is not an entry.
#[derive(Debug, Clone)]
pub struct AdminIdentity {
    pub dn: DistinguishedName,
    pub password: PasswordHash,
}

type EntryMap = BTreeMap<DistinguishedName, DirectoryEntry>;

/// In-memory directory with optional snapshot persistence.
///
/// All mutations go through the write half of one lock, so they are
/// serialized and each read observes the latest committed mutation.
pub struct Directory {
    admin: AdminIdentity,
    acl: RwLock<Acl>,
    entries: RwLock<EntryMap>,
    snapshot: Option<PathBuf>,
}

impl std::fmt::Debug for Directory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Directory")
            .field("admin", &self.admin.dn.to_string())
            .field("entries", &self.entries.read().unwrap().len())
            .field("snapshot", &self.snapshot)
            .finish()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("snapshot line {line}: {source}")]
    Schema {
        line: usize,
        #[source]
        source: DirectoryError,
    },
    #[error("snapshot contains `{0}` twice")]
    Duplicate(String),
}

impl Directory {
    pub fn new(admin: AdminIdentity) -> Self {
        Self {
            admin,
            acl: RwLock::new(Acl::default()),
            entries: RwLock::new(BTreeMap::new()),
            snapshot: None,
        }
    }

    /// Opens a directory persisted at `path`, loading it if the file exists.
    /// Every later mutation rewrites the file before it is acknowledged.
    pub fn with_snapshot(
        admin: AdminIdentity,
        path: impl Into<PathBuf>,
    ) -> Result<Self, SnapshotError> {
        let path = path.into();
        let mut dir = Self::new(admin);
        if path.exists() {
            let file = std::fs::File::open(&path)?;
            dir.import(std::io::BufReader::new(file))?;
        }
        dir.snapshot = Some(path);
        Ok(dir)
    }

    /// Sets the initial rule list, before the directory is shared.
    pub fn with_acl(self, acl: Acl) -> Self {
        *self.acl.write().unwrap() = acl;
        self
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn admin_dn(&self) -> &DistinguishedName {
        &self.admin.dn
    }

    fn requester(&self, state: &BindState) -> Requester {
        match &state.bound {
            None => Requester::Anonymous,
            Some(dn) if *dn == self.admin.dn => Requester::Admin(dn.clone()),
            Some(dn) => Requester::User(dn.clone()),
        }
    }

    pub fn is_admin(&self, state: &BindState) -> bool {
        matches!(self.requester(state), Requester::Admin(_))
    }

    pub fn acl(&self) -> Acl {
        self.acl.read().unwrap().clone()
    }

    /// Replaces the rule list. Only the administrator may do this.
    pub fn install_acl(&self, acl: Acl, requester: &BindState) -> Result<(), DirectoryError> {
        if !self.is_admin(requester) {
            return Err(DirectoryError::access_denied(
                "only the administrator may install ACLs",
            ));
        }
        *self.acl.write().unwrap() = acl;
        Ok(())
    }

    /// Simple bind. An empty DN with an empty password is an anonymous bind.
    pub fn simple_bind(
        &self,
        dn: Option<&DistinguishedName>,
        password: &[u8],
        channel_secure: bool,
    ) -> Result<BindState, DirectoryError> {
        if !password.is_empty() && !channel_secure {
            return Err(DirectoryError::new(
                ResultCode::ConfidentialityRequired,
                "password bind requires a secure channel",
            ));
        }
        let Some(dn) = dn else {
            if password.is_empty() {
                return Ok(BindState::anonymous(channel_secure));
            }
            return Err(DirectoryError::new(
                ResultCode::InvalidCredentials,
                "password without a DN",
            ));
        };
        if password.is_empty() {
            return Err(DirectoryError::new(
                ResultCode::UnwillingToPerform,
                "unauthenticated bind (DN without password) is disabled",
            ));
        }

        let ok = if *dn == self.admin.dn {
            self.admin.password.verify(password)
        } else {
            let entries = self.entries.read().unwrap();
            entries
                .get(dn)
                .and_then(|e| e.first(schema::USER_PASSWORD))
                .and_then(AttributeValue::as_text)
                .is_some_and(|stored| verify_password(password, stored))
        };
        if !ok {
            debug!("bind as {dn} failed");
            return Err(DirectoryError::new(
                ResultCode::InvalidCredentials,
                "invalid credentials",
            ));
        }
        Ok(BindState {
            bound: Some(dn.clone()),
            channel_secure,
        })
    }

    pub fn add_entry(
        &self,
        entry: DirectoryEntry,
        requester: &BindState,
    ) -> Result<(), DirectoryError> {
        let who = self.requester(requester);
        let acl = self.acl.read().unwrap().clone();
        let dn = entry.dn().clone();
        let writable = |attr: &str| acl.allows(&who, &dn, attr, Access::Write);
        if !writable(schema::ENTRY) || !writable(schema::OBJECT_CLASS) {
            return Err(DirectoryError::access_denied(format!(
                "may not create `{dn}`"
            )));
        }
        if let Some(attr) = entry.attributes().keys().find(|a| !writable(a)) {
            return Err(DirectoryError::access_denied(format!(
                "may not write `{attr}` on `{dn}`"
            )));
        }
        if entry.has(schema::OBJECT_CLASS) {
            return Err(DirectoryError::schema(
                "objectClass must be given as object classes",
            ));
        }
        entry.check_schema()?;

        let mut entries = self.entries.write().unwrap();
        if entries.contains_key(&dn) {
            return Err(DirectoryError::new(
                ResultCode::EntryAlreadyExists,
                format!("`{dn}` already exists"),
            ));
        }
        entries.insert(dn.clone(), entry);
        self.commit(&mut entries, &dn, None)
    }

    /// Returns the entry with only the attributes `requester` may read.
    pub fn search_entry(
        &self,
        dn: &DistinguishedName,
        requester: &BindState,
    ) -> Result<DirectoryEntry, DirectoryError> {
        let who = self.requester(requester);
        let acl = self.acl.read().unwrap().clone();
        let mut entry = self
            .entries
            .read()
            .unwrap()
            .get(dn)
            .cloned()
            .ok_or_else(|| DirectoryError::no_such_object(dn))?;
        let is_admin = matches!(who, Requester::Admin(_));
        entry.retain_attributes(|attr| {
            // Password hashes are never disclosed to non-admins, whatever rules are installed.
            (is_admin || attr != schema::USER_PASSWORD) && acl.allows(&who, dn, attr, Access::Read)
        });
        if !acl.allows(&who, dn, schema::OBJECT_CLASS, Access::Read) {
            entry.clear_object_classes();
        }
        Ok(entry)
    }

    /// Replaces `attribute` with `value`, or removes it when `value` is `None`.
    pub fn modify_attribute(
        &self,
        dn: &DistinguishedName,
        attribute: &str,
        value: Option<AttributeValue>,
        requester: &BindState,
    ) -> Result<(), DirectoryError> {
        let who = self.requester(requester);
        let attribute = schema::canonical_attribute(attribute);
        let acl = self.acl.read().unwrap().clone();
        let mut entries = self.entries.write().unwrap();
        let entry = entries
            .get_mut(dn)
            .ok_or_else(|| DirectoryError::no_such_object(dn))?;
        if !acl.allows(&who, dn, &attribute, Access::Write) {
            return Err(DirectoryError::access_denied(format!(
                "may not write `{attribute}` on `{dn}`"
            )));
        }
        if attribute == schema::OBJECT_CLASS {
            return Err(DirectoryError::schema("objectClass cannot be modified"));
        }
        let before = entry.clone();
        entry.replace(&attribute, value);
        if let Err(e) = entry.check_schema() {
            *entry = before;
            return Err(e);
        }
        self.commit(&mut entries, dn, Some(before))
    }

    pub fn delete_entry(
        &self,
        dn: &DistinguishedName,
        requester: &BindState,
    ) -> Result<(), DirectoryError> {
        let who = self.requester(requester);
        let acl = self.acl.read().unwrap().clone();
        let mut entries = self.entries.write().unwrap();
        if !entries.contains_key(dn) {
            return Err(DirectoryError::no_such_object(dn));
        }
        if !acl.allows(&who, dn, schema::ENTRY, Access::Write) {
            return Err(DirectoryError::access_denied(format!(
                "may not delete `{dn}`"
            )));
        }
        let before = entries.remove(dn);
        self.commit(&mut entries, dn, before)
    }

    /// Persists the map after a mutation of `dn`; on failure restores
    /// `before` so memory and disk stay in step.
    fn commit(
        &self,
        entries: &mut EntryMap,
        dn: &DistinguishedName,
        before: Option<DirectoryEntry>,
    ) -> Result<(), DirectoryError> {
        let Some(path) = &self.snapshot else {
            return Ok(());
        };
        if let Err(e) = write_snapshot_file(path, entries) {
            warn!("snapshot write to {} failed: {e}", path.display());
            match before {
                Some(b) => entries.insert(dn.clone(), b),
                None => entries.remove(dn),
            };
            return Err(DirectoryError::new(
                ResultCode::UnwillingToPerform,
                "could not persist the change",
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unfiltered copy of an entry, for in-process inspection and audits.
    pub fn raw_entry(&self, dn: &DistinguishedName) -> Option<DirectoryEntry> {
        self.entries.read().unwrap().get(dn).cloned()
    }

    /// Writes every entry as one canonical JSON line, ordered by DN.
    pub fn export(&self, mut out: impl Write) -> std::io::Result<()> {
        let entries = self.entries.read().unwrap();
        write_entries(&mut out, &entries)
    }

    /// Replaces the directory contents with the entries read from `input`.
    pub fn import(&self, input: impl BufRead) -> Result<usize, SnapshotError> {
        let parsed = read_entries(input)?;
        let n = parsed.len();
        *self.entries.write().unwrap() = parsed;
        Ok(n)
    }
}

fn write_entries(out: &mut impl Write, entries: &EntryMap) -> std::io::Result<()> {
    for entry in entries.values() {
        out.write_all(&to_canonical_vec(&entry_to_json(entry)))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

fn write_snapshot_file(path: &Path, entries: &EntryMap) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
        write_entries(&mut f, entries)?;
        f.flush()?;
        f.get_ref().sync_all()?;
    }
    std::fs::rename(tmp, path)
}

/// Parses and validates a snapshot; entries come back in DN order.
pub fn read_snapshot(input: impl BufRead) -> Result<Vec<DirectoryEntry>, SnapshotError> {
    Ok(read_entries(input)?.into_values().collect())
}

/// Atomically replaces `path` with `entries` in canonical snapshot form.
pub fn write_snapshot(path: &Path, entries: Vec<DirectoryEntry>) -> Result<(), SnapshotError> {
    let mut map = BTreeMap::new();
    for entry in entries {
        let dn = entry.dn().clone();
        if map.insert(dn.clone(), entry).is_some() {
            return Err(SnapshotError::Duplicate(dn.to_string()));
        }
    }
    Ok(write_snapshot_file(path, &map)?)
}

fn read_entries(input: impl BufRead) -> Result<EntryMap, SnapshotError> {
    let mut map = BTreeMap::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| SnapshotError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        let entry = entry_from_json(&value).map_err(|e| SnapshotError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        entry
            .check_schema()
            .map_err(|source| SnapshotError::Schema {
                line: line_no,
                source,
            })?;
        let dn = entry.dn().clone();
        if map.insert(dn.clone(), entry).is_some() {
            return Err(SnapshotError::Duplicate(dn.to_string()));
        }
    }
    Ok(map)
}
