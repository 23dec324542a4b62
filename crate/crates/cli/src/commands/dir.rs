use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::Subcommand;

use dirpki_core::directory::json::entry_to_json;
use dirpki_core::directory::{hash_password, read_snapshot, write_snapshot, SnapshotError};
use dirpki_core::encoding::to_canonical_vec;

use super::read_secret;
use crate::failure::Failure;
use crate::output::Output;
use crate::CmdResult;

#[derive(Subcommand, Debug)]
pub enum DirCommand {
    /// Write the snapshot's entries, validated and in canonical form.
    Export {
        /// Snapshot file the server uses.
        #[arg(long)]
        snapshot: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replace the snapshot with the entries in a file. Run while the server is stopped.
    Import {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Hash a password for the server configuration.
    HashPassword {
        #[arg(long)]
        password_file: PathBuf,
    },
}

fn snapshot_failure(path: &std::path::Path, e: SnapshotError) -> Failure {
    Failure::new("SNAPSHOT_ERROR", format!("{}: {e}", path.display()))
}

fn load(path: &std::path::Path) -> Result<Vec<dirpki_core::DirectoryEntry>, Failure> {
    let file =
        std::fs::File::open(path).map_err(|e| Failure::io(&path.display().to_string(), e))?;
    read_snapshot(BufReader::new(file)).map_err(|e| snapshot_failure(path, e))
}

pub fn run(cmd: DirCommand, out: Output) -> CmdResult {
    match cmd {
        DirCommand::Export {
            snapshot,
            out: target,
        } => {
            let entries = load(&snapshot)?;
            let mut bytes = Vec::new();
            for entry in &entries {
                bytes.extend(to_canonical_vec(&entry_to_json(entry)));
                bytes.push(b'\n');
            }
            match target {
                Some(path) => {
                    super::write_file(&path, &bytes)?;
                    out.fields(&[("exported", entries.len().into())]);
                }
                None => std::io::stdout()
                    .write_all(&bytes)
                    .map_err(|e| Failure::io("stdout", e))?,
            }
        }
        DirCommand::Import { snapshot, input } => {
            let entries = load(&input)?;
            let n = entries.len();
            write_snapshot(&snapshot, entries).map_err(|e| snapshot_failure(&snapshot, e))?;
            out.fields(&[("imported", n.into())]);
        }
        DirCommand::HashPassword { password_file } => {
            let password = read_secret(&password_file)?;
            let hash = hash_password(&password).map_err(|e| Failure::input(e.to_string()))?;
            out.fields(&[("hash", hash.render().into())]);
        }
    }
    Ok(())
}
