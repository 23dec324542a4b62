pub mod ca;
pub mod client;
pub mod dir;
pub mod serve;

use std::path::Path;

use dirpki_core::directory::{DirectorySession, DistinguishedName};
use dirpki_core::wire::{load_certs, ClientSecurity, ConnectOptions, Connection, ServerTrust};
use zeroize::Zeroizing;

use crate::failure::Failure;
use crate::{AdminArgs, ServerArgs};

pub fn parse_dn(text: &str) -> Result<DistinguishedName, Failure> {
    text.parse()
        .map_err(|e| Failure::input(format!("invalid DN `{text}`: {e}")))
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::io(&path.display().to_string(), e))
}

/// Reads a secret from a file, without one trailing line break.
pub fn read_secret(path: &Path) -> Result<Zeroizing<Vec<u8>>, Failure> {
    let mut bytes = Zeroizing::new(read_file(path)?);
    if bytes.last() == Some(&b'\n') {
        bytes.pop();
        if bytes.last() == Some(&b'\r') {
            bytes.pop();
        }
    }
    if bytes.is_empty() {
        return Err(Failure::input(format!("{} is empty", path.display())));
    }
    Ok(bytes)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::io(&path.display().to_string(), e))
}

pub fn write_private(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    dirpki_core::files::write_private(path, bytes)
        .map_err(|e| Failure::io(&path.display().to_string(), e))
}

pub fn connect(args: &ServerArgs) -> Result<Connection, Failure> {
    let security = if args.tls {
        let trust = match (&args.pin, &args.tls_roots) {
            (Some(pin), _) => ServerTrust::Pinned(pin.clone()),
            (None, Some(path)) => ServerTrust::Roots(
                load_certs(path).map_err(|e| Failure::io(&path.display().to_string(), e))?,
            ),
            (None, None) => return Err(Failure::input("--tls needs --pin or --tls-roots")),
        };
        ClientSecurity::Tls {
            server_name: args.server_name.clone(),
            trust,
        }
    } else if args.assume_secure {
        ClientSecurity::AssumeSecure
    } else {
        ClientSecurity::Plaintext
    };
    Connection::connect(&ConnectOptions {
        address: args.server.clone(),
        security,
    })
    .map_err(|e| Failure::new("TRANSPORT_ERROR", format!("{}: {e}", args.server)))
}

pub fn admin_connection(server: &ServerArgs, admin: &AdminArgs) -> Result<Connection, Failure> {
    let mut conn = connect(server)?;
    let dn = parse_dn(&admin.admin_dn)?;
    let password = read_secret(&admin.admin_password_file)?;
    conn.bind(Some(&dn), &password)?;
    Ok(conn)
}
