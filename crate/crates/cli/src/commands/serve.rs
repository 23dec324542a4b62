use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use serde::Deserialize;

use dirpki_core::ca::standard_acl;
use dirpki_core::directory::{AdminIdentity, Directory, PasswordHash};
use dirpki_core::wire::{
    certificate_fingerprint, load_certs, load_private_key, server_config, spawn_listener,
    ListenerSecurity,
};

use super::parse_dn;
use crate::failure::Failure;
use crate::output::Output;
use crate::CmdResult;

#[derive(Args, Debug)]
pub struct ServeArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Treat plain TCP connections as secure. Testing only.
    #[arg(long)]
    assume_secure: bool,
    /// Plain TCP listen address.
    #[arg(long)]
    listen: Option<String>,
    /// TLS listen address.
    #[arg(long)]
    tls_listen: Option<String>,
    /// PEM certificate chain for the TLS listener.
    #[arg(long)]
    tls_cert: Option<PathBuf>,
    /// PEM private key for the TLS listener.
    #[arg(long)]
    tls_key: Option<PathBuf>,
    #[arg(long)]
    admin_dn: Option<String>,
    /// `{SSHA256}` hash of the administrator password.
    #[arg(long)]
    admin_password_hash: Option<String>,
    /// Subtree the administrator manages.
    #[arg(long)]
    base_dn: Option<String>,
    /// NDJSON file the directory is loaded from and saved to.
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ServeConfig {
    #[serde(default)]
    listen: Option<String>,
    #[serde(default)]
    tls_listen: Option<String>,
    #[serde(default)]
    tls_cert: Option<PathBuf>,
    #[serde(default)]
    tls_key: Option<PathBuf>,
    #[serde(default)]
    admin_dn: Option<String>,
    #[serde(default)]
    admin_password_hash: Option<String>,
    #[serde(default)]
    base_dn: Option<String>,
    #[serde(default)]
    snapshot: Option<PathBuf>,
}

fn load_config(path: &Path) -> Result<ServeConfig, Failure> {
    let text = super::read_file(path)?;
    let mut config: ServeConfig = serde_json::from_slice(&text)
        .map_err(|e| Failure::new("CONFIG_ERROR", format!("{}: {e}", path.display())))?;
    // Relative paths are relative to the config file.
    let base = path.parent().unwrap_or(Path::new("."));
    for p in [
        &mut config.tls_cert,
        &mut config.tls_key,
        &mut config.snapshot,
    ]
    .into_iter()
    .flatten()
    {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    Ok(config)
}

fn required<T>(value: Option<T>, name: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::new("CONFIG_ERROR", format!("`{name}` is not configured")))
}

pub fn run(args: ServeArgs, out: Output) -> CmdResult {
    let config = match &args.config {
        Some(path) => load_config(path)?,
        None => ServeConfig::default(),
    };
    let admin_dn = parse_dn(&required(args.admin_dn.or(config.admin_dn), "adminDn")?)?;
    let hash: PasswordHash = required(
        args.admin_password_hash.or(config.admin_password_hash),
        "adminPasswordHash",
    )?
    .parse()
    .map_err(|e| Failure::new("CONFIG_ERROR", format!("adminPasswordHash: {e}")))?;
    let base_dn = parse_dn(&required(args.base_dn.or(config.base_dn), "baseDn")?)?;
    let admin = AdminIdentity {
        dn: admin_dn,
        password: hash,
    };
    let directory = match args.snapshot.or(config.snapshot) {
        Some(path) => Directory::with_snapshot(admin, &path)
            .map_err(|e| Failure::new("SNAPSHOT_ERROR", format!("{}: {e}", path.display())))?,
        None => Directory::new(admin),
    }
    .with_acl(standard_acl(&base_dn))
    .into_shared();

    let tls_listen = args.tls_listen.or(config.tls_listen);
    let mut listen = args.listen.or(config.listen);
    if listen.is_none() && tls_listen.is_none() {
        listen = Some(format!(
            "127.0.0.1:{}",
            dirpki_core::wire::DEFAULT_PLAINTEXT_PORT
        ));
    }

    let mut handles = Vec::new();
    if let Some(addr) = listen {
        let security = if args.assume_secure {
            ListenerSecurity::AssumeSecure
        } else {
            ListenerSecurity::Plaintext
        };
        let label = if args.assume_secure {
            "assume-secure"
        } else {
            "plaintext"
        };
        let handle = spawn_listener(Arc::clone(&directory), addr.as_str(), security)
            .map_err(|e| Failure::io(&addr, e))?;
        out.fields(&[
            ("listening", handle.local_addr().to_string().into()),
            ("security", label.into()),
        ]);
        handles.push(handle);
    }
    if let Some(addr) = tls_listen {
        let cert = required(args.tls_cert.or(config.tls_cert), "tlsCert")?;
        let key = required(args.tls_key.or(config.tls_key), "tlsKey")?;
        let tls_failure = |e: std::io::Error| Failure::new("TLS_ERROR", e.to_string());
        let chain = load_certs(&cert).map_err(tls_failure)?;
        let fingerprint = chain
            .first()
            .map(certificate_fingerprint)
            .unwrap_or_default();
        let tls = server_config(chain, load_private_key(&key).map_err(tls_failure)?)
            .map_err(tls_failure)?;
        let handle = spawn_listener(
            Arc::clone(&directory),
            addr.as_str(),
            ListenerSecurity::Tls(tls),
        )
        .map_err(|e| Failure::io(&addr, e))?;
        out.fields(&[
            ("listening", handle.local_addr().to_string().into()),
            ("security", "tls".into()),
            ("fingerprint", fingerprint.into()),
        ]);
        handles.push(handle);
    }
    for handle in handles {
        handle.join();
    }
    Ok(())
}
