use std::path::PathBuf;

use clap::Subcommand;

use dirpki_core::agent::{complete_pop, download_pse, ActivationInput};
use dirpki_core::ca::PopVariant;
use dirpki_core::crypto::{Certificate, KeyPair, PrivateKey};

use super::ca::parse_variant;
use super::{connect, parse_dn, read_file, read_secret, write_file, write_private};
use crate::output::Output;
use crate::{CmdResult, ServerArgs};

#[derive(Subcommand, Debug)]
pub enum ClientCommand {
    /// Generate an encryption key pair.
    Keygen {
        /// Private key file, created with owner-only permissions.
        #[arg(long)]
        out: PathBuf,
        /// Public key file to hand to the CA.
        #[arg(long)]
        public_out: PathBuf,
    },
    /// Prove possession of the private key and publish the certificate.
    Activate {
        #[arg(long)]
        dn: String,
        /// Private key file.
        #[arg(long)]
        key: PathBuf,
        /// full, half or secret.
        #[arg(long, value_parser = parse_variant)]
        variant: PopVariant,
        /// Shared secret received from the CA (half and secret variants).
        #[arg(long)]
        secret_file: Option<PathBuf>,
        /// CA certificate; when given, the issued certificate must verify under it.
        #[arg(long)]
        ca_cert: Option<PathBuf>,
        #[command(flatten)]
        server: ServerArgs,
    },
    /// Download and open the PSE stored in the own entry.
    FetchPse {
        #[arg(long)]
        dn: String,
        #[arg(long)]
        registration_password_file: PathBuf,
        #[arg(long)]
        pse_password_file: PathBuf,
        /// Where to save the sealed container.
        #[arg(long)]
        out: PathBuf,
        /// Also save the private key, with owner-only permissions.
        #[arg(long)]
        key_out: Option<PathBuf>,
        #[command(flatten)]
        server: ServerArgs,
    },
}

pub fn run(cmd: ClientCommand, out: Output) -> CmdResult {
    match cmd {
        ClientCommand::Keygen {
            out: key_path,
            public_out,
        } => {
            let pair = KeyPair::generate()?;
            write_private(&key_path, &pair.private.to_bytes())?;
            write_file(&public_out, &pair.public.to_bytes())?;
            out.fields(&[("publicKey", pair.public.fingerprint().into())]);
        }
        ClientCommand::Activate {
            dn,
            key,
            variant,
            secret_file,
            ca_cert,
            server,
        } => {
            let private_key = PrivateKey::from_bytes(&read_file(&key)?)?;
            let secret = secret_file
                .map(|p| read_secret(&p).map(|s| s.to_vec()))
                .transpose()?;
            let mut input = ActivationInput::new(parse_dn(&dn)?, private_key, variant, secret)?;
            if let Some(path) = ca_cert {
                let ca = Certificate::from_bytes(&read_file(&path)?)?;
                input = input.with_ca_key(ca.subject_public_key);
            }
            let mut session = connect(&server)?;
            let cert = complete_pop(&mut session, &input)?;
            out.fields(&[
                ("activated", cert.subject.to_string().into()),
                ("serial", cert.serial.into()),
                ("notAfter", cert.not_after.into()),
            ]);
        }
        ClientCommand::FetchPse {
            dn,
            registration_password_file,
            pse_password_file,
            out: pse_path,
            key_out,
            server,
        } => {
            let reg_pw = read_secret(&registration_password_file)?;
            let pse_pw = read_secret(&pse_password_file)?;
            let mut session = connect(&server)?;
            let pse = download_pse(&mut session, &parse_dn(&dn)?, &reg_pw, &pse_pw)?;
            write_file(&pse_path, &pse.container)?;
            if let Some(path) = key_out {
                write_private(&path, &pse.contents.private_key.to_bytes())?;
            }
            out.fields(&[
                ("fetched", dn.into()),
                ("certificates", pse.contents.certificates.len().into()),
                (
                    "publicKey",
                    pse.contents.private_key.public_key().fingerprint().into(),
                ),
            ]);
        }
    }
    Ok(())
}
