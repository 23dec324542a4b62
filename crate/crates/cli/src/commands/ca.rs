use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Subcommand};

use dirpki_core::ca::{CertificationAuthority, PolicyAction, PolicyConfig, PopVariant};
use dirpki_core::clock::{Clock, ManualClock, SystemClock};
use dirpki_core::crypto::PublicKey;

use super::{admin_connection, connect, parse_dn, read_file, read_secret, write_private};
use crate::failure::Failure;
use crate::output::Output;
use crate::{AdminArgs, CmdResult, ServerArgs};

#[derive(Args, Debug)]
pub struct StateArgs {
    /// CA state directory.
    #[arg(long)]
    state: PathBuf,
    /// Act as if the current time were this many seconds since the epoch.
    #[arg(long)]
    now: Option<u64>,
}

impl StateArgs {
    fn clock(&self) -> Arc<dyn Clock> {
        match self.now {
            Some(t) => Arc::new(ManualClock::new(t)),
            None => Arc::new(SystemClock),
        }
    }

    fn open(&self) -> Result<CertificationAuthority, Failure> {
        Ok(CertificationAuthority::open(&self.state, self.clock())?)
    }
}

pub fn parse_variant(s: &str) -> Result<PopVariant, String> {
    PopVariant::parse(s).ok_or_else(|| {
        let names: Vec<_> = PopVariant::ALL.iter().map(|v| v.as_str()).collect();
        format!("expected one of: {}", names.join(", "))
    })
}

#[derive(Subcommand, Debug)]
pub enum CaCommand {
    /// Create a CA key, self-signed certificate and empty state.
    Init {
        #[command(flatten)]
        state: StateArgs,
        /// CA distinguished name.
        #[arg(long)]
        name: String,
        /// Seconds a proof-of-possession entry may stay unactivated.
        #[arg(long, default_value_t = PolicyConfig::default().activation_deadline_seconds)]
        activation_deadline: u64,
        /// Remove the bind password once an entry is activated.
        #[arg(long)]
        delete_password_after_activation: bool,
        /// Certificate lifetime in seconds.
        #[arg(long)]
        validity: Option<u64>,
    },
    /// Accept a registration for a key the subject generated.
    Register {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        subject: String,
        /// Subject public key file, as written by `client keygen`.
        #[arg(long)]
        public_key: PathBuf,
        /// full, half or secret.
        #[arg(long, value_parser = parse_variant)]
        variant: PopVariant,
        /// Write the shared secret here instead of printing it.
        #[arg(long)]
        secret_out: Option<PathBuf>,
    },
    /// Issue the certificate and create the activation entry.
    ProvisionPop {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        subject: String,
        #[command(flatten)]
        server: ServerArgs,
        #[command(flatten)]
        admin: AdminArgs,
    },
    /// Generate a key pair and publish it sealed in `userPKCS12`.
    ProvisionPse {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        subject: String,
        #[arg(long)]
        registration_password_file: PathBuf,
        #[arg(long)]
        pse_password_file: PathBuf,
        #[command(flatten)]
        server: ServerArgs,
        #[command(flatten)]
        admin: AdminArgs,
    },
    /// Check whether the subject has published its certificate.
    VerifyActivation {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        subject: String,
        #[command(flatten)]
        server: ServerArgs,
    },
    /// Delete expired unactivated entries and apply password removal.
    PolicyRun {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        server: ServerArgs,
        #[command(flatten)]
        admin: AdminArgs,
    },
}

pub fn run(cmd: CaCommand, out: Output) -> CmdResult {
    match cmd {
        CaCommand::Init {
            state,
            name,
            activation_deadline,
            delete_password_after_activation,
            validity,
        } => {
            let policy = PolicyConfig {
                activation_deadline_seconds: activation_deadline,
                delete_password_after_activation,
            };
            let mut ca = CertificationAuthority::init(
                &state.state,
                parse_dn(&name)?,
                policy,
                state.clock(),
            )?;
            if let Some(v) = validity {
                ca.set_validity(v)?;
            }
            out.fields(&[
                ("ca", ca.name().to_string().into()),
                ("fingerprint", ca.certificate().fingerprint().into()),
            ]);
        }
        CaCommand::Register {
            state,
            subject,
            public_key,
            variant,
            secret_out,
        } => {
            let mut ca = state.open()?;
            let pk = PublicKey::from_bytes(&read_file(&public_key)?)?;
            let reg = ca.register(parse_dn(&subject)?, pk, variant)?;
            let mut fields = vec![
                ("registered", reg.record.subject.to_string().into()),
                ("variant", variant.as_str().into()),
            ];
            match (reg.shared_secret, secret_out) {
                (Some(secret), Some(path)) => {
                    write_private(&path, secret.as_bytes())?;
                    fields.push(("secretFile", path.display().to_string().into()));
                }
                (Some(secret), None) => fields.push(("sharedSecret", secret.into())),
                (None, _) => {}
            }
            out.fields(&fields);
        }
        CaCommand::ProvisionPop {
            state,
            subject,
            server,
            admin,
        } => {
            let mut ca = state.open()?;
            let mut session = admin_connection(&server, &admin)?;
            let (dn, cert) = ca.provision_pop_entry(&mut session, &parse_dn(&subject)?)?;
            let deadline = ca.issued(&dn).and_then(|r| r.deadline).unwrap_or_default();
            out.fields(&[
                ("provisioned", dn.to_string().into()),
                ("serial", cert.serial.into()),
                ("deadline", deadline.into()),
            ]);
        }
        CaCommand::ProvisionPse {
            state,
            subject,
            registration_password_file,
            pse_password_file,
            server,
            admin,
        } => {
            let mut ca = state.open()?;
            let reg_pw = read_secret(&registration_password_file)?;
            let pse_pw = read_secret(&pse_password_file)?;
            let mut session = admin_connection(&server, &admin)?;
            let dn =
                ca.provision_pse_entry(&mut session, &parse_dn(&subject)?, &reg_pw, &pse_pw)?;
            let serial = ca.issued(&dn).map(|r| r.serial).unwrap_or_default();
            out.fields(&[
                ("provisioned", dn.to_string().into()),
                ("serial", serial.into()),
            ]);
        }
        CaCommand::VerifyActivation {
            state,
            subject,
            server,
        } => {
            let mut ca = state.open()?;
            let mut session = connect(&server)?;
            let activated = ca.verify_activation(&mut session, &parse_dn(&subject)?)?;
            out.fields(&[("activated", activated.into())]);
        }
        CaCommand::PolicyRun {
            state,
            server,
            admin,
        } => {
            let mut ca = state.open()?;
            let now = state.clock().now();
            let mut session = admin_connection(&server, &admin)?;
            for action in ca.enforce_policy(&mut session, now)? {
                match action {
                    PolicyAction::Deleted(dn) => out.action("DELETED", &dn.to_string()),
                    PolicyAction::PasswordRemoved(dn) => {
                        out.action("PASSWORD_REMOVED", &dn.to_string())
                    }
                }
            }
        }
    }
    Ok(())
}
