//! `dirpki`: directory server, CA workflow and client agent.

mod commands;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failure::Failure;
use output::Output;

#[derive(Parser)]
#[command(
    name = "dirpki",
    version,
    about = "Directory-mediated PKI: proof of possession and PSE delivery"
)]
struct Cli {
    /// Emit one canonical JSON object per result line.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the directory server.
    Serve(commands::serve::ServeArgs),
    /// Certification authority operations.
    #[command(subcommand)]
    Ca(commands::ca::CaCommand),
    /// End-user operations.
    #[command(subcommand)]
    Client(commands::client::ClientCommand),
    /// Offline directory snapshot handling.
    #[command(subcommand)]
    Dir(commands::dir::DirCommand),
}

/// How to reach the directory server.
#[derive(Args, Debug, Clone)]
pub struct ServerArgs {
    /// Server address.
    #[arg(long, default_value = "127.0.0.1:3893")]
    pub server: String,
    /// Connect over TLS.
    #[arg(long)]
    pub tls: bool,
    /// Name expected in the server certificate.
    #[arg(long, default_value = "localhost", requires = "tls")]
    pub server_name: String,
    /// Accept only the server certificate with this hex SHA-256 fingerprint.
    #[arg(long, requires = "tls", conflicts_with = "tls_roots")]
    pub pin: Option<String>,
    /// PEM file with the trusted root certificates.
    #[arg(long, requires = "tls")]
    pub tls_roots: Option<PathBuf>,
    /// Plain TCP to a server started with --assume-secure. Testing only.
    #[arg(long, conflicts_with = "tls")]
    pub assume_secure: bool,
}

/// Directory administrator credentials.
#[derive(Args, Debug, Clone)]
pub struct AdminArgs {
    #[arg(long)]
    pub admin_dn: String,
    /// File holding the administrator password.
    #[arg(long)]
    pub admin_password_file: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out = Output { json: cli.json };
    let result = match cli.command {
        Command::Serve(args) => commands::serve::run(args, out),
        Command::Ca(cmd) => commands::ca::run(cmd, out),
        Command::Client(cmd) => commands::client::run(cmd, out),
        Command::Dir(cmd) => commands::dir::run(cmd, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            out.failure(&failure);
            ExitCode::FAILURE
        }
    }
}

pub type CmdResult = Result<(), Failure>;
