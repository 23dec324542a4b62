//! Line-delimited JSON protocol carrying directory operations and LDAP
//! result codes, served over plain TCP or TLS.

pub mod client;
pub mod message;
pub mod server;
pub mod tls;

pub use client::{ClientSecurity, ConnectOptions, Connection, WireTap};
pub use message::{Operation, RequestMessage, ResponseMessage, WireError};
pub use server::{
    handle_request, serve_connection, spawn_listener, ConnectionStats, ListenerSecurity,
    ServerHandle, MAX_FRAME_LEN,
};
pub use tls::{
    certificate_fingerprint, client_config, load_certs, load_private_key, server_config,
    server_config_from_pem, ServerTrust,
};

pub const DEFAULT_PLAINTEXT_PORT: u16 = 3893;
pub const DEFAULT_TLS_PORT: u16 = 6363;
