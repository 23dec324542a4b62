use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::{Arc, Mutex};

use rustls::pki_types::ServerName;

use super::message::{Operation, RequestMessage, ResponseMessage};
use super::server::MAX_FRAME_LEN;
use super::tls::{client_config, ServerTrust};
use crate::directory::{
    AttributeValue, DirectoryEntry, DirectoryError, DirectorySession, DistinguishedName,
    SessionError,
};

enum Transport {
    Plain(TcpStream),
    Tls(Box<rustls::StreamOwned<rustls::ClientConnection, TcpStream>>),
}

impl Read for Transport {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        match self {
            Transport::Plain(s) => s.read(buf),
            Transport::Tls(s) => s.read(buf),
        }
    }
}

impl Write for Transport {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Transport::Plain(s) => s.write(buf),
            Transport::Tls(s) => s.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Transport::Plain(s) => s.flush(),
            Transport::Tls(s) => s.flush(),
        }
    }
}

/// Copy of every frame a connection sends, for auditing outbound traffic.
pub type WireTap = Arc<Mutex<Vec<u8>>>;

/// Client side of the wire protocol.
pub struct Connection {
    reader: BufReader<Transport>,
    secure: bool,
    next_id: u64,
    tap: Option<WireTap>,
    closed: bool,
}

impl std::fmt::Debug for Connection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Connection")
            .field("secure", &self.secure)
            .field("next_id", &self.next_id)
            .finish_non_exhaustive()
    }
}

/// Where and how to connect.
#[derive(Debug, Clone)]
pub struct ConnectOptions {
    pub address: String,
    pub security: ClientSecurity,
}

#[derive(Debug, Clone)]
pub enum ClientSecurity {
    Plaintext,
    /// Plain TCP to a listener running with `--assume-secure`.
    AssumeSecure,
    Tls {
        server_name: String,
        trust: ServerTrust,
    },
}

fn transport_err(e: impl std::fmt::Display) -> SessionError {
    SessionError::Transport(e.to_string())
}

impl Connection {
    pub fn connect(options: &ConnectOptions) -> io::Result<Self> {
        let addr =
            options.address.to_socket_addrs()?.next().ok_or_else(|| {
                io::Error::new(io::ErrorKind::NotFound, "address did not resolve")
            })?;
        let tcp = TcpStream::connect(addr)?;
        tcp.set_nodelay(true)?;
        let (transport, secure) = match &options.security {
            ClientSecurity::Plaintext => (Transport::Plain(tcp), false),
            ClientSecurity::AssumeSecure => (Transport::Plain(tcp), true),
            ClientSecurity::Tls { server_name, trust } => {
                let name = ServerName::try_from(server_name.clone())
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
                let conn = rustls::ClientConnection::new(client_config(trust)?, name)
                    .map_err(io::Error::other)?;
                let mut stream = rustls::StreamOwned::new(conn, tcp);
                // Complete the handshake now so trust failures surface here.
                while stream.conn.is_handshaking() {
                    stream.conn.complete_io(&mut stream.sock)?;
                }
                (Transport::Tls(Box::new(stream)), true)
            }
        };
        Ok(Self {
            reader: BufReader::new(transport),
            secure,
            next_id: 1,
            tap: None,
            closed: false,
        })
    }

    /// Records every outbound frame into `tap`.
    pub fn with_tap(mut self, tap: WireTap) -> Self {
        self.tap = Some(tap);
        self
    }

    /// Sends one request and waits for its response.
    pub fn call(&mut self, op: Operation) -> Result<ResponseMessage, SessionError> {
        if self.closed {
            return Err(transport_err("connection is closed"));
        }
        let request = RequestMessage::new(self.next_id, op);
        self.next_id += 1;
        let frame = request.encode();
        if let Some(tap) = &self.tap {
            tap.lock().unwrap().extend_from_slice(&frame);
        }
        let w = self.reader.get_mut();
        w.write_all(&frame)
            .and_then(|()| w.flush())
            .map_err(transport_err)?;

        let mut line = Vec::new();
        (&mut self.reader)
            .take(MAX_FRAME_LEN as u64)
            .read_until(b'\n', &mut line)
            .map_err(transport_err)?;
        if line.last() != Some(&b'\n') {
            self.closed = true;
            return Err(transport_err("connection closed before a response arrived"));
        }
        let response = ResponseMessage::decode(&line).map_err(transport_err)?;
        if response.id != request.id {
            self.closed = true;
            return match response.message {
                Some(m) if response.id == 0 => Err(DirectoryError::new(response.code, m).into()),
                _ => Err(transport_err(format!(
                    "response id {} does not match request id {}",
                    response.id, request.id
                ))),
            };
        }
        if request.op == Operation::Unbind {
            self.closed = true;
        }
        Ok(response)
    }

    fn expect_ok(&mut self, op: Operation) -> Result<ResponseMessage, SessionError> {
        let response = self.call(op)?;
        if response.is_ok() {
            Ok(response)
        } else {
            Err(DirectoryError::new(response.code, response.message.unwrap_or_default()).into())
        }
    }
}

impl DirectorySession for Connection {
    fn channel_secure(&self) -> bool {
        self.secure
    }

    fn bind(
        &mut self,
        dn: Option<&DistinguishedName>,
        password: &[u8],
    ) -> Result<(), SessionError> {
        self.expect_ok(Operation::Bind {
            dn: dn.cloned(),
            password: password.to_vec(),
        })
        .map(drop)
    }

    fn add(&mut self, entry: &DirectoryEntry) -> Result<(), SessionError> {
        self.expect_ok(Operation::Add {
            entry: entry.clone(),
        })
        .map(drop)
    }

    fn search(&mut self, dn: &DistinguishedName) -> Result<DirectoryEntry, SessionError> {
        self.expect_ok(Operation::Search { dn: dn.clone() })?
            .entry
            .ok_or_else(|| transport_err("search response carried no entry"))
    }

    fn modify(
        &mut self,
        dn: &DistinguishedName,
        attribute: &str,
        value: Option<AttributeValue>,
    ) -> Result<(), SessionError> {
        self.expect_ok(Operation::Modify {
            dn: dn.clone(),
            attribute: attribute.to_string(),
            value,
        })
        .map(drop)
    }

    fn delete(&mut self, dn: &DistinguishedName) -> Result<(), SessionError> {
        self.expect_ok(Operation::Delete { dn: dn.clone() })
            .map(drop)
    }

    fn unbind(&mut self) -> Result<(), SessionError> {
        if self.closed {
            return Ok(());
        }
        self.expect_ok(Operation::Unbind).map(drop)
    }
}
