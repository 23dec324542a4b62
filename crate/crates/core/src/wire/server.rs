//! Connection handling and listeners.
//!
//! Each accepted connection runs on its own thread with its own
//! [`BindState`]; the shared [`Directory`] serializes mutations.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use log::{debug, info, warn};

use super::message::{Operation, RequestMessage, ResponseMessage, WireError};
use crate::directory::{BindState, Directory, DirectoryError, ResultCode};

/// Longest accepted frame, LF included.
pub const MAX_FRAME_LEN: usize = 1 << 20;

/// Per-connection counters, returned when the connection ends.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConnectionStats {
    pub requests: u64,
    pub responses: u64,
    pub protocol_error: bool,
}

/// Reads one LF-terminated frame. `Ok(None)` on clean EOF.
fn read_frame(reader: &mut impl BufRead, buf: &mut Vec<u8>) -> Result<Option<()>, WireError> {
    buf.clear();
    let mut limited = reader.take(MAX_FRAME_LEN as u64);
    let n = limited
        .read_until(b'\n', buf)
        .map_err(|_| WireError::Truncated)?;
    if n == 0 {
        return Ok(None);
    }
    if buf.last() != Some(&b'\n') {
        return Err(if n >= MAX_FRAME_LEN {
            WireError::TooLong(MAX_FRAME_LEN)
        } else {
            WireError::Truncated
        });
    }
    Ok(Some(()))
}

fn result_response(id: u64, r: Result<(), DirectoryError>) -> ResponseMessage {
    match r {
        Ok(()) => ResponseMessage::ok(id),
        Err(e) => ResponseMessage::error(id, e.code, e.message),
    }
}

/// Executes one request against the directory, updating `state` on bind.
pub fn handle_request(
    directory: &Directory,
    state: &mut BindState,
    request: RequestMessage,
) -> ResponseMessage {
    let id = request.id;
    match request.op {
        Operation::Bind { dn, password } => {
            let secure = state.channel_secure();
            // A bind attempt always drops the previous identity first.
            *state = BindState::anonymous(secure);
            match directory.simple_bind(dn.as_ref(), &password, secure) {
                Ok(bound) => {
                    *state = bound;
                    ResponseMessage::ok(id)
                }
                Err(e) => ResponseMessage::error(id, e.code, e.message),
            }
        }
        Operation::Add { entry } => result_response(id, directory.add_entry(entry, state)),
        Operation::Search { dn } => match directory.search_entry(&dn, state) {
            Ok(entry) => ResponseMessage::with_entry(id, entry),
            Err(e) => ResponseMessage::error(id, e.code, e.message),
        },
        Operation::Modify {
            dn,
            attribute,
            value,
        } => result_response(
            id,
            directory.modify_attribute(&dn, &attribute, value, state),
        ),
        Operation::Delete { dn } => result_response(id, directory.delete_entry(&dn, state)),
        Operation::Unbind => {
            *state = BindState::anonymous(state.channel_secure());
            ResponseMessage::ok(id)
        }
    }
}

/// Serves requests from `stream` until unbind, EOF or a malformed frame.
///
/// Requests are answered strictly in arrival order. A malformed frame gets a
/// `protocolError` (code 2) response with id 0 and then the connection is
/// closed.
pub fn serve_connection<S: Read + Write>(
    directory: &Directory,
    stream: S,
    channel_secure: bool,
) -> io::Result<ConnectionStats> {
    let mut reader = BufReader::new(stream);
    let mut state = BindState::anonymous(channel_secure);
    let mut stats = ConnectionStats::default();
    let mut buf = Vec::with_capacity(512);
    loop {
        let request = match read_frame(&mut reader, &mut buf) {
            Ok(None) => break,
            Ok(Some(())) => RequestMessage::decode(&buf),
            Err(e) => Err(e),
        };
        let request = match request {
            Ok(r) => r,
            Err(e) => {
                debug!("protocol error: {e}");
                stats.protocol_error = true;
                let resp = ResponseMessage::error(0, ResultCode::ProtocolError, e.to_string());
                let w = reader.get_mut();
                // The peer may already be gone; the connection closes either way.
                let _ = w.write_all(&resp.encode()).and_then(|()| w.flush());
                stats.responses += 1;
                break;
            }
        };
        stats.requests += 1;
        let is_unbind = request.op == Operation::Unbind;
        let response = handle_request(directory, &mut state, request);
        let w = reader.get_mut();
        w.write_all(&response.encode())?;
        w.flush()?;
        stats.responses += 1;
        if is_unbind {
            break;
        }
    }
    Ok(stats)
}

/// How a listener secures its connections.
#[derive(Clone)]
pub enum ListenerSecurity {
    /// Plain TCP; binds with passwords are refused.
    Plaintext,
    /// Plain TCP treated as secure. Test mode only.
    AssumeSecure,
    Tls(Arc<rustls::ServerConfig>),
}

impl std::fmt::Debug for ListenerSecurity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ListenerSecurity::Plaintext => "Plaintext",
            ListenerSecurity::AssumeSecure => "AssumeSecure",
            ListenerSecurity::Tls(_) => "Tls",
        })
    }
}

/// A running listener. Dropping the handle does not stop it; call
/// [`ServerHandle::shutdown`].
#[derive(Debug)]
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept.
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }

    /// Blocks until the accept loop ends.
    pub fn join(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Binds `addr` and serves connections on background threads.
pub fn spawn_listener(
    directory: Arc<Directory>,
    addr: impl std::net::ToSocketAddrs,
    security: ListenerSecurity,
) -> io::Result<ServerHandle> {
    let listener = TcpListener::bind(addr)?;
    let local = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let stop_flag = Arc::clone(&stop);
    info!("listening on {local} ({security:?})");
    let thread = std::thread::Builder::new()
        .name(format!("listener-{local}"))
        .spawn(move || accept_loop(listener, directory, security, stop_flag))?;
    Ok(ServerHandle {
        addr: local,
        stop,
        thread: Some(thread),
    })
}

fn accept_loop(
    listener: TcpListener,
    directory: Arc<Directory>,
    security: ListenerSecurity,
    stop: Arc<AtomicBool>,
) {
    for stream in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                warn!("accept failed: {e}");
                continue;
            }
        };
        let directory = Arc::clone(&directory);
        let security = security.clone();
        let spawned = std::thread::Builder::new()
            .name("connection".into())
            .spawn(move || {
                let peer = stream.peer_addr().ok();
                let result = match security {
                    ListenerSecurity::Plaintext => serve_connection(&directory, stream, false),
                    ListenerSecurity::AssumeSecure => serve_connection(&directory, stream, true),
                    ListenerSecurity::Tls(config) => match rustls::ServerConnection::new(config) {
                        Ok(conn) => serve_connection(
                            &directory,
                            rustls::StreamOwned::new(conn, stream),
                            true,
                        ),
                        Err(e) => Err(io::Error::other(e)),
                    },
                };
                match result {
                    Ok(stats) => debug!("{peer:?} closed after {} requests", stats.requests),
                    Err(e) => debug!("{peer:?} ended with error: {e}"),
                }
            });
        if let Err(e) = spawned {
            warn!("could not spawn connection thread: {e}");
        }
    }
}
