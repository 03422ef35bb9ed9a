//! TCP transport. Every hosted locality listens on its own address and
//! keeps one outgoing stream per peer; a stream starts with the sender's
//! rank as a 4-byte little-endian handshake, followed by wire messages.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, ErrorKind, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use parking_lot::Mutex;

use super::config::SocketConfig;
use super::locality::LocalityId;
use super::transport::{Router, Transport};
use super::{Result, RuntimeError};

fn io_err(context: impl std::fmt::Display) -> impl FnOnce(std::io::Error) -> RuntimeError {
    move |e| RuntimeError::Transport(format!("{context}: {e}"))
}

pub(crate) struct SocketTransport {
    outgoing: HashMap<(LocalityId, LocalityId), Mutex<TcpStream>>,
    incoming: Arc<Mutex<Vec<TcpStream>>>,
    threads: Arc<Mutex<Vec<JoinHandle<()>>>>,
    acceptors: Mutex<Vec<JoinHandle<()>>>,
    closing: Arc<AtomicBool>,
}

impl SocketTransport {
    pub(crate) fn start(
        cfg: &SocketConfig,
        localities: u32,
        hosted: &[LocalityId],
        router: Arc<Router>,
    ) -> Result<Self> {
        let mut addrs: Vec<Option<SocketAddr>> = if cfg.peers.is_empty() {
            vec![None; localities as usize]
        } else {
            cfg.peers.iter().copied().map(Some).collect()
        };
        let mut listeners = Vec::new();
        for &h in hosted {
            let bind = addrs[h as usize].unwrap_or_else(|| SocketAddr::from(([127, 0, 0, 1], 0)));
            let listener = TcpListener::bind(bind).map_err(io_err(format!("bind {bind}")))?;
            listener
                .set_nonblocking(true)
                .map_err(io_err("listener setup"))?;
            addrs[h as usize] = Some(listener.local_addr().map_err(io_err("local_addr"))?);
            listeners.push((h, listener));
        }

        let closing = Arc::new(AtomicBool::new(false));
        let incoming = Arc::new(Mutex::new(Vec::new()));
        let threads = Arc::new(Mutex::new(Vec::new()));
        let mut acceptors = Vec::new();
        for (h, listener) in listeners {
            let ctx = AcceptCtx {
                dest: h,
                expect: localities as usize - 1,
                router: router.clone(),
                closing: closing.clone(),
                incoming: incoming.clone(),
                threads: threads.clone(),
            };
            let t = std::thread::Builder::new()
                .name(format!("accept-{h}"))
                .spawn(move || ctx.run(listener))
                .map_err(io_err("spawn acceptor"))?;
            acceptors.push(t);
        }

        let mut outgoing = HashMap::new();
        for &h in hosted {
            for d in 0..localities {
                if d == h {
                    continue;
                }
                let addr = addrs[d as usize].expect("peer address known");
                let mut stream = connect(addr, cfg.connect_timeout)?;
                stream.set_nodelay(true).map_err(io_err("nodelay"))?;
                stream
                    .write_all(&h.to_le_bytes())
                    .map_err(io_err(format!("handshake with {addr}")))?;
                outgoing.insert((h, d), Mutex::new(stream));
            }
        }
        Ok(Self {
            outgoing,
            incoming,
            threads,
            acceptors: Mutex::new(acceptors),
            closing,
        })
    }
}

fn connect(addr: SocketAddr, timeout: Duration) -> Result<TcpStream> {
    let deadline = Instant::now() + timeout;
    loop {
        match TcpStream::connect(addr) {
            Ok(s) => return Ok(s),
            Err(e) if Instant::now() >= deadline => {
                return Err(RuntimeError::Transport(format!("connect {addr}: {e}")))
            }
            Err(_) => std::thread::sleep(Duration::from_millis(20)),
        }
    }
}

struct AcceptCtx {
    dest: LocalityId,
    expect: usize,
    router: Arc<Router>,
    closing: Arc<AtomicBool>,
    incoming: Arc<Mutex<Vec<TcpStream>>>,
    threads: Arc<Mutex<Vec<JoinHandle<()>>>>,
}

impl AcceptCtx {
    fn run(self, listener: TcpListener) {
        let mut accepted = 0;
        while accepted < self.expect && !self.closing.load(Ordering::Acquire) {
            match listener.accept() {
                Ok((stream, _)) => {
                    if let Err(e) = self.serve(stream) {
                        eprintln!("locality {}: rejected connection: {e}", self.dest);
                        continue;
                    }
                    accepted += 1;
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => {
                    std::thread::sleep(Duration::from_millis(1))
                }
                Err(e) => {
                    eprintln!("locality {}: accept failed: {e}", self.dest);
                    return;
                }
            }
        }
    }

    fn serve(&self, mut stream: TcpStream) -> std::io::Result<()> {
        stream.set_nonblocking(false)?;
        stream.set_nodelay(true)?;
        let mut rank = [0u8; 4];
        stream.read_exact(&mut rank)?;
        let from = u32::from_le_bytes(rank);
        self.incoming.lock().push(stream.try_clone()?);
        let router = self.router.clone();
        let dest = self.dest;
        let t = std::thread::Builder::new()
            .name(format!("recv-{from}-{dest}"))
            .spawn(move || read_loop(stream, dest, &router))?;
        self.threads.lock().push(t);
        Ok(())
    }
}

/// Reads frames and delivers each run of already-buffered frames as one
/// message, so a batch written in one go is usually handled as one.
fn read_loop(stream: TcpStream, dest: LocalityId, router: &Router) {
    let mut reader = BufReader::with_capacity(1 << 16, stream);
    loop {
        let mut batch = Vec::new();
        if read_frame(&mut reader, &mut batch).is_err() {
            return;
        }
        loop {
            let buf = reader.buffer();
            if buf.len() < 4 {
                break;
            }
            let len = u32::from_le_bytes(buf[..4].try_into().unwrap()) as usize;
            if buf.len() < 4 + len {
                break;
            }
            batch.extend_from_slice(&buf[..4 + len]);
            reader.consume(4 + len);
        }
        if router.deliver(dest, batch).is_err() {
            return;
        }
    }
}

fn read_frame(reader: &mut impl Read, out: &mut Vec<u8>) -> std::io::Result<()> {
    let mut len = [0u8; 4];
    reader.read_exact(&mut len)?;
    let n = u32::from_le_bytes(len) as usize;
    let start = out.len();
    out.extend_from_slice(&len);
    out.resize(start + 4 + n, 0);
    reader.read_exact(&mut out[start + 4..])
}

impl Transport for SocketTransport {
    fn send(&self, from: LocalityId, dest: LocalityId, bytes: Vec<u8>) -> Result<()> {
        let stream = self
            .outgoing
            .get(&(from, dest))
            .ok_or(RuntimeError::NoSuchLocality(dest))?;
        stream
            .lock()
            .write_all(&bytes)
            .map_err(io_err(format!("send {from}->{dest}")))
    }

    fn shutdown(&self) {
        if self.closing.swap(true, Ordering::AcqRel) {
            return;
        }
        for s in self.outgoing.values() {
            let _ = s.lock().shutdown(Shutdown::Both);
        }
        for t in self.acceptors.lock().drain(..) {
            let _ = t.join();
        }
        for s in self.incoming.lock().drain(..) {
            let _ = s.shutdown(Shutdown::Both);
        }
        let threads = std::mem::take(&mut *self.threads.lock());
        for t in threads {
            let _ = t.join();
        }
    }
}

impl Drop for SocketTransport {
    fn drop(&mut self) {
        self.shutdown();
    }
}
