//! Subprocess execution with wall-clock timeouts and capped output capture.

use std::ffi::OsString;
use std::io::Read;
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::OnceLock;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use crate::sync::Semaphore;

/// How a process ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExitKind {
    Exited { code: i32 },
    Signaled { signal: String },
    TimedOut,
}

impl std::fmt::Display for ExitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExitKind::Exited { code } => write!(f, "exited({code})"),
            ExitKind::Signaled { signal } => write!(f, "signaled({signal})"),
            ExitKind::TimedOut => f.write_str("timed_out"),
        }
    }
}

pub fn signal_name(sig: i32) -> String {
    let name = match sig {
        libc::SIGSEGV => "SIGSEGV",
        libc::SIGILL => "SIGILL",
        libc::SIGBUS => "SIGBUS",
        libc::SIGFPE => "SIGFPE",
        libc::SIGABRT => "SIGABRT",
        libc::SIGTRAP => "SIGTRAP",
        libc::SIGSYS => "SIGSYS",
        libc::SIGKILL => "SIGKILL",
        libc::SIGTERM => "SIGTERM",
        libc::SIGINT => "SIGINT",
        libc::SIGQUIT => "SIGQUIT",
        libc::SIGPIPE => "SIGPIPE",
        libc::SIGALRM => "SIGALRM",
        libc::SIGXCPU => "SIGXCPU",
        libc::SIGXFSZ => "SIGXFSZ",
        other => return format!("SIG{other}"),
    };
    name.to_string()
}

fn spawn_limiter() -> &'static Semaphore {
    static LIMIT: OnceLock<Semaphore> = OnceLock::new();
    LIMIT.get_or_init(|| Semaphore::new(thread::available_parallelism().map(|n| n.get()).unwrap_or(1)))
}

/// Sets the process-wide bound on concurrently running toolchain and
/// program subprocesses. Defaults to the logical CPU count.
pub fn set_spawn_limit(n: usize) {
    spawn_limiter().set_capacity(n);
}

#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub program: PathBuf,
    pub args: Vec<OsString>,
    pub cwd: PathBuf,
    pub timeout: Duration,
    pub stdout_cap: usize,
    pub stderr_cap: usize,
}

impl ProcessSpec {
    pub fn new(program: impl Into<PathBuf>, cwd: &Path) -> Self {
        ProcessSpec {
            program: program.into(),
            args: Vec::new(),
            cwd: cwd.to_path_buf(),
            timeout: Duration::from_secs(60),
            stdout_cap: 1 << 20,
            stderr_cap: 256 << 10,
        }
    }

    pub fn arg(mut self, a: impl Into<OsString>) -> Self {
        self.args.push(a.into());
        self
    }

    pub fn args<I, S>(mut self, items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<OsString>,
    {
        self.args.extend(items.into_iter().map(Into::into));
        self
    }

    pub fn timeout(mut self, t: Duration) -> Self {
        self.timeout = t;
        self
    }

    pub fn stdout_cap(mut self, cap: usize) -> Self {
        self.stdout_cap = cap;
        self
    }
}

#[derive(Debug, Clone)]
pub struct ProcessOutput {
    pub exit_kind: ExitKind,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub stdout_overflow: bool,
    pub stderr_overflow: bool,
    pub duration: Duration,
}

impl ProcessOutput {
    pub fn success(&self) -> bool {
        self.exit_kind == ExitKind::Exited { code: 0 }
    }
}

/// Reads the whole stream, keeping at most `cap` bytes.
fn read_capped(mut r: impl Read, cap: usize) -> (Vec<u8>, bool) {
    let mut kept = Vec::new();
    let mut overflow = false;
    let mut buf = [0u8; 8192];
    loop {
        match r.read(&mut buf) {
            Ok(0) | Err(_) => break,
            Ok(n) => {
                let room = cap.saturating_sub(kept.len());
                if n > room {
                    overflow = true;
                }
                kept.extend_from_slice(&buf[..n.min(room)]);
            }
        }
    }
    (kept, overflow)
}

/// Runs a process to completion or until its timeout, in its own process
/// group so that a timeout kills any children too. Returns `Err` only when
/// the process could not be spawned.
pub fn run_process(spec: &ProcessSpec) -> std::io::Result<ProcessOutput> {
    let _permit = spawn_limiter().acquire();
    let mut child = Command::new(&spec.program)
        .args(&spec.args)
        .current_dir(&spec.cwd)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0)
        .spawn()?;

    let start = Instant::now();
    let out = child.stdout.take().expect("piped stdout");
    let err = child.stderr.take().expect("piped stderr");
    let (out_cap, err_cap) = (spec.stdout_cap, spec.stderr_cap);
    let out_reader = thread::spawn(move || read_capped(out, out_cap));
    let err_reader = thread::spawn(move || read_capped(err, err_cap));

    let status = match child.wait_timeout(spec.timeout)? {
        Some(status) => Some(status),
        None => {
            // SAFETY: kill(2) on our own child's process group.
            unsafe {
                libc::kill(-(child.id() as i32), libc::SIGKILL);
            }
            let _ = child.kill();
            let _ = child.wait();
            None
        }
    };
    let mut duration = start.elapsed();

    let (stdout, stdout_overflow) = out_reader.join().unwrap_or_default();
    let (stderr, stderr_overflow) = err_reader.join().unwrap_or_default();

    let exit_kind = match status {
        None => {
            duration = duration.max(spec.timeout);
            ExitKind::TimedOut
        }
        Some(s) => match (s.code(), s.signal()) {
            (Some(code), _) => ExitKind::Exited { code },
            (None, Some(sig)) => ExitKind::Signaled { signal: signal_name(sig) },
            (None, None) => ExitKind::Exited { code: -1 },
        },
    };

    Ok(ProcessOutput { exit_kind, stdout, stderr, stdout_overflow, stderr_overflow, duration })
}
