//! Report documents and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use cohcert::report::{body_text, document};
use cohcert::{Error, Result};
use serde::Serialize;
use serde_json::json;

/// Writes `text` to `path` through a temporary file in the same directory,
/// so readers never see a partial report.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", dir.display())))?;
    let io = |e: std::io::Error| Error::InvalidArgument(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Where a report goes: `--out`, else `$COHCERT_OUT/<command>.json`, else stdout.
pub fn destination(out: Option<&Path>, env_dir: Option<&Path>, command: &str) -> Option<PathBuf> {
    out.map(Path::to_path_buf)
        .or_else(|| env_dir.map(|d| d.join(format!("{command}.json"))))
}

pub struct Emitter {
    pub command: String,
    pub argv: Vec<String>,
    pub started: Instant,
    pub dest: Option<PathBuf>,
}

impl Emitter {
    /// Renders `{"header", "body"}` and writes it. Extra header fields (for
    /// example per-check runtimes) go in `extra`.
    pub fn emit<T: Serialize>(&self, body: &T, extra: serde_json::Value) -> Result<()> {
        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut header = json!({
            "tool": "cohcert",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "argv": self.argv,
            "created_unix": created,
            "runtime_ms": self.started.elapsed().as_millis() as u64,
        });
        if let (Some(h), serde_json::Value::Object(x)) = (header.as_object_mut(), extra) {
            h.extend(x);
        }
        let text = document(&header, &body_text(body)?);
        match &self.dest {
            Some(p) => write_atomic(p, &text),
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(text.as_bytes())
                    .and_then(|_| so.flush())
                    .map_err(|e| Error::InvalidArgument(format!("cannot write stdout: {e}")))
            }
        }
    }
}
