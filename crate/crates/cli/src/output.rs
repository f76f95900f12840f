use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Single writer for every file an experiment emits. Text files start with a
/// `# config-sha256: …` line; JSON documents carry the hash as their first
/// field instead.
#[derive(Debug, Clone)]
pub struct Sink {
    pub hash: String,
    pub path: Option<PathBuf>,
}

impl Sink {
    pub fn header(&self) -> String {
        format!("# config-sha256: {}\n", self.hash)
    }

    /// Writes a text body to the main output (stdout when no path is set).
    pub fn text(&self, body: &[u8]) -> Result<()> {
        self.text_to(self.path.as_deref(), body)
    }

    /// Writes a text body next to the main output, with `suffix` replacing
    /// its extension. Without a main path nothing is written.
    pub fn companion(&self, suffix: &str, body: &[u8]) -> Result<Option<PathBuf>> {
        let Some(main) = &self.path else {
            return Ok(None);
        };
        let path = main.with_extension(suffix);
        self.text_to(Some(&path), body)?;
        Ok(Some(path))
    }

    pub fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        #[derive(Serialize)]
        struct Stamped<'a, T> {
            config_hash: &'a str,
            #[serde(flatten)]
            body: &'a T,
        }
        let mut out = serde_json::to_vec_pretty(&Stamped {
            config_hash: &self.hash,
            body: value,
        })?;
        out.push(b'\n');
        write_bytes(self.path.as_deref(), &out)
    }

    fn text_to(&self, path: Option<&Path>, body: &[u8]) -> Result<()> {
        let mut out = self.header().into_bytes();
        out.extend_from_slice(body);
        write_bytes(path, &out)
    }
}

fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}
