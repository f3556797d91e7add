//! Reading corpora and writing reports.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Core(#[from] tablint::Error),

    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// The reader of our output went away, as with `tablint ... | head`.
    pub fn is_broken_pipe(&self) -> bool {
        matches!(self, CliError::Io { source, .. } if source.kind() == io::ErrorKind::BrokenPipe)
    }
}

/// A non-blank input line with its 1-based number.
#[derive(Debug, Clone)]
pub struct Line {
    pub number: usize,
    pub bytes: Vec<u8>,
}

impl Line {
    pub fn text(&self) -> Result<&str, String> {
        std::str::from_utf8(&self.bytes).map_err(|e| format!("invalid UTF-8 at byte {}", e.valid_up_to()))
    }
}

/// Reads a whole file, or standard input for `-`.
pub fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_end(&mut buf).map_err(|e| CliError::io(path, e))?;
    } else {
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| CliError::io(path, e))?;
    }
    Ok(buf)
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    String::from_utf8(read_input(path)?)
        .map_err(|e| CliError::Other(format!("{}: invalid UTF-8: {e}", path.display())))
}

pub fn read_lines(path: &Path) -> Result<Vec<Line>, CliError> {
    let buf = read_input(path)?;
    Ok(buf
        .split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, l)| Line {
            number: i + 1,
            bytes: l.strip_suffix(b"\r").unwrap_or(l).to_vec(),
        })
        .filter(|l| !l.bytes.iter().all(u8::is_ascii_whitespace))
        .collect())
}

pub struct Output {
    path: Option<PathBuf>,
    sink: BufWriter<Box<dyn Write + Send>>,
}

impl Output {
    pub fn open(path: Option<&Path>) -> Result<Self, CliError> {
        let sink: Box<dyn Write + Send> = match path {
            Some(p) => Box::new(File::create(p).map_err(|e| CliError::io(p, e))?),
            None => Box::new(io::stdout()),
        };
        Ok(Self {
            path: path.map(Path::to_path_buf),
            sink: BufWriter::new(sink),
        })
    }

    fn err(&self, e: io::Error) -> CliError {
        CliError::io(self.path.as_deref().unwrap_or(Path::new("<stdout>")), e)
    }

    pub fn line(&mut self, text: &str) -> Result<(), CliError> {
        writeln!(self.sink, "{text}").map_err(|e| self.err(e))
    }

    pub fn text(&mut self, text: &str) -> Result<(), CliError> {
        self.sink.write_all(text.as_bytes()).map_err(|e| self.err(e))
    }

    pub fn json<T: serde::Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        let s = serde_json::to_string(value).map_err(|e| CliError::Other(e.to_string()))?;
        self.line(&s)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.sink.flush().map_err(|e| self.err(e))
    }
}
