//! Output destinations. Files are written to a temporary sibling and renamed
//! into place on commit, so readers never see a partial file.

use std::fs;
use std::io::{self, BufWriter, Stdout, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

pub enum Sink {
    Stdout(BufWriter<Stdout>),
    File {
        tmp: BufWriter<NamedTempFile>,
        path: PathBuf,
    },
}

impl Sink {
    pub fn open(path: Option<&Path>) -> io::Result<Sink> {
        match path {
            None => Ok(Sink::Stdout(BufWriter::new(io::stdout()))),
            Some(path) => {
                let dir = match path.parent() {
                    Some(p) if !p.as_os_str().is_empty() => p,
                    _ => Path::new("."),
                };
                if !dir.is_dir() {
                    fs::create_dir_all(dir)?;
                }
                let tmp = temp_builder().tempfile_in(dir)?;
                Ok(Sink::File {
                    tmp: BufWriter::new(tmp),
                    path: path.to_path_buf(),
                })
            }
        }
    }

    /// Flushes and, for files, renames into place. Returns the written path.
    pub fn commit(self) -> io::Result<Option<PathBuf>> {
        match self {
            Sink::Stdout(mut w) => {
                w.flush()?;
                Ok(None)
            }
            Sink::File { tmp, path } => {
                let tmp = tmp.into_inner().map_err(|e| e.into_error())?;
                tmp.as_file().sync_all()?;
                tmp.persist(&path).map_err(|e| e.error)?;
                Ok(Some(path))
            }
        }
    }
}

/// Temporary files default to mode 0600; outputs should look like any other
/// file the user creates.
fn temp_builder() -> tempfile::Builder<'static, 'static> {
    let mut b = tempfile::Builder::new();
    b.prefix(".collatz-octave-");
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        b.permissions(fs::Permissions::from_mode(0o644));
    }
    b
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Sink::Stdout(w) => w.write(buf),
            Sink::File { tmp, .. } => tmp.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Sink::Stdout(w) => w.flush(),
            Sink::File { tmp, .. } => tmp.flush(),
        }
    }
}
