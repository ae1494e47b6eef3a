use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::Failure;

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Config(format!("{}: {e}", path.display()))
}

/// Destination for the files of one subcommand.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<&Path>) -> Result<Self, Failure> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(|e| io_failure(d, e))?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
        })
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// The named file under the output directory, or stdout without one.
    pub fn main(&self, name: &str) -> Result<Box<dyn Write>, Failure> {
        match &self.dir {
            Some(_) => self.file(name),
            None => Ok(Box::new(io::stdout().lock())),
        }
    }

    /// A file that is only written with an output directory.
    pub fn extra(&self, name: &str) -> Result<Option<Box<dyn Write>>, Failure> {
        self.dir.as_ref().map(|_| self.file(name)).transpose()
    }

    fn file(&self, name: &str) -> Result<Box<dyn Write>, Failure> {
        let path = self.dir.as_ref().expect("caller checked").join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_failure(parent, e))?;
        }
        let f = File::create(&path).map_err(|e| io_failure(&path, e))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

/// Writes records to `out` as CSV.
pub fn write_rows<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Failure::Config(e.to_string());
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    w.flush().map_err(|e| Failure::Config(e.to_string()))
}

pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), num)
}
