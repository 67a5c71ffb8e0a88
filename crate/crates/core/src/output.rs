//! CSV and JSON emission.
//!
//! Every CSV starts with one `#` comment line carrying the tool version and
//! the JSON parameter snapshot, followed by the header row.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// CSV writer with the provenance comment already emitted.
pub struct CsvOut<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvOut<W> {
    pub fn new(mut sink: W, snapshot: &str, header: &[&str]) -> Result<Self> {
        write!(sink, "# mwchaos {VERSION} params={snapshot}\r\n")?;
        let mut inner = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(sink);
        inner.write_record(header).map_err(csv_error)?;
        Ok(CsvOut { inner })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields).map_err(csv_error)
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner
            .into_inner()
            .map_err(|e| Error::Io(e.to_string()))
    }
}

impl CsvOut<BufWriter<File>> {
    pub fn create(path: &Path, snapshot: &str, header: &[&str]) -> Result<Self> {
        Self::new(BufWriter::new(File::create(path)?), snapshot, header)
    }
}

/// Shortest round-tripping decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
