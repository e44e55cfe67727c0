//! On-disk formats: diagnostics CSV and binary state snapshots.
//!
//! Snapshot layout, little-endian throughout:
//!
//! ```text
//! "FPLS" | version u16 | species u16 | n_per_axis u32 | extent f64 | time f64
//! per species: label length u16 | label bytes (UTF-8)
//! per species: n_per_axis^3 f64 values, x index fastest
//! ```

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::model::{PlasmaState, SpeciesParams};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"FPLS";
pub const SNAPSHOT_VERSION: u16 = 1;
/// First line of every CSV this crate writes.
pub const CSV_SCHEMA_LINE: &str = "# fpls-diagnostics v1";

/// Snapshot contents; species masses and charges live in the config.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub extent: f64,
    pub n_per_axis: usize,
    pub time: f64,
    pub labels: Vec<String>,
    pub fields: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn from_state(state: &PlasmaState) -> Self {
        Self {
            extent: state.grid.extent(),
            n_per_axis: state.grid.n_per_axis(),
            time: state.time,
            labels: state.species.iter().map(|s| s.label.clone()).collect(),
            fields: state.distributions.clone(),
        }
    }

    /// Rebuilds a state, taking masses and charges from `species` in order.
    pub fn into_state(self, species: &[SpeciesParams]) -> Result<PlasmaState> {
        if species.len() != self.labels.len() {
            return Err(Error::Format(format!(
                "snapshot has {} species, {} supplied",
                self.labels.len(),
                species.len()
            )));
        }
        for (sp, label) in species.iter().zip(&self.labels) {
            if &sp.label != label {
                return Err(Error::Format(format!(
                    "species label {label:?} does not match {:?}",
                    sp.label
                )));
            }
        }
        let grid = VelocityGrid::new(self.n_per_axis, self.extent)?;
        PlasmaState::new(grid, species.to_vec(), self.fields, self.time)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let s = u16::try_from(self.labels.len()).map_err(|_| Error::Format("too many species".into()))?;
        let n = u32::try_from(self.n_per_axis).map_err(|_| Error::Format("grid too large".into()))?;
        let cells = self.n_per_axis.pow(3);
        let mut out = Vec::with_capacity(24 + self.fields.len() * cells * 8);
        out.extend_from_slice(SNAPSHOT_MAGIC);
        out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        out.extend_from_slice(&s.to_le_bytes());
        out.extend_from_slice(&n.to_le_bytes());
        out.extend_from_slice(&self.extent.to_le_bytes());
        out.extend_from_slice(&self.time.to_le_bytes());
        for l in &self.labels {
            let len = u16::try_from(l.len()).map_err(|_| Error::Format(format!("label {l:?} too long")))?;
            out.extend_from_slice(&len.to_le_bytes());
            out.extend_from_slice(l.as_bytes());
        }
        if self.fields.len() != self.labels.len() {
            return Err(Error::Format("field and label counts differ".into()));
        }
        for f in &self.fields {
            if f.len() != cells {
                return Err(Error::Format(format!("field has {} values, expected {cells}", f.len())));
            }
            for x in f {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != SNAPSHOT_MAGIC {
            return Err(Error::Format("bad magic bytes".into()));
        }
        let version = u16::from_le_bytes(cur.array()?);
        if version != SNAPSHOT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let s = u16::from_le_bytes(cur.array()?) as usize;
        let n = u32::from_le_bytes(cur.array()?) as usize;
        let extent = f64::from_le_bytes(cur.array()?);
        let time = f64::from_le_bytes(cur.array()?);
        let mut labels = Vec::with_capacity(s);
        for _ in 0..s {
            let len = u16::from_le_bytes(cur.array()?) as usize;
            let raw = cur.take(len)?;
            labels.push(String::from_utf8(raw.to_vec()).map_err(|_| Error::Format("label is not UTF-8".into()))?);
        }
        let cells = n
            .checked_pow(3)
            .ok_or_else(|| Error::Format("grid size overflows".into()))?;
        let expected = s
            .checked_mul(cells)
            .and_then(|x| x.checked_mul(8))
            .ok_or_else(|| Error::Format("payload size overflows".into()))?;
        let rest = bytes.len() - cur.pos;
        if rest != expected {
            return Err(Error::Format(format!("payload has {rest} bytes, expected {expected}")));
        }
        let fields = (0..s)
            .map(|_| {
                (0..cells)
                    .map(|_| cur.array().map(f64::from_le_bytes))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            extent,
            n_per_axis: n,
            time,
            labels,
            fields,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format("unexpected end of snapshot".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
}

/// Line-buffered CSV writer that flushes after every row, so partial
/// output survives a failed run.
pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
    columns: usize,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &[String]) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = Self {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
            columns: header.len(),
        };
        w.line(CSV_SCHEMA_LINE)?;
        w.line(&header.join(","))?;
        Ok(w)
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}")
            .and_then(|_| self.out.flush())
            .map_err(|e| Error::io(&self.path, e))
    }

    /// Writes one row; `leading` cells precede the numeric values.
    pub fn row(&mut self, leading: &[&str], values: &[f64]) -> Result<()> {
        debug_assert_eq!(leading.len() + values.len(), self.columns);
        let mut cells: Vec<String> = leading.iter().map(|s| s.to_string()).collect();
        cells.extend(values.iter().map(|v| format!("{v:e}")));
        self.line(&cells.join(","))
    }

    /// Appends a comment row describing a failure.
    pub fn error_record(&mut self, message: &str) -> Result<()> {
        self.line(&format!("# error: {}", message.replace('\n', " ")))
    }
}

/// Parsed CSV: header names and numeric rows, with any text column kept
/// separately.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Format(format!("{}: empty CSV", path.display())))?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r.get(k)?.parse().ok()).collect()
    }
}
