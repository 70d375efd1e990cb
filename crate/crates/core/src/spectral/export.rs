use std::io::Write;

use super::field::GridField;
use crate::error::{Error, Result};

impl GridField {
    /// One-dimensional snapshot as CSV with columns `x,u`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if self.domain().dim() != 1 {
            return Err(Error::Range("CSV snapshots are one-dimensional".into()));
        }
        writeln!(w, "x,u")?;
        for (i, v) in self.values().iter().enumerate() {
            writeln!(w, "{:.17e},{:.17e}", self.domain().grid_coords(i)[0], v)?;
        }
        Ok(())
    }

    /// Two-dimensional snapshot as binary PGM (P5), linearly rescaled to
    /// `[0, 255]`. Rows follow axis 0.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.domain();
        if d.dim() != 2 {
            return Err(Error::Range("PGM snapshots are two-dimensional".into()));
        }
        let (rows, cols) = (d.grid()[0], d.grid()[1]);
        let lo = self.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        write!(w, "P5\n{cols} {rows}\n255\n")?;
        let bytes: Vec<u8> = self
            .values()
            .iter()
            .map(|v| (((v - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect();
        w.write_all(&bytes)?;
        Ok(())
    }
}
