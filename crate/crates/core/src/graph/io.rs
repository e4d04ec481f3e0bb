use std::io::Write;

use super::build::Graph;
use crate::scalar::Scalar;

impl<T: Scalar> Graph<T> {
    /// Writes one `i j weight` line per stored entry, diagonal included.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.n {
            let (cols, ws) = self.row(i);
            for (j, x) in cols.iter().zip(ws) {
                writeln!(w, "{i} {j} {:e}", x.as_f64())?;
            }
        }
        Ok(())
    }

    /// Writes one degree per line.
    pub fn write_degrees<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for d in &self.deg {
            writeln!(w, "{:e}", d.as_f64())?;
        }
        Ok(())
    }
}
