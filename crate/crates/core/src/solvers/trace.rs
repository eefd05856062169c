use std::io::Write;

use super::IterationRecord;
use crate::Result;

/// Writes the per-iteration history as CSV with a header row.
pub fn write_trace_csv<W: Write>(history: &[IterationRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for rec in history {
        w.serialize(rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_rows() {
        let rec = IterationRecord {
            iteration: 1,
            primal_residual: 0.5,
            dual_residual: 0.25,
            eps_pri: 0.1,
            eps_dual: 0.1,
            lagrangian: 2.0,
            objective: 1.5,
        };
        let mut buf = Vec::new();
        write_trace_csv(&[rec, IterationRecord { iteration: 2, ..rec }], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "iteration,primal_residual,dual_residual,eps_pri,eps_dual,lagrangian,objective");
        assert_eq!(lines[2], "2,0.5,0.25,0.1,0.1,2.0,1.5");
    }
}
