use std::io::{BufRead, Write};

use super::{Boundary, LatticeField, LatticeGrid};
use crate::error::{LabError, Result};

/// Writes `n,r,p` rows in index order. Floats use shortest round-trip form.
pub fn write_snapshot_csv<W: Write>(u: &LatticeField, mut out: W) -> Result<()> {
    writeln!(out, "n,r,p")?;
    for (i, (r, p)) in u.r().iter().zip(u.p()).enumerate() {
        writeln!(out, "{},{},{}", u.grid().site(i), r, p)?;
    }
    Ok(())
}

/// Reads a snapshot written by [`write_snapshot_csv`]. Sites must be contiguous.
pub fn read_snapshot_csv<R: BufRead>(input: R, boundary: Boundary) -> Result<LatticeField> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| LabError::Config("empty snapshot".into()))??;
    if header.trim() != "n,r,p" {
        return Err(LabError::Config(format!("unexpected snapshot header {header:?}")));
    }
    let mut sites = Vec::new();
    let mut r = Vec::new();
    let mut p = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || LabError::Config(format!("snapshot line {}: {line:?}", lineno + 2));
        let mut cols = line.split(',');
        let n: i64 = cols.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let rv: f64 = cols.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let pv: f64 = cols.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        if let Some(&last) = sites.last() {
            if n != last + 1 {
                return Err(LabError::Config(format!("snapshot sites not contiguous at n = {n}")));
            }
        }
        sites.push(n);
        r.push(rv);
        p.push(pv);
    }
    let (&first, &last) = match (sites.first(), sites.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(LabError::Config("snapshot has no rows".into())),
    };
    let grid = LatticeGrid::new(first, last, boundary)?;
    LatticeField::new(grid, r, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip_is_exact() {
        let g = LatticeGrid::zero_padded(-12, 12).unwrap();
        let u = LatticeField::from_fn(g, |n| ((n as f64 * 0.37).sin() / 3.0, 1e-300 * n as f64)).unwrap();
        let mut buf = Vec::new();
        write_snapshot_csv(&u, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,r,p\n-12,"));
        let back = read_snapshot_csv(buf.as_slice(), Boundary::ZeroPadding).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn rejects_gaps_and_bad_headers() {
        let text = "n,r,p\n0,0,0\n2,0,0\n";
        assert!(read_snapshot_csv(text.as_bytes(), Boundary::ZeroPadding).is_err());
        let text = "x,r,p\n0,0,0\n";
        assert!(read_snapshot_csv(text.as_bytes(), Boundary::ZeroPadding).is_err());
    }
}
