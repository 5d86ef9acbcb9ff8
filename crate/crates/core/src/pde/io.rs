//! Plain-text snapshot files.
//!
//! Layout: one header line `nx ny x0 x1 y0 y1 t`, then `nx·ny` values in
//! row-major order, one per line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::grid::{Grid, ScalarField};
use crate::error::{Error, Result};

pub fn format_snapshot(field: &ScalarField, t: f64) -> String {
    let g = field.grid();
    let mut out = String::with_capacity(24 * (g.len() + 1));
    let _ = writeln!(
        out,
        "{} {} {} {} {} {} {}",
        g.nx, g.ny, g.x0, g.x1, g.y0, g.y1, t
    );
    for v in field.values() {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn parse_snapshot(text: &str) -> Result<(ScalarField, f64)> {
    let bad = |msg: String| Error::InvalidArgument(format!("snapshot: {msg}"));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 7 {
        return Err(bad(format!("header needs 7 fields, found {}", parts.len())));
    }
    let nx: usize = parts[0]
        .parse()
        .map_err(|_| bad(format!("bad nx '{}'", parts[0])))?;
    let ny: usize = parts[1]
        .parse()
        .map_err(|_| bad(format!("bad ny '{}'", parts[1])))?;
    let mut nums = [0.0; 5];
    for (slot, raw) in nums.iter_mut().zip(&parts[2..]) {
        *slot = raw
            .parse()
            .map_err(|_| bad(format!("bad header value '{raw}'")))?;
    }
    let [x0, x1, y0, y1, t] = nums;
    let grid = Grid::new(nx, ny, (x0, x1, y0, y1))?;
    let values = lines
        .enumerate()
        .map(|(k, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("bad value '{}' at data line {}", l.trim(), k + 1)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((ScalarField::from_values(grid, values)?, t))
}

pub fn write_snapshot(path: &Path, field: &ScalarField, t: f64) -> Result<()> {
    write_atomic(path, &format_snapshot(field, t))
}

pub fn read_snapshot(path: &Path) -> Result<(ScalarField, f64)> {
    parse_snapshot(&fs::read_to_string(path)?)
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let g = Grid::new(5, 3, (-2.0, 2.0, -1.5, 0.25)).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (x * 1.7).sin() / 3.0 + y * 1e-7);
        let text = format_snapshot(&f, 12.5);
        assert!(text.starts_with("5 3 -2 2 -1.5 0.25 12.5\n"));
        assert_eq!(text.lines().count(), 16);
        let (back, t) = parse_snapshot(&text).unwrap();
        assert_eq!(t, 12.5);
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_short_or_malformed() {
        assert!(parse_snapshot("").is_err());
        assert!(parse_snapshot("3 3 0 1 0 1\n").is_err());
        assert!(parse_snapshot("3 3 0 1 0 1 0\n1\n2\n").is_err());
        let mut text = String::from("3 3 0 1 0 1 0\n");
        text.push_str(&"0.5\n".repeat(8));
        text.push_str("x\n");
        assert!(parse_snapshot(&text).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("T.txt");
        let f = ScalarField::constant(Grid::square(4).unwrap(), 0.25);
        write_snapshot(&path, &f, 1.0).unwrap();
        assert_eq!(read_snapshot(&path).unwrap(), (f, 1.0));
    }
}
