use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Whitespace-separated matrix, one grid row per line.
pub fn matrix_text(rows: usize, cols: usize, values: &[f64]) -> String {
    assert_eq!(values.len(), rows * cols);
    let mut s = String::new();
    for r in 0..rows {
        let line: Vec<String> = values[r * cols..(r + 1) * cols].iter().map(|v| format!("{v}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

pub fn write_matrix(path: impl AsRef<Path>, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, matrix_text(rows, cols, values)).map_err(|e| Error::io(path, e))
}

/// Binary 16-bit PGM with values mapped linearly from `[min, max]` to
/// `[0, 65535]`; non-finite values become 0.
pub fn pgm16(rows: usize, cols: usize, values: &[f64]) -> Vec<u8> {
    assert_eq!(values.len(), rows * cols);
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!("P5\n{cols} {rows}\n65535\n").into_bytes();
    for &v in values {
        let q = if v.is_finite() { (((v - lo) / span) * 65535.0).round() as u16 } else { 0 };
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

pub fn write_pgm16(path: impl AsRef<Path>, rows: usize, cols: usize, values: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&pgm16(rows, cols, values)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_header_and_range() {
        let b = pgm16(1, 2, &[0.0, 4.0]);
        assert!(b.starts_with(b"P5\n2 1\n65535\n"));
        assert_eq!(&b[b.len() - 4..], &[0, 0, 0xff, 0xff]);
    }

    #[test]
    fn matrix_layout() {
        assert_eq!(matrix_text(2, 2, &[1.0, 2.0, 3.5, 4.0]), "1 2\n3.5 4\n");
    }
}
