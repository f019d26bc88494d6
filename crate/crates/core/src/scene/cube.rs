use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Magic prefix of the binary cube format.
pub const CUBE_MAGIC: &[u8; 16] = b"SPLIDARCUBE\0v001";

/// Photon-count histograms `y[n, l, t]` with accumulated dwell per pixel.
///
/// Counts are stored pixel-major (row-major pixels, then wavelength, then bin),
/// matching the on-disk layout.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramCube {
    rows: usize,
    cols: usize,
    wavelengths: usize,
    bins: usize,
    counts: Vec<u32>,
    dwell: Vec<f64>,
}

impl HistogramCube {
    pub fn new(rows: usize, cols: usize, wavelengths: usize, bins: usize) -> Self {
        let n = rows * cols;
        HistogramCube {
            rows,
            cols,
            wavelengths,
            bins,
            counts: vec![0; n * wavelengths * bins],
            dwell: vec![0.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    pub fn wavelengths(&self) -> usize {
        self.wavelengths
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    fn stride(&self) -> usize {
        self.wavelengths * self.bins
    }

    /// All `L x T` counts of pixel `n`.
    pub fn pixel(&self, n: usize) -> &[u32] {
        let s = self.stride();
        &self.counts[n * s..(n + 1) * s]
    }

    pub fn channel(&self, n: usize, l: usize) -> &[u32] {
        let start = n * self.stride() + l * self.bins;
        &self.counts[start..start + self.bins]
    }

    pub fn dwell(&self, n: usize) -> f64 {
        self.dwell[n]
    }

    pub fn dwells(&self) -> &[f64] {
        &self.dwell
    }

    pub fn is_scanned(&self, n: usize) -> bool {
        self.dwell[n] > 0.0
    }

    pub fn photons(&self, n: usize) -> u64 {
        self.pixel(n).iter().map(|&c| c as u64).sum()
    }

    /// Adds one acquisition of `dwell` seconds at pixel `n`.
    pub fn accumulate(&mut self, n: usize, counts: &[u32], dwell: f64) {
        debug_assert_eq!(counts.len(), self.stride());
        debug_assert!(dwell > 0.0);
        let s = self.stride();
        for (dst, &src) in self.counts[n * s..(n + 1) * s].iter_mut().zip(counts) {
            *dst = dst.saturating_add(src);
        }
        self.dwell[n] += dwell;
    }

    /// Element-wise sum of counts and dwell.
    pub fn merge(&mut self, other: &HistogramCube) -> Result<()> {
        if (self.rows, self.cols, self.wavelengths, self.bins)
            != (other.rows, other.cols, other.wavelengths, other.bins)
        {
            return Err(Error::DimensionMismatch("cannot merge cubes of different shape".into()));
        }
        for (a, &b) in self.counts.iter_mut().zip(&other.counts) {
            *a = a.saturating_add(b);
        }
        for (a, &b) in self.dwell.iter_mut().zip(&other.dwell) {
            *a += b;
        }
        Ok(())
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let mut w = BufWriter::new(w);
        let io = |e| Error::io("<cube stream>", e);
        w.write_all(CUBE_MAGIC).map_err(io)?;
        for dim in [self.rows, self.cols, self.wavelengths, self.bins] {
            let dim = u32::try_from(dim).map_err(|_| Error::malformed("cube", "dimension exceeds u32"))?;
            w.write_all(&dim.to_le_bytes()).map_err(io)?;
        }
        for &c in &self.counts {
            w.write_all(&c.to_le_bytes()).map_err(io)?;
        }
        for &d in &self.dwell {
            w.write_all(&d.to_le_bytes()).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let mut r = BufReader::new(r);
        let io = |e: std::io::Error| Error::malformed("cube", e.to_string());
        let mut magic = [0u8; 16];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != CUBE_MAGIC {
            return Err(Error::malformed("cube", "bad magic"));
        }
        let mut dims = [0usize; 4];
        let mut word = [0u8; 4];
        for d in dims.iter_mut() {
            r.read_exact(&mut word).map_err(io)?;
            *d = u32::from_le_bytes(word) as usize;
        }
        let [rows, cols, wavelengths, bins] = dims;
        let n = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(wavelengths)?.checked_mul(bins).map(|c| (n, c)))
            .ok_or_else(|| Error::malformed("cube", "dimensions overflow"))?;
        let (pixels, total) = n;
        let mut raw = vec![0u8; total * 4];
        r.read_exact(&mut raw).map_err(io)?;
        let counts = raw.chunks_exact(4).map(|b| u32::from_le_bytes(b.try_into().unwrap())).collect();
        let mut raw = vec![0u8; pixels * 8];
        r.read_exact(&mut raw).map_err(io)?;
        let dwell: Vec<f64> = raw.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing).map_err(io)? != 0 {
            return Err(Error::malformed("cube", "trailing bytes"));
        }
        let cube = HistogramCube { rows, cols, wavelengths, bins, counts, dwell };
        for p in 0..pixels {
            let d = cube.dwell[p];
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::malformed("cube", format!("pixel {p}: invalid dwell {d}")));
            }
            if d == 0.0 && cube.photons(p) > 0 {
                return Err(Error::malformed("cube", format!("pixel {p}: counts without dwell")));
            }
        }
        Ok(cube)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let mut cube = HistogramCube::new(1, 2, 1, 3);
        cube.accumulate(1, &[1, 2, 3], 0.5);
        let mut buf = Vec::new();
        cube.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..16], CUBE_MAGIC);
        assert_eq!(&buf[16..20], &1u32.to_le_bytes());
        assert_eq!(&buf[20..24], &2u32.to_le_bytes());
        assert_eq!(&buf[24..28], &1u32.to_le_bytes());
        assert_eq!(&buf[28..32], &3u32.to_le_bytes());
        // pixel 1 counts follow pixel 0's three zero counts
        assert_eq!(&buf[44..48], &1u32.to_le_bytes());
        assert_eq!(buf.len(), 32 + 6 * 4 + 2 * 8);
        assert_eq!(&buf[buf.len() - 8..], &0.5f64.to_le_bytes());
    }

    #[test]
    fn rejects_corrupt_input() {
        let cube = HistogramCube::new(2, 2, 1, 4);
        let mut buf = Vec::new();
        cube.write_to(&mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(HistogramCube::read_from(&bad[..]).is_err());
        assert!(HistogramCube::read_from(&buf[..buf.len() - 1]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(HistogramCube::read_from(&extra[..]).is_err());
        // counts at an unscanned pixel
        let mut orphan = buf;
        orphan[32] = 1;
        assert!(HistogramCube::read_from(&orphan[..]).is_err());
    }

    #[test]
    fn merge_is_additive() {
        let mut a = HistogramCube::new(1, 1, 2, 2);
        a.accumulate(0, &[1, 0, 2, 0], 1.0);
        let mut b = HistogramCube::new(1, 1, 2, 2);
        b.accumulate(0, &[0, 3, 1, 0], 2.0);
        a.merge(&b).unwrap();
        assert_eq!(a.pixel(0), &[1, 3, 3, 0]);
        assert_eq!(a.dwell(0), 3.0);
        assert!(a.merge(&HistogramCube::new(1, 1, 1, 2)).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_identical(
            rows in 1usize..4, cols in 1usize..4, l in 1usize..3, t in 1usize..6,
            seed in any::<u64>(),
        ) {
            let mut cube = HistogramCube::new(rows, cols, l, t);
            let mut state = seed;
            for n in 0..rows * cols {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                if state >> 63 == 1 {
                    let counts: Vec<u32> = (0..l * t).map(|i| ((state >> (i % 48)) & 0xffff) as u32).collect();
                    cube.accumulate(n, &counts, f64::from_bits(0x3f00_0000_0000_0000 | (state >> 12)));
                }
            }
            let mut buf = Vec::new();
            cube.write_to(&mut buf).unwrap();
            let back = HistogramCube::read_from(&buf[..]).unwrap();
            prop_assert_eq!(&back, &cube);
            for n in 0..rows * cols {
                prop_assert_eq!(back.dwell(n).to_bits(), cube.dwell(n).to_bits());
            }
        }
    }
}
