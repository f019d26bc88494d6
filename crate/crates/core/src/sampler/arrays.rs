use rand::Rng;

use super::mh::{mh_sample_locations, MhConfig};
use crate::error::Result;
use crate::reconstruct::RoiMap;

/// One chosen array position: top-left pixel, footprint side, and the mean
/// sampling mass under the footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayChoice {
    pub anchor: usize,
    pub side: usize,
    pub mass: f64,
}

/// Sum and pixel count of `m` over the `side x side` square at `(r0, c0)`,
/// clipped to the grid.
fn block(m: &RoiMap, r0: usize, c0: usize, side: usize) -> (f64, usize) {
    let (r1, c1) = ((r0 + side).min(m.rows), (c0 + side).min(m.cols));
    let mut s = 0.0;
    for r in r0..r1 {
        s += m.m[r * m.cols + c0..r * m.cols + c1].iter().sum::<f64>();
    }
    (s, (r1 - r0) * (c1 - c0))
}

/// Mean of `m` over the pixels an `r x r` array samples when spread over a
/// `side x side` footprint.
fn footprint_mean(m: &RoiMap, r0: usize, c0: usize, r: usize, side: usize) -> f64 {
    let stride = side / r;
    let (mut s, mut n) = (0.0, 0);
    for i in 0..r {
        for j in 0..r {
            let (pr, pc) = (r0 + i * stride, c0 + j * stride);
            if pr < m.rows && pc < m.cols {
                s += m.m[pr * m.cols + pc];
                n += 1;
            }
        }
    }
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Picks `count` array positions on the `r`-aligned tiling of the grid.
///
/// Tiles are drawn by Metropolis-Hastings on the tile sums of `m`. Each tile
/// then keeps the native `r` footprint or zooms out to `2r` (sampling every
/// other pixel) when the mean mass of the `2r` block is at least `zoom_tie`
/// times that of the `r` block.
pub fn place_arrays<R: Rng>(m: &RoiMap, r: usize, count: usize, zoom_tie: f64, rng: R, cfg: &MhConfig) -> Result<Vec<ArrayChoice>> {
    let r = r.max(1);
    let (tr, tc) = (m.rows.div_ceil(r), m.cols.div_ceil(r));
    let tiles: Vec<f64> = (0..tr * tc).map(|t| block(m, (t / tc) * r, (t % tc) * r, r).0).collect();
    let picks = mh_sample_locations(&tiles, count, rng, cfg)?;
    let zoom_allowed = r > 1 && 2 * r <= m.rows.min(m.cols);
    Ok(picks
        .into_iter()
        .map(|t| {
            let (r0, c0) = ((t / tc) * r, (t % tc) * r);
            let (s_r, n_r) = block(m, r0, c0, r);
            let mean_r = s_r / n_r as f64;
            let side = if zoom_allowed {
                let (s2, n2) = block(m, r0, c0, 2 * r);
                if s2 / n2 as f64 >= zoom_tie * mean_r {
                    2 * r
                } else {
                    r
                }
            } else {
                r
            };
            ArrayChoice { anchor: r0 * m.cols + c0, side, mass: footprint_mean(m, r0, c0, r, side) }
        })
        .collect())
}
