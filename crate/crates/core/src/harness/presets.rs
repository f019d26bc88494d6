//! Ready-made phantoms used by the examples, benchmarks and tests.

use crate::error::Result;
use crate::scene::{build_phantom, GroundTruthScene, Irf, PhantomSpec, Primitive, Shape, SpectralLibrary};

/// Scene description together with the models that generated it.
#[derive(Debug, Clone)]
pub struct Preset {
    pub spec: PhantomSpec,
    pub library: SpectralLibrary,
    pub irf: Irf,
}

impl Preset {
    pub fn scene(&self) -> Result<GroundTruthScene> {
        build_phantom(&self.spec, &self.library)
    }
}

fn rect(row: usize, col: usize, height: usize, width: usize, class: usize, depth: usize) -> Primitive {
    Primitive { shape: Shape::Rect { row, col, height, width }, class, depth, reflectivity: None }
}

fn disk(row: usize, col: usize, radius: usize, class: usize, depth: usize) -> Primitive {
    Primitive { shape: Shape::Disk { row, col, radius }, class, depth, reflectivity: None }
}

/// Mean signal photons per wavelength of the three classes of
/// [`classification_40`], over a 5 ms dwell.
pub const CLASS_SIGNATURES: [[f64; 4]; 3] = [[22.0, 12.0, 5.0, 3.0], [3.0, 5.0, 12.0, 22.0], [6.0, 15.0, 15.0, 6.0]];

/// 40 x 40 grid, three classes over four wavelengths, `T = 1500`, 42 signal
/// photons per target pixel at a signal-to-background ratio of 0.6.
///
/// Region sizes are 240, 66 and 260 pixels, leaving 1034 background pixels.
pub fn classification_40() -> Result<Preset> {
    let bins = 1500;
    let dwell = 5e-3;
    let signal = 42.0;
    let sbr = 0.6;
    let bg_total = signal / sbr / 4.0;
    let means: Vec<Vec<f64>> = CLASS_SIGNATURES.iter().map(|r| r.to_vec()).collect();
    let library = SpectralLibrary::from_signatures(&means, 10.0, &[bg_total; 4], bins, dwell)?;
    let irf = Irf::gaussian(bins, &[(4.0, 20.0), (5.0, 20.0), (6.0, 22.0), (7.0, 24.0)], 2e-12)?;
    let spec = PhantomSpec {
        rows: 40,
        cols: 40,
        bins,
        unit_dwell: dwell,
        background: vec![bg_total / bins as f64],
        background_depth: 0,
        shapes: vec![rect(2, 2, 12, 20, 1, 400), rect(4, 28, 6, 11, 2, 700), rect(20, 2, 13, 20, 3, 1000)],
    };
    Ok(Preset { spec, library, irf })
}

/// 64 x 64 single-class scene with a small target (about 7% of the pixels)
/// at four depths, `T = 256`, narrow IRF. `signal` photons per `unit_dwell`
/// on the target and background scaled to signal-to-background ratio `sbr`.
pub fn small_target_64(signal: f64, sbr: f64, unit_dwell: f64) -> Result<Preset> {
    let bins = 256;
    let library = SpectralLibrary::non_informative(1, &[signal], bins, unit_dwell)?;
    let irf = Irf::gaussian(bins, &[(1.5, 8.0)], 25e-12)?;
    let spec = PhantomSpec {
        rows: 64,
        cols: 64,
        bins,
        unit_dwell,
        background: vec![signal / sbr / bins as f64],
        background_depth: 0,
        shapes: vec![
            disk(14, 16, 5, 1, 100),
            rect(40, 10, 8, 12, 1, 150),
            disk(20, 46, 4, 1, 60),
            rect(48, 42, 6, 10, 1, 200),
        ],
    };
    Ok(Preset { spec, library, irf })
}

/// Single-wavelength human-like silhouette, 142 x 142, `T = 191`.
pub fn mannequin_142() -> Result<Preset> {
    let bins = 191;
    let dwell = 1e-3;
    let signal = 50.0;
    let library = SpectralLibrary::non_informative(1, &[signal], bins, dwell)?;
    let irf = Irf::gaussian(bins, &[(2.0, 10.0)], 16e-12)?;
    let spec = PhantomSpec {
        rows: 142,
        cols: 142,
        bins,
        unit_dwell: dwell,
        background: vec![signal / 70.0 / bins as f64],
        background_depth: 0,
        shapes: vec![
            disk(22, 71, 12, 1, 90),
            rect(36, 50, 50, 42, 1, 95),
            rect(40, 34, 40, 12, 1, 100),
            rect(40, 96, 40, 12, 1, 100),
            rect(86, 52, 50, 16, 1, 92),
            rect(86, 74, 50, 16, 1, 92),
        ],
    };
    Ok(Preset { spec, library, irf })
}

/// Four-wavelength brick scene, 200 x 200, `T = 1500`, three classes.
pub fn lego_200() -> Result<Preset> {
    let bins = 1500;
    let dwell = 5e-3;
    let means: Vec<Vec<f64>> = CLASS_SIGNATURES.iter().map(|r| r.to_vec()).collect();
    let bg_total = 42.0 / 66.0 / 4.0;
    let library = SpectralLibrary::from_signatures(&means, 10.0, &[bg_total; 4], bins, dwell)?;
    let irf = Irf::gaussian(bins, &[(4.0, 20.0), (5.0, 20.0), (6.0, 22.0), (7.0, 24.0)], 2e-12)?;
    let spec = PhantomSpec {
        rows: 200,
        cols: 200,
        bins,
        unit_dwell: dwell,
        background: vec![bg_total / bins as f64],
        background_depth: 0,
        shapes: vec![
            rect(30, 20, 40, 70, 1, 600),
            rect(70, 20, 40, 70, 3, 620),
            rect(110, 20, 40, 70, 2, 640),
            rect(40, 110, 30, 60, 2, 700),
            rect(70, 110, 60, 30, 1, 710),
            rect(70, 140, 60, 30, 3, 720),
            rect(150, 100, 30, 80, 1, 680),
        ],
    };
    Ok(Preset { spec, library, irf })
}
