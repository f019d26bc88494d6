use serde::{Deserialize, Serialize};

use super::SpectralLibrary;
use crate::error::{Error, Result};

/// Dense ground truth on a `rows x cols` grid with `bins` time bins.
///
/// Reflectivity and background are expressed per `unit_dwell` seconds of
/// acquisition: `reflectivity` in expected signal photons, `background` in
/// expected photons per bin. Per-wavelength maps are stored pixel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthScene {
    pub rows: usize,
    pub cols: usize,
    pub bins: usize,
    pub wavelengths: usize,
    pub unit_dwell: f64,
    pub depth: Vec<usize>,
    pub class: Vec<usize>,
    pub reflectivity: Vec<f64>,
    pub background: Vec<f64>,
}

impl GroundTruthScene {
    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    pub fn reflectivity_at(&self, n: usize, l: usize) -> f64 {
        self.reflectivity[n * self.wavelengths + l]
    }

    pub fn background_at(&self, n: usize, l: usize) -> f64 {
        self.background[n * self.wavelengths + l]
    }

    /// Fraction of pixels carrying each class `0..=classes`.
    pub fn class_fractions(&self, classes: usize) -> Vec<f64> {
        let mut counts = vec![0usize; classes + 1];
        for &u in &self.class {
            counts[u] += 1;
        }
        counts.iter().map(|&c| c as f64 / self.pixels() as f64).collect()
    }

    /// Checks the structural invariants: no reflectivity on class-0 pixels,
    /// a positive reflectivity somewhere on every target pixel, depths in range.
    pub fn validate(&self) -> Result<()> {
        let n = self.pixels();
        if self.depth.len() != n
            || self.class.len() != n
            || self.reflectivity.len() != n * self.wavelengths
            || self.background.len() != n * self.wavelengths
        {
            return Err(Error::DimensionMismatch("scene maps do not match the grid".into()));
        }
        for p in 0..n {
            let refl = &self.reflectivity[p * self.wavelengths..(p + 1) * self.wavelengths];
            let empty = refl.iter().all(|&r| r == 0.0);
            if (self.class[p] == 0) != empty {
                return Err(Error::malformed("scene", format!("pixel {p}: class/reflectivity mismatch")));
            }
            if self.depth[p] >= self.bins {
                return Err(Error::malformed("scene", format!("pixel {p}: depth out of range")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    Rect { row: usize, col: usize, height: usize, width: usize },
    Disk { row: usize, col: usize, radius: usize },
}

impl Shape {
    fn fits(&self, rows: usize, cols: usize) -> bool {
        match *self {
            Shape::Rect { row, col, height, width } => {
                height > 0 && width > 0 && row + height <= rows && col + width <= cols
            }
            Shape::Disk { row, col, radius } => {
                row >= radius && col >= radius && row + radius < rows && col + radius < cols
            }
        }
    }

    fn contains(&self, r: usize, c: usize) -> bool {
        match *self {
            Shape::Rect { row, col, height, width } => {
                r >= row && r < row + height && c >= col && c < col + width
            }
            Shape::Disk { row, col, radius } => {
                let dr = r as i64 - row as i64;
                let dc = c as i64 - col as i64;
                dr * dr + dc * dc <= (radius * radius) as i64
            }
        }
    }
}

/// One piecewise-constant region. Later primitives overwrite earlier ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Primitive {
    pub shape: Shape,
    pub class: usize,
    pub depth: usize,
    /// Expected signal photons per unit dwell, per wavelength. Defaults to the
    /// library's class mean rescaled to the unit dwell.
    #[serde(default)]
    pub reflectivity: Option<Vec<f64>>,
}

/// Declarative scene description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    pub rows: usize,
    pub cols: usize,
    pub bins: usize,
    /// Seconds of acquisition that reflectivity/background levels refer to.
    pub unit_dwell: f64,
    /// Background photons per bin per unit dwell, one value per wavelength
    /// (a single value is broadcast).
    pub background: Vec<f64>,
    /// Depth bin assigned to pixels without a target.
    #[serde(default)]
    pub background_depth: usize,
    #[serde(default)]
    pub shapes: Vec<Primitive>,
}

/// Rasterizes `spec`. Deterministic in `(spec, library)`.
pub fn build_phantom(spec: &PhantomSpec, library: &SpectralLibrary) -> Result<GroundTruthScene> {
    let wavelengths = library.wavelengths();
    let classes = library.classes();
    if spec.rows == 0 || spec.cols == 0 || spec.bins == 0 {
        return Err(Error::invalid("phantom", "grid and bin counts must be positive"));
    }
    if !(spec.unit_dwell > 0.0) {
        return Err(Error::invalid("phantom.unit_dwell", "must be positive"));
    }
    let background: Vec<f64> = match spec.background.len() {
        1 => vec![spec.background[0]; wavelengths],
        n if n == wavelengths => spec.background.clone(),
        n => {
            return Err(Error::DimensionMismatch(format!(
                "phantom background has {n} values for {wavelengths} wavelengths"
            )))
        }
    };
    if background.iter().any(|&b| !(b >= 0.0)) {
        return Err(Error::invalid("phantom.background", "must be non-negative"));
    }
    if spec.background_depth >= spec.bins {
        return Err(Error::invalid("phantom.background_depth", "outside the histogram"));
    }

    let n = spec.rows * spec.cols;
    let mut scene = GroundTruthScene {
        rows: spec.rows,
        cols: spec.cols,
        bins: spec.bins,
        wavelengths,
        unit_dwell: spec.unit_dwell,
        depth: vec![spec.background_depth; n],
        class: vec![0; n],
        reflectivity: vec![0.0; n * wavelengths],
        background: (0..n).flat_map(|_| background.iter().copied()).collect(),
    };

    for (index, prim) in spec.shapes.iter().enumerate() {
        if !prim.shape.fits(spec.rows, spec.cols) {
            return Err(Error::PrimitiveOutOfBounds { index, rows: spec.rows, cols: spec.cols });
        }
        if prim.class > classes {
            return Err(Error::ClassOutOfRange { class: prim.class, classes });
        }
        if prim.depth >= spec.bins {
            return Err(Error::invalid("phantom.depth", format!("primitive {index}: bin {} >= {}", prim.depth, spec.bins)));
        }
        let refl: Vec<f64> = if prim.class == 0 {
            vec![0.0; wavelengths]
        } else {
            match &prim.reflectivity {
                Some(r) if r.len() == wavelengths => r.clone(),
                Some(r) => {
                    return Err(Error::DimensionMismatch(format!(
                        "primitive {index}: {} reflectivities for {wavelengths} wavelengths",
                        r.len()
                    )))
                }
                None => (0..wavelengths)
                    .map(|l| library.class_mean(prim.class, l) * spec.unit_dwell / library.reference_dwell)
                    .collect(),
            }
        };
        if prim.class != 0 && (refl.iter().any(|&r| !(r >= 0.0)) || refl.iter().all(|&r| r == 0.0)) {
            return Err(Error::invalid("phantom.reflectivity", format!("primitive {index}: target needs positive reflectivity")));
        }
        for r in 0..spec.rows {
            for c in 0..spec.cols {
                if prim.shape.contains(r, c) {
                    let p = r * spec.cols + c;
                    scene.class[p] = prim.class;
                    scene.depth[p] = if prim.class == 0 { spec.background_depth } else { prim.depth };
                    scene.reflectivity[p * wavelengths..(p + 1) * wavelengths].copy_from_slice(&refl);
                }
            }
        }
    }
    Ok(scene)
}

/// Signal-to-background ratio `r / (b T)`.
pub fn sbr_of(r: f64, b: f64, bins: usize) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    if b <= 0.0 {
        return Err(Error::UndefinedSbr);
    }
    Ok(r / (b * bins as f64))
}
