use serde::Serialize;

use super::metrics::{metrics, ReferenceMaps};
use super::presets::Preset;
use crate::error::{Error, Result};
use crate::inference::{Engine, InferenceConfig};
use crate::sampler::ScanPlan;
use crate::scene::{build_phantom, HistogramCube, SpectralLibrary};
use crate::simulate::{execute_plan, Simulator};

/// One cell of a signal-to-background ratio by photon-level sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub sbr: f64,
    /// Mean signal photons per target pixel, summed over wavelengths.
    pub photons: f64,
    pub rmse_bins: f64,
    pub acc: f64,
}

/// `preset` with its class signatures rescaled to `photons` mean signal per
/// target pixel and its background set to give `sbr` in every wavelength.
pub fn rescale(preset: &Preset, sbr: f64, photons: f64) -> Result<Preset> {
    if !(sbr > 0.0 && photons > 0.0 && sbr.is_finite() && photons.is_finite()) {
        return Err(Error::invalid("sweep", "ratios and photon levels must be positive"));
    }
    let lib = &preset.library;
    let (classes, wl) = (lib.classes(), lib.wavelengths());
    let mean: f64 = (1..=classes).map(|k| (0..wl).map(|l| lib.class_mean(k, l)).sum::<f64>()).sum::<f64>() / classes as f64;
    let s = photons / mean;
    let bins = preset.spec.bins as f64;
    let bg_total: Vec<f64> = (0..wl)
        .map(|l| (1..=classes).map(|k| lib.class_mean(k, l)).sum::<f64>() / classes as f64 * s / sbr)
        .collect();
    let library = SpectralLibrary::new(
        lib.alpha_r.clone(),
        lib.beta_r.iter().map(|row| row.iter().map(|b| b / s).collect()).collect(),
        vec![1.0; wl],
        bg_total.iter().map(|&m| bins / m).collect(),
        lib.reference_dwell,
    )?;
    let mut spec = preset.spec.clone();
    let unit = spec.unit_dwell / lib.reference_dwell;
    spec.background = bg_total.iter().map(|&m| m * unit / bins).collect();
    Ok(Preset { spec, library, irf: preset.irf.clone() })
}

/// Fully scans the rescaled phantom once at its unit dwell for every
/// `(sbr, photons)` pair and scores the per-pixel estimates without
/// inpainting.
pub fn sweep(preset: &Preset, sbrs: &[f64], photons: &[f64], inference: &InferenceConfig, seed: u64) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::with_capacity(sbrs.len() * photons.len());
    for &sbr in sbrs {
        for &ph in photons {
            let p = rescale(preset, sbr, ph)?;
            let scene = build_phantom(&p.spec, &p.library)?;
            let engine = Engine::new(p.irf.clone(), p.library.clone(), inference)?;
            let reference = ReferenceMaps::from_scene(&scene);
            let n = scene.pixels();
            let all: Vec<usize> = (0..n).collect();
            let dwell = std::time::Duration::from_secs_f64(scene.unit_dwell);
            let mut cube = HistogramCube::new(scene.rows, scene.cols, scene.wavelengths, scene.bins);
            execute_plan(&Simulator::new(&scene, &p.irf), &ScanPlan::pixels(0, &all, &vec![dwell; n]), &mut cube, seed);
            let (mut depth, mut labels) = (vec![0.0; n], vec![0; n]);
            for (i, e) in engine.estimate_pixels(&cube, &all).into_iter().enumerate() {
                let e = e?;
                depth[i] = e.depth as f64;
                labels[i] = e.label;
            }
            let m = metrics(&depth, &labels, &reference, engine.classes(), p.irf.bin_width());
            out.push(SweepPoint { sbr, photons: ph, rmse_bins: m.rmse_bins, acc: m.accuracy });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets;
    use crate::scene::sbr_of;

    #[test]
    fn rescale_hits_requested_levels() {
        let p = rescale(&presets::classification_40().unwrap(), 2.0, 30.0).unwrap();
        let scene = build_phantom(&p.spec, &p.library).unwrap();
        let target = scene.class.iter().position(|&u| u == 1).unwrap();
        let r: f64 = (0..4).map(|l| scene.reflectivity_at(target, l)).sum();
        let b: f64 = (0..4).map(|l| scene.background_at(target, l)).sum();
        let mean: f64 = (1..=3).map(|k| (0..4).map(|l| p.library.class_mean(k, l)).sum::<f64>()).sum::<f64>() / 3.0;
        assert!((mean - 30.0).abs() < 1e-9);
        assert!(r > 0.0);
        let sbr = sbr_of(mean, b, scene.bins).unwrap();
        assert!((sbr - 2.0).abs() < 1e-9, "{sbr}");
    }

    #[test]
    fn more_photons_help() {
        let p = presets::small_target_64(2.0, 1.0, 1e-3).unwrap();
        let pts = sweep(&p, &[1.0], &[1.0, 40.0], &InferenceConfig::default(), 3).unwrap();
        assert!(pts[1].acc > pts[0].acc);
        assert!(pts[1].rmse_bins < pts[0].rmse_bins);
        assert!(pts[1].acc > 0.99, "{pts:?}");
    }
}
