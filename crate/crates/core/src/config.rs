//! Run configuration files and their resolution into scenes and models.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::presets::{self, Preset};
use crate::harness::{run_adaptive, run_static, ExperimentConfig, ExperimentTrace, RecordedSource, ReferenceMaps, StaticStrategy};
use crate::inference::Engine;
use crate::scene::{build_phantom, GroundTruthScene, HistogramCube, Irf, PhantomSpec, SpectralLibrary};
use crate::simulate::Simulator;

/// `Duration` as decimal seconds, rounded to the nanosecond.
pub mod secs {
    use std::time::Duration;

    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn from_f64(s: f64) -> Option<Duration> {
        (s.is_finite() && s >= 0.0 && s < 1.8e10).then(|| Duration::from_nanos((s * 1e9).round() as u64))
    }

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        from_f64(v).ok_or_else(|| D::Error::custom(format!("{v} is not a valid number of seconds")))
    }
}

/// Built-in phantoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetName {
    #[serde(rename = "classification_40")]
    Classification40,
    #[serde(rename = "small_target_64")]
    SmallTarget64,
    #[serde(rename = "mannequin_142")]
    Mannequin142,
    #[serde(rename = "lego_200")]
    Lego200,
}

/// Where the photons come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SceneSource {
    /// Built-in phantom. `signal`, `sbr` and `unit_dwell` only apply to
    /// `small_target_64` (defaults 2, 1 and 1 ms).
    Preset {
        name: PresetName,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        signal: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sbr: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        unit_dwell: Option<f64>,
    },
    /// Phantom described inline; needs `[library]` and `[irf]`.
    Phantom { spec: PhantomSpec },
    /// Recorded cube; the reference maps are estimated from the full cube.
    Cube { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LibrarySource {
    Inline { library: SpectralLibrary },
    /// TOML file holding a [`SpectralLibrary`].
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IrfSource {
    /// Gaussian per wavelength, `(sigma, centre)` in bins.
    Gaussian { shapes: Vec<(f64, f64)>, bin_width: f64 },
    /// Whitespace table, one row per bin and one column per wavelength.
    File { path: PathBuf, bin_width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Strategy {
    Adaptive,
    Uniform { stride: usize },
    Random { ratio: f64 },
}

impl Strategy {
    pub fn as_static(self) -> Option<StaticStrategy> {
        match self {
            Strategy::Adaptive => None,
            Strategy::Uniform { stride } => Some(StaticStrategy::Uniform { stride }),
            Strategy::Random { ratio } => Some(StaticStrategy::Random { ratio }),
        }
    }
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn adaptive() -> Strategy {
    Strategy::Adaptive
}

/// One experiment: scene, models, loop settings and output directory.
/// Relative paths resolve against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default = "adaptive")]
    pub strategy: Strategy,
    pub scene: SceneSource,
    /// Overrides the preset library; required otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub library: Option<LibrarySource>,
    /// Overrides the preset IRF; required otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub irf: Option<IrfSource>,
    pub experiment: ExperimentConfig,
}

/// Scene with its models, ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub library: SpectralLibrary,
    pub irf: Irf,
    /// Phantom description when the scene is synthetic.
    pub phantom: Option<PhantomSpec>,
    pub data: SceneData,
}

#[derive(Debug, Clone)]
pub enum SceneData {
    Truth(GroundTruthScene),
    Recorded(HistogramCube),
}

/// 1-based line of `key` inside the table `table` (dotted), if present.
fn locate(text: &str, table: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[').and_then(|h| h.split(']').next()) {
            current = h.trim_matches(|c| c == '[' || c == ' ').to_string();
            if !key.is_empty() || current != table {
                continue;
            }
            return Some(i + 1);
        }
        if current == table {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check().map_err(|(table, key, msg)| {
            let at = locate(text, table, key).or_else(|| locate(text, table, "")).map(|l| format!("line {l}: ")).unwrap_or_default();
            let name = if key.is_empty() { table.to_string() } else { format!("{table}.{key}") };
            Error::Config(format!("{at}{name}: {msg}"))
        })?;
        Ok(cfg)
    }

    /// Parses, validates and makes every path absolute.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let base = std::path::absolute(&base).map_err(|e| Error::io(&base, e))?;
        cfg.rebase(&base);
        cfg.check_files()?;
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output);
        if let SceneSource::Cube { path } = &mut self.scene {
            fix(path);
        }
        if let Some(LibrarySource::File { path }) = &mut self.library {
            fix(path);
        }
        if let Some(IrfSource::File { path, .. }) = &mut self.irf {
            fix(path);
        }
    }

    fn check_files(&self) -> Result<()> {
        let mut files = Vec::new();
        if let SceneSource::Cube { path } = &self.scene {
            files.push(path);
        }
        if let Some(LibrarySource::File { path }) = &self.library {
            files.push(path);
        }
        if let Some(IrfSource::File { path, .. }) = &self.irf {
            files.push(path);
        }
        match files.into_iter().find(|p| !p.is_file()) {
            Some(p) => Err(Error::Config(format!("referenced file {} does not exist", p.display()))),
            None => Ok(()),
        }
    }

    /// Range checks; errors name the offending table and key.
    fn check(&self) -> std::result::Result<(), (&'static str, &'static str, String)> {
        let e = &self.experiment;
        let s = &e.scenario;
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !matches!(self.scene, SceneSource::Preset { .. }) && (self.library.is_none() || self.irf.is_none()) {
            return Err(("scene", "kind", "phantom and cube scenes need [library] and [irf]".into()));
        }
        if let SceneSource::Preset { signal, sbr, unit_dwell, .. } = self.scene {
            for (key, v) in [("signal", signal), ("sbr", sbr), ("unit_dwell", unit_dwell)] {
                if v.is_some_and(|v| !positive(v)) {
                    return Err(("scene", key, "must be positive".into()));
                }
            }
        }
        match self.strategy {
            Strategy::Uniform { stride: 0 } => return Err(("strategy", "stride", "must be at least 1".into())),
            Strategy::Random { ratio } if !(ratio > 0.0 && ratio <= 1.0) => {
                return Err(("strategy", "ratio", format!("{ratio} outside (0, 1]")))
            }
            _ => {}
        }
        if s.array == 0 {
            return Err(("experiment.scenario", "array", "must be at least 1".into()));
        }
        if s.points == 0 {
            return Err(("experiment.scenario", "points", "must be at least 1".into()));
        }
        if s.t0.is_zero() {
            return Err(("experiment.scenario", "t0", "must be positive".into()));
        }
        if !(s.importance >= 1.0 && s.importance.is_finite()) {
            return Err(("experiment.scenario", "importance", "must be at least 1".into()));
        }
        if s.min_t0 > s.max_t0 {
            return Err(("experiment.scenario", "min_t0", "exceeds max_t0".into()));
        }
        if !(s.zoom_tie > 0.0 && s.zoom_tie <= 1.0) {
            return Err(("experiment.scenario", "zoom_tie", "must lie in (0, 1]".into()));
        }
        if !(e.stop.xi >= 0.0 && e.stop.xi.is_finite()) {
            return Err(("experiment.stop", "xi", "must be non-negative".into()));
        }
        if e.stop.max_iterations == 0 {
            return Err(("experiment.stop", "max_iterations", "must be at least 1".into()));
        }
        let q = &e.inference.quadrature;
        if q.nodes < crate::inference::QuadratureSpec::MIN_NODES {
            return Err(("experiment.inference.quadrature", "nodes", format!("at least {} required", crate::inference::QuadratureSpec::MIN_NODES)));
        }
        if !(positive(q.omega_min) && q.omega_max > q.omega_min && q.omega_max.is_finite()) {
            return Err(("experiment.inference.quadrature", "omega_min", "need 0 < omega_min < omega_max".into()));
        }
        if e.inference.class_prior.as_ref().is_some_and(|p| p.iter().any(|&v| !positive(v))) {
            return Err(("experiment.inference", "class_prior", "entries must be positive".into()));
        }
        let r = &e.reconstruction;
        if r.max_wind == 0 {
            return Err(("experiment.reconstruction", "max_wind", "must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&r.floor) {
            return Err(("experiment.reconstruction", "floor", "must lie in [0, 1]".into()));
        }
        if !(e.processing.parallelism >= 1.0 && e.processing.parallelism.is_finite()) {
            return Err(("experiment.processing", "parallelism", "must be at least 1".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Writes the effective configuration, which reloads to an identical run.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    fn preset(&self) -> Result<Option<Preset>> {
        let SceneSource::Preset { name, signal, sbr, unit_dwell } = self.scene else {
            return Ok(None);
        };
        let p = match name {
            PresetName::Classification40 => presets::classification_40()?,
            PresetName::SmallTarget64 => {
                presets::small_target_64(signal.unwrap_or(2.0), sbr.unwrap_or(1.0), unit_dwell.unwrap_or(1e-3))?
            }
            PresetName::Mannequin142 => presets::mannequin_142()?,
            PresetName::Lego200 => presets::lego_200()?,
        };
        Ok(Some(p))
    }

    /// Loads or builds the scene and models.
    pub fn resolve(&self) -> Result<Resolved> {
        let preset = self.preset()?;
        let bins = match (&self.scene, &preset) {
            (_, Some(p)) => p.spec.bins,
            (SceneSource::Phantom { spec }, None) => spec.bins,
            (SceneSource::Cube { path }, None) => HistogramCube::load(path)?.bins(),
            _ => unreachable!(),
        };
        let library = match &self.library {
            Some(LibrarySource::Inline { library }) => library.clone(),
            Some(LibrarySource::File { path }) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let lib: SpectralLibrary =
                    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                lib.validate()?;
                lib
            }
            None => preset.as_ref().map(|p| p.library.clone()).ok_or_else(|| Error::Config("missing [library]".into()))?,
        };
        let irf = match &self.irf {
            Some(IrfSource::Gaussian { shapes, bin_width }) => Irf::gaussian(bins, shapes, *bin_width)?,
            Some(IrfSource::File { path, bin_width }) => Irf::load(path, bins, *bin_width)?,
            None => preset.as_ref().map(|p| p.irf.clone()).ok_or_else(|| Error::Config("missing [irf]".into()))?,
        };
        let phantom = match (&self.scene, preset) {
            (_, Some(p)) => Some(p.spec),
            (SceneSource::Phantom { spec }, None) => Some(spec.clone()),
            _ => None,
        };
        let data = match (&self.scene, &phantom) {
            (_, Some(spec)) => SceneData::Truth(build_phantom(spec, &library)?),
            (SceneSource::Cube { path }, None) => SceneData::Recorded(HistogramCube::load(path)?),
            _ => unreachable!(),
        };
        Ok(Resolved { library, irf, phantom, data })
    }
}

impl Resolved {
    pub fn engine(&self, cfg: &ExperimentConfig) -> Result<Engine> {
        Engine::new(self.irf.clone(), self.library.clone(), &cfg.inference)
    }

    pub fn rows(&self) -> usize {
        match &self.data {
            SceneData::Truth(s) => s.rows,
            SceneData::Recorded(c) => c.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match &self.data {
            SceneData::Truth(s) => s.cols,
            SceneData::Recorded(c) => c.cols(),
        }
    }

    pub fn reference(&self, engine: &Engine) -> Result<ReferenceMaps> {
        match &self.data {
            SceneData::Truth(s) => Ok(ReferenceMaps::from_scene(s)),
            SceneData::Recorded(c) => ReferenceMaps::from_cube(c, engine),
        }
    }

    /// Runs `strategy` under `cfg`.
    pub fn run(&self, strategy: Strategy, cfg: &ExperimentConfig) -> Result<ExperimentTrace> {
        let engine = self.engine(cfg)?;
        let reference = self.reference(&engine)?;
        let go = |source: &dyn crate::simulate::PhotonSource| match strategy.as_static() {
            None => run_adaptive(source, &engine, &reference, cfg),
            Some(st) => run_static(source, &engine, &reference, st, cfg),
        };
        match &self.data {
            SceneData::Truth(s) => go(&Simulator::new(s, &self.irf)),
            SceneData::Recorded(c) => go(&RecordedSource::new(c.clone())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
output = "out"

[strategy]
kind = "random"
ratio = 0.3

[scene]
kind = "preset"
name = "small_target_64"
sbr = 1.0

[experiment]
seed = 4

[experiment.scenario]
mode = "sequential"
t0 = 0.003
mirror_move = 0.00015
points = 256
importance = 3.0

[experiment.stop]
xi = 0.0
max_dwell = 0.06
max_points = 1000000
max_iterations = 5
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_toml(SMALL).unwrap();
        assert_eq!(cfg.strategy, Strategy::Random { ratio: 0.3 });
        let again = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = SMALL.replace("importance = 3.0", "importance = 3.0\nexploration = 0.1");
        let err = RunConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("exploration"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn range_errors_carry_lines() {
        let text = SMALL.replace("points = 256", "points = 0");
        let err = RunConfig::from_toml(&text).unwrap_err().to_string();
        let line = SMALL.lines().position(|l| l.starts_with("points")).unwrap() + 1;
        assert!(err.contains(&format!("line {line}: experiment.scenario.points")), "{err}");
        let text = SMALL.replace("ratio = 0.3", "ratio = 1.5");
        assert!(RunConfig::from_toml(&text).unwrap_err().to_string().contains("strategy.ratio"));
    }

    #[test]
    fn phantom_scene_needs_models() {
        let text = SMALL.replace(
            "kind = \"preset\"\nname = \"small_target_64\"\nsbr = 1.0",
            "kind = \"phantom\"\nspec = { rows = 4, cols = 4, bins = 16, unit_dwell = 1.0, background = [0.1] }",
        );
        let err = RunConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("[library]"), "{err}");
    }

    #[test]
    fn presets_resolve() {
        let r = RunConfig::from_toml(SMALL).unwrap().resolve().unwrap();
        assert_eq!((r.rows(), r.cols(), r.irf.bins()), (64, 64, 256));
    }
}
