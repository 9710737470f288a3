//! Run configuration, read from TOML.
//!
//! Unknown keys are rejected everywhere. Relative paths are resolved against
//! the directory of the configuration file, and the resolved values are what
//! the manifest records.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const BUILTIN_CODE: &str = "builtin:ieee80211n_648";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Bits per constellation symbol.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Parity-check matrix: an alist path or the bundled code.
    #[serde(default = "default_code")]
    pub code: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lut: Option<LutSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hist: Option<HistSection>,
}

fn default_seed() -> u64 {
    1
}
fn default_k() -> usize {
    8
}
fn default_code() -> String {
    BUILTIN_CODE.into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub snr_db: Vec<f64>,
    #[serde(default = "default_train_codewords")]
    pub codewords_per_snr: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
    #[serde(default = "default_eps_loss")]
    pub eps_loss: f64,
}

fn default_train_codewords() -> usize {
    10_000
}
fn default_epochs() -> usize {
    2000
}
fn default_batch() -> usize {
    65_536
}
fn default_lr() -> f64 {
    1e-3
}
fn default_noise_std() -> f64 {
    1e-3
}
fn default_eps_loss() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodEntry {
    pub method: String,
    #[serde(default = "default_n_bits")]
    pub n_bits: u32,
}

fn default_n_bits() -> u32 {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub snr_db: Vec<f64>,
    #[serde(default = "default_eval_codewords")]
    pub codewords: usize,
    pub methods: Vec<MethodEntry>,
    /// Weight file, needed by the deep method.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_latent_delta")]
    pub latent_delta: f64,
    #[serde(default = "default_true")]
    pub fold_saturation: bool,
    #[serde(default = "default_gain_model")]
    pub gain_model: String,
    #[serde(default = "default_r_tilde_clip")]
    pub r_tilde_clip: f64,
    #[serde(default = "default_fit_codewords")]
    pub fit_codewords: usize,
}

fn default_eval_codewords() -> usize {
    10_000
}
fn default_max_iter() -> usize {
    50
}
fn default_latent_delta() -> f64 {
    llrq::quantizers::DEFAULT_DELTA
}
fn default_true() -> bool {
    true
}
fn default_gain_model() -> String {
    "rayleigh".into()
}
fn default_r_tilde_clip() -> f64 {
    llrq::quantizers::R_TILDE_CLIP
}
fn default_fit_codewords() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// `max_mi`, `rayleigh` or `exponential`.
    pub kind: String,
    pub n_levels: usize,
    /// SNR of the max-MI training samples.
    #[serde(default = "default_fit_snr")]
    pub snr_db: f64,
    /// Codewords of max-MI training samples.
    #[serde(default = "default_fit_codewords")]
    pub codewords: usize,
    /// Fading draws for the gain quantizer.
    #[serde(default = "default_draws")]
    pub draws: usize,
}

fn default_fit_snr() -> f64 {
    10.0
}
fn default_draws() -> usize {
    llrq::quantizers::GAIN_FIT_DRAWS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LutSection {
    pub model: PathBuf,
    pub n_bits: u32,
    #[serde(default = "default_latent_delta")]
    pub delta: f64,
    /// Merge the saturation states into the extreme cells.
    #[serde(default)]
    pub fold_saturation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistSection {
    pub model: PathBuf,
    pub snr_db: Vec<f64>,
    #[serde(default = "default_hist_codewords")]
    pub codewords_per_snr: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_hist_codewords() -> usize {
    100
}
fn default_bins() -> usize {
    50
}

/// The `[config]` table of a manifest, recognised by its version key.
#[derive(Deserialize)]
struct ManifestView {
    #[allow(dead_code)]
    manifest_version: u32,
    config: Config,
}

impl Config {
    /// Reads a configuration file or the configuration recorded in a manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let value: toml::Table = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = if value.contains_key("manifest_version") {
            toml::from_str::<ManifestView>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
                .config
        } else {
            toml::from_str::<Config>(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        };
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if !self.code.starts_with("builtin:") {
            let mut p = PathBuf::from(&self.code);
            fix(&mut p);
            self.code = p.to_string_lossy().into_owned();
        }
        if let Some(m) = self.eval.as_mut().and_then(|e| e.model.as_mut()) {
            fix(m);
        }
        if let Some(l) = self.lut.as_mut() {
            fix(&mut l.model);
        }
        if let Some(h) = self.hist.as_mut() {
            fix(&mut h.model);
        }
    }

    pub fn train(&self) -> Result<&TrainSection, CliError> {
        self.train
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [train] section".into()))
    }

    pub fn eval(&self) -> Result<&EvalSection, CliError> {
        self.eval
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [eval] section".into()))
    }

    pub fn fit(&self) -> Result<&FitSection, CliError> {
        self.fit
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [fit] section".into()))
    }

    pub fn lut(&self) -> Result<&LutSection, CliError> {
        self.lut
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [lut] section".into()))
    }

    pub fn hist(&self) -> Result<&HistSection, CliError> {
        self.hist
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [hist] section".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_filled() {
        let c: Config = toml::from_str("[train]\nsnr_db = [10.0]\n").unwrap();
        assert_eq!(c.k, 8);
        assert_eq!(c.code, BUILTIN_CODE);
        let t = c.train.unwrap();
        assert_eq!((t.epochs, t.batch_size), (2000, 65_536));
        assert_eq!(t.noise_std, 1e-3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("sead = 3\n").is_err());
        assert!(toml::from_str::<Config>("[train]\nsnr_db = [1.0]\nepoch = 3\n").is_err());
    }

    #[test]
    fn snapshot_roundtrips() {
        let c: Config =
            toml::from_str("seed = 4\n[eval]\nsnr_db = [1.0, 2.0]\nmethods = [{ method = \"deep\", n_bits = 3 }]\n")
                .unwrap();
        assert_eq!(
            toml::from_str::<Config>(&toml::to_string(&c).unwrap()).unwrap(),
            c
        );
    }
}
