use std::fmt::Write as _;
use std::path::Path;

use crate::data::SplitRatios;
use crate::error::{Error, Result};
use crate::model::{CueConfig, ModelDims};

/// Every knob of a training run. Serialized as `key = value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    /// Seeds weight init and per-epoch shuffling.
    pub seed: u64,
    pub cue: CueConfig,
    pub dims: ModelDims,
    /// Global-norm gradient clip; `None` disables clipping.
    pub clip_norm: Option<f64>,
    pub split_seed: u64,
    pub split: SplitRatios,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 64,
            max_epochs: 200,
            patience: 10,
            seed: 0,
            cue: CueConfig::METHOD2,
            dims: ModelDims::default(),
            clip_norm: Some(5.0),
            split_seed: 0,
            split: SplitRatios::default(),
        }
    }
}

pub const CONFIG_KEYS: [&str; 16] = [
    "learning_rate",
    "beta1",
    "beta2",
    "epsilon",
    "batch_size",
    "max_epochs",
    "patience",
    "seed",
    "cue",
    "encoder_hidden",
    "decoder_hidden",
    "clip_norm",
    "split_seed",
    "train_ratio",
    "validation_ratio",
    "test_ratio",
];

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {b}"));
            }
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return bad(format!("clip_norm must be positive or `none`, got {c}"));
            }
        }
        self.dims.validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("invalid value {v:?} for {key}")))
        }
        match key {
            "learning_rate" => self.learning_rate = num(key, value)?,
            "beta1" => self.beta1 = num(key, value)?,
            "beta2" => self.beta2 = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "max_epochs" => self.max_epochs = num(key, value)?,
            "patience" => self.patience = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "cue" => {
                self.cue = CueConfig::from_name(value)
                    .ok_or_else(|| Error::Config(format!("unknown cue {value:?} (baseline, method1, method2)")))?
            }
            "encoder_hidden" => self.dims.encoder_hidden = num(key, value)?,
            "decoder_hidden" => self.dims.decoder_hidden = num(key, value)?,
            "clip_norm" => {
                self.clip_norm = match value {
                    "none" | "off" => None,
                    v => Some(num(key, v)?),
                }
            }
            "split_seed" => self.split_seed = num(key, value)?,
            "train_ratio" => self.split.train = num(key, value)?,
            "validation_ratio" => self.split.validation = num(key, value)?,
            "test_ratio" => self.split.test = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, source: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{source}:{}: expected `key = value`", i + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("{source}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
        let mut cfg = TrainConfig::default();
        cfg.apply_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("learning_rate", self.learning_rate.to_string());
        kv("beta1", self.beta1.to_string());
        kv("beta2", self.beta2.to_string());
        kv("epsilon", self.epsilon.to_string());
        kv("batch_size", self.batch_size.to_string());
        kv("max_epochs", self.max_epochs.to_string());
        kv("patience", self.patience.to_string());
        kv("seed", self.seed.to_string());
        kv("cue", self.cue.name().to_string());
        kv("encoder_hidden", self.dims.encoder_hidden.to_string());
        kv("decoder_hidden", self.dims.decoder_hidden.to_string());
        kv("clip_norm", self.clip_norm.map_or_else(|| "none".into(), |c| c.to_string()));
        kv("split_seed", self.split_seed.to_string());
        kv("train_ratio", self.split.train.to_string());
        kv("validation_ratio", self.split.validation.to_string());
        kv("test_ratio", self.split.test.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let cfg = TrainConfig {
            clip_norm: None,
            cue: CueConfig::BASELINE,
            learning_rate: 3e-4,
            ..TrainConfig::default()
        };
        let mut back = TrainConfig::default();
        back.apply_text(&cfg.to_text(), "mem").unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.to_text().lines().count(), CONFIG_KEYS.len());
    }

    #[test]
    fn comments_and_errors() {
        let mut cfg = TrainConfig::default();
        cfg.apply_text("# header\nbatch_size = 8 # small\n\n", "mem").unwrap();
        assert_eq!(cfg.batch_size, 8);
        assert!(cfg.apply_text("bogus = 1", "mem").is_err());
        assert!(cfg.apply_text("batch_size 8", "mem").is_err());
        assert!(cfg.apply_text("beta1 = x", "mem").is_err());
    }

    #[test]
    fn validation_rules() {
        assert!(TrainConfig::default().validate().is_ok());
        let c = TrainConfig {
            beta2: 1.0,
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
        let c = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
        let c = TrainConfig {
            epsilon: 0.0,
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn missing_file_is_usage_error() {
        let err = TrainConfig::from_file(Path::new("missing.cfg")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("missing.cfg"));
    }
}
