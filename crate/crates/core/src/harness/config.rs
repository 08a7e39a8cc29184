//! Run configuration with layered precedence: built-in defaults, then a
//! `key = value` config file, then command-line flags.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::nn::TrainConfig;
use crate::synth::{DatasetConfig, Range, Split};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "EMIGRADE_OUT";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: u8,
    pub train: TrainConfig,
    pub scale: f64,
    pub width: usize,
    pub height: usize,
    pub range: Range,
    pub dataset: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub split: Split,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: 4,
            train: TrainConfig::default(),
            scale: 1.0,
            width: 1280,
            height: 720,
            range: Range::Studio,
            dataset: None,
            checkpoint: None,
            out: None,
            split: Split::Test,
        }
    }
}

/// Optional values for any subset of [`RunConfig`] fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub model: Option<u8>,
    pub epochs: Option<u32>,
    pub lr: Option<f64>,
    pub l2: Option<f64>,
    pub batch: Option<usize>,
    pub seed: Option<u64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub epsilon: Option<f64>,
    pub scale: Option<f64>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub range: Option<Range>,
    pub dataset: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub split: Option<Split>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("config key {key}: cannot parse {value:?}")))
}

fn parse_range(value: &str) -> Result<Range> {
    match value {
        "studio" => Ok(Range::Studio),
        "full" => Ok(Range::Full),
        other => Err(Error::InvalidArgument(format!("unknown range {other:?} (studio or full)"))),
    }
}

impl Overrides {
    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut o = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidArgument(format!(
                    "config line {}: expected `key = value`, got {raw:?}",
                    lineno + 1
                )));
            };
            o.set(key.trim(), value.trim())?;
        }
        Ok(o)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "model" => self.model = Some(parse(key, value)?),
            "epochs" => self.epochs = Some(parse(key, value)?),
            "lr" => self.lr = Some(parse(key, value)?),
            "l2" => self.l2 = Some(parse(key, value)?),
            "batch" => self.batch = Some(parse(key, value)?),
            "seed" => self.seed = Some(parse(key, value)?),
            "beta1" => self.beta1 = Some(parse(key, value)?),
            "beta2" => self.beta2 = Some(parse(key, value)?),
            "epsilon" => self.epsilon = Some(parse(key, value)?),
            "scale" => self.scale = Some(parse(key, value)?),
            "width" => self.width = Some(parse(key, value)?),
            "height" => self.height = Some(parse(key, value)?),
            "range" => self.range = Some(parse_range(value)?),
            "dataset" => self.dataset = Some(PathBuf::from(value)),
            "checkpoint" => self.checkpoint = Some(PathBuf::from(value)),
            "out" => self.out = Some(PathBuf::from(value)),
            "split" => self.split = Some(value.parse()?),
            other => return Err(Error::InvalidArgument(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! take {
            ($($src:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = &o.$src { self.$($dst).+ = v.clone(); })*
            };
        }
        take!(
            model => model,
            epochs => train.epochs,
            lr => train.learning_rate,
            l2 => train.l2_lambda,
            batch => train.batch_size,
            seed => train.seed,
            beta1 => train.beta1,
            beta2 => train.beta2,
            epsilon => train.epsilon,
            scale => scale,
            width => width,
            height => height,
            range => range,
            split => split,
        );
        for (src, dst) in [
            (&o.dataset, &mut self.dataset),
            (&o.checkpoint, &mut self.checkpoint),
            (&o.out, &mut self.out),
        ] {
            if src.is_some() {
                dst.clone_from(src);
            }
        }
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        self.apply(&Overrides::parse(text)?);
        Ok(())
    }

    /// Defaults, then the optional config file, then flags.
    pub fn resolve(file: Option<&str>, flags: &Overrides) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(text) = file {
            cfg.apply_text(text)?;
        }
        cfg.apply(flags);
        cfg.train.validate()?;
        Ok(cfg)
    }

    pub fn dataset_config(&self) -> DatasetConfig {
        let mut d = DatasetConfig {
            scale: self.scale,
            width: self.width,
            height: self.height,
            range: self.range,
            ..DatasetConfig::default()
        };
        d.params.seed = self.train.seed;
        d
    }

    /// `--out`, else the environment default, else `fallback`.
    pub fn out_dir(&self, fallback: &str) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(fallback))
    }

    /// The training settings as config-file lines, readable by
    /// [`Overrides::parse`].
    pub fn train_config_text(t: &TrainConfig) -> String {
        format!(
            "lr = {}\nbeta1 = {}\nbeta2 = {}\nepsilon = {}\nl2 = {}\nepochs = {}\nbatch = {}\nseed = {}\n",
            t.learning_rate, t.beta1, t.beta2, t.epsilon, t.l2_lambda, t.epochs, t.batch_size, t.seed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = "# run\nmodel = 2\nepochs = 5\nlr = 0.01\n";
        let flags = Overrides {
            epochs: Some(7),
            ..Overrides::default()
        };
        let cfg = RunConfig::resolve(Some(file), &flags).unwrap();
        assert_eq!(cfg.model, 2);
        assert_eq!(cfg.train.epochs, 7);
        assert_eq!(cfg.train.learning_rate, 0.01);
        assert_eq!(cfg.train.batch_size, 32);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Overrides::parse("colour = red").is_err());
        assert!(Overrides::parse("epochs = many").is_err());
        assert!(Overrides::parse("just words").is_err());
        assert!(Overrides::parse("split = holdout").is_err());
        assert!(RunConfig::resolve(Some("lr = -1"), &Overrides::default()).is_err());
    }

    #[test]
    fn train_config_text_round_trips() {
        let mut t = TrainConfig::default();
        t.l2_lambda = 0.01;
        t.seed = 99;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&RunConfig::train_config_text(&t)).unwrap();
        assert_eq!(cfg.train, t);
    }
}
