//! Labelled datasets and the tab-separated manifest format.
//!
//! A dataset directory holds `manifest.tsv`, the clean reference frame
//! `clean.emif`, and one `EMIF` file per sample under
//! `<split>/level<N>/`. Manifest lines are `<path>\t<level>\t<split>`
//! with paths relative to the manifest; lines starting with `#` are
//! comments.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::colour::render_colour_bars;
use super::frame::{Frame, Range};
use super::noise::{inject_noise, NoiseLevel, NoiseParams};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const CLEAN_FILE: &str = "clean.emif";

/// Per-level sample counts at scale 1.
const FULL_COUNTS: [usize; 3] = [800, 200, 100];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidArgument(format!(
                "unknown split {other:?} (expected train, val or test)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Relative to the manifest's directory, `/`-separated.
    pub path: String,
    pub level: NoiseLevel,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetManifest {
    pub comments: Vec<String>,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Sample counts indexed `[level index][split index]`.
    pub fn counts(&self) -> [[usize; 3]; 5] {
        let mut counts = [[0; 3]; 5];
        for e in &self.entries {
            counts[e.level.index()][e.split.index()] += 1;
        }
        counts
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\t{}\n", e.path, e.level, e.split));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut manifest = DatasetManifest::default();
        for (lineno, line) in text.lines().enumerate() {
            let err = |reason: String| Error::format("manifest", format!("line {}: {reason}", lineno + 1));
            if let Some(comment) = line.strip_prefix('#') {
                manifest.comments.push(comment.trim_start().to_string());
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [path, level, split] = fields[..] else {
                return Err(err(format!("expected 3 tab-separated fields, got {}", fields.len())));
            };
            if path.is_empty() {
                return Err(err("empty path".into()));
            }
            let level: u8 = level.parse().map_err(|_| err(format!("bad level {level:?}")))?;
            manifest.entries.push(ManifestEntry {
                path: path.to_string(),
                level: NoiseLevel::new(level).map_err(|e| err(e.to_string()))?,
                split: split.parse().map_err(|e: Error| err(e.to_string()))?,
            });
        }
        Ok(manifest)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(Error::at(path))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(Error::at(path))?;
        Self::parse(&text)
    }

    /// Locates a manifest given either its path or its dataset directory.
    /// Returns the manifest and the directory its paths are relative to.
    pub fn locate(path: impl AsRef<Path>) -> Result<(Self, PathBuf)> {
        let path = path.as_ref();
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let manifest = Self::read(&file)?;
        let root = file.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((manifest, root))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub params: NoiseParams,
    /// Fraction of the 800/200/100 per-level split sizes, in `(0, 1]`.
    pub scale: f64,
    pub width: usize,
    pub height: usize,
    pub range: Range,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            params: NoiseParams::default(),
            scale: 1.0,
            width: 1280,
            height: 720,
            range: Range::Studio,
        }
    }
}

/// Per-level (train, val, test) counts for `scale`, rounded to nearest.
pub fn split_counts(scale: f64) -> Result<[usize; 3]> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::InvalidArgument(format!("scale {scale} must lie in (0, 1]")));
    }
    let counts = FULL_COUNTS.map(|n| (n as f64 * scale).round() as usize);
    if counts[2] == 0 {
        return Err(Error::InvalidArgument(format!(
            "scale {scale} leaves no test samples per level"
        )));
    }
    Ok(counts)
}

/// Stream index of one generated frame: level in bits 40.., split in
/// bits 32..40, sample index in the low 32 bits.
pub fn frame_stream_index(level: NoiseLevel, split: Split, index: u32) -> u64 {
    (u64::from(level.get()) << 40) | ((split.index() as u64) << 32) | u64::from(index)
}

/// Renders the clean pattern and writes every noisy sample plus the
/// manifest into `out_dir`. Output depends only on `config`.
pub fn build_dataset(out_dir: impl AsRef<Path>, config: &DatasetConfig) -> Result<DatasetManifest> {
    let out_dir = out_dir.as_ref();
    config.params.validate()?;
    let counts = split_counts(config.scale)?;
    let clean = render_colour_bars(config.width, config.height, config.range)?;
    fs::create_dir_all(out_dir).map_err(Error::at(out_dir))?;
    clean.save(out_dir.join(CLEAN_FILE))?;

    let mut manifest = DatasetManifest {
        comments: vec![
            "emigrade dataset manifest v1".into(),
            format!(
                "seed={} scale={} size={}x{} range={:?}",
                config.params.seed, config.scale, config.width, config.height, config.range
            ),
        ],
        entries: Vec::new(),
    };
    for split in Split::ALL {
        let n = counts[split.index()];
        for level in NoiseLevel::ALL {
            let rel_dir = format!("{split}/level{level}");
            let dir = out_dir.join(&rel_dir);
            fs::create_dir_all(&dir).map_err(Error::at(&dir))?;
            for i in 0..n as u32 {
                let mut rng = rng::stream(config.params.seed, Purpose::Frame, frame_stream_index(level, split, i));
                let frame: Frame = inject_noise(&clean, level, &config.params, &mut rng)?;
                let rel = format!("{rel_dir}/{i:05}.emif");
                frame.save(out_dir.join(&rel))?;
                manifest.entries.push(ManifestEntry { path: rel, level, split });
            }
        }
    }
    manifest.write(out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_scale_linearly() {
        assert_eq!(split_counts(1.0).unwrap(), [800, 200, 100]);
        assert_eq!(split_counts(0.1).unwrap(), [80, 20, 10]);
        assert_eq!(split_counts(0.01).unwrap(), [8, 2, 1]);
        assert!(split_counts(0.001).is_err());
        assert!(split_counts(0.0).is_err());
        assert!(split_counts(1.5).is_err());
        assert!(split_counts(f64::NAN).is_err());
    }

    #[test]
    fn manifest_text_round_trip() {
        let text = "# hello\nval/level2/00000.emif\t2\tval\n\ntest/level5/00001.emif\t5\ttest\n";
        let m = DatasetManifest::parse(text).unwrap();
        assert_eq!(m.comments, vec!["hello"]);
        assert_eq!(m.entries.len(), 2);
        assert_eq!(m.entries[1].level.get(), 5);
        assert_eq!(m.entries[1].split, Split::Test);
        assert_eq!(m.to_text(), text.replace("\n\n", "\n"));
    }

    #[test]
    fn manifest_rejects_bad_lines() {
        assert!(DatasetManifest::parse("a.emif\t6\ttrain\n").is_err());
        assert!(DatasetManifest::parse("a.emif\t2\tholdout\n").is_err());
        assert!(DatasetManifest::parse("a.emif 2 train\n").is_err());
        assert!(DatasetManifest::parse("\t2\ttrain\n").is_err());
    }

    #[test]
    fn small_dataset_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let config = DatasetConfig {
            scale: 0.01,
            width: 64,
            height: 36,
            ..DatasetConfig::default()
        };
        let m = build_dataset(dir.path(), &config).unwrap();
        assert_eq!(m.entries.len(), 5 * 11);
        for level in m.counts() {
            assert_eq!(level, [8, 2, 1]);
        }
        let (read, root) = DatasetManifest::locate(dir.path()).unwrap();
        assert_eq!(read, m);
        let frame = Frame::load(root.join(&m.entries[0].path)).unwrap();
        assert_eq!((frame.width(), frame.height()), (64, 36));
    }

    #[test]
    fn stream_indices_are_distinct() {
        let a = frame_stream_index(NoiseLevel::new(2).unwrap(), Split::Val, 7);
        let b = frame_stream_index(NoiseLevel::new(2).unwrap(), Split::Test, 7);
        let c = frame_stream_index(NoiseLevel::new(3).unwrap(), Split::Val, 7);
        assert!(a != b && a != c && b != c);
    }
}
