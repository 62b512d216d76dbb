//! Run configuration and per-language profiles, both read from TOML.
//!
//! Relative paths in a configuration file are resolved against the file's
//! directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::eval::{DEFAULT_DELTA, DEFAULT_ORDER, DEFAULT_STEREOTYPE_THRESHOLD};
use crate::model::BaselineRules;
use crate::pipeline::{AnimacyGazetteer, SuffixRules, DEFAULT_MAX_VARIANTS};
use crate::training::{Parameterization, TrainConfig};
use crate::treebank::{GenderConfig, UnknownSubtagPolicy};

fn config_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}: {}", path.display(), e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| config_err(path, e))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    name: String,
    #[serde(default)]
    language: Option<String>,
    determiners: (String, String),
    #[serde(default)]
    gender: Option<GenderConfig>,
}

/// Everything language-specific: gender feature and values, suffix rules,
/// baseline rules, adjective translations and, optionally, a gazetteer.
///
/// A profile directory holds `profile.toml`, `suffix_rules.txt`,
/// `baseline_rules.txt`, `adjectives.tsv` (masculine, feminine) and
/// optionally `gazetteer.tsv`.
#[derive(Clone, Debug)]
pub struct LanguageProfile {
    pub name: String,
    pub language: String,
    pub gender: GenderConfig,
    pub determiners: (String, String),
    pub suffix_rules: SuffixRules,
    pub baseline: BaselineRules,
    pub adjectives: Vec<(String, String)>,
    pub gazetteer: Option<AnimacyGazetteer>,
}

impl LanguageProfile {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join("profile.toml");
        let file: ProfileFile =
            toml::from_str(&read_text(&path)?).map_err(|e| config_err(&path, e))?;

        let rules_path = dir.join("suffix_rules.txt");
        let suffix_rules = read_text(&rules_path)?
            .parse()
            .map_err(|e| config_err(&rules_path, e))?;
        let baseline_path = dir.join("baseline_rules.txt");
        let baseline = read_text(&baseline_path)?
            .parse()
            .map_err(|e| config_err(&baseline_path, e))?;

        let adj_path = dir.join("adjectives.tsv");
        let mut adjectives = Vec::new();
        for (i, line) in read_text(&adj_path)?.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cols.len() != 2 || cols.iter().any(|c| c.is_empty()) {
                return Err(config_err(
                    &adj_path,
                    format!("line {}: expected masculine and feminine forms", i + 1),
                ));
            }
            adjectives.push((cols[0].to_owned(), cols[1].to_owned()));
        }

        let gaz_path = dir.join("gazetteer.tsv");
        let gazetteer = if gaz_path.exists() {
            Some(AnimacyGazetteer::read_file(&gaz_path).map_err(|e| config_err(&gaz_path, e))?)
        } else {
            None
        };

        Ok(LanguageProfile {
            language: file.language.unwrap_or_else(|| file.name.clone()),
            name: file.name,
            gender: file.gender.unwrap_or_default(),
            determiners: file.determiners,
            suffix_rules,
            baseline,
            adjectives,
            gazetteer,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    /// Prebuilt lexicon TSV (lemma, tag, form).
    pub lexicon: Option<PathBuf>,
    /// Entries overriding the corpus-built lexicon.
    pub lexicon_supplement: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterventionConfig {
    /// `log alpha`, the log-preference for keeping a tag; must be positive.
    pub log_alpha: f64,
    pub max_variants: usize,
    pub include_propn: bool,
    pub unknown_subtags: UnknownSubtagPolicy,
}

impl Default for InterventionConfig {
    fn default() -> Self {
        InterventionConfig {
            log_alpha: 1.0,
            max_variants: DEFAULT_MAX_VARIANTS,
            include_propn: false,
            unknown_subtags: UnknownSubtagPolicy::Error,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NGramConfig {
    pub order: usize,
    pub delta: f64,
    pub stereotype_threshold: f64,
}

impl Default for NGramConfig {
    fn default() -> Self {
        NGramConfig {
            order: DEFAULT_ORDER,
            delta: DEFAULT_DELTA,
            stereotype_threshold: DEFAULT_STEREOTYPE_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub parameterization: Parameterization,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunFile {
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    profile: Option<PathBuf>,
    #[serde(default)]
    data: DataPaths,
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    train: TrainConfig,
    #[serde(default)]
    intervention: InterventionConfig,
    #[serde(default)]
    ngram: NGramConfig,
}

/// A validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub profile_dir: Option<PathBuf>,
    pub profile: Option<LanguageProfile>,
    pub data: DataPaths,
    pub parameterization: Parameterization,
    /// Training settings; `seed` always equals the run seed.
    pub train: TrainConfig,
    pub intervention: InterventionConfig,
    pub ngram: NGramConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            profile_dir: None,
            profile: None,
            data: DataPaths::default(),
            parameterization: Parameterization::Linear,
            train: TrainConfig::default(),
            intervention: InterventionConfig::default(),
            ngram: NGramConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&read_text(path)?, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {}", path.display(), m)),
            other => other,
        })
    }

    /// Parses and validates, resolving relative paths against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let file: RunFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let resolve = |p: Option<PathBuf>| p.map(|p| if p.is_absolute() { p } else { base.join(p) });
        let data = DataPaths {
            train: resolve(file.data.train),
            dev: resolve(file.data.dev),
            test: resolve(file.data.test),
            gazetteer: resolve(file.data.gazetteer),
            lexicon: resolve(file.data.lexicon),
            lexicon_supplement: resolve(file.data.lexicon_supplement),
        };
        let profile_dir = resolve(file.profile);
        let profile = profile_dir.as_deref().map(LanguageProfile::load).transpose()?;
        let mut cfg = RunConfig {
            seed: file.seed,
            profile_dir,
            profile,
            data,
            parameterization: file.model.parameterization,
            train: file.train,
            intervention: file.intervention,
            ngram: file.ngram,
        };
        cfg.set_seed(file.seed);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.train.seed = seed;
    }

    /// Checks value ranges and that every referenced file exists.
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        let a = self.intervention.log_alpha;
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Config(format!(
                "intervention.log_alpha must be positive (alpha > 1), got {}",
                a
            )));
        }
        if self.intervention.max_variants == 0 {
            return Err(Error::Config("intervention.max_variants must be at least 1".into()));
        }
        if self.ngram.order == 0 {
            return Err(Error::Config("ngram.order must be at least 1".into()));
        }
        if !(self.ngram.delta > 0.0 && self.ngram.delta.is_finite()) {
            return Err(Error::Config(format!("ngram.delta must be positive, got {}", self.ngram.delta)));
        }
        let t = self.ngram.stereotype_threshold;
        if !(t > 0.5 && t <= 1.0) {
            return Err(Error::Config(format!(
                "ngram.stereotype_threshold must lie in (0.5, 1], got {}",
                t
            )));
        }
        let d = &self.data;
        for (name, p) in [
            ("data.train", &d.train),
            ("data.dev", &d.dev),
            ("data.test", &d.test),
            ("data.gazetteer", &d.gazetteer),
            ("data.lexicon", &d.lexicon),
            ("data.lexicon_supplement", &d.lexicon_supplement),
        ] {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(Error::Config(format!("{} = {} does not exist", name, p.display())));
                }
            }
        }
        Ok(())
    }

    /// The gender configuration of the profile, or the default.
    pub fn gender(&self) -> GenderConfig {
        self.profile.as_ref().map(|p| p.gender.clone()).unwrap_or_default()
    }

    pub fn suffix_rules(&self) -> SuffixRules {
        self.profile
            .as_ref()
            .map(|p| p.suffix_rules.clone())
            .unwrap_or_else(SuffixRules::spanish)
    }

    pub fn baseline_rules(&self) -> BaselineRules {
        self.profile
            .as_ref()
            .map(|p| p.baseline.clone())
            .unwrap_or_else(BaselineRules::spanish)
    }

    /// The gazetteer named in `data.gazetteer`, else the profile's.
    pub fn gazetteer(&self) -> Result<AnimacyGazetteer> {
        if let Some(p) = &self.data.gazetteer {
            return AnimacyGazetteer::read_file(p);
        }
        self.profile
            .as_ref()
            .and_then(|p| p.gazetteer.clone())
            .ok_or_else(|| Error::Config("no gazetteer: set data.gazetteer or use a profile with one".into()))
    }

    pub fn language(&self) -> &str {
        self.profile.as_ref().map(|p| p.name.as_str()).unwrap_or("und")
    }
}
