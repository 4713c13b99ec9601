//! The declarative pipeline config: one flat TOML file, overridable from the
//! command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::blocking::LshParams;
use crate::error::{Error, Result};
use crate::eval::{ClustererSpec, SweepPlan, DEFAULT_THRESHOLDS};
use crate::graph::DEFAULT_S_BUILD;
use crate::greedy::SelectMethod;
use crate::records::Schema;
use crate::similarity::{
    AttributeComparator, ComparisonProfile, MissingPolicy, ProfileKind, DEFAULT_YEAR_MAX_DIFFERENCE,
};
use crate::star::{ResolveMethod, SortMethod};
use crate::synthetic::SyntheticConfig;
use crate::temporal::{TemporalConstraintModel, TemporalGate, DEFAULT_P_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClustererKind {
    Star,
    Greedy,
}

impl std::str::FromStr for ClustererKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(ClustererKind::Star),
            "greedy" => Ok(ClustererKind::Greedy),
            other => Err(Error::Config(format!(
                "unknown clusterer {other:?} (expected star or greedy)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Records CSV. Defaults to `<output_dir>/records.csv`.
    pub records: Option<PathBuf>,
    /// Ground-truth CSV. Defaults to `<output_dir>/ground_truth.csv`.
    pub ground_truth: Option<PathBuf>,
    /// Graph CSV. Defaults to `<output_dir>/graph.csv`.
    pub graph: Option<PathBuf>,
    /// Clustering CSV. Defaults to `<output_dir>/clustering.csv`.
    pub clustering: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Attribute columns; the standard 15 when absent.
    pub schema: Option<Vec<String>>,

    pub profile: ProfileKind,
    pub weighted: bool,
    /// Required when `profile = "custom"`.
    pub comparators: Vec<AttributeComparator>,
    pub missing_values: MissingPolicy,
    pub year_max_difference: u32,

    pub lsh_bands: usize,
    pub lsh_band_size: usize,
    pub seed: u64,
    pub s_build: f64,

    pub temporal: bool,
    pub temporal_at_build: bool,
    pub p_min: f64,
    pub temporal_breakpoints: Option<Vec<(u32, f64)>>,

    pub clusterer: ClustererKind,
    pub sort_method: SortMethod,
    pub resolve_method: ResolveMethod,
    pub select_method: SelectMethod,
    pub retry_on_rejection: bool,
    /// `s_min` for `cluster`.
    pub threshold: f64,

    pub thresholds: Vec<f64>,
    /// Profiles to sweep; `[profile]` when empty.
    pub sweep_profiles: Vec<ProfileKind>,
    /// Weighting modes to sweep; `[weighted]` when empty.
    pub sweep_weighted: Vec<bool>,
    /// Clusterers to sweep, as `star:<sort>:<resolve>` or `greedy:<select>`;
    /// the configured clusterer when empty.
    pub sweep_clusterers: Vec<String>,
    pub sweep_temporal: Vec<bool>,

    pub synthetic: Option<SyntheticConfig>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let lsh = LshParams::default();
        Self {
            records: None,
            ground_truth: None,
            graph: None,
            clustering: None,
            output_dir: PathBuf::from("out"),
            schema: None,
            profile: ProfileKind::ParentNames,
            weighted: false,
            comparators: Vec::new(),
            missing_values: MissingPolicy::default(),
            year_max_difference: DEFAULT_YEAR_MAX_DIFFERENCE,
            lsh_bands: lsh.bands,
            lsh_band_size: lsh.band_size,
            seed: lsh.seed,
            s_build: DEFAULT_S_BUILD,
            temporal: true,
            temporal_at_build: false,
            p_min: DEFAULT_P_MIN,
            temporal_breakpoints: None,
            clusterer: ClustererKind::Star,
            sort_method: SortMethod::AvrSimFirst,
            resolve_method: ResolveMethod::AvrAll,
            select_method: SelectMethod::AvrSim,
            retry_on_rejection: false,
            threshold: 0.8,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            sweep_profiles: Vec::new(),
            sweep_weighted: Vec::new(),
            sweep_clusterers: Vec::new(),
            sweep_temporal: vec![false, true],
            synthetic: None,
        }
    }
}

/// Command-line values that replace config keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub temporal: Option<bool>,
    pub clusterer: Option<ClustererKind>,
    pub sort_method: Option<SortMethod>,
    pub resolve_method: Option<ResolveMethod>,
    pub select_method: Option<SelectMethod>,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Parses the file and resolves relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.rebase(base);
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.output_dir);
        for p in [
            &mut self.records,
            &mut self.ground_truth,
            &mut self.graph,
            &mut self.clustering,
        ]
        .into_iter()
        .flatten()
        {
            join(p);
        }
    }

    /// `seed` also seeds the synthetic generator when a `[synthetic]` table
    /// is present.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.seed = seed;
            if let Some(s) = &mut self.synthetic {
                s.seed = seed;
            }
        }
        if let Some(t) = o.threshold {
            self.threshold = t;
        }
        if let Some(t) = o.temporal {
            self.temporal = t;
        }
        if let Some(c) = o.clusterer {
            self.clusterer = c;
        }
        if let Some(m) = o.sort_method {
            self.sort_method = m;
        }
        if let Some(m) = o.resolve_method {
            self.resolve_method = m;
        }
        if let Some(m) = o.select_method {
            self.select_method = m;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.lsh_bands == 0 || self.lsh_band_size == 0 {
            return bad("lsh_bands and lsh_band_size must be positive".into());
        }
        if !(self.s_build > 0.0 && self.s_build <= 1.0) {
            return bad(format!("s_build = {} outside (0, 1]", self.s_build));
        }
        if !(self.threshold >= self.s_build && self.threshold <= 1.0) {
            return bad(format!(
                "threshold = {} outside [s_build = {}, 1]",
                self.threshold, self.s_build
            ));
        }
        if let Some(t) = self
            .thresholds
            .iter()
            .find(|&&t| !(t >= self.s_build && t <= 1.0))
        {
            return bad(format!("sweep threshold {t} outside [{}, 1]", self.s_build));
        }
        if !(0.0..=1.0).contains(&self.p_min) {
            return bad(format!("p_min = {} outside [0, 1]", self.p_min));
        }
        if self.year_max_difference == 0 {
            return bad("year_max_difference must be positive".into());
        }
        self.model()?;
        self.schema()?;
        self.profile_for(self.profile, self.weighted)?;
        self.sweep_clusterers()?;
        if let Some(s) = &self.synthetic {
            s.validate()?;
        }
        Ok(())
    }

    pub fn schema(&self) -> Result<Schema> {
        match &self.schema {
            Some(names) => Schema::new(names.iter().cloned()),
            None => Ok(Schema::standard()),
        }
    }

    pub fn lsh(&self) -> LshParams {
        LshParams {
            bands: self.lsh_bands,
            band_size: self.lsh_band_size,
            seed: self.seed,
        }
    }

    pub fn model(&self) -> Result<TemporalConstraintModel> {
        match &self.temporal_breakpoints {
            Some(bp) => TemporalConstraintModel::new(bp.clone()),
            None => Ok(TemporalConstraintModel::default()),
        }
    }

    pub fn profile_for(&self, kind: ProfileKind, weighted: bool) -> Result<ComparisonProfile> {
        let profile = match kind {
            ProfileKind::Custom => ComparisonProfile::custom(self.comparators.clone(), weighted)?,
            preset => ComparisonProfile::preset(preset, weighted)?,
        };
        Ok(profile
            .with_missing(self.missing_values)
            .with_year_max_difference(self.year_max_difference))
    }

    pub fn comparison_profile(&self) -> Result<ComparisonProfile> {
        self.profile_for(self.profile, self.weighted)
    }

    pub fn clusterer_spec(&self) -> ClustererSpec {
        match self.clusterer {
            ClustererKind::Star => ClustererSpec::Star {
                sort: self.sort_method,
                resolve: self.resolve_method,
            },
            ClustererKind::Greedy => ClustererSpec::Greedy {
                select: self.select_method,
                retry_on_rejection: self.retry_on_rejection,
            },
        }
    }

    fn sweep_clusterers(&self) -> Result<Vec<ClustererSpec>> {
        if self.sweep_clusterers.is_empty() {
            return Ok(vec![self.clusterer_spec()]);
        }
        self.sweep_clusterers.iter().map(|s| s.parse()).collect()
    }

    /// The model behind a gate, or `None` when temporal constraints are off.
    pub fn gate<'a>(&self, model: &'a TemporalConstraintModel) -> TemporalGate<'a> {
        TemporalGate::new(self.temporal.then_some(model), self.p_min)
    }

    pub fn sweep_plan(&self) -> Result<SweepPlan> {
        let kinds = if self.sweep_profiles.is_empty() {
            vec![self.profile]
        } else {
            self.sweep_profiles.clone()
        };
        let weights = if self.sweep_weighted.is_empty() {
            vec![self.weighted]
        } else {
            self.sweep_weighted.clone()
        };
        let mut profiles = Vec::new();
        for &kind in &kinds {
            for &weighted in &weights {
                profiles.push(self.profile_for(kind, weighted)?);
            }
        }
        let temporal = if self.sweep_temporal.is_empty() {
            vec![self.temporal]
        } else {
            self.sweep_temporal.clone()
        };
        Ok(SweepPlan {
            profiles,
            clusterers: self.sweep_clusterers()?,
            temporal,
            thresholds: self.thresholds.clone(),
            lsh: self.lsh(),
            s_build: self.s_build,
            model: self.model()?,
            p_min: self.p_min,
            temporal_at_build: self.temporal_at_build,
        })
    }

    fn in_output(&self, explicit: &Option<PathBuf>, name: &str) -> PathBuf {
        explicit
            .clone()
            .unwrap_or_else(|| self.output_dir.join(name))
    }

    pub fn records_path(&self) -> PathBuf {
        self.in_output(&self.records, "records.csv")
    }

    pub fn ground_truth_path(&self) -> PathBuf {
        self.in_output(&self.ground_truth, "ground_truth.csv")
    }

    pub fn graph_path(&self) -> PathBuf {
        self.in_output(&self.graph, "graph.csv")
    }

    pub fn clustering_path(&self) -> PathBuf {
        self.in_output(&self.clustering, "clustering.csv")
    }
}
