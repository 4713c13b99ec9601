//! Subcommand bodies: each reads its inputs from the paths in a
//! [`PipelineConfig`] and writes its outputs next to them.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::clustering::Clustering;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::eval::{precision_recall, sweep, write_reports_csv, EvaluationReport, RunDescriptor};
use crate::graph::{build_graph, SimilarityGraph};
use crate::records::{GroundTruth, RecordSet};
use crate::synthetic::generate_synthetic;

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    ensure_parent(path)?;
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn load_records(config: &PipelineConfig) -> Result<RecordSet> {
    RecordSet::load(config.records_path(), &config.schema()?)
}

/// Writes synthetic records and ground truth; returns their paths.
pub fn cmd_generate(config: &PipelineConfig) -> Result<(PathBuf, PathBuf)> {
    let synthetic = config
        .synthetic
        .as_ref()
        .ok_or_else(|| Error::Config("generate needs a [synthetic] section".into()))?;
    let (records, gt) = generate_synthetic(synthetic)?;
    let (rp, gp) = (config.records_path(), config.ground_truth_path());
    records.write_csv(create(&rp)?)?;
    gt.write_csv(create(&gp)?)?;
    Ok((rp, gp))
}

pub fn build(config: &PipelineConfig, records: &RecordSet) -> Result<SimilarityGraph> {
    let profile = config.comparison_profile()?.compile(records.schema())?;
    let model = config.model()?;
    build_graph(
        records,
        &profile,
        config.lsh(),
        config.s_build,
        config.temporal_at_build.then_some(&model),
    )
}

pub fn cmd_build_graph(config: &PipelineConfig) -> Result<PathBuf> {
    let records = load_records(config)?;
    let g = build(config, &records)?;
    let path = config.graph_path();
    g.write_csv(create(&path)?)?;
    Ok(path)
}

pub fn cluster(
    config: &PipelineConfig,
    records: &RecordSet,
    g: &SimilarityGraph,
) -> Result<Clustering> {
    let model = config.model()?;
    config
        .clusterer_spec()
        .run(g, &records.ids(), config.gate(&model), config.threshold)
}

pub fn cmd_cluster(config: &PipelineConfig) -> Result<PathBuf> {
    let records = load_records(config)?;
    let g = SimilarityGraph::load(config.graph_path(), &records, config.s_build)?;
    let c = cluster(config, &records, &g)?;
    let path = config.clustering_path();
    c.write_csv(create(&path)?)?;
    Ok(path)
}

pub fn run_descriptor(config: &PipelineConfig) -> Result<RunDescriptor> {
    let profile = config.comparison_profile()?;
    Ok(RunDescriptor {
        profile: profile.label(),
        weighted: profile.weighted,
        clusterer: config.clusterer_spec().to_string(),
        s_min: config.threshold,
        p_min: config.p_min,
        temporal: config.temporal,
    })
}

/// Scores the clustering file against the ground truth and writes
/// `evaluation.json`.
pub fn cmd_evaluate(config: &PipelineConfig) -> Result<(EvaluationReport, PathBuf)> {
    let records = load_records(config)?;
    let gt = GroundTruth::load(config.ground_truth_path(), &records)?;
    let c = Clustering::load(config.clustering_path())?;
    let report = precision_recall(&c, &gt, run_descriptor(config)?)?;
    let path = config.output_dir.join("evaluation.json");
    serde_json::to_writer_pretty(create(&path)?, &report)?;
    Ok((report, path))
}

/// Runs the configured sweep. Writes `sweep.csv`, plus `sweep.json` unless
/// `plot_data` is set.
pub fn cmd_sweep(
    config: &PipelineConfig,
    plot_data: bool,
) -> Result<(Vec<EvaluationReport>, Vec<PathBuf>)> {
    let records = load_records(config)?;
    let gt = GroundTruth::load(config.ground_truth_path(), &records)?;
    let reports = sweep(&records, &gt, &config.sweep_plan()?)?;
    let mut written = Vec::new();
    if !plot_data {
        let json = config.output_dir.join("sweep.json");
        serde_json::to_writer_pretty(create(&json)?, &reports)?;
        written.push(json);
    }
    let csv = config.output_dir.join("sweep.csv");
    write_reports_csv(&reports, create(&csv)?)?;
    written.push(csv);
    Ok((reports, written))
}
