//! Pairwise-link precision and recall, and the threshold sweep.
//!
//! A clustering predicts a link between every pair of records that share a
//! cluster; the ground truth defines the true links the same way. With no
//! predicted links precision is 1.0, and with no true links recall is 1.0.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocking::LshParams;
use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::graph::{build_graph, SimilarityGraph};
use crate::greedy::{greedy_cluster, GreedyParams, SelectMethod};
use crate::records::{GroundTruth, RecordId, RecordSet};
use crate::similarity::ComparisonProfile;
use crate::star::{star_cluster, ResolveMethod, SortMethod, StarParams};
use crate::temporal::{TemporalConstraintModel, TemporalGate};

/// Thresholds from 1.0 down to 0.7 in steps of 0.05.
pub const DEFAULT_THRESHOLDS: [f64; 7] = [1.0, 0.95, 0.90, 0.85, 0.80, 0.75, 0.70];

/// All intra-cluster pairs, smaller id first.
pub fn pairwise_links(clusters: &[Vec<RecordId>]) -> Result<BTreeSet<(RecordId, RecordId)>> {
    let mut seen = HashSet::new();
    let mut links = BTreeSet::new();
    for c in clusters {
        for &id in c {
            if !seen.insert(id) {
                return Err(Error::OverlappingClusters(id));
            }
        }
        for (i, &a) in c.iter().enumerate() {
            for &b in &c[i + 1..] {
                links.insert((a.min(b), a.max(b)));
            }
        }
    }
    Ok(links)
}

fn pairs_in(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LinkCounts {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
}

impl LinkCounts {
    pub fn precision(&self) -> f64 {
        let predicted = self.true_positives + self.false_positives;
        if predicted == 0 {
            1.0
        } else {
            self.true_positives as f64 / predicted as f64
        }
    }

    pub fn recall(&self) -> f64 {
        let actual = self.true_positives + self.false_negatives;
        if actual == 0 {
            1.0
        } else {
            self.true_positives as f64 / actual as f64
        }
    }
}

/// Link counts of a clustering against the ground truth. Both must cover the
/// same record ids.
///
/// Counts come from cluster/entity overlap sizes rather than enumerating
/// links, so giant clusters stay cheap.
pub fn link_counts(c: &Clustering, gt: &GroundTruth) -> Result<LinkCounts> {
    if c.record_count() != gt.len() {
        let covered: HashSet<RecordId> = c.clusters().iter().flatten().copied().collect();
        let missing = gt
            .assignment()
            .keys()
            .find(|id| !covered.contains(id))
            .copied()
            .or_else(|| {
                covered
                    .iter()
                    .find(|id| gt.entity_of(**id).is_none())
                    .copied()
            })
            .unwrap_or_default();
        return Err(Error::UniverseMismatch(missing));
    }
    let mut predicted = 0u64;
    let mut correct = 0u64;
    for cluster in c.clusters() {
        predicted += pairs_in(cluster.len() as u64);
        let mut overlap: HashMap<&str, u64> = HashMap::new();
        for &id in cluster {
            let entity = gt.entity_of(id).ok_or(Error::UniverseMismatch(id))?;
            *overlap.entry(entity).or_default() += 1;
        }
        correct += overlap.values().map(|&n| pairs_in(n)).sum::<u64>();
    }
    let actual: u64 = gt
        .partition()
        .values()
        .map(|members| pairs_in(members.len() as u64))
        .sum();
    Ok(LinkCounts {
        true_positives: correct,
        false_positives: predicted - correct,
        false_negatives: actual - correct,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "clusterer", rename_all = "kebab-case")]
pub enum ClustererSpec {
    Star {
        sort: SortMethod,
        resolve: ResolveMethod,
    },
    Greedy {
        select: SelectMethod,
        #[serde(default)]
        retry_on_rejection: bool,
    },
}

impl ClustererSpec {
    /// The nine star and three greedy variants.
    pub fn all() -> Vec<ClustererSpec> {
        let mut out = Vec::new();
        for sort in SortMethod::ALL {
            for resolve in ResolveMethod::ALL {
                out.push(ClustererSpec::Star { sort, resolve });
            }
        }
        out.extend(SelectMethod::ALL.map(|select| ClustererSpec::Greedy {
            select,
            retry_on_rejection: false,
        }));
        out
    }

    pub fn run(
        &self,
        g: &SimilarityGraph,
        universe: &[RecordId],
        gate: TemporalGate<'_>,
        s_min: f64,
    ) -> Result<Clustering> {
        match *self {
            ClustererSpec::Star { sort, resolve } => star_cluster(
                g,
                universe.iter().copied(),
                gate,
                StarParams {
                    s_min,
                    sort,
                    resolve,
                },
            ),
            ClustererSpec::Greedy {
                select,
                retry_on_rejection,
            } => greedy_cluster(
                &g.threshold(s_min),
                universe.iter().copied(),
                gate,
                GreedyParams {
                    select,
                    retry_on_rejection,
                },
            ),
        }
    }
}

/// `star:<sort>:<resolve>` or `greedy:<select>[:retry]`.
impl fmt::Display for ClustererSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClustererSpec::Star { sort, resolve } => write!(f, "star:{sort}:{resolve}"),
            ClustererSpec::Greedy {
                select,
                retry_on_rejection,
            } => {
                write!(f, "greedy:{select}")?;
                if *retry_on_rejection {
                    f.write_str(":retry")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for ClustererSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["star", sort, resolve] => Ok(ClustererSpec::Star {
                sort: sort.parse()?,
                resolve: resolve.parse()?,
            }),
            ["greedy", select] => Ok(ClustererSpec::Greedy {
                select: select.parse()?,
                retry_on_rejection: false,
            }),
            ["greedy", select, "retry"] => Ok(ClustererSpec::Greedy {
                select: select.parse()?,
                retry_on_rejection: true,
            }),
            _ => Err(Error::Config(format!(
                "unknown clusterer {s:?} (expected star:<sort>:<resolve> or greedy:<select>)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDescriptor {
    pub profile: String,
    pub weighted: bool,
    pub clusterer: String,
    pub s_min: f64,
    pub p_min: f64,
    pub temporal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: RunDescriptor,
    pub counts: LinkCounts,
    pub precision: f64,
    pub recall: f64,
}

pub fn precision_recall(
    c: &Clustering,
    gt: &GroundTruth,
    config: RunDescriptor,
) -> Result<EvaluationReport> {
    let counts = link_counts(c, gt)?;
    Ok(EvaluationReport {
        config,
        counts,
        precision: counts.precision(),
        recall: counts.recall(),
    })
}

/// What a sweep evaluates: every threshold for every profile, clusterer and
/// temporal setting.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub profiles: Vec<ComparisonProfile>,
    pub clusterers: Vec<ClustererSpec>,
    /// `false` = without temporal constraints, `true` = with.
    pub temporal: Vec<bool>,
    pub thresholds: Vec<f64>,
    pub lsh: LshParams,
    pub s_build: f64,
    pub model: TemporalConstraintModel,
    pub p_min: f64,
    /// Multiply pair similarities by plausibility when building the graph.
    pub temporal_at_build: bool,
}

/// One report per (profile, clusterer, temporal, threshold), in that nesting
/// order.
pub fn sweep(
    records: &RecordSet,
    gt: &GroundTruth,
    plan: &SweepPlan,
) -> Result<Vec<EvaluationReport>> {
    if let Some(&t) = plan
        .thresholds
        .iter()
        .find(|&&t| !(t >= plan.s_build && t <= 1.0))
    {
        return Err(Error::Config(format!(
            "sweep threshold {t} outside [{}, 1]",
            plan.s_build
        )));
    }
    let universe = records.ids();
    let mut reports = Vec::new();
    for profile in &plan.profiles {
        let compiled = profile.compile(records.schema())?;
        let build_model = plan.temporal_at_build.then_some(&plan.model);
        let g = build_graph(records, &compiled, plan.lsh, plan.s_build, build_model)?;

        let mut points = Vec::new();
        for clusterer in &plan.clusterers {
            for &temporal in &plan.temporal {
                for &s_min in &plan.thresholds {
                    points.push((*clusterer, temporal, s_min));
                }
            }
        }
        let batch: Vec<EvaluationReport> = points
            .par_iter()
            .map(|&(clusterer, temporal, s_min)| {
                let gate = TemporalGate::new(temporal.then_some(&plan.model), plan.p_min);
                let c = clusterer.run(&g, &universe, gate, s_min)?;
                precision_recall(
                    &c,
                    gt,
                    RunDescriptor {
                        profile: profile.label(),
                        weighted: profile.weighted,
                        clusterer: clusterer.to_string(),
                        s_min,
                        p_min: plan.p_min,
                        temporal,
                    },
                )
            })
            .collect::<Result<_>>()?;
        reports.extend(batch);
    }
    Ok(reports)
}

/// Plot-ready table, one row per report.
pub fn write_reports_csv<W: Write>(reports: &[EvaluationReport], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "profile",
        "weighted",
        "clusterer",
        "temporal",
        "p_min",
        "threshold",
        "true_positives",
        "false_positives",
        "false_negatives",
        "precision",
        "recall",
    ])?;
    for r in reports {
        wtr.write_record([
            r.config.profile.clone(),
            r.config.weighted.to_string(),
            r.config.clusterer.clone(),
            if r.config.temporal { "on" } else { "off" }.to_string(),
            format!("{}", r.config.p_min),
            format!("{}", r.config.s_min),
            r.counts.true_positives.to_string(),
            r.counts.false_positives.to_string(),
            r.counts.false_negatives.to_string(),
            format!("{}", r.precision),
            format!("{}", r.recall),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<reports>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::{Record, Schema};
    use chrono::NaiveDate;
    use std::collections::BTreeMap;

    fn records(n: u64) -> RecordSet {
        let schema = Schema::new(["a"]).unwrap();
        RecordSet::new(
            schema,
            (1..=n)
                .map(|id| Record::new(id, NaiveDate::from_ymd_opt(1880, 1, 1).unwrap(), vec![None]))
                .collect(),
        )
        .unwrap()
    }

    fn truth(records: &RecordSet, pairs: &[(RecordId, &str)]) -> GroundTruth {
        let map: BTreeMap<RecordId, String> =
            pairs.iter().map(|&(id, e)| (id, e.to_string())).collect();
        GroundTruth::new(map, records).unwrap()
    }

    #[test]
    fn pairwise_link_examples() {
        assert_eq!(
            pairwise_links(&[vec![1, 2, 3]]).unwrap(),
            BTreeSet::from([(1, 2), (1, 3), (2, 3)])
        );
        assert!(pairwise_links(&[vec![1], vec![2]]).unwrap().is_empty());
        assert_eq!(
            pairwise_links(&[vec![1, 2], vec![3, 4]]).unwrap(),
            BTreeSet::from([(1, 2), (3, 4)])
        );
        assert!(matches!(
            pairwise_links(&[vec![1, 2], vec![2, 3]]),
            Err(Error::OverlappingClusters(2))
        ));
    }

    #[test]
    fn precision_recall_examples() {
        let rs = records(3);
        let gt = truth(&rs, &[(1, "A"), (2, "A"), (3, "A")]);

        let perfect = Clustering::new(vec![vec![1, 2, 3]], 1..=3).unwrap();
        let c = link_counts(&perfect, &gt).unwrap();
        assert_eq!((c.precision(), c.recall()), (1.0, 1.0));

        let split = Clustering::new(vec![vec![1, 2]], 1..=3).unwrap();
        let c = link_counts(&split, &gt).unwrap();
        assert_eq!(c.precision(), 1.0);
        assert!((c.recall() - 1.0 / 3.0).abs() < 1e-12);

        let singles = Clustering::singletons(1..=3);
        let c = link_counts(&singles, &gt).unwrap();
        assert_eq!((c.precision(), c.recall()), (1.0, 0.0));
    }

    #[test]
    fn no_true_links_means_full_recall() {
        let rs = records(2);
        let gt = truth(&rs, &[(1, "A"), (2, "B")]);
        let c = link_counts(&Clustering::new(vec![vec![1, 2]], 1..=2).unwrap(), &gt).unwrap();
        assert_eq!((c.precision(), c.recall()), (0.0, 1.0));
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let rs = records(3);
        let gt = truth(&rs, &[(1, "A"), (2, "A")]);
        let c = Clustering::singletons(1..=3);
        assert!(matches!(
            link_counts(&c, &gt),
            Err(Error::UniverseMismatch(3))
        ));
    }

    #[test]
    fn clusterer_spec_round_trips_through_text() {
        for spec in ClustererSpec::all() {
            assert_eq!(spec.to_string().parse::<ClustererSpec>().unwrap(), spec);
        }
        let retry: ClustererSpec = "greedy:avr-sim:retry".parse().unwrap();
        assert_eq!(retry.to_string(), "greedy:avr-sim:retry");
        assert!("star:comb".parse::<ClustererSpec>().is_err());
    }
}
