//! Temporal star clustering.
//!
//! Nodes are ranked as potential star centres by one of three orderings. Each
//! still-unassigned node in that order founds a star and grows it from its
//! similar neighbours, best-connected first, admitting a neighbour only if it
//! is temporally plausible with everyone already in the star. A node admitted
//! to one star may still be admitted to later stars; those overlaps are
//! resolved at the end so every node lands in exactly one cluster.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;
use crate::records::RecordId;
use crate::temporal::TemporalGate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SortMethod {
    /// Average similarity, then degree.
    AvrSimFirst,
    /// Degree, then average similarity.
    DegreeFirst,
    /// `avg_similarity * ln(degree)`.
    Comb,
}

impl SortMethod {
    pub const ALL: [SortMethod; 3] = [
        SortMethod::AvrSimFirst,
        SortMethod::DegreeFirst,
        SortMethod::Comb,
    ];
}

impl fmt::Display for SortMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SortMethod::AvrSimFirst => "avr-sim-first",
            SortMethod::DegreeFirst => "degree-first",
            SortMethod::Comb => "comb",
        })
    }
}

impl FromStr for SortMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avr-sim-first" => Ok(SortMethod::AvrSimFirst),
            "degree-first" => Ok(SortMethod::DegreeFirst),
            "comb" => Ok(SortMethod::Comb),
            other => Err(Error::Config(format!(
                "unknown sort method {other:?} (expected avr-sim-first, degree-first or comb)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResolveMethod {
    /// Sum of edge weights into the cluster over `n - 1`.
    AvrAll,
    /// Mean weight of the node's edges into the cluster.
    AvrHigh,
    /// Number of edges into the cluster over `n - 1`.
    EdgeRatio,
}

impl ResolveMethod {
    pub const ALL: [ResolveMethod; 3] = [
        ResolveMethod::AvrAll,
        ResolveMethod::AvrHigh,
        ResolveMethod::EdgeRatio,
    ];
}

impl fmt::Display for ResolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResolveMethod::AvrAll => "avr-all",
            ResolveMethod::AvrHigh => "avr-high",
            ResolveMethod::EdgeRatio => "edge-ratio",
        })
    }
}

impl FromStr for ResolveMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avr-all" => Ok(ResolveMethod::AvrAll),
            "avr-high" => Ok(ResolveMethod::AvrHigh),
            "edge-ratio" => Ok(ResolveMethod::EdgeRatio),
            other => Err(Error::Config(format!(
                "unknown resolve method {other:?} (expected avr-all, avr-high or edge-ratio)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeTuple {
    pub node: RecordId,
    pub degree: usize,
    pub neighbours: BTreeSet<RecordId>,
    pub avg_similarity: f64,
}

impl NodeTuple {
    /// `avg_similarity * ln(degree)`; `-inf` for an isolated node.
    pub fn comb_score(&self) -> f64 {
        if self.degree == 0 {
            f64::NEG_INFINITY
        } else {
            self.avg_similarity * (self.degree as f64).ln()
        }
    }
}

pub fn node_tuples(g: &SimilarityGraph, s_min: f64) -> Vec<NodeTuple> {
    g.nodes()
        .map(|(v, _)| {
            let neighbours = g.sim_neighbours(v, s_min).expect("node of g");
            NodeTuple {
                node: v,
                degree: neighbours.len(),
                avg_similarity: g.avg_neighbour_similarity(v, &neighbours),
                neighbours,
            }
        })
        .collect()
}

fn order(a: &NodeTuple, b: &NodeTuple, method: SortMethod) -> Ordering {
    let by_avg = || b.avg_similarity.total_cmp(&a.avg_similarity);
    let by_degree = || b.degree.cmp(&a.degree);
    let primary = match method {
        SortMethod::AvrSimFirst => by_avg().then_with(by_degree),
        SortMethod::DegreeFirst => by_degree().then_with(by_avg),
        SortMethod::Comb => b.comb_score().total_cmp(&a.comb_score()).then_with(by_avg),
    };
    primary.then_with(|| a.node.cmp(&b.node))
}

/// Best centre candidates first. Every method ends with ascending node id.
pub fn sort_unassigned(mut tuples: Vec<NodeTuple>, method: SortMethod) -> Vec<NodeTuple> {
    tuples.sort_by(|a, b| order(a, b, method));
    tuples
}

/// Mean weight of the edges from `candidate` into `cluster`, over the edges
/// that exist; 0 when there are none.
fn mean_edge_into(g: &SimilarityGraph, candidate: RecordId, cluster: &[RecordId]) -> f64 {
    let (sum, n) = cluster
        .iter()
        .filter_map(|&m| g.weight(candidate, m))
        .fold((0.0, 0usize), |(s, n), w| (s + w, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// The candidate with the highest mean similarity to the current cluster
/// members; ties go to the lower id.
pub fn next_best_neighbour(
    cluster: &[RecordId],
    candidates: &BTreeSet<RecordId>,
    g: &SimilarityGraph,
) -> Option<RecordId> {
    let mut best: Option<(RecordId, f64)> = None;
    for &c in candidates {
        let score = mean_edge_into(g, c, cluster);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((c, score));
        }
    }
    best.map(|(c, _)| c)
}

fn best_mean(remaining: &BTreeMap<RecordId, (f64, usize)>) -> Option<RecordId> {
    let mut best: Option<(RecordId, f64)> = None;
    for (&c, &(sum, n)) in remaining {
        let score = if n == 0 { 0.0 } else { sum / n as f64 };
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((c, score));
        }
    }
    best.map(|(c, _)| c)
}

/// A star: its centre and the members in admission order (centre first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Star {
    pub centre: RecordId,
    pub members: Vec<RecordId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarEvent {
    /// A node founds a new star.
    Centre(RecordId),
    /// The best remaining neighbour joins the current star.
    Admit(RecordId),
    /// The best remaining neighbour fails the temporal check.
    Reject(RecordId),
    /// A node found in several stars is kept in the star with this centre.
    Resolve { node: RecordId, centre: RecordId },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarParams {
    pub s_min: f64,
    pub sort: SortMethod,
    pub resolve: ResolveMethod,
}

/// Grows stars over `g`. Edges below `s_min` are ignored.
pub fn grow_stars(
    g: &SimilarityGraph,
    gate: TemporalGate<'_>,
    s_min: f64,
    sort: SortMethod,
    trace: &mut Vec<StarEvent>,
) -> Vec<Star> {
    let tuples = sort_unassigned(node_tuples(g, s_min), sort);
    let mut assigned: HashSet<RecordId> = HashSet::new();
    let mut centres: HashSet<RecordId> = HashSet::new();
    let mut stars = Vec::new();

    for tuple in &tuples {
        if assigned.contains(&tuple.node) {
            continue;
        }
        let centre = tuple.node;
        assigned.insert(centre);
        centres.insert(centre);
        trace.push(StarEvent::Centre(centre));

        let mut members = vec![centre];
        let mut dates = vec![g.date(centre).expect("node of g")];
        // (sum, count) of edge weights from each remaining candidate into members
        let mut remaining: BTreeMap<RecordId, (f64, usize)> = tuple
            .neighbours
            .iter()
            .filter(|n| !centres.contains(n))
            .map(|&n| (n, (0.0, 0)))
            .collect();
        for (&n, acc) in remaining.iter_mut() {
            if let Some(w) = g.weight(n, centre) {
                *acc = (w, 1);
            }
        }
        while let Some(next) = best_mean(&remaining) {
            remaining.remove(&next);
            let date = g.date(next).expect("node of g");
            if gate.admits(date, dates.iter().copied()) {
                members.push(next);
                dates.push(date);
                assigned.insert(next);
                trace.push(StarEvent::Admit(next));
                for (u, w) in g.neighbours(next) {
                    if let Some(acc) = remaining.get_mut(&u) {
                        acc.0 += w;
                        acc.1 += 1;
                    }
                }
            } else {
                trace.push(StarEvent::Reject(next));
            }
        }
        stars.push(Star { centre, members });
    }
    stars
}

/// Score of keeping `node` in `star`, plus its number of similar edges there.
fn overlap_score(
    g: &SimilarityGraph,
    node: RecordId,
    star: &Star,
    method: ResolveMethod,
    s_min: f64,
) -> (f64, usize) {
    let weights: Vec<f64> = star
        .members
        .iter()
        .filter(|&&m| m != node)
        .filter_map(|&m| g.weight(node, m))
        .filter(|&w| w >= s_min)
        .collect();
    let count = weights.len();
    let sum: f64 = weights.iter().sum();
    let others = (star.members.len() - 1).max(1) as f64;
    let score = match method {
        ResolveMethod::AvrAll => sum / others,
        ResolveMethod::AvrHigh => {
            if count == 0 {
                0.0
            } else {
                sum / count as f64
            }
        }
        ResolveMethod::EdgeRatio => count as f64 / others,
    };
    (score, count)
}

/// Keeps each node that occurs in several stars only in its best star: the
/// highest method score, then the most similar edges, then the lower centre
/// id. All choices are made against the stars as given, then applied.
pub fn resolve_overlaps(
    stars: Vec<Star>,
    g: &SimilarityGraph,
    method: ResolveMethod,
    s_min: f64,
    trace: &mut Vec<StarEvent>,
) -> Vec<Star> {
    let mut homes: BTreeMap<RecordId, Vec<usize>> = BTreeMap::new();
    for (k, star) in stars.iter().enumerate() {
        for &m in &star.members {
            homes.entry(m).or_default().push(k);
        }
    }
    let mut keep: BTreeMap<RecordId, usize> = BTreeMap::new();
    for (&node, ks) in homes.iter().filter(|(_, ks)| ks.len() > 1) {
        let best = ks
            .iter()
            .copied()
            .max_by(|&x, &y| {
                let (sx, cx) = overlap_score(g, node, &stars[x], method, s_min);
                let (sy, cy) = overlap_score(g, node, &stars[y], method, s_min);
                sx.total_cmp(&sy)
                    .then(cx.cmp(&cy))
                    .then(stars[y].centre.cmp(&stars[x].centre))
            })
            .expect("at least two stars");
        trace.push(StarEvent::Resolve {
            node,
            centre: stars[best].centre,
        });
        keep.insert(node, best);
    }
    stars
        .into_iter()
        .enumerate()
        .map(|(k, mut star)| {
            star.members
                .retain(|m| keep.get(m).is_none_or(|&home| home == k));
            star
        })
        .collect()
}

pub fn star_cluster(
    g: &SimilarityGraph,
    universe: impl IntoIterator<Item = RecordId>,
    gate: TemporalGate<'_>,
    params: StarParams,
) -> Result<Clustering> {
    star_cluster_traced(g, universe, gate, params).map(|(c, _)| c)
}

/// Like [`star_cluster`], also returning the sequence of decisions taken.
pub fn star_cluster_traced(
    g: &SimilarityGraph,
    universe: impl IntoIterator<Item = RecordId>,
    gate: TemporalGate<'_>,
    params: StarParams,
) -> Result<(Clustering, Vec<StarEvent>)> {
    let filtered;
    let g = if params.s_min > g.s_build() {
        filtered = g.threshold(params.s_min);
        &filtered
    } else {
        g
    };
    let mut trace = Vec::new();
    let stars = grow_stars(g, gate, params.s_min, params.sort, &mut trace);
    let stars = resolve_overlaps(stars, g, params.resolve, params.s_min, &mut trace);
    let clustering = Clustering::new(stars.into_iter().map(|s| s.members).collect(), universe)?;
    Ok((clustering, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn tuple(node: RecordId, degree: usize, avg: f64) -> NodeTuple {
        NodeTuple {
            node,
            degree,
            neighbours: BTreeSet::new(),
            avg_similarity: avg,
        }
    }

    fn order_of(tuples: Vec<NodeTuple>, m: SortMethod) -> Vec<RecordId> {
        sort_unassigned(tuples, m).iter().map(|t| t.node).collect()
    }

    #[test]
    fn sort_examples() {
        let t = vec![tuple(1, 2, 0.9), tuple(2, 5, 0.8)];
        assert_eq!(order_of(t.clone(), SortMethod::AvrSimFirst), vec![1, 2]);
        assert_eq!(order_of(t, SortMethod::DegreeFirst), vec![2, 1]);
        // 0.9 * ln 1 = 0 < 0.5 * ln 10
        let t = vec![tuple(1, 1, 0.9), tuple(2, 10, 0.5)];
        assert_eq!(order_of(t, SortMethod::Comb), vec![2, 1]);
    }

    #[test]
    fn sort_tie_breaks() {
        let t = vec![tuple(3, 2, 0.8), tuple(1, 2, 0.8), tuple(2, 3, 0.8)];
        assert_eq!(order_of(t.clone(), SortMethod::AvrSimFirst), vec![2, 1, 3]);
        assert_eq!(order_of(t, SortMethod::DegreeFirst), vec![2, 1, 3]);
        // degree-1 nodes all score 0 under comb; then by avg, then id
        let t = vec![
            tuple(3, 1, 0.7),
            tuple(1, 1, 0.9),
            tuple(2, 1, 0.9),
            tuple(4, 0, 0.0),
        ];
        assert_eq!(order_of(t, SortMethod::Comb), vec![1, 2, 3, 4]);
    }

    fn graph(edges: &[(RecordId, RecordId, f64)]) -> SimilarityGraph {
        let mut g = SimilarityGraph::new(0.7);
        for &(a, b, _) in edges {
            g.add_node(a, NaiveDate::from_ymd_opt(1880, 1, 1).unwrap());
            g.add_node(b, NaiveDate::from_ymd_opt(1880, 1, 1).unwrap());
        }
        for &(a, b, w) in edges {
            g.add_edge(a, b, w).unwrap();
        }
        g
    }

    #[test]
    fn next_best_neighbour_examples() {
        // centre 1, member 2; x = 10 (0.9 to centre), y = 11 (0.8 to both)
        let g = graph(&[(1, 2, 0.9), (1, 10, 0.9), (1, 11, 0.8), (2, 11, 0.8)]);
        assert_eq!(
            next_best_neighbour(&[1, 2], &BTreeSet::from([10, 11]), &g),
            Some(10)
        );
        assert_eq!(
            next_best_neighbour(&[1, 2], &BTreeSet::from([11]), &g),
            Some(11)
        );
        let g = graph(&[(1, 5, 0.8), (1, 4, 0.8)]);
        assert_eq!(
            next_best_neighbour(&[1], &BTreeSet::from([4, 5]), &g),
            Some(4)
        );
        assert_eq!(next_best_neighbour(&[1], &BTreeSet::new(), &g), None);
    }

    /// v = 9 sits in star A = {1, 2, 9} (one 0.9 edge) and star B = {5, 6, 9}
    /// (two 0.8 edges).
    fn overlap_fixture() -> (SimilarityGraph, Vec<Star>) {
        let g = graph(&[
            (1, 2, 0.95),
            (1, 9, 0.9),
            (5, 6, 0.95),
            (5, 9, 0.8),
            (6, 9, 0.8),
        ]);
        let stars = vec![
            Star {
                centre: 1,
                members: vec![1, 2, 9],
            },
            Star {
                centre: 5,
                members: vec![5, 6, 9],
            },
        ];
        (g, stars)
    }

    fn kept_in(stars: &[Star], node: RecordId) -> Vec<RecordId> {
        stars
            .iter()
            .filter(|s| s.members.contains(&node))
            .map(|s| s.centre)
            .collect()
    }

    #[test]
    fn resolve_examples() {
        let (g, stars) = overlap_fixture();
        // avr-all: A 0.9/2 = 0.45, B 1.6/2 = 0.8
        let out = resolve_overlaps(stars.clone(), &g, ResolveMethod::AvrAll, 0.7, &mut vec![]);
        assert_eq!(kept_in(&out, 9), vec![5]);
        // edge-ratio: A 1/2, B 2/2
        let out = resolve_overlaps(
            stars.clone(),
            &g,
            ResolveMethod::EdgeRatio,
            0.7,
            &mut vec![],
        );
        assert_eq!(kept_in(&out, 9), vec![5]);
        // avr-high: A 0.9, B 0.8
        let out = resolve_overlaps(stars, &g, ResolveMethod::AvrHigh, 0.7, &mut vec![]);
        assert_eq!(kept_in(&out, 9), vec![1]);
    }

    #[test]
    fn resolve_tie_prefers_more_edges_then_lower_centre() {
        // avr-high ties at 0.8; B has two similar edges
        let g = graph(&[
            (1, 9, 0.8),
            (1, 2, 0.9),
            (5, 9, 0.8),
            (6, 9, 0.8),
            (5, 6, 0.9),
        ]);
        let stars = vec![
            Star {
                centre: 1,
                members: vec![1, 2, 9],
            },
            Star {
                centre: 5,
                members: vec![5, 6, 9],
            },
        ];
        let out = resolve_overlaps(stars, &g, ResolveMethod::AvrHigh, 0.7, &mut vec![]);
        assert_eq!(kept_in(&out, 9), vec![5]);

        let g = graph(&[(1, 9, 0.8), (5, 9, 0.8)]);
        let stars = vec![
            Star {
                centre: 5,
                members: vec![5, 9],
            },
            Star {
                centre: 1,
                members: vec![1, 9],
            },
        ];
        let out = resolve_overlaps(stars, &g, ResolveMethod::AvrAll, 0.7, &mut vec![]);
        assert_eq!(kept_in(&out, 9), vec![1]);
    }

    #[test]
    fn single_membership_is_untouched() {
        let (g, mut stars) = overlap_fixture();
        stars[1].members.pop();
        let out = resolve_overlaps(stars.clone(), &g, ResolveMethod::AvrAll, 0.7, &mut vec![]);
        assert_eq!(out, stars);
    }

    #[test]
    fn edgeless_graph_gives_singletons() {
        let mut g = SimilarityGraph::new(0.7);
        for id in 1..=3 {
            g.add_node(id, NaiveDate::from_ymd_opt(1880, 1, 1).unwrap());
        }
        let params = StarParams {
            s_min: 0.7,
            sort: SortMethod::Comb,
            resolve: ResolveMethod::AvrAll,
        };
        let c = star_cluster(&g, 1..=4, TemporalGate::disabled(), params).unwrap();
        assert_eq!(c, Clustering::singletons(1..=4));
    }

    #[test]
    fn single_edge_forms_one_cluster() {
        let g = graph(&[(1, 2, 0.9)]);
        let params = StarParams {
            s_min: 0.8,
            sort: SortMethod::AvrSimFirst,
            resolve: ResolveMethod::AvrAll,
        };
        let c = star_cluster(&g, 1..=3, TemporalGate::disabled(), params).unwrap();
        assert_eq!(c.clusters(), &[vec![1, 2], vec![3]]);
    }

    #[test]
    fn universe_must_contain_graph_nodes() {
        let g = graph(&[(1, 2, 0.9)]);
        let params = StarParams {
            s_min: 0.7,
            sort: SortMethod::AvrSimFirst,
            resolve: ResolveMethod::AvrAll,
        };
        assert!(star_cluster(&g, [1], TemporalGate::disabled(), params).is_err());
    }
}
