//! Greedy temporal clustering.
//!
//! Every connected node starts as its own cluster in a queue ordered by the
//! date of each cluster's latest member. The earliest cluster is repeatedly
//! taken off the queue and extended by one "future" node (an out-neighbour in
//! the time-directed graph). If the chosen node is temporally implausible
//! with any member, the cluster is final.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;
use crate::records::RecordId;
use crate::temporal::TemporalGate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectMethod {
    /// Earliest candidate.
    Next,
    /// Candidate with the strongest single edge from the cluster.
    MaxSim,
    /// Candidate with the highest mean edge weight from the cluster.
    AvrSim,
}

impl SelectMethod {
    pub const ALL: [SelectMethod; 3] = [
        SelectMethod::Next,
        SelectMethod::MaxSim,
        SelectMethod::AvrSim,
    ];
}

impl fmt::Display for SelectMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectMethod::Next => "next",
            SelectMethod::MaxSim => "max-sim",
            SelectMethod::AvrSim => "avr-sim",
        })
    }
}

impl FromStr for SelectMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "next" => Ok(SelectMethod::Next),
            "max-sim" => Ok(SelectMethod::MaxSim),
            "avr-sim" => Ok(SelectMethod::AvrSim),
            other => Err(Error::Config(format!(
                "unknown select method {other:?} (expected next, max-sim or avr-sim)"
            ))),
        }
    }
}

/// The similarity graph with every edge pointing from the earlier record to
/// the later one (equal dates: lower id to higher id).
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedTemporalGraph {
    dates: BTreeMap<RecordId, NaiveDate>,
    out: BTreeMap<RecordId, BTreeMap<RecordId, f64>>,
    incoming: BTreeMap<RecordId, BTreeMap<RecordId, f64>>,
}

impl DirectedTemporalGraph {
    pub fn date(&self, id: RecordId) -> Option<NaiveDate> {
        self.dates.get(&id).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = RecordId> + '_ {
        self.dates.keys().copied()
    }

    pub fn out(&self, id: RecordId) -> impl Iterator<Item = (RecordId, f64)> + '_ {
        self.out
            .get(&id)
            .into_iter()
            .flat_map(|m| m.iter().map(|(&v, &w)| (v, w)))
    }

    pub fn incoming(&self, id: RecordId) -> impl Iterator<Item = (RecordId, f64)> + '_ {
        self.incoming
            .get(&id)
            .into_iter()
            .flat_map(|m| m.iter().map(|(&v, &w)| (v, w)))
    }

    pub fn weight(&self, from: RecordId, to: RecordId) -> Option<f64> {
        self.out.get(&from).and_then(|m| m.get(&to)).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.out.values().map(BTreeMap::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (RecordId, RecordId, f64)> + '_ {
        self.out
            .iter()
            .flat_map(|(&a, m)| m.iter().map(move |(&b, &w)| (a, b, w)))
    }

    fn is_isolated(&self, id: RecordId) -> bool {
        self.out.get(&id).is_none_or(BTreeMap::is_empty)
            && self.incoming.get(&id).is_none_or(BTreeMap::is_empty)
    }
}

pub fn to_directed(g: &SimilarityGraph) -> DirectedTemporalGraph {
    let mut dates = BTreeMap::new();
    let mut out: BTreeMap<RecordId, BTreeMap<RecordId, f64>> = BTreeMap::new();
    let mut incoming: BTreeMap<RecordId, BTreeMap<RecordId, f64>> = BTreeMap::new();
    for (id, date) in g.nodes() {
        dates.insert(id, date);
    }
    for (a, b, w) in g.edges() {
        let (ta, tb) = (dates[&a], dates[&b]);
        // edges() yields a < b, so equal dates already point low -> high
        let (from, to) = if tb < ta { (b, a) } else { (a, b) };
        out.entry(from).or_default().insert(to, w);
        incoming.entry(to).or_default().insert(from, w);
    }
    DirectedTemporalGraph {
        dates,
        out,
        incoming,
    }
}

/// Weights of the edges from cluster members into `candidate`.
fn incoming_from<'a>(
    gd: &'a DirectedTemporalGraph,
    cluster: &'a [RecordId],
    candidate: RecordId,
) -> impl Iterator<Item = f64> + 'a {
    cluster.iter().filter_map(move |&m| gd.weight(m, candidate))
}

/// Picks the next node for `cluster` among `candidates`; ties go to the lower id.
pub fn select_next(
    cluster: &[RecordId],
    candidates: &BTreeSet<RecordId>,
    gd: &DirectedTemporalGraph,
    method: SelectMethod,
) -> Option<RecordId> {
    match method {
        SelectMethod::Next => candidates.iter().copied().min_by_key(|&c| (gd.date(c), c)),
        SelectMethod::MaxSim | SelectMethod::AvrSim => {
            let mut best: Option<(RecordId, f64)> = None;
            for &c in candidates {
                let score = if method == SelectMethod::MaxSim {
                    incoming_from(gd, cluster, c).fold(f64::NEG_INFINITY, f64::max)
                } else {
                    let (sum, n) = incoming_from(gd, cluster, c)
                        .fold((0.0, 0usize), |(s, n), w| (s + w, n + 1));
                    if n == 0 {
                        f64::NEG_INFINITY
                    } else {
                        sum / n as f64
                    }
                };
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((c, score));
                }
            }
            best.map(|(c, _)| c)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GreedyEvent {
    /// A node without edges goes straight to the output.
    Isolated(RecordId),
    /// The earliest queued cluster is taken for expansion.
    Pop(Vec<RecordId>),
    /// The selection method's choice among the cluster's candidates.
    Select(RecordId),
    Admit(RecordId),
    Reject(RecordId),
    /// The cluster can grow no further.
    Finalise(Vec<RecordId>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyParams {
    pub select: SelectMethod,
    /// After a rejection, try the next-best candidate instead of finalising.
    pub retry_on_rejection: bool,
}

impl GreedyParams {
    pub fn new(select: SelectMethod) -> Self {
        Self {
            select,
            retry_on_rejection: false,
        }
    }
}

pub fn greedy_cluster(
    g: &SimilarityGraph,
    universe: impl IntoIterator<Item = RecordId>,
    gate: TemporalGate<'_>,
    params: GreedyParams,
) -> Result<Clustering> {
    greedy_cluster_traced(g, universe, gate, params).map(|(c, _)| c)
}

type QueueKey = (NaiveDate, RecordId);

struct Run<'g> {
    gd: &'g DirectedTemporalGraph,
    queue: BTreeMap<QueueKey, Vec<RecordId>>,
    finals: Vec<Option<Vec<RecordId>>>,
    final_singletons: HashMap<RecordId, usize>,
    /// Members of clusters with two or more records.
    grouped: HashSet<RecordId>,
    trace: Vec<GreedyEvent>,
}

impl Run<'_> {
    fn key(&self, members: &[RecordId]) -> QueueKey {
        let latest = members
            .iter()
            .map(|&m| self.gd.date(m).expect("node"))
            .max()
            .expect("non-empty cluster");
        (latest, *members.iter().min().expect("non-empty cluster"))
    }

    fn finalise(&mut self, members: Vec<RecordId>) {
        self.trace.push(GreedyEvent::Finalise(members.clone()));
        if let [single] = members[..] {
            self.final_singletons.insert(single, self.finals.len());
        }
        self.finals.push(Some(members));
    }

    /// Removes `node`'s singleton cluster, pending or final.
    fn take_singleton(&mut self, node: RecordId) {
        let key = (self.gd.date(node).expect("node"), node);
        if self.queue.get(&key).is_some_and(|m| m.as_slice() == [node]) {
            self.queue.remove(&key);
        } else if let Some(k) = self.final_singletons.remove(&node) {
            self.finals[k] = None;
        }
    }

    fn candidates(&self, members: &[RecordId]) -> BTreeSet<RecordId> {
        members
            .iter()
            .flat_map(|&m| self.gd.out(m).map(|(v, _)| v))
            .filter(|v| !members.contains(v) && !self.grouped.contains(v))
            .collect()
    }
}

/// Like [`greedy_cluster`], also returning the sequence of decisions taken.
pub fn greedy_cluster_traced(
    g: &SimilarityGraph,
    universe: impl IntoIterator<Item = RecordId>,
    gate: TemporalGate<'_>,
    params: GreedyParams,
) -> Result<(Clustering, Vec<GreedyEvent>)> {
    let gd = to_directed(g);
    let mut run = Run {
        gd: &gd,
        queue: BTreeMap::new(),
        finals: Vec::new(),
        final_singletons: HashMap::new(),
        grouped: HashSet::new(),
        trace: Vec::new(),
    };
    for v in gd.nodes() {
        if gd.is_isolated(v) {
            run.trace.push(GreedyEvent::Isolated(v));
            run.finals.push(Some(vec![v]));
        } else {
            let key = run.key(&[v]);
            run.queue.insert(key, vec![v]);
        }
    }

    while let Some((_, mut members)) = run.queue.pop_first() {
        run.trace.push(GreedyEvent::Pop(members.clone()));
        let mut candidates = run.candidates(&members);
        loop {
            let Some(next) = select_next(&members, &candidates, &gd, params.select) else {
                run.finalise(members);
                break;
            };
            run.trace.push(GreedyEvent::Select(next));
            let date = gd.date(next).expect("node");
            let plausible = gate.admits(date, members.iter().map(|&m| gd.date(m).expect("node")));
            if plausible {
                run.trace.push(GreedyEvent::Admit(next));
                run.take_singleton(next);
                members.push(next);
                run.grouped.extend(members.iter().copied());
                let key = run.key(&members);
                run.queue.insert(key, members);
                break;
            }
            run.trace.push(GreedyEvent::Reject(next));
            if params.retry_on_rejection {
                candidates.remove(&next);
            } else {
                run.finalise(members);
                break;
            }
        }
    }

    let Run { finals, trace, .. } = run;
    let clustering = Clustering::new(finals.into_iter().flatten().collect(), universe)?;
    Ok((clustering, trace))
}
