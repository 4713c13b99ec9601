//! The undirected pairwise similarity graph.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::blocking::{build_index, candidate_pairs, LshParams};
use crate::error::{Error, Result};
use crate::records::{RecordId, RecordSet};
use crate::similarity::CompiledProfile;
use crate::temporal::{days_between, TemporalConstraintModel};

pub const DEFAULT_S_BUILD: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    s_build: f64,
    nodes: BTreeMap<RecordId, NaiveDate>,
    adjacency: BTreeMap<RecordId, BTreeMap<RecordId, f64>>,
    edge_count: usize,
}

impl SimilarityGraph {
    pub fn new(s_build: f64) -> Self {
        Self {
            s_build,
            nodes: BTreeMap::new(),
            adjacency: BTreeMap::new(),
            edge_count: 0,
        }
    }

    pub fn s_build(&self) -> f64 {
        self.s_build
    }

    pub fn add_node(&mut self, id: RecordId, date: NaiveDate) {
        self.nodes.insert(id, date);
        self.adjacency.entry(id).or_default();
    }

    /// Inserts an undirected edge between two existing nodes. A repeated edge
    /// keeps the larger weight.
    pub fn add_edge(&mut self, a: RecordId, b: RecordId, weight: f64) -> Result<()> {
        if a == b {
            return Err(Error::InvalidEdge(a, b, "self-loop".into()));
        }
        if !(weight >= self.s_build && weight <= 1.0) {
            return Err(Error::InvalidEdge(
                a,
                b,
                format!("weight {weight} outside [{}, 1]", self.s_build),
            ));
        }
        for id in [a, b] {
            if !self.nodes.contains_key(&id) {
                return Err(Error::UnknownNode(id));
            }
        }
        let slot = self.adjacency.get_mut(&a).expect("node").entry(b);
        let fresh = matches!(slot, std::collections::btree_map::Entry::Vacant(_));
        let w = slot.or_insert(weight);
        *w = w.max(weight);
        let w = *w;
        self.adjacency.get_mut(&b).expect("node").insert(a, w);
        if fresh {
            self.edge_count += 1;
        }
        Ok(())
    }

    pub fn contains(&self, id: RecordId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = (RecordId, NaiveDate)> + '_ {
        self.nodes.iter().map(|(&id, &d)| (id, d))
    }

    pub fn date(&self, id: RecordId) -> Option<NaiveDate> {
        self.nodes.get(&id).copied()
    }

    pub fn weight(&self, a: RecordId, b: RecordId) -> Option<f64> {
        self.adjacency.get(&a).and_then(|n| n.get(&b)).copied()
    }

    /// Neighbours of `id` with edge weights, ascending by id. Empty for an
    /// unknown id.
    pub fn neighbours(&self, id: RecordId) -> impl Iterator<Item = (RecordId, f64)> + '_ {
        self.adjacency
            .get(&id)
            .into_iter()
            .flat_map(|n| n.iter().map(|(&v, &w)| (v, w)))
    }

    pub fn degree(&self, id: RecordId) -> usize {
        self.adjacency.get(&id).map_or(0, BTreeMap::len)
    }

    /// Edges `(a, b, w)` with `a < b`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (RecordId, RecordId, f64)> + '_ {
        self.adjacency
            .iter()
            .flat_map(|(&a, n)| n.range(a + 1..).map(move |(&b, &w)| (a, b, w)))
    }

    pub fn sim_neighbours(&self, v: RecordId, s_min: f64) -> Result<BTreeSet<RecordId>> {
        let adj = self.adjacency.get(&v).ok_or(Error::UnknownNode(v))?;
        Ok(adj
            .iter()
            .filter(|(_, &w)| w >= s_min)
            .map(|(&u, _)| u)
            .collect())
    }

    /// Mean weight of the edges from `v` to `neighbours`; 0 when empty.
    pub fn avg_neighbour_similarity(&self, v: RecordId, neighbours: &BTreeSet<RecordId>) -> f64 {
        if neighbours.is_empty() {
            return 0.0;
        }
        let sum: f64 = neighbours
            .iter()
            .map(|&u| self.weight(v, u).unwrap_or(0.0))
            .sum();
        sum / neighbours.len() as f64
    }

    /// Copy keeping every node but only edges of weight `>= s_min`.
    pub fn threshold(&self, s_min: f64) -> SimilarityGraph {
        if s_min <= self.s_build {
            return self.clone();
        }
        let mut g = SimilarityGraph::new(s_min);
        for (id, date) in self.nodes() {
            g.add_node(id, date);
        }
        for (a, b, w) in self.edges() {
            if w >= s_min {
                g.add_edge(a, b, w).expect("edge of a valid graph");
            }
        }
        g
    }

    /// Three columns `id_i,id_j,weight`, one row per edge, `id_i < id_j`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["id_i", "id_j", "weight"])?;
        for (a, b, w) in self.edges() {
            wtr.write_record([a.to_string(), b.to_string(), format!("{w}")])?;
        }
        wtr.flush().map_err(|e| Error::io("<graph>", e))?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }

    /// Reads an edge file; node dates come from `records`.
    pub fn read_csv<R: Read>(reader: R, records: &RecordSet, s_build: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut g = SimilarityGraph::new(s_build);
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            let bad = |message: String| Error::BadRow { row: line, message };
            if row.len() != 3 {
                return Err(bad(format!("expected 3 columns, found {}", row.len())));
            }
            let id = |s: &str| -> Result<RecordId> {
                s.trim().parse().map_err(|_| Error::BadId {
                    row: line,
                    value: s.to_string(),
                })
            };
            let (a, b) = (id(&row[0])?, id(&row[1])?);
            let w: f64 = row[2]
                .trim()
                .parse()
                .map_err(|_| bad(format!("unparseable weight {:?}", &row[2])))?;
            for node in [a, b] {
                let rec = records.get(node).ok_or(Error::UnknownRecord(node))?;
                g.add_node(node, rec.date);
            }
            g.add_edge(a, b, w)?;
        }
        Ok(g)
    }

    pub fn load(path: impl AsRef<Path>, records: &RecordSet, s_build: f64) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, records, s_build)
    }
}

/// Scores the given candidate pairs and keeps those at or above `s_build`.
/// With a temporal model, each score is first multiplied by the pair's
/// plausibility.
pub fn build_graph_from_pairs(
    records: &RecordSet,
    profile: &CompiledProfile,
    pairs: &[(RecordId, RecordId)],
    s_build: f64,
    temporal: Option<&TemporalConstraintModel>,
) -> Result<SimilarityGraph> {
    if !(s_build > 0.0 && s_build <= 1.0) {
        return Err(Error::Config(format!("s_build {s_build} outside (0, 1]")));
    }
    let mut canonical = BTreeMap::new();
    for &(a, b) in pairs {
        for id in [a, b] {
            if let Entry::Vacant(slot) = canonical.entry(id) {
                let rec = records.get(id).ok_or(Error::UnknownRecord(id))?;
                slot.insert(profile.canonical_values(rec));
            }
        }
    }

    let scored: Vec<Option<(RecordId, RecordId, f64)>> = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<_> {
            let mut s = profile.score_canonical(&canonical[&a], &canonical[&b])?;
            if let Some(model) = temporal {
                let (ta, tb) = (records.get(a).unwrap().date, records.get(b).unwrap().date);
                s *= model.plausibility(days_between(ta, tb));
            }
            Ok((s >= s_build).then_some((a, b, s)))
        })
        .collect::<Result<_>>()?;

    let mut g = SimilarityGraph::new(s_build);
    for (a, b, w) in scored.into_iter().flatten() {
        g.add_node(a, records.get(a).unwrap().date);
        g.add_node(b, records.get(b).unwrap().date);
        g.add_edge(a, b, w)?;
    }
    Ok(g)
}

/// Blocking followed by pair scoring.
pub fn build_graph(
    records: &RecordSet,
    profile: &CompiledProfile,
    lsh: LshParams,
    s_build: f64,
    temporal: Option<&TemporalConstraintModel>,
) -> Result<SimilarityGraph> {
    let index = build_index(records, profile, lsh);
    let pairs = candidate_pairs(&index);
    build_graph_from_pairs(records, profile, &pairs, s_build, temporal)
}

/// All unordered pairs of the record set, smaller id first.
pub fn all_pairs(records: &RecordSet) -> Vec<(RecordId, RecordId)> {
    let ids = records.ids();
    let mut out = Vec::with_capacity(ids.len() * ids.len().saturating_sub(1) / 2);
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            out.push((a, b));
        }
    }
    out
}
