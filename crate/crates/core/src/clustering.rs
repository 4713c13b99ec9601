//! Disjoint partitions of record ids.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::records::RecordId;

/// A disjoint cover of a record-id universe, in canonical form: members
/// ascending within each cluster, clusters ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clustering {
    clusters: Vec<Vec<RecordId>>,
}

impl Clustering {
    /// Ids of `universe` missing from `clusters` become singletons. Fails if
    /// an id appears twice or lies outside the universe.
    pub fn new<I>(clusters: Vec<Vec<RecordId>>, universe: I) -> Result<Self>
    where
        I: IntoIterator<Item = RecordId>,
    {
        let universe: HashSet<RecordId> = universe.into_iter().collect();
        let mut seen = HashSet::with_capacity(universe.len());
        let mut out: Vec<Vec<RecordId>> = Vec::with_capacity(clusters.len());
        for mut c in clusters {
            for &id in &c {
                if !universe.contains(&id) {
                    return Err(Error::UnknownRecord(id));
                }
                if !seen.insert(id) {
                    return Err(Error::OverlappingClusters(id));
                }
            }
            if !c.is_empty() {
                c.sort_unstable();
                out.push(c);
            }
        }
        out.extend(universe.difference(&seen).map(|&id| vec![id]));
        out.sort_unstable_by_key(|c| c[0]);
        Ok(Self { clusters: out })
    }

    /// Every id of the universe in its own cluster.
    pub fn singletons<I: IntoIterator<Item = RecordId>>(universe: I) -> Self {
        Self::new(Vec::new(), universe).expect("singletons are disjoint")
    }

    pub fn clusters(&self) -> &[Vec<RecordId>] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn record_count(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    /// Clusters with two or more members.
    pub fn non_singletons(&self) -> impl Iterator<Item = &[RecordId]> {
        self.clusters
            .iter()
            .filter(|c| c.len() > 1)
            .map(Vec::as_slice)
    }

    /// Record id → cluster index.
    pub fn assignment(&self) -> BTreeMap<RecordId, usize> {
        self.clusters
            .iter()
            .enumerate()
            .flat_map(|(k, c)| c.iter().map(move |&id| (id, k)))
            .collect()
    }

    /// Two columns `record_id,cluster_id`, sorted by record id. Cluster ids
    /// are canonical cluster indices.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["record_id", "cluster_id"])?;
        for (id, k) in self.assignment() {
            wtr.write_record([id.to_string(), k.to_string()])?;
        }
        wtr.flush().map_err(|e| Error::io("<clustering>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file)
    }

    /// Reads a `record_id,cluster_id` file. Cluster ids are opaque labels.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut groups: BTreeMap<String, Vec<RecordId>> = BTreeMap::new();
        let mut universe = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map(|p| p.line()).unwrap_or(0);
            if row.len() != 2 {
                return Err(Error::BadRow {
                    row: line,
                    message: format!("expected 2 columns, found {}", row.len()),
                });
            }
            let id: RecordId = row[0].trim().parse().map_err(|_| Error::BadId {
                row: line,
                value: row[0].to_string(),
            })?;
            groups
                .entry(row[1].trim().to_string())
                .or_default()
                .push(id);
            universe.push(id);
        }
        Self::new(groups.into_values().collect(), universe)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }
}
