//! Min-hash signatures and LSH banding.
//!
//! Records are shingled into attribute-tagged character 2-grams, hashed with
//! `b * r` seeded multiply-add functions, and placed in one block per band
//! keyed by that band's `r` minima. Any two records sharing a block become a
//! candidate pair.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::records::{Record, RecordId, RecordSet};
use crate::similarity::CompiledProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LshParams {
    /// Number of bands `b`.
    pub bands: usize,
    /// Band size `r`.
    pub band_size: usize,
    pub seed: u64,
}

impl Default for LshParams {
    fn default() -> Self {
        Self {
            bands: 100,
            band_size: 4,
            seed: 42,
        }
    }
}

impl LshParams {
    pub fn signature_len(&self) -> usize {
        self.bands * self.band_size
    }
}

/// Attribute-tagged character 2-grams of the profile's attributes.
///
/// A canonical value shorter than two characters yields itself as a token.
pub fn shingle(record: &Record, profile: &CompiledProfile) -> BTreeSet<String> {
    let values = profile.canonical_values(record);
    shingle_canonical(&values, profile)
}

pub(crate) fn shingle_canonical(
    values: &[Option<String>],
    profile: &CompiledProfile,
) -> BTreeSet<String> {
    let mut tokens = BTreeSet::new();
    for (value, comparator) in values.iter().zip(&profile.profile().comparators) {
        let Some(value) = value else { continue };
        let chars: Vec<char> = value.chars().collect();
        if chars.len() < 2 {
            tokens.insert(format!("{}:{}", comparator.attribute, value));
            continue;
        }
        for pair in chars.windows(2) {
            tokens.insert(format!("{}:{}{}", comparator.attribute, pair[0], pair[1]));
        }
    }
    tokens
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    z = (z ^ (z >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    z ^ (z >> 33)
}

/// FNV-1a followed by a 64-bit finaliser.
fn token_hash(token: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for byte in token.bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    fmix64(h)
}

/// `b * r` seeded hash functions `h_k(x) = a_k * x + c_k (mod 2^64)`.
#[derive(Debug, Clone)]
pub struct HashFamily {
    coefficients: Vec<(u64, u64)>,
}

impl HashFamily {
    pub fn new(count: usize, seed: u64) -> Self {
        let mut state = seed;
        let coefficients = (0..count)
            .map(|_| {
                let a = splitmix64(&mut state) | 1;
                let c = splitmix64(&mut state);
                (a, c)
            })
            .collect();
        Self { coefficients }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn signature<'a, I>(&self, tokens: I) -> Signature
    where
        I: IntoIterator<Item = &'a String>,
    {
        let hashes: Vec<u64> = tokens.into_iter().map(|t| token_hash(t)).collect();
        if hashes.is_empty() {
            return Signature::sentinel();
        }
        let minima = self
            .coefficients
            .iter()
            .map(|&(a, c)| {
                hashes
                    .iter()
                    .map(|&x| a.wrapping_mul(x).wrapping_add(c))
                    .min()
                    .expect("non-empty")
            })
            .collect();
        Signature(minima)
    }
}

/// Per-function hash minima. The empty-token-set sentinel holds no minima and
/// never lands in a block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature(Vec<u64>);

impl Signature {
    pub fn sentinel() -> Self {
        Signature(Vec::new())
    }

    pub fn is_sentinel(&self) -> bool {
        self.0.is_empty()
    }

    pub fn minima(&self) -> &[u64] {
        &self.0
    }

    /// One key per band, each hashing that band's `band_size` minima.
    pub fn band_keys(&self, band_size: usize) -> Vec<u64> {
        if self.is_sentinel() || band_size == 0 {
            return Vec::new();
        }
        self.0
            .chunks_exact(band_size)
            .map(|band| {
                band.iter().fold(0x84222325_CBF29CE4u64, |acc, &m| {
                    fmix64(acc ^ m).wrapping_add(m)
                })
            })
            .collect()
    }
}

pub fn signature(
    tokens: &BTreeSet<String>,
    bands: usize,
    band_size: usize,
    seed: u64,
) -> Signature {
    HashFamily::new(bands * band_size, seed).signature(tokens)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinHashIndex {
    params: LshParams,
    /// One map per band: band key → record ids, ascending.
    bands: Vec<BTreeMap<u64, Vec<RecordId>>>,
}

impl MinHashIndex {
    pub fn params(&self) -> LshParams {
        self.params
    }

    pub fn bands(&self) -> &[BTreeMap<u64, Vec<RecordId>>] {
        &self.bands
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[RecordId]> {
        self.bands
            .iter()
            .flat_map(|b| b.values().map(Vec::as_slice))
    }

    pub fn is_empty(&self) -> bool {
        self.bands.iter().all(BTreeMap::is_empty)
    }
}

pub fn build_index(
    records: &RecordSet,
    profile: &CompiledProfile,
    params: LshParams,
) -> MinHashIndex {
    let family = HashFamily::new(params.signature_len(), params.seed);
    let mut sorted: Vec<&Record> = records.records().iter().collect();
    sorted.sort_unstable_by_key(|r| r.id);

    let keyed: Vec<(RecordId, Vec<u64>)> = sorted
        .par_iter()
        .map(|r| {
            let tokens = shingle(r, profile);
            (r.id, family.signature(&tokens).band_keys(params.band_size))
        })
        .collect();

    let mut bands = vec![BTreeMap::<u64, Vec<RecordId>>::new(); params.bands];
    for (id, keys) in keyed {
        for (band, key) in keys.into_iter().enumerate() {
            bands[band].entry(key).or_default().push(id);
        }
    }
    MinHashIndex { params, bands }
}

/// Every unordered pair sharing at least one block, smaller id first, sorted
/// and without duplicates.
pub fn candidate_pairs(index: &MinHashIndex) -> Vec<(RecordId, RecordId)> {
    let mut pairs = Vec::new();
    for block in index.blocks() {
        for (i, &a) in block.iter().enumerate() {
            for &b in &block[i + 1..] {
                if a != b {
                    pairs.push((a.min(b), a.max(b)));
                }
            }
        }
    }
    pairs.par_sort_unstable();
    pairs.dedup();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::Schema;
    use crate::similarity::{AttributeComparator, ComparisonProfile, SimilarityFunction};
    use chrono::NaiveDate;

    fn profile(schema: &Schema) -> CompiledProfile {
        ComparisonProfile::custom(
            schema
                .names()
                .iter()
                .map(|n| AttributeComparator::new(n.clone(), SimilarityFunction::JaroWinkler, 1.0))
                .collect(),
            false,
        )
        .unwrap()
        .compile(schema)
        .unwrap()
    }

    fn rec(id: RecordId, vals: &[Option<&str>]) -> Record {
        Record::new(
            id,
            NaiveDate::from_ymd_opt(1880, 1, 1).unwrap(),
            vals.iter().map(|v| v.map(str::to_string)).collect(),
        )
    }

    #[test]
    fn shingle_examples() {
        let schema = Schema::new(["mother_first", "mother_last"]).unwrap();
        let p = profile(&schema);
        let tokens = shingle(&rec(1, &[Some("Ann"), None]), &p);
        assert_eq!(
            tokens,
            BTreeSet::from(["mother_first:an".to_string(), "mother_first:nn".to_string()])
        );
        assert!(shingle(&rec(2, &[None, None]), &p).is_empty());
        assert_eq!(
            shingle(&rec(3, &[Some("Mary"), Some("Ross")]), &p),
            shingle(&rec(4, &[Some("mary "), Some("ROSS")]), &p)
        );
    }

    #[test]
    fn short_values_still_tokenise() {
        let schema = Schema::new(["initial"]).unwrap();
        let p = profile(&schema);
        assert_eq!(
            shingle(&rec(1, &[Some("J")]), &p),
            BTreeSet::from(["initial:j".to_string()])
        );
    }

    #[test]
    fn signatures() {
        let a: BTreeSet<String> = ["x:ab", "x:bc"].iter().map(|s| s.to_string()).collect();
        assert_eq!(signature(&a, 10, 4, 7), signature(&a, 10, 4, 7));
        assert_eq!(signature(&a, 10, 4, 7).minima().len(), 40);
        assert_ne!(signature(&a, 10, 4, 7), signature(&a, 10, 4, 8));
        let empty = signature(&BTreeSet::new(), 10, 4, 7);
        assert!(empty.is_sentinel());
        assert!(empty.band_keys(4).is_empty());
    }

    #[test]
    fn empty_records_are_never_blocked() {
        let schema = Schema::new(["a"]).unwrap();
        let records =
            RecordSet::new(schema.clone(), vec![rec(1, &[None]), rec(2, &[None])]).unwrap();
        let index = build_index(&records, &profile(&schema), LshParams::default());
        assert!(index.is_empty());
        assert!(candidate_pairs(&index).is_empty());
    }

    #[test]
    fn duplicate_records_share_every_block() {
        let schema = Schema::new(["a", "b"]).unwrap();
        let records = RecordSet::new(
            schema.clone(),
            vec![
                rec(1, &[Some("mcleod"), Some("mary")]),
                rec(2, &[Some("mcleod"), Some("mary")]),
                rec(3, &[Some("zzzz"), Some("qqqq")]),
            ],
        )
        .unwrap();
        let params = LshParams {
            bands: 20,
            band_size: 3,
            seed: 5,
        };
        let index = build_index(&records, &profile(&schema), params);
        assert_eq!(index.bands().len(), 20);
        for band in index.bands() {
            assert!(band.values().any(|ids| ids == &vec![1, 2]));
        }
        assert_eq!(candidate_pairs(&index), vec![(1, 2)]);
    }

    #[test]
    fn empty_record_set_gives_empty_index() {
        let schema = Schema::new(["a"]).unwrap();
        let records = RecordSet::new(schema.clone(), vec![]).unwrap();
        let index = build_index(&records, &profile(&schema), LshParams::default());
        assert!(index.is_empty());
    }

    fn index_of(blocks: Vec<Vec<RecordId>>) -> MinHashIndex {
        let bands = blocks
            .into_iter()
            .enumerate()
            .map(|(i, ids)| BTreeMap::from([(i as u64, ids)]))
            .collect::<Vec<_>>();
        MinHashIndex {
            params: LshParams {
                bands: bands.len(),
                band_size: 1,
                seed: 0,
            },
            bands,
        }
    }

    #[test]
    fn candidate_pair_examples() {
        assert_eq!(
            candidate_pairs(&index_of(vec![vec![1, 2, 3]])),
            vec![(1, 2), (1, 3), (2, 3)]
        );
        assert_eq!(
            candidate_pairs(&index_of(vec![vec![1, 2], vec![2, 1]])),
            vec![(1, 2)]
        );
    }
}
