//! Attribute similarity functions and weighted record-pair scoring.
//!
//! Every comparison canonicalises both values first (trim, lower-case). A
//! comparison involving a missing value scores 0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{Record, Schema};

pub const JW_PREFIX_SCALE: f64 = 0.1;
pub const JW_MAX_PREFIX: usize = 4;
/// Jaro score above which the common-prefix boost applies.
pub const JW_BOOST_THRESHOLD: f64 = 0.7;
pub const DEFAULT_YEAR_MAX_DIFFERENCE: u32 = 10;

pub fn canonical(s: &str) -> String {
    s.trim().to_lowercase()
}

pub fn jaro(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    jaro_chars(&a, &b)
}

fn jaro_chars(a: &[char], b: &[char]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    if a == b {
        return 1.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut a_matched = vec![false; a.len()];
    let mut b_matched = vec![false; b.len()];
    let mut matches = 0usize;
    for (i, &ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_matched[j] && b[j] == ca {
                a_matched[i] = true;
                b_matched[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if matches == 0 {
        return 0.0;
    }
    let mut transpositions = 0usize;
    let mut k = 0usize;
    for (i, &ca) in a.iter().enumerate() {
        if !a_matched[i] {
            continue;
        }
        while !b_matched[k] {
            k += 1;
        }
        if ca != b[k] {
            transpositions += 1;
        }
        k += 1;
    }
    let m = matches as f64;
    let t = (transpositions / 2) as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

/// Jaro-Winkler similarity with prefix scale 0.1 and at most 4 prefix
/// characters. An empty operand scores 0.
pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let sim = jaro_chars(&a, &b);
    if sim <= JW_BOOST_THRESHOLD {
        return sim;
    }
    let prefix = a
        .iter()
        .zip(&b)
        .take(JW_MAX_PREFIX)
        .take_while(|(x, y)| x == y)
        .count();
    sim + prefix as f64 * JW_PREFIX_SCALE * (1.0 - sim)
}

/// 1 iff both values are non-empty and equal after canonicalisation.
pub fn exact(a: &str, b: &str) -> f64 {
    let (a, b) = (canonical(a), canonical(b));
    if !a.is_empty() && a == b {
        1.0
    } else {
        0.0
    }
}

/// Linear decay `max(0, 1 - |a - b| / max_years)`; unparseable years score 0.
pub fn year_difference(a: &str, b: &str, max_years: u32) -> f64 {
    let (Ok(a), Ok(b)) = (a.trim().parse::<i64>(), b.trim().parse::<i64>()) else {
        return 0.0;
    };
    if max_years == 0 {
        return if a == b { 1.0 } else { 0.0 };
    }
    (1.0 - (a - b).unsigned_abs() as f64 / f64::from(max_years)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityFunction {
    JaroWinkler,
    Exact,
    YearDifference,
}

impl SimilarityFunction {
    /// Raw similarity of two canonical values.
    fn score(self, a: &str, b: &str, year_max_difference: u32) -> f64 {
        match self {
            SimilarityFunction::JaroWinkler => jaro_winkler(a, b),
            SimilarityFunction::Exact => exact(a, b),
            SimilarityFunction::YearDifference => year_difference(a, b, year_max_difference),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeComparator {
    pub attribute: String,
    pub function: SimilarityFunction,
    pub weight: f64,
}

impl AttributeComparator {
    pub fn new(attribute: impl Into<String>, function: SimilarityFunction, weight: f64) -> Self {
        Self {
            attribute: attribute.into(),
            function,
            weight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    All,
    ParentNames,
    ParentNamesAddresses,
    Custom,
}

impl ProfileKind {
    pub const PRESETS: [ProfileKind; 3] = [
        ProfileKind::All,
        ProfileKind::ParentNames,
        ProfileKind::ParentNamesAddresses,
    ];
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::All => "all",
            ProfileKind::ParentNames => "parent-names",
            ProfileKind::ParentNamesAddresses => "parent-names-addresses",
            ProfileKind::Custom => "custom",
        })
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(ProfileKind::All),
            "parent-names" => Ok(ProfileKind::ParentNames),
            "parent-names-addresses" => Ok(ProfileKind::ParentNamesAddresses),
            "custom" => Ok(ProfileKind::Custom),
            other => Err(Error::Config(format!("unknown profile {other:?}"))),
        }
    }
}

/// How a comparison with a missing value enters the normalised score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Scores 0; the weight stays in the denominator.
    #[default]
    ScoreZero,
    /// The attribute is dropped from the denominator.
    Exclude,
}

use SimilarityFunction::{Exact, JaroWinkler, YearDifference};

/// Attribute, function, weight, and which presets use it.
const TABLE: [(&str, SimilarityFunction, f64, bool, bool); 15] = [
    // (attribute, function, weight, in parent-names, in parent-names-addresses)
    ("father_first", JaroWinkler, 6.578, true, true),
    ("father_last", JaroWinkler, 7.168, true, true),
    ("mother_first", JaroWinkler, 4.483, true, true),
    ("mother_last", JaroWinkler, 7.168, true, true),
    ("mother_maiden", JaroWinkler, 5.985, true, true),
    ("marriage_day", Exact, 4.610, false, false),
    ("marriage_month", Exact, 3.855, false, false),
    ("marriage_year", YearDifference, 5.240, false, false),
    ("marriage_place1", JaroWinkler, 4.435, false, false),
    ("marriage_place2", JaroWinkler, 3.607, false, false),
    ("occupation_father", JaroWinkler, 2.247, false, false),
    ("occupation_mother", JaroWinkler, 1.274, false, false),
    ("address1", JaroWinkler, 4.715, false, true),
    ("address2", JaroWinkler, 3.548, false, true),
    ("parish", JaroWinkler, 4.562, false, true),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonProfile {
    pub kind: ProfileKind,
    pub comparators: Vec<AttributeComparator>,
    /// False means every comparator weight is 1.0.
    pub weighted: bool,
    #[serde(default)]
    pub missing: MissingPolicy,
    #[serde(default = "default_year_max")]
    pub year_max_difference: u32,
}

fn default_year_max() -> u32 {
    DEFAULT_YEAR_MAX_DIFFERENCE
}

impl ComparisonProfile {
    pub fn preset(kind: ProfileKind, weighted: bool) -> Result<Self> {
        let keep = |in_names: bool, in_addr: bool| match kind {
            ProfileKind::All => true,
            ProfileKind::ParentNames => in_names,
            ProfileKind::ParentNamesAddresses => in_addr,
            ProfileKind::Custom => false,
        };
        if kind == ProfileKind::Custom {
            return Err(Error::Config(
                "the custom profile needs an explicit comparator list".into(),
            ));
        }
        let comparators = TABLE
            .iter()
            .filter(|row| keep(row.3, row.4))
            .map(|&(attr, function, weight, ..)| {
                AttributeComparator::new(attr, function, if weighted { weight } else { 1.0 })
            })
            .collect();
        Ok(Self {
            kind,
            comparators,
            weighted,
            missing: MissingPolicy::default(),
            year_max_difference: DEFAULT_YEAR_MAX_DIFFERENCE,
        })
    }

    /// A profile with caller-supplied comparators. With `weighted == false`
    /// the given weights are replaced by 1.0.
    pub fn custom(comparators: Vec<AttributeComparator>, weighted: bool) -> Result<Self> {
        let comparators = comparators
            .into_iter()
            .map(|mut c| {
                if !weighted {
                    c.weight = 1.0;
                }
                c
            })
            .collect();
        let profile = Self {
            kind: ProfileKind::Custom,
            comparators,
            weighted,
            missing: MissingPolicy::default(),
            year_max_difference: DEFAULT_YEAR_MAX_DIFFERENCE,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn with_missing(mut self, missing: MissingPolicy) -> Self {
        self.missing = missing;
        self
    }

    pub fn with_year_max_difference(mut self, years: u32) -> Self {
        self.year_max_difference = years;
        self
    }

    /// e.g. `parent-names/weighted`.
    pub fn label(&self) -> String {
        format!(
            "{}/{}",
            self.kind,
            if self.weighted {
                "weighted"
            } else {
                "unweighted"
            }
        )
    }

    pub fn total_weight(&self) -> f64 {
        self.comparators.iter().map(|c| c.weight).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.comparators {
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(Error::InvalidWeight {
                    attribute: c.attribute.clone(),
                    weight: c.weight,
                });
            }
        }
        if self.total_weight() <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        Ok(())
    }

    /// Resolves attribute names against a schema.
    pub fn compile(&self, schema: &Schema) -> Result<CompiledProfile> {
        self.validate()?;
        let columns = self
            .comparators
            .iter()
            .map(|c| {
                schema
                    .index_of(&c.attribute)
                    .ok_or_else(|| Error::UnknownAttribute(c.attribute.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledProfile {
            profile: self.clone(),
            columns,
        })
    }
}

/// A profile bound to schema column positions.
#[derive(Debug, Clone)]
pub struct CompiledProfile {
    profile: ComparisonProfile,
    columns: Vec<usize>,
}

impl CompiledProfile {
    pub fn profile(&self) -> &ComparisonProfile {
        &self.profile
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// Canonical values of the profile's attributes, in comparator order.
    pub fn canonical_values(&self, record: &Record) -> Vec<Option<String>> {
        self.columns
            .iter()
            .map(|&c| record.value(c).map(canonical).filter(|v| !v.is_empty()))
            .collect()
    }

    /// Weighted similarity vector of two rows of canonical values.
    pub fn compare_canonical(
        &self,
        a: &[Option<String>],
        b: &[Option<String>],
    ) -> SimilarityVector {
        let mut values = Vec::with_capacity(self.columns.len());
        let mut present = Vec::with_capacity(self.columns.len());
        for (k, c) in self.profile.comparators.iter().enumerate() {
            match (&a[k], &b[k]) {
                (Some(x), Some(y)) => {
                    let raw = c.function.score(x, y, self.profile.year_max_difference);
                    values.push(raw * c.weight);
                    present.push(true);
                }
                _ => {
                    values.push(0.0);
                    present.push(false);
                }
            }
        }
        SimilarityVector { values, present }
    }

    pub fn score_canonical(&self, a: &[Option<String>], b: &[Option<String>]) -> Result<f64> {
        normalise(&self.compare_canonical(a, b), &self.profile)
    }

    pub fn score(&self, a: &Record, b: &Record) -> Result<f64> {
        normalise(&compare_records(a, b, self), &self.profile)
    }
}

/// Per-comparator weighted similarities `S_a(r_i, r_j) * w_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityVector {
    pub values: Vec<f64>,
    /// False where either record is missing the attribute.
    pub present: Vec<bool>,
}

pub fn compare_records(a: &Record, b: &Record, profile: &CompiledProfile) -> SimilarityVector {
    profile.compare_canonical(&profile.canonical_values(a), &profile.canonical_values(b))
}

/// Sum of weighted similarities over the sum of weights.
pub fn normalise(v: &SimilarityVector, profile: &ComparisonProfile) -> Result<f64> {
    let total: f64 = profile.total_weight();
    if total <= 0.0 {
        return Err(Error::ZeroTotalWeight);
    }
    let numerator: f64 = v.values.iter().sum();
    let denominator = match profile.missing {
        MissingPolicy::ScoreZero => total,
        MissingPolicy::Exclude => profile
            .comparators
            .iter()
            .zip(&v.present)
            .filter(|(_, &p)| p)
            .map(|(c, _)| c.weight)
            .sum(),
    };
    if denominator <= 0.0 {
        return Ok(0.0);
    }
    Ok((numerator / denominator).clamp(0.0, 1.0))
}
