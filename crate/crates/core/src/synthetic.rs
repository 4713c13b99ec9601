//! Seeded synthetic birth registers with known mothers.
//!
//! Names, places and occupations are drawn from Zipf-skewed vocabularies, so a
//! handful of values dominate the way they do in historical parish data. Each
//! mother gets one or more births spaced within the biologically plausible
//! region of the default temporal model (occasional twins, otherwise 280 days
//! to five years apart). Values are then dropped or corrupted at configurable
//! rates. Lookalike mothers copy another mother's parent names but give birth
//! more than 40 years after her last child, so only temporal reasoning can
//! tell them apart.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{Days, NaiveDate};
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{GroundTruth, Record, RecordSet, Schema, STANDARD_ATTRIBUTES};
use crate::temporal::{days_between, TemporalConstraintModel};

pub const SIBLING_GAP_MIN_DAYS: u64 = 280;
pub const SIBLING_GAP_MAX_DAYS: u64 = 5 * 365;
pub const TWIN_GAP_MAX_DAYS: u64 = 2;
/// Latest date offset (days) inside the default model's plausible plateau.
const PLATEAU_END_DAYS: u64 = 12_775;
/// Gap at which the default model's nine-month ramp reaches 0.5.
const RAMP_HALF_DAYS: u64 = 240;
/// Lookalikes start at least this many days after the original's last birth.
const LOOKALIKE_GAP_DAYS: u64 = 14_601;

const MALE_FIRST: [&str; 10] = [
    "John",
    "Donald",
    "Alexander",
    "Malcolm",
    "Neil",
    "Angus",
    "William",
    "Murdo",
    "Norman",
    "Ewen",
];
const FEMALE_FIRST: [&str; 10] = [
    "Mary",
    "Catherine",
    "Ann",
    "Margaret",
    "Christina",
    "Marion",
    "Flora",
    "Janet",
    "Effie",
    "Isabella",
];
const LAST: [&str; 11] = [
    "Mcleod",
    "Mcdonald",
    "Mckinnon",
    "Nicolson",
    "Mclean",
    "Campbell",
    "Mcinnes",
    "Mckenzie",
    "Mcpherson",
    "Matheson",
    "Robertson",
];
const PLACES: [&str; 10] = [
    "Breakish",
    "Aird",
    "Roag",
    "Edinbain",
    "Bernisdale",
    "Clachan",
    "Torrin",
    "Portree",
    "Digg",
    "Carbost",
];
const PARISHES: [&str; 7] = [
    "Bracadale",
    "Duirinish",
    "Kilmuir",
    "Portree",
    "Sleat",
    "Snizort",
    "Strath",
];
const MALE_OCCUPATIONS: [&str; 16] = [
    "crofter",
    "fisherman",
    "labourer",
    "shepherd",
    "tailor",
    "weaver",
    "merchant",
    "carpenter",
    "blacksmith",
    "cottar",
    "boatman",
    "shoemaker",
    "mason",
    "farmer",
    "teacher",
    "innkeeper",
];
const FEMALE_OCCUPATIONS: [&str; 6] = [
    "domestic servant",
    "housekeeper",
    "dairymaid",
    "knitter",
    "seamstress",
    "weaver",
];

const ONSETS: [&str; 20] = [
    "b", "c", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "w", "ch", "sh", "br",
    "dr", "gr",
];
const VOWELS: [&str; 8] = ["a", "e", "i", "o", "u", "ai", "ea", "ou"];
const CODAS: [&str; 9] = ["", "n", "r", "l", "s", "ck", "m", "d", "nd"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    /// Mothers, including lookalikes.
    pub num_entities: usize,
    pub seed: u64,
    pub births_min: u32,
    pub births_max: u32,
    /// Chance of one more birth after each birth, up to `births_max`.
    pub birth_continue_prob: f64,
    pub first_name_vocab: usize,
    pub first_name_skew: f64,
    pub last_name_vocab: usize,
    pub last_name_skew: f64,
    pub place_vocab: usize,
    pub place_skew: f64,
    pub occupation_skew: f64,
    /// Attribute → probability the value is missing on a record.
    pub missing_rates: BTreeMap<String, f64>,
    /// Per present value, chance of one character edit.
    pub typo_rate: f64,
    /// Registration happens up to this many days after the birth.
    pub date_noise_days: u32,
    pub twin_rate: f64,
    /// Fraction of mothers that are lookalikes of another mother.
    pub lookalike_rate: f64,
    /// Fraction of mothers without father or marriage details.
    pub unmarried_rate: f64,
    /// Chance the family address changes between consecutive births.
    pub address_change_rate: f64,
    pub start_year: i32,
    /// First births are spread over this many years from `start_year`.
    pub first_birth_window_years: u32,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        let missing_rates = [
            ("father_first", 0.02),
            ("father_last", 0.02),
            ("mother_first", 0.01),
            ("mother_last", 0.01),
            ("mother_maiden", 0.05),
            ("marriage_day", 0.10),
            ("marriage_month", 0.10),
            ("marriage_year", 0.08),
            ("marriage_place1", 0.12),
            ("marriage_place2", 0.20),
            ("occupation_father", 0.20),
            ("occupation_mother", 0.70),
            ("address1", 0.25),
            ("address2", 0.40),
            ("parish", 0.0),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self {
            num_entities: 1000,
            seed: 1,
            births_min: 1,
            births_max: 7,
            birth_continue_prob: 0.65,
            first_name_vocab: 400,
            first_name_skew: 1.0,
            last_name_vocab: 547,
            last_name_skew: 1.0,
            place_vocab: 150,
            place_skew: 1.0,
            occupation_skew: 1.2,
            missing_rates,
            typo_rate: 0.03,
            date_noise_days: 14,
            twin_rate: 0.03,
            lookalike_rate: 0.1,
            unmarried_rate: 0.03,
            address_change_rate: 0.2,
            start_year: 1841,
            first_birth_window_years: 30,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSynthetic(m));
        if self.num_entities == 0 {
            return bad("num_entities must be positive".into());
        }
        let rates = [
            ("birth_continue_prob", self.birth_continue_prob),
            ("typo_rate", self.typo_rate),
            ("twin_rate", self.twin_rate),
            ("lookalike_rate", self.lookalike_rate),
            ("unmarried_rate", self.unmarried_rate),
            ("address_change_rate", self.address_change_rate),
        ];
        for (name, r) in rates
            .into_iter()
            .chain(self.missing_rates.iter().map(|(k, &v)| (k.as_str(), v)))
        {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{name} = {r} is outside [0, 1]"));
            }
        }
        if let Some(k) = self
            .missing_rates
            .keys()
            .find(|k| !STANDARD_ATTRIBUTES.contains(&k.as_str()))
        {
            return bad(format!("missing_rates names unknown attribute {k:?}"));
        }
        if self.births_min == 0 || self.births_min > self.births_max {
            return bad(format!(
                "births range [{}, {}] is invalid",
                self.births_min, self.births_max
            ));
        }
        let span =
            u64::from(self.births_max - 1) * SIBLING_GAP_MAX_DAYS + u64::from(self.date_noise_days);
        if span > PLATEAU_END_DAYS {
            return bad(format!(
                "births_max = {} spans up to {span} days, beyond the 35-year plateau",
                self.births_max
            ));
        }
        if u64::from(self.date_noise_days) > SIBLING_GAP_MIN_DAYS - RAMP_HALF_DAYS {
            return bad(format!(
                "date_noise_days = {} could pull siblings below plausibility 0.5",
                self.date_noise_days
            ));
        }
        for (name, size) in [
            ("first_name_vocab", self.first_name_vocab),
            ("last_name_vocab", self.last_name_vocab),
            ("place_vocab", self.place_vocab),
        ] {
            if size == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        for (name, s) in [
            ("first_name_skew", self.first_name_skew),
            ("last_name_skew", self.last_name_skew),
            ("place_skew", self.place_skew),
            ("occupation_skew", self.occupation_skew),
        ] {
            if !(s.is_finite() && s >= 0.0) {
                return bad(format!("{name} = {s} must be a non-negative number"));
            }
        }
        Ok(())
    }
}

/// A Zipf-weighted vocabulary.
struct Vocabulary {
    words: Vec<String>,
    dist: WeightedIndex<f64>,
}

impl Vocabulary {
    fn new(words: Vec<String>, skew: f64) -> Self {
        let weights: Vec<f64> = (1..=words.len()).map(|k| (k as f64).powf(-skew)).collect();
        let dist = WeightedIndex::new(weights).expect("non-empty vocabulary");
        Self { words, dist }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> String {
        self.words[self.dist.sample(rng)].clone()
    }
}

fn capitalise(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn invented_word(rng: &mut ChaCha8Rng, syllables: usize) -> String {
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS[rng.gen_range(0..ONSETS.len())]);
        w.push_str(VOWELS[rng.gen_range(0..VOWELS.len())]);
    }
    w.push_str(CODAS[rng.gen_range(0..CODAS.len())]);
    w
}

/// `head` followed by invented words until the vocabulary has `size` entries.
fn vocabulary(
    rng: &mut ChaCha8Rng,
    head: &[&str],
    size: usize,
    prefix: &[&str],
    skew: f64,
) -> Vocabulary {
    let mut seen: HashSet<String> = HashSet::new();
    let mut words: Vec<String> = Vec::with_capacity(size);
    for w in head.iter().take(size) {
        seen.insert(w.to_lowercase());
        words.push(w.to_string());
    }
    while words.len() < size {
        let p = prefix[rng.gen_range(0..prefix.len())];
        let syllables = rng.gen_range(1..=3);
        let word = capitalise(&format!("{p}{}", invented_word(rng, syllables)));
        if seen.insert(word.to_lowercase()) {
            words.push(word);
        }
    }
    Vocabulary::new(words, skew)
}

fn typo(value: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = value.chars().collect();
    if chars.is_empty() {
        return String::new();
    }
    let random_like = |c: char, rng: &mut ChaCha8Rng| -> char {
        if c.is_ascii_digit() {
            char::from(b'0' + rng.gen_range(0..10u8))
        } else {
            char::from(b'a' + rng.gen_range(0..26u8))
        }
    };
    let pos = rng.gen_range(0..chars.len());
    match rng.gen_range(0..4) {
        0 => chars[pos] = random_like(chars[pos], rng),
        1 if chars.len() > 1 => {
            chars.remove(pos);
        }
        2 => {
            let c = random_like(chars[pos], rng);
            chars.insert(pos, c);
        }
        _ if chars.len() > 1 => {
            let p = pos.min(chars.len() - 2);
            chars.swap(p, p + 1);
        }
        _ => chars[pos] = random_like(chars[pos], rng),
    }
    chars.into_iter().collect()
}

/// Attribute values shared by all births of one mother, in schema order.
#[derive(Clone)]
struct Family {
    values: [Option<String>; 15],
}

const NAME_FIELDS: std::ops::Range<usize> = 0..5;
const ADDRESS1: usize = 12;
const ADDRESS2: usize = 13;
const OCCUPATION_FATHER: usize = 10;

struct Vocabularies {
    male: Vocabulary,
    female: Vocabulary,
    last: Vocabulary,
    places: Vocabulary,
    parishes: Vocabulary,
    male_occ: Vocabulary,
    female_occ: Vocabulary,
}

fn draw_family(
    rng: &mut ChaCha8Rng,
    v: &Vocabularies,
    config: &SyntheticConfig,
    first_birth: NaiveDate,
) -> Family {
    use chrono::Datelike;
    let married = !rng.gen_bool(config.unmarried_rate);
    let maiden = v.last.draw(rng);
    let (father_first, father_last) = if married {
        (Some(v.male.draw(rng)), Some(v.last.draw(rng)))
    } else {
        (None, None)
    };
    let mother_last = father_last.clone().unwrap_or_else(|| maiden.clone());
    let marriage = |rng: &mut ChaCha8Rng| {
        married.then(|| {
            let year = first_birth.year() - rng.gen_range(0..=3);
            [
                rng.gen_range(1..=28).to_string(),
                rng.gen_range(1..=12).to_string(),
                year.to_string(),
                v.places.draw(rng),
                v.parishes.draw(rng),
            ]
        })
    };
    let m = marriage(rng);
    let m = |i: usize| m.as_ref().map(|m| m[i].clone());
    Family {
        values: [
            father_first,
            father_last,
            Some(v.female.draw(rng)),
            Some(mother_last),
            Some(maiden),
            m(0),
            m(1),
            m(2),
            m(3),
            m(4),
            married.then(|| v.male_occ.draw(rng)),
            Some(v.female_occ.draw(rng)),
            Some(v.places.draw(rng)),
            Some(v.parishes.draw(rng)),
            Some(v.parishes.draw(rng)),
        ],
    }
}

fn add_days(d: NaiveDate, days: u64) -> NaiveDate {
    d.checked_add_days(Days::new(days)).expect("date in range")
}

/// Birth registration dates of one mother, ascending.
fn draw_dates(
    rng: &mut ChaCha8Rng,
    config: &SyntheticConfig,
    first_birth: NaiveDate,
) -> Vec<NaiveDate> {
    let mut n = config.births_min;
    while n < config.births_max && rng.gen_bool(config.birth_continue_prob) {
        n += 1;
    }
    let mut births = vec![first_birth];
    let mut delays = vec![rng.gen_range(0..=u64::from(config.date_noise_days))];
    while births.len() < n as usize {
        let last = *births.last().unwrap();
        if rng.gen_bool(config.twin_rate) {
            births.push(add_days(last, rng.gen_range(0..=TWIN_GAP_MAX_DAYS)));
            delays.push(*delays.last().unwrap());
        } else {
            births.push(add_days(
                last,
                rng.gen_range(SIBLING_GAP_MIN_DAYS..=SIBLING_GAP_MAX_DAYS),
            ));
            delays.push(rng.gen_range(0..=u64::from(config.date_noise_days)));
        }
    }
    let mut dates: Vec<NaiveDate> = births
        .into_iter()
        .zip(delays)
        .map(|(b, d)| add_days(b, d))
        .collect();
    dates.sort_unstable();
    dates
}

struct Draft {
    date: NaiveDate,
    entity: usize,
    values: Vec<Option<String>>,
}

/// Generates a record set over the standard schema together with its
/// ground truth. Same config, same output.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<(RecordSet, GroundTruth)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let vocab = Vocabularies {
        male: vocabulary(
            &mut rng,
            &MALE_FIRST,
            config.first_name_vocab,
            &[""],
            config.first_name_skew,
        ),
        female: vocabulary(
            &mut rng,
            &FEMALE_FIRST,
            config.first_name_vocab,
            &[""],
            config.first_name_skew,
        ),
        last: vocabulary(
            &mut rng,
            &LAST,
            config.last_name_vocab,
            &["", "Mc"],
            config.last_name_skew,
        ),
        places: vocabulary(
            &mut rng,
            &PLACES,
            config.place_vocab,
            &[""],
            config.place_skew,
        ),
        parishes: vocabulary(&mut rng, &PARISHES, PARISHES.len(), &[""], 0.5),
        male_occ: vocabulary(
            &mut rng,
            &MALE_OCCUPATIONS,
            MALE_OCCUPATIONS.len(),
            &[""],
            config.occupation_skew,
        ),
        female_occ: vocabulary(
            &mut rng,
            &FEMALE_OCCUPATIONS,
            FEMALE_OCCUPATIONS.len(),
            &[""],
            config.occupation_skew,
        ),
    };

    let lookalikes = ((config.num_entities as f64 * config.lookalike_rate).round() as usize)
        .min(config.num_entities / 2);
    let base = config.num_entities - lookalikes;
    let start = NaiveDate::from_ymd_opt(config.start_year, 1, 1).ok_or_else(|| {
        Error::InvalidSynthetic(format!("start_year {} out of range", config.start_year))
    })?;
    let window = u64::from(config.first_birth_window_years) * 365;

    let mut families = Vec::with_capacity(config.num_entities);
    let mut schedules: Vec<Vec<NaiveDate>> = Vec::with_capacity(config.num_entities);
    for _ in 0..base {
        let first = add_days(start, rng.gen_range(0..=window));
        families.push(draw_family(&mut rng, &vocab, config, first));
        schedules.push(draw_dates(&mut rng, config, first));
    }
    let originals: Vec<usize> = if lookalikes > 0 {
        let mut picked = sample(&mut rng, base, lookalikes).into_vec();
        picked.sort_unstable();
        picked
    } else {
        Vec::new()
    };
    for &orig in &originals {
        let last = *schedules[orig].last().unwrap();
        let first = add_days(last, LOOKALIKE_GAP_DAYS + rng.gen_range(0..=730));
        let mut family = draw_family(&mut rng, &vocab, config, first);
        for i in NAME_FIELDS {
            family.values[i] = families[orig].values[i].clone();
        }
        if rng.gen_bool(0.5) {
            let i = rng.gen_range(NAME_FIELDS);
            family.values[i] = family.values[i].as_deref().map(|v| typo(v, &mut rng));
        }
        families.push(family);
        schedules.push(draw_dates(&mut rng, config, first));
    }

    let missing: Vec<f64> = STANDARD_ATTRIBUTES
        .iter()
        .map(|a| config.missing_rates.get(*a).copied().unwrap_or(0.0))
        .collect();
    let mut drafts = Vec::new();
    for (entity, (family, dates)) in families.iter().zip(&schedules).enumerate() {
        let mut current = family.clone();
        for (k, &date) in dates.iter().enumerate() {
            if k > 0 && rng.gen_bool(config.address_change_rate) {
                current.values[ADDRESS1] = Some(vocab.places.draw(&mut rng));
                current.values[ADDRESS2] = Some(vocab.parishes.draw(&mut rng));
                if current.values[OCCUPATION_FATHER].is_some() && rng.gen_bool(0.5) {
                    current.values[OCCUPATION_FATHER] = Some(vocab.male_occ.draw(&mut rng));
                }
            }
            let values = current
                .values
                .iter()
                .zip(&missing)
                .map(|(v, &p_missing)| {
                    let v = v.as_ref()?;
                    if rng.gen_bool(p_missing) {
                        return None;
                    }
                    if rng.gen_bool(config.typo_rate) {
                        Some(typo(v, &mut rng))
                    } else {
                        Some(v.clone())
                    }
                })
                .collect();
            drafts.push(Draft {
                date,
                entity,
                values,
            });
        }
    }

    drafts.sort_by_key(|d| (d.date, d.entity));
    let mut records = Vec::with_capacity(drafts.len());
    let mut assignment = BTreeMap::new();
    for (i, d) in drafts.into_iter().enumerate() {
        let id = i as u64 + 1;
        assignment.insert(id, format!("E{:05}", d.entity + 1));
        records.push(Record::new(id, d.date, d.values));
    }
    let set = RecordSet::new(Schema::standard(), records)?;
    let gt = GroundTruth::new(assignment, &set)?;
    Ok((set, gt))
}

/// Entities whose records include a pair below `p_min` under `model`.
pub fn implausible_entities<'a>(
    records: &RecordSet,
    gt: &'a GroundTruth,
    model: &TemporalConstraintModel,
    p_min: f64,
) -> BTreeSet<&'a str> {
    let mut out = BTreeSet::new();
    for (entity, members) in gt.partition() {
        let dates: Vec<NaiveDate> = members
            .iter()
            .filter_map(|&id| records.get(id).map(|r| r.date))
            .collect();
        let bad = dates.iter().enumerate().any(|(i, &a)| {
            dates[i + 1..]
                .iter()
                .any(|&b| model.plausibility(days_between(a, b)) < p_min)
        });
        if bad {
            out.insert(entity);
        }
    }
    out
}
