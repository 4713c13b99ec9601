//! Temporal plausibility of two births by the same mother.
//!
//! The model is a piecewise-linear function from the gap between two
//! registration dates (whole days) to a plausibility in `[0, 1]`, and zero
//! past the last breakpoint. The default shape: multiple births within a
//! couple of days are plausible, then a dead zone until roughly nine months,
//! a plateau up to 35 years and a linear ramp down to zero at 40 years.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::RecordId;

pub const DEFAULT_P_MIN: f64 = 0.5;

const DEFAULT_BREAKPOINTS: [(u32, f64); 7] = [
    (0, 1.0),
    (2, 1.0),
    (14, 0.0),
    (200, 0.0),
    (280, 1.0),
    (12_775, 1.0),
    (14_600, 0.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u32, f64)>", into = "Vec<(u32, f64)>")]
pub struct TemporalConstraintModel {
    breakpoints: Vec<(u32, f64)>,
}

impl TemporalConstraintModel {
    /// Breakpoints are `(day offset, plausibility)`; offsets strictly
    /// increasing from 0, plausibilities within `[0, 1]`.
    pub fn new(breakpoints: Vec<(u32, f64)>) -> Result<Self> {
        let Some(&(first, _)) = breakpoints.first() else {
            return Err(Error::InvalidTemporalModel("no breakpoints".into()));
        };
        if first != 0 {
            return Err(Error::InvalidTemporalModel(format!(
                "first breakpoint must be at day 0, found {first}"
            )));
        }
        for w in breakpoints.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidTemporalModel(format!(
                    "day offsets must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(day, p)) = breakpoints.iter().find(|(_, p)| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidTemporalModel(format!(
                "plausibility {p} at day {day} is outside [0, 1]"
            )));
        }
        Ok(Self { breakpoints })
    }

    /// Plausibility 1.0 for every gap that fits in a `u32` day count.
    pub fn constant_one() -> Self {
        Self {
            breakpoints: vec![(0, 1.0), (u32::MAX, 1.0)],
        }
    }

    pub fn breakpoints(&self) -> &[(u32, f64)] {
        &self.breakpoints
    }

    pub fn plausibility(&self, days: u64) -> f64 {
        let bps = &self.breakpoints;
        let last = bps[bps.len() - 1];
        if days > u64::from(last.0) {
            return 0.0;
        }
        // first breakpoint whose offset is >= days
        let i = bps.partition_point(|&(d, _)| u64::from(d) < days);
        let (d1, p1) = bps[i];
        if u64::from(d1) == days || i == 0 {
            return p1;
        }
        let (d0, p0) = bps[i - 1];
        let frac = (days - u64::from(d0)) as f64 / f64::from(d1 - d0);
        p0 + (p1 - p0) * frac
    }
}

impl Default for TemporalConstraintModel {
    fn default() -> Self {
        Self {
            breakpoints: DEFAULT_BREAKPOINTS.to_vec(),
        }
    }
}

impl TryFrom<Vec<(u32, f64)>> for TemporalConstraintModel {
    type Error = Error;

    fn try_from(breakpoints: Vec<(u32, f64)>) -> Result<Self> {
        Self::new(breakpoints)
    }
}

impl From<TemporalConstraintModel> for Vec<(u32, f64)> {
    fn from(model: TemporalConstraintModel) -> Self {
        model.breakpoints
    }
}

pub fn days_between(a: NaiveDate, b: NaiveDate) -> u64 {
    (a - b).num_days().unsigned_abs()
}

pub fn plausibility(model: &TemporalConstraintModel, days: u64) -> f64 {
    model.plausibility(days)
}

pub fn pair_plausible(
    model: &TemporalConstraintModel,
    t_i: NaiveDate,
    t_j: NaiveDate,
    p_min: f64,
) -> bool {
    model.plausibility(days_between(t_i, t_j)) >= p_min
}

/// True iff `candidate` is pair-plausible with every member of `cluster`.
/// Always true without a model.
pub fn cluster_plausible(
    model: Option<&TemporalConstraintModel>,
    candidate: (RecordId, NaiveDate),
    cluster: &[(RecordId, NaiveDate)],
    p_min: f64,
) -> bool {
    match model {
        None => true,
        Some(m) => cluster
            .iter()
            .all(|&(_, t)| pair_plausible(m, candidate.1, t, p_min)),
    }
}

/// The temporal admission check shared by the clusterers: an optional model
/// plus the minimum plausibility.
#[derive(Debug, Clone, Copy)]
pub struct TemporalGate<'a> {
    pub model: Option<&'a TemporalConstraintModel>,
    pub p_min: f64,
}

impl<'a> TemporalGate<'a> {
    pub fn new(model: Option<&'a TemporalConstraintModel>, p_min: f64) -> Self {
        Self { model, p_min }
    }

    pub fn disabled() -> Self {
        Self {
            model: None,
            p_min: DEFAULT_P_MIN,
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.model.is_some()
    }

    pub fn pair(&self, a: NaiveDate, b: NaiveDate) -> bool {
        match self.model {
            None => true,
            Some(m) => pair_plausible(m, a, b, self.p_min),
        }
    }

    pub fn admits<I>(&self, candidate: NaiveDate, members: I) -> bool
    where
        I: IntoIterator<Item = NaiveDate>,
    {
        match self.model {
            None => true,
            Some(m) => members
                .into_iter()
                .all(|t| pair_plausible(m, candidate, t, self.p_min)),
        }
    }
}
