//! Observation types for current status, case 2 and mixed case interval censoring.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// One current status observation: examined at `t`, `delta = 1` if the event had occurred by then.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatusRecord {
    pub t: f64,
    pub delta: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurrentStatusSample {
    records: Vec<StatusRecord>,
}

impl CurrentStatusSample {
    pub fn new(records: Vec<StatusRecord>) -> Result<Self> {
        if let Some(i) = records
            .iter()
            .position(|r| !(r.t.is_finite() && r.t >= 0.0))
        {
            return Err(Error::input(format!(
                "observation time {} of record {i} must be finite and nonnegative",
                records[i].t
            )));
        }
        Ok(CurrentStatusSample { records })
    }

    pub fn from_pairs(times: &[f64], deltas: &[bool]) -> Result<Self> {
        if times.len() != deltas.len() {
            return Err(Error::input("times and indicators differ in length"));
        }
        Self::new(
            times
                .iter()
                .zip(deltas)
                .map(|(&t, &delta)| StatusRecord { t, delta })
                .collect(),
        )
    }

    pub fn records(&self) -> &[StatusRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.t)
    }

    /// Sorts records by `(t, delta)`.
    pub fn canonicalize(&mut self) {
        self.records
            .sort_by(|a, b| a.t.total_cmp(&b.t).then(a.delta.cmp(&b.delta)));
    }

    /// Same data as panel subjects with one examination time each.
    pub fn to_subjects(&self) -> Result<Vec<MixedCaseSubject>> {
        self.records
            .iter()
            .map(|r| MixedCaseSubject::new(vec![r.t], if r.delta { 1 } else { 2 }))
            .collect()
    }
}

/// A subject examined at `T_1 < ... < T_K`; `category = k` means the event
/// fell in `(T_{k-1}, T_k]` (with `T_0 = 0`), and `K + 1` means after `T_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedCaseSubject {
    times: Vec<f64>,
    category: usize,
}

impl MixedCaseSubject {
    pub fn new(times: Vec<f64>, category: usize) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::input("subject needs at least one examination time"));
        }
        if !times.iter().all(|t| t.is_finite() && *t > 0.0) {
            return Err(Error::input(format!(
                "examination times must be finite and positive: {times:?}"
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input(format!(
                "examination times must be strictly increasing: {times:?}"
            )));
        }
        if category == 0 || category > times.len() + 1 {
            return Err(Error::input(format!(
                "category {category} outside 1..={}",
                times.len() + 1
            )));
        }
        Ok(MixedCaseSubject { times, category })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn category(&self) -> usize {
        self.category
    }

    /// Number of examinations `K`.
    pub fn k(&self) -> usize {
        self.times.len()
    }

    pub(crate) fn with_category(&self, category: usize) -> Self {
        debug_assert!(category >= 1 && category <= self.times.len() + 1);
        MixedCaseSubject {
            times: self.times.clone(),
            category,
        }
    }

    /// Lower and upper end of the observed cell; `None` stands for 0 and +∞.
    pub(crate) fn cell(&self) -> (Option<f64>, Option<f64>) {
        let k = self.category;
        let lower = (k > 1).then(|| self.times[k - 2]);
        let upper = self.times.get(k - 1).copied();
        (lower, upper)
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.times.iter().zip(&other.times) {
            match a.total_cmp(b) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.times
            .len()
            .cmp(&other.times.len())
            .then(self.category.cmp(&other.category))
    }
}

/// Sorts subjects by `(times, category)` so that results do not depend on input order.
pub fn canonicalize_subjects(subjects: &mut [MixedCaseSubject]) {
    subjects.sort_by(|a, b| a.canonical_cmp(b));
}

/// Half-open interval `(l, r]` known to contain the event time; `r` may be +∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensoringInterval {
    l: f64,
    r: f64,
}

impl CensoringInterval {
    pub fn new(l: f64, r: f64) -> Result<Self> {
        if !(l.is_finite() && l >= 0.0) {
            return Err(Error::input(format!(
                "left endpoint {l} must be finite and >= 0"
            )));
        }
        if r.is_nan() || r <= l {
            return Err(Error::input(format!("interval ({l}, {r}] is empty")));
        }
        Ok(CensoringInterval { l, r })
    }

    pub fn left(&self) -> f64 {
        self.l
    }

    pub fn right(&self) -> f64 {
        self.r
    }

    pub fn is_right_censored(&self) -> bool {
        self.r == f64::INFINITY
    }

    pub fn contains(&self, t: f64) -> bool {
        self.l < t && t <= self.r
    }

    /// Examination times implied by the interval: `l` if positive, `r` if finite.
    pub fn to_subject(&self) -> Result<MixedCaseSubject> {
        match (self.l > 0.0, self.r.is_finite()) {
            (true, true) => MixedCaseSubject::new(vec![self.l, self.r], 2),
            (true, false) => MixedCaseSubject::new(vec![self.l], 2),
            (false, true) => MixedCaseSubject::new(vec![self.r], 1),
            (false, false) => Err(Error::input(
                "interval (0, inf) carries no information about the event time",
            )),
        }
    }
}

pub fn reduce_to_interval(subject: &MixedCaseSubject) -> CensoringInterval {
    let (lower, upper) = subject.cell();
    CensoringInterval {
        l: lower.unwrap_or(0.0),
        r: upper.unwrap_or(f64::INFINITY),
    }
}

/// Any dataset the estimators and the bootstrap engine accept.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    CurrentStatus(CurrentStatusSample),
    /// Case 2 or mixed case panel data.
    Panel(Vec<MixedCaseSubject>),
    Intervals(Vec<CensoringInterval>),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::CurrentStatus(s) => s.len(),
            Dataset::Panel(s) => s.len(),
            Dataset::Intervals(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn intervals(&self) -> Result<Vec<CensoringInterval>> {
        Ok(match self {
            Dataset::CurrentStatus(s) => s
                .records()
                .iter()
                .map(|r| {
                    if r.delta {
                        CensoringInterval::new(0.0, r.t)
                    } else {
                        CensoringInterval::new(r.t, f64::INFINITY)
                    }
                })
                .collect::<Result<_>>()?,
            Dataset::Panel(s) => s.iter().map(reduce_to_interval).collect(),
            Dataset::Intervals(s) => s.clone(),
        })
    }

    /// Panel view used for resampling.
    pub fn subjects(&self) -> Result<Vec<MixedCaseSubject>> {
        match self {
            Dataset::CurrentStatus(s) => s.to_subjects(),
            Dataset::Panel(s) => Ok(s.clone()),
            Dataset::Intervals(s) => s.iter().map(CensoringInterval::to_subject).collect(),
        }
    }

    /// Smallest and largest finite examination time.
    pub fn time_span(&self) -> Option<(f64, f64)> {
        let times: Vec<f64> = match self {
            Dataset::CurrentStatus(s) => s.times().collect(),
            Dataset::Panel(s) => s.iter().flat_map(|x| x.times().iter().copied()).collect(),
            Dataset::Intervals(s) => s
                .iter()
                .flat_map(|i| [i.left(), i.right()])
                .filter(|t| t.is_finite())
                .collect(),
        };
        let lo = times.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo <= hi).then_some((lo, hi))
    }
}
