//! Splitting a 24-hour categorical series into at most three timed
//! sub-periods.

use serde::{Deserialize, Serialize};

use crate::bulletin::Timing;
use crate::categorical::CategoricalScale;
use crate::grid::AreaSeries;

use super::GenerateError;

/// Shortest sub-period kept on its own, in hours.
pub const MIN_SUBPERIOD_HOURS: usize = 3;
/// Most sub-periods per attribute.
pub const MAX_SUBPERIODS: usize = 3;
/// Latest hour at which a first change still earns "at first".
pub const AT_FIRST_CUTOFF_HOUR: usize = 12;

/// Which end of a range survives when it has to be narrowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emphasis {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRule {
    /// Widest category range a single clause may carry.
    pub max_span: usize,
    pub emphasis: Emphasis,
}

impl SummaryRule {
    pub const WIND: SummaryRule = SummaryRule {
        max_span: crate::bulletin::MAX_FORCE_SPAN as usize,
        emphasis: Emphasis::High,
    };
    pub const SEA_STATE: SummaryRule = SummaryRule {
        max_span: crate::bulletin::MAX_STATE_SPAN,
        emphasis: Emphasis::High,
    };
    pub const WEATHER: SummaryRule = SummaryRule {
        max_span: 0,
        emphasis: Emphasis::High,
    };
    pub const VISIBILITY: SummaryRule = SummaryRule {
        max_span: crate::bulletin::MAX_STATE_SPAN,
        emphasis: Emphasis::Low,
    };
}

/// Hours `[start_hour, end_hour)` with category indices `low..=high`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubPeriod {
    pub start_hour: usize,
    pub end_hour: usize,
    pub low: usize,
    pub high: usize,
}

impl SubPeriod {
    pub fn hours(&self) -> usize {
        self.end_hour - self.start_hour
    }

    fn same_category(&self, other: &SubPeriod) -> bool {
        self.low == other.low && self.high == other.high
    }

    fn union(&self, other: &SubPeriod) -> SubPeriod {
        SubPeriod {
            start_hour: self.start_hour.min(other.start_hour),
            end_hour: self.end_hour.max(other.end_hour),
            low: self.low.min(other.low),
            high: self.high.max(other.high),
        }
    }

    fn union_span(&self, other: &SubPeriod) -> usize {
        self.high.max(other.high) - self.low.min(other.low)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedPeriod {
    pub period: SubPeriod,
    pub timing: Option<Timing>,
}

fn merge_identical(periods: &mut Vec<SubPeriod>) {
    let mut out: Vec<SubPeriod> = Vec::with_capacity(periods.len());
    for p in periods.drain(..) {
        match out.last_mut() {
            Some(last) if last.same_category(&p) => last.end_hour = p.end_hour,
            _ => out.push(p),
        }
    }
    *periods = out;
}

/// Runs of hourly category indices, reduced to at most three sub-periods.
pub fn segment_categories(categories: &[usize], rule: SummaryRule) -> Vec<SubPeriod> {
    let mut periods: Vec<SubPeriod> = categories
        .iter()
        .enumerate()
        .map(|(h, &c)| SubPeriod {
            start_hour: h,
            end_hour: h + 1,
            low: c,
            high: c,
        })
        .collect();
    merge_identical(&mut periods);

    // Absorb short sub-periods, shortest first, into the longer neighbour.
    while periods.len() > 1 {
        let Some((i, _)) = periods
            .iter()
            .enumerate()
            .filter(|(_, p)| p.hours() < MIN_SUBPERIOD_HOURS)
            .min_by_key(|(i, p)| (p.hours(), *i))
        else {
            break;
        };
        let target = match (i.checked_sub(1), (i + 1 < periods.len()).then_some(i + 1)) {
            (Some(l), Some(r)) if periods[r].hours() > periods[l].hours() => r,
            (Some(l), _) => l,
            (None, Some(r)) => r,
            (None, None) => unreachable!("more than one period"),
        };
        let (lo, hi) = (i.min(target), i.max(target));
        periods[lo] = periods[lo].union(&periods[hi]);
        periods.remove(hi);
        merge_identical(&mut periods);
    }

    // Cap: merge the adjacent pair closest in scale order.
    while periods.len() > MAX_SUBPERIODS {
        let i = (0..periods.len() - 1)
            .min_by_key(|&i| (periods[i].union_span(&periods[i + 1]), i))
            .expect("at least two periods");
        periods[i] = periods[i].union(&periods[i + 1]);
        periods.remove(i + 1);
        merge_identical(&mut periods);
    }

    for p in periods.iter_mut() {
        if p.high - p.low > rule.max_span {
            match rule.emphasis {
                Emphasis::High => p.low = p.high - rule.max_span,
                Emphasis::Low => p.high = p.low + rule.max_span,
            }
        }
    }
    merge_identical(&mut periods);
    periods
}

/// Timing phrase for each sub-period.
pub fn assign_timing(periods: &[SubPeriod]) -> Vec<Option<Timing>> {
    let n = periods.len();
    if n <= 1 {
        return vec![None; n];
    }
    let first_change = periods[1].start_hour;
    (0..n)
        .map(|i| match i {
            0 if first_change <= AT_FIRST_CUTOFF_HOUR => Some(Timing::AtFirst),
            0 => None,
            i if i + 1 == n => Some(Timing::Later),
            _ => Some(Timing::Becoming),
        })
        .collect()
}

/// Classifies each hour on `scale` and returns timed sub-periods of bin
/// indices.
pub fn summarize_attribute(
    series: &AreaSeries,
    scale: &CategoricalScale,
    rule: SummaryRule,
) -> Result<Vec<TimedPeriod>, GenerateError> {
    let categories = series
        .values
        .iter()
        .map(|&v| scale.classify(v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize_categories(&categories, rule))
}

pub fn summarize_categories(categories: &[usize], rule: SummaryRule) -> Vec<TimedPeriod> {
    let periods = segment_categories(categories, rule);
    let timings = assign_timing(&periods);
    periods
        .into_iter()
        .zip(timings)
        .map(|(period, timing)| TimedPeriod { period, timing })
        .collect()
}
