//! Exact counting of superlevel and sublevel intervals.
//!
//! `{t : f(t) > c}` and `{t : f(t) < c}` use strict inequalities, so points
//! where the signal equals `c` belong to neither set. A smoothed signal that
//! merely touches `c` at one point therefore splits an interval in two; the
//! same literal convention applies to inputs and outputs.

use std::fmt;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::signal::{PiecewiseConstantSignal, SampledSignal};
use crate::smoother::SmoothedOutput;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Above,
    Below,
}

impl Relation {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::Above => value > threshold,
            Relation::Below => value < threshold,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Above => "above",
            Relation::Below => "below",
        })
    }
}

/// Maximal intervals where the signal is strictly above/below `threshold`.
/// Endpoints may be infinite; JSON renders them as `"-inf"`/`"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingReport {
    pub threshold: f64,
    pub relation: Relation,
    pub count: usize,
    #[serde(serialize_with = "serialize_intervals")]
    pub intervals: Vec<(f64, f64)>,
}

fn endpoint_json(x: f64) -> serde_json::Value {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        x.into()
    }
}

fn serialize_intervals<S: Serializer>(v: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (a, b) in v {
        seq.serialize_element(&[endpoint_json(*a), endpoint_json(*b)])?;
    }
    seq.end()
}

/// Incremental interval builder over a left-to-right sweep.
struct Sweep {
    open: Option<f64>,
    intervals: Vec<(f64, f64)>,
    count: usize,
    locate: bool,
}

impl Sweep {
    fn new(locate: bool) -> Self {
        Self {
            open: None,
            intervals: Vec::new(),
            count: 0,
            locate,
        }
    }

    fn open_at(&mut self, t: f64) {
        if self.open.is_none() {
            self.open = Some(t);
        }
    }

    fn close_at(&mut self, t: f64) {
        if let Some(start) = self.open.take() {
            self.count += 1;
            if self.locate {
                self.intervals.push((start, t));
            }
        }
    }

    fn finish(mut self, threshold: f64, relation: Relation) -> CrossingReport {
        self.close_at(f64::INFINITY);
        CrossingReport {
            threshold,
            relation,
            count: self.count,
            intervals: self.intervals,
        }
    }
}

pub(crate) fn count_piecewise(f: &PiecewiseConstantSignal, c: f64, relation: Relation) -> CrossingReport {
    let mut sweep = Sweep::new(true);
    if relation.holds(f.left_extension(), c) {
        sweep.open_at(f64::NEG_INFINITY);
    }
    let bp = f.breakpoints();
    let levels = f.values().iter().copied().chain(std::iter::once(f.right_extension()));
    for (t, v) in bp.iter().zip(levels) {
        if relation.holds(v, c) {
            sweep.open_at(*t);
        } else {
            sweep.close_at(*t);
        }
    }
    sweep.finish(c, relation)
}

/// Maximal intervals of `{t : f(t) > c}`, including unbounded ones.
pub fn count_above_intervals(f: &PiecewiseConstantSignal, c: f64) -> CrossingReport {
    count_piecewise(f, c, Relation::Above)
}

/// Maximal intervals of `{t : f(t) < c}`.
pub fn count_below_intervals(f: &PiecewiseConstantSignal, c: f64) -> CrossingReport {
    count_piecewise(f, c, Relation::Below)
}

fn sweep_smoothed(g: &SmoothedOutput, c: f64, relation: Relation, locate: bool) -> CrossingReport {
    let mut sweep = Sweep::new(locate);
    if relation.holds(g.left_value(), c) {
        sweep.open_at(f64::NEG_INFINITY);
    }
    let bp = g.breakpoints();
    let pieces = g.pieces();
    for (i, piece) in pieces.iter().enumerate() {
        let start = bp[i];
        let len = g.piece_len(i);
        let g0 = piece.start_value();
        // The next piece's start value is authoritative at the shared point.
        let g1 = match pieces.get(i + 1) {
            Some(next) => next.start_value(),
            None => piece.limit(),
        };
        let in0 = relation.holds(g0, c);
        if in0 {
            sweep.open_at(start);
        } else {
            sweep.close_at(start);
        }
        let in1 = relation.holds(g1, c);
        if len.is_infinite() && g1 == c {
            // An asymptote at the threshold is never reached.
            continue;
        }
        let root = |sweep: &Sweep| {
            if sweep.locate {
                start + piece.solve(c, len)
            } else {
                f64::NAN
            }
        };
        match (in0, in1) {
            (true, false) => {
                let t = if g1 == c { start + len } else { root(&sweep) };
                sweep.close_at(t);
            }
            (false, true) => {
                let t = if g0 == c { start } else { root(&sweep) };
                sweep.open_at(t);
            }
            _ => {}
        }
    }
    sweep.finish(c, relation)
}

/// Exact interval count for a closed-form smoothed signal.
///
/// Each piece is monotone, so its part of the level set is one subinterval
/// decided by its endpoint values; interval ends come from the closed-form
/// logarithm (exponential pieces), a linear solve, or bisection.
pub fn count_intervals_exact(g: &SmoothedOutput, c: f64, relation: Relation) -> CrossingReport {
    sweep_smoothed(g, c, relation, true)
}

/// Interval count only; skips locating the endpoints.
pub(crate) fn count_only(g: &SmoothedOutput, c: f64, relation: Relation) -> usize {
    sweep_smoothed(g, c, relation, false).count
}

/// Approximate count for a sampled signal read as a zero-order hold.
pub fn count_intervals_sampled(g: &SampledSignal, c: f64, relation: Relation) -> CrossingReport {
    count_piecewise(&g.to_piecewise(), c, relation)
}

/// Number of strict sign alternations after deleting zeros.
pub fn sign_changes(seq: &[f64]) -> usize {
    let mut signs = seq.iter().filter(|x| **x != 0.0).map(|x| *x > 0.0);
    let Some(mut prev) = signs.next() else {
        return 0;
    };
    let mut n = 0;
    for s in signs {
        if s != prev {
            n += 1;
            prev = s;
        }
    }
    n
}
