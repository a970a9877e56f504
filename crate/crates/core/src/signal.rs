//! Test signals.
//!
//! [`PiecewiseConstantSignal`] is the canonical representation: it is
//! defined on the whole real line through constant left and right
//! extensions, and it admits exact smoothing. [`SampledSignal`] is the
//! uniform-grid form used for CSV exchange and quadrature; it converts to a
//! piecewise-constant signal by zero-order hold.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Relative tolerance for accepting a CSV time column as uniform.
pub const GRID_REL_TOL: f64 = 1e-9;

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `f(t) = values[i]` on `[breakpoints[i], breakpoints[i+1])`, with constant
/// extensions before the first and after the last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantSignal {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    left_extension: f64,
    right_extension: f64,
}

impl PiecewiseConstantSignal {
    pub fn new(
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        left_extension: f64,
        right_extension: f64,
    ) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(invalid("a piecewise-constant signal needs at least two breakpoints"));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(invalid(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(invalid("breakpoints must be finite"));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("breakpoints must be strictly increasing"));
        }
        if values
            .iter()
            .chain([&left_extension, &right_extension])
            .any(|v| !v.is_finite())
        {
            return Err(invalid("signal values must be finite"));
        }
        Ok(Self {
            breakpoints,
            values,
            left_extension,
            right_extension,
        })
    }

    /// `f ≡ c`, represented as one piece on `[0, 1)`.
    pub fn constant(c: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![c], c, c)
    }

    /// Same pieces with different extensions.
    pub fn with_extensions(&self, left: f64, right: f64) -> Result<Self> {
        Self::new(self.breakpoints.clone(), self.values.clone(), left, right)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_extension(&self) -> f64 {
        self.left_extension
    }

    pub fn right_extension(&self) -> f64 {
        self.right_extension
    }

    pub fn num_pieces(&self) -> usize {
        self.values.len()
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Right-continuous evaluation.
    pub fn value_at(&self, t: f64) -> f64 {
        if t < self.start() {
            self.left_extension
        } else if t >= self.end() {
            self.right_extension
        } else {
            let i = self.breakpoints.partition_point(|b| *b <= t) - 1;
            self.values[i]
        }
    }

    /// Left, interior and right values in time order.
    pub fn all_levels(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.left_extension)
            .chain(self.values.iter().copied())
            .chain(std::iter::once(self.right_extension))
    }

    /// Sorted distinct values taken anywhere on the line.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.all_levels().collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// `(min, max)` of `f` on `(−∞, t]`.
    pub fn history_bounds(&self, t: f64) -> (f64, f64) {
        let mut lo = self.left_extension;
        let mut hi = self.left_extension;
        for (i, v) in self.values.iter().enumerate() {
            if self.breakpoints[i] > t {
                return (lo, hi);
            }
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        if self.end() <= t {
            lo = lo.min(self.right_extension);
            hi = hi.max(self.right_extension);
        }
        (lo, hi)
    }

    /// `t ↦ f(t − τ)`.
    pub fn shifted(&self, tau: f64) -> Result<Self> {
        Self::new(
            self.breakpoints.iter().map(|t| t + tau).collect(),
            self.values.clone(),
            self.left_extension,
            self.right_extension,
        )
    }

    /// `α·f + β`.
    pub fn affine(&self, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(
            self.breakpoints.clone(),
            self.values.iter().map(|v| alpha * v + beta).collect(),
            alpha * self.left_extension + beta,
            alpha * self.right_extension + beta,
        )
    }

    /// Point samples `f(t_start + i·dt)` for `i < n`.
    pub fn sample(&self, t_start: f64, dt: f64, n: usize) -> Result<SampledSignal> {
        let values = (0..n)
            .map(|i| self.value_at(t_start + i as f64 * dt))
            .collect();
        SampledSignal::new(t_start, dt, values)
    }
}

/// Values on the uniform grid `t0 + i·dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("sample step must be positive and finite, got {dt}")));
        }
        if !t0.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sampled signal must be finite"));
        }
        if values.is_empty() {
            return Err(invalid("sampled signal needs at least one value"));
        }
        Ok(Self { t0, dt, values })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Zero-order hold: `values[i]` on `[tᵢ, tᵢ + dt)`, extended by the first
    /// and last samples.
    pub fn to_piecewise(&self) -> PiecewiseConstantSignal {
        let breakpoints = (0..=self.values.len()).map(|i| self.time(i)).collect();
        PiecewiseConstantSignal::new(
            breakpoints,
            self.values.clone(),
            self.values[0],
            *self.values.last().unwrap(),
        )
        .expect("uniform grid with positive step is strictly increasing")
    }

    /// Reads CSV with header `t,value` on a uniform grid.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let (t, values) = read_two_column_csv(reader, ["t", "value"])?;
        let (t0, dt) = infer_uniform_grid(&t)?;
        Self::new(t0, dt, values)
    }

    /// Writes CSV with header `t,value` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write_csv_named(writer, "value")
    }

    /// Like [`SampledSignal::write_csv`] with a custom value column name.
    pub fn write_csv_named<W: Write>(&self, mut writer: W, column: &str) -> Result<()> {
        writeln!(writer, "t,{column}")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(writer, "{},{}", fmt17(self.time(i)), fmt17(*v))?;
        }
        Ok(())
    }
}

/// Parses a two-column numeric CSV whose header must equal `header`.
pub(crate) fn read_two_column_csv<R: Read>(
    reader: R,
    header: [&str; 2],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let head = match records.next() {
        None => {
            return Err(Error::Parse {
                line: 1,
                message: format!("missing header \"{},{}\"", header[0], header[1]),
            })
        }
        Some(r) => r.map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?,
    };
    if head.len() != 2 || head.get(0) != Some(header[0]) || head.get(1) != Some(header[1]) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header \"{},{}\"", header[0], header[1]),
        });
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let parse = |field: &str| -> Result<f64> {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("not a number: {field:?}"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse {
                    line,
                    message: format!("non-finite value {field:?}"),
                })
            }
        };
        a.push(parse(&rec[0])?);
        b.push(parse(&rec[1])?);
    }
    if a.is_empty() {
        return Err(Error::Parse {
            line: 2,
            message: "no data rows".into(),
        });
    }
    Ok((a, b))
}

fn round_sig(x: f64, digits: usize) -> f64 {
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// Recovers `(t0, dt)` from a time column, rejecting non-uniform spacing.
///
/// Among a few candidate steps, the first that regenerates every time stamp
/// bit-for-bit as `t0 + i·dt` wins; otherwise the mean step is used.
pub(crate) fn infer_uniform_grid(times: &[f64]) -> Result<(f64, f64)> {
    if times.len() < 2 {
        return Err(Error::Format(
            "at least two rows are needed to determine the sample step".into(),
        ));
    }
    let t0 = times[0];
    let first = times[1] - t0;
    if !(first > 0.0) {
        return Err(Error::Format("time column must be strictly increasing".into()));
    }
    for (i, w) in times.windows(2).enumerate() {
        let step = w[1] - w[0];
        if (step - first).abs() > GRID_REL_TOL * first {
            return Err(Error::Format(format!(
                "non-uniform time grid: step {step} between rows {} and {} differs from {first}",
                i + 1,
                i + 2
            )));
        }
    }
    let n = times.len() - 1;
    let mean = (times[n] - t0) / n as f64;
    let regenerates = |dt: f64| {
        times
            .iter()
            .enumerate()
            .all(|(i, t)| t0 + i as f64 * dt == *t)
    };
    // Several steps may regenerate the column; prefer the shortest decimal.
    let mut candidates = Vec::new();
    for digits in 6..=15 {
        candidates.push(round_sig(mean, digits));
        candidates.push(round_sig(first, digits));
    }
    candidates.extend([first, mean]);
    let dt = candidates
        .into_iter()
        .find(|dt| *dt > 0.0 && regenerates(*dt))
        .unwrap_or(mean);
    Ok((t0, dt))
}

/// Random steps starting at `t = 0`: piece values uniform in `value_range`,
/// durations uniform in `duration_range`, extensions equal to the first and
/// last values.
pub fn gen_random_steps(
    seed: u64,
    n_pieces: usize,
    value_range: (f64, f64),
    duration_range: (f64, f64),
) -> Result<PiecewiseConstantSignal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_steps(&mut rng, n_pieces, value_range, duration_range)
}

/// [`gen_random_steps`] driven by a caller-supplied generator.
pub fn random_steps<R: Rng + ?Sized>(
    rng: &mut R,
    n_pieces: usize,
    value_range: (f64, f64),
    duration_range: (f64, f64),
) -> Result<PiecewiseConstantSignal> {
    if n_pieces == 0 {
        return Err(invalid("need at least one piece"));
    }
    let (vlo, vhi) = value_range;
    let (dlo, dhi) = duration_range;
    if !(vlo <= vhi && vlo.is_finite() && vhi.is_finite()) {
        return Err(invalid(format!("empty value range [{vlo}, {vhi}]")));
    }
    if !(0.0 < dlo && dlo <= dhi && dhi.is_finite()) {
        return Err(invalid(format!("duration range [{dlo}, {dhi}] must be positive")));
    }
    let mut breakpoints = Vec::with_capacity(n_pieces + 1);
    let mut values = Vec::with_capacity(n_pieces);
    let mut t = 0.0;
    breakpoints.push(t);
    for _ in 0..n_pieces {
        values.push(rng.gen_range(vlo..=vhi));
        t += rng.gen_range(dlo..=dhi);
        breakpoints.push(t);
    }
    let (first, last) = (values[0], values[n_pieces - 1]);
    PiecewiseConstantSignal::new(breakpoints, values, first, last)
}

/// `n_pulses` pulses of `height` and width `pulse_width`, one per `period`,
/// separated by `base`. Both extensions are `base`.
pub fn gen_pulse_train(
    height: f64,
    base: f64,
    pulse_width: f64,
    period: f64,
    n_pulses: usize,
) -> Result<PiecewiseConstantSignal> {
    if !(pulse_width > 0.0 && period > 0.0) {
        return Err(invalid("pulse width and period must be positive"));
    }
    if pulse_width >= period {
        return Err(invalid(format!(
            "pulse width {pulse_width} must be shorter than the period {period}"
        )));
    }
    if n_pulses == 0 {
        return Err(invalid("need at least one pulse"));
    }
    let mut breakpoints = Vec::with_capacity(2 * n_pulses);
    let mut values = Vec::with_capacity(2 * n_pulses - 1);
    for k in 0..n_pulses {
        let start = k as f64 * period;
        if k > 0 {
            values.push(base);
        }
        breakpoints.push(start);
        values.push(height);
        breakpoints.push(start + pulse_width);
    }
    PiecewiseConstantSignal::new(breakpoints, values, base, base)
}

/// A rating history: starts at `start`, jumps by a uniform amount in
/// `[−step_scale, step_scale]` after each game, constant in between. Game
/// spacing is uniform in `[0.5, 1.5]`.
pub fn gen_rating_walk(
    seed: u64,
    n_games: usize,
    start: f64,
    step_scale: f64,
) -> Result<PiecewiseConstantSignal> {
    if n_games == 0 {
        return Err(invalid("need at least one game"));
    }
    if !(step_scale >= 0.0 && step_scale.is_finite()) {
        return Err(invalid("step scale must be finite and nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut breakpoints = Vec::with_capacity(n_games + 1);
    let mut values = Vec::with_capacity(n_games);
    let mut t = 0.0;
    let mut rating = start;
    breakpoints.push(t);
    for _ in 0..n_games {
        if step_scale > 0.0 {
            rating += rng.gen_range(-step_scale..=step_scale);
        }
        values.push(rating);
        t += rng.gen_range(0.5..=1.5);
        breakpoints.push(t);
    }
    PiecewiseConstantSignal::new(breakpoints, values, start, rating)
}
