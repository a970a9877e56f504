//! Checks of the three averaging axioms.
//!
//! 1. Constants are invariant (`∫φ = 1`).
//! 2. `φ` is non-increasing.
//! 3. Variation diminution: for every level `c`, `{g > c}` and `{g < c}`
//!    have no more intervals than `{f > c}` and `{f < c}`.
//!
//! Property 3 is probed with random piecewise-constant signals and a guided
//! pulse-train search ([`falsify`]). Verdicts on exact smoothing paths are
//! counts, so a reported violation replays deterministically. Quadrature
//! paths can only report inconclusive trials.

mod falsify;
mod matrix;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossings::{count_intervals_sampled, count_only, count_piecewise, Relation};
use crate::error::{invalid, Result};
use crate::kernel::{Kernel, KernelFamily, MonotonicityReport};
use crate::signal::{random_steps, PiecewiseConstantSignal};
use crate::smoother::{smooth_exact, smooth_quadrature};

pub use falsify::{falsify, pulse_schedule, FalsifyResult};
pub use matrix::{axiom_matrix, default_kernel_set, render_matrix, MatrixConfig, MatrixRow};

/// Default P1 tolerance on closed-form paths.
pub const P1_TOL_EXACT: f64 = 1e-9;
/// Default P1 tolerance on quadrature paths.
pub const P1_TOL_QUADRATURE: f64 = 1e-6;

/// Trials evaluated per parallel batch before checking for a violation.
const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P1Result {
    pub pass: bool,
    pub max_error: f64,
    pub tolerance: f64,
}

/// A signal and level at which the smoothed signal has more intervals than
/// the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub signal: PiecewiseConstantSignal,
    pub threshold: f64,
    pub relation: Relation,
    pub count_f: usize,
    pub count_g: usize,
}

impl Counterexample {
    /// Recomputes `(count_f, count_g)` from scratch on the exact path.
    pub fn replay(&self, kernel: &Kernel) -> Result<(usize, usize)> {
        let g = smooth_exact(&self.signal, kernel)?;
        let count_f = count_piecewise(&self.signal, self.threshold, self.relation).count;
        Ok((count_f, count_only(&g, self.threshold, self.relation)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P3Result {
    pub verdict: Verdict,
    pub trials_run: usize,
    pub inconclusive_trials: usize,
    /// Whether verdicts came from closed-form smoothing.
    pub exact: bool,
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub kernel: String,
    pub p1: P1Result,
    pub p2: MonotonicityReport,
    pub p3: P3Result,
}

impl AxiomReport {
    /// True when any axiom failed outright.
    pub fn has_violation(&self) -> bool {
        !self.p1.pass || !self.p2.monotone || self.p3.verdict == Verdict::Fail
    }
}

/// Random-signal settings for [`check_p3_randomized`]. Durations are in
/// units of the kernel's characteristic time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P3Config {
    pub seed: u64,
    pub n_trials: usize,
    pub max_pieces: usize,
    pub value_range: (f64, f64),
    pub duration_range: (f64, f64),
    /// Extra uniformly drawn levels on top of the deterministic schedule.
    pub thresholds_per_trial: usize,
}

impl Default for P3Config {
    fn default() -> Self {
        Self {
            seed: 0,
            n_trials: 1000,
            max_pieces: 50,
            value_range: (-10.0, 10.0),
            duration_range: (0.1, 3.0),
            thresholds_per_trial: 4,
        }
    }
}

/// Smooths `f ≡ 1` and `f ≡ −3.7` over ten kernel-scale units and reports
/// the largest deviation from the constant.
pub fn check_p1(kernel: &Kernel, tol: Option<f64>) -> Result<P1Result> {
    let scale = kernel.scale();
    let exact = !matches!(kernel.family(), KernelFamily::Sampled { .. });
    let tolerance = tol.unwrap_or(if exact { P1_TOL_EXACT } else { P1_TOL_QUADRATURE });
    let mut max_error: f64 = 0.0;
    for c in [1.0, -3.7] {
        let breakpoints: Vec<f64> = (0..=10).map(|i| i as f64 * scale).collect();
        let f = PiecewiseConstantSignal::new(breakpoints, vec![c; 10], c, c)?;
        if exact {
            let g = smooth_exact(&f, kernel)?;
            let n = 2000;
            for i in 0..=n {
                let t = -scale + 12.0 * scale * i as f64 / n as f64;
                max_error = max_error.max((g.eval(t) - c).abs());
            }
            for v in g.breakpoint_values() {
                max_error = max_error.max((v - c).abs());
            }
        } else {
            let KernelFamily::Sampled { dt, .. } = *kernel.family() else {
                unreachable!()
            };
            let n = (10.0 * scale / dt).ceil() as usize + 1;
            let s = f.sample(0.0, dt, n)?;
            let g = smooth_quadrature(&s, kernel, kernel.support_end())?;
            for v in g.values() {
                max_error = max_error.max((v - c).abs());
            }
        }
    }
    Ok(P1Result {
        pass: max_error <= tolerance,
        max_error,
        tolerance,
    })
}

pub fn check_p2(kernel: &Kernel) -> MonotonicityReport {
    kernel.check_monotone()
}

/// Levels covering every combinatorially distinct level set of `f`:
/// midpoints between consecutive distinct values and each value `± ε`
/// with `ε = 1e−6·range`. Levels equal to a value of `f` are avoided: a
/// smoothed signal can sit on such a level up to rounding.
pub fn threshold_schedule(f: &PiecewiseConstantSignal) -> Vec<f64> {
    let vals = f.distinct_values();
    let range = vals[vals.len() - 1] - vals[0];
    let mut out = Vec::with_capacity(3 * vals.len());
    for w in vals.windows(2) {
        out.push(0.5 * (w[0] + w[1]));
    }
    for v in &vals {
        let eps = if range > 0.0 {
            1e-6 * range
        } else {
            1e-6 * v.abs().max(1.0)
        };
        out.push(v - eps);
        out.push(v + eps);
    }
    out
}

pub(crate) enum TrialOutcome {
    Pass,
    Inconclusive,
    Fail(Counterexample),
}

/// How a kernel is applied to a test signal.
pub(crate) enum Smoother<'a> {
    Exact(&'a Kernel),
    Quadrature(&'a Kernel),
}

impl<'a> Smoother<'a> {
    pub(crate) fn for_kernel(kernel: &'a Kernel) -> Self {
        match kernel.family() {
            KernelFamily::Sampled { .. } => Smoother::Quadrature(kernel),
            _ => Smoother::Exact(kernel),
        }
    }

    fn is_exact(&self) -> bool {
        matches!(self, Smoother::Exact(_))
    }

    /// Compares interval counts of `f` and its average at every level.
    pub(crate) fn probe(&self, f: &PiecewiseConstantSignal, levels: &[f64]) -> Result<TrialOutcome> {
        match *self {
            Smoother::Exact(kernel) => {
                let g = smooth_exact(f, kernel)?;
                Ok(first_violation(f, levels, |c, rel| count_only(&g, c, rel))
                    .map_or(TrialOutcome::Pass, TrialOutcome::Fail))
            }
            Smoother::Quadrature(kernel) => {
                let KernelFamily::Sampled { dt, .. } = *kernel.family() else {
                    unreachable!()
                };
                let support = kernel.support_end();
                let t0 = f.start() - dt;
                let n = ((f.end() + 2.0 * support - t0) / dt).ceil() as usize + 1;
                let s = f.sample(t0, dt, n)?;
                let g = smooth_quadrature(&s, kernel, support)?;
                Ok(
                    match first_violation(f, levels, |c, rel| count_intervals_sampled(&g, c, rel).count) {
                        Some(_) => TrialOutcome::Inconclusive,
                        None => TrialOutcome::Pass,
                    },
                )
            }
        }
    }
}

fn first_violation(
    f: &PiecewiseConstantSignal,
    levels: &[f64],
    count_g: impl Fn(f64, Relation) -> usize,
) -> Option<Counterexample> {
    for &c in levels {
        for relation in [Relation::Above, Relation::Below] {
            let cf = count_piecewise(f, c, relation).count;
            let cg = count_g(c, relation);
            if cg > cf {
                return Some(Counterexample {
                    signal: f.clone(),
                    threshold: c,
                    relation,
                    count_f: cf,
                    count_g: cg,
                });
            }
        }
    }
    None
}

pub(crate) fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub(crate) fn random_trial_signal(
    rng: &mut ChaCha8Rng,
    kernel: &Kernel,
    config: &P3Config,
) -> Result<(PiecewiseConstantSignal, Vec<f64>)> {
    let scale = kernel.scale();
    let n = rng.gen_range(1..=config.max_pieces);
    let (dlo, dhi) = config.duration_range;
    let f = random_steps(rng, n, config.value_range, (dlo * scale, dhi * scale))?;
    let mut levels = threshold_schedule(&f);
    let (vlo, vhi) = config.value_range;
    for _ in 0..config.thresholds_per_trial {
        levels.push(rng.gen_range(vlo..=vhi));
    }
    Ok((f, levels))
}

/// Runs `outcome(i)` for `i < n` in parallel batches and stops after the
/// first batch that contains a failure. Returns the per-trial outcomes up to
/// and including the first failure, in index order.
pub(crate) fn run_batched(
    n: usize,
    outcome: impl Fn(usize) -> Result<TrialOutcome> + Sync,
) -> Result<Vec<TrialOutcome>> {
    let mut done = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let end = (start + BATCH).min(n);
        let batch: Vec<Result<TrialOutcome>> = (start..end).into_par_iter().map(&outcome).collect();
        for r in batch {
            let r = r?;
            let fail = matches!(r, TrialOutcome::Fail(_));
            done.push(r);
            if fail {
                return Ok(done);
            }
        }
        start = end;
    }
    Ok(done)
}

pub(crate) fn summarize(outcomes: Vec<TrialOutcome>, exact: bool) -> P3Result {
    let trials_run = outcomes.len();
    let mut inconclusive_trials = 0;
    let mut counterexample = None;
    for o in outcomes {
        match o {
            TrialOutcome::Pass => {}
            TrialOutcome::Inconclusive => inconclusive_trials += 1,
            TrialOutcome::Fail(cx) => counterexample = Some(cx),
        }
    }
    let verdict = if counterexample.is_some() {
        Verdict::Fail
    } else if inconclusive_trials > 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    P3Result {
        verdict,
        trials_run,
        inconclusive_trials,
        exact,
        counterexample,
    }
}

/// Random-signal test of the variation-diminishing property. Trial `i`
/// draws from stream `i` of the seeded generator, so the result does not
/// depend on scheduling.
pub fn check_p3_randomized(kernel: &Kernel, config: &P3Config) -> Result<P3Result> {
    if config.n_trials == 0 {
        return Err(invalid("n_trials must be at least 1"));
    }
    if config.max_pieces == 0 {
        return Err(invalid("max_pieces must be at least 1"));
    }
    let smoother = Smoother::for_kernel(kernel);
    let outcomes = run_batched(config.n_trials, |i| {
        let mut rng = trial_rng(config.seed, i);
        let (f, levels) = random_trial_signal(&mut rng, kernel, config)?;
        smoother.probe(&f, &levels)
    })?;
    Ok(summarize(outcomes, smoother.is_exact()))
}

/// P1, P2 and randomized P3 for one kernel.
pub fn check_axioms(kernel: &Kernel, config: &P3Config) -> Result<AxiomReport> {
    Ok(AxiomReport {
        kernel: kernel.to_string(),
        p1: check_p1(kernel, None)?,
        p2: check_p2(kernel),
        p3: check_p3_randomized(kernel, config)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_on_all_paths() {
        let r = check_p1(&Kernel::exponential(2.0).unwrap(), None).unwrap();
        assert!(r.pass && r.max_error < 1e-12, "{r:?}");
        assert!(check_p1(&Kernel::boxcar(3.0).unwrap(), None).unwrap().pass);
        assert!(check_p1(&Kernel::gamma(3, 0.5).unwrap(), None).unwrap().pass);
        let tri = Kernel::sampled_triangular(1.0, 100).unwrap();
        let r = check_p1(&tri, None).unwrap();
        assert!(r.pass && r.tolerance == 1e-6, "{r:?}");
    }

    #[test]
    fn p2_delegates() {
        assert!(check_p2(&Kernel::exponential(1.0).unwrap()).monotone);
        assert!(check_p2(&Kernel::boxcar(3.0).unwrap()).monotone);
        let r = check_p2(&Kernel::gamma(2, 1.0).unwrap());
        assert!(!r.monotone);
        assert_eq!(r.witness.unwrap().0, 0.0);
    }

    #[test]
    fn schedule_brackets_every_value() {
        let f = PiecewiseConstantSignal::new(vec![0.0, 1.0, 2.0, 3.0], vec![2.0, -3.0, 2.0], 0.0, 0.0).unwrap();
        let mut levels = threshold_schedule(&f);
        levels.sort_by(f64::total_cmp);
        let eps = 1e-6 * 5.0;
        assert_eq!(levels, vec![-3.0 - eps, -3.0 + eps, -1.5, -eps, eps, 1.0, 2.0 - eps, 2.0 + eps]);
    }

    #[test]
    fn exponential_passes_randomized_p3() {
        let cfg = P3Config { seed: 42, n_trials: 300, ..P3Config::default() };
        let r = check_p3_randomized(&Kernel::exponential(1.0).unwrap(), &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.trials_run, 300);
        assert!(r.exact);
    }

    #[test]
    fn box_fails_randomized_p3_with_replayable_witness() {
        let kernel = Kernel::boxcar(3.0).unwrap();
        let cfg = P3Config { seed: 42, n_trials: 1000, ..P3Config::default() };
        let r = check_p3_randomized(&kernel, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let cx = r.counterexample.unwrap();
        assert!(cx.count_g > cx.count_f);
        assert_eq!(cx.replay(&kernel).unwrap(), (cx.count_f, cx.count_g));
        // Deterministic in the seed.
        let again = check_p3_randomized(&kernel, &cfg).unwrap();
        assert_eq!(again.trials_run, r.trials_run);
    }

    #[test]
    fn gamma_passes_randomized_p3() {
        let cfg = P3Config { seed: 7, n_trials: 200, ..P3Config::default() };
        let r = check_p3_randomized(&Kernel::gamma(2, 1.0).unwrap(), &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.counterexample);
    }

    #[test]
    fn rejects_empty_config() {
        let cfg = P3Config { n_trials: 0, ..P3Config::default() };
        assert!(check_p3_randomized(&Kernel::exponential(1.0).unwrap(), &cfg).is_err());
    }
}
