use serde::{Deserialize, Serialize};

use super::{random_trial_signal, run_batched, summarize, threshold_schedule, trial_rng, Counterexample, P3Config, Smoother};
use crate::error::{invalid, Result};
use crate::kernel::Kernel;
use crate::signal::PiecewiseConstantSignal;

/// Random candidates draw from streams above this offset so they never
/// coincide with [`super::check_p3_randomized`] trials.
const RANDOM_STREAM_OFFSET: usize = 1 << 32;

const PULSE_COUNTS: [usize; 3] = [2, 3, 4];
const FRACTIONS: [f64; 6] = [1.0 / 3.0, 0.25, 0.5, 1.0 / 6.0, 2.0 / 3.0, 1.0];
const EXTENSIONS: [f64; 3] = [0.0, -1.0, 1.0];
const PULSE_HEIGHT: f64 = 2.0;
const GAP_LEVEL: f64 = -3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsifyResult {
    pub counterexample: Option<Counterexample>,
    pub candidates_tried: usize,
    /// Candidates whose approximate counts disagreed but could not be
    /// confirmed (quadrature paths only).
    pub inconclusive: usize,
}

/// Pulse trains that alternate height `2` and gap level `−3`, with pulse
/// and gap widths drawn from fixed fractions of the kernel scale. The first
/// entry is the two-pulse train `(2, −3, 2)` on unit-third widths with zero
/// extensions.
pub fn pulse_schedule(kernel: &Kernel) -> Vec<PiecewiseConstantSignal> {
    let scale = kernel.scale();
    let mut out = Vec::new();
    for &ext in &EXTENSIONS {
        for &n in &PULSE_COUNTS {
            for &wf in &FRACTIONS {
                for &gf in &FRACTIONS {
                    let (w, gap) = (wf * scale, gf * scale);
                    let mut breakpoints = vec![0.0];
                    let mut values = Vec::with_capacity(2 * n - 1);
                    let mut t = 0.0;
                    for k in 0..n {
                        if k > 0 {
                            t += gap;
                            breakpoints.push(t);
                            values.push(GAP_LEVEL);
                        }
                        t += w;
                        breakpoints.push(t);
                        values.push(PULSE_HEIGHT);
                    }
                    // Widths are positive, so construction cannot fail.
                    out.push(PiecewiseConstantSignal::new(breakpoints, values, ext, ext).expect("valid pulse train"));
                }
            }
        }
    }
    out
}

/// Searches for a variation-diminution violation: the pulse schedule first,
/// then random step signals, `budget` candidates in total. Stops at the
/// first confirmed counterexample.
pub fn falsify(kernel: &Kernel, budget: usize, seed: u64) -> Result<FalsifyResult> {
    if budget == 0 {
        return Err(invalid("budget must be at least 1"));
    }
    let schedule = pulse_schedule(kernel);
    let config = P3Config {
        seed,
        ..P3Config::default()
    };
    let smoother = Smoother::for_kernel(kernel);
    let outcomes = run_batched(budget, |i| {
        if let Some(f) = schedule.get(i) {
            smoother.probe(f, &threshold_schedule(f))
        } else {
            let mut rng = trial_rng(seed, RANDOM_STREAM_OFFSET + i);
            let (f, levels) = random_trial_signal(&mut rng, kernel, &config)?;
            smoother.probe(&f, &levels)
        }
    })?;
    let summary = summarize(outcomes, true);
    Ok(FalsifyResult {
        counterexample: summary.counterexample,
        candidates_tried: summary.trials_run,
        inconclusive: summary.inconclusive_trials,
    })
}
