use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{check_p1, check_p2, check_p3_randomized, falsify, AxiomReport, P3Config, P3Result, Verdict};
use crate::error::Result;
use crate::kernel::{Kernel, KernelFamily};

pub type MatrixRow = AxiomReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixConfig {
    /// Random trials per kernel after the guided search.
    pub trials: usize,
    /// Guided-search candidates per kernel.
    pub budget: usize,
    pub seed: u64,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            budget: 500,
            seed: 0,
        }
    }
}

/// `Exp(1)`, `Box(1)`, `Gamma(2, 1)` and a 100-segment triangular kernel of
/// unit width.
pub fn default_kernel_set() -> Vec<Kernel> {
    vec![
        Kernel::exponential(1.0).expect("valid rate"),
        Kernel::boxcar(1.0).expect("valid width"),
        Kernel::gamma(2, 1.0).expect("valid parameters"),
        Kernel::sampled_triangular(1.0, 100).expect("valid width"),
    ]
}

fn row(kernel: &Kernel, config: &MatrixConfig) -> Result<MatrixRow> {
    let exact = !matches!(kernel.family(), KernelFamily::Sampled { .. });
    let search = falsify(kernel, config.budget, config.seed)?;
    let p3 = match search.counterexample {
        Some(cx) => P3Result {
            verdict: Verdict::Fail,
            trials_run: search.candidates_tried,
            inconclusive_trials: search.inconclusive,
            exact,
            counterexample: Some(cx),
        },
        None => {
            let random = check_p3_randomized(
                kernel,
                &P3Config {
                    seed: config.seed,
                    n_trials: config.trials,
                    ..P3Config::default()
                },
            )?;
            let inconclusive_trials = random.inconclusive_trials + search.inconclusive;
            let verdict = match random.verdict {
                Verdict::Pass if inconclusive_trials > 0 => Verdict::Inconclusive,
                v => v,
            };
            P3Result {
                verdict,
                trials_run: random.trials_run + search.candidates_tried,
                inconclusive_trials,
                ..random
            }
        }
    };
    Ok(AxiomReport {
        kernel: kernel.to_string(),
        p1: check_p1(kernel, None)?,
        p2: check_p2(kernel),
        p3,
    })
}

/// Guided search then randomized trials for each kernel.
pub fn axiom_matrix(kernels: &[Kernel], config: &MatrixConfig) -> Result<Vec<MatrixRow>> {
    kernels.iter().map(|k| row(k, config)).collect()
}

fn mark(pass: bool) -> &'static str {
    if pass {
        "✓"
    } else {
        "✗"
    }
}

/// Plain-text table: one row per kernel, `✓`/`✗`/`?` per axiom.
pub fn render_matrix(rows: &[MatrixRow]) -> String {
    let width = rows.iter().map(|r| r.kernel.chars().count()).max().unwrap_or(0).max(6);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  P1  P2  P3", "kernel");
    for r in rows {
        let p3 = match r.p3.verdict {
            Verdict::Pass => "✓",
            Verdict::Fail => "✗",
            Verdict::Inconclusive => "?",
        };
        let _ = writeln!(out, "{:<width$}  {}   {}   {}", r.kernel, mark(r.p1.pass), mark(r.p2.monotone), p3);
    }
    out
}
