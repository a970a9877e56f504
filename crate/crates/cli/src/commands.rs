use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use causavg::axioms::{check_p1, check_p2, default_kernel_set, render_matrix};
use causavg::signal::{fmt17, gen_pulse_train, gen_random_steps, gen_rating_walk};
use causavg::smoother::{smooth_quadrature, EmaState};
use causavg::transform::{psi_profile, reconstruct_symmetrized};
use causavg::{
    axiom_matrix, check_p3_randomized, count_intervals_exact, count_intervals_sampled, falsify, smooth_exact,
    AxiomReport, Kernel, KernelFamily, MatrixConfig, P3Config, PiecewiseConstantSignal, Relation,
    SampledSignal,
};

use crate::args::{
    AxiomsArgs, Command, CrossingsArgs, FalsifyArgs, GenArgs, GenKind, History, KernelSpec, MatrixArgs,
    ReconstructArgs, RelationArg, SmoothArgs, TransformArgs,
};

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// An axiom check or search found a violation.
    Violation,
}

pub fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Smooth(a) => smooth(a),
        Command::Crossings(a) => crossings(a),
        Command::Axioms(a) => axioms(a),
        Command::Falsify(a) => falsify_cmd(a),
        Command::Matrix(a) => matrix(a),
        Command::Transform(a) => transform(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Gen(a) => generate(a),
    }
}

fn load_kernel(spec: &KernelSpec) -> Result<Kernel> {
    let kernel = match *spec {
        KernelSpec::Exponential(rate) => Kernel::exponential(rate)?,
        KernelSpec::Box(width) => Kernel::boxcar(width)?,
        KernelSpec::Gamma(n, rate) => Kernel::gamma(n, rate)?,
        KernelSpec::File(ref path) => {
            let file = File::open(path).with_context(|| format!("cannot open kernel file {}", path.display()))?;
            Kernel::read_csv(BufReader::new(file)).with_context(|| format!("reading kernel {}", path.display()))?
        }
    };
    Ok(kernel)
}

fn load_signal(path: &Path) -> Result<SampledSignal> {
    let file = File::open(path).with_context(|| format!("cannot open input {}", path.display()))?;
    SampledSignal::read_csv(BufReader::new(file)).with_context(|| format!("reading signal {}", path.display()))
}

fn with_history(s: &SampledSignal, history: History) -> Result<PiecewiseConstantSignal> {
    let f = s.to_piecewise();
    Ok(match history {
        History::Hold => f,
        History::Zero => f.with_extensions(0.0, f.right_extension())?,
    })
}

/// Writes `bytes` to `path`, or to standard output when no path is given.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Quadrature on the sample grid. Zero history is realized by prepending
/// enough zero samples to cover the horizon.
fn quadrature_values(s: &SampledSignal, kernel: &Kernel, horizon: f64, history: History) -> Result<Vec<f64>> {
    match history {
        History::Hold => Ok(smooth_quadrature(s, kernel, horizon)?.values().to_vec()),
        History::Zero => {
            let pad = (horizon / s.dt()).ceil() as usize + 1;
            let mut values = vec![0.0; pad];
            values.extend_from_slice(s.values());
            let padded = SampledSignal::new(s.t0() - pad as f64 * s.dt(), s.dt(), values)?;
            Ok(smooth_quadrature(&padded, kernel, horizon)?.values()[pad..].to_vec())
        }
    }
}

fn smoothed_values(s: &SampledSignal, kernel: &Kernel, history: History, horizon: Option<f64>) -> Result<Vec<f64>> {
    if let KernelFamily::Sampled { .. } = kernel.family() {
        let horizon = horizon.unwrap_or_else(|| kernel.support_end());
        return quadrature_values(s, kernel, horizon, history);
    }
    let f = with_history(s, history)?;
    let g = smooth_exact(&f, kernel)?;
    Ok((0..s.len()).map(|i| g.eval(s.time(i))).collect())
}

fn smooth(a: SmoothArgs) -> Result<Outcome> {
    let kernel = load_kernel(&a.kernel)?;
    let s = load_signal(&a.input)?;
    let values = if a.stream {
        let KernelFamily::Exponential { rate } = *kernel.family() else {
            bail!("--stream needs an exponential kernel, got {kernel}");
        };
        let f = with_history(&s, a.history)?;
        let mut state = EmaState::init(rate, f.left_extension(), s.t0())?;
        let mut out = Vec::with_capacity(s.len());
        out.push(state.value());
        for i in 1..s.len() {
            state = state.step(s.values()[i - 1], s.time(i))?;
            out.push(state.value());
        }
        out
    } else {
        smoothed_values(&s, &kernel, a.history, a.horizon)?
    };
    let g = SampledSignal::new(s.t0(), s.dt(), values)?;
    let mut buf = Vec::new();
    g.write_csv_named(&mut buf, "g")?;
    emit(Some(&a.output), &buf)?;
    Ok(Outcome::Success)
}

fn crossings(a: CrossingsArgs) -> Result<Outcome> {
    let s = load_signal(&a.input)?;
    let relation = match a.relation {
        RelationArg::Above => Relation::Above,
        RelationArg::Below => Relation::Below,
    };
    let f = with_history(&s, a.history)?;
    let reports = if a.smoothed {
        let spec = a.kernel.as_ref().context("--smoothed needs --kernel")?;
        let kernel = load_kernel(spec)?;
        if let KernelFamily::Sampled { .. } = kernel.family() {
            let values = quadrature_values(&s, &kernel, kernel.support_end(), a.history)?;
            let g = SampledSignal::new(s.t0(), s.dt(), values)?;
            a.thresholds.iter().map(|c| count_intervals_sampled(&g, *c, relation)).collect::<Vec<_>>()
        } else {
            let g = smooth_exact(&f, &kernel)?;
            a.thresholds.iter().map(|c| count_intervals_exact(&g, *c, relation)).collect()
        }
    } else {
        a.thresholds
            .iter()
            .map(|c| match relation {
                Relation::Above => causavg::count_above_intervals(&f, *c),
                Relation::Below => causavg::count_below_intervals(&f, *c),
            })
            .collect()
    };
    emit(a.output.as_deref(), &json_bytes(&reports)?)?;
    Ok(Outcome::Success)
}

fn axioms(a: AxiomsArgs) -> Result<Outcome> {
    let kernel = load_kernel(&a.kernel)?;
    let config = P3Config {
        seed: a.seed,
        n_trials: a.trials,
        max_pieces: a.max_pieces,
        thresholds_per_trial: a.thresholds_per_trial,
        ..P3Config::default()
    };
    let report = AxiomReport {
        kernel: kernel.to_string(),
        p1: check_p1(&kernel, a.p1_tol)?,
        p2: check_p2(&kernel),
        p3: check_p3_randomized(&kernel, &config)?,
    };
    emit(a.output.as_deref(), &json_bytes(&report)?)?;
    Ok(if report.has_violation() {
        Outcome::Violation
    } else {
        Outcome::Success
    })
}

fn falsify_cmd(a: FalsifyArgs) -> Result<Outcome> {
    let kernel = load_kernel(&a.kernel)?;
    let result = falsify(&kernel, a.budget, a.seed)?;
    eprintln!(
        "{kernel}: {} candidates tried, {} inconclusive",
        result.candidates_tried, result.inconclusive
    );
    match result.counterexample {
        Some(cx) => {
            emit(a.output.as_deref(), &json_bytes(&cx)?)?;
            Ok(Outcome::Violation)
        }
        None => {
            emit(a.output.as_deref(), b"\"none\"\n")?;
            Ok(Outcome::Success)
        }
    }
}

fn matrix(a: MatrixArgs) -> Result<Outcome> {
    let kernels = if a.kernels.is_empty() {
        default_kernel_set()
    } else {
        a.kernels.iter().map(load_kernel).collect::<Result<Vec<_>>>()?
    };
    let config = MatrixConfig {
        trials: a.trials,
        budget: a.budget,
        seed: a.seed,
    };
    let rows = axiom_matrix(&kernels, &config)?;
    if let Some(path) = &a.json {
        emit(Some(path), &json_bytes(&rows)?)?;
    }
    emit(None, render_matrix(&rows).as_bytes())?;
    Ok(Outcome::Success)
}

/// `lo, lo + step, …` up to `hi`, computed by index so the grid does not
/// accumulate rounding.
fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    ensure!(lo.is_finite() && hi.is_finite() && lo <= hi, "grid bounds must satisfy {lo} <= {hi}");
    ensure!(step.is_finite() && step > 0.0, "grid step must be positive, got {step}");
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    ensure!(n <= 10_000_000, "grid of {n} points is too large");
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

fn transform(a: TransformArgs) -> Result<Outcome> {
    let mut kernel = load_kernel(&a.kernel)?;
    if let Some(dt) = a.sample_dt {
        kernel = kernel.discretize(dt)?;
    }
    let s = grid(a.s_min, a.s_max, a.ds)?;
    let profile = psi_profile(&kernel, &s, a.zero_tol)?;
    let mut buf = Vec::new();
    writeln!(buf, "s,re,im,psi_abs,zero_flag")?;
    for (i, &si) in s.iter().enumerate() {
        let t = profile.transform_values[i];
        let psi = profile.psi_values[i].map_or("inf".to_string(), |p| fmt17(p.norm()));
        writeln!(
            buf,
            "{},{},{},{},{}",
            fmt17(si),
            fmt17(t.re),
            fmt17(t.im),
            psi,
            u8::from(profile.zero_flags[i])
        )?;
    }
    emit(a.output.as_deref(), &buf)?;
    Ok(Outcome::Success)
}

fn reconstruct(a: ReconstructArgs) -> Result<Outcome> {
    ensure!(a.xmax > 0.0, "--xmax must be positive");
    let x = grid(-a.xmax, a.xmax, a.dx)?;
    let r = reconstruct_symmetrized(a.delta, a.c, &x, a.s_cutoff, a.ds)?;
    let mut buf = Vec::new();
    writeln!(buf, "x,phi2,reference")?;
    for (i, xi) in x.iter().enumerate() {
        writeln!(buf, "{},{},{}", fmt17(*xi), fmt17(r.values[i]), fmt17(r.reference[i]))?;
    }
    emit(a.output.as_deref(), &buf)?;
    emit(None, format!("max_rel_error,{}\n", fmt17(r.max_rel_error)).as_bytes())?;
    Ok(Outcome::Success)
}

fn generate(a: GenArgs) -> Result<Outcome> {
    let f = match a.kind {
        GenKind::Steps {
            seed,
            pieces,
            value_min,
            value_max,
            duration_min,
            duration_max,
        } => gen_random_steps(seed, pieces, (value_min, value_max), (duration_min, duration_max))?,
        GenKind::Pulses {
            height,
            base,
            width,
            period,
            count,
        } => gen_pulse_train(height, base, width, period, count)?,
        GenKind::Rating {
            seed,
            games,
            start,
            step_scale,
        } => gen_rating_walk(seed, games, start, step_scale)?,
    };
    ensure!(a.dt.is_finite() && a.dt > 0.0, "--dt must be positive, got {}", a.dt);
    let n = ((f.end() - f.start()) / a.dt + 1e-9).floor() as usize + 1;
    let s = f.sample(f.start(), a.dt, n)?;
    let mut buf = Vec::new();
    s.write_csv(&mut buf)?;
    emit(a.output.as_deref(), &buf)?;
    Ok(Outcome::Success)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_are_index_based() {
        let g = grid(-1.0, 1.0, 0.1).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[20], -1.0 + 20.0 * 0.1);
        assert!(grid(1.0, 0.0, 0.1).is_err());
        assert!(grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn zero_history_pads_quadrature() {
        let s = SampledSignal::new(0.0, 0.1, vec![1.0; 50]).unwrap();
        let k = Kernel::sampled_triangular(1.0, 10).unwrap();
        let held = quadrature_values(&s, &k, 1.0, History::Hold).unwrap();
        assert!(held.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let zero = quadrature_values(&s, &k, 1.0, History::Zero).unwrap();
        assert_eq!(zero[0], 0.0);
        assert!((zero[49] - 1.0).abs() < 1e-12);
        assert!(zero.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn stream_and_exact_agree() {
        let s = SampledSignal::new(0.0, 0.25, vec![1.0, -2.0, 3.0, 0.5, 0.5, 4.0]).unwrap();
        let k = Kernel::exponential(1.3).unwrap();
        let exact = smoothed_values(&s, &k, History::Zero, None).unwrap();
        let f = with_history(&s, History::Zero).unwrap();
        let mut st = EmaState::init(1.3, f.left_extension(), 0.0).unwrap();
        assert_eq!(exact[0], 0.0);
        for (i, g) in exact.iter().enumerate().skip(1) {
            st = st.step(s.values()[i - 1], s.time(i)).unwrap();
            assert_eq!(st.value(), *g);
        }
    }
}
