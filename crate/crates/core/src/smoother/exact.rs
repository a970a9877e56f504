use crate::error::{invalid, Result};
use crate::kernel::{Kernel, KernelFamily};
use crate::poly;
use crate::signal::PiecewiseConstantSignal;

use super::output::{Piece, SmoothedOutput};

/// Breakpoints closer than this (relative to magnitude) are merged.
const MERGE_TOL: f64 = 1e-12;

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("rate must be positive and finite, got {rate}")))
    }
}

/// Closed-form smoothing by whichever exact path the kernel admits.
pub fn smooth_exact(f: &PiecewiseConstantSignal, kernel: &Kernel) -> Result<SmoothedOutput> {
    match *kernel.family() {
        KernelFamily::Exponential { rate } => smooth_exact_exponential(f, rate),
        KernelFamily::Box { width } => smooth_exact_box(f, width),
        KernelFamily::Gamma { shape, rate } => smooth_exact_gamma(f, shape, rate),
        KernelFamily::Sampled { .. } => Err(invalid(
            "sampled kernels have no closed-form smoothing path; use quadrature",
        )),
    }
}

/// Exponential kernel: on a piece with value `v`, `g` solves `g′ = λ(v − g)`
/// starting from `g(t₀) = left_extension`.
pub fn smooth_exact_exponential(f: &PiecewiseConstantSignal, rate: f64) -> Result<SmoothedOutput> {
    check_rate(rate)?;
    let bp = f.breakpoints();
    let mut pieces = Vec::with_capacity(bp.len());
    let mut g = f.left_extension();
    for (i, &v) in f.values().iter().enumerate() {
        pieces.push(Piece::ExpRelax {
            g_start: g,
            target: v,
            rate,
        });
        g = v + (g - v) * (-rate * (bp[i + 1] - bp[i])).exp();
    }
    pieces.push(Piece::ExpRelax {
        g_start: g,
        target: f.right_extension(),
        rate,
    });
    Ok(SmoothedOutput::new(bp.to_vec(), pieces, f.left_extension()))
}

/// `∫_{t0}^{x} f` extended linearly by the constant extensions.
struct Primitive<'a> {
    f: &'a PiecewiseConstantSignal,
    cumulative: Vec<f64>,
}

impl<'a> Primitive<'a> {
    fn new(f: &'a PiecewiseConstantSignal) -> Self {
        let bp = f.breakpoints();
        let mut cumulative = Vec::with_capacity(bp.len());
        let mut acc = 0.0;
        cumulative.push(acc);
        for (i, v) in f.values().iter().enumerate() {
            acc += v * (bp[i + 1] - bp[i]);
            cumulative.push(acc);
        }
        Self { f, cumulative }
    }

    fn at(&self, x: f64) -> f64 {
        let bp = self.f.breakpoints();
        if x <= bp[0] {
            return self.f.left_extension() * (x - bp[0]);
        }
        let last = bp.len() - 1;
        if x >= bp[last] {
            return self.cumulative[last] + self.f.right_extension() * (x - bp[last]);
        }
        let i = bp.partition_point(|b| *b <= x) - 1;
        self.cumulative[i] + self.f.values()[i] * (x - bp[i])
    }
}

/// Box kernel `1/a` on `[0, a]`: `g(t) = (1/a)∫_{t−a}^{t} f`, continuous and
/// piecewise linear with breakpoints `{tᵢ} ∪ {tᵢ + a}`.
pub fn smooth_exact_box(f: &PiecewiseConstantSignal, width: f64) -> Result<SmoothedOutput> {
    if !(width.is_finite() && width > 0.0) {
        return Err(invalid(format!("box width must be positive and finite, got {width}")));
    }
    let mut times: Vec<f64> = f
        .breakpoints()
        .iter()
        .flat_map(|t| [*t, t + width])
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup_by(|x, y| (*x - *y).abs() <= MERGE_TOL * (1.0 + y.abs()));

    let prim = Primitive::new(f);
    let pieces = times
        .iter()
        .enumerate()
        .map(|(j, &b)| {
            let g_start = (prim.at(b) - prim.at(b - width)) / width;
            // f(t) and f(t − a) are constant inside the piece; probe its middle.
            let probe = match times.get(j + 1) {
                Some(next) => 0.5 * (b + next),
                None => b + width,
            };
            let slope = (f.value_at(probe) - f.value_at(probe - width)) / width;
            Piece::Linear { g_start, slope }
        })
        .collect();
    Ok(SmoothedOutput::new(times, pieces, f.left_extension()))
}

/// Erlang kernel of shape `n`: the exponential smoother applied `n` times.
///
/// Each pass maps a piece `v + e^{−λu}P(u)` to `v + e^{−λu}R(u)` with
/// `R = (g(tᵢ) − v) + λ∫₀ᵘP`. The result is split at the critical points of
/// each piece so every output piece is monotone.
pub fn smooth_exact_gamma(
    f: &PiecewiseConstantSignal,
    shape: u32,
    rate: f64,
) -> Result<SmoothedOutput> {
    check_rate(rate)?;
    if shape == 0 {
        return Err(invalid("gamma shape must be at least 1"));
    }
    if shape == 1 {
        return smooth_exact_exponential(f, rate);
    }
    let bp = f.breakpoints();
    let lens: Vec<f64> = bp
        .windows(2)
        .map(|w| w[1] - w[0])
        .chain(std::iter::once(f64::INFINITY))
        .collect();
    let targets: Vec<f64> = f
        .values()
        .iter()
        .copied()
        .chain(std::iter::once(f.right_extension()))
        .collect();

    let mut polys: Vec<Vec<f64>> = vec![Vec::new(); targets.len()];
    for _ in 0..shape {
        let mut g = f.left_extension();
        for ((poly, &v), &len) in polys.iter_mut().zip(&targets).zip(&lens) {
            let mut r: Vec<f64> = poly::antiderivative(poly).iter().map(|c| rate * c).collect();
            r[0] = g - v;
            if len.is_finite() {
                g = v + (-rate * len).exp() * poly::eval(&r, len);
            }
            *poly = r;
        }
    }

    let mut times = Vec::with_capacity(bp.len());
    let mut pieces = Vec::with_capacity(bp.len());
    for (i, ((r, &v), &len)) in polys.iter().zip(&targets).zip(&lens).enumerate() {
        // g′ = e^{−λu}(R′ − λR)
        let mut slope_poly = poly::derivative(r);
        slope_poly.resize(r.len(), 0.0);
        for (d, c) in slope_poly.iter_mut().zip(r) {
            *d -= rate * c;
        }
        let upper = if len.is_finite() {
            len
        } else {
            poly::root_bound(&slope_poly) + 1.0
        };
        let mut cuts = vec![0.0];
        cuts.extend(
            poly::roots_in(&slope_poly, 0.0, upper)
                .into_iter()
                .filter(|u| *u > MERGE_TOL * upper && (len - u) > MERGE_TOL * upper),
        );
        for u0 in cuts {
            let coeffs = if u0 == 0.0 {
                r.clone()
            } else {
                let damp = (-rate * u0).exp();
                poly::taylor_shift(r, u0).iter().map(|c| damp * c).collect()
            };
            times.push(bp[i] + u0);
            pieces.push(Piece::PolyExp {
                target: v,
                rate,
                coeffs,
            });
        }
    }
    Ok(SmoothedOutput::new(times, pieces, f.left_extension()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn counterexample() -> PiecewiseConstantSignal {
        PiecewiseConstantSignal::new(vec![0.0, 1.0, 2.0, 3.0], vec![2.0, -3.0, 2.0], 0.0, 0.0).unwrap()
    }

    #[test]
    fn exponential_halving_recursion() {
        // e^{−λ} = 1/2: each unit of time halves the distance to the target.
        let f = PiecewiseConstantSignal::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0; 3], 0.0, 1.0).unwrap();
        let g = smooth_exact_exponential(&f, std::f64::consts::LN_2).unwrap();
        assert_eq!(g.eval(0.0), 0.0);
        assert_abs_diff_eq!(g.eval(1.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(g.eval(2.0), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(g.eval(3.0), 0.875, epsilon = 1e-15);
        assert!(g.continuity_defect() < 1e-15);
    }

    #[test]
    fn constants_are_fixed_points() {
        let c = PiecewiseConstantSignal::constant(-3.7).unwrap();
        for out in [
            smooth_exact_exponential(&c, 2.0).unwrap(),
            smooth_exact_box(&c, 3.0).unwrap(),
            smooth_exact_gamma(&c, 3, 1.5).unwrap(),
        ] {
            for i in -20..40 {
                assert_abs_diff_eq!(out.eval(i as f64 * 0.25), -3.7, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn box_counterexample_values() {
        let g = smooth_exact_box(&counterexample(), 3.0).unwrap();
        assert_eq!(g.breakpoints(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let want = [0.0, 2.0 / 3.0, -1.0 / 3.0, 1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0, 0.0];
        for (t, w) in want.iter().enumerate() {
            assert_abs_diff_eq!(g.eval(t as f64), *w, epsilon = 1e-12);
        }
        assert_eq!(g.pieces().last(), Some(&Piece::Linear { g_start: 0.0, slope: 0.0 }));
    }

    #[test]
    fn box_matches_direct_integration() {
        // Oracle: midpoint sum of (1/a)∫_{t−a}^{t} f with a fine step.
        let f = crate::signal::gen_random_steps(5, 8, (-4.0, 4.0), (0.2, 2.0)).unwrap();
        let a = 1.7;
        let g = smooth_exact_box(&f, a).unwrap();
        let n = 20_000;
        let h = a / n as f64;
        for k in 0..60 {
            let t = -1.0 + k as f64 * 0.3;
            let direct: f64 = (0..n).map(|j| f.value_at(t - a + (j as f64 + 0.5) * h)).sum::<f64>() * h / a;
            assert_abs_diff_eq!(g.eval(t), direct, epsilon = 1e-3);
        }
    }

    #[test]
    fn step_ramps_linearly() {
        let f = PiecewiseConstantSignal::new(vec![0.0, 1.0], vec![1.0], 0.0, 1.0).unwrap();
        let g = smooth_exact_box(&f, 2.0).unwrap();
        for i in 0..=20 {
            let t = i as f64 * 0.1;
            assert_abs_diff_eq!(g.eval(t), t / 2.0, epsilon = 1e-14);
        }
        assert_eq!(g.eval(5.0), 1.0);
        assert_eq!(g.eval(-1.0), 0.0);
    }

    fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let mut acc = f(lo) + f(hi);
        for j in 1..n {
            acc += if j % 2 == 1 { 4.0 } else { 2.0 } * f(lo + j as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn gamma_matches_convolution_oracle() {
        // g(t) = Σ over constant stretches of v·∫φ over the matching lag
        // window, with each smooth lag integral done by Simpson.
        let f = crate::signal::gen_random_steps(11, 6, (-5.0, 5.0), (0.3, 2.0)).unwrap();
        let rate = 1.3;
        let k = Kernel::gamma(2, rate).unwrap();
        let g = smooth_exact_gamma(&f, 2, rate).unwrap();
        let far = 60.0 / rate;
        let phi = |s: f64| k.evaluate(s).unwrap();
        let bp = f.breakpoints();
        for idx in 0..25 {
            let t = -0.5 + idx as f64 * 0.45;
            let mut stretches = vec![(t - bp[0], far, f.left_extension())];
            for (i, v) in f.values().iter().enumerate() {
                stretches.push((t - bp[i + 1], t - bp[i], *v));
            }
            stretches.push((0.0, t - bp[bp.len() - 1], f.right_extension()));
            let direct: f64 = stretches
                .into_iter()
                .map(|(lo, hi, v)| (lo.max(0.0), hi.min(far), v))
                .filter(|(lo, hi, _)| hi > lo)
                .map(|(lo, hi, v)| v * simpson(phi, lo, hi, 20000))
                .sum();
            assert_abs_diff_eq!(g.eval(t), direct, epsilon = 1e-9);
        }
    }

    #[test]
    fn gamma_pieces_are_monotone_and_continuous() {
        for seed in 0..20 {
            let f = crate::signal::gen_random_steps(seed, 12, (-10.0, 10.0), (0.05, 3.0)).unwrap();
            for shape in [2, 3, 5] {
                let g = smooth_exact_gamma(&f, shape, 0.8).unwrap();
                assert!(g.continuity_defect() < 1e-10, "defect {}", g.continuity_defect());
                for (i, p) in g.pieces().iter().enumerate() {
                    let len = g.piece_len(i).min(30.0);
                    let vals: Vec<f64> = (0..=200).map(|k| p.value(len * k as f64 / 200.0)).collect();
                    let inc = vals.windows(2).all(|w| w[1] >= w[0] - 1e-9);
                    let dec = vals.windows(2).all(|w| w[1] <= w[0] + 1e-9);
                    assert!(inc || dec, "seed {seed} shape {shape} piece {i} not monotone");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let f = counterexample();
        assert!(smooth_exact_exponential(&f, 0.0).is_err());
        assert!(smooth_exact_box(&f, -1.0).is_err());
        assert!(smooth_exact_gamma(&f, 0, 1.0).is_err());
        let sampled = Kernel::sampled(vec![1.0, 0.5], 0.1).unwrap();
        assert!(smooth_exact(&f, &sampled).is_err());
    }
}
