//! Dense real polynomials in ascending coefficient order.

pub(crate) fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

pub(crate) fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect()
}

/// Antiderivative vanishing at zero.
pub(crate) fn antiderivative(coeffs: &[f64]) -> Vec<f64> {
    std::iter::once(0.0)
        .chain(coeffs.iter().enumerate().map(|(k, c)| c / (k + 1) as f64))
        .collect()
}

/// Coefficients of `x ↦ p(x + shift)`.
pub(crate) fn taylor_shift(coeffs: &[f64], shift: f64) -> Vec<f64> {
    // Repeated synthetic division by (x - shift) in reverse.
    let mut c = coeffs.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            c[j] += shift * c[j + 1];
        }
    }
    c
}

fn trim(coeffs: &[f64]) -> &[f64] {
    let len = coeffs.iter().rposition(|c| *c != 0.0).map_or(0, |i| i + 1);
    &coeffs[..len]
}

/// Largest-magnitude bound on real roots (Cauchy).
pub(crate) fn root_bound(coeffs: &[f64]) -> f64 {
    let c = trim(coeffs);
    match c.split_last() {
        None | Some((_, [])) => 0.0,
        Some((lead, rest)) => 1.0 + rest.iter().map(|a| (a / lead).abs()).fold(0.0, f64::max),
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, run until the bracket
/// cannot shrink further.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let lo_positive = f_lo > 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real roots of `p` in the open interval `(a, b)`, sorted.
///
/// Roots of the derivative split `[a, b]` into monotone stretches, each of
/// which holds at most one root; even-multiplicity roots show up as
/// critical points where `p` vanishes.
pub(crate) fn roots_in(coeffs: &[f64], a: f64, b: f64) -> Vec<f64> {
    let p = trim(coeffs);
    if p.len() <= 1 || !(a < b) {
        return Vec::new();
    }
    if p.len() == 2 {
        let r = -p[0] / p[1];
        return if a < r && r < b { vec![r] } else { Vec::new() };
    }
    let mut marks = vec![a];
    marks.extend(roots_in(&derivative(p), a, b));
    marks.push(b);

    let mut roots = Vec::new();
    for w in marks.windows(2) {
        let (l, r) = (w[0], w[1]);
        let (fl, fr) = (eval(p, l), eval(p, r));
        if l > a && fl == 0.0 {
            roots.push(l);
            continue;
        }
        if fl != 0.0 && fr != 0.0 && (fl > 0.0) != (fr > 0.0) {
            roots.push(bisect(|x| eval(p, x), l, r));
        }
    }
    // Touching roots at interior critical points that bisection skipped.
    for m in &marks[1..marks.len() - 1] {
        if eval(p, *m).abs() <= 1e-14 * p.iter().map(|c| c.abs()).fold(0.0, f64::max)
            && !roots.iter().any(|r| (r - m).abs() <= 1e-12 * (1.0 + m.abs()))
        {
            roots.push(*m);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_and_calculus() {
        let p = [1.0, -3.0, 2.0]; // 2x² − 3x + 1 = (2x − 1)(x − 1)
        assert_eq!(eval(&p, 2.0), 3.0);
        assert_eq!(derivative(&p), vec![-3.0, 4.0]);
        assert_eq!(antiderivative(&[2.0, 6.0]), vec![0.0, 2.0, 3.0]);
        let shifted = taylor_shift(&p, 1.0);
        for x in [-1.0, 0.0, 0.5, 3.0] {
            assert!((eval(&shifted, x) - eval(&p, x + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn finds_simple_and_double_roots() {
        let p = [1.0, -3.0, 2.0];
        let r = roots_in(&p, -10.0, 10.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 0.5).abs() < 1e-14 && (r[1] - 1.0).abs() < 1e-14);
        assert!(roots_in(&p, 0.6, 0.9).is_empty());

        let sq = [1.0, -2.0, 1.0]; // (x − 1)²
        assert_eq!(roots_in(&sq, 0.0, 3.0), vec![1.0]);

        // (x − 1)(x − 2)(x − 3)
        let cubic = [-6.0, 11.0, -6.0, 1.0];
        let r = roots_in(&cubic, 0.0, 4.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(root_bound(&cubic) >= 3.0);
    }
}
