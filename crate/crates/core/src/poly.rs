//! Dense polynomials in ascending-coefficient form.

/// Horner evaluation of `c[0] + c[1] x + ... + c[d] x^d`.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

/// Degree after dropping trailing zero coefficients; `None` for the zero polynomial.
pub fn degree(coeffs: &[f64]) -> Option<usize> {
    coeffs.iter().rposition(|&c| c != 0.0)
}

fn trimmed(coeffs: &[f64]) -> &[f64] {
    match degree(coeffs) {
        Some(d) => &coeffs[..=d],
        None => &[],
    }
}

/// Real roots in `[a, b]`, sorted ascending.
///
/// Roots of the derivative split the interval into monotone pieces, each of
/// which holds at most one root; those are located by bisection. The zero
/// polynomial reports no roots.
pub fn roots_in(coeffs: &[f64], a: f64, b: f64) -> Vec<f64> {
    let p = trimmed(coeffs);
    match p.len() {
        0 | 1 => return Vec::new(),
        2 => {
            let x = -p[0] / p[1];
            return if (a..=b).contains(&x) { vec![x] } else { Vec::new() };
        }
        _ => {}
    }

    let mut breaks = vec![a];
    breaks.extend(roots_in(&derivative(p), a, b));
    breaks.push(b);

    let mut roots: Vec<f64> = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if let Some(x) = bisect(p, lo, hi) {
            if roots.last().map_or(true, |&r| (x - r).abs() > 1e-14 * (1.0 + r.abs())) {
                roots.push(x);
            }
        }
    }
    roots
}

fn bisect(p: &[f64], mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut flo = eval(p, lo);
    let fhi = eval(p, hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval(p, mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Exact (inf, sup) of the polynomial over `[a, b]`: extrema sit at the
/// endpoints or at critical points.
pub fn range_on(coeffs: &[f64], a: f64, b: f64) -> (f64, f64) {
    let mut lo = eval(coeffs, a).min(eval(coeffs, b));
    let mut hi = eval(coeffs, a).max(eval(coeffs, b));
    for x in roots_in(&derivative(coeffs), a, b) {
        let v = eval(coeffs, x);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}
