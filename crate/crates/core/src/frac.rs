//! Continued fractions and best rational approximation, exact in `i128`.

/// Distance from `theta` to the nearest integer.
pub fn dist_to_int(theta: f64) -> f64 {
    let f = theta - theta.round();
    f.abs()
}

/// Convergents `p/q` of the continued fraction expansion of `alpha >= 0`,
/// in increasing order of denominator, stopping once `q > q_max` or the
/// expansion terminates.
pub fn convergents(alpha: f64, q_max: i128) -> Vec<(i128, i128)> {
    let mut out = Vec::new();
    let (mut p0, mut q0) = (1i128, 0i128);
    let (mut p1, mut q1) = (alpha.floor() as i128, 1i128);
    out.push((p1, q1));
    let mut x = alpha - alpha.floor();
    for _ in 0..64 {
        if x.abs() < 1e-15 {
            break;
        }
        x = 1.0 / x;
        let a = x.floor();
        if a >= 1e18 {
            break;
        }
        x -= a;
        let a = a as i128;
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        if q2 > q_max {
            break;
        }
        out.push((p2, q2));
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    out
}

/// Last convergent of `alpha` with denominator at most `q_max`.
///
/// By the best-approximation property it satisfies
/// `|alpha - p/q| <= 1/(q * q_max)` whenever the expansion continues past it.
pub fn best_rational(alpha: f64, q_max: i128) -> (i128, i128) {
    let neg = alpha < 0.0;
    let cs = convergents(alpha.abs(), q_max);
    let &(p, q) = cs.last().expect("at least one convergent");
    if neg {
        (-p, q)
    } else {
        (p, q)
    }
}
