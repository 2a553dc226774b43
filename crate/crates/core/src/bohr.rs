//! Bohr sets: construction, regularity, regular-width search, central pairs
//! with closure/interior, the boundary dichotomy count, averaging checks,
//! and covering `Z_N` by translates.
//!
//! `B(K, rho)` is the set of `x` with `|omega^{rx} - 1| <= rho` for every
//! frequency `r in K`. Membership is decided trigonometrically with a 1e-12
//! guard band so that boundary points are classified identically across
//! platforms. Cardinality is a step function of the width, so regularity is
//! checked on a finite epsilon grid; a scan failure is reported, never
//! silently absorbed.

use crate::verify::CheckReport;
use crate::zn::{chord, par_map, GroupFn, SubsetZn};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

/// Guard band for boundary membership.
pub const MEMBERSHIP_GUARD: f64 = 1e-12;

/// Width-dilation regularity constant.
pub const REGULARITY_CONSTANT: f64 = 100.0;

/// A Bohr set with cached membership and density.
#[derive(Debug, Clone)]
pub struct BohrSet {
    n: usize,
    freqs: Vec<u64>,
    rho: f64,
    members: SubsetZn,
}

impl BohrSet {
    /// Exact membership by direct evaluation of `2|sin(pi r x / N)| <= rho`
    /// per frequency.
    pub fn build(n: usize, freqs: &[u64], rho: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition("modulus must be at least 2".into()));
        }
        if !(rho > 0.0 && rho <= 2.0 + MEMBERSHIP_GUARD) && !freqs.is_empty() {
            if rho <= 0.0 {
                return Err(Error::Precondition(format!("width must be positive, got {rho}")));
            }
        }
        let freqs: Vec<u64> = freqs.iter().map(|&r| r % n as u64).collect();
        let members = SubsetZn::from_pred(n, |x| {
            freqs
                .iter()
                .all(|&r| chord(n, r * x as u64) <= rho + MEMBERSHIP_GUARD)
        });
        Ok(BohrSet {
            n,
            freqs,
            rho,
            members,
        })
    }

    pub fn full(n: usize) -> Self {
        BohrSet {
            n,
            freqs: Vec::new(),
            rho: 2.0,
            members: SubsetZn::full(n),
        }
    }

    pub fn modulus(&self) -> usize {
        self.n
    }

    pub fn freqs(&self) -> &[u64] {
        &self.freqs
    }

    /// Number of defining frequencies (the dimension-like complexity `d`).
    pub fn dim(&self) -> usize {
        self.freqs.len()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn members(&self) -> &SubsetZn {
        &self.members
    }

    pub fn density(&self) -> f64 {
        self.members.density()
    }

    /// Same frequency set, different width.
    pub fn with_width(&self, rho: f64) -> Result<BohrSet> {
        BohrSet::build(self.n, &self.freqs, rho)
    }

    /// Cardinality at a dilated width, without materializing the set.
    fn card_at(&self, rho: f64) -> usize {
        if self.freqs.is_empty() {
            return self.n;
        }
        (0..self.n)
            .filter(|&x| {
                self.freqs
                    .iter()
                    .all(|&r| chord(self.n, r * x as u64) <= rho + MEMBERSHIP_GUARD)
            })
            .count()
    }
}

/// Default epsilon grid for the regularity check, clipped to the valid
/// range `(0, 1/(100 d)]`. The two fractions of `1/(100 d)` anchor the grid
/// near the top of the range for every dimension.
pub fn default_eps_grid(d: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (1..=100).map(|k| k as f64 * 0.001).collect();
    if d > 0 {
        let top = 1.0 / (REGULARITY_CONSTANT * d as f64);
        g.push(top / 2.0);
        g.push(top / 4.0);
        g.retain(|&e| e <= top + 1e-15);
        g.sort_by(|a, b| a.partial_cmp(b).unwrap());
        g.dedup();
    }
    g
}

/// Outcome of a regularity check: the verdict and the epsilon at which the
/// cardinality bound was tightest (the binding epsilon).
#[derive(Debug, Clone, Serialize)]
pub struct Regularity {
    pub regular: bool,
    pub binding_eps: f64,
    pub worst_margin: f64,
}

/// Checks `|B(K, rho(1+eps))| <= |B| (1 + 100 d eps)` and
/// `|B(K, rho(1-eps))| >= |B| (1 - 100 d eps)` for every grid epsilon.
pub fn is_regular(b: &BohrSet, eps_grid: &[f64]) -> Regularity {
    let d = b.dim();
    let card = b.members.count() as f64;
    let mut worst = f64::INFINITY;
    let mut binding = 0.0;
    let mut regular = true;
    for &eps in eps_grid {
        let up = b.card_at(b.rho * (1.0 + eps)) as f64;
        let down = b.card_at(b.rho * (1.0 - eps)) as f64;
        let c = REGULARITY_CONSTANT * d as f64 * eps;
        let margin_up = card * (1.0 + c) - up;
        let margin_down = down - card * (1.0 - c);
        let m = margin_up.min(margin_down);
        if m < worst {
            worst = m;
            binding = eps;
        }
        if m < -1e-9 {
            regular = false;
        }
    }
    Regularity {
        regular,
        binding_eps: binding,
        worst_margin: worst,
    }
}

/// Scans geometric candidate widths in `[rho0, 2 rho0]` and returns the
/// first (smallest) width whose Bohr set passes the default-grid regularity
/// check. Fails loudly with the scan trace otherwise.
pub fn find_regular(n: usize, freqs: &[u64], rho0: f64, steps: usize) -> Result<BohrSet> {
    if !(rho0 > 0.0 && rho0 <= 1.0) {
        return Err(Error::Precondition(format!("rho0 must lie in (0, 1], got {rho0}")));
    }
    let d = freqs.len();
    if d == 0 {
        return BohrSet::build(n, freqs, rho0);
    }
    let grid = default_eps_grid(d);
    let steps = steps.max(2);
    let verdicts: Vec<Option<f64>> = par_map(steps, |k| {
        let rho = rho0 * 2f64.powf(k as f64 / (steps - 1) as f64);
        let b = BohrSet::build(n, freqs, rho).ok()?;
        if is_regular(&b, &grid).regular {
            Some(rho)
        } else {
            None
        }
    });
    for v in verdicts.iter() {
        if let Some(rho) = v {
            return BohrSet::build(n, freqs, *rho);
        }
    }
    Err(Error::NoRegularWidth(format!(
        "no regular width in [{rho0}, {}] over {steps} geometric steps for N={n}, K={freqs:?}",
        2.0 * rho0
    )))
}

/// Centrality window constants: `sigma in [eps rho / 400 d, eps rho / 200 d]`.
pub const CENTRALITY_DENOM_LOW: f64 = 400.0;
pub const CENTRALITY_DENOM_HIGH: f64 = 200.0;

/// A central pair `B' prec_eps B` with materialized closure and interior
/// sets at one and two sigma.
#[derive(Debug, Clone)]
pub struct CentralPair {
    pub outer: BohrSet,
    pub inner: BohrSet,
    pub eps: f64,
    pub sigma: f64,
    pub closure: BohrSet,
    pub interior: BohrSet,
    pub closure2: BohrSet,
    pub interior2: BohrSet,
}

impl CentralPair {
    /// `|B+ \ B-| <= eps |B|`, the small-boundary consequence of regularity
    /// that the boundary and averaging checks rely on.
    pub fn boundary_count(&self) -> usize {
        self.closure.members().minus(self.interior.members()).count()
    }
}

/// Searches the centrality window for a regular inner width and returns the
/// pair with closure and interior materialized. For `K = {}` the window
/// collapses and the pair degenerates to the full group.
pub fn central_subset(b: &BohrSet, eps: f64) -> Result<CentralPair> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Precondition(format!("eps must lie in (0, 1], got {eps}")));
    }
    let d = b.dim();
    if d == 0 {
        let full = b.clone();
        return Ok(CentralPair {
            outer: b.clone(),
            inner: full.clone(),
            eps,
            sigma: 0.0,
            closure: full.clone(),
            interior: full.clone(),
            closure2: full.clone(),
            interior2: full,
        });
    }
    let grid = default_eps_grid(d);
    if !is_regular(b, &grid).regular {
        return Err(Error::Precondition("outer Bohr set is not regular".into()));
    }
    let lo = eps * b.rho / (CENTRALITY_DENOM_LOW * d as f64);
    let hi = eps * b.rho / (CENTRALITY_DENOM_HIGH * d as f64);
    let steps = 128;
    let mut trace = Vec::new();
    for k in 0..=steps {
        let sigma = lo + (hi - lo) * k as f64 / steps as f64;
        let inner = b.with_width(sigma)?;
        if !is_regular(&inner, &grid).regular {
            trace.push(sigma);
            continue;
        }
        // Pair certificate: the one- and two-sigma dilates of B stay within
        // the regularity envelope, which bounds the boundary by eps|B|.
        let kappa = sigma / b.rho;
        let card = b.members().count() as f64;
        let ok = |mult: f64| {
            let up = b.card_at(b.rho + mult * sigma) as f64;
            let down = b.card_at(b.rho - mult * sigma) as f64;
            let c = REGULARITY_CONSTANT * d as f64 * mult * kappa;
            up <= card * (1.0 + c) + 1e-9 && down >= card * (1.0 - c) - 1e-9
        };
        if !(ok(1.0) && ok(2.0)) {
            trace.push(sigma);
            continue;
        }
        return Ok(CentralPair {
            outer: b.clone(),
            inner,
            eps,
            sigma,
            closure: b.with_width(b.rho + sigma)?,
            interior: b.with_width(b.rho - sigma)?,
            closure2: b.with_width(b.rho + 2.0 * sigma)?,
            interior2: b.with_width(b.rho - 2.0 * sigma)?,
        });
    }
    Err(Error::NoRegularWidth(format!(
        "no regular central width in [{lo:.3e}, {hi:.3e}]; {} candidates rejected",
        trace.len()
    )))
}

/// Boundary dichotomy count: for how many `x` does some translate `B + x_i`
/// neither contain nor avoid `B' + x`? Passes when the bad count is at most
/// `eps * m * |B|`.
pub fn boundary_lemma_check(pair: &CentralPair, xs: &[usize]) -> CheckReport {
    let n = pair.outer.modulus();
    let inner = pair.inner.members().members();
    let outer = pair.outer.members();
    let bad = par_map(n, |x| {
        for &xi in xs {
            let mut any_in = false;
            let mut any_out = false;
            for &bp in &inner {
                // b' + x - x_i in B?
                let z = (bp + x + n - xi % n) % n;
                if outer.contains(z) {
                    any_in = true;
                } else {
                    any_out = true;
                }
                if any_in && any_out {
                    return 1usize;
                }
            }
        }
        0usize
    })
    .into_iter()
    .sum::<usize>();
    let allowed = pair.eps * xs.len() as f64 * pair.outer.members().count() as f64;
    CheckReport::new(
        "boundary-dichotomy",
        bad as f64,
        allowed,
        format!("N={n} m={} eps={}", xs.len(), pair.eps),
    )
}

/// The five averaging checks for a central pair: each evaluates both sides
/// literally and passes iff the difference is within the stated multiple of
/// epsilon (1, 1, 3, 4, 8). The two-variable checks use `g(x, x') =
/// f(x) conj(f(x'))`.
pub fn averaging_checks(pair: &CentralPair, f: &GroupFn, p: &SubsetZn) -> Result<Vec<CheckReport>> {
    let n = pair.outer.modulus();
    if f.modulus() != n {
        return Err(Error::ModulusMismatch(f.modulus(), n));
    }
    if f.linf_norm() > 1.0 + 1e-9 {
        return Err(Error::Precondition("averaging checks need |f| <= 1".into()));
    }
    if !p.is_subset_of(pair.inner.members()) {
        return Err(Error::Precondition("P must be a subset of the central set".into()));
    }
    if p.count() == 0 {
        return Err(Error::EmptySet("averaging window P".into()));
    }
    let eps = pair.eps;
    let b = pair.outer.members().members();
    let bm = pair.interior.members().members();
    let bp = pair.inner.members().members();
    let ps = p.members();
    let v = f.values();
    let g = |x: usize, xp: usize| v[x] * v[xp].conj();
    let mean1 = |cell: &[usize]| -> Complex64 {
        crate::sum::pairwise_sum::<Complex64, _>(cell.len(), |i| v[cell[i]]) / cell.len() as f64
    };

    let mut out = Vec::new();
    let desc = |tag: &str| format!("N={n} |B|={} |B'|={} eps={eps} {tag}", b.len(), bp.len());

    // (i) E_{x in B} f(x) vs E_{x in B} E_{y in P} f(x+y).
    let lhs1 = mean1(&b);
    let rhs1 = crate::sum::pairwise_sum::<Complex64, _>(b.len() * ps.len(), |i| {
        let x = b[i / ps.len()];
        let y = ps[i % ps.len()];
        v[(x + y) % n]
    }) / (b.len() * ps.len()) as f64;
    out.push(CheckReport::new("averaging-i", (lhs1 - rhs1).norm(), eps, desc("i")));

    // (ii) E_{x in B} f vs E_{x in B-} f.
    let lhs2 = mean1(&b);
    let rhs2 = mean1(&bm);
    out.push(CheckReport::new("averaging-ii", (lhs2 - rhs2).norm(), eps, desc("ii")));

    // (iii) E_{x in B-} f vs E_{x in B-} E_{y in B'} f(x+y).
    let lhs3 = mean1(&bm);
    let rhs3 = crate::sum::pairwise_sum::<Complex64, _>(bm.len() * bp.len(), |i| {
        let x = bm[i / bp.len()];
        let y = bp[i % bp.len()];
        v[(x + y) % n]
    }) / (bm.len() * bp.len()) as f64;
    out.push(CheckReport::new("averaging-iii", (lhs3 - rhs3).norm(), 3.0 * eps, desc("iii")));

    // (iv) two-variable version over B.
    let lhs4 = crate::sum::pairwise_sum::<Complex64, _>(b.len() * b.len(), |i| {
        g(b[i / b.len()], b[i % b.len()])
    }) / (b.len() * b.len()) as f64;
    let rhs4 = crate::sum::pairwise_sum::<Complex64, _>(b.len() * b.len() * bp.len(), |i| {
        let x = b[i / (b.len() * bp.len())];
        let xp = b[(i / bp.len()) % b.len()];
        let y = bp[i % bp.len()];
        g((x + y) % n, (xp + y) % n)
    }) / (b.len() * b.len() * bp.len()) as f64;
    out.push(CheckReport::new("averaging-iv", (lhs4 - rhs4).norm(), 4.0 * eps, desc("iv")));

    // (v) two-variable version over B-.
    let lhs5 = crate::sum::pairwise_sum::<Complex64, _>(bm.len() * bm.len(), |i| {
        g(bm[i / bm.len()], bm[i % bm.len()])
    }) / (bm.len() * bm.len()) as f64;
    let rhs5 = crate::sum::pairwise_sum::<Complex64, _>(bm.len() * bm.len() * bp.len(), |i| {
        let x = bm[i / (bm.len() * bp.len())];
        let xp = bm[(i / bp.len()) % bm.len()];
        let y = bp[i % bp.len()];
        g((x + y) % n, (xp + y) % n)
    }) / (bm.len() * bm.len() * bp.len()) as f64;
    out.push(CheckReport::new("averaging-v", (lhs5 - rhs5).norm(), 8.0 * eps, desc("v")));

    Ok(out)
}

/// Base of the cover-cardinality bound `5^d / beta`.
pub const BOHR_COVER_BASE: f64 = 5.0;

/// A verified covering of `Z_N` by translates.
#[derive(Debug, Clone, Serialize)]
pub struct Cover {
    pub translates: Vec<usize>,
    pub bound: f64,
    pub covers: bool,
}

/// Greedy maximal packing by translates of `B(K, rho/2)`, then covering by
/// `x_i + B`. The certificate (union is everything, count within
/// `5^d / beta`) is verified pointwise, never assumed.
pub fn bohr_cover(b: &BohrSet) -> Result<Cover> {
    if b.members().count() == 0 {
        return Err(Error::EmptySet("cannot cover with an empty Bohr set".into()));
    }
    let n = b.modulus();
    let half = b.with_width(b.rho / 2.0)?;
    let halfdiff = half.members().sumset(&half.members().negate());
    let mut centers: Vec<usize> = Vec::new();
    let mut blocked = SubsetZn::empty(n);
    for x in 0..n {
        if !blocked.contains(x) {
            centers.push(x);
            blocked = blocked.union(&halfdiff.translate(x));
        }
    }
    let mut union = SubsetZn::empty(n);
    for &c in &centers {
        union = union.union(&b.members().translate(c));
    }
    let bound = BOHR_COVER_BASE.powi(b.dim() as i32) / b.density();
    Ok(Cover {
        translates: centers,
        bound,
        covers: union.count() == n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn build_examples() {
        // No constraints: the whole group; frequency 0 likewise.
        assert_eq!(BohrSet::build(15, &[], 0.5).unwrap().members().count(), 15);
        assert_eq!(BohrSet::build(15, &[0], 0.5).unwrap().members().count(), 15);

        let b = BohrSet::build(12, &[1], 1.0).unwrap();
        assert_eq!(b.members().members(), vec![0, 1, 2, 10, 11]);
        assert!((b.density() - 5.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn built_sets_are_symmetric_and_contain_zero() {
        for (n, freqs, rho) in [(101usize, vec![1u64], 0.9), (101, vec![3, 7], 0.6), (64, vec![5], 0.4)] {
            let b = BohrSet::build(n, &freqs, rho).unwrap();
            assert!(b.members().contains(0));
            assert!(b.members().is_symmetric());
        }
    }

    #[test]
    fn additive_closure_exhaustive() {
        // B(K, rho) + B(K, sigma) lies inside B(K, rho + sigma).
        for n in [36usize, 101, 255] {
            let b1 = BohrSet::build(n, &[1, 10], 0.5).unwrap();
            let b2 = BohrSet::build(n, &[1, 10], 0.3).unwrap();
            let b3 = BohrSet::build(n, &[1, 10], 0.8).unwrap();
            assert!(b1.members().sumset(b2.members()).is_subset_of(b3.members()), "n={n}");
        }
    }

    #[test]
    fn full_group_is_regular_for_every_eps() {
        let b = BohrSet::full(101);
        let r = is_regular(&b, &[0.001, 0.01, 0.1]);
        assert!(r.regular);
    }

    #[test]
    fn regularity_fails_at_a_jump() {
        // On Z_12 the set B({1}, rho) jumps from 3 to 5 members as rho
        // crosses 1 (the points x = 2, 10 enter at exactly 2 sin(pi/6) = 1).
        // A width just below the jump fails regularity for any grid epsilon
        // that reaches across it: 5 > 3 (1 + 100 eps) for eps <= 0.006.
        let b = BohrSet::build(12, &[1], 0.999).unwrap();
        assert_eq!(b.members().count(), 3);
        let r = is_regular(&b, &[0.002, 0.005]);
        assert!(!r.regular);
        assert!(r.worst_margin < 0.0);
        assert!(r.binding_eps >= 0.002);
    }

    #[test]
    fn find_regular_examples() {
        // Trivial frequency set returns rho0 immediately.
        let b = find_regular(101, &[], 0.5, 512).unwrap();
        assert_eq!(b.rho(), 0.5);

        for (freqs, rho0) in [(vec![1u64], 0.5), (vec![1, 10], 0.8)] {
            let b = find_regular(101, &freqs, rho0, 512).unwrap();
            assert!(b.rho() >= rho0 && b.rho() <= 2.0 * rho0 + 1e-12);
            assert!(is_regular(&b, &default_eps_grid(b.dim())).regular);
        }
    }

    #[test]
    fn central_subset_examples() {
        // Degenerate frequency-free case: everything is the full group.
        let pair = central_subset(&BohrSet::full(55), 0.3).unwrap();
        assert_eq!(pair.inner.members().count(), 55);
        assert_eq!(pair.boundary_count(), 0);

        let n = 401;
        let b = find_regular(n, &[1], 0.45, 512).unwrap();
        let pair = central_subset(&b, 0.2).unwrap();
        let d = b.dim() as f64;
        assert!(pair.sigma >= 0.2 * b.rho() / (400.0 * d) - 1e-15);
        assert!(pair.sigma <= 0.2 * b.rho() / (200.0 * d) + 1e-15);
        // Small boundary.
        assert!(pair.boundary_count() as f64 <= 0.2 * b.members().count() as f64 + 1e-9);
        // Closure/interior nesting.
        assert!(pair.interior2.members().is_subset_of(pair.interior.members()));
        assert!(pair.interior.members().is_subset_of(b.members()));
        assert!(b.members().is_subset_of(pair.closure.members()));
        assert!(pair.closure.members().is_subset_of(pair.closure2.members()));
    }

    #[test]
    fn boundary_check_examples() {
        let n = 101;
        let b = find_regular(n, &[1], 0.5, 512).unwrap();
        let pair = central_subset(&b, 0.25).unwrap();

        // No reference translates: nothing can go wrong.
        let r = boundary_lemma_check(&pair, &[]);
        assert!(r.pass && r.lhs == 0.0);

        let mut g = SplitMix64::new(5);
        let xs: Vec<usize> = (0..8).map(|_| g.next_below(n as u64) as usize).collect();
        assert!(boundary_lemma_check(&pair, &xs).pass);

        // Full group absorbs everything.
        let triv = central_subset(&BohrSet::full(n), 0.5).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let r = boundary_lemma_check(&triv, &all);
        assert!(r.pass && r.lhs == 0.0);
    }

    #[test]
    fn averaging_examples() {
        let n = 401;
        let b = find_regular(n, &[1], 0.45, 512).unwrap();
        let pair = central_subset(&b, 0.25).unwrap();

        // Constant functions: all five differences vanish.
        let c = GroupFn::constant(n, Complex64::new(0.6, 0.2));
        let p = pair.inner.members().clone();
        for r in averaging_checks(&pair, &c, &p).unwrap() {
            assert!(r.pass && r.lhs < 1e-12, "{}", r.check_id);
        }

        // Random unimodular f.
        let mut g = SplitMix64::new(9);
        let f = GroupFn::from_fn(n, |_| {
            let t = g.next_f64();
            crate::zn::e(t)
        });
        for r in averaging_checks(&pair, &f, &p).unwrap() {
            assert!(r.pass, "{} margin={}", r.check_id, r.margin);
        }

        // A character.
        let chi = GroupFn::character(n, 1);
        for r in averaging_checks(&pair, &chi, &p).unwrap() {
            assert!(r.pass, "{} margin={}", r.check_id, r.margin);
        }
    }

    #[test]
    fn cover_examples() {
        // Full group: a single translate.
        let c = bohr_cover(&BohrSet::full(60)).unwrap();
        assert!(c.covers && c.translates.len() == 1);

        let n = 101;
        let b = find_regular(n, &[1], 0.45, 512).unwrap();
        let c = bohr_cover(&b).unwrap();
        assert!(c.covers);
        assert!((c.translates.len() as f64) <= c.bound + 1e-9);

        // Translates are pairwise distinct.
        let mut t = c.translates.clone();
        t.dedup();
        assert_eq!(t.len(), c.translates.len());
    }
}
