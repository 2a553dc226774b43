//! Multidimensional arithmetic progressions: construction with exact
//! properness detection, relative closure/interior/boundary, the central
//! subgrid, covering `Z_N` by translates, and a heuristic search for a
//! progression inside a Bohr set whose output is verified, never assumed.

use crate::bohr::BohrSet;
use crate::frac::convergents;
use crate::verify::CheckReport;
use crate::zn::SubsetZn;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// `{x0 + sum_i a_i g_i : 0 <= a_i < m_i}`, proper when all points are
/// distinct.
#[derive(Debug, Clone)]
pub struct Gap {
    n: usize,
    base: usize,
    gens: Vec<usize>,
    lens: Vec<usize>,
    proper: bool,
    members: SubsetZn,
}

impl Gap {
    pub fn build(n: usize, base: usize, gens: &[usize], lens: &[usize]) -> Result<Self> {
        if gens.len() != lens.len() {
            return Err(Error::Precondition("generators and lengths differ".into()));
        }
        if lens.iter().any(|&m| m == 0) {
            return Err(Error::Precondition("all lengths must be at least 1".into()));
        }
        let mut members = SubsetZn::empty(n);
        let mut count: u128 = 0;
        let mut coords = vec![0usize; lens.len()];
        loop {
            let mut x = base % n;
            for (i, &c) in coords.iter().enumerate() {
                x = (x + c * (gens[i] % n)) % n;
            }
            members.insert(x);
            count += 1;
            let mut carry = true;
            for i in (0..coords.len()).rev() {
                coords[i] += 1;
                if coords[i] == lens[i] {
                    coords[i] = 0;
                } else {
                    carry = false;
                    break;
                }
            }
            if carry {
                break;
            }
        }
        let volume: u128 = lens.iter().map(|&m| m as u128).product();
        debug_assert_eq!(count, volume);
        Ok(Gap {
            n,
            base: base % n,
            gens: gens.iter().map(|&g| g % n).collect(),
            lens: lens.to_vec(),
            proper: members.count() as u128 == volume,
            members,
        })
    }

    /// The symmetric box `{sum_i a_i g_i : |a_i| <= h_i}`.
    pub fn symmetric_box(n: usize, gens: &[usize], half_lens: &[usize]) -> Result<Self> {
        let mut base = 0usize;
        for (&g, &h) in gens.iter().zip(half_lens) {
            base = (base + n - (h * (g % n)) % n) % n;
        }
        let lens: Vec<usize> = half_lens.iter().map(|&h| 2 * h + 1).collect();
        Gap::build(n, base, gens, &lens)
    }

    pub fn modulus(&self) -> usize {
        self.n
    }
    pub fn base(&self) -> usize {
        self.base
    }
    pub fn gens(&self) -> &[usize] {
        &self.gens
    }
    pub fn lens(&self) -> &[usize] {
        &self.lens
    }
    pub fn dim(&self) -> usize {
        self.gens.len()
    }
    pub fn is_proper(&self) -> bool {
        self.proper
    }
    pub fn members(&self) -> &SubsetZn {
        &self.members
    }
    pub fn density(&self) -> f64 {
        self.members.density()
    }

    /// Group element for a coordinate vector (entries may exceed lengths).
    pub fn point(&self, coords: &[i64]) -> usize {
        let ni = self.n as i64;
        let mut x = self.base as i64;
        for (i, &c) in coords.iter().enumerate() {
            x = (x + c.rem_euclid(ni) * self.gens[i] as i64) % ni;
        }
        x.rem_euclid(ni) as usize
    }

    /// Coordinates of every member, in odometer order.
    pub fn coord_iter(&self) -> CoordIter {
        CoordIter {
            lens: self.lens.clone(),
            next: Some(vec![0; self.lens.len()]),
        }
    }
}

pub struct CoordIter {
    lens: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for CoordIter {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let mut nxt = cur.clone();
        let mut carry = true;
        for i in (0..nxt.len()).rev() {
            nxt[i] += 1;
            if nxt[i] == self.lens[i] {
                nxt[i] = 0;
            } else {
                carry = false;
                break;
            }
        }
        if !carry {
            self.next = Some(nxt);
        }
        Some(cur)
    }
}

/// JSON form used by the CLI.
#[derive(Serialize, Deserialize)]
pub struct GapJson {
    pub schema_version: u32,
    pub modulus: usize,
    pub base: usize,
    pub gens: Vec<usize>,
    pub lens: Vec<usize>,
}

impl From<&Gap> for GapJson {
    fn from(p: &Gap) -> Self {
        GapJson {
            schema_version: 1,
            modulus: p.n,
            base: p.base,
            gens: p.gens.clone(),
            lens: p.lens.clone(),
        }
    }
}

/// Closure `A + B`, interior `{x : x + B subset A}`, and their difference.
pub fn relative_boundary(a: &SubsetZn, b: &SubsetZn) -> (SubsetZn, SubsetZn, SubsetZn) {
    let closure = a.sumset(b);
    let interior = a.interior_wrt(b);
    let boundary = closure.minus(&interior);
    (closure, interior, boundary)
}

/// The central subgrid `Q = {sum b_i g_i : 0 <= b_i < eps m_i / d}` of a
/// proper progression, together with exact measurements of the boundary
/// and density bounds it guarantees: the boundary of `P` relative to `Q`
/// has density at most `3 eps gamma`, and `Q` has density at least
/// `(eps/d)^d gamma`.
pub fn progression_centre(p: &Gap, eps: f64) -> Result<(Gap, Vec<CheckReport>)> {
    if !p.is_proper() {
        return Err(Error::Precondition("progression must be proper".into()));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Precondition(format!("eps must lie in (0, 1], got {eps}")));
    }
    let d = p.dim().max(1);
    let lens: Vec<usize> = p
        .lens()
        .iter()
        .map(|&m| ((eps * m as f64 / d as f64).ceil() as usize).clamp(1, m))
        .collect();
    let q = Gap::build(p.modulus(), 0, p.gens(), &lens)?;
    if q.members().count() == 0 {
        return Err(Error::EmptySet("central subgrid".into()));
    }
    let gamma = p.density();
    let (_, _, boundary) = relative_boundary(p.members(), q.members());
    let n = p.modulus() as f64;
    let reports = vec![
        CheckReport::new(
            "progression-centre-boundary",
            boundary.count() as f64 / n,
            3.0 * eps * gamma,
            format!("N={} lens={:?} eps={eps}", p.modulus(), p.lens()),
        ),
        CheckReport::new(
            "progression-centre-density",
            (eps / d as f64).powi(d as i32) * gamma,
            q.density(),
            format!("N={} lens={:?} eps={eps}", p.modulus(), p.lens()),
        ),
    ];
    Ok((q, reports))
}

/// Base of the progression cover bound `3^d / gamma`.
pub const GAP_COVER_BASE: f64 = 3.0;

/// Covering of `Z_N` by translates of a proper progression via greedy
/// packing of the half-length subgrid; union and cardinality bound are
/// certified by enumeration.
pub fn gap_cover(p: &Gap) -> Result<crate::bohr::Cover> {
    if !p.is_proper() {
        return Err(Error::Precondition("progression must be proper".into()));
    }
    let n = p.modulus();
    if p.members().count() == n {
        return Ok(crate::bohr::Cover {
            translates: vec![0],
            bound: GAP_COVER_BASE.powi(p.dim() as i32),
            covers: true,
        });
    }
    let half_lens: Vec<usize> = p.lens().iter().map(|&m| m.div_ceil(2)).collect();
    let half = Gap::build(n, 0, p.gens(), &half_lens)?;
    let halfdiff = half.members().sumset(&half.members().negate());
    let mut centers = Vec::new();
    let mut blocked = SubsetZn::empty(n);
    for x in 0..n {
        if !blocked.contains(x) {
            centers.push(x);
            blocked = blocked.union(&halfdiff.translate(x));
        }
    }
    // Shift so that translates of P itself cover: u - z with z the
    // half-length corner offset.
    let z: usize = {
        let mut acc = 0usize;
        for (&g, &m) in p.gens().iter().zip(p.lens()) {
            acc = (acc + (m / 2) * (g % n)) % n;
        }
        acc
    };
    let translates: Vec<usize> = centers
        .iter()
        .map(|&u| (u + n - z + n - p.base()) % n)
        .collect();
    let mut union = SubsetZn::empty(n);
    for &t in &translates {
        union = union.union(&p.members().translate(t));
    }
    Ok(crate::bohr::Cover {
        translates,
        bound: GAP_COVER_BASE.powi(p.dim() as i32) / p.density(),
        covers: union.count() == n,
    })
}

/// Outcome of the progression-in-Bohr-set search. The containment
/// `2Q - 2Q` inside the Bohr set is verified exhaustively; the density
/// targets are informational.
#[derive(Debug, Clone, Serialize)]
pub struct GapInBohr {
    #[serde(skip)]
    pub gap: Gap,
    pub density: f64,
    pub target_full: f64,
    pub target_halved: f64,
}

fn run_in_bohr(b: &BohrSet, gens: &[usize]) -> Option<Vec<usize>> {
    // Largest per-coordinate lengths m_i such that every combination
    // sum_i j_i g_i with |j_i| <= 2(m_i - 1) stays inside B, grown greedily
    // one coordinate at a time.
    let mut lens = vec![1usize; gens.len()];
    let fits = |lens: &[usize]| -> bool {
        let half: Vec<usize> = lens.iter().map(|&m| 2 * (m - 1)).collect();
        match Gap::symmetric_box(b.modulus(), gens, &half) {
            Ok(bx) => bx.members().is_subset_of(b.members()),
            Err(_) => false,
        }
    };
    if !fits(&lens) {
        return None;
    }
    loop {
        let mut grew = false;
        for i in 0..lens.len() {
            let mut trial = lens.clone();
            trial[i] += 1;
            if fits(&trial) {
                // Also require properness of the candidate progression.
                let g = Gap::build(b.modulus(), 0, gens, &trial).ok()?;
                if g.is_proper() {
                    lens = trial;
                    grew = true;
                }
            }
        }
        if !grew {
            return Some(lens);
        }
    }
}

/// Candidate generators from continued-fraction convergents of `r / N`.
fn convergent_denominators(r: u64, n: usize) -> Vec<usize> {
    let mut out = vec![1usize];
    for (_, q) in convergents(r as f64 / n as f64, n as i128) {
        let q = q as usize;
        if q > 0 && q < n && !out.contains(&q) {
            out.push(q);
        }
    }
    out.truncate(12);
    out
}

/// Best-effort search for a proper progression `Q` with `2Q - 2Q` inside
/// the Bohr set: continued-fraction convergents for one frequency,
/// exhaustion over candidate generator pairs for two. Returns the densest
/// verified find; density is compared to the `(rho/d)^d` and `(rho/2d)^d`
/// targets without asserting them.
pub fn find_gap_in_bohr(b: &BohrSet, d_target: usize) -> Result<GapInBohr> {
    let n = b.modulus();
    let d = b.dim();
    if d_target == 0 || (d > 0 && d_target > d) || d_target > 2 {
        return Err(Error::Precondition(format!(
            "search supports 1 <= d_target <= min(|K|, 2), got {d_target} with |K|={d}"
        )));
    }
    if b.members().count() == n {
        // Whole group: a single full interval.
        let gap = Gap::build(n, 0, &[1], &[n])?;
        return Ok(GapInBohr {
            density: gap.density(),
            gap,
            target_full: 1.0,
            target_halved: 1.0,
        });
    }
    let mut cands: Vec<usize> = Vec::new();
    for &r in b.freqs() {
        for q in convergent_denominators(r, n) {
            if !cands.contains(&q) {
                cands.push(q);
            }
        }
    }
    let mut best: Option<Gap> = None;
    let mut consider = |g: Gap| {
        if g.is_proper() {
            let denser = best.as_ref().map_or(true, |cur| {
                g.members().count() > cur.members().count()
            });
            if denser {
                best = Some(g);
            }
        }
    };
    if d_target == 1 {
        for &g in &cands {
            if let Some(lens) = run_in_bohr(b, &[g]) {
                if let Ok(gap) = Gap::build(n, 0, &[g], &lens) {
                    consider(gap);
                }
            }
        }
    } else {
        for (i, &g1) in cands.iter().enumerate() {
            for &g2 in cands.iter().skip(i + 1) {
                if let Some(lens) = run_in_bohr(b, &[g1, g2]) {
                    if lens.iter().all(|&m| m > 1) {
                        if let Ok(gap) = Gap::build(n, 0, &[g1, g2], &lens) {
                            consider(gap);
                        }
                    }
                }
            }
        }
    }
    let gap = best.ok_or_else(|| {
        Error::SearchFailed(format!(
            "no proper progression with verified containment found (N={n}, K={:?}, candidates {cands:?})",
            b.freqs()
        ))
    })?;
    // Exhaustive verification of the containment certificate.
    let twice = gap.members().sumset(gap.members());
    let diff = twice.sumset(&twice.negate());
    if !diff.is_subset_of(b.members()) {
        return Err(Error::SearchFailed("containment certificate failed".into()));
    }
    let dd = d_target as f64;
    Ok(GapInBohr {
        density: gap.density(),
        target_full: (b.rho() / dd).powf(dd),
        target_halved: (b.rho() / (2.0 * dd)).powf(dd),
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn build_examples() {
        let p = Gap::build(101, 0, &[1], &[5]).unwrap();
        assert_eq!(p.members().members(), vec![0, 1, 2, 3, 4]);
        assert!(p.is_proper());

        // Generator 2, length 101 wraps all the way around Z_101 without
        // collision.
        let p = Gap::build(101, 0, &[2], &[101]).unwrap();
        assert!(p.is_proper());
        assert_eq!(p.members().count(), 101);

        let p = Gap::build(101, 0, &[1, 10], &[3, 3]).unwrap();
        assert!(p.is_proper());
        assert_eq!(p.members().count(), 9);

        // A genuine collision: generator 2 with length 102 in Z_101.
        let p = Gap::build(101, 0, &[2], &[102]).unwrap();
        assert!(!p.is_proper());
    }

    #[test]
    fn relative_boundary_examples() {
        let n = 101;
        let point = SubsetZn::from_members(n, [0]);
        let a = SubsetZn::from_members(n, 0..10);
        let (cl, int, bd) = relative_boundary(&a, &point);
        assert_eq!(cl.members(), a.members());
        assert_eq!(int.members(), a.members());
        assert_eq!(bd.count(), 0);

        let b = SubsetZn::from_members(n, [0, 1]);
        let (cl, int, bd) = relative_boundary(&a, &b);
        assert_eq!(cl.members(), (0..11).collect::<Vec<_>>());
        assert_eq!(int.members(), (0..9).collect::<Vec<_>>());
        assert_eq!(bd.members(), vec![9, 10]);
    }

    #[test]
    fn relative_boundary_matches_double_loop_oracle() {
        let n = 64;
        let mut g = SplitMix64::new(17);
        let a = SubsetZn::from_pred(n, |_| g.next_f64() < 0.4);
        let b = SubsetZn::from_pred(n, |_| g.next_f64() < 0.15);
        let (cl, int, _) = relative_boundary(&a, &b);
        // Oracle: plain double loops.
        let mut cl2 = SubsetZn::empty(n);
        for x in a.members() {
            for y in b.members() {
                cl2.insert((x + y) % n);
            }
        }
        assert_eq!(cl.members(), cl2.members());
        let int2 = SubsetZn::from_pred(n, |x| {
            b.members().iter().all(|&y| a.contains((x + y) % n))
        });
        assert_eq!(int.members(), int2.members());
    }

    #[test]
    fn progression_centre_examples() {
        let n = 1009;
        let p = Gap::build(n, 0, &[1], &[100]).unwrap();
        let (q, reports) = progression_centre(&p, 0.1).unwrap();
        assert_eq!(q.members().count(), 10);
        for r in &reports {
            assert!(r.pass, "{}: margin {}", r.check_id, r.margin);
        }

        let p = Gap::build(n, 3, &[1, 40], &[20, 20]).unwrap();
        assert!(p.is_proper());
        let (_, reports) = progression_centre(&p, 0.2).unwrap();
        for r in &reports {
            assert!(r.pass, "{}: margin {}", r.check_id, r.margin);
        }

        // eps = 1 in one dimension: the subgrid is the whole pattern and the
        // boundary density bound 3 gamma holds trivially.
        let p = Gap::build(n, 0, &[7], &[30]).unwrap();
        let (q, reports) = progression_centre(&p, 1.0).unwrap();
        assert_eq!(q.members().count(), 30);
        assert!(reports.iter().all(|r| r.pass));
    }

    #[test]
    fn gap_cover_examples() {
        // Whole group as a 1-dimensional progression: one translate.
        let p = Gap::build(60, 0, &[1], &[60]).unwrap();
        let c = gap_cover(&p).unwrap();
        assert!(c.covers && c.translates.len() == 1);

        let p = Gap::build(101, 0, &[1], &[10]).unwrap();
        let c = gap_cover(&p).unwrap();
        assert!(c.covers);
        assert!(c.translates.len() as f64 <= c.bound + 1e-9);
        assert!(c.translates.len() <= 31);

        let p = Gap::build(101, 0, &[1, 11], &[4, 4]).unwrap();
        let c = gap_cover(&p).unwrap();
        assert!(c.covers);
        assert!(c.translates.len() as f64 <= c.bound + 1e-9);
    }

    #[test]
    fn find_gap_full_group() {
        let b = BohrSet::full(55);
        let r = find_gap_in_bohr(&b, 1).unwrap();
        assert_eq!(r.gap.members().count(), 55);
    }

    #[test]
    fn find_gap_tiny_bohr_interval() {
        // B({1}, 1) in Z_12 is {-2..2}; the containment condition caps the
        // run at length 2.
        let b = BohrSet::build(12, &[1], 1.0).unwrap();
        let r = find_gap_in_bohr(&b, 1).unwrap();
        assert!(r.gap.members().count() <= 2);
        let q = &r.gap;
        let twice = q.members().sumset(q.members());
        let diff = twice.sumset(&twice.negate());
        assert!(diff.is_subset_of(b.members()));
    }

    #[test]
    fn find_gap_uses_convergents() {
        let b = BohrSet::build(101, &[7], 0.5).unwrap();
        let r = find_gap_in_bohr(&b, 1).unwrap();
        assert!(r.gap.is_proper());
        assert!(r.gap.members().count() >= 2);
        // Containment verified inside the search; double-check here.
        let twice = r.gap.members().sumset(r.gap.members());
        let diff = twice.sumset(&twice.negate());
        assert!(diff.is_subset_of(b.members()));
    }

    #[test]
    fn find_gap_two_dimensional() {
        let b = BohrSet::build(401, &[1, 17], 1.2).unwrap();
        let r = find_gap_in_bohr(&b, 2).unwrap();
        assert_eq!(r.gap.dim(), 2);
        assert!(r.gap.is_proper());
    }
}
