//! Quadratic and bilinear phase data: global `a x^2 + b x + c` forms,
//! progression-coordinate forms, Freiman and quadratic homomorphism
//! checkers, and rank of a phase relative to a probe set.
//!
//! The rank of `q` relative to `P` is `log(1/alpha)` (natural log) with
//! `alpha = |E_{a,a',b,b' in P} omega^{q(a+b-a'-b') - q(a-a') - q(b-b')}|`.
//! The default evaluation reorganizes the four-fold sum through difference
//! multiplicities, `O(|P-P|^2)` instead of `O(|P|^4)`; the literal sum is
//! kept as an oracle for small probes. Exact cancellation (`alpha = 0`)
//! reports rank `+inf`, which downstream comparisons treat as larger than
//! any threshold.
//!
//! Everything here requires odd `N` so that 2 is invertible.

use crate::gap::Gap;
use crate::sum::pairwise_sum;
use crate::zn::{omega_table, SubsetZn};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::HashMap;

fn require_odd(n: usize) -> Result<()> {
    if n % 2 == 0 || n < 3 {
        return Err(Error::Precondition(format!(
            "quadratic machinery requires odd modulus >= 3, got {n}"
        )));
    }
    Ok(())
}

/// A quadratic form, either global on `Z_N` or in the coordinates of a
/// proper progression chart.
#[derive(Debug, Clone)]
pub enum QuadForm {
    Global {
        n: usize,
        a: u64,
        b: u64,
        c: u64,
    },
    GapCoords {
        /// Symmetric coefficient matrix, `q = sum a_ij c_i c_j + sum b_i c_i + c0`.
        a_mat: Vec<Vec<u64>>,
        b_vec: Vec<u64>,
        c0: u64,
        chart: Gap,
        /// Group element -> chart coordinates; unique because the chart is
        /// proper.
        #[doc(hidden)]
        lookup: HashMap<usize, Vec<i64>>,
    },
}

impl QuadForm {
    pub fn global(n: usize, a: u64, b: u64, c: u64) -> Result<Self> {
        require_odd(n)?;
        let nn = n as u64;
        Ok(QuadForm::Global {
            n,
            a: a % nn,
            b: b % nn,
            c: c % nn,
        })
    }

    /// Coordinate form on a proper chart. The matrix is symmetrized
    /// (entries must permit halving, which odd `N` guarantees).
    pub fn gap_coords(a_mat: Vec<Vec<u64>>, b_vec: Vec<u64>, c0: u64, chart: Gap) -> Result<Self> {
        let n = chart.modulus();
        require_odd(n)?;
        if !chart.is_proper() {
            return Err(Error::Precondition("chart must be proper".into()));
        }
        let d = chart.dim();
        if a_mat.len() != d || a_mat.iter().any(|r| r.len() != d) || b_vec.len() != d {
            return Err(Error::Precondition("coefficient dimensions mismatch chart".into()));
        }
        let nn = n as u64;
        let inv2 = (n as u64 + 1) / 2; // 2^{-1} mod N for odd N
        let mut sym = vec![vec![0u64; d]; d];
        for i in 0..d {
            for j in 0..d {
                sym[i][j] = (a_mat[i][j] % nn + a_mat[j][i] % nn) % nn * inv2 % nn;
            }
        }
        let mut lookup = HashMap::new();
        for coords in chart.coord_iter() {
            let signed: Vec<i64> = coords.iter().map(|&c| c as i64).collect();
            let x = chart.point(&signed);
            lookup.insert(x, signed);
        }
        Ok(QuadForm::GapCoords {
            a_mat: sym,
            b_vec: b_vec.iter().map(|&b| b % nn).collect(),
            c0: c0 % nn,
            chart,
            lookup,
        })
    }

    pub fn modulus(&self) -> usize {
        match self {
            QuadForm::Global { n, .. } => *n,
            QuadForm::GapCoords { chart, .. } => chart.modulus(),
        }
    }

    /// Value at a group element, when in the form's domain.
    pub fn eval(&self, x: usize) -> Option<u64> {
        match self {
            QuadForm::Global { n, a, b, c } => {
                let nn = *n as u64;
                let x = (x % n) as u64;
                Some((a * (x * x % nn) % nn + b * x % nn + c) % nn)
            }
            QuadForm::GapCoords { lookup, .. } => {
                let coords = lookup.get(&(x % self.modulus()))?;
                Some(self.eval_coords(coords))
            }
        }
    }

    /// Value at a coordinate vector (coordinate forms only; global forms
    /// take `coords[0]` as the group element).
    pub fn eval_coords(&self, coords: &[i64]) -> u64 {
        let n = self.modulus() as i64;
        match self {
            QuadForm::Global { a, b, c, .. } => {
                let x = coords[0].rem_euclid(n);
                ((*a as i64 % n * (x * x % n) % n + *b as i64 % n * x % n + *c as i64 % n)
                    .rem_euclid(n)) as u64
            }
            QuadForm::GapCoords {
                a_mat, b_vec, c0, ..
            } => {
                let mut acc = *c0 as i64 % n;
                for (i, &ci) in coords.iter().enumerate() {
                    let ci = ci.rem_euclid(n);
                    acc = (acc + b_vec[i] as i64 % n * ci) % n;
                    for (j, &cj) in coords.iter().enumerate() {
                        let cj = cj.rem_euclid(n);
                        acc = (acc + a_mat[i][j] as i64 % n * ci % n * cj) % n;
                    }
                }
                acc.rem_euclid(n) as u64
            }
        }
    }

    /// `q(. - w)` (global forms).
    pub fn translate(&self, w: usize) -> Result<QuadForm> {
        match self {
            QuadForm::Global { n, a, b, c } => {
                let ni = *n as i64;
                let w = (w % n) as i64;
                let (a, b, c) = (*a as i64, *b as i64, *c as i64);
                let b2 = (b - 2 * a % ni * w).rem_euclid(ni);
                let c2 = (a * (w * w % ni) % ni - b * w % ni + c).rem_euclid(ni);
                QuadForm::global(*n, a as u64, b2 as u64, c2 as u64)
            }
            QuadForm::GapCoords { .. } => Err(Error::Precondition(
                "translate is only defined for global forms".into(),
            )),
        }
    }

    /// `q + (u x + v)` (global) or `q + (sum u_i c_i + v)` (coordinates).
    pub fn add_affine(&self, u: &[u64], v: u64) -> Result<QuadForm> {
        let nn = self.modulus() as u64;
        match self {
            QuadForm::Global { n, a, b, c } => {
                if u.len() != 1 {
                    return Err(Error::Precondition("global forms take one slope".into()));
                }
                QuadForm::global(*n, *a, (b + u[0]) % nn, (c + v) % nn)
            }
            QuadForm::GapCoords {
                a_mat,
                b_vec,
                c0,
                chart,
                lookup,
            } => {
                if u.len() != b_vec.len() {
                    return Err(Error::Precondition("slope dimension mismatch".into()));
                }
                Ok(QuadForm::GapCoords {
                    a_mat: a_mat.clone(),
                    b_vec: b_vec
                        .iter()
                        .zip(u)
                        .map(|(&b, &ui)| (b + ui % nn) % nn)
                        .collect(),
                    c0: (c0 + v) % nn,
                    chart: chart.clone(),
                    lookup: lookup.clone(),
                })
            }
        }
    }

    /// `q1 - q2` for two global forms on the same modulus.
    pub fn sub_global(&self, other: &QuadForm) -> Result<QuadForm> {
        match (self, other) {
            (
                QuadForm::Global { n, a, b, c },
                QuadForm::Global {
                    n: n2,
                    a: a2,
                    b: b2,
                    c: c2,
                },
            ) => {
                if n != n2 {
                    return Err(Error::ModulusMismatch(*n, *n2));
                }
                let nn = *n as u64;
                QuadForm::global(
                    *n,
                    (a + nn - *a2) % nn,
                    (b + nn - *b2) % nn,
                    (c + nn - *c2) % nn,
                )
            }
            _ => Err(Error::Precondition("difference needs two global forms".into())),
        }
    }

    /// Purely quadratic coefficient data of the associated bilinear form
    /// `beta(u, v) = q(u+v) - q(u) - q(v) + q(0)`.
    pub fn bilinear(&self) -> BilinForm {
        match self {
            QuadForm::Global { n, a, .. } => BilinForm::Global {
                n: *n,
                coeff: 2 * a % *n as u64,
            },
            QuadForm::GapCoords { a_mat, chart, .. } => {
                let nn = chart.modulus() as u64;
                BilinForm::GapCoords {
                    n: chart.modulus(),
                    coeffs: a_mat
                        .iter()
                        .map(|row| row.iter().map(|&v| 2 * v % nn).collect())
                        .collect(),
                }
            }
        }
    }
}

/// A true bilinear form (Freiman in each variable separately, vanishing at
/// zero): `t u v` globally, or `sum_ij t_ij u_i v_j` in coordinates.
#[derive(Debug, Clone)]
pub enum BilinForm {
    Global { n: usize, coeff: u64 },
    GapCoords { n: usize, coeffs: Vec<Vec<u64>> },
}

impl BilinForm {
    pub fn modulus(&self) -> usize {
        match self {
            BilinForm::Global { n, .. } => *n,
            BilinForm::GapCoords { n, .. } => *n,
        }
    }

    /// Sum of two forms on the same structure.
    pub fn add(&self, other: &BilinForm) -> Result<BilinForm> {
        match (self, other) {
            (BilinForm::Global { n, coeff }, BilinForm::Global { n: n2, coeff: c2 }) => {
                if n != n2 {
                    return Err(Error::ModulusMismatch(*n, *n2));
                }
                Ok(BilinForm::Global {
                    n: *n,
                    coeff: (coeff + c2) % *n as u64,
                })
            }
            (BilinForm::GapCoords { n, coeffs }, BilinForm::GapCoords { n: n2, coeffs: d2 }) => {
                if n != n2 || coeffs.len() != d2.len() {
                    return Err(Error::Precondition("bilinear shapes differ".into()));
                }
                let nn = *n as u64;
                Ok(BilinForm::GapCoords {
                    n: *n,
                    coeffs: coeffs
                        .iter()
                        .zip(d2)
                        .map(|(r1, r2)| r1.iter().zip(r2).map(|(&a, &b)| (a + b) % nn).collect())
                        .collect(),
                })
            }
            _ => Err(Error::Precondition("mixed bilinear kinds".into())),
        }
    }

    pub fn scale(&self, t: i64) -> BilinForm {
        let n = self.modulus() as i64;
        let t = t.rem_euclid(n) as u64;
        match self {
            BilinForm::Global { n, coeff } => BilinForm::Global {
                n: *n,
                coeff: coeff * t % *n as u64,
            },
            BilinForm::GapCoords { n, coeffs } => BilinForm::GapCoords {
                n: *n,
                coeffs: coeffs
                    .iter()
                    .map(|r| r.iter().map(|&v| v * t % *n as u64).collect())
                    .collect(),
            },
        }
    }

    /// Evaluate on group elements (global) — arguments are residues.
    pub fn eval_global(&self, u: usize, v: usize) -> u64 {
        match self {
            BilinForm::Global { n, coeff } => {
                let nn = *n as u64;
                coeff * ((u as u64 % nn) * (v as u64 % nn) % nn) % nn
            }
            BilinForm::GapCoords { .. } => panic!("coordinate form evaluated on group elements"),
        }
    }

    /// Evaluate on coordinate vectors.
    pub fn eval_coords(&self, u: &[i64], v: &[i64]) -> u64 {
        let n = self.modulus() as i64;
        match self {
            BilinForm::Global { coeff, .. } => {
                let a = u[0].rem_euclid(n);
                let b = v[0].rem_euclid(n);
                (*coeff as i64 % n * (a * b % n)).rem_euclid(n) as u64
            }
            BilinForm::GapCoords { coeffs, .. } => {
                let mut acc = 0i64;
                for (i, &ui) in u.iter().enumerate() {
                    for (j, &vj) in v.iter().enumerate() {
                        acc = (acc
                            + coeffs[i][j] as i64 % n * (ui.rem_euclid(n)) % n * (vj.rem_euclid(n)))
                            % n;
                    }
                }
                acc.rem_euclid(n) as u64
            }
        }
    }
}

/// An additive map given by a table on its domain.
#[derive(Debug, Clone)]
pub struct PartialMap {
    pub n: usize,
    pub table: HashMap<usize, u64>,
}

impl PartialMap {
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, u64)>) -> Self {
        PartialMap {
            n,
            table: pairs.into_iter().map(|(x, v)| (x % n, v % n as u64)).collect(),
        }
    }

    pub fn affine(n: usize, domain: &SubsetZn, u: u64, v: u64) -> Self {
        let nn = n as u64;
        PartialMap {
            n,
            table: domain
                .members()
                .into_iter()
                .map(|x| (x, (u % nn * (x as u64) % nn + v) % nn))
                .collect(),
        }
    }
}

/// First counterexample to the additive Freiman property, if any:
/// `phi(x+d) - phi(x) != phi(y+d) - phi(y)`.
pub fn check_freiman_hom(phi: &PartialMap) -> Option<(usize, usize, usize)> {
    let n = phi.n as i64;
    let domain: Vec<usize> = {
        let mut v: Vec<usize> = phi.table.keys().copied().collect();
        v.sort_unstable();
        v
    };
    // For each difference d, the increment phi(x+d) - phi(x) must not
    // depend on x.
    let mut seen: HashMap<usize, (i64, usize)> = HashMap::new();
    for &x in &domain {
        for &xd in &domain {
            let d = (xd + phi.n - x) % phi.n;
            let inc = (phi.table[&xd] as i64 - phi.table[&x] as i64).rem_euclid(n);
            match seen.get(&d) {
                None => {
                    seen.insert(d, (inc, x));
                }
                Some(&(first, y)) => {
                    if first != inc {
                        return Some((y, x, d));
                    }
                }
            }
        }
    }
    None
}

/// First counterexample to the multiplicative Freiman property of a
/// unimodular map, to tolerance `tol`.
pub fn check_freiman_hom_mult(
    n: usize,
    values: &HashMap<usize, Complex64>,
    tol: f64,
) -> Option<(usize, usize, usize)> {
    let domain: Vec<usize> = {
        let mut v: Vec<usize> = values.keys().copied().collect();
        v.sort_unstable();
        v
    };
    let mut seen: HashMap<usize, (Complex64, usize)> = HashMap::new();
    for &x in &domain {
        for &xd in &domain {
            let d = (xd + n - x) % n;
            let ratio = values[&xd] * values[&x].conj();
            match seen.get(&d) {
                None => {
                    seen.insert(d, (ratio, x));
                }
                Some(&(first, y)) => {
                    if (first - ratio).norm() > tol {
                        return Some((y, x, d));
                    }
                }
            }
        }
    }
    None
}

/// First counterexample to the additive quadratic homomorphism identity
/// (the eight-point alternating sum), if any. Exhaustive over in-domain
/// configurations; meant for small domains.
pub fn check_quadratic_hom(q: &PartialMap) -> Option<(usize, usize, usize, usize)> {
    let n = q.n;
    let ni = n as i64;
    let domain: Vec<usize> = {
        let mut v: Vec<usize> = q.table.keys().copied().collect();
        v.sort_unstable();
        v
    };
    let get = |x: usize| q.table.get(&(x % n)).copied();
    for &x in &domain {
        // a, b, c range over shifts that keep x+a, x+b, x+c in the domain.
        let shifts: Vec<usize> = domain.iter().map(|&p| (p + n - x) % n).collect();
        for &a in &shifts {
            for &b in &shifts {
                for &c in &shifts {
                    let pts = [
                        (x, 1i64),
                        ((x + a) % n, -1),
                        ((x + b) % n, -1),
                        ((x + c) % n, -1),
                        ((x + a + b) % n, 1),
                        ((x + a + c) % n, 1),
                        ((x + b + c) % n, 1),
                        ((x + a + b + c) % n, -1),
                    ];
                    let mut acc = 0i64;
                    let mut ok = true;
                    for (p, s) in pts {
                        match get(p) {
                            Some(v) => acc = (acc + s * v as i64).rem_euclid(ni),
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok && acc != 0 {
                        return Some((x, a, b, c));
                    }
                }
            }
        }
    }
    None
}

/// Rank report: `alpha`, `rank = ln(1/alpha)`, and how the domain
/// verification went.
#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub alpha: f64,
    pub rank: f64,
    pub probe_size: usize,
    pub domain_ok: bool,
}

impl RankReport {
    fn from_alpha(alpha: f64, probe_size: usize, domain_ok: bool) -> Self {
        let rank = if alpha <= 0.0 {
            f64::INFINITY
        } else {
            (1.0 / alpha).ln().max(0.0)
        };
        RankReport {
            alpha,
            rank,
            probe_size,
            domain_ok,
        }
    }
}

/// `alpha` by the difference-representation method: the four-fold sum over
/// `P` reorganized as a double sum over `P - P` weighted by difference
/// multiplicities.
pub fn rank_alpha(q: &QuadForm, probe: &[usize]) -> Result<f64> {
    let n = q.modulus();
    if probe.is_empty() {
        return Err(Error::EmptySet("rank probe".into()));
    }
    // Difference multiplicities r(u) = #{(a, a') in P^2 : a - a' = u}.
    let mut mult: HashMap<usize, f64> = HashMap::new();
    for &a in probe {
        for &ap in probe {
            *mult.entry((a + n - ap) % n).or_insert(0.0) += 1.0;
        }
    }
    let diffs: Vec<(usize, f64)> = {
        let mut v: Vec<(usize, f64)> = mult.into_iter().collect();
        v.sort_unstable_by_key(|&(u, _)| u);
        v
    };
    let w = omega_table(n);
    let q_at = |x: usize| -> Result<u64> {
        q.eval(x)
            .ok_or_else(|| Error::Precondition(format!("form undefined at {x}")))
    };
    // Cache q on the needed points.
    let mut qd: HashMap<usize, u64> = HashMap::new();
    for &(u, _) in &diffs {
        qd.insert(u, q_at(u)?);
    }
    let nn = n as u64;
    let total = pairwise_sum::<Complex64, _>(diffs.len() * diffs.len(), |i| {
        let (u, ru) = diffs[i / diffs.len()];
        let (v, rv) = diffs[i % diffs.len()];
        let quv = match q.eval((u + v) % n) {
            Some(t) => t,
            None => return Complex64::new(f64::NAN, 0.0),
        };
        let k = ((quv + 2 * nn) - qd[&u] - qd[&v]) % nn;
        w[k as usize] * (ru * rv)
    });
    if total.re.is_nan() {
        return Err(Error::Precondition("form undefined on a needed difference sum".into()));
    }
    let p4 = (probe.len() as f64).powi(4);
    Ok((total / p4).norm())
}

/// Literal four-fold sum, the oracle for small probes.
pub fn rank_alpha_literal(q: &QuadForm, probe: &[usize]) -> Result<f64> {
    let n = q.modulus();
    if probe.is_empty() {
        return Err(Error::EmptySet("rank probe".into()));
    }
    let w = omega_table(n);
    let nn = n as u64;
    let m = probe.len();
    let q_at = |x: usize| -> Result<u64> {
        q.eval(x)
            .ok_or_else(|| Error::Precondition(format!("form undefined at {x}")))
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for &a in probe {
        for &ap in probe {
            for &b in probe {
                for &bp in probe {
                    let s = (a + b + 2 * n - ap - bp) % n;
                    let u = (a + n - ap) % n;
                    let v = (b + n - bp) % n;
                    let k = ((q_at(s)? + 2 * nn) - q_at(u)? - q_at(v)?) % nn;
                    acc += w[k as usize];
                }
            }
        }
    }
    Ok((acc / (m * m * m * m) as f64).norm())
}

/// `alpha_P(beta)` for a true bilinear form, via difference multiplicities.
/// The value is real and nonnegative up to rounding.
pub fn bilinear_alpha(beta: &BilinForm, probe: &[usize]) -> f64 {
    let n = beta.modulus();
    let mut mult: HashMap<usize, f64> = HashMap::new();
    for &a in probe {
        for &ap in probe {
            *mult.entry((a + n - ap) % n).or_insert(0.0) += 1.0;
        }
    }
    let diffs: Vec<(usize, f64)> = {
        let mut v: Vec<(usize, f64)> = mult.into_iter().collect();
        v.sort_unstable_by_key(|&(u, _)| u);
        v
    };
    let w = omega_table(n);
    let total = pairwise_sum::<Complex64, _>(diffs.len() * diffs.len(), |i| {
        let (u, ru) = diffs[i / diffs.len()];
        let (v, rv) = diffs[i % diffs.len()];
        w[beta.eval_global(u, v) as usize] * (ru * rv)
    });
    let p4 = (probe.len() as f64).powi(4);
    (total / p4).re.max(0.0)
}

/// `alpha` over a coordinate box probe `prod [0, m_i)` for a coordinate
/// form, via per-coordinate difference multiplicities.
pub fn bilinear_alpha_coords(beta: &BilinForm, lens: &[usize]) -> f64 {
    let n = beta.modulus();
    let w = omega_table(n);
    // Differences range over prod (-(m_i - 1) .. m_i - 1) with multiplicity
    // prod (m_i - |u_i|).
    let dims = lens.len();
    let mut diffs: Vec<(Vec<i64>, f64)> = vec![(vec![], 1.0)];
    for i in 0..dims {
        let mut next = Vec::new();
        for (prefix, mf) in &diffs {
            let m = lens[i] as i64;
            for u in -(m - 1)..m {
                let mut p = prefix.clone();
                p.push(u);
                next.push((p, mf * (m - u.abs()) as f64));
            }
        }
        diffs = next;
    }
    let total = pairwise_sum::<Complex64, _>(diffs.len() * diffs.len(), |i| {
        let (u, ru) = &diffs[i / diffs.len()];
        let (v, rv) = &diffs[i % diffs.len()];
        w[beta.eval_coords(u, v) as usize] * (ru * rv)
    });
    let p4: f64 = lens.iter().map(|&m| m as f64).product::<f64>().powi(4);
    (total / p4).re.max(0.0)
}

/// Rank of `q` relative to `P`, with the domain chain `P subset Bp` and
/// `2Bp - 2Bp subset B` verified exhaustively.
pub fn rank(
    q: &QuadForm,
    probe: &SubsetZn,
    b: &crate::bohr::BohrSet,
    bp: &crate::bohr::BohrSet,
) -> Result<RankReport> {
    let n = q.modulus();
    if probe.n() != n || b.modulus() != n || bp.modulus() != n {
        return Err(Error::ModulusMismatch(probe.n(), n));
    }
    if !probe.is_subset_of(bp.members()) {
        return Err(Error::Precondition("probe must lie inside the inner Bohr set".into()));
    }
    let twice = bp.members().sumset(bp.members());
    let diff = twice.sumset(&twice.negate());
    if !diff.is_subset_of(b.members()) {
        return Err(Error::Precondition(
            "doubling of the inner Bohr set leaves the base".into(),
        ));
    }
    let members = probe.members();
    let alpha = rank_alpha(q, &members)?;
    Ok(RankReport::from_alpha(alpha, members.len(), true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohr::BohrSet;

    #[test]
    fn freiman_checker_examples() {
        let n = 101;
        let all = SubsetZn::from_members(n, 0..20);
        // Affine maps pass.
        let phi = PartialMap::affine(n, &all, 7, 3);
        assert!(check_freiman_hom(&phi).is_none());

        // x^2 on {0,1,2,3} fails with the hand-computed witness.
        let sq = PartialMap::from_pairs(n, (0..4usize).map(|x| (x, (x * x) as u64)));
        let w = check_freiman_hom(&sq);
        assert!(w.is_some());
        let (x, y, d) = w.unwrap();
        // increments differ: phi(x+d)-phi(x) != phi(y+d)-phi(y)
        let f = |t: usize| ((t * t) as u64) % n as u64;
        assert_ne!(
            (f(x + d) + n as u64 - f(x)) % n as u64,
            (f(y + d) + n as u64 - f(y)) % n as u64
        );
    }

    #[test]
    fn gap_affine_is_freiman() {
        let n = 101;
        let chart = Gap::build(n, 5, &[1, 10], &[4, 4]).unwrap();
        assert!(chart.is_proper());
        let mut pairs = Vec::new();
        for coords in chart.coord_iter() {
            let signed: Vec<i64> = coords.iter().map(|&c| c as i64).collect();
            let x = chart.point(&signed);
            let v = (3 * coords[0] as u64 + 7 * coords[1] as u64 + 2) % n as u64;
            pairs.push((x, v));
        }
        let phi = PartialMap::from_pairs(n, pairs);
        assert!(check_freiman_hom(&phi).is_none());
    }

    #[test]
    fn quadratic_checker_examples() {
        let n = 101;
        // Global quadratics pass on any domain.
        let q = QuadForm::global(n, 3, 5, 1).unwrap();
        let dom = SubsetZn::from_members(n, 0..12);
        let table = PartialMap::from_pairs(
            n,
            dom.members().into_iter().map(|x| (x, q.eval(x).unwrap())),
        );
        assert!(check_quadratic_hom(&table).is_none());

        // x^3 fails on {0..5}.
        let cubic = PartialMap::from_pairs(n, (0..6usize).map(|x| (x, ((x * x * x) % n) as u64)));
        assert!(check_quadratic_hom(&cubic).is_some());

        // Quadratic plus affine still passes.
        let twisted = PartialMap::from_pairs(
            n,
            dom.members()
                .into_iter()
                .map(|x| (x, (q.eval(x).unwrap() + 11 * x as u64 + 4) % n as u64)),
        );
        assert!(check_quadratic_hom(&twisted).is_none());
    }

    #[test]
    fn rank_examples() {
        let n = 13;
        let full = SubsetZn::full(n);
        let members = full.members();

        // Linear form: alpha = 1, rank 0.
        let lin = QuadForm::global(n, 0, 5, 2).unwrap();
        let a = rank_alpha(&lin, &members).unwrap();
        assert!((a - 1.0).abs() < 1e-12);

        // x^2 over the full group: alpha = 1/13.
        let sq = QuadForm::global(n, 1, 0, 0).unwrap();
        let a = rank_alpha(&sq, &members).unwrap();
        assert!((a - 1.0 / 13.0).abs() < 1e-12);
        let b = BohrSet::full(n);
        let rep = rank(&sq, &full, &b, &b).unwrap();
        assert!((rep.rank - (13f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn rank_fast_equals_literal() {
        let n = 31;
        let probe: Vec<usize> = vec![0, 1, 2, 5, 8, 11, 30, 29];
        for (a, b, c) in [(1u64, 0u64, 0u64), (3, 7, 2), (0, 4, 1), (17, 30, 9)] {
            let q = QuadForm::global(n, a, b, c).unwrap();
            let fast = rank_alpha(&q, &probe).unwrap();
            let lit = rank_alpha_literal(&q, &probe).unwrap();
            assert!((fast - lit).abs() < 1e-10, "a={a} b={b} c={c}");
        }
    }

    #[test]
    fn rank_invariant_under_affine_shift() {
        let n = 31;
        let probe: Vec<usize> = (0..10).collect();
        let q = QuadForm::global(n, 5, 2, 7).unwrap();
        let base = rank_alpha(&q, &probe).unwrap();
        for (u, v) in [(3u64, 11u64), (29, 0), (16, 16)] {
            let shifted = q.add_affine(&[u], v).unwrap();
            let a = rank_alpha(&shifted, &probe).unwrap();
            assert!((a - base).abs() < 1e-12);
        }
    }

    #[test]
    fn coordinate_form_rank() {
        let n = 401;
        // Chart big enough to hold the differences the rank sum needs.
        let chart = Gap::symmetric_box(n, &[1, 45], &[20, 4]).unwrap();
        assert!(chart.is_proper());
        let q = QuadForm::gap_coords(
            vec![vec![3, 1], vec![1, 5]],
            vec![2, 9],
            4,
            chart.clone(),
        )
        .unwrap();
        // Probe: a small box inside the chart.
        let probe: Vec<usize> = {
            let inner = Gap::symmetric_box(n, &[1, 45], &[5, 1]).unwrap();
            inner.members().members()
        };
        let fast = rank_alpha(&q, &probe).unwrap();
        let lit = rank_alpha_literal(&q, &probe).unwrap();
        assert!((fast - lit).abs() < 1e-10);
    }

    #[test]
    fn rank_domain_check() {
        let n = 101;
        let q = QuadForm::global(n, 1, 0, 0).unwrap();
        let b = BohrSet::build(n, &[1], 0.5).unwrap();
        let bp = BohrSet::build(n, &[1], 0.4).unwrap();
        // 2Bp - 2Bp does not fit inside B at these widths.
        let probe = SubsetZn::from_members(n, bp.members().members().into_iter().take(3));
        assert!(rank(&q, &probe, &b, &bp).is_err());

        let bp = BohrSet::build(n, &[1], 0.12).unwrap();
        let probe = SubsetZn::from_members(n, bp.members().members());
        let rep = rank(&q, &probe, &b, &bp).unwrap();
        assert!(rep.domain_ok);
    }

    #[test]
    fn bilinear_alpha_positive_and_matches_quadratic_route() {
        let n = 31;
        let probe: Vec<usize> = (0..8).collect();
        let q = QuadForm::global(n, 5, 3, 1).unwrap();
        let beta = q.bilinear();
        let via_beta = bilinear_alpha(&beta, &probe);
        let via_q = rank_alpha(&q, &probe).unwrap();
        assert!((via_beta - via_q).abs() < 1e-12);

        // Coordinate-box route agrees with the group route on an interval.
        let beta = BilinForm::Global { n, coeff: 7 };
        let a1 = bilinear_alpha(&beta, &probe);
        let a2 = bilinear_alpha_coords(&beta, &[8]);
        assert!((a1 - a2).abs() < 1e-12);
    }

    #[test]
    fn even_modulus_rejected() {
        assert!(QuadForm::global(16, 1, 0, 0).is_err());
    }
}
