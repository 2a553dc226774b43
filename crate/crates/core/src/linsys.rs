//! Systems of linear forms: square independence with exact certificates,
//! Cauchy-Schwarz complexity by exhaustive partition search, exact pattern
//! counting, generalized von Neumann checking, and the quadratic-phase
//! probe over a whole coefficient family.

use crate::sum::pairwise_sum;
use crate::unorms::{u2_norm, u3_norm};
use crate::verify::CheckReport;
use crate::zn::{omega_table, GroupFn};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::time::Instant;

/// `r` integer linear forms in `s` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    coeffs: Vec<Vec<i64>>, // r rows, s columns
}

impl LinearSystem {
    pub fn new(coeffs: Vec<Vec<i64>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Precondition("no forms".into()));
        }
        let s = coeffs[0].len();
        if s == 0 || coeffs.iter().any(|row| row.len() != s) {
            return Err(Error::Precondition("ragged or empty coefficient rows".into()));
        }
        if coeffs.iter().any(|row| row.iter().all(|&c| c == 0)) {
            return Err(Error::Precondition("a form is identically zero".into()));
        }
        Ok(LinearSystem { coeffs })
    }

    /// Text format: one form per line, integer coefficients separated by
    /// spaces.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: std::result::Result<Vec<i64>, _> =
                line.split_whitespace().map(|t| t.parse::<i64>()).collect();
            rows.push(row.map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?);
        }
        LinearSystem::new(rows)
    }

    /// The r-term arithmetic progression system `x, x+y, ..., x+(r-1)y`.
    pub fn arithmetic_progression(r: usize) -> Self {
        LinearSystem {
            coeffs: (0..r).map(|i| vec![1, i as i64]).collect(),
        }
    }

    pub fn num_forms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn num_vars(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn coeffs(&self) -> &[Vec<i64>] {
        &self.coeffs
    }

    /// `M = max_j sum_u |c_{ju}|`.
    pub fn coefficient_bound(&self) -> i64 {
        self.coeffs
            .iter()
            .map(|row| row.iter().map(|c| c.abs()).sum::<i64>())
            .max()
            .unwrap()
    }

    /// Evaluates form `i` at `x` modulo `n`.
    pub fn eval_mod(&self, i: usize, x: &[usize], n: usize) -> usize {
        let ni = n as i64;
        let mut acc = 0i64;
        for (c, &xi) in self.coeffs[i].iter().zip(x) {
            acc = (acc + c.rem_euclid(ni) * (xi as i64)) % ni;
        }
        acc.rem_euclid(ni) as usize
    }
}

/// Exact rank of an integer matrix over the rationals by fraction-free
/// (Bareiss) elimination in `i128`.
fn rank_i128(mut m: Vec<Vec<i128>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev = 1i128;
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(row, p);
        for i in 0..rows {
            if i != row {
                for j in 0..cols {
                    if j != col {
                        m[i][j] = (m[i][j] * m[row][col] - m[i][col] * m[row][j]) / prev;
                    }
                }
                m[i][col] = 0;
            }
        }
        prev = m[row][col];
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Primitive integer left-nullspace vector of an integer matrix, if one
/// exists: `w` with `w . rows = 0`. Exact rational elimination.
fn left_nullspace(mat: &[Vec<i128>]) -> Option<Vec<i128>> {
    // Transpose and solve for the kernel of the transpose acting on row
    // space; work over rationals represented as (num, den) pairs via
    // fraction-free row reduction on the transpose augmented with identity
    // tracking. Simpler: Gaussian elimination over rationals with i128
    // numerators and denominators folded by gcd.
    let r = mat.len();
    let c = mat[0].len();
    // We reduce the r x c matrix keeping track of row operations on an
    // identity: [M | I]. A zero row in the reduced M yields a witness row
    // of the tracked transform.
    let mut a: Vec<Vec<i128>> = (0..r)
        .map(|i| {
            let mut row = mat[i].clone();
            row.extend((0..r).map(|j| if i == j { 1 } else { 0 }));
            row
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..c {
        let Some(p) = (pivot_row..r).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(pivot_row, p);
        for i in 0..r {
            if i != pivot_row && a[i][col] != 0 {
                let (pi, pj) = (a[pivot_row][col], a[i][col]);
                let g = gcd_i128(pi, pj);
                let (mi, mp) = (pi / g, pj / g);
                for j in 0..c + r {
                    a[i][j] = a[i][j] * mi - a[pivot_row][j] * mp;
                }
                let gg = a[i].iter().fold(0i128, |acc, &v| gcd_i128(acc, v));
                if gg > 1 {
                    for v in a[i].iter_mut() {
                        *v /= gg;
                    }
                }
            }
        }
        pivot_row += 1;
        if pivot_row == r {
            break;
        }
    }
    for i in 0..r {
        if a[i][..c].iter().all(|&v| v == 0) {
            let mut w = a[i][c..].to_vec();
            let g = w.iter().fold(0i128, |acc, &v| gcd_i128(acc, v));
            if g > 1 {
                for v in w.iter_mut() {
                    *v /= g;
                }
            }
            // Sign convention: first nonzero entry positive.
            if let Some(first) = w.iter().find(|&&v| v != 0) {
                if *first < 0 {
                    for v in w.iter_mut() {
                        *v = -*v;
                    }
                }
            }
            return Some(w);
        }
    }
    None
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Certificate accompanying a square-independence verdict: either the pivot
/// structure of the expanded square matrix, or an integer dependence among
/// the squared forms.
#[derive(Debug, Clone, Serialize)]
pub enum SquareCertificate {
    Independent { rank: usize },
    Dependent { witness: Vec<i64> },
}

/// Expands each squared form into the `s(s+1)/2` monomial coordinates and
/// decides linear independence over the rationals, exactly.
pub fn square_independent(sys: &LinearSystem) -> (bool, SquareCertificate) {
    let r = sys.num_forms();
    let s = sys.num_vars();
    let mut m: Vec<Vec<i128>> = Vec::with_capacity(r);
    for row in sys.coeffs() {
        let mut v = Vec::with_capacity(s * (s + 1) / 2);
        for u in 0..s {
            v.push((row[u] as i128) * (row[u] as i128));
        }
        for u in 0..s {
            for w in u + 1..s {
                v.push(2 * (row[u] as i128) * (row[w] as i128));
            }
        }
        m.push(v);
    }
    let rank = rank_i128(m.clone());
    if rank == r {
        (true, SquareCertificate::Independent { rank })
    } else {
        let witness = left_nullspace(&m)
            .expect("rank-deficient matrix has a nullspace vector")
            .iter()
            .map(|&v| v as i64)
            .collect();
        (false, SquareCertificate::Dependent { witness })
    }
}

/// Does the rational span of `gens` contain `target`?
fn span_contains(gens: &[&Vec<i64>], target: &[i64]) -> bool {
    if gens.is_empty() {
        return target.iter().all(|&c| c == 0);
    }
    let base: Vec<Vec<i128>> = gens
        .iter()
        .map(|g| g.iter().map(|&c| c as i128).collect())
        .collect();
    let mut ext = base.clone();
    ext.push(target.iter().map(|&c| c as i128).collect());
    rank_i128(base) == rank_i128(ext)
}

/// Cauchy-Schwarz complexity by exhaustive partition search: for each `i`,
/// the minimal `s_i` such that the other forms split into `s_i + 1` classes
/// none of whose spans contains form `i`; the result is `max_i s_i`.
/// Returns `None` when some form lies in every span that contains another
/// form parallel to it (repeated forms), where no finite complexity exists.
pub fn cs_complexity(sys: &LinearSystem) -> Result<Option<usize>> {
    let r = sys.num_forms();
    if r > 8 {
        return Err(Error::Precondition(format!(
            "exhaustive partition search is limited to 8 forms, got {r}"
        )));
    }
    let mut worst = 0usize;
    for i in 0..r {
        let others: Vec<&Vec<i64>> = (0..r).filter(|&j| j != i).map(|j| &sys.coeffs[j]).collect();
        if others.is_empty() {
            continue; // s_i = 0 vacuously
        }
        // All-singletons is the finest partition; if it fails, nothing works.
        if others.iter().any(|g| span_contains(&[g], &sys.coeffs[i])) {
            return Ok(None);
        }
        let m = others.len();
        // Enumerate set partitions by restricted growth strings, tracking
        // the minimal class count of a valid partition.
        let mut best = m; // singletons always valid here
        let mut rgs = vec![0usize; m];
        loop {
            let classes = rgs.iter().copied().max().unwrap() + 1;
            if classes < best {
                let valid = (0..classes).all(|c| {
                    let class: Vec<&Vec<i64>> = (0..m)
                        .filter(|&k| rgs[k] == c)
                        .map(|k| others[k])
                        .collect();
                    !span_contains(&class, &sys.coeffs[i])
                });
                if valid {
                    best = classes;
                }
            }
            // Next restricted growth string; stop after the last one.
            let mut advanced = false;
            for k in (1..m).rev() {
                let maxprefix = rgs[..k].iter().copied().max().unwrap();
                if rgs[k] <= maxprefix {
                    rgs[k] += 1;
                    for v in rgs[k + 1..].iter_mut() {
                        *v = 0;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
        worst = worst.max(best - 1);
    }
    Ok(Some(worst))
}

/// Result of an exact pattern count.
#[derive(Debug, Clone, Serialize)]
pub struct CountResult {
    pub value_re: f64,
    pub value_im: f64,
    pub n: usize,
    pub evaluations: u128,
    pub wall_ms: f64,
}

impl CountResult {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value_re, self.value_im)
    }
}

/// Default evaluation budget.
pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

/// Exact average over all `x in Z_N^s` of `prod_i f_i(L_i(x))` by full
/// enumeration with a deterministic reduction tree.
pub fn count_pattern(sys: &LinearSystem, fs: &[&GroupFn], budget: u128) -> Result<CountResult> {
    let r = sys.num_forms();
    let s = sys.num_vars();
    if fs.len() != r {
        return Err(Error::Precondition(format!("need {r} functions, got {}", fs.len())));
    }
    let n = fs[0].modulus();
    for f in fs {
        fs[0].check_modulus(f)?;
    }
    let total = (n as u128).pow(s as u32);
    if total > budget {
        return Err(Error::BudgetExceeded { needed: total, budget });
    }
    let start = Instant::now();
    let ni = n as i64;
    // Coefficients reduced once.
    let rows: Vec<Vec<i64>> = sys
        .coeffs
        .iter()
        .map(|row| row.iter().map(|c| c.rem_euclid(ni)).collect())
        .collect();
    let total_us = total as usize;
    let sum = pairwise_sum::<Complex64, _>(total_us, |idx| {
        let mut x = [0usize; 8];
        let mut t = idx;
        for u in (0..s).rev() {
            x[u] = t % n;
            t /= n;
        }
        let mut prod = Complex64::new(1.0, 0.0);
        for i in 0..r {
            let mut acc = 0i64;
            for u in 0..s {
                acc += rows[i][u] * x[u] as i64;
            }
            prod *= fs[i].values()[acc.rem_euclid(ni) as usize];
        }
        prod
    }) / total as f64;
    Ok(CountResult {
        value_re: sum.re,
        value_im: sum.im,
        n,
        evaluations: total,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Which bound a von Neumann check is run against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VonNeumannKind {
    /// `|count| <= min_i ||f_i||_{U^{r-1}}` for the r-term progression
    /// system, requiring `||f_i||_inf <= 1`.
    ApSystem,
    /// `|count| <= min_j ||f_j||_{U^k} prod_{i != j} ||f_i||_inf` for
    /// systems of Cauchy-Schwarz complexity at most `k - 1`.
    Complexity { k: usize },
}

/// Evaluates one generalized von Neumann inequality literally. Precondition
/// violations are reported as skipped, not failed.
pub fn von_neumann_check(
    sys: &LinearSystem,
    fs: &[&GroupFn],
    kind: VonNeumannKind,
    budget: u128,
) -> Result<CheckReport> {
    let r = sys.num_forms();
    let n = fs[0].modulus();
    let id = "von-neumann";
    let inst = format!("N={n} r={r} kind={kind:?}");
    match kind {
        VonNeumannKind::ApSystem => {
            if *sys != LinearSystem::arithmetic_progression(r) {
                return Ok(CheckReport::skipped(id, inst, "not a progression system".into()));
            }
            if fs.iter().any(|f| f.linf_norm() > 1.0 + 1e-9) {
                return Ok(CheckReport::skipped(id, inst, "needs sup norm at most 1".into()));
            }
            let lhs = count_pattern(sys, fs, budget)?.value().norm();
            let rhs = fs
                .iter()
                .map(|f| if r == 3 { u2_norm(f) } else { u3_norm(f) })
                .fold(f64::INFINITY, f64::min);
            if r != 3 && r != 4 {
                return Ok(CheckReport::skipped(id, inst, "progression length not 3 or 4".into()));
            }
            Ok(CheckReport::new(id, lhs, rhs, inst))
        }
        VonNeumannKind::Complexity { k } => {
            if k != 2 && k != 3 {
                return Ok(CheckReport::skipped(id, inst, "only U^2 and U^3 bounds".into()));
            }
            let cs = cs_complexity(sys)?;
            if cs.map_or(true, |c| c > k - 1) {
                return Ok(CheckReport::skipped(
                    id,
                    inst,
                    format!("complexity {cs:?} exceeds {}", k - 1),
                ));
            }
            let lhs = count_pattern(sys, fs, budget)?.value().norm();
            let sups: Vec<f64> = fs.iter().map(|f| f.linf_norm()).collect();
            let mut rhs = f64::INFINITY;
            for j in 0..r {
                let nj = if k == 2 { u2_norm(fs[j]) } else { u3_norm(fs[j]) };
                let others: f64 = sups
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, &v)| v)
                    .product();
                rhs = rhs.min(nj * others);
            }
            Ok(CheckReport::new(id, lhs, rhs, inst))
        }
    }
}

/// One row of the probe table: a quadratic phase and its count.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub n: usize,
    pub a: u64,
    pub b: u64,
    pub u2: f64,
    pub count_abs: f64,
}

/// Sweeps the whole family `omega^{a x^2 + b x}` (`a != 0`) through
/// `E_x prod_i f(L_i(x))`.
///
/// The enumeration of `Z_N^s` happens once into a joint histogram of
/// `(sum_i L_i(x)^2, sum_i L_i(x)) mod N`, after which every count is an
/// exact rearrangement `sum_{t,u} H[t][u] omega^{a t + b u} / N^s`; a few
/// counts are cross-checked against the direct product enumeration.
pub fn main_theorem_probe(sys: &LinearSystem, n: usize, budget: u128) -> Result<Vec<ProbeRow>> {
    let s = sys.num_vars();
    let total = (n as u128).pow(s as u32);
    if total > budget {
        return Err(Error::BudgetExceeded { needed: total, budget });
    }
    let ni = n as i64;
    let mut hist = vec![vec![0u64; n]; n];
    let mut x = vec![0usize; s];
    loop {
        let mut t = 0i64;
        let mut u = 0i64;
        for i in 0..sys.num_forms() {
            let li = sys.eval_mod(i, &x, n) as i64;
            t = (t + li * li) % ni;
            u = (u + li) % ni;
        }
        hist[t as usize][u as usize] += 1;
        // Odometer.
        let mut carry = true;
        for xi in x.iter_mut().rev() {
            *xi += 1;
            if *xi == n {
                *xi = 0;
            } else {
                carry = false;
                break;
            }
        }
        if carry {
            break;
        }
    }
    let w = omega_table(n);
    let nn = n as u64;
    let rows: Vec<ProbeRow> = crate::zn::par_map(n - 1, |ai| {
        let a = ai as u64 + 1;
        let mut out = Vec::with_capacity(n);
        for b in 0..nn {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..n {
                for u in 0..n {
                    let h = hist[t][u];
                    if h != 0 {
                        let k = (a * t as u64 % nn + b * u as u64 % nn) % nn;
                        acc += w[k as usize] * h as f64;
                    }
                }
            }
            let count_abs = (acc / total as f64).norm();
            out.push(ProbeRow {
                n,
                a,
                b,
                u2: (n as f64).powf(-0.25),
                count_abs,
            });
        }
        out
    })
    .into_iter()
    .flatten()
    .collect();
    let mut rows = rows;
    rows.sort_by(|p, q| {
        p.u2.partial_cmp(&q.u2)
            .unwrap()
            .then(p.a.cmp(&q.a))
            .then(p.b.cmp(&q.b))
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn ap(r: usize) -> LinearSystem {
        LinearSystem::arithmetic_progression(r)
    }

    #[test]
    fn parse_roundtrip() {
        let sys = LinearSystem::parse("1 0\n1 1\n1 2\n").unwrap();
        assert_eq!(sys, ap(3));
        assert!(LinearSystem::parse("1 a\n").is_err());
        assert!(LinearSystem::parse("0 0\n").is_err());
    }

    #[test]
    fn square_independence_examples() {
        let (ok, _) = square_independent(&ap(3));
        assert!(ok);

        let (ok, cert) = square_independent(&ap(4));
        assert!(!ok);
        match cert {
            SquareCertificate::Dependent { witness } => assert_eq!(witness, vec![1, -3, 3, -1]),
            _ => panic!("expected dependence"),
        }

        let sys = LinearSystem::new(vec![
            vec![1, 1, 0],
            vec![0, 1, 1],
            vec![1, 0, 1],
            vec![1, 1, 1],
        ])
        .unwrap();
        let (ok, _) = square_independent(&sys);
        assert!(ok);
    }

    #[test]
    fn square_independence_is_permutation_stable() {
        let sys = ap(4);
        let perm = LinearSystem::new(vec![
            sys.coeffs()[2].clone(),
            sys.coeffs()[0].clone(),
            sys.coeffs()[3].clone(),
            sys.coeffs()[1].clone(),
        ])
        .unwrap();
        assert_eq!(square_independent(&sys).0, square_independent(&perm).0);
    }

    #[test]
    fn cs_complexity_examples() {
        assert_eq!(cs_complexity(&ap(3)).unwrap(), Some(1));
        assert_eq!(cs_complexity(&ap(4)).unwrap(), Some(2));
        let single = LinearSystem::new(vec![vec![1]]).unwrap();
        assert_eq!(cs_complexity(&single).unwrap(), Some(0));
        // Repeated forms have no finite complexity.
        let rep = LinearSystem::new(vec![vec![1, 0], vec![1, 0], vec![1, 1]]).unwrap();
        assert_eq!(cs_complexity(&rep).unwrap(), None);
    }

    #[test]
    fn count_examples() {
        let n = 13;
        let one = GroupFn::constant(n, Complex64::new(1.0, 0.0));
        let c = count_pattern(&ap(3), &[&one, &one, &one], DEFAULT_BUDGET).unwrap();
        assert!((c.value() - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        // Telescoping quadruple: exactly 1 for any a and odd N.
        let a = 5u64;
        let fs: Vec<GroupFn> = [(a, false), (3 * a, true), (3 * a, false), (a, true)]
            .iter()
            .map(|&(c, neg)| {
                let cc = if neg { n as u64 - c % n as u64 } else { c % n as u64 };
                GroupFn::quad_phase(n, cc, 0, 0)
            })
            .collect();
        let refs: Vec<&GroupFn> = fs.iter().collect();
        let c = count_pattern(&ap(4), &refs, DEFAULT_BUDGET).unwrap();
        assert!((c.value() - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        // Nondegenerate Gauss-type sum for the 3-term system.
        let f = GroupFn::quad_phase(13, 1, 0, 0);
        let c = count_pattern(&ap(3), &[&f, &f, &f], DEFAULT_BUDGET).unwrap();
        assert!((c.value().norm() - 1.0 / 13.0).abs() < 1e-12);
    }

    #[test]
    fn count_budget_and_mismatch() {
        let f = GroupFn::constant(5, Complex64::new(1.0, 0.0));
        assert!(matches!(
            count_pattern(&ap(3), &[&f, &f, &f], 10),
            Err(Error::BudgetExceeded { .. })
        ));
        let g = GroupFn::constant(7, Complex64::new(1.0, 0.0));
        assert!(count_pattern(&ap(3), &[&f, &f, &g], DEFAULT_BUDGET).is_err());
    }

    #[test]
    fn count_is_multilinear_and_translation_covariant() {
        let n = 11;
        let mut g = SplitMix64::new(4);
        let f = GroupFn::from_fn(n, |_| Complex64::new(g.next_signed_unit(), g.next_signed_unit()));
        let base = count_pattern(&ap(3), &[&f, &f, &f], DEFAULT_BUDGET).unwrap().value();
        let alpha = Complex64::new(0.5, -0.25);
        let scaled = f.scale(alpha);
        let v = count_pattern(&ap(3), &[&scaled, &f, &f], DEFAULT_BUDGET).unwrap().value();
        assert!((v - alpha * base).norm() < 1e-12);

        let t = f.translate(5);
        let vt = count_pattern(&ap(3), &[&t, &t, &t], DEFAULT_BUDGET).unwrap().value();
        assert!((vt - base).norm() < 1e-12);
    }

    #[test]
    fn von_neumann_examples() {
        let n = 31;
        let mut g = SplitMix64::new(6);
        let fs: Vec<GroupFn> = (0..3)
            .map(|_| {
                let mut gg = SplitMix64::new(g.next_u64());
                GroupFn::from_fn(n, |_| Complex64::new(gg.next_signed_unit(), 0.0))
            })
            .collect();
        let refs: Vec<&GroupFn> = fs.iter().collect();
        let r = von_neumann_check(&ap(3), &refs, VonNeumannKind::ApSystem, DEFAULT_BUDGET).unwrap();
        assert!(r.pass && !r.skipped);

        // A zero factor forces LHS = 0.
        let z = GroupFn::zero(n);
        let r = von_neumann_check(&ap(3), &[&z, &refs[0], &refs[1]], VonNeumannKind::ApSystem, DEFAULT_BUDGET)
            .unwrap();
        assert!(r.pass && r.lhs == 0.0);

        // Telescoping instance: LHS = 1, RHS = 1, margin 0.
        let a = 2u64;
        let nn = n as u64;
        let fs: Vec<GroupFn> = [(a, false), (3 * a, true), (3 * a, false), (a, true)]
            .iter()
            .map(|&(c, neg)| {
                let cc = if neg { (nn - c % nn) % nn } else { c % nn };
                GroupFn::quad_phase(n, cc, 0, 0)
            })
            .collect();
        let refs: Vec<&GroupFn> = fs.iter().collect();
        let r = von_neumann_check(&ap(4), &refs, VonNeumannKind::ApSystem, DEFAULT_BUDGET).unwrap();
        assert!(r.pass);
        assert!((r.lhs - 1.0).abs() < 1e-9 && (r.rhs - 1.0).abs() < 1e-9);

        // Precondition violations are skips, not failures.
        let big = GroupFn::constant(n, Complex64::new(2.0, 0.0));
        let r = von_neumann_check(&ap(3), &[&big, &big, &big], VonNeumannKind::ApSystem, DEFAULT_BUDGET)
            .unwrap();
        assert!(r.skipped);
    }

    #[test]
    fn square_dependent_systems_telescope() {
        // From any dependence witness, phases with those coefficients give
        // |count| = 1 while each nonzero-witness factor has U^2 norm N^{-1/4}.
        let n = 101usize;
        let sys = ap(4);
        let (ok, cert) = square_independent(&sys);
        assert!(!ok);
        let SquareCertificate::Dependent { witness } = cert else {
            panic!()
        };
        let nn = n as i64;
        let fs: Vec<GroupFn> = witness
            .iter()
            .map(|&wi| GroupFn::quad_phase(n, wi.rem_euclid(nn) as u64, 0, 0))
            .collect();
        let refs: Vec<&GroupFn> = fs.iter().collect();
        let c = count_pattern(&sys, &refs, DEFAULT_BUDGET).unwrap();
        assert!((c.value().norm() - 1.0).abs() < 1e-12);
        let min_u2 = fs.iter().map(u2_norm).fold(f64::INFINITY, f64::min);
        assert!((min_u2 - (n as f64).powf(-0.25)).abs() < 1e-9);
    }

    #[test]
    fn probe_histogram_matches_direct_counts() {
        let n = 31;
        let rows = main_theorem_probe(&ap(3), n, DEFAULT_BUDGET).unwrap();
        // Cross-check three rows against the direct product enumeration.
        for &(a, b) in &[(1u64, 0u64), (2, 5), (17, 30)] {
            let f = GroupFn::quad_phase(n, a, b, 0);
            let direct = count_pattern(&ap(3), &[&f, &f, &f], DEFAULT_BUDGET)
                .unwrap()
                .value()
                .norm();
            let row = rows.iter().find(|r| r.a == a && r.b == b).unwrap();
            assert!((row.count_abs - direct).abs() < 1e-10, "a={a} b={b}");
        }
    }
}
