//! Bourgain systems: abstract nested families `(X_rho)` over `rho in [0,4]`
//! with symmetry, additivity, and doubling axioms; regular-index search;
//! dilation; intersections with dimension and density bookkeeping; kernel
//! systems of Freiman homomorphisms on a symmetric progression; and the
//! averaging check.
//!
//! Systems are lazy: an evaluator plus a memo cache keyed by the index,
//! since only finitely many indices are ever used. Axioms are checked on a
//! declared grid. One caveat discovered by running the checks literally:
//! any system whose sets are truncated to a proper carrier (a kernel system
//! on a progression, say) has `X_2` equal to the whole carrier, because
//! chordal distances never exceed 2, so the additivity axiom at indices
//! summing past 2 fails for the carrier itself. The default grid therefore
//! exercises additivity on pairs with `rho + rho' <= 1`, which is the range
//! every downstream use needs; the full-range grid remains available for
//! families that satisfy it (Bohr families do).

use crate::gap::Gap;
use crate::verify::CheckReport;
use crate::zn::{chord, GroupFn, SubsetZn};
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// The four constructors plus the trivial system.
#[derive(Debug, Clone)]
enum Kind {
    Trivial,
    /// `X_rho = {x : |1 - e(r x / N)| <= rho * scale for all r in K}`.
    BohrFamily { freqs: Vec<u64>, scale: f64 },
    /// Symmetric progression with per-index lengths
    /// `X_rho = {sum a_i g_i : |a_i| <= floor(rho h_i / 4)}`.
    GapScaled { gens: Vec<usize>, half_lens: Vec<usize> },
    /// `X_rho = {0} union {x in P : |1 - f_j(x)| <= rho for all j}`.
    FreimanKernel {
        carrier: Gap,
        homs: Vec<HashMap<usize, Complex64>>,
    },
    Intersection(Vec<BourgainSystem>),
    Dilation { parent: Box<BourgainSystem>, eta: f64 },
}

/// A lazily evaluated Bourgain system with a claimed dimension.
#[derive(Debug, Clone)]
pub struct BourgainSystem {
    n: usize,
    kind: Kind,
    claimed_dimension: f64,
    memo: Arc<Mutex<HashMap<u64, Arc<SubsetZn>>>>,
}

impl BourgainSystem {
    pub fn trivial(n: usize) -> Self {
        BourgainSystem {
            n,
            kind: Kind::Trivial,
            claimed_dimension: 0.0,
            memo: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    /// Bohr family at base width `scale`, of dimension `3 |K|`.
    pub fn bohr_family(n: usize, freqs: &[u64], scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Precondition("scale must be positive".into()));
        }
        Ok(BourgainSystem {
            n,
            kind: Kind::BohrFamily {
                freqs: freqs.iter().map(|&r| r % n as u64).collect(),
                scale,
            },
            claimed_dimension: 3.0 * freqs.len() as f64,
            memo: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    /// Bohr family with an explicitly claimed dimension (used by the
    /// negative controls).
    pub fn bohr_family_with_dimension(
        n: usize,
        freqs: &[u64],
        scale: f64,
        dim: f64,
    ) -> Result<Self> {
        let mut s = Self::bohr_family(n, freqs, scale)?;
        s.claimed_dimension = dim;
        Ok(s)
    }

    /// Scaled progression family from a proper symmetric box, of dimension
    /// `2 d` (each coordinate at most triples when the index doubles).
    pub fn gap_scaled(n: usize, gens: &[usize], half_lens: &[usize]) -> Result<Self> {
        let full = Gap::symmetric_box(n, gens, half_lens)?;
        if !full.is_proper() {
            return Err(Error::Precondition("carrier box must be proper".into()));
        }
        Ok(BourgainSystem {
            n,
            kind: Kind::GapScaled {
                gens: gens.to_vec(),
                half_lens: half_lens.to_vec(),
            },
            claimed_dimension: 2.0 * gens.len() as f64,
            memo: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    /// Kernel system of verified multiplicative Freiman homomorphisms on a
    /// symmetric proper progression, of dimension `2 M`.
    pub fn freiman_kernel(carrier: Gap, homs: Vec<HashMap<usize, Complex64>>) -> Result<Self> {
        let n = carrier.modulus();
        if !carrier.is_proper() || !carrier.members().is_symmetric() {
            return Err(Error::Precondition(
                "kernel carrier must be a proper symmetric progression".into(),
            ));
        }
        for (j, h) in homs.iter().enumerate() {
            match h.get(&0) {
                Some(v) if (v - Complex64::new(1.0, 0.0)).norm() < 1e-9 => {}
                _ => {
                    return Err(Error::Precondition(format!(
                        "homomorphism {j} must take the value 1 at 0"
                    )))
                }
            }
            for x in carrier.members().members() {
                match h.get(&x) {
                    Some(v) if (v.norm() - 1.0).abs() < 1e-9 => {}
                    _ => {
                        return Err(Error::Precondition(format!(
                            "homomorphism {j} must be unimodular on the carrier"
                        )))
                    }
                }
            }
            if let Some(w) = crate::quad::check_freiman_hom_mult(n, h, 1e-9) {
                return Err(Error::Precondition(format!(
                    "map {j} fails the Freiman property at {w:?}"
                )));
            }
        }
        let dim = 2.0 * homs.len() as f64;
        Ok(BourgainSystem {
            n,
            kind: Kind::FreimanKernel { carrier, homs },
            claimed_dimension: dim,
            memo: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    /// Pointwise intersection. Dimension bookkeeping: `4 (d + d')` for a
    /// pair, `4 s^2 (d_1 + ... + d_s)` for longer lists.
    pub fn intersect(systems: Vec<BourgainSystem>) -> Result<Self> {
        let s = systems.len();
        if s == 0 {
            return Err(Error::EmptySet("intersection of no systems".into()));
        }
        if s == 1 {
            return Ok(systems.into_iter().next().unwrap());
        }
        let n = systems[0].n;
        if systems.iter().any(|x| x.n != n) {
            return Err(Error::Precondition("intersection needs equal moduli".into()));
        }
        let total: f64 = systems.iter().map(|x| x.claimed_dimension).sum();
        let dim = if s == 2 {
            4.0 * total
        } else {
            4.0 * (s * s) as f64 * total
        };
        Ok(BourgainSystem {
            n,
            kind: Kind::Intersection(systems),
            claimed_dimension: dim,
            memo: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    /// The dilated system `Y_rho = X_{eta rho}`, same dimension.
    pub fn dilate(self, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Precondition("dilation factor must lie in (0, 1]".into()));
        }
        Ok(BourgainSystem {
            n: self.n,
            claimed_dimension: self.claimed_dimension,
            kind: Kind::Dilation {
                parent: Box::new(self),
                eta,
            },
            memo: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    pub fn modulus(&self) -> usize {
        self.n
    }

    pub fn claimed_dimension(&self) -> f64 {
        self.claimed_dimension
    }

    /// The set at index `rho`, memoized.
    pub fn at(&self, rho: f64) -> Arc<SubsetZn> {
        let key = rho.to_bits();
        if let Some(hit) = self.memo.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let set = Arc::new(self.eval(rho));
        self.memo.lock().unwrap().insert(key, set.clone());
        set
    }

    fn eval(&self, rho: f64) -> SubsetZn {
        let n = self.n;
        let rho = rho.clamp(0.0, 4.0);
        match &self.kind {
            Kind::Trivial => SubsetZn::full(n),
            Kind::BohrFamily { freqs, scale } => SubsetZn::from_pred(n, |x| {
                freqs
                    .iter()
                    .all(|&r| chord(n, r * x as u64) <= rho * scale + 1e-12)
            }),
            Kind::GapScaled { gens, half_lens } => {
                let hl: Vec<usize> = half_lens
                    .iter()
                    .map(|&h| ((rho * h as f64 / 4.0) + 1e-12).floor() as usize)
                    .collect();
                Gap::symmetric_box(n, gens, &hl)
                    .map(|g| g.members().clone())
                    .unwrap_or_else(|_| SubsetZn::from_members(n, [0]))
            }
            Kind::FreimanKernel { carrier, homs } => {
                let mut s = SubsetZn::from_pred(n, |x| {
                    carrier.members().contains(x)
                        && homs.iter().all(|h| {
                            h.get(&x)
                                .map(|v| (v - Complex64::new(1.0, 0.0)).norm() <= rho + 1e-12)
                                .unwrap_or(false)
                        })
                });
                s.insert(0);
                s
            }
            Kind::Intersection(systems) => {
                let mut acc = (*systems[0].at(rho)).clone();
                for sys in &systems[1..] {
                    acc = acc.intersect(&sys.at(rho));
                }
                acc
            }
            Kind::Dilation { parent, eta } => (*parent.at(eta * rho)).clone(),
        }
    }
}

/// Grid for axiom checking.
#[derive(Debug, Clone)]
pub struct AxiomGrid {
    pub indices: Vec<f64>,
    /// Additivity is checked for grid pairs with sum at most this.
    pub additivity_cap: f64,
}

impl AxiomGrid {
    /// Dyadic indices `4 * 2^-k`; additivity restricted to sums at most 1.
    pub fn default_grid() -> Self {
        AxiomGrid {
            indices: (0..=7).map(|k| 4.0 * 0.5f64.powi(k)).collect(),
            additivity_cap: 1.0,
        }
    }

    /// Full-range additivity, satisfied by Bohr families.
    pub fn full_range() -> Self {
        AxiomGrid {
            indices: (0..=7).map(|k| 4.0 * 0.5f64.powi(k)).collect(),
            additivity_cap: 4.0,
        }
    }
}

/// Verifies the five axioms literally on the grid (additivity by exhaustive
/// pair summation); reports the first violated axiom or a pass.
pub fn check_axioms(sys: &BourgainSystem, grid: &AxiomGrid) -> CheckReport {
    let inst = format!("N={} dim={}", sys.n, sys.claimed_dimension);
    let mut sorted = grid.indices.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Nesting.
    for w in sorted.windows(2) {
        let small = sys.at(w[0]);
        let large = sys.at(w[1]);
        if !small.is_subset_of(&large) {
            return CheckReport::new("bourgain-axioms", 1.0, 0.0, format!("{inst} nesting at {w:?}"));
        }
    }
    // Zero membership.
    if !sys.at(0.0).contains(0) {
        return CheckReport::new("bourgain-axioms", 1.0, 0.0, format!("{inst} zero membership"));
    }
    // Symmetry.
    for &rho in &sorted {
        if !sys.at(rho).is_symmetric() {
            return CheckReport::new("bourgain-axioms", 1.0, 0.0, format!("{inst} symmetry at {rho}"));
        }
    }
    // Additivity by exhaustive pair summation.
    for &a in &sorted {
        for &b in &sorted {
            if a + b <= grid.additivity_cap + 1e-12 {
                let sum = sys.at(a).sumset(&sys.at(b));
                if !sum.is_subset_of(&sys.at(a + b)) {
                    return CheckReport::new(
                        "bourgain-axioms",
                        1.0,
                        0.0,
                        format!("{inst} additivity at ({a}, {b})"),
                    );
                }
            }
        }
    }
    // Doubling.
    for &rho in &sorted {
        if rho <= 1.0 + 1e-12 {
            let small = sys.at(rho).count() as f64;
            let large = sys.at(2.0 * rho).count() as f64;
            let cap = 2f64.powf(sys.claimed_dimension) * small;
            if large > cap + 1e-9 {
                return CheckReport::new(
                    "bourgain-axioms",
                    large,
                    cap,
                    format!("{inst} doubling at {rho}"),
                );
            }
        }
    }
    CheckReport::new("bourgain-axioms", 0.0, 1.0, inst)
}

/// A certified regular index: cardinality varies by at most `1 +- 10 d k`
/// under dilation by `1 +- k` across the kappa grid.
#[derive(Debug, Clone)]
pub struct RegularIndex {
    pub rho: f64,
    pub kappas: Vec<f64>,
}

fn kappa_grid(d: f64) -> Vec<f64> {
    let top = 1.0 / (10.0 * d.max(0.5));
    (1..=16).map(|j| top * j as f64 / 16.0).collect()
}

fn index_is_regular(sys: &BourgainSystem, rho: f64, kappas: &[f64]) -> bool {
    let d = sys.claimed_dimension();
    let base = sys.at(rho).count() as f64;
    kappas.iter().all(|&k| {
        let up = sys.at(rho * (1.0 + k)).count() as f64;
        let down = sys.at(rho * (1.0 - k)).count() as f64;
        up <= (1.0 + 10.0 * d * k) * base + 1e-9 && down >= (1.0 - 10.0 * d * k) * base - 1e-9
    })
}

/// Scans `[tau/2, tau]` for an index passing the kappa grid; loud failure
/// with the scan size otherwise.
pub fn find_regular_index(sys: &BourgainSystem, tau: f64) -> Result<RegularIndex> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Precondition("tau must lie in (0, 1]".into()));
    }
    let kappas = kappa_grid(sys.claimed_dimension());
    let steps = 256;
    for k in 0..=steps {
        let rho = tau / 2.0 * 2f64.powf(k as f64 / steps as f64);
        if index_is_regular(sys, rho, &kappas) {
            return Ok(RegularIndex {
                rho,
                kappas,
            });
        }
    }
    Err(Error::NoRegularWidth(format!(
        "no regular index in [{}, {tau}] over {steps} steps",
        tau / 2.0
    )))
}

/// Intersection density reports: for each grid index at most 1, the lemma
/// bound `|X cap Y| >= 2^{-3(d+d')} mu nu N` (pairwise) or the `s`-fold
/// analogue with `4 s^2 sum d_i` in the exponent.
pub fn intersection_density_checks(
    systems: &[BourgainSystem],
    inter: &BourgainSystem,
    grid: &[f64],
) -> Vec<CheckReport> {
    let n = inter.modulus() as f64;
    let s = systems.len();
    let total: f64 = systems.iter().map(|x| x.claimed_dimension()).sum();
    let exponent = if s == 2 { 3.0 * total } else { 4.0 * (s * s) as f64 * total };
    grid.iter()
        .filter(|&&rho| rho <= 1.0 + 1e-12)
        .map(|&rho| {
            let densities: f64 = systems.iter().map(|x| x.at(rho).density()).product();
            let lhs = 2f64.powf(-exponent) * densities * n;
            let rhs = inter.at(rho).count() as f64;
            CheckReport::new(
                "intersection-density",
                lhs,
                rhs,
                format!("s={s} rho={rho} N={n}"),
            )
        })
        .collect()
}

/// Kernel-system density report: relative density of `X_rho` in the carrier
/// at least `3^{-d} (rho / 2 pi)^M`.
pub fn kernel_density_checks(
    sys: &BourgainSystem,
    carrier: &Gap,
    m_homs: usize,
    grid: &[f64],
) -> Vec<CheckReport> {
    let d = carrier.dim() as f64;
    grid.iter()
        .map(|&rho| {
            let lhs = 3f64.powf(-d)
                * (rho / (2.0 * std::f64::consts::PI)).powi(m_homs as i32)
                * carrier.members().count() as f64;
            let rhs = sys.at(rho).count() as f64;
            CheckReport::new(
                "kernel-density",
                lhs,
                rhs,
                format!("d={d} M={m_homs} rho={rho}"),
            )
        })
        .collect()
}

/// Dilation law `|X_{eta rho}| >= (eta/2)^d |X_rho|` on a grid.
pub fn dilation_checks(sys: &BourgainSystem, eta: f64, grid: &[f64]) -> Vec<CheckReport> {
    let d = sys.claimed_dimension();
    grid.iter()
        .filter(|&&rho| rho <= 1.0 + 1e-12)
        .map(|&rho| {
            let lhs = (eta / 2.0).powf(d) * sys.at(rho).count() as f64;
            let rhs = sys.at(eta * rho).count() as f64;
            CheckReport::new("dilation-law", lhs, rhs, format!("eta={eta} rho={rho}"))
        })
        .collect()
}

/// Centrality for Bourgain systems: `sigma in [eps rho / 400 d, eps rho / 200 d]`
/// with both indices regular. Returns the averaging check, or a skip when
/// the window precondition fails.
pub fn bourgain_averaging_check(
    sys: &BourgainSystem,
    rho: f64,
    sigma: f64,
    eps: f64,
    f: &GroupFn,
) -> Result<CheckReport> {
    let n = sys.modulus();
    if f.modulus() != n {
        return Err(Error::ModulusMismatch(f.modulus(), n));
    }
    if f.linf_norm() > 1.0 + 1e-9 {
        return Err(Error::Precondition("averaging check needs |f| <= 1".into()));
    }
    let d = sys.claimed_dimension().max(0.5);
    let inst = format!("N={n} rho={rho} sigma={sigma} eps={eps}");
    let lo = eps * rho / (400.0 * d);
    let hi = eps * rho / (200.0 * d);
    if !(sigma >= lo - 1e-15 && sigma <= hi + 1e-15) {
        return Ok(CheckReport::skipped(
            "bourgain-averaging",
            inst,
            "sigma outside the centrality window".into(),
        ));
    }
    let kappas = kappa_grid(sys.claimed_dimension());
    if !index_is_regular(sys, rho, &kappas) || !index_is_regular(sys, sigma, &kappas) {
        return Ok(CheckReport::skipped(
            "bourgain-averaging",
            inst,
            "an index is not regular".into(),
        ));
    }
    let xr = sys.at(rho).members();
    let xs = sys.at(sigma).members();
    let v = f.values();
    let lhs = crate::sum::pairwise_sum::<Complex64, _>(xr.len(), |i| v[xr[i]]) / xr.len() as f64;
    let rhs = crate::sum::pairwise_sum::<Complex64, _>(xr.len() * xs.len(), |i| {
        let x = xr[i / xs.len()];
        let y = xs[i % xs.len()];
        v[(x + y) % n]
    }) / (xr.len() * xs.len()) as f64;
    Ok(CheckReport::new("bourgain-averaging", (lhs - rhs).norm(), eps, inst))
}
