//! Quadratic averages: a base `(B'', q)` plus a per-translate Freiman
//! assignment, `Q(x) = E_{y in x - B''} omega^{q_y(x)}` with
//! `q_y(x) = q(x - y) + phi_y(x - y)`. Includes the greedy-cover special
//! construction (unimodular off an exceptional set), base shrinking,
//! products, and the high-rank expectation/correlation checks.
//!
//! Every constructive operation here measures its own postcondition
//! exactly and fails loudly if the bound is violated; the bounds are
//! theorems, so a violation indicates an implementation bug.

use crate::bohr::{bohr_cover, central_subset, BohrSet, CentralPair};
use crate::quad::{rank_alpha, QuadForm};
use crate::sum::pairwise_sum;
use crate::unorms::{inner, u2_norm};
use crate::verify::CheckReport;
use crate::zn::{omega_table, GroupFn, SubsetZn};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

/// Specialness certificate: off at most `eps_measured * N` points, the
/// average restricts to one of `m` exact phase translates.
#[derive(Debug, Clone, Serialize)]
pub struct SpecialCert {
    pub eps_measured: f64,
    pub m: usize,
    pub centers: Vec<usize>,
}

/// A (possibly generalized) quadratic average.
#[derive(Debug, Clone)]
pub struct QuadAverage {
    window: BohrSet,
    q: QuadForm,
    /// Per-translate affine offsets: `phi_y(z) = u_y z + v_y`.
    offsets: Vec<(u64, u64)>,
    /// Nonempty for generalized averages (uniform average of components).
    components: Vec<QuadAverage>,
    values: GroupFn,
    special: Option<SpecialCert>,
}

impl QuadAverage {
    /// Atomic average from a window, a global quadratic part, and affine
    /// offsets indexed by the translate parameter `y`.
    pub fn from_assignment(window: BohrSet, q: QuadForm, offsets: Vec<(u64, u64)>) -> Result<Self> {
        let n = window.modulus();
        if q.modulus() != n {
            return Err(Error::ModulusMismatch(q.modulus(), n));
        }
        if offsets.len() != n {
            return Err(Error::Precondition("one affine offset per residue".into()));
        }
        if window.members().count() == 0 {
            return Err(Error::EmptySet("averaging window".into()));
        }
        let values = values_from_assignment(&window, &q, &offsets)?;
        Ok(QuadAverage {
            window,
            q,
            offsets,
            components: Vec::new(),
            values,
            special: None,
        })
    }

    /// The exact global phase `omega^{q}`: a special average with the whole
    /// group as its window and a single cover translate.
    pub fn global_phase(n: usize, q: QuadForm) -> Result<Self> {
        let window = BohrSet::full(n);
        let offsets = translate_offsets(n, &q, &vec![0; n])?;
        let mut qa = QuadAverage::from_assignment(window, q, offsets)?;
        qa.special = Some(SpecialCert {
            eps_measured: 0.0,
            m: 1,
            centers: vec![0],
        });
        Ok(qa)
    }

    /// Uniform average of components sharing a base.
    pub fn generalized(components: Vec<QuadAverage>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::EmptySet("generalized average needs components".into()))?;
        let n = first.modulus();
        let mut acc = GroupFn::zero(n);
        for c in &components {
            if c.modulus() != n {
                return Err(Error::ModulusMismatch(c.modulus(), n));
            }
            acc = acc.add(&c.values)?;
        }
        let values = acc.scale(Complex64::new(1.0 / components.len() as f64, 0.0));
        Ok(QuadAverage {
            window: first.window.clone(),
            q: first.q.clone(),
            offsets: Vec::new(),
            components,
            values,
        special: None,
        })
    }

    pub fn modulus(&self) -> usize {
        self.values.modulus()
    }

    pub fn window(&self) -> &BohrSet {
        &self.window
    }

    pub fn base_form(&self) -> &QuadForm {
        &self.q
    }

    pub fn values(&self) -> &GroupFn {
        &self.values
    }

    pub fn special(&self) -> Option<&SpecialCert> {
        self.special.as_ref()
    }

    pub fn is_generalized(&self) -> bool {
        !self.components.is_empty()
    }

    pub fn components(&self) -> &[QuadAverage] {
        &self.components
    }

    /// `q_y(x)` for the atomic assignment.
    pub fn local_phase(&self, y: usize, x: usize) -> Result<u64> {
        let n = self.modulus();
        let z = (x + n - y % n) % n;
        let qz = self
            .q
            .eval(z)
            .ok_or_else(|| Error::Precondition(format!("base form undefined at {z}")))?;
        let (u, v) = self.offsets[y % n];
        let nn = n as u64;
        Ok((qz + u * (z as u64) % nn + v) % nn)
    }

    /// Exceptional-set bound: `|Q| <= 1` everywhere.
    pub fn sup_bound_ok(&self) -> bool {
        self.values.linf_norm() <= 1.0 + 1e-9
    }
}

fn values_from_assignment(
    window: &BohrSet,
    q: &QuadForm,
    offsets: &[(u64, u64)],
) -> Result<GroupFn> {
    let n = window.modulus();
    let w = omega_table(n);
    let nn = n as u64;
    let cell = window.members().members();
    let mut qb = Vec::with_capacity(cell.len());
    for &b in &cell {
        qb.push(
            q.eval(b)
                .ok_or_else(|| Error::Precondition(format!("base form undefined at {b}")))?,
        );
    }
    let values: Vec<Complex64> = crate::zn::par_map(n, |x| {
        pairwise_sum::<Complex64, _>(cell.len(), |i| {
            let b = cell[i];
            let y = (x + n - b) % n;
            let (u, v) = offsets[y];
            let k = (qb[i] + u * (b as u64) % nn + v) % nn;
            w[k as usize]
        }) / cell.len() as f64
    });
    GroupFn::new(n, values)
}

/// Offsets realizing `q_y(x) = q(x - c_y)` for a global `q = a z^2 + b z + c`:
/// `q(z + w) - q(z) = (2 a w) z + (a w^2 + b w)` with `w = y - c_y`.
fn translate_offsets(n: usize, q: &QuadForm, center_of_y: &[usize]) -> Result<Vec<(u64, u64)>> {
    let QuadForm::Global { a, b, .. } = q else {
        return Err(Error::Precondition("translate offsets need a global form".into()));
    };
    let ni = n as i64;
    Ok((0..n)
        .map(|y| {
            let w = (y as i64 - center_of_y[y] as i64).rem_euclid(ni);
            let u = (2 * *a as i64 % ni * w).rem_euclid(ni) as u64;
            let v = ((*a as i64 % ni * (w * w % ni) % ni + *b as i64 % ni * w) % ni).rem_euclid(ni)
                as u64;
            (u, v)
        })
        .collect())
}

/// Greedy-cover construction of a special average with base `(B'', q)`:
/// cover `Z_N` by translates `x_i + B`, disjointify greedily, assign
/// `q_y = q(. - x_i)` on cell `i`, and measure the specialness certificate.
/// The measured exceptional fraction must come out at most `eps`.
pub fn build_special_average(b: &BohrSet, q: &QuadForm, eps: f64) -> Result<QuadAverage> {
    let n = b.modulus();
    if q.modulus() != n {
        return Err(Error::ModulusMismatch(q.modulus(), n));
    }
    if b.members().count() == n {
        return QuadAverage::global_phase(n, q.clone());
    }
    let d = b.dim();
    let eta = eps / 5f64.powi(d as i32);
    let pair = central_subset(b, eta.min(1.0))?;
    let window = b.with_width(pair.sigma / 2.0)?;
    let cover = bohr_cover(b)?;
    if !cover.covers {
        return Err(Error::SearchFailed("cover construction failed".into()));
    }
    let centers = cover.translates.clone();
    // Greedy disjointification: cell(y) = least i with y in x_i + B, minus
    // earlier cells; equivalently the least covering index.
    let mut center_of_y = vec![usize::MAX; n];
    for (i, &xi) in centers.iter().enumerate() {
        let cell = b.members().translate(xi);
        for y in 0..n {
            if center_of_y[y] == usize::MAX && cell.contains(y) {
                center_of_y[y] = i;
            }
        }
    }
    if center_of_y.iter().any(|&c| c == usize::MAX) {
        return Err(Error::SearchFailed("cover misses a residue".into()));
    }
    let abs_centers: Vec<usize> = center_of_y.iter().map(|&i| centers[i]).collect();
    let offsets = translate_offsets(n, q, &abs_centers)?;
    let mut qa = QuadAverage::from_assignment(window.clone(), q.clone(), offsets)?;

    // Certificate measurement. Good x: every y in x + B'' - B'' lies in one
    // cell, and the restriction of Q to x + B'' equals the corresponding
    // exact phase translate.
    let wtab = omega_table(n);
    let wm = window.members().members();
    let diff_window: Vec<usize> = {
        let d1 = window.members().sumset(&window.members().negate());
        d1.members()
    };
    let mut bad = 0usize;
    for x in 0..n {
        let first = center_of_y[(x + diff_window[0]) % n];
        let uniform = diff_window
            .iter()
            .all(|&t| center_of_y[(x + t) % n] == first);
        let mut good = uniform;
        if uniform {
            let xi = centers[first];
            for &u in &wm {
                let pt = (x + u) % n;
                let z = (pt + n - xi) % n;
                let qv = q.eval(z).ok_or_else(|| {
                    Error::Precondition(format!("base form undefined at {z}"))
                })?;
                if (qa.values.at(pt) - wtab[qv as usize]).norm() > 1e-9 {
                    good = false;
                    break;
                }
            }
        }
        if !good {
            bad += 1;
        }
    }
    let eps_measured = bad as f64 / n as f64;
    if eps_measured > eps + 1e-12 {
        return Err(Error::SearchFailed(format!(
            "specialness certificate failed: measured {eps_measured} > requested {eps}"
        )));
    }
    let m = centers.len();
    let bound = 5f64.powi(d as i32) / b.density();
    if m as f64 > bound + 1e-9 {
        return Err(Error::SearchFailed(format!(
            "cover cardinality {m} exceeds {bound}"
        )));
    }
    qa.special = Some(SpecialCert {
        eps_measured,
        m,
        centers,
    });
    Ok(qa)
}

/// Base shrinking: from `Q` with base `(B, q)` and a central pair
/// `B' prec_eps B`, builds the generalized average
/// `S(x) = E_{y in -A} E_{u in x - B'} omega^{q_{y+u}(x)}` with `A` the
/// interior, asserting `||Q - S||_inf <= 4 eps` by pointwise measurement.
pub fn shrink_base(qa: &QuadAverage, pair: &CentralPair) -> Result<QuadAverage> {
    if qa.is_generalized() {
        let comps = qa
            .components
            .iter()
            .map(|c| shrink_base(c, pair))
            .collect::<Result<Vec<_>>>()?;
        return QuadAverage::generalized(comps);
    }
    let n = qa.modulus();
    if pair.outer.modulus() != n {
        return Err(Error::ModulusMismatch(pair.outer.modulus(), n));
    }
    let interior = pair.interior.members().members();
    let inner = pair.inner.members().members();
    if interior.is_empty() {
        return Err(Error::EmptySet("interior of the pair".into()));
    }
    let w = omega_table(n);
    let nn = n as u64;
    // S(x) = E_{a in A} E_{v in B'} omega^{q_{x - a + v}(x)}   (A, B' symmetric)
    let values: Vec<Complex64> = crate::zn::par_map(n, |x| {
        pairwise_sum::<Complex64, _>(interior.len() * inner.len(), |i| {
            let a = interior[i / inner.len()];
            let v = inner[i % inner.len()];
            let y = (x + n - a + v) % n;
            let z = (x + n - y) % n;
            let qz = qa.q.eval(z).expect("global form");
            let (u, vv) = qa.offsets[y];
            let k = (qz + u * (z as u64) % nn + vv) % nn;
            w[k as usize]
        }) / (interior.len() * inner.len()) as f64
    });
    let svals = GroupFn::new(n, values)?;
    let dist = qa.values.sub(&svals)?.linf_norm();
    if dist > 4.0 * pair.eps + 1e-9 {
        return Err(Error::SearchFailed(format!(
            "base shrink distance {dist} exceeds {}",
            4.0 * pair.eps
        )));
    }
    // Components: one per y0 in -A, each an atomic average with window B'.
    let mut comps = Vec::with_capacity(interior.len());
    for &a in &interior {
        let y0 = (n - a) % n;
        let offs = component_offsets(n, &qa.q, &qa.offsets, y0)?;
        comps.push(QuadAverage::from_assignment(
            pair.inner.clone(),
            qa.q.clone(),
            offs,
        )?);
    }
    let mut out = QuadAverage::generalized(comps)?;
    out.values = svals;
    out.window = pair.inner.clone();
    out.q = qa.q.clone();
    Ok(out)
}

/// Offsets for the `y0`-component of a shrink: the translate parameter `w`
/// plays the role of `y` in `q_{y0 + w}`, re-expressed against base `q`:
/// `psi_w(z) = q(z - y0) + phi_{y0+w}(z - y0) - q(z)`.
fn component_offsets(
    n: usize,
    q: &QuadForm,
    offsets: &[(u64, u64)],
    y0: usize,
) -> Result<Vec<(u64, u64)>> {
    let QuadForm::Global { a, b, .. } = q else {
        return Err(Error::Precondition("component offsets need a global form".into()));
    };
    let ni = n as i64;
    Ok((0..n)
        .map(|wi| {
            let (u1, v1) = offsets[(y0 + wi) % n];
            let y = y0 as i64;
            // q(z - y) - q(z) = (-2 a y) z + (a y^2 - b y)
            let lin = (-(2 * *a as i64 % ni) * y + u1 as i64).rem_euclid(ni) as u64;
            let cst = ((*a as i64 % ni * (y * y % ni) % ni - *b as i64 % ni * y % ni
                - u1 as i64 * y % ni
                + v1 as i64)
                .rem_euclid(ni)) as u64;
            (lin, cst)
        })
        .collect())
}

/// Product of two averages over a common base family: builds the
/// generalized average with base `(B', q1 - q2)` and asserts
/// `||Q1 conj(Q2) - Q'||_inf <= 18 eps` pointwise.
pub fn product_average(
    qa1: &QuadAverage,
    qa2: &QuadAverage,
    eps: f64,
) -> Result<(QuadAverage, f64)> {
    let n = qa1.modulus();
    if qa2.modulus() != n {
        return Err(Error::ModulusMismatch(qa2.modulus(), n));
    }
    if qa1.window.freqs() != qa2.window.freqs()
        || (qa1.window.rho() - qa2.window.rho()).abs() > 1e-12
    {
        return Err(Error::Precondition(
            "product construction needs a common base family".into(),
        ));
    }
    if qa1.is_generalized() || qa2.is_generalized() {
        return Err(Error::Precondition("product takes atomic averages".into()));
    }
    let pair = central_subset(&qa1.window, eps)?;
    let interior = pair.interior.members().members();
    let inner = pair.inner.members().members();
    let w = omega_table(n);
    let nn = n as u64;
    let phase = |qa: &QuadAverage, y: usize, x: usize| -> u64 {
        let z = (x + n - y) % n;
        let qz = qa.q.eval(z).expect("global form");
        let (u, v) = qa.offsets[y];
        (qz + u * (z as u64) % nn + v) % nn
    };
    let values: Vec<Complex64> = crate::zn::par_map(n, |x| {
        pairwise_sum::<Complex64, _>(interior.len() * interior.len() * inner.len(), |i| {
            let a = interior[i / (interior.len() * inner.len())];
            let bb = interior[(i / inner.len()) % interior.len()];
            let v = inner[i % inner.len()];
            let y = (x + n - a + v) % n;
            let z = (x + n - bb + v) % n;
            let k = (phase(qa1, y, x) + nn - phase(qa2, z, x)) % nn;
            w[k as usize]
        }) / (interior.len() * interior.len() * inner.len()) as f64
    });
    let pvals = GroupFn::new(n, values)?;
    let target = qa1.values.mul(&qa2.values.conj())?;
    let dist = target.sub(&pvals)?.linf_norm();
    if dist > 18.0 * eps + 1e-9 {
        return Err(Error::SearchFailed(format!(
            "product distance {dist} exceeds {}",
            18.0 * eps
        )));
    }
    let qdiff = qa1.q.sub_global(&qa2.q)?;
    let out = QuadAverage {
        window: pair.inner.clone(),
        q: qdiff,
        offsets: Vec::new(),
        components: Vec::new(),
        values: pvals,
        special: None,
    };
    Ok((out, dist))
}

/// The high-rank checks: expectation, `U^2`, and correlation bounds driven
/// by a measured rank.
pub fn high_rank_expectation_check(
    qa: &QuadAverage,
    probe: &SubsetZn,
    eps: f64,
) -> Result<CheckReport> {
    let r = rank_alpha(&qa.q, &probe.members())?;
    let rank = if r <= 0.0 { f64::INFINITY } else { (1.0 / r).ln() };
    let lhs = qa.values.mean().norm();
    let rhs = (11.0 * eps + (-rank).exp()).powf(0.25);
    Ok(CheckReport::new(
        "high-rank-expectation",
        lhs,
        rhs,
        format!("N={} |P|={} eps={eps} rank={rank:.3}", qa.modulus(), probe.count()),
    ))
}

pub fn high_rank_u2_check(qa: &QuadAverage, probe: &SubsetZn, eps: f64) -> Result<CheckReport> {
    let r = rank_alpha(&qa.q, &probe.members())?;
    let rank = if r <= 0.0 { f64::INFINITY } else { (1.0 / r).ln() };
    let lhs = u2_norm(&qa.values);
    let rhs = (11.0 * eps + (-rank).exp()).powf(0.125);
    Ok(CheckReport::new(
        "high-rank-u2",
        lhs,
        rhs,
        format!("N={} |P|={} eps={eps} rank={rank:.3}", qa.modulus(), probe.count()),
    ))
}

/// Correlation bound for two averages: the rank of the difference form
/// controls `|<Q, Q'>|`.
pub fn high_rank_correlation_check(
    qa1: &QuadAverage,
    qa2: &QuadAverage,
    probe: &SubsetZn,
    eps: f64,
) -> Result<CheckReport> {
    let qdiff = qa1.q.sub_global(&qa2.q)?;
    let alpha = rank_alpha(&qdiff, &probe.members())?;
    let rank = if alpha <= 0.0 {
        f64::INFINITY
    } else {
        (1.0 / alpha).ln()
    };
    let lhs = inner(&qa1.values, &qa2.values)?.norm();
    let rhs = 18.0 * eps + (11.0 * eps + (-rank).exp()).powf(0.25);
    Ok(CheckReport::new(
        "high-rank-correlation",
        lhs,
        rhs,
        format!("N={} |P|={} eps={eps} rank={rank:.3}", qa1.modulus(), probe.count()),
    ))
}
