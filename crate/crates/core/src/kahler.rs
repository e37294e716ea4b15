//! Hard Lefschetz, Hodge–Riemann and the Chow–Kähler property.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::balancing::{induced_star_weight, Weight};
use crate::chow::{pd_check, ChowClass, ChowRing, Coefficients};
use crate::error::{Error, Result};
use crate::fan::{Cone, Fan};
use crate::linalg::{rank_rat, rational_kernel, signature, Rat, RatMatrix, Signature};
use crate::piecewise::{convexity_check, induced_function, quasi_projective_check, ConewiseLinear};

pub fn ell_of(ring: &ChowRing, f: &ConewiseLinear) -> Result<ChowClass> {
    ring.ell(f)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HrDegree {
    pub k: usize,
    pub hl: bool,
    pub signature: Signature,
    pub expected: i64,
    pub primitive_dim: usize,
    pub primitive_definite: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HrReport {
    pub degrees: Vec<HrDegree>,
    pub hl: bool,
    pub pass: bool,
}

/// Matrix (columns = images in free coordinates) of multiplication by `ℓ^e`
/// from `A^k` to `A^{k+e}`.
fn lefschetz_matrix(ring: &ChowRing, ell: &ChowClass, k: usize, e: usize) -> Result<RatMatrix> {
    let src = ring.free_basis(k);
    let tgt_rank = ring.pieces.get(k + e).map_or(0, |p| p.free_rank);
    let le = ring.power(ell, e)?;
    let mut cols = Vec::with_capacity(src.len());
    for a in &src {
        let img = ring.multiply(&le, a)?;
        cols.push(if k + e <= ring.dim() { ring.free_coordinates(&img) } else { Vec::new() });
    }
    Ok(RatMatrix::from_cols(&cols, tgt_rank))
}

fn require_pd(ring: &ChowRing) -> Result<ChowRing> {
    let q = if ring.mode == Coefficients::Q { ring.clone() } else { to_q(ring)? };
    if !pd_check(&q)?.holds {
        return Err(Error::PDFails);
    }
    Ok(q)
}

fn to_q(ring: &ChowRing) -> Result<ChowRing> {
    let w = ring.weight.as_ref().ok_or_else(|| Error::InvalidFan("ring has no orientation".into()))?;
    ChowRing::with_weight(&ring.fan, w, Coefficients::Q)
}

/// Per-degree Hard Lefschetz flags for `k ≤ d/2`.
pub fn hl_check(ring: &ChowRing, ell: &ChowClass) -> Result<Vec<(usize, bool)>> {
    let q = require_pd(ring)?;
    let d = q.dim();
    (0..=d / 2)
        .map(|k| {
            let m = lefschetz_matrix(&q, ell, k, d - 2 * k)?;
            Ok((k, rank_rat(&m) == q.pieces[k].free_rank))
        })
        .collect()
}

pub fn expected_signature(ranks: &[usize], k: usize) -> i64 {
    (0..=k)
        .map(|i| {
            let prev = if i == 0 { 0 } else { ranks[i - 1] as i64 };
            let s = ranks[i] as i64 - prev;
            if i % 2 == 0 { s } else { -s }
        })
        .sum()
}

pub fn hr_check(ring: &ChowRing, ell: &ChowClass) -> Result<HrReport> {
    let q = require_pd(ring)?;
    let d = q.dim();
    let ranks = q.ranks();
    let degrees: Vec<HrDegree> = (0..=d / 2)
        .into_par_iter()
        .map(|k| {
            let basis = q.free_basis(k);
            let lm = lefschetz_matrix(&q, ell, k, d - 2 * k)?;
            let hl = rank_rat(&lm) == ranks[k];
            let le = q.power(ell, d - 2 * k)?;
            let twisted: Vec<ChowClass> = basis.iter().map(|b| q.multiply(&le, b)).collect::<Result<_>>()?;
            let gram = q.gram(&basis, &twisted)?;
            let sig = signature(&gram)?;
            let expected = expected_signature(&ranks, k);
            let prim = lefschetz_matrix(&q, ell, k, d - 2 * k + 1)?;
            let kernel: Vec<Vec<Rat>> = if prim.rows() == 0 {
                (0..basis.len())
                    .map(|i| {
                        let mut e = vec![Rat::zero(); basis.len()];
                        e[i] = Rat::one();
                        e
                    })
                    .collect()
            } else {
                rational_kernel(&prim)
            };
            let kmat = RatMatrix::from_cols(&kernel, basis.len());
            let restricted = kmat.transpose().mul(&gram).mul(&kmat);
            let sign = if k % 2 == 0 { Rat::one() } else { -Rat::one() };
            let rs = signature(&restricted.map(|x| x * &sign))?;
            let primitive_definite = rs.plus == kernel.len();
            let pass = hl && sig.zero == 0 && sig.value() == expected && primitive_definite;
            Ok(HrDegree { k, hl, signature: sig, expected, primitive_dim: kernel.len(), primitive_definite, pass })
        })
        .collect::<Result<_>>()?;
    let hl = degrees.iter().all(|x| x.hl);
    let pass = degrees.iter().all(|x| x.pass);
    Ok(HrReport { degrees, hl, pass })
}

/// Ampleness of `ℓ(f)` through strict convexity of `f`.
pub fn ample_check(fan: &Fan, f: &ConewiseLinear) -> Result<bool> {
    Ok(convexity_check(fan, f)?.strictly_convex)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarKahler {
    pub cone: Cone,
    pub pd_q: bool,
    pub ample: bool,
    pub hr: Option<HrReport>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChowKahlerReport {
    pub quasi_projective: bool,
    pub witness: Option<ConewiseLinear>,
    pub stars: Vec<StarKahler>,
    pub pass: bool,
}

/// Runs HR on every star fan with the induced witness (or a per-star override).
pub fn chow_kahler_check(
    fan: &Fan,
    w: &Weight,
    global: Option<&ConewiseLinear>,
    per_star: &BTreeMap<Cone, ConewiseLinear>,
) -> Result<ChowKahlerReport> {
    let (quasi_projective, witness) = match global {
        Some(f) => (convexity_check(fan, f)?.strictly_convex, Some(f.clone())),
        None => {
            let q = quasi_projective_check(fan)?;
            (q.holds, q.certificate)
        }
    };
    let cones: Vec<Cone> = fan.all_cones().cloned().collect();
    let stars: Vec<StarKahler> = cones
        .par_iter()
        .map(|c| {
            let (st, ws) = induced_star_weight(fan, w, c)?;
            let f = match (per_star.get(c), &witness) {
                (Some(f), _) => f.clone(),
                (None, Some(g)) => induced_function(fan, g, c)?.function,
                (None, None) => return Err(Error::MissingWitness(c.clone())),
            };
            let ring = ChowRing::with_weight(&st.fan, &ws, Coefficients::Q)?;
            let pd_q = pd_check(&ring)?.holds;
            let ample = ample_check(&st.fan, &f)?;
            let hr = if pd_q { Some(hr_check(&ring, &ring.ell(&f)?)?) } else { None };
            let pass = hr.as_ref().is_some_and(|h| h.pass);
            Ok(StarKahler { cone: c.clone(), pd_q, ample, hr, pass })
        })
        .collect::<Result<_>>()?;
    let pass = quasi_projective && stars.iter().all(|s| s.pass);
    Ok(ChowKahlerReport { quasi_projective, witness, stars, pass })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsilonResult {
    pub epsilon: Rat,
    pub hr: bool,
    pub hl: bool,
    pub ample: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AscentDescentReport {
    pub results: Vec<EpsilonResult>,
    /// Largest sampled ε with HR on the blow-up.
    pub largest_passing: Option<Rat>,
    /// HR passes for every sampled ε below the largest passing one.
    pub monotone: bool,
    pub base_hl: bool,
    pub base_hr: bool,
    /// Descent: HL on Σ with HR on Σ' for some sampled ε gives HR on Σ.
    pub descent_consistent: bool,
}

pub fn default_epsilons() -> Vec<Rat> {
    (1..=8).map(|i| Rat::new(1.into(), num_bigint::BigInt::from(1u64 << i))).collect()
}

pub fn ascent_descent_probe(
    fan: &Fan,
    w: &Weight,
    sigma: &[usize],
    h: &ConewiseLinear,
    epsilons: &[Rat],
) -> Result<AscentDescentReport> {
    let sigma = crate::fan::sorted(sigma);
    if sigma.len() < 2 {
        return Err(Error::ConeTooSmall);
    }
    if !fan.is_unimodular() {
        return Err(Error::HypothesisFails("fan is not unimodular".into()));
    }
    let (st, ws) = induced_star_weight(fan, w, &sigma)?;
    let hs = induced_function(fan, h, &sigma)?.function;
    let star_ring = ChowRing::with_weight(&st.fan, &ws, Coefficients::Q)?;
    let star_ok = match hr_check(&star_ring, &star_ring.ell(&hs)?) {
        Ok(r) => r.pass,
        Err(Error::PDFails) => false,
        Err(e) => return Err(e),
    };
    if !star_ok {
        return Err(Error::HypothesisFails("HR fails on the star of the center".into()));
    }
    let sub = fan.stellar_subdivide(&sigma, None)?;
    let ws2 = crate::chow::subdivision_weight(fan, w, &sigma, &sub)?;
    let ring = ChowRing::with_weight(&sub, &ws2, Coefficients::Q)?;
    let rho = sub.n_rays() - 1;
    let mut vals = h.values.clone();
    vals.push(sigma.iter().map(|&z| h.values[z].clone()).sum());
    let pulled = ConewiseLinear::new(vals);
    let mut results = Vec::new();
    for e in epsilons {
        let mut g = pulled.clone();
        g.values[rho] -= e;
        let ell = ring.ell(&g)?;
        let (hr, hl) = match hr_check(&ring, &ell) {
            Ok(r) => (r.pass, r.hl),
            Err(Error::PDFails) => (false, false),
            Err(err) => return Err(err),
        };
        results.push(EpsilonResult { epsilon: e.clone(), hr, hl, ample: ample_check(&sub, &g)? });
    }
    let largest_passing = results.iter().filter(|r| r.hr).map(|r| r.epsilon.clone()).max();
    let monotone = match &largest_passing {
        None => true,
        Some(m) => results.iter().filter(|r| &r.epsilon <= m).all(|r| r.hr),
    };
    let base = ChowRing::with_weight(fan, w, Coefficients::Q)?;
    let (base_hl, base_hr) = match hr_check(&base, &base.ell(h)?) {
        Ok(r) => (r.hl, r.pass),
        Err(Error::PDFails) => (false, false),
        Err(e) => return Err(e),
    };
    let any_pass = results.iter().any(|r| r.hr && r.epsilon > Rat::zero());
    let descent_consistent = !(base_hl && any_pass) || base_hr;
    Ok(AscentDescentReport { results, largest_passing, monotone, base_hl, base_hr, descent_consistent })
}
