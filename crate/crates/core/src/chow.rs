//! Chow rings of simplicial fans from the localization presentation.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::balancing::{induced_star_weight, is_balanced, mw_group, product_weight, star_weight, Weight};
use crate::error::{Error, Result};
use crate::fan::{insert_sorted, is_subset, minus, Cone, Fan, StarFan};
use crate::linalg::{
    self, det_rat, integer_kernel, rank_rat, rat_from_int, reduce_mod_rows, row_lattice_basis, rref, smith,
    solve_integer, solve_rational, to_rat_matrix, to_rat_vec, Int, IntMatrix, Rat, RatMatrix, SmithData,
};
use crate::piecewise::{divisor_matrix, is_div_faithful_at_origin, tropical_modification, ConewiseLinear};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coefficients {
    Z,
    Q,
}

/// `A^k = Z^{Σ_k} / rowspace(R_k)`.
#[derive(Clone, Debug)]
pub struct ChowPiece {
    pub degree: usize,
    pub generators: Vec<Cone>,
    pub relations: IntMatrix,
    pub smith: SmithData,
    pub free_rank: usize,
    pub torsion: Vec<Int>,
    hnf: IntMatrix,
    echelon: RatMatrix,
    pivots: Vec<usize>,
    right_inv: RatMatrix,
}

/// Basis (columns) of `M^τ`, the integral functionals vanishing on τ.
pub fn annihilator(fan: &Fan, tau: &[usize]) -> IntMatrix {
    if tau.is_empty() {
        return IntMatrix::identity(fan.rank());
    }
    integer_kernel(&fan.ray_matrix(tau).transpose())
}

/// Relation matrix of degree `k`: one row per `(τ ∈ Σ_{k−1}, m)`.
pub fn relation_matrix(fan: &Fan, k: usize) -> Result<IntMatrix> {
    let gens = fan.cones(k);
    let g = gens.len();
    if k == 0 {
        return Ok(IntMatrix::zeros(0, g));
    }
    let mut rows = Vec::new();
    for tau in fan.cones(k - 1) {
        let cover = fan.covering(tau);
        if cover.is_empty() {
            continue;
        }
        let normals: Vec<(usize, Vec<Int>)> = cover
            .iter()
            .map(|(_, s)| Ok((fan.cone_index(s).expect("cone"), fan.unit_normal(tau, s)?)))
            .collect::<Result<_>>()?;
        let ann = annihilator(fan, tau);
        for m in ann.col_vecs() {
            let mut row = vec![Int::zero(); g];
            for (j, n) in &normals {
                row[*j] = linalg::dot(&m, n);
            }
            if row.iter().any(|x| !x.is_zero()) {
                rows.push(row);
            }
        }
    }
    Ok(IntMatrix::from_rows(&rows, g))
}

impl ChowPiece {
    pub fn new(fan: &Fan, k: usize) -> Result<ChowPiece> {
        let relations = relation_matrix(fan, k)?;
        let generators = fan.cones(k).to_vec();
        let smith = smith(&relations);
        let r = smith.rank();
        let free_rank = generators.len() - r;
        let torsion = smith.torsion();
        let hnf = row_lattice_basis(&relations);
        let (ech, piv) = rref(&to_rat_matrix(&relations));
        let echelon = ech.select_rows(&(0..piv.len()).collect::<Vec<_>>());
        let right_inv = linalg::inverse_rat(&to_rat_matrix(&smith.right)).expect("unimodular");
        Ok(ChowPiece { degree: k, generators, relations, smith, free_rank, torsion, hnf, echelon, pivots: piv, right_inv })
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    fn rel_rank(&self) -> usize {
        self.smith.rank()
    }

    /// Smith coordinates `y·V` of a representative.
    pub fn coordinates(&self, v: &[Rat]) -> Vec<Rat> {
        to_rat_matrix(&self.smith.right).vec_mul(v)
    }

    /// Free coordinates of the class of `v`.
    pub fn free_coordinates(&self, v: &[Rat]) -> Vec<Rat> {
        self.coordinates(v)[self.rel_rank()..].to_vec()
    }

    /// Torsion coordinates (reduced) paired with their orders.
    pub fn torsion_coordinates(&self, v: &[Int]) -> Vec<(Int, Int)> {
        let c = self.smith.right.vec_mul(v);
        self.smith
            .invariant_factors
            .iter()
            .zip(&c)
            .filter(|(d, _)| !d.is_one())
            .map(|(d, x)| (num_integer::Integer::mod_floor(x, d), d.clone()))
            .collect()
    }

    /// Representatives of a basis of the free part.
    pub fn free_basis(&self) -> Vec<Vec<Rat>> {
        (self.rel_rank()..self.len()).map(|i| self.right_inv.row(i).to_vec()).collect()
    }

    /// Generators of the torsion part with their orders.
    pub fn torsion_basis(&self) -> Vec<(Vec<Rat>, Int)> {
        self.smith
            .invariant_factors
            .iter()
            .enumerate()
            .filter(|(_, d)| !d.is_one())
            .map(|(i, d)| (self.right_inv.row(i).to_vec(), d.clone()))
            .collect()
    }

    /// Canonical representative: Hermite reduction over Z, echelon reduction over Q.
    pub fn reduce(&self, v: &[Rat], mode: Coefficients) -> Vec<Rat> {
        match mode {
            Coefficients::Z if v.iter().all(|x| x.is_integer()) => {
                let iv: Vec<Int> = v.iter().map(|x| x.to_integer()).collect();
                to_rat_vec(&reduce_mod_rows(&self.hnf, &iv))
            }
            _ => {
                let mut out = v.to_vec();
                for (i, &p) in self.pivots.iter().enumerate() {
                    if out[p].is_zero() {
                        continue;
                    }
                    let c = out[p].clone();
                    for (o, e) in out.iter_mut().zip(self.echelon.row(i)) {
                        *o -= &c * e;
                    }
                }
                out
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChowClass {
    pub degree: usize,
    pub coeffs: Vec<Rat>,
}

impl ChowClass {
    pub fn add(&self, o: &ChowClass) -> ChowClass {
        assert_eq!(self.degree, o.degree);
        ChowClass { degree: self.degree, coeffs: linalg::vec_add(&self.coeffs, &o.coeffs) }
    }

    pub fn sub(&self, o: &ChowClass) -> ChowClass {
        assert_eq!(self.degree, o.degree);
        ChowClass { degree: self.degree, coeffs: linalg::vec_sub(&self.coeffs, &o.coeffs) }
    }

    pub fn scale(&self, c: &Rat) -> ChowClass {
        ChowClass { degree: self.degree, coeffs: linalg::vec_scale(c, &self.coeffs) }
    }

    pub fn neg(&self) -> ChowClass {
        self.scale(&-Rat::one())
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_integer())
    }
}

type Rewrite = Option<Vec<(usize, Rat)>>;

#[derive(Clone, Debug)]
pub struct ChowRing {
    pub fan: Fan,
    pub weight: Option<Weight>,
    pub mode: Coefficients,
    pub pieces: Vec<ChowPiece>,
    /// Integral computation on a non-unimodular fan.
    pub advisory: bool,
    rewrites: HashMap<(Cone, usize), Rewrite>,
}

impl ChowRing {
    pub fn new(fan: &Fan, mode: Coefficients) -> Result<ChowRing> {
        let d = fan.dim();
        let pieces: Vec<ChowPiece> = (0..=d).into_par_iter().map(|k| ChowPiece::new(fan, k)).collect::<Result<_>>()?;
        let mut keys = Vec::new();
        for k in 1..d {
            for s in fan.cones(k) {
                for &z in s {
                    keys.push((s.clone(), z));
                }
            }
        }
        let rewrites: HashMap<(Cone, usize), Rewrite> =
            keys.into_par_iter().map(|(s, z)| {
                let r = compute_rewrite(fan, &s, z, mode);
                ((s, z), r)
            }).collect();
        let advisory = mode == Coefficients::Z && !fan.is_unimodular();
        Ok(ChowRing { fan: fan.clone(), weight: None, mode, pieces, advisory, rewrites })
    }

    /// Ring with an orientation used by `degree`; the weight must be balanced.
    pub fn with_weight(fan: &Fan, w: &Weight, mode: Coefficients) -> Result<ChowRing> {
        if w.dim != fan.dim() {
            return Err(Error::DimensionMismatch(w.dim, fan.dim()));
        }
        if !is_balanced(fan, w)? {
            return Err(Error::InvalidFan("orientation is not balanced".into()));
        }
        let mut r = ChowRing::new(fan, mode)?;
        r.weight = Some(w.clone());
        Ok(r)
    }

    pub fn dim(&self) -> usize {
        self.fan.dim()
    }

    pub fn piece(&self, k: usize) -> Option<&ChowPiece> {
        self.pieces.get(k)
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.pieces.iter().map(|p| p.free_rank).collect()
    }

    pub fn torsion_free(&self) -> bool {
        self.pieces.iter().all(|p| p.torsion.is_empty())
    }

    pub fn zero(&self, k: usize) -> ChowClass {
        ChowClass { degree: k, coeffs: vec![Rat::zero(); self.fan.cones(k).len()] }
    }

    pub fn one(&self) -> ChowClass {
        self.generator(&[]).expect("origin")
    }

    pub fn generator(&self, cone: &[usize]) -> Result<ChowClass> {
        let c = crate::fan::sorted(cone);
        let i = self.fan.cone_index(&c).ok_or_else(|| Error::ConeNotInFan(c.clone()))?;
        let mut z = self.zero(c.len());
        z.coeffs[i] = Rat::one();
        Ok(z)
    }

    pub fn class(&self, k: usize, coeffs: Vec<Rat>) -> Result<ChowClass> {
        if coeffs.len() != self.fan.cones(k).len() {
            return Err(Error::DimensionMismatch(coeffs.len(), self.fan.cones(k).len()));
        }
        Ok(ChowClass { degree: k, coeffs })
    }

    /// `ℓ(f) = Σ f(e_ζ) x_ζ`.
    pub fn ell(&self, f: &ConewiseLinear) -> Result<ChowClass> {
        f.check(&self.fan)?;
        if self.fan.dim() == 0 {
            return Ok(self.zero(1));
        }
        let mut c = self.zero(1);
        for (r, v) in f.values.iter().enumerate() {
            let i = self.fan.cone_index(&[r]).expect("ray cone");
            c.coeffs[i] = v.clone();
        }
        Ok(c)
    }

    fn check(&self, a: &ChowClass) -> Result<()> {
        if a.coeffs.len() != self.fan.cones(a.degree).len() {
            return Err(Error::HostMismatch);
        }
        Ok(())
    }

    /// `x_ζ · a`.
    pub fn mul_ray(&self, z: usize, a: &ChowClass) -> Result<ChowClass> {
        self.check(a)?;
        let k = a.degree;
        let mut out = self.zero(k + 1);
        if k + 1 > self.dim() {
            return Ok(out);
        }
        for (s, c) in self.fan.cones(k).iter().zip(&a.coeffs) {
            if c.is_zero() {
                continue;
            }
            if s.contains(&z) {
                let rw = self.rewrites.get(&(s.clone(), z)).expect("rewrite table");
                match rw {
                    None => return Err(Error::NonIntegralRewrite(s.clone())),
                    Some(terms) => {
                        for (j, t) in terms {
                            out.coeffs[*j] += c * t;
                        }
                    }
                }
            } else if let Some(j) = self.fan.cone_index(&insert_sorted(s, z)) {
                out.coeffs[j] += c;
            }
        }
        Ok(out)
    }

    /// `x_σ · a`.
    pub fn mul_monomial(&self, sigma: &[usize], a: &ChowClass) -> Result<ChowClass> {
        let mut t = a.clone();
        for &z in sigma {
            t = self.mul_ray(z, &t)?;
        }
        Ok(t)
    }

    pub fn multiply(&self, a: &ChowClass, b: &ChowClass) -> Result<ChowClass> {
        self.check(a)?;
        self.check(b)?;
        let k = a.degree + b.degree;
        let mut out = self.zero(k);
        if k > self.dim() {
            return Ok(out);
        }
        for (s, c) in self.fan.cones(a.degree).iter().zip(&a.coeffs) {
            if c.is_zero() {
                continue;
            }
            let t = self.mul_monomial(s, b)?;
            for (o, v) in out.coeffs.iter_mut().zip(&t.coeffs) {
                *o += c * v;
            }
        }
        Ok(out)
    }

    pub fn power(&self, a: &ChowClass, e: usize) -> Result<ChowClass> {
        let mut t = self.one();
        for _ in 0..e {
            t = self.multiply(&t, a)?;
        }
        Ok(t)
    }

    pub fn degree(&self, a: &ChowClass) -> Result<Rat> {
        self.check(a)?;
        let d = self.dim();
        if a.degree != d {
            return Err(Error::DegreeMismatch { expected: d, got: a.degree });
        }
        let w = self.weight.as_ref().ok_or_else(|| Error::InvalidFan("ring has no orientation".into()))?;
        Ok(a.coeffs.iter().zip(&w.values).map(|(c, v)| c * rat_from_int(v)).sum())
    }

    pub fn reduce(&self, a: &ChowClass) -> ChowClass {
        match self.pieces.get(a.degree) {
            Some(p) => ChowClass { degree: a.degree, coeffs: p.reduce(&a.coeffs, self.mode) },
            None => a.clone(),
        }
    }

    pub fn is_zero(&self, a: &ChowClass) -> bool {
        self.reduce(a).coeffs.iter().all(|x| x.is_zero())
    }

    pub fn equal(&self, a: &ChowClass, b: &ChowClass) -> bool {
        a.degree == b.degree && self.is_zero(&a.sub(b))
    }

    /// Order of a class in `A^k`; `None` means infinite.
    pub fn order(&self, a: &ChowClass) -> Option<Int> {
        let p = &self.pieces[a.degree];
        if p.free_coordinates(&a.coeffs).iter().any(|x| !x.is_zero()) {
            return None;
        }
        let iv = linalg::to_int_vec(&a.coeffs)?;
        let c = p.smith.right.vec_mul(&iv);
        let mut ord = Int::one();
        for (d, x) in p.smith.invariant_factors.iter().zip(&c) {
            let g = num_integer::Integer::gcd(x, d);
            ord = num_integer::Integer::lcm(&ord, &(d / g));
        }
        Some(ord)
    }

    pub fn free_basis(&self, k: usize) -> Vec<ChowClass> {
        match self.pieces.get(k) {
            Some(p) => p.free_basis().into_iter().map(|c| ChowClass { degree: k, coeffs: c }).collect(),
            None => Vec::new(),
        }
    }

    /// Free coordinates of a class.
    pub fn free_coordinates(&self, a: &ChowClass) -> Vec<Rat> {
        self.pieces.get(a.degree).map_or_else(Vec::new, |p| p.free_coordinates(&a.coeffs))
    }

    pub fn gram(&self, rows: &[ChowClass], cols: &[ChowClass]) -> Result<RatMatrix> {
        let entries: Vec<Vec<Rat>> = rows
            .par_iter()
            .map(|a| cols.iter().map(|b| self.degree(&self.multiply(a, b)?)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(RatMatrix::from_rows(&entries, cols.len()))
    }

    /// `deg(a·b)` on free bases of `A^k` and `A^{d−k}`.
    pub fn pairing_matrix(&self, k: usize) -> Result<RatMatrix> {
        let d = self.dim();
        self.gram(&self.free_basis(k), &self.free_basis(d - k))
    }

    /// `cl(α)(σ) = deg(α · x_σ)`.
    pub fn cycle_class(&self, a: &ChowClass) -> Result<Weight> {
        let d = self.dim();
        if a.degree > d {
            return Err(Error::DegreeMismatch { expected: d, got: a.degree });
        }
        let p = d - a.degree;
        let mut values = Vec::new();
        for s in self.fan.cones(p) {
            let v = self.degree(&self.mul_monomial(s, a)?)?;
            if !v.is_integer() {
                return Err(Error::NonIntegralRewrite(s.clone()));
            }
            values.push(v.to_integer());
        }
        Ok(Weight { dim: p, values })
    }

    /// Compares `ker(R_k)` with `MW_k`: both are Hermite-canonical.
    pub fn duality_check(&self, k: usize) -> Result<bool> {
        let p = &self.pieces[k];
        let ker = integer_kernel(&p.relations);
        let mw = mw_group(&self.fan, k)?;
        Ok(ker.col_vecs() == mw.basis)
    }
}

fn compute_rewrite(fan: &Fan, s: &[usize], z: usize, mode: Coefficients) -> Rewrite {
    let rm = fan.ray_matrix(s).transpose();
    let rhs: Vec<Int> = s.iter().map(|&i| if i == z { Int::one() } else { Int::zero() }).collect();
    let m: Vec<Rat> = match mode {
        Coefficients::Z => to_rat_vec(&solve_integer(&rm, &rhs)?),
        Coefficients::Q => solve_rational(&to_rat_matrix(&rm), &to_rat_vec(&rhs)).expect("simplicial cone"),
    };
    let mut out = Vec::new();
    for (r, c) in fan.covering(s) {
        let v = linalg::dot(&m, &to_rat_vec(fan.ray(r)));
        if !v.is_zero() {
            out.push((fan.cone_index(&c).expect("covering"), -v));
        }
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// Poincaré duality

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingInfo {
    pub degree: usize,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub determinant: Option<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdReport {
    pub holds: bool,
    pub mode: Coefficients,
    pub ranks: Vec<usize>,
    pub torsion: Vec<Vec<Int>>,
    pub per_degree: Vec<PairingInfo>,
    /// gcd of the orientation values.
    pub weight_gcd: Int,
}

pub fn pd_check(ring: &ChowRing) -> Result<PdReport> {
    let d = ring.dim();
    let mut per = Vec::new();
    let mut ok = true;
    for k in 0..=d {
        let m = ring.pairing_matrix(k)?;
        let rank = rank_rat(&m);
        let square = m.rows() == m.cols();
        let det = if square { Some(det_rat(&m)) } else { None };
        let full = square && rank == m.rows();
        let good = match ring.mode {
            Coefficients::Q => full,
            Coefficients::Z => full && det.as_ref().is_some_and(|x| x.abs().is_one()),
        };
        ok &= good;
        per.push(PairingInfo { degree: k, rows: m.rows(), cols: m.cols(), rank, determinant: det });
    }
    if ring.mode == Coefficients::Z {
        ok &= ring.torsion_free();
    }
    let w = ring.weight.as_ref().ok_or_else(|| Error::InvalidFan("ring has no orientation".into()))?;
    let g = linalg::content(&w.values);
    if ok && ring.mode == Coefficients::Z {
        debug_assert!(g.is_one());
    }
    Ok(PdReport {
        holds: ok,
        mode: ring.mode,
        ranks: ring.ranks(),
        torsion: ring.pieces.iter().map(|p| p.torsion.clone()).collect(),
        per_degree: per,
        weight_gcd: g,
    })
}

// ---------------------------------------------------------------------------
// restriction and Gysin maps

/// `i*: A(Σ^τ) → A(Σ^σ)` and `gys: A(Σ^σ) → A(Σ^τ)`, realized on the star
/// `Σ^τ` and its star at the image of σ.
#[derive(Clone, Debug)]
pub struct RestrictionGysin {
    pub tau: Cone,
    pub sigma: Cone,
    pub outer: StarFan,
    pub inner: StarFan,
    pub source: ChowRing,
    pub target: ChowRing,
    /// `i*(x_r)` for each ray of `Σ^τ`.
    pub ray_images: Vec<ChowClass>,
}

pub fn restriction_and_gysin(fan: &Fan, w: &Weight, tau: &[usize], sigma: &[usize], mode: Coefficients) -> Result<RestrictionGysin> {
    let tau = crate::fan::sorted(tau);
    let sigma = crate::fan::sorted(sigma);
    fan.require(&tau)?;
    fan.require(&sigma)?;
    if !is_subset(&tau, &sigma) {
        return Err(Error::NotComparable(tau, sigma));
    }
    let (outer, wt) = induced_star_weight(fan, w, &tau)?;
    let sp = outer.star_cone_of(&sigma).expect("σ is a coface of τ");
    let (inner, ws) = induced_star_weight(&outer.fan, &wt, &sp)?;
    let source = ChowRing::with_weight(&outer.fan, &wt, mode)?;
    let target = ChowRing::with_weight(&inner.fan, &ws, mode)?;
    let sf = &outer.fan;
    let mut ray_images = Vec::new();
    for r in 0..sf.n_rays() {
        let img = if sp.contains(&r) {
            let rm = sf.ray_matrix(&sp).transpose();
            let rhs: Vec<Rat> = sp.iter().map(|&i| if i == r { Rat::one() } else { Rat::zero() }).collect();
            let m = match mode {
                Coefficients::Z => to_rat_vec(
                    &solve_integer(&rm, &rhs.iter().map(|x| x.to_integer()).collect::<Vec<_>>())
                        .ok_or_else(|| Error::NonIntegralRewrite(sp.clone()))?,
                ),
                Coefficients::Q => solve_rational(&to_rat_matrix(&rm), &rhs).expect("simplicial"),
            };
            let mut c = target.zero(1);
            for (i, &eta) in inner.ray_origin.iter().enumerate() {
                let v = linalg::dot(&m, &to_rat_vec(sf.ray(eta)));
                let j = target.fan.cone_index(&[i]).expect("ray");
                c.coeffs[j] -= v;
            }
            c
        } else if let Some(i) = inner.ray_origin.iter().position(|&o| o == r) {
            target.generator(&[i])?
        } else {
            target.zero(1)
        };
        ray_images.push(img);
    }
    Ok(RestrictionGysin { tau, sigma, outer, inner, source, target, ray_images })
}

impl RestrictionGysin {
    pub fn codim(&self) -> usize {
        self.sigma.len() - self.tau.len()
    }

    pub fn restrict(&self, a: &ChowClass) -> Result<ChowClass> {
        let mut out = self.target.zero(a.degree);
        if a.degree > self.target.dim() {
            return Ok(out);
        }
        for (g, c) in self.source.fan.cones(a.degree).iter().zip(&a.coeffs) {
            if c.is_zero() {
                continue;
            }
            let mut t = self.target.one();
            for &r in g {
                t = self.target.multiply(&t, &self.ray_images[r])?;
            }
            out = out.add(&t.scale(c));
        }
        Ok(out)
    }

    pub fn gysin(&self, b: &ChowClass) -> Result<ChowClass> {
        let mut out = self.source.zero(b.degree + self.codim());
        for (g, c) in self.target.fan.cones(b.degree).iter().zip(&b.coeffs) {
            if c.is_zero() {
                continue;
            }
            let cof = self.inner.coface_of(g);
            let j = self.source.fan.cone_index(&cof).expect("coface");
            out.coeffs[j] += c;
        }
        Ok(out)
    }

    fn sigma_class(&self) -> ChowClass {
        self.source.generator(&self.inner.base).expect("σ in star")
    }

    /// The four identities and the ring-map property on generators.
    pub fn verify(&self) -> Result<RestrictionReport> {
        let s = &self.source;
        let t = &self.target;
        let xs = self.sigma_class();
        let src_gens: Vec<ChowClass> = s.fan.all_cones().map(|c| s.generator(c)).collect::<Result<_>>()?;
        let tgt_gens: Vec<ChowClass> = t.fan.all_cones().map(|c| t.generator(c)).collect::<Result<_>>()?;
        let mut gys_res = true;
        let mut proj = true;
        let mut deg_compat = true;
        let mut adj = true;
        let mut ring_hom = true;
        for x in &src_gens {
            let ix = self.restrict(x)?;
            gys_res &= s.equal(&self.gysin(&ix)?, &s.multiply(&xs, x)?);
            for y in &tgt_gens {
                let lhs = self.gysin(&t.multiply(&ix, y)?)?;
                let rhs = s.multiply(x, &self.gysin(y)?)?;
                proj &= s.equal(&lhs, &rhs);
                if x.degree + y.degree + self.codim() == s.dim() {
                    let a = s.degree(&s.multiply(x, &self.gysin(y)?)?)?;
                    let b = t.degree(&t.multiply(&ix, y)?)?;
                    adj &= a == b;
                }
            }
        }
        for y in tgt_gens.iter().filter(|y| y.degree == t.dim()) {
            deg_compat &= t.degree(y)? == s.degree(&self.gysin(y)?)?;
        }
        let rays: Vec<&ChowClass> = src_gens.iter().filter(|g| g.degree == 1).collect();
        for a in &rays {
            for b in &rays {
                let lhs = self.restrict(&s.multiply(a, b)?)?;
                let rhs = t.multiply(&self.restrict(a)?, &self.restrict(b)?)?;
                ring_hom &= t.equal(&lhs, &rhs);
            }
        }
        let surjective = (0..t.fan.n_rays()).all(|i| {
            let g = t.generator(&[i]).expect("ray");
            self.ray_images.iter().any(|im| t.equal(im, &g))
        });
        Ok(RestrictionReport {
            gysin_of_restriction: gys_res,
            projection_formula: proj,
            degree_compatibility: deg_compat,
            adjunction: adj,
            ring_homomorphism: ring_hom,
            surjective,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictionReport {
    pub gysin_of_restriction: bool,
    pub projection_formula: bool,
    pub degree_compatibility: bool,
    pub adjunction: bool,
    pub ring_homomorphism: bool,
    pub surjective: bool,
}

impl RestrictionReport {
    pub fn all(&self) -> bool {
        self.gysin_of_restriction
            && self.projection_formula
            && self.degree_compatibility
            && self.adjunction
            && self.ring_homomorphism
            && self.surjective
    }
}

// ---------------------------------------------------------------------------
// blow-ups and Keel's presentation

/// Orientation of a stellar subdivision at σ whose new ray is the last one.
pub fn subdivision_weight(fan: &Fan, w: &Weight, sigma: &[usize], sub: &Fan) -> Result<Weight> {
    let rho = sub.n_rays() - 1;
    let d = fan.dim();
    let mut out = Weight::zero(sub, d);
    for (i, c) in sub.cones(d).iter().enumerate() {
        out.values[i] = if c.contains(&rho) {
            let base = crate::fan::union_sorted(&minus(c, &[rho]), sigma);
            w.get(fan, &base)
        } else {
            w.get(fan, c)
        };
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeelReport {
    pub rank_formula: bool,
    pub ranks_blowup: Vec<usize>,
    pub ranks_base: Vec<usize>,
    pub ranks_star: Vec<usize>,
    pub chi_psi_inverse: bool,
    pub relations_preserved: bool,
    pub keel_basis: bool,
    pub block_structure: bool,
    pub degree_compatibility: bool,
}

impl KeelReport {
    pub fn all(&self) -> bool {
        self.rank_formula
            && self.chi_psi_inverse
            && self.relations_preserved
            && self.keel_basis
            && self.block_structure
            && self.degree_compatibility
    }
}

pub fn keel_verify(fan: &Fan, w: &Weight, sigma: &[usize]) -> Result<KeelReport> {
    let sigma = crate::fan::sorted(sigma);
    fan.require(&sigma)?;
    if sigma.len() < 2 {
        return Err(Error::ConeTooSmall);
    }
    let s = sigma.len();
    let d = fan.dim();
    let sub = fan.stellar_subdivide(&sigma, None)?;
    let rho = sub.n_rays() - 1;
    let wsub = subdivision_weight(fan, w, &sigma, &sub)?;
    let base = ChowRing::with_weight(fan, w, Coefficients::Z)?;
    let blow = ChowRing::with_weight(&sub, &wsub, Coefficients::Z)?;
    let (st, wst) = induced_star_weight(fan, w, &sigma)?;
    let star = ChowRing::with_weight(&st.fan, &wst, Coefficients::Z)?;
    let rb = base.ranks();
    let rp = blow.ranks();
    let rs = star.ranks();
    let get = |v: &Vec<usize>, k: isize| if k < 0 { 0 } else { v.get(k as usize).copied().unwrap_or(0) };
    let rank_formula = (0..=d).all(|k| {
        let expect = rb[k] + (1..s).map(|i| get(&rs, k as isize - i as isize)).sum::<usize>();
        rp[k] == expect
    });

    // degree-one maps on generators; index n_rays(Σ) stands for T
    let nr = fan.n_rays();
    let chi1 = |i: usize| -> Vec<Rat> {
        let mut v = vec![Rat::zero(); nr + 1];
        if i == nr {
            v[rho] = -Rat::one();
        } else {
            v[i] = Rat::one();
            if sigma.contains(&i) {
                v[rho] = Rat::one();
            }
        }
        v
    };
    let psi1 = |i: usize| -> Vec<Rat> {
        let mut v = vec![Rat::zero(); nr + 1];
        if i == rho {
            v[nr] = -Rat::one();
        } else {
            v[i] = Rat::one();
            if sigma.contains(&i) {
                v[nr] = Rat::one();
            }
        }
        v
    };
    let compose = |a: &dyn Fn(usize) -> Vec<Rat>, b: &dyn Fn(usize) -> Vec<Rat>, i: usize| -> Vec<Rat> {
        let mut out = vec![Rat::zero(); nr + 1];
        for (j, c) in a(i).iter().enumerate() {
            if !c.is_zero() {
                out = linalg::vec_add(&out, &linalg::vec_scale(c, &b(j)));
            }
        }
        out
    };
    let unit = |i: usize| -> Vec<Rat> {
        let mut v = vec![Rat::zero(); nr + 1];
        v[i] = Rat::one();
        v
    };
    let chi_psi_inverse = (0..=nr).all(|i| compose(&chi1, &psi1, i) == unit(i) && compose(&psi1, &chi1, i) == unit(i));

    // χ on a monomial of Σ (as a class of Σ')
    let ray_class = |v: &[Rat]| -> ChowClass {
        let mut c = blow.zero(1);
        for (j, x) in v.iter().enumerate().take(nr + 1) {
            if x.is_zero() || j > rho {
                continue;
            }
            let idx = sub.cone_index(&[j]).expect("ray");
            c.coeffs[idx] += x;
        }
        c
    };
    let chi_mono = |c: &[usize]| -> Result<ChowClass> {
        let mut t = blow.one();
        for &z in c {
            t = blow.multiply(&t, &ray_class(&chi1(z)[..nr + 1]))?;
        }
        Ok(t)
    };
    let chi = |a: &ChowClass| -> Result<ChowClass> {
        let mut out = blow.zero(a.degree);
        for (c, x) in fan.cones(a.degree).iter().zip(&a.coeffs) {
            if !x.is_zero() {
                out = out.add(&chi_mono(c)?.scale(x));
            }
        }
        Ok(out)
    };
    let minus_x_rho = blow.generator(&[rho])?.neg();
    let t_pow = |i: usize| blow.power(&minus_x_rho, i);

    // relations of the presentation go to zero under χ
    let mut relations_preserved = true;
    for row in base.pieces[1].relations.row_vecs() {
        let a = ChowClass { degree: 1, coeffs: to_rat_vec(&row) };
        relations_preserved &= blow.is_zero(&chi(&a)?);
    }
    let p_of_t = {
        let mut t = blow.one();
        for &z in &sigma {
            let x = chi_mono(&[z])?.add(&minus_x_rho);
            t = blow.multiply(&t, &x)?;
        }
        t
    };
    relations_preserved &= blow.is_zero(&p_of_t);
    for z in 0..nr {
        if !sigma.contains(&z) && !fan.contains(&crate::fan::union_sorted(&sigma, &[z])) && !sigma.is_empty() {
            let lhs = blow.multiply(&chi_mono(&[z])?, &minus_x_rho)?;
            relations_preserved &= blow.is_zero(&lhs);
        }
    }

    // Keel bases of A^k(Σ') and A^{d−k}(Σ')
    let lift = |b: &ChowClass| -> Result<ChowClass> {
        let mut out = blow.zero(b.degree);
        for (g, x) in st.fan.cones(b.degree).iter().zip(&b.coeffs) {
            if x.is_zero() {
                continue;
            }
            let c: Cone = g.iter().map(|&i| st.ray_origin[i]).collect::<Vec<_>>();
            out = out.add(&chi_mono(&crate::fan::sorted(&c))?.scale(x));
        }
        Ok(out)
    };
    let mut keel_basis = true;
    let mut block_structure = true;
    for k in 0..=d {
        let mut rows: Vec<Vec<ChowClass>> = Vec::new();
        rows.push(base.free_basis(k).iter().map(&chi).collect::<Result<_>>()?);
        for i in 1..s {
            let mut blk = Vec::new();
            if k >= i {
                for b in star.free_basis(k - i) {
                    blk.push(blow.multiply(&lift(&b)?, &t_pow(i)?)?);
                }
            }
            rows.push(blk);
        }
        let kk = d - k;
        let mut cols: Vec<Vec<ChowClass>> = Vec::new();
        cols.push(base.free_basis(kk).iter().map(&chi).collect::<Result<_>>()?);
        for j in 1..s {
            let mut blk = Vec::new();
            let e = s - j;
            if kk >= e {
                for b in star.free_basis(kk - e) {
                    blk.push(blow.multiply(&lift(&b)?, &t_pow(e)?)?);
                }
            }
            cols.push(blk);
        }
        let flat: Vec<ChowClass> = rows.iter().flatten().cloned().collect();
        let coords: Vec<Vec<Rat>> = flat.iter().map(|c| blow.free_coordinates(c)).collect();
        if coords.len() != rp[k] {
            keel_basis = false;
        } else if !coords.is_empty() {
            let m = RatMatrix::from_rows(&coords, rp[k]);
            let det = det_rat(&m);
            keel_basis &= det.abs().is_one();
        }
        for (i, rb_) in rows.iter().enumerate() {
            for (j, cb) in cols.iter().enumerate() {
                let g = blow.gram(rb_, cb)?;
                let expected: RatMatrix = if i == 0 && j == 0 {
                    base.pairing_matrix(k)?
                } else if i == j && k >= i && d - s >= k - i {
                    let m = star.gram(&star.free_basis(k - i), &star.free_basis(d - s - (k - i)))?;
                    m.map(|x| -x.clone())
                } else if i < j || i == 0 || j == 0 {
                    RatMatrix::zeros(rb_.len(), cb.len())
                } else {
                    continue;
                };
                block_structure &= g == expected;
            }
        }
    }

    // deg_{Σ'} χ(−T^{|σ|} α) = deg_{Σ^σ}(β) for a lift α of β
    let mut degree_compatibility = true;
    if d >= s {
        for g in st.fan.cones(d - s) {
            let b = star.generator(g)?;
            let lhs = blow.degree(&blow.multiply(&lift(&b)?, &t_pow(s)?)?.neg())?;
            degree_compatibility &= lhs == star.degree(&b)?;
        }
    }
    Ok(KeelReport {
        rank_formula,
        ranks_blowup: rp,
        ranks_base: rb,
        ranks_star: rs,
        chi_psi_inverse,
        relations_preserved,
        keel_basis,
        block_structure,
        degree_compatibility,
    })
}

// ---------------------------------------------------------------------------
// Künneth

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KunnethReport {
    pub chow_ranks: Vec<usize>,
    pub expected_chow_ranks: Vec<usize>,
    pub mw_ranks: Vec<usize>,
    pub expected_mw_ranks: Vec<usize>,
    pub products_ok: bool,
}

impl KunnethReport {
    pub fn all(&self) -> bool {
        self.chow_ranks == self.expected_chow_ranks && self.mw_ranks == self.expected_mw_ranks && self.products_ok
    }
}

fn convolve(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn kunneth_verify(a: &Fan, b: &Fan) -> Result<KunnethReport> {
    let p = a.product(b);
    let (wa, wb) = (Weight::reduced(a), Weight::reduced(b));
    let wp = product_weight(a, &wa, b, &wb, &p);
    let ra = ChowRing::with_weight(a, &wa, Coefficients::Q)?;
    let rb = ChowRing::with_weight(b, &wb, Coefficients::Q)?;
    let rp = ChowRing::with_weight(&p, &wp, Coefficients::Q)?;
    let mwa: Vec<usize> = (0..=a.dim()).map(|k| mw_group(a, k).map(|m| m.rank)).collect::<Result<_>>()?;
    let mwb: Vec<usize> = (0..=b.dim()).map(|k| mw_group(b, k).map(|m| m.rank)).collect::<Result<_>>()?;
    let mwp: Vec<usize> = (0..=p.dim()).map(|k| mw_group(&p, k).map(|m| m.rank)).collect::<Result<_>>()?;
    let mut products_ok = true;
    for ca in a.all_cones() {
        for cb in b.all_cones() {
            let left = rp.generator(&a.product_cone(ca, &[]))?;
            let right = rp.generator(&a.product_cone(&[], cb))?;
            let prod = rp.multiply(&left, &right)?;
            products_ok &= rp.equal(&prod, &rp.generator(&a.product_cone(ca, cb))?);
            if ca.len() == a.dim() && cb.len() == b.dim() {
                let dp = rp.degree(&prod)?;
                products_ok &= dp == ra.degree(&ra.generator(ca)?)? * rb.degree(&rb.generator(cb)?)?;
            }
        }
    }
    Ok(KunnethReport {
        chow_ranks: rp.ranks(),
        expected_chow_ranks: convolve(&ra.ranks(), &rb.ranks()),
        mw_ranks: mwp,
        expected_mw_ranks: convolve(&mwa, &mwb),
        products_ok,
    })
}

// ---------------------------------------------------------------------------
// stability under tropical modification

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropmodChowReport {
    pub ranks_base: Vec<usize>,
    pub ranks_modified: Vec<usize>,
    pub torsion_base: Vec<Vec<Int>>,
    pub torsion_modified: Vec<Vec<Int>>,
    pub up_relation: bool,
    pub well_defined: bool,
    pub surjective: bool,
    pub div_faithful: bool,
    pub saturated: bool,
    /// Rank-by-rank isomorphism with degree compatibility (Q), when checked.
    pub isomorphism_q: Option<bool>,
    /// Integral isomorphism, when the hypotheses allow an integral statement.
    pub isomorphism_z: Option<bool>,
    pub mw_base: Vec<usize>,
    pub mw_modified: Vec<usize>,
    pub modified_saturated_at_origin: bool,
}

pub fn tropmod_chow_check(fan: &Fan, w: &Weight, f: &ConewiseLinear) -> Result<TropmodChowReport> {
    let tm = tropical_modification(fan, w, f)?;
    let d = fan.dim();
    let mode = if fan.is_unimodular() && tm.fan.is_unimodular() { Coefficients::Z } else { Coefficients::Q };
    let base = ChowRing::with_weight(fan, w, mode)?;
    let modi = ChowRing::with_weight(&tm.fan, &tm.weight, mode)?;
    let up_relation = match tm.up {
        None => true,
        Some(u) => {
            let mut rhs = modi.zero(1);
            for (z, v) in f.values.iter().enumerate() {
                let i = tm.fan.cone_index(&[z]).expect("base ray");
                rhs.coeffs[i] -= v;
            }
            modi.equal(&modi.generator(&[u])?, &rhs)
        }
    };
    let mut well_defined = true;
    let mut surjective = true;
    for k in 0..=d {
        let bp = &base.pieces[k];
        let mp = &modi.pieces[k];
        let image = |v: &[Rat]| -> Vec<Rat> {
            let mut out = vec![Rat::zero(); mp.len()];
            for (c, x) in bp.generators.iter().zip(v) {
                let j = tm.fan.cone_index(c).expect("base cone");
                out[j] += x;
            }
            out
        };
        for row in bp.relations.row_vecs() {
            let img = image(&to_rat_vec(&row));
            well_defined &= modi.is_zero(&ChowClass { degree: k, coeffs: img });
        }
        let mut gens: Vec<Vec<Int>> = (0..bp.len())
            .map(|i| {
                let mut e = vec![Rat::zero(); bp.len()];
                e[i] = Rat::one();
                image(&e).iter().map(|x| x.to_integer()).collect()
            })
            .collect();
        gens.extend(mp.relations.row_vecs());
        if !mp.is_empty() {
            let m = IntMatrix::from_rows(&gens, mp.len());
            let sm = smith(&m);
            surjective &= match mode {
                Coefficients::Z => sm.rank() == mp.len() && sm.torsion().is_empty(),
                Coefficients::Q => sm.rank() == mp.len(),
            };
        }
    }
    let div_faithful = is_div_faithful_at_origin(fan, w)?;
    let saturated = fan.is_saturated();
    let mut iso_q = None;
    let mut iso_z = None;
    if div_faithful {
        let ranks = base.ranks() == modi.ranks();
        let mut degs = true;
        for c in fan.cones(d) {
            degs &= base.degree(&base.generator(c)?)? == modi.degree(&modi.generator(c)?)?;
        }
        iso_q = Some(ranks && degs && surjective);
        if mode == Coefficients::Z && (saturated || base.torsion_free()) {
            let tors = base.pieces.iter().zip(&modi.pieces).all(|(a, b)| a.torsion == b.torsion);
            iso_z = Some(ranks && degs && surjective && tors);
        }
    }
    let mwb = (0..=d).map(|k| mw_group(fan, k).map(|m| m.rank)).collect::<Result<_>>()?;
    let mwm = (0..=d).map(|k| mw_group(&tm.fan, k).map(|m| m.rank)).collect::<Result<_>>()?;
    Ok(TropmodChowReport {
        ranks_base: base.ranks(),
        ranks_modified: modi.ranks(),
        torsion_base: base.pieces.iter().map(|p| p.torsion.clone()).collect(),
        torsion_modified: modi.pieces.iter().map(|p| p.torsion.clone()).collect(),
        up_relation,
        well_defined,
        surjective,
        div_faithful,
        saturated,
        isomorphism_q: iso_q,
        isomorphism_z: iso_z,
        mw_base: mwb,
        mw_modified: mwm,
        modified_saturated_at_origin: tm.fan.saturation_at(&[])?,
    })
}

// ---------------------------------------------------------------------------
// principality and div-faithfulness

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivClassFlags {
    pub principal: bool,
    pub q_principal: bool,
    pub div_faithful: bool,
    pub saturated: bool,
    pub cl_injective: bool,
    /// Invariant factors (≠ 1) of the cokernel of cl; zeros mark free parts.
    pub cokernel: Vec<Int>,
    pub a1_torsion: Vec<Int>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivClassReport {
    pub at_origin: DivClassFlags,
    pub ploc_principal: bool,
    pub ploc_q_principal: bool,
    pub ploc_div_faithful: bool,
    pub ploc_saturated: bool,
    /// First cone where a local flag fails.
    pub witness: Option<Cone>,
}

/// Matrix of `cl: Z^{Σ_1} → Z^{Σ_{d−1}}` (columns are images of `x_ζ`).
pub fn cycle_class_matrix(ring: &ChowRing) -> Result<IntMatrix> {
    let d = ring.dim();
    if d == 0 {
        return Ok(IntMatrix::zeros(0, 0));
    }
    let mut cols = Vec::new();
    for r in ring.fan.cones(1) {
        let w = ring.cycle_class(&ring.generator(r)?)?;
        cols.push(w.values);
    }
    Ok(IntMatrix::from_cols(&cols, ring.fan.cones(d - 1).len()))
}

pub fn divclass_flags(fan: &Fan, w: &Weight) -> Result<DivClassFlags> {
    let d = fan.dim();
    let saturated = fan.saturation_at(&[])?;
    if d == 0 {
        return Ok(DivClassFlags {
            principal: true,
            q_principal: true,
            div_faithful: true,
            saturated,
            cl_injective: true,
            cokernel: Vec::new(),
            a1_torsion: Vec::new(),
        });
    }
    let ring = ChowRing::with_weight(fan, w, Coefficients::Z)?;
    let c = cycle_class_matrix(&ring)?;
    let mw = mw_group(fan, d - 1)?;
    let k = IntMatrix::from_cols(&mw.basis, fan.cones(d - 1).len());
    let mut coords = Vec::new();
    for col in c.col_vecs() {
        coords.push(solve_integer(&k, &col).ok_or_else(|| Error::InvalidFan("cycle class outside MW".into()))?);
    }
    let x = IntMatrix::from_cols(&coords, mw.rank);
    let sm = smith(&x);
    let mut cokernel = sm.torsion();
    cokernel.extend(std::iter::repeat_n(Int::zero(), mw.rank - sm.rank()));
    let q_principal = sm.rank() == mw.rank;
    let principal = q_principal && sm.torsion().is_empty();
    let a1 = &ring.pieces[1];
    let cl_injective = a1.torsion.is_empty() && linalg::rank_int(&c) == a1.free_rank;
    let dm = divisor_matrix(fan, w)?;
    let ker = linalg::rational_kernel(&dm).len();
    let rays = IntMatrix::from_cols(fan.rays(), fan.rank());
    let div_faithful = ker == linalg::rank_int(&rays);
    Ok(DivClassFlags { principal, q_principal, div_faithful, saturated, cl_injective, cokernel, a1_torsion: a1.torsion.clone() })
}

pub fn divclass_report(fan: &Fan, w: &Weight) -> Result<DivClassReport> {
    let at_origin = divclass_flags(fan, w)?;
    let cones: Vec<Cone> = fan.all_cones().cloned().collect();
    let locals: Vec<(Cone, DivClassFlags)> = cones
        .par_iter()
        .map(|c| {
            let (st, ws) = induced_star_weight(fan, w, c)?;
            Ok((c.clone(), divclass_flags(&st.fan, &ws)?))
        })
        .collect::<Result<_>>()?;
    let all = |f: &dyn Fn(&DivClassFlags) -> bool| locals.iter().all(|(_, l)| f(l));
    let witness = locals
        .iter()
        .find(|(_, l)| !(l.principal && l.div_faithful && l.saturated))
        .map(|(c, _)| c.clone());
    Ok(DivClassReport {
        ploc_principal: all(&|l| l.principal),
        ploc_q_principal: all(&|l| l.q_principal),
        ploc_div_faithful: all(&|l| l.div_faithful),
        ploc_saturated: all(&|l| l.saturated),
        at_origin,
        witness,
    })
}

/// Star-fan weight of a ring's orientation, for callers working with stars.
pub fn star_ring(fan: &Fan, w: &Weight, sigma: &[usize], mode: Coefficients) -> Result<(StarFan, ChowRing)> {
    let st = fan.star(sigma)?;
    let ws = star_weight(fan, w, &st);
    let r = ChowRing::with_weight(&st.fan, &ws, mode)?;
    Ok((st, r))
}
