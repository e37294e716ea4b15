//! Simplicial rational fans in the standard lattice `Z^n`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    self, int, integer_kernel, primitive, rank_int, reduce_mod_rows, row_lattice_basis, saturate_lattice, smith,
    solve_integer, solve_rational, to_rat_matrix, to_rat_vec, Int, IntMatrix, Rat, RatMatrix,
};
use crate::lp::{simplex_feasible, Ineq};

/// Sorted ray indices.
pub type Cone = Vec<usize>;

#[derive(Clone, Debug)]
pub struct Fan {
    rank: usize,
    rays: Vec<Vec<Int>>,
    cones: Vec<Vec<Cone>>,
    index: Vec<HashMap<Cone, usize>>,
    scaling: Vec<Int>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub simplicial: bool,
    pub unimodular: bool,
    pub pure: bool,
    pub complete: bool,
}

impl Fan {
    /// Builds a fan from ray vectors and a generating family of cones.
    /// Rays are divided by their content; cones are closed under faces.
    pub fn new(rank: usize, rays: Vec<Vec<Int>>, cones: Vec<Vec<usize>>, strict: bool) -> Result<Fan> {
        let mut prim = Vec::with_capacity(rays.len());
        let mut scaling = Vec::with_capacity(rays.len());
        let mut seen: HashMap<Vec<Int>, usize> = HashMap::new();
        for (i, r) in rays.into_iter().enumerate() {
            if r.len() != rank {
                return Err(Error::InvalidFan(format!("ray {i} has length {} in rank {rank}", r.len())));
            }
            if r.iter().all(|x| x.is_zero()) {
                return Err(Error::InvalidFan(format!("ray {i} is zero")));
            }
            let (p, g) = primitive(&r);
            if seen.insert(p.clone(), i).is_some() {
                return Err(Error::DuplicateRay(i));
            }
            prim.push(p);
            scaling.push(g);
        }
        let mut all: BTreeSet<Cone> = BTreeSet::new();
        all.insert(Vec::new());
        for c in cones {
            let mut c = c;
            c.sort_unstable();
            let len = c.len();
            c.dedup();
            if c.len() != len {
                return Err(Error::InvalidFan(format!("cone {c:?} repeats a ray")));
            }
            if let Some(&bad) = c.iter().find(|&&i| i >= prim.len()) {
                return Err(Error::InvalidFan(format!("cone index {bad} out of range")));
            }
            let m = IntMatrix::from_cols(&c.iter().map(|&i| prim[i].clone()).collect::<Vec<_>>(), rank);
            if c.len() > rank || rank_int(&m) != c.len() {
                return Err(Error::NonSimplicialCone(c));
            }
            if all.contains(&c) {
                continue;
            }
            for mask in 0u64..(1u64 << c.len()) {
                let sub: Cone = (0..c.len()).filter(|b| mask >> b & 1 == 1).map(|b| c[b]).collect();
                all.insert(sub);
            }
        }
        let fan = Fan::from_parts(rank, prim, scaling, all);
        if strict {
            fan.check_intersections()?;
        }
        Ok(fan)
    }

    /// Convenience constructor for small integer data.
    pub fn from_i64(rank: usize, rays: &[&[i64]], cones: &[&[usize]]) -> Result<Fan> {
        Fan::new(
            rank,
            rays.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect(),
            cones.iter().map(|c| c.to_vec()).collect(),
            false,
        )
    }

    fn from_parts(rank: usize, rays: Vec<Vec<Int>>, scaling: Vec<Int>, all: BTreeSet<Cone>) -> Fan {
        let dim = all.iter().map(|c| c.len()).max().unwrap_or(0);
        let mut cones = vec![Vec::new(); dim + 1];
        for c in all {
            let k = c.len();
            cones[k].push(c);
        }
        for level in cones.iter_mut() {
            level.sort();
        }
        let index = cones.iter().map(|l| l.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect()).collect();
        Fan { rank, rays, cones, index, scaling }
    }

    /// Fan whose cones are given as a face-closed set (internal constructions).
    pub(crate) fn from_closed(rank: usize, rays: Vec<Vec<Int>>, all: BTreeSet<Cone>) -> Fan {
        let scaling = vec![Int::one(); rays.len()];
        Fan::from_parts(rank, rays, scaling, all)
    }

    /// The point fan in rank 0.
    pub fn point() -> Fan {
        let mut all = BTreeSet::new();
        all.insert(Vec::new());
        Fan::from_closed(0, Vec::new(), all)
    }

    /// The line with rays `1` and `-1`.
    pub fn line() -> Fan {
        Fan::from_i64(1, &[&[1], &[-1]], &[&[0], &[1]]).expect("line")
    }

    /// `Λ^n`.
    pub fn line_power(n: usize) -> Fan {
        (0..n).fold(Fan::point(), |acc, _| acc.product(&Fan::line()))
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.cones.len() - 1
    }

    pub fn rays(&self) -> &[Vec<Int>] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &[Int] {
        &self.rays[i]
    }

    pub fn n_rays(&self) -> usize {
        self.rays.len()
    }

    /// Content divided out of each input ray.
    pub fn ray_scaling(&self) -> &[Int] {
        &self.scaling
    }

    /// Cones of dimension `k`, lexicographically sorted.
    pub fn cones(&self, k: usize) -> &[Cone] {
        self.cones.get(k).map_or(&[], |v| v.as_slice())
    }

    pub fn all_cones(&self) -> impl Iterator<Item = &Cone> {
        self.cones.iter().flatten()
    }

    pub fn n_cones(&self) -> usize {
        self.cones.iter().map(|c| c.len()).sum()
    }

    pub fn cone_index(&self, c: &[usize]) -> Option<usize> {
        self.index.get(c.len()).and_then(|m| m.get(c).copied())
    }

    pub fn contains(&self, c: &[usize]) -> bool {
        self.cone_index(c).is_some()
    }

    pub fn require(&self, c: &[usize]) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::ConeNotInFan(c.to_vec()))
        }
    }

    /// Cones not contained in a larger cone.
    pub fn maximal_cones(&self) -> Vec<Cone> {
        let mut out = Vec::new();
        for k in 0..=self.dim() {
            for c in self.cones(k) {
                let maximal = (0..self.n_rays()).all(|r| c.contains(&r) || !self.contains(&insert_sorted(c, r)));
                if maximal {
                    out.push(c.clone());
                }
            }
        }
        out
    }

    /// `(ray, σ)` for every cone `σ = τ ∪ {ray}` covering `τ`.
    pub fn covering(&self, tau: &[usize]) -> Vec<(usize, Cone)> {
        let mut out = Vec::new();
        for r in 0..self.n_rays() {
            if tau.contains(&r) {
                continue;
            }
            let s = insert_sorted(tau, r);
            if self.contains(&s) {
                out.push((r, s));
            }
        }
        out
    }

    /// Rays `ρ ∉ σ` with `σ ∪ {ρ}` a cone, together with the link cones.
    pub fn link_rays(&self, sigma: &[usize]) -> Vec<usize> {
        self.covering(sigma).into_iter().map(|(r, _)| r).collect()
    }

    /// All cones containing `σ`.
    pub fn cofaces(&self, sigma: &[usize]) -> Vec<Cone> {
        self.all_cones().filter(|c| is_subset(sigma, c)).cloned().collect()
    }

    /// Ray generators of a cone as columns.
    pub fn ray_matrix(&self, cone: &[usize]) -> IntMatrix {
        IntMatrix::from_cols(&cone.iter().map(|&i| self.rays[i].clone()).collect::<Vec<_>>(), self.rank)
    }

    /// Basis (columns) of `N_σ`, the saturated lattice of the span.
    pub fn lattice_basis(&self, cone: &[usize]) -> IntMatrix {
        saturate_lattice(&self.ray_matrix(cone))
    }

    pub fn is_unimodular_cone(&self, cone: &[usize]) -> bool {
        smith(&self.ray_matrix(cone)).invariant_factors.iter().all(|d| d.is_one())
    }

    pub fn is_unimodular(&self) -> bool {
        self.maximal_cones().iter().all(|c| self.is_unimodular_cone(c))
    }

    pub fn is_pure(&self) -> bool {
        self.maximal_cones().iter().all(|c| c.len() == self.dim())
    }

    /// Completeness via the wall criterion: full-dimensional, pure, every
    /// wall in exactly two facets lying on opposite sides.
    pub fn is_complete(&self) -> bool {
        let n = self.rank;
        if n == 0 {
            return true;
        }
        if self.dim() != n || !self.is_pure() {
            return false;
        }
        for tau in self.cones(n - 1) {
            let cov = self.covering(tau);
            if cov.len() != 2 {
                return false;
            }
            let normal = integer_kernel(&self.ray_matrix(tau).transpose());
            let y = normal.col(0);
            let s0 = linalg::dot(&y, &self.rays[cov[0].0]);
            let s1 = linalg::dot(&y, &self.rays[cov[1].0]);
            if s0.signum() == s1.signum() {
                return false;
            }
        }
        true
    }

    pub fn classify(&self) -> Classification {
        Classification {
            simplicial: true,
            unimodular: self.is_unimodular(),
            pure: self.is_pure(),
            complete: self.is_complete(),
        }
    }

    /// Checks that maximal cones meet along common faces.
    pub fn check_intersections(&self) -> Result<()> {
        let maxc = self.maximal_cones();
        for (a, s) in maxc.iter().enumerate() {
            for t in maxc.iter().skip(a + 1) {
                if !self.cones_meet_properly(s, t) {
                    return Err(Error::NotAFan(format!("cones {s:?} and {t:?} overlap beyond a common face")));
                }
            }
        }
        Ok(())
    }

    fn cones_meet_properly(&self, s: &[usize], t: &[usize]) -> bool {
        let common: Vec<usize> = s.iter().filter(|i| t.contains(i)).copied().collect();
        let nv = s.len() + t.len();
        if nv == 0 {
            return true;
        }
        let mut eqs = Vec::new();
        for row in 0..self.rank {
            let mut c: Vec<Rat> = Vec::with_capacity(nv);
            for &i in s {
                c.push(linalg::rat_from_int(&self.rays[i][row]));
            }
            for &i in t {
                c.push(-linalg::rat_from_int(&self.rays[i][row]));
            }
            eqs.push(Ineq::new(c, Rat::zero()));
        }
        let mut outside = vec![Rat::zero(); nv];
        for (k, i) in s.iter().enumerate() {
            if !common.contains(i) {
                outside[k] = Rat::one();
            }
        }
        if outside.iter().all(|x| x.is_zero()) {
            return true;
        }
        let ges = vec![Ineq::new(outside, Rat::one())];
        simplex_feasible(nv, &vec![true; nv], &eqs, &ges).is_none()
    }

    /// Product fan in rank `n + n'`.
    pub fn product(&self, other: &Fan) -> Fan {
        let n = self.rank + other.rank;
        let mut rays = Vec::with_capacity(self.n_rays() + other.n_rays());
        for r in &self.rays {
            let mut v = r.clone();
            v.extend(std::iter::repeat_n(Int::zero(), other.rank));
            rays.push(v);
        }
        for r in &other.rays {
            let mut v = vec![Int::zero(); self.rank];
            v.extend(r.iter().cloned());
            rays.push(v);
        }
        let off = self.n_rays();
        let mut all = BTreeSet::new();
        for a in self.all_cones() {
            for b in other.all_cones() {
                let mut c = a.clone();
                c.extend(b.iter().map(|i| i + off));
                all.insert(c);
            }
        }
        Fan::from_closed(n, rays, all)
    }

    /// Cone of the product corresponding to `(a, b)`.
    pub fn product_cone(&self, a: &[usize], b: &[usize]) -> Cone {
        let mut c = a.to_vec();
        c.extend(b.iter().map(|i| i + self.n_rays()));
        c
    }

    /// Coordinates of `v` in the ray basis of a cone, over Q.
    pub fn cone_coordinates(&self, cone: &[usize], v: &[Int]) -> Option<Vec<Rat>> {
        solve_rational(&to_rat_matrix(&self.ray_matrix(cone)), &to_rat_vec(v))
    }

    /// Stellar subdivision of `σ` along `ρ` (default: primitive sum of the rays of σ).
    /// The new ray is appended last.
    pub fn stellar_subdivide(&self, sigma: &[usize], rho: Option<&[Int]>) -> Result<Fan> {
        let sigma = sorted(sigma);
        self.require(&sigma)?;
        if sigma.len() < 2 {
            return Err(Error::RayNotInteriorToCone);
        }
        let rho: Vec<Int> = match rho {
            Some(r) => {
                let (p, _) = primitive(r);
                let coords = self.cone_coordinates(&sigma, &p).ok_or(Error::RayNotInteriorToCone)?;
                if coords.iter().any(|c| !c.is_positive()) {
                    return Err(Error::RayNotInteriorToCone);
                }
                p
            }
            None => {
                let mut s = vec![Int::zero(); self.rank];
                for &i in &sigma {
                    s = linalg::vec_add(&s, &self.rays[i]);
                }
                primitive(&s).0
            }
        };
        if self.rays.contains(&rho) {
            return Err(Error::RayNotInteriorToCone);
        }
        let new = self.n_rays();
        let mut rays = self.rays.clone();
        rays.push(rho);
        let mut all = BTreeSet::new();
        for c in self.all_cones() {
            if is_subset(&sigma, c) {
                continue;
            }
            all.insert(c.clone());
            if self.contains(&union_sorted(c, &sigma)) {
                all.insert(insert_sorted(c, new));
            }
        }
        let mut f = Fan::from_closed(self.rank, rays, all);
        f.scaling = self.scaling.clone();
        f.scaling.push(Int::one());
        Ok(f)
    }

    /// Inverse of a stellar subdivision: removes ray `rho`, returning the
    /// assembled fan and the reinstated cone (indices of the output fan).
    pub fn stellar_assemble(&self, rho: usize) -> Result<(Fan, Cone)> {
        if rho >= self.n_rays() {
            return Err(Error::NotABlowup(rho));
        }
        let link: Vec<Cone> =
            self.all_cones().filter(|c| c.contains(&rho)).map(|c| c.iter().copied().filter(|&i| i != rho).collect()).collect();
        let verts: Vec<usize> = {
            let mut v: BTreeSet<usize> = BTreeSet::new();
            for c in &link {
                v.extend(c.iter().copied());
            }
            v.into_iter().collect()
        };
        if verts.len() > 20 {
            return Err(Error::NotABlowup(rho));
        }
        let mut candidates: Vec<Cone> = Vec::new();
        for mask in 1u64..(1u64 << verts.len()) {
            let s: Cone = (0..verts.len()).filter(|b| mask >> b & 1 == 1).map(|b| verts[b]).collect();
            if s.len() < 2 || self.contains(&s) {
                continue;
            }
            let m = self.ray_matrix(&s);
            if rank_int(&m) != s.len() {
                continue;
            }
            let Some(coords) = self.cone_coordinates(&s, &self.rays[rho]) else { continue };
            if coords.iter().all(|c| c.is_positive()) {
                candidates.push(s);
            }
        }
        candidates.sort_by_key(|c| c.len());
        for sigma in candidates {
            let mut all: BTreeSet<Cone> = self.all_cones().filter(|c| !c.contains(&rho)).cloned().collect();
            let mut ok = true;
            for t in &link {
                let big = union_sorted(t, &sigma);
                if big.len() > self.rank || rank_int(&self.ray_matrix(&big)) != big.len() {
                    ok = false;
                    break;
                }
                for mask in 0u64..(1u64 << big.len()) {
                    all.insert((0..big.len()).filter(|b| mask >> b & 1 == 1).map(|b| big[b]).collect());
                }
            }
            if !ok {
                continue;
            }
            // reindex without rho
            let remap = |i: usize| if i > rho { i - 1 } else { i };
            let rays: Vec<Vec<Int>> =
                self.rays.iter().enumerate().filter(|(i, _)| *i != rho).map(|(_, r)| r.clone()).collect();
            let all: BTreeSet<Cone> = all.into_iter().map(|c| c.into_iter().map(remap).collect()).collect();
            let base = Fan::from_closed(self.rank, rays, all);
            let sig: Cone = sigma.iter().map(|&i| remap(i)).collect();
            let again = base.stellar_subdivide(&sig, Some(&self.rays[rho]))?;
            if again.same_as(self) {
                return Ok((base, sig));
            }
        }
        Err(Error::NotABlowup(rho))
    }

    /// Equality of fans as sets of cones of ray vectors.
    pub fn same_as(&self, other: &Fan) -> bool {
        if self.rank != other.rank || self.n_rays() != other.n_rays() || self.n_cones() != other.n_cones() {
            return false;
        }
        let pos: HashMap<&Vec<Int>, usize> = other.rays.iter().enumerate().map(|(i, r)| (r, i)).collect();
        let Some(map): Option<Vec<usize>> = self.rays.iter().map(|r| pos.get(r).copied()).collect() else {
            return false;
        };
        self.all_cones().all(|c| other.contains(&sorted(&c.iter().map(|&i| map[i]).collect::<Vec<_>>())))
    }

    /// Primitive vector `v` in `N_σ` with `N_τ + Z v = N_σ` on the side of σ,
    /// reduced modulo `N_τ` by the Hermite basis of `N_τ`.
    pub fn unit_normal(&self, tau: &[usize], sigma: &[usize]) -> Result<Vec<Int>> {
        let tau = sorted(tau);
        let sigma = sorted(sigma);
        if sigma.len() != tau.len() + 1 || !is_subset(&tau, &sigma) {
            return Err(Error::NotCovering(tau, sigma));
        }
        self.require(&sigma)?;
        let zeta = *sigma.iter().find(|i| !tau.contains(i)).expect("covering ray");
        if tau.is_empty() {
            return Ok(self.rays[zeta].clone());
        }
        let bs = self.lattice_basis(&sigma);
        let bt = self.lattice_basis(&tau);
        // coordinates of N_τ inside N_σ
        let mut cols = Vec::new();
        for j in 0..bt.cols() {
            cols.push(solve_integer(&bs, &bt.col(j)).expect("N_tau inside N_sigma"));
        }
        let x = IntMatrix::from_cols(&cols, bs.cols());
        let ann = integer_kernel(&x.transpose());
        let mut y = ann.col(0);
        let cz = solve_integer(&bs, &self.rays[zeta]).expect("ray inside N_sigma");
        if linalg::dot(&y, &cz).is_negative() {
            y = linalg::vec_neg(&y);
        }
        let u = solve_integer(&IntMatrix::from_rows(&[y.clone()], y.len()), &[Int::one()])
            .ok_or_else(|| Error::NotCovering(tau.clone(), sigma.clone()))?;
        let v = bs.mul_vec(&u);
        let basis = row_lattice_basis(&bt.transpose());
        Ok(reduce_mod_rows(&basis, &v))
    }

    /// Star fan of `σ` in the quotient lattice `N / N_σ`.
    pub fn star(&self, sigma: &[usize]) -> Result<StarFan> {
        let sigma = sorted(sigma);
        self.require(&sigma)?;
        let n = self.rank;
        let k = sigma.len();
        let (projection, lift) = if k == 0 {
            (IntMatrix::identity(n), IntMatrix::identity(n))
        } else {
            let s = smith(&self.ray_matrix(&sigma));
            let linv = linalg::inverse_unimodular(&s.left).expect("unimodular transform");
            let rows: Vec<usize> = (k..n).collect();
            (s.left.select_rows(&rows), linv.select_cols(&rows))
        };
        let origin: Vec<usize> = self.link_rays(&sigma);
        let mut rays = Vec::with_capacity(origin.len());
        let mut multiplicity = Vec::with_capacity(origin.len());
        for &r in &origin {
            let p = projection.mul_vec(&self.rays[r]);
            let (q, g) = primitive(&p);
            rays.push(q);
            multiplicity.push(g);
        }
        let pos: BTreeMap<usize, usize> = origin.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let mut all = BTreeSet::new();
        for c in self.all_cones() {
            if is_subset(&sigma, c) {
                let sc: Cone = c.iter().filter(|i| !sigma.contains(i)).map(|i| pos[i]).collect();
                all.insert(sc);
            }
        }
        let mut fan = Fan::from_closed(n - k, rays, all);
        fan.scaling = multiplicity.clone();
        Ok(StarFan { base: sigma, fan, projection, lift, ray_origin: origin, multiplicity })
    }

    /// True when the lattice generated by the star cones of `σ` is
    /// saturated in `N^σ`.
    pub fn saturation_at(&self, sigma: &[usize]) -> Result<bool> {
        let st = self.star(sigma)?;
        let f = &st.fan;
        let mut cols: Vec<Vec<Int>> = Vec::new();
        for c in f.maximal_cones() {
            let b = f.lattice_basis(&c);
            cols.extend(b.col_vecs());
        }
        if cols.is_empty() {
            return Ok(true);
        }
        let m = IntMatrix::from_cols(&cols, f.rank());
        Ok(smith(&m).invariant_factors.iter().all(|d| d.is_one()))
    }

    pub fn is_saturated(&self) -> bool {
        self.all_cones().all(|c| self.saturation_at(c).unwrap_or(false))
    }

    /// Cone containing `p` in its relative interior, if `p` is in the support.
    pub fn locate(&self, p: &[Rat]) -> Option<Cone> {
        if p.iter().all(|x| x.is_zero()) {
            return Some(Vec::new());
        }
        for c in self.maximal_cones() {
            let m: RatMatrix = to_rat_matrix(&self.ray_matrix(&c));
            if let Some(x) = solve_rational(&m, p) {
                if x.iter().all(|v| !v.is_negative()) {
                    let face: Cone = c.iter().zip(&x).filter(|(_, v)| v.is_positive()).map(|(&i, _)| i).collect();
                    return Some(face);
                }
            }
        }
        None
    }

    /// Applies an integral linear map to all rays (the map must be injective
    /// on the support; rays are re-primitivized).
    pub fn transform(&self, map: &IntMatrix) -> Result<Fan> {
        let rays: Vec<Vec<Int>> = self.rays.iter().map(|r| map.mul_vec(r)).collect();
        let mut f = Fan::new(map.rows(), rays, self.maximal_cones(), false)?;
        f.scaling = self.scaling.clone();
        Ok(f)
    }
}

/// Star fan data: the fan `Σ^σ` with the maps relating it to `Σ`.
#[derive(Clone, Debug)]
pub struct StarFan {
    pub base: Cone,
    pub fan: Fan,
    /// `(n-k) × n`, kernel `N_σ`.
    pub projection: IntMatrix,
    /// `n × (n-k)` section of the projection.
    pub lift: IntMatrix,
    /// Star ray `i` is the image of ray `ray_origin[i]` of the host fan.
    pub ray_origin: Vec<usize>,
    /// Projected generator equals `multiplicity[i]` times star ray `i`.
    pub multiplicity: Vec<Int>,
}

impl StarFan {
    /// The coface `η` of σ with `η^σ` the given star cone.
    pub fn coface_of(&self, star_cone: &[usize]) -> Cone {
        let mut c = self.base.clone();
        c.extend(star_cone.iter().map(|&i| self.ray_origin[i]));
        c.sort_unstable();
        c
    }

    /// The star cone of a coface of σ.
    pub fn star_cone_of(&self, coface: &[usize]) -> Option<Cone> {
        if !is_subset(&self.base, coface) {
            return None;
        }
        let mut out = Vec::new();
        for i in coface.iter().filter(|i| !self.base.contains(i)) {
            out.push(self.ray_origin.iter().position(|r| r == i)?);
        }
        out.sort_unstable();
        Some(out)
    }
}

pub fn sorted(c: &[usize]) -> Cone {
    let mut v = c.to_vec();
    v.sort_unstable();
    v
}

pub fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

pub fn insert_sorted(c: &[usize], r: usize) -> Cone {
    let mut v = c.to_vec();
    match v.binary_search(&r) {
        Ok(_) => {}
        Err(p) => v.insert(p, r),
    }
    v
}

pub fn union_sorted(a: &[usize], b: &[usize]) -> Cone {
    let mut v: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn minus(a: &[usize], b: &[usize]) -> Cone {
    a.iter().filter(|x| !b.contains(x)).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lambda2() -> Fan {
        Fan::line_power(2)
    }

    #[test]
    fn build_examples() {
        let l = Fan::from_i64(1, &[&[1], &[-1]], &[&[0], &[1]]).unwrap();
        assert_eq!(l.n_cones(), 3);
        let p2 = Fan::from_i64(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[1, 2], &[0, 2]]).unwrap();
        assert!(p2.classify().complete);
        let err = Fan::from_i64(2, &[&[1, 0], &[-1, 0]], &[&[0, 1]]);
        assert!(matches!(err, Err(Error::NonSimplicialCone(_))));
        let dup = Fan::from_i64(1, &[&[1], &[2]], &[&[0], &[1]]);
        assert!(matches!(dup, Err(Error::DuplicateRay(1))));
        let overlap = Fan::new(
            2,
            vec![vec![int(1), int(0)], vec![int(0), int(1)], vec![int(1), int(1)]],
            vec![vec![0, 1], vec![0, 2]],
            true,
        );
        assert!(matches!(overlap, Err(Error::NotAFan(_))));
    }

    #[test]
    fn classification() {
        let c = lambda2().classify();
        assert!(c.unimodular && c.pure && c.complete);
        let nu = Fan::from_i64(2, &[&[1, 0], &[1, 2]], &[&[0, 1]]).unwrap();
        assert!(!nu.is_unimodular());
        let cross = Fan::from_i64(2, &[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]], &[&[0], &[1], &[2], &[3]]).unwrap();
        let c = cross.classify();
        assert!(c.pure && !c.complete && cross.dim() == 1);
    }

    #[test]
    fn stars() {
        let l2 = lambda2();
        let s0 = l2.star(&[]).unwrap();
        assert!(s0.fan.same_as(&l2));
        let top = l2.cones(2)[0].clone();
        let s = l2.star(&top).unwrap();
        assert_eq!(s.fan.rank(), 0);
        assert_eq!(s.fan.n_cones(), 1);
        let s1 = l2.star(&[0]).unwrap();
        assert_eq!(s1.fan.n_rays(), 2);
        assert!(s1.fan.same_as(&Fan::line()) || s1.fan.rays().contains(&vec![int(1)]));
    }

    #[test]
    fn products() {
        let l2 = Fan::line().product(&Fan::line());
        assert_eq!(l2.n_rays(), 4);
        assert_eq!(l2.cones(2).len(), 4);
        let p = Fan::point().product(&Fan::line());
        assert!(p.same_as(&Fan::line()));
    }

    #[test]
    fn subdivision_round_trip() {
        let l2 = lambda2();
        let sigma = l2.cones(2)[0].clone();
        let b = l2.stellar_subdivide(&sigma, None).unwrap();
        assert_eq!(b.n_rays(), 5);
        assert_eq!(b.maximal_cones().len(), 5);
        assert!(b.is_unimodular());
        let (back, s) = b.stellar_assemble(4).unwrap();
        assert!(back.same_as(&l2));
        assert_eq!(s, sigma);
        assert!(matches!(l2.stellar_assemble(0), Err(Error::NotABlowup(0))));
        assert!(matches!(l2.stellar_subdivide(&[0], None), Err(Error::RayNotInteriorToCone)));
    }

    #[test]
    fn unit_normals() {
        let f = Fan::from_i64(2, &[&[1, 0]], &[&[0]]).unwrap();
        assert_eq!(f.unit_normal(&[], &[0]).unwrap(), vec![int(1), int(0)]);
        let l2 = lambda2();
        // rays of Λ²: (1,0), (-1,0), (0,1), (0,-1)
        let v = l2.unit_normal(&[0], &[0, 2]).unwrap();
        assert_eq!(v[1], int(1));
        let nu = Fan::from_i64(2, &[&[1, 0], &[1, 2]], &[&[0, 1]]).unwrap();
        let v = nu.unit_normal(&[0], &[0, 1]).unwrap();
        assert_eq!(v, vec![int(0), int(1)]);
    }

    #[test]
    fn saturation() {
        assert!(lambda2().saturation_at(&[]).unwrap());
        let delta = Fan::from_i64(2, &[&[1, 0], &[1, -3], &[-2, 3]], &[&[0], &[1], &[2]]).unwrap();
        assert!(!delta.saturation_at(&[]).unwrap());
    }
}
