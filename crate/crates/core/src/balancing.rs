//! Minkowski weights, orientations, normality and irreducibility.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fan::{is_subset, Cone, Fan, StarFan};
use crate::linalg::{content, int, integer_kernel, Int, IntMatrix};

/// Integer values on the cones of one dimension, parallel to `fan.cones(dim)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weight {
    pub dim: usize,
    pub values: Vec<Int>,
}

impl Weight {
    pub fn new(fan: &Fan, dim: usize, values: Vec<Int>) -> Result<Weight> {
        if values.len() != fan.cones(dim).len() {
            return Err(Error::DimensionMismatch(values.len(), fan.cones(dim).len()));
        }
        Ok(Weight { dim, values })
    }

    pub fn constant(fan: &Fan, dim: usize, c: i64) -> Weight {
        Weight { dim, values: vec![int(c); fan.cones(dim).len()] }
    }

    /// All-ones weight on the top-dimensional cones.
    pub fn reduced(fan: &Fan) -> Weight {
        Weight::constant(fan, fan.dim(), 1)
    }

    /// All-ones weight on the cones of dimension `dim`.
    pub fn reduced_on(fan: &Fan, dim: usize) -> Weight {
        Weight::constant(fan, dim, 1)
    }

    pub fn zero(fan: &Fan, dim: usize) -> Weight {
        Weight::constant(fan, dim, 0)
    }

    pub fn get(&self, fan: &Fan, cone: &[usize]) -> Int {
        if cone.len() != self.dim {
            return Int::zero();
        }
        fan.cone_index(cone).map_or_else(Int::zero, |i| self.values[i].clone())
    }

    pub fn from_map(fan: &Fan, dim: usize, entries: &[(Cone, Int)]) -> Result<Weight> {
        let mut w = Weight::zero(fan, dim);
        for (c, v) in entries {
            let mut c = c.clone();
            c.sort_unstable();
            if c.len() != dim {
                return Err(Error::DimensionMismatch(c.len(), dim));
            }
            let i = fan.cone_index(&c).ok_or_else(|| Error::ConeNotInFan(c.clone()))?;
            w.values[i] = v.clone();
        }
        Ok(w)
    }

    pub fn support<'a>(&self, fan: &'a Fan) -> Vec<&'a Cone> {
        fan.cones(self.dim).iter().zip(&self.values).filter(|(_, v)| !v.is_zero()).map(|(c, _)| c).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    pub fn has_full_support(&self) -> bool {
        self.values.iter().all(|v| !v.is_zero())
    }

    pub fn is_effective(&self) -> bool {
        self.values.iter().all(|v| v.is_positive())
    }

    pub fn is_reduced(&self) -> bool {
        self.values.iter().all(|v| v.is_one())
    }

    pub fn is_unitary(&self) -> bool {
        self.values.iter().all(|v| v.abs().is_one())
    }

    pub fn neg(&self) -> Weight {
        Weight { dim: self.dim, values: self.values.iter().map(|v| -v).collect() }
    }

    pub fn entries(&self, fan: &Fan) -> Vec<(Cone, Int)> {
        fan.cones(self.dim).iter().cloned().zip(self.values.iter().cloned()).collect()
    }
}

/// Projected normal vectors `(σ, image of n_{σ/τ} in N^τ)` for σ covering τ.
pub fn projected_normals(fan: &Fan, star: &StarFan) -> Result<Vec<(Cone, Vec<Int>)>> {
    let tau = &star.base;
    let mut out = Vec::new();
    for (_, s) in fan.covering(tau) {
        let n = fan.unit_normal(tau, &s)?;
        out.push((s, star.projection.mul_vec(&n)));
    }
    Ok(out)
}

/// First codimension-one cone where the balancing condition fails, if any.
pub fn balancing_witness(fan: &Fan, w: &Weight) -> Result<Option<Cone>> {
    if w.dim > fan.dim() {
        return Err(Error::DimensionMismatch(w.dim, fan.dim()));
    }
    if w.dim == 0 {
        return Ok(None);
    }
    for tau in fan.cones(w.dim - 1) {
        let st = fan.star(tau)?;
        let mut sum = vec![Int::zero(); st.projection.rows()];
        for (s, v) in projected_normals(fan, &st)? {
            let c = w.get(fan, &s);
            if c.is_zero() {
                continue;
            }
            for (a, b) in sum.iter_mut().zip(&v) {
                *a += &c * b;
            }
        }
        if sum.iter().any(|x| !x.is_zero()) {
            return Ok(Some(tau.clone()));
        }
    }
    Ok(None)
}

pub fn is_balanced(fan: &Fan, w: &Weight) -> Result<bool> {
    Ok(balancing_witness(fan, w)?.is_none())
}

/// Matrix of the balancing map `Z^{Σ_p} → ⊕_τ N^τ`.
pub fn balancing_matrix(fan: &Fan, p: usize) -> Result<IntMatrix> {
    let cols = fan.cones(p).len();
    let mut rows: Vec<Vec<Int>> = Vec::new();
    if p == 0 {
        return Ok(IntMatrix::zeros(0, cols));
    }
    for tau in fan.cones(p - 1) {
        let st = fan.star(tau)?;
        let q = st.projection.rows();
        let mut block = vec![vec![Int::zero(); cols]; q];
        for (s, v) in projected_normals(fan, &st)? {
            let j = fan.cone_index(&s).expect("covering cone");
            for (r, x) in v.into_iter().enumerate() {
                block[r][j] = x;
            }
        }
        rows.extend(block);
    }
    Ok(IntMatrix::from_rows(&rows, cols))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MwGroup {
    pub dim: usize,
    pub rank: usize,
    /// Hermite-canonical basis, each vector parallel to `fan.cones(dim)`.
    pub basis: Vec<Vec<Int>>,
}

pub fn mw_group(fan: &Fan, p: usize) -> Result<MwGroup> {
    if p > fan.dim() {
        return Ok(MwGroup { dim: p, rank: 0, basis: Vec::new() });
    }
    let k = integer_kernel(&balancing_matrix(fan, p)?);
    Ok(MwGroup { dim: p, rank: k.cols(), basis: k.col_vecs() })
}

/// `ω^σ(η^σ) = ω(η)` on the star fan of σ.
pub fn induced_star_weight(fan: &Fan, w: &Weight, sigma: &[usize]) -> Result<(StarFan, Weight)> {
    let st = fan.star(sigma)?;
    let w2 = star_weight(fan, w, &st);
    Ok((st, w2))
}

pub fn star_weight(fan: &Fan, w: &Weight, st: &StarFan) -> Weight {
    let k = st.base.len();
    let dim = w.dim.saturating_sub(k);
    let values = st.fan.cones(dim).iter().map(|c| w.get(fan, &st.coface_of(c))).collect();
    Weight { dim, values }
}

/// True when `MW_p(Σ)` has rank one and `w` generates it.
fn generates(fan: &Fan, w: &Weight) -> Result<(bool, bool)> {
    let mw = mw_group(fan, w.dim)?;
    let rank_one = mw.rank == 1;
    if !rank_one {
        return Ok((false, false));
    }
    let balanced = is_balanced(fan, w)?;
    Ok((balanced, balanced && content(&w.values).is_one()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalityReport {
    pub normal: bool,
    pub q_normal: bool,
    pub locally_irreducible: bool,
    pub q_locally_irreducible: bool,
    pub connected_codim_one_all_stars: bool,
    /// First cone where local irreducibility fails.
    pub witness: Option<Cone>,
}

impl NormalityReport {
    /// Integral and rational forms of the characterization of local
    /// irreducibility by normality and connectedness of stars.
    pub fn consistent(&self) -> bool {
        self.q_locally_irreducible == (self.q_normal && self.connected_codim_one_all_stars)
            && self.locally_irreducible == (self.normal && self.connected_codim_one_all_stars)
    }
}

pub fn normality_report(fan: &Fan, w: &Weight) -> Result<NormalityReport> {
    let d = fan.dim();
    let mut normal = true;
    let mut q_normal = true;
    if d >= 1 {
        for tau in fan.cones(d - 1) {
            let (st, wt) = induced_star_weight(fan, w, tau)?;
            let (q, z) = generates(&st.fan, &wt)?;
            q_normal &= q;
            normal &= z;
        }
    }
    let mut li = true;
    let mut qli = true;
    let mut witness = None;
    let mut connected = true;
    for sigma in fan.all_cones() {
        let (st, wt) = induced_star_weight(fan, w, sigma)?;
        let (q, z) = generates(&st.fan, &wt)?;
        if !(q && z) && witness.is_none() {
            witness = Some(sigma.clone());
        }
        qli &= q;
        li &= z;
        connected &= dual_graph_components(&st.fan).len() <= 1;
    }
    Ok(NormalityReport {
        normal,
        q_normal,
        locally_irreducible: li,
        q_locally_irreducible: qli,
        connected_codim_one_all_stars: connected,
        witness,
    })
}

/// Connected components of the top-dimensional dual graph, as lists of
/// facet indices into `fan.cones(fan.dim())`.
pub fn dual_graph_components(fan: &Fan) -> Vec<Vec<usize>> {
    let d = fan.dim();
    let facets = fan.cones(d);
    let n = facets.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    if d >= 1 {
        for tau in fan.cones(d - 1) {
            let adj: Vec<usize> = fan.covering(tau).iter().map(|(_, s)| fan.cone_index(s).expect("facet")).collect();
            for w in adj.windows(2) {
                let a = find(&mut parent, w[0]);
                let b = find(&mut parent, w[1]);
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

#[derive(Clone, Debug)]
pub struct Component {
    /// Facets of the host fan in this component.
    pub facets: Vec<Cone>,
    /// The subfan generated by the facets (rays reindexed).
    pub fan: Fan,
    pub weight: Weight,
    pub balanced: bool,
}

#[derive(Clone, Debug)]
pub struct Components {
    pub parts: Vec<Component>,
    /// Set when the weight is not normal, where dual-graph components need
    /// not be the irreducible pieces.
    pub advisory: bool,
}

pub fn irreducible_components(fan: &Fan, w: &Weight) -> Result<Components> {
    let normal = normality_report(fan, w)?;
    let d = fan.dim();
    let facets = fan.cones(d);
    let mut parts = Vec::new();
    for comp in dual_graph_components(fan) {
        let fs: Vec<Cone> = comp.iter().map(|&i| facets[i].clone()).collect();
        let (sub, map) = subfan(fan, &fs);
        let entries: Vec<(Cone, Int)> = comp
            .iter()
            .map(|&i| {
                let mut c: Cone = facets[i].iter().map(|r| map[r]).collect();
                c.sort_unstable();
                (c, w.values[i].clone())
            })
            .collect();
        let weight = Weight::from_map(&sub, d, &entries)?;
        let balanced = is_balanced(&sub, &weight)?;
        parts.push(Component { facets: fs, fan: sub, weight, balanced });
    }
    Ok(Components { parts, advisory: !(normal.normal && normal.q_normal) })
}

/// Subfan generated by the given cones, with rays reindexed; returns the map
/// from host ray index to subfan ray index.
pub fn subfan(fan: &Fan, gens: &[Cone]) -> (Fan, std::collections::BTreeMap<usize, usize>) {
    let used: BTreeSet<usize> = gens.iter().flatten().copied().collect();
    let map: std::collections::BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let rays: Vec<Vec<Int>> = used.iter().map(|&r| fan.ray(r).to_vec()).collect();
    let mut all = BTreeSet::new();
    for g in gens {
        for c in fan.all_cones().filter(|c| is_subset(c, g)) {
            let mut m: Cone = c.iter().map(|r| map[r]).collect();
            m.sort_unstable();
            all.insert(m);
        }
    }
    if all.is_empty() {
        all.insert(Vec::new());
    }
    (Fan::from_closed(fan.rank(), rays, all), map)
}

/// Product weight on the product fan.
pub fn product_weight(a: &Fan, wa: &Weight, b: &Fan, wb: &Weight, prod: &Fan) -> Weight {
    let dim = wa.dim + wb.dim;
    let mut w = Weight::zero(prod, dim);
    for (ca, va) in a.cones(wa.dim).iter().zip(&wa.values) {
        for (cb, vb) in b.cones(wb.dim).iter().zip(&wb.values) {
            let c = a.product_cone(ca, cb);
            let i = prod.cone_index(&c).expect("product cone");
            w.values[i] = va * vb;
        }
    }
    w
}
