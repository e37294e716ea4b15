//! Matroids given by bases, and their Bergman and augmented Bergman fans.
//!
//! Subsets of the ground set `{0, …, m−1}` are stored as bitmasks, so
//! `m ≤ 63`; enumeration is exhaustive and meant for small ground sets.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::balancing::Weight;
use crate::error::{Error, Result};
use crate::fan::{Cone, Fan};
use crate::linalg::{Int, Rat};

pub type Set = u64;

pub fn to_set(v: &[usize]) -> Set {
    v.iter().fold(0, |a, &i| a | (1 << i))
}

pub fn elements(s: Set) -> Vec<usize> {
    (0..64).filter(|&i| s >> i & 1 == 1).collect()
}

fn popcount(s: Set) -> usize {
    s.count_ones() as usize
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matroid {
    ground: usize,
    rank: usize,
    bases: Vec<Set>,
}

impl Matroid {
    pub fn from_bases(m: usize, bases: &[Vec<usize>]) -> Result<Matroid> {
        if bases.is_empty() {
            return Err(Error::EmptyBases);
        }
        if m > 63 {
            return Err(Error::InvalidMatroid("ground set too large".into()));
        }
        let mut bs: Vec<Set> = Vec::with_capacity(bases.len());
        for b in bases {
            if b.iter().any(|&i| i >= m) {
                return Err(Error::InvalidMatroid(format!("element out of range in {b:?}")));
            }
            bs.push(to_set(b));
        }
        bs.sort_unstable();
        bs.dedup();
        let r = popcount(bs[0]);
        if bs.iter().any(|&b| popcount(b) != r) {
            return Err(Error::InvalidMatroid("bases of different sizes".into()));
        }
        let set: BTreeSet<Set> = bs.iter().copied().collect();
        for &b1 in &bs {
            for &b2 in &bs {
                for x in elements(b1 & !b2) {
                    let ok = elements(b2 & !b1).into_iter().any(|y| set.contains(&((b1 & !(1 << x)) | (1 << y))));
                    if !ok {
                        return Err(Error::ExchangeFails(elements(b1), elements(b2)));
                    }
                }
            }
        }
        Ok(Matroid { ground: m, rank: r, bases: bs })
    }

    pub fn uniform(r: usize, n: usize) -> Result<Matroid> {
        if r > n {
            return Err(Error::InvalidMatroid(format!("rank {r} exceeds size {n}")));
        }
        let bases: Vec<Vec<usize>> =
            (0u64..(1u64 << n)).filter(|s| popcount(*s) == r).map(elements).collect();
        Matroid::from_bases(n, &bases)
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn full(&self) -> Set {
        if self.ground == 0 { 0 } else { (1u64 << self.ground) - 1 }
    }

    pub fn bases(&self) -> Vec<Vec<usize>> {
        self.bases.iter().map(|&b| elements(b)).collect()
    }

    pub fn rank_of(&self, a: Set) -> usize {
        self.bases.iter().map(|&b| popcount(a & b)).max().unwrap_or(0)
    }

    pub fn is_independent(&self, a: Set) -> bool {
        self.rank_of(a) == popcount(a)
    }

    pub fn closure(&self, a: Set) -> Set {
        let r = self.rank_of(a);
        let mut c = a;
        for i in 0..self.ground {
            if a >> i & 1 == 0 && self.rank_of(a | (1 << i)) == r {
                c |= 1 << i;
            }
        }
        c
    }

    pub fn is_flat(&self, a: Set) -> bool {
        self.closure(a) == a
    }

    pub fn loops(&self) -> Vec<usize> {
        elements(self.closure(0))
    }

    /// All flats ordered by rank, then size, then lexicographically.
    pub fn flats(&self) -> Vec<Set> {
        let mut out: BTreeSet<Set> = BTreeSet::new();
        for s in 0..=self.full() {
            out.insert(self.closure(s));
        }
        let mut v: Vec<Set> = out.into_iter().collect();
        v.sort_by_key(|&f| (self.rank_of(f), popcount(f), elements(f)));
        v
    }

    /// Nonempty proper flats, ordered by size then lexicographically.
    pub fn proper_flats(&self) -> Vec<Set> {
        let (full, bottom) = (self.full(), self.closure(0));
        let mut v: Vec<Set> = self.flats().into_iter().filter(|&f| f != bottom && f != full).collect();
        v.sort_by_key(|&f| (popcount(f), elements(f)));
        v
    }

    pub fn circuits(&self) -> Vec<Set> {
        let mut out = Vec::new();
        for s in 1..=self.full() {
            if self.is_independent(s) {
                continue;
            }
            if elements(s).iter().all(|&i| self.is_independent(s & !(1 << i))) {
                out.push(s);
            }
        }
        out.sort_by_key(|&c| (popcount(c), elements(c)));
        out
    }

    pub fn is_simple(&self) -> bool {
        self.circuits().iter().all(|&c| popcount(c) > 2)
    }

    /// Removes loops and all but the smallest element of each parallel class.
    /// Returns the kept elements (new index ↦ old index).
    pub fn simplify(&self) -> (Matroid, Vec<usize>) {
        let loops = self.closure(0);
        let mut keep = Vec::new();
        let mut seen: Set = loops;
        for i in 0..self.ground {
            if seen >> i & 1 == 1 {
                continue;
            }
            keep.push(i);
            seen |= self.closure(1 << i);
        }
        let drop: Vec<usize> = (0..self.ground).filter(|i| !keep.contains(i)).collect();
        let m = self.minor(&drop, &[]).expect("disjoint").0;
        (m, keep)
    }

    /// `M ∖ delete / contract`, with the remaining elements relabeled in order.
    pub fn minor(&self, delete: &[usize], contract: &[usize]) -> Result<(Matroid, Vec<usize>)> {
        let d = to_set(delete);
        let c = to_set(contract);
        if d & c != 0 {
            return Err(Error::OverlappingSets);
        }
        let rest = self.full() & !d;
        let rd = self.rank_of(rest);
        let del: Vec<Set> = self.bases.iter().map(|&b| b & rest).filter(|&b| popcount(b) == rd).collect();
        let rc = del.iter().map(|&b| popcount(b & c)).max().unwrap_or(0);
        let con: BTreeSet<Set> = del.iter().filter(|&&b| popcount(b & c) == rc).map(|&b| b & !c).collect();
        let remaining: Vec<usize> = elements(rest & !c);
        let pos: BTreeMap<usize, usize> = remaining.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let bases: Vec<Vec<usize>> = con.iter().map(|&b| elements(b).iter().map(|e| pos[e]).collect()).collect();
        Ok((Matroid::from_bases(remaining.len(), &bases)?, remaining))
    }

    pub fn delete(&self, i: usize) -> Result<(Matroid, Vec<usize>)> {
        self.minor(&[i], &[])
    }

    pub fn contract(&self, i: usize) -> Result<(Matroid, Vec<usize>)> {
        self.minor(&[], &[i])
    }

    pub fn require_loopless(&self) -> Result<()> {
        match self.loops().first() {
            Some(&l) => Err(Error::HasLoop(l)),
            None => Ok(()),
        }
    }
}

/// Parallel connection at `i ∈ M` and `j ∈ M'`. The ground set keeps the
/// labels of M and appends `M' ∖ j` in order; the basepoint is `i`.
/// Returns the matroid and the label map of `M'`.
pub fn parallel_connection(a: &Matroid, i: usize, b: &Matroid, j: usize) -> Result<(Matroid, Vec<usize>)> {
    if a.loops().contains(&i) {
        return Err(Error::LoopBasepoint(i));
    }
    if b.loops().contains(&j) {
        return Err(Error::LoopBasepoint(j));
    }
    let map: Vec<usize> = (0..b.ground())
        .map(|k| match k.cmp(&j) {
            std::cmp::Ordering::Equal => i,
            std::cmp::Ordering::Less => a.ground() + k,
            std::cmp::Ordering::Greater => a.ground() + k - 1,
        })
        .collect();
    let relabel = |s: Set| -> Set { elements(s).iter().fold(0, |acc, &k| acc | (1 << map[k])) };
    let p: Set = 1 << i;
    let mut out: BTreeSet<Set> = BTreeSet::new();
    for &ba in &a.bases {
        for &bb in &b.bases {
            let (ia, ib) = (ba & p != 0, bb >> j & 1 == 1);
            let u = ba | relabel(bb);
            match (ia, ib) {
                (true, true) => {
                    out.insert(u);
                }
                (true, false) | (false, true) => {
                    out.insert(u & !p);
                }
                _ => {}
            }
        }
    }
    let bases: Vec<Vec<usize>> = out.into_iter().map(elements).collect();
    Ok((Matroid::from_bases(a.ground() + b.ground() - 1, &bases)?, map))
}

/// Circuits of the parallel connection from the circuits of the factors.
pub fn parallel_connection_circuits(a: &Matroid, i: usize, b: &Matroid, j: usize, map: &[usize]) -> Vec<Set> {
    let relabel = |s: Set| -> Set { elements(s).iter().fold(0, |acc, &k| acc | (1 << map[k])) };
    let p: Set = 1 << i;
    let ca = a.circuits();
    let cb: Vec<Set> = b.circuits();
    let mut out: BTreeSet<Set> = ca.iter().copied().collect();
    out.extend(cb.iter().map(|&c| relabel(c)));
    for &x in ca.iter().filter(|&&c| c & p != 0) {
        for &y in cb.iter().filter(|&&c| c >> j & 1 == 1) {
            out.insert((x | relabel(y)) & !p);
        }
    }
    let mut v: Vec<Set> = out.into_iter().collect();
    v.sort_by_key(|&c| (popcount(c), elements(c)));
    v
}

/// Vector of `e_F` in `Z^{m−1}`: coordinates of the elements `1..m`, with
/// `e_0 = −(1, …, 1)`.
pub fn bergman_ray(m: usize, f: Set) -> Vec<Int> {
    let shift = if f & 1 == 1 { Int::one() } else { Int::zero() };
    (1..m).map(|i| Int::from((f >> i & 1) as i64) - &shift).collect()
}

/// Point of `R^m` (with `x_0 = 0`) lifting a point of the Bergman coordinates.
pub fn bergman_lift(y: &[Rat]) -> Vec<Rat> {
    let mut x = vec![Rat::zero()];
    x.extend(y.iter().cloned());
    x
}

#[derive(Clone, Debug)]
pub struct BergmanFan {
    pub fan: Fan,
    pub weight: Weight,
    /// Ray `k` is `e_{flats[k]}`.
    pub flats: Vec<Set>,
}

impl BergmanFan {
    pub fn ray_of(&self, f: Set) -> Option<usize> {
        self.flats.iter().position(|&g| g == f)
    }
}

fn maximal_chains(m: &Matroid, flats: &[Set], start: Set, top_rank: usize) -> Vec<Vec<Set>> {
    let r = m.rank_of(start);
    if r == top_rank {
        return vec![vec![start]];
    }
    let mut out = Vec::new();
    for &g in flats {
        if g & start == start && g != start && m.rank_of(g) == r + 1 {
            for mut ch in maximal_chains(m, flats, g, top_rank) {
                ch.insert(0, start);
                out.push(ch);
            }
        }
    }
    out
}

pub fn bergman_fan(m: &Matroid) -> Result<BergmanFan> {
    m.require_loopless()?;
    let n = m.ground();
    let flats = m.proper_flats();
    let rays: Vec<Vec<Int>> = flats.iter().map(|&f| bergman_ray(n, f)).collect();
    let idx: BTreeMap<Set, usize> = flats.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let r = m.rank();
    let mut cones: Vec<Vec<usize>> = Vec::new();
    if r >= 2 {
        for &f in flats.iter().filter(|&&f| m.rank_of(f) == 1) {
            for ch in maximal_chains(m, &flats, f, r - 1) {
                cones.push(ch.iter().map(|g| idx[g]).collect());
            }
        }
    }
    if cones.is_empty() {
        cones.push(Vec::new());
    }
    let fan = Fan::new(n.saturating_sub(1), rays, cones, false)?;
    let weight = Weight::reduced(&fan);
    Ok(BergmanFan { fan, weight, flats })
}

#[derive(Clone, Debug)]
pub struct AugmentedBergmanFan {
    pub fan: Fan,
    pub weight: Weight,
    /// Rays `0..m` are `e_i`; ray `m + k` is `−e_{E ∖ flats[k]}`.
    pub flats: Vec<Set>,
}

pub fn augmented_bergman_fan(m: &Matroid) -> Result<AugmentedBergmanFan> {
    m.require_loopless()?;
    let n = m.ground();
    let full = m.full();
    let flats: Vec<Set> = m.flats().into_iter().filter(|&f| f != full).collect();
    let mut rays: Vec<Vec<Int>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
        .collect();
    for &f in &flats {
        rays.push((0..n).map(|j| if f >> j & 1 == 1 { Int::zero() } else { -Int::one() }).collect());
    }
    let idx: BTreeMap<Set, usize> = flats.iter().enumerate().map(|(k, &f)| (f, n + k)).collect();
    let r = m.rank();
    let mut cones: Vec<Vec<usize>> = Vec::new();
    // empty flag: I a basis of M
    for &b in &m.bases {
        cones.push(elements(b));
    }
    for &f in &flats {
        let chains = if r == 0 { Vec::new() } else { maximal_chains(m, &flats, f, r - 1) };
        let indep: Vec<Set> = m.bases.iter().map(|&b| b & f).filter(|&s| popcount(s) == m.rank_of(f)).collect();
        let indep: BTreeSet<Set> = indep.into_iter().collect();
        for ch in &chains {
            for &i in &indep {
                let mut c = elements(i);
                c.extend(ch.iter().map(|g| idx[g]));
                cones.push(c);
            }
        }
    }
    let fan = Fan::new(n, rays, cones, false)?;
    let weight = Weight::reduced(&fan);
    Ok(AugmentedBergmanFan { fan, weight, flats })
}

/// Tropical-linear-space test: on every circuit the minimum is attained twice.
pub fn ak_membership(m: &Matroid, x: &[Rat]) -> bool {
    m.circuits().iter().all(|&c| {
        let vals: Vec<&Rat> = elements(c).iter().map(|&i| &x[i]).collect();
        let min = vals.iter().min().expect("nonempty circuit");
        vals.iter().filter(|v| *v == min).count() >= 2
    })
}

pub fn set_label(s: Set) -> String {
    elements(s).iter().map(|i| i.to_string()).collect::<Vec<_>>().join("")
}

/// Facets of a Bergman fan as flags, for display.
pub fn flags(b: &BergmanFan) -> Vec<Vec<Set>> {
    b.fan.cones(b.fan.dim()).iter().map(|c: &Cone| c.iter().map(|&i| b.flats[i]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balancing::{is_balanced, normality_report};
    use crate::linalg::{int, rat};

    #[test]
    fn axioms() {
        assert!(Matroid::from_bases(3, &[vec![0, 1, 2]]).is_ok());
        assert!(Matroid::uniform(2, 3).is_ok());
        assert!(matches!(Matroid::from_bases(4, &[vec![0, 1], vec![2, 3]]), Err(Error::ExchangeFails(..))));
        assert_eq!(Matroid::from_bases(2, &[]), Err(Error::EmptyBases));
    }

    #[test]
    fn flats_and_circuits() {
        let u33 = Matroid::uniform(3, 3).unwrap();
        let labels: Vec<String> = u33.proper_flats().into_iter().map(set_label).collect();
        assert_eq!(labels, vec!["0", "1", "2", "01", "02", "12"]);
        assert_eq!(Matroid::uniform(3, 4).unwrap().proper_flats().len(), 10);
        assert_eq!(Matroid::uniform(2, 3).unwrap().circuits(), vec![0b111]);
    }

    #[test]
    fn minors_of_u34() {
        let u34 = Matroid::uniform(3, 4).unwrap();
        assert_eq!(u34.delete(3).unwrap().0, Matroid::uniform(3, 3).unwrap());
        assert_eq!(u34.contract(3).unwrap().0, Matroid::uniform(2, 3).unwrap());
        assert_eq!(u34.minor(&[1], &[1]).unwrap_err(), Error::OverlappingSets);
    }

    #[test]
    fn figure_coordinates() {
        let b = bergman_fan(&Matroid::uniform(3, 3).unwrap()).unwrap();
        let expect: Vec<(&str, [i64; 2])> =
            vec![("0", [-1, -1]), ("1", [1, 0]), ("2", [0, 1]), ("01", [0, -1]), ("02", [-1, 0]), ("12", [1, 1])];
        for (k, (lab, v)) in expect.iter().enumerate() {
            assert_eq!(set_label(b.flats[k]), *lab);
            assert_eq!(b.fan.ray(k), &[int(v[0]), int(v[1])]);
        }
        assert!(b.fan.is_complete());
        assert!(is_balanced(&b.fan, &b.weight).unwrap());
        assert!(normality_report(&b.fan, &b.weight).unwrap().locally_irreducible);
    }

    #[test]
    fn u34_bergman_counts() {
        let b = bergman_fan(&Matroid::uniform(3, 4).unwrap()).unwrap();
        assert_eq!(b.fan.n_rays(), 10);
        assert_eq!(b.fan.cones(2).len(), 12);
        assert!(b.fan.is_unimodular());
        assert_eq!(bergman_fan(&Matroid::uniform(1, 1).unwrap()).unwrap().fan.dim(), 0);
    }

    #[test]
    fn augmented_small() {
        let a = augmented_bergman_fan(&Matroid::uniform(1, 1).unwrap()).unwrap();
        assert_eq!(a.fan.n_rays(), 2);
        assert_eq!(a.fan.dim(), 1);
        let a2 = augmented_bergman_fan(&Matroid::uniform(2, 2).unwrap()).unwrap();
        assert_eq!(a2.fan.dim(), 2);
        assert!(a2.fan.is_unimodular());
        assert!(is_balanced(&a2.fan, &a2.weight).unwrap());
    }

    #[test]
    fn parallel_connection_formulas_agree() {
        let u22 = Matroid::uniform(2, 2).unwrap();
        let (p, map) = parallel_connection(&u22, 0, &u22, 0).unwrap();
        assert_eq!(p, Matroid::uniform(3, 3).unwrap());
        assert_eq!(p.circuits(), parallel_connection_circuits(&u22, 0, &u22, 0, &map));
        let u23 = Matroid::uniform(2, 3).unwrap();
        let (q, map) = parallel_connection(&u23, 1, &u23, 2).unwrap();
        assert_eq!(q.circuits(), parallel_connection_circuits(&u23, 1, &u23, 2, &map));
    }

    #[test]
    fn ak_basic() {
        let u33 = Matroid::uniform(2, 3).unwrap();
        assert!(ak_membership(&u33, &[rat(0, 1), rat(0, 1), rat(1, 1)]));
        assert!(!ak_membership(&u33, &[rat(0, 1), rat(1, 1), rat(2, 1)]));
    }
}
