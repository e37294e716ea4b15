//! Conewise linear functions, divisors, convexity and tropical modification.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::balancing::Weight;
use crate::error::{Error, Result};
use crate::fan::{insert_sorted, Cone, Fan, StarFan};
use crate::linalg::{
    self, rank_int, rat_from_int, rational_kernel, solve_integer, solve_rational, to_rat_matrix, to_rat_vec,
    Int, IntMatrix, Rat, RatMatrix,
};
use crate::lp::{fourier_motzkin, simplex_feasible, FmOutcome, Ineq};

/// Values `f(e_ζ)` on the primitive ray generators of a simplicial fan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConewiseLinear {
    pub values: Vec<Rat>,
}

impl ConewiseLinear {
    pub fn new(values: Vec<Rat>) -> Self {
        ConewiseLinear { values }
    }

    pub fn from_ints(values: &[i64]) -> Self {
        ConewiseLinear { values: values.iter().map(|&v| Rat::from_integer(Int::from(v))).collect() }
    }

    pub fn from_int_vec(values: &[Int]) -> Self {
        ConewiseLinear { values: to_rat_vec(values) }
    }

    pub fn zero(n: usize) -> Self {
        ConewiseLinear { values: vec![Rat::zero(); n] }
    }

    /// Restriction of the linear function `m` to the fan.
    pub fn linear(fan: &Fan, m: &[Rat]) -> Self {
        ConewiseLinear { values: fan.rays().iter().map(|r| linalg::dot(m, &to_rat_vec(r))).collect() }
    }

    pub fn check(&self, fan: &Fan) -> Result<()> {
        if self.values.len() != fan.n_rays() {
            return Err(Error::InvalidFunction(format!(
                "{} values for {} rays",
                self.values.len(),
                fan.n_rays()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        ConewiseLinear { values: linalg::vec_add(&self.values, &other.values) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        ConewiseLinear { values: linalg::vec_sub(&self.values, &other.values) }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        ConewiseLinear { values: linalg::vec_scale(c, &self.values) }
    }

    pub fn neg(&self) -> Self {
        ConewiseLinear { values: linalg::vec_neg(&self.values) }
    }

    /// `f_σ(v)` for `v` in the span of σ.
    pub fn eval_on_cone(&self, fan: &Fan, cone: &[usize], v: &[Int]) -> Option<Rat> {
        if cone.is_empty() {
            return if v.iter().all(|x| x.is_zero()) { Some(Rat::zero()) } else { None };
        }
        let c = fan.cone_coordinates(cone, v)?;
        Some(cone.iter().zip(&c).map(|(&i, x)| x * &self.values[i]).sum())
    }

    /// Value at an arbitrary point of the support.
    pub fn eval(&self, fan: &Fan, p: &[Rat]) -> Option<Rat> {
        let c = fan.locate(p)?;
        if c.is_empty() {
            return Some(Rat::zero());
        }
        let m = to_rat_matrix(&fan.ray_matrix(&c));
        let x = solve_rational(&m, p)?;
        Some(c.iter().zip(&x).map(|(&i, t)| t * &self.values[i]).sum())
    }

    pub fn is_integral(&self) -> bool {
        self.values.iter().all(|v| v.is_integer())
    }

    /// Integer values, when every value is integral.
    pub fn int_values(&self) -> Option<Vec<Int>> {
        linalg::to_int_vec(&self.values)
    }
}

/// First maximal cone on which `f_σ` is not integral on `N_σ`.
pub fn meromorphic_witness(fan: &Fan, f: &ConewiseLinear) -> Result<Option<Cone>> {
    f.check(fan)?;
    for c in fan.maximal_cones() {
        if c.is_empty() {
            continue;
        }
        let b = fan.lattice_basis(&c);
        for j in 0..b.cols() {
            let v = f.eval_on_cone(fan, &c, &b.col(j)).expect("lattice vector in span");
            if !v.is_integer() {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

pub fn is_meromorphic(fan: &Fan, f: &ConewiseLinear) -> Result<bool> {
    Ok(meromorphic_witness(fan, f)?.is_none())
}

fn require_meromorphic(fan: &Fan, f: &ConewiseLinear) -> Result<()> {
    match meromorphic_witness(fan, f)? {
        Some(c) => Err(Error::NotMeromorphic(c)),
        None => Ok(()),
    }
}

/// Row of the linear map `f ↦ ord_τ(f)` in terms of ray values.
pub fn order_row(fan: &Fan, w: &Weight, tau: &[usize]) -> Result<Vec<Rat>> {
    let d = fan.dim();
    if d == 0 || tau.len() != d - 1 {
        return Err(Error::NotCodimOne(tau.to_vec()));
    }
    fan.require(tau)?;
    order_row_with(fan, w, tau, &|s| fan.unit_normal(tau, s))
}

fn order_row_with(
    fan: &Fan,
    w: &Weight,
    tau: &[usize],
    normal: &dyn Fn(&[usize]) -> Result<Vec<Int>>,
) -> Result<Vec<Rat>> {
    let mut row = vec![Rat::zero(); fan.n_rays()];
    let mut total = vec![Int::zero(); fan.rank()];
    for (_, s) in fan.covering(tau) {
        let om = w.get(fan, &s);
        if om.is_zero() {
            continue;
        }
        let n = normal(&s)?;
        let c = fan.cone_coordinates(&s, &n).expect("normal in span");
        let omr = rat_from_int(&om);
        for (&i, x) in s.iter().zip(&c) {
            row[i] -= &omr * x;
        }
        for (t, x) in total.iter_mut().zip(&n) {
            *t += &om * x;
        }
    }
    if !tau.is_empty() {
        let c = fan
            .cone_coordinates(tau, &total)
            .ok_or_else(|| Error::InvalidFan(format!("weight is unbalanced at {tau:?}")))?;
        for (&i, x) in tau.iter().zip(&c) {
            row[i] += x;
        }
    } else if total.iter().any(|x| !x.is_zero()) {
        return Err(Error::InvalidFan("weight is unbalanced at the origin".into()));
    }
    Ok(row)
}

/// Matrix of `f ↦ div(f)`: rows `Σ_{d−1}`, columns rays.
pub fn divisor_matrix(fan: &Fan, w: &Weight) -> Result<RatMatrix> {
    let d = fan.dim();
    if d == 0 {
        return Ok(RatMatrix::zeros(0, fan.n_rays()));
    }
    let rows: Vec<Vec<Rat>> = fan.cones(d - 1).iter().map(|t| order_row(fan, w, t)).collect::<Result<_>>()?;
    Ok(RatMatrix::from_rows(&rows, fan.n_rays()))
}

pub fn order_of_vanishing(fan: &Fan, w: &Weight, f: &ConewiseLinear, tau: &[usize]) -> Result<Int> {
    require_meromorphic(fan, f)?;
    let row = order_row(fan, w, tau)?;
    let v = linalg::dot(&row, &f.values);
    if !v.is_integer() {
        return Err(Error::NotMeromorphic(tau.to_vec()));
    }
    Ok(v.to_integer())
}

/// Order of vanishing computed with the normals shifted by `shift(σ)` in `N_τ`.
pub fn order_with_shifted_normals(
    fan: &Fan,
    w: &Weight,
    f: &ConewiseLinear,
    tau: &[usize],
    shift: &dyn Fn(&[usize]) -> Vec<Int>,
) -> Result<Rat> {
    let row = order_row_with(fan, w, tau, &|s| {
        let n = fan.unit_normal(tau, s)?;
        Ok(linalg::vec_add(&n, &shift(s)))
    })?;
    Ok(linalg::dot(&row, &f.values))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divisor {
    pub weight: Weight,
    pub holomorphic: bool,
    pub source: Option<ConewiseLinear>,
}

impl Divisor {
    pub fn is_trivial(&self) -> bool {
        self.weight.is_trivial()
    }
}

pub fn divisor_of(fan: &Fan, w: &Weight, f: &ConewiseLinear) -> Result<Divisor> {
    require_meromorphic(fan, f)?;
    let d = fan.dim();
    let m = divisor_matrix(fan, w)?;
    let vals = m.mul_vec(&f.values);
    let mut out = Vec::with_capacity(vals.len());
    for (i, v) in vals.into_iter().enumerate() {
        if !v.is_integer() {
            return Err(Error::NotMeromorphic(fan.cones(d - 1)[i].clone()));
        }
        out.push(v.to_integer());
    }
    let holomorphic = out.iter().all(|v| !v.is_negative());
    Ok(Divisor { weight: Weight { dim: d.saturating_sub(1), values: out }, holomorphic, source: Some(f.clone()) })
}

/// Output of a tropical modification. Ray `i < n_rays(Σ)` of `fan` is the
/// graph lift of ray `i` of Σ, so `σ_base` has the same ray indices as σ.
#[derive(Clone, Debug)]
pub struct TropicalModification {
    pub fan: Fan,
    pub weight: Weight,
    pub function: ConewiseLinear,
    pub divisor: Divisor,
    /// Index of the ray `e_up`, absent in the degenerate case.
    pub up: Option<usize>,
    /// Cones δ of the support of the divisor, closed under faces.
    pub delta: Vec<Cone>,
    pub degenerate: bool,
}

impl TropicalModification {
    pub fn base_cone(&self, sigma: &[usize]) -> Cone {
        sigma.to_vec()
    }

    pub fn up_cone(&self, delta: &[usize]) -> Option<Cone> {
        self.up.map(|u| insert_sorted(delta, u))
    }

    /// Projection to the first `n` coordinates.
    pub fn projection(&self) -> IntMatrix {
        let n = self.fan.rank() - 1;
        let mut p = IntMatrix::zeros(n, n + 1);
        for i in 0..n {
            p.set(i, i, Int::one());
        }
        p
    }

    pub fn up_vector(&self) -> Vec<Int> {
        let n = self.fan.rank();
        let mut v = vec![Int::zero(); n];
        v[n - 1] = Int::one();
        v
    }
}

pub fn tropical_modification(fan: &Fan, w: &Weight, f: &ConewiseLinear) -> Result<TropicalModification> {
    require_meromorphic(fan, f)?;
    let ints = f
        .int_values()
        .ok_or_else(|| Error::NotMeromorphic(fan.maximal_cones().into_iter().next().unwrap_or_default()))?;
    let d = fan.dim();
    let divisor = divisor_of(fan, w, f)?;
    let n = fan.rank();
    let mut rays: Vec<Vec<Int>> = fan
        .rays()
        .iter()
        .zip(&ints)
        .map(|(r, v)| {
            let mut x = r.clone();
            x.push(v.clone());
            x
        })
        .collect();
    let mut delta: BTreeSet<Cone> = BTreeSet::new();
    if d >= 1 {
        for (t, v) in fan.cones(d - 1).iter().zip(&divisor.weight.values) {
            if !v.is_zero() {
                for c in fan.all_cones().filter(|c| crate::fan::is_subset(c, t)) {
                    delta.insert(c.clone());
                }
            }
        }
    }
    let degenerate = delta.is_empty();
    let mut cones: BTreeSet<Cone> = fan.all_cones().cloned().collect();
    let up = if degenerate {
        None
    } else {
        let u = rays.len();
        let mut e = vec![Int::zero(); n + 1];
        e[n] = Int::one();
        rays.push(e);
        for c in &delta {
            cones.insert(insert_sorted(c, u));
        }
        Some(u)
    };
    let new = Fan::from_closed(n + 1, rays, cones);
    let mut weight = Weight::zero(&new, d);
    for (c, v) in fan.cones(d).iter().zip(&w.values) {
        let i = new.cone_index(c).expect("base cone");
        weight.values[i] = v.clone();
    }
    if let Some(u) = up {
        for (t, v) in fan.cones(d - 1).iter().zip(&divisor.weight.values) {
            if !v.is_zero() {
                let i = new.cone_index(&insert_sorted(t, u)).expect("up cone");
                weight.values[i] = v.clone();
            }
        }
    }
    Ok(TropicalModification {
        fan: new,
        weight,
        function: f.clone(),
        divisor,
        up,
        delta: delta.into_iter().collect(),
        degenerate,
    })
}

#[derive(Clone, Debug)]
pub struct InducedFunction {
    pub star: StarFan,
    pub function: ConewiseLinear,
    /// The linear function subtracted before pushing to the star.
    pub linear_part: Vec<Rat>,
    /// Set when `f^σ` fails to be integral on the star.
    pub denominators: bool,
}

/// Linear `m` with `m(e_ζ) = f(e_ζ)` on σ and zero on the star's lift columns.
fn local_linear(fan: &Fan, f: &ConewiseLinear, st: &StarFan) -> Vec<Rat> {
    let n = fan.rank();
    let mut rows: Vec<Vec<Rat>> = st.base.iter().map(|&z| to_rat_vec(fan.ray(z))).collect();
    let mut rhs: Vec<Rat> = st.base.iter().map(|&z| f.values[z].clone()).collect();
    for j in 0..st.lift.cols() {
        rows.push(to_rat_vec(&st.lift.col(j)));
        rhs.push(Rat::zero());
    }
    let a = RatMatrix::from_rows(&rows, n);
    solve_rational(&a, &rhs).expect("rays of σ and the lift span")
}

pub fn induced_function(fan: &Fan, f: &ConewiseLinear, sigma: &[usize]) -> Result<InducedFunction> {
    f.check(fan)?;
    let st = fan.star(sigma)?;
    let m = local_linear(fan, f, &st);
    let values: Vec<Rat> = st
        .ray_origin
        .iter()
        .zip(&st.multiplicity)
        .map(|(&r, mu)| (&f.values[r] - linalg::dot(&m, &to_rat_vec(fan.ray(r)))) / rat_from_int(mu))
        .collect();
    let g = ConewiseLinear::new(values);
    let denominators = !is_meromorphic(&st.fan, &g)?;
    Ok(InducedFunction { star: st, function: g, linear_part: m, denominators })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeConvexity {
    pub cone: Cone,
    pub convex: bool,
    pub strictly_convex: bool,
    /// Nonnegative integer multipliers on link rays certifying failure of
    /// strict convexity (zero vector when convex fails outright).
    pub witness: Option<Vec<(usize, Int)>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexityReport {
    pub convex: bool,
    pub strictly_convex: bool,
    pub witness_cone: Option<Cone>,
    pub cones: Vec<ConeConvexity>,
}

/// Coordinates of each link ray in the frame `[rays of σ | lift]`.
struct LocalFrame {
    link: Vec<usize>,
    alpha: Vec<Vec<Rat>>,
    w: Vec<Vec<Rat>>,
}

fn local_frame(fan: &Fan, sigma: &[usize]) -> Result<LocalFrame> {
    let st = fan.star(sigma)?;
    let n = fan.rank();
    let mut cols: Vec<Vec<Int>> = sigma.iter().map(|&z| fan.ray(z).to_vec()).collect();
    cols.extend(st.lift.col_vecs());
    let basis = to_rat_matrix(&IntMatrix::from_cols(&cols, n));
    let inv = linalg::inverse_rat(&basis).expect("frame is a basis");
    let k = sigma.len();
    let link = fan.link_rays(sigma);
    let mut alpha = Vec::new();
    let mut w = Vec::new();
    for &r in &link {
        let c = inv.mul_vec(&to_rat_vec(fan.ray(r)));
        alpha.push(c[..k].to_vec());
        w.push(c[k..].to_vec());
    }
    Ok(LocalFrame { link, alpha, w })
}

fn integer_witness(link: &[usize], mult: &[Rat]) -> Vec<(usize, Int)> {
    let den = mult.iter().fold(Int::one(), |a, m| a.lcm(m.denom()));
    let ints: Vec<Int> = mult.iter().map(|m| (m * rat_from_int(&den)).to_integer()).collect();
    let (p, _) = linalg::primitive(&ints);
    link.iter().copied().zip(p).filter(|(_, v)| !v.is_zero()).collect()
}

pub fn cone_convexity(fan: &Fan, f: &ConewiseLinear, sigma: &[usize]) -> Result<ConeConvexity> {
    let fr = local_frame(fan, sigma)?;
    let q = fan.rank() - sigma.len();
    let g: Vec<Rat> = fr
        .link
        .iter()
        .zip(&fr.alpha)
        .map(|(&r, a)| &f.values[r] - sigma.iter().zip(a).map(|(&z, x)| x * &f.values[z]).sum::<Rat>())
        .collect();
    let weak: Vec<Ineq> = fr.w.iter().zip(&g).map(|(w, gr)| Ineq::new(linalg::vec_neg(w), -gr.clone())).collect();
    let convex = matches!(fourier_motzkin(q, &weak), FmOutcome::Feasible(_));
    let mut strict_sys: Vec<Ineq> = fr
        .w
        .iter()
        .zip(&g)
        .map(|(w, gr)| {
            let mut c = linalg::vec_neg(w);
            c.push(gr.clone());
            Ineq::new(c, Rat::one())
        })
        .collect();
    let mut tpos = vec![Rat::zero(); q + 1];
    tpos[q] = Rat::one();
    strict_sys.push(Ineq::new(tpos, Rat::zero()));
    let (strict, witness) = match fourier_motzkin(q + 1, &strict_sys) {
        FmOutcome::Feasible(_) => (true, None),
        FmOutcome::Infeasible(m) => (false, Some(integer_witness(&fr.link, &m[..fr.link.len()]))),
    };
    Ok(ConeConvexity { cone: sigma.to_vec(), convex, strictly_convex: strict, witness })
}

pub fn convexity_check(fan: &Fan, f: &ConewiseLinear) -> Result<ConvexityReport> {
    f.check(fan)?;
    let cones: Vec<Cone> = fan.all_cones().cloned().collect();
    let results: Vec<ConeConvexity> = cones.par_iter().map(|c| cone_convexity(fan, f, c)).collect::<Result<_>>()?;
    let convex = results.iter().all(|r| r.convex);
    let strictly_convex = results.iter().all(|r| r.strictly_convex);
    let witness_cone = results.iter().find(|r| !r.strictly_convex).map(|r| r.cone.clone());
    Ok(ConvexityReport { convex, strictly_convex, witness_cone, cones: results })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiProjective {
    pub holds: bool,
    pub certificate: Option<ConewiseLinear>,
}

/// Joint feasibility for a strictly convex function: variables are the ray
/// values and one local linear parameter vector per cone with nonempty link.
pub fn quasi_projective_check(fan: &Fan) -> Result<QuasiProjective> {
    let nr = fan.n_rays();
    let mut frames = Vec::new();
    let mut nvars = nr;
    for c in fan.all_cones() {
        let fr = local_frame(fan, c)?;
        if fr.link.is_empty() {
            continue;
        }
        let off = nvars;
        nvars += fan.rank() - c.len();
        frames.push((c.clone(), fr, off));
    }
    let mut ges = Vec::new();
    for (c, fr, off) in &frames {
        for ((&r, a), w) in fr.link.iter().zip(&fr.alpha).zip(&fr.w) {
            let mut co = vec![Rat::zero(); nvars];
            co[r] += Rat::one();
            for (&z, x) in c.iter().zip(a) {
                co[z] -= x;
            }
            for (j, x) in w.iter().enumerate() {
                co[off + j] -= x;
            }
            ges.push(Ineq::new(co, Rat::one()));
        }
    }
    let sol = simplex_feasible(nvars, &vec![false; nvars], &[], &ges);
    Ok(match sol {
        None => QuasiProjective { holds: false, certificate: None },
        Some(x) => {
            let vals = &x[..nr];
            let den = vals.iter().fold(Int::one(), |a, m| a.lcm(m.denom()));
            let f = ConewiseLinear::new(vals.iter().map(|v| v * rat_from_int(&den)).collect());
            QuasiProjective { holds: true, certificate: Some(f) }
        }
    })
}

/// True when `div(f) = 0` forces `f` to be linear.
pub fn is_div_faithful_at_origin(fan: &Fan, w: &Weight) -> Result<bool> {
    let m = divisor_matrix(fan, w)?;
    let ker = rational_kernel(&m).len();
    let rays = IntMatrix::from_cols(fan.rays(), fan.rank());
    Ok(ker == rank_int(&rays))
}

/// Solves `div(f) = D` for an integral `f` and returns the modification along it.
/// Requires saturation at the origin and div-faithfulness, so the result is
/// independent of the chosen `f` up to isomorphism.
pub fn modification_along_divisor(fan: &Fan, w: &Weight, divisor: &Weight) -> Result<TropicalModification> {
    if !fan.saturation_at(&[])? {
        return Err(Error::HypothesisFails("fan is not saturated at the origin".into()));
    }
    if !is_div_faithful_at_origin(fan, w)? {
        return Err(Error::HypothesisFails("fan is not div-faithful at the origin".into()));
    }
    let f = solve_divisor(fan, w, divisor)?;
    tropical_modification(fan, w, &f)
}

/// Some integral `f` with `div(f) = D`.
pub fn solve_divisor(fan: &Fan, w: &Weight, divisor: &Weight) -> Result<ConewiseLinear> {
    let m = divisor_matrix(fan, w)?;
    if divisor.values.len() != m.rows() {
        return Err(Error::DimensionMismatch(divisor.values.len(), m.rows()));
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..m.rows() {
        let den = m.row(i).iter().fold(Int::one(), |a, x| a.lcm(x.denom()));
        let dr = rat_from_int(&den);
        rows.push(m.row(i).iter().map(|x| (x * &dr).to_integer()).collect::<Vec<_>>());
        rhs.push(&divisor.values[i] * &den);
    }
    let a = IntMatrix::from_rows(&rows, fan.n_rays());
    let x = solve_integer(&a, &rhs).ok_or_else(|| Error::NoSolution("divisor is not principal".into()))?;
    let f = ConewiseLinear::from_int_vec(&x);
    if !is_meromorphic(fan, &f)? {
        return Err(Error::NoSolution("solution is not integral on every cone".into()));
    }
    Ok(f)
}
