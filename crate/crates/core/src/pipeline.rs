//! Operation trees over the base set {points, Λ}: building with class checks,
//! quasilinear property sweeps, and bounded closure enumeration.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::balancing::{dual_graph_components, is_balanced, normality_report, product_weight, subfan, Weight};
use crate::chow::{divclass_report, pd_check, subdivision_weight, Coefficients};
use crate::error::{Error, Result};
use crate::fan::{is_subset, minus, Cone, Fan};
use crate::kahler::chow_kahler_check;
use crate::linalg::{self, rat, to_rat_matrix, Int, IntMatrix, Rat};
use crate::piecewise::{convexity_check, quasi_projective_check, tropical_modification, ConewiseLinear};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpTree {
    /// The point fan in rank 0 with orientation `n ≠ 0`.
    Point(i64),
    Line,
    Product(Box<OpTree>, Box<OpTree>),
    /// Ray values refer to the built fan of the child.
    TropMod(Box<OpTree>, ConewiseLinear),
    BlowUp(Box<OpTree>, Cone, Option<Vec<Int>>),
    BlowDown(Box<OpTree>, usize),
}

impl OpTree {
    pub fn product(a: OpTree, b: OpTree) -> OpTree {
        OpTree::Product(Box::new(a), Box::new(b))
    }

    pub fn tropmod(a: OpTree, f: ConewiseLinear) -> OpTree {
        OpTree::TropMod(Box::new(a), f)
    }

    pub fn blowup(a: OpTree, cone: &[usize]) -> OpTree {
        OpTree::BlowUp(Box::new(a), cone.to_vec(), None)
    }

    pub fn blowup_at(a: OpTree, cone: &[usize], ray: Vec<Int>) -> OpTree {
        OpTree::BlowUp(Box::new(a), cone.to_vec(), Some(ray))
    }

    pub fn blowdown(a: OpTree, ray: usize) -> OpTree {
        OpTree::BlowDown(Box::new(a), ray)
    }

    /// `Λ^n` as an iterated product.
    pub fn line_power(n: usize) -> OpTree {
        (0..n).fold(OpTree::Point(1), |acc, _| OpTree::product(acc, OpTree::Line))
    }

    pub fn op_name(&self) -> &'static str {
        match self {
            OpTree::Point(_) => "point",
            OpTree::Line => "line",
            OpTree::Product(..) => "product",
            OpTree::TropMod(..) => "tropmod",
            OpTree::BlowUp(..) => "blowup",
            OpTree::BlowDown(..) => "blowdown",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predicate {
    All,
    Simplicial,
    Unimodular,
    QuasiProjective,
    Effective,
    Reduced,
    Unitary,
}

impl Predicate {
    pub const ALL: [Predicate; 7] = [
        Predicate::All,
        Predicate::Simplicial,
        Predicate::Unimodular,
        Predicate::QuasiProjective,
        Predicate::Effective,
        Predicate::Reduced,
        Predicate::Unitary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::All => "all",
            Predicate::Simplicial => "simplicial",
            Predicate::Unimodular => "unimodular",
            Predicate::QuasiProjective => "quasi-projective",
            Predicate::Effective => "effective",
            Predicate::Reduced => "reduced",
            Predicate::Unitary => "unitary",
        }
    }

    pub fn parse(s: &str) -> Result<Predicate> {
        Predicate::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown class predicate {s:?}")))
    }
}

/// Conjunction of predicates; the empty conjunction is the class of all fans.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassSpec {
    pub predicates: Vec<Predicate>,
}

impl ClassSpec {
    pub fn all() -> ClassSpec {
        ClassSpec::default()
    }

    pub fn of(preds: &[Predicate]) -> ClassSpec {
        let mut predicates = preds.to_vec();
        predicates.sort();
        predicates.dedup();
        ClassSpec { predicates }
    }

    /// Parses `"unimodular+effective"` style conjunctions (also `,` or `&`).
    pub fn parse(s: &str) -> Result<ClassSpec> {
        let preds: Vec<Predicate> =
            s.split(['+', ',', '&']).filter(|p| !p.trim().is_empty()).map(Predicate::parse).collect::<Result<_>>()?;
        Ok(ClassSpec::of(&preds))
    }

    pub fn has(&self, p: Predicate) -> bool {
        self.predicates.contains(&p)
    }

    pub fn and(&self, other: &ClassSpec) -> ClassSpec {
        let mut p = self.predicates.clone();
        p.extend(other.predicates.iter().copied());
        ClassSpec::of(&p)
    }

    pub fn name(&self) -> String {
        if self.predicates.is_empty() {
            return "all".into();
        }
        self.predicates.iter().map(|p| p.name()).collect::<Vec<_>>().join("+")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEntry {
    pub node: String,
    pub op: &'static str,
    pub check: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct Built {
    pub fan: Fan,
    pub weight: Weight,
    /// Strictly convex function when one was found.
    pub certificate: Option<ConewiseLinear>,
    pub log: Vec<LogEntry>,
    /// Ray vectors introduced by blow-up nodes and still present.
    pub exceptional: Vec<Vec<Int>>,
}

struct Ctx<'a> {
    class: &'a ClassSpec,
    log: Vec<LogEntry>,
}

impl Ctx<'_> {
    fn record(&mut self, node: &str, op: &'static str, check: &str, ok: bool, detail: String) {
        self.log.push(LogEntry { node: node.to_string(), op, check: check.to_string(), ok, detail });
    }

    fn require(&mut self, node: &str, op: &'static str, check: &str, ok: bool, detail: String) -> Result<()> {
        self.record(node, op, check, ok, detail.clone());
        if ok {
            Ok(())
        } else {
            Err(Error::ClassViolation { node: format!("{node} ({op})"), reason: format!("{check}: {detail}") })
        }
    }
}

fn fmt_ints(v: &[Int]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(","))
}

fn fmt_rats(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(","))
}

/// Strictly convex `h`, or an LP certificate, or none.
fn certify(fan: &Fan, candidates: Vec<ConewiseLinear>) -> Result<(Option<ConewiseLinear>, &'static str)> {
    for h in candidates {
        if h.values.len() == fan.n_rays() && convexity_check(fan, &h)?.strictly_convex {
            return Ok((Some(h), "recipe"));
        }
    }
    let q = quasi_projective_check(fan)?;
    Ok((q.certificate, if q.holds { "lp" } else { "none" }))
}

fn halvings(start: Rat, n: usize) -> Vec<Rat> {
    let mut out = Vec::with_capacity(n);
    let mut e = start;
    for _ in 0..n {
        out.push(e.clone());
        e /= rat(2, 1);
    }
    out
}

/// Class membership of a built (fan, orientation) pair.
fn check_class(ctx: &mut Ctx, node: &str, op: &'static str, b: &Built) -> Result<()> {
    let class = ctx.class;
    let balanced = is_balanced(&b.fan, &b.weight)?;
    ctx.require(node, op, "balanced", balanced, format!("dim {} rank {}", b.fan.dim(), b.fan.rank()))?;
    let full = b.weight.has_full_support();
    ctx.require(node, op, "orientation", full, "weight has full support".into())?;
    let comps = dual_graph_components(&b.fan).len();
    ctx.require(node, op, "connected-codim-one", comps <= 1, format!("{comps} component(s)"))?;
    for &p in &class.predicates {
        let (ok, detail) = match p {
            Predicate::All | Predicate::Simplicial => (true, String::new()),
            Predicate::Unimodular => (b.fan.is_unimodular(), String::new()),
            Predicate::QuasiProjective => match &b.certificate {
                Some(h) => (true, format!("certificate {}", fmt_rats(&h.values))),
                None => (false, "no strictly convex function".into()),
            },
            Predicate::Effective => (b.weight.is_effective(), fmt_ints(&b.weight.values)),
            Predicate::Reduced => (b.weight.is_reduced(), fmt_ints(&b.weight.values)),
            Predicate::Unitary => (b.weight.is_unitary(), fmt_ints(&b.weight.values)),
        };
        ctx.require(node, op, p.name(), ok, detail)?;
    }
    Ok(())
}

/// Side conditions on the divisor of a modification: the tropical fan
/// `(Δ, div f)` must lie in the class.
fn check_divisor(ctx: &mut Ctx, node: &str, child: &Built, divisor: &Weight) -> Result<()> {
    let op = "tropmod";
    if divisor.is_trivial() {
        ctx.record(node, op, "divisor", true, "trivial divisor (degenerate modification)".into());
        return Ok(());
    }
    let entries: Vec<(Cone, Int)> =
        child.fan.cones(divisor.dim).iter().cloned().zip(divisor.values.iter().cloned()).filter(|(_, v)| !v.is_zero()).collect();
    let detail: Vec<String> = entries.iter().map(|(c, v)| format!("{c:?}:{v}")).collect();
    ctx.record(node, op, "divisor", true, detail.join(" "));
    let gens: Vec<Cone> = entries.iter().map(|(c, _)| c.clone()).collect();
    let (sub, map) = subfan(&child.fan, &gens);
    let mut sw = Weight::zero(&sub, divisor.dim);
    for (c, v) in &entries {
        let mut m: Cone = c.iter().map(|r| map[r]).collect();
        m.sort_unstable();
        let i = sub.cone_index(&m).expect("divisor cone");
        sw.values[i] = v.clone();
    }
    for &p in &ctx.class.predicates.clone() {
        let ok = match p {
            Predicate::All | Predicate::Simplicial => true,
            Predicate::Unimodular => sub.is_unimodular(),
            Predicate::QuasiProjective => match &child.certificate {
                Some(h) => {
                    let mut vals = vec![Rat::zero(); sub.n_rays()];
                    for (&r, &s) in &map {
                        vals[s] = h.values[r].clone();
                    }
                    convexity_check(&sub, &ConewiseLinear::new(vals))?.strictly_convex
                        || quasi_projective_check(&sub)?.holds
                }
                None => quasi_projective_check(&sub)?.holds,
            },
            Predicate::Effective => sw.values.iter().all(|v| v.is_zero() || v.is_positive()),
            Predicate::Reduced => sw.values.iter().all(|v| v.is_zero() || v.is_one()),
            Predicate::Unitary => sw.values.iter().all(|v| v.is_zero() || v.abs().is_one()),
        };
        ctx.require(node, op, &format!("divisor {}", p.name()), ok, String::new())?;
    }
    Ok(())
}

/// Inverse of the subdivision weight: `ω(η) = ω'((η∖ζ) ∪ ρ)` for `η ⊇ σ`.
pub fn assembled_weight(sub: &Fan, w: &Weight, rho: usize, base: &Fan, sigma: &[usize]) -> Result<Weight> {
    let d = sub.dim();
    let back = |i: usize| if i >= rho { i + 1 } else { i };
    let mut out = Weight::zero(base, d);
    for (k, c) in base.cones(d).iter().enumerate() {
        let old: Cone = c.iter().map(|&i| back(i)).collect();
        out.values[k] = if is_subset(sigma, c) {
            let mut vals = sigma.iter().map(|&z| {
                let mut f = minus(&old, &[back(z)]);
                f.push(rho);
                f.sort_unstable();
                w.get(sub, &f)
            });
            let first = vals.next().unwrap_or_else(Int::zero);
            if vals.any(|v| v != first) {
                return Err(Error::NotABlowup(rho));
            }
            first
        } else {
            w.get(sub, &old)
        };
    }
    Ok(out)
}

fn build_node(tree: &OpTree, node: &str, ctx: &mut Ctx) -> Result<Built> {
    let op = tree.op_name();
    let built = match tree {
        OpTree::Point(n) => {
            if *n == 0 {
                return Err(Error::InvalidFunction("point weight must be nonzero".into()));
            }
            let fan = Fan::point();
            let weight = Weight::constant(&fan, 0, *n);
            ctx.record(node, op, "base", true, format!("weight {n}"));
            Built { fan, weight, certificate: Some(ConewiseLinear::zero(0)), log: Vec::new(), exceptional: Vec::new() }
        }
        OpTree::Line => {
            let fan = Fan::line();
            let weight = Weight::reduced(&fan);
            ctx.record(node, op, "base", true, "rays [1],[-1]".into());
            Built { fan, weight, certificate: Some(ConewiseLinear::from_ints(&[1, 1])), log: Vec::new(), exceptional: Vec::new() }
        }
        OpTree::Product(a, b) => {
            let ba = build_node(a, &format!("{node}.0"), ctx)?;
            let bb = build_node(b, &format!("{node}.1"), ctx)?;
            let fan = ba.fan.product(&bb.fan);
            let weight = product_weight(&ba.fan, &ba.weight, &bb.fan, &bb.weight, &fan);
            let cand = match (&ba.certificate, &bb.certificate) {
                (Some(x), Some(y)) => vec![ConewiseLinear::new(x.values.iter().chain(&y.values).cloned().collect())],
                _ => Vec::new(),
            };
            let (certificate, how) = certify(&fan, cand)?;
            ctx.record(node, op, "certificate", certificate.is_some(), how.into());
            let shift = |v: &Vec<Int>, left: bool| {
                let mut out = vec![Int::zero(); fan.rank()];
                let off = if left { 0 } else { ba.fan.rank() };
                for (i, x) in v.iter().enumerate() {
                    out[off + i] = x.clone();
                }
                out
            };
            let mut exceptional: Vec<Vec<Int>> = ba.exceptional.iter().map(|v| shift(v, true)).collect();
            exceptional.extend(bb.exceptional.iter().map(|v| shift(v, false)));
            Built { fan, weight, certificate, log: Vec::new(), exceptional }
        }
        OpTree::TropMod(a, f) => {
            let ba = build_node(a, &format!("{node}.0"), ctx)?;
            if f.values.len() != ba.fan.n_rays() {
                return Err(Error::InvalidFunction(format!(
                    "function has {} values, child fan has {} rays",
                    f.values.len(),
                    ba.fan.n_rays()
                )));
            }
            let m = tropical_modification(&ba.fan, &ba.weight, f)
                .map_err(|e| Error::InvalidFunction(format!("at node {node}: {e}")))?;
            check_divisor(ctx, node, &ba, &m.divisor.weight)?;
            let cand = match &ba.certificate {
                Some(g) => {
                    let mut list = Vec::new();
                    let ups: Vec<Rat> = if m.up.is_some() { halvings(Rat::one(), 12) } else { vec![Rat::zero()] };
                    for e in std::iter::once(Rat::zero()).chain(ups) {
                        let mut v = g.values.clone();
                        if m.up.is_some() {
                            v.push(e);
                        }
                        list.push(ConewiseLinear::new(v));
                    }
                    list
                }
                None => Vec::new(),
            };
            let (certificate, how) = certify(&m.fan, cand)?;
            ctx.record(node, op, "certificate", certificate.is_some(), how.into());
            let exceptional = ba
                .exceptional
                .iter()
                .filter_map(|v| {
                    let i = ba.fan.rays().iter().position(|r| r == v)?;
                    Some(m.fan.ray(i).to_vec())
                })
                .collect();
            Built { fan: m.fan, weight: m.weight, certificate, log: Vec::new(), exceptional }
        }
        OpTree::BlowUp(a, cone, ray) => {
            let ba = build_node(a, &format!("{node}.0"), ctx)?;
            let sigma = crate::fan::sorted(cone);
            let fan = ba.fan.stellar_subdivide(&sigma, ray.as_deref())?;
            let weight = subdivision_weight(&ba.fan, &ba.weight, &sigma, &fan)?;
            let rho = fan.n_rays() - 1;
            ctx.record(node, op, "subdivide", true, format!("cone {sigma:?} ray {}", fmt_ints(fan.ray(rho))));
            let cand = match &ba.certificate {
                Some(h) => {
                    let at = h.eval_on_cone(&ba.fan, &sigma, fan.ray(rho)).expect("ray lies in σ");
                    halvings(rat(1, 2), 20)
                        .into_iter()
                        .map(|e| {
                            let mut v = h.values.clone();
                            v.push(&at - e);
                            ConewiseLinear::new(v)
                        })
                        .collect()
                }
                None => Vec::new(),
            };
            let (certificate, how) = certify(&fan, cand)?;
            ctx.record(node, op, "certificate", certificate.is_some(), how.into());
            let mut exceptional = ba.exceptional.clone();
            exceptional.push(fan.ray(rho).to_vec());
            Built { fan, weight, certificate, log: Vec::new(), exceptional }
        }
        OpTree::BlowDown(a, rho) => {
            let ba = build_node(a, &format!("{node}.0"), ctx)?;
            if *rho >= ba.fan.n_rays() {
                return Err(Error::NotABlowup(*rho));
            }
            let vector = ba.fan.ray(*rho).to_vec();
            let structural = ba.exceptional.contains(&vector);
            let (fan, sigma) = ba.fan.stellar_assemble(*rho)?;
            let how = if structural { "structural" } else { "detected" };
            ctx.record(node, op, "assemble", true, format!("ray {rho} {how}, cone {sigma:?}"));
            let weight = assembled_weight(&ba.fan, &ba.weight, *rho, &fan, &sigma)?;
            let cand = match &ba.certificate {
                Some(h) => {
                    let v: Vec<Rat> = h.values.iter().enumerate().filter(|(i, _)| i != rho).map(|(_, x)| x.clone()).collect();
                    vec![ConewiseLinear::new(v)]
                }
                None => Vec::new(),
            };
            let (certificate, how) = certify(&fan, cand)?;
            ctx.record(node, op, "certificate", certificate.is_some(), how.into());
            let exceptional = ba.exceptional.iter().filter(|v| **v != vector).cloned().collect();
            Built { fan, weight, certificate, log: Vec::new(), exceptional }
        }
    };
    check_class(ctx, node, op, &built)?;
    Ok(built)
}

/// Evaluates the tree bottom-up, checking class membership at every node.
pub fn build(tree: &OpTree, class: &ClassSpec) -> Result<Built> {
    let mut ctx = Ctx { class, log: Vec::new() };
    let mut b = build_node(tree, "0", &mut ctx)?;
    b.log = ctx.log;
    Ok(b)
}

// ---------------------------------------------------------------------------
// quasilinear property sweep

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub applicable: bool,
    pub holds: bool,
    pub witness: Option<Cone>,
}

#[derive(Clone, Debug)]
pub struct QuasilinearReport {
    pub properties: Vec<PropertyResult>,
    pub built: Built,
}

impl QuasilinearReport {
    pub fn pass(&self) -> bool {
        self.properties.iter().all(|p| !p.applicable || p.holds)
    }

    pub fn first_failure(&self) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.applicable && !p.holds)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

/// Properties of a built fan expected for quasilinear fans of its class.
pub fn quasilinear_properties(built: Built) -> Result<QuasilinearReport> {
    let fan = &built.fan;
    let w = &built.weight;
    let mut props = Vec::new();
    let comps = dual_graph_components(fan).len();
    props.push(PropertyResult { name: "connected-codim-one", applicable: true, holds: comps <= 1, witness: None });
    let nr = normality_report(fan, w)?;
    props.push(PropertyResult { name: "q-normal", applicable: true, holds: nr.q_normal, witness: None });
    props.push(PropertyResult {
        name: "q-locally-irreducible",
        applicable: true,
        holds: nr.q_locally_irreducible,
        witness: if nr.q_locally_irreducible { None } else { nr.witness.clone() },
    });
    let dc = divclass_report(fan, w)?;
    props.push(PropertyResult {
        name: "div-faithful",
        applicable: true,
        holds: dc.ploc_div_faithful,
        witness: if dc.ploc_div_faithful { None } else { dc.witness.clone() },
    });
    props.push(PropertyResult {
        name: "q-principal",
        applicable: nr.q_locally_irreducible,
        holds: dc.ploc_q_principal,
        witness: if dc.ploc_q_principal { None } else { dc.witness.clone() },
    });
    let unimodular = fan.is_unimodular();
    let mut pd_witness = None;
    if unimodular {
        let cones: Vec<Cone> = fan.all_cones().cloned().collect();
        let fails: Vec<Option<Cone>> = cones
            .par_iter()
            .map(|c| {
                let (_, ring) = crate::chow::star_ring(fan, w, c, Coefficients::Q)?;
                Ok(if pd_check(&ring)?.holds { None } else { Some(c.clone()) })
            })
            .collect::<Result<_>>()?;
        pd_witness = fails.into_iter().flatten().next();
    }
    props.push(PropertyResult { name: "ploc-pd-q", applicable: unimodular, holds: pd_witness.is_none(), witness: pd_witness });
    let kahler_applicable = unimodular && w.is_effective() && built.certificate.is_some();
    let (holds, witness) = if kahler_applicable {
        let rep = chow_kahler_check(fan, w, built.certificate.as_ref(), &BTreeMap::new())?;
        let wit = rep.stars.iter().find(|s| !s.pass).map(|s| s.cone.clone());
        (rep.pass, wit)
    } else {
        (false, None)
    };
    props.push(PropertyResult { name: "chow-kahler", applicable: kahler_applicable, holds, witness });
    Ok(QuasilinearReport { properties: props, built })
}

/// Builds the tree and asserts every applicable quasilinear property.
pub fn quasilinear_witness_check(tree: &OpTree, class: &ClassSpec) -> Result<QuasilinearReport> {
    let built = build(tree, class)?;
    let rep = quasilinear_properties(built)?;
    if let Some(p) = rep.first_failure() {
        return Err(Error::PropertyFails { name: p.name.to_string(), cone: p.witness.clone().unwrap_or_default() });
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// isomorphism

fn invariants(fan: &Fan, w: &Weight) -> (usize, usize, Vec<usize>, Vec<Int>, Vec<usize>) {
    let counts = (0..=fan.dim()).map(|k| fan.cones(k).len()).collect();
    let mut ws = w.values.clone();
    ws.sort();
    let mut degs: Vec<usize> = ray_degrees(fan);
    degs.sort_unstable();
    (fan.rank(), fan.dim(), counts, ws, degs)
}

fn ray_degrees(fan: &Fan) -> Vec<usize> {
    let mut deg = vec![0; fan.n_rays()];
    for c in fan.all_cones() {
        for &r in c {
            deg[r] += 1;
        }
    }
    deg
}

/// Ray coordinates in a basis of the saturated lattice of their span.
fn span_coordinates(fan: &Fan) -> Vec<Vec<Int>> {
    let all = IntMatrix::from_cols(fan.rays(), fan.rank());
    let basis = linalg::saturate_lattice(&all);
    fan.rays().iter().map(|r| linalg::solve_integer(&basis, r).expect("ray in its span")).collect()
}

/// Exact isomorphism of oriented fans: a bijection of rays preserving cones and
/// weights, induced by a lattice isomorphism of the spans.
pub fn isomorphic(a: &Fan, wa: &Weight, b: &Fan, wb: &Weight) -> bool {
    if a.n_rays() != b.n_rays() || wa.dim != wb.dim || invariants(a, wa) != invariants(b, wb) {
        return false;
    }
    let n = a.n_rays();
    let ca = span_coordinates(a);
    let cb = span_coordinates(b);
    if ca.first().map(|v| v.len()) != cb.first().map(|v| v.len()) {
        return false;
    }
    let (da, db) = (ray_degrees(a), ray_degrees(b));
    // cones of a grouped by their largest ray
    let mut by_last: Vec<Vec<&Cone>> = vec![Vec::new(); n];
    for c in a.all_cones() {
        if let Some(&m) = c.last() {
            by_last[m].push(c);
        }
    }
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    search(0, a, wa, b, wb, &ca, &cb, &da, &db, &by_last, &mut perm, &mut used)
}

#[allow(clippy::too_many_arguments)]
fn search(
    i: usize,
    a: &Fan,
    wa: &Weight,
    b: &Fan,
    wb: &Weight,
    ca: &[Vec<Int>],
    cb: &[Vec<Int>],
    da: &[usize],
    db: &[usize],
    by_last: &[Vec<&Cone>],
    perm: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    let n = perm.len();
    if i == n {
        return finish(a, wa, b, wb, ca, cb, perm);
    }
    for j in 0..n {
        if used[j] || da[i] != db[j] {
            continue;
        }
        perm[i] = j;
        let ok = by_last[i].iter().all(|c| {
            let mut img: Cone = c.iter().map(|&r| perm[r]).collect();
            img.sort_unstable();
            b.contains(&img)
        });
        if ok {
            used[j] = true;
            if search(i + 1, a, wa, b, wb, ca, cb, da, db, by_last, perm, used) {
                return true;
            }
            used[j] = false;
        }
    }
    perm[i] = usize::MAX;
    false
}

fn finish(a: &Fan, wa: &Weight, b: &Fan, wb: &Weight, ca: &[Vec<Int>], cb: &[Vec<Int>], perm: &[usize]) -> bool {
    for (c, v) in a.cones(wa.dim).iter().zip(&wa.values) {
        let mut img: Cone = c.iter().map(|&r| perm[r]).collect();
        img.sort_unstable();
        if wb.get(b, &img) != *v {
            return false;
        }
    }
    let r = ca.first().map_or(0, |v| v.len());
    if r == 0 {
        return true;
    }
    // pick rays of a forming a basis of the span
    let cols = IntMatrix::from_cols(ca, r);
    let (_, pivots) = linalg::rref(&to_rat_matrix(&cols));
    let src = to_rat_matrix(&IntMatrix::from_cols(&pivots.iter().map(|&p| ca[p].clone()).collect::<Vec<_>>(), r));
    let dst = to_rat_matrix(&IntMatrix::from_cols(&pivots.iter().map(|&p| cb[perm[p]].clone()).collect::<Vec<_>>(), r));
    let Some(inv) = linalg::inverse_rat(&src) else { return false };
    let map = dst.mul(&inv);
    let Some(mi) = linalg::to_int_matrix(&map) else { return false };
    if !linalg::det_int(&mi).abs().is_one() {
        return false;
    }
    ca.iter().enumerate().all(|(i, v)| mi.mul_vec(v) == cb[perm[i]])
}

// ---------------------------------------------------------------------------
// closure

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Bound on the ambient rank (hence on the dimension).
    pub max_dim: usize,
    pub max_rays: usize,
    pub max_depth: usize,
    /// Values tried on each ray for modification functions.
    pub mod_values: Vec<i64>,
    /// Explore candidates in reverse order (for order-independence checks).
    pub reverse: bool,
}

impl Budget {
    pub fn new(max_dim: usize, max_rays: usize, max_depth: usize) -> Budget {
        Budget { max_dim, max_rays, max_depth, mod_values: vec![-1, 0], reverse: false }
    }
}

#[derive(Clone, Debug)]
pub struct Closure {
    pub fans: Vec<(Fan, Weight)>,
    /// Candidates were cut off by the budget.
    pub budget_exceeded: bool,
}

impl Closure {
    pub fn contains(&self, fan: &Fan, w: &Weight) -> bool {
        self.fans.iter().any(|(f, x)| isomorphic(f, x, fan, w))
    }

    /// Equality as sets up to isomorphism.
    pub fn same_set(&self, other: &Closure) -> bool {
        self.fans.len() == other.fans.len() && self.fans.iter().all(|(f, w)| other.contains(f, w))
    }

    pub fn filter(&self, keep: impl Fn(&Fan, &Weight) -> bool) -> Closure {
        Closure {
            fans: self.fans.iter().filter(|(f, w)| keep(f, w)).cloned().collect(),
            budget_exceeded: self.budget_exceeded,
        }
    }
}

fn in_class(fan: &Fan, w: &Weight, class: &ClassSpec) -> Result<bool> {
    if !w.has_full_support() || !is_balanced(fan, w)? || dual_graph_components(fan).len() > 1 {
        return Ok(false);
    }
    for &p in &class.predicates {
        let ok = match p {
            Predicate::All | Predicate::Simplicial => true,
            Predicate::Unimodular => fan.is_unimodular(),
            Predicate::QuasiProjective => quasi_projective_check(fan)?.holds,
            Predicate::Effective => w.is_effective(),
            Predicate::Reduced => w.is_reduced(),
            Predicate::Unitary => w.is_unitary(),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

fn divisor_in_class(fan: &Fan, divisor: &Weight, class: &ClassSpec) -> Result<bool> {
    if divisor.is_trivial() {
        return Ok(true);
    }
    let entries: Vec<(Cone, Int)> =
        fan.cones(divisor.dim).iter().cloned().zip(divisor.values.iter().cloned()).filter(|(_, v)| !v.is_zero()).collect();
    let gens: Vec<Cone> = entries.iter().map(|(c, _)| c.clone()).collect();
    let (sub, map) = subfan(fan, &gens);
    let mut sw = Weight::zero(&sub, divisor.dim);
    for (c, v) in &entries {
        let mut m: Cone = c.iter().map(|r| map[r]).collect();
        m.sort_unstable();
        sw.values[sub.cone_index(&m).expect("divisor cone")] = v.clone();
    }
    in_class(&sub, &sw, class)
}

fn within(fan: &Fan, budget: &Budget) -> bool {
    fan.rank() <= budget.max_dim && fan.n_rays() <= budget.max_rays
}

/// One-step successors of `x` (unary operations) and products with `others`.
fn successors(
    x: &(Fan, Weight),
    others: &[(Fan, Weight)],
    class: &ClassSpec,
    budget: &Budget,
) -> Result<(Vec<(Fan, Weight)>, bool)> {
    let (fan, w) = x;
    let mut out = Vec::new();
    let mut cut = false;
    let mut push = |f: Fan, wf: Weight, out: &mut Vec<(Fan, Weight)>| -> Result<()> {
        if !within(&f, budget) {
            cut = true;
        } else if in_class(&f, &wf, class)? {
            out.push((f, wf));
        }
        Ok(())
    };
    for y in others {
        let p = fan.product(&y.0);
        let pw = product_weight(fan, w, &y.0, &y.1, &p);
        push(p, pw, &mut out)?;
    }
    for c in fan.all_cones().filter(|c| c.len() >= 2) {
        let sub = fan.stellar_subdivide(c, None)?;
        let sw = subdivision_weight(fan, w, c, &sub)?;
        push(sub, sw, &mut out)?;
    }
    for r in 0..fan.n_rays() {
        if let Ok((base, sigma)) = fan.stellar_assemble(r) {
            if let Ok(bw) = assembled_weight(fan, w, r, &base, &sigma) {
                push(base, bw, &mut out)?;
            }
        }
    }
    if fan.rank() < budget.max_dim && !budget.mod_values.is_empty() {
        let k = budget.mod_values.len();
        let n = fan.n_rays();
        let total = k.checked_pow(n as u32).unwrap_or(usize::MAX);
        if total > 1 << 16 {
            cut = true;
        } else {
            for code in 0..total {
                let mut c = code;
                let vals: Vec<i64> = (0..n)
                    .map(|_| {
                        let v = budget.mod_values[c % k];
                        c /= k;
                        v
                    })
                    .collect();
                let f = ConewiseLinear::from_ints(&vals);
                let Ok(m) = tropical_modification(fan, w, &f) else { continue };
                if !divisor_in_class(fan, &m.divisor.weight, class)? {
                    continue;
                }
                push(m.fan, m.weight, &mut out)?;
            }
        }
    } else if !budget.mod_values.is_empty() {
        cut = true;
    }
    Ok((out, cut))
}

/// Breadth-first closure of `base` under products, modifications and stellar
/// subdivisions/assemblies, within the budget, deduplicated up to isomorphism.
pub fn closure_enumerate(base: &[(Fan, Weight)], class: &ClassSpec, budget: &Budget) -> Result<Closure> {
    let mut fans: Vec<(Fan, Weight)> = Vec::new();
    let mut frontier: Vec<(Fan, Weight)> = Vec::new();
    let mut exceeded = false;
    let mut seed: Vec<&(Fan, Weight)> = base.iter().collect();
    if budget.reverse {
        seed.reverse();
    }
    for x in seed {
        if !within(&x.0, budget) {
            exceeded = true;
            continue;
        }
        if in_class(&x.0, &x.1, class)? && !fans.iter().any(|(f, w)| isomorphic(f, w, &x.0, &x.1)) {
            fans.push(x.clone());
            frontier.push(x.clone());
        }
    }
    for _ in 0..budget.max_depth {
        if frontier.is_empty() {
            break;
        }
        let snapshot = fans.clone();
        let results: Vec<(Vec<(Fan, Weight)>, bool)> =
            frontier.par_iter().map(|x| successors(x, &snapshot, class, budget)).collect::<Result<_>>()?;
        let mut next = Vec::new();
        let mut cands: Vec<(Fan, Weight)> = Vec::new();
        for (c, cut) in results {
            exceeded |= cut;
            cands.extend(c);
        }
        if budget.reverse {
            cands.reverse();
        }
        for c in cands {
            if !fans.iter().any(|(f, w)| isomorphic(f, w, &c.0, &c.1)) {
                fans.push(c.clone());
                next.push(c);
            }
        }
        frontier = next;
    }
    if !frontier.is_empty() {
        exceeded = true;
    }
    Ok(Closure { fans, budget_exceeded: exceeded })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lambda2() -> OpTree {
        OpTree::product(OpTree::Line, OpTree::Line)
    }

    #[test]
    fn product_of_lines_is_lambda2() {
        let b = build(&lambda2(), &ClassSpec::of(&[Predicate::Unimodular])).unwrap();
        assert!(b.fan.same_as(&Fan::line_power(2)));
        assert!(b.weight.is_reduced());
        assert!(b.certificate.is_some());
        assert!(b.log.iter().all(|e| e.ok));
    }

    #[test]
    fn modification_of_lambda2_logs_cross_divisor() {
        // rays e1, -e1, e2, -e2 ; f = min(0, x, y, x + y)
        let f = ConewiseLinear::from_ints(&[0, -1, 0, -1]);
        let b = build(&OpTree::tropmod(lambda2(), f), &ClassSpec::all()).unwrap();
        assert_eq!(b.fan.n_rays(), 5);
        assert_eq!(b.fan.cones(2).len(), 8);
        let div = b.log.iter().find(|e| e.check == "divisor").unwrap();
        assert_eq!(div.detail, "[0]:1 [1]:1 [2]:1 [3]:1");
    }

    #[test]
    fn blowup_then_blowdown_round_trip() {
        let t = OpTree::blowdown(OpTree::blowup(lambda2(), &[0, 2]), 4);
        let b = build(&t, &ClassSpec::of(&[Predicate::Unimodular, Predicate::QuasiProjective])).unwrap();
        assert!(b.fan.same_as(&Fan::line_power(2)));
        assert!(b.weight.is_reduced());
        let a = b.log.iter().find(|e| e.check == "assemble").unwrap();
        assert!(a.detail.contains("structural"));
    }

    #[test]
    fn class_violation_reported() {
        let t = OpTree::product(OpTree::Point(-1), OpTree::Line);
        let e = build(&t, &ClassSpec::of(&[Predicate::Effective])).unwrap_err();
        assert!(matches!(e, Error::ClassViolation { .. }));
        let e = build(&OpTree::tropmod(OpTree::Line, ConewiseLinear::from_ints(&[0])), &ClassSpec::all()).unwrap_err();
        assert!(matches!(e, Error::InvalidFunction(_)));
    }

    #[test]
    fn lambda3_quasilinear() {
        let class = ClassSpec::of(&[Predicate::Unimodular, Predicate::Effective, Predicate::QuasiProjective]);
        let rep = quasilinear_witness_check(&OpTree::line_power(3), &class).unwrap();
        assert!(rep.pass());
        assert!(rep.properties.iter().all(|p| p.applicable && p.holds));
    }

    #[test]
    fn isomorphism_detects_relabeling() {
        let a = Fan::from_i64(2, &[&[1, 0], &[0, 1], &[-1, -1]], &[&[0, 1], &[1, 2], &[0, 2]]).unwrap();
        let b = Fan::from_i64(2, &[&[-1, 0], &[0, -1], &[1, 1]], &[&[0, 1], &[1, 2], &[0, 2]]).unwrap();
        let l2 = Fan::line_power(2);
        let (wa, wb, wl) = (Weight::reduced(&a), Weight::reduced(&b), Weight::reduced(&l2));
        assert!(isomorphic(&a, &wa, &b, &wb));
        assert!(!isomorphic(&a, &wa, &l2, &wl));
        assert!(!isomorphic(&a, &wa, &b, &wb.neg()));
        // same combinatorics, index-2 sublattice
        let c = Fan::from_i64(2, &[&[1, 0], &[1, 2], &[-2, -2]], &[&[0, 1], &[1, 2], &[0, 2]]);
        if let Ok(c) = c {
            let wc = Weight::reduced(&c);
            assert!(!isomorphic(&a, &wa, &c, &wc));
        }
    }

    #[test]
    fn closure_of_points_is_points() {
        let p = Fan::point();
        let base = vec![(p.clone(), Weight::constant(&p, 0, 1))];
        let cl = closure_enumerate(&base, &ClassSpec::all(), &Budget::new(0, 4, 3)).unwrap();
        assert_eq!(cl.fans.len(), 1);
        assert!(cl.fans.iter().all(|(f, _)| f.rank() == 0));
    }

    #[test]
    fn closure_of_line_in_dimension_two() {
        let l = Fan::line();
        let base = vec![(l.clone(), Weight::reduced(&l))];
        let mut budget = Budget::new(2, 6, 2);
        budget.mod_values = Vec::new();
        let cl = closure_enumerate(&base, &ClassSpec::of(&[Predicate::Unimodular]), &budget).unwrap();
        let l2 = Fan::line_power(2);
        assert!(cl.contains(&l, &Weight::reduced(&l)));
        assert!(cl.contains(&l2, &Weight::reduced(&l2)));
        for c in l2.cones(2) {
            let s = l2.stellar_subdivide(c, None).unwrap();
            assert!(cl.contains(&s, &Weight::reduced(&s)));
        }
        let mut rev = budget.clone();
        rev.reverse = true;
        let cl2 = closure_enumerate(&base, &ClassSpec::of(&[Predicate::Unimodular]), &rev).unwrap();
        assert!(cl.same_set(&cl2));
    }

    #[test]
    fn rational_weights_helper() {
        assert_eq!(halvings(rat(1, 2), 3), vec![rat(1, 2), rat(1, 4), rat(1, 8)]);
    }
}
