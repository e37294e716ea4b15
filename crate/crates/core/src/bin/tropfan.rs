use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use tropfan::balancing::{
    balancing_witness, irreducible_components, mw_group, normality_report, product_weight, Weight,
};
use tropfan::chow::{divclass_report, pd_check, subdivision_weight, ChowRing, Coefficients};
use tropfan::io;
use tropfan::kahler::{chow_kahler_check, hr_check, HrReport};
use tropfan::matroid::{augmented_bergman_fan, bergman_fan, set_label, Matroid};
use tropfan::piecewise::{divisor_of, tropical_modification};
use tropfan::pipeline::{
    assembled_weight, build, closure_enumerate, quasilinear_properties, Budget, ClassSpec,
};
use tropfan::{Error, Fan};

#[derive(Parser)]
#[command(name = "tropfan", version, about = "Exact computations with simplicial tropical fans")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Ring {
    Z,
    Q,
}

#[derive(Subcommand)]
enum Command {
    /// Structural flags; all of them when none is selected.
    Check(CheckArgs),
    /// Chow ring ranks, torsion and pairings.
    Chow {
        fan: PathBuf,
        #[arg(long, value_enum, default_value_t = Ring::Z)]
        coefficients: Ring,
    },
    /// Minkowski weights of dimension p.
    Mw {
        fan: PathBuf,
        #[arg(short = 'p', long = "dim")]
        p: usize,
    },
    /// Divisor of a conewise linear function.
    Div { fan: PathBuf, function: PathBuf },
    /// Tropical modification along a function.
    Tropmod {
        fan: PathBuf,
        function: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Stellar subdivision at a cone.
    Blowup {
        fan: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        cone: Vec<usize>,
        /// New ray (defaults to the sum of the cone's rays).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        ray: Option<Vec<i64>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Inverse of a stellar subdivision.
    Blowdown {
        fan: PathBuf,
        #[arg(long)]
        ray: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Star fan of a cone.
    Star {
        fan: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        cone: Vec<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Product of two fans.
    Product {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Bergman fan of a matroid.
    Bergman {
        #[arg(long, conflicts_with = "bases", required_unless_present = "bases")]
        uniform: Option<String>,
        #[arg(long)]
        bases: Option<PathBuf>,
        #[arg(long)]
        augmented: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Hodge-Riemann and Hard Lefschetz for ℓ(f).
    Kahler {
        fan: PathBuf,
        #[arg(long)]
        ell: PathBuf,
        /// Check every star fan with the induced function.
        #[arg(long)]
        all_stars: bool,
    },
    /// Evaluate an operation tree.
    Build {
        script: PathBuf,
        #[arg(long, default_value = "all")]
        class: String,
        #[arg(long)]
        quasilinear: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Enumerate the closure of base fans under the three operations.
    Closure {
        #[arg(long, required = true, num_args = 1..)]
        base: Vec<PathBuf>,
        #[arg(long, default_value = "all")]
        class: String,
        #[arg(long)]
        max_dim: usize,
        #[arg(long, default_value_t = 6)]
        max_rays: usize,
        #[arg(long, default_value_t = 2)]
        max_depth: usize,
        /// Ray values tried for modification functions.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        mod_values: Option<Vec<i64>>,
    },
}

#[derive(Args)]
struct CheckArgs {
    fan: PathBuf,
    #[arg(long)]
    balanced: bool,
    #[arg(long)]
    normal: bool,
    #[arg(long)]
    irreducible: bool,
    #[arg(long)]
    divfaithful: bool,
    #[arg(long)]
    principal: bool,
    #[arg(long)]
    saturated: bool,
    /// Poincaré duality over Z.
    #[arg(long)]
    pd: bool,
    /// Poincaré duality over Q.
    #[arg(long)]
    pdq: bool,
}

struct Report {
    command: &'static str,
    inputs: Vec<PathBuf>,
    results: Map<String, Value>,
    holds: bool,
}

impl Report {
    fn new(command: &'static str) -> Report {
        Report { command, inputs: Vec::new(), results: Map::new(), holds: true }
    }

    fn set(&mut self, key: &str, v: Value) {
        self.results.insert(key.into(), v);
    }

    fn input(&mut self, p: &Path) -> tropfan::Result<Value> {
        self.inputs.push(p.to_path_buf());
        io::read_json(p)
    }

    fn fan(&mut self, p: &Path) -> tropfan::Result<(Fan, Weight)> {
        let (f, w) = io::fan_from_json(&self.input(p)?)?;
        let w = io::weight_or_reduced(&f, w);
        Ok((f, w))
    }

    fn exit(&self) -> u8 {
        if self.holds {
            0
        } else {
            1
        }
    }

    fn to_json(&self) -> tropfan::Result<Value> {
        let mut all = Sha256::new();
        let mut files = Vec::new();
        for p in &self.inputs {
            let bytes = std::fs::read(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            let h = Sha256::digest(&bytes);
            all.update(h);
            files.push(json!({ "path": p.display().to_string(), "sha256": format!("{h:x}") }));
        }
        Ok(json!({
            "command": self.command,
            "inputs": { "digest": format!("{:x}", all.finalize()), "files": files },
            "results": Value::Object(self.results.clone()),
            "status": if self.holds { "ok" } else { "fails" },
            "exit": self.exit(),
        }))
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        _ => out.push(format!("{prefix}: {v}")),
    }
}

fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => io::canonical(v),
        Format::Text => {
            let mut lines = Vec::new();
            flatten("", v, &mut lines);
            lines.join("\n") + "\n"
        }
    }
}

fn flag(r: &mut Report, name: &str, holds: bool, witness: Option<Value>) {
    let mut m = Map::new();
    m.insert("holds".into(), json!(holds));
    if let Some(w) = witness {
        m.insert("witness".into(), w);
    }
    r.set(name, Value::Object(m));
    r.holds &= holds;
}

fn emit(r: &mut Report, fan: &Fan, w: &Weight, output: &Option<PathBuf>) -> tropfan::Result<()> {
    let v = io::fan_to_json(fan, Some(w));
    match output {
        Some(p) => {
            io::write_json(p, &v)?;
            r.set("output", json!(p.display().to_string()));
        }
        None => r.set("fan", v),
    }
    r.set("summary", summary(fan, w));
    Ok(())
}

fn summary(fan: &Fan, w: &Weight) -> Value {
    json!({
        "rank": fan.rank(),
        "dim": fan.dim(),
        "rays": fan.n_rays(),
        "facets": fan.cones(fan.dim()).len(),
        "unimodular": fan.is_unimodular(),
        "balanced": tropfan::balancing::is_balanced(fan, w).unwrap_or(false),
    })
}

fn hr_json(h: &HrReport) -> Value {
    let degrees: Vec<Value> = h
        .degrees
        .iter()
        .map(|d| {
            json!({
                "k": d.k,
                "hl": d.hl,
                "signature": [d.signature.plus, d.signature.minus, d.signature.zero],
                "value": d.signature.value(),
                "expected": d.expected,
                "primitive_dim": d.primitive_dim,
                "primitive_definite": d.primitive_definite,
                "pass": d.pass,
            })
        })
        .collect();
    json!({ "degrees": degrees, "hl": h.hl, "pass": h.pass })
}

fn coefficients(c: Ring) -> Coefficients {
    match c {
        Ring::Z => Coefficients::Z,
        Ring::Q => Coefficients::Q,
    }
}

fn check(a: &CheckArgs, r: &mut Report) -> tropfan::Result<()> {
    let (fan, w) = r.fan(&a.fan)?;
    let any = a.balanced || a.normal || a.irreducible || a.divfaithful || a.principal || a.saturated || a.pd || a.pdq;
    r.set("summary", summary(&fan, &w));
    if a.balanced || !any {
        let wit = balancing_witness(&fan, &w)?;
        flag(r, "balanced", wit.is_none(), wit.map(|c| io::cone_to_json(&c)));
    }
    if a.normal || !any {
        let n = normality_report(&fan, &w)?;
        flag(r, "normal", n.normal, n.witness.as_ref().map(|c| io::cone_to_json(c)));
        r.set("q_normal", json!(n.q_normal));
        r.set("locally_irreducible", json!(n.locally_irreducible));
        r.set("q_locally_irreducible", json!(n.q_locally_irreducible));
    }
    if a.irreducible || !any {
        let comps = irreducible_components(&fan, &w)?;
        let irreducible = mw_group(&fan, fan.dim())?.rank == 1;
        flag(r, "irreducible", irreducible, None);
        r.set(
            "components",
            json!({
                "count": comps.parts.len(),
                "advisory": comps.advisory,
                "facets": comps.parts.iter().map(|p| io::cones_to_json(&p.facets)).collect::<Vec<_>>(),
            }),
        );
    }
    if a.divfaithful || a.principal || !any {
        let d = divclass_report(&fan, &w)?;
        r.set(
            "at_origin",
            json!({
                "principal": d.at_origin.principal,
                "q_principal": d.at_origin.q_principal,
                "div_faithful": d.at_origin.div_faithful,
                "cl_injective": d.at_origin.cl_injective,
                "cokernel": io::ints_to_json(&d.at_origin.cokernel),
            }),
        );
        // first cone where local principality, div-faithfulness or saturation fails
        r.set("ploc_witness", d.witness.as_ref().map_or(Value::Null, |c| io::cone_to_json(c)));
        if a.divfaithful || !any {
            flag(r, "ploc_div_faithful", d.ploc_div_faithful, None);
        }
        if a.principal || !any {
            flag(r, "ploc_principal", d.ploc_principal, None);
            r.set("ploc_q_principal", json!(d.ploc_q_principal));
        }
    }
    if a.saturated || !any {
        flag(r, "saturated", fan.is_saturated(), None);
    }
    for (sel, name, mode) in [(a.pd, "pd", Coefficients::Z), (a.pdq, "pdq", Coefficients::Q)] {
        if sel || !any {
            let p = pd_check(&ChowRing::with_weight(&fan, &w, mode)?)?;
            flag(r, name, p.holds, None);
        }
    }
    Ok(())
}

fn chow(fan_path: &Path, c: Ring, r: &mut Report) -> tropfan::Result<()> {
    let (fan, w) = r.fan(fan_path)?;
    let ring = ChowRing::with_weight(&fan, &w, coefficients(c))?;
    let pd = pd_check(&ring)?;
    let degrees: Vec<Value> = ring
        .pieces
        .iter()
        .map(|p| json!({ "degree": p.degree, "rank": p.free_rank, "torsion": io::ints_to_json(&p.torsion) }))
        .collect();
    let pairings: Vec<Value> = pd
        .per_degree
        .iter()
        .map(|p| {
            json!({
                "degree": p.degree,
                "size": [p.rows, p.cols],
                "rank": p.rank,
                "determinant": p.determinant.as_ref().map(io::rat_to_json),
            })
        })
        .collect();
    r.set("coefficients", json!(if c == Ring::Z { "Z" } else { "Q" }));
    r.set("ranks", json!(ring.ranks()));
    r.set("torsion_free", json!(ring.torsion_free()));
    r.set("degrees", Value::Array(degrees));
    r.set("pairings", Value::Array(pairings));
    r.set("pd", json!(pd.holds));
    r.set("advisory", json!(ring.advisory));
    Ok(())
}

fn kahler(fan_path: &Path, ell: &Path, all_stars: bool, r: &mut Report) -> tropfan::Result<()> {
    let (fan, w) = r.fan(fan_path)?;
    let f = io::function_from_json(&r.input(ell)?)?;
    f.check(&fan)?;
    let ring = ChowRing::with_weight(&fan, &w, Coefficients::Q)?;
    let ample = tropfan::kahler::ample_check(&fan, &f)?;
    r.set("ample", json!(ample));
    match hr_check(&ring, &ring.ell(&f)?) {
        Ok(h) => {
            r.set("hr", hr_json(&h));
            r.holds &= h.pass;
        }
        Err(Error::PDFails) => {
            r.set("hr", json!({ "pass": false, "pd_q": false }));
            r.holds = false;
        }
        Err(e) => return Err(e),
    }
    if all_stars {
        let k = chow_kahler_check(&fan, &w, Some(&f), &BTreeMap::new())?;
        let stars: Vec<Value> = k
            .stars
            .iter()
            .map(|s| {
                json!({
                    "cone": io::cone_to_json(&s.cone),
                    "pd_q": s.pd_q,
                    "ample": s.ample,
                    "hr": s.hr.as_ref().map(hr_json),
                    "pass": s.pass,
                })
            })
            .collect();
        r.set("quasi_projective", json!(k.quasi_projective));
        r.set("stars", Value::Array(stars));
        r.holds &= k.pass;
    }
    Ok(())
}

fn bergman(uniform: &Option<String>, bases: &Option<PathBuf>, augmented: bool, output: &Option<PathBuf>, r: &mut Report) -> tropfan::Result<()> {
    let m: Matroid = match (uniform, bases) {
        (Some(s), _) => io::uniform_from_str(s)?,
        (None, Some(p)) => io::matroid_from_json(&r.input(p)?)?,
        (None, None) => return Err(Error::Parse("give --uniform or --bases".into())),
    };
    r.set("matroid", io::matroid_to_json(&m));
    let (fan, w, labels): (Fan, Weight, Vec<String>) = if augmented {
        let b = augmented_bergman_fan(&m)?;
        let mut labels: Vec<String> = (0..m.ground()).map(|i| format!("e{i}")).collect();
        labels.extend(b.flats.iter().map(|&f| format!("F[{}]", set_label(f))));
        (b.fan, b.weight, labels)
    } else {
        let b = bergman_fan(&m)?;
        let labels = b.flats.iter().map(|&f| format!("F[{}]", set_label(f))).collect();
        (b.fan, b.weight, labels)
    };
    r.set("ray_labels", json!(labels));
    emit(r, &fan, &w, output)
}

fn run(cli: &Cli) -> tropfan::Result<Report> {
    let mut r;
    match &cli.command {
        Command::Check(a) => {
            r = Report::new("check");
            check(a, &mut r)?;
        }
        Command::Chow { fan, coefficients } => {
            r = Report::new("chow");
            chow(fan, *coefficients, &mut r)?;
        }
        Command::Mw { fan, p } => {
            r = Report::new("mw");
            let (f, _) = r.fan(fan)?;
            let g = mw_group(&f, *p)?;
            r.set("p", json!(p));
            r.set("rank", json!(g.rank));
            r.set("cones", io::cones_to_json(f.cones(*p.min(&f.dim()))));
            r.set("basis", Value::Array(g.basis.iter().map(|b| io::ints_to_json(b)).collect()));
        }
        Command::Div { fan, function } => {
            r = Report::new("div");
            let (f, w) = r.fan(fan)?;
            let g = io::function_from_json(&r.input(function)?)?;
            let d = divisor_of(&f, &w, &g)?;
            r.set("divisor", io::weight_to_json(&f, &d.weight));
            r.set("holomorphic", json!(d.holomorphic));
            r.set("trivial", json!(d.is_trivial()));
        }
        Command::Tropmod { fan, function, output } => {
            r = Report::new("tropmod");
            let (f, w) = r.fan(fan)?;
            let g = io::function_from_json(&r.input(function)?)?;
            let m = tropical_modification(&f, &w, &g)?;
            r.set("divisor", io::weight_to_json(&f, &m.divisor.weight));
            r.set("up_ray", json!(m.up));
            r.set("degenerate", json!(m.degenerate));
            emit(&mut r, &m.fan, &m.weight, output)?;
        }
        Command::Blowup { fan, cone, ray, output } => {
            r = Report::new("blowup");
            let (f, w) = r.fan(fan)?;
            let ray: Option<Vec<tropfan::linalg::Int>> = ray.as_ref().map(|v| v.iter().map(|&x| x.into()).collect());
            let sub = f.stellar_subdivide(cone, ray.as_deref())?;
            let sw = subdivision_weight(&f, &w, cone, &sub)?;
            r.set("new_ray", json!(sub.n_rays() - 1));
            emit(&mut r, &sub, &sw, output)?;
        }
        Command::Blowdown { fan, ray, output } => {
            r = Report::new("blowdown");
            let (f, w) = r.fan(fan)?;
            let (base, sigma) = f.stellar_assemble(*ray)?;
            let bw = assembled_weight(&f, &w, *ray, &base, &sigma)?;
            r.set("cone", io::cone_to_json(&sigma));
            emit(&mut r, &base, &bw, output)?;
        }
        Command::Star { fan, cone, output } => {
            r = Report::new("star");
            let (f, w) = r.fan(fan)?;
            let (st, sw) = tropfan::balancing::induced_star_weight(&f, &w, cone)?;
            r.set("cone", io::cone_to_json(&st.base));
            r.set("ray_origin", json!(st.ray_origin));
            emit(&mut r, &st.fan, &sw, output)?;
        }
        Command::Product { a, b, output } => {
            r = Report::new("product");
            let (fa, wa) = r.fan(a)?;
            let (fb, wb) = r.fan(b)?;
            let p = fa.product(&fb);
            let pw = product_weight(&fa, &wa, &fb, &wb, &p);
            emit(&mut r, &p, &pw, output)?;
        }
        Command::Bergman { uniform, bases, augmented, output } => {
            r = Report::new("bergman");
            bergman(uniform, bases, *augmented, output, &mut r)?;
        }
        Command::Kahler { fan, ell, all_stars } => {
            r = Report::new("kahler");
            kahler(fan, ell, *all_stars, &mut r)?;
        }
        Command::Build { script, class, quasilinear, output } => {
            r = Report::new("build");
            let tree = io::optree_from_json(&r.input(script)?)?;
            let class = ClassSpec::parse(class)?;
            r.set("class", json!(class.name()));
            let built = match build(&tree, &class) {
                Ok(b) => b,
                Err(Error::ClassViolation { node, reason }) => {
                    r.set("violation", json!({ "node": node, "reason": reason }));
                    r.holds = false;
                    return Ok(r);
                }
                Err(e) => return Err(e),
            };
            let log: Vec<Value> = built
                .log
                .iter()
                .map(|e| json!({ "node": e.node, "op": e.op, "check": e.check, "ok": e.ok, "detail": e.detail }))
                .collect();
            r.set("log", Value::Array(log));
            r.set("certificate", built.certificate.as_ref().map_or(Value::Null, io::function_to_json));
            emit(&mut r, &built.fan, &built.weight, output)?;
            if *quasilinear {
                let q = quasilinear_properties(built)?;
                let props: Vec<Value> = q
                    .properties
                    .iter()
                    .map(|p| {
                        json!({
                            "name": p.name,
                            "applicable": p.applicable,
                            "holds": p.holds,
                            "witness": p.witness.as_ref().map(|c| io::cone_to_json(c)),
                        })
                    })
                    .collect();
                r.set("quasilinear", Value::Array(props));
                r.holds &= q.pass();
            }
        }
        Command::Closure { base, class, max_dim, max_rays, max_depth, mod_values } => {
            r = Report::new("closure");
            let mut bases = Vec::new();
            for p in base {
                bases.push(r.fan(p)?);
            }
            let class = ClassSpec::parse(class)?;
            let mut budget = Budget::new(*max_dim, *max_rays, *max_depth);
            if let Some(v) = mod_values {
                budget.mod_values = v.clone();
            }
            let c = closure_enumerate(&bases, &class, &budget)?;
            r.set("class", json!(class.name()));
            r.set("count", json!(c.fans.len()));
            r.set("budget_exceeded", json!(c.budget_exceeded));
            r.set("fans", Value::Array(c.fans.iter().map(|(f, w)| io::fan_to_json(f, Some(w))).collect()));
        }
    }
    Ok(r)
}

fn threads() {
    if let Some(n) = std::env::var("TROPFAN_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if n >= 1 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    threads();
    let report = run(&cli).and_then(|r| Ok((r.exit(), r.to_json()?)));
    match report {
        Ok((code, v)) => {
            print!("{}", render(&v, cli.format));
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("tropfan: {e}");
            ExitCode::from(2)
        }
    }
}

