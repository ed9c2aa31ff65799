//! Command-line front end: associator forging, group and module
//! quantization, artifact verification and diagrams.
//!
//! Exit codes: 0 success, 1 I/O or parse error, 2 solver failure,
//! 3 verification failure.

use crate::associator::{check_all, solve_associator_with, Associator, TieBreak};
use crate::chords::{ChordSeries, ChordSeriesJson};
use crate::hopf::{self, gamma_h, Check, HopfData, HopfError};
use crate::liealg::{double, LieBialgebra, ManinTriple, SideConvention};
use crate::moduli::{fmap_json, jet_terms, render_graph, CiliatedGraph, FMap, ModuliError};
use crate::ordcat::{render, FinSet, OrderedMorphism};
use crate::spaces::GSpace;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "quilt", version, about = "Exact quantization of Poisson-Lie groups and their moduli algebras")]
pub struct Cli {
    /// Size of the worker pool (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve for a rational associator and write it with its residual report.
    ForgeAssociator {
        #[arg(long)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = Tie::Zero)]
        tie_break: Tie,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quantize the formal group of a Lie bialgebra and run the Hopf checks.
    QuantizeGroup(QuantArgs),
    /// Quantize a space with an action of the double and check the coaction.
    QuantizeModule {
        #[command(flatten)]
        args: QuantArgs,
        /// Module description: `space = "group"` or `space = "point"`.
        #[arg(long)]
        module: PathBuf,
    },
    /// Recompute an artifact from its embedded inputs and compare.
    Verify { artifact: PathBuf },
    /// Draw an ordered morphism or a ciliated graph.
    Render {
        input: Option<PathBuf>,
        /// Draw the one-vertex graph with cilia 0..=N instead.
        #[arg(long)]
        gamma_h: Option<usize>,
    },
}

#[derive(clap::Args, Debug, Clone)]
pub struct QuantArgs {
    /// Bialgebra TOML file.
    pub bialgebra: PathBuf,
    #[arg(long = "hbar-degree", default_value_t = 2)]
    pub hbar: usize,
    #[arg(long = "jet-order", default_value_t = 3)]
    pub order: usize,
    /// Associator artifact; solved (and cached) when absent.
    #[arg(long)]
    pub phi: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dump_operators: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Tie {
    Zero,
    One,
}

impl From<Tie> for TieBreak {
    fn from(t: Tie) -> Self {
        match t {
            Tie::Zero => TieBreak::Zero,
            Tie::One => TieBreak::One,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Solver(String),
    /// The artifact is still written; the message lists the failed checks.
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Solver(m) | CliError::Verification(m) => m,
        }
    }
}

impl From<HopfError> for CliError {
    fn from(e: HopfError) -> Self {
        match e {
            HopfError::Moduli(ModuliError::Invalid(d)) => CliError::Input(format!("invalid surface: {}", d.join("; "))),
            e => CliError::Solver(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Pretty JSON with a trailing newline; maps are ordered, so equal values
/// give equal bytes.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn tie_name(t: TieBreak) -> &'static str {
    match t {
        TieBreak::Zero => "zero",
        TieBreak::One => "one",
    }
}

fn status(checks: &[Check]) -> Value {
    let list: Vec<Value> = checks
        .iter()
        .map(|c| match &c.witness {
            None => json!({ "name": c.name, "residual": "zero" }),
            Some(w) => json!({ "name": c.name, "residual": "nonzero", "witness": w }),
        })
        .collect();
    json!({ "ok": checks.iter().all(|c| c.ok()), "checks": list })
}

fn residual_checks(phi: &ChordSeries) -> Vec<Check> {
    let names = ["pentagon", "hexagon (first)", "hexagon (second)", "unit 1", "unit 2", "unit 3"];
    let mut out: Vec<Check> = names
        .iter()
        .zip(check_all(phi))
        .map(|(n, r)| Check {
            name: n.to_string(),
            witness: r.terms().iter().next().map(|(w, c)| format!("{} · {}", crate::rational::fmt_q(c), r.word_name(w))),
        })
        .collect();
    out.push(Check {
        name: "group-like".into(),
        witness: (!phi.is_group_like()).then(|| "Δ(Φ) ≠ Φ ⊗ Φ".into()),
    });
    out
}

pub fn associator_artifact(a: &Associator) -> Value {
    json!({
        "kind": "associator",
        "version": env!("CARGO_PKG_VERSION"),
        "degree": a.degree,
        "tie_break": tie_name(a.tie_break),
        "sha256": a.id(),
        "series": a.phi.to_json(),
        "report": status(&residual_checks(&a.phi)),
    })
}

fn associator_from_value(v: &Value) -> Result<Associator> {
    let bad = |m: &str| CliError::Input(format!("associator artifact: {m}"));
    if v["kind"] != "associator" {
        return Err(bad("kind is not \"associator\""));
    }
    let series: ChordSeriesJson = serde_json::from_value(v["series"].clone()).map_err(|e| bad(&e.to_string()))?;
    let phi = ChordSeries::from_json(&series).map_err(|e| bad(&e.to_string()))?;
    let tie = match v["tie_break"].as_str() {
        Some("one") => TieBreak::One,
        _ => TieBreak::Zero,
    };
    Ok(Associator::new(phi, tie))
}

fn forge(degree: usize, tie: TieBreak) -> Result<Associator> {
    solve_associator_with(degree, tie).map_err(|e| CliError::Solver(e.to_string()))
}

/// Solve, or reuse a cached solution under `QUILT_CACHE_DIR`.
pub fn cached_associator(degree: usize, tie: TieBreak) -> Result<Associator> {
    let Some(dir) = std::env::var_os("QUILT_CACHE_DIR") else { return forge(degree, tie) };
    let path = PathBuf::from(dir).join(format!("associator-{degree}-{}.json", tie_name(tie)));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(v) = serde_json::from_str::<Value>(&text) {
            if let Ok(a) = associator_from_value(&v) {
                // A stale or edited cache entry is recomputed.
                if v["sha256"] == a.id() && a.degree == degree && a.tie_break == tie {
                    return Ok(a);
                }
            }
        }
    }
    let a = forge(degree, tie)?;
    let _ = std::fs::create_dir_all(path.parent().expect("joined path"));
    let _ = std::fs::write(&path, to_text(&associator_artifact(&a)));
    Ok(a)
}

fn parse_bialgebra(text: &str, path: &str) -> Result<(LieBialgebra, ManinTriple)> {
    let b = LieBialgebra::from_toml(text).map_err(|e| CliError::Input(format!("{path}:{e}")))?;
    let mt = double(&b).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    Ok((b, mt))
}

#[derive(Deserialize)]
struct ModuleFile {
    space: String,
}

fn parse_module(text: &str, mt: &ManinTriple, order: usize) -> Result<GSpace> {
    let m: ModuleFile = toml::from_str(text).map_err(|e| CliError::Input(format!("module: {e}")))?;
    match m.space.as_str() {
        "group" => Ok(GSpace::group(mt, order)),
        "point" => Ok(GSpace::point(mt.dim())),
        other => Err(CliError::Input(format!("module: unknown space `{other}` (expected \"group\" or \"point\")"))),
    }
}

/// Parameters that determine a quantization artifact.
struct QuantInputs {
    bialgebra: String,
    module: Option<String>,
    hbar: usize,
    order: usize,
    assoc: Associator,
    dump_operators: bool,
}

fn check_config(hbar: usize, order: usize, assoc: &Associator) -> Result<()> {
    if hbar > assoc.degree {
        return Err(CliError::Input(format!("ℏ-degree {hbar} exceeds the associator degree {}", assoc.degree)));
    }
    if order < hbar + 1 {
        return Err(CliError::Input(format!("jet order {order} must be at least ℏ-degree + 1 = {}", hbar + 1)));
    }
    Ok(())
}

/// Δ₀ = swap ∘ Δ₀.
fn cocommutative_at_zero(delta: &FMap, n: usize) -> bool {
    let m = &delta.mats[0];
    let swap = |r: usize| (r % n) * n + r / n;
    (0..m.rows).all(|r| m.data[r] == m.data[swap(r)])
}

fn operators(mt: &ManinTriple, h: &HopfData, order: usize) -> Value {
    let fields: Vec<Value> = GSpace::group(mt, order)
        .fields
        .iter()
        .zip(&mt.g.basis)
        .map(|(d, name)| json!({ "element": name, "coefficients": d.coeffs.iter().map(jet_terms).collect::<Vec<_>>() }))
        .collect();
    json!({ "action_fields": fields, "splitting": fmap_json(&h.p2) })
}

fn quantization_artifact(q: &QuantInputs) -> Result<(Value, bool)> {
    let (_, mt) = parse_bialgebra(&q.bialgebra, "bialgebra")?;
    check_config(q.hbar, q.order, &q.assoc)?;
    let h = hopf::quantize_group(&mt, &q.assoc, q.hbar, q.order)?;
    let mut checks = hopf::verify_hopf(&mt, &h, &q.assoc)?;
    let side = SideConvention::SELECTED;
    let mut v = json!({
        "kind": if q.module.is_some() { "module" } else { "group" },
        "version": env!("CARGO_PKG_VERSION"),
        "hbar_degree": q.hbar,
        "jet_order": q.order,
        "side_convention": { "right_multiply": side.right_multiply, "dual_first": side.dual_first },
        "inputs": { "bialgebra": q.bialgebra, "module": q.module },
        "associator": associator_artifact(&q.assoc),
        "algebra": h.a.to_json(),
        "coproduct": fmap_json(&h.delta),
        "counit": fmap_json(&h.eps),
        "antipode": fmap_json(&h.s),
        "flags": { "cocommutative_at_hbar0": cocommutative_at_zero(&h.delta, h.a.dim()) },
    });
    if let Some(text) = &q.module {
        let m = parse_module(text, &mt, q.order)?;
        let c = hopf::coaction(&mt, &m, &q.assoc, q.hbar, q.order)?;
        checks.extend(hopf::verify_coaction(&h, &c));
        v["module_algebra"] = c.b.to_json();
        v["coaction"] = fmap_json(&c.rho);
    }
    if q.dump_operators {
        v["operators"] = operators(&mt, &h, q.order);
    }
    let ok = checks.iter().all(|c| c.ok());
    v["report"] = status(&checks);
    v["provenance"] = json!({
        "bialgebra_sha256": sha256_hex(q.bialgebra.as_bytes()),
        "module_sha256": q.module.as_ref().map(|m| sha256_hex(m.as_bytes())),
        "associator_sha256": q.assoc.id(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    Ok((v, ok))
}

/// The artifact `quantize-group` (or `quantize-module` when `module` is
/// given) writes, and whether every check passed.
pub fn quantize_artifact(
    bialgebra: &str,
    module: Option<&str>,
    hbar: usize,
    order: usize,
    assoc: &Associator,
) -> Result<(Value, bool)> {
    let q = QuantInputs {
        bialgebra: bialgebra.to_string(),
        module: module.map(String::from),
        hbar,
        order,
        assoc: assoc.clone(),
        dump_operators: false,
    };
    quantization_artifact(&q)
}

fn failed_names(v: &Value) -> String {
    v["report"]["checks"]
        .as_array()
        .map(|cs| {
            cs.iter()
                .filter(|c| c["residual"] != "zero")
                .map(|c| format!("{}: {}", c["name"].as_str().unwrap_or("?"), c["witness"].as_str().unwrap_or("")))
                .collect::<Vec<_>>()
                .join("; ")
        })
        .unwrap_or_default()
}

fn summary(v: &Value) {
    if let Some(cs) = v["report"]["checks"].as_array() {
        for c in cs {
            eprintln!("  {:<44} {}", c["name"].as_str().unwrap_or("?"), c["residual"].as_str().unwrap_or("?"));
        }
    }
}

fn quantize_cmd(args: &QuantArgs, module: Option<&Path>) -> Result<()> {
    let bialgebra = read(&args.bialgebra)?;
    // Parse errors take precedence over solver work.
    parse_bialgebra(&bialgebra, &args.bialgebra.display().to_string())?;
    let module = module.map(read).transpose()?;
    let assoc = match &args.phi {
        Some(p) => {
            let v: Value = serde_json::from_str(&read(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            associator_from_value(&v)?
        }
        None => cached_associator(args.hbar, TieBreak::Zero)?,
    };
    let q = QuantInputs { bialgebra, module, hbar: args.hbar, order: args.order, assoc, dump_operators: args.dump_operators };
    let (v, ok) = quantization_artifact(&q)?;
    summary(&v);
    write_out(args.out.as_deref(), &to_text(&v))?;
    if ok {
        Ok(())
    } else {
        Err(CliError::Verification(failed_names(&v)))
    }
}

fn verify_cmd(path: &Path) -> Result<()> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let fresh = match v["kind"].as_str() {
        Some("associator") => {
            let a = associator_from_value(&v)?;
            associator_artifact(&a)
        }
        Some("group") | Some("module") => {
            let field = |k: &str| v["inputs"][k].as_str().map(String::from);
            let bialgebra = field("bialgebra").ok_or_else(|| CliError::Input("artifact has no bialgebra input".into()))?;
            let num = |k: &str| v[k].as_u64().map(|x| x as usize).ok_or_else(|| CliError::Input(format!("artifact has no {k}")));
            let q = QuantInputs {
                bialgebra,
                module: field("module"),
                hbar: num("hbar_degree")?,
                order: num("jet_order")?,
                assoc: associator_from_value(&v["associator"])?,
                dump_operators: v.get("operators").is_some(),
            };
            quantization_artifact(&q)?.0
        }
        _ => return Err(CliError::Input(format!("{}: unknown artifact kind", path.display()))),
    };
    summary(&fresh);
    if fresh["report"]["ok"] != true {
        return Err(CliError::Verification(failed_names(&fresh)));
    }
    if fresh != v {
        let diff = fresh
            .as_object()
            .into_iter()
            .flatten()
            .find(|(k, x)| v.get(k.as_str()) != Some(x))
            .map(|(k, _)| k.clone())
            .unwrap_or_else(|| "extra fields".into());
        return Err(CliError::Verification(format!("recomputed artifact differs at `{diff}`")));
    }
    eprintln!("verified {}", path.display());
    Ok(())
}

#[derive(Deserialize)]
struct MorphismFile {
    source: Vec<String>,
    target: Vec<String>,
    fibers: BTreeMap<String, Vec<String>>,
}

pub fn render_text(text: &str) -> Result<String> {
    let value: toml::Value = toml::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
    if value.get("source").is_some() {
        let m: MorphismFile = toml::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
        let err = |e: crate::ordcat::OrdError| CliError::Input(e.to_string());
        let p = OrderedMorphism::new(FinSet::new(m.source).map_err(err)?, FinSet::new(m.target).map_err(err)?, &m.fibers)
            .map_err(err)?;
        Ok(render(&p))
    } else {
        let g = CiliatedGraph::from_toml(text).map_err(|e| CliError::Input(e.to_string()))?;
        Ok(render_graph(&g))
    }
}

fn render_cmd(input: Option<&Path>, gamma: Option<usize>) -> Result<()> {
    let text = match (input, gamma) {
        (_, Some(n)) => {
            let mt = double(&LieBialgebra::abelian(1)).expect("abelian double");
            render_graph(&gamma_h(&mt, n, 1).graph)
        }
        (Some(p), None) => render_text(&read(p)?)?,
        (None, None) => return Err(CliError::Input("render needs an input file or --gamma-h".into())),
    };
    print!("{text}");
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    let start = Instant::now();
    let r = match &cli.command {
        Command::ForgeAssociator { degree, tie_break, out } => {
            let a = forge(*degree, (*tie_break).into())?;
            let v = associator_artifact(&a);
            summary(&v);
            write_out(out.as_deref(), &to_text(&v))?;
            if v["report"]["ok"] == true {
                Ok(())
            } else {
                Err(CliError::Solver(failed_names(&v)))
            }
        }
        Command::QuantizeGroup(args) => quantize_cmd(args, None),
        Command::QuantizeModule { args, module } => quantize_cmd(args, Some(module)),
        Command::Verify { artifact } => verify_cmd(artifact),
        Command::Render { input, gamma_h } => render_cmd(input.as_deref(), *gamma_h),
    };
    if !matches!(cli.command, Command::Render { .. }) {
        eprintln!("elapsed {:.3} s", start.elapsed().as_secs_f64());
    }
    r
}
