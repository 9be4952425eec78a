//! `tsp12`: command-line front end. Every verb prints a JSON report on
//! stdout. Exit codes: 0 success, 2 infeasible input or failed
//! precondition, 3 structural error (including a failed `--verify`),
//! 4 solver budget exhausted.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha1::{Digest, Sha1};

use tsp12::costsearch::{
    seed_tours, worst_costs, worst_costs_exhaustive, CostSearchError, CostSearchProblem, DEFAULT_SEED_CAP,
};
use tsp12::dualcert::{build_dual, verify_dual, DualCertificate, DualError};
use tsp12::enumerate::{brute_force_classes, gap_sweep, gen_biconnected, instance_from_cert, EnumError, SweepOptions};
use tsp12::f2m::{canonicalize_report, decompose, is_canonical, is_two_connected, F2MError, F2MStats};
use tsp12::instance::{add_absorber_node, biconnectify, connectify, held_karp_opt, Instance, InstanceError, Tour};
use tsp12::lp::LpError;
use tsp12::mincut::stoer_wagner;
use tsp12::subtour::{
    exhaustive_min_cut, is_subtour_feasible_exhaustive, solve_f2m_lp, solve_min_2m, solve_subtour_lp,
    solve_tsp_ip_with, CutFamily, IpOptions, SolveError,
};
use tsp12::tourbuild::{
    build_tour_109_with, build_tour_76_with, build_tour_f2m, is_normalized, normalize_2m, pure_cycle_matching,
    stitch_cycles, CycleCover, TourBuildError, Trace,
};
use tsp12::{FracSolution, Rational};

#[derive(Parser)]
#[command(name = "tsp12", version, about = "Exact subtour LP tools for the 1,2-TSP")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Also write the report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Re-check the result through an independent code path.
    #[arg(long, global = true)]
    verify: bool,
}

#[derive(Args)]
struct InstanceArg {
    /// Instance file: {"n": .., "one_edges": [[u, v], ..]}.
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Subtour LP (or, with --f2m, the degree-and-bounds LP).
    Lp {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        f2m: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Optimal tour by branch-and-bound over the subtour LP.
    Ip {
        #[command(flatten)]
        inst: InstanceArg,
        #[command(flatten)]
        common: Common,
    },
    /// Structure of a fractional 2-matching vertex.
    F2m {
        #[command(flatten)]
        inst: InstanceArg,
        /// Solution file; solved from the instance when absent.
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long)]
        canonicalize: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Minimum-cost 2-matching, its normalization and pure-cycle matching.
    TwoMatch {
        #[command(flatten)]
        inst: InstanceArg,
        #[command(flatten)]
        common: Common,
    },
    /// Tour from a fractional 2-matching or a stitched 2-matching.
    Tour {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// Include per-step augmentation decisions.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Build the n + r dual certificate, or check a given one.
    Dual {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long)]
        check: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Graph enumeration.
    Enum {
        #[command(subcommand)]
        cmd: EnumCmd,
    },
    /// Worst costs for a fixed subtour vertex.
    CostSearch {
        /// Vertex in the solution file format.
        #[arg(long)]
        vertex: PathBuf,
        /// Target ratio, e.g. 10/9.
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = DEFAULT_SEED_CAP)]
        seed_cap: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Optimal tour by Held–Karp.
    Oracle {
        #[command(flatten)]
        inst: InstanceArg,
        #[command(flatten)]
        common: Common,
    },
    /// Instance transforms that add one node.
    Transform {
        #[command(flatten)]
        inst: InstanceArg,
        #[arg(long, value_enum)]
        op: Transform,
        /// LP solution, needed by `absorber`; solved when absent.
        #[arg(long)]
        solution: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum EnumCmd {
    /// Subtour LP and optimal tour on every graph with n nodes.
    Sweep {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Certificates of the biconnected graphs on n nodes.
    List {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// 7/6 builder on connected vertices, per-component driver otherwise.
    Auto,
    #[value(name = "76")]
    SevenSixths,
    #[value(name = "109")]
    TenNinths,
    /// Minimum 2-matching with each cycle opened and chained.
    Stitch,
}

#[derive(Clone, Copy, ValueEnum)]
enum Transform {
    Connectify,
    Biconnectify,
    Absorber,
}

struct Failure {
    code: u8,
    message: String,
}

type Res<T> = Result<T, Failure>;

fn precondition(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn structural(message: impl Into<String>) -> Failure {
    Failure { code: 3, message: message.into() }
}

fn budget(message: impl Into<String>) -> Failure {
    Failure { code: 4, message: message.into() }
}

impl From<InstanceError> for Failure {
    fn from(e: InstanceError) -> Self {
        precondition(e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match &e {
            SolveError::NodeBudget { .. } | SolveError::Lp(LpError::PivotBudget(_)) => budget(e.to_string()),
            SolveError::Instance(_) | SolveError::UnexpectedStatus(_) => precondition(e.to_string()),
            _ => structural(e.to_string()),
        }
    }
}

impl From<F2MError> for Failure {
    fn from(e: F2MError) -> Self {
        match e {
            F2MError::Structure { .. } => structural(e.to_string()),
            _ => precondition(e.to_string()),
        }
    }
}

impl From<TourBuildError> for Failure {
    fn from(e: TourBuildError) -> Self {
        match e {
            TourBuildError::Precondition(_) | TourBuildError::Instance(_) => precondition(e.to_string()),
            TourBuildError::F2M(inner) => inner.into(),
            TourBuildError::Accounting(_) => structural(e.to_string()),
        }
    }
}

impl From<DualError> for Failure {
    fn from(e: DualError) -> Self {
        match e {
            DualError::NotNormalized | DualError::BadMatching(_) => precondition(e.to_string()),
            _ => structural(e.to_string()),
        }
    }
}

impl From<CostSearchError> for Failure {
    fn from(e: CostSearchError) -> Self {
        match e {
            CostSearchError::Solve(inner) => inner.into(),
            _ => precondition(e.to_string()),
        }
    }
}

impl From<EnumError> for Failure {
    fn from(e: EnumError) -> Self {
        match e {
            EnumError::UnsupportedN(_) => precondition(e.to_string()),
            EnumError::Solve { source, .. } => source.into(),
            _ => structural(e.to_string()),
        }
    }
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Res<()> {
    if ok {
        Ok(())
    } else {
        Err(structural(format!("verification failed: {}", what())))
    }
}

/// Git blob hash of a file's bytes.
fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha1::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

fn read(path: &Path) -> Res<Vec<u8>> {
    std::fs::read(path).map_err(|e| precondition(format!("{}: {e}", path.display())))
}

fn load_instance(arg: &InstanceArg) -> Res<(Instance, String)> {
    let bytes = read(&arg.instance)?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| precondition(e.to_string()))?;
    Ok((Instance::from_json(&text)?, content_hash(&bytes)))
}

fn load_solution(path: &Path) -> Res<(FracSolution, CutFamily)> {
    let text = String::from_utf8(read(path)?).map_err(|e| precondition(e.to_string()))?;
    FracSolution::from_json(&text).map_err(|e| precondition(format!("{}: {e}", path.display())))
}

/// A solution file read against an instance, with its cost recomputed.
fn solution_for(inst: &Instance, path: &Path) -> Res<FracSolution> {
    let (x, _) = load_solution(path)?;
    if x.n() > inst.n() {
        return Err(precondition(format!("solution mentions node {} but n = {}", x.n() - 1, inst.n())));
    }
    let mut x = x.resized(inst.n());
    x.recompute_objective(inst);
    Ok(x)
}

fn solution_json(x: &FracSolution, cuts: &CutFamily) -> Value {
    serde_json::from_str(&x.to_json(cuts)).expect("own serialization")
}

fn tour_json(t: &Tour) -> Value {
    json!({ "order": t.order, "cost": t.cost })
}

fn verify_subtour_solution(inst: &Instance, x: &FracSolution) -> Res<()> {
    x.check_degree_and_bounds().map_err(|e| structural(format!("verification failed: {e}")))?;
    check(*x.objective() == x.cost(inst), || "objective differs from recomputed cost".into())?;
    let sw = stoer_wagner(&x.weight_matrix()).map(|r| r.best.value);
    if inst.n() <= 16 {
        let (_, exhaustive) = exhaustive_min_cut(x);
        check(sw.as_ref() == Some(&exhaustive), || format!("Stoer–Wagner {sw:?} vs exhaustive {exhaustive}"))?;
    }
    check(sw.is_some_and(|v| v >= Rational::from_int(2)), || "a subtour constraint is violated".into())
}

fn cmd_lp(arg: &InstanceArg, f2m: bool, common: &Common) -> Res<Value> {
    let (inst, hash) = load_instance(arg)?;
    let (x, cuts) = if f2m { (solve_f2m_lp(&inst)?, CutFamily::default()) } else { solve_subtour_lp(&inst)? };
    if common.verify {
        if f2m {
            x.check_degree_and_bounds().map_err(structural)?;
            check(x.is_half_integral(), || "F2M vertex is not half-integral".into())?;
        } else {
            verify_subtour_solution(&inst, &x)?;
        }
    }
    Ok(json!({
        "instance_hash": hash,
        "relaxation": if f2m { "f2m" } else { "subtour" },
        "objective": x.objective(),
        "solution": solution_json(&x, &cuts),
    }))
}

fn cmd_ip(arg: &InstanceArg, common: &Common) -> Res<Value> {
    let (inst, hash) = load_instance(arg)?;
    let (tour, stats) = solve_tsp_ip_with(&inst, &IpOptions::default())?;
    if common.verify {
        let hk = held_karp_opt(&inst)?;
        check(hk.cost == tour.cost, || format!("Held–Karp {} vs branch-and-bound {}", hk.cost, tour.cost))?;
    }
    Ok(json!({
        "instance_hash": hash,
        "cost": tour.cost,
        "tour": tour_json(&tour),
        "nodes": stats.nodes,
        "cuts": stats.cuts,
    }))
}

fn cmd_oracle(arg: &InstanceArg, common: &Common) -> Res<Value> {
    let (inst, hash) = load_instance(arg)?;
    let tour = held_karp_opt(&inst)?;
    if common.verify {
        let (bb, _) = solve_tsp_ip_with(&inst, &IpOptions::default())?;
        check(bb.cost == tour.cost, || format!("branch-and-bound {} vs Held–Karp {}", bb.cost, tour.cost))?;
    }
    Ok(json!({ "instance_hash": hash, "cost": tour.cost, "tour": tour_json(&tour) }))
}

fn cmd_f2m(arg: &InstanceArg, solution: Option<&Path>, canon: bool, common: &Common) -> Res<Value> {
    let (inst, hash) = load_instance(arg)?;
    let x = match solution {
        Some(p) => solution_for(&inst, p)?,
        None => solve_f2m_lp(&inst)?,
    };
    let d = decompose(&x)?;
    if common.verify {
        let back = d.reassemble(&inst);
        check(back.support().eq(x.support()), || "decomposition does not reassemble to x".into())?;
    }
    let mut report = json!({
        "instance_hash": hash,
        "objective": x.cost(&inst),
        "decomposition": d,
        "stats": F2MStats::of(&inst, &d),
        "connected": d.is_connected(),
        "two_connected": is_two_connected(&x),
        "canonical": is_canonical(&inst, &x)?,
        "solution": solution_json(&x, &CutFamily::default()),
    });
    if canon {
        let rep = canonicalize_report(&inst, &x)?;
        if common.verify {
            rep.x.check_degree_and_bounds().map_err(structural)?;
            check(rep.x.cost(&inst) <= x.cost(&inst), || "canonical rewiring raised the cost".into())?;
        }
        report["canonicalized"] = json!({
            "objective": rep.x.cost(&inst),
            "rewired": rep.rewired,
            "skipped": rep.skipped,
            "canonical": is_canonical(&inst, &rep.x)?,
            "solution": solution_json(&rep.x, &CutFamily::default()),
        });
    }
    Ok(report)
}

fn cmd_two_match(arg: &InstanceArg, common: &Common) -> Res<Value> {
    let (inst, hash) = load_instance(arg)?;
    let m = solve_min_2m(&inst)?;
    let cover = CycleCover::new(&inst, m.cycles.clone())?;
    let normalized = normalize_2m(&inst, &cover);
    let matching = pure_cycle_matching(&inst, &normalized);
    if common.verify {
        check(normalized.cost <= cover.cost && is_normalized(&inst, &normalized), || "normalization".into())?;
        check(matching.r + matching.matching.len() == matching.pure_cycles.len(), || "matching counts".into())?;
        check(
            matching.cover_cycles.len() + matching.cover_nodes.len() == matching.matching.len(),
            || "vertex cover size differs from matching size".into(),
        )?;
        let hk = held_karp_opt(&inst)?;
        check(cover.cost <= hk.cost, || format!("2-matching {} above optimal tour {}", cover.cost, hk.cost))?;
    }
    Ok(json!({
        "instance_hash": hash,
        "cost": cover.cost,
        "cover": cover,
        "normalized": normalized,
        "r": matching.r,
        "matching": matching.matching,
        "cover_cycles": matching.cover_cycles,
        "cover_nodes": matching.cover_nodes,
    }))
}

fn cmd_tour(arg: &InstanceArg, solution: Option<&Path>, method: Method, trace_on: bool, common: &Common) -> Res<Value> {
    let (inst, hash) = load_instance(arg)?;
    let mut trace = if trace_on { Trace::enabled() } else { Trace::default() };
    let x = match (method, solution) {
        (Method::Stitch, _) => None,
        (_, Some(p)) => Some(solution_for(&inst, p)?),
        (_, None) => Some(solve_f2m_lp(&inst)?),
    };
    let (tour, stats, bound): (Tour, Value, Option<Rational>) = match method {
        Method::Stitch => {
            let m = solve_min_2m(&inst)?;
            let cover = CycleCover::new(&inst, m.cycles)?;
            let t = stitch_cycles(&inst, &cover)?;
            (t, json!({ "cover_cost": cover.cost, "cycles": cover.cycles.len() }), Some(Rational::new(4, 3) * cover.cost))
        }
        Method::TenNinths => {
            let x = x.unwrap();
            let (t, s) = build_tour_109_with(&inst, &x, &mut trace)?;
            (t, serde_json::to_value(s).unwrap(), Some(Rational::new(10, 9) * x.cost(&inst)))
        }
        Method::SevenSixths => {
            let x = x.unwrap();
            let (t, s) = build_tour_76_with(&inst, &x, &mut trace)?;
            (t, serde_json::to_value(s).unwrap(), Some(Rational::new(7, 6) * x.cost(&inst)))
        }
        Method::Auto => {
            let x = x.unwrap();
            let d = decompose(&x)?;
            if d.is_connected() {
                let (t, s) = build_tour_76_with(&inst, &x, &mut trace)?;
                (t, serde_json::to_value(s).unwrap(), Some(Rational::new(7, 6) * x.cost(&inst)))
            } else {
                let (t, s) = build_tour_f2m(&inst, &x)?;
                (t, json!({ "components": s }), Some(Rational::new(4, 3) * x.cost(&inst)))
            }
        }
    };
    if common.verify {
        let again = Tour::new(&inst, tour.order.clone())?;
        check(again.cost == tour.cost, || "tour cost does not recompute".into())?;
        if let Some(b) = &bound {
            check(Rational::from_int(tour.cost) <= *b, || format!("tour {} above bound {b}", tour.cost))?;
        }
        let hk = held_karp_opt(&inst)?;
        check(hk.cost <= tour.cost, || "tour cheaper than the optimum".into())?;
    }
    let mut report = json!({
        "instance_hash": hash,
        "cost": tour.cost,
        "tour": tour_json(&tour),
        "bound": bound,
        "stats": stats,
    });
    if trace_on {
        report["trace"] = json!(trace.lines());
    }
    Ok(report)
}

fn cmd_dual(arg: &InstanceArg, check_path: Option<&Path>, common: &Common) -> Res<Value> {
    let (inst, hash) = load_instance(arg)?;
    let (cert, r) = match check_path {
        Some(p) => {
            let text = String::from_utf8(read(p)?).map_err(|e| precondition(e.to_string()))?;
            (DualCertificate::from_json(&text).map_err(|e| precondition(format!("{}: {e}", p.display())))?, None)
        }
        None => {
            let m = solve_min_2m(&inst)?;
            let cover = normalize_2m(&inst, &CycleCover::new(&inst, m.cycles)?);
            let matching = pure_cycle_matching(&inst, &cover);
            (build_dual(&inst, &cover, &matching)?, Some(matching.r))
        }
    };
    let value = verify_dual(&inst, &cert)?;
    if common.verify {
        let (x, _) = solve_subtour_lp(&inst)?;
        check(value <= *x.objective(), || format!("certified {value} above LP value {}", x.objective()))?;
        if let Some(r) = r {
            check(value == Rational::from_int((inst.n() + r) as i64), || "value differs from n + r".into())?;
        }
    }
    Ok(json!({
        "instance_hash": hash,
        "value": value,
        "r": r,
        "certificate": cert,
    }))
}

fn cmd_sweep(n: usize, workers: usize, checkpoint: Option<PathBuf>, common: &Common) -> Res<Value> {
    let report = gap_sweep(n, &SweepOptions { workers, checkpoint, limits: None })?;
    if common.verify {
        if n <= 7 {
            let classes = brute_force_classes(n, |g| g.is_biconnected());
            check(classes.len() == report.graph_count, || {
                format!("edge-set enumeration finds {} classes, generator {}", classes.len(), report.graph_count)
            })?;
        }
        let inst = instance_from_cert(&report.worst.cert).ok_or_else(|| structural("bad worst certificate"))?;
        let hk = held_karp_opt(&inst)?;
        let (x, _) = solve_subtour_lp(&inst)?;
        check(is_subtour_feasible_exhaustive(&x), || "worst instance LP fails the exhaustive cut check".into())?;
        check(hk.cost == report.worst.ip_value && *x.objective() == report.worst.lp_value, || {
            format!("worst instance re-solves to {}/{}", hk.cost, x.objective())
        })?;
    }
    Ok(serde_json::to_value(report).unwrap())
}

fn cmd_list(n: usize) -> Res<Value> {
    let graphs = gen_biconnected(n)?;
    let certs: Vec<String> = graphs.iter().map(|g| g.cert_hex()).collect();
    Ok(json!({ "n": n, "count": certs.len(), "certificates": certs }))
}

fn cmd_cost_search(vertex: &Path, alpha: &str, seed_cap: usize, common: &Common) -> Res<Value> {
    let bytes = read(vertex)?;
    let hash = content_hash(&bytes);
    let (x, _) = load_solution(vertex)?;
    let alpha: Rational = alpha.parse().map_err(|e| precondition(format!("--alpha: {e:?}")))?;
    let seeds = seed_tours(&x, seed_cap);
    let n_seeds = seeds.len();
    let res = worst_costs(&CostSearchProblem { x: x.clone(), alpha: alpha.clone(), initial_tours: seeds })?;
    if common.verify {
        let hk = held_karp_opt(&res.instance(x.n()))?;
        check(hk.cost == res.witness_cost, || format!("Held–Karp {} vs witness {}", hk.cost, res.witness_cost))?;
        if x.n() <= 6 {
            let oracle = worst_costs_exhaustive(&x, &alpha);
            check(oracle == res.objective, || format!("exhaustive {oracle} vs search {}", res.objective))?;
        }
    }
    let one_edges: Vec<[usize; 2]> = res.costs.iter().filter(|(_, &c)| c == 1).map(|(e, _)| [e.u(), e.v()]).collect();
    Ok(json!({
        "vertex_hash": hash,
        "alpha": alpha,
        "objective": res.objective,
        "seed_tours": n_seeds,
        "generated_tours": res.generated_tours,
        "nodes": res.nodes,
        "costs": { "n": x.n(), "one_edges": one_edges },
        "witness_tour": { "order": res.witness_tour, "cost": res.witness_cost },
    }))
}

fn cmd_transform(arg: &InstanceArg, op: Transform, solution: Option<&Path>, common: &Common) -> Res<Value> {
    let (inst, hash) = load_instance(arg)?;
    let mut report = json!({ "instance_hash": hash });
    let grown = match op {
        Transform::Connectify => connectify(&inst)?,
        Transform::Biconnectify => biconnectify(&inst)?,
        Transform::Absorber => {
            let x = match solution {
                Some(p) => solution_for(&inst, p)?,
                None => solve_subtour_lp(&inst)?.0,
            };
            let (g, y) = add_absorber_node(&inst, &x)?;
            if common.verify {
                check(is_subtour_feasible_exhaustive(&y), || "rerouted solution violates a constraint".into())?;
                check(y.cost(&g) == x.cost(&inst), || "rerouting changed the cost".into())?;
            }
            report["solution"] = solution_json(&y, &CutFamily::default());
            g
        }
    };
    if common.verify {
        match op {
            Transform::Connectify => check(grown.is_connected(), || "result is disconnected".into())?,
            Transform::Biconnectify => check(grown.is_biconnected(), || "result is not biconnected".into())?,
            Transform::Absorber => {}
        }
        if grown.n() <= 16 {
            let (a, b) = (held_karp_opt(&inst)?, held_karp_opt(&grown)?);
            check(a.cost <= b.cost, || "optimal tour got cheaper".into())?;
        }
    }
    report["instance"] = serde_json::from_str(&grown.to_json()).unwrap();
    Ok(report)
}

fn run(cli: Cli) -> Res<(Value, Option<PathBuf>)> {
    let (value, common) = match cli.cmd {
        Cmd::Lp { inst, f2m, common } => (cmd_lp(&inst, f2m, &common)?, common),
        Cmd::Ip { inst, common } => (cmd_ip(&inst, &common)?, common),
        Cmd::Oracle { inst, common } => (cmd_oracle(&inst, &common)?, common),
        Cmd::F2m { inst, solution, canonicalize, common } => {
            (cmd_f2m(&inst, solution.as_deref(), canonicalize, &common)?, common)
        }
        Cmd::TwoMatch { inst, common } => (cmd_two_match(&inst, &common)?, common),
        Cmd::Tour { inst, solution, method, trace, common } => {
            (cmd_tour(&inst, solution.as_deref(), method, trace, &common)?, common)
        }
        Cmd::Dual { inst, check, common } => (cmd_dual(&inst, check.as_deref(), &common)?, common),
        Cmd::Enum { cmd: EnumCmd::Sweep { n, workers, checkpoint, common } } => {
            (cmd_sweep(n, workers, checkpoint, &common)?, common)
        }
        Cmd::Enum { cmd: EnumCmd::List { n, common } } => (cmd_list(n)?, common),
        Cmd::CostSearch { vertex, alpha, seed_cap, common } => {
            (cmd_cost_search(&vertex, &alpha, seed_cap, &common)?, common)
        }
        Cmd::Transform { inst, op, solution, common } => {
            (cmd_transform(&inst, op, solution.as_deref(), &common)?, common)
        }
    };
    Ok((value, common.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((value, out)) => {
            let text = serde_json::to_string_pretty(&value).unwrap();
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, text + "\n") {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            let _ = writeln!(std::io::stdout().lock(), "{}", json!({ "error": f.message, "exit_code": f.code }));
            ExitCode::from(f.code)
        }
    }
}
