//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tsp12::costsearch::{seed_tours, worst_costs, worst_costs_exhaustive, CostSearchProblem, DEFAULT_SEED_CAP};
use tsp12::dualcert::{build_dual, verify_dual};
use tsp12::enumerate::{gap_sweep, gen_all, gen_biconnected, instance_from_cert, SweepOptions};
use tsp12::f2m::{canonicalize, decompose, is_canonical, is_two_connected};
use tsp12::instance::{held_karp_opt, w9, Instance, Tour};
use tsp12::subtour::{is_subtour_feasible_exhaustive, solve_f2m_lp, solve_min_2m, solve_subtour_lp, solve_tsp_ip};
use tsp12::tourbuild::{
    augment, build_tour_109_check, build_tour_76, max_augmentation_exhaustive, normalize_2m, pure_cycle_matching,
    stitch_cycles, CycleCover, PartialTour,
};
use tsp12::{FracSolution, Rational};

type Outcome = Result<String, String>;

fn r(a: i64, b: i64) -> Rational {
    Rational::new(a, b)
}

fn int(a: i64) -> Rational {
    Rational::from_int(a)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Everything solved once per enumerated instance.
struct Solved {
    inst: Instance,
    f2m: FracSolution,
    subt: FracSolution,
    two_m: tsp12::subtour::TwoMatching,
    ip: Tour,
    hk: Tour,
}

fn population() -> Vec<Solved> {
    (3..=8)
        .flat_map(|n| gen_biconnected(n).unwrap())
        .map(|g| {
            let inst = g.instance();
            let f2m = solve_f2m_lp(&inst).unwrap();
            let (subt, _) = solve_subtour_lp(&inst).unwrap();
            let two_m = solve_min_2m(&inst).unwrap();
            let ip = solve_tsp_ip(&inst).unwrap();
            let hk = held_karp_opt(&inst).unwrap();
            Solved { inst, f2m, subt, two_m, ip, hk }
        })
        .collect()
}

fn valid_tour(inst: &Instance, t: &Tour) -> Result<(), String> {
    let again = Tour::new(inst, t.order.clone()).map_err(|e| e.to_string())?;
    ensure(again.cost == t.cost, || format!("tour cost {} recomputes to {}", t.cost, again.cost))
}

fn gap_table() -> Outcome {
    let mut parts = Vec::new();
    for (n, count, ratio) in [(6, 56, r(16, 15)), (7, 468, r(16, 15)), (8, 7123, r(18, 17))] {
        let t = Instant::now();
        let rep = gap_sweep(n, &SweepOptions { workers: 1, ..Default::default() }).map_err(|e| e.to_string())?;
        ensure(rep.graph_count == count && rep.worst_ratio == ratio, || {
            format!("n={n}: {} graphs, worst {} (expected {count}, {ratio})", rep.graph_count, rep.worst_ratio)
        })?;
        parts.push(format!(
            "n={n}: {} graphs, worst {} (biconnected only {}) in {:.1?}",
            rep.graph_count,
            rep.worst_ratio,
            rep.biconnected_worst_ratio,
            t.elapsed()
        ));
    }
    Ok(parts.join("; "))
}

fn w9_values() -> Outcome {
    let inst = w9();
    let (x, _) = solve_subtour_lp(&inst).map_err(|e| e.to_string())?;
    let ip = solve_tsp_ip(&inst).map_err(|e| e.to_string())?;
    let two_m = solve_min_2m(&inst).map_err(|e| e.to_string())?;
    ensure(*x.objective() == int(9), || format!("LP {}", x.objective()))?;
    ensure(ip.cost == 10 && two_m.cost == 10, || format!("IP {}, 2M {}", ip.cost, two_m.cost))?;
    ensure(int(ip.cost) / x.objective() == r(10, 9), || "ratio".into())?;
    let f = solve_f2m_lp(&inst).map_err(|e| e.to_string())?;
    ensure(*f.objective() == int(9) && f.is_half_integral(), || format!("F2M {} not half-integral vertex of cost 9", f.objective()))?;
    let d = decompose(&f).map_err(|e| e.to_string())?;
    ensure(d.integer_cycles.is_empty() && d.fractional_components.len() == 1, || "not one fractional component".into())?;
    let c = &d.fractional_components[0];
    ensure(c.half_cycles.len() == 2 && c.one_paths.len() == 3, || {
        format!("{} half-cycles, {} one-paths", c.half_cycles.len(), c.one_paths.len())
    })?;
    Ok("LP 9, IP 10, 2M 10, ratio 10/9, 2 half-cycles + 3 one-paths".into())
}

/// The F2M vertex and its canonical rewiring, deduplicated.
fn f2m_variants(s: &Solved) -> Vec<FracSolution> {
    let mut out = vec![s.f2m.clone()];
    if let Ok(c) = canonicalize(&s.inst, &s.f2m) {
        if c != s.f2m {
            out.push(c);
        }
    }
    out
}

fn is_connected_fractional(x: &FracSolution) -> bool {
    decompose(x).is_ok_and(|d| d.integer_cycles.is_empty() && d.fractional_components.len() == 1)
}

fn seven_sixths(pop: &[Solved]) -> Outcome {
    let mut checked = 0;
    for s in pop {
        for x in f2m_variants(s) {
            if !is_connected_fractional(&x) {
                continue;
            }
            let t = build_tour_76(&s.inst, &x).map_err(|e| format!("{:?}: {e}", s.inst.one_edges()))?;
            valid_tour(&s.inst, &t)?;
            ensure(int(6 * t.cost) <= int(7) * x.cost(&s.inst), || format!("{:?}: tour {}", s.inst.one_edges(), t.cost))?;
            checked += 1;
        }
    }
    let inst = w9();
    let t = build_tour_76(&inst, &solve_f2m_lp(&inst).unwrap()).map_err(|e| e.to_string())?;
    ensure(t.cost == 10, || format!("W9 tour {}", t.cost))?;
    ensure(checked > 0, || "no connected fractional vertex".into())?;
    Ok(format!("{checked} connected fractional vertices within 7/6; W9 tour 10"))
}

fn ten_ninths(pop: &[Solved]) -> Outcome {
    let mut checked = 0;
    for s in pop {
        for x in f2m_variants(s) {
            if !is_connected_fractional(&x) || !is_two_connected(&x) || !is_canonical(&s.inst, &x).unwrap_or(false) {
                continue;
            }
            let t = build_tour_109_check(&s.inst, &x).map_err(|e| format!("{:?}: {e}", s.inst.one_edges()))?;
            valid_tour(&s.inst, &t)?;
            ensure(int(9 * t.cost) <= int(10) * x.cost(&s.inst), || format!("{:?}: tour {}", s.inst.one_edges(), t.cost))?;
            checked += 1;
        }
    }
    let inst = w9();
    let x = solve_f2m_lp(&inst).unwrap();
    let t = build_tour_109_check(&inst, &x).map_err(|e| e.to_string())?;
    ensure(int(t.cost) == r(10, 9) * x.cost(&inst), || format!("W9 tour {} not tight", t.cost))?;
    ensure(checked > 0, || "no 2-connected canonical vertex".into())?;
    Ok(format!("{checked} 2-connected canonical vertices within 10/9; tight on W9"))
}

fn augmentation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut at_bound = 0;
    for i in 0..200 {
        let (t, a) = common::random_pair(&mut rng);
        ensure(a.len() <= 9, || format!("pair {i}: |A| = {}", a.len()))?;
        let mut grown = t.clone();
        let added = augment(&mut grown, &a).map_err(|e| format!("pair {i}: {e}"))?;
        let best = max_augmentation_exhaustive(&t, &a);
        ensure(added.len() >= a.guaranteed() && best >= a.guaranteed() && added.len() <= best, || {
            format!("pair {i}: added {}, guaranteed {}, oracle {best}", added.len(), a.guaranteed())
        })?;
        let all = t.edges().into_iter().chain(added.iter().copied());
        PartialTour::from_edges(t.n(), all).map_err(|e| format!("pair {i}: {e}"))?;
        at_bound += usize::from(added.len() == best);
    }
    Ok(format!("200 pairs meet the bound; greedy equals the oracle maximum on {at_bound}"))
}

fn dual_certificates(pop: &[Solved]) -> Outcome {
    let mut checked = 0;
    let mut with_r = 0;
    for s in pop.iter().filter(|s| s.inst.n() <= 7) {
        let cover = CycleCover::new(&s.inst, s.two_m.cycles.clone()).map_err(|e| e.to_string())?;
        let cover = normalize_2m(&s.inst, &cover);
        let m = pure_cycle_matching(&s.inst, &cover);
        let cert = build_dual(&s.inst, &cover, &m).map_err(|e| e.to_string())?;
        let v = verify_dual(&s.inst, &cert).map_err(|e| format!("{:?}: {e}", s.inst.one_edges()))?;
        let n_r = int((s.inst.n() + m.r) as i64);
        ensure(v == n_r && v <= *s.subt.objective(), || {
            format!("{:?}: certified {v}, n + r = {n_r}, LP {}", s.inst.one_edges(), s.subt.objective())
        })?;
        checked += 1;
        with_r += usize::from(m.r > 0);
    }
    Ok(format!("{checked} certificates verified at n + r ({with_r} with r > 0)"))
}

fn stitching(pop: &[Solved]) -> Outcome {
    for s in pop {
        let cover = CycleCover::new(&s.inst, s.two_m.cycles.clone()).map_err(|e| e.to_string())?;
        let t = stitch_cycles(&s.inst, &cover).map_err(|e| format!("{:?}: {e}", s.inst.one_edges()))?;
        valid_tour(&s.inst, &t)?;
        ensure(3 * t.cost <= 4 * cover.cost, || format!("{:?}: {} vs cover {}", s.inst.one_edges(), t.cost, cover.cost))?;
    }
    Ok(format!("{} optimal 2-matchings stitched within 4/3", pop.len()))
}

fn ordering_chain(pop: &[Solved]) -> Outcome {
    let links: [(&str, fn(&Solved) -> bool); 5] = [
        ("F2M <= SUBT", |s| s.f2m.objective() <= s.subt.objective()),
        ("SUBT <= 2M", |s| *s.subt.objective() <= int(s.two_m.cost)),
        ("2M <= IP", |s| s.two_m.cost <= s.ip.cost),
        ("IP <= 3/2 SUBT", |s| int(s.ip.cost) <= r(3, 2) * s.subt.objective()),
        ("2M <= 10/9 SUBT", |s| int(s.two_m.cost) <= r(10, 9) * s.subt.objective()),
    ];
    let mut broken = Vec::new();
    for (name, holds) in links {
        let bad: Vec<&Solved> = pop.iter().filter(|s| !holds(s)).collect();
        if let Some(s) = bad.first() {
            broken.push(format!(
                "{name} fails on {} instances, e.g. n={} {:?}: F2M {}, SUBT {}, 2M {}, IP {}",
                bad.len(),
                s.inst.n(),
                s.inst.one_edges(),
                s.f2m.objective(),
                s.subt.objective(),
                s.two_m.cost,
                s.ip.cost
            ));
        }
    }
    if broken.is_empty() {
        Ok(format!("F2M <= SUBT <= 2M <= IP <= 3/2 SUBT and 2M <= 10/9 SUBT on {} instances", pop.len()))
    } else {
        Err(format!("{}; the other links hold on all {} instances", broken.join("; "), pop.len()))
    }
}

fn cost_search() -> Outcome {
    let alpha = r(16, 15);
    // Distinct subtour vertices from every 6-node graph, fractional first.
    let mut seen = BTreeSet::new();
    let mut vertices: Vec<FracSolution> = gen_all(6)
        .iter()
        .map(|g| solve_subtour_lp(&g.instance()).unwrap().0)
        .filter(|x| seen.insert(format!("{:?}", x.dense())))
        .collect();
    vertices.sort_by_key(|x| x.is_integral());
    vertices.truncate(14);
    let fractional = vertices.iter().filter(|x| !x.is_integral()).count();
    for (i, x) in vertices.iter().enumerate() {
        let prob = CostSearchProblem { x: x.clone(), alpha: alpha.clone(), initial_tours: seed_tours(x, DEFAULT_SEED_CAP) };
        let res = worst_costs(&prob).map_err(|e| format!("vertex {i}: {e}"))?;
        let oracle = worst_costs_exhaustive(x, &alpha);
        ensure(res.objective == oracle && !res.objective.is_positive(), || {
            format!("vertex {i}: search {} vs exhaustive {oracle}", res.objective)
        })?;
        let inst = res.instance(6);
        ensure(held_karp_opt(&inst).unwrap().cost == res.witness_cost, || format!("vertex {i}: witness not optimal"))?;
    }
    let (x, _) = solve_subtour_lp(&w9()).unwrap();
    let seeds = seed_tours(&x, DEFAULT_SEED_CAP);
    let res = worst_costs(&CostSearchProblem { x, alpha: r(10, 9), initial_tours: seeds }).map_err(|e| e.to_string())?;
    ensure(res.objective.is_zero(), || format!("W9 objective {}", res.objective))?;
    Ok(format!("{} vertices at n=6 ({fractional} fractional) match the 2^15 oracle; W9 objective 0", vertices.len()))
}

fn oracle_cross_checks(pop: &[Solved]) -> Outcome {
    for s in pop {
        ensure(s.ip.cost == s.hk.cost, || format!("{:?}: B&B {} vs Held–Karp {}", s.inst.one_edges(), s.ip.cost, s.hk.cost))?;
        ensure(is_subtour_feasible_exhaustive(&s.subt), || format!("{:?}: LP violates a cut", s.inst.one_edges()))?;
    }
    // The sweep also solves graphs with cut vertices; check those tours too.
    let mut others = 0;
    for g in (3..=8).flat_map(gen_all).filter(|g| !g.is_biconnected()) {
        let inst = instance_from_cert(&g.cert_hex()).unwrap();
        ensure(solve_tsp_ip(&inst).unwrap().cost == held_karp_opt(&inst).unwrap().cost, || format!("{:?}", inst.one_edges()))?;
        others += 1;
    }
    Ok(format!("branch-and-bound = Held–Karp and exhaustive cut checks on {} instances, plus {others} with cut vertices", pop.len()))
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut run = |id: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let out = f();
        let status = if out.is_ok() { "PASS" } else { "FAIL" };
        let detail = match &out {
            Ok(s) | Err(s) => s.clone(),
        };
        println!("{status} {id:>2} {name}: {detail} [{:.1?}]", t.elapsed());
        results.push((id, name, out));
    };
    run(1, "gap sweep counts and worst ratios", &gap_table);
    run(2, "W9 instance", &w9_values);
    let pop = population();
    run(3, "7/6 tour builder", &|| seven_sixths(&pop));
    run(4, "10/9 tour builder", &|| ten_ninths(&pop));
    run(5, "augmentation against subset oracle", &augmentation_oracle);
    run(6, "dual certificates", &|| dual_certificates(&pop));
    run(7, "cycle stitching", &|| stitching(&pop));
    run(8, "ordering chain", &|| ordering_chain(&pop));
    run(9, "worst-cost search", &cost_search);
    run(10, "oracle cross-checks", &|| oracle_cross_checks(&pop));
    let failed = results.iter().filter(|(_, _, o)| o.is_err()).count();
    println!("acceptance: {} passed, {failed} failed in {:.1?}", results.len() - failed, start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
