//! One PASS/FAIL line per acceptance criterion.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rspin::cli_io::{cmd_glue, ReportSections};
use rspin::complex_builder::{build_complex, topology_report};
use rspin::point_insertion::{pi_backward, pi_forward, rh_isomorphic, stratum_graph};
use rspin::spin_structure::{spin_isomorphism, validate_spin};
use serde_json::Value;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn glue_json(p: (u32, u32, &[i32], &[i32])) -> Result<Value, String> {
    let out = cmd_glue(p.0, p.1, p.2, p.3, ReportSections::default()).map_err(|e| e.to_string())?;
    serde_json::from_str(&out.text).map_err(|e| e.to_string())
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn circle() -> Outcome {
    let start = Instant::now();
    let v = glue_json(common::CIRCLE)?;
    let (r, h, b, i) = common::CIRCLE;
    let x = build_complex(r, h, b, i).map_err(|e| e.to_string())?;
    let single = x.cells.iter().filter(|c| c.components().len() == 1).count();
    ensure(v["cells"]["1"] == 12, || {
        format!("one-cells {}", v["cells"]["1"])
    })?;
    ensure(single == 6 && x.cells.len() - single == 6, || {
        format!("{single} single-vertex cells")
    })?;
    ensure(v["pi_pairs"] == 12 && v["perfect_matching"] == true, || {
        "endpoints not perfectly paired".into()
    })?;
    ensure(v["cells"]["0"] == 12, || {
        format!("vertices {}", v["cells"]["0"])
    })?;
    ensure(v["euler"] == 0 && v["closed"] == true, || {
        format!("euler {} closed {}", v["euler"], v["closed"])
    })?;
    ensure(v["components"].as_array().map(Vec::len) == Some(1), || {
        "component count".into()
    })?;
    within(start, Duration::from_secs(10))?;
    Ok("12 one-cells (6+6), 24 endpoints in 12 pairs, V = 12, chi = 0, closed, 1 component".into())
}

fn sphere() -> Outcome {
    let start = Instant::now();
    let v = glue_json(common::SPHERE)?;
    ensure(v["cells"]["2"] == 16, || {
        format!("two-cells {}", v["cells"]["2"])
    })?;
    let comps = v["components"].as_array().ok_or("no components")?;
    ensure(comps.len() == 2, || format!("{} components", comps.len()))?;
    for c in comps {
        let counts: Vec<u64> = c["facet_counts"]
            .as_array()
            .ok_or("facet counts")?
            .iter()
            .filter_map(Value::as_u64)
            .collect();
        ensure(counts == [6, 6, 2, 2, 2, 2, 2, 2], || {
            format!("facet multiset {counts:?}")
        })?;
        ensure(c["one_cells"] == 12, || {
            format!("one-cells {}", c["one_cells"])
        })?;
        ensure(c["zero_cells"] == 6, || {
            format!("zero-cells {}", c["zero_cells"])
        })?;
        ensure(c["euler"] == 2 && c["closed"] == true, || {
            format!("euler {}", c["euler"])
        })?;
    }
    let free: u64 = v["free_boundaries"]
        .as_object()
        .ok_or("census")?
        .values()
        .filter_map(Value::as_u64)
        .sum();
    ensure(free == 0, || format!("{free} free facets"))?;
    within(start, Duration::from_secs(60))?;
    Ok("16 two-cells, 2 components of {6,6,2,2,2,2,2,2}, 12 one-cells and 6 zero-cells each, chi = 2, closed".into())
}

fn signs() -> Outcome {
    let mut pairs = 0;
    for (r, h, b, i) in [common::CIRCLE, common::SPHERE] {
        let x = build_complex(r, h, b, i).map_err(|e| e.to_string())?;
        let t = topology_report(&x);
        ensure(t.all_pairs_opposite, || {
            format!("a pair of ({r},{h}) has sign +1")
        })?;
        ensure(t.cocycle_trivial, || {
            format!("cocycle of ({r},{h}) is not trivial")
        })?;
        pairs += x.pairs.len();
    }
    Ok(format!("{pairs} PI pairs, all -1; cocycles trivial"))
}

fn involution() -> Outcome {
    let pool = common::bi_pool(3);
    ensure(pool.len() >= 200, || {
        format!("only {} BI facets", pool.len())
    })?;
    for (n, (cell, b)) in pool.iter().enumerate() {
        let (d, ai) = pi_forward(cell, b).map_err(|e| format!("facet {n}: {e}"))?;
        let (c, bi) = pi_backward(&d, &ai).map_err(|e| format!("facet {n}: {e}"))?;
        ensure(rh_isomorphic(&c, cell), || {
            format!("facet {n}: cell differs")
        })?;
        ensure(
            rh_isomorphic(&stratum_graph(&c, &bi), &stratum_graph(cell, b)),
            || format!("facet {n}: facet differs"),
        )?;
    }
    Ok(format!(
        "{} BI facets, all round trips isomorphic",
        pool.len()
    ))
}

fn order_independence() -> Outcome {
    let pool = common::two_site_pool();
    ensure(pool.len() >= 100, || {
        format!("only {} two-site graphs", pool.len())
    })?;
    for (n, (g, s1, s2)) in pool.iter().enumerate() {
        let (a, b) = common::smooth_both_orders(g, *s1, *s2);
        ensure(validate_spin(&a).is_valid(), || {
            format!("graph {n}: result invalid")
        })?;
        ensure(spin_isomorphism(&a, &b, true).is_some(), || {
            format!("graph {n}: orders differ")
        })?;
    }
    Ok(format!(
        "{} two-site graphs, both orders isomorphic",
        pool.len()
    ))
}

fn validator_oracle() -> Outcome {
    let start = Instant::now();
    let (mut checked, mut accepted) = (0u64, 0u64);
    for r in 2..=5u32 {
        let tws: Vec<i32> = (-1..r as i32).collect();
        let bvals: Vec<(i32, bool)> = tws.iter().flat_map(|&t| [(t, false), (t, true)]).collect();
        for k in 0..=4 {
            for l in 0..=2 {
                let none = vec![false; l];
                for bd in common::tuples(&bvals, k) {
                    for int in common::tuples(&tws, l) {
                        let s = common::single_vertex(r, &bd, &int, &none, &none);
                        let got = validate_spin(&s).is_valid();
                        let want = common::oracle_accepts(r, &bd, &int, &none, &none);
                        ensure(got == want, || {
                            format!("r={r} B={bd:?} I={int:?}: validator {got}, oracle {want}")
                        })?;
                        checked += 1;
                        accepted += want as u64;
                    }
                }
            }
        }
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{checked} assignments, {accepted} accepted by both"
    ))
}

fn facet_round_trip() -> Outcome {
    let mut n = 0;
    for (r, h, b, i) in [common::CIRCLE, common::SPHERE] {
        let x = build_complex(r, h, b, i).map_err(|e| e.to_string())?;
        for cell in &x.cells {
            n += common::facet_round_trip(cell)?;
        }
    }
    Ok(format!(
        "{n} facets smooth back with rank parity on every vertex"
    ))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        ("circle example", circle),
        ("sphere example", sphere),
        ("sign opposition", signs),
        ("PI involution", involution),
        ("smoothing order independence", order_independence),
        ("validator oracle equivalence", validator_oracle),
        ("facet round trip", facet_round_trip),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let t = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({t:.2} s)", n + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} ({t:.2} s)", n + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
