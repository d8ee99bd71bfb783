//! Acceptance suite: one PASS/FAIL line per criterion, all checks exact.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use quaddr::complex::QuadComplex;
use quaddr::engine::{cartan_total, oracle_total, spectral_pages, total_cohomology};
use quaddr::field::Flatness;
use quaddr::identities::{cup_laws, run_suite};
use quaddr::model::{FlatGroupoidModel, ModelKind, SignConventions};
use quaddr::natural::{commutation_report, induced_map, ComplexMap, GroupHom, Morphism};
use quaddr::registry::{build_model, bundled_models, GroupConfig, ModelConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn complex(m: FlatGroupoidModel) -> QuadComplex {
    QuadComplex::new(Arc::new(m)).expect("bundled models have invariant frames")
}

fn model(name: &str) -> FlatGroupoidModel {
    bundled_models().into_iter().find(|m| m.name == name).expect("bundled model")
}

fn expect_dims(what: &str, got: &[usize], want: &[usize]) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, expected {want:?}"))
    }
}

fn identity_suite() -> Outcome {
    let mut checked = 0;
    for m in bundled_models() {
        let name = m.name.clone();
        let r = run_suite(&complex(m), 4).map_err(|e| format!("{name}: {e}"))?;
        if let Some(w) = r.witnesses().first() {
            return Err(format!("{name}: {w}"));
        }
        checked += r.outcomes.iter().map(|o| o.checked).sum::<usize>();
    }
    Ok(format!("{checked} checks on six models, degree ≤ 4"))
}

fn oracle_equivalence() -> Outcome {
    let mut rows = Vec::new();
    for m in bundled_models() {
        let name = m.name.clone();
        let cx = complex(m);
        let k = total_cohomology(&cx, 4).map_err(|e| e.to_string())?;
        let o = oracle_total(&cx, 4).map_err(|e| e.to_string())?;
        expect_dims(&name, &k.dims, &o.dims)?;
        rows.push(format!("{name} {:?}", k.dims));
    }
    Ok(rows.join("; "))
}

const POLYNOMIAL: [usize; 7] = [1, 0, 1, 0, 1, 0, 1];

fn classifying_space() -> Outcome {
    let cx = complex(model("BGm"));
    let k = total_cohomology(&cx, 6).map_err(|e| e.to_string())?;
    let c = cartan_total(&cx, 6).map_err(|e| e.to_string())?;
    expect_dims("Cartan model", &c.dims, &POLYNOMIAL)?;
    expect_dims("total cohomology", &k.dims, &c.dims)?;
    if !k.stabilized {
        return Err("sector truncation not stabilized".into());
    }
    Ok(format!("{:?} = Cartan", k.dims))
}

fn weighted_line() -> Outcome {
    let cx = complex(model("A1-mod-Gm"));
    let k = total_cohomology(&cx, 6).map_err(|e| e.to_string())?;
    let c = cartan_total(&cx, 6).map_err(|e| e.to_string())?;
    expect_dims("total cohomology", &k.dims, &POLYNOMIAL)?;
    expect_dims("Cartan model", &c.dims, &POLYNOMIAL)?;
    Ok(format!("{:?}", k.dims))
}

fn point_quotient() -> Outcome {
    let cx = complex(model("Gm-mod-Gm"));
    if cx.model().anchor()[0][0].is_zero() {
        return Err("anchor vanishes".into());
    }
    let k = total_cohomology(&cx, 3).map_err(|e| e.to_string())?;
    expect_dims("total cohomology", &k.dims, &[1, 0, 0, 0])?;
    Ok(format!("{:?} with invertible anchor", k.dims))
}

fn inversion_quotient() -> Outcome {
    let cx = complex(model("Gm-mod-Z2"));
    let k = total_cohomology(&cx, 2).map_err(|e| e.to_string())?;
    expect_dims("total cohomology", &k.dims, &[1, 0, 0])?;
    Ok(format!("{:?}", k.dims))
}

fn pages() -> Outcome {
    let cx = complex(model("BGm"));
    let p = spectral_pages(&cx, 6, 3).map_err(|e| e.to_string())?;
    let e1 = &p.pages[0];
    let got: Vec<(i64, i64, usize)> = e1.entries.iter().map(|e| (e.m, e.n, e.dim)).collect();
    let want: Vec<(i64, i64, usize)> = (0..=3).map(|k| (2 * k, 0, 1)).collect();
    if got != want {
        return Err(format!("E1 entries {got:?}"));
    }
    if !e1.differential_vanishes() {
        return Err("d1 is nonzero".into());
    }
    for page in p.pages.iter().skip(1).chain([&p.limit]) {
        if page.entries != e1.entries {
            return Err(format!("{} differs from E1", page.label()));
        }
    }
    let limit: Vec<usize> = (0..=6).map(|t| p.limit.degree(t)).collect();
    expect_dims("limit page", &limit, &POLYNOMIAL)?;
    Ok("E1 = E2 = E3 = Einf at (2k, 0)".into())
}

fn cup_products() -> Outcome {
    for (i, m) in bundled_models().into_iter().enumerate() {
        let name = m.name.clone();
        let r = cup_laws(&complex(m), 200, 100, 1000 + i as u64).map_err(|e| e.to_string())?;
        if let Some(w) = r.witnesses().first() {
            return Err(format!("{name}: {w}"));
        }
    }
    Ok("200 triples and 100 pairs per model".into())
}

fn naturality() -> Outcome {
    let (s, t) = (complex(model("BGm")), complex(model("A1-mod-Gm")));
    let m =
        Morphism::parse(s.model(), t.model(), GroupHom::Matrix(vec![vec![1]]), &["0"]).map_err(|e| e.to_string())?;
    let f = ComplexMap::new(&s, &t, m).map_err(|e| e.to_string())?;
    let r = commutation_report(&f, 4, 50, 9).map_err(|e| e.to_string())?;
    if let Some(w) = r.witnesses().first() {
        return Err(w.to_string());
    }
    let h = induced_map(&f, 4).map_err(|e| e.to_string())?;
    if !h.is_isomorphism() {
        return Err(format!("induced ranks {:?} between {:?} and {:?}", h.ranks, h.target_dims, h.source_dims));
    }
    Ok(format!("commutes; ranks {:?}", h.ranks))
}

fn flatness() -> Outcome {
    for m in bundled_models() {
        if matches!(m.kind, ModelKind::Transformation | ModelKind::Pair) && m.check_flatness() != Flatness::Flat {
            return Err(format!("{} rejected", m.name));
        }
    }
    let twisted = ModelConfig {
        family: "pair".into(),
        group: GroupConfig { kind: "additive".into(), coords: vec!["a".into(), "b".into()], ..Default::default() },
        frame: Some(vec![vec!["1".into(), "0".into()], vec!["ax^2".into(), "1".into()]]),
        ..Default::default()
    };
    let m = build_model(&twisted).map_err(|e| e.to_string())?;
    match m.check_flatness() {
        Flatness::NotInvolutive { i, j, bracket, .. } => Ok(format!("twisted frame rejected: [θ{i},θ{j}] = {bracket}")),
        other => Err(format!("twisted frame gave {other:?}")),
    }
}

fn mutations() -> Outcome {
    let mut caught = Vec::new();
    for (flip, conv) in SignConventions::single_flips() {
        let mut hit = None;
        for m in bundled_models() {
            let name = m.name.clone();
            let cx = complex(m.with_conventions(conv));
            let mut w = run_suite(&cx, 3).map_err(|e| e.to_string())?.witnesses();
            if w.is_empty() {
                w = cup_laws(&cx, 20, 20, 5).map_err(|e| e.to_string())?.witnesses();
            }
            if let Some(w) = w.into_iter().next() {
                hit = Some(format!("{name}: {}", w.identity));
                break;
            }
        }
        match hit {
            Some(h) => caught.push(format!("{flip} -> {h}")),
            None => return Err(format!("flipping {flip} went unnoticed")),
        }
    }
    Ok(caught.join(", "))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("identity suite", identity_suite),
        ("oracle equivalence", oracle_equivalence),
        ("BGm cohomology", classifying_space),
        ("[A1/Gm] cohomology", weighted_line),
        ("[Gm/Gm] cohomology", point_quotient),
        ("[Gm/Z2] cohomology", inversion_quotient),
        ("BGm spectral pages", pages),
        ("cup-product laws", cup_products),
        ("naturality", naturality),
        ("flatness semantics", flatness),
        ("mutation sensitivity", mutations),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
