use std::time::Instant;

use proptest::prelude::*;
use rpfista::bench::{
    atr_against, compute_atr, emit_csv, emit_markdown, fmt_sci, parse_csv, parse_methods, run_benchmark, suite_atr,
    BenchOptions, Method, RunRecord, RunSettings, RunStatus,
};
use rpfista::problems::preset;

fn record(instance: &str, method: &str, status: RunStatus, iters: u64, runtime_s: f64, rel: f64) -> RunRecord {
    RunRecord {
        instance_id: instance.into(),
        family: "qp-box".into(),
        m: 10,
        n: 20,
        param: "mu=1e-2 L=1e2 a=last1".into(),
        method: method.into(),
        status,
        iters,
        prox_evals: iters,
        grad_evals: 2 * iters,
        runtime_s,
        rel_residual: rel,
        seed: 3,
    }
}

#[test]
fn one_instance_two_methods_gives_two_rows() {
    let suite = preset("lasso", "smoke", 1).unwrap();
    let methods = parse_methods("rpf-sfista,fista-bt").unwrap();
    let recs = run_benchmark(&suite[..1], &methods, &BenchOptions::default()).unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0].method, "rpf-sfista");
    assert_eq!(recs[1].method, "fista-bt");
    assert!(recs.iter().all(|r| r.converged() && r.rel_residual <= 1e-8));
}

#[test]
fn infinite_tolerance_converges_in_one_iteration() {
    let suite = preset("qp-box", "smoke", 4).unwrap();
    let opts = BenchOptions { settings: RunSettings { eps_hat: f64::INFINITY, ..RunSettings::default() }, trace_dir: None };
    let recs = run_benchmark(&suite, &Method::ALL, &opts).unwrap();
    assert_eq!(recs.len(), suite.len() * Method::ALL.len());
    assert!(recs.iter().all(|r| r.status == RunStatus::Converged && r.iters == 1));
}

#[test]
fn method_list_parsing() {
    assert_eq!(parse_methods("rpf-sfista,fista-bt,fista-r,rada,greedy").unwrap(), Method::ALL.to_vec());
    assert!(parse_methods("rpf-sfista,rpf-sfista").is_err());
    assert!(parse_methods("fista-xyz").is_err());
    assert!(parse_methods("").is_err());
}

#[test]
fn atr_examples() {
    assert_eq!(compute_atr(&[Some(10.0)], &[Some(5.0)], 100.0).unwrap(), 2.0);
    assert_eq!(compute_atr(&[None, Some(4.0)], &[Some(10.0), Some(4.0)], 100.0).unwrap(), 5.5);
    assert!(compute_atr(&[], &[], 1.0).is_err());
    assert!(compute_atr(&[Some(1.0)], &[], 1.0).is_err());
    // a zero runtime is floored at one tick
    assert!(compute_atr(&[Some(1.0)], &[Some(0.0)], 1.0).unwrap().is_finite());
}

#[test]
fn atr_pairs_rows_by_instance() {
    let recs = vec![
        record("a", "rpf-sfista", RunStatus::Converged, 10, 1.0, 1e-9),
        record("b", "rpf-sfista", RunStatus::Converged, 10, 2.0, 1e-9),
        record("b", "fista-bt", RunStatus::TimeCap, 99, 50.0, 1e-3),
        record("a", "fista-bt", RunStatus::Converged, 30, 3.0, 1e-9),
        record("a", "rada", RunStatus::Converged, 12, 1.5, 1e-9),
        record("b", "rada", RunStatus::Converged, 12, 1.0, 1e-9),
    ];
    assert_eq!(atr_against(&recs, "rpf-sfista", "fista-bt", 50.0).unwrap(), (3.0 + 25.0) / 2.0);
    assert_eq!(atr_against(&recs, "rpf-sfista", "rada", 50.0).unwrap(), 1.0);
    assert_eq!(suite_atr(&recs, "rpf-sfista", 50.0).unwrap(), ("rada".to_string(), 1.0));
    assert!(atr_against(&recs, "rpf-sfista", "greedy", 50.0).is_err());
}

#[test]
fn markdown_cells() {
    let recs = vec![
        record("a", "rpf-sfista", RunStatus::Converged, 10, 1.0, 1e-9),
        record("a", "fista-bt", RunStatus::Converged, 10, 2.0, 1e-9),
        record("a", "rada", RunStatus::IterCap, 10, 0.5, 1.3e-7),
    ];
    let md = emit_markdown(&recs);
    let lines: Vec<&str> = md.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].contains("rpf-sfista") && lines[0].contains("rada"));
    // tied iteration counts are both bold; a failed run is not eligible
    assert!(lines[2].contains("**10**/**1.00**"));
    assert!(lines[2].contains("**10**/2.00"));
    assert!(lines[2].contains("*/1.3e-07"));
    assert_eq!(fmt_sci(1.3e-7), "1.3e-07");
    assert_eq!(fmt_sci(2.0e12), "2.0e+12");
}

#[test]
fn csv_header_and_errors() {
    let empty = emit_csv(&[]).unwrap();
    assert!(empty.starts_with("instance_id,family,m,n,param,method,status"));
    assert!(parse_csv(&empty).unwrap().is_empty());
    assert!(parse_csv("a,b\n1,2\n").is_err());
    let mut text = emit_csv(&[record("a", "rada", RunStatus::Converged, 1, 0.1, 1e-9)]).unwrap();
    text.push_str("a,qp-box,1,2,p,rada,bogus,1,1,1,0.1,1e-9,3\n");
    assert!(parse_csv(&text).is_err());
}

#[test]
fn trace_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let suite = preset("lasso", "smoke", 2).unwrap();
    let opts = BenchOptions { settings: RunSettings::default(), trace_dir: Some(dir.path().join("traces")) };
    let methods = [Method::RpfSfista, Method::GreedyFista];
    run_benchmark(&suite[..2], &methods, &opts).unwrap();
    for s in &suite[..2] {
        for m in methods {
            let path = dir.path().join("traces").join(format!("{}_{m}.csv", s.id));
            let text = std::fs::read_to_string(&path).unwrap();
            assert!(text.lines().count() > 1, "{}", path.display());
        }
    }
}

#[test]
fn logistic_desk_with_every_method() {
    let start = Instant::now();
    let suite = preset("logistic", "desk", 42).unwrap();
    let recs = run_benchmark(&suite, &Method::ALL, &BenchOptions::default()).unwrap();
    assert_eq!(recs.len(), suite.len() * 5);
    assert!(recs.iter().all(|r| r.converged()));
    assert!(start.elapsed().as_secs() < 300);
}

fn status() -> impl Strategy<Value = RunStatus> {
    prop_oneof![
        Just(RunStatus::Converged),
        Just(RunStatus::IterCap),
        Just(RunStatus::TimeCap),
        Just(RunStatus::Error)
    ]
}

fn any_record() -> impl Strategy<Value = RunRecord> {
    (
        "[a-z0-9-]{1,12}",
        "[a-z =.,\"-]{0,16}",
        prop::sample::select(vec!["rpf-sfista", "fista-bt", "fista-r", "rada", "greedy"]),
        status(),
        any::<u64>(),
        0.0f64..1e4,
        prop_oneof![Just(f64::NAN), Just(f64::INFINITY), 1e-16f64..1.0],
        (any::<usize>(), any::<usize>(), any::<u64>()),
    )
        .prop_map(|(id, param, method, status, iters, runtime_s, rel_residual, (m, n, seed))| RunRecord {
            instance_id: id,
            family: "logistic".into(),
            m,
            n,
            param,
            method: method.into(),
            status,
            iters,
            prox_evals: iters / 2,
            grad_evals: iters / 3,
            runtime_s,
            rel_residual,
            seed,
        })
}

fn same(a: &RunRecord, b: &RunRecord) -> bool {
    let rel_eq = a.rel_residual == b.rel_residual || (a.rel_residual.is_nan() && b.rel_residual.is_nan());
    RunRecord { rel_residual: 0.0, ..a.clone() } == RunRecord { rel_residual: 0.0, ..b.clone() } && rel_eq
}

proptest! {
    #[test]
    fn csv_round_trip(recs in prop::collection::vec(any_record(), 0..20)) {
        let back = parse_csv(&emit_csv(&recs).unwrap()).unwrap();
        prop_assert_eq!(back.len(), recs.len());
        for (a, b) in recs.iter().zip(&back) {
            prop_assert!(same(a, b), "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn atr_is_permutation_invariant(
        pairs in prop::collection::vec((prop::option::of(1e-3f64..100.0), prop::option::of(1e-3f64..100.0)), 1..30),
        seed in any::<u64>(),
    ) {
        let (b, r): (Vec<_>, Vec<_>) = pairs.iter().cloned().unzip();
        let mut idx: Vec<usize> = (0..pairs.len()).collect();
        let mut rng = rpfista::problems::seeded_rng(seed);
        rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
        let bp: Vec<_> = idx.iter().map(|&i| b[i]).collect();
        let rp: Vec<_> = idx.iter().map(|&i| r[i]).collect();
        let x = compute_atr(&b, &r, 100.0).unwrap();
        let y = compute_atr(&bp, &rp, 100.0).unwrap();
        prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
    }
}
