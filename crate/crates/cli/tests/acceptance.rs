//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p seriation-cli --test acceptance`. Each criterion also has
//! a wall-clock budget; exceeding it counts as a failure.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;
use seriation_core::graphon::nice_catalog;
use seriation_core::postproc::fhat_compare;
use seriation_core::rng::stream;
use seriation_core::spectral::DEFAULT_TOLERANCE;
use seriation_core::*;
use tempfile::TempDir;

type Outcome = std::result::Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn noiseless_exactness() -> Outcome {
    let mut checked = 0;
    for n in [50, 200, 500] {
        for band in [3, n / 10] {
            let g = SampledGraph::banded(n, band);
            let sigma = lib(spectral_seriation(&g, DEFAULT_TOLERANCE))?;
            let id = Ordering::identity(n);
            ensure(sigma == id || sigma == id.reverse(), || format!("N={n} b={band}: not the identity or its reversal"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} banded graphs recovered exactly"))
}

fn random_laplacian(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    let density = rng.gen_range(0.02..0.6);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut w = DenseMatrix::zeros(n);
    for p in order.windows(2) {
        let x = rng.gen_range(0.1..1.0);
        w.set(p[0], p[1], x);
        w.set(p[1], p[0], x);
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                let x = w.get(i, j) + rng.gen_range(0.0..1.0);
                w.set(i, j, x);
                w.set(j, i, x);
            }
        }
    }
    w
}

fn eigensolver_oracle() -> Outcome {
    let mut rng = stream(0xacce_0002);
    let (mut worst_value, mut worst_vector) = (0.0f64, 0.0f64);
    for case in 0..100 {
        let n = rng.gen_range(3..=500);
        let l = lib(laplacian(&random_laplacian(&mut rng, n)))?;
        let res = lib(fiedler_pair(&l, DEFAULT_TOLERANCE))?;
        let dense = l.to_dense();
        let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| dense.get(i, j)));
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let value_err = (res.fiedler_value() - eig.eigenvalues[idx[1]]).abs();
        let v = eig.eigenvectors.column(idx[1]);
        let plus: f64 = res.fiedler.iter().zip(v.iter()).map(|(a, b)| (a - b).powi(2)).sum();
        let minus: f64 = res.fiedler.iter().zip(v.iter()).map(|(a, b)| (a + b).powi(2)).sum();
        let vector_err = plus.min(minus).sqrt();
        ensure(value_err <= 1e-6, || format!("case {case} (n={n}): eigenvalue error {value_err:e}"))?;
        ensure(vector_err <= 1e-5, || format!("case {case} (n={n}): vector error {vector_err:e}"))?;
        worst_value = worst_value.max(value_err);
        worst_vector = worst_vector.max(vector_err);
    }
    Ok(format!("100 Laplacians, worst eigenvalue error {worst_value:.1e}, worst vector error {worst_vector:.1e}"))
}

fn experiment(dir: &TempDir, n_list: Vec<usize>, algorithm: Algorithm, seed: u64) -> std::result::Result<ExperimentOutcome, String> {
    let mut cfg = ExperimentConfig::new("affine-distance:a=0.8,b=1", n_list, algorithm, seed, dir.path().join("run.csv"));
    cfg.trials = 20;
    let out = lib(run_experiment(&cfg))?;
    let failed = out.records.iter().filter(|r| !r.is_ok()).count();
    ensure(failed == 0, || format!("{failed} trials failed"))?;
    Ok(out)
}

fn spectral_rate() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let ns = vec![200, 400, 800, 1600];
    let out = experiment(&dir, ns.clone(), Algorithm::Spectral, 0xacce_0003)?;
    let norm: Vec<f64> = ns.iter().map(|&n| out.median(RunKind::Spectral, n, "l1_normalized").unwrap()).collect();
    ensure(norm.windows(2).all(|w| w[1] < w[0]), || format!("median L1/n^2 not decreasing: {norm:?}"))?;
    let slope = out.slope(RunKind::Spectral, "l1_error").ok_or("no slope fitted")?;
    ensure(slope <= 1.95, || format!("L1 slope {slope:.3} > 1.95"))?;
    Ok(format!("median L1/n^2 {norm:?}, slope {slope:.3}"))
}

fn postprocessed_rate() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let ns = vec![600, 1200, 2400];
    let out = experiment(&dir, ns.clone(), Algorithm::Postprocessed, 0xacce_0004)?;
    let norm: Vec<f64> =
        ns.iter().map(|&n| out.median(RunKind::Postprocessed, n, "linf_normalized").unwrap()).collect();
    ensure(norm.windows(2).all(|w| w[1] < w[0]), || format!("median Linf/n not decreasing: {norm:.4?}"))?;
    let ratios: Vec<f64> = norm.windows(2).map(|w| w[1] / w[0]).collect();
    ensure(ratios.iter().all(|&r| r <= 0.85), || format!("doubling ratios of Linf/n {ratios:.3?} exceed 0.85"))?;
    Ok(format!("median Linf/n {norm:.4?}, doubling ratios {ratios:.3?}"))
}

fn fiedler_monotone_and_gap() -> Outcome {
    let mut worst = 0.0f64;
    for (name, g) in nice_catalog() {
        let mut gaps = Vec::new();
        for res in [200, 500, 1000] {
            let r = lib(discretized_graphon_laplacian(&g, res).and_then(|l| fiedler_pair(&l, DEFAULT_TOLERANCE)))?;
            ensure(r.fiedler.windows(2).all(|w| w[1] > w[0]), || format!("{name}: Fiedler vector not increasing at {res}"))?;
            gaps.push(r.gap3);
        }
        let change = (gaps[2] - gaps[1]).abs() / gaps[1];
        ensure(change <= 0.25, || format!("{name}: gap changed by {:.1}% from 500 to 1000", 100.0 * change))?;
        worst = worst.max(change);
    }
    Ok(format!("{} graphons monotone, largest gap change {:.2}%", nice_catalog().len(), 100.0 * worst))
}

fn laplacian_convergence() -> Outcome {
    let mut parts = Vec::new();
    for a in [0.8, 1.0] {
        let g = lib(Graphon::affine_distance(a, 1.0))?;
        let study = lib(laplacian_convergence_study(&g, &[50, 100, 200, 400, 800]))?;
        for row in &study.rows {
            let bound = row.bound.ok_or("missing Lipschitz constant")?;
            ensure(row.norm_diff <= bound, || format!("a={a}, n={}: diff {:.3e} > 4K/n {bound:.3e}", row.n, row.norm_diff))?;
        }
        let slope = study.slope.ok_or("no slope fitted")?;
        ensure((slope + 1.0).abs() <= 0.3, || format!("a={a}: slope {slope:.3} outside -1 +/- 0.3"))?;
        parts.push(format!("a={a} slope {slope:.3}"));
    }
    Ok(parts.join(", "))
}

fn assumption_suite() -> Outcome {
    let cfg = SplitConfig::default();
    for (name, g) in nice_catalog() {
        let r = lib(check_assumptions(&g, cfg, 1000))?;
        ensure(r.all_ok(), || format!("{name} failed {:?}", r.failures()))?;
    }
    let step = lib(Graphon::step(0.7, 0.5).and_then(|g| check_assumptions(&g, cfg, 1000)))?;
    ensure(!step.derivative_nonzero_ok, || "step graphon passed the derivative check".into())?;
    Ok(format!("{} nice graphons pass; step graphon fails {:?}", nice_catalog().len(), step.failures()))
}

const TRIALS: usize = 10_000;

fn random_ordering(rng: &mut impl Rng, n: usize) -> Ordering {
    let mut ranks: Vec<usize> = (1..=n).collect();
    ranks.shuffle(rng);
    Ordering::from_ranks(ranks).expect("a permutation")
}

fn combinatorial_invariants() -> Outcome {
    let mut rng = stream(0xacce_0008);
    for t in 0..TRIALS {
        let s = rng.gen_range(2..12);
        let t_size = rng.gen_range(5..40u32);
        let mut counts = || (0..s).map(|_| rng.gen_range(0..=t_size)).collect::<Vec<u32>>();
        let (r, l) = (counts(), counts());
        let cut = (rng.gen_range(0..=t_size), rng.gen_range(0..=t_size));
        let vertices: Vec<usize> = (1..=s).collect();
        let stats = lib(NeighborStats::from_counts(vertices.clone(), r, l, t_size as usize, Some(cut)))?;
        for &u in &vertices {
            for &v in &vertices {
                if u != v {
                    let (a, b) = (lib(fhat_compare(&stats, u, v))?, lib(fhat_compare(&stats, v, u))?);
                    ensure(a == -b, || format!("trial {t}: F({u},{v}) = {a}, F({v},{u}) = {b}"))?;
                }
            }
        }
    }

    for t in 0..TRIALS {
        let n = rng.gen_range(3..60);
        let part = lib(sample_good_partition(n, rng.gen()))?;
        let parts: Vec<Ordering> = part
            .parts()
            .iter()
            .map(|s| {
                let mut by_rank = s.clone();
                by_rank.shuffle(&mut rng);
                Ordering::from_vertices_by_rank(&by_rank).expect("a permutation")
            })
            .collect();
        let merged = lib(merge_orderings([&parts[0], &parts[1], &parts[2]], n))?;
        let ranks: BTreeSet<usize> = merged.ranks().iter().copied().collect();
        ensure(merged.len() == n && ranks.len() == n && ranks.iter().next_back() == Some(&n), || {
            format!("trial {t}: merged ordering is not a bijection on 1..{n}")
        })?;
    }

    for t in 0..TRIALS {
        let n = rng.gen_range(1..80);
        let (a, b) = (random_ordering(&mut rng, n), random_ordering(&mut rng, n));
        ensure(a.reverse().reverse() == a, || format!("trial {t}: reverse is not an involution"))?;
        let same = lib(l1_distance(&a, &b, true))? == lib(l1_distance(&a.reverse(), &b, true))?
            && lib(linf_distance(&a, &b, true))? == lib(linf_distance(&a.reverse(), &b, true))?;
        ensure(same, || format!("trial {t}: symmetrised metric changed under reversal"))?;
    }

    for t in 0..TRIALS {
        let n = rng.gen_range(1..300);
        let pi = random_ordering(&mut rng, n);
        let d = kendall_tau(&pi) as f64;
        let l1 = lib(l1_distance(&pi, &Ordering::identity(n), false))?;
        ensure(d <= l1 && l1 <= 2.0 * d, || format!("trial {t}: D = {d}, L1 = {l1}"))?;
    }

    let n = 900usize;
    let bound = 3.0 * ((n as f64).ln().powf(1.1) / n as f64).sqrt();
    let mut passed = 0usize;
    for _ in 0..TRIALS {
        let part = lib(sample_good_partition(n, rng.gen()))?;
        let s = part.part(rng.gen_range(0..3));
        let m = s.len() as f64;
        let dev = s
            .iter()
            .enumerate()
            .map(|(k, &v)| (v as f64 / n as f64 - (k + 1) as f64 / m).abs())
            .fold(0.0, f64::max);
        passed += (dev <= bound) as usize;
    }
    let rate = passed as f64 / TRIALS as f64;
    ensure(rate >= 0.999, || format!("order-statistic concentration held in {:.2}% of parts", 100.0 * rate))?;
    Ok(format!("5 x {TRIALS} property trials; order statistics within bound in {:.2}% of parts", 100.0 * rate))
}

fn cli_determinism() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let run = |name: &str| -> std::result::Result<(Vec<u8>, Vec<u8>), String> {
        let out = dir.path().join(format!("{name}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_seriation"))
            .args(["experiment", "--graphon", "affine-distance:a=0.8,b=1", "--n-list", "100,200,400"])
            .args(["--trials", "4", "--algorithm", "both", "--seed", "2024", "--threads", "3", "--output"])
            .arg(&out)
            .env("RUST_LOG", "error")
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("experiment exited with {status}"))?;
        let read = |p| std::fs::read(p).map_err(|e| e.to_string());
        Ok((read(&out)?, read(&dir.path().join(format!("{name}.summary.csv")))?))
    };
    let (a, b) = (run("first")?, run("second")?);
    ensure(a.0 == b.0, || "trial CSVs differ".into())?;
    ensure(a.1 == b.1, || "summary CSVs differ".into())?;
    Ok(format!("two runs gave byte-identical CSVs ({} and {} bytes)", a.0.len(), a.1.len()))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "noiseless exactness", budget: Duration::from_secs(5), run: noiseless_exactness },
        Criterion { id: 2, name: "eigensolver oracle", budget: Duration::from_secs(60), run: eigensolver_oracle },
        Criterion { id: 3, name: "spectral L1 rate", budget: Duration::from_secs(600), run: spectral_rate },
        Criterion { id: 4, name: "post-processed sup rate", budget: Duration::from_secs(1200), run: postprocessed_rate },
        Criterion { id: 5, name: "Fiedler monotonicity and gap", budget: Duration::from_secs(120), run: fiedler_monotone_and_gap },
        Criterion { id: 6, name: "Laplacian convergence", budget: Duration::from_secs(120), run: laplacian_convergence },
        Criterion { id: 7, name: "assumption suite", budget: Duration::from_secs(300), run: assumption_suite },
        Criterion { id: 8, name: "combinatorial invariants", budget: Duration::from_secs(180), run: combinatorial_invariants },
        Criterion { id: 9, name: "CLI determinism", budget: Duration::from_secs(120), run: cli_determinism },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(detail) if elapsed <= c.budget => ("PASS", detail),
            Ok(detail) => ("FAIL", format!("{detail}; took {elapsed:.1?}, budget {:?}", c.budget)),
            Err(msg) => ("FAIL", msg),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("{status} criterion {} ({}) [{:.1?}]: {detail}", c.id, c.name, elapsed);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
