//! Acceptance suite: runs the full 2 x 2 x 2 x 50 grid (n = 10, T = 500,
//! 10,000 trials per cell) plus the property checks, printing one PASS/FAIL
//! line per criterion. Exits non-zero if any criterion fails.

use std::fs;
use std::time::{Duration, Instant};

use fht_bench::algorithms::{compare_resampled, AlgorithmSpec, BudgetMeter, ResamplingRate};
use fht_bench::experiment::{
    best_r_summary, run_cell_trials, run_experiment, trial_stream, BestRSummary, ExperimentConfig,
};
use fht_bench::problems::{Genotype, NoiseModel, ProblemSpec};
use fht_bench::report::write_results_csv;
use fht_bench::StoppingRule::{self, FirstHittingTime as Fht, FixedBudget};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

const GRID_TIME_LIMIT: Duration = Duration::from_secs(120);

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: &str, ok: bool, detail: String) {
        println!("[{}] {id}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

fn best<'a>(summary: &'a [BestRSummary], problem: &str, alg: &str, rule: StoppingRule) -> &'a BestRSummary {
    summary
        .iter()
        .find(|s| s.problem == problem && s.algorithm == alg && s.rule == rule)
        .unwrap_or_else(|| panic!("missing summary for {problem}/{alg}/{rule}"))
}

fn fmt(s: &BestRSummary) -> String {
    format!("{:.2}% (r={})", s.best_rate * 100.0, s.best_r)
}

fn csv_bytes(rows: &[fht_bench::ResultRow]) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    write_results_csv(rows, &path).unwrap();
    fs::read(path).unwrap()
}

fn grid_criteria(report: &mut Report) {
    let cfg = ExperimentConfig::default();
    let started = Instant::now();
    let rows = run_experiment(&cfg, 1).unwrap();
    let elapsed = started.elapsed();
    let summary = best_r_summary(&rows).unwrap();
    println!(
        "full grid, single-threaded: {} rows in {:.1}s",
        rows.len(),
        elapsed.as_secs_f64()
    );
    for s in &summary {
        println!(
            "    {:<8} {:<8} {:<13} {}",
            s.problem,
            s.algorithm,
            s.rule,
            fmt(s)
        );
    }

    // 1
    let s = best(&summary, "onemax", "rmhc", Fht);
    report.check(
        "C1 onemax/rmhc/fht",
        (0.94..=1.0).contains(&s.best_rate) && s.best_r == 1 && elapsed < GRID_TIME_LIMIT,
        format!(
            "{} in [94%, 100%] at r=1; grid took {:.1}s (< 120s)",
            fmt(s),
            elapsed.as_secs_f64()
        ),
    );

    // 2
    let s = best(&summary, "onemax", "rmhc", FixedBudget);
    report.check(
        "C2 onemax/rmhc/fixed-budget",
        (0.60..=0.71).contains(&s.best_rate) && (4..=12).contains(&s.best_r),
        format!("{} in [60%, 71%], r in [4, 12]", fmt(s)),
    );

    // 3
    let e1 = best(&summary, "onemax", "opo-ea", Fht);
    let e2 = best(&summary, "onemax", "opo-ea", FixedBudget);
    report.check(
        "C3 onemax/opo-ea",
        (e1.best_rate - 0.8561).abs() <= 0.06
            && e1.best_r == 1
            && (e2.best_rate - 0.3898).abs() <= 0.06
            && (3..=9).contains(&e2.best_r),
        format!(
            "fht {} vs 85.61% +-6pp at r=1; fixed-budget {} vs 38.98% +-6pp, r in [3, 9]",
            fmt(e1),
            fmt(e2)
        ),
    );

    // 4
    let ea1 = best(&summary, "pmax", "opo-ea", Fht);
    let ea2 = best(&summary, "pmax", "opo-ea", FixedBudget);
    let rm1 = best(&summary, "pmax", "rmhc", Fht);
    let rm2 = best(&summary, "pmax", "rmhc", FixedBudget);
    report.check(
        "C4 pmax",
        (ea1.best_rate - 0.1956).abs() <= 0.05
            && ea1.best_r == 1
            && (rm1.best_rate - 0.2867).abs() <= 0.05
            && rm1.best_r == 1
            && ea2.best_rate <= 0.03
            && rm2.best_rate <= 0.03
            && (8..=30).contains(&ea2.best_r)
            && (8..=30).contains(&rm2.best_r),
        format!(
            "opo-ea fht {} vs 19.56% +-5pp; rmhc fht {} vs 28.67% +-5pp; fixed-budget opo-ea {}, rmhc {} (<= 3%, r in [8, 30])",
            fmt(ea1),
            fmt(rm1),
            fmt(ea2),
            fmt(rm2)
        ),
    );

    // 5
    let mut ok = true;
    let mut detail = Vec::new();
    for problem in ["onemax", "pmax"] {
        for alg in ["opo-ea", "rmhc"] {
            let e1 = best(&summary, problem, alg, Fht);
            let e2 = best(&summary, problem, alg, FixedBudget);
            let gap = e1.best_rate - e2.best_rate;
            ok &= gap >= 0.15 && e2.best_r > e1.best_r;
            detail.push(format!(
                "{problem}/{alg} gap {:.1}pp r {}->{}",
                gap * 100.0,
                e1.best_r,
                e2.best_r
            ));
        }
    }
    report.check("C5 fht overestimates and under-resamples", ok, detail.join("; "));

    // 9 (full grid, threads 1 vs 8, plus two repeated runs of a smaller grid)
    let parallel = run_experiment(&cfg, 8).unwrap();
    let small = ExperimentConfig {
        trials: 300,
        ..ExperimentConfig::default()
    };
    let a = csv_bytes(&run_experiment(&small, 1).unwrap());
    let b = csv_bytes(&run_experiment(&small, 1).unwrap());
    let full_1 = csv_bytes(&rows);
    let full_8 = csv_bytes(&parallel);
    report.check(
        "C9 determinism",
        a == b && full_1 == full_8,
        format!(
            "repeat runs identical: {}; full grid 1 vs 8 threads identical: {} ({} bytes)",
            a == b,
            full_1 == full_8,
            full_1.len()
        ),
    );
}

fn comparison_oracle(report: &mut Report) {
    const N: u32 = 100_000;
    let phi = Normal::standard();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut seed = 0u64;
    // (true-fitness gap in bits, noise sd): d = gap / sd in {0, 0.5, 1, 2}
    for (gap, sd) in [(0usize, 1.0), (1, 2.0), (1, 1.0), (2, 1.0)] {
        let spec = ProblemSpec::one_max(10, NoiseModel::new(0.0, sd).unwrap()).unwrap();
        let incumbent = Genotype::from_value(0b1111100000, 10).unwrap();
        let mut challenger = incumbent.clone();
        for i in 0..gap {
            challenger.flip(5 + i);
        }
        for r in [1u32, 5, 25] {
            seed += 1;
            let rate = ResamplingRate::new(r).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut accepted = 0u32;
            for _ in 0..N {
                let mut meter = BudgetMeter::new(rate.evals_per_comparison()).unwrap();
                accepted += compare_resampled(&spec, &challenger, &incumbent, rate, &mut meter, &mut rng)
                    .unwrap() as u32;
            }
            let empirical = accepted as f64 / N as f64;
            let d = gap as f64 / sd;
            let expected = phi.cdf(d * (r as f64 / 2.0).sqrt());
            worst = worst.max((empirical - expected).abs());
            ok &= (empirical - expected).abs() <= 0.01;
        }
    }

    // P_win closest to 1/2 at n = 10 is 511/1023; accept iff not (loss, win).
    let spec = ProblemSpec::pmax(10).unwrap();
    let x = Genotype::from_value(511, 10).unwrap();
    let rate = ResamplingRate::new(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut accepted = 0u32;
    for _ in 0..N {
        let mut meter = BudgetMeter::new(2).unwrap();
        accepted += compare_resampled(&spec, &x, &x, rate, &mut meter, &mut rng).unwrap() as u32;
    }
    let pmax_rate = accepted as f64 / N as f64;
    ok &= (pmax_rate - 0.75).abs() <= 0.01;
    report.check(
        "C6 comparison oracle",
        ok,
        format!("max |empirical - Phi(d*sqrt(r/2))| = {worst:.4} (<= 0.01); pmax self-comparison {pmax_rate:.4} vs 0.75 +-0.01"),
    );
}

fn budget_invariants(report: &mut Report) {
    let cfg = ExperimentConfig {
        trials: 100,
        ..ExperimentConfig::default()
    };
    let mut checked = 0u64;
    let mut violations = 0u64;
    for cell in cfg.cells() {
        let per = cell.r.evals_per_comparison();
        for t in run_cell_trials(&cfg, &cell).unwrap() {
            checked += 1;
            let over = t.evals_used > cfg.budget;
            let wrong_e2 = cell.rule == FixedBudget && t.evals_used != per * (cfg.budget / per);
            violations += (over || wrong_e2) as u64;
        }
    }
    report.check(
        "C7 budget invariants",
        violations == 0,
        format!(
            "{checked} trials across {} cells, {violations} violations",
            cfg.cells().len()
        ),
    );
}

fn paired_dominance(report: &mut Report) {
    let cfg = ExperimentConfig {
        trials: 1_000,
        paired_streams: true,
        ..ExperimentConfig::default()
    };
    let cells = cfg.cells();
    let mut pairs = 0u64;
    let mut violations = 0u64;
    for e2 in cells.iter().filter(|c| c.rule == FixedBudget) {
        let e1 = cells
            .iter()
            .find(|c| c.rule == Fht && c.stream_cell == e2.stream_cell)
            .expect("paired cell");
        let fixed = run_cell_trials(&cfg, e2).unwrap();
        let fht = run_cell_trials(&cfg, e1).unwrap();
        for (a, b) in fixed.iter().zip(&fht) {
            pairs += 1;
            violations += (a.success && !b.success) as u64;
        }
    }
    report.check(
        "C8 paired-seed dominance",
        violations == 0 && pairs >= 1_000,
        format!("{pairs} paired trials, {violations} with fixed-budget success but no fht success"),
    );
}

fn noiseless_sanity(report: &mut Report) {
    let spec = ProblemSpec::one_max(10, NoiseModel::noiseless()).unwrap();
    let r = ResamplingRate::new(1).unwrap();
    let mut solved = 0u32;
    for t in 0..10_000u64 {
        let mut rng = trial_stream(12345, 0, t);
        let res =
            fht_bench::algorithms::run_trial(&AlgorithmSpec::Rmhc, &spec, FixedBudget, r, 500, &mut rng)
                .unwrap();
        solved += res.success as u32;
    }
    let rate = solved as f64 / 10_000.0;
    report.check(
        "C10 noiseless onemax",
        rate >= 0.99,
        format!("rmhc fixed-budget r=1 success {:.2}% (>= 99%)", rate * 100.0),
    );
}

fn main() {
    let mut report = Report { failures: 0 };
    grid_criteria(&mut report);
    comparison_oracle(&mut report);
    budget_invariants(&mut report);
    paired_dominance(&mut report);
    noiseless_sanity(&mut report);
    if report.failures > 0 {
        println!("{} acceptance criteria failed", report.failures);
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
