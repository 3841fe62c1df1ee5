//! Exit criteria. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use ebhotelling::dist::{
    f_cdf, inv_wishart_ln_pdf, sample_wishart, wishart_ln_pdf, FParams, InvWishartSampler,
    RngStream,
};
use ebhotelling::matrix::{Matrix, SpdMatrix};
use ebhotelling::model::{
    fit_wishart_prior, gene_log_marginal, FitConfig, GeneSample, Prior, SimplePrior, WishartPrior,
};
use ebhotelling::multiplicity::bh_select;
use ebhotelling::sim::{
    gen_model_dataset, run_benchmark, solve_theta, SimConfig, SimSummary, CURVE_STEP,
};
use ebhotelling::stats::{
    ht2, make_contrast, run_tests, sh_ht2, sh_ut2, ut2, ContrastKind, Method, TestOptions,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn random_spd(rng: &mut RngStream, d: usize) -> SpdMatrix {
    let b: Vec<f64> = (0..d * d).map(|_| rng.std_normal()).collect();
    let b = Matrix::from_row_major(d, d, b).unwrap();
    let mut m = &b * &b.transpose();
    for i in 0..d {
        m[(i, i)] += 0.5;
    }
    SpdMatrix::new(m).unwrap()
}

fn random_gene(rng: &mut RngStream, n: usize, d: usize) -> GeneSample {
    let values: Vec<f64> = (0..n * d).map(|_| rng.std_normal() + 0.3).collect();
    GeneSample::new("g", Matrix::from_row_major(n, d, values).unwrap()).unwrap()
}

fn ks_uniform(mut p: Vec<f64>) -> f64 {
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    p.iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

fn null_calibration() -> Outcome {
    let start = Instant::now();
    let config = SimConfig {
        genes: 5000,
        true_positives: 0,
        reps: 1,
        ..SimConfig::paper_model()
    };
    let data = gen_model_dataset(&config, 0).unwrap();
    let c = make_contrast(ContrastKind::ZeroMeans, 2).unwrap();
    let prior = Prior::Wishart(config.prior.clone());
    let run = run_tests(
        &data.samples,
        Method::ShHT2,
        &c,
        Some(&prior),
        &TestOptions::default(),
    )
    .unwrap();
    let p: Vec<f64> = run.results.iter().map(|r| r.pvalue).collect();
    let ks = ks_uniform(p);
    let elapsed = start.elapsed();
    Outcome::new(
        ks < 0.02 && elapsed < Duration::from_secs(30),
        format!(
            "KS = {ks:.4} (< 0.02), {:.1} s (< 30 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn reduction_identities() -> Outcome {
    let mut rng = RngStream::new(2, 0);
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for g in 0..1000 {
        let d = 2 + g % 3;
        let n = d + 2 + g % 4;
        let gene = random_gene(&mut rng, n, d);
        let c = make_contrast(ContrastKind::ZeroMeans, d).unwrap();
        let tiny =
            WishartPrior::relaxed(SpdMatrix::identity(d).scale(1e-12).unwrap(), d as f64 + 1.0)
                .unwrap();
        let sh = sh_ht2(&gene, &tiny, &c).unwrap();
        let classical = ht2(&gene, &c).unwrap();
        worst = worst.max(rel_err(sh.statistic, classical.statistic));
        let flat = SimplePrior::relaxed(0.0, 0.0).unwrap();
        let (a, b) = (sh_ut2(&gene, &flat).unwrap(), ut2(&gene).unwrap());
        exact &=
            a.statistic == b.statistic && a.df1 == b.df1 && a.df2 == b.df2 && a.pvalue == b.pvalue;
    }
    Outcome::new(
        worst <= 1e-6 && exact,
        format!("max rel |ShHT2 - HT2| = {worst:.2e} (<= 1e-6), ShUT2 == UT2 exactly: {exact}"),
    )
}

fn conjugacy_identity() -> Outcome {
    let mut rng = RngStream::new(3, 0);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let d = 1 + k % 4;
        let n = d + 1 + k % 5;
        let nu = 2.0 * d as f64 + 0.2 + 8.0 * rng.uniform();
        let lambda = random_spd(&mut rng, d);
        let sigma = random_spd(&mut rng, d);
        let a = sample_wishart(&mut rng, (n - 1) as f64, &sigma).unwrap();
        let prior = WishartPrior::new(lambda.clone(), nu).unwrap();
        let post_lambda = SpdMatrix::new(lambda.matrix() + a.matrix()).unwrap();
        let lhs = wishart_ln_pdf(&a, (n - 1) as f64, &sigma).unwrap()
            + inv_wishart_ln_pdf(&sigma, nu, &lambda).unwrap();
        let rhs = inv_wishart_ln_pdf(&sigma, nu + (n - 1) as f64, &post_lambda).unwrap()
            + gene_log_marginal(&prior, a.matrix(), n).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    Outcome::new(
        worst <= 1e-8,
        format!("max |joint - posterior - marginal| = {worst:.2e} (<= 1e-8)"),
    )
}

fn prior_recovery() -> Outcome {
    let start = Instant::now();
    let base = SimConfig {
        true_positives: 0,
        reps: 1,
        ..SimConfig::paper_model()
    };
    let truth = base.prior.clone();
    let seeds = 5;
    let (mut nu_sum, mut lambda_sum) = (0.0, Matrix::zeros(2, 2));
    for seed in 0..seeds {
        let config = SimConfig {
            seed: 1000 + seed,
            ..base.clone()
        };
        let data = gen_model_dataset(&config, 0).unwrap();
        let fit = fit_wishart_prior(&data.samples, &FitConfig::default()).unwrap();
        let p = fit.prior.as_wishart().unwrap();
        nu_sum += p.nu();
        lambda_sum = &lambda_sum + p.lambda().matrix();
    }
    let nu_hat = nu_sum / seeds as f64;
    let lambda_hat = lambda_sum.scale(1.0 / seeds as f64);
    let mut errs = vec![("nu".to_string(), rel_err(nu_hat, truth.nu()))];
    for i in 0..2 {
        for j in 0..=i {
            errs.push((
                format!("L{i}{j}"),
                rel_err(lambda_hat[(i, j)], truth.lambda().matrix()[(i, j)]),
            ));
        }
    }
    let elapsed = start.elapsed();
    let worst = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    let listed: Vec<String> = errs
        .iter()
        .map(|(k, e)| format!("{k} {:.1}%", 100.0 * e))
        .collect();
    Outcome::new(
        worst <= 0.05 && elapsed < Duration::from_secs(120),
        format!(
            "nu_hat {nu_hat:.4} vs {:.4}; rel errors {} (<= 5%), {:.1} s (< 120 s)",
            truth.nu(),
            listed.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn theta_solve() -> Outcome {
    match solve_theta(0.90, 0.0026, 6.0, 4.0, 3.0) {
        Ok(theta) => Outcome::new(
            (theta - 7.5).abs() <= 0.2,
            format!("theta = {theta:.4} (7.5 +- 0.2)"),
        ),
        Err(e) => Outcome::new(false, format!("solve_theta failed: {e}")),
    }
}

fn rate(s: &SimSummary, method: Method, fdr: f64) -> (f64, f64) {
    let r = s.row(method, fdr).expect("grid point");
    (r.etpr, r.efpr)
}

fn table_one(s: &SimSummary, elapsed: Duration) -> Outcome {
    let grid = SimConfig::paper_model().fdr_grid;
    let (etpr, efpr) = rate(s, Method::ShHT2, 0.05);
    let at_005 = (etpr - 0.929).abs() <= 0.03 && (efpr - 0.045).abs() <= 0.03;
    let tracking: Vec<(f64, f64)> = grid
        .iter()
        .map(|&q| (q, rate(s, Method::ShHT2, q).1))
        .collect();
    let tracks = tracking.iter().all(|(q, e)| (e - q).abs() <= 0.02);
    let ht2_efpr = rate(s, Method::HT2, 0.05).1;
    let shut: Vec<(f64, f64)> = grid.iter().map(|&q| rate(s, Method::ShUT2, q)).collect();
    // zero within simulation error: below two standard errors of the replicate mean
    let shut_zero = grid.iter().all(|&q| {
        let r = s.row(Method::ShUT2, q).unwrap();
        r.efpr <= 2.0 * r.efpr_se + 1e-12
    });
    let shut_power = shut.iter().all(|(t, _)| *t <= 0.55);
    let fast = elapsed < Duration::from_secs(600);
    let clause = |ok: bool| if ok { "ok" } else { "FAIL" };
    Outcome::new(
        at_005 && tracks && ht2_efpr >= 0.80 && shut_zero && shut_power && fast,
        format!(
            "[{}] ShHT2 at 0.05 (etpr {etpr:.3}, efpr {efpr:.3}) vs (0.929, 0.045) +- 0.03; \
             [{}] ShHT2 efpr by FDR {}; [{}] HT2 efpr {ht2_efpr:.3} >= 0.80; \
             [{}] ShUT2 efpr {} ~ 0; [{}] ShUT2 etpr {} <= 0.55; [{}] {:.0} s < 600 s ({} replicates used)",
            clause(at_005),
            clause(tracks),
            fmt_pairs(&tracking),
            clause(ht2_efpr >= 0.80),
            clause(shut_zero),
            fmt_list(shut.iter().map(|x| x.1)),
            clause(shut_power),
            fmt_list(shut.iter().map(|x| x.0)),
            clause(fast),
            elapsed.as_secs_f64(),
            s.used_replicates(),
        ),
    )
}

fn table_two(s: &SimSummary) -> Outcome {
    let grid = SimConfig::paper_mixture().fdr_grid;
    let efprs: Vec<(f64, f64)> = grid
        .iter()
        .map(|&q| (q, rate(s, Method::ShHT2, q).1))
        .collect();
    let lost = efprs.iter().all(|(q, e)| e > q);
    let etpr = rate(s, Method::ShHT2, 0.05).0;
    Outcome::new(
        lost && etpr >= 0.90,
        format!(
            "ShHT2 efpr by FDR {} (each > nominal: {lost}); etpr at 0.05 {etpr:.3} (>= 0.90); {} replicates used",
            fmt_pairs(&efprs),
            s.used_replicates()
        ),
    )
}

fn curve_dominance(s: &SimSummary) -> Outcome {
    let sh = s.curve(Method::ShHT2).unwrap();
    let shut = s.curve(Method::ShUT2).unwrap();
    let mut worst = f64::INFINITY;
    let mut at = 0.0;
    let mut points = 0;
    for (i, &(x, _)) in sh.points.iter().enumerate() {
        if x < 0.01 - 1e-9 || x > 0.2 + 1e-9 {
            continue;
        }
        points += 1;
        let margin = sh.points[i].1 - shut.points[i].1;
        if margin < worst {
            worst = margin;
            at = x;
        }
    }
    Outcome::new(
        s.used_replicates() >= 10 && points > 0 && worst >= 0.0,
        format!(
            "min ShHT2 - ShUT2 etpr over {points} grid points (step {CURVE_STEP}) = {worst:.4} at efpr {at:.3}; {} replicates",
            s.used_replicates()
        ),
    )
}

// Largest k with p_(k) <= k q / m by direct enumeration, then everything at
// or below that p-value.
fn brute_force_bh(p: &[f64], q: f64) -> Vec<bool> {
    let valid: Vec<f64> = p.iter().copied().filter(|x| x.is_finite()).collect();
    let m = valid.len() as f64;
    let mut cut: Option<f64> = None;
    for &candidate in &valid {
        let k = valid.iter().filter(|&&x| x <= candidate).count() as f64;
        if candidate <= k * q / m && cut.map_or(true, |c| candidate > c) {
            cut = Some(candidate);
        }
    }
    p.iter()
        .map(|&x| cut.is_some_and(|c| x.is_finite() && x <= c))
        .collect()
}

fn bh_oracle() -> Outcome {
    let mut rng = RngStream::new(9, 0);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let len = (rng.uniform() * 80.0) as usize;
        let q = 0.01 + 0.3 * rng.uniform();
        let p: Vec<f64> = (0..len)
            .map(|_| {
                let u = rng.uniform();
                if u < 0.05 {
                    f64::NAN
                } else if u < 0.15 {
                    0.01
                } else if u < 0.4 {
                    0.01 * rng.uniform()
                } else {
                    rng.uniform()
                }
            })
            .collect();
        if bh_select(&p, q).unwrap() != brute_force_bh(&p, q) {
            mismatches += 1;
        }
    }
    Outcome::new(
        mismatches == 0,
        format!("{mismatches} mismatches in 1000 instances"),
    )
}

// Noncentral chi-square as a central chi-square plus a shifted squared normal.
fn noncentral_f_draw(rng: &mut RngStream, df1: f64, df2: f64, nc: f64) -> f64 {
    let z = rng.std_normal() + nc.sqrt();
    let mut num = z * z;
    if df1 > 1.0 {
        num += rng.chi_square(df1 - 1.0);
    }
    (num / df1) / (rng.chi_square(df2) / df2)
}

fn distribution_oracles() -> Outcome {
    const DRAWS: usize = 10_000_000;
    const CHUNKS: usize = 100;
    let points: [(f64, f64, f64, f64); 10] = [
        (1.0, 5.0, 0.0, 2.0),
        (2.0, 4.0, 3.0, 2.5),
        (2.0, 6.954, 22.5, 8.0),
        (3.0, 10.0, 1.5, 1.2),
        (4.0, 20.0, 10.0, 3.0),
        (6.0, 4.0, 22.5, 5.0),
        (6.0, 4.0, 60.0, 20.0),
        (1.0, 30.0, 8.0, 6.0),
        (5.0, 2.5, 4.0, 1.0),
        (10.0, 50.0, 25.0, 3.5),
    ];
    let mut worst_z: f64 = 0.0;
    for (k, &(df1, df2, nc, x)) in points.iter().enumerate() {
        let hits: usize = (0..CHUNKS)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = RngStream::new(10 + k as u64, chunk as u64);
                (0..DRAWS / CHUNKS)
                    .filter(|_| noncentral_f_draw(&mut rng, df1, df2, nc) <= x)
                    .count()
            })
            .sum();
        let mc = hits as f64 / DRAWS as f64;
        let exact = f_cdf(x, &FParams::noncentral(df1, df2, nc).unwrap());
        let se = (exact * (1.0 - exact) / DRAWS as f64).sqrt();
        worst_z = worst_z.max((mc - exact).abs() / se);
    }

    let mut worst_mean: f64 = 0.0;
    let configs = [
        (12.0, vec![2.0, 0.8, 0.8, 1.0]),
        (15.0, vec![1.0, 0.4, 0.3, 0.4, 2.0, -0.5, 0.3, -0.5, 1.5]),
    ];
    for (k, (nu, entries)) in configs.iter().enumerate() {
        let d = (entries.len() as f64).sqrt() as usize;
        let lambda =
            SpdMatrix::new(Matrix::from_row_major(d, d, entries.clone()).unwrap()).unwrap();
        let sampler = InvWishartSampler::new(*nu, &lambda).unwrap();
        let mut rng = RngStream::new(20 + k as u64, 0);
        let draws = 100_000;
        let mut acc = Matrix::zeros(d, d);
        for _ in 0..draws {
            acc = &acc + sampler.sample(&mut rng).unwrap().matrix();
        }
        let mean = acc.scale(1.0 / draws as f64);
        let target = lambda.matrix().scale(1.0 / (nu - 2.0 * d as f64 - 2.0));
        for i in 0..d {
            for j in 0..d {
                worst_mean = worst_mean.max(rel_err(mean[(i, j)], target[(i, j)]));
            }
        }
    }
    Outcome::new(
        worst_z <= 3.0 && worst_mean <= 0.03,
        format!(
            "noncentral F max |MC - cdf| = {worst_z:.2} SE (<= 3) over 10 points; inverse-Wishart mean max rel error {:.2}% (<= 3%)",
            100.0 * worst_mean
        ),
    )
}

fn fmt_pairs(v: &[(f64, f64)]) -> String {
    let parts: Vec<String> = v.iter().map(|(q, e)| format!("{q:.2}:{e:.3}")).collect();
    parts.join(" ")
}

fn fmt_list(v: impl Iterator<Item = f64>) -> String {
    let parts: Vec<String> = v.map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(" "))
}

fn report(id: u32, name: &str, outcome: Outcome, failed: &mut Vec<u32>) {
    let tag = if outcome.pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id:>2} {name}: {}", outcome.detail);
    if !outcome.pass {
        failed.push(id);
    }
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut failed = Vec::new();
    report(1, "null calibration", null_calibration(), &mut failed);
    report(
        2,
        "reduction identities",
        reduction_identities(),
        &mut failed,
    );
    report(3, "conjugacy identity", conjugacy_identity(), &mut failed);
    report(4, "prior recovery", prior_recovery(), &mut failed);
    report(5, "effect-size solve", theta_solve(), &mut failed);

    let start = Instant::now();
    let model = run_benchmark(&SimConfig {
        reps: 10,
        ..SimConfig::paper_model()
    })
    .unwrap();
    let model_time = start.elapsed();
    report(
        6,
        "model benchmark rates",
        table_one(&model, model_time),
        &mut failed,
    );
    let mixture = run_benchmark(&SimConfig {
        reps: 10,
        ..SimConfig::paper_mixture()
    })
    .unwrap();
    report(
        7,
        "mixture benchmark rates",
        table_two(&mixture),
        &mut failed,
    );
    report(
        8,
        "ordering-curve dominance",
        curve_dominance(&model),
        &mut failed,
    );
    report(9, "BH oracle equivalence", bh_oracle(), &mut failed);
    report(
        10,
        "distribution oracles",
        distribution_oracles(),
        &mut failed,
    );

    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
    } else {
        println!(
            "acceptance: {} of 10 criteria failed: {failed:?}",
            failed.len()
        );
        std::process::exit(1);
    }
}
