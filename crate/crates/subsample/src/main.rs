//! Command-line front end: sampling, relaxation, statistical verification,
//! gradient checks, training demos, and benchmarks, all seedable and
//! emitting CSV or JSON.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use subsample::experiments::{
    make_cluster_data, rss_sne_train, scaling_benchmark, sne, toy_feature_selection,
    train_match_distribution, trustworthiness, EmbeddingConfig, FeatureSelectConfig, MatchConfig,
};
use subsample::grad::{finite_difference_check, relaxed_topk_jacobian};
use subsample::relax::{relax_subset_sample, relaxed_topk, relaxed_topk_hard};
use subsample::sampler::{gumbel_keys, wrs_sample};
use subsample::stats::{binomial_ci, chi_square_gof, total_variation, EmpiricalDistribution};
use subsample::dist::enumerate_subset_distribution;
use subsample::{Scores, UniformStream, Weights};

#[derive(Parser)]
#[command(name = "subsample", version, about = "Reparameterizable subset sampling via relaxed top-k")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// RNG seed; drawn from system entropy and printed when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,

    /// Emit CSV.
    #[arg(long, global = true)]
    csv: bool,

    /// Write the primary payload to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SampleMode {
    /// Ordered without-replacement sequences.
    Sequence,
    /// Unordered subsets (indices sorted ascending).
    Subset,
}

#[derive(Subcommand)]
enum Command {
    /// Draw hard without-replacement samples from weights.
    Sample(SampleArgs),
    /// Run the relaxed top-k on raw scores or Gumbel-perturbed weights.
    Relax(RelaxArgs),
    /// Compare hardened relaxed samples against the enumeration oracle.
    VerifyDist(VerifyDistArgs),
    /// Check analytic Jacobians against central finite differences.
    GradCheck(GradCheckArgs),
    /// Sweep random instances for order preservation at t >= 1.
    Consistency(ConsistencyArgs),
    /// Learn weights whose subset distribution matches a target.
    TrainDemo(TrainDemoArgs),
    /// Toy instance-wise feature selection on synthetic linear data.
    SelectDemo(SelectDemoArgs),
    /// Train a neighbor-matching embedding and report trustworthiness.
    SneDemo(SneDemoArgs),
    /// Time relaxed top-k forward passes across problem sizes.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Comma-separated weights, or a path to a single-column CSV file.
    #[arg(long)]
    weights: String,
    #[arg(long)]
    k: usize,
    /// Number of samples to draw.
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, value_enum, default_value_t = SampleMode::Sequence)]
    mode: SampleMode,
}

#[derive(Args)]
struct RelaxArgs {
    /// Comma-separated weights, or a path to a single-column CSV file.
    #[arg(long, conflicts_with = "scores")]
    weights: Option<String>,
    /// Raw scores: skip the Gumbel perturbation and relax these directly.
    #[arg(long)]
    scores: Option<String>,
    #[arg(long)]
    k: usize,
    /// Temperature of the relaxation.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
}

#[derive(Args)]
struct VerifyDistArgs {
    /// Comma-separated weights, or a path to a single-column CSV file.
    #[arg(long)]
    weights: String,
    #[arg(long)]
    k: usize,
    /// Comma-separated list of temperatures.
    #[arg(long, default_value = "0.1,1,10", value_delimiter = ',')]
    t: Vec<f64>,
    /// Hardened relaxed samples per temperature.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Args)]
struct GradCheckArgs {
    /// Largest instance size; each trial draws n in [2, this].
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Largest subset size; each trial draws k in [1, min(this, n)].
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Temperature, or a min,max range sampled per trial.
    #[arg(long, default_value = "1", value_delimiter = ',')]
    t: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-5)]
    h: f64,
    /// Largest acceptable |analytic - finite difference|.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Args)]
struct ConsistencyArgs {
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    /// Largest instance size; each instance draws n in [2, this].
    #[arg(long, default_value_t = 16)]
    n_max: usize,
    /// Temperatures cycled across instances; all must be >= 1.
    #[arg(long, default_value = "1,2,5,10", value_delimiter = ',')]
    t: Vec<f64>,
}

#[derive(Args)]
struct TrainDemoArgs {
    /// Target weights to match.
    #[arg(long, default_value = "0.1,0.2,0.3,0.4")]
    weights: String,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.7)]
    t: f64,
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    /// Samples averaged per gradient step.
    #[arg(long, default_value_t = 64)]
    batch: usize,
}

#[derive(Args)]
struct SelectDemoArgs {
    #[arg(long, default_value_t = 6)]
    features: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long, default_value_t = 3000)]
    steps: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    /// Replace the y = x0 + x1 target with independent noise.
    #[arg(long)]
    null_target: bool,
}

#[derive(Args)]
struct SneDemoArgs {
    #[arg(long, default_value_t = 20)]
    per_cluster: usize,
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    #[arg(long, default_value_t = 10)]
    d_in: usize,
    #[arg(long, default_value_t = 2)]
    d_out: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    t: f64,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 60)]
    batch: usize,
    #[arg(long, default_value_t = 0.3)]
    lr: f64,
}

#[derive(Args)]
struct BenchArgs {
    /// Ascending comma-separated problem sizes.
    #[arg(long, default_value = "1000,2000,5000", value_delimiter = ',')]
    m: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

/// What a subcommand hands back to `main` for output and exit-code plumbing.
struct Output {
    payload: String,
    /// False when a check ran to completion but failed its threshold.
    passed: bool,
}

impl Output {
    fn ok(payload: String) -> Self {
        Self {
            payload,
            passed: true,
        }
    }
}

enum Format {
    Csv,
    Json,
}

fn parse_weights(spec: &str) -> Result<Weights, String> {
    let values: Vec<f64> = if Path::new(spec).is_file() {
        let text = fs::read_to_string(spec)
            .map_err(|e| format!("--weights: cannot read {spec}: {e}"))?;
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            match line.parse::<f64>() {
                Ok(v) => values.push(v),
                // A non-numeric first line is a header.
                Err(_) if lineno == 0 => continue,
                Err(_) => {
                    return Err(format!("--weights: {spec} line {}: not a number", lineno + 1))
                }
            }
        }
        values
    } else {
        spec.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("--weights: `{tok}` is not a number"))
            })
            .collect::<Result<_, _>>()?
    };
    Weights::new(values).map_err(|e| format!("--weights: {e}"))
}

fn parse_scores(spec: &str, t: f64) -> Result<Scores, String> {
    let values: Vec<f64> = spec
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| format!("--scores: `{tok}` is not a number"))
        })
        .collect::<Result<_, _>>()?;
    Scores::new(values, t).map_err(|e| format!("--scores: {e}"))
}

fn run_sample(args: &SampleArgs, seed: u64, format: &Format) -> Result<Output, String> {
    let w = parse_weights(&args.weights)?;
    let mut rng = UniformStream::new(seed);
    let mut samples = Vec::with_capacity(args.count);
    for _ in 0..args.count {
        let s = wrs_sample(&w, args.k, &mut rng).map_err(|e| format!("sample: {e}"))?;
        let mut indices = s.indices().to_vec();
        if matches!(args.mode, SampleMode::Subset) {
            indices.sort_unstable();
        }
        samples.push(indices);
    }
    let payload = match format {
        Format::Csv => {
            let mut out = String::from("sample,position,index\n");
            for (si, s) in samples.iter().enumerate() {
                for (pos, &i) in s.iter().enumerate() {
                    out.push_str(&format!("{si},{pos},{i}\n"));
                }
            }
            out
        }
        Format::Json => serde_json::to_string_pretty(&json!({
            "seed": seed,
            "k": args.k,
            "samples": samples,
        }))
        .unwrap(),
    };
    Ok(Output::ok(payload))
}

fn run_relax(args: &RelaxArgs, seed: u64, format: &Format) -> Result<Output, String> {
    let relaxed = if let Some(scores) = &args.scores {
        let scores = parse_scores(scores, args.t)?;
        relaxed_topk(&scores, args.k).map_err(|e| format!("relax: {e}"))?
    } else {
        let spec = args
            .weights
            .as_ref()
            .ok_or("relax: one of --weights or --scores is required")?;
        let w = parse_weights(spec)?;
        let mut rng = UniformStream::new(seed);
        relax_subset_sample(&w, args.k, args.t, &mut rng).map_err(|e| format!("relax: {e}"))?
    };
    let payload = match format {
        Format::Csv => {
            let mut out = String::from("label,index,value\n");
            for (i, v) in relaxed.mass().iter().enumerate() {
                out.push_str(&format!("mass,{i},{v:.12}\n"));
            }
            for (j, step) in relaxed.steps().iter().enumerate() {
                for (i, v) in step.iter().enumerate() {
                    out.push_str(&format!("step_{},{i},{v:.12}\n", j + 1));
                }
            }
            out
        }
        Format::Json => serde_json::to_string_pretty(&json!({
            "seed": seed,
            "k": relaxed.k(),
            "temperature": args.t,
            "mass": relaxed.mass(),
            "steps": relaxed.steps(),
            "saturated": relaxed.saturated(),
        }))
        .unwrap(),
    };
    Ok(Output::ok(payload))
}

fn run_verify_dist(args: &VerifyDistArgs, seed: u64, format: &Format) -> Result<Output, String> {
    let w = parse_weights(&args.weights)?;
    let table = enumerate_subset_distribution(&w, args.k).map_err(|e| format!("verify-dist: {e}"))?;
    let mut rng = UniformStream::new(seed);
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &t in &args.t {
        let mut emp = EmpiricalDistribution::new(w.len(), args.k);
        for _ in 0..args.samples {
            let keys = gumbel_keys(&w, &mut rng);
            let scores = Scores::from_keys(keys.keys().to_vec(), t)
                .map_err(|e| format!("verify-dist: {e}"))?;
            let mask = relaxed_topk_hard(&scores, args.k).map_err(|e| format!("verify-dist: {e}"))?;
            emp.record(&mask).map_err(|e| format!("verify-dist: {e}"))?;
        }
        let tv = total_variation(&table, &emp).map_err(|e| format!("verify-dist: {e}"))?;
        let chi = chi_square_gof(&table, &emp).map_err(|e| format!("verify-dist: {e}"))?;
        summaries.push((t, tv, chi.p_value));
        for (subset, &exact_p) in table.probabilities() {
            let count = (emp.frequency(subset) * emp.total() as f64).round() as u64;
            let (lo, hi) = binomial_ci(count, emp.total(), 0.95)
                .map_err(|e| format!("verify-dist: {e}"))?;
            rows.push((t, subsample::dist::subset_key(subset), exact_p, emp.frequency(subset), lo, hi));
        }
    }
    for (t, tv, p) in &summaries {
        eprintln!("t={t}: tv={tv:.6} chi_square_p={p:.6}");
    }
    let payload = match format {
        Format::Csv => {
            let mut out = String::from("t,subset,exact_p,empirical_p,ci_lo,ci_hi\n");
            for (t, subset, exact, empirical, lo, hi) in &rows {
                out.push_str(&format!(
                    "{t},{subset},{exact:.6},{empirical:.6},{lo:.6},{hi:.6}\n"
                ));
            }
            out
        }
        Format::Json => serde_json::to_string_pretty(&json!({
            "seed": seed,
            "samples": args.samples,
            "summary": summaries
                .iter()
                .map(|(t, tv, p)| json!({"t": t, "tv": tv, "chi_square_p": p}))
                .collect::<Vec<_>>(),
            "subsets": rows
                .iter()
                .map(|(t, subset, exact, empirical, lo, hi)| json!({
                    "t": t, "subset": subset, "exact_p": exact,
                    "empirical_p": empirical, "ci_lo": lo, "ci_hi": hi,
                }))
                .collect::<Vec<_>>(),
        }))
        .unwrap(),
    };
    Ok(Output::ok(payload))
}

fn run_grad_check(args: &GradCheckArgs, seed: u64, format: &Format) -> Result<Output, String> {
    if args.n < 2 || args.k == 0 || args.trials == 0 {
        return Err("grad-check: need --n >= 2, --k >= 1, --trials >= 1".into());
    }
    let (t_lo, t_hi) = match args.t.as_slice() {
        [t] => (*t, *t),
        [lo, hi] if lo <= hi => (*lo, *hi),
        _ => return Err("grad-check: --t takes a value or an ascending min,max pair".into()),
    };
    if t_lo.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err("grad-check: --t must be positive".into());
    }
    let mut rng = UniformStream::new(seed);
    let mut max_error = 0.0f64;
    let mut error_sum = 0.0;
    let mut error_rows = 0usize;
    let mut max_col_sum = 0.0f64;
    for _ in 0..args.trials {
        let n = 2 + (rng.next_uniform() * (args.n - 1) as f64) as usize;
        let k = 1 + (rng.next_uniform() * args.k.min(n) as f64) as usize;
        let k = k.min(n);
        let t = t_lo + rng.next_uniform() * (t_hi - t_lo);
        let values: Vec<f64> = (0..n).map(|_| 4.0 * rng.next_uniform() - 2.0).collect();
        let scores = Scores::new(values.clone(), t).map_err(|e| format!("grad-check: {e}"))?;
        let jac = relaxed_topk_jacobian(&scores, k).map_err(|e| format!("grad-check: {e}"))?;
        for i in 0..n {
            let report = finite_difference_check(
                |s| {
                    let scores = Scores::new(s.to_vec(), t).unwrap();
                    relaxed_topk(&scores, k).unwrap().mass()[i]
                },
                &jac.matrix()[i],
                &values,
                args.h,
            )
            .map_err(|e| format!("grad-check: {e}"))?;
            max_error = max_error.max(report.max_abs_error);
            error_sum += report.mean_abs_error;
            error_rows += 1;
        }
        for j in 0..n {
            let col: f64 = (0..n).map(|i| jac.entry(i, j)).sum();
            max_col_sum = max_col_sum.max(col.abs());
        }
    }
    let mean_error = error_sum / error_rows as f64;
    let passed = max_error < args.tolerance && max_col_sum < 1e-8;
    let payload = match format {
        Format::Csv => format!(
            "trials,max_abs_error,max_col_sum,pass\n{},{max_error:e},{max_col_sum:e},{passed}\n",
            args.trials
        ),
        Format::Json => serde_json::to_string_pretty(&json!({
            "seed": seed,
            "trials": args.trials,
            "tolerance": args.tolerance,
            "max_abs_error": max_error,
            "mean_abs_error": mean_error,
            "max_col_sum": max_col_sum,
            "pass": passed,
        }))
        .unwrap(),
    };
    Ok(Output { payload, passed })
}

fn run_consistency(args: &ConsistencyArgs, seed: u64, format: &Format) -> Result<Output, String> {
    if args.n_max < 2 || args.instances == 0 {
        return Err("consistency: need --n-max >= 2, --instances >= 1".into());
    }
    if args.t.iter().any(|&t| t < 1.0) {
        return Err("consistency: all --t values must be >= 1".into());
    }
    let mut rng = UniformStream::new(seed);
    let mut violations = 0usize;
    for instance in 0..args.instances {
        let n = 2 + (rng.next_uniform() * (args.n_max - 1) as f64) as usize;
        let k = 1 + (rng.next_uniform() * n as f64) as usize;
        let k = k.min(n);
        let t = args.t[instance % args.t.len()];
        let values: Vec<f64> = (0..n).map(|_| 10.0 * rng.next_uniform() - 5.0).collect();
        let scores = Scores::new(values.clone(), t).map_err(|e| format!("consistency: {e}"))?;
        let mass = relaxed_topk(&scores, k)
            .map_err(|e| format!("consistency: {e}"))?
            .mass()
            .to_vec();
        for i in 0..n {
            for j in 0..n {
                if values[i] < values[j] && mass[i] > mass[j] + 1e-12 {
                    violations += 1;
                }
            }
        }
    }
    let passed = violations == 0;
    let payload = match format {
        Format::Csv => format!(
            "instances,violations,pass\n{},{violations},{passed}\n",
            args.instances
        ),
        Format::Json => serde_json::to_string_pretty(&json!({
            "seed": seed,
            "instances": args.instances,
            "temperatures": args.t,
            "violations": violations,
            "pass": passed,
        }))
        .unwrap(),
    };
    Ok(Output { payload, passed })
}

fn run_train_demo(args: &TrainDemoArgs, seed: u64, format: &Format) -> Result<Output, String> {
    let target = parse_weights(&args.weights)?;
    let cfg = MatchConfig {
        k: args.k,
        temperature: args.t,
        steps: args.steps,
        learning_rate: args.lr,
        batch: args.batch,
        seed,
    };
    let result = train_match_distribution(&target, &cfg).map_err(|e| format!("train-demo: {e}"))?;
    let learned = result.learned_weights().map_err(|e| format!("train-demo: {e}"))?;
    let learned_table =
        enumerate_subset_distribution(&learned, args.k).map_err(|e| format!("train-demo: {e}"))?;
    let target_table =
        enumerate_subset_distribution(&target, args.k).map_err(|e| format!("train-demo: {e}"))?;
    let mut tv = 0.0;
    for (subset, &p) in target_table.probabilities() {
        tv += (p - learned_table.probability(subset).unwrap()).abs();
    }
    tv /= 2.0;
    eprintln!("final tv = {tv:.6}");
    let payload = match format {
        Format::Csv => {
            let mut out = String::from("step,loss\n");
            for (step, loss) in result.loss_trace.iter().enumerate() {
                out.push_str(&format!("{step},{loss:.6}\n"));
            }
            out
        }
        Format::Json => serde_json::to_string_pretty(&json!({
            "seed": seed,
            "final_tv": tv,
            "learned_weights": learned.values(),
            "loss_first": result.loss_trace.first(),
            "loss_last": result.loss_trace.last(),
        }))
        .unwrap(),
    };
    Ok(Output::ok(payload))
}

fn run_select_demo(args: &SelectDemoArgs, seed: u64, format: &Format) -> Result<Output, String> {
    let cfg = FeatureSelectConfig {
        n_features: args.features,
        k: args.k,
        temperature: args.t,
        steps: args.steps,
        learning_rate: args.lr,
        seed,
        null_target: args.null_target,
    };
    let result = toy_feature_selection(&cfg).map_err(|e| format!("select-demo: {e}"))?;
    eprintln!("selected features: {:?}", result.selected);
    let payload = match format {
        Format::Csv => {
            let mut out = String::from("feature,log_weight,selected\n");
            for (i, lw) in result.explainer_log_weights.iter().enumerate() {
                out.push_str(&format!(
                    "{i},{lw:.6},{}\n",
                    result.selected.contains(&i)
                ));
            }
            out
        }
        Format::Json => serde_json::to_string_pretty(&json!({
            "seed": seed,
            "selected": result.selected,
            "explainer_log_weights": result.explainer_log_weights,
            "regressor": result.regressor,
            "loss_last": result.loss_trace.last(),
        }))
        .unwrap(),
    };
    Ok(Output::ok(payload))
}

fn run_sne_demo(args: &SneDemoArgs, seed: u64, format: &Format) -> Result<Output, String> {
    let (data, labels) = make_cluster_data(args.per_cluster, args.clusters, args.d_in, seed);
    let cfg = EmbeddingConfig {
        d_in: args.d_in,
        d_out: args.d_out,
        k: args.k,
        temperature: args.t,
        epochs: args.epochs,
        batch_size: args.batch,
        learning_rate: args.lr,
        seed,
        identity_init: false,
    };
    let result = rss_sne_train(&data, &cfg).map_err(|e| format!("sne-demo: {e}"))?;
    let t12 = trustworthiness(&data, &result.embedding, 12).map_err(|e| format!("sne-demo: {e}"))?;
    let t12_init = trustworthiness(&data, &result.initial_embedding, 12)
        .map_err(|e| format!("sne-demo: {e}"))?;
    let nn_error =
        sne::one_nn_error(&result.embedding, &labels).map_err(|e| format!("sne-demo: {e}"))?;
    eprintln!("T(12) initial = {t12_init:.4}, final = {t12:.4}, 1-NN error = {nn_error:.4}");
    let payload = match format {
        Format::Csv => {
            let coords: Vec<String> = (0..args.d_out).map(|d| format!("x{d}")).collect();
            let mut out = format!("point_id,class,{}\n", coords.join(","));
            for (i, point) in result.embedding.iter().enumerate() {
                let coords: Vec<String> = point.iter().map(|v| format!("{v:.6}")).collect();
                out.push_str(&format!("{i},{},{}\n", labels[i], coords.join(",")));
            }
            out
        }
        Format::Json => serde_json::to_string_pretty(&json!({
            "seed": seed,
            "t12_initial": t12_init,
            "t12_final": t12,
            "one_nn_error": nn_error,
            "degenerate": result.degenerate,
            "labels": labels,
            "embedding": result.embedding,
        }))
        .unwrap(),
    };
    Ok(Output::ok(payload))
}

fn run_bench(args: &BenchArgs, seed: u64, format: &Format) -> Result<Output, String> {
    let _ = seed; // timing only; kept for the uniform seed-reporting contract
    let rows = scaling_benchmark(&args.m, args.k, args.t, args.trials)
        .map_err(|e| format!("bench: {e}"))?;
    let payload = match format {
        Format::Csv => {
            let mut out = String::from("m,k,mean_ms,std_ms\n");
            for row in &rows {
                out.push_str(&format!(
                    "{},{},{:.4},{:.4}\n",
                    row.m, row.k, row.mean_ms, row.std_ms
                ));
            }
            out
        }
        Format::Json => serde_json::to_string_pretty(&json!({
            "seed": seed,
            "rows": rows
                .iter()
                .map(|r| json!({
                    "m": r.m, "k": r.k, "mean_ms": r.mean_ms,
                    "std_ms": r.std_ms, "median_ms": r.median_ms,
                }))
                .collect::<Vec<_>>(),
        }))
        .unwrap(),
    };
    Ok(Output::ok(payload))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let seed = cli.seed.unwrap_or_else(rand::random);
    eprintln!("seed = {seed}");

    // Subcommands with a declared CSV schema default to CSV; the rest to JSON.
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        match cli.command {
            Command::Sample(_) | Command::VerifyDist(_) | Command::SneDemo(_) | Command::Bench(_) => {
                Format::Csv
            }
            _ => Format::Json,
        }
    };

    let result = match &cli.command {
        Command::Sample(args) => run_sample(args, seed, &format),
        Command::Relax(args) => run_relax(args, seed, &format),
        Command::VerifyDist(args) => run_verify_dist(args, seed, &format),
        Command::GradCheck(args) => run_grad_check(args, seed, &format),
        Command::Consistency(args) => run_consistency(args, seed, &format),
        Command::TrainDemo(args) => run_train_demo(args, seed, &format),
        Command::SelectDemo(args) => run_select_demo(args, seed, &format),
        Command::SneDemo(args) => run_sne_demo(args, seed, &format),
        Command::Bench(args) => run_bench(args, seed, &format),
    };

    match result {
        Ok(mut output) => {
            if !output.payload.ends_with('\n') {
                output.payload.push('\n');
            }
            if let Some(path) = &cli.out {
                if let Err(e) = fs::write(path, &output.payload) {
                    eprintln!("--out: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                print!("{}", output.payload);
            }
            if output.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
