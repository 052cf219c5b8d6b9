//! Command-line front end: fit models and binding parameters, generate graph
//! batches, compute and compare statistics, and run the oracle sweep.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use epgm::{
    analytic_overlap, compute_stats, empirical_overlap, expected_counts, fit_binding,
    fit_binding_joint, mc_motif3, model_to_json, motif3, read_edge_list, read_model, sample,
    write_model, BindingFile, BindingParams, FitObjective, FitOptions, Graph, ResidualCoupling,
    RngSpec, Scheme, TripleSpec, DEFAULT_ROUNDS_LOCAL, DEFAULT_ROUNDS_PARALLEL,
};

#[derive(Parser)]
#[command(name = "epgm", version, about = "Random-graph generation with edge binding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Er,
    Cl,
    Sb,
    Kr,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Eigm,
    Local,
    Parallel,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ResidualArg {
    Shared,
    Independent,
}

impl From<ResidualArg> for ResidualCoupling {
    fn from(r: ResidualArg) -> Self {
        match r {
            ResidualArg::Shared => ResidualCoupling::Shared,
            ResidualArg::Independent => ResidualCoupling::Independent,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit an edge-probability model to a graph and write its JSON.
    FitModel(FitModelArgs),
    /// Fit binding parameters to a triangle (and optionally wedge) target.
    FitBinding(FitBindingArgs),
    /// Generate a batch of graphs and a per-graph summary CSV.
    Generate(GenerateArgs),
    /// Print the statistics of one graph.
    Stats(StatsArgs),
    /// Compare a generated batch against a reference graph.
    Compare(CompareArgs),
    /// Empirical overlap of graphs and/or the analytic overlap of a model.
    Overlap(OverlapArgs),
    /// Print the 8 labeled motif probabilities of one node triple.
    MotifProbs(MotifProbsArgs),
    /// Print expected triangle/wedge counts and the analytic overlap.
    ExpectedCounts(ExpectedCountsArgs),
    /// Sweep closed forms against Monte Carlo and emit a pass/fail CSV.
    OracleCheck(OracleCheckArgs),
    /// Time graph generation under each scheme.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct FitModelArgs {
    /// Input edge-list file.
    graph: PathBuf,
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Block id per node, one integer per line (SB only).
    #[arg(long)]
    partition: Option<PathBuf>,
    /// JSON file with the symmetric 2x2 seed matrix (KR only).
    #[arg(long)]
    theta: Option<PathBuf>,
    /// Kronecker power (KR only).
    #[arg(long)]
    k: Option<u32>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitBindingArgs {
    /// Model JSON file.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long, short = 'R')]
    rounds: Option<u32>,
    #[arg(long, value_enum, default_value = "shared")]
    residual: ResidualArg,
    /// Target graph; its triangle count becomes the objective.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Explicit target triangle count (alternative to --graph).
    #[arg(long)]
    triangles: Option<f64>,
    /// Add a wedge target (from --graph or this explicit value).
    #[arg(long)]
    wedges: Option<f64>,
    /// Also match the target graph's wedge count.
    #[arg(long)]
    with_wedges: bool,
    /// Jointly optimize the class-pair edge probabilities.
    #[arg(long)]
    joint: bool,
    /// Refit model output path (joint mode).
    #[arg(long)]
    out_model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    /// Binding-parameter JSON output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fit-report JSON output.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Binding-parameter JSON (with seed).
    #[arg(long)]
    binding: PathBuf,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Overrides the seed stored in the binding file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = default_threads())]
    threads: usize,
    /// Output directory for edge lists and summary.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    graph: PathBuf,
    /// Cap on BFS sources for the distance CCDF.
    #[arg(long)]
    distance_sample: Option<usize>,
    /// Write the degree CCDF as CSV.
    #[arg(long)]
    degree_ccdf: Option<PathBuf>,
    /// Write the distance CCDF as CSV.
    #[arg(long)]
    distance_ccdf: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Csv,
}

#[derive(Args)]
struct CompareArgs {
    /// Reference edge-list file.
    #[arg(long)]
    reference: PathBuf,
    /// Directory of generated edge lists (*.txt).
    #[arg(long)]
    generated: PathBuf,
    /// Prefix for the degree/distance CCDF CSVs.
    #[arg(long)]
    out_prefix: Option<PathBuf>,
    #[arg(long)]
    distance_sample: Option<usize>,
}

#[derive(Args)]
struct OverlapArgs {
    /// Edge-list files (at least two for the empirical overlap).
    graphs: Vec<PathBuf>,
    /// Model JSON for the analytic overlap.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct MotifProbsArgs {
    /// The three pair probabilities p12,p13,p23.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// The three node-sampling probabilities g1,g2,g3.
    #[arg(long, value_delimiter = ',')]
    g: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "eigm")]
    scheme: SchemeArg,
    #[arg(long, short = 'R')]
    rounds: Option<u32>,
    #[arg(long, value_enum, default_value = "shared")]
    residual: ResidualArg,
}

#[derive(Args)]
struct ExpectedCountsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    binding: PathBuf,
}

#[derive(Args)]
struct OracleCheckArgs {
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    binding: PathBuf,
    #[arg(long, default_value_t = 5)]
    count: usize,
    #[arg(long, default_value_t = default_threads())]
    threads: usize,
}

fn default_threads() -> usize {
    std::env::var("EPGM_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1)
}

enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl From<epgm::Error> for CliError {
    fn from(e: epgm::Error) -> Self {
        match e {
            epgm::Error::Numerical(m) => CliError::Numerical(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own exit code for usage errors is 2; remap to the
            // documented 1 (help/version remain success).
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::FitModel(a) => cmd_fit_model(a),
        Command::FitBinding(a) => cmd_fit_binding(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Overlap(a) => cmd_overlap(a),
        Command::MotifProbs(a) => cmd_motif_probs(a),
        Command::ExpectedCounts(a) => cmd_expected_counts(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Usage(m)) => {
            eprintln!("usage error: {m}");
            std::process::exit(1);
        }
        Err(CliError::Data(m)) => {
            eprintln!("error: {m}");
            std::process::exit(2);
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            std::process::exit(3);
        }
    }
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let (g, report) = read_edge_list(path)?;
    if report.self_loops > 0 || report.duplicates > 0 {
        eprintln!(
            "note: dropped {} self-loops and {} duplicate edges from {}",
            report.self_loops,
            report.duplicates,
            path.display()
        );
    }
    Ok(g)
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_fit_model(a: FitModelArgs) -> CliResult {
    let model = match a.model {
        ModelKind::Kr => {
            let theta_path = a
                .theta
                .as_ref()
                .ok_or_else(|| CliError::Usage("--model kr requires --theta".into()))?;
            let k = a
                .k
                .ok_or_else(|| CliError::Usage("--model kr requires --k".into()))?;
            let text = std::fs::read_to_string(theta_path)?;
            let theta: Vec<Vec<f64>> =
                serde_json::from_str(&text).map_err(|e| CliError::Data(e.to_string()))?;
            if theta.len() != 2 || theta.iter().any(|r| r.len() != 2) {
                return Err(CliError::Data("theta must be a 2x2 matrix".into()));
            }
            epgm::load_kr([[theta[0][0], theta[0][1]], [theta[1][0], theta[1][1]]], k)?
        }
        kind => {
            let g = load_graph(&a.graph)?;
            match kind {
                ModelKind::Er => epgm::fit_er(&g)?,
                ModelKind::Cl => epgm::fit_cl(&g)?,
                ModelKind::Sb => {
                    let path = a.partition.as_ref().ok_or_else(|| {
                        CliError::Usage("--model sb requires --partition".into())
                    })?;
                    let block_of = read_partition(path)?;
                    epgm::fit_sb(&g, block_of)?
                }
                ModelKind::Kr => unreachable!(),
            }
        }
    };
    emit(&a.out, &(model_to_json(&model) + "\n"))
}

fn read_partition(path: &Path) -> Result<Vec<usize>, CliError> {
    let text = std::fs::read_to_string(path)?;
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| CliError::Data(format!("bad block id {tok:?} in partition file")))
        })
        .collect()
}

fn binding_template(
    scheme: SchemeArg,
    rounds: Option<u32>,
    residual: ResidualArg,
    num_classes: usize,
) -> Result<BindingParams, CliError> {
    let g = vec![0.5; num_classes];
    Ok(match scheme {
        SchemeArg::Eigm => BindingParams::eigm(),
        SchemeArg::Local => {
            BindingParams::local(g, rounds.unwrap_or(DEFAULT_ROUNDS_LOCAL))
        }
        SchemeArg::Parallel => BindingParams::parallel(
            g,
            rounds.unwrap_or(DEFAULT_ROUNDS_PARALLEL),
            residual.into(),
        ),
    })
}

fn cmd_fit_binding(a: FitBindingArgs) -> CliResult {
    let model = read_model(&a.model)?;
    if a.scheme == SchemeArg::Eigm {
        return Err(CliError::Usage(
            "the eigm scheme has no binding parameters; use it directly in generate".into(),
        ));
    }
    let (target_tri, target_wed) = match (&a.graph, a.triangles) {
        (Some(path), None) => {
            let g = load_graph(path)?;
            let stats = compute_stats(&g, Some(0));
            let wed = if a.with_wedges || a.wedges.is_some() {
                Some(a.wedges.unwrap_or(stats.wedge_count as f64))
            } else {
                None
            };
            (stats.triangle_count as f64, wed)
        }
        (None, Some(t)) => (t, a.wedges),
        _ => {
            return Err(CliError::Usage(
                "provide exactly one of --graph or --triangles".into(),
            ))
        }
    };
    let nc = model.class_structure().num_classes();
    let template = binding_template(a.scheme, a.rounds, a.residual, nc)?;
    let obj = FitObjective {
        target_triangles: target_tri,
        target_wedges: target_wed,
    };
    let opts = FitOptions {
        max_iters: a.max_iters,
        ..FitOptions::default()
    };
    let report = if a.joint {
        fit_binding_joint(&model, &template, &obj, None, &opts)?
    } else {
        fit_binding(&model, &template, &obj, &opts)?
    };
    if report.saturated {
        eprintln!("warning: target unreachable for this scheme; parameters saturated");
    }
    if let Some(refit) = &report.model {
        match &a.out_model {
            Some(path) => write_model(refit, path)?,
            None => eprintln!("note: joint fit produced a refit model; pass --out-model to save it"),
        }
    }
    let file = BindingFile {
        params: report.binding.clone(),
        seed: a.seed,
    };
    let binding_json =
        serde_json::to_string_pretty(&file).map_err(|e| CliError::Data(e.to_string()))?;
    emit(&a.out, &(binding_json + "\n"))?;
    if let Some(path) = &a.report {
        let json = serde_json::json!({
            "objective": report.objective,
            "iterations": report.iterations,
            "converged": report.converged,
            "saturated": report.saturated,
            "expected_triangles": report.expected.triangles,
            "expected_wedges": report.expected.wedges,
            "target_triangles": target_tri,
            "target_wedges": target_wed,
            "g": report.binding.g,
        });
        std::fs::write(path, serde_json::to_string_pretty(&json).unwrap() + "\n")?;
    }
    Ok(())
}

fn read_binding(path: &Path) -> Result<BindingFile, CliError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn cmd_generate(a: GenerateArgs) -> CliResult {
    let model = read_model(&a.model)?;
    let binding = read_binding(&a.binding)?;
    let seed = a.seed.unwrap_or(binding.seed);
    std::fs::create_dir_all(&a.out)?;
    let spec = RngSpec::new(seed);
    let mut summary = String::from("graph,edges,triangles,gcc,alcc,seconds\n");
    for i in 0..a.count {
        let started = Instant::now();
        let child = spec.child("graph", i as u64);
        let g = if binding.params.scheme == Scheme::ParallelBinding && a.threads > 1 {
            epgm::sample_parallel_binding(&model, &binding.params, &child, a.threads)?
        } else {
            sample(&model, &binding.params, &child)?
        };
        let elapsed = started.elapsed().as_secs_f64();
        let name = format!("graph-{i:04}.txt");
        g.write_edge_list(&a.out.join(&name))?;
        let stats = compute_stats(&g, Some(0));
        let _ = writeln!(
            summary,
            "{name},{},{},{:.6},{:.6},{elapsed:.4}",
            g.edge_count(),
            stats.triangle_count,
            stats.gcc,
            stats.alcc
        );
    }
    std::fs::write(a.out.join("summary.csv"), summary)?;
    println!("wrote {} graphs to {}", a.count, a.out.display());
    Ok(())
}

fn cmd_stats(a: StatsArgs) -> CliResult {
    let g = load_graph(&a.graph)?;
    let stats = compute_stats(&g, a.distance_sample);
    match a.format {
        ReportFormat::Text => {
            println!("nodes {}", g.node_count());
            println!("edges {}", g.edge_count());
            println!("triangles {}", stats.triangle_count);
            println!("wedges {}", stats.wedge_count);
            println!("gcc {:.6}", stats.gcc);
            println!("alcc {:.6}", stats.alcc);
        }
        ReportFormat::Csv => {
            println!("nodes,edges,triangles,wedges,gcc,alcc");
            println!(
                "{},{},{},{},{:.6},{:.6}",
                g.node_count(),
                g.edge_count(),
                stats.triangle_count,
                stats.wedge_count,
                stats.gcc,
                stats.alcc
            );
        }
    }
    if let Some(path) = &a.degree_ccdf {
        let mut csv = String::from("degree,count\n");
        for &(k, c) in &stats.degree_ccdf {
            let _ = writeln!(csv, "{k},{c}");
        }
        std::fs::write(path, csv)?;
    }
    if let Some(path) = &a.distance_ccdf {
        let mut csv = String::from("distance,pairs\n");
        for &(d, c) in &stats.distance_ccdf {
            let _ = writeln!(csv, "{d},{c}");
        }
        std::fs::write(path, csv)?;
    }
    Ok(())
}

fn load_generated_dir(dir: &Path) -> Result<Vec<Graph>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Data(format!(
            "no .txt edge lists in {}",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| load_graph(p))
        .collect::<Result<Vec<_>, _>>()
}

/// Mean and population standard deviation per aligned CCDF point.
fn ccdf_mean_std<T: Copy + Into<f64>>(curves: &[Vec<(usize, T)>]) -> Vec<(usize, f64, f64)> {
    let max_x = curves
        .iter()
        .filter_map(|c| c.last().map(|&(x, _)| x))
        .max()
        .unwrap_or(0);
    (0..=max_x)
        .map(|x| {
            let vals: Vec<f64> = curves
                .iter()
                .map(|c| c.iter().find(|&&(cx, _)| cx == x).map_or(0.0, |&(_, v)| v.into()))
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var =
                vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
            (x, mean, var.sqrt())
        })
        .collect()
}

fn cmd_compare(a: CompareArgs) -> CliResult {
    let reference = load_graph(&a.reference)?;
    let ref_stats = compute_stats(&reference, a.distance_sample);
    let generated = load_generated_dir(&a.generated)?;
    let gen_stats: Vec<_> = generated
        .iter()
        .map(|g| compute_stats(g, a.distance_sample))
        .collect();
    let mean = |f: &dyn Fn(&epgm::GraphStats) -> f64| {
        gen_stats.iter().map(|s| f(s)).sum::<f64>() / gen_stats.len() as f64
    };
    let mean_tri = mean(&|s| s.triangle_count as f64);
    println!("graphs {}", generated.len());
    println!(
        "normalized_triangles {:.6}",
        mean_tri / ref_stats.triangle_count as f64
    );
    println!("reference_gcc {:.6}", ref_stats.gcc);
    println!("mean_gcc {:.6}", mean(&|s| s.gcc));
    println!("reference_alcc {:.6}", ref_stats.alcc);
    println!("mean_alcc {:.6}", mean(&|s| s.alcc));
    match empirical_overlap(&generated) {
        Ok(ov) => println!("overlap {ov:.6}"),
        Err(epgm::Error::UndefinedOverlap) => println!("overlap undefined"),
        Err(e) => return Err(e.into()),
    }
    if let Some(prefix) = &a.out_prefix {
        let write_curves = |suffix: &str,
                            reference: Vec<(usize, f64)>,
                            curves: Vec<Vec<(usize, f64)>>|
         -> CliResult {
            let agg = ccdf_mean_std(&curves);
            let mut csv = String::from("x,reference,mean,std\n");
            for (x, mean, std) in agg {
                let r = reference
                    .iter()
                    .find(|&&(rx, _)| rx == x)
                    .map_or(0.0, |&(_, v)| v);
                let _ = writeln!(csv, "{x},{r},{mean},{std}");
            }
            let mut path = prefix.as_os_str().to_owned();
            path.push(suffix);
            std::fs::write(PathBuf::from(path), csv)?;
            Ok(())
        };
        write_curves(
            "degree_ccdf.csv",
            ref_stats
                .degree_ccdf
                .iter()
                .map(|&(x, c)| (x, c as f64))
                .collect(),
            gen_stats
                .iter()
                .map(|s| s.degree_ccdf.iter().map(|&(x, c)| (x, c as f64)).collect())
                .collect(),
        )?;
        write_curves(
            "distance_ccdf.csv",
            ref_stats.distance_ccdf.clone(),
            gen_stats.iter().map(|s| s.distance_ccdf.clone()).collect(),
        )?;
    }
    Ok(())
}

fn cmd_overlap(a: OverlapArgs) -> CliResult {
    if a.graphs.is_empty() && a.model.is_none() {
        return Err(CliError::Usage(
            "provide edge-list files and/or --model".into(),
        ));
    }
    if !a.graphs.is_empty() {
        if a.graphs.len() < 2 {
            return Err(CliError::Usage(
                "empirical overlap needs at least two graphs".into(),
            ));
        }
        let graphs = a
            .graphs
            .iter()
            .map(|p| load_graph(p))
            .collect::<Result<Vec<_>, _>>()?;
        println!("empirical_overlap {:.6}", empirical_overlap(&graphs)?);
    }
    if let Some(path) = &a.model {
        let m = read_model(path)?;
        println!("analytic_overlap {:.6}", analytic_overlap(&m)?);
    }
    Ok(())
}

fn cmd_motif_probs(a: MotifProbsArgs) -> CliResult {
    let p: [f64; 3] = a
        .p
        .as_slice()
        .try_into()
        .map_err(|_| CliError::Usage("--p needs exactly three values".into()))?;
    if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(CliError::Data("probabilities must lie in [0, 1]".into()));
    }
    let g: [f64; 3] = match &a.g {
        Some(v) => v
            .as_slice()
            .try_into()
            .map_err(|_| CliError::Usage("--g needs exactly three values".into()))?,
        None => [0.0; 3],
    };
    let t = match a.scheme {
        SchemeArg::Eigm => TripleSpec::eigm(p),
        SchemeArg::Local => TripleSpec::local(p, g, a.rounds.unwrap_or(DEFAULT_ROUNDS_LOCAL)),
        SchemeArg::Parallel => TripleSpec::parallel(
            p,
            g,
            a.rounds.unwrap_or(DEFAULT_ROUNDS_PARALLEL),
            a.residual.into(),
        ),
    };
    let d = motif3(&t);
    println!("edges,probability");
    for mask in 0..8 {
        let label: String = ["e12", "e13", "e23"]
            .iter()
            .enumerate()
            .filter(|&(e, _)| mask & (1 << e) != 0)
            .map(|(_, s)| *s)
            .collect::<Vec<_>>()
            .join("+");
        let label = if label.is_empty() { "none".into() } else { label };
        println!("{label},{:.12}", d.prob[mask]);
    }
    Ok(())
}

fn cmd_expected_counts(a: ExpectedCountsArgs) -> CliResult {
    let m = read_model(&a.model)?;
    let b = read_binding(&a.binding)?;
    let c = expected_counts(&m, &b.params)?;
    println!("expected_triangles {:.6}", c.triangles);
    println!("expected_wedges {:.6}", c.wedges);
    match analytic_overlap(&m) {
        Ok(ov) => println!("analytic_overlap {ov:.6}"),
        Err(epgm::Error::UndefinedOverlap) => println!("analytic_overlap undefined"),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn cmd_oracle_check(a: OracleCheckArgs) -> CliResult {
    let spec = RngSpec::new(a.seed);
    let levels = [0.1, 0.5, 0.9];
    let mut csv = String::from("scheme,residual,rounds,p,g,mask,exact,mc,z,pass\n");
    let mut failures = 0usize;
    let mut case = 0u64;
    let mut run = |t: TripleSpec, name: &str, residual: &str| -> CliResult {
        let exact = motif3(&t);
        let est = mc_motif3(&t, a.trials, &spec.child("case", case))?;
        case += 1;
        for mask in 0..8 {
            let se = est[mask].std_error.max(1e-12);
            let z = (est[mask].mean - exact.prob[mask]) / se;
            let pass = z.abs() <= 4.0;
            if !pass {
                failures += 1;
            }
            let _ = writeln!(
                csv,
                "{name},{residual},{},{:?},{:?},{mask},{:.8},{:.8},{z:.3},{pass}",
                t.rounds, t.p, t.g, exact.prob[mask], est[mask].mean
            );
        }
        Ok(())
    };
    for (i, &p0) in levels.iter().enumerate() {
        let p = [p0, levels[(i + 1) % 3], levels[(i + 2) % 3]];
        run(TripleSpec::eigm(p), "eigm", "-")?;
    }
    for &rounds in &[1u32, 2, 5] {
        for &g0 in &levels {
            let p = [0.1, 0.5, 0.9];
            let g = [g0, 0.5, 0.9];
            run(TripleSpec::local(p, g, rounds), "local", "-")?;
            run(
                TripleSpec::parallel(p, g, rounds, ResidualCoupling::Shared),
                "parallel",
                "shared",
            )?;
            run(
                TripleSpec::parallel(p, g, rounds, ResidualCoupling::Independent),
                "parallel",
                "independent",
            )?;
        }
    }
    emit(&a.out, &csv)?;
    if failures > 0 {
        return Err(CliError::Numerical(format!(
            "{failures} oracle comparisons outside 4 standard errors"
        )));
    }
    Ok(())
}

fn cmd_benchmark(a: BenchmarkArgs) -> CliResult {
    let model = read_model(&a.model)?;
    let binding = read_binding(&a.binding)?;
    let nc = model.class_structure().num_classes();
    let g = if binding.params.g.len() == nc {
        binding.params.g.clone()
    } else {
        vec![0.5; nc]
    };
    let spec = RngSpec::new(binding.seed);
    let time = |b: &BindingParams, threads: usize| -> Result<f64, CliError> {
        let started = Instant::now();
        for i in 0..a.count {
            let child = spec.child("bench", i as u64);
            if b.scheme == Scheme::ParallelBinding {
                epgm::sample_parallel_binding(&model, b, &child, threads)?;
            } else {
                sample(&model, b, &child)?;
            }
        }
        Ok(started.elapsed().as_secs_f64() / a.count as f64)
    };
    println!("scheme,threads,seconds_per_graph");
    println!("eigm,1,{:.4}", time(&BindingParams::eigm(), 1)?);
    let local = BindingParams::local(g.clone(), binding.params.rounds.max(1));
    println!("local,1,{:.4}", time(&local, 1)?);
    let parallel = BindingParams::parallel(
        g,
        binding.params.rounds.max(1),
        binding.params.residual_coupling,
    );
    println!("parallel,1,{:.4}", time(&parallel, 1)?);
    if a.threads > 1 {
        println!(
            "parallel,{},{:.4}",
            a.threads,
            time(&parallel, a.threads)?
        );
    }
    Ok(())
}
