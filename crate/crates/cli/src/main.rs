//! `tanglekit`: generate, ingest and analyze tangle instances.
//!
//! Exit codes: 0 success, 1 usage or I/O errors, 2 verification findings
//! (a requested check failed on valid input).

mod ingest;

use std::io::Read;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tanglekit::generators::{gen_arcs, gen_arcs_witness, gen_min_order, gen_random, gen_triples};
use tanglekit::guide::{
    self, format_ratio, parse_ratio, GuidanceCertificate, GuidingFunction, SamplerConfig,
};
use tanglekit::instance::Instance;
use tanglekit::order::{extend_order, is_submodular, CheckScope};
use tanglekit::point_set::PointSet;
use tanglekit::tangle::{enumerate_tangles, is_consistent, Tangle};
use tanglekit::witness::{
    bound_values, greedy_witnessing, inductive_witnessing, max_intersection_chain, min_cover,
    min_witnessing, BoundValue, WitnessReport,
};

#[derive(Parser)]
#[command(name = "tanglekit", version, about = "Tangles of bipartitions: witnessing and guiding analysis")]
struct Cli {
    /// Worker-thread hint; all algorithms are deterministic and their
    /// output does not depend on this value.
    #[arg(long, global = true, env = "TANGLEKIT_THREADS", default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a named example instance as JSON.
    Gen(GenArgs),
    /// Build an instance from a CSV of feature columns.
    Ingest(IngestArgs),
    /// Run an analysis against an instance and print a JSON report.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExampleKind {
    Minorder,
    Triples,
    Arcs,
    ArcsWitness,
    Random,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    example: ExampleKind,
    /// Order parameter (minorder, triples, arcs-witness).
    #[arg(long)]
    k: Option<u64>,
    /// Ground parameter (arcs: residues; random: points).
    #[arg(long)]
    n: Option<usize>,
    /// Separation count (random).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the arc length of the arc instances.
    #[arg(long)]
    arc_len: Option<usize>,
    /// Write to a file instead of standard output.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct IngestArgs {
    /// CSV file with a header row.
    csv_path: String,
    /// `median` or `value:<x>` for numeric columns; default expects 0/1.
    #[arg(long)]
    threshold: Option<String>,
    /// Attach an order function (`min-side`).
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Instance JSON path, or `-` for standard input.
    instance: String,
    #[command(subcommand)]
    what: AnalyzeCommand,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WitnessAlgo {
    Exact,
    Greedy,
    Inductive,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Enumerate all tangles of the instance's system.
    Tangles {
        /// Refuse systems with more separations than this.
        #[arg(long, default_value_t = tanglekit::tangle::DEFAULT_ENUMERATION_LIMIT)]
        limit: usize,
    },
    /// Compute a witnessing set of the instance's tangle.
    Witness {
        #[arg(long, value_enum, default_value_t = WitnessAlgo::Exact)]
        algo: WitnessAlgo,
    },
    /// Compute a minimum cover of the instance's tangle.
    Cover,
    /// Compute a maximum intersection chain.
    Chain,
    /// Reliability duality: certificate for a threshold, or the maximum.
    Guide {
        /// Threshold as `p/q`; mutually exclusive with --max.
        #[arg(long, conflicts_with = "max")]
        rho: Option<String>,
        /// Compute the maximum reliability and an optimal function.
        #[arg(long)]
        max: bool,
    },
    /// Sample a guiding set with seeded retries.
    GuideSet {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_trials: u64,
        /// Guiding function: `max`, `uniform`, or `indicator:<SET>`.
        #[arg(long, default_value = "max")]
        function: String,
    },
    /// Extend the instance's tangle to all separations of the ground set.
    Extend {
        /// Write the extension instance JSON to a file as well.
        #[arg(long)]
        out: Option<String>,
    },
    /// Re-verify a property; exit code 2 when the check fails.
    Verify {
        /// `consistency`, `submodularity`, `witnessing:<SET>`,
        /// `reliability:<SET>`; `<SET>` is a designated-set name or a
        /// comma-separated index list.
        #[arg(long)]
        check: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with success codes.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn write_output(text: &str, out: Option<&str>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {path}"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Gen(args) => {
            let instance = generate(&args)?;
            write_output(&instance.to_json_string(), args.out.as_deref())?;
            Ok(0)
        }
        Command::Ingest(args) => {
            let attach = match args.order.as_deref() {
                None => false,
                Some("min-side") => true,
                Some(other) => bail!("unknown order function {other:?} (expected `min-side`)"),
            };
            let threshold = ingest::parse_threshold(args.threshold.as_deref())?;
            let text = std::fs::read_to_string(&args.csv_path)
                .with_context(|| format!("reading {}", args.csv_path))?;
            let instance = ingest::ingest_csv(&text, threshold, attach)?;
            write_output(&instance.to_json_string(), args.out.as_deref())?;
            Ok(0)
        }
        Command::Analyze(args) => analyze(args),
    }
}

fn generate(args: &GenArgs) -> anyhow::Result<Instance> {
    let need = |v: Option<u64>, what: &str| {
        v.ok_or_else(|| anyhow::anyhow!("--{what} is required for this example"))
    };
    let bundle = match args.example {
        ExampleKind::Minorder => gen_min_order(need(args.k, "k")?)?,
        ExampleKind::Triples => gen_triples(need(args.k, "k")?)?,
        ExampleKind::Arcs => {
            let n = args
                .n
                .ok_or_else(|| anyhow::anyhow!("--n is required for arcs"))?;
            gen_arcs(n, args.arc_len)?
        }
        ExampleKind::ArcsWitness => {
            gen_arcs_witness(need(args.k, "k")? as usize, args.arc_len)?
        }
        ExampleKind::Random => {
            let n = args
                .n
                .ok_or_else(|| anyhow::anyhow!("--n is required for random"))?;
            let m = args
                .m
                .ok_or_else(|| anyhow::anyhow!("--m is required for random"))?;
            gen_random(n, m, args.seed)?
        }
    };
    Ok(Instance::from_bundle(&bundle))
}

fn read_instance(path: &str) -> anyhow::Result<Instance> {
    let text = if path == "-" {
        let mut buffer = String::new();
        std::io::stdin()
            .read_to_string(&mut buffer)
            .context("reading standard input")?;
        buffer
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?
    };
    Ok(Instance::from_json_str(&text)?)
}

/// Resolves `<SET>`: a designated-set name or comma-separated indices.
fn resolve_set(instance: &Instance, spec: &str) -> anyhow::Result<PointSet> {
    if let Ok(set) = instance.designated(spec) {
        return Ok(set);
    }
    let indices = spec
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("{spec:?} is neither a designated set nor an index list"))?;
    for &i in &indices {
        if i >= instance.ground_set_size {
            bail!("index {i} outside the ground set");
        }
    }
    Ok(PointSet::from_indices(instance.ground_set_size, indices))
}

struct ReportWriter {
    command: String,
    digest: String,
    parameters: serde_json::Value,
    started: Instant,
}

impl ReportWriter {
    fn new(command: &str, instance: &Instance, parameters: serde_json::Value) -> anyhow::Result<Self> {
        Ok(ReportWriter {
            command: command.to_string(),
            digest: instance.digest()?,
            parameters,
            started: Instant::now(),
        })
    }

    fn emit(self, results: serde_json::Value) {
        let report = json!({
            "command": self.command,
            "instance_digest": self.digest,
            "parameters": self.parameters,
            "results": results,
            "wall_time_ms": self.started.elapsed().as_millis() as u64,
        });
        println!("{report}");
    }
}

/// The tangle order implied by attached order values: all separations have
/// order below k, so k is one more than the largest.
fn implied_k(tangle: &Tangle) -> Option<u64> {
    tangle
        .system()
        .orders()
        .map(|orders| orders.iter().max().map_or(1, |m| m + 1))
}

fn witness_results(tangle: &Tangle, report: &WitnessReport) -> serde_json::Value {
    let mut value = json!({
        "set": report.set.indices(),
        "size": report.set.len(),
        "method": report.method.as_str(),
        "certified_minimal": report.certified_minimal,
        "triple_count": report.triple_count,
    });
    if let Some(k) = implied_k(tangle) {
        if let Ok(bounds) = bound_values(k as u32) {
            if let BoundValue::Exact(second) = bounds.second_bound {
                value["bound_second"] = json!(second);
                value["within_bound"] = json!((report.set.len() as u128) <= second);
            }
        }
        value["k"] = json!(k);
    }
    value
}

fn analyze(args: AnalyzeArgs) -> anyhow::Result<u8> {
    let instance = read_instance(&args.instance)?;
    match args.what {
        AnalyzeCommand::Tangles { limit } => {
            let writer = ReportWriter::new("analyze tangles", &instance, json!({"limit": limit}))?;
            let (system, _) = instance.system()?;
            let system = std::sync::Arc::new(system);
            let tangles = enumerate_tangles(&system, limit)?;
            let mut results = json!({"count": tangles.len()});
            if tangles.len() <= 1000 {
                results["orientations"] = json!(tangles
                    .iter()
                    .map(|t| t.orientation().iter().map(|&b| b as u8).collect::<Vec<_>>())
                    .collect::<Vec<_>>());
            } else {
                results["orientations_omitted"] = json!(true);
            }
            writer.emit(results);
            Ok(0)
        }
        AnalyzeCommand::Witness { algo } => {
            let writer = ReportWriter::new(
                "analyze witness",
                &instance,
                json!({"algo": format!("{algo:?}").to_lowercase()}),
            )?;
            let tangle = instance.tangle()?;
            let report = match algo {
                WitnessAlgo::Exact => min_witnessing(&tangle)?,
                WitnessAlgo::Greedy => greedy_witnessing(&tangle)?,
                WitnessAlgo::Inductive => {
                    let k = implied_k(&tangle).ok_or_else(|| {
                        anyhow::anyhow!("inductive construction needs order values on the instance")
                    })?;
                    inductive_witnessing(&tangle, k as usize)?.report
                }
            };
            writer.emit(witness_results(&tangle, &report));
            Ok(0)
        }
        AnalyzeCommand::Cover => {
            let writer = ReportWriter::new("analyze cover", &instance, json!({}))?;
            let tangle = instance.tangle()?;
            let cover = min_cover(&tangle)?;
            let mut results = json!({
                "set": cover.indices(),
                "size": cover.len(),
            });
            if let Some(k) = implied_k(&tangle) {
                results["k"] = json!(k);
                results["within_k"] = json!(cover.len() as u64 <= k);
            }
            writer.emit(results);
            Ok(0)
        }
        AnalyzeCommand::Chain => {
            let writer = ReportWriter::new("analyze chain", &instance, json!({}))?;
            let tangle = instance.tangle()?;
            let chain = max_intersection_chain(&tangle)?;
            let mut results = json!({
                "length": chain.len(),
                "sides": chain.sides.iter().map(|s| s.indices()).collect::<Vec<_>>(),
                "intersections": chain.intersections.iter().map(|s| s.indices()).collect::<Vec<_>>(),
            });
            if let Some(k) = implied_k(&tangle) {
                results["k"] = json!(k);
            }
            writer.emit(results);
            Ok(0)
        }
        AnalyzeCommand::Guide { rho, max } => {
            if !max && rho.is_none() {
                bail!("pass --rho <p/q> or --max");
            }
            let parameters = match &rho {
                Some(r) => json!({"rho": r}),
                None => json!({"max": true}),
            };
            let writer = ReportWriter::new("analyze guide", &instance, parameters)?;
            let tangle = instance.tangle()?;
            if max {
                let (rho_star, function) = guide::max_reliability(&tangle)?;
                writer.emit(json!({
                    "branch": "guiding",
                    "rho": format_ratio(&rho_star),
                    "rho_is_maximal": true,
                    "weights": weights_object(&instance, function.weights()),
                    "verified": guide::verify_guiding(&tangle, &function, &rho_star),
                }));
                return Ok(0);
            }
            let rho = parse_ratio(&rho.unwrap())?;
            match guide::guiding_duality(&tangle, &rho)? {
                GuidanceCertificate::Guiding { function, rho } => {
                    writer.emit(json!({
                        "branch": "guiding",
                        "rho": format_ratio(&rho),
                        "weights": weights_object(&instance, function.weights()),
                        "verified": true,
                    }));
                }
                GuidanceCertificate::Witness(witness) => {
                    let weights: serde_json::Map<String, serde_json::Value> = witness
                        .weights
                        .iter()
                        .enumerate()
                        .map(|(i, w)| (format!("s{i}"), json!(format_ratio(w))))
                        .collect();
                    writer.emit(json!({
                        "branch": "witness",
                        "rho": format_ratio(&witness.rho),
                        "weights": weights,
                        "verified": true,
                    }));
                }
            }
            Ok(0)
        }
        AnalyzeCommand::GuideSet {
            seed,
            max_trials,
            function,
        } => {
            let writer = ReportWriter::new(
                "analyze guide-set",
                &instance,
                json!({"seed": seed, "max_trials": max_trials, "function": function}),
            )?;
            let tangle = instance.tangle()?;
            let g = match function.as_str() {
                "max" => guide::max_reliability(&tangle)?.1,
                "uniform" => GuidingFunction::uniform(instance.ground_set_size),
                other => match other.strip_prefix("indicator:") {
                    Some(spec) => GuidingFunction::indicator(&resolve_set(&instance, spec)?)?,
                    None => bail!("--function must be max, uniform or indicator:<SET>"),
                },
            };
            let outcome = guide::sample_guiding_set(&tangle, &g, &SamplerConfig { seed, max_trials })?;
            let results = match &outcome.found {
                Some(set) => json!({
                    "found": set.indices(),
                    "reliability": format_ratio(&guide::set_reliability(&tangle, set)?),
                    "trials": outcome.trials,
                    "condition_held": outcome.condition_held,
                }),
                None => json!({
                    "found": null,
                    "trials": outcome.trials,
                    "condition_held": outcome.condition_held,
                }),
            };
            writer.emit(results);
            Ok(0)
        }
        AnalyzeCommand::Extend { out } => {
            let writer = ReportWriter::new("analyze extend", &instance, json!({}))?;
            let tangle = instance.tangle()?;
            let ext = extend_order(&tangle, tanglekit::order::DEFAULT_EXTENSION_POINT_LIMIT)?;
            let star_orders = ext.star_system.orders().unwrap();
            let star_instance = Instance {
                ground_set_size: instance.ground_set_size,
                labels: instance.labels.clone(),
                separations: ext
                    .star_system
                    .sides()
                    .iter()
                    .enumerate()
                    .map(|(i, side)| tanglekit::instance::SeparationJson {
                        side: side.indices(),
                        order: Some(star_orders[i]),
                    })
                    .collect(),
                orientation: None,
                designated_sets: None,
                metadata: Some(json!({"extension_of": writer.digest, "k": ext.k})),
            };
            if let Some(path) = &out {
                std::fs::write(path, star_instance.to_json_string())
                    .with_context(|| format!("writing {path}"))?;
            }
            let sk_orientation: Vec<u8> = ext
                .star_tangle
                .orientation()
                .iter()
                .map(|&b| b as u8)
                .collect();
            writer.emit(json!({
                "k": ext.k,
                "star_separations": ext.star_system.len(),
                "sk_separations": ext.star_tangle.len(),
                "sk_indices": ext.sk_indices,
                "sk_orientation": sk_orientation,
                "star_instance": serde_json::to_value(&star_instance)?,
            }));
            Ok(0)
        }
        AnalyzeCommand::Verify { check } => verify(&instance, &check),
    }
}

fn weights_object(instance: &Instance, weights: &[tanglekit::lp::Rat]) -> serde_json::Value {
    let key = |i: usize| match &instance.labels {
        Some(labels) => labels[i].clone(),
        None => i.to_string(),
    };
    let map: std::collections::BTreeMap<String, String> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| (key(i), format_ratio(w)))
        .collect();
    json!(map)
}

fn verify(instance: &Instance, check: &str) -> anyhow::Result<u8> {
    let writer = ReportWriter::new("analyze verify", instance, json!({"check": check}))?;
    match check {
        "consistency" => {
            let (system, _) = instance.system()?;
            let orientation = instance
                .orientation
                .as_ref()
                .ok_or_else(|| anyhow::anyhow!("instance carries no orientation"))?;
            // Validate bits relative to the listed sides without the
            // constructor's rejection, so a violation is reported, not an
            // error.
            let stored = orientation_to_stored(instance, &system, orientation)?;
            let report = is_consistent(&system, &stored)?;
            match report.violation {
                None => {
                    writer.emit(json!({"check": "consistency", "holds": true}));
                    Ok(0)
                }
                Some(triple) => {
                    writer.emit(json!({
                        "check": "consistency",
                        "holds": false,
                        "violating_separations": triple,
                    }));
                    Ok(2)
                }
            }
        }
        "submodularity" => {
            let (system, _) = instance.system()?;
            let n = system.ground().size();
            let full_count = if n <= 25 { (1u128 << (n - 1)) - 1 } else { u128::MAX };
            let scope = if system.len() as u128 == full_count {
                CheckScope::Full
            } else {
                CheckScope::Sampled
            };
            let report = is_submodular(&system, scope)?;
            let holds = report.holds;
            writer.emit(json!({
                "check": "submodularity",
                "scope": if scope == CheckScope::Full { "full" } else { "sampled" },
                "holds": holds,
                "skipped_pairs": report.skipped_pairs,
                "violation": report.violation.map(|(a, b)| json!([a.indices(), b.indices()])),
            }));
            Ok(if holds { 0 } else { 2 })
        }
        other => {
            if let Some(spec) = other.strip_prefix("witnessing:") {
                let set = resolve_set(instance, spec)?;
                let tangle = instance.tangle()?;
                let check = tanglekit::witness::is_witnessing(&tangle, &set)?;
                let holds = check.witnessed;
                writer.emit(json!({
                    "check": "witnessing",
                    "set": set.indices(),
                    "holds": holds,
                    "unwitnessed_triple": check.missing.map(|m| json!({
                        "minimal_indices": m.minimal_indices,
                        "sides": m.sides.iter().map(|s| s.indices()).collect::<Vec<_>>(),
                    })),
                }));
                Ok(if holds { 0 } else { 2 })
            } else if let Some(spec) = other.strip_prefix("reliability:") {
                let set = resolve_set(instance, spec)?;
                let tangle = instance.tangle()?;
                let rho = guide::set_reliability(&tangle, &set)?;
                let guiding = rho > parse_ratio("1/2")?;
                writer.emit(json!({
                    "check": "reliability",
                    "set": set.indices(),
                    "reliability": format_ratio(&rho),
                    "guiding": guiding,
                }));
                Ok(if guiding { 0 } else { 2 })
            } else {
                bail!(
                    "unknown check {other:?}; expected consistency, submodularity, \
                     witnessing:<SET> or reliability:<SET>"
                )
            }
        }
    }
}

/// Re-expresses file orientation bits relative to the stored canonical
/// sides, tolerating inconsistent results (verify reports them).
fn orientation_to_stored(
    instance: &Instance,
    system: &tanglekit::SeparationSystem,
    bits: &[u8],
) -> anyhow::Result<Vec<bool>> {
    if bits.len() != instance.separations.len() {
        bail!(
            "orientation has {} entries for {} separations",
            bits.len(),
            instance.separations.len()
        );
    }
    let mut stored = vec![None; system.len()];
    for (input, sep) in instance.separations.iter().enumerate() {
        let side = PointSet::from_indices(instance.ground_set_size, sep.side.iter().copied());
        let index = system
            .find(&side)
            .expect("loaded separations are in the system");
        let toward_canonical = (system.sides()[index] == side) == (bits[input] == 1);
        match stored[index] {
            None => stored[index] = Some(toward_canonical),
            Some(prev) if prev == toward_canonical => {}
            Some(_) => bail!("conflicting orientations for one separation"),
        }
    }
    stored
        .into_iter()
        .enumerate()
        .map(|(i, o)| o.ok_or_else(|| anyhow::anyhow!("separation {i} left unoriented")))
        .collect()
}
