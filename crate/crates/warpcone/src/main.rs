use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Value};
use warpcone::config::{self, ExperimentConfig, LoadedConfig};
use warpcone::pipeline::{self, build_level, sample_seed, Overrides};
use warpcone::{io, CliError, EXIT_CONFIG, EXIT_OK};
use warpcone_core::algebra::group_ball_within;
use warpcone_core::coarse::{
    ball_product_check, cardinality_schedule, chi_radius, chi_set, chi_set_in, factorial_sizes, growth_fingerprint,
    select_base_point, subsequence_separation, BallCheckConfig,
};
use warpcone_core::graph::ApproxGraph;
use warpcone_core::net::{build_net, NetOptions};
use warpcone_core::spectral::{action_gap, cheeger_bounds_from, laplacian_spectrum, CHEEGER_EXACT_LIMIT};
use warpcone_core::warped::{warped_graph_metric, WarpedLevel};

#[derive(Parser)]
#[command(name = "warpcone", version, about = "Level-set graphs of warped cones")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the configuration's `out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override for nets (`N`) and samples (`N + 1`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Threads used for the t-steps of `run`
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Largest group ball built before giving up (exit code 4)
    #[arg(long = "cap-ball-size", global = true)]
    cap_ball_size: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full experiment over the configured t-sequence.
    Run,
    /// Static checks of a configuration.
    Validate,
    /// Net at scale 1/t.
    Net(LevelArgs),
    /// Approximating graph at scale 1/t.
    Graph(GraphArgs),
    /// Smallest normalized Laplacian eigenvalues.
    Spectrum(SpectrumArgs),
    /// Cheeger bounds and, for small graphs, the exact constant.
    Cheeger(SpectrumArgs),
    /// Averaged spectral gap of the action.
    Gap(LevelArgs),
    /// Singular set of the action on the net.
    Chi(ChiArgs),
    /// Warped ball against the product ball.
    Ballcheck(BallcheckArgs),
    /// Growth profile against the product reference.
    Fingerprint(FingerprintArgs),
    /// Nets of prescribed sizes.
    Schedule(ScheduleArgs),
    /// Subsequence separation of a size sequence.
    Separate(SeparateArgs),
}

#[derive(Args)]
struct LevelArgs {
    #[arg(long)]
    t: f64,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    t: f64,
    /// Also write the weighted auxiliary graph of the warped metric.
    #[arg(long)]
    weighted: bool,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Level to build; ignored when `--edges` is given.
    #[arg(long)]
    t: Option<f64>,
    /// Edge list to read instead of building a level.
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    vertices: Option<usize>,
    #[arg(long, default_value_t = 4)]
    k: usize,
}

#[derive(Args)]
struct ChiArgs {
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
}

#[derive(Args)]
struct BallcheckArgs {
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    /// Net index of the base point; chosen outside the singular set if absent.
    #[arg(long)]
    x0: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    l: f64,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 2000)]
    max_pairs: usize,
}

#[derive(Args)]
struct FingerprintArgs {
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 3)]
    r_max: usize,
    #[arg(long)]
    x0: Option<usize>,
}

#[derive(Args)]
struct ScheduleArgs {
    /// Comma-separated target sizes; defaults to the configuration's.
    #[arg(long, value_delimiter = ',')]
    targets: Vec<usize>,
}

#[derive(Args)]
struct SeparateArgs {
    /// Comma-separated sizes (decimal integers of any length).
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<String>,
    /// Use the first N terms of a factorial-type sequence instead.
    #[arg(long)]
    factorial: Option<usize>,
    #[arg(long)]
    d: u64,
    #[arg(long)]
    r: u32,
}

struct Ctx {
    loaded: Option<LoadedConfig>,
    overrides: Overrides,
}

impl Ctx {
    fn config(&self) -> Result<ExperimentConfig, CliError> {
        let loaded = self
            .loaded
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs --config".into()))?;
        Ok(self.overrides.apply(&loaded.config))
    }

    fn out_dir(&self) -> Result<PathBuf, CliError> {
        let dir = match (&self.overrides.out_dir, &self.loaded) {
            (Some(d), _) => d.clone(),
            (None, Some(l)) => PathBuf::from(&l.config.out_dir),
            (None, None) => PathBuf::from("out"),
        };
        fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

fn write(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), CliError>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn level_for(ctx: &Ctx, t: f64) -> Result<(ExperimentConfig, pipeline::Level), CliError> {
    let cfg = ctx.config()?;
    let action = cfg.action()?;
    let index = cfg.t_sequence.iter().position(|&x| x == t).unwrap_or(0);
    let level = build_level(&cfg, &action, t, sample_seed(&cfg, index))?;
    Ok((cfg, level))
}

fn read_graph(path: &Path, vertices: Option<usize>) -> Result<ApproxGraph, CliError> {
    let f = fs::File::open(path)?;
    io::read_edge_list(BufReader::new(f), vertices)
}

fn graph_for(ctx: &Ctx, args: &SpectrumArgs) -> Result<ApproxGraph, CliError> {
    match (&args.edges, args.t) {
        (Some(p), _) => read_graph(p, args.vertices),
        (None, Some(t)) => Ok(level_for(ctx, t)?.1.graph),
        (None, None) => Err(CliError::Config("give --t or --edges".into())),
    }
}

fn execute(cli: Cli) -> Result<(Value, i32), CliError> {
    let loaded = cli.config.as_deref().map(config::load).transpose()?;
    let ctx = Ctx {
        loaded,
        overrides: Overrides {
            out_dir: cli.out,
            seed: cli.seed,
            workers: cli.workers,
            ball_cap: cli.cap_ball_size,
        },
    };
    let cap = |cfg: &ExperimentConfig| cfg.limits.ball_cap;
    match cli.command {
        Command::Run => {
            let loaded = ctx
                .loaded
                .as_ref()
                .ok_or_else(|| CliError::Config("run needs --config".into()))?;
            let out = pipeline::run(loaded, &ctx.overrides)?;
            let summary = json!({
                "out_dir": out.out_dir.to_string_lossy(),
                "records": out.report["records"].as_array().map_or(0, |r| r.len()),
                "failed_steps": out.report["status"]["failed_steps"],
                "certificate": out.report["certificate"]["verdict"],
                "exit_code": out.exit_code,
            });
            Ok((summary, out.exit_code))
        }
        Command::Validate => {
            let cfg = ctx.config()?;
            let diagnostics = cfg.validate();
            let code = if config::errors(&diagnostics).is_empty() { EXIT_OK } else { EXIT_CONFIG };
            Ok((json!({"diagnostics": diagnostics}), code))
        }
        Command::Net(a) => {
            let (_, level) = level_for(&ctx, a.t)?;
            let dir = ctx.out_dir()?;
            let label = pipeline::t_label(a.t);
            write(&dir, &format!("{label}_net.csv"), csv_bytes(|b| io::write_points(b, &level.net.points))?)?;
            write(&dir, &format!("{label}_partition.csv"), csv_bytes(|b| io::write_partition(b, &level.partition))?)?;
            let summary = json!({"net": io::net_summary(&level.net), "partition": io::partition_summary(&level.partition)});
            write(&dir, &format!("{label}_net.json"), io::to_json_string(&summary))?;
            Ok((summary, EXIT_OK))
        }
        Command::Graph(a) => {
            let (cfg, level) = level_for(&ctx, a.t)?;
            let dir = ctx.out_dir()?;
            let label = pipeline::t_label(a.t);
            write(&dir, &format!("{label}_graph.edges"), csv_bytes(|b| io::write_edge_list(b, &level.graph))?)?;
            let mut summary = io::graph_summary(&level.graph);
            write(&dir, &format!("{label}_graph.json"), io::to_json_string(&summary))?;
            if a.weighted {
                let wl = WarpedLevel::new(cfg.action()?, a.t)?;
                let wg = warped_graph_metric(&wl, &level.net)?;
                write(&dir, &format!("{label}_warped.edges"), csv_bytes(|b| io::write_weighted_edges(b, &wg))?)?;
                summary["warped_edges"] = json!(wg.edges().len());
            }
            Ok((summary, EXIT_OK))
        }
        Command::Spectrum(a) => {
            let g = graph_for(&ctx, &a)?;
            let s = laplacian_spectrum(&g, a.k.max(2).min(g.vertex_count()))?;
            let dir = ctx.out_dir()?;
            write(&dir, "spectrum.csv", csv_bytes(|b| io::write_spectrum(b, &s))?)?;
            Ok((io::spectrum_summary(&s), EXIT_OK))
        }
        Command::Cheeger(a) => {
            let g = graph_for(&ctx, &a)?;
            let s = laplacian_spectrum(&g, a.k.max(2).min(g.vertex_count()))?;
            let c = cheeger_bounds_from(&g, &s, CHEEGER_EXACT_LIMIT)?;
            let summary = io::cheeger_summary(&c);
            write(&ctx.out_dir()?, "cheeger.json", io::to_json_string(&summary))?;
            Ok((summary, EXIT_OK))
        }
        Command::Gap(a) => {
            let (cfg, level) = level_for(&ctx, a.t)?;
            let g = action_gap(&cfg.action()?, &level.partition)?;
            let summary = io::gap_summary(&g);
            write(&ctx.out_dir()?, &format!("{}_gap.json", pipeline::t_label(a.t)), io::to_json_string(&summary))?;
            Ok((summary, EXIT_OK))
        }
        Command::Chi(a) => {
            let cfg = ctx.config()?;
            let wl = WarpedLevel::new(cfg.action()?, a.t)?;
            let net = build_net(&wl.action.model, 1.0 / a.t, cfg.seeds.net)?;
            let chi = chi_set(&wl, &net, a.r, cap(&cfg))?;
            let dir = ctx.out_dir()?;
            let label = pipeline::t_label(a.t);
            write(&dir, &format!("{label}_chi.csv"), csv_bytes(|b| io::write_chi(b, &wl, &net, &chi))?)?;
            let summary = io::chi_summary(&wl, &chi, net.len());
            write(&dir, &format!("{label}_chi.json"), io::to_json_string(&summary))?;
            Ok((summary, EXIT_OK))
        }
        Command::Ballcheck(a) => {
            let cfg = ctx.config()?;
            let wl = WarpedLevel::new(cfg.action()?, a.t)?;
            let net = build_net(&wl.action.model, 1.0 / a.t, cfg.seeds.net)?;
            let (x0, margin) = match a.x0 {
                Some(x) => (x, None),
                None => {
                    let ball = group_ball_within(&wl.action.gens, chi_radius(a.r), cap(&cfg));
                    let chi = chi_set_in(&wl, &net, a.r, &ball)?;
                    let b = select_base_point(&wl, &net, &chi, &ball, 64)?;
                    (b.index, Some(b.margin))
                }
            };
            let bc = BallCheckConfig {
                r: a.r,
                l: a.l,
                a: a.a,
                epsilon: a.epsilon,
                max_pairs: a.max_pairs,
                seed: cfg.seeds.samples,
                cap: cap(&cfg),
            };
            let rep = ball_product_check(&wl, &net, x0, &bc)?;
            let summary = json!({
                "t": a.t,
                "r": a.r,
                "x0": rep.x0,
                "base_point_margin": margin,
                "ball_size": rep.ball_size,
                "pairs": rep.pairs,
                "distortion": rep.distortion,
                "allowance": 5.0 * a.t * net.density_radius,
                "qi_violations": rep.qi_violations,
                "within_epsilon": rep.within_epsilon,
            });
            write(&ctx.out_dir()?, &format!("{}_ballcheck.json", pipeline::t_label(a.t)), io::to_json_string(&summary))?;
            Ok((summary, EXIT_OK))
        }
        Command::Fingerprint(a) => {
            let cfg = ctx.config()?;
            let wl = WarpedLevel::new(cfg.action()?, a.t)?;
            let net = build_net(&wl.action.model, 1.0 / a.t, cfg.seeds.net)?;
            let x0 = match a.x0 {
                Some(x) => x,
                None => {
                    let ball = group_ball_within(&wl.action.gens, chi_radius(a.r_max as f64), cap(&cfg));
                    let chi = chi_set_in(&wl, &net, a.r_max as f64, &ball)?;
                    select_base_point(&wl, &net, &chi, &ball, 64)?.index
                }
            };
            let f = growth_fingerprint(&wl, &net, x0, a.r_max, cap(&cfg))?;
            let dir = ctx.out_dir()?;
            let label = pipeline::t_label(a.t);
            write(&dir, &format!("{label}_profile.csv"), csv_bytes(|b| io::write_profile(b, &f))?)?;
            Ok((json!({"t": a.t, "x0": x0, "r_max": a.r_max, "counts": f.counts, "deviation": f.deviation}), EXIT_OK))
        }
        Command::Schedule(a) => {
            let cfg = ctx.config()?;
            let targets = if a.targets.is_empty() { cfg.coarse.schedule_targets.clone() } else { a.targets };
            let model = cfg.model().map_err(CliError::Config)?;
            let entries = cardinality_schedule(&model, &targets, cfg.seeds.net, &NetOptions::default())?;
            write(&ctx.out_dir()?, "schedule.csv", csv_bytes(|b| io::write_schedule(b, &entries))?)?;
            let sizes: Vec<usize> = entries.iter().map(|e| e.net.len()).collect();
            Ok((json!({"targets": targets, "sizes": sizes}), EXIT_OK))
        }
        Command::Separate(a) => {
            let sizes: Vec<BigUint> = match a.factorial {
                Some(n) => factorial_sizes(n),
                None => a
                    .sizes
                    .iter()
                    .map(|s| s.trim().parse::<BigUint>().map_err(|e| CliError::Config(format!("size {s:?}: {e}"))))
                    .collect::<Result<_, _>>()?,
            };
            let cert = subsequence_separation(&sizes, a.d, a.r)?;
            let v = io::separation_json(&sizes, &cert);
            write(&ctx.out_dir()?, "separation.json", io::to_json_string(&v))?;
            Ok((v, EXIT_OK))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok((summary, code)) => {
            print!("{}", io::to_json_string(&summary));
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
