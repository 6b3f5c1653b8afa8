//! The `run` orchestration: one step per `t`, then the certificate and
//! coarse probes, merged into a deterministic report.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_bigint::BigUint;
use serde_json::{json, Map, Value};
use warpcone_core::algebra::DEFAULT_BALL_CAP;
use warpcone_core::coarse::{cardinality_schedule, chi_radius, chi_set, subsequence_separation, ChiSet};
use warpcone_core::graph::{approx_graph, graph_report, ApproxGraph};
use warpcone_core::net::{build_net, voronoi_partition, Net, NetOptions, Partition};
use warpcone_core::spectral::{
    action_gap, cheeger_bounds_from, embedding_obstruction, laplacian_spectrum, CheegerReport, GapReport,
    SpectrumReport, CHEEGER_EXACT_LIMIT,
};
use warpcone_core::warped::{ActionSpec, WarpedLevel};
use warpcone_core::Error;

use crate::config::{self, config_hash, ExperimentConfig, LoadedConfig};
use crate::{error_kind, io, CliError, EXIT_FAILURE, EXIT_OK, EXIT_RESOURCE};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Command-line overrides applied on top of a configuration.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub ball_cap: Option<usize>,
}

impl Overrides {
    /// The configuration with overrides applied. A `--seed N` sets the net
    /// seed to `N` and the sample seed to `N + 1`.
    pub fn apply(&self, cfg: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = cfg.clone();
        if let Some(s) = self.seed {
            cfg.seeds.net = s;
            cfg.seeds.samples = s.wrapping_add(1);
        }
        if let Some(w) = self.workers {
            cfg.limits.workers = w;
        }
        if let Some(c) = self.ball_cap {
            cfg.limits.ball_cap = c;
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = d.to_string_lossy().into_owned();
        }
        cfg
    }

    fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "workers": self.workers,
            "ball_cap": self.ball_cap,
        })
    }
}

/// Sample seed of the `i`-th level.
pub fn sample_seed(cfg: &ExperimentConfig, i: usize) -> u64 {
    cfg.seeds.samples.wrapping_add(i as u64)
}

/// Net, partition and approximating graph of one level.
pub struct Level {
    pub t: f64,
    pub net: Net,
    pub partition: Partition,
    pub graph: ApproxGraph,
}

pub fn build_level(cfg: &ExperimentConfig, action: &ActionSpec, t: f64, sample_seed: u64) -> Result<Level, Error> {
    if !(t >= 1.0) {
        return Err(Error::Input(format!("t must be at least 1, got {t}")));
    }
    let net = build_net(&action.model, 1.0 / t, cfg.seeds.net)?;
    let n_samples = cfg.samples.per_region * net.len();
    let partition = voronoi_partition(&net, n_samples, sample_seed)?;
    let mut graph = approx_graph(action, &partition, cfg.samples.edge_threshold)?;
    graph.provenance.t = Some(t);
    Ok(Level {
        t,
        net,
        partition,
        graph,
    })
}

/// Everything computed for one `t`.
pub struct StepOutput {
    pub level: Level,
    pub warped: WarpedLevel,
    pub spectrum: Option<SpectrumReport>,
    pub cheeger: Option<CheegerReport>,
    pub gap: Option<GapReport>,
    pub chi: Option<ChiSet>,
}

pub fn run_step(cfg: &ExperimentConfig, action: &ActionSpec, t: f64, index: usize) -> Result<StepOutput, Error> {
    let level = build_level(cfg, action, t, sample_seed(cfg, index))?;
    let warped = WarpedLevel::new(action.clone(), t)?;
    let spectrum = if cfg.probes.spectrum {
        let k = cfg.probes.eigenvalues.max(2).min(level.graph.vertex_count());
        Some(laplacian_spectrum(&level.graph, k)?)
    } else {
        None
    };
    let cheeger = match &spectrum {
        Some(s) if cfg.probes.cheeger && s.connected && level.graph.vertex_count() >= 2 => {
            Some(cheeger_bounds_from(&level.graph, s, CHEEGER_EXACT_LIMIT)?)
        }
        _ => None,
    };
    let gap = if cfg.probes.gap && level.partition.len() >= 2 {
        Some(action_gap(action, &level.partition)?)
    } else {
        None
    };
    let chi = if cfg.probes.chi {
        Some(chi_set(&warped, &level.net, cfg.probes.chi_r, cfg.limits.ball_cap)?)
    } else {
        None
    };
    Ok(StepOutput {
        level,
        warped,
        spectrum,
        cheeger,
        gap,
        chi,
    })
}

/// File-name label of a level: `t8`, `t2.5`.
pub fn t_label(t: f64) -> String {
    format!("t{t}")
}

fn step_record(t: f64, out: &StepOutput, files: Vec<String>) -> Value {
    let rep = graph_report(&out.level.graph);
    let part = &out.level.partition;
    json!({
        "t": t,
        "status": "ok",
        "vertices": rep.vertex_count,
        "edges": rep.edge_count,
        "max_degree": rep.max_degree,
        "min_degree": rep.min_degree,
        "mean_degree": rep.mean_degree,
        "components": rep.component_count,
        "net_r": out.level.net.separation,
        "net_R": out.level.net.density_radius,
        "mesh": part.mesh,
        "Q": part.q,
        "n_samples": part.n_samples,
        "net_seed": out.level.net.seed,
        "sample_seed": part.seed,
        "lambda2": out.spectrum.as_ref().map(|s| s.lambda2()),
        "eigenvalues": out.spectrum.as_ref().map(|s| s.eigenvalues.clone()),
        "solver": out.spectrum.as_ref().map(|s| s.solver.name()),
        "h_lower": out.cheeger.as_ref().map(|c| c.h_lower),
        "h_upper": out.cheeger.as_ref().map(|c| c.h_upper),
        "h_exact": out.cheeger.as_ref().and_then(|c| c.h_exact),
        "epsilon_avg": out.gap.as_ref().map(|g| g.epsilon_avg),
        "gap_label": out.gap.as_ref().map(|g| g.label),
        "chi_r": out.chi.as_ref().map(|c| c.r),
        "chi_word_radius": out.chi.as_ref().map(|c| chi_radius(c.r)),
        "chi_fraction": out.chi.as_ref().map(|c| c.fraction),
        "files": files,
    })
}

fn write_step_files(dir: &Path, out: &StepOutput) -> Result<Vec<String>, CliError> {
    let label = t_label(out.level.t);
    let mut files = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<(), CliError> {
        fs::write(dir.join(&name), bytes)?;
        files.push(name);
        Ok(())
    };
    let mut buf = Vec::new();
    io::write_points(&mut buf, &out.level.net.points)?;
    put(format!("{label}_net.csv"), std::mem::take(&mut buf))?;
    io::write_partition(&mut buf, &out.level.partition)?;
    put(format!("{label}_partition.csv"), std::mem::take(&mut buf))?;
    put(
        format!("{label}_partition.json"),
        io::to_json_string(&io::partition_summary(&out.level.partition)).into_bytes(),
    )?;
    io::write_edge_list(&mut buf, &out.level.graph)?;
    put(format!("{label}_graph.edges"), std::mem::take(&mut buf))?;
    put(
        format!("{label}_graph.json"),
        io::to_json_string(&io::graph_summary(&out.level.graph)).into_bytes(),
    )?;
    if let Some(s) = &out.spectrum {
        io::write_spectrum(&mut buf, s)?;
        put(format!("{label}_spectrum.csv"), std::mem::take(&mut buf))?;
    }
    if let Some(c) = &out.chi {
        io::write_chi(&mut buf, &out.warped, &out.level.net, c)?;
        put(format!("{label}_chi.csv"), std::mem::take(&mut buf))?;
    }
    Ok(files)
}

/// Runs every `t`-step on up to `workers` threads; results keep the order of
/// the sequence.
fn run_steps(cfg: &ExperimentConfig, action: &ActionSpec) -> Vec<Result<StepOutput, Error>> {
    let ts = &cfg.t_sequence;
    let slots: Vec<Mutex<Option<Result<StepOutput, Error>>>> = ts.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = cfg.limits.workers.clamp(1, ts.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= ts.len() {
                    break;
                }
                let r = run_step(cfg, action, ts[i], i);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("every step ran"))
        .collect()
}

fn error_json(e: &Error) -> Value {
    json!({"kind": error_kind(e), "message": e.to_string()})
}

fn certificate_block(cfg: &ExperimentConfig, last: Option<&Value>) -> Value {
    let c = &cfg.certificate;
    let from_last = |key: &str| last.and_then(|r| r.get(key)).cloned().unwrap_or(Value::Null);
    let p_size = c.p_size.or_else(|| from_last("vertices").as_u64());
    let q = c.q.or_else(|| from_last("Q").as_f64());
    let d = c.d.or_else(|| from_last("max_degree").as_u64());
    let epsilon = c.epsilon.or_else(|| from_last("epsilon_avg").as_f64());
    let controls = match c.controls() {
        Ok(x) => x,
        Err(e) => return json!({"status": "error", "error": {"kind": "input", "message": e}}),
    };
    let (Some(p_size), Some(q), Some(d), Some(epsilon)) = (p_size, q, d, epsilon) else {
        return json!({
            "status": "skipped",
            "reason": "certificate inputs are neither configured nor measured",
            "inputs": {"p_size": p_size, "Q": q, "D": d, "epsilon": epsilon},
        });
    };
    match embedding_obstruction(p_size, q, d, epsilon, &controls) {
        Ok(cert) => {
            let mut v = io::certificate_json(&cert);
            v["status"] = json!("ok");
            v
        }
        Err(e) => json!({
            "status": "error",
            "error": error_json(&e),
            "inputs": {"p_size": p_size, "Q": q, "D": d, "epsilon": epsilon, "controls": io::controls_json(&controls)},
        }),
    }
}

fn coarse_block(cfg: &ExperimentConfig, records: &[Value], dir: Option<&Path>) -> Result<Value, CliError> {
    let mut block = Map::new();
    if let Some(r) = cfg.coarse.separation_radius {
        let ok: Vec<&Value> = records.iter().filter(|r| r["status"] == "ok").collect();
        let sizes: Vec<BigUint> = ok.iter().map(|r| BigUint::from(r["vertices"].as_u64().unwrap_or(0))).collect();
        let d = ok.iter().filter_map(|r| r["max_degree"].as_u64()).max().unwrap_or(0);
        let v = match subsequence_separation(&sizes, d, r) {
            Ok(cert) => {
                let v = io::separation_json(&sizes, &cert);
                if let Some(dir) = dir {
                    fs::write(dir.join("separation.json"), io::to_json_string(&v))?;
                }
                v
            }
            Err(e) => json!({"status": "error", "error": error_json(&e)}),
        };
        block.insert("separation".into(), v);
    }
    if !cfg.coarse.schedule_targets.is_empty() {
        let v = match cfg
            .model()
            .map_err(Error::Input)
            .and_then(|m| cardinality_schedule(&m, &cfg.coarse.schedule_targets, cfg.seeds.net, &NetOptions::default()))
        {
            Ok(entries) => {
                if let Some(dir) = dir {
                    let mut buf = Vec::new();
                    io::write_schedule(&mut buf, &entries)?;
                    fs::write(dir.join("schedule.csv"), buf)?;
                }
                json!(entries
                    .iter()
                    .map(|e| json!({"target": e.target, "t": e.t, "pre_size": e.pre_size, "size": e.net.len()}))
                    .collect::<Vec<_>>())
            }
            Err(e) => json!({"status": "error", "error": error_json(&e)}),
        };
        block.insert("schedule".into(), v);
    }
    Ok(Value::Object(block))
}

const RECORD_COLUMNS: [&str; 14] = [
    "t",
    "status",
    "vertices",
    "edges",
    "max_degree",
    "min_degree",
    "mesh",
    "Q",
    "lambda2",
    "h_lower",
    "h_upper",
    "h_exact",
    "epsilon_avg",
    "chi_fraction",
];

fn write_records_csv(path: &Path, records: &[Value]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(RECORD_COLUMNS)?;
    for r in records {
        out.write_record(RECORD_COLUMNS.iter().map(|k| match &r[*k] {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            v => v.to_string(),
        }))?;
    }
    out.flush()?;
    Ok(())
}

/// Result of [`run`].
pub struct RunOutcome {
    pub report: Value,
    pub exit_code: i32,
    pub out_dir: PathBuf,
}

/// Runs a full experiment and writes its files into the output directory.
///
/// A failing `t`-step is recorded and the remaining steps continue; the exit
/// code is then 4 when a resource cap was hit and 3 otherwise.
pub fn run(loaded: &LoadedConfig, overrides: &Overrides) -> Result<RunOutcome, CliError> {
    let cfg = overrides.apply(&loaded.config);
    let diagnostics = cfg.validate();
    let errors = config::errors(&diagnostics);
    if !errors.is_empty() {
        return Err(CliError::Config(errors.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("; ")));
    }
    let action = cfg.action()?;
    let dir = PathBuf::from(&cfg.out_dir);
    fs::create_dir_all(&dir)?;

    let mut records = Vec::new();
    let mut failed = 0;
    let mut resource = false;
    for (i, res) in run_steps(&cfg, &action).into_iter().enumerate() {
        let t = cfg.t_sequence[i];
        match res {
            Ok(out) => {
                let files = write_step_files(&dir, &out)?;
                records.push(step_record(t, &out, files));
            }
            Err(e) => {
                failed += 1;
                resource |= matches!(e, Error::Resource { .. });
                records.push(json!({"t": t, "status": "error", "error": error_json(&e)}));
            }
        }
    }
    let last_ok = records.iter().rev().find(|r| r["status"] == "ok");
    let certificate = certificate_block(&cfg, last_ok);
    let coarse = coarse_block(&cfg, &records, Some(&dir))?;
    write_records_csv(&dir.join("records.csv"), &records)?;
    fs::write(dir.join("certificate.json"), io::to_json_string(&certificate))?;

    let exit_code = if resource {
        EXIT_RESOURCE
    } else if failed > 0 {
        EXIT_FAILURE
    } else {
        EXIT_OK
    };
    let report = json!({
        "name": cfg.name,
        "model": cfg.model,
        "generators": action.gens.labels(),
        "t_sequence": cfg.t_sequence,
        "records": records,
        "certificate": certificate,
        "coarse": coarse,
        "provenance": {
            "config_hash": config_hash(&loaded.raw),
            "versions": {"warpcone": VERSION, "warpcone-core": VERSION},
            "seeds": {"net": cfg.seeds.net, "samples": cfg.seeds.samples},
            "overrides": overrides.to_json(),
            "samples_per_region": cfg.samples.per_region,
            "edge_threshold": cfg.samples.edge_threshold,
            "ball_cap": cfg.limits.ball_cap,
        },
        "diagnostics": diagnostics,
        "status": {"failed_steps": failed, "exit_code": exit_code},
    });
    fs::write(dir.join("report.json"), io::to_json_string(&report))?;
    Ok(RunOutcome {
        report,
        exit_code,
        out_dir: dir,
    })
}

/// Default ball cap for subcommands without a configuration.
pub fn default_cap() -> usize {
    DEFAULT_BALL_CAP
}
