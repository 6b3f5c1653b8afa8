//! Tables (CSV with a header row), edge lists and JSON summaries.

use std::io::{BufRead, Write};

use num_bigint::BigUint;
use serde_json::{json, Value};
use warpcone_core::coarse::{witness_labels, ChiSet, Fingerprint, ScheduleEntry, SeparationCertificate};
use warpcone_core::graph::{graph_report, ApproxGraph};
use warpcone_core::manifold::Point;
use warpcone_core::net::{Net, Partition};
use warpcone_core::spectral::{
    CheegerReport, Control, ControlFunctions, GapReport, ObstructionCertificate, SpectrumReport,
};
use warpcone_core::warped::{EdgeKind, WarpedGraph, WarpedLevel};

use crate::CliError;

/// `index, x0, x1, ...`, one point per row.
pub fn write_points<W: Write>(w: W, points: &[Point]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    let width = points.first().map_or(0, |p| p.0.len());
    let mut header = vec!["index".to_string()];
    header.extend((0..width).map(|i| format!("x{i}")));
    out.write_record(&header)?;
    for (i, p) in points.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(p.0.iter().map(|x| x.to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_points<R: std::io::Read>(r: R) -> Result<Vec<Point>, CliError> {
    let mut rd = csv::Reader::from_reader(r);
    let mut points = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let idx: usize = rec
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::Format(format!("row {k}: bad index")))?;
        if idx != k {
            return Err(CliError::Format(format!("row {k}: index {idx} out of order")));
        }
        let coords = rec
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>().map_err(|e| CliError::Format(format!("row {k}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        points.push(Point(coords));
    }
    Ok(points)
}

/// `region, measure, samples`.
pub fn write_partition<W: Write>(w: W, part: &Partition) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["region", "measure", "samples"])?;
    for (i, (m, c)) in part.measures.iter().zip(&part.sample_counts).enumerate() {
        out.write_record([i.to_string(), m.to_string(), c.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn net_summary(net: &Net) -> Value {
    json!({
        "size": net.len(),
        "r": net.separation,
        "R": net.density_radius,
        "fill_radius": net.fill_radius,
        "seed": net.seed,
        "pool_size": net.pool_size,
        "degenerate": net.degenerate,
        "model": net.model.to_string(),
    })
}

pub fn partition_summary(part: &Partition) -> Value {
    json!({
        "size": part.len(),
        "r": part.net.separation,
        "R": part.net.density_radius,
        "mesh": part.mesh,
        "Q": part.q,
        "n_samples": part.n_samples,
        "seed": part.seed,
    })
}

/// One `u v` line per edge, `u < v`, in lexicographic order.
pub fn write_edge_list<W: Write>(mut w: W, g: &ApproxGraph) -> Result<(), CliError> {
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Parses an edge list. Without `vertex_count` the graph has
/// `1 + largest endpoint` vertices.
pub fn read_edge_list<R: BufRead>(r: R, vertex_count: Option<usize>) -> Result<ApproxGraph, CliError> {
    let mut edges = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_ascii_whitespace();
        let mut next = || -> Result<usize, CliError> {
            parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::Format(format!("line {}: expected `u v`", k + 1)))
        };
        let (u, v) = (next()?, next()?);
        if parts.next().is_some() {
            return Err(CliError::Format(format!("line {}: expected `u v`", k + 1)));
        }
        edges.push((u, v));
    }
    let n = vertex_count.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
    Ok(ApproxGraph::from_edges(n, &edges)?)
}

/// Graph summary with its provenance.
pub fn graph_summary(g: &ApproxGraph) -> Value {
    let r = graph_report(g);
    let p = &g.provenance;
    json!({
        "vertex_count": r.vertex_count,
        "edge_count": r.edge_count,
        "max_degree": r.max_degree,
        "min_degree": r.min_degree,
        "mean_degree": r.mean_degree,
        "component_count": r.component_count,
        "component_sizes": r.component_sizes,
        "provenance": {
            "regions": p.regions,
            "n_samples": p.n_samples,
            "sample_seed": p.sample_seed,
            "net_seed": p.net_seed,
            "Q": p.q,
            "mesh": p.mesh,
            "generators": p.generators,
            "t": p.t,
            "threshold": p.threshold,
        },
    })
}

/// `u v weight` per line, weight with 9 decimals.
pub fn write_weighted_edges<W: Write>(mut w: W, g: &WarpedGraph) -> Result<(), CliError> {
    for &(u, v, weight, kind) in g.edges() {
        debug_assert!(matches!(kind, EdgeKind::Metric | EdgeKind::Warp));
        writeln!(w, "{u} {v} {weight:.9}")?;
    }
    w.flush()?;
    Ok(())
}

/// `index, eigenvalue, residual`.
pub fn write_spectrum<W: Write>(w: W, s: &SpectrumReport) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "eigenvalue", "residual"])?;
    for (i, (l, r)) in s.eigenvalues.iter().zip(&s.residuals).enumerate() {
        out.write_record([i.to_string(), l.to_string(), r.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn spectrum_summary(s: &SpectrumReport) -> Value {
    json!({
        "eigenvalues": s.eigenvalues,
        "residuals": s.residuals,
        "lambda2": s.lambda2(),
        "solver": s.solver.name(),
        "connected": s.connected,
    })
}

pub fn cheeger_summary(c: &CheegerReport) -> Value {
    json!({
        "lambda2": c.lambda2,
        "h_lower": c.h_lower,
        "h_upper": c.h_upper,
        "h_exact": c.h_exact,
        "witness_set": c.witness_set,
    })
}

pub fn gap_summary(g: &GapReport) -> Value {
    json!({
        "epsilon_avg": g.epsilon_avg,
        "label": g.label,
        "bounds_max_form": g.bounds_max_form,
        "regions": g.regions,
        "n_samples": g.n_samples,
        "generators": g.generators,
    })
}

/// `index, member, witness, displacement` for every net point.
pub fn write_chi<W: Write>(w: W, level: &WarpedLevel, net: &Net, chi: &ChiSet) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "member", "witness", "displacement"])?;
    let mut k = 0;
    for i in 0..net.len() {
        if chi.members.get(k) == Some(&i) {
            let (word, d) = &chi.witnesses[k];
            k += 1;
            out.write_record([i.to_string(), "1".into(), witness_labels(level, word).concat(), d.to_string()])?;
        } else {
            out.write_record([i.to_string(), "0".into(), String::new(), String::new()])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn chi_summary(level: &WarpedLevel, chi: &ChiSet, net_size: usize) -> Value {
    json!({
        "t": chi.t,
        "r": chi.r,
        "threshold": chi.threshold,
        "members": chi.members.len(),
        "net_size": net_size,
        "fraction": chi.fraction,
        "relator": chi.relator.as_ref().map(|w| witness_labels(level, w).concat()),
    })
}

/// `radius, count, warped, product`.
pub fn write_profile<W: Write>(w: W, f: &Fingerprint) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["radius", "count", "warped", "product"])?;
    for (i, &k) in f.warped.radii.iter().enumerate() {
        out.write_record([
            k.to_string(),
            f.counts[i].to_string(),
            f.warped.values[i].to_string(),
            f.product.values[i].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `target, t, pre_size, lower, upper, coarse_size, fine_size, size`.
pub fn write_schedule<W: Write>(w: W, entries: &[ScheduleEntry]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["target", "t", "pre_size", "lower", "upper", "coarse_size", "fine_size", "size"])?;
    for e in entries {
        out.write_record([
            e.target.to_string(),
            e.t.to_string(),
            e.pre_size.to_string(),
            e.volume_bounds.0.to_string(),
            e.volume_bounds.1.to_string(),
            e.coarse_size.to_string(),
            e.fine_size.to_string(),
            e.net.len().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn control_json(c: &Control) -> Value {
    match c {
        Control::Identity => json!({"family": "identity"}),
        Control::Affine { slope, intercept } => json!({"family": "affine", "slope": slope, "intercept": intercept}),
        Control::Log { scale, intercept } => json!({"family": "log", "scale": scale, "intercept": intercept}),
        Control::Table(t) => json!({"family": "table", "table": t.iter().map(|&(x, y)| [x, y]).collect::<Vec<_>>()}),
    }
}

pub fn controls_json(c: &ControlFunctions) -> Value {
    json!({"rho_minus": control_json(&c.rho_minus), "rho_plus": control_json(&c.rho_plus)})
}

pub fn certificate_json(c: &ObstructionCertificate) -> Value {
    json!({
        "inputs": {
            "p_size": c.p_size,
            "Q": c.q,
            "D": c.d,
            "epsilon": c.epsilon,
            "controls": controls_json(&c.controls),
        },
        "argument": c.argument,
        "lower_bound": c.lower_bound,
        "upper_bound": c.upper_bound,
        "verdict": c.verdict.name(),
    })
}

/// Sizes are written as decimal strings since they may exceed any float.
pub fn separation_json(sizes: &[BigUint], c: &SeparationCertificate) -> Value {
    json!({
        "inputs": {
            "sizes": sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "D": c.d,
            "r": c.r,
        },
        "n0": c.n0.to_string(),
        "selected": c.selected,
        "pairs": c.pairs.iter().map(|p| json!({"m": p.m, "n": p.n, "holds": p.holds})).collect::<Vec<_>>(),
        "all_hold": c.pairs.iter().all(|p| p.holds),
    })
}

/// Pretty JSON with a trailing newline; keys come out sorted.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}
