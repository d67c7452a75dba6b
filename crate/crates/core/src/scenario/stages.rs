//! The command-line stages over an artifact directory:
//! `synth → baseline → design-tolls → run → report`.
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pricing::{SchemeKind, TollScheme};

use super::artifacts::{groups_csv, indicators_csv, welfare_csv, ArtifactStore};
use super::config::ScenarioConfig;
use super::pipeline::{
    compare, design_schemes, evaluate, network_for, run_scenario, Comparison, DesignOutput, Evaluation, RunOutput,
    Synthesis,
};

pub const CONFIG: &str = "config.toml";
pub const SYNTHESIS: &str = "synth/synthesis.json";
pub const DESIGN: &str = "design/design.json";

pub fn run_path(kind: SchemeKind) -> String {
    format!("runs/{}/run.json", kind.name())
}

pub fn evaluation_path(kind: SchemeKind) -> String {
    format!("runs/{}/evaluation.json", kind.name())
}

/// Overrides applied on top of the stored configuration.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub iterations: Option<usize>,
    pub emit_trajectories: bool,
}

/// Stored configuration with any overrides applied.
pub fn stored_config(store: &ArtifactStore, o: &Overrides) -> Result<ScenarioConfig> {
    let text = String::from_utf8(store.read_verified(CONFIG)?).map_err(|e| Error::Config(e.to_string()))?;
    let mut cfg = ScenarioConfig::from_toml_str(&text)?;
    if let Some(k) = o.iterations {
        cfg.learning.iterations = k;
        cfg.learning.max_iterations = cfg.learning.max_iterations.max(k);
    }
    cfg.emit_trajectories |= o.emit_trajectories;
    cfg.validate()?;
    Ok(cfg)
}

pub fn synth(cfg: &ScenarioConfig, store: &ArtifactStore) -> Result<Synthesis> {
    cfg.validate()?;
    let t = Instant::now();
    let syn = super::pipeline::synthesize(cfg)?;
    store.write_bytes(CONFIG, cfg.to_toml_string()?.as_bytes())?;
    store.write_json(SYNTHESIS, &syn)?;
    log::info!("synthesis written in {:.1}s", t.elapsed().as_secs_f64());
    Ok(syn)
}

/// Run summary kept beside the full output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub scheme: SchemeKind,
    pub iterations: usize,
    pub changes: Vec<f64>,
    pub vehicles_entered: usize,
    pub trips_truncated: usize,
    pub toll_revenue: f64,
    pub fee_increment: f64,
    pub seconds: f64,
}

fn write_run(cfg: &ScenarioConfig, store: &ArtifactStore, run: &RunOutput, ev: &Evaluation, seconds: f64) -> Result<()> {
    let kind = run.scheme.kind;
    store.write_json(&run_path(kind), run)?;
    store.write_json(&evaluation_path(kind), ev)?;
    let summary = RunSummary {
        scheme: kind,
        iterations: run.changes.len(),
        changes: run.changes.clone(),
        vehicles_entered: run.day.entered,
        trips_truncated: run.day.truncated,
        toll_revenue: run.day.ledger.total(),
        fee_increment: run.freight.fee_increment,
        seconds,
    };
    store.write_json_pretty(&format!("runs/{}/summary.json", kind.name()), &summary)?;
    if cfg.emit_trajectories {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["vehicle", "leg", "class", "origin", "dest", "depart", "arrive", "length_km", "toll", "links"])?;
        for t in &run.day.trajectories {
            w.write_record([
                t.vehicle.to_string(),
                t.leg.to_string(),
                t.class.name().to_string(),
                t.origin.to_string(),
                t.dest.to_string(),
                format!("{:.3}", t.depart),
                t.arrive.map(|a| format!("{a:.3}")).unwrap_or_default(),
                format!("{:.4}", t.length_km),
                format!("{:.4}", t.toll),
                t.links.iter().map(|l| l.link.to_string()).collect::<Vec<_>>().join(" "),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(format!("csv buffer: {e}")))?;
        store.write_bytes(&format!("runs/{}/trajectories.csv", kind.name()), &bytes)?;
    }
    Ok(())
}

fn run_and_store(cfg: &ScenarioConfig, store: &ArtifactStore, syn: &Synthesis, scheme: &TollScheme) -> Result<(RunOutput, Evaluation)> {
    let t = Instant::now();
    let run = run_scenario(cfg, syn, scheme).map_err(|e| e.in_stage("day-to-day run"))?;
    let ev = evaluate(cfg, syn, &run).map_err(|e| e.in_stage("evaluation"))?;
    write_run(cfg, store, &run, &ev, t.elapsed().as_secs_f64())?;
    log::info!("{} run finished in {:.1}s", scheme.kind.name(), t.elapsed().as_secs_f64());
    Ok((run, ev))
}

pub fn baseline(cfg: &ScenarioConfig, store: &ArtifactStore) -> Result<(RunOutput, Evaluation)> {
    let syn: Synthesis = store.read_json(SYNTHESIS)?;
    run_and_store(cfg, store, &syn, &TollScheme::none())
}

pub fn design(cfg: &ScenarioConfig, store: &ArtifactStore) -> Result<DesignOutput> {
    let syn: Synthesis = store.read_json(SYNTHESIS)?;
    let base: RunOutput = store.read_json(&run_path(SchemeKind::None))?;
    let net = network_for(&syn.net, &TollScheme::none())?;
    let d = design_schemes(cfg, &net, &base.day)?;
    store.write_json_pretty(DESIGN, &d)?;
    for s in &d.schemes {
        store.write_json_pretty(&format!("design/{}.json", s.scheme.kind.name()), s)?;
    }
    Ok(d)
}

pub fn run(cfg: &ScenarioConfig, store: &ArtifactStore, kind: SchemeKind) -> Result<(RunOutput, Evaluation)> {
    let syn: Synthesis = store.read_json(SYNTHESIS)?;
    let scheme = if kind == SchemeKind::None {
        TollScheme::none()
    } else {
        let d: DesignOutput = store.read_json(DESIGN)?;
        d.scheme(kind)
            .cloned()
            .ok_or_else(|| Error::invalid(format!("no designed {} scheme", kind.name())))?
    };
    run_and_store(cfg, store, &syn, &scheme)
}

/// One row of the report summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportRow {
    pub scheme: SchemeKind,
    pub toll_revenue: f64,
    pub passenger_cs: f64,
    pub freight_cs: f64,
    pub emission_cost: f64,
    pub social_welfare: f64,
}

/// Compares every scheme that has a stored run against the baseline.
pub fn report(cfg: &ScenarioConfig, store: &ArtifactStore) -> Result<Vec<Comparison>> {
    let syn: Synthesis = store.read_json(SYNTHESIS)?;
    let d: DesignOutput = store.read_json(DESIGN)?;
    let base: RunOutput = store.read_json(&run_path(SchemeKind::None))?;
    let bev: Evaluation = store.read_json(&evaluation_path(SchemeKind::None))?;
    let mut out = Vec::new();
    for kind in [SchemeKind::Distance, SchemeKind::Cordon, SchemeKind::Area] {
        if !store.contains(&run_path(kind))? {
            continue;
        }
        let run: RunOutput = store.read_json(&run_path(kind))?;
        let ev: Evaluation = store.read_json(&evaluation_path(kind))?;
        out.push(compare(cfg, &syn, d.windows, (&base, &bev), (&run, &ev))?);
    }
    if out.is_empty() {
        return Err(Error::invalid("no policy runs to report; run at least one scheme first"));
    }
    let names: Vec<&str> = out.iter().map(|c| c.scheme.name()).collect();
    let w: Vec<(&str, _)> = names.iter().copied().zip(out.iter().map(|c| &c.welfare)).collect();
    store.write_bytes("report/welfare.csv", &welfare_csv(&w)?)?;
    let mut g = Vec::new();
    for (n, c) in names.iter().zip(&out) {
        g.push((*n, "passengers", c.passenger_groups.as_slice()));
        g.push((*n, "shippers", c.shipper_groups.as_slice()));
    }
    store.write_bytes("report/groups.csv", &groups_csv(&g)?)?;
    let mut ind = Vec::new();
    for (n, c) in names.iter().zip(&out) {
        ind.push((format!("none@{n}"), &c.baseline_indicators));
        ind.push((n.to_string(), &c.policy_indicators));
    }
    let rows: Vec<(&str, _)> = ind.iter().map(|(n, i)| (n.as_str(), *i)).collect();
    store.write_bytes("report/indicators.csv", &indicators_csv(&rows)?)?;
    let summary: Vec<ReportRow> = out
        .iter()
        .map(|c| ReportRow {
            scheme: c.scheme,
            toll_revenue: c.welfare.toll_revenue,
            passenger_cs: c.welfare.passenger_cs,
            freight_cs: c.welfare.freight_cs,
            emission_cost: c.welfare.emission_cost,
            social_welfare: c.welfare.social_welfare,
        })
        .collect();
    store.write_json_pretty("report/summary.json", &summary)?;
    for c in &out {
        store.write_json(&format!("report/{}/comparison.json", c.scheme.name()), c)?;
    }
    Ok(out)
}

/// Every stage in memory, without touching disk.
pub struct FullRun {
    pub synthesis: Synthesis,
    pub baseline: (RunOutput, Evaluation),
    pub design: DesignOutput,
    pub policies: Vec<(RunOutput, Evaluation)>,
    pub comparisons: Vec<Comparison>,
}

pub fn run_all(cfg: &ScenarioConfig, kinds: &[SchemeKind]) -> Result<FullRun> {
    cfg.validate()?;
    let syn = super::pipeline::synthesize(cfg)?;
    let base_run = run_scenario(cfg, &syn, &TollScheme::none())?;
    let base_ev = evaluate(cfg, &syn, &base_run)?;
    let design = design_schemes(cfg, &syn.net, &base_run.day)?;
    let mut policies = Vec::new();
    let mut comparisons = Vec::new();
    for &kind in kinds {
        let scheme = design
            .scheme(kind)
            .cloned()
            .ok_or_else(|| Error::invalid(format!("no designed {} scheme", kind.name())))?;
        let run = run_scenario(cfg, &syn, &scheme)?;
        let ev = evaluate(cfg, &syn, &run)?;
        comparisons.push(compare(cfg, &syn, design.windows, (&base_run, &base_ev), (&run, &ev))?);
        policies.push((run, ev));
    }
    Ok(FullRun {
        synthesis: syn,
        baseline: (base_run, base_ev),
        design,
        policies,
        comparisons,
    })
}
