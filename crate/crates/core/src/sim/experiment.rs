use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::run::{run_scenario, RunMetrics};
use super::scenario::{generate_scenarios, CaseStudy, Mode, ScenarioConfig};
use super::SimError;

#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    pub cases: Vec<CaseStudy>,
    /// Scenarios per case study.
    pub count: usize,
    pub seed: u64,
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
    /// Mode filter: each entry is a family (`weakening`, `priority`) or an
    /// exact mode such as `priority(land>deliver)`. `None` runs every mode.
    pub modes: Option<Vec<String>>,
}

impl ExperimentOptions {
    pub fn runs_mode(&self, m: &Mode) -> bool {
        let Some(sel) = &self.modes else { return true };
        let family = if m.is_weakening() { "weakening" } else { "priority" };
        let exact = m.to_string();
        sel.iter().any(|s| {
            let s = s.trim();
            s == family || s.parse::<Mode>().is_ok_and(|p| p.to_string() == exact)
        })
    }

    fn case_modes(&self, case: CaseStudy) -> Vec<Mode> {
        case.modes().into_iter().filter(|m| self.runs_mode(m)).collect()
    }
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self { cases: vec![CaseStudy::OrganDelivery, CaseStudy::Surveillance], count: 25, seed: 2024, workers: None, modes: None }
    }
}

/// One (scenario, mode) run. Contains no wall-clock data, so results files
/// are byte-identical across reruns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub case: String,
    pub scenario: usize,
    pub seed: u64,
    pub mode: String,
    pub ending: String,
    pub steps: usize,
    pub window_start: Option<usize>,
    pub window_end: Option<usize>,
    pub feature_a: String,
    pub avg_a: Option<f64>,
    pub min_a: Option<f64>,
    pub norm_avg_a: Option<f64>,
    pub minimal_min_a: Option<f64>,
    pub feature_b: String,
    pub avg_b: Option<f64>,
    pub min_b: Option<f64>,
    pub norm_avg_b: Option<f64>,
    pub minimal_min_b: Option<f64>,
    pub overall: Option<f64>,
    pub resolutions: usize,
    pub weakened: usize,
    pub unsat: usize,
    pub closure_failures: usize,
    pub nodes: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub case: String,
    pub scenario: usize,
    pub mode: String,
    pub resolutions: usize,
    pub solve_ms_total: f64,
    pub solve_ms_max: f64,
    pub run_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSummary {
    pub case: CaseStudy,
    pub mode: Mode,
    pub runs: usize,
    pub interactions: usize,
    pub errors: usize,
    /// Mean overall normalized robustness over scenarios with an interaction.
    pub mean_overall: Option<f64>,
    /// Worst robustness of each feature's original requirement across all windows.
    pub worst: [Option<f64>; 2],
    pub resolutions: usize,
    pub unsat: usize,
    pub closure_failures: usize,
    pub mean_solve: Option<Duration>,
    pub max_solve: Duration,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub rows: Vec<ResultRow>,
    pub timings: Vec<TimingRow>,
    pub summaries: Vec<ModeSummary>,
    pub wall_time: Duration,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn row(case: CaseStudy, idx: usize, cfg: &ScenarioConfig, r: &Result<RunMetrics, SimError>) -> ResultRow {
    let [fa, fb] = case.features();
    let mut out = ResultRow {
        case: case.to_string(),
        scenario: idx,
        seed: cfg.seed,
        mode: cfg.mode.to_string(),
        ending: String::new(),
        steps: 0,
        window_start: None,
        window_end: None,
        feature_a: fa.into(),
        avg_a: None,
        min_a: None,
        norm_avg_a: None,
        minimal_min_a: None,
        feature_b: fb.into(),
        avg_b: None,
        min_b: None,
        norm_avg_b: None,
        minimal_min_b: None,
        overall: None,
        resolutions: 0,
        weakened: 0,
        unsat: 0,
        closure_failures: 0,
        nodes: 0,
        error: None,
    };
    match r {
        Err(e) => out.error = Some(e.to_string()),
        Ok(m) => {
            out.ending = m.ending.to_string();
            out.steps = m.steps;
            out.window_start = m.window.map(|w| w.0);
            out.window_end = m.window.map(|w| w.1);
            if let [a, b] = m.features.as_slice() {
                (out.avg_a, out.min_a, out.norm_avg_a, out.minimal_min_a) =
                    (Some(a.average), Some(a.minimum), Some(a.normalized_average), Some(a.minimal_minimum));
                (out.avg_b, out.min_b, out.norm_avg_b, out.minimal_min_b) =
                    (Some(b.average), Some(b.minimum), Some(b.normalized_average), Some(b.minimal_minimum));
            }
            out.overall = m.overall;
            out.resolutions = m.solver.resolutions;
            out.weakened = m.solver.weakened;
            out.unsat = m.solver.unsat;
            out.closure_failures = m.solver.closure_failures;
            out.nodes = m.solver.nodes;
        }
    }
    out
}

fn summarize(case: CaseStudy, mode: &Mode, runs: &[&Result<RunMetrics, SimError>]) -> ModeSummary {
    let ok: Vec<&RunMetrics> = runs.iter().filter_map(|r| r.as_ref().ok()).collect();
    let overall: Vec<f64> = ok.iter().filter_map(|m| m.overall).collect();
    let worst = |i: usize| {
        ok.iter()
            .filter_map(|m| m.features.get(i).map(|f| f.minimum))
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))))
    };
    let resolutions = ok.iter().map(|m| m.solver.resolutions).sum::<usize>();
    let total: Duration = ok.iter().map(|m| m.solver.total_time).sum();
    ModeSummary {
        case,
        mode: mode.clone(),
        runs: runs.len(),
        interactions: ok.iter().filter(|m| m.interaction()).count(),
        errors: runs.len() - ok.len(),
        mean_overall: (!overall.is_empty()).then(|| overall.iter().sum::<f64>() / overall.len() as f64),
        worst: [worst(0), worst(1)],
        resolutions,
        unsat: ok.iter().map(|m| m.solver.unsat).sum(),
        closure_failures: ok.iter().map(|m| m.solver.closure_failures).sum(),
        mean_solve: (resolutions > 0).then(|| total / resolutions as u32),
        max_solve: ok.iter().map(|m| m.solver.max_time).max().unwrap_or_default(),
    }
}

/// Runs every generated scenario of every case under each of the case's
/// modes. Rows come back in (case, scenario, mode) order whatever the
/// worker count.
pub fn run_experiment(opts: &ExperimentOptions) -> Result<ExperimentReport, SimError> {
    let start = Instant::now();
    let mut jobs = Vec::new();
    for &case in &opts.cases {
        for (idx, cfg) in generate_scenarios(case, opts.count, opts.seed).into_iter().enumerate() {
            for mode in opts.case_modes(case) {
                jobs.push((case, idx, cfg.with_mode(mode)));
            }
        }
    }
    let work = || {
        jobs.par_iter()
            .map(|(case, idx, cfg)| {
                let t = Instant::now();
                let r = run_scenario(cfg).map(|(_, m)| m);
                log::debug!("{case} #{idx} {}: {:?}", cfg.mode, r.as_ref().map(|m| m.ending));
                (*case, *idx, cfg, r, t.elapsed())
            })
            .collect::<Vec<_>>()
    };
    let done = match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| SimError::Config(e.to_string()))?
            .install(work),
        None => work(),
    };

    let rows = done.iter().map(|(c, i, cfg, r, _)| row(*c, *i, cfg, r)).collect();
    let timings = done
        .iter()
        .map(|(c, i, cfg, r, wall)| {
            let s = r.as_ref().map(|m| m.solver.clone()).unwrap_or_default();
            TimingRow {
                case: c.to_string(),
                scenario: *i,
                mode: cfg.mode.to_string(),
                resolutions: s.resolutions,
                solve_ms_total: ms(s.total_time),
                solve_ms_max: ms(s.max_time),
                run_ms: ms(*wall),
            }
        })
        .collect();
    let mut summaries = Vec::new();
    for &case in &opts.cases {
        for mode in opts.case_modes(case) {
            let runs: Vec<_> = done.iter().filter(|d| d.0 == case && d.2.mode == mode).map(|d| &d.3).collect();
            summaries.push(summarize(case, &mode, &runs));
        }
    }
    Ok(ExperimentReport { rows, timings, summaries, wall_time: start.elapsed() })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.4}"))
}

impl ExperimentReport {
    pub fn summary(&self, case: CaseStudy, mode: &Mode) -> Option<&ModeSummary> {
        self.summaries.iter().find(|s| s.case == case && s.mode == *mode)
    }

    pub fn write_results<W: std::io::Write>(&self, w: W) -> Result<(), SimError> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_timings<W: std::io::Write>(&self, w: W) -> Result<(), SimError> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.timings {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Writes `results.csv`, `timing.csv` and `summary.txt` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), SimError> {
        std::fs::create_dir_all(dir)?;
        self.write_results(std::fs::File::create(dir.join("results.csv"))?)?;
        self.write_timings(std::fs::File::create(dir.join("timing.csv"))?)?;
        std::fs::write(dir.join("summary.txt"), self.render_summary())?;
        Ok(())
    }

    pub fn render_summary(&self) -> String {
        let mut s = String::new();
        for m in &self.summaries {
            let [a, b] = m.case.features();
            s += &format!(
                "{} {:<28} runs={} interactions={} errors={} overall={} worst[{a}]={} worst[{b}]={} resolutions={} unsat={} closure_failures={} mean_solve_ms={} max_solve_ms={:.3}\n",
                m.case,
                m.mode.to_string(),
                m.runs,
                m.interactions,
                m.errors,
                fmt_opt(m.mean_overall),
                fmt_opt(m.worst[0]),
                fmt_opt(m.worst[1]),
                m.resolutions,
                m.unsat,
                m.closure_failures,
                m.mean_solve.map_or("-".into(), |d| format!("{:.3}", ms(d))),
                ms(m.max_solve),
            );
        }
        s += &format!("wall_time_s={:.2}\n", self.wall_time.as_secs_f64());
        s
    }
}
