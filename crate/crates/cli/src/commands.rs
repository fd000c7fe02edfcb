use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use cmc_sir::graph::{clustering_asymptotic, clustering_empirical, ClusteringStats};
use cmc_sir::simulator::{derive_seed, MonteCarloSummary};
use cmc_sir::{analyze, build_graph, monte_carlo, sample_degrees, GenerationReport, TransmissionLaw};
use serde::Serialize;

use crate::config::{default_alpha_grid, ExperimentConfig};
use crate::Failure;

fn io_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Io(e.into())
}

/// Writes to `path`, or to stdout when there is none.
fn emit(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display())).map_err(io_err)?;
            let mut w = BufWriter::new(file);
            body(&mut w).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock).map_err(io_err)?;
            lock.flush().map_err(io_err)
        }
    }
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

// shortest round-trip form, always with a decimal point
fn number(x: f64) -> String {
    format!("{x:?}")
}

fn csv_writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn analyze_cmd(cfg: &ExperimentConfig, output: Option<&Path>) -> Result<(), Failure> {
    let report = analyze(&cfg.distribution()?, &cfg.law()?, cfg.f_v)?;
    emit(output, |w| write_json(w, &report))
}

#[derive(Serialize)]
struct ReplicateRow<'a> {
    replicate: usize,
    n: usize,
    final_size: usize,
    is_major: bool,
    generations_json: &'a str,
}

/// With an output directory, writes `replicates.csv` and `summary.json`
/// there; otherwise prints the summary.
pub fn simulate_cmd(cfg: &ExperimentConfig, output: Option<&Path>) -> Result<(), Failure> {
    let run = monte_carlo(&cfg.distribution()?, &cfg.law()?, cfg.n, cfg.replicates, &cfg.epidemic()?, cfg.seed)?;
    let Some(dir) = output else {
        return emit(None, |w| write_json(w, &run.summary));
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(io_err)?;
    emit(Some(&dir.join("replicates.csv")), |w| {
        let mut csv = csv_writer(w);
        for r in &run.records {
            let generations = serde_json::to_string(&r.generations)?;
            csv.serialize(ReplicateRow {
                replicate: r.replicate,
                n: r.n,
                final_size: r.final_size,
                is_major: r.is_major,
                generations_json: &generations,
            })?;
        }
        csv.flush()?;
        Ok(())
    })?;
    emit(Some(&dir.join("summary.json")), |w| write_json(w, &run.summary))
}

const SWEEP_HEADER: [&str; 7] = [
    "distribution",
    "alpha",
    "e_t2",
    "r0",
    "extinction_probability",
    "final_size",
    "critical_coverage",
];

const SWEEP_MC_HEADER: [&str; 4] = [
    "mc_outbreak_frequency",
    "mc_outbreak_frequency_se",
    "mc_mean_final_fraction_major",
    "mc_mean_final_fraction_major_se",
];

/// Symmetric Beta laws over the configured grid, for every configured
/// distribution. Rows are grouped by distribution and ordered by alpha.
pub fn sweep_cmd(cfg: &ExperimentConfig, output: Option<&Path>) -> Result<(), Failure> {
    let (mut grid, named) = match &cfg.sweep {
        Some(s) => (s.alpha_grid.clone(), s.distributions.clone()),
        None => (default_alpha_grid(), Vec::new()),
    };
    if grid.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Failure::Config("alpha_grid entries must be positive".into()));
    }
    grid.sort_by(f64::total_cmp);
    let dists = if named.is_empty() {
        vec![("config".to_string(), cfg.distribution()?)]
    } else {
        named
            .iter()
            .map(|d| Ok((d.name.clone(), cmc_sir::DegreeDistribution::from_triples(&d.degree_distribution)?)))
            .collect::<Result<Vec<_>, Failure>>()?
    };
    let simulate = cfg.replicates > 0;
    let epidemic = cfg.epidemic()?;

    let mut rows = Vec::new();
    for (di, (name, dist)) in dists.iter().enumerate() {
        for (ai, &alpha) in grid.iter().enumerate() {
            let law = TransmissionLaw::beta(alpha)?;
            let rep = analyze(dist, &law, cfg.f_v)?;
            let mut row = vec![name.clone()];
            row.extend(
                [
                    alpha,
                    law.derived_moments().e_t2,
                    rep.r0,
                    1.0 - rep.outbreak_probability,
                    rep.final_size,
                    rep.critical_coverage,
                ]
                .map(number),
            );
            if simulate {
                let seed = derive_seed(cfg.seed, (di as u64) << 32 | ai as u64);
                let s: MonteCarloSummary = monte_carlo(dist, &law, cfg.n, cfg.replicates, &epidemic, seed)?.summary;
                row.extend(
                    [
                        s.outbreak_frequency,
                        s.std_errors.outbreak_frequency,
                        s.mean_final_fraction_major,
                        s.std_errors.mean_final_fraction_major,
                    ]
                    .map(number),
                );
            }
            rows.push(row);
        }
    }

    emit(output, |w| {
        let mut csv = csv_writer(w);
        if simulate {
            csv.write_record(SWEEP_HEADER.iter().chain(&SWEEP_MC_HEADER))?;
        } else {
            csv.write_record(SWEEP_HEADER)?;
        }
        for row in rows {
            csv.write_record(row)?;
        }
        csv.flush()?;
        Ok(())
    })
}

#[derive(Serialize)]
struct GraphStats {
    n: usize,
    seed: u64,
    num_edges: usize,
    empirical_clustering: Option<f64>,
    asymptotic_clustering: Option<f64>,
    ordered_wedges: u64,
    ordered_triangles: u64,
    generation_report: GenerationReport,
}

pub fn graph_stats_cmd(cfg: &ExperimentConfig, output: Option<&Path>, edge_list: Option<&Path>) -> Result<(), Failure> {
    let dist = cfg.distribution()?;
    let seq = sample_degrees(&dist, cfg.n, derive_seed(cfg.seed, 0))?;
    let (graph, report) = build_graph(&seq, derive_seed(cfg.seed, 1));
    let ClusteringStats { ordered_wedges, ordered_triangles, coefficient } = clustering_empirical(&graph);
    let stats = GraphStats {
        n: graph.n(),
        seed: cfg.seed,
        num_edges: graph.num_edges(),
        empirical_clustering: coefficient,
        asymptotic_clustering: clustering_asymptotic(&dist).ok(),
        ordered_wedges,
        ordered_triangles,
        generation_report: report,
    };
    if let Some(path) = edge_list {
        emit(Some(path), |w| Ok(graph.write_edge_list(w)?))?;
    }
    emit(output, |w| write_json(w, &stats))
}
