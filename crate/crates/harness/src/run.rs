use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use union_laplacian::continuum::{
    merged_union_spectrum, metric_graph_spectrum_fd, LimitKind, ReferenceEntry,
};
use union_laplacian::diagnostics::{degree_scaling, kde_sup_error, DegreeScaling, KdeError};
use union_laplacian::graph::{build_graph, LaplacianKind};
use union_laplacian::manifolds::{bandwidth_ok, sample_mixture, sample_with_counts, BandwidthReport};
use union_laplacian::spectra::{
    align_spectra, separation_score, shape_values, smallest_eigenpairs_with, within_variance_fraction,
    AlignmentReport, SolverMethod, SolverOptions,
};
use union_laplacian::{Cloud, Error, Kernel, Model, Reference, Spectrum, WeightedGraph};

use crate::config::{ExperimentConfig, Resolved};
use crate::error::{HarnessError, Result, Stage, StageExt};

/// Where the reference spectrum came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    MergedUnion,
    MetricGraph,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBlock {
    pub source: ReferenceSource,
    pub kind: LimitKind,
    pub eigenvalues: Vec<f64>,
    pub entries: Vec<ReferenceEntry<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub name: String,
    pub seed: u64,
    pub n: usize,
    pub counts: Vec<usize>,
    pub fixed_counts: bool,
    pub epsilon: f64,
    pub kernel: String,
    pub kind: LaplacianKind,
    pub k: usize,
    pub bandwidth: BandwidthReport<f64>,
    pub library_version: String,
    pub harness_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub operator_norm: f64,
    pub method: SolverMethod,
    pub restarts: usize,
    pub matvecs: usize,
    /// Eigenvector CSV next to the bundle.
    pub vectors_file: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub connected: bool,
    pub kde: Vec<KdeError<f64>>,
    pub degree_scaling: Option<DegreeScaling<f64>>,
    /// Per eigenvector, share of variance from within the lower-dimensional
    /// piece (two-piece models only).
    pub lower_variance_fraction: Vec<f64>,
    /// Per eigenvector, separation score between the two pieces.
    pub separation: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub metadata: Metadata,
    pub spectrum: SpectrumSummary,
    pub reference: Option<ReferenceBlock>,
    pub alignment: Option<AlignmentReport<f64>>,
    pub diagnostics: Diagnostics,
    pub flags: Vec<String>,
    pub timings_file: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub sample_s: f64,
    pub graph_s: f64,
    pub solve_s: f64,
    pub analysis_s: f64,
}

/// Everything a single run produces, before serialization.
pub struct RunOutcome {
    pub bundle: ResultBundle,
    pub cloud: Cloud,
    pub graph: WeightedGraph,
    pub spectrum: Spectrum,
    pub reference: Option<Reference>,
    pub timings: Timings,
}

/// Sample size selection for one run.
#[derive(Clone, Debug)]
pub enum Draw {
    Counts(Vec<usize>),
    Total(usize),
}

pub fn draw_cloud(model: &Model, draw: &Draw, seed: u64) -> Result<Cloud> {
    match draw {
        Draw::Counts(c) => sample_with_counts(model, c, seed),
        Draw::Total(n) => sample_mixture(model, *n, seed),
    }
    .stage(Stage::Sample)
}

/// Reference spectrum for the limit problem matching `kind`, or `None`
/// when no analytic or finite-difference path applies.
pub fn reference_for(model: &Model, kernel: &Kernel, kind: LaplacianKind, k: usize) -> Result<Option<(ReferenceSource, Reference)>> {
    let limit = if kind.is_normalized() { LimitKind::NormalizedLimit } else { LimitKind::UnnormalizedLimit };
    match merged_union_spectrum(model, kernel, limit, k) {
        Ok(r) => Ok(Some((ReferenceSource::MergedUnion, r))),
        Err(Error::CodimensionOne) if kind.is_normalized() => {
            let mut h = 2e-3;
            loop {
                match metric_graph_spectrum_fd(model, kernel, h, k) {
                    Ok(r) => return Ok(Some((ReferenceSource::MetricGraph, r))),
                    Err(Error::Resolution(_)) if h > 1e-5 => h /= 4.0,
                    Err(Error::Unsupported(_)) => return Ok(None),
                    Err(e) => return Err(HarnessError::Stage { stage: Stage::Reference, source: e }),
                }
            }
        }
        Err(Error::Unsupported(_) | Error::CodimensionOne) => Ok(None),
        Err(e) => Err(HarnessError::Stage { stage: Stage::Reference, source: e }),
    }
}

/// One sample, graph, solve and analysis.
pub fn run_once(config: &ExperimentConfig, resolved: &Resolved, draw: &Draw, seed: u64) -> Result<RunOutcome> {
    let Resolved { model, kernel, kind } = resolved;
    let mut flags = Vec::new();
    let t0 = Instant::now();
    let cloud = draw_cloud(model, draw, seed)?;
    let n = cloud.len();
    let top = model.max_dim();
    let epsilon = config.epsilon_for(n, top);
    let bandwidth = bandwidth_ok::<f64>(n, top, epsilon);
    if !bandwidth.ok {
        flags.push(format!("bandwidth ε = {epsilon} not between ell_n = {} and 1", bandwidth.ell));
    }
    let t1 = Instant::now();
    let graph = build_graph(&cloud, epsilon, kernel).stage(Stage::Graph)?;
    let connected = graph.is_connected();
    if !connected {
        flags.push("graph is disconnected".into());
        log::warn!("seed {seed}: graph at ε = {epsilon} is disconnected");
    }
    let t2 = Instant::now();
    let opts = SolverOptions { tol: config.solver_tol, ..SolverOptions::default() };
    let spectrum = smallest_eigenpairs_with(&graph, *kind, config.k, &opts).stage(Stage::Solve)?;
    let t3 = Instant::now();

    let reference = reference_for(model, kernel, *kind, config.k)?;
    if *kind == LaplacianKind::Unnormalized && reference.is_some() {
        flags.push("reference assumes the ε^{-d} rescaled operator".into());
    }
    let alignment = match &reference {
        Some((_, r)) => Some(align_spectra(&spectrum, r, model, &cloud, &graph).stage(Stage::Align)?),
        None => {
            flags.push("no reference spectrum for this model".into());
            None
        }
    };
    let kde = kde_sup_error(model, &cloud, &graph, kernel).stage(Stage::Diagnostics)?;
    let (scaling, lower_variance_fraction, separation) = if model.len() == 2 {
        let s = degree_scaling(model, &cloud, &graph, kernel).stage(Stage::Diagnostics)?;
        let (lower, upper) = (s.lower, s.upper);
        let mut fractions = Vec::with_capacity(config.k);
        let mut seps = Vec::with_capacity(config.k);
        for i in 0..spectrum.k() {
            let v = shape_values(&spectrum, &graph, i);
            fractions.push(within_variance_fraction(&v, &cloud.labels, lower));
            seps.push(separation_score(&v, &cloud.labels, lower, upper));
        }
        (Some(s), fractions, seps)
    } else {
        (None, Vec::new(), Vec::new())
    };
    let t4 = Instant::now();

    let bundle = ResultBundle {
        metadata: Metadata {
            name: config.name.clone(),
            seed,
            n,
            counts: cloud.counts.clone(),
            fixed_counts: cloud.fixed_counts,
            epsilon,
            kernel: kernel.to_string(),
            kind: *kind,
            k: config.k,
            bandwidth,
            library_version: union_laplacian::VERSION.into(),
            harness_version: env!("CARGO_PKG_VERSION").into(),
        },
        spectrum: SpectrumSummary {
            eigenvalues: spectrum.eigenvalues.clone(),
            residuals: spectrum.residuals.clone(),
            operator_norm: spectrum.operator_norm,
            method: spectrum.method,
            restarts: spectrum.restarts,
            matvecs: spectrum.matvecs,
            vectors_file: None,
        },
        reference: reference.as_ref().map(|(source, r)| ReferenceBlock {
            source: *source,
            kind: r.kind,
            eigenvalues: r.values(),
            entries: r.entries.clone(),
        }),
        alignment,
        diagnostics: Diagnostics {
            connected,
            kde,
            degree_scaling: scaling,
            lower_variance_fraction,
            separation,
        },
        flags,
        timings_file: None,
    };
    let secs = |a: Instant, b: Instant| (b - a).as_secs_f64();
    Ok(RunOutcome {
        bundle,
        cloud,
        graph,
        spectrum,
        reference: reference.map(|r| r.1),
        timings: Timings {
            sample_s: secs(t0, t1),
            graph_s: secs(t1, t2),
            solve_s: secs(t2, t3),
            analysis_s: secs(t3, t4),
        },
    })
}

pub fn single_draw(config: &ExperimentConfig) -> Result<Draw> {
    Ok(match &config.counts {
        Some(c) => Draw::Counts(c.clone()),
        None => Draw::Total(config.sample_size()?),
    })
}

/// Runs every seed of the config; writes bundles when `config.out` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultBundle>> {
    let resolved = config.validate()?;
    let draw = single_draw(config)?;
    let mut bundles = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let mut outcome = run_once(config, &resolved, &draw, seed)?;
        if let Some(dir) = &config.out {
            write_outcome(dir, &mut outcome)?;
        }
        bundles.push(outcome.bundle);
    }
    Ok(bundles)
}

fn stem(bundle: &ResultBundle) -> String {
    format!("{}_seed{}", bundle.metadata.name, bundle.metadata.seed)
}

/// Writes `<name>_seed<s>.json`, the eigenvector CSV and the timings file.
pub fn write_outcome(dir: &Path, outcome: &mut RunOutcome) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let stem = stem(&outcome.bundle);
    let vectors = format!("{stem}_vectors.csv");
    let timings = format!("{stem}_timings.json");
    write_vectors_csv(&dir.join(&vectors), &outcome.cloud, &outcome.spectrum)?;
    std::fs::write(
        dir.join(&timings),
        serde_json::to_string_pretty(&outcome.timings).map_err(|e| HarnessError::Data(e.to_string()))?,
    )?;
    outcome.bundle.spectrum.vectors_file = Some(vectors);
    outcome.bundle.timings_file = Some(timings);
    let path = dir.join(format!("{stem}.json"));
    let json = serde_json::to_string_pretty(&outcome.bundle).map_err(|e| HarnessError::Data(e.to_string()))?;
    std::fs::write(&path, json + "\n")?;
    Ok(path)
}

/// Columns `x1..xN, label, u1..uk`.
pub fn write_vectors_csv(path: &Path, cloud: &Cloud, spectrum: &Spectrum) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    w.write_record(vector_header(cloud.ambient_dim, spectrum.k())).map_err(csv_err)?;
    let mut row = Vec::new();
    for i in 0..cloud.len() {
        row.clear();
        row.extend(cloud.point(i).iter().map(|x| x.to_string()));
        row.push(cloud.labels[i].to_string());
        row.extend(spectrum.eigenvectors.iter().map(|u| u[i].to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `x1..xN, label`.
pub fn write_cloud_csv<W: Write>(out: W, cloud: &Cloud) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header: Vec<String> = (1..=cloud.ambient_dim).map(|j| format!("x{j}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..cloud.len() {
        let mut row: Vec<String> = cloud.point(i).iter().map(|x| x.to_string()).collect();
        row.push(cloud.labels[i].to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn vector_header(ambient: usize, k: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=ambient).map(|j| format!("x{j}")).collect();
    h.push("label".into());
    h.extend((1..=k).map(|j| format!("u{j}")));
    h
}

pub(crate) fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Data(e.to_string())
}

/// Parses a bundle and checks that the files it references exist and
/// have the expected shape.
pub fn validate_bundle(path: &Path) -> Result<ResultBundle> {
    let text = std::fs::read_to_string(path)?;
    let bundle: ResultBundle = serde_json::from_str(&text).map_err(|e| HarnessError::Data(e.to_string()))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let m = &bundle.metadata;
    let k = bundle.spectrum.eigenvalues.len();
    if bundle.spectrum.residuals.len() != k || k != m.k {
        return Err(HarnessError::Data(format!("{}: spectrum length mismatch", path.display())));
    }
    if m.counts.iter().sum::<usize>() != m.n {
        return Err(HarnessError::Data(format!("{}: counts do not add up to n", path.display())));
    }
    if let Some(t) = &bundle.timings_file {
        let text = std::fs::read_to_string(dir.join(t))?;
        serde_json::from_str::<Timings>(&text).map_err(|e| HarnessError::Data(format!("{t}: {e}")))?;
    }
    if let Some(v) = &bundle.spectrum.vectors_file {
        let mut r = csv::Reader::from_path(dir.join(v)).map_err(csv_err)?;
        let header = r.headers().map_err(csv_err)?.clone();
        let label = header
            .iter()
            .position(|h| h == "label")
            .ok_or_else(|| HarnessError::Data(format!("{v}: no label column")))?;
        let expected = vector_header(label, k);
        if header.iter().ne(expected.iter().map(String::as_str)) {
            return Err(HarnessError::Data(format!("{v}: unexpected header")));
        }
        let mut rows = 0;
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            for (j, field) in rec.iter().enumerate() {
                let ok = if j == label { field.parse::<usize>().is_ok() } else { field.parse::<f64>().is_ok() };
                if !ok {
                    return Err(HarnessError::Data(format!("{v}: bad field '{field}' in row {rows}")));
                }
            }
            rows += 1;
        }
        if rows != m.n {
            return Err(HarnessError::Data(format!("{v}: {rows} rows for n = {}", m.n)));
        }
    }
    Ok(bundle)
}
