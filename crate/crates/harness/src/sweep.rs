use std::io::Write;

use serde::{Deserialize, Serialize};
use union_laplacian::continuum::CLUSTER_TOL;
use union_laplacian::spectra::pair_eigenvalues;
use union_laplacian::transport::{procrustes_align, tl2_proxy_values};
use union_laplacian::{Cloud, Model, Reference, Spectrum, WeightedGraph};

use crate::config::ExperimentConfig;
use crate::error::{Result, Stage, StageExt};
use crate::run::{csv_err, run_once, Draw};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub bandwidth_ok: bool,
    pub eigenvalues: Vec<f64>,
    /// Relative errors against the reference, empty without one.
    pub relative_errors: Vec<f64>,
    /// KDE sup error per component.
    pub kde_sup: Vec<f64>,
    /// TL² proxy of the designated eigenvector, when a closed-form mode exists.
    pub tl2_proxy: Option<f64>,
    pub degree_near: Option<(f64, f64)>,
    pub degree_far: Option<(f64, f64)>,
    pub solve_s: f64,
}

/// One row per `(n, seed)` with `ε` from the config's bandwidth rule.
pub fn convergence_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let resolved = config.validate_sweep()?;
    let mut rows = Vec::new();
    for &n in &config.n_list {
        for &seed in &config.seeds {
            let out = run_once(config, &resolved, &Draw::Total(n), seed)?;
            let b = &out.bundle;
            let relative_errors = match &out.reference {
                Some(r) => pair_eigenvalues(&out.spectrum.eigenvalues, &r.values())
                    .iter()
                    .map(|p| p.relative_error)
                    .collect(),
                None => Vec::new(),
            };
            let tl2 = match &out.reference {
                Some(r) => designated_proxy(&resolved.model, &out.cloud, &out.graph, &out.spectrum, r, config.tl2_index)?,
                None => None,
            };
            let ds = b.diagnostics.degree_scaling.as_ref();
            log::info!("sweep n={n} seed={seed} ε={:.4} λ={:?}", b.metadata.epsilon, b.spectrum.eigenvalues);
            rows.push(SweepRow {
                n,
                seed,
                epsilon: b.metadata.epsilon,
                bandwidth_ok: b.metadata.bandwidth.ok,
                eigenvalues: b.spectrum.eigenvalues.clone(),
                relative_errors,
                kde_sup: b.diagnostics.kde.iter().map(|e| e.sup_error).collect(),
                tl2_proxy: tl2,
                degree_near: ds.map(|s| (s.near.min, s.near.max)),
                degree_far: ds.map(|s| (s.far.min, s.far.max)),
                solve_s: out.timings.solve_s,
            });
        }
    }
    Ok(rows)
}

/// TL² proxy between eigenvector `index` and its reference mode, after
/// Procrustes alignment over the reference multiplicity cluster. The
/// reference is scaled by `√deg` for the normalized operator and to unit
/// empirical norm.
pub fn designated_proxy(
    model: &Model,
    cloud: &Cloud,
    graph: &WeightedGraph,
    spectrum: &Spectrum,
    reference: &Reference,
    index: usize,
) -> Result<Option<f64>> {
    let values = reference.values();
    let modes = reference.modes();
    if index >= spectrum.k() || index >= values.len() {
        return Ok(None);
    }
    let lam = values[index];
    let cluster: Vec<usize> = (0..values.len().min(spectrum.k()))
        .filter(|&i| (values[i] - lam).abs() <= CLUSTER_TOL)
        .collect();
    let mut refs = Vec::with_capacity(cluster.len());
    for &i in &cluster {
        let Some(mode) = &modes[i] else { return Ok(None) };
        let mut v = mode.eval_cloud(model, cloud);
        if spectrum.kind.is_normalized() {
            v.iter_mut().zip(graph.degrees()).for_each(|(x, &d)| *x *= d.sqrt());
        }
        let norm = (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
        if norm == 0.0 {
            return Ok(None);
        }
        v.iter_mut().for_each(|x| *x /= norm);
        refs.push(v);
    }
    let computed: Vec<Vec<f64>> = cluster.iter().map(|&i| spectrum.eigenvectors[i].clone()).collect();
    let aligned = procrustes_align(&computed, &refs).stage(Stage::Align)?;
    let pos = cluster.iter().position(|&i| i == index).expect("index is in its own cluster");
    Ok(Some(tl2_proxy_values(&aligned[pos], &refs[pos])))
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let k = rows.iter().map(|r| r.eigenvalues.len()).max().unwrap_or(0);
    let comps = rows.iter().map(|r| r.kde_sup.len()).max().unwrap_or(0);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header: Vec<String> = ["n", "seed", "epsilon", "bandwidth_ok"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=k).map(|j| format!("lambda{j}")));
    header.extend((1..=k).map(|j| format!("rel_err{j}")));
    header.extend((0..comps).map(|c| format!("kde_sup{c}")));
    header.extend(["tl2_proxy", "near_min", "near_max", "far_min", "far_max"].iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let mut rec = vec![r.n.to_string(), r.seed.to_string(), r.epsilon.to_string(), r.bandwidth_ok.to_string()];
        rec.extend((0..k).map(|j| opt(r.eigenvalues.get(j).copied())));
        rec.extend((0..k).map(|j| opt(r.relative_errors.get(j).copied())));
        rec.extend((0..comps).map(|c| opt(r.kde_sup.get(c).copied())));
        rec.push(opt(r.tl2_proxy));
        rec.push(opt(r.degree_near.map(|p| p.0)));
        rec.push(opt(r.degree_near.map(|p| p.1)));
        rec.push(opt(r.degree_far.map(|p| p.0)));
        rec.push(opt(r.degree_far.map(|p| p.1)));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Median of `values`; `NaN` when empty.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}
