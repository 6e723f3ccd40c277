//! Interpretability helpers: cluster atom states, compare molecule
//! latents, and flatten either into two dimensions for plotting.

use rayon::prelude::*;
use thiserror::Error;

use crate::autodiff::{Tape, Tensor};
use crate::model::{model_forward, ModelError, ModelParams};
use crate::rng::SplitMix64;
use crate::smiles::MolecularGraph;

/// Fill colors for cluster labels in exported graphs, colorblind-safe.
pub const DEFAULT_PALETTE: [&str; 10] = [
    "#66c2a5", "#fc8d62", "#8da0cb", "#e78ac3", "#a6d854", "#ffd92f", "#e5c494", "#b3b3b3",
    "#1b9e77", "#d95f02",
];

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("input is degenerate: {what}")]
    DegenerateInput { what: &'static str },
    #[error("{needed} colors needed but the palette has {have}")]
    PaletteTooSmall { needed: usize, have: usize },
}

/// Atom states and the pooled molecule vector from one forward pass.
pub struct MoleculeFeatures {
    /// One row per atom, after the last convolution layer.
    pub node_states: Tensor,
    /// Summed readout vector for the whole molecule.
    pub graph_latent: Vec<f64>,
}

/// Run the model and keep the intermediate representations instead of
/// the prediction.
pub fn extract_features(
    params: &ModelParams,
    x: &Tensor,
    a: &Tensor,
) -> Result<MoleculeFeatures, ModelError> {
    let mut tape = Tape::new();
    let fwd = model_forward(&mut tape, params, x, a)?;
    Ok(MoleculeFeatures {
        node_states: tape.value(fwd.node_states).clone(),
        graph_latent: tape.value(fwd.graph_latent).data().to_vec(),
    })
}

/// Cluster assignment for a set of points.
pub struct KmeansResult {
    /// Cluster index per input row.
    pub assignments: Vec<usize>,
    /// One centroid per row.
    pub centroids: Tensor,
    /// Total squared distance to assigned centroids after every Lloyd
    /// iteration; never increases.
    pub sse_history: Vec<f64>,
}

fn nearest_centroid(point: &[f64], centroids: &Tensor) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for c in 0..centroids.rows() {
        let d = dist_sq(point, centroids.row(c));
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm with the weighted farthest-first seeding. Runs to a
/// stable assignment or 300 iterations. Clusters that lose every member
/// are reseeded with the point currently worst represented, so exactly
/// `k` clusters come back.
pub fn kmeans(points: &Tensor, k: usize, seed: u64) -> Result<KmeansResult, AnalysisError> {
    let n = points.rows();
    let d = points.cols();
    if k == 0 {
        return Err(AnalysisError::DegenerateInput {
            what: "cannot cluster into zero clusters",
        });
    }
    let mut distinct: Vec<&[f64]> = (0..n).map(|i| points.row(i)).collect();
    distinct.sort_unstable_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    distinct.dedup();
    if distinct.len() < k {
        return Err(AnalysisError::DegenerateInput {
            what: "fewer distinct points than clusters",
        });
    }

    let mut rng = SplitMix64::new(seed);
    let mut centroids = Tensor::zeros(k, d);
    let first = rng.below(n);
    centroids.data_mut()[..d].copy_from_slice(points.row(first));
    for c in 1..k {
        // Seed the next centroid proportionally to squared distance from
        // the ones already chosen; coinciding points get weight zero.
        let weights: Vec<f64> = (0..n)
            .map(|i| {
                (0..c)
                    .map(|j| dist_sq(points.row(i), centroids.row(j)))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        debug_assert!(total > 0.0, "guarded by the distinct-point check");
        let mut target = rng.next_f64() * total;
        let mut chosen = n - 1;
        for (i, w) in weights.iter().enumerate() {
            target -= w;
            if target <= 0.0 && *w > 0.0 {
                chosen = i;
                break;
            }
        }
        let row = points.row(chosen).to_vec();
        centroids.data_mut()[c * d..(c + 1) * d].copy_from_slice(&row);
    }

    let mut assignments = vec![0usize; n];
    let mut sse_history = Vec::new();
    for _ in 0..300 {
        let mut next: Vec<usize> = (0..n)
            .map(|i| nearest_centroid(points.row(i), &centroids).0)
            .collect();

        let mut sizes = vec![0usize; k];
        for &c in &next {
            sizes[c] += 1;
        }
        for empty in 0..k {
            if sizes[empty] > 0 {
                continue;
            }
            // Give the empty cluster the point its current cluster
            // represents worst, skipping singletons that would just move
            // the hole around.
            let farthest = (0..n)
                .filter(|&i| sizes[next[i]] > 1)
                .max_by(|&a, &b| {
                    let da = dist_sq(points.row(a), centroids.row(next[a]));
                    let db = dist_sq(points.row(b), centroids.row(next[b]));
                    da.total_cmp(&db)
                })
                .expect("a cluster with two members exists while any is empty");
            sizes[next[farthest]] -= 1;
            next[farthest] = empty;
            sizes[empty] = 1;
        }

        let mut sums = Tensor::zeros(k, d);
        for i in 0..n {
            let c = next[i];
            let row = points.row(i);
            let acc = &mut sums.data_mut()[c * d..(c + 1) * d];
            for (s, &x) in acc.iter_mut().zip(row) {
                *s += x;
            }
        }
        for c in 0..k {
            let inv = 1.0 / sizes[c] as f64;
            for v in &mut sums.data_mut()[c * d..(c + 1) * d] {
                *v *= inv;
            }
        }
        centroids = sums;

        let sse: f64 = (0..n)
            .map(|i| dist_sq(points.row(i), centroids.row(next[i])))
            .sum();
        sse_history.push(sse);

        let stable = next == assignments;
        assignments = next;
        if stable {
            break;
        }
    }

    Ok(KmeansResult {
        assignments,
        centroids,
        sse_history,
    })
}

/// Pairwise molecule distances, ordered by the target property.
pub struct DistanceMatrix {
    /// Row/column order as indices into the caller's list, sorted by
    /// ascending property value.
    pub order: Vec<usize>,
    /// Property values in row order.
    pub properties: Vec<f64>,
    /// Euclidean distances between latent vectors, scaled so the largest
    /// entry is one. All zeros if every latent coincides.
    pub matrix: Tensor,
}

/// Build the normalized latent-distance matrix for `(property, latent)`
/// pairs.
pub fn distance_matrix(entries: &[(f64, Vec<f64>)]) -> Result<DistanceMatrix, AnalysisError> {
    if entries.len() < 2 {
        return Err(AnalysisError::DegenerateInput {
            what: "distance matrices need at least two molecules",
        });
    }
    let dim = entries[0].1.len();
    if entries.iter().any(|(_, l)| l.len() != dim) {
        return Err(AnalysisError::DegenerateInput {
            what: "latent vectors must share one length",
        });
    }
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| entries[a].0.total_cmp(&entries[b].0));
    let n = order.len();
    let mut matrix = Tensor::zeros(n, n);
    let mut max = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist_sq(&entries[order[i]].1, &entries[order[j]].1).sqrt();
            matrix.set(i, j, d);
            matrix.set(j, i, d);
            max = max.max(d);
        }
    }
    if max > 0.0 {
        for v in matrix.data_mut() {
            *v /= max;
        }
    }
    Ok(DistanceMatrix {
        properties: order.iter().map(|&i| entries[i].0).collect(),
        order,
        matrix,
    })
}

/// Low-dimensional view of a point set.
pub struct PcaProjection {
    /// Input points projected onto the components, one row per point.
    pub coords: Tensor,
    /// Principal directions, one row per component.
    pub components: Tensor,
    /// Column means removed before projecting.
    pub mean: Vec<f64>,
    /// Fraction of total variance along each component.
    pub explained: Vec<f64>,
}

/// Project mean-centered points onto their top principal components,
/// found by power iteration with deflation.
pub fn pca_project(points: &Tensor, dims: usize) -> Result<PcaProjection, AnalysisError> {
    let n = points.rows();
    let d = points.cols();
    if n == 0 || dims == 0 || dims > d {
        return Err(AnalysisError::DegenerateInput {
            what: "need at least one point and 1..=width components",
        });
    }
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, &x) in mean.iter_mut().zip(points.row(i)) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered = Tensor::from_fn(n, d, |i, j| points.get(i, j) - mean[j]);

    // Population covariance.
    let mut cov = centered.transposed().matmul(&centered);
    for v in cov.data_mut() {
        *v /= n as f64;
    }
    let total: f64 = (0..d).map(|j| cov.get(j, j)).sum();
    if total <= 0.0 {
        return Err(AnalysisError::DegenerateInput {
            what: "points have zero variance",
        });
    }

    let mut components = Tensor::zeros(dims, d);
    let mut explained = Vec::with_capacity(dims);
    for c in 0..dims {
        let start = (0..d)
            .max_by(|&a, &b| cov.get(a, a).total_cmp(&cov.get(b, b)))
            .unwrap();
        if cov.get(start, start) <= total * 1e-14 {
            // The remaining directions carry no variance; leave zero
            // components so callers still get `dims` rows.
            explained.push(0.0);
            continue;
        }
        // One power step applied to a basis vector seeds the iteration.
        let mut v: Vec<f64> = (0..d).map(|j| cov.get(j, start)).collect();
        normalize(&mut v);
        for _ in 0..500 {
            let mut next = matvec(&cov, &v);
            normalize(&mut next);
            let drift: f64 = next
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            v = next;
            if drift < 1e-13 {
                break;
            }
        }
        let cv = matvec(&cov, &v);
        let lambda: f64 = cv.iter().zip(&v).map(|(a, b)| a * b).sum();
        // Largest-magnitude entry positive, so the sign is reproducible.
        let pivot = (0..d).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap();
        if v[pivot] < 0.0 {
            for x in &mut v {
                *x = -*x;
            }
        }
        components.data_mut()[c * d..(c + 1) * d].copy_from_slice(&v);
        explained.push((lambda / total).max(0.0));
        for i in 0..d {
            for j in 0..d {
                let deflated = cov.get(i, j) - lambda * v[i] * v[j];
                cov.set(i, j, deflated);
            }
        }
    }

    let coords = centered.matmul(&components.transposed());
    Ok(PcaProjection {
        coords,
        components,
        mean,
        explained,
    })
}

fn matvec(m: &Tensor, v: &[f64]) -> Vec<f64> {
    (0..m.rows())
        .map(|i| m.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v {
            *x /= norm;
        }
    }
}

/// Render a molecule as Graphviz DOT with atoms filled by cluster color.
pub fn export_colored_graph(
    graph: &MolecularGraph,
    labels: &[usize],
    palette: &[&str],
) -> Result<String, AnalysisError> {
    assert_eq!(
        labels.len(),
        graph.atom_count(),
        "one label per atom is required"
    );
    if let Some(&worst) = labels.iter().max() {
        if worst >= palette.len() {
            return Err(AnalysisError::PaletteTooSmall {
                needed: worst + 1,
                have: palette.len(),
            });
        }
    }
    let mut out = String::from("graph molecule {\n    node [style=filled];\n");
    for (i, atom) in graph.atoms.iter().enumerate() {
        out.push_str(&format!(
            "    a{i} [label=\"{}\", fillcolor=\"{}\"];\n",
            atom.element.symbol(),
            palette[labels[i]]
        ));
    }
    for bond in &graph.bonds {
        out.push_str(&format!("    a{} -- a{};\n", bond.a, bond.b));
    }
    out.push_str("}\n");
    Ok(out)
}

/// Atom states for every molecule, stacked row-wise, with
/// `(molecule, atom)` provenance per row.
pub fn stack_node_states(
    params: &ModelParams,
    molecules: &[(Tensor, Tensor)],
) -> Result<(Tensor, Vec<(usize, usize)>), AnalysisError> {
    let features: Vec<MoleculeFeatures> = molecules
        .par_iter()
        .map(|(x, a)| extract_features(params, x, a))
        .collect::<Result<_, ModelError>>()?;
    let mut provenance = Vec::new();
    let mut rows = Vec::new();
    for (mi, f) in features.iter().enumerate() {
        for ai in 0..f.node_states.rows() {
            provenance.push((mi, ai));
            rows.push(f.node_states.row(ai).to_vec());
        }
    }
    if rows.is_empty() {
        return Err(AnalysisError::DegenerateInput {
            what: "no atoms to analyze",
        });
    }
    let stacked = Tensor::from_rows(&rows);
    Ok((stacked, provenance))
}
