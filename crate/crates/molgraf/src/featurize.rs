//! Node features and adjacency for a molecular graph.
//!
//! Every atom becomes one row of a binary feature matrix: an atom-type
//! one-hot over the ten supported elements, an attached-hydrogen one-hot
//! (0 to 4, clamped), a valence one-hot (bonded neighbors plus hydrogens,
//! bucketed 1 to 6), and an aromaticity flag. The adjacency matrix is
//! symmetric 0/1 with ones on the diagonal, treating all bond orders the
//! same.

use crate::autodiff::Tensor;
use crate::smiles::{Element, MolecularGraph};

/// Width of a feature row: 10 + 5 + 6 + 1.
pub const FEATURE_DIM: usize = 22;

const ATOM_TYPES: [Element; 10] = [
    Element::B,
    Element::C,
    Element::N,
    Element::O,
    Element::F,
    Element::P,
    Element::S,
    Element::Cl,
    Element::Br,
    Element::I,
];

fn element_index(element: Element) -> usize {
    ATOM_TYPES
        .iter()
        .position(|&e| e == element)
        .expect("every parseable element has a feature slot")
}

/// Encode a graph as binary node features (n x 22) and a self-looped
/// symmetric adjacency matrix (n x n).
pub fn featurize(graph: &MolecularGraph) -> (Tensor, Tensor) {
    let n = graph.atom_count();
    let mut x = Tensor::zeros(n, FEATURE_DIM);
    for (i, atom) in graph.atoms.iter().enumerate() {
        x.set(i, element_index(atom.element), 1.0);
        let hydrogens = (atom.hydrogens as usize).min(4);
        x.set(i, 10 + hydrogens, 1.0);
        let valence = (graph.degree(i) + atom.hydrogens as usize).clamp(1, 6);
        x.set(i, 15 + (valence - 1), 1.0);
        if atom.aromatic {
            x.set(i, 21, 1.0);
        }
    }

    let mut a = Tensor::zeros(n, n);
    for i in 0..n {
        a.set(i, i, 1.0);
    }
    for bond in &graph.bonds {
        a.set(bond.a, bond.b, 1.0);
        a.set(bond.b, bond.a, 1.0);
    }
    (x, a)
}

/// A list of featurized graphs with regression targets. Graphs keep their
/// own sizes; nothing is padded.
pub struct GraphBatch {
    pub graphs: Vec<(Tensor, Tensor, f64)>,
}

impl GraphBatch {
    pub fn size(&self) -> usize {
        self.graphs.len()
    }
}

/// Featurize a list of (graph, target) records into one batch.
pub fn batch(records: &[(MolecularGraph, f64)]) -> GraphBatch {
    GraphBatch {
        graphs: records
            .iter()
            .map(|(graph, target)| {
                let (x, a) = featurize(graph);
                (x, a, *target)
            })
            .collect(),
    }
}
