//! Seeded synthetic molecule generator for training and benchmark data.
//!
//! Candidates are assembled from small chainable fragments and filtered
//! through the real parser, so everything returned is guaranteed to
//! survive a round trip. The generator is deterministic for a fixed
//! seed.

use std::collections::HashSet;

use crate::dataset::pseudo_property;
use crate::rng::SplitMix64;
use crate::smiles::{parse, MolecularGraph};

/// Fragments whose last atom can bond onward.
const CHAIN: [&str; 16] = [
    "C", "CC", "CCC", "C(C)C", "CO", "CN", "C=C", "CC(C)", "C1CCCCC1", "c1ccccc1", "c1ccncc1",
    "C1CC1", "C1CCCC1", "C(=O)O", "C(=O)N", "COC",
];

/// Fragments that end a chain or fill a branch.
const TERMINAL: [&str; 12] = [
    "C", "O", "N", "F", "Cl", "Br", "I", "C#N", "C=O", "C(F)(F)F", "CO", "c1ccccc1",
];

/// One candidate string; may exceed valence rules and fail to parse.
fn candidate(rng: &mut SplitMix64) -> String {
    let mut out = String::new();
    let pieces = 1 + rng.below(4);
    for piece in 0..pieces {
        out.push_str(CHAIN[rng.below(CHAIN.len())]);
        // A branch after a fragment keeps strings tree-shaped rather
        // than purely linear.
        if rng.below(3) == 0 {
            out.push('(');
            out.push_str(TERMINAL[rng.below(TERMINAL.len())]);
            out.push(')');
        }
        if piece + 1 == pieces && rng.below(2) == 0 {
            out.push_str(TERMINAL[rng.below(TERMINAL.len())]);
        }
    }
    out
}

/// Generate one parseable molecule with at most `max_atoms` heavy atoms.
pub fn gen_molecule(rng: &mut SplitMix64, max_atoms: usize) -> (String, MolecularGraph) {
    loop {
        let smiles = candidate(rng);
        if let Ok(graph) = parse(&smiles) {
            if graph.atom_count() <= max_atoms {
                return (smiles, graph);
            }
        }
    }
}

/// Generate `count` distinct molecules with their surrogate targets.
pub fn gen_dataset(count: usize, seed: u64, max_atoms: usize) -> Vec<(String, f64)> {
    let mut rng = SplitMix64::new(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (smiles, graph) = gen_molecule(&mut rng, max_atoms);
        if seen.insert(smiles.clone()) {
            let target = pseudo_property(&graph);
            out.push((smiles, target));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_molecules_parse_and_respect_the_size_cap() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..200 {
            let (smiles, graph) = gen_molecule(&mut rng, 24);
            assert!(graph.atom_count() >= 1);
            assert!(graph.atom_count() <= 24, "{smiles} too large");
            assert_eq!(parse(&smiles).unwrap(), graph);
        }
    }

    #[test]
    fn datasets_are_deterministic_and_unique() {
        let a = gen_dataset(300, 5, 24);
        let b = gen_dataset(300, 5, 24);
        assert_eq!(a, b);
        let unique: HashSet<&str> = a.iter().map(|(s, _)| s.as_str()).collect();
        assert_eq!(unique.len(), 300);

        let other = gen_dataset(50, 6, 24);
        assert_ne!(&a[..50], &other[..]);
    }

    #[test]
    fn datasets_carry_varied_structures_and_targets() {
        let data = gen_dataset(500, 9, 24);
        let aromatic = data.iter().filter(|(s, _)| s.contains("c1")).count();
        let rings = data.iter().filter(|(s, _)| s.contains('1')).count();
        let hetero = data
            .iter()
            .filter(|(s, _)| s.contains('N') || s.contains('O') || s.contains('n'))
            .count();
        assert!(aromatic > 50, "only {aromatic} aromatic molecules");
        assert!(rings > 100, "only {rings} ring molecules");
        assert!(hetero > 100, "only {hetero} heteroatom molecules");

        let mut targets: Vec<f64> = data.iter().map(|(_, t)| *t).collect();
        targets.sort_by(f64::total_cmp);
        targets.dedup();
        assert!(targets.len() > 50, "targets nearly constant");
    }
}
