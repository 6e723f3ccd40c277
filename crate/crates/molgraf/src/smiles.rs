//! SMILES reading: tokenizer, parser, and the molecular graph they produce.
//!
//! The supported subset covers neutral and charged organic molecules written
//! with the organic subset (`B C N O F P S Cl Br I`), lowercase aromatic
//! atoms, bracket atoms carrying charge and explicit hydrogen counts, ring
//! closures `0`-`9` and `%nn`, and branches. Aromaticity is taken as
//! written; no perception or kekulization is attempted. Stereochemistry,
//! isotopes, wildcard atoms, and multi-fragment (dot) inputs are rejected
//! with positioned errors rather than silently dropped.
//!
//! Hydrogen counting follows the usual organic-subset convention: implicit
//! hydrogens fill the element's default valence after summing bond orders
//! (aromatic bonds count 1.5, rounded up). Bracket atoms carry exactly the
//! hydrogen count written in the bracket, defaulting to zero, so `[O-]` has
//! no hydrogens while `[NH3+]` has three.

use std::collections::HashMap;
use thiserror::Error;

/// Elements the featurizer understands; everything else is rejected at
/// parse time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Element {
    B,
    C,
    N,
    O,
    F,
    P,
    S,
    Cl,
    Br,
    I,
}

impl Element {
    pub fn symbol(self) -> &'static str {
        match self {
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::P => "P",
            Element::S => "S",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    /// Default valence used for implicit hydrogen counting.
    pub fn default_valence(self) -> u32 {
        match self {
            Element::B => 3,
            Element::C => 4,
            Element::N => 3,
            Element::O => 2,
            Element::P => 3,
            Element::S => 2,
            Element::F | Element::Cl | Element::Br | Element::I => 1,
        }
    }

    /// Whether lowercase (aromatic) notation is accepted for this element.
    fn allows_aromatic(self) -> bool {
        matches!(
            self,
            Element::B | Element::C | Element::N | Element::O | Element::P | Element::S
        )
    }

    /// Nitrogen-family elements get their allowed valence shifted by the
    /// formal charge, so quaternary nitrogen `[N+]` binds four neighbors.
    fn charge_adjusts_valence(self) -> bool {
        matches!(self, Element::N | Element::P)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Numeric order used when summing an atom's bonds; aromatic counts 1.5.
    pub fn value(self) -> f64 {
        match self {
            BondOrder::Single => 1.0,
            BondOrder::Double => 2.0,
            BondOrder::Triple => 3.0,
            BondOrder::Aromatic => 1.5,
        }
    }

    /// Contribution to the valence-limit check. Aromatic bonds count 1 here
    /// so fused ring systems (three aromatic neighbors on one carbon) pass.
    fn valence_units(self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Atom {
        element: Element,
        aromatic: bool,
        bracket: bool,
        /// Hydrogen count written inside a bracket, e.g. `[NH3+]`.
        explicit_h: Option<u8>,
        charge: i32,
    },
    Bond(BondOrder),
    BranchOpen,
    BranchClose,
    RingClosure(u8),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SmilesError {
    #[error("unknown character '{ch}' at position {pos}")]
    UnknownCharacter { ch: char, pos: usize },
    #[error("unterminated bracket atom starting at position {pos}")]
    UnterminatedBracket { pos: usize },
    #[error("unsupported element '{symbol}' at position {pos}")]
    UnsupportedElement { symbol: String, pos: usize },
    #[error("unsupported SMILES feature ({what}) at position {pos}")]
    Unsupported { what: &'static str, pos: usize },
    #[error("ring closure {index} is never closed")]
    UnclosedRing { index: u8 },
    #[error("ring closure {index} conflicts with an earlier use")]
    RingBondConflict { index: u8 },
    #[error("unclosed branch: missing ')'")]
    UnclosedBranch,
    #[error("unmatched ')' at position {pos}")]
    UnmatchedBranchClose { pos: usize },
    #[error("bond symbol at position {pos} has nothing to attach to")]
    MisplacedBond { pos: usize },
    #[error("branch or ring at position {pos} has no preceding atom")]
    MisplacedAttachment { pos: usize },
    #[error("valence exceeded on atom {atom} ({element}): {used} bond units > {allowed} allowed")]
    ValenceExceeded {
        atom: usize,
        element: &'static str,
        used: u32,
        allowed: u32,
    },
    #[error("empty SMILES input")]
    Empty,
}

/// One atom of a parsed molecule. `hydrogens` is the attached hydrogen
/// count: implicit for organic-subset atoms, written for bracket atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub charge: i32,
    pub hydrogens: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MolecularGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
}

impl MolecularGraph {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// Number of bonded neighbors (hydrogen counts not included).
    pub fn degree(&self, atom: usize) -> usize {
        self.bonds
            .iter()
            .filter(|b| b.a == atom || b.b == atom)
            .count()
    }

    pub fn neighbors(&self, atom: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for bond in &self.bonds {
            if bond.a == atom {
                out.push(bond.b);
            } else if bond.b == atom {
                out.push(bond.a);
            }
        }
        out
    }

    /// The same molecule with atoms relabeled: old index `i` becomes
    /// `perm[i]`. `perm` must be a permutation of `0..atom_count()`.
    pub fn permuted(&self, perm: &[usize]) -> MolecularGraph {
        assert_eq!(perm.len(), self.atoms.len(), "permutation length mismatch");
        let mut atoms = vec![None; self.atoms.len()];
        for (old, atom) in self.atoms.iter().enumerate() {
            let slot = &mut atoms[perm[old]];
            assert!(slot.is_none(), "indices repeat in the permutation");
            *slot = Some(atom.clone());
        }
        MolecularGraph {
            atoms: atoms.into_iter().map(Option::unwrap).collect(),
            bonds: self
                .bonds
                .iter()
                .map(|bond| Bond {
                    a: perm[bond.a],
                    b: perm[bond.b],
                    order: bond.order,
                })
                .collect(),
        }
    }
}

pub fn tokenize(input: &str) -> Result<Vec<(Token, usize)>, SmilesError> {
    let chars: Vec<(usize, char)> = input.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let next = chars.get(i + 1).map(|&(_, c)| c);
        match c {
            'C' if next == Some('l') => {
                tokens.push((organic(Element::Cl, false), pos));
                i += 2;
            }
            'B' if next == Some('r') => {
                tokens.push((organic(Element::Br, false), pos));
                i += 2;
            }
            'B' | 'C' | 'N' | 'O' | 'F' | 'P' | 'S' | 'I' => {
                let element = match c {
                    'B' => Element::B,
                    'C' => Element::C,
                    'N' => Element::N,
                    'O' => Element::O,
                    'F' => Element::F,
                    'P' => Element::P,
                    'S' => Element::S,
                    _ => Element::I,
                };
                tokens.push((organic(element, false), pos));
                i += 1;
            }
            'b' | 'c' | 'n' | 'o' | 'p' | 's' => {
                let element = match c {
                    'b' => Element::B,
                    'c' => Element::C,
                    'n' => Element::N,
                    'o' => Element::O,
                    'p' => Element::P,
                    _ => Element::S,
                };
                tokens.push((organic(element, true), pos));
                i += 1;
            }
            '-' => {
                tokens.push((Token::Bond(BondOrder::Single), pos));
                i += 1;
            }
            '=' => {
                tokens.push((Token::Bond(BondOrder::Double), pos));
                i += 1;
            }
            '#' => {
                tokens.push((Token::Bond(BondOrder::Triple), pos));
                i += 1;
            }
            ':' => {
                tokens.push((Token::Bond(BondOrder::Aromatic), pos));
                i += 1;
            }
            '(' => {
                tokens.push((Token::BranchOpen, pos));
                i += 1;
            }
            ')' => {
                tokens.push((Token::BranchClose, pos));
                i += 1;
            }
            '0'..='9' => {
                tokens.push((Token::RingClosure(c as u8 - b'0'), pos));
                i += 1;
            }
            '%' => {
                let d1 = chars.get(i + 1).and_then(|&(_, c)| c.to_digit(10));
                let d2 = chars.get(i + 2).and_then(|&(_, c)| c.to_digit(10));
                match (d1, d2) {
                    (Some(a), Some(b)) => {
                        tokens.push((Token::RingClosure((a * 10 + b) as u8), pos));
                        i += 3;
                    }
                    _ => return Err(SmilesError::UnknownCharacter { ch: '%', pos }),
                }
            }
            '[' => {
                let close = chars[i..].iter().position(|&(_, c)| c == ']');
                let Some(offset) = close else {
                    return Err(SmilesError::UnterminatedBracket { pos });
                };
                let token = parse_bracket(&chars[i + 1..i + offset])?;
                tokens.push((token, pos));
                i += offset + 1;
            }
            '/' | '\\' => {
                return Err(SmilesError::Unsupported {
                    what: "stereo bond",
                    pos,
                })
            }
            '@' => {
                return Err(SmilesError::Unsupported {
                    what: "stereochemistry",
                    pos,
                })
            }
            '.' => {
                return Err(SmilesError::Unsupported {
                    what: "multi-fragment input",
                    pos,
                })
            }
            '*' => {
                return Err(SmilesError::Unsupported {
                    what: "wildcard atom",
                    pos,
                })
            }
            _ => return Err(SmilesError::UnknownCharacter { ch: c, pos }),
        }
    }
    Ok(tokens)
}

fn organic(element: Element, aromatic: bool) -> Token {
    Token::Atom {
        element,
        aromatic,
        bracket: false,
        explicit_h: None,
        charge: 0,
    }
}

/// Parse the interior of a bracket atom, e.g. `NH3+` from `[NH3+]`.
/// `content` holds (position, char) pairs excluding the brackets.
fn parse_bracket(content: &[(usize, char)]) -> Result<Token, SmilesError> {
    let mut j;
    let at = |k: usize| content.get(k).map(|&(_, c)| c);
    let pos_at = |k: usize| {
        content
            .get(k)
            .or(content.last())
            .map(|&(p, _)| p)
            .unwrap_or(0)
    };

    if content.is_empty() {
        return Err(SmilesError::UnknownCharacter {
            ch: ']',
            pos: pos_at(0),
        });
    }
    if at(0).is_some_and(|c| c.is_ascii_digit()) {
        return Err(SmilesError::Unsupported {
            what: "isotope label",
            pos: pos_at(0),
        });
    }

    let first = at(0).unwrap();
    let second = at(1);
    let (element, aromatic) = if first.is_ascii_uppercase() {
        // Two-letter symbols take precedence so [Se] reads as selenium, not
        // sulfur followed by junk.
        if let Some(s) = second.filter(|c| c.is_ascii_lowercase()) {
            let symbol: String = [first, s].iter().collect();
            match symbol.as_str() {
                "Cl" => {
                    j = 2;
                    (Element::Cl, false)
                }
                "Br" => {
                    j = 2;
                    (Element::Br, false)
                }
                _ => {
                    return Err(SmilesError::UnsupportedElement {
                        symbol,
                        pos: pos_at(0),
                    })
                }
            }
        } else {
            let element = match first {
                'B' => Element::B,
                'C' => Element::C,
                'N' => Element::N,
                'O' => Element::O,
                'F' => Element::F,
                'P' => Element::P,
                'S' => Element::S,
                'I' => Element::I,
                _ => {
                    return Err(SmilesError::UnsupportedElement {
                        symbol: first.to_string(),
                        pos: pos_at(0),
                    })
                }
            };
            j = 1;
            (element, false)
        }
    } else {
        if let Some(s) = second.filter(|c| c.is_ascii_lowercase()) {
            let symbol: String = [first, s].iter().collect();
            if matches!(symbol.as_str(), "se" | "as" | "te" | "si") {
                return Err(SmilesError::UnsupportedElement {
                    symbol,
                    pos: pos_at(0),
                });
            }
        }
        let element = match first {
            'b' => Element::B,
            'c' => Element::C,
            'n' => Element::N,
            'o' => Element::O,
            'p' => Element::P,
            's' => Element::S,
            _ => {
                return Err(SmilesError::UnsupportedElement {
                    symbol: first.to_string(),
                    pos: pos_at(0),
                })
            }
        };
        j = 1;
        (element, true)
    };

    if aromatic && !element.allows_aromatic() {
        return Err(SmilesError::UnsupportedElement {
            symbol: first.to_string(),
            pos: pos_at(0),
        });
    }

    let mut explicit_h: Option<u8> = None;
    let mut charge: i32 = 0;
    while j < content.len() {
        let c = at(j).unwrap();
        match c {
            '@' => {
                return Err(SmilesError::Unsupported {
                    what: "stereochemistry",
                    pos: pos_at(j),
                })
            }
            'H' => {
                if explicit_h.is_some() {
                    return Err(SmilesError::UnknownCharacter {
                        ch: 'H',
                        pos: pos_at(j),
                    });
                }
                j += 1;
                let mut count: u32 = 1;
                if let Some(d) = at(j).and_then(|c| c.to_digit(10)) {
                    count = d;
                    j += 1;
                }
                explicit_h = Some(count as u8);
            }
            '+' | '-' => {
                if charge != 0 {
                    return Err(SmilesError::UnknownCharacter {
                        ch: c,
                        pos: pos_at(j),
                    });
                }
                let sign: i32 = if c == '+' { 1 } else { -1 };
                j += 1;
                if let Some(d) = at(j).and_then(|c| c.to_digit(10)) {
                    charge = sign * d as i32;
                    j += 1;
                } else {
                    charge = sign;
                    while at(j) == Some(c) {
                        charge += sign;
                        j += 1;
                    }
                }
            }
            ':' => {
                return Err(SmilesError::Unsupported {
                    what: "atom class",
                    pos: pos_at(j),
                })
            }
            _ => {
                return Err(SmilesError::UnknownCharacter {
                    ch: c,
                    pos: pos_at(j),
                })
            }
        }
    }

    Ok(Token::Atom {
        element,
        aromatic,
        bracket: true,
        explicit_h,
        charge,
    })
}

struct PendingAtom {
    element: Element,
    aromatic: bool,
    bracket: bool,
    explicit_h: Option<u8>,
    charge: i32,
}

pub fn parse(input: &str) -> Result<MolecularGraph, SmilesError> {
    let tokens = tokenize(input)?;
    let mut atoms: Vec<PendingAtom> = Vec::new();
    let mut bonds: Vec<Bond> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut branch_stack: Vec<usize> = Vec::new();
    let mut pending_bond: Option<BondOrder> = None;
    // ring index -> (atom, bond order written at the opening, position)
    let mut open_rings: HashMap<u8, (usize, Option<BondOrder>)> = HashMap::new();

    for (token, pos) in tokens {
        match token {
            Token::Atom {
                element,
                aromatic,
                bracket,
                explicit_h,
                charge,
            } => {
                let idx = atoms.len();
                atoms.push(PendingAtom {
                    element,
                    aromatic,
                    bracket,
                    explicit_h,
                    charge,
                });
                match prev {
                    Some(p) => {
                        let order = pending_bond.take().unwrap_or_else(|| {
                            default_bond(&atoms[p], &atoms[idx])
                        });
                        bonds.push(Bond { a: p, b: idx, order });
                    }
                    None => {
                        if pending_bond.is_some() {
                            return Err(SmilesError::MisplacedBond { pos });
                        }
                    }
                }
                prev = Some(idx);
            }
            Token::Bond(order) => {
                if pending_bond.is_some() || prev.is_none() {
                    return Err(SmilesError::MisplacedBond { pos });
                }
                pending_bond = Some(order);
            }
            Token::BranchOpen => {
                let Some(p) = prev else {
                    return Err(SmilesError::MisplacedAttachment { pos });
                };
                if pending_bond.is_some() {
                    return Err(SmilesError::MisplacedBond { pos });
                }
                branch_stack.push(p);
            }
            Token::BranchClose => {
                if pending_bond.is_some() {
                    return Err(SmilesError::MisplacedBond { pos });
                }
                let Some(p) = branch_stack.pop() else {
                    return Err(SmilesError::UnmatchedBranchClose { pos });
                };
                prev = Some(p);
            }
            Token::RingClosure(index) => {
                let Some(here) = prev else {
                    return Err(SmilesError::MisplacedAttachment { pos });
                };
                let written = pending_bond.take();
                match open_rings.remove(&index) {
                    Some((there, opened)) => {
                        if there == here {
                            return Err(SmilesError::RingBondConflict { index });
                        }
                        let order = match (opened, written) {
                            (Some(a), Some(b)) if a != b => {
                                return Err(SmilesError::RingBondConflict { index })
                            }
                            (Some(a), _) => a,
                            (None, Some(b)) => b,
                            (None, None) => default_bond(&atoms[there], &atoms[here]),
                        };
                        if bonds
                            .iter()
                            .any(|b| (b.a, b.b) == (there, here) || (b.a, b.b) == (here, there))
                        {
                            return Err(SmilesError::RingBondConflict { index });
                        }
                        bonds.push(Bond {
                            a: there,
                            b: here,
                            order,
                        });
                    }
                    None => {
                        open_rings.insert(index, (here, written));
                    }
                }
            }
        }
    }

    if let Some(&index) = open_rings.keys().min() {
        return Err(SmilesError::UnclosedRing { index });
    }
    if !branch_stack.is_empty() {
        return Err(SmilesError::UnclosedBranch);
    }
    if pending_bond.is_some() {
        return Err(SmilesError::MisplacedBond { pos: input.len() });
    }
    if atoms.is_empty() {
        return Err(SmilesError::Empty);
    }

    finalize(atoms, bonds)
}

fn default_bond(a: &PendingAtom, b: &PendingAtom) -> BondOrder {
    if a.aromatic && b.aromatic {
        BondOrder::Aromatic
    } else {
        BondOrder::Single
    }
}

/// Assign hydrogen counts and run the valence check.
fn finalize(atoms: Vec<PendingAtom>, bonds: Vec<Bond>) -> Result<MolecularGraph, SmilesError> {
    let mut order_sum = vec![0.0f64; atoms.len()];
    let mut valence_units = vec![0u32; atoms.len()];
    for bond in &bonds {
        for end in [bond.a, bond.b] {
            order_sum[end] += bond.order.value();
            valence_units[end] += bond.order.valence_units();
        }
    }

    let mut out = Vec::with_capacity(atoms.len());
    for (idx, atom) in atoms.iter().enumerate() {
        let hydrogens = match (atom.bracket, atom.explicit_h) {
            // Bracket atoms carry exactly what was written; absent means zero.
            (true, written) => written.unwrap_or(0),
            (false, _) => {
                let used = order_sum[idx].ceil() as i64;
                (atom.element.default_valence() as i64 - used).max(0) as u8
            }
        };
        // The valence limit applies unless a bracket hydrogen count overrides
        // it. Charge widens the limit for the nitrogen family.
        if atom.explicit_h.is_none() {
            let mut allowed = atom.element.default_valence() as i64;
            if atom.element.charge_adjusts_valence() {
                allowed += atom.charge as i64;
            }
            let allowed = allowed.max(0) as u32;
            if valence_units[idx] > allowed {
                return Err(SmilesError::ValenceExceeded {
                    atom: idx,
                    element: atom.element.symbol(),
                    used: valence_units[idx],
                    allowed,
                });
            }
        }
        out.push(Atom {
            element: atom.element,
            aromatic: atom.aromatic,
            charge: atom.charge,
            hydrogens,
        });
    }

    Ok(MolecularGraph { atoms: out, bonds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(g: &MolecularGraph, i: usize) -> &Atom {
        &g.atoms[i]
    }

    #[test]
    fn tokenize_ethanol() {
        let tokens = tokenize("CCO").unwrap();
        assert_eq!(tokens.len(), 3);
        assert_eq!(
            tokens[2],
            (
                Token::Atom {
                    element: Element::O,
                    aromatic: false,
                    bracket: false,
                    explicit_h: None,
                    charge: 0
                },
                2
            )
        );
    }

    #[test]
    fn tokenize_two_letter_symbols() {
        let tokens = tokenize("ClCBr").unwrap();
        let elements: Vec<Element> = tokens
            .iter()
            .filter_map(|(t, _)| match t {
                Token::Atom { element, .. } => Some(*element),
                _ => None,
            })
            .collect();
        assert_eq!(elements, vec![Element::Cl, Element::C, Element::Br]);
    }

    #[test]
    fn tokenize_percent_ring_closure() {
        let tokens = tokenize("C%12CC%12").unwrap();
        assert_eq!(tokens[1], (Token::RingClosure(12), 1));
        assert_eq!(tokens[4], (Token::RingClosure(12), 6));
    }

    #[test]
    fn parse_isopropanol() {
        let g = parse("CC(C)O").unwrap();
        assert_eq!(g.atom_count(), 4);
        assert_eq!(g.bond_count(), 3);
        let pairs: Vec<(usize, usize)> = g.bonds.iter().map(|b| (b.a, b.b)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (1, 3)]);
        let hydrogens: Vec<u8> = g.atoms.iter().map(|a| a.hydrogens).collect();
        assert_eq!(hydrogens, vec![3, 1, 3, 1]);
    }

    #[test]
    fn parse_benzene() {
        let g = parse("c1ccccc1").unwrap();
        assert_eq!(g.atom_count(), 6);
        assert_eq!(g.bond_count(), 6);
        assert!(g.atoms.iter().all(|a| a.aromatic && a.hydrogens == 1));
        assert!(g.bonds.iter().all(|b| b.order == BondOrder::Aromatic));
    }

    #[test]
    fn parse_charged_oxygen() {
        let g = parse("[O-]").unwrap();
        assert_eq!(g.atom_count(), 1);
        assert_eq!(atom(&g, 0).charge, -1);
        assert_eq!(atom(&g, 0).hydrogens, 0);
    }

    #[test]
    fn parse_acetate_and_ammonium() {
        let g = parse("CC(=O)[O-]").unwrap();
        assert_eq!(atom(&g, 3).charge, -1);
        assert_eq!(atom(&g, 3).hydrogens, 0);
        assert_eq!(atom(&g, 2).hydrogens, 0);

        let g = parse("C[NH3+]").unwrap();
        assert_eq!(atom(&g, 1).charge, 1);
        assert_eq!(atom(&g, 1).hydrogens, 3);
    }

    #[test]
    fn quaternary_nitrogen_allowed_by_charge() {
        let g = parse("C[N+](C)(C)C").unwrap();
        assert_eq!(atom(&g, 1).hydrogens, 0);
        assert_eq!(atom(&g, 1).charge, 1);
        assert!(parse("CN(C)(C)C").is_err());
    }

    #[test]
    fn pyridine_nitrogen_has_no_hydrogen() {
        let g = parse("c1ccncc1").unwrap();
        let n = g.atoms.iter().position(|a| a.element == Element::N).unwrap();
        assert_eq!(g.atoms[n].hydrogens, 0);
    }

    #[test]
    fn pyrrole_needs_bracket_hydrogen() {
        let g = parse("c1cc[nH]c1").unwrap();
        let n = g.atoms.iter().position(|a| a.element == Element::N).unwrap();
        assert_eq!(g.atoms[n].hydrogens, 1);
        assert!(g.atoms[n].aromatic);
    }

    #[test]
    fn fused_aromatics_parse() {
        let g = parse("c1ccc2ccccc2c1").unwrap();
        assert_eq!(g.atom_count(), 10);
        assert_eq!(g.bond_count(), 11);
        // Fusion carbons carry three ring bonds and no hydrogen.
        let no_h = g.atoms.iter().filter(|a| a.hydrogens == 0).count();
        assert_eq!(no_h, 2);
    }

    #[test]
    fn triple_bond_and_explicit_orders() {
        let g = parse("CC#N").unwrap();
        assert_eq!(g.bonds[1].order, BondOrder::Triple);
        assert_eq!(atom(&g, 2).hydrogens, 0);

        let g = parse("C=C").unwrap();
        assert_eq!(g.bonds[0].order, BondOrder::Double);
        assert!(g.atoms.iter().all(|a| a.hydrogens == 2));
    }

    #[test]
    fn ring_closure_with_written_order() {
        let g = parse("C=1CCCCC=1").unwrap();
        let ring_bond = g.bonds.iter().find(|b| b.a == 0 && b.b == 5).unwrap();
        assert_eq!(ring_bond.order, BondOrder::Double);

        let g = parse("C1CCCCC=1").unwrap();
        let ring_bond = g.bonds.iter().find(|b| b.a == 0 && b.b == 5).unwrap();
        assert_eq!(ring_bond.order, BondOrder::Double);
    }

    #[test]
    fn conflicting_ring_orders_rejected() {
        assert_eq!(
            parse("C=1CCCCC#1"),
            Err(SmilesError::RingBondConflict { index: 1 })
        );
    }

    #[test]
    fn percent_ring_closure_builds_cyclohexane() {
        assert_eq!(parse("C%10CCCCC%10").unwrap(), parse("C1CCCCC1").unwrap());
    }

    #[test]
    fn ring_digit_can_be_reused_after_closing() {
        let g = parse("c1ccccc1-c1ccccc1").unwrap();
        assert_eq!(g.atom_count(), 12);
        assert_eq!(g.bond_count(), 13);
        let bridge = g.bonds.iter().find(|b| b.a == 5 && b.b == 6).unwrap();
        assert_eq!(bridge.order, BondOrder::Single);
    }

    #[test]
    fn branch_resumes_from_opening_atom() {
        let g = parse("CC(C)(C)C").unwrap();
        assert_eq!(g.degree(1), 4);
        assert_eq!(atom(&g, 1).hydrogens, 0);
    }

    #[test]
    fn error_positions_are_reported() {
        assert_eq!(
            parse("C$C"),
            Err(SmilesError::UnknownCharacter { ch: '$', pos: 1 })
        );
        assert_eq!(
            parse("CC[CH4"),
            Err(SmilesError::UnterminatedBracket { pos: 2 })
        );
    }

    #[test]
    fn structural_errors() {
        assert_eq!(parse("C1CC"), Err(SmilesError::UnclosedRing { index: 1 }));
        assert_eq!(parse("C(CC"), Err(SmilesError::UnclosedBranch));
        assert_eq!(
            parse("CC)C"),
            Err(SmilesError::UnmatchedBranchClose { pos: 2 })
        );
        assert_eq!(parse("=CC"), Err(SmilesError::MisplacedBond { pos: 0 }));
        assert_eq!(parse("C=)C"), Err(SmilesError::MisplacedBond { pos: 2 }));
        assert_eq!(parse(""), Err(SmilesError::Empty));
        assert_eq!(
            parse("(CC)"),
            Err(SmilesError::MisplacedAttachment { pos: 0 })
        );
    }

    #[test]
    fn unsupported_features_rejected() {
        assert!(matches!(
            parse("C/C=C/C"),
            Err(SmilesError::Unsupported { what: "stereo bond", .. })
        ));
        assert!(matches!(
            parse("[C@H](C)(C)C"),
            Err(SmilesError::Unsupported { what: "stereochemistry", .. })
        ));
        assert!(matches!(
            parse("[13C]"),
            Err(SmilesError::Unsupported { what: "isotope label", .. })
        ));
        assert!(matches!(
            parse("CC.CC"),
            Err(SmilesError::Unsupported { what: "multi-fragment input", .. })
        ));
        assert!(matches!(
            parse("C*"),
            Err(SmilesError::Unsupported { what: "wildcard atom", .. })
        ));
    }

    #[test]
    fn unsupported_elements_rejected() {
        assert_eq!(
            parse("[Se]CC"),
            Err(SmilesError::UnsupportedElement {
                symbol: "Se".into(),
                pos: 1
            })
        );
        assert!(matches!(
            parse("[Na+]"),
            Err(SmilesError::UnsupportedElement { .. })
        ));
        assert!(matches!(
            parse("[H+]"),
            Err(SmilesError::UnsupportedElement { .. })
        ));
    }

    #[test]
    fn valence_violations_rejected() {
        assert!(matches!(
            parse("C(C)(C)(C)(C)C"),
            Err(SmilesError::ValenceExceeded { atom: 0, .. })
        ));
        assert!(matches!(
            parse("F=C"),
            Err(SmilesError::ValenceExceeded { .. })
        ));
        assert!(matches!(
            parse("CS(=O)(=O)C"),
            Err(SmilesError::ValenceExceeded { .. })
        ));
    }

    #[test]
    fn aromatic_heterocycles_with_two_valent_atoms_parse() {
        // Ring-bond order sums exceed the plain valence of O and S, but
        // aromatic bonds count one unit each for the limit check.
        let g = parse("c1ccoc1").unwrap();
        let o = g.atoms.iter().position(|a| a.element == Element::O).unwrap();
        assert_eq!(g.atoms[o].hydrogens, 0);
        let g = parse("c1ccsc1").unwrap();
        let s = g.atoms.iter().position(|a| a.element == Element::S).unwrap();
        assert_eq!(g.atoms[s].hydrogens, 0);
    }

    #[test]
    fn parse_is_deterministic() {
        let a = parse("CC(=O)Oc1ccccc1C(=O)O").unwrap();
        let b = parse("CC(=O)Oc1ccccc1C(=O)O").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn aspirin_shape() {
        let g = parse("CC(=O)Oc1ccccc1C(=O)O").unwrap();
        assert_eq!(g.atom_count(), 13);
        assert_eq!(g.bond_count(), 13);
        let aromatic = g.atoms.iter().filter(|a| a.aromatic).count();
        assert_eq!(aromatic, 6);
    }

    #[test]
    fn single_fragment_graphs_are_connected() {
        for smi in ["CCO", "CC(C)O", "c1ccccc1", "CC(=O)Oc1ccccc1C(=O)O", "C1CC1C2CC2"] {
            let g = parse(smi).unwrap();
            let mut seen = vec![false; g.atom_count()];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in g.neighbors(i) {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            assert!(seen.iter().all(|&s| s), "{smi} should be connected");
        }
    }

    #[test]
    fn bond_count_matches_atoms_plus_rings() {
        for (smi, rings) in [
            ("CCO", 0),
            ("c1ccccc1", 1),
            ("c1ccc2ccccc2c1", 2),
            ("C1CC1C2CC2", 2),
            ("CC(=O)Oc1ccccc1C(=O)O", 1),
        ] {
            let g = parse(smi).unwrap();
            assert_eq!(
                g.bond_count(),
                g.atom_count() - 1 + rings,
                "bond count identity for {smi}"
            );
        }
    }
}
