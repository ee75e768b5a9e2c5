//! The nested families `A_n`, their atoms `At_n`, the diffuse parts
//! `Diff_n` and the approximating metrics `d_n`.
//!
//! `e ∈ A_n` iff `Δ(e) <= 2^(n - gen e)`, i.e. iff at most `n` of the steps
//! from the root to `e` fail to halve. The atoms of `A_n` are its maximal
//! members whose children leave `A_n`: edges with exactly `n` non-halving
//! steps above them whose own step does not halve either.

use alloc::vec;
use alloc::vec::Vec;

use crate::arc::QuasiArc;
use crate::dyadic::{DiameterTree, DyadicEdge, MAX_TREE_RESOLUTION};
use crate::error::{Error, Result};
use crate::numeric::Dyadic;

const NO_ATOM: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct Filtration {
    tree: DiameterTree,
    resolution: u32,
    n_max: u32,
    atoms: Vec<Vec<DyadicEdge>>,
    // per level: for each cell, position of the atom containing it
    cell_atom: Vec<Vec<u32>>,
}

/// One row of the rectifiable/unrectifiable bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuLevel {
    pub n: u32,
    pub atom_count: usize,
    pub atom_measure: Dyadic,
    pub diff_measure: Dyadic,
    /// Every atom of this level lies in an atom of the previous level.
    pub nested: bool,
    /// Lebesgue measure of the intersection of `∪At_m` over the levels so far.
    pub remainder_measure: Dyadic,
}

impl Filtration {
    pub fn new(tree: DiameterTree, resolution: u32) -> Result<Self> {
        if resolution < tree.resolution() || resolution > MAX_TREE_RESOLUTION {
            return Err(Error::Resolution { got: resolution, min: tree.resolution(), max: MAX_TREE_RESOLUTION });
        }
        let n_max = tree.n_max();
        let mut atoms = vec![Vec::new(); n_max as usize];
        for e in tree.non_halving_edges() {
            atoms[tree.excess(&e) as usize].push(e);
        }
        let cells = 1usize << resolution;
        let mut cell_atom = Vec::with_capacity(n_max as usize);
        for level in atoms.iter_mut() {
            level.sort_by_key(|e| e.left());
            let mut map = vec![NO_ATOM; cells];
            for (pos, e) in level.iter().enumerate() {
                let (l, r) = e.grid_span(resolution);
                map[l..r].fill(pos as u32);
            }
            cell_atom.push(map);
        }
        Ok(Filtration { tree, resolution, n_max, atoms, cell_atom })
    }

    pub fn from_tree(tree: DiameterTree) -> Result<Self> {
        let k = tree.resolution();
        Filtration::new(tree, k)
    }

    pub fn tree(&self) -> &DiameterTree {
        &self.tree
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn cell_count(&self) -> usize {
        1usize << self.resolution
    }

    /// Levels `n >= n_max` have no atoms.
    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn is_active(&self, n: u32) -> bool {
        n < self.n_max
    }

    pub fn contains(&self, n: u32, e: &DyadicEdge) -> bool {
        self.tree.excess(e) <= n
    }

    /// `At_n`, left to right.
    pub fn atoms(&self, n: u32) -> &[DyadicEdge] {
        self.atoms.get(n as usize).map_or(&[], Vec::as_slice)
    }

    pub fn atom_of_cell(&self, n: u32, cell: usize) -> Option<DyadicEdge> {
        let pos = *self.cell_atom.get(n as usize)?.get(cell)?;
        (pos != NO_ATOM).then(|| self.atoms[n as usize][pos as usize])
    }

    pub fn atom_measure(&self, n: u32) -> Dyadic {
        self.atoms(n).iter().fold(Dyadic::ZERO, |s, e| s + e.length())
    }

    /// Cells of `Diff_n`: those in no atom of `At_n`.
    pub fn diff_cells(&self, n: u32) -> Vec<usize> {
        (0..self.cell_count()).filter(|&c| self.atom_of_cell(n, c).is_none()).collect()
    }

    /// Grid points of `Diff_n`: those not interior to an atom of `At_n`.
    pub fn diff_points(&self, n: u32) -> Vec<usize> {
        let cells = self.cell_count();
        (0..=cells)
            .filter(|&p| {
                if p == 0 || p == cells {
                    return true;
                }
                match (self.atom_of_cell(n, p - 1), self.atom_of_cell(n, p)) {
                    (Some(a), Some(b)) => a != b,
                    _ => true,
                }
            })
            .collect()
    }

    /// Exponent `a` with `H¹_n(cell) = Δ_n(cell) = 2^-a`.
    pub fn h1_exponent(&self, n: u32, cell: usize) -> u32 {
        let c = DyadicEdge::cell(self.resolution, cell as u64);
        self.resolution - self.tree.excess(&c).min(n)
    }

    pub fn h1(&self, n: u32, cell: usize) -> Dyadic {
        Dyadic::pow2(-(self.h1_exponent(n, cell) as i32))
    }

    /// The diameter function of `d_n`.
    pub fn approx_tree(&self, n: u32) -> DiameterTree {
        self.tree.capped(n)
    }

    /// `d_n` on `V_K`.
    pub fn approx_metric(&self, n: u32) -> Result<QuasiArc> {
        QuasiArc::new(self.approx_tree(n), self.resolution)
    }

    /// The level `k` and atom `e' ∈ At_k` with `e ⊊ e'` and `k` largest.
    pub fn diff_witness(&self, e: &DyadicEdge) -> Result<(u32, DyadicEdge)> {
        let no_atom = || Error::Domain(alloc::format!("no atom strictly contains {e}"));
        let start = if self.tree.halves(e) { e.gen() } else { e.gen().checked_sub(1).ok_or_else(no_atom)? };
        let mut g = start as i64;
        while g >= 0 {
            let a = e.ancestor(g as u32);
            if !self.tree.halves(&a) {
                return Ok((self.tree.excess(&a), a));
            }
            g -= 1;
        }
        Err(no_atom())
    }

    /// Measures of `∪At_n` and `Diff_n` for `n` in `levels`, with nesting
    /// checks and the shrinking intersection of the atom unions.
    pub fn ru_decomposition(&self, levels: core::ops::RangeInclusive<u32>) -> Vec<RuLevel> {
        let cells = self.cell_count();
        let cell_len = Dyadic::pow2(-(self.resolution as i32));
        let mut inter = vec![true; cells];
        let mut out = Vec::new();
        let mut prev: Option<u32> = None;
        for n in levels {
            let covered: Vec<bool> = (0..cells).map(|c| self.atom_of_cell(n, c).is_some()).collect();
            let nested = match prev {
                None => true,
                Some(p) => self.atoms(n).iter().all(|a| {
                    let (l, _) = a.grid_span(self.resolution);
                    self.atom_of_cell(p, l).is_some_and(|b| b.contains_edge(a))
                }),
            };
            let mut remainder = 0u64;
            for c in 0..cells {
                inter[c] &= covered[c];
                remainder += u64::from(inter[c]);
            }
            let atom_measure = self.atom_measure(n);
            out.push(RuLevel {
                n,
                atom_count: self.atoms(n).len(),
                atom_measure,
                diff_measure: Dyadic::ONE - atom_measure,
                nested,
                remainder_measure: Dyadic::from_int(remainder as i64) * cell_len,
            });
            prev = Some(n);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::GeneratorKind;

    fn e(s: &str) -> DyadicEdge {
        s.parse().unwrap()
    }

    #[test]
    fn snowflake_atoms() {
        let t = DiameterTree::generate(GeneratorKind::Snowflake { period: 2 }, 6).unwrap();
        let f = Filtration::from_tree(t).unwrap();
        assert_eq!(f.n_max(), 3);
        assert_eq!(f.atoms(0), &[e("0/1")]);
        assert_eq!(f.atoms(1), DyadicEdge::at_generation(2).collect::<Vec<_>>().as_slice());
        assert_eq!(f.atoms(2).len(), 16);
        assert!(f.atoms(3).is_empty());
        assert_eq!(f.diff_witness(&e("3/2")).unwrap(), (1, e("2/1")));
        assert_eq!(f.diff_witness(&e("2/3")).unwrap(), (0, e("0/1")));
        let ru = f.ru_decomposition(0..=3);
        assert!(ru[..3].iter().all(|r| r.atom_measure == Dyadic::ONE && r.nested));
        assert_eq!(ru[3].remainder_measure, Dyadic::ZERO);
    }

    #[test]
    fn euclidean_atoms() {
        let t = DiameterTree::generate(GeneratorKind::Euclidean, 3).unwrap();
        let f = Filtration::from_tree(t).unwrap();
        assert_eq!(f.atoms(0), &[e("0/1")]);
        assert!(f.atoms(1).is_empty());
        assert_eq!(f.diff_points(0), vec![0, 8]);
        assert_eq!(f.diff_points(1).len(), 9);
        assert_eq!(f.diff_witness(&e("2/3")).unwrap(), (0, e("0/1")));
        assert!(f.diff_witness(&e("0/1")).is_err());
        assert_eq!(f.h1(0, 0), Dyadic::pow2(-3));
        assert_eq!(f.h1(1, 0), Dyadic::pow2(-2));
    }
}
