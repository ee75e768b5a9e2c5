//! Dyadic edges and diameter functions on the binary tree of dyadic intervals.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::Dyadic;

/// Largest supported tree resolution.
pub const MAX_TREE_RESOLUTION: u32 = 24;

const MAX_GEN: u32 = 62;

/// The interval `[(j-1) 2^-n, j 2^-n]`, written `n/j`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicEdge {
    gen: u32,
    index: u64,
}

impl DyadicEdge {
    pub const ROOT: DyadicEdge = DyadicEdge { gen: 0, index: 1 };

    pub fn new(gen: u32, index: u64) -> Result<Self> {
        if gen > MAX_GEN || index == 0 || index > 1u64 << gen {
            return Err(Error::InvalidEdge(format!("{gen}/{index}")));
        }
        Ok(DyadicEdge { gen, index })
    }

    pub(crate) fn new_unchecked(gen: u32, index: u64) -> Self {
        debug_assert!(index >= 1 && index <= 1u64 << gen);
        DyadicEdge { gen, index }
    }

    /// The generation-`k` cell `[i 2^-k, (i+1) 2^-k]` (zero-based `i`).
    pub fn cell(k: u32, i: u64) -> Self {
        DyadicEdge::new_unchecked(k, i + 1)
    }

    pub fn gen(&self) -> u32 {
        self.gen
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn left(&self) -> Dyadic {
        Dyadic::grid(self.index - 1, self.gen)
    }

    pub fn right(&self) -> Dyadic {
        Dyadic::grid(self.index, self.gen)
    }

    pub fn length(&self) -> Dyadic {
        Dyadic::pow2(-(self.gen as i32))
    }

    pub fn children(&self) -> [DyadicEdge; 2] {
        let g = self.gen + 1;
        [DyadicEdge::new_unchecked(g, 2 * self.index - 1), DyadicEdge::new_unchecked(g, 2 * self.index)]
    }

    pub fn parent(&self) -> Option<DyadicEdge> {
        if self.gen == 0 {
            None
        } else {
            Some(DyadicEdge::new_unchecked(self.gen - 1, self.index.div_ceil(2)))
        }
    }

    pub fn sibling(&self) -> Option<DyadicEdge> {
        if self.gen == 0 {
            return None;
        }
        let j = if self.index % 2 == 1 { self.index + 1 } else { self.index - 1 };
        Some(DyadicEdge::new_unchecked(self.gen, j))
    }

    /// The ancestor at generation `g <= gen`.
    pub fn ancestor(&self, g: u32) -> DyadicEdge {
        debug_assert!(g <= self.gen);
        let shift = self.gen - g;
        DyadicEdge::new_unchecked(g, ((self.index - 1) >> shift) + 1)
    }

    /// `other ⊆ self`.
    pub fn contains_edge(&self, other: &DyadicEdge) -> bool {
        other.gen >= self.gen && other.ancestor(self.gen) == *self
    }

    pub fn contains_point(&self, x: &Dyadic) -> bool {
        self.left() <= *x && *x <= self.right()
    }

    /// Zero-based indices of grid points `V_k` at the two ends, for `gen <= k`.
    pub fn grid_span(&self, k: u32) -> (usize, usize) {
        debug_assert!(self.gen <= k);
        let w = 1usize << (k - self.gen);
        ((self.index as usize - 1) * w, self.index as usize * w)
    }

    /// Position in breadth-first order: `2^gen - 1 + (index - 1)`.
    pub fn heap_index(&self) -> usize {
        (1usize << self.gen) - 1 + (self.index as usize - 1)
    }

    pub fn from_heap_index(h: usize) -> DyadicEdge {
        let gen = usize::BITS - 1 - (h + 1).leading_zeros();
        DyadicEdge::new_unchecked(gen, (h + 1 - (1usize << gen)) as u64 + 1)
    }

    /// All edges of generation `g`, left to right.
    pub fn at_generation(g: u32) -> impl Iterator<Item = DyadicEdge> {
        (1..=1u64 << g).map(move |j| DyadicEdge::new_unchecked(g, j))
    }

    /// All edges of generation at most `k`, in breadth-first order.
    pub fn up_to(k: u32) -> impl Iterator<Item = DyadicEdge> {
        (0..=k).flat_map(DyadicEdge::at_generation)
    }

    /// The smallest edge containing both grid points.
    pub fn common_ancestor(a: &Dyadic, b: &Dyadic, k: u32) -> DyadicEdge {
        let (lo, hi) = if a <= b { (*a, *b) } else { (*b, *a) };
        let (i, j) = (lo.grid_index(k).unwrap(), hi.grid_index(k).unwrap());
        for g in (0..=k).rev() {
            let w = 1u64 << (k - g);
            // edges of generation g containing lo
            let first = if i % w == 0 && i > 0 { i / w } else { i / w + 1 };
            let last = (i / w + 1).min(1u64 << g);
            for idx in first..=last {
                let e = DyadicEdge::new_unchecked(g, idx);
                let (l, r) = e.grid_span(k);
                if l as u64 <= i && j <= r as u64 {
                    return e;
                }
            }
        }
        DyadicEdge::ROOT
    }
}

impl fmt::Display for DyadicEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.gen, self.index)
    }
}

impl fmt::Debug for DyadicEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self)
    }
}

impl FromStr for DyadicEdge {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidEdge(String::from(s));
        let (n, j) = s.trim().split_once('/').ok_or_else(bad)?;
        let n: u32 = n.trim().parse().map_err(|_| bad())?;
        let j: u64 = j.trim().parse().map_err(|_| bad())?;
        DyadicEdge::new(n, j).map_err(|_| bad())
    }
}

/// Families of diameter functions that can be generated directly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeneratorKind {
    /// Halving everywhere except the root step, so `Δ([0,½]) = 1`.
    Euclidean,
    /// Halving everywhere: `Δ(e) = 2^-gen(e)`.
    EuclideanRaw,
    /// Halving exactly on steps into generations divisible by `period`.
    Snowflake { period: u32 },
    /// Independent halving bits with probability `p_halve`; the root step
    /// never halves.
    Random { seed: u64, p_halve: f64 },
}

/// A diameter function: `Δ(root) = 1` and each child has the parent's value
/// or half of it. Steps are explicit above the resolution `K` and always
/// halve below it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiameterTree {
    resolution: u32,
    normalized: bool,
    halving: Vec<bool>,
    // non-halving steps on the path from the root, for edges of generation <= K
    excess: Vec<u32>,
}

impl DiameterTree {
    /// Build from halving bits of all `2^K - 1` edges of generation `< K`,
    /// in breadth-first order.
    pub fn from_bits(resolution: u32, normalized: bool, halving: Vec<bool>) -> Result<Self> {
        check_resolution(resolution)?;
        let expected = (1usize << resolution) - 1;
        if halving.len() != expected {
            return Err(Error::Length { expected, got: halving.len() });
        }
        if normalized && halving.first().copied().unwrap_or(true) {
            return Err(Error::NotNormalized);
        }
        let total = (1usize << (resolution + 1)) - 1;
        let mut excess = vec![0u32; total];
        for h in 1..total {
            let p = (h - 1) / 2;
            excess[h] = excess[p] + u32::from(!halving[p]);
        }
        Ok(DiameterTree { resolution, normalized, halving, excess })
    }

    /// Build from explicit `(edge, halves)` entries; unlisted edges halve.
    pub fn from_overrides(
        resolution: u32,
        normalized: bool,
        entries: impl IntoIterator<Item = (DyadicEdge, bool)>,
    ) -> Result<Self> {
        check_resolution(resolution)?;
        let mut bits = vec![true; (1usize << resolution) - 1];
        for (e, halves) in entries {
            if e.gen() >= resolution {
                return Err(Error::EdgeBeyondResolution { edge: format!("{e}"), resolution });
            }
            bits[e.heap_index()] = halves;
        }
        DiameterTree::from_bits(resolution, normalized, bits)
    }

    pub fn generate(kind: GeneratorKind, resolution: u32) -> Result<Self> {
        check_resolution(resolution)?;
        let n = (1usize << resolution) - 1;
        let (bits, normalized) = match kind {
            GeneratorKind::Euclidean => {
                let mut b = vec![true; n];
                if let Some(r) = b.first_mut() {
                    *r = false;
                }
                (b, resolution > 0)
            }
            GeneratorKind::EuclideanRaw => (vec![true; n], false),
            GeneratorKind::Snowflake { period } => {
                if period == 0 {
                    return Err(Error::Domain(String::from("snowflake period must be positive")));
                }
                let b = (0..n).map(|h| (DyadicEdge::from_heap_index(h).gen() + 1).is_multiple_of(period)).collect();
                (b, period > 1 && resolution > 0)
            }
            GeneratorKind::Random { seed, p_halve } => {
                if !(0.0..=1.0).contains(&p_halve) {
                    return Err(Error::Domain(format!("halving probability {p_halve} outside [0, 1]")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut b: Vec<bool> = (0..n).map(|_| rng.gen_bool(p_halve)).collect();
                if let Some(r) = b.first_mut() {
                    *r = false;
                }
                (b, resolution > 0)
            }
        };
        DiameterTree::from_bits(resolution, normalized, bits)
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Whether the children of `e` have half its diameter.
    pub fn halves(&self, e: &DyadicEdge) -> bool {
        e.gen() >= self.resolution || self.halving[e.heap_index()]
    }

    pub fn halving_bits(&self) -> &[bool] {
        &self.halving
    }

    /// Number of non-halving steps between the root and `e`.
    pub fn excess(&self, e: &DyadicEdge) -> u32 {
        if e.gen() <= self.resolution {
            self.excess[e.heap_index()]
        } else {
            self.excess[e.ancestor(self.resolution).heap_index()]
        }
    }

    /// `a` with `Δ(e) = 2^-a`.
    pub fn delta_exponent(&self, e: &DyadicEdge) -> u32 {
        e.gen() - self.excess(e)
    }

    pub fn delta(&self, e: &DyadicEdge) -> Dyadic {
        Dyadic::pow2(-(self.delta_exponent(e) as i32))
    }

    /// Least `n₀` such that `Δ` halves at least once over any `n₀`
    /// consecutive generations.
    pub fn doubling_index(&self) -> u32 {
        // longest run of non-halving steps ending with the step out of each edge
        let n = self.halving.len();
        let mut run = vec![0u32; n];
        let mut longest = 0;
        for h in 0..n {
            let inherited = if h == 0 { 0 } else { run[(h - 1) / 2] };
            run[h] = if self.halving[h] { 0 } else { inherited + 1 };
            longest = longest.max(run[h]);
        }
        longest + 1
    }

    /// Largest `gen(e) + log₂ Δ(e)` over explicit edges.
    pub fn n_max(&self) -> u32 {
        let k = self.resolution;
        DyadicEdge::at_generation(k).map(|e| self.excess(&e)).max().unwrap_or(0)
    }

    /// The diameter function `Δ_n`: equal to `Δ` on edges with
    /// `Δ(e) <= 2^(n - gen e)` and to `2^(n - gen e)` elsewhere.
    pub fn capped(&self, n: u32) -> DiameterTree {
        let bits: Vec<bool> = self.halving.iter().enumerate().map(|(h, &b)| b || self.excess[h] >= n).collect();
        let normalized = self.normalized && n > 0;
        DiameterTree::from_bits(self.resolution, normalized, bits).expect("capped tree is valid")
    }

    /// Explicit edges whose children do not halve.
    pub fn non_halving_edges(&self) -> impl Iterator<Item = DyadicEdge> + '_ {
        self.halving.iter().enumerate().filter(|(_, &b)| !b).map(|(h, _)| DyadicEdge::from_heap_index(h))
    }
}

fn check_resolution(k: u32) -> Result<()> {
    if k > MAX_TREE_RESOLUTION {
        return Err(Error::Resolution { got: k, min: 0, max: MAX_TREE_RESOLUTION });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> DyadicEdge {
        s.parse().unwrap()
    }

    #[test]
    fn edge_geometry() {
        let x = e("3/5");
        assert_eq!(x.left(), Dyadic::new(1, 1));
        assert_eq!(x.right(), Dyadic::new(5, 3));
        assert_eq!(x.children(), [e("4/9"), e("4/10")]);
        assert_eq!(x.parent(), Some(e("2/3")));
        assert_eq!(x.sibling(), Some(e("3/6")));
        assert_eq!(x.ancestor(1), e("1/2"));
        assert!(e("1/2").contains_edge(&x));
        assert!(!e("1/1").contains_edge(&x));
        assert_eq!(x.grid_span(4), (8, 10));
        assert_eq!(DyadicEdge::from_heap_index(x.heap_index()), x);
        assert!("3/9".parse::<DyadicEdge>().is_err());
        assert!("3/0".parse::<DyadicEdge>().is_err());
    }

    #[test]
    fn common_ancestor_is_smallest() {
        let k = 3;
        let a = Dyadic::grid(1, k);
        let b = Dyadic::grid(3, k);
        assert_eq!(DyadicEdge::common_ancestor(&a, &b, k), e("1/1"));
        let c = Dyadic::grid(4, k);
        assert_eq!(DyadicEdge::common_ancestor(&c, &Dyadic::grid(6, k), k), e("2/3"));
        assert_eq!(DyadicEdge::common_ancestor(&c, &Dyadic::grid(5, k), k), e("3/5"));
        assert_eq!(DyadicEdge::common_ancestor(&c, &c, k), e("3/4"));
    }

    #[test]
    fn generators() {
        let t = DiameterTree::generate(GeneratorKind::Euclidean, 3).unwrap();
        assert_eq!(t.delta(&e("1/1")), Dyadic::ONE);
        assert_eq!(t.delta(&e("3/2")), Dyadic::pow2(-2));
        assert_eq!(t.doubling_index(), 2);
        let raw = DiameterTree::generate(GeneratorKind::EuclideanRaw, 3).unwrap();
        assert_eq!(raw.delta(&e("3/2")), Dyadic::pow2(-3));
        assert_eq!(raw.doubling_index(), 1);
        let snow = DiameterTree::generate(GeneratorKind::Snowflake { period: 2 }, 4).unwrap();
        assert!(snow.is_normalized());
        for g in 0..=4u32 {
            assert_eq!(snow.delta_exponent(&DyadicEdge::cell(g, 0)), g / 2);
        }
        assert_eq!(snow.delta_exponent(&DyadicEdge::cell(6, 0)), 4);
        let r = DiameterTree::generate(GeneratorKind::Random { seed: 3, p_halve: 0.5 }, 5).unwrap();
        let deep = DyadicEdge::cell(7, 77);
        assert_eq!(r.delta(&deep), r.delta(&deep.ancestor(5)) * Dyadic::pow2(-2));
    }

    #[test]
    fn overrides_reject_deep_edges() {
        let err = DiameterTree::from_overrides(2, false, [(e("2/1"), false)]).unwrap_err();
        assert_eq!(err, Error::EdgeBeyondResolution { edge: "2/1".into(), resolution: 2 });
        assert_eq!(DiameterTree::from_overrides(2, true, [(e("0/1"), true)]).unwrap_err(), Error::NotNormalized);
    }

    #[test]
    fn capped_trees() {
        let snow = DiameterTree::generate(GeneratorKind::Snowflake { period: 2 }, 6).unwrap();
        assert_eq!(snow.n_max(), 3);
        let c1 = snow.capped(1);
        for e in DyadicEdge::up_to(6) {
            let cap = Dyadic::pow2(1 - e.gen() as i32);
            let want = if snow.delta(&e) <= cap { snow.delta(&e) } else { cap };
            assert_eq!(c1.delta(&e), want, "{e}");
        }
        assert_eq!(snow.capped(3), snow);
    }
}
