//! Isomorphisms between the mean-zero subspace `K` of `L¹(μ)`, the quotient
//! `L¹(μ)/ℝ1`, and `L¹(μ⌞X)`, on finite measure spaces.
//!
//! Vectors are densities, one value per atom, with norm `Σ |g(a)| μ(a)`.
//! Operator norms are exact: every domain used here is cut out of `L¹` by
//! mean-zero conditions on disjoint blocks, so its unit ball is the convex
//! hull of `1_a/μ(a)` for unconstrained atoms and
//! `(1_a/μ(a) - 1_b/μ(b))/2` for pairs inside a constrained block.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numeric::Rational;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMeasureSpace {
    labels: Vec<String>,
    weights: Vec<Rational>,
}

impl FiniteMeasureSpace {
    pub fn new(labels: Vec<String>, weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Measure("no atoms".into()));
        }
        if labels.len() != weights.len() {
            return Err(Error::Length { expected: weights.len(), got: labels.len() });
        }
        if let Some(i) = weights.iter().position(|w| !w.is_positive()) {
            return Err(Error::Measure(format!("atom {} has non-positive weight", labels[i])));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Measure(format!("duplicate label {l}")));
            }
        }
        Ok(FiniteMeasureSpace { labels, weights })
    }

    pub fn from_weights(weights: Vec<Rational>) -> Result<Self> {
        let labels = (0..weights.len()).map(|i| format!("a{i}")).collect();
        FiniteMeasureSpace::new(labels, weights)
    }

    /// Blocks of mass `1/2, 1/4, ..., 2^-(blocks-1), 2^-(blocks-1)`, each split
    /// into dyadic atoms by repeatedly halving a random atom of the block.
    pub fn random_dyadic(seed: u64, atoms: usize, blocks: usize) -> Result<Self> {
        if blocks < 2 || atoms < blocks {
            return Err(Error::Measure(format!("cannot build {blocks} blocks from {atoms} atoms")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![1usize; blocks];
        for _ in blocks..atoms {
            counts[rng.gen_range(0..blocks)] += 1;
        }
        let mut weights = Vec::with_capacity(atoms);
        for (n, &count) in counts.iter().enumerate() {
            let mass = Rational::new(One::one(), num_bigint::BigInt::one() << (n + 1).min(blocks - 1));
            let mut parts = vec![mass];
            while parts.len() < count {
                let i = rng.gen_range(0..parts.len());
                let half = &parts[i] / Rational::from_integer(2.into());
                parts[i] = half.clone();
                parts.insert(i + 1, half);
            }
            weights.extend(parts);
        }
        FiniteMeasureSpace::from_weights(weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn total(&self) -> Rational {
        self.weights.iter().fold(Rational::zero(), |s, w| s + w)
    }

    pub fn mass(&self, set: &[usize]) -> Rational {
        set.iter().fold(Rational::zero(), |s, &a| s + &self.weights[a])
    }

    pub fn integral(&self, g: &[Rational]) -> Rational {
        g.iter().zip(&self.weights).fold(Rational::zero(), |s, (x, w)| s + x * w)
    }

    pub fn integral_over(&self, g: &[Rational], set: &[usize]) -> Rational {
        set.iter().fold(Rational::zero(), |s, &a| s + &g[a] * &self.weights[a])
    }

    /// `⨍_set g`, or 0 on an empty set.
    pub fn average(&self, g: &[Rational], set: &[usize]) -> Rational {
        if set.is_empty() {
            return Rational::zero();
        }
        self.integral_over(g, set) / self.mass(set)
    }

    pub fn norm(&self, g: &[Rational]) -> Rational {
        g.iter().zip(&self.weights).fold(Rational::zero(), |s, (x, w)| s + x.abs() * w)
    }

    pub fn indicator(&self, a: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.len()];
        v[a] = Rational::one() / &self.weights[a];
        v
    }

    /// Prefix blocks of mass `2^-(n+1) μ(Y)` for `n < blocks - 1`; the last
    /// block takes the rest.
    pub fn group_blocks(&self, blocks: usize) -> Result<Vec<Vec<usize>>> {
        if blocks < 2 {
            return Err(Error::Measure("need at least two blocks".into()));
        }
        let total = self.total();
        let mut out = Vec::with_capacity(blocks);
        let mut next = 0;
        for n in 0..blocks - 1 {
            let target = &total / Rational::from_integer(num_bigint::BigInt::one() << (n + 1));
            let mut mass = Rational::zero();
            let mut block = Vec::new();
            while mass < target && next < self.len() {
                mass += &self.weights[next];
                block.push(next);
                next += 1;
            }
            if mass != target {
                return Err(Error::Measure(format!("atoms cannot be grouped: block {n} needs mass {target}")));
            }
            out.push(block);
        }
        if next == self.len() {
            return Err(Error::Measure("no atoms left for the last block".into()));
        }
        out.push((next..self.len()).collect());
        Ok(out)
    }
}

/// A subspace of `L¹(μ)`: densities vanishing off `support` with zero
/// integral over each block in `constrained`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub support: Vec<usize>,
    pub constrained: Vec<Vec<usize>>,
}

impl Domain {
    pub fn full(space: &FiniteMeasureSpace) -> Self {
        Domain { support: (0..space.len()).collect(), constrained: Vec::new() }
    }

    pub fn mean_zero(space: &FiniteMeasureSpace) -> Self {
        let all: Vec<usize> = (0..space.len()).collect();
        Domain { support: all.clone(), constrained: vec![all] }
    }

    /// Extreme points of the unit ball, up to sign.
    pub fn extreme_points(&self, space: &FiniteMeasureSpace) -> Vec<Vec<Rational>> {
        let mut out = Vec::new();
        for &a in &self.support {
            if !self.constrained.iter().any(|b| b.contains(&a)) {
                out.push(space.indicator(a));
            }
        }
        let half = Rational::new(1.into(), 2.into());
        for block in &self.constrained {
            for (i, &a) in block.iter().enumerate() {
                for &b in &block[i + 1..] {
                    let mut v = vec![Rational::zero(); space.len()];
                    v[a] = &half / &space.weights[a];
                    v[b] = -(&half / &space.weights[b]);
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn contains(&self, space: &FiniteMeasureSpace, g: &[Rational]) -> bool {
        (0..space.len()).all(|a| self.support.contains(&a) || g[a].is_zero())
            && self.constrained.iter().all(|b| space.integral_over(g, b).is_zero())
    }
}

/// `sup ‖T g‖ / ‖g‖` over `domain`, with the codomain norm `norm`.
pub fn operator_norm(
    space: &FiniteMeasureSpace,
    domain: &Domain,
    map: impl Fn(&[Rational]) -> Vec<Rational>,
    norm: impl Fn(&[Rational]) -> Rational,
) -> Rational {
    domain.extreme_points(space).iter().map(|g| norm(&map(g))).fold(Rational::zero(), |m, x| if x > m { x } else { m })
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelMode {
    /// Split off the atom with this index.
    Atom(usize),
    /// Treat the space as diffuse, with blocks `A_0, ..., A_N`.
    Atomless(Vec<Vec<usize>>),
}

#[derive(Clone, Debug)]
pub struct KernelIso {
    pub space: FiniteMeasureSpace,
    pub mode: KernelMode,
    /// Atoms of `X`.
    pub x: Vec<usize>,
    /// Where the forward map lands: `L¹(μ⌞X)`, or for the diffuse model the
    /// densities with zero integral over the last block.
    pub codomain: Domain,
    /// `(name, measured, bound)` for each constituent map.
    pub norms: Vec<(&'static str, Rational, Rational)>,
    pub forward_norm: Rational,
    pub inverse_norm: Rational,
}

impl KernelIso {
    pub fn new(space: &FiniteMeasureSpace, mode: KernelMode) -> Result<Self> {
        let n = space.len();
        let k = Domain::mean_zero(space);
        let two = Rational::from_integer(2.into());
        let four = Rational::from_integer(4.into());
        let (x, codomain) = match &mode {
            KernelMode::Atom(a) => {
                if *a >= n {
                    return Err(Error::Measure(format!("no atom {a}")));
                }
                let x: Vec<usize> = (0..n).filter(|i| i != a).collect();
                (x.clone(), Domain { support: x, constrained: Vec::new() })
            }
            KernelMode::Atomless(blocks) => {
                check_blocks(space, blocks)?;
                let all: Vec<usize> = (0..n).collect();
                (all.clone(), Domain { support: all, constrained: vec![blocks.last().unwrap().clone()] })
            }
        };
        let mut iso = KernelIso {
            space: space.clone(),
            mode,
            x,
            codomain,
            norms: Vec::new(),
            forward_norm: Rational::zero(),
            inverse_norm: Rational::zero(),
        };
        let norm = |v: &[Rational]| space.norm(v);
        match &iso.mode {
            KernelMode::Atom(_) => {
                let f = operator_norm(space, &k, |g| iso.forward(g), norm);
                let g = operator_norm(space, &iso.codomain, |h| iso.inverse(h), norm);
                iso.norms = vec![("restrict", f, two.clone()), ("extend", g, two)];
            }
            KernelMode::Atomless(blocks) => {
                let k0 = Domain { support: (0..n).collect(), constrained: vec![blocks[0].clone()] };
                let nf = operator_norm(space, &k, |g| shift_a0(space, blocks, g), norm);
                let ng = operator_norm(space, &k0, |h| unshift_a0(space, blocks, h), norm);
                let nt = operator_norm(space, &k0, |g| telescope(space, blocks, g), norm);
                let ns = operator_norm(space, &iso.codomain, |h| untelescope(space, blocks, h), norm);
                iso.norms = vec![("F", nf, two.clone()), ("G", ng, two), ("T", nt, four.clone()), ("S", ns, four)];
            }
        }
        iso.forward_norm = operator_norm(space, &k, |g| iso.forward(g), norm);
        iso.inverse_norm = operator_norm(space, &iso.codomain, |h| iso.inverse(h), norm);
        Ok(iso)
    }

    pub fn forward(&self, g: &[Rational]) -> Vec<Rational> {
        match &self.mode {
            KernelMode::Atom(a) => {
                let mut h = g.to_vec();
                h[*a] = Rational::zero();
                h
            }
            KernelMode::Atomless(blocks) => telescope(&self.space, blocks, &shift_a0(&self.space, blocks, g)),
        }
    }

    pub fn inverse(&self, h: &[Rational]) -> Vec<Rational> {
        match &self.mode {
            KernelMode::Atom(a) => {
                let mut g = h.to_vec();
                g[*a] = Rational::zero();
                let mass = self.space.integral_over(h, &self.x);
                g[*a] = -mass / &self.space.weights[*a];
                g
            }
            KernelMode::Atomless(blocks) => unshift_a0(&self.space, blocks, &untelescope(&self.space, blocks, h)),
        }
    }

    pub fn distortion(&self) -> Rational {
        &self.forward_norm * &self.inverse_norm
    }

    pub fn norms_within_bounds(&self) -> bool {
        self.norms.iter().all(|(_, m, b)| m <= b)
    }

    /// Both composites are the identity on spanning sets of their domains.
    pub fn round_trips(&self) -> bool {
        let k = Domain::mean_zero(&self.space);
        let there = k.extreme_points(&self.space).iter().all(|g| {
            let h = self.forward(g);
            self.codomain.contains(&self.space, &h) && self.inverse(&h) == *g
        });
        let back = self.codomain.extreme_points(&self.space).iter().all(|h| {
            let g = self.inverse(h);
            k.contains(&self.space, &g) && self.forward(&g) == *h
        });
        there && back
    }
}

fn check_blocks(space: &FiniteMeasureSpace, blocks: &[Vec<usize>]) -> Result<()> {
    if blocks.len() < 2 {
        return Err(Error::Measure("need at least two blocks".into()));
    }
    let mut seen = vec![false; space.len()];
    for b in blocks {
        if b.is_empty() {
            return Err(Error::Measure("empty block".into()));
        }
        for &a in b {
            if a >= space.len() || seen[a] {
                return Err(Error::Measure(format!("atom {a} is missing or repeated")));
            }
            seen[a] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Measure("blocks do not cover the space".into()));
    }
    let total = space.total();
    for (n, b) in blocks[..blocks.len() - 1].iter().enumerate() {
        let target = &total / Rational::from_integer(num_bigint::BigInt::one() << (n + 1));
        if space.mass(b) != target {
            return Err(Error::Measure(format!("block {n} does not have mass {target}")));
        }
    }
    Ok(())
}

// K -> K_0: g on Y \ A_0, g - ⨍_{A_0} g on A_0
fn shift_a0(space: &FiniteMeasureSpace, blocks: &[Vec<usize>], g: &[Rational]) -> Vec<Rational> {
    let avg = space.average(g, &blocks[0]);
    let mut h = g.to_vec();
    for &a in &blocks[0] {
        h[a] -= &avg;
    }
    h
}

// K_0 -> K: h on Y \ A_0, h - ⨍_{Y \ A_0} h on A_0
fn unshift_a0(space: &FiniteMeasureSpace, blocks: &[Vec<usize>], h: &[Rational]) -> Vec<Rational> {
    let rest: Vec<usize> = blocks[1..].iter().flatten().copied().collect();
    let avg = space.average(h, &rest);
    let mut g = h.to_vec();
    for &a in &blocks[0] {
        g[a] -= &avg;
    }
    g
}

// on A_n: g - ⨍_{A_n} g + ⨍_{A_(n+1)} g, with no successor for the last block
fn telescope(space: &FiniteMeasureSpace, blocks: &[Vec<usize>], g: &[Rational]) -> Vec<Rational> {
    let avgs: Vec<Rational> = blocks.iter().map(|b| space.average(g, b)).collect();
    let mut h = g.to_vec();
    for (n, b) in blocks.iter().enumerate() {
        let shift = avgs.get(n + 1).cloned().unwrap_or_else(Rational::zero) - &avgs[n];
        for &a in b {
            h[a] += &shift;
        }
    }
    h
}

// on A_0: h - ⨍_{A_0} h; on A_n: h - ⨍_{A_n} h + ⨍_{A_(n-1)} h
fn untelescope(space: &FiniteMeasureSpace, blocks: &[Vec<usize>], h: &[Rational]) -> Vec<Rational> {
    let avgs: Vec<Rational> = blocks.iter().map(|b| space.average(h, b)).collect();
    let mut g = h.to_vec();
    for (n, b) in blocks.iter().enumerate() {
        let prev = if n == 0 { Rational::zero() } else { avgs[n - 1].clone() };
        let shift = prev - &avgs[n];
        for &a in b {
            g[a] += &shift;
        }
    }
    g
}

/// `min_c ‖g - c‖₁` and a minimizing constant (a weighted median of `g`).
pub fn quotient_norm(space: &FiniteMeasureSpace, g: &[Rational]) -> (Rational, Rational) {
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|&a, &b| g[a].cmp(&g[b]));
    let half = space.total() / Rational::from_integer(2.into());
    let mut acc = Rational::zero();
    let mut c = g[order[0]].clone();
    for &a in &order {
        acc += &space.weights[a];
        if acc >= half {
            c = g[a].clone();
            break;
        }
    }
    let shifted: Vec<Rational> = g.iter().map(|x| x - &c).collect();
    (space.norm(&shifted), c)
}

/// `min_c ‖g - c‖₁` over the candidates `c ∈ {g(a)}`.
pub fn quotient_norm_brute(space: &FiniteMeasureSpace, g: &[Rational]) -> Rational {
    g.iter()
        .map(|c| {
            let shifted: Vec<Rational> = g.iter().map(|x| x - c).collect();
            space.norm(&shifted)
        })
        .min()
        .unwrap()
}

#[derive(Clone, Debug)]
pub struct QuotientIso {
    pub kernel: KernelIso,
    /// `g + ℝ1 ↦ g - ⨍ g`, bound 2.
    pub forward_norm: Rational,
    /// `h ↦ h + ℝ1`, bound 1.
    pub inverse_norm: Rational,
    /// Composite `L¹/ℝ1 -> L¹(μ⌞X)`.
    pub end_to_end_forward: Rational,
    pub end_to_end_inverse: Rational,
}

impl QuotientIso {
    pub fn new(space: &FiniteMeasureSpace, mode: KernelMode) -> Result<Self> {
        let kernel = KernelIso::new(space, mode)?;
        let full = Domain::full(space);
        let k = Domain::mean_zero(space);
        // the unit ball of L¹/ℝ1 is the image of the unit ball of L¹
        let forward_norm = operator_norm(space, &full, |g| center(space, g), |v| space.norm(v));
        let inverse_norm = operator_norm(space, &k, |h| h.to_vec(), |v| quotient_norm(space, v).0);
        let end_to_end_forward = operator_norm(space, &full, |g| kernel.forward(&center(space, g)), |v| space.norm(v));
        let end_to_end_inverse =
            operator_norm(space, &kernel.codomain, |h| kernel.inverse(h), |v| quotient_norm(space, v).0);
        Ok(QuotientIso { kernel, forward_norm, inverse_norm, end_to_end_forward, end_to_end_inverse })
    }

    pub fn forward(&self, g: &[Rational]) -> Vec<Rational> {
        center(&self.kernel.space, g)
    }

    pub fn distortion(&self) -> Rational {
        &self.end_to_end_forward * &self.end_to_end_inverse
    }

    pub fn norms_within_bounds(&self) -> bool {
        self.forward_norm <= Rational::from_integer(2.into()) && self.inverse_norm <= Rational::one()
    }
}

fn center(space: &FiniteMeasureSpace, g: &[Rational]) -> Vec<Rational> {
    let avg = space.integral(g) / space.total();
    g.iter().map(|x| x - &avg).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        crate::numeric::parse_rational(s).unwrap()
    }

    fn space(ws: &[&str]) -> FiniteMeasureSpace {
        FiniteMeasureSpace::from_weights(ws.iter().map(|w| q(w)).collect()).unwrap()
    }

    #[test]
    fn one_atom_is_trivial() {
        let s = space(&["1"]);
        let k = KernelIso::new(&s, KernelMode::Atom(0)).unwrap();
        assert!(k.x.is_empty());
        assert_eq!(k.forward_norm, Rational::zero());
        assert!(k.round_trips());
    }

    #[test]
    fn two_equal_atoms() {
        let s = space(&["1/2", "1/2"]);
        let k = KernelIso::new(&s, KernelMode::Atom(0)).unwrap();
        assert_eq!(k.x, vec![1]);
        assert!(k.norms_within_bounds());
        assert!(k.round_trips());
    }

    #[test]
    fn dyadic_blocks() {
        let s = space(&["1/2", "1/4", "1/8", "1/8"]);
        let blocks = s.group_blocks(3).unwrap();
        assert_eq!(blocks, vec![vec![0], vec![1], vec![2, 3]]);
        let k = KernelIso::new(&s, KernelMode::Atomless(blocks)).unwrap();
        assert!(k.norms_within_bounds(), "{:?}", k.norms);
        assert!(k.round_trips());
        assert!(k.distortion() <= Rational::from_integer(64.into()));
        assert!(space(&["1/3", "2/3"]).group_blocks(2).is_err());
    }

    #[test]
    fn quotient_norm_examples() {
        let s = space(&["1/3", "1/3", "1/3"]);
        let (n, c) = quotient_norm(&s, &[q("0"), q("1"), q("2")]);
        assert_eq!((n, c), (q("2/3"), q("1")));
        assert_eq!(quotient_norm(&s, &[q("5"), q("5"), q("5")]).0, Rational::zero());
        let iso = QuotientIso::new(&s, KernelMode::Atom(0)).unwrap();
        assert!(iso.norms_within_bounds());
        assert!(iso.distortion() <= Rational::from_integer(128.into()));
    }

    #[test]
    fn random_spaces_are_groupable() {
        for seed in 0..5 {
            let s = FiniteMeasureSpace::random_dyadic(seed, 10, 4).unwrap();
            assert_eq!(s.total(), Rational::one());
            assert_eq!(s.group_blocks(4).unwrap().len(), 4);
        }
    }
}
