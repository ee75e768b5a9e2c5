//! Independent oracles and random inputs shared by the integration tests.
//!
//! Nothing here calls the chain graph or the filtration: diameters are
//! recomputed from the raw halving bits and distances come from direct
//! enumeration of dyadic chains.

#![allow(dead_code, clippy::needless_range_loop)]

use core::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use qctree_core::martingale::cond_expect;
use qctree_core::{DiameterTree, Filtration, GeneratorKind, Rational, SampledFunction, StepFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn q(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Diameters of every edge with generation `<= depth`, in heap order, as
/// integers scaled by `2^depth`. Below the explicit bits every step halves.
pub fn scaled_deltas(bits: &[bool], depth: u32) -> Vec<u64> {
    let total = (1usize << (depth + 1)) - 1;
    let mut out = vec![0u64; total];
    out[0] = 1 << depth;
    for h in 1..total {
        let p = (h - 1) / 2;
        let halves = bits.get(p).copied().unwrap_or(true);
        out[h] = if halves { out[p] / 2 } else { out[p] };
    }
    out
}

fn heap(gen: u32, j: u64) -> usize {
    (1usize << gen) - 1 + j as usize
}

/// All-pairs chain distances on `V_K` by enumerating every set of dyadic
/// edges of generation `<= depth`. A set whose union is connected orders
/// into a chain between any two of its points, so the distance is the
/// cheapest such set whose union covers both. Returns `2^depth · d`.
pub fn subset_oracle(bits: &[bool], k: u32, depth: u32) -> Vec<Vec<u64>> {
    let deltas = scaled_deltas(bits, depth);
    let edges = deltas.len();
    assert!(edges <= 20, "subset oracle is exponential in the edge count");
    let cells = 1usize << depth;
    let masks: Vec<u32> = (0..edges)
        .map(|h| {
            let gen = usize::BITS - 1 - (h + 1).leading_zeros();
            let j = h + 1 - (1 << gen);
            let width = cells >> gen;
            (((1u64 << width) - 1) << (j * width)) as u32
        })
        .collect();
    let subsets = 1usize << edges;
    let mut cost = vec![0u64; subsets];
    let mut mask = vec![0u32; subsets];
    // cheapest connected union with cell range [lo, hi]
    let mut best = vec![vec![u64::MAX; cells]; cells];
    for s in 1..subsets {
        let low = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        cost[s] = cost[rest] + deltas[low];
        mask[s] = mask[rest] | masks[low];
        let m = mask[s];
        let lo = m.trailing_zeros() as usize;
        let hi = 31 - m.leading_zeros() as usize;
        if (m >> lo).count_ones() as usize == hi - lo + 1 && cost[s] < best[lo][hi] {
            best[lo][hi] = cost[s];
        }
    }
    let points = (1usize << k) + 1;
    let step = 1usize << (depth - k);
    let mut d = vec![vec![0u64; points]; points];
    for x in 0..points {
        for y in x + 1..points {
            let (px, py) = (x * step, y * step);
            let mut m = u64::MAX;
            for (lo, row) in best.iter().enumerate() {
                for (hi, &c) in row.iter().enumerate().skip(lo) {
                    // cells lo..=hi cover [lo, hi + 1] in grid units
                    if lo <= px && py <= hi + 1 {
                        m = m.min(c);
                    }
                }
            }
            d[x][y] = m;
            d[y][x] = m;
        }
    }
    d
}

/// Branch-and-bound search over normalized chains: adjacent edges left to
/// right, no siblings, generations strictly down then strictly up with at
/// most one flat step at the bottom. Returns `2^depth · d(x, y)` for grid
/// indices `x < y` of `V_K`.
pub fn normalized_chain_oracle(bits: &[bool], k: u32, depth: u32, x: usize, y: usize) -> u64 {
    assert!(x < y);
    let deltas = scaled_deltas(bits, depth);
    let scale = 1u64 << depth;
    let (px, py) = ((x as u64) << (depth - k), (y as u64) << (depth - k));
    // upper bound: the smallest single edge containing both
    let mut best = deltas[0];
    for gen in 0..=depth {
        let w = scale >> gen;
        let j = px / w;
        if py <= (j + 1) * w {
            best = best.min(deltas[heap(gen, j)]);
        }
    }
    struct Search<'a> {
        deltas: &'a [u64],
        depth: u32,
        scale: u64,
        target: u64,
        best: u64,
    }
    // phase 0: generations decreasing; 1: after the flat step; 2: increasing
    fn extend(s: &mut Search<'_>, gen: u32, j: u64, phase: u8, cost: u64) {
        if cost >= s.best {
            return;
        }
        let w = s.scale >> gen;
        let right = (j + 1) * w;
        if right >= s.target {
            s.best = cost;
            return;
        }
        for next in 0..=s.depth {
            let nw = s.scale >> next;
            if !right.is_multiple_of(nw) {
                continue;
            }
            let nj = right / nw;
            if next == gen && j.is_multiple_of(2) && nj == j + 1 {
                continue; // siblings
            }
            let phase = match (next.cmp(&gen), phase) {
                (Ordering::Less, 0) => 0,
                (Ordering::Equal, 0) => 1,
                (Ordering::Greater, _) => 2,
                _ => continue,
            };
            let c = cost + s.deltas[heap(next, nj)];
            extend(s, next, nj, phase, c);
        }
    }
    let mut s = Search { deltas: &deltas, depth, scale, target: py, best };
    for gen in 0..=depth {
        let w = scale >> gen;
        // first edge contains x but not as its right endpoint
        let j = px / w;
        if j < (1 << gen) {
            extend(&mut s, gen, j, 0, deltas[heap(gen, j)]);
        }
    }
    s.best
}

pub fn random_tree(seed: u64, k: u32) -> DiameterTree {
    let mut r = rng(seed ^ 0x9e37_79b9);
    let p = r.gen_range(0.25..0.9);
    DiameterTree::generate(GeneratorKind::Random { seed, p_halve: p }, k).unwrap()
}

/// Mixed corpus of arcs at resolutions up to `k_max`.
pub fn arc_corpus(count: usize, k_max: u32, seed: u64) -> Vec<DiameterTree> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| match i % 5 {
            0 => DiameterTree::generate(GeneratorKind::Snowflake { period: r.gen_range(2..4) }, k_max).unwrap(),
            _ => random_tree(r.gen(), r.gen_range(2..=k_max)),
        })
        .collect()
}

/// A function on `V_K` with `f(0) = 0`: small random rationals, optionally
/// smoothed by a running sum so both rough and tame functions appear.
pub fn random_function(r: &mut ChaCha8Rng, k: u32) -> SampledFunction<Rational> {
    let n = (1usize << k) + 1;
    let denom = [1, 2, 3, 4, 8][r.gen_range(0..5)];
    let cumulative = r.gen_bool(0.5);
    let mut values = vec![Rational::zero(); n];
    let mut acc = Rational::zero();
    for v in values.iter_mut().skip(1) {
        let step = q(r.gen_range(-6..=6), denom);
        acc = if cumulative { acc + step } else { step };
        *v = acc.clone();
    }
    SampledFunction::new(k, values).unwrap()
}

/// A valid martingale difference sequence: `g_n = h_n - E^(n-1)(h_n)` with
/// `h_n` constant on the atoms of `At_n`.
pub fn random_sequence(r: &mut ChaCha8Rng, filt: &Filtration) -> Vec<StepFunction<Rational>> {
    let k = filt.resolution();
    let cells = filt.cell_count();
    (0..=filt.n_max())
        .map(|n| {
            let mut h = vec![Rational::zero(); cells];
            for v in h.iter_mut() {
                *v = q(r.gen_range(-5..=5), [1, 2, 4][r.gen_range(0..3)]);
            }
            for a in filt.atoms(n) {
                let (l, r_) = a.grid_span(k);
                let first = h[l].clone();
                h[l..r_].fill(first);
            }
            let h = StepFunction::new(k, h).unwrap();
            h.sub(&cond_expect(filt, &h, n).unwrap())
        })
        .collect()
}

pub fn abs(x: &Rational) -> Rational {
    if *x < Rational::zero() {
        -x.clone()
    } else {
        x.clone()
    }
}
