//! Lifting a δ-chain to a chain that carries a minimal decomposition path.

use alloc::vec::Vec;

use num_traits::Zero;

use super::decomposition::{decomposition_path, is_minimal, DecompositionPath, TreeLike};
use super::{MetricTree, PieceDecomposition};
use crate::error::{Error, Result};
use crate::numeric::{format_rational, Rational};

#[derive(Clone, Debug)]
pub struct ChainLift {
    /// The chain `(w_j)`.
    pub lifted: Vec<usize>,
    /// Positions `j_k` of the decomposition path inside `lifted`.
    pub indices: Vec<usize>,
    /// `(w_(j_k))` with its pieces.
    pub path: DecompositionPath,
    /// `max_j dist(w_j, {z_i}) / δ`.
    pub offset_ratio: Rational,
    /// `max_j d(w_(j-1), w_j) / δ`.
    pub hop_ratio: Rational,
    pub minimal: bool,
    /// Every stretch `w_(j_(k-1)) ..= w_(j_k)` lies in piece `n_k`.
    pub membership: bool,
    pub pruned_a: usize,
    pub pruned_b: usize,
}

/// Follow the chain through pieces, bridge each change of piece with the
/// decomposition path of the tree arc, then prune the resulting path until
/// it is minimal.
pub fn chain_lift(
    tree: &MetricTree,
    decomp: &PieceDecomposition,
    tl: &TreeLike,
    chain: &[usize],
    delta: &Rational,
) -> Result<ChainLift> {
    if chain.is_empty() {
        return Err(Error::Domain("empty chain".into()));
    }
    if *delta <= Rational::zero() {
        return Err(Error::Domain("δ must be positive".into()));
    }
    for (h, w) in chain.windows(2).enumerate() {
        let d = tree.d(w[0], w[1]);
        if d > delta {
            return Err(Error::NotAChain { delta: format_rational(delta), hop: h + 1, length: format_rational(d) });
        }
    }
    let n = chain.len();
    // greedy segments: each starts at the first point outside the previous piece
    let mut segments: Vec<(usize, usize, usize)> = Vec::new();
    let mut start = 0;
    while start < n {
        let mut best = None;
        for piece in decomp.pieces_of(chain[start]) {
            let mut end = start;
            while end + 1 < n && decomp.contains(piece, chain[end + 1]) {
                end += 1;
            }
            if best.is_none_or(|(_, e)| end > e) {
                best = Some((piece, end));
            }
        }
        let (piece, end) = best.ok_or_else(|| Error::Decomposition("chain leaves the decomposed set".into()))?;
        segments.push((start, end, piece));
        start = end + 1;
    }

    let mut w: Vec<usize> = Vec::new();
    let mut points: Vec<usize> = Vec::new();
    let mut pos: Vec<usize> = Vec::new();
    let mut pieces: Vec<usize> = Vec::new();
    let push = |w: &mut Vec<usize>, v: usize| -> usize {
        if w.last() != Some(&v) {
            w.push(v);
        }
        w.len() - 1
    };
    points.push(chain[0]);
    pos.push(push(&mut w, chain[0]));
    for (l, &(s, e, piece)) in segments.iter().enumerate() {
        for &z in &chain[s..=e] {
            push(&mut w, z);
        }
        let Some(&(next, _, next_piece)) = segments.get(l + 1) else {
            let at = push(&mut w, chain[n - 1]);
            join(&mut points, &mut pos, &mut pieces, chain[n - 1], at, piece);
            break;
        };
        let bridge = decomposition_path(tree, tl, chain[next - 1], chain[next]);
        let at = push(&mut w, bridge.points[0]);
        join(&mut points, &mut pos, &mut pieces, bridge.points[0], at, piece);
        for (k, &p) in bridge.pieces.iter().enumerate() {
            let z = bridge.points[k + 1];
            let at = push(&mut w, z);
            join(&mut points, &mut pos, &mut pieces, z, at, p);
        }
        let _ = next_piece;
    }

    let mut pruned_a = 0;
    let mut pruned_b = 0;
    loop {
        if let Some(h) = (0..pieces.len()).find(|&h| points[h] == points[h + 1]) {
            let (from, to) = (pos[h] + 1, pos[h + 1] + 1);
            remove_w(&mut w, &mut pos, from, to);
            points.remove(h + 1);
            pos.remove(h + 1);
            pieces.remove(h);
            pruned_a += 1;
            continue;
        }
        let hit = (0..pieces.len())
            .find_map(|h| (h + 2..points.len()).find(|&j| decomp.contains(pieces[h], points[j])).map(|j| (h, j)));
        let Some((h, j)) = hit else { break };
        if points[j] == points[h + 1] {
            let (from, to) = (pos[h + 1] + 1, pos[j] + 1);
            remove_w(&mut w, &mut pos, from, to);
            points.drain(h + 2..=j);
            pos.drain(h + 2..=j);
            pieces.drain(h + 1..j);
            pruned_a += 1;
        } else {
            if j != h + 2 || decomp.piece(pieces[h]) != decomp.piece(pieces[h + 1]) {
                return Err(Error::Decomposition("pruning met a non-trivial loop".into()));
            }
            points.remove(h + 1);
            pos.remove(h + 1);
            pieces.remove(h + 1);
            pruned_b += 1;
        }
    }

    let path = DecompositionPath { points, pieces };
    let minimal = is_minimal(decomp, &path);
    let membership =
        (0..path.pieces.len()).all(|k| w[pos[k]..=pos[k + 1]].iter().all(|&v| decomp.contains(path.pieces[k], v)));
    let mut offset = Rational::zero();
    for &v in &w {
        let near = chain.iter().map(|&z| tree.d(v, z)).min().unwrap();
        if *near > offset {
            offset = near.clone();
        }
    }
    let mut hop = Rational::zero();
    for s in w.windows(2) {
        let d = tree.d(s[0], s[1]);
        if *d > hop {
            hop = d.clone();
        }
    }
    Ok(ChainLift {
        lifted: w,
        indices: pos,
        path,
        offset_ratio: offset / delta,
        hop_ratio: hop / delta,
        minimal,
        membership,
        pruned_a,
        pruned_b,
    })
}

// Append a path point reached inside `piece`; consecutive hops in one piece merge.
fn join(points: &mut Vec<usize>, pos: &mut Vec<usize>, pieces: &mut Vec<usize>, z: usize, at: usize, piece: usize) {
    if *points.last().unwrap() == z && *pos.last().unwrap() == at {
        return;
    }
    if pieces.last() == Some(&piece) {
        *points.last_mut().unwrap() = z;
        *pos.last_mut().unwrap() = at;
    } else {
        points.push(z);
        pos.push(at);
        pieces.push(piece);
    }
}

fn remove_w(w: &mut Vec<usize>, pos: &mut [usize], from: usize, to: usize) {
    w.drain(from..to);
    let k = to - from;
    for p in pos.iter_mut() {
        if *p >= to {
            *p -= k;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{validate_treelike, GluePlan};
    use super::*;

    #[test]
    fn chain_in_one_piece() {
        let t = MetricTree::build(&GluePlan::chain(2, 2).unwrap()).unwrap();
        let d = t.arc_decomposition();
        let tl = validate_treelike(&t, &d).unwrap();
        let chain: Vec<usize> = t.arc_vertices(0).to_vec();
        let delta = Rational::new(1.into(), 4.into());
        let l = chain_lift(&t, &d, &tl, &chain, &delta).unwrap();
        assert_eq!(l.lifted, chain);
        assert_eq!(l.path.points, vec![chain[0], chain[4]]);
        assert!(l.minimal && l.membership);
    }

    #[test]
    fn star_through_center() {
        let t = MetricTree::build(&GluePlan::star(3, 2).unwrap()).unwrap();
        let d = t.arc_decomposition();
        let tl = validate_treelike(&t, &d).unwrap();
        let mut chain: Vec<usize> = t.arc_vertices(1).iter().rev().copied().collect();
        chain.extend(&t.arc_vertices(2)[1..]);
        let delta = Rational::new(1.into(), 4.into());
        let l = chain_lift(&t, &d, &tl, &chain, &delta).unwrap();
        assert_eq!(l.path.points, vec![t.vertex(1, 4), t.vertex(0, 0), t.vertex(2, 4)]);
        assert_eq!((l.pruned_a, l.pruned_b), (0, 0));
        assert!(l.minimal && l.membership);
    }

    #[test]
    fn revisiting_chain_is_pruned() {
        let t = MetricTree::build(&GluePlan::chain(3, 2).unwrap()).unwrap();
        let d = t.arc_decomposition();
        let tl = validate_treelike(&t, &d).unwrap();
        let (a0, a1, a2) = (t.arc_vertices(0), t.arc_vertices(1), t.arc_vertices(2));
        let mut chain: Vec<usize> = a0.to_vec();
        chain.extend([a1[1], a1[2], a1[1], a1[0], a0[3], a0[4]]);
        chain.extend(&a1[1..]);
        chain.extend(&a2[1..]);
        let delta = Rational::new(1.into(), 4.into());
        let l = chain_lift(&t, &d, &tl, &chain, &delta).unwrap();
        assert!(l.pruned_a + l.pruned_b > 0);
        assert!(l.minimal && l.membership);
        assert_eq!(l.path.hops(), 3);
        assert!(l.hop_ratio <= Rational::from_integer(1.into()));
    }

    #[test]
    fn rejects_long_hops() {
        let t = MetricTree::build(&GluePlan::chain(1, 2).unwrap()).unwrap();
        let d = t.arc_decomposition();
        let tl = validate_treelike(&t, &d).unwrap();
        let err = chain_lift(&t, &d, &tl, &[0, 2], &Rational::new(1.into(), 4.into())).unwrap_err();
        assert!(matches!(err, Error::NotAChain { hop: 1, .. }));
    }
}
