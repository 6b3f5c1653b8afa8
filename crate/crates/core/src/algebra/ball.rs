use alloc::vec::Vec;

use hashbrown::HashTable;

use super::generators::GeneratorSet;
use super::matrix::RationalMatrix;
use crate::error::{Error, Result};

/// Default cap on the number of elements a ball enumeration may produce.
pub const DEFAULT_BALL_CAP: usize = 2_000_000;

#[derive(Clone, Debug)]
struct Node {
    length: u32,
    parent: u32,
    letter: u32,
}

/// The word-metric ball `B_Γ(r)`: every group element of length at most `r`,
/// deduplicated exactly, in breadth-first order.
///
/// Element 0 is the identity. Elements are grouped by word length, and within
/// a layer appear in the order the frontier discovered them, so the witness
/// word of every element is determined by the generator order.
#[derive(Clone, Debug)]
pub struct GroupBall {
    radius: usize,
    dim: usize,
    matrices: Vec<RationalMatrix>,
    floats: Vec<f64>,
    nodes: Vec<Node>,
    hashes: Vec<u64>,
    table: HashTable<u32>,
    layer_ends: Vec<usize>,
    shortest_relator: Option<Vec<usize>>,
}

impl GroupBall {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrix(&self, i: usize) -> &RationalMatrix {
        &self.matrices[i]
    }

    pub fn matrix_f64(&self, i: usize) -> &[f64] {
        let s = self.dim * self.dim;
        &self.floats[i * s..(i + 1) * s]
    }

    /// Minimal word length of element `i`.
    pub fn length(&self, i: usize) -> usize {
        self.nodes[i].length as usize
    }

    /// Witness word (generator indices) of minimal length for element `i`.
    pub fn word(&self, i: usize) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.length(i));
        let mut cur = i;
        while cur != 0 {
            w.push(self.nodes[cur].letter as usize);
            cur = self.nodes[cur].parent as usize;
        }
        w.reverse();
        w
    }

    /// Number of elements with word length at most `r` (they form a prefix).
    pub fn count_within(&self, r: usize) -> usize {
        self.layer_ends[r.min(self.radius)]
    }

    /// `|B_Γ(k)|` for `k = 0..=radius`.
    pub fn ball_sizes(&self) -> Vec<usize> {
        self.layer_ends.clone()
    }

    /// `|S_Γ(k)|` (elements of length exactly `k`) for `k = 0..=radius`.
    pub fn sphere_sizes(&self) -> Vec<usize> {
        let mut prev = 0;
        self.layer_ends
            .iter()
            .map(|&e| {
                let s = e - prev;
                prev = e;
                s
            })
            .collect()
    }

    pub fn index_of(&self, m: &RationalMatrix) -> Option<usize> {
        let h = m.fingerprint();
        self.table
            .find(h, |&i| self.matrices[i as usize] == *m)
            .map(|&i| i as usize)
    }

    /// A shortest nontrivial freely reduced word evaluating to the identity,
    /// among those detectable inside the ball (every relator of length at most
    /// `2·radius` is found).
    pub fn shortest_relator(&self) -> Option<&[usize]> {
        self.shortest_relator.as_deref()
    }

    fn truncate(&mut self, n: usize) {
        let s = self.dim * self.dim;
        self.matrices.truncate(n);
        self.floats.truncate(n * s);
        self.nodes.truncate(n);
        self.hashes.truncate(n);
        self.table.retain(|&mut i| (i as usize) < n);
    }

    fn push(&mut self, m: RationalMatrix, node: Node) {
        let h = m.fingerprint();
        let idx = self.matrices.len() as u32;
        self.floats.extend(m.to_f64());
        self.matrices.push(m);
        self.nodes.push(node);
        self.hashes.push(h);
        let hashes = &self.hashes;
        self.table.insert_unique(h, idx, |&i| hashes[i as usize]);
    }
}

/// Breadth-first enumeration of `B_Γ(r)` with exact deduplication.
///
/// Fails with [`Error::Resource`] once more than `cap` elements are found.
pub fn group_ball(gens: &GeneratorSet, r: usize, cap: usize) -> Result<GroupBall> {
    enumerate(gens, r, cap, false)
}

/// The largest ball `B_Γ(k)` with `k <= r` and at most `cap` elements.
pub fn group_ball_within(gens: &GeneratorSet, r: usize, cap: usize) -> GroupBall {
    enumerate(gens, r, cap, true).expect("truncating enumeration cannot fail")
}

fn enumerate(gens: &GeneratorSet, r: usize, cap: usize, truncate: bool) -> Result<GroupBall> {
    let dim = gens.dim();
    let mut ball = GroupBall {
        radius: 0,
        dim,
        matrices: Vec::new(),
        floats: Vec::new(),
        nodes: Vec::new(),
        hashes: Vec::new(),
        table: HashTable::new(),
        layer_ends: alloc::vec![1],
        shortest_relator: None,
    };
    ball.push(
        RationalMatrix::identity(dim),
        Node {
            length: 0,
            parent: 0,
            letter: u32::MAX,
        },
    );
    let mut layer_start = 0;
    for k in 0..r {
        let layer_end = ball.len();
        for u in layer_start..layer_end {
            for s in 0..gens.len() {
                let v = &ball.matrices[u] * gens.matrix(s);
                match ball.index_of(&v) {
                    None => {
                        ball.push(
                            v,
                            Node {
                                length: k as u32 + 1,
                                parent: u as u32,
                                letter: s as u32,
                            },
                        );
                        if ball.len() > cap {
                            if truncate {
                                ball.truncate(layer_end);
                                return Ok(ball);
                            }
                            return Err(Error::Resource {
                                what: "group ball",
                                partial: ball.len(),
                                cap,
                                upper_bound: None,
                            });
                        }
                    }
                    Some(v) => note_cycle(&mut ball, gens, u, s, v),
                }
            }
        }
        layer_start = layer_end;
        ball.layer_ends.push(ball.len());
        ball.radius = k + 1;
    }
    Ok(ball)
}

fn note_cycle(ball: &mut GroupBall, gens: &GeneratorSet, u: usize, s: usize, v: usize) {
    let nu = &ball.nodes[u];
    let nv = &ball.nodes[v];
    let tree_forward = v != 0 && nv.parent as usize == u && nv.letter as usize == s;
    let tree_back = u != 0 && nu.parent as usize == v && nu.letter as usize == gens.inverse(s);
    if tree_forward || tree_back {
        return;
    }
    let bound = nu.length as usize + nv.length as usize + 1;
    if ball.shortest_relator.as_ref().is_some_and(|w| w.len() <= bound) {
        return;
    }
    let mut w = ball.word(u);
    w.push(s);
    w.extend(gens.inverse_word(&ball.word(v)));
    let w = free_reduce(gens, &w);
    if w.is_empty() {
        return;
    }
    if ball.shortest_relator.as_ref().is_none_or(|old| w.len() < old.len()) {
        ball.shortest_relator = Some(w);
    }
}

/// Cancels adjacent `s s⁻¹` pairs until none remain.
pub fn free_reduce(gens: &GeneratorSet, word: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(word.len());
    for &s in word {
        if out.last().is_some_and(|&l| gens.inverse(l) == s) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::generators::{library, word_eval_indices};
    use super::*;

    #[test]
    fn truncated_ball_is_complete() {
        let b = group_ball_within(&library::lps_s2(), 10, 100);
        assert_eq!(b.radius(), 3);
        assert_eq!(b.len(), 2 * 27 - 1);
        assert_eq!(b.ball_sizes(), alloc::vec![1, 5, 17, 53]);
        for i in 0..b.len() {
            assert_eq!(b.index_of(b.matrix(i)), Some(i));
        }
    }

    #[test]
    fn radius_zero_is_identity() {
        let b = group_ball(&library::lps_s2(), 0, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b.matrix(0).is_identity());
        assert_eq!(b.length(0), 0);
    }

    #[test]
    fn free_group_sizes() {
        let b = group_ball(&library::lps_s2(), 6, DEFAULT_BALL_CAP).unwrap();
        let expect: Vec<usize> = (0..=6u32).map(|r| 2 * 3usize.pow(r) - 1).collect();
        assert_eq!(b.ball_sizes(), expect);
        assert!(b.shortest_relator().is_none());
    }

    #[test]
    fn cyclic_group_collapses() {
        let g = library::cyclic_permutation(5).unwrap();
        let b = group_ball(&g, 10, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(b.len(), 5);
        assert_eq!(b.sphere_sizes()[..3], [1, 2, 2]);
        let rel = b.shortest_relator().unwrap();
        assert_eq!(rel.len(), 5);
        assert!(word_eval_indices(rel, &g).is_identity());

        let q = library::quarter_turn_s1();
        let b = group_ball(&q, 5, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.shortest_relator().unwrap().len(), 4);
    }

    #[test]
    fn witnesses_evaluate_to_elements() {
        let g = library::lps_s2();
        let b = group_ball(&g, 4, DEFAULT_BALL_CAP).unwrap();
        for i in 0..b.len() {
            let w = b.word(i);
            assert_eq!(w.len(), b.length(i));
            assert_eq!(&word_eval_indices(&w, &g), b.matrix(i));
            assert_eq!(b.index_of(b.matrix(i)), Some(i));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = group_ball(&library::lps_s2(), 6, 100).unwrap_err();
        assert!(matches!(err, Error::Resource { partial: 101, cap: 100, .. }));
    }

    #[test]
    fn trivial_group_ball() {
        let b = group_ball(&GeneratorSet::trivial(3), 5, 10).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.ball_sizes(), [1, 1, 1, 1, 1, 1]);
    }
}
