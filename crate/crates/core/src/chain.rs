//! Exact reachability probabilities in finite Markov chains.
//!
//! States that cannot reach the target get probability 0, target states get 1,
//! and the remaining unknowns are solved one strongly connected component at a
//! time in reverse topological order, by Gaussian elimination over rationals.

use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::game::{Game, Owner, StateId};
use crate::rational::Rational;

/// A finite Markov chain as sparse rows of `(successor, probability)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub rows: Vec<Vec<(usize, Rational)>>,
}

impl Chain {
    /// The chain induced by fixing a successor for every player state.
    /// `choice(s)` is consulted only for Max and Min states.
    pub fn induced(game: &Game, mut choice: impl FnMut(StateId) -> StateId) -> Chain {
        let rows = game
            .states()
            .map(|s| match game.owner(s) {
                Owner::Random => game.distribution(s).map(|(t, p)| (t.index(), p.clone())).collect(),
                Owner::Max | Owner::Min => vec![(choice(s).index(), Rational::one())],
            })
            .collect();
        Chain { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// States with a path into `target` (including `target` itself).
    pub fn can_reach(&self, target: &[bool]) -> Vec<bool> {
        let n = self.len();
        let mut pred = vec![Vec::new(); n];
        for (s, row) in self.rows.iter().enumerate() {
            for (t, _) in row {
                pred[*t].push(s);
            }
        }
        let mut seen = target.to_vec();
        let mut stack: Vec<usize> = (0..n).filter(|s| target[*s]).collect();
        while let Some(t) = stack.pop() {
            for &s in &pred[t] {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        seen
    }

    /// Probability of eventually visiting `target` from every state.
    pub fn reach_probabilities(&self, target: &[bool]) -> Vec<Rational> {
        let n = self.len();
        let live = self.can_reach(target);
        let mut value = vec![Rational::zero(); n];
        let mut solved = vec![false; n];
        for s in 0..n {
            if target[s] {
                value[s] = Rational::one();
                solved[s] = true;
            } else if !live[s] {
                solved[s] = true;
            }
        }

        let mut graph = DiGraph::<usize, ()>::new();
        let mut node = vec![None; n];
        for s in (0..n).filter(|s| !solved[*s]) {
            node[s] = Some(graph.add_node(s));
        }
        for s in (0..n).filter(|s| !solved[*s]) {
            for (t, _) in &self.rows[s] {
                if let (Some(a), Some(b)) = (node[s], node[*t]) {
                    graph.add_edge(a, b, ());
                }
            }
        }

        // tarjan_scc yields components in reverse topological order, so every
        // component only depends on components solved before it.
        for comp in tarjan_scc(&graph) {
            let members: Vec<usize> = comp.iter().map(|ix: &NodeIndex| graph[*ix]).collect();
            self.solve_component(&members, &mut value);
            for s in members {
                solved[s] = true;
            }
        }
        value
    }

    fn solve_component(&self, members: &[usize], value: &mut [Rational]) {
        let k = members.len();
        let mut local = vec![usize::MAX; self.len()];
        for (i, s) in members.iter().enumerate() {
            local[*s] = i;
        }
        // Row i encodes x_i - sum_{j in comp} p_ij x_j = sum_{t outside} p_it v_t.
        let mut a = vec![vec![Rational::zero(); k + 1]; k];
        for (i, s) in members.iter().enumerate() {
            a[i][i] = Rational::one();
            for (t, p) in &self.rows[*s] {
                match local[*t] {
                    usize::MAX => a[i][k] += p * &value[*t],
                    j => a[i][j] -= p,
                }
            }
        }
        for (i, x) in gauss_jordan(a).into_iter().enumerate() {
            value[members[i]] = x;
        }
    }
}

/// Solves a nonsingular augmented system `[A | b]` in place.
fn gauss_jordan(mut a: Vec<Vec<Rational>>) -> Vec<Rational> {
    let k = a.len();
    for col in 0..k {
        let pivot = (col..k)
            .find(|r| !a[*r][col].is_zero())
            .expect("singular chain system");
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in a[col][col..].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
    }
    a.into_iter().map(|row| row[k].clone()).collect()
}
