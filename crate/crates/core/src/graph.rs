//! The edge graph of a shift at a given depth and the cycle optimizations
//! run on it: maximum cycle mean (Karp), extreme cycle ratios, longest paths.
//!
//! Vertices are admissible `(D-1)`-words and edges admissible `D`-words, so
//! a depth-`D` potential is an edge weight and periodic orbits are cycles.

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::sft::{Sft, Word};

#[derive(Debug, Clone)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// The `D`-word spelled by the edge.
    pub word: Word,
}

#[derive(Debug, Clone)]
pub struct EdgeGraph {
    sft: Sft,
    depth: usize,
    vertices: Vec<Word>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
}

impl EdgeGraph {
    /// Graph of `(depth-1)`-words; `depth >= 2`.
    pub fn new(sft: &Sft, depth: usize) -> Result<Self> {
        if depth < 2 {
            return Err(Error::validation("edge graph needs depth >= 2"));
        }
        let recoding = sft.higher_block_recode(depth)?;
        let vertices = recoding.blocks().to_vec();
        let mut edges = Vec::new();
        let mut out = vec![Vec::new(); vertices.len()];
        for (u, block) in vertices.iter().enumerate() {
            for c in sft.successors(block[depth - 2]) {
                let mut word = block.clone();
                word.push(c);
                let v = recoding
                    .block_index(&word[1..])
                    .expect("suffix of an admissible word is admissible");
                out[u].push(edges.len());
                edges.push(Edge { from: u, to: v, word });
            }
        }
        Ok(EdgeGraph {
            sft: sft.clone(),
            depth,
            vertices,
            edges,
            out,
        })
    }

    /// Graph deep enough to carry every given potential as an edge weight.
    pub fn for_potentials(potentials: &[&Potential]) -> Result<Self> {
        let first = potentials
            .first()
            .ok_or_else(|| Error::validation("no potentials given"))?;
        for p in potentials {
            first.require_same_shift(p)?;
        }
        let depth = potentials.iter().map(|p| p.depth()).max().unwrap().max(2);
        EdgeGraph::new(first.sft(), depth)
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn vertices(&self) -> &[Word] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn out_edges(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub fn vertex_index(&self, block: &[usize]) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.symbols().cmp(block)).ok()
    }

    /// Edge weights of `f`; its depth must not exceed the graph's.
    pub fn weights(&self, f: &Potential) -> Result<Vec<f64>> {
        if f.sft() != &self.sft {
            return Err(Error::validation("potential is defined over a different shift"));
        }
        if f.depth() > self.depth {
            return Err(Error::validation(format!(
                "potential depth {} exceeds graph depth {}",
                f.depth(),
                self.depth
            )));
        }
        Ok(self.edges.iter().map(|e| f.value(&e.word[..f.depth()])).collect())
    }

    /// Vertex path of an admissible word of length at least `D - 1`.
    pub fn vertex_path(&self, w: &[usize]) -> Result<Vec<usize>> {
        let k = self.depth - 1;
        if w.len() < k {
            return Err(Error::InsufficientContext {
                needed: k,
                got: w.len(),
            });
        }
        self.sft.require_admissible(w)?;
        Ok(w.windows(k).map(|b| self.vertex_index(b).unwrap()).collect())
    }

    /// Karp's algorithm: the largest mean weight of a cycle, together with
    /// the vertex-walk table used to recover a cycle attaining it.
    pub fn max_cycle_mean(&self, w: &[f64]) -> f64 {
        self.karp(w).0
    }

    fn karp(&self, w: &[f64]) -> (f64, Vec<Vec<f64>>, Vec<Vec<usize>>, usize) {
        let n = self.vertex_count();
        // d[k][v]: heaviest walk of exactly k edges ending at v, from any start.
        let mut d = vec![vec![f64::NEG_INFINITY; n]; n + 1];
        let mut pred = vec![vec![usize::MAX; n]; n + 1];
        d[0].fill(0.0);
        for k in 1..=n {
            for (i, e) in self.edges.iter().enumerate() {
                let cand = d[k - 1][e.from] + w[i];
                if cand > d[k][e.to] {
                    d[k][e.to] = cand;
                    pred[k][e.to] = i;
                }
            }
        }
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for v in 0..n {
            if d[n][v] == f64::NEG_INFINITY {
                continue;
            }
            let worst = (0..n)
                .filter(|&k| d[k][v] > f64::NEG_INFINITY)
                .map(|k| (d[n][v] - d[k][v]) / (n - k) as f64)
                .fold(f64::INFINITY, f64::min);
            if worst > best {
                best = worst;
                arg = v;
            }
        }
        (best, d, pred, arg)
    }

    /// Simple cycles (as edge lists) found along the heaviest `V`-edge walk
    /// ending at Karp's extremal vertex.
    fn karp_cycles(&self, w: &[f64]) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let (_, _, pred, end) = self.karp(w);
        let mut walk = Vec::with_capacity(n);
        let mut v = end;
        for k in (1..=n).rev() {
            let e = pred[k][v];
            walk.push(e);
            v = self.edges[e].from;
        }
        walk.reverse();
        split_cycles(&self.edges, &walk)
    }

    /// Extreme value of `Σ num / Σ den` over cycles (`den > 0` on every edge),
    /// with a cycle attaining it. `maximize = false` gives the minimum.
    pub fn cycle_ratio(&self, num: &[f64], den: &[f64], maximize: bool) -> Result<(f64, Vec<usize>)> {
        if den.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::validation("cycle ratio needs strictly positive denominators"));
        }
        let sign = if maximize { 1.0 } else { -1.0 };
        let num: Vec<f64> = num.iter().map(|x| sign * x).collect();
        let ratio_of = |c: &[usize]| {
            let (a, b) = c.iter().fold((0.0, 0.0), |(a, b), &e| (a + num[e], b + den[e]));
            a / b
        };
        let edge_ratios = num.iter().zip(den).map(|(a, b)| a / b);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in edge_ratios {
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let mut best: Option<(f64, Vec<usize>)> = None;
        let consider = |cycles: Vec<Vec<usize>>, best: &mut Option<(f64, Vec<usize>)>| {
            for c in cycles {
                let r = ratio_of(&c);
                if best.as_ref().is_none_or(|(b, _)| r > *b) {
                    *best = Some((r, c));
                }
            }
        };
        for _ in 0..200 {
            if let Some((b, _)) = &best {
                lo = lo.max(*b);
            }
            if hi - lo <= 1e-13 * (1.0 + lo.abs().max(hi.abs())) {
                break;
            }
            let r = 0.5 * (lo + hi);
            let shifted: Vec<f64> = num.iter().zip(den).map(|(a, b)| a - r * b).collect();
            let mean = self.max_cycle_mean(&shifted);
            consider(self.karp_cycles(&shifted), &mut best);
            if mean > 0.0 {
                lo = lo.max(r);
            } else {
                hi = r;
            }
        }
        // Final extraction at the converged level, in case no probe landed above it.
        let shifted: Vec<f64> = num.iter().zip(den).map(|(a, b)| a - lo * b).collect();
        consider(self.karp_cycles(&shifted), &mut best);
        let (r, c) = best.expect("mixing graphs have cycles");
        Ok((sign * r, c))
    }

    /// All simple cycles, each listed once as an edge sequence starting at
    /// its smallest vertex. Exponential; meant for small graphs and checks.
    pub fn simple_cycles(&self, cap: usize) -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        let mut on_path = vec![false; self.vertex_count()];
        let mut path = Vec::new();
        for s in 0..self.vertex_count() {
            self.cycles_from(s, s, &mut on_path, &mut path, &mut out, cap)?;
        }
        Ok(out)
    }

    fn cycles_from(
        &self,
        start: usize,
        v: usize,
        on_path: &mut [bool],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        on_path[v] = true;
        for &e in &self.out[v] {
            let to = self.edges[e].to;
            if to == start {
                if out.len() >= cap {
                    return Err(Error::Capacity {
                        what: "simple cycles".into(),
                        requested: out.len() as u128 + 1,
                        cap: cap as u128,
                    });
                }
                let mut c = path.clone();
                c.push(e);
                out.push(c);
            } else if to > start && !on_path[to] {
                path.push(e);
                self.cycles_from(start, to, on_path, path, out, cap)?;
                path.pop();
            }
        }
        on_path[v] = false;
        Ok(())
    }

    /// Heaviest walk weight from every vertex to `target` (at least zero
    /// edges), by `V` rounds of Bellman relaxation. Assumes no positive cycle.
    pub fn longest_to(&self, w: &[f64], target: usize) -> Vec<f64> {
        let n = self.vertex_count();
        let mut f = vec![f64::NEG_INFINITY; n];
        f[target] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for (i, e) in self.edges.iter().enumerate() {
                let cand = w[i] + f[e.to];
                if cand > f[e.from] {
                    f[e.from] = cand;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        f
    }

    /// Heaviest closed walk through `v` with at most `V` edges.
    pub fn best_closed_walk(&self, w: &[f64], v: usize) -> f64 {
        let n = self.vertex_count();
        let mut reach = vec![f64::NEG_INFINITY; n];
        let mut best = f64::NEG_INFINITY;
        for &e in &self.out[v] {
            let edge = &self.edges[e];
            reach[edge.to] = reach[edge.to].max(w[e]);
        }
        for _ in 0..n {
            best = best.max(reach[v]);
            let mut next = reach.clone();
            for (i, e) in self.edges.iter().enumerate() {
                if e.from != v && reach[e.from] > f64::NEG_INFINITY {
                    next[e.to] = next[e.to].max(reach[e.from] + w[i]);
                }
            }
            reach = next;
        }
        best.max(reach[v])
    }

    /// Heaviest walk of `1..=V` edges from any vertex.
    pub fn max_walk_weight(&self, w: &[f64]) -> f64 {
        let n = self.vertex_count();
        let mut d = vec![0.0; n];
        let mut best = f64::NEG_INFINITY;
        for _ in 0..n {
            let mut next = vec![f64::NEG_INFINITY; n];
            for (i, e) in self.edges.iter().enumerate() {
                next[e.to] = next[e.to].max(d[e.from] + w[i]);
            }
            best = next.iter().copied().fold(best, f64::max);
            d = next;
        }
        best
    }

    /// Word of the periodic point traced by a cycle (one period).
    pub fn cycle_word(&self, cycle: &[usize]) -> Word {
        Word(cycle.iter().map(|&e| self.edges[e].word[self.depth - 1]).collect())
    }
}

/// Splits a walk (edge list) into the simple cycles it closes.
fn split_cycles(edges: &[Edge], walk: &[usize]) -> Vec<Vec<usize>> {
    let mut cycles = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut seen_at: std::collections::HashMap<usize, usize> = Default::default();
    if let Some(&e0) = walk.first() {
        seen_at.insert(edges[e0].from, 0);
    }
    for &e in walk {
        stack.push(e);
        let to = edges[e].to;
        if let Some(&pos) = seen_at.get(&to) {
            let cycle: Vec<usize> = stack.drain(pos..).collect();
            for &c in &cycle {
                seen_at.remove(&edges[c].to);
            }
            seen_at.insert(to, pos);
            cycles.push(cycle);
        } else {
            seen_at.insert(to, stack.len());
        }
    }
    cycles
}
