//! Families of words with bounded Birkhoff sums, the postfix family that
//! steers any such word back into a tighter bound, frequency/power checks on
//! sequences, and the special words built from periodic boundary orbits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::EdgeGraph;
use crate::potential::Potential;
use crate::sft::{Sft, Word, DEFAULT_WORD_CAP};
use crate::thermo::{birkhoff_sup, CYCLE_TOL};

/// `W^m_K`: admissible `m`-words whose cylinder satisfies `sup |S_m φ| <= K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowFamily {
    pub bound: f64,
    pub m: usize,
    pub words: Vec<Word>,
}

/// Exact membership in `W_K`.
pub fn in_window_family(phi: &Potential, w: &[usize], k: f64) -> Result<bool> {
    let b = phi.word_sum_bounds(w)?;
    Ok(b.sup <= k && b.inf >= -k)
}

fn dense_index(n: usize, w: &[usize]) -> usize {
    w.iter().fold(0, |acc, &s| acc * n + s)
}

/// Completion tables for the branch and bound: with `r` symbols still to
/// append after a word whose last `k` symbols are `v`, the least achievable
/// final cylinder sup and the largest achievable final cylinder inf.
struct Completions {
    k: usize,
    n: usize,
    sup_min: Vec<Vec<f64>>,
    inf_max: Vec<Vec<f64>>,
}

impl Completions {
    fn new(phi: &Potential, max_r: usize) -> Result<Self> {
        let sft = phi.sft();
        let n = sft.size();
        let d = phi.depth();
        let k = (d - 1).max(1);
        let states = sft.enumerate_words(k)?;
        let size = n.pow(k as u32);
        let mut sup0 = vec![f64::INFINITY; size];
        let mut inf0 = vec![f64::NEG_INFINITY; size];
        for s in &states {
            // Overhang of the last d-1 symbols (none for depth 1).
            let b = phi.overhang_bounds(&s[k - (d - 1)..]);
            sup0[dense_index(n, s)] = b.0;
            inf0[dense_index(n, s)] = b.1;
        }
        let mut sup_min = vec![sup0];
        let mut inf_max = vec![inf0];
        for r in 1..=max_r {
            let mut smin = vec![f64::INFINITY; size];
            let mut imax = vec![f64::NEG_INFINITY; size];
            for s in &states {
                let si = dense_index(n, s);
                for c in sft.successors(s[k - 1]) {
                    let mut ext = s.to_vec();
                    ext.push(c);
                    let term = phi.value(&ext[ext.len() - d..]);
                    let next = dense_index(n, &ext[1..]);
                    smin[si] = smin[si].min(term + sup_min[r - 1][next]);
                    imax[si] = imax[si].max(term + inf_max[r - 1][next]);
                }
            }
            sup_min.push(smin);
            inf_max.push(imax);
        }
        Ok(Completions { k, n, sup_min, inf_max })
    }
}

/// Branch and bound over the word tree for `W^m_K`.
pub fn enumerate_w(phi: &Potential, k_bound: f64, m: usize) -> Result<WindowFamily> {
    enumerate_w_capped(phi, k_bound, m, DEFAULT_WORD_CAP)
}

pub fn enumerate_w_capped(phi: &Potential, k_bound: f64, m: usize, cap: usize) -> Result<WindowFamily> {
    if !(k_bound > 0.0) {
        return Err(Error::validation("the bound K must be positive"));
    }
    if m == 0 {
        return Err(Error::validation("word length m must be at least 1"));
    }
    let comp = Completions::new(phi, m)?;
    let mut words = Vec::new();
    let mut stack = Vec::with_capacity(m);
    for a in 0..phi.sft().size() {
        stack.push(a);
        grow(phi, &comp, k_bound, m, &mut stack, 0.0, &mut words, cap)?;
        stack.pop();
    }
    Ok(WindowFamily {
        bound: k_bound,
        m,
        words,
    })
}

#[allow(clippy::too_many_arguments)]
fn grow(
    phi: &Potential,
    comp: &Completions,
    k_bound: f64,
    m: usize,
    stack: &mut Vec<usize>,
    fixed: f64,
    out: &mut Vec<Word>,
    cap: usize,
) -> Result<()> {
    let d = phi.depth();
    let len = stack.len();
    if len == m {
        let b = phi.word_sum_bounds_unchecked(stack);
        if b.sup <= k_bound && b.inf >= -k_bound {
            if out.len() >= cap {
                return Err(Error::Capacity {
                    what: format!("window family W^{m}_K"),
                    requested: out.len() as u128 + 1,
                    cap: cap as u128,
                });
            }
            out.push(Word(stack.clone()));
        }
        return Ok(());
    }
    if len >= comp.k {
        let v = dense_index(comp.n, &stack[len - comp.k..]);
        let r = m - len;
        if fixed + comp.sup_min[r][v] > k_bound + 1e-12 || fixed + comp.inf_max[r][v] < -k_bound - 1e-12 {
            return Ok(());
        }
    }
    let last = stack[len - 1];
    for c in phi.sft().successors(last) {
        stack.push(c);
        let add = if stack.len() >= d {
            phi.value(&stack[stack.len() - d..])
        } else {
            0.0
        };
        grow(phi, comp, k_bound, m, stack, fixed + add, out, cap)?;
        stack.pop();
    }
    Ok(())
}

/// Shortest prefix `ξ_1..ξ_n` of some point with `S_n φ(ξ) < threshold`
/// (`below = true`) or `> threshold`, with the attained sum.
pub(crate) fn extremal_segment(phi: &Potential, threshold: f64, below: bool, max_len: usize) -> Option<(Word, f64)> {
    let graph = EdgeGraph::for_potentials(&[phi]).ok()?;
    let sign = if below { 1.0 } else { -1.0 };
    let w: Vec<f64> = graph.weights(phi).ok()?.iter().map(|x| sign * x).collect();
    let target = sign * threshold;
    let nv = graph.vertex_count();
    let mut dist = vec![0.0; nv];
    let mut preds: Vec<Vec<usize>> = Vec::new();
    for _ in 1..=max_len {
        let mut next = vec![f64::INFINITY; nv];
        let mut pred = vec![usize::MAX; nv];
        for (i, e) in graph.edges().iter().enumerate() {
            let cand = dist[e.from] + w[i];
            if cand < next[e.to] {
                next[e.to] = cand;
                pred[e.to] = i;
            }
        }
        preds.push(pred);
        dist = next;
        let (v, &best) = dist
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        if best < target {
            let n = preds.len();
            let mut edges = Vec::with_capacity(n);
            let mut cur = v;
            for step in (0..n).rev() {
                let e = preds[step][cur];
                edges.push(e);
                cur = graph.edges()[e].from;
            }
            edges.reverse();
            let mut spelled = graph.vertices()[cur].clone();
            for &e in &edges {
                spelled.push(graph.edges()[e].word.last().unwrap());
            }
            spelled.0.truncate(n);
            return Some((spelled, sign * best));
        }
    }
    None
}

/// Smallest and largest cycle means of `φ`; the sign conditions on the
/// extreme Birkhoff ratios only depend on these.
fn cycle_mean_range(phi: &Potential) -> Result<(f64, f64)> {
    let graph = EdgeGraph::for_potentials(&[phi])?;
    let w = graph.weights(phi)?;
    let neg: Vec<f64> = w.iter().map(|x| -x).collect();
    Ok((-graph.max_cycle_mean(&neg), graph.max_cycle_mean(&w)))
}

/// Finite family `T` such that every `ω ∈ W_{K'}` has some `τ ∈ T` with `ωτ ∈ W_K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostfixSet {
    /// Ordered by length, then lexicographically.
    pub words: Vec<Word>,
    pub minus_segment: Word,
    pub plus_segment: Word,
    pub k_prime: f64,
    pub k: f64,
}

impl PostfixSet {
    /// `‖T‖`.
    pub fn norm(&self) -> usize {
        self.words.iter().map(|w| w.len()).max().unwrap_or(0)
    }

    /// The first `τ` (in stored order) with `ωτ` admissible and in `W_K`.
    pub fn first_postfix(&self, phi: &Potential, w: &[usize]) -> Option<&Word> {
        let sft = phi.sft();
        self.words.iter().find(|tau| {
            let joined: Vec<usize> = w.iter().chain(tau.iter()).copied().collect();
            sft.admissible_unchecked(&joined) && {
                let b = phi.word_sum_bounds_unchecked(&joined);
                b.sup <= self.k && b.inf >= -self.k
            }
        })
    }

    /// Same segments and bounds with a different word list (kept sorted).
    pub fn with_words(&self, mut words: Vec<Word>) -> PostfixSet {
        sort_words(&mut words);
        PostfixSet { words, ..self.clone() }
    }
}

fn sort_words(words: &mut Vec<Word>) {
    words.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    words.dedup();
}

/// The postfix family from two extremal segments: `T = {ρτ}` over connecting
/// words `ρ` and prefixes `τ` of a sufficiently negative and a sufficiently
/// positive segment.
pub fn build_postfix_set(phi: &Potential, k_prime: f64, k: f64) -> Result<PostfixSet> {
    let sft = phi.sft();
    sft.require_mixing()?;
    let (lo_mean, hi_mean) = cycle_mean_range(phi)?;
    // α₋ < 0 < α₊ for -φ/ψ means cycles of both signs for φ.
    if !(hi_mean > CYCLE_TOL && lo_mean < -CYCLE_TOL) {
        return Err(Error::infeasible(format!(
            "need periodic orbits of both signs for φ (cycle means span [{lo_mean:.6}, {hi_mean:.6}])"
        )));
    }
    if !(k_prime > 0.0) {
        return Err(Error::validation("K' must be positive"));
    }
    let v = phi.distortion_constant();
    let r = sft.connecting_words()?;
    let norm_phi = phi.sup_norm();
    let threshold = 2.0 * v + r.norm() as f64 * norm_phi;
    if !(k > threshold) {
        return Err(Error::infeasible(format!(
            "K = {k} must exceed 2V + ‖R‖‖φ‖ = {threshold}"
        )));
    }
    // Both sides use K' + 2V + ‖R‖‖φ‖: a word with sum near -K' must be able to climb back.
    let reach = k_prime + threshold;
    let max_len = 1_000_000 / sft.count_words(phi.depth().max(2) - 1).max(1) as usize;
    let (minus, _) = extremal_segment(phi, -reach, true, max_len)
        .ok_or_else(|| Error::infeasible("no segment reaches the negative threshold"))?;
    let (plus, _) = extremal_segment(phi, reach, false, max_len)
        .ok_or_else(|| Error::infeasible("no segment reaches the positive threshold"))?;
    let mut t0 = vec![Word::empty()];
    for seg in [&minus, &plus] {
        for i in 1..=seg.len() {
            t0.push(seg.prefix(i));
        }
    }
    let mut words = Vec::new();
    for rho in r.distinct() {
        for tau in &t0 {
            let cand = rho.concat(tau);
            if sft.admissible_unchecked(&cand) {
                words.push(cand);
            }
        }
    }
    sort_words(&mut words);
    Ok(PostfixSet {
        words,
        minus_segment: minus,
        plus_segment: plus,
        k_prime,
        k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostfixReport {
    pub max_len: usize,
    pub checked: usize,
    pub passed: usize,
    /// Up to 32 words of `W_{K'}` for which no postfix works.
    pub failures: Vec<Word>,
}

impl PostfixReport {
    pub fn all_passed(&self) -> bool {
        self.checked == self.passed
    }
}

/// Exhaustive check of the postfix property over `W_{K'}` up to `max_len`.
pub fn verify_postfix(t: &PostfixSet, phi: &Potential, max_len: usize) -> Result<PostfixReport> {
    let mut report = PostfixReport {
        max_len,
        checked: 0,
        passed: 0,
        failures: Vec::new(),
    };
    for m in 1..=max_len {
        for w in enumerate_w(phi, t.k_prime, m)?.words {
            report.checked += 1;
            if t.first_postfix(phi, &w).is_some() {
                report.passed += 1;
            } else if report.failures.len() < 32 {
                report.failures.push(w);
            }
        }
    }
    Ok(report)
}

/// Every length-`k` window inside `prefix` contains every word of `family`.
pub fn check_x_membership(prefix: &[usize], family: &[Word], k: usize) -> Result<bool> {
    if let Some(w) = family.iter().find(|w| w.len() > k) {
        return Err(Error::validation(format!(
            "window length {k} is shorter than the word {w} of length {}",
            w.len()
        )));
    }
    if prefix.len() < k {
        return Ok(true);
    }
    for w in family.iter().filter(|w| !w.is_empty()) {
        // next[i]: first occurrence starting at or after i.
        let mut next = vec![usize::MAX; prefix.len() + 1];
        for i in (0..prefix.len()).rev() {
            next[i] = if prefix[i..].starts_with(w) { i } else { next[i + 1] };
        }
        for start in 0..=prefix.len() - k {
            if next[start] == usize::MAX || next[start] + w.len() > start + k {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// No `ω^l` with `ω ∈ family` occurs in `prefix`.
pub fn check_n_membership(sft: &Sft, prefix: &[usize], family: &[Word], l: usize) -> Result<bool> {
    if l == 0 {
        return Err(Error::validation("power l must be at least 1"));
    }
    for w in family {
        if w.is_empty() || !sft.is_cyclically_admissible(w)? {
            return Err(Error::validation(format!(
                "{} must be non-empty and cyclically admissible",
                sft.format_word(w)
            )));
        }
    }
    for w in family {
        let pattern = sft.word_power(w, l)?;
        if prefix.windows(pattern.len()).any(|x| x == pattern.symbols()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Periodic words traced by always moving to the leftmost (or rightmost)
/// admissible successor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryWords {
    pub left_successor: Vec<usize>,
    pub right_successor: Vec<usize>,
    pub y_minus: Vec<Word>,
    pub y_plus: Vec<Word>,
    /// `Y⁻ ∪ Y⁺`, ordered by length then lexicographically.
    pub family: Vec<Word>,
}

/// `order` lists the symbols from left to right.
pub fn build_boundary_words(order: &[usize], sft: &Sft) -> Result<BoundaryWords> {
    let n = sft.size();
    let mut pos = vec![usize::MAX; n];
    for (i, &a) in order.iter().enumerate() {
        if a >= n || pos[a] != usize::MAX {
            return Err(Error::validation("ordering must list every symbol exactly once"));
        }
        pos[a] = i;
    }
    if order.len() != n {
        return Err(Error::validation("ordering must list every symbol exactly once"));
    }
    let pick = |a: usize, left: bool| {
        let succ = sft.successors(a);
        if left {
            succ.min_by_key(|&b| pos[b]).unwrap()
        } else {
            succ.max_by_key(|&b| pos[b]).unwrap()
        }
    };
    let left: Vec<usize> = (0..n).map(|a| pick(a, true)).collect();
    let right: Vec<usize> = (0..n).map(|a| pick(a, false)).collect();
    let y_minus = functional_cycles(&left);
    let y_plus = functional_cycles(&right);
    let mut family: Vec<Word> = y_minus.iter().chain(&y_plus).cloned().collect();
    sort_words(&mut family);
    Ok(BoundaryWords {
        left_successor: left,
        right_successor: right,
        y_minus,
        y_plus,
        family,
    })
}

/// Cycles of `a ↦ f(a)`, every rotation listed, sorted.
fn functional_cycles(f: &[usize]) -> Vec<Word> {
    let n = f.len();
    let mut words = Vec::new();
    for a in 0..n {
        // `a` is on a cycle iff iterating n times from it returns to it at some step.
        let mut cur = f[a];
        let mut cycle = vec![a];
        let mut on_cycle = false;
        for _ in 0..n {
            if cur == a {
                on_cycle = true;
                break;
            }
            cycle.push(cur);
            cur = f[cur];
        }
        if on_cycle {
            words.push(Word(cycle));
        }
    }
    words.sort();
    words
}

/// Is `w` a prefix of `(rotation of u)^∞` for some rotation?
fn prefix_of_periodic(w: &[usize], u: &[usize]) -> bool {
    (0..u.len()).any(|r| w.iter().enumerate().all(|(i, &s)| s == u[(r + i) % u.len()]))
}

/// An admissible word whose cylinder misses every shift of every `ω^∞`, `ω ∈ family`.
pub fn separating_word(family: &[Word], sft: &Sft) -> Result<Word> {
    for w in family {
        if w.is_empty() || !sft.is_cyclically_admissible(w)? {
            return Err(Error::validation(format!(
                "{} must be non-empty and cyclically admissible",
                sft.format_word(w)
            )));
        }
    }
    // The orbits are finitely many periodic points; length sum(|ω|) + 1 always separates when a
    // non-periodic continuation exists.
    let max_len = family.iter().map(|w| w.len()).sum::<usize>() + 2;
    for len in 1..=max_len {
        for cand in sft.enumerate_words(len)? {
            if !family.iter().any(|u| prefix_of_periodic(&cand, u)) {
                return Ok(cand);
            }
        }
    }
    Err(Error::infeasible(
        "every admissible word lies on one of the periodic orbits",
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// `α₋ = 0`: the word drives Birkhoff sums of `φ` down.
    LowerEndpoint,
    /// `α₊ = 0`: the word drives them up (built from `-φ`).
    UpperEndpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub word: Word,
    pub orientation: Orientation,
    /// `sup_m sup_ζ S_m φ(ζ)` for the oriented potential.
    pub c_minus: f64,
    /// Cylinder sup of `S_{|ω|}` for the oriented potential; below `-c_minus - 1`.
    pub word_sup: f64,
}

/// A single cyclically admissible word `ω` such that no sequence in which `ω`
/// recurs with bounded gaps keeps bounded Birkhoff sums. Needs `0` to be an
/// endpoint of a non-degenerate range of Birkhoff ratios.
pub fn counterexample_word(phi: &Potential, psi: &Potential) -> Result<Counterexample> {
    phi.require_same_shift(psi)?;
    psi.require_positive("ψ")?;
    let sft = phi.sft();
    sft.require_mixing()?;
    let (lo_mean, hi_mean) = cycle_mean_range(phi)?;
    let (oriented, orientation) = if hi_mean.abs() <= CYCLE_TOL && lo_mean < -CYCLE_TOL {
        (phi.clone(), Orientation::LowerEndpoint)
    } else if lo_mean.abs() <= CYCLE_TOL && hi_mean > CYCLE_TOL {
        (phi.scaled(-1.0), Orientation::UpperEndpoint)
    } else {
        return Err(Error::infeasible(format!(
            "0 is not an endpoint of a non-degenerate ratio range (cycle means span [{lo_mean:.6}, {hi_mean:.6}])"
        )));
    };
    let c_minus = birkhoff_sup(&oriented)?;
    let v = oriented.distortion_constant();
    let r = sft.connecting_words()?;
    let mut threshold = -v - r.norm() as f64 * oriented.sup_norm() - c_minus - 1.0;
    for _ in 0..64 {
        let (seg, _) = extremal_segment(&oriented, threshold, true, 1_000_000)
            .ok_or_else(|| Error::infeasible("no segment reaches the threshold"))?;
        let rho = r.get(seg.last().unwrap(), seg.first().unwrap());
        let word = seg.concat(rho);
        let sup = oriented.word_sum_bounds_unchecked(&word).sup;
        if sup < -c_minus - 1.0 && sft.is_cyclically_admissible(&word)? {
            return Ok(Counterexample {
                word,
                orientation,
                c_minus,
                word_sup: sup,
            });
        }
        threshold -= 1.0;
    }
    Err(Error::infeasible("could not certify a counterexample word"))
}
