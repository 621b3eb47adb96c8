//! A mass distribution carried by sequences whose Birkhoff sums stay bounded
//! and in which a prescribed word recurs with bounded gaps.
//!
//! Generation `k` words are built by appending, to a generation `k - 1`
//! word, a base word `ω'` of length `m`, the marker word `ω̃` and a postfix
//! that brings the sum back within `K`. Masses split among children in
//! proportion to `exp(-s S ψ)`.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::sft::{InfixSet, Word};
use crate::thermo::RatioSystem;
use crate::wordsets::{build_postfix_set, check_x_membership, enumerate_w, PostfixSet};

/// Largest base length tried by [`choose_m`] unless overridden.
pub const DEFAULT_M_CAP: usize = 20;

fn log_sum_exp(xs: &[f64]) -> f64 {
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// `(1/s) log Σ_{ω ∈ W^m_K} exp(-s S_ω ψ)`; `-∞` when the family is empty.
pub fn base_series(phi: &Potential, psi: &Potential, s: f64, k: f64, m: usize) -> Result<f64> {
    let words = enumerate_w(phi, k, m)?.words;
    let logs: Vec<f64> = words
        .iter()
        .map(|w| -s * psi.word_sum_bounds_unchecked(w).sup)
        .collect();
    Ok(log_sum_exp(&logs) / s)
}

/// The constant `C₀ = (2‖R‖ + ‖T‖ + |ω̃|)‖ψ‖`.
pub fn c0(psi: &Potential, r_norm: usize, t_norm: usize, marker_len: usize) -> f64 {
    (2 * r_norm + t_norm + marker_len) as f64 * psi.sup_norm()
}

/// Least `m <= m_cap` whose base series exceeds `C₀`.
pub fn choose_m(phi: &Potential, psi: &Potential, s: f64, k: f64, c0: f64, m_cap: usize) -> Result<usize> {
    if !(s > 0.0) {
        return Err(Error::validation("s must be positive"));
    }
    for m in 1..=m_cap {
        if base_series(phi, psi, s, k, m)? > c0 {
            return Ok(m);
        }
    }
    Err(Error::infeasible(format!(
        "no base length m <= {m_cap} makes the series exceed C0 = {c0:.6}; s may be too close to the dimension"
    )))
}

#[derive(Debug, Clone, Default)]
pub struct MassOptions {
    /// Defaults to `2V + ‖R‖‖φ‖ + 1`.
    pub k: Option<f64>,
    /// Defaults to [`DEFAULT_M_CAP`].
    pub m_cap: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct MassDistribution {
    phi: Potential,
    psi: Potential,
    s: f64,
    k: f64,
    k_prime: f64,
    m: usize,
    c0: f64,
    marker: Word,
    infix: InfixSet,
    postfix: PostfixSet,
    level1: Vec<Node>,
}

/// A word of some generation together with its mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub generation: usize,
    pub word: Word,
    pub log_mass: f64,
}

impl Node {
    pub fn mass(&self) -> f64 {
        self.log_mass.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassSummary {
    pub s: f64,
    pub k: f64,
    pub k_prime: f64,
    pub m: usize,
    pub c0: f64,
    pub marker: String,
    pub base_count: usize,
    pub postfix_norm: usize,
    pub infix_norm: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub word: String,
    pub generation: usize,
    pub mass: f64,
    /// Largest `|S_n φ|` over the cylinders of the prefixes of the word.
    pub max_abs_sum: f64,
    /// `K' + ‖T‖‖φ‖`.
    pub sum_bound: f64,
    pub sum_ok: bool,
    /// `2(m + ‖R‖ + |ω̃|) + ‖T‖`.
    pub window: usize,
    pub window_ok: bool,
    /// `log μ([ω]) / log diam_ψ([ω])`.
    pub local_dimension: f64,
    pub s: f64,
}

impl MassDistribution {
    /// Assembles the construction for `0 < s` below the dimension of the
    /// zero-ratio level set, with marker word made of `family`.
    pub fn build(phi: &Potential, psi: &Potential, s: f64, family: &[Word], options: &MassOptions) -> Result<Self> {
        phi.require_same_shift(psi)?;
        let sft = phi.sft();
        for w in family {
            sft.require_admissible(w)?;
        }
        let system = RatioSystem::new(phi, psi)?;
        let range = system.alpha_range();
        if !(range.lo < 0.0 && 0.0 < range.hi) {
            return Err(Error::infeasible(format!(
                "need α₋ < 0 < α₊, got [{}, {}]",
                range.lo, range.hi
            )));
        }
        let b0 = system.spectrum_at(0.0)?.value;
        if !(s > 0.0 && s < b0 - 1e-3) {
            return Err(Error::infeasible(format!(
                "s = {s} must lie in (0, b(0) - 0.001) with b(0) = {b0:.6}"
            )));
        }
        let infix = sft.connecting_words()?;
        let mut members = family.to_vec();
        members.sort();
        members.dedup();
        let marker = members.iter().fold(Word::empty(), |acc, w| infix.join(&acc, w));
        let r_norm = infix.norm();
        let norm_phi = phi.sup_norm();
        let k = options
            .k
            .unwrap_or(2.0 * phi.distortion_constant() + r_norm as f64 * norm_phi + 1.0);
        let k_prime = k + (2 * r_norm + marker.len()) as f64 * norm_phi;
        let postfix = build_postfix_set(phi, k_prime, k)?;
        let c0 = c0(psi, r_norm, postfix.norm(), marker.len());
        let m = choose_m(phi, psi, s, k, c0, options.m_cap.unwrap_or(DEFAULT_M_CAP))?;
        let base = enumerate_w(phi, k, m)?.words;
        let logs: Vec<f64> = base.iter().map(|w| -s * psi.word_sum_bounds_unchecked(w).sup).collect();
        let total = log_sum_exp(&logs);
        let level1 = base
            .into_iter()
            .zip(logs)
            .map(|(word, l)| Node {
                generation: 1,
                word,
                log_mass: l - total,
            })
            .collect();
        Ok(MassDistribution {
            phi: phi.clone(),
            psi: psi.clone(),
            s,
            k,
            k_prime,
            m,
            c0,
            marker,
            infix,
            postfix,
            level1,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn k_prime(&self) -> f64 {
        self.k_prime
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn marker(&self) -> &Word {
        &self.marker
    }

    pub fn postfix(&self) -> &PostfixSet {
        &self.postfix
    }

    pub fn infix(&self) -> &InfixSet {
        &self.infix
    }

    /// Generation-one words `A₁ = W^m_K` with their masses.
    pub fn level1(&self) -> &[Node] {
        &self.level1
    }

    pub fn summary(&self) -> MassSummary {
        MassSummary {
            s: self.s,
            k: self.k,
            k_prime: self.k_prime,
            m: self.m,
            c0: self.c0,
            marker: self.phi.sft().format_word(&self.marker),
            base_count: self.level1.len(),
            postfix_norm: self.postfix.norm(),
            infix_norm: self.infix.norm(),
        }
    }

    fn weight(&self, w: &[usize]) -> f64 {
        -self.s * self.psi.word_sum_bounds_unchecked(w).sup
    }

    /// Children `ωρω'ρ'ω̃τ`, one per base word `ω'`, in base-word order.
    pub fn children(&self, node: &Node) -> Result<Vec<Node>> {
        let mut words = Vec::with_capacity(self.level1.len());
        for base in &self.level1 {
            let mut w = self.infix.join(&node.word, &base.word);
            w = self.infix.join(&w, &self.marker);
            let tau = self.postfix.first_postfix(&self.phi, &w).ok_or_else(|| {
                Error::infeasible(format!(
                    "no postfix brings {} back into W_K",
                    self.phi.sft().format_word(&w)
                ))
            })?;
            w.extend(tau);
            words.push(w);
        }
        let logs: Vec<f64> = words.iter().map(|w| self.weight(w)).collect();
        let total = log_sum_exp(&logs);
        Ok(words
            .into_iter()
            .zip(logs)
            .map(|(word, l)| Node {
                generation: node.generation + 1,
                word,
                log_mass: node.log_mass + l - total,
            })
            .collect())
    }

    /// Every generation-`k` word; fails beyond `cap` nodes.
    pub fn generation(&self, k: usize, cap: usize) -> Result<Vec<Node>> {
        if k == 0 {
            return Err(Error::validation("generations start at 1"));
        }
        let size = (self.level1.len() as u128).saturating_pow(k as u32);
        if size > cap as u128 {
            return Err(Error::Capacity {
                what: format!("generation {k}"),
                requested: size,
                cap: cap as u128,
            });
        }
        let mut nodes = self.level1.clone();
        for _ in 1..k {
            let mut next = Vec::new();
            for n in &nodes {
                next.extend(self.children(n)?);
            }
            nodes = next;
        }
        Ok(nodes)
    }

    /// Locates `w` in the tree and returns its node.
    pub fn find(&self, w: &Word) -> Result<Node> {
        let missing = || {
            Error::validation(format!(
                "{} is not a word of the construction",
                self.phi.sft().format_word(w)
            ))
        };
        let first = self
            .level1
            .iter()
            .find(|n| n.word.is_prefix_of(w))
            .ok_or_else(missing)?;
        self.descend(first.clone(), w).ok_or_else(missing)
    }

    fn descend(&self, node: Node, target: &Word) -> Option<Node> {
        if node.word.len() == target.len() {
            return (node.word == *target).then_some(node);
        }
        for child in self.children(&node).ok()? {
            if child.word.is_prefix_of(target) {
                if let Some(found) = self.descend(child, target) {
                    return Some(found);
                }
            }
        }
        None
    }

    /// `μ_s([ω])` for a word of the construction.
    pub fn mass(&self, w: &Word) -> Result<f64> {
        Ok(self.find(w)?.mass())
    }

    /// A generation-`k` word drawn with probability equal to its mass.
    pub fn sample(&self, k: usize, seed: u64) -> Result<Node> {
        if k == 0 {
            return Err(Error::validation("generations start at 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pick = |nodes: &[Node], rng: &mut ChaCha8Rng, parent: f64| {
            let weights: Vec<f64> = nodes.iter().map(|n| (n.log_mass - parent).exp()).collect();
            let dist = WeightedIndex::new(&weights).expect("masses are positive");
            nodes[dist.sample(rng)].clone()
        };
        let mut node = pick(&self.level1, &mut rng, 0.0);
        for _ in 1..k {
            let children = self.children(&node)?;
            node = pick(&children, &mut rng, node.log_mass);
        }
        Ok(node)
    }

    /// Finite checks of the properties the construction guarantees along `node`.
    pub fn certify(&self, node: &Node) -> Result<Certificate> {
        let w = &node.word;
        let mut max_abs = 0.0f64;
        for n in 1..=w.len() {
            let b = self.phi.word_sum_bounds_unchecked(&w[..n]);
            max_abs = max_abs.max(b.sup.abs()).max(b.inf.abs());
        }
        let t_norm = self.postfix.norm();
        let sum_bound = self.k_prime + t_norm as f64 * self.phi.sup_norm();
        let window = 2 * (self.m + self.infix.norm() + self.marker.len()) + t_norm;
        let window_ok = check_x_membership(w, std::slice::from_ref(&self.marker), window)?;
        let diam = self.psi.cylinder_diam_psi(w)?;
        Ok(Certificate {
            word: self.phi.sft().format_word(w),
            generation: node.generation,
            mass: node.mass(),
            max_abs_sum: max_abs,
            sum_bound,
            sum_ok: max_abs <= sum_bound + 1e-12,
            window,
            window_ok,
            local_dimension: node.log_mass / diam.ln(),
            s: self.s,
        })
    }

    /// `max_{ω ∈ A_k} μ_s([ω]) / exp(-s S_ω ψ)`, exhaustively.
    pub fn max_ratio(&self, k: usize, cap: usize) -> Result<f64> {
        Ok(self
            .generation(k, cap)?
            .iter()
            .map(|n| (n.log_mass - self.weight(&n.word)).exp())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::fixtures::*;
    use crate::sft::fixtures::*;
    use crate::wordsets::in_window_family;

    fn pm(s: f64) -> MassDistribution {
        MassDistribution::build(&phi_pm(), &log2_psi(), s, &[w("01")], &MassOptions::default()).unwrap()
    }

    #[test]
    fn choose_m_examples() {
        let c = c0(&log2_psi(), 0, 5, 2);
        assert!((c - 4.852030263919617).abs() < 1e-12);
        let v = base_series(&phi_pm(), &log2_psi(), 0.1, 0.6, 1).unwrap();
        assert!((v - 6.238324625039508).abs() < 1e-9);
        assert_eq!(choose_m(&phi_pm(), &log2_psi(), 0.1, 0.6, c, 20).unwrap(), 1);
        assert!(matches!(
            choose_m(&phi_pm(), &log2_psi(), 1.0, 0.6, c, 12),
            Err(Error::Infeasible(_))
        ));
        let mut last = f64::NEG_INFINITY;
        for m in [1, 2, 4, 8, 16] {
            let v = base_series(&phi_pm(), &log2_psi(), 0.5, 1.0, m).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn build_examples() {
        let d = pm(0.1);
        assert_eq!(d.m(), 1);
        assert_eq!(d.level1().len(), 2);
        assert_eq!(d.k_prime(), 2.0);
        assert_eq!(d.postfix().norm(), 5);
        for n in d.level1() {
            assert!((n.mass() - 0.5).abs() < 1e-15);
        }
        let shifted = Potential::combine(1.0, &bin14_phi(), 1.207518749639422, &log2_psi()).unwrap();
        assert!(MassDistribution::build(&shifted, &log2_psi(), 0.2, &[w("0")], &MassOptions::default()).is_ok());
        assert!(matches!(
            MassDistribution::build(&phi_neg(), &log2_psi(), 0.1, &[w("0")], &MassOptions::default()),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            MassDistribution::build(&phi_pm(), &log2_psi(), 1.0, &[w("0")], &MassOptions::default()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn masses_are_consistent() {
        let d = pm(0.1);
        let total: f64 = d.level1().iter().map(|n| n.mass()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mut frontier = d.level1().to_vec();
        for _ in 0..4 {
            let mut next = Vec::new();
            for n in &frontier {
                let kids = d.children(n).unwrap();
                let sum: f64 = kids.iter().map(|c| c.mass()).sum();
                assert!((sum - n.mass()).abs() <= 1e-12 * n.mass());
                for c in &kids {
                    assert!(in_window_family(&phi_pm(), &c.word, d.k()).unwrap());
                    assert_eq!(d.mass(&c.word).unwrap(), c.mass());
                }
                next.extend(kids);
            }
            frontier = next;
        }
        assert!(d.mass(&w("0110")).is_err());
        let again = pm(0.1);
        let a = d.generation(3, 1000).unwrap();
        let b = again.generation(3, 1000).unwrap();
        assert!(a
            .iter()
            .zip(&b)
            .all(|(x, y)| x.log_mass.to_bits() == y.log_mass.to_bits()));
    }

    #[test]
    fn sampling() {
        let d = pm(0.1);
        let x = d.sample(5, 11).unwrap();
        assert_eq!(x, d.sample(5, 11).unwrap());
        assert!(in_window_family(&phi_pm(), &x.word, d.k()).unwrap());
        let draws = 10_000;
        let zeros = (0..draws).filter(|&i| d.sample(1, i).unwrap().word == w("0")).count() as f64;
        let sigma = (draws as f64 * 0.25).sqrt();
        assert!((zeros - 5000.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn certificates() {
        let d = pm(0.1);
        for seed in 0..5 {
            let node = d.sample(5, seed).unwrap();
            let c = d.certify(&node).unwrap();
            assert!((c.sum_bound - 4.5).abs() < 1e-12);
            assert!(c.sum_ok, "{c:?}");
            assert!(c.window_ok);
        }
        let node = d.sample(8, 3).unwrap();
        assert!(d.certify(&node).unwrap().local_dimension >= d.s() - 0.05);
    }

    #[test]
    fn ratio_is_monotone() {
        let d = pm(0.1);
        let mut last = f64::INFINITY;
        for k in 1..=6 {
            let r = d.max_ratio(k, 100).unwrap();
            assert!(r <= last * (1.0 + 1e-12));
            last = r;
        }
        let first = d.max_ratio(1, 100).unwrap();
        for n in d.generation(4, 100).unwrap() {
            assert!(n.mass() <= d.weight(&n.word).exp() * first * (1.0 + 1e-12));
        }
    }
}
