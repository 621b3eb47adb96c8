//! Transfer operators, pressure and equilibrium states, the function `β(q)`
//! and the spectrum of Birkhoff ratios, plus sub-actions.
//!
//! Every potential is carried by the edge graph of its depth (at least 2),
//! so the transfer operator is a single nonnegative primitive matrix.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::EdgeGraph;
use crate::potential::Potential;
use crate::sft::Word;

/// Relative width of the Collatz–Wielandt bracket accepted for `λ`.
pub const EIGEN_TOL: f64 = 1e-13;
/// `|P(-qφ - βψ)|` accepted at the root `β(q)`.
pub const BETA_TOL: f64 = 1e-11;
/// `|β'(q) - α|` accepted for `q_α`.
pub const Q_ALPHA_TOL: f64 = 1e-9;
/// `|q|` at which endpoint limits of the spectrum are evaluated.
pub const ENDPOINT_Q: f64 = 40.0;
/// Tolerance for "no positive cycle" and "zero cycle mean".
pub const CYCLE_TOL: f64 = 1e-9;

const MAX_POWER_STEPS: usize = 100_000;

/// Perron data of `M(u, v) = exp(w_e - shift)` on an edge graph.
#[derive(Debug, Clone)]
struct Perron {
    shift: f64,
    /// Scaled matrix entry per edge.
    entry: Vec<f64>,
    lambda: f64,
    h: Vec<f64>,
    nu: Vec<f64>,
}

impl Perron {
    fn new(graph: &EdgeGraph, w: &[f64]) -> Result<Self> {
        let shift = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let entry: Vec<f64> = w.iter().map(|x| (x - shift).exp()).collect();
        let n = graph.vertex_count();
        let start = squared_guess(graph, &entry);
        let (lambda, h) = power(graph, &entry, start.0, false).map_err(|e| rescale(e, shift))?;
        let (_, mut nu) = power(graph, &entry, start.1, true).map_err(|e| rescale(e, shift))?;
        let dot: f64 = (0..n).map(|i| nu[i] * h[i]).sum();
        nu.iter_mut().for_each(|x| *x /= dot);
        Ok(Perron {
            shift,
            entry,
            lambda,
            h,
            nu,
        })
    }

    fn log_lambda(&self) -> f64 {
        self.lambda.ln() + self.shift
    }

    /// Equilibrium mass of each edge cylinder.
    fn edge_masses(&self, graph: &EdgeGraph) -> Vec<f64> {
        graph
            .edges()
            .iter()
            .zip(&self.entry)
            .map(|(e, a)| self.nu[e.from] * a * self.h[e.to] / self.lambda)
            .collect()
    }

    fn integral(&self, graph: &EdgeGraph, g: &[f64]) -> f64 {
        self.edge_masses(graph).iter().zip(g).map(|(m, x)| m * x).sum()
    }
}

fn rescale(e: Error, shift: f64) -> Error {
    match e {
        Error::Numerical { message, lo, hi } => Error::Numerical {
            message,
            lo: lo.ln() + shift,
            hi: hi.ln() + shift,
        },
        other => other,
    }
}

fn dense(graph: &EdgeGraph, entry: &[f64]) -> Vec<Vec<f64>> {
    let n = graph.vertex_count();
    let mut m = vec![vec![0.0; n]; n];
    for (e, a) in graph.edges().iter().zip(entry) {
        m[e.from][e.to] += a;
    }
    m
}

/// Starting vectors from repeated squaring, which converges to the rank-one
/// Perron projector much faster than plain iteration when the gap is small.
/// The identity shift (by an upper bound on `λ`) removes the other
/// eigenvalues of modulus close to `λ` that nearly periodic chains have.
fn squared_guess(graph: &EdgeGraph, entry: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = graph.vertex_count();
    let mut b = dense(graph, entry);
    let bound = b.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    for (i, row) in b.iter_mut().enumerate() {
        row[i] += bound;
    }
    for _ in 0..64 {
        let mut c = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                let x = b[i][k];
                if x != 0.0 {
                    for j in 0..n {
                        c[i][j] += x * b[k][j];
                    }
                }
            }
        }
        let top = c.iter().flatten().copied().fold(0.0, f64::max);
        c.iter_mut().flatten().for_each(|x| *x /= top);
        let settled = c
            .iter()
            .flatten()
            .zip(b.iter().flatten())
            .all(|(x, y)| (x - y).abs() <= 1e-15 * x.abs().max(1e-300));
        b = c;
        if settled {
            break;
        }
    }
    let right = (0..n)
        .map(|i| b[i].iter().sum::<f64>().max(f64::MIN_POSITIVE))
        .collect();
    let left = (0..n)
        .map(|j| (0..n).map(|i| b[i][j]).sum::<f64>().max(f64::MIN_POSITIVE))
        .collect();
    (right, left)
}

/// Power iteration with a Collatz–Wielandt certificate: returns `λ` and a
/// positive eigenvector (right, or left when `transpose`) scaled to max 1.
fn power(graph: &EdgeGraph, entry: &[f64], mut x: Vec<f64>, transpose: bool) -> Result<(f64, Vec<f64>)> {
    let n = graph.vertex_count();
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    for _ in 0..MAX_POWER_STEPS {
        let mut y = vec![0.0; n];
        for (e, a) in graph.edges().iter().zip(entry) {
            if transpose {
                y[e.to] += a * x[e.from];
            } else {
                y[e.from] += a * x[e.to];
            }
        }
        lo = f64::INFINITY;
        hi = 0.0f64;
        for i in 0..n {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if y.iter().all(|&v| v > 0.0) && hi - lo <= EIGEN_TOL * hi {
            let top = y.iter().copied().fold(0.0, f64::max);
            return Ok((0.5 * (lo + hi), y.into_iter().map(|v| v / top).collect()));
        }
        // Iterate with M + hi·I: same Perron vector, no competing eigenvalue near -λ.
        let mut z: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a + hi * b).collect();
        let top = z.iter().copied().fold(0.0, f64::max);
        z.iter_mut().for_each(|v| *v /= top);
        x = z;
    }
    Err(Error::numerical("power iteration did not converge", lo, hi))
}

/// Equilibrium state of a locally constant potential, as a stationary Markov
/// chain on the vertices (`(D-1)`-words) of its edge graph.
#[derive(Debug, Clone)]
pub struct GibbsChain {
    potential: Potential,
    graph: EdgeGraph,
    perron: Perron,
    q: Vec<Vec<f64>>,
    pi: Vec<f64>,
}

impl GibbsChain {
    pub fn new(f: &Potential) -> Result<Self> {
        let graph = EdgeGraph::for_potentials(&[f])?;
        let w = graph.weights(f)?;
        Self::from_graph(f.clone(), graph, &w)
    }

    fn from_graph(potential: Potential, graph: EdgeGraph, w: &[f64]) -> Result<Self> {
        graph.sft().require_mixing()?;
        let perron = Perron::new(&graph, w)?;
        let n = graph.vertex_count();
        let mut q = vec![vec![0.0; n]; n];
        for (e, a) in graph.edges().iter().zip(&perron.entry) {
            q[e.from][e.to] += a * perron.h[e.to] / (perron.lambda * perron.h[e.from]);
        }
        for row in q.iter_mut() {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
        }
        let mut pi: Vec<f64> = (0..n).map(|i| perron.nu[i] * perron.h[i]).collect();
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|x| *x /= total);
        // A few stationary sweeps absorb the eigenvector rounding.
        for _ in 0..3 {
            let mut next = vec![0.0; n];
            for (i, row) in q.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    next[j] += pi[i] * x;
                }
            }
            let s: f64 = next.iter().sum();
            pi = next.into_iter().map(|x| x / s).collect();
        }
        Ok(GibbsChain {
            potential,
            graph,
            perron,
            q,
            pi,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn graph(&self) -> &EdgeGraph {
        &self.graph
    }

    /// Topological pressure `P(f) = log λ`.
    pub fn pressure(&self) -> f64 {
        self.perron.log_lambda()
    }

    /// Leading eigenvalue (may overflow to infinity for huge potentials; see [`pressure`](Self::pressure)).
    pub fn lambda(&self) -> f64 {
        self.pressure().exp()
    }

    /// States of the chain: the `(D-1)`-words.
    pub fn states(&self) -> &[Word] {
        self.graph.vertices()
    }

    /// Right eigenvector, scaled to maximum 1.
    pub fn h(&self) -> &[f64] {
        &self.perron.h
    }

    /// Left eigenvector, normalized by `⟨ν, h⟩ = 1`.
    pub fn nu(&self) -> &[f64] {
        &self.perron.nu
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    /// The transfer matrix `M(u, v) = A(u, v) e^{f(uv)}` (unscaled).
    pub fn transfer_matrix(&self) -> Vec<Vec<f64>> {
        let shifted: Vec<f64> = self.perron.entry.iter().map(|a| a * self.perron.shift.exp()).collect();
        dense(&self.graph, &shifted)
    }

    /// `μ([ω])` for an admissible non-empty word.
    pub fn cylinder_measure(&self, w: &[usize]) -> Result<f64> {
        if w.is_empty() {
            return Err(Error::validation("cylinder measure needs a non-empty word"));
        }
        self.graph.sft().require_admissible(w)?;
        Ok(self.cylinder_measure_unchecked(w))
    }

    pub(crate) fn cylinder_measure_unchecked(&self, w: &[usize]) -> f64 {
        let k = self.graph.depth() - 1;
        if w.len() < k {
            return self
                .states()
                .iter()
                .zip(&self.pi)
                .filter(|(s, _)| s.starts_with(w))
                .map(|(_, p)| p)
                .sum();
        }
        let path: Vec<usize> = w.windows(k).map(|b| self.graph.vertex_index(b).unwrap()).collect();
        path.windows(2).fold(self.pi[path[0]], |m, p| m * self.q[p[0]][p[1]])
    }

    /// `∫ g dμ`.
    pub fn integrate(&self, g: &Potential) -> Result<f64> {
        self.potential.require_same_shift(g)?;
        if g.depth() <= self.graph.depth() {
            let w = self.graph.weights(g)?;
            return Ok(self.edge_integral(&w));
        }
        let words = g.sft().enumerate_words(g.depth())?;
        Ok(words
            .iter()
            .map(|w| self.cylinder_measure_unchecked(w) * g.value(w))
            .sum())
    }

    fn edge_integral(&self, w: &[f64]) -> f64 {
        self.graph
            .edges()
            .iter()
            .zip(w)
            .map(|(e, x)| self.pi[e.from] * self.q[e.from][e.to] * x)
            .sum()
    }

    /// Largest two-sided ratio between `μ([ω])` and `exp(S_ω f)` over
    /// `1 <= |ω| <= max_len`. Needs a normalized potential (`P(f) = 0`).
    pub fn gibbs_constant_bound(&self, max_len: usize) -> Result<f64> {
        let p = self.pressure();
        if p.abs() > 1e-9 {
            return Err(Error::validation(format!(
                "Gibbs constant needs a normalized potential, pressure is {p}"
            )));
        }
        let mut c = 1.0f64;
        for len in 1..=max_len {
            for w in self.graph.sft().enumerate_words(len)? {
                let s = self.potential.word_sum_bounds_unchecked(&w).sup;
                let m = self.cylinder_measure_unchecked(&w);
                let r = m / s.exp();
                c = c.max(r).max(1.0 / r);
            }
        }
        Ok(c)
    }

    /// A length-`n` word drawn from the chain; deterministic in `seed`.
    pub fn sample_orbit(&self, n: usize, seed: u64) -> Result<Word> {
        if n == 0 {
            return Err(Error::validation("orbit length must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = WeightedIndex::new(&self.pi).map_err(|e| Error::validation(e.to_string()))?;
        let rows: Vec<WeightedIndex<f64>> = self
            .q
            .iter()
            .map(|r| WeightedIndex::new(r).expect("rows are stochastic"))
            .collect();
        let mut v = start.sample(&mut rng);
        let mut out = self.states()[v].clone();
        while out.len() < n {
            v = rows[v].sample(&mut rng);
            out.push(self.states()[v].last().unwrap());
        }
        out.0.truncate(n);
        Ok(out)
    }
}

pub fn pressure(f: &Potential) -> Result<f64> {
    f.sft().require_mixing()?;
    let graph = EdgeGraph::for_potentials(&[f])?;
    Ok(Perron::new(&graph, &graph.weights(f)?)?.log_lambda())
}

pub fn gibbs_chain(f: &Potential) -> Result<GibbsChain> {
    GibbsChain::new(f)
}

/// `q_α`, or the side on which it escapes to infinity at an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum QAlpha {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
}

impl QAlpha {
    pub fn as_f64(&self) -> f64 {
        match self {
            QAlpha::Finite(q) => *q,
            QAlpha::PlusInfinity => f64::INFINITY,
            QAlpha::MinusInfinity => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumPoint {
    pub alpha: f64,
    pub q: QAlpha,
    /// `b(α) = β(q_α) - q_α α`; at an endpoint, its value at `|q| = 40`.
    pub value: f64,
    pub chain: Option<GibbsChain>,
    /// At endpoints, how much the truncated value still moved between
    /// `|q| = 20` and `|q| = 40` (it decreases monotonically towards the limit).
    pub endpoint_gap: Option<f64>,
}

/// Extreme Birkhoff ratios, with one periodic word realizing each.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaRange {
    pub lo: f64,
    pub hi: f64,
    pub lo_cycle: Word,
    pub hi_cycle: Word,
}

/// A pair `(φ, ψ)` with `ψ > 0` on a mixing shift, carried by one edge graph.
#[derive(Debug, Clone)]
pub struct RatioSystem {
    phi: Potential,
    psi: Potential,
    graph: EdgeGraph,
    phi_w: Vec<f64>,
    psi_w: Vec<f64>,
    range: AlphaRange,
}

impl RatioSystem {
    pub fn new(phi: &Potential, psi: &Potential) -> Result<Self> {
        phi.require_same_shift(psi)?;
        psi.require_positive("ψ")?;
        phi.sft().require_mixing()?;
        let graph = EdgeGraph::for_potentials(&[phi, psi])?;
        let phi_w = graph.weights(phi)?;
        let psi_w = graph.weights(psi)?;
        let neg: Vec<f64> = phi_w.iter().map(|x| -x).collect();
        let (lo, lo_c) = graph.cycle_ratio(&neg, &psi_w, false)?;
        let (hi, hi_c) = graph.cycle_ratio(&neg, &psi_w, true)?;
        let range = AlphaRange {
            lo,
            hi,
            lo_cycle: graph.cycle_word(&lo_c),
            hi_cycle: graph.cycle_word(&hi_c),
        };
        Ok(RatioSystem {
            phi: phi.clone(),
            psi: psi.clone(),
            graph,
            phi_w,
            psi_w,
            range,
        })
    }

    pub fn phi(&self) -> &Potential {
        &self.phi
    }

    pub fn psi(&self) -> &Potential {
        &self.psi
    }

    fn weights(&self, q: f64, beta: f64) -> Vec<f64> {
        self.phi_w
            .iter()
            .zip(&self.psi_w)
            .map(|(f, p)| -q * f - beta * p)
            .collect()
    }

    /// `P(-qφ - βψ)`.
    pub fn pressure_at(&self, q: f64, beta: f64) -> Result<f64> {
        Ok(Perron::new(&self.graph, &self.weights(q, beta))?.log_lambda())
    }

    /// The unique `β` with `P(-qφ - βψ) = 0`.
    pub fn beta(&self, q: f64) -> Result<f64> {
        let (beta, _) = self.beta_with_perron(q)?;
        Ok(beta)
    }

    fn beta_with_perron(&self, q: f64) -> Result<(f64, Perron)> {
        let p0 = Perron::new(&self.graph, &self.weights(q, 0.0))?;
        let pz = p0.log_lambda();
        if pz.abs() <= BETA_TOL {
            return Ok((0.0, p0));
        }
        // P(g - βψ) is squeezed between P(g) - β max ψ and P(g) - β min ψ.
        let (psi_lo, psi_hi) = (self.psi.min_value(), self.psi.max_value());
        let (mut a, mut b) = {
            let (x, y) = (pz / psi_hi, pz / psi_lo);
            (x.min(y), x.max(y))
        };
        let mut beta = pz / p0.integral(&self.graph, &self.psi_w);
        if !(beta > a && beta < b) {
            beta = 0.5 * (a + b);
        }
        for _ in 0..200 {
            let perron = Perron::new(&self.graph, &self.weights(q, beta))?;
            let p = perron.log_lambda();
            if p.abs() <= BETA_TOL {
                return Ok((beta, perron));
            }
            if p > 0.0 {
                a = beta;
            } else {
                b = beta;
            }
            let slope = -perron.integral(&self.graph, &self.psi_w);
            let mut next = beta - p / slope;
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if next == beta || b - a <= f64::EPSILON * beta.abs().max(1.0) {
                return Err(Error::numerical(
                    format!(
                        "root of the pressure equation at q = {q} not resolved (|P| = {:e})",
                        p.abs()
                    ),
                    a,
                    b,
                ));
            }
            beta = next;
        }
        Err(Error::numerical(format!("β({q}) did not converge"), a, b))
    }

    /// `β'(q) = -∫φ dμ_q / ∫ψ dμ_q`.
    pub fn beta_prime(&self, q: f64) -> Result<f64> {
        let (_, perron) = self.beta_with_perron(q)?;
        Ok(-perron.integral(&self.graph, &self.phi_w) / perron.integral(&self.graph, &self.psi_w))
    }

    /// The equilibrium state `μ_q` of `-qφ - β(q)ψ`.
    pub fn chain(&self, q: f64) -> Result<GibbsChain> {
        let beta = self.beta(q)?;
        let f = Potential::combine(-q, &self.phi, -beta, &self.psi)?;
        let w = self.weights(q, beta);
        GibbsChain::from_graph(f, self.graph.clone(), &w)
    }

    pub fn alpha_range(&self) -> &AlphaRange {
        &self.range
    }

    /// `α₀ = β'(0)`, where the spectrum attains `β(0)`.
    pub fn full_dim_alpha(&self) -> Result<f64> {
        self.beta_prime(0.0)
    }

    /// `q` with `β'(q) = α`, for `α` strictly inside the range.
    pub fn q_alpha(&self, alpha: f64) -> Result<f64> {
        let g = |q: f64| self.beta_prime(q).map(|d| d - alpha);
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        let (mut glo, mut ghi) = (g(lo)?, g(hi)?);
        while glo > 0.0 {
            if lo < -1024.0 {
                return Err(Error::numerical(format!("no bracket for q_α at α = {alpha}"), lo, hi));
            }
            hi = lo;
            ghi = glo;
            lo *= 2.0;
            glo = g(lo)?;
        }
        while ghi < 0.0 {
            if hi > 1024.0 {
                return Err(Error::numerical(format!("no bracket for q_α at α = {alpha}"), lo, hi));
            }
            lo = hi;
            glo = ghi;
            hi *= 2.0;
            ghi = g(hi)?;
        }
        if glo.abs() <= Q_ALPHA_TOL {
            return Ok(lo);
        }
        if ghi.abs() <= Q_ALPHA_TOL {
            return Ok(hi);
        }
        // Illinois variant of regula falsi, with bisection as a fallback.
        let mut side = 0i8;
        for i in 0..300 {
            let mut q = (lo * ghi - hi * glo) / (ghi - glo);
            if !(q > lo && q < hi) || i % 8 == 7 {
                q = 0.5 * (lo + hi);
            }
            let gq = g(q)?;
            if gq.abs() <= Q_ALPHA_TOL {
                return Ok(q);
            }
            if gq < 0.0 {
                lo = q;
                glo = gq;
                if side == -1 {
                    ghi *= 0.5;
                }
                side = -1;
            } else {
                hi = q;
                ghi = gq;
                if side == 1 {
                    glo *= 0.5;
                }
                side = 1;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                return Ok(0.5 * (lo + hi));
            }
        }
        Err(Error::numerical(format!("q_α did not converge at α = {alpha}"), lo, hi))
    }

    /// The spectrum `b(α) = min_q β(q) - qα` at one `α`.
    pub fn spectrum_at(&self, alpha: f64) -> Result<SpectrumPoint> {
        let AlphaRange { lo, hi, .. } = self.range;
        let tol = 1e-10 * (1.0 + lo.abs().max(hi.abs()));
        if alpha < lo - tol || alpha > hi + tol || !alpha.is_finite() {
            return Err(Error::EmptyLevelSet { alpha, lo, hi });
        }
        if hi - lo <= tol {
            // φ/ψ is cohomologous to a constant: β is affine with slope α.
            return Ok(SpectrumPoint {
                alpha,
                q: QAlpha::Finite(0.0),
                value: self.beta(0.0)?,
                chain: Some(self.chain(0.0)?),
                endpoint_gap: None,
            });
        }
        if alpha >= hi - tol || alpha <= lo + tol {
            let (q_far, q_mid, marker, a) = if alpha >= hi - tol {
                (ENDPOINT_Q, ENDPOINT_Q / 2.0, QAlpha::PlusInfinity, hi)
            } else {
                (-ENDPOINT_Q, -ENDPOINT_Q / 2.0, QAlpha::MinusInfinity, lo)
            };
            let far = self.beta(q_far)? - q_far * a;
            let mid = self.beta(q_mid)? - q_mid * a;
            return Ok(SpectrumPoint {
                alpha,
                q: marker,
                value: far,
                chain: None,
                endpoint_gap: Some(mid - far),
            });
        }
        let q = self.q_alpha(alpha)?;
        let value = self.beta(q)? - q * alpha;
        Ok(SpectrumPoint {
            alpha,
            q: QAlpha::Finite(q),
            value,
            chain: Some(self.chain(q)?),
            endpoint_gap: None,
        })
    }
}

pub fn beta(q: f64, phi: &Potential, psi: &Potential) -> Result<f64> {
    RatioSystem::new(phi, psi)?.beta(q)
}

pub fn beta_prime(q: f64, phi: &Potential, psi: &Potential) -> Result<f64> {
    RatioSystem::new(phi, psi)?.beta_prime(q)
}

pub fn alpha_range(phi: &Potential, psi: &Potential) -> Result<(f64, f64)> {
    let r = RatioSystem::new(phi, psi)?;
    Ok((r.alpha_range().lo, r.alpha_range().hi))
}

pub fn spectrum_at(alpha: f64, phi: &Potential, psi: &Potential) -> Result<SpectrumPoint> {
    RatioSystem::new(phi, psi)?.spectrum_at(alpha)
}

pub fn full_dim_alpha(phi: &Potential, psi: &Potential) -> Result<f64> {
    RatioSystem::new(phi, psi)?.full_dim_alpha()
}

/// Largest mean of `φ` over periodic orbits.
pub fn max_cycle_mean(phi: &Potential) -> Result<f64> {
    let graph = EdgeGraph::for_potentials(&[phi])?;
    Ok(graph.max_cycle_mean(&graph.weights(phi)?))
}

/// A function `f` on `(D-1)`-words with `φ + f∘σ - f <= 0`, tight on some
/// periodic orbit. Needs the largest cycle mean of `φ` to be zero.
pub fn subaction(phi: &Potential) -> Result<Potential> {
    phi.sft().require_mixing()?;
    let graph = EdgeGraph::for_potentials(&[phi])?;
    let w = graph.weights(phi)?;
    let mean = graph.max_cycle_mean(&w);
    if mean > CYCLE_TOL {
        return Err(Error::Precondition(format!(
            "φ has a cycle of positive mean {mean:e}; no sub-action exists"
        )));
    }
    if mean < -CYCLE_TOL {
        return Err(Error::Precondition(format!(
            "largest cycle mean of φ is {mean:e}, not 0; subtract it first"
        )));
    }
    let critical = (0..graph.vertex_count())
        .find(|&v| graph.best_closed_walk(&w, v) >= -CYCLE_TOL)
        .expect("a zero-mean cycle exists");
    let values = graph.longest_to(&w, critical);
    let table: Vec<(Word, f64)> = graph.vertices().iter().cloned().zip(values).collect();
    Potential::new(phi.sft(), graph.depth() - 1, table)
}

/// `g` with `φ + g∘σ - g >= 0`, tight on some periodic orbit; needs the
/// smallest cycle mean of `φ` to be zero.
pub fn superaction(phi: &Potential) -> Result<Potential> {
    Ok(subaction(&phi.scaled(-1.0))?.scaled(-1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubactionCheck {
    /// `max_e φ(e) + f(head) - f(tail)`.
    pub max_excess: f64,
    /// Some cycle has every edge within tolerance of equality.
    pub tight_cycle: bool,
}

pub fn check_subaction(phi: &Potential, f: &Potential) -> Result<SubactionCheck> {
    phi.require_same_shift(f)?;
    let graph = EdgeGraph::for_potentials(&[phi, f])?;
    let graph = if f.depth() + 1 > graph.depth() {
        EdgeGraph::new(phi.sft(), f.depth() + 1)?
    } else {
        graph
    };
    let pw = graph.weights(phi)?;
    let k = f.depth();
    let excess: Vec<f64> = graph
        .edges()
        .iter()
        .zip(&pw)
        .map(|(e, p)| p + f.value(&e.word[1..1 + k]) - f.value(&e.word[..k]))
        .collect();
    let max_excess = excess.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tight: Vec<f64> = excess
        .iter()
        .map(|&x| if x.abs() <= CYCLE_TOL { 0.0 } else { -1.0 })
        .collect();
    let tight_cycle = graph.max_cycle_mean(&tight) >= 0.0;
    Ok(SubactionCheck {
        max_excess,
        tight_cycle,
    })
}

/// `sup_n sup_ξ S_n φ(ξ)` over `n >= 1`, finite exactly when no cycle has positive mean.
pub fn birkhoff_sup(phi: &Potential) -> Result<f64> {
    let graph = EdgeGraph::for_potentials(&[phi])?;
    let w = graph.weights(phi)?;
    let mean = graph.max_cycle_mean(&w);
    if mean > CYCLE_TOL {
        return Err(Error::InfiniteSupremum(format!(
            "a periodic orbit has positive mean {mean:e}"
        )));
    }
    // Longer walks contain removable non-positive cycles.
    Ok(graph.max_walk_weight(&w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::fixtures::*;
    use crate::sft::fixtures::*;
    use crate::sft::Sft;
    use proptest::prelude::*;

    /// β(q) = log₂(4^q + (4/3)^q) for the (1/4, 3/4) Bernoulli pair with ψ = log 2.
    fn beta_closed(q: f64) -> f64 {
        (4f64.powf(q) + (4.0f64 / 3.0).powf(q)).log2()
    }

    fn beta_prime_closed(q: f64) -> f64 {
        let (a, b) = (4f64.powf(q), (4.0f64 / 3.0).powf(q));
        (a * 4f64.ln() + b * (4.0f64 / 3.0).ln()) / ((a + b) * 2f64.ln())
    }

    fn bin14() -> RatioSystem {
        RatioSystem::new(&bin14_phi(), &log2_psi()).unwrap()
    }

    #[test]
    fn pressure_examples() {
        let f2 = full2();
        assert!((pressure(&Potential::constant(&f2, 0.0)).unwrap() - 2f64.ln()).abs() < 1e-13);
        let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((pressure(&Potential::constant(&gold(), 0.0)).unwrap() - golden).abs() < 1e-13);
        assert!((golden - 0.4812118).abs() < 1e-7);
        assert!(pressure(&bin14_phi()).unwrap().abs() < 1e-13);
        let flip = Sft::from_matrix(&[&[0, 1], &[1, 0]]).unwrap();
        assert!(matches!(
            pressure(&Potential::constant(&flip, 0.0)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn chain_examples() {
        let c = gibbs_chain(&bin14_phi()).unwrap();
        for row in c.transition() {
            assert!((row[0] - 0.25).abs() < 1e-12 && (row[1] - 0.75).abs() < 1e-12);
        }
        assert!((c.stationary()[0] - 0.25).abs() < 1e-12);
        let parry = gibbs_chain(&Potential::constant(&gold(), 0.0)).unwrap();
        let p0 = (5.0 + 5f64.sqrt()) / 10.0;
        assert!((parry.stationary()[0] - p0).abs() < 1e-12);
        assert!((p0 - 0.72361).abs() < 1e-5);
        let uni = gibbs_chain(&Potential::constant(&full2(), 0.0)).unwrap();
        assert!((uni.stationary()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cylinder_measures() {
        let c = gibbs_chain(&bin14_phi()).unwrap();
        assert!((c.cylinder_measure(&w("01")).unwrap() - 3.0 / 16.0).abs() < 1e-12);
        let parry = gibbs_chain(&Potential::constant(&gold(), 0.0)).unwrap();
        let p1 = 1.0 - (5.0 + 5f64.sqrt()) / 10.0;
        assert!((parry.cylinder_measure(&w("10")).unwrap() - p1).abs() < 1e-12);
        assert!(parry.cylinder_measure(&w("11")).is_err());
        let deep = gibbs_chain(&gold_f()).unwrap();
        for n in 1..=7 {
            let total: f64 = gold()
                .enumerate_words(n)
                .unwrap()
                .iter()
                .map(|x| deep.cylinder_measure(x).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gibbs_constants() {
        let c = gibbs_chain(&bin14_phi()).unwrap();
        assert!((c.gibbs_constant_bound(6).unwrap() - 1.0).abs() < 1e-12);
        let g = gold();
        let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        let parry = gibbs_chain(&Potential::constant(&g, -golden)).unwrap();
        let bound = {
            let h = parry.h();
            let nu = parry.nu();
            let r = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
            r(h) * r(nu)
        };
        let c6 = parry.gibbs_constant_bound(6).unwrap();
        assert!(c6 <= bound + 1e-12);
        assert!(parry.gibbs_constant_bound(1).unwrap() <= c6);
        assert!(matches!(
            gibbs_chain(&Potential::constant(&g, 0.0))
                .unwrap()
                .gibbs_constant_bound(3),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn integrals() {
        let c = gibbs_chain(&bin14_phi()).unwrap();
        let v = c.integrate(&bin14_phi()).unwrap();
        assert!((v - (0.25 * 0.25f64.ln() + 0.75 * 0.75f64.ln())).abs() < 1e-12);
        assert!((v + 0.562335).abs() < 1e-6);
        assert!((c.integrate(&Potential::constant(&full2(), 2.5)).unwrap() - 2.5).abs() < 1e-12);
        let uni = gibbs_chain(&Potential::constant(&full2(), 0.0)).unwrap();
        let u = uni.integrate(&bin14_phi()).unwrap();
        assert!((u + 0.836988).abs() < 1e-6);
        assert!(c.integrate(&Potential::constant(&gold(), 1.0)).is_err());
    }

    #[test]
    fn beta_closed_form() {
        let s = bin14();
        assert!((s.beta(0.0).unwrap() - 1.0).abs() < 1e-11);
        for q in [-5.0, -2.0, -0.5, 0.7, 2.0, 5.0, 40.0, -40.0] {
            assert!((s.beta(q).unwrap() - beta_closed(q)).abs() < 1e-10, "q = {q}");
            let p = s.pressure_at(q, s.beta(q).unwrap()).unwrap();
            assert!(p.abs() <= BETA_TOL);
        }
        assert!((beta_closed(2.0) - (16.0f64 + 16.0 / 9.0).log2()).abs() < 1e-14);
        let grid: Vec<f64> = (-5..=5).map(|q| s.beta(q as f64).unwrap()).collect();
        for i in 1..grid.len() - 1 {
            assert!(grid[i] <= 0.5 * (grid[i - 1] + grid[i + 1]) + 1e-12);
        }
    }

    #[test]
    fn beta_prime_examples() {
        let s = bin14();
        let a0 = s.beta_prime(0.0).unwrap();
        assert!((a0 - 1.2075187).abs() < 1e-7);
        assert!((a0 - beta_prime_closed(0.0)).abs() < 1e-12);
        assert!((s.beta_prime(40.0).unwrap() - 2.0).abs() < 1e-6);
        for q in [-3.0, -0.3, 1.5] {
            let fd = (s.beta(q + 1e-5).unwrap() - s.beta(q - 1e-5).unwrap()) / 2e-5;
            assert!((s.beta_prime(q).unwrap() - fd).abs() < 1e-6);
        }
        assert!((s.beta_prime(-0.488076).unwrap() - 1.0).abs() < 2e-6);
    }

    #[test]
    fn alpha_ranges() {
        let r = bin14().alpha_range().clone();
        assert!((r.lo - (4.0f64 / 3.0).ln() / 2f64.ln()).abs() < 1e-12);
        assert!((r.hi - 2.0).abs() < 1e-12);
        assert_eq!((r.lo_cycle, r.hi_cycle), (w("1"), w("0")));
        let (lo, hi) = alpha_range(&phi_pm(), &log2_psi()).unwrap();
        assert!((lo + 0.7213475).abs() < 1e-7 && (hi - 0.7213475).abs() < 1e-7);
        let (lo, hi) = alpha_range(&Potential::constant(&gold(), 0.0), &Potential::constant(&gold(), 1.0)).unwrap();
        assert!(lo.abs() < 1e-12 && hi.abs() < 1e-12);
    }

    /// Legendre oracle from the closed form: Newton on β'(q) = α.
    fn legendre_closed(alpha: f64) -> (f64, f64) {
        let mut q = 0.0;
        for _ in 0..100 {
            let h = 1e-6;
            let d2 = (beta_prime_closed(q + h) - beta_prime_closed(q - h)) / (2.0 * h);
            q -= (beta_prime_closed(q) - alpha) / d2;
        }
        (q, beta_closed(q) - q * alpha)
    }

    #[test]
    fn spectrum_examples() {
        let s = bin14();
        let a0 = s.full_dim_alpha().unwrap();
        let p = s.spectrum_at(a0).unwrap();
        assert!(matches!(p.q, QAlpha::Finite(q) if q.abs() < 1e-8));
        assert!((p.value - 1.0).abs() < 1e-8);

        let p = s.spectrum_at(1.0).unwrap();
        let (q_ref, b_ref) = legendre_closed(1.0);
        assert!((p.q.as_f64() - q_ref).abs() < 1e-7);
        assert!((p.value - b_ref).abs() < 1e-9);
        assert!((p.q.as_f64() + 0.488076).abs() < 2e-6);
        assert!((p.value - 0.949918).abs() < 1e-4);

        let top = s.spectrum_at(2.0).unwrap();
        assert_eq!(top.q, QAlpha::PlusInfinity);
        assert!(top.value.abs() < 1e-6);
        assert!(top.endpoint_gap.unwrap() >= 0.0);
        assert!(matches!(s.spectrum_at(2.5), Err(Error::EmptyLevelSet { .. })));
    }

    #[test]
    fn spectrum_is_concave_and_peaks_at_alpha0() {
        let s = bin14();
        let r = s.alpha_range().clone();
        let a0 = s.full_dim_alpha().unwrap();
        let grid: Vec<f64> = (1..20).map(|i| r.lo + (r.hi - r.lo) * i as f64 / 20.0).collect();
        let vals: Vec<f64> = grid.iter().map(|&a| s.spectrum_at(a).unwrap().value).collect();
        for i in 1..vals.len() - 1 {
            assert!(vals[i] >= 0.5 * (vals[i - 1] + vals[i + 1]) - 1e-9);
        }
        for (a, v) in grid.iter().zip(&vals) {
            assert!(*v >= -1e-12 && *v <= 1.0 + 1e-12);
            if (a - a0).abs() >= 1e-3 {
                assert!(*v < 1.0);
            }
            assert!((v - legendre_closed(*a).1).abs() < 1e-8);
        }
    }

    #[test]
    fn full_dim_examples() {
        assert!((full_dim_alpha(&bin14_phi(), &log2_psi()).unwrap() - 1.2075187).abs() < 1e-7);
        let psi = Potential::from_symbol_values(&full2(), &[1.0, 2.0]).unwrap();
        assert!((full_dim_alpha(&psi.scaled(-1.0), &psi).unwrap() - 1.0).abs() < 1e-12);
        let half = Potential::constant(&full2(), 0.5f64.ln());
        assert!((full_dim_alpha(&half, &log2_psi()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subaction_examples() {
        let f = subaction(&phi_neg()).unwrap();
        let chk = check_subaction(&phi_neg(), &f).unwrap();
        assert!(chk.max_excess <= 1e-9 && chk.tight_cycle);
        let zero = check_subaction(&phi_neg(), &Potential::constant(&full2(), 0.0)).unwrap();
        assert!(zero.max_excess <= 0.0 && zero.tight_cycle);
        let g = gold();
        let fp = Potential::new(&g, 2, [(w("00"), 0.0), (w("01"), -0.1), (w("10"), -0.5)]).unwrap();
        let f = subaction(&fp).unwrap();
        assert_eq!(f.depth(), 1);
        assert!((f.value(&[0]) - 0.0).abs() < 1e-15 && (f.value(&[1]) + 0.5).abs() < 1e-15);
        let chk = check_subaction(&fp, &f).unwrap();
        assert!(chk.max_excess <= 1e-9 && chk.tight_cycle);
        assert!(matches!(subaction(&phi_pm()), Err(Error::Precondition(_))));
        // the mirrored statement
        let g2 = superaction(&fp.scaled(-1.0)).unwrap();
        let chk = check_subaction(&fp, &g2.scaled(-1.0)).unwrap();
        assert!(chk.max_excess <= 1e-9);
    }

    #[test]
    fn birkhoff_sup_examples() {
        assert_eq!(birkhoff_sup(&phi_neg()).unwrap(), 0.0);
        let g = gold();
        let fp = Potential::new(&g, 2, [(w("00"), 0.0), (w("01"), -0.1), (w("10"), -0.5)]).unwrap();
        assert_eq!(birkhoff_sup(&fp).unwrap(), 0.0);
        assert!(matches!(birkhoff_sup(&phi_pm()), Err(Error::InfiniteSupremum(_))));
    }

    #[test]
    fn sampling() {
        let c = gibbs_chain(&bin14_phi()).unwrap();
        let a = c.sample_orbit(100_000, 7).unwrap();
        assert_eq!(a, c.sample_orbit(100_000, 7).unwrap());
        let ones = a.iter().filter(|&&s| s == 1).count() as f64;
        let sigma = (100_000.0f64 * 0.25 * 0.75).sqrt();
        assert!((ones - 75_000.0).abs() < 3.0 * sigma);
        let deep = gibbs_chain(&gold_f()).unwrap();
        let x = deep.sample_orbit(500, 1).unwrap();
        assert_eq!(x.len(), 500);
        assert!(gold().is_admissible(&x).unwrap());
        assert_eq!(deep.sample_orbit(1, 3).unwrap().len(), 1);
    }

    fn random_potential() -> impl Strategy<Value = Potential> {
        (
            2usize..=5,
            proptest::collection::vec(proptest::bool::weighted(0.55), 25),
            proptest::collection::vec(-3.0f64..3.0, 125),
            1usize..=3,
        )
            .prop_filter_map("needs a mixing shift", |(n, bits, vals, d)| {
                let rows: Vec<Vec<bool>> = (0..n).map(|i| bits[i * 5..i * 5 + n].to_vec()).collect();
                let s = Sft::new((0..n).map(|i| i.to_string()).collect(), rows).ok()?;
                if !s.is_mixing() || s.count_words(d) > 125 {
                    return None;
                }
                Potential::from_fn(&s, d, |x| vals[x.iter().fold(0, |a, &b| a * 5 + b) % 125]).ok()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn chain_invariants(f in random_potential()) {
            let c = gibbs_chain(&f).unwrap();
            let m = c.transfer_matrix();
            let lambda = c.lambda();
            let (h, nu) = (c.h(), c.nu());
            let n = h.len();
            for i in 0..n {
                let mh: f64 = (0..n).map(|j| m[i][j] * h[j]).sum();
                let nm: f64 = (0..n).map(|j| nu[j] * m[j][i]).sum();
                prop_assert!((mh - lambda * h[i]).abs() <= 1e-12 * lambda);
                prop_assert!((nm - lambda * nu[i]).abs() <= 1e-12 * lambda * nu.iter().cloned().fold(0.0, f64::max));
                prop_assert!(h[i] > 0.0 && nu[i] > 0.0 && c.stationary()[i] > 0.0);
                prop_assert!((c.transition()[i].iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                let pq: f64 = (0..n).map(|j| c.stationary()[j] * c.transition()[j][i]).sum();
                prop_assert!((pq - c.stationary()[i]).abs() <= 1e-12);
            }
            let dot: f64 = (0..n).map(|i| nu[i] * h[i]).sum();
            prop_assert!((dot - 1.0).abs() < 1e-12);
        }

        #[test]
        fn pressure_shift_and_monotone(f in random_potential(), c in -3.0f64..3.0) {
            let p = pressure(&f).unwrap();
            prop_assert!((pressure(&f.shifted(c)).unwrap() - p - c).abs() < 1e-10);
            prop_assert!(pressure(&f.shifted(c.abs())).unwrap() >= p - 1e-12);
        }

        #[test]
        fn beta_prime_in_range(f in random_potential(), q in -6.0f64..6.0) {
            let psi = Potential::from_fn(f.sft(), 1, |x| 0.5 + x[0] as f64).unwrap();
            let s = RatioSystem::new(&f, &psi).unwrap();
            let r = s.alpha_range();
            let d = s.beta_prime(q).unwrap();
            prop_assert!(d >= r.lo - 1e-9 && d <= r.hi + 1e-9);
            let (b0, b1, b2) = (s.beta(q - 0.5).unwrap(), s.beta(q).unwrap(), s.beta(q + 0.5).unwrap());
            prop_assert!(b1 <= 0.5 * (b0 + b2) + 1e-10);
        }

        #[test]
        fn subaction_bounds_birkhoff_sup(f in random_potential()) {
            let mean = max_cycle_mean(&f).unwrap();
            let g = f.shifted(-mean);
            let sub = subaction(&g).unwrap();
            let chk = check_subaction(&g, &sub).unwrap();
            prop_assert!(chk.max_excess <= 1e-9);
            prop_assert!(chk.tight_cycle);
            let sup = birkhoff_sup(&g).unwrap();
            prop_assert!(sup <= 2.0 * sub.sup_norm() + 1e-9);
        }
    }
}
