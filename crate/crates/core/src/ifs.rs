//! Affine iterated function systems on an interval and the distribution
//! function of a pushed-forward Gibbs measure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::massdist::{Certificate, MassDistribution, MassOptions};
use crate::potential::Potential;
use crate::sft::{Sft, Word};
use crate::thermo::{GibbsChain, RatioSystem};
use crate::wordsets::{build_boundary_words, check_n_membership, separating_word};

/// Relative accuracy of each CDF difference taken by the probes.
pub const PROBE_REL_TOL: f64 = 1e-6;

const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineMap {
    pub rate: f64,
    pub offset: f64,
}

impl AffineMap {
    pub fn apply(&self, x: f64) -> f64 {
        self.rate * x + self.offset
    }
}

#[derive(Debug, Clone)]
pub struct AffineIfs {
    sft: Sft,
    lo: f64,
    hi: f64,
    maps: Vec<AffineMap>,
    order: Vec<usize>,
}

impl AffineIfs {
    /// Maps are indexed by symbol. Rejects rates outside `(0, 1)`, images
    /// leaving `[lo, hi]` and overlapping images.
    pub fn new(sft: &Sft, lo: f64, hi: f64, maps: Vec<AffineMap>) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::validation(format!(
                "interval [{lo}, {hi}] is not a proper interval"
            )));
        }
        if maps.len() != sft.size() {
            return Err(Error::validation(format!(
                "{} maps for {} symbols",
                maps.len(),
                sft.size()
            )));
        }
        let slack = GEOM_TOL * (hi - lo);
        for (a, g) in maps.iter().enumerate() {
            let name = &sft.alphabet()[a];
            if !(g.rate > 0.0 && g.rate < 1.0) {
                return Err(Error::validation(format!(
                    "map {name}: rate {} must lie in (0, 1)",
                    g.rate
                )));
            }
            if g.apply(lo) < lo - slack || g.apply(hi) > hi + slack {
                return Err(Error::validation(format!(
                    "map {name} sends the interval outside itself"
                )));
            }
        }
        let mut order: Vec<usize> = (0..maps.len()).collect();
        order.sort_by(|&a, &b| maps[a].apply(lo).total_cmp(&maps[b].apply(lo)));
        for p in order.windows(2) {
            if maps[p[0]].apply(hi) > maps[p[1]].apply(lo) + slack {
                return Err(Error::validation(format!(
                    "open set condition fails: images of {} and {} overlap",
                    sft.alphabet()[p[0]],
                    sft.alphabet()[p[1]]
                )));
            }
        }
        Ok(AffineIfs {
            sft: sft.clone(),
            lo,
            hi,
            maps,
            order,
        })
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    /// Symbols sorted from left to right by the position of their images.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    fn compose(&self, w: &[usize]) -> AffineMap {
        w.iter().rev().fold(AffineMap { rate: 1.0, offset: 0.0 }, |acc, &a| {
            let g = self.maps[a];
            AffineMap {
                rate: g.rate * acc.rate,
                offset: g.rate * acc.offset + g.offset,
            }
        })
    }

    /// `g_ω(I)`.
    pub fn cylinder_interval(&self, w: &[usize]) -> Result<(f64, f64)> {
        self.sft.require_admissible(w)?;
        Ok(self.interval_unchecked(w))
    }

    fn interval_unchecked(&self, w: &[usize]) -> (f64, f64) {
        let g = self.compose(w);
        (g.apply(self.lo), g.apply(self.hi))
    }

    /// Image of `prefix · period^∞` under the coding map; with an empty
    /// period, the midpoint of the prefix cylinder.
    pub fn coding_point(&self, prefix: &[usize], period: &[usize]) -> Result<f64> {
        if period.is_empty() {
            let (a, b) = self.cylinder_interval(prefix)?;
            return Ok(0.5 * (a + b));
        }
        if !self.sft.is_cyclically_admissible(period)? {
            return Err(Error::validation("period is not cyclically admissible"));
        }
        let joined: Vec<usize> = prefix.iter().chain(period).copied().collect();
        self.sft.require_admissible(&joined)?;
        let g = self.compose(period);
        let fixed = g.offset / (1.0 - g.rate);
        Ok(self.compose(prefix).apply(fixed))
    }

    /// `ψ(a) = -log r_a`.
    pub fn geometric_potential(&self) -> Potential {
        let values: Vec<f64> = self.maps.iter().map(|g| -g.rate.ln()).collect();
        Potential::from_symbol_values(&self.sft, &values).expect("one value per symbol")
    }
}

/// The distribution function of `μ ∘ π⁻¹` for the equilibrium state `μ` of
/// a potential, normalized to zero pressure.
#[derive(Debug, Clone)]
pub struct CdfModel {
    ifs: AffineIfs,
    phi: Potential,
    psi: Potential,
    chain: GibbsChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub scale: f64,
    pub side: Side,
    pub diff: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderProbe {
    pub x: f64,
    pub alpha: f64,
    pub records: Vec<ProbeRecord>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Least-squares slope of `log |Ĉ(y) - Ĉ(x)|` against `log |y - x|`.
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alpha0Report {
    pub alpha0: f64,
    pub dimension: f64,
    pub beta0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedPoint {
    pub x: f64,
    pub alpha: f64,
    pub s: f64,
    pub l: usize,
    pub marker: String,
    pub boundary_words: Vec<String>,
    pub n_ok: bool,
    /// `l‖F‖ + |Σ|`.
    pub window_constant: usize,
    pub certificate: Certificate,
}

impl CdfModel {
    /// `phi` is shifted by its pressure before building the chain.
    pub fn new(ifs: &AffineIfs, phi: &Potential) -> Result<Self> {
        if phi.sft() != ifs.sft() {
            return Err(Error::validation("potential and IFS live on different shifts"));
        }
        let p = GibbsChain::new(phi)?.pressure();
        let phi = phi.shifted(-p);
        let chain = GibbsChain::new(&phi)?;
        if chain.pressure().abs() > 1e-9 {
            return Err(Error::numerical(
                "normalization left nonzero pressure",
                chain.pressure(),
                0.0,
            ));
        }
        Ok(CdfModel {
            ifs: ifs.clone(),
            psi: ifs.geometric_potential(),
            phi,
            chain,
        })
    }

    pub fn ifs(&self) -> &AffineIfs {
        &self.ifs
    }

    /// The normalized potential.
    pub fn phi(&self) -> &Potential {
        &self.phi
    }

    pub fn psi(&self) -> &Potential {
        &self.psi
    }

    pub fn chain(&self) -> &GibbsChain {
        &self.chain
    }

    /// Two-sided Gibbs constant over words of length at most `max_len`.
    pub fn gibbs_constant(&self, max_len: usize) -> Result<f64> {
        self.chain.gibbs_constant_bound(max_len)
    }

    /// `μπ⁻¹((a, b])` within `eps`. A cylinder touching `b` from the right
    /// contributes nothing, so shared endpoints go to the left cylinder.
    pub fn interval_mass(&self, a: f64, b: f64, eps: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(Error::validation("eps must be positive"));
        }
        if !(a < b) {
            return Ok(0.0);
        }
        let sft = self.ifs.sft();
        let mut total = 0.0;
        let mut stack: Vec<Word> = self.ifs.order.iter().map(|&s| Word(vec![s])).collect();
        while let Some(w) = stack.pop() {
            let (lo, hi) = self.ifs.interval_unchecked(&w);
            if hi <= a || lo >= b {
                continue;
            }
            let m = self.chain.cylinder_measure_unchecked(&w);
            if a <= lo && hi <= b {
                total += m;
            } else if m < 0.25 * eps {
                // At most four cylinders are cut off like this.
                total += 0.5 * m;
            } else {
                let last = w.last().unwrap();
                for &s in &self.ifs.order {
                    if sft.allowed(last, s) {
                        let mut child = w.clone();
                        child.push(s);
                        stack.push(child);
                    }
                }
            }
        }
        Ok(total)
    }

    /// `Ĉ(x)` within `eps`.
    pub fn cdf_eval(&self, x: f64, eps: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(Error::validation("eps must be positive"));
        }
        let (u, v) = self.ifs.interval();
        if x <= u {
            return Ok(0.0);
        }
        if x >= v {
            return Ok(1.0);
        }
        Ok(self.interval_mass(u - 1.0, x, eps)?.min(1.0))
    }

    /// `Ĉ(y) - Ĉ(x)`, with accuracy relative to its own size.
    pub fn cdf_diff(&self, x: f64, y: f64, rel: f64) -> Result<f64> {
        let (a, b, sign) = if x <= y { (x, y, 1.0) } else { (y, x, -1.0) };
        let mut eps = 1e-3;
        let mut d = self.interval_mass(a, b, eps)?;
        for _ in 0..8 {
            let target = rel * d;
            if eps <= target || d == 0.0 || eps < 1e-300 {
                break;
            }
            eps = 0.1 * target;
            d = self.interval_mass(a, b, eps)?;
        }
        Ok(sign * d)
    }

    /// `resolution` equally spaced samples of `Ĉ` across the interval,
    /// accumulated from non-negative increments so the curve is monotone.
    pub fn cdf_curve(&self, resolution: usize, eps: f64) -> Result<Vec<(f64, f64)>> {
        if resolution < 2 {
            return Err(Error::validation("resolution must be at least 2"));
        }
        if !(eps > 0.0) {
            return Err(Error::validation("eps must be positive"));
        }
        let (u, v) = self.ifs.interval();
        let step = eps / resolution as f64;
        let xs: Vec<f64> = (0..resolution)
            .map(|i| u + (v - u) * i as f64 / (resolution - 1) as f64)
            .collect();
        let mut out = vec![(u, 0.0)];
        let mut acc = 0.0;
        for p in xs.windows(2) {
            acc += self.interval_mass(p[0], p[1], step)?;
            out.push((p[1], acc.min(1.0)));
        }
        out.last_mut().unwrap().1 = 1.0;
        Ok(out)
    }

    /// Ratios `|Ĉ(y) - Ĉ(x)| / |y - x|^α` at `y = x ± 2^-j`, `1 <= j <= depth`.
    pub fn holder_probe(&self, x: f64, alpha: f64, depth: usize) -> Result<HolderProbe> {
        self.holder_probe_with_tol(x, alpha, 1, depth, PROBE_REL_TOL)
    }

    pub fn holder_probe_with_tol(
        &self,
        x: f64,
        alpha: f64,
        first: usize,
        depth: usize,
        rel: f64,
    ) -> Result<HolderProbe> {
        let (u, v) = self.ifs.interval();
        if !(u <= x && x <= v) {
            return Err(Error::validation(format!("x = {x} lies outside [{u}, {v}]")));
        }
        if depth > 60 || first == 0 || first > depth {
            return Err(Error::validation("probe depths must satisfy 1 <= first <= depth <= 60"));
        }
        let mut records = Vec::new();
        for j in first..=depth {
            let h = 0.5f64.powi(j as i32);
            for (side, y) in [(Side::Left, x - h), (Side::Right, x + h)] {
                if y < u || y > v {
                    continue;
                }
                let diff = self.cdf_diff(x, y, rel)?.abs();
                records.push(ProbeRecord {
                    scale: h,
                    side,
                    diff,
                    ratio: diff / h.powf(alpha),
                });
            }
        }
        let min_ratio = records.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let max_ratio = records.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let pts: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.diff > 0.0)
            .map(|r| (r.scale.ln(), r.diff.ln()))
            .collect();
        Ok(HolderProbe {
            x,
            alpha,
            records,
            min_ratio,
            max_ratio,
            exponent: slope(&pts),
        })
    }

    /// Whether `C⁻¹|y-x|^α <= |Ĉ(y) - Ĉ(x)| <= C|y-x|^α` at every probed
    /// scale `2^-j`, `lo <= j <= hi`.
    pub fn moderate_check(&self, x: f64, alpha: f64, c: f64, lo: usize, hi: usize) -> Result<bool> {
        if !(c >= 1.0) {
            return Err(Error::validation("C must be at least 1"));
        }
        let p = self.holder_probe_with_tol(x, alpha, lo, hi, PROBE_REL_TOL)?;
        Ok(p.records.iter().all(|r| r.ratio >= 1.0 / c && r.ratio <= c))
    }

    fn ratio_system(&self) -> Result<RatioSystem> {
        RatioSystem::new(&self.phi, &self.psi)
    }

    /// The exponent carrying full dimension, with `b(α₀)` and `β(0)`.
    pub fn alpha0(&self) -> Result<Alpha0Report> {
        let system = self.ratio_system()?;
        let alpha0 = system.full_dim_alpha()?;
        Ok(Alpha0Report {
            alpha0,
            dimension: system.spectrum_at(alpha0)?.value,
            beta0: system.beta(0.0)?,
        })
    }

    /// A point built from a sampled word of the mass distribution for
    /// `φ + αψ`, with marker the separating word of the boundary words.
    /// Uses `s = b(α)/2`.
    pub fn certified_point(&self, alpha: f64, l: usize, depth: usize, seed: u64) -> Result<CertifiedPoint> {
        let system = self.ratio_system()?;
        let range = system.alpha_range();
        if !(range.lo < alpha && alpha < range.hi) {
            return Err(Error::infeasible(format!(
                "α = {alpha} must lie strictly inside ({}, {})",
                range.lo, range.hi
            )));
        }
        let s = 0.5 * system.spectrum_at(alpha)?.value;
        let sft = self.ifs.sft();
        let boundary = build_boundary_words(&self.ifs.order, sft)?;
        let marker = separating_word(&boundary.family, sft)?;
        let phi_alpha = Potential::combine(1.0, &self.phi, alpha, &self.psi)?;
        let dist = MassDistribution::build(
            &phi_alpha,
            &self.psi,
            s,
            std::slice::from_ref(&marker),
            &MassOptions::default(),
        )?;
        let node = dist.sample(depth, seed)?;
        let certificate = dist.certify(&node)?;
        let n_ok = check_n_membership(sft, &node.word, &boundary.family, l)?;
        let norm = boundary.family.iter().map(|w| w.len()).max().unwrap_or(0);
        Ok(CertifiedPoint {
            x: self.ifs.coding_point(&node.word, &[])?,
            alpha,
            s,
            l,
            marker: sft.format_word(&marker),
            boundary_words: boundary.family.iter().map(|w| sft.format_word(w)).collect(),
            n_ok,
            window_constant: l * norm + sft.size(),
            certificate,
        })
    }
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
