//! Locally constant potentials and their Birkhoff and word sums.
//!
//! A potential of depth `d` is a value table on admissible `d`-words; it is
//! evaluated on a sequence by looking at the first `d` symbols. Word sums
//! over cylinders are exact: the `d - 1` terms that overhang the end of a
//! word are maximized or minimized by a dynamic program over admissible
//! extensions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sft::{Sft, Word, DEFAULT_WORD_CAP};

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    sft: Sft,
    depth: usize,
    /// Dense base-`n` table over all `d`-words; entries for inadmissible words are never read.
    values: Vec<f64>,
    /// Best and worst overhang sums (the last `d - 1` terms of a Birkhoff sum)
    /// indexed by the trailing `(d - 1)`-word.
    overhang_max: Vec<f64>,
    overhang_min: Vec<f64>,
}

/// Exact range of `S_{|ω|} f` over the cylinder `[ω]`; `sup` is the word sum `S_ω f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WordSumBounds {
    pub sup: f64,
    pub inf: f64,
}

fn dense_index(n: usize, w: &[usize]) -> usize {
    w.iter().fold(0, |acc, &s| acc * n + s)
}

impl Potential {
    /// Builds a potential from `(word, value)` entries, which must cover the
    /// admissible `depth`-words exactly once with finite values.
    pub fn new(sft: &Sft, depth: usize, entries: impl IntoIterator<Item = (Word, f64)>) -> Result<Self> {
        Self::check_depth(sft, depth)?;
        let n = sft.size();
        let mut values = vec![0.0; n.pow(depth as u32)];
        let mut seen = vec![false; values.len()];
        for (word, value) in entries {
            if word.len() != depth {
                return Err(Error::validation(format!(
                    "table key {} has length {}, expected depth {depth}",
                    sft.format_word(&word),
                    word.len()
                )));
            }
            if !sft.is_admissible(&word)? {
                return Err(Error::validation(format!(
                    "table key {} is not an admissible word",
                    sft.format_word(&word)
                )));
            }
            if !value.is_finite() {
                return Err(Error::validation(format!(
                    "table value for {} is not finite",
                    sft.format_word(&word)
                )));
            }
            let i = dense_index(n, &word);
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::validation(format!(
                    "table key {} given twice",
                    sft.format_word(&word)
                )));
            }
            values[i] = value;
        }
        for word in sft.enumerate_words(depth)? {
            if !seen[dense_index(n, &word)] {
                return Err(Error::validation(format!(
                    "table has no value for admissible word {}",
                    sft.format_word(&word)
                )));
            }
        }
        Ok(Self::from_dense(sft.clone(), depth, values))
    }

    /// Tabulates `f` on every admissible `depth`-word.
    pub fn from_fn(sft: &Sft, depth: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        Self::check_depth(sft, depth)?;
        let entries: Vec<(Word, f64)> = sft
            .enumerate_words(depth)?
            .into_iter()
            .map(|w| {
                let v = f(&w);
                (w, v)
            })
            .collect();
        Self::new(sft, depth, entries)
    }

    /// Depth-1 potential from one value per symbol.
    pub fn from_symbol_values(sft: &Sft, values: &[f64]) -> Result<Self> {
        if values.len() != sft.size() {
            return Err(Error::validation(format!(
                "expected {} symbol values, got {}",
                sft.size(),
                values.len()
            )));
        }
        Self::from_fn(sft, 1, |w| values[w[0]])
    }

    pub fn constant(sft: &Sft, c: f64) -> Self {
        Self::from_fn(sft, 1, |_| c).expect("constant potential is valid")
    }

    fn check_depth(sft: &Sft, depth: usize) -> Result<()> {
        if depth == 0 {
            return Err(Error::validation("potential depth must be at least 1"));
        }
        let size = (sft.size() as u128).checked_pow(depth as u32).unwrap_or(u128::MAX);
        if size > DEFAULT_WORD_CAP as u128 {
            return Err(Error::Capacity {
                what: format!("value table of depth {depth}"),
                requested: size,
                cap: DEFAULT_WORD_CAP as u128,
            });
        }
        Ok(())
    }

    fn from_dense(sft: Sft, depth: usize, values: Vec<f64>) -> Self {
        let mut p = Potential {
            sft,
            depth,
            values,
            overhang_max: Vec::new(),
            overhang_min: Vec::new(),
        };
        let (hi, lo) = p.overhang_tables();
        p.overhang_max = hi;
        p.overhang_min = lo;
        p
    }

    /// `G_j(v)`: extreme sum of the next `j` windows when the trailing
    /// `(d-1)`-word is `v`, iterated up to `j = d - 1`.
    fn overhang_tables(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.sft.size();
        let k = self.depth - 1;
        let states = n.pow(k as u32);
        let mut hi = vec![0.0; states];
        let mut lo = vec![0.0; states];
        if k == 0 {
            return (hi, lo);
        }
        let blocks = self.sft.enumerate_words(k).expect("depth already capped");
        for _ in 0..k {
            let mut next_hi = vec![f64::NEG_INFINITY; states];
            let mut next_lo = vec![f64::INFINITY; states];
            for v in &blocks {
                let vi = dense_index(n, v);
                for c in self.sft.successors(v[k - 1]) {
                    let mut window = v.to_vec();
                    window.push(c);
                    let term = self.values[dense_index(n, &window)];
                    let tail = dense_index(n, &window[1..]);
                    next_hi[vi] = next_hi[vi].max(term + hi[tail]);
                    next_lo[vi] = next_lo[vi].min(term + lo[tail]);
                }
            }
            hi = next_hi;
            lo = next_lo;
        }
        (hi, lo)
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Value on an admissible `d`-word.
    #[inline]
    pub fn value(&self, window: &[usize]) -> f64 {
        debug_assert_eq!(window.len(), self.depth);
        self.values[dense_index(self.sft.size(), window)]
    }

    /// `(word, value)` pairs over the admissible `d`-words, lexicographically.
    pub fn entries(&self) -> Vec<(Word, f64)> {
        self.sft
            .enumerate_words(self.depth)
            .expect("depth already capped")
            .into_iter()
            .map(|w| {
                let v = self.value(&w);
                (w, v)
            })
            .collect()
    }

    fn admissible_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries().into_iter().map(|(_, v)| v)
    }

    pub fn min_value(&self) -> f64 {
        self.admissible_values().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.admissible_values().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Supremum norm `‖f‖`.
    pub fn sup_norm(&self) -> f64 {
        self.admissible_values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.min_value() > 0.0
    }

    pub(crate) fn require_positive(&self, what: &str) -> Result<()> {
        if self.is_strictly_positive() {
            Ok(())
        } else {
            Err(Error::validation(format!("{what} must be strictly positive")))
        }
    }

    pub(crate) fn require_same_shift(&self, other: &Potential) -> Result<()> {
        if self.sft == other.sft {
            Ok(())
        } else {
            Err(Error::validation("potentials are defined over different shifts"))
        }
    }

    /// Same function written as a depth-`depth` table (`depth >= d`).
    pub fn lift(&self, depth: usize) -> Result<Potential> {
        if depth < self.depth {
            return Err(Error::validation(format!(
                "cannot lift a depth-{} potential to depth {depth}",
                self.depth
            )));
        }
        if depth == self.depth {
            return Ok(self.clone());
        }
        Potential::from_fn(&self.sft, depth, |w| self.value(&w[..self.depth]))
    }

    /// `a·f + b·g`, at the larger of the two depths.
    pub fn combine(a: f64, f: &Potential, b: f64, g: &Potential) -> Result<Potential> {
        f.require_same_shift(g)?;
        let depth = f.depth.max(g.depth);
        Potential::from_fn(&f.sft, depth, |w| {
            a * f.value(&w[..f.depth]) + b * g.value(&w[..g.depth])
        })
    }

    pub fn scaled(&self, a: f64) -> Potential {
        Potential::combine(a, self, 0.0, self).expect("same shift")
    }

    pub fn shifted(&self, c: f64) -> Potential {
        let values = self.values.iter().map(|v| v + c).collect();
        Potential::from_dense(self.sft.clone(), self.depth, values)
    }

    /// `S_n f(ξ)` for any `ξ` extending `prefix`; needs `|prefix| >= n + d - 1`.
    pub fn birkhoff_sum(&self, prefix: &[usize], n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        let needed = n + self.depth - 1;
        if prefix.len() < needed {
            return Err(Error::InsufficientContext {
                needed,
                got: prefix.len(),
            });
        }
        self.sft.require_admissible(&prefix[..needed])?;
        Ok(self.fixed_sum(&prefix[..needed]))
    }

    /// Sum over the windows lying entirely inside `w`.
    fn fixed_sum(&self, w: &[usize]) -> f64 {
        if w.len() < self.depth {
            return 0.0;
        }
        w.windows(self.depth).map(|win| self.value(win)).sum()
    }

    /// Exact `[inf, sup]` of `S_{|ω|} f` over `[ω]`.
    pub fn word_sum_bounds(&self, w: &[usize]) -> Result<WordSumBounds> {
        self.sft.require_admissible(w)?;
        Ok(self.word_sum_bounds_unchecked(w))
    }

    pub(crate) fn word_sum_bounds_unchecked(&self, w: &[usize]) -> WordSumBounds {
        if w.is_empty() {
            return WordSumBounds { sup: 0.0, inf: 0.0 };
        }
        let k = self.depth - 1;
        if w.len() >= k {
            let fixed = self.fixed_sum(w);
            let tail = dense_index(self.sft.size(), &w[w.len() - k..]);
            WordSumBounds {
                sup: fixed + self.overhang_max[tail],
                inf: fixed + self.overhang_min[tail],
            }
        } else {
            self.short_word_bounds(w)
        }
    }

    /// Words shorter than `d - 1`: search the admissible extensions directly.
    fn short_word_bounds(&self, w: &[usize]) -> WordSumBounds {
        let target = w.len() + self.depth - 1;
        let mut stack = w.to_vec();
        let mut bounds = WordSumBounds {
            sup: f64::NEG_INFINITY,
            inf: f64::INFINITY,
        };
        self.extend_for_bounds(&mut stack, target, w.len(), &mut bounds);
        bounds
    }

    fn extend_for_bounds(&self, stack: &mut Vec<usize>, target: usize, n: usize, acc: &mut WordSumBounds) {
        if stack.len() == target {
            let s: f64 = (0..n).map(|k| self.value(&stack[k..k + self.depth])).sum();
            acc.sup = acc.sup.max(s);
            acc.inf = acc.inf.min(s);
            return;
        }
        let last = *stack.last().unwrap();
        for c in self.sft.successors(last) {
            stack.push(c);
            self.extend_for_bounds(stack, target, n, acc);
            stack.pop();
        }
    }

    /// `(sup, inf)` of the `d - 1` terms that overhang a word ending in the `(d-1)`-word `tail`.
    pub(crate) fn overhang_bounds(&self, tail: &[usize]) -> (f64, f64) {
        debug_assert_eq!(tail.len(), self.depth - 1);
        let i = dense_index(self.sft.size(), tail);
        (self.overhang_max[i], self.overhang_min[i])
    }

    /// The distortion constant `V_f`: the largest spread of `S_n f` over a cylinder of length `n`.
    pub fn distortion_constant(&self) -> f64 {
        let k = self.depth - 1;
        if k == 0 {
            return 0.0;
        }
        let n = self.sft.size();
        let mut v = 0.0f64;
        for block in self.sft.enumerate_words(k).expect("depth already capped") {
            let i = dense_index(n, &block);
            v = v.max(self.overhang_max[i] - self.overhang_min[i]);
        }
        for len in 1..k {
            for w in self.sft.enumerate_words(len).expect("depth already capped") {
                let b = self.short_word_bounds(&w);
                v = v.max(b.sup - b.inf);
            }
        }
        v
    }

    /// The metric `d_ψ(ξ, ξ') = exp(-S_{ξ∧ξ'} ψ)` for points given by prefixes
    /// that already separate them.
    pub fn d_psi(&self, p1: &[usize], p2: &[usize]) -> Result<f64> {
        self.require_positive("ψ")?;
        self.sft.require_admissible(p1)?;
        self.sft.require_admissible(p2)?;
        let common = p1.iter().zip(p2).take_while(|(a, b)| a == b).count();
        if common == p1.len() || common == p2.len() {
            return Err(Error::Indeterminate(
                "prefixes do not separate the points; the common block is not a proper prefix of both".into(),
            ));
        }
        Ok((-self.word_sum_bounds_unchecked(&p1[..common]).sup).exp())
    }

    /// `d_ψ`-diameter of the cylinder `[ω]`.
    pub fn cylinder_diam_psi(&self, w: &[usize]) -> Result<f64> {
        self.require_positive("ψ")?;
        self.sft.require_admissible(w)?;
        let n = self.sft.size();
        if w.is_empty() {
            return Ok(if n >= 2 { 1.0 } else { 0.0 });
        }
        let mut cur = w.to_vec();
        for _ in 0..=n {
            let last = *cur.last().unwrap();
            let mut succ = self.sft.successors(last);
            let first = succ.next().expect("rows are non-empty");
            if succ.next().is_some() {
                return Ok((-self.word_sum_bounds_unchecked(&cur).sup).exp());
            }
            cur.push(first);
        }
        // Only forced continuations: the cylinder is a single point.
        Ok(0.0)
    }
}
