//! Subshifts of finite type: alphabets, incidence matrices and word combinatorics.
//!
//! Symbols are dense indices `0..n`; names are only carried for parsing and
//! printing. All operations here are exact (boolean or integer arithmetic).

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default guard on the number of words any enumeration may materialize.
pub const DEFAULT_WORD_CAP: usize = 10_000_000;

/// A finite word over the dense symbol indices of some [`Sft`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_slice(symbols: &[usize]) -> Self {
        Word(symbols.to_vec())
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// Concatenation `self · other`, without any admissibility check.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, symbol: usize) {
        self.0.push(symbol);
    }

    pub fn extend(&mut self, other: &Word) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// True iff `pattern` occurs as a contiguous subword.
    pub fn contains_subword(&self, pattern: &Word) -> bool {
        if pattern.is_empty() {
            return true;
        }
        self.0.windows(pattern.len()).any(|w| w == pattern.symbols())
    }
}

impl Deref for Word {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl std::borrow::Borrow<[usize]> for Word {
    fn borrow(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    /// Digits when every symbol is below ten, dot-separated indices otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 10) {
            for s in &self.0 {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// Alphabet plus incidence matrix. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sft {
    alphabet: Vec<String>,
    incidence: Vec<Vec<bool>>,
}

impl Sft {
    /// Validates that the table is square, matches the alphabet, has unique
    /// names and that every row has an allowed successor.
    pub fn new(alphabet: Vec<String>, incidence: Vec<Vec<bool>>) -> Result<Self> {
        let n = alphabet.len();
        if n == 0 {
            return Err(Error::validation("alphabet must not be empty"));
        }
        if incidence.len() != n {
            return Err(Error::validation(format!(
                "incidence has {} rows but alphabet has {n} symbols",
                incidence.len()
            )));
        }
        for (i, row) in incidence.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation(format!(
                    "incidence row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if !row.iter().any(|&b| b) {
                return Err(Error::validation(format!(
                    "incidence row of symbol '{}' has no allowed successor",
                    alphabet[i]
                )));
            }
        }
        let mut seen = HashMap::new();
        for (i, name) in alphabet.iter().enumerate() {
            if name.is_empty() || name.contains(|c: char| c.is_whitespace() || c == '.' || c == ',') {
                return Err(Error::validation(format!(
                    "symbol name {name:?} must be non-empty without whitespace, '.' or ','"
                )));
            }
            if let Some(j) = seen.insert(name.clone(), i) {
                return Err(Error::validation(format!(
                    "symbol name {name:?} used for symbols {j} and {i}"
                )));
            }
        }
        Ok(Sft { alphabet, incidence })
    }

    /// Builds a shift from a 0/1 matrix, naming symbols `0`, `1`, ...
    pub fn from_matrix(rows: &[&[u8]]) -> Result<Self> {
        let alphabet = (0..rows.len()).map(|i| i.to_string()).collect();
        let incidence = rows.iter().map(|r| r.iter().map(|&x| x != 0).collect()).collect();
        Sft::new(alphabet, incidence)
    }

    /// Full shift on `n` symbols.
    pub fn full(n: usize) -> Self {
        let alphabet = (0..n).map(|i| i.to_string()).collect();
        Sft::new(alphabet, vec![vec![true; n]; n]).expect("full shift is valid")
    }

    pub fn size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn incidence(&self) -> &[Vec<bool>] {
        &self.incidence
    }

    #[inline]
    pub fn allowed(&self, a: usize, b: usize) -> bool {
        self.incidence[a][b]
    }

    pub fn successors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.incidence[a]
            .iter()
            .enumerate()
            .filter_map(|(b, &ok)| ok.then_some(b))
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|s| s == name)
    }

    fn single_char_names(&self) -> bool {
        self.alphabet.iter().all(|s| s.chars().count() == 1)
    }

    /// Parses a word. Symbols may be separated by whitespace or `.`; without
    /// separators each character is a symbol when all names are one character
    /// long, otherwise the whole token must be a single symbol name.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() || text == "ε" {
            return Ok(Word::empty());
        }
        let lookup = |tok: &str| {
            self.symbol_index(tok)
                .ok_or_else(|| Error::validation(format!("unknown symbol {tok:?}")))
        };
        if text.contains(|c: char| c.is_whitespace() || c == '.') {
            let symbols = text
                .split(|c: char| c.is_whitespace() || c == '.')
                .filter(|t| !t.is_empty())
                .map(lookup)
                .collect::<Result<Vec<_>>>()?;
            return Ok(Word(symbols));
        }
        if self.single_char_names() {
            let symbols = text
                .chars()
                .map(|c| lookup(c.encode_utf8(&mut [0u8; 4])))
                .collect::<Result<Vec<_>>>()?;
            Ok(Word(symbols))
        } else {
            Ok(Word(vec![lookup(text)?]))
        }
    }

    pub fn format_word(&self, w: &Word) -> String {
        let names: Vec<&str> = w.iter().map(|&s| self.alphabet[s].as_str()).collect();
        if self.single_char_names() {
            names.concat()
        } else {
            names.join(".")
        }
    }

    pub(crate) fn check_symbols(&self, w: &[usize]) -> Result<()> {
        match w.iter().find(|&&s| s >= self.size()) {
            Some(s) => Err(Error::validation(format!(
                "symbol index {s} out of range for alphabet of size {}",
                self.size()
            ))),
            None => Ok(()),
        }
    }

    /// Every adjacent pair is allowed. Empty and one-symbol words are admissible.
    pub fn is_admissible(&self, w: &[usize]) -> Result<bool> {
        self.check_symbols(w)?;
        Ok(self.admissible_unchecked(w))
    }

    #[inline]
    pub(crate) fn admissible_unchecked(&self, w: &[usize]) -> bool {
        w.windows(2).all(|p| self.incidence[p[0]][p[1]])
    }

    pub(crate) fn require_admissible(&self, w: &[usize]) -> Result<()> {
        if self.is_admissible(w)? {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "word {} is not admissible",
                Word::from_slice(w)
            )))
        }
    }

    /// `ωω` is admissible.
    pub fn is_cyclically_admissible(&self, w: &[usize]) -> Result<bool> {
        if w.is_empty() {
            return Err(Error::validation(
                "cyclic admissibility is only defined for non-empty words",
            ));
        }
        Ok(self.is_admissible(w)? && self.allowed(w[w.len() - 1], w[0]))
    }

    fn bool_mul(&self, x: &[Vec<bool>], y: &[Vec<bool>]) -> Vec<Vec<bool>> {
        let n = self.size();
        let mut out = vec![vec![false; n]; n];
        for i in 0..n {
            for k in 0..n {
                if x[i][k] {
                    for j in 0..n {
                        out[i][j] |= y[k][j];
                    }
                }
            }
        }
        out
    }

    /// Least `k >= 1` with `A^k` strictly positive, if any within Wielandt's bound.
    fn primitivity_exponent(&self) -> Option<usize> {
        let n = self.size();
        let bound = (n - 1) * (n - 1) + 1;
        let mut power = self.incidence.clone();
        for k in 1..=bound {
            if power.iter().all(|row| row.iter().all(|&b| b)) {
                return Some(k);
            }
            power = self.bool_mul(&power, &self.incidence);
        }
        None
    }

    /// Topological mixing, i.e. primitivity of the incidence matrix.
    pub fn is_mixing(&self) -> bool {
        self.primitivity_exponent().is_some()
    }

    pub(crate) fn require_mixing(&self) -> Result<()> {
        if self.is_mixing() {
            Ok(())
        } else {
            Err(Error::Unsupported(
                "incidence matrix is not primitive (shift is not topologically mixing)".into(),
            ))
        }
    }

    /// Edge distances `dist[x][b]`: fewest transitions from `x` to `b` (at least one).
    fn transition_distances(&self) -> Vec<Vec<Option<usize>>> {
        let n = self.size();
        let mut dist = vec![vec![None; n]; n];
        for b in 0..n {
            // BFS backwards from b over predecessors.
            let mut queue = VecDeque::new();
            for x in 0..n {
                if self.allowed(x, b) {
                    dist[x][b] = Some(1);
                    queue.push_back(x);
                }
            }
            while let Some(y) = queue.pop_front() {
                let d = dist[y][b].unwrap();
                for x in 0..n {
                    if self.allowed(x, y) && dist[x][b].is_none() {
                        dist[x][b] = Some(d + 1);
                        queue.push_back(x);
                    }
                }
            }
        }
        dist
    }

    /// For every pair `(a, b)` the shortest, then lexicographically least,
    /// word `ρ` with `aρb` admissible.
    pub fn connecting_words(&self) -> Result<InfixSet> {
        self.require_mixing()?;
        let n = self.size();
        let dist = self.transition_distances();
        let mut words = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let total = dist[a][b].expect("mixing shift connects every pair");
                let mut rho = Word::empty();
                let mut cur = a;
                for remaining in (1..total).rev() {
                    let next = self
                        .successors(cur)
                        .find(|&c| dist[c][b] == Some(remaining))
                        .expect("distance table is consistent");
                    rho.push(next);
                    cur = next;
                }
                words.push(rho);
            }
        }
        Ok(InfixSet { size: n, words })
    }

    /// Least `m >= 2` such that any two symbols are joined by an admissible
    /// word of length `m` starting and ending with them.
    pub fn mixing_window(&self) -> Result<usize> {
        match self.primitivity_exponent() {
            Some(k) => Ok(k + 1),
            None => Err(Error::Unsupported(
                "mixing window undefined: shift is not topologically mixing".into(),
            )),
        }
    }

    /// Number of admissible words of length `n` (saturating).
    pub fn count_words(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let size = self.size();
        let mut counts = vec![1u128; size];
        for _ in 1..n {
            let mut next = vec![0u128; size];
            for a in 0..size {
                for b in self.successors(a) {
                    next[b] = next[b].saturating_add(counts[a]);
                }
            }
            counts = next;
        }
        counts.into_iter().fold(0u128, |acc, c| acc.saturating_add(c))
    }

    pub fn enumerate_words(&self, n: usize) -> Result<Vec<Word>> {
        self.enumerate_words_capped(n, DEFAULT_WORD_CAP)
    }

    /// All admissible words of length `n`, in lexicographic order.
    pub fn enumerate_words_capped(&self, n: usize, cap: usize) -> Result<Vec<Word>> {
        let count = self.count_words(n);
        if count > cap as u128 {
            return Err(Error::Capacity {
                what: format!("admissible words of length {n}"),
                requested: count,
                cap: cap as u128,
            });
        }
        let mut out = Vec::with_capacity(count as usize);
        if n == 0 {
            out.push(Word::empty());
            return Ok(out);
        }
        let mut stack = Vec::with_capacity(n);
        for a in 0..self.size() {
            stack.push(a);
            self.extend_words(&mut stack, n, &mut out);
            stack.pop();
        }
        Ok(out)
    }

    fn extend_words(&self, stack: &mut Vec<usize>, n: usize, out: &mut Vec<Word>) {
        if stack.len() == n {
            out.push(Word(stack.clone()));
            return;
        }
        let last = *stack.last().unwrap();
        for b in self.successors(last) {
            stack.push(b);
            self.extend_words(stack, n, out);
            stack.pop();
        }
    }

    /// `ω^l`; `ω^0` is the empty word. For `l >= 2` the word must be cyclically admissible.
    pub fn word_power(&self, w: &Word, l: usize) -> Result<Word> {
        self.require_admissible(w)?;
        if l >= 2 && !w.is_empty() && !self.is_cyclically_admissible(w)? {
            return Err(Error::validation(format!(
                "{} is not cyclically admissible, so its powers are not admissible",
                self.format_word(w)
            )));
        }
        let mut out = Word(Vec::with_capacity(w.len() * l));
        for _ in 0..l {
            out.extend(w);
        }
        Ok(out)
    }

    /// Recodes the shift so that blocks of `d - 1` symbols become single
    /// symbols; depth-`d` potentials then become depth-2 potentials.
    pub fn higher_block_recode(&self, d: usize) -> Result<BlockRecoding> {
        self.higher_block_recode_capped(d, DEFAULT_WORD_CAP)
    }

    pub fn higher_block_recode_capped(&self, d: usize, cap: usize) -> Result<BlockRecoding> {
        if d < 2 {
            return Err(Error::validation("block recoding needs depth d >= 2"));
        }
        self.require_mixing()?;
        let blocks = self.enumerate_words_capped(d - 1, cap)?;
        let index: HashMap<Word, usize> = blocks.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let incidence = blocks
            .iter()
            .map(|u| {
                blocks
                    .iter()
                    .map(|v| u[1..] == v[..v.len() - 1] && self.allowed(u[u.len() - 1], v[v.len() - 1]))
                    .collect()
            })
            .collect();
        let alphabet = if d == 2 {
            self.alphabet.clone()
        } else {
            blocks
                .iter()
                .map(|b| {
                    b.iter()
                        .map(|&s| self.alphabet[s].as_str())
                        .collect::<Vec<_>>()
                        .join("_")
                })
                .collect()
        };
        let spec = Sft::new(alphabet, incidence)?;
        Ok(BlockRecoding {
            depth: d,
            spec,
            blocks,
            index,
        })
    }
}

/// Connecting words: for each ordered pair `(a, b)` a word `ρ` with `aρb` admissible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfixSet {
    size: usize,
    words: Vec<Word>,
}

impl InfixSet {
    pub fn get(&self, a: usize, b: usize) -> &Word {
        &self.words[a * self.size + b]
    }

    /// `‖R‖`, the longest stored connecting word.
    pub fn norm(&self) -> usize {
        self.words.iter().map(|w| w.len()).max().unwrap_or(0)
    }

    /// Distinct stored words ordered by length, then lexicographically.
    pub fn distinct(&self) -> Vec<Word> {
        let mut v = self.words.clone();
        v.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
        v.dedup();
        v
    }

    /// `u ρ v` with the stored connecting word for the junction. Empty sides join directly.
    pub fn join(&self, u: &Word, v: &Word) -> Word {
        match (u.last(), v.first()) {
            (Some(a), Some(b)) => {
                let mut out = u.concat(self.get(a, b));
                out.extend(v);
                out
            }
            _ => u.concat(v),
        }
    }
}

/// Result of [`Sft::higher_block_recode`]: the block shift and the translation maps.
#[derive(Debug, Clone)]
pub struct BlockRecoding {
    depth: usize,
    spec: Sft,
    blocks: Vec<Word>,
    index: HashMap<Word, usize>,
}

impl BlockRecoding {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn spec(&self) -> &Sft {
        &self.spec
    }

    /// The `(d-1)`-word of the original shift represented by each new symbol.
    pub fn blocks(&self) -> &[Word] {
        &self.blocks
    }

    pub fn block_index(&self, block: &[usize]) -> Option<usize> {
        self.index.get(block).copied()
    }

    /// Sliding-window translation of an admissible word of length `n >= d-1`
    /// into a block word of length `n - d + 2`.
    pub fn encode(&self, w: &Word) -> Result<Word> {
        let k = self.depth - 1;
        if w.len() < k {
            return Err(Error::InsufficientContext {
                needed: k,
                got: w.len(),
            });
        }
        w.windows(k)
            .map(|win| {
                self.block_index(win)
                    .ok_or_else(|| Error::validation(format!("{} is not admissible", Word::from_slice(w))))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// Inverse of [`encode`](Self::encode) on admissible block words.
    pub fn decode(&self, w: &Word) -> Result<Word> {
        self.spec.require_admissible(w)?;
        let Some(first) = w.first() else {
            return Ok(Word::empty());
        };
        let mut out = self.blocks[first].clone();
        for &b in &w[1..] {
            out.push(self.blocks[b].last().unwrap());
        }
        Ok(out)
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn admissibility_examples() {
        let g = gold();
        assert!(!g.is_admissible(&w("11")).unwrap());
        assert!(g.is_admissible(&w("010")).unwrap());
        assert!(g.is_admissible(&[]).unwrap());
        assert!(matches!(g.is_admissible(&[0, 2]), Err(Error::Validation(_))));
    }

    #[test]
    fn cyclic_admissibility() {
        let g = gold();
        assert!(!g.is_cyclically_admissible(&w("1")).unwrap());
        assert!(g.is_cyclically_admissible(&w("01")).unwrap());
        assert!(full2().is_cyclically_admissible(&w("0110")).unwrap());
        assert!(g.is_cyclically_admissible(&[]).is_err());
    }

    #[test]
    fn mixing() {
        assert!(full2().is_mixing());
        assert!(gold().is_mixing());
        let flip = Sft::from_matrix(&[&[0, 1], &[1, 0]]).unwrap();
        assert!(!flip.is_mixing());
        assert!(matches!(flip.connecting_words(), Err(Error::Unsupported(_))));
        assert!(matches!(flip.mixing_window(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn connecting_words_examples() {
        let r = full2().connecting_words().unwrap();
        assert_eq!(r.norm(), 0);
        let r = gold().connecting_words().unwrap();
        assert_eq!(r.get(1, 1), &w("0"));
        assert!(r.get(0, 1).is_empty());
        assert_eq!(r.norm(), 1);
    }

    #[test]
    fn mixing_window_examples() {
        assert_eq!(full2().mixing_window().unwrap(), 2);
        assert_eq!(gold().mixing_window().unwrap(), 3);
        let one = Sft::from_matrix(&[&[1]]).unwrap();
        assert_eq!(one.mixing_window().unwrap(), 2);
    }

    #[test]
    fn enumeration_examples() {
        let g = gold();
        assert_eq!(g.enumerate_words(2).unwrap(), vec![w("00"), w("01"), w("10")]);
        assert_eq!(full2().enumerate_words(3).unwrap().len(), 8);
        assert_eq!(g.enumerate_words(5).unwrap().len(), 13);
        assert!(matches!(
            full2().enumerate_words_capped(20, 1000),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn fibonacci_counts_match_brute_force() {
        let g = gold();
        for n in 0..=12 {
            let brute = (0..1usize << n)
                .filter(|bits| {
                    let word: Vec<usize> = (0..n).map(|i| (bits >> i) & 1).collect();
                    g.is_admissible(&word).unwrap()
                })
                .count();
            assert_eq!(g.enumerate_words(n).unwrap().len(), brute, "n = {n}");
            assert_eq!(g.count_words(n), brute as u128);
        }
    }

    #[test]
    fn powers() {
        let g = gold();
        assert_eq!(g.word_power(&w("01"), 3).unwrap(), w("010101"));
        assert_eq!(g.word_power(&w("01"), 0).unwrap(), Word::empty());
        assert!(g.word_power(&w("1"), 2).is_err());
    }

    #[test]
    fn block_recoding() {
        let f = full2();
        let r = f.higher_block_recode(2).unwrap();
        assert_eq!(r.spec(), &f);

        let g = gold();
        let r = g.higher_block_recode(3).unwrap();
        assert_eq!(r.spec().size(), 3);
        let edges: usize = r
            .spec()
            .incidence()
            .iter()
            .map(|row| row.iter().filter(|&&b| b).count())
            .sum();
        assert_eq!(edges, 5);
        for word in g.enumerate_words(6).unwrap() {
            let code = r.encode(&word).unwrap();
            assert!(r.spec().is_admissible(&code).unwrap());
            assert_eq!(r.decode(&code).unwrap(), word);
        }
        for code in r.spec().enumerate_words(4).unwrap() {
            assert_eq!(r.encode(&r.decode(&code).unwrap()).unwrap(), code);
        }
    }

    #[test]
    fn recoding_preserves_counts() {
        let s = Sft::from_matrix(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]]).unwrap();
        for d in 2..=4 {
            let r = s.higher_block_recode(d).unwrap();
            for n in (d - 1)..=9 {
                assert_eq!(s.count_words(n), r.spec().count_words(n + 2 - d));
            }
        }
    }

    #[test]
    fn parse_and_format() {
        let g = gold();
        assert_eq!(g.parse_word("010").unwrap(), w("010"));
        assert_eq!(g.parse_word("0.1 0").unwrap(), w("010"));
        assert_eq!(g.format_word(&w("0110")), "0110");
        assert!(g.parse_word("012").is_err());
        let named = Sft::new(vec!["ab".into(), "c".into()], vec![vec![true; 2]; 2]).unwrap();
        assert_eq!(named.parse_word("ab.c.ab").unwrap(), w("010"));
        assert_eq!(named.format_word(&w("01")), "ab.c");
    }

    fn random_mixing_sft() -> impl Strategy<Value = Sft> {
        (2usize..=4)
            .prop_flat_map(|n| proptest::collection::vec(proptest::bool::weighted(0.6), n * n))
            .prop_filter_map("needs a mixing shift", |bits| {
                let n = (bits.len() as f64).sqrt() as usize;
                let rows: Vec<Vec<bool>> = bits.chunks(n).map(|c| c.to_vec()).collect();
                let s = Sft::new((0..n).map(|i| i.to_string()).collect(), rows).ok()?;
                s.is_mixing().then_some(s)
            })
    }

    proptest! {
        #[test]
        fn connecting_words_connect(s in random_mixing_sft()) {
            let r = s.connecting_words().unwrap();
            for a in 0..s.size() {
                for b in 0..s.size() {
                    let mut word = vec![a];
                    word.extend_from_slice(r.get(a, b));
                    word.push(b);
                    prop_assert!(s.is_admissible(&word).unwrap());
                }
            }
        }

        #[test]
        fn junction_decides_concatenation(s in random_mixing_sft(), n1 in 1usize..5, n2 in 1usize..5) {
            let left = s.enumerate_words(n1).unwrap();
            let right = s.enumerate_words(n2).unwrap();
            for u in left.iter().take(6) {
                for v in right.iter().take(6) {
                    let joined = u.concat(v);
                    prop_assert_eq!(
                        s.is_admissible(&joined).unwrap(),
                        s.allowed(u.last().unwrap(), v.first().unwrap())
                    );
                }
            }
        }
    }
}
