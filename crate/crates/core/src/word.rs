//! Symbolic addresses of basic cubes and finite unions of them.
//!
//! A [`Word`] `i1 i2 ... in` names the basic cube `S_i1 ∘ ... ∘ S_in (K)`; the
//! empty word names `K` itself. Under strong separation two cubes are either
//! nested (one word is a prefix of the other) or disjoint, so a finite union
//! of cubes is represented without loss by an antichain of words, [`CellSet`].

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{FmlError, Result};

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// Largest alphabet that has a single-character textual form.
pub const MAX_TEXT_ARITY: usize = DIGITS.len();

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn root() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from raw symbols, checking each against `arity`.
    pub fn from_symbols(symbols: &[usize], arity: usize) -> Result<Self> {
        let mut packed = Vec::with_capacity(symbols.len());
        for &symbol in symbols {
            if symbol >= arity || symbol > u8::MAX as usize {
                return Err(FmlError::InvalidSymbol { symbol, arity });
            }
            packed.push(symbol as u8);
        }
        Ok(Word(packed))
    }

    pub(crate) fn from_symbols_unchecked(symbols: &[u8]) -> Self {
        Word(symbols.to_vec())
    }

    /// Parses the textual form: one base-36 digit per symbol. `""` and `"-"`
    /// both denote the root.
    pub fn parse(text: &str, arity: usize) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() || text == "-" {
            return Ok(Word::root());
        }
        let mut symbols = Vec::with_capacity(text.len());
        for ch in text.chars() {
            let digit = ch
                .to_digit(36)
                .ok_or_else(|| FmlError::WordParse(text.to_string()))?;
            symbols.push(digit as usize);
        }
        Word::from_symbols(&symbols, arity)
    }

    /// Leaf `index` at `depth`, reading the index as a base-`arity` numeral.
    pub fn from_index(mut index: usize, depth: usize, arity: usize) -> Self {
        let mut symbols = vec![0u8; depth];
        for slot in symbols.iter_mut().rev() {
            *slot = (index % arity) as u8;
            index /= arity;
        }
        Word(symbols)
    }

    /// Inverse of [`Word::from_index`].
    pub fn index(&self, arity: usize) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &s| acc * arity + s as usize)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_arity(&self, arity: usize) -> Result<()> {
        match self.0.iter().find(|&&s| s as usize >= arity) {
            Some(&s) => Err(FmlError::InvalidSymbol {
                symbol: s as usize,
                arity,
            }),
            None => Ok(()),
        }
    }

    /// The ancestor of depth `k` (the word truncated to `k` symbols).
    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k.min(self.0.len())].to_vec())
    }

    pub fn parent(&self) -> Option<Word> {
        if self.is_root() {
            None
        } else {
            Some(self.prefix(self.len() - 1))
        }
    }

    pub fn child(&self, symbol: u8) -> Word {
        let mut symbols = Vec::with_capacity(self.0.len() + 1);
        symbols.extend_from_slice(&self.0);
        symbols.push(symbol);
        Word(symbols)
    }

    pub fn concat(&self, tail: &Word) -> Word {
        let mut symbols = self.0.clone();
        symbols.extend_from_slice(&tail.0);
        Word(symbols)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Nested or equal cubes; the negation is "incomparable".
    pub fn is_comparable(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// All words of length `depth`, in lexicographic (= index) order.
    pub fn all_of_depth(depth: usize, arity: usize) -> impl Iterator<Item = Word> {
        let count = arity.pow(depth as u32);
        (0..count).map(move |i| Word::from_index(i, depth, arity))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            write!(f, "{}", DIGITS[s as usize] as char)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            f.write_str("Word(ε)")
        } else {
            write!(f, "Word({self})")
        }
    }
}

/// Shorter words first, then lexicographic by symbols.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A finite union of basic cubes, held as a canonical antichain.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct CellSet {
    cells: Vec<Word>,
}

impl CellSet {
    pub fn empty() -> Self {
        CellSet { cells: Vec::new() }
    }

    pub fn whole() -> Self {
        CellSet {
            cells: vec![Word::root()],
        }
    }

    /// Reduces an arbitrary list of cubes to the maximal ones: whenever one
    /// word is a prefix of another only the shorter survives. The union of
    /// cubes is unchanged.
    pub fn disjointify<I: IntoIterator<Item = Word>>(words: I) -> Self {
        // In plain lexicographic order a prefix sorts directly before the
        // words it contains.
        let mut raw: Vec<Vec<u8>> = words.into_iter().map(|w| w.0).collect();
        raw.sort_unstable();
        raw.dedup();
        let mut kept: Vec<Vec<u8>> = Vec::with_capacity(raw.len());
        for word in raw {
            if let Some(last) = kept.last() {
                if word.starts_with(last) {
                    continue;
                }
            }
            kept.push(word);
        }
        let mut cells: Vec<Word> = kept.into_iter().map(Word).collect();
        cells.sort_unstable();
        CellSet { cells }
    }

    /// Like [`CellSet::disjointify`] but validates every symbol first.
    pub fn disjointify_checked<I: IntoIterator<Item = Word>>(words: I, arity: usize) -> Result<Self> {
        let words: Vec<Word> = words.into_iter().collect();
        for w in &words {
            w.check_arity(arity)?;
        }
        Ok(Self::disjointify(words))
    }

    /// Accepts the words only if they are already pairwise incomparable.
    /// Duplicates are treated as comparable.
    pub fn from_antichain<I: IntoIterator<Item = Word>>(words: I, arity: usize) -> Result<Self> {
        let mut raw: Vec<Word> = words.into_iter().collect();
        for w in &raw {
            w.check_arity(arity)?;
        }
        raw.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        for pair in raw.windows(2) {
            if pair[0].is_prefix_of(&pair[1]) {
                return Err(FmlError::NotAntichain(
                    pair[0].to_string(),
                    pair[1].to_string(),
                ));
            }
        }
        raw.sort_unstable();
        Ok(CellSet { cells: raw })
    }

    /// The maximal cubes of a union of cubes: prefixes are absorbed and any
    /// complete group of `arity` siblings is merged into its parent.
    pub fn maximal<I: IntoIterator<Item = Word>>(words: I, arity: usize) -> Self {
        let base = Self::disjointify(words);
        if base.cells.is_empty() {
            return base;
        }
        let max_depth = base.max_depth();
        let mut by_depth: Vec<BTreeSet<Vec<u8>>> = vec![BTreeSet::new(); max_depth + 1];
        for w in base.cells {
            by_depth[w.len()].insert(w.0);
        }
        for depth in (1..=max_depth).rev() {
            let level = std::mem::take(&mut by_depth[depth]);
            let mut remaining = BTreeSet::new();
            let mut iter = level.into_iter().peekable();
            while let Some(first) = iter.next() {
                let parent = first[..depth - 1].to_vec();
                let mut group = vec![first];
                while let Some(next) = iter.peek() {
                    if next[..depth - 1] == parent[..] {
                        group.push(iter.next().unwrap());
                    } else {
                        break;
                    }
                }
                if group.len() == arity {
                    by_depth[depth - 1].insert(parent);
                } else {
                    remaining.extend(group);
                }
            }
            by_depth[depth] = remaining;
        }
        Self::disjointify(by_depth.into_iter().flatten().map(Word))
    }

    pub fn cells(&self) -> &[Word] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<Word> {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.cells.iter().map(Word::len).max().unwrap_or(0)
    }

    /// True when the cube `w` lies inside the union.
    pub fn contains_cube(&self, w: &Word) -> bool {
        (0..=w.len()).any(|k| self.cells.binary_search(&w.prefix(k)).is_ok())
    }

    /// True when the cube `w` intersects the union.
    pub fn meets(&self, w: &Word) -> bool {
        self.cells.iter().any(|c| c.is_comparable(w))
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        Self::disjointify(self.cells.iter().chain(other.cells.iter()).cloned())
    }

    pub fn intersection(&self, other: &CellSet) -> CellSet {
        let mut out = Vec::new();
        for a in &self.cells {
            for b in &other.cells {
                if a.is_prefix_of(b) {
                    out.push(b.clone());
                } else if b.is_prefix_of(a) {
                    out.push(a.clone());
                }
            }
        }
        Self::disjointify(out)
    }

    pub fn is_subset_of(&self, other: &CellSet) -> bool {
        self.cells.iter().all(|c| other.contains_cube(c))
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Word> {
        self.cells.iter()
    }
}

impl<'a> IntoIterator for &'a CellSet {
    type Item = &'a Word;
    type IntoIter = std::slice::Iter<'a, Word>;

    fn into_iter(self) -> Self::IntoIter {
        self.cells.iter()
    }
}

/// Prefix trie over the cells of a [`CellSet`]. A node exists exactly for the
/// words that are prefixes of some cell; `terminal` marks the cells.
#[derive(Debug, Clone)]
pub struct CellTrie {
    nodes: Vec<TrieNode>,
}

#[derive(Debug, Clone)]
struct TrieNode {
    terminal: bool,
    children: Vec<(u8, usize)>,
}

pub type NodeId = usize;

impl CellTrie {
    pub const ROOT: NodeId = 0;

    pub fn new(set: &CellSet) -> Self {
        let mut trie = CellTrie {
            nodes: vec![TrieNode {
                terminal: false,
                children: Vec::new(),
            }],
        };
        for cell in set.cells() {
            let mut node = Self::ROOT;
            for &s in cell.symbols() {
                node = match trie.child(node, s) {
                    Some(next) => next,
                    None => {
                        let next = trie.nodes.len();
                        trie.nodes.push(TrieNode {
                            terminal: false,
                            children: Vec::new(),
                        });
                        let kids = &mut trie.nodes[node].children;
                        let pos = kids.partition_point(|&(sym, _)| sym < s);
                        kids.insert(pos, (s, next));
                        next
                    }
                };
            }
            trie.nodes[node].terminal = true;
        }
        trie
    }

    /// Whether the set is empty (the root has no cell below it).
    pub fn is_empty(&self) -> bool {
        !self.nodes[Self::ROOT].terminal && self.nodes[Self::ROOT].children.is_empty()
    }

    pub fn is_terminal(&self, node: NodeId) -> bool {
        self.nodes[node].terminal
    }

    /// Children in increasing symbol order.
    pub fn children(&self, node: NodeId) -> &[(u8, NodeId)] {
        &self.nodes[node].children
    }

    pub fn child(&self, node: NodeId, symbol: u8) -> Option<NodeId> {
        let kids = &self.nodes[node].children;
        kids.binary_search_by_key(&symbol, |&(s, _)| s)
            .ok()
            .map(|i| kids[i].1)
    }

    /// Where the cube `w` sits relative to the union.
    pub fn locate(&self, w: &Word) -> Location {
        let mut node = Self::ROOT;
        for &s in w.symbols() {
            if self.nodes[node].terminal {
                return Location::Inside;
            }
            match self.child(node, s) {
                Some(next) => node = next,
                None => return Location::Disjoint,
            }
        }
        if self.nodes[node].terminal {
            Location::Inside
        } else if self.nodes[node].children.is_empty() {
            // only the empty root can end here
            Location::Disjoint
        } else {
            Location::Partial(node)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// The cube lies in one cell of the union.
    Inside,
    /// The cube strictly contains part of the union; carries its trie node.
    Partial(NodeId),
    Disjoint,
}

impl Location {
    pub fn meets(self) -> bool {
        !matches!(self, Location::Disjoint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 10).unwrap()
    }

    fn set(words: &[&str]) -> CellSet {
        CellSet::disjointify(words.iter().map(|s| w(s)))
    }

    #[test]
    fn disjointify_drops_contained_cubes() {
        assert_eq!(set(&["0", "01", "1"]).cells(), &[w("0"), w("1")]);
    }

    #[test]
    fn disjointify_is_idempotent_on_antichains() {
        let s = set(&["00", "01", "10"]);
        assert_eq!(s.cells(), &[w("00"), w("01"), w("10")]);
        assert_eq!(CellSet::disjointify(s.cells().to_vec()), s);
    }

    #[test]
    fn disjointify_removes_duplicates() {
        assert_eq!(set(&["0", "0"]).cells(), &[w("0")]);
    }

    #[test]
    fn canonical_order_is_depth_then_symbols() {
        let s = set(&["11", "0", "10"]);
        assert_eq!(s.cells(), &[w("0"), w("10"), w("11")]);
    }

    #[test]
    fn invalid_symbols_are_rejected() {
        assert!(Word::parse("012", 2).is_err());
        assert!(CellSet::disjointify_checked(vec![w("3")], 3).is_err());
        assert!(Word::parse("0x", 36).is_ok());
        assert!(Word::parse("0?", 36).is_err());
    }

    #[test]
    fn root_parses_from_empty_and_dash() {
        assert!(Word::parse("", 2).unwrap().is_root());
        assert!(Word::parse("-", 2).unwrap().is_root());
    }

    #[test]
    fn antichain_constructor_rejects_nested_words() {
        let err = CellSet::from_antichain(vec![w("0"), w("01")], 2).unwrap_err();
        assert!(matches!(err, FmlError::NotAntichain(..)));
        assert!(CellSet::from_antichain(vec![w("1"), w("1")], 2).is_err());
        assert!(CellSet::from_antichain(vec![w("1"), w("01")], 2).is_ok());
    }

    #[test]
    fn maximal_merges_complete_sibling_groups() {
        let leaves = Word::all_of_depth(2, 2);
        assert_eq!(CellSet::maximal(leaves, 2), CellSet::whole());
        let partial = CellSet::maximal(vec![w("00"), w("01"), w("10")], 2);
        assert_eq!(partial.cells(), &[w("0"), w("10")]);
        let tern = CellSet::maximal(vec![w("00"), w("01")], 3);
        assert_eq!(tern.cells(), &[w("00"), w("01")]);
    }

    #[test]
    fn index_round_trip() {
        for (i, word) in Word::all_of_depth(3, 3).enumerate() {
            assert_eq!(word.index(3), i);
        }
        assert_eq!(Word::from_index(5, 3, 2), w("101"));
    }

    #[test]
    fn set_algebra() {
        let a = set(&["0", "10"]);
        let b = set(&["01", "1"]);
        assert_eq!(a.union(&b).cells(), &[w("0"), w("1")]);
        assert_eq!(a.intersection(&b).cells(), &[w("01"), w("10")]);
        assert!(set(&["01"]).is_subset_of(&a));
        assert!(!b.is_subset_of(&a));
        assert!(a.contains_cube(&w("011")));
        assert!(a.meets(&w("1")));
        assert!(!a.meets(&w("11")));
    }

    #[test]
    fn trie_locates_cubes() {
        let s = set(&["01", "1"]);
        let trie = CellTrie::new(&s);
        assert_eq!(trie.locate(&w("1")), Location::Inside);
        assert_eq!(trie.locate(&w("110")), Location::Inside);
        assert_eq!(trie.locate(&w("00")), Location::Disjoint);
        assert!(matches!(trie.locate(&w("0")), Location::Partial(_)));
        assert!(matches!(trie.locate(&Word::root()), Location::Partial(_)));
        assert_eq!(CellTrie::new(&CellSet::empty()).locate(&Word::root()), Location::Disjoint);
        assert_eq!(CellTrie::new(&CellSet::whole()).locate(&Word::root()), Location::Inside);
    }
}
