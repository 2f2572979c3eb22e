//! Configurations in `A^G`, the shift action and periodic parts.
//!
//! Three finite descriptions are supported: periodic words on a fundamental
//! domain, Toeplitz coset tables (assignments per chain level, possibly
//! partial) and bounded oracles that evaluate a builtin rule on a box and
//! answer `None` (unknown) outside it.
//!
//! Periodic configurations and Toeplitz tables are *exact*: every set derived
//! from them is a union of cosets and is returned as a [`CosetSet`].

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::groups::{FiniteSubset, GroupElement, SubgroupChain};
use crate::rational::{ratio, Rational};

/// Index of a letter in its [`Alphabet`].
pub type Letter = u16;

/// Ordered list of distinct letter names with the discrete 0/1 metric.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    letters: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(letters: I) -> Result<Self> {
        let letters: Vec<String> = letters.into_iter().map(Into::into).collect();
        if letters.is_empty() || letters.len() > Letter::MAX as usize {
            return Err(Error::InvalidAlphabet);
        }
        for (i, a) in letters.iter().enumerate() {
            if letters[..i].contains(a) {
                return Err(Error::InvalidAlphabet);
            }
        }
        Ok(Alphabet { letters })
    }

    /// `{"0", "1"}`.
    pub fn binary() -> Self {
        Alphabet::of_size(2)
    }

    /// `{"0", ..., "k-1"}`.
    pub fn of_size(k: usize) -> Self {
        Alphabet::new((0..k.max(1)).map(|i| i.to_string())).expect("distinct digits")
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn name(&self, letter: Letter) -> &str {
        &self.letters[letter as usize]
    }

    pub fn index_of(&self, name: &str) -> Result<Letter> {
        self.letters
            .iter()
            .position(|l| l == name)
            .map(|i| i as Letter)
            .ok_or_else(|| Error::UnknownLetter(name.to_string()))
    }

    /// This alphabet followed by the letters of `other` not already present.
    pub fn union(&self, other: &Alphabet) -> Alphabet {
        let mut letters = self.letters.clone();
        for l in &other.letters {
            if !letters.contains(l) {
                letters.push(l.clone());
            }
        }
        Alphabet { letters }
    }

    /// Maps each letter of `self` to the letter of `target` with the same name.
    pub fn translation(&self, target: &Alphabet) -> Vec<Option<Letter>> {
        self.letters.iter().map(|l| target.index_of(l).ok()).collect()
    }

    /// Discrete metric.
    pub fn distance(a: Letter, b: Letter) -> u32 {
        u32::from(a != b)
    }
}

/// A configuration that repeats a word along `H_level`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicConfig {
    chain: SubgroupChain,
    level: usize,
    alphabet: Alphabet,
    word: Vec<Letter>,
}

impl PeriodicConfig {
    /// `word[i]` is the value on the coset of the `i`-th element of `F_level`
    /// in canonical order.
    pub fn new(chain: SubgroupChain, level: usize, alphabet: Alphabet, word: Vec<Letter>) -> Result<Self> {
        chain.check_level(level)?;
        let expected = chain.domain_size(level);
        if word.len() != expected {
            return Err(Error::WordLength { expected, found: word.len() });
        }
        if let Some(&bad) = word.iter().find(|&&l| l as usize >= alphabet.len()) {
            return Err(Error::UnknownLetter(bad.to_string()));
        }
        Ok(PeriodicConfig { chain, level, alphabet, word })
    }

    pub fn from_fn<F: FnMut(&GroupElement) -> Letter>(
        chain: SubgroupChain,
        level: usize,
        alphabet: Alphabet,
        mut rule: F,
    ) -> Result<Self> {
        let word = chain.domain(level)?.iter().map(&mut rule).collect();
        PeriodicConfig::new(chain, level, alphabet, word)
    }

    pub fn chain(&self) -> &SubgroupChain {
        &self.chain
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn word(&self) -> &[Letter] {
        &self.word
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
}

/// A (possibly partial) Toeplitz coset table.
///
/// `levels[n][i]` is the letter assigned to the coset `H_n + f_i`, where
/// `f_i` is the `i`-th element of `F_n`. The table is kept resolved at its
/// top level: for every cell of `F_top`, the letter (if any) and the
/// shallowest level that assigns it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToeplitzTable {
    chain: SubgroupChain,
    alphabet: Alphabet,
    levels: Vec<Vec<Option<Letter>>>,
    resolved: Vec<Option<(Letter, u8)>>,
}

impl ToeplitzTable {
    /// Builds a table from `(level, representative, letter)` triples.
    /// Representatives are reduced into `F_level`.
    pub fn new<I>(chain: SubgroupChain, alphabet: Alphabet, assignments: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, GroupElement, Letter)>,
    {
        let triples: Vec<(usize, GroupElement, Letter)> = assignments.into_iter().collect();
        let top = triples.iter().map(|t| t.0).max().unwrap_or(0);
        chain.check_level(top)?;
        let mut levels: Vec<Vec<Option<Letter>>> = (0..=top).map(|n| vec![None; chain.domain_size(n)]).collect();
        for (level, rep, letter) in triples {
            if letter as usize >= alphabet.len() {
                return Err(Error::UnknownLetter(letter.to_string()));
            }
            let rep = chain.coset_rep(&rep, level)?;
            let slot = &mut levels[level][chain.rep_index(&rep, level)];
            match slot {
                Some(existing) if *existing != letter => {
                    return Err(Error::ConflictingAssignment { level, rep: rep.to_string() })
                }
                _ => *slot = Some(letter),
            }
        }
        ToeplitzTable::from_levels(chain, alphabet, levels)
    }

    /// Builds a table from dense per-level assignments.
    pub fn from_levels(chain: SubgroupChain, alphabet: Alphabet, mut levels: Vec<Vec<Option<Letter>>>) -> Result<Self> {
        if levels.is_empty() {
            levels.push(vec![None]);
        }
        while levels.len() > 1 && levels.last().is_some_and(|l| l.iter().all(Option::is_none)) {
            levels.pop();
        }
        let top = levels.len() - 1;
        chain.check_level(top)?;
        for (n, row) in levels.iter().enumerate() {
            let expected = chain.domain_size(n);
            if row.len() != expected {
                return Err(Error::WordLength { expected, found: row.len() });
            }
            if let Some(bad) = row.iter().flatten().find(|&&l| l as usize >= alphabet.len()) {
                return Err(Error::UnknownLetter(bad.to_string()));
            }
        }
        let mut resolved: Vec<Option<(Letter, u8)>> = vec![None; chain.domain_size(top)];
        for (n, row) in levels.iter().enumerate() {
            for (i, cell) in row.iter().enumerate() {
                let Some(letter) = *cell else { continue };
                for p in chain.lift_positions(n, i, top) {
                    match resolved[p] {
                        None => resolved[p] = Some((letter, n as u8)),
                        Some((existing, _)) if existing != letter => {
                            return Err(Error::ConflictingAssignment {
                                level: n,
                                rep: chain.element_at(n, i).to_string(),
                            })
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        Ok(ToeplitzTable { chain, alphabet, levels, resolved })
    }

    pub fn chain(&self) -> &SubgroupChain {
        &self.chain
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Deepest level carrying an assignment.
    pub fn top_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Vec<Option<Letter>>] {
        &self.levels
    }

    /// All assignments as `(level, representative, letter)` in level order.
    pub fn assignments(&self) -> Vec<(usize, GroupElement, Letter)> {
        let mut out = Vec::new();
        for (n, row) in self.levels.iter().enumerate() {
            for (i, cell) in row.iter().enumerate() {
                if let Some(letter) = cell {
                    out.push((n, self.chain.element_at(n, i), *letter));
                }
            }
        }
        out
    }

    /// Letter and shallowest assigning level at each cell of `F_top`.
    pub fn resolved(&self) -> &[Option<(Letter, u8)>] {
        &self.resolved
    }

    /// True when every cell of `F_top` is assigned, so the table defines a
    /// point of `A^G`.
    pub fn is_total(&self) -> bool {
        self.resolved.iter().all(Option::is_some)
    }

    /// Shallowest level at which `g` is assigned.
    pub fn period_level(&self, g: &GroupElement) -> Option<usize> {
        self.resolved[self.chain.rep_index(g, self.top_level())].map(|(_, n)| n as usize)
    }

    fn evaluate(&self, g: &GroupElement) -> Option<Letter> {
        self.resolved[self.chain.rep_index(g, self.top_level())].map(|(l, _)| l)
    }

    fn shift(&self, h: &GroupElement) -> ToeplitzTable {
        let chain = &self.chain;
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(n, row)| {
                (0..row.len())
                    .map(|i| row[chain.rep_index_offset(chain.element_at(n, i).coords(), h.coords(), n)])
                    .collect()
            })
            .collect();
        ToeplitzTable::from_levels(self.chain.clone(), self.alphabet.clone(), levels)
            .expect("shift preserves consistency")
    }
}

/// Builtin oracle rules.
#[derive(Clone)]
pub enum OracleRule {
    /// Concatenated binary expansions `1 10 11 100 ...` on `g >= 0`, `0` on
    /// `g < 0`. Rank 1 only.
    ChampernowneBinary,
    /// `1` on `F_1` and on `F_{2n+1} \ F_{2n}`, `0` elsewhere, for nested boxes
    /// `F_n = [0, L_n)` with lengths growing by the ratio `1 / (1 - eps)`.
    /// Rank 1 only.
    BlockAlternating { eps: Rational, lengths: Arc<Vec<i64>> },
    /// Sum of coordinates mod 2.
    Parity,
    Custom(Arc<dyn Fn(&GroupElement) -> Letter + Send + Sync>),
}

impl fmt::Debug for OracleRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleRule::ChampernowneBinary => write!(f, "champernowne_binary"),
            OracleRule::BlockAlternating { eps, .. } => write!(f, "block_alternating({eps})"),
            OracleRule::Parity => write!(f, "parity"),
            OracleRule::Custom(_) => write!(f, "custom"),
        }
    }
}

impl PartialEq for OracleRule {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (OracleRule::ChampernowneBinary, OracleRule::ChampernowneBinary) => true,
            (OracleRule::Parity, OracleRule::Parity) => true,
            (OracleRule::BlockAlternating { eps: a, .. }, OracleRule::BlockAlternating { eps: b, .. }) => a == b,
            (OracleRule::Custom(a), OracleRule::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl OracleRule {
    /// Parses `champernowne_binary`, `parity` or `block_alternating(p/q)`.
    /// `radius` bounds the boxes that `block_alternating` has to generate.
    pub fn parse(name: &str, radius: u64) -> Result<OracleRule> {
        let name = name.trim();
        match name {
            "champernowne_binary" => return Ok(OracleRule::ChampernowneBinary),
            "parity" => return Ok(OracleRule::Parity),
            _ => {}
        }
        if let Some(arg) = name.strip_prefix("block_alternating(").and_then(|r| r.strip_suffix(')')) {
            let eps = crate::rational::parse_rational(arg)?;
            return OracleRule::block_alternating(eps, radius);
        }
        Err(Error::UnknownRule(name.to_string()))
    }

    pub fn block_alternating(eps: Rational, radius: u64) -> Result<OracleRule> {
        let mut count = 2;
        loop {
            let lengths = crate::groups::geometric_lengths(&eps, count)?;
            if *lengths.last().unwrap() > radius as i64 + 1 {
                return Ok(OracleRule::BlockAlternating { eps, lengths: Arc::new(lengths) });
            }
            count += 1;
        }
    }

    fn apply(&self, g: &GroupElement) -> Letter {
        match self {
            OracleRule::ChampernowneBinary => champernowne_bit(g.coords()[0]),
            OracleRule::BlockAlternating { lengths, .. } => {
                let p = g.coords()[0];
                if p < 0 {
                    return 0;
                }
                // Smallest n with p < L_n.
                let n = lengths.partition_point(|&l| l <= p);
                Letter::from(n <= 1 || n % 2 == 1)
            }
            OracleRule::Parity => g.coords().iter().sum::<i64>().rem_euclid(2) as Letter,
            OracleRule::Custom(f) => f(g),
        }
    }
}

fn champernowne_bit(p: i64) -> Letter {
    if p < 0 {
        return 0;
    }
    let mut offset = p as u128;
    let mut width: u32 = 1;
    loop {
        let block = (width as u128) << (width - 1);
        if offset < block {
            let number = (1u128 << (width - 1)) + offset / width as u128;
            let bit = width - 1 - (offset % width as u128) as u32;
            return ((number >> bit) & 1) as Letter;
        }
        offset -= block;
        width += 1;
    }
}

/// Evaluates a rule on the box `[-radius, radius]^rank`, shifted by `offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    rank: usize,
    radius: u64,
    offset: GroupElement,
    rule: OracleRule,
    alphabet: Alphabet,
}

impl OracleConfig {
    pub fn new(rank: usize, radius: u64, rule: OracleRule, alphabet: Alphabet) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidRank);
        }
        if rank != 1 && matches!(rule, OracleRule::ChampernowneBinary | OracleRule::BlockAlternating { .. }) {
            return Err(Error::RankMismatch { expected: 1, found: rank });
        }
        Ok(OracleConfig { rank, radius, offset: GroupElement::zero(rank), rule, alphabet })
    }

    /// Binary-alphabet oracle for one of the builtin rules.
    pub fn builtin(rank: usize, radius: u64, rule: OracleRule) -> Result<Self> {
        OracleConfig::new(rank, radius, rule, Alphabet::binary())
    }

    pub fn radius(&self) -> u64 {
        self.radius
    }

    pub fn rule(&self) -> &OracleRule {
        &self.rule
    }

    fn evaluate(&self, g: &GroupElement) -> Option<Letter> {
        let p = g + &self.offset;
        (p.sup_norm() <= self.radius as i64).then(|| self.rule.apply(&p))
    }
}

/// A point of `A^G` given by a finite description.
#[derive(Clone, Debug, PartialEq)]
pub enum Configuration {
    Periodic(PeriodicConfig),
    Toeplitz(ToeplitzTable),
    Oracle(OracleConfig),
}

impl Configuration {
    /// The constant configuration `a^G`, periodic at level 0.
    pub fn constant(chain: SubgroupChain, alphabet: Alphabet, letter: Letter) -> Result<Self> {
        Ok(Configuration::Periodic(PeriodicConfig::new(chain, 0, alphabet, vec![letter])?))
    }

    pub fn periodic(chain: SubgroupChain, level: usize, alphabet: Alphabet, word: Vec<Letter>) -> Result<Self> {
        Ok(Configuration::Periodic(PeriodicConfig::new(chain, level, alphabet, word)?))
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Configuration::Periodic(p) => &p.alphabet,
            Configuration::Toeplitz(t) => &t.alphabet,
            Configuration::Oracle(o) => &o.alphabet,
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Configuration::Periodic(p) => p.chain.rank(),
            Configuration::Toeplitz(t) => t.chain.rank(),
            Configuration::Oracle(o) => o.rank,
        }
    }

    pub fn chain(&self) -> Option<&SubgroupChain> {
        match self {
            Configuration::Periodic(p) => Some(&p.chain),
            Configuration::Toeplitz(t) => Some(&t.chain),
            Configuration::Oracle(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Configuration::Oracle(_))
    }

    /// `x(g)`, or `None` when the description does not determine it.
    pub fn evaluate(&self, g: &GroupElement) -> Option<Letter> {
        match self {
            Configuration::Periodic(p) => Some(p.word[p.chain.rep_index(g, p.level)]),
            Configuration::Toeplitz(t) => t.evaluate(g),
            Configuration::Oracle(o) => o.evaluate(g),
        }
    }

    /// `(h.x)(g) = x(g + h)`.
    pub fn shift(&self, h: &GroupElement) -> Configuration {
        match self {
            Configuration::Periodic(p) => {
                let chain = &p.chain;
                let word = (0..p.word.len())
                    .map(|i| p.word[chain.rep_index_offset(chain.element_at(p.level, i).coords(), h.coords(), p.level)])
                    .collect();
                Configuration::Periodic(PeriodicConfig { word, ..p.clone() })
            }
            Configuration::Toeplitz(t) => Configuration::Toeplitz(t.shift(h)),
            Configuration::Oracle(o) => {
                Configuration::Oracle(OracleConfig { offset: &o.offset + h, ..o.clone() })
            }
        }
    }

    /// The full-period view for exact variants.
    pub fn exact_view(&self) -> Option<ExactView> {
        match self {
            Configuration::Periodic(p) => Some(ExactView {
                chain: p.chain.clone(),
                level: p.level,
                cells: p.word.iter().map(|&l| Some(l)).collect(),
            }),
            Configuration::Toeplitz(t) => Some(ExactView {
                chain: t.chain.clone(),
                level: t.top_level(),
                cells: t.resolved.iter().map(|c| c.map(|(l, _)| l)).collect(),
            }),
            Configuration::Oracle(_) => None,
        }
    }
}

impl From<PeriodicConfig> for Configuration {
    fn from(p: PeriodicConfig) -> Self {
        Configuration::Periodic(p)
    }
}

impl From<ToeplitzTable> for Configuration {
    fn from(t: ToeplitzTable) -> Self {
        Configuration::Toeplitz(t)
    }
}

impl From<OracleConfig> for Configuration {
    fn from(o: OracleConfig) -> Self {
        Configuration::Oracle(o)
    }
}

/// Values of an exact configuration on one period: the value at `g` is
/// `cells[rep_index(g, level)]`, with `None` for unassigned cosets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactView {
    pub chain: SubgroupChain,
    pub level: usize,
    pub cells: Vec<Option<Letter>>,
}

impl ExactView {
    /// The same configuration described on `F_target`, `target >= level`.
    pub fn lift(&self, target: usize) -> ExactView {
        debug_assert!(target >= self.level);
        let cells = (0..self.chain.domain_size(target))
            .map(|i| self.cells[self.chain.project_position(i, target, self.level)])
            .collect();
        ExactView { chain: self.chain.clone(), level: target, cells }
    }

    pub fn get(&self, g: &GroupElement) -> Option<Letter> {
        self.cells[self.chain.rep_index(g, self.level)]
    }
}

/// Membership test that may answer "unknown".
pub trait Membership {
    fn member(&self, g: &GroupElement) -> Option<bool>;
}

impl<F: Fn(&GroupElement) -> Option<bool>> Membership for F {
    fn member(&self, g: &GroupElement) -> Option<bool> {
        self(g)
    }
}

impl Membership for FiniteSubset {
    fn member(&self, g: &GroupElement) -> Option<bool> {
        Some(self.contains(g))
    }
}

/// A union of cosets `H_n + f`, `f` in a subset of `F_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CosetSet {
    chain: SubgroupChain,
    level: usize,
    mask: Vec<bool>,
}

impl CosetSet {
    pub fn new<I: IntoIterator<Item = GroupElement>>(chain: SubgroupChain, level: usize, reps: I) -> Result<Self> {
        chain.check_level(level)?;
        let mut mask = vec![false; chain.domain_size(level)];
        for g in reps {
            let rep = chain.coset_rep(&g, level)?;
            mask[chain.rep_index(&rep, level)] = true;
        }
        Ok(CosetSet { chain, level, mask })
    }

    pub fn from_mask(chain: SubgroupChain, level: usize, mask: Vec<bool>) -> Result<Self> {
        chain.check_level(level)?;
        let expected = chain.domain_size(level);
        if mask.len() != expected {
            return Err(Error::WordLength { expected, found: mask.len() });
        }
        Ok(CosetSet { chain, level, mask })
    }

    pub fn empty(chain: SubgroupChain, level: usize) -> Result<Self> {
        CosetSet::new(chain, level, std::iter::empty())
    }

    pub fn full(chain: SubgroupChain, level: usize) -> Result<Self> {
        chain.check_level(level)?;
        let mask = vec![true; chain.domain_size(level)];
        Ok(CosetSet { chain, level, mask })
    }

    pub fn chain(&self) -> &SubgroupChain {
        &self.chain
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Representatives in `F_level`, canonically ordered.
    pub fn reps(&self) -> Vec<GroupElement> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.chain.element_at(self.level, i))
            .collect()
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// `|reps| / |F_level|`.
    pub fn density(&self) -> Rational {
        ratio(self.count(), self.mask.len())
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.mask[self.chain.rep_index(g, self.level)]
    }

    pub fn complement(&self) -> CosetSet {
        CosetSet { mask: self.mask.iter().map(|m| !m).collect(), ..self.clone() }
    }

    /// The same set described at a deeper level.
    pub fn lift(&self, target: usize) -> Result<CosetSet> {
        self.chain.check_level(target)?;
        if target < self.level {
            return Err(Error::ParameterOutOfRange(format!(
                "cannot lift a level-{} coset set to level {target}",
                self.level
            )));
        }
        let mask = (0..self.chain.domain_size(target))
            .map(|i| self.mask[self.chain.project_position(i, target, self.level)])
            .collect();
        Ok(CosetSet { chain: self.chain.clone(), level: target, mask })
    }

    fn combine(&self, other: &CosetSet, op: impl Fn(bool, bool) -> bool) -> Result<CosetSet> {
        if self.chain != other.chain {
            return Err(Error::ChainMismatch);
        }
        let level = self.level.max(other.level);
        let a = self.lift(level)?;
        let b = other.lift(level)?;
        let mask = a.mask.iter().zip(&b.mask).map(|(&x, &y)| op(x, y)).collect();
        Ok(CosetSet { chain: self.chain.clone(), level, mask })
    }

    pub fn union(&self, other: &CosetSet) -> Result<CosetSet> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &CosetSet) -> Result<CosetSet> {
        self.combine(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &CosetSet) -> Result<CosetSet> {
        self.combine(other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, other: &CosetSet) -> Result<CosetSet> {
        self.combine(other, |a, b| a != b)
    }

    /// Inclusion as sets of group elements.
    pub fn is_subset(&self, other: &CosetSet) -> Result<bool> {
        Ok(self.difference(other)?.is_empty())
    }

    /// Equality as sets of group elements, regardless of describing level.
    pub fn same_elements(&self, other: &CosetSet) -> Result<bool> {
        Ok(self.symmetric_difference(other)?.is_empty())
    }
}

impl Membership for CosetSet {
    fn member(&self, g: &GroupElement) -> Option<bool> {
        Some(self.contains(g))
    }
}

/// Per-set data at one level: cosets confirmed constant (with their letter)
/// and cosets whose constancy the description does not decide.
fn per_cells(x: &Configuration, level: usize) -> Result<(SubgroupChain, Vec<Option<Letter>>, Vec<bool>)> {
    let view = x.exact_view().ok_or(Error::InexactVariant)?;
    let chain = view.chain.clone();
    chain.check_level(level)?;
    let size = chain.domain_size(level);
    if level >= view.level {
        let letters = (0..size).map(|i| view.cells[chain.project_position(i, level, view.level)]).collect::<Vec<_>>();
        let undecided = letters.iter().map(Option::is_none).collect();
        return Ok((chain, letters, undecided));
    }
    let mut letters = vec![None; size];
    let mut undecided = vec![false; size];
    for (i, (letter, open)) in letters.iter_mut().zip(undecided.iter_mut()).enumerate() {
        let mut seen: Option<Letter> = None;
        let mut conflict = false;
        let mut unknown = false;
        for p in chain.lift_positions(level, i, view.level) {
            match (view.cells[p], seen) {
                (None, _) => unknown = true,
                (Some(l), None) => seen = Some(l),
                (Some(l), Some(s)) if l != s => conflict = true,
                _ => {}
            }
            if conflict {
                break;
            }
        }
        if !conflict {
            if unknown {
                *open = true;
            } else {
                *letter = seen;
            }
        }
    }
    Ok((chain, letters, undecided))
}

/// `Per_{H_n}(x)`: cosets of `H_n` on which `x` is confirmed constant.
/// Cosets that a partial table leaves undecided are excluded; see
/// [`per_set_undecided`].
pub fn per_set(x: &Configuration, level: usize) -> Result<CosetSet> {
    let (chain, letters, _) = per_cells(x, level)?;
    CosetSet::from_mask(chain, level, letters.iter().map(Option::is_some).collect())
}

/// `Per_{H_n}(x, a)`.
pub fn per_set_letter(x: &Configuration, level: usize, letter: Letter) -> Result<CosetSet> {
    let (chain, letters, _) = per_cells(x, level)?;
    CosetSet::from_mask(chain, level, letters.iter().map(|l| *l == Some(letter)).collect())
}

/// Cosets of `H_n` whose constancy is not decided by a partial table.
pub fn per_set_undecided(x: &Configuration, level: usize) -> Result<CosetSet> {
    let (chain, _, undecided) = per_cells(x, level)?;
    CosetSet::from_mask(chain, level, undecided)
}

/// Pointwise disagreement of two configurations on a finite window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledSet {
    pub window: FiniteSubset,
    /// `Some(true)` where the configurations differ, `None` where either is
    /// unknown.
    pub values: Vec<Option<bool>>,
}

impl Membership for SampledSet {
    fn member(&self, g: &GroupElement) -> Option<bool> {
        self.window.elements().binary_search(g).ok().and_then(|i| self.values[i])
    }
}

/// `{g : x(g) != z(g)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Disagreement {
    /// `confirmed` holds cells known to differ, `unresolved` cells where
    /// either side is unassigned.
    Exact { confirmed: CosetSet, unresolved: CosetSet },
    Sampled(SampledSet),
}

impl Membership for Disagreement {
    fn member(&self, g: &GroupElement) -> Option<bool> {
        match self {
            Disagreement::Exact { confirmed, unresolved } => {
                if unresolved.contains(g) {
                    None
                } else {
                    Some(confirmed.contains(g))
                }
            }
            Disagreement::Sampled(s) => s.member(g),
        }
    }
}

/// Exact disagreement of two exact configurations on the same chain, or
/// `None` when they are not both exact over one chain.
pub fn exact_disagreement(x: &Configuration, z: &Configuration) -> Result<Option<(CosetSet, CosetSet)>> {
    let (Some(vx), Some(vz)) = (x.exact_view(), z.exact_view()) else {
        return Ok(None);
    };
    if vx.chain != vz.chain {
        if matches!((x, z), (Configuration::Toeplitz(_), Configuration::Toeplitz(_))) {
            return Err(Error::ChainMismatch);
        }
        return Ok(None);
    }
    let level = vx.level.max(vz.level);
    let (vx, vz) = (vx.lift(level), vz.lift(level));
    let trans = x.alphabet().translation(z.alphabet());
    let mut confirmed = vec![false; vx.cells.len()];
    let mut unresolved = vec![false; vx.cells.len()];
    for (i, (a, b)) in vx.cells.iter().zip(&vz.cells).enumerate() {
        match (a, b) {
            (Some(a), Some(b)) => confirmed[i] = trans[*a as usize] != Some(*b),
            _ => unresolved[i] = true,
        }
    }
    Ok(Some((
        CosetSet::from_mask(vx.chain.clone(), level, confirmed)?,
        CosetSet::from_mask(vx.chain, level, unresolved)?,
    )))
}

/// Disagreement set of `x` and `z`: exact for exact pairs on one chain,
/// otherwise sampled on `window`.
pub fn disagreement_set(x: &Configuration, z: &Configuration, window: &FiniteSubset) -> Result<Disagreement> {
    if x.rank() != z.rank() {
        return Err(Error::RankMismatch { expected: x.rank(), found: z.rank() });
    }
    if let Some((confirmed, unresolved)) = exact_disagreement(x, z)? {
        return Ok(Disagreement::Exact { confirmed, unresolved });
    }
    Ok(Disagreement::Sampled(sample_disagreement(x, z, window)))
}

/// Pointwise comparison on a window.
pub fn sample_disagreement(x: &Configuration, z: &Configuration, window: &FiniteSubset) -> SampledSet {
    let trans = x.alphabet().translation(z.alphabet());
    let values = window
        .iter()
        .map(|g| match (x.evaluate(g), z.evaluate(g)) {
            (Some(a), Some(b)) => Some(trans[a as usize] != Some(b)),
            _ => None,
        })
        .collect();
    SampledSet { window: window.clone(), values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{ball, make_chain};

    fn z(v: i64) -> GroupElement {
        GroupElement::scalar(v)
    }

    fn evens(chain: &SubgroupChain) -> Configuration {
        Configuration::periodic(chain.clone(), 1, Alphabet::binary(), vec![1, 0]).unwrap()
    }

    #[test]
    fn evaluation_of_each_variant() {
        let chain = SubgroupChain::dyadic(3);
        let ab = Alphabet::new(["a", "b", "c"]).unwrap();
        let p = Configuration::periodic(chain.clone(), 1, ab.clone(), vec![0, 1]).unwrap();
        assert_eq!(p.evaluate(&z(7)), Some(1));
        let t: Configuration = ToeplitzTable::new(chain.clone(), ab, [(1, z(0), 2)]).unwrap().into();
        assert_eq!(t.evaluate(&z(3)), None);
        assert_eq!(t.evaluate(&z(-4)), Some(2));
        let o: Configuration = OracleConfig::builtin(1, 4, OracleRule::Parity).unwrap().into();
        assert_eq!(o.evaluate(&z(10)), None);
        assert_eq!(o.evaluate(&z(-3)), Some(1));
    }

    #[test]
    fn shift_moves_evens_to_odds() {
        let chain = SubgroupChain::dyadic(3);
        let x = evens(&chain);
        let odd = Configuration::periodic(chain.clone(), 1, Alphabet::binary(), vec![0, 1]).unwrap();
        assert_eq!(x.shift(&z(1)), odd);
        assert_eq!(x.shift(&z(0)), x);
    }

    #[test]
    fn shift_in_rank_two_matches_pointwise() {
        let chain = make_chain(2, &[2]).unwrap();
        let x = Configuration::periodic(chain, 1, Alphabet::binary(), vec![1, 0, 0, 0]).unwrap();
        let h = GroupElement::new(vec![1, 1]);
        let shifted = x.shift(&h);
        assert!(matches!(shifted, Configuration::Periodic(_)));
        for g in ball(2, 2).iter() {
            assert_eq!(shifted.evaluate(g), x.evaluate(&(g + &h)));
        }
    }

    #[test]
    fn conflicting_assignments_rejected() {
        let chain = SubgroupChain::dyadic(3);
        let err = ToeplitzTable::new(chain.clone(), Alphabet::binary(), [(1, z(0), 0), (2, z(2), 1)]).unwrap_err();
        assert!(matches!(err, Error::ConflictingAssignment { level: 2, .. }));
        assert!(ToeplitzTable::new(chain, Alphabet::binary(), [(1, z(0), 0), (2, z(2), 0)]).is_ok());
    }

    #[test]
    fn per_sets() {
        let chain = SubgroupChain::dyadic(4);
        let p = evens(&chain);
        assert_eq!(per_set(&p, 3).unwrap().count(), 8);
        let ab = Alphabet::new(["a", "b"]).unwrap();
        let t: Configuration = ToeplitzTable::new(chain.clone(), ab, [(1, z(0), 0)]).unwrap().into();
        assert_eq!(per_set(&t, 1).unwrap().reps(), vec![z(0)]);
        assert!(per_set_letter(&t, 1, 1).unwrap().is_empty());
        assert_eq!(per_set_undecided(&t, 1).unwrap().reps(), vec![z(1)]);
        let o: Configuration = OracleConfig::builtin(1, 4, OracleRule::Parity).unwrap().into();
        assert_eq!(per_set(&o, 1).unwrap_err(), Error::InexactVariant);
    }

    #[test]
    fn per_set_below_period_level() {
        let chain = SubgroupChain::dyadic(3);
        let x = Configuration::periodic(chain, 2, Alphabet::binary(), vec![1, 0, 1, 1]).unwrap();
        // cosets 0 + 2Z = {0, 2 mod 4} constant 1; 1 + 2Z mixed
        assert_eq!(per_set(&x, 1).unwrap().reps(), vec![z(0)]);
        assert!(per_set(&x, 0).unwrap().is_empty());
    }

    #[test]
    fn disagreement_examples() {
        let chain = SubgroupChain::dyadic(3);
        let window = ball(1, 4);
        let zero = Configuration::constant(chain.clone(), Alphabet::binary(), 0).unwrap();
        let one = Configuration::constant(chain.clone(), Alphabet::binary(), 1).unwrap();
        let Disagreement::Exact { confirmed, unresolved } = disagreement_set(&zero, &one, &window).unwrap() else {
            panic!("expected exact")
        };
        assert_eq!(confirmed.density(), Rational::from_integer(1));
        assert!(unresolved.is_empty());
        let Disagreement::Exact { confirmed, .. } = disagreement_set(&evens(&chain), &zero, &window).unwrap() else {
            panic!("expected exact")
        };
        assert_eq!((confirmed.level(), confirmed.reps()), (1, vec![z(0)]));
        let Disagreement::Exact { confirmed, .. } = disagreement_set(&one, &one, &window).unwrap() else {
            panic!("expected exact")
        };
        assert!(confirmed.is_empty());
    }

    #[test]
    fn toeplitz_tables_on_different_chains() {
        let a = ToeplitzTable::new(SubgroupChain::dyadic(2), Alphabet::binary(), [(0, z(0), 0)]).unwrap();
        let b = ToeplitzTable::new(make_chain(1, &[3]).unwrap(), Alphabet::binary(), [(0, z(0), 0)]).unwrap();
        assert_eq!(
            disagreement_set(&a.into(), &b.into(), &ball(1, 2)).unwrap_err(),
            Error::ChainMismatch
        );
    }

    #[test]
    fn oracle_rules() {
        let bits: String = (0..12).map(|p| char::from(b'0' + champernowne_bit(p) as u8)).collect();
        assert_eq!(bits, "110111001011");
        let rule = OracleRule::parse("block_alternating(1/2)", 64).unwrap();
        let x = OracleConfig::builtin(1, 64, rule).unwrap();
        let values: Vec<Letter> = (0..16).map(|p| x.evaluate(&z(p)).unwrap()).collect();
        assert_eq!(values, vec![1, 1, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert!(matches!(OracleRule::parse("nope", 4), Err(Error::UnknownRule(_))));
    }

    #[test]
    fn coset_set_algebra() {
        let chain = SubgroupChain::dyadic(3);
        let a = CosetSet::new(chain.clone(), 1, [z(0)]).unwrap();
        let b = CosetSet::new(chain.clone(), 2, [z(0), z(2)]).unwrap();
        assert!(a.same_elements(&b).unwrap());
        assert_eq!(a.complement().density(), Rational::new(1, 2));
        let c = CosetSet::new(chain, 2, [z(1)]).unwrap();
        assert_eq!(a.union(&c).unwrap().density(), Rational::new(3, 4));
        assert!(c.is_subset(&a.complement()).unwrap());
    }
}
