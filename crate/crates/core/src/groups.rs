//! Group arithmetic on `Z^d`, finite subsets, balls and subgroup chains.
//!
//! A [`SubgroupChain`] is the nested sequence `H_n = (q_n Z)^d` together with
//! the box fundamental domains `F_n = [0, q_n)^d`. Construction checks the
//! four chain conditions exhaustively, so a chain value in hand is always
//! valid.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{ratio, Rational};

/// An element of `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement(Vec<i64>);

impl GroupElement {
    pub fn new(coords: Vec<i64>) -> Self {
        GroupElement(coords)
    }

    pub fn scalar(value: i64) -> Self {
        GroupElement(vec![value])
    }

    pub fn zero(rank: usize) -> Self {
        GroupElement(vec![0; rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Sup norm, used for ball membership.
    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0[0])
        } else {
            let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

impl Add for &GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.rank(), rhs.rank());
        GroupElement(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &GroupElement {
    type Output = GroupElement;
    fn sub(self, rhs: &GroupElement) -> GroupElement {
        debug_assert_eq!(self.rank(), rhs.rank());
        GroupElement(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &GroupElement {
    type Output = GroupElement;
    fn neg(self) -> GroupElement {
        GroupElement(self.0.iter().map(|a| -a).collect())
    }
}

/// Minimal group interface. Only [`Lattice`] ships; the chain machinery
/// below is specialised to it.
pub trait Group {
    type Element;
    fn identity(&self) -> Self::Element;
    fn multiply(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn inverse(&self, a: &Self::Element) -> Self::Element;
}

/// The free abelian group `Z^rank`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lattice {
    pub rank: usize,
}

impl Group for Lattice {
    type Element = GroupElement;

    fn identity(&self) -> GroupElement {
        GroupElement::zero(self.rank)
    }

    fn multiply(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        a + b
    }

    fn inverse(&self, a: &GroupElement) -> GroupElement {
        -a
    }
}

/// A non-empty-or-empty finite set of group elements in canonical
/// (lexicographic) order, without duplicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteSubset {
    rank: usize,
    elements: Vec<GroupElement>,
}

impl FiniteSubset {
    pub fn new<I: IntoIterator<Item = GroupElement>>(rank: usize, elements: I) -> Result<Self> {
        let mut elements: Vec<GroupElement> = elements.into_iter().collect();
        if let Some(bad) = elements.iter().find(|g| g.rank() != rank) {
            return Err(Error::RankMismatch { expected: rank, found: bad.rank() });
        }
        elements.sort();
        elements.dedup();
        Ok(FiniteSubset { rank, elements })
    }

    /// Subset of `Z` from plain integers.
    pub fn from_integers<I: IntoIterator<Item = i64>>(values: I) -> Self {
        FiniteSubset::new(1, values.into_iter().map(GroupElement::scalar))
            .expect("rank-1 elements")
    }

    /// The box `prod [lo_i, hi_i)`.
    pub fn box_set(lo: &[i64], hi: &[i64]) -> Self {
        let rank = lo.len();
        let mut elements = Vec::new();
        if lo.iter().zip(hi).all(|(l, h)| l < h) {
            let mut current: Vec<i64> = lo.to_vec();
            loop {
                elements.push(GroupElement(current.clone()));
                let mut axis = rank;
                loop {
                    if axis == 0 {
                        return FiniteSubset { rank, elements };
                    }
                    axis -= 1;
                    current[axis] += 1;
                    if current[axis] < hi[axis] {
                        break;
                    }
                    current[axis] = lo[axis];
                }
            }
        }
        FiniteSubset { rank, elements }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GroupElement> {
        self.elements.iter()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    /// `F + g`.
    pub fn translate(&self, g: &GroupElement) -> FiniteSubset {
        // Translation preserves lexicographic order.
        FiniteSubset { rank: self.rank, elements: self.elements.iter().map(|f| f + g).collect() }
    }

    pub fn symmetric_difference_len(&self, other: &FiniteSubset) -> usize {
        let common = self.elements.iter().filter(|g| other.contains(g)).count();
        self.len() + other.len() - 2 * common
    }
}

/// The ball `[-radius, radius]^rank` in the sup norm.
pub fn ball(rank: usize, radius: u64) -> FiniteSubset {
    let r = radius as i64;
    FiniteSubset::box_set(&vec![-r; rank], &vec![r + 1; rank])
}

/// `|(g + F) △ F| / |F|`.
pub fn folner_invariance_ratio(set: &FiniteSubset, g: &GroupElement) -> Rational {
    assert!(!set.is_empty(), "Følner ratio of an empty set");
    ratio(set.translate(g).symmetric_difference_len(set), set.len())
}

/// Dense lexicographic indexing of a box `prod [lo_i, hi_i)`, used to tabulate
/// values on `F + ball(R)` once and look them up per translate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxIndex {
    lo: Vec<i64>,
    extent: Vec<usize>,
}

impl BoxIndex {
    /// Smallest box containing `set + ball(radius)`.
    pub fn covering(set: &FiniteSubset, radius: u64) -> BoxIndex {
        let rank = set.rank();
        let r = radius as i64;
        let mut lo = vec![i64::MAX; rank];
        let mut hi = vec![i64::MIN; rank];
        for g in set.iter() {
            for (axis, &c) in g.coords().iter().enumerate() {
                lo[axis] = lo[axis].min(c - r);
                hi[axis] = hi[axis].max(c + r + 1);
            }
        }
        if set.is_empty() {
            lo = vec![0; rank];
            hi = vec![0; rank];
        }
        let extent = lo.iter().zip(&hi).map(|(l, h)| (h - l) as usize).collect();
        BoxIndex { lo, extent }
    }

    pub fn len(&self) -> usize {
        self.extent.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn elements(&self) -> FiniteSubset {
        let hi: Vec<i64> = self.lo.iter().zip(&self.extent).map(|(l, e)| l + *e as i64).collect();
        FiniteSubset::box_set(&self.lo, &hi)
    }

    /// Index of `g + offset`, which must lie in the box.
    pub fn index(&self, g: &[i64], offset: &[i64]) -> usize {
        let mut idx = 0usize;
        for axis in 0..self.lo.len() {
            let c = g[axis] + offset[axis] - self.lo[axis];
            debug_assert!(c >= 0 && (c as usize) < self.extent[axis]);
            idx = idx * self.extent[axis] + c as usize;
        }
        idx
    }
}

/// JSON form of a chain: `{"rank": d, "scales": [q1, q2, ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub rank: usize,
    pub scales: Vec<i64>,
}

/// Nested subgroups `H_n = (q_n Z)^d` with box fundamental domains
/// `F_n = [0, q_n)^d`, levels `0..=depth` (`q_0 = 1`, `H_0 = G`, `F_0 = {e}`).
///
/// The ambient group is abelian, so every `H_n` is normal and the odometer is
/// always exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubgroupChain {
    rank: usize,
    moduli: Vec<i64>,
}

/// Outcome of the exhaustive chain check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChainReport {
    pub levels_checked: usize,
    pub cells_checked: usize,
    pub violations: Vec<String>,
}

impl ChainReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Builds and validates a chain from its scales `q_1 | q_2 | ...`.
pub fn make_chain(rank: usize, scales: &[i64]) -> Result<SubgroupChain> {
    if rank == 0 {
        return Err(Error::InvalidRank);
    }
    let mut previous = 1i64;
    for (position, &q) in scales.iter().enumerate() {
        if q <= previous {
            return Err(Error::NonIncreasingScales { position });
        }
        if q % previous != 0 {
            return Err(Error::NonDividingScales { smaller: previous, larger: q });
        }
        previous = q;
    }
    let mut moduli = Vec::with_capacity(scales.len() + 1);
    moduli.push(1);
    moduli.extend_from_slice(scales);
    let chain = SubgroupChain { rank, moduli };
    if let Some(total) = chain.total_cells() {
        if (rank as u128) * (total as u128) > (1u128 << 32) {
            return Err(Error::ParameterOutOfRange("chain domains too large".into()));
        }
    } else {
        return Err(Error::ParameterOutOfRange("chain domains too large".into()));
    }
    let report = chain.verify_conditions();
    if let Some(first) = report.violations.first() {
        return Err(Error::ChainConditionViolated(first.clone()));
    }
    Ok(chain)
}

impl SubgroupChain {
    /// `q_n = 2^n` in `Z`, levels `0..=depth`.
    pub fn dyadic(depth: usize) -> SubgroupChain {
        let scales: Vec<i64> = (1..=depth).map(|n| 1i64 << n).collect();
        make_chain(1, &scales).expect("dyadic chain is valid")
    }

    pub fn from_spec(spec: &ChainSpec) -> Result<SubgroupChain> {
        make_chain(spec.rank, &spec.scales)
    }

    pub fn spec(&self) -> ChainSpec {
        ChainSpec { rank: self.rank, scales: self.moduli[1..].to_vec() }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn depth(&self) -> usize {
        self.moduli.len() - 1
    }

    /// `q_n`.
    pub fn modulus(&self, level: usize) -> i64 {
        self.moduli[level]
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level > self.depth() {
            Err(Error::LevelOutOfRange { level, depth: self.depth() })
        } else {
            Ok(())
        }
    }

    /// `|F_n| = q_n^d`.
    pub fn domain_size(&self, level: usize) -> usize {
        (self.moduli[level] as usize).pow(self.rank as u32)
    }

    fn total_cells(&self) -> Option<usize> {
        let mut total = 0usize;
        for &q in &self.moduli {
            total = total.checked_add((q as usize).checked_pow(self.rank as u32)?)?;
        }
        Some(total)
    }

    /// `|H_i : H_j| = (q_j / q_i)^d` for `i <= j`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j);
        ((self.moduli[j] / self.moduli[i]) as usize).pow(self.rank as u32)
    }

    /// Position of the coset `H_n + g` in the canonical order of `F_n`.
    pub fn rep_index(&self, g: &GroupElement, level: usize) -> usize {
        let q = self.moduli[level];
        g.coords().iter().fold(0usize, |acc, &c| acc * q as usize + c.rem_euclid(q) as usize)
    }

    /// Position of `g + offset` without materialising the sum.
    pub fn rep_index_offset(&self, g: &[i64], offset: &[i64], level: usize) -> usize {
        let q = self.moduli[level];
        g.iter()
            .zip(offset)
            .fold(0usize, |acc, (&c, &o)| acc * q as usize + (c + o).rem_euclid(q) as usize)
    }

    /// The element of `F_n` at canonical position `index`.
    pub fn element_at(&self, level: usize, index: usize) -> GroupElement {
        let q = self.moduli[level] as usize;
        let mut coords = vec![0i64; self.rank];
        let mut rest = index;
        for slot in coords.iter_mut().rev() {
            *slot = (rest % q) as i64;
            rest /= q;
        }
        GroupElement(coords)
    }

    /// The unique element of `F_n` in `H_n + g`.
    pub fn coset_rep(&self, g: &GroupElement, level: usize) -> Result<GroupElement> {
        self.check_level(level)?;
        if g.rank() != self.rank {
            return Err(Error::RankMismatch { expected: self.rank, found: g.rank() });
        }
        let q = self.moduli[level];
        Ok(GroupElement(g.coords().iter().map(|c| c.rem_euclid(q)).collect()))
    }

    /// `F_n` as a canonically ordered subset.
    pub fn domain(&self, level: usize) -> Result<FiniteSubset> {
        self.check_level(level)?;
        let q = self.moduli[level];
        Ok(FiniteSubset::box_set(&vec![0; self.rank], &vec![q; self.rank]))
    }

    /// Canonical positions (at level `j`) of the elements of `F_j ∩ H_i`.
    pub fn subgroup_offsets(&self, i: usize, j: usize) -> Vec<usize> {
        let step = self.moduli[i];
        let count_per_axis = (self.moduli[j] / step) as usize;
        let qj = self.moduli[j] as usize;
        let mut out = Vec::with_capacity(count_per_axis.pow(self.rank as u32));
        let total = count_per_axis.pow(self.rank as u32);
        for k in 0..total {
            let mut rest = k;
            let mut digits = vec![0usize; self.rank];
            for d in digits.iter_mut().rev() {
                *d = rest % count_per_axis;
                rest /= count_per_axis;
            }
            let idx = digits.iter().fold(0usize, |acc, &d| acc * qj + d * step as usize);
            out.push(idx);
        }
        out
    }

    /// Canonical level-`j` positions of every cell of `F_j` lying in the coset
    /// of `F_i` at position `rep` (`i <= j`).
    pub fn lift_positions(&self, i: usize, rep: usize, j: usize) -> Vec<usize> {
        let base = self.element_at(i, rep);
        let base_idx = self.rep_index(&base, j);
        self.subgroup_offsets(i, j).into_iter().map(|v| self.add_positions(base_idx, v, j)).collect()
    }

    /// Sum of two canonical positions at level `level` (componentwise mod q).
    pub fn add_positions(&self, a: usize, b: usize, level: usize) -> usize {
        let q = self.moduli[level] as usize;
        let mut ra = a;
        let mut rb = b;
        let mut digits = vec![0usize; self.rank];
        for d in digits.iter_mut().rev() {
            *d = (ra % q + rb % q) % q;
            ra /= q;
            rb /= q;
        }
        digits.iter().fold(0usize, |acc, &d| acc * q + d)
    }

    /// Position at level `i` of the cell at position `index` of level `j`.
    pub fn project_position(&self, index: usize, j: usize, i: usize) -> usize {
        if self.rank == 1 {
            return index % self.moduli[i] as usize;
        }
        self.rep_index(&self.element_at(j, index), i)
    }

    /// Exhaustively verifies the four chain conditions.
    pub fn verify_conditions(&self) -> ChainReport {
        let mut report = ChainReport::default();
        let d = self.rank as u32;
        // (1) nesting H_0 = G ⊃ H_1 ⊃ ...
        if self.moduli[0] != 1 {
            report.violations.push("H_0 is not G".into());
        }
        for w in self.moduli.windows(2) {
            if w[1] % w[0] != 0 || w[1] <= w[0] {
                report.violations.push(format!("H_{} not properly nested in H_{}", w[1], w[0]));
            }
        }
        for level in 0..=self.depth() {
            report.levels_checked += 1;
            let q = self.moduli[level];
            let size = (q as usize).pow(d);
            let domain = FiniteSubset::box_set(&vec![0; self.rank], &vec![q; self.rank]);
            report.cells_checked += domain.len();
            // (2) F_0 = {e}, F_n ⊂ F_{n+1}
            if level == 0 && (domain.len() != 1 || !domain.elements()[0].is_zero()) {
                report.violations.push("F_0 is not {e}".into());
            }
            if level < self.depth() {
                let next = self.moduli[level + 1];
                if domain.iter().any(|f| f.coords().iter().any(|&c| c < 0 || c >= next)) {
                    report.violations.push(format!("F_{level} not contained in F_{}", level + 1));
                }
            }
            // (3) F_n meets every coset of H_n exactly once
            let mut hits = vec![0u32; size];
            for f in domain.iter() {
                hits[self.rep_index(f, level)] += 1;
            }
            if domain.len() != size || hits.iter().any(|&h| h != 1) {
                report.violations.push(format!("F_{level} is not a fundamental domain for H_{level}"));
            }
            // (4) F_{i+1} = ⊔_{v ∈ F_{i+1} ∩ H_i} (F_i + v)
            if level < self.depth() {
                let next = self.moduli[level + 1];
                let next_domain = FiniteSubset::box_set(&vec![0; self.rank], &vec![next; self.rank]);
                let offsets: Vec<&GroupElement> = next_domain
                    .iter()
                    .filter(|v| v.coords().iter().all(|c| c.rem_euclid(q) == 0))
                    .collect();
                let next_size = (next as usize).pow(d);
                let mut cover = vec![0u32; next_size];
                let mut escaped = false;
                for v in &offsets {
                    for f in domain.iter() {
                        let cell = f + v;
                        if cell.coords().iter().any(|&c| c < 0 || c >= next) {
                            escaped = true;
                        } else {
                            cover[self.rep_index(&cell, level + 1)] += 1;
                        }
                    }
                }
                if escaped || cover.iter().any(|&c| c != 1) {
                    report
                        .violations
                        .push(format!("F_{} is not the disjoint union of translates of F_{level}", level + 1));
                }
            }
        }
        report
    }
}

/// `F_n` of the chain; an alias kept for readability at call sites.
pub fn folner_set(chain: &SubgroupChain, level: usize) -> Result<FiniteSubset> {
    chain.domain(level)
}

/// Nested boxes `[0, L_n)` in `Z` for a strictly increasing length list.
pub fn nested_intervals(lengths: &[i64]) -> Vec<FiniteSubset> {
    lengths.iter().map(|&l| FiniteSubset::box_set(&[0], &[l])).collect()
}

/// Lengths `L_n = n + 1`, so that `|F_n| / |F_{n+1}| -> 1`.
pub fn linear_lengths(count: usize) -> Vec<i64> {
    (0..count as i64).map(|n| n + 1).collect()
}

/// Lengths growing geometrically with ratio `1 / (1 - eps)`, rounded to the
/// nearest integer and forced to increase by at least one each step.
/// `L_0 = 1`, so `|F_n| / |F_{n+1}| -> 1 - eps`.
pub fn geometric_lengths(eps: &Rational, count: usize) -> Result<Vec<i64>> {
    if *eps <= Rational::from_integer(0) || *eps >= Rational::from_integer(1) {
        return Err(Error::ParameterOutOfRange(format!("eps must lie in (0,1), got {eps}")));
    }
    let ratio = 1.0 / (1.0 - crate::rational::to_f64(eps));
    let mut lengths: Vec<i64> = Vec::with_capacity(count);
    for n in 0..count {
        let target = ratio.powi(n as i32).round();
        if !target.is_finite() || target > 1e15 {
            return Err(Error::ParameterOutOfRange("geometric boxes overflow".into()));
        }
        let next = match lengths.last() {
            Some(&prev) => (target as i64).max(prev + 1),
            None => (target as i64).max(1),
        };
        lengths.push(next);
    }
    Ok(lengths)
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn coset_rep_is_idempotent_and_in_coset(
            coords in proptest::collection::vec(-1000i64..1000, 2),
            level in 0usize..=3,
        ) {
            let chain = make_chain(2, &[2, 6, 12]).unwrap();
            let g = GroupElement::new(coords);
            let r = chain.coset_rep(&g, level).unwrap();
            prop_assert_eq!(chain.coset_rep(&r, level).unwrap(), r.clone());
            let q = chain.modulus(level);
            prop_assert!((&r - &g).coords().iter().all(|c| c % q == 0));
            prop_assert!(chain.domain(level).unwrap().contains(&r));
        }
    }
}
