//! Pattern-counting entropy, the binary entropy function and its binomial
//! bound, the continuity bound, and brute-force separated / spanning sets.
//!
//! Entropy values are in nats; `E_S` is in bits. The two meet in the
//! continuity bound `2δ ln|A| + ln 2 · E_S(2δ)`.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::configs::{Configuration, Letter};
use crate::error::{Error, Result};
use crate::groups::{ball, BoxIndex, FiniteSubset, SubgroupChain};
use crate::rational::{to_f64, Rational};

/// Distinct patterns `x|(F + g)`, letters listed in the canonical order of `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternSet {
    pub patterns: HashSet<Vec<Letter>>,
    /// True for a full-period scan, i.e. the complete language on `F`.
    pub exact: bool,
}

/// Patterns of shape `set`. Exact configurations are scanned over one full
/// period (`radius` is ignored); oracles over `g ∈ ball(radius)`.
pub fn pattern_set(x: &Configuration, set: &FiniteSubset, radius: u64) -> Result<PatternSet> {
    if let Some(view) = x.exact_view() {
        let chain = &view.chain;
        let level = view.level;
        let mut patterns = HashSet::new();
        let offsets: Vec<&[i64]> = set.iter().map(|f| f.coords()).collect();
        for gi in 0..chain.domain_size(level) {
            let g = chain.element_at(level, gi);
            let mut pattern = Vec::with_capacity(offsets.len());
            for f in &offsets {
                let cell = view.cells[chain.rep_index_offset(f, g.coords(), level)];
                match cell {
                    Some(l) => pattern.push(l),
                    None => {
                        let at: Vec<i64> = f.iter().zip(g.coords()).map(|(a, b)| a + b).collect();
                        return Err(Error::UnknownMembership(crate::groups::GroupElement::new(at).to_string()));
                    }
                }
            }
            patterns.insert(pattern);
        }
        return Ok(PatternSet { patterns, exact: true });
    }
    let index = BoxIndex::covering(set, radius);
    let window = index.elements();
    let values: Vec<Option<Letter>> = window.iter().map(|g| x.evaluate(g)).collect();
    let mut patterns = HashSet::new();
    for g in ball(set.rank(), radius).iter() {
        let mut pattern = Vec::with_capacity(set.len());
        for f in set.iter() {
            match values[index.index(f.coords(), g.coords())] {
                Some(l) => pattern.push(l),
                None => return Err(Error::UnknownMembership((f + g).to_string())),
            }
        }
        patterns.insert(pattern);
    }
    Ok(PatternSet { patterns, exact: false })
}

/// `ln |L_F(x)| / |F|` with the data it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyEstimate {
    pub level: usize,
    pub window: u64,
    pub pattern_count: usize,
    pub value: f64,
    /// `pattern_count = |A|^{|F|}`.
    pub saturated: bool,
    /// Complete language (full-period scan) rather than a window lower bound.
    pub exact: bool,
}

/// Entropy estimate on `F_level` of `chain`.
pub fn entropy_estimate(x: &Configuration, chain: &SubgroupChain, level: usize, radius: u64) -> Result<EntropyEstimate> {
    let set = chain.domain(level)?;
    let patterns = pattern_set(x, &set, radius)?;
    let count = patterns.patterns.len();
    let size = set.len();
    let alphabet = x.alphabet().len();
    let saturated = (alphabet as f64).powi(size as i32) <= count as f64 + 0.5
        && BigUint::from(alphabet).pow(size as u32) == BigUint::from(count);
    Ok(EntropyEstimate {
        level,
        window: radius,
        pattern_count: count,
        value: (count as f64).ln() / size as f64,
        saturated,
        exact: patterns.exact,
    })
}

/// `E_S(ε) = −ε log₂ ε − (1−ε) log₂(1−ε)`, `0` at the endpoints.
pub fn es_entropy_f64(eps: f64) -> f64 {
    if eps <= 0.0 || eps >= 1.0 {
        return 0.0;
    }
    -eps * eps.log2() - (1.0 - eps) * (1.0 - eps).log2()
}

pub fn es_entropy(eps: &Rational) -> f64 {
    es_entropy_f64(to_f64(eps))
}

/// Both sides of `Σ_{j ≤ ⌊nε⌋} C(n, j) <= 2^{n E_S(ε)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinomialBound {
    pub lhs: BigUint,
    /// `n · E_S(ε)`, the base-2 exponent of the right-hand side.
    pub rhs_log2: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Exact partial binomial sum.
pub fn binomial_partial_sum(n: u64, upto: u64) -> BigUint {
    let mut term = BigUint::one();
    let mut total = BigUint::zero();
    for j in 0..=upto.min(n) {
        if j > 0 {
            term = term * BigUint::from(n - j + 1) / BigUint::from(j);
        }
        total += &term;
    }
    total
}

fn log2_big(value: &BigUint) -> f64 {
    let bits = value.bits();
    if bits <= 1000 {
        return value.to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let shift = bits - 64;
    let top = (value >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.log2() + shift as f64
}

pub fn binomial_bound(n: u64, eps: &Rational) -> BinomialBound {
    let upto = (Rational::from_integer(n as i64) * eps).floor().to_integer().max(0) as u64;
    let lhs = binomial_partial_sum(n, upto);
    let rhs_log2 = n as f64 * es_entropy(eps);
    let holds = log2_big(&lhs) <= rhs_log2 + 1e-9;
    BinomialBound { rhs: rhs_log2.exp2(), lhs, rhs_log2, holds }
}

/// `2δ ln|A| + ln 2 · E_S(2δ)` in nats, for `0 < δ < 1/4`.
pub fn entropy_continuity_bound(delta: &Rational, alphabet_size: usize) -> Result<f64> {
    if *delta <= Rational::from_integer(0) || *delta >= Rational::new(1, 4) {
        return Err(Error::DeltaOutOfRange(delta.to_string()));
    }
    let two_delta = *delta * 2;
    Ok(to_f64(&two_delta) * (alphabet_size as f64).ln() + std::f64::consts::LN_2 * es_entropy(&two_delta))
}

/// `log₂` of both sides of `|L_F(z)| <= |A|^{2d|F|} · 2^{E_S(2d)|F|} · |L_F(x)|`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountingCheck {
    pub lhs_log2: f64,
    pub rhs_log2: f64,
    pub holds: bool,
}

pub fn continuity_counting_check(
    count_z: usize,
    count_x: usize,
    d: &Rational,
    size: usize,
    alphabet_size: usize,
) -> CountingCheck {
    let two_d = *d * 2;
    let n = size as f64;
    let rhs_log2 = to_f64(&two_d) * n * (alphabet_size as f64).log2() + es_entropy(&two_d) * n + (count_x as f64).log2();
    let lhs_log2 = (count_z as f64).log2();
    CountingCheck { lhs_log2, rhs_log2, holds: lhs_log2 <= rhs_log2 + 1e-9 }
}

/// Largest system accepted by the brute-force searches.
pub const MAX_SYSTEM: usize = 20;

/// Finitely many points of `A^G`, each known on a common box, with a shape
/// `F` along which orbits are compared.
///
/// The metric on `A^G` is `ρ(x, z) = 2^{-m}`, `m` the smallest sup norm of a
/// position where `x` and `z` differ (`0` if they agree). For shifted points
/// only positions inside the box are compared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledSystem {
    window: FiniteSubset,
    shape: FiniteSubset,
    points: Vec<Vec<Letter>>,
    /// `depth[i][j][k]`: `m` for `ρ(g_k x_i, g_k x_j)`, `None` if no visible
    /// difference.
    depth: Vec<Vec<Vec<Option<u32>>>>,
}

impl SampledSystem {
    /// `points[i][p]` is the letter of point `i` at the `p`-th element of
    /// `window`.
    pub fn new(window: FiniteSubset, shape: FiniteSubset, points: Vec<Vec<Letter>>) -> Result<Self> {
        if points.len() > MAX_SYSTEM {
            return Err(Error::SystemTooLarge { size: points.len(), max: MAX_SYSTEM });
        }
        if points.is_empty() || shape.is_empty() {
            return Err(Error::Empty("sampled system"));
        }
        if let Some(p) = points.iter().find(|p| p.len() != window.len()) {
            return Err(Error::WordLength { expected: window.len(), found: p.len() });
        }
        let n = points.len();
        let mut depth = vec![vec![vec![None; shape.len()]; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                for (k, g) in shape.iter().enumerate() {
                    let mut best: Option<u32> = None;
                    for (p, cell) in window.iter().enumerate() {
                        if points[i][p] != points[j][p] {
                            let m = (cell - g).sup_norm() as u32;
                            best = Some(best.map_or(m, |b| b.min(m)));
                        }
                    }
                    depth[i][j][k] = best;
                    depth[j][i][k] = best;
                }
            }
        }
        Ok(SampledSystem { window, shape, points, depth })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn window(&self) -> &FiniteSubset {
        &self.window
    }

    pub fn shape(&self) -> &FiniteSubset {
        &self.shape
    }

    /// `ρ(g x_i, g x_j)` for the `k`-th element `g` of the shape.
    pub fn rho(&self, i: usize, j: usize, k: usize) -> Rational {
        match self.depth[i][j][k] {
            None => Rational::from_integer(0),
            Some(m) => Rational::new(1, 1i64 << m.min(62)),
        }
    }

    /// `ρ_F(x_i, x_j) = max_{g ∈ F} ρ(g x_i, g x_j)`.
    pub fn distance_table(&self) -> Vec<Vec<Rational>> {
        (0..self.len())
            .map(|i| {
                (0..self.len())
                    .map(|j| (0..self.shape.len()).map(|k| self.rho(i, j, k)).max().unwrap())
                    .collect()
            })
            .collect()
    }

    /// `|{g ∈ F : ρ(g x_i, g x_j) > ε}|`.
    pub fn far_count(&self, i: usize, j: usize, eps: &Rational) -> usize {
        (0..self.shape.len()).filter(|&k| self.rho(i, j, k) > *eps).count()
    }

    fn check(eps: &Rational, delta: &Rational) -> Result<()> {
        let (zero, one) = (Rational::from_integer(0), Rational::from_integer(1));
        if *eps <= zero || *eps > one || *delta <= zero || *delta > one {
            return Err(Error::ParameterOutOfRange("eps and delta must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// Largest `(F, ε, δ)`-separated subset: distinct members differ by more
    /// than `ε` at more than `δ|F|` elements of `F`.
    pub fn separated_max(&self, eps: &Rational, delta: &Rational) -> Result<usize> {
        SampledSystem::check(eps, delta)?;
        let n = self.len();
        let bound = *delta * Rational::from_integer(self.shape.len() as i64);
        let adjacent: Vec<u32> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && Rational::from_integer(self.far_count(i, j, eps) as i64) > bound)
                    .fold(1u32 << i, |m, j| m | (1 << j))
            })
            .collect();
        let mut best = 1;
        for subset in 1u32..(1 << n) {
            let size = subset.count_ones() as usize;
            if size <= best {
                continue;
            }
            let mut rest = subset;
            let mut ok = true;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                if adjacent[i] & subset != subset {
                    ok = false;
                    break;
                }
            }
            if ok {
                best = size;
            }
        }
        Ok(best)
    }

    /// Smallest `(F, ε, δ)`-spanning subset: every point is within `ε` of some
    /// member at more than `(1 − δ)|F|` elements of `F`.
    pub fn spanning_min(&self, eps: &Rational, delta: &Rational) -> Result<usize> {
        SampledSystem::check(eps, delta)?;
        let n = self.len();
        let size = Rational::from_integer(self.shape.len() as i64);
        let threshold = (Rational::from_integer(1) - *delta) * size;
        let covers: Vec<u32> = (0..n)
            .map(|z| {
                (0..n)
                    .filter(|&y| {
                        let close = self.shape.len() - self.far_count(z, y, eps);
                        Rational::from_integer(close as i64) > threshold
                    })
                    .fold(0u32, |m, y| m | (1 << y))
            })
            .collect();
        let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        let mut best = n;
        for subset in 1u32..=all {
            let count = subset.count_ones() as usize;
            if count >= best {
                continue;
            }
            let mut rest = subset;
            let mut covered = 0u32;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                covered |= covers[i];
            }
            if covered == all {
                best = count;
            }
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configs::{Alphabet, OracleConfig, OracleRule};

    #[test]
    fn pattern_counts() {
        let chain = SubgroupChain::dyadic(4);
        let c = Configuration::constant(chain.clone(), Alphabet::binary(), 0).unwrap();
        assert_eq!(pattern_set(&c, &chain.domain(3).unwrap(), 0).unwrap().patterns.len(), 1);
        let evens = Configuration::periodic(chain.clone(), 1, Alphabet::binary(), vec![1, 0]).unwrap();
        let p = pattern_set(&evens, &chain.domain(2).unwrap(), 0).unwrap();
        assert!(p.exact);
        let expected: HashSet<Vec<Letter>> = [vec![1, 0, 1, 0], vec![0, 1, 0, 1]].into_iter().collect();
        assert_eq!(p.patterns, expected);
    }

    #[test]
    fn champernowne_saturates() {
        let chain = SubgroupChain::dyadic(3);
        let x: Configuration = OracleConfig::builtin(1, 4096, OracleRule::ChampernowneBinary).unwrap().into();
        let est = entropy_estimate(&x, &chain, 2, 4000).unwrap();
        assert_eq!(est.pattern_count, 16);
        assert!(est.saturated && !est.exact);
        assert!((est.value - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn periodic_entropy_vanishes() {
        let chain = SubgroupChain::dyadic(8);
        let x = Configuration::periodic(chain.clone(), 2, Alphabet::binary(), vec![1, 1, 0, 1]).unwrap();
        let values: Vec<f64> = (0..=8).map(|n| entropy_estimate(&x, &chain, n, 0).unwrap().value).collect();
        assert!(values[8] <= (4f64).ln() / 256.0 + 1e-15);
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(es_entropy(&Rational::new(1, 2)), 1.0);
        assert_eq!(es_entropy_f64(0.0), 0.0);
        assert!(es_entropy_f64(1e-12) < 1e-9);
        let b = binomial_bound(20, &Rational::new(1, 4));
        assert_eq!(b.lhs, BigUint::from(21700u32));
        assert!((b.rhs - 76_626.855_813_9).abs() < 1e-3, "{}", b.rhs);
        assert!(b.holds);
    }

    #[test]
    fn continuity_bound_values() {
        let v = entropy_continuity_bound(&Rational::new(1, 8), 2).unwrap();
        let expected = 0.25 * std::f64::consts::LN_2 + std::f64::consts::LN_2 * 0.811_278_124_459_132_9;
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.735_622).abs() < 1e-6);
        assert!(entropy_continuity_bound(&Rational::new(1, 1_000_000), 2).unwrap() < 1e-4);
        assert!(matches!(entropy_continuity_bound(&Rational::new(1, 4), 2), Err(Error::DeltaOutOfRange(_))));
        let grid: Vec<f64> =
            (1..25).map(|k| entropy_continuity_bound(&Rational::new(k, 100), 3).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    fn system(points: Vec<Vec<Letter>>) -> SampledSystem {
        let len = points[0].len() as i64;
        SampledSystem::new(FiniteSubset::from_integers(0..len), FiniteSubset::from_integers(0..len), points).unwrap()
    }

    #[test]
    fn sampled_system_examples() {
        let same = system(vec![vec![0, 1, 0], vec![0, 1, 0], vec![0, 1, 0]]);
        let half = Rational::new(1, 2);
        assert_eq!(same.separated_max(&half, &half).unwrap(), 1);
        assert_eq!(same.spanning_min(&half, &half).unwrap(), 1);
        let apart = system(vec![vec![0, 0, 0], vec![1, 1, 1]]);
        assert_eq!(apart.separated_max(&half, &half).unwrap(), 2);
        let table = apart.distance_table();
        assert_eq!(table[0][0], Rational::from_integer(0));
        assert_eq!(table[0][1], table[1][0]);
    }

    #[test]
    fn boundary_where_spanning_exceeds_separated() {
        // Two points differing at one of two cells: the far count is exactly
        // δ|F|, which is neither "more than δ|F|" nor "less than δ|F|".
        let sys = system(vec![vec![0, 0], vec![0, 1]]);
        let eps = Rational::new(1, 2);
        let delta = Rational::new(1, 2);
        assert_eq!(sys.far_count(0, 1, &eps), 1);
        assert_eq!(sys.separated_max(&eps, &delta).unwrap(), 1);
        assert_eq!(sys.spanning_min(&eps, &delta).unwrap(), 2);
    }

    #[test]
    fn system_size_cap() {
        let points = vec![vec![0u16]; 21];
        assert_eq!(
            SampledSystem::new(FiniteSubset::from_integers([0]), FiniteSubset::from_integers([0]), points).unwrap_err(),
            Error::SystemTooLarge { size: 21, max: 20 }
        );
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use crate::configs::Alphabet;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn estimate_bounds_and_saturation(word in proptest::collection::vec(0u16..3, 8), n in 0usize..=4) {
            let chain = SubgroupChain::dyadic(4);
            let x = Configuration::periodic(chain.clone(), 3, Alphabet::of_size(3), word).unwrap();
            let est = entropy_estimate(&x, &chain, n, 0).unwrap();
            prop_assert!(est.pattern_count >= 1);
            prop_assert!(est.value >= 0.0 && est.value <= (3f64).ln() + 1e-12);
            prop_assert_eq!(est.saturated, est.pattern_count == 3usize.pow(1 << n));
        }

        #[test]
        fn window_patterns_grow_with_radius(r in 0u64..40) {
            let x: Configuration = crate::configs::OracleConfig::builtin(
                1, 200, crate::configs::OracleRule::ChampernowneBinary).unwrap().into();
            let f = FiniteSubset::from_integers(0..4);
            let small = pattern_set(&x, &f, r).unwrap().patterns.len();
            let large = pattern_set(&x, &f, r + 5).unwrap().patterns.len();
            prop_assert!(small <= large);
        }

        #[test]
        fn binomial_bound_holds(n in 1u64..=60, k in 1i64..=50) {
            prop_assert!(binomial_bound(n, &Rational::new(k, 100)).holds);
        }
    }
}
