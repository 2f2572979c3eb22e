//! Empirical measures along Følner sets and exact Prokhorov / Hausdorff
//! distances between finitely supported measures.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::Signed;

use crate::configs::Configuration;
use crate::error::{Error, Result};
use crate::groups::FiniteSubset;
use crate::rational::{ratio, Rational};

/// Largest joint support accepted by [`prokhorov_distance`].
pub const MAX_SUPPORT: usize = 15;

/// A probability measure with finitely many atoms and rational weights.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EmpiricalMeasure {
    atoms: Vec<(String, Rational)>,
}

impl EmpiricalMeasure {
    /// Validates positive weights summing to 1 and merges nothing: atoms must
    /// be distinct.
    pub fn new<I: IntoIterator<Item = (String, Rational)>>(atoms: I) -> Result<Self> {
        let mut atoms: Vec<(String, Rational)> = atoms.into_iter().collect();
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        if atoms.is_empty() {
            return Err(Error::Empty("measure support"));
        }
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::ParameterOutOfRange("duplicate atom".into()));
        }
        if atoms.iter().any(|(_, w)| *w <= Rational::from_integer(0)) {
            return Err(Error::ParameterOutOfRange("weights must be positive".into()));
        }
        let total: Rational = atoms.iter().map(|(_, w)| *w).sum();
        if total != Rational::from_integer(1) {
            return Err(Error::ParameterOutOfRange(format!("weights sum to {total}, not 1")));
        }
        Ok(EmpiricalMeasure { atoms })
    }

    /// The point mass at `atom`.
    pub fn dirac(atom: &str) -> Self {
        EmpiricalMeasure { atoms: vec![(atom.to_string(), Rational::from_integer(1))] }
    }

    /// Normalised counts.
    pub fn from_counts(counts: BTreeMap<String, usize>) -> Result<Self> {
        let total: usize = counts.values().sum();
        if total == 0 {
            return Err(Error::Empty("measure support"));
        }
        EmpiricalMeasure::new(counts.into_iter().filter(|(_, c)| *c > 0).map(|(a, c)| (a, ratio(c, total))))
    }

    pub fn atoms(&self) -> &[(String, Rational)] {
        &self.atoms
    }

    pub fn weight(&self, atom: &str) -> Rational {
        self.atoms
            .binary_search_by(|(a, _)| a.as_str().cmp(atom))
            .map(|i| self.atoms[i].1)
            .unwrap_or_else(|_| Rational::from_integer(0))
    }

    pub fn total(&self) -> Rational {
        self.atoms.iter().map(|(_, w)| *w).sum()
    }
}

/// `Emp(x, F) = (1/|F|) Σ_{g ∈ F} δ_{x|shape + g}`.
///
/// Atoms are the letters of `x` on `shape + g` in canonical order, joined
/// without separator when every letter name is one character long and with
/// `,` otherwise. With `shape = {e}` atoms are single letters.
pub fn empirical_measure(x: &Configuration, set: &FiniteSubset, shape: &FiniteSubset) -> Result<EmpiricalMeasure> {
    if set.is_empty() || shape.is_empty() {
        return Err(Error::Empty("Følner set or shape"));
    }
    let alphabet = x.alphabet();
    let separator = if alphabet.letters().iter().all(|l| l.chars().count() == 1) { "" } else { "," };
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for g in set.iter() {
        let mut parts = Vec::with_capacity(shape.len());
        for s in shape.iter() {
            let cell = s + g;
            let letter = x.evaluate(&cell).ok_or_else(|| Error::UnknownMembership(cell.to_string()))?;
            parts.push(alphabet.name(letter));
        }
        *counts.entry(parts.join(separator)).or_default() += 1;
    }
    EmpiricalMeasure::from_counts(counts)
}

/// The singleton shape `{e}`.
pub fn unit_shape(rank: usize) -> FiniteSubset {
    FiniteSubset::new(rank, [crate::groups::GroupElement::zero(rank)]).expect("rank matches")
}

/// The discrete metric on atoms.
pub fn discrete_metric(a: &str, b: &str) -> Rational {
    Rational::from_integer(i64::from(a != b))
}

/// Total variation `max_B |μ(B) − ν(B)| = (1/2) Σ |μ(a) − ν(a)|`.
pub fn total_variation(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Rational {
    let mut atoms: Vec<&str> = mu.atoms.iter().chain(&nu.atoms).map(|(a, _)| a.as_str()).collect();
    atoms.sort_unstable();
    atoms.dedup();
    let sum: Rational = atoms.iter().map(|a| (mu.weight(a) - nu.weight(a)).abs()).sum();
    sum / 2
}

/// Infimum of `ε > 0` with `μ(B) <= ν(B^ε) + ε` for all `B`, where `B^ε` is
/// the open `ε`-neighbourhood.
fn directed_prokhorov(
    mu: &[i128],
    nu: &[i128],
    denom: i128,
    dist: &[Vec<Rational>],
    levels: &[Rational],
) -> Rational {
    let n = mu.len();
    let support: Vec<usize> = (0..n).filter(|&i| mu[i] > 0).collect();
    let mut best: Option<Rational> = None;
    for (j, &dj) in levels.iter().enumerate() {
        // For ε in (d_j, d_{j+1}] the neighbourhood of B is {y : d(y, B) <= d_j}.
        let neighbours: Vec<u32> = (0..n)
            .map(|a| (0..n).filter(|&b| dist[a][b] <= dj).fold(0u32, |m, b| m | (1 << b)))
            .collect();
        let m = support.len();
        let mut mass = vec![0i128; 1 << m];
        let mut hood = vec![0u32; 1 << m];
        let mut worst = 0i128;
        for subset in 1usize..(1 << m) {
            let low = subset.trailing_zeros() as usize;
            let rest = subset & (subset - 1);
            mass[subset] = mass[rest] + mu[support[low]];
            hood[subset] = hood[rest] | neighbours[support[low]];
            let covered: i128 = (0..n).filter(|&b| hood[subset] & (1 << b) != 0).map(|b| nu[b]).sum();
            worst = worst.max(mass[subset] - covered);
        }
        let c = Rational::new(worst as i64, denom as i64);
        let candidate = c.max(dj);
        let within = levels.get(j + 1).is_none_or(|next| candidate <= *next);
        if within {
            best = Some(best.map_or(candidate, |b: Rational| b.min(candidate)));
        }
    }
    best.expect("the last interval is unbounded")
}

/// Exact Prokhorov distance between finitely supported measures.
///
/// The feasibility defect `max_B [μ(B) − ν(B^ε)]` is piecewise constant in
/// `ε` between consecutive atom distances, so the infimum is found by
/// scanning those intervals; both directions are taken and the larger wins.
pub fn prokhorov_distance(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    metric: &dyn Fn(&str, &str) -> Rational,
) -> Result<Rational> {
    let mut atoms: Vec<&str> = mu.atoms.iter().chain(&nu.atoms).map(|(a, _)| a.as_str()).collect();
    atoms.sort_unstable();
    atoms.dedup();
    if atoms.len() > MAX_SUPPORT {
        return Err(Error::SupportTooLarge { size: atoms.len(), max: MAX_SUPPORT });
    }
    let denom = mu
        .atoms
        .iter()
        .chain(&nu.atoms)
        .fold(1i64, |acc, (_, w)| acc.lcm(w.denom()));
    let scaled = |m: &EmpiricalMeasure| -> Vec<i128> {
        atoms.iter().map(|a| (m.weight(a) * denom).to_integer() as i128).collect()
    };
    let (wm, wn) = (scaled(mu), scaled(nu));
    let dist: Vec<Vec<Rational>> = atoms.iter().map(|a| atoms.iter().map(|b| metric(a, b)).collect()).collect();
    let mut levels: Vec<Rational> = dist.iter().flatten().copied().collect();
    levels.push(Rational::from_integer(0));
    levels.sort();
    levels.dedup();
    let forward = directed_prokhorov(&wm, &wn, denom as i128, &dist, &levels);
    let backward = directed_prokhorov(&wn, &wm, denom as i128, &dist, &levels);
    Ok(forward.max(backward))
}

/// Hausdorff distance between finite sets of measures under the Prokhorov
/// metric.
pub fn hausdorff_distance(
    a: &[EmpiricalMeasure],
    b: &[EmpiricalMeasure],
    metric: &dyn Fn(&str, &str) -> Rational,
) -> Result<Rational> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("measure set"));
    }
    let table: Vec<Vec<Rational>> = a
        .iter()
        .map(|m| b.iter().map(|n| prokhorov_distance(m, n, metric)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let ab = table.iter().map(|row| *row.iter().min().unwrap()).max().unwrap();
    let ba = (0..b.len()).map(|j| table.iter().map(|row| row[j]).min().unwrap()).max().unwrap();
    Ok(ab.max(ba))
}

/// Empirical measures along nested sets with the consecutive distances and
/// the bound `(|F_{n+1}| − |F_n|)/|F_{n+1}|` on them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaProfile {
    pub sizes: Vec<usize>,
    pub measures: Vec<EmpiricalMeasure>,
    /// `D_P(Emp(x, F_{n+1}), Emp(x, F_n))`.
    pub distances: Vec<Rational>,
    pub bounds: Vec<Rational>,
}

pub fn omega_profile(x: &Configuration, sets: &[FiniteSubset], shape: &FiniteSubset) -> Result<OmegaProfile> {
    if sets.is_empty() {
        return Err(Error::Empty("Følner sequence"));
    }
    let measures = sets.iter().map(|f| empirical_measure(x, f, shape)).collect::<Result<Vec<_>>>()?;
    let mut distances = Vec::new();
    let mut bounds = Vec::new();
    for (pair, sizes) in measures.windows(2).zip(sets.windows(2)) {
        distances.push(prokhorov_distance(&pair[1], &pair[0], &discrete_metric)?);
        let (small, big) = (sizes[0].len(), sizes[1].len());
        bounds.push(ratio(big.saturating_sub(small), big));
    }
    Ok(OmegaProfile { sizes: sets.iter().map(FiniteSubset::len).collect(), measures, distances, bounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configs::{Alphabet, OracleConfig, OracleRule};
    use crate::groups::{geometric_lengths, nested_intervals, SubgroupChain};

    fn m(pairs: &[(&str, Rational)]) -> EmpiricalMeasure {
        EmpiricalMeasure::new(pairs.iter().map(|(a, w)| (a.to_string(), *w))).unwrap()
    }

    #[test]
    fn empirical_examples() {
        let chain = SubgroupChain::dyadic(3);
        let evens = Configuration::periodic(chain.clone(), 1, Alphabet::binary(), vec![1, 0]).unwrap();
        let f2 = chain.domain(2).unwrap();
        let mu = empirical_measure(&evens, &f2, &unit_shape(1)).unwrap();
        assert_eq!(mu, m(&[("0", Rational::new(1, 2)), ("1", Rational::new(1, 2))]));
        let c = Configuration::constant(chain.clone(), Alphabet::binary(), 1).unwrap();
        assert_eq!(empirical_measure(&c, &f2, &unit_shape(1)).unwrap(), EmpiricalMeasure::dirac("1"));
        let pairs = empirical_measure(&evens, &f2, &FiniteSubset::from_integers([0, 1])).unwrap();
        assert_eq!(pairs, m(&[("10", Rational::new(1, 2)), ("01", Rational::new(1, 2))]));
    }

    #[test]
    fn prokhorov_examples() {
        let a = EmpiricalMeasure::dirac("a");
        let b = EmpiricalMeasure::dirac("b");
        assert_eq!(prokhorov_distance(&a, &a, &discrete_metric).unwrap(), Rational::from_integer(0));
        assert_eq!(prokhorov_distance(&a, &b, &discrete_metric).unwrap(), Rational::from_integer(1));
        let mix = m(&[("a", Rational::new(3, 4)), ("b", Rational::new(1, 4))]);
        assert_eq!(prokhorov_distance(&a, &mix, &discrete_metric).unwrap(), Rational::new(1, 4));
        let far = |x: &str, y: &str| if x == y { Rational::from_integer(0) } else { Rational::new(1, 3) };
        assert_eq!(prokhorov_distance(&a, &b, &far).unwrap(), Rational::new(1, 3));
    }

    #[test]
    fn support_cap() {
        let wide = EmpiricalMeasure::from_counts((0..16).map(|i| (format!("{i:02}"), 1)).collect()).unwrap();
        assert_eq!(
            prokhorov_distance(&wide, &EmpiricalMeasure::dirac("00"), &discrete_metric).unwrap_err(),
            Error::SupportTooLarge { size: 16, max: 15 }
        );
    }

    #[test]
    fn hausdorff_examples() {
        let a = EmpiricalMeasure::dirac("a");
        let b = EmpiricalMeasure::dirac("b");
        let mix = m(&[("a", Rational::new(1, 2)), ("b", Rational::new(1, 2))]);
        assert_eq!(hausdorff_distance(std::slice::from_ref(&a), std::slice::from_ref(&a), &discrete_metric).unwrap(), Rational::from_integer(0));
        assert_eq!(hausdorff_distance(std::slice::from_ref(&a), &[a.clone(), b], &discrete_metric).unwrap(), Rational::from_integer(1));
        assert_eq!(
            hausdorff_distance(std::slice::from_ref(&a), std::slice::from_ref(&mix), &discrete_metric).unwrap(),
            prokhorov_distance(&a, &mix, &discrete_metric).unwrap()
        );
    }

    #[test]
    fn omega_profiles() {
        let chain = SubgroupChain::dyadic(6);
        let c = Configuration::constant(chain.clone(), Alphabet::binary(), 0).unwrap();
        let sets: Vec<FiniteSubset> = (0..=6).map(|n| chain.domain(n).unwrap()).collect();
        let p = omega_profile(&c, &sets, &unit_shape(1)).unwrap();
        assert!(p.distances.iter().all(|d| *d == Rational::from_integer(0)));

        let evens = Configuration::periodic(chain.clone(), 1, Alphabet::binary(), vec![1, 0]).unwrap();
        let p = omega_profile(&evens, &sets, &unit_shape(1)).unwrap();
        for (d, b) in p.distances.iter().zip(&p.bounds) {
            assert_eq!(*b, Rational::new(1, 2));
            assert!(d <= b);
        }
    }

    #[test]
    fn block_alternating_levels() {
        let eps = Rational::new(1, 2);
        let lengths = geometric_lengths(&eps, 13).unwrap();
        let radius = *lengths.last().unwrap() as u64;
        let x: Configuration = OracleConfig::builtin(1, radius, OracleRule::block_alternating(eps, radius).unwrap())
            .unwrap()
            .into();
        let sets = nested_intervals(&lengths);
        let p = omega_profile(&x, &sets, &unit_shape(1)).unwrap();
        assert_eq!(p.measures[12].weight("1"), Rational::new(1366, 4096));
        assert_eq!(p.measures[11].weight("1"), Rational::new(1366, 2048));
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn measure(max_atoms: usize) -> impl Strategy<Value = EmpiricalMeasure> {
        proptest::collection::btree_map(0usize..6, 1usize..5, 1..=max_atoms).prop_map(|counts| {
            EmpiricalMeasure::from_counts(counts.into_iter().map(|(a, c)| (format!("a{a}"), c)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(mu in measure(5)) {
            prop_assert_eq!(mu.total(), Rational::from_integer(1));
        }

        #[test]
        fn metric_axioms(a in measure(5), b in measure(5), c in measure(5)) {
            let d = |x: &EmpiricalMeasure, y: &EmpiricalMeasure| prokhorov_distance(x, y, &discrete_metric).unwrap();
            prop_assert_eq!(d(&a, &a), Rational::from_integer(0));
            prop_assert_eq!(d(&a, &b) == Rational::from_integer(0), a == b);
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        }

        #[test]
        fn discrete_prokhorov_is_total_variation(a in measure(6), b in measure(6)) {
            prop_assert_eq!(prokhorov_distance(&a, &b, &discrete_metric).unwrap(), total_variation(&a, &b));
        }
    }
}
