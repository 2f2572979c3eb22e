//! Weyl-type pseudometrics between configurations.
//!
//! With the discrete letter metric, `D_W(x, z)`, `D_W'(x, z)` and
//! `D*(x, z)` all reduce to the upper Banach density of the disagreement set
//! `{g : x(g) != z(g)}`. For exact pairs on a common chain that set is a union
//! of cosets and every value here is an exact rational. Otherwise values are
//! brackets obtained from a window of translates and say so.

use crate::configs::{exact_disagreement, sample_disagreement, Configuration, CosetSet};
use crate::densities::{banach_density_exact, banach_density_windowed, density_in, IntervalEstimate, Method};
use crate::error::{Error, Result};
use crate::groups::{ball, BoxIndex, FiniteSubset, SubgroupChain};
use crate::rational::{ratio, Rational};

/// How a [`PseudometricReport`] value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    ExactCoset,
    WindowBracket,
}

impl Basis {
    pub fn as_str(self) -> &'static str {
        match self {
            Basis::ExactCoset => "exact-coset",
            Basis::WindowBracket => "window-bracket",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudometricReport {
    pub value: IntervalEstimate,
    pub basis: Basis,
    pub params: Vec<(&'static str, String)>,
}

/// Bracket for the upper Banach density of the disagreement set.
///
/// Exact pairs: `[D*(confirmed), D*(confirmed ∪ unresolved)]`, exact when no
/// cell is unresolved. Other pairs: a window scan of `base + g`,
/// `g ∈ ball(radius)`.
pub fn disagreement_density(x: &Configuration, z: &Configuration, base: &FiniteSubset, radius: u64) -> Result<IntervalEstimate> {
    if x.rank() != z.rank() {
        return Err(Error::RankMismatch { expected: x.rank(), found: z.rank() });
    }
    if let Some((confirmed, unresolved)) = exact_disagreement(x, z)? {
        let lower = banach_density_exact(&confirmed).lower;
        let upper = banach_density_exact(&confirmed.union(&unresolved)?).lower;
        return Ok(IntervalEstimate::bracket(lower, upper, Method::ExactCoset));
    }
    let window = BoxIndex::covering(base, radius).elements();
    let sampled = sample_disagreement(x, z, &window);
    banach_density_windowed(&sampled, base, radius)
}

fn report(value: IntervalEstimate, params: Vec<(&'static str, String)>) -> PseudometricReport {
    let basis = if value.method == Method::ExactCoset { Basis::ExactCoset } else { Basis::WindowBracket };
    PseudometricReport { value, basis, params }
}

/// `D*(x, z) = D*({g : x(g) != z(g)})`.
pub fn dstar_distance(x: &Configuration, z: &Configuration, base: &FiniteSubset, radius: u64) -> Result<PseudometricReport> {
    let value = disagreement_density(x, z, base, radius)?;
    Ok(report(value, vec![("folner_size", base.len().to_string()), ("window", radius.to_string())]))
}

/// `D_W'(x, z) = inf{ε > 0 : D*({g : ρ(x_g, z_g) > ε}) < ε}`.
///
/// For the discrete metric the inner set is the disagreement set for
/// `ε < 1` and empty for `ε >= 1`, so the infimum is `min(d, 1) = d` where
/// `d` is the disagreement density. The map is monotone, so brackets carry
/// over endpoint by endpoint.
pub fn dw_prime_estimate(x: &Configuration, z: &Configuration, base: &FiniteSubset, radius: u64) -> Result<PseudometricReport> {
    let d = disagreement_density(x, z, base, radius)?;
    let one = Rational::from_integer(1);
    let value = IntervalEstimate { lower: d.lower.min(one), upper: d.upper.min(one), ..d };
    Ok(report(value, vec![("folner_size", base.len().to_string()), ("window", radius.to_string())]))
}

/// `max_g |D ∩ (F + g)|` over all translates, for a union of cosets `D`.
/// One full period of translates suffices.
pub fn coset_translate_max(d: &CosetSet, set: &FiniteSubset) -> usize {
    let chain = d.chain();
    let level = d.level();
    let mask = d.mask();
    (0..chain.domain_size(level))
        .map(|gi| {
            let g = chain.element_at(level, gi);
            set.iter().filter(|f| mask[chain.rep_index_offset(f.coords(), g.coords(), level)]).count()
        })
        .max()
        .unwrap_or(0)
}

/// Window proxy and, when available, the exact value of `H(F) / |F|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylBound {
    /// `(1/|F|) max_{g ∈ ball(R)} Σ_{f ∈ F} ρ(x(f+g), z(f+g))`: a window proxy
    /// for the upper bound `H(F)/|F| >= D_W(x, z)`, itself at most `H(F)/|F|`.
    pub window_proxy: Rational,
    /// `H(F)/|F|` from a full-period scan, for fully resolved exact pairs.
    pub exact: Option<Rational>,
}

/// Label attached to the window proxy in reports.
pub const WEYL_PROXY_LABEL: &str = "window proxy for an upper bound";

/// Disagreement counts `Σ_{f ∈ F} ρ(x(f+g), z(f+g))` for every `g ∈ ball(R)`.
fn window_counts(x: &Configuration, z: &Configuration, set: &FiniteSubset, radius: u64) -> Result<Vec<usize>> {
    let index = BoxIndex::covering(set, radius);
    let window = index.elements();
    let sampled = sample_disagreement(x, z, &window);
    let mut counts = Vec::new();
    for g in ball(set.rank(), radius).iter() {
        let mut count = 0;
        for f in set.iter() {
            match sampled.values[index.index(f.coords(), g.coords())] {
                Some(true) => count += 1,
                Some(false) => {}
                None => return Err(Error::UnknownMembership((f + g).to_string())),
            }
        }
        counts.push(count);
    }
    Ok(counts)
}

/// Exact `H(F) = max_g Σ_{f∈F} ρ(x(f+g), z(f+g))` for exact pairs with no
/// unresolved cell.
pub fn exact_h(x: &Configuration, z: &Configuration, set: &FiniteSubset) -> Result<Option<usize>> {
    match exact_disagreement(x, z)? {
        Some((confirmed, unresolved)) if unresolved.is_empty() => Ok(Some(coset_translate_max(&confirmed, set))),
        _ => Ok(None),
    }
}

pub fn weyl_upper_bound(x: &Configuration, z: &Configuration, set: &FiniteSubset, radius: u64) -> Result<WeylBound> {
    if set.is_empty() {
        return Err(Error::Empty("Følner set"));
    }
    let counts = window_counts(x, z, set, radius)?;
    let window_proxy = ratio(counts.into_iter().max().unwrap_or(0), set.len());
    let exact = exact_h(x, z, set)?.map(|h| ratio(h, set.len()));
    Ok(WeylBound { window_proxy, exact })
}

/// Følner averages of the disagreement indicator along `F_n`, `n ∈ levels`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BesicovitchEstimate {
    pub averages: Vec<(usize, Rational)>,
    /// Running maximum of the averages, a finite proxy for the limsup.
    pub running_max: Vec<Rational>,
}

pub fn besicovitch_estimate(
    x: &Configuration,
    z: &Configuration,
    chain: &SubgroupChain,
    levels: std::ops::RangeInclusive<usize>,
) -> Result<BesicovitchEstimate> {
    let mut averages = Vec::new();
    let mut running_max = Vec::new();
    let mut best = Rational::from_integer(0);
    for n in levels {
        let domain = chain.domain(n)?;
        let sampled = sample_disagreement(x, z, &domain);
        let avg = density_in(&domain, &sampled)?;
        best = best.max(avg);
        averages.push((n, avg));
        running_max.push(best);
    }
    Ok(BesicovitchEstimate { averages, running_max })
}

/// Both sides of Shearer's inequality `k·H(F) <= Σ_i H(K_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShearerOutcome {
    pub holds: bool,
    /// `H(F)`.
    pub lhs: Rational,
    /// `(1/k) Σ_i H(K_i)`.
    pub rhs: Rational,
    /// True when the `H` values are exact rather than window proxies.
    pub exact: bool,
}

/// Checks that every element of `set` lies in at least `k` members of `cover`.
pub fn validate_k_cover(set: &FiniteSubset, cover: &[FiniteSubset], k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::ParameterOutOfRange("k must be positive".into()));
    }
    for g in set.iter() {
        let count = cover.iter().filter(|c| c.contains(g)).count();
        if count < k {
            return Err(Error::NotAKCover { k, element: g.to_string(), count });
        }
    }
    Ok(())
}

/// Shearer's inequality for `H(F) = Δ*_F(x, z)`, exact for fully resolved
/// exact pairs, otherwise on window proxies sharing the same radius.
pub fn shearer_oracle(
    x: &Configuration,
    z: &Configuration,
    set: &FiniteSubset,
    cover: &[FiniteSubset],
    k: usize,
    radius: u64,
) -> Result<ShearerOutcome> {
    validate_k_cover(set, cover, k)?;
    let exact = match exact_disagreement(x, z)? {
        Some((confirmed, unresolved)) if unresolved.is_empty() => Some(confirmed),
        _ => None,
    };
    let h = |s: &FiniteSubset| -> Result<usize> {
        match &exact {
            Some(d) => Ok(coset_translate_max(d, s)),
            None => Ok(window_counts(x, z, s, radius)?.into_iter().max().unwrap_or(0)),
        }
    };
    let lhs = h(set)?;
    let mut total = 0usize;
    for c in cover {
        total += h(c)?;
    }
    Ok(ShearerOutcome {
        holds: k * lhs <= total,
        lhs: Rational::from_integer(lhs as i64),
        rhs: ratio(total, k),
        exact: exact.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configs::{Alphabet, OracleConfig, OracleRule};
    use crate::groups::GroupElement;

    fn setup() -> (SubgroupChain, Configuration, Configuration, Configuration) {
        let chain = SubgroupChain::dyadic(4);
        let zero = Configuration::constant(chain.clone(), Alphabet::binary(), 0).unwrap();
        let one = Configuration::constant(chain.clone(), Alphabet::binary(), 1).unwrap();
        let evens = Configuration::periodic(chain.clone(), 1, Alphabet::binary(), vec![1, 0]).unwrap();
        (chain, zero, one, evens)
    }

    #[test]
    fn dstar_examples() {
        let (chain, zero, one, evens) = setup();
        let base = chain.domain(3).unwrap();
        let r = dstar_distance(&zero, &one, &base, 8).unwrap();
        assert_eq!((r.value.value(), r.basis), (Some(Rational::from_integer(1)), Basis::ExactCoset));
        assert_eq!(dstar_distance(&evens, &zero, &base, 8).unwrap().value.value(), Some(Rational::new(1, 2)));
        assert_eq!(dstar_distance(&evens, &evens, &base, 8).unwrap().value.value(), Some(Rational::from_integer(0)));
    }

    #[test]
    fn oracle_pairs_are_bracketed() {
        let (chain, zero, _, _) = setup();
        let parity: Configuration = OracleConfig::builtin(1, 40, OracleRule::Parity).unwrap().into();
        let r = dstar_distance(&parity, &zero, &chain.domain(3).unwrap(), 8).unwrap();
        assert_eq!(r.basis, Basis::WindowBracket);
        assert!(!r.value.exact);
        assert_eq!(r.value.lower, Rational::new(1, 2));
    }

    #[test]
    fn weyl_examples() {
        let (_, zero, one, evens) = setup();
        let single = FiniteSubset::from_integers([0]);
        assert_eq!(weyl_upper_bound(&evens, &zero, &single, 3).unwrap().window_proxy, Rational::from_integer(1));
        let pair = FiniteSubset::from_integers([0, 1]);
        assert_eq!(weyl_upper_bound(&evens, &zero, &pair, 3).unwrap().exact, Some(Rational::new(1, 2)));
        let same = weyl_upper_bound(&one, &one, &pair, 3).unwrap();
        assert_eq!((same.window_proxy, same.exact), (Rational::from_integer(0), Some(Rational::from_integer(0))));
    }

    #[test]
    fn besicovitch_examples() {
        let (chain, zero, one, evens) = setup();
        let est = besicovitch_estimate(&evens, &zero, &chain, 1..=4).unwrap();
        assert!(est.averages.iter().all(|(_, a)| *a == Rational::new(1, 2)));
        let est = besicovitch_estimate(&zero, &one, &chain, 0..=4).unwrap();
        assert!(est.averages.iter().all(|(_, a)| *a == Rational::from_integer(1)));
        let est = besicovitch_estimate(&one, &one, &chain, 0..=4).unwrap();
        assert_eq!(*est.running_max.last().unwrap(), Rational::from_integer(0));
    }

    #[test]
    fn besicovitch_is_the_disagreement_average() {
        let (chain, zero, _, _) = setup();
        let x = Configuration::periodic(chain.clone(), 3, Alphabet::binary(), vec![1, 0, 0, 1, 1, 0, 1, 0]).unwrap();
        let est = besicovitch_estimate(&x, &zero, &chain, 0..=4).unwrap();
        let (confirmed, _) = exact_disagreement(&x, &zero).unwrap().unwrap();
        for (n, avg) in est.averages {
            assert_eq!(avg, density_in(&chain.domain(n).unwrap(), &confirmed).unwrap());
        }
    }

    #[test]
    fn dw_prime_examples() {
        let (chain, zero, one, evens) = setup();
        let base = chain.domain(2).unwrap();
        assert_eq!(dw_prime_estimate(&one, &one, &base, 4).unwrap().value.lower, Rational::from_integer(0));
        assert_eq!(dw_prime_estimate(&evens, &zero, &base, 4).unwrap().value.value(), Some(Rational::new(1, 2)));
        assert_eq!(dw_prime_estimate(&zero, &one, &base, 4).unwrap().value.value(), Some(Rational::from_integer(1)));
    }

    #[test]
    fn shearer_examples() {
        let (_, zero, _, evens) = setup();
        let f = FiniteSubset::from_integers([0, 1]);
        let out = shearer_oracle(&evens, &zero, &f, std::slice::from_ref(&f), 1, 4).unwrap();
        assert!(out.holds && out.lhs == out.rhs);
        let f3 = FiniteSubset::from_integers([0, 1, 2]);
        let cover = [
            FiniteSubset::from_integers([0, 1]),
            FiniteSubset::from_integers([1, 2]),
            FiniteSubset::from_integers([0, 2]),
        ];
        assert!(shearer_oracle(&evens, &zero, &f3, &cover, 2, 4).unwrap().holds);
        let err = shearer_oracle(&evens, &zero, &f3, &[FiniteSubset::from_integers([0, 1])], 1, 4).unwrap_err();
        assert_eq!(err, Error::NotAKCover { k: 1, element: GroupElement::scalar(2).to_string(), count: 0 });
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use crate::configs::Alphabet;
    use proptest::prelude::*;

    fn periodic() -> impl Strategy<Value = Configuration> {
        (0usize..=3).prop_flat_map(|level| {
            proptest::collection::vec(0u16..2, 1usize << level).prop_map(move |w| {
                Configuration::periodic(SubgroupChain::dyadic(5), level, Alphabet::binary(), w).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn pseudometric_axioms(a in periodic(), b in periodic(), c in periodic()) {
            let base = FiniteSubset::from_integers(0..4);
            let d = |x: &Configuration, y: &Configuration| dstar_distance(x, y, &base, 0).unwrap().value.value().unwrap();
            prop_assert_eq!(d(&a, &a), Rational::from_integer(0));
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        }

        #[test]
        fn infimum_rule_is_consistent(a in periodic(), b in periodic()) {
            let chain = SubgroupChain::dyadic(5);
            let density = dstar_distance(&a, &b, &chain.domain(0).unwrap(), 0).unwrap().value.value().unwrap();
            for m in 0..=5 {
                let f = chain.domain(m).unwrap();
                let h = exact_h(&a, &b, &f).unwrap().unwrap();
                prop_assert!(ratio(h, f.len()) >= density);
                if m >= 3 {
                    prop_assert_eq!(ratio(h, f.len()), density);
                }
            }
        }

        #[test]
        fn dw_prime_collapses_to_dstar(a in periodic(), b in periodic()) {
            let base = FiniteSubset::from_integers(0..4);
            let d = dstar_distance(&a, &b, &base, 0).unwrap().value;
            let w = dw_prime_estimate(&a, &b, &base, 0).unwrap().value;
            prop_assert_eq!(d, w);
        }
    }
}
