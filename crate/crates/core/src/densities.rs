//! Følner averages and upper / lower Banach densities.
//!
//! On unions of cosets the Banach density is exact: `D*(B) = D_*(B)` is the
//! share of `F_n` covered by the representatives. For any other predicate
//! the best we can do is a window scan over translates `F_n + g`,
//! `g ∈ ball(R)`, which bounds the sup over the whole group from below only.

use serde::Serialize;

use crate::configs::{CosetSet, Membership};
use crate::error::{Error, Result};
use crate::groups::{ball, BoxIndex, FiniteSubset, GroupElement};
use crate::rational::{ratio, Rational};

/// How an [`IntervalEstimate`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactCoset,
    Windowed,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactCoset => "exact-coset",
            Method::Windowed => "windowed",
        }
    }
}

/// A bracket `[lower, upper]` around a density or distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalEstimate {
    pub lower: Rational,
    pub upper: Rational,
    pub exact: bool,
    pub method: Method,
    /// Direction of any bias not reflected by the bracket.
    pub caveat: Option<String>,
}

/// Note attached to every windowed estimate.
pub const WINDOW_CAVEAT: &str =
    "window sup over ball(R) bounds the sup over G from below; the upper end only accounts for unknown cells";

impl IntervalEstimate {
    pub fn exact(value: Rational) -> Self {
        IntervalEstimate { lower: value, upper: value, exact: true, method: Method::ExactCoset, caveat: None }
    }

    pub fn bracket(lower: Rational, upper: Rational, method: Method) -> Self {
        debug_assert!(lower <= upper);
        let exact = method == Method::ExactCoset && lower == upper;
        let caveat = (method == Method::Windowed).then(|| WINDOW_CAVEAT.to_string());
        IntervalEstimate { lower, upper, exact, method, caveat }
    }

    /// The single value of an exact estimate.
    pub fn value(&self) -> Option<Rational> {
        self.exact.then_some(self.lower)
    }
}

/// `D_F(A) = |A ∩ F| / |F|`.
pub fn density_in<A: Membership + ?Sized>(set: &FiniteSubset, a: &A) -> Result<Rational> {
    if set.is_empty() {
        return Err(Error::Empty("Følner set"));
    }
    let mut count = 0usize;
    for g in set.iter() {
        match a.member(g) {
            Some(true) => count += 1,
            Some(false) => {}
            None => return Err(Error::UnknownMembership(g.to_string())),
        }
    }
    Ok(ratio(count, set.len()))
}

/// `D_F(A)` bracketed by treating unknown cells as non-members / members.
pub fn density_interval_in<A: Membership + ?Sized>(set: &FiniteSubset, a: &A) -> Result<(Rational, Rational)> {
    if set.is_empty() {
        return Err(Error::Empty("Følner set"));
    }
    let (mut sure, mut possible) = (0usize, 0usize);
    for g in set.iter() {
        match a.member(g) {
            Some(true) => {
                sure += 1;
                possible += 1;
            }
            None => possible += 1,
            Some(false) => {}
        }
    }
    Ok((ratio(sure, set.len()), ratio(possible, set.len())))
}

/// `D*(B) = D_*(B) = |reps| / |F_n|` for a union of cosets.
pub fn banach_density_exact(b: &CosetSet) -> IntervalEstimate {
    IntervalEstimate::exact(b.density())
}

/// `D_*(B) = 1 - D*(G \ B)`.
pub fn lower_banach_density(b: &CosetSet) -> IntervalEstimate {
    let upper_of_complement = banach_density_exact(&b.complement());
    IntervalEstimate::exact(Rational::from_integer(1) - upper_of_complement.lower)
}

/// `max_{g ∈ ball(R)} D_{F + g}(A)`, with unknown cells counted as
/// non-members for `lower` and as members for `upper`. Never flagged exact.
pub fn banach_density_windowed<A: Membership + ?Sized>(a: &A, base: &FiniteSubset, radius: u64) -> Result<IntervalEstimate> {
    if base.is_empty() {
        return Err(Error::Empty("Følner set"));
    }
    let index = BoxIndex::covering(base, radius);
    let field: Vec<Option<bool>> = index.elements().iter().map(|g| a.member(g)).collect();
    let (mut best_sure, mut best_possible) = (0usize, 0usize);
    for g in ball(base.rank(), radius).iter() {
        let (mut sure, mut possible) = (0usize, 0usize);
        for f in base.iter() {
            match field[index.index(f.coords(), g.coords())] {
                Some(true) => {
                    sure += 1;
                    possible += 1;
                }
                None => possible += 1,
                Some(false) => {}
            }
        }
        best_sure = best_sure.max(sure);
        best_possible = best_possible.max(possible);
    }
    Ok(IntervalEstimate::bracket(ratio(best_sure, base.len()), ratio(best_possible, base.len()), Method::Windowed))
}

/// `D_{F + g}(A)` for a single translate.
pub fn translate_density<A: Membership + ?Sized>(a: &A, base: &FiniteSubset, g: &GroupElement) -> Result<Rational> {
    density_in(&base.translate(g), a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::SubgroupChain;

    fn z(v: i64) -> GroupElement {
        GroupElement::scalar(v)
    }

    fn is_even(g: &GroupElement) -> Option<bool> {
        Some(g.coords()[0] % 2 == 0)
    }

    #[test]
    fn folner_averages() {
        let f3 = FiniteSubset::from_integers(0..8);
        assert_eq!(density_in(&f3, &is_even).unwrap(), Rational::new(1, 2));
        assert_eq!(density_in(&FiniteSubset::from_integers([0]), &is_even).unwrap(), Rational::from_integer(1));
        assert_eq!(density_in(&f3, &f3).unwrap(), Rational::from_integer(1));
        let partial = |g: &GroupElement| if g.coords()[0] == 3 { None } else { Some(true) };
        assert_eq!(density_in(&f3, &partial).unwrap_err(), Error::UnknownMembership("3".into()));
        assert_eq!(density_interval_in(&f3, &partial).unwrap(), (Rational::new(7, 8), Rational::from_integer(1)));
    }

    #[test]
    fn exact_coset_densities() {
        let chain = SubgroupChain::dyadic(3);
        let b = CosetSet::new(chain.clone(), 2, [z(0), z(1)]).unwrap();
        assert_eq!(banach_density_exact(&b).value(), Some(Rational::new(2, 4)));
        assert_eq!(banach_density_exact(&CosetSet::empty(chain.clone(), 2).unwrap()).value(), Some(Rational::from_integer(0)));
        assert_eq!(banach_density_exact(&CosetSet::full(chain.clone(), 2).unwrap()).value(), Some(Rational::from_integer(1)));
        let evens = CosetSet::new(chain.clone(), 1, [z(0)]).unwrap();
        assert_eq!(lower_banach_density(&evens).value(), Some(Rational::new(1, 2)));
        assert_eq!(lower_banach_density(&CosetSet::full(chain.clone(), 0).unwrap()).value(), Some(Rational::from_integer(1)));
        let quarter = CosetSet::new(chain, 2, [z(0)]).unwrap();
        assert_eq!(lower_banach_density(&quarter).value(), Some(Rational::new(1, 4)));
    }

    #[test]
    fn windowed_examples() {
        let chain = SubgroupChain::dyadic(5);
        let f3 = chain.domain(3).unwrap();
        let est = banach_density_windowed(&is_even, &f3, 16).unwrap();
        assert_eq!((est.lower, est.upper, est.exact), (Rational::new(1, 2), Rational::new(1, 2), false));
        assert!(est.caveat.is_some());
        let evens = CosetSet::new(chain.clone(), 1, [z(0)]).unwrap();
        assert_eq!(banach_density_exact(&evens).lower, est.lower);

        let nothing = |_: &GroupElement| Some(false);
        assert_eq!(banach_density_windowed(&nothing, &f3, 4).unwrap().upper, Rational::from_integer(0));

        let single = FiniteSubset::from_integers([0]);
        let f5 = chain.domain(5).unwrap();
        let est = banach_density_windowed(&single, &f5, 64).unwrap();
        assert_eq!(est.lower, Rational::new(1, 32));
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use crate::groups::SubgroupChain;
    use proptest::prelude::*;

    fn coset_set() -> impl Strategy<Value = CosetSet> {
        (0usize..=5).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), 1usize << n)
                .prop_map(move |mask| CosetSet::from_mask(SubgroupChain::dyadic(6), n, mask).unwrap())
        })
    }

    proptest! {
        #[test]
        fn complement_densities_sum_to_one(b in coset_set()) {
            let sum = banach_density_exact(&b).lower + banach_density_exact(&b.complement()).lower;
            prop_assert_eq!(sum, Rational::from_integer(1));
        }

        #[test]
        fn windowed_is_monotone_and_reaches_exact(b in coset_set(), n in 0usize..=6) {
            let base = b.chain().domain(n).unwrap();
            let mut previous = Rational::from_integer(0);
            for r in [0u64, 1, 3, 8, 64] {
                let est = banach_density_windowed(&b, &base, r).unwrap();
                prop_assert!(est.lower >= previous);
                previous = est.lower;
            }
            // one full period of translates is visible once R >= q_level
            let full = banach_density_windowed(&b, &base, 1 << b.level()).unwrap();
            if n >= b.level() {
                prop_assert_eq!(full.lower, b.density());
            } else {
                prop_assert!(full.lower >= b.density());
            }
        }

        #[test]
        fn fundamental_domain_averages_are_translation_invariant(b in coset_set(), g in -40i64..40) {
            let base = b.chain().domain(b.level()).unwrap();
            prop_assert_eq!(
                translate_density(&b, &base, &GroupElement::scalar(g)).unwrap(),
                density_in(&base, &b).unwrap()
            );
        }
    }
}
