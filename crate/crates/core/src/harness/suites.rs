//! Bundled verification suites. Randomised suites draw from `ChaCha8Rng`
//! seeded with `seed_from_u64(seed)`, one fresh generator per suite, so a
//! suite's output does not depend on which other suites ran.

use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::configs::{exact_disagreement, Alphabet, Configuration, CosetSet, Letter, OracleConfig, OracleRule};
use crate::densities::{banach_density_exact, lower_banach_density};
use crate::entropy::{
    binomial_bound, continuity_counting_check, entropy_estimate, es_entropy, pattern_set, SampledSystem,
};
use crate::error::Result;
use crate::groups::{geometric_lengths, linear_lengths, make_chain, nested_intervals, FiniteSubset, GroupElement, SubgroupChain};
use crate::harness::report::Assertion;
use crate::harness::spec::Suite;
use crate::measures::{discrete_metric, empirical_measure, omega_profile, prokhorov_distance, total_variation, unit_shape, EmpiricalMeasure};
use crate::metrics::{dstar_distance, shearer_oracle};
use crate::rational::{ratio, Rational};
use crate::toeplitz::{
    krieger_construct, periodic_approximation, psi_path, regular_table, regularity_profile, toeplitz_from_cylinders,
    toeplitz_interpolate, verify_skeleton, KriegerParams, PathPoint, QuotaRule, DEFAULT_REGULARITY_TOLERANCE,
};

/// Assertions and notes produced by one suite.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteOutcome {
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
}

impl SuiteOutcome {
    fn push(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match suite {
        Suite::Chain => chain_suite(),
        Suite::Density => density_suite(&mut rng),
        Suite::Path => path_suite(),
        Suite::Interpolation => interpolation_suite(),
        Suite::Krieger => krieger_suite(),
        Suite::EntropyContinuity => entropy_continuity_suite(&mut rng),
        Suite::EsBound => es_bound_suite(),
        Suite::Prokhorov => prokhorov_suite(&mut rng),
        Suite::Omega => omega_suite(),
        Suite::Regular => regular_suite(),
        Suite::Shearer => shearer_suite(&mut rng),
        Suite::Sandwich => sandwich_suite(&mut rng),
        Suite::All => {
            let mut out = SuiteOutcome::default();
            for s in Suite::EACH {
                let part = run_suite(s, seed)?;
                out.assertions.extend(part.assertions);
                out.notes.extend(part.notes);
            }
            Ok(out)
        }
    }
}

fn chain_suite() -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    let dyadic: Vec<i64> = (1..=8).map(|k| 1i64 << k).collect();
    for (rank, scales) in [(1usize, dyadic), (1, vec![3, 6, 12, 24]), (2, vec![2, 4])] {
        let chain = make_chain(rank, &scales)?;
        let report = chain.verify_conditions();
        out.push(Assertion::new(
            format!("chain rank {rank} scales {scales:?}: violations"),
            report.violations.len(),
            "==",
            0usize,
            report.is_valid(),
        ));
        out.notes.push(format!("rank {rank} scales {scales:?}: {} cells checked", report.cells_checked));
    }
    Ok(out)
}

fn density_suite(rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    let chain = SubgroupChain::dyadic(8);
    for n in 0..=8 {
        let mut failures = 0usize;
        for _ in 0..50 {
            let mask: Vec<bool> = (0..chain.domain_size(n)).map(|_| rng.gen_bool(0.5)).collect();
            let count = mask.iter().filter(|&&b| b).count();
            let b = CosetSet::from_mask(chain.clone(), n, mask)?;
            let d = banach_density_exact(&b).lower;
            let c = banach_density_exact(&b.complement()).lower;
            let lower = lower_banach_density(&b).lower;
            if d != ratio(count, chain.domain_size(n)) || d + c != Rational::from_integer(1) || lower != d {
                failures += 1;
            }
        }
        out.push(Assertion::new(format!("level {n}: random coset sets with wrong density"), failures, "==", 0usize, failures == 0));
    }
    Ok(out)
}

/// `Ψ(t)` on `{k/16}` at depth 8.
pub fn grid_points(depth: usize) -> Result<Vec<PathPoint>> {
    let chain = SubgroupChain::dyadic(depth);
    (0..=16).map(|k| psi_path(q(k, 16), &chain, depth, QuotaRule::Corrected)).collect()
}

fn path_suite() -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    let depth = 8;
    let chain = SubgroupChain::dyadic(depth);
    let points = grid_points(depth)?;
    let slack = ratio(1, chain.domain_size(depth));
    let base = chain.domain(depth)?;
    let (mut lipschitz_failures, mut nesting_failures) = (0usize, 0usize);
    let mut worst = Rational::from_integer(-1);
    for (i, ps) in points.iter().enumerate() {
        for pt in &points[i + 1..] {
            let report = dstar_distance(&ps.configuration(), &pt.configuration(), &base, 0)?;
            let bound = pt.t - ps.t + slack;
            worst = worst.max(report.value.upper - (pt.t - ps.t));
            if !(report.value.exact && report.value.upper <= bound) {
                lipschitz_failures += 1;
            }
            for n in 0..=depth {
                if !ps.d_sets[n].is_subset(&pt.d_sets[n])? {
                    nesting_failures += 1;
                }
            }
        }
    }
    out.push(Assertion::new("grid pairs violating D*(Ψ(s),Ψ(t)) <= t-s+1/256", lipschitz_failures, "==", 0usize, lipschitz_failures == 0));
    out.push(Assertion::le("max over pairs of D*(Ψ(s),Ψ(t)) - (t-s)", worst, slack));
    out.push(Assertion::new("nesting failures D_n(s) ⊆ D_n(t)", nesting_failures, "==", 0usize, nesting_failures == 0));
    let zero = &points[0].configuration();
    let one = &points[16].configuration();
    let all = |x: &Configuration, letter: Letter| (0..chain.domain_size(depth)).all(|i| x.evaluate(&chain.element_at(depth, i)) == Some(letter));
    out.push(Assertion::holds("Ψ(0) = 0^G", all(zero, 0)));
    out.push(Assertion::holds("Ψ(1) = 1^G", all(one, 1)));

    let half = &points[8];
    let evens = CosetSet::new(chain.clone(), 1, [GroupElement::scalar(0)])?;
    out.push(Assertion::holds("Ψ(1/2) = indicator of 0+2Z", half.table.is_total() && half.d_sets[depth].same_elements(&evens)?));
    let d = dstar_distance(zero, &half.configuration(), &base, 0)?.value;
    out.push(Assertion::eq("D*(Ψ(0), Ψ(1/2))", d.upper, q(1, 2)));
    let third = psi_path(q(1, 3), &SubgroupChain::dyadic(4), 4, QuotaRule::Corrected)?;
    out.push(Assertion::eq("D*(D_4(1/3))", third.d_density(), q(5, 16)));
    Ok(out)
}

/// The two tables interpolated by the interpolation suite.
pub fn interpolation_endpoints(chain: &SubgroupChain) -> Result<(Configuration, Configuration)> {
    let g = GroupElement::scalar;
    let z = toeplitz_from_cylinders(chain, &Alphabet::binary(), &[(1, g(0), 0), (2, g(1), 1), (3, g(3), 0), (3, g(7), 1)])?;
    let zp = toeplitz_from_cylinders(chain, &Alphabet::binary(), &[(1, g(1), 1), (2, g(0), 0), (2, g(2), 1)])?;
    Ok((z.into(), zp.into()))
}

fn interpolation_suite() -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    let depth = 8;
    let chain = SubgroupChain::dyadic(depth);
    let (z, zp) = interpolation_endpoints(&chain)?;
    let points = grid_points(depth)?;
    let us: Vec<Configuration> = points.iter().map(|p| toeplitz_interpolate(&z, &zp, p).map(Configuration::from)).collect::<Result<_>>()?;
    let base = chain.domain(depth)?;
    let same = |a: &Configuration, b: &Configuration| -> Result<bool> {
        Ok(matches!(exact_disagreement(a, b)?, Some((c, u)) if c.is_empty() && u.is_empty()))
    };
    out.push(Assertion::holds("u(1) = z", same(&us[16], &z)?));
    out.push(Assertion::holds("u(0) = z'", same(&us[0], &zp)?));
    let mut failures = 0usize;
    for i in 0..us.len() {
        for j in i + 1..us.len() {
            let du = dstar_distance(&us[i], &us[j], &base, 0)?.value;
            let dpsi = dstar_distance(&points[i].configuration(), &points[j].configuration(), &base, 0)?.value;
            if !(du.exact && dpsi.exact && du.upper <= dpsi.lower) {
                failures += 1;
            }
        }
    }
    out.push(Assertion::new("pairs with D*(u(s),u(t)) > D*(Ψ(s),Ψ(t))", failures, "==", 0usize, failures == 0));
    Ok(out)
}

fn krieger_suite() -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    let chain = SubgroupChain::dyadic(10);
    let result = krieger_construct(&KriegerParams::new(q(1, 2), 2), &chain, &Alphabet::binary())?;
    let eta: Configuration = result.table.clone().into();
    for stage in &result.log.stages {
        out.push(Assertion::le(
            format!("stage {} (level {}): periodic cells <= (1-γ)|F|", stage.index, stage.level),
            Rational::from_integer(stage.periodic_count as i64),
            stage.periodic_budget,
        ));
    }
    for c in &result.log.certificates {
        let squared = (c.pattern_count as u128).pow(2);
        out.push(Assertion::new(
            format!("level {}: |B_F|^2 >= 2^|F|", c.level),
            squared.to_string(),
            ">=",
            (1u128 << c.domain_size).to_string(),
            squared >= 1u128 << c.domain_size,
        ));
        out.push(Assertion::holds(format!("level {}: planted patterns all present", c.level), c.planted_holds));
        let est = entropy_estimate(&eta, &chain, c.level, 0)?;
        let floor = 0.5 * std::f64::consts::LN_2 - std::f64::consts::LN_2 / c.domain_size as f64;
        out.push(Assertion::new(format!("level {}: entropy estimate (nats)", c.level), est.value, ">=", floor, est.value >= floor));
    }
    out.notes.extend(result.log.notes.iter().cloned());
    Ok(out)
}

fn random_word(rng: &mut ChaCha8Rng, len: usize) -> Vec<Letter> {
    (0..len).map(|_| rng.gen_range(0..2)).collect()
}

fn entropy_continuity_suite(rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    let chain = SubgroupChain::dyadic(6);
    let f6 = chain.domain(6)?;
    let mut failures = 0usize;
    for _ in 0..20 {
        // x has a short period so its language is small; z flips fewer than
        // 16 of the 64 cells
        let period = 1usize << rng.gen_range(0..=3);
        let short = random_word(rng, period);
        let word: Vec<Letter> = (0..64).map(|i| short[i % period]).collect();
        let mut flipped = word.clone();
        let flips = rng.gen_range(0..16);
        for &i in rand::seq::index::sample(rng, 64, flips).iter().collect::<Vec<_>>().iter() {
            flipped[i] ^= 1;
        }
        let x = Configuration::periodic(chain.clone(), 6, Alphabet::binary(), word)?;
        let z = Configuration::periodic(chain.clone(), 6, Alphabet::binary(), flipped)?;
        let d = dstar_distance(&x, &z, &f6, 0)?.value.upper;
        let cx = pattern_set(&x, &f6, 0)?.patterns.len();
        let cz = pattern_set(&z, &f6, 0)?.patterns.len();
        let check = continuity_counting_check(cz, cx, &d, f6.len(), 2);
        if !(d < q(1, 4) && check.holds) {
            failures += 1;
        }
    }
    out.push(Assertion::new("random pairs violating the counting inequality", failures, "==", 0usize, failures == 0));
    Ok(out)
}

fn es_bound_suite() -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    let mut failures = 0usize;
    for n in 1..=30u64 {
        for k in 1..=10 {
            if !binomial_bound(n, &q(k, 20)).holds {
                failures += 1;
            }
        }
    }
    out.push(Assertion::new("(n, ε) pairs violating the binomial bound", failures, "==", 0usize, failures == 0));
    let spot = binomial_bound(20, &q(1, 4));
    out.push(Assertion::new("n=20, ε=1/4: partial binomial sum", spot.lhs.to_string(), "==", "21700", spot.lhs == 21700u32.into()));
    out.push(Assertion::new("n=20, ε=1/4: 2^{n E_S(ε)}", spot.rhs, ">=", 21700.0, spot.holds));
    out.notes.push(format!("E_S(1/4) = {}", es_entropy(&q(1, 4))));
    Ok(out)
}

/// `D_P` straight from the definition: the smallest candidate `ε` at which,
/// or just after which, `μ(B) <= ν(B^ε) + ε` holds for every subset `B` in
/// both directions. Candidates are `0`, the pairwise distances and every
/// defect `μ(B) − ν(B')`.
pub fn prokhorov_brute_force(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, metric: &dyn Fn(&str, &str) -> Rational) -> Rational {
    let mut atoms: Vec<String> = mu.atoms().iter().chain(nu.atoms()).map(|(a, _)| a.clone()).collect();
    atoms.sort();
    atoms.dedup();
    let n = atoms.len();
    let weight = |m: &EmpiricalMeasure, set: u32| -> Rational {
        (0..n).filter(|i| set >> i & 1 == 1).map(|i| m.weight(&atoms[i])).sum()
    };
    let neighbourhood = |set: u32, eps: Rational| -> u32 {
        (0..n)
            .filter(|&j| (0..n).any(|i| set >> i & 1 == 1 && metric(&atoms[i], &atoms[j]) < eps))
            .fold(0, |m, j| m | 1 << j)
    };
    let feasible = |eps: Rational| -> bool {
        (0..1u32 << n).all(|b| {
            let nb = neighbourhood(b, eps);
            weight(mu, b) <= weight(nu, nb) + eps && weight(nu, b) <= weight(mu, nb) + eps
        })
    };
    let mut candidates = vec![Rational::from_integer(0), Rational::from_integer(1)];
    for a in &atoms {
        for b in &atoms {
            candidates.push(metric(a, b));
        }
    }
    for b in 0..1u32 << n {
        for c in 0..1u32 << n {
            candidates.push(weight(mu, b) - weight(nu, c));
            candidates.push(weight(nu, b) - weight(mu, c));
        }
    }
    candidates.retain(|c| *c >= Rational::from_integer(0));
    candidates.sort();
    candidates.dedup();
    for (i, &c) in candidates.iter().enumerate() {
        let next = candidates.get(i + 1).copied().unwrap_or(c + 1);
        if feasible(c) || feasible((c + next) / 2) {
            return c;
        }
    }
    unreachable!("ε = 1 is always feasible for probability measures")
}

/// A random measure on up to `max_atoms` of the letters `a..f`, weights with
/// denominator at most 12.
pub fn random_measure(rng: &mut ChaCha8Rng, max_atoms: usize) -> EmpiricalMeasure {
    let letters = ["a", "b", "c", "d", "e", "f"];
    let k = rng.gen_range(1..=max_atoms.min(letters.len()));
    let chosen: Vec<&str> = letters.choose_multiple(rng, k).copied().collect();
    let total = rng.gen_range(k..=12);
    let mut counts = vec![1usize; k];
    for _ in k..total {
        counts[rng.gen_range(0..k)] += 1;
    }
    EmpiricalMeasure::new(chosen.into_iter().zip(counts).map(|(a, c)| (a.to_string(), ratio(c, total)))).expect("weights sum to 1")
}

/// Points of `a..f` on the line at `k/8`, as a metric on atom names.
pub fn line_metric(positions: [i64; 6]) -> impl Fn(&str, &str) -> Rational {
    move |a: &str, b: &str| {
        let pa = positions[(a.as_bytes()[0] - b'a') as usize];
        let pb = positions[(b.as_bytes()[0] - b'a') as usize];
        q((pa - pb).abs(), 8)
    }
}

fn prokhorov_suite(rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    let mut mismatches = 0usize;
    for _ in 0..200 {
        let positions: [i64; 6] = std::array::from_fn(|_| rng.gen_range(0..=12));
        let metric = line_metric(positions);
        let (mu, nu) = (random_measure(rng, 6), random_measure(rng, 6));
        if prokhorov_distance(&mu, &nu, &metric)? != prokhorov_brute_force(&mu, &nu, &metric) {
            mismatches += 1;
        }
    }
    out.push(Assertion::new("random pairs where D_P differs from brute force", mismatches, "==", 0usize, mismatches == 0));
    let mut axiom_failures = 0usize;
    for _ in 0..100 {
        let positions: [i64; 6] = std::array::from_fn(|_| rng.gen_range(0..=12));
        let metric = line_metric(positions);
        let m: Vec<EmpiricalMeasure> = (0..3).map(|_| random_measure(rng, 6)).collect();
        let d = |i: usize, j: usize| prokhorov_distance(&m[i], &m[j], &metric);
        let (ab, bc, ac, ba, aa) = (d(0, 1)?, d(1, 2)?, d(0, 2)?, d(1, 0)?, d(0, 0)?);
        if !(ac <= ab + bc && ab == ba && aa == Rational::from_integer(0) && ab >= Rational::from_integer(0)) {
            axiom_failures += 1;
        }
        if prokhorov_distance(&m[0], &m[1], &discrete_metric)? != total_variation(&m[0], &m[1]) {
            axiom_failures += 1;
        }
    }
    out.push(Assertion::new("random triples violating the metric axioms or D_P = TV", axiom_failures, "==", 0usize, axiom_failures == 0));
    for (pa, pb) in [(0i64, 3i64), (0, 8), (2, 20)] {
        let mut positions = [0i64; 6];
        positions[0] = pa;
        positions[1] = pb;
        let metric = line_metric(positions);
        let d = prokhorov_distance(&EmpiricalMeasure::dirac("a"), &EmpiricalMeasure::dirac("b"), &metric)?;
        out.push(Assertion::eq(format!("D_P(δ_a, δ_b) with ρ = {}", metric("a", "b")), d, metric("a", "b").min(Rational::from_integer(1))));
    }
    Ok(out)
}

/// Configurations used for the `(|F_{n+1}| − |F_n|)/|F_{n+1}|` bound.
pub fn omega_test_configs(radius: u64) -> Result<Vec<(String, Configuration)>> {
    let chain = SubgroupChain::dyadic(3);
    Ok(vec![
        ("block_alternating(1/2)".into(), OracleConfig::builtin(1, radius, OracleRule::block_alternating(q(1, 2), radius)?)?.into()),
        ("champernowne_binary".into(), OracleConfig::builtin(1, radius, OracleRule::ChampernowneBinary)?.into()),
        ("parity".into(), OracleConfig::builtin(1, radius, OracleRule::Parity)?.into()),
        ("periodic 00010111".into(), Configuration::periodic(chain, 3, Alphabet::binary(), vec![0, 0, 0, 1, 0, 1, 1, 1])?),
    ])
}

fn omega_suite() -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    let eps = q(1, 2);
    let lengths = geometric_lengths(&eps, 13)?;
    let radius = *lengths.last().expect("13 boxes") as u64;
    let x: Configuration = OracleConfig::builtin(1, radius, OracleRule::block_alternating(eps, radius)?)?.into();
    let sets = nested_intervals(&lengths);
    let tol = q(1, 50);
    for (n, set) in sets.iter().enumerate().skip(1) {
        let mu = empirical_measure(&x, set, &unit_shape(1))?;
        let target = if n % 2 == 0 { q(1, 3) } else { q(2, 3) };
        if n >= 11 {
            let w = mu.weight("1");
            out.push(Assertion::le(format!("level {n} (|F| = {}): |weight of 1 - {target}|", set.len()), (w - target).abs(), tol));
        }
    }
    for (name, config) in omega_test_configs(64)? {
        let sets = nested_intervals(&linear_lengths(51));
        let profile = omega_profile(&config, &sets, &unit_shape(1))?;
        let failures = profile.distances.iter().zip(&profile.bounds).filter(|(d, b)| d > b).count();
        out.push(Assertion::new(format!("{name}: consecutive D_P above the box bound, n <= 50"), failures, "==", 0usize, failures == 0));
    }
    Ok(out)
}

fn regular_suite() -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    let depth = 8;
    let chain = SubgroupChain::dyadic(depth);
    let x: Configuration = regular_table(&chain, depth, &Alphabet::binary())?.into();
    let profile = regularity_profile(&x, depth, DEFAULT_REGULARITY_TOLERANCE)?;
    out.notes.push(format!("profile at depth {depth}: {}", profile.limit_proxy()));
    let skeleton = verify_skeleton(&x, depth)?;
    out.push(Assertion::holds("skeleton conditions at levels 1..=8", skeleton.nonempty_everywhere() && skeleton.separated_everywhere()));
    let mut previous_entropy = f64::INFINITY;
    let mut previous_measure: Option<EmpiricalMeasure> = None;
    for n in 0..depth {
        let approx = periodic_approximation(&x, n)?;
        out.push(Assertion::le(format!("level {n}: D*(x^(n), x) <= 1 - D*(Per)"), approx.distance.upper, approx.bound));
        if n >= 1 {
            let e = entropy_estimate(&approx.approximation, &chain, n, 0)?.value;
            let ceiling = n as f64 * std::f64::consts::LN_2 / (1u64 << n) as f64;
            out.push(Assertion::new(format!("level {n}: entropy of x^(n) on F_n"), e, "<=", previous_entropy.min(ceiling), e <= previous_entropy && e <= ceiling + 1e-12));
            previous_entropy = e;
        }
        let mu = empirical_measure(&x, &chain.domain(n)?, &unit_shape(1))?;
        if let Some(prev) = &previous_measure {
            let bound = q(2, 1 << n);
            out.push(Assertion::le(format!("TV(μ_{}, μ_{n})", n - 1), total_variation(prev, &mu), bound));
        }
        previous_measure = Some(mu);
    }
    Ok(out)
}

/// A random `k`-cover of `set` by `m` subsets.
pub fn random_k_cover(rng: &mut ChaCha8Rng, set: &FiniteSubset) -> (Vec<FiniteSubset>, usize) {
    let m = rng.gen_range(2..=6);
    let k = rng.gen_range(1..=m);
    let mut members: Vec<Vec<GroupElement>> = (0..m)
        .map(|_| set.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect())
        .collect();
    for g in set.iter() {
        let mut holders: Vec<usize> = (0..m).filter(|&i| members[i].contains(g)).collect();
        while holders.len() < k {
            let candidates: Vec<usize> = (0..m).filter(|i| !holders.contains(i)).collect();
            let pick = *candidates.choose(rng).expect("k <= m");
            members[pick].push(g.clone());
            holders.push(pick);
        }
    }
    let rank = set.rank();
    (members.into_iter().map(|e| FiniteSubset::new(rank, e).expect("same rank")).collect(), k)
}

fn shearer_suite(rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    let chain = SubgroupChain::dyadic(6);
    let f4 = chain.domain(4)?;
    let mut failures = 0usize;
    let mut inexact = 0usize;
    for _ in 0..100 {
        let level = rng.gen_range(0..=6);
        let x = Configuration::periodic(chain.clone(), level, Alphabet::binary(), random_word(rng, 1 << level))?;
        let z = Configuration::periodic(chain.clone(), level, Alphabet::binary(), random_word(rng, 1 << level))?;
        let mut elements: Vec<GroupElement> = f4.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        if elements.is_empty() {
            elements.push(f4.elements()[rng.gen_range(0..f4.len())].clone());
        }
        let set = FiniteSubset::new(1, elements)?;
        let (cover, k) = random_k_cover(rng, &set);
        let outcome = shearer_oracle(&x, &z, &set, &cover, k, 0)?;
        failures += usize::from(!outcome.holds);
        inexact += usize::from(!outcome.exact);
    }
    out.push(Assertion::new("instances violating k·H(F) <= Σ H(K_i)", failures, "==", 0usize, failures == 0));
    out.push(Assertion::new("instances without exact H", inexact, "==", 0usize, inexact == 0));
    Ok(out)
}

/// A random system of at most 10 binary points on `[-3, 3]` with shape
/// `[0, 4)`.
pub fn random_system(rng: &mut ChaCha8Rng) -> SampledSystem {
    let window = FiniteSubset::from_integers(-3..=3);
    let shape = FiniteSubset::from_integers(0..4);
    let n = rng.gen_range(1..=10);
    let points = (0..n).map(|_| random_word(rng, window.len())).collect();
    SampledSystem::new(window, shape, points).expect("system within limits")
}

/// `ε` values and `δ` values with denominator 997, so that `δ|F|` is never an
/// integer for `|F| < 997`.
pub fn sandwich_grid() -> (Vec<Rational>, Vec<Rational>) {
    (vec![q(1, 16), q(1, 8), q(1, 4), q(1, 2), q(1, 1)], vec![q(100, 997), q(250, 997), q(400, 997), q(600, 997), q(900, 997)])
}

fn sandwich_suite(rng: &mut ChaCha8Rng) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    let (epsilons, deltas) = sandwich_grid();
    let (mut order_failures, mut monotone_failures) = (0usize, 0usize);
    for _ in 0..50 {
        let system = random_system(rng);
        let mut sep = vec![vec![0usize; deltas.len()]; epsilons.len()];
        let mut span = vec![vec![0usize; deltas.len()]; epsilons.len()];
        for (i, e) in epsilons.iter().enumerate() {
            for (j, d) in deltas.iter().enumerate() {
                sep[i][j] = system.separated_max(e, d)?;
                span[i][j] = system.spanning_min(e, d)?;
                order_failures += usize::from(span[i][j] > sep[i][j]);
            }
        }
        for i in 0..epsilons.len() {
            for j in 0..deltas.len() {
                if i + 1 < epsilons.len() {
                    monotone_failures += usize::from(sep[i + 1][j] > sep[i][j] || span[i + 1][j] > span[i][j]);
                }
                if j + 1 < deltas.len() {
                    monotone_failures += usize::from(sep[i][j + 1] > sep[i][j] || span[i][j + 1] > span[i][j]);
                }
            }
        }
    }
    out.push(Assertion::new("(system, ε, δ) with spanning_min > separated_max", order_failures, "==", 0usize, order_failures == 0));
    out.push(Assertion::new("monotonicity failures in ε or δ", monotone_failures, "==", 0usize, monotone_failures == 0));
    Ok(out)
}
