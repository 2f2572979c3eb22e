//! Toeplitz configurations over a box chain: skeleton checks, regularity,
//! periodic approximation, odometer coordinates, the monotone path `Ψ(t)`
//! from `0^G` to `1^G`, interpolation along it, and a Krieger-style
//! construction with positive entropy.

use num_bigint::BigUint;

use crate::configs::{
    exact_disagreement, per_set, per_set_letter, Alphabet, Configuration, CosetSet, Letter, PeriodicConfig,
    ToeplitzTable,
};
use crate::densities::IntervalEstimate;
use crate::densities::Method;
use crate::entropy::pattern_set;
use crate::error::{Error, Result};
use crate::groups::{GroupElement, SubgroupChain};
use crate::rational::{ratio, Rational};

fn exact_chain(x: &Configuration) -> Result<&SubgroupChain> {
    x.chain().ok_or(Error::InexactVariant)
}

/// Result of checking the skeleton conditions at one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonLevel {
    pub level: usize,
    /// `Per_{H_n}(x)` is non-empty.
    pub per_nonempty: bool,
    /// `D*(Per_{H_n}(x))`.
    pub per_density: Rational,
    /// No `g ∉ H_n` leaves every `Per_{H_n}(x, a)` unchanged.
    pub separated: bool,
    /// A translate violating separation, if any.
    pub witness: Option<GroupElement>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonReport {
    pub levels: Vec<SkeletonLevel>,
    /// Share of `F_N` covered by `∪_{m <= N} Per_{H_m}(x)`.
    pub coverage: Rational,
}

impl SkeletonReport {
    pub fn nonempty_everywhere(&self) -> bool {
        self.levels.iter().all(|l| l.per_nonempty)
    }

    pub fn separated_everywhere(&self) -> bool {
        self.levels.iter().all(|l| l.separated)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for l in &self.levels {
            if !l.per_nonempty {
                out.push(format!("Per_H{} is empty", l.level));
            }
            if let Some(w) = &l.witness {
                out.push(format!("translate {w} preserves every Per_H{}(x, a)", l.level));
            }
        }
        out
    }
}

/// Checks the skeleton conditions at levels `1..=depth`.
///
/// Separation compares `Per_{H_n}(x, a)` with `Per_{H_n}(g·x, a) =
/// Per_{H_n}(x, a) − g` for `g` over the non-identity representatives in
/// `F_n`. Both sets are unions of `H_n`-cosets, so this covers every `g ∈ G`.
pub fn verify_skeleton(x: &Configuration, depth: usize) -> Result<SkeletonReport> {
    let chain = exact_chain(x)?.clone();
    chain.check_level(depth)?;
    let letters = x.alphabet().len() as Letter;
    let mut levels = Vec::new();
    for n in 1..=depth {
        let per = per_set(x, n)?;
        let per_letter: Vec<CosetSet> = (0..letters).map(|a| per_set_letter(x, n, a)).collect::<Result<_>>()?;
        let mut witness = None;
        for gi in 1..chain.domain_size(n) {
            let g = chain.element_at(n, gi);
            let invariant = per_letter.iter().all(|p| {
                let mask = p.mask();
                (0..mask.len()).all(|i| mask[i] == mask[chain.rep_index_offset(chain.element_at(n, i).coords(), g.coords(), n)])
            });
            if invariant {
                witness = Some(g);
                break;
            }
        }
        levels.push(SkeletonLevel {
            level: n,
            per_nonempty: !per.is_empty(),
            per_density: per.density(),
            separated: witness.is_none(),
            witness,
        });
    }
    let coverage = per_set(x, depth)?.density();
    Ok(SkeletonReport { levels, coverage })
}

/// Default tolerance for the regular flag.
pub const DEFAULT_REGULARITY_TOLERANCE: Rational = Rational::new_raw(1, 1024);

/// `D*(Per_{H_n}(x))` for `n = 0..=depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularityProfile {
    pub densities: Vec<Rational>,
    pub tolerance: Rational,
}

impl RegularityProfile {
    /// Value at the deepest level.
    pub fn limit_proxy(&self) -> Rational {
        *self.densities.last().expect("level 0 is always present")
    }

    /// Profile within `tolerance` of 1 at the deepest level.
    pub fn regular_so_far(&self) -> bool {
        self.limit_proxy() >= Rational::from_integer(1) - self.tolerance
    }
}

pub fn regularity_profile(x: &Configuration, depth: usize, tolerance: Rational) -> Result<RegularityProfile> {
    let densities = (0..=depth).map(|n| per_set(x, n).map(|p| p.density())).collect::<Result<Vec<_>>>()?;
    Ok(RegularityProfile { densities, tolerance })
}

/// `x^{(n)}` with its distance to `x` and the bound `1 − D*(Per_{H_n}(x))`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicApproximation {
    pub approximation: Configuration,
    /// `D*(x^{(n)}, x)`, bracketed when `x` is partial.
    pub distance: IntervalEstimate,
    pub bound: Rational,
    pub holds: bool,
}

/// The level-`n` periodic configuration agreeing with `x` on `F_n`.
pub fn periodic_approximation(x: &Configuration, level: usize) -> Result<PeriodicApproximation> {
    let chain = exact_chain(x)?.clone();
    let domain = chain.domain(level)?;
    let mut word = Vec::with_capacity(domain.len());
    for f in domain.iter() {
        word.push(x.evaluate(f).ok_or(Error::UnresolvedCells { level })?);
    }
    let approximation: Configuration = PeriodicConfig::new(chain, level, x.alphabet().clone(), word)?.into();
    let (confirmed, unresolved) = exact_disagreement(&approximation, x)?.expect("both exact on one chain");
    let upper = confirmed.union(&unresolved)?.density();
    let distance = IntervalEstimate::bracket(confirmed.density(), upper, Method::ExactCoset);
    let bound = Rational::from_integer(1) - per_set(x, level)?.density();
    Ok(PeriodicApproximation { approximation, holds: distance.upper <= bound, distance, bound })
}

/// `φ(g) = (g mod H_1, ..., g mod H_N)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdometerPoint {
    pub residues: Vec<GroupElement>,
}

impl OdometerPoint {
    /// `r_{n+1} ≡ r_n (mod H_n)` for every consecutive pair.
    pub fn is_compatible(&self, chain: &SubgroupChain) -> bool {
        self.residues
            .windows(2)
            .enumerate()
            .all(|(i, w)| chain.coset_rep(&w[1], i + 1).map(|r| r == w[0]).unwrap_or(false))
    }
}

pub fn odometer_phi(g: &GroupElement, chain: &SubgroupChain, depth: usize) -> Result<OdometerPoint> {
    chain.check_level(depth)?;
    let residues = (1..=depth).map(|n| chain.coset_rep(g, n)).collect::<Result<Vec<_>>>()?;
    Ok(OdometerPoint { residues })
}

/// `η(g) = f(φ(g))` for a function `f` given on cylinders `[r̃^{(k)}]`, each
/// cylinder listed as `(k, r, letter)`.
pub fn toeplitz_from_cylinders(
    chain: &SubgroupChain,
    alphabet: &Alphabet,
    cylinders: &[(usize, GroupElement, Letter)],
) -> Result<ToeplitzTable> {
    ToeplitzTable::new(chain.clone(), alphabet.clone(), cylinders.iter().cloned()).map_err(|e| match e {
        Error::ConflictingAssignment { level, rep } => Error::InconsistentCylinders { level, rep },
        other => other,
    })
}

/// Quota rule used by [`psi_path`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QuotaRule {
    /// `q = max{l <= k : l/|F_{n+1}| <= t − D*(D_n)}`.
    #[default]
    Corrected,
    /// `q = max{l <= k : l/k <= t − D*(D_n)}` with `k` the number of fresh
    /// cosets, kept for comparison.
    Literal,
}

/// `Ψ(t)` truncated at a finite depth.
#[derive(Clone, Debug, PartialEq)]
pub struct PathPoint {
    pub t: Rational,
    pub depth: usize,
    pub rule: QuotaRule,
    /// `D_n(t)` for `n = 0..=depth`, each described at level `n`.
    pub d_sets: Vec<CosetSet>,
    pub e_sets: Vec<CosetSet>,
    /// `f*^{(n)}`, absent once `D_n ∪ E_n = G`.
    pub residuals: Vec<Option<GroupElement>>,
    /// First level at which `D_n ∪ E_n = G`.
    pub terminated_at: Option<usize>,
    /// `1` on `D`, `0` on `E`.
    pub table: ToeplitzTable,
}

impl PathPoint {
    pub fn d_density(&self) -> Rational {
        self.d_sets.last().expect("level 0").density()
    }

    pub fn configuration(&self) -> Configuration {
        self.table.clone().into()
    }
}

/// Runs the recursion for `Ψ(t)` up to `depth`.
///
/// Level 0 starts with `D_0 = E_0 = ∅` and residual `e`. At each step the
/// cells `f* + v`, `v ∈ H_n ∩ F_{n+1}` in canonical order, are the fresh
/// cosets of `H_{n+1}`: the first `q` go to `D`, and `E` takes everything
/// after the next one, or everything left if `D` has reached `t`.
pub fn psi_path(t: Rational, chain: &SubgroupChain, depth: usize, rule: QuotaRule) -> Result<PathPoint> {
    if t < Rational::from_integer(0) || t > Rational::from_integer(1) {
        return Err(Error::ParameterOutOfRange(format!("t must lie in [0, 1], got {t}")));
    }
    chain.check_level(depth)?;
    let mut d_sets = vec![CosetSet::empty(chain.clone(), 0)?];
    let mut e_sets = vec![CosetSet::empty(chain.clone(), 0)?];
    let mut residuals = vec![Some(GroupElement::zero(chain.rank()))];
    let mut levels: Vec<Vec<Option<Letter>>> = vec![vec![None]];
    let mut d_density = Rational::from_integer(0);
    let mut terminated_at = None;
    for n in 0..depth {
        let next = n + 1;
        let mut d_mask = d_sets[n].lift(next)?.mask().to_vec();
        let mut e_mask = e_sets[n].lift(next)?.mask().to_vec();
        let mut row = vec![None; chain.domain_size(next)];
        let mut residual = None;
        if let Some(star) = &residuals[n] {
            let base = chain.rep_index(star, next);
            let fresh: Vec<usize> =
                chain.subgroup_offsets(n, next).into_iter().map(|v| chain.add_positions(base, v, next)).collect();
            let k = fresh.len();
            let size = chain.domain_size(next);
            let remaining = t - d_density;
            let denominator = match rule {
                QuotaRule::Corrected => size,
                QuotaRule::Literal => k,
            };
            let q = ((remaining * Rational::from_integer(denominator as i64)).floor().to_integer().max(0) as usize).min(k);
            let exact = d_density + ratio(q, denominator) == t;
            for &p in &fresh[..q] {
                d_mask[p] = true;
                row[p] = Some(1);
            }
            let e_start = if exact { q } else { q + 1 };
            for &p in fresh.iter().skip(e_start) {
                e_mask[p] = true;
                row[p] = Some(0);
            }
            d_density += ratio(q, size);
            if !exact && q < k {
                residual = Some(chain.element_at(next, fresh[q]));
            } else if terminated_at.is_none() {
                terminated_at = Some(next);
            }
        }
        d_sets.push(CosetSet::from_mask(chain.clone(), next, d_mask)?);
        e_sets.push(CosetSet::from_mask(chain.clone(), next, e_mask)?);
        residuals.push(residual);
        levels.push(row);
    }
    if depth == 0 && (t == Rational::from_integer(0) || t == Rational::from_integer(1)) {
        // F_0 alone already decides the endpoints.
        let letter = Letter::from(t == Rational::from_integer(1));
        levels[0][0] = Some(letter);
        residuals[0] = None;
        terminated_at = Some(0);
        if letter == 1 {
            d_sets[0] = CosetSet::full(chain.clone(), 0)?;
        } else {
            e_sets[0] = CosetSet::full(chain.clone(), 0)?;
        }
    }
    let table = ToeplitzTable::from_levels(chain.clone(), Alphabet::binary(), levels)?;
    Ok(PathPoint { t, depth, rule, d_sets, e_sets, residuals, terminated_at, table })
}

/// `u^{(t)} = z` where `Ψ(t) = 1` and `z'` where `Ψ(t) = 0`.
///
/// A cell is assigned at the deeper of its `Ψ(t)` period and the period of
/// the selected source, over the union of both alphabets.
pub fn toeplitz_interpolate(z: &Configuration, z_prime: &Configuration, psi: &PathPoint) -> Result<ToeplitzTable> {
    let (Some(vz), Some(vp)) = (z.exact_view(), z_prime.exact_view()) else {
        return Err(Error::InexactVariant);
    };
    let chain = psi.table.chain().clone();
    if vz.chain != chain || vp.chain != chain {
        return Err(Error::ChainMismatch);
    }
    let alphabet = z.alphabet().union(z_prime.alphabet());
    let from_z = z.alphabet().translation(&alphabet);
    let from_p = z_prime.alphabet().translation(&alphabet);
    let periods = |x: &Configuration, level_of_view: usize| -> Vec<Option<usize>> {
        match x {
            Configuration::Toeplitz(t) => t.resolved().iter().map(|c| c.map(|(_, n)| n as usize)).collect(),
            _ => vec![Some(level_of_view); chain.domain_size(level_of_view)],
        }
    };
    let pz = periods(z, vz.level);
    let pp = periods(z_prime, vp.level);
    let psi_top = psi.table.top_level();
    let top = psi_top.max(vz.level).max(vp.level);
    let mut levels: Vec<Vec<Option<Letter>>> = (0..=top).map(|n| vec![None; chain.domain_size(n)]).collect();
    for cell in 0..chain.domain_size(top) {
        let psi_cell = psi.table.resolved()[chain.project_position(cell, top, psi_top)];
        let Some((selector, psi_level)) = psi_cell else { continue };
        let (view, period, trans) = if selector == 1 { (&vz, &pz, &from_z) } else { (&vp, &pp, &from_p) };
        let source = chain.project_position(cell, top, view.level);
        let (Some(letter), Some(source_level)) = (view.cells[source], period[source]) else { continue };
        let level = (psi_level as usize).max(source_level);
        let rep = chain.project_position(cell, top, level);
        levels[level][rep] = Some(trans[letter as usize].expect("letter is in the union"));
    }
    ToeplitzTable::from_levels(chain, alphabet, levels)
}

/// Dyadic-style regular table: at each level `1..=depth` every fresh coset
/// except the last (in canonical order) is assigned, letters alternating by
/// level, so `D*(Per_{H_n}) = 1 − 1/|F_n|`.
pub fn regular_table(chain: &SubgroupChain, depth: usize, alphabet: &Alphabet) -> Result<ToeplitzTable> {
    chain.check_level(depth)?;
    let mut levels: Vec<Vec<Option<Letter>>> = vec![vec![None]];
    let mut star = 0usize;
    for n in 0..depth {
        let next = n + 1;
        let base = chain.rep_index(&chain.element_at(n, star), next);
        let fresh: Vec<usize> =
            chain.subgroup_offsets(n, next).into_iter().map(|v| chain.add_positions(base, v, next)).collect();
        let mut row = vec![None; chain.domain_size(next)];
        let letter = (next % alphabet.len()) as Letter;
        for &p in &fresh[..fresh.len() - 1] {
            row[p] = Some(letter);
        }
        star = *fresh.last().expect("index at least 2");
        levels.push(row);
    }
    ToeplitzTable::from_levels(chain.clone(), alphabet.clone(), levels)
}

/// Parameters of [`krieger_construct`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KriegerParams {
    pub gamma: Rational,
    /// Number of planting stages; the table is closed at `k_stages`.
    pub stages: usize,
    /// `k_0`.
    pub first_level: usize,
}

impl KriegerParams {
    pub fn new(gamma: Rational, stages: usize) -> Self {
        KriegerParams { gamma, stages, first_level: 0 }
    }
}

/// Record of one construction stage `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KriegerStage {
    pub index: usize,
    /// `k_n`.
    pub level: usize,
    /// `r_n = ⌊(1−γ)|F_{k_n}|/2^n⌋`.
    pub r: usize,
    /// `G_n`.
    pub periodic_cells: Vec<GroupElement>,
    /// `Σ_{i<=n} r_i |H_{k_n} : H_{k_i}|`.
    pub periodic_count: usize,
    /// `(1−γ)|F_{k_n}|`.
    pub periodic_budget: Rational,
    pub budget_holds: bool,
    /// `|S_n| = |F_{k_n}| − periodic_count`.
    pub free_count: usize,
    /// Copies of `F_{k_n}` available in `F_{k_{n+1}}`, for planting stages.
    pub copies: Option<usize>,
    /// Patterns planted, `|A|^{|S_n|}`.
    pub planted: Option<BigUint>,
}

/// Pattern-count certificate at a planting level `k_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct KriegerCertificate {
    pub level: usize,
    pub domain_size: usize,
    /// `|B_{F_{k_n}}(η)|` from a full-period rescan.
    pub pattern_count: usize,
    /// `|A|^{|S_n|}`.
    pub planted: BigUint,
    /// `pattern_count >= |A|^{|S_n|}`.
    pub planted_holds: bool,
    /// `pattern_count >= |A|^{γ|F_{k_n}|}`, compared exactly as
    /// `count^den >= |A|^{num·|F_{k_n}|}`.
    pub gamma_holds: bool,
    /// `ln(pattern_count) / |F_{k_n}|`.
    pub entropy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KriegerLog {
    pub stages: Vec<KriegerStage>,
    pub closing_level: usize,
    pub fill_letter: Letter,
    pub certificates: Vec<KriegerCertificate>,
    pub notes: Vec<String>,
}

impl KriegerLog {
    pub fn all_hold(&self) -> bool {
        self.stages.iter().all(|s| s.budget_holds)
            && self.certificates.iter().all(|c| c.planted_holds && c.gamma_holds)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KriegerOutput {
    pub table: ToeplitzTable,
    pub log: KriegerLog,
}

/// Digits of `index` in base `base`, most significant first.
fn planted_pattern(index: usize, free: usize, base: usize) -> Vec<Letter> {
    let mut digits = vec![0 as Letter; free];
    let mut rest = index;
    for slot in digits.iter_mut().rev() {
        *slot = (rest % base) as Letter;
        rest /= base;
    }
    digits
}

/// Toeplitz configuration whose pattern counts at the planting levels are at
/// least `|A|^{|S_n|} >= |A|^{γ|F_{k_n}|}` when the periodic budget holds.
///
/// At stage `n` the configuration is known on `F_{k_n}`: cells of
/// `T_n = ∪_{j<=n} (G_j + H_{k_j})` are periodic, the rest `S_n` is free. The
/// next level `k_{n+1}` is the smallest one whose copies `F_{k_n} + v`,
/// `v ∈ H_{k_n} ∩ F_{k_{n+1}}`, number at least `|A|^{|F_{k_n}|}` and leave at
/// least `r_{n+1}` unplanted free cells. Every filling of `S_n` other than
/// the one already on `F_{k_n}` is planted into copies `1, 2, ...` in
/// canonical order; `G_{n+1}` is the first `r_{n+1}` unplanted free cells.
/// Unspecified cells get the first letter. After the last stage every
/// remaining cell of `F_{k_S}` is assigned at level `k_S`.
pub fn krieger_construct(params: &KriegerParams, chain: &SubgroupChain, alphabet: &Alphabet) -> Result<KriegerOutput> {
    let one = Rational::from_integer(1);
    let gamma = params.gamma;
    if gamma <= Rational::from_integer(0) || gamma >= one {
        return Err(Error::ParameterOutOfRange(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if params.stages == 0 {
        return Err(Error::ParameterOutOfRange("at least one stage is required".into()));
    }
    let a = alphabet.len();
    let fill: Letter = 0;
    let k0 = params.first_level;
    if k0 > chain.depth() {
        return Err(Error::ChainTooShallow(format!("first level {k0} exceeds depth {}", chain.depth())));
    }
    let r_of = |level: usize, n: usize| -> usize {
        let v = (one - gamma) * ratio(chain.domain_size(level), 1usize << n);
        v.floor().to_integer() as usize
    };
    let budget = |level: usize, history: &[(usize, usize)]| -> (usize, Rational) {
        let count = history.iter().map(|&(k, r)| r * chain.index(k, level)).sum();
        (count, (one - gamma) * Rational::from_integer(chain.domain_size(level) as i64))
    };
    let mut notes = vec![format!("cells left arbitrary by the construction get letter `{}`", alphabet.name(fill))];

    let mut level = k0;
    let mut values: Vec<Letter> = vec![fill; chain.domain_size(level)];
    let mut periodic: Vec<bool> = vec![false; values.len()];
    let mut assignments: Vec<(usize, usize, Letter)> = Vec::new();
    let r0 = r_of(level, 0).min(values.len());
    let mut g_cells: Vec<usize> = (0..r0).collect();
    for &p in &g_cells {
        periodic[p] = true;
        assignments.push((level, p, values[p]));
    }
    let mut history: Vec<(usize, usize)> = vec![(level, r0)];
    let mut stages: Vec<KriegerStage> = Vec::new();
    let mut plan: Vec<(usize, BigUint)> = Vec::new();

    for n in 0..params.stages {
        let free_cells: Vec<usize> = (0..values.len()).filter(|&p| !periodic[p]).collect();
        let (count, allowed) = budget(level, &history);
        let needed = BigUint::from(a).pow(chain.domain_size(level) as u32);
        let planted_big = BigUint::from(a).pow(free_cells.len() as u32);
        let mut next = None;
        for candidate in (level + 1)..=chain.depth() {
            let copies = chain.index(level, candidate);
            if BigUint::from(copies) < needed {
                continue;
            }
            // planted <= needed <= copies, so it fits
            let planted = planted_big.to_u64_digits().first().copied().unwrap_or(0) as usize;
            if (copies - planted) * free_cells.len() >= r_of(candidate, n + 1) {
                next = Some(candidate);
                break;
            }
        }
        let Some(next) = next else {
            return Err(Error::ChainTooShallow(format!(
                "no level after {level} holds {needed} copies of F_{level} and the next periodic cells"
            )));
        };
        let copies = chain.index(level, next);
        let planted = planted_big.to_u64_digits().first().copied().unwrap_or(0) as usize;
        stages.push(KriegerStage {
            index: n,
            level,
            r: history[n].1,
            periodic_cells: g_cells.iter().map(|&p| chain.element_at(level, p)).collect(),
            periodic_count: count,
            periodic_budget: allowed,
            budget_holds: Rational::from_integer(count as i64) <= allowed,
            free_count: free_cells.len(),
            copies: Some(copies),
            planted: Some(planted_big.clone()),
        });
        plan.push((level, planted_big));

        // Lift to F_next: periodic cells by periodicity, then the base copy.
        let size = chain.domain_size(next);
        let mut new_values = vec![fill; size];
        let mut new_periodic = vec![false; size];
        for p in 0..size {
            let q = chain.project_position(p, next, level);
            if periodic[q] {
                new_values[p] = values[q];
                new_periodic[p] = true;
            }
        }
        let lifted: Vec<usize> = free_cells.iter().map(|&p| chain.rep_index(&chain.element_at(level, p), next)).collect();
        for (&p, &pos) in free_cells.iter().zip(&lifted) {
            new_values[pos] = values[p];
        }
        let base_index = free_cells.iter().fold(0usize, |acc, &p| acc * a + values[p] as usize);
        let offsets = chain.subgroup_offsets(level, next);
        let mut copy_iter = offsets.iter().skip(1);
        for index in (0..planted).filter(|&i| i != base_index) {
            let v = *copy_iter.next().expect("enough copies were reserved");
            for (&pos, l) in lifted.iter().zip(planted_pattern(index, free_cells.len(), a)) {
                new_values[chain.add_positions(pos, v, next)] = l;
            }
        }
        let mut spare: Vec<usize> =
            copy_iter.flat_map(|&v| lifted.iter().map(move |&pos| chain.add_positions(pos, v, next))).collect();
        spare.sort_unstable();
        let r_next = r_of(next, n + 1);
        g_cells = spare[..r_next].to_vec();
        for &p in &g_cells {
            new_periodic[p] = true;
            assignments.push((next, p, new_values[p]));
        }
        notes.push(format!("stage {n}: {planted} patterns on S_{n} planted among {copies} copies of F_{level} in F_{next}"));
        if r_next == 0 {
            notes.push(format!("r_{} = 0: no periodic cells reserved at level {next}", n + 1));
        }
        history.push((next, r_next));
        level = next;
        values = new_values;
        periodic = new_periodic;
    }

    let (count, allowed) = budget(level, &history);
    stages.push(KriegerStage {
        index: params.stages,
        level,
        r: history[params.stages].1,
        periodic_cells: g_cells.iter().map(|&p| chain.element_at(level, p)).collect(),
        periodic_count: count,
        periodic_budget: allowed,
        budget_holds: Rational::from_integer(count as i64) <= allowed,
        free_count: periodic.iter().filter(|&&p| !p).count(),
        copies: None,
        planted: None,
    });
    for (p, &is_periodic) in periodic.iter().enumerate() {
        if !is_periodic {
            assignments.push((level, p, values[p]));
        }
    }
    notes.push(format!("closed at level {level}: remaining cells of F_{level} get period H_{level}"));
    for s in &stages {
        if !s.budget_holds {
            notes.push(format!(
                "stage {}: {} periodic cells exceed (1-gamma)|F_{}| = {}",
                s.index, s.periodic_count, s.level, s.periodic_budget
            ));
        }
    }

    let mut levels: Vec<Vec<Option<Letter>>> = (0..=level).map(|n| vec![None; chain.domain_size(n)]).collect();
    for (n, p, l) in assignments {
        levels[n][p] = Some(l);
    }
    let table = ToeplitzTable::from_levels(chain.clone(), alphabet.clone(), levels)?;

    let eta: Configuration = table.clone().into();
    let mut certificates = Vec::new();
    for (k, planted) in plan {
        let domain = chain.domain(k)?;
        let count = pattern_set(&eta, &domain, 0)?.patterns.len();
        let lhs = BigUint::from(count).pow(*gamma.denom() as u32);
        let rhs = BigUint::from(a).pow(*gamma.numer() as u32 * domain.len() as u32);
        certificates.push(KriegerCertificate {
            level: k,
            domain_size: domain.len(),
            pattern_count: count,
            planted_holds: BigUint::from(count) >= planted,
            planted,
            gamma_holds: lhs >= rhs,
            entropy: (count as f64).ln() / domain.len() as f64,
        });
    }
    Ok(KriegerOutput { table, log: KriegerLog { stages, closing_level: level, fill_letter: fill, certificates, notes } })
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn psi_is_nested_and_lipschitz(a in 0i64..=256, b in 0i64..=256) {
            let (s, t) = (Rational::new(a.min(b), 256), Rational::new(a.max(b), 256));
            let chain = SubgroupChain::dyadic(6);
            let ps = psi_path(s, &chain, 6, QuotaRule::Corrected).unwrap();
            let pt = psi_path(t, &chain, 6, QuotaRule::Corrected).unwrap();
            for n in 0..=6 {
                prop_assert!(ps.d_sets[n].is_subset(&pt.d_sets[n]).unwrap());
                prop_assert!(pt.e_sets[n].is_subset(&ps.e_sets[n]).unwrap());
                let gap = pt.d_sets[n].difference(&ps.d_sets[n]).unwrap().density();
                prop_assert!(gap <= t - s + ratio(1, chain.domain_size(n)));
            }
            let d = pt.d_density();
            prop_assert!(d <= t && t - d < ratio(1, 64));
        }

        #[test]
        fn approximation_bound_holds(word in proptest::collection::vec(0u16..2, 16), n in 0usize..=4) {
            let chain = SubgroupChain::dyadic(4);
            let x = Configuration::periodic(chain, 4, Alphabet::binary(), word).unwrap();
            let a = periodic_approximation(&x, n).unwrap();
            prop_assert!(a.holds);
            prop_assert!(a.distance.exact);
        }
    }
}
