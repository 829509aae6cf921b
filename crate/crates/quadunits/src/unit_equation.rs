//! Enumeration of non-degenerate solutions of the unit equation
//! `v_1 + ... + v_T = 1`, the chain of exceptional coefficient sets it
//! generates, and the exceptional-field test.
//!
//! Finiteness of the solution set is ineffective, so every enumeration here
//! runs an exact search over `|m| <= cap` exponents and reports a
//! [`StabilityCertificate`]: the search bound was raised through a window
//! without the result changing (`stable = true`), or the hard cap was hit
//! first (`stable = false`, results still returned).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::quadfield::{FieldDescriptor, QuadInt, UnitExponent};
use crate::realarith;

/// Controls the adaptive exponent search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundConfig {
    /// Bound the search starts from.
    pub initial_exponent_bound: i64,
    /// Number of consecutive bound increments the result must survive
    /// unchanged to count as stable.
    pub stability_window: i64,
    /// Hard cap on the exponent bound.
    pub max_exponent_bound: i64,
}

impl BoundConfig {
    pub fn new(initial: i64, window: i64, cap: i64) -> Result<Self> {
        if initial < 1 || window < 1 {
            return Err(Error::InvalidBounds(
                "initial bound and window must be >= 1".to_string(),
            ));
        }
        if initial > cap {
            return Err(Error::InvalidBounds(format!(
                "initial bound {} exceeds cap {}",
                initial, cap
            )));
        }
        Ok(BoundConfig {
            initial_exponent_bound: initial,
            stability_window: window,
            max_exponent_bound: cap,
        })
    }
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            initial_exponent_bound: 20,
            stability_window: 5,
            max_exponent_bound: 60,
        }
    }
}

/// Evidence that an enumerated set did not change as the exponent bound was
/// raised through a window above `final_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabilityCertificate {
    pub final_bound: i64,
    pub window_checked: i64,
    pub stable: bool,
}

impl StabilityCertificate {
    pub(crate) fn trivially_stable(cfg: &BoundConfig) -> Self {
        StabilityCertificate {
            final_bound: cfg.initial_exponent_bound,
            window_checked: cfg.stability_window,
            stable: true,
        }
    }

    /// Conservative merge of certificates from independent sub-searches.
    pub fn combine(&self, other: &Self) -> Self {
        StabilityCertificate {
            final_bound: self.final_bound.max(other.final_bound),
            window_checked: self.window_checked.min(other.window_checked),
            stable: self.stable && other.stable,
        }
    }
}

/// Derives the certificate for a search that ran once at the hard cap,
/// recording for each item the least bound at which it appears.
///
/// Because the set at bound `B` is exactly the capped set filtered to
/// `min_bound <= B`, the adaptive raise-and-check loop can be replayed
/// without re-searching.
pub(crate) fn certify_capped(min_bounds: &[i64], cfg: &BoundConfig) -> StabilityCertificate {
    let last_change = min_bounds.iter().copied().max().unwrap_or(0);
    let final_bound = last_change.max(cfg.initial_exponent_bound);
    let cap = cfg.max_exponent_bound;
    if final_bound + cfg.stability_window <= cap {
        StabilityCertificate {
            final_bound,
            window_checked: cfg.stability_window,
            stable: true,
        }
    } else {
        StabilityCertificate {
            final_bound,
            window_checked: (cap - final_bound).max(0),
            stable: false,
        }
    }
}

/// An ordered tuple of units of one field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitTuple {
    field: FieldDescriptor,
    coords: Vec<QuadInt>,
}

impl UnitTuple {
    pub fn new(field: &FieldDescriptor, coords: Vec<QuadInt>) -> Result<Self> {
        for c in &coords {
            if c.d() != field.d() {
                return Err(Error::FieldMismatch { left: field.d(), right: c.d() });
            }
            if !c.is_unit() {
                return Err(Error::NotAUnit);
            }
        }
        Ok(UnitTuple { field: field.clone(), coords })
    }

    pub fn from_exponents(field: &FieldDescriptor, exps: &[UnitExponent]) -> Self {
        let coords = exps.iter().map(|&e| field.unit_from_exponent(e)).collect();
        UnitTuple { field: field.clone(), coords }
    }

    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    pub fn coords(&self) -> &[QuadInt] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn sum(&self) -> QuadInt {
        let mut acc = QuadInt::zero(self.field.d());
        for c in &self.coords {
            acc = &acc + c;
        }
        acc
    }

    pub fn conjugate(&self) -> UnitTuple {
        UnitTuple {
            field: self.field.clone(),
            coords: self.coords.iter().map(QuadInt::conjugate).collect(),
        }
    }

    pub fn exponents(&self) -> Vec<UnitExponent> {
        self.coords
            .iter()
            .map(|c| self.field.unit_to_exponent(c).expect("coords are units"))
            .collect()
    }

    /// True when no nonempty sub-multiset of the coordinates sums to zero.
    pub fn is_subsum_free(&self) -> Result<bool> {
        Ok(!crate::trace_sums::has_vanishing_subsum(&self.coords)?)
    }
}

// ---------------------------------------------------------------------------
// Unit table: cached powers of eta with reverse lookups.
// ---------------------------------------------------------------------------

pub(crate) struct UnitTable {
    field: FieldDescriptor,
    cap: i64,
    pows: Vec<QuadInt>,
    inv_pows: Vec<QuadInt>,
    by_coords: HashMap<(BigInt, BigInt), UnitExponent>,
    by_b: HashMap<BigInt, Vec<UnitExponent>>,
}

impl UnitTable {
    pub(crate) fn new(field: &FieldDescriptor, cap: i64) -> Self {
        assert!(cap >= 0);
        let mut pows = Vec::with_capacity(cap as usize + 1);
        pows.push(QuadInt::one(field.d()));
        for _ in 1..=cap {
            let next = pows.last().unwrap() * field.eta();
            pows.push(next);
        }
        let inv = field.eta_inverse();
        let mut inv_pows = Vec::with_capacity(cap as usize + 1);
        inv_pows.push(QuadInt::one(field.d()));
        for _ in 1..=cap {
            let next = inv_pows.last().unwrap() * &inv;
            inv_pows.push(next);
        }

        let mut by_coords = HashMap::new();
        let mut by_b: HashMap<BigInt, Vec<UnitExponent>> = HashMap::new();
        let mut insert = |u: &QuadInt, e: UnitExponent| {
            by_coords.insert((u.half_a().clone(), u.half_b().clone()), e);
            by_b.entry(u.half_b().clone()).or_default().push(e);
        };
        for m in -cap..=cap {
            let base = if m >= 0 { &pows[m as usize] } else { &inv_pows[(-m) as usize] };
            insert(base, UnitExponent::new(1, m));
            insert(&(-base), UnitExponent::new(-1, m));
        }
        for v in by_b.values_mut() {
            v.sort();
        }
        UnitTable { field: field.clone(), cap, pows, inv_pows, by_coords, by_b }
    }

    pub(crate) fn cap(&self) -> i64 {
        self.cap
    }

    pub(crate) fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    /// `eta^m` for `|m| <= cap`.
    pub(crate) fn pow(&self, m: i64) -> &QuadInt {
        if m >= 0 {
            &self.pows[m as usize]
        } else {
            &self.inv_pows[(-m) as usize]
        }
    }

    pub(crate) fn unit(&self, e: UnitExponent) -> QuadInt {
        let p = self.pow(e.m);
        if e.sign < 0 {
            -p
        } else {
            p.clone()
        }
    }

    pub(crate) fn lookup(&self, x: &QuadInt) -> Option<UnitExponent> {
        self.by_coords
            .get(&(x.half_a().clone(), x.half_b().clone()))
            .copied()
    }

    /// Units whose `b` half-coordinate equals the given value exactly.
    pub(crate) fn units_with_b(&self, b: &BigInt) -> &[UnitExponent] {
        self.by_b.get(b).map(Vec::as_slice).unwrap_or(&[])
    }
}

// ---------------------------------------------------------------------------
// Search for non-degenerate solutions of v_1 + ... + v_T = 1.
// ---------------------------------------------------------------------------

/// Descending order on unit keys: larger exponent first, `+` before `-`.
fn key_rank(e: UnitExponent) -> (i64, i8) {
    (e.m, e.sign)
}

struct EquationSearch<'a> {
    tbl: &'a UnitTable,
    t: usize,
    cap: i64,
    chosen: Vec<UnitExponent>,
    subset_sums: Vec<QuadInt>,
    out: Vec<(Vec<UnitExponent>, i64)>,
}

impl<'a> EquationSearch<'a> {
    /// True if appending `v` creates a vanishing subsum among the chosen
    /// coordinates; updates the cached subset sums when it does not.
    fn try_push(&mut self, e: UnitExponent, v: &QuadInt) -> bool {
        let mut extended = Vec::with_capacity(self.subset_sums.len());
        for s in &self.subset_sums {
            let t = s + v;
            if t.is_zero() {
                return false;
            }
            extended.push(t);
        }
        self.subset_sums.extend(extended);
        self.chosen.push(e);
        true
    }

    fn pop(&mut self) {
        self.chosen.pop();
        self.subset_sums.truncate(self.subset_sums.len() / 2);
    }

    fn emit(&mut self) {
        let min_bound = self.chosen.iter().map(|e| e.m.abs()).max().unwrap_or(0);
        self.out.push((self.chosen.clone(), min_bound));
    }

    fn descend(&mut self, residual: &QuadInt, prev: UnitExponent) {
        let remaining = self.t - self.chosen.len();
        if residual.is_zero() {
            // The remaining coordinates would sum to zero: degenerate.
            return;
        }
        if remaining == 1 {
            if let Some(e) = self.tbl.lookup(residual) {
                if key_rank(e) <= key_rank(prev) && e.m.abs() <= self.cap {
                    let v = residual.clone();
                    if self.try_push(e, &v) {
                        self.emit();
                        self.pop();
                    }
                }
            }
            return;
        }

        let abs_res = if residual.sign_real() == Ordering::Less { -residual } else { residual.clone() };
        for m in (-self.cap..=prev.m).rev() {
            // All remaining magnitudes are <= eta^m; prune once they cannot
            // reach the residual even jointly.
            let reach = self.tbl.pow(m).scale(remaining as i64);
            if abs_res.cmp_real(&reach) == Ordering::Greater {
                break;
            }
            for sign in [1i8, -1] {
                let e = UnitExponent::new(sign, m);
                if key_rank(e) > key_rank(prev) {
                    continue;
                }
                let v = self.tbl.unit(e);
                if self.try_push(e, &v) {
                    let next = residual - &v;
                    self.descend(&next, e);
                    self.pop();
                }
            }
        }
    }
}

/// All non-degenerate solutions with `|m_i| <= cap`, as sorted exponent
/// tuples (descending key order) paired with the least bound containing them.
pub(crate) fn search_unit_equation(
    tbl: &UnitTable,
    t: usize,
) -> Vec<(Vec<UnitExponent>, i64)> {
    assert!(t >= 1);
    let mut search = EquationSearch {
        tbl,
        t,
        cap: tbl.cap(),
        chosen: Vec::new(),
        subset_sums: vec![QuadInt::zero(tbl.field().d())],
        out: Vec::new(),
    };
    let one = QuadInt::one(tbl.field().d());
    search.descend(&one, UnitExponent::new(1, tbl.cap()));
    search.out
}

fn multiset_permutations(items: &[UnitExponent]) -> Vec<Vec<UnitExponent>> {
    let mut counts: BTreeMap<UnitExponent, usize> = BTreeMap::new();
    for &i in items {
        *counts.entry(i).or_insert(0) += 1;
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(items.len());
    fn rec(
        counts: &mut BTreeMap<UnitExponent, usize>,
        current: &mut Vec<UnitExponent>,
        total: usize,
        out: &mut Vec<Vec<UnitExponent>>,
    ) {
        if current.len() == total {
            out.push(current.clone());
            return;
        }
        let keys: Vec<UnitExponent> = counts.keys().copied().collect();
        for k in keys {
            let c = counts[&k];
            if c == 0 {
                continue;
            }
            *counts.get_mut(&k).unwrap() = c - 1;
            current.push(k);
            rec(counts, current, total, out);
            current.pop();
            *counts.get_mut(&k).unwrap() = c;
        }
    }
    rec(&mut counts, &mut current, items.len(), &mut out);
    out
}

/// Non-degenerate solutions of `v_1 + ... + v_T = 1`, as ordered tuples.
///
/// The returned set is closed under coordinate permutation and conjugation;
/// the certificate records how far past the last change the bound was pushed.
pub fn enumerate_unit_equation_solutions(
    field: &FieldDescriptor,
    t: usize,
    cfg: &BoundConfig,
) -> (Vec<UnitTuple>, StabilityCertificate) {
    assert!(t >= 1, "need T >= 1");
    let tbl = UnitTable::new(field, cfg.max_exponent_bound);
    let reps = search_unit_equation(&tbl, t);
    let cert = certify_capped(
        &reps.iter().map(|(_, b)| *b).collect::<Vec<_>>(),
        cfg,
    );
    let mut ordered: BTreeSet<Vec<UnitExponent>> = BTreeSet::new();
    for (rep, _) in &reps {
        for perm in multiset_permutations(rep) {
            ordered.insert(perm);
        }
    }
    let tuples = ordered
        .into_iter()
        .map(|exps| UnitTuple::from_exponents(field, &exps))
        .collect();
    (tuples, cert)
}

/// Sorted-representative view used internally (one tuple per permutation
/// orbit, coordinates in descending key order).
pub(crate) fn unit_equation_orbit_reps(
    field: &FieldDescriptor,
    t: usize,
    cfg: &BoundConfig,
) -> (Vec<Vec<UnitExponent>>, StabilityCertificate) {
    let tbl = UnitTable::new(field, cfg.max_exponent_bound);
    let reps = search_unit_equation(&tbl, t);
    let cert = certify_capped(&reps.iter().map(|(_, b)| *b).collect::<Vec<_>>(), cfg);
    (reps.into_iter().map(|(r, _)| r).collect(), cert)
}

// ---------------------------------------------------------------------------
// Exceptional coefficient sets U_0 <= U_1 <= ... and the exceptional test.
// ---------------------------------------------------------------------------

/// The eight non-trivial units that can pair to an integer sum when `d = 5`.
fn pair_sum_special_units(d: i64) -> Vec<QuadInt> {
    if d != 5 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for a in [3i64, -3, 1, -1] {
        for b in [1i64, -1] {
            out.push(QuadInt::new(5, a, b).expect("valid half coordinates"));
        }
    }
    out
}

fn index_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// The increasing chain `U_0 <= U_1 <= ... <= U_{t_max}` of unit sets.
///
/// `U_0 = U_1 = {1, -1}`; `U_2` adds the pair-sum special units; for
/// `t >= 3`, every `t`-sub-multiset `w` of a `(2t-1)`-term unit-equation
/// solution contributes `u * w` whenever a unit `u` makes the sum `u * S_w`
/// a nonzero rational integer (there are at most two such `u`, found by
/// testing whether `|norm(S_w)|` is a perfect square).
pub fn build_exceptional_sets(
    field: &FieldDescriptor,
    t_max: usize,
    cfg: &BoundConfig,
) -> (Vec<Vec<QuadInt>>, StabilityCertificate) {
    let mut cert = StabilityCertificate::trivially_stable(cfg);
    let base: BTreeSet<QuadInt> =
        [QuadInt::one(field.d()), -&QuadInt::one(field.d())].into_iter().collect();
    let mut sets: Vec<BTreeSet<QuadInt>> = vec![base.clone()];
    if t_max >= 1 {
        sets.push(base.clone());
    }
    if t_max >= 2 {
        let mut u2 = base;
        u2.extend(pair_sum_special_units(field.d()));
        sets.push(u2);
    }
    for t in 3..=t_max {
        let mut next = sets[t - 1].clone();
        let (reps, sub_cert) = unit_equation_orbit_reps(field, 2 * t - 1, cfg);
        cert = cert.combine(&sub_cert);
        for rep in &reps {
            let coords: Vec<QuadInt> =
                rep.iter().map(|&e| field.unit_from_exponent(e)).collect();
            for subset in index_subsets(coords.len(), t) {
                let mut s = QuadInt::zero(field.d());
                for &i in &subset {
                    s = &s + &coords[i];
                }
                if s.is_zero() {
                    continue;
                }
                let norm_abs = s.norm().magnitude().clone();
                let q = realarith::isqrt(&BigInt::from(norm_abs.clone()));
                if &q * &q != BigInt::from(norm_abs) {
                    continue;
                }
                for qq in [q.clone(), -&q] {
                    let candidate = QuadInt::from_integer(field.d(), qq);
                    if let Some(u) = candidate.div_exact(&s) {
                        if u.is_unit() {
                            for &i in &subset {
                                next.insert(&u * &coords[i]);
                            }
                        }
                    }
                }
            }
        }
        sets.push(next);
    }
    let sets = sets
        .into_iter()
        .map(|s| {
            let mut v: Vec<QuadInt> = s.into_iter().collect();
            v.sort_by(|x, y| x.canonical_cmp(y));
            v
        })
        .collect();
    (sets, cert)
}

/// Lengths `r <= r_max` admitting a minimal vanishing sum of `r` units.
///
/// `r = 2` always qualifies via `u + (-u)`; for `r >= 3`, dividing a minimal
/// vanishing `r`-sum by the negative of its last coordinate bijects such sums
/// with non-degenerate solutions of the `(r-1)`-term unit equation.
pub fn vanishing_sum_profile(
    field: &FieldDescriptor,
    r_max: usize,
    cfg: &BoundConfig,
) -> (BTreeSet<usize>, StabilityCertificate) {
    assert!(r_max >= 2, "need r_max >= 2");
    let mut profile = BTreeSet::new();
    profile.insert(2);
    let mut cert = StabilityCertificate::trivially_stable(cfg);
    for r in 3..=r_max {
        let (reps, sub_cert) = unit_equation_orbit_reps(field, r - 1, cfg);
        cert = cert.combine(&sub_cert);
        if !reps.is_empty() {
            profile.insert(r);
        }
    }
    (profile, cert)
}

/// Whether 1 is a sum of two units of `O_L`, decided by the exact
/// classification of integral unit pair sums: either some `eta^m` has trace
/// 1, or `d = 5` and the special pair family applies.
pub fn is_exceptional(field: &FieldDescriptor) -> bool {
    // A unit of trace 1 satisfies eta^m <= Tr + 1, so only the first few
    // powers can qualify; every unit shares its |trace| with some eta^m, m >= 0.
    let limit = QuadInt::from_integer(field.d(), 4);
    let mut pow = QuadInt::one(field.d());
    loop {
        if pow.trace() == BigInt::from(1) {
            return true;
        }
        pow = &pow * field.eta();
        if pow.cmp_real(&limit) == Ordering::Greater {
            break;
        }
    }
    !pair_sum_special_units(field.d()).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::make_field;

    fn cfg() -> BoundConfig {
        BoundConfig::default()
    }

    #[test]
    fn bound_config_validation() {
        assert!(BoundConfig::new(20, 5, 60).is_ok());
        assert!(matches!(BoundConfig::new(61, 5, 60), Err(Error::InvalidBounds(_))));
        assert!(matches!(BoundConfig::new(0, 5, 60), Err(Error::InvalidBounds(_))));
    }

    #[test]
    fn t1_solution_is_one() {
        let f = make_field(7).unwrap();
        let (sols, cert) = enumerate_unit_equation_solutions(&f, 1, &cfg());
        assert!(cert.stable);
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].coords(), &[QuadInt::one(7)]);
    }

    #[test]
    fn two_term_equation_empty_for_d2() {
        let f = make_field(2).unwrap();
        let (sols, cert) = enumerate_unit_equation_solutions(&f, 2, &cfg());
        assert!(cert.stable);
        assert!(sols.is_empty());
    }

    #[test]
    fn two_term_equation_d5_has_six_ordered_tuples() {
        let f = make_field(5).unwrap();
        let (sols, cert) = enumerate_unit_equation_solutions(&f, 2, &cfg());
        assert!(cert.stable);
        assert_eq!(sols.len(), 6);

        let phi = QuadInt::new(5, 1, 1).unwrap();
        let phi_conj = QuadInt::new(5, 1, -1).unwrap();
        let phi_sq = QuadInt::new(5, 3, 1).unwrap();
        let phi_inv = QuadInt::new(5, -1, 1).unwrap();
        let phi_inv_sq = QuadInt::new(5, 3, -1).unwrap();
        let expected: BTreeSet<Vec<QuadInt>> = [
            vec![phi.clone(), phi_conj.clone()],
            vec![phi_conj.clone(), phi.clone()],
            vec![phi_sq.clone(), -&phi],
            vec![-&phi, phi_sq.clone()],
            vec![phi_inv_sq.clone(), phi_inv.clone()],
            vec![phi_inv.clone(), phi_inv_sq.clone()],
        ]
        .into_iter()
        .collect();
        let got: BTreeSet<Vec<QuadInt>> =
            sols.iter().map(|t| t.coords().to_vec()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn solutions_resum_to_one_and_are_nondegenerate() {
        for d in [2i64, 3, 5, 13] {
            let f = make_field(d).unwrap();
            for t in 1..=3 {
                let (sols, _) = enumerate_unit_equation_solutions(&f, t, &cfg());
                for s in &sols {
                    assert_eq!(s.sum(), QuadInt::one(d));
                    assert!(s.is_subsum_free().unwrap(), "degenerate tuple for d={}", d);
                }
            }
        }
    }

    #[test]
    fn solution_set_closed_under_permutation_and_conjugation() {
        let f = make_field(5).unwrap();
        for t in [2usize, 3] {
            let (sols, _) = enumerate_unit_equation_solutions(&f, t, &cfg());
            let set: BTreeSet<Vec<QuadInt>> =
                sols.iter().map(|s| s.coords().to_vec()).collect();
            for s in &sols {
                let conj = s.conjugate();
                assert!(set.contains(conj.coords()), "conjugate missing");
                let mut rev = s.coords().to_vec();
                rev.reverse();
                assert!(set.contains(&rev), "permutation missing");
            }
        }
    }

    #[test]
    fn three_term_solutions_d2_contain_trace_pattern() {
        let f = make_field(2).unwrap();
        let (sols, cert) = enumerate_unit_equation_solutions(&f, 3, &cfg());
        assert!(cert.stable);
        let eta = f.eta().clone();
        let eta_conj = eta.conjugate();
        let minus_one = -&QuadInt::one(2);
        let target = vec![eta, eta_conj, minus_one];
        assert!(
            sols.iter().any(|s| {
                let mut c = s.coords().to_vec();
                c.sort();
                let mut t = target.clone();
                t.sort();
                c == t
            }),
            "(eta, eta', -1) should solve the 3-term equation"
        );
    }

    #[test]
    fn tight_cap_yields_unstable_certificate() {
        let f = make_field(5).unwrap();
        let tight = BoundConfig::new(3, 5, 4).unwrap();
        let (sols, cert) = enumerate_unit_equation_solutions(&f, 2, &tight);
        assert!(!cert.stable);
        assert!(cert.window_checked < tight.stability_window);
        // Results are still returned, flagged.
        assert_eq!(sols.len(), 6);
    }

    #[test]
    fn exceptional_sets_d2() {
        let f = make_field(2).unwrap();
        let (sets, cert) = build_exceptional_sets(&f, 2, &cfg());
        assert!(cert.stable);
        assert_eq!(sets.len(), 3);
        let pm_one = vec![-&QuadInt::one(2), QuadInt::one(2)];
        for s in &sets {
            assert_eq!(s, &pm_one);
        }
    }

    #[test]
    fn exceptional_sets_d5() {
        let f = make_field(5).unwrap();
        let (sets, cert) = build_exceptional_sets(&f, 2, &cfg());
        assert!(cert.stable);
        assert_eq!(sets[0].len(), 2);
        assert_eq!(sets[1].len(), 2);
        assert_eq!(sets[2].len(), 10);
        let phi = QuadInt::new(5, 1, 1).unwrap();
        let phi_sq = QuadInt::new(5, 3, 1).unwrap();
        for u in [&phi, &phi_sq] {
            assert!(sets[2].contains(u));
            assert!(sets[2].contains(&-u));
            assert!(sets[2].contains(&u.conjugate()));
            assert!(sets[2].contains(&-&u.conjugate()));
        }
    }

    #[test]
    fn exceptional_sets_form_chain_and_added_units_scale_to_integers() {
        for d in [2i64, 5] {
            let f = make_field(d).unwrap();
            let (sets, _) = build_exceptional_sets(&f, 3, &cfg());
            for t in 1..sets.len() {
                let prev: BTreeSet<_> = sets[t - 1].iter().cloned().collect();
                let cur: BTreeSet<_> = sets[t].iter().cloned().collect();
                assert!(prev.is_subset(&cur), "chain broken at t={} d={}", t, d);
                for u in &sets[t] {
                    assert!(u.is_unit());
                }
            }
        }
    }

    #[test]
    fn vanishing_profile_examples() {
        let f2 = make_field(2).unwrap();
        let (p, cert) = vanishing_sum_profile(&f2, 4, &cfg());
        assert!(cert.stable);
        assert_eq!(p, [2usize, 4].into_iter().collect());

        let f5 = make_field(5).unwrap();
        let (p, cert) = vanishing_sum_profile(&f5, 3, &cfg());
        assert!(cert.stable);
        assert_eq!(p, [2usize, 3].into_iter().collect());
    }

    #[test]
    fn exceptional_fields_below_30() {
        // Cross-check against an exhaustive two-unit search with |m| <= 20.
        for d in 2..=30i64 {
            let f = match make_field(d) {
                Ok(f) => f,
                Err(_) => continue,
            };
            let tbl = UnitTable::new(&f, 20);
            let mut found = false;
            'outer: for m1 in -20..=20 {
                for s1 in [1i8, -1] {
                    let u1 = tbl.unit(UnitExponent::new(s1, m1));
                    let rest = &QuadInt::one(d) - &u1;
                    if rest.is_unit() {
                        found = true;
                        break 'outer;
                    }
                }
            }
            assert_eq!(is_exceptional(&f), found, "d = {}", d);
            assert_eq!(found, d == 5, "d = {}", d);
        }
    }
}
