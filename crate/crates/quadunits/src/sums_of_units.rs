//! Value sets of integers expressible as sums of exactly / at most `k`
//! units, enumeration and canonicalisation of representation classes, the
//! constructive reduction of unit sums to trace form, and the counter for
//! integers with several inequivalent representations.
//!
//! Value-set enumeration joins half-tuples on exact complements of the
//! irrational coordinate (meet in the middle); class enumeration walks
//! sorted multisets ordered by coordinate size with exact feasibility
//! pruning. Both run once at the hard exponent cap and replay the adaptive
//! bound loop afterwards, which yields the same certificate as raising the
//! bound step by step.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::quadfield::{FieldDescriptor, QuadInt, UnitExponent};
use crate::trace_sums::has_vanishing_subsum;
use crate::unit_equation::{
    build_exceptional_sets, certify_capped, vanishing_sum_profile, BoundConfig,
    StabilityCertificate, UnitTable, UnitTuple,
};

/// Whether a value counts sums of exactly `k` units or of at most `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Exactly,
    AtMost,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Exactly => write!(f, "exactly"),
            Mode::AtMost => write!(f, "at_most"),
        }
    }
}

/// Representation shape: `(v, v')`, `(v, v', 1)`, `(v, v', -1)` with all
/// `|v_i| >= 1`, or anything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    S1,
    S2,
    S3,
    Generic,
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shape::S1 => write!(f, "S1"),
            Shape::S2 => write!(f, "S2"),
            Shape::S3 => write!(f, "S3"),
            Shape::Generic => write!(f, "generic"),
        }
    }
}

/// A permutation-equivalence class of subsum-free unit tuples with integer
/// sum, given by its canonical representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentationClass {
    field: FieldDescriptor,
    canonical_coords: Vec<QuadInt>,
    value: i64,
    shape: Shape,
    subsum_free: bool,
}

impl RepresentationClass {
    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    /// Coordinates sorted ascending by real value, ties by the conjugate.
    pub fn canonical_coords(&self) -> &[QuadInt] {
        &self.canonical_coords
    }

    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn is_subsum_free(&self) -> bool {
        self.subsum_free
    }

    pub fn len(&self) -> usize {
        self.canonical_coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical_coords.is_empty()
    }

    pub fn as_tuple(&self) -> UnitTuple {
        UnitTuple::new(&self.field, self.canonical_coords.clone()).expect("class coords are units")
    }
}

/// The integers `|n| <= X` expressible in the requested mode, sorted
/// ascending, with the enumeration certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueSetResult {
    pub values: Vec<i64>,
    pub mode: Mode,
    pub k: usize,
    pub certificate: StabilityCertificate,
}

// ---------------------------------------------------------------------------
// Canonical unit order for sorted-multiset searches.
// ---------------------------------------------------------------------------

/// Candidate units in descending coordinate-size order: level `|m|` from the
/// cap down, within a level `+eta^m, -eta^m, +eta^-m, -eta^-m`.
fn candidate_order(cap: i64) -> Vec<UnitExponent> {
    let mut out = Vec::with_capacity(4 * cap as usize + 2);
    for level in (1..=cap).rev() {
        out.push(UnitExponent::new(1, level));
        out.push(UnitExponent::new(-1, level));
        out.push(UnitExponent::new(1, -level));
        out.push(UnitExponent::new(-1, -level));
    }
    out.push(UnitExponent::new(1, 0));
    out.push(UnitExponent::new(-1, 0));
    out
}

fn candidate_index(cap: i64, e: UnitExponent) -> usize {
    let level = e.m.abs();
    if level == 0 {
        (4 * cap) as usize + if e.sign > 0 { 0 } else { 1 }
    } else {
        let base = (4 * (cap - level)) as usize;
        let variant = match (e.sign > 0, e.m > 0) {
            (true, true) => 0,
            (false, true) => 1,
            (true, false) => 2,
            (false, false) => 3,
        };
        base + variant
    }
}

// ---------------------------------------------------------------------------
// Class enumeration: sorted multisets with exact coordinate pruning.
// ---------------------------------------------------------------------------

struct ClassSearch<'a> {
    tbl: &'a UnitTable,
    cap: i64,
    cands: Vec<UnitExponent>,
    abs_a: Vec<BigInt>,
    abs_b: Vec<BigInt>,
    two_x: BigInt,
    x: i64,
    target: Option<i64>,
    chosen: Vec<UnitExponent>,
    subset_sums: Vec<QuadInt>,
    out: Vec<(Vec<UnitExponent>, i64, i64)>, // (descending exponents, n, min bound)
}

impl<'a> ClassSearch<'a> {
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

    fn descend(&mut self, start: usize, partial: &QuadInt, remaining: usize) {
        if remaining == 1 {
            // The last coordinate is forced: its irrational part must cancel
            // the accumulated one, so look it up by that coordinate.
            let needed_b = -partial.half_b();
            let units: Vec<UnitExponent> = self.tbl.units_with_b(&needed_b).to_vec();
            for e in units {
                if candidate_index(self.cap, e) < start {
                    continue;
                }
                let u = self.tbl.unit(e);
                let total_a: BigInt = partial.half_a() + u.half_a();
                debug_assert!((&total_a % BigInt::from(2)).is_zero());
                let n_big: BigInt = total_a >> 1;
                if n_big.magnitude() > BigInt::from(self.x).magnitude() {
                    continue;
                }
                let n = n_big.to_i64().expect("|n| <= X fits i64");
                if let Some(t) = self.target {
                    if n != t {
                        continue;
                    }
                }
                if self.try_push(e, &u) {
                    let mb = self.chosen.iter().map(|e| e.m.abs()).max().unwrap_or(0);
                    self.out.push((self.chosen.clone(), n, mb));
                    self.pop();
                }
            }
            return;
        }

        let abs_bs = partial.half_b().abs();
        let abs_as = partial.half_a().abs();
        let rem = BigInt::from(remaining as i64);
        for idx in start..self.cands.len() {
            let e = self.cands[idx];
            let level = e.m.unsigned_abs() as usize;
            // Everything from idx on has coordinates bounded by this level's;
            // once the accumulated coordinates are out of reach, smaller
            // levels stay out of reach.
            if abs_bs > &rem * &self.abs_b[level]
                || abs_as > &self.two_x + &rem * &self.abs_a[level]
            {
                break;
            }
            let u = self.tbl.unit(e);
            if self.try_push(e, &u) {
                let next = partial + &u;
                self.descend(idx, &next, remaining - 1);
                self.pop();
            }
        }
    }
}

/// All subsum-free classes of length exactly `r` with `|sum| <= x`
/// (or `sum == target` when given), found at the hard cap.
fn search_classes_at_cap(
    tbl: &UnitTable,
    r: usize,
    x: i64,
    target: Option<i64>,
) -> Vec<(Vec<UnitExponent>, i64, i64)> {
    assert!(r >= 1);
    let cap = tbl.cap();
    let mut abs_a = Vec::with_capacity(cap as usize + 1);
    let mut abs_b = Vec::with_capacity(cap as usize + 1);
    for level in 0..=cap {
        let p = tbl.pow(level);
        abs_a.push(p.half_a().abs());
        abs_b.push(p.half_b().abs());
    }
    let mut search = ClassSearch {
        tbl,
        cap,
        cands: candidate_order(cap),
        abs_a,
        abs_b,
        two_x: BigInt::from(x) * 2,
        x,
        target,
        chosen: Vec::new(),
        subset_sums: vec![QuadInt::zero(tbl.field().d())],
        out: Vec::new(),
    };
    let zero = QuadInt::zero(tbl.field().d());
    search.descend(0, &zero, r);
    search.out
}

// ---------------------------------------------------------------------------
// Meet-in-the-middle value enumeration.
// ---------------------------------------------------------------------------

struct HalfTupleWalk<'a, 'v> {
    tbl: &'a UnitTable,
    cands: Vec<UnitExponent>,
    size: usize,
    chosen: Vec<UnitExponent>,
    subset_sums: Vec<QuadInt>,
    visit: &'v mut dyn FnMut(&[UnitExponent], &QuadInt),
}

impl HalfTupleWalk<'_, '_> {
    fn rec(&mut self, start: usize, partial: &QuadInt) {
        if self.chosen.len() == self.size {
            (self.visit)(&self.chosen, partial);
            return;
        }
        for idx in start..self.cands.len() {
            let e = self.cands[idx];
            let u = self.tbl.unit(e);
            let mut extended = Vec::with_capacity(self.subset_sums.len());
            let mut vanishes = false;
            for s in self.subset_sums.iter() {
                let t = s + &u;
                if t.is_zero() {
                    vanishes = true;
                    break;
                }
                extended.push(t);
            }
            if vanishes {
                continue;
            }
            let next = partial + &u;
            self.subset_sums.extend(extended);
            self.chosen.push(e);
            self.rec(idx, &next);
            self.chosen.pop();
            let keep = self.subset_sums.len() / 2;
            self.subset_sums.truncate(keep);
        }
    }
}

/// Visits every non-increasing multiset of `size` candidate units with no
/// internal vanishing subsum, passing the exponents and the exact sum.
fn visit_half_tuples(tbl: &UnitTable, size: usize, visit: &mut dyn FnMut(&[UnitExponent], &QuadInt)) {
    let zero = QuadInt::zero(tbl.field().d());
    let mut walk = HalfTupleWalk {
        tbl,
        cands: candidate_order(tbl.cap()),
        size,
        chosen: Vec::with_capacity(size),
        subset_sums: vec![zero.clone()],
        visit,
    };
    walk.rec(0, &zero);
}

/// Values of subsum-free `r`-term unit sums with `|n| <= x`, as a map from
/// `n` to the least exponent bound exhibiting it.
fn subsum_free_values(tbl: &UnitTable, r: usize, x: i64) -> HashMap<i64, i64> {
    let mut found: HashMap<i64, i64> = HashMap::new();
    if r == 1 {
        // The only rational units are +-1.
        if x >= 1 {
            found.insert(1, 0);
            found.insert(-1, 0);
        }
        return found;
    }

    // Store the smaller half and stream the larger one through the join.
    let left_size = r / 2;
    let right_size = r - left_size;
    let mut lefts: Vec<(Vec<UnitExponent>, QuadInt)> = Vec::new();
    visit_half_tuples(tbl, left_size, &mut |exps, sum| {
        lefts.push((exps.to_vec(), sum.clone()));
    });
    let mut by_b: HashMap<BigInt, Vec<usize>> = HashMap::new();
    for (i, (_, sum)) in lefts.iter().enumerate() {
        by_b.entry(sum.half_b().clone()).or_default().push(i);
    }

    let x_mag = BigInt::from(x).magnitude().clone();
    visit_half_tuples(tbl, right_size, &mut |r_exps, r_sum| {
        let needed = -r_sum.half_b();
        let Some(bucket) = by_b.get(&needed) else { return };
        for &li in bucket {
            let (l_exps, l_sum) = &lefts[li];
            let total_a: BigInt = (l_sum.half_a() + r_sum.half_a()) >> 1;
            if total_a.magnitude() > &x_mag {
                continue;
            }
            let coords: Vec<QuadInt> =
                l_exps.iter().chain(r_exps.iter()).map(|&e| tbl.unit(e)).collect();
            if has_vanishing_subsum(&coords).expect("r <= 24") {
                continue;
            }
            let n = total_a.to_i64().expect("fits i64");
            debug_assert_ne!(n, 0);
            let mb = l_exps
                .iter()
                .chain(r_exps.iter())
                .map(|e| e.m.abs())
                .max()
                .unwrap_or(0);
            found
                .entry(n)
                .and_modify(|cur| {
                    if mb < *cur {
                        *cur = mb;
                    }
                })
                .or_insert(mb);
        }
    });
    found
}

// ---------------------------------------------------------------------------
// Public operations.
// ---------------------------------------------------------------------------

/// Start bound `max(cfg.initial, ceil(log(kX)/log eta) + 8)`, capped.
fn effective_config(field: &FieldDescriptor, k: usize, x: i64, cfg: &BoundConfig) -> BoundConfig {
    let ln_eta = field.log_eta().to_f64();
    let m0 = ((k as f64 * x as f64).ln() / ln_eta).ceil() as i64 + 8;
    let initial = cfg.initial_exponent_bound.max(m0).min(cfg.max_exponent_bound);
    BoundConfig { initial_exponent_bound: initial, ..*cfg }
}

/// Lengths `r` whose subsum-free values contribute for this mode and `k`,
/// plus whether 0 belongs to the set.
fn eligible_lengths(
    field: &FieldDescriptor,
    k: usize,
    mode: Mode,
    cfg: &BoundConfig,
) -> (Vec<usize>, bool, StabilityCertificate) {
    match mode {
        Mode::AtMost => {
            // The empty tuple contributes 0; every length r <= k contributes.
            ((1..=k).collect(), true, StabilityCertificate::trivially_stable(cfg))
        }
        Mode::Exactly => {
            if k == 1 {
                return (vec![1], false, StabilityCertificate::trivially_stable(cfg));
            }
            // A sum of exactly k units strips down to a subsum-free r-sum by
            // removing minimal vanishing sums, so k - r must decompose into
            // vanishing lengths; conversely such sums pad back up to k.
            let (profile, cert) = vanishing_sum_profile(field, k, cfg);
            let mut reachable = vec![false; k + 1];
            reachable[0] = true;
            for j in 1..=k {
                for &len in &profile {
                    if len <= j && reachable[j - len] {
                        reachable[j] = true;
                        break;
                    }
                }
            }
            let lengths = (1..=k).filter(|&r| reachable[k - r]).collect();
            (lengths, reachable[k], cert)
        }
    }
}

/// The set of integers `|n| <= X` expressible as a sum of exactly / at most
/// `k` units, with a stability certificate for the underlying searches.
pub fn value_set(
    field: &FieldDescriptor,
    k: usize,
    x: i64,
    mode: Mode,
    cfg: &BoundConfig,
) -> ValueSetResult {
    assert!(k >= 1, "need k >= 1");
    assert!(x >= 1, "need X >= 1");
    let eff = effective_config(field, k, x, cfg);
    let (lengths, include_zero, profile_cert) = eligible_lengths(field, k, mode, &eff);

    let tbl = UnitTable::new(field, eff.max_exponent_bound);
    let mut merged: HashMap<i64, i64> = HashMap::new();
    for &r in &lengths {
        for (n, mb) in subsum_free_values(&tbl, r, x) {
            merged
                .entry(n)
                .and_modify(|cur| {
                    if mb < *cur {
                        *cur = mb;
                    }
                })
                .or_insert(mb);
        }
    }

    let min_bounds: Vec<i64> = merged.values().copied().collect();
    let certificate = certify_capped(&min_bounds, &eff).combine(&profile_cert);

    let mut values: Vec<i64> = merged.into_keys().collect();
    if include_zero {
        values.push(0);
    }
    values.sort_unstable();
    ValueSetResult { values, mode, k, certificate }
}

/// Cardinality of [`value_set`].
pub fn count(
    field: &FieldDescriptor,
    k: usize,
    x: i64,
    mode: Mode,
    cfg: &BoundConfig,
) -> (u64, StabilityCertificate) {
    let vs = value_set(field, k, x, mode, cfg);
    (vs.values.len() as u64, vs.certificate)
}

fn exponents_to_class(
    field: &FieldDescriptor,
    exps: &[UnitExponent],
    n: i64,
) -> RepresentationClass {
    let mut coords: Vec<QuadInt> = exps.iter().map(|&e| field.unit_from_exponent(e)).collect();
    coords.sort_by(|a, b| a.canonical_cmp(b));
    let shape = classify_shape(&coords);
    RepresentationClass {
        field: field.clone(),
        canonical_coords: coords,
        value: n,
        shape,
        subsum_free: true,
    }
}

/// Shape classification by greedy conjugate pairing, largest modulus first.
/// In a pair `{v, v'}` the larger side has modulus >= 1, so a successful
/// pairing always satisfies the `|v_i| >= 1` side condition.
fn classify_shape(coords: &[QuadInt]) -> Shape {
    if coords.is_empty() {
        return Shape::Generic;
    }
    let d = coords[0].d();
    let one = QuadInt::one(d);
    let minus_one = -&one;

    let pairs_up = |items: &[QuadInt]| -> bool {
        let mut pool: Vec<QuadInt> = items.to_vec();
        while !pool.is_empty() {
            let (idx, _) = pool
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| a.abs_cmp(b).then_with(|| a.cmp_real(b)))
                .expect("nonempty");
            let v = pool.swap_remove(idx);
            let conj = v.conjugate();
            match pool.iter().position(|w| *w == conj) {
                Some(j) => {
                    pool.swap_remove(j);
                }
                None => return false,
            }
        }
        true
    };

    if coords.len().is_multiple_of(2) {
        if pairs_up(coords) {
            return Shape::S1;
        }
        return Shape::Generic;
    }
    for (unit, shape) in [(&one, Shape::S2), (&minus_one, Shape::S3)] {
        if let Some(pos) = coords.iter().position(|c| c == unit) {
            let mut rest = coords.to_vec();
            rest.remove(pos);
            if pairs_up(&rest) {
                return shape;
            }
        }
    }
    Shape::Generic
}

/// All inequivalent subsum-free representation classes of length `<= k`
/// with value in `[-X, X]` (0 is excluded: its full sum would vanish).
pub fn representation_classes(
    field: &FieldDescriptor,
    k: usize,
    x: i64,
    cfg: &BoundConfig,
) -> (Vec<RepresentationClass>, StabilityCertificate) {
    assert!(k >= 1 && x >= 1);
    let eff = effective_config(field, k, x, cfg);
    let tbl = UnitTable::new(field, eff.max_exponent_bound);
    let mut classes = Vec::new();
    let mut min_bounds = Vec::new();
    for r in 1..=k {
        for (exps, n, mb) in search_classes_at_cap(&tbl, r, x, None) {
            classes.push(exponents_to_class(field, &exps, n));
            min_bounds.push(mb);
        }
    }
    let cert = certify_capped(&min_bounds, &eff);
    classes.sort_by(|a, b| {
        a.value
            .cmp(&b.value)
            .then(a.canonical_coords.len().cmp(&b.canonical_coords.len()))
            .then_with(|| a.canonical_coords.cmp(&b.canonical_coords))
    });
    (classes, cert)
}

/// The representation classes of one integer `n != 0` with length `<= k`.
pub fn enumerate_representations(
    field: &FieldDescriptor,
    n: i64,
    k: usize,
    cfg: &BoundConfig,
) -> (Vec<RepresentationClass>, StabilityCertificate) {
    assert!(n != 0, "representations of 0 are excluded (full sum would vanish)");
    assert!(k >= 1);
    let eff = effective_config(field, k, n.abs(), cfg);
    let tbl = UnitTable::new(field, eff.max_exponent_bound);
    let mut classes = Vec::new();
    let mut min_bounds = Vec::new();
    for r in 1..=k {
        for (exps, value, mb) in search_classes_at_cap(&tbl, r, n.abs(), Some(n)) {
            debug_assert_eq!(value, n);
            classes.push(exponents_to_class(field, &exps, value));
            min_bounds.push(mb);
        }
    }
    let cert = certify_capped(&min_bounds, &eff);
    classes.sort_by(|a, b| {
        a.canonical_coords
            .len()
            .cmp(&b.canonical_coords.len())
            .then_with(|| a.canonical_coords.cmp(&b.canonical_coords))
    });
    (classes, cert)
}

/// Sorts the coordinates into the canonical order (real value ascending,
/// ties by conjugate value); idempotent, and constant on permutation orbits.
pub fn canonicalize(tuple: &UnitTuple) -> UnitTuple {
    let mut coords = tuple.coords().to_vec();
    coords.sort_by(|a, b| a.canonical_cmp(b));
    UnitTuple::new(tuple.field(), coords).expect("same coords")
}

/// Number of integers `|n| <= X` with at least two inequivalent subsum-free
/// representation classes of length `<= k`.
pub fn count_non_unique(
    field: &FieldDescriptor,
    k: usize,
    x: i64,
    cfg: &BoundConfig,
) -> (u64, StabilityCertificate) {
    let (classes, cert) = representation_classes(field, k, x, cfg);
    let mut per_value: BTreeMap<i64, usize> = BTreeMap::new();
    for c in &classes {
        *per_value.entry(c.value).or_insert(0) += 1;
    }
    let count = per_value.values().filter(|&&c| c >= 2).count() as u64;
    (count, cert)
}

// ---------------------------------------------------------------------------
// Reduction to trace form.
// ---------------------------------------------------------------------------

/// Result of reducing a subsum-free unit sum to `(v, v', xi)` form:
/// `n = S_v + S_{v'} + S_xi` with `2 len(v) + len(xi) <= r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceFormReduction {
    pub v: UnitTuple,
    pub xi: UnitTuple,
}

impl TraceFormReduction {
    pub fn ell(&self) -> usize {
        self.v.len()
    }

    pub fn s(&self) -> usize {
        self.xi.len()
    }

    /// The full tuple `(v, v', xi)`.
    pub fn combined(&self) -> UnitTuple {
        let mut coords = self.v.coords().to_vec();
        coords.extend(self.v.coords().iter().map(QuadInt::conjugate));
        coords.extend(self.xi.coords().iter().cloned());
        UnitTuple::new(self.v.field(), coords).expect("units")
    }
}

/// Bundles the field, config and lazily built exceptional sets so a batch of
/// reductions shares the unit-equation searches.
pub struct Reducer<'a> {
    field: &'a FieldDescriptor,
    cfg: BoundConfig,
    exceptional: BTreeMap<usize, (Vec<QuadInt>, StabilityCertificate)>,
}

impl<'a> Reducer<'a> {
    pub fn new(field: &'a FieldDescriptor, cfg: &BoundConfig) -> Self {
        Reducer { field, cfg: *cfg, exceptional: BTreeMap::new() }
    }

    fn exceptional_set(&mut self, t: usize) -> &(Vec<QuadInt>, StabilityCertificate) {
        if !self.exceptional.contains_key(&t) {
            let (sets, cert) = build_exceptional_sets(self.field, t, &self.cfg);
            let set = sets.into_iter().nth(t).expect("t <= t_max");
            self.exceptional.insert(t, (set, cert));
        }
        &self.exceptional[&t]
    }

    /// Runs the inductive reduction on a subsum-free tuple with nonzero
    /// integer sum.
    pub fn reduce(&mut self, tuple: &UnitTuple) -> Result<TraceFormReduction> {
        if tuple.is_empty() {
            return Err(Error::PreconditionViolated("empty tuple".into()));
        }
        if tuple.field().d() != self.field.d() {
            return Err(Error::FieldMismatch { left: self.field.d(), right: tuple.field().d() });
        }
        let n = tuple
            .sum()
            .as_integer()
            .ok_or_else(|| Error::PreconditionViolated("sum is not a rational integer".into()))?;
        if n.is_zero() {
            return Err(Error::PreconditionViolated("sum must be nonzero".into()));
        }
        if tuple.len() > 16 {
            return Err(Error::TooManyTerms(tuple.len()));
        }
        if has_vanishing_subsum(tuple.coords())? {
            return Err(Error::PreconditionViolated("input has a vanishing subsum".into()));
        }

        let r = tuple.len();
        let mut coords = tuple.coords().to_vec();
        // If the reduced form acquires a vanishing subsum, strip vanishing
        // parts and reduce the shorter tuple again; each round loses at
        // least two coordinates, so this terminates.
        loop {
            let (v, xi) = self.reduce_inner(&coords)?;
            let mut combined = v.clone();
            combined.extend(v.iter().map(QuadInt::conjugate));
            combined.extend(xi.iter().cloned());
            if combined.is_empty() || !has_vanishing_subsum(&combined)? {
                debug_assert!(2 * v.len() + xi.len() <= r);
                if xi.len() == 1 {
                    debug_assert!(xi[0].is_rational());
                }
                return Ok(TraceFormReduction {
                    v: UnitTuple::new(self.field, v)?,
                    xi: UnitTuple::new(self.field, xi)?,
                });
            }
            coords = strip_vanishing(&combined);
            debug_assert!(!coords.is_empty());
        }
    }

    fn reduce_inner(&mut self, coords: &[QuadInt]) -> Result<(Vec<QuadInt>, Vec<QuadInt>)> {
        let d = self.field.d();
        let r = coords.len();
        debug_assert!(r >= 1);

        if r == 1 {
            // The single unit is a rational integer, hence +-1.
            debug_assert!(coords[0].is_rational());
            return Ok((Vec::new(), coords.to_vec()));
        }
        if r == 2 {
            if coords[1] == coords[0].conjugate() {
                let v = if coords[0].abs_cmp(&coords[1]) == Ordering::Less {
                    coords[1].clone()
                } else {
                    coords[0].clone()
                };
                return Ok((vec![v], Vec::new()));
            }
            // Integral pair sums that are not conjugate pairs land in the
            // finite special family inside U_2.
            let (u2, cert) = self.exceptional_set(2).clone();
            if coords.iter().all(|c| u2.contains(c)) {
                return Ok((Vec::new(), coords.to_vec()));
            }
            if !cert.stable {
                return Err(Error::BoundCapReached);
            }
            return Err(Error::PreconditionViolated(
                "integral pair sum outside the classified families".into(),
            ));
        }

        // Minimal vanishing subsum of sum(u) - sum(u') = 0: the smallest
        // |I| + |J| with I, J nonempty and sum_I u_i = sum_J u_j'.
        let conj: Vec<QuadInt> = coords.iter().map(QuadInt::conjugate).collect();
        let (mut set_i, mut set_j) = find_minimal_vanishing_pair(coords, &conj)
            .expect("the full difference vanishes, so some minimal pair exists");
        if set_i.len() < set_j.len() {
            // Conjugating and negating the relation swaps the roles of I and J.
            std::mem::swap(&mut set_i, &mut set_j);
        }

        let n = {
            let mut acc = QuadInt::zero(d);
            for c in coords {
                acc = &acc + c;
            }
            acc.as_integer().expect("invariant: integer sum")
        };

        if set_i.len() > set_j.len() {
            // Case 1: rebuild n from I^c and J', then recurse on a minimal
            // sub-multiset still summing to n.
            let mut terms: Vec<QuadInt> = (0..r)
                .filter(|i| !set_i.contains(i))
                .map(|i| coords[i].clone())
                .collect();
            terms.extend(set_j.iter().map(|&j| conj[j].clone()));
            let target = QuadInt::from_integer(d, n.clone());
            let sub =
                minimal_subset_with_sum(&terms, &target).expect("the full term list sums to n");
            return self.reduce_inner(&sub);
        }

        if set_i == set_j && set_i.len() == r {
            // Case 3: the tuple is a scaled unit-equation solution; its
            // coordinates lie in U_r when the underlying search was deep
            // enough.
            let (u_r, _cert) = self.exceptional_set(r).clone();
            if coords.iter().all(|c| u_r.contains(c)) {
                return Ok((Vec::new(), coords.to_vec()));
            }
            return Err(Error::BoundCapReached);
        }

        let j0 = set_j.iter().copied().find(|j| !set_i.contains(j));
        if let Some(j0) = j0 {
            // Case 2: split off the trace of u_{j0}.
            let m = coords[j0].trace();
            let target_int: BigInt = &n - &m;
            let mut terms: Vec<QuadInt> = (0..r)
                .filter(|i| !set_i.contains(i) && *i != j0)
                .map(|i| coords[i].clone())
                .collect();
            terms.extend(set_j.iter().filter(|&&j| j != j0).map(|&j| conj[j].clone()));
            let (mut v, xi) = if target_int.is_zero() {
                (Vec::new(), Vec::new())
            } else {
                let target = QuadInt::from_integer(d, target_int);
                let sub = minimal_subset_with_sum(&terms, &target)
                    .expect("the full term list sums to n - m");
                self.reduce_inner(&sub)?
            };
            v.push(coords[j0].clone());
            return Ok((v, xi));
        }

        // Case 4: I = J proper; the sum over I is a rational integer m with
        // 0 != m != n, and both halves recurse independently.
        debug_assert!(set_i == set_j && set_i.len() < r);
        let part: Vec<QuadInt> = set_i.iter().map(|&i| coords[i].clone()).collect();
        let rest: Vec<QuadInt> = (0..r)
            .filter(|i| !set_i.contains(i))
            .map(|i| coords[i].clone())
            .collect();
        let (v1, xi1) = self.reduce_inner(&part)?;
        let (v2, xi2) = self.reduce_inner(&rest)?;
        let mut v = v1;
        v.extend(v2);
        let mut xi = xi1;
        xi.extend(xi2);
        Ok((v, xi))
    }
}

/// One-shot reduction; see [`Reducer`] for batch use.
pub fn reduce_to_trace_form(
    field: &FieldDescriptor,
    tuple: &UnitTuple,
    cfg: &BoundConfig,
) -> Result<TraceFormReduction> {
    Reducer::new(field, cfg).reduce(tuple)
}

/// Smallest pair of nonempty index sets with `sum_I u_i = sum_J w_j`,
/// minimal in |I| + |J| (hence with no vanishing proper subsum).
fn find_minimal_vanishing_pair(
    coords: &[QuadInt],
    conj: &[QuadInt],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let r = coords.len();
    for total in 2..=2 * r {
        for si in 1..total.min(r + 1) {
            let sj = total - si;
            if !(1..=r).contains(&sj) {
                continue;
            }
            for set_i in index_subsets(r, si) {
                let mut sum_i = QuadInt::zero(coords[0].d());
                for &i in &set_i {
                    sum_i = &sum_i + &coords[i];
                }
                for set_j in index_subsets(r, sj) {
                    let mut sum_j = QuadInt::zero(coords[0].d());
                    for &j in &set_j {
                        sum_j = &sum_j + &conj[j];
                    }
                    if sum_i == sum_j {
                        return Some((set_i.clone(), set_j));
                    }
                }
            }
        }
    }
    None
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

/// Minimal-cardinality sub-multiset of `terms` with the exact target sum;
/// minimality makes the result subsum-free.
fn minimal_subset_with_sum(terms: &[QuadInt], target: &QuadInt) -> Option<Vec<QuadInt>> {
    let n = terms.len();
    assert!(n <= 20, "subset scan limited to 20 terms");
    for size in 1..=n {
        for idx in index_subsets(n, size) {
            let mut acc = QuadInt::zero(target.d());
            for &i in &idx {
                acc = &acc + &terms[i];
            }
            if &acc == target {
                return Some(idx.into_iter().map(|i| terms[i].clone()).collect());
            }
        }
    }
    None
}

/// Removes minimal vanishing subsums until none remain.
fn strip_vanishing(coords: &[QuadInt]) -> Vec<QuadInt> {
    let mut cur = coords.to_vec();
    'outer: loop {
        if cur.is_empty() {
            return cur;
        }
        for size in 1..=cur.len() {
            for idx in index_subsets(cur.len(), size) {
                let mut acc = QuadInt::zero(cur[0].d());
                for &i in &idx {
                    acc = &acc + &cur[i];
                }
                if acc.is_zero() {
                    let drop: BTreeSet<usize> = idx.into_iter().collect();
                    cur = cur
                        .into_iter()
                        .enumerate()
                        .filter(|(i, _)| !drop.contains(i))
                        .map(|(_, c)| c)
                        .collect();
                    continue 'outer;
                }
            }
        }
        return cur;
    }
}
