//! Solubility of `u_1 + ... + u_k = n` in the units of the `p`-adic
//! completions of `O_L`, decided exactly for every prime, plus a
//! finite-ring brute-force verifier.
//!
//! Solutions exist for every odd `p`; at `p = 2` they exist iff
//! `n = k (mod 2)` or 2 is inert. Witnesses come from explicit unit
//! constructions over `Z_p`, or from a lift of a residue-field solution in
//! the inert case, and are reported modulo `p^depth` (depth 3 at `p = 2`,
//! depth 2 at odd `p`).

use crate::error::{Error, Result};
use crate::quadfield::{FieldDescriptor, TwoSplitting};

/// Why a local decision came out the way it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalReason {
    OddPrimeUnitConstruction,
    ParityMatch,
    TwoInertF4,
    ObstructionMod2,
}

impl std::fmt::Display for LocalReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LocalReason::OddPrimeUnitConstruction => write!(f, "odd_prime_unit_construction"),
            LocalReason::ParityMatch => write!(f, "parity_match"),
            LocalReason::TwoInertF4 => write!(f, "two_inert_F4"),
            LocalReason::ObstructionMod2 => write!(f, "obstruction_mod_2"),
        }
    }
}

/// Decision for one prime, with a residue witness when soluble.
///
/// `soluble` is false only with `reason = ObstructionMod2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDecision {
    pub p: u64,
    pub soluble: bool,
    pub reason: LocalReason,
    /// Unit residues `(x, y)` meaning `x + y omega` modulo `witness_modulus`.
    pub witness: Option<Vec<(u64, u64)>>,
    pub witness_modulus: Option<u64>,
}

/// Splitting behaviour of 2, determined by `d mod 8`.
pub fn splitting_of_two(field: &FieldDescriptor) -> TwoSplitting {
    field.two_splitting()
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2u64;
    while q * q <= p {
        if p.is_multiple_of(q) {
            return false;
        }
        q += 1;
    }
    true
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        old_r -= q * r;
        std::mem::swap(&mut old_r, &mut r);
        old_s -= q * s;
        std::mem::swap(&mut old_s, &mut s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

fn reduce_mod(n: i64, m: u64) -> u64 {
    (n as i128).rem_euclid(m as i128) as u64
}

/// The finite ring `(Z/p^depth)[omega]` with `omega^2 = e + f omega`.
pub(crate) struct ResidueRing {
    modulus: u64,
    omega_sq_const: u64,
    omega_sq_lin: u64,
    trace_omega: u64,
    p: u64,
}

impl ResidueRing {
    pub(crate) fn new(d: i64, p: u64, depth: u32) -> Self {
        let modulus = p.pow(depth);
        let m = modulus as i128;
        if d.rem_euclid(4) == 1 {
            // omega = (1 + sqrt d)/2: omega^2 = (d-1)/4 + omega.
            let e = ((d - 1) / 4) as i128;
            ResidueRing {
                modulus,
                omega_sq_const: e.rem_euclid(m) as u64,
                omega_sq_lin: 1,
                trace_omega: 1,
                p,
            }
        } else {
            // omega = sqrt d: omega^2 = d.
            ResidueRing {
                modulus,
                omega_sq_const: (d as i128).rem_euclid(m) as u64,
                omega_sq_lin: 0,
                trace_omega: 0,
                p,
            }
        }
    }

    pub(crate) fn modulus(&self) -> u64 {
        self.modulus
    }

    fn addm(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    fn mulm(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub(crate) fn add(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        (self.addm(x.0, y.0), self.addm(x.1, y.1))
    }

    pub(crate) fn sub(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let m = self.modulus;
        (self.addm(x.0, m - y.0 % m), self.addm(x.1, m - y.1 % m))
    }

    pub(crate) fn mul(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        // (x0 + x1 w)(y0 + y1 w) = x0 y0 + e x1 y1 + (x0 y1 + x1 y0 + f x1 y1) w
        let cross = self.mulm(x.1, y.1);
        let c = self.addm(self.mulm(x.0, y.0), self.mulm(self.omega_sq_const, cross));
        let l = self.addm(
            self.addm(self.mulm(x.0, y.1), self.mulm(x.1, y.0)),
            self.mulm(self.omega_sq_lin, cross),
        );
        (c, l)
    }

    /// `x + y omega -> x + y (Tr(omega) - omega)`.
    pub(crate) fn conjugate(&self, x: (u64, u64)) -> (u64, u64) {
        let m = self.modulus;
        (self.addm(x.0, self.mulm(self.trace_omega, x.1)), (m - x.1 % m) % m)
    }

    /// Norm-form value `x * conj(x)`; the element is a unit iff this is
    /// invertible, i.e. not divisible by p.
    pub(crate) fn norm_form(&self, x: (u64, u64)) -> u64 {
        let prod = self.mul(x, self.conjugate(x));
        debug_assert_eq!(prod.1, 0);
        prod.0
    }

    pub(crate) fn is_unit(&self, x: (u64, u64)) -> bool {
        !self.norm_form(x).is_multiple_of(self.p)
    }

    pub(crate) fn units(&self) -> Vec<(u64, u64)> {
        let m = self.modulus;
        let mut out = Vec::new();
        for x in 0..m {
            for y in 0..m {
                if self.is_unit((x, y)) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    fn index(&self, x: (u64, u64)) -> usize {
        (x.0 * self.modulus + x.1) as usize
    }
}

/// Decides solubility of `u_1 + ... + u_k = n` in units of the `p`-adic
/// extension ring and emits a witness residue tuple where a construction
/// exists.
pub fn local_decision(field: &FieldDescriptor, k: i64, n: i64, p: u64) -> Result<LocalDecision> {
    if k < 2 {
        return Err(Error::KTooSmall(k));
    }
    if !is_prime(p) {
        return Err(Error::PreconditionViolated(format!("p = {} is not prime", p)));
    }

    if p % 2 == 1 {
        let depth = 2u32;
        let modulus = p.pow(depth);
        let witness = odd_prime_witness(k, n, p, modulus);
        return Ok(LocalDecision {
            p,
            soluble: true,
            reason: LocalReason::OddPrimeUnitConstruction,
            witness: Some(witness),
            witness_modulus: Some(modulus),
        });
    }

    // p = 2: depth 3 is where the constructions and the obstruction both
    // become visible.
    let depth = 3u32;
    let modulus = 2u64.pow(depth);
    if (n - k).rem_euclid(2) == 0 {
        let witness = parity_witness(k, n, modulus);
        return Ok(LocalDecision {
            p,
            soluble: true,
            reason: LocalReason::ParityMatch,
            witness: Some(witness),
            witness_modulus: Some(modulus),
        });
    }
    if field.two_splitting() == TwoSplitting::Inert {
        let ring = ResidueRing::new(field.d(), 2, depth);
        let witness = inert_witness(&ring, k, n);
        return Ok(LocalDecision {
            p,
            soluble: true,
            reason: LocalReason::TwoInertF4,
            witness: Some(witness),
            witness_modulus: Some(modulus),
        });
    }
    Ok(LocalDecision {
        p,
        soluble: false,
        reason: LocalReason::ObstructionMod2,
        witness: None,
        witness_modulus: None,
    })
}

/// Unit solutions over `Z_p` for odd `p`, as residues mod `modulus = p^2`.
fn odd_prime_witness(k: i64, n: i64, p: u64, modulus: u64) -> Vec<(u64, u64)> {
    let kk = reduce_mod(k, modulus);
    let nn = reduce_mod(n, modulus);
    let k_unit = reduce_mod(k, p) != 0;
    let n_unit = reduce_mod(n, p) != 0;
    let m = modulus;
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % m as u128) as u64;

    if k_unit && n_unit {
        // n/k + ... + n/k
        let x = mul(nn, mod_inverse(kk, m).expect("k unit"));
        return vec![(x, 0); k as usize];
    }
    if !k_unit && !n_unit {
        // 1 + (n-1)/(k-1) + ...
        let y = mul(
            reduce_mod(n - 1, m),
            mod_inverse(reduce_mod(k - 1, m), m).expect("k-1 unit"),
        );
        let mut w = vec![(1, 0)];
        w.extend(vec![(y, 0); (k - 1) as usize]);
        return w;
    }
    if !k_unit {
        // p | k, p does not divide n: pick e in {1,2} with p not dividing n - e.
        let e = if reduce_mod(n - 1, p) != 0 { 1i64 } else { 2 };
        let y = mul(
            reduce_mod(n - e, m),
            mod_inverse(reduce_mod(k - 1, m), m).expect("k-1 unit"),
        );
        let mut w = vec![(reduce_mod(e, m), 0)];
        w.extend(vec![(y, 0); (k - 1) as usize]);
        return w;
    }
    // p divides n but not k.
    if reduce_mod(k - 1, p) != 0 {
        let y = mul(
            reduce_mod(n - 1, m),
            mod_inverse(reduce_mod(k - 1, m), m).expect("k-1 unit"),
        );
        let mut w = vec![(1, 0)];
        w.extend(vec![(y, 0); (k - 1) as usize]);
        return w;
    }
    // p | k-1 forces k >= 4 here; use 1 + 1 + (n-2)/(k-2) + ...
    let y = mul(
        reduce_mod(n - 2, m),
        mod_inverse(reduce_mod(k - 2, m), m).expect("k-2 unit"),
    );
    let mut w = vec![(1, 0), (1, 0)];
    w.extend(vec![(y, 0); (k - 2) as usize]);
    w
}

/// Unit solutions over `Z_2` when `n = k (mod 2)`, as residues mod 8.
fn parity_witness(k: i64, n: i64, modulus: u64) -> Vec<(u64, u64)> {
    let m = modulus;
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % m as u128) as u64;
    if n.rem_euclid(2) == 1 {
        // both odd
        let x = mul(reduce_mod(n, m), mod_inverse(reduce_mod(k, m), m).expect("k odd"));
        vec![(x, 0); k as usize]
    } else {
        // both even
        let y = mul(
            reduce_mod(n - 1, m),
            mod_inverse(reduce_mod(k - 1, m), m).expect("k-1 odd"),
        );
        let mut w = vec![(1, 0)];
        w.extend(vec![(y, 0); (k - 1) as usize]);
        w
    }
}

/// When 2 is inert, every residue is a sum of two units already over the
/// quartic residue field; lift one such pair and pad with ones.
fn inert_witness(ring: &ResidueRing, k: i64, n: i64) -> Vec<(u64, u64)> {
    let m = ring.modulus();
    let pad = (k - 2) as u64;
    let t = (reduce_mod(n, m) + m - pad % m) % m;
    let target = (t, 0u64);
    for x in [(1u64, 0u64), (0, 1), (1, 1)] {
        let rest = ring.sub(target, x);
        if ring.is_unit(x) && ring.is_unit(rest) {
            let mut w = vec![(1, 0); pad as usize];
            w.push(x);
            w.push(rest);
            return w;
        }
    }
    unreachable!("some nonzero residue-field element avoids the target");
}

/// Solubility at every place: the real place and odd primes never obstruct
/// for `k >= 2`, so only the `p = 2` condition remains.
pub fn everywhere_locally_soluble(field: &FieldDescriptor, k: i64, n: i64) -> Result<bool> {
    if k < 2 {
        return Err(Error::KTooSmall(k));
    }
    Ok((n - k).rem_euclid(2) == 0 || field.two_splitting() == TwoSplitting::Inert)
}

/// Outcome of the finite-ring search at one prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueCheck {
    pub decision: LocalDecision,
    pub modulus: u64,
    pub solutions_exist: bool,
    /// A solution found by the search, if any.
    pub witness: Option<Vec<(u64, u64)>>,
    /// True when the search outcome matches the decision.
    pub consistent: bool,
}

/// Brute-force search for unit solutions of the sum equation in
/// `(Z/p^depth)[omega]`, compared against [`local_decision`].
///
/// A found solution confirms solubility; exhaustive absence refutes it at
/// this depth (for the decision to be consistent the obstruction must
/// already be visible, which at `p = 2` it is).
pub fn verify_by_residue_search(
    field: &FieldDescriptor,
    k: i64,
    n: i64,
    p: u64,
    depth: u32,
) -> Result<ResidueCheck> {
    if k < 2 {
        return Err(Error::KTooSmall(k));
    }
    if k > 6 {
        return Err(Error::PreconditionViolated(format!("residue search limited to k <= 6, got {}", k)));
    }
    if depth < 1 {
        return Err(Error::PreconditionViolated("need depth >= 1".into()));
    }
    if !is_prime(p) {
        return Err(Error::PreconditionViolated(format!("p = {} is not prime", p)));
    }
    let modulus = p.checked_pow(depth).ok_or(Error::BudgetExceeded)?;
    if modulus > 1_000_000 {
        return Err(Error::BudgetExceeded);
    }
    // The layered reachability scans ring x units per layer; bound the total
    // work (units <= ring size) before allocating anything.
    let ring_size = (modulus as u128) * (modulus as u128);
    if ring_size * ring_size * (k as u128 - 1) > 1 << 33 {
        return Err(Error::BudgetExceeded);
    }

    let decision = local_decision(field, k, n, p)?;
    let ring = ResidueRing::new(field.d(), p, depth);
    let units = ring.units();
    let target = (reduce_mod(n, modulus), 0u64);

    // Layered reachability: sums of exactly j units, j = 1..k.
    let size = ring_size as usize;
    let mut layers: Vec<Vec<bool>> = Vec::with_capacity(k as usize);
    let mut first = vec![false; size];
    for &u in &units {
        first[ring.index(u)] = true;
    }
    layers.push(first);
    for _ in 1..k {
        let prev = layers.last().unwrap();
        let mut next = vec![false; size];
        for x in 0..modulus {
            for y in 0..modulus {
                if !prev[(x * modulus + y) as usize] {
                    continue;
                }
                for &u in &units {
                    let s = ring.add((x, y), u);
                    next[ring.index(s)] = true;
                }
            }
        }
        layers.push(next);
    }

    let solutions_exist = layers[k as usize - 1][ring.index(target)];
    let witness = if solutions_exist {
        // Walk the layers back, peeling one unit at a time.
        let mut w = Vec::with_capacity(k as usize);
        let mut t = target;
        for j in (1..k as usize).rev() {
            let u = units
                .iter()
                .copied()
                .find(|&u| layers[j - 1][ring.index(ring.sub(t, u))])
                .expect("layer membership has a preimage");
            w.push(u);
            t = ring.sub(t, u);
        }
        debug_assert!(ring.is_unit(t));
        w.push(t);
        w.reverse();
        Some(w)
    } else {
        None
    };

    Ok(ResidueCheck {
        consistent: solutions_exist == decision.soluble,
        decision,
        modulus,
        solutions_exist,
        witness,
    })
}
