//! Exact arithmetic and subgroup machinery for finite Abelian groups
//! presented as products of prime-power cyclic factors.
//!
//! A group is described by a [`GroupSignature`] such as `2^3,3^2`
//! (meaning `Z_8 x Z_9`); elements are coordinate vectors of canonical
//! residues, one per factor.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the number of elements any enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Default cap for whole-lattice subgroup enumeration.
pub const DEFAULT_SMALL_GROUP_CAP: u64 = 256;

/// One prime-power cyclic factor `Z_{p^k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Factor {
    pub prime: u64,
    pub exponent: u32,
    pub modulus: u64,
}

/// An ordered list of prime-power cyclic factors defining the ambient group.
///
/// Factor order is preserved exactly as written; it is part of the input,
/// not normalized away.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSignature {
    factors: Vec<Factor>,
    /// Mixed-radix weights for element indexing; present iff |G| fits in u64.
    weights: Option<Vec<u64>>,
}

impl GroupSignature {
    pub fn new(factors: Vec<(u64, u32)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptySignature);
        }
        let mut out = Vec::with_capacity(factors.len());
        for (prime, exponent) in factors {
            if !is_prime(prime) {
                return Err(Error::NotPrime(prime));
            }
            if exponent == 0 {
                return Err(Error::ZeroExponent);
            }
            let modulus = prime
                .checked_pow(exponent)
                .ok_or(Error::FactorTooLarge { prime, exponent })?;
            out.push(Factor { prime, exponent, modulus });
        }
        let weights = mixed_radix_weights(&out);
        Ok(GroupSignature { factors: out, weights })
    }

    /// Parses a signature string such as `2^3,3^2` (an omitted exponent
    /// means 1). Whitespace is not accepted.
    pub fn parse(text: &str) -> Result<Self> {
        if text.is_empty() {
            return Err(Error::EmptySignature);
        }
        let mut factors = Vec::new();
        for token in text.split(',') {
            let (p, k) = match token.split_once('^') {
                Some((p, k)) => (
                    p.parse::<u64>().map_err(|_| Error::MalformedToken(token.to_string()))?,
                    k.parse::<u32>().map_err(|_| Error::MalformedToken(token.to_string()))?,
                ),
                None => (
                    token.parse::<u64>().map_err(|_| Error::MalformedToken(token.to_string()))?,
                    1,
                ),
            };
            factors.push((p, k));
        }
        GroupSignature::new(factors)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// |G| as an exact integer.
    pub fn order(&self) -> u128 {
        self.factors.iter().map(|f| f.modulus as u128).product()
    }

    /// Order of the prefix group supported on the first `i` factors.
    pub fn prefix_order(&self, i: usize) -> u128 {
        self.factors[..i].iter().map(|f| f.modulus as u128).product()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { coords: vec![0; self.len()] }
    }

    /// Unit vector for factor `i` (0-based).
    pub fn unit(&self, i: usize) -> GroupElement {
        let mut coords = vec![0; self.len()];
        coords[i] = 1 % self.factors[i].modulus;
        GroupElement { coords }
    }

    /// Builds an element from raw coordinates, reducing each into its
    /// canonical residue range.
    pub fn element(&self, coords: &[u64]) -> Result<GroupElement> {
        if coords.len() != self.len() {
            return Err(Error::LengthMismatch { got: coords.len(), want: self.len() });
        }
        let coords = coords
            .iter()
            .zip(&self.factors)
            .map(|(&c, f)| c % f.modulus)
            .collect();
        Ok(GroupElement { coords })
    }

    /// Parses the element string form `(1,0,2)`.
    pub fn parse_element(&self, text: &str) -> Result<GroupElement> {
        let inner = text
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| Error::MalformedElement(text.to_string()))?;
        let mut coords = Vec::new();
        if !inner.is_empty() {
            for part in inner.split(',') {
                coords.push(
                    part.trim()
                        .parse::<u64>()
                        .map_err(|_| Error::MalformedElement(text.to_string()))?,
                );
            }
        }
        self.element(&coords)
    }

    pub fn check(&self, a: &GroupElement) -> Result<()> {
        if a.coords.len() != self.len() {
            return Err(Error::LengthMismatch { got: a.coords.len(), want: self.len() });
        }
        Ok(())
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        assert_eq!(a.coords.len(), self.len());
        assert_eq!(b.coords.len(), self.len());
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .zip(&self.factors)
            .map(|((&x, &y), f)| {
                let s = (x as u128 + y as u128) % f.modulus as u128;
                s as u64
            })
            .collect();
        GroupElement { coords }
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        assert_eq!(a.coords.len(), self.len());
        let coords = a
            .coords
            .iter()
            .zip(&self.factors)
            .map(|(&x, f)| if x == 0 { 0 } else { f.modulus - x })
            .collect();
        GroupElement { coords }
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.add(a, &self.neg(b))
    }

    /// Scalar multiple `c * a`, for any integer `c` including negatives.
    pub fn scalar_mul(&self, c: i64, a: &GroupElement) -> GroupElement {
        assert_eq!(a.coords.len(), self.len());
        let coords = a
            .coords
            .iter()
            .zip(&self.factors)
            .map(|(&x, f)| {
                let m = f.modulus as i128;
                let c = (c as i128).rem_euclid(m) as u128;
                ((x as u128 * c) % f.modulus as u128) as u64
            })
            .collect();
        GroupElement { coords }
    }

    /// Mixed-radix index of `a`; numeric order of indices coincides with
    /// lexicographic order of coordinate vectors. Requires |G| <= u64::MAX.
    pub fn index_of(&self, a: &GroupElement) -> u64 {
        let weights = self.weights.as_ref().expect("group order exceeds u64 indexing range");
        a.coords.iter().zip(weights).map(|(&c, &w)| c * w).sum()
    }

    /// Inverse of [`GroupSignature::index_of`].
    pub fn element_at(&self, mut idx: u64) -> GroupElement {
        let weights = self.weights.as_ref().expect("group order exceeds u64 indexing range");
        let coords = weights
            .iter()
            .map(|&w| {
                let c = idx / w;
                idx %= w;
                c
            })
            .collect();
        GroupElement { coords }
    }

    /// Index-space negation; the operand must be a valid index.
    pub fn index_neg(&self, a: u64) -> u64 {
        let weights = self.weights.as_ref().expect("group order exceeds u64 indexing range");
        let mut a = a;
        let mut out = 0u64;
        for (f, &w) in self.factors.iter().zip(weights) {
            let c = a / w;
            a %= w;
            if c != 0 {
                out += (f.modulus - c) * w;
            }
        }
        out
    }

    /// Index-space addition; both operands must be valid indices.
    pub fn index_add(&self, a: u64, b: u64) -> u64 {
        let weights = self.weights.as_ref().expect("group order exceeds u64 indexing range");
        let mut a = a;
        let mut b = b;
        let mut out = 0u64;
        for (f, &w) in self.factors.iter().zip(weights) {
            let ca = a / w;
            let cb = b / w;
            a %= w;
            b %= w;
            out += ((ca + cb) % f.modulus) * w;
        }
        out
    }
}

impl fmt::Display for GroupSignature {
    /// Renders in the grammar accepted by [`GroupSignature::parse`], e.g.
    /// `2^3,5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if factor.exponent == 1 {
                write!(f, "{}", factor.prime)?;
            } else {
                write!(f, "{}^{}", factor.prime, factor.exponent)?;
            }
        }
        Ok(())
    }
}

fn mixed_radix_weights(factors: &[Factor]) -> Option<Vec<u64>> {
    let mut weights = vec![1u64; factors.len()];
    for i in (0..factors.len().saturating_sub(1)).rev() {
        weights[i] = weights[i + 1].checked_mul(factors[i + 1].modulus)?;
    }
    // The full order must also fit.
    weights
        .first()
        .map(|&w| w.checked_mul(factors[0].modulus))
        .flatten()
        .map(|_| weights)
}

/// A coordinate vector of canonical residues, one per signature factor.
///
/// Ordering is lexicographic on the coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    coords: Vec<u64>,
}

impl GroupElement {
    /// Wraps coordinates already reduced modulo their factor moduli; callers
    /// are responsible for canonicity.
    pub(crate) fn from_canonical_coords(coords: Vec<u64>) -> Self {
        GroupElement { coords }
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// 1-based index of the last nonzero coordinate; 0 for the identity.
    pub fn max_nonzero_index(&self) -> usize {
        self.coords
            .iter()
            .rposition(|&c| c != 0)
            .map(|i| i + 1)
            .unwrap_or(0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A subgroup given by generators together with its enumerated element set.
///
/// Equality and hashing go through the canonical form (the elements sorted
/// lexicographically), so two values compare equal iff they are the same
/// subgroup, regardless of how they were generated.
#[derive(Debug, Clone)]
pub struct Subgroup {
    generators: Vec<GroupElement>,
    elements: Vec<GroupElement>, // sorted, deduplicated
}

impl Subgroup {
    pub(crate) fn from_sorted_elements(
        generators: Vec<GroupElement>,
        elements: Vec<GroupElement>,
    ) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(!elements.is_empty() && elements[0].is_identity());
        Subgroup { generators, elements }
    }

    pub fn trivial(sig: &GroupSignature) -> Self {
        Subgroup { generators: Vec::new(), elements: vec![sig.identity()] }
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// The canonical form: elements sorted lexicographically.
    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn contains(&self, a: &GroupElement) -> bool {
        self.elements.binary_search(a).is_ok()
    }

    /// Renders the canonical form, e.g. `{(0,0),(1,1)}`.
    pub fn canonical_string(&self) -> String {
        let mut s = String::from("{");
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&e.to_string());
        }
        s.push('}');
        s
    }
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements
    }
}

impl Eq for Subgroup {}

impl std::hash::Hash for Subgroup {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.elements.hash(state);
    }
}

/// Breadth-first closure of a generator list under the group addition.
///
/// Inverses come for free: every coordinate has finite order, so repeated
/// addition of a generator eventually reaches its inverse.
pub fn closure(sig: &GroupSignature, gens: &[GroupElement], cap: u64) -> Result<Subgroup> {
    for g in gens {
        sig.check(g)?;
    }
    let mut set = BTreeSet::new();
    let mut queue = VecDeque::new();
    set.insert(sig.identity());
    queue.push_back(sig.identity());
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = sig.add(&x, g);
            if set.insert(y.clone()) {
                if set.len() as u64 > cap {
                    return Err(Error::CapExceeded { cap });
                }
                queue.push_back(y);
            }
        }
    }
    let elements: Vec<GroupElement> = set.into_iter().collect();
    Ok(Subgroup::from_sorted_elements(gens.to_vec(), elements))
}

/// Index-space closure used by hot paths (lattice enumeration, runtime
/// checks). Marks membership in a dense bitmap, so it requires |G| to be
/// small enough to index.
pub(crate) fn closure_indices(sig: &GroupSignature, gens: &[u64], order: u64) -> Vec<u64> {
    let mut seen = vec![false; order as usize];
    seen[0] = true;
    let mut members = vec![0u64];
    let mut head = 0;
    while head < members.len() {
        let x = members[head];
        head += 1;
        for &g in gens {
            let y = sig.index_add(x, g);
            if !seen[y as usize] {
                seen[y as usize] = true;
                members.push(y);
            }
        }
    }
    members.sort_unstable();
    members
}

/// The prefix subgroup `{h in H : I_h <= i}` (1-based factor index `i`).
pub fn prefix_subgroup(sig: &GroupSignature, h: &Subgroup, i: usize) -> Result<Subgroup> {
    if i > sig.len() {
        return Err(Error::IndexOutOfRange { index: i, len: sig.len() });
    }
    let elements: Vec<GroupElement> = h
        .elements()
        .iter()
        .filter(|e| e.max_nonzero_index() <= i)
        .cloned()
        .collect();
    Ok(Subgroup::from_sorted_elements(elements.clone(), elements))
}

/// A per-factor exponent vector `j` describing the representative set
/// `V = prod {0,..,p_i^{j_i}-1}` embedded in the ambient group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentVector {
    exps: Vec<u32>,
}

impl ExponentVector {
    pub fn new(sig: &GroupSignature, exps: Vec<u32>) -> Result<Self> {
        if exps.len() != sig.len() {
            return Err(Error::LengthMismatch { got: exps.len(), want: sig.len() });
        }
        for (j, f) in exps.iter().zip(sig.factors()) {
            if *j > f.exponent {
                return Err(Error::IndexOutOfRange {
                    index: *j as usize,
                    len: f.exponent as usize,
                });
            }
        }
        Ok(ExponentVector { exps })
    }

    pub fn zero(sig: &GroupSignature) -> Self {
        ExponentVector { exps: vec![0; sig.len()] }
    }

    /// The ambient prefix `G_i`: full exponents on the first `i` factors,
    /// zero beyond.
    pub fn prefix(sig: &GroupSignature, i: usize) -> Self {
        let exps = sig
            .factors()
            .iter()
            .enumerate()
            .map(|(m, f)| if m < i { f.exponent } else { 0 })
            .collect();
        ExponentVector { exps }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn set(&mut self, i: usize, t: u32) {
        self.exps[i] = t;
    }

    /// Per-factor sizes `p_i^{j_i}`.
    pub fn factor_sizes(&self, sig: &GroupSignature) -> Vec<u64> {
        self.exps
            .iter()
            .zip(sig.factors())
            .map(|(&j, f)| f.prime.pow(j))
            .collect()
    }

    /// |V| as an exact integer.
    pub fn size(&self, sig: &GroupSignature) -> u128 {
        self.factor_sizes(sig).iter().map(|&s| s as u128).product()
    }
}

/// Enumerates `prod {0,..,p_i^{j_i}-1}` as full-length elements of G, in
/// lexicographic order.
pub fn representative_set_elements(
    sig: &GroupSignature,
    v: &ExponentVector,
    cap: u64,
) -> Result<Vec<GroupElement>> {
    if v.size(sig) > cap as u128 {
        return Err(Error::CapExceeded { cap });
    }
    let sizes = v.factor_sizes(sig);
    let mut out = Vec::with_capacity(v.size(sig) as usize);
    let mut coords = vec![0u64; sig.len()];
    loop {
        out.push(GroupElement { coords: coords.clone() });
        // Odometer step, least-significant coordinate last so the output is
        // already sorted.
        let mut i = sig.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            coords[i] += 1;
            if coords[i] < sizes[i] {
                break;
            }
            coords[i] = 0;
        }
    }
}

/// Deterministic Miller-Rabin over the bases that are exact for u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}
