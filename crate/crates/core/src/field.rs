//! Arithmetic in GF(q²) for q = p^e, with GF(q) embedded as a subfield.
//!
//! Elements are held as discrete logarithms with respect to a primitive root
//! `w` of a caller-supplied primitive polynomial, plus a distinguished zero.
//! Multiplication is exponent addition; addition goes through a Zech
//! logarithm table (`1 + w^k = w^{zech[k]}`).

use std::fmt;

use thiserror::Error;

/// Largest supported small-field order. Keeps every table comfortably small.
pub const MAX_Q: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("q = {0} exceeds the supported maximum {MAX_Q}")]
    TooLarge(u64),
    #[error("polynomial must have degree {expected} (got {got} coefficients)")]
    WrongDegree { expected: u32, got: usize },
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("coefficient {coef} is invalid over GF({p})")]
    BadCoefficient { coef: u32, p: u32 },
    #[error("polynomial is not primitive: its root has multiplicative order {order}, expected {expected}")]
    NotPrimitive { order: u32, expected: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("invalid field element token {0:?}")]
    BadToken(String),
}

/// Parameters of GF(q²), q = p^e, defined by a primitive polynomial of degree 2e.
///
/// `primitive_poly[i]` is the coefficient of `x^i`; the last entry is the
/// leading coefficient and must be 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    pub p: u32,
    pub e: u32,
    pub primitive_poly: Vec<u32>,
}

impl FieldSpec {
    pub fn new(p: u32, e: u32, primitive_poly: Vec<u32>) -> Self {
        FieldSpec { p, e, primitive_poly }
    }

    /// GF(16) with `x^4 + x + 1` (q = 4).
    pub fn q4() -> Self {
        FieldSpec::new(2, 2, vec![1, 1, 0, 0, 1])
    }

    /// GF(25) with `x^2 + 4x + 2` (q = 5).
    pub fn q5() -> Self {
        FieldSpec::new(5, 1, vec![2, 4, 1])
    }

    /// GF(49) with `x^2 + 6x + 3` (q = 7).
    pub fn q7() -> Self {
        FieldSpec::new(7, 1, vec![3, 6, 1])
    }

    /// The shipped preset for `q`, if there is one.
    pub fn preset(q: u32) -> Option<Self> {
        match q {
            4 => Some(Self::q4()),
            5 => Some(Self::q5()),
            7 => Some(Self::q7()),
            _ => None,
        }
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).saturating_pow(self.e)
    }
}

/// An element of GF(q²): zero, or `w^k` with `0 <= k < q² - 1`.
///
/// Internally `0` encodes zero and `k + 1` encodes `w^k`, so the derived
/// ordering puts zero first and then follows the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// `w^k`. The exponent must already be reduced; use [`FieldTable::exp`]
    /// for arbitrary exponents.
    fn from_reduced_log(k: u32) -> Self {
        FieldElement(k + 1)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// The discrete logarithm, or `None` for zero.
    pub fn log(self) -> Option<u32> {
        self.0.checked_sub(1)
    }

    /// Dense index in `0..q²` (zero is 0, `w^k` is `k + 1`).
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.log() {
            None => f.write_str("*"),
            Some(k) => write!(f, "{k}"),
        }
    }
}

/// Lookup tables for GF(q²). Immutable once built.
#[derive(Debug, Clone)]
pub struct FieldTable {
    spec: FieldSpec,
    q: u32,
    /// q² - 1.
    order: u32,
    /// `zech[k]` is `log(1 + w^k)`, `None` when `1 + w^k = 0`.
    zech: Vec<Option<u32>>,
    /// log of -1.
    neg_one: u32,
    /// Prime-field integers 0..p as field elements.
    ints: Vec<FieldElement>,
    /// Coordinate vector over GF(p) of `w^k`, for diagnostics.
    vectors: Vec<Vec<u32>>,
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

impl FieldTable {
    pub fn build(spec: FieldSpec) -> Result<Self, FieldError> {
        let FieldSpec { p, e, ref primitive_poly } = spec;
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = spec.q();
        if q > MAX_Q as u64 {
            return Err(FieldError::TooLarge(q));
        }
        let q = q as u32;
        let n = 2 * e as usize;
        if primitive_poly.len() != n + 1 {
            return Err(FieldError::WrongDegree { expected: 2 * e, got: primitive_poly.len() });
        }
        if let Some(&coef) = primitive_poly.iter().find(|&&c| c >= p) {
            return Err(FieldError::BadCoefficient { coef, p });
        }
        if primitive_poly[n] != 1 {
            return Err(FieldError::NotMonic);
        }

        let order = q * q - 1;
        let encode = |v: &[u32]| v.iter().rev().fold(0usize, |acc, &c| acc * p as usize + c as usize);

        // Powers of x modulo the polynomial; x^n = -sum c_i x^i.
        let mut vectors = Vec::with_capacity(order as usize);
        let mut log_of = vec![u32::MAX; (q * q) as usize];
        let mut cur = vec![0u32; n];
        cur[0] = 1;
        let mut found_order = None;
        for k in 0..order {
            let idx = encode(&cur);
            if k > 0 && idx == 1 {
                found_order = Some(k);
                break;
            }
            log_of[idx] = k;
            vectors.push(cur.clone());
            let carry = cur[n - 1];
            for i in (1..n).rev() {
                cur[i] = cur[i - 1];
            }
            cur[0] = 0;
            for (i, c) in cur.iter_mut().enumerate() {
                *c = (*c + carry * (p - primitive_poly[i])) % p;
            }
        }
        if let Some(found) = found_order {
            return Err(FieldError::NotPrimitive { order: found, expected: order });
        }
        if encode(&cur) != 1 {
            // x is not a unit of the right order (e.g. reducible polynomial).
            return Err(FieldError::NotPrimitive { order: 0, expected: order });
        }

        let zech = vectors
            .iter()
            .map(|v| {
                let mut s = v.clone();
                s[0] = (s[0] + 1) % p;
                let idx = encode(&s);
                (idx != 0).then(|| log_of[idx])
            })
            .collect();

        let neg_one = if p == 2 { 0 } else { order / 2 };
        let mut table = FieldTable {
            spec: spec.clone(),
            q,
            order,
            zech,
            neg_one,
            ints: Vec::new(),
            vectors,
        };
        let mut ints = Vec::with_capacity(p as usize);
        let mut acc = FieldElement::ZERO;
        for _ in 0..p {
            ints.push(acc);
            acc = table.add(acc, FieldElement::ONE);
        }
        debug_assert!(acc.is_zero());
        table.ints = ints;
        Ok(table)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn p(&self) -> u32 {
        self.spec.p
    }

    pub fn e(&self) -> u32 {
        self.spec.e
    }

    /// Order of the small field GF(q).
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of elements of GF(q²).
    pub fn size(&self) -> u32 {
        self.q * self.q
    }

    /// Multiplicative order of `w`, i.e. q² - 1.
    pub fn multiplicative_order(&self) -> u32 {
        self.order
    }

    /// `w^k` for any integer `k`.
    pub fn exp(&self, k: i64) -> FieldElement {
        FieldElement::from_reduced_log(k.rem_euclid(self.order as i64) as u32)
    }

    /// The primitive root `w`.
    pub fn primitive(&self) -> FieldElement {
        self.exp(1)
    }

    /// The integer `k mod p` as an element of the prime subfield.
    pub fn from_int(&self, k: i64) -> FieldElement {
        self.ints[k.rem_euclid(self.spec.p as i64) as usize]
    }

    /// Every element, zero first, then by exponent.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..=self.order).map(FieldElement)
    }

    pub fn element_from_index(&self, idx: usize) -> FieldElement {
        assert!(idx <= self.order as usize);
        FieldElement(idx as u32)
    }

    /// Coordinates of `a` over GF(p) in the polynomial basis `1, w, w², ...`.
    pub fn coordinates(&self, a: FieldElement) -> Vec<u32> {
        match a.log() {
            None => vec![0; 2 * self.spec.e as usize],
            Some(k) => self.vectors[k as usize].clone(),
        }
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match (a.log(), b.log()) {
            (None, _) => b,
            (_, None) => a,
            (Some(i), Some(j)) => {
                let d = (j + self.order - i) % self.order;
                match self.zech[d as usize] {
                    None => FieldElement::ZERO,
                    Some(z) => FieldElement::from_reduced_log((i + z) % self.order),
                }
            }
        }
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        match a.log() {
            None => a,
            Some(k) => FieldElement::from_reduced_log((k + self.neg_one) % self.order),
        }
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match (a.log(), b.log()) {
            (Some(i), Some(j)) => FieldElement::from_reduced_log((i + j) % self.order),
            _ => FieldElement::ZERO,
        }
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        let k = a.log().ok_or(FieldError::ZeroInverse)?;
        Ok(FieldElement::from_reduced_log((self.order - k) % self.order))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^n`, with `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, n: u64) -> FieldElement {
        match a.log() {
            None if n == 0 => FieldElement::ONE,
            None => FieldElement::ZERO,
            Some(k) => {
                let r = (k as u64 * (n % self.order as u64)) % self.order as u64;
                FieldElement::from_reduced_log(r as u32)
            }
        }
    }

    /// `a^(p^k)`, the k-th power of the Frobenius automorphism.
    pub fn frobenius(&self, a: FieldElement, k: u32) -> FieldElement {
        let mut r = a;
        for _ in 0..k % (2 * self.spec.e) {
            r = self.pow(r, self.spec.p as u64);
        }
        r
    }

    /// The involution `a ↦ a^q`.
    pub fn conj(&self, a: FieldElement) -> FieldElement {
        self.pow(a, self.q as u64)
    }

    /// `a^(q+1)`, which lies in GF(q).
    pub fn norm(&self, a: FieldElement) -> FieldElement {
        self.pow(a, self.q as u64 + 1)
    }

    /// Whether `a` lies in the subfield GF(q).
    pub fn in_subfield(&self, a: FieldElement) -> bool {
        a.log().map_or(true, |k| k % (self.q + 1) == 0)
    }

    /// The subfield GF(q), zero first.
    pub fn subfield(&self) -> Vec<FieldElement> {
        self.elements().filter(|&a| self.in_subfield(a)).collect()
    }

    /// Parses an exponent token or `*`.
    pub fn parse_element(&self, token: &str) -> Result<FieldElement, FieldError> {
        let t = token.trim();
        if t == "*" {
            return Ok(FieldElement::ZERO);
        }
        match t.parse::<u32>() {
            Ok(k) if k < self.order => Ok(FieldElement::from_reduced_log(k)),
            _ => Err(FieldError::BadToken(token.to_string())),
        }
    }
}
