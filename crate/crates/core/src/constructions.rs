//! Spreads of the unital and the explicit constructions: regular spreads,
//! cyclic spreads (q even) and André spreads assembled from triply ruled sets.

use std::fmt;

use fixedbitset::FixedBitSet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::{FieldElement, FieldTable};
use crate::geometry::{PointId, SecantId, UnitalGeometry};
use crate::group::UnitaryGroup;
use crate::perm::Perm;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpreadError {
    #[error("spread has {got} lines, expected {expected}")]
    WrongSize { expected: usize, got: usize },
    #[error("line {0} is not a secant")]
    NotSecant(u32),
    #[error("secants {0} and {1} share a unital point")]
    Overlap(SecantId, SecantId),
    #[error("secant {0} listed twice")]
    Duplicate(SecantId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("point {0} lies on the unital")]
    PointOnUnital(PointId),
    #[error("ruling parameter must lie in GF(q) and differ from 0 and -1")]
    BadParameter,
    #[error("ruling choice must assign each of the {expected} parameters exactly once")]
    ChoiceDomain { expected: usize },
    #[error(transparent)]
    Spread(#[from] SpreadError),
}

/// A partition of the unital into `q² - q + 1` blocks, as sorted secant ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spread {
    lines: Vec<SecantId>,
}

impl Spread {
    /// Validates the partition property.
    pub fn new(geom: &UnitalGeometry, mut lines: Vec<SecantId>) -> Result<Self, SpreadError> {
        lines.sort_unstable();
        if let Some(w) = lines.windows(2).find(|w| w[0] == w[1]) {
            return Err(SpreadError::Duplicate(w[0]));
        }
        if let Some(&s) = lines.iter().find(|&&s| s as usize >= geom.num_secants()) {
            return Err(SpreadError::NotSecant(s));
        }
        let mut owner = vec![u32::MAX; geom.unital().len()];
        for &s in &lines {
            for &p in geom.block(s) {
                if owner[p as usize] != u32::MAX {
                    return Err(SpreadError::Overlap(owner[p as usize], s));
                }
                owner[p as usize] = s;
            }
        }
        if lines.len() != geom.spread_size() {
            return Err(SpreadError::WrongSize { expected: geom.spread_size(), got: lines.len() });
        }
        Ok(Spread { lines })
    }

    pub fn lines(&self) -> &[SecantId] {
        &self.lines
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn contains(&self, s: SecantId) -> bool {
        self.lines.binary_search(&s).is_ok()
    }

    /// Image under a group element; still a spread since the group preserves blocks.
    pub fn image(&self, g: &Perm) -> Spread {
        let mut lines: Vec<_> = self.lines.iter().map(|&s| g.apply(s)).collect();
        lines.sort_unstable();
        Spread { lines }
    }
}

/// The `q² - q` secants through `p` together with the polar of `p`.
pub fn regular_spread(geom: &UnitalGeometry, p: PointId) -> Result<Spread, ConstructionError> {
    if geom.on_unital(p) {
        return Err(ConstructionError::PointOnUnital(p));
    }
    let mut lines = geom.secants_through(p);
    lines.push(geom.secant_of_line(geom.polar(p)).expect("polar of an exterior point is a secant"));
    Ok(Spread::new(geom, lines)?)
}

/// The regular spread centred at `(1,0,0)`.
pub fn reference_regular_spread(geom: &UnitalGeometry) -> Spread {
    let (o, z) = (FieldElement::ONE, FieldElement::ZERO);
    regular_spread(geom, geom.id_of(&[o, z, z]).expect("point")).expect("(1,0,0) is exterior")
}

fn smallest_prime_factor(n: u64) -> u64 {
    (2..).find(|d| n % d == 0 || d * d > n).map_or(n, |d| if n % d == 0 { d } else { n })
}

fn largest_prime_factor(mut n: u64) -> u64 {
    let mut best = 1;
    while n > 1 {
        let p = smallest_prime_factor(n);
        best = best.max(p);
        while n % p == 0 {
            n /= p;
        }
    }
    best
}

/// A spread that is one orbit of a cyclic subgroup of order `q² - q + 1`, if
/// any exists.
///
/// Every such subgroup contains a subgroup of order `r`, the largest prime
/// dividing `q² - q + 1`. When `r²` does not divide the group order those
/// subgroups are Sylow subgroups and hence conjugate, so up to conjugacy the
/// cyclic subgroup centralizes one fixed element of order `r` and the search
/// over that centralizer is exhaustive. Among all spreads found the smallest
/// line list is returned.
pub fn cyclic_spread(geom: &UnitalGeometry, group: &UnitaryGroup) -> Option<Spread> {
    let q = geom.q() as u64;
    let n = q * q - q + 1;
    let r = largest_prime_factor(n);
    let exhaustive = group.order() % (r as u128 * r as u128) != 0;
    let tries = if exhaustive { 1 } else { 16 };
    let mut rng = ChaCha8Rng::seed_from_u64(0xc1c1);
    let mut best: Option<Spread> = None;
    let mut found_x = 0;
    while found_x < tries {
        let g = group.random_element(&mut rng);
        let ord = g.order();
        if ord % r != 0 {
            continue;
        }
        found_x += 1;
        let x = g.pow(ord / r);
        for c in group.centralizer(&x).chain().elements() {
            if c.order() != n {
                continue;
            }
            for cycle in c.cycles() {
                if cycle.len() as u64 != n {
                    continue;
                }
                let disjoint = cycle.iter().enumerate().all(|(i, &a)| cycle[i + 1..].iter().all(|&b| geom.disjoint(a, b)));
                if disjoint {
                    let s = Spread::new(geom, cycle).expect("pairwise disjoint blocks of the right count");
                    if best.as_ref().map_or(true, |b| s < *b) {
                        best = Some(s);
                    }
                }
            }
        }
    }
    best
}

/// One of the three families ruling a set `T_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ruling {
    H,
    V,
    D,
}

impl Ruling {
    pub const ALL: [Ruling; 3] = [Ruling::H, Ruling::V, Ruling::D];
}

impl fmt::Display for Ruling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ruling::H => "H",
            Ruling::V => "V",
            Ruling::D => "D",
        })
    }
}

/// The three rulings of `T_a = {(1,y,z) : N(y) = -(1+a), N(z) = a}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleRuling {
    /// Lines `[u,0,1]` with `N(u) = a`.
    pub h: Vec<SecantId>,
    /// Lines `[v,1,0]` with `N(v) = -(1+a)`.
    pub v: Vec<SecantId>,
    /// Lines `[0,w,1]` with `N(w) = -a/(1+a)`.
    pub d: Vec<SecantId>,
}

impl TripleRuling {
    pub fn family(&self, r: Ruling) -> &[SecantId] {
        match r {
            Ruling::H => &self.h,
            Ruling::V => &self.v,
            Ruling::D => &self.d,
        }
    }
}

/// Parameters `a` with `a ∈ GF(q)`, `a ≠ 0`, `a ≠ -1`, in element order.
pub fn ruling_domain(field: &FieldTable) -> Vec<FieldElement> {
    let minus_one = field.neg(FieldElement::ONE);
    field.subfield().into_iter().filter(|&a| !a.is_zero() && a != minus_one).collect()
}

pub fn triple_ruling(geom: &UnitalGeometry, a: FieldElement) -> Result<TripleRuling, ConstructionError> {
    let f = geom.field();
    if !ruling_domain(f).contains(&a) {
        return Err(ConstructionError::BadParameter);
    }
    let one_plus_a = f.add(FieldElement::ONE, a);
    let fibre = |target: FieldElement| -> Vec<FieldElement> { f.elements().filter(|&x| f.norm(x) == target).collect() };
    let (o, z) = (FieldElement::ONE, FieldElement::ZERO);
    let secants = |triples: Vec<[FieldElement; 3]>| -> Vec<SecantId> {
        let mut out: Vec<SecantId> = triples
            .iter()
            .map(|t| geom.secant_of_line(geom.id_of(t).expect("nonzero")).expect("ruling lines are secants"))
            .collect();
        out.sort_unstable();
        out
    };
    let h = secants(fibre(a).into_iter().map(|u| [u, z, o]).collect());
    let v = secants(fibre(f.neg(one_plus_a)).into_iter().map(|v| [v, o, z]).collect());
    let d_norm = f.neg(f.div(a, one_plus_a).expect("1 + a is nonzero"));
    let d = secants(fibre(d_norm).into_iter().map(|w| [z, w, o]).collect());
    Ok(TripleRuling { h, v, d })
}

/// A choice of ruling for every parameter of [`ruling_domain`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RulingChoice {
    entries: Vec<(FieldElement, Ruling)>,
}

impl RulingChoice {
    pub fn new(field: &FieldTable, mut entries: Vec<(FieldElement, Ruling)>) -> Result<Self, ConstructionError> {
        let domain = ruling_domain(field);
        entries.sort();
        let keys: Vec<FieldElement> = entries.iter().map(|e| e.0).collect();
        if keys != domain {
            return Err(ConstructionError::ChoiceDomain { expected: domain.len() });
        }
        Ok(RulingChoice { entries })
    }

    pub fn uniform(field: &FieldTable, r: Ruling) -> Self {
        RulingChoice { entries: ruling_domain(field).into_iter().map(|a| (a, r)).collect() }
    }

    /// All `3^(q-2)` choices, in lexicographic order of rulings.
    pub fn all(field: &FieldTable) -> Vec<RulingChoice> {
        let domain = ruling_domain(field);
        let mut out = vec![Vec::new()];
        for &a in &domain {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<(FieldElement, Ruling)>| {
                    Ruling::ALL.into_iter().map(move |r| {
                        let mut p = prefix.clone();
                        p.push((a, r));
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(|entries| RulingChoice { entries }).collect()
    }

    pub fn entries(&self) -> &[(FieldElement, Ruling)] {
        &self.entries
    }

    /// Parses `a=R` items separated by commas. `a` is an integer (embedded
    /// through the prime field) or `w^k`; `R` is one of `H`, `V`, `D`.
    pub fn parse(field: &FieldTable, text: &str) -> Result<Self, ConstructionError> {
        let mut entries = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (a, r) = item.split_once('=').ok_or(ConstructionError::BadParameter)?;
            let a = a.trim();
            let a = if let Some(k) = a.strip_prefix("w^") {
                field.exp(k.parse::<i64>().map_err(|_| ConstructionError::BadParameter)?)
            } else {
                field.from_int(a.parse::<i64>().map_err(|_| ConstructionError::BadParameter)?)
            };
            let r = match r.trim() {
                "H" | "h" => Ruling::H,
                "V" | "v" => Ruling::V,
                "D" | "d" => Ruling::D,
                _ => return Err(ConstructionError::BadParameter),
            };
            entries.push((a, r));
        }
        RulingChoice::new(field, entries)
    }

    /// Inverse of [`RulingChoice::parse`]; prime-field parameters are written as integers.
    pub fn format(&self, field: &FieldTable) -> String {
        let items: Vec<String> = self
            .entries
            .iter()
            .map(|&(a, r)| {
                let int = (0..field.p() as i64).find(|&k| field.from_int(k) == a);
                match int {
                    Some(k) => format!("{k}={r}"),
                    None => format!("w^{}={r}", a.log().expect("nonzero")),
                }
            })
            .collect();
        items.join(",")
    }
}

/// The triangle sides `[1,0,0]`, `[0,1,0]`, `[0,0,1]` as secant ids.
pub fn triangle(geom: &UnitalGeometry) -> [SecantId; 3] {
    let (o, z) = (FieldElement::ONE, FieldElement::ZERO);
    [[o, z, z], [z, o, z], [z, z, o]].map(|t| geom.secant_of_line(geom.id_of(&t).expect("point")).expect("secant"))
}

pub fn andre_spread(geom: &UnitalGeometry, choice: &RulingChoice) -> Result<Spread, ConstructionError> {
    let mut lines: Vec<SecantId> = triangle(geom).to_vec();
    for &(a, r) in choice.entries() {
        lines.extend_from_slice(triple_ruling(geom, a)?.family(r));
    }
    Ok(Spread::new(geom, lines)?)
}

/// Unital positions covered by the blocks of `lines`.
pub fn covered_points(geom: &UnitalGeometry, lines: &[SecantId]) -> FixedBitSet {
    let mut cover = FixedBitSet::with_capacity(geom.unital().len());
    for &s in lines {
        for &p in geom.block(s) {
            cover.insert(p as usize);
        }
    }
    cover
}
