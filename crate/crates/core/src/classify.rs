//! Spread invariants, reduction to projective-equivalence classes and
//! recognition of the known constructions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use thiserror::Error;

use crate::constructions::{andre_spread, RulingChoice, Spread};
use crate::geometry::{PointId, UnitalGeometry};
use crate::group::{PermGroup, UnitaryGroup};

/// Multiset of pairs `(i, j)`: `j` objects with value `i`. Sorted by `i`, no zero counts.
pub type Histogram = Vec<(u64, u64)>;

fn histogram(values: impl IntoIterator<Item = u64>) -> Histogram {
    let mut counts = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0u64) += 1;
    }
    counts.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpreadInvariants {
    pub stabilizer_order: u128,
    /// Orbit sizes of the stabilizer on the spread's lines.
    pub orbit_structure: Histogram,
    /// Over exterior points: how many spread lines pass through each.
    pub type_vector: Histogram,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error("type vector counts {got} exterior points, expected {expected}")]
    TypePointCount { expected: u64, got: u64 },
    #[error("type vector counts {got} incidences, expected {expected}")]
    TypeIncidences { expected: u64, got: u64 },
    #[error("orbit structure covers {got} lines, expected {expected}")]
    OrbitLines { expected: u64, got: u64 },
}

impl SpreadInvariants {
    /// Counting identities every spread of the unital satisfies.
    pub fn check_identities(&self, q: u32) -> Result<(), InvariantError> {
        let q = q as u64;
        let n = q * q - q + 1;
        let points: u64 = self.type_vector.iter().map(|&(_, j)| j).sum();
        let expected = q.pow(4) - q.pow(3) + q * q;
        if points != expected {
            return Err(InvariantError::TypePointCount { expected, got: points });
        }
        let incidences: u64 = self.type_vector.iter().map(|&(i, j)| i * j).sum();
        if incidences != n * (q * q - q) {
            return Err(InvariantError::TypeIncidences { expected: n * (q * q - q), got: incidences });
        }
        let lines: u64 = self.orbit_structure.iter().map(|&(i, j)| i * j).sum();
        if lines != n {
            return Err(InvariantError::OrbitLines { expected: n, got: lines });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Regular,
    Cyclic,
    Andre,
    Unknown,
}

impl Kind {
    /// One-letter label used in summary tables; unknown spreads get none.
    pub fn letter(self) -> &'static str {
        match self {
            Kind::Regular => "r",
            Kind::Cyclic => "c",
            Kind::Andre => "a",
            Kind::Unknown => "",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Some(match s {
            "regular" => Kind::Regular,
            "cyclic" => Kind::Cyclic,
            "andre" => Kind::Andre,
            "unknown" => Kind::Unknown,
            _ => return None,
        })
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Regular => "regular",
            Kind::Cyclic => "cyclic",
            Kind::Andre => "andre",
            Kind::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ClassifiedSpread {
    pub representative: Spread,
    pub invariants: SpreadInvariants,
    pub kind: Kind,
    /// How many of the input spreads fell into this class.
    pub members: usize,
}

pub fn type_vector(geom: &UnitalGeometry, spread: &Spread) -> Histogram {
    let mut through = vec![0u64; geom.num_points()];
    for &s in spread.lines() {
        for &p in geom.exterior_on(s) {
            through[p as usize] += 1;
        }
    }
    histogram(geom.exterior_points().map(|p| through[p as usize]))
}

/// The centre of a regular spread: the exterior point on `q² - q` of its lines.
pub fn regular_center(geom: &UnitalGeometry, spread: &Spread) -> Option<PointId> {
    let q = geom.q() as u64;
    let mut through = vec![0u64; geom.num_points()];
    for &s in spread.lines() {
        for &p in geom.exterior_on(s) {
            through[p as usize] += 1;
        }
    }
    geom.exterior_points().find(|&p| through[p as usize] == q * q - q)
}

/// Invariants and the stabilizer they were computed from.
pub fn stabilizer_invariants(geom: &UnitalGeometry, spread: &Spread, group: &UnitaryGroup) -> (SpreadInvariants, PermGroup) {
    let stab = group.setwise_stabilizer(spread.lines());
    let orbits = stab.orbits(spread.lines()).expect("stabilizer preserves the spread");
    let inv = SpreadInvariants {
        stabilizer_order: stab.order(),
        orbit_structure: histogram(orbits.iter().map(|o| o.len() as u64)),
        type_vector: type_vector(geom, spread),
    };
    if let Err(e) = inv.check_identities(geom.q()) {
        panic!("invariant identity violated: {e}");
    }
    (inv, stab)
}

fn is_regular(geom: &UnitalGeometry, inv: &SpreadInvariants) -> bool {
    let q = geom.q() as u64;
    inv.type_vector.contains(&(q * q - q, 1))
}

/// Whether some stabilizer element of order `q² - q + 1` permutes the lines in one cycle.
fn has_transitive_cyclic(geom: &UnitalGeometry, spread: &Spread, stab: &PermGroup, inv: &SpreadInvariants) -> bool {
    let n = spread.len() as u64;
    if inv.orbit_structure != [(n, 1)] || inv.stabilizer_order % n as u128 != 0 {
        return false;
    }
    debug_assert_eq!(n as usize, geom.spread_size());
    stab.chain().elements().iter().any(|g| {
        if g.order() != n {
            return false;
        }
        let first = spread.lines()[0];
        let mut x = g.apply(first);
        let mut len = 1;
        while x != first {
            x = g.apply(x);
            len += 1;
        }
        len == n
    })
}

/// Classifies spreads against the known constructions. André
/// representatives are built on first use and cached.
pub struct Classifier<'a> {
    geom: &'a UnitalGeometry,
    group: &'a UnitaryGroup,
    andre: OnceLock<Vec<ClassifiedSpread>>,
}

impl<'a> Classifier<'a> {
    pub fn new(geom: &'a UnitalGeometry, group: &'a UnitaryGroup) -> Self {
        Classifier { geom, group, andre: OnceLock::new() }
    }

    pub fn geometry(&self) -> &UnitalGeometry {
        self.geom
    }

    pub fn group(&self) -> &UnitaryGroup {
        self.group
    }

    pub fn invariants(&self, spread: &Spread) -> (SpreadInvariants, PermGroup) {
        stabilizer_invariants(self.geom, spread, self.group)
    }

    /// Classes of all André spreads, labelled without the André test itself.
    pub fn andre_classes(&self) -> &[ClassifiedSpread] {
        self.andre.get_or_init(|| {
            let spreads: Vec<Spread> = RulingChoice::all(self.geom.field())
                .iter()
                .map(|c| andre_spread(self.geom, c).expect("André construction yields a spread"))
                .collect();
            let mut classes = self.reduce_with(&spreads, |_, _, _| Kind::Andre);
            for c in &mut classes {
                if is_regular(self.geom, &c.invariants) {
                    c.kind = Kind::Regular;
                }
            }
            classes
        })
    }

    /// Regular, then cyclic, then André, otherwise unknown.
    pub fn kind(&self, spread: &Spread, inv: &SpreadInvariants, stab: &PermGroup) -> Kind {
        if is_regular(self.geom, inv) {
            return Kind::Regular;
        }
        if self.geom.q() % 2 == 0 && has_transitive_cyclic(self.geom, spread, stab, inv) {
            return Kind::Cyclic;
        }
        let andre = self.andre_classes().iter().any(|c| {
            c.invariants == *inv
                && self.group.transporter(c.representative.lines(), spread.lines()).expect("equal sizes").is_some()
        });
        if andre {
            Kind::Andre
        } else {
            Kind::Unknown
        }
    }

    pub fn classify(&self, spread: &Spread) -> ClassifiedSpread {
        let (invariants, stab) = self.invariants(spread);
        let kind = self.kind(spread, &invariants, &stab);
        ClassifiedSpread { representative: spread.clone(), invariants, kind, members: 1 }
    }

    /// Splits `spreads` into equivalence classes, labelling each with `label`.
    fn reduce_with(
        &self,
        spreads: &[Spread],
        label: impl Fn(&Spread, &SpreadInvariants, &PermGroup) -> Kind + Sync,
    ) -> Vec<ClassifiedSpread> {
        let mut distinct: Vec<&Spread> = spreads.iter().collect();
        distinct.sort();
        distinct.dedup();
        let mut counts: BTreeMap<&Spread, usize> = BTreeMap::new();
        for s in spreads {
            *counts.entry(s).or_insert(0) += 1;
        }
        let invariants: Vec<SpreadInvariants> = distinct.par_iter().map(|s| self.invariants(s).0).collect();

        // Representatives per invariant bucket, as indices into `distinct`, with member counts.
        let mut buckets: BTreeMap<&SpreadInvariants, Vec<(usize, usize)>> = BTreeMap::new();
        for (i, s) in distinct.iter().enumerate() {
            let bucket = buckets.entry(&invariants[i]).or_default();
            let found = bucket.iter_mut().find(|(r, _)| {
                self.group.transporter(distinct[*r].lines(), s.lines()).expect("equal sizes").is_some()
            });
            match found {
                Some((_, m)) => *m += counts[s],
                None => bucket.push((i, counts[s])),
            }
        }
        let reps: Vec<(usize, usize)> = buckets.into_values().flatten().collect();
        let mut classes: Vec<ClassifiedSpread> = reps
            .par_iter()
            .map(|&(r, members)| {
                let spread = distinct[r].clone();
                let (inv, stab) = self.invariants(&spread);
                let kind = label(&spread, &inv, &stab);
                ClassifiedSpread { representative: spread, invariants: inv, kind, members }
            })
            .collect();
        classes.sort_by(|a, b| {
            (a.invariants.stabilizer_order, &a.invariants.type_vector, &a.invariants.orbit_structure, &a.representative).cmp(&(
                b.invariants.stabilizer_order,
                &b.invariants.type_vector,
                &b.invariants.orbit_structure,
                &b.representative,
            ))
        });
        classes
    }

    /// One representative per projective-equivalence class, ordered by
    /// stabilizer order and then type vector.
    pub fn reduce(&self, spreads: &[Spread]) -> Vec<ClassifiedSpread> {
        self.reduce_with(spreads, |s, inv, stab| self.kind(s, inv, stab))
    }
}

pub fn classify_kind(geom: &UnitalGeometry, group: &UnitaryGroup, spread: &Spread) -> Kind {
    Classifier::new(geom, group).classify(spread).kind
}

pub fn reduce_to_classes(geom: &UnitalGeometry, group: &UnitaryGroup, spreads: &[Spread]) -> Vec<ClassifiedSpread> {
    Classifier::new(geom, group).reduce(spreads)
}
