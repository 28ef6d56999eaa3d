//! The plane PG(2,q²), the Hermitian unital `x^{q+1} + y^{q+1} + z^{q+1} = 0`
//! and its secant/tangent structure.
//!
//! Points and lines are both canonical homogeneous triples (first nonzero
//! coordinate equal to 1) and share one dense numbering in lexicographic order
//! of their coordinates, so the triple `t` has the same id whether it is read
//! as a point or as a line. Secants get a second dense numbering of their own;
//! everything the search touches is expressed in secant ids.

use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::field::{FieldElement, FieldError, FieldTable};

/// Dense index of a point (or line) of PG(2,q²).
pub type PointId = u32;
/// Dense index of a line of PG(2,q²).
pub type LineId = u32;
/// Dense index into the list of secants.
pub type SecantId = u32;

const NONE: u32 = u32::MAX;

pub type Triple = [FieldElement; 3];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("malformed coordinate triple {0:?}")]
    BadTriple(String),
    #[error("the zero triple is not a projective point")]
    ZeroTriple,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// How a line meets the unital.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineKind {
    /// Touches the unital in exactly this point.
    Tangent(PointId),
    /// Meets the unital in these q+1 points (sorted point ids).
    Secant(Vec<PointId>),
}

/// Writes a triple in the `(a,b,c)` exponent-or-`*` form.
pub struct TripleDisplay<'a>(pub &'a Triple);

impl fmt::Display for TripleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.0;
        write!(f, "({a},{b},{c})")
    }
}

#[derive(Debug, Clone)]
pub struct UnitalGeometry {
    field: FieldTable,
    triples: Vec<Triple>,
    /// `(x, y, z)` element indices to id.
    triple_index: Vec<u32>,
    line_points: Vec<Vec<PointId>>,
    point_lines: Vec<Vec<LineId>>,
    unital: Vec<PointId>,
    /// Point id to position in `unital`, or `NONE`.
    unital_pos: Vec<u32>,
    secants: Vec<LineId>,
    /// Line id to secant id, or `NONE` for tangents.
    secant_of_line: Vec<u32>,
    /// Unital positions (indices into `unital`) on each secant, sorted.
    blocks: Vec<Vec<u32>>,
    /// Exterior point ids on each secant, sorted.
    exterior_on: Vec<Vec<PointId>>,
    /// Secants through each unital point, indexed by unital position.
    secants_at: Vec<Vec<SecantId>>,
    disjoint: Vec<FixedBitSet>,
}

impl UnitalGeometry {
    pub fn build(field: FieldTable) -> Self {
        let q = field.q() as usize;
        let size = field.size() as usize;
        let zero = FieldElement::ZERO;
        let one = FieldElement::ONE;

        let mut triples: Vec<Triple> = Vec::with_capacity(q.pow(4) + q * q + 1);
        triples.push([zero, zero, one]);
        for z in field.elements() {
            triples.push([zero, one, z]);
        }
        for y in field.elements() {
            for z in field.elements() {
                triples.push([one, y, z]);
            }
        }
        triples.sort();
        assert_eq!(triples.len(), q.pow(4) + q * q + 1);

        let mut triple_index = vec![NONE; size * size * size];
        for (id, t) in triples.iter().enumerate() {
            triple_index[(t[0].index() * size + t[1].index()) * size + t[2].index()] = id as u32;
        }

        let mut geom = UnitalGeometry {
            field,
            triples,
            triple_index,
            line_points: Vec::new(),
            point_lines: Vec::new(),
            unital: Vec::new(),
            unital_pos: Vec::new(),
            secants: Vec::new(),
            secant_of_line: Vec::new(),
            blocks: Vec::new(),
            exterior_on: Vec::new(),
            secants_at: Vec::new(),
            disjoint: Vec::new(),
        };
        geom.build_incidence();
        geom.build_unital();
        geom.check_invariants();
        geom
    }

    fn build_incidence(&mut self) {
        let n = self.triples.len();
        let mut line_points = Vec::with_capacity(n);
        let mut point_lines = vec![Vec::new(); n];
        for line in 0..n as u32 {
            let pts = self.points_on_line_slow(line);
            for &p in &pts {
                point_lines[p as usize].push(line);
            }
            line_points.push(pts);
        }
        self.line_points = line_points;
        self.point_lines = point_lines;
    }

    /// Enumerates the points of a line by parametrizing it through two of them.
    fn points_on_line_slow(&self, line: LineId) -> Vec<PointId> {
        let f = &self.field;
        let [u, v, t] = self.triples[line as usize];
        // Two independent vectors orthogonal (bilinearly) to [u,v,t].
        let basis: Vec<Triple> = {
            let cands = [
                [v, f.neg(u), FieldElement::ZERO],
                [t, FieldElement::ZERO, f.neg(u)],
                [FieldElement::ZERO, t, f.neg(v)],
            ];
            let mut chosen: Vec<Triple> = Vec::new();
            for c in cands {
                if c.iter().all(|x| x.is_zero()) {
                    continue;
                }
                if chosen.iter().all(|b| !self.proportional(b, &c)) {
                    chosen.push(c);
                }
                if chosen.len() == 2 {
                    break;
                }
            }
            chosen
        };
        assert_eq!(basis.len(), 2);
        let (a, b) = (basis[0], basis[1]);
        let mut pts = vec![self.id_of(&b).expect("nonzero")];
        for lambda in f.elements() {
            let v = [
                f.add(a[0], f.mul(lambda, b[0])),
                f.add(a[1], f.mul(lambda, b[1])),
                f.add(a[2], f.mul(lambda, b[2])),
            ];
            pts.push(self.id_of(&v).expect("nonzero"));
        }
        pts.sort_unstable();
        pts.dedup();
        assert_eq!(pts.len(), self.field.size() as usize + 1);
        pts
    }

    fn proportional(&self, a: &Triple, b: &Triple) -> bool {
        self.canonical(a) == self.canonical(b)
    }

    fn build_unital(&mut self) {
        let n = self.triples.len();
        let f = &self.field;
        let mut unital = Vec::new();
        let mut unital_pos = vec![NONE; n];
        for (id, t) in self.triples.iter().enumerate() {
            if self.hermitian_form(t).is_zero() {
                unital_pos[id] = unital.len() as u32;
                unital.push(id as u32);
            }
        }
        let q = f.q() as usize;
        let mut secants = Vec::new();
        let mut secant_of_line = vec![NONE; n];
        let mut blocks = Vec::new();
        let mut exterior_on = Vec::new();
        for line in 0..n {
            let on: Vec<u32> = self.line_points[line]
                .iter()
                .filter(|&&p| unital_pos[p as usize] != NONE)
                .map(|&p| unital_pos[p as usize])
                .collect();
            match on.len() {
                1 => {}
                k if k == q + 1 => {
                    secant_of_line[line] = secants.len() as u32;
                    secants.push(line as u32);
                    blocks.push(on);
                    exterior_on.push(
                        self.line_points[line]
                            .iter()
                            .copied()
                            .filter(|&p| unital_pos[p as usize] == NONE)
                            .collect(),
                    );
                }
                k => panic!("line {line} meets the unital in {k} points"),
            }
        }
        let mut secants_at = vec![Vec::new(); unital.len()];
        for (s, block) in blocks.iter().enumerate() {
            for &u in block {
                secants_at[u as usize].push(s as u32);
            }
        }
        let ns = secants.len();
        let mut disjoint = Vec::with_capacity(ns);
        for s in 0..ns {
            let mut row = FixedBitSet::with_capacity(ns);
            row.insert_range(..);
            for &u in &blocks[s] {
                for &t in &secants_at[u as usize] {
                    row.set(t as usize, false);
                }
            }
            disjoint.push(row);
        }
        self.unital = unital;
        self.unital_pos = unital_pos;
        self.secants = secants;
        self.secant_of_line = secant_of_line;
        self.blocks = blocks;
        self.exterior_on = exterior_on;
        self.secants_at = secants_at;
        self.disjoint = disjoint;
    }

    fn check_invariants(&self) {
        let q = self.field.q() as usize;
        assert_eq!(self.unital.len(), q.pow(3) + 1, "unital size");
        assert_eq!(self.secants.len(), q.pow(4) - q.pow(3) + q * q, "secant count");
        assert_eq!(self.triples.len() - self.secants.len(), q.pow(3) + 1, "tangent count");
        for at in &self.secants_at {
            assert_eq!(at.len(), q * q, "secants per unital point");
        }
    }

    pub fn field(&self) -> &FieldTable {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    /// Number of points (equal to the number of lines).
    pub fn num_points(&self) -> usize {
        self.triples.len()
    }

    pub fn num_secants(&self) -> usize {
        self.secants.len()
    }

    /// Number of lines in a spread, q² - q + 1.
    pub fn spread_size(&self) -> usize {
        let q = self.q() as usize;
        q * q - q + 1
    }

    pub fn coords(&self, id: PointId) -> &Triple {
        &self.triples[id as usize]
    }

    /// Scales a nonzero triple so that its first nonzero entry is 1.
    pub fn canonical(&self, t: &Triple) -> Option<Triple> {
        let lead = t.iter().copied().find(|x| !x.is_zero())?;
        let inv = self.field.inv(lead).expect("nonzero");
        Some(t.map(|x| self.field.mul(x, inv)))
    }

    /// Id of the point (or line) with homogeneous coordinates `t`.
    pub fn id_of(&self, t: &Triple) -> Option<PointId> {
        let c = self.canonical(t)?;
        let size = self.field.size() as usize;
        let id = self.triple_index[(c[0].index() * size + c[1].index()) * size + c[2].index()];
        debug_assert_ne!(id, NONE);
        Some(id)
    }

    pub fn hermitian_form(&self, t: &Triple) -> FieldElement {
        let f = &self.field;
        t.iter().fold(FieldElement::ZERO, |acc, &x| f.add(acc, f.norm(x)))
    }

    pub fn incident(&self, point: PointId, line: LineId) -> bool {
        let f = &self.field;
        let p = self.coords(point);
        let l = self.coords(line);
        (0..3).fold(FieldElement::ZERO, |acc, i| f.add(acc, f.mul(p[i], l[i]))).is_zero()
    }

    pub fn points_on(&self, line: LineId) -> &[PointId] {
        &self.line_points[line as usize]
    }

    pub fn lines_through(&self, point: PointId) -> &[LineId] {
        &self.point_lines[point as usize]
    }

    fn cross(&self, a: &Triple, b: &Triple) -> Triple {
        let f = &self.field;
        [
            f.sub(f.mul(a[1], b[2]), f.mul(a[2], b[1])),
            f.sub(f.mul(a[2], b[0]), f.mul(a[0], b[2])),
            f.sub(f.mul(a[0], b[1]), f.mul(a[1], b[0])),
        ]
    }

    /// The line through two distinct points.
    pub fn join(&self, a: PointId, b: PointId) -> LineId {
        assert_ne!(a, b);
        self.id_of(&self.cross(self.coords(a), self.coords(b))).expect("distinct points")
    }

    /// The common point of two distinct lines.
    pub fn meet(&self, a: LineId, b: LineId) -> PointId {
        self.join(a, b)
    }

    pub fn on_unital(&self, point: PointId) -> bool {
        self.unital_pos[point as usize] != NONE
    }

    /// Unital point ids, ascending.
    pub fn unital(&self) -> &[PointId] {
        &self.unital
    }

    /// Position of a unital point in [`Self::unital`].
    pub fn unital_position(&self, point: PointId) -> Option<u32> {
        let pos = self.unital_pos[point as usize];
        (pos != NONE).then_some(pos)
    }

    /// Exterior (non-unital) point ids, ascending.
    pub fn exterior_points(&self) -> impl Iterator<Item = PointId> + '_ {
        (0..self.num_points() as u32).filter(|&p| !self.on_unital(p))
    }

    /// The unital points on `line`, as a tangent or a secant.
    pub fn classify_line(&self, line: LineId) -> LineKind {
        let on: Vec<PointId> = self.points_on(line).iter().copied().filter(|&p| self.on_unital(p)).collect();
        match on.len() {
            1 => LineKind::Tangent(on[0]),
            n if n == self.q() as usize + 1 => LineKind::Secant(on),
            n => panic!("line {line} meets the unital in {n} points"),
        }
    }

    /// The polar line `[x^q, y^q, z^q]` of a point.
    pub fn polar(&self, point: PointId) -> LineId {
        let f = &self.field;
        self.id_of(&self.coords(point).map(|x| f.conj(x))).expect("nonzero")
    }

    /// The pole of a line (the polarity is an involution, so this is the same map).
    pub fn pole(&self, line: LineId) -> PointId {
        self.polar(line)
    }

    /// Line ids of all secants, indexed by secant id.
    pub fn secant_lines(&self) -> &[LineId] {
        &self.secants
    }

    pub fn secant_line(&self, s: SecantId) -> LineId {
        self.secants[s as usize]
    }

    pub fn secant_of_line(&self, line: LineId) -> Option<SecantId> {
        let s = self.secant_of_line[line as usize];
        (s != NONE).then_some(s)
    }

    /// Unital positions on a secant, sorted.
    pub fn block(&self, s: SecantId) -> &[u32] {
        &self.blocks[s as usize]
    }

    /// Exterior points on a secant, sorted.
    pub fn exterior_on(&self, s: SecantId) -> &[PointId] {
        &self.exterior_on[s as usize]
    }

    /// Secants through the unital point with the given unital position.
    pub fn secants_at(&self, unital_pos: u32) -> &[SecantId] {
        &self.secants_at[unital_pos as usize]
    }

    /// Secant ids through an arbitrary point.
    pub fn secants_through(&self, point: PointId) -> Vec<SecantId> {
        self.lines_through(point).iter().filter_map(|&l| self.secant_of_line(l)).collect()
    }

    /// Whether two secants have disjoint blocks. A secant is never disjoint from itself.
    pub fn disjoint(&self, a: SecantId, b: SecantId) -> bool {
        self.disjoint[a as usize].contains(b as usize)
    }

    /// Row of the disjointness table for `s`.
    pub fn disjoint_row(&self, s: SecantId) -> &FixedBitSet {
        &self.disjoint[s as usize]
    }

    pub fn format_triple(&self, id: PointId) -> String {
        TripleDisplay(self.coords(id)).to_string()
    }

    /// Parses `(a,b,c)` with exponent-or-`*` tokens and returns the id.
    pub fn parse_triple(&self, token: &str) -> Result<PointId, GeometryError> {
        let t = token.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| GeometryError::BadTriple(token.to_string()))?;
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 3 {
            return Err(GeometryError::BadTriple(token.to_string()));
        }
        let mut triple = [FieldElement::ZERO; 3];
        for (slot, part) in triple.iter_mut().zip(parts) {
            *slot = self.field.parse_element(part)?;
        }
        self.id_of(&triple).ok_or(GeometryError::ZeroTriple)
    }
}
