//! PΓU(3,q) acting on secant ids.
//!
//! The group is generated by unitary semilinear maps and stored as a
//! stabilizer chain whose first base point is the secant `[1,0,0]`. Setwise
//! stabilizers and transporters use a two-point frame: every ordered pair of
//! distinct secants can be moved to one of a few fixed pairs `(β, r_o)`, so a
//! group element is pinned down by the images of two set members plus an
//! element of the small pointwise stabilizer of `(β, r_o)`.

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::{FieldElement, FieldTable};
use crate::geometry::{SecantId, Triple, UnitalGeometry};
use crate::perm::{orbits_on, Perm, StabChain};

const NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("generated group has order {got}, expected {expected}")]
    WrongOrder { expected: u128, got: u128 },
    #[error("map does not preserve the unital")]
    NotAutomorphism,
    #[error("domain is not invariant under the group")]
    NotInvariant,
    #[error("sets have different sizes ({0} and {1})")]
    SizeMismatch(usize, usize),
}

/// `x ↦ M · σ^k(x)` where σ is the Frobenius map `a ↦ a^p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemilinearMap {
    pub matrix: [[FieldElement; 3]; 3],
    pub frobenius: u32,
}

impl SemilinearMap {
    pub fn identity() -> Self {
        let (o, z) = (FieldElement::ONE, FieldElement::ZERO);
        SemilinearMap { matrix: [[o, z, z], [z, o, z], [z, z, o]], frobenius: 0 }
    }

    pub fn linear(matrix: [[FieldElement; 3]; 3]) -> Self {
        SemilinearMap { matrix, frobenius: 0 }
    }

    pub fn apply_triple(&self, field: &FieldTable, t: &Triple) -> Triple {
        let x = t.map(|a| field.frobenius(a, self.frobenius));
        let mut out = [FieldElement::ZERO; 3];
        for (i, row) in self.matrix.iter().enumerate() {
            for j in 0..3 {
                out[i] = field.add(out[i], field.mul(row[j], x[j]));
            }
        }
        out
    }

    /// Whether `M*·M` is a nonzero scalar of GF(q).
    pub fn is_unitary(&self, field: &FieldTable) -> bool {
        let m = &self.matrix;
        let mut lambda = None;
        for i in 0..3 {
            for j in 0..3 {
                let mut s = FieldElement::ZERO;
                for row in m {
                    s = field.add(s, field.mul(field.conj(row[i]), row[j]));
                }
                if i != j && !s.is_zero() {
                    return false;
                }
                if i == j {
                    match lambda {
                        None => lambda = Some(s),
                        Some(l) if l != s => return false,
                        _ => {}
                    }
                }
            }
        }
        lambda.is_some_and(|l| !l.is_zero() && field.in_subfield(l))
    }

    /// The induced permutation of secant ids.
    pub fn secant_perm(&self, geom: &UnitalGeometry) -> Result<Perm, GroupError> {
        let field = geom.field();
        let unital = geom.unital();
        let image_of = |pos: u32| -> Result<u32, GroupError> {
            let t = self.apply_triple(field, geom.coords(unital[pos as usize]));
            let id = geom.id_of(&t).ok_or(GroupError::NotAutomorphism)?;
            geom.unital_position(id).ok_or(GroupError::NotAutomorphism)
        };
        let mut images = Vec::with_capacity(geom.num_secants());
        for s in 0..geom.num_secants() as SecantId {
            let b = geom.block(s);
            let (p0, p1) = (image_of(b[0])?, image_of(b[1])?);
            let line = geom.join(unital[p0 as usize], unital[p1 as usize]);
            images.push(geom.secant_of_line(line).ok_or(GroupError::NotAutomorphism)?);
        }
        Ok(Perm::from_images(images))
    }
}

/// A group of secant permutations given by generators and its exact order.
#[derive(Debug, Clone)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Perm>,
    order: u128,
}

impl PermGroup {
    pub fn new(degree: usize, generators: Vec<Perm>) -> Self {
        let order = StabChain::from_generators(degree, &generators, &[]).order();
        PermGroup { degree, generators, order }
    }

    fn with_order(degree: usize, generators: Vec<Perm>, order: u128) -> Self {
        PermGroup { degree, generators, order }
    }

    pub fn trivial(degree: usize) -> Self {
        PermGroup { degree, generators: Vec::new(), order: 1 }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn order(&self) -> u128 {
        self.order
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn chain(&self) -> StabChain {
        StabChain::from_generators(self.degree, &self.generators, &[])
    }

    /// Orbits on `domain`, each sorted, ordered by smallest member.
    pub fn orbits(&self, domain: &[u32]) -> Result<Vec<Vec<u32>>, GroupError> {
        orbits_on(&self.generators, self.degree, domain).ok_or(GroupError::NotInvariant)
    }

    /// Whether every generator fixes every point of `domain`.
    pub fn acts_trivially_on(&self, domain: &[u32]) -> bool {
        self.generators.iter().all(|g| domain.iter().all(|&x| g.apply(x) == x))
    }
}

/// Sorted image of a set.
pub fn apply_set(g: &Perm, set: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = set.iter().map(|&x| g.apply(x)).collect();
    out.sort_unstable();
    out
}

/// Data for one `G_β`-orbit `O` on the secants other than `β`; its
/// representative is the first base point of `chain`.
#[derive(Debug, Clone)]
struct PairFrame {
    /// Chain for `G_β` with first base point `rep`; level 0 maps `O` to `rep`.
    chain: StabChain,
    /// All elements of the stabilizer of `β` and `rep`.
    kernel: Vec<Perm>,
}

/// One solution found by the frame search: `t_b⁻¹ ∘ k ∘ t_a`.
struct Hit<'a> {
    b1: u32,
    b2: u32,
    t_a: &'a Perm,
    t_b: Perm,
    k: &'a Perm,
}

impl Hit<'_> {
    fn perm(&self) -> Perm {
        self.t_b.inverse().compose(&self.k.compose(self.t_a))
    }
}

/// The full automorphism group of the unital acting on secants.
#[derive(Debug, Clone)]
pub struct UnitaryGroup {
    degree: usize,
    maps: Vec<SemilinearMap>,
    chain: StabChain,
    anchor: u32,
    frames: Vec<PairFrame>,
    frame_of: Vec<u32>,
}

/// 2e · q³(q³+1)(q²−1).
pub fn expected_order(q: u32, e: u32) -> u128 {
    let q = q as u128;
    2 * e as u128 * q.pow(3) * (q.pow(3) + 1) * (q * q - 1)
}

fn random_unitary<R: Rng>(field: &FieldTable, rng: &mut R) -> [[FieldElement; 3]; 3] {
    let n = field.size() as usize;
    let inner = |u: &[FieldElement; 3], v: &[FieldElement; 3]| {
        (0..3).fold(FieldElement::ZERO, |s, i| field.add(s, field.mul(u[i], field.conj(v[i]))))
    };
    let mut basis: Vec<[FieldElement; 3]> = Vec::new();
    while basis.len() < 3 {
        let mut x = [0; 3].map(|_| field.element_from_index(rng.gen_range(0..n)));
        for b in &basis {
            let c = inner(&x, b);
            for i in 0..3 {
                x[i] = field.sub(x[i], field.mul(c, b[i]));
            }
        }
        let h = inner(&x, &x);
        let Some(k) = h.log() else { continue };
        // ⟨cx,cx⟩ = N(c)·h and N(w^j) = w^{j(q+1)}, so this scales h to 1.
        let c = field.exp(-((k / (field.q() + 1)) as i64));
        basis.push(x.map(|a| field.mul(c, a)));
    }
    let mut m = [[FieldElement::ZERO; 3]; 3];
    for (j, col) in basis.iter().enumerate() {
        for i in 0..3 {
            m[i][j] = col[i];
        }
    }
    m
}

impl UnitaryGroup {
    pub fn build(geom: &UnitalGeometry) -> Result<Self, GroupError> {
        let field = geom.field();
        let degree = geom.num_secants();
        let expected = expected_order(field.q(), field.e());
        let (o, z) = (FieldElement::ONE, FieldElement::ZERO);
        let mut maps = vec![
            SemilinearMap::linear([[z, o, z], [o, z, z], [z, z, o]]),
            SemilinearMap::linear([[z, z, o], [o, z, z], [z, o, z]]),
            SemilinearMap::linear([[field.exp(field.q() as i64 - 1), z, z], [z, o, z], [z, z, o]]),
            SemilinearMap { frobenius: 1, ..SemilinearMap::identity() },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(0x0005_eed0);
        let anchor = geom.secant_of_line(geom.id_of(&[o, z, z]).expect("point")).expect("[1,0,0] is a secant");
        let mut chain = StabChain::trivial(degree, &[anchor]);
        let mut i = 0;
        while chain.order() != expected {
            if i >= maps.len() {
                if maps.len() > 40 {
                    return Err(GroupError::WrongOrder { expected, got: chain.order() });
                }
                maps.push(SemilinearMap::linear(random_unitary(field, &mut rng)));
            }
            debug_assert!(maps[i].is_unitary(field));
            chain.extend(&maps[i].secant_perm(geom)?);
            i += 1;
        }
        maps.truncate(i);
        if chain.basic_orbit(0).len() != degree {
            return Err(GroupError::NotInvariant);
        }

        let stab_gens = chain.stabilizer_generators(1).to_vec();
        let rest: Vec<u32> = (0..degree as u32).filter(|&x| x != anchor).collect();
        let orbits = orbits_on(&stab_gens, degree, &rest).expect("invariant");
        let stab_order = expected / degree as u128;
        let mut frame_of = vec![NONE; degree];
        let mut frames = Vec::with_capacity(orbits.len());
        for orbit in &orbits {
            let rep = orbit[0];
            let fchain = StabChain::from_generators(degree, &stab_gens, &[rep, anchor]);
            assert_eq!(fchain.order(), stab_order);
            let kernel = fchain.elements_from(1);
            for &x in orbit {
                frame_of[x as usize] = frames.len() as u32;
            }
            frames.push(PairFrame { chain: fchain, kernel });
        }
        Ok(UnitaryGroup { degree, maps, chain, anchor, frames, frame_of })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> u128 {
        self.chain.order()
    }

    /// The secant `[1,0,0]`, first base point of the chain.
    pub fn anchor(&self) -> u32 {
        self.anchor
    }

    /// The semilinear maps whose secant actions generate the group.
    pub fn maps(&self) -> &[SemilinearMap] {
        &self.maps
    }

    pub fn generators(&self) -> &[Perm] {
        self.chain.generators()
    }

    pub fn chain(&self) -> &StabChain {
        &self.chain
    }

    pub fn as_perm_group(&self) -> PermGroup {
        PermGroup::with_order(self.degree, self.generators().to_vec(), self.order())
    }

    pub fn contains(&self, g: &Perm) -> bool {
        self.chain.contains(g)
    }

    pub fn random_element<R: Rng>(&self, rng: &mut R) -> Perm {
        self.chain.random_element(rng)
    }

    pub fn for_each_element(&self, f: impl FnMut(&Perm)) {
        self.chain.for_each_element(f)
    }

    /// Sizes of the orbits of the stabilizer of `[1,0,0]` on the other secants.
    pub fn anchor_suborbit_sizes(&self) -> Vec<usize> {
        self.frames.iter().map(|f| f.chain.basic_orbit(0).len()).collect()
    }

    /// Element mapping `x` to the anchor secant.
    fn to_anchor(&self, x: u32) -> &Perm {
        self.chain.coset_rep_to_base(0, x).expect("transitive")
    }

    /// Frame index and element of `G_anchor` mapping `y != anchor` to the frame representative.
    fn to_frame(&self, y: u32) -> (usize, &Perm) {
        let o = self.frame_of[y as usize] as usize;
        (o, self.frames[o].chain.coset_rep_to_base(0, y).expect("orbit"))
    }

    fn pair_frame(&self, x1: u32, x2: u32) -> usize {
        self.frame_of[self.to_anchor(x1).apply(x2) as usize] as usize
    }

    fn pair_counts(&self, set: &[u32]) -> Vec<u64> {
        let mut counts = vec![0u64; self.frames.len()];
        for &x in set {
            let t = self.to_anchor(x);
            for &y in set {
                if y != x {
                    counts[self.frame_of[t.apply(y) as usize] as usize] += 1;
                }
            }
        }
        counts
    }

    /// Enumerates elements mapping `a` onto `b` (both of size ≥ 2) until `visit` returns false.
    fn frame_search(&self, a: &[u32], b: &[u32], mut visit: impl FnMut(&Hit) -> bool) {
        let ca = self.pair_counts(a);
        let cb = self.pair_counts(b);
        if ca != cb {
            return;
        }
        let o = (0..self.frames.len())
            .filter(|&o| ca[o] > 0)
            .min_by_key(|&o| (ca[o] * self.frames[o].kernel.len() as u64, o))
            .expect("at least one pair");
        let (s1, s2) = a
            .iter()
            .flat_map(|&x| a.iter().map(move |&y| (x, y)))
            .find(|&(x, y)| x != y && self.pair_frame(x, y) == o)
            .expect("pair in frame");
        let t1 = self.to_anchor(s1);
        let t_a = self.to_frame(t1.apply(s2)).1.compose(t1);
        let a_img: Vec<u32> = a.iter().map(|&x| t_a.apply(x)).collect();
        let kernel = &self.frames[o].kernel;
        let mut b_img = FixedBitSet::with_capacity(self.degree);
        for &b1 in b {
            let t1b = self.to_anchor(b1);
            for &b2 in b {
                if b2 == b1 {
                    continue;
                }
                let y = t1b.apply(b2);
                if self.frame_of[y as usize] as usize != o {
                    continue;
                }
                let t2b = self.to_frame(y).1;
                b_img.clear();
                for &x in b {
                    b_img.insert(t2b.apply(t1b.apply(x)) as usize);
                }
                let mut t_b = None;
                for k in kernel {
                    if a_img.iter().all(|&x| b_img.contains(k.apply(x) as usize)) {
                        let t_b = t_b.get_or_insert_with(|| t2b.compose(t1b)).clone();
                        if !visit(&Hit { b1, b2, t_a: &t_a, t_b, k }) {
                            return;
                        }
                    }
                }
            }
        }
    }

    fn complement(&self, set: &[u32]) -> Vec<u32> {
        let mut mark = vec![false; self.degree];
        for &x in set {
            mark[x as usize] = true;
        }
        (0..self.degree as u32).filter(|&x| !mark[x as usize]).collect()
    }

    fn normalize(&self, set: &[u32]) -> Vec<u32> {
        let mut s = set.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() * 2 > self.degree {
            self.complement(&s)
        } else {
            s
        }
    }

    /// The subgroup mapping `set` onto itself.
    pub fn setwise_stabilizer(&self, set: &[u32]) -> PermGroup {
        let a = self.normalize(set);
        match a.len() {
            0 => self.as_perm_group(),
            1 => {
                let t = self.to_anchor(a[0]);
                let ti = t.inverse();
                let gens = self.chain.stabilizer_generators(1).iter().map(|h| ti.compose(&h.compose(t))).collect();
                PermGroup::with_order(self.degree, gens, self.order() / self.degree as u128)
            }
            _ => {
                let mut hits: Vec<(u32, u32, Perm)> = Vec::new();
                let mut count: u128 = 0;
                let mut seen_pairs = std::collections::HashSet::new();
                let mut first = None;
                self.frame_search(&a, &a, |h| {
                    count += 1;
                    let key = (h.b1, h.b2);
                    let base_pair = *first.get_or_insert(key) == key;
                    if base_pair || seen_pairs.insert(key) {
                        hits.push((h.b1, h.b2, h.perm()));
                    }
                    true
                });
                self.group_from_elements(hits.into_iter().map(|(_, _, g)| g), count)
            }
        }
    }

    /// Generators drawn from `elements` until they generate a group of order `order`.
    fn group_from_elements(&self, elements: impl IntoIterator<Item = Perm>, order: u128) -> PermGroup {
        let mut chain = StabChain::trivial(self.degree, &[]);
        let mut gens = Vec::new();
        for g in elements {
            if chain.order() == order {
                break;
            }
            if chain.extend(&g) {
                gens.push(g);
            }
        }
        assert_eq!(chain.order(), order, "elements do not generate the group");
        PermGroup::with_order(self.degree, gens, order)
    }

    /// Some element mapping `a` onto `b`, or `None` if no element does.
    pub fn transporter(&self, a: &[u32], b: &[u32]) -> Result<Option<Perm>, GroupError> {
        let (mut sa, mut sb) = (a.to_vec(), b.to_vec());
        sa.sort_unstable();
        sa.dedup();
        sb.sort_unstable();
        sb.dedup();
        if sa.len() != sb.len() {
            return Err(GroupError::SizeMismatch(sa.len(), sb.len()));
        }
        let (na, nb) = (self.normalize(&sa), self.normalize(&sb));
        Ok(match na.len() {
            0 => Some(Perm::identity(self.degree)),
            1 => Some(self.to_anchor(nb[0]).inverse().compose(self.to_anchor(na[0]))),
            _ => {
                let mut found = None;
                self.frame_search(&na, &nb, |h| {
                    found = Some(h.perm());
                    false
                });
                found
            }
        })
    }

    /// The centralizer of `x` in the group.
    pub fn centralizer(&self, x: &Perm) -> PermGroup {
        let Some(s1) = x.first_moved() else {
            return self.as_perm_group();
        };
        let s2 = x.apply(s1);
        let t1 = self.to_anchor(s1);
        let (o, t2) = self.to_frame(t1.apply(s2));
        let t_a = t2.compose(t1);
        let kernel = &self.frames[o].kernel;
        let mut elements = Vec::new();
        for b1 in 0..self.degree as u32 {
            let t1b = self.to_anchor(b1);
            let y = t1b.apply(x.apply(b1));
            if self.frame_of[y as usize] as usize != o {
                continue;
            }
            let tb_inv = self.to_frame(y).1.compose(t1b).inverse();
            for k in kernel {
                let g = |p: u32| tb_inv.apply(k.apply(t_a.apply(p)));
                if (0..self.degree as u32).all(|p| g(x.apply(p)) == x.apply(g(p))) {
                    elements.push(tb_inv.compose(&k.compose(&t_a)));
                }
            }
        }
        let order = elements.len() as u128;
        self.group_from_elements(elements, order)
    }

    /// Stabilizer order by running over every group element. Oracle for small q.
    pub fn brute_force_stabilizer_order(&self, set: &[u32]) -> u128 {
        let mut target = vec![false; self.degree];
        for &x in set {
            target[x as usize] = true;
        }
        let mut count = 0;
        self.for_each_element(|g| {
            if set.iter().all(|&x| target[g.apply(x) as usize]) {
                count += 1;
            }
        });
        count
    }

    /// Transporter by running over every group element. Oracle for small q.
    pub fn brute_force_transporter(&self, a: &[u32], b: &[u32]) -> Option<Perm> {
        let mut target = vec![false; self.degree];
        for &x in b {
            target[x as usize] = true;
        }
        let mut found = None;
        self.for_each_element(|g| {
            if found.is_none() && a.len() == b.len() && a.iter().all(|&x| target[g.apply(x) as usize]) {
                found = Some(g.clone());
            }
        });
        found
    }
}
