//! Permutations on `0..n` and stabilizer chains (base and strong generating
//! set) built with the deterministic Schreier–Sims algorithm.
//!
//! Permutations act on the left: `p.apply(x) == p[x]`, and
//! `a.compose(&b)` is the map `x ↦ a(b(x))`.

use std::fmt;

use rand::Rng;

const NONE: u32 = u32::MAX;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<u32>);

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "Perm(id; {})", self.degree());
        }
        write!(f, "Perm(")?;
        for c in self.cycles() {
            let parts: Vec<String> = c.iter().map(u32::to_string).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        write!(f, ")")
    }
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n as u32).collect())
    }

    /// Builds a permutation from its image list. Panics if it is not a bijection.
    pub fn from_images(images: Vec<u32>) -> Self {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            assert!((x as usize) < images.len() && !seen[x as usize], "not a permutation");
            seen[x as usize] = true;
        }
        Perm(images)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.0[x as usize]
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&x| self.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    pub fn pow(&self, mut k: u64) -> Perm {
        let mut result = Perm::identity(self.degree());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.compose(&base);
            }
            base = base.compose(&base);
            k >>= 1;
        }
        result
    }

    /// Nontrivial cycles, each starting at its smallest point, ordered by that point.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] || self.0[start] == start as u32 {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start as u32;
            while !seen[x as usize] {
                seen[x as usize] = true;
                cycle.push(x);
                x = self.0[x as usize];
            }
            out.push(cycle);
        }
        out
    }

    /// Order of the permutation (lcm of cycle lengths).
    pub fn order(&self) -> u64 {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.cycles().iter().fold(1u64, |acc, c| {
            let l = c.len() as u64;
            acc / gcd(acc, l) * l
        })
    }

    /// First point moved, if any.
    pub fn first_moved(&self) -> Option<u32> {
        self.0.iter().enumerate().find(|&(i, &x)| i as u32 != x).map(|(i, _)| i as u32)
    }
}

/// One level of a stabilizer chain: the group `G^(i)` fixing the earlier base
/// points, its strong generators, and the orbit of the base point with
/// coset representatives stored as maps *to* the base point.
#[derive(Debug, Clone)]
struct Level {
    base: u32,
    gens: Vec<Perm>,
    gen_invs: Vec<Perm>,
    orbit: Vec<u32>,
    /// Point to index into `to_base`, or `NONE`.
    rep_index: Vec<u32>,
    /// `to_base[k]` maps `orbit[k]` to `base`.
    to_base: Vec<Perm>,
    /// Orbit points `< closed_points` have been expanded by gens `< closed_gens`.
    closed_points: usize,
    closed_gens: usize,
    /// Number of generators whose Schreier generators have been tested, per orbit point.
    tested: Vec<usize>,
}

impl Level {
    fn new(base: u32, degree: usize) -> Self {
        let mut rep_index = vec![NONE; degree];
        rep_index[base as usize] = 0;
        Level {
            base,
            gens: Vec::new(),
            gen_invs: Vec::new(),
            orbit: vec![base],
            rep_index,
            to_base: vec![Perm::identity(degree)],
            closed_points: 0,
            closed_gens: 0,
            tested: vec![0],
        }
    }

    fn add_gen(&mut self, g: Perm) {
        self.gen_invs.push(g.inverse());
        self.gens.push(g);
        self.close_orbit();
    }

    fn close_orbit(&mut self) {
        // Old points only need the new generators; new points need all of them.
        let old_points = self.closed_points;
        let old_gens = self.closed_gens;
        let mut k = 0;
        while k < self.orbit.len() {
            let x = self.orbit[k];
            let first_gen = if k < old_points { old_gens } else { 0 };
            for j in first_gen..self.gens.len() {
                let y = self.gens[j].apply(x);
                if self.rep_index[y as usize] == NONE {
                    // y -> x -> base
                    let rep = self.to_base[k].compose(&self.gen_invs[j]);
                    self.rep_index[y as usize] = self.to_base.len() as u32;
                    self.to_base.push(rep);
                    self.orbit.push(y);
                    self.tested.push(0);
                }
            }
            k += 1;
        }
        self.closed_points = self.orbit.len();
        self.closed_gens = self.gens.len();
    }

    #[inline]
    fn rep_to_base(&self, x: u32) -> Option<&Perm> {
        let k = self.rep_index[x as usize];
        (k != NONE).then(|| &self.to_base[k as usize])
    }
}

/// A base and strong generating set for a permutation group.
#[derive(Debug, Clone)]
pub struct StabChain {
    degree: usize,
    levels: Vec<Level>,
    /// Preferred base points, used in order whenever a new base point is needed.
    base_prefix: Vec<u32>,
}

impl StabChain {
    /// Chain of the trivial group; base points are drawn from `base_prefix` first.
    pub fn trivial(degree: usize, base_prefix: &[u32]) -> Self {
        StabChain { degree, levels: Vec::new(), base_prefix: base_prefix.to_vec() }
    }

    /// Runs Schreier–Sims on the group generated by `gens`.
    pub fn from_generators(degree: usize, gens: &[Perm], base_prefix: &[u32]) -> Self {
        let mut chain = StabChain::trivial(degree, base_prefix);
        // Prefix points become base points even if some generator fixes them all.
        for &b in base_prefix {
            if chain.levels.iter().all(|l| l.base != b) {
                chain.levels.push(Level::new(b, degree));
            }
        }
        for g in gens {
            chain.extend(g);
        }
        chain
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.orbit.len() as u128).product()
    }

    /// Strong generators of the whole group.
    pub fn generators(&self) -> &[Perm] {
        self.levels.first().map_or(&[], |l| &l.gens)
    }

    /// Strong generators of the stabilizer of the first `level` base points.
    pub fn stabilizer_generators(&self, level: usize) -> &[Perm] {
        self.levels.get(level).map_or(&[], |l| &l.gens)
    }

    /// Orbit of the base point at `level` under the stabilizer of the earlier ones.
    pub fn basic_orbit(&self, level: usize) -> &[u32] {
        &self.levels[level].orbit
    }

    /// An element of the level's group mapping `x` to the level's base point.
    pub fn coset_rep_to_base(&self, level: usize, x: u32) -> Option<&Perm> {
        self.levels[level].rep_to_base(x)
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Sifts `g` from `start`; returns the residue and the level where sifting stopped.
    fn strip(&self, g: &Perm, start: usize) -> (Perm, usize) {
        let mut h = g.clone();
        for (i, level) in self.levels.iter().enumerate().skip(start) {
            let gamma = h.apply(level.base);
            match level.rep_to_base(gamma) {
                None => return (h, i),
                Some(rep) => h = rep.compose(&h),
            }
        }
        (h, self.levels.len())
    }

    pub fn contains(&self, g: &Perm) -> bool {
        assert_eq!(g.degree(), self.degree);
        let (h, j) = self.strip(g, 0);
        j == self.levels.len() && h.is_identity()
    }

    fn new_base_point(&self, h: &Perm) -> u32 {
        self.base_prefix
            .iter()
            .copied()
            .find(|&b| h.apply(b) != b && self.levels.iter().all(|l| l.base != b))
            .or_else(|| h.first_moved())
            .expect("nontrivial residue")
    }

    /// Adds `g` to the group. Returns whether the group grew.
    pub fn extend(&mut self, g: &Perm) -> bool {
        assert_eq!(g.degree(), self.degree);
        let (h, j) = self.strip(g, 0);
        if j == self.levels.len() && h.is_identity() {
            return false;
        }
        self.insert_strong_gen(h, 0, j);
        self.complete(j);
        true
    }

    /// Adds `h` as a strong generator at levels `from..=to`, creating a level if needed.
    fn insert_strong_gen(&mut self, h: Perm, from: usize, to: usize) {
        if to == self.levels.len() {
            let b = self.new_base_point(&h);
            self.levels.push(Level::new(b, self.degree));
        }
        for l in from..=to {
            self.levels[l].add_gen(h.clone());
        }
    }

    /// Tests Schreier generators from level `start` downwards until every level is closed.
    fn complete(&mut self, start: usize) {
        let mut i = start as isize;
        'outer: while i >= 0 {
            let lvl = i as usize;
            let mut k = 0;
            while k < self.levels[lvl].orbit.len() {
                let level = &self.levels[lvl];
                let ngens = level.gens.len();
                if level.tested[k] < ngens {
                    let x = level.orbit[k];
                    let from_base = level.to_base[k].inverse();
                    for j in level.tested[k]..ngens {
                        let level = &self.levels[lvl];
                        let s = &level.gens[j];
                        let sx = s.apply(x);
                        let schreier = level.rep_to_base(sx).expect("orbit closed").compose(&s.compose(&from_base));
                        self.levels[lvl].tested[k] = j + 1;
                        if schreier.is_identity() {
                            continue;
                        }
                        let (h, jj) = self.strip(&schreier, lvl + 1);
                        if jj < self.levels.len() || !h.is_identity() {
                            self.insert_strong_gen(h, lvl + 1, jj);
                            i = jj as isize;
                            continue 'outer;
                        }
                    }
                }
                k += 1;
            }
            i -= 1;
        }
    }

    /// A uniformly random element.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> Perm {
        let mut g = Perm::identity(self.degree);
        for level in &self.levels {
            let k = rng.gen_range(0..level.to_base.len());
            g = g.compose(&level.to_base[k].inverse());
        }
        g
    }

    /// Calls `f` on every element without storing them all.
    pub fn for_each_element(&self, mut f: impl FnMut(&Perm)) {
        fn walk(levels: &[Level], acc: &Perm, f: &mut dyn FnMut(&Perm)) {
            match levels.split_first() {
                None => f(acc),
                Some((l, rest)) => {
                    for rep in &l.to_base {
                        walk(rest, &rep.compose(acc), f);
                    }
                }
            }
        }
        walk(&self.levels, &Perm::identity(self.degree), &mut f);
    }

    /// Every element of the group. Only sensible for small groups.
    pub fn elements(&self) -> Vec<Perm> {
        self.elements_from(0)
    }

    /// Every element of the stabilizer of the first `level` base points.
    pub fn elements_from(&self, level: usize) -> Vec<Perm> {
        let mut acc = vec![Perm::identity(self.degree)];
        for l in &self.levels[level.min(self.levels.len())..] {
            let mut next = Vec::with_capacity(acc.len() * l.to_base.len());
            for g in &acc {
                for rep in &l.to_base {
                    next.push(rep.compose(g));
                }
            }
            acc = next;
        }
        acc
    }
}

/// Orbits of the group generated by `gens` on `domain`, each sorted, ordered
/// by smallest element. Returns `None` if the domain is not invariant.
pub fn orbits_on(gens: &[Perm], degree: usize, domain: &[u32]) -> Option<Vec<Vec<u32>>> {
    let mut in_domain = vec![false; degree];
    for &x in domain {
        in_domain[x as usize] = true;
    }
    let mut seen = vec![false; degree];
    let mut sorted: Vec<u32> = domain.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut out = Vec::new();
    for &start in &sorted {
        if seen[start as usize] {
            continue;
        }
        seen[start as usize] = true;
        let mut orbit = vec![start];
        let mut k = 0;
        while k < orbit.len() {
            let x = orbit[k];
            for g in gens {
                let y = g.apply(x);
                if !in_domain[y as usize] {
                    return None;
                }
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    orbit.push(y);
                }
            }
            k += 1;
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    Some(out)
}
