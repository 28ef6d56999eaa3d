use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unital_core::classify::{stabilizer_invariants, type_vector};
use unital_core::constructions::{andre_spread, regular_spread, RulingChoice, Spread};
use unital_core::perm::StabChain;
use unital_core::{FieldElement, FieldSpec, FieldTable, Perm, UnitalGeometry, UnitaryGroup};

struct World {
    geom: UnitalGeometry,
    group: UnitaryGroup,
}

fn world(q: u32) -> &'static World {
    static W4: OnceLock<World> = OnceLock::new();
    static W5: OnceLock<World> = OnceLock::new();
    static W7: OnceLock<World> = OnceLock::new();
    let cell = match q {
        4 => &W4,
        5 => &W5,
        7 => &W7,
        _ => unreachable!(),
    };
    cell.get_or_init(|| {
        let geom = UnitalGeometry::build(FieldTable::build(FieldSpec::preset(q).unwrap()).unwrap());
        let group = UnitaryGroup::build(&geom).unwrap();
        World { geom, group }
    })
}

fn field(q: u32) -> &'static FieldTable {
    world(q).geom.field()
}

fn q_and_elems(n: usize) -> impl Strategy<Value = (u32, Vec<usize>)> {
    prop_oneof![Just(4u32), Just(5u32), Just(7u32)]
        .prop_flat_map(move |q| (Just(q), proptest::collection::vec(0..(q * q) as usize, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn field_ring_axioms((q, idx) in q_and_elems(3)) {
        let f = field(q);
        let [a, b, c] = [0, 1, 2].map(|i| f.element_from_index(idx[i]));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), FieldElement::ZERO);
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
        }
    }

    #[test]
    fn conjugation_is_an_involutive_automorphism((q, idx) in q_and_elems(2)) {
        let f = field(q);
        let [a, b] = [0, 1].map(|i| f.element_from_index(idx[i]));
        prop_assert_eq!(f.conj(f.conj(a)), a);
        prop_assert_eq!(f.conj(f.add(a, b)), f.add(f.conj(a), f.conj(b)));
        prop_assert_eq!(f.conj(f.mul(a, b)), f.mul(f.conj(a), f.conj(b)));
        prop_assert!(f.in_subfield(f.norm(a)));
        prop_assert_eq!(f.norm(a), f.mul(a, f.conj(a)));
    }

    #[test]
    fn perm_inverse_and_composition(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a: Vec<u32> = (0..n as u32).collect();
        let mut b = a.clone();
        use rand::seq::SliceRandom;
        a.shuffle(&mut rng);
        b.shuffle(&mut rng);
        let (a, b) = (Perm::from_images(a), Perm::from_images(b));
        prop_assert!(a.compose(&a.inverse()).is_identity());
        let ab = a.compose(&b);
        for x in 0..n as u32 {
            prop_assert_eq!(ab.apply(x), a.apply(b.apply(x)));
        }
        prop_assert!(a.pow(a.order()).is_identity());
        let cycle_total: usize = a.cycles().iter().map(|c| c.len()).sum();
        prop_assert!(cycle_total <= n);
    }

    #[test]
    fn chain_membership_closed_under_products(seed in any::<u64>(), q in prop_oneof![Just(4u32), Just(5u32)]) {
        let w = world(q);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = w.group.random_element(&mut rng);
        let h = w.group.random_element(&mut rng);
        prop_assert!(w.group.contains(&g.compose(&h)));
        prop_assert!(w.group.contains(&g.inverse()));
        let chain = StabChain::from_generators(w.group.degree(), &[g.clone(), h.clone()], &[]);
        prop_assert!(chain.contains(&h.compose(&g)));
        prop_assert_eq!(w.group.order() % chain.order(), 0);
    }

    #[test]
    fn images_of_spreads_are_spreads_with_equal_invariants(seed in any::<u64>(), q in prop_oneof![Just(4u32), Just(5u32)], pick in any::<prop::sample::Index>()) {
        let w = world(q);
        let choices = RulingChoice::all(w.geom.field());
        let s = andre_spread(&w.geom, pick.get(&choices)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = w.group.random_element(&mut rng);
        let t = s.image(&g);
        prop_assert!(Spread::new(&w.geom, t.lines().to_vec()).is_ok());
        prop_assert_eq!(type_vector(&w.geom, &s), type_vector(&w.geom, &t));
        let (inv_s, _) = stabilizer_invariants(&w.geom, &s, &w.group);
        let (inv_t, _) = stabilizer_invariants(&w.geom, &t, &w.group);
        prop_assert_eq!(&inv_s, &inv_t);
        let back = w.group.transporter(s.lines(), t.lines()).unwrap().expect("transporter exists");
        prop_assert_eq!(s.image(&back), t);
    }

    #[test]
    fn regular_spreads_at_every_exterior_point_are_regular(q in prop_oneof![Just(4u32), Just(5u32), Just(7u32)], pick in any::<prop::sample::Index>()) {
        let w = world(q);
        let ext: Vec<_> = w.geom.exterior_points().collect();
        let p = *pick.get(&ext);
        let s = regular_spread(&w.geom, p).unwrap();
        let tv = type_vector(&w.geom, &s);
        let top = (q * q - q) as u64;
        prop_assert!(tv.contains(&(top, 1)));
        prop_assert_eq!(unital_core::classify::regular_center(&w.geom, &s), Some(p));
    }
}
