//! Published spreads for q = 4 and q = 5, rebuilt from their delta lists
//! and re-measured.

use unital_cli::records::{delta_decode, format_histogram, split_tokens};
use unital_cli::{cmd_search, setup, RunConfig};
use unital_core::{Classifier, FieldSpec, Kind};

struct Row {
    delta: &'static str,
    order: u128,
    orbit: &'static str,
    type_vector: &'static str,
    kind: Kind,
}

const Q4: &[Row] = &[
    Row {
        delta: "(0,1,0), (0,13,12), (0,13,*), (0,1,*), (0,0,3), (0,6,8), (0,3,14), (0,2,8), (0,12,6), (0,9,9), (0,2,14)",
        order: 156,
        orbit: "(13,1)",
        type_vector: "(0,130), (2,78)",
        kind: Kind::Cyclic,
    },
    Row {
        delta: "(0,12,10), (0,6,4), (0,3,1), (0,0,13), (0,9,7)",
        order: 100,
        orbit: "(1,1), (2,1), (10,1)",
        type_vector: "(0,100), (1,70), (2,36), (7,2)",
        kind: Kind::Andre,
    },
    Row { delta: "", order: 1200, orbit: "(1,1), (12,1)", type_vector: "(0,75), (1,120), (2,12), (12,1)", kind: Kind::Regular },
];

const Q5: &[Row] = &[
    Row { delta: "", order: 1440, orbit: "(1,1), (20,1)", type_vector: "(0,144), (1,360), (2,20), (20,1)", kind: Kind::Regular },
    Row {
        delta: "(0,4,0), (0,20,16), (0,12,8), (0,16,12), (0,8,4), (0,0,20)",
        order: 72,
        orbit: "(1,3), (6,3)",
        type_vector: "(0,216), (1,216), (2,91), (8,1), (14,1)",
        kind: Kind::Andre,
    },
    Row {
        delta: "(0,10,18), (0,2,10), (0,14,22), (0,6,14), (0,22,6), (0,18,2)",
        order: 72,
        orbit: "(1,3), (6,3)",
        type_vector: "(0,216), (1,216), (2,91), (8,1), (14,1)",
        kind: Kind::Andre,
    },
    Row {
        delta: "(0,18,5), (0,2,13), (0,14,1), (0,10,21), (0,6,17), (0,22,9)",
        order: 72,
        orbit: "(1,3), (6,3)",
        type_vector: "(0,216), (1,216), (2,91), (8,1), (14,1)",
        kind: Kind::Andre,
    },
    Row {
        delta: "(0,15,*), (0,3,*), (0,*,17), (0,*,1), (0,23,*), (0,*,21), (0,*,5), (0,*,13), (0,19,*), (0,*,9), (0,7,*), (0,11,*)",
        order: 216,
        orbit: "(3,1), (18,1)",
        type_vector: "(0,252), (1,144), (2,126), (8,3)",
        kind: Kind::Andre,
    },
    Row {
        delta: "(0,16,1), (0,16,5), (0,8,17), (0,20,9), (0,12,1), (0,0,13), (0,20,5), (0,0,9), (0,4,17), (0,4,13), (0,8,21), (0,12,21)",
        order: 24,
        orbit: "(1,1), (2,2), (4,1), (12,1)",
        type_vector: "(0,240), (1,190), (2,68), (3,24), (7,2), (8,1)",
        kind: Kind::Unknown,
    },
    Row {
        delta: "(0,5,10), (0,1,6), (0,6,17), (0,17,22), (0,10,21), (0,2,13), (0,21,2), (0,22,9), (0,14,1), (0,9,14), (0,18,5), (0,13,18)",
        order: 432,
        orbit: "(3,1), (18,1)",
        type_vector: "(0,216), (1,252), (2,18), (3,36), (8,3)",
        kind: Kind::Andre,
    },
    Row {
        delta: "(0,5,12), (0,13,14), (0,17,0), (0,17,18), (0,1,2), (0,21,4), (0,9,16), (0,9,10), (0,1,8), (0,21,22), (0,13,20), (0,5,6)",
        order: 144,
        orbit: "(1,1), (2,1), (6,1), (12,1)",
        type_vector: "(0,216), (1,252), (2,18), (3,36), (8,3)",
        kind: Kind::Andre,
    },
    Row {
        delta: "(0,23,3), (0,19,11), (0,10,11), (0,3,19), (0,*,21), (0,18,19), (0,22,11), (0,*,13), (0,*,5), (0,2,3), (0,14,3), (0,7,11), (0,6,19), (0,15,19), (0,11,3)",
        order: 432,
        orbit: "(9,1), (12,1)",
        type_vector: "(0,216), (1,252), (2,36), (4,9), (5,12)",
        kind: Kind::Unknown,
    },
    Row {
        delta: "(0,17,4), (0,15,3), (0,16,5), (0,*,4), (0,15,15), (0,17,16), (0,16,*), (0,4,*), (0,5,4), (0,3,3), (0,4,5), (0,3,15), (0,4,17), (0,*,16), (0,5,16), (0,16,17)",
        order: 336,
        orbit: "(21,1)",
        type_vector: "(0,224), (1,252), (3,28), (4,21)",
        kind: Kind::Unknown,
    },
];

fn check_table(spec: FieldSpec, rows: &[Row]) {
    let q = spec.q() as u32;
    let census = cmd_search(&RunConfig::new(spec.clone())).unwrap();
    let (geom, group) = setup(&spec).unwrap();
    let classifier = Classifier::new(&geom, &group);
    let mut reps = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let delta: Vec<u32> = split_tokens(row.delta)
            .unwrap()
            .into_iter()
            .map(|t| {
                let id = geom.parse_triple(t).unwrap();
                geom.secant_of_line(id).unwrap_or_else(|| panic!("row {}: {t} is not a secant", i + 1))
            })
            .collect();
        let spread = delta_decode(&geom, &delta).unwrap_or_else(|e| panic!("row {}: {e}", i + 1));
        let c = classifier.classify(&spread);
        assert_eq!(c.invariants.stabilizer_order, row.order, "row {} |G|", i + 1);
        assert_eq!(format_histogram(&c.invariants.orbit_structure), row.orbit, "row {} orbit", i + 1);
        assert_eq!(format_histogram(&c.invariants.type_vector), row.type_vector, "row {} type", i + 1);
        assert_eq!(c.kind, row.kind, "row {} kind", i + 1);
        c.invariants.check_identities(geom.q()).unwrap();
        let matches = census
            .records
            .iter()
            .filter(|r| group.transporter(r.lines.as_slice(), spread.lines()).unwrap().is_some())
            .count();
        assert_eq!(matches, 1, "row {} equivalent to {matches} census classes (q = {q})", i + 1);
        reps.push(spread);
    }
    // rows sharing all invariants must still be inequivalent
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            assert!(group.transporter(reps[i].lines(), reps[j].lines()).unwrap().is_none(), "rows {} and {} equivalent", i + 1, j + 1);
        }
    }
}

#[test]
fn published_q4_spreads_rebuild_with_their_invariants() {
    check_table(FieldSpec::q4(), Q4);
}

#[test]
fn published_q5_spreads_rebuild_with_their_invariants() {
    check_table(FieldSpec::q5(), Q5);
}
