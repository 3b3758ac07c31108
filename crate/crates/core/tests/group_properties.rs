use proptest::prelude::*;
use rdmap::{Element, Group, DEFAULT_BALL_CAP};

fn groups() -> impl Strategy<Value = Group> {
    prop_oneof![
        (1u32..=3).prop_map(|k| Group::free(k).unwrap()),
        (1u32..=3).prop_map(|d| Group::free_abelian(d).unwrap()),
        (2u64..=12).prop_map(|m| Group::cyclic(m).unwrap()),
    ]
}

/// A random element built as a product of generators, so it goes through the
/// same normalization as user input.
fn element_of(g: Group) -> impl Strategy<Value = Element> {
    let gens = g.generators();
    prop::collection::vec(0..gens.len(), 0..10).prop_map(move |idx| {
        idx.iter().fold(g.identity(), |acc, &i| g.multiply(&acc, &gens[i]).unwrap())
    })
}

fn group_with_triple() -> impl Strategy<Value = (Group, Element, Element, Element)> {
    groups().prop_flat_map(|g| (Just(g), element_of(g), element_of(g), element_of(g)))
}

proptest! {
    #[test]
    fn group_axioms((g, x, y, z) in group_with_triple()) {
        let e = g.identity();
        let xy_z = g.multiply(&g.multiply(&x, &y).unwrap(), &z).unwrap();
        let x_yz = g.multiply(&x, &g.multiply(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(xy_z, x_yz);
        prop_assert_eq!(g.multiply(&x, &g.inverse(&x).unwrap()).unwrap(), e.clone());
        prop_assert_eq!(g.multiply(&e, &x).unwrap(), x.clone());
        prop_assert_eq!(g.multiply(&x, &e).unwrap(), x);
    }

    #[test]
    fn length_axioms((g, x, y, _z) in group_with_triple()) {
        let len = |a: &Element| g.word_length(a).unwrap();
        prop_assert_eq!(len(&g.identity()), 0);
        prop_assert_eq!(len(&x), len(&g.inverse(&x).unwrap()));
        prop_assert!(len(&g.multiply(&x, &y).unwrap()) <= len(&x) + len(&y));
    }

    #[test]
    fn free_words_parse_to_brute_force_reduction(raw in "[aAbB]{0,14}") {
        let g = Group::free(2).unwrap();
        let mut chars: Vec<char> = raw.chars().collect();
        while let Some(i) = chars.windows(2).position(|p| {
            p[0] != p[1] && p[0].eq_ignore_ascii_case(&p[1])
        }) {
            chars.drain(i..i + 2);
        }
        let reduced: String = chars.into_iter().collect();
        let parsed = g.parse_word(&raw).unwrap();
        prop_assert_eq!(g.element_json(&parsed), serde_json::Value::String(reduced));
    }
}

#[test]
fn balls_are_nested_prefixes_and_reproducible() {
    for g in [
        Group::free(2).unwrap(),
        Group::free_abelian(2).unwrap(),
        Group::cyclic(7).unwrap(),
    ] {
        let mut prev = g.ball(0, DEFAULT_BALL_CAP).unwrap();
        for n in 1..=5 {
            let ball = g.ball(n, DEFAULT_BALL_CAP).unwrap();
            assert_eq!(&ball[..prev.len()], &prev[..], "{g} n={n}");
            assert_eq!(ball, g.ball(n, DEFAULT_BALL_CAP).unwrap());
            // lengths nondecreasing, normal forms increasing within a length
            for p in ball.windows(2) {
                let (a, b) = (g.word_length(&p[0]).unwrap(), g.word_length(&p[1]).unwrap());
                assert!(a < b || (a == b && p[0] < p[1]));
            }
            prev = ball;
        }
    }
}

#[test]
fn ball_contains_exactly_the_short_elements() {
    // brute force: all products of at most n generators
    let g = Group::free(2).unwrap();
    let gens = g.generators();
    let mut reached = std::collections::BTreeSet::from([g.identity()]);
    let mut frontier = vec![g.identity()];
    for _ in 0..3 {
        let mut next = Vec::new();
        for x in &frontier {
            for s in &gens {
                let y = g.multiply(x, s).unwrap();
                if reached.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    let ball: std::collections::BTreeSet<_> = g.ball(3, DEFAULT_BALL_CAP).unwrap().into_iter().collect();
    assert_eq!(ball, reached);
}
