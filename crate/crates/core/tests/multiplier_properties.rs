use proptest::prelude::*;
use rdmap::sample::{random_element, random_table, rng_from_seed};
use rdmap::{
    builtin_rd_params, certified_scale, lemma_norm_bound, map_defect, opnorm_lower, opnorm_upper,
    run_grid, scaled_multiplier, Complex64, GridOptions, GridSchedule, Group, GroupRingElement,
    Multiplier, NRule, PowerOptions, DEFAULT_BALL_CAP,
};

fn free2() -> Group {
    Group::free(2).unwrap()
}

fn element_strategy(g: Group, radius: u64) -> impl Strategy<Value = GroupRingElement> {
    let pool = g.ball(radius, DEFAULT_BALL_CAP).unwrap();
    let n = pool.len();
    prop::collection::vec((0..n, -2.0f64..2.0, -2.0f64..2.0), 0..8).prop_map(move |terms| {
        GroupRingElement::from_terms(
            g,
            terms
                .into_iter()
                .map(|(i, re, im)| (pool[i].clone(), Complex64::new(re, im))),
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn heat_semigroup(f in element_strategy(free2(), 3), r1 in 0.01f64..3.0, r2 in 0.01f64..3.0) {
        let once = Multiplier::heat(r1 + r2).unwrap().apply(&f).unwrap();
        let twice = Multiplier::heat(r1)
            .unwrap()
            .apply(&Multiplier::heat(r2).unwrap().apply(&f).unwrap())
            .unwrap();
        prop_assert!(once.approx_eq(&twice, 1e-12));
    }

    #[test]
    fn truncation_is_invisible_inside_the_ball(
        f in element_strategy(free2(), 3),
        r in 0.01f64..3.0,
        extra in 0u64..4,
    ) {
        let n = f.max_length() + extra;
        let full = Multiplier::heat(r).unwrap().apply(&f).unwrap();
        let cut = Multiplier::truncated_heat(r, n).unwrap().apply(&f).unwrap();
        prop_assert_eq!(full, cut);
    }
}

#[test]
fn truncation_zeroes_outside_the_ball() {
    let g = free2();
    let f = GroupRingElement::from_real(
        g,
        [(g.parse_word("a").unwrap(), 1.0), (g.parse_word("abab").unwrap(), 1.0)],
    )
    .unwrap();
    let cut = Multiplier::truncated_heat(0.5, 2).unwrap().apply(&f).unwrap();
    assert_eq!(cut.support_len(), 1);
    assert_eq!(cut.coeff(&g.parse_word("a").unwrap()).re, (-0.5f64).exp());
}

#[test]
fn scaled_multipliers_pass_the_contraction_shadow() {
    let g = free2();
    let rd = builtin_rd_params(&g);
    let pool = g.ball(3, DEFAULT_BALL_CAP).unwrap();
    let mut rng = rng_from_seed(21);
    for (r, n) in [(1.0, 0), (1.0, 2), (0.5, 5), (0.1, 50)] {
        let rho = scaled_multiplier(r, rd.s, n, rd.c).unwrap();
        for _ in 0..25 {
            let f = random_element(g, &pool, &mut rng, 8);
            let image = rho.apply(&f).unwrap();
            let lower = opnorm_lower(&image, &PowerOptions::with_radius(5)).unwrap().value;
            assert!(lower <= opnorm_upper(&f, &rd) + 1e-9);
        }
    }
}

#[test]
fn decay_bound_shadow_on_random_pairs() {
    let g = free2();
    let rd = builtin_rd_params(&g);
    let pool = g.ball(3, DEFAULT_BALL_CAP).unwrap();
    let mut rng = rng_from_seed(22);
    for _ in 0..100 {
        let phi = random_table(g, &pool, &mut rng, 10);
        let f = random_element(g, &pool, &mut rng, 8);
        let bound = lemma_norm_bound(&phi, &g, &rd).unwrap();
        let lower = opnorm_lower(&phi.apply(&f).unwrap(), &PowerOptions::with_radius(4))
            .unwrap()
            .value;
        assert!(lower <= bound.upper * opnorm_upper(&f, &rd) + 1e-9);
    }
}

#[test]
fn defect_improves_as_truncation_grows() {
    let g = free2();
    let rd = builtin_rd_params(&g);
    let f = GroupRingElement::generator_sum(g)
        .add(&GroupRingElement::delta(g, g.parse_word("ab").unwrap()).unwrap())
        .unwrap();
    let r = 0.5;
    let mut prev = f64::INFINITY;
    for n in f.max_length()..f.max_length() + 30 {
        let rho = scaled_multiplier(r, rd.s, n, rd.c).unwrap();
        let d = map_defect(&f, &rho, &rd, &PowerOptions::with_radius(3)).unwrap();
        assert!(d.bracket.upper <= prev + 1e-15, "n={n}");
        assert!(d.bracket.upper <= d.cheap_bound + 1e-12);
        prev = d.bracket.upper;
    }
}

#[test]
fn defect_vanishes_along_a_schedule() {
    // cheap bound sup_{supp f} |rho - 1| ||f||_1 computed independently
    let g = free2();
    let rd = builtin_rd_params(&g);
    let pool = g.ball(3, DEFAULT_BALL_CAP).unwrap();
    let f = random_element(g, &pool, &mut rng_from_seed(5), 8);
    let mut last = f64::INFINITY;
    for &r in &[1.0, 0.3, 0.1, 0.03, 0.01, 0.001] {
        let n = (40.0 * rd.s / r as f64).ceil() as u64;
        let u = certified_scale(r, rd.s, n, rd.c).unwrap();
        let oracle = f
            .support()
            .map(|x| (1.0 - (-r * g.word_length(x).unwrap() as f64).exp() / u).abs())
            .fold(0.0, f64::max)
            * f.l1_norm();
        let rho = scaled_multiplier(r, rd.s, n, rd.c).unwrap();
        let d = map_defect(&f, &rho, &rd, &PowerOptions::with_radius(3)).unwrap();
        assert!((d.cheap_bound - oracle).abs() < 1e-12);
        assert!(d.bracket.upper <= oracle + 1e-12);
        assert!(d.bracket.upper <= last);
        last = d.bracket.upper;
    }
    assert!(last < 0.01 * f.l1_norm());
}

#[test]
fn grid_rows_match_direct_defects() {
    let g = Group::free_abelian(1).unwrap();
    let rd = builtin_rd_params(&g);
    let f = GroupRingElement::generator_sum(g);
    let schedule = GridSchedule::new(vec![0.4, 0.2], NRule::default(), rd).unwrap();
    let opts = GridOptions { power: PowerOptions::with_radius(6), ..GridOptions::default() };
    let rows = run_grid(&f, &schedule, &opts).unwrap();
    for row in rows {
        let d = map_defect(&f, &row.multiplier(), &rd, &opts.power).unwrap();
        assert_eq!(d.bracket.lower, row.defect_lower);
        assert_eq!(d.bracket.upper, row.defect_upper);
    }
}
