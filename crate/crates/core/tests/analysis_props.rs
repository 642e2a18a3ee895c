use bbnet::analysis::{
    corollary_condition_check, density_infected, detect_stationary, eeac, smallest_m, theorem1_lower_bound,
    BoundConstants, BoundReport, GrowthCondition, MICRO,
};
use bbnet::machine::{omega_profile, sample_program, ComplexityIndex, EnumerationTable, Program};
use bbnet::protocol::{run_experiment, ExperimentConfig, PartialOutput, Tag};
use bbnet::rng::rng_from_seed;
use proptest::prelude::*;

/// The lower bound written out from its definition, independent of the
/// library's helper.
fn reference_bound(n: u64, x: u32, tau: f64, omega: f64, a_w: f64, c5: f64) -> f64 {
    let lg = |v: f64| v.ln() / std::f64::consts::LN_2;
    let lx = lg(x as f64);
    tau * lg(n as f64) - omega * lg(n as f64) - omega * lx - 2.0 * omega * lg(lx) - a_w - c5
}

fn constants(c4: i64, c1: i64) -> BoundConstants {
    BoundConstants {
        c0: 3,
        c1,
        c2: 3,
        c3: None,
        c4,
        c4_theory: 2,
        c6: None,
        c_l: 6,
        c_bb: 0,
        c_omega: 1,
        c_c: 0,
        eps: None,
        eps2: None,
        notes: Default::default(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn bound_moves_the_right_way(
        n in 2u64..1_000_000,
        x in 2u32..10_000,
        tau in 0.0f64..=1.0,
        omega in 0.0f64..=1.0,
        a_w in 0.0f64..40.0,
        c5 in -20.0f64..20.0,
        d in 0.001f64..0.5,
    ) {
        let b = theorem1_lower_bound(n, x, tau, omega, a_w, c5).unwrap();
        if tau + d <= 1.0 {
            prop_assert!(theorem1_lower_bound(n, x, tau + d, omega, a_w, c5).unwrap() > b);
        }
        if omega + d <= 1.0 {
            prop_assert!(theorem1_lower_bound(n, x, tau, omega + d, a_w, c5).unwrap() < b);
        }
        prop_assert!(theorem1_lower_bound(n, x, tau, omega, a_w + d, c5).unwrap() < b);
        prop_assert!(theorem1_lower_bound(n, x, tau, omega, a_w, c5 + d).unwrap() < b);
        let bigger = theorem1_lower_bound(n * 2, x, tau, omega, a_w, c5).unwrap();
        if tau > omega {
            prop_assert!(bigger > b);
        } else if tau < omega {
            prop_assert!(bigger < b);
        }
        prop_assert!(theorem1_lower_bound(n, x + 1, tau, omega, a_w, c5).unwrap() <= b);
    }

    #[test]
    fn report_matches_reference_evaluation(
        n in 2u64..1_000_000,
        x in 2u32..10_000,
        tau in 0.0f64..=1.0,
        omega in 0.0f64..=1.0,
        a_w in 0.0f64..40.0,
        c4 in -10i64..10,
        c1 in -10i64..10,
        eeac_v in -5.0f64..30.0,
    ) {
        let k = constants(c4, c1);
        let r = BoundReport::new(n, x, tau, omega, a_w, &k, Some(eeac_v)).unwrap();
        let half_micro = 0.5 / MICRO + 1e-9;
        prop_assert!((r.bound() - reference_bound(n, x, tau, omega, a_w, k.c5() as f64)).abs() <= half_micro);
        let proof = r.bound_proof_micro as f64 / MICRO;
        prop_assert!((proof - reference_bound(n, x, tau, omega, a_w, k.c5_proof() as f64)).abs() <= half_micro);
        prop_assert_eq!(k.c5_proof() - k.c5(), 2 * k.c0);
        prop_assert!(r.is_consistent());
        prop_assert!((r.margin().unwrap() - (eeac_v - r.bound())).abs() <= 2.0 / MICRO);
    }

    #[test]
    fn out_of_domain_inputs_are_rejected(tau in 1.0001f64..5.0, x in 0u32..2, n in 0u64..2) {
        prop_assert!(theorem1_lower_bound(100, 10, tau, 0.1, 0.0, 0.0).is_err());
        prop_assert!(theorem1_lower_bound(100, 10, 0.5, -tau, 0.0, 0.0).is_err());
        prop_assert!(theorem1_lower_bound(100, x, 0.5, 0.1, 0.0, 0.0).is_err());
        prop_assert!(theorem1_lower_bound(n, 10, 0.5, 0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn growth_condition_tracks_the_gap(tau in 0.0f64..=1.0, omega in 0.001f64..=1.0) {
        let g = GrowthCondition::new(tau, omega).unwrap();
        prop_assert_eq!(g.holds(), tau > omega);
        if let (Some(eps), Some(c), Some(eps2)) = (g.eps, g.c, g.eps2) {
            prop_assert!(eps > 0.0 && eps < g.eps_max);
            prop_assert!(c > 0.0);
            prop_assert!((eps2 * c - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn smallest_m_is_the_first_passing_m(lambda in 0.05f64..3.0, omega in 0.01f64..0.99) {
        match smallest_m(lambda, omega, 200).unwrap() {
            Some(m) => {
                prop_assert!(corollary_condition_check(m as f64, lambda, omega).unwrap());
                if m > 1 {
                    prop_assert!(!corollary_condition_check((m - 1) as f64, lambda, omega).unwrap());
                }
            }
            None => prop_assert!(!corollary_condition_check(200.0, lambda, omega).unwrap()),
        }
    }

    #[test]
    fn programs_round_trip_through_bits(seed in any::<u64>()) {
        let p = sample_program(&mut rng_from_seed(seed));
        prop_assert_eq!(Program::from_bits(&p.to_bits()).unwrap(), p.clone());
        prop_assert_eq!(Program::parse_bits(&p.bit_string()).unwrap(), p.clone());
        prop_assert_eq!(p.len_bits() % 3, 0);
    }

    #[test]
    fn records_round_trip_through_bytes(cycle in any::<u32>(), input in any::<u64>(), origin in any::<u32>(), value in any::<u64>(), t in 0usize..3) {
        let tag = [Tag::Susceptible, Tag::Infected, Tag::Raw][t];
        let r = PartialOutput { tag, cycle, input, origin, value };
        let mut buf = Vec::new();
        r.encode(&mut buf);
        let (back, used) = PartialOutput::decode(&buf).unwrap();
        prop_assert_eq!(back, r);
        prop_assert_eq!(used, buf.len());
    }

    #[test]
    fn stationary_series_is_detected_at_once(level in 0.0f64..1.0, w in 1usize..30, extra in 0usize..50) {
        let s = vec![level; 2 * w + extra];
        let r = detect_stationary(&s, w, 1e-12).unwrap();
        prop_assert!(r.detected);
        prop_assert_eq!(r.delta_star, Some(0));
        prop_assert!((r.level.unwrap() - level).abs() < 1e-12);
    }
}

#[test]
fn omega_profile_is_nonincreasing_and_below_kraft() {
    let table = EnumerationTable::build(12, 0, 100_000).unwrap();
    let kraft = table.kraft_mass().value();
    assert!(kraft <= 1.0);
    let prof: Vec<f64> = omega_profile(0, 8, 12, 100_000).unwrap().iter().map(|d| d.value()).collect();
    assert!(prof[0] <= kraft);
    assert!(prof.windows(2).all(|w| w[1] <= w[0]), "{prof:?}");
}

#[test]
fn no_contagion_means_no_emergent_complexity() {
    let cfg = ExperimentConfig::from_toml(
        "seed = 3\n[graph]\nkind = \"ba\"\nn = 60\nm = 2\n[machine]\nmax_len = 12\n[sis]\nnu = 0.0\ndelta = 0.0\n[run]\nmappings = 3\n",
    )
    .unwrap();
    let exp = cfg.resolve(None).unwrap();
    let out = run_experiment(&exp).unwrap();
    let index = ComplexityIndex::from_table(&EnumerationTable::build(12, 0, 100_000).unwrap());
    assert_eq!(eeac(&out.traces, &out.isolated, |v| index.complexity(v)).unwrap(), 0.0);
    for t in &out.traces {
        let last = t.instant_count() - 1;
        let d = density_infected(t, 0, last, last).unwrap();
        let hits = t.records[0].iter().filter(|r| r.value == t.global_max()).count();
        assert_eq!(d, hits as f64 / t.node_count() as f64);
    }
}

#[test]
fn full_contagion_puts_every_node_on_the_maximum() {
    let cfg = ExperimentConfig::from_toml(
        "seed = 4\n[graph]\nkind = \"ba\"\nn = 80\nm = 3\n[machine]\nmax_len = 12\n[schedule]\nbudget = { kind = \"diameter\" }\n[run]\nmappings = 2\n",
    )
    .unwrap();
    let exp = cfg.resolve(None).unwrap();
    let out = run_experiment(&exp).unwrap();
    for t in &out.traces {
        let last = t.instant_count() - 1;
        assert_eq!(density_infected(t, 0, last, last).unwrap(), 1.0);
        assert!(t.finals.iter().all(|&f| f == t.global_max()));
    }
}
