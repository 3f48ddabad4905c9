use proptest::prelude::*;

use waveguard::certificates::{
    build_antidamping_certificate, build_monotone_certificate, distance_lemma_constant,
};
use waveguard::diagnostics::{check_decay_bound, fit_decay_rate, lyapunov_gamma, DecayEnvelope, WeightRho};
use waveguard::nonlinearities::{
    lipschitz_constant, sector_params, FeedbackLaw, ForcingLaw, SectorData,
};
use waveguard::solver::{
    make_initial, simulate, GaussianProfile, InitialKind, LeftBoundary, SolverConfig,
};
use waveguard::state_space::{
    bilinear_a, dist_to_sublevel_bound, dist_to_sublevel_exact, energy,
    project_orthogonal_to_constants, FieldState, Grid, SublevelSetSpec,
};

fn state(n_nodes: usize, scale: f64) -> impl Strategy<Value = FieldState> {
    (
        prop::collection::vec(-scale..scale, n_nodes),
        prop::collection::vec(-scale..scale, n_nodes),
    )
        .prop_map(|(u, v)| FieldState::new(u, v).unwrap())
}

fn feedback() -> impl Strategy<Value = FeedbackLaw> {
    prop_oneof![
        (0.1f64..5.0).prop_map(|gain| FeedbackLaw::LinearGain { gain }),
        (0.0f64..2.0).prop_map(|width| FeedbackLaw::Deadzone { width }),
        (0.1f64..3.0, 0.1f64..3.0).prop_map(|(gain, cap)| FeedbackLaw::Saturation { gain, cap }),
        (0.1f64..3.0, 0.0f64..0.5).prop_map(|(linear, cubic)| FeedbackLaw::PowerSector { linear, cubic }),
    ]
}

fn forcing() -> impl Strategy<Value = ForcingLaw> {
    prop_oneof![
        Just(ForcingLaw::Zero),
        (-2.0f64..2.0).prop_map(|slope| ForcingLaw::Linear { slope }),
        (0.0f64..0.5).prop_map(|q| ForcingLaw::TanhAntidamping { q }),
        (0.0f64..3.0).prop_map(|k| ForcingLaw::MonotoneDamping { k }),
        (-1.0f64..1.0, -1.0f64..1.0, 0.1f64..2.0)
            .prop_map(|(inner, outer, knee)| ForcingLaw::PiecewiseLinear { inner, outer, knee }),
    ]
}

fn samples(count: usize, range: f64) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| -range + 2.0 * range * i as f64 / (count - 1) as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_nonnegative_and_zero_only_on_constants(x in state(33, 2.0), c in -5.0f64..5.0) {
        let grid = Grid::new(1.0, 32).unwrap();
        prop_assert!(energy(&x, &grid).unwrap().total >= 0.0);
        prop_assert!(energy(&FieldState::constant(&grid, c), &grid).unwrap().total <= 1e-12);
        let moved = FieldState::new(x.u.clone(), vec![0.0; 33]).unwrap();
        let spread = x.u.iter().fold(0.0f64, |m, u| m.max((u - x.u[0]).abs()));
        if spread > 1e-3 {
            prop_assert!(energy(&moved, &grid).unwrap().total > 1e-12);
        }
    }

    #[test]
    fn bilinear_form_is_symmetric(x in state(33, 3.0)) {
        let grid = Grid::new(2.0, 32).unwrap();
        prop_assert_eq!(bilinear_a(&x.u, &x.v, &grid).unwrap(), bilinear_a(&x.v, &x.u, &grid).unwrap());
    }

    #[test]
    fn projection_is_idempotent_and_keeps_energy(x in state(33, 2.0), c in -10.0f64..10.0) {
        let grid = Grid::new(1.5, 32).unwrap();
        let shifted = FieldState::new(x.u.iter().map(|u| u + c).collect(), x.v.clone()).unwrap();
        let p = project_orthogonal_to_constants(&shifted, &grid).unwrap();
        let pp = project_orthogonal_to_constants(&p, &grid).unwrap();
        let e = energy(&shifted, &grid).unwrap().total;
        prop_assert!((energy(&p, &grid).unwrap().total - e).abs() <= 1e-13 * e.max(1e-300));
        for (a, b) in p.u.iter().zip(&pp.u) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn exact_distance_below_lemma_bound(x in state(17, 1.0), level in 0.0f64..2.0) {
        let grid = Grid::new(1.0, 16).unwrap();
        let k = distance_lemma_constant(&grid).unwrap().k;
        let spec = SublevelSetSpec::new(level).unwrap();
        let exact = dist_to_sublevel_exact(&x, &spec, &grid).unwrap();
        let bound = dist_to_sublevel_bound(&x, &spec, &grid, k).unwrap();
        prop_assert!(exact <= bound * (1.0 + 1e-12) + 1e-14);
        let inside = energy(&x, &grid).unwrap().total <= level;
        prop_assert_eq!(exact == 0.0, inside);
    }

    #[test]
    fn discrete_poincare_wirtinger(u in prop::collection::vec(-1.0f64..1.0, 65)) {
        let grid = Grid::new(1.0, 64).unwrap();
        let mean = grid.trapezoid(&u) / grid.length();
        let centered: Vec<f64> = u.iter().map(|x| x - mean).collect();
        let sq: Vec<f64> = centered.iter().map(|x| x * x).collect();
        let a = bilinear_a(&centered, &centered, &grid).unwrap();
        let c = (grid.length() / std::f64::consts::PI).powi(2) * 1.1;
        prop_assert!(grid.trapezoid(&sq) <= c * a + 1e-14);
    }

    #[test]
    fn feedback_laws_monotone_and_in_sector(law in feedback()) {
        let mut last = f64::NEG_INFINITY;
        for s in samples(10_000, 100.0) {
            let g = law.eval(s);
            prop_assert!(g - last >= -1e-12);
            last = g;
        }
        if let Ok(sector) = sector_params(&law) {
            for s in samples(10_000, 100.0).filter(|s| s.abs() >= sector.s_threshold) {
                let g = law.eval(s).abs();
                prop_assert!(sector.alpha1 * s.abs() - 1e-9 <= g);
                prop_assert!(g <= sector.alpha2 * s.abs() + 1e-9);
            }
        }
    }

    #[test]
    fn forcing_laws_respect_lipschitz_constant(law in forcing(), a in -50.0f64..50.0, b in -50.0f64..50.0) {
        if let Some(q) = lipschitz_constant(&law).unwrap().q_global {
            prop_assert!((law.eval(a) - law.eval(b)).abs() <= q * (a - b).abs() + 1e-9);
        }
    }

    #[test]
    fn monotone_certificate_grows_with_s_and_sup(
        a1 in 0.2f64..2.0, ratio in 1.0f64..3.0, s in 0.0f64..2.0, ds in 0.0f64..1.0,
        sup in 0.0f64..4.0, dsup in 0.0f64..4.0, rho0 in 0.5f64..2.0, rl in 1.2f64..4.0,
    ) {
        let rho = WeightRho::new(rho0, rho0 * rl, 1.0).unwrap();
        let build = |s: f64, sup: f64| {
            build_monotone_certificate(&SectorData::new(a1, a1 * ratio, s, sup).unwrap(), &rho).unwrap()
        };
        let base = build(s, sup);
        prop_assert!(build(s + ds, sup).e_s >= base.e_s);
        prop_assert!(build(s, sup + dsup).e_s >= base.e_s);
        prop_assert!(base.mu > 0.0 && base.mu <= base.alpha / base.tau * (1.0 + 1e-15));
        // closed form, so repeated builds agree bitwise
        prop_assert_eq!(build(s, sup), base);
    }

    #[test]
    fn gamma_sandwich_on_random_states(x in state(33, 2.0), q in 0.0f64..0.45, len in 0.5f64..3.0) {
        let grid = Grid::new(len, 32).unwrap();
        let cert = build_antidamping_certificate(q, &SectorData::global(1.0, 1.0).unwrap(), len).unwrap();
        let e = energy(&x, &grid).unwrap().total;
        let gamma = lyapunov_gamma(&x, &cert.rho, &grid).unwrap();
        prop_assert!(cert.m1 * e <= gamma + 1e-12 * e);
        prop_assert!(gamma <= cert.m2 * e + 1e-12 * e);
    }

    #[test]
    fn fit_recovers_exact_exponentials(mu in 0.01f64..1.0, m in 0.5f64..5.0, e_s in 0.0f64..3.0) {
        let times: Vec<f64> = (0..400).map(|k| k as f64 * 0.05).collect();
        let e0 = e_s + 1.0;
        let energies: Vec<f64> = times
            .iter()
            .map(|&t| if t == 0.0 { e0 } else { e_s + m * (-mu * t).exp() })
            .collect();
        // a tail excess of 1e-6 on top of e_s keeps about 9 correct digits
        let fit = fit_decay_rate(&times, &energies, e_s, 1e-6, 2.0).unwrap();
        prop_assert!((fit.mu_obs - mu).abs() <= 1e-8 * mu);
        prop_assert!((fit.m_obs - m).abs() <= 1e-8 * m);
        prop_assert!(fit.r_squared <= 1.0);
        prop_assert!(fit.window.0 < fit.window.1);
    }

    #[test]
    fn bound_report_holds_iff_margin_nonnegative(
        energies in prop::collection::vec(0.0f64..2.0, 2..50), mu in 0.0f64..1.0, m in 0.5f64..2.0,
    ) {
        let times: Vec<f64> = (0..energies.len()).map(|k| k as f64).collect();
        let env = DecayEnvelope { mu, prefactor: m, e_s: 0.0 };
        let rep = check_decay_bound(&times, &energies, &env, 1.05);
        prop_assert_eq!(rep.holds, rep.worst_margin >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn constant_states_are_fixed_points(c in -5.0f64..5.0, g in feedback(), f in forcing()) {
        let grid = Grid::new(1.0, 40).unwrap();
        let init = FieldState::constant(&grid, c);
        let traj = simulate(&init, &g, &f, &grid, &SolverConfig::with_t_final(1.0)).unwrap();
        prop_assert_eq!(traj.final_state(), &init);
    }

    #[test]
    fn right_boundary_residual_within_tolerance(
        g in feedback(), amplitude in 0.1f64..3.0, center in 0.2f64..0.8,
    ) {
        let grid = Grid::new(1.0, 100).unwrap();
        let kind = InitialKind::GaussianBump(GaussianProfile { amplitude, center, width: 0.08 });
        let init = make_initial(&kind, &grid).unwrap().state;
        let config = SolverConfig::with_t_final(3.0);
        let f = ForcingLaw::MonotoneDamping { k: 1.0 };
        let traj = simulate(&init, &g, &f, &grid, &config).unwrap();
        for tr in &traj.traces {
            prop_assert!((tr.dxu_l + tr.g_of_vl).abs() <= 10.0 * config.boundary_tol);
        }
    }

    #[test]
    fn monotone_scenarios_do_not_gain_energy(
        g in feedback(), k in 0.0f64..3.0, amplitude in 0.1f64..3.0, center in 0.2f64..0.8,
    ) {
        let grid = Grid::new(1.0, 100).unwrap();
        let kind = InitialKind::GaussianBump(GaussianProfile { amplitude, center, width: 0.08 });
        let init = make_initial(&kind, &grid).unwrap().state;
        let traj = simulate(&init, &g, &ForcingLaw::MonotoneDamping { k }, &grid, &SolverConfig::with_t_final(4.0)).unwrap();
        let e0 = traj.scheme_energies[0];
        for w in traj.scheme_energies.windows(2) {
            prop_assert!(w[1] - w[0] <= 1e-9 * e0);
        }
    }
}

#[test]
fn leapfrog_conserves_energy_between_reflecting_ends() {
    let grid = Grid::new(1.0, 400).unwrap();
    let kind = InitialKind::GaussianBump(GaussianProfile { amplitude: 1.0, center: 0.4, width: 0.1 });
    let init = make_initial(&kind, &grid).unwrap().state;
    let config = SolverConfig {
        t_final: 10.0,
        left_boundary: LeftBoundary::Neumann,
        ..SolverConfig::default()
    };
    let zero_gain = FeedbackLaw::LinearGain { gain: 0.0 };
    let traj = simulate(&init, &zero_gain, &ForcingLaw::Zero, &grid, &config).unwrap();
    let s = &traj.scheme_energies;
    let drift = s.iter().fold(0.0f64, |m, e| m.max((e - s[0]).abs())) / s[0];
    assert!(drift <= 1e-6, "relative drift {drift:e}");
}

#[test]
fn antidamping_feasibility_flips_at_one_half() {
    let sector = SectorData::global(1.0, 1.0).unwrap();
    assert!(build_antidamping_certificate(0.499, &sector, 1.0).is_ok());
    assert!(matches!(
        build_antidamping_certificate(0.5, &sector, 1.0),
        Err(waveguard::Error::HypothesisViolated(_))
    ));
}

#[test]
fn small_weight_keeps_offset_conservative() {
    // C1* < 1 here; E(τ)(1 + C1*) ≤ C1*·E(0) + C2(τ) must still be implied
    let sector = SectorData::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let rho = WeightRho::new(0.05, 0.1, 1.0).unwrap();
    let cert = build_monotone_certificate(&sector, &rho).unwrap();
    assert!(cert.c1_step2 < 1.0);
    assert!(cert.p >= cert.c2_tau / (1.0 + cert.c1_step2));
}
