use edgesync_core::analysis::{edge_energy, fit_log_linear, monotone_series, sync_error};
use edgesync_core::controller::{beta_star, coupling_inputs};
use edgesync_core::graph::{build_matrices, random_connected_graph, random_multi_component_graph, WeightedGraph};
use edgesync_core::models::LinearAgent;
use edgesync_core::numerics::{is_hurwitz, sym_eig, Matrix};
use edgesync_core::riccati::solve_ari;
use edgesync_core::upsilon::{build_upsilon, verify_endpoint_identities, weighted_margin};
use proptest::prelude::*;

fn any_graph() -> impl Strategy<Value = WeightedGraph> {
    (2usize..=10, 0.0f64..0.8, any::<u64>(), any::<bool>()).prop_map(|(n, p, seed, split)| {
        if split && n >= 4 {
            random_multi_component_graph(&[n / 2, n - n / 2], p, (0.1, 6.0), seed).unwrap()
        } else {
            random_connected_graph(n, p, (0.1, 6.0), seed).unwrap()
        }
    })
}

fn connected_graph() -> impl Strategy<Value = WeightedGraph> {
    (2usize..=9, 0.0f64..0.8, any::<u64>())
        .prop_map(|(n, p, seed)| random_connected_graph(n, p, (0.1, 6.0), seed).unwrap())
}

fn states(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn upsilon_identities_hold(g in any_graph()) {
        let m = build_matrices(&g).unwrap();
        let u = build_upsilon(&m).unwrap();
        let scale = m.l.max_abs().max(1.0);
        prop_assert!(u.identity_residual(&m) <= 1e-8 * scale);
        prop_assert!(weighted_margin(&m.w, &u.upsilon).unwrap() > 0.0);
        let (rk, rl) = verify_endpoint_identities(&m, &u);
        prop_assert!(rk <= 1e-8 && rl <= 1e-8);
    }

    #[test]
    fn laplacian_is_symmetric_psd_with_zero_rows(g in any_graph()) {
        let m = build_matrices(&g).unwrap();
        prop_assert_eq!(m.l.asymmetry(), 0.0);
        for i in 0..m.node_count() {
            prop_assert!(m.l.row_slice(i).iter().sum::<f64>().abs() <= 1e-12);
        }
        prop_assert!(sym_eig(&m.l).unwrap().min() >= -1e-10);
    }

    #[test]
    fn critical_gain_ignores_labels(g in connected_graph(), seed in any::<u64>()) {
        let n = g.node_count();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let h = g.permuted(&perm).unwrap();
        let beta = |g: &WeightedGraph| {
            let m = build_matrices(g).unwrap();
            beta_star(&m, &build_upsilon(&m).unwrap(), 1.0).unwrap()
        };
        let (a, b) = (beta(&g), beta(&h));
        prop_assert!((a - b).abs() <= 1e-8 * a, "{} vs {}", a, b);
    }

    #[test]
    fn sync_error_zero_only_on_agreement(x in states(12)) {
        let e = sync_error(&x, 3);
        prop_assert!(e >= 0.0);
        let agreed: Vec<f64> = x[..3].iter().cycle().take(12).copied().collect();
        prop_assert_eq!(sync_error(&agreed, 3), 0.0);
        if x.chunks(3).any(|c| c != &x[..3]) {
            prop_assert!(e > 0.0);
        }
    }

    #[test]
    fn edge_energy_matches_quadratic_form(g in connected_graph(), x in states(18), d in 0.1f64..3.0, off in -0.5f64..0.5) {
        let p = Matrix::from_rows(&[[d + 1.0, off], [off, 1.0]]).unwrap();
        let n = g.node_count();
        let x = &x[..2 * n];
        let m = build_matrices(&g).unwrap();
        let s = edge_energy(x, &g, &p).unwrap();
        let quad = m.l.kron(&p).quadratic_form(x);
        prop_assert!((s.edge_energy - quad).abs() <= 1e-9 * quad.max(1.0));

        let p_lower = sym_eig(&p).unwrap().min();
        let lower: f64 = g.edges().iter().zip(&s.per_edge).map(|(e, _)| {
            let d0 = x[2 * e.l] - x[2 * e.k];
            let d1 = x[2 * e.l + 1] - x[2 * e.k + 1];
            e.weight * (d0 * d0 + d1 * d1)
        }).sum();
        prop_assert!(s.edge_energy >= p_lower * lower - 1e-9);
        if s.edge_energy == 0.0 {
            prop_assert_eq!(s.sync_error, 0.0);
        }
    }

    #[test]
    fn energy_ignores_edge_orientation(g in connected_graph(), x in states(9), j in any::<prop::sample::Index>()) {
        let n = g.node_count();
        let x = &x[..n];
        let m = build_matrices(&g).unwrap();
        let flipped = m.with_flipped_edge(j.index(m.edge_count()));
        let energy = |mm: &edgesync_core::GraphMatrices| {
            let e = mm.e.transpose().matvec(x);
            e.iter().zip(mm.weights()).map(|(v, w)| w * v * v).sum::<f64>()
        };
        let (a, b) = (energy(&m), energy(&flipped));
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        let direct = edge_energy(x, &g, &Matrix::identity(1)).unwrap().edge_energy;
        prop_assert!((a - direct).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn coupling_inputs_sum_to_zero(g in connected_graph(), x in states(18), beta in 0.0f64..50.0, k0 in -3.0f64..3.0, k1 in -3.0f64..3.0) {
        let n = g.node_count();
        let model = LinearAgent::new(
            Matrix::zeros(2, 2),
            Matrix::column(&[0.0, 1.0]).unwrap(),
            Matrix::row(&[k0, k1]).unwrap(),
        ).unwrap();
        let u = coupling_inputs(&x[..2 * n], &g, &model, beta).unwrap();
        let scale: f64 = u.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!(u.iter().sum::<f64>().abs() <= 1e-12 * scale);
    }

    #[test]
    fn riccati_designs_certify_and_stabilize(
        a in prop::collection::vec(-2.0f64..2.0, 4),
        rho in 0.2f64..5.0,
        mu in 0.05f64..2.0,
    ) {
        // Controllable companion-like pair: B = e₂ and a₁₂ bounded away from 0.
        let a12 = if a[1] >= 0.0 { a[1] + 0.5 } else { a[1] - 0.5 };
        let am = Matrix::from_rows(&[[a[0], a12], [a[2], a[3]]]).unwrap();
        let b = Matrix::column(&[0.0, 1.0]).unwrap();
        let d = solve_ari(&am, &b, rho, mu).unwrap();
        let scale = d.certificate.p.max_abs().max(1.0);
        prop_assert!(d.ari_margin().unwrap() >= -1e-8 * scale);
        for sigma in [0.5 * rho, rho, 4.0 * rho] {
            prop_assert!(is_hurwitz(&(&am - &(&b * &d.gain).scale(sigma))).unwrap());
        }
    }

    #[test]
    fn log_fit_recovers_exponentials(v0 in 0.01f64..100.0, rate in -3.0f64..3.0) {
        let times: Vec<f64> = (0..40).map(|k| k as f64 * 0.05).collect();
        let values: Vec<f64> = times.iter().map(|t| v0 * (-rate * t).exp()).collect();
        let fit = fit_log_linear(&times, &values, (0.0, 2.0)).unwrap();
        prop_assert!((fit.rate - rate).abs() <= 1e-9);
        prop_assert!(fit.r_squared >= 1.0 - 1e-9);
        let mono = monotone_series(&values, 0.0);
        prop_assert_eq!(mono.passed, rate >= 0.0);
    }

    #[test]
    fn graph_text_round_trips(g in any_graph()) {
        let text = g.to_string();
        let back: WeightedGraph = text.parse().unwrap();
        prop_assert_eq!(back, g);
    }
}
