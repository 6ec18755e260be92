use num_complex::Complex64;
use proptest::prelude::*;
use rmt_lab::spectral_curve::{closed_form_endpoints, discriminant_d1, endpoints, solve_branches};
use rmt_lab::uniformization::{default_grid, h_of_t, t_of_z, trace_gamma, z_of_t, Contour};
use rmt_lab::ModelParams;

fn pair() -> impl Strategy<Value = ModelParams> {
    (0.05f64..5.0, 0.05f64..0.95).prop_map(|(b, r)| ModelParams::curve(r * b, b).unwrap())
}

fn off_axis() -> impl Strategy<Value = Complex64> {
    (-1.5f64..2.0, 0.05f64..3.09, any::<bool>()).prop_map(|(lr, th, up)| {
        Complex64::from_polar(10f64.powf(lr), if up { th } else { -th })
    })
}

#[test]
fn discriminant_nonzero_inside_gaps() {
    for (a, b) in [(1.0, 2.0), (0.5, 3.0), (2.0, 2.1), (0.1, 1.0)] {
        let params = ModelParams::curve(a, b).unwrap();
        let (p, q) = closed_form_endpoints(&params);
        let scale = discriminant_d1(&params, 0.0).abs().max(1e-300);
        for k in 1..100 {
            let u = k as f64 / 100.0;
            for z in [-q * u, p * u, p * (1.0 + 9.0 * u)] {
                assert!(discriminant_d1(&params, z).abs() > 1e-14 * scale, "({a},{b}) z={z}");
            }
        }
    }
}

#[test]
fn traced_arcs_are_conjugate() {
    let params = ModelParams::curve(1.0, 2.0).unwrap();
    for which in [Contour::G1Plus, Contour::G2Plus, Contour::G3Plus] {
        let grid = default_grid(&params, which, 30, 2.0);
        let up = trace_gamma(&params, which, &grid).unwrap();
        let down = trace_gamma(&params, which.conjugate(), &grid).unwrap();
        for (u, d) in up.points.iter().zip(&down.points) {
            assert!((u.t - d.t.conj()).norm() <= 1e-12 * u.t.norm().max(1.0), "{which:?} x={}", u.x);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn endpoint_record_is_consistent(params in pair()) {
        let e = endpoints(&params).unwrap();
        prop_assert!(e.residuals.values().all(|&r| r <= 1e-10));
        prop_assert!(e.p > 0.0 && e.q > 0.0);
    }

    #[test]
    fn vieta_everywhere(params in pair(), z in off_axis()) {
        let b = solve_branches(&params, z).unwrap();
        let v = b.vieta(&params);
        prop_assert!(v[0] < 1e-9 && v[1] < 1e-9 && v[2] < 1e-8, "{z}: {v:?}");
    }

    #[test]
    fn sheet_labels_are_continuous(z in off_axis()) {
        let params = ModelParams::curve(1.0, 2.0).unwrap();
        let a = solve_branches(&params, z).unwrap();
        let b = solve_branches(&params, z * (1.0 + 1e-9)).unwrap();
        for j in 0..4 {
            let nearest = (0..4)
                .min_by(|&k, &l| (b.xi[k] - a.xi[j]).norm().total_cmp(&(b.xi[l] - a.xi[j]).norm()))
                .unwrap();
            prop_assert_eq!(nearest, j);
        }
    }

    #[test]
    fn uniformization_round_trip(z in off_axis(), sheet in 1usize..=4) {
        let params = ModelParams::curve(1.0, 2.0).unwrap();
        let t = t_of_z(&params, sheet, z).unwrap();
        let back = z_of_t(&params, t).unwrap();
        prop_assert!((back - z).norm() <= 1e-10 * z.norm());
        let xi = solve_branches(&params, z).unwrap().xi[sheet - 1];
        prop_assert!((h_of_t(&params, t) - xi).norm() <= 1e-8 * xi.norm().max(1.0));
    }
}
