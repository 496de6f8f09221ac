use std::f64::consts::PI;

use proptest::prelude::*;

use confsim_core::config::{parse_config, ParsedConfig, SimulationConfig};
use confsim_core::elasticity::{solve_direct, GreenKernel};
use confsim_core::grid::{d1, Grid, ScalarField};
use confsim_core::io::{read_frame, write_frame};
use confsim_core::material::{ElasticityTensor, MisfitStrain};
use confsim_core::order_parameter::{abs_kappa, primitive_abs_kappa, InitialData};
use confsim_core::reduction3d::{rotate, rotation, RadialLift, RadialProfile};

fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn smooth(grid: Grid, c: [f64; 3]) -> ScalarField {
    ScalarField::from_fn(grid, move |x| c[0] + c[1] * x * x + c[2] * (3.0 * x).sin())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn direct_solve_is_linear(
        c1 in prop::array::uniform3(-2.0f64..2.0),
        c2 in prop::array::uniform3(-2.0f64..2.0),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
    ) {
        let g = Grid::new(1.0, 2.0, 65).unwrap();
        let (f1, f2) = (smooth(g, c1), smooth(g, c2));
        let combined = solve_direct(&f1.axpby(alpha, &f2, beta)).unwrap();
        let separate = solve_direct(&f1).unwrap().axpby(alpha, &solve_direct(&f2).unwrap(), beta);
        prop_assert!(combined.max_abs_diff(&separate) < 1e-10);
    }

    #[test]
    fn green_kernel_is_symmetric_and_vanishes_on_the_boundary(
        a in 0.2f64..2.0,
        len in 0.2f64..3.0,
        s in 0.0f64..1.0,
        t in 0.0f64..1.0,
    ) {
        let d = a + len;
        let k = GreenKernel::new(a, d).unwrap();
        let (x, y) = (a + s * len, a + t * len);
        prop_assert!((k.eval(x, y).unwrap() - k.eval(y, x).unwrap()).abs() < 1e-12);
        prop_assert!(k.eval(a, y).unwrap().abs() < 1e-14);
        prop_assert!(k.eval(d, y).unwrap().abs() < 1e-14);
    }

    #[test]
    fn regularized_modulus_bounds(p in -50.0f64..50.0, kappa in 0.0f64..1.0) {
        let v = abs_kappa(p, kappa);
        prop_assert!(v >= p.abs() && v >= kappa);
        prop_assert!(v - p.abs() <= kappa);
    }

    #[test]
    fn primitive_is_odd_and_increasing(p in 0.0f64..20.0, q in 0.0f64..1.0, kappa in 1e-3f64..1.0) {
        prop_assert_eq!(primitive_abs_kappa(-p, kappa), -primitive_abs_kappa(p, kappa));
        prop_assert!(primitive_abs_kappa(p + q, kappa) >= primitive_abs_kappa(p, kappa));
    }

    #[test]
    fn lifted_magnitudes_are_rotation_invariant(
        r in 1.05f64..1.95,
        z in -1.0f64..1.0,
        phi in 0.0f64..6.28,
        axis in prop::array::uniform3(-1.0f64..1.0),
        angle in 0.0f64..6.28,
    ) {
        prop_assume!(norm(&axis) > 1e-3);
        let lift = RadialLift::new(
            1.0,
            2.0,
            RadialProfile::analytic(|r| (r - 1.0) * (2.0 - r), |r| 3.0 - 2.0 * r),
            RadialProfile::analytic(|r| r.cos(), |r| -r.sin()),
            RadialProfile::analytic(|r| r.sqrt(), |r| 0.5 / r.sqrt()),
            ElasticityTensor::diagonal(1.0),
            MisfitStrain::isotropic(0.1),
        ).unwrap();
        let rho = (1.0 - z * z).sqrt();
        let x = [r * rho * phi.cos(), r * rho * phi.sin(), r * z];
        let y = rotate(&[x], &rotation(axis, angle))[0];
        let (fx, fy) = (lift.lift(&x).unwrap(), lift.lift(&y).unwrap());
        prop_assert!((norm(&fx.u) - norm(&fy.u)).abs() < 1e-14);
        prop_assert!((norm(&fx.b) - norm(&fy.b)).abs() < 1e-14);
        prop_assert!((fx.s - fy.s).abs() < 1e-14);
    }

    #[test]
    fn frames_round_trip_bit_exactly(values in prop::collection::vec(-1e6f64..1e6, 5..40), t in 0.0f64..10.0) {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(1.0, 2.0, values.len()).unwrap();
        let f = ScalarField::from_values(g, values).unwrap();
        let p = dir.path().join("f.csv");
        write_frame(&p, t, &f).unwrap();
        let (t2, back) = read_frame(&p).unwrap();
        prop_assert_eq!(t2, t);
        prop_assert_eq!(back, f);
    }

    #[test]
    fn config_echo_round_trips(
        n in 9usize..300,
        kappa in 1e-3f64..1.0,
        dt in 1e-6f64..1e-2,
        amplitude in -1.0f64..1.0,
        save_every in 1usize..20,
    ) {
        let cfg = SimulationConfig {
            grid: Grid::new(1.0, 2.0, n).unwrap(),
            kappa,
            dt,
            save_every,
            initial: InitialData::Bump { amplitude },
            ..SimulationConfig::default()
        };
        prop_assert_eq!(parse_config(&cfg.echo()).unwrap(), ParsedConfig::Simulation(cfg));
    }
}

/// `Σ(x²u_x² + 2u²)h = −Σ x²𝓖u h` up to O(h²) for the discrete solve.
#[test]
fn discrete_energy_identity() {
    let gaps: Vec<f64> = [33, 65, 129]
        .iter()
        .map(|&n| {
            let g = Grid::new(1.0, 2.0, n).unwrap();
            let calg = ScalarField::from_fn(g, |x| (PI * x).cos() + x);
            let u = solve_direct(&calg).unwrap();
            let ux = d1(&u);
            let lhs = ux
                .zip_map(&u, |x, p, v| x * x * p * p + 2.0 * v * v)
                .integral();
            let rhs = -calg.zip_map(&u, |x, f, v| x * x * f * v).integral();
            (lhs - rhs).abs()
        })
        .collect();
    assert!(gaps[2] < 1e-3, "{gaps:?}");
    for w in gaps.windows(2) {
        assert!((w[0] / w[1]).log2() > 1.5, "{gaps:?}");
    }
}
