use num_complex::Complex64;
use proptest::prelude::*;
use swlab::extension::{fuchs_roots, theta};
use swlab::geometry::{assemble_sum_of_squares, build_grid, VectorFieldSet};
use swlab::wave::{solve_wave, CutoffSpec, WaveOptions, WaveState};

fn preset() -> impl Strategy<Value = (VectorFieldSet, usize)> {
    prop_oneof![
        Just((VectorFieldSet::euclidean(1), 1)),
        Just((VectorFieldSet::euclidean(2), 2)),
        Just((VectorFieldSet::grushin(), 2)),
        Just((VectorFieldSet::heisenberg(), 3)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operator_is_symmetric_and_nonnegative(
        (fields, dim) in preset(),
        n in 5usize..9,
        eps in 0.0f64..1.0,
        seed in prop::collection::vec(-1.0f64..1.0, 729),
    ) {
        let grid = build_grid(&vec![(-1.0, 1.0); dim], &vec![n; dim]).unwrap();
        let op = assemble_sum_of_squares(&fields, &grid, eps).unwrap();
        prop_assert!(op.matrix().max_asymmetry() < 1e-12);
        let u = &seed[..grid.len()];
        prop_assert!(grid.dot_w(u, &op.apply(u)) >= -1e-12);
    }

    #[test]
    fn grid_index_is_a_bijection(dims in prop::collection::vec(3usize..8, 1..4), pick in 0usize..10_000) {
        let grid = build_grid(&vec![(0.0, 1.0); dims.len()], &dims).unwrap();
        let i = pick % grid.len();
        let m = grid.multi_index(i);
        prop_assert_eq!(grid.index_of(&m), i);
        prop_assert_eq!(grid.nearest_node(&grid.coords(i)), Some(i));
    }

    #[test]
    fn kernel_is_a_decreasing_fraction(s in 0.02f64..0.98, lambda in 0.0f64..50.0, t in 0.0f64..4.0, dt in 1e-3f64..1.0) {
        let a = theta(lambda, t, s).unwrap().value;
        let b = theta(lambda, t + dt, s).unwrap().value;
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
        prop_assert!(b <= a + 1e-14);
    }

    #[test]
    fn fuchs_roots_solve_the_indicial_equation(a1 in -3.0f64..3.0, a0 in -3.0f64..3.0) {
        let r = fuchs_roots(a1, a0);
        for z in r.complex() {
            let p = z * (z - 1.0) + a1 * z + Complex64::new(a0, 0.0);
            prop_assert!(p.norm() < 1e-9 * (1.0 + z.norm_sqr()), "{z} {p}");
        }
        let re_max = r.roots.iter().map(|z| z.0).fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(r.h, re_max.floor() as i64 + 1);
    }

    #[test]
    fn cutoff_is_monotone_between_zero_and_one(inner in 0.01f64..2.0, width in 0.01f64..1.0, d1 in 0.0f64..4.0, d2 in 0.0f64..4.0) {
        let c = CutoffSpec::new(inner, inner + width).unwrap();
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let (a, b) = (c.chi(lo), c.chi(hi));
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(a <= b);
        prop_assert_eq!(c.chi(inner * 0.5), 0.0);
        prop_assert_eq!(c.chi(inner + width * 1.5), 1.0);
    }

    #[test]
    fn leapfrog_is_linear(
        alpha in -2.0f64..2.0,
        u in prop::collection::vec(-1.0f64..1.0, 15),
        w in prop::collection::vec(-1.0f64..1.0, 15),
    ) {
        let grid = build_grid(&[(-1.0, 1.0)], &[15]).unwrap();
        let op = assemble_sum_of_squares(&VectorFieldSet::euclidean(1), &grid, 0.0).unwrap();
        let run = |x: Vec<f64>| {
            let opts = WaveOptions { dt: Some(0.05), snapshot_stride: 100 };
            solve_wave(&op, &WaveState::new(x, vec![0.0; 15], 0.0), 1.0, opts).unwrap().last().u.clone()
        };
        let mix: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + alpha * b).collect();
        let (ru, rw, rm) = (run(u), run(w), run(mix));
        for i in 0..15 {
            prop_assert!((rm[i] - ru[i] - alpha * rw[i]).abs() < 1e-10);
        }
    }
}
