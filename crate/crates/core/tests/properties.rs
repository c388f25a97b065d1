use pii_order_core::characteristics::{decompose, h_compensator};
use pii_order_core::ito::{ito_map, simulate_coupled};
use pii_order_core::kernel::Side;
use pii_order_core::order::{check_icx, check_st_tails};
use pii_order_core::verify::inf_convolution;
use pii_order_core::*;
use proptest::prelude::*;

fn cp_exp(rate: f64, mean: f64) -> LevyMeasure {
    LevyMeasure::compound_poisson(rate, JumpLaw::Exponential { rate: 1.0 / mean }).unwrap()
}

fn measure() -> impl Strategy<Value = LevyMeasure> {
    prop_oneof![
        (0.1f64..3.0, 0.2f64..3.0).prop_map(|(r, m)| cp_exp(r, m)),
        (0.1f64..2.0, 0.5f64..4.0, 0.5f64..4.0, -1.0f64..1.5)
            .prop_map(|(c, g, m, y)| LevyMeasure::cgmy(c, g, m, y).unwrap()),
        (0.1f64..3.0, -2.0f64..2.0, 0.05f64..1.0).prop_map(|(r, a, w)| {
            let a = if a.abs() < 0.05 { 0.5 } else { a };
            LevyMeasure::compound_poisson(r, JumpLaw::atoms(vec![(a, w), (2.0 * a, 1.0 - w + 0.01)]).unwrap()).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tails_are_monotone(m in measure(), r in 0.01f64..3.0, d in 0.0f64..2.0) {
        for side in [Side::Pos, Side::Neg] {
            let near = m.tail(side, r, true).unwrap();
            let far = m.tail(side, r + d, true).unwrap();
            prop_assert!(far <= near * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn stop_loss_is_convex_and_nonincreasing(rate in 0.1f64..3.0, mean in 0.2f64..3.0, x in 0.05f64..3.0, d in 0.01f64..1.0) {
        let m = cp_exp(rate, mean);
        let (a, b, c) = (m.stop_loss(x).unwrap(), m.stop_loss(x + d).unwrap(), m.stop_loss(x + 2.0 * d).unwrap());
        prop_assert!(b <= a + 1e-10);
        prop_assert!(b <= 0.5 * (a + c) + 1e-9);
    }

    #[test]
    fn kernel_orders_are_reflexive(m in measure()) {
        let k = JumpKernel::homogeneous(m);
        let a = TimeMeasure::identity();
        let grid = Grid::for_kernels(&k, &k, &a, 1.0, 4, 12, 0.05).unwrap();
        prop_assert_ne!(check_st_tails(&k, &k, &a, &grid).verdict, Verdict::Violated);
        prop_assert_ne!(check_icx(&k, &k, &a, &grid).verdict, Verdict::Violated);
    }

    #[test]
    fn ito_map_respects_tail_order(r1 in 0.1f64..2.0, extra in 0.0f64..2.0, mean in 0.2f64..2.0, x in -5.0f64..5.0) {
        let kx = JumpKernel::homogeneous(cp_exp(r1, mean));
        let ky = JumpKernel::homogeneous(cp_exp(r1 + extra, mean));
        let (rx, ry) = (ito_map(&kx, 0.5, x).unwrap(), ito_map(&ky, 0.5, x).unwrap());
        if x > 0.0 {
            prop_assert!(rx <= ry + 1e-9);
        } else {
            prop_assert!(rx == 0.0 && ry == 0.0);
        }
    }

    #[test]
    fn inf_convolution_properties(xs in proptest::collection::vec(-3.0f64..3.0, 3), slopes in proptest::collection::vec(-2.0f64..2.0, 4), n in 0.5f64..4.0) {
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut slopes = slopes;
        slopes.truncate(xs.len() + 1);
        slopes.sort_by(f64::total_cmp);
        let f = Plf::from_slopes(&xs, 0.0, &slopes).unwrap();
        if slopes[0] > n || slopes[slopes.len() - 1] < -n {
            prop_assert!(inf_convolution(&f, n).is_err());
            return Ok(());
        }
        let fn_ = inf_convolution(&f, n).unwrap();
        if f.lipschitz() <= n {
            prop_assert!((fn_.eval(0.3) - f.eval(0.3)).abs() < 1e-12);
        }
        let fm = inf_convolution(&f, n + 1.0).unwrap();
        prop_assert!(fn_.lipschitz() <= n + 1e-9);
        prop_assert!(fn_.is_convex());
        for i in -40..=40 {
            let x = i as f64 * 0.1;
            prop_assert!(fn_.eval(x) <= fm.eval(x) + 1e-9);
            prop_assert!(fm.eval(x) <= f.eval(x) + 1e-9);
        }
    }

    #[test]
    fn inf_convolution_keeps_steps_monotone(c in -3.0f64..3.0, n in 0.5f64..8.0) {
        let f = inf_convolution(&Plf::step(c), n).unwrap();
        prop_assert!(f.is_nondecreasing());
        prop_assert!(f.lipschitz() <= n + 1e-9);
    }

    #[test]
    fn decompose_round_trips(s1 in 0.1f64..1.0, p in 0.0f64..1.0, a in -3.0f64..3.0, t in 0.0f64..2.0) {
        let a = if a == 0.0 { 1.0 } else { a };
        let fixed = FixedJumpSchedule::new(vec![FixedJump { time: s1, mass: p, law: JumpLaw::point(a).unwrap() }]).unwrap();
        let mut c = PiiCharacteristics::levy(TruncationFunction::default(), 0.7, 0.0, cp_exp(1.0, 1.0)).unwrap();
        c.fixed_jumps = fixed.clone();
        let (qlc, sched) = decompose(&c).unwrap();
        prop_assert_eq!(&sched, &fixed);
        prop_assert!(qlc.fixed_jumps.is_empty());
        let h = c.truncation.eval(a) * p;
        let expect = c.drift.eval(t) - if t >= s1 { h } else { 0.0 };
        prop_assert!((qlc.drift.eval(t) - expect).abs() < 1e-12);
    }

    #[test]
    fn h_compensator_is_additive(r1 in 0.1f64..3.0, m1 in 0.2f64..3.0, r2 in 0.1f64..3.0, a in -3.0f64..3.0, t in 0.0f64..3.0) {
        let h = TruncationFunction::default();
        let k1 = cp_exp(r1, m1);
        let k2 = LevyMeasure::compound_poisson(r2, JumpLaw::point(if a == 0.0 { 1.0 } else { a }).unwrap()).unwrap();
        let c1 = PiiCharacteristics::levy(h, 0.0, 0.0, k1.clone()).unwrap();
        let c2 = PiiCharacteristics::levy(h, 0.0, 0.0, k2.clone()).unwrap();
        let c12 = PiiCharacteristics::levy(h, 0.0, 0.0, k1.sum(k2)).unwrap();
        let lhs = h_compensator(&c12, t).unwrap().value;
        let rhs = h_compensator(&c1, t).unwrap().value + h_compensator(&c2, t).unwrap().value;
        prop_assert!((lhs - rhs).abs() < 1e-8 * (1.0 + rhs.abs()));
    }

    #[test]
    fn truncation_is_odd(x in -10.0f64..10.0, th in 0.1f64..3.0) {
        for h in [TruncationFunction::clip(th).unwrap(), TruncationFunction::indicator(th).unwrap()] {
            prop_assert_eq!(h.eval(-x), -h.eval(x));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ito_coupling_is_pathwise_ordered(r1 in 0.2f64..2.0, extra in 0.0f64..2.0, mean in 0.3f64..2.0, seed in any::<u64>()) {
        let h = TruncationFunction::indicator(1.0).unwrap();
        let x = PiiCharacteristics::levy(h, 0.0, 0.3, cp_exp(r1, mean)).unwrap();
        let y0 = PiiCharacteristics::levy(h, 0.0, 0.3, cp_exp(r1 + extra, mean)).unwrap();
        // enough drift to cover the extra small jumps of Y
        let comp = h_compensator(&y0, 1.0).unwrap().value - h_compensator(&x, 1.0).unwrap().value;
        let y = PiiCharacteristics::levy(h, comp.max(0.0), 0.3, cp_exp(r1 + extra, mean)).unwrap();
        let grid: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
        let p = simulate_coupled(&x, &y, 1.0, &grid, 200, None, seed).unwrap();
        prop_assert_eq!(p.violations(1e-9), 0);
    }
}
