mod common;

use hsx_core::continuation::ResurrectedCell;
use hsx_core::energy_ledger::{compare, refined_grid};
use hsx_core::weak_form::{weak_residual, ScaledSlope, TestFunction, Window};
use hsx_core::{continue_with, solve_at, ContinuationPolicy, HsError, InitialProfile, Solution};

use common::{cusp, two_cell};

#[test]
fn weak_form_sees_a_wrong_fan() {
    let s = Solution::new(cusp(), &ContinuationPolicy::uniform(&cusp(), 1.0)).unwrap();
    let window = Window::new(-1.0, 3.0, 1.0, 3.0);
    let tests = TestFunction::grid(&window, 4, 2);
    assert!(weak_residual(&s, &window, &tests).unwrap().max <= 1e-6);
    let fault = ScaledSlope {
        inner: &s,
        cell: 0,
        factor: 0.5,
    };
    assert!(weak_residual(&fault, &window, &tests).unwrap().max > 1e-2);
}

#[test]
fn weak_form_rejects_tests_outside_window() {
    let s = Solution::dissipative(cusp());
    let window = Window::new(0.0, 1.0, 0.0, 1.0);
    let outside = TestFunction {
        cx: 0.9,
        rx: 0.5,
        ct: 0.5,
        rt: 0.1,
    };
    assert!(matches!(
        weak_residual(&s, &window, &[outside]),
        Err(HsError::SupportOutsideWindow)
    ));
}

#[test]
fn flat_data_stays_put() {
    let p = InitialProfile::flat(-1.0, 1.0, 0.7).unwrap();
    let f = solve_at(&p, 10.0);
    assert_eq!(f.eval_u(0.0), 0.7);
    assert_eq!(f.positions, vec![6.0, 8.0]);
    let r = compare(
        &p,
        &[("d".into(), ContinuationPolicy::dissipative())],
        &[0.0, 10.0],
    )
    .unwrap();
    assert_eq!(r.series["d"], vec![0.0, 0.0]);
}

#[test]
fn continuation_matches_fan_formulas() {
    let k = 0.25;
    let f = continue_with(&cusp(), &ContinuationPolicy::uniform(&cusp(), k), 3.0).unwrap();
    let fan = ResurrectedCell {
        birth: 1.0,
        kappa: k,
        parent_energy: 4.0,
    };
    assert_eq!(f.cells[0].width, fan.width(3.0));
    assert_eq!(f.cells[0].slope, fan.slope(3.0));
    assert_eq!(f.integral_w2(), 4.0 * k);
}

#[test]
fn policy_recovery_from_energy_series() {
    let p = InitialProfile::new(vec![0.0, 1.0, 2.0, 2.5], vec![-1.0, 2.0, -4.0], 0.3).unwrap();
    let grid = refined_grid(&p, 6.0, 3);
    let candidates = [
        ContinuationPolicy::dissipative(),
        ContinuationPolicy::dissipative().with(0, 0.5),
        ContinuationPolicy::dissipative().with(2, 1e-3),
        ContinuationPolicy::uniform(&p, 1.0),
    ];
    for pol in candidates {
        let s = Solution::new(p.clone(), &pol).unwrap();
        let matches = grid
            .iter()
            .all(|&t| s.total_energy(t) == p.survivor_mass(t));
        assert_eq!(matches, pol.is_dissipative(), "{pol:?}");
    }
}

#[test]
fn energy_is_continuous_at_time_zero() {
    for p in common::corpus(8).into_iter().chain([cusp(), two_cell()]) {
        for k in [0.0, 1.0] {
            let s = Solution::new(p.clone(), &ContinuationPolicy::uniform(&p, k)).unwrap();
            let limsup = [1e-3, 1e-6, 1e-9]
                .iter()
                .map(|&t| s.total_energy(t))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((limsup - p.total_energy()).abs() <= 1e-12 * p.total_energy().max(1.0));
        }
    }
}

#[test]
fn invalid_inputs_name_the_offender() {
    assert!(matches!(
        InitialProfile::new(vec![0.0, 1.0, 1.0], vec![1.0, 1.0], 0.0),
        Err(HsError::NonIncreasingBreakpoint { index: 2 })
    ));
    let err = ContinuationPolicy::dissipative()
        .with(0, -1.0)
        .validate(&cusp())
        .unwrap_err();
    assert!(err.to_string().contains("0"), "{err}");
    assert!(ContinuationPolicy::from_json(r#"{"resurrect":{"x":1}}"#).is_err());
    let p = InitialProfile::from_json(r#"{"breakpoints":[0,1],"slopes":[-2],"anchor":0}"#).unwrap();
    assert_eq!(p, cusp());
}
