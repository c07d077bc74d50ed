use approx::assert_relative_eq;
use pdc_core::bounds::{
    asymptotic_rates, eps_b_bound, eps_c_bound, eps_e_bound, m_hat_lengths, SecurityTargets, TGrid,
};
use pdc_core::dists::PauliDist;
use pdc_core::{Error, PauliDistF32};

fn dep(mix: f64) -> PauliDist {
    PauliDist::depolarizing(mix, 2).unwrap()
}

#[test]
fn finite_rate_approaches_the_asymptote() {
    let targets = SecurityTargets::new(0.2, 1e-9, 1e-9).unwrap();
    let grid = TGrid::standard();
    let r_star = asymptotic_rates(&dep(0.05), &dep(0.05)).unwrap().r_star;
    let mut last = f64::NEG_INFINITY;
    for n in [1_000u64, 10_000, 100_000] {
        let rep = m_hat_lengths(&targets, n, &dep(0.05), &dep(0.05), &grid).unwrap();
        assert!(rep.r > last && rep.r < r_star);
        assert!(rep.eps_c <= 0.2 && rep.eps_e <= 1e-9 && rep.eps_b <= 1e-9);
        assert_eq!(rep.n2, rep.n1 as i64 - rep.sacrifice as i64 - rep.n3 as i64);
        last = rep.r;
    }
}

#[test]
fn targets_just_below_the_achieved_bounds_cost_symbols() {
    let grid = TGrid::standard();
    let d = dep(0.05);
    let base = m_hat_lengths(
        &SecurityTargets::new(0.2, 1e-9, 1e-9).unwrap(),
        10_000,
        &d,
        &d,
        &grid,
    )
    .unwrap();
    let tighter = m_hat_lengths(
        &SecurityTargets::new(0.01, 1e-12, 1e-12).unwrap(),
        10_000,
        &d,
        &d,
        &grid,
    )
    .unwrap();
    assert!(tighter.n1 <= base.n1);
    assert!(tighter.sacrifice >= base.sacrifice);
    assert!(tighter.n3 > base.n3);
}

#[test]
fn bounds_are_monotone_in_their_lengths() {
    let grid = TGrid::standard();
    let d = dep(0.1);
    let e: Vec<f64> = (0..6).map(|s| eps_e_bound(20, s * 10, &d, &grid)).collect();
    assert!(e.windows(2).all(|w| w[1] <= w[0]));
    let c: Vec<f64> = (0..6)
        .map(|k| eps_c_bound(20, 10 + 6 * k, &d, &grid).unwrap())
        .collect();
    assert!(c.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(eps_b_bound::<f64>(3, 5), 1.0 / 125.0);
}

#[test]
fn single_precision_tracks_double() {
    let d32 = PauliDistF32::depolarizing(0.05, 2).unwrap();
    let r32 = asymptotic_rates(&d32, &d32).unwrap();
    let r64 = asymptotic_rates(&dep(0.05), &dep(0.05)).unwrap();
    assert_relative_eq!(r32.r_star as f64, r64.r_star, max_relative = 1e-5);
}

#[test]
fn impossible_targets_are_reported() {
    assert!(SecurityTargets::new(0.0, 0.1, 0.1).is_err());
    let grid = TGrid::standard();
    let noisy = PauliDist::uniform(2).unwrap();
    let targets = SecurityTargets::new(1e-6, 1e-3, 1e-3).unwrap();
    match m_hat_lengths(&targets, 100, &noisy, &noisy, &grid) {
        Ok(rep) => assert!(rep.n2 <= 0),
        Err(e) => assert!(matches!(e, Error::Infeasible(_))),
    }
}
