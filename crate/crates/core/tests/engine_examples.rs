use decoherence_core::timescales::t_cg_standoff;
use decoherence_core::wigner::*;

/// Packet elongated along the stable manifold p = x of V = -x^2/2: width 1
/// along u = p - x, 0.05 along s = p + x.
fn squeezed_packet(grid: &PhaseSpaceGrid, hbar: f64) -> WignerField {
    let (su2, ss2) = (1.0f64, 0.05f64 * 0.05);
    let var = (su2 + ss2) / 4.0;
    let packet = GaussianPacket::new(0.0, 0.0, var.sqrt(), var.sqrt()).with_covariance((ss2 - su2) / 4.0);
    WignerField::gaussian(grid, &packet, hbar).unwrap()
}

fn spread_u(d: &Diagnostics) -> f64 {
    (d.var_p - 2.0 * d.cov_xp + d.var_x).sqrt()
}

#[test]
fn zero_length_run_returns_initial_snapshot() {
    let g = PhaseSpaceGrid::symmetric(32, 6.0, 6.0).unwrap();
    let f = init_gaussian(&g, 0.0, 0.0, 1.0, 1.0, 1.0).unwrap().field;
    let spec = EvolutionSpec::scaled(PolynomialPotential::harmonic(1.0, 1.0), 0.01, 0.0);
    let run = evolve(&f, &spec).unwrap();
    assert_eq!(run.steps, 0);
    assert_eq!(run.snapshots.len(), 1);
    assert_eq!(run.snapshots[0].values, f.values);
}

#[test]
fn diffusion_floors_the_squeezed_width_near_the_standoff() {
    let g = PhaseSpaceGrid::symmetric(256, 5.0, 5.0).unwrap();
    let f = squeezed_packet(&g, 0.01);
    let d = 0.02;
    let mut spec = EvolutionSpec::scaled(PolynomialPotential::new([0.0, 0.0, -0.5, 0.0, 0.0]), 1.0, 2.5);
    spec.hbar = 0.01;
    spec.diffusion = d;
    spec.dt = 0.9 * stability_check(&spec, &g);
    spec.snapshot_stride = 50;
    let run = evolve(&f, &spec).unwrap();
    let last = run.diagnostics.last().unwrap();
    assert!((last.norm - 1.0).abs() < 1e-3, "norm {}", last.norm);

    // without diffusion the width would have dropped by e^-2.5 = 0.08
    let width = spread_u(last);
    let floor = (2.0 * d * t_cg_standoff(1.0, 1.0, d).unwrap()).sqrt();
    let ratio = width / floor;
    assert!((0.5..=2.0).contains(&ratio), "width {width} vs standoff {floor}");

    // u obeys du = -u dt + dW with <dW^2> = 2D dt, so Var(u) relaxes to D
    for diag in &run.diagnostics {
        let decay = (-2.0 * diag.time).exp();
        let expected = (decay + d * (1.0 - decay)).sqrt();
        assert!((spread_u(diag) / expected - 1.0).abs() < 0.02, "t = {}", diag.time);
    }
    assert!(width > 1.5 * (-2.5f64).exp());
}
