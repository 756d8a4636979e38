use approx::assert_relative_eq;
use num_complex::Complex64;

use cavity_dit::features::{compare_methods, dit_metrics, extract_features, FeatureKind};
use cavity_dit::liouville::{expectation, solve_steady, DensityMatrix};
use cavity_dit::moments::moment_steady_state;
use cavity_dit::numerics::ComplexMatrix;
use cavity_dit::spectra::regression_spectrum;
use cavity_dit::{build_liouvillian, build_operators, iof_spectrum, ipm_transmission, FrequencyGrid, Normalization, Port, SystemParams};

fn params(gamma_total: f64, gamma: f64, g: f64, delta: f64, pump: f64) -> SystemParams {
    SystemParams {
        gamma,
        ..SystemParams::from_total_decay(gamma_total, g, delta, pump)
    }
}

/// Classical RK4 on dρ/dt = L ρ from the vacuum.
fn evolve(p: &SystemParams, t_end: f64, dt: f64) -> ComplexMatrix {
    let ops = build_operators(p).unwrap();
    let l = build_liouvillian(&ops, p, true).unwrap();
    let mut rho = DensityMatrix::basis(ops.dim, 0).into_matrix();
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    for _ in 0..(t_end / dt).round() as usize {
        let k1 = l.apply(&rho);
        let k2 = l.apply(&(&rho + &k1.scale(half)));
        let k3 = l.apply(&(&rho + &k2.scale(half)));
        let k4 = l.apply(&(&rho + &k3.scale(full)));
        let sum = &(&k1 + &k2.scale(two)) + &(&k3.scale(two) + &k4);
        rho = &rho + &sum.scale(sixth);
    }
    rho
}

#[test]
fn steady_state_is_long_time_limit() {
    let p = SystemParams {
        n_max: 8,
        ..params(1.0, 0.1, 0.5, 0.0, 0.2)
    };
    let sol = solve_steady(&p, true).unwrap();
    let late = evolve(&p, 300.0, 0.02);
    let n_late = cavity_dit::liouville::trace_product(&late, &sol.ops.number()).re;
    assert_relative_eq!(sol.photon_number(), n_late, max_relative = 1e-8);
    // Frozen from the time-evolution oracle above; the weak-excitation
    // closed form gives 0.22896 here.
    assert!((sol.photon_number() - 0.23452).abs() < 1e-5, "{}", sol.photon_number());
}

#[test]
fn moments_track_full_model_at_weak_pump() {
    // Dot saturation is outside the closure; at P = 0.1κ the gap reaches
    // about 1.1% on resonance, so this checks half that pump.
    for (gt, g, delta) in [(15.0, 7.5, 22.5), (10.0, 5.0, 0.0), (35.0, 17.5, 52.5)] {
        let p = params(gt, 1.0, g, delta, 0.05 * gt);
        let full = solve_steady(&p, true).unwrap().photon_number();
        let m = moment_steady_state(&p).unwrap();
        assert!(((m.n_a - full) / full).abs() < 0.01, "Γ = {gt}: {} vs {full}", m.n_a);
    }
}

#[test]
fn strong_coupling_emission_doublet() {
    let p = SystemParams {
        n_max: 3,
        ..params(1.0, 0.1, 10.0, 0.0, 0.01)
    };
    let sol = solve_steady(&p, true).unwrap();
    let grid = FrequencyGrid::uniform(-15.0, 15.0, 601).unwrap();
    let s = regression_spectrum(&sol.liouvillian, &sol.rho, &sol.ops.a.adjoint(), &sol.ops.a, &grid).unwrap();
    let spectrum = cavity_dit::Spectrum::new(grid.clone(), s, cavity_dit::Method::Ipm, cavity_dit::Channel::Axis, Normalization::Raw, p).unwrap();
    let m = dit_metrics(&spectrum).unwrap();
    let expected = 2.0 * (100.0_f64 - ((1.0 - 0.1) / 2.0_f64).powi(2)).sqrt();
    assert!((m.splitting - expected).abs() <= 2.0 * grid.step().unwrap(), "{} vs {expected}", m.splitting);
    assert_eq!(m.dit.kind, FeatureKind::Dip);
}

#[test]
fn ipm_dit_is_central_dip() {
    let p = params(15.0, 1.0, 7.5, 0.0, 2.5);
    let grid = FrequencyGrid::default_for(&p);
    let s = ipm_transmission(&p, &grid, Normalization::UnitMax).unwrap();
    let m = dit_metrics(&s).unwrap();
    assert_eq!(m.dit.kind, FeatureKind::Dip);
    assert!(m.dit.position.abs() <= grid.step().unwrap());
    assert_eq!(m.left_polariton.kind, FeatureKind::Peak);
    assert_relative_eq!(m.left_polariton.position, -m.right_polariton.position, epsilon = 1e-9);
}

#[test]
fn detuned_through_port_has_unequal_dips() {
    let p = params(15.0, 1.0, 7.5, 22.5, 0.0);
    let grid = FrequencyGrid::default_for(&p);
    let s = iof_spectrum(&p, &grid, Port::Through).unwrap();
    let dips: Vec<_> = extract_features(&s).into_iter().filter(|f| f.kind == FeatureKind::Dip).collect();
    assert_eq!(dips.len(), 2);
    let (wa, wb) = (dips[0].fwhm.unwrap(), dips[1].fwhm.unwrap());
    assert!(wa > 2.0 * wb, "{wa} vs {wb}");
    // The narrow, atom-like dip sits near the dot frequency.
    assert!((dips[1].position - 22.5).abs() < 5.0);
}

#[test]
fn methods_agree_on_splitting_in_bad_cavity() {
    let p = params(35.0, 1.0, 17.5, 0.0, 2.5);
    let grid = FrequencyGrid::default_for(&p);
    let iof = iof_spectrum(&p, &grid, Port::Through).unwrap().normalized(Normalization::UnitMax).unwrap();
    let ipm = ipm_transmission(&p, &grid, Normalization::UnitMax).unwrap();
    let r = compare_methods(&iof, &ipm).unwrap();
    let (a, b) = (r.splitting_iof.unwrap(), r.splitting_ipm.unwrap());
    assert!((a - b).abs() / a < 0.05, "{a} vs {b}");
    assert_eq!(r.dit_kind_iof, Some(FeatureKind::Peak));
    assert_eq!(r.dit_kind_ipm, Some(FeatureKind::Dip));
}

#[test]
fn pumped_state_has_no_coherence() {
    let p = params(15.0, 1.0, 7.5, 3.0, 2.5);
    let sol = solve_steady(&p, true).unwrap();
    assert!(expectation(&sol.rho, &sol.ops.a).norm() < 1e-12);
    assert!(expectation(&sol.rho, &sol.ops.sigma).norm() < 1e-12);
}
