//! End-to-end runs on small fractal graphs.

use walklab::asymptotics::{EtaZeta, JumpProfile};
use walklab::families::{expected_exponents, generate, FamilySpec};
use walklab::graph::io::{read_graph, write_graph};
use walklab::linalg::fit_loglog;
use walklab::graph::{volume_profile, BaseConvention, SafeWindow};
use walklab::operators::{jump_kernel, lazy_pair, natural_walk, psi, psi_with, PsiRoute};
use walklab::verify::{
    random_functions, safe_horizon, verify_nash, verify_pseudo_poincare, verify_threshold, Clock,
};

#[test]
fn gasket_file_round_trip_keeps_the_decay_curve() {
    let g = generate(&FamilySpec::gasket(4)).unwrap();
    let h = read_graph(&write_graph(&g)).unwrap();
    assert_eq!(h.boundary(), g.boundary());
    let w = SafeWindow::new(&g);
    let ns: Vec<usize> = (0..20).collect();
    let a = psi(&lazy_pair(&natural_walk(&g)).unwrap(), &ns, &w.base, None).unwrap();
    let b = psi(&lazy_pair(&natural_walk(&h)).unwrap(), &ns, &w.base, None).unwrap();
    assert_eq!(a.values(), b.values());
}

#[test]
fn lattice_lazy_walk_is_gaussian() {
    let spec = FamilySpec::lattice(41, 2);
    let g = generate(&spec).unwrap();
    let (alpha, gamma) = expected_exponents(&spec).unwrap();
    assert_eq!((alpha, gamma), (2.0, 2.0));
    let w = SafeWindow::new(&g);
    let v = volume_profile(&g, BaseConvention::Median, &w).unwrap();
    let q = lazy_pair(&natural_walk(&g)).unwrap();
    let ns: Vec<usize> = (1..=safe_horizon(w.r_max, gamma, None)).collect();
    let curve = psi_with(&q, &ns, &w.base, None, PsiRoute::Incremental).unwrap();
    let rep = verify_threshold(&curve, &v, Clock::Power(gamma), 10.0).unwrap();
    assert!(rep.pass, "{}", rep.to_json());
    // Reflection at the box faces flattens the tail; the diffusive slope
    // shows over the first quarter of the window.
    let quarter = ns.len() / 4;
    let xs: Vec<f64> = ns[4..quarter].iter().map(|&n| n as f64).collect();
    let slope = fit_loglog(&xs, &curve.values()[4..quarter]).slope;
    assert!((slope + 1.0).abs() < 0.05, "slope {slope}");
}

#[test]
fn jump_kernel_functional_inequalities_on_gasket_four() {
    let spec = FamilySpec::gasket(4);
    let g = generate(&spec).unwrap();
    let (_, gamma) = expected_exponents(&spec).unwrap();
    let w = SafeWindow::new(&g);
    let v = volume_profile(&g, BaseConvention::Median, &w).unwrap();
    let phi = JumpProfile::power(1.5).unwrap();
    let k = jump_kernel(&g, &phi, &v).unwrap();
    let ez = EtaZeta::new(phi, gamma, 1e4).unwrap();
    let fs = random_functions(g.measures(), 30, 3);
    let pp = verify_pseudo_poincare(&k, &g, &ez, &[1.0, 2.0, 4.0], &fs, 100.0).unwrap();
    assert!(pp.pass, "{}", pp.to_json());
    let nash = verify_nash(&k, &v, &ez, None, &fs, 100.0).unwrap();
    assert!(nash.pass, "{}", nash.to_json());
}
