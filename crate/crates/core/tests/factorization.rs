use num_complex::Complex64;
use qmemory::davies::{
    build_jump_set, default_options as dense_options, propagate_observable_at, Coupling, DaviesGenerator,
    Observable, SpectralFunction,
};
use qmemory::model::{build_ising_ring, build_kitaev_torus, StabilizerModel};
use qmemory::pauli::{PauliOp, PauliPolynomial};
use qmemory::reduced::{
    autocorrelation, build_reduced_generator, default_options, function_polynomial, half_time_norm,
    propagate_reduced, stabilizer_product,
};

const TIMES: [f64; 3] = [0.1, 1.0, 10.0];

fn encoded(q: &PauliOp, f_poly: &PauliPolynomial) -> Observable {
    let qf = PauliPolynomial::from_op(q).mul(f_poly).unwrap();
    Observable::from_polynomial(&qf).unwrap()
}

fn check(m: &StabilizerModel, coupling: Coupling, logical: &str, dressing: &[usize], beta: f64) -> f64 {
    let h = SpectralFunction::thermal(beta, 1.0, 0.6).unwrap();
    let jumps = build_jump_set(m, coupling).unwrap();
    let q = m.logical(logical).unwrap().clone();
    let gen = DaviesGenerator::new(m, &jumps, &h).unwrap();
    let red = build_reduced_generator(m, &jumps, &h, &q).unwrap();
    let f = stabilizer_product(m, red.space(), dressing).unwrap();
    let x0 = encoded(&q, &function_polynomial(m, red.space(), &f).unwrap());
    let full = propagate_observable_at(&gen, &x0, &TIMES, &dense_options()).unwrap();
    let mut worst: f64 = 0.0;
    for (t, xt) in TIMES.iter().zip(&full) {
        let ft = propagate_reduced(&red, &f, *t, &default_options()).unwrap();
        let via_reduced = encoded(&q, &function_polynomial(m, red.space(), &ft).unwrap());
        worst = worst.max(xt.distance(&via_reduced));
        // the Gibbs-weighted overlap matches the reduced autocorrelation
        let c_full = gen.inner(&x0, xt);
        let c_red = autocorrelation(&red, m, &f, &[*t], &default_options()).unwrap()[0];
        assert!((c_full - Complex64::new(c_red, 0.0)).norm() < 1e-9, "{c_full} vs {c_red}");
    }
    worst
}

#[test]
fn ising_logicals_factorize() {
    let m = build_ising_ring(4).unwrap();
    for (q, dressing) in [("Z", vec![]), ("Z", vec![1]), ("Y", vec![]), ("X", vec![0, 2])] {
        let d = check(&m, Coupling::XOnly, q, &dressing, 0.8);
        assert!(d < 1e-8, "{q} {dressing:?}: {d}");
    }
}

#[test]
fn kitaev_logicals_factorize() {
    let m = build_kitaev_torus(2).unwrap();
    for q in ["Z1", "X2"] {
        let d = check(&m, Coupling::Both, q, &[], 0.7);
        assert!(d < 1e-8, "{q}: {d}");
    }
}

#[test]
fn autocorrelation_is_a_half_time_norm() {
    let m = build_ising_ring(4).unwrap();
    let h = SpectralFunction::thermal(1.1, 1.0, 0.5).unwrap();
    let jumps = build_jump_set(&m, Coupling::XOnly).unwrap();
    let red = build_reduced_generator(&m, &jumps, &h, m.logical("Z").unwrap()).unwrap();
    let f = stabilizer_product(&m, red.space(), &[]).unwrap();
    for t in [0.05, 0.3, 1.0, 4.0, 20.0] {
        let c = autocorrelation(&red, &m, &f, &[t], &default_options()).unwrap()[0];
        let n = half_time_norm(&red, &m, &f, t, &default_options()).unwrap();
        assert!((c - n).abs() < 1e-9, "t={t}: {c} vs {n}");
    }
}
