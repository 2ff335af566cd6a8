use super::generator::DaviesGenerator;
use super::observable::Observable;
use crate::error::{Error, Result};
use crate::expm::{expmv, KrylovOptions, KrylovStats};

/// Default tolerance for observable propagation.
pub fn default_options() -> KrylovOptions {
    KrylovOptions {
        tol: 1e-11,
        ..KrylovOptions::default()
    }
}

/// `e^{tL}(X)`.
pub fn propagate_observable(
    gen: &DaviesGenerator,
    x: &Observable,
    t: f64,
    opts: &KrylovOptions,
) -> Result<(Observable, KrylovStats)> {
    if x.n_qubits() != gen.n_qubits() {
        return Err(Error::DimensionMismatch {
            left: x.n_qubits(),
            right: gen.n_qubits(),
        });
    }
    let (data, stats) = expmv(gen, t, x.data(), opts)?;
    Ok((Observable::from_data(x.n_qubits(), data)?, stats))
}

/// `e^{tL}(X)` at each requested time (ascending or not), stepping
/// incrementally between sorted times.
pub fn propagate_observable_at(
    gen: &DaviesGenerator,
    x: &Observable,
    times: &[f64],
    opts: &KrylovOptions,
) -> Result<Vec<Observable>> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut out: Vec<Option<Observable>> = vec![None; times.len()];
    let mut current = x.clone();
    let mut t_now = 0.0;
    for i in order {
        let t = times[i];
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("time must be finite and non-negative, got {t}")));
        }
        current = propagate_observable(gen, &current, t - t_now, opts)?.0;
        t_now = t;
        out[i] = Some(current.clone());
    }
    Ok(out.into_iter().map(|o| o.expect("every time visited")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::davies::jumps::{build_jump_set, Coupling};
    use crate::davies::spectral::SpectralFunction;
    use crate::model::build_ising_ring;
    use crate::pauli::{Pauli, PauliOp};

    #[test]
    fn relaxes_to_gibbs_mean() {
        let m = build_ising_ring(4).unwrap();
        let jumps = build_jump_set(&m, Coupling::XOnly).unwrap();
        let h = SpectralFunction::thermal(0.5, 1.0, 1.0).unwrap();
        let gen = DaviesGenerator::new(&m, &jumps, &h).unwrap();
        let z1 = Observable::from_pauli(&PauliOp::single(4, 0, Pauli::Z)).unwrap();
        let (t0, _) = propagate_observable(&gen, &z1, 0.0, &default_options()).unwrap();
        assert_eq!(t0, z1);
        let (late, _) = propagate_observable(&gen, &z1, 60.0, &default_options()).unwrap();
        let zero = Observable::zeros(4).unwrap();
        assert!(late.max_abs() < 1e-8, "{}", late.distance(&zero));

        // bond observable relaxes to its Gibbs mean times the identity
        let bond = Observable::from_pauli(&m.stabilizers()[0].op).unwrap();
        let mean = gen.gibbs_mean(&bond);
        let (late, _) = propagate_observable(&gen, &bond, 60.0, &default_options()).unwrap();
        let target = Observable::identity(4).unwrap().scale(mean);
        assert!(late.distance(&target) < 1e-8);
        assert!(mean.re > 0.0 && mean.im.abs() < 1e-15);
    }
}
