use qmemory::davies::{build_jump_set, Coupling, SpectralFunction};
use qmemory::model::{build_kitaev_torus, StabilizerKind, SyndromeState};
use qmemory::reduced::{
    autocorrelation, build_reduced_generator, build_reduced_generator_on, default_options, kitaev_z_generator,
    propagate_reduced, stabilizer_product, ReducedGenerator,
};

fn restrict(states: &[SyndromeState], kind: StabilizerKind) -> Vec<SyndromeState> {
    states.iter().filter(|s| s.sector == kind).cloned().collect()
}

/// Full generator on both sectors, plus the plaquette-only and star-only ones.
fn generators(k: usize, beta: f64) -> (qmemory::model::StabilizerModel, [ReducedGenerator; 3]) {
    let m = build_kitaev_torus(k).unwrap();
    let h = SpectralFunction::thermal(beta, 1.0, 0.5).unwrap();
    let jumps = build_jump_set(&m, Coupling::Both).unwrap();
    let q = m.logical("Z1").unwrap().clone();
    let full = build_reduced_generator(&m, &jumps, &h, &q).unwrap();
    let z = kitaev_z_generator(&m, &h, &q).unwrap();
    let star = build_reduced_generator_on(&m, &jumps, &h, &q, &[StabilizerKind::Star]).unwrap();
    (m, [full, z, star])
}

#[test]
fn full_generator_is_a_kronecker_sum_with_a_trivial_star_factor() {
    for k in [2, 3] {
        let (_m, [full, z, star]) = generators(k, 0.9);
        assert_eq!(full.space().len(), z.space().len() * star.space().len());
        assert!(star.is_unsigned());
        let (a, b, c) = (full.matrix().unwrap(), z.matrix().unwrap(), star.matrix().unwrap());
        let mut worst: f64 = 0.0;
        let mut diag_worst: f64 = 0.0;
        for r in 0..full.space().len() {
            let states = full.space().decode(r);
            let rz = z.space().encode(&restrict(&states, StabilizerKind::Plaquette)).unwrap();
            let rs = star.space().encode(&restrict(&states, StabilizerKind::Star)).unwrap();
            for (col, v) in a.row(r) {
                let cs = full.space().decode(col);
                let cz = z.space().encode(&restrict(&cs, StabilizerKind::Plaquette)).unwrap();
                let cc = star.space().encode(&restrict(&cs, StabilizerKind::Star)).unwrap();
                let mut expected = 0.0;
                if cc == rs {
                    expected += b.get(rz, cz);
                }
                if cz == rz {
                    expected += c.get(rs, cc);
                }
                if col == r {
                    // exit rates of both sectors summed in a different order
                    diag_worst = diag_worst.max((v - expected).abs() / expected.abs().max(1.0));
                } else {
                    worst = worst.max((v - expected).abs());
                }
            }
            // nothing is missing from the row
            let row_sum: f64 = a.row(r).map(|(_, v)| v.abs()).sum();
            let expected_sum: f64 = b.row(rz).map(|(_, v)| v.abs()).sum::<f64>()
                + c.row(rs).map(|(_, v)| v.abs()).sum::<f64>()
                - (b.get(rz, rz).abs() + c.get(rs, rs).abs())
                + (b.get(rz, rz) + c.get(rs, rs)).abs();
            diag_worst = diag_worst.max((row_sum - expected_sum).abs());
        }
        assert_eq!(worst, 0.0, "K={k}");
        assert!(diag_worst < 1e-13, "K={k}: {diag_worst}");
    }
}

#[test]
fn z_sector_autocorrelation_matches_full() {
    for k in [2, 3] {
        let (m, [full, z, _]) = generators(k, 1.2);
        let f_full = stabilizer_product(&m, full.space(), &[]).unwrap();
        let f_z = stabilizer_product(&m, z.space(), &[]).unwrap();
        let times = [0.05, 0.5, 2.0, 10.0];
        let a = autocorrelation(&full, &m, &f_full, &times, &default_options()).unwrap();
        let b = autocorrelation(&z, &m, &f_z, &times, &default_options()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12, "K={k}: {x} vs {y}");
        }
        // propagated functions agree pointwise once lifted
        let pf = propagate_reduced(&full, &f_full, 1.0, &default_options()).unwrap();
        let pz = propagate_reduced(&z, &f_z, 1.0, &default_options()).unwrap();
        for (r, v) in pf.iter().enumerate() {
            let states = full.space().decode(r);
            let rz = z.space().encode(&restrict(&states, StabilizerKind::Plaquette)).unwrap();
            assert!((v - pz[rz]).abs() < 1e-12);
        }
    }
}

#[test]
fn z_sector_generator_is_the_same_sparse_matrix() {
    for k in [2, 3] {
        let m = build_kitaev_torus(k).unwrap();
        let h = SpectralFunction::thermal(0.7, 1.0, 0.5).unwrap();
        let q = m.logical("Z1").unwrap().clone();
        let x_only = build_jump_set(&m, Coupling::XOnly).unwrap();
        let via_x_only = build_reduced_generator(&m, &x_only, &h, &q).unwrap();
        let both = build_jump_set(&m, Coupling::Both).unwrap();
        let restricted = build_reduced_generator_on(&m, &both, &h, &q, &[StabilizerKind::Plaquette]).unwrap();
        let z = kitaev_z_generator(&m, &h, &q).unwrap().matrix().unwrap();
        assert_eq!(via_x_only.matrix().unwrap(), z);
        assert_eq!(restricted.matrix().unwrap(), z);
    }
}
