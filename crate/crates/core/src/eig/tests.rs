use super::*;
use crate::lattice::{assemble, build_chain, Boundary, ModelSpec};
use crate::oracle;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_complex(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix<f64> {
    DenseMatrix::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

#[test]
fn two_by_two_closed_form() {
    let m = DenseMatrix::from_real_rows(&[vec![0.0, 1.5], vec![0.5, 0.0]]).unwrap();
    let s = eigenvalues(&m).unwrap();
    let w = 0.75f64.sqrt();
    assert!((s.eigenvalues[0] - Complex64::new(-w, 0.0)).norm() < 1e-14);
    assert!((s.eigenvalues[1] - Complex64::new(w, 0.0)).norm() < 1e-14);
}

#[test]
fn hn_strong_nonreciprocity_is_imaginary() {
    let chain = build_chain(&ModelSpec::hn(1.0, 1.5, 8, Boundary::Obc)).unwrap();
    let s = eigenvalues(&assemble(&chain)).unwrap();
    assert_eq!(s.len(), 8);
    assert!(s.max_abs_re() < 1e-12, "{:?}", s.eigenvalues);
    assert!(s.max_abs_im() > 0.5);
}

#[test]
fn random_matrix_matches_polynomial_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let m = random_complex(6, &mut rng);
        let s = eigenvalues(&m).unwrap();
        let roots = oracle::eigenvalues_by_polynomial(m.as_slice(), 6);
        let d = oracle::multiset_distance(&s.eigenvalues, &roots);
        assert!(d < 1e-8, "distance {d}");
    }
}

#[test]
fn hermitian_chain_sine_modes() {
    let chain = build_chain(&ModelSpec::hn(1.0, 0.0, 10, Boundary::Obc)).unwrap();
    let s = eigenpairs(&assemble(&chain)).unwrap();
    let vecs = s.eigenvectors.as_ref().unwrap();
    for (e, v) in s.eigenvalues.iter().zip(vecs) {
        // match to the analytic mode with this energy
        let k = (1..=10)
            .min_by(|&a, &b| {
                let ea = 2.0 * (a as f64 * std::f64::consts::PI / 11.0).cos();
                let eb = 2.0 * (b as f64 * std::f64::consts::PI / 11.0).cos();
                (ea - e.re).abs().partial_cmp(&(eb - e.re).abs()).unwrap()
            })
            .unwrap();
        let (_, mode) = oracle::uniform_nonreciprocal_mode(1.0, 1.0, 10, k);
        let norm = mode.iter().map(|x| x * x).sum::<f64>().sqrt();
        // up to sign: compare |overlap|
        let overlap: f64 = mode.iter().zip(v).map(|(a, b)| a / norm * b.re).sum();
        assert!((overlap.abs() - 1.0).abs() < 1e-10, "k={k} overlap={overlap}");
        assert!(v.iter().all(|z| z.im.abs() < 1e-12));
    }
}

#[test]
fn hn_eigenvectors_follow_gauge_profile() {
    let chain = build_chain(&ModelSpec::hn(1.0, 0.5, 20, Boundary::Obc)).unwrap();
    let s = eigenpairs(&assemble(&chain)).unwrap();
    let vecs = s.eigenvectors.as_ref().unwrap();
    for (e, v) in s.eigenvalues.iter().zip(vecs) {
        let k = (1..=20)
            .min_by(|&a, &b| {
                let ea = oracle::uniform_nonreciprocal_mode(1.5, 0.5, 20, a).0;
                let eb = oracle::uniform_nonreciprocal_mode(1.5, 0.5, 20, b).0;
                (ea - e.re).abs().partial_cmp(&(eb - e.re).abs()).unwrap()
            })
            .unwrap();
        let (energy, mode) = oracle::uniform_nonreciprocal_mode(1.5, 0.5, 20, k);
        assert!((energy - e.re).abs() < 1e-10);
        let norm = mode.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (a, z) in mode.iter().zip(v) {
            assert!((a.abs() / norm - z.norm()).abs() < 1e-9);
        }
    }
}

#[test]
fn jordan_block() {
    let m = DenseMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    let s = eigenpairs(&m).unwrap();
    assert!(s.eigenvalues.iter().all(|z| z.norm() == 0.0));
    assert!(s.residual_max().unwrap() <= 1e-12);
    for v in s.eigenvectors.unwrap() {
        assert!((v[0].norm() - 1.0f64).abs() < 1e-12);
    }
}

#[test]
fn residuals_and_norms_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [1usize, 2, 3, 7, 30, 80] {
        let m = random_complex(n, &mut rng);
        let s = eigenpairs(&m).unwrap();
        let f = m.frobenius_norm();
        assert_eq!(s.len(), n);
        for (r, v) in s.residuals.iter().zip(s.eigenvectors.as_ref().unwrap()) {
            assert!(*r <= 1e-12 * f, "n={n} residual {r}");
            let nrm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((nrm - 1.0).abs() < 1e-12);
        }
        let trace: Complex64 = s.eigenvalues.iter().sum();
        assert!((trace - m.trace()).norm() < 1e-10 * f.max(1.0));
    }
}

#[test]
fn degenerate_identity_gives_independent_vectors() {
    let m = DenseMatrix::<f64>::identity(4);
    let s = eigenpairs(&m).unwrap();
    let v = s.eigenvectors.unwrap();
    for i in 0..4 {
        for j in 0..i {
            let ov: Complex64 = v[i].iter().zip(&v[j]).map(|(a, b)| a.conj() * b).sum();
            assert!(ov.norm() < 1e-10, "vectors {i},{j} overlap {ov}");
        }
    }
}

#[test]
fn diagonal_similarity_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = random_complex(12, &mut rng);
    let d: Vec<f64> = (0..12).map(|_| rng.gen_range(0.2..5.0)).collect();
    let scaled = DenseMatrix::from_fn(12, |i, j| m[(i, j)] * d[j] / d[i]);
    let a = eigenvalues(&m).unwrap().eigenvalues;
    let b = eigenvalues(&scaled).unwrap().eigenvalues;
    assert!(oracle::greedy_distance(&a, &b) < 1e-9 * m.frobenius_norm());
}

#[test]
fn real_matrices_have_conjugate_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = DenseMatrix::from_fn(15, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
    let e = eigenvalues(&m).unwrap().eigenvalues;
    let conj: Vec<Complex64> = e.iter().map(|z| z.conj()).collect();
    assert!(oracle::greedy_distance(&e, &conj) < 1e-10);
}

#[test]
fn symmetric_tridiagonal_cases() {
    let s = symmetric_tridiagonal_eigen(&[0.0; 3], &[1.0, 1.0]).unwrap();
    let r2 = 2f64.sqrt();
    for (z, w) in s.eigenvalues.iter().zip([-r2, 0.0, r2]) {
        assert!((z.re - w).abs() < 1e-14);
    }
    let s = symmetric_tridiagonal_eigen(&[5.0], &[]).unwrap();
    assert_eq!(s.eigenvalues, vec![Complex64::new(5.0, 0.0)]);
    assert!(symmetric_tridiagonal_eigen(&[1.0, 2.0], &[]).is_err());
}

#[test]
fn symmetric_tridiagonal_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let d: Vec<f64> = (0..25).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let e: Vec<f64> = (0..24).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s = symmetric_tridiagonal_eigen(&d, &e).unwrap();
    let v = s.eigenvectors.as_ref().unwrap();
    for i in 0..25 {
        for j in 0..=i {
            let ov: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a.re * b.re).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((ov - want).abs() < 1e-12);
        }
    }
    assert!(s.residual_max().unwrap() < 1e-13);
}

#[test]
fn single_precision_solver() {
    let m = DenseMatrix::<f32>::from_real_rows(&[vec![0.0, 1.5], vec![0.5, 0.0]]).unwrap();
    let s = eigenpairs(&m).unwrap();
    assert!((s.eigenvalues[1].re - 0.75f32.sqrt()).abs() < 1e-6);
}

#[test]
fn rejects_non_finite() {
    let m = DenseMatrix::from_real_rows(&[vec![f64::NAN, 0.0], vec![0.0, 1.0]]).unwrap();
    assert!(eigenvalues(&m).is_err());
}

#[test]
fn degenerate_hermitian_ring() {
    // exactly paired +-k levels once stalled the shifted sweeps
    for l in [100usize, 120] {
        let m = assemble(&build_chain(&ModelSpec::hn(1.0, 0.0, l, Boundary::Pbc)).unwrap());
        let s = eigenvalues(&m).unwrap();
        let mut want: Vec<f64> = (0..l).map(|k| 2.0 * (std::f64::consts::TAU * k as f64 / l as f64).cos()).collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, w) in s.eigenvalues.iter().zip(want) {
            assert!((e.re - w).abs() < 1e-12 && e.im.abs() < 1e-12);
        }
    }
}

#[test]
fn one_way_bonds_give_finite_vectors() {
    // v - gamma = 0: every even bond hops one way only, so shifted solves overflow without rescaling
    let chain = build_chain(&ModelSpec::<f64>::dimer(-0.5, 1.0, 1.0, 1, 30, Boundary::Obc)).unwrap();
    let s = eigenpairs(&assemble(&chain)).unwrap();
    for v in s.eigenvectors.as_ref().unwrap() {
        assert!(v.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        assert!((super::inverse::vector_norm(v) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn nan_entries_poison_the_norm() {
    let v = [Complex64::new(f64::NAN, 0.0), Complex64::new(1.0, 0.0)];
    assert!(super::inverse::vector_norm(&v).is_nan());
}
