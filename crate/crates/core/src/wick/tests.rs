use super::*;
use crate::funcspace::GaussianPacket;
use crate::geometry::ThetaMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn field() -> FreeField {
    FreeField::new(1.0, 2).unwrap()
}

fn packet(center: [f64; 2], width: f64, carrier: [f64; 2]) -> TestFunction {
    TestFunction::Gaussian(GaussianPacket::new(center.to_vec(), vec![width; 2], carrier.to_vec(), c(1.0, 0.0)).unwrap())
}

/// The three reference packets of the quadrature oracle.
fn reference() -> (TestFunction, TestFunction, TestFunction) {
    (packet([0.0, 0.0], 1.0, [0.0, 0.0]), packet([0.3, 1.2], 1.1, [0.0, 0.5]), packet([-0.2, -1.0], 0.9, [0.0, 0.0]))
}

fn tags(t: &[f64]) -> TwistTagList {
    TwistTagList::new(t.iter().map(|v| ThetaMatrix::d2(*v)).collect()).unwrap()
}

#[test]
fn pairing_counts_and_order() {
    assert!(enumerate_pairings(3).is_empty());
    let counts: Vec<usize> = [2, 4, 6, 8].iter().map(|n| enumerate_pairings(*n).len()).collect();
    assert_eq!(counts, vec![1, 3, 15, 105]);
    let four: Vec<Vec<(usize, usize)>> = enumerate_pairings(4).into_iter().map(|p| p.pairs).collect();
    assert_eq!(four, vec![vec![(0, 1), (2, 3)], vec![(0, 2), (1, 3)], vec![(0, 3), (1, 2)]]);
    for p in enumerate_pairings(8) {
        let mut slots: Vec<usize> = p.pairs.iter().flat_map(|(i, j)| [*i, *j]).collect();
        assert!(p.pairs.iter().all(|(i, j)| i < j));
        slots.sort();
        assert_eq!(slots, (0..8).collect::<Vec<_>>());
    }
    let six = enumerate_pairings(6);
    assert!(six.windows(2).all(|w| w[0].pairs < w[1].pairs));
}

#[test]
fn two_point_matches_quadrature_oracle() {
    let (f, g, h) = reference();
    let spec = QuadratureSpec::default();
    let cases = [
        (&f, &f, c(1.3226872821587787, 0.0)),
        (&f, &g, c(1.0575201492121908, 0.191598328845821)),
        (&g, &h, c(0.47386310517241503, -0.4705129731072391)),
    ];
    for (a, b, want) in cases {
        let e = field().two_point(a, b, &spec).unwrap();
        assert!(rel(e.value, want) < 1e-11, "{} vs {want}", e.value);
        assert!(e.eps_quad < 1e-10);
        let q = OnShellQuadrature::line(1.0, -8.0, 8.0, 40, 12, QuadratureRule::GaussLegendre).unwrap();
        assert!(rel(two_point_smeared(a, b, &q).unwrap(), want) < 1e-11);
    }
}

#[test]
fn fixed_cutoff_too_small_is_reported() {
    let (f, g, _) = reference();
    let q = OnShellQuadrature::line(1.0, -2.0, 2.0, 8, 12, QuadratureRule::GaussLegendre).unwrap();
    assert!(matches!(two_point_smeared(&f, &g, &q), Err(Error::CutoffTooSmall(_))));
    let spec = QuadratureSpec { cutoff: Some(2.0), ..Default::default() };
    assert!(matches!(field().two_point(&f, &g, &spec), Err(Error::CutoffTooSmall(_))));
}

#[test]
fn four_point_matches_direct_tensor_oracle() {
    let (f, g, h) = reference();
    let fs = vec![f.clone(), g, h, f];
    let spec = QuadratureSpec::default();
    let q = OnShellQuadrature::line(1.0, -9.0, 9.0, 40, 12, QuadratureRule::GaussLegendre).unwrap();
    let cases = [
        (tags(&[1.0; 4]), c(2.3385696616823166, -0.8010195263276962)),
        (tags(&[0.0; 4]), c(2.6127132494007403, -0.8973616626129193)),
        (tags(&[1.0, -1.0, 0.0, 0.0]), c(2.7751193237082723, -0.8928119398763624)),
    ];
    for (t, want) in &cases {
        let e = field().npoint(&fs, Some(t), &spec).unwrap();
        assert!(rel(e.value, *want) < 1e-10, "{} vs {want}", e.value);
        assert!(e.eps_quad < 1e-9, "{}", e.eps_quad);
        assert!(rel(npoint_smeared(&fs, &q, Some(t)).unwrap(), *want) < 1e-10);
    }
    let plain = field().npoint(&fs, None, &spec).unwrap();
    assert!(rel(plain.value, cases[1].1) < 1e-10);
}

#[test]
fn couplings_reproduce_twist_phase_on_shell() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [4usize, 6, 8] {
        for pairing in enumerate_pairings(n).into_iter().step_by(7) {
            for _ in 0..20 {
                let t: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
                let tl = tags(&t);
                let cs = pairing_couplings(&pairing, &tl).unwrap();
                let ks: Vec<f64> = (0..n / 2).map(|_| rng.random_range(-3.0..3.0)).collect();
                let on: Vec<MinkowskiVector> = ks.iter().map(|&k| MinkowskiVector::d2(omega(&[k], 1.3), k)).collect();
                let direct = twist_phase(&tl, &pairing.slot_momenta(&on)).unwrap();
                let mut product = c(1.0, 0.0);
                for &(a, b, cab) in &cs {
                    let e = cab * (ks[a] * on[b].get(0) - on[a].get(0) * ks[b]);
                    product *= Complex64::from_polar(1.0, -0.5 * e);
                }
                assert!((direct - product).norm() < 1e-12, "{pairing:?} {t:?}");
            }
        }
    }
}

#[test]
fn pairing_integrand_modulus_is_phase_free() {
    let (f, g, h) = reference();
    let fs = vec![f.clone(), g.clone(), h.clone(), f, g, h];
    let t = tags(&[0.7, -1.2, 2.0, 0.3, 1.0, -0.4]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for pairing in enumerate_pairings(6) {
        for _ in 0..10 {
            let ks: Vec<f64> = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
            let a = pairing_integrand(&pairing, &fs, Some(&t), &ks, 1.0).unwrap();
            let b = pairing_integrand(&pairing, &fs, None, &ks, 1.0).unwrap();
            assert!((a.norm() - b.norm()).abs() <= 1e-14 * b.norm().max(1e-300));
        }
    }
}

#[test]
fn odd_correlators_vanish() {
    let (f, g, h) = reference();
    let e = field().npoint(&[f.clone(), g.clone(), h.clone()], None, &QuadratureSpec::default()).unwrap();
    assert_eq!(e.value, ZERO);
    let q = OnShellQuadrature::line(1.0, -9.0, 9.0, 10, 12, QuadratureRule::GaussLegendre).unwrap();
    assert_eq!(npoint_smeared(&[f, g, h], &q, None).unwrap(), ZERO);
}

#[test]
fn too_many_slots_rejected() {
    let f = TestFunction::gaussian(&[0.0, 0.0], 1.0);
    let fs = vec![f; 10];
    assert!(matches!(field().npoint(&fs, None, &QuadratureSpec::default()), Err(Error::InfeasibleSlots(10))));
}

#[test]
fn gram_matrix_is_positive() {
    let (f, g, h) = reference();
    let extra = packet([1.0, -2.0], 0.7, [0.0, -1.0]);
    let fs = vec![f, g, h, extra];
    let gram = gram_matrix(&field(), &fs, &QuadratureSpec::default()).unwrap();
    let trace: f64 = (0..4).map(|i| gram[(i, i)].re).sum();
    assert!((0..4).all(|i| gram[(i, i)].im.abs() < 1e-14 && gram[(i, i)].re > 0.0));
    assert!((&gram - gram.adjoint()).norm() < 1e-12 * trace);
    assert!(min_hermitian_eigenvalue(&gram) >= -1e-10 * trace);
}

#[test]
fn commutator_vanishes_for_spacelike_bumps() {
    let f = TestFunction::bump(&[0.0, -1.5], 0.3);
    let g = TestFunction::bump(&[0.2, 1.5], 0.3);
    let spec = QuadratureSpec::default();
    let fg = field().two_point(&f, &g, &spec).unwrap();
    let gf = field().two_point(&g, &f, &spec).unwrap();
    let comm = fg.value - gf.value;
    assert!(fg.value.norm() > 1e-5);
    assert!(comm.norm() <= fg.eps_quad + gf.eps_quad + 1e-12, "{comm} eps {}", fg.eps_quad + gf.eps_quad);
    // timelike separation: the commutator is of the size of the values
    let h = TestFunction::bump(&[3.0, 0.0], 0.3);
    let fh = field().two_point(&f, &h, &spec).unwrap().value;
    let hf = field().two_point(&h, &f, &spec).unwrap().value;
    assert!((fh - hf).norm() > 0.1 * fh.norm());
}

#[test]
fn two_point_twist_is_trivial() {
    let (f, g, _) = reference();
    let spec = QuadratureSpec::default();
    let plain = field().npoint(&[f.clone(), g.clone()], None, &spec).unwrap().value;
    for t in [[1.0, -1.0], [1.0, 1.0], [2.5, -0.3]] {
        let v = field().npoint(&[f.clone(), g.clone()], Some(&tags(&t)), &spec).unwrap().value;
        assert_eq!(v, plain);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let k = rng.random_range(-5.0..5.0);
            let on = MinkowskiVector::d2(omega(&[k], 1.0), k);
            let p = twist_phase(&tags(&t), &[-on, on]).unwrap();
            assert!((p - 1.0).norm() < 1e-15);
        }
    }
}

#[test]
fn separated_four_point_factorizes() {
    let f = TestFunction::gaussian(&[0.0, 0.0], 0.7);
    let g = TestFunction::gaussian(&[0.0, 12.0], 0.7);
    let spec = QuadratureSpec::default();
    let full = field().npoint(&[f.clone(), f.clone(), g.clone(), g.clone()], None, &spec).unwrap();
    let ff = field().two_point(&f, &f, &spec).unwrap().value;
    let gg = field().two_point(&g, &g, &spec).unwrap().value;
    let remainder = (full.value - ff * gg).norm() / (ff * gg).norm();
    assert!(remainder < 1e-4, "{remainder}");
    let crossed = full.pairings[1].value + full.pairings[2].value;
    assert!(((full.value - ff * gg) - crossed).norm() < 1e-12 * full.value.norm());
}

#[test]
fn undeformed_four_point_is_sum_of_two_point_products() {
    let (f, g, h) = reference();
    let fs = [f.clone(), g.clone(), h.clone(), f.clone()];
    let spec = QuadratureSpec::default();
    let w = |i: usize, j: usize| field().two_point(&fs[i], &fs[j], &spec).unwrap().value;
    let expected = w(0, 1) * w(2, 3) + w(0, 2) * w(1, 3) + w(0, 3) * w(1, 2);
    let full = field().npoint(&fs, None, &spec).unwrap().value;
    assert!(rel(full, expected) < 1e-12);
}

#[test]
fn halving_the_step_is_converged() {
    let (f, g, h) = reference();
    let fs = vec![f, g, h.clone(), h];
    let t = tags(&[1.0; 4]);
    let base = field().npoint(&fs, Some(&t), &QuadratureSpec::default()).unwrap();
    let fine = field().npoint(&fs, Some(&t), &QuadratureSpec::default().scaled(2.0)).unwrap();
    assert!(rel(fine.value, base.value) < 1e-7);
    for (a, b) in base.pairings.iter().zip(&fine.pairings) {
        assert!((a.value - b.value).norm() < 1e-7 * base.value.norm());
    }
}

#[test]
fn defect_is_full_minus_product() {
    let (f, g, _) = reference();
    let a = MinkowskiVector::d2(0.0, 1.0);
    let spec = QuadratureSpec::default();
    for t in [None, Some(tags(&[1.0; 4]))] {
        let d = connected_four_point_defect(&field(), &[f.clone(), g.clone()], &[g.clone(), f.clone()], &a, 0.0, t.as_ref(), &spec).unwrap();
        assert!((d.full - d.product - d.value).norm() < 1e-12 * d.full.norm());
    }
    let timelike = MinkowskiVector::d2(1.0, 0.0);
    assert!(connected_four_point_defect(&field(), &[f.clone(), g.clone()], &[g, f], &timelike, 1.0, None, &spec).is_err());
}

#[test]
fn four_dimensional_two_point() {
    let f = TestFunction::gaussian(&[0.0; 4], 1.0);
    let field = FreeField::new(1.0, 4).unwrap();
    let spec = QuadratureSpec { nodes_per_panel: 8, max_panel_width: 1.0, ..Default::default() };
    let e = field.two_point(&f, &f, &spec).unwrap();
    // 4π² ∫_0^∞ k² e^{−1−2k²} / ω dk
    let want = 1.785241599575462;
    assert!((e.value.re - want).abs() < 1e-8 * want && e.value.im.abs() < 1e-12, "{}", e.value);
    let q = OnShellQuadrature::cube(1.0, 4.0, 8, 6, QuadratureRule::GaussLegendre).unwrap();
    assert!((two_point_smeared(&f, &f, &q).unwrap().re - want).abs() < 1e-7 * want);
    let four = vec![f.clone(); 4];
    assert!(field.npoint(&four, None, &spec).is_err());
}

#[test]
fn block_twist_matches_direct_exponent() {
    let theta = ThetaMatrix::d2(1.3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (n, k) in [(4usize, 1usize), (4, 2), (6, 3), (6, 1)] {
        let twist = SlotTwist::between_blocks(n, k, &theta).unwrap();
        for _ in 0..50 {
            let p: Vec<MinkowskiVector> =
                (0..n).map(|_| MinkowskiVector::d2(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect();
            let pf = p[..k].iter().fold(MinkowskiVector::d2(0.0, 0.0), |a, b| a + *b);
            let pg = p[k..].iter().fold(MinkowskiVector::d2(0.0, 0.0), |a, b| a + *b);
            assert!((twist.exponent(&p).unwrap() - theta.bilinear(&pf, &pg)).abs() < 1e-12);
        }
    }
    let t = tags(&[0.4, -1.1, 2.0, 0.0]);
    let from_tags = SlotTwist::from_tags(&t).unwrap();
    let p: Vec<MinkowskiVector> = (0..4).map(|i| MinkowskiVector::d2(0.3 * i as f64 - 0.2, 1.0 - 0.7 * i as f64)).collect();
    assert!((from_tags.exponent(&p).unwrap() - crate::star::twist_exponent(&t, &p).unwrap()).abs() < 1e-12);
}
