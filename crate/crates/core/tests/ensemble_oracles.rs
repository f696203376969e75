use std::f64::consts::{PI, TAU};

use cvpqc::ensembles::*;
use cvpqc::fock::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn max_abs(a: &FockOperator, b: &FockOperator) -> f64 {
    assert_eq!(a.dim(), b.dim());
    (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn mixture(labels: &[CoherentLabel], weights: &[f64], cut: &CutoffPolicy) -> FockOperator {
    let dim = cut.dim();
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    for (l, w) in labels.iter().zip(weights) {
        acc += coherent_projector(*l, cut).unwrap().into_matrix() * C64::new(*w, 0.0);
    }
    FockOperator::from_matrix(acc).unwrap()
}

fn on_circle(r: f64, angles: &[f64]) -> Vec<CoherentLabel> {
    angles.iter().map(|&t| CoherentLabel::new(r, t).unwrap()).collect()
}

#[test]
fn circle_mixture_equals_explicit_projector_sum() {
    for p in [1usize, 2, 3, 5, 8] {
        let r = 1.3;
        let cut = CutoffPolicy::for_radius(r).unwrap();
        let labels = on_circle(r, &canonical_angles(p));
        let direct = mixture(&labels, &vec![1.0 / p as f64; p], &cut);
        let stripes = circle_mixture(p, r, &cut).unwrap();
        assert!(max_abs(&direct, &stripes) < 1e-14, "p={p}");
    }
}

#[test]
fn odd_offset_conformation_is_a_rotation() {
    // states at angles (pi/p)(2q - 1) are the canonical ones rotated by -pi/p
    for p in [2usize, 3, 6] {
        let r = 0.9;
        let cut = CutoffPolicy::for_radius(r).unwrap();
        let angles: Vec<f64> = (1..=p).map(|q| PI / p as f64 * (2 * q - 1) as f64).collect();
        let direct = mixture(&on_circle(r, &angles), &vec![1.0 / p as f64; p], &cut);
        let rotated = rotate_phase(&circle_mixture(p, r, &cut).unwrap(), -PI / p as f64);
        assert!(max_abs(&direct, &rotated) < 1e-14, "p={p}");
    }
}

#[test]
fn circle_mixture_spectrum_matches_gram_matrix() {
    // nonzero eigenvalues of (1/p) sum |a_q><a_q| are those of G/p, G_qq' = <a_q|a_q'>
    let (p, r) = (6usize, 1.0);
    let cut = CutoffPolicy::new(1e-14, r).unwrap();
    let mut ev = circle_mixture(p, r, &cut).unwrap().eigenvalues();
    ev.reverse();
    let amps: Vec<C64> = canonical_angles(p).iter().map(|&t| C64::from_polar(r, t)).collect();
    let gram = DMatrix::from_fn(p, p, |i, j| {
        (-(amps[i].norm_sqr() + amps[j].norm_sqr()) / 2.0 + amps[i].conj() * amps[j]).exp() / p as f64
    });
    let mut want: Vec<f64> = gram.symmetric_eigen().eigenvalues.iter().copied().collect();
    want.sort_by(|a, b| b.total_cmp(a));
    for (g, w) in ev.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12, "{g} vs {w}");
    }
    assert!(ev[p..].iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn encrypt_equals_explicit_mixture() {
    // D(beta)|a><a|D(beta)^dag = |a + beta><a + beta|
    let spec = ChannelSpec::new(1.5, 4).unwrap();
    let beta = CoherentLabel::new(0.5, PI / 3.0).unwrap();
    let cut = CutoffPolicy::new(1e-14, spec.b + beta.r).unwrap();
    assert!(cut.dim() >= 50 || CutoffPolicy::new(1e-14, 2.0).unwrap().dim() < 50);
    let enc = encrypt(beta, &spec, &cut).unwrap();

    let mut labels = Vec::new();
    let mut weights = Vec::new();
    for p in 1..=spec.n {
        for t in canonical_angles(p) {
            let a = C64::from_polar(spec.radius(p), t) + beta.amplitude();
            labels.push(CoherentLabel::from_complex(a));
            weights.push(1.0 / spec.operations() as f64);
        }
    }
    let direct = mixture(&labels, &weights, &cut);
    assert_eq!(enc.dim(), direct.dim());
    assert!(max_abs(&enc, &direct) < 1e-10, "{}", max_abs(&enc, &direct));
}

#[test]
fn phase_shift_ensemble_realizes_explicit_mixture() {
    let spec = SimplifiedSpec::new(2.0, 5, 1.2).unwrap();
    let input = CoherentLabel::new(1.2, 2.0).unwrap();
    let cut = CutoffPolicy::for_radius(2.0).unwrap();
    let ens = phase_shift_ensemble(input, &spec, &cut).unwrap();
    let angles: Vec<f64> = (0..5).map(|q| input.theta + TAU * q as f64 / 5.0).collect();
    let direct = mixture(&on_circle(1.2, &angles), &[0.2; 5], &cut);
    assert!(max_abs(&ens.realize(), &direct) < 1e-14);
}

#[test]
fn phi_converges_to_disk_state() {
    // max_{n<=20} |Phi_N(n,n) - I_b(n,n)| at b = 1
    let want = disk_diagonal(1.0, 21);
    let errs: Vec<f64> = [5usize, 10, 20, 40, 80]
        .iter()
        .map(|&n| {
            let d = phi_n_diagonal(&ChannelSpec::new(1.0, n).unwrap(), 21);
            d.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[4] < 5e-3, "{errs:?}");
}

#[test]
fn vacuum_element_limit() {
    // Phi_N(0,0) -> (1 - e^{-b^2}) / b^2
    let b: f64 = 1.7;
    let limit = (1.0 - (-b * b).exp()) / (b * b);
    let mut last = f64::INFINITY;
    for n in [5usize, 10, 20, 40, 80, 160] {
        let v = phi_n_diagonal(&ChannelSpec::new(b, n).unwrap(), 1)[0];
        let err = (v - limit).abs();
        assert!(err < last);
        last = err;
    }
    assert!(last < 1e-2);
}

#[test]
fn disk_state_entropy_two_ways() {
    let b = 1.5;
    let cut = CutoffPolicy::for_radius(b).unwrap();
    let rho = maximally_mixed(b, &cut).unwrap();
    let s1 = von_neumann_entropy(&rho).unwrap();
    let s2 = shannon_entropy_bits(&disk_diagonal(b, cut.dim()));
    assert!((s1 - s2).abs() < 1e-8);
}

fn random_state(seed: &[f64]) -> FockOperator {
    // mixture of three coherent states
    let cut = CutoffPolicy::for_radius(2.0).unwrap();
    let labels: Vec<CoherentLabel> = seed
        .chunks(2)
        .map(|c| CoherentLabel::new(2.0 * c[0], TAU * c[1]).unwrap())
        .collect();
    let n = labels.len() as f64;
    mixture(&labels, &vec![1.0 / n; labels.len()], &cut)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hs_distance_triangle_inequality(
        a in prop::collection::vec(0.0f64..1.0, 6),
        b in prop::collection::vec(0.0f64..1.0, 6),
        c in prop::collection::vec(0.0f64..1.0, 6),
    ) {
        let (x, y, z) = (random_state(&a), random_state(&b), random_state(&c));
        let xy = hs_distance_numeric(&x, &y).unwrap();
        let yz = hs_distance_numeric(&y, &z).unwrap();
        let xz = hs_distance_numeric(&x, &z).unwrap();
        prop_assert!(xz <= xy + yz + 1e-12);
        prop_assert!((xy - hs_distance_numeric(&y, &x).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn displacement_preserves_distances(
        a in prop::collection::vec(0.0f64..1.0, 4),
        b in prop::collection::vec(0.0f64..1.0, 4),
        r in 0.0f64..0.8, t in 0.0f64..TAU,
    ) {
        let beta = CoherentLabel::new(r, t).unwrap();
        let cut = CutoffPolicy::for_radius(2.0 + r).unwrap();
        let x = random_state(&a);
        let y = random_state(&b);
        let d0 = hs_distance_numeric(&x.resized(cut.dim()), &y.resized(cut.dim())).unwrap();
        let dx = displacement_conjugate(&x, beta, &cut).unwrap();
        let dy = displacement_conjugate(&y, beta, &cut).unwrap();
        prop_assert!((hs_distance_numeric(&dx, &dy).unwrap() - d0).abs() < 1e-8);
    }

    #[test]
    fn circle_mixtures_are_states(p in 1usize..12, r in 0.0f64..3.0) {
        let cut = CutoffPolicy::for_radius(3.0).unwrap();
        let rho = circle_mixture(p, r, &cut).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-9);
        let low = rho.eigenvalues()[0];
        prop_assert!(low > -1e-12, "{}", low);
    }

    #[test]
    fn phase_rotation_preserves_diagonal(p in 1usize..8, r in 0.0f64..2.0, phi in 0.0f64..TAU) {
        let cut = CutoffPolicy::for_radius(2.0).unwrap();
        let rho = circle_mixture(p, r, &cut).unwrap();
        let rot = rotate_phase(&rho, phi);
        prop_assert_eq!(rho.diagonal(), rot.diagonal());
    }
}
