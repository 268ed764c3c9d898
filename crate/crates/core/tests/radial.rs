use std::f64::consts::PI;

use num_complex::Complex64;
use resforge::forward::DEFAULT_TOL;
use resforge::radial::*;
use resforge::*;

const I: Complex64 = Complex64::new(0.0, 1.0);

// roots and determinant values from a 30-digit evaluation of the Bessel and
// Hankel functions, n0 = 2, a = 1
const ROOT_2D_L6: Complex64 = Complex64::new(4.213875599696528, -0.03290124283291485);
const ROOT_2D_L0: Complex64 = Complex64::new(1.977701154545429, -0.2790973088953399);
const ROOT_3D_L2: Complex64 = Complex64::new(3.736863660470038, -0.2328779315297723);
const ROOT_3D_L5: Complex64 = Complex64::new(5.650645405458888, -0.1517519884558792);
const DET_2D_L3: Complex64 = Complex64::new(0.2223507938328624, -0.3007059789408655);

fn cavity(dim: u8, ell: u32) -> RadialCavity {
    RadialCavity::new(dim, 2.0, 1.0, ell).unwrap()
}

fn lowest(c: &RadialCavity) -> RadialResonance {
    let rect = SearchRect::new(0.05, 12.0, -1.5, -1e-9).unwrap();
    find_radial_resonances(c, &rect, 24, 6).unwrap()[0]
}

#[test]
fn slab_formula_values() {
    let w = slab_resonances(2.0, 1.0, &[1]).unwrap()[0];
    assert!((w - Complex64::new(PI / 4.0, -0.25 * 3f64.ln())).norm() < 1e-15);
    let all = slab_resonances(2.0, 1.0, &(1..=10).collect::<Vec<_>>()).unwrap();
    assert!(all.iter().all(|z| z.im == all[0].im));
    assert!(slab_resonances(1.0, 1.0, &[1]).is_err());
}

#[test]
fn slab_formula_matches_transfer_matrix_roots() {
    for n0 in [1.5, 2.0, 4.0] {
        let s = PiecewiseConstantStructure::uniform(1.0, 1, n0).unwrap();
        let expect = slab_resonances(n0, 0.5, &[1, 2, 3, 4, 5]).unwrap();
        let re_max = expect[4].re + 0.5 * PI / n0;
        let rect = SearchRect::new(0.05, re_max, -2.0, -1e-6).unwrap();
        let (nx, ny) = forward::default_grid(&s, &rect);
        let set = find_resonances(&s, &rect, nx, ny, DEFAULT_TOL).unwrap();
        assert_eq!(set.len(), 5);
        for (p, e) in set.pairs.iter().zip(&expect) {
            assert!((p.omega - e).norm() < 1e-10, "n0 = {n0}: {} vs {e}", p.omega);
        }
    }
}

#[test]
fn spherical_order_zero_reduces_to_elementary_functions() {
    let c = cavity(3, 0);
    let w = Complex64::new(1.0, -0.2);
    let (zi, zo) = (2.0 * w, w);
    let j = zi.sin() / zi;
    let jp = zi.cos() / zi - zi.sin() / (zi * zi);
    let h = -I * (I * zo).exp() / zo;
    let hp = (I * zo).exp() / zo + I * (I * zo).exp() / (zo * zo);
    let expect = j * hp - 2.0 * h * jp;
    let d = radial_determinant(&c, w).unwrap();
    assert!((d - expect).norm() < 1e-13 * expect.norm());
    assert!((d - Complex64::new(0.4456381876553971, 0.06151653678828204)).norm() < 1e-13);
}

#[test]
fn cylindrical_determinant_matches_frozen_value() {
    let d = radial_determinant(&cavity(2, 3), Complex64::new(3.1, -0.2)).unwrap();
    assert!((d - DET_2D_L3).norm() < 1e-10 * DET_2D_L3.norm());
    assert!(d.norm() > 0.0 && d.re.is_finite());
}

#[test]
fn spherical_order_zero_roots_are_exact() {
    // n0 cot(n0 omega a) = i
    let c = cavity(3, 0);
    for j in 0..8 {
        let expect = Complex64::new(PI / 2.0 * (j as f64 + 0.5), -0.25 * 3f64.ln());
        let r = radial_newton(&c, expect + Complex64::new(0.2, 0.1)).unwrap();
        assert!((r.omega - expect).norm() < 1e-8);
        assert_eq!(r.multiplicity, 1);
    }
}

#[test]
fn roots_match_high_precision_values() {
    for (dim, ell, root) in [(2, 6, ROOT_2D_L6), (2, 0, ROOT_2D_L0), (3, 2, ROOT_3D_L2), (3, 5, ROOT_3D_L5)] {
        let r = radial_newton(&cavity(dim, ell), root + Complex64::new(0.05, 0.02)).unwrap();
        assert!((r.omega - root).norm() < 1e-10, "dim {dim} ell {ell}: {}", r.omega);
    }
    let l6 = lowest(&cavity(2, 6));
    assert!((l6.omega - Complex64::new(4.2, -0.033)).norm() < 0.05);
    assert_eq!(l6.multiplicity, 2);
    assert_eq!(lowest(&cavity(3, 5)).multiplicity, 11);
}

#[test]
fn mirrored_spherical_roots_are_roots() {
    for ell in [0, 2, 6] {
        let c = cavity(3, ell);
        let w = lowest(&c).omega;
        let mirror = Complex64::new(-w.re, w.im);
        let r = radial_newton(&c, mirror + Complex64::new(0.01, 0.0)).unwrap();
        assert!((r.omega - mirror).norm() < 1e-10, "ell {ell}");
    }
}

#[test]
fn asymptotic_values() {
    let c = cavity(3, 0);
    let w = asymptotic_resonance(&c, 20).unwrap();
    assert!((w - Complex64::new(PI / 2.0 * 20.5, -0.25 * 3f64.ln())).norm() < 1e-13);
    let two = asymptotic_resonance(&cavity(2, 0), 20).unwrap();
    assert!(((w - two).re - PI / 4.0 / 2.0).abs() < 1e-13);
    assert!(asymptotic_resonance(&cavity(1, 0), 1).is_err());
}

#[test]
fn roots_approach_asymptotics() {
    for (dim, jmax) in [(2u8, 18u32), (3, 24)] {
        for ell in 1..=3 {
            let c = cavity(dim, ell);
            // up to the argument ceiling of the Bessel functions
            let dist: Vec<f64> = (0..=jmax)
                .map_while(|j| {
                    let r = asymptotic_branch(&c, j).ok()?;
                    Some((r.omega - asymptotic_resonance(&c, j).unwrap()).norm())
                })
                .collect();
            assert!(dist.len() >= 15);
            assert!(dist.windows(2).all(|w| w[1] < w[0]), "dim {dim} ell {ell}: {dist:?}");
        }
    }
}

#[test]
fn whispering_gallery_widths_shrink_with_ell() {
    let widths: Vec<f64> = (0..=9).map(|ell| lowest(&cavity(2, ell)).omega.im.abs()).collect();
    assert!(widths.windows(2).all(|w| w[1] < w[0]), "{widths:?}");
}
