use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use tetilla_core::combinatorics::enumerate_nc;
use tetilla_core::transforms::*;
use tetilla_core::Rational;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn seq(values: Vec<Rational>) -> CumulantSequence {
    CumulantSequence::new(values).unwrap()
}

/// `m_n = Σ_s κ_s Σ_{i_1+…+i_s = n−s} m_{i_1}⋯m_{i_s}`, the first-block
/// recursion for free cumulants, in big rationals.
fn recursion_moments(kappa: &[BigRational], k_max: usize) -> Vec<BigRational> {
    let mut m = vec![BigRational::one()];
    for n in 1..=k_max {
        let mut total = BigRational::zero();
        for s in 1..=n {
            // conv[j] = Σ over s-fold compositions of j of Π m
            let mut conv = vec![BigRational::zero(); n - s + 1];
            conv[0] = BigRational::one();
            for _ in 0..s {
                let mut next = vec![BigRational::zero(); n - s + 1];
                for (a, ca) in conv.iter().enumerate() {
                    for b in 0..=n - s - a {
                        next[a + b] += ca * &m[b];
                    }
                }
                conv = next;
            }
            total += &kappa[s - 1] * &conv[n - s];
        }
        m.push(total);
    }
    m
}

fn big(x: &Rational) -> BigRational {
    x.to_string().parse().unwrap()
}

fn tetilla_kappas(k: usize) -> Vec<Rational> {
    (1..=k).map(tetilla_cumulant).collect()
}

#[test]
fn cumulant_values() {
    assert_eq!(tetilla_cumulant(2), r(1, 1));
    assert_eq!(tetilla_cumulant(3), r(0, 1));
    assert_eq!(tetilla_cumulant(4), r(1, 2));
    assert_eq!(tetilla_cumulant(6), r(1, 4));
    assert_eq!(tetilla_cumulant(16), r(1, 128));
}

#[test]
fn moments_match_first_block_recursion() {
    let laws = [
        tetilla_kappas(14),
        DistributionSpec::FreePoissonSquare { t: r(3, 2) }.cumulants(14).unwrap().values().to_vec(),
        (1..=14).map(|i| r(i as i64 % 5 - 2, 1 + i as i64 % 3)).collect(),
    ];
    for kappa in laws {
        let ours = moments_from_cumulants(&seq(kappa.clone()), 14).unwrap();
        let oracle = recursion_moments(&kappa.iter().map(big).collect::<Vec<_>>(), 14);
        for k in 1..=14 {
            assert_eq!(big(&ours[k]), oracle[k], "order {k}");
        }
    }
}

#[test]
fn moments_match_direct_partition_sum() {
    let kappa: Vec<Rational> = (1..=8).map(|i| r(i as i64, 7 - i as i64 % 4)).collect();
    let ours = moments_from_cumulants(&seq(kappa.clone()), 8).unwrap();
    for m in 1..=8 {
        let mut total = Rational::zero();
        for p in enumerate_nc(m).unwrap() {
            let mut prod = Rational::one();
            for s in p.block_sizes() {
                prod = &prod * &kappa[s - 1];
            }
            total = &total + &prod;
        }
        assert_eq!(ours[m], total);
    }
}

#[test]
fn documented_moment_examples() {
    let semi = DistributionSpec::Semicircular { t: r(1, 1) }.moments(10).unwrap();
    let expect = [0, 1, 0, 2, 0, 5, 0, 14, 0, 42];
    for (k, e) in expect.iter().enumerate() {
        assert_eq!(semi[k + 1], r(*e, 1));
    }
    let t = r(3, 5);
    let scaled = DistributionSpec::Semicircular { t: t.clone() }.moments(10).unwrap();
    for (m, c) in [1, 2, 5, 14, 42].iter().enumerate() {
        assert_eq!(scaled[2 * m + 2], &r(*c, 1) * &t.pow(m as u32 + 1));
    }
    let fp = DistributionSpec::FreePoissonSquare { t: r(1, 1) }.moments(3).unwrap();
    assert_eq!(fp.values(), &[r(1, 1), r(2, 1), r(5, 1)]);
    let tet = DistributionSpec::Tetilla.moments(6).unwrap();
    assert_eq!((tet[2].clone(), tet[4].clone(), tet[6].clone()), (r(1, 1), r(5, 2), r(33, 4)));
}

#[test]
fn cumulant_inversion_examples() {
    let semi = DistributionSpec::Semicircular { t: r(1, 1) }.moments(12).unwrap();
    let k = cumulants_from_moments(&semi, 12).unwrap();
    for i in 1..=12 {
        assert_eq!(k[i], if i == 2 { r(1, 1) } else { r(0, 1) });
    }
    let tet = MomentSequence::new((1..=6).map(|k| if k % 2 == 1 { r(0, 1) } else { tetilla_moment_closed(k / 2) }).collect()).unwrap();
    let k = cumulants_from_moments(&tet, 6).unwrap();
    assert_eq!(k.values(), &[r(0, 1), r(1, 1), r(0, 1), r(1, 2), r(0, 1), r(1, 4)]);
    let zero = MomentSequence::new(vec![r(0, 1); 9]).unwrap();
    assert!(cumulants_from_moments(&zero, 9).unwrap().values().iter().all(|x| x.is_zero()));
}

/// `(1/(2ⁿ n)) Σ_k 2^k C(2n, k−1) C(n, k)` in big integers.
fn closed_form_oracle(n: u64) -> BigRational {
    let binom = |a: u64, b: u64| -> BigInt {
        let mut acc = BigInt::one();
        for i in 0..b {
            acc = acc * BigInt::from(a - i) / BigInt::from(i + 1);
        }
        acc
    };
    let sum: BigInt = (1..=n).map(|k| (BigInt::one() << k) * binom(2 * n, k - 1) * binom(n, k)).sum();
    BigRational::new(sum, (BigInt::one() << n) * BigInt::from(n))
}

#[test]
fn closed_form_moments() {
    let frozen = [(1, 1), (5, 2), (33, 4), (249, 8), (2033, 16)];
    for (n, (num, den)) in frozen.iter().enumerate() {
        assert_eq!(tetilla_moment_closed(n + 1), r(*num, *den));
    }
    let nc = moments_from_cumulants(&seq(tetilla_kappas(16)), 16).unwrap();
    for n in 1..=8 {
        let closed = tetilla_moment_closed(n);
        assert_eq!(big(&closed), closed_form_oracle(n as u64), "n = {n}");
        assert_eq!(closed, nc[2 * n], "n = {n}");
    }
}

#[test]
fn sequence_limits() {
    assert!(CumulantSequence::new(vec![r(0, 1); 17]).unwrap_err().is_capacity());
    assert!(moments_from_cumulants(&seq(tetilla_kappas(4)), 17).is_err());
}

prop_compose! {
    fn small_rational()(n in -20i64..=20, d in 1i64..=9) -> Rational {
        Rational::new(n, d)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn cumulant_round_trip(kappa in prop::collection::vec(small_rational(), 1..=12)) {
        let k = kappa.len();
        let m = moments_from_cumulants(&seq(kappa.clone()), k).unwrap();
        let back = cumulants_from_moments(&m, k).unwrap();
        prop_assert_eq!(back.values(), &kappa[..]);
    }
}

/// Simpson's rule under `t = edge·sin θ`, which removes the square-root
/// edges, on `[0, π/2]` doubled by evenness.
fn density_moment(k: i32) -> f64 {
    let edge = tetilla_support_edge();
    let n = 20_000;
    let h = FRAC_PI_2 / n as f64;
    let g = |th: f64| {
        let t = edge * th.sin();
        tetilla_density(t) * t.powi(k) * edge * th.cos()
    };
    let mut s = g(0.0) + g(FRAC_PI_2);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    2.0 * s * h / 3.0
}

#[test]
fn density_integrates_to_the_moments() {
    for (k, target) in [(0, 1.0), (2, 1.0), (4, 2.5), (6, 8.25), (8, 31.125)] {
        let oracle = density_moment(k);
        assert!((oracle - target).abs() < 1e-6, "oracle k = {k}: {oracle}");
        let ours = tetilla_moment_numeric(k as u32, 1e-9).unwrap();
        assert!((ours - target).abs() < 1e-6, "k = {k}: {ours}");
    }
}

#[test]
fn density_shape() {
    let edge = tetilla_support_edge();
    assert!((edge - ((11.0 + 5.0 * 5f64.sqrt()).sqrt() / 2.0)).abs() < 1e-15);
    assert!((edge - 2.3549).abs() < 1e-4);
    assert_eq!(tetilla_density(3.0), 0.0);
    assert!((tetilla_density(0.0) - SQRT_2 / PI).abs() < 1e-12);
    assert!((tetilla_density(1e-4) - SQRT_2 / PI).abs() < 1e-7);
    for i in 0..10_000 {
        let t = -edge + 2.0 * edge * (i as f64 + 0.5) / 10_000.0;
        let h = tetilla_density(t);
        assert!(h >= 0.0 && h.is_finite(), "h({t}) = {h}");
        assert!((h - tetilla_density(-t)).abs() < 1e-12);
    }
}

#[test]
fn semicircle_density() {
    assert!((semicircular_density(0.0, 1.0) - 1.0 / PI).abs() < 1e-15);
    assert_eq!(semicircular_density(2.0, 1.0), 0.0);
    assert_eq!(semicircular_density(2.5, 1.0), 0.0);
    let n = 20_000;
    let h = PI / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let th = -FRAC_PI_2 + (i as f64 + 0.5) * h;
        let u = 2.0 * th.sin();
        s += u * u * semicircular_density(u, 1.0) * 2.0 * th.cos() * h;
    }
    assert!((s - 1.0).abs() < 1e-6);
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() < tol
}

/// Roots of `z y³ + y² − 2zy + 2` frozen from a companion-matrix solver.
#[test]
fn cardano_roots_match_frozen_values() {
    let cases: [(Complex64, [Complex64; 3]); 3] = [
        (
            Complex64::new(5.0, 1e-6),
            [
                Complex64::new(-1.6031654515669067, 3.6062357326033245e-08),
                Complex64::new(0.20892468379754664, -4.5783716254737844e-08),
                Complex64::new(1.1942407677693687, 4.9721358920141526e-08),
            ],
        ),
        (
            Complex64::new(0.0, 10.0),
            [
                Complex64::new(-1.4176761107930773, 0.09951210245334194),
                Complex64::new(0.0, -0.09902420490668443),
                Complex64::new(1.4176761107930782, 0.09951210245334235),
            ],
        ),
        (
            Complex64::new(-1.3, 0.2),
            [
                Complex64::new(-0.7435276901993615, 0.56107641064686),
                Complex64::new(-0.5745318923191363, -0.5393076970454355),
                Complex64::new(2.0695046692237007, 0.09383822281476073),
            ],
        ),
    ];
    for (z, expect) in cases {
        let roots = cardano_roots(z);
        for e in expect {
            assert!(roots.iter().any(|y| close(*y, e, 1e-9)), "z = {z}: {e} not in {roots:?}");
        }
        let g = cauchy_transform_tetilla(z).unwrap();
        assert!(close(g, expect[1], 1e-9), "z = {z}: G = {g}");
    }
}

#[test]
fn cauchy_transform_properties() {
    let g = cauchy_transform_tetilla(Complex64::new(0.0, 10.0)).unwrap();
    assert!((g - Complex64::new(0.0, -0.1)).norm() < 2e-3);
    for re in [-4.0, -2.0, -0.7, 0.0, 0.3, 1.9, 2.36, 6.0] {
        for im in [1e-6, 1e-3, 0.1, 1.0, 30.0] {
            let z = Complex64::new(re, im);
            let y = cauchy_transform_tetilla(z).unwrap();
            assert!(y.im < 0.0, "z = {z}");
            assert!(cauchy_cubic(z, y).norm() <= CUBIC_RESIDUAL_TOL * (1.0 + z.norm().powi(3)));
        }
    }
    assert!(cauchy_transform_tetilla(Complex64::new(1.0, 0.0)).is_err());
    // large |z|: G(z) = 1/z + 1/z³ + O(z⁻⁵)
    let z = Complex64::new(40.0, 25.0);
    let g = cauchy_transform_tetilla(z).unwrap();
    assert!((g - (1.0 / z + 1.0 / (z * z * z))).norm() < 3.0 * (1.0 / z.powi(5)).norm());
}

#[test]
fn stieltjes_inversion_agrees_with_the_density() {
    assert!((density_from_cauchy(0.5, 1e-6).unwrap() - tetilla_density(0.5)).abs() < 1e-4);
    assert!((density_from_cauchy(0.0, 1e-8).unwrap() - SQRT_2 / PI).abs() < 1e-6);
    assert!(density_from_cauchy(5.0, 1e-6).unwrap().abs() <= 1e-4);
    let edge = tetilla_support_edge();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let t = -edge + 2.0 * edge * (i as f64 + 0.5) / 1000.0;
        worst = worst.max((density_from_cauchy(t, 1e-6).unwrap() - tetilla_density(t)).abs());
    }
    assert!(worst < 1e-4, "max deviation {worst}");
}
