//! Identities the special functions and closed forms must satisfy, checked in
//! regimes the series oracles of the acceptance run cannot reach.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdho::classical::{closed_form, solve_fundamental, ClassicalSolution, VerifyStatus};
use tdho::freq_profile::{FrequencyProfile, Side};
use tdho::specfun::{
    bessel_j, bessel_j_derivative, legendre_p_with_derivative, ConicalDegree, SERIES_LIMIT,
};

#[test]
fn bessel_recurrences_hold_on_the_asymptotic_side() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..500 {
        let nu = rng.gen_range(1.0..6.0);
        let x = rng.gen_range(SERIES_LIMIT..60.0);
        let (jm, j, jp) = (bessel_j(nu - 1.0, x).unwrap(), bessel_j(nu, x).unwrap(), bessel_j(nu + 1.0, x).unwrap());
        let envelope = (2.0 / (std::f64::consts::PI * x)).sqrt();
        let three_term = jm + jp - 2.0 * nu / x * j;
        assert!(three_term.abs() <= 1e-13 * envelope * (1.0 + 2.0 * nu / x), "ν={nu} x={x}: {three_term:e}");
        let slope = bessel_j_derivative(nu, x).unwrap() - 0.5 * (jm - jp);
        assert!(slope.abs() <= 1e-13 * envelope, "ν={nu} x={x}: {slope:e}");
    }
}

#[test]
fn bessel_is_continuous_across_the_seam() {
    for nu in [0.0, 0.25, 1.0, 1.5] {
        let (lo, hi) = (SERIES_LIMIT * (1.0 - 1e-12), SERIES_LIMIT * (1.0 + 1e-12));
        let below = bessel_j(nu, lo).unwrap();
        let above = bessel_j(nu, hi).unwrap();
        let expected = bessel_j_derivative(nu, SERIES_LIMIT).unwrap() * (hi - lo);
        assert!((above - below - expected).abs() < 1e-14, "ν={nu}: {below} vs {above}");
    }
}

#[test]
fn conical_legendre_satisfies_its_ode_for_negative_argument() {
    // (1 − x²) P'' − 2x P' + λ(λ+1) P = 0, P'' from central differences of P'
    let h = 1e-5;
    for mu in [0.0, 0.7, 2.0, 4.0] {
        let degree = ConicalDegree::Conical { mu };
        for i in 0..=18 {
            let x = -0.9 + 0.1 * i as f64;
            let p = legendre_p_with_derivative(degree, x).unwrap();
            let d_plus = legendre_p_with_derivative(degree, x + h).unwrap().derivative;
            let d_minus = legendre_p_with_derivative(degree, x - h).unwrap().derivative;
            let second = (d_plus - d_minus) / (2.0 * h);
            let residual = (1.0 - x * x) * second - 2.0 * x * p.derivative + degree.eigenvalue() * p.value;
            let scale = p.value.abs().max(p.derivative.abs()).max(1.0) * (1.0 + degree.eigenvalue().abs());
            assert!(residual.abs() <= 1e-6 * scale, "μ={mu} x={x}: {residual:e}");
            assert!(!p.degraded);
        }
    }
}

#[test]
fn passing_closed_forms_match_the_numerical_pair() {
    // f(t) = f(t_a) u(t) + ḟ(t_a) v(t) for any solution f
    let cases = [
        (FrequencyProfile::Constant { omega0: 1.3 }, 0.0, 2.0),
        (FrequencyProfile::ExpDecay { omega0: 1.0, alpha: 1.0 }, 0.0, 2.0),
        (FrequencyProfile::PowerLaw { omega0: 1.0, alpha: 1.0, beta: 0.5 }, 0.5, 2.5),
    ];
    for (profile, t_a, t_b) in cases {
        let f = closed_form(&profile).unwrap();
        assert_eq!(f.status(), VerifyStatus::Pass, "{profile}");
        let pair = solve_fundamental(&profile, t_a, t_b, 1e-12).unwrap();
        let g = pair.combination(f.value(t_a).unwrap(), f.derivative(t_a, Side::Right).unwrap());
        for i in 0..=40 {
            let t = t_a + (t_b - t_a) * i as f64 / 40.0;
            let (fv, gv) = (f.value(t).unwrap(), g.value(t).unwrap());
            assert!((fv - gv).abs() <= 1e-8 * fv.abs().max(1.0), "{profile} t={t}: {fv} vs {gv}");
            let (fd, gd) = (f.derivative(t, Side::Right).unwrap(), g.derivative(t, Side::Right).unwrap());
            assert!((fd - gd).abs() <= 1e-8 * fd.abs().max(1.0), "{profile} t={t}: {fd} vs {gd}");
        }
    }
}

#[test]
fn failing_closed_forms_are_reported_not_hidden() {
    for profile in [
        FrequencyProfile::DeltaPulse { omega0: 1.0, t0: 0.5 },
        FrequencyProfile::SechSquared { alpha: 2.0, beta: 1.0, t0: 0.0 },
    ] {
        let f = closed_form(&profile).unwrap();
        assert_eq!(f.status(), VerifyStatus::Fail, "{profile}");
        assert!(f.mismatch().is_some());
    }
}
