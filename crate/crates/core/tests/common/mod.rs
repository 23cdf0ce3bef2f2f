#![allow(dead_code)]

use obstacle_dpp::fields::INACTIVE;
use obstacle_dpp::{ProblemSpec, ScalarField};
use rand::Rng;

fn num<R: Rng>(rng: &mut R, scale: f64) -> String {
    format!("({:.6})", rng.random_range(-scale..scale))
}

/// A random smooth field: affine part, a cross term and one oscillation.
pub fn random_field<R: Rng>(rng: &mut R, scale: f64) -> String {
    format!(
        "{} + {}*x + {}*y + {}*x*y + {}*sin({}*x + {}*y)",
        num(rng, scale),
        num(rng, scale),
        num(rng, scale),
        num(rng, scale),
        num(rng, scale),
        num(rng, 4.0),
        num(rng, 4.0),
    )
}

/// Random data with no, one or two active obstacles, reconciled on the
/// square of half-width `a`.
pub fn random_spec<R: Rng>(rng: &mut R, a: f64) -> ProblemSpec {
    let p = if rng.random_bool(0.25) { 2.0 } else { rng.random_range(2.0..60.0) };
    let f = random_field(rng, 1.0);
    let psi1 = if rng.random_bool(0.8) {
        format!("{f} + {} - {}*(x^2 + y^2)", num(rng, 0.5), rng.random_range(0.0..2.0))
    } else {
        format!("{}", -INACTIVE)
    };
    let psi2 = if rng.random_bool(0.6) {
        format!("{f} + {} + {}*(x^2 + y^2)", num(rng, 0.5), rng.random_range(0.0..2.0))
    } else {
        format!("{INACTIVE}")
    };
    let field = |s: &str| ScalarField::parse(s).unwrap();
    ProblemSpec::new(p, field(&psi1), field(&psi2), field(&f))
        .reconciled(a)
        .unwrap()
}

/// Adds a non-negative random bump to every field of `spec`.
pub fn raised<R: Rng>(rng: &mut R, spec: &ProblemSpec, a: f64) -> ProblemSpec {
    let mut bump = || {
        format!(
            "{} * (1 + sin({}*x + {}*y))",
            rng.random_range(0.0..0.3),
            num(rng, 3.0),
            num(rng, 3.0)
        )
    };
    let up = |s: &ScalarField, b: String| ScalarField::parse(&format!("({}) + {b}", s.source())).unwrap();
    ProblemSpec::new(spec.p, up(&spec.psi1, bump()), up(&spec.psi2, bump()), up(&spec.f, bump()))
        .reconciled(a)
        .unwrap()
}
