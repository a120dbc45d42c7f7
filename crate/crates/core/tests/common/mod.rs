#![allow(dead_code)]

use lambda_dicke::model::ModelParams;
use rand::Rng;

/// Maps eleven unit-interval samples onto a parameter set that passes validation.
///
/// `kappa3` is drawn as a fraction (< 0.95) of the largest value keeping the
/// boson quadratic form positive definite.
pub fn params_from(u: [f64; 11]) -> ModelParams {
    let delta = 0.9 * u[0];
    let omega1 = 0.2 + 1.8 * u[2];
    let omega2 = 0.2 + 1.8 * u[3];
    let kappa1 = 1.5 * u[8];
    let kappa2 = 1.5 * u[9];
    let a1 = omega1 + 4.0 * kappa1 * kappa1 / omega1;
    let a2 = omega2 + 4.0 * kappa2 * kappa2 / omega2;
    let k3_max4 = a1 * a2 * omega1 * omega2 / 16.0;
    ModelParams {
        delta,
        big_delta: delta + 0.1 + 1.4 * u[1],
        omega1,
        omega2,
        g1: 2.0 * u[4],
        g2: 2.0 * u[5],
        chi1: 1.5 * u[6],
        chi2: 1.5 * u[7],
        kappa1,
        kappa2,
        kappa3: (0.95 * u[10] * k3_max4).powf(0.25),
    }
}

pub fn random_params<R: Rng>(rng: &mut R) -> ModelParams {
    let mut u = [0.0; 11];
    u.iter_mut().for_each(|x| *x = rng.gen::<f64>());
    params_from(u)
}

/// Smallest and largest eigenvalue of a symmetric 2x2 matrix `[[a, b], [b, d]]`.
pub fn sym2_eigen(a: f64, b: f64, d: f64) -> (f64, f64) {
    let m = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    (m - r, m + r)
}
