//! Mean-field ground-state energy per atom and its reduction to the matter
//! amplitudes.
//!
//! The full surface is
//!
//! ```text
//! E0 = delta Psi2^2 + Delta Psi3^2 + a1 phi1^2 + a2 phi2^2 + c phi1 phi2
//!    + 4 g1 psi1 Psi3 (phi1 + chi1 phi2) + 4 g2 Psi2 Psi3 (phi2 + chi2 phi1)
//! ```
//!
//! with `a_n = omega_n + 4 kappa_n^2 / omega_n`, `c = 8 kappa3^2 / sqrt(omega1 omega2)`
//! and `psi1 = sqrt(1 - Psi2^2 - Psi3^2)`. Note the diamagnetic diagonal uses
//! `kappa_n^2`; that is what the `kappa_n^2/omega_n (a + a^dag)^2` term of the
//! Hamiltonian produces at mean-field level.
//!
//! The boson amplitudes enter quadratically and are eliminated exactly,
//! leaving a function of `(Psi2, Psi3)` on the closed unit disk.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Matter amplitudes `(Psi2, Psi3)`; `psi1` follows from normalization.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MatterPoint {
    pub psi2: f64,
    pub psi3: f64,
}

impl MatterPoint {
    pub const ORIGIN: MatterPoint = MatterPoint { psi2: 0.0, psi3: 0.0 };

    pub fn new(psi2: f64, psi3: f64) -> Self {
        Self { psi2, psi3 }
    }

    pub fn radius_sq(&self) -> f64 {
        self.psi2 * self.psi2 + self.psi3 * self.psi3
    }

    /// Ground-level amplitude `sqrt(1 - Psi2^2 - Psi3^2)`, or `None` outside the disk.
    pub fn psi1(&self) -> Option<f64> {
        let r2 = self.radius_sq();
        if r2 > 1.0 + 1e-15 || !r2.is_finite() {
            None
        } else {
            Some((1.0 - r2).max(0.0).sqrt())
        }
    }

    fn checked_psi1(&self) -> Result<f64> {
        self.psi1().ok_or(Error::OutsideDisk {
            psi2: self.psi2,
            psi3: self.psi3,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BosonFields {
    pub phi1: f64,
    pub phi2: f64,
}

/// The boson part `a1 phi1^2 + a2 phi2^2 + c phi1 phi2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BosonQuadraticForm {
    pub a1: f64,
    pub a2: f64,
    pub c: f64,
}

impl BosonQuadraticForm {
    pub fn new(p: &ModelParams) -> Self {
        Self {
            a1: p.omega1 + 4.0 * p.kappa1 * p.kappa1 / p.omega1,
            a2: p.omega2 + 4.0 * p.kappa2 * p.kappa2 / p.omega2,
            c: 8.0 * p.kappa3 * p.kappa3 / (p.omega1 * p.omega2).sqrt(),
        }
    }

    /// `4 a1 a2 - c^2`, the determinant of the stationarity system.
    pub fn discriminant(&self) -> f64 {
        4.0 * self.a1 * self.a2 - self.c * self.c
    }

    fn checked(p: &ModelParams) -> Result<Self> {
        let q = Self::new(p);
        let d = q.discriminant();
        if q.a1 > 0.0 && q.a2 > 0.0 && d > 0.0 {
            Ok(q)
        } else {
            Err(Error::SingularBosonForm(d))
        }
    }

    /// `q(u1, u2) = a2 u1^2 - c u1 u2 + a1 u2^2`.
    fn weight(&self, u1: f64, u2: f64) -> f64 {
        self.a2 * u1 * u1 - self.c * u1 * u2 + self.a1 * u2 * u2
    }
}

pub fn full_energy(p: &ModelParams, m: MatterPoint, b: BosonFields) -> Result<f64> {
    let psi1 = m.checked_psi1()?;
    let q = BosonQuadraticForm::new(p);
    let MatterPoint { psi2, psi3 } = m;
    let BosonFields { phi1, phi2 } = b;
    Ok(p.delta * psi2 * psi2
        + p.big_delta * psi3 * psi3
        + q.a1 * phi1 * phi1
        + q.a2 * phi2 * phi2
        + 4.0 * p.g1 * psi1 * psi3 * (phi1 + p.chi1 * phi2)
        + 4.0 * p.g2 * psi2 * psi3 * (phi2 + p.chi2 * phi1)
        + q.c * phi1 * phi2)
}

/// `u1 = g1 psi1 + chi2 g2 Psi2`, `u2 = chi1 g1 psi1 + g2 Psi2`; the linear
/// boson coefficients are `b_n = 4 Psi3 u_n`.
fn source(p: &ModelParams, psi1: f64, psi2: f64) -> (f64, f64) {
    (
        p.g1 * psi1 + p.chi2 * p.g2 * psi2,
        p.chi1 * p.g1 * psi1 + p.g2 * psi2,
    )
}

/// Boson amplitudes minimizing [`full_energy`] at fixed matter amplitudes.
pub fn eliminate_bosons(p: &ModelParams, m: MatterPoint) -> Result<BosonFields> {
    let psi1 = m.checked_psi1()?;
    let q = BosonQuadraticForm::checked(p)?;
    let (u1, u2) = source(p, psi1, m.psi2);
    let b1 = 4.0 * m.psi3 * u1;
    let b2 = 4.0 * m.psi3 * u2;
    // 2 a1 phi1 + c phi2 = -b1 ; c phi1 + 2 a2 phi2 = -b2
    let det = q.discriminant();
    Ok(BosonFields {
        phi1: (-2.0 * q.a2 * b1 + q.c * b2) / det,
        phi2: (q.c * b1 - 2.0 * q.a1 * b2) / det,
    })
}

/// Ground-state energy with the bosons eliminated.
pub fn reduced_energy(p: &ModelParams, m: MatterPoint) -> Result<f64> {
    let psi1 = m.checked_psi1()?;
    let q = BosonQuadraticForm::checked(p)?;
    Ok(reduced_from_parts(p, &q, psi1, m.psi2, m.psi3))
}

fn reduced_from_parts(
    p: &ModelParams,
    q: &BosonQuadraticForm,
    psi1: f64,
    psi2: f64,
    psi3: f64,
) -> f64 {
    let (u1, u2) = source(p, psi1, psi2);
    let s = 16.0 / q.discriminant();
    p.delta * psi2 * psi2 + p.big_delta * psi3 * psi3 - s * psi3 * psi3 * q.weight(u1, u2)
}

/// Value, gradient and Hessian of the reduced energy at an interior point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalModel {
    pub energy: f64,
    pub gradient: Vector2<f64>,
    pub hessian: Matrix2<f64>,
}

/// Interior radius used by derivative evaluations.
pub const INTERIOR_RADIUS: f64 = 1.0 - 1e-12;

pub fn reduced_local(p: &ModelParams, m: MatterPoint) -> Result<LocalModel> {
    let q = BosonQuadraticForm::checked(p)?;
    let r2 = m.radius_sq();
    if !(r2 < INTERIOR_RADIUS * INTERIOR_RADIUS) {
        return Err(if r2 <= 1.0 + 1e-15 {
            Error::OnBoundary {
                psi2: m.psi2,
                psi3: m.psi3,
            }
        } else {
            Error::OutsideDisk {
                psi2: m.psi2,
                psi3: m.psi3,
            }
        });
    }
    let (x, y) = (m.psi2, m.psi3);
    let psi = (1.0 - r2).sqrt();
    let psi3c = psi * psi * psi;

    // derivatives of psi1 with respect to (x, y)
    let px = -x / psi;
    let py = -y / psi;
    let pxx = -(1.0 - y * y) / psi3c;
    let pyy = -(1.0 - x * x) / psi3c;
    let pxy = -x * y / psi3c;

    let (u1, u2) = source(p, psi, x);
    let (g1, g2, chi1, chi2) = (p.g1, p.g2, p.chi1, p.chi2);
    let u1d = [g1 * px + chi2 * g2, g1 * py];
    let u2d = [chi1 * g1 * px + g2, chi1 * g1 * py];
    let u1dd = [[g1 * pxx, g1 * pxy], [g1 * pxy, g1 * pyy]];
    let u2dd = [
        [chi1 * g1 * pxx, chi1 * g1 * pxy],
        [chi1 * g1 * pxy, chi1 * g1 * pyy],
    ];

    let w = q.weight(u1, u2);
    let w_u1 = 2.0 * q.a2 * u1 - q.c * u2;
    let w_u2 = 2.0 * q.a1 * u2 - q.c * u1;
    let (w11, w22, w12) = (2.0 * q.a2, 2.0 * q.a1, -q.c);

    let wd = [0, 1].map(|i| w_u1 * u1d[i] + w_u2 * u2d[i]);
    let mut wdd = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            wdd[i][j] = w11 * u1d[i] * u1d[j]
                + w12 * (u1d[i] * u2d[j] + u2d[i] * u1d[j])
                + w22 * u2d[i] * u2d[j]
                + w_u1 * u1dd[i][j]
                + w_u2 * u2dd[i][j];
        }
    }

    let s = 16.0 / q.discriminant();
    let energy = p.delta * x * x + p.big_delta * y * y - s * y * y * w;
    let gx = 2.0 * p.delta * x - s * y * y * wd[0];
    let gy = 2.0 * p.big_delta * y - s * (2.0 * y * w + y * y * wd[1]);
    let hxx = 2.0 * p.delta - s * y * y * wdd[0][0];
    let hxy = -s * (2.0 * y * wd[0] + y * y * wdd[0][1]);
    let hyy = 2.0 * p.big_delta - s * (2.0 * w + 4.0 * y * wd[1] + y * y * wdd[1][1]);
    Ok(LocalModel {
        energy,
        gradient: Vector2::new(gx, gy),
        hessian: Matrix2::new(hxx, hxy, hxy, hyy),
    })
}

pub fn reduced_gradient(p: &ModelParams, m: MatterPoint) -> Result<Vector2<f64>> {
    reduced_local(p, m).map(|l| l.gradient)
}

pub fn reduced_hessian(p: &ModelParams, m: MatterPoint) -> Result<Matrix2<f64>> {
    reduced_local(p, m).map(|l| l.hessian)
}

/// The reduced energy as a polynomial in `z = (psi1, Psi2, Psi3)`, without the
/// normalization constraint. Lets a search cross `psi1 = 0`, where the disk
/// parametrization is singular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereModel {
    pub energy: f64,
    pub gradient: Vector3<f64>,
    pub hessian: Matrix3<f64>,
}

pub fn sphere_local(p: &ModelParams, z: Vector3<f64>) -> Result<SphereModel> {
    let q = BosonQuadraticForm::checked(p)?;
    let (x, y) = (z[1], z[2]);
    let (u1, u2) = source(p, z[0], x);
    // u = B (psi1, Psi2)
    let b = Matrix2::new(p.g1, p.chi2 * p.g2, p.chi1 * p.g1, p.g2);
    let w = Matrix2::new(q.a2, -0.5 * q.c, -0.5 * q.c, q.a1);
    let m = b.transpose() * w * b;
    let v = Vector2::new(z[0], x);
    let mv = m * v;
    let weight = q.weight(u1, u2);
    let s = 16.0 / q.discriminant();
    let y2 = y * y;

    let energy = p.delta * x * x + p.big_delta * y2 - s * y2 * weight;
    let gradient = Vector3::new(
        -2.0 * s * y2 * mv[0],
        2.0 * p.delta * x - 2.0 * s * y2 * mv[1],
        2.0 * p.big_delta * y - 2.0 * s * y * weight,
    );
    let mut hessian = Matrix3::zeros();
    for i in 0..2 {
        for j in 0..2 {
            hessian[(i, j)] = -2.0 * s * y2 * m[(i, j)];
        }
        hessian[(i, 2)] = -4.0 * s * y * mv[i];
        hessian[(2, i)] = hessian[(i, 2)];
    }
    hessian[(1, 1)] += 2.0 * p.delta;
    hessian[(2, 2)] = 2.0 * p.big_delta - 2.0 * s * weight;
    Ok(SphereModel {
        energy,
        gradient,
        hessian,
    })
}

/// Closed-form critical coupling `g1,c` above which the normal state is unstable.
///
/// Independent of `g2`. Errors when the denominator of the closed form is
/// non-positive; stability must then be decided from the Hessian alone.
pub fn critical_coupling_g1c(p: &ModelParams) -> Result<f64> {
    let (w1, w2) = (p.omega1, p.omega2);
    let k1 = 4.0 * p.kappa1.powi(2) / (w1 * w1);
    let k2 = 4.0 * p.kappa2.powi(2) / (w2 * w2);
    let numer = (1.0 + k1) * (1.0 + k2) - 16.0 * p.kappa3.powi(4) / (w1 * w1 * w2 * w2);
    let denom = 1.0 + k2 + (w1 / w2) * p.chi1 * p.chi1 * (1.0 + k1)
        - 8.0 * p.kappa3.powi(2) / (w2 * w2) * p.chi1 * (w2 / w1).sqrt();
    if !(denom > 0.0) {
        return Err(Error::CriticalDenominator(denom));
    }
    Ok((p.big_delta * w1 / 4.0 * numer / denom).sqrt())
}

/// Relative eigenvalue floor for positive-(semi)definiteness decisions.
pub const DEFINITENESS_TOL: f64 = 1e-10;

/// Smallest eigenvalue compared against `-tol * scale`, scale = largest |entry|.
pub fn is_positive_semidefinite(h: &Matrix2<f64>, tol: f64) -> bool {
    let scale = h.amax().max(f64::MIN_POSITIVE);
    let min_ev = h.symmetric_eigenvalues().min();
    min_ev >= -tol * scale
}

/// Whether the normal state is a local minimum, decided from the Hessian at the origin.
pub fn normal_state_stable(p: &ModelParams) -> Result<bool> {
    let h = reduced_hessian(p, MatterPoint::ORIGIN)?;
    Ok(is_positive_semidefinite(&h, DEFINITENESS_TOL))
}
