//! Model parameters for the two-mode lambda system, their validation, the
//! Thomas-Reiche-Kuhn coupling bounds and the mapping from microscopic
//! dipole/polarization data onto the abstract couplings.
//!
//! Energies are dimensionless multiples of whatever unit the caller picks;
//! configs conventionally use `big_delta = 1`.

use std::fmt;

use crate::error::{Error, Result};

/// The eleven couplings and energies of the model Hamiltonian.
///
/// `delta = E2 - E1` and `big_delta = E3 - E1`; the lowest level sits at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub delta: f64,
    pub big_delta: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub g1: f64,
    pub g2: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
}

/// A broken parameter invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub rule: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Rule text for the positive-definiteness requirement on the boson quadratic form.
pub const BOSON_PD_RULE: &str = "(w1+4k1^2/w1)(w2+4k2^2/w2) > 16k3^4/(w1 w2)";

impl ModelParams {
    /// Keys accepted in abstract-mode parameter files, in canonical order.
    pub const KEYS: [&'static str; 11] = [
        "delta",
        "big_delta",
        "omega1",
        "omega2",
        "g1",
        "g2",
        "chi1",
        "chi2",
        "kappa1",
        "kappa2",
        "kappa3",
    ];

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "delta" => self.delta,
            "big_delta" => self.big_delta,
            "omega1" => self.omega1,
            "omega2" => self.omega2,
            "g1" => self.g1,
            "g2" => self.g2,
            "chi1" => self.chi1,
            "chi2" => self.chi2,
            "kappa1" => self.kappa1,
            "kappa2" => self.kappa2,
            "kappa3" => self.kappa3,
            _ => return None,
        })
    }

    /// Sets a field by its config key. Returns `false` for unknown keys.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let slot = match key {
            "delta" => &mut self.delta,
            "big_delta" => &mut self.big_delta,
            "omega1" => &mut self.omega1,
            "omega2" => &mut self.omega2,
            "g1" => &mut self.g1,
            "g2" => &mut self.g2,
            "chi1" => &mut self.chi1,
            "chi2" => &mut self.chi2,
            "kappa1" => &mut self.kappa1,
            "kappa2" => &mut self.kappa2,
            "kappa3" => &mut self.kappa3,
            _ => return false,
        };
        *slot = value;
        true
    }

    pub fn with_couplings(mut self, g1: f64, g2: f64) -> Self {
        self.g1 = g1;
        self.g2 = g2;
        self
    }

    /// Returns `self` if every invariant holds.
    pub fn validated(self) -> Result<Self> {
        let v = validate(&self);
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidParams(v))
        }
    }
}

/// Lists every broken invariant of `p`; empty when the parameters are usable.
pub fn validate(p: &ModelParams) -> Vec<Violation> {
    let mut out = Vec::new();
    for key in ModelParams::KEYS {
        if !p.get(key).unwrap().is_finite() {
            out.push(Violation {
                field: key,
                rule: "finite",
            });
        }
    }
    if !out.is_empty() {
        return out;
    }
    let mut check = |ok: bool, field, rule| {
        if !ok {
            out.push(Violation { field, rule });
        }
    };
    check(p.big_delta > 0.0, "big_delta", "big_delta > 0");
    check(p.delta >= 0.0, "delta", "delta >= 0");
    check(p.delta <= p.big_delta, "delta", "delta <= big_delta");
    check(p.omega1 > 0.0, "omega1", "omega1 > 0");
    check(p.omega2 > 0.0, "omega2", "omega2 > 0");
    check(p.g1 >= 0.0, "g1", "g1 >= 0");
    check(p.g2 >= 0.0, "g2", "g2 >= 0");
    check(p.kappa1 >= 0.0, "kappa1", "kappa1 >= 0");
    check(p.kappa2 >= 0.0, "kappa2", "kappa2 >= 0");
    check(p.kappa3 >= 0.0, "kappa3", "kappa3 >= 0");
    if p.omega1 > 0.0 && p.omega2 > 0.0 {
        let lhs = (p.omega1 + 4.0 * p.kappa1.powi(2) / p.omega1)
            * (p.omega2 + 4.0 * p.kappa2.powi(2) / p.omega2);
        let rhs = 16.0 * p.kappa3.powi(4) / (p.omega1 * p.omega2);
        check(lhs > rhs, "kappa3", BOSON_PD_RULE);
    }
    out
}

/// Upper bounds on `g1`, `g2` implied by the TRK sum rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrkBounds {
    pub g1_trk: f64,
    pub g2_trk: f64,
}

/// `g1_trk = kappa*sqrt(big_delta/omega1)`, `g2_trk = kappa*sqrt((big_delta-delta)/omega2)`.
pub fn trk_bounds(p: &ModelParams, kappa: f64) -> TrkBounds {
    TrkBounds {
        g1_trk: kappa * (p.big_delta / p.omega1).sqrt(),
        g2_trk: kappa * ((p.big_delta - p.delta).max(0.0) / p.omega2).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrkCompliance {
    pub compliant: bool,
    /// `g1_trk - g1`; negative when violated.
    pub slack1: f64,
    /// `g2_trk - g2`; negative when violated.
    pub slack2: f64,
}

pub fn check_trk_compliance(p: &ModelParams, kappa: f64) -> TrkCompliance {
    let b = trk_bounds(p, kappa);
    let slack1 = b.g1_trk - p.g1;
    let slack2 = b.g2_trk - p.g2;
    TrkCompliance {
        compliant: slack1 >= 0.0 && slack2 >= 0.0,
        slack1,
        slack2,
    }
}

pub type Vec3 = [f64; 3];

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Microscopic description of lambda atoms in a two-mode resonator.
///
/// The dipole element between the two ground states is taken to vanish.
/// `g1`, `g2` are given directly rather than through cavity volume and
/// dipole magnitudes; the TRK bounds still follow from `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicConfig {
    pub big_delta: f64,
    pub delta: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub kappa: f64,
    pub eps1: Vec3,
    pub eps2: Vec3,
    pub d31: Vec3,
    pub d32: Vec3,
    pub g1: f64,
    pub g2: f64,
    /// Accept parallel polarizations (`|eps1 . eps2| = 1`).
    pub allow_parallel: bool,
}

impl AtomicConfig {
    pub const KEYS: [&'static str; 11] = [
        "delta",
        "big_delta",
        "omega1",
        "omega2",
        "g1",
        "g2",
        "kappa",
        "eps1",
        "eps2",
        "d31",
        "d32",
    ];

    /// Overlap `alpha = eps1 . eps2`.
    pub fn alpha(&self) -> f64 {
        dot(&self.eps1, &self.eps2)
    }

    /// `alpha_{nl} = |d_{3n} . eps_l| / |d_{3n}|`, indexed `[n-1][l-1]`.
    pub fn projections(&self) -> [[f64; 2]; 2] {
        let eps = [&self.eps1, &self.eps2];
        let d = [&self.d31, &self.d32];
        let mut out = [[0.0; 2]; 2];
        for n in 0..2 {
            let dn = norm(d[n]);
            for l in 0..2 {
                out[n][l] = if dn > 0.0 {
                    dot(d[n], eps[l]).abs() / dn
                } else {
                    0.0
                };
            }
        }
        out
    }
}

/// Result of mapping an [`AtomicConfig`] onto [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicMapping {
    pub params: ModelParams,
    pub alpha: f64,
    pub projections: [[f64; 2]; 2],
    pub trk: TrkBounds,
    pub compliance: TrkCompliance,
}

const UNIT_TOL: f64 = 1e-9;

pub fn from_atomic(cfg: &AtomicConfig) -> Result<AtomicMapping> {
    for (name, v) in [("eps1", &cfg.eps1), ("eps2", &cfg.eps2)] {
        if (norm(v) - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidAtomic(format!(
                "|{name}| = {} but polarization vectors must be unit length",
                norm(v)
            )));
        }
    }
    for (name, v) in [("d31", &cfg.d31), ("d32", &cfg.d32)] {
        if norm(v) == 0.0 {
            return Err(Error::InvalidAtomic(format!("{name} is the zero vector")));
        }
    }
    let alpha = cfg.alpha();
    if alpha < 0.0 {
        return Err(Error::NegativeAlpha(alpha));
    }
    if (alpha.abs() - 1.0).abs() <= UNIT_TOL && !cfg.allow_parallel {
        return Err(Error::InvalidAtomic(
            "eps1 and eps2 are parallel; the two modes are degenerate".into(),
        ));
    }
    let a = cfg.projections();
    if a[0][0] == 0.0 {
        return Err(Error::ZeroProjection("alpha11"));
    }
    if a[1][1] == 0.0 {
        return Err(Error::ZeroProjection("alpha22"));
    }
    let alpha = alpha.min(1.0);
    let params = ModelParams {
        delta: cfg.delta,
        big_delta: cfg.big_delta,
        omega1: cfg.omega1,
        omega2: cfg.omega2,
        g1: cfg.g1,
        g2: cfg.g2,
        chi1: a[0][1] / a[0][0] * (cfg.omega1 / cfg.omega2).sqrt(),
        chi2: a[1][0] / a[1][1] * (cfg.omega2 / cfg.omega1).sqrt(),
        kappa1: cfg.kappa,
        kappa2: cfg.kappa,
        kappa3: cfg.kappa * alpha.sqrt(),
    };
    let params = params.validated()?;
    Ok(AtomicMapping {
        params,
        alpha,
        projections: a,
        trk: trk_bounds(&params, cfg.kappa),
        compliance: check_trk_compliance(&params, cfg.kappa),
    })
}

/// Atomic configuration behind the reference phase diagram: `delta = 0.1`,
/// `big_delta = 1`, `omega1 = 0.5`, `omega2 = 0.6`, `kappa = 1`, polarizations
/// at 45 degrees (`alpha = sqrt(0.5)`) and dipoles along their own polarization.
pub fn reference_atomic(g1: f64, g2: f64) -> AtomicConfig {
    let h = 0.5_f64.sqrt();
    AtomicConfig {
        big_delta: 1.0,
        delta: 0.1,
        omega1: 0.5,
        omega2: 0.6,
        kappa: 1.0,
        eps1: [1.0, 0.0, 0.0],
        eps2: [h, h, 0.0],
        d31: [1.0, 0.0, 0.0],
        d32: [h, h, 0.0],
        g1,
        g2,
        allow_parallel: false,
    }
}

/// Abstract parameters of [`reference_atomic`] with both couplings zero.
pub fn reference_params() -> ModelParams {
    from_atomic(&reference_atomic(0.0, 0.0))
        .expect("reference configuration is valid")
        .params
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> ModelParams {
        ModelParams {
            delta: 0.0,
            big_delta: 1.0,
            omega1: 1.0,
            omega2: 1.0,
            g1: 0.0,
            g2: 0.0,
            chi1: 0.0,
            chi2: 0.0,
            kappa1: 0.0,
            kappa2: 0.0,
            kappa3: 0.0,
        }
    }

    #[test]
    fn reference_set_is_valid() {
        let p = reference_params();
        assert!(validate(&p).is_empty());
        assert_relative_eq!(p.kappa3, 0.5_f64.powf(0.25), epsilon = 1e-14);
        assert_eq!(p.kappa1, 1.0);
        assert_eq!(p.kappa2, 1.0);
    }

    #[test]
    fn zero_omega_is_reported() {
        let mut p = unit();
        p.omega1 = 0.0;
        let v = validate(&p);
        assert!(v.iter().any(|x| x.field == "omega1" && x.rule == "omega1 > 0"));
    }

    #[test]
    fn indefinite_boson_form_is_reported() {
        let mut p = unit();
        p.kappa3 = 1.0;
        let v = validate(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, BOSON_PD_RULE);
    }

    #[test]
    fn negative_couplings_rejected() {
        let mut p = unit();
        p.g2 = -0.1;
        assert!(validate(&p).iter().any(|x| x.field == "g2"));
        p.g2 = f64::NAN;
        assert_eq!(validate(&p)[0].rule, "finite");
    }

    #[test]
    fn trk_reference_values() {
        let p = reference_params();
        let b = trk_bounds(&p, 1.0);
        assert_relative_eq!(b.g1_trk, 2.0_f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(b.g2_trk, 1.5_f64.sqrt(), epsilon = 1e-15);
        assert_eq!(trk_bounds(&p, 0.0), TrkBounds { g1_trk: 0.0, g2_trk: 0.0 });
        let mut q = p;
        q.delta = q.big_delta;
        assert_eq!(trk_bounds(&q, 1.0).g2_trk, 0.0);
    }

    #[test]
    fn trk_compliance_edges() {
        let b = trk_bounds(&reference_params(), 1.0);
        let p = reference_params().with_couplings(b.g1_trk, b.g2_trk);
        let c = check_trk_compliance(&p, 1.0);
        assert!(c.compliant);
        assert_eq!((c.slack1, c.slack2), (0.0, 0.0));
        let p = p.with_couplings(1.01 * b.g1_trk, b.g2_trk);
        assert!(!check_trk_compliance(&p, 1.0).compliant);
    }

    #[test]
    fn atomic_mapping_reference_chi() {
        let m = from_atomic(&reference_atomic(0.3, 0.2)).unwrap();
        // independent evaluation: alpha11 = alpha22 = 1, alpha12 = alpha21 = cos(45 deg)
        let alpha = std::f64::consts::FRAC_PI_4.cos();
        assert_relative_eq!(m.alpha, alpha, epsilon = 1e-15);
        assert_relative_eq!(m.projections[0][0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(m.projections[1][1], 1.0, epsilon = 1e-15);
        assert_relative_eq!(m.params.chi1, 0.645497224367903, epsilon = 1e-12);
        assert_relative_eq!(m.params.chi2, 0.774596669241483, epsilon = 1e-12);
        assert_eq!((m.params.g1, m.params.g2), (0.3, 0.2));
        assert!(m.compliance.compliant);
    }

    #[test]
    fn orthogonal_polarizations_decouple() {
        let mut cfg = reference_atomic(0.1, 0.1);
        cfg.eps2 = [0.0, 1.0, 0.0];
        cfg.d32 = [0.0, 2.0, 0.0];
        let m = from_atomic(&cfg).unwrap();
        assert_eq!(m.params.kappa3, 0.0);
        assert_eq!(m.params.chi1, 0.0);
        assert_eq!(m.params.chi2, 0.0);
    }

    #[test]
    fn atomic_errors() {
        let mut cfg = reference_atomic(0.1, 0.1);
        cfg.d31 = [0.0, 0.0, 1.0];
        assert_eq!(from_atomic(&cfg).unwrap_err(), Error::ZeroProjection("alpha11"));

        let mut cfg = reference_atomic(0.1, 0.1);
        cfg.eps2 = [-0.6, 0.8, 0.0];
        assert!(matches!(from_atomic(&cfg), Err(Error::NegativeAlpha(_))));

        let mut cfg = reference_atomic(0.1, 0.1);
        cfg.eps1 = [2.0, 0.0, 0.0];
        assert!(matches!(from_atomic(&cfg), Err(Error::InvalidAtomic(_))));

        let mut cfg = reference_atomic(0.1, 0.1);
        cfg.eps2 = cfg.eps1;
        cfg.d32 = cfg.eps1;
        assert!(from_atomic(&cfg).is_err());
        cfg.allow_parallel = true;
        assert!(from_atomic(&cfg).is_ok());
    }
}
