//! Normal-state stability of the general single-mode multilevel model.
//!
//! For `nu` non-degenerate levels coupled to one mode with a diamagnetic term
//! `kappa^2/omega (a + a^dag)^2`, the normal-state Hessian is a bordered
//! diagonal matrix. Its determinant reduces to `X * prod(E_n1)` with
//!
//! ```text
//! X = omega + 4 kappa^2/omega - 4 sum_{n>=2} g_{n,1}^2 / E_{n,1}
//! ```
//!
//! and the level-1 TRK sum rule forces `X >= omega`, so every TRK-compliant
//! model has a locally stable normal state.
//!
//! Also holds the general sum-rule identity
//! `sum_n (E_n - E_l) <l|O|n><n|O|l> = 1/2 <l|[O,[H,O]]|l>` as an executable check.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MultiLevelModel {
    energies: Vec<f64>,
    couplings: DMatrix<f64>,
    omega: f64,
    kappa: f64,
}

impl MultiLevelModel {
    /// `couplings` must be symmetric with a zero diagonal, energies strictly increasing.
    pub fn new(energies: Vec<f64>, couplings: DMatrix<f64>, omega: f64, kappa: f64) -> Result<Self> {
        let nu = energies.len();
        if nu < 2 {
            return Err(Error::InvalidMultiLevel("need at least two levels".into()));
        }
        if couplings.shape() != (nu, nu) {
            return Err(Error::InvalidMultiLevel(format!(
                "coupling matrix is {:?}, expected ({nu}, {nu})",
                couplings.shape()
            )));
        }
        if energies.iter().any(|e| !e.is_finite()) || couplings.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidMultiLevel("non-finite entry".into()));
        }
        if !energies.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidMultiLevel(
                "energies must be strictly increasing".into(),
            ));
        }
        for n in 0..nu {
            if couplings[(n, n)] != 0.0 {
                return Err(Error::InvalidMultiLevel(format!("g[{n}][{n}] must be zero")));
            }
            for m in 0..n {
                if couplings[(n, m)] != couplings[(m, n)] {
                    return Err(Error::InvalidMultiLevel(format!(
                        "g is not symmetric at ({m}, {n})"
                    )));
                }
            }
        }
        if !(omega > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidMultiLevel("omega must be > 0 and kappa finite".into()));
        }
        Ok(Self {
            energies,
            couplings,
            omega,
            kappa,
        })
    }

    /// Builds the symmetric coupling matrix from its strict upper triangle in
    /// row-major order: `g12, g13, ..., g1nu, g23, ...`.
    pub fn from_upper_triangle(energies: Vec<f64>, upper: &[f64], omega: f64, kappa: f64) -> Result<Self> {
        let nu = energies.len();
        if upper.len() != nu * nu.saturating_sub(1) / 2 {
            return Err(Error::InvalidMultiLevel(format!(
                "{} levels need {} couplings, got {}",
                nu,
                nu * nu.saturating_sub(1) / 2,
                upper.len()
            )));
        }
        let mut g = DMatrix::zeros(nu, nu);
        let mut it = upper.iter();
        for n in 0..nu {
            for m in n + 1..nu {
                let v = *it.next().unwrap();
                g[(n, m)] = v;
                g[(m, n)] = v;
            }
        }
        Self::new(energies, g, omega, kappa)
    }

    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Same model with every level shifted by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            energies: self.energies.iter().map(|e| e + c).collect(),
            ..self.clone()
        }
    }

    /// `sum_{n != m} g_{n,m}^2 / (E_n - E_m)` for level `m` (0-based).
    pub fn trk_sum(&self, m: usize) -> f64 {
        (0..self.levels())
            .filter(|&n| n != m)
            .map(|n| self.couplings[(n, m)].powi(2) / (self.energies[n] - self.energies[m]))
            .sum()
    }

    /// Oscillator strengths `f_{n,m} = g_{n,m}^2 omega / ((E_n - E_m) kappa^2)`
    /// out of level `m`; they sum to one when the sum rule is saturated.
    pub fn oscillator_strengths(&self, m: usize) -> Vec<f64> {
        let k2 = self.kappa * self.kappa;
        (0..self.levels())
            .map(|n| {
                if n == m {
                    0.0
                } else {
                    self.couplings[(n, m)].powi(2) * self.omega
                        / ((self.energies[n] - self.energies[m]) * k2)
                }
            })
            .collect()
    }

    fn diamagnetic_stiffness(&self) -> f64 {
        self.omega + 4.0 * self.kappa * self.kappa / self.omega
    }

    /// Mean-field energy per atom to second order around the normal state.
    /// `psi` holds `Psi_2..Psi_nu`.
    pub fn energy_second_order(&self, psi: &[f64], phi: f64) -> f64 {
        let e1 = self.energies[0];
        let mut e = e1 + self.diamagnetic_stiffness() * phi * phi;
        for (k, &p) in psi.iter().enumerate() {
            let n = k + 1;
            e += (self.energies[n] - e1) * p * p + 4.0 * self.couplings[(n, 0)] * p * phi;
        }
        e
    }

    /// Full mean-field energy per atom; `None` when `sum psi^2 > 1`.
    pub fn energy_full(&self, psi: &[f64], phi: f64) -> Option<f64> {
        let r2: f64 = psi.iter().map(|p| p * p).sum();
        if r2 > 1.0 {
            return None;
        }
        let psi1 = (1.0 - r2).sqrt();
        let e1 = self.energies[0];
        let mut e = e1 + self.diamagnetic_stiffness() * phi * phi;
        for (k, &pn) in psi.iter().enumerate() {
            let n = k + 1;
            e += (self.energies[n] - e1) * pn * pn;
            let mut inner = 2.0 * self.couplings[(n, 0)] * psi1;
            for (l, &pm) in psi.iter().enumerate() {
                inner += self.couplings[(n, l + 1)] * pm;
            }
            e += 2.0 * phi * inner * pn;
        }
        Some(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrkReport {
    pub satisfied: bool,
    /// `kappa^2/omega - trk_sum(m)` per level.
    pub slack: Vec<f64>,
}

pub fn trk_satisfied(model: &MultiLevelModel) -> TrkReport {
    trk_satisfied_with(model, 0.0)
}

/// Like [`trk_satisfied`], accepting `slack >= -tol * kappa^2/omega`.
pub fn trk_satisfied_with(model: &MultiLevelModel, tol: f64) -> TrkReport {
    let bound = model.kappa * model.kappa / model.omega;
    let slack: Vec<f64> = (0..model.levels())
        .map(|m| bound - model.trk_sum(m))
        .collect();
    TrkReport {
        satisfied: slack.iter().all(|&s| s >= -tol * bound),
        slack,
    }
}

/// Hessian of the second-order energy at `Psi = phi = 0`; row/column 0 is `phi`.
pub fn normal_hessian(model: &MultiLevelModel) -> DMatrix<f64> {
    let nu = model.levels();
    let e1 = model.energies[0];
    let mut h = DMatrix::zeros(nu, nu);
    h[(0, 0)] = model.diamagnetic_stiffness();
    for n in 1..nu {
        let g = 2.0 * model.couplings[(n, 0)];
        h[(0, n)] = g;
        h[(n, 0)] = g;
        h[(n, n)] = model.energies[n] - e1;
    }
    h * 2.0
}

/// `X = omega + 4 kappa^2/omega - 4 sum g_{n,1}^2 / E_{n,1}`.
pub fn x_value(model: &MultiLevelModel) -> f64 {
    let e1 = model.energies[0];
    let s: f64 = (1..model.levels())
        .map(|n| model.couplings[(n, 0)].powi(2) / (model.energies[n] - e1))
        .sum();
    model.diamagnetic_stiffness() - 4.0 * s
}

/// Trailing principal minors: entry `k-1` is the determinant of the bottom-right `k x k` block.
pub fn trailing_minors(h: &DMatrix<f64>) -> Vec<f64> {
    let n = h.nrows();
    (1..=n)
        .map(|k| h.view((n - k, n - k), (k, k)).into_owned().determinant())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefinitenessVerdict {
    /// All trailing principal minors positive.
    pub positive_definite: bool,
    pub x: f64,
    pub minors: Vec<f64>,
    /// Smallest Hessian eigenvalue, an independent check on the minors.
    pub min_eigenvalue: f64,
    pub trk_satisfied: bool,
    /// `Some(X >= omega)` when the model satisfies the sum rule.
    pub x_at_least_omega: Option<bool>,
}

/// Relative tolerance used by [`check_positive_definite`] for `X >= omega`.
pub const X_TOL: f64 = 1e-12;

pub fn check_positive_definite(model: &MultiLevelModel) -> DefinitenessVerdict {
    let h = normal_hessian(model);
    let minors = trailing_minors(&h);
    let x = x_value(model);
    let trk = trk_satisfied_with(model, 1e-12);
    let scale = model.diamagnetic_stiffness();
    let min_eigenvalue = h.clone().symmetric_eigenvalues().min();
    DefinitenessVerdict {
        positive_definite: minors.iter().all(|&d| d > 0.0),
        x,
        minors,
        min_eigenvalue,
        trk_satisfied: trk.satisfied,
        x_at_least_omega: trk.satisfied.then(|| x >= model.omega - X_TOL * scale),
    }
}

/// Sampling parameters for random TRK-compliant models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSampler {
    pub max_levels: usize,
    pub energy_range: f64,
    /// Fraction of the level-1 sum rule used; drawn from `(0, 1]` when `None`.
    pub fill: Option<f64>,
}

impl Default for ModelSampler {
    fn default() -> Self {
        Self {
            max_levels: 6,
            energy_range: 3.0,
            fill: None,
        }
    }
}

impl ModelSampler {
    /// Random model satisfying every sum rule.
    ///
    /// Level-1 couplings come from oscillator strengths drawn uniformly on the
    /// simplex and scaled to the fill factor. The couplings among excited
    /// levels are drawn uniformly and then scaled down by the largest common
    /// factor that keeps every remaining sum rule satisfied.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> MultiLevelModel {
        let nu = rng.gen_range(2..=self.max_levels.max(2));
        let mut energies: Vec<f64>;
        loop {
            energies = (0..nu).map(|_| rng.gen::<f64>() * self.energy_range).collect();
            energies.sort_by(f64::total_cmp);
            let min_gap = energies.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            if min_gap > 1e-3 * self.energy_range {
                break;
            }
        }
        let omega = rng.gen_range(0.1..2.0);
        let kappa = rng.gen_range(0.05..2.0);
        let bound = kappa * kappa / omega;
        let fill = self.fill.unwrap_or_else(|| 1.0 - rng.gen::<f64>());

        // oscillator strengths out of level 1, uniform on the simplex
        let w: Vec<f64> = (1..nu).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = w.iter().sum();
        let mut g = DMatrix::zeros(nu, nu);
        for n in 1..nu {
            let f = fill * w[n - 1] / total;
            let v = (f * (energies[n] - energies[0]) * bound).sqrt();
            let v = if rng.gen::<bool>() { v } else { -v };
            g[(n, 0)] = v;
            g[(0, n)] = v;
        }

        let mut block = DMatrix::zeros(nu, nu);
        for n in 1..nu {
            for m in n + 1..nu {
                let v = rng.gen_range(-1.0..1.0) * bound.sqrt();
                block[(n, m)] = v;
                block[(m, n)] = v;
            }
        }
        // trk_sum(m) = base_m + s^2 * excited_m for m >= 2
        let mut s2 = 1.0_f64;
        for m in 1..nu {
            let base = g[(0, m)].powi(2) / (energies[0] - energies[m]);
            let excited: f64 = (1..nu)
                .filter(|&n| n != m)
                .map(|n| block[(n, m)].powi(2) / (energies[n] - energies[m]))
                .sum();
            if excited > 0.0 {
                s2 = s2.min(0.999 * (bound - base) / excited);
            }
        }
        let s = s2.max(0.0).sqrt();
        for n in 1..nu {
            for m in 1..nu {
                g[(n, m)] = s * block[(n, m)];
            }
        }
        MultiLevelModel::new(energies, g, omega, kappa).expect("sampled model is valid")
    }
}

/// `count` TRK-compliant models from a seeded generator.
pub fn random_compliant_models(seed: u64, count: usize, sampler: &ModelSampler) -> Vec<MultiLevelModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sampler.sample(&mut rng)).collect()
}

pub type C64 = Complex<f64>;

fn check_square(name: &str, m: &DMatrix<C64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!("{name} is {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m.nrows())
}

/// Both sides of the sum-rule identity for eigenstate `level` of `h`
/// (eigenvalues in ascending order). Returns `(lhs, rhs)`.
pub fn sum_rule_sides(h: &DMatrix<C64>, o: &DMatrix<C64>, level: usize) -> Result<(f64, f64)> {
    let n = check_square("hamiltonian", h)?;
    if check_square("observable", o)? != n {
        return Err(Error::Shape("hamiltonian and observable differ in dimension".into()));
    }
    if level >= n {
        return Err(Error::Shape(format!("level {level} out of range for dimension {n}")));
    }
    let eig = SymmetricEigen::try_new(h.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::Eigen("Hermitian eigensolve did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let l = order[level];
    let el = eig.eigenvalues[l];
    let vl: DVector<C64> = eig.eigenvectors.column(l).into_owned();

    // <n|O|l> for every eigenvector n
    let o_vl = o * &vl;
    let amps = eig.eigenvectors.adjoint() * &o_vl;
    let lhs: f64 = (0..n)
        .map(|k| (eig.eigenvalues[k] - el) * amps[k].norm_sqr())
        .sum();

    let ho = h * o;
    let oh = o * h;
    let inner = &ho - &oh;
    let outer = o * &inner - &inner * o;
    let rhs = 0.5 * (vl.adjoint() * outer * &vl)[(0, 0)].re;
    Ok((lhs, rhs))
}

/// `|lhs - rhs|` of the sum-rule identity; zero up to rounding for any Hermitian pair.
pub fn sum_rule_identity_check(h: &DMatrix<C64>, o: &DMatrix<C64>, level: usize) -> Result<f64> {
    sum_rule_sides(h, o, level).map(|(l, r)| (l - r).abs())
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<C64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Haar-ish random unitary from the QR factor of a random complex matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<C64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    a.qr().q()
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(m: &DMatrix<C64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0, |acc, e| acc.max(e.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumRuleSample {
    pub dim: usize,
    pub level: usize,
    pub residual: f64,
    /// `|O|^2 |H|` in spectral norm.
    pub scale: f64,
}

impl SumRuleSample {
    pub fn relative(&self) -> f64 {
        self.residual / self.scale
    }
}

/// Identity residuals for `count` seeded random Hermitian pairs of dimension `2..=max_dim`.
pub fn sum_rule_survey(seed: u64, count: usize, max_dim: usize) -> Result<Vec<SumRuleSample>> {
    if max_dim < 2 {
        return Err(Error::Shape("sum-rule survey needs dimension at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let dim = rng.gen_range(2..=max_dim);
            let level = rng.gen_range(0..dim);
            let h = random_hermitian(&mut rng, dim);
            let o = random_hermitian(&mut rng, dim);
            let on = hermitian_norm(&o);
            Ok(SumRuleSample {
                dim,
                level,
                residual: sum_rule_identity_check(&h, &o, level)?,
                scale: on * on * hermitian_norm(&h),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    fn two_level(g: f64, delta: f64, omega: f64, kappa: f64) -> MultiLevelModel {
        MultiLevelModel::from_upper_triangle(vec![0.0, delta], &[g], omega, kappa).unwrap()
    }

    fn real(m: DMatrix<f64>) -> DMatrix<C64> {
        m.map(|x| C64::new(x, 0.0))
    }

    #[test]
    fn saturated_two_level() {
        let (delta, omega, kappa): (f64, f64, f64) = (1.3, 0.7, 0.9);
        let g = (delta * kappa * kappa / omega).sqrt();
        let m = two_level(g, delta, omega, kappa);
        let r = trk_satisfied(&m);
        assert!(r.slack[0].abs() < 1e-15);
        let f: f64 = m.oscillator_strengths(0).iter().sum();
        assert_relative_eq!(f, 1.0, epsilon = 1e-14);
        let v = check_positive_definite(&m);
        assert_relative_eq!(v.x, omega, epsilon = 1e-14);
        assert!(v.positive_definite);
    }

    #[test]
    fn uncoupled_model() {
        let m = MultiLevelModel::from_upper_triangle(vec![0.0, 1.0, 2.5], &[0.0; 3], 0.5, 0.4).unwrap();
        let r = trk_satisfied(&m);
        assert!(r.satisfied);
        for s in r.slack {
            assert_relative_eq!(s, 0.4 * 0.4 / 0.5, epsilon = 1e-15);
        }
        let h = normal_hessian(&m);
        assert_eq!(h, DMatrix::from_diagonal(&h.diagonal()));
        assert!(h.diagonal().iter().all(|&d| d > 0.0));
    }

    #[test]
    fn two_level_hessian_shape() {
        let m = two_level(0.3, 1.1, 0.6, 0.2);
        let a = 0.6 + 4.0 * 0.04 / 0.6;
        let expected = dmatrix![2.0 * a, 1.2; 1.2, 2.2];
        assert!((normal_hessian(&m) - expected).amax() < 1e-15);
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let m = MultiLevelModel::from_upper_triangle(
            vec![-0.2, 0.5, 1.1, 2.0],
            &[0.3, -0.2, 0.4, 0.1, 0.05, -0.3],
            0.8,
            0.6,
        )
        .unwrap();
        let h = normal_hessian(&m);
        let nu = m.levels();
        let step = 1e-4;
        // coordinates: 0 -> phi, k -> Psi_{k+1}
        let eval = |x: &[f64]| m.energy_second_order(&x[1..], x[0]);
        for i in 0..nu {
            for j in 0..nu {
                let mut pp = vec![0.0; nu];
                let mut pm = vec![0.0; nu];
                let mut mp = vec![0.0; nu];
                let mut mm = vec![0.0; nu];
                pp[i] += step;
                pp[j] += step;
                pm[i] += step;
                pm[j] -= step;
                mp[i] -= step;
                mp[j] += step;
                mm[i] -= step;
                mm[j] -= step;
                let fd = (eval(&pp) - eval(&pm) - eval(&mp) + eval(&mm)) / (4.0 * step * step);
                assert!((fd - h[(i, j)]).abs() < 1e-6, "({i},{j}) {fd} vs {}", h[(i, j)]);
            }
        }
        // the full energy agrees with the expansion to second order
        let psi = [1e-4, -2e-4, 1.5e-4];
        let phi = 3e-4;
        let diff = m.energy_full(&psi, phi).unwrap() - m.energy_second_order(&psi, phi);
        assert!(diff.abs() < 1e-10);
    }

    #[test]
    fn violating_model_fails_minors() {
        // choose g so that X = -omega/2
        let (delta, omega, kappa): (f64, f64, f64) = (1.0, 0.5, 0.3);
        let target = -omega / 2.0;
        let g = ((omega + 4.0 * kappa * kappa / omega - target) * delta / 4.0).sqrt();
        let m = two_level(g, delta, omega, kappa);
        let v = check_positive_definite(&m);
        assert_relative_eq!(v.x, target, epsilon = 1e-14);
        assert!(!v.positive_definite);
        assert!(v.min_eigenvalue < 0.0);
        assert!(!v.trk_satisfied);
        assert_eq!(v.x_at_least_omega, None);
    }

    #[test]
    fn minors_of_bordered_matrix() {
        let m = MultiLevelModel::from_upper_triangle(vec![0.0, 1.0, 3.0], &[0.2, 0.3, 0.0], 1.0, 1.0).unwrap();
        let h = normal_hessian(&m);
        let minors = trailing_minors(&h);
        assert_relative_eq!(minors[0], 2.0 * 3.0, epsilon = 1e-12);
        assert_relative_eq!(minors[1], 2.0 * 1.0 * 2.0 * 3.0, epsilon = 1e-12);
        assert_relative_eq!(minors[2], 8.0 * x_value(&m) * 1.0 * 3.0, epsilon = 1e-12);
    }

    #[test]
    fn model_validation() {
        assert!(MultiLevelModel::from_upper_triangle(vec![0.0, 0.0], &[0.1], 1.0, 1.0).is_err());
        assert!(MultiLevelModel::from_upper_triangle(vec![0.0, 1.0], &[0.1, 0.2], 1.0, 1.0).is_err());
        assert!(MultiLevelModel::from_upper_triangle(vec![0.0, 1.0], &[0.1], 0.0, 1.0).is_err());
        let g = dmatrix![0.0, 0.1; 0.2, 0.0];
        assert!(MultiLevelModel::new(vec![0.0, 1.0], g, 1.0, 1.0).is_err());
    }

    #[test]
    fn sampler_produces_compliant_models() {
        let models = random_compliant_models(7, 200, &ModelSampler::default());
        for m in &models {
            assert!(trk_satisfied_with(m, 1e-12).satisfied);
            assert!((2..=6).contains(&m.levels()));
        }
        let saturated = ModelSampler {
            fill: Some(1.0),
            ..ModelSampler::default()
        };
        for m in random_compliant_models(8, 50, &saturated) {
            assert!(trk_satisfied_with(&m, 1e-12).slack[0].abs() < 1e-12 * m.kappa().powi(2) / m.omega());
        }
    }

    #[test]
    fn sum_rule_two_level_by_hand() {
        let (delta, d) = (1.7, 0.4);
        let h = real(dmatrix![0.0, 0.0; 0.0, delta]);
        let o = real(dmatrix![0.0, d; d, 0.0]);
        let (lhs, rhs) = sum_rule_sides(&h, &o, 0).unwrap();
        assert_relative_eq!(lhs, delta * d * d, epsilon = 1e-14);
        assert_relative_eq!(rhs, delta * d * d, epsilon = 1e-14);
    }

    #[test]
    fn sum_rule_identity_observable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 5);
        let o = DMatrix::<C64>::identity(5, 5);
        let (lhs, rhs) = sum_rule_sides(&h, &o, 2).unwrap();
        assert!(lhs.abs() < 1e-14 && rhs.abs() < 1e-14);
    }

    #[test]
    fn sum_rule_shape_errors() {
        let h = DMatrix::<C64>::identity(3, 3);
        let o = DMatrix::<C64>::identity(2, 2);
        assert!(matches!(sum_rule_identity_check(&h, &o, 0), Err(Error::Shape(_))));
        assert!(matches!(sum_rule_identity_check(&h, &h, 3), Err(Error::Shape(_))));
    }
}
