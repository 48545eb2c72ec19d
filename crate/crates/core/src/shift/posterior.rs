//! Negative log posterior of the line-pair shift under the
//! Gaussian-process image model.
//!
//! A pair of patches (one per line, `p` pixels each) is stacked into a
//! `2p` vector modeled as a zero-mean Gaussian whose covariance couples
//! the rows through the shift `(dx, dy)`. The posterior adds a Gaussian
//! prior on `dx` and an exponential prior on `dy >= 0`.

use super::kernel::{covariance_entry, covariance_entry_grad, KernelParams};
use crate::error::Error;
use crate::Result;
use nalgebra::{Cholesky, DMatrix, DVector};

/// Prior over the per-line-pair shift.
#[derive(Debug, Clone, Copy)]
pub struct ShiftPrior {
    /// Standard deviation of the Gaussian prior on dx, pixels.
    pub dx_std: f64,
    /// Rate of the exponential prior on dy, 1/pixels.
    pub dy_rate: f64,
}

impl Default for ShiftPrior {
    fn default() -> Self {
        Self {
            dx_std: 0.5,
            dy_rate: 1.0,
        }
    }
}

impl ShiftPrior {
    pub fn new(dx_std: f64, dy_rate: f64) -> Result<Self> {
        if !(dx_std > 0.0) || !(dy_rate > 0.0) {
            return Err(Error::InvalidInput(format!(
                "prior parameters must be positive: dx_std {dx_std}, dy_rate {dy_rate}"
            )));
        }
        Ok(Self { dx_std, dy_rate })
    }

    /// Negative log prior density up to constants, with its gradient.
    pub fn neg_log_density(&self, dx: f64, dy: f64) -> (f64, f64, f64) {
        let var = self.dx_std * self.dx_std;
        (dx * dx / (2.0 * var) + self.dy_rate * dy, dx / var, self.dy_rate)
    }

    /// Mean of the exponential dy prior, used for flagged fallbacks.
    pub fn dy_mean(&self) -> f64 {
        1.0 / self.dy_rate
    }
}

/// Relative diagonal jitter added to every joint covariance.
pub const BASE_JITTER: f64 = 1e-8;
/// Jitter escalation cap; factorization failures beyond it are fatal.
const MAX_JITTER: f64 = 1e-4;

/// Joint covariance of the stacked vector `[line A patch; line B patch]`.
///
/// Within-row blocks use zero shift; cross-row blocks evaluate the kernel
/// at `(d = i - j, dx, dy)`. A fixed diagonal jitter of
/// `BASE_JITTER * variance` keeps the factorization stable.
pub fn build_joint_covariance(
    params: &KernelParams,
    patch_len: usize,
    dx: f64,
    dy: f64,
) -> DMatrix<f64> {
    build_joint_covariance_with_jitter(params, patch_len, dx, dy, BASE_JITTER * params.variance)
}

fn build_joint_covariance_with_jitter(
    params: &KernelParams,
    patch_len: usize,
    dx: f64,
    dy: f64,
    jitter: f64,
) -> DMatrix<f64> {
    let p = patch_len;
    let mut sigma = DMatrix::zeros(2 * p, 2 * p);
    for i in 0..p {
        for j in 0..p {
            let within = covariance_entry(params, (i as f64 - j as f64).abs(), 0.0, 0.0);
            sigma[(i, j)] = within;
            sigma[(p + i, p + j)] = within;
            let cross = covariance_entry(params, i as f64 - j as f64, dx, dy);
            sigma[(i, p + j)] = cross;
            sigma[(p + j, i)] = cross;
        }
    }
    for i in 0..2 * p {
        sigma[(i, i)] += jitter;
    }
    sigma
}

/// Partial derivatives of the joint covariance in `dx` and `dy`; only the
/// cross blocks depend on the shift.
fn covariance_derivatives(
    params: &KernelParams,
    patch_len: usize,
    dx: f64,
    dy: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let p = patch_len;
    let mut d_dx = DMatrix::zeros(2 * p, 2 * p);
    let mut d_dy = DMatrix::zeros(2 * p, 2 * p);
    for i in 0..p {
        for j in 0..p {
            let (gx, gy) = covariance_entry_grad(params, i as f64 - j as f64, dx, dy);
            d_dx[(i, p + j)] = gx;
            d_dx[(p + j, i)] = gx;
            d_dy[(i, p + j)] = gy;
            d_dy[(p + j, i)] = gy;
        }
    }
    (d_dx, d_dy)
}

/// Shared per-(dx, dy) factorization used to score many patches at once.
pub(crate) struct JointModel {
    chol: Cholesky<f64, nalgebra::Dyn>,
    log_det: f64,
    d_dx: DMatrix<f64>,
    d_dy: DMatrix<f64>,
    /// tr(Sigma^-1 dSigma/d.) terms, shared across patches.
    trace_dx: f64,
    trace_dy: f64,
}

impl JointModel {
    /// Factorizes the joint covariance, escalating jitter by factors of 10
    /// up to `MAX_JITTER * variance` before giving up.
    pub fn new(params: &KernelParams, patch_len: usize, dx: f64, dy: f64) -> Result<Self> {
        let mut jitter = BASE_JITTER * params.variance;
        let chol = loop {
            let sigma = build_joint_covariance_with_jitter(params, patch_len, dx, dy, jitter);
            match Cholesky::new(sigma) {
                Some(c) => break c,
                None => {
                    jitter *= 10.0;
                    if jitter > MAX_JITTER * params.variance {
                        return Err(Error::Numerical(format!(
                            "joint covariance not positive definite at dx {dx}, dy {dy}"
                        )));
                    }
                }
            }
        };
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let inverse = chol.inverse();
        let (d_dx, d_dy) = covariance_derivatives(params, patch_len, dx, dy);
        let trace_dx = inverse.zip_fold(&d_dx, 0.0, |acc, a, b| acc + a * b);
        let trace_dy = inverse.zip_fold(&d_dy, 0.0, |acc, a, b| acc + a * b);
        Ok(Self {
            chol,
            log_det,
            d_dx,
            d_dy,
            trace_dx,
            trace_dy,
        })
    }

    /// Negative log likelihood of one stacked patch (up to constants) and
    /// its gradient in `(dx, dy)`.
    pub fn patch_nll(&self, stacked: &[f64]) -> (f64, f64, f64) {
        let v = DVector::from_column_slice(stacked);
        let alpha = self.chol.solve(&v);
        let quad = alpha.dot(&v);
        let nll = 0.5 * (quad + self.log_det);
        // d(-log p)/dtheta = 0.5 [tr(S^-1 dS) - alpha' dS alpha]
        let g_dx = 0.5 * (self.trace_dx - alpha.dot(&(&self.d_dx * &alpha)));
        let g_dy = 0.5 * (self.trace_dy - alpha.dot(&(&self.d_dy * &alpha)));
        (nll, g_dx, g_dy)
    }
}

/// Negative log posterior of a single stacked patch vector, with its
/// gradient in `(dx, dy)`. The vector length must be even; the patch
/// length is half of it. Requires `dy >= 0`.
pub fn neg_log_posterior(
    stacked: &[f64],
    params: &KernelParams,
    prior: &ShiftPrior,
    dx: f64,
    dy: f64,
) -> Result<(f64, [f64; 2])> {
    if stacked.len() % 2 != 0 || stacked.is_empty() {
        return Err(Error::InvalidInput(
            "stacked patch vector must have even, positive length".into(),
        ));
    }
    if dy < 0.0 {
        return Err(Error::InvalidInput("dy must be non-negative".into()));
    }
    let model = JointModel::new(params, stacked.len() / 2, dx, dy)?;
    let (nll, g_dx, g_dy) = model.patch_nll(stacked);
    let (p_val, p_gx, p_gy) = prior.neg_log_density(dx, dy);
    Ok((nll + p_val, [g_dx + p_gx, g_dy + p_gy]))
}

/// Sum of patch negative log likelihoods plus the prior added once; the
/// objective minimized by the shift estimator.
pub(crate) fn patch_set_objective(
    patches: &[Vec<f64>],
    params: &KernelParams,
    prior: &ShiftPrior,
    patch_len: usize,
    dx: f64,
    dy: f64,
) -> Result<(f64, [f64; 2])> {
    let model = JointModel::new(params, patch_len, dx, dy)?;
    let mut value = 0.0;
    let mut g = [0.0, 0.0];
    for patch in patches {
        let (nll, gx, gy) = model.patch_nll(patch);
        value += nll;
        g[0] += gx;
        g[1] += gy;
    }
    let (p_val, p_gx, p_gy) = prior.neg_log_density(dx, dy);
    Ok((value + p_val, [g[0] + p_gx, g[1] + p_gy]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::kernel::KernelKind;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn params() -> KernelParams {
        KernelParams::new(1.0, 4.0, KernelKind::Matern32).unwrap()
    }

    #[test]
    fn zero_shift_makes_cross_blocks_equal_diagonal_blocks() {
        let p = params();
        let sigma = build_joint_covariance(&p, 8, 0.0, 0.0);
        for i in 0..8 {
            for j in 0..8 {
                let diag = sigma[(i, j)] - if i == j { BASE_JITTER * p.variance } else { 0.0 };
                assert_relative_eq!(sigma[(i, 8 + j)], diag, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn covariance_is_bitwise_symmetric() {
        let p = params();
        let sigma = build_joint_covariance(&p, 16, 1.3, 0.7);
        for i in 0..32 {
            for j in 0..32 {
                assert_eq!(sigma[(i, j)].to_bits(), sigma[(j, i)].to_bits());
            }
        }
    }

    #[test]
    fn positive_definite_over_shift_grid() {
        for kind in [KernelKind::Matern32, KernelKind::ExponentiatedQuadratic] {
            let p = KernelParams::new(1.0, 4.0, kind).unwrap();
            for i in 0..=10 {
                for j in 0..=5 {
                    let dx = -5.0 + i as f64;
                    let dy = j as f64;
                    let sigma = build_joint_covariance(&p, 16, dx, dy);
                    assert!(
                        Cholesky::new(sigma).is_some(),
                        "factorization failed at ({dx}, {dy}) for {kind:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn smallest_eigenvalue_positive_on_grid() {
        let p = params();
        for (dx, dy) in [(-5.0, 0.0), (0.0, 0.0), (3.5, 2.5), (5.0, 5.0)] {
            let sigma = build_joint_covariance(&p, 16, dx, dy);
            let eig = sigma.symmetric_eigenvalues();
            assert!(
                eig.iter().cloned().fold(f64::INFINITY, f64::min) > 0.0,
                "non-positive eigenvalue at ({dx}, {dy})"
            );
        }
    }

    #[test]
    fn prior_shapes() {
        let prior = ShiftPrior::default();
        let (v0, g0, _) = prior.neg_log_density(0.0, 0.0);
        let (vp, _, _) = prior.neg_log_density(0.4, 0.0);
        let (vm, _, _) = prior.neg_log_density(-0.4, 0.0);
        assert!(v0 < vp && v0 < vm);
        assert_relative_eq!(g0, 0.0);
        // dy term strictly increasing.
        let (a, _, gy) = prior.neg_log_density(0.0, 0.5);
        let (b, _, _) = prior.neg_log_density(0.0, 1.5);
        assert!(b > a);
        assert_relative_eq!(gy, prior.dy_rate);
    }

    /// Draws a stacked patch from the joint model at a random shift, so
    /// the test data has the statistics the model expects.
    fn sample_patch(
        params: &KernelParams,
        patch_len: usize,
        rng: &mut ChaCha8Rng,
    ) -> (Vec<f64>, f64, f64) {
        let dx = rng.gen_range(-1.5..1.5);
        let dy = rng.gen_range(0.0..1.5);
        let sigma = build_joint_covariance(params, patch_len, dx, dy);
        let chol = Cholesky::new(sigma).unwrap();
        let z = DVector::from_fn(2 * patch_len, |_, _| {
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            (-2.0 * u1.ln()).sqrt() * u2.cos()
        });
        ((chol.l() * z).iter().cloned().collect(), dx, dy)
    }

    #[test]
    fn gradient_matches_central_differences() {
        let prior = ShiftPrior::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // The exponentiated quadratic covariance is ill-conditioned, which
        // leaves ~1e-9 evaluation noise in the objective; its difference
        // step and absolute floor are widened accordingly (at h = 1e-5 the
        // finite differences themselves are only ~3e-4 accurate there).
        for (kind, h, floor) in [
            (KernelKind::Matern32, 1e-5, 1e-8),
            (KernelKind::ExponentiatedQuadratic, 1e-4, 1e-5),
        ] {
            let p = KernelParams::new(1.0, 3.0, kind).unwrap();
            for _ in 0..100 {
                let (stacked, dx0, dy0) = sample_patch(&p, 8, &mut rng);
                // Evaluate near the generating shift (the regime the
                // optimizer traverses) and off dy = 0, where the kernel's
                // third dy-derivative is unbounded; both keep the central
                // differences themselves accurate to the tested tolerance.
                let dx = dx0 + rng.gen_range(-0.5..0.5);
                let dy = dy0 + rng.gen_range(0.1..0.6);
                let (_, g) = neg_log_posterior(&stacked, &p, &prior, dx, dy).unwrap();
                let fd = |ddx: f64, ddy: f64| {
                    neg_log_posterior(&stacked, &p, &prior, dx + ddx, dy + ddy)
                        .unwrap()
                        .0
                };
                let nx = (fd(h, 0.0) - fd(-h, 0.0)) / (2.0 * h);
                let ny = (fd(0.0, h) - fd(0.0, -h)) / (2.0 * h);
                assert_relative_eq!(g[0], nx, epsilon = floor, max_relative = 1e-4);
                assert_relative_eq!(g[1], ny, epsilon = floor, max_relative = 1e-4);
            }
        }
    }
}
