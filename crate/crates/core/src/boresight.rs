//! Camera-to-IMU boresight estimation from tie points via robust
//! epipolar least squares on SO(3), with bootstrap uncertainty.
//!
//! For each tie point the two viewing rays and the relative pose between
//! their lines give a coplanarity (epipolar) constraint. The boresight is
//! the rotation `exp([r]x)` mapping camera-frame rays into the IMU frame
//! that zeroes those constraints in the robust least-squares sense.
//!
//! Frame conventions: the body (IMU) frame is x forward, y right, z down;
//! the nominal camera mount maps the sample axis to body y and the view
//! axis to body z ([`camera_mount`]). The solved boresight is the residual
//! camera-to-IMU rotation on top of that mount.

use crate::camera::CameraModel;
use crate::cube::HyperCube;
use crate::error::Error;
use crate::features::TiePointSet;
use crate::rotation::{
    angle_deviation, chordal_mean, exp_map, log_map, right_jacobian, skew, AxisAngle, Mat3, Vec3,
};
use crate::trajectory::Trajectory;
use crate::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Huber knee used by the robust kernel.
pub const DEFAULT_HUBER_DELTA: f64 = 0.25;
/// Ratio of smallest to largest Jacobian singular value below which the
/// problem is reported as under-constrained.
pub const DEGENERACY_RATIO: f64 = 1e-6;

/// Nominal camera-to-body mount: camera x (sample axis) to body y (right),
/// camera z (view axis) to body z (down).
#[rustfmt::skip]
pub fn camera_mount() -> Mat3 {
    Mat3::new(
        0.0, -1.0, 0.0,
        1.0,  0.0, 0.0,
        0.0,  0.0, 1.0,
    )
}

/// One epipolar constraint: two unit rays in their nominal camera frames
/// and the relative pose (pose 2 expressed in pose 1's camera frame).
///
/// The baseline is kept in meters. That keeps the Huber knee at its
/// calibrated scale: residuals of correct pairs stay at the sub-pixel
/// ground-noise level (well under delta) while mismatched tie points
/// produce residuals of several meters, deep in the linear regime. With
/// unit baselines every residual of a narrow-field nadir scanner would
/// fall below delta and the robust kernel would never engage.
#[derive(Debug, Clone)]
pub struct EpipolarPair {
    pub v1: Vec3,
    pub v2: Vec3,
    /// Rotation taking pose-2 camera-frame vectors to pose 1's.
    pub r_rel: Mat3,
    /// Baseline in pose 1's camera frame, meters.
    pub t_rel: Vec3,
}

/// Huber loss: quadratic within `delta` of zero, linear beyond.
pub fn huber(x: f64, delta: f64) -> f64 {
    let a = x.abs();
    if a <= delta {
        0.5 * x * x
    } else {
        delta * (a - 0.5 * delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobustKernel {
    L2,
    Huber,
}

impl RobustKernel {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "l2" => Ok(Self::L2),
            "huber" => Ok(Self::Huber),
            other => Err(Error::InvalidInput(format!("unknown kernel {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::L2 => "l2",
            Self::Huber => "huber",
        }
    }

    /// Gauss-Newton residual and its derivative in the raw constraint `e`:
    /// `e` itself for l2, `sqrt(H_delta(e))` for Huber (so the squared
    /// residual is exactly the kernel value). The derivative at `e = 0` is
    /// defined as 0.
    fn residual(&self, e: f64, delta: f64) -> (f64, f64) {
        match self {
            Self::L2 => (e, 1.0),
            Self::Huber => {
                let a = e.abs();
                if a < 1e-300 {
                    (0.0, 0.0)
                } else if a <= delta {
                    (a / 2f64.sqrt(), e.signum() / 2f64.sqrt())
                } else {
                    let rho = (delta * (a - 0.5 * delta)).sqrt();
                    (rho, delta * e.signum() / (2.0 * rho))
                }
            }
        }
    }
}

/// Raw epipolar constraint value `<(E v1) x (R E v2), t>` at boresight `r`.
pub fn epipolar_residual(pair: &EpipolarPair, r: &AxisAngle) -> f64 {
    let e = exp_map(r);
    (e * pair.v1).cross(&(pair.r_rel * (e * pair.v2))).dot(&pair.t_rel)
}

/// Residual plus its analytic gradient with respect to the axis-angle
/// vector, via the SO(3) right Jacobian.
pub fn epipolar_residual_jacobian(pair: &EpipolarPair, r: &AxisAngle) -> (f64, Vec3) {
    let e = exp_map(r);
    let jr = right_jacobian(&r.vector());
    let ev1 = e * pair.v1;
    let ev2 = pair.r_rel * (e * pair.v2);
    let value = ev1.cross(&ev2).dot(&pair.t_rel);

    // d(exp(r) v)/dr = -exp(r) [v]x Jr(r)
    let m1 = -e * skew(&pair.v1) * jr;
    let m2 = -(pair.r_rel * e) * skew(&pair.v2) * jr;
    let mut grad = Vec3::zeros();
    for k in 0..3 {
        let d1: Vec3 = m1.column(k).into();
        let d2: Vec3 = m2.column(k).into();
        grad[k] = d1.cross(&ev2).dot(&pair.t_rel) + ev1.cross(&d2).dot(&pair.t_rel);
    }
    (value, grad)
}

/// Builds epipolar pairs from inlier tie points. Ray directions come from
/// the camera model; per-point line poses are interpolated at each point's
/// line time and expressed in the nominal camera frame of pose 1. Pairs
/// whose line times fall outside the trajectory, or with a near-zero
/// baseline, are skipped and counted.
pub fn build_epipolar_pairs(
    ties: &TiePointSet,
    cube: &HyperCube,
    traj: &Trajectory,
    cam: &CameraModel,
) -> Result<(Vec<EpipolarPair>, usize)> {
    let mount = camera_mount();
    let mut pairs = Vec::new();
    let mut skipped = 0usize;
    for tie in ties.inliers() {
        let line1 = ties.chunk1_start_line as f64 + tie.pt1.1;
        let line2 = ties.chunk2_start_line as f64 + tie.pt2.1;
        let t1 = cube.time_at_line(line1);
        let t2 = cube.time_at_line(line2);
        let (p1, p2) = match (traj.interpolate(t1), traj.interpolate(t2)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                skipped += 1;
                continue;
            }
        };
        let r1 = exp_map(&p1.attitude) * mount;
        let r2 = exp_map(&p2.attitude) * mount;
        let baseline = p2.position - p1.position;
        if baseline.norm() < 1e-9 {
            skipped += 1;
            continue;
        }
        pairs.push(EpipolarPair {
            v1: cam.ray(tie.pt1.0),
            v2: cam.ray(tie.pt2.0),
            r_rel: r1.transpose() * r2,
            t_rel: r1.transpose() * baseline,
        });
    }
    Ok((pairs, skipped))
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub boresight: AxisAngle,
    pub iterations: usize,
    /// Sum of kernel values at the optimum.
    pub final_cost: f64,
    pub converged: bool,
    /// Raw constraint values at the optimum.
    pub per_pair_residuals: Vec<f64>,
    /// Smallest over largest singular value of the stacked Jacobian.
    pub jacobian_condition: f64,
    /// Set when the constraint directions leave a rotation axis
    /// under-determined (parallel flight lines).
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct BootstrapStats {
    pub mean: AxisAngle,
    /// Mean angle deviation from the bootstrap mean, degrees.
    pub std_deg: f64,
    pub solutions: Vec<AxisAngle>,
    pub failures: usize,
}

/// Full calibration output: point solution plus optional bootstrap spread.
#[derive(Debug, Clone)]
pub struct BoresightSolution {
    pub solve: SolveResult,
    pub bootstrap: Option<BootstrapStats>,
}

const GN_MAX_ITERS: usize = 50;
const GN_STEP_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 25;

fn total_cost(pairs: &[EpipolarPair], kernel: RobustKernel, delta: f64, r: &AxisAngle) -> f64 {
    pairs
        .iter()
        .map(|p| {
            let e = epipolar_residual(p, r);
            let (rho, _) = kernel.residual(e, delta);
            rho * rho
        })
        .sum()
}

/// Gauss-Newton solve for the boresight with the chosen robust kernel.
/// Steps are damped by halving on cost increase; convergence when the
/// step norm drops below 1e-8 rad.
pub fn solve_boresight(
    pairs: &[EpipolarPair],
    kernel: RobustKernel,
    init: AxisAngle,
) -> Result<SolveResult> {
    if pairs.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "boresight solve needs at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    let delta = DEFAULT_HUBER_DELTA;
    let mut r = init;
    let mut cost = total_cost(pairs, kernel, delta, &r);
    let mut converged = false;
    let mut iterations = 0;
    let mut condition = 0.0;

    for _ in 0..GN_MAX_ITERS {
        iterations += 1;
        // Normal equations from kernelized residuals.
        let mut jtj = Mat3::zeros();
        let mut jtr = Vec3::zeros();
        for pair in pairs {
            let (e, de) = epipolar_residual_jacobian(pair, &r);
            let (rho, drho) = kernel.residual(e, delta);
            let row = de * drho;
            jtj += row * row.transpose();
            jtr += row * rho;
        }

        let eig = jtj.symmetric_eigenvalues();
        let max_eig = eig.iter().cloned().fold(0.0f64, f64::max);
        let min_eig = eig.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);
        condition = if max_eig > 0.0 {
            (min_eig / max_eig).sqrt()
        } else {
            0.0
        };

        // Tiny Tikhonov term keeps the step finite in the degenerate case.
        let damped = jtj + Mat3::identity() * (1e-12 * max_eig.max(1e-300));
        let Some(step) = damped.try_inverse().map(|inv| -(inv * jtr)) else {
            break;
        };

        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let candidate = AxisAngle::new(r.vector() + step * scale);
            let c = total_cost(pairs, kernel, delta, &candidate);
            if c <= cost {
                r = candidate;
                cost = c;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            converged = (step.norm() * scale) < GN_STEP_TOL;
            break;
        }
        if (step * scale).norm() < GN_STEP_TOL {
            converged = true;
            break;
        }
    }

    let per_pair_residuals = pairs.iter().map(|p| epipolar_residual(p, &r)).collect();
    Ok(SolveResult {
        boresight: r,
        iterations,
        final_cost: cost,
        converged,
        per_pair_residuals,
        jacobian_condition: condition,
        degenerate: condition < DEGENERACY_RATIO,
    })
}

/// Bootstrap: repeatedly solve on random subsets sampled without
/// replacement, then summarize with the chordal mean rotation and the mean
/// angle deviation from it (degrees). Repetitions run in parallel with
/// per-repetition derived seeds, so results are schedule-independent.
pub fn bootstrap_boresight(
    pairs: &[EpipolarPair],
    kernel: RobustKernel,
    sample_size: usize,
    repetitions: usize,
    seed: u64,
) -> Result<BootstrapStats> {
    if pairs.len() < sample_size {
        return Err(Error::InvalidInput(format!(
            "bootstrap sample size {sample_size} exceeds {} pairs",
            pairs.len()
        )));
    }
    if sample_size < 3 || repetitions == 0 {
        return Err(Error::InvalidInput(
            "bootstrap needs sample_size >= 3 and repetitions >= 1".into(),
        ));
    }

    let outcomes: Vec<Option<AxisAngle>> = (0..repetitions)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(rep as u64));
            let idx = rand::seq::index::sample(&mut rng, pairs.len(), sample_size);
            let subset: Vec<EpipolarPair> = idx.iter().map(|i| pairs[i].clone()).collect();
            match solve_boresight(&subset, kernel, AxisAngle::zero()) {
                Ok(res) if res.converged => Some(res.boresight),
                _ => None,
            }
        })
        .collect();

    let solutions: Vec<AxisAngle> = outcomes.iter().flatten().cloned().collect();
    let failures = repetitions - solutions.len();
    if solutions.is_empty() {
        return Err(Error::Numerical(
            "every bootstrap repetition failed to converge".into(),
        ));
    }
    let matrices: Vec<Mat3> = solutions.iter().map(exp_map).collect();
    let mean_matrix = chordal_mean(&matrices);
    let mean = log_map(&mean_matrix);
    let std_deg = solutions
        .iter()
        .map(|s| angle_deviation(&mean, s).to_degrees())
        .sum::<f64>()
        / solutions.len() as f64;

    Ok(BootstrapStats {
        mean,
        std_deg,
        solutions,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Body-to-world attitude for a given heading with small roll/pitch.
    fn nominal_attitude(heading: f64, roll: f64, pitch: f64) -> Mat3 {
        let f = Vec3::new(heading.cos(), heading.sin(), 0.0);
        let r = Vec3::new(heading.sin(), -heading.cos(), 0.0);
        let d = Vec3::new(0.0, 0.0, -1.0);
        let base = Mat3::from_columns(&[f, r, d]);
        base * exp_map(&AxisAngle::from_components(roll, pitch, 0.0))
    }

    /// Line-scan pairs in true scan geometry: rays lie in each line's scan
    /// plane (zero camera-frame y). A path-1 ray is intersected with the
    /// ground and the path-2 line observing the same point is solved for.
    fn scan_pairs(
        boresight: &AxisAngle,
        n: usize,
        seed: u64,
        heading2: f64,
        lateral2: f64,
        perturb: f64,
    ) -> Vec<EpipolarPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = exp_map(boresight);
        let height = 500.0;
        let max_tan = 150.0 / 1345.0; // ~6.4 degree half swath
        let heading1 = std::f64::consts::FRAC_PI_2;
        let f1 = Vec3::new(heading1.cos(), heading1.sin(), 0.0);
        let f2 = Vec3::new(heading2.cos(), heading2.sin(), 0.0);
        let right2 = Vec3::new(heading2.sin(), -heading2.cos(), 0.0);
        let mut pairs = Vec::new();
        while pairs.len() < n {
            let v1 = Vec3::new(rng.gen_range(-max_tan..max_tan), 0.0, 1.0).normalize();
            let c1 = f1 * rng.gen_range(-100.0..100.0) + Vec3::new(0.0, 0.0, height);
            let r1 = nominal_attitude(
                heading1,
                perturb * rng.gen_range(-1.0..1.0),
                perturb * rng.gen_range(-1.0..1.0),
            );
            let w1 = r1 * camera_mount() * e * v1;
            if w1.z >= -0.2 {
                continue;
            }
            let g = c1 + w1 * (height / -w1.z);

            let r2 = nominal_attitude(
                heading2,
                perturb * rng.gen_range(-1.0..1.0),
                perturb * rng.gen_range(-1.0..1.0),
            );
            let m2_full = r2 * camera_mount() * e;
            // Along-track position where g lies in pass 2's scan plane.
            let n2 = m2_full * Vec3::new(0.0, 1.0, 0.0);
            let base2 = right2 * lateral2 + Vec3::new(0.0, 0.0, height);
            let denom = f2.dot(&n2);
            if denom.abs() < 1e-6 {
                continue;
            }
            let u2 = (g - base2).dot(&n2) / denom;
            if u2.abs() > 120.0 {
                continue;
            }
            let c2 = base2 + f2 * u2;
            let v2 = (m2_full.transpose() * (g - c2)).normalize();
            if v2.z < 0.2 || (v2.x / v2.z).abs() > max_tan {
                continue;
            }
            let m1 = r1 * camera_mount();
            let m2 = r2 * camera_mount();
            pairs.push(EpipolarPair {
                v1,
                v2,
                r_rel: m1.transpose() * m2,
                t_rel: m1.transpose() * (c2 - c1),
            });
        }
        pairs
    }

    /// Crossing-pass dataset with small per-line attitude perturbations.
    fn synthetic_pairs(boresight: &AxisAngle, n: usize, seed: u64) -> Vec<EpipolarPair> {
        scan_pairs(boresight, n, seed, 0.0, 0.0, 3e-4)
    }

    #[test]
    fn huber_closed_form_values() {
        assert_relative_eq!(huber(0.0, 0.25), 0.0);
        assert_relative_eq!(huber(0.25, 0.25), 0.03125);
        assert_relative_eq!(huber(1.0, 0.25), 0.21875);
        assert_relative_eq!(huber(-1.0, 0.25), 0.21875);
    }

    #[test]
    fn huber_continuous_with_continuous_derivative_at_knee() {
        let delta = 0.25;
        let eps = 1e-9;
        assert_relative_eq!(huber(delta - eps, delta), huber(delta + eps, delta), epsilon = 1e-8);
        let d_in = (huber(delta, delta) - huber(delta - eps, delta)) / eps;
        let d_out = (huber(delta + eps, delta) - huber(delta, delta)) / eps;
        assert_relative_eq!(d_in, d_out, epsilon = 1e-6);
    }

    #[test]
    fn planted_boresight_zeroes_residuals() {
        let truth = AxisAngle::from_components(0.01, -0.005, 0.008);
        let pairs = synthetic_pairs(&truth, 200, 1);
        for p in &pairs {
            assert!(
                epipolar_residual(p, &truth).abs() < 1e-9,
                "residual {} at truth",
                epipolar_residual(p, &truth)
            );
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pairs = synthetic_pairs(&AxisAngle::from_components(0.01, 0.0, -0.01), 20, 3);
        let h = 1e-7;
        for _ in 0..100 {
            let r = AxisAngle::from_components(
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-0.1..0.1),
            );
            let pair = &pairs[rng.gen_range(0..pairs.len())];
            let (_, grad) = epipolar_residual_jacobian(pair, &r);
            for k in 0..3 {
                let mut dv = r.vector();
                dv[k] += h;
                let plus = epipolar_residual(pair, &AxisAngle::new(dv));
                dv[k] -= 2.0 * h;
                let minus = epipolar_residual(pair, &AxisAngle::new(dv));
                let numeric = (plus - minus) / (2.0 * h);
                assert_relative_eq!(grad[k], numeric, epsilon = 1e-9, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn recovers_planted_boresight_noise_free() {
        let truth = AxisAngle::from_components(0.012, -0.008, 0.010); // ~1 degree
        let pairs = synthetic_pairs(&truth, 400, 4);
        for kernel in [RobustKernel::L2, RobustKernel::Huber] {
            let res = solve_boresight(&pairs, kernel, AxisAngle::zero()).unwrap();
            assert!(res.converged);
            let err = angle_deviation(&res.boresight, &truth);
            assert!(err < 1e-6, "{kernel:?} error {err} rad");
            assert!(!res.degenerate);
        }
    }

    #[test]
    fn zero_boresight_with_exact_geometry_returns_zero() {
        let truth = AxisAngle::zero();
        let pairs = synthetic_pairs(&truth, 50, 5);
        let res = solve_boresight(&pairs, RobustKernel::Huber, AxisAngle::zero()).unwrap();
        assert!(res.boresight.angle() < 1e-9);
        assert!(res.converged);
    }

    #[test]
    fn huber_resists_gross_outliers_where_l2_fails() {
        let truth = AxisAngle::from_components(0.0123, -0.0086, 0.0095); // ~1 degree norm
        let mut pairs = synthetic_pairs(&truth, 1000, 6);
        // 10% gross outliers: mismatched correspondences, made by swapping
        // the second ray between pairs (both rays stay legitimate).
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n_swaps = pairs.len() / 20; // each swap corrupts two pairs
        for _ in 0..n_swaps {
            let i = rng.gen_range(0..pairs.len());
            let j = rng.gen_range(0..pairs.len());
            let tmp = pairs[i].v2;
            pairs[i].v2 = pairs[j].v2;
            pairs[j].v2 = tmp;
        }
        let huber_res = solve_boresight(&pairs, RobustKernel::Huber, AxisAngle::zero()).unwrap();
        let l2_res = solve_boresight(&pairs, RobustKernel::L2, AxisAngle::zero()).unwrap();
        let huber_err = angle_deviation(&huber_res.boresight, &truth).to_degrees();
        let l2_err = angle_deviation(&l2_res.boresight, &truth).to_degrees();
        assert!(huber_err < 0.2, "huber error {huber_err} deg");
        assert!(
            l2_err >= 3.0 * huber_err,
            "l2 {l2_err} deg vs huber {huber_err} deg"
        );
    }

    #[test]
    fn l2_solution_invariant_to_uniform_baseline_scaling() {
        let truth = AxisAngle::from_components(0.005, 0.002, -0.004);
        let mut pairs = synthetic_pairs(&truth, 120, 8);
        // Perturb the rays slightly so the optimum is not exactly at truth.
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        for p in pairs.iter_mut() {
            p.v1 = (p.v1 + Vec3::new(rng.gen_range(-1e-4..1e-4), 0.0, 0.0)).normalize();
        }
        let base = solve_boresight(&pairs, RobustKernel::L2, AxisAngle::zero()).unwrap();
        let scaled_pairs: Vec<EpipolarPair> = pairs
            .iter()
            .map(|p| EpipolarPair {
                t_rel: p.t_rel * 37.5,
                ..p.clone()
            })
            .collect();
        let scaled = solve_boresight(&scaled_pairs, RobustKernel::L2, AxisAngle::zero()).unwrap();
        assert!(
            angle_deviation(&base.boresight, &scaled.boresight) < 1e-9,
            "l2 solution moved under uniform baseline scaling"
        );
    }

    #[test]
    fn parallel_lines_flag_degeneracy_crossing_lines_do_not() {
        let truth = AxisAngle::from_components(0.002, 0.003, -0.001);
        // Second pass parallel to the first (same heading, offset track),
        // smooth flight. Scan rays have no along-track component, so the
        // constraints share an exact null direction (the roll axis).
        let parallel = scan_pairs(&truth, 300, 9, std::f64::consts::FRAC_PI_2, 40.0, 0.0);
        let res = solve_boresight(&parallel, RobustKernel::Huber, AxisAngle::zero()).unwrap();
        assert!(
            res.degenerate,
            "parallel-line condition {} not flagged",
            res.jacobian_condition
        );

        let crossing = synthetic_pairs(&truth, 300, 10);
        let res = solve_boresight(&crossing, RobustKernel::Huber, AxisAngle::zero()).unwrap();
        assert!(!res.degenerate, "crossing condition {}", res.jacobian_condition);
    }

    #[test]
    fn bootstrap_on_exact_pairs_has_zero_spread() {
        let truth = AxisAngle::from_components(0.004, -0.006, 0.002);
        let pairs = synthetic_pairs(&truth, 700, 11);
        let stats = bootstrap_boresight(&pairs, RobustKernel::Huber, 500, 20, 42).unwrap();
        assert!(stats.std_deg < 1e-6, "spread {} deg", stats.std_deg);
        assert_eq!(stats.failures, 0);
        assert!(angle_deviation(&stats.mean, &truth).to_degrees() < 1e-6);
    }

    #[test]
    fn bootstrap_is_deterministic_per_seed() {
        let truth = AxisAngle::from_components(0.004, -0.006, 0.002);
        let mut pairs = synthetic_pairs(&truth, 700, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for p in pairs.iter_mut().step_by(11) {
            p.v2 = (p.v2 + Vec3::new(0.001 * rng.gen_range(-1.0..1.0), 0.0, 0.0)).normalize();
        }
        let a = bootstrap_boresight(&pairs, RobustKernel::Huber, 300, 15, 99).unwrap();
        let b = bootstrap_boresight(&pairs, RobustKernel::Huber, 300, 15, 99).unwrap();
        assert_eq!(a.std_deg.to_bits(), b.std_deg.to_bits());
        assert_eq!(
            a.mean.vector().x.to_bits(),
            b.mean.vector().x.to_bits()
        );
    }
}
