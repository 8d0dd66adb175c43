//! The ambient quaternionic space form: canonical local almost complex
//! structures on Euclidean 4m-space, its curvature tensor, and numerical
//! slant-angle measurement for concrete subspaces.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{CasoratiError, Result};

/// The three local almost complex structures of a quaternionic Hermitian
/// structure on R^{4m}, realized as left multiplication by the quaternion
/// units on each coordinate block. All entries lie in {-1, 0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionicStructure {
    m: usize,
    j: [DMatrix<f64>; 3],
}

impl QuaternionicStructure {
    pub fn quaternionic_dim(&self) -> usize {
        self.m
    }

    pub fn ambient_dim(&self) -> usize {
        4 * self.m
    }

    pub fn j(&self, alpha: usize) -> &DMatrix<f64> {
        &self.j[alpha]
    }

    /// Verifies orthogonality, skew-symmetry, `J^2 = -Id` and the quaternion
    /// relations `J_a J_{a+1} = -J_{a+1} J_a = J_{a+2}` (indices mod 3).
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let dim = self.ambient_dim();
        let id = DMatrix::<f64>::identity(dim, dim);
        for alpha in 0..3 {
            let j = &self.j[alpha];
            let skew = (j + j.transpose()).abs().max();
            let ortho = (j.transpose() * j - &id).abs().max();
            let square = (j * j + &id).abs().max();
            if skew > tol || ortho > tol || square > tol {
                return Err(CasoratiError::InternalCheck(format!(
                    "structure {alpha}: skew {skew:.1e}, orthogonality {ortho:.1e}, square {square:.1e}"
                )));
            }
        }
        for alpha in 0..3 {
            let (a, b, c) = (alpha, (alpha + 1) % 3, (alpha + 2) % 3);
            let fwd = (&self.j[a] * &self.j[b] - &self.j[c]).abs().max();
            let bwd = (&self.j[b] * &self.j[a] + &self.j[c]).abs().max();
            if fwd > tol || bwd > tol {
                return Err(CasoratiError::InternalCheck(format!(
                    "quaternion relation fails for ({a},{b}): {fwd:.1e}/{bwd:.1e}"
                )));
            }
        }
        Ok(())
    }
}

/// A point of the model space: the curvature constant together with the
/// quaternionic structure.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientPoint {
    pub c: f64,
    pub structure: QuaternionicStructure,
}

impl AmbientPoint {
    pub fn new(c: f64, structure: QuaternionicStructure) -> Self {
        Self { c, structure }
    }
}

/// Builds the canonical quaternionic structure on R^{4m}: block-diagonal
/// left multiplication by the quaternion units i, j, k.
pub fn standard_structure(m: usize) -> Result<QuaternionicStructure> {
    if m == 0 {
        return Err(CasoratiError::InvalidParameter(
            "quaternionic dimension m must be positive".into(),
        ));
    }
    // Left multiplication by i, j, k on (a, b, c, d) = a + bi + cj + dk.
    let blocks: [[[f64; 4]; 4]; 3] = [
        [
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ],
        [
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ],
        [
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ],
    ];
    let dim = 4 * m;
    let j = blocks.map(|block| {
        let mut mat = DMatrix::zeros(dim, dim);
        for q in 0..m {
            for r in 0..4 {
                for c in 0..4 {
                    mat[(4 * q + r, 4 * q + c)] = block[r][c];
                }
            }
        }
        mat
    });
    Ok(QuaternionicStructure { m, j })
}

/// Evaluates the curvature tensor of the quaternionic space form,
/// `Rbar(X,Y,Z,W)`, as the scalar
/// `(c/4) { g(Z,Y) g(X,W) - g(X,Z) g(Y,W)
///          + sum_a [ g(Z,J_a Y) g(J_a X,W) - g(Z,J_a X) g(J_a Y,W)
///                    + 2 g(X,J_a Y) g(J_a Z,W) ] }`.
pub fn ambient_curvature(
    pt: &AmbientPoint,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
    w: &DVector<f64>,
) -> Result<f64> {
    let dim = pt.structure.ambient_dim();
    for (name, v) in [("X", x), ("Y", y), ("Z", z), ("W", w)] {
        if v.len() != dim {
            return Err(CasoratiError::DimensionMismatch(format!(
                "{name} has dimension {}, expected {dim}",
                v.len()
            )));
        }
    }
    let mut bracket = z.dot(y) * x.dot(w) - x.dot(z) * y.dot(w);
    for alpha in 0..3 {
        let j = pt.structure.j(alpha);
        let jx = j * x;
        let jy = j * y;
        let jz = j * z;
        bracket += z.dot(&jy) * jx.dot(w) - z.dot(&jx) * jy.dot(w) + 2.0 * x.dot(&jy) * jz.dot(w);
    }
    Ok(pt.c / 4.0 * bracket)
}

/// Result of sampling the angle between `J_alpha X` and a subspace over
/// random unit `X` in the subspace and all three structures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlantAngleMeasurement {
    /// Mean measured angle in radians.
    pub mean: f64,
    /// Maximum absolute deviation from the mean across all samples.
    pub max_deviation: f64,
}

impl SlantAngleMeasurement {
    /// A subspace counts as slant when all sampled angles agree.
    pub fn is_slant(&self, tol: f64) -> bool {
        self.max_deviation < tol
    }
}

/// Orthonormalizes the columns of `basis` by thin QR, rejecting rank
/// deficiency. The R diagonal is forced positive so output is deterministic.
fn orthonormalize(basis: &DMatrix<f64>, rank_tol: f64) -> Result<DMatrix<f64>> {
    let count = basis.ncols();
    let qr = basis.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    let scale = r.abs().max().max(1.0);
    let mut rank = 0;
    for i in 0..count {
        if r[(i, i)].abs() > rank_tol * scale {
            rank += 1;
        }
        if r[(i, i)] < 0.0 {
            for row in 0..q.nrows() {
                q[(row, i)] = -q[(row, i)];
            }
        }
    }
    if rank < count {
        return Err(CasoratiError::DegenerateBasis { rank, count });
    }
    Ok(q)
}

fn basis_matrix(structure: &QuaternionicStructure, basis: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    let dim = structure.ambient_dim();
    if basis.is_empty() {
        return Err(CasoratiError::InvalidParameter("empty basis".into()));
    }
    if basis.len() > dim {
        return Err(CasoratiError::DimensionMismatch(format!(
            "{} basis vectors in dimension {dim}",
            basis.len()
        )));
    }
    for v in basis {
        if v.len() != dim {
            return Err(CasoratiError::DimensionMismatch(format!(
                "basis vector has dimension {}, expected {dim}",
                v.len()
            )));
        }
    }
    Ok(DMatrix::from_columns(basis))
}

/// Measures the slant angle of the span of `basis` by sampling: for random
/// unit `X` in the span and each structure, the angle between `J_alpha X`
/// and the span. Returns the mean and the maximum deviation from it.
pub fn measure_slant_angle(
    structure: &QuaternionicStructure,
    basis: &[DVector<f64>],
    samples: usize,
    seed: u64,
) -> Result<SlantAngleMeasurement> {
    if samples == 0 {
        return Err(CasoratiError::InvalidParameter(
            "sample count must be positive".into(),
        ));
    }
    let b = basis_matrix(structure, basis)?;
    let q = orthonormalize(&b, 1e-10)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut angles = Vec::with_capacity(3 * samples);
    for _ in 0..samples {
        let coeffs = DVector::<f64>::from_fn(q.ncols(), |_, _| StandardNormal.sample(&mut rng));
        let norm = coeffs.norm();
        // A zero draw from the normal sampler is effectively impossible, but
        // fall back to the first basis direction rather than dividing by it.
        let x = if norm > 0.0 {
            &q * (coeffs / norm)
        } else {
            q.column(0).into_owned()
        };
        for alpha in 0..3 {
            let jx = structure.j(alpha) * &x;
            let proj_norm = (q.transpose() * &jx).norm();
            angles.push(proj_norm.clamp(0.0, 1.0).acos());
        }
    }
    let mean = angles.iter().sum::<f64>() / angles.len() as f64;
    let max_deviation = angles.iter().map(|a| (a - mean).abs()).fold(0.0, f64::max);
    Ok(SlantAngleMeasurement {
        mean,
        max_deviation,
    })
}

/// Configuration for the slant-plane search.
#[derive(Debug, Clone, Copy)]
pub struct SlantSearchConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Acceptance threshold on the measured angle deviation, in radians.
    pub tolerance: f64,
    /// Samples used by the acceptance measurement.
    pub measure_samples: usize,
}

impl Default for SlantSearchConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 10_000,
            tolerance: 1e-6,
            measure_samples: 64,
        }
    }
}

/// A subspace accepted by the slant-angle measurement.
#[derive(Debug, Clone)]
pub struct SlantPlane {
    pub basis: Vec<DVector<f64>>,
    pub mean_angle: f64,
    pub max_deviation: f64,
}

/// Searches for an `n`-dimensional subspace of R^{4m} that is slant with
/// angle `theta`, by multi-restart projected gradient descent on the Stiefel
/// manifold. Acceptance is decided by `measure_slant_angle`; when no
/// subspace with the requested angle exists the search converges to the
/// nearest slant subspace and the returned mean angle reports what was found.
pub fn find_slant_plane(
    structure: &QuaternionicStructure,
    theta: f64,
    n: usize,
    seed: u64,
) -> Result<SlantPlane> {
    find_slant_plane_with(structure, theta, n, seed, &SlantSearchConfig::default())
}

pub fn find_slant_plane_with(
    structure: &QuaternionicStructure,
    theta: f64,
    n: usize,
    seed: u64,
    config: &SlantSearchConfig,
) -> Result<SlantPlane> {
    let dim = structure.ambient_dim();
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(CasoratiError::InvalidParameter(format!(
            "slant angle {theta} outside [0, pi/2]"
        )));
    }
    if n == 0 || n > dim {
        return Err(CasoratiError::DimensionMismatch(format!(
            "subspace dimension {n} invalid in ambient dimension {dim}"
        )));
    }
    if !n.is_multiple_of(2) && theta < std::f64::consts::FRAC_PI_2 {
        return Err(CasoratiError::InvalidParameter(format!(
            "proper slant subspaces have even dimension, got n = {n}"
        )));
    }

    let cos_sq = theta.cos().powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, DMatrix<f64>)> = None;

    let mut starts: Vec<DMatrix<f64>> = Vec::new();
    starts.extend(canonical_candidates(structure, theta, n));
    for _ in 0..config.restarts {
        let raw = DMatrix::<f64>::from_fn(dim, n, |_, _| StandardNormal.sample(&mut rng));
        if let Ok(q) = orthonormalize(&raw, 1e-10) {
            starts.push(q);
        }
    }

    for start in starts {
        let (value, b) = stiefel_descent(structure, start, cos_sq, config.max_iters);
        if best.as_ref().is_none_or(|(bv, _)| value < *bv) {
            best = Some((value, b));
        }
        if best.as_ref().unwrap().0 < 1e-28 {
            break;
        }
    }

    let (_, b) = best.expect("at least one start");
    let basis: Vec<DVector<f64>> = (0..n).map(|i| b.column(i).into_owned()).collect();
    let measurement =
        measure_slant_angle(structure, &basis, config.measure_samples, seed ^ 0x5ca1ab1e)?;
    if measurement.is_slant(config.tolerance) {
        Ok(SlantPlane {
            basis,
            mean_angle: measurement.mean,
            max_deviation: measurement.max_deviation,
        })
    } else {
        Err(CasoratiError::SlantSearchFailed {
            restarts: config.restarts,
            best_deviation: measurement.max_deviation,
        })
    }
}

/// Exact starting candidates: quaternionic coordinate blocks for theta = 0,
/// spread real axes for theta = pi/2.
fn canonical_candidates(
    structure: &QuaternionicStructure,
    theta: f64,
    n: usize,
) -> Vec<DMatrix<f64>> {
    let dim = structure.ambient_dim();
    let m = structure.quaternionic_dim();
    let mut out = Vec::new();
    if theta == 0.0 && n.is_multiple_of(4) {
        let mut b = DMatrix::zeros(dim, n);
        for i in 0..n {
            b[(i, i)] = 1.0;
        }
        out.push(b);
    }
    if theta == std::f64::consts::FRAC_PI_2 && n <= m {
        let mut b = DMatrix::zeros(dim, n);
        for i in 0..n {
            b[(4 * i, i)] = 1.0;
        }
        out.push(b);
    }
    out
}

/// Objective: sum over the three structures of
/// `|| (B^T J_a B)^2 + cos^2(theta) I ||_F^2`,
/// which vanishes exactly on theta-slant subspaces.
fn slant_objective(structure: &QuaternionicStructure, b: &DMatrix<f64>, cos_sq: f64) -> f64 {
    let n = b.ncols();
    let id = DMatrix::<f64>::identity(n, n);
    (0..3)
        .map(|alpha| {
            let p = b.transpose() * structure.j(alpha) * b;
            let m = &p * &p + &id * cos_sq;
            m.iter().map(|v| v * v).sum::<f64>()
        })
        .sum()
}

/// Euclidean gradient of `slant_objective` with respect to B:
/// `4 sum_a J_a B (P_a M_a + M_a P_a)` with `P_a = B^T J_a B`,
/// `M_a = P_a^2 + cos^2(theta) I`.
fn slant_gradient(
    structure: &QuaternionicStructure,
    b: &DMatrix<f64>,
    cos_sq: f64,
) -> DMatrix<f64> {
    let n = b.ncols();
    let dim = b.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut grad = DMatrix::zeros(dim, n);
    for alpha in 0..3 {
        let jb = structure.j(alpha) * b;
        let p = b.transpose() * &jb;
        let m = &p * &p + &id * cos_sq;
        grad += &jb * (&p * &m + &m * &p) * 4.0;
    }
    grad
}

fn stiefel_descent(
    structure: &QuaternionicStructure,
    mut b: DMatrix<f64>,
    cos_sq: f64,
    max_iters: usize,
) -> (f64, DMatrix<f64>) {
    let mut value = slant_objective(structure, &b, cos_sq);
    let mut step = 1e-2;
    for _ in 0..max_iters {
        if value < 1e-30 {
            break;
        }
        let g = slant_gradient(structure, &b, cos_sq);
        // Project onto the tangent space of the Stiefel manifold.
        let btg = b.transpose() * &g;
        let sym = (&btg + btg.transpose()) * 0.5;
        let rg = &g - &b * sym;
        let gnorm_sq = rg.iter().map(|v| v * v).sum::<f64>();
        if gnorm_sq < 1e-28 {
            break;
        }
        let mut advanced = false;
        while step > 1e-18 {
            let candidate = match orthonormalize(&(&b - &rg * step), 1e-12) {
                Ok(q) => q,
                Err(_) => {
                    step *= 0.5;
                    continue;
                }
            };
            let cand_value = slant_objective(structure, &candidate, cos_sq);
            if cand_value < value - 1e-4 * step * gnorm_sq {
                b = candidate;
                value = cand_value;
                step = (step * 2.0).min(1.0);
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    (value, b)
}
