//! Pointwise model of a slant submanifold: the adapted tangent frame with its
//! tangential operators, the second fundamental form, and seeded random
//! instance generation.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CasoratiError, Result};

/// Tangential operators of the three local almost complex structures,
/// expressed in an adapted slant frame.
///
/// In such a frame every operator takes the same block skew form with
/// 2x2 blocks `[[0, -cos(theta)], [cos(theta), 0]]`, so one matrix models
/// all three.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedFrame {
    theta: f64,
    cos: f64,
    n: usize,
    p: DMatrix<f64>,
}

impl AdaptedFrame {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Cosine of the slant angle, snapped to exact zero at `theta = pi/2`
    /// so the totally real limit stays exact.
    pub fn cos_theta(&self) -> f64 {
        self.cos
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Tangential operator for structure index `alpha` in {0, 1, 2}.
    /// All three coincide in the block model.
    pub fn tangential_op(&self, alpha: usize) -> &DMatrix<f64> {
        assert!(alpha < 3, "structure index out of range");
        &self.p
    }

    /// Entry `<P_alpha e_i, e_j>` of the tangential operator.
    pub fn entry(&self, alpha: usize, i: usize, j: usize) -> f64 {
        assert!(alpha < 3);
        self.p[(j, i)]
    }
}

/// Builds the adapted slant frame operators for tangent dimension `n` and
/// slant angle `theta`.
///
/// Proper slant angles require even `n`; `theta = pi/2` (totally real) is
/// the only case where the operators vanish and odd `n` is meaningful.
pub fn build_adapted_frame(n: usize, theta: f64) -> Result<AdaptedFrame> {
    if n == 0 {
        return Err(CasoratiError::InvalidParameter(
            "tangent dimension must be positive".into(),
        ));
    }
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(CasoratiError::InvalidParameter(format!(
            "slant angle {theta} outside [0, pi/2]"
        )));
    }
    let cos = if theta >= std::f64::consts::FRAC_PI_2 {
        0.0
    } else {
        theta.cos()
    };
    if !n.is_multiple_of(2) && cos != 0.0 {
        return Err(CasoratiError::InvalidParameter(format!(
            "odd tangent dimension n = {n} admits no slant frame with theta < pi/2"
        )));
    }
    let mut p = DMatrix::zeros(n, n);
    for block in 0..n / 2 {
        let (a, b) = (2 * block, 2 * block + 1);
        p[(a, b)] = -cos;
        p[(b, a)] = cos;
    }
    Ok(AdaptedFrame { theta, cos, n, p })
}

/// Sum of squared tangential-operator entries over all three structures,
/// `sum_beta sum_{i,j} <P_beta e_i, e_j>^2`.
///
/// For an adapted frame this equals `3 n cos^2(theta)`.
pub fn pp_sum(frame: &AdaptedFrame) -> f64 {
    let mut total = 0.0;
    for alpha in 0..3 {
        let p = frame.tangential_op(alpha);
        for i in 0..frame.n {
            for j in 0..frame.n {
                let v = p[(j, i)];
                total += v * v;
            }
        }
    }
    total
}

/// Second fundamental form components `h^alpha_ij`, symmetric in `(i, j)`.
///
/// Stored packed by upper triangle per normal direction, so symmetry is
/// structural rather than checked.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondFundamentalForm {
    n: usize,
    k: usize,
    packed: Vec<f64>,
}

impl SecondFundamentalForm {
    pub fn zeros(n: usize, k: usize) -> Self {
        assert!(n >= 1, "tangent dimension must be positive");
        Self {
            n,
            k,
            packed: vec![0.0; k * n * (n + 1) / 2],
        }
    }

    /// Builds the form from one symmetric matrix per normal direction.
    /// Rejects matrices that are asymmetric beyond `sym_tol`.
    pub fn from_matrices(matrices: &[DMatrix<f64>], sym_tol: f64) -> Result<Self> {
        let k = matrices.len();
        let n = matrices
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| CasoratiError::InvalidParameter("no normal directions".into()))?;
        let mut sff = Self::zeros(n, k);
        for (alpha, m) in matrices.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(CasoratiError::DimensionMismatch(format!(
                    "shape operator {alpha} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            for i in 0..n {
                for j in i..n {
                    let dev = (m[(i, j)] - m[(j, i)]).abs();
                    if dev > sym_tol {
                        return Err(CasoratiError::InvalidParameter(format!(
                            "shape operator {alpha} asymmetric at ({i},{j}) by {dev:.3e}"
                        )));
                    }
                    sff.set(alpha, i, j, m[(j, i)]);
                }
            }
        }
        Ok(sff)
    }

    pub fn tangent_dim(&self) -> usize {
        self.n
    }

    pub fn normal_count(&self) -> usize {
        self.k
    }

    fn index(&self, alpha: usize, i: usize, j: usize) -> usize {
        debug_assert!(alpha < self.k && i < self.n && j < self.n);
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let tri = lo * self.n - lo * (lo + 1) / 2 + hi;
        alpha * self.n * (self.n + 1) / 2 + tri
    }

    pub fn get(&self, alpha: usize, i: usize, j: usize) -> f64 {
        self.packed[self.index(alpha, i, j)]
    }

    pub fn set(&mut self, alpha: usize, i: usize, j: usize, value: f64) {
        let idx = self.index(alpha, i, j);
        self.packed[idx] = value;
    }

    /// Shape operator along normal direction `alpha` as a symmetric matrix.
    pub fn shape_operator(&self, alpha: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(alpha, i, j))
    }

    /// All shape operators, one per normal direction.
    pub fn shape_operators(&self) -> Vec<DMatrix<f64>> {
        (0..self.k).map(|a| self.shape_operator(a)).collect()
    }

    /// Trace of the shape operator along normal direction `alpha`.
    pub fn trace(&self, alpha: usize) -> f64 {
        (0..self.n).map(|i| self.get(alpha, i, i)).sum()
    }

    /// Squared norm of the full form, `sum_alpha sum_{i,j} (h^alpha_ij)^2`.
    pub fn norm_sq(&self) -> f64 {
        let mut total = 0.0;
        for alpha in 0..self.k {
            for i in 0..self.n {
                for j in 0..self.n {
                    let v = self.get(alpha, i, j);
                    total += v * v;
                }
            }
        }
        total
    }

    pub fn is_zero(&self) -> bool {
        self.packed.iter().all(|&v| v == 0.0)
    }
}

/// Pointwise data of a theta-slant submanifold of a quaternionic space form:
/// dimensions, curvature constant, slant angle, adapted frame operators and
/// second fundamental form.
#[derive(Debug, Clone, PartialEq)]
pub struct SlantInstance {
    n: usize,
    m: usize,
    c: f64,
    theta: f64,
    frame: AdaptedFrame,
    sff: SecondFundamentalForm,
    proper: bool,
}

impl SlantInstance {
    /// Assembles an instance, validating all dimension constraints.
    pub fn new(n: usize, m: usize, c: f64, theta: f64, sff: SecondFundamentalForm) -> Result<Self> {
        if m == 0 {
            return Err(CasoratiError::InvalidParameter(
                "quaternionic dimension m must be positive".into(),
            ));
        }
        if n < 2 || !n.is_multiple_of(2) {
            return Err(CasoratiError::InvalidParameter(format!(
                "tangent dimension n = {n} must be even and at least 2"
            )));
        }
        if n > 4 * m {
            return Err(CasoratiError::DimensionMismatch(format!(
                "tangent dimension n = {n} exceeds ambient dimension 4m = {}",
                4 * m
            )));
        }
        if sff.tangent_dim() != n {
            return Err(CasoratiError::DimensionMismatch(format!(
                "second fundamental form has tangent dimension {}, expected {n}",
                sff.tangent_dim()
            )));
        }
        if sff.normal_count() != 4 * m - n {
            return Err(CasoratiError::DimensionMismatch(format!(
                "second fundamental form has {} normal directions, expected {}",
                sff.normal_count(),
                4 * m - n
            )));
        }
        let frame = build_adapted_frame(n, theta)?;
        let proper = theta > 0.0 && theta < std::f64::consts::FRAC_PI_2;
        Ok(Self {
            n,
            m,
            c,
            theta,
            frame,
            sff,
            proper,
        })
    }

    pub fn tangent_dim(&self) -> usize {
        self.n
    }

    pub fn quaternionic_dim(&self) -> usize {
        self.m
    }

    pub fn normal_count(&self) -> usize {
        4 * self.m - self.n
    }

    pub fn curvature_constant(&self) -> f64 {
        self.c
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn frame(&self) -> &AdaptedFrame {
        &self.frame
    }

    pub fn sff(&self) -> &SecondFundamentalForm {
        &self.sff
    }

    /// True exactly when `0 < theta < pi/2`, the hypothesis of the sharp
    /// inequalities. Limit angles are still accepted for evaluation.
    pub fn is_proper(&self) -> bool {
        self.proper
    }
}

/// Generates an instance whose second fundamental form entries are i.i.d.
/// uniform in `[-amplitude, amplitude]`. Deterministic in `seed`.
pub fn random_instance(
    n: usize,
    m: usize,
    c: f64,
    theta: f64,
    amplitude: f64,
    seed: u64,
) -> Result<SlantInstance> {
    if amplitude < 0.0 {
        return Err(CasoratiError::InvalidParameter(
            "amplitude must be nonnegative".into(),
        ));
    }
    let k = (4 * m).checked_sub(n).ok_or_else(|| {
        CasoratiError::DimensionMismatch(format!("n = {n} exceeds ambient dimension {}", 4 * m))
    })?;
    let mut sff = SecondFundamentalForm::zeros(n, k);
    if amplitude > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for alpha in 0..k {
            for i in 0..n {
                for j in i..n {
                    sff.set(alpha, i, j, rng.random_range(-amplitude..=amplitude));
                }
            }
        }
    }
    SlantInstance::new(n, m, c, theta, sff)
}
