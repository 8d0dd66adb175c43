//! The delta-Casorati curvatures: infimum and supremum of the hyperplane
//! Casorati curvature over all tangent hyperplanes (a sphere-constrained
//! optimization with an independent grid oracle), the normalized and
//! generalized normalized delta curvatures built from them, and the scaling
//! relations tying the two families together.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{CasoratiError, Result};
use crate::invariants::{casorati, casorati_of_hyperplane, Hyperplane};
use crate::slant_model::{SecondFundamentalForm, SlantInstance};

/// Which extremum of `C(L)` over tangent hyperplanes is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Inf,
    Sup,
}

/// Settings for the sphere optimizer.
#[derive(Debug, Clone, Copy)]
pub struct ExtremizeConfig {
    /// Random restarts in addition to the always-seeded coordinate axes.
    pub restarts: usize,
    pub max_iters: usize,
    /// Convergence threshold on the projected gradient norm.
    pub grad_tol: f64,
    /// When set, the grid oracle is also run at this resolution and the gap
    /// is stored in the result certificate.
    pub oracle_resolution: Option<usize>,
}

impl Default for ExtremizeConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 5_000,
            grad_tol: 1e-10,
            oracle_resolution: None,
        }
    }
}

/// An extremum of the hyperplane Casorati curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneExtremum {
    pub value: f64,
    pub hyperplane: Hyperplane,
    pub kind: ExtremumKind,
    /// False when no restart reached the gradient threshold; the value is
    /// then the best found rather than a certified critical point.
    pub converged: bool,
    /// `optimizer value - oracle value`, present when the oracle was run.
    pub certificate: Option<f64>,
}

/// Hyperplane Casorati curvature as a function of the unit normal:
/// `C(u^perp) = (1/(n-1)) sum_a || (I - u u^T) A_a (I - u u^T) ||_F^2`,
/// expanded to `(1/(n-1)) sum_a [ ||A_a||_F^2 - 2 u^T A_a^2 u + (u^T A_a u)^2 ]`.
pub fn hyperplane_objective(sff: &SecondFundamentalForm, u: &DVector<f64>) -> f64 {
    let ops = Precomputed::new(sff);
    ops.value(u)
}

/// Analytic gradient of `hyperplane_objective` projected onto the tangent
/// space of the unit sphere at `u`.
pub fn hyperplane_objective_gradient(
    sff: &SecondFundamentalForm,
    u: &DVector<f64>,
) -> DVector<f64> {
    let ops = Precomputed::new(sff);
    ops.sphere_gradient(u)
}

struct Precomputed {
    n: usize,
    ops: Vec<DMatrix<f64>>,
    ops_sq: Vec<DMatrix<f64>>,
    norms_sq: Vec<f64>,
}

impl Precomputed {
    fn new(sff: &SecondFundamentalForm) -> Self {
        let ops = sff.shape_operators();
        let ops_sq = ops.iter().map(|a| a * a).collect();
        let norms_sq = ops
            .iter()
            .map(|a| a.iter().map(|v| v * v).sum::<f64>())
            .collect();
        Self {
            n: sff.tangent_dim(),
            ops,
            ops_sq,
            norms_sq,
        }
    }

    fn value(&self, u: &DVector<f64>) -> f64 {
        let mut total = 0.0;
        for (alpha, a) in self.ops.iter().enumerate() {
            let au = a * u;
            let quad = u.dot(&au);
            let sq = (&self.ops_sq[alpha] * u).dot(u);
            total += self.norms_sq[alpha] - 2.0 * sq + quad * quad;
        }
        total / (self.n as f64 - 1.0)
    }

    /// Euclidean gradient `(4/(n-1)) sum_a [ (u^T A_a u) A_a u - A_a^2 u ]`,
    /// projected onto the tangent space at `u`.
    fn sphere_gradient(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.n);
        for (alpha, a) in self.ops.iter().enumerate() {
            let au = a * u;
            let quad = u.dot(&au);
            g += au * quad - &self.ops_sq[alpha] * u;
        }
        g *= 4.0 / (self.n as f64 - 1.0);
        let radial = u.dot(&g);
        g - u * radial
    }
}

/// Flips the sign so the first component of magnitude above 1e-12 is
/// positive; `u` and `-u` describe the same hyperplane.
fn canonicalize_sign(u: &mut DVector<f64>) {
    for v in u.iter() {
        if v.abs() > 1e-12 {
            if *v < 0.0 {
                *u *= -1.0;
            }
            return;
        }
    }
}

fn lex_less(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

fn descend(
    pre: &Precomputed,
    mut u: DVector<f64>,
    kind: ExtremumKind,
    config: &ExtremizeConfig,
) -> (f64, DVector<f64>, bool) {
    let sign = match kind {
        ExtremumKind::Inf => 1.0,
        ExtremumKind::Sup => -1.0,
    };
    let mut value = sign * pre.value(&u);
    let mut step = 1.0;
    let mut converged = false;
    for _ in 0..config.max_iters {
        let g = pre.sphere_gradient(&u) * sign;
        let gnorm_sq = g.norm_squared();
        if gnorm_sq.sqrt() < config.grad_tol {
            converged = true;
            break;
        }
        let mut advanced = false;
        while step > 1e-20 {
            let candidate = (&u - &g * step).normalize();
            let cand_value = sign * pre.value(&candidate);
            if cand_value < value - 1e-4 * step * gnorm_sq {
                u = candidate;
                value = cand_value;
                step = (step * 2.0).min(1e3);
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    (sign * value, u, converged)
}

/// Extremizes `C(L)` over tangent hyperplanes by multi-restart projected
/// gradient descent on the unit sphere. Coordinate axes are always seeded
/// as starting points; they are the exact optima for diagonal shape
/// operators. Restart starts are drawn uniformly from the sphere.
pub fn extremize_hyperplane(
    sff: &SecondFundamentalForm,
    kind: ExtremumKind,
    seed: u64,
    config: &ExtremizeConfig,
) -> Result<HyperplaneExtremum> {
    let n = sff.tangent_dim();
    if n < 3 {
        return Err(CasoratiError::InvalidParameter(format!(
            "hyperplane extremization needs n >= 3, got n = {n}"
        )));
    }
    let pre = Precomputed::new(sff);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut starts: Vec<DVector<f64>> = (0..n)
        .map(|i| {
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            v
        })
        .collect();
    for _ in 0..config.restarts {
        let v = DVector::<f64>::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let norm = v.norm();
        if norm > 0.0 {
            starts.push(v / norm);
        }
    }

    let mut best: Option<(f64, DVector<f64>, bool)> = None;
    let better = |value: f64, reference: f64| match kind {
        ExtremumKind::Inf => value < reference,
        ExtremumKind::Sup => value > reference,
    };
    for start in starts {
        let (value, mut u, converged) = descend(&pre, start, kind, config);
        canonicalize_sign(&mut u);
        match &mut best {
            None => best = Some((value, u, converged)),
            Some((bv, bu, bc)) => {
                let tie = (value - *bv).abs() <= 1e-12 * (1.0 + bv.abs());
                if (!tie && better(value, *bv)) || (tie && lex_less(&u, bu)) {
                    *bv = value;
                    *bu = u;
                    *bc = converged;
                }
            }
        }
    }
    let (_, normal, converged) = best.expect("axis starts always present");
    let hyperplane = Hyperplane::new(normal)?;
    // Report the value through the same path callers would use to verify it.
    let value = casorati_of_hyperplane(sff, &hyperplane)?;
    let certificate = match config.oracle_resolution {
        Some(resolution) => Some(value - oracle_extremum(sff, kind, resolution)?),
        None => None,
    };
    Ok(HyperplaneExtremum {
        value,
        hyperplane,
        kind,
        converged,
        certificate,
    })
}

/// Unit vector from hyperspherical angles: `n - 2` polar angles in `[0, pi]`
/// and one final angle; antipodal symmetry of the objective lets the final
/// angle stay in `[0, pi)` too.
fn unit_from_angles(angles: &[f64]) -> DVector<f64> {
    let n = angles.len() + 1;
    let mut u = DVector::zeros(n);
    let mut sin_prod = 1.0;
    for (i, &phi) in angles.iter().enumerate() {
        u[i] = sin_prod * phi.cos();
        sin_prod *= phi.sin();
    }
    u[n - 1] = sin_prod;
    u
}

/// Orthonormal basis of the tangent space at `u`, for local grid refinement.
fn tangent_basis(u: &DVector<f64>) -> DMatrix<f64> {
    let n = u.len();
    let mut full = DMatrix::zeros(n, n);
    full.set_column(0, u);
    // complete with the identity; QR discards the dependent column
    let mut col = 1;
    for i in 0..n {
        if col == n {
            break;
        }
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        // skip the axis most aligned with u to keep the matrix full rank
        if u.abs().argmax().0 == i {
            continue;
        }
        full.set_column(col, &e);
        col += 1;
    }
    let q = full.qr().q();
    q.columns(1, n - 1).into_owned()
}

const ORACLE_POINT_BUDGET: u64 = 10_000_000;
const ORACLE_CANDIDATES: usize = 8;
const ORACLE_REFINE_LEVELS: usize = 20;
const ORACLE_REFINE_RES: usize = 9;

/// Brute-force extremum of `C(u^perp)`: a deterministic hyperspherical grid
/// at `resolution` points per angle plus the coordinate axes, followed by
/// deterministic local grid refinement around the best candidates. For
/// `Inf` the result is an upper bound on the true infimum, for `Sup` a
/// lower bound on the true supremum.
pub fn oracle_extremum(
    sff: &SecondFundamentalForm,
    kind: ExtremumKind,
    resolution: usize,
) -> Result<f64> {
    let n = sff.tangent_dim();
    if !(3..=5).contains(&n) {
        return Err(CasoratiError::InvalidParameter(format!(
            "grid oracle supports n in 3..=5, got n = {n}"
        )));
    }
    if resolution < 2 {
        return Err(CasoratiError::InvalidParameter(
            "oracle resolution must be at least 2".into(),
        ));
    }
    let points = (resolution as u64).pow(n as u32 - 1);
    if points > ORACLE_POINT_BUDGET {
        return Err(CasoratiError::OracleResolutionOverflow {
            points,
            limit: ORACLE_POINT_BUDGET,
        });
    }

    let pre = Precomputed::new(sff);
    let sign = match kind {
        ExtremumKind::Inf => 1.0,
        ExtremumKind::Sup => -1.0,
    };

    // Global pass: keep the best few grid points as refinement candidates.
    let mut candidates: Vec<(f64, DVector<f64>)> = Vec::new();
    let mut push = |value: f64, u: DVector<f64>| {
        if candidates.len() < ORACLE_CANDIDATES {
            candidates.push((value, u));
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        } else if value < candidates[ORACLE_CANDIDATES - 1].0 {
            candidates[ORACLE_CANDIDATES - 1] = (value, u);
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
    };

    let dims = n - 1;
    let mut idx = vec![0usize; dims];
    loop {
        let angles: Vec<f64> = idx
            .iter()
            .map(|&i| (i as f64 + 0.5) * std::f64::consts::PI / resolution as f64)
            .collect();
        let u = unit_from_angles(&angles);
        push(sign * pre.value(&u), u);
        // odometer increment
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < resolution {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == dims {
                break;
            }
        }
        if d == dims {
            break;
        }
    }
    for i in 0..n {
        let mut u = DVector::zeros(n);
        u[i] = 1.0;
        let value = sign * pre.value(&u);
        push(value, u);
    }

    // Local refinement: shrinking tangent-space grids around each candidate.
    let mut best = candidates[0].0;
    for (start_value, start_u) in candidates {
        let mut center = start_u;
        let mut value = start_value;
        let mut width = 2.0 * std::f64::consts::PI / resolution as f64;
        for _ in 0..ORACLE_REFINE_LEVELS {
            let basis = tangent_basis(&center);
            let mut local_best = value;
            let mut local_u = center.clone();
            let mut offsets = vec![0usize; dims];
            loop {
                let mut delta = DVector::zeros(n);
                for (d, &o) in offsets.iter().enumerate() {
                    let t = -width + 2.0 * width * (o as f64 + 0.5) / ORACLE_REFINE_RES as f64;
                    delta += basis.column(d) * t;
                }
                let u = (&center + delta).normalize();
                let v = sign * pre.value(&u);
                if v < local_best {
                    local_best = v;
                    local_u = u;
                }
                let mut d = 0;
                loop {
                    offsets[d] += 1;
                    if offsets[d] < ORACLE_REFINE_RES {
                        break;
                    }
                    offsets[d] = 0;
                    d += 1;
                    if d == dims {
                        break;
                    }
                }
                if d == dims {
                    break;
                }
            }
            center = local_u;
            value = local_best;
            width *= 4.0 / ORACLE_REFINE_RES as f64;
        }
        if value < best {
            best = value;
        }
    }
    Ok(sign * best)
}

/// Both extremes of `C(L)`, sharing one precomputation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneExtremes {
    pub inf: HyperplaneExtremum,
    pub sup: HyperplaneExtremum,
}

pub fn hyperplane_extremes(
    sff: &SecondFundamentalForm,
    seed: u64,
    config: &ExtremizeConfig,
) -> Result<HyperplaneExtremes> {
    Ok(HyperplaneExtremes {
        inf: extremize_hyperplane(sff, ExtremumKind::Inf, seed, config)?,
        sup: extremize_hyperplane(sff, ExtremumKind::Sup, seed, config)?,
    })
}

/// Coefficient convention for the normalized delta-Casorati curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaConvention {
    /// The `(n+1)/(2n)` coefficient, under which the normalized curvature is
    /// exactly the `r = n(n-1)/2` slice of the generalized family.
    #[default]
    Standard,
    /// The older `(n+1)/(2n(n-1))` coefficient found in earlier literature.
    Legacy,
}

/// The delta-Casorati curvatures at one point for one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaReport {
    pub r: f64,
    /// Normalized delta curvature built from inf C(L).
    pub delta_small: f64,
    /// Normalized delta curvature built from sup C(L).
    pub delta_small_hat: f64,
    /// Generalized delta curvature, present when `0 < r < n(n-1)`.
    pub delta_gen: Option<f64>,
    /// Generalized delta curvature, present when `r > n(n-1)`.
    pub delta_gen_hat: Option<f64>,
    pub convention: DeltaConvention,
}

/// Assembles the delta curvatures from precomputed extremes.
pub fn delta_from_extremes(
    n: usize,
    casorati_value: f64,
    extremes: &HyperplaneExtremes,
    r: f64,
    convention: DeltaConvention,
) -> Result<DeltaReport> {
    if n < 3 {
        return Err(CasoratiError::InvalidParameter(format!(
            "delta curvatures need n >= 3, got n = {n}"
        )));
    }
    let nf = n as f64;
    let boundary = nf * (nf - 1.0);
    if r <= 0.0 {
        return Err(CasoratiError::ExcludedParameter {
            r,
            reason: "r must be positive".into(),
        });
    }
    if r == boundary {
        return Err(CasoratiError::ExcludedParameter {
            r,
            reason: format!("r = n(n-1) = {boundary} is excluded by definition"),
        });
    }
    let inf = extremes.inf.value;
    let sup = extremes.sup.value;
    let small_coeff = match convention {
        DeltaConvention::Standard => (nf + 1.0) / (2.0 * nf),
        DeltaConvention::Legacy => (nf + 1.0) / (2.0 * nf * (nf - 1.0)),
    };
    let delta_small = 0.5 * casorati_value + small_coeff * inf;
    let delta_small_hat = 2.0 * casorati_value - (2.0 * nf - 1.0) / (2.0 * nf) * sup;
    let (delta_gen, delta_gen_hat) = if r < boundary {
        let coeff = (nf - 1.0) * (nf + r) * (nf * nf - nf - r) / (r * nf);
        (Some(r * casorati_value + coeff * inf), None)
    } else {
        let coeff = (nf - 1.0) * (nf + r) * (r - nf * nf + nf) / (r * nf);
        (None, Some(r * casorati_value - coeff * sup))
    };
    Ok(DeltaReport {
        r,
        delta_small,
        delta_small_hat,
        delta_gen,
        delta_gen_hat,
        convention,
    })
}

/// Computes the delta-Casorati curvatures of an instance for parameter `r`,
/// extremizing `C(L)` internally with the default optimizer settings.
pub fn delta_casorati(
    inst: &SlantInstance,
    r: f64,
    convention: DeltaConvention,
    seed: u64,
) -> Result<DeltaReport> {
    let extremes = hyperplane_extremes(inst.sff(), seed, &ExtremizeConfig::default())?;
    delta_from_extremes(
        inst.tangent_dim(),
        casorati(inst.sff()),
        &extremes,
        r,
        convention,
    )
}

/// Checks the two scaling relations that recover the normalized curvatures
/// from the generalized family: `delta_C(n(n-1)/2) = n(n-1) delta_c` and
/// `hat delta_C(2n(n-1)) = n(n-1) hat delta_c`, under the paper convention.
/// Returns both absolute gaps, each side evaluated independently.
pub fn check_scaling_relations(inst: &SlantInstance, seed: u64) -> Result<(f64, f64)> {
    let nf = inst.tangent_dim() as f64;
    let scale = nf * (nf - 1.0);
    let low = delta_casorati(inst, scale / 2.0, DeltaConvention::Standard, seed)?;
    let high = delta_casorati(inst, 2.0 * scale, DeltaConvention::Standard, seed)?;
    let gap_inf = (low.delta_gen.expect("r below boundary") - scale * high.delta_small).abs();
    let gap_sup =
        (high.delta_gen_hat.expect("r above boundary") - scale * low.delta_small_hat).abs();
    Ok((gap_inf, gap_sup))
}
