//! JSON shapes of the report documents.

use casorati::casorati_delta::{DeltaReport, HyperplaneExtremum};
use casorati::invariants::InvariantReport;
use casorati::verifier::{
    BoundKind, CriticalSystem, PatternParams, ProofCheckReport, VerificationReport,
};
use serde::Serialize;

#[derive(Serialize)]
pub struct Envelope<T: Serialize> {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub wall_time_seconds: f64,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(command: &str, seed: u64, started: std::time::Instant, body: T) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            wall_time_seconds: started.elapsed().as_secs_f64(),
            body,
        }
    }
}

#[derive(Serialize)]
pub struct InvariantsJson {
    pub tau: f64,
    pub rho: f64,
    pub mean_sq: f64,
    pub casorati: f64,
    pub h_norm_sq: f64,
}

impl From<&InvariantReport> for InvariantsJson {
    fn from(r: &InvariantReport) -> Self {
        Self {
            tau: r.tau,
            rho: r.rho,
            mean_sq: r.mean_sq,
            casorati: r.casorati,
            h_norm_sq: r.h_norm_sq,
        }
    }
}

#[derive(Serialize)]
pub struct ExtremumJson {
    pub kind: String,
    pub value: f64,
    pub normal: Vec<f64>,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_gap: Option<f64>,
}

impl From<&HyperplaneExtremum> for ExtremumJson {
    fn from(e: &HyperplaneExtremum) -> Self {
        Self {
            kind: match e.kind {
                casorati::ExtremumKind::Inf => "inf".into(),
                casorati::ExtremumKind::Sup => "sup".into(),
            },
            value: e.value,
            normal: e.hyperplane.normal().iter().copied().collect(),
            converged: e.converged,
            oracle_gap: e.certificate,
        }
    }
}

#[derive(Serialize)]
pub struct DeltaJson {
    pub r: f64,
    pub convention: String,
    pub delta_small: f64,
    pub delta_small_hat: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_gen: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_gen_hat: Option<f64>,
}

impl From<&DeltaReport> for DeltaJson {
    fn from(d: &DeltaReport) -> Self {
        Self {
            r: d.r,
            convention: match d.convention {
                casorati::DeltaConvention::Standard => "standard".into(),
                casorati::DeltaConvention::Legacy => "legacy".into(),
            },
            delta_small: d.delta_small,
            delta_small_hat: d.delta_small_hat,
            delta_gen: d.delta_gen,
            delta_gen_hat: d.delta_gen_hat,
        }
    }
}

pub fn bound_kind_name(kind: BoundKind) -> &'static str {
    match kind {
        BoundKind::GeneralizedInf => "generalized_inf",
        BoundKind::GeneralizedSup => "generalized_sup",
        BoundKind::NormalizedInf => "normalized_inf",
        BoundKind::NormalizedSup => "normalized_sup",
    }
}

#[derive(Serialize)]
pub struct PatternJson {
    pub a: f64,
    pub b: f64,
    pub normal_index: usize,
    pub tangent_index: usize,
}

impl From<&PatternParams> for PatternJson {
    fn from(p: &PatternParams) -> Self {
        Self {
            a: p.a,
            b: p.b,
            normal_index: p.normal_index,
            tangent_index: p.tangent_index,
        }
    }
}

#[derive(Serialize)]
pub struct VerificationJson {
    pub r: f64,
    pub bound_kind: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub proper: bool,
    pub equality_detected: bool,
    pub quasi_umbilical: bool,
    pub pattern: Option<PatternJson>,
}

impl From<&VerificationReport> for VerificationJson {
    fn from(v: &VerificationReport) -> Self {
        Self {
            r: v.r,
            bound_kind: bound_kind_name(v.bound_kind).to_string(),
            lhs: v.lhs,
            rhs: v.rhs,
            slack: v.slack,
            proper: v.proper,
            equality_detected: v.equality_detected,
            quasi_umbilical: v.quasi_umbilical,
            pattern: v.pattern.as_ref().map(PatternJson::from),
        }
    }
}

#[derive(Serialize)]
pub struct CriticalJson {
    pub ratio: f64,
    pub residual: f64,
    pub min_singular_value: f64,
}

impl From<&CriticalSystem> for CriticalJson {
    fn from(c: &CriticalSystem) -> Self {
        Self {
            ratio: c.ratio,
            residual: c.residual,
            min_singular_value: c.min_singular_value,
        }
    }
}

#[derive(Serialize)]
pub struct HessianJson {
    pub eigenvalues: Vec<f64>,
    pub expected: Vec<f64>,
    pub max_error: f64,
    pub zero_eigenvalues: usize,
    pub critical_residual: f64,
    pub p_at_critical: f64,
}

impl From<&ProofCheckReport> for HessianJson {
    fn from(p: &ProofCheckReport) -> Self {
        Self {
            eigenvalues: p.hessian_eigs.clone(),
            expected: p.expected_eigs.clone(),
            max_error: p.max_eig_error,
            zero_eigenvalues: p.hessian_eigs.iter().filter(|l| l.abs() < 1e-9).count(),
            critical_residual: p.critical_residual,
            p_at_critical: p.p_at_critical,
        }
    }
}
