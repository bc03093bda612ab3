//! Catalyst-driven state transitions: majorization feasibility, the
//! unitary-dephase-unitary synthesis and the catalyst budget calculator.

use serde::Serialize;

use crate::dephasing::{plan_catalytic_dephasing, run_dephasing, DephasingPlan};
use crate::entropy::{majorizes, min_entropy, schur_horn_unitary};
use crate::error::{MinentError, Result, Tolerances};
use crate::linalg::CMat;
use crate::state::DensityMatrix;

/// True iff target spectrum is majorized by the source spectrum, i.e. the
/// transition is reachable by a unitary followed by a dephasing map.
pub fn transition_feasible(source: &DensityMatrix, target: &DensityMatrix) -> Result<bool> {
    if source.dim() != target.dim() {
        return Err(MinentError::DimensionMismatch(format!(
            "source dim {} != target dim {}",
            source.dim(),
            target.dim()
        )));
    }
    Ok(majorizes(&source.spectrum(), &target.spectrum()))
}

/// Catalyst min-entropy needed to dephase a D-dimensional system: log2 d
/// with d = ceil(sqrt(D)) suffices via embedding; (log2 D)/2 is the floor,
/// tight when D is a perfect square.
#[derive(Debug, Clone, Serialize)]
pub struct CatalystRequirement {
    pub system_dim: usize,
    pub d: usize,
    pub embedded_dim: usize,
    pub sufficient_bits: f64,
    pub floor_bits: f64,
}

pub fn catalyst_requirement(big_d: usize) -> CatalystRequirement {
    let d = (big_d as f64).sqrt().ceil() as usize;
    let d = if d * d < big_d { d + 1 } else { d };
    CatalystRequirement {
        system_dim: big_d,
        d,
        embedded_dim: d * d,
        sufficient_bits: (d as f64).log2(),
        floor_bits: (big_d as f64).log2() / 2.0,
    }
}

#[derive(Debug, Clone)]
pub struct TransitionPlan {
    pub source: DensityMatrix,
    pub target: DensityMatrix,
    /// Rotates the source so its diagonal equals the target spectrum.
    pub u1: CMat,
    /// Rotates the dephased diagonal state onto the target.
    pub u2: CMat,
    pub requirement: CatalystRequirement,
    pub dephasing: DephasingPlan,
}

pub fn plan_transition(
    source: &DensityMatrix,
    target: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<TransitionPlan> {
    let big_d = source.dim();
    if !transition_feasible(source, target)? {
        // surface the first violated partial sum
        let (s, t) = (source.spectrum(), target.spectrum());
        let (mut ss, mut ts) = (0.0, 0.0);
        for i in 0..big_d {
            ss += s.probs().get(i).copied().unwrap_or(0.0);
            ts += t.probs().get(i).copied().unwrap_or(0.0);
            if ts > ss + Tolerances::default().major {
                return Err(MinentError::NotMajorized {
                    index: i,
                    target_sum: ts,
                    spectrum_sum: ss,
                });
            }
        }
        unreachable!("infeasible transition must violate a partial sum");
    }
    let requirement = catalyst_requirement(big_d);
    let smin = min_entropy(sigma);
    if smin < requirement.sufficient_bits - Tolerances::default().major {
        return Err(MinentError::InsufficientCatalyst {
            smin,
            required: requirement.sufficient_bits,
        });
    }
    let dephasing = plan_catalytic_dephasing(sigma, requirement.d).map_err(|e| match e {
        MinentError::InfeasibleSor { smin, .. } => MinentError::InsufficientCatalyst {
            smin,
            required: requirement.sufficient_bits,
        },
        other => other,
    })?;
    let (src_spec, src_vecs) = source.eigen();
    let (tgt_spec, tgt_vecs) = target.eigen();
    let sh = schur_horn_unitary(&src_spec, tgt_spec.probs())?;
    let u1 = &sh * src_vecs.adjoint();
    let u2 = tgt_vecs;
    Ok(TransitionPlan {
        source: source.clone(),
        target: target.clone(),
        u1,
        u2,
        requirement,
        dephasing,
    })
}

/// Result of honestly executing a plan through the catalytic dephasing.
#[derive(Debug, Clone)]
pub struct TransitionExecution {
    pub output: DensityMatrix,
    /// (catalyst, leftover) marginal of the dephasing stage.
    pub catalyst_out: DensityMatrix,
    pub distance_to_target: f64,
}

pub fn execute_transition(plan: &TransitionPlan) -> Result<TransitionExecution> {
    let big_d = plan.source.dim();
    let d2 = plan.requirement.embedded_dim;
    let rotated = &plan.u1 * plan.source.entries() * plan.u1.adjoint();
    // embed into the dephasing dimension; extra levels stay unpopulated
    let mut embedded = CMat::zeros(d2, d2);
    embedded.view_mut((0, 0), (big_d, big_d)).copy_from(&rotated);
    let embedded = DensityMatrix::new(embedded, vec![d2])?;
    let run = run_dephasing(&plan.dephasing, &embedded)?;
    let dephased = run.system_out.entries().view((0, 0), (big_d, big_d)).clone_owned();
    let out = &plan.u2 * dephased * plan.u2.adjoint();
    let output = DensityMatrix::new(out, plan.target.dims().to_vec())?;
    let distance_to_target = crate::state::trace_distance(&output, &plan.target)?;
    Ok(TransitionExecution { output, catalyst_out: run.catalyst_out, distance_to_target })
}
