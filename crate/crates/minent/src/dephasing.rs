//! Catalytic dephasing: the optimal d^2-on-d dephasing unitary, plans built
//! from an arbitrary precatalyst, min-entropy accounting, catalyst recovery
//! and the measurement collapse to the standard catalyst.

use num_complex::Complex64;

use crate::entropy::min_entropy;
use crate::error::{MinentError, Result, Tolerances};
use crate::instrument::{build_instrument, NielsenInstrument};
use crate::linalg::{self, cr, CMat, CVec, ONE};
use crate::state::{partial_trace, schmidt_decompose, DensityMatrix};

/// Generalized permutation: op|x> = phase[x] |target[x]>.
#[derive(Debug, Clone)]
pub struct MonomialOp {
    pub dim: usize,
    pub target: Vec<usize>,
    pub phase: Vec<Complex64>,
}

impl MonomialOp {
    pub fn dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for x in 0..self.dim {
            m[(self.target[x], x)] = self.phase[x];
        }
        m
    }

    /// op rho op^H
    pub fn conjugate(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for x in 0..self.dim {
            for y in 0..self.dim {
                out[(self.target[x], self.target[y])] =
                    self.phase[x] * self.phase[y].conj() * rho[(x, y)];
            }
        }
        out
    }

    /// Lifts an op acting on factor positions (pos_a, pos_b) of a
    /// multi-register space to the full index space. The op's index is
    /// a * dim_b + b.
    pub fn embed(&self, dims: &[usize], pos_a: usize, pos_b: usize) -> MonomialOp {
        let full: usize = dims.iter().product();
        let dim_b = dims[pos_b];
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len() - 1).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let mut target = vec![0usize; full];
        let mut phase = vec![ONE; full];
        for x in 0..full {
            let a = (x / strides[pos_a]) % dims[pos_a];
            let b = (x / strides[pos_b]) % dims[pos_b];
            let local = a * dim_b + b;
            let mapped = self.target[local];
            let (na, nb) = (mapped / dim_b, mapped % dim_b);
            let y = x as isize
                + (na as isize - a as isize) * strides[pos_a] as isize
                + (nb as isize - b as isize) * strides[pos_b] as isize;
            target[x] = y as usize;
            phase[x] = self.phase[local];
        }
        MonomialOp { dim: full, target, phase }
    }
}

/// The optimal dephasing unitary for a d^2-dimensional system with a
/// d-dimensional catalyst: U|i,j,k> = w^{jk} |i,j,(k+i) mod d>, w = e^{2pi i/d}.
pub fn optimal_dephasing_monomial(d: usize) -> MonomialOp {
    let dim = d * d * d;
    let mut target = vec![0usize; dim];
    let mut phase = vec![ONE; dim];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let x = (i * d + j) * d + k;
                target[x] = (i * d + j) * d + (k + i) % d;
                phase[x] = Complex64::from_polar(
                    1.0,
                    2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64,
                );
            }
        }
    }
    MonomialOp { dim, target, phase }
}

pub fn optimal_dephasing_unitary(d: usize) -> CMat {
    optimal_dephasing_monomial(d).dense()
}

/// Controlled-phase baseline U|j,k> = w^{jk}|j,k> on a D-dimensional system
/// with a D-dimensional catalyst.
pub fn naive_dephasing_unitary(big_d: usize) -> CMat {
    let mut m = CMat::identity(big_d * big_d, big_d * big_d);
    for j in 0..big_d {
        for k in 0..big_d {
            m[(j * big_d + k, j * big_d + k)] = Complex64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * (j * k) as f64 / big_d as f64,
            );
        }
    }
    m
}

/// Catalyst min-entropy the two constructions consume for a D-dimensional
/// system: log2 D for the naive controlled phase, (log2 D)/2 for the optimal
/// unitary when D = d^2.
#[derive(Debug, Clone)]
pub struct CatalystCost {
    pub system_dim: usize,
    pub naive_bits: f64,
    pub optimal_bits: f64,
}

pub fn catalyst_cost(system_dim: usize) -> CatalystCost {
    let bits = (system_dim as f64).log2();
    CatalystCost { system_dim, naive_bits: bits, optimal_bits: bits / 2.0 }
}

/// Induced channel of a dephasing unitary with a uniform rank-`cat_dim`
/// catalyst: Tr_cat[U(rho (x) I/cat)U^H].
pub fn induced_channel(u: &CMat, cat_dim: usize, rho: &CMat) -> CMat {
    let sys = u.nrows() / cat_dim;
    assert_eq!(rho.nrows(), sys);
    let joint = linalg::kron(rho, &(CMat::identity(cat_dim, cat_dim) * cr(1.0 / cat_dim as f64)));
    let out = u * joint * u.adjoint();
    trace_out_last(&out, sys, cat_dim)
}

/// Complementary channel: Tr_sys[U(rho (x) I/cat)U^H].
pub fn complementary_channel(u: &CMat, cat_dim: usize, rho: &CMat) -> CMat {
    let sys = u.nrows() / cat_dim;
    let joint = linalg::kron(rho, &(CMat::identity(cat_dim, cat_dim) * cr(1.0 / cat_dim as f64)));
    let out = u * joint * u.adjoint();
    trace_out_first(&out, sys, cat_dim)
}

fn trace_out_last(m: &CMat, keep: usize, traced: usize) -> CMat {
    let mut out = CMat::zeros(keep, keep);
    for r in 0..keep {
        for c in 0..keep {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..traced {
                acc += m[(r * traced + t, c * traced + t)];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

fn trace_out_first(m: &CMat, traced: usize, keep: usize) -> CMat {
    let mut out = CMat::zeros(keep, keep);
    for r in 0..keep {
        for c in 0..keep {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..traced {
                acc += m[(t * keep + r, t * keep + c)];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

/// Joint-state size cap for full plan simulation.
const MAX_JOINT_DIM: usize = 2600;

/// Everything needed to run a d^2-dimensional catalytic dephasing with a
/// precatalyst sigma: the instrument on sigma's eigenbasis, the compressed
/// Kraus operators, the embedding isometry J and the dephasing unitary.
#[derive(Debug, Clone)]
pub struct DephasingPlan {
    pub d: usize,
    pub precatalyst: DensityMatrix,
    pub instrument: NielsenInstrument,
    /// Kraus operators compressed to map H_sigma -> C^d.
    pub kraus_compressed: Vec<CMat>,
    /// Branch weights Tr[K_i sigma K_i^H]; the leftover SOR kappa is
    /// diagonal with these weights.
    pub probs: Vec<f64>,
    /// J = sum_i |i>_{A'} (x) |i>_{B'} (x) K~_i, an isometry on supp(sigma).
    pub embed_isometry: CMat,
    /// sigma's eigenvectors, descending (columns); first d span the
    /// catalyst target.
    pub eigvecs: CMat,
    pub dephase: MonomialOp,
}

impl DephasingPlan {
    pub fn outcomes(&self) -> usize {
        self.probs.len()
    }

    /// kappa = sum_i p_i |i><i|
    pub fn kappa(&self) -> DensityMatrix {
        DensityMatrix::from_diag_probs(&self.probs).expect("kappa")
    }

    /// Joint register layout of run_dephasing: [d^2, m, m, d] for
    /// (system, leftover A', leftover B', catalyst B).
    pub fn joint_dims(&self) -> Vec<usize> {
        let m = self.outcomes();
        vec![self.d * self.d, m, m, self.d]
    }
}

/// Builds the Theorem 2 pipeline from a precatalyst. Requires
/// S_min(sigma) >= log2 d, i.e. lambda_max(sigma) <= 1/d.
pub fn plan_catalytic_dephasing(sigma: &DensityMatrix, d: usize) -> Result<DephasingPlan> {
    if d < 2 {
        return Err(MinentError::DimensionMismatch("d must be at least 2".into()));
    }
    let spec = sigma.spectrum();
    if spec.max() > 1.0 / d as f64 + Tolerances::default().major {
        return Err(MinentError::InfeasibleSor { smin: min_entropy(sigma), d });
    }
    // purification with sigma's system on the Kraus side
    let (spec, eigvecs_raw) = sigma.eigen();
    let n = sigma.dim();
    let rank = spec.rank().max(1);
    let mut amp = CVec::zeros(n * rank);
    for k in 0..rank {
        let f = eigvecs_raw.column(k);
        for r in 0..n {
            amp[r * rank + k] = f[r] * cr(spec.probs()[k].sqrt());
        }
    }
    let pad = schmidt_decompose(&amp, n, rank)?;
    let inst = build_instrument(&pad, d)
        .map_err(|_| MinentError::InfeasibleSor { smin: min_entropy(sigma), d })?;
    // compression C^d <- span(first d Schmidt vectors on the sigma side)
    let mut compress = CMat::zeros(d, n);
    for r in 0..d {
        compress.set_row(r, &inst.target_basis_a.column(r).adjoint());
    }
    let kraus_compressed: Vec<CMat> = inst.kraus.iter().map(|k| &compress * k).collect();
    let m = kraus_compressed.len();
    let mut embed = CMat::zeros(m * m * d, n);
    for (i, kc) in kraus_compressed.iter().enumerate() {
        for r in 0..d {
            for c in 0..n {
                embed[((i * m + i) * d + r, c)] = kc[(r, c)];
            }
        }
    }
    let probs = inst.probs.clone();
    Ok(DephasingPlan {
        d,
        precatalyst: sigma.clone(),
        kraus_compressed,
        probs,
        embed_isometry: embed,
        eigvecs: pad.schmidt().basis_a.clone(),
        dephase: optimal_dephasing_monomial(d),
        instrument: inst,
    })
}

/// Outputs of one catalytic dephasing run.
#[derive(Debug, Clone)]
pub struct DephasingRun {
    /// Dephased d^2-dimensional system.
    pub system_out: DensityMatrix,
    /// (catalyst B, leftover B') marginal; equals Phi_B (x) kappa.
    pub catalyst_out: DensityMatrix,
    /// Leftover A' marginal; equals kappa.
    pub leftover_out: DensityMatrix,
    /// Full joint on (system, A', B', B).
    pub joint: DensityMatrix,
}

pub fn run_dephasing(plan: &DephasingPlan, rho: &DensityMatrix) -> Result<DephasingRun> {
    let d2 = plan.d * plan.d;
    if rho.dim() != d2 {
        return Err(MinentError::DimensionMismatch(format!(
            "input dim {} != d^2 = {d2}",
            rho.dim()
        )));
    }
    let joint_dim: usize = d2 * plan.outcomes() * plan.outcomes() * plan.d;
    if joint_dim > MAX_JOINT_DIM {
        return Err(MinentError::TooLarge(format!(
            "joint simulation dimension {joint_dim} exceeds cap {MAX_JOINT_DIM}"
        )));
    }
    let sor = &plan.embed_isometry * plan.precatalyst.entries() * plan.embed_isometry.adjoint();
    let joint0 = linalg::kron(rho.entries(), &sor);
    let dims = plan.joint_dims();
    let full_op = plan.dephase_sys_cat().embed(&dims, 0, 3);
    let joint = full_op.conjugate(&joint0);
    let joint = DensityMatrix::new(joint, dims)?;
    let system_out = partial_trace(&joint, &[0])?;
    let bprime_b = partial_trace(&joint, &[2, 3])?; // order (B', B)
    let catalyst_out = swap_bipartite(&bprime_b)?; // order (B, B')
    let leftover_out = partial_trace(&joint, &[1])?;
    Ok(DephasingRun { system_out, catalyst_out, leftover_out, joint })
}

impl DephasingPlan {
    /// The dephasing unitary viewed as acting on (system, catalyst) with
    /// combined index sys * d + k, matching `MonomialOp::embed`.
    fn dephase_sys_cat(&self) -> MonomialOp {
        self.dephase.clone()
    }
}

fn swap_bipartite(state: &DensityMatrix) -> Result<DensityMatrix> {
    let dims = state.dims();
    if dims.len() != 2 {
        return Err(MinentError::DimensionMismatch("expected two factors".into()));
    }
    let (a, b) = (dims[0], dims[1]);
    let m = state.entries();
    let mut out = CMat::zeros(a * b, a * b);
    for i in 0..a {
        for j in 0..b {
            for k in 0..a {
                for l in 0..b {
                    out[(j * a + i, l * a + k)] = m[(i * b + j, k * b + l)];
                }
            }
        }
    }
    DensityMatrix::new(out, vec![b, a])
}

/// Both sides of the Eq.-style min-entropy accounting:
/// 2^{-S_min(Phi_B (x) kappa)} = max_i p_i/d <= 2^{-S_min(sigma)}.
#[derive(Debug, Clone)]
pub struct MinEntropyReport {
    pub post_guess_prob: f64,
    pub max_branch_over_d: f64,
    pub pre_guess_prob: f64,
    pub equality_dev: f64,
    pub inequality_slack: f64,
    pub pass: bool,
}

pub fn check_min_entropy_nondecrease(plan: &DephasingPlan) -> MinEntropyReport {
    let d = plan.d as f64;
    let kappa_max = plan.probs.iter().cloned().fold(0.0f64, f64::max);
    // Phi_B (x) kappa has largest eigenvalue kappa_max / d
    let post_guess_prob = kappa_max / d;
    let max_branch_over_d = plan
        .kraus_compressed
        .iter()
        .map(|k| (k * plan.precatalyst.entries() * k.adjoint()).trace().re / d)
        .fold(0.0f64, f64::max);
    let pre_guess_prob = plan.precatalyst.spectrum().max();
    let equality_dev = (post_guess_prob - max_branch_over_d).abs();
    let inequality_slack = pre_guess_prob - post_guess_prob;
    let pass = equality_dev <= 1e-10 && inequality_slack >= -1e-10;
    MinEntropyReport {
        post_guess_prob,
        max_branch_over_d,
        pre_guess_prob,
        equality_dev,
        inequality_slack,
        pass,
    }
}

/// Applies sum_i E_i^H-style conditioned rotations to Phi_B (x) kappa,
/// dephases the leftover in a basis unbiased from its eigenbasis and
/// discards it; returns the recovered precatalyst.
pub fn recover_catalyst(plan: &DephasingPlan) -> DensityMatrix {
    recover_catalyst_with_branches(plan, None)
}

/// `skip` omits one conditioned branch (ablation hook for tests).
pub fn recover_catalyst_with_branches(plan: &DephasingPlan, skip: Option<usize>) -> DensityMatrix {
    let d = plan.d;
    let n = plan.precatalyst.dim();
    let mut out = CMat::zeros(n, n);
    // E_i: C^d -> H_sigma, columns = sigma eigenvectors selected by the
    // i-th decomposition subset (ascending)
    for (i, (p, subset)) in plan.instrument.decomposition.terms.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let mut e = CMat::zeros(n, d);
        for (r, &k) in subset.iter().enumerate() {
            e.set_column(r, &plan.eigvecs.column(k));
        }
        // E_i (I/d) E_i^H, weighted by the branch probability read off kappa;
        // the Fourier dephasing of kappa leaves these weights untouched
        out += (&e * e.adjoint()) * cr(p / d as f64);
    }
    match DensityMatrix::new(out.clone(), plan.precatalyst.dims().to_vec()) {
        Ok(dm) => dm,
        Err(_) => {
            // ablated sums are subnormalized; renormalize for comparison
            let tr = out.trace().re;
            DensityMatrix::new(out / cr(tr), plan.precatalyst.dims().to_vec())
                .expect("renormalized recovery")
        }
    }
}

/// Post-measurement record for one projective outcome on the leftover B'.
#[derive(Debug, Clone)]
pub struct CollapseOutcome {
    pub probability: f64,
    pub skipped: bool,
    pub system_state: Option<DensityMatrix>,
    pub catalyst_state: Option<DensityMatrix>,
}

/// Projective measurement of the leftover register B' of a run's joint
/// state; returns the conditioned system and catalyst per outcome.
pub fn collapse_to_standard(
    plan: &DephasingPlan,
    joint: &DensityMatrix,
    outcome_basis: &CMat,
) -> Result<Vec<CollapseOutcome>> {
    let dims = plan.joint_dims();
    if joint.dims() != dims.as_slice() {
        return Err(MinentError::DimensionMismatch(format!(
            "joint dims {:?} do not match plan layout {:?}",
            joint.dims(),
            dims
        )));
    }
    let m = plan.outcomes();
    if outcome_basis.nrows() != m {
        return Err(MinentError::DimensionMismatch(format!(
            "outcome basis on B' must be {m}-dimensional"
        )));
    }
    let (d2, ma, d) = (dims[0], dims[1], dims[3]);
    let mut outcomes = Vec::with_capacity(outcome_basis.ncols());
    for o in 0..outcome_basis.ncols() {
        let phi = outcome_basis.column(o);
        // contract B' with <phi| on both sides
        let reduced_dim = d2 * ma * d;
        let mut red = CMat::zeros(reduced_dim, reduced_dim);
        for s in 0..d2 {
            for a in 0..ma {
                for k in 0..d {
                    for s2 in 0..d2 {
                        for a2 in 0..ma {
                            for k2 in 0..d {
                                let mut acc = Complex64::new(0.0, 0.0);
                                for b in 0..m {
                                    for b2 in 0..m {
                                        let row = ((s * ma + a) * m + b) * d + k;
                                        let col = ((s2 * ma + a2) * m + b2) * d + k2;
                                        acc += phi[b].conj()
                                            * phi[b2]
                                            * joint.entries()[(row, col)];
                                    }
                                }
                                red[((s * ma + a) * d + k, (s2 * ma + a2) * d + k2)] = acc;
                            }
                        }
                    }
                }
            }
        }
        let prob = red.trace().re;
        if prob < 1e-12 {
            outcomes.push(CollapseOutcome {
                probability: prob.max(0.0),
                skipped: true,
                system_state: None,
                catalyst_state: None,
            });
            continue;
        }
        let red = DensityMatrix::new(red / cr(prob), vec![d2, ma, d])?;
        outcomes.push(CollapseOutcome {
            probability: prob,
            skipped: false,
            system_state: Some(partial_trace(&red, &[0])?),
            catalyst_state: Some(partial_trace(&red, &[2])?),
        });
    }
    Ok(outcomes)
}
