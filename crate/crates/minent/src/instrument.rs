//! One-way LOCC instrument that converts a feasible pad into a canonical
//! maximally entangled state: Kraus operators on A, correction unitaries on
//! B, and a recorded outcome register.

use crate::entropy::{uniform_subset_decompose, UniformSubsetDecomposition};
use crate::error::{zero_threshold, MinentError, Result, Tolerances};
use crate::linalg::{self, complete_basis, cr, CMat, CVec};
use crate::state::{BipartitePureState, DensityMatrix};

#[derive(Debug, Clone)]
pub struct NielsenInstrument {
    pub d: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    /// Kraus operators on A, one per decomposition term.
    pub kraus: Vec<CMat>,
    /// Correction unitaries on B, aligned with `kraus`.
    pub corrections: Vec<CMat>,
    /// Outcome weights when the instrument is applied to the pad marginal.
    pub probs: Vec<f64>,
    /// First d Schmidt vectors of the pad, columns, on A and B.
    pub target_basis_a: CMat,
    pub target_basis_b: CMat,
    /// Projector onto the kernel of the pad marginal (absent if full rank).
    pub kernel_projector: Option<CMat>,
    pub decomposition: UniformSubsetDecomposition,
}

impl NielsenInstrument {
    pub fn outcomes(&self) -> usize {
        self.kraus.len()
    }

    /// Uniform rank-d state on span(target_basis_a).
    pub fn target_state_a(&self) -> CMat {
        let mut m = CMat::zeros(self.dim_a, self.dim_a);
        for r in 0..self.d {
            let col = self.target_basis_a.column(r).clone_owned();
            m += linalg::projector(&col);
        }
        m * cr(1.0 / self.d as f64)
    }

    pub fn target_state_b(&self) -> CMat {
        let mut m = CMat::zeros(self.dim_b, self.dim_b);
        for r in 0..self.d {
            let col = self.target_basis_b.column(r).clone_owned();
            m += linalg::projector(&col);
        }
        m * cr(1.0 / self.d as f64)
    }

    /// Canonical maximally entangled pad on the target subspaces.
    pub fn canonical_pad_vector(&self) -> CVec {
        let mut v = CVec::zeros(self.dim_a * self.dim_b);
        let s = cr(1.0 / (self.d as f64).sqrt());
        for r in 0..self.d {
            let a = self.target_basis_a.column(r).clone_owned();
            let b = self.target_basis_b.column(r).clone_owned();
            v += linalg::kron_vec(&a, &b) * s;
        }
        v
    }
}

/// Builds the instrument for a pad and target dimension d from the
/// uniform-subset decomposition of the pad's Schmidt spectrum.
pub fn build_instrument(pad: &BipartitePureState, d: usize) -> Result<NielsenInstrument> {
    let spec = pad.marginal_spectrum();
    if spec.max() > 1.0 / d as f64 + Tolerances::default().major {
        return Err(MinentError::InfeasiblePad { lambda_max: spec.max(), d });
    }
    let (dim_a, dim_b) = (pad.dim_a(), pad.dim_b());
    let sd = pad.schmidt();
    let cut = zero_threshold(dim_a.max(dim_b));
    let support: Vec<usize> = (0..sd.coefficients.len())
        .filter(|&k| sd.coefficients[k] >= cut)
        .collect();
    let lam: Vec<f64> = support.iter().map(|&k| sd.coefficients[k]).collect();
    let lam_sum: f64 = lam.iter().sum();
    let lam_spec = crate::state::Spectrum::new(lam.iter().map(|l| l / lam_sum).collect())
        .expect("support spectrum");
    let dec = uniform_subset_decompose(&lam_spec, d)
        .map_err(|_| MinentError::InfeasiblePad { lambda_max: spec.max(), d })?;

    let target_basis_a = sd.basis_a.columns(0, d).clone_owned();
    let target_basis_b = sd.basis_b.columns(0, d).clone_owned();

    let mut kraus = Vec::with_capacity(dec.terms.len());
    let mut corrections = Vec::with_capacity(dec.terms.len());
    let mut probs = Vec::with_capacity(dec.terms.len());
    for (p, subset) in &dec.terms {
        let mut k_op = CMat::zeros(dim_a, dim_a);
        let mut u_cols: Vec<CVec> = Vec::with_capacity(d);
        for (rank, &k) in subset.iter().enumerate() {
            let lam_k = lam_spec.probs()[k];
            let coef = cr((p / (d as f64 * lam_k)).sqrt());
            let a_src = sd.basis_a.column(support[k]).clone_owned();
            let a_tgt = target_basis_a.column(rank).clone_owned();
            k_op += (a_tgt * a_src.adjoint()) * coef;
            u_cols.push(sd.basis_b.column(support[k]).clone_owned());
        }
        // U_m maps |b_k> (k in subset, ascending) to the canonical target
        // basis on B: U_m = sum_r |b~_r><b_{k_r}| completed to a unitary
        let src_full = complete_basis(&u_cols, dim_b);
        let tgt_cols: Vec<CVec> =
            (0..d).map(|r| target_basis_b.column(r).clone_owned()).collect();
        let tgt_full = complete_basis(&tgt_cols, dim_b);
        let u_m = tgt_full * src_full.adjoint();
        kraus.push(k_op);
        corrections.push(u_m);
        probs.push(*p);
    }

    let kernel_projector = if support.len() < dim_a {
        let mut proj = CMat::identity(dim_a, dim_a);
        for &k in &support {
            let a = sd.basis_a.column(k).clone_owned();
            proj -= linalg::projector(&a);
        }
        Some(proj)
    } else {
        None
    };

    Ok(NielsenInstrument {
        d,
        dim_a,
        dim_b,
        kraus,
        corrections,
        probs,
        target_basis_a,
        target_basis_b,
        kernel_projector,
        decomposition: dec,
    })
}

/// Outcome diagnostics of `apply_instrument`.
#[derive(Debug, Clone)]
pub struct InstrumentOutput {
    pub state: DensityMatrix,
    /// Weight that fell on the kernel branch, if the instrument has one.
    pub kernel_weight: Option<f64>,
}

/// Xi(omega) = sum_i K_i omega K_i^H (x) |i><i|, with the kernel branch (if
/// any) as the last outcome label.
pub fn apply_instrument(inst: &NielsenInstrument, state: &DensityMatrix) -> Result<InstrumentOutput> {
    if state.dim() != inst.dim_a {
        return Err(MinentError::DimensionMismatch(format!(
            "state dim {} != instrument input dim {}",
            state.dim(),
            inst.dim_a
        )));
    }
    let n_branches = inst.outcomes() + usize::from(inst.kernel_projector.is_some());
    let out_dim = inst.dim_a * n_branches;
    let mut out = CMat::zeros(out_dim, out_dim);
    let mut kernel_weight = None;
    let embed = |out: &mut CMat, block: &CMat, i: usize| {
        for r in 0..inst.dim_a {
            for c in 0..inst.dim_a {
                out[(r * n_branches + i, c * n_branches + i)] = block[(r, c)];
            }
        }
    };
    for (i, k) in inst.kraus.iter().enumerate() {
        let block = k * state.entries() * k.adjoint();
        embed(&mut out, &block, i);
    }
    if let Some(proj) = &inst.kernel_projector {
        let block = proj * state.entries() * proj.adjoint();
        kernel_weight = Some(block.trace().re);
        embed(&mut out, &block, n_branches - 1);
    }
    let state = DensityMatrix::new(out, vec![inst.dim_a, n_branches])?;
    Ok(InstrumentOutput { state, kernel_weight })
}

/// Per-invariant deviations of a NielsenInstrument against its pad.
#[derive(Debug, Clone)]
pub struct InstrumentReport {
    /// || sum K_i^H K_i (+ kernel) - I ||_max
    pub completeness_dev: f64,
    /// max_i || K_i Psi_A K_i^H - p_i Phi_A ||_max
    pub branch_dev: f64,
    /// ranks of each K_i (must all be d)
    pub kraus_ranks: Vec<usize>,
    /// || sum (K_i x U_i) |Psi><Psi| (.)^H - |Phi><Phi| ||_max
    pub pad_conversion_dev: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn verify_instrument(inst: &NielsenInstrument, pad: &BipartitePureState) -> InstrumentReport {
    let tol = Tolerances::default().eq;
    let mut completeness = CMat::zeros(inst.dim_a, inst.dim_a);
    for k in &inst.kraus {
        completeness += k.adjoint() * k;
    }
    if let Some(p) = &inst.kernel_projector {
        completeness += p;
    }
    let completeness_dev =
        linalg::max_abs_diff(&completeness, &CMat::identity(inst.dim_a, inst.dim_a));

    let psi_a = pad.marginal_a();
    let phi_a = inst.target_state_a();
    let mut branch_dev = 0.0f64;
    let mut kraus_ranks = Vec::new();
    for (k, &p) in inst.kraus.iter().zip(&inst.probs) {
        let lhs = k * psi_a.entries() * k.adjoint();
        branch_dev = branch_dev.max(linalg::max_abs_diff(&lhs, &(&phi_a * cr(p))));
        let svd = k.clone().svd(false, false);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > smax * 1e-10)
            .count();
        kraus_ranks.push(rank);
    }

    let pad_proj = linalg::projector(pad.amplitudes());
    let mut converted = CMat::zeros(pad_proj.nrows(), pad_proj.ncols());
    for (k, u) in inst.kraus.iter().zip(&inst.corrections) {
        let op = linalg::kron(k, u);
        converted += &op * &pad_proj * op.adjoint();
    }
    let canon = linalg::projector(&inst.canonical_pad_vector());
    let pad_conversion_dev = linalg::max_abs_diff(&converted, &canon);

    let pass = completeness_dev <= tol
        && branch_dev <= tol
        && kraus_ranks.iter().all(|&r| r == inst.d)
        && pad_conversion_dev <= tol;
    InstrumentReport { completeness_dev, branch_dev, kraus_ranks, pad_conversion_dev, tol, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::state::{partial_trace, random_state, RandomKind, Spectrum};

    fn pad_from(spec: &[f64]) -> BipartitePureState {
        BipartitePureState::from_marginal_spectrum(&Spectrum::new(spec.to_vec()).unwrap())
    }

    #[test]
    fn worked_example_probs() {
        let pad = pad_from(&[0.5, 0.25, 0.125, 0.125]);
        let inst = build_instrument(&pad, 2).unwrap();
        assert_eq!(inst.outcomes(), 3);
        let mut probs = inst.probs.clone();
        probs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((probs[0] - 0.5).abs() < 1e-12);
        assert!((probs[1] - 0.25).abs() < 1e-12);
        assert!((probs[2] - 0.25).abs() < 1e-12);
        assert!(verify_instrument(&inst, &pad).pass);
    }

    #[test]
    fn maximally_entangled_single_branch() {
        let pad = BipartitePureState::maximally_entangled(3);
        let inst = build_instrument(&pad, 3).unwrap();
        assert_eq!(inst.outcomes(), 1);
        assert!((inst.probs[0] - 1.0).abs() < 1e-12);
        assert!(verify_instrument(&inst, &pad).pass);
    }

    #[test]
    fn infeasible_pad_rejected() {
        let pad = pad_from(&[0.4, 0.3, 0.3]);
        assert!(matches!(build_instrument(&pad, 3), Err(MinentError::InfeasiblePad { .. })));
    }

    #[test]
    fn apply_on_marginal_gives_product() {
        let pad = pad_from(&[0.5, 0.25, 0.125, 0.125]);
        let inst = build_instrument(&pad, 2).unwrap();
        let out = apply_instrument(&inst, &pad.marginal_a()).unwrap();
        // A (x) C marginals: A part = Phi_A, C part = diag(p)
        let phi_a = inst.target_state_a();
        let a_marg = partial_trace(&out.state, &[0]).unwrap();
        assert!(max_abs_diff(a_marg.entries(), &phi_a) < 1e-10);
        let c_marg = partial_trace(&out.state, &[1]).unwrap();
        for (i, &p) in inst.probs.iter().enumerate() {
            assert!((c_marg.entries()[(i, i)].re - p).abs() < 1e-10);
        }
        // product structure: joint equals Phi_A (x) diag(p)
        let mut diag = CMat::zeros(inst.outcomes(), inst.outcomes());
        for (i, &p) in inst.probs.iter().enumerate() {
            diag[(i, i)] = cr(p);
        }
        let expect = linalg::kron(&phi_a, &diag);
        assert!(max_abs_diff(out.state.entries(), &expect) < 1e-10);
    }

    #[test]
    fn trace_preserved_on_random_inputs() {
        let pad = pad_from(&[0.3, 0.3, 0.2, 0.2]);
        let inst = build_instrument(&pad, 2).unwrap();
        for seed in 0..50u64 {
            let rho = random_state(RandomKind::GinibreMixed, &[4], seed, None).unwrap();
            let out = apply_instrument(&inst, &rho).unwrap();
            assert!((out.state.entries().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn corruption_detected() {
        let pad = pad_from(&[0.5, 0.25, 0.125, 0.125]);
        let mut inst = build_instrument(&pad, 2).unwrap();
        inst.corrections[1] = CMat::identity(inst.dim_b, inst.dim_b);
        let report = verify_instrument(&inst, &pad);
        assert!(!report.pass);
        assert!(report.pad_conversion_dev > 1e-3);
    }

    #[test]
    fn degenerate_d1() {
        let pad = pad_from(&[0.6, 0.4]);
        let inst = build_instrument(&pad, 1).unwrap();
        assert!(verify_instrument(&inst, &pad).pass);
    }

    #[test]
    fn kernel_branch_completes_identity() {
        // rank-2 marginal inside a 3-dimensional A space
        let mut amp = CVec::zeros(9);
        amp[0] = cr(0.5f64.sqrt());
        amp[4] = cr(0.5f64.sqrt());
        let pad = BipartitePureState::new(amp, 3, 3).unwrap();
        let inst = build_instrument(&pad, 2).unwrap();
        assert!(inst.kernel_projector.is_some());
        assert!(verify_instrument(&inst, &pad).pass);
        // inputs outside the support land on the kernel branch
        let outside = DensityMatrix::pure(&linalg::basis_vec(3, 2), vec![3]).unwrap();
        let out = apply_instrument(&inst, &outside).unwrap();
        assert!((out.kernel_weight.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_pads_sound() {
        for seed in 0..20u64 {
            let st = random_state(RandomKind::GinibreMixed, &[5], seed, None).unwrap();
            let spec = st.spectrum();
            let d = 2;
            if spec.max() > 1.0 / d as f64 {
                continue;
            }
            let pad = BipartitePureState::from_marginal_spectrum(&spec);
            let inst = build_instrument(&pad, d).unwrap();
            let report = verify_instrument(&inst, &pad);
            assert!(report.pass, "seed {seed}: {report:?}");
            assert!(inst.outcomes() <= 5 * 6 / 2);
        }
    }
}
