//! One-shot private state transfer over a bipartite pure pad: planning,
//! encoding (instrument + masking encoder), recovery and security checks.

use serde::Serialize;

use crate::entropy::pst_power;
use crate::error::{MinentError, Result, Tolerances};
use crate::instrument::{build_instrument, NielsenInstrument};
use crate::linalg::{self, cr, CMat, CVec};
use crate::masking::{pst_decoder, secret_encoder, MaskingScheme};
use crate::state::{
    fidelity, haar_state_vector, partial_trace, trace_distance, BipartitePureState,
    DensityMatrix,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Memory caps for the full joint simulation.
const MAX_PAD_RANK: usize = 32;
const MAX_SECRET_DIM: usize = 9;
const MAX_JOINT_DIM: usize = 4096;

#[derive(Debug, Clone)]
pub struct PstProtocol {
    pub pad: BipartitePureState,
    pub d: usize,
    pub instrument: NielsenInstrument,
    pub scheme: MaskingScheme,
    /// Bob's d^2-dimensional restoring permutation W.
    pub decoder: CMat,
}

impl PstProtocol {
    /// Number of entries of the outcome register C.
    pub fn outcomes(&self) -> usize {
        self.instrument.outcomes()
    }

    pub fn recovery_description(&self) -> String {
        format!(
            "apply U_i on B conditioned on C (i = 0..{m}), discard C, rotate B \
             into the canonical pad basis, apply the {d}^2-dimensional decoder \
             W to (A,B), trace out the junk register",
            m = self.outcomes(),
            d = self.d,
        )
    }
}

pub fn plan_pst(pad: &BipartitePureState, d: usize) -> Result<PstProtocol> {
    let lambda_max = pad.marginal_spectrum().max();
    if lambda_max > 1.0 / d as f64 + Tolerances::default().major {
        return Err(MinentError::InfeasiblePad { lambda_max, d });
    }
    if pad.schmidt_rank() > MAX_PAD_RANK || d > MAX_SECRET_DIM {
        return Err(MinentError::TooLarge(format!(
            "pad rank {} / secret dimension {d} beyond simulation caps ({MAX_PAD_RANK}, {MAX_SECRET_DIM})",
            pad.schmidt_rank()
        )));
    }
    let scheme = MaskingScheme::new(d)?;
    let instrument = build_instrument(pad, d)?;
    let joint = d * instrument.outcomes() * pad.dim_b();
    if joint > MAX_JOINT_DIM {
        return Err(MinentError::TooLarge(format!(
            "joint dimension {joint} exceeds cap {MAX_JOINT_DIM}"
        )));
    }
    let decoder = pst_decoder(&scheme);
    Ok(PstProtocol { pad: pad.clone(), d, instrument, scheme, decoder })
}

/// Everything Alice sends plus what Bob retains, as one density matrix on
/// (transmitted T, outcome register C, Bob's pad half B).
#[derive(Debug, Clone)]
pub struct PstEncoding {
    /// Marginal on (T, C): the eavesdropper's view.
    pub transmitted: DensityMatrix,
    /// Full state on (T, C, B).
    pub joint: DensityMatrix,
}

pub fn pst_encode(proto: &PstProtocol, psi: &DensityMatrix) -> Result<PstEncoding> {
    let d = proto.d;
    if psi.dim() != d {
        return Err(MinentError::DimensionMismatch(format!(
            "secret dim {} != protocol dimension {d}",
            psi.dim()
        )));
    }
    let (dim_a, dim_b) = (proto.pad.dim_a(), proto.pad.dim_b());
    let m = proto.outcomes();
    // pad amplitudes as a dim_a x dim_b matrix
    let mut pad_m = CMat::zeros(dim_a, dim_b);
    for a in 0..dim_a {
        for b in 0..dim_b {
            pad_m[(a, b)] = proto.pad.amplitudes()[a * dim_b + b];
        }
    }
    let compress_a = proto.instrument.target_basis_a.adjoint(); // d x dim_a
    let encoder = secret_encoder(&proto.scheme, psi)?;
    let joint_dim = d * m * dim_b;
    let mut joint = CMat::zeros(joint_dim, joint_dim);
    for (i, k) in proto.instrument.kraus.iter().enumerate() {
        // branch amplitude matrix on (compressed A, B)
        let branch = &compress_a * k * &pad_m; // d x dim_b
        for a in &encoder {
            let n = a * &branch; // rows: transmitted h-register
            let mut v = CVec::zeros(joint_dim);
            for h in 0..d {
                for b in 0..dim_b {
                    v[(h * m + i) * dim_b + b] = n[(h, b)];
                }
            }
            joint += linalg::projector(&v);
        }
    }
    let joint = DensityMatrix::new(joint, vec![d, m, dim_b])?;
    let transmitted = partial_trace(&joint, &[0, 1])?;
    Ok(PstEncoding { transmitted, joint })
}

pub fn pst_recover(proto: &PstProtocol, joint: &DensityMatrix) -> Result<DensityMatrix> {
    let decoded = recover_internal(proto, joint, true)?;
    partial_trace(&decoded, &[0])
}

/// Like `pst_recover` but keeps the uniform junk register: output factors
/// are (secret, junk).
pub fn pst_recover_retaining_junk(
    proto: &PstProtocol,
    joint: &DensityMatrix,
) -> Result<DensityMatrix> {
    recover_internal(proto, joint, true)
}

/// Recovery with the conditioned corrections disabled (ablation hook).
pub fn pst_recover_uncorrected(
    proto: &PstProtocol,
    joint: &DensityMatrix,
) -> Result<DensityMatrix> {
    let decoded = recover_internal(proto, joint, false)?;
    partial_trace(&decoded, &[0])
}

fn recover_internal(
    proto: &PstProtocol,
    joint: &DensityMatrix,
    use_corrections: bool,
) -> Result<DensityMatrix> {
    let d = proto.d;
    let m = proto.outcomes();
    let dim_b = proto.pad.dim_b();
    if joint.dims() != [d, m, dim_b] {
        return Err(MinentError::Malformed(format!(
            "joint dims {:?} do not match protocol layout [{d}, {m}, {dim_b}]",
            joint.dims()
        )));
    }
    // controlled correction on B by C
    let mut corr = CMat::zeros(d * m * dim_b, d * m * dim_b);
    for i in 0..m {
        let u = if use_corrections {
            proto.instrument.corrections[i].clone()
        } else {
            CMat::identity(dim_b, dim_b)
        };
        for h in 0..d {
            for (r, c) in (0..dim_b).flat_map(|r| (0..dim_b).map(move |c| (r, c))) {
                corr[((h * m + i) * dim_b + r, (h * m + i) * dim_b + c)] = u[(r, c)];
            }
        }
    }
    let corrected = &corr * joint.entries() * corr.adjoint();
    let corrected = DensityMatrix::new(corrected, vec![d, m, dim_b])?;
    let tb = partial_trace(&corrected, &[0, 2])?; // (T, B)
    // rotate B into the canonical pad basis, then decode
    let compress_b = proto.instrument.target_basis_b.adjoint(); // d x dim_b
    let op = &proto.decoder * linalg::kron(&CMat::identity(d, d), &compress_b);
    let decoded = &op * tb.entries() * op.adjoint();
    // compression drops nothing when the corrections are on; renormalize to
    // keep the ablated branch comparable
    let tr = decoded.trace().re;
    DensityMatrix::new(decoded / cr(tr), vec![d, d])
}

#[derive(Debug, Clone, Serialize)]
pub struct PstReport {
    pub pass: bool,
    pub max_eaves_distance: f64,
    pub min_fidelity: f64,
    pub pst_power_bits: f64,
    pub outcome_count: usize,
    pub n_secrets: usize,
}

pub fn verify_pst(proto: &PstProtocol, n_secrets: usize, seed: u64) -> Result<PstReport> {
    if n_secrets < 2 {
        return Err(MinentError::Malformed("need at least two secrets".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transmitted = Vec::with_capacity(n_secrets);
    let mut min_fidelity = f64::INFINITY;
    for _ in 0..n_secrets {
        let psi =
            DensityMatrix::pure(&haar_state_vector(proto.d, &mut rng), vec![proto.d])?;
        let enc = pst_encode(proto, &psi)?;
        let rec = pst_recover(proto, &enc.joint)?;
        min_fidelity = min_fidelity.min(fidelity(&rec, &psi)?);
        transmitted.push(enc.transmitted);
    }
    let mut max_eaves_distance = 0.0f64;
    for i in 0..transmitted.len() {
        for j in (i + 1)..transmitted.len() {
            max_eaves_distance =
                max_eaves_distance.max(trace_distance(&transmitted[i], &transmitted[j])?);
        }
    }
    let pass = max_eaves_distance <= 1e-9 && min_fidelity >= 1.0 - 1e-9;
    Ok(PstReport {
        pass,
        max_eaves_distance,
        min_fidelity,
        pst_power_bits: pst_power(&proto.pad),
        outcome_count: proto.outcomes(),
        n_secrets,
    })
}
