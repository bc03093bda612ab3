//! Density matrices, bipartite pure states and the operations on them that
//! every protocol module builds on: partial trace, Schmidt decomposition,
//! seeded random state generation, trace distance and fidelity.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{zero_threshold, MinentError, Result, Tolerances};
use crate::linalg::{self, cr, CMat, CVec, ONE, ZERO};

/// Descending, non-negative eigenvalue list summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    probs: Vec<f64>,
}

impl Spectrum {
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        Self::validate(&mut probs, &Tolerances::default())?;
        Ok(Spectrum { probs })
    }

    pub fn with_tol(mut probs: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        Self::validate(&mut probs, tol)?;
        Ok(Spectrum { probs })
    }

    fn validate(probs: &mut Vec<f64>, tol: &Tolerances) -> Result<()> {
        if probs.is_empty() {
            return Err(MinentError::InvalidSpectrum("empty spectrum".into()));
        }
        for p in probs.iter_mut() {
            if *p < -tol.psd {
                return Err(MinentError::InvalidSpectrum(format!(
                    "negative entry {p:.3e}"
                )));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol.tr {
            return Err(MinentError::InvalidSpectrum(format!(
                "sum {sum:.12} differs from 1"
            )));
        }
        probs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(())
    }

    pub fn uniform(d: usize) -> Self {
        Spectrum { probs: vec![1.0 / d as f64; d] }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.probs[0]
    }

    /// Rank with the scale-aware zero threshold applied.
    pub fn rank(&self) -> usize {
        let cut = zero_threshold(self.len());
        self.probs.iter().filter(|&&p| p >= cut).count()
    }
}

/// Hermitian, PSD, trace-1 complex matrix together with its tensor factor
/// dimensions.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: CMat,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(entries: CMat, dims: Vec<usize>) -> Result<Self> {
        Self::with_tol(entries, dims, &Tolerances::default())
    }

    pub fn with_tol(entries: CMat, dims: Vec<usize>, tol: &Tolerances) -> Result<Self> {
        let side: usize = dims.iter().product();
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(MinentError::DimensionMismatch(
                "factor dimensions must be positive".into(),
            ));
        }
        if entries.nrows() != side || entries.ncols() != side {
            return Err(MinentError::DimensionMismatch(format!(
                "matrix is {}x{} but product of dims is {side}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let dev = linalg::max_abs_diff(&entries, &entries.adjoint());
        if dev > tol.herm {
            return Err(MinentError::NotHermitian { dev, tol: tol.herm });
        }
        let trace = entries.trace().re;
        if (trace - 1.0).abs() > tol.tr {
            return Err(MinentError::TraceNotOne { trace, tol: tol.tr });
        }
        let (vals, _) = linalg::eigh(&entries);
        let min_eig = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -tol.psd {
            return Err(MinentError::NotPositive { min_eig, tol: tol.psd });
        }
        Ok(DensityMatrix { entries, dims })
    }

    pub fn pure(vec: &CVec, dims: Vec<usize>) -> Result<Self> {
        let nrm = vec.norm();
        if (nrm - 1.0).abs() > Tolerances::default().tr {
            return Err(MinentError::NotUnitNorm { norm: nrm, tol: Tolerances::default().tr });
        }
        Self::new(linalg::projector(vec), dims)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix { entries: CMat::identity(d, d) * cr(1.0 / d as f64), dims: vec![d] }
    }

    pub fn from_diag_probs(probs: &[f64]) -> Result<Self> {
        let n = probs.len();
        let m = CMat::from_diagonal(&CVec::from_iterator(n, probs.iter().map(|&p| cr(p))));
        Self::new(m, vec![n])
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Reinterprets the same matrix with a different factor split.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        if dims.iter().product::<usize>() != self.dim() {
            return Err(MinentError::DimensionMismatch(format!(
                "cannot refactor dim {} as {:?}",
                self.dim(),
                dims
            )));
        }
        Ok(DensityMatrix { entries: self.entries.clone(), dims })
    }

    /// Eigenvalues, descending, with [-tol_psd, 0) clipped to zero and the
    /// spectrum renormalized.
    pub fn spectrum(&self) -> Spectrum {
        let (vals, _) = linalg::eigh(&self.entries);
        let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
        let sum: f64 = clipped.iter().sum();
        Spectrum { probs: clipped.into_iter().map(|v| v / sum).collect() }
    }

    /// Spectral decomposition: (spectrum, eigenvector columns in matching
    /// descending order).
    pub fn eigen(&self) -> (Spectrum, CMat) {
        let (vals, vecs) = linalg::eigh(&self.entries);
        let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
        let sum: f64 = clipped.iter().sum();
        (Spectrum { probs: clipped.into_iter().map(|v| v / sum).collect() }, vecs)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix { entries: linalg::kron(&self.entries, &other.entries), dims }
    }
}

/// Tr over the factors not in `keep`; the result's factor order follows the
/// ascending order of the kept indices.
pub fn partial_trace(state: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let nf = state.dims.len();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(MinentError::DimensionMismatch("keep set must be non-empty".into()));
    }
    for &k in &keep {
        if k >= nf {
            return Err(MinentError::IndexOutOfRange { index: k, nfactors: nf });
        }
    }
    let dims = &state.dims;
    let keep_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced: Vec<usize> = (0..nf).filter(|i| !keep.contains(i)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = keep_dims.iter().product();
    let tr_dim: usize = traced_dims.iter().product();

    // strides of each factor in the full row-major index
    let mut strides = vec![1usize; nf];
    for i in (0..nf - 1).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let unrank = |multi: &mut Vec<usize>, mut idx: usize, fdims: &[usize]| {
        multi.clear();
        for &d in fdims.iter().rev() {
            multi.push(idx % d);
            idx /= d;
        }
        multi.reverse();
    };

    let mut out = CMat::zeros(out_dim, out_dim);
    let mut km = Vec::new();
    let mut km2 = Vec::new();
    let mut tm = Vec::new();
    for r in 0..out_dim {
        unrank(&mut km, r, &keep_dims);
        for c in 0..out_dim {
            unrank(&mut km2, c, &keep_dims);
            let mut acc = ZERO;
            for t in 0..tr_dim {
                unrank(&mut tm, t, &traced_dims);
                let mut row = 0usize;
                let mut col = 0usize;
                for (pos, &f) in keep.iter().enumerate() {
                    row += km[pos] * strides[f];
                    col += km2[pos] * strides[f];
                }
                for (pos, &f) in traced.iter().enumerate() {
                    row += tm[pos] * strides[f];
                    col += tm[pos] * strides[f];
                }
                acc += state.entries[(row, col)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(DensityMatrix { entries: out, dims: keep_dims })
}

/// Schmidt data of a bipartite pure state. `coefficients` are the squared
/// singular values (the marginal spectrum), descending.
#[derive(Debug, Clone)]
pub struct SchmidtData {
    pub coefficients: Vec<f64>,
    pub basis_a: CMat,
    pub basis_b: CMat,
}

#[derive(Debug, Clone)]
pub struct BipartitePureState {
    amplitudes: CVec,
    dim_a: usize,
    dim_b: usize,
    schmidt: SchmidtData,
}

impl BipartitePureState {
    pub fn new(amplitudes: CVec, dim_a: usize, dim_b: usize) -> Result<Self> {
        schmidt_decompose(&amplitudes, dim_a, dim_b)
    }

    /// Canonical pad with a prescribed marginal spectrum:
    /// sum_k sqrt(lambda_k) |k>|k>.
    pub fn from_marginal_spectrum(spec: &Spectrum) -> Self {
        let n = spec.len();
        let mut amp = CVec::zeros(n * n);
        for (k, &l) in spec.probs().iter().enumerate() {
            amp[k * n + k] = cr(l.sqrt());
        }
        schmidt_decompose(&amp, n, n).expect("canonical pad is unit norm")
    }

    /// Canonical maximally entangled state of local dimension d.
    pub fn maximally_entangled(d: usize) -> Self {
        Self::from_marginal_spectrum(&Spectrum::uniform(d))
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn schmidt(&self) -> &SchmidtData {
        &self.schmidt
    }

    pub fn schmidt_rank(&self) -> usize {
        let cut = zero_threshold(self.dim_a.max(self.dim_b));
        self.schmidt.coefficients.iter().filter(|&&c| c >= cut).count()
    }

    /// Marginal spectrum as a Spectrum value.
    pub fn marginal_spectrum(&self) -> Spectrum {
        let mut probs = self.schmidt.coefficients.clone();
        let sum: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= sum;
        }
        Spectrum { probs }
    }

    pub fn marginal_a(&self) -> DensityMatrix {
        let joint = self.density();
        partial_trace(&joint, &[0]).expect("marginal of valid state")
    }

    pub fn marginal_b(&self) -> DensityMatrix {
        let joint = self.density();
        partial_trace(&joint, &[1]).expect("marginal of valid state")
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            entries: linalg::projector(&self.amplitudes),
            dims: vec![self.dim_a, self.dim_b],
        }
    }

    pub fn tensor(&self, other: &BipartitePureState) -> BipartitePureState {
        // (A1 B1) x (A2 B2) reordered to ((A1 A2),(B1 B2))
        let (a1, b1, a2, b2) = (self.dim_a, self.dim_b, other.dim_a, other.dim_b);
        let mut amp = CVec::zeros(a1 * a2 * b1 * b2);
        for i in 0..a1 {
            for j in 0..b1 {
                for k in 0..a2 {
                    for l in 0..b2 {
                        let idx = ((i * a2 + k) * (b1 * b2)) + (j * b2 + l);
                        amp[idx] = self.amplitudes[i * b1 + j] * other.amplitudes[k * b2 + l];
                    }
                }
            }
        }
        schmidt_decompose(&amp, a1 * a2, b1 * b2).expect("tensor of unit vectors")
    }
}

/// Schmidt decomposition of a unit vector on C^{dimA} x C^{dimB}.
///
/// Phase convention: coefficients real non-negative, leading nonzero element
/// of each basis_a column real positive.
pub fn schmidt_decompose(vec: &CVec, dim_a: usize, dim_b: usize) -> Result<BipartitePureState> {
    if vec.len() != dim_a * dim_b {
        return Err(MinentError::DimensionMismatch(format!(
            "vector length {} != {dim_a} * {dim_b}",
            vec.len()
        )));
    }
    let tol = Tolerances::default();
    let nrm = vec.norm();
    if (nrm - 1.0).abs() > tol.tr {
        return Err(MinentError::NotUnitNorm { norm: nrm, tol: tol.tr });
    }
    // reshape: M[i][j] = amplitude of |i>_A |j>_B
    let m = CMat::from_fn(dim_a, dim_b, |i, j| vec[i * dim_b + j]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd with u");
    let vt = svd.v_t.expect("svd with v_t");
    let r = svd.singular_values.len();

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());

    let mut coeffs = Vec::with_capacity(r);
    let mut basis_a = CMat::zeros(dim_a, r);
    let mut basis_b = CMat::zeros(dim_b, r);
    for (c, &k) in order.iter().enumerate() {
        let s = svd.singular_values[k];
        coeffs.push(s * s);
        let mut acol: CVec = u.column(k).clone_owned();
        // b_k is row k of V^H (no extra conjugation: M = U S V^H already
        // expands the vector as sum_k s_k a_k x b_k with (b_k)_j = (V^H)_{kj})
        let mut bcol = CVec::from_iterator(dim_b, (0..dim_b).map(|j| vt[(k, j)]));
        // phase fix on a_k, compensated on b_k
        if let Some(lead) = acol.iter().find(|z| z.norm() > 1e-12) {
            let phase = lead / cr(lead.norm());
            let inv = phase.conj();
            acol *= inv;
            bcol *= phase;
        }
        basis_a.set_column(c, &acol);
        basis_b.set_column(c, &bcol);
    }
    let total: f64 = coeffs.iter().sum();
    debug_assert!((total - 1.0).abs() < 1e-9);
    Ok(BipartitePureState {
        amplitudes: vec.clone(),
        dim_a,
        dim_b,
        schmidt: SchmidtData { coefficients: coeffs, basis_a, basis_b },
    })
}

/// Random state ensembles, deterministic per seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomKind {
    HaarPure,
    GinibreMixed,
    SpectrumFixed,
}

fn ginibre_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    // Box-Muller so only the uniform stream of the seeded RNG is consumed
    let mut gauss = || {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    CMat::from_fn(rows, cols, |_, _| Complex64::new(gauss(), gauss()))
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the standard
/// phase correction.
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = ginibre_matrix(rng, n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / cr(d.norm()) } else { ONE };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

pub fn haar_state_vector(n: usize, rng: &mut ChaCha8Rng) -> CVec {
    let g = ginibre_matrix(rng, n, 1);
    let v: CVec = g.column(0).clone_owned();
    let nrm = v.norm();
    v / cr(nrm)
}

pub fn random_state(
    kind: RandomKind,
    dims: &[usize],
    seed: u64,
    spectrum: Option<&Spectrum>,
) -> Result<DensityMatrix> {
    let n: usize = dims.iter().product();
    if n == 0 {
        return Err(MinentError::DimensionMismatch("empty dims".into()));
    }
    match (kind, spectrum) {
        (RandomKind::SpectrumFixed, None) => {
            return Err(MinentError::InvalidSpectrum(
                "spectrum_fixed requires a spectrum".into(),
            ))
        }
        (RandomKind::SpectrumFixed, Some(s)) if s.len() != n => {
            return Err(MinentError::DimensionMismatch(format!(
                "spectrum length {} != total dimension {n}",
                s.len()
            )))
        }
        (k, Some(_)) if k != RandomKind::SpectrumFixed => {
            return Err(MinentError::InvalidSpectrum(
                "spectrum only valid with spectrum_fixed".into(),
            ))
        }
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = match kind {
        RandomKind::HaarPure => {
            let v = haar_state_vector(n, &mut rng);
            linalg::projector(&v)
        }
        RandomKind::GinibreMixed => {
            let g = ginibre_matrix(&mut rng, n, n);
            let w = &g * g.adjoint();
            let tr = w.trace().re;
            w / cr(tr)
        }
        RandomKind::SpectrumFixed => {
            let s = spectrum.unwrap();
            let u = haar_unitary(n, &mut rng);
            let d = CMat::from_diagonal(&DVector::from_iterator(
                n,
                s.probs().iter().map(|&p| cr(p)),
            ));
            &u * d * u.adjoint()
        }
    };
    DensityMatrix::new(entries, dims.to_vec())
}

/// Half the trace norm of a - b, in [0, 1].
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(MinentError::DimensionMismatch(format!(
            "trace_distance: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let diff = a.entries() - b.entries();
    let (vals, _) = linalg::eigh(&diff);
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2, in [0, 1].
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(MinentError::DimensionMismatch(format!(
            "fidelity: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let sa = linalg::hermitian_map(a.entries(), |x| x.max(0.0).sqrt());
    let inner = &sa * b.entries() * &sa;
    let (vals, _) = linalg::eigh(&inner);
    let root_sum: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vec, kron_vec, max_abs_diff};

    fn bell() -> DensityMatrix {
        let amp = CVec::from_vec(vec![cr(1.0 / 2f64.sqrt()), ZERO, ZERO, cr(1.0 / 2f64.sqrt())]);
        DensityMatrix::new(linalg::projector(&amp), vec![2, 2]).unwrap()
    }

    #[test]
    fn partial_trace_bell_is_maximally_mixed() {
        let r = partial_trace(&bell(), &[0]).unwrap();
        assert!(max_abs_diff(r.entries(), &(CMat::identity(2, 2) * cr(0.5))) < 1e-12);
    }

    #[test]
    fn partial_trace_product_state() {
        let rho = random_state(RandomKind::GinibreMixed, &[3], 11, None).unwrap();
        let sigma = random_state(RandomKind::GinibreMixed, &[2], 12, None).unwrap();
        let joint = rho.tensor(&sigma);
        let back = partial_trace(&joint, &[0]).unwrap();
        assert!(max_abs_diff(back.entries(), rho.entries()) < 1e-12);
    }

    #[test]
    fn partial_trace_matches_summation_oracle() {
        // independent oracle: explicit triple-index summation for keep {0,2}
        let dims = [2usize, 3, 2];
        let st = random_state(RandomKind::GinibreMixed, &dims, 42, None).unwrap();
        let r = partial_trace(&st, &[0, 2]).unwrap();
        assert!((r.entries().trace().re - 1.0).abs() < 1e-12);
        let m = st.entries();
        let mut oracle = CMat::zeros(4, 4);
        for i in 0..2 {
            for k in 0..2 {
                for ip in 0..2 {
                    for kp in 0..2 {
                        let mut acc = ZERO;
                        for j in 0..3 {
                            let row = (i * 3 + j) * 2 + k;
                            let col = (ip * 3 + j) * 2 + kp;
                            acc += m[(row, col)];
                        }
                        oracle[(i * 2 + k, ip * 2 + kp)] = acc;
                    }
                }
            }
        }
        assert!(max_abs_diff(r.entries(), &oracle) < 1e-12);
    }

    #[test]
    fn partial_trace_bad_index() {
        assert!(matches!(
            partial_trace(&bell(), &[5]),
            Err(MinentError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn schmidt_bell_and_product() {
        let amp = CVec::from_vec(vec![cr(1.0 / 2f64.sqrt()), ZERO, ZERO, cr(1.0 / 2f64.sqrt())]);
        let s = schmidt_decompose(&amp, 2, 2).unwrap();
        assert!((s.schmidt().coefficients[0] - 0.5).abs() < 1e-12);
        assert!((s.schmidt().coefficients[1] - 0.5).abs() < 1e-12);

        let prod = kron_vec(&basis_vec(2, 0), &basis_vec(2, 1));
        let s = schmidt_decompose(&prod, 2, 2).unwrap();
        assert!((s.schmidt().coefficients[0] - 1.0).abs() < 1e-12);
        assert!(s.schmidt().coefficients[1].abs() < 1e-12);
    }

    fn schmidt_reconstruct(s: &BipartitePureState) -> CVec {
        let sd = s.schmidt();
        let mut v = CVec::zeros(s.dim_a() * s.dim_b());
        for (k, &l) in sd.coefficients.iter().enumerate() {
            let a = sd.basis_a.column(k).clone_owned();
            let b = sd.basis_b.column(k).clone_owned();
            v += kron_vec(&a, &b) * cr(l.sqrt());
        }
        v
    }

    #[test]
    fn schmidt_reconstruction_random() {
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = haar_state_vector(16, &mut rng);
            let s = schmidt_decompose(&v, 4, 4).unwrap();
            assert!((schmidt_reconstruct(&s) - &v).norm() < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn schmidt_invariant_under_local_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = haar_state_vector(12, &mut rng);
        let s0 = schmidt_decompose(&v, 3, 4).unwrap();
        let ua = haar_unitary(3, &mut rng);
        let ub = haar_unitary(4, &mut rng);
        let full = linalg::kron(&ua, &ub);
        let s1 = schmidt_decompose(&(&full * &v), 3, 4).unwrap();
        for (a, b) in s0.schmidt().coefficients.iter().zip(&s1.schmidt().coefficients) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn schmidt_rejects_non_unit() {
        let v = CVec::from_vec(vec![cr(1.0), cr(1.0), ZERO, ZERO]);
        assert!(matches!(
            schmidt_decompose(&v, 2, 2),
            Err(MinentError::NotUnitNorm { .. })
        ));
    }

    #[test]
    fn random_state_determinism() {
        let a = random_state(RandomKind::GinibreMixed, &[3], 7, None).unwrap();
        let b = random_state(RandomKind::GinibreMixed, &[3], 7, None).unwrap();
        assert_eq!(a.entries(), b.entries());
        let c = random_state(RandomKind::GinibreMixed, &[3], 8, None).unwrap();
        assert!(max_abs_diff(a.entries(), c.entries()) > 1e-3);
    }

    #[test]
    fn random_state_spectrum_fixed_pure() {
        let spec = Spectrum::new(vec![1.0, 0.0]).unwrap();
        let st = random_state(RandomKind::SpectrumFixed, &[2], 5, Some(&spec)).unwrap();
        let s = st.spectrum();
        assert!((s.max() - 1.0).abs() < 1e-10);
        assert_eq!(s.rank(), 1);
    }

    #[test]
    fn random_state_ginibre_valid() {
        let st = random_state(RandomKind::GinibreMixed, &[3], 1, None).unwrap();
        assert!((st.entries().trace().re - 1.0).abs() < 1e-12);
        let s = st.spectrum();
        assert!(s.probs().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn random_state_rejects_bad_spectrum() {
        assert!(Spectrum::new(vec![0.5, -0.2, 0.7]).is_err());
        assert!(Spectrum::new(vec![0.5, 0.6]).is_err());
        assert!(random_state(RandomKind::SpectrumFixed, &[2], 0, None).is_err());
    }

    #[test]
    fn distance_and_fidelity_closed_forms() {
        let rho = random_state(RandomKind::GinibreMixed, &[3], 9, None).unwrap();
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-12);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);

        let z0 = DensityMatrix::pure(&basis_vec(2, 0), vec![2]).unwrap();
        let z1 = DensityMatrix::pure(&basis_vec(2, 1), vec![2]).unwrap();
        assert!((trace_distance(&z0, &z1).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&z0, &z1).unwrap() < 1e-12);

        let plus = DensityMatrix::pure(
            &CVec::from_vec(vec![cr(1.0 / 2f64.sqrt()), cr(1.0 / 2f64.sqrt())]),
            vec![2],
        )
        .unwrap();
        // 2x2 closed forms: distance 1/sqrt 2, fidelity 1/2
        assert!((trace_distance(&z0, &plus).unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((fidelity(&z0, &plus).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn trace_distance_triangle_inequality() {
        for seed in 0..10u64 {
            let a = random_state(RandomKind::GinibreMixed, &[3], 3 * seed, None).unwrap();
            let b = random_state(RandomKind::GinibreMixed, &[3], 3 * seed + 1, None).unwrap();
            let c = random_state(RandomKind::GinibreMixed, &[3], 3 * seed + 2, None).unwrap();
            let ab = trace_distance(&a, &b).unwrap();
            let bc = trace_distance(&b, &c).unwrap();
            let ac = trace_distance(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-10);
        }
    }

    #[test]
    fn constructor_rejects_invalid() {
        let m = CMat::from_row_slice(2, 2, &[cr(0.5), cr(0.3), cr(0.1), cr(0.5)]);
        assert!(matches!(DensityMatrix::new(m, vec![2]), Err(MinentError::NotHermitian { .. })));
        let m = CMat::identity(2, 2);
        assert!(matches!(DensityMatrix::new(m, vec![2]), Err(MinentError::TraceNotOne { .. })));
        let m = CMat::from_row_slice(2, 2, &[cr(1.5), ZERO, ZERO, cr(-0.5)]);
        assert!(matches!(DensityMatrix::new(m, vec![2]), Err(MinentError::NotPositive { .. })));
        let m = CMat::identity(2, 2) * cr(0.5);
        assert!(DensityMatrix::new(m, vec![3]).is_err());
    }
}
