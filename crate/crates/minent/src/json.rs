//! JSON interchange for matrices, vectors, spectra and the composite
//! objects (instruments, schemes, protocols, plans). Round-trips are
//! bit-exact for doubles: serde_json preserves f64 via shortest-roundtrip
//! formatting.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dephasing::DephasingPlan;
use crate::entropy::UniformSubsetDecomposition;
use crate::error::{MinentError, Result};
use crate::instrument::NielsenInstrument;
use crate::linalg::{CMat, CVec};
use crate::masking::{MaskingScheme, MolsPair};
use crate::pst::PstProtocol;
use crate::state::{BipartitePureState, DensityMatrix, Spectrum};
use crate::transition::TransitionPlan;

/// Row-major matrix with split real and imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_mat(m: &CMat) -> Self {
        MatrixJson {
            dims: vec![m.nrows(), m.ncols()],
            re: (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| m[(r, c)].re).collect())
                .collect(),
            im: (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| m[(r, c)].im).collect())
                .collect(),
        }
    }

    pub fn from_state(s: &DensityMatrix) -> Self {
        let mut j = Self::from_mat(s.entries());
        j.dims = s.dims().to_vec();
        j
    }

    pub fn to_mat(&self) -> Result<CMat> {
        let n = self.re.len();
        let cols = self.re.first().map(|r| r.len()).unwrap_or(0);
        if self.im.len() != n
            || self.re.iter().any(|r| r.len() != cols)
            || self.im.iter().any(|r| r.len() != cols)
        {
            return Err(MinentError::Malformed("ragged matrix rows".into()));
        }
        let mut m = CMat::zeros(n, cols);
        for r in 0..n {
            for c in 0..cols {
                m[(r, c)] = Complex64::new(self.re[r][c], self.im[r][c]);
            }
        }
        Ok(m)
    }

    /// Square matrices with tensor-factor dims reinterpret as states.
    pub fn to_state(&self) -> Result<DensityMatrix> {
        let m = self.to_mat()?;
        let total: usize = self.dims.iter().product();
        if m.nrows() != m.ncols() || m.nrows() != total {
            return Err(MinentError::Malformed(format!(
                "dims {:?} do not match a {}x{} matrix",
                self.dims,
                m.nrows(),
                m.ncols()
            )));
        }
        DensityMatrix::new(m, self.dims.clone())
    }
}

/// Complex vector with split amplitude parts.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VectorJson {
    pub dims: Vec<usize>,
    pub amp_re: Vec<f64>,
    pub amp_im: Vec<f64>,
}

impl VectorJson {
    pub fn from_vec(v: &CVec, dims: Vec<usize>) -> Self {
        VectorJson {
            dims,
            amp_re: v.iter().map(|z| z.re).collect(),
            amp_im: v.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_vec(&self) -> Result<CVec> {
        if self.amp_re.len() != self.amp_im.len() {
            return Err(MinentError::Malformed("amp_re/amp_im length mismatch".into()));
        }
        Ok(CVec::from_iterator(
            self.amp_re.len(),
            self.amp_re
                .iter()
                .zip(&self.amp_im)
                .map(|(&r, &i)| Complex64::new(r, i)),
        ))
    }

    pub fn to_pad(&self) -> Result<BipartitePureState> {
        if self.dims.len() != 2 {
            return Err(MinentError::Malformed(
                "pad vector needs exactly two dims".into(),
            ));
        }
        BipartitePureState::new(self.to_vec()?, self.dims[0], self.dims[1])
    }
}

/// Spectra travel as plain JSON arrays of decimals.
pub fn spectrum_to_json(s: &Spectrum) -> serde_json::Value {
    serde_json::json!(s.probs())
}

pub fn spectrum_from_json(v: &serde_json::Value) -> Result<Spectrum> {
    let arr: Vec<f64> = serde_json::from_value(v.clone())
        .map_err(|e| MinentError::Malformed(format!("spectrum: {e}")))?;
    Spectrum::new(arr)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionTermJson {
    pub p: f64,
    pub subset: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub d: usize,
    pub terms: Vec<DecompositionTermJson>,
}

impl DecompositionJson {
    pub fn from_decomposition(d: &UniformSubsetDecomposition) -> Self {
        DecompositionJson {
            d: d.d,
            terms: d
                .terms
                .iter()
                .map(|(p, subset)| DecompositionTermJson { p: *p, subset: subset.clone() })
                .collect(),
        }
    }

    pub fn to_decomposition(&self) -> UniformSubsetDecomposition {
        UniformSubsetDecomposition {
            d: self.d,
            terms: self.terms.iter().map(|t| (t.p, t.subset.clone())).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstrumentJson {
    pub d: usize,
    pub kraus: Vec<MatrixJson>,
    pub corrections: Vec<MatrixJson>,
    pub probs: Vec<f64>,
    pub decomposition: DecompositionJson,
}

impl InstrumentJson {
    pub fn from_instrument(i: &NielsenInstrument) -> Self {
        InstrumentJson {
            d: i.d,
            kraus: i.kraus.iter().map(MatrixJson::from_mat).collect(),
            corrections: i.corrections.iter().map(MatrixJson::from_mat).collect(),
            probs: i.probs.clone(),
            decomposition: DecompositionJson::from_decomposition(&i.decomposition),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeJson {
    pub d: usize,
    pub g: Vec<Vec<usize>>,
    pub h: Vec<Vec<usize>>,
    pub v: MatrixJson,
    pub decoder: MatrixJson,
}

impl SchemeJson {
    pub fn from_scheme(s: &MaskingScheme) -> Self {
        SchemeJson {
            d: s.d,
            g: s.mols.g.clone(),
            h: s.mols.h.clone(),
            v: MatrixJson::from_mat(&s.v),
            decoder: MatrixJson::from_mat(&s.decoder),
        }
    }

    pub fn mols(&self) -> MolsPair {
        MolsPair { d: self.d, g: self.g.clone(), h: self.h.clone() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolJson {
    pub d: usize,
    pub pad: VectorJson,
    pub instrument: InstrumentJson,
    pub scheme: SchemeJson,
    pub decoder: MatrixJson,
    pub recovery: String,
}

impl ProtocolJson {
    pub fn from_protocol(p: &PstProtocol) -> Self {
        ProtocolJson {
            d: p.d,
            pad: VectorJson::from_vec(
                p.pad.amplitudes(),
                vec![p.pad.dim_a(), p.pad.dim_b()],
            ),
            instrument: InstrumentJson::from_instrument(&p.instrument),
            scheme: SchemeJson::from_scheme(&p.scheme),
            decoder: MatrixJson::from_mat(&p.decoder),
            recovery: p.recovery_description(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DephasingPlanJson {
    pub d: usize,
    pub precatalyst: MatrixJson,
    pub instrument: InstrumentJson,
    pub embed_isometry: MatrixJson,
    pub dephase_unitary: MatrixJson,
    pub probs: Vec<f64>,
}

impl DephasingPlanJson {
    pub fn from_plan(p: &DephasingPlan) -> Self {
        DephasingPlanJson {
            d: p.d,
            precatalyst: MatrixJson::from_state(&p.precatalyst),
            instrument: InstrumentJson::from_instrument(&p.instrument),
            embed_isometry: MatrixJson::from_mat(&p.embed_isometry),
            dephase_unitary: MatrixJson::from_mat(&p.dephase.dense()),
            probs: p.probs.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionPlanJson {
    pub source: MatrixJson,
    pub target: MatrixJson,
    pub u1: MatrixJson,
    pub u2: MatrixJson,
    pub sufficient_bits: f64,
    pub floor_bits: f64,
    pub embedded_dim: usize,
    pub dephasing: DephasingPlanJson,
}

impl TransitionPlanJson {
    pub fn from_plan(p: &TransitionPlan) -> Self {
        TransitionPlanJson {
            source: MatrixJson::from_state(&p.source),
            target: MatrixJson::from_state(&p.target),
            u1: MatrixJson::from_mat(&p.u1),
            u2: MatrixJson::from_mat(&p.u2),
            sufficient_bits: p.requirement.sufficient_bits,
            floor_bits: p.requirement.floor_bits,
            embedded_dim: p.requirement.embedded_dim,
            dephasing: DephasingPlanJson::from_plan(&p.dephasing),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::state::{random_state, RandomKind};

    #[test]
    fn matrix_roundtrip_bit_exact() {
        let s = random_state(RandomKind::GinibreMixed, &[2, 3], 5, None).unwrap();
        let j = MatrixJson::from_state(&s);
        let text = serde_json::to_string(&j).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(j, back);
        let s2 = back.to_state().unwrap();
        assert_eq!(s.dims(), s2.dims());
        assert!(max_abs_diff(s.entries(), s2.entries()) == 0.0);
    }

    #[test]
    fn vector_roundtrip() {
        let pad = BipartitePureState::from_marginal_spectrum(
            &Spectrum::new(vec![0.25, 0.25, 0.25, 0.125, 0.125]).unwrap(),
        );
        let j = VectorJson::from_vec(pad.amplitudes(), vec![5, 5]);
        let text = serde_json::to_string(&j).unwrap();
        let back: VectorJson = serde_json::from_str(&text).unwrap();
        let pad2 = back.to_pad().unwrap();
        assert_eq!(pad.amplitudes(), pad2.amplitudes());
    }

    #[test]
    fn spectrum_and_decomposition_shapes() {
        let s = Spectrum::new(vec![0.5, 0.25, 0.125, 0.125]).unwrap();
        let v = spectrum_to_json(&s);
        assert!(v.is_array());
        let s2 = spectrum_from_json(&v).unwrap();
        assert_eq!(s.probs(), s2.probs());
        let dec = crate::entropy::uniform_subset_decompose(&s, 2).unwrap();
        let j = DecompositionJson::from_decomposition(&dec);
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"terms\"") && text.contains("\"subset\""));
        let back: DecompositionJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_decomposition().terms, dec.terms);
    }

    #[test]
    fn protocol_document_single_json() {
        let pad = BipartitePureState::from_marginal_spectrum(
            &Spectrum::new(vec![0.25, 0.25, 0.25, 0.125, 0.125]).unwrap(),
        );
        let proto = crate::pst::plan_pst(&pad, 3).unwrap();
        let doc = ProtocolJson::from_protocol(&proto);
        let text = serde_json::to_string_pretty(&doc).unwrap();
        let back: ProtocolJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.d, 3);
        assert_eq!(back.instrument.probs, proto.instrument.probs);
        assert_eq!(back.scheme.mols().g, proto.scheme.mols.g);
    }

    #[test]
    fn malformed_matrix_rejected() {
        let j = MatrixJson { dims: vec![2], re: vec![vec![1.0], vec![0.0, 0.0]], im: vec![vec![0.0], vec![0.0]] };
        assert!(j.to_mat().is_err());
        let j = MatrixJson {
            dims: vec![3],
            re: vec![vec![1.0, 0.0], vec![0.0, 0.0]],
            im: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        };
        assert!(j.to_state().is_err());
    }

    #[test]
    fn transition_plan_serializes() {
        let source = random_state(
            RandomKind::SpectrumFixed,
            &[4],
            7,
            Some(&Spectrum::new(vec![0.5, 0.3, 0.1, 0.1]).unwrap()),
        )
        .unwrap();
        let target = random_state(
            RandomKind::SpectrumFixed,
            &[4],
            8,
            Some(&Spectrum::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap()),
        )
        .unwrap();
        let sigma = DensityMatrix::maximally_mixed(2);
        let plan = crate::transition::plan_transition(&source, &target, &sigma).unwrap();
        let doc = TransitionPlanJson::from_plan(&plan);
        let text = serde_json::to_string(&doc).unwrap();
        let back: TransitionPlanJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.embedded_dim, 4);
        assert!(max_abs_diff(&back.u1.to_mat().unwrap(), &plan.u1) == 0.0);
    }
}
