//! Universal randomized maskers built from mutually orthogonal Latin
//! squares: the masking unitary V, secret-encoding channels, the decoder
//! permutation used for private state transfer, and security diagnostics.

use crate::entropy::Alpha;
use crate::error::{MinentError, Result};
use crate::linalg::{self, cr, CMat, CVec, ONE};
use crate::state::{partial_trace, DensityMatrix};

/// A pair of order-d Latin squares whose superposition is a bijection on
/// [d] x [d]. Tables are indexed as g[s][m].
#[derive(Debug, Clone)]
pub struct MolsPair {
    pub d: usize,
    pub g: Vec<Vec<usize>>,
    pub h: Vec<Vec<usize>>,
}

impl MolsPair {
    /// Checks both tables are Latin in both arguments and jointly bijective.
    pub fn validate(&self) -> Result<()> {
        let d = self.d;
        let latin = |t: &Vec<Vec<usize>>, name: &str| -> Result<()> {
            for s in 0..d {
                let mut row = vec![false; d];
                let mut col = vec![false; d];
                for m in 0..d {
                    let rv = t[s][m];
                    let cv = t[m][s];
                    if rv >= d || row[rv] || cv >= d || col[cv] {
                        return Err(MinentError::Malformed(format!(
                            "table {name} is not Latin at index {s}"
                        )));
                    }
                    row[rv] = true;
                    col[cv] = true;
                }
            }
            Ok(())
        };
        latin(&self.g, "g")?;
        latin(&self.h, "h")?;
        let mut seen = vec![false; d * d];
        for s in 0..d {
            for m in 0..d {
                let pair = self.g[s][m] * d + self.h[s][m];
                if seen[pair] {
                    return Err(MinentError::Malformed(
                        "tables are not orthogonal".into(),
                    ));
                }
                seen[pair] = true;
            }
        }
        Ok(())
    }
}

pub fn order_supported(d: usize) -> bool {
    d >= 3 && d % 4 != 2
}

pub fn next_supported_order(d: usize) -> usize {
    let mut n = d + 1;
    while !order_supported(n) {
        n += 1;
    }
    n
}

fn unsupported(d: usize) -> MinentError {
    let next = next_supported_order(d);
    MinentError::UnsupportedOrder {
        d,
        next_supported: next,
        overhead_bits: (next as f64).log2() - (d.max(1) as f64).log2(),
    }
}

// ---- GF(2^k) arithmetic ----

fn gf2_poly_mul(a: u64, b: u64) -> u64 {
    let mut out = 0u64;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            out ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    out
}

fn gf2_poly_deg(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

fn gf2_poly_rem(mut a: u64, m: u64) -> u64 {
    let dm = gf2_poly_deg(m);
    while gf2_poly_deg(a) >= dm {
        a ^= m << (gf2_poly_deg(a) - dm);
    }
    a
}

fn gf2_irreducible(p: u64, k: u32) -> bool {
    // no divisor of degree 1..=k/2
    for deg in 1..=(k / 2) {
        for low in 0..(1u64 << deg) {
            let q = (1u64 << deg) | low;
            if gf2_poly_rem(p, q) == 0 {
                return false;
            }
        }
    }
    true
}

/// Lexicographically smallest irreducible degree-k polynomial over GF(2).
fn smallest_irreducible(k: u32) -> u64 {
    for low in 1..(1u64 << k) {
        let p = (1u64 << k) | low;
        if gf2_irreducible(p, k) {
            return p;
        }
    }
    unreachable!("an irreducible polynomial of degree {k} exists");
}

struct Gf2k {
    k: u32,
    modulus: u64,
}

impl Gf2k {
    fn new(k: u32) -> Self {
        Gf2k { k, modulus: smallest_irreducible(k) }
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        gf2_poly_rem(gf2_poly_mul(a, b), self.modulus)
    }

    fn order_of(&self, a: u64) -> u64 {
        let mut x = a;
        let mut n = 1u64;
        while x != 1 {
            x = self.mul(x, a);
            n += 1;
        }
        n
    }

    /// Smallest primitive element (generator of the multiplicative group).
    fn primitive_element(&self) -> u64 {
        let group = (1u64 << self.k) - 1;
        (2..(1u64 << self.k))
            .find(|&a| self.order_of(a) == group)
            .expect("GF(2^k) has a primitive element")
    }
}

/// Constructs an orthogonal pair of order-d Latin squares.
///
/// Odd d: g = (m+s) mod d, h = (m+2s) mod d. Powers of two >= 4: field
/// tables over GF(2^k) with a fixed primitive element. Other supported
/// orders: component-wise (MacNeish) product of the two.
pub fn build_mols(d: usize) -> Result<MolsPair> {
    if !order_supported(d) {
        return Err(unsupported(d));
    }
    if d % 2 == 1 {
        let g = (0..d)
            .map(|s| (0..d).map(|m| (m + s) % d).collect())
            .collect();
        let h = (0..d)
            .map(|s| (0..d).map(|m| (m + 2 * s) % d).collect())
            .collect();
        return Ok(MolsPair { d, g, h });
    }
    if d.is_power_of_two() {
        let k = d.trailing_zeros();
        let field = Gf2k::new(k);
        let alpha = field.primitive_element();
        let g = (0..d)
            .map(|s| (0..d).map(|m| m ^ s).collect())
            .collect();
        let h = (0..d)
            .map(|s| {
                (0..d)
                    .map(|m| (m as u64 ^ field.mul(alpha, s as u64)) as usize)
                    .collect()
            })
            .collect();
        return Ok(MolsPair { d, g, h });
    }
    // d = odd * 2^k with 2^k >= 4
    let q = 1usize << d.trailing_zeros();
    let o = d / q;
    let left = build_mols(o)?;
    let right = build_mols(q)?;
    let idx = |x1: usize, x2: usize| x1 * q + x2;
    let mut g = vec![vec![0usize; d]; d];
    let mut h = vec![vec![0usize; d]; d];
    for s1 in 0..o {
        for s2 in 0..q {
            for m1 in 0..o {
                for m2 in 0..q {
                    let s = idx(s1, s2);
                    let m = idx(m1, m2);
                    g[s][m] = idx(left.g[s1][m1], right.g[s2][m2]);
                    h[s][m] = idx(left.h[s1][m1], right.h[s2][m2]);
                }
            }
        }
    }
    Ok(MolsPair { d, g, h })
}

/// Randomized masking scheme of order d: permutation unitary
/// V|s,m> = |g(s,m), h(s,m)>, uniform safe state, and its inverse decoder.
#[derive(Debug, Clone)]
pub struct MaskingScheme {
    pub d: usize,
    pub mols: MolsPair,
    /// d^2 x d^2 permutation unitary.
    pub v: CMat,
    /// V^H: undoes the masking on the joint system.
    pub decoder: CMat,
}

impl MaskingScheme {
    pub fn new(d: usize) -> Result<Self> {
        let mols = build_mols(d)?;
        let mut v = CMat::zeros(d * d, d * d);
        for s in 0..d {
            for m in 0..d {
                v[(mols.g[s][m] * d + mols.h[s][m], s * d + m)] = ONE;
            }
        }
        let decoder = v.adjoint();
        Ok(MaskingScheme { d, mols, v, decoder })
    }

    pub fn safe_state(&self) -> DensityMatrix {
        DensityMatrix::maximally_mixed(self.d)
    }
}

/// T(psi) = V(psi (x) I/d)V^H, output factors [d, d].
pub fn mask_state(scheme: &MaskingScheme, psi: &DensityMatrix) -> Result<DensityMatrix> {
    let d = scheme.d;
    if psi.dim() != d {
        return Err(MinentError::DimensionMismatch(format!(
            "secret dim {} != scheme order {d}",
            psi.dim()
        )));
    }
    let joint = psi.tensor(&scheme.safe_state());
    let masked = &scheme.v * joint.entries() * scheme.v.adjoint();
    DensityMatrix::new(masked, vec![d, d])
}

/// Kraus operators of the secret-encoding channel on the pad half:
/// A_{g,k} = sqrt(q_k) (<g| (x) I) V (|psi_k> (x) I).
pub fn secret_encoder(scheme: &MaskingScheme, psi: &DensityMatrix) -> Result<Vec<CMat>> {
    let d = scheme.d;
    if psi.dim() != d {
        return Err(MinentError::DimensionMismatch(format!(
            "secret dim {} != scheme order {d}",
            psi.dim()
        )));
    }
    let (spec, vecs) = psi.eigen();
    let mut kraus = Vec::new();
    for (k, &q) in spec.probs().iter().enumerate() {
        if q <= 0.0 {
            continue;
        }
        let psi_k = vecs.column(k).clone_owned();
        for g in 0..d {
            let mut a = CMat::zeros(d, d);
            for m in 0..d {
                for s in 0..d {
                    if scheme.mols.g[s][m] == g {
                        a[(scheme.mols.h[s][m], m)] += psi_k[s];
                    }
                }
            }
            kraus.push(a * cr(q.sqrt()));
        }
    }
    Ok(kraus)
}

pub fn apply_kraus(kraus: &[CMat], rho: &CMat) -> CMat {
    let mut out = CMat::zeros(kraus[0].nrows(), kraus[0].nrows());
    for a in kraus {
        out += a * rho * a.adjoint();
    }
    out
}

/// Bob's restoring permutation W|h,m> = |s~(h,m), g(s~,m)> where s~ is the
/// unique s with h(s,m) = h. Applied to (encoded half, pad partner) it
/// yields (secret, uniform junk).
pub fn pst_decoder(scheme: &MaskingScheme) -> CMat {
    let d = scheme.d;
    let mut w = CMat::zeros(d * d, d * d);
    for m in 0..d {
        for s in 0..d {
            let hv = scheme.mols.h[s][m];
            let gv = scheme.mols.g[s][m];
            w[(s * d + gv, hv * d + m)] = ONE;
        }
    }
    w
}

/// Mutual informations of the masked output against a reference maximally
/// entangled with the secret input.
#[derive(Debug, Clone)]
pub struct MaskingReport {
    pub d: usize,
    pub i_ra: f64,
    pub i_rb: f64,
    pub i_rab: f64,
    pub tol: f64,
    pub pass: bool,
}

fn von_neumann(state: &DensityMatrix) -> f64 {
    crate::entropy::renyi_entropy(&state.spectrum(), Alpha::Order(1.0)).expect("alpha 1")
}

pub fn masking_diagnostics(scheme: &MaskingScheme) -> Result<MaskingReport> {
    let d = scheme.d;
    // |Phi>_RS (x) I_B/d, then V on (S, B)
    let mut phi = CVec::zeros(d * d);
    for r in 0..d {
        phi[r * d + r] = cr(1.0 / (d as f64).sqrt());
    }
    let ref_secret = DensityMatrix::pure(&phi, vec![d, d])?;
    let joint_in = ref_secret.tensor(&scheme.safe_state());
    let op = linalg::kron(&CMat::identity(d, d), &scheme.v);
    let joint = DensityMatrix::new(
        &op * joint_in.entries() * op.adjoint(),
        vec![d, d, d],
    )?;
    let s = |keep: &[usize]| von_neumann(&partial_trace(&joint, keep).unwrap());
    let (sr, sa, sb) = (s(&[0]), s(&[1]), s(&[2]));
    let (sra, srb, sab) = (s(&[0, 1]), s(&[0, 2]), s(&[1, 2]));
    let srab = von_neumann(&joint);
    let i_ra = sr + sa - sra;
    let i_rb = sr + sb - srb;
    let i_rab = sr + sab - srab;
    let tol = 1e-8;
    let pass = i_ra.abs() <= tol
        && i_rb.abs() <= tol
        && (i_rab - 2.0 * (d as f64).log2()).abs() <= tol;
    Ok(MaskingReport { d, i_ra, i_rb, i_rab, tol, pass })
}

/// A tomographically complete set of secrets for order d: the d^2 states
/// |j>, (|j>+|k>)/sqrt2, (|j>+i|k>)/sqrt2.
pub fn spanning_secrets(d: usize) -> Vec<DensityMatrix> {
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        out.push(DensityMatrix::pure(&linalg::basis_vec(d, j), vec![d]).unwrap());
    }
    let s = cr(1.0 / 2f64.sqrt());
    for j in 0..d {
        for k in (j + 1)..d {
            let mut v = CVec::zeros(d);
            v[j] = s;
            v[k] = s;
            out.push(DensityMatrix::pure(&v, vec![d]).unwrap());
            let mut v = CVec::zeros(d);
            v[j] = s;
            v[k] = s * num_complex::Complex64::new(0.0, 1.0);
            out.push(DensityMatrix::pure(&v, vec![d]).unwrap());
        }
    }
    out
}

/// Catalytic route to masking: dephase with sigma, rotate by the d^2
/// Fourier transform, dephase with a fresh copy of sigma.
#[derive(Debug, Clone)]
pub struct DoubleDephasingOutput {
    pub d: usize,
    pub output: DensityMatrix,
    /// (catalyst, leftover) marginal of each dephasing stage; input-independent.
    pub catalyst_first: DensityMatrix,
    pub catalyst_second: DensityMatrix,
    pub max_dev_uniform: f64,
}

pub fn mask_via_double_dephasing(
    sigma: &DensityMatrix,
    d: usize,
    input: &DensityMatrix,
) -> Result<DoubleDephasingOutput> {
    let plan = crate::dephasing::plan_catalytic_dephasing(sigma, d)?;
    let input = input.with_dims(vec![d * d])?;
    let first = crate::dephasing::run_dephasing(&plan, &input)?;
    let f = linalg::dft_unitary(d * d);
    let rotated = DensityMatrix::new(
        &f * first.system_out.entries() * f.adjoint(),
        vec![d * d],
    )?;
    let second = crate::dephasing::run_dephasing(&plan, &rotated)?;
    let uniform = DensityMatrix::maximally_mixed(d * d);
    let max_dev_uniform =
        linalg::max_abs_diff(second.system_out.entries(), uniform.entries());
    Ok(DoubleDephasingOutput {
        d,
        output: second.system_out,
        catalyst_first: first.catalyst_out,
        catalyst_second: second.catalyst_out,
        max_dev_uniform,
    })
}
