//! Renyi entropies, majorization tests, the uniform-subset convex
//! decomposition behind the Nielsen step, and Schur-Horn diagonal synthesis.

use crate::error::{zero_threshold, MinentError, Result, Tolerances};
use crate::linalg::{cr, CMat};
use crate::state::{BipartitePureState, DensityMatrix, Spectrum};

/// Renyi order. `Infinity` is the min-entropy limit, `Order(0.0)` the
/// max-entropy (log rank) limit, `Order(1.0)` the von Neumann entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Order(f64),
    Infinity,
}

impl Alpha {
    pub fn parse(s: &str) -> Result<Alpha> {
        match s {
            "inf" | "infinity" | "min" => Ok(Alpha::Infinity),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| MinentError::Malformed(format!("bad alpha '{other}'")))?;
                Ok(Alpha::Order(v))
            }
        }
    }
}

/// Renyi entropy of a spectrum, in bits.
pub fn renyi_entropy(spec: &Spectrum, alpha: Alpha) -> Result<f64> {
    let probs = spec.probs();
    match alpha {
        Alpha::Infinity => Ok(-spec.max().log2()),
        Alpha::Order(a) if a < 0.0 => Err(MinentError::NegativeAlpha(a)),
        Alpha::Order(a) if a == 0.0 => Ok((spec.rank() as f64).log2()),
        Alpha::Order(a) if a == 1.0 => {
            let cut = zero_threshold(probs.len());
            Ok(-probs
                .iter()
                .filter(|&&p| p >= cut)
                .map(|&p| p * p.log2())
                .sum::<f64>())
        }
        Alpha::Order(a) => {
            let s: f64 = probs.iter().map(|&p| p.powf(a)).sum();
            Ok(s.log2() / (1.0 - a))
        }
    }
}

pub fn renyi_entropy_state(state: &DensityMatrix, alpha: Alpha) -> Result<f64> {
    renyi_entropy(&state.spectrum(), alpha)
}

/// Min-entropy -log2 lambda_max, in bits.
pub fn min_entropy(state: &DensityMatrix) -> f64 {
    -state.spectrum().max().log2()
}

/// True iff y is majorized by x (y < x): every partial sum of descending y
/// stays within `tol_major` below the matching partial sum of x.
pub fn majorizes(x: &Spectrum, y: &Spectrum) -> bool {
    majorizes_with_tol(x, y, Tolerances::default().major)
}

pub fn majorizes_with_tol(x: &Spectrum, y: &Spectrum, tol: f64) -> bool {
    let n = x.len().max(y.len());
    let get = |s: &Spectrum, i: usize| s.probs().get(i).copied().unwrap_or(0.0);
    let mut sx = 0.0;
    let mut sy = 0.0;
    for i in 0..n {
        sx += get(x, i);
        sy += get(y, i);
        if sy > sx + tol {
            return false;
        }
    }
    true
}

/// Convex decomposition of a spectrum into uniform distributions over
/// d-element index subsets: lambda = sum_m (p_m / d) * indicator(S_m).
#[derive(Debug, Clone)]
pub struct UniformSubsetDecomposition {
    pub d: usize,
    pub terms: Vec<(f64, Vec<usize>)>,
}

impl UniformSubsetDecomposition {
    /// Reconstruction sum_m (p_m/d) 1_{S_m}, indexed like the source
    /// spectrum.
    pub fn reconstruct(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (p, subset) in &self.terms {
            for &k in subset {
                out[k] += p / self.d as f64;
            }
        }
        out
    }
}

/// Greedy uniform-subset decomposition. Requires lambda_max <= 1/d (within
/// the majorization tolerance); maintains the invariant that the residual
/// maximum never exceeds (residual mass)/d, so every extracted weight is
/// positive and the loop terminates in at most n(n+1)/2 steps.
pub fn uniform_subset_decompose(
    lambda: &Spectrum,
    d: usize,
) -> Result<UniformSubsetDecomposition> {
    let tol = Tolerances::default();
    if d == 0 {
        return Err(MinentError::DimensionMismatch("d must be positive".into()));
    }
    if lambda.max() > 1.0 / d as f64 + tol.major {
        return Err(MinentError::InfeasibleSpectrum { lambda_max: lambda.max(), d });
    }
    let n = lambda.len();
    if n < d {
        // sum 1 over fewer than d entries forces lambda_max > 1/d
        return Err(MinentError::InfeasibleSpectrum { lambda_max: lambda.max(), d });
    }
    let mut residual: Vec<f64> = lambda.probs().to_vec();
    let mut mass: f64 = residual.iter().sum();
    let mut terms: Vec<(f64, Vec<usize>)> = Vec::new();
    let stop = 1e-13;
    let max_terms = n * (n + 1) / 2;
    while mass > stop {
        // d largest residual entries, ties broken by index
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            residual[j].partial_cmp(&residual[i]).unwrap().then(i.cmp(&j))
        });
        let mut subset: Vec<usize> = order[..d].to_vec();
        subset.sort_unstable();
        let r_d = order[..d].iter().map(|&i| residual[i]).fold(f64::INFINITY, f64::min);
        let r_next = order.get(d).map(|&i| residual[i]);
        let mut p = (d as f64 * r_d).min(mass);
        if let Some(r) = r_next {
            p = p.min(mass - d as f64 * r);
        }
        if p <= 0.0 {
            // numerically stalled; only possible when mass is already noise
            break;
        }
        for &k in &subset {
            residual[k] = (residual[k] - p / d as f64).max(0.0);
        }
        mass -= p;
        terms.push((p, subset));
        if terms.len() > max_terms {
            return Err(MinentError::InvalidSpectrum(
                "uniform subset decomposition failed to terminate".into(),
            ));
        }
    }
    // fold numerical leftovers into the weights so they sum to exactly 1
    let total: f64 = terms.iter().map(|(p, _)| p).sum();
    for (p, _) in &mut terms {
        *p /= total;
    }
    Ok(UniformSubsetDecomposition { d, terms })
}

/// Unitary U with diag(U diag(spectrum) U^H) = target, built from two-level
/// rotations (plus permutations). Requires target < spectrum.
pub fn schur_horn_unitary(spectrum: &Spectrum, target: &[f64]) -> Result<CMat> {
    let n = spectrum.len();
    if target.len() != n {
        return Err(MinentError::DimensionMismatch(format!(
            "target length {} != spectrum length {n}",
            target.len()
        )));
    }
    let tspec = Spectrum::new(target.to_vec()).map_err(|_| MinentError::InvalidSpectrum(
        "target diagonal is not a probability vector".into(),
    ))?;
    check_majorized(spectrum, &tspec)?;

    // sorted-target frame: fix targets in descending order, then permute
    let mut torder: Vec<usize> = (0..n).collect();
    torder.sort_by(|&i, &j| target[j].partial_cmp(&target[i]).unwrap());

    let mut u = CMat::identity(n, n);
    // active positions hold current diagonal values; the active-active
    // block stays diagonal throughout (each rotation retires one index)
    let mut value: Vec<f64> = spectrum.probs().to_vec();
    let mut active: Vec<usize> = (0..n).collect();
    // fixed_at[slot k] = position holding target value t_k
    let mut fixed_at: Vec<usize> = vec![0; n];

    for (k, &tpos) in torder.iter().enumerate() {
        let t = target[tpos];
        if active.len() == 1 {
            fixed_at[k] = active[0];
            active.clear();
            break;
        }
        // bracketing pair: smallest active value >= t, largest <= t
        let mut hi: Option<usize> = None;
        let mut lo: Option<usize> = None;
        for &pos in &active {
            let v = value[pos];
            if v >= t - 1e-12 && hi.map_or(true, |h| v < value[h]) {
                hi = Some(pos);
            }
            if v <= t + 1e-12 && lo.map_or(true, |l| v > value[l]) {
                lo = Some(pos);
            }
        }
        let (i, j) = match (hi, lo) {
            (Some(i), Some(j)) => (i, j),
            _ => {
                return Err(MinentError::InvalidSpectrum(
                    "Schur-Horn synthesis lost the majorization bracket".into(),
                ))
            }
        };
        if i == j || (value[i] - value[j]).abs() < 1e-15 {
            fixed_at[k] = i;
            active.retain(|&p| p != i);
            continue;
        }
        let (a, b) = (value[i], value[j]);
        let c2 = ((t - b) / (a - b)).clamp(0.0, 1.0);
        let c = c2.sqrt();
        let s = (1.0 - c2).sqrt();
        // G row mix: row i <- c row_i + s row_j ; row j <- -s row_i + c row_j
        let ri = u.row(i).clone_owned();
        let rj = u.row(j).clone_owned();
        u.set_row(i, &(ri.clone() * cr(c) + rj.clone() * cr(s)));
        u.set_row(j, &(ri * cr(-s) + rj * cr(c)));
        value[i] = t;
        value[j] = a + b - t;
        fixed_at[k] = i;
        active.retain(|&p| p != i);
    }

    // permute so position torder[k] ends up with the value fixed at
    // fixed_at[k]
    let mut perm = CMat::zeros(n, n);
    for k in 0..n {
        perm[(torder[k], fixed_at[k])] = cr(1.0);
    }
    Ok(perm * u)
}

fn check_majorized(spectrum: &Spectrum, target: &Spectrum) -> Result<()> {
    let tol = Tolerances::default().major;
    let n = spectrum.len().max(target.len());
    let get = |s: &Spectrum, i: usize| s.probs().get(i).copied().unwrap_or(0.0);
    let mut sx = 0.0;
    let mut sy = 0.0;
    for i in 0..n {
        sx += get(spectrum, i);
        sy += get(target, i);
        if sy > sx + tol {
            return Err(MinentError::NotMajorized {
                index: i,
                target_sum: sy,
                spectrum_sum: sx,
            });
        }
    }
    Ok(())
}

/// Relative guard inside the floor so exact powers of two never round down.
const EPS_FLOOR: f64 = 1e-6;

/// floor(2^{S_min(sigma)}): the largest dimension sigma can mask.
pub fn masking_power(sigma: &DensityMatrix) -> u64 {
    masking_power_of_spectrum(&sigma.spectrum())
}

pub fn masking_power_of_spectrum(spec: &Spectrum) -> u64 {
    let x = 1.0 / spec.max();
    (x * (1.0 + EPS_FLOOR)).floor() as u64
}

/// log2 of the masking power of the pad's marginal, in bits.
pub fn pst_power(pad: &BipartitePureState) -> f64 {
    (masking_power_of_spectrum(&pad.marginal_spectrum()) as f64).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{is_unitary, CVec};
    use crate::state::{haar_unitary, random_state, RandomKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn renyi_limits() {
        let half = Spectrum::uniform(2);
        assert!((renyi_entropy(&half, Alpha::Infinity).unwrap() - 1.0).abs() < 1e-12);
        assert!((renyi_entropy(&half, Alpha::Order(0.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((renyi_entropy(&half, Alpha::Order(1.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((renyi_entropy(&half, Alpha::Order(2.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!(renyi_entropy(&half, Alpha::Order(-1.0)).is_err());
    }

    #[test]
    fn renyi_paper_spectra() {
        let s = Spectrum::new(vec![0.7730, 0.1135, 0.1135]).unwrap();
        assert!((renyi_entropy(&s, Alpha::Order(1.0)).unwrap() - 1.0).abs() < 1e-3);
        assert!((renyi_entropy(&s, Alpha::Infinity).unwrap() - 0.3716).abs() < 1e-3);

        let s = Spectrum::new(vec![0.5, 0.25, 0.125, 0.0625, 0.0625]).unwrap();
        assert!((renyi_entropy(&s, Alpha::Infinity).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn renyi_monotone_in_alpha() {
        for seed in 0..10u64 {
            let st = random_state(RandomKind::GinibreMixed, &[4], seed, None).unwrap();
            let spec = st.spectrum();
            let orders = [
                Alpha::Order(0.0),
                Alpha::Order(0.5),
                Alpha::Order(1.0),
                Alpha::Order(2.0),
                Alpha::Order(5.0),
                Alpha::Infinity,
            ];
            let vals: Vec<f64> =
                orders.iter().map(|&a| renyi_entropy(&spec, a).unwrap()).collect();
            for w in vals.windows(2) {
                assert!(w[0] >= w[1] - 1e-9, "{vals:?}");
            }
        }
    }

    #[test]
    fn min_entropy_additive() {
        for seed in 0..10u64 {
            let a = random_state(RandomKind::GinibreMixed, &[3], seed, None).unwrap();
            let b = random_state(RandomKind::GinibreMixed, &[2], seed + 100, None).unwrap();
            let joint = a.tensor(&b);
            assert!(
                (min_entropy(&joint) - min_entropy(&a) - min_entropy(&b)).abs() < 1e-9
            );
        }
    }

    #[test]
    fn majorizes_basic() {
        let x = Spectrum::new(vec![0.7, 0.3]).unwrap();
        let y = Spectrum::new(vec![0.5, 0.5]).unwrap();
        assert!(majorizes(&x, &y));
        assert!(!majorizes(&y, &x));
        // zero padding
        let z = Spectrum::new(vec![1.0]).unwrap();
        assert!(majorizes(&z, &x));
    }

    #[test]
    fn majorizes_schur_oracle() {
        // diagonal of rho in any basis is majorized by its spectrum
        for seed in 0..100u64 {
            let st = random_state(RandomKind::GinibreMixed, &[4], seed, None).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 5000);
            let u = haar_unitary(4, &mut rng);
            let rot = &u * st.entries() * u.adjoint();
            let diag: Vec<f64> = (0..4).map(|i| rot[(i, i)].re).collect();
            let y = Spectrum::new(diag).unwrap();
            assert!(majorizes(&st.spectrum(), &y), "seed {seed}");
        }
    }

    #[test]
    fn uniform_equivalence_with_lambda_max() {
        // majorizes(uniform_d padded, lambda) iff lambda_max <= 1/d
        let cases: Vec<(Vec<f64>, usize)> = vec![
            (vec![0.5, 0.25, 0.125, 0.125], 2),
            (vec![0.6, 0.4], 2),
            (vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 3),
            (vec![0.25; 4], 2),
            (vec![0.4, 0.3, 0.3], 3),
            (vec![0.3, 0.3, 0.2, 0.2], 3),
        ];
        for (probs, d) in cases {
            let lam = Spectrum::new(probs).unwrap();
            let uni = Spectrum::uniform(d);
            assert_eq!(
                majorizes(&uni, &lam),
                lam.max() <= 1.0 / d as f64 + 1e-9,
                "{lam:?} d={d}"
            );
        }
    }

    #[test]
    fn decompose_worked_example() {
        let lam = Spectrum::new(vec![0.5, 0.25, 0.125, 0.125]).unwrap();
        let dec = uniform_subset_decompose(&lam, 2).unwrap();
        assert_eq!(dec.terms.len(), 3);
        assert_eq!(dec.terms[0], (0.5, vec![0, 1]));
        assert!((dec.terms[1].0 - 0.25).abs() < 1e-12);
        assert_eq!(dec.terms[1].1, vec![0, 2]);
        assert!((dec.terms[2].0 - 0.25).abs() < 1e-12);
        assert_eq!(dec.terms[2].1, vec![0, 3]);
    }

    #[test]
    fn decompose_uniform_single_term() {
        for d in [2usize, 3, 5] {
            let dec = uniform_subset_decompose(&Spectrum::uniform(d), d).unwrap();
            assert_eq!(dec.terms.len(), 1);
            assert!((dec.terms[0].0 - 1.0).abs() < 1e-12);
            assert_eq!(dec.terms[0].1, (0..d).collect::<Vec<_>>());
        }
    }

    #[test]
    fn decompose_infeasible() {
        let lam = Spectrum::new(vec![0.6, 0.4]).unwrap();
        assert!(matches!(
            uniform_subset_decompose(&lam, 2),
            Err(MinentError::InfeasibleSpectrum { .. })
        ));
    }

    #[test]
    fn decompose_reconstructs_random_spectra() {
        for seed in 0..30u64 {
            let st = random_state(RandomKind::GinibreMixed, &[6], seed, None).unwrap();
            let spec = st.spectrum();
            for d in 2..=3usize {
                if spec.max() > 1.0 / d as f64 {
                    continue;
                }
                let dec = uniform_subset_decompose(&spec, d).unwrap();
                assert!(dec.terms.len() <= 6 * 7 / 2);
                let rec = dec.reconstruct(spec.len());
                for (r, l) in rec.iter().zip(spec.probs()) {
                    assert!((r - l).abs() < 1e-12, "seed {seed} d {d}");
                }
                let wsum: f64 = dec.terms.iter().map(|(p, _)| p).sum();
                assert!((wsum - 1.0).abs() < 1e-12);
                assert!(dec.terms.iter().all(|(p, _)| *p > 0.0));
            }
        }
    }

    fn diag_of_conjugated(spec: &Spectrum, u: &CMat) -> Vec<f64> {
        let n = spec.len();
        let d = CMat::from_diagonal(&CVec::from_iterator(
            n,
            spec.probs().iter().map(|&p| cr(p)),
        ));
        let m = u * d * u.adjoint();
        (0..n).map(|i| m[(i, i)].re).collect()
    }

    #[test]
    fn schur_horn_two_level_example() {
        let spec = Spectrum::new(vec![0.7, 0.3]).unwrap();
        let u = schur_horn_unitary(&spec, &[0.6, 0.4]).unwrap();
        assert!(is_unitary(&u, 1e-12));
        let diag = diag_of_conjugated(&spec, &u);
        assert!((diag[0] - 0.6).abs() < 1e-10);
        assert!((diag[1] - 0.4).abs() < 1e-10);
        // cos^2 theta = (0.6 - 0.3)/(0.7 - 0.3) = 0.75 on the rotated entry
        let c2 = u[(0, 0)].norm_sqr();
        assert!((c2 - 0.75).abs() < 1e-10);
    }

    #[test]
    fn schur_horn_identity_like_when_target_is_spectrum() {
        let spec = Spectrum::new(vec![0.5, 0.3, 0.2]).unwrap();
        let u = schur_horn_unitary(&spec, &[0.5, 0.3, 0.2]).unwrap();
        let diag = diag_of_conjugated(&spec, &u);
        for (d, t) in diag.iter().zip([0.5, 0.3, 0.2]) {
            assert!((d - t).abs() < 1e-10);
        }
    }

    #[test]
    fn schur_horn_rejects_unmajorized() {
        let spec = Spectrum::new(vec![0.7, 0.3]).unwrap();
        assert!(matches!(
            schur_horn_unitary(&spec, &[0.8, 0.2]),
            Err(MinentError::NotMajorized { .. })
        ));
    }

    #[test]
    fn schur_horn_random_majorized_targets() {
        // generate target < spectrum via random T-transforms, check synthesis
        use rand::Rng;
        for seed in 0..40u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 5usize;
            let st = random_state(RandomKind::GinibreMixed, &[n], seed + 300, None).unwrap();
            let spec = st.spectrum();
            let mut t: Vec<f64> = spec.probs().to_vec();
            for _ in 0..4 {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                if i == j {
                    continue;
                }
                let w: f64 = rng.gen_range(0.0..0.5);
                let (a, b) = (t[i], t[j]);
                t[i] = (1.0 - w) * a + w * b;
                t[j] = w * a + (1.0 - w) * b;
            }
            let u = schur_horn_unitary(&spec, &t).unwrap();
            assert!(is_unitary(&u, 1e-10), "seed {seed}");
            let diag = diag_of_conjugated(&spec, &u);
            for (got, want) in diag.iter().zip(&t) {
                assert!((got - want).abs() < 1e-10, "seed {seed}: {diag:?} vs {t:?}");
            }
        }
    }

    #[test]
    fn power_functions() {
        let third = DensityMatrix::maximally_mixed(3);
        assert_eq!(masking_power(&third), 3);

        let spec = Spectrum::new(vec![0.5, 0.25, 0.125, 0.125]).unwrap();
        let pad = BipartitePureState::from_marginal_spectrum(&spec);
        assert!((pst_power(&pad) - 1.0).abs() < 1e-12);

        let s = Spectrum::new(vec![0.7730, 0.1135, 0.1135]).unwrap();
        assert_eq!(masking_power_of_spectrum(&s), 1);

        // exact powers of two must not round down
        let s = Spectrum::uniform(8);
        assert_eq!(masking_power_of_spectrum(&s), 8);
    }

    #[test]
    fn masking_power_superadditive() {
        for seed in 0..50u64 {
            let a = random_state(RandomKind::GinibreMixed, &[3], seed, None).unwrap();
            let b = random_state(RandomKind::GinibreMixed, &[4], seed + 1000, None).unwrap();
            let joint = a.tensor(&b);
            assert!(masking_power(&joint) >= masking_power(&a) * masking_power(&b));
        }
    }

    #[test]
    fn pst_power_superadditive() {
        for seed in 0..20u64 {
            let sa = random_state(RandomKind::GinibreMixed, &[3], seed, None)
                .unwrap()
                .spectrum();
            let sb = random_state(RandomKind::GinibreMixed, &[3], seed + 77, None)
                .unwrap()
                .spectrum();
            let pa = BipartitePureState::from_marginal_spectrum(&sa);
            let pb = BipartitePureState::from_marginal_spectrum(&sb);
            let joint = pa.tensor(&pb);
            assert!(pst_power(&joint) >= pst_power(&pa) + pst_power(&pb) - 1e-9);
        }
    }
}
