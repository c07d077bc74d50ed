//! Estimation of a Bell-diagonal state (equivalently its Pauli distribution) from
//! `p + 1` local measurement settings.
//!
//! Setting `(k, l)` has Alice measure `W(k, l)` and Bob its transpose; the outcome
//! difference `Y - Y_bar` is distributed as `lX - kZ` under `P`. The marginal of one
//! class representative gives every characteristic value on its line through the
//! origin, and `P(x, z) = p^{-2} sum_{l,k} w^{-(lx - kz)} E[w^{lX - kZ}]` inverts them.

use num_complex::{Complex, Complex64};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::dists::{root_of_unity, MarginalDist, PauliDist};
use crate::error::{Error, Result};
use crate::gf::{check_prime, FieldElem};
use crate::qexact::linalg::{c, kron, CMat};
use crate::qexact::{weyl_raw, DensityMatrix, DIM_CAP};
use crate::real::Real;

/// Measurement `M(lX - kZ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MeasurementSetting {
    pub k: u32,
    pub l: u32,
}

impl MeasurementSetting {
    pub fn new(k: u32, l: u32, p: u32) -> Result<Self> {
        check_prime(p)?;
        if k >= p || l >= p {
            return Err(Error::OutOfRange {
                value: k.max(l) as u64,
                modulus: p,
            });
        }
        if k == 0 && l == 0 {
            return Err(Error::InvalidParameter(
                "setting (0, 0) measures nothing".into(),
            ));
        }
        Ok(Self { k, l })
    }

    /// Coefficients `(a, b)` of the measured combination `aX + bZ`.
    pub fn coefficients(&self, p: u32) -> (u32, u32) {
        (self.l, (p - self.k) % p)
    }

    fn elems(&self, p: u32) -> (FieldElem, FieldElem) {
        (
            FieldElem::new(self.l as u64, p).unwrap(),
            FieldElem::new(self.k as u64, p).unwrap(),
        )
    }
}

/// One representative per class `[(1,0)], [(1,1)], ..., [(1,p-1)], [(0,1)]` of
/// combinations `aX + bZ`, i.e. `(k, l) = (-b, a)`.
pub fn settings(p: u32) -> Result<Vec<MeasurementSetting>> {
    check_prime(p)?;
    let mut out: Vec<MeasurementSetting> = (0..p)
        .map(|b| MeasurementSetting {
            k: (p - b) % p,
            l: 1,
        })
        .collect();
    out.push(MeasurementSetting { k: p - 1, l: 0 });
    Ok(out)
}

/// Index of the setting whose line contains `(l, k)`, and the multiplier `a` with
/// `(l, k) = a (l_s, k_s)`.
fn class_of(l: u32, k: u32, p: u32) -> Option<(usize, u32)> {
    let (a, b) = (l, (p - k) % p);
    if a == 0 && b == 0 {
        return None;
    }
    if a == 0 {
        // multiple of (0, 1): b = mult * 1
        return Some((p as usize, b));
    }
    // (a, b) = a (1, b / a)
    let inv = FieldElem::new(a as u64, p).unwrap().inv().unwrap().value() as u64;
    Some(((b as u64 * inv % p as u64) as usize, a))
}

/// Draws `shots` outcomes of `setting` on a state with noise `P` and returns the frequencies.
pub fn simulate_setting<T: Real, R: Rng + ?Sized>(
    p_true: &PauliDist<T>,
    setting: MeasurementSetting,
    shots: u64,
    rng: &mut R,
) -> Result<MarginalDist<T>> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let p = p_true.p();
    let (l, k) = setting.elems(p);
    let exact = p_true.marginal(l, k)?;
    let counts = multinomial(
        &exact
            .probs()
            .iter()
            .map(|v| v.to_f64().unwrap())
            .collect::<Vec<_>>(),
        shots,
        rng,
    );
    let total = T::from_u64(shots).unwrap();
    MarginalDist::new(
        p,
        counts
            .iter()
            .map(|&c| T::from_u64(c).unwrap() / total)
            .collect(),
    )
}

/// Multinomial counts by sequential binomial draws.
fn multinomial<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut left = shots;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(probs.len());
    for (i, &q) in probs.iter().enumerate() {
        if i + 1 == probs.len() {
            out.push(left);
            break;
        }
        let frac = if mass > 0.0 {
            (q / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let draw = if left == 0 || frac == 0.0 {
            0
        } else {
            Binomial::new(left, frac)
                .expect("valid binomial")
                .sample(rng)
        };
        out.push(draw);
        left -= draw;
        mass -= q;
    }
    out
}

/// Characteristic values `E[w^{lX - kZ}]` indexed `l p + k`; `None` where unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct CharTable<T: Real = f64> {
    p: u32,
    values: Vec<Option<Complex<T>>>,
}

impl<T: Real> CharTable<T> {
    pub fn empty(p: u32) -> Result<Self> {
        check_prime(p)?;
        let mut values = vec![None; (p * p) as usize];
        values[0] = Some(Complex::new(T::one(), T::zero()));
        Ok(Self { p, values })
    }

    /// Every characteristic value of `P`.
    pub fn exact(dist: &PauliDist<T>) -> Result<Self> {
        let p = dist.p();
        let mut t = Self::empty(p)?;
        for l in 0..p {
            for k in 0..p {
                let v =
                    dist.char_value(FieldElem::new(l as u64, p)?, FieldElem::new(k as u64, p)?)?;
                t.values[(l * p + k) as usize] = Some(v);
            }
        }
        Ok(t)
    }

    /// Fills the whole line of each setting from its marginal via `E[w^{a(lX - kZ)}] = sum_s w^{as} P(s)`.
    pub fn from_marginals(
        p: u32,
        marginals: &[(MeasurementSetting, MarginalDist<T>)],
    ) -> Result<Self> {
        let mut t = Self::empty(p)?;
        for (s, m) in marginals {
            if m.p() != p {
                return Err(Error::ModulusMismatch(m.p(), p));
            }
            for a in 1..p {
                let l = (a as u64 * s.l as u64 % p as u64) as u32;
                let k = (a as u64 * s.k as u64 % p as u64) as u32;
                t.values[(l * p + k) as usize] = Some(m.char_at(a));
            }
        }
        Ok(t)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn get(&self, l: u32, k: u32) -> Option<Complex<T>> {
        self.values[(l * self.p + k) as usize]
    }

    pub fn set(&mut self, l: u32, k: u32, v: Complex<T>) {
        self.values[(l * self.p + k) as usize] = Some(v);
    }
}

/// Inverse Fourier transform of a full characteristic table. The result may carry
/// small negative entries when the table comes from finite samples.
pub fn reconstruct<T: Real>(table: &CharTable<T>) -> Result<Vec<T>> {
    let p = table.p;
    for l in 0..p {
        for k in 0..p {
            if table.get(l, k).is_none() {
                // report the class as its representative (a, b) of aX + bZ
                let (idx, _) = class_of(l, k, p).expect("(0, 0) is always present");
                let rep = if idx == p as usize {
                    (0, 1)
                } else {
                    (1, idx as u32)
                };
                return Err(Error::MissingClass(rep.0, rep.1));
            }
        }
    }
    let pp = T::from_u32(p * p).unwrap();
    let pu = p as u64;
    let mut out = Vec::with_capacity((p * p) as usize);
    for x in 0..pu {
        for z in 0..pu {
            let mut acc = Complex::new(T::zero(), T::zero());
            for l in 0..pu {
                for k in 0..pu {
                    // w^{-(lx - kz)}
                    let e = (pu * pu - (l * x % pu) + (k * z % pu)) % pu;
                    acc = acc + root_of_unity::<T>(p, e) * table.get(l as u32, k as u32).unwrap();
                }
            }
            out.push(acc.re / pp);
        }
    }
    Ok(out)
}

/// Clips negatives to zero and rescales to unit mass. Returns the distribution and the clipped mass.
pub fn project<T: Real>(p: u32, raw: &[T]) -> Result<(PauliDist<T>, T)> {
    let negative: T = raw.iter().filter(|v| **v < T::zero()).map(|v| -*v).sum();
    let clipped: Vec<T> = raw.iter().map(|&v| v.max(T::zero())).collect();
    let total: T = clipped.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::InvalidDistribution(
            "estimate has no positive mass".into(),
        ));
    }
    Ok((
        PauliDist::new(p, clipped.iter().map(|&v| v / total).collect())?,
        negative,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimationReport<T: Real + Serialize = f64> {
    pub settings: Vec<MeasurementSetting>,
    /// Shots per setting; 0 means exact marginals.
    pub shots: u64,
    pub marginals: Vec<MarginalDist<T>>,
    pub raw: Vec<T>,
    pub p_hat: PauliDist<T>,
    /// Negative mass removed by the projection.
    pub negative_mass: T,
    pub projected: bool,
    pub tv_to_truth: Option<T>,
}

/// Simulates all `p + 1` settings and reconstructs `P`. With `shots = 0` the exact marginals are used.
pub fn estimate<T: Real + Serialize, R: Rng + ?Sized>(
    p_true: &PauliDist<T>,
    shots: u64,
    rng: &mut R,
) -> Result<EstimationReport<T>> {
    let p = p_true.p();
    let sets = settings(p)?;
    let mut marginals = Vec::with_capacity(sets.len());
    for &s in &sets {
        let m = if shots == 0 {
            let (l, k) = s.elems(p);
            p_true.marginal(l, k)?
        } else {
            simulate_setting(p_true, s, shots, rng)?
        };
        marginals.push(m);
    }
    estimate_from_marginals(p, &sets, marginals, shots, Some(p_true))
}

/// Reconstruction from measured marginals, in the order of [`settings`].
pub fn estimate_from_marginals<T: Real + Serialize>(
    p: u32,
    sets: &[MeasurementSetting],
    marginals: Vec<MarginalDist<T>>,
    shots: u64,
    truth: Option<&PauliDist<T>>,
) -> Result<EstimationReport<T>> {
    if sets.len() != marginals.len() {
        return Err(Error::LengthMismatch {
            expected: sets.len(),
            actual: marginals.len(),
        });
    }
    let pairs: Vec<_> = sets
        .iter()
        .copied()
        .zip(marginals.iter().cloned())
        .collect();
    let raw = reconstruct(&CharTable::from_marginals(p, &pairs)?)?;
    let (p_hat, negative_mass) = project(p, &raw)?;
    let tv_to_truth = truth.map(|t| p_hat.total_variation(t)).transpose()?;
    Ok(EstimationReport {
        settings: sets.to_vec(),
        shots,
        marginals,
        raw,
        p_hat,
        projected: negative_mass > T::zero(),
        negative_mass,
        tv_to_truth,
    })
}

/// Two distributions that agree on every setting except `missing`.
///
/// The second is the uniform distribution plus a real character of the missing
/// direction, which is invisible to every other line.
pub fn witness_pair(p: u32, missing: MeasurementSetting) -> Result<(PauliDist, PauliDist)> {
    let uniform = PauliDist::uniform(p)?;
    let eps = 1.0 / (2.0 * (p * p) as f64);
    let mut probs = Vec::with_capacity((p * p) as usize);
    for x in 0..p as u64 {
        for z in 0..p as u64 {
            let pu = p as u64;
            let e = (missing.l as u64 * x + (pu - missing.k as u64) * z) % pu;
            probs.push(1.0 / (p * p) as f64 + eps * root_of_unity::<f64>(p, e).re);
        }
    }
    let total: f64 = probs.iter().sum();
    Ok((
        uniform,
        PauliDist::new(p, probs.iter().map(|v| v / total).collect())?,
    ))
}

/// Projectors onto the eigenspaces of a Weyl operator `A` with `A^p = c I`, labelled
/// so that eigenvalue `c^{1/p} w^j` has index `j`.
fn eigenprojectors(a: &CMat, p: u32) -> Vec<CMat> {
    let d = a.nrows();
    let mut ap = CMat::identity(d, d);
    for _ in 0..p {
        ap = &ap * a;
    }
    let cst = ap[(0, 0)];
    let lambda0 = Complex64::from_polar(cst.norm().powf(1.0 / p as f64), cst.arg() / p as f64);
    (0..p)
        .map(|j| {
            let shift = lambda0.inv() * root_of_unity::<f64>(p, ((p - j) % p) as u64);
            let step = a * shift;
            let mut term = CMat::identity(d, d);
            let mut acc = CMat::zeros(d, d);
            for _ in 0..p {
                acc += &term;
                term = &term * &step;
            }
            acc * c(1.0 / p as f64)
        })
        .collect()
}

/// Exact distribution of `Y - Y_bar` for `setting` on a two-qudit state.
pub fn setting_statistics(
    tau_ab: &DensityMatrix,
    setting: MeasurementSetting,
) -> Result<MarginalDist> {
    let [da, db] = tau_ab.dims() else {
        return Err(Error::DimensionMismatch(
            "expected a p x p bipartite state".into(),
        ));
    };
    if da != db {
        return Err(Error::DimensionMismatch(
            "expected a p x p bipartite state".into(),
        ));
    }
    let p = *da as u32;
    check_prime(p)?;
    if tau_ab.dim() > DIM_CAP {
        return Err(Error::SizeCap {
            what: "Hilbert dimension",
            size: tau_ab.dim(),
            cap: DIM_CAP,
        });
    }
    let a = weyl_raw(p, setting.k % p, setting.l % p);
    let pa = eigenprojectors(&a, p);
    let pb: Vec<CMat> = pa.iter().map(|m| m.transpose()).collect();
    let mut out = vec![0.0; p as usize];
    for s in 0..p as usize {
        for j in 0..p as usize {
            let proj = kron(&pa[(j + s) % p as usize], &pb[j]);
            out[s] += (&proj * tau_ab.matrix()).trace().re;
        }
    }
    let total: f64 = out.iter().sum();
    MarginalDist::new(p, out.iter().map(|v| (v / total).max(0.0)).collect())
}

/// Statistics of `setting` on `tau_AB` and on its twirl.
pub fn twirled_statistics_check(
    tau_ab: &DensityMatrix,
    setting: MeasurementSetting,
) -> Result<(MarginalDist, MarginalDist)> {
    Ok((
        setting_statistics(tau_ab, setting)?,
        setting_statistics(&tau_ab.twirl()?, setting)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qexact::bell_diagonal;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn settings_examples() {
        let s2: Vec<(u32, u32)> = settings(2).unwrap().iter().map(|s| (s.k, s.l)).collect();
        let mut sorted = s2.clone();
        sorted.sort();
        assert_eq!(sorted, vec![(0, 1), (1, 0), (1, 1)]);
        for p in [2u32, 3, 5, 7] {
            let s = settings(p).unwrap();
            assert_eq!(s.len(), p as usize + 1);
            for (i, a) in s.iter().enumerate() {
                assert!(a.k != 0 || a.l != 0);
                for b in &s[i + 1..] {
                    // inequivalent: no scalar maps one onto the other
                    assert!((1..p).all(|m| (a.k * m % p, a.l * m % p) != (b.k, b.l)));
                }
            }
        }
        assert!(settings(4).is_err());
        assert!(MeasurementSetting::new(0, 0, 3).is_err());
    }

    #[test]
    fn class_lookup_covers_every_direction() {
        for p in [2u32, 3, 5] {
            let sets = settings(p).unwrap();
            for l in 0..p {
                for k in 0..p {
                    let Some((idx, a)) = class_of(l, k, p) else {
                        assert_eq!((l, k), (0, 0));
                        continue;
                    };
                    let s = sets[idx];
                    assert_eq!((s.l * a % p, s.k * a % p), (l, k));
                }
            }
        }
    }

    #[test]
    fn simulate_examples() {
        let mut r = rng(1);
        let id: PauliDist = PauliDist::identity(3).unwrap();
        for s in settings(3).unwrap() {
            let m = simulate_setting(&id, s, 100, &mut r).unwrap();
            assert_eq!(m.probs()[0], 1.0);
        }
        let d: PauliDist = PauliDist::depolarizing(0.05, 2).unwrap();
        let shots = 100_000;
        let m =
            simulate_setting(&d, MeasurementSetting::new(0, 1, 2).unwrap(), shots, &mut r).unwrap();
        let q = 0.025;
        let sigma = (q * (1.0 - q) / shots as f64).sqrt();
        assert!((m.probs()[1] - q).abs() < 3.0 * sigma);
        assert!(
            simulate_setting(&d, MeasurementSetting::new(0, 1, 2).unwrap(), 0, &mut r).is_err()
        );
        let u: PauliDist = PauliDist::uniform(2).unwrap();
        let m = simulate_setting(
            &u,
            MeasurementSetting::new(1, 1, 2).unwrap(),
            200_000,
            &mut r,
        )
        .unwrap();
        assert!((m.probs()[0] - 0.5).abs() < 0.005);
    }

    #[test]
    fn reconstruct_examples() {
        let mut ones = CharTable::<f64>::empty(3).unwrap();
        for l in 0..3 {
            for k in 0..3 {
                ones.set(l, k, Complex::new(1.0, 0.0));
            }
        }
        let raw = reconstruct(&ones).unwrap();
        assert_abs_diff_eq!(raw[0], 1.0, epsilon = 1e-14);
        assert!(raw[1..].iter().all(|v| v.abs() < 1e-14));

        let mut uni = CharTable::<f64>::empty(2).unwrap();
        for (l, k) in [(0, 1), (1, 0), (1, 1)] {
            uni.set(l, k, Complex::new(0.0, 0.0));
        }
        for v in reconstruct(&uni).unwrap() {
            assert_abs_diff_eq!(v, 0.25, epsilon = 1e-15);
        }
        let partial = CharTable::<f64>::empty(2).unwrap();
        assert!(matches!(
            reconstruct(&partial),
            Err(Error::MissingClass(_, _))
        ));
    }

    #[test]
    fn round_trip_from_exact_marginals() {
        let mut r = rng(2);
        for p in [2u32, 3, 5] {
            for _ in 0..30 {
                let d: PauliDist = PauliDist::random(p, &mut r).unwrap();
                let rep = estimate(&d, 0, &mut r).unwrap();
                for (a, b) in rep.raw.iter().zip(d.probs()) {
                    assert!((a - b).abs() < 1e-12);
                }
                assert!(rep.tv_to_truth.unwrap() < 1e-12);
                let direct = reconstruct(&CharTable::exact(&d).unwrap()).unwrap();
                for (a, b) in direct.iter().zip(d.probs()) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_precision_round_trip() {
        let mut r = rng(3);
        let d: PauliDist<f32> = PauliDist::random(3, &mut r).unwrap();
        let rep = estimate(&d, 0, &mut r).unwrap();
        assert!(rep.tv_to_truth.unwrap() < 1e-5);
    }

    #[test]
    fn every_setting_is_needed() {
        for p in [2u32, 3, 5] {
            for missing in settings(p).unwrap() {
                let (a, b) = witness_pair(p, missing).unwrap();
                assert!(a.total_variation(&b).unwrap() > 1e-3);
                for s in settings(p).unwrap() {
                    let (l, k) = s.elems(p);
                    let (ma, mb) = (a.marginal(l, k).unwrap(), b.marginal(l, k).unwrap());
                    let same = ma
                        .probs()
                        .iter()
                        .zip(mb.probs())
                        .all(|(x, y)| (x - y).abs() < 1e-12);
                    assert_eq!(
                        same,
                        s != missing,
                        "p = {p}, missing {missing:?}, setting {s:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn sampled_estimates_converge() {
        let mut r = rng(4);
        let d: PauliDist = PauliDist::depolarizing(0.05, 2).unwrap();
        let mut errs: Vec<f64> = (0..100)
            .map(|_| estimate(&d, 10_000, &mut r).unwrap().tv_to_truth.unwrap())
            .collect();
        errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(errs[50] < 0.02, "median {}", errs[50]);
    }

    #[test]
    fn projection_clips_and_rescales() {
        let (d, neg) = project(2, &[0.6, -0.1, 0.3, 0.2]).unwrap();
        assert_abs_diff_eq!(neg, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(d.probs()[0], 0.6 / 1.1, epsilon = 1e-15);
        assert_eq!(d.probs()[1], 0.0);
        assert!(project(2, &[-0.1, -0.2, 0.0, 0.0]).is_err());
    }

    #[test]
    fn bell_diagonal_statistics_are_the_marginals() {
        let mut r = rng(5);
        for p in [2u32, 3] {
            let d: PauliDist = PauliDist::random(p, &mut r).unwrap();
            let rho = bell_diagonal(&d).unwrap();
            for s in settings(p).unwrap() {
                let got = setting_statistics(&rho, s).unwrap();
                let (l, k) = s.elems(p);
                let want = d.marginal(l, k).unwrap();
                for (a, b) in got.probs().iter().zip(want.probs()) {
                    assert_abs_diff_eq!(a, b, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn twirl_leaves_statistics_unchanged() {
        let mut r = rng(6);
        for p in [2u32, 3] {
            for _ in 0..4 {
                let rho = DensityMatrix::random(vec![p as usize, p as usize], 2, &mut r).unwrap();
                for s in settings(p).unwrap() {
                    let (a, b) = twirled_statistics_check(&rho, s).unwrap();
                    for (x, y) in a.probs().iter().zip(b.probs()) {
                        assert!((x - y).abs() < 1e-10);
                    }
                }
            }
        }
        let a = DensityMatrix::random(vec![3], 2, &mut r).unwrap();
        let b = DensityMatrix::random(vec![3], 3, &mut r).unwrap();
        let prod = a.tensor(&b).unwrap();
        for s in settings(3).unwrap() {
            let (x, y) = twirled_statistics_check(&prod, s).unwrap();
            for (u, v) in x.probs().iter().zip(y.probs()) {
                assert!((u - v).abs() < 1e-10);
            }
        }
    }
}
