//! Wire-tap codes built from an error-correcting code and the inverse of `f_S`,
//! the additive classical channel seen by Bob, and exact leakage for tiny instances.
//!
//! A codeword of `n` channel uses is a [`FieldVec`] of `2n` symbols laid out as
//! `(x_1, z_1, x_2, z_2, ...)`.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{sibson_info, TGrid};
use crate::dists::PauliDist;
use crate::error::{Error, Result};
use crate::gf::{check_prime, FieldVec};
use crate::hashing::{f_s, psi_s, HashParams, SeedS};
use crate::qexact::linalg::{c, dagger, kron, trace_norm_hermitian, CMat};
use crate::qexact::{cq_sandwiched_info_down, weyl_raw, DensityMatrix, DIM_CAP};

/// Cap on `seeds x p^{n1}` for exact enumeration.
pub const ENUMERATION_CAP: u64 = 1_000_000;
/// Largest `p^{n1}` for which codes decode by exhaustive search.
pub const EXHAUSTIVE_CAP: u64 = 1 << 16;

/// A linear code `F_p^{n1} -> F_p^{2n}` with a decoder.
///
/// Plug-in codes should pass [`check_conformance`].
pub trait LinearCode: Send + Sync {
    fn p(&self) -> u32;
    /// Channel uses; codewords have `2n` symbols.
    fn n(&self) -> usize;
    fn n1(&self) -> usize;
    fn encode(&self, info: &FieldVec) -> Result<FieldVec>;
    fn decode(&self, received: &FieldVec) -> Result<FieldVec>;
    fn name(&self) -> String;
}

fn check_len(v: &FieldVec, len: usize, p: u32) -> Result<()> {
    if v.modulus() != p {
        return Err(Error::ModulusMismatch(v.modulus(), p));
    }
    if v.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: v.len(),
        });
    }
    Ok(())
}

/// Per-pair log-likelihoods `log W(x, z)`, indexed by `x p + z`.
fn log_weights(noise: &PauliDist) -> Vec<f64> {
    noise
        .probs()
        .iter()
        .map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY })
        .collect()
}

/// `n1 = 2n`, encode and decode are the identity.
#[derive(Clone, Debug)]
pub struct IdentityCode {
    p: u32,
    n: usize,
}

impl IdentityCode {
    pub fn new(p: u32, n: usize) -> Result<Self> {
        check_prime(p)?;
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        Ok(Self { p, n })
    }
}

impl LinearCode for IdentityCode {
    fn p(&self) -> u32 {
        self.p
    }
    fn n(&self) -> usize {
        self.n
    }
    fn n1(&self) -> usize {
        2 * self.n
    }
    fn encode(&self, info: &FieldVec) -> Result<FieldVec> {
        check_len(info, 2 * self.n, self.p)?;
        Ok(info.clone())
    }
    fn decode(&self, received: &FieldVec) -> Result<FieldVec> {
        check_len(received, 2 * self.n, self.p)?;
        Ok(received.clone())
    }
    fn name(&self) -> String {
        "identity".into()
    }
}

/// Each information symbol is repeated `r` times in a contiguous block.
///
/// Decoding is maximum likelihood block by block: pairs lying inside a block use the
/// joint noise weight, pairs cut by a block boundary use the marginal of their half.
/// For even `r` no pair is cut and the decoder is exact ML.
#[derive(Clone, Debug)]
pub struct RepetitionCode {
    p: u32,
    n: usize,
    r: usize,
    log_w: Vec<f64>,
    log_wx: Vec<f64>,
    log_wz: Vec<f64>,
}

impl RepetitionCode {
    pub fn new(p: u32, n: usize, r: usize, noise: &PauliDist) -> Result<Self> {
        check_prime(p)?;
        if noise.p() != p {
            return Err(Error::ModulusMismatch(noise.p(), p));
        }
        if n == 0 || r == 0 || !(2 * n).is_multiple_of(r) {
            return Err(Error::InvalidParameter(format!(
                "repetition factor {r} must divide 2n = {}",
                2 * n
            )));
        }
        let pu = p as usize;
        let ln = |v: f64| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY };
        let log_wx = (0..p)
            .map(|x| ln((0..p).map(|z| noise.get(x, z)).sum()))
            .collect();
        let log_wz = (0..p)
            .map(|z| ln((0..p).map(|x| noise.get(x, z)).sum()))
            .collect();
        debug_assert_eq!(noise.probs().len(), pu * pu);
        Ok(Self {
            p,
            n,
            r,
            log_w: log_weights(noise),
            log_wx,
            log_wz,
        })
    }

    pub fn factor(&self) -> usize {
        self.r
    }
}

impl LinearCode for RepetitionCode {
    fn p(&self) -> u32 {
        self.p
    }
    fn n(&self) -> usize {
        self.n
    }
    fn n1(&self) -> usize {
        2 * self.n / self.r
    }
    fn encode(&self, info: &FieldVec) -> Result<FieldVec> {
        check_len(info, self.n1(), self.p)?;
        let out: Vec<u32> = info
            .values()
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, self.r))
            .collect();
        FieldVec::new(out, self.p)
    }
    fn decode(&self, received: &FieldVec) -> Result<FieldVec> {
        check_len(received, 2 * self.n, self.p)?;
        let p = self.p;
        let rv = received.values();
        let sub = |a: u32, b: u32| (a + p - b) % p;
        let mut out = Vec::with_capacity(self.n1());
        for block in 0..self.n1() {
            let (lo, hi) = (block * self.r, (block + 1) * self.r);
            let mut best = (f64::NEG_INFINITY, 0u32);
            for a in 0..p {
                let mut score = 0.0;
                let mut pos = lo;
                while pos < hi {
                    if pos % 2 == 0 && pos + 1 < hi {
                        score += self.log_w[(sub(rv[pos], a) * p + sub(rv[pos + 1], a)) as usize];
                        pos += 2;
                    } else {
                        score += if pos % 2 == 0 {
                            self.log_wx[sub(rv[pos], a) as usize]
                        } else {
                            self.log_wz[sub(rv[pos], a) as usize]
                        };
                        pos += 1;
                    }
                }
                if score > best.0 {
                    best = (score, a);
                }
            }
            out.push(best.1);
        }
        FieldVec::new(out, p)
    }
    fn name(&self) -> String {
        format!("repetition:{}", self.r)
    }
}

/// Code given by a full-rank generator matrix, decoded by exhaustive maximum likelihood.
#[derive(Clone, Debug)]
pub struct GeneratorCode {
    p: u32,
    n: usize,
    /// `n1` rows of length `2n`.
    generator: Vec<Vec<u32>>,
    codebook: Vec<(FieldVec, Vec<u32>)>,
    log_w: Vec<f64>,
}

fn rank_mod_p(rows: &[Vec<u32>], p: u32) -> usize {
    let mut m: Vec<Vec<u32>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = crate::gf::FieldElem::new(m[rank][col] as u64, p)
            .unwrap()
            .inv()
            .unwrap()
            .value();
        for v in m[rank].iter_mut() {
            *v = (*v * inv) % p;
        }
        let pivot = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && row[col] != 0 {
                let f = row[col];
                for (v, &pv) in row.iter_mut().zip(&pivot) {
                    *v = (*v + p * p - f * pv % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

impl GeneratorCode {
    pub fn new(p: u32, n: usize, generator: Vec<Vec<u32>>, noise: &PauliDist) -> Result<Self> {
        check_prime(p)?;
        if noise.p() != p {
            return Err(Error::ModulusMismatch(noise.p(), p));
        }
        let n1 = generator.len();
        if n == 0
            || n1 == 0
            || n1 > 2 * n
            || generator
                .iter()
                .any(|r| r.len() != 2 * n || r.iter().any(|&v| v >= p))
        {
            return Err(Error::Code(format!(
                "generator must be n1 x {} over F_{p} with 1 <= n1 <= 2n",
                2 * n
            )));
        }
        if rank_mod_p(&generator, p) != n1 {
            return Err(Error::Code(
                "generator is rank deficient, encoding would not be injective".into(),
            ));
        }
        let size = (p as u64).checked_pow(n1 as u32).unwrap_or(u64::MAX);
        if size > EXHAUSTIVE_CAP {
            return Err(Error::SizeCap {
                what: "codebook",
                size: size as usize,
                cap: EXHAUSTIVE_CAP as usize,
            });
        }
        let mut code = Self {
            p,
            n,
            generator,
            codebook: Vec::new(),
            log_w: log_weights(noise),
        };
        code.codebook = FieldVec::enumerate(n1, p)
            .map(|info| {
                let word = code
                    .encode(&info)
                    .expect("valid info word")
                    .values()
                    .to_vec();
                (info, word)
            })
            .collect();
        Ok(code)
    }

    /// Uniformly random full-rank generator; limited to `2n <= 8`, `p <= 3`.
    pub fn random<R: Rng + ?Sized>(
        p: u32,
        n: usize,
        n1: usize,
        noise: &PauliDist,
        rng: &mut R,
    ) -> Result<Self> {
        check_prime(p)?;
        if 2 * n > 8 || p > 3 {
            return Err(Error::SizeCap {
                what: "random linear code (needs 2n <= 8, p <= 3)",
                size: 2 * n,
                cap: 8,
            });
        }
        if n1 == 0 || n1 > 2 * n {
            return Err(Error::Code(format!("n1 = {n1} must lie in 1..={}", 2 * n)));
        }
        loop {
            let g: Vec<Vec<u32>> = (0..n1)
                .map(|_| (0..2 * n).map(|_| rng.random_range(0..p)).collect())
                .collect();
            if rank_mod_p(&g, p) == n1 {
                return Self::new(p, n, g, noise);
            }
        }
    }

    pub fn generator(&self) -> &[Vec<u32>] {
        &self.generator
    }
}

impl LinearCode for GeneratorCode {
    fn p(&self) -> u32 {
        self.p
    }
    fn n(&self) -> usize {
        self.n
    }
    fn n1(&self) -> usize {
        self.generator.len()
    }
    fn encode(&self, info: &FieldVec) -> Result<FieldVec> {
        check_len(info, self.n1(), self.p)?;
        let p = self.p as u64;
        let out = (0..2 * self.n)
            .map(|j| {
                (info
                    .values()
                    .iter()
                    .zip(&self.generator)
                    .map(|(&u, row)| u as u64 * row[j] as u64)
                    .sum::<u64>()
                    % p) as u32
            })
            .collect();
        FieldVec::new(out, self.p)
    }
    fn decode(&self, received: &FieldVec) -> Result<FieldVec> {
        check_len(received, 2 * self.n, self.p)?;
        let p = self.p;
        let rv = received.values();
        let mut best: (f64, Option<&FieldVec>) = (f64::NEG_INFINITY, None);
        for (info, word) in &self.codebook {
            let score: f64 = (0..self.n)
                .map(|i| {
                    let dx = (rv[2 * i] + p - word[2 * i]) % p;
                    let dz = (rv[2 * i + 1] + p - word[2 * i + 1]) % p;
                    self.log_w[(dx * p + dz) as usize]
                })
                .sum();
            if best.1.is_none() || score > best.0 {
                best = (score, Some(info));
            }
        }
        Ok(best.1.expect("nonempty codebook").clone())
    }
    fn name(&self) -> String {
        "random-linear".into()
    }
}

/// Baseline code choice, as accepted on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeSpec {
    Identity,
    Repetition(usize),
    RandomLinear { n1: usize, seed: u64 },
}

impl std::str::FromStr for CodeSpec {
    type Err = Error;

    /// `identity`, `repetition:<r>` or `random:<n1>[:<seed>]`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |v: &str| {
            v.parse::<u64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number '{v}' in code '{s}'")))
        };
        match parts.as_slice() {
            ["identity"] => Ok(Self::Identity),
            ["repetition", r] => Ok(Self::Repetition(num(r)? as usize)),
            ["random", n1] => Ok(Self::RandomLinear {
                n1: num(n1)? as usize,
                seed: 0,
            }),
            ["random", n1, seed] => Ok(Self::RandomLinear {
                n1: num(n1)? as usize,
                seed: num(seed)?,
            }),
            _ => Err(Error::InvalidParameter(format!("unknown code '{s}'"))),
        }
    }
}

impl CodeSpec {
    /// Builds the code; decoders that need a noise model use `noise`.
    pub fn build(&self, p: u32, n: usize, noise: &PauliDist) -> Result<Box<dyn LinearCode>> {
        Ok(match *self {
            Self::Identity => Box::new(IdentityCode::new(p, n)?),
            Self::Repetition(r) => Box::new(RepetitionCode::new(p, n, r, noise)?),
            Self::RandomLinear { n1, seed } => Box::new(GeneratorCode::random(
                p,
                n,
                n1,
                noise,
                &mut ChaCha8Rng::seed_from_u64(seed),
            )?),
        })
    }
}

/// Checks `encode(0) = 0`, linearity, injectivity and the noiseless round trip.
///
/// Injectivity and the round trip are exhaustive when `p^{n1} <= EXHAUSTIVE_CAP`,
/// sampled otherwise.
pub fn check_conformance<R: Rng + ?Sized>(code: &dyn LinearCode, rng: &mut R) -> Result<()> {
    let (p, n1, len) = (code.p(), code.n1(), 2 * code.n());
    if n1 == 0 || n1 > len {
        return Err(Error::Code(format!("n1 = {n1} outside 1..={len}")));
    }
    let zero = FieldVec::zeros(n1, p)?;
    let enc0 = code.encode(&zero)?;
    check_len(&enc0, len, p).map_err(|e| Error::Code(format!("codeword shape: {e}")))?;
    if !enc0.is_zero() {
        return Err(Error::Code("encode(0) is not 0".into()));
    }
    for _ in 0..64 {
        let (u, v) = (FieldVec::random(n1, p, rng), FieldVec::random(n1, p, rng));
        let a = crate::gf::FieldElem::new(rng.random_range(0..p) as u64, p)?;
        let lhs = code.encode(&u.scale(a)?.add(&v)?)?;
        let rhs = code.encode(&u)?.scale(a)?.add(&code.encode(&v)?)?;
        if lhs != rhs {
            return Err(Error::Code("encoder is not linear".into()));
        }
    }
    let size = (p as u64).checked_pow(n1 as u32).unwrap_or(u64::MAX);
    let infos: Vec<FieldVec> = if size <= EXHAUSTIVE_CAP {
        FieldVec::enumerate(n1, p).collect()
    } else {
        (0..256).map(|_| FieldVec::random(n1, p, rng)).collect()
    };
    let mut seen = HashSet::new();
    for u in &infos {
        let w = code.encode(u)?;
        if size <= EXHAUSTIVE_CAP && !seen.insert(w.values().to_vec()) {
            return Err(Error::Code("encoder is not injective".into()));
        }
        if !u.is_zero() && w.is_zero() {
            return Err(Error::Code("nonzero word encodes to 0".into()));
        }
        if &code.decode(&w)? != u {
            return Err(Error::Code("noiseless round trip failed".into()));
        }
    }
    Ok(())
}

/// Additive noise on `F_p^2` per channel use: `W(x, z | x', z') = P(x - x', z - z')`.
#[derive(Clone, Debug)]
pub struct ClassicalChannelWc {
    noise: PauliDist,
    sampler: WeightedIndex<f64>,
}

impl ClassicalChannelWc {
    pub fn new(noise: PauliDist) -> Result<Self> {
        let sampler = WeightedIndex::new(noise.probs())
            .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Ok(Self { noise, sampler })
    }

    pub fn noise(&self) -> &PauliDist {
        &self.noise
    }

    /// One noise pair `(N_x, N_z)`.
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, u32) {
        let k = self.sampler.sample(rng) as u32;
        let p = self.noise.p();
        (k / p, k % p)
    }

    /// Adds i.i.d. noise pairs to a codeword of `2n` symbols.
    pub fn sample<R: Rng + ?Sized>(&self, codeword: &FieldVec, rng: &mut R) -> Result<FieldVec> {
        let p = self.noise.p();
        if codeword.modulus() != p {
            return Err(Error::ModulusMismatch(codeword.modulus(), p));
        }
        if !codeword.len().is_multiple_of(2) {
            return Err(Error::LengthMismatch {
                expected: codeword.len() + 1,
                actual: codeword.len(),
            });
        }
        let mut out = codeword.values().to_vec();
        for pair in out.chunks_mut(2) {
            let (nx, nz) = self.sample_noise(rng);
            pair[0] = (pair[0] + nx) % p;
            pair[1] = (pair[1] + nz) % p;
        }
        FieldVec::new(out, p)
    }
}

fn check_code_params(code: &dyn LinearCode, hp: &HashParams) -> Result<()> {
    if code.p() != hp.p || code.n1() != hp.n1 {
        return Err(Error::InvalidParameter(format!(
            "code has (p, n1) = ({}, {}), hashing expects ({}, {})",
            code.p(),
            code.n1(),
            hp.p,
            hp.n1
        )));
    }
    Ok(())
}

/// `phi_e(psi_S(M, Y, L2))` for a given randomizer `L2`.
pub fn wiretap_encode_with(
    code: &dyn LinearCode,
    seed: &SeedS,
    m: &FieldVec,
    y: &FieldVec,
    l2: &FieldVec,
) -> Result<FieldVec> {
    check_code_params(code, &seed.params())?;
    code.encode(&psi_s(seed, m, y, l2)?)
}

/// Encodes `(Y, M)` with a uniformly drawn randomizer `L2`.
pub fn wiretap_encode<R: Rng + ?Sized>(
    code: &dyn LinearCode,
    seed: &SeedS,
    m: &FieldVec,
    y: &FieldVec,
    rng: &mut R,
) -> Result<FieldVec> {
    let hp = seed.params();
    let l2 = FieldVec::random(hp.sacrifice(), hp.p, rng);
    wiretap_encode_with(code, seed, m, y, &l2)
}

/// `f_S(phi_d(received))`, i.e. `M' = (Y, M)`.
pub fn wiretap_decode(
    code: &dyn LinearCode,
    seed: &SeedS,
    received: &FieldVec,
) -> Result<FieldVec> {
    check_code_params(code, &seed.params())?;
    f_s(seed, &code.decode(received)?)
}

/// Eve's channel for one use, as a function of the pair `(x, z)` (index `x p + z`).
#[derive(Clone, Debug)]
pub enum EveChannel {
    /// Rows of output probabilities, one row per input pair.
    Classical(Vec<Vec<f64>>),
    /// `tau_AE` with dims `[p, d_E]`; input `(x, z)` yields `W(x, z)_A tau_AE W(x, z)_A^dagger`.
    Quantum(DensityMatrix),
}

/// Eve's view of each codeword, indexed like `FieldVec::enumerate(n1, p)`.
enum Views {
    Classical(Vec<Vec<f64>>),
    Quantum(Vec<CMat>),
}

fn classical_rows(rows: &[Vec<f64>], p: u32) -> Result<()> {
    let pairs = (p * p) as usize;
    if rows.len() != pairs || rows.is_empty() {
        return Err(Error::LengthMismatch {
            expected: pairs,
            actual: rows.len(),
        });
    }
    let k = rows[0].len();
    for r in rows {
        if r.len() != k
            || r.iter().any(|&v| !(v >= 0.0))
            || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidDistribution(
                "each channel row must be a distribution of equal length".into(),
            ));
        }
    }
    Ok(())
}

fn views(code: &dyn LinearCode, eve: &EveChannel) -> Result<Views> {
    let (p, n) = (code.p(), code.n());
    let words: Vec<FieldVec> = FieldVec::enumerate(code.n1(), p)
        .map(|u| code.encode(&u))
        .collect::<Result<_>>()?;
    match eve {
        EveChannel::Classical(rows) => {
            classical_rows(rows, p)?;
            let k = rows[0].len();
            let outputs = k
                .checked_pow(n as u32)
                .filter(|&v| v as u64 <= ENUMERATION_CAP)
                .ok_or(Error::SizeCap {
                    what: "Eve output alphabet",
                    size: usize::MAX,
                    cap: ENUMERATION_CAP as usize,
                })?;
            let dists = words
                .iter()
                .map(|w| {
                    let v = w.values();
                    (0..outputs)
                        .map(|mut e| {
                            let mut prob = 1.0;
                            for i in (0..n).rev() {
                                prob *= rows[(v[2 * i] * p + v[2 * i + 1]) as usize][e % k];
                                e /= k;
                            }
                            prob
                        })
                        .collect()
                })
                .collect();
            Ok(Views::Classical(dists))
        }
        EveChannel::Quantum(tau_ae) => {
            if p != 2 || n > 2 {
                return Err(Error::SizeCap {
                    what: "quantum leakage (needs p = 2, n <= 2)",
                    size: n,
                    cap: 2,
                });
            }
            if tau_ae.dims().len() != 2 || tau_ae.dims()[0] != p as usize {
                return Err(Error::DimensionMismatch(format!(
                    "tau_AE must have dims [{p}, d_E]"
                )));
            }
            let d1 = tau_ae.dim();
            if d1.pow(n as u32) > DIM_CAP {
                return Err(Error::SizeCap {
                    what: "Eve's system",
                    size: d1.pow(n as u32),
                    cap: DIM_CAP,
                });
            }
            let single: Vec<CMat> = (0..p * p)
                .map(|k| {
                    let u = tau_ae
                        .embed(&weyl_raw(p, k / p, k % p), 0)
                        .expect("A is p-dimensional");
                    &u * tau_ae.matrix() * dagger(&u)
                })
                .collect();
            let states = words
                .iter()
                .map(|w| {
                    let v = w.values();
                    (0..n).fold(CMat::identity(1, 1), |acc, i| {
                        kron(&acc, &single[(v[2 * i] * p + v[2 * i + 1]) as usize])
                    })
                })
                .collect();
            Ok(Views::Quantum(states))
        }
    }
}

fn seed_count(hp: &HashParams) -> u64 {
    if hp.sacrifice() == 0 {
        1
    } else {
        (hp.p as u64).pow(hp.n1 as u32 - 1)
    }
}

fn check_enumeration(hp: &HashParams) -> Result<()> {
    let words = (hp.p as u64).checked_pow(hp.n1 as u32).unwrap_or(u64::MAX);
    let total = seed_count(hp).saturating_mul(words);
    if total > ENUMERATION_CAP {
        return Err(Error::SizeCap {
            what: "leakage enumeration",
            size: total as usize,
            cap: ENUMERATION_CAP as usize,
        });
    }
    Ok(())
}

/// Per `M'` value, `‖tau_{E|m'} - tau_E‖_1` for one seed.
fn per_message(hp: &HashParams, seed: &SeedS, views: &Views) -> Result<Vec<f64>> {
    let buckets = (hp.p as u64).pow(hp.m_prime_len() as u32) as usize;
    let infos: Vec<FieldVec> = FieldVec::enumerate(hp.n1, hp.p).collect();
    let mut which = Vec::with_capacity(infos.len());
    for u in &infos {
        which.push(f_s(seed, u)?.to_index() as usize);
    }
    let per = infos.len() as f64 / buckets as f64;
    match views {
        Views::Classical(d) => {
            let k = d[0].len();
            let mut cond = vec![vec![0.0; k]; buckets];
            let mut avg = vec![0.0; k];
            for (row, &b) in d.iter().zip(&which) {
                for e in 0..k {
                    cond[b][e] += row[e] / per;
                    avg[e] += row[e] / infos.len() as f64;
                }
            }
            Ok(cond
                .iter()
                .map(|r| r.iter().zip(&avg).map(|(a, b)| (a - b).abs()).sum())
                .collect())
        }
        Views::Quantum(states) => {
            let d = states[0].nrows();
            let mut cond = vec![CMat::zeros(d, d); buckets];
            let mut avg = CMat::zeros(d, d);
            for (st, &b) in states.iter().zip(&which) {
                cond[b] += st * c(1.0 / per);
                avg += st * c(1.0 / infos.len() as f64);
            }
            Ok(cond
                .iter()
                .map(|r| trace_norm_hermitian(&(r - &avg)))
                .collect())
        }
    }
}

/// `E_S ‖tau_{M'E|S} - P_{M'} ⊗ tau_{E|S}‖_1` for uniform `M'` and `L2`, by enumeration.
pub fn exact_leakage(code: &dyn LinearCode, hp: &HashParams, eve: &EveChannel) -> Result<f64> {
    check_code_params(code, hp)?;
    check_enumeration(hp)?;
    let v = views(code, eve)?;
    let seeds = seed_count(hp);
    let len = SeedS::zero(*hp).entries().len();
    let mut total = 0.0;
    for s in 0..seeds {
        let seed = SeedS::new(*hp, FieldVec::from_index(s, len, hp.p))?;
        let per = per_message(hp, &seed, &v)?;
        total += per.iter().sum::<f64>() / per.len() as f64;
    }
    Ok(total / seeds as f64)
}

/// `‖tau_{E|m'} - tau_E‖_1` for every `M'` (in `FieldVec::to_index` order) under one seed.
pub fn per_message_leakage(
    code: &dyn LinearCode,
    seed: &SeedS,
    eve: &EveChannel,
) -> Result<Vec<f64>> {
    let hp = seed.params();
    check_code_params(code, &hp)?;
    check_enumeration(&hp)?;
    per_message(&hp, seed, &views(code, eve)?)
}

/// Value of the leakage bound and the `t` attaining it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeakageBound {
    pub value: f64,
    pub t: f64,
}

/// `min(2, min_t 2^{(1-t)/(1+t)} 2^{t/(1+t) (I_{1+t}(X;E) - log2 |L2|)})` with `X`
/// uniform on the code and `I` the sandwiched mutual information (Sibson's form for
/// classical `W_E`).
pub fn leakage_bound(
    code: &dyn LinearCode,
    hp: &HashParams,
    eve: &EveChannel,
    grid: &TGrid,
) -> Result<LeakageBound> {
    check_code_params(code, hp)?;
    let v = views(code, eve)?;
    let log_l2 = hp.sacrifice() as f64 * (hp.p as f64).log2();
    let info = |t: f64| -> Result<f64> {
        match &v {
            Views::Classical(rows) => {
                let q = vec![1.0 / rows.len() as f64; rows.len()];
                sibson_info(&q, rows, 1.0 + t)
            }
            Views::Quantum(states) => {
                let dims = vec![states[0].nrows()];
                let family: Vec<DensityMatrix> = states
                    .iter()
                    .map(|s| DensityMatrix::raw(dims.clone(), s.clone()))
                    .collect();
                let q = vec![1.0 / family.len() as f64; family.len()];
                cq_sandwiched_info_down(&family, &q, 1.0 + t)
            }
        }
    };
    let failure = std::cell::RefCell::new(None);
    let (t, log_val) = grid.minimize(|t| match info(t) {
        Ok(i) => (1.0 - t) / (1.0 + t) + t / (1.0 + t) * (i - log_l2),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::INFINITY
        }
    });
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(LeakageBound {
        value: log_val.exp2().min(2.0),
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qexact::purify;
    use approx::assert_abs_diff_eq;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn fv(v: &[u32], p: u32) -> FieldVec {
        FieldVec::new(v.to_vec(), p).unwrap()
    }

    fn dep(mix: f64) -> PauliDist {
        PauliDist::depolarizing(mix, 2).unwrap()
    }

    fn noiseless_eve(p: u32) -> EveChannel {
        let k = (p * p) as usize;
        EveChannel::Classical(
            (0..k)
                .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    fn additive_eve(d: &PauliDist) -> EveChannel {
        EveChannel::Classical(crate::bounds::additive_channel(d))
    }

    #[test]
    fn baseline_codes_conform() {
        let mut r = rng(1);
        let noise = dep(0.1);
        check_conformance(&IdentityCode::new(2, 3).unwrap(), &mut r).unwrap();
        check_conformance(&RepetitionCode::new(2, 8, 4, &noise).unwrap(), &mut r).unwrap();
        check_conformance(&RepetitionCode::new(2, 3, 3, &noise).unwrap(), &mut r).unwrap();
        let d3 = PauliDist::depolarizing(0.1, 3).unwrap();
        check_conformance(&RepetitionCode::new(3, 2, 2, &d3).unwrap(), &mut r).unwrap();
        for (p, n, n1) in [(2, 4, 5), (3, 3, 2), (2, 1, 2)] {
            let d = PauliDist::depolarizing(0.1, p).unwrap();
            check_conformance(
                &GeneratorCode::random(p, n, n1, &d, &mut r).unwrap(),
                &mut r,
            )
            .unwrap();
        }
        assert!(GeneratorCode::random(2, 5, 3, &noise, &mut r).is_err());
        assert!(GeneratorCode::random(5, 2, 3, &PauliDist::uniform(5).unwrap(), &mut r).is_err());
        assert!(RepetitionCode::new(2, 3, 4, &noise).is_err());
    }

    struct Broken;
    impl LinearCode for Broken {
        fn p(&self) -> u32 {
            2
        }
        fn n(&self) -> usize {
            1
        }
        fn n1(&self) -> usize {
            2
        }
        fn encode(&self, info: &FieldVec) -> Result<FieldVec> {
            // drops the second symbol
            FieldVec::new(vec![info.values()[0], 0], 2)
        }
        fn decode(&self, r: &FieldVec) -> Result<FieldVec> {
            Ok(r.clone())
        }
        fn name(&self) -> String {
            "broken".into()
        }
    }

    #[test]
    fn conformance_rejects_non_injective_codes() {
        assert!(matches!(
            check_conformance(&Broken, &mut rng(2)),
            Err(Error::Code(_))
        ));
        let g = vec![vec![1, 0], vec![1, 0]];
        assert!(GeneratorCode::new(2, 1, g, &dep(0.1)).is_err());
    }

    #[test]
    fn code_spec_parsing() {
        assert_eq!("identity".parse::<CodeSpec>().unwrap(), CodeSpec::Identity);
        assert_eq!(
            "repetition:4".parse::<CodeSpec>().unwrap(),
            CodeSpec::Repetition(4)
        );
        assert_eq!(
            "random:3:9".parse::<CodeSpec>().unwrap(),
            CodeSpec::RandomLinear { n1: 3, seed: 9 }
        );
        assert!("polar".parse::<CodeSpec>().is_err());
        assert!("repetition:x".parse::<CodeSpec>().is_err());
        let code = CodeSpec::Repetition(4).build(2, 8, &dep(0.05)).unwrap();
        assert_eq!((code.n(), code.n1()), (8, 4));
    }

    #[test]
    fn repetition_ml_decoding() {
        let code = RepetitionCode::new(2, 2, 4, &dep(0.1)).unwrap();
        let w = code.encode(&fv(&[1], 2)).unwrap();
        assert_eq!(w.values(), &[1, 1, 1, 1]);
        assert_eq!(code.decode(&fv(&[1, 0, 1, 1], 2)).unwrap().values(), &[1]);
        assert_eq!(code.decode(&fv(&[0, 0, 1, 0], 2)).unwrap().values(), &[0]);
        // with pure X noise, a flipped x on both pairs is likelier than flipped z's
        let xnoise = PauliDist::new(2, vec![0.7, 0.0, 0.3, 0.0]).unwrap();
        let code = RepetitionCode::new(2, 2, 4, &xnoise).unwrap();
        assert_eq!(code.decode(&fv(&[0, 1, 0, 1], 2)).unwrap().values(), &[1]);
    }

    #[test]
    fn channel_sampling() {
        let mut r = rng(3);
        let id = ClassicalChannelWc::new(PauliDist::identity(2).unwrap()).unwrap();
        let w = fv(&[1, 0, 1, 1], 2);
        assert_eq!(id.sample(&w, &mut r).unwrap(), w);

        let d = dep(0.05);
        let ch = ClassicalChannelWc::new(d.convolve(&d).unwrap()).unwrap();
        let draws = 100_000;
        let errors = (0..draws)
            .filter(|_| ch.sample_noise(&mut r) != (0, 0))
            .count() as f64;
        let q = 0.073125;
        let sigma = (q * (1.0 - q) / draws as f64).sqrt();
        assert!((errors / draws as f64 - q).abs() < 3.0 * sigma);

        let u = ClassicalChannelWc::new(PauliDist::uniform(2).unwrap()).unwrap();
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            let out = u.sample(&fv(&[1, 1], 2), &mut r).unwrap();
            counts[(out.values()[0] * 2 + out.values()[1]) as usize] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - 2500.0).powi(2) / 2500.0)
            .sum();
        assert!(chi2 < 16.27, "chi2 = {chi2}");
        assert!(ch.sample(&fv(&[1, 0, 1], 2), &mut r).is_err());
    }

    #[test]
    fn encode_examples() {
        let hp = HashParams::new(2, 4, 1, 1).unwrap();
        let code = IdentityCode::new(2, 2).unwrap();
        let seed = SeedS::zero(hp);
        let w =
            wiretap_encode_with(&code, &seed, &fv(&[1], 2), &fv(&[0], 2), &fv(&[0, 0], 2)).unwrap();
        assert_eq!(w.values(), &[0, 1, 0, 0]);
        let mut r = rng(4);
        for _ in 0..50 {
            let seed = SeedS::random(hp, &mut r);
            let (m, y) = (
                FieldVec::random(1, 2, &mut r),
                FieldVec::random(1, 2, &mut r),
            );
            let w = wiretap_encode(&code, &seed, &m, &y, &mut r).unwrap();
            assert_eq!(
                wiretap_decode(&code, &seed, &w).unwrap(),
                y.concat(&m).unwrap()
            );
        }
        let bad = HashParams::new(2, 3, 1, 1).unwrap();
        assert!(wiretap_encode_with(
            &code,
            &SeedS::zero(bad),
            &fv(&[1], 2),
            &fv(&[0], 2),
            &fv(&[0], 2)
        )
        .is_err());
    }

    #[test]
    fn preimages_are_uniform() {
        // p = 2, n1 = 3, n2 + n3 = 2: every (Y, M) owns two codewords, each hit once per L2
        let hp = HashParams::new(2, 3, 1, 1).unwrap();
        let mut r = rng(5);
        let code = GeneratorCode::random(2, 2, 3, &dep(0.1), &mut r).unwrap();
        for s in 0..4u64 {
            let seed = SeedS::new(hp, FieldVec::from_index(s, 2, 2)).unwrap();
            let mut hits = std::collections::HashMap::new();
            for mp in FieldVec::enumerate(2, 2) {
                let (y, m) = mp.split_at(1).unwrap();
                for l2 in FieldVec::enumerate(1, 2) {
                    let w = wiretap_encode_with(&code, &seed, &m, &y, &l2).unwrap();
                    assert_eq!(wiretap_decode(&code, &seed, &w).unwrap(), mp);
                    *hits.entry(w.values().to_vec()).or_insert(0) += 1;
                }
            }
            // every codeword appears exactly once: balanced over the code
            assert_eq!(hits.len(), 8);
            assert!(hits.values().all(|&c| c == 1));
        }
    }

    #[test]
    fn decoding_error_never_exceeds_code_error() {
        let d = dep(0.1);
        let ch = ClassicalChannelWc::new(d.convolve(&d).unwrap()).unwrap();
        let mut r = rng(6);
        let codes: Vec<Box<dyn LinearCode>> = vec![
            Box::new(IdentityCode::new(2, 4).unwrap()),
            Box::new(RepetitionCode::new(2, 4, 2, ch.noise()).unwrap()),
            Box::new(GeneratorCode::random(2, 4, 4, ch.noise(), &mut r).unwrap()),
        ];
        for code in &codes {
            let hp = HashParams::new(2, code.n1(), 1, 1).unwrap();
            let (mut wt_err, mut ecc_err) = (0, 0);
            for _ in 0..2000 {
                let seed = SeedS::random(hp, &mut r);
                let l = FieldVec::random(code.n1(), 2, &mut r);
                let sent = code.encode(&l).unwrap();
                let got = ch.sample(&sent, &mut r).unwrap();
                let l_hat = code.decode(&got).unwrap();
                let ecc = l_hat != l;
                let wt = f_s(&seed, &l_hat).unwrap() != f_s(&seed, &l).unwrap();
                assert!(!wt || ecc);
                ecc_err += ecc as usize;
                wt_err += wt as usize;
            }
            assert!(wt_err <= ecc_err);
        }
    }

    #[test]
    fn flipped_symbol_under_identity_code() {
        // n = 2, p = 2, n2 = n3 = 1, seed (1, 0, 1): T = [[s1, s0], [s2, s1]] = [[0, 1], [1, 0]]
        let hp = HashParams::new(2, 4, 1, 1).unwrap();
        let seed = SeedS::new(hp, fv(&[1, 0, 1], 2)).unwrap();
        let code = IdentityCode::new(2, 2).unwrap();
        let l = fv(&[0, 0, 0, 0], 2);
        let mut got = l.values().to_vec();
        got[3] = 1;
        let out = wiretap_decode(&code, &seed, &fv(&got, 2)).unwrap();
        assert_eq!(out, f_s(&seed, &fv(&got, 2)).unwrap());
        assert_ne!(out, f_s(&seed, &l).unwrap());
    }

    #[test]
    fn leakage_examples() {
        let hp = HashParams::new(2, 2, 1, 1).unwrap();
        let code = IdentityCode::new(2, 1).unwrap();
        // constant channel: nothing leaks
        let blind = EveChannel::Classical(vec![vec![0.5, 0.5]; 4]);
        assert_abs_diff_eq!(
            exact_leakage(&code, &hp, &blind).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        // no sacrifice and a perfect copy: 2(1 - 1/|M'|)
        let v = exact_leakage(&code, &hp, &noiseless_eve(2)).unwrap();
        assert_abs_diff_eq!(v, 2.0 * (1.0 - 0.25), epsilon = 1e-12);
        let hp1 = HashParams::new(2, 2, 1, 1).unwrap();
        let b = leakage_bound(&code, &hp1, &noiseless_eve(2), &TGrid::standard()).unwrap();
        assert!(b.value >= 1.0);
    }

    #[test]
    fn blind_eve_bound_decays_with_sacrifice() {
        let grid = TGrid::standard();
        let blind = EveChannel::Classical(vec![vec![1.0]; 4]);
        let mut prev = 2.0;
        for n in 1..=3 {
            let code = IdentityCode::new(2, n).unwrap();
            let hp = HashParams::new(2, 2 * n, 1, 1).unwrap();
            let b = leakage_bound(&code, &hp, &blind, &grid).unwrap();
            let sac = hp.sacrifice() as f64;
            let (_, expect) = grid.minimize(|t| (1.0 - t) / (1.0 + t) - t / (1.0 + t) * sac);
            assert_abs_diff_eq!(b.value, expect.exp2().min(2.0), epsilon = 1e-12);
            assert!(b.value <= prev);
            prev = b.value;
        }
    }

    #[test]
    fn bound_dominates_classical_leakage() {
        let grid = TGrid::standard();
        let mut r = rng(7);
        for mix in [0.3, 0.6, 0.9] {
            let eve = additive_eve(&dep(mix));
            for (n, n1) in [(1usize, 2usize), (2, 4), (2, 3)] {
                let code: Box<dyn LinearCode> = if n1 == 2 * n {
                    Box::new(IdentityCode::new(2, n).unwrap())
                } else {
                    Box::new(GeneratorCode::random(2, n, n1, &dep(0.1), &mut r).unwrap())
                };
                let hp = HashParams::new(2, n1, 1, 1).unwrap();
                let exact = exact_leakage(code.as_ref(), &hp, &eve).unwrap();
                let b = leakage_bound(code.as_ref(), &hp, &eve, &grid).unwrap();
                assert!(exact <= b.value + 1e-12, "{exact} > {}", b.value);
            }
        }
    }

    #[test]
    fn bound_dominates_quantum_leakage() {
        let tau = purify(&dep(0.25))
            .unwrap()
            .density()
            .partial_trace(&[0, 2])
            .unwrap();
        let eve = EveChannel::Quantum(tau);
        let code = IdentityCode::new(2, 1).unwrap();
        let hp = HashParams::new(2, 2, 1, 1).unwrap();
        let exact = exact_leakage(&code, &hp, &eve).unwrap();
        let grid = TGrid::log_spaced(0.05, 1.0, 8).unwrap();
        for &t in grid.points() {
            let single = TGrid::from_points(vec![t]).unwrap();
            assert!(exact <= leakage_bound(&code, &hp, &eve, &single).unwrap().value + 1e-9);
        }
        assert!(exact_leakage(
            &IdentityCode::new(2, 3).unwrap(),
            &HashParams::new(2, 6, 1, 1).unwrap(),
            &eve
        )
        .is_err());
    }

    #[test]
    fn quantum_views_match_classical_for_diagonal_tau() {
        // tau_AE = |0><0| ⊗ rho_E: Weyl X flips A, Z acts trivially, so Eve sees x only
        let tau = DensityMatrix::diagonal(vec![2, 1], &[1.0, 0.0]).unwrap();
        let q = exact_leakage(
            &IdentityCode::new(2, 1).unwrap(),
            &HashParams::new(2, 2, 1, 1).unwrap(),
            &EveChannel::Quantum(tau),
        )
        .unwrap();
        let rows = vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
        ];
        let cl = exact_leakage(
            &IdentityCode::new(2, 1).unwrap(),
            &HashParams::new(2, 2, 1, 1).unwrap(),
            &EveChannel::Classical(rows),
        )
        .unwrap();
        assert_abs_diff_eq!(q, cl, epsilon = 1e-10);
    }

    #[test]
    fn symmetric_channel_leakage_is_message_independent() {
        let eve = additive_eve(&dep(0.4));
        let code = IdentityCode::new(2, 2).unwrap();
        let hp = HashParams::new(2, 4, 1, 1).unwrap();
        let mut r = rng(8);
        for _ in 0..5 {
            let seed = SeedS::random(hp, &mut r);
            let per = per_message_leakage(&code, &seed, &eve).unwrap();
            for v in &per {
                assert_abs_diff_eq!(*v, per[0], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn enumeration_cap() {
        let code = IdentityCode::new(3, 6).unwrap();
        let hp = HashParams::new(3, 12, 1, 1).unwrap();
        assert!(matches!(
            exact_leakage(&code, &hp, &noiseless_eve(3)),
            Err(Error::SizeCap { .. })
        ));
    }
}
