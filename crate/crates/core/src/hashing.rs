//! Toeplitz universal hash families used for privacy amplification and error verification.
//!
//! `f_S : F_p^{n1} -> F_p^{n2+n3}` maps `L = (L1, L2)` to `M' = L1 + T(S) L2`, where
//! `L1` holds the first `n2 + n3` symbols. `M'` is laid out as `(Y, M)`: the first `n3`
//! symbols are the verification key `Y`, the next `n2` the message `M`.
//!
//! `g_{S'}(M, Y) = Y + T(S') M` is the verification tag.

use num_rational::Ratio;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::{check_prime, toeplitz_apply, FieldVec, ToeplitzSeed};

/// Block lengths of the hashing layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashParams {
    pub p: u32,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl HashParams {
    /// Requires `n2, n3 >= 1` and `n1 >= n2 + n3`. `n1 = n2 + n3` means no symbols are sacrificed.
    pub fn new(p: u32, n1: usize, n2: usize, n3: usize) -> Result<Self> {
        check_prime(p)?;
        if n2 == 0 || n3 == 0 {
            return Err(Error::InvalidParameter(format!(
                "n2 = {n2} and n3 = {n3} must be positive"
            )));
        }
        if n1 < n2 + n3 {
            return Err(Error::InvalidParameter(format!(
                "n1 = {n1} is below n2 + n3 = {}",
                n2 + n3
            )));
        }
        Ok(Self { p, n1, n2, n3 })
    }

    /// `n2 + n3`, the length of `M'`.
    pub fn m_prime_len(&self) -> usize {
        self.n2 + self.n3
    }

    /// `n1 - (n2 + n3)`, the length of the randomizer `L2`.
    pub fn sacrifice(&self) -> usize {
        self.n1 - self.m_prime_len()
    }
}

fn check_vec(v: &FieldVec, len: usize, p: u32) -> Result<()> {
    if v.modulus() != p {
        return Err(Error::ModulusMismatch(p, v.modulus()));
    }
    if v.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: v.len(),
        });
    }
    Ok(())
}

/// Seed of `f_S`: `n1 - 1` symbols generating the `(n2+n3) x (n1-n2-n3)` Toeplitz matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedS {
    params: HashParams,
    entries: FieldVec,
}

impl SeedS {
    pub fn new(params: HashParams, entries: FieldVec) -> Result<Self> {
        check_vec(&entries, params.n1 - 1, params.p)?;
        Ok(Self { params, entries })
    }

    pub fn random<R: Rng + ?Sized>(params: HashParams, rng: &mut R) -> Self {
        Self {
            params,
            entries: FieldVec::random(params.n1 - 1, params.p, rng),
        }
    }

    pub fn zero(params: HashParams) -> Self {
        Self {
            params,
            entries: FieldVec::from_raw(vec![0; params.n1 - 1], params.p),
        }
    }

    pub fn params(&self) -> HashParams {
        self.params
    }

    pub fn entries(&self) -> &FieldVec {
        &self.entries
    }

    /// `T(S) x` for `x` of length `n1 - n2 - n3`.
    fn apply(&self, x: &FieldVec) -> Result<FieldVec> {
        let rows = self.params.m_prime_len();
        let cols = self.params.sacrifice();
        check_vec(x, cols, self.params.p)?;
        if cols == 0 {
            return FieldVec::zeros(rows, self.params.p);
        }
        // the generator uses only the last rows + cols - 1 = n1 - 1 symbols, i.e. all of them
        let seed = ToeplitzSeed::new(self.entries.clone(), rows, cols)?;
        toeplitz_apply(&seed, x)
    }
}

/// Seed of `g_{S'}`: `n2 + n3 - 1` symbols generating the `n3 x n2` Toeplitz matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedSPrime {
    params: HashParams,
    seed: ToeplitzSeed,
}

impl SeedSPrime {
    pub fn new(params: HashParams, entries: FieldVec) -> Result<Self> {
        check_vec(&entries, params.n2 + params.n3 - 1, params.p)?;
        Ok(Self {
            params,
            seed: ToeplitzSeed::new(entries, params.n3, params.n2)?,
        })
    }

    pub fn random<R: Rng + ?Sized>(params: HashParams, rng: &mut R) -> Self {
        let entries = FieldVec::random(params.n2 + params.n3 - 1, params.p, rng);
        Self::new(params, entries).expect("lengths consistent")
    }

    pub fn zero(params: HashParams) -> Self {
        let entries = FieldVec::from_raw(vec![0; params.n2 + params.n3 - 1], params.p);
        Self::new(params, entries).expect("lengths consistent")
    }

    pub fn params(&self) -> HashParams {
        self.params
    }

    pub fn entries(&self) -> &FieldVec {
        self.seed.entries()
    }
}

/// `M' = L1 + T(S) L2`.
pub fn f_s(seed: &SeedS, l: &FieldVec) -> Result<FieldVec> {
    let hp = seed.params;
    check_vec(l, hp.n1, hp.p)?;
    let (l1, l2) = l.split_at(hp.m_prime_len())?;
    l1.add(&seed.apply(&l2)?)
}

/// Splits `M'` into `(Y, M)`.
pub fn split_m_prime(params: &HashParams, m_prime: &FieldVec) -> Result<(FieldVec, FieldVec)> {
    check_vec(m_prime, params.m_prime_len(), params.p)?;
    m_prime.split_at(params.n3)
}

/// Joins `(Y, M)` into `M'`.
pub fn join_m_prime(params: &HashParams, y: &FieldVec, m: &FieldVec) -> Result<FieldVec> {
    check_vec(y, params.n3, params.p)?;
    check_vec(m, params.n2, params.p)?;
    y.concat(m)
}

/// `C = Y + T(S') M`.
pub fn g_sprime(seed: &SeedSPrime, m: &FieldVec, y: &FieldVec) -> Result<FieldVec> {
    let hp = seed.params;
    check_vec(m, hp.n2, hp.p)?;
    check_vec(y, hp.n3, hp.p)?;
    y.add(&toeplitz_apply(&seed.seed, m)?)
}

/// The unique `Y` with `g_{S'}(M, Y) = C`.
pub fn y_of(m: &FieldVec, seed: &SeedSPrime, c: &FieldVec) -> Result<FieldVec> {
    let hp = seed.params;
    check_vec(m, hp.n2, hp.p)?;
    check_vec(c, hp.n3, hp.p)?;
    c.sub(&toeplitz_apply(&seed.seed, m)?)
}

/// `psi_S(M, Y, L2) = ((Y, M) - T(S) L2, L2)`, a preimage of `(Y, M)` under `f_S`.
pub fn psi_s(seed: &SeedS, m: &FieldVec, y: &FieldVec, l2: &FieldVec) -> Result<FieldVec> {
    let hp = seed.params;
    let m_prime = join_m_prime(&hp, y, m)?;
    let head = m_prime.sub(&seed.apply(l2)?)?;
    head.concat(l2)
}

/// `Pr_S[f_S(l) = f_S(l')]` over a uniform seed, in closed form.
pub fn collision_probability(
    l: &FieldVec,
    l_prime: &FieldVec,
    params: &HashParams,
) -> Result<Ratio<u64>> {
    check_vec(l, params.n1, params.p)?;
    check_vec(l_prime, params.n1, params.p)?;
    if l == l_prime {
        return Err(Error::InvalidParameter(
            "collision probability needs distinct inputs".into(),
        ));
    }
    let k = params.m_prime_len();
    if l.values()[k..] == l_prime.values()[k..] {
        Ok(Ratio::from_integer(0))
    } else {
        Ok(Ratio::new(1, (params.p as u64).pow(k as u32)))
    }
}

/// Largest seed space [`collision_probability_enumerated`] will walk.
pub const ENUMERATION_CAP: u64 = 1_000_000;

/// Same probability by walking every seed.
pub fn collision_probability_enumerated(
    l: &FieldVec,
    l_prime: &FieldVec,
    params: &HashParams,
) -> Result<Ratio<u64>> {
    check_vec(l, params.n1, params.p)?;
    check_vec(l_prime, params.n1, params.p)?;
    if l == l_prime {
        return Err(Error::InvalidParameter(
            "collision probability needs distinct inputs".into(),
        ));
    }
    let total = (params.p as u64)
        .checked_pow((params.n1 - 1) as u32)
        .unwrap_or(u64::MAX);
    if total > ENUMERATION_CAP {
        return Err(Error::SizeCap {
            what: "seed space",
            size: total as usize,
            cap: ENUMERATION_CAP as usize,
        });
    }
    let mut hits = 0u64;
    for entries in FieldVec::enumerate(params.n1 - 1, params.p) {
        let seed = SeedS::new(*params, entries)?;
        if f_s(&seed, l)? == f_s(&seed, l_prime)? {
            hits += 1;
        }
    }
    Ok(Ratio::new(hits, total))
}
