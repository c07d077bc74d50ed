//! Pauli-error distributions over `F_p^2` and the classical entropy functionals.
//!
//! A [`PauliDist`] stores `P_XZ(x, z)` in row-major `(x, z)` order, index `x * p + z`.
//! All logarithms are base 2.

use num_complex::Complex;
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf::{check_prime, FieldElem};
use crate::real::Real;

fn normalize<T: Real>(mut probs: Vec<T>) -> Result<Vec<T>> {
    if let Some(bad) = probs.iter().find(|v| !v.is_finite() || **v < T::zero()) {
        return Err(Error::InvalidDistribution(format!(
            "entry {bad} is negative or not finite"
        )));
    }
    let total: T = probs.iter().copied().sum();
    if (total - T::one()).abs() > T::norm_tolerance() {
        return Err(Error::InvalidDistribution(format!(
            "entries sum to {total}"
        )));
    }
    for v in probs.iter_mut() {
        *v = *v / total;
    }
    Ok(probs)
}

/// Probability distribution on `F_p^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliDist<T: Real = f64> {
    p: u32,
    probs: Vec<T>,
}

impl<T: Real> PauliDist<T> {
    /// Builds from row-major `(x, z)` weights; renormalizes if within tolerance of 1.
    pub fn new(p: u32, probs: Vec<T>) -> Result<Self> {
        check_prime(p)?;
        let n = (p * p) as usize;
        if probs.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: probs.len(),
            });
        }
        Ok(Self {
            p,
            probs: normalize(probs)?,
        })
    }

    /// Infers `p` from a flat array of length `p^2`.
    pub fn from_flat(probs: Vec<T>) -> Result<Self> {
        let p = (probs.len() as f64).sqrt().round() as u32;
        if (p * p) as usize != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "length {} is not a square",
                probs.len()
            )));
        }
        Self::new(p, probs)
    }

    pub fn point_mass(p: u32, x: u32, z: u32) -> Result<Self> {
        check_prime(p)?;
        if x >= p || z >= p {
            return Err(Error::InvalidParameter(format!(
                "({x}, {z}) outside F_{p}^2"
            )));
        }
        let mut probs = vec![T::zero(); (p * p) as usize];
        probs[(x * p + z) as usize] = T::one();
        Ok(Self { p, probs })
    }

    pub fn identity(p: u32) -> Result<Self> {
        Self::point_mass(p, 0, 0)
    }

    pub fn uniform(p: u32) -> Result<Self> {
        check_prime(p)?;
        let n = (p * p) as usize;
        Ok(Self {
            p,
            probs: vec![T::one() / T::from_usize_lossy(n); n],
        })
    }

    /// Depolarizing channel `(1 - mix) rho + mix I/p` expanded in the Weyl basis.
    pub fn depolarizing(mix: T, p: u32) -> Result<Self> {
        check_prime(p)?;
        if !(mix >= T::zero() && mix <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "depolarizing mix {mix} outside [0, 1]"
            )));
        }
        let n = (p * p) as usize;
        let each = mix / T::from_usize_lossy(n);
        let mut probs = vec![each; n];
        probs[0] = T::one() - mix + each;
        Ok(Self { p, probs })
    }

    /// A random distribution (normalized exponentials, i.e. flat Dirichlet).
    pub fn random<R: Rng + ?Sized>(p: u32, rng: &mut R) -> Result<Self> {
        check_prime(p)?;
        let n = (p * p) as usize;
        let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        Ok(Self {
            p,
            probs: raw.iter().map(|v| T::lit(v / total)).collect(),
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    #[inline]
    pub fn get(&self, x: u32, z: u32) -> T {
        self.probs[(x * self.p + z) as usize]
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            Err(Error::ModulusMismatch(self.p, other.p))
        } else {
            Ok(())
        }
    }

    /// `(self * other)(x, z) = sum self(x', z') other(x - x', z - z')`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let p = self.p;
        let mut out = vec![T::zero(); (p * p) as usize];
        for x1 in 0..p {
            for z1 in 0..p {
                let a = self.get(x1, z1);
                if a == T::zero() {
                    continue;
                }
                for x2 in 0..p {
                    for z2 in 0..p {
                        let idx = ((x1 + x2) % p * p + (z1 + z2) % p) as usize;
                        out[idx] = out[idx] + a * other.get(x2, z2);
                    }
                }
            }
        }
        Ok(Self { p, probs: out })
    }

    /// `F_{x,z}[P](x', z') = P(x' - x, z' - z)`.
    pub fn shift(&self, x: FieldElem, z: FieldElem) -> Result<Self> {
        for e in [x, z] {
            if e.modulus() != self.p {
                return Err(Error::ModulusMismatch(self.p, e.modulus()));
            }
        }
        let p = self.p;
        let mut out = vec![T::zero(); (p * p) as usize];
        for xs in 0..p {
            for zs in 0..p {
                out[((xs + x.value()) % p * p + (zs + z.value()) % p) as usize] = self.get(xs, zs);
            }
        }
        Ok(Self { p, probs: out })
    }

    /// `P(-x, z)`, the distribution seen after transposing a Pauli channel to the other half of `|Phi>`.
    pub fn negate_x(&self) -> Self {
        let p = self.p;
        let mut out = vec![T::zero(); (p * p) as usize];
        for x in 0..p {
            for z in 0..p {
                out[(x * p + z) as usize] = self.get((p - x) % p, z);
            }
        }
        Self { p, probs: out }
    }

    /// Distribution of `l X - k Z`.
    pub fn marginal(&self, l: FieldElem, k: FieldElem) -> Result<MarginalDist<T>> {
        for e in [l, k] {
            if e.modulus() != self.p {
                return Err(Error::ModulusMismatch(self.p, e.modulus()));
            }
        }
        if l.is_zero() && k.is_zero() {
            return Err(Error::InvalidParameter("marginal direction (0, 0)".into()));
        }
        let p = self.p as u64;
        let mut out = vec![T::zero(); self.p as usize];
        for x in 0..p {
            for z in 0..p {
                let s = (l.value() as u64 * x + (p - k.value() as u64) * z) % p;
                out[s as usize] = out[s as usize] + self.get(x as u32, z as u32);
            }
        }
        Ok(MarginalDist {
            p: self.p,
            probs: out,
        })
    }

    /// `E[omega^(l X - k Z)]` with `omega = exp(2 pi i / p)`.
    pub fn char_value(&self, l: FieldElem, k: FieldElem) -> Result<Complex<T>> {
        for e in [l, k] {
            if e.modulus() != self.p {
                return Err(Error::ModulusMismatch(self.p, e.modulus()));
            }
        }
        let p = self.p as u64;
        let mut acc = Complex::new(T::zero(), T::zero());
        for x in 0..p {
            for z in 0..p {
                let s = (l.value() as u64 * x + (p - k.value() as u64) * z) % p;
                acc = acc + root_of_unity::<T>(self.p, s) * self.get(x as u32, z as u32);
            }
        }
        Ok(acc)
    }

    pub fn shannon(&self) -> T {
        shannon(&self.probs)
    }

    pub fn renyi(&self, alpha: T) -> Result<T> {
        renyi_entropy(&self.probs, alpha)
    }

    pub fn total_variation(&self, other: &Self) -> Result<T> {
        self.check_same(other)?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (*a - *b).abs())
            .sum::<T>()
            / T::lit(2.0))
    }

    pub fn cast<U: Real>(&self) -> PauliDist<U> {
        PauliDist {
            p: self.p,
            probs: self
                .probs
                .iter()
                .map(|v| U::lit(v.to_f64().unwrap()))
                .collect(),
        }
    }
}

impl<T: Real + Serialize> Serialize for PauliDist<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.probs.serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for PauliDist<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let flat = Vec::<T>::deserialize(deserializer)?;
        PauliDist::from_flat(flat).map_err(D::Error::custom)
    }
}

/// Probability distribution on `F_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalDist<T: Real = f64> {
    p: u32,
    probs: Vec<T>,
}

impl<T: Real> MarginalDist<T> {
    pub fn new(p: u32, probs: Vec<T>) -> Result<Self> {
        check_prime(p)?;
        if probs.len() != p as usize {
            return Err(Error::LengthMismatch {
                expected: p as usize,
                actual: probs.len(),
            });
        }
        Ok(Self {
            p,
            probs: normalize(probs)?,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// `sum_s omega^(a s) P(s)`.
    pub fn char_at(&self, a: u32) -> Complex<T> {
        let p = self.p as u64;
        self.probs
            .iter()
            .enumerate()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (s, &v)| {
                acc + root_of_unity::<T>(self.p, (a as u64 * s as u64) % p) * v
            })
    }
}

/// `omega^k` for `omega = exp(2 pi i / p)`.
pub fn root_of_unity<T: Real>(p: u32, k: u64) -> Complex<T> {
    let k = k % p as u64;
    let theta = T::TAU() * T::from_u64(k).unwrap() / T::from_u32(p).unwrap();
    Complex::new(theta.cos(), theta.sin())
}

pub fn shannon<T: Real>(probs: &[T]) -> T {
    let floor = T::prob_floor();
    -probs
        .iter()
        .filter(|&&v| v > floor)
        .map(|&v| v * v.log2())
        .sum::<T>()
}

/// `H_alpha(P) = log2(sum P^alpha) / (1 - alpha)`; `alpha = 1` gives Shannon entropy.
pub fn renyi_entropy<T: Real>(probs: &[T], alpha: T) -> Result<T> {
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Renyi order {alpha} must be positive and finite"
        )));
    }
    if (alpha - T::one()).abs() < T::lit(1e-12) {
        return Ok(shannon(probs));
    }
    let floor = T::prob_floor();
    let s: T = probs
        .iter()
        .filter(|&&v| v > floor)
        .map(|&v| v.powf(alpha))
        .sum();
    Ok(s.log2() / (T::one() - alpha))
}
