//! Prime-field arithmetic, vectors over `F_p`, and Toeplitz matrix application.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p as u64 {
        if (p as u64).is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_prime(p: u32) -> Result<u32> {
    if is_prime(p) {
        Ok(p)
    } else {
        Err(Error::NotPrime(p))
    }
}

/// An element of `F_p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElem {
    value: u32,
    modulus: u32,
}

impl FieldElem {
    pub fn new(value: u64, modulus: u32) -> Result<Self> {
        check_prime(modulus)?;
        if value >= modulus as u64 {
            return Err(Error::OutOfRange { value, modulus });
        }
        Ok(Self {
            value: value as u32,
            modulus,
        })
    }

    /// Reduces an arbitrary integer into `F_p`.
    pub fn reduce(value: i64, modulus: u32) -> Result<Self> {
        check_prime(modulus)?;
        Ok(Self::reduce_unchecked(value, modulus))
    }

    pub(crate) fn reduce_unchecked(value: i64, modulus: u32) -> Self {
        let v = value.rem_euclid(modulus as i64) as u32;
        Self { value: v, modulus }
    }

    pub fn zero(modulus: u32) -> Self {
        Self { value: 0, modulus }
    }

    pub fn one(modulus: u32) -> Self {
        Self {
            value: 1 % modulus,
            modulus,
        }
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: Self) -> Result<()> {
        if self.modulus != other.modulus {
            Err(Error::ModulusMismatch(self.modulus, other.modulus))
        } else {
            Ok(())
        }
    }

    pub fn try_add(self, other: Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self {
            value: add_mod(self.value, other.value, self.modulus),
            modulus: self.modulus,
        })
    }

    pub fn try_sub(self, other: Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self {
            value: sub_mod(self.value, other.value, self.modulus),
            modulus: self.modulus,
        })
    }

    pub fn try_mul(self, other: Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self {
            value: mul_mod(self.value, other.value, self.modulus),
            modulus: self.modulus,
        })
    }

    pub fn inv(self) -> Result<Self> {
        if self.value == 0 {
            return Err(Error::InverseOfZero);
        }
        Ok(Self {
            value: inv_mod(self.value, self.modulus),
            modulus: self.modulus,
        })
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self.value;
        let mut acc = 1 % self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(acc, base, self.modulus);
            }
            base = mul_mod(base, base, self.modulus);
            e >>= 1;
        }
        Self {
            value: acc,
            modulus: self.modulus,
        }
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// The operator impls panic on modulus mismatch; use the `try_*` methods at API boundaries.
impl Add for FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: Self) -> Self {
        self.try_add(rhs).expect("modulus mismatch")
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(rhs).expect("modulus mismatch")
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(rhs).expect("modulus mismatch")
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> Self {
        Self {
            value: sub_mod(0, self.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

#[inline]
pub(crate) fn add_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 + b as u64) % p as u64) as u32
}

#[inline]
pub(crate) fn sub_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 + p as u64 - b as u64) % p as u64) as u32
}

#[inline]
pub(crate) fn mul_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    // extended Euclid
    let (mut r0, mut r1) = (p as i64, a as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(p as i64) as u32
}

/// A vector over `F_p`. Entries are stored as residues sharing one modulus.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldVec {
    modulus: u32,
    elems: Vec<u32>,
}

impl FieldVec {
    pub fn new(elems: Vec<u32>, modulus: u32) -> Result<Self> {
        check_prime(modulus)?;
        if let Some(&bad) = elems.iter().find(|&&v| v >= modulus) {
            return Err(Error::OutOfRange {
                value: bad as u64,
                modulus,
            });
        }
        Ok(Self { modulus, elems })
    }

    /// Builds a vector by reducing signed integers.
    pub fn from_ints(values: &[i64], modulus: u32) -> Result<Self> {
        check_prime(modulus)?;
        Ok(Self {
            modulus,
            elems: values
                .iter()
                .map(|&v| v.rem_euclid(modulus as i64) as u32)
                .collect(),
        })
    }

    pub(crate) fn from_raw(elems: Vec<u32>, modulus: u32) -> Self {
        debug_assert!(elems.iter().all(|&v| v < modulus));
        Self { modulus, elems }
    }

    pub fn zeros(len: usize, modulus: u32) -> Result<Self> {
        check_prime(modulus)?;
        Ok(Self {
            modulus,
            elems: vec![0; len],
        })
    }

    pub fn random<R: Rng + ?Sized>(len: usize, modulus: u32, rng: &mut R) -> Self {
        Self {
            modulus,
            elems: (0..len).map(|_| rng.random_range(0..modulus)).collect(),
        }
    }

    /// The `index`-th vector in lexicographic order (little-endian digits), used for enumeration.
    pub fn from_index(mut index: u64, len: usize, modulus: u32) -> Self {
        let mut elems = Vec::with_capacity(len);
        for _ in 0..len {
            elems.push((index % modulus as u64) as u32);
            index /= modulus as u64;
        }
        Self { modulus, elems }
    }

    /// Inverse of [`FieldVec::from_index`].
    pub fn to_index(&self) -> u64 {
        self.elems
            .iter()
            .rev()
            .fold(0u64, |acc, &v| acc * self.modulus as u64 + v as u64)
    }

    /// Iterates over all `p^len` vectors of the given length.
    pub fn enumerate(len: usize, modulus: u32) -> impl Iterator<Item = FieldVec> {
        let count = (modulus as u64).pow(len as u32);
        (0..count).map(move |i| FieldVec::from_index(i, len, modulus))
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.elems
    }

    pub fn get(&self, i: usize) -> FieldElem {
        FieldElem {
            value: self.elems[i],
            modulus: self.modulus,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.elems.iter().all(|&v| v == 0)
    }

    fn check_compatible(&self, other: &FieldVec) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus, other.modulus));
        }
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &FieldVec) -> Result<FieldVec> {
        self.check_compatible(other)?;
        let p = self.modulus;
        Ok(Self::from_raw(
            self.elems
                .iter()
                .zip(&other.elems)
                .map(|(&a, &b)| add_mod(a, b, p))
                .collect(),
            p,
        ))
    }

    pub fn sub(&self, other: &FieldVec) -> Result<FieldVec> {
        self.check_compatible(other)?;
        let p = self.modulus;
        Ok(Self::from_raw(
            self.elems
                .iter()
                .zip(&other.elems)
                .map(|(&a, &b)| sub_mod(a, b, p))
                .collect(),
            p,
        ))
    }

    pub fn scale(&self, a: FieldElem) -> Result<FieldVec> {
        if a.modulus != self.modulus {
            return Err(Error::ModulusMismatch(self.modulus, a.modulus));
        }
        Ok(Self::from_raw(
            self.elems
                .iter()
                .map(|&v| mul_mod(v, a.value, self.modulus))
                .collect(),
            self.modulus,
        ))
    }

    pub fn neg(&self) -> FieldVec {
        Self::from_raw(
            self.elems
                .iter()
                .map(|&v| sub_mod(0, v, self.modulus))
                .collect(),
            self.modulus,
        )
    }

    pub fn concat(&self, other: &FieldVec) -> Result<FieldVec> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus, other.modulus));
        }
        let mut elems = self.elems.clone();
        elems.extend_from_slice(&other.elems);
        Ok(Self::from_raw(elems, self.modulus))
    }

    /// Splits into `[0, at)` and `[at, len)`.
    pub fn split_at(&self, at: usize) -> Result<(FieldVec, FieldVec)> {
        if at > self.len() {
            return Err(Error::LengthMismatch {
                expected: at,
                actual: self.len(),
            });
        }
        let (a, b) = self.elems.split_at(at);
        Ok((
            Self::from_raw(a.to_vec(), self.modulus),
            Self::from_raw(b.to_vec(), self.modulus),
        ))
    }
}

impl fmt::Debug for FieldVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} (mod {})", self.elems, self.modulus)
    }
}

/// Generator of a `d1 x d2` Toeplitz matrix: `T[i][j] = V[i - j + d2]` with 1-based indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToeplitzSeed {
    entries: FieldVec,
    rows: usize,
    cols: usize,
}

impl ToeplitzSeed {
    pub fn new(entries: FieldVec, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "Toeplitz shape {rows}x{cols} must be nonempty"
            )));
        }
        if entries.len() != rows + cols - 1 {
            return Err(Error::LengthMismatch {
                expected: rows + cols - 1,
                actual: entries.len(),
            });
        }
        Ok(Self {
            entries,
            rows,
            cols,
        })
    }

    pub fn random<R: Rng + ?Sized>(
        rows: usize,
        cols: usize,
        modulus: u32,
        rng: &mut R,
    ) -> Result<Self> {
        check_prime(modulus)?;
        Self::new(FieldVec::random(rows + cols - 1, modulus, rng), rows, cols)
    }

    pub fn entries(&self) -> &FieldVec {
        &self.entries
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn modulus(&self) -> u32 {
        self.entries.modulus()
    }

    /// Entry at 0-based `(i, j)`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> u32 {
        // 1-based: V_{(i+1) - (j+1) + d2}; shift to 0-based storage.
        self.entries.elems[i + self.cols - 1 - j]
    }

    /// The dense matrix, row-major.
    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j)).collect())
            .collect()
    }
}

/// Multiplies the Toeplitz matrix generated by `seed` with `x`.
///
/// Naive `O(d1 * d2)` product.
pub fn toeplitz_apply(seed: &ToeplitzSeed, x: &FieldVec) -> Result<FieldVec> {
    let p = seed.modulus();
    if x.modulus() != p {
        return Err(Error::ModulusMismatch(p, x.modulus()));
    }
    if x.len() != seed.cols {
        return Err(Error::LengthMismatch {
            expected: seed.cols,
            actual: x.len(),
        });
    }
    let out = (0..seed.rows)
        .map(|i| {
            let acc = (0..seed.cols)
                .map(|j| seed.entry(i, j) as u64 * x.elems[j] as u64)
                .fold(0u64, |a, b| (a + b) % p as u64);
            acc as u32
        })
        .collect();
    Ok(FieldVec::from_raw(out, p))
}
