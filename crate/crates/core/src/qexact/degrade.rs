//! Degrading channel `B -> E` for a maximally correlated `tau_AB`.
//!
//! With `tau_AB = sum a_{jj'} |v_j v_j><v_j' v_j'|` and `a = sum_k s_k b_k b_k^dagger`,
//! the purification is `sum_k sqrt(s_k) |b_k>_AB |k>_E` and
//! `Gamma(rho) = sum_j <v_j|rho|v_j> |u_j><u_j|` with
//! `|u_j> ∝ sum_k sqrt(s_k) b_{k,j} |k>` maps `tau_AB` onto `tau_AE`.

use super::linalg::{c, dagger, eigh, kron, max_abs, CMat, CVec};
use super::DensityMatrix;
use crate::error::{Error, Result};

const CORRELATION_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct DegradingMap {
    kraus: Vec<CMat>,
    tau_ae: DensityMatrix,
}

impl DegradingMap {
    /// Kraus operators `|u_j><v_j^B|`, each `d_E x d_B`.
    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// `tau_AE` of the purification used to build the map.
    pub fn tau_ae(&self) -> &DensityMatrix {
        &self.tau_ae
    }

    /// `Gamma` on a single-system state of `B`.
    pub fn apply(&self, rho_b: &DensityMatrix) -> Result<DensityMatrix> {
        let db = self.kraus[0].ncols();
        if rho_b.dim() != db {
            return Err(Error::DimensionMismatch(format!(
                "input has dim {}, map expects {db}",
                rho_b.dim()
            )));
        }
        let de = self.kraus[0].nrows();
        let out = self.kraus.iter().fold(CMat::zeros(de, de), |acc, k| {
            acc + k * rho_b.matrix() * dagger(k)
        });
        Ok(DensityMatrix::raw(vec![de], out))
    }

    /// `id_A ⊗ Gamma` on a state of `A ⊗ B`.
    pub fn apply_to_b(&self, rho_ab: &DensityMatrix) -> Result<DensityMatrix> {
        let [da, db] = rho_ab.dims() else {
            return Err(Error::DimensionMismatch(
                "expected a bipartite A ⊗ B state".into(),
            ));
        };
        let (da, db) = (*da, *db);
        if db != self.kraus[0].ncols() {
            return Err(Error::DimensionMismatch(format!(
                "B has dim {db}, map expects {}",
                self.kraus[0].ncols()
            )));
        }
        let de = self.kraus[0].nrows();
        let id = CMat::identity(da, da);
        let mut out = CMat::zeros(da * de, da * de);
        for k in &self.kraus {
            let full = kron(&id, k);
            out += &full * rho_ab.matrix() * dagger(&full);
        }
        Ok(DensityMatrix::raw(vec![da, de], out))
    }
}

/// Builds the degrading map of `tau_AB` in the product basis whose columns are `basis_a`, `basis_b`.
pub fn degrading_map(
    tau_ab: &DensityMatrix,
    basis_a: &CMat,
    basis_b: &CMat,
) -> Result<DegradingMap> {
    let [da, db] = tau_ab.dims() else {
        return Err(Error::DimensionMismatch(
            "expected a bipartite A ⊗ B state".into(),
        ));
    };
    let d = *da;
    if *db != d || basis_a.shape() != (d, d) || basis_b.shape() != (d, d) {
        return Err(Error::DimensionMismatch(
            "maximally correlated form needs equal dims and square bases".into(),
        ));
    }
    for basis in [basis_a, basis_b] {
        if max_abs(&(dagger(basis) * basis - CMat::identity(d, d))) > 1e-10 {
            return Err(Error::InvalidState("basis is not orthonormal".into()));
        }
    }
    let pair = |j: usize| CVec::from_fn(d * d, |r, _| basis_a[(r / d, j)] * basis_b[(r % d, j)]);
    let pairs: Vec<CVec> = (0..d).map(pair).collect();
    let a = CMat::from_fn(d, d, |j, k| {
        (pairs[j].adjoint() * tau_ab.matrix() * &pairs[k])[(0, 0)]
    });
    let rebuilt = (0..d)
        .flat_map(|j| (0..d).map(move |k| (j, k)))
        .fold(CMat::zeros(d * d, d * d), |acc, (j, k)| {
            acc + &pairs[j] * pairs[k].adjoint() * a[(j, k)]
        });
    if max_abs(&(&rebuilt - tau_ab.matrix())) > CORRELATION_TOL {
        return Err(Error::NotMaximallyCorrelated);
    }

    let (s, b) = eigh(&a);
    let de = d;
    let mut kraus = Vec::with_capacity(d);
    let mut tau_ae = CMat::zeros(d * de, d * de);
    for j in 0..d {
        // unnormalized u_j: sum_k sqrt(s_k) b_{j,k} |k>, with b_k the k-th column of b
        let raw = CVec::from_fn(de, |k, _| b[(j, k)] * c(s[k].max(0.0).sqrt()));
        let t = raw.norm_squared();
        let v_a = basis_a.column(j).into_owned();
        tau_ae += kron(&(&v_a * v_a.adjoint()), &(&raw * raw.adjoint()));
        let u = if t > 1e-14 {
            raw / c(t.sqrt())
        } else {
            let mut e = CVec::zeros(de);
            e[0] = c(1.0);
            e
        };
        kraus.push(&u * basis_b.column(j).adjoint());
    }
    Ok(DegradingMap {
        kraus,
        tau_ae: DensityMatrix::raw(vec![d, de], tau_ae),
    })
}
