//! Exact small-dimension quantum oracle.
//!
//! Subsystem 0 is the most significant tensor factor, so a basis index on
//! dims `[d0, d1, ...]` is `i0 * (d1 * ...) + i1 * ... `. Total dimension is
//! capped at [`DIM_CAP`].

mod degrade;
mod divergence;
mod identities;
pub mod linalg;
mod solver;

use rand::Rng;
use rand_distr::StandardNormal;

pub use degrade::{degrading_map, DegradingMap};
pub use divergence::{
    cond_entropy, cond_entropy_down, cond_entropy_up_sandwiched, cq_petz_info_up,
    cq_sandwiched_info_down, leakage_d, petz_divergence, relative_entropy, sandwiched_divergence,
    trace_distance, Leakage,
};
pub use identities::{identity_residuals, IdentityResiduals};
pub use solver::{minimize_sandwiched, SolverReport};

use crate::dists::{root_of_unity, PauliDist};
use crate::error::{Error, Result};
use crate::gf::FieldElem;
use linalg::{c, dagger, eigvalsh, hermitian_defect, kron, CMat, CVec};
use num_complex::Complex64;

pub const DIM_CAP: usize = 256;
pub const STATE_TOL: f64 = 1e-10;

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!(
            "invalid subsystem dims {dims:?}"
        )));
    }
    let total = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .unwrap_or(usize::MAX);
    if total > DIM_CAP {
        return Err(Error::SizeCap {
            what: "Hilbert dimension",
            size: total,
            cap: DIM_CAP,
        });
    }
    Ok(total)
}

/// A unit-trace PSD Hermitian matrix with a tensor-product structure.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, mat: CMat) -> Result<Self> {
        let total = check_dims(&dims)?;
        if mat.nrows() != total || mat.ncols() != total {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, dims {dims:?} need {total}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if hermitian_defect(&mat) > STATE_TOL {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = eigvalsh(&mat).first().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self {
            dims,
            mat: linalg::hermitize(&mat),
        })
    }

    /// Skips validation; for internal results that are valid by construction.
    pub(crate) fn raw(dims: Vec<usize>, mat: CMat) -> Self {
        Self {
            dims,
            mat: linalg::hermitize(&mat),
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self::raw(psi.dims.clone(), &psi.amps * psi.amps.adjoint())
    }

    pub fn diagonal(dims: Vec<usize>, probs: &[f64]) -> Result<Self> {
        let total = check_dims(&dims)?;
        if probs.len() != total {
            return Err(Error::LengthMismatch {
                expected: total,
                actual: probs.len(),
            });
        }
        Self::new(
            dims,
            CMat::from_diagonal(&CVec::from_iterator(total, probs.iter().map(|&v| c(v)))),
        )
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        Ok(Self::raw(
            dims,
            CMat::identity(total, total) * c(1.0 / total as f64),
        ))
    }

    /// Random mixed state `G G^dagger / Tr` with `G` complex Ginibre of the given rank.
    pub fn random<R: Rng + ?Sized>(dims: Vec<usize>, rank: usize, rng: &mut R) -> Result<Self> {
        let total = check_dims(&dims)?;
        let rank = rank.clamp(1, total);
        let g = CMat::from_fn(total, rank, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let m = &g * g.adjoint();
        let tr = m.trace().re;
        Ok(Self::raw(dims, m * c(1.0 / tr)))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.mat)
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        crate::dists::shannon(
            &self
                .eigenvalues()
                .iter()
                .map(|v| v.max(0.0))
                .collect::<Vec<_>>(),
        )
    }

    /// Same matrix, new factorization of the total dimension.
    pub fn regroup(&self, dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if total != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{dims:?} does not factor {}",
                self.dim()
            )));
        }
        Ok(Self {
            dims,
            mat: self.mat.clone(),
        })
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        check_dims(&dims)?;
        Ok(Self::raw(dims, kron(&self.mat, &other.mat)))
    }

    /// Trace out every subsystem not listed in `keep` (order of `keep` is ignored).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() || keep.iter().any(|&k| k >= self.dims.len()) {
            return Err(Error::DimensionMismatch(format!(
                "cannot keep {keep:?} of {} subsystems",
                self.dims.len()
            )));
        }
        let dims = &self.dims;
        let total = self.dim();
        let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let kept_total: usize = kept_dims.iter().product();

        // split every full index into (kept index, traced index)
        let mut kept_of = vec![0usize; total];
        let mut traced_of = vec![0usize; total];
        for (full, (ko, to)) in kept_of.iter_mut().zip(traced_of.iter_mut()).enumerate() {
            let mut rem = full;
            let (mut kv, mut kmul, mut tv, mut tmul) = (0, 1, 0, 1);
            for s in (0..dims.len()).rev() {
                let digit = rem % dims[s];
                rem /= dims[s];
                if keep.binary_search(&s).is_ok() {
                    kv += digit * kmul;
                    kmul *= dims[s];
                } else {
                    tv += digit * tmul;
                    tmul *= dims[s];
                }
            }
            *ko = kv;
            *to = tv;
        }
        let traced_total = total / kept_total;
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); traced_total];
        for full in 0..total {
            groups[traced_of[full]].push(full);
        }
        let mut out = CMat::zeros(kept_total, kept_total);
        for g in &groups {
            for &i in g {
                for &j in g {
                    out[(kept_of[i], kept_of[j])] += self.mat[(i, j)];
                }
            }
        }
        Ok(Self::raw(kept_dims, out))
    }

    /// `(I ⊗ op ⊗ I) rho (I ⊗ op ⊗ I)^dagger` with `op` on one subsystem.
    pub fn conjugate_on(&self, op: &CMat, subsystem: usize) -> Result<Self> {
        let full = self.embed(op, subsystem)?;
        Ok(Self::raw(
            self.dims.clone(),
            &full * &self.mat * dagger(&full),
        ))
    }

    pub fn conjugate(&self, op: &CMat) -> Result<Self> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("operator size".into()));
        }
        Ok(Self::raw(self.dims.clone(), op * &self.mat * dagger(op)))
    }

    /// Lifts an operator on one subsystem to the full space.
    pub fn embed(&self, op: &CMat, subsystem: usize) -> Result<CMat> {
        embed_operator(&self.dims, op, subsystem)
    }

    /// Generalized Pauli channel `sum P(x,z) W(x,z) rho W(x,z)^dagger` on one subsystem.
    pub fn pauli_channel(&self, dist: &PauliDist, subsystem: usize) -> Result<Self> {
        let p = dist.p();
        if self.dims.get(subsystem) != Some(&(p as usize)) {
            return Err(Error::DimensionMismatch(format!(
                "subsystem {subsystem} is not {p}-dimensional"
            )));
        }
        let mut out = CMat::zeros(self.dim(), self.dim());
        for x in 0..p {
            for z in 0..p {
                let w = dist.get(x, z);
                if w == 0.0 {
                    continue;
                }
                let u = self.embed(&weyl_raw(p, x, z), subsystem)?;
                out += (&u * &self.mat * dagger(&u)) * c(w);
            }
        }
        Ok(Self::raw(self.dims.clone(), out))
    }

    /// Weyl twirl `(1/p^2) sum (W ⊗ conj W) rho (W ⊗ conj W)^dagger` on a bipartite `p x p` state.
    pub fn twirl(&self) -> Result<Self> {
        let p = match self.dims.as_slice() {
            [a, b] if a == b => *a as u32,
            _ => {
                return Err(Error::DimensionMismatch(
                    "twirl needs a p x p bipartite state".into(),
                ))
            }
        };
        crate::gf::check_prime(p)?;
        let mut out = CMat::zeros(self.dim(), self.dim());
        for x in 0..p {
            for z in 0..p {
                let w = weyl_raw(p, x, z);
                let u = kron(&w, &w.map(|v| v.conj()));
                out += &u * &self.mat * dagger(&u);
            }
        }
        Ok(Self::raw(self.dims.clone(), out * c(1.0 / (p * p) as f64)))
    }

    /// Matrix elements `<Phi_a| rho |Phi_b>` in the Bell basis, `a, b` in row-major `(x, z)` order.
    pub fn bell_basis_matrix(&self) -> Result<CMat> {
        let p = match self.dims.as_slice() {
            [a, b] if a == b => *a as u32,
            _ => {
                return Err(Error::DimensionMismatch(
                    "Bell basis needs a p x p bipartite state".into(),
                ))
            }
        };
        let basis = bell_basis(p)?;
        Ok(dagger(&basis) * &self.mat * basis)
    }
}

pub fn embed_operator(dims: &[usize], op: &CMat, subsystem: usize) -> Result<CMat> {
    let d = *dims
        .get(subsystem)
        .ok_or_else(|| Error::DimensionMismatch(format!("no subsystem {subsystem}")))?;
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, subsystem has dim {d}",
            op.nrows(),
            op.ncols()
        )));
    }
    let before: usize = dims[..subsystem].iter().product();
    let after: usize = dims[subsystem + 1..].iter().product();
    Ok(kron(
        &kron(&CMat::identity(before, before), op),
        &CMat::identity(after, after),
    ))
}

/// Normalized state vector.
#[derive(Clone, Debug)]
pub struct PureState {
    dims: Vec<usize>,
    amps: CVec,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amps: CVec) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amps.len() != total {
            return Err(Error::LengthMismatch {
                expected: total,
                actual: amps.len(),
            });
        }
        if (amps.norm() - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("norm {}", amps.norm())));
        }
        Ok(Self { dims, amps })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

#[derive(Clone, Debug)]
pub struct UnitaryMatrix {
    mat: CMat,
}

impl UnitaryMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch("unitary must be square".into()));
        }
        let defect =
            linalg::max_abs(&(&mat * dagger(&mat) - CMat::identity(mat.nrows(), mat.nrows())));
        if defect > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "U U^dagger differs from I by {defect:e}"
            )));
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }
}

/// `X^x Z^z` with `X|j> = |j+1>`, `Z|j> = omega^j |j>`.
pub(crate) fn weyl_raw(p: u32, x: u32, z: u32) -> CMat {
    let d = p as usize;
    let mut m = CMat::zeros(d, d);
    for j in 0..p {
        let row = ((j + x) % p) as usize;
        m[(row, j as usize)] = root_of_unity::<f64>(p, (z as u64 * j as u64) % p as u64);
    }
    m
}

pub fn weyl(x: FieldElem, z: FieldElem) -> Result<UnitaryMatrix> {
    if x.modulus() != z.modulus() {
        return Err(Error::ModulusMismatch(x.modulus(), z.modulus()));
    }
    Ok(UnitaryMatrix {
        mat: weyl_raw(x.modulus(), x.value(), z.value()),
    })
}

/// `|Phi> = p^{-1/2} sum_j |j j>`.
pub fn max_entangled(p: u32) -> CVec {
    let d = p as usize;
    let mut v = CVec::zeros(d * d);
    for j in 0..d {
        v[j * d + j] = c(1.0 / (p as f64).sqrt());
    }
    v
}

/// Columns are `(W(x,z) ⊗ I)|Phi>` in row-major `(x, z)` order.
pub fn bell_basis(p: u32) -> Result<CMat> {
    crate::gf::check_prime(p)?;
    let d = p as usize;
    check_dims(&[d, d])?;
    let phi = max_entangled(p);
    let id = CMat::identity(d, d);
    let mut basis = CMat::zeros(d * d, d * d);
    for x in 0..p {
        for z in 0..p {
            let col = kron(&weyl_raw(p, x, z), &id) * &phi;
            basis.set_column((x * p + z) as usize, &col);
        }
    }
    Ok(basis)
}

/// `rho[P] = sum P(x,z) W(x,z)|Phi><Phi|W(x,z)^dagger` on `A ⊗ B`.
pub fn bell_diagonal(dist: &PauliDist) -> Result<DensityMatrix> {
    let basis = bell_basis(dist.p())?;
    let d = dist.p() as usize;
    let diag = CMat::from_diagonal(&CVec::from_iterator(
        d * d,
        dist.probs().iter().map(|&v| c(v)),
    ));
    Ok(DensityMatrix::raw(
        vec![d, d],
        &basis * diag * dagger(&basis),
    ))
}

/// `|Psi> = sum sqrt(P(x,z)) W(x,z)_A |Phi>_AB |x,z>_E` on dims `[p, p, p^2]`.
pub fn purify(dist: &PauliDist) -> Result<PureState> {
    let p = dist.p();
    let d = p as usize;
    check_dims(&[d, d, d * d])?;
    let basis = bell_basis(p)?;
    let mut amps = CVec::zeros(d * d * d * d);
    for e in 0..d * d {
        let w = dist.probs()[e].sqrt();
        if w == 0.0 {
            continue;
        }
        for ab in 0..d * d {
            amps[ab * d * d + e] = basis[(ab, e)] * w;
        }
    }
    PureState::new(vec![d, d, d * d], amps)
}
