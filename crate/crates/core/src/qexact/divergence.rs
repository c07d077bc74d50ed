//! Rényi divergences, conditional entropies and cq mutual informations, all in bits.
//!
//! Orders are passed as `alpha = 1 + t`. `alpha = 1` routes to the von Neumann limit.

use std::f64::consts::LN_2;

use super::linalg::{
    c, eigh, fro, kron, max_abs, project_density, psd_log, psd_pow, support_projector,
    trace_norm_hermitian, weighted, CMat,
};
use super::solver::minimize_sandwiched;
use super::{DensityMatrix, STATE_TOL};
use crate::error::{Error, Result};

const UNIT: f64 = 1e-12;

fn check_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "order {alpha} must be positive and finite"
        )))
    }
}

fn same_shape(rho: &CMat, sigma: &CMat) -> Result<()> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{:?} vs {:?}",
            rho.shape(),
            sigma.shape()
        )));
    }
    Ok(())
}

fn check_support(rho: &CMat, sigma: &CMat) -> Result<()> {
    let n = sigma.nrows();
    let outside = CMat::identity(n, n) - support_projector(sigma);
    if (&outside * rho * &outside).trace().re > STATE_TOL {
        return Err(Error::SupportViolation);
    }
    Ok(())
}

pub(crate) fn relative_entropy_raw(rho: &CMat, sigma: &CMat) -> Result<f64> {
    same_shape(rho, sigma)?;
    check_support(rho, sigma)?;
    let diff = psd_log(rho, 0.0) - psd_log(sigma, 0.0);
    Ok((rho * diff).trace().re / LN_2)
}

pub(crate) fn petz_raw(rho: &CMat, sigma: &CMat, alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    same_shape(rho, sigma)?;
    if (alpha - 1.0).abs() < UNIT {
        return relative_entropy_raw(rho, sigma);
    }
    if alpha > 1.0 {
        check_support(rho, sigma)?;
    }
    let q = (psd_pow(rho, alpha) * psd_pow(sigma, 1.0 - alpha))
        .trace()
        .re;
    if q <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(q.log2() / (alpha - 1.0))
}

pub(crate) fn sandwiched_raw(rho: &CMat, sigma: &CMat, alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    same_shape(rho, sigma)?;
    if (alpha - 1.0).abs() < UNIT {
        return relative_entropy_raw(rho, sigma);
    }
    if alpha > 1.0 {
        check_support(rho, sigma)?;
    }
    let s = psd_pow(sigma, (1.0 - alpha) / (2.0 * alpha));
    let y = &s * rho * &s;
    let q = psd_pow(&y, alpha).trace().re;
    if q <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(q.log2() / (alpha - 1.0))
}

pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    relative_entropy_raw(rho.matrix(), sigma.matrix())
}

/// `D_alpha(rho‖sigma) = log2 Tr rho^alpha sigma^(1-alpha) / (alpha - 1)`.
pub fn petz_divergence(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<f64> {
    petz_raw(rho.matrix(), sigma.matrix(), alpha)
}

/// `D~_alpha(rho‖sigma) = log2 Tr (sigma^g rho sigma^g)^alpha / (alpha - 1)`, `g = (1-alpha)/(2 alpha)`.
pub fn sandwiched_divergence(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    alpha: f64,
) -> Result<f64> {
    sandwiched_raw(rho.matrix(), sigma.matrix(), alpha)
}

fn bipartite(rho: &DensityMatrix) -> Result<(usize, usize)> {
    match rho.dims() {
        [a, b] => Ok((*a, *b)),
        d => Err(Error::DimensionMismatch(format!(
            "expected a bipartite state, got dims {d:?}"
        ))),
    }
}

/// `H(A|B) = H(AB) - H(B)`.
pub fn cond_entropy(rho_ab: &DensityMatrix) -> Result<f64> {
    bipartite(rho_ab)?;
    Ok(rho_ab.entropy() - rho_ab.partial_trace(&[1])?.entropy())
}

/// `H↓_alpha(A|B) = -D_alpha(rho_AB ‖ I_A ⊗ rho_B)`.
pub fn cond_entropy_down(rho_ab: &DensityMatrix, alpha: f64) -> Result<f64> {
    let (da, _) = bipartite(rho_ab)?;
    let rho_b = rho_ab.partial_trace(&[1])?;
    let sigma = kron(&CMat::identity(da, da), rho_b.matrix());
    Ok(-petz_raw(rho_ab.matrix(), &sigma, alpha)?)
}

/// `H~↑_alpha(A|B) = -inf_sigma D~_alpha(rho_AB ‖ I_A ⊗ sigma_B)`, for `alpha >= 1`.
pub fn cond_entropy_up_sandwiched(rho_ab: &DensityMatrix, alpha: f64) -> Result<f64> {
    let (da, db) = bipartite(rho_ab)?;
    check_order(alpha)?;
    if (alpha - 1.0).abs() < UNIT {
        return cond_entropy(rho_ab);
    }
    if alpha < 1.0 {
        return Err(Error::InvalidParameter(
            "sandwiched up-entropy is implemented for order >= 1".into(),
        ));
    }
    let rho = rho_ab.matrix();
    let id_a = CMat::identity(da, da);
    let eval = |s: &CMat| {
        let full = kron(&id_a, s);
        let ya = psd_pow(&(&full * rho * &full), alpha);
        let f = ya.trace().re;
        let z = DensityMatrix::raw(vec![da, db], ya)
            .partial_trace(&[1])
            .map(|m| m.matrix().clone());
        (f, z.expect("bipartite"))
    };
    let rho_b = rho_ab.partial_trace(&[1])?;
    let rep = minimize_sandwiched(alpha, rho_b.matrix(), eval)?;
    Ok(-rep.value.log2() / (alpha - 1.0))
}

fn check_family(states: &[DensityMatrix], q: &[f64]) -> Result<CMat> {
    if states.is_empty() || states.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: states.len(),
            actual: q.len(),
        });
    }
    let d = states[0].dim();
    if states.iter().any(|s| s.dim() != d) {
        return Err(Error::DimensionMismatch(
            "cq family members differ in dimension".into(),
        ));
    }
    if q.iter().any(|&v| v < 0.0) || (q.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution("input distribution".into()));
    }
    Ok(states
        .iter()
        .zip(q)
        .fold(CMat::zeros(d, d), |acc, (s, &w)| acc + s.matrix() * c(w)))
}

fn holevo(states: &[DensityMatrix], q: &[f64], avg: &CMat) -> f64 {
    let avg = DensityMatrix::raw(states[0].dims().to_vec(), avg.clone());
    avg.entropy()
        - states
            .iter()
            .zip(q)
            .map(|(s, &w)| w * s.entropy())
            .sum::<f64>()
}

/// `I↑_alpha(X;B) = D_alpha(rho_XB ‖ rho_X ⊗ rho_B)` for `rho_XB = sum Q(x)|x><x| ⊗ W_x`.
pub fn cq_petz_info_up(states: &[DensityMatrix], q: &[f64], alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    let avg = check_family(states, q)?;
    if (alpha - 1.0).abs() < UNIT {
        return Ok(holevo(states, q, &avg));
    }
    let avg_pow = psd_pow(&avg, 1.0 - alpha);
    let total: f64 = states
        .iter()
        .zip(q)
        .filter(|(_, &w)| w > 0.0)
        .map(|(s, &w)| w * (psd_pow(s.matrix(), alpha) * &avg_pow).trace().re)
        .sum();
    Ok(total.log2() / (alpha - 1.0))
}

/// `I~↓_alpha(X;E) = inf_sigma D~_alpha(rho_XE ‖ rho_X ⊗ sigma)`, for `alpha >= 1`.
pub fn cq_sandwiched_info_down(states: &[DensityMatrix], q: &[f64], alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    let avg = check_family(states, q)?;
    if (alpha - 1.0).abs() < UNIT {
        return Ok(holevo(states, q, &avg));
    }
    if alpha < 1.0 {
        return Err(Error::InvalidParameter(
            "sandwiched down-information is implemented for order >= 1".into(),
        ));
    }
    let d = avg.nrows();
    let eval = |s: &CMat| {
        let mut f = 0.0;
        let mut z = CMat::zeros(d, d);
        for (st, &w) in states.iter().zip(q) {
            if w == 0.0 {
                continue;
            }
            let ya = psd_pow(&(s * st.matrix() * s), alpha);
            f += w * ya.trace().re;
            z += ya * c(w);
        }
        (f, z)
    };
    let rep = minimize_sandwiched(alpha, &avg, eval)?;
    Ok(rep.value.log2() / (alpha - 1.0))
}

/// `‖rho - sigma‖_1` (no factor 1/2, matching the leakage criterion).
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_shape(rho.matrix(), sigma.matrix())?;
    Ok(trace_norm_hermitian(&(rho.matrix() - sigma.matrix())))
}

/// Leakage of a state classical on its first factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Leakage {
    /// `‖rho_ME - P_M ⊗ rho_E‖_1`.
    pub against_marginal: f64,
    /// `min_sigma ‖rho_ME - P_M ⊗ sigma‖_1`, an upper estimate from projected subgradient descent.
    pub minimized: f64,
}

fn sign_part(m: &CMat) -> CMat {
    let (vals, vecs) = eigh(m);
    weighted(
        &vals
            .iter()
            .map(|&v| {
                if v > 1e-14 {
                    1.0
                } else if v < -1e-14 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect::<Vec<_>>(),
        &vecs,
    )
}

pub fn leakage_d(rho_me: &DensityMatrix) -> Result<Leakage> {
    let (dm, de) = bipartite(rho_me)?;
    let m = rho_me.matrix();
    let block = |a: usize, b: usize| m.view((a * de, b * de), (de, de)).into_owned();
    for a in 0..dm {
        for b in 0..dm {
            if a != b && max_abs(&block(a, b)) > STATE_TOL {
                return Err(Error::NotClassical(format!("block ({a}, {b}) is nonzero")));
            }
        }
    }
    let blocks: Vec<CMat> = (0..dm).map(|a| block(a, a)).collect();
    let pm: Vec<f64> = blocks.iter().map(|b| b.trace().re).collect();
    let rho_e = rho_me.partial_trace(&[1])?;
    let value = |sigma: &CMat| -> f64 {
        blocks
            .iter()
            .zip(&pm)
            .map(|(b, &w)| trace_norm_hermitian(&(b - sigma * c(w))))
            .sum()
    };
    let against_marginal = value(rho_e.matrix());

    let mut best = against_marginal;
    let mut sigma = rho_e.matrix().clone();
    for k in 1..=400 {
        let g = blocks
            .iter()
            .zip(&pm)
            .fold(CMat::zeros(de, de), |acc, (b, &w)| {
                acc - sign_part(&(b - &sigma * c(w))) * c(w)
            });
        let norm = fro(&g);
        if norm < 1e-14 {
            break;
        }
        sigma = project_density(&(&sigma - &g * c(0.2 / (k as f64).sqrt() / norm)));
        best = best.min(value(&sigma));
    }
    Ok(Leakage {
        against_marginal,
        minimized: best,
    })
}
