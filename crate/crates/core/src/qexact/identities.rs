//! Exact-oracle check of the closed forms for the Pauli model.
//!
//! With `omega_ABE` the purification of `P` followed by `P~` on the transmitted
//! system, the conditional entropies of `omega` reduce to entropies of `P` and
//! `P~ * P`; for the channel families `W_B(x) = W(x)_A L(tau_AB) W(x)_A^dagger` and
//! `W_E(x) = W(x)_A tau_AE W(x)_A^dagger` under uniform `x`, the mutual informations
//! equal `log p` minus the matching conditional entropy.

use serde::Serialize;

use super::{
    cond_entropy, cond_entropy_down, cond_entropy_up_sandwiched, cq_petz_info_up,
    cq_sandwiched_info_down,
};
use super::{dagger, purify, weyl_raw, DensityMatrix};
use crate::dists::PauliDist;
use crate::error::{Error, Result};

/// Absolute residuals of the equalities, and the slack of the one inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub cond_ab: f64,
    pub cond_ae: f64,
    pub renyi_ab: f64,
    /// `H~↑_{1+t}(A|E) - (log p - H_{1/(1+t)}(P))`, which should be nonnegative.
    pub renyi_ae_slack: f64,
    pub info_b: f64,
    pub info_e: f64,
}

impl IdentityResiduals {
    pub fn max_residual(&self) -> f64 {
        [
            self.cond_ab,
            self.cond_ae,
            self.renyi_ab,
            self.info_b,
            self.info_e,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_residual() < tol && self.renyi_ae_slack >= -tol
    }
}

fn weyl_family(state: &DensityMatrix, p: u32) -> Result<Vec<DensityMatrix>> {
    (0..p * p)
        .map(|k| {
            let u = state.embed(&weyl_raw(p, k / p, k % p), 0)?;
            Ok(DensityMatrix::raw(
                state.dims().to_vec(),
                &u * state.matrix() * dagger(&u),
            ))
        })
        .collect()
}

/// Evaluates every relation at order parameter `t in (0, 1)`.
pub fn identity_residuals(
    p_dist: &PauliDist,
    p_tilde: &PauliDist,
    t: f64,
) -> Result<IdentityResiduals> {
    let p = p_dist.p();
    if p_tilde.p() != p {
        return Err(Error::ModulusMismatch(p_tilde.p(), p));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("t = {t} outside (0, 1)")));
    }
    let log_p = (p as f64).log2();
    let conv = p_tilde.convolve(p_dist)?;
    let tau = purify(p_dist)?.density();

    let omega = tau.pauli_channel(&p_tilde.negate_x(), 1)?;
    let ab = omega.partial_trace(&[0, 1])?;
    let ae = omega.partial_trace(&[0, 2])?;
    let cond_ab = (cond_entropy(&ab)? - (conv.shannon() - log_p)).abs();
    let cond_ae = (cond_entropy(&ae)? - (log_p - p_dist.shannon())).abs();
    let renyi_ab = (cond_entropy_down(&ab, 1.0 - t)? - (conv.renyi(1.0 - t)? - log_p)).abs();
    let renyi_ae_slack =
        cond_entropy_up_sandwiched(&ae, 1.0 + t)? - (log_p - p_dist.renyi(1.0 / (1.0 + t))?);

    let tau_ab = tau.partial_trace(&[0, 1])?.pauli_channel(p_tilde, 0)?;
    let tau_ae = tau.partial_trace(&[0, 2])?;
    let q = vec![1.0 / (p * p) as f64; (p * p) as usize];
    let info_b = (cq_petz_info_up(&weyl_family(&tau_ab, p)?, &q, 1.0 - t)?
        - (log_p - cond_entropy_down(&tau_ab, 1.0 - t)?))
    .abs();
    let info_e = (cq_sandwiched_info_down(&weyl_family(&tau_ae, p)?, &q, 1.0 + t)?
        - (log_p - cond_entropy_up_sandwiched(&tau_ae, 1.0 + t)?))
    .abs();
    Ok(IdentityResiduals {
        cond_ab,
        cond_ae,
        renyi_ab,
        renyi_ae_slack,
        info_b,
        info_e,
    })
}
