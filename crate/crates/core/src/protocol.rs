//! End-to-end runs of the direct-communication protocol over the classical
//! equivalent of the quantum channel: Bob's Bell outcome is `X^ = X + N` with
//! `N ~ P~ * P` per channel use.
//!
//! Public information (`S`, `S'`, `C`) can only be produced from a
//! [`ReceptionAck`], which only Bob's reception step creates.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{eps_e_bound, TGrid};
use crate::dists::PauliDist;
use crate::error::{Error, Result};
use crate::estimation::{estimate, EstimationReport};
use crate::gf::FieldVec;
use crate::hashing::{f_s, g_sprime, psi_s, split_m_prime, HashParams, SeedS, SeedSPrime};
use crate::wiretap::{ClassicalChannelWc, CodeSpec, LinearCode};

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub p: u32,
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    /// Bob-to-Alice noise `P`.
    pub p_xz: PauliDist,
    /// Alice-to-Bob noise `P~`.
    pub p_tilde: PauliDist,
    pub code: CodeSpec,
    pub seed: u64,
}

/// Tampering function on Bob's received word.
pub type TamperFn = Arc<dyn Fn(&FieldVec, &mut ChaCha8Rng) -> FieldVec + Send + Sync>;

#[derive(Clone)]
pub enum Adversary {
    None,
    /// Eve keeps the transmitted system; Bob receives nothing.
    Intercept,
    Tamper(TamperFn),
}

impl Adversary {
    /// Replaces the received word with a uniformly random one.
    pub fn uniform_substitution() -> Self {
        Self::Tamper(Arc::new(|w: &FieldVec, rng: &mut ChaCha8Rng| {
            FieldVec::random(w.len(), w.modulus(), rng)
        }))
    }
}

impl std::fmt::Debug for Adversary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::None => "None",
            Self::Intercept => "Intercept",
            Self::Tamper(_) => "Tamper",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accepted,
    Abort,
}

/// Everything observable in one run. Serialized field names are fixed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transcript {
    pub s: Option<Vec<u32>>,
    pub s_prime: Option<Vec<u32>>,
    pub c: Option<Vec<u32>>,
    pub x_bar: Option<Vec<u32>>,
    pub x: Vec<u32>,
    pub x_hat: Option<Vec<u32>>,
    pub m_hat: Option<Vec<u32>>,
    pub y_hat: Option<Vec<u32>>,
    pub verdict: Verdict,
}

impl Transcript {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transcript serializes")
    }
}

/// Independent random streams of one trial.
pub struct TrialRngs {
    pub encoding: ChaCha8Rng,
    pub channel: ChaCha8Rng,
    pub mask: ChaCha8Rng,
    pub adversary: ChaCha8Rng,
    pub estimation: ChaCha8Rng,
}

impl TrialRngs {
    pub fn new(master: u64, trial: u64) -> Self {
        let stream = |k: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(master);
            r.set_stream(trial.wrapping_mul(5).wrapping_add(k));
            r
        };
        Self {
            encoding: stream(0),
            channel: stream(1),
            mask: stream(2),
            adversary: stream(3),
            estimation: stream(4),
        }
    }
}

/// Proof that Bob acknowledged reception.
pub struct ReceptionAck(());

struct AliceState {
    seed: SeedS,
    m: FieldVec,
    y: FieldVec,
    info: FieldVec,
    x: FieldVec,
}

struct Announcement {
    s: SeedS,
    s_prime: SeedSPrime,
    c: FieldVec,
}

impl AliceState {
    fn announce<R: Rng + ?Sized>(
        self,
        _ack: &ReceptionAck,
        hp: HashParams,
        rng: &mut R,
    ) -> Result<(Announcement, FieldVec, FieldVec)> {
        let s_prime = SeedSPrime::random(hp, rng);
        let c = g_sprime(&s_prime, &self.m, &self.y)?;
        Ok((
            Announcement {
                s: self.seed,
                s_prime,
                c,
            },
            self.m,
            self.info,
        ))
    }
}

fn receive(x_hat: Option<FieldVec>) -> Option<(FieldVec, ReceptionAck)> {
    x_hat.map(|w| (w, ReceptionAck(())))
}

/// `accept` iff `g_{S'}(M^, Y^) = C`.
pub fn verify(
    seed: &SeedSPrime,
    m_hat: &FieldVec,
    y_hat: &FieldVec,
    c: &FieldVec,
) -> Result<Verdict> {
    Ok(if &g_sprime(seed, m_hat, y_hat)? == c {
        Verdict::Accepted
    } else {
        Verdict::Abort
    })
}

/// Per-trial result with the coupled code-level error flag.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub transcript: Transcript,
    pub message: Vec<u32>,
    /// Whether Bob's code decision differed from Alice's information word; `None` when intercepted.
    pub code_error: Option<bool>,
}

/// A configured protocol instance.
pub struct Protocol {
    config: ProtocolConfig,
    hp: HashParams,
    code: Box<dyn LinearCode>,
    channel: ClassicalChannelWc,
}

impl Protocol {
    pub fn new(config: ProtocolConfig) -> Result<Self> {
        let (p, n) = (config.p, config.n);
        if config.p_xz.p() != p || config.p_tilde.p() != p {
            return Err(Error::ModulusMismatch(config.p_xz.p(), p));
        }
        if config.n1 > 2 * n {
            return Err(Error::InvalidParameter(format!(
                "n1 = {} exceeds 2n = {}",
                config.n1,
                2 * n
            )));
        }
        let hp = HashParams::new(p, config.n1, config.n2, config.n3)?;
        let noise = config.p_tilde.convolve(&config.p_xz)?;
        let code = config.code.build(p, n, &noise)?;
        if code.n1() != config.n1 {
            return Err(Error::InvalidParameter(format!(
                "code {} has n1 = {}, config says {}",
                code.name(),
                code.n1(),
                config.n1
            )));
        }
        let channel = ClassicalChannelWc::new(noise)?;
        Ok(Self {
            config,
            hp,
            code,
            channel,
        })
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn hash_params(&self) -> HashParams {
        self.hp
    }

    pub fn code(&self) -> &dyn LinearCode {
        self.code.as_ref()
    }

    /// Secrecy bound for this configuration, reported when Eve intercepts.
    pub fn eps_e_bound(&self) -> f64 {
        eps_e_bound(
            self.config.n as u64,
            self.hp.sacrifice() as u64,
            &self.config.p_xz,
            &TGrid::standard(),
        )
    }

    fn check_message(&self, m: &FieldVec) -> Result<()> {
        if m.modulus() != self.hp.p {
            return Err(Error::ModulusMismatch(m.modulus(), self.hp.p));
        }
        if m.len() != self.hp.n2 {
            return Err(Error::LengthMismatch {
                expected: self.hp.n2,
                actual: m.len(),
            });
        }
        Ok(())
    }

    fn prepare(&self, m: &FieldVec, rng: &mut ChaCha8Rng) -> Result<AliceState> {
        let hp = self.hp;
        let seed = SeedS::random(hp, rng);
        let y = FieldVec::random(hp.n3, hp.p, rng);
        let l2 = FieldVec::random(hp.sacrifice(), hp.p, rng);
        let info = psi_s(&seed, m, &y, &l2)?;
        let x = self.code.encode(&info)?;
        Ok(AliceState {
            seed,
            m: m.clone(),
            y,
            info,
            x,
        })
    }

    fn finish(
        &self,
        alice: AliceState,
        x_bar: Option<&FieldVec>,
        received: Option<FieldVec>,
        decode_from: impl Fn(&FieldVec) -> Result<FieldVec>,
        rngs: &mut TrialRngs,
    ) -> Result<TrialOutcome> {
        let x = alice.x.values().to_vec();
        let message = alice.m.values().to_vec();
        let x_bar = x_bar.map(|v| v.values().to_vec());
        let Some((x_hat, ack)) = receive(received) else {
            let transcript = Transcript {
                s: None,
                s_prime: None,
                c: None,
                x_bar,
                x,
                x_hat: None,
                m_hat: None,
                y_hat: None,
                verdict: Verdict::Abort,
            };
            return Ok(TrialOutcome {
                transcript,
                message,
                code_error: None,
            });
        };
        let (public, _m, info) = alice.announce(&ack, self.hp, &mut rngs.encoding)?;
        let info_hat = self.code.decode(&decode_from(&x_hat)?)?;
        let (y_hat, m_hat) = split_m_prime(&self.hp, &f_s(&public.s, &info_hat)?)?;
        let verdict = verify(&public.s_prime, &m_hat, &y_hat, &public.c)?;
        let transcript = Transcript {
            s: Some(public.s.entries().values().to_vec()),
            s_prime: Some(public.s_prime.entries().values().to_vec()),
            c: Some(public.c.values().to_vec()),
            x_bar,
            x,
            x_hat: Some(x_hat.values().to_vec()),
            m_hat: Some(m_hat.values().to_vec()),
            y_hat: Some(y_hat.values().to_vec()),
            verdict,
        };
        Ok(TrialOutcome {
            transcript,
            message,
            code_error: Some(info_hat != info),
        })
    }

    pub fn run_protocol1_detailed(
        &self,
        m: &FieldVec,
        adversary: &Adversary,
        rngs: &mut TrialRngs,
    ) -> Result<TrialOutcome> {
        self.check_message(m)?;
        let alice = self.prepare(m, &mut rngs.encoding)?;
        let noisy = self.channel.sample(&alice.x, &mut rngs.channel)?;
        let received = match adversary {
            Adversary::None => Some(noisy),
            Adversary::Intercept => None,
            Adversary::Tamper(f) => {
                let w = f(&noisy, &mut rngs.adversary);
                if w.len() != noisy.len() || w.modulus() != noisy.modulus() {
                    return Err(Error::InvalidParameter(
                        "tampered word has the wrong shape".into(),
                    ));
                }
                Some(w)
            }
        };
        self.finish(alice, None, received, |w| Ok(w.clone()), rngs)
    }

    pub fn run_protocol1(
        &self,
        m: &FieldVec,
        adversary: &Adversary,
        rngs: &mut TrialRngs,
    ) -> Result<Transcript> {
        Ok(self.run_protocol1_detailed(m, adversary, rngs)?.transcript)
    }

    /// Masked variant: Alice sends `X + X_bar` with a uniform public mask, Bob decodes `X_ + - X_bar`.
    pub fn run_protocol3(&self, m: &FieldVec, rngs: &mut TrialRngs) -> Result<Transcript> {
        let mask = FieldVec::random(2 * self.config.n, self.hp.p, &mut rngs.mask);
        self.run_masked(m, &mask, rngs)
    }

    /// Protocol 3 with a caller-chosen mask.
    pub fn run_masked(
        &self,
        m: &FieldVec,
        mask: &FieldVec,
        rngs: &mut TrialRngs,
    ) -> Result<Transcript> {
        self.check_message(m)?;
        let alice = self.prepare(m, &mut rngs.encoding)?;
        let sent = alice.x.add(mask)?;
        let received = self.channel.sample(&sent, &mut rngs.channel)?;
        Ok(self
            .finish(alice, Some(mask), Some(received), |w| w.sub(mask), rngs)?
            .transcript)
    }

    /// Estimates the Bob-to-Alice noise from `shots` per setting (0 for exact marginals),
    /// then runs the masked protocol. Choosing lengths from the estimate is left to the caller.
    pub fn run_protocol2(
        &self,
        m: &FieldVec,
        shots: u64,
        rngs: &mut TrialRngs,
    ) -> Result<Protocol2Outcome> {
        let estimate = estimate(&self.config.p_xz, shots, &mut rngs.estimation)?;
        let transcript = self.run_protocol3(m, rngs)?;
        Ok(Protocol2Outcome {
            estimate,
            transcript,
        })
    }

    /// Runs `trials` independent trials with uniform messages, in parallel.
    pub fn monte_carlo(&self, trials: u64, adversary: &Adversary) -> Result<MonteCarloStats> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        let master = self.config.seed;
        let counts = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<Counts> {
                let mut rngs = TrialRngs::new(master, t);
                let m = FieldVec::random(self.hp.n2, self.hp.p, &mut rngs.encoding);
                let out = self.run_protocol1_detailed(&m, adversary, &mut rngs)?;
                let accepted = out.transcript.verdict == Verdict::Accepted;
                let correct = out.transcript.m_hat.as_deref() == Some(m.values());
                Ok(Counts {
                    aborts: (!accepted) as u64,
                    undetected: (accepted && !correct) as u64,
                    accepted_correct: (accepted && correct) as u64,
                    code_errors: out.code_error.unwrap_or(false) as u64,
                })
            })
            .try_reduce(Counts::default, |a, b| Ok(a.add(b)))?;
        Ok(MonteCarloStats {
            trials,
            abort: RateEstimate::new(counts.aborts, trials),
            undetected_error: RateEstimate::new(counts.undetected, trials),
            accepted_and_correct: RateEstimate::new(counts.accepted_correct, trials),
            code_block_error: RateEstimate::new(counts.code_errors, trials),
            eps_e_bound: matches!(adversary, Adversary::Intercept).then(|| self.eps_e_bound()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Protocol2Outcome {
    pub estimate: EstimationReport,
    pub transcript: Transcript,
}

#[derive(Clone, Copy, Default)]
struct Counts {
    aborts: u64,
    undetected: u64,
    accepted_correct: u64,
    code_errors: u64,
}

impl Counts {
    fn add(self, o: Self) -> Self {
        Self {
            aborts: self.aborts + o.aborts,
            undetected: self.undetected + o.undetected,
            accepted_correct: self.accepted_correct + o.accepted_correct,
            code_errors: self.code_errors + o.code_errors,
        }
    }
}

/// A frequency with its Wilson 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateEstimate {
    pub count: u64,
    pub trials: u64,
    pub rate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl RateEstimate {
    pub fn new(count: u64, trials: u64) -> Self {
        let (lo, hi) = wilson_interval(count, trials);
        Self {
            count,
            trials,
            rate: count as f64 / trials as f64,
            lo,
            hi,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Wilson score interval at 95%.
pub fn wilson_interval(count: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let (k, n) = (count as f64, trials as f64);
    let ph = k / n;
    let denom = 1.0 + z * z / n;
    let centre = (ph + z * z / (2.0 * n)) / denom;
    let half = z * (ph * (1.0 - ph) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloStats {
    pub trials: u64,
    pub abort: RateEstimate,
    pub undetected_error: RateEstimate,
    pub accepted_and_correct: RateEstimate,
    /// Coupled frequency of `phi_d(X^) != L`.
    pub code_block_error: RateEstimate,
    /// Secrecy is not sampled; under interception the analytic bound is reported.
    pub eps_e_bound: Option<f64>,
}

/// `min_sigma sum_{m,e} |P(m,e) - P(m) sigma(e)|` for a classical joint distribution
/// given as rows `P(m, .)`.
///
/// Each `sigma(e)` enters a convex piecewise-linear term; filling the cheapest
/// slope segments first until `sum sigma = 1` is exact.
pub fn classical_d(joint: &[Vec<f64>]) -> Result<f64> {
    let Some(first) = joint.first() else {
        return Err(Error::InvalidDistribution(
            "empty joint distribution".into(),
        ));
    };
    let k = first.len();
    if joint.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidDistribution(
            "ragged joint distribution".into(),
        ));
    }
    let q: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let mut value: f64 = joint.iter().flatten().sum();
    // segments (slope, length) over all outputs
    let mut segments: Vec<(f64, f64)> = Vec::new();
    for e in 0..k {
        let mut breaks: Vec<(f64, f64)> = joint
            .iter()
            .zip(&q)
            .filter(|(_, &qm)| qm > 0.0)
            .map(|(r, &qm)| (r[e] / qm, qm))
            .collect();
        breaks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut slope = -q.iter().sum::<f64>();
        let mut at = 0.0;
        for (b, qm) in breaks {
            if b > at {
                segments.push((slope, b - at));
                at = b;
            }
            slope += 2.0 * qm;
        }
        segments.push((slope, f64::INFINITY));
    }
    segments.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut left = 1.0;
    for (slope, len) in segments {
        if left <= 0.0 {
            break;
        }
        let take = len.min(left);
        value += slope * take;
        left -= take;
    }
    Ok(value.max(0.0))
}

/// Both sides of `d(M; E' S' C) <= d(M'; E')`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LnmCheck {
    pub left: f64,
    pub right: f64,
}

/// Evaluates both sides for uniform `M' = (Y, M)` and a classical `E'` given by rows
/// `W(. | m')`, indexed like `FieldVec::to_index` of `M'`.
pub fn lnm_check(hp: &HashParams, eve: &[Vec<f64>]) -> Result<LnmCheck> {
    let mp_len = hp.m_prime_len();
    let count = (hp.p as u64).pow(mp_len as u32) as usize;
    if eve.len() != count {
        return Err(Error::LengthMismatch {
            expected: count,
            actual: eve.len(),
        });
    }
    let k = eve[0].len();
    let seed_len = hp.n2 + hp.n3 - 1;
    let seeds = (hp.p as u64).pow(seed_len as u32) as usize;
    let tags = (hp.p as u64).pow(hp.n3 as u32) as usize;
    let total = count
        .saturating_mul(seeds)
        .saturating_mul(k)
        .saturating_mul(tags);
    if total as u64 > crate::wiretap::ENUMERATION_CAP {
        return Err(Error::SizeCap {
            what: "joint distribution",
            size: total,
            cap: crate::wiretap::ENUMERATION_CAP as usize,
        });
    }
    let pm = 1.0 / count as f64;
    let right: Vec<Vec<f64>> = eve
        .iter()
        .map(|row| row.iter().map(|w| w * pm).collect())
        .collect();

    let msgs = (hp.p as u64).pow(hp.n2 as u32) as usize;
    let mut left = vec![vec![0.0; k * seeds * tags]; msgs];
    let ps = 1.0 / seeds as f64;
    for s in 0..seeds {
        let seed = SeedSPrime::new(*hp, FieldVec::from_index(s as u64, seed_len, hp.p))?;
        for (idx, row) in eve.iter().enumerate() {
            let mp = FieldVec::from_index(idx as u64, mp_len, hp.p);
            let (y, m) = split_m_prime(hp, &mp)?;
            let c = g_sprime(&seed, &m, &y)?.to_index() as usize;
            let mi = m.to_index() as usize;
            for (e, &w) in row.iter().enumerate() {
                left[mi][(e * seeds + s) * tags + c] += pm * ps * w;
            }
        }
    }
    Ok(LnmCheck {
        left: classical_d(&left)?,
        right: classical_d(&right)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dep(mix: f64) -> PauliDist {
        PauliDist::depolarizing(mix, 2).unwrap()
    }

    fn config(
        mix: f64,
        n: usize,
        code: CodeSpec,
        n1: usize,
        n2: usize,
        n3: usize,
    ) -> ProtocolConfig {
        ProtocolConfig {
            p: 2,
            n,
            n1,
            n2,
            n3,
            p_xz: dep(mix),
            p_tilde: dep(mix),
            code,
            seed: 42,
        }
    }

    #[test]
    fn noiseless_runs_always_accept() {
        let proto = Protocol::new(config(0.0, 4, CodeSpec::Identity, 8, 3, 2)).unwrap();
        for t in 0..50 {
            let mut rngs = TrialRngs::new(1, t);
            let m = FieldVec::random(3, 2, &mut rngs.mask);
            let tr = proto
                .run_protocol1(&m, &Adversary::None, &mut rngs)
                .unwrap();
            assert_eq!(tr.verdict, Verdict::Accepted);
            assert_eq!(tr.m_hat.as_deref(), Some(m.values()));
        }
        let stats = proto.monte_carlo(200, &Adversary::None).unwrap();
        assert_eq!(stats.abort.count, 0);
    }

    #[test]
    fn config_validation() {
        assert!(Protocol::new(config(0.05, 4, CodeSpec::Identity, 9, 3, 2)).is_err());
        assert!(Protocol::new(config(0.05, 4, CodeSpec::Identity, 6, 3, 2)).is_err());
        assert!(Protocol::new(config(0.05, 4, CodeSpec::Identity, 8, 5, 4)).is_err());
        let mut c = config(0.05, 4, CodeSpec::Identity, 8, 3, 2);
        c.p_tilde = PauliDist::uniform(3).unwrap();
        assert!(Protocol::new(c).is_err());
        let proto = Protocol::new(config(0.05, 4, CodeSpec::Identity, 8, 3, 2)).unwrap();
        let mut rngs = TrialRngs::new(0, 0);
        assert!(proto
            .run_protocol1(&FieldVec::zeros(2, 2).unwrap(), &Adversary::None, &mut rngs)
            .is_err());
    }

    #[test]
    fn interception_aborts_before_announcement() {
        let proto = Protocol::new(config(0.05, 4, CodeSpec::Identity, 8, 3, 2)).unwrap();
        let mut rngs = TrialRngs::new(2, 0);
        let tr = proto
            .run_protocol1(
                &FieldVec::zeros(3, 2).unwrap(),
                &Adversary::Intercept,
                &mut rngs,
            )
            .unwrap();
        assert_eq!(tr.verdict, Verdict::Abort);
        assert!(tr.s.is_none() && tr.s_prime.is_none() && tr.c.is_none() && tr.x_hat.is_none());
        let stats = proto.monte_carlo(10, &Adversary::Intercept).unwrap();
        assert_eq!(stats.abort.count, 10);
        let b = stats.eps_e_bound.unwrap();
        assert!(b > 0.0 && b <= 1.0);
    }

    #[test]
    fn accepted_transcripts_satisfy_the_tag() {
        let proto = Protocol::new(config(0.1, 4, CodeSpec::Identity, 8, 3, 2)).unwrap();
        let hp = proto.hash_params();
        for t in 0..200 {
            let mut rngs = TrialRngs::new(3, t);
            let m = FieldVec::random(3, 2, &mut rngs.mask);
            let tr = proto
                .run_protocol1(&m, &Adversary::uniform_substitution(), &mut rngs)
                .unwrap();
            let sp = SeedSPrime::new(hp, FieldVec::new(tr.s_prime.clone().unwrap(), 2).unwrap())
                .unwrap();
            let mh = FieldVec::new(tr.m_hat.clone().unwrap(), 2).unwrap();
            let yh = FieldVec::new(tr.y_hat.clone().unwrap(), 2).unwrap();
            let tag = g_sprime(&sp, &mh, &yh).unwrap();
            assert_eq!(
                tr.verdict == Verdict::Accepted,
                tag.values() == tr.c.as_deref().unwrap()
            );
        }
    }

    #[test]
    fn transcripts_are_deterministic() {
        let proto = Protocol::new(config(0.05, 4, CodeSpec::Repetition(2), 4, 2, 1)).unwrap();
        let m = FieldVec::new(vec![1, 0], 2).unwrap();
        let a = proto
            .run_protocol1(&m, &Adversary::None, &mut TrialRngs::new(9, 5))
            .unwrap();
        let b = proto
            .run_protocol1(&m, &Adversary::None, &mut TrialRngs::new(9, 5))
            .unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = proto
            .run_protocol1(&m, &Adversary::None, &mut TrialRngs::new(9, 6))
            .unwrap();
        assert_ne!(a.to_json(), c.to_json());
        let json: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        for key in [
            "s", "s_prime", "c", "x_bar", "x", "x_hat", "m_hat", "y_hat", "verdict",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn masked_protocol_matches_unmasked() {
        let proto = Protocol::new(config(0.1, 8, CodeSpec::Repetition(4), 4, 1, 2)).unwrap();
        for t in 0..300 {
            let m = FieldVec::random(1, 2, &mut TrialRngs::new(4, t).mask);
            let a = proto
                .run_protocol1(&m, &Adversary::None, &mut TrialRngs::new(4, t))
                .unwrap();
            let b = proto.run_protocol3(&m, &mut TrialRngs::new(4, t)).unwrap();
            assert_eq!(a.verdict, b.verdict);
            assert_eq!(a.m_hat, b.m_hat);
            let zero = FieldVec::zeros(16, 2).unwrap();
            let mut c = proto
                .run_masked(&m, &zero, &mut TrialRngs::new(4, t))
                .unwrap();
            c.x_bar = None;
            assert_eq!(a, c);
        }
    }

    #[test]
    fn protocol2_estimates_then_runs_masked() {
        let proto = Protocol::new(config(0.05, 8, CodeSpec::Repetition(4), 4, 1, 2)).unwrap();
        let m = FieldVec::new(vec![1], 2).unwrap();
        let out = proto
            .run_protocol2(&m, 0, &mut TrialRngs::new(6, 0))
            .unwrap();
        assert!(out.estimate.tv_to_truth.unwrap() < 1e-12);
        assert_eq!(
            out.transcript,
            proto.run_protocol3(&m, &mut TrialRngs::new(6, 0)).unwrap()
        );
        let sampled = proto
            .run_protocol2(&m, 5000, &mut TrialRngs::new(6, 0))
            .unwrap();
        assert!(sampled.estimate.tv_to_truth.unwrap() < 0.05);
    }

    #[test]
    fn mask_hides_the_codeword() {
        let proto = Protocol::new(config(0.0, 1, CodeSpec::Identity, 2, 1, 1)).unwrap();
        let m = FieldVec::new(vec![1], 2).unwrap();
        let mut counts = [0usize; 4];
        for t in 0..4000 {
            let tr = proto.run_protocol3(&m, &mut TrialRngs::new(5, t)).unwrap();
            let sent: Vec<u32> =
                tr.x.iter()
                    .zip(tr.x_bar.as_ref().unwrap())
                    .map(|(a, b)| (a + b) % 2)
                    .collect();
            counts[(sent[0] * 2 + sent[1]) as usize] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - 1000.0).powi(2) / 1000.0)
            .sum();
        assert!(chi2 < 16.27, "chi2 = {chi2}");
    }

    #[test]
    fn aborts_never_exceed_code_errors() {
        let proto = Protocol::new(config(0.05, 8, CodeSpec::Repetition(4), 4, 1, 2)).unwrap();
        let s = proto.monte_carlo(10_000, &Adversary::None).unwrap();
        assert!(s.abort.count <= s.code_block_error.count);
        assert!(s.code_block_error.count > 0);
    }

    #[test]
    fn tampering_is_caught() {
        let proto = Protocol::new(config(0.05, 4, CodeSpec::Identity, 8, 2, 4)).unwrap();
        let s = proto
            .monte_carlo(20_000, &Adversary::uniform_substitution())
            .unwrap();
        let bound: f64 = 1.0 / 16.0;
        let sigma = (bound * (1.0 - bound) / 20_000.0).sqrt();
        assert!(
            s.undetected_error.rate <= bound + 3.0 * sigma,
            "{}",
            s.undetected_error.rate
        );
    }

    #[test]
    fn verify_exhaustive_small() {
        let hp = HashParams::new(2, 2, 1, 1).unwrap();
        let (mut acc, mut total) = (0, 0);
        for s in FieldVec::enumerate(1, 2) {
            let sp = SeedSPrime::new(hp, s).unwrap();
            for m in FieldVec::enumerate(1, 2) {
                for y in FieldVec::enumerate(1, 2) {
                    let c = g_sprime(&sp, &m, &y).unwrap();
                    assert_eq!(verify(&sp, &m, &y, &c).unwrap(), Verdict::Accepted);
                    for mh in FieldVec::enumerate(1, 2).filter(|v| v != &m) {
                        for yh in FieldVec::enumerate(1, 2) {
                            total += 1;
                            acc +=
                                (verify(&sp, &mh, &yh, &c).unwrap() == Verdict::Accepted) as usize;
                        }
                    }
                }
            }
        }
        assert_eq!(acc * 2, total);
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(50, 100);
        assert_abs_diff_eq!(lo, 0.4038, epsilon = 1e-4);
        assert_abs_diff_eq!(hi, 0.5962, epsilon = 1e-4);
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.25 && hi < 0.35);
    }

    fn brute_d(joint: &[Vec<f64>], steps: usize) -> f64 {
        // grid over sigma on two outputs
        let q: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
        (0..=steps)
            .map(|i| {
                let s = [i as f64 / steps as f64, 1.0 - i as f64 / steps as f64];
                joint
                    .iter()
                    .zip(&q)
                    .map(|(r, qm)| (0..2).map(|e| (r[e] - qm * s[e]).abs()).sum::<f64>())
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn classical_d_matches_grid_search() {
        let joint = vec![vec![0.3, 0.1], vec![0.05, 0.25], vec![0.2, 0.1]];
        assert_abs_diff_eq!(
            classical_d(&joint).unwrap(),
            brute_d(&joint, 100_000),
            epsilon = 1e-5
        );
        let indep = vec![vec![0.12, 0.28], vec![0.18, 0.42]];
        assert_abs_diff_eq!(classical_d(&indep).unwrap(), 0.0, epsilon = 1e-12);
        let copy = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
        assert_abs_diff_eq!(classical_d(&copy).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn classical_d_matches_quantum_oracle() {
        use crate::qexact::{leakage_d, DensityMatrix};
        let joint = vec![
            vec![0.2, 0.05, 0.1],
            vec![0.1, 0.3, 0.05],
            vec![0.05, 0.05, 0.1],
        ];
        let flat: Vec<f64> = joint.iter().flatten().copied().collect();
        let rho = DensityMatrix::diagonal(vec![3, 3], &flat).unwrap();
        let l = leakage_d(&rho).unwrap();
        let exact = classical_d(&joint).unwrap();
        assert!(exact <= l.minimized + 1e-12);
        assert!(l.minimized - exact < 1e-3);
    }

    #[test]
    fn lnm_examples() {
        let hp = HashParams::new(2, 2, 1, 1).unwrap();
        let blind = vec![vec![0.5, 0.5]; 4];
        let r = lnm_check(&hp, &blind).unwrap();
        assert_abs_diff_eq!(r.left, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.right, 0.0, epsilon = 1e-12);
        let copy: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| (i == j) as u8 as f64).collect())
            .collect();
        let r = lnm_check(&hp, &copy).unwrap();
        assert!(r.left <= r.right + 1e-12);
        let noisy: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { 0.7 } else { 0.1 }).collect())
            .collect();
        let r = lnm_check(&hp, &noisy).unwrap();
        assert!(r.left <= r.right + 1e-12 && r.right > 0.0);
        let hp2 = HashParams::new(2, 3, 2, 1).unwrap();
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|i| {
                vec![
                    if i % 3 == 0 { 0.9 } else { 0.2 },
                    if i % 3 == 0 { 0.1 } else { 0.8 },
                ]
            })
            .collect();
        let r = lnm_check(&hp2, &rows).unwrap();
        assert!(r.left <= r.right + 1e-12);
    }
}
