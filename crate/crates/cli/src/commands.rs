use std::path::Path;

use pdc_core::bounds::{
    additive_channel, asymptotic_rates, eps_b_bound, eps_c_bound, eps_e_bound, m_hat_lengths,
    SecurityTargets, TGrid,
};
use pdc_core::dists::PauliDist;
use pdc_core::estimation::estimate as run_estimate;
use pdc_core::gf::FieldVec;
use pdc_core::hashing::HashParams;
use pdc_core::protocol::{Adversary, Protocol, TrialRngs};
use pdc_core::qexact::{identity_residuals, purify};
use pdc_core::wiretap::{exact_leakage, leakage_bound, CodeSpec, EveChannel};
use pdc_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::output::{num, sink, write_json, Table};
use crate::{config, AdversaryArg, CliError, Common, Format};

fn emit(c: &Common, default: Format, table: &Table) -> Result<(), CliError> {
    let out = sink(c.output.as_deref())?;
    match c.format.unwrap_or(default) {
        Format::Csv => table.write_csv(out),
        Format::Json => write_json(out, &table.to_json()),
    }
}

fn dep(mix: f64, p: u32) -> Result<PauliDist, CliError> {
    Ok(PauliDist::depolarizing(mix, p)?)
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "grid '{spec}' is not start:stop:step with step > 0 and start <= stop"
        ))
    };
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || !(start <= stop) || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

pub fn rates(c: &Common, p: u32, grid: &str, mix_tilde: Option<f64>) -> Result<(), CliError> {
    let mut table = Table::new(vec!["mix", "r1", "r2", "r3", "r"]);
    for mix in parse_grid(grid)? {
        let r = asymptotic_rates(&dep(mix, p)?, &dep(mix_tilde.unwrap_or(mix), p)?)?;
        table.push(vec![
            num(mix),
            num(r.r1_star),
            num(r.r2_star),
            num(0.0),
            num(r.r_star),
        ]);
    }
    emit(c, Format::Csv, &table)
}

pub fn finite(
    c: &Common,
    p: u32,
    mix: f64,
    mix_tilde: Option<f64>,
    n_grid: &str,
    eps: [f64; 3],
) -> Result<(), CliError> {
    let targets = SecurityTargets::new(eps[0], eps[1], eps[2])?;
    let ns: Vec<u64> = n_grid
        .split(',')
        .map(|s| s.trim().parse::<u64>().ok().filter(|&n| n > 0))
        .collect::<Option<_>>()
        .ok_or_else(|| {
            CliError::Usage(format!(
                "n grid '{n_grid}' must be positive integers separated by commas"
            ))
        })?;
    let (pd, pt) = (dep(mix, p)?, dep(mix_tilde.unwrap_or(mix), p)?);
    let grid = TGrid::standard();
    let mut table = Table::new(vec![
        "n",
        "feasible",
        "n1",
        "sacrifice",
        "n3",
        "n2",
        "r1",
        "r2",
        "r3",
        "r",
        "eps_c",
        "eps_e",
        "eps_b",
    ]);
    let mut feasible = 0;
    for &n in &ns {
        match m_hat_lengths(&targets, n, &pd, &pt, &grid) {
            Ok(f) => {
                feasible += 1;
                table.push(vec![
                    n.to_string(),
                    "true".into(),
                    f.n1.to_string(),
                    f.sacrifice.to_string(),
                    f.n3.to_string(),
                    f.n2.to_string(),
                    num(f.r1),
                    num(f.r2),
                    num(f.r3),
                    num(f.r),
                    num(f.eps_c),
                    num(f.eps_e),
                    num(f.eps_b),
                ]);
            }
            Err(Error::Infeasible(_)) => {
                let mut row = vec![n.to_string(), "false".into()];
                row.resize(13, String::new());
                table.push(row);
            }
            Err(e) => return Err(e.into()),
        }
    }
    emit(c, Format::Csv, &table)?;
    if feasible == 0 {
        return Err(Error::Infeasible(format!(
            "eps_C = {} cannot be met at any n in {n_grid}",
            eps[0]
        ))
        .into());
    }
    Ok(())
}

pub fn simulate(
    c: &Common,
    path: &Path,
    trials: u64,
    adversary: AdversaryArg,
    dump: u64,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = config::parse(&text)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    let proto = Protocol::new(cfg.clone())?;
    let adv = match adversary {
        AdversaryArg::None => Adversary::None,
        AdversaryArg::Intercept => Adversary::Intercept,
        AdversaryArg::Tamper => Adversary::uniform_substitution(),
    };
    let stats = proto.monte_carlo(trials, &adv)?;
    let hp = proto.hash_params();
    let p_eff = cfg.p_tilde.convolve(&cfg.p_xz)?;
    let grid = TGrid::standard();
    let eps_c = eps_c_bound(cfg.n as u64, cfg.n1 as u64, &p_eff, &grid)?;
    let eps_e = eps_e_bound(cfg.n as u64, hp.sacrifice() as u64, &cfg.p_xz, &grid);
    let eps_b: f64 = eps_b_bound(cfg.n3 as u64, cfg.p);

    if c.format == Some(Format::Csv) {
        let mut table = Table::new(vec![
            "metric",
            "count",
            "trials",
            "rate",
            "wilson_lo",
            "wilson_hi",
            "bound",
        ]);
        for (name, r, bound) in [
            ("abort", stats.abort, Some(eps_c)),
            ("undetected_error", stats.undetected_error, Some(eps_b)),
            ("accepted_and_correct", stats.accepted_and_correct, None),
            ("code_block_error", stats.code_block_error, None),
        ] {
            table.push(vec![
                name.into(),
                r.count.to_string(),
                r.trials.to_string(),
                num(r.rate),
                num(r.lo),
                num(r.hi),
                bound.map(num).unwrap_or_default(),
            ]);
        }
        return table.write_csv(sink(c.output.as_deref())?);
    }

    let mut transcripts = Vec::new();
    for t in 0..dump.min(trials) {
        let mut rngs = TrialRngs::new(cfg.seed, t);
        let m = FieldVec::random(cfg.n2, cfg.p, &mut rngs.encoding);
        transcripts.push(
            serde_json::to_value(proto.run_protocol1(&m, &adv, &mut rngs)?)
                .map_err(|e| CliError::Io(e.to_string()))?,
        );
    }
    let value = json!({
        "config": {
            "p": cfg.p, "n": cfg.n, "n1": cfg.n1, "n2": cfg.n2, "n3": cfg.n3,
            "code": proto.code().name(), "seed": cfg.seed,
        },
        "adversary": format!("{adversary:?}").to_lowercase(),
        "stats": stats,
        "analytic": {
            "eps_c_random_code": eps_c,
            "eps_e": eps_e,
            "eps_b": eps_b,
        },
        "transcripts": transcripts,
    });
    write_json(sink(c.output.as_deref())?, &value)
}

pub fn estimate(
    c: &Common,
    p: u32,
    mix: f64,
    probs: Option<&str>,
    shots: u64,
) -> Result<(), CliError> {
    let truth = match probs {
        Some(s) => {
            let v: Vec<f64> = s
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| {
                    CliError::Usage(format!(
                        "probs '{s}' is not a comma-separated list of numbers"
                    ))
                })?;
            PauliDist::new(p, v)?
        }
        None => dep(mix, p)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed.unwrap_or(0));
    let report = run_estimate::<f64, _>(&truth, shots, &mut rng)?;
    if c.format == Some(Format::Json) {
        return write_json(
            sink(c.output.as_deref())?,
            &serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?,
        );
    }
    let mut table = Table::new(vec!["x", "z", "truth", "raw", "estimate"]);
    for x in 0..p {
        for z in 0..p {
            let i = (x * p + z) as usize;
            table.push(vec![
                x.to_string(),
                z.to_string(),
                num(truth.probs()[i]),
                num(report.raw[i]),
                num(report.p_hat.probs()[i]),
            ]);
        }
    }
    table.write_csv(sink(c.output.as_deref())?)
}

pub struct LeakageArgs {
    pub p: u32,
    pub n: usize,
    pub code: String,
    pub n2: usize,
    pub n3: usize,
    pub eve_mix: f64,
    pub quantum: bool,
    pub t_points: Option<usize>,
}

pub fn leakage(c: &Common, a: LeakageArgs) -> Result<(), CliError> {
    let spec: CodeSpec = a.code.parse()?;
    let noise = dep(a.eve_mix, a.p)?;
    let code = spec.build(a.p, a.n, &noise)?;
    let hp = HashParams::new(a.p, code.n1(), a.n2, a.n3)?;
    let eve = if a.quantum {
        EveChannel::Quantum(purify(&noise)?.density().partial_trace(&[0, 2])?)
    } else {
        EveChannel::Classical(additive_channel(&noise))
    };
    let points = a.t_points.unwrap_or(if a.quantum { 12 } else { 200 });
    let grid = TGrid::log_spaced(1e-3, 1.0, points)?;
    let exact = exact_leakage(code.as_ref(), &hp, &eve)?;
    let bound = leakage_bound(code.as_ref(), &hp, &eve, &grid)?;
    let mut table = Table::new(vec![
        "code",
        "n",
        "n1",
        "sacrifice",
        "eve",
        "exact",
        "bound",
        "t",
    ]);
    table.push(vec![
        code.name(),
        a.n.to_string(),
        code.n1().to_string(),
        hp.sacrifice().to_string(),
        if a.quantum {
            "quantum".into()
        } else {
            "classical".into()
        },
        num(exact),
        num(bound.value),
        num(bound.t),
    ]);
    emit(c, Format::Csv, &table)
}

pub fn verify_identities(c: &Common, p: u32, count: usize, tol: f64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed.unwrap_or(0));
    let mut table = Table::new(vec![
        "case",
        "t",
        "cond_ab",
        "cond_ae",
        "renyi_ab",
        "renyi_ae_slack",
        "info_b",
        "info_e",
        "ok",
    ]);
    let mut failures = 0;
    for case in 0..count {
        let pd = PauliDist::random(p, &mut rng)?;
        let pt = PauliDist::random(p, &mut rng)?;
        for i in 1..=9 {
            let t = i as f64 / 10.0;
            let r = identity_residuals(&pd, &pt, t)?;
            let ok = r.holds(tol);
            failures += !ok as usize;
            table.push(vec![
                case.to_string(),
                num(t),
                num(r.cond_ab),
                num(r.cond_ae),
                num(r.renyi_ab),
                num(r.renyi_ae_slack),
                num(r.info_b),
                num(r.info_e),
                ok.to_string(),
            ]);
        }
    }
    emit(c, Format::Csv, &table)?;
    if failures > 0 {
        return Err(CliError::Check(format!(
            "{failures} identity checks exceeded tolerance {tol}"
        )));
    }
    Ok(())
}
