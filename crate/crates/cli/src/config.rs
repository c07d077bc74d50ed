//! Flat `key = value` configuration for `simulate`.

use std::collections::BTreeMap;

use pdc_core::dists::PauliDist;
use pdc_core::protocol::ProtocolConfig;
use pdc_core::wiretap::CodeSpec;

use crate::CliError;

const KEYS: [&str; 9] = [
    "p",
    "n",
    "n1",
    "n2",
    "n3",
    "mix_bob_to_alice",
    "mix_alice_to_bob",
    "code",
    "seed",
];

/// Parses the config text. `n1` defaults to the code dimension, `code` to `identity`,
/// mixes and seed to 0.
pub fn parse(text: &str) -> Result<ProtocolConfig, CliError> {
    let mut kv = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value", lineno + 1))
        })?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key '{k}'",
                lineno + 1
            )));
        }
        if kv.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!(
                "config line {}: duplicate key '{k}'",
                lineno + 1
            )));
        }
    }
    let get = |k: &str| kv.get(k).map(String::as_str);
    let int = |k: &str| -> Result<Option<u64>, CliError> {
        get(k)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| CliError::Usage(format!("config: {k} = '{v}' is not an integer")))
            })
            .transpose()
    };
    let real = |k: &str| -> Result<f64, CliError> {
        get(k).map_or(Ok(0.0), |v| {
            v.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("config: {k} = '{v}' is not a number")))
        })
    };
    let need = |k: &str| -> Result<u64, CliError> {
        int(k)?.ok_or_else(|| CliError::Usage(format!("config: missing {k}")))
    };

    let p = need("p")? as u32;
    let n = need("n")? as usize;
    let p_xz = PauliDist::depolarizing(real("mix_bob_to_alice")?, p)?;
    let p_tilde = PauliDist::depolarizing(real("mix_alice_to_bob")?, p)?;
    let code: CodeSpec = get("code").unwrap_or("identity").parse()?;
    let n1 = match int("n1")? {
        Some(v) => v as usize,
        None => code.build(p, n, &p_tilde.convolve(&p_xz)?)?.n1(),
    };
    Ok(ProtocolConfig {
        p,
        n,
        n1,
        n2: need("n2")? as usize,
        n3: need("n3")? as usize,
        p_xz,
        p_tilde,
        code,
        seed: int("seed")?.unwrap_or(0),
    })
}
