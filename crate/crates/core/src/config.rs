//! Plain-text `key = value` scenario files.
//!
//! ```text
//! # desk-scale paired scenario
//! users = 16
//! bs_antennas = 32
//! user_antennas = 2
//! pt_dbm = 30
//! sigma2_dbm = -35
//! mu2 = 0.01
//! ```
//!
//! Blank lines and `#` comments are ignored. List values are comma
//! separated; a single value is broadcast to every user where a per-user
//! list is expected. Unknown keys are rejected.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `users` | required | number of users `K` |
//! | `bs_antennas` | required | BS antennas `N` |
//! | `user_antennas` | required | `M_k`, one value or `K` values |
//! | `pt_dbm` | 30 | transmit power |
//! | `sigma2_dbm` | -35 | noise power |
//! | `distances_m` | paired 50/250 | one value or `K` values |
//! | `near_distance_m`, `far_distance_m` | 50, 250 | paired layout distances |
//! | `azimuths_deg` | paired layout | `K` values |
//! | `angular_spread_deg` | 0.5 | departure spread around each azimuth |
//! | `paired_offset_deg` | 0.5 | azimuth offset of the paired users |
//! | `n_paths` | 10 | rays per user |
//! | `mu2` | 0 | CSI error variance, one value or `K` values |
//! | `alpha` | `default` | `default` (`M sigma^2 / P_T`) or one / `K` values |
//! | `reg_matrix` | `successive_j` | `successive_j`, `identity` or `diagonal` |
//! | `reg_diagonal` | none | `M` or `K*M` weights, required for `diagonal` |
//! | `seed` | 1 | master RNG seed |
//! | `n_trials` | 200 | Monte-Carlo realizations |
//! | `duplicate_users` | none | `src:dst` pairs (1-based), copies channels |
//! | `precoder_channel` | `unweighted` | `unweighted` or `weighted` (divide by `sqrt(L_k)`) |

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::channel::{self, PrecoderChannel, Scenario};
use crate::precoding::{AlphaPolicy, RegMatrixPolicy};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { key: String, line: usize },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

const KEYS: &[&str] = &[
    "users",
    "bs_antennas",
    "user_antennas",
    "pt_dbm",
    "sigma2_dbm",
    "distances_m",
    "near_distance_m",
    "far_distance_m",
    "azimuths_deg",
    "angular_spread_deg",
    "paired_offset_deg",
    "n_paths",
    "mu2",
    "alpha",
    "reg_matrix",
    "reg_diagonal",
    "seed",
    "n_trials",
    "duplicate_users",
    "precoder_channel",
];

struct Entries(BTreeMap<String, String>);

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

impl Entries {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parse_one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
        v.trim()
            .parse()
            .map_err(|_| invalid(key, format!("cannot parse `{}`", v.trim())))
    }

    fn required<T: std::str::FromStr>(&self, key: &'static str) -> Result<T, ConfigError> {
        let v = self.raw(key).ok_or(ConfigError::Missing(key))?;
        Self::parse_one(key, v)
    }

    fn optional<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        self.raw(key)
            .map_or(Ok(default), |v| Self::parse_one(key, v))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        self.raw(key)
            .map(|v| v.split(',').map(|x| Self::parse_one(key, x)).collect())
            .transpose()
    }

    /// A list of length `users`, or a single value broadcast to it.
    fn per_user<T: std::str::FromStr + Clone>(
        &self,
        key: &str,
        users: usize,
    ) -> Result<Option<Vec<T>>, ConfigError> {
        match self.list::<T>(key)? {
            None => Ok(None),
            Some(v) if v.len() == 1 => Ok(Some(vec![v[0].clone(); users])),
            Some(v) if v.len() == users => Ok(Some(v)),
            Some(v) => Err(invalid(
                key,
                format!("expected 1 or {users} values, got {}", v.len()),
            )),
        }
    }
}

fn parse_entries(text: &str) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or(ConfigError::Syntax { line: line_no })?;
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { key, line: line_no });
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(ConfigError::Duplicate { key, line: line_no });
        }
    }
    Ok(Entries(map))
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let e = parse_entries(text)?;
    let users: usize = e.required("users")?;
    if users == 0 {
        return Err(invalid("users", "must be at least 1"));
    }
    let bs_antennas: usize = e.required("bs_antennas")?;
    let user_antennas = e
        .per_user::<usize>("user_antennas", users)?
        .ok_or(ConfigError::Missing("user_antennas"))?;

    let mut s = Scenario::paired(users, bs_antennas, 1);
    s.user_antennas = user_antennas;
    s.pt_dbm = e.optional("pt_dbm", s.pt_dbm)?;
    s.sigma2_dbm = e.optional("sigma2_dbm", s.sigma2_dbm)?;
    s.angular_spread_deg = e.optional("angular_spread_deg", s.angular_spread_deg)?;
    s.paired_offset_deg = e.optional("paired_offset_deg", s.paired_offset_deg)?;
    s.n_paths = e.optional("n_paths", s.n_paths)?;
    s.seed = e.optional("seed", s.seed)?;
    s.n_trials = e.optional("n_trials", s.n_trials)?;

    let near = e.optional("near_distance_m", channel::DEFAULT_NEAR_M)?;
    let far = e.optional("far_distance_m", channel::DEFAULT_FAR_M)?;
    s.distances_m = match e.per_user::<f64>("distances_m", users)? {
        Some(d) => d,
        None => channel::paired_distances(users, near, far),
    };
    s.azimuths_deg = match e.list::<f64>("azimuths_deg")? {
        Some(a) if a.len() == users => a,
        Some(a) => {
            return Err(invalid(
                "azimuths_deg",
                format!("expected {users} values, got {}", a.len()),
            ))
        }
        None => channel::paired_azimuths(users, s.paired_offset_deg),
    };
    s.mu2 = e.per_user::<f64>("mu2", users)?.unwrap_or(vec![0.0; users]);

    s.alpha_policy = match e.raw("alpha") {
        None | Some("default") => AlphaPolicy::NoiseToPower,
        Some(_) => AlphaPolicy::Explicit(e.per_user::<f64>("alpha", users)?.unwrap_or_default()),
    };

    let m: usize = s.user_antennas.iter().sum();
    s.reg_matrix_policy = match e.raw("reg_matrix").unwrap_or("successive_j") {
        "successive_j" => RegMatrixPolicy::SuccessiveJ,
        "identity" => RegMatrixPolicy::Identity,
        "diagonal" => {
            let w = e
                .list::<f64>("reg_diagonal")?
                .ok_or(ConfigError::Missing("reg_diagonal"))?;
            let diags = if w.len() == m {
                vec![w; users]
            } else if w.len() == users * m {
                w.chunks(m).map(<[f64]>::to_vec).collect()
            } else {
                return Err(invalid(
                    "reg_diagonal",
                    format!("expected {m} or {} values, got {}", users * m, w.len()),
                ));
            };
            RegMatrixPolicy::ExplicitDiagonal(diags)
        }
        other => {
            return Err(invalid(
                "reg_matrix",
                format!("`{other}` is not successive_j, identity or diagonal"),
            ))
        }
    };
    if e.raw("reg_diagonal").is_some()
        && !matches!(s.reg_matrix_policy, RegMatrixPolicy::ExplicitDiagonal(_))
    {
        return Err(invalid(
            "reg_diagonal",
            "only valid with reg_matrix = diagonal",
        ));
    }

    s.precoder_channel = match e.raw("precoder_channel").unwrap_or("unweighted") {
        "unweighted" => PrecoderChannel::Unweighted,
        "weighted" => PrecoderChannel::Weighted,
        other => {
            return Err(invalid(
                "precoder_channel",
                format!("`{other}` is not unweighted or weighted"),
            ))
        }
    };

    if let Some(pairs) = e.raw("duplicate_users") {
        s.duplicate_users = pairs
            .split(',')
            .map(|p| {
                let (a, b) = p
                    .split_once(':')
                    .ok_or_else(|| invalid("duplicate_users", format!("`{p}` is not src:dst")))?;
                let a: usize = Entries::parse_one("duplicate_users", a)?;
                let b: usize = Entries::parse_one("duplicate_users", b)?;
                if a == 0 || b == 0 {
                    return Err(invalid("duplicate_users", "user indices are 1-based"));
                }
                Ok((a - 1, b - 1))
            })
            .collect::<Result<_, _>>()?;
    }

    s.validate().map_err(|reason| {
        let key = reason
            .split([':', ' '])
            .next()
            .unwrap_or("config")
            .to_string();
        ConfigError::Invalid { key, reason }
    })?;
    Ok(s)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}
