use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use holodyn::bifurcation::{Axis, ParamGrid};
use holodyn::maps::Family;
use holodyn::C64;

use crate::CliError;

/// Tunables reachable through `--set k=v`, with their defaults.
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    ("agree", "0.05"),
    ("cap", "4096"),
    ("max_iter", "2000"),
    ("n_max", "10"),
    ("resultant_scale", "1"),
    ("samples", "100000"),
    ("tol", "1e-10"),
];

#[derive(Debug, Clone)]
pub struct Overrides(BTreeMap<String, String>);

impl Overrides {
    pub fn parse(items: &[String]) -> Result<Self, CliError> {
        let mut map: BTreeMap<String, String> =
            KNOWN_KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for item in items {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Invalid(format!("--set expects key=value, got '{item}'")))?;
            if !map.contains_key(k) {
                let keys: Vec<&str> = KNOWN_KEYS.iter().map(|(k, _)| *k).collect();
                return Err(CliError::Invalid(format!("unknown --set key '{k}' (known: {})", keys.join(", "))));
            }
            map.insert(k.to_string(), v.to_string());
        }
        Ok(Overrides(map))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = &self.0[key];
        raw.parse()
            .map_err(|_| CliError::Invalid(format!("cannot parse --set {key}={raw}")))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&String, &String)> {
        self.0.iter()
    }
}

pub fn parse_family(s: &str) -> Result<Family, CliError> {
    s.parse().map_err(CliError::from)
}

pub fn parse_complex(s: &str) -> Result<C64, CliError> {
    let bad = || CliError::Invalid(format!("expected re,im but got '{s}'"));
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    Ok(C64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?))
}

/// `cx,cy,halfw,res[,cx2,cy2,halfw2,res2]`
pub fn parse_grid(s: &str) -> Result<ParamGrid, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 && parts.len() != 8 {
        return Err(CliError::Invalid(format!(
            "--grid expects cx,cy,halfw,res or two such groups, got '{s}'"
        )));
    }
    let axes = parts
        .chunks(4)
        .map(|g| {
            let f = |x: &str| x.parse::<f64>().map_err(|_| CliError::Invalid(format!("bad number '{x}' in --grid")));
            let res = g[3]
                .parse::<usize>()
                .map_err(|_| CliError::Invalid(format!("bad resolution '{}' in --grid", g[3])))?;
            Axis::new(C64::new(f(g[0])?, f(g[1])?), f(g[2])?, res).map_err(CliError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    ParamGrid::new(axes).map_err(CliError::from)
}

pub fn grid_spec(g: &ParamGrid) -> String {
    g.axes()
        .iter()
        .map(|a| format!("{},{},{},{}", a.center.re, a.center.im, a.half_width, a.res))
        .collect::<Vec<_>>()
        .join(",")
}

/// The fully resolved run configuration, echoed to `<prefix>.config.txt`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub subcommand: String,
    pub entries: Vec<(String, String)>,
    pub seed: u64,
    pub workers: usize,
    pub overrides: Overrides,
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "subcommand={}", self.subcommand)?;
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "workers={}", self.workers)?;
        for (k, v) in self.overrides.pairs() {
            writeln!(f, "set.{k}={v}")?;
        }
        Ok(())
    }
}
