//! `section.key = value` configuration with command-line overrides.
//!
//! Every value read through a getter is recorded, defaults included, so the
//! manifest echoes the fully resolved configuration.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::CliError;

/// Every key any command understands. Unknown keys are a usage error so
/// typos do not silently fall back to defaults.
pub const KNOWN_KEYS: &[&str] = &[
    "params.n",
    "params.c",
    "params.alpha",
    "params.beta",
    "grid.points",
    "grid.length",
    "initial.kind",
    "initial.band",
    "initial.floor",
    "initial.value",
    "initial.center",
    "initial.width",
    "initial.height",
    "solver.t_start",
    "solver.t_end",
    "solver.samples",
    "solver.times",
    "solver.safety",
    "check.family",
    "check.eps",
    "check.eps_prime",
    "check.tol_factor",
    "check.t_min_factor",
    "check.identity_times",
    "check.identity_tau",
    "phi.samples",
    "phi.t_min",
    "phi.t_max",
    "phi.limit_time",
    "phi.limit_tol",
    "converge.resolutions",
    "converge.identity_time",
    "converge.identity_tau",
    "converge.min_order",
    "classical.pairs",
    "classical.pair_file",
    "classical.t_min",
    "classical.t_max",
    "classical.time_step",
    "classical.rel_tol",
    "waves.scan",
    "waves.search_tol",
    "waves.chain",
    "waves.chain_alpha",
    "waves.chain_beta",
    "waves.chain_eta",
    "waves.chain_t",
    "waves.chain_v_max",
    "waves.chain_slack",
    "cutoff.n",
    "cutoff.r",
    "cutoff.k",
    "cutoff.samples",
    "sweep.mode",
    "sweep.alpha_points",
    "sweep.beta_points",
    "sweep.alpha_min",
    "sweep.alpha_max",
    "sweep.beta_min",
    "sweep.beta_max",
    "run.seed",
];

#[derive(Debug, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
    resolved: RefCell<BTreeMap<String, String>>,
    pub output_dir: Option<PathBuf>,
}

fn check_key(key: &str) -> Result<(), CliError> {
    if KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("unknown config key {key:?}")))
    }
}

fn split_assignment(s: &str) -> Option<(&str, &str)> {
    let (k, v) = s.split_once('=')?;
    Some((k.trim(), v.trim()))
}

impl RunConfig {
    /// Parses config text. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_assignment(line)
                .ok_or_else(|| CliError::Usage(format!("line {}: expected `section.key = value`", lineno + 1)))?;
            check_key(k).map_err(|e| CliError::Usage(format!("line {}: {e}", lineno + 1)))?;
            cfg.values.insert(k.to_string(), v.to_string());
        }
        Ok(cfg)
    }

    /// Applies one `section.key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, v) = split_assignment(assignment)
            .ok_or_else(|| CliError::Usage(format!("--set expects section.key=value, got {assignment:?}")))?;
        check_key(k)?;
        self.values.insert(k.to_string(), v.to_string());
        Ok(())
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    fn raw(&self, key: &str, default: &str) -> String {
        debug_assert!(KNOWN_KEYS.contains(&key), "{key}");
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.resolved.borrow_mut().insert(key.to_string(), v.clone());
        v
    }

    pub fn get<T: FromStr + ToString>(&self, key: &str, default: T) -> Result<T, CliError> {
        let v = self.raw(key, &default.to_string());
        v.parse().map_err(|_| CliError::Usage(format!("{key}: cannot parse {v:?}")))
    }

    pub fn get_str(&self, key: &str, default: &str) -> String {
        self.raw(key, default)
    }

    pub fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => {
                self.resolved.borrow_mut().insert(key.to_string(), v.clone());
                v.parse().map(Some).map_err(|_| CliError::Usage(format!("{key}: cannot parse {v:?}")))
            }
        }
    }

    /// Comma-separated list; an empty value gives an empty list.
    pub fn get_list<T: FromStr>(&self, key: &str, default: &str) -> Result<Vec<T>, CliError> {
        let v = self.raw(key, default);
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| CliError::Usage(format!("{key}: cannot parse {s:?}"))))
            .collect()
    }

    /// `command`, the output directory, then every resolved key.
    pub fn manifest(&self, command: &str) -> String {
        let mut all = self.values.clone();
        all.extend(self.resolved.borrow().iter().map(|(k, v)| (k.clone(), v.clone())));
        let mut s = String::new();
        let _ = writeln!(s, "command = {command}");
        if let Some(dir) = &self.output_dir {
            let _ = writeln!(s, "output_dir = {}", dir.display());
        }
        for (k, v) in all {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}
