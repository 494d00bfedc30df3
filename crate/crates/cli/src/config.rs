//! Run configuration: `key = value` files with `[section]` headers, command-line overrides.
//!
//! Keys at the top of the file or under `[global]` apply to every subcommand; keys under a
//! section named after a subcommand (e.g. `[scan-q]`) apply only to that subcommand.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use hyperell_core::budget::DEFAULT_BUDGET;
use hyperell_core::testfn::{TestFn, SUPPORT_LIMIT};
use hyperell_core::{Budget, Error, FieldOrder, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Verify,
    Lpoly,
    AvgNlevel,
    Gao,
    RmtKernel,
    RmtEmpirical,
    ScanG,
    ScanQ,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Verify,
        Command::Lpoly,
        Command::AvgNlevel,
        Command::Gao,
        Command::RmtKernel,
        Command::RmtEmpirical,
        Command::ScanG,
        Command::ScanQ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Lpoly => "lpoly",
            Command::AvgNlevel => "avg-nlevel",
            Command::Gao => "gao",
            Command::RmtKernel => "rmt-kernel",
            Command::RmtEmpirical => "rmt-empirical",
            Command::ScanG => "scan-g",
            Command::ScanQ => "scan-q",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = ();
    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeKind {
    Exhaustive,
    Sampled,
}

/// Verification suites, one per library module plus the runner itself.
pub const SUITES: [&str; 9] = ["ffq", "lfun", "ensemble", "combinat", "charsum", "testfn", "gao", "rmt", "cli"];

/// Recognized keys, in the order they are echoed.
pub const KEYS: [&str; 13] =
    ["q", "g", "n", "tf", "mode", "samples", "seed", "budget", "output", "threads", "chunk", "suite", "poly"];

/// A partial set of values from one source (file section or flags).
#[derive(Clone, Debug, Default)]
pub struct Settings {
    pub q: Option<Vec<u64>>,
    pub g: Option<Vec<usize>>,
    pub n: Option<usize>,
    pub tf: Option<Vec<TestFn>>,
    pub mode: Option<ModeKind>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub budget: Option<f64>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub chunk: Option<usize>,
    pub suite: Option<Vec<String>>,
    pub poly: Option<String>,
}

fn list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| format!("cannot parse list item `{}`", s.trim())))
        .collect()
}

fn one<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.trim().parse::<T>().map_err(|_| format!("cannot parse `{}`", v.trim()))
}

impl Settings {
    /// Sets `key` from its textual value; errors carry a message for the caller to locate.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        if value.is_empty() {
            return Err(format!("empty value for `{key}`"));
        }
        match key {
            "q" => {
                let qs: Vec<u64> = list(value)?;
                for &q in &qs {
                    FieldOrder::new(q).map_err(|e| e.to_string())?;
                }
                self.q = Some(qs);
            }
            "g" => {
                let gs: Vec<usize> = list(value)?;
                if gs.contains(&0) {
                    return Err("genus must be ≥ 1".into());
                }
                self.g = Some(gs);
            }
            "n" => {
                let n: usize = one(value)?;
                if !(1..=8).contains(&n) {
                    return Err(format!("n = {n} outside 1..=8"));
                }
                self.n = Some(n);
            }
            "tf" => {
                let mut fs = Vec::new();
                for spec in value.split(',') {
                    let f = TestFn::parse(spec.trim()).map_err(|e| e.to_string())?;
                    if f.support() >= SUPPORT_LIMIT {
                        return Err(format!("test function {f} has support {} ≥ {SUPPORT_LIMIT}", f.support()));
                    }
                    fs.push(f);
                }
                self.tf = Some(fs);
            }
            "mode" => {
                self.mode = Some(match value {
                    "exhaustive" => ModeKind::Exhaustive,
                    "sampled" => ModeKind::Sampled,
                    _ => return Err(format!("mode must be `exhaustive` or `sampled`, got `{value}`")),
                })
            }
            "samples" => {
                let n: u64 = one(value)?;
                if n == 0 {
                    return Err("samples must be ≥ 1".into());
                }
                self.samples = Some(n);
            }
            "seed" => self.seed = Some(parse_seed(value)?),
            "budget" => {
                let b: f64 = one(value)?;
                if !(b > 0.0) {
                    return Err("budget must be positive".into());
                }
                self.budget = Some(b);
            }
            "output" => self.output = Some(PathBuf::from(value)),
            "threads" => {
                let t: usize = one(value)?;
                if t == 0 {
                    return Err("threads must be ≥ 1".into());
                }
                self.threads = Some(t);
            }
            "chunk" => {
                let c: usize = one(value)?;
                if c == 0 {
                    return Err("chunk must be ≥ 1".into());
                }
                self.chunk = Some(c);
            }
            "suite" => {
                let names: Vec<String> = value.split(',').map(|s| s.trim().to_string()).collect();
                if let Some(bad) = names.iter().find(|s| !SUITES.contains(&s.as_str())) {
                    return Err(format!("unknown suite `{bad}` (known: {})", SUITES.join(", ")));
                }
                self.suite = Some(names);
            }
            "poly" => self.poly = Some(value.to_string()),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Values present in `other` replace ours.
    pub fn overlay(&mut self, other: &Settings) {
        macro_rules! take {
            ($($f:ident),*) => {$(if other.$f.is_some() { self.$f = other.$f.clone(); })*};
        }
        take!(q, g, n, tf, mode, samples, seed, budget, output, threads, chunk, suite, poly);
    }
}

fn parse_seed(v: &str) -> std::result::Result<u64, String> {
    let v = v.trim();
    let parsed = match v.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => v.parse(),
    };
    parsed.map_err(|_| format!("cannot parse seed `{v}`"))
}

/// A parsed configuration file.
#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    pub global: Settings,
    pub sections: BTreeMap<Command, Settings>,
}

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

/// Parses the `key = value` grammar. Errors carry 1-based line and column.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut file = ConfigFile::default();
    let mut section: Option<Command> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let indent = content.len() - content.trim_start().len();
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_err(line_no, indent + 1, "section header missing `]`"))?
                .trim();
            section = match name {
                "global" => None,
                _ => Some(name.parse().map_err(|_| parse_err(line_no, indent + 2, format!("unknown section `{name}`")))?),
            };
            continue;
        }
        let eq = content.find('=').ok_or_else(|| parse_err(line_no, indent + 1, "expected `key = value`"))?;
        let key = content[..eq].trim();
        if key.is_empty() {
            return Err(parse_err(line_no, indent + 1, "missing key"));
        }
        let value = &content[eq + 1..];
        let value_col = eq + 2 + (value.len() - value.trim_start().len());
        let target = match section {
            None => &mut file.global,
            Some(c) => file.sections.entry(c).or_default(),
        };
        if !KEYS.contains(&key) {
            return Err(parse_err(line_no, indent + 1, format!("unknown key `{key}`")));
        }
        target.set(key, value).map_err(|m| parse_err(line_no, value_col, m))?;
    }
    Ok(file)
}

/// A fully resolved, validated configuration for one subcommand.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub q: Vec<u64>,
    pub g: Vec<usize>,
    pub n: usize,
    pub tf: Vec<TestFn>,
    pub mode: ModeKind,
    pub samples: u64,
    pub seed: u64,
    pub budget: Budget,
    pub output: Option<PathBuf>,
    pub threads: usize,
    pub chunk: usize,
    pub suites: Vec<String>,
    pub poly: Option<String>,
}

pub const DEFAULT_TF: &str = "triangle:s=1";
pub const DEFAULT_SAMPLES: u64 = 10_000;
pub const DEFAULT_CHUNK: usize = 256;

impl RunConfig {
    /// Merges sources: flag > `HYPERELL_BUDGET` (budget only) > subcommand section > global > default.
    pub fn resolve(command: Command, file: &ConfigFile, flags: &Settings, env_budget: Option<Budget>) -> Result<Self> {
        let mut s = file.global.clone();
        if let Some(sec) = file.sections.get(&command) {
            s.overlay(sec);
        }
        let file_budget = s.budget;
        s.overlay(flags);
        let budget = match (flags.budget, env_budget, file_budget) {
            (Some(b), _, _) => Budget::new(b),
            (None, Some(b), _) => b,
            (None, None, Some(b)) => Budget::new(b),
            (None, None, None) => Budget::new(DEFAULT_BUDGET),
        };
        let n = s.n.unwrap_or(1);
        let mut tf = s.tf.unwrap_or_else(|| vec![TestFn::parse(DEFAULT_TF).expect("default test function")]);
        if tf.len() == 1 && n > 1 {
            tf = vec![tf[0].clone(); n];
        }
        if tf.len() != n {
            return Err(Error::Domain(format!("{} test functions given for n = {n}", tf.len())));
        }
        let threads = s.threads.unwrap_or_else(|| std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1));
        Ok(RunConfig {
            command,
            q: s.q.unwrap_or_else(|| vec![3]),
            g: s.g.unwrap_or_else(|| vec![1]),
            n,
            tf,
            mode: s.mode.unwrap_or(ModeKind::Exhaustive),
            samples: s.samples.unwrap_or(DEFAULT_SAMPLES),
            seed: s.seed.unwrap_or(0),
            budget,
            output: s.output,
            threads,
            chunk: s.chunk.unwrap_or(DEFAULT_CHUNK),
            suites: s.suite.unwrap_or_else(|| SUITES.iter().map(|s| s.to_string()).collect()),
            poly: s.poly,
        })
    }

    /// Test functions joined the way they appear in the CSV `tf_spec` column.
    pub fn tf_spec(&self) -> String {
        self.tf.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(";")
    }

    /// The (q, g) sweep in row order.
    pub fn sweep(&self) -> Vec<(u64, usize)> {
        self.q.iter().flat_map(|&q| self.g.iter().map(move |&g| (q, g))).collect()
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[String]| v.join(",");
        writeln!(f, "[{}]", self.command)?;
        writeln!(f, "q = {}", join(&self.q.iter().map(|x| x.to_string()).collect::<Vec<_>>()))?;
        writeln!(f, "g = {}", join(&self.g.iter().map(|x| x.to_string()).collect::<Vec<_>>()))?;
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "tf = {}", join(&self.tf.iter().map(|x| x.to_string()).collect::<Vec<_>>()))?;
        let mode = match self.mode {
            ModeKind::Exhaustive => "exhaustive",
            ModeKind::Sampled => "sampled",
        };
        writeln!(f, "mode = {mode}")?;
        writeln!(f, "samples = {}", self.samples)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "budget = {:e}", self.budget.ops())?;
        if let Some(o) = &self.output {
            writeln!(f, "output = {}", o.display())?;
        }
        writeln!(f, "threads = {}", self.threads)?;
        writeln!(f, "chunk = {}", self.chunk)?;
        writeln!(f, "suite = {}", join(&self.suites))?;
        if let Some(p) = &self.poly {
            writeln!(f, "poly = {p}")?;
        }
        Ok(())
    }
}
