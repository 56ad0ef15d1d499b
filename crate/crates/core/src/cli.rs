//! Command-line front end. Every command produces one table with columns
//! `x,y,y_lo,y_hi,model,n,seed`, sorted by `x`.
//!
//! | command      | rows                                                        |
//! |--------------|-------------------------------------------------------------|
//! | `sweep`      | `model` evaluated at each point                             |
//! | `simulate`   | Monte Carlo estimate at each point, 95% Wilson interval     |
//! | `threshold`  | `x` = threshold, `y_lo`/`y_hi` = final bisection bracket    |
//! | `encode`     | encoding bound, its critical point, or the cascade MC       |
//! | `compare-vn` | randomized and hypercube MC side by side                    |
//!
//! For `threshold --model level2|level3` the row is `(eps*, eps*)`. For
//! `threshold --model universal` it is `(p*, eps*)` and the bracket is in
//! `p`. For `encode --pcrit` it is `(p_crit, p_fail(p_crit))`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    correction_threshold, sweep, universal_threshold, McSettings, ModelTag, Param, SweepRecord,
};
use crate::encoding::{cascade_mc, p_crit, pfail_bound, CascadeOptions};
use crate::error::{Error, Result};
use crate::markov::{build_level2_chain, build_level3_chain};
use crate::netsim::{Readout, RunOptions, StopRule};

pub const COLUMNS: &str = "x,y,y_lo,y_hi,model,n,seed";
const HEADER_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Sweep,
    Simulate,
    Threshold,
    Encode,
    CompareVn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    Eps,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReadoutArg {
    Majority,
    Corrected,
}

#[derive(Debug, Parser)]
#[command(name = "ftcc", version, about = "Fault-tolerant classical computation with noisy majority gates")]
pub struct Cli {
    pub command: CommandKind,
    /// level2, level3, concat-T-L, vn_mc, hypercube_mc, pfail, cascade_mc, universal
    #[arg(long)]
    pub model: Option<String>,
    /// Code level n of the simulated register (3^(n+1) bits).
    #[arg(long)]
    pub level: Option<u32>,
    /// MAJ3 error rate(s), comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["p", "grid"])]
    pub eps: Option<Vec<f64>>,
    /// Physical error rate(s), comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "grid")]
    pub p: Option<Vec<f64>>,
    /// Evenly spaced points `lo:hi:count`, in units given by `--param`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, value_enum)]
    pub param: Option<ParamArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 300)]
    pub min_flips: u64,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_phases: u64,
    #[arg(long, default_value_t = 50)]
    pub warmup: u64,
    #[arg(long, value_enum)]
    pub readout: Option<ReadoutArg>,
    /// Encoding trials for the cascade Monte Carlo.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Correction phases after encoding.
    #[arg(long, default_value_t = 12)]
    pub phases: u32,
    /// Encode a 1 instead of a 0.
    #[arg(long)]
    pub one: bool,
    #[arg(long)]
    pub pcrit: bool,
    #[arg(long)]
    pub mc: bool,
    /// Worker threads, 0 for all cores. Never changes the output.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything that determines the numbers in an output table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub model: Option<ModelTag>,
    pub level: u32,
    pub param: Param,
    pub points: Vec<f64>,
    pub seed: u64,
    pub min_flips: u64,
    pub max_phases: u64,
    pub warmup: u64,
    pub readout: Option<Readout>,
    pub trials: u64,
    pub phases: u32,
    pub input: bool,
    pub pcrit: bool,
    pub mc: bool,
    pub format: Format,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::InvalidGrid(format!("expected lo:hi:count, got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    match count {
        0 => Ok(Vec::new()),
        1 => Ok(vec![lo]),
        _ => {
            if !(lo < hi) {
                return Err(Error::InvalidGrid(format!("need lo < hi in `{text}`")));
            }
            let step = (hi - lo) / (count - 1) as f64;
            Ok((0..count)
                .map(|k| if k + 1 == count { hi } else { lo + step * k as f64 })
                .collect())
        }
    }
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let model = cli.model.as_deref().map(str::parse::<ModelTag>).transpose()?;
        let (param, points) = match (&cli.eps, &cli.p, &cli.grid) {
            (Some(e), _, _) => {
                if cli.param == Some(ParamArg::P) {
                    return Err(Error::InvalidConfig("--eps with --param p".into()));
                }
                (Param::Eps, e.clone())
            }
            (None, Some(p), _) => {
                if cli.param == Some(ParamArg::Eps) {
                    return Err(Error::InvalidConfig("--p with --param eps".into()));
                }
                (Param::P, p.clone())
            }
            (None, None, Some(g)) => {
                let param = match cli.param {
                    Some(ParamArg::Eps) => Param::Eps,
                    Some(ParamArg::P) => Param::P,
                    None => {
                        return Err(Error::InvalidConfig("--grid needs --param eps|p".into()))
                    }
                };
                (param, parse_grid(g)?)
            }
            (None, None, None) => (
                match cli.param {
                    Some(ParamArg::P) => Param::P,
                    _ => Param::Eps,
                },
                Vec::new(),
            ),
        };
        let cfg = RunConfig {
            command: cli.command,
            model,
            level: cli.level.unwrap_or(3),
            param,
            points,
            seed: cli.seed,
            min_flips: cli.min_flips,
            max_phases: cli.max_phases,
            warmup: cli.warmup,
            readout: cli.readout.map(|r| match r {
                ReadoutArg::Majority => Readout::Majority,
                ReadoutArg::Corrected => Readout::Corrected,
            }),
            trials: cli.trials,
            phases: cli.phases,
            input: cli.one,
            pcrit: cli.pcrit,
            mc: cli.mc,
            format: cli.format,
            workers: cli.workers,
            out: cli.out.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let invalid = |m: &str| Err(Error::InvalidConfig(m.into()));
        let needs_points = |c: &Self| {
            if c.points.is_empty() {
                invalid("give --eps, --p or --grid")
            } else {
                Ok(())
            }
        };
        if self.pcrit && self.mc {
            return invalid("--pcrit and --mc are exclusive");
        }
        if (self.pcrit || self.mc) && self.command != CommandKind::Encode {
            return invalid("--pcrit and --mc belong to the encode command");
        }
        match self.command {
            CommandKind::Sweep => {
                match self.model {
                    None => return invalid("sweep needs --model"),
                    Some(ModelTag::CascadeMc) | Some(ModelTag::Universal) => {
                        return invalid("sweep model must be level2, level3, concat-T-L, vn_mc, hypercube_mc or pfail")
                    }
                    _ => {}
                }
                needs_points(self)
            }
            CommandKind::Simulate => {
                match self.model {
                    Some(ModelTag::VnMc) | Some(ModelTag::HypercubeMc) => {}
                    Some(ModelTag::CascadeMc) => {
                        if self.param != Param::P {
                            return invalid("cascade_mc takes --p");
                        }
                    }
                    _ => return invalid("simulate needs --model vn_mc, hypercube_mc or cascade_mc"),
                }
                needs_points(self)
            }
            CommandKind::Threshold => match self.model {
                Some(ModelTag::Level2) | Some(ModelTag::Level3) | Some(ModelTag::Universal) => {
                    if self.points.is_empty() {
                        Ok(())
                    } else {
                        invalid("threshold takes no points")
                    }
                }
                _ => invalid("threshold needs --model level2, level3 or universal"),
            },
            CommandKind::Encode => {
                if self.model.is_some() {
                    return invalid("encode takes no --model");
                }
                if self.pcrit {
                    return if self.points.is_empty() {
                        Ok(())
                    } else {
                        invalid("--pcrit takes no points")
                    };
                }
                if self.param != Param::P {
                    return invalid("encode takes --p");
                }
                needs_points(self)
            }
            CommandKind::CompareVn => {
                if self.model.is_some() {
                    return invalid("compare-vn takes no --model");
                }
                needs_points(self)
            }
        }
    }

    fn mc_settings(&self) -> McSettings {
        McSettings {
            level: self.level,
            seed: self.seed,
            stop: StopRule {
                min_flips: self.min_flips,
                max_phases: self.max_phases,
            },
            options: RunOptions {
                warmup: self.warmup,
                workers: self.workers,
                readout: self.readout,
                ..RunOptions::default()
            },
        }
    }

    fn cascade_options(&self) -> CascadeOptions {
        CascadeOptions {
            phases: self.phases,
            workers: self.workers,
            input: self.input,
            ..CascadeOptions::default()
        }
    }

    pub fn header(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// A finished table plus the points that could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub records: Vec<SweepRecord>,
    pub warnings: Vec<String>,
}

fn collect_sweep(model: ModelTag, cfg: &RunConfig, table: &mut Table) -> Result<()> {
    let s = sweep(model, cfg.param, &sorted(&cfg.points)?, &cfg.mc_settings())?;
    table.records.extend(s.records);
    table
        .warnings
        .extend(s.skipped.into_iter().map(|k| format!("skipped x = {}: {}", k.x, k.reason)));
    Ok(())
}

fn sorted(points: &[f64]) -> Result<Vec<f64>> {
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidGrid("points must be finite".into()));
    }
    let mut v = points.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Compute the table a configuration describes.
pub fn run(cfg: &RunConfig) -> Result<Table> {
    cfg.validate()?;
    let mut table = Table {
        records: Vec::new(),
        warnings: Vec::new(),
    };
    match cfg.command {
        CommandKind::Sweep => collect_sweep(cfg.model.expect("validated"), cfg, &mut table)?,
        CommandKind::Simulate => match cfg.model.expect("validated") {
            ModelTag::CascadeMc => {
                for p in sorted(&cfg.points)? {
                    let s = cascade_mc(p, cfg.seed, cfg.trials, &cfg.cascade_options())?;
                    table.records.push(SweepRecord {
                        x: p,
                        y: s.p_hat,
                        y_lo: s.ci95.0,
                        y_hi: s.ci95.1,
                        model: ModelTag::CascadeMc,
                        n: 3,
                        seed: Some(cfg.seed),
                    });
                }
            }
            model => collect_sweep(model, cfg, &mut table)?,
        },
        CommandKind::Threshold => {
            let model = cfg.model.expect("validated");
            let rec = match model {
                ModelTag::Universal => {
                    let u = universal_threshold()?;
                    SweepRecord {
                        x: u.p_star,
                        y: u.eps_star,
                        y_lo: u.bracket.lo,
                        y_hi: u.bracket.hi,
                        model,
                        n: 3,
                        seed: None,
                    }
                }
                _ => {
                    let chain = if model == ModelTag::Level2 {
                        build_level2_chain()
                    } else {
                        build_level3_chain()?
                    };
                    let r = correction_threshold(&chain)?;
                    SweepRecord {
                        x: r.value,
                        y: r.value,
                        y_lo: r.lo,
                        y_hi: r.hi,
                        model,
                        n: chain.level(),
                        seed: None,
                    }
                }
            };
            table.records.push(rec);
        }
        CommandKind::Encode => {
            if cfg.pcrit {
                let r = p_crit()?;
                table.records.push(SweepRecord {
                    x: r.value,
                    y: pfail_bound(r.value)?.p_fail,
                    y_lo: r.lo,
                    y_hi: r.hi,
                    model: ModelTag::Pfail,
                    n: 3,
                    seed: None,
                });
            } else if cfg.mc {
                let mut sim = cfg.clone();
                sim.command = CommandKind::Simulate;
                sim.model = Some(ModelTag::CascadeMc);
                sim.mc = false;
                return run(&sim);
            } else {
                collect_sweep(ModelTag::Pfail, cfg, &mut table)?;
            }
        }
        CommandKind::CompareVn => {
            collect_sweep(ModelTag::VnMc, cfg, &mut table)?;
            collect_sweep(ModelTag::HypercubeMc, cfg, &mut table)?;
        }
    }
    table.records.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(table)
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    config: RunConfig,
    columns: Vec<String>,
    rows: Vec<SweepRecord>,
}

/// Render a table in the configured format. The configuration is echoed
/// first so the file describes how it was made.
pub fn render(cfg: &RunConfig, records: &[SweepRecord]) -> String {
    match cfg.format {
        Format::Csv => {
            let mut s = format!("{HEADER_PREFIX}{}\n{COLUMNS}\n", cfg.header());
            for r in records {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    fmt_f(r.x),
                    fmt_f(r.y),
                    fmt_f(r.y_lo),
                    fmt_f(r.y_hi),
                    r.model,
                    r.n,
                    r.seed.map(|s| s.to_string()).unwrap_or_default()
                ));
            }
            s
        }
        Format::Json => {
            let t = JsonTable {
                config: cfg.clone(),
                columns: COLUMNS.split(',').map(String::from).collect(),
                rows: records.to_vec(),
            };
            let mut s = serde_json::to_string_pretty(&t).expect("table serializes");
            s.push('\n');
            s
        }
    }
}

/// Read back a file written by [`render`].
pub fn parse_output(text: &str) -> Result<(RunConfig, Vec<SweepRecord>)> {
    if let Some(rest) = text.strip_prefix(HEADER_PREFIX) {
        let mut lines = rest.lines();
        let cfg: RunConfig = serde_json::from_str(lines.next().unwrap_or_default())?;
        if lines.next() != Some(COLUMNS) {
            return Err(Error::Parse("missing column header".into()));
        }
        let mut rows = Vec::new();
        for line in lines {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(Error::Parse(format!("bad row `{line}`")));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number `{s}`")))
            };
            rows.push(SweepRecord {
                x: num(f[0])?,
                y: num(f[1])?,
                y_lo: num(f[2])?,
                y_hi: num(f[3])?,
                model: f[4].parse()?,
                n: f[5].parse().map_err(|_| Error::Parse(format!("bad n `{}`", f[5])))?,
                seed: if f[6].is_empty() {
                    None
                } else {
                    Some(f[6].parse().map_err(|_| Error::Parse(format!("bad seed `{}`", f[6])))?)
                },
            });
        }
        Ok((cfg, rows))
    } else {
        let t: JsonTable = serde_json::from_str(text)?;
        Ok((t.config, t.rows))
    }
}

/// Write `contents` to `path` through a temporary file in the same
/// directory, so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Run a configuration end to end and deliver its output.
pub fn execute(cfg: &RunConfig) -> Result<()> {
    let table = run(cfg)?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    let text = render(cfg, &table.records);
    match &cfg.out {
        Some(path) => write_atomic(path, &text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("ftcc").chain(args.iter().copied()))
    }

    fn config(args: &[&str]) -> Result<RunConfig> {
        RunConfig::from_cli(&cli(args).expect("parses"))
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.1:0.3:3").unwrap(), vec![0.1, 0.2, 0.3]);
        assert_eq!(parse_grid("0.1:0.3:1").unwrap(), vec![0.1]);
        assert!(parse_grid("0.1:0.3:0").unwrap().is_empty());
        assert!(parse_grid("0.3:0.1:3").is_err());
        assert!(parse_grid("a:b:c").is_err());
        assert!(parse_grid("0.1:0.3").is_err());
    }

    #[test]
    fn flag_combinations() {
        assert!(config(&["sweep", "--model", "level3", "--eps", "0.01"]).is_ok());
        assert!(config(&["sweep", "--eps", "0.01"]).is_err());
        assert!(config(&["sweep", "--model", "level3"]).is_err());
        assert!(config(&["sweep", "--model", "level3", "--grid", "0:1:3"]).is_err());
        assert!(config(&["threshold", "--model", "vn_mc"]).is_err());
        assert!(config(&["encode", "--pcrit", "--mc"]).is_err());
        assert!(config(&["encode", "--eps", "0.01"]).is_err());
        assert!(config(&["simulate", "--model", "cascade_mc", "--eps", "0.01"]).is_err());
        assert!(config(&["sweep", "--model", "nope", "--eps", "0.01"]).is_err());
        assert!(cli(&["sweep", "--eps", "0.1", "--p", "0.1"]).is_err());
    }

    #[test]
    fn header_round_trips() {
        for format in ["csv", "json"] {
            let cfg = config(&[
                "sweep", "--model", "concat-7-3", "--grid", "0.01:0.1:4", "--param", "eps",
                "--format", format, "--workers", "3",
            ])
            .unwrap();
            let table = run(&cfg).unwrap();
            let text = render(&cfg, &table.records);
            let (back, rows) = parse_output(&text).unwrap();
            let mut expect = cfg.clone();
            expect.workers = 0;
            assert_eq!(back, expect);
            assert_eq!(rows, table.records);
        }
    }

    #[test]
    fn csv_layout() {
        let cfg = config(&["sweep", "--model", "level2", "--eps", "0.1,0.05"]).unwrap();
        let table = run(&cfg).unwrap();
        let text = render(&cfg, &table.records);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# config: {"));
        assert_eq!(lines[1], COLUMNS);
        assert!(lines[2].starts_with("5.0000000000000003e-2,"), "{}", lines[2]);
        assert!(lines[3].starts_with("1.0000000000000001e-1,"));
        assert!(lines[2].ends_with(",level2,2,"));
    }

    #[test]
    fn failed_run_leaves_no_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let mut cfg = config(&["sweep", "--model", "level3", "--eps", "0.01"]).unwrap();
        cfg.out = Some(path.clone());
        cfg.model = Some(ModelTag::CascadeMc);
        assert!(execute(&cfg).is_err());
        assert!(!path.exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
