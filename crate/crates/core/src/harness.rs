//! Batch runs over instance directories and their metrics.
//!
//! `%dev` is `100 * (cmax - ref) / ref` where `ref` is a known optimum when
//! one is supplied and the root lower bound otherwise. Deviations and their
//! means are exact rationals, rounded half-up to two decimals only when
//! rendered.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_rational::{BigRational, Ratio};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::read_instance;
use crate::model::Time;
use crate::search::{solve, SearchConfig, StopReason};

pub const CSV_HEADER: [&str; 10] = [
    "instance",
    "n",
    "m",
    "type",
    "lb",
    "cmax",
    "dev_pct",
    "seconds",
    "stop_reason",
    "restarts",
];

/// Exact percentage deviation of `cmax` from `reference`.
pub fn percent_dev(cmax: Time, reference: Time) -> Result<Ratio<i64>> {
    if reference < 1 {
        return Err(Error::Config(format!(
            "reference value {reference} must be at least 1"
        )));
    }
    let to_i64 = |x: Time| i64::try_from(x).map_err(|_| Error::Config(format!("{x} is too large")));
    let (c, r) = (to_i64(cmax)?, to_i64(reference)?);
    let num = (c - r)
        .checked_mul(100)
        .ok_or_else(|| Error::Config("deviation overflows".into()))?;
    Ok(Ratio::new(num, r))
}

fn big(x: Ratio<i64>) -> BigRational {
    BigRational::new((*x.numer()).into(), (*x.denom()).into())
}

/// Two decimals, halves rounded away from zero.
pub fn render_percent(x: &BigRational) -> String {
    let zero = BigRational::from_integer(0.into());
    let neg = *x < zero;
    let mag = if neg { -x.clone() } else { x.clone() };
    let cents = (mag * BigRational::from_integer(100.into())
        + BigRational::new(1.into(), 2.into()))
    .floor()
    .to_integer()
    .to_string();
    let digits = format!("{cents:0>3}");
    let (int, frac) = digits.split_at(digits.len() - 2);
    let sign = if neg && cents != "0" { "-" } else { "" };
    format!("{sign}{int}.{frac}")
}

pub fn render_dev(x: Ratio<i64>) -> String {
    render_percent(&big(x))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solved {
    pub n: usize,
    pub m: usize,
    pub kind: Option<u8>,
    pub lb: Time,
    /// Value the deviation is measured against: a known optimum or `lb`.
    pub reference: Time,
    pub cmax: Time,
    pub dev: Ratio<i64>,
    pub seconds: f64,
    pub stop_reason: StopReason,
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    /// The error message when the instance could not be read or solved.
    pub outcome: std::result::Result<Solved, String>,
}

impl BenchRow {
    fn record(&self) -> Vec<String> {
        match &self.outcome {
            Ok(s) => vec![
                self.instance.clone(),
                s.n.to_string(),
                s.m.to_string(),
                s.kind.map(|k| k.to_string()).unwrap_or_default(),
                s.lb.to_string(),
                s.cmax.to_string(),
                render_dev(s.dev),
                format!("{:.3}", s.seconds),
                s.stop_reason.to_string(),
                s.restarts.to_string(),
            ],
            Err(_) => {
                let mut rec = vec![String::new(); CSV_HEADER.len()];
                rec[0] = self.instance.clone();
                rec[8] = "ERROR".into();
                rec
            }
        }
    }
}

/// Instance files of `dir` (`*.hfs`), sorted by file name.
pub fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "hfs"))
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn bench_one(path: &Path, cfg: &SearchConfig, optima: &HashMap<String, Time>) -> BenchRow {
    let inst = match read_instance(path) {
        Ok(inst) => inst,
        Err(e) => {
            return BenchRow {
                instance: stem(path),
                outcome: Err(e.to_string()),
            }
        }
    };
    let instance = inst.meta().name.clone().unwrap_or_else(|| stem(path));
    let outcome = solve(&inst, cfg)
        .map_err(|e| e.to_string())
        .and_then(|rep| {
            let reference = optima.get(&instance).copied().unwrap_or(rep.lb);
            let dev = percent_dev(rep.best_makespan, reference).map_err(|e| e.to_string())?;
            Ok(Solved {
                n: inst.n(),
                m: inst.m(),
                kind: inst.meta().kind,
                lb: rep.lb,
                reference,
                cmax: rep.best_makespan,
                dev,
                seconds: rep.wall_seconds,
                stop_reason: rep.stop_reason,
                restarts: rep.restarts_used,
            })
        });
    BenchRow { instance, outcome }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
}

/// Worker threads for a `jobs` limit: never more than the machine has
/// cores, since the time limit is wall-clock and oversubscribed workers
/// would eat into each other's.
pub fn worker_count(jobs: usize) -> usize {
    let cores = std::thread::available_parallelism().map_or(1, |c| c.get());
    jobs.clamp(1, cores)
}

/// Solves every instance of `dir` with up to `jobs` concurrent solves. Rows
/// keep the file order; per-instance failures become error rows.
pub fn run_bench(
    dir: &Path,
    cfg: &SearchConfig,
    optima: &HashMap<String, Time>,
    jobs: usize,
) -> Result<BenchResult> {
    let files = instance_files(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(jobs))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| {
        files
            .par_iter()
            .map(|f| bench_one(f, cfg, optima))
            .collect()
    });
    Ok(BenchResult { rows })
}

impl BenchResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            w.write_record(row.record())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn solved(&self) -> impl Iterator<Item = (&str, &Solved)> {
        self.rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|s| (r.instance.as_str(), s)))
    }

    pub fn errors(&self) -> impl Iterator<Item = (&str, &str)> {
        self.rows.iter().filter_map(|r| {
            r.outcome
                .as_ref()
                .err()
                .map(|e| (r.instance.as_str(), e.as_str()))
        })
    }

    pub fn summary(&self) -> Summary {
        let mut cells: BTreeMap<(usize, usize), BTreeMap<Option<u8>, Acc>> = BTreeMap::new();
        let mut global: BTreeMap<Option<u8>, Acc> = BTreeMap::new();
        for (_, s) in self.solved() {
            cells
                .entry((s.n, s.m))
                .or_default()
                .entry(s.kind)
                .or_default()
                .add(s);
            global.entry(s.kind).or_default().add(s);
        }
        Summary {
            cells: cells
                .into_iter()
                .flat_map(|((n, m), by_kind)| {
                    by_kind.into_iter().map(move |(kind, acc)| CellSummary {
                        kind,
                        n,
                        m,
                        stats: acc.finish(),
                    })
                })
                .collect(),
            global: global
                .into_iter()
                .map(|(kind, acc)| (kind, acc.finish()))
                .collect(),
            errors: self.errors().count(),
        }
    }

    /// Compares makespans with `baseline` (instance name to makespan).
    pub fn improvements(&self, baseline: &HashMap<String, Time>) -> Improvements {
        let mut out = Improvements::default();
        for (name, s) in self.solved() {
            let Some(&base) = baseline.get(name) else {
                continue;
            };
            let e = out.per_n.entry((s.n, s.kind)).or_default();
            e.compared += 1;
            if s.cmax < base {
                e.improved += 1;
            }
        }
        out
    }
}

#[derive(Default)]
struct Acc {
    count: usize,
    dev: Option<BigRational>,
    seconds: f64,
}

impl Acc {
    fn add(&mut self, s: &Solved) {
        self.count += 1;
        self.dev = Some(match self.dev.take() {
            Some(sum) => sum + big(s.dev),
            None => big(s.dev),
        });
        self.seconds += s.seconds;
    }

    fn finish(self) -> Stats {
        let k = self.count.max(1);
        let den = BigRational::from_integer(k.into());
        Stats {
            count: self.count,
            mean_dev: self
                .dev
                .map(|d| d / den)
                .unwrap_or_else(|| BigRational::from_integer(0.into())),
            mean_seconds: self.seconds / k as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stats {
    pub count: usize,
    /// Exact mean of the row deviations.
    pub mean_dev: BigRational,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub kind: Option<u8>,
    pub n: usize,
    pub m: usize,
    pub stats: Stats,
}

/// Mean deviation and time per `(n, m)` and instance type, plus one global
/// mean per type.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub cells: Vec<CellSummary>,
    pub global: Vec<(Option<u8>, Stats)>,
    pub errors: usize,
}

fn kind_label(kind: Option<u8>) -> String {
    kind.map(|k| format!("Type-{k}"))
        .unwrap_or_else(|| "Untyped".into())
}

impl Summary {
    pub fn global_mean(&self, kind: u8) -> Option<&BigRational> {
        self.global
            .iter()
            .find(|(k, _)| *k == Some(kind))
            .map(|(_, s)| &s.mean_dev)
    }

    /// A pivot with one `%dev`/`CPU(s)` column pair per instance type and
    /// one line per `(n, m)`, closed by the global averages.
    pub fn render(&self) -> String {
        let kinds: BTreeSet<Option<u8>> = self.cells.iter().map(|c| c.kind).collect();
        let grid: BTreeSet<(usize, usize)> = self.cells.iter().map(|c| (c.n, c.m)).collect();
        let mut out = String::new();
        let _ = write!(out, "{:>5} {:>3}", "", "");
        for &k in &kinds {
            let _ = write!(out, "  {:>17}", kind_label(k));
        }
        out.push('\n');
        let _ = write!(out, "{:>5} {:>3}", "n", "m");
        for _ in &kinds {
            let _ = write!(out, "  {:>8} {:>8}", "%dev", "CPU(s)");
        }
        out.push('\n');
        let mut last_n = None;
        for &(n, m) in &grid {
            let n_label = if last_n == Some(n) {
                String::new()
            } else {
                n.to_string()
            };
            last_n = Some(n);
            let _ = write!(out, "{n_label:>5} {m:>3}");
            for &k in &kinds {
                match self
                    .cells
                    .iter()
                    .find(|c| c.kind == k && c.n == n && c.m == m)
                {
                    Some(c) => {
                        let _ = write!(
                            out,
                            "  {:>8} {:>8.2}",
                            render_percent(&c.stats.mean_dev),
                            c.stats.mean_seconds
                        );
                    }
                    None => {
                        let _ = write!(out, "  {:>8} {:>8}", "-", "-");
                    }
                }
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<9}", "Global");
        for &k in &kinds {
            let stats = &self
                .global
                .iter()
                .find(|(g, _)| *g == k)
                .expect("every kind has a global entry")
                .1;
            let _ = write!(
                out,
                "  {:>8} {:>8.2}",
                render_percent(&stats.mean_dev),
                stats.mean_seconds
            );
        }
        out.push('\n');
        if self.errors > 0 {
            let _ = writeln!(out, "{} instance(s) failed", self.errors);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Count {
    pub improved: usize,
    pub compared: usize,
}

/// Rows beating a baseline, per job count and instance type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Improvements {
    pub per_n: BTreeMap<(usize, Option<u8>), Count>,
}

impl Improvements {
    pub fn total(&self) -> Count {
        self.per_n.values().fold(Count::default(), |a, c| Count {
            improved: a.improved + c.improved,
            compared: a.compared + c.compared,
        })
    }

    pub fn total_for(&self, kind: Option<u8>) -> Count {
        self.per_n
            .iter()
            .filter(|((_, k), _)| *k == kind)
            .fold(Count::default(), |a, (_, c)| Count {
                improved: a.improved + c.improved,
                compared: a.compared + c.compared,
            })
    }

    pub fn render(&self) -> String {
        let kinds: BTreeSet<Option<u8>> = self.per_n.keys().map(|(_, k)| *k).collect();
        let ns: BTreeSet<usize> = self.per_n.keys().map(|(n, _)| *n).collect();
        let mut out = format!("{:>7}", "n");
        for &k in &kinds {
            let _ = write!(out, " {:>10}", kind_label(k));
        }
        out.push('\n');
        for n in ns {
            let _ = write!(out, "{n:>7}");
            for &k in &kinds {
                let c = self.per_n.get(&(n, k)).copied().unwrap_or_default();
                let _ = write!(out, " {:>10}", format!("{}/{}", c.improved, c.compared));
            }
            out.push('\n');
        }
        let _ = write!(out, "{:>7}", "total");
        for &k in &kinds {
            let c = self.total_for(k);
            let _ = write!(out, " {:>10}", format!("{}/{}", c.improved, c.compared));
        }
        let t = self.total();
        let _ = writeln!(out, "\nimproved {} of {}", t.improved, t.compared);
        out
    }
}

/// Reads `instance_name value` lines; blank lines and `#` comments are
/// skipped and a trailing `.hfs` on the name is dropped.
pub fn parse_reference_values(text: &str) -> Result<HashMap<String, Time>> {
    let mut out = HashMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            line: k + 1,
            msg: msg.into(),
        };
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad("expected `instance_name value`"));
        };
        let value: Time = value
            .parse()
            .map_err(|_| bad("value is not a non-negative integer"))?;
        out.insert(name.strip_suffix(".hfs").unwrap_or(name).to_string(), value);
    }
    Ok(out)
}

pub fn read_reference_values(path: &Path) -> Result<HashMap<String, Time>> {
    parse_reference_values(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solved(n: usize, m: usize, kind: u8, lb: Time, cmax: Time, seconds: f64) -> Solved {
        Solved {
            n,
            m,
            kind: Some(kind),
            lb,
            reference: lb,
            cmax,
            dev: percent_dev(cmax, lb).unwrap(),
            seconds,
            stop_reason: StopReason::BudgetsExhausted,
            restarts: 3,
        }
    }

    fn row(name: &str, s: Solved) -> BenchRow {
        BenchRow {
            instance: name.into(),
            outcome: Ok(s),
        }
    }

    #[test]
    fn deviation_examples() {
        assert_eq!(render_dev(percent_dev(7, 6).unwrap()), "16.67");
        assert_eq!(render_dev(percent_dev(6, 6).unwrap()), "0.00");
        assert_eq!(render_dev(percent_dev(106, 100).unwrap()), "6.00");
        assert_eq!(percent_dev(7, 6).unwrap(), Ratio::new(50, 3));
        assert!(percent_dev(5, 0).is_err());
    }

    #[test]
    fn rounding_is_half_up() {
        // 1/8 % = 0.125
        assert_eq!(
            render_percent(&BigRational::new(1.into(), 8.into())),
            "0.13"
        );
        assert_eq!(
            render_percent(&BigRational::new((-1).into(), 8.into())),
            "-0.13"
        );
        assert_eq!(
            render_percent(&BigRational::new(1.into(), 1000.into())),
            "0.00"
        );
        assert_eq!(
            render_percent(&BigRational::new((-1).into(), 1000.into())),
            "0.00"
        );
        assert_eq!(
            render_percent(&BigRational::from_integer(1234.into())),
            "1234.00"
        );
    }

    #[test]
    fn csv_layout() {
        let res = BenchResult {
            rows: vec![
                row("a", solved(5, 2, 1, 6, 7, 0.5)),
                BenchRow {
                    instance: "broken".into(),
                    outcome: Err("bad line".into()),
                },
            ],
        };
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "instance,n,m,type,lb,cmax,dev_pct,seconds,stop_reason,restarts"
        );
        assert_eq!(lines[1], "a,5,2,1,6,7,16.67,0.500,BUDGETS_EXHAUSTED,3");
        assert_eq!(lines[2], "broken,,,,,,,,ERROR,");
    }

    #[test]
    fn empty_dir_gives_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let res = run_bench(dir.path(), &SearchConfig::default(), &HashMap::new(), 2).unwrap();
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{}\n", CSV_HEADER.join(","))
        );
    }

    #[test]
    fn summary_means_are_exact() {
        let res = BenchResult {
            rows: vec![
                row("a", solved(5, 2, 1, 6, 7, 1.0)),      // 50/3
                row("b", solved(5, 2, 1, 3, 3, 2.0)),      // 0
                row("c", solved(5, 2, 2, 100, 106, 0.0)),  // 6
                row("d", solved(10, 2, 2, 100, 100, 4.0)), // 0
            ],
        };
        let s = res.summary();
        let cell = s.cells.iter().find(|c| c.kind == Some(1)).unwrap();
        assert_eq!(cell.stats.mean_dev, BigRational::new(25.into(), 3.into()));
        assert_eq!(cell.stats.mean_seconds, 1.5);
        assert_eq!(s.global_mean(2), Some(&BigRational::from_integer(3.into())));
        assert_eq!(s.global.len(), 2);
        let text = s.render();
        assert!(text.contains("Type-1") && text.contains("Type-2"));
        assert!(text.contains("8.33"));
        assert!(text.lines().last().unwrap().starts_with("Global"));
    }

    #[test]
    fn improvements_count_strictly_better() {
        let res = BenchResult {
            rows: vec![
                row("a", solved(5, 2, 1, 6, 7, 0.0)),
                row("b", solved(5, 2, 1, 6, 8, 0.0)),
                row("c", solved(50, 2, 2, 6, 9, 0.0)),
                row("d", solved(50, 2, 2, 6, 9, 0.0)),
            ],
        };
        let baseline: HashMap<String, Time> = [("a", 8), ("b", 8), ("c", 10)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let imp = res.improvements(&baseline);
        assert_eq!(
            imp.total(),
            Count {
                improved: 2,
                compared: 3
            }
        );
        assert_eq!(
            imp.total_for(Some(2)),
            Count {
                improved: 1,
                compared: 1
            }
        );
        assert!(imp.render().contains("improved 2 of 3"));
    }

    #[test]
    fn reference_file_parsing() {
        let map = parse_reference_values("# optima\nt1_n5_m2_0 123\n\nfoo.hfs 7 # note\n").unwrap();
        assert_eq!(map["t1_n5_m2_0"], 123);
        assert_eq!(map["foo"], 7);
        assert!(parse_reference_values("x\n").is_err());
        assert!(parse_reference_values("x -3\n").is_err());
    }
}
