//! Run configurations, experiment orchestration and report emission.
//!
//! A run is described by a TOML document:
//!
//! ```toml
//! command = "solve"          # solve | energy | asymptotics | equidist | alpha | oracle | bound-check
//! seed = 42                  # required by every stochastic command
//! n = "2..8:+1"              # integer, array, "64,128,256", "64..8192" (doubling) or "a..b:+k"
//! s = 2.0                    # defaults to the dimension of the set
//! strategy = "smoothed_ascent"
//!
//! [set]
//! kind = "circle"            # circle | arc | segment | ball | cube | sphere | union | degenerate
//! radius = 1.0
//!
//! [output]
//! dir = "out"
//! ```
//!
//! Unknown keys anywhere are rejected. Reports are JSON with every float
//! printed to 17 significant digits, so equal runs give equal bytes.

use std::fmt;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::time::Instant;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::analysis::{
    alpha_limit_check, empirical_counts, equidistribution_report, lemma_suite, AlphaLimitCheck, CountReport,
    EquidistributionReport, LemmaSuite,
};
use crate::asymptotics::{
    chebyshev_ratio_table, emit_plotdata, fmt17, lower_bound_report, polarization_ratio_table, to_csv,
    AsymptoticsTable, LowerBoundReport, RatioSource,
};
use crate::energy::{equally_spaced_energy, minimize, EnergyOptions, EnergyReport};
use crate::error::{Error, Result};
use crate::geometry::{make_test_cells, CellFamily, SetDescriptor, SetKind, SetSpec};
use crate::polarization::{
    angular_gaps, equally_spaced_value, oracle_solve, solve, solve_on_grid, SolveOptions, SolveReport, Strategy,
};

/// Version tag of the report layout.
pub const REPORT_SCHEMA: &str = "rieszpol-report/1";
/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "RIESZPOL_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Energy,
    Asymptotics,
    Equidist,
    Alpha,
    Oracle,
    BoundCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Energy => "energy",
            Command::Asymptotics => "asymptotics",
            Command::Equidist => "equidist",
            Command::Alpha => "alpha",
            Command::Oracle => "oracle",
            Command::BoundCheck => "bound-check",
        }
    }

    fn needs_set(self) -> bool {
        self != Command::BoundCheck
    }

    fn needs_n(self) -> bool {
        !matches!(self, Command::Alpha | Command::BoundCheck)
    }
}

/// Source of asymptotics values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Closed form for circles.
    Analytic,
    #[default]
    Solver,
}

/// Ascending list of point counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NList(pub Vec<usize>);

impl NList {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses `"64,128,256"`, `"64..8192"` (doubling from 64 while at most
    /// 8192) and `"2..8:+1"` (arithmetic step 1). Lists are sorted and
    /// deduplicated; zero is rejected.
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut out = Vec::new();
        for item in text.split(',').map(str::trim) {
            if let Some((a, rest)) = item.split_once("..") {
                let (b, step) = match rest.split_once(":+") {
                    Some((b, k)) => (b, Some(parse_count(k)?)),
                    None => (rest, None),
                };
                let (a, b) = (parse_count(a)?, parse_count(b)?);
                if a > b {
                    return Err(format!("empty range {item}"));
                }
                let mut k = a;
                while k <= b {
                    out.push(k);
                    k = match step {
                        Some(st) => k + st,
                        None => 2 * k,
                    };
                }
            } else {
                out.push(parse_count(item)?);
            }
        }
        NList::from_vec(out)
    }

    fn from_vec(mut v: Vec<usize>) -> std::result::Result<Self, String> {
        if v.contains(&0) {
            return Err("point counts must be positive".into());
        }
        v.sort_unstable();
        v.dedup();
        Ok(NList(v))
    }
}

fn parse_count(t: &str) -> std::result::Result<usize, String> {
    t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a point count"))
}

impl Serialize for NList {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NList {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = NList;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a point count, an array of counts or a list like \"64,128\" or \"64..8192\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<NList, E> {
                let n = usize::try_from(v).map_err(|_| E::custom("point counts must be positive"))?;
                NList::from_vec(vec![n]).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<NList, E> {
                NList::from_vec(vec![v as usize]).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<NList, E> {
                NList::parse(v).map_err(E::custom)
            }

            fn visit_seq<A: de::SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<NList, A::Error> {
                let mut v = Vec::new();
                while let Some(n) = seq.next_element::<usize>()? {
                    v.push(n);
                }
                NList::from_vec(v).map_err(de::Error::custom)
            }
        }
        deserializer.deserialize_any(V)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Caps,
    Bands,
    Partition,
    Parts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    #[serde(default = "default_cell_kind")]
    pub family: CellKind,
    /// Random cells drawn, or cells per part for a partition.
    #[serde(default = "default_cell_count")]
    pub count: usize,
}

fn default_cell_kind() -> CellKind {
    CellKind::Caps
}

fn default_cell_count() -> usize {
    100
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig {
            family: default_cell_kind(),
            count: default_cell_count(),
        }
    }
}

impl CellConfig {
    fn family(&self) -> CellFamily {
        match self.family {
            CellKind::Caps => CellFamily::RandomCaps { count: self.count },
            CellKind::Bands => CellFamily::RandomBands { count: self.count },
            CellKind::Partition => CellFamily::Partition { per_part: self.count },
            CellKind::Parts => CellFamily::Parts,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_report")]
    pub report: String,
    /// Table file for `asymptotics` and `equidist`.
    #[serde(default = "default_csv")]
    pub csv: String,
    /// Two-column plot file for `asymptotics`.
    #[serde(default = "default_plot")]
    pub plotdata: String,
}

fn default_dir() -> String {
    "rieszpol-out".into()
}

fn default_report() -> String {
    "report.json".into()
}

fn default_csv() -> String {
    "table.csv".into()
}

fn default_plot() -> String {
    "plot.dat".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            report: default_report(),
            csv: default_csv(),
            plotdata: default_plot(),
        }
    }
}

/// Optional overrides of solver tolerances and budgets.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_candidates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polish_evals: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "NList::is_empty")]
    pub n: NList,
    /// Riesz exponent; filled with the set dimension when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default = "default_strategy")]
    pub strategy: String,
    #[serde(default)]
    pub source: Source,
    /// Solver restarts; filled per command when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    /// Instances of the integral bound suite.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Grid size of the oracle comparison.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Decreasing `ε` schedule for the covering density check.
    #[serde(default = "default_epsilon")]
    pub epsilon: Vec<f64>,
    /// Minimum distance of covering density centers from other parts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion: Option<f64>,
    /// Record elapsed seconds in the report; off by default so reports
    /// are reproducible byte for byte.
    #[serde(default)]
    pub wall_time: bool,
    #[serde(default)]
    pub cells: CellConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetSpec>,
}

fn default_strategy() -> String {
    Strategy::SmoothedAscent.name().into()
}

fn default_samples() -> usize {
    200
}

fn default_grid() -> usize {
    12
}

fn default_epsilon() -> Vec<f64> {
    vec![0.5, 0.1, 0.01]
}

impl RunConfig {
    /// A config with every default for `command`, before validation.
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            seed: None,
            n: NList::default(),
            s: None,
            strategy: default_strategy(),
            source: Source::default(),
            restarts: None,
            samples: default_samples(),
            grid: default_grid(),
            epsilon: default_epsilon(),
            exclusion: None,
            wall_time: false,
            cells: CellConfig::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
            set: None,
        }
    }

    fn stochastic(&self) -> bool {
        match self.command {
            Command::Alpha => false,
            Command::Asymptotics => self.source == Source::Solver,
            _ => true,
        }
    }

    /// Checks the config and fills `s` and `restarts`.
    pub fn validate(mut self) -> Result<Self> {
        if self.command.needs_set() && self.set.is_none() {
            return Err(Error::config("set", "this command needs a [set] table"));
        }
        let set = match &self.set {
            Some(spec) => Some(SetDescriptor::new(spec.clone()).map_err(|e| Error::config("set", e.to_string()))?),
            None => None,
        };
        if self.stochastic() && self.seed.is_none() {
            return Err(Error::config("seed", format!("`{}` is stochastic and needs a seed", self.command.name())));
        }
        if self.seed.is_some_and(|s| s > i64::MAX as u64) {
            return Err(Error::config("seed", "seeds must be below 2^63"));
        }
        if self.command.needs_n() && self.n.is_empty() {
            return Err(Error::config("n", "at least one point count is needed"));
        }
        self.strategy.parse::<Strategy>().map_err(|e| Error::config("strategy", e.to_string()))?;
        if let Some(set) = &set {
            let s = *self.s.get_or_insert(set.dim().max(1) as f64);
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::config("s", format!("s must be positive, got {s}")));
            }
        }
        if self.restarts.is_none() && self.command != Command::Alpha && self.command != Command::BoundCheck {
            self.restarts = Some(match self.command {
                Command::Energy => EnergyOptions::default().restarts,
                Command::Asymptotics | Command::Equidist => 4,
                _ => SolveOptions::default().restarts,
            });
        }
        if self.restarts == Some(0) {
            return Err(Error::config("restarts", "at least one restart is needed"));
        }
        if self.command == Command::Alpha {
            if self.epsilon.len() < 3 || self.epsilon.windows(2).any(|w| w[1] >= w[0]) || self.epsilon.iter().any(|e| !(*e > 0.0)) {
                return Err(Error::config("epsilon", "need at least 3 positive, strictly decreasing values"));
            }
        }
        if self.exclusion.is_some_and(|e| !(e > 0.0)) {
            return Err(Error::config("exclusion", "must be positive"));
        }
        if self.command == Command::BoundCheck && self.samples == 0 {
            return Err(Error::config("samples", "at least one instance is needed"));
        }
        if self.command == Command::Equidist && self.cells.count == 0 && self.cells.family != CellKind::Parts {
            return Err(Error::config("cells.count", "at least one cell is needed"));
        }
        if self.command == Command::Oracle && self.n.0.iter().any(|&n| n > crate::polarization::ORACLE_MAX_N) {
            return Err(Error::config("n", format!("the oracle handles N <= {}", crate::polarization::ORACLE_MAX_N)));
        }
        if self.command == Command::Oracle && !(2..=crate::polarization::ORACLE_MAX_GRID).contains(&self.grid) {
            return Err(Error::config("grid", format!("grid size must lie in 2..={}", crate::polarization::ORACLE_MAX_GRID)));
        }
        Ok(self)
    }

    fn solve_options(&self) -> SolveOptions {
        let mut o = SolveOptions::default().with_seed(self.seed.unwrap_or(0));
        if let Some(r) = self.restarts {
            o.restarts = r;
        }
        let t = &self.tolerances;
        if let Some(v) = t.max_iters {
            o.max_iters = v;
        }
        if let Some(v) = t.inner_tol {
            o.inner.tol = v;
        }
        if let Some(v) = t.inner_candidates {
            o.inner.candidates = v;
        }
        if let Some(v) = t.polish_evals {
            o.polish_evals = v;
        }
        o
    }

    fn energy_options(&self) -> EnergyOptions {
        let mut o = EnergyOptions::default().with_seed(self.seed.unwrap_or(0));
        if let Some(r) = self.restarts {
            o.restarts = r;
        }
        if let Some(v) = self.tolerances.max_iters {
            o.max_iters = v;
        }
        o
    }
}

fn key_at(text: &str, offset: usize) -> Option<String> {
    let start = text[..offset.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next()?;
    let key = line.split('=').next()?.trim().trim_matches(|c| c == '[' || c == ']');
    (!key.is_empty()).then(|| key.to_string())
}

/// Parses and validates a TOML run config.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RunConfig = toml::from_str(text).map_err(|e| {
        let key = e.span().and_then(|s| key_at(text, s.start)).unwrap_or_else(|| "config".into());
        Error::config(&key, e.to_string().trim_end())
    })?;
    raw.validate()
}

/// Canonical TOML text of a config; `parse_config` reads it back unchanged.
pub fn serialize_config(config: &RunConfig) -> String {
    toml::to_string(config).expect("configs are plain data")
}

/// Hex SHA-256 of the canonical config text.
pub fn config_hash(config: &RunConfig) -> String {
    hex::encode(Sha256::digest(serialize_config(config).as_bytes()))
}

/// JSON formatter printing floats with 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with 17-significant-digit floats; non-finite floats become
/// `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("reports are plain data");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveRow {
    pub n: usize,
    pub s: f64,
    #[serde(flatten)]
    pub report: SolveReport,
    /// Sorted angular gaps for planar circles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Vec<f64>>,
    /// `M^s_N` of the circle, known in closed form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyRow {
    pub n: usize,
    pub s: f64,
    #[serde(flatten)]
    pub report: EnergyReport,
    /// Energy of equally spaced points on the circle.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equally_spaced: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsPayload {
    pub s: f64,
    pub table: AsymptoticsTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<LowerBoundReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquidistPayload {
    pub s: f64,
    pub cells: usize,
    pub report: EquidistributionReport,
    pub counts: Vec<CountReport>,
    pub solves: Vec<SolveRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub n: usize,
    pub s: f64,
    pub oracle: SolveReport,
    pub solver: SolveReport,
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Solve(Vec<SolveRow>),
    Energy(Vec<EnergyRow>),
    Asymptotics(AsymptoticsPayload),
    Equidist(EquidistPayload),
    Alpha(AlphaLimitCheck),
    Oracle(Vec<OracleRow>),
    BoundCheck(LemmaSuite),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Some solve or quadrature hit its budget; results are still reported.
    Nonconverged,
    /// A verified inequality failed on some instance.
    CheckFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::CheckFailed => 1,
            Status::Nonconverged => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool: Tool,
    pub command: Command,
    pub config_sha256: String,
    pub seed: Option<u64>,
    /// Elapsed seconds, present only when the config asks for it.
    pub wall_time_seconds: Option<f64>,
    pub status: Status,
    pub config: RunConfig,
    pub payload: Payload,
}

/// Everything a run produces, before anything touches the disk.
#[derive(Clone, Debug)]
pub struct Rendered {
    pub report: Report,
    pub json: String,
    pub csv: Option<String>,
    pub plotdata: Option<String>,
}

impl Rendered {
    pub fn exit_code(&self) -> i32 {
        self.report.status.exit_code()
    }
}

fn circle_radius(spec: &SetSpec) -> Option<f64> {
    (spec.kind == SetKind::Circle && spec.center.as_ref().map_or(true, |c| c.len() <= 2) && spec.ambient.map_or(true, |m| m <= 2))
        .then(|| spec.radius.unwrap_or(1.0))
}

fn solve_row(set: &SetDescriptor, n: usize, s: f64, strategy: Strategy, opts: &SolveOptions) -> Result<SolveRow> {
    let report = solve(set, n, s, strategy, opts)?;
    let radius = circle_radius(set.spec());
    let gaps = radius.map(|_| angular_gaps(&report.config.to_points()));
    let closed_form = radius.map(|r| equally_spaced_value(n, s) * r.powf(-s));
    Ok(SolveRow {
        n,
        s,
        report,
        gaps,
        closed_form,
    })
}

/// Runs a validated config without writing files.
pub fn render(config: &RunConfig) -> Result<Rendered> {
    let started = Instant::now();
    let set = config.set.clone().map(SetDescriptor::new).transpose()?;
    let s = config.s.unwrap_or(1.0);
    let ns = &config.n.0;
    let strategy: Strategy = config.strategy.parse()?;
    let opts = config.solve_options();
    let mut csv = None;
    let mut plotdata = None;
    let need_set = || set.as_ref().ok_or_else(|| Error::config("set", "missing"));
    let (payload, status) = match config.command {
        Command::Solve => {
            let set = need_set()?;
            let rows = ns.iter().map(|&n| solve_row(set, n, s, strategy, &opts)).collect::<Result<Vec<_>>>()?;
            let ok = rows.iter().all(|r| r.report.converged);
            (Payload::Solve(rows), if ok { Status::Ok } else { Status::Nonconverged })
        }
        Command::Energy => {
            let set = need_set()?;
            let eopts = config.energy_options();
            let radius = circle_radius(set.spec());
            let rows = ns
                .iter()
                .map(|&n| {
                    Ok(EnergyRow {
                        n,
                        s,
                        report: minimize(set, n, s, &eopts)?,
                        equally_spaced: radius.map(|r| equally_spaced_energy(n, s) * r.powf(-s)),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let ok = rows.iter().all(|r| r.report.converged);
            (Payload::Energy(rows), if ok { Status::Ok } else { Status::Nonconverged })
        }
        Command::Asymptotics => {
            let set = need_set()?;
            let source = match config.source {
                Source::Analytic => RatioSource::AnalyticCircle,
                Source::Solver => RatioSource::Solver { strategy, opts },
            };
            let table = if s == set.dim() as f64 {
                polarization_ratio_table(set, ns, &source)?
            } else {
                chebyshev_ratio_table(set, s, ns, &source)?
            };
            let lower_bound = table.target.map(|_| lower_bound_report(&table));
            csv = Some(to_csv(&table, set, config.seed.unwrap_or(0)));
            plotdata = Some(emit_plotdata(&table)?);
            (Payload::Asymptotics(AsymptoticsPayload { s, table, lower_bound }), Status::Ok)
        }
        Command::Equidist => {
            let set = need_set()?;
            let cells = make_test_cells(set, config.cells.family(), config.seed.unwrap_or(0))?;
            let solves = ns.iter().map(|&n| solve_row(set, n, s, strategy, &opts)).collect::<Result<Vec<_>>>()?;
            let at_dim = s == set.dim() as f64;
            let sequence: Vec<_> = solves
                .iter()
                .map(|r| (r.report.config.clone(), at_dim.then(|| r.report.value.to_f64())))
                .collect();
            let report = equidistribution_report(set, &sequence, &cells);
            let counts = solves.iter().map(|r| empirical_counts(set, &r.report.config, &cells)).collect();
            let mut text = format!("# set_sha256={}\n# seed={}\nN,max_deviation,value,value_ratio\n", crate::asymptotics::set_hash(set), config.seed.unwrap_or(0));
            for row in &report.rows {
                let opt = |v: Option<f64>| v.map_or(String::new(), fmt17);
                text.push_str(&format!("{},{},{},{}\n", row.n, fmt17(row.max_deviation), opt(row.value), opt(row.value_ratio)));
            }
            csv = Some(text);
            let ok = solves.iter().all(|r| r.report.converged);
            let payload = EquidistPayload {
                s,
                cells: cells.len(),
                report,
                counts,
                solves,
            };
            (Payload::Equidist(payload), if ok { Status::Ok } else { Status::Nonconverged })
        }
        Command::Alpha => {
            let set = need_set()?;
            let check = alpha_limit_check(set, &config.epsilon, config.exclusion)?;
            let status = if check.passes { Status::Ok } else { Status::CheckFailed };
            (Payload::Alpha(check), status)
        }
        Command::Oracle => {
            let set = need_set()?;
            let grid = set.sample_points(config.grid);
            let rows = ns
                .iter()
                .map(|&n| {
                    let oracle = oracle_solve(&grid, n, s)?;
                    let solver = solve_on_grid(&grid, n, s, strategy, &opts)?;
                    let (a, b) = (oracle.value.to_f64(), solver.value.to_f64());
                    let agree = a == b || (a - b).abs() <= 1e-12 * a.abs();
                    Ok(OracleRow {
                        n,
                        s,
                        oracle,
                        solver,
                        agree,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let ok = rows.iter().all(|r| r.agree);
            (Payload::Oracle(rows), if ok { Status::Ok } else { Status::CheckFailed })
        }
        Command::BoundCheck => {
            let suite = lemma_suite(config.samples, config.seed.unwrap_or(0))?;
            let status = if suite.holding < suite.total {
                Status::CheckFailed
            } else if !suite.all_converged {
                Status::Nonconverged
            } else {
                Status::Ok
            };
            (Payload::BoundCheck(suite), status)
        }
    };
    let report = Report {
        schema: REPORT_SCHEMA,
        tool: Tool {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        },
        command: config.command,
        config_sha256: config_hash(config),
        seed: config.seed,
        wall_time_seconds: config.wall_time.then(|| started.elapsed().as_secs_f64()),
        status,
        config: config.clone(),
        payload,
    };
    Ok(Rendered {
        json: to_json(&report),
        report,
        csv,
        plotdata,
    })
}

/// Runs a config and writes its files into the output directory; returns
/// the written paths and the exit code.
pub fn run(config: &RunConfig) -> Result<(Vec<PathBuf>, i32)> {
    let rendered = render(config)?;
    let dir = PathBuf::from(&config.output.dir);
    std::fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    let files = [
        (Some(&rendered.json), &config.output.report),
        (rendered.csv.as_ref(), &config.output.csv),
        (rendered.plotdata.as_ref(), &config.output.plotdata),
    ];
    for (text, name) in files {
        if let Some(text) = text {
            let path = dir.join(name);
            let mut f = std::fs::File::create(&path)?;
            f.write_all(text.as_bytes())?;
            written.push(path);
        }
    }
    Ok((written, rendered.exit_code()))
}

/// Exit code for an error raised before or during a run: 2 for invalid
/// input, 1 for I/O failures.
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 1,
        _ => 2,
    }
}

/// Worker thread count from `RIESZPOL_THREADS`, if set and valid.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert_eq, prop_oneof, proptest, Just, ProptestConfig};

    const MINIMAL: &str = "command = \"solve\"\nseed = 42\nn = 3\n\n[set]\nkind = \"circle\"\n";

    #[test]
    fn minimal_solve_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.command, Command::Solve);
        assert_eq!(c.n.0, vec![3]);
        assert_eq!(c.s, Some(1.0));
        assert_eq!(c.strategy, "smoothed_ascent");
        assert_eq!(c.restarts, Some(16));
        assert_eq!(c.output, OutputConfig::default());
        assert!(!c.wall_time);
    }

    #[test]
    fn unknown_kind_names_the_key() {
        let err = parse_config(&MINIMAL.replace("circle", "moebius")).unwrap_err();
        match err {
            Error::Config { key, message } => {
                assert_eq!(key, "kind");
                assert!(message.contains("moebius"), "{message}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(&format!("{MINIMAL}colour = 3\n")).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "colour"), "{err}");
        let err = parse_config(&MINIMAL.replace("seed = 42", "sed = 42")).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "sed"), "{err}");
    }

    #[test]
    fn n_lists() {
        assert_eq!(NList::parse("64,128,256").unwrap().0, vec![64, 128, 256]);
        assert_eq!(NList::parse("256, 64,128,64").unwrap().0, vec![64, 128, 256]);
        assert_eq!(NList::parse("64..8192").unwrap().0, vec![64, 128, 256, 512, 1024, 2048, 4096, 8192]);
        assert_eq!(NList::parse("2..8:+1").unwrap().0, (2..=8).collect::<Vec<_>>());
        assert_eq!(NList::parse("2..12:+5,3").unwrap().0, vec![2, 3, 7, 12]);
        assert!(NList::parse("0,3").is_err());
        assert!(NList::parse("8..2").is_err());
        assert!(NList::parse("x").is_err());
        let c = parse_config(&MINIMAL.replace("n = 3", "n = [5, 2]")).unwrap();
        assert_eq!(c.n.0, vec![2, 5]);
    }

    #[test]
    fn validation_errors_name_keys() {
        let key = |text: &str| match parse_config(text).unwrap_err() {
            Error::Config { key, .. } => key,
            e => panic!("{e}"),
        };
        assert_eq!(key(&MINIMAL.replace("seed = 42\n", "")), "seed");
        assert_eq!(key(&MINIMAL.replace("n = 3\n", "")), "n");
        assert_eq!(key("command = \"solve\"\nseed = 1\nn = 2\n"), "set");
        assert_eq!(key(&MINIMAL.replace("n = 3", "n = 3\nstrategy = \"greedy\"")), "strategy");
        assert_eq!(key(&MINIMAL.replace("n = 3", "n = 3\ns = -1.0")), "s");
        assert_eq!(key(&MINIMAL.replace("command = \"solve\"", "command = \"fly\"")), "command");
        let alpha = "command = \"alpha\"\nepsilon = [0.1, 0.5, 0.01]\n[set]\nkind = \"circle\"\n";
        assert_eq!(key(alpha), "epsilon");
        // deterministic commands need no seed
        parse_config("command = \"alpha\"\n[set]\nkind = \"sphere\"\nd = 2\n").unwrap();
        parse_config("command = \"asymptotics\"\nsource = \"analytic\"\nn = \"64..256\"\n[set]\nkind = \"circle\"\n").unwrap();
    }

    #[test]
    fn configs_round_trip() {
        let text = "command = \"equidist\"\nseed = 9\nn = [32, 64]\ns = 2.0\nstrategy = \"exchange\"\nrestarts = 2\nexclusion = 0.25\nwall_time = true\n\
                    [cells]\nfamily = \"bands\"\ncount = 40\n[tolerances]\ninner_tol = 1e-10\n[output]\ndir = \"x\"\n\
                    [set]\nkind = \"union\"\n[[set.parts]]\nkind = \"circle\"\ncenter = [-1.5, 0.0]\n[[set.parts]]\nkind = \"circle\"\ncenter = [1.5, 0.0]\n";
        let c = parse_config(text).unwrap();
        assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
        assert_eq!(config_hash(&c), config_hash(&parse_config(&serialize_config(&c)).unwrap()));
    }

    #[test]
    fn json_floats_have_17_digits() {
        let j = to_json(&vec![2.25, 1.0 / 3.0, -1e-300]);
        assert!(j.contains("2.2500000000000000e0"), "{j}");
        assert!(j.contains("3.3333333333333331e-1"), "{j}");
        let back: Vec<f64> = serde_json::from_str(&j).unwrap();
        assert_eq!(back, vec![2.25, 1.0 / 3.0, -1e-300]);
        assert!(to_json(&f64::INFINITY).trim() == "null");
    }

    #[test]
    fn solve_report_for_three_points() {
        let mut c = parse_config(&MINIMAL.replace("n = 3", "n = 3\ns = 2.0\nrestarts = 4")).unwrap();
        c.output.dir = "unused".into();
        let r = render(&c).unwrap();
        let Payload::Solve(rows) = &r.report.payload else { panic!() };
        assert!(rows[0].report.value.to_f64() >= 2.2387);
        let gaps = rows[0].gaps.as_ref().unwrap();
        assert!(gaps.iter().all(|g| (g - std::f64::consts::TAU / 3.0).abs() < 1e-2), "{gaps:?}");
        approx::assert_relative_eq!(rows[0].closed_form.unwrap(), 2.25, max_relative = 1e-15);
        assert!(r.json.contains("\"schema\": \"rieszpol-report/1\""));
        assert!(r.json.contains(&config_hash(&c)));
        assert!(r.json.contains("\"wall_time_seconds\": null"));
        assert_eq!(r.json, render(&c).unwrap().json);
    }

    #[test]
    fn analytic_asymptotics_fit() {
        let c = parse_config("command = \"asymptotics\"\nsource = \"analytic\"\nn = \"64..8192\"\n[set]\nkind = \"circle\"\n").unwrap();
        let r = render(&c).unwrap();
        assert_eq!(r.exit_code(), 0);
        let csv = r.csv.unwrap();
        let fit = csv.lines().find(|l| l.starts_with("# fit")).unwrap();
        let a: f64 = fit.split_whitespace().find_map(|w| w.strip_prefix("a=")).unwrap().parse().unwrap();
        assert!((a * std::f64::consts::PI - 1.0).abs() <= 0.02, "{fit}");
        assert_eq!(r.plotdata.unwrap().lines().count(), 9);
    }

    #[test]
    fn small_bound_check_and_oracle() {
        let c = parse_config("command = \"bound-check\"\nseed = 7\nsamples = 12\n").unwrap();
        let r = render(&c).unwrap();
        assert_eq!(r.exit_code(), 0);
        let o = parse_config("command = \"oracle\"\nseed = 1\nn = [1, 2, 3]\ns = 2.0\ngrid = 12\n[set]\nkind = \"circle\"\n").unwrap();
        let r = render(&o).unwrap();
        assert_eq!(r.exit_code(), 0);
        assert!(parse_config("command = \"oracle\"\nseed = 1\nn = 5\n[set]\nkind = \"circle\"\n").is_err());
    }

    #[test]
    fn run_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = parse_config("command = \"asymptotics\"\nsource = \"analytic\"\nn = \"4..64\"\n[set]\nkind = \"circle\"\n").unwrap();
        c.output.dir = dir.path().to_string_lossy().into_owned();
        let (files, code) = run(&c).unwrap();
        assert_eq!(code, 0);
        assert_eq!(files.len(), 3);
        for f in files {
            assert!(std::fs::metadata(f).unwrap().len() > 0);
        }
    }

    fn any_command() -> impl proptest::strategy::Strategy<Value = Command> {
        prop_oneof![
            Just(Command::Solve),
            Just(Command::Energy),
            Just(Command::Equidist),
            Just(Command::Oracle),
            Just(Command::BoundCheck),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn parse_inverts_serialize(cmd in any_command(), seed in 0u64..(1 << 40), ns in proptest::collection::vec(1usize..5, 1..4),
                                   s in 0.1f64..4.0, radius in 0.1f64..10.0, wall in any::<bool>()) {
            let mut c = RunConfig::new(cmd);
            c.seed = Some(seed);
            c.n = NList::from_vec(ns).unwrap();
            c.s = Some(s);
            c.wall_time = wall;
            c.set = Some(SetSpec::circle(radius).with_center(vec![radius, -1.0 / radius]));
            let c = c.validate().unwrap();
            prop_assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
        }
    }
}
