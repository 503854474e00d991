//! Normalized ratio tables for polarization and energy sequences, with a
//! `a + b/ln N` extrapolation toward the limit `β_d/𝓗_d(A)`.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::geometry::{SetDescriptor, SetKind};
use crate::polarization::{equally_spaced_value, solve, SolveOptions, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `N ln N`, for polarization at `s = d`.
    NLogN,
    /// `N² ln N`, for energy at `s = d`.
    N2LogN,
    /// `N`, for Chebyshev constants.
    N,
}

impl Normalization {
    pub fn factor(self, n: usize) -> f64 {
        let x = n as f64;
        match self {
            Normalization::NLogN => x * x.ln(),
            Normalization::N2LogN => x * x * x.ln(),
            Normalization::N => x,
        }
    }

    fn has_log(self) -> bool {
        !matches!(self, Normalization::N)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub n: usize,
    pub value: f64,
    pub ratio: f64,
}

/// Least-squares fit of `ratio(N) ≈ a + b/ln N`; `residual` is the RMS
/// misfit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub a: f64,
    pub b: f64,
    pub residual: f64,
}

impl Fit {
    pub fn eval(&self, n: usize) -> f64 {
        self.a + self.b / (n as f64).ln()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticsTable {
    pub source: String,
    pub normalization: Normalization,
    pub rows: Vec<Row>,
    /// `β_d/𝓗_d(A)`, `+∞` for null sets; absent for `N`-normalized tables,
    /// where only existence of the limit is known.
    pub target: Option<ExtReal>,
    pub extrapolated: Option<Fit>,
    /// Min and max ratio over the second half of the rows.
    pub liminf_estimate: f64,
    pub limsup_estimate: f64,
    pub kind: ValueKind,
}

/// What the table values are relative to the true constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Exact,
    /// Best-found polarization values.
    LowerBound,
    /// Best-found energies.
    UpperBound,
}

impl AsymptoticsTable {
    /// Builds a table from `(N, value)` pairs, which must have strictly
    /// increasing `N ≥ 2` (`N ≥ 1` without a log factor).
    pub fn new(
        source: impl Into<String>,
        normalization: Normalization,
        values: &[(usize, f64)],
        target: Option<ExtReal>,
        kind: ValueKind,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("table needs at least one row".into()));
        }
        let min_n = if normalization.has_log() { 2 } else { 1 };
        if values.iter().any(|&(n, _)| n < min_n) {
            return Err(Error::InvalidArgument(format!("N must be at least {min_n}")));
        }
        if values.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument("N must be strictly increasing".into()));
        }
        let rows: Vec<Row> = values
            .iter()
            .map(|&(n, value)| Row {
                n,
                value,
                ratio: value / normalization.factor(n),
            })
            .collect();
        let extrapolated = if normalization.has_log() && rows.len() >= 3 {
            extrapolate(&rows).ok()
        } else {
            None
        };
        let tail = &rows[rows.len() / 2..];
        let liminf_estimate = tail.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let limsup_estimate = tail.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        Ok(AsymptoticsTable {
            source: source.into(),
            normalization,
            rows,
            target,
            extrapolated,
            liminf_estimate,
            limsup_estimate,
            kind,
        })
    }
}

/// `β_d/𝓗_d(A)` as an extended real: `+∞` when `𝓗_d(A) = 0`.
pub fn limit_target(set: &SetDescriptor) -> ExtReal {
    set.limit_target().map_or(ExtReal::PosInf, ExtReal::Finite)
}

/// Fits `ratio ≈ a + b/ln N` by least squares. Rows are sorted by `N` first,
/// so the result does not depend on their order.
pub fn extrapolate(rows: &[Row]) -> Result<Fit> {
    if rows.len() < 3 {
        return Err(Error::SingularFit(format!("need at least 3 rows, got {}", rows.len())));
    }
    if rows.iter().any(|r| r.n < 2) {
        return Err(Error::SingularFit("N = 1 has no logarithm".into()));
    }
    let mut pts: Vec<(f64, f64)> = rows.iter().map(|r| (1.0 / (r.n as f64).ln(), r.ratio)).collect();
    pts.sort_by(|p, q| q.0.total_cmp(&p.0).then(p.1.total_cmp(&q.1)));
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if rows.iter().all(|r| r.n == rows[0].n) || !(sxx > 0.0) {
        return Err(Error::SingularFit("all rows share one N".into()));
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let residual = (pts.iter().map(|p| (a + b * p.0 - p.1).powi(2)).sum::<f64>() / k).sqrt();
    Ok(Fit { a, b, residual })
}

/// Where the polarization values come from.
#[derive(Clone, Debug)]
pub enum RatioSource {
    /// Closed form of equally spaced points; circles only.
    AnalyticCircle,
    Solver { strategy: Strategy, opts: SolveOptions },
}

impl RatioSource {
    fn name(&self) -> String {
        match self {
            RatioSource::AnalyticCircle => "analytic_circle".into(),
            RatioSource::Solver { strategy, .. } => format!("solver:{strategy}"),
        }
    }

    fn kind(&self) -> ValueKind {
        match self {
            RatioSource::AnalyticCircle => ValueKind::Exact,
            RatioSource::Solver { .. } => ValueKind::LowerBound,
        }
    }
}

fn circle_radius(set: &SetDescriptor) -> Result<f64> {
    let spec = set.spec();
    if spec.kind != SetKind::Circle {
        return Err(Error::Unsupported("the analytic source needs a circle".into()));
    }
    Ok(spec.radius.unwrap_or(1.0))
}

fn values_for(set: &SetDescriptor, s: f64, ns: &[usize], source: &RatioSource) -> Result<Vec<(usize, f64)>> {
    match source {
        RatioSource::AnalyticCircle => {
            let r = circle_radius(set)?;
            Ok(ns.iter().map(|&n| (n, equally_spaced_value(n, s) * r.powf(-s))).collect())
        }
        RatioSource::Solver { strategy, opts } => ns
            .iter()
            .map(|&n| solve(set, n, s, *strategy, opts).map(|r| (n, r.value.to_f64())))
            .collect(),
    }
}

/// `M^d_N(A)/(N ln N)` over the given `N`, with target `β_d/𝓗_d(A)`.
pub fn polarization_ratio_table(set: &SetDescriptor, ns: &[usize], source: &RatioSource) -> Result<AsymptoticsTable> {
    let s = set.dim() as f64;
    let values = values_for(set, s, ns, source)?;
    AsymptoticsTable::new(source.name(), Normalization::NLogN, &values, Some(limit_target(set)), source.kind())
}

/// `M^s_N(A)/N` over the given `N`; no target.
pub fn chebyshev_ratio_table(set: &SetDescriptor, s: f64, ns: &[usize], source: &RatioSource) -> Result<AsymptoticsTable> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("s must be positive, got {s}")));
    }
    let values = values_for(set, s, ns, source)?;
    AsymptoticsTable::new(source.name(), Normalization::N, &values, None, source.kind())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Consistent,
    Inconsistent,
    /// Infinite target and ratios at least doubling across the table.
    Diverging,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub tail_min_ratio: f64,
    pub target: ExtReal,
    pub extrapolated: Option<f64>,
    pub tolerance: f64,
    pub status: BoundStatus,
}

/// Relative slack of [`lower_bound_report`].
pub const LOWER_BOUND_TOL: f64 = 0.05;

/// Whether the extrapolated limit is at least `target·(1 − 0.05)`.
///
/// Advisory only: finite-`N` ratios may sit on either side of the limit.
pub fn lower_bound_report(table: &AsymptoticsTable) -> LowerBoundReport {
    let target = table.target.unwrap_or(ExtReal::PosInf);
    let extrapolated = table.extrapolated.map(|f| f.a);
    let status = match target {
        ExtReal::PosInf => {
            let first = table.rows.first().map_or(0.0, |r| r.ratio);
            let last = table.rows.last().map_or(0.0, |r| r.ratio);
            if table.rows.len() >= 2 && first > 0.0 && last >= 2.0 * first {
                BoundStatus::Diverging
            } else {
                BoundStatus::Inconclusive
            }
        }
        ExtReal::Finite(t) => match extrapolated {
            Some(a) if a >= t * (1.0 - LOWER_BOUND_TOL) => BoundStatus::Consistent,
            Some(_) => BoundStatus::Inconsistent,
            None => BoundStatus::Inconclusive,
        },
    };
    LowerBoundReport {
        tail_min_ratio: table.rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min),
        target,
        extrapolated,
        tolerance: LOWER_BOUND_TOL,
        status,
    }
}

/// Seventeen significant digits, the precision used in every text output.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v > 0.0 {
        "inf".into()
    } else if v < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

/// SHA-256 of the set's canonical JSON form, hex encoded.
pub fn set_hash(set: &SetDescriptor) -> String {
    let json = serde_json::to_vec(set.spec()).expect("set specs serialize");
    hex::encode(Sha256::digest(&json))
}

/// CSV with columns `N,value,ratio,target,model_fit`, preceded by `#`
/// comment lines carrying the set hash and the seed.
pub fn to_csv(table: &AsymptoticsTable, set: &SetDescriptor, seed: u64) -> String {
    let mut out = String::new();
    writeln!(out, "# set_sha256={}", set_hash(set)).unwrap();
    writeln!(out, "# seed={seed}").unwrap();
    writeln!(out, "# source={} normalization={:?}", table.source, table.normalization).unwrap();
    if let Some(f) = &table.extrapolated {
        writeln!(out, "# fit a={} b={} residual={}", fmt17(f.a), fmt17(f.b), fmt17(f.residual)).unwrap();
    }
    out.push_str("N,value,ratio,target,model_fit\n");
    let target = table.target.map_or(String::new(), |t| fmt17(t.to_f64()));
    for r in &table.rows {
        let fit = table.extrapolated.map_or(String::new(), |f| fmt17(f.eval(r.n)));
        writeln!(out, "{},{},{},{},{}", r.n, fmt17(r.value), fmt17(r.ratio), target, fit).unwrap();
    }
    out
}

/// Two whitespace-separated columns `N ratio`, then a `target <value>` line;
/// an infinite or missing target becomes a comment line instead.
pub fn emit_plotdata(table: &AsymptoticsTable) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::InvalidArgument("empty table".into()));
    }
    let mut out = String::new();
    for r in &table.rows {
        writeln!(out, "{} {}", r.n, fmt17(r.ratio)).unwrap();
    }
    match table.target {
        Some(ExtReal::Finite(t)) => writeln!(out, "target {}", fmt17(t)).unwrap(),
        Some(ExtReal::PosInf) => out.push_str("# target is +inf (null d-measure); no target line\n"),
        None => out.push_str("# no finite target for this normalization\n"),
    }
    Ok(out)
}
