//! Network definition files, CSV outputs and the structured analysis report.
//!
//! A network file is JSON:
//!
//! ```json
//! { "n": 3, "omega": [1, 2, 3], "coupling": [9, 6, 0] }
//! ```
//!
//! `coupling` is either an array of `N(N−1)/2` gains in edge order or a list of
//! `{"i": .., "j": .., "k": ..}` records with 1-based `i < j`; unlisted edges
//! get zero gain.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::analysis::{CouplingBounds, InvarianceReport, StabilityReport};
use crate::dynamics::{FieldSample, Trajectory};
use crate::error::{Error, Result};
use crate::network::{edge_count, OscillatorNetwork};
use crate::two_oscillator::SlopeInterval;

/// Rounds to 15 significant digits; the shortest round-trip rendering of the
/// result never needs more.
pub fn sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

fn fmt15(x: f64) -> String {
    format!("{}", sig15(x))
}

fn sig15_vec(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(sig15).collect()
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn number_array(path: &Path, field: &str, value: &Value) -> Result<Vec<f64>> {
    let arr = value
        .as_array()
        .ok_or_else(|| parse_err(path, format!("field `{field}` must be an array of numbers")))?;
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_f64().ok_or_else(|| {
                parse_err(path, format!("field `{field}[{i}]` is not a number: {v}"))
            })
        })
        .collect()
}

fn edge_records(path: &Path, arr: &[Value]) -> Result<Vec<(usize, usize, f64)>> {
    arr.iter()
        .enumerate()
        .map(|(idx, rec)| {
            let obj = rec.as_object().ok_or_else(|| {
                parse_err(path, format!("field `coupling[{idx}]` must be an {{i, j, k}} record"))
            })?;
            let get = |key: &str| {
                obj.get(key).ok_or_else(|| {
                    parse_err(path, format!("field `coupling[{idx}].{key}` is missing"))
                })
            };
            let index = |key: &str| -> Result<usize> {
                get(key)?
                    .as_u64()
                    .map(|v| v as usize)
                    .ok_or_else(|| {
                        parse_err(path, format!("field `coupling[{idx}].{key}` must be a positive integer"))
                    })
            };
            let k = get("k")?.as_f64().ok_or_else(|| {
                parse_err(path, format!("field `coupling[{idx}].k` is not a number"))
            })?;
            if let Some(extra) = obj.keys().find(|k| !matches!(k.as_str(), "i" | "j" | "k")) {
                return Err(parse_err(
                    path,
                    format!("field `coupling[{idx}]` has unknown key `{extra}`"),
                ));
            }
            Ok((index("i")?, index("j")?, k))
        })
        .collect()
}

/// Parses and validates a network definition from JSON text. `path` only
/// labels error messages.
pub fn parse_network_str(text: &str, path: &Path) -> Result<OscillatorNetwork> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        parse_err(path, format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    let obj: &Map<String, Value> = root
        .as_object()
        .ok_or_else(|| parse_err(path, "top level must be an object"))?;
    if let Some(extra) = obj
        .keys()
        .find(|k| !matches!(k.as_str(), "n" | "omega" | "coupling"))
    {
        return Err(parse_err(path, format!("unknown field `{extra}`")));
    }
    let field = |key: &str| {
        obj.get(key)
            .ok_or_else(|| parse_err(path, format!("missing field `{key}`")))
    };
    let n = field("n")?
        .as_u64()
        .ok_or_else(|| parse_err(path, "field `n` must be a non-negative integer"))? as usize;
    if n < 2 {
        return Err(Error::Validation(format!("n must be at least 2, got {n}")));
    }
    let omega = number_array(path, "omega", field("omega")?)?;
    if omega.len() != n {
        return Err(parse_err(
            path,
            format!("field `omega` has {} entries, expected n = {n}", omega.len()),
        ));
    }
    let coupling = field("coupling")?
        .as_array()
        .ok_or_else(|| parse_err(path, "field `coupling` must be an array"))?;
    let numbers = coupling.iter().filter(|v| v.is_number()).count();
    let records = coupling.iter().filter(|v| v.is_object()).count();
    if numbers > 0 && records > 0 {
        return Err(parse_err(
            path,
            "field `coupling` mixes a gain array with {i, j, k} records; use one form",
        ));
    }
    if records > 0 {
        let edges = edge_records(path, coupling)?;
        let mut seen = std::collections::HashSet::new();
        for &(i, j, _) in &edges {
            if !seen.insert((i, j)) {
                return Err(Error::Validation(format!("edge ({i}, {j}) listed twice")));
            }
        }
        OscillatorNetwork::from_edges(omega, &edges)
    } else {
        let gains = number_array(path, "coupling", &Value::Array(coupling.clone()))?;
        if gains.len() != edge_count(n) {
            return Err(parse_err(
                path,
                format!(
                    "field `coupling` has {} entries, expected n(n-1)/2 = {}",
                    gains.len(),
                    edge_count(n)
                ),
            ));
        }
        OscillatorNetwork::new(omega, gains)
    }
}

pub fn parse_network(path: &Path) -> Result<OscillatorNetwork> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_network_str(&text, path)
}

#[derive(Serialize)]
struct NetworkFile<'a> {
    n: usize,
    omega: &'a [f64],
    coupling: &'a [f64],
}

/// Serializes a network in the dense form at full precision.
pub fn network_to_json(net: &OscillatorNetwork) -> String {
    serde_json::to_string_pretty(&NetworkFile {
        n: net.n(),
        omega: net.natural_frequencies(),
        coupling: net.coupling_gains(),
    })
    .expect("plain numeric data")
}

pub fn write_network(path: &Path, net: &OscillatorNetwork) -> Result<()> {
    fs::write(path, network_to_json(net) + "\n").map_err(|e| Error::io(path, e))
}

/// `t,theta_1..theta_N,thetadot_1..thetadot_N`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.thetas.first().map_or(0, Vec::len);
    let mut out = String::from("t");
    for i in 1..=n {
        write!(out, ",theta_{i}").unwrap();
    }
    for i in 1..=n {
        write!(out, ",thetadot_{i}").unwrap();
    }
    out.push('\n');
    for k in 0..traj.len() {
        out.push_str(&fmt15(traj.times[k]));
        for v in traj.thetas[k].iter().chain(&traj.theta_dots[k]) {
            out.push(',');
            out.push_str(&fmt15(*v));
        }
        out.push('\n');
    }
    out
}

pub fn field_csv(samples: &[FieldSample]) -> String {
    let mut out = String::from("x1,x2,dx1,dx2\n");
    for s in samples {
        writeln!(
            out,
            "{},{},{},{}",
            fmt15(s.x1),
            fmt15(s.x2),
            fmt15(s.dx1),
            fmt15(s.dx2)
        )
        .unwrap();
    }
    out
}

/// `x1,upper,lower` rows of the invariant-region boundary.
pub fn boundary_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("x1,upper,lower\n");
    for (x, u, l) in rows {
        writeln!(out, "{},{},{}", fmt15(*x), fmt15(*u), fmt15(*l)).unwrap();
    }
    out
}

/// `a,lo_slope,hi_slope,nontangent` rows of a cone sweep.
pub fn cone_csv(rows: &[(f64, SlopeInterval, bool)]) -> String {
    let mut out = String::from("a,lo_slope,hi_slope,nontangent\n");
    for (a, c, ok) in rows {
        writeln!(out, "{},{},{},{}", fmt15(*a), fmt15(c.lo), fmt15(c.hi), ok).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsSection {
    pub per_edge: Vec<f64>,
    pub uniform: f64,
    pub onset_lower: Vec<f64>,
    pub attracting_delta: f64,
    pub attracting_margin: f64,
    pub attracting_holds: bool,
}

impl From<&CouplingBounds> for BoundsSection {
    fn from(b: &CouplingBounds) -> Self {
        Self {
            per_edge: sig15_vec(&b.per_edge_sufficient),
            uniform: sig15(b.uniform_k0),
            onset_lower: sig15_vec(&b.onset_lower),
            attracting_delta: sig15(b.attracting.delta),
            attracting_margin: sig15(b.attracting.margin),
            attracting_holds: b.attracting.holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceSection {
    pub passed: bool,
    pub bounds_met: bool,
    pub n_samples: usize,
    pub n_passed: usize,
    pub seed: u64,
    pub horizon: f64,
    pub dt: f64,
    pub max_v2_increase: f64,
    pub max_v2_dot: f64,
}

impl From<&InvarianceReport> for InvarianceSection {
    fn from(r: &InvarianceReport) -> Self {
        Self {
            passed: r.passed,
            bounds_met: r.bounds_met,
            n_samples: r.n_samples,
            n_passed: r.n_passed,
            seed: r.seed,
            horizon: sig15(r.horizon),
            dt: sig15(r.dt),
            max_v2_increase: sig15(r.max_v2_increase),
            max_v2_dot: sig15(r.max_v2_dot),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificates {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariance: Option<InvarianceSection>,
}

/// Structured analysis report; every float is rounded to 15 significant digits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub network: NetworkSummary,
    pub equilibrium: Option<Vec<f64>>,
    pub eigenvalues: Vec<[f64; 2]>,
    pub restricted_eigenvalues: Vec<[f64; 2]>,
    pub classification: Option<crate::analysis::Classification>,
    pub sync_frequency: f64,
    pub bounds: BoundsSection,
    pub certificates: Certificates,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSummary {
    pub n: usize,
    pub omega: Vec<f64>,
    pub coupling: Vec<f64>,
    pub connected: bool,
}

impl NetworkSummary {
    pub fn of(net: &OscillatorNetwork) -> Self {
        Self {
            n: net.n(),
            omega: sig15_vec(net.natural_frequencies()),
            coupling: sig15_vec(net.coupling_gains()),
            connected: crate::network::is_connected(net),
        }
    }
}

impl AnalysisReport {
    pub fn new(
        net: &OscillatorNetwork,
        stability: Option<&StabilityReport>,
        bounds: &CouplingBounds,
        invariance: Option<&InvarianceReport>,
    ) -> Self {
        let pairs = |v: &[num_complex::Complex64]| {
            v.iter().map(|l| [sig15(l.re), sig15(l.im)]).collect::<Vec<_>>()
        };
        Self {
            network: NetworkSummary::of(net),
            equilibrium: stability.map(|s| sig15_vec(&s.equilibrium_x)),
            eigenvalues: stability.map_or_else(Vec::new, |s| pairs(&s.eigenvalues)),
            restricted_eigenvalues: stability
                .map_or_else(Vec::new, |s| pairs(&s.restricted_eigenvalues)),
            classification: stability.map(|s| s.classification),
            sync_frequency: sig15(crate::analysis::sync_frequency(net)),
            bounds: bounds.into(),
            certificates: Certificates {
                invariance: invariance.map(Into::into),
            },
            notes: Vec::new(),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_output(dir: &Path, name: &str, contents: &str) -> Result<std::path::PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
