//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! [graph]
//! nodes 3
//! 1 2 1.0
//! 1 3 1.0
//! 2 3 1.0
//!
//! [model]
//! kind linear
//! a 0 1; 0 0
//! b 0; 1
//!
//! [certificate]
//! mode riccati
//! rho 1
//! mu 0.5
//!
//! [controller]
//! beta_multiplier 5
//!
//! [initial]
//! base 0 0
//! radius 5
//! seed 31
//!
//! [integration]
//! h 0.01
//! t_end 30
//! record_interval 0.1
//! ```
//!
//! The `[graph]` section holds either inline graph text (`nodes N` then
//! `k l w` with 1-based nodes), `file <path>` relative to the scenario, or
//! `builtin lorenz15`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use edgesync_core::graph::{lorenz15, parse_graph_lines};
use edgesync_core::models::LorenzParams;
use edgesync_core::{Matrix, WeightedGraph};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Linear { a: Matrix, b: Matrix },
    Tanh { a: Matrix, b: Matrix, gamma: Gamma },
    Lorenz { params: LorenzParams },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Absolute(f64),
    /// `γ = value / λ_max(P)`.
    RelativeToMetric(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Explicit `α(x) = Kx`; otherwise derived from the certificate.
    pub gain: Option<Vec<f64>>,
}

impl ModelSpec {
    pub fn state_dim(&self) -> usize {
        match &self.kind {
            ModelKind::Linear { a, .. } | ModelKind::Tanh { a, .. } => a.rows(),
            ModelKind::Lorenz { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateMode {
    Riccati,
    Linearized,
    Inline(Matrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateSpec {
    pub mode: CertificateMode,
    pub rho: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSpec {
    Absolute(f64),
    Multiplier(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Base {
    Point(Vec<f64>),
    /// A point on the uncontrolled Lorenz attractor.
    Attractor,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Explicit(Vec<Vec<f64>>),
    Perturbed { base: Base, radius: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSpec {
    pub h: f64,
    pub t_end: f64,
    pub record_interval: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSpec {
    /// Start of the rate-fit window; defaults to 10% of the horizon.
    pub fit_start: Option<f64>,
    pub monotone_tol: f64,
    pub samples: usize,
    pub sample_radius: Option<f64>,
    pub sample_seed: u64,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            fit_start: None,
            monotone_tol: edgesync_core::analysis::MONOTONE_TOL,
            samples: 200,
            sample_radius: None,
            sample_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub graph: WeightedGraph,
    pub model: Option<ModelSpec>,
    pub certificate: Option<CertificateSpec>,
    pub controller: Option<BetaSpec>,
    pub initial: Option<InitialSpec>,
    pub integration: IntegrationSpec,
    pub analysis: AnalysisSpec,
    pub output_dir: Option<PathBuf>,
}

/// A `key value…` line with its 1-based line number.
#[derive(Debug, Clone)]
struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

#[derive(Debug, Default)]
struct Section<'a> {
    line: usize,
    raw: Vec<(usize, &'a str)>,
    entries: Vec<Entry<'a>>,
}

struct Parser<'p> {
    path: &'p Path,
}

impl Parser<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn keys<'a>(&self, section: &'a Section<'a>, name: &str, allowed: &[&str]) -> CliResult<HashMap<&'a str, Entry<'a>>> {
        let mut map = HashMap::new();
        for e in &section.entries {
            if !allowed.contains(&e.key) {
                return Err(self.err(e.line, format!("unknown key `{}` in [{name}]", e.key)));
            }
            if map.insert(e.key, e.clone()).is_some() {
                return Err(self.err(e.line, format!("duplicate key `{}`", e.key)));
            }
        }
        Ok(map)
    }

    fn real(&self, e: &Entry) -> CliResult<f64> {
        let v: f64 = e
            .value
            .parse()
            .map_err(|_| self.err(e.line, format!("`{}` expects a number, got `{}`", e.key, e.value)))?;
        if !v.is_finite() {
            return Err(self.err(e.line, format!("`{}` must be finite", e.key)));
        }
        Ok(v)
    }

    fn positive(&self, e: &Entry) -> CliResult<f64> {
        let v = self.real(e)?;
        if v <= 0.0 {
            return Err(self.err(e.line, format!("`{}` must be positive", e.key)));
        }
        Ok(v)
    }

    fn integer<T: std::str::FromStr>(&self, e: &Entry) -> CliResult<T> {
        e.value
            .parse()
            .map_err(|_| self.err(e.line, format!("`{}` expects a nonnegative integer, got `{}`", e.key, e.value)))
    }

    fn vector(&self, line: usize, text: &str) -> CliResult<Vec<f64>> {
        let values = text
            .split_whitespace()
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| self.err(line, format!("invalid number list `{text}`")))?;
        if values.is_empty() {
            return Err(self.err(line, "empty number list"));
        }
        Ok(values)
    }

    /// Rows separated by `;`.
    fn matrix(&self, e: &Entry) -> CliResult<Matrix> {
        let rows = e
            .value
            .split(';')
            .map(|r| self.vector(e.line, r))
            .collect::<CliResult<Vec<_>>>()?;
        Matrix::from_rows(&rows).map_err(|err| self.err(e.line, err.to_string()))
    }

    /// `b` as rows (`0; 1`) or a flat list (`0 1`), always a column.
    fn column(&self, e: &Entry) -> CliResult<Matrix> {
        let m = self.matrix(e)?;
        let values = if m.cols() == 1 {
            m.col_vec(0)
        } else if m.rows() == 1 {
            m.row_slice(0).to_vec()
        } else {
            return Err(self.err(e.line, "`b` must be a single column"));
        };
        Matrix::column(&values).map_err(|err| self.err(e.line, err.to_string()))
    }

    fn require<'a>(&self, map: &HashMap<&str, Entry<'a>>, key: &str, section: &Section) -> CliResult<Entry<'a>> {
        map.get(key)
            .cloned()
            .ok_or_else(|| self.err(section.line, format!("missing key `{key}`")))
    }

    fn graph(&self, s: &Section) -> CliResult<WeightedGraph> {
        let first = s.raw.iter().find_map(|(line, text)| {
            let mut it = text.split_whitespace();
            it.next().map(|k| (*line, k, it.collect::<Vec<_>>().join(" ")))
        });
        match first {
            Some((line, "builtin", name)) => match name.as_str() {
                "lorenz15" => Ok(lorenz15()),
                other => Err(self.err(line, format!("unknown builtin graph `{other}`"))),
            },
            Some((_, "file", rel)) => {
                let path = self.path.parent().unwrap_or(Path::new(".")).join(rel);
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                parse_graph_lines(text.lines().enumerate().map(|(i, l)| (i + 1, l))).map_err(|e| {
                    CliError::Parse {
                        path,
                        line: e.line,
                        message: e.message,
                    }
                })
            }
            _ => parse_graph_lines(s.raw.iter().copied()).map_err(|e| self.err(e.line, e.message)),
        }
    }

    fn model(&self, s: &Section) -> CliResult<ModelSpec> {
        let map = self.keys(s, "model", &["kind", "a", "b", "gamma", "gamma_relative", "params", "k"])?;
        let kind = self.require(&map, "kind", s)?;
        let ab = || -> CliResult<(Matrix, Matrix)> {
            let a_entry = self.require(&map, "a", s)?;
            let a = self.matrix(&a_entry)?;
            let b = self.column(&self.require(&map, "b", s)?)?;
            if !a.is_square() || b.rows() != a.rows() {
                return Err(self.err(a_entry.line, format!("`a` is {}x{} but `b` has {} rows", a.rows(), a.cols(), b.rows())));
            }
            Ok((a, b))
        };
        let parsed = match kind.value {
            "linear" => {
                let (a, b) = ab()?;
                ModelKind::Linear { a, b }
            }
            "tanh" => {
                let (a, b) = ab()?;
                let gamma = match (map.get("gamma"), map.get("gamma_relative")) {
                    (Some(e), None) => Gamma::Absolute(self.real(e)?),
                    (None, Some(e)) => Gamma::RelativeToMetric(self.real(e)?),
                    _ => return Err(self.err(kind.line, "tanh needs exactly one of `gamma`, `gamma_relative`")),
                };
                ModelKind::Tanh { a, b, gamma }
            }
            "lorenz" => {
                let params = match map.get("params") {
                    None => LorenzParams::CHAOTIC,
                    Some(e) => match e.value {
                        "chaotic" => LorenzParams::CHAOTIC,
                        "literal" => LorenzParams::LITERAL,
                        text => {
                            let v = self.vector(e.line, text)?;
                            if v.len() != 3 {
                                return Err(self.err(e.line, "`params` expects chaotic, literal or `a b c`"));
                            }
                            LorenzParams { a: v[0], b: v[1], c: v[2] }
                        }
                    },
                };
                ModelKind::Lorenz { params }
            }
            other => return Err(self.err(kind.line, format!("unknown model kind `{other}`"))),
        };
        let spec = ModelSpec {
            kind: parsed,
            gain: map.get("k").map(|e| self.vector(e.line, e.value)).transpose()?,
        };
        let allowed: &[&str] = match spec.kind {
            ModelKind::Linear { .. } => &["kind", "a", "b", "k"],
            ModelKind::Tanh { .. } => &["kind", "a", "b", "gamma", "gamma_relative", "k"],
            ModelKind::Lorenz { .. } => &["kind", "params", "k"],
        };
        if let Some(e) = map.values().find(|e| !allowed.contains(&e.key)) {
            return Err(self.err(e.line, format!("`{}` does not apply to this model", e.key)));
        }
        if let Some(k) = &spec.gain {
            if k.len() != spec.state_dim() {
                return Err(self.err(map["k"].line, format!("`k` has {} entries, state dimension is {}", k.len(), spec.state_dim())));
            }
        }
        Ok(spec)
    }

    fn certificate(&self, s: &Section) -> CliResult<CertificateSpec> {
        let map = self.keys(s, "certificate", &["mode", "rho", "mu", "p"])?;
        let mode = self.require(&map, "mode", s)?;
        let mode = match mode.value {
            "riccati" => CertificateMode::Riccati,
            "linearized" => CertificateMode::Linearized,
            "inline" => CertificateMode::Inline(self.matrix(&self.require(&map, "p", s)?)?),
            other => return Err(self.err(mode.line, format!("unknown certificate mode `{other}`"))),
        };
        if let (false, Some(e)) = (matches!(mode, CertificateMode::Inline(_)), map.get("p")) {
            return Err(self.err(e.line, "`p` only applies to mode inline"));
        }
        Ok(CertificateSpec {
            mode,
            rho: self.positive(&self.require(&map, "rho", s)?)?,
            mu: self.positive(&self.require(&map, "mu", s)?)?,
        })
    }

    fn controller(&self, s: &Section) -> CliResult<BetaSpec> {
        let map = self.keys(s, "controller", &["beta", "beta_multiplier"])?;
        let nonneg = |e: &Entry| -> CliResult<f64> {
            let v = self.real(e)?;
            if v < 0.0 {
                return Err(self.err(e.line, format!("`{}` must be nonnegative", e.key)));
            }
            Ok(v)
        };
        match (map.get("beta"), map.get("beta_multiplier")) {
            (Some(e), None) => Ok(BetaSpec::Absolute(nonneg(e)?)),
            (None, Some(e)) => Ok(BetaSpec::Multiplier(nonneg(e)?)),
            _ => Err(self.err(s.line, "[controller] needs exactly one of `beta`, `beta_multiplier`")),
        }
    }

    fn initial(&self, s: &Section) -> CliResult<InitialSpec> {
        let states: Vec<&Entry> = s.entries.iter().filter(|e| e.key == "state").collect();
        if !states.is_empty() {
            if let Some(e) = s.entries.iter().find(|e| e.key != "state") {
                return Err(self.err(e.line, "explicit `state` lines cannot be mixed with other keys"));
            }
            return states
                .iter()
                .map(|e| self.vector(e.line, e.value))
                .collect::<CliResult<Vec<_>>>()
                .map(InitialSpec::Explicit);
        }
        let map = self.keys(s, "initial", &["base", "radius", "seed"])?;
        let base_entry = self.require(&map, "base", s)?;
        let base = match base_entry.value {
            "attractor" => Base::Attractor,
            text => Base::Point(self.vector(base_entry.line, text)?),
        };
        let radius = match map.get("radius") {
            Some(e) => self.real(e)?,
            None => 0.0,
        };
        if radius < 0.0 {
            return Err(self.err(map["radius"].line, "`radius` must be nonnegative"));
        }
        Ok(InitialSpec::Perturbed {
            base,
            radius,
            seed: map.get("seed").map(|e| self.integer(e)).transpose()?.unwrap_or(0),
        })
    }

    fn integration(&self, s: Option<&Section>, default_h: f64) -> CliResult<IntegrationSpec> {
        let mut spec = IntegrationSpec {
            h: default_h,
            t_end: 20.0,
            record_interval: 0.1,
        };
        if let Some(s) = s {
            let map = self.keys(s, "integration", &["h", "t_end", "record_interval"])?;
            if let Some(e) = map.get("h") {
                spec.h = self.positive(e)?;
            }
            if let Some(e) = map.get("t_end") {
                spec.t_end = self.positive(e)?;
            }
            if let Some(e) = map.get("record_interval") {
                spec.record_interval = self.positive(e)?;
            }
        }
        Ok(spec)
    }

    fn analysis(&self, s: &Section) -> CliResult<AnalysisSpec> {
        let map = self.keys(s, "analysis", &["fit_start", "monotone_tol", "samples", "sample_radius", "sample_seed"])?;
        let mut spec = AnalysisSpec::default();
        if let Some(e) = map.get("fit_start") {
            spec.fit_start = Some(self.real(e)?);
        }
        if let Some(e) = map.get("monotone_tol") {
            spec.monotone_tol = self.positive(e)?;
        }
        if let Some(e) = map.get("samples") {
            spec.samples = self.integer(e)?;
        }
        if let Some(e) = map.get("sample_radius") {
            spec.sample_radius = Some(self.positive(e)?);
        }
        if let Some(e) = map.get("sample_seed") {
            spec.sample_seed = self.integer(e)?;
        }
        Ok(spec)
    }
}

const SECTIONS: [&str; 8] = [
    "graph",
    "model",
    "certificate",
    "controller",
    "initial",
    "integration",
    "analysis",
    "output",
];

/// Parses scenario text; `path` locates relative graph files and labels
/// errors.
pub fn parse_scenario(text: &str, path: &Path) -> CliResult<Scenario> {
    let p = Parser { path };
    let mut sections: HashMap<&str, Section> = HashMap::new();
    let mut current: Option<&str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim();
            let Some(&known) = SECTIONS.iter().find(|s| **s == name) else {
                return Err(p.err(line, format!("unknown section [{name}]")));
            };
            if sections.contains_key(known) {
                return Err(p.err(line, format!("duplicate section [{name}]")));
            }
            sections.insert(known, Section { line, ..Section::default() });
            current = Some(known);
            continue;
        }
        let Some(name) = current else {
            return Err(p.err(line, "content before the first [section]"));
        };
        let section = sections.get_mut(name).expect("current section exists");
        section.raw.push((line, content));
        let (key, value) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        section.entries.push(Entry {
            line,
            key,
            value: value.trim(),
        });
    }

    let graph_section = sections
        .get("graph")
        .ok_or_else(|| p.err(1, "missing [graph] section"))?;
    let graph = p.graph(graph_section)?;
    let model = sections.get("model").map(|s| p.model(s)).transpose()?;
    let certificate = sections.get("certificate").map(|s| p.certificate(s)).transpose()?;
    let controller = sections.get("controller").map(|s| p.controller(s)).transpose()?;
    let initial = sections.get("initial").map(|s| p.initial(s)).transpose()?;
    let default_h = match model.as_ref().map(|m| &m.kind) {
        Some(ModelKind::Lorenz { .. }) => 1e-3,
        _ => 1e-2,
    };
    let integration = p.integration(sections.get("integration"), default_h)?;
    let analysis = sections.get("analysis").map(|s| p.analysis(s)).transpose()?.unwrap_or_default();
    let output_dir = match sections.get("output") {
        Some(s) => {
            let map = p.keys(s, "output", &["dir"])?;
            Some(PathBuf::from(p.require(&map, "dir", s)?.value))
        }
        None => None,
    };

    if let (Some(m), Some(c)) = (&model, &certificate) {
        let line = sections["certificate"].line;
        match (&m.kind, &c.mode) {
            (ModelKind::Lorenz { .. }, CertificateMode::Riccati) => {
                return Err(p.err(line, "lorenz models use mode linearized or inline"));
            }
            (_, CertificateMode::Inline(pm)) if pm.shape() != (m.state_dim(), m.state_dim()) => {
                return Err(p.err(line, format!("`p` must be {0}x{0}", m.state_dim())));
            }
            _ => {}
        }
    }
    if let (Some(m), Some(init)) = (&model, &initial) {
        let line = sections["initial"].line;
        let n = m.state_dim();
        match init {
            InitialSpec::Explicit(states) => {
                if states.len() != graph.node_count() || states.iter().any(|s| s.len() != n) {
                    return Err(p.err(line, format!("need {} `state` lines of dimension {n}", graph.node_count())));
                }
            }
            InitialSpec::Perturbed { base: Base::Point(b), .. } if b.len() != n => {
                return Err(p.err(line, format!("`base` has {} entries, state dimension is {n}", b.len())));
            }
            InitialSpec::Perturbed { base: Base::Attractor, .. } if !matches!(m.kind, ModelKind::Lorenz { .. }) => {
                return Err(p.err(line, "`base attractor` needs a lorenz model"));
            }
            _ => {}
        }
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    Ok(Scenario {
        name,
        graph,
        model,
        certificate,
        controller,
        initial,
        integration,
        analysis,
        output_dir,
    })
}

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario(&text, path)
}
