//! Scenario files: an INI-style description of one run.
//!
//! ```ini
//! [scenario]
//! preset = fig5d        # optional; later keys override the preset
//! name = my-run
//!
//! [grid]
//! L = 20
//! N = 200               # or: h = 0.1
//! quadrature = simpson  # simpson | trapezoid | unit
//!
//! [boundary]
//! mode = periodic
//!
//! [kernel.a]            # also [kernel.b], [kernel.phi]
//! shape = gaussian      # gaussian | rectangle | off
//! mu = 1
//! sigma = 1
//! shift = 0
//!
//! [initial]
//! type = rectangle      # rectangle | multi_rectangle | trigonometric | heaviside | gaussian | constant
//! v = 1
//! sigma = 1
//! mirror = false
//!
//! [integration]
//! stepper = rk4
//! dt = 0.1
//! t_end = 10
//! snapshots = 0, 5, 10
//! path = direct         # direct | spectral
//!
//! [adaptive]
//! enabled = false
//! epsilon = 1e-12
//! max_n = 65536
//! companion = rk_tracked
//!
//! [output]
//! directory = runs/demo
//! series_every = 10
//! window.inhomogeneous = -20, 20
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::adaptive::{AdaptiveConfig, CompanionMode};
use crate::diagnostics::Window;
use crate::error::{Error, Result, ScenarioIssue};
use crate::grid::{BoundaryMode, Grid, QuadratureRule};
use crate::integrate::{IntegrationConfig, StepperKind};
use crate::kernel::{InitialConditionSpec, KernelShape, KernelSpec};
use crate::presets;
use crate::rhs::{KernelSet, SampledKernels};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsPath {
    Direct,
    Spectral,
}

impl RhsPath {
    pub fn name(self) -> &'static str {
        match self {
            RhsPath::Direct => "direct",
            RhsPath::Spectral => "spectral",
        }
    }
}

impl FromStr for RhsPath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(RhsPath::Direct),
            "spectral" => Ok(RhsPath::Spectral),
            other => Err(Error::Parameter(format!(
                "unknown path `{other}` (expected direct or spectral)"
            ))),
        }
    }
}

/// Output settings.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    /// Run directory; when unset the caller picks one.
    pub directory: Option<PathBuf>,
    /// Time-series row every this many steps.
    pub series_every: u64,
    /// Named x windows for error metrics.
    pub windows: Vec<(String, Window)>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            directory: None,
            series_every: 10,
            windows: Vec::new(),
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub length: f64,
    pub n: usize,
    pub quadrature: QuadratureRule,
    pub boundary: BoundaryMode,
    pub kernels: KernelSet,
    pub initial: InitialConditionSpec,
    /// Sample the initial profile at `-x`.
    pub mirror: bool,
    pub stepper: StepperKind,
    pub dt: f64,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub path: RhsPath,
    pub adaptive_enabled: bool,
    pub adaptive: AdaptiveConfig,
    pub output: OutputSpec,
    /// Free-form remarks carried into the manifest.
    pub notes: Vec<String>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "scenario".into(),
            length: 20.0,
            n: 200,
            quadrature: QuadratureRule::Simpson,
            boundary: BoundaryMode::Periodic,
            kernels: KernelSet::new(
                KernelSpec::disabled(),
                KernelSpec::disabled(),
                KernelSpec::disabled(),
            ),
            initial: InitialConditionSpec::Rectangle { v: 1.0, sigma: 1.0 },
            mirror: false,
            stepper: StepperKind::Rk4,
            dt: 0.1,
            t_end: 10.0,
            snapshots: vec![0.0, 10.0],
            path: RhsPath::Direct,
            adaptive_enabled: false,
            adaptive: AdaptiveConfig::default(),
            output: OutputSpec::default(),
            notes: Vec::new(),
        }
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn write_kernel(out: &mut String, section: &str, k: &KernelSpec) {
    let _ = writeln!(out, "\n[{section}]");
    if !k.is_enabled() {
        let _ = writeln!(out, "shape = off");
        return;
    }
    let _ = writeln!(out, "shape = {}", k.shape);
    let _ = writeln!(out, "mu = {}", k.mu);
    let _ = writeln!(out, "sigma = {}", k.sigma);
    let _ = writeln!(out, "shift = {}", k.shift);
}

impl Scenario {
    pub fn h(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::centered(self.length, self.n)
    }

    pub fn integration(&self) -> Result<IntegrationConfig> {
        IntegrationConfig::new(self.dt, self.t_end, self.snapshots.clone())
    }

    /// Canonical text: every effective parameter, one fixed layout, floats
    /// in shortest round-trip form. Parsing it yields an equal scenario.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[scenario]");
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "\n[grid]");
        let _ = writeln!(out, "L = {}", self.length);
        let _ = writeln!(out, "N = {}", self.n);
        let _ = writeln!(out, "quadrature = {}", self.quadrature);
        let _ = writeln!(out, "\n[boundary]");
        let _ = writeln!(out, "mode = {}", self.boundary);
        write_kernel(&mut out, "kernel.a", &self.kernels.jump);
        write_kernel(&mut out, "kernel.b", &self.kernels.coalescence);
        write_kernel(&mut out, "kernel.phi", &self.kernels.repulsion);
        let _ = writeln!(out, "\n[initial]");
        let _ = writeln!(out, "type = {}", self.initial.kind());
        match &self.initial {
            InitialConditionSpec::Rectangle { v, sigma } => {
                let _ = writeln!(out, "v = {v}\nsigma = {sigma}");
            }
            InitialConditionSpec::MultiRectangle { amplitudes, sigmas } => {
                let _ = writeln!(
                    out,
                    "amplitudes = {}\nsigmas = {}",
                    fmt_list(amplitudes),
                    fmt_list(sigmas)
                );
            }
            InitialConditionSpec::Trigonometric { n0, mu0, k } => {
                let _ = writeln!(out, "n0 = {n0}\nmu0 = {mu0}\nk = {k}");
            }
            InitialConditionSpec::Heaviside { n0 } | InitialConditionSpec::Constant { n0 } => {
                let _ = writeln!(out, "n0 = {n0}");
            }
            InitialConditionSpec::Gaussian { mu, sigma } => {
                let _ = writeln!(out, "mu = {mu}\nsigma = {sigma}");
            }
        }
        let _ = writeln!(out, "mirror = {}", self.mirror);
        let _ = writeln!(out, "\n[integration]");
        let _ = writeln!(out, "stepper = {}", self.stepper);
        let _ = writeln!(out, "dt = {}", self.dt);
        let _ = writeln!(out, "t_end = {}", self.t_end);
        let _ = writeln!(out, "snapshots = {}", fmt_list(&self.snapshots));
        let _ = writeln!(out, "path = {}", self.path.name());
        let _ = writeln!(out, "\n[adaptive]");
        let _ = writeln!(out, "enabled = {}", self.adaptive_enabled);
        let _ = writeln!(out, "epsilon = {}", self.adaptive.epsilon);
        let _ = writeln!(out, "max_n = {}", self.adaptive.max_n);
        let _ = writeln!(out, "companion = {}", self.adaptive.companion);
        let _ = writeln!(out, "\n[output]");
        let _ = writeln!(out, "series_every = {}", self.output.series_every);
        for (name, w) in &self.output.windows {
            let _ = writeln!(out, "window.{name} = {}, {}", w.lo, w.hi);
        }
        out
    }

    /// Hex SHA-256 of the canonical text.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// All cross-field problems, without line information.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let grid = match Grid::centered(self.length, self.n) {
            Ok(g) => Some(g),
            Err(e) => {
                out.push(e.to_string());
                None
            }
        };
        for (name, k) in [
            ("kernel.a", &self.kernels.jump),
            ("kernel.b", &self.kernels.coalescence),
            ("kernel.phi", &self.kernels.repulsion),
        ] {
            if let Err(e) = k.validate() {
                out.push(format!("[{name}] {e}"));
            }
        }
        if let Err(e) = self.initial.validate() {
            out.push(format!("[initial] {e}"));
        }
        if let Err(e) = self.integration() {
            out.push(format!("[integration] {e}"));
        }
        if let Some(grid) = &grid {
            if out.is_empty() {
                if let Err(e) = SampledKernels::new(&self.kernels, grid, self.quadrature) {
                    out.push(e.to_string());
                }
            }
        }
        if self.path == RhsPath::Spectral {
            if let Err(e) = spectral::check_eligible(&self.kernels, self.boundary) {
                out.push(format!("[integration] {e}"));
            }
        }
        if self.adaptive_enabled {
            if self.boundary.is_periodic() {
                out.push(
                    "[adaptive] the growing window cannot be used with periodic boundaries".into(),
                );
            }
            if self.path == RhsPath::Spectral {
                out.push("[adaptive] the growing window requires the direct path".into());
            }
            if let Err(e) = self.adaptive.validate(self.n) {
                out.push(format!("[adaptive] {e}"));
            }
        }
        if self.output.series_every == 0 {
            out.push("[output] series_every must be at least 1".into());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Scenario(
                problems
                    .into_iter()
                    .map(|message| ScenarioIssue { line: 0, message })
                    .collect(),
            ))
        }
    }

    /// Parse scenario text, collecting every problem found.
    pub fn parse(text: &str) -> Result<Scenario> {
        Parser::default().parse(text)
    }

    pub fn from_file(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        let mut s = Scenario::parse(&text)?;
        if s.name == "scenario" {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                s.name = stem.to_string();
            }
        }
        Ok(s)
    }

    /// A preset name or a path to a scenario file.
    pub fn load(spec: &str) -> Result<Scenario> {
        if let Some(s) = presets::preset(spec) {
            return Ok(s);
        }
        let path = Path::new(spec);
        if path.exists() {
            return Scenario::from_file(path);
        }
        Err(Error::Parameter(format!(
            "`{spec}` is neither a preset name nor an existing file (try `list-presets`)"
        )))
    }
}

#[derive(Debug)]
struct Entry {
    line: usize,
    section: String,
    key: String,
    value: String,
}

#[derive(Default)]
struct Parser {
    issues: Vec<ScenarioIssue>,
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("expected a finite number, got `{v}`"))
}

fn parse_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|p| parse_f64(p.trim())).collect()
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

fn parse_usize(v: &str) -> std::result::Result<usize, String> {
    v.parse::<usize>()
        .map_err(|_| format!("expected a non-negative integer, got `{v}`"))
}

fn strip_comment(line: &str) -> &str {
    let mut prev_ws = true;
    for (i, c) in line.char_indices() {
        if (c == '#' || c == ';') && prev_ws {
            return &line[..i];
        }
        prev_ws = c.is_whitespace();
    }
    line
}

const SECTIONS: [&str; 10] = [
    "scenario",
    "grid",
    "boundary",
    "kernel.a",
    "kernel.b",
    "kernel.phi",
    "initial",
    "integration",
    "adaptive",
    "output",
];

impl Parser {
    fn issue(&mut self, line: usize, message: impl Into<String>) {
        self.issues.push(ScenarioIssue {
            line,
            message: message.into(),
        });
    }

    fn lex(&mut self, text: &str) -> Vec<Entry> {
        let mut entries = Vec::new();
        let mut section: Option<String> = None;
        let mut seen: HashMap<(String, String), usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = strip_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    self.issue(line, format!("malformed section header `{body}`"));
                    section = None;
                    continue;
                };
                let name = name.trim().to_ascii_lowercase();
                if SECTIONS.contains(&name.as_str()) {
                    section = Some(name);
                } else {
                    self.issue(line, format!("unknown section [{name}]"));
                    section = None;
                }
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                self.issue(line, format!("expected `key = value`, got `{body}`"));
                continue;
            };
            let Some(sec) = section.clone() else {
                self.issue(line, "key outside of a known section");
                continue;
            };
            let key = key.trim().to_ascii_lowercase();
            if let Some(prev) = seen.insert((sec.clone(), key.clone()), line) {
                self.issue(
                    line,
                    format!("duplicate key `{key}` (first set on line {prev})"),
                );
                continue;
            }
            entries.push(Entry {
                line,
                section: sec,
                key,
                value: value.trim().to_string(),
            });
        }
        entries
    }

    fn parse(mut self, text: &str) -> Result<Scenario> {
        let entries = self.lex(text);
        let mut s = Scenario::default();
        let mut from_preset = false;
        if let Some(e) = entries
            .iter()
            .find(|e| e.section == "scenario" && e.key == "preset")
        {
            match presets::preset(&e.value) {
                Some(p) => {
                    s = p;
                    from_preset = true;
                }
                None => self.issue(e.line, format!("unknown preset `{}`", e.value)),
            }
        }
        let mut lines: HashMap<&str, usize> = HashMap::new();

        let mut grid_h: Option<(f64, usize)> = None;
        let mut grid_n_set = false;
        let mut initial: Vec<&Entry> = Vec::new();
        let mut snapshots_set = false;
        let mut t_end_set = false;

        for e in &entries {
            let r: std::result::Result<(), String> = match (e.section.as_str(), e.key.as_str()) {
                ("scenario", "preset") => Ok(()),
                ("scenario", "name") => {
                    if e.value.is_empty() || e.value.contains(['/', '\\']) {
                        Err("name must be non-empty and contain no path separators".into())
                    } else {
                        s.name = e.value.clone();
                        Ok(())
                    }
                }
                ("grid", "l") | ("grid", "length") => parse_f64(&e.value).map(|v| s.length = v),
                ("grid", "n") => parse_usize(&e.value).map(|v| {
                    s.n = v;
                    grid_n_set = true;
                }),
                ("grid", "h") => parse_f64(&e.value).map(|v| grid_h = Some((v, e.line))),
                ("grid", "quadrature") => QuadratureRule::from_str(&e.value)
                    .map(|v| s.quadrature = v)
                    .map_err(|e| e.to_string()),
                ("boundary", "mode") => BoundaryMode::from_str(&e.value)
                    .map(|v| {
                        s.boundary = v;
                        lines.insert("mode", e.line);
                    })
                    .map_err(|e| e.to_string()),
                (sec, key) if sec.starts_with("kernel.") => {
                    let k = match sec {
                        "kernel.a" => &mut s.kernels.jump,
                        "kernel.b" => &mut s.kernels.coalescence,
                        _ => &mut s.kernels.repulsion,
                    };
                    apply_kernel_key(k, key, &e.value)
                }
                ("initial", _) => {
                    initial.push(e);
                    Ok(())
                }
                ("integration", "stepper") => StepperKind::from_str(&e.value)
                    .map(|v| s.stepper = v)
                    .map_err(|e| e.to_string()),
                ("integration", "dt") => parse_f64(&e.value).map(|v| s.dt = v),
                ("integration", "t_end") => parse_f64(&e.value).map(|v| {
                    s.t_end = v;
                    t_end_set = true;
                }),
                ("integration", "snapshots") => parse_list(&e.value).map(|v| {
                    s.snapshots = v;
                    snapshots_set = true;
                }),
                ("integration", "path") => RhsPath::from_str(&e.value)
                    .map(|v| {
                        s.path = v;
                        lines.insert("path", e.line);
                    })
                    .map_err(|e| e.to_string()),
                ("adaptive", "enabled") => parse_bool(&e.value).map(|v| {
                    s.adaptive_enabled = v;
                    lines.insert("adaptive", e.line);
                }),
                ("adaptive", "epsilon") => parse_f64(&e.value).map(|v| s.adaptive.epsilon = v),
                ("adaptive", "max_n") => parse_usize(&e.value).map(|v| s.adaptive.max_n = v),
                ("adaptive", "companion") => CompanionMode::from_str(&e.value)
                    .map(|v| s.adaptive.companion = v)
                    .map_err(|e| e.to_string()),
                ("output", "directory") => {
                    s.output.directory = Some(PathBuf::from(&e.value));
                    Ok(())
                }
                ("output", "series_every") => {
                    parse_usize(&e.value).map(|v| s.output.series_every = v as u64)
                }
                ("output", key) if key.starts_with("window.") => {
                    let name = key["window.".len()..].to_string();
                    parse_list(&e.value).and_then(|v| match v.as_slice() {
                        [lo, hi] => Window::new(*lo, *hi).map_err(|e| e.to_string()).map(|w| {
                            s.output.windows.retain(|(n, _)| *n != name);
                            s.output.windows.push((name, w));
                        }),
                        _ => Err("a window needs two numbers: lo, hi".into()),
                    })
                }
                (sec, key) => Err(format!("unknown key `{key}` in [{sec}]")),
            };
            if let Err(msg) = r {
                self.issue(e.line, msg);
            }
        }

        if let Some((h, line)) = grid_h {
            let n = s.length / h;
            if !(h > 0.0) || (n - n.round()).abs() > 1e-9 * n.max(1.0) {
                self.issue(line, format!("h = {h} does not divide L = {}", s.length));
            } else if grid_n_set && n.round() as usize != s.n {
                self.issue(
                    line,
                    format!("h = {h} disagrees with N = {} for L = {}", s.n, s.length),
                );
            } else {
                s.n = n.round() as usize;
            }
        }
        if t_end_set && !snapshots_set && !from_preset {
            s.snapshots = vec![0.0, s.t_end];
        }
        if !initial.is_empty() {
            match build_initial(&s.initial, s.mirror, &initial) {
                Ok((ic, mirror)) => {
                    s.initial = ic;
                    s.mirror = mirror;
                }
                Err(errs) => {
                    for (line, msg) in errs {
                        self.issue(line, msg);
                    }
                }
            }
        }

        if self.issues.is_empty() {
            for problem in s.problems() {
                let line = if problem.contains("spectral") {
                    lines.get("path").copied()
                } else if problem.starts_with("[adaptive]") {
                    lines.get("adaptive").copied()
                } else {
                    None
                };
                self.issue(line.unwrap_or(0), problem);
            }
        }
        if self.issues.is_empty() {
            Ok(s)
        } else {
            self.issues.sort_by_key(|i| i.line);
            Err(Error::Scenario(self.issues))
        }
    }
}

fn apply_kernel_key(k: &mut KernelSpec, key: &str, value: &str) -> std::result::Result<(), String> {
    match key {
        "shape" => {
            if value == "off" || value == "none" {
                *k = KernelSpec::disabled();
            } else {
                k.shape = KernelShape::from_str(value).map_err(|e| e.to_string())?;
                if k.mu == 0.0 {
                    k.mu = 1.0;
                }
            }
            Ok(())
        }
        "mu" => parse_f64(value).map(|v| k.mu = v),
        "sigma" => parse_f64(value).map(|v| k.sigma = v),
        "shift" => parse_f64(value).map(|v| k.shift = v),
        other => Err(format!("unknown kernel key `{other}`")),
    }
}

type Issues = Vec<(usize, String)>;

fn build_initial(
    base: &InitialConditionSpec,
    base_mirror: bool,
    entries: &[&Entry],
) -> std::result::Result<(InitialConditionSpec, bool), Issues> {
    let mut errs = Vec::new();
    let mut kind = base.kind().to_string();
    if let Some(e) = entries.iter().find(|e| e.key == "type") {
        kind = e.value.clone();
    }
    let same = kind == base.kind();
    let mut mirror = base_mirror;
    let mut nums: HashMap<&str, (f64, usize)> = HashMap::new();
    let mut lists: HashMap<&str, (Vec<f64>, usize)> = HashMap::new();
    let allowed: &[&str] = match kind.as_str() {
        "rectangle" => &["v", "sigma"],
        "multi_rectangle" => &["amplitudes", "sigmas"],
        "trigonometric" => &["n0", "mu0", "k"],
        "heaviside" | "constant" => &["n0"],
        "gaussian" => &["mu", "sigma"],
        other => {
            let line = entries
                .iter()
                .find(|e| e.key == "type")
                .map_or(0, |e| e.line);
            return Err(vec![(
                line,
                format!("unknown initial condition type `{other}`"),
            )]);
        }
    };
    for e in entries {
        match e.key.as_str() {
            "type" => {}
            "mirror" => match parse_bool(&e.value) {
                Ok(v) => mirror = v,
                Err(m) => errs.push((e.line, m)),
            },
            k if allowed.contains(&k) => {
                let key = allowed
                    .iter()
                    .find(|a| **a == k)
                    .copied()
                    .unwrap_or_default();
                if key == "amplitudes" || key == "sigmas" {
                    match parse_list(&e.value) {
                        Ok(v) => {
                            lists.insert(key, (v, e.line));
                        }
                        Err(m) => errs.push((e.line, m)),
                    }
                } else {
                    match parse_f64(&e.value) {
                        Ok(v) => {
                            nums.insert(key, (v, e.line));
                        }
                        Err(m) => errs.push((e.line, m)),
                    }
                }
            }
            other => errs.push((
                e.line,
                format!("key `{other}` does not apply to a {kind} initial condition"),
            )),
        }
    }
    if !errs.is_empty() {
        return Err(errs);
    }
    let num = |k: &str, default: f64| nums.get(k).map_or(default, |v| v.0);
    let ic = match kind.as_str() {
        "rectangle" => {
            let (v0, s0) = match (same, base) {
                (true, InitialConditionSpec::Rectangle { v, sigma }) => (*v, *sigma),
                _ => (1.0, 1.0),
            };
            InitialConditionSpec::Rectangle {
                v: num("v", v0),
                sigma: num("sigma", s0),
            }
        }
        "multi_rectangle" => {
            let (a0, s0) = match (same, base) {
                (true, InitialConditionSpec::MultiRectangle { amplitudes, sigmas }) => {
                    (amplitudes.clone(), sigmas.clone())
                }
                _ => (Vec::new(), Vec::new()),
            };
            let amplitudes = lists.get("amplitudes").map_or(a0, |v| v.0.clone());
            let sigmas = lists.get("sigmas").map(|v| v.0.clone()).unwrap_or_else(|| {
                if s0.len() == amplitudes.len() {
                    s0
                } else {
                    vec![1.0; amplitudes.len()]
                }
            });
            InitialConditionSpec::MultiRectangle { amplitudes, sigmas }
        }
        "trigonometric" => {
            let (n, m, k) = match (same, base) {
                (true, InitialConditionSpec::Trigonometric { n0, mu0, k }) => (*n0, *mu0, *k),
                _ => (1.0, 1.0, 1.0),
            };
            InitialConditionSpec::Trigonometric {
                n0: num("n0", n),
                mu0: num("mu0", m),
                k: num("k", k),
            }
        }
        "heaviside" => {
            let n = match (same, base) {
                (true, InitialConditionSpec::Heaviside { n0 }) => *n0,
                _ => 1.0,
            };
            InitialConditionSpec::Heaviside { n0: num("n0", n) }
        }
        "constant" => {
            let n = match (same, base) {
                (true, InitialConditionSpec::Constant { n0 }) => *n0,
                _ => 1.0,
            };
            InitialConditionSpec::Constant { n0: num("n0", n) }
        }
        _ => {
            let (m, s) = match (same, base) {
                (true, InitialConditionSpec::Gaussian { mu, sigma }) => (*mu, *sigma),
                _ => (1.0, 1.0),
            };
            InitialConditionSpec::Gaussian {
                mu: num("mu", m),
                sigma: num("sigma", s),
            }
        }
    };
    if let Err(e) = ic.validate() {
        let line = entries.first().map_or(0, |e| e.line);
        return Err(vec![(line, format!("[initial] {e}"))]);
    }
    Ok((ic, mirror))
}
