use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stokes_darcy::{LoadSchedule, PhysParams, PorousStressSign};
use crate::verify::Suite;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    TwoReservoir,
    ChannelContact,
    Verify,
}

impl ScenarioKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "two_reservoir" => Some(ScenarioKind::TwoReservoir),
            "channel_contact" => Some(ScenarioKind::ChannelContact),
            "verify" => Some(ScenarioKind::Verify),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::TwoReservoir => "two_reservoir",
            ScenarioKind::ChannelContact => "channel_contact",
            ScenarioKind::Verify => "verify",
        }
    }
}

/// Geometry of either scenario; only the fields of the selected kind are
/// used.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshConfig {
    /// Channel length.
    pub length: f64,
    /// Channel or reservoir height.
    pub height: f64,
    pub nx: usize,
    pub ny: usize,
    /// Width of each reservoir.
    pub reservoir_width: f64,
    /// Sealed span between the reservoirs.
    pub gap: f64,
    pub cells_per_unit: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { length: 4.0, height: 1.0, nx: 40, ny: 4, reservoir_width: 1.0, gap: 1.0, cells_per_unit: 16 }
    }
}

/// Fully validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub mesh: MeshConfig,
    /// Material data; `params.pbar` holds the load schedule.
    pub params: PhysParams<f64>,
    pub dt: f64,
    pub t_end: f64,
    /// Pressure factor on the right reservoir top.
    pub right_factor: f64,
    /// VTK snapshot cadence in steps; 0 disables snapshots.
    pub vtk_every: usize,
    pub suite: Suite,
}

impl Scenario {
    /// Defaults of a scenario kind.
    pub fn defaults(kind: ScenarioKind) -> Self {
        let (dt, t_end, pbar, vtk_every) = match kind {
            ScenarioKind::TwoReservoir => (0.05, 2.0, LoadSchedule::constant(1.0), 10),
            ScenarioKind::ChannelContact => (
                0.02,
                10.0,
                LoadSchedule::new(vec![(0.0, -4.0), (6.0, 0.0)]).expect("increasing breakpoints"),
                25,
            ),
            ScenarioKind::Verify => (0.05, 0.05, LoadSchedule::zero(), 0),
        };
        Scenario {
            kind,
            mesh: MeshConfig::default(),
            params: PhysParams { pbar, ..PhysParams::default() },
            dt,
            t_end,
            right_factor: 0.0,
            vtk_every,
            suite: Suite::All,
        }
    }

    /// Number of time steps, `round(t_end / dt)`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("", &["scenario"]),
    ("mesh", &["length", "height", "nx", "ny", "reservoir_width", "gap", "cells_per_unit"]),
    ("fluid", &["mu", "rho", "delta_stab"]),
    ("layer", &["epsilon", "k_tau", "k_n", "sigma_p_sign"]),
    ("solid", &["rho_s_h", "c1", "c0"]),
    ("contact", &["gamma_c", "gamma_fsi", "g_min"]),
    ("time", &["dt", "t_end"]),
    ("load", &["schedule", "right_factor"]),
    ("output", &["vtk_every", "suite"]),
];

struct Entry {
    line: usize,
    value: String,
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.as_ref().display())))?;
    parse_config_str(&text)
}

/// Parses `key = value` lines under `[section]` headers; `#` starts a
/// comment. Unknown sections and keys are rejected.
pub fn parse_config_str(text: &str) -> Result<Scenario> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse { line, message: format!("malformed section header '{body}'") })?
                .trim();
            if name.is_empty() || !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(Error::Parse { line, message: format!("unknown section '[{name}]'") });
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, message: format!("expected 'key = value', got '{body}'") })?;
        let (key, value) = (key.trim(), value.trim());
        let value = value.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(value);
        let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        let known = KEYS.iter().any(|(s, keys)| *s == section && keys.contains(&key));
        if !known {
            return Err(Error::Parse { line, message: format!("unknown key '{full}'") });
        }
        if value.is_empty() {
            return Err(Error::Parse { line, message: format!("missing value for '{full}'") });
        }
        if let Some(prev) = entries.get(&full) {
            return Err(Error::Parse { line, message: format!("duplicate key '{full}' (first set on line {})", prev.line) });
        }
        entries.insert(full, Entry { line, value: value.to_string() });
    }

    let kind = match entries.get("scenario") {
        Some(e) => ScenarioKind::parse(&e.value).ok_or_else(|| Error::Parse {
            line: e.line,
            message: format!("scenario must be two_reservoir, channel_contact or verify, got '{}'", e.value),
        })?,
        None => return Err(Error::Config("missing top-level key 'scenario'".into())),
    };
    let mut s = Scenario::defaults(kind);
    let mut r = Reader { entries: &entries };

    r.float("mesh.length", &mut s.mesh.length)?;
    r.float("mesh.height", &mut s.mesh.height)?;
    r.count("mesh.nx", &mut s.mesh.nx)?;
    r.count("mesh.ny", &mut s.mesh.ny)?;
    r.float("mesh.reservoir_width", &mut s.mesh.reservoir_width)?;
    r.float("mesh.gap", &mut s.mesh.gap)?;
    r.count("mesh.cells_per_unit", &mut s.mesh.cells_per_unit)?;

    let p = &mut s.params;
    r.float("fluid.mu", &mut p.mu)?;
    r.float("fluid.rho", &mut p.rho_f)?;
    r.float("fluid.delta_stab", &mut p.delta_stab)?;
    r.float("layer.epsilon", &mut p.epsilon)?;
    r.float("layer.k_tau", &mut p.k_tau)?;
    r.float("layer.k_n", &mut p.k_n)?;
    if let Some(e) = entries.get("layer.sigma_p_sign") {
        p.sigma_p_sign = match e.value.as_str() {
            "dissipative" => PorousStressSign::Dissipative,
            "flipped" => PorousStressSign::Flipped,
            v => {
                return Err(Error::Parse {
                    line: e.line,
                    message: format!("layer.sigma_p_sign must be dissipative or flipped, got '{v}'"),
                })
            }
        };
    }
    r.float("solid.rho_s_h", &mut p.rho_s_h)?;
    r.float("solid.c1", &mut p.c1)?;
    r.float("solid.c0", &mut p.c0)?;
    r.optional("contact.gamma_c", &mut p.gamma_c)?;
    r.optional("contact.gamma_fsi", &mut p.gamma_fsi)?;
    r.optional("contact.g_min", &mut p.g_min)?;
    r.float("time.dt", &mut s.dt)?;
    r.float("time.t_end", &mut s.t_end)?;
    r.float("load.right_factor", &mut s.right_factor)?;
    if let Some(e) = entries.get("load.schedule") {
        let bps = parse_schedule(&e.value).map_err(|m| Error::Parse { line: e.line, message: format!("load.schedule: {m}") })?;
        if bps.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Config("load.schedule breakpoint times must be strictly increasing".into()));
        }
        s.params.pbar = LoadSchedule::new(bps)?;
    }
    r.count("output.vtk_every", &mut s.vtk_every)?;
    if let Some(e) = entries.get("output.suite") {
        s.suite = e.value.parse().map_err(|_| Error::Parse {
            line: e.line,
            message: format!("output.suite must be mms, poiseuille, slip or all, got '{}'", e.value),
        })?;
    }
    validate(&s)?;
    Ok(s)
}

/// `t0:v0, t1:v1, ...`
fn parse_schedule(text: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    text.split(',')
        .map(|pair| {
            let (t, v) = pair.split_once(':').ok_or_else(|| format!("expected 'time:value', got '{}'", pair.trim()))?;
            let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("'{}' is not a number", x.trim()));
            let (t, v) = (num(t)?, num(v)?);
            if !t.is_finite() || !v.is_finite() {
                return Err("breakpoints must be finite".to_string());
            }
            Ok((t, v))
        })
        .collect()
}

struct Reader<'a> {
    entries: &'a BTreeMap<String, Entry>,
}

impl Reader<'_> {
    fn float(&mut self, key: &str, slot: &mut f64) -> Result<()> {
        if let Some(e) = self.entries.get(key) {
            *slot = e
                .value
                .parse::<f64>()
                .map_err(|_| Error::Parse { line: e.line, message: format!("{key} expects a number, got '{}'", e.value) })?;
        }
        Ok(())
    }

    fn optional(&mut self, key: &str, slot: &mut Option<f64>) -> Result<()> {
        if self.entries.contains_key(key) {
            let mut v = 0.0;
            self.float(key, &mut v)?;
            *slot = Some(v);
        }
        Ok(())
    }

    fn count(&mut self, key: &str, slot: &mut usize) -> Result<()> {
        if let Some(e) = self.entries.get(key) {
            *slot = e.value.parse::<usize>().map_err(|_| Error::Parse {
                line: e.line,
                message: format!("{key} expects a non-negative integer, got '{}'", e.value),
            })?;
        }
        Ok(())
    }
}

fn validate(s: &Scenario) -> Result<()> {
    let p = &s.params;
    let positive = [
        ("mesh.length", s.mesh.length),
        ("mesh.height", s.mesh.height),
        ("mesh.reservoir_width", s.mesh.reservoir_width),
        ("mesh.gap", s.mesh.gap),
        ("fluid.mu", p.mu),
        ("fluid.rho", p.rho_f),
        ("layer.epsilon", p.epsilon),
        ("layer.k_n", p.k_n),
        ("time.dt", s.dt),
    ];
    for (key, v) in positive {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Config(format!("{key} must be positive, got {v}")));
        }
    }
    let nonneg = [
        ("fluid.delta_stab", p.delta_stab),
        ("layer.k_tau", p.k_tau),
        ("solid.rho_s_h", p.rho_s_h),
        ("solid.c1", p.c1),
        ("solid.c0", p.c0),
    ];
    for (key, v) in nonneg {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Config(format!("{key} must be non-negative, got {v}")));
        }
    }
    for (key, v) in [("contact.gamma_c", p.gamma_c), ("contact.gamma_fsi", p.gamma_fsi), ("contact.g_min", p.g_min)] {
        if let Some(v) = v {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{key} must be positive, got {v}")));
            }
        }
    }
    if let Some(g) = p.g_min {
        if !(g < s.mesh.height) {
            return Err(Error::Config(format!("contact.g_min {g} must be below mesh.height {}", s.mesh.height)));
        }
    }
    if !(s.t_end >= s.dt) {
        return Err(Error::Config(format!("time.t_end {} must be at least time.dt {}", s.t_end, s.dt)));
    }
    if s.steps() > 1_000_000 {
        return Err(Error::Config(format!("time.t_end / time.dt gives {} steps", s.steps())));
    }
    for (key, v, min) in [("mesh.nx", s.mesh.nx, 2), ("mesh.ny", s.mesh.ny, 1), ("mesh.cells_per_unit", s.mesh.cells_per_unit, 1)] {
        if v < min {
            return Err(Error::Config(format!("{key} must be at least {min}, got {v}")));
        }
    }
    if !s.right_factor.is_finite() {
        return Err(Error::Config("load.right_factor must be finite".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_fluid_section_uses_defaults() {
        let s = parse_config_str("scenario = two_reservoir\n[fluid]\n").unwrap();
        assert_eq!(s.params.mu, 0.03);
        assert_eq!(s.params.rho_f, 1.0);
        assert_eq!(s.kind, ScenarioKind::TwoReservoir);
    }

    #[test]
    fn quoted_values_are_unwrapped() {
        let s = parse_config_str("scenario = \"channel_contact\"\n[load]\nschedule = \"0:-4, 6:0\"\n").unwrap();
        assert_eq!(s.kind, ScenarioKind::ChannelContact);
        assert_eq!(s.params.pbar.value_at(7.0), 0.0);
    }

    #[test]
    fn negative_dt_names_the_key() {
        let e = parse_config_str("scenario = channel_contact\n[time]\ndt = -0.1\n").unwrap_err();
        assert!(e.to_string().contains("time.dt"), "{e}");
    }

    #[test]
    fn unknown_key_is_listed_verbatim() {
        let e = parse_config_str("scenario = two_reservoir\n[fluid]\nviscocity = 0.1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        assert!(e.to_string().contains("'fluid.viscocity'"), "{e}");
    }

    #[test]
    fn full_channel_config() {
        let text = "\
# channel with release
scenario = channel_contact
[mesh]
nx = 20   # coarse
ny = 2
[layer]
k_tau = 10
sigma_p_sign = flipped
[contact]
g_min = 0.01
[load]
schedule = 0:-4, 1.5:0
[output]
vtk_every = 0
";
        let s = parse_config_str(text).unwrap();
        assert_eq!((s.mesh.nx, s.mesh.ny), (20, 2));
        assert_eq!(s.params.k_tau, 10.0);
        assert_eq!(s.params.g_min, Some(0.01));
        assert_eq!(s.params.sigma_p_sign, PorousStressSign::Flipped);
        assert_eq!(s.params.pbar.value_at(1.0), -4.0);
        assert_eq!(s.params.pbar.value_at(2.0), 0.0);
        assert_eq!(s.vtk_every, 0);
        assert_eq!(s.steps(), 500);
    }

    #[test]
    fn malformed_lines() {
        for (text, line) in [
            ("scenario = verify\n[time\n", 2),
            ("scenario = verify\n[time]\ndt 0.1\n", 3),
            ("scenario = verify\n[physics]\n", 2),
            ("scenario = verify\n[time]\ndt = 0.1\ndt = 0.2\n", 4),
            ("scenario = verify\n[time]\ndt = fast\n", 3),
            ("scenario = sideways\n", 1),
        ] {
            match parse_config_str(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn schedule_must_increase() {
        let e = parse_config_str("scenario = channel_contact\n[load]\nschedule = 1:0, 0.5:1\n").unwrap_err();
        assert!(e.to_string().contains("load.schedule"));
    }

    #[test]
    fn missing_scenario() {
        assert!(matches!(parse_config_str("[time]\ndt = 0.1\n"), Err(Error::Config(_))));
    }
}
