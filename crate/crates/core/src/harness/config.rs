//! INI experiment configuration with sections `[model]`, `[scheme]`,
//! `[grid]`, `[time]` and `[output]`.
//!
//! ```ini
//! [model]
//! study = convergence
//! name = r13
//! eps = 1e-6, 1e-4, 1e-2
//! coupling = implicit
//!
//! [scheme]
//! name = ssp2-332
//!
//! [grid]
//! sizes = 50, 150, 450
//!
//! [time]
//! dt = hyperbolic
//! c = 0.3
//! t_end = 1
//!
//! [output]
//! path = sweep.csv
//! ```

use std::path::{Path, PathBuf};

use ini::{Ini, Properties};

use crate::error::{Error, Result};
use crate::models::MomentCoupling;
use crate::r13_boundary::{BoundarySet, GhostRule};
use crate::tableau::{ImexTableau, Registry};

use super::Norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Convergence,
    SteadyState,
    KlfDemo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    /// The model's default test data.
    Default,
    /// Relaxed moments computed from the default `u`.
    Prepared,
    /// Steady-state channel data exactly as printed: `u~ = (eps/alpha)((C + beta eps) x - g)`.
    Printed,
    /// Channel data that satisfies the wall relation at `t = 0`:
    /// `u~ = (eps/alpha)(C x + g + beta eps)`.
    Compatible,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    R13 {
        /// `None` for the periodic problem.
        walls: Option<(BoundarySet, GhostRule)>,
        coupling: MomentCoupling,
        penalized: bool,
        g: f64,
        alpha: f64,
        beta: f64,
        /// Constant `C` of the channel initial data.
        wall_c: f64,
    },
    Diffusive2x2 {
        penalized: bool,
    },
    Klf {
        m: f64,
        tol: f64,
    },
    Broadwell,
    VanDerPol,
}

impl ModelSpec {
    pub fn id(&self) -> &'static str {
        match self {
            ModelSpec::R13 { walls: None, .. } => "r13-periodic",
            ModelSpec::R13 { .. } => "r13-channel",
            ModelSpec::Diffusive2x2 { .. } => "diffusive2x2",
            ModelSpec::Klf { .. } => "klf",
            ModelSpec::Broadwell => "broadwell",
            ModelSpec::VanDerPol => "vdp",
        }
    }
}

/// Time step as a function of the grid spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtRule {
    Fixed(f64),
    /// `c dx`
    Hyperbolic(f64),
    /// `c dx^2`
    Parabolic(f64),
    /// `t_end / N`: the ladder entries are step counts (ODE models).
    Steps,
}

impl DtRule {
    pub fn dt(self, dx: f64, n: usize, t_end: f64) -> f64 {
        match self {
            DtRule::Fixed(dt) => dt,
            DtRule::Hyperbolic(c) => c * dx,
            DtRule::Parabolic(c) => c * dx * dx,
            DtRule::Steps => t_end / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormChoice {
    L1,
    Linf,
    Both,
}

impl NormChoice {
    pub fn norms(self) -> &'static [Norm] {
        match self {
            NormChoice::L1 => &[Norm::L1],
            NormChoice::Linf => &[Norm::Linf],
            NormChoice::Both => &[Norm::L1, Norm::Linf],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub study: Study,
    pub model: ModelSpec,
    pub initial: InitialData,
    pub eps: Vec<f64>,
    pub scheme: String,
    /// KLF: scheme of the explicit-limit run.
    pub explicit_scheme: String,
    /// Registry file; the built-in registry when absent.
    pub registry: Option<PathBuf>,
    /// Nominal order; observed orders more than 0.2 below it are flagged.
    pub nominal_order: f64,
    pub sizes: Vec<usize>,
    pub dt: DtRule,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    /// Steady state: parabolic reference `dt = reference_c dx^2`.
    /// KLF: explicit-limit run `dt = reference_c dx^2`.
    pub reference_c: Option<f64>,
    /// KLF: grid of the reference profile.
    pub reference_n: usize,
    /// KLF: time at which the explicit-limit run must still be smooth (default 1).
    /// Steady state: start of the window where the residual must decay monotonically (default 5).
    pub check_time: Option<f64>,
    pub norm: NormChoice,
    pub output: Option<PathBuf>,
    /// Write measured wall-clock seconds; off by default so reports are byte-identical.
    pub timing: bool,
    /// Reserved; every study is deterministic.
    pub seed: u64,
}

const SECTIONS: [(&str, &[&str]); 5] = [
    (
        "model",
        &["study", "name", "eps", "boundary", "ghost", "coupling", "penalized", "g", "alpha", "beta", "wall_c", "m", "tol", "initial"],
    ),
    ("scheme", &["name", "registry", "order", "explicit"]),
    ("grid", &["sizes"]),
    ("time", &["dt", "c", "t_end", "snapshots", "reference_c", "reference_n", "check_time"]),
    ("output", &["path", "norm", "timing", "seed"]),
];

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

struct Section<'a> {
    name: &'static str,
    props: Option<&'a Properties>,
}

impl Section<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.props.and_then(|p| p.get(key)).map(strip_comment)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|_| cfg(format!("[{}] {key}: cannot parse `{v}`", self.name))))
            .transpose()
    }

    fn or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<T>().map_err(|_| cfg(format!("[{}] {key}: cannot parse `{s}`", self.name))))
                    .collect()
            })
            .transpose()
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true" | "yes" | "1" | "on") => Ok(true),
            Some("false" | "no" | "0" | "off") => Ok(false),
            Some(v) => Err(cfg(format!("[{}] {key}: expected a boolean, got `{v}`", self.name))),
        }
    }
}

/// Drops a trailing `; ...` or `# ...` comment. The marker needs a space in
/// front so paths like `runs#3.csv` survive.
fn strip_comment(v: &str) -> &str {
    let cut = [" ;", " #", "\t;", "\t#"].iter().filter_map(|m| v.find(m)).min();
    cut.map_or(v, |i| &v[..i]).trim()
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut c = Self::parse(&text)?;
        // Relative paths in the file are relative to the file.
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(r) = c.registry.as_mut() {
            if r.is_relative() {
                *r = base.join(&*r);
            }
        }
        if let Some(o) = c.output.as_mut() {
            if o.is_relative() {
                *o = base.join(&*o);
            }
        }
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| cfg(format!("malformed INI: {e}")))?;
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if props.iter().next().is_some() {
                    return Err(cfg("keys outside any section"));
                }
                continue;
            };
            let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| *s == name) else {
                return Err(cfg(format!("unknown section [{name}]")));
            };
            if let Some((k, _)) = props.iter().find(|(k, _)| !keys.contains(k)) {
                return Err(cfg(format!("unknown key `{k}` in [{name}]")));
            }
        }
        let sec = |name: &'static str| Section { name, props: ini.section(Some(name)) };
        let (model, scheme, grid, time, output) = (sec("model"), sec("scheme"), sec("grid"), sec("time"), sec("output"));

        let study = match model.raw("study").unwrap_or("convergence") {
            "convergence" => Study::Convergence,
            "steady-state" => Study::SteadyState,
            "klf-demo" => Study::KlfDemo,
            other => return Err(cfg(format!("[model] study: unknown study `{other}`"))),
        };
        let name = model.raw("name").ok_or_else(|| cfg("[model] name is required"))?;
        let spec = match name {
            "r13" => {
                let walls = match model.raw("boundary").unwrap_or("periodic") {
                    "periodic" => None,
                    b @ ("slip" | "flux") => {
                        let set = if b == "slip" { BoundarySet::Slip } else { BoundarySet::Flux };
                        let rule = match model.raw("ghost").unwrap_or("second-order") {
                            "second-order" => GhostRule::SecondOrder,
                            "lagrange1" => GhostRule::Lagrange(1),
                            "lagrange2" => GhostRule::Lagrange(2),
                            other => return Err(cfg(format!("[model] ghost: unknown rule `{other}`"))),
                        };
                        Some((set, rule))
                    }
                    other => return Err(cfg(format!("[model] boundary: unknown boundary `{other}`"))),
                };
                let coupling = match model.raw("coupling").unwrap_or("explicit") {
                    "explicit" => MomentCoupling::Explicit,
                    "implicit" => MomentCoupling::Implicit,
                    other => return Err(cfg(format!("[model] coupling: unknown coupling `{other}`"))),
                };
                let periodic = walls.is_none();
                ModelSpec::R13 {
                    walls,
                    coupling,
                    penalized: model.flag("penalized", true)?,
                    g: model.or("g", if periodic { 0.0 } else { 1.0 })?,
                    alpha: model.or("alpha", 0.7)?,
                    beta: model.or("beta", 0.3)?,
                    wall_c: model.or("wall_c", 0.0)?,
                }
            }
            "diffusive2x2" => ModelSpec::Diffusive2x2 { penalized: model.flag("penalized", true)? },
            "klf" => ModelSpec::Klf { m: model.or("m", 2.0)?, tol: model.or("tol", 1e-6)? },
            "broadwell" => ModelSpec::Broadwell,
            "vdp" => ModelSpec::VanDerPol,
            other => return Err(cfg(format!("[model] name: unknown model `{other}`"))),
        };
        let initial = match model.raw("initial").unwrap_or("default") {
            "default" => InitialData::Default,
            "prepared" => InitialData::Prepared,
            "printed" => InitialData::Printed,
            "compatible" => InitialData::Compatible,
            other => return Err(cfg(format!("[model] initial: unknown initial data `{other}`"))),
        };
        if matches!(initial, InitialData::Printed | InitialData::Compatible)
            && !matches!(spec, ModelSpec::R13 { walls: Some(_), .. })
        {
            return Err(cfg("[model] initial: channel initial data needs r13 with walls"));
        }
        let eps: Vec<f64> = model.list("eps")?.ok_or_else(|| cfg("[model] eps is required"))?;
        if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(cfg("[model] eps: need one or more positive values"));
        }

        let scheme_name = scheme.raw("name").ok_or_else(|| cfg("[scheme] name is required"))?.to_string();
        let registry = scheme.raw("registry").map(PathBuf::from);
        let nominal_order = scheme.or("order", 2.0)?;

        let sizes: Vec<usize> = grid.list("sizes")?.ok_or_else(|| cfg("[grid] sizes is required"))?;
        check_ladder(&sizes)?;

        let c: Option<f64> = time.parse("c")?;
        let need_c = || c.ok_or_else(|| cfg("[time] c is required for this dt rule"));
        let dt = match time.raw("dt").unwrap_or("hyperbolic") {
            "hyperbolic" => DtRule::Hyperbolic(need_c()?),
            "parabolic" => DtRule::Parabolic(need_c()?),
            "fixed" => DtRule::Fixed(need_c()?),
            "steps" => DtRule::Steps,
            other => return Err(cfg(format!("[time] dt: unknown rule `{other}`"))),
        };
        if let DtRule::Fixed(v) | DtRule::Hyperbolic(v) | DtRule::Parabolic(v) = dt {
            if !(v > 0.0) || !v.is_finite() {
                return Err(cfg("[time] c must be positive"));
            }
        }
        let t_end: f64 = time.parse("t_end")?.ok_or_else(|| cfg("[time] t_end is required"))?;
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(cfg("[time] t_end must be positive"));
        }
        let snapshots: Vec<f64> = time.list("snapshots")?.unwrap_or_default();
        if snapshots.iter().any(|s| !(*s > 0.0) || *s > t_end) {
            return Err(cfg("[time] snapshots must lie in (0, t_end]"));
        }
        let norm = match output.raw("norm").unwrap_or("both") {
            "l1" | "L1" => NormChoice::L1,
            "linf" | "Linf" => NormChoice::Linf,
            "both" => NormChoice::Both,
            other => return Err(cfg(format!("[output] norm: unknown norm `{other}`"))),
        };

        let c = Self {
            study,
            model: spec,
            initial,
            eps,
            scheme: scheme_name,
            explicit_scheme: scheme.raw("explicit").unwrap_or("imex-midpoint-trapezoid").to_string(),
            registry,
            nominal_order,
            sizes,
            dt,
            t_end,
            snapshots,
            reference_c: time.parse("reference_c")?,
            reference_n: time.or("reference_n", 384)?,
            check_time: time.parse("check_time")?,
            norm,
            output: output.raw("path").map(PathBuf::from),
            timing: output.flag("timing", false)?,
            seed: output.or("seed", 0)?,
        };
        c.check_study()?;
        Ok(c)
    }

    fn check_study(&self) -> Result<()> {
        match self.study {
            Study::Convergence => {
                if self.sizes.len() < 2 {
                    return Err(cfg("[grid] sizes: a convergence study needs at least two grids"));
                }
                if let ModelSpec::Klf { .. } = self.model {
                    return Err(cfg("klf runs through the klf-demo study"));
                }
                if matches!(self.model, ModelSpec::R13 { walls: Some(_), .. }) {
                    return Err(cfg("convergence studies use the periodic r13 problem"));
                }
                if (self.dt == DtRule::Steps) != (self.model == ModelSpec::VanDerPol) {
                    return Err(cfg("[time] dt = steps is the rule for (and only for) vdp"));
                }
            }
            Study::SteadyState => {
                if !matches!(self.model, ModelSpec::R13 { walls: Some(_), .. }) {
                    return Err(cfg("steady-state studies need r13 with walls"));
                }
                if self.sizes.len() != 1 || self.eps.len() != 1 {
                    return Err(cfg("steady-state studies take a single grid and a single eps"));
                }
            }
            Study::KlfDemo => {
                if !matches!(self.model, ModelSpec::Klf { .. }) {
                    return Err(cfg("klf-demo needs model klf"));
                }
                if self.reference_c.is_none() {
                    return Err(cfg("[time] reference_c (explicit-limit C) is required for klf-demo"));
                }
                if self.sizes.len() != 1 || self.eps.len() != 1 {
                    return Err(cfg("klf-demo takes a single grid and a single eps"));
                }
            }
        }
        Ok(())
    }

    pub fn tableau(&self) -> Result<ImexTableau> {
        self.tableau_named(&self.scheme)
    }

    pub fn tableau_named(&self, name: &str) -> Result<ImexTableau> {
        match &self.registry {
            Some(path) => Registry::parse(&std::fs::read_to_string(path)?)?.get(name),
            None => ImexTableau::builtin(name),
        }
    }

    pub fn ratio(&self) -> Option<usize> {
        let (a, b) = (*self.sizes.first()?, *self.sizes.get(1)?);
        Some(b / a)
    }
}

/// Strictly increasing with one constant integer ratio.
fn check_ladder(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(cfg("[grid] sizes: need positive sizes"));
    }
    if let [a, b, ..] = sizes {
        if b <= a || b % a != 0 {
            return Err(cfg("[grid] sizes: must increase by an integer ratio"));
        }
        let r = b / a;
        if sizes.windows(2).any(|w| w[1] != r * w[0]) {
            return Err(cfg("[grid] sizes: refinement ratio must be constant"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = "[model]\nname = r13\neps = 1e-6, 1e-2\ncoupling = implicit\n\n[scheme]\nname = ssp2-332\n\n[grid]\nsizes = 50, 150, 450\n\n[time]\ndt = hyperbolic\nc = 0.3\nt_end = 1\n";

    #[test]
    fn parses_a_sweep() {
        let c = ExperimentConfig::parse(SWEEP).unwrap();
        assert_eq!(c.study, Study::Convergence);
        assert_eq!(c.eps, vec![1e-6, 1e-2]);
        assert_eq!(c.sizes, vec![50, 150, 450]);
        assert_eq!(c.ratio(), Some(3));
        assert_eq!(c.dt, DtRule::Hyperbolic(0.3));
        assert_eq!(c.norm, NormChoice::Both);
        assert!(matches!(c.model, ModelSpec::R13 { walls: None, coupling: MomentCoupling::Implicit, penalized: true, .. }));
        assert_eq!(c.tableau().unwrap().name, "ssp2-332");
    }

    #[test]
    fn trailing_comments_are_ignored() {
        let text = SWEEP.replace("c = 0.3", "c = 0.3   ; times dx").replace("name = r13", "name = r13\t# model");
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), ExperimentConfig::parse(SWEEP).unwrap());
        assert_eq!(strip_comment("out/runs#3.csv"), "out/runs#3.csv");
    }

    #[test]
    fn rejects_bad_input() {
        for (from, to) in [
            ("sizes = 50, 150, 450", "sizes = 50, 150, 300"),
            ("sizes = 50, 150, 450", "sizes = 150, 50"),
            ("name = r13", "name = nope"),
            ("c = 0.3", "c = -1"),
            ("t_end = 1", "t_end = x"),
            ("[time]", "[timing]"),
            ("dt = hyperbolic", "dt = hyperbolic\nbogus = 1"),
            ("eps = 1e-6, 1e-2", "eps = 0"),
        ] {
            let text = SWEEP.replace(from, to);
            assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Config(_))), "{to}");
        }
    }
}
