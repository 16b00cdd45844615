//! Scenario files: one `dotted.key = value` pair per line, `#` starts a
//! comment. Lists are comma separated. Every key has a documented default
//! except `dim`, `T`, `p` and `basis.N`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{MoplaError, Result};
use crate::geometry::{MotionFamily, MotionKind};
use crate::integrator::OdeSettings;
use crate::problem::{Forcing, InitialDatum, Manufactured, ProblemData};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    Zero,
    Constant,
    Cosine,
    Mode,
    Bump,
}

impl InitialKind {
    fn name(self) -> &'static str {
        match self {
            InitialKind::Zero => "zero",
            InitialKind::Constant => "constant",
            InitialKind::Cosine => "cosine",
            InitialKind::Mode => "mode",
            InitialKind::Bump => "bump",
        }
    }
}

impl FromStr for InitialKind {
    type Err = MoplaError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "zero" => InitialKind::Zero,
            "constant" => InitialKind::Constant,
            "cosine" => InitialKind::Cosine,
            "mode" => InitialKind::Mode,
            "bump" => InitialKind::Bump,
            other => {
                return Err(MoplaError::config(
                    "problem.u0",
                    format!("`{other}` is not one of zero, constant, cosine, mode, bump"),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingKind {
    Zero,
    Constant,
    Oscillating,
}

impl ForcingKind {
    fn name(self) -> &'static str {
        match self {
            ForcingKind::Zero => "zero",
            ForcingKind::Constant => "constant",
            ForcingKind::Oscillating => "oscillating",
        }
    }
}

impl FromStr for ForcingKind {
    type Err = MoplaError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "zero" => ForcingKind::Zero,
            "constant" => ForcingKind::Constant,
            "oscillating" => ForcingKind::Oscillating,
            other => {
                return Err(MoplaError::config(
                    "problem.f",
                    format!("`{other}` is not one of zero, constant, oscillating"),
                ))
            }
        })
    }
}

/// Initial datum parameters. `k` is the cosine wavenumber or the 1-based
/// mode index; `amplitude` doubles as the value of a constant datum.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub kind: InitialKind,
    pub amplitude: f64,
    pub k: f64,
    pub offset: f64,
    pub center: [f64; 2],
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcingConfig {
    pub kind: ForcingKind,
    pub amplitude: f64,
    pub omega: f64,
}

/// Output grid default for scenarios; finer than the library default so the
/// Simpson error of the energy balance stays below `diag.energy_tol`.
pub const DEFAULT_STRIDE: usize = 4096;

pub const IDENTITY_CHECKS: [&str; 6] = ["mass", "energy", "hien", "weak", "pd", "boundary"];
pub const PROBES: [&str; 5] = ["vec_mono", "p_lip", "lp_l2", "poincare", "friedrichs"];

#[derive(Debug, Clone, PartialEq)]
pub struct DiagConfig {
    pub checks: Vec<String>,
    pub mass_tol: f64,
    pub energy_tol: f64,
    pub norm_tol: f64,
    pub weak_tol: f64,
    pub hien_tol: f64,
    pub pd_fraction: f64,
    pub pd_grid: usize,
    pub t_grid: usize,
    pub probes: Vec<String>,
    /// Exponents swept by the probes; empty means the scenario's `p`.
    pub p_list: Vec<f64>,
    pub vector_samples: usize,
    pub vector_dim: usize,
    pub function_samples: usize,
    pub probe_tol: f64,
    pub delta: f64,
    pub q: f64,
    pub poincare_ratio: f64,
    pub epsilon: f64,
    pub friedrichs_c: Option<f64>,
    pub fine_n: usize,
    pub friedrichs_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub refine_n_list: Vec<usize>,
    pub refine_reference_n: usize,
    pub stability_deltas: Vec<f64>,
    pub stability_factor: f64,
    pub mms_rate: f64,
    pub mms_amplitude: f64,
    pub mms_n_list: Vec<usize>,
    pub mms_tol: f64,
    pub mms_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionCheckConfig {
    pub samples: usize,
    pub time_samples: usize,
    pub h: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub dim: usize,
    pub horizon: f64,
    pub p: f64,
    pub motion: MotionFamily,
    pub basis_n: usize,
    pub quad_order: Option<usize>,
    pub ode: OdeSettings,
    pub u0: InitialConfig,
    pub forcing: ForcingConfig,
    pub diag: DiagConfig,
    pub study: StudyConfig,
    pub motion_check: MotionCheckConfig,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

struct Entries {
    map: BTreeMap<String, String>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                MoplaError::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(MoplaError::config(format!("line {}", lineno + 1), "empty key"));
            }
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(MoplaError::config(key, "duplicate key"));
            }
        }
        Ok(Entries { map })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn required<T: FromStr<Err: std::fmt::Display>>(&mut self, key: &str) -> Result<T> {
        let raw = self.take(key).ok_or_else(|| MoplaError::config(key, "required key is missing"))?;
        parse_value(key, &raw)
    }

    fn or<T: FromStr<Err: std::fmt::Display>>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take(key) {
            Some(raw) => parse_value(key, &raw),
            None => Ok(default),
        }
    }

    /// `auto` (or absence) maps to `None`.
    fn auto<T: FromStr<Err: std::fmt::Display>>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            Some(raw) if raw != "auto" => parse_value(key, &raw).map(Some),
            _ => Ok(None),
        }
    }

    fn list<T: FromStr<Err: std::fmt::Display>>(&mut self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.take(key) {
            Some(raw) => parse_list(key, &raw),
            None => Ok(default),
        }
    }

    fn words(&mut self, key: &str, default: &[&str]) -> Vec<String> {
        match self.take(key) {
            Some(raw) => raw.split(',').map(|w| w.trim().to_string()).filter(|w| !w.is_empty()).collect(),
            None => default.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn pair(&mut self, key: &str, default: [f64; 2], pad: f64) -> Result<[f64; 2]> {
        match self.take(key) {
            None => Ok(default),
            Some(raw) => {
                let v: Vec<f64> = parse_list(key, &raw)?;
                match v.as_slice() {
                    [a] => Ok([*a, pad]),
                    [a, b] => Ok([*a, *b]),
                    _ => Err(MoplaError::config(key, "expects one or two comma-separated numbers")),
                }
            }
        }
    }
}

fn parse_value<T: FromStr<Err: std::fmt::Display>>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|e: T::Err| {
        let detail = e.to_string();
        if detail.starts_with("configuration error") {
            MoplaError::config(key, format!("`{raw}` rejected ({detail})"))
        } else {
            MoplaError::config(key, format!("cannot parse `{raw}`: {detail}"))
        }
    })
}

fn parse_list<T: FromStr<Err: std::fmt::Display>>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(MoplaError::config(key, format!("must be finite and > 0 (got {v})")))
    }
}

fn at_least(key: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(MoplaError::config(key, format!("must be >= {min} (got {v})")))
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MoplaError::config("--config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut e = Entries::parse(text)?;
        let dim: usize = e.required("dim")?;
        if dim != 1 && dim != 2 {
            return Err(MoplaError::config("dim", format!("must be 1 or 2 (got {dim})")));
        }
        let horizon: f64 = e.required("T")?;
        positive("T", horizon)?;
        let p: f64 = e.required("p")?;
        if !(p.is_finite() && p >= 2.0) {
            return Err(MoplaError::config("p", format!("p must be ≥ 2 (got {p})")));
        }
        let basis_n: usize = e.required("basis.N")?;
        at_least("basis.N", basis_n, 1)?;

        let kind: MotionKind = e.or("motion.kind", MotionKind::Static)?;
        let motion = MotionFamily {
            kind,
            dim,
            amplitude: e.or("motion.a", 0.3)?,
            omega: e.or("motion.omega", 1.0)?,
            center: e.pair("motion.center", [0.5, 0.5], 0.5)?,
            velocity: e.pair("motion.c", [0.2, 0.0], 0.0)?,
            horizon,
        };

        let quad_order: Option<usize> = e.auto("quad.order")?;
        if quad_order == Some(0) {
            return Err(MoplaError::config("quad.order", "order must be >= 1"));
        }

        let d = OdeSettings::default();
        let ode = OdeSettings {
            method: e.or("ode.method", d.method)?,
            rtol: e.or("ode.rtol", d.rtol)?,
            atol: e.or("ode.atol", d.atol)?,
            stride: e.or("ode.stride", DEFAULT_STRIDE)?,
            substeps: e.or("ode.substeps", d.substeps)?,
            max_steps: e.or("ode.max_steps", d.max_steps)?,
        };
        ode.check()?;

        let u0 = InitialConfig {
            kind: e.or("problem.u0", InitialKind::Cosine)?,
            amplitude: e.or("problem.u0.amplitude", 1.0)?,
            k: e.or("problem.u0.k", 1.0)?,
            offset: e.or("problem.u0.offset", 0.0)?,
            center: e.pair("problem.u0.center", [0.5, 0.5], 0.5)?,
            width: e.or("problem.u0.width", 0.15)?,
        };
        if u0.kind == InitialKind::Mode && !(u0.k >= 1.0 && u0.k.fract() == 0.0) {
            return Err(MoplaError::config("problem.u0.k", "mode index must be an integer >= 1"));
        }
        if u0.kind == InitialKind::Bump {
            positive("problem.u0.width", u0.width)?;
        }
        let forcing = ForcingConfig {
            kind: e.or("problem.f", ForcingKind::Zero)?,
            amplitude: e.or("problem.f.amplitude", 1.0)?,
            omega: e.or("problem.f.omega", 1.0)?,
        };

        let diag = DiagConfig {
            checks: e.words("diag.checks", &IDENTITY_CHECKS),
            mass_tol: e.or("diag.mass_tol", 1e-7)?,
            energy_tol: e.or("diag.energy_tol", 1e-5)?,
            norm_tol: e.or("diag.norm_tol", 1e-10)?,
            weak_tol: e.or("diag.weak_tol", 1e-6)?,
            hien_tol: e.or("diag.hien_tol", 1e-3)?,
            pd_fraction: e.or("diag.pd_fraction", 0.9)?,
            pd_grid: e.or("diag.pd_grid", 64)?,
            t_grid: e.or("diag.t_grid", 16)?,
            probes: e.words("diag.probes", &PROBES),
            p_list: match e.take("diag.p_list") {
                Some(raw) if raw != "auto" => parse_list("diag.p_list", &raw)?,
                _ => Vec::new(),
            },
            vector_samples: e.or("diag.vector_samples", 100_000)?,
            vector_dim: e.or("diag.vector_dim", 3)?,
            function_samples: e.or("diag.function_samples", 10_000)?,
            probe_tol: e.or("diag.probe_tol", 1e-10)?,
            delta: e.or("diag.delta", 0.5)?,
            q: e.or("diag.q", 2.0)?,
            poincare_ratio: e.or("diag.poincare_ratio", 10.0)?,
            epsilon: e.or("diag.epsilon", 0.05)?,
            friedrichs_c: e.auto("diag.friedrichs_c")?,
            fine_n: e.or("diag.fine_n", 16)?,
            friedrichs_samples: e.or("diag.friedrichs_samples", 200)?,
        };
        for c in &diag.checks {
            if !IDENTITY_CHECKS.contains(&c.as_str()) {
                return Err(MoplaError::config(
                    "diag.checks",
                    format!("`{c}` is not one of {}", IDENTITY_CHECKS.join(", ")),
                ));
            }
        }
        for c in &diag.probes {
            if !PROBES.contains(&c.as_str()) {
                return Err(MoplaError::config("diag.probes", format!("`{c}` is not one of {}", PROBES.join(", "))));
            }
        }
        for (key, v) in [
            ("diag.mass_tol", diag.mass_tol),
            ("diag.energy_tol", diag.energy_tol),
            ("diag.norm_tol", diag.norm_tol),
            ("diag.weak_tol", diag.weak_tol),
            ("diag.hien_tol", diag.hien_tol),
            ("diag.pd_fraction", diag.pd_fraction),
            ("diag.probe_tol", diag.probe_tol),
            ("diag.delta", diag.delta),
            ("diag.poincare_ratio", diag.poincare_ratio),
            ("diag.epsilon", diag.epsilon),
        ] {
            positive(key, v)?;
        }
        if let Some(c) = diag.friedrichs_c {
            positive("diag.friedrichs_c", c)?;
        }
        if !(diag.q >= 1.0 && diag.q.is_finite()) {
            return Err(MoplaError::config("diag.q", "must be >= 1"));
        }
        for &pp in &diag.p_list {
            if !(pp.is_finite() && pp >= 2.0) {
                return Err(MoplaError::config("diag.p_list", format!("p must be ≥ 2 (got {pp})")));
            }
        }
        for (key, v, min) in [
            ("diag.pd_grid", diag.pd_grid, 1),
            ("diag.t_grid", diag.t_grid, 1),
            ("diag.vector_samples", diag.vector_samples, 1),
            ("diag.vector_dim", diag.vector_dim, 1),
            ("diag.function_samples", diag.function_samples, 1),
            ("diag.fine_n", diag.fine_n, 2),
            ("diag.friedrichs_samples", diag.friedrichs_samples, 1),
        ] {
            at_least(key, v, min)?;
        }

        let study = StudyConfig {
            refine_n_list: e.list("refine.n_list", vec![4, 8, 16])?,
            refine_reference_n: e.or("refine.reference_n", 24)?,
            stability_deltas: e.list("stability.deltas", vec![1e-2, 1e-3, 1e-4])?,
            stability_factor: e.or("stability.factor", 2.0)?,
            mms_rate: e.or("mms.rate", 1.0)?,
            mms_amplitude: e.or("mms.amplitude", 1.0)?,
            mms_n_list: e.list("mms.n_list", vec![4, 8, 16])?,
            mms_tol: e.or("mms.tol", 1e-4)?,
            mms_ratio: e.or("mms.ratio", 0.5)?,
        };
        for &dlt in &study.stability_deltas {
            positive("stability.deltas", dlt)?;
        }
        for (key, v) in [
            ("stability.factor", study.stability_factor),
            ("mms.tol", study.mms_tol),
            ("mms.ratio", study.mms_ratio),
        ] {
            positive(key, v)?;
        }
        if !study.mms_rate.is_finite() || !study.mms_amplitude.is_finite() {
            return Err(MoplaError::config("mms", "rate and amplitude must be finite"));
        }
        if study.mms_n_list.is_empty() || study.mms_n_list.contains(&0) {
            return Err(MoplaError::config("mms.n_list", "needs at least one N >= 1"));
        }

        let motion_check = MotionCheckConfig {
            samples: e.or("motion_check.samples", 32)?,
            time_samples: e.or("motion_check.time_samples", 32)?,
            h: e.or("motion_check.h", 1e-5)?,
            tol: e.or("motion_check.tol", 1e-6)?,
        };
        at_least("motion_check.samples", motion_check.samples, 2)?;
        at_least("motion_check.time_samples", motion_check.time_samples, 1)?;
        positive("motion_check.h", motion_check.h)?;
        positive("motion_check.tol", motion_check.tol)?;

        let seed: Option<u64> = e.auto("seed")?;
        let output_dir: Option<PathBuf> = e.take("output.dir").filter(|s| !s.is_empty()).map(PathBuf::from);

        if let Some(key) = e.map.keys().next() {
            return Err(MoplaError::UnknownKey(key.clone()));
        }

        let config = ScenarioConfig {
            dim,
            horizon,
            p,
            motion,
            basis_n,
            quad_order,
            ode,
            u0,
            forcing,
            diag,
            study,
            motion_check,
            seed,
            output_dir,
        };
        // Surfaces motion constraints such as |a| < 1 at parse time.
        crate::geometry::DomainMotion::from_config(config.motion)?;
        Ok(config)
    }

    /// Conjugate exponent `p' = p/(p−1)`.
    pub fn conjugate_exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn problem(&self) -> Result<ProblemData> {
        ProblemData::new(self.p, self.forcing_data(), self.initial_data())
    }

    pub fn initial_data(&self) -> InitialDatum {
        let u = &self.u0;
        match u.kind {
            InitialKind::Zero => InitialDatum::Zero,
            InitialKind::Constant => InitialDatum::Constant(u.amplitude),
            InitialKind::Cosine => InitialDatum::Cosine {
                amplitude: u.amplitude,
                wavenumber: u.k,
                offset: u.offset,
            },
            InitialKind::Mode => InitialDatum::Mode {
                amplitude: u.amplitude,
                index: u.k as usize,
            },
            InitialKind::Bump => InitialDatum::Bump {
                amplitude: u.amplitude,
                center: u.center,
                width: u.width,
            },
        }
    }

    pub fn forcing_data(&self) -> Forcing {
        let f = &self.forcing;
        match f.kind {
            ForcingKind::Zero => Forcing::Zero,
            ForcingKind::Constant => Forcing::Constant(f.amplitude),
            ForcingKind::Oscillating => Forcing::Oscillating {
                amplitude: f.amplitude,
                omega: f.omega,
            },
        }
    }

    pub fn manufactured(&self) -> Manufactured {
        Manufactured {
            p: self.p,
            amplitude: self.study.mms_amplitude,
            rate: self.study.mms_rate,
        }
    }

    /// Exponents for the probe suites.
    pub fn probe_exponents(&self) -> Vec<f64> {
        if self.diag.p_list.is_empty() {
            vec![self.p]
        } else {
            self.diag.p_list.clone()
        }
    }

    /// Every key with its resolved value, in a form [`ScenarioConfig::parse`] accepts.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let num = |x: f64| format!("{x:?}");
        let pair = |v: [f64; 2]| format!("{:?}, {:?}", v[0], v[1]);
        let nums = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let ints = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");

        kv("dim", self.dim.to_string());
        kv("T", num(self.horizon));
        kv("p", num(self.p));
        kv("motion.kind", self.motion.kind.to_string());
        kv("motion.a", num(self.motion.amplitude));
        kv("motion.omega", num(self.motion.omega));
        kv("motion.center", pair(self.motion.center));
        kv("motion.c", pair(self.motion.velocity));
        kv("basis.N", self.basis_n.to_string());
        kv("quad.order", self.quad_order.map_or("auto".into(), |o| o.to_string()));
        kv("ode.method", self.ode.method.to_string());
        kv("ode.rtol", num(self.ode.rtol));
        kv("ode.atol", num(self.ode.atol));
        kv("ode.stride", self.ode.stride.to_string());
        kv("ode.substeps", self.ode.substeps.to_string());
        kv("ode.max_steps", self.ode.max_steps.to_string());
        kv("problem.u0", self.u0.kind.name().into());
        kv("problem.u0.amplitude", num(self.u0.amplitude));
        kv("problem.u0.k", num(self.u0.k));
        kv("problem.u0.offset", num(self.u0.offset));
        kv("problem.u0.center", pair(self.u0.center));
        kv("problem.u0.width", num(self.u0.width));
        kv("problem.f", self.forcing.kind.name().into());
        kv("problem.f.amplitude", num(self.forcing.amplitude));
        kv("problem.f.omega", num(self.forcing.omega));
        let d = &self.diag;
        kv("diag.checks", d.checks.join(", "));
        kv("diag.mass_tol", num(d.mass_tol));
        kv("diag.energy_tol", num(d.energy_tol));
        kv("diag.norm_tol", num(d.norm_tol));
        kv("diag.weak_tol", num(d.weak_tol));
        kv("diag.hien_tol", num(d.hien_tol));
        kv("diag.pd_fraction", num(d.pd_fraction));
        kv("diag.pd_grid", d.pd_grid.to_string());
        kv("diag.t_grid", d.t_grid.to_string());
        kv("diag.probes", d.probes.join(", "));
        kv("diag.p_list", if d.p_list.is_empty() { "auto".into() } else { nums(&d.p_list) });
        kv("diag.vector_samples", d.vector_samples.to_string());
        kv("diag.vector_dim", d.vector_dim.to_string());
        kv("diag.function_samples", d.function_samples.to_string());
        kv("diag.probe_tol", num(d.probe_tol));
        kv("diag.delta", num(d.delta));
        kv("diag.q", num(d.q));
        kv("diag.poincare_ratio", num(d.poincare_ratio));
        kv("diag.epsilon", num(d.epsilon));
        kv("diag.friedrichs_c", d.friedrichs_c.map_or("auto".into(), num));
        kv("diag.fine_n", d.fine_n.to_string());
        kv("diag.friedrichs_samples", d.friedrichs_samples.to_string());
        let st = &self.study;
        kv("refine.n_list", ints(&st.refine_n_list));
        kv("refine.reference_n", st.refine_reference_n.to_string());
        kv("stability.deltas", nums(&st.stability_deltas));
        kv("stability.factor", num(st.stability_factor));
        kv("mms.rate", num(st.mms_rate));
        kv("mms.amplitude", num(st.mms_amplitude));
        kv("mms.n_list", ints(&st.mms_n_list));
        kv("mms.tol", num(st.mms_tol));
        kv("mms.ratio", num(st.mms_ratio));
        let mc = &self.motion_check;
        kv("motion_check.samples", mc.samples.to_string());
        kv("motion_check.time_samples", mc.time_samples.to_string());
        kv("motion_check.h", num(mc.h));
        kv("motion_check.tol", num(mc.tol));
        kv("seed", self.seed.map_or("auto".into(), |s| s.to_string()));
        if let Some(dir) = &self.output_dir {
            kv("output.dir", dir.display().to_string());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "dim = 1\nT = 1\np = 3\nmotion.kind = static\nbasis.N = 8\n";

    #[test]
    fn minimal_config_fills_defaults() {
        let c = ScenarioConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.basis_n, 8);
        assert_eq!(c.motion.kind, MotionKind::Static);
        assert_eq!(c.ode, OdeSettings { stride: DEFAULT_STRIDE, ..OdeSettings::default() });
        assert_eq!(c.diag.mass_tol, 1e-7);
        assert_eq!(c.seed, None);
        assert_eq!(c.quad_order, None);
        assert!((c.conjugate_exponent() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_p() {
        let err = ScenarioConfig::parse(&MINIMAL.replace("p = 3", "p = 1.5")).unwrap_err();
        assert!(err.to_string().contains("p must be ≥ 2"), "{err}");
    }

    #[test]
    fn rejects_unknown_key() {
        let err = ScenarioConfig::parse(&MINIMAL.replace("motion.kind", "motoin.kind")).unwrap_err();
        assert!(matches!(err, MoplaError::UnknownKey(ref k) if k == "motoin.kind"), "{err}");
    }

    #[test]
    fn rejects_bad_values() {
        for (edit, field) in [
            ("T = 1", "T = -1"),
            ("basis.N = 8", "basis.N = 0"),
            ("basis.N = 8", "basis.N = 8\ndiag.mass_tol = 0"),
            ("basis.N = 8", "basis.N = 8\nquad.order = 0"),
            ("motion.kind = static", "motion.kind = dilation\nmotion.a = 1.1"),
            ("basis.N = 8", "basis.N = 8\nbasis.N = 9"),
            ("basis.N = 8", "basis.N = 8\nproblem.u0 = mode\nproblem.u0.k = 1.5"),
            ("basis.N = 8", "basis.N = 8\ndiag.checks = mass, energie"),
        ] {
            let text = MINIMAL.replace(edit, field);
            assert!(matches!(ScenarioConfig::parse(&text), Err(MoplaError::Config { .. })), "{field}");
        }
        assert!(ScenarioConfig::parse("dim = 1\np = 3\nbasis.N = 4").is_err());
    }

    #[test]
    fn comments_and_lists() {
        let text = format!(
            "{MINIMAL}# full line\nrefine.n_list = 2, 4 # trailing\nmotion.center = 0.25\nseed = 42\ndiag.p_list = 2.5,3,4\n"
        );
        let c = ScenarioConfig::parse(&text).unwrap();
        assert_eq!(c.study.refine_n_list, vec![2, 4]);
        assert_eq!(c.motion.center, [0.25, 0.5]);
        assert_eq!(c.seed, Some(42));
        assert_eq!(c.probe_exponents(), vec![2.5, 3.0, 4.0]);
    }

    #[test]
    fn echo_round_trips() {
        let text = format!(
            "{MINIMAL}ode.rtol = 1e-10\nmotion.a = 0.1\nproblem.u0 = bump\nproblem.f = oscillating\nseed = 7\ndiag.friedrichs_c = 3.5\nquad.order = 20\noutput.dir = out/run\n"
        );
        let c = ScenarioConfig::parse(&text).unwrap();
        let again = ScenarioConfig::parse(&c.to_text()).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.to_text(), c.to_text());
    }
}
