//! Run configuration: flat key=value text, one pair per line, `#` comments,
//! dotted names for nesting. Identical configurations (and seeds) reproduce
//! bit-identical outputs.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{meshgen, off, Domain, ScalarField, TorsionData};
use crate::flow::{FlowConfig, Integrator};
use crate::io::snapshot;
use crate::presets;

#[derive(Clone, Debug)]
pub enum InitialU {
    Zero,
    Random { amplitude: f64 },
    Snapshot { path: PathBuf },
}

#[derive(Clone, Debug)]
pub enum TorsionSpec {
    None,
    OneFormTrig { kx: i64, ky: i64, a: f64, phase: f64 },
    OneFormRandom { amplitude: f64 },
    OneFormConstant { cx: f64, cy: f64 },
    DivergenceSnapshot { path: PathBuf },
    DivergenceHeight { amplitude: f64, axis: usize },
    DivergenceZonal { amplitude: f64, axis: usize },
    DivergenceRandom { amplitude: f64 },
}

#[derive(Clone, Debug)]
pub enum DomainSpec {
    Grid { nx: usize, ny: usize, lx: f64, ly: f64 },
    MeshPath { path: PathBuf },
    Icosphere { subdivisions: u32 },
    TorusMesh { nu: usize, nv: usize, major: f64, minor: f64 },
    Genus2 { resolution: usize },
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub initial_u: InitialU,
    pub torsion: TorsionSpec,
    pub flow: FlowConfig,
    pub outputs: PathBuf,
    pub seed: u64,
    /// Optional exact volume normalization of the initial state.
    pub target_volume: Option<f64>,
    /// Convergence tolerance of the hyperbolic oracle.
    pub oracle_tol: f64,
}

impl RunConfig {
    /// Parse from text. Unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if pairs.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
        }
        Self::from_pairs(pairs)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        // Relative paths resolve against the config file location.
        if let Some(parent) = path.parent() {
            config.rebase(parent);
        }
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        if let DomainSpec::MeshPath { path } = &mut self.domain {
            rebase(path);
        }
        if let InitialU::Snapshot { path } = &mut self.initial_u {
            rebase(path);
        }
        if let TorsionSpec::DivergenceSnapshot { path } = &mut self.torsion {
            rebase(path);
        }
        rebase(&mut self.outputs);
    }

    fn from_pairs(pairs: BTreeMap<String, String>) -> Result<Self> {
        let mut used: HashSet<String> = HashSet::new();
        let get = |key: &str, used: &mut HashSet<String>| -> Option<String> {
            used.insert(key.to_string());
            pairs.get(key).cloned()
        };
        let parse_f64 = |key: &str, v: String| -> Result<f64> {
            v.parse()
                .map_err(|e| Error::Config(format!("key '{key}': bad number '{v}' ({e})")))
        };
        let parse_usize = |key: &str, v: String| -> Result<usize> {
            v.parse()
                .map_err(|e| Error::Config(format!("key '{key}': bad integer '{v}' ({e})")))
        };
        let parse_i64 = |key: &str, v: String| -> Result<i64> {
            v.parse()
                .map_err(|e| Error::Config(format!("key '{key}': bad integer '{v}' ({e})")))
        };

        let backend = get("backend", &mut used)
            .ok_or_else(|| Error::Config("missing key 'backend'".into()))?;
        let domain = match backend.as_str() {
            "grid" => {
                let nx = parse_usize("grid.nx", get("grid.nx", &mut used).unwrap_or("64".into()))?;
                let ny = parse_usize("grid.ny", get("grid.ny", &mut used).unwrap_or("64".into()))?;
                let lx = parse_f64(
                    "grid.lx",
                    get("grid.lx", &mut used).unwrap_or((2.0 * PI).to_string()),
                )?;
                let ly = parse_f64(
                    "grid.ly",
                    get("grid.ly", &mut used).unwrap_or((2.0 * PI).to_string()),
                )?;
                DomainSpec::Grid { nx, ny, lx, ly }
            }
            "mesh" => {
                let source = get("mesh.source", &mut used).unwrap_or("path".into());
                match source.as_str() {
                    "path" => {
                        let path = get("mesh.path", &mut used).ok_or_else(|| {
                            Error::Config("mesh.source=path requires mesh.path".into())
                        })?;
                        DomainSpec::MeshPath { path: path.into() }
                    }
                    "icosphere" => DomainSpec::Icosphere {
                        subdivisions: parse_usize(
                            "mesh.subdivisions",
                            get("mesh.subdivisions", &mut used).unwrap_or("4".into()),
                        )? as u32,
                    },
                    "torus" => DomainSpec::TorusMesh {
                        nu: parse_usize("mesh.nu", get("mesh.nu", &mut used).unwrap_or("48".into()))?,
                        nv: parse_usize("mesh.nv", get("mesh.nv", &mut used).unwrap_or("24".into()))?,
                        major: parse_f64(
                            "mesh.major",
                            get("mesh.major", &mut used).unwrap_or("2".into()),
                        )?,
                        minor: parse_f64(
                            "mesh.minor",
                            get("mesh.minor", &mut used).unwrap_or("1".into()),
                        )?,
                    },
                    "genus2" => DomainSpec::Genus2 {
                        resolution: parse_usize(
                            "mesh.resolution",
                            get("mesh.resolution", &mut used).unwrap_or("96".into()),
                        )?,
                    },
                    other => {
                        return Err(Error::Config(format!("unknown mesh.source '{other}'")))
                    }
                }
            }
            other => return Err(Error::Config(format!("unknown backend '{other}'"))),
        };

        let initial_u = match get("initial_u", &mut used).unwrap_or("zero".into()).as_str() {
            "zero" => InitialU::Zero,
            "random" => InitialU::Random {
                amplitude: parse_f64(
                    "initial_u.amplitude",
                    get("initial_u.amplitude", &mut used).unwrap_or("0.1".into()),
                )?,
            },
            "snapshot" => InitialU::Snapshot {
                path: get("initial_u.path", &mut used)
                    .ok_or_else(|| Error::Config("initial_u=snapshot requires initial_u.path".into()))?
                    .into(),
            },
            other => return Err(Error::Config(format!("unknown initial_u '{other}'"))),
        };

        let torsion = match get("torsion", &mut used).unwrap_or("none".into()).as_str() {
            "none" => TorsionSpec::None,
            "oneform" => {
                match get("torsion.preset", &mut used).unwrap_or("random".into()).as_str() {
                    "trig" => TorsionSpec::OneFormTrig {
                        kx: parse_i64(
                            "torsion.kx",
                            get("torsion.kx", &mut used).unwrap_or("1".into()),
                        )?,
                        ky: parse_i64(
                            "torsion.ky",
                            get("torsion.ky", &mut used).unwrap_or("0".into()),
                        )?,
                        a: parse_f64("torsion.a", get("torsion.a", &mut used).unwrap_or("0.5".into()))?,
                        phase: parse_f64(
                            "torsion.phase",
                            get("torsion.phase", &mut used).unwrap_or("0".into()),
                        )?,
                    },
                    "random" => TorsionSpec::OneFormRandom {
                        amplitude: parse_f64(
                            "torsion.amplitude",
                            get("torsion.amplitude", &mut used).unwrap_or("0.5".into()),
                        )?,
                    },
                    "constant" => TorsionSpec::OneFormConstant {
                        cx: parse_f64(
                            "torsion.cx",
                            get("torsion.cx", &mut used).unwrap_or("1".into()),
                        )?,
                        cy: parse_f64(
                            "torsion.cy",
                            get("torsion.cy", &mut used).unwrap_or("0".into()),
                        )?,
                    },
                    other => {
                        return Err(Error::Config(format!("unknown torsion.preset '{other}'")))
                    }
                }
            }
            "d0" => {
                match get("torsion.preset", &mut used).unwrap_or("snapshot".into()).as_str() {
                    "snapshot" => TorsionSpec::DivergenceSnapshot {
                        path: get("torsion.path", &mut used)
                            .ok_or_else(|| {
                                Error::Config("torsion.preset=snapshot requires torsion.path".into())
                            })?
                            .into(),
                    },
                    "height" => TorsionSpec::DivergenceHeight {
                        amplitude: parse_f64(
                            "torsion.amplitude",
                            get("torsion.amplitude", &mut used).unwrap_or("0.5".into()),
                        )?,
                        axis: parse_usize(
                            "torsion.axis",
                            get("torsion.axis", &mut used).unwrap_or("2".into()),
                        )?,
                    },
                    "zonal" => TorsionSpec::DivergenceZonal {
                        amplitude: parse_f64(
                            "torsion.amplitude",
                            get("torsion.amplitude", &mut used).unwrap_or("0.5".into()),
                        )?,
                        axis: parse_usize(
                            "torsion.axis",
                            get("torsion.axis", &mut used).unwrap_or("2".into()),
                        )?,
                    },
                    "random" => TorsionSpec::DivergenceRandom {
                        amplitude: parse_f64(
                            "torsion.amplitude",
                            get("torsion.amplitude", &mut used).unwrap_or("0.5".into()),
                        )?,
                    },
                    other => {
                        return Err(Error::Config(format!("unknown torsion.preset '{other}'")))
                    }
                }
            }
            other => return Err(Error::Config(format!("unknown torsion '{other}'"))),
        };

        let integrator = match get("flow.integrator", &mut used)
            .unwrap_or("rk4".into())
            .as_str()
        {
            "rk4" | "explicit-rk4" => Integrator::ExplicitRk4,
            "imex" => Integrator::Imex,
            other => return Err(Error::Config(format!("unknown flow.integrator '{other}'"))),
        };
        let flow = FlowConfig {
            dt_initial: parse_f64(
                "flow.dt_initial",
                get("flow.dt_initial", &mut used).unwrap_or("1e-3".into()),
            )?,
            dt_safety: parse_f64(
                "flow.dt_safety",
                get("flow.dt_safety", &mut used).unwrap_or("0.9".into()),
            )?,
            t_max: parse_f64(
                "flow.t_max",
                get("flow.t_max", &mut used).unwrap_or("50".into()),
            )?,
            stop_tol: parse_f64(
                "flow.stop_tol",
                get("flow.stop_tol", &mut used).unwrap_or("1e-9".into()),
            )?,
            sample_interval: parse_f64(
                "flow.sample_interval",
                get("flow.sample_interval", &mut used).unwrap_or("0.1".into()),
            )?,
            integrator,
        };
        flow.validate()?;

        let outputs: PathBuf = get("outputs", &mut used).unwrap_or("out".into()).into();
        let seed: u64 = {
            let v = get("seed", &mut used).unwrap_or("1".into());
            v.parse()
                .map_err(|e| Error::Config(format!("key 'seed': bad integer '{v}' ({e})")))?
        };
        let target_volume = match get("target_volume", &mut used) {
            Some(v) => Some(parse_f64("target_volume", v)?),
            None => None,
        };
        let oracle_tol = parse_f64(
            "oracle.tol",
            get("oracle.tol", &mut used).unwrap_or("1e-8".into()),
        )?;

        for key in pairs.keys() {
            if !used.contains(key) {
                return Err(Error::Config(format!("unknown key '{key}'")));
            }
        }

        Ok(RunConfig {
            domain,
            initial_u,
            torsion,
            flow,
            outputs,
            seed,
            target_volume,
            oracle_tol,
        })
    }

    /// Materialize the domain.
    pub fn build_domain(&self) -> Result<Arc<Domain>> {
        let domain = match &self.domain {
            DomainSpec::Grid { nx, ny, lx, ly } => Domain::grid(*nx, *ny, *lx, *ly)?,
            DomainSpec::MeshPath { path } => off::read_off(path)?,
            DomainSpec::Icosphere { subdivisions } => meshgen::icosphere(*subdivisions)?,
            DomainSpec::TorusMesh { nu, nv, major, minor } => {
                meshgen::torus_mesh(*nu, *nv, *major, *minor)?
            }
            DomainSpec::Genus2 { resolution } => meshgen::genus2_mesh(*resolution)?,
        };
        Ok(Arc::new(domain))
    }

    /// Materialize the torsion data. Torsion presets draw from the stream
    /// seeded at seed+1 so u and torsion stay independent.
    pub fn build_torsion(&self, domain: &Arc<Domain>) -> Result<Arc<TorsionData>> {
        let data = match &self.torsion {
            TorsionSpec::None => TorsionData::none(domain.clone()),
            TorsionSpec::OneFormTrig { kx, ky, a, phase } => TorsionData::from_one_form(
                presets::trig_one_form(domain, *kx, *ky, *a, *phase)?,
            )?,
            TorsionSpec::OneFormRandom { amplitude } => TorsionData::from_one_form(
                presets::random_one_form(domain, self.seed.wrapping_add(1), *amplitude)?,
            )?,
            TorsionSpec::OneFormConstant { cx, cy } => {
                TorsionData::from_one_form(presets::constant_one_form(domain, *cx, *cy)?)?
            }
            TorsionSpec::DivergenceSnapshot { path } => {
                let field = snapshot::read_field(path, domain)?;
                TorsionData::from_divergence(field)?
            }
            TorsionSpec::DivergenceHeight { amplitude, axis } => {
                presets::height_divergence(domain, *amplitude, *axis)?
            }
            TorsionSpec::DivergenceZonal { amplitude, axis } => {
                presets::zonal_divergence(domain, *amplitude, *axis)?
            }
            TorsionSpec::DivergenceRandom { amplitude } => {
                presets::random_mesh_divergence(domain, self.seed.wrapping_add(1), *amplitude)?
            }
        };
        Ok(Arc::new(data))
    }

    /// Materialize the initial conformal state (with optional volume
    /// normalization).
    pub fn build_initial_state(&self) -> Result<crate::fields::ConformalState> {
        let domain = self.build_domain()?;
        let torsion = self.build_torsion(&domain)?;
        let u = match &self.initial_u {
            InitialU::Zero => ScalarField::zeros(domain.clone()),
            InitialU::Random { amplitude } => presets::random_field(&domain, self.seed, *amplitude)?,
            InitialU::Snapshot { path } => snapshot::read_field(path, &domain)?,
        };
        let state = crate::fields::ConformalState::new(u, torsion, 0.0)?;
        match self.target_volume {
            Some(target) => {
                let shift = (target / state.volume()).ln();
                let u = state.u().shift(shift);
                crate::fields::ConformalState::new(u, state.torsion().clone(), 0.0)
            }
            None => Ok(state),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_grid_config() {
        let cfg = RunConfig::parse(
            "backend=grid\ngrid.nx=32\ngrid.ny=32\n# comment\nflow.t_max=1\nseed=9\n",
        )
        .unwrap();
        assert!(matches!(cfg.domain, DomainSpec::Grid { nx: 32, ny: 32, .. }));
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = RunConfig::parse("backend=grid\nbogus=1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(RunConfig::parse("backend grid\n").is_err());
    }

    #[test]
    fn odd_grid_dimension_fails_at_domain_build() {
        let cfg = RunConfig::parse("backend=grid\ngrid.nx=33\ngrid.ny=32\n").unwrap();
        assert!(cfg.build_domain().is_err());
    }
}
