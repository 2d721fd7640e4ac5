use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use skinwalk::floquet::Integration;
use skinwalk::lattice::LatticeSpec;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    SingleWalk,
    PairWalk,
    LyapunovSweep,
    Spectra,
    Gbz,
    EntropyCurve,
    Table1,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SingleWalk => "single_walk",
            Experiment::PairWalk => "pair_walk",
            Experiment::LyapunovSweep => "lyapunov_sweep",
            Experiment::Spectra => "spectra",
            Experiment::Gbz => "gbz",
            Experiment::EntropyCurve => "entropy_curve",
            Experiment::Table1 => "table1",
        }
    }

    /// Which figure-style dataset the experiment produces.
    pub fn figure(self) -> &'static str {
        match self {
            Experiment::SingleWalk => "single-photon intensity panels at successive periods",
            Experiment::PairWalk => "two-photon coincidence panels at successive periods",
            Experiment::LyapunovSweep => "Lyapunov exponent versus geometric phase",
            Experiment::Spectra => "PBC loops and OBC spectra",
            Experiment::Gbz => "generalized Brillouin zone on the complex β plane",
            Experiment::EntropyCurve => "second-order Rényi entropy versus period",
            Experiment::Table1 => "hopping table of the ring effective Hamiltonian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Tolerances an experiment may loosen or tighten.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub norm_drift: f64,
    pub boundary_ratio: f64,
    pub root_pair: f64,
    pub circularity: f64,
}

impl Default for ToleranceOverrides {
    fn default() -> Self {
        Self {
            norm_drift: 1e-8,
            boundary_ratio: skinwalk::floquet::BOUNDARY_TOLERANCE,
            root_pair: skinwalk::nonbloch::ROOT_PAIR_TOLERANCE,
            circularity: skinwalk::nonbloch::CIRCULARITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub lattice: LatticeSpec,
    /// 1-based straight-waveguide indices: one site for single-photon runs,
    /// two for pair runs.
    pub injection: Vec<usize>,
    pub periods: Vec<usize>,
    /// Geometric phases to run; empty means the lattice's own phase.
    #[serde(deserialize_with = "skinwalk::angle::deserialize_list")]
    pub phi: Vec<f64>,
    pub steps_per_period: usize,
    /// Ring size for bulk hoppings.
    pub n_ring: usize,
    /// Lattice size for OBC spectra and GBZ energies.
    pub obc_sites: usize,
    pub orders: (i32, i32),
    pub pbc_samples: usize,
    pub tolerances: ToleranceOverrides,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::for_experiment(Experiment::SingleWalk)
    }
}

impl RunConfig {
    /// Defaults mirroring the standard protocol of each experiment.
    pub fn for_experiment(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            lattice: LatticeSpec::default(),
            injection: vec![6],
            periods: vec![3, 4, 5, 6],
            phi: vec![0.0, PI / 2.0],
            steps_per_period: Integration::default().steps_per_period,
            n_ring: 30,
            obc_sites: skinwalk::nonbloch::OBC_SITES,
            orders: skinwalk::nonbloch::DEFAULT_ORDERS,
            pbc_samples: 400,
            tolerances: ToleranceOverrides::default(),
        };
        match experiment {
            Experiment::SingleWalk => base,
            Experiment::PairWalk => Self {
                injection: vec![5, 6],
                ..base
            },
            Experiment::LyapunovSweep => Self {
                lattice: LatticeSpec::default().with_sites(skinwalk::floquet::LYAPUNOV_SITES),
                injection: vec![skinwalk::floquet::LYAPUNOV_SITES / 2 + 1],
                periods: vec![20, 40],
                phi: (0..5).map(|i| i as f64 * PI / 8.0).collect(),
                ..base
            },
            Experiment::Spectra | Experiment::Gbz => base,
            Experiment::EntropyCurve => Self {
                injection: vec![5, 6],
                periods: (1..=40).collect(),
                phi: vec![0.0, PI / 4.0, PI / 2.0],
                ..base
            },
            Experiment::Table1 => Self {
                lattice: LatticeSpec::default()
                    .with_sites(10)
                    .with_boundary(skinwalk::lattice::Boundary::Ring),
                phi: vec![0.0],
                ..base
            },
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
        Self::from_toml_str(&text)
    }

    /// Defaults of `experiment` overlaid with the tables of `text`. A config
    /// naming another experiment is rejected.
    pub fn resolve(experiment: Experiment, text: Option<&str>) -> Result<Self> {
        let defaults = Self::for_experiment(experiment);
        let Some(text) = text else {
            defaults.validate()?;
            return Ok(defaults);
        };
        let user: toml::Table = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        if let Some(named) = user.get("experiment") {
            if named.as_str() != Some(experiment.name()) {
                return Err(HarnessError::Config(format!(
                    "config names experiment {named}, but the command runs {}",
                    experiment.name()
                )));
            }
        }
        let mut base = toml::Table::try_from(&defaults).map_err(|e| HarnessError::Config(e.to_string()))?;
        merge(&mut base, user);
        let cfg: Self = base.try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn integration(&self) -> Integration {
        Integration {
            steps_per_period: self.steps_per_period,
            norm_tolerance: self.tolerances.norm_drift,
        }
    }

    /// Phases to run, falling back to the lattice phase.
    pub fn phases(&self) -> Vec<f64> {
        if self.phi.is_empty() {
            vec![self.lattice.phase_phi]
        } else {
            self.phi.clone()
        }
    }

    /// Injection sites converted to 0-based ordinals.
    pub fn injection_ordinals(&self) -> Vec<usize> {
        self.injection.iter().map(|&s| s - 1).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        self.lattice
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.steps_per_period == 0 {
            return bad("steps_per_period must be positive".into());
        }
        let n = self.lattice.n_straight;
        if let Some(&s) = self.injection.iter().find(|&&s| s == 0 || s > n) {
            return bad(format!("injection site {s} outside 1..={n}"));
        }
        let needed = match self.experiment {
            Experiment::SingleWalk | Experiment::LyapunovSweep => 1,
            Experiment::PairWalk | Experiment::EntropyCurve => 2,
            _ => 0,
        };
        if self.injection.len() < needed {
            return bad(format!("{} needs {needed} injection site(s)", self.experiment.name()));
        }
        if self.experiment == Experiment::LyapunovSweep {
            match self.periods.as_slice() {
                [k1, k2] if k2 > k1 => {}
                _ => return bad("lyapunov_sweep needs periods = [k1, k2] with k2 > k1".into()),
            }
        }
        if self.phi.iter().any(|p| !p.is_finite()) {
            return bad("non-finite phase".into());
        }
        if self.orders.0 > -1 || self.orders.1 < 1 {
            return bad("orders must span at least [-1, 1]".into());
        }
        if self.pbc_samples < 3 || self.obc_sites < 2 || self.n_ring < 2 {
            return bad("pbc_samples ≥ 3, obc_sites ≥ 2 and n_ring ≥ 2 are required".into());
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}
