//! Scenario configuration: one TOML file, optionally layered on others
//! through `include = ["base.toml", ...]`.
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freight::FreightSpec;
use crate::mesosim::{LearningOptions, SupplySpec};
use crate::netgraph::GridSpec;
use crate::pax::PaxUtilitySpec;
use crate::pricing::{DesignSpec, PeriodSearch};
use crate::synthpop::{CitySpec, FloorSolverOptions, PopulationSpec};
use crate::welfare::{EmissionFactors, SurplusParams, TlcParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignConfig {
    pub periods: PeriodSearch,
    /// Zones whose peak travel time index reaches this are tolled.
    pub tti_threshold: f64,
    /// Use the network's configured toll area when no zone is congested.
    pub fallback_to_configured_area: bool,
    pub rates: DesignSpec,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            periods: PeriodSearch::default(),
            tti_threshold: 1.2,
            fallback_to_configured_area: true,
            rates: DesignSpec::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WelfareConfig {
    pub surplus: SurplusParams,
    pub tlc: TlcParams,
    pub emissions: EmissionFactors,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub network: GridSpec,
    pub city: CitySpec,
    pub population: PopulationSpec,
    pub floor: FloorSolverOptions,
    pub pax: PaxUtilitySpec,
    pub freight: FreightSpec,
    pub supply: SupplySpec,
    pub learning: LearningOptions,
    pub design: DesignConfig,
    pub welfare: WelfareConfig,
    /// Worker threads for parallel stages; 0 lets the runtime decide.
    pub threads: usize,
    pub emit_trajectories: bool,
    /// Files this one was layered on; informational after loading.
    pub include: Vec<PathBuf>,
}

/// The desk city: a 10 000-person sample on a 20×20 street grid whose
/// supply is scaled to the sample, so the centre congests at the peaks.
impl Default for ScenarioConfig {
    fn default() -> Self {
        let mut network = GridSpec {
            arterial_every: 0,
            ..GridSpec::default()
        };
        network.street.capacity_vph = 60.0;
        network.street.jam_density_vpkm = 24.0;
        ScenarioConfig {
            name: "desk".into(),
            seed: 1,
            network,
            city: CitySpec {
                employment_decay_km: 2.5,
                ..CitySpec::default()
            },
            population: PopulationSpec::default(),
            floor: FloorSolverOptions::default(),
            pax: PaxUtilitySpec::default(),
            freight: FreightSpec::default(),
            supply: SupplySpec::default(),
            learning: LearningOptions {
                iterations: 15,
                extend_until: None,
                max_iterations: 30,
            },
            design: DesignConfig::default(),
            welfare: WelfareConfig::default(),
            threads: 0,
            emit_trajectories: false,
            include: Vec::new(),
        }
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

fn load_layered(path: &Path, depth: usize) -> Result<toml::Value> {
    if depth > 8 {
        return Err(Error::Config("config includes nest too deeply".into()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
    let mut own: toml::Value = toml::from_str(&text).map_err(|e| Error::Config(format!("parsing {}: {e}", path.display())))?;
    let includes: Vec<PathBuf> = match own.get("include") {
        Some(toml::Value::Array(a)) => a
            .iter()
            .map(|v| {
                v.as_str()
                    .map(PathBuf::from)
                    .ok_or_else(|| Error::Config("include entries must be paths".into()))
            })
            .collect::<Result<_>>()?,
        Some(_) => return Err(Error::Config("include must be an array of paths".into())),
        None => Vec::new(),
    };
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut acc = toml::Value::Table(Default::default());
    for inc in &includes {
        let p = if inc.is_absolute() { inc.clone() } else { dir.join(inc) };
        if !p.exists() {
            return Err(Error::Config(format!("included file {} does not exist", p.display())));
        }
        merge(&mut acc, load_layered(&p, depth + 1)?);
    }
    if let toml::Value::Table(t) = &mut own {
        t.remove("include");
    }
    merge(&mut acc, own);
    if let toml::Value::Table(t) = &mut acc {
        t.insert(
            "include".into(),
            toml::Value::Array(includes.iter().map(|p| toml::Value::String(p.display().to_string())).collect()),
        );
    }
    Ok(acc)
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<ScenarioConfig> {
        let v = load_layered(path, 0)?;
        let cfg: ScenarioConfig = v
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(s: &str) -> Result<ScenarioConfig> {
        let cfg: ScenarioConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("serializing config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.pax.validate()?;
        self.freight.validate()?;
        if self.learning.iterations == 0 || self.learning.max_iterations < self.learning.iterations {
            return Err(Error::invalid("learning needs at least one iteration within the maximum"));
        }
        if self.welfare.surplus.delta_x <= 0.0 {
            return Err(Error::invalid("accessibility cost shift must be positive"));
        }
        Ok(())
    }

    /// A small, fast variant for tests and smoke runs.
    pub fn tiny() -> ScenarioConfig {
        let mut c = ScenarioConfig {
            name: "tiny".into(),
            ..Default::default()
        };
        c.network.cols = 8;
        c.network.rows = 8;
        c.network.toll_area = crate::netgraph::AreaSpec::centered(8, 8, 4);
        c.city.n_individuals = 1500;
        c.city.n_establishments = 100;
        c.city.fleet_by_class = [30.0, 12.0, 5.0];
        c.floor.max_iterations = 2000;
        c.floor.starts = 2;
        c.learning.iterations = 3;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = ScenarioConfig::default();
        let s = c.to_toml_string().unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&s).unwrap(), c);
    }

    #[test]
    fn includes_layer_in_order() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("base.toml"), "seed = 7\nname = \"base\"\n[city]\nn_individuals = 42\n").unwrap();
        std::fs::write(
            dir.path().join("top.toml"),
            "include = [\"base.toml\"]\nname = \"top\"\n[city]\nn_establishments = 9\n",
        )
        .unwrap();
        let c = ScenarioConfig::load(&dir.path().join("top.toml")).unwrap();
        assert_eq!((c.seed, c.name.as_str()), (7, "top"));
        assert_eq!((c.city.n_individuals, c.city.n_establishments), (42, 9));
        std::fs::write(dir.path().join("bad.toml"), "include = [\"missing.toml\"]\n").unwrap();
        assert!(ScenarioConfig::load(&dir.path().join("bad.toml")).is_err());
        assert!(ScenarioConfig::from_toml_str("nonsense_key = 1").is_err());
    }
}
