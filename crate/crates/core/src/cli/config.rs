//! Flat TOML configuration for the hardware model, cost model and defaults.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::ir::{CostModel, IrError, NodeTopology, Placement};
use crate::parallelizer::{Hardware, Mode};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("{key} = {value}: {msg}")]
    Range {
        key: &'static str,
        value: u64,
        msg: &'static str,
    },
    #[error(transparent)]
    Placement(#[from] IrError),
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementStrategy {
    /// Logical qubit `i` alone on node `i`.
    #[default]
    OnePerNode,
    /// Fill nodes in order, keeping one memory slot free per node.
    Packed,
}

/// Every key is optional; unset keys fall back to the defaults.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub nodes: Option<u64>,
    pub memory_per_node: Option<u64>,
    pub placement: Option<PlacementStrategy>,
    pub naive_cnot_cost: Option<u64>,
    pub parallel_base_cost: Option<u64>,
    pub parallel_increment: Option<u64>,
    pub parallel_base_size: Option<u64>,
    pub min_group_size_conservative: Option<u64>,
    pub mode: Option<Mode>,
}

impl RawConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            msg: e.to_string().trim_end().to_string(),
        })
    }

    /// Keys set in `other` win.
    pub fn overlay(self, other: RawConfig) -> RawConfig {
        RawConfig {
            nodes: other.nodes.or(self.nodes),
            memory_per_node: other.memory_per_node.or(self.memory_per_node),
            placement: other.placement.or(self.placement),
            naive_cnot_cost: other.naive_cnot_cost.or(self.naive_cnot_cost),
            parallel_base_cost: other.parallel_base_cost.or(self.parallel_base_cost),
            parallel_increment: other.parallel_increment.or(self.parallel_increment),
            parallel_base_size: other.parallel_base_size.or(self.parallel_base_size),
            min_group_size_conservative: other
                .min_group_size_conservative
                .or(self.min_group_size_conservative),
            mode: other.mode.or(self.mode),
        }
    }

    pub fn resolve(&self) -> Result<Settings, ConfigError> {
        let positive = |key: &'static str, v: Option<u64>, default: u64| match v {
            Some(0) => Err(ConfigError::Range {
                key,
                value: 0,
                msg: "must be at least 1",
            }),
            Some(v) => Ok(v),
            None => Ok(default),
        };
        let d = CostModel::default();
        let cost = CostModel {
            naive_cnot_cost: positive("naive_cnot_cost", self.naive_cnot_cost, d.naive_cnot_cost)?,
            parallel_base_cost: positive("parallel_base_cost", self.parallel_base_cost, d.parallel_base_cost)?,
            parallel_increment: positive("parallel_increment", self.parallel_increment, d.parallel_increment)?,
            parallel_base_size: positive("parallel_base_size", self.parallel_base_size, d.parallel_base_size)?,
            min_group_size_conservative: positive(
                "min_group_size_conservative",
                self.min_group_size_conservative,
                d.min_group_size_conservative,
            )?,
        };
        if cost.parallel_base_size < 2 {
            return Err(ConfigError::Range {
                key: "parallel_base_size",
                value: cost.parallel_base_size,
                msg: "a parallel group has at least 2 gates",
            });
        }
        let memory = positive(
            "memory_per_node",
            self.memory_per_node,
            NodeTopology::DEFAULT_MEMORY_PER_NODE as u64,
        )?;
        let placement = self.placement.unwrap_or_default();
        if placement == PlacementStrategy::Packed && memory < 2 {
            return Err(ConfigError::Range {
                key: "memory_per_node",
                value: memory,
                msg: "packed placement needs at least 2 memory qubits per node",
            });
        }
        Ok(Settings {
            nodes: match self.nodes {
                Some(n) => Some(positive("nodes", Some(n), 1)? as usize),
                None => None,
            },
            memory_per_node: memory as usize,
            placement,
            cost,
            mode: self.mode.unwrap_or(Mode::Conservative),
        })
    }
}

/// Validated configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Settings {
    /// Node count; derived from the circuit size when unset.
    pub nodes: Option<usize>,
    pub memory_per_node: usize,
    pub placement: PlacementStrategy,
    pub cost: CostModel,
    pub mode: Mode,
}

impl Default for Settings {
    fn default() -> Self {
        RawConfig::default().resolve().expect("defaults are valid")
    }
}

impl Settings {
    /// Topology and placement for a circuit of `qubits` logical qubits.
    pub fn hardware(&self, qubits: usize) -> Result<Hardware, ConfigError> {
        let qubits_or_one = qubits.max(1);
        match self.placement {
            PlacementStrategy::OnePerNode => {
                let nodes = self.nodes.unwrap_or(qubits_or_one);
                if nodes < qubits {
                    return Err(IrError::CapacityExceeded {
                        qubits,
                        nodes,
                        per_node: 1,
                    }
                    .into());
                }
                Ok(Hardware {
                    topology: NodeTopology::new(nodes, self.memory_per_node)?,
                    placement: Placement::one_per_node(qubits),
                })
            }
            PlacementStrategy::Packed => {
                let per_node = self.memory_per_node - 1;
                let nodes = self.nodes.unwrap_or(qubits_or_one.div_ceil(per_node));
                let topology = NodeTopology::new(nodes, self.memory_per_node)?;
                Ok(Hardware {
                    topology,
                    placement: Placement::packed(qubits, &topology)?,
                })
            }
        }
    }
}

/// Read and validate one configuration file.
pub fn load_config(path: &Path) -> Result<Settings, ConfigError> {
    load_raw(path)?.resolve()
}

pub fn load_raw(path: &Path) -> Result<RawConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    RawConfig::parse(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let s = RawConfig::parse("", "t").unwrap().resolve().unwrap();
        assert_eq!(s.cost, CostModel::default());
        assert_eq!(s.memory_per_node, 4);
        assert_eq!(s.mode, Mode::Conservative);
    }

    #[test]
    fn zero_cost_is_a_range_error() {
        let err = RawConfig::parse("naive_cnot_cost = 0", "t").unwrap().resolve().unwrap_err();
        assert!(matches!(err, ConfigError::Range { key: "naive_cnot_cost", .. }));
    }

    #[test]
    fn unknown_key_is_rejected_with_its_name() {
        let err = RawConfig::parse("naive_cost = 3", "cfg.toml").unwrap_err();
        assert!(err.to_string().contains("naive_cost"), "{err}");
    }

    #[test]
    fn overlay_prefers_later_file() {
        let a = RawConfig::parse("memory_per_node = 6\nmode = \"relaxed\"", "a").unwrap();
        let b = RawConfig::parse("mode = \"naive\"", "b").unwrap();
        let s = a.overlay(b).resolve().unwrap();
        assert_eq!(s.memory_per_node, 6);
        assert_eq!(s.mode, Mode::Naive);
    }

    #[test]
    fn packed_hardware_sizes_nodes() {
        let s = RawConfig::parse("placement = \"packed\"", "t").unwrap().resolve().unwrap();
        let hw = s.hardware(7).unwrap();
        assert_eq!(hw.topology.node_count(), 3);
        let too_small = RawConfig::parse("nodes = 2", "t").unwrap().resolve().unwrap();
        assert!(too_small.hardware(3).is_err());
    }
}
