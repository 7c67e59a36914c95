use rayon::prelude::*;
use serde::Serialize;

use super::{run_scenario, Channel, Node, NodePorts, Role, Scenario, SimError};
use crate::analysis::{depth_db, multinode_ratio};
use crate::Level;

/// A scenario whose bus is padded with identical passive nodes.
#[derive(Debug, Clone)]
pub struct NodeSweep {
    /// Master plus the addressed targets, in bus order.
    pub base: Scenario,
    /// Load presented by each padding node.
    pub dummy: NodePorts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSweepRow {
    /// Total nodes on the bus.
    pub n: usize,
    /// Joint-impedance depth with one node low, from the multi-node ratio.
    pub scl_depth_db: f64,
    pub sda_depth_db: f64,
    pub meets_min_depth: bool,
    pub success_rate: f64,
    pub bit_errors: u64,
}

impl NodeSweep {
    fn depth(&self, ch: Channel, n: usize) -> Result<f64, SimError> {
        let top = &self.base.topology;
        let carrier = &top.carriers[top.carrier_index(ch)];
        let port = match ch {
            Channel::Scl => &self.dummy.scl,
            Channel::Sda => &self.dummy.sda,
        };
        let z = |s| -> Result<_, SimError> { Ok(port.zin(ch, carrier, s)?.or_cap(top.pole_cap)) };
        Ok(depth_db(multinode_ratio(z(Level::High)?, z(Level::Low)?, n).exact))
    }

    /// The scenario with `n` nodes in total: the master, up to `n − 1`
    /// targets from the base, and passive padding.
    pub fn scenario(&self, n: usize) -> Scenario {
        let mut sc = self.base.clone();
        let base = &self.base.topology.nodes;
        let keep = n.min(base.len()).max(1);
        sc.topology.nodes = base[..keep].to_vec();
        for i in keep..n {
            sc.topology.nodes.push(Node {
                name: format!("pad{i}"),
                role: Role::Passive,
                ports: self.dummy.clone(),
                distance: 0.0,
            });
        }
        sc
    }
}

/// Depth and transaction success against node count.
pub fn sweep_node_count(sweep: &NodeSweep, ns: &[usize], min_depth_db: f64) -> Result<Vec<NodeSweepRow>, SimError> {
    if ns.contains(&0) {
        return Err(SimError::Topology("node counts start at 1".into()));
    }
    ns.par_iter()
        .map(|&n| {
            let scl = sweep.depth(Channel::Scl, n)?;
            let sda = sweep.depth(Channel::Sda, n)?;
            let out = run_scenario(&sweep.scenario(n))?;
            Ok(NodeSweepRow {
                n,
                scl_depth_db: scl,
                sda_depth_db: sda,
                meets_min_depth: scl.min(sda) >= min_depth_db,
                success_rate: out.metrics.success_rate,
                bit_errors: out.metrics.bit_errors(),
            })
        })
        .collect()
}
