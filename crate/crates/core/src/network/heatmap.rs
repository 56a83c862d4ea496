use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CellId, RegionGrid, SkywayNetwork};
use crate::domain::ChargingProviderId;
use crate::error::{Error, Result};

/// Pad count per region cell for one charging company.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityHeatmap {
    pub charging_provider: ChargingProviderId,
    pub resolution: usize,
    pub cell_densities: Vec<f64>,
}

impl DensityHeatmap {
    pub fn density(&self, cell: CellId) -> f64 {
        self.cell_densities[cell]
    }

    pub fn total(&self) -> f64 {
        self.cell_densities.iter().sum()
    }

    /// Sum of densities over the cells of a region path.
    pub fn path_sum(&self, path: &[CellId]) -> f64 {
        path.iter().map(|&c| self.cell_densities[c]).sum()
    }
}

pub fn build_heatmap(
    network: &SkywayNetwork,
    grid: &RegionGrid,
    charging_provider: ChargingProviderId,
) -> Result<DensityHeatmap> {
    if !network.charging_providers().contains(&charging_provider) {
        return Err(Error::UnknownChargingProvider(charging_provider));
    }
    let mut cell_densities = vec![0.0; grid.cell_count()];
    for (i, node) in network.nodes().iter().enumerate() {
        if node.station_owner == charging_provider {
            cell_densities[grid.cell_of_node(i)] += f64::from(node.pad_count);
        }
    }
    Ok(DensityHeatmap { charging_provider, resolution: grid.resolution, cell_densities })
}

pub fn build_all_heatmaps(
    network: &SkywayNetwork,
    grid: &RegionGrid,
) -> BTreeMap<ChargingProviderId, DensityHeatmap> {
    network
        .charging_providers()
        .iter()
        .map(|&cp| (cp, build_heatmap(network, grid, cp).expect("registered provider")))
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::network::{synthetic_network, Point, SkywayNode, SyntheticNetworkConfig};

    #[test]
    fn single_station_heatmaps() {
        let nodes = vec![
            SkywayNode { id: 0, position: Point::new(0.0, 0.0), station_owner: 0, pad_count: 3 },
            SkywayNode { id: 1, position: Point::new(10.0, 10.0), station_owner: 2, pad_count: 1 },
        ];
        let net = SkywayNetwork::new(nodes, &[(0, 1)], BTreeSet::from([0, 1, 2])).unwrap();
        let grid = RegionGrid::build(&net, 4).unwrap();
        let a = build_heatmap(&net, &grid, 0).unwrap();
        assert_eq!(a.cell_densities.iter().filter(|&&d| d != 0.0).count(), 1);
        assert_eq!(a.total(), 3.0);
        let b = build_heatmap(&net, &grid, 1).unwrap();
        assert!(b.cell_densities.iter().all(|&d| d == 0.0));
        assert!(matches!(build_heatmap(&net, &grid, 9), Err(Error::UnknownChargingProvider(9))));
    }

    #[test]
    fn heatmaps_conserve_pads() {
        let net = synthetic_network(5, &SyntheticNetworkConfig { nodes: 492, ..Default::default() }).unwrap();
        assert_eq!(net.charging_providers().len(), 5);
        let grid = RegionGrid::build(&net, 8).unwrap();
        let maps = build_all_heatmaps(&net, &grid);

        // Direct all-provider pad map, independent of the per-provider path.
        let mut direct = vec![0.0; grid.cell_count()];
        for n in net.nodes() {
            direct[grid.cell_of_point(n.position)] += f64::from(n.pad_count);
        }
        let mut summed = vec![0.0; grid.cell_count()];
        for m in maps.values() {
            for (c, d) in m.cell_densities.iter().enumerate() {
                summed[c] += d;
            }
        }
        assert_eq!(summed, direct);
        assert_eq!(summed.iter().sum::<f64>(), net.total_pads() as f64);

        // Densest cell of each company equals the argmax of an independent count.
        for (&cp, m) in &maps {
            let mut count = vec![0u32; grid.cell_count()];
            for n in net.nodes().iter().filter(|n| n.station_owner == cp) {
                count[grid.cell_of_point(n.position)] += n.pad_count;
            }
            let max = *count.iter().max().unwrap();
            let expected: Vec<usize> = (0..count.len()).filter(|&c| count[c] == max).collect();
            let got_max = m.cell_densities.iter().copied().fold(f64::MIN, f64::max);
            let got: Vec<usize> = (0..count.len()).filter(|&c| m.density(c) == got_max).collect();
            assert_eq!(got, expected);
        }
    }
}
