//! Build virtual parts, run the SER test and the margin sweep on every block,
//! and hand the results to calibration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{MarginRecord, PartDataset, SerRecord, SimConfig};
use crate::protocols::{
    run_hold_sweep, run_read_sweep, run_wlvm_sweep, SerMeasurement, SerTest, SweepResult,
};
use crate::radiation::AlphaSource;
use crate::sram_model::{ArraySampler, CellType, CellTypeName, VariationModel};
use crate::units::Millivolts;

#[derive(Debug, Clone)]
pub struct SimulatedBlock {
    pub cell_type: CellTypeName,
    /// Ground-truth rate assigned to every cell, µSEU/(bit·s).
    pub true_ser: f64,
    pub ser: SerMeasurement,
    pub sweep: SweepResult,
    pub hold: Option<SweepResult>,
    pub read: Option<SweepResult>,
}

#[derive(Debug, Clone)]
pub struct SimulatedPart {
    pub part_id: String,
    pub offset_mv: f64,
    pub geom_factor: f64,
    pub v_dd: Millivolts,
    pub blocks: Vec<SimulatedBlock>,
}

/// SplitMix64 over a base seed and a path of indices.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    path.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

pub fn part_id(index: usize) -> String {
    format!("P{}", index + 1)
}

struct PartSetup {
    offset_mv: f64,
    geom_factor: f64,
}

fn part_setup(cfg: &SimConfig, seed: u64, index: usize) -> Result<PartSetup> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[index as u64, 0]));
    let offset_mv = Normal::new(0.0, cfg.variation.sigma_part)
        .map_err(|e| Error::Config(e.to_string()))?
        .sample(&mut rng);
    let geom_factor = match &cfg.geom_factors {
        Some(g) => g[index],
        None if cfg.geom_spread > 0.0 => rng.random_range(1.0 - cfg.geom_spread..=1.0 + cfg.geom_spread),
        None => 1.0,
    };
    Ok(PartSetup {
        offset_mv,
        geom_factor,
    })
}

/// Simulate `cfg.n_parts` parts with all five block types. Blocks run in
/// parallel; the output is ordered by part then cell type and depends only
/// on `seed`.
pub fn simulate_parts(cfg: &SimConfig, seed: u64, control_sweeps: bool) -> Result<Vec<SimulatedPart>> {
    cfg.validate()?;
    let setups: Vec<PartSetup> = (0..cfg.n_parts)
        .map(|i| part_setup(cfg, seed, i))
        .collect::<Result<_>>()?;
    let types: Vec<CellTypeName> = CellTypeName::ALL
        .into_iter()
        .filter(|t| cfg.variation.types.contains_key(t))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cfg.n_parts)
        .flat_map(|p| (0..types.len()).map(move |t| (p, t)))
        .collect();

    let blocks: Vec<SimulatedBlock> = jobs
        .par_iter()
        .map(|&(p, t)| {
            simulate_block(
                cfg,
                &cfg.variation,
                &part_id(p),
                types[t],
                &setups[p],
                derive_seed(seed, &[p as u64, t as u64 + 1]),
                control_sweeps,
            )
        })
        .collect::<Result<_>>()?;

    let mut blocks = blocks.into_iter();
    Ok(setups
        .iter()
        .enumerate()
        .map(|(p, s)| SimulatedPart {
            part_id: part_id(p),
            offset_mv: s.offset_mv,
            geom_factor: s.geom_factor,
            v_dd: cfg.variation.v_dd_nominal,
            blocks: blocks.by_ref().take(types.len()).collect(),
        })
        .collect())
}

fn simulate_block(
    cfg: &SimConfig,
    model: &VariationModel,
    part_id: &str,
    cell_type: CellTypeName,
    setup: &PartSetup,
    seed: u64,
    control_sweeps: bool,
) -> Result<SimulatedBlock> {
    let mut array = ArraySampler::new(model)
        .geometry(cfg.geometry)
        .law(cfg.ground_truth)
        .part_id(part_id)
        .sample(CellType::bundled(cell_type), setup.offset_mv, derive_seed(seed, &[1]))?;
    let true_ser = array.cells()[0].true_seu_rate;
    let source = AlphaSource::new(true_ser, setup.geom_factor)?;
    let ser = SerTest::new(cfg.ts, cfg.duration)?
        .with_pattern(cfg.pattern)
        .with_geom_unc(cfg.rel_geom_unc)
        .run(&mut array, &source, derive_seed(seed, &[2]))?;
    let sweep = run_wlvm_sweep(&mut array, cfg.delta_v, cfg.pattern)?;
    let (hold, read) = if control_sweeps {
        (
            Some(run_hold_sweep(&mut array, cfg.delta_v, cfg.pattern)?),
            Some(run_read_sweep(&mut array, cfg.delta_v, cfg.pattern)?),
        )
    } else {
        (None, None)
    };
    Ok(SimulatedBlock {
        cell_type,
        true_ser,
        ser,
        sweep,
        hold,
        read,
    })
}

pub fn to_datasets(parts: &[SimulatedPart]) -> Vec<PartDataset> {
    parts
        .iter()
        .map(|p| {
            let mut ds = PartDataset::new(p.part_id.clone(), p.v_dd);
            for b in &p.blocks {
                ds.set_ser(b.cell_type, SerRecord::from(&b.ser));
                ds.set_margin(b.cell_type, MarginRecord::from(&b.sweep));
            }
            ds
        })
        .collect()
}

/// Same configuration at a different nominal supply.
pub fn at_supply(cfg: &SimConfig, v_dd: Millivolts) -> SimConfig {
    SimConfig {
        variation: cfg.variation.with_nominal(v_dd),
        ..cfg.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sram_model::ArrayGeometry;

    fn quick() -> SimConfig {
        let mut c = SimConfig::bundled();
        c.n_parts = 2;
        c.geometry = ArrayGeometry::new(16, 16).unwrap();
        c.duration = 36_000.0;
        c
    }

    #[test]
    fn derived_seeds_differ_by_path() {
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
        assert_ne!(derive_seed(1, &[0]), derive_seed(2, &[0]));
        assert_eq!(derive_seed(7, &[3, 4]), derive_seed(7, &[3, 4]));
    }

    #[test]
    fn simulation_is_ordered_and_reproducible() {
        let cfg = quick();
        let a = simulate_parts(&cfg, 42, false).unwrap();
        let b = simulate_parts(&cfg, 42, false).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[1].part_id, "P2");
        let types: Vec<_> = a[0].blocks.iter().map(|b| b.cell_type).collect();
        assert_eq!(types, CellTypeName::ALL.to_vec());
        assert_eq!(to_datasets(&a), to_datasets(&b));
        assert!(a.iter().all(|p| (0.97..=1.03).contains(&p.geom_factor)));
    }

    #[test]
    fn control_sweeps_are_optional() {
        let mut cfg = quick();
        cfg.n_parts = 1;
        let parts = simulate_parts(&cfg, 1, true).unwrap();
        let b = &parts[0].blocks[0];
        assert!(b.hold.is_some() && b.read.is_some());
        assert_eq!(b.hold.as_ref().unwrap().n_cells(), 256);
    }

    #[test]
    fn fixed_geometric_factors() {
        let mut cfg = quick();
        cfg.geom_factors = Some(vec![1.05, 0.95]);
        let parts = simulate_parts(&cfg, 3, false).unwrap();
        assert_eq!(parts[0].geom_factor, 1.05);
        assert_eq!(parts[1].geom_factor, 0.95);
    }
}
