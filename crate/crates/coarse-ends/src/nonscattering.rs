//! Witness search for single-scale annulus connectivity.
//!
//! A space is non-scattering at infinity when one scale chain-connects the
//! complement of every bounded neighbourhood of the base point. The finite
//! surrogate quantifies over the ladder balls (cofinal among bounded sets of
//! a pseudometric space): a witness scale leaves at most one component in
//! every ladder annulus. When a witness exists the end count collapses to at
//! most one, escape chains form at most one class, and the comparison map is
//! a bijection — all enforced as tests downstream.

use serde::Serialize;

use crate::filtration::EndSystem;

/// A scale at which every ladder annulus is chain-connected.
#[derive(Debug, Clone, Serialize)]
pub struct NonscatteringWitness {
    pub scale: f64,
    pub scale_idx: usize,
    /// Cut-offs whose annuli were verified to have at most one component.
    pub verified_cutoffs: Vec<f64>,
}

/// The least ladder scale whose annuli all have at most one component, or
/// None when every ladder scale leaves some annulus split.
pub fn nonscattering_witness(system: &EndSystem) -> Option<NonscatteringWitness> {
    let ladder = system.ladder();
    for (j, &scale) in ladder.scales().iter().enumerate() {
        let all_connected =
            (0..system.n_cutoffs()).all(|i| system.cell(i, j).count() <= 1);
        if all_connected {
            return Some(NonscatteringWitness {
                scale,
                scale_idx: j,
                verified_cutoffs: ladder.cutoffs().to_vec(),
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::build_end_system;
    use crate::instance::{FiniteCoarseInstance, MetricKind};
    use crate::scale::ScaleLadder;

    fn grid(n: i64) -> FiniteCoarseInstance {
        let mut points = Vec::new();
        for x in -n..=n {
            for y in -n..=n {
                points.push((format!("{},{}", x, y), vec![x as f64, y as f64]));
            }
        }
        let rho = (2.0 * (n as f64) * (n as f64)).sqrt();
        FiniteCoarseInstance::from_cloud(points, MetricKind::Euclidean, "0,0", rho).unwrap()
    }

    fn vase(height: i64) -> FiniteCoarseInstance {
        let mut points = Vec::new();
        for y in 1..=height {
            points.push((format!("L{}", y), vec![-1.0, y as f64]));
            points.push((format!("R{}", y), vec![1.0, y as f64]));
        }
        points.push(("B".to_string(), vec![0.0, 1.0]));
        let rho = (1.0 + ((height - 1) as f64).powi(2)).sqrt();
        FiniteCoarseInstance::from_cloud(points, MetricKind::Euclidean, "B", rho).unwrap()
    }

    fn flared_vase(height: i64) -> FiniteCoarseInstance {
        let mut points = Vec::new();
        let steps = (((height - 1) as f64) * std::f64::consts::SQRT_2).ceil() as i64;
        for k in 0..=steps {
            let y = 1.0 + k as f64 / std::f64::consts::SQRT_2;
            points.push((format!("L{}", k), vec![-y, y]));
            points.push((format!("R{}", k), vec![y, y]));
        }
        points.push(("B".to_string(), vec![0.0, 1.0]));
        let rho = points
            .iter()
            .map(|(_, c)| (c[0].powi(2) + (c[1] - 1.0).powi(2)).sqrt())
            .fold(0.0f64, f64::max);
        FiniteCoarseInstance::from_cloud(points, MetricKind::Euclidean, "B", rho).unwrap()
    }

    #[test]
    fn grid_witness_at_unit_scale() {
        let inst = grid(50);
        let ladder = ScaleLadder::new(
            vec![0.0, 10.0, 20.0, 40.0],
            vec![1.0, 2.0, 4.0],
            inst.rho_max(),
        )
        .unwrap();
        let sys = build_end_system(&inst, &ladder);
        let witness = nonscattering_witness(&sys).unwrap();
        assert_eq!(witness.scale, 1.0);
    }

    #[test]
    fn vase_witness_at_arm_separation() {
        let inst = vase(100);
        // arms sit 2 apart, so 1 fails and 3 is the least ladder witness
        let ladder =
            ScaleLadder::new(vec![0.0, 10.0, 20.0], vec![1.0, 3.0, 9.0], inst.rho_max())
                .unwrap();
        let sys = build_end_system(&inst, &ladder);
        let witness = nonscattering_witness(&sys).unwrap();
        assert_eq!(witness.scale, 3.0);
    }

    #[test]
    fn flared_vase_has_no_witness_at_small_scales() {
        let inst = flared_vase(100);
        let ladder = ScaleLadder::new(
            vec![0.0, 10.0, 20.0],
            vec![1.0, 3.0, 10.0],
            inst.rho_max(),
        )
        .unwrap();
        let sys = build_end_system(&inst, &ladder);
        assert!(nonscattering_witness(&sys).is_none());
    }

    #[test]
    fn witness_scales_are_upward_closed_in_the_ladder() {
        let inst = vase(60);
        let ladder = ScaleLadder::new(
            vec![0.0, 5.0, 10.0],
            vec![1.0, 2.0, 4.0, 8.0],
            inst.rho_max(),
        )
        .unwrap();
        let sys = build_end_system(&inst, &ladder);
        let witness = nonscattering_witness(&sys).unwrap();
        for j in witness.scale_idx..sys.n_scales() {
            assert!((0..sys.n_cutoffs()).all(|i| sys.cell(i, j).count() <= 1));
        }
    }
}
