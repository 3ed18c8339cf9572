//! The (cut-off, scale)-indexed matrix of annulus chain components.
//!
//! Cell (r, R) partitions the annulus `{x : d(x, base) >= r}` into classes
//! joined by chains whose consecutive points stay in the annulus and step at
//! most R. Deeper annuli include into shallower ones and smaller scales
//! refine larger ones, giving a commuting double system of transition maps.
//! Threads through the system at a fixed scale are the finite surrogate of
//! the ends of the underlying unbounded space.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{FiniteCoarseInstance, PointIndex};
use crate::maps::CoarseMapSample;
use crate::scale::{at_least, ScaleLadder};
use crate::unionfind::DisjointSet;

/// Default side length of the stabilization window.
pub const DEFAULT_WINDOW: usize = 3;

/// A partition of an annulus into chain components, canonically labeled by
/// the minimum point index of each component.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    comp: Vec<Option<u32>>,
    reps: Vec<PointIndex>,
}

impl Partition {
    pub fn count(&self) -> usize {
        self.reps.len()
    }

    /// Component index of a point, None when the point is outside the
    /// annulus.
    pub fn comp_of(&self, p: PointIndex) -> Option<u32> {
        self.comp[p as usize]
    }

    /// Canonical representative (minimum member index) of a component.
    pub fn rep(&self, comp: u32) -> PointIndex {
        self.reps[comp as usize]
    }

    pub fn reps(&self) -> &[PointIndex] {
        &self.reps
    }

    pub fn members(&self, comp: u32) -> Vec<PointIndex> {
        self.comp
            .iter()
            .enumerate()
            .filter_map(|(p, c)| (*c == Some(comp)).then_some(p as PointIndex))
            .collect()
    }
}

fn partition_annulus(
    instance: &FiniteCoarseInstance,
    cutoff: f64,
    edges: &[(PointIndex, PointIndex, f64)],
) -> Partition {
    let n = instance.len();
    let in_annulus: Vec<bool> = (0..n as u32)
        .map(|p| at_least(instance.dist_to_base(p), cutoff))
        .collect();
    let mut ds = DisjointSet::new(n);
    for &(u, v, _) in edges {
        if in_annulus[u as usize] && in_annulus[v as usize] {
            ds.union(u, v);
        }
    }
    // canonical labels by minimum member index, assigned in ascending order
    let mut comp = vec![None; n];
    let mut reps = Vec::new();
    let mut comp_of_root = std::collections::HashMap::new();
    for p in 0..n as u32 {
        if !in_annulus[p as usize] {
            continue;
        }
        let root = ds.find(p);
        let idx = *comp_of_root.entry(root).or_insert_with(|| {
            reps.push(p);
            (reps.len() - 1) as u32
        });
        comp[p as usize] = Some(idx);
    }
    Partition { comp, reps }
}

/// Chain components of the annulus at `cutoff` with steps within `scale`.
pub fn chain_components(
    instance: &FiniteCoarseInstance,
    cutoff: f64,
    scale: f64,
) -> Partition {
    let edges = instance.edges_within(scale);
    partition_annulus(instance, cutoff, &edges)
}

/// The full grid of annulus partitions plus inclusion- and coarsening-induced
/// transition maps.
pub struct EndSystem<'a> {
    instance: &'a FiniteCoarseInstance,
    ladder: ScaleLadder,
    /// cells[cutoff_idx][scale_idx]
    cells: Vec<Vec<Partition>>,
    /// down[i][j]: components at (cutoff i+1, scale j) -> components at
    /// (cutoff i, scale j)
    down: Vec<Vec<Vec<u32>>>,
    /// coarsen[i][j]: components at (cutoff i, scale j) -> components at
    /// (cutoff i, scale j+1)
    coarsen: Vec<Vec<Vec<u32>>>,
}

/// A compatible selection of one component per cut-off level at a fixed
/// scale — a way to tend to infinity.
#[derive(Debug, Clone, Serialize)]
pub struct Thread {
    pub scale_idx: usize,
    /// Component index at each cut-off level, innermost first.
    pub components: Vec<u32>,
    /// Representative point of the outermost component.
    pub rep: PointIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "count", rename_all = "snake_case")]
pub enum StabilityStatus {
    Stabilized(usize),
    Sparse,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub status: StabilityStatus,
    /// Cut-offs and scales of the witness window (the top-right sub-grid).
    pub window_cutoffs: Vec<f64>,
    pub window_scales: Vec<f64>,
    /// Full component-count matrix, counts[cutoff_idx][scale_idx].
    pub counts: Vec<Vec<usize>>,
}

/// Builds every cell of the grid plus the transition maps. Cells of distinct
/// scales are computed in parallel; the result is deterministic regardless
/// of the worker count.
pub fn build_end_system<'a>(
    instance: &'a FiniteCoarseInstance,
    ladder: &ScaleLadder,
) -> EndSystem<'a> {
    let cutoffs = ladder.cutoffs();
    let scales = ladder.scales();
    // per scale: all cut-off levels share one edge enumeration
    let columns: Vec<Vec<Partition>> = scales
        .par_iter()
        .map(|&scale| {
            let edges = instance.edges_within(scale);
            cutoffs
                .iter()
                .map(|&cutoff| partition_annulus(instance, cutoff, &edges))
                .collect()
        })
        .collect();
    let cells: Vec<Vec<Partition>> = (0..cutoffs.len())
        .map(|i| (0..scales.len()).map(|j| columns[j][i].clone()).collect())
        .collect();

    // inclusion-induced maps: deeper annulus components into shallower ones
    let mut down = Vec::new();
    for i in 0..cutoffs.len() - 1 {
        let mut row = Vec::new();
        for j in 0..scales.len() {
            let deeper = &cells[i + 1][j];
            let shallower = &cells[i][j];
            let map = deeper
                .reps()
                .iter()
                .map(|&rep| {
                    shallower
                        .comp_of(rep)
                        .expect("deeper annulus is contained in shallower annulus")
                })
                .collect();
            row.push(map);
        }
        down.push(row);
    }

    // coarsening-induced maps: finer scale components into coarser ones
    let mut coarsen = Vec::new();
    for i in 0..cutoffs.len() {
        let mut row = Vec::new();
        for j in 0..scales.len() - 1 {
            let fine = &cells[i][j];
            let coarse = &cells[i][j + 1];
            let map = fine
                .reps()
                .iter()
                .map(|&rep| {
                    coarse
                        .comp_of(rep)
                        .expect("same annulus at a coarser scale")
                })
                .collect();
            row.push(map);
        }
        coarsen.push(row);
    }

    EndSystem { instance, ladder: ladder.clone(), cells, down, coarsen }
}

impl<'a> EndSystem<'a> {
    pub fn instance(&self) -> &'a FiniteCoarseInstance {
        self.instance
    }

    pub fn ladder(&self) -> &ScaleLadder {
        &self.ladder
    }

    pub fn cell(&self, cutoff_idx: usize, scale_idx: usize) -> &Partition {
        &self.cells[cutoff_idx][scale_idx]
    }

    pub fn n_cutoffs(&self) -> usize {
        self.ladder.cutoffs().len()
    }

    pub fn n_scales(&self) -> usize {
        self.ladder.scales().len()
    }

    pub fn counts(&self) -> Vec<Vec<usize>> {
        self.cells
            .iter()
            .map(|row| row.iter().map(|p| p.count()).collect())
            .collect()
    }

    /// Inclusion-induced map for one component: from (cutoff i+1, scale j)
    /// to (cutoff i, scale j).
    pub fn down_map(&self, i: usize, j: usize, comp: u32) -> u32 {
        self.down[i][j][comp as usize]
    }

    /// Coarsening-induced map for one component: from (cutoff i, scale j) to
    /// (cutoff i, scale j+1).
    pub fn coarsen_map(&self, i: usize, j: usize, comp: u32) -> u32 {
        self.coarsen[i][j][comp as usize]
    }

    /// Transports a component along the double system: the target cell must
    /// be at most as deep and at least as coarse as the source cell.
    pub fn transport(
        &self,
        from: (usize, usize),
        to: (usize, usize),
        comp: u32,
    ) -> Result<u32> {
        let (mut i, mut j) = from;
        if to.0 > i || to.1 < j {
            return Err(Error::InvalidLadder(format!(
                "cannot transport from cell {:?} to cell {:?}",
                from, to
            )));
        }
        let mut c = comp;
        while i > to.0 {
            c = self.down[i - 1][j][c as usize];
            i -= 1;
        }
        while j < to.1 {
            c = self.coarsen[i][j][c as usize];
            j += 1;
        }
        Ok(c)
    }

    /// One thread per component of the outermost annulus at the given scale,
    /// traced inward through the inclusion maps. No threads when the
    /// outermost annulus is empty.
    pub fn threads(&self, scale_idx: usize) -> Vec<Thread> {
        let last = self.n_cutoffs() - 1;
        let outer = &self.cells[last][scale_idx];
        (0..outer.count() as u32)
            .map(|c| {
                let mut components = vec![0u32; self.n_cutoffs()];
                components[last] = c;
                let mut cur = c;
                for i in (0..last).rev() {
                    cur = self.down[i][scale_idx][cur as usize];
                    components[i] = cur;
                }
                Thread { scale_idx, components, rep: outer.rep(c) }
            })
            .collect()
    }

    /// Stabilization diagnosis over the top-right `window` x `window`
    /// sub-grid: Stabilized(k) when counts are constantly k and all
    /// transition maps restrict to bijections there; Sparse when counts
    /// strictly grow toward the bulk (shrink as the cut-off rises) at every
    /// window scale; Inconclusive otherwise.
    pub fn stable_end_count(&self, window: usize) -> Result<StabilityReport> {
        let nr = self.n_cutoffs();
        let ns = self.n_scales();
        if window == 0 || nr < window || ns < window {
            return Err(Error::LadderTooSmall {
                need: window.max(1),
                have_r: nr,
                have_scales: ns,
            });
        }
        let r0 = nr - window;
        let s0 = ns - window;
        let counts = self.counts();

        let k = counts[r0][s0];
        let mut constant = true;
        for i in r0..nr {
            for j in s0..ns {
                if counts[i][j] != k {
                    constant = false;
                }
            }
        }
        let mut bijective = true;
        for j in s0..ns {
            for i in r0..nr - 1 {
                if !is_bijection(&self.down[i][j], counts[i][j]) {
                    bijective = false;
                }
            }
        }
        for i in r0..nr {
            for j in s0..ns - 1 {
                if !is_bijection(&self.coarsen[i][j], counts[i][j + 1]) {
                    bijective = false;
                }
            }
        }

        let status = if constant && bijective {
            StabilityStatus::Stabilized(k)
        } else {
            let sparse = (s0..ns).all(|j| {
                (r0..nr - 1).all(|i| counts[i][j] > counts[i + 1][j])
            });
            if sparse {
                StabilityStatus::Sparse
            } else {
                StabilityStatus::Inconclusive
            }
        };
        Ok(StabilityReport {
            status,
            window_cutoffs: self.ladder.cutoffs()[r0..].to_vec(),
            window_scales: self.ladder.scales()[s0..].to_vec(),
            counts,
        })
    }
}

fn is_bijection(map: &[u32], target_count: usize) -> bool {
    if map.len() != target_count {
        return false;
    }
    let mut seen = vec![false; target_count];
    for &c in map {
        if seen[c as usize] {
            return false;
        }
        seen[c as usize] = true;
    }
    true
}

/// Where one source cell lands under an induced map.
#[derive(Debug, Clone, Serialize)]
pub struct CellImage {
    /// (cutoff_idx, scale_idx) in the target system.
    pub cell: (usize, usize),
    /// Component map from the source cell into the target cell.
    pub comp_map: Vec<u32>,
}

/// The component maps a coarse map sample induces between two end systems.
#[derive(Debug, Clone, Serialize)]
pub struct InducedEndMap {
    /// Indexed like the source grid; None when the stretched scale exceeds
    /// the target ladder.
    pub cells: Vec<Vec<Option<CellImage>>>,
    /// Bornologous modulus per source scale.
    pub moduli: Vec<f64>,
}

/// Induces component maps cell by cell. The sample must be bornologous and
/// proper at the ladder scales; the target cell of source cell (r', R) is
/// the deepest cut-off below every image radius paired with the smallest
/// target scale that dominates S(R).
pub fn induced_end_map(
    map: &CoarseMapSample,
    source_system: &EndSystem,
    target_system: &EndSystem,
) -> Result<InducedEndMap> {
    if !std::ptr::eq(map.source(), source_system.instance()) {
        return Err(Error::MismatchedInstances(
            "induced map: sample source is not the source system's instance".into(),
        ));
    }
    if !std::ptr::eq(map.target(), target_system.instance()) {
        return Err(Error::MismatchedInstances(
            "induced map: sample target is not the target system's instance".into(),
        ));
    }
    let born = map.bornologous_modulus(source_system.ladder());
    if !born.is_finite() {
        return Err(Error::MapNotCoarse(
            "bornologous modulus is infinite at some ladder scale".into(),
        ));
    }
    let proper = map.properness_report(target_system.ladder());
    if !proper.proper_at_scale {
        return Err(Error::MapNotCoarse(
            "preimages of ladder balls reach the source escape shell".into(),
        ));
    }

    let source_ladder = source_system.ladder();
    let target_ladder = target_system.ladder();
    let image_floor: Vec<f64> = source_ladder
        .cutoffs()
        .iter()
        .map(|&r| map.min_image_radius(r))
        .collect();

    let mut cells = Vec::with_capacity(source_system.n_cutoffs());
    for i in 0..source_system.n_cutoffs() {
        let target_cut = target_ladder
            .cutoff_at_most(image_floor[i])
            .expect("cut-off lists start at 0");
        let mut row = Vec::with_capacity(source_system.n_scales());
        for j in 0..source_system.n_scales() {
            let target_scale = match target_ladder.scale_at_least(born.modulus_at(j)) {
                Some(s) => s,
                None => {
                    row.push(None);
                    continue;
                }
            };
            let source_cell = source_system.cell(i, j);
            let target_cell = target_system.cell(target_cut, target_scale);
            let comp_map: Vec<u32> = source_cell
                .reps()
                .iter()
                .map(|&rep| {
                    target_cell
                        .comp_of(map.apply(rep))
                        .expect("images of annulus points land in the matched annulus")
                })
                .collect();
            #[cfg(debug_assertions)]
            for (c, _) in source_cell.reps().iter().enumerate() {
                for p in source_cell.members(c as u32) {
                    debug_assert_eq!(
                        target_cell.comp_of(map.apply(p)),
                        Some(comp_map[c]),
                        "component image must be well-defined"
                    );
                }
            }
            row.push(Some(CellImage {
                cell: (target_cut, target_scale),
                comp_map,
            }));
        }
        cells.push(row);
    }
    Ok(InducedEndMap {
        cells,
        moduli: born.per_scale.iter().map(|&(_, s)| s).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::MetricKind;

    fn line(n: i64) -> FiniteCoarseInstance {
        let points = (-n..=n)
            .map(|x| (x.to_string(), vec![x as f64]))
            .collect();
        FiniteCoarseInstance::from_cloud(points, MetricKind::Euclidean, "0", n as f64).unwrap()
    }

    #[test]
    fn line_annulus_splits_into_two_rays() {
        let inst = line(100);
        let part = chain_components(&inst, 10.0, 1.0);
        assert_eq!(part.count(), 2);
        // canonical labels: representative of component 0 is the smallest index
        let left = inst.index("-100").unwrap();
        assert_eq!(part.rep(0), left);
        assert_eq!(part.comp_of(inst.index("-10").unwrap()), Some(0));
        assert_eq!(part.comp_of(inst.index("10").unwrap()), Some(1));
        assert_eq!(part.comp_of(inst.index("0").unwrap()), None);
    }

    #[test]
    fn empty_annulus_gives_empty_partition() {
        let inst = line(10);
        let part = chain_components(&inst, 10.5, 1.0);
        // only ±10 clear the cut-off... at 10.5 nothing does
        assert_eq!(part.count(), 0);
    }

    #[test]
    fn full_space_at_cutoff_zero_is_single_component() {
        let inst = line(100);
        let part = chain_components(&inst, 0.0, 1.0);
        assert_eq!(part.count(), 1);
    }

    #[test]
    fn line_end_system_counts() {
        let inst = line(100);
        let ladder = ScaleLadder::new(
            vec![0.0, 10.0, 20.0, 40.0],
            vec![1.0, 2.0, 4.0],
            100.0,
        )
        .unwrap();
        let sys = build_end_system(&inst, &ladder);
        let counts = sys.counts();
        for (i, row) in counts.iter().enumerate() {
            for &c in row {
                assert_eq!(c, if i == 0 { 1 } else { 2 });
            }
        }
        assert_eq!(sys.threads(0).len(), 2);
        let report = sys.stable_end_count(3).unwrap();
        assert_eq!(report.status, StabilityStatus::Stabilized(2));
    }

    #[test]
    fn transport_composes_transition_maps() {
        let inst = line(100);
        let ladder =
            ScaleLadder::new(vec![0.0, 10.0, 20.0], vec![1.0, 2.0], 100.0).unwrap();
        let sys = build_end_system(&inst, &ladder);
        // deepest finest cell has 2 comps; transport to the shallowest
        // coarsest cell (count 1)
        let c = sys.transport((2, 0), (0, 1), 1).unwrap();
        assert_eq!(c, 0);
        assert!(sys.transport((0, 1), (2, 0), 0).is_err());
    }

    #[test]
    fn window_too_small_rejected() {
        let inst = line(100);
        let ladder = ScaleLadder::new(vec![0.0, 10.0], vec![1.0, 2.0], 100.0).unwrap();
        let sys = build_end_system(&inst, &ladder);
        assert!(matches!(
            sys.stable_end_count(3),
            Err(Error::LadderTooSmall { .. })
        ));
    }

    #[test]
    fn identity_induces_identity_on_every_cell() {
        let inst = line(100);
        let ladder = ScaleLadder::new(
            vec![0.0, 10.0, 20.0, 40.0],
            vec![1.0, 2.0, 4.0],
            100.0,
        )
        .unwrap();
        let sys = build_end_system(&inst, &ladder);
        let id = CoarseMapSample::identity(&inst);
        let induced = induced_end_map(&id, &sys, &sys).unwrap();
        for i in 0..sys.n_cutoffs() {
            for j in 0..sys.n_scales() {
                let img = induced.cells[i][j].as_ref().unwrap();
                assert_eq!(img.cell, (i, j));
                for (c, &target) in img.comp_map.iter().enumerate() {
                    assert_eq!(c as u32, target);
                }
            }
        }
    }

    #[test]
    fn non_proper_map_rejected() {
        let inst = line(100);
        let ladder = ScaleLadder::new(
            vec![0.0, 10.0, 20.0, 40.0],
            vec![1.0, 2.0, 4.0],
            100.0,
        )
        .unwrap();
        let sys = build_end_system(&inst, &ladder);
        let constant =
            CoarseMapSample::new(&inst, &inst, vec![inst.basepoint(); inst.len()]).unwrap();
        assert!(matches!(
            induced_end_map(&constant, &sys, &sys),
            Err(Error::MapNotCoarse(_))
        ));
    }
}
