//! Escape chains from the base point and their classes.
//!
//! A truncated instance cannot hold an infinite divergent sequence, so the
//! surrogate for "tends to infinity" is a chain of bounded steps from the
//! base point into the escape shell — the outer band of the truncation
//! window. Two escape chains are equivalent when their terminals land in the
//! same end thread at some ladder scale; since threads only merge as the
//! scale coarsens, classes are exactly the distinct threads hit at the top
//! scale. The comparison map into end threads sends each class to the thread
//! of its terminal.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtration::EndSystem;
use crate::instance::{FiniteCoarseInstance, PointIndex};
use crate::scale::at_least;

pub use crate::maps::DEFAULT_MARGIN;

/// A step-bounded chain from the base point into the escape shell.
#[derive(Debug, Clone, Serialize)]
pub struct EscapeChain {
    pub scale: f64,
    /// Point indices from the base point to the shell, consecutive
    /// distances within `scale`.
    pub points: Vec<PointIndex>,
    /// Distance bound defining the shell: (1 - margin) * rho_max.
    pub shell_radius: f64,
}

impl EscapeChain {
    pub fn terminal(&self) -> PointIndex {
        *self.points.last().unwrap()
    }
}

/// Breadth-first search for a step-bounded path from the base point to the
/// escape shell. Ties are broken by minimum point index, so the
/// representative chain is deterministic. Returns None when no shell point
/// is reachable within the truncation.
pub fn find_escape_chain(
    instance: &FiniteCoarseInstance,
    scale: f64,
    margin: f64,
) -> Result<Option<EscapeChain>> {
    check_margin(margin)?;
    if !(scale > 0.0) {
        return Err(Error::InvalidLadder(format!(
            "escape chain scale must be positive, got {}",
            scale
        )));
    }
    let shell_radius = (1.0 - margin) * instance.rho_max();
    let reach = reachable_from_base(instance, scale);
    // first shell point in breadth-first discovery order: a shortest-hop
    // representative, deterministic via the min-index tie break
    let target = reach
        .order
        .iter()
        .copied()
        .find(|&p| at_least(instance.dist_to_base(p), shell_radius));
    Ok(target.map(|t| {
        let mut points = vec![t];
        let mut cur = t;
        while cur != instance.basepoint() {
            cur = reach.parent[cur as usize];
            points.push(cur);
        }
        points.reverse();
        EscapeChain { scale, points, shell_radius }
    }))
}

struct Reachability {
    /// parent[p] = predecessor on a shortest-hop chain, self for the base
    /// point, u32::MAX when unreachable.
    parent: Vec<u32>,
    /// Points in breadth-first discovery order.
    order: Vec<u32>,
}

fn reachable_from_base(instance: &FiniteCoarseInstance, scale: f64) -> Reachability {
    let probe = instance.neighbor_probe(scale);
    let mut parent = vec![u32::MAX; instance.len()];
    let base = instance.basepoint();
    parent[base as usize] = base;
    let mut order = vec![base];
    let mut queue = std::collections::VecDeque::from([base]);
    while let Some(p) = queue.pop_front() {
        for (q, _) in probe.neighbors(p) {
            if parent[q as usize] == u32::MAX {
                parent[q as usize] = p;
                order.push(q);
                queue.push_back(q);
            }
        }
    }
    Reachability { parent, order }
}

/// Escape behaviour at one ladder scale.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleEntry {
    pub scale: f64,
    pub exists: bool,
    pub chain: Option<EscapeChain>,
    /// Components of the outermost annulus at this scale containing a
    /// reachable shell point.
    pub threads_hit: Vec<u32>,
    /// The same threads pushed to the top scale (class ids).
    pub classes_hit: Vec<u32>,
}

/// One class of escape chains: a thread at the top ladder scale reached by
/// some chain.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaClass {
    /// Outermost-annulus component index at the top scale (also the thread
    /// index the comparison map selects).
    pub top_component: u32,
    /// Smallest ladder scale at which the class is hit.
    pub first_scale: f64,
    /// Reachable shell point witnessing the class (minimum index).
    pub terminal: PointIndex,
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaReport {
    pub margin: f64,
    pub shell_radius: f64,
    pub per_scale: Vec<ScaleEntry>,
    /// Classes ordered by top component index.
    pub classes: Vec<SigmaClass>,
}

impl SigmaReport {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }
}

/// Detects escape chains at every ladder scale of the system and forms
/// their classes.
pub fn sigma_report(system: &EndSystem, margin: f64) -> Result<SigmaReport> {
    check_margin(margin)?;
    let instance = system.instance();
    let shell_radius = (1.0 - margin) * instance.rho_max();
    let outermost = *system.ladder().cutoffs().last().unwrap();
    if shell_radius < outermost {
        // terminals must carry a thread, so the shell has to sit inside the
        // outermost annulus
        return Err(Error::InvalidLadder(format!(
            "escape shell at {} lies inside the outermost cut-off {}; lower the margin or the ladder",
            shell_radius, outermost
        )));
    }
    let outer = system.n_cutoffs() - 1;
    let top = system.n_scales() - 1;

    let mut per_scale = Vec::with_capacity(system.n_scales());
    // top_component -> (first scale, terminal)
    let mut class_table: std::collections::BTreeMap<u32, (f64, PointIndex)> =
        std::collections::BTreeMap::new();
    for (j, &scale) in system.ladder().scales().iter().enumerate() {
        let reach = reachable_from_base(instance, scale);
        let cell = system.cell(outer, j);
        let mut threads_hit = Vec::new();
        let mut hit_terminal: std::collections::BTreeMap<u32, PointIndex> =
            std::collections::BTreeMap::new();
        for p in 0..instance.len() as u32 {
            if reach.parent[p as usize] == u32::MAX {
                continue;
            }
            if !at_least(instance.dist_to_base(p), shell_radius) {
                continue;
            }
            if let Some(c) = cell.comp_of(p) {
                hit_terminal.entry(c).or_insert(p);
            }
        }
        let mut classes_hit = Vec::new();
        for (&c, &terminal) in &hit_terminal {
            threads_hit.push(c);
            let top_comp = system
                .transport((outer, j), (outer, top), c)
                .expect("coarsening to the top scale");
            classes_hit.push(top_comp);
            class_table.entry(top_comp).or_insert((scale, terminal));
        }
        classes_hit.sort_unstable();
        classes_hit.dedup();
        let chain = find_escape_chain(instance, scale, margin)?;
        per_scale.push(ScaleEntry {
            scale,
            exists: chain.is_some(),
            chain,
            threads_hit,
            classes_hit,
        });
    }
    let classes = class_table
        .into_iter()
        .map(|(top_component, (first_scale, terminal))| SigmaClass {
            top_component,
            first_scale,
            terminal,
        })
        .collect();
    Ok(SigmaReport { margin, shell_radius, per_scale, classes })
}

/// The comparison map from escape-chain classes to end threads at the top
/// ladder scale.
#[derive(Debug, Clone, Serialize)]
pub struct OmegaMap {
    /// (class index, thread index at the top scale) pairs.
    pub pairs: Vec<(usize, u32)>,
    pub injective: bool,
    pub surjective: bool,
}

/// Sends each class to the thread of its terminal. Total on classes;
/// injectivity and surjectivity are recorded empirically per instance.
pub fn omega_map(report: &SigmaReport, system: &EndSystem) -> OmegaMap {
    let top = system.n_scales() - 1;
    let thread_count = system.threads(top).len();
    let pairs: Vec<(usize, u32)> = report
        .classes
        .iter()
        .enumerate()
        .map(|(i, class)| (i, class.top_component))
        .collect();
    let mut seen = vec![false; thread_count];
    let mut injective = true;
    for &(_, t) in &pairs {
        if seen[t as usize] {
            injective = false;
        }
        seen[t as usize] = true;
    }
    let surjective = seen.iter().all(|&s| s);
    OmegaMap { pairs, injective, surjective }
}

/// Pushes each source class through a map sample: the class of the image
/// terminal in the target report, when the image terminal lies in the target
/// shell and its thread is hit there. None marks classes the sample fails to
/// transport.
pub fn sigma_class_map(
    map: &crate::maps::CoarseMapSample,
    source_report: &SigmaReport,
    target_report: &SigmaReport,
    target_system: &EndSystem,
) -> Vec<Option<usize>> {
    let target = target_system.instance();
    let outer = target_system.n_cutoffs() - 1;
    let top = target_system.n_scales() - 1;
    let cell = target_system.cell(outer, top);
    source_report
        .classes
        .iter()
        .map(|class| {
            let image = map.apply(class.terminal);
            if !at_least(
                target.dist_to_base(image),
                target_report.shell_radius,
            ) {
                return None;
            }
            let comp = cell.comp_of(image)?;
            target_report
                .classes
                .iter()
                .position(|c| c.top_component == comp)
        })
        .collect()
}

fn check_margin(margin: f64) -> Result<()> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::InvalidLadder(format!(
            "margin must lie strictly between 0 and 1, got {}",
            margin
        )));
    }
    Ok(())
}
