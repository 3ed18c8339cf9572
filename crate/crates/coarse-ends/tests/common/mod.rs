//! Shared helpers for the integration suites: a brute-force component
//! oracle (independent of the production path) and seeded random instances.

// each test binary compiles its own copy and uses a subset
#![allow(dead_code)]

use coarse_ends::instance::{FiniteCoarseInstance, MetricKind, PointIndex};
use coarse_ends::scale::{at_least, within};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Brute-force chain components: the transitive closure of the step-within-
/// scale relation restricted to the annulus, via breadth-first search over a
/// full pairwise distance matrix. Returns components as sorted groups of
/// point indices, ordered by minimum member.
pub fn oracle_components(
    instance: &FiniteCoarseInstance,
    cutoff: f64,
    scale: f64,
) -> Vec<Vec<PointIndex>> {
    let n = instance.len();
    let members: Vec<PointIndex> = (0..n as u32)
        .filter(|&p| at_least(instance.dist_to_base(p), cutoff))
        .collect();
    let mut adjacent = vec![Vec::new(); n];
    for (i, &p) in members.iter().enumerate() {
        for &q in &members[i + 1..] {
            if within(instance.distance(p, q), scale) {
                adjacent[p as usize].push(q);
                adjacent[q as usize].push(p);
            }
        }
    }
    let mut seen = vec![false; n];
    let mut groups = Vec::new();
    for &p in &members {
        if seen[p as usize] {
            continue;
        }
        let mut group = vec![p];
        seen[p as usize] = true;
        let mut queue = std::collections::VecDeque::from([p]);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacent[u as usize] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    group.push(v);
                    queue.push_back(v);
                }
            }
        }
        group.sort_unstable();
        groups.push(group);
    }
    groups.sort_by_key(|g| g[0]);
    groups
}

/// The production partition as sorted member groups, for comparison with
/// the oracle.
pub fn partition_groups(partition: &coarse_ends::filtration::Partition) -> Vec<Vec<PointIndex>> {
    (0..partition.count() as u32)
        .map(|c| partition.members(c))
        .collect()
}

/// A seeded random point cloud with its basepoint at the origin.
pub fn random_cloud(rng: &mut ChaCha8Rng, max_points: usize) -> FiniteCoarseInstance {
    let n = rng.gen_range(20..=max_points);
    let dim = rng.gen_range(1..=3usize);
    let mut points = vec![("base".to_string(), vec![0.0; dim])];
    for i in 0..n {
        let coords = (0..dim).map(|_| rng.gen_range(-40.0..40.0)).collect();
        points.push((format!("p{}", i), coords));
    }
    FiniteCoarseInstance::from_cloud(points, MetricKind::Euclidean, "base", 200.0).unwrap()
}

/// A seeded random weighted graph: a spanning tree plus extra edges, with a
/// detached second component every third instance.
pub fn random_graph(rng: &mut ChaCha8Rng, max_points: usize) -> FiniteCoarseInstance {
    let n = rng.gen_range(20..=max_points);
    let vertices: Vec<String> = (0..n).map(|i| format!("v{}", i)).collect();
    let detached = n / 3 * (rng.gen_range(0..3u8) == 0) as usize;
    let main = n - detached;
    let mut edges = Vec::new();
    for i in 1..main {
        let parent = rng.gen_range(0..i);
        edges.push((
            vertices[parent].clone(),
            vertices[i].clone(),
            rng.gen_range(0.5..4.0),
        ));
    }
    for i in main + 1..n {
        let parent = rng.gen_range(main..i);
        edges.push((
            vertices[parent].clone(),
            vertices[i].clone(),
            rng.gen_range(0.5..4.0),
        ));
    }
    // extra edges inside the main component
    for _ in 0..n / 4 {
        let a = rng.gen_range(0..main);
        let b = rng.gen_range(0..main);
        if a != b {
            edges.push((
                vertices[a].clone(),
                vertices[b].clone(),
                rng.gen_range(0.5..6.0),
            ));
        }
    }
    FiniteCoarseInstance::from_graph(vertices, edges, "v0", 500.0).unwrap()
}
