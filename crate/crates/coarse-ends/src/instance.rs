//! Finite pseudometric instances with a base point and truncation radius,
//! and the scale-level decision procedures on them.
//!
//! An instance is a finite window into an unbounded space: every point with
//! a finite distance from the base point lies within the truncation radius
//! (points beyond it are dropped at build time and counted), while points
//! that cannot be reached at all keep distance +∞ and are retained — they
//! witness coarse disconnection. All suprema are computed in the extended
//! reals, so +∞ is an ordinary value throughout.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighbors::GridBuckets;
use crate::scale::{at_least, within};
use crate::unionfind::DisjointSet;

pub type PointIndex = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Euclidean,
    Chebyshev,
    GraphShortestPath,
}

enum MetricData {
    Cloud {
        dim: usize,
        coords: Vec<f64>,
        chebyshev: bool,
    },
    Graph {
        adjacency: Vec<Vec<(PointIndex, f64)>>,
        // memoized single-source distance maps; instances stay shareable
        // for concurrent reads
        cache: RwLock<HashMap<PointIndex, Arc<Vec<f64>>>>,
        total_weight: f64,
    },
}

/// A finite sampled pseudometric space with base point and truncation radius.
pub struct FiniteCoarseInstance {
    ids: Vec<String>,
    index_of: HashMap<String, PointIndex>,
    data: MetricData,
    metric: MetricKind,
    basepoint: PointIndex,
    rho_max: f64,
    dist_base: Vec<f64>,
    dropped: usize,
}

/// Result of the single-scale chain connectivity check over the whole space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchimedeanReport {
    pub connected: bool,
    /// Largest hop count of a shortest step-bounded chain between any two
    /// points (exact for small instances, double-sweep estimate beyond
    /// 1024 points); absent when disconnected.
    pub max_hops: Option<u32>,
}

impl FiniteCoarseInstance {
    /// Builds a cloud instance from `(id, coordinates)` rows. Points farther
    /// than `rho_max` from the basepoint are dropped and counted.
    pub fn from_cloud(
        points: Vec<(String, Vec<f64>)>,
        metric: MetricKind,
        basepoint: &str,
        rho_max: f64,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("no points".into()));
        }
        if !(rho_max >= 0.0) || !rho_max.is_finite() {
            return Err(Error::InvalidTruncationRadius(rho_max));
        }
        let chebyshev = match metric {
            MetricKind::Euclidean => false,
            MetricKind::Chebyshev => true,
            MetricKind::GraphShortestPath => {
                return Err(Error::InvalidRecipe(
                    "graph metric requires an edge list, not a point table".into(),
                ))
            }
        };
        let dim = points[0].1.len();
        if dim == 0 {
            return Err(Error::EmptyInput("zero-dimensional points".into()));
        }
        let mut base_coords: Option<Vec<f64>> = None;
        for (id, c) in &points {
            if c.len() != dim {
                return Err(Error::DimensionMismatch(dim, c.len()));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteCoordinate(id.clone()));
            }
            if id == basepoint {
                base_coords = Some(c.clone());
            }
        }
        let base_coords =
            base_coords.ok_or_else(|| Error::MissingBasepoint(basepoint.to_string()))?;

        let dist = |a: &[f64], b: &[f64]| cloud_distance(a, b, chebyshev);
        let mut ids = Vec::new();
        let mut index_of = HashMap::new();
        let mut coords = Vec::new();
        let mut dist_base = Vec::new();
        let mut dropped = 0usize;
        for (id, c) in points {
            let d = dist(&c, &base_coords);
            if !within(d, rho_max) {
                dropped += 1;
                continue;
            }
            if index_of.contains_key(&id) {
                return Err(Error::DuplicateId(id));
            }
            index_of.insert(id.clone(), ids.len() as PointIndex);
            ids.push(id);
            coords.extend_from_slice(&c);
            dist_base.push(d);
        }
        let basepoint = *index_of.get(basepoint).expect("basepoint survives truncation");
        Ok(Self {
            ids,
            index_of,
            data: MetricData::Cloud { dim, coords, chebyshev },
            metric,
            basepoint,
            rho_max,
            dist_base,
            dropped,
        })
    }

    /// Builds a graph instance from a vertex list and weighted undirected
    /// edges. Vertices whose shortest-path distance from the basepoint is
    /// finite but exceeds `rho_max` are dropped; unreachable vertices are
    /// kept with distance +∞ (they witness coarse disconnection).
    pub fn from_graph(
        vertices: Vec<String>,
        edges: Vec<(String, String, f64)>,
        basepoint: &str,
        rho_max: f64,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyInput("no vertices".into()));
        }
        if !(rho_max >= 0.0) || !rho_max.is_finite() {
            return Err(Error::InvalidTruncationRadius(rho_max));
        }
        let mut pre_index: HashMap<&str, u32> = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if pre_index.insert(v.as_str(), i as u32).is_some() {
                return Err(Error::DuplicateId(v.clone()));
            }
        }
        let base_pre = *pre_index
            .get(basepoint)
            .ok_or_else(|| Error::MissingBasepoint(basepoint.to_string()))?;
        let mut adjacency: Vec<Vec<(u32, f64)>> = vec![Vec::new(); vertices.len()];
        for (u, v, w) in &edges {
            let ui = *pre_index
                .get(u.as_str())
                .ok_or_else(|| Error::UnknownPoint(u.clone()))?;
            let vi = *pre_index
                .get(v.as_str())
                .ok_or_else(|| Error::UnknownPoint(v.clone()))?;
            if !w.is_finite() {
                return Err(Error::NonFiniteCoordinate(format!("{} -- {}", u, v)));
            }
            if *w < 0.0 {
                return Err(Error::NegativeEdgeWeight {
                    from: u.clone(),
                    to: v.clone(),
                    weight: *w,
                });
            }
            adjacency[ui as usize].push((vi, *w));
            adjacency[vi as usize].push((ui, *w));
        }
        let from_base = dijkstra(&adjacency, base_pre, f64::INFINITY);

        // keep unreachable vertices, drop finite-but-too-far ones
        let mut keep = Vec::new();
        let mut dropped = 0usize;
        for (i, &d) in from_base.iter().enumerate() {
            if d.is_finite() && !within(d, rho_max) {
                dropped += 1;
            } else {
                keep.push(i as u32);
            }
        }
        let mut remap = vec![u32::MAX; vertices.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old as usize] = new as u32;
        }
        let mut ids = Vec::with_capacity(keep.len());
        let mut index_of = HashMap::new();
        let mut dist_base = Vec::with_capacity(keep.len());
        let mut new_adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); keep.len()];
        let mut total_weight = 0.0f64;
        for (new, &old) in keep.iter().enumerate() {
            let id = vertices[old as usize].clone();
            index_of.insert(id.clone(), new as u32);
            ids.push(id);
            dist_base.push(from_base[old as usize]);
            for &(nbr, w) in &adjacency[old as usize] {
                let m = remap[nbr as usize];
                if m != u32::MAX {
                    new_adj[new].push((m, w));
                    total_weight += w;
                }
            }
        }
        for nbrs in &mut new_adj {
            nbrs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        }
        let basepoint = remap[base_pre as usize];
        Ok(Self {
            ids,
            index_of,
            data: MetricData::Graph {
                adjacency: new_adj,
                cache: RwLock::new(HashMap::new()),
                total_weight,
            },
            metric: MetricKind::GraphShortestPath,
            basepoint,
            rho_max,
            dist_base,
            dropped,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn metric_kind(&self) -> MetricKind {
        self.metric
    }

    pub fn basepoint(&self) -> PointIndex {
        self.basepoint
    }

    pub fn basepoint_id(&self) -> &str {
        &self.ids[self.basepoint as usize]
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    /// How many input points the truncation discarded.
    pub fn dropped_count(&self) -> usize {
        self.dropped
    }

    pub fn id(&self, p: PointIndex) -> &str {
        &self.ids[p as usize]
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.ids.iter().map(|s| s.as_str())
    }

    pub fn index(&self, id: &str) -> Result<PointIndex> {
        self.index_of
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownPoint(id.to_string()))
    }

    /// Coordinate slice of a cloud point (None for graph instances).
    pub fn coords(&self, p: PointIndex) -> Option<&[f64]> {
        match &self.data {
            MetricData::Cloud { dim, coords, .. } => {
                let i = p as usize * dim;
                Some(&coords[i..i + dim])
            }
            MetricData::Graph { .. } => None,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.data {
            MetricData::Cloud { dim, .. } => Some(*dim),
            MetricData::Graph { .. } => None,
        }
    }

    /// Distance from the basepoint, precomputed at build time.
    pub fn dist_to_base(&self, p: PointIndex) -> f64 {
        self.dist_base[p as usize]
    }

    /// Pseudometric distance between two points; +∞ for unreachable graph
    /// pairs.
    pub fn distance(&self, p: PointIndex, q: PointIndex) -> f64 {
        match &self.data {
            MetricData::Cloud { dim, coords, chebyshev } => {
                let a = &coords[p as usize * dim..p as usize * dim + dim];
                let b = &coords[q as usize * dim..q as usize * dim + dim];
                cloud_distance(a, b, *chebyshev)
            }
            MetricData::Graph { .. } => {
                if p == q {
                    return 0.0;
                }
                self.graph_distances_from(p)[q as usize]
            }
        }
    }

    pub fn distance_by_id(&self, p: &str, q: &str) -> Result<f64> {
        Ok(self.distance(self.index(p)?, self.index(q)?))
    }

    /// Distance if it does not exceed `cap`; avoids a full shortest-path run
    /// on graph instances.
    pub fn distance_capped(&self, p: PointIndex, q: PointIndex, cap: f64) -> Option<f64> {
        match &self.data {
            MetricData::Cloud { .. } => {
                let d = self.distance(p, q);
                within(d, cap).then_some(d)
            }
            MetricData::Graph { adjacency, cache, .. } => {
                if p == q {
                    return Some(0.0);
                }
                if let Some(known) = cache.read().unwrap().get(&p) {
                    let d = known[q as usize];
                    return within(d, cap).then_some(d);
                }
                // a ball of radius cap settles every point within cap
                truncated_ball(adjacency, p, cap + cap.abs() * crate::scale::REL_TOL)
                    .into_iter()
                    .find(|&(node, _)| node == q)
                    .and_then(|(_, d)| within(d, cap).then_some(d))
            }
        }
    }

    /// Exact distance computed with an expanding local search; `hint` is the
    /// expected magnitude. Cheap when the answer is small relative to the
    /// instance, +∞ when unreachable.
    pub fn distance_escalating(&self, p: PointIndex, q: PointIndex, hint: f64) -> f64 {
        match &self.data {
            MetricData::Cloud { .. } => self.distance(p, q),
            MetricData::Graph { total_weight, .. } => {
                let mut cap = hint.max(1.0);
                loop {
                    if let Some(d) = self.distance_capped(p, q, cap) {
                        return d;
                    }
                    if cap > *total_weight {
                        return f64::INFINITY;
                    }
                    cap *= 4.0;
                }
            }
        }
    }

    fn graph_distances_from(&self, p: PointIndex) -> Arc<Vec<f64>> {
        match &self.data {
            MetricData::Cloud { .. } => unreachable!("cloud instances have no distance cache"),
            MetricData::Graph { adjacency, cache, .. } => {
                if let Some(d) = cache.read().unwrap().get(&p) {
                    return Arc::clone(d);
                }
                let d = Arc::new(dijkstra(adjacency, p, f64::INFINITY));
                cache.write().unwrap().insert(p, Arc::clone(&d));
                d
            }
        }
    }

    /// Maximum pairwise distance over a nonempty point set, in the extended
    /// reals. A set is bounded at scale R exactly when this stays within R.
    pub fn subset_diameter(&self, points: &[PointIndex]) -> Result<f64> {
        if points.is_empty() {
            return Err(Error::EmptySubset("subset_diameter".into()));
        }
        let mut sup = 0.0f64;
        match &self.data {
            MetricData::Cloud { .. } => {
                for (i, &p) in points.iter().enumerate() {
                    for &q in &points[i + 1..] {
                        sup = sup.max(self.distance(p, q));
                    }
                }
            }
            MetricData::Graph { .. } => {
                for &p in points.iter() {
                    let from_p = self.graph_distances_from(p);
                    for &q in points.iter() {
                        sup = sup.max(from_p[q as usize]);
                    }
                    if sup.is_infinite() {
                        break;
                    }
                }
            }
        }
        Ok(sup)
    }

    /// Supremum of d(x, y) over a pair list (0 for an empty list). A relation
    /// is controlled at level R exactly when this stays within R.
    pub fn max_pair_distance(&self, pairs: &[(PointIndex, PointIndex)]) -> f64 {
        pairs
            .iter()
            .map(|&(p, q)| self.distance(p, q))
            .fold(0.0, f64::max)
    }

    /// Every pair at finite distance. Cloud instances are always coarsely
    /// connected; graph instances are connected iff one shortest-path sweep
    /// reaches everything.
    pub fn is_coarsely_connected(&self) -> bool {
        match &self.data {
            MetricData::Cloud { .. } => true,
            MetricData::Graph { .. } => self.dist_base.iter().all(|d| d.is_finite()),
        }
    }

    /// Neighbor enumeration within `radius`, sorted by point index.
    /// `probe` carries the per-radius acceleration structure.
    pub fn neighbor_probe(&self, radius: f64) -> NeighborProbe<'_> {
        let buckets = match &self.data {
            MetricData::Cloud { dim, coords, .. } => {
                if *dim <= 6 && radius > 0.0 {
                    Some(GridBuckets::build(coords, *dim, radius))
                } else {
                    None
                }
            }
            MetricData::Graph { .. } => None,
        };
        NeighborProbe { instance: self, radius, buckets }
    }

    /// All unordered pairs within `radius` (indices i < j), deterministic
    /// order.
    pub fn edges_within(&self, radius: f64) -> Vec<(PointIndex, PointIndex, f64)> {
        let probe = self.neighbor_probe(radius);
        let mut edges = Vec::new();
        for p in 0..self.len() as u32 {
            for (q, d) in probe.neighbors(p) {
                if q > p {
                    edges.push((p, q, d));
                }
            }
        }
        edges
    }

    /// Whether every pair is joined by a chain of steps within `scale`,
    /// together with the largest hop count over shortest such chains.
    pub fn archimedean_check(&self, scale: f64) -> ArchimedeanReport {
        let n = self.len();
        let edges = self.edges_within(scale);
        let mut ds = DisjointSet::new(n);
        for &(u, v, _) in &edges {
            ds.union(u, v);
        }
        let root = ds.find(0);
        let connected = (1..n as u32).all(|p| ds.find(p) == root);
        if !connected {
            return ArchimedeanReport { connected: false, max_hops: None };
        }
        // adjacency of the step graph
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(u, v, _) in &edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let ecc = |start: u32| -> (u32, u32) {
            let mut layer = vec![u32::MAX; n];
            layer[start as usize] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            let mut far = (start, 0u32);
            while let Some(u) = queue.pop_front() {
                let l = layer[u as usize];
                if l > far.1 {
                    far = (u, l);
                }
                for &v in &adj[u as usize] {
                    if layer[v as usize] == u32::MAX {
                        layer[v as usize] = l + 1;
                        queue.push_back(v);
                    }
                }
            }
            far
        };
        let max_hops = if n <= 1024 {
            (0..n as u32).map(|s| ecc(s).1).max().unwrap_or(0)
        } else {
            // double sweep: exact on path-like graphs, attained lower bound
            // in general
            let (far, _) = ecc(self.basepoint);
            ecc(far).1
        };
        ArchimedeanReport { connected: true, max_hops: Some(max_hops) }
    }

    /// Point indices in the annulus `{x : d(x, base) >= cutoff}` (complement
    /// of the open ball), ascending.
    pub fn annulus(&self, cutoff: f64) -> Vec<PointIndex> {
        (0..self.len() as u32)
            .filter(|&p| at_least(self.dist_base[p as usize], cutoff))
            .collect()
    }
}

pub struct NeighborProbe<'a> {
    instance: &'a FiniteCoarseInstance,
    radius: f64,
    buckets: Option<GridBuckets>,
}

impl NeighborProbe<'_> {
    /// Points within the probe radius of `p` (excluding `p` itself, but
    /// including distance-0 duplicates), sorted by index.
    pub fn neighbors(&self, p: PointIndex) -> Vec<(PointIndex, f64)> {
        let mut out = Vec::new();
        match &self.instance.data {
            MetricData::Cloud { dim, coords, .. } => {
                let pc = &coords[p as usize * dim..p as usize * dim + dim];
                if let Some(buckets) = &self.buckets {
                    buckets.for_each_candidate(pc, |q| {
                        if q != p {
                            let d = self.instance.distance(p, q);
                            if within(d, self.radius) {
                                out.push((q, d));
                            }
                        }
                    });
                    out.sort_by_key(|&(q, _)| q);
                } else {
                    for q in 0..self.instance.len() as u32 {
                        if q != p {
                            let d = self.instance.distance(p, q);
                            if within(d, self.radius) {
                                out.push((q, d));
                            }
                        }
                    }
                }
            }
            MetricData::Graph { adjacency, .. } => {
                let ball =
                    truncated_ball(adjacency, p, self.radius * (1.0 + crate::scale::REL_TOL));
                for (q, d) in ball {
                    if q != p && within(d, self.radius) {
                        out.push((q, d));
                    }
                }
            }
        }
        out
    }
}

fn cloud_distance(a: &[f64], b: &[f64], chebyshev: bool) -> f64 {
    if chebyshev {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    } else {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}

/// Shortest-path ball around `source` up to `radius`, sorted by node index.
/// Sparse bookkeeping keeps small-ball queries cheap on large graphs.
fn truncated_ball(
    adjacency: &[Vec<(u32, f64)>],
    source: u32,
    radius: f64,
) -> Vec<(u32, f64)> {
    let mut dist: HashMap<u32, f64> = HashMap::new();
    dist.insert(source, 0.0);
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(HeapEntry { dist: 0.0, node: source });
    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        if d > dist[&u] {
            continue;
        }
        for &(v, w) in &adjacency[u as usize] {
            let nd = d + w;
            if nd <= radius && dist.get(&v).map_or(true, |&cur| nd < cur) {
                dist.insert(v, nd);
                heap.push(HeapEntry { dist: nd, node: v });
            }
        }
    }
    let mut out: Vec<(u32, f64)> = dist.into_iter().collect();
    out.sort_by_key(|&(node, _)| node);
    out
}

/// Single-source shortest paths, stopping once the frontier exceeds `radius`.
/// Distances beyond the radius come back as +∞.
fn dijkstra(adjacency: &[Vec<(u32, f64)>], source: u32, radius: f64) -> Vec<f64> {
    let n = adjacency.len();
    let mut dist = vec![f64::INFINITY; n];
    dist[source as usize] = 0.0;
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(HeapEntry { dist: 0.0, node: source });
    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        if d > dist[u as usize] {
            continue;
        }
        for &(v, w) in &adjacency[u as usize] {
            let nd = d + w;
            if nd < dist[v as usize] && nd <= radius {
                dist[v as usize] = nd;
                heap.push(HeapEntry { dist: nd, node: v });
            }
        }
    }
    dist
}

struct HeapEntry {
    dist: f64,
    node: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.node == other.node
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // min-heap on distance, ties broken by node for determinism
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.node.cmp(&self.node))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: i64) -> FiniteCoarseInstance {
        let points = (-n..=n)
            .map(|x| (x.to_string(), vec![x as f64]))
            .collect();
        FiniteCoarseInstance::from_cloud(points, MetricKind::Euclidean, "0", n as f64).unwrap()
    }

    fn squares(rho_max: f64) -> FiniteCoarseInstance {
        let mut points = Vec::new();
        let mut n = 0i64;
        while (n * n) as f64 <= rho_max {
            points.push(((n * n).to_string(), vec![(n * n) as f64]));
            n += 1;
        }
        FiniteCoarseInstance::from_cloud(points, MetricKind::Euclidean, "0", rho_max).unwrap()
    }

    fn two_component_graph() -> FiniteCoarseInstance {
        let vertices = vec!["a", "b", "c", "d"].into_iter().map(String::from).collect();
        let edges = vec![
            ("a".into(), "b".into(), 1.0),
            ("c".into(), "d".into(), 2.0),
        ];
        FiniteCoarseInstance::from_graph(vertices, edges, "a", 10.0).unwrap()
    }

    #[test]
    fn line_truncation_is_identity() {
        let inst = line(100);
        assert_eq!(inst.len(), 201);
        assert_eq!(inst.dropped_count(), 0);
    }

    #[test]
    fn squares_count_within_truncation() {
        // independent oracle: enumerate squares <= 1e4
        let expected = (0..).take_while(|n| n * n <= 10_000i64).count();
        assert_eq!(expected, 101);
        let inst = squares(1e4);
        assert_eq!(inst.len(), 101);
    }

    #[test]
    fn truncation_drops_and_reports() {
        let points = (-10..=10)
            .map(|x| (x.to_string(), vec![x as f64]))
            .collect();
        let inst =
            FiniteCoarseInstance::from_cloud(points, MetricKind::Euclidean, "0", 5.0).unwrap();
        assert_eq!(inst.len(), 11);
        assert_eq!(inst.dropped_count(), 10);
    }

    #[test]
    fn missing_basepoint_is_an_error() {
        let points = vec![("1".to_string(), vec![1.0])];
        let err = FiniteCoarseInstance::from_cloud(points, MetricKind::Euclidean, "0", 5.0);
        assert!(matches!(err, Err(Error::MissingBasepoint(_))));
    }

    #[test]
    fn negative_edge_weight_rejected() {
        let err = FiniteCoarseInstance::from_graph(
            vec!["a".into(), "b".into()],
            vec![("a".into(), "b".into(), -1.0)],
            "a",
            10.0,
        );
        assert!(matches!(err, Err(Error::NegativeEdgeWeight { .. })));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(
            FiniteCoarseInstance::from_cloud(Vec::new(), MetricKind::Euclidean, "0", 1.0),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn line_distances() {
        let inst = line(100);
        assert_eq!(inst.distance_by_id("-3", "5").unwrap(), 8.0);
        assert_eq!(inst.distance_by_id("0", "0").unwrap(), 0.0);
        assert!(matches!(
            inst.distance_by_id("0", "999"),
            Err(Error::UnknownPoint(_))
        ));
    }

    #[test]
    fn squares_distance() {
        let inst = squares(1e4);
        assert_eq!(inst.distance_by_id("81", "100").unwrap(), 19.0);
    }

    #[test]
    fn disconnected_graph_distance_is_infinite() {
        let inst = two_component_graph();
        let d = inst.distance_by_id("a", "c").unwrap();
        assert!(d.is_infinite());
        assert_eq!(inst.distance_by_id("a", "b").unwrap(), 1.0);
        assert!(!inst.is_coarsely_connected());
        assert!(line(10).is_coarsely_connected());
    }

    #[test]
    fn graph_truncation_keeps_unreachable_vertices() {
        let inst = two_component_graph();
        assert_eq!(inst.len(), 4);
        assert!(inst.dist_to_base(inst.index("c").unwrap()).is_infinite());
    }

    #[test]
    fn graph_truncation_drops_far_vertices() {
        let vertices: Vec<String> = (0..10).map(|i| i.to_string()).collect();
        let edges = (0..9)
            .map(|i| (i.to_string(), (i + 1).to_string(), 1.0))
            .collect();
        let inst = FiniteCoarseInstance::from_graph(vertices, edges, "0", 4.0).unwrap();
        assert_eq!(inst.len(), 5);
        assert_eq!(inst.dropped_count(), 5);
    }

    #[test]
    fn subset_diameter_examples() {
        let inst = line(100);
        let base = vec![inst.basepoint()];
        assert_eq!(inst.subset_diameter(&base).unwrap(), 0.0);
        let window: Vec<_> = (-10..=10)
            .map(|x| inst.index(&x.to_string()).unwrap())
            .collect();
        assert_eq!(inst.subset_diameter(&window).unwrap(), 20.0);
        assert!(matches!(
            inst.subset_diameter(&[]),
            Err(Error::EmptySubset(_))
        ));

        let graph = two_component_graph();
        let cross = vec![graph.index("a").unwrap(), graph.index("c").unwrap()];
        assert!(graph.subset_diameter(&cross).unwrap().is_infinite());
    }

    #[test]
    fn max_pair_distance_examples() {
        let inst = line(100);
        let pairs: Vec<_> = (-100..100)
            .map(|x| {
                (
                    inst.index(&x.to_string()).unwrap(),
                    inst.index(&(x + 1).to_string()).unwrap(),
                )
            })
            .collect();
        assert_eq!(inst.max_pair_distance(&pairs), 1.0);
        assert_eq!(inst.max_pair_distance(&[]), 0.0);

        // consecutive squares within the 1e4 truncation: largest gap is
        // 100^2 - 99^2 = 199 (oracle: direct enumeration below)
        let sq = squares(1e4);
        let mut pairs = Vec::new();
        let mut oracle_max: f64 = 0.0;
        for n in 0..100i64 {
            let a = n * n;
            let b = (n + 1) * (n + 1);
            pairs.push((
                sq.index(&a.to_string()).unwrap(),
                sq.index(&b.to_string()).unwrap(),
            ));
            oracle_max = oracle_max.max((b - a) as f64);
        }
        assert_eq!(oracle_max, 199.0);
        assert_eq!(sq.max_pair_distance(&pairs), 199.0);
    }

    #[test]
    fn archimedean_line() {
        let inst = line(100);
        let report = inst.archimedean_check(1.0);
        assert!(report.connected);
        assert_eq!(report.max_hops, Some(200));
        // any scale at least the diameter connects everything in one hop
        let report = inst.archimedean_check(200.0);
        assert!(report.connected);
        assert_eq!(report.max_hops, Some(1));
    }

    #[test]
    fn archimedean_squares_blocked() {
        let inst = squares(1e4);
        // gaps 2n+1 exceed 100 from n = 50 on
        let report = inst.archimedean_check(100.0);
        assert!(!report.connected);
        assert_eq!(report.max_hops, None);
    }

    #[test]
    fn annulus_is_open_ball_complement() {
        let inst = line(100);
        let ann = inst.annulus(10.0);
        assert_eq!(ann.len(), 182); // 91 on each side, including ±10
        assert!(ann
            .iter()
            .all(|&p| inst.dist_to_base(p) >= 10.0));
        assert_eq!(inst.annulus(0.0).len(), 201);
    }

    #[test]
    fn neighbor_probe_matches_brute_force() {
        let inst = line(50);
        let probe = inst.neighbor_probe(3.0);
        for p in 0..inst.len() as u32 {
            let fast = probe.neighbors(p);
            let slow: Vec<_> = (0..inst.len() as u32)
                .filter(|&q| q != p && within(inst.distance(p, q), 3.0))
                .map(|q| (q, inst.distance(p, q)))
                .collect();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn capped_distance_agrees_with_full() {
        let vertices: Vec<String> = (0..30).map(|i| i.to_string()).collect();
        let edges = (0..29)
            .map(|i| (i.to_string(), (i + 1).to_string(), 1.5))
            .collect();
        let inst = FiniteCoarseInstance::from_graph(vertices, edges, "0", 100.0).unwrap();
        let p = inst.index("3").unwrap();
        let q = inst.index("11").unwrap();
        assert_eq!(inst.distance_capped(p, q, 20.0), Some(12.0));
        assert_eq!(inst.distance_capped(p, q, 5.0), None);

        let graph = two_component_graph();
        let a = graph.index("a").unwrap();
        let c = graph.index("c").unwrap();
        assert_eq!(graph.distance_capped(a, c, 1e9), None);
    }

    #[test]
    fn chebyshev_metric() {
        let points = vec![
            ("o".to_string(), vec![0.0, 0.0]),
            ("p".to_string(), vec![3.0, 4.0]),
        ];
        let inst =
            FiniteCoarseInstance::from_cloud(points, MetricKind::Chebyshev, "o", 10.0).unwrap();
        assert_eq!(inst.distance_by_id("o", "p").unwrap(), 4.0);
    }

    #[test]
    fn duplicate_points_at_distance_zero_allowed() {
        let points = vec![
            ("a".to_string(), vec![0.0]),
            ("b".to_string(), vec![0.0]),
            ("c".to_string(), vec![1.0]),
        ];
        let inst =
            FiniteCoarseInstance::from_cloud(points, MetricKind::Euclidean, "a", 5.0).unwrap();
        assert_eq!(inst.distance_by_id("a", "b").unwrap(), 0.0);
        // distinct ids at distance zero are fine; equal ids are not
        let dup = vec![
            ("a".to_string(), vec![0.0]),
            ("a".to_string(), vec![1.0]),
        ];
        assert!(matches!(
            FiniteCoarseInstance::from_cloud(dup, MetricKind::Euclidean, "a", 5.0),
            Err(Error::DuplicateId(_))
        ));
    }
}
