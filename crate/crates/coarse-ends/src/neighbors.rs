//! Fixed-radius neighbor enumeration.
//!
//! Point clouds use a uniform grid of cells with side equal to the query
//! radius, so a query only inspects the 3^d adjacent cells. Graph instances
//! grow a truncated shortest-path ball from the source instead. Both paths
//! return neighbors sorted by point index so downstream traversals are
//! deterministic.

use std::collections::HashMap;

pub(crate) struct GridBuckets {
    cell: f64,
    dim: usize,
    map: HashMap<Vec<i64>, Vec<u32>>,
}

impl GridBuckets {
    pub(crate) fn build(coords: &[f64], dim: usize, cell: f64) -> Self {
        assert!(cell > 0.0);
        let n = coords.len() / dim;
        let mut map: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
        let mut key = vec![0i64; dim];
        for i in 0..n {
            for (a, &x) in key.iter_mut().zip(&coords[i * dim..(i + 1) * dim]) {
                *a = (x / cell).floor() as i64;
            }
            map.entry(key.clone()).or_default().push(i as u32);
        }
        Self { cell, dim, map }
    }

    /// Calls `f` for every point whose cell is within one cell of `p`'s in
    /// every axis. Distances still have to be checked by the caller.
    pub(crate) fn for_each_candidate<F: FnMut(u32)>(&self, point: &[f64], mut f: F) {
        let base: Vec<i64> = point.iter().map(|&x| (x / self.cell).floor() as i64).collect();
        let mut offset = vec![-1i64; self.dim];
        let mut key = vec![0i64; self.dim];
        loop {
            for i in 0..self.dim {
                key[i] = base[i] + offset[i];
            }
            if let Some(pts) = self.map.get(&key) {
                for &p in pts {
                    f(p);
                }
            }
            // advance the -1..=1 offset counter
            let mut axis = 0;
            loop {
                if axis == self.dim {
                    return;
                }
                offset[axis] += 1;
                if offset[axis] <= 1 {
                    break;
                }
                offset[axis] = -1;
                axis += 1;
            }
        }
    }
}
