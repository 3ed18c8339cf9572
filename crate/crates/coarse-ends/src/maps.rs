//! Sampled maps between instances and their scale-level diagnostics.
//!
//! A map sample is a total assignment of source points to target points
//! sending the source basepoint finitely close to the target basepoint.
//! The diagnostics mirror the classical conditions on coarse maps: the
//! bornologous modulus bounds image displacement per scale, the properness
//! table bounds preimages of balls around the target basepoint, and the
//! homotopy distance is the uniform distance between two maps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{FiniteCoarseInstance, PointIndex};
use crate::scale::{at_least, within, ScaleLadder};

/// Fraction of the truncation radius reserved as the escape shell; preimages
/// of ladder balls must stay out of it for a map to count as proper at scale.
pub const DEFAULT_MARGIN: f64 = 0.1;

pub struct CoarseMapSample<'a> {
    source: &'a FiniteCoarseInstance,
    target: &'a FiniteCoarseInstance,
    assignment: Vec<PointIndex>,
}

/// Per-scale supremum of image displacement over pairs within the scale.
#[derive(Debug, Clone, Serialize)]
pub struct BornologousReport {
    /// `(scale, modulus)` rows; the modulus is +∞ when some pair stretches
    /// to an unreachable target pair.
    pub per_scale: Vec<(f64, f64)>,
}

impl BornologousReport {
    pub fn modulus_at(&self, idx: usize) -> f64 {
        self.per_scale[idx].1
    }

    /// False when any modulus is infinite (the failure marker).
    pub fn is_finite(&self) -> bool {
        self.per_scale.iter().all(|&(_, s)| s.is_finite())
    }
}

/// Per-cut-off maximum source radius of the preimage of the target ball.
#[derive(Debug, Clone, Serialize)]
pub struct PropernessReport {
    /// `(cutoff, preimage_radius)` rows; `None` when the preimage is empty.
    pub per_cutoff: Vec<(f64, Option<f64>)>,
    /// Preimages of all ladder balls stay out of the source escape shell.
    pub proper_at_scale: bool,
    /// The shell radius used for the flag: (1 - margin) * rho_max.
    pub shell_radius: f64,
}

impl<'a> CoarseMapSample<'a> {
    /// Wraps a raw assignment (source index -> target index) after checking
    /// totality and that the basepoint lands finitely close to the target
    /// basepoint.
    pub fn new(
        source: &'a FiniteCoarseInstance,
        target: &'a FiniteCoarseInstance,
        assignment: Vec<PointIndex>,
    ) -> Result<Self> {
        if assignment.len() != source.len() {
            return Err(Error::InvalidMap(format!(
                "assignment covers {} of {} source points",
                assignment.len(),
                source.len()
            )));
        }
        if let Some(&bad) = assignment.iter().find(|&&t| t as usize >= target.len()) {
            return Err(Error::InvalidMap(format!(
                "assignment hits target index {} out of {}",
                bad,
                target.len()
            )));
        }
        let image_of_base = assignment[source.basepoint() as usize];
        let d = target.dist_to_base(image_of_base);
        if !d.is_finite() {
            return Err(Error::InvalidMap(
                "basepoint image is not finitely close to the target basepoint".into(),
            ));
        }
        Ok(Self { source, target, assignment })
    }

    /// The identity sample on an instance.
    pub fn identity(instance: &'a FiniteCoarseInstance) -> Self {
        Self {
            source: instance,
            target: instance,
            assignment: (0..instance.len() as PointIndex).collect(),
        }
    }

    /// Builds the assignment by matching point ids through `rename`
    /// (identity rename gives subspace inclusions).
    pub fn by_ids(
        source: &'a FiniteCoarseInstance,
        target: &'a FiniteCoarseInstance,
        rename: impl Fn(&str) -> String,
    ) -> Result<Self> {
        let assignment = source
            .ids()
            .map(|id| target.index(&rename(id)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, assignment)
    }

    /// Maps a cloud source into a cloud target by applying `f` to
    /// coordinates and snapping to the nearest target point (ties broken by
    /// smallest index).
    pub fn nearest_point_map(
        source: &'a FiniteCoarseInstance,
        target: &'a FiniteCoarseInstance,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let dim = target
            .dim()
            .ok_or_else(|| Error::InvalidMap("nearest-point maps need a cloud target".into()))?;
        let mut assignment = Vec::with_capacity(source.len());
        for p in 0..source.len() as PointIndex {
            let c = source
                .coords(p)
                .ok_or_else(|| Error::InvalidMap("nearest-point maps need a cloud source".into()))?;
            let image = f(c);
            if image.len() != dim {
                return Err(Error::DimensionMismatch(dim, image.len()));
            }
            let mut best = (0u32, f64::INFINITY);
            for q in 0..target.len() as PointIndex {
                let t = target.coords(q).unwrap();
                let d: f64 = image
                    .iter()
                    .zip(t)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                if d < best.1 {
                    best = (q, d);
                }
            }
            assignment.push(best.0);
        }
        Self::new(source, target, assignment)
    }

    pub fn source(&self) -> &'a FiniteCoarseInstance {
        self.source
    }

    pub fn target(&self) -> &'a FiniteCoarseInstance {
        self.target
    }

    pub fn apply(&self, p: PointIndex) -> PointIndex {
        self.assignment[p as usize]
    }

    /// Composition g ∘ f; `f.target` and `g.source` must be the same
    /// instance.
    pub fn compose(f: &CoarseMapSample<'a>, g: &CoarseMapSample<'a>) -> Result<CoarseMapSample<'a>> {
        if !std::ptr::eq(f.target, g.source) {
            return Err(Error::MismatchedInstances(
                "composition: inner instances differ".into(),
            ));
        }
        let assignment = f.assignment.iter().map(|&y| g.assignment[y as usize]).collect();
        CoarseMapSample::new(f.source, g.target, assignment)
    }

    /// For each ladder scale R, the supremum S(R) of target displacement
    /// over source pairs within R. Monotone in R by construction; +∞ entries
    /// mark failure.
    pub fn bornologous_modulus(&self, ladder: &ScaleLadder) -> BornologousReport {
        let scales = ladder.scales();
        let top = *scales.last().unwrap();
        let edges = self.source.edges_within(top);
        // image displacement per source pair, computed once
        let stretched: Vec<(f64, f64)> = edges
            .iter()
            .map(|&(u, v, d)| {
                let fu = self.assignment[u as usize];
                let fv = self.assignment[v as usize];
                let image = if fu == fv {
                    0.0
                } else {
                    self.target.distance_escalating(fu, fv, d.max(1.0))
                };
                (d, image)
            })
            .collect();
        let per_scale = scales
            .iter()
            .map(|&r| {
                let sup = stretched
                    .iter()
                    .filter(|&&(d, _)| within(d, r))
                    .map(|&(_, s)| s)
                    .fold(0.0f64, f64::max);
                (r, sup)
            })
            .collect();
        BornologousReport { per_scale }
    }

    /// For each ladder cut-off r, the largest source-basepoint distance over
    /// the preimage of the target ball B(η, r). The map is flagged proper at
    /// scale when all these radii stay out of the source escape shell.
    pub fn properness_report(&self, ladder: &ScaleLadder) -> PropernessReport {
        self.properness_report_with_margin(ladder, DEFAULT_MARGIN)
    }

    pub fn properness_report_with_margin(
        &self,
        ladder: &ScaleLadder,
        margin: f64,
    ) -> PropernessReport {
        let image_radius: Vec<f64> = (0..self.source.len())
            .map(|p| self.target.dist_to_base(self.assignment[p]))
            .collect();
        let shell_radius = (1.0 - margin) * self.source.rho_max();
        let mut proper = true;
        let per_cutoff = ladder
            .cutoffs()
            .iter()
            .map(|&r| {
                let mut radius: Option<f64> = None;
                for p in 0..self.source.len() {
                    if within(image_radius[p], r) {
                        let d = self.source.dist_to_base(p as PointIndex);
                        radius = Some(radius.map_or(d, |cur: f64| cur.max(d)));
                    }
                }
                if let Some(rad) = radius {
                    if !rad.is_finite() || at_least(rad, shell_radius) {
                        proper = false;
                    }
                }
                (r, radius)
            })
            .collect();
        PropernessReport { per_cutoff, proper_at_scale: proper, shell_radius }
    }

    /// Smallest target-basepoint distance over images of the source annulus
    /// at `cutoff`; +∞ when the annulus is empty. This is the exact quantity
    /// controlling which target annulus an induced component map may use.
    pub fn min_image_radius(&self, cutoff: f64) -> f64 {
        self.source
            .annulus(cutoff)
            .iter()
            .map(|&p| self.target.dist_to_base(self.assignment[p as usize]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Supremum over source points of d(f x, g x); the two samples must share
/// both instances. Finite values witness coarse homotopy at that bound.
pub fn homotopy_distance(f: &CoarseMapSample, g: &CoarseMapSample) -> Result<f64> {
    if !std::ptr::eq(f.source, g.source) || !std::ptr::eq(f.target, g.target) {
        return Err(Error::MismatchedInstances(
            "homotopy distance needs a common source and target".into(),
        ));
    }
    let mut sup = 0.0f64;
    for p in 0..f.source.len() {
        let a = f.assignment[p];
        let b = g.assignment[p];
        if a != b {
            sup = sup.max(f.target.distance_escalating(a, b, 4.0));
        }
        if sup.is_infinite() {
            break;
        }
    }
    Ok(sup)
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

    fn fine_line(n: i64, step: f64) -> FiniteCoarseInstance {
        let k = (n as f64 / step).round() as i64;
        let points = (-k..=k)
            .map(|i| (i.to_string(), vec![i as f64 * step]))
            .collect();
        FiniteCoarseInstance::from_cloud(points, MetricKind::Euclidean, "0", n as f64).unwrap()
    }

    fn ladder(rho: f64) -> ScaleLadder {
        ScaleLadder::default_for(rho).unwrap()
    }

    #[test]
    fn identity_modulus_equals_scale() {
        let inst = line(100);
        let f = CoarseMapSample::identity(&inst);
        let report = f.bornologous_modulus(&ladder(100.0));
        for &(r, s) in &report.per_scale {
            assert_eq!(s, r.floor()); // integer grid: sup over pairs within r
        }
        assert!(report.is_finite());
    }

    #[test]
    fn rounding_map_modulus_bounded_by_scale_plus_one() {
        let src = fine_line(100, 0.1);
        let tgt = line(100);
        let f = CoarseMapSample::nearest_point_map(&src, &tgt, |c| vec![c[0]]).unwrap();
        let report = f.bornologous_modulus(&ladder(100.0));
        for &(r, s) in &report.per_scale {
            assert!(s <= r + 1.0 + 1e-9, "S({}) = {}", r, s);
            assert!(s >= r - 1.0); // rounding cannot contract much either
        }
    }

    #[test]
    fn collapsing_map_modulus_is_zero() {
        let inst = line(100);
        let base = inst.basepoint();
        let f =
            CoarseMapSample::new(&inst, &inst, vec![base; inst.len()]).unwrap();
        let report = f.bornologous_modulus(&ladder(100.0));
        assert!(report.per_scale.iter().all(|&(_, s)| s == 0.0));
    }

    #[test]
    fn modulus_monotone_in_scale() {
        let src = fine_line(50, 0.5);
        let tgt = line(50);
        let f = CoarseMapSample::nearest_point_map(&src, &tgt, |c| vec![c[0] * 0.7]).unwrap();
        let report = f.bornologous_modulus(&ladder(50.0));
        for w in report.per_scale.windows(2) {
            assert!(w[0].1 <= w[1].1);
        }
    }

    #[test]
    fn properness_identity_and_constant_and_inclusion() {
        let inst = line(100);
        let lad = ladder(100.0);

        let id = CoarseMapSample::identity(&inst);
        let report = id.properness_report(&lad);
        assert!(report.proper_at_scale);
        for &(r, radius) in &report.per_cutoff {
            assert_eq!(radius, Some(r.floor())); // integer grid
        }

        let base = inst.basepoint();
        let constant = CoarseMapSample::new(&inst, &inst, vec![base; inst.len()]).unwrap();
        let report = constant.properness_report(&lad);
        assert!(!report.proper_at_scale);
        for &(_, radius) in &report.per_cutoff {
            assert_eq!(radius, Some(100.0)); // whole window in every preimage
        }

        // subspace inclusion of the squares into the line
        let mut pts = Vec::new();
        let mut n = 0i64;
        while n * n <= 100 {
            pts.push(((n * n).to_string(), vec![(n * n) as f64]));
            n += 1;
        }
        let squares =
            FiniteCoarseInstance::from_cloud(pts, MetricKind::Euclidean, "0", 100.0).unwrap();
        let incl = CoarseMapSample::by_ids(&squares, &inst, |id| id.to_string()).unwrap();
        let report = incl.properness_report(&lad);
        assert!(report.proper_at_scale);
        for &(r, radius) in &report.per_cutoff {
            if let Some(rad) = radius {
                assert!(rad <= r + 1e-9);
            }
        }
    }

    #[test]
    fn homotopy_distance_examples() {
        let inst = line(100);
        let f = CoarseMapSample::identity(&inst);
        let g = CoarseMapSample::identity(&inst);
        assert_eq!(homotopy_distance(&f, &g).unwrap(), 0.0);

        // shift by 3, snapped inside the window
        let shift = CoarseMapSample::nearest_point_map(&inst, &inst, |c| vec![c[0] + 3.0]).unwrap();
        let d = homotopy_distance(&f, &shift).unwrap();
        assert_eq!(d, 3.0);

        // identity vs doubling, both into the wider window [-200, 200]
        let wide = line(200);
        let include = CoarseMapSample::nearest_point_map(&inst, &wide, |c| vec![c[0]]).unwrap();
        let double =
            CoarseMapSample::nearest_point_map(&inst, &wide, |c| vec![2.0 * c[0]]).unwrap();
        assert_eq!(homotopy_distance(&include, &double).unwrap(), 100.0);

        let other = line(50);
        let h = CoarseMapSample::identity(&other);
        assert!(homotopy_distance(&f, &h).is_err());
    }

    #[test]
    fn composition_matches_pointwise() {
        let a = line(50);
        let b = line(100);
        let c = line(200);
        let f = CoarseMapSample::nearest_point_map(&a, &b, |p| vec![p[0] * 2.0]).unwrap();
        let g = CoarseMapSample::nearest_point_map(&b, &c, |p| vec![p[0] + 5.0]).unwrap();
        let gf = CoarseMapSample::compose(&f, &g).unwrap();
        for p in 0..a.len() as u32 {
            assert_eq!(gf.apply(p), g.apply(f.apply(p)));
        }
        assert!(CoarseMapSample::compose(&g, &f).is_err());
    }

    #[test]
    fn total_assignment_required() {
        let inst = line(10);
        assert!(matches!(
            CoarseMapSample::new(&inst, &inst, vec![0; 3]),
            Err(Error::InvalidMap(_))
        ));
    }
}
