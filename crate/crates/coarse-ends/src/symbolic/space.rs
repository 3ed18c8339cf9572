//! Parametric spaces and symbolic points.
//!
//! A symbolic point has polynomial coordinates in the unbounded parameter t
//! and stands for the family of its evaluations at large t; a parametric
//! space is a finite union of pieces — polynomial rays, bounded affine
//! segments, or a full integer lattice — with a constant basepoint.
//! Membership of point formulas on affine pieces is decided exactly by
//! solving the piece's defining equations; non-affine pieces fall back to
//! declared sampling.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{rat_serde, rational_to_f64, Poly};
use super::poly2::{nonneg_on_strip, Poly2};
use crate::error::{Error, Result};

/// A point of the extension: polynomial coordinates valid for t >= t0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicPoint {
    pub coords: Vec<Poly>,
    #[serde(with = "rat_serde")]
    pub t0: BigRational,
}

impl SymbolicPoint {
    pub fn new(coords: Vec<Poly>, t0: BigRational) -> Self {
        Self { coords, t0 }
    }

    pub fn constant(values: &[i64]) -> Self {
        Self {
            coords: values.iter().map(|&v| Poly::from_int(v)).collect(),
            t0: BigRational::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_constant(&self) -> bool {
        self.coords.iter().all(|c| c.is_bounded())
    }

    pub fn eval_f64(&self, t: f64) -> Vec<f64> {
        self.coords.iter().map(|c| c.eval_f64(t)).collect()
    }
}

/// Squared Euclidean distance as a polynomial in t.
pub fn squared_distance(p: &SymbolicPoint, q: &SymbolicPoint) -> Result<Poly> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(p.dim(), q.dim()));
    }
    let mut acc = Poly::zero();
    for (a, b) in p.coords.iter().zip(&q.coords) {
        let d = a - b;
        acc = &acc + &(&d * &d);
    }
    Ok(acc)
}

/// Two symbolic points stay within a fixed bound of each other for large t:
/// the squared-distance polynomial is bounded as a germ.
pub fn finitely_close(p: &SymbolicPoint, q: &SymbolicPoint) -> Result<bool> {
    Ok(squared_distance(p, q)?.is_bounded())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceMetric {
    Euclidean,
    Sup,
}

/// One piece of a parametric space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Piece {
    /// u ∈ [from, ∞) with polynomial coordinates in u.
    Ray {
        name: String,
        coords: Vec<Poly>,
        #[serde(with = "rat_serde")]
        from: BigRational,
    },
    /// u ∈ [from, to] with affine coordinates in u.
    Segment {
        name: String,
        coords: Vec<Poly>,
        #[serde(with = "rat_serde")]
        from: BigRational,
        #[serde(with = "rat_serde")]
        to: BigRational,
    },
    /// All of ℤ^dim.
    Lattice { name: String, dim: usize },
}

impl Piece {
    pub fn name(&self) -> &str {
        match self {
            Piece::Ray { name, .. } | Piece::Segment { name, .. } | Piece::Lattice { name, .. } => {
                name
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Piece::Ray { coords, .. } | Piece::Segment { coords, .. } => coords.len(),
            Piece::Lattice { dim, .. } => *dim,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, Piece::Ray { .. } | Piece::Lattice { .. })
    }

    /// Affine decomposition (anchor, direction) when every coordinate has
    /// degree <= 1 in the piece parameter.
    pub fn affine_parts(&self) -> Option<(Vec<BigRational>, Vec<BigRational>)> {
        match self {
            Piece::Ray { coords, .. } | Piece::Segment { coords, .. } => {
                if coords.iter().any(|c| c.degree().map_or(false, |d| d > 1)) {
                    return None;
                }
                let anchor = coords.iter().map(|c| c.coeff(0)).collect();
                let dir = coords.iter().map(|c| c.coeff(1)).collect();
                Some((anchor, dir))
            }
            Piece::Lattice { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricSpace {
    pub name: String,
    pub dim: usize,
    pub metric: SpaceMetric,
    pub basepoint: SymbolicPoint,
    pub pieces: Vec<Piece>,
}

impl ParametricSpace {
    /// Validates dimensions, the constant basepoint, and that the basepoint
    /// lies on some piece.
    pub fn validate(&self) -> Result<()> {
        if !self.basepoint.is_constant() {
            return Err(Error::InvalidRecipe(
                "space basepoint must have constant coordinates".into(),
            ));
        }
        if self.basepoint.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, self.basepoint.dim()));
        }
        for piece in &self.pieces {
            if piece.dim() != self.dim {
                return Err(Error::DimensionMismatch(self.dim, piece.dim()));
            }
        }
        if !point_on_space(&self.basepoint, self).holds() {
            return Err(Error::PointNotOnSpace("basepoint".into()));
        }
        Ok(())
    }

    pub fn piece(&self, name: &str) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.name() == name)
    }
}

/// Outcome of a membership check.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Membership {
    Holds { sampled: bool },
    Fails { reason: String },
}

impl Membership {
    pub fn holds(&self) -> bool {
        matches!(self, Membership::Holds { .. })
    }

    pub fn sampled(&self) -> bool {
        matches!(self, Membership::Holds { sampled: true })
    }

    fn fails(reason: impl Into<String>) -> Self {
        Membership::Fails { reason: reason.into() }
    }
}

/// Does the point family `coords` (polynomials in t and a step index k with
/// 0 <= k <= m(t), t >= t0) stay on `piece` for all valid arguments?
///
/// Affine pieces are decided exactly: solve for the piece parameter from a
/// pivot coordinate, check the remaining defining equations as polynomial
/// identities, and verify the parameter range. The lattice accepts exactly
/// the integer-coefficient formulas (t and k range over integers).
pub fn formula_on_piece(
    coords: &[Poly2],
    t0: &BigRational,
    m: &Poly,
    piece: &Piece,
) -> Membership {
    if coords.len() != piece.dim() {
        return Membership::fails("dimension mismatch");
    }
    match piece {
        Piece::Lattice { .. } => {
            if coords.iter().all(|c| c.has_integer_coeffs()) {
                Membership::Holds { sampled: false }
            } else {
                Membership::fails("non-integer coefficients off the lattice")
            }
        }
        Piece::Ray { .. } | Piece::Segment { .. } => {
            let Some((anchor, dir)) = piece.affine_parts() else {
                return sampled_membership(coords, t0, m, piece);
            };
            // pivot: first coordinate moving along the piece
            let pivot = dir.iter().position(|b| !b.is_zero());
            let param = match pivot {
                Some(i) => {
                    let shifted =
                        &coords[i] - &Poly2::from_t(Poly::constant(anchor[i].clone()));
                    scale_poly2(&shifted, &(BigRational::from_integer(1.into()) / &dir[i]))
                }
                None => Poly2::zero(), // degenerate point piece
            };
            for j in 0..coords.len() {
                let expected = &Poly2::from_t(Poly::constant(anchor[j].clone()))
                    + &scale_poly2(&param, &dir[j]);
                if &coords[j] - &expected != Poly2::zero() {
                    return Membership::fails(format!(
                        "coordinate {} violates the defining equations of `{}`",
                        j,
                        piece.name()
                    ));
                }
            }
            // parameter range
            let mut sampled = false;
            let lower = match piece {
                Piece::Ray { from, .. } | Piece::Segment { from, .. } => from.clone(),
                Piece::Lattice { .. } => unreachable!(),
            };
            let low_check = nonneg_on_strip(
                &(&param - &Poly2::from_t(Poly::constant(lower))),
                t0,
                m,
            );
            if !low_check.holds() {
                return Membership::fails(format!(
                    "parameter drops below the start of `{}`",
                    piece.name()
                ));
            }
            sampled |= low_check.sampled();
            if let Piece::Segment { to, .. } = piece {
                let high_check = nonneg_on_strip(
                    &(&Poly2::from_t(Poly::constant(to.clone())) - &param),
                    t0,
                    m,
                );
                if !high_check.holds() {
                    return Membership::fails(format!(
                        "parameter overruns the end of `{}`",
                        piece.name()
                    ));
                }
                sampled |= high_check.sampled();
            }
            Membership::Holds { sampled }
        }
    }
}

fn scale_poly2(p: &Poly2, s: &BigRational) -> Poly2 {
    Poly2::new(p.coeffs_k().iter().map(|c| c.scale(s)).collect())
}

/// Dense-sample fallback for non-affine rays: nearest-parameter scan per
/// sampled (t, k).
fn sampled_membership(
    coords: &[Poly2],
    t0: &BigRational,
    m: &Poly,
    piece: &Piece,
) -> Membership {
    let (piece_coords, from) = match piece {
        Piece::Ray { coords, from, .. } => (coords, rational_to_f64(from)),
        Piece::Segment { coords, from, .. } => (coords, rational_to_f64(from)),
        Piece::Lattice { .. } => unreachable!(),
    };
    let t_start = rational_to_f64(t0);
    for step in 0..40 {
        let t = t_start + (step * 7) as f64;
        let top = m.eval_f64(t).max(0.0);
        for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let k = (top * frac).floor();
            let point: Vec<f64> = coords.iter().map(|c| c.eval_f64(t, k)).collect();
            // coarse scan then refine
            let eval_piece = |u: f64| -> f64 {
                piece_coords
                    .iter()
                    .zip(&point)
                    .map(|(c, &x)| (c.eval_f64(u) - x).powi(2))
                    .sum()
            };
            let mut best = (from, eval_piece(from));
            let span = (point.iter().map(|x| x.abs()).fold(1.0, f64::max)) * 4.0;
            let n_steps = 4000;
            for i in 0..=n_steps {
                let u = from + span * i as f64 / n_steps as f64;
                let v = eval_piece(u);
                if v < best.1 {
                    best = (u, v);
                }
            }
            // local refinement
            let mut width = span / n_steps as f64;
            for _ in 0..60 {
                for cand in [best.0 - width, best.0 + width] {
                    let cand = cand.max(from);
                    let v = eval_piece(cand);
                    if v < best.1 {
                        best = (cand, v);
                    }
                }
                width *= 0.5;
            }
            let scale = point.iter().map(|x| x * x).sum::<f64>().max(1.0);
            if best.1 > 1e-12 * scale {
                return Membership::fails(format!(
                    "sampled point at t={}, k={} misses `{}`",
                    t,
                    k,
                    piece.name()
                ));
            }
        }
    }
    Membership::Holds { sampled: true }
}

/// Membership of a point family on the whole space. Constant small step
/// counts are checked pointwise per k (each instance may sit on a different
/// piece); parametric families must fit a single piece.
pub fn formula_on_space(
    coords: &[Poly2],
    t0: &BigRational,
    m: &Poly,
    space: &ParametricSpace,
) -> Membership {
    if let Some(value) = constant_value(m) {
        if value >= 0 && value <= 64 {
            let mut sampled = false;
            for k in 0..=value {
                let kq = BigRational::from_integer(k.into());
                let point: Vec<Poly2> = coords
                    .iter()
                    .map(|c| Poly2::from_t(c.subst_k_value(&kq)))
                    .collect();
                match first_piece_holding(&point, t0, &Poly::zero(), space) {
                    Some(membership) => sampled |= membership.sampled(),
                    None => {
                        return Membership::fails(format!(
                            "chain point at k={} lies on no piece",
                            k
                        ))
                    }
                }
            }
            return Membership::Holds { sampled };
        }
    }
    match first_piece_holding(coords, t0, m, space) {
        Some(membership) => membership,
        None => Membership::fails("family lies on no single piece"),
    }
}

fn first_piece_holding(
    coords: &[Poly2],
    t0: &BigRational,
    m: &Poly,
    space: &ParametricSpace,
) -> Option<Membership> {
    space
        .pieces
        .iter()
        .map(|piece| formula_on_piece(coords, t0, m, piece))
        .find(|membership| membership.holds())
}

fn constant_value(m: &Poly) -> Option<i64> {
    if m.is_zero() {
        return Some(0);
    }
    if m.degree() == Some(0) {
        let c = m.coeff(0);
        if c.is_integer() {
            return c.to_integer().to_i64();
        }
    }
    None
}

/// Membership of a single symbolic point (no step index) on the space.
pub fn point_on_space(point: &SymbolicPoint, space: &ParametricSpace) -> Membership {
    let coords: Vec<Poly2> = point.coords.iter().cloned().map(Poly2::from_t).collect();
    match first_piece_holding(&coords, &point.t0, &Poly::zero(), space) {
        Some(m) => m,
        None => Membership::fails("point lies on no piece"),
    }
}

/// The piece a symbolic point sits on, if any (first match).
pub fn piece_of_point<'s>(
    point: &SymbolicPoint,
    space: &'s ParametricSpace,
) -> Option<&'s Piece> {
    let coords: Vec<Poly2> = point.coords.iter().cloned().map(Poly2::from_t).collect();
    space
        .pieces
        .iter()
        .find(|piece| formula_on_piece(&coords, &point.t0, &Poly::zero(), piece).holds())
}

/// Infinite relative to the basepoint: on the space, with unbounded
/// basepoint distance.
pub fn is_infinite(point: &SymbolicPoint, space: &ParametricSpace) -> Result<bool> {
    if point.dim() != space.dim {
        return Err(Error::DimensionMismatch(space.dim, point.dim()));
    }
    if !point_on_space(point, space).holds() {
        return Err(Error::PointNotOnSpace(format!(
            "({})",
            point
                .coords
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    Ok(!squared_distance(point, &space.basepoint)?.is_bounded())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::fixtures::{line_space, vase_space};
    use num_traits::One;

    fn t() -> Poly {
        Poly::var()
    }

    fn one() -> BigRational {
        BigRational::one()
    }

    #[test]
    fn finite_closeness_examples() {
        let p = SymbolicPoint::new(vec![t(), t()], one());
        let q = SymbolicPoint::new(vec![Poly::from_ints(&[1, 1]), t()], one());
        assert!(finitely_close(&p, &q).unwrap()); // distance 1
        let r = SymbolicPoint::new(vec![-&t(), t()], one());
        assert!(!finitely_close(&p, &r).unwrap()); // distance 2t
        let a = SymbolicPoint::new(vec![Poly::from_int(-1), t()], one());
        let b = SymbolicPoint::new(vec![Poly::from_int(1), t()], one());
        assert!(finitely_close(&a, &b).unwrap()); // distance 2
        let bad = SymbolicPoint::new(vec![t()], one());
        assert!(finitely_close(&p, &bad).is_err());
    }

    #[test]
    fn infinite_points_on_the_line() {
        let space = line_space();
        space.validate().unwrap();
        let p = SymbolicPoint::new(vec![t()], one());
        assert!(is_infinite(&p, &space).unwrap());
        let c = SymbolicPoint::constant(&[7]);
        assert!(!is_infinite(&c, &space).unwrap());
        // off the vase for large t
        let vase = vase_space();
        let off = SymbolicPoint::new(vec![t(), Poly::from_int(1)], one());
        assert!(matches!(
            is_infinite(&off, &vase),
            Err(Error::PointNotOnSpace(_))
        ));
    }

    #[test]
    fn membership_on_affine_pieces() {
        let vase = vase_space();
        let left = SymbolicPoint::new(vec![Poly::from_int(-1), t()], one());
        assert_eq!(
            piece_of_point(&left, &vase).map(|p| p.name()),
            Some("left_arm")
        );
        let base_pt = SymbolicPoint::new(
            vec![
                Poly::constant(BigRational::new(1.into(), 2.into())),
                Poly::from_int(1),
            ],
            BigRational::zero(),
        );
        assert_eq!(piece_of_point(&base_pt, &vase).map(|p| p.name()), Some("base"));
        // beyond the segment range
        let outside = SymbolicPoint::constant(&[2, 1]);
        assert!(piece_of_point(&outside, &vase).is_none());
    }

    #[test]
    fn diagonal_family_membership() {
        // arm {(y, y) : y >= 0}; family (t + k, t + k) with k <= t^2 - t
        let arm = Piece::Ray {
            name: "diag".into(),
            coords: vec![Poly::var(), Poly::var()],
            from: BigRational::zero(),
        };
        let f = Poly2::new(vec![Poly::var(), Poly::from_int(1)]); // t + k
        let coords = vec![f.clone(), f];
        let m = Poly::from_ints(&[0, -1, 1]); // t^2 - t
        assert!(formula_on_piece(&coords, &one(), &m, &arm).holds());
        // (k, t) does not keep the second coordinate on the x-axis
        let axis = Piece::Ray {
            name: "x_axis".into(),
            coords: vec![Poly::var(), Poly::zero()],
            from: BigRational::zero(),
        };
        let bad = vec![
            Poly2::var_k(),
            Poly2::from_t(Poly::var()),
        ];
        assert!(!formula_on_piece(&bad, &one(), &m, &axis).holds());
    }

    #[test]
    fn lattice_membership_needs_integer_coefficients() {
        let lattice = Piece::Lattice { name: "grid".into(), dim: 2 };
        let ok = vec![
            &Poly2::from_t(Poly::var()) - &Poly2::var_k(),
            Poly2::from_t(Poly::var()),
        ];
        assert!(formula_on_piece(&ok, &one(), &Poly::from_ints(&[0, 2]), &lattice).holds());
        let half = Poly2::from_t(Poly::constant(BigRational::new(1.into(), 2.into())));
        let bad = vec![half, Poly2::from_t(Poly::var())];
        assert!(!formula_on_piece(&bad, &one(), &Poly::from_ints(&[0, 2]), &lattice).holds());
    }

    #[test]
    fn per_step_membership_across_pieces() {
        // the single-step vase crossing sits on different arms at k = 0, 1
        let vase = vase_space();
        let coords = vec![
            &Poly2::from_t(Poly::from_int(-1))
                + &scale_poly2(&Poly2::var_k(), &BigRational::from_integer(2.into())),
            Poly2::from_t(Poly::var()),
        ];
        let m = Poly::from_int(1);
        assert!(formula_on_space(&coords, &one(), &m, &vase).holds());
    }

    #[test]
    fn space_serde_round_trip() {
        let vase = vase_space();
        let json = serde_json::to_string_pretty(&vase).unwrap();
        let back: ParametricSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vase);
    }
}
