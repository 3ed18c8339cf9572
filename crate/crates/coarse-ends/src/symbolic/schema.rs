//! Chain schemas: parametric families of step-bounded chains.
//!
//! A schema describes, for every parameter value t >= t0, a finite chain
//! from one symbolic point to another whose steps stay within the scale and
//! whose points stay on the space and at least g(t) from the basepoint.
//! Verifying the schema once certifies the whole family; instantiating it at
//! a concrete t yields an ordinary finite chain, which the soundness tests
//! re-check numerically.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{nonneg_on_ray, rat_serde, Poly, RayVerdict};
use super::poly2::{nonneg_on_strip, DomainVerdict, Poly2};
use super::space::{formula_on_space, Membership, ParametricSpace, SpaceMetric};
use crate::error::{Error, Result};

/// One leg of a chain schema: a point formula in (t, k) with k ranging over
/// 0..=steps(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaSegment {
    pub point: Vec<Poly2>,
    /// Step count m(t): nonnegative-integer-valued with m(t) >= 1.
    pub steps: Poly,
    /// Optional escape witness: the signed coordinate that alone clears the
    /// escape bound (required shape for sup-metric spaces, optional
    /// otherwise).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escape_coord: Option<EscapeCoord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeCoord {
    pub coord: usize,
    pub negative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSchema {
    pub name: String,
    /// Step bound R.
    #[serde(with = "rat_serde")]
    pub scale: BigRational,
    /// Validity threshold: the chain family exists for t >= t0.
    #[serde(with = "rat_serde")]
    pub t0: BigRational,
    /// Escape lower bound g(t): degree >= 1 with positive leading
    /// coefficient; every chain point stays at least g(t) from the
    /// basepoint.
    pub escape_bound: Poly,
    /// Claimed chain endpoints.
    pub from: Vec<Poly>,
    pub to: Vec<Poly>,
    pub segments: Vec<SchemaSegment>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ClauseStatus {
    Proved,
    Sampled,
    Failed { detail: String },
}

impl ClauseStatus {
    pub fn holds(&self) -> bool {
        !matches!(self, ClauseStatus::Failed { .. })
    }

    fn from_domain(v: DomainVerdict) -> Self {
        match v {
            DomainVerdict::Proved => ClauseStatus::Proved,
            DomainVerdict::Sampled => ClauseStatus::Sampled,
            DomainVerdict::Refuted { t, k } => ClauseStatus::Failed {
                detail: format!("violated at t={}, k={}", t, k),
            },
            DomainVerdict::Inconclusive => ClauseStatus::Failed {
                detail: "not provable symbolically and not refuted by sampling".into(),
            },
        }
    }

    fn from_membership(m: Membership) -> Self {
        match m {
            Membership::Holds { sampled: false } => ClauseStatus::Proved,
            Membership::Holds { sampled: true } => ClauseStatus::Sampled,
            Membership::Fails { reason } => ClauseStatus::Failed { detail: reason },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClauseReport {
    pub clause: String,
    #[serde(flatten)]
    pub status: ClauseStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemaVerification {
    pub schema: String,
    pub verified: bool,
    /// Some clause was established only by declared sampling.
    pub sampled: bool,
    pub clauses: Vec<ClauseReport>,
}

impl SchemaVerification {
    fn push(&mut self, clause: impl Into<String>, status: ClauseStatus) {
        if let ClauseStatus::Failed { .. } = status {
            self.verified = false;
        }
        if let ClauseStatus::Sampled = status {
            self.sampled = true;
        }
        self.clauses.push(ClauseReport { clause: clause.into(), status });
    }
}

/// Checks every clause of the schema against the space: shape of the escape
/// bound and step counts, endpoint and junction identities, per-segment step
/// bounds, membership, and the escape bound. Returns the first-failure
/// detail inside the clause list; `verified` is the conjunction.
pub fn verify_chain_schema(
    schema: &ChainSchema,
    space: &ParametricSpace,
) -> Result<SchemaVerification> {
    let mut out = SchemaVerification {
        schema: schema.name.clone(),
        verified: true,
        sampled: false,
        clauses: Vec::new(),
    };
    if schema.segments.is_empty() {
        return Err(Error::InvalidSchema("no segments".into()));
    }
    for seg in &schema.segments {
        if seg.point.len() != space.dim {
            return Err(Error::InvalidSchema(format!(
                "segment formula has dimension {}, space has {}",
                seg.point.len(),
                space.dim
            )));
        }
    }
    if schema.from.len() != space.dim || schema.to.len() != space.dim {
        return Err(Error::InvalidSchema("endpoint dimension mismatch".into()));
    }

    let t0 = &schema.t0;

    // escape bound shape: unbounded growth with positive leading coefficient
    let g = &schema.escape_bound;
    let g_ok = g.degree().map_or(false, |d| d >= 1)
        && g.leading().map_or(false, |c| c.is_positive());
    out.push(
        "escape bound has degree >= 1 and positive leading coefficient",
        if g_ok {
            ClauseStatus::Proved
        } else {
            ClauseStatus::Failed { detail: format!("g = {}", g) }
        },
    );

    // step counts: integer-valued (integer coefficients) and at least 1
    for (s, seg) in schema.segments.iter().enumerate() {
        let status = if !seg.steps.has_integer_coeffs() {
            ClauseStatus::Failed {
                detail: format!("step count {} has non-integer coefficients", seg.steps),
            }
        } else {
            match nonneg_on_ray(&(&seg.steps - &Poly::from_int(1)), t0) {
                RayVerdict::Proved => ClauseStatus::Proved,
                RayVerdict::Refuted { at } => ClauseStatus::Failed {
                    detail: format!("step count below 1 at t = {}", at),
                },
                RayVerdict::Inconclusive => ClauseStatus::Failed {
                    detail: "step count positivity not provable".into(),
                },
            }
        };
        out.push(format!("segment {}: step count valid", s), status);
    }

    // endpoints and junctions are exact polynomial identities
    let first = &schema.segments[0];
    let start_matches = (0..space.dim).all(|i| {
        first.point[i].subst_k_value(&BigRational::zero()) == schema.from[i]
    });
    out.push(
        "chain starts at the declared point",
        identity_status(start_matches),
    );
    let last = schema.segments.last().unwrap();
    let end_matches = (0..space.dim)
        .all(|i| last.point[i].subst_k(&last.steps) == schema.to[i]);
    out.push("chain ends at the declared point", identity_status(end_matches));
    for s in 0..schema.segments.len() - 1 {
        let a = &schema.segments[s];
        let b = &schema.segments[s + 1];
        let matches = (0..space.dim).all(|i| {
            a.point[i].subst_k(&a.steps) == b.point[i].subst_k_value(&BigRational::zero())
        });
        out.push(
            format!("segments {} and {} share their junction", s, s + 1),
            identity_status(matches),
        );
    }

    let scale_sq = Poly::constant(&schema.scale * &schema.scale);
    for (s, seg) in schema.segments.iter().enumerate() {
        // step bound over k in [0, m - 1]
        let m_steps = &seg.steps - &Poly::from_int(1);
        let disp: Vec<Poly2> = seg
            .point
            .iter()
            .map(|c| &c.shift_k_by_one() - c)
            .collect();
        let status = match space.metric {
            SpaceMetric::Euclidean => {
                let mut norm_sq = Poly2::zero();
                for d in &disp {
                    norm_sq = &norm_sq + &(d * d);
                }
                ClauseStatus::from_domain(nonneg_on_strip(
                    &(&Poly2::from_t(scale_sq.clone()) - &norm_sq),
                    t0,
                    &m_steps,
                ))
            }
            SpaceMetric::Sup => {
                let scale_poly = Poly2::from_t(Poly::constant(schema.scale.clone()));
                let mut worst = ClauseStatus::Proved;
                for d in disp.iter() {
                    for expr in [&scale_poly - d, &scale_poly + d] {
                        let st = ClauseStatus::from_domain(nonneg_on_strip(&expr, t0, &m_steps));
                        worst = combine(worst, st);
                    }
                }
                worst
            }
        };
        out.push(format!("segment {}: steps within the scale", s), status);

        // membership of the whole leg on the space
        let membership = formula_on_space(&seg.point, t0, &seg.steps, space);
        out.push(
            format!("segment {}: points lie on the space", s),
            ClauseStatus::from_membership(membership),
        );

        // escape bound over k in [0, m]
        let xi = &space.basepoint.coords;
        let status = match &seg.escape_coord {
            Some(EscapeCoord { coord, negative }) => {
                if *coord >= space.dim {
                    ClauseStatus::Failed {
                        detail: format!("escape coordinate {} out of range", coord),
                    }
                } else {
                    let diff = &seg.point[*coord] - &Poly2::from_t(xi[*coord].clone());
                    let signed = if *negative { -&diff } else { diff };
                    // one coordinate clears g, so every norm does
                    ClauseStatus::from_domain(nonneg_on_strip(
                        &(&signed - &Poly2::from_t(g.clone())),
                        t0,
                        &seg.steps,
                    ))
                }
            }
            None => {
                let mut dist_sq = Poly2::zero();
                for (c, x) in seg.point.iter().zip(xi) {
                    let d = c - &Poly2::from_t(x.clone());
                    dist_sq = &dist_sq + &(&d * &d);
                }
                let g_sq = g * g;
                let bound = match space.metric {
                    SpaceMetric::Euclidean => g_sq,
                    // sup norm >= euclidean / sqrt(dim)
                    SpaceMetric::Sup => &g_sq * &Poly::from_int(space.dim as i64),
                };
                ClauseStatus::from_domain(nonneg_on_strip(
                    &(&dist_sq - &Poly2::from_t(bound)),
                    t0,
                    &seg.steps,
                ))
            }
        };
        out.push(format!("segment {}: escape bound holds", s), status);
    }
    Ok(out)
}

fn identity_status(holds: bool) -> ClauseStatus {
    if holds {
        ClauseStatus::Proved
    } else {
        ClauseStatus::Failed { detail: "polynomial identity fails".into() }
    }
}

fn combine(a: ClauseStatus, b: ClauseStatus) -> ClauseStatus {
    match (a, b) {
        (f @ ClauseStatus::Failed { .. }, _) | (_, f @ ClauseStatus::Failed { .. }) => f,
        (ClauseStatus::Sampled, _) | (_, ClauseStatus::Sampled) => ClauseStatus::Sampled,
        _ => ClauseStatus::Proved,
    }
}

/// Concrete chain at a parameter value: the full point list, one entry per
/// (segment, k). Junction points appear twice; the duplicate step has length
/// zero.
pub fn instantiate(schema: &ChainSchema, t: &BigRational) -> Result<Vec<Vec<f64>>> {
    if t < &schema.t0 {
        return Err(Error::InvalidSchema(format!(
            "parameter {} below the validity threshold {}",
            t, schema.t0
        )));
    }
    let tf = super::poly::rational_to_f64(t);
    let mut points = Vec::new();
    for seg in &schema.segments {
        let m = seg.steps.eval(t);
        if !m.is_integer() || m.is_negative() {
            return Err(Error::InvalidSchema(format!(
                "step count {} is not a nonnegative integer at t = {}",
                m, t
            )));
        }
        let m = m
            .to_integer()
            .to_u64()
            .ok_or_else(|| Error::InvalidSchema("step count overflows".into()))?;
        for k in 0..=m {
            let kf = k as f64;
            points.push(seg.point.iter().map(|c| c.eval_f64(tf, kf)).collect());
        }
    }
    Ok(points)
}

/// Builds a bounded-displacement image of a verified schema: applying the
/// affine map x -> A x + b (with operator bound `modulus` on the chosen
/// metric) yields a schema at scale modulus * R into the image space.
pub fn transport_schema(
    schema: &ChainSchema,
    matrix: &[Vec<BigRational>],
    offset: &[BigRational],
    modulus: &BigRational,
    escape_scale: &BigRational,
    name: &str,
) -> Result<ChainSchema> {
    let dim_out = matrix.len();
    for row in matrix {
        if row.len() != schema.from.len() {
            return Err(Error::DimensionMismatch(schema.from.len(), row.len()));
        }
    }
    if offset.len() != dim_out {
        return Err(Error::DimensionMismatch(dim_out, offset.len()));
    }
    let apply_poly = |coords: &[Poly]| -> Vec<Poly> {
        (0..dim_out)
            .map(|i| {
                let mut acc = Poly::constant(offset[i].clone());
                for (j, c) in coords.iter().enumerate() {
                    acc = &acc + &c.scale(&matrix[i][j]);
                }
                acc
            })
            .collect()
    };
    let apply_poly2 = |coords: &[Poly2]| -> Vec<Poly2> {
        (0..dim_out)
            .map(|i| {
                let mut acc = Poly2::from_t(Poly::constant(offset[i].clone()));
                for (j, c) in coords.iter().enumerate() {
                    let scaled = Poly2::new(
                        c.coeffs_k().iter().map(|p| p.scale(&matrix[i][j])).collect(),
                    );
                    acc = &acc + &scaled;
                }
                acc
            })
            .collect()
    };
    // an escape witness survives when some output row reads exactly one
    // input coordinate — the witnessed one — scaled by at least the new
    // escape factor
    let transported_witness = |escape: &Option<EscapeCoord>| -> Option<EscapeCoord> {
        let EscapeCoord { coord, negative } = (*escape)?;
        for (j, row) in matrix.iter().enumerate() {
            let nonzero: Vec<usize> = (0..row.len()).filter(|&i| !row[i].is_zero()).collect();
            if nonzero == [coord] {
                let a = &row[coord];
                let magnitude = if a.is_negative() { -a.clone() } else { a.clone() };
                if &magnitude >= escape_scale {
                    return Some(EscapeCoord {
                        coord: j,
                        negative: negative ^ a.is_negative(),
                    });
                }
            }
        }
        None
    };
    Ok(ChainSchema {
        name: name.to_string(),
        scale: &schema.scale * modulus,
        t0: schema.t0.clone(),
        escape_bound: schema.escape_bound.scale(escape_scale),
        from: apply_poly(&schema.from),
        to: apply_poly(&schema.to),
        segments: schema
            .segments
            .iter()
            .map(|seg| SchemaSegment {
                point: apply_poly2(&seg.point),
                steps: seg.steps.clone(),
                escape_coord: transported_witness(&seg.escape_coord),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::fixtures::{
        flared_vase_space, lattice_plane_space, lattice_rectangle_schema, vase_cross_schema,
        vase_space,
    };

    #[test]
    fn rectangle_schema_verifies_symbolically() {
        let space = lattice_plane_space();
        let schema = lattice_rectangle_schema();
        let v = verify_chain_schema(&schema, &space).unwrap();
        assert!(v.verified, "{:?}", v.clauses);
        assert!(!v.sampled, "expected a fully symbolic verification");
    }

    #[test]
    fn vase_cross_schema_verifies() {
        let space = vase_space();
        let schema = vase_cross_schema();
        let v = verify_chain_schema(&schema, &space).unwrap();
        assert!(v.verified, "{:?}", v.clauses);
        assert!(!v.sampled);
    }

    #[test]
    fn flared_vase_crossing_fails() {
        // a single-step schema (-t, t) -> (t, t) on the flared vase has
        // displacement 2t, which violates any fixed scale
        let space = flared_vase_space();
        let t = Poly::var();
        let schema = ChainSchema {
            name: "bad_crossing".into(),
            scale: BigRational::from_integer(2.into()),
            t0: num_traits::One::one(),
            escape_bound: Poly::from_ints(&[0, 1]),
            from: vec![-&t, t.clone()],
            to: vec![t.clone(), t.clone()],
            segments: vec![SchemaSegment {
                point: vec![
                    // x = -t + 2tk: from -t at k=0 to t at k=1
                    Poly2::new(vec![-&t, Poly::from_ints(&[0, 2])]),
                    Poly2::from_t(t.clone()),
                ],
                steps: Poly::from_int(1),
                escape_coord: None,
            }],
        };
        let v = verify_chain_schema(&schema, &space).unwrap();
        assert!(!v.verified);
        let failed: Vec<_> = v
            .clauses
            .iter()
            .filter(|c| !c.status.holds())
            .map(|c| c.clause.clone())
            .collect();
        assert!(
            failed.iter().any(|c| c.contains("steps within the scale")),
            "expected the step bound to fail, failures: {:?}",
            failed
        );
    }

    #[test]
    fn instantiation_yields_concrete_chains() {
        let schema = lattice_rectangle_schema();
        let chain = instantiate(&schema, &BigRational::from_integer(3.into())).unwrap();
        // segments of lengths 4, 7, 4 points
        assert_eq!(chain.len(), 15);
        assert_eq!(chain[0], vec![3.0, 0.0]);
        assert_eq!(chain[chain.len() - 1], vec![-3.0, 0.0]);
        for w in chain.windows(2) {
            let step = w[0]
                .iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(step <= 1.0 + 1e-12);
        }
        for p in &chain {
            let sup = p.iter().map(|x| x.abs()).fold(0.0, f64::max);
            assert!(sup >= 3.0 - 1e-12);
        }
        assert!(instantiate(&schema, &BigRational::zero()).is_err());
    }

    #[test]
    fn mismatched_endpoints_fail() {
        let mut schema = vase_cross_schema();
        schema.to = vec![Poly::from_int(2), Poly::var()];
        let space = vase_space();
        let v = verify_chain_schema(&schema, &space).unwrap();
        assert!(!v.verified);
    }
}
