//! Class tables for the infinite part of a parametric space.
//!
//! Given representative infinite points, verified chain schemas connect
//! them and verified gap certificates separate them; the table is exact —
//! the classes really are the components of the infinite part — whenever
//! every pair is decided. Conflicting certificates raise an error rather
//! than a silent choice.

use serde::Serialize;

use super::gap::{verify_gap_certificate, GapCertificate, GapVerification};
use super::schema::{verify_chain_schema, ChainSchema, SchemaVerification};
use super::space::{is_infinite, piece_of_point, ParametricSpace, SymbolicPoint};
use crate::error::{Error, Result};
use crate::unionfind::DisjointSet;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PairStatus {
    Connected { schema: String },
    Separated { certificate: String },
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairDecision {
    pub rep_a: String,
    pub rep_b: String,
    #[serde(flatten)]
    pub status: PairStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct IotaReport {
    pub space: String,
    pub representatives: Vec<String>,
    pub pairs: Vec<PairDecision>,
    /// Representative names grouped by connected class.
    pub classes: Vec<Vec<String>>,
    pub class_count: usize,
    /// Every pair decided: the class table is exact.
    pub complete: bool,
    pub sampled: bool,
    pub schema_results: Vec<SchemaVerification>,
    pub gap_results: Vec<GapVerification>,
}

/// Decides each pair of representatives by the shipped certificates:
/// Connected through verified schemas (closed under concatenation),
/// Separated by verified gap certificates covering the representatives'
/// pieces, Unknown otherwise.
pub fn iota_report(
    space: &ParametricSpace,
    representatives: &[(String, SymbolicPoint)],
    schemas: &[ChainSchema],
    gaps: &[GapCertificate],
) -> Result<IotaReport> {
    space.validate()?;
    for (name, point) in representatives {
        if !is_infinite(point, space)? {
            return Err(Error::InvalidCertificate(format!(
                "representative `{}` is not an infinite point",
                name
            )));
        }
    }
    let n = representatives.len();

    let schema_results: Vec<SchemaVerification> = schemas
        .iter()
        .map(|s| verify_chain_schema(s, space))
        .collect::<Result<_>>()?;
    let gap_results: Vec<GapVerification> = gaps
        .iter()
        .map(|g| verify_gap_certificate(g, space))
        .collect::<Result<_>>()?;
    let sampled = schema_results.iter().any(|r| r.verified && r.sampled)
        || gap_results.iter().any(|r| r.verified_all_scales && r.sampled);

    // connect representatives through verified schemas
    let mut classes = DisjointSet::new(n);
    let mut connected_by = vec![vec![None::<usize>; n]; n];
    for (si, (schema, result)) in schemas.iter().zip(&schema_results).enumerate() {
        if !result.verified {
            continue;
        }
        let ends: Vec<usize> = representatives
            .iter()
            .enumerate()
            .filter_map(|(i, (_, p))| {
                (p.coords == schema.from || p.coords == schema.to).then_some(i)
            })
            .collect();
        for &i in &ends {
            for &j in &ends {
                if i < j {
                    classes.union(i as u32, j as u32);
                    connected_by[i][j].get_or_insert(si);
                }
            }
        }
    }

    // separate representative pairs through verified certificates
    let piece_of: Vec<Option<&str>> = representatives
        .iter()
        .map(|(_, p)| piece_of_point(p, space).map(|piece| piece.name()))
        .collect();
    let mut separated_by = vec![vec![None::<usize>; n]; n];
    for (gi, (gap, result)) in gaps.iter().zip(&gap_results).enumerate() {
        if !result.verified_all_scales {
            continue;
        }
        for i in 0..n {
            for j in i + 1..n {
                let (Some(pi), Some(pj)) = (piece_of[i], piece_of[j]) else {
                    continue;
                };
                let a_i = gap.side_a.iter().any(|s| s == pi);
                let b_i = gap.side_b.iter().any(|s| s == pi);
                let a_j = gap.side_a.iter().any(|s| s == pj);
                let b_j = gap.side_b.iter().any(|s| s == pj);
                if (a_i && b_j) || (b_i && a_j) {
                    separated_by[i][j].get_or_insert(gi);
                }
            }
        }
    }

    // consistency: no separated pair may sit in one connected class
    for i in 0..n {
        for j in i + 1..n {
            if let Some(gi) = separated_by[i][j] {
                if classes.find(i as u32) == classes.find(j as u32) {
                    return Err(Error::CertificateConflict(format!(
                        "representatives `{}` and `{}` are connected by a schema but separated by `{}`",
                        representatives[i].0, representatives[j].0, gaps[gi].name
                    )));
                }
            }
        }
    }

    // pair table: connection via the closure, separation propagated through
    // connected classes
    let mut pairs = Vec::new();
    let mut undecided = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let status = if classes.find(i as u32) == classes.find(j as u32) {
                let schema = connected_by[i][j]
                    .or_else(|| {
                        // connected transitively; cite any schema touching i
                        (0..n).find_map(|k| connected_by[i.min(k)][i.max(k)])
                    })
                    .map(|si| schemas[si].name.clone())
                    .unwrap_or_else(|| "transitive".into());
                PairStatus::Connected { schema }
            } else {
                let witness = (0..n)
                    .flat_map(|a| (0..n).map(move |b| (a, b)))
                    .find_map(|(a, b)| {
                        let (lo, hi) = (a.min(b), a.max(b));
                        if lo == hi {
                            return None;
                        }
                        let same_class_a = classes.find(a as u32) == classes.find(i as u32);
                        let same_class_b = classes.find(b as u32) == classes.find(j as u32);
                        (same_class_a && same_class_b)
                            .then(|| separated_by[lo][hi])
                            .flatten()
                    });
                match witness {
                    Some(gi) => PairStatus::Separated { certificate: gaps[gi].name.clone() },
                    None => {
                        undecided += 1;
                        PairStatus::Unknown
                    }
                }
            };
            pairs.push(PairDecision {
                rep_a: representatives[i].0.clone(),
                rep_b: representatives[j].0.clone(),
                status,
            });
        }
    }

    // group representatives into classes, ordered by first member
    let mut groups: Vec<(u32, Vec<String>)> = Vec::new();
    for (i, (name, _)) in representatives.iter().enumerate() {
        let root = classes.find(i as u32);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, member_names)) => member_names.push(name.clone()),
            None => groups.push((root, vec![name.clone()])),
        }
    }
    let class_list: Vec<Vec<String>> = groups.into_iter().map(|(_, g)| g).collect();
    let class_count = class_list.len();
    let complete = undecided == 0;

    Ok(IotaReport {
        space: space.name.clone(),
        representatives: representatives.iter().map(|(n, _)| n.clone()).collect(),
        pairs,
        classes: class_list,
        class_count,
        complete,
        sampled,
        schema_results,
        gap_results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::fixtures::*;
    use crate::symbolic::poly::Poly;
    use num_rational::BigRational;
    use num_traits::One;

    fn rep(name: &str, coords: Vec<Poly>) -> (String, SymbolicPoint) {
        (name.to_string(), SymbolicPoint::new(coords, BigRational::one()))
    }

    fn line_gap() -> GapCertificate {
        GapCertificate {
            name: "line_gap".into(),
            scale: BigRational::one(),
            threshold: Poly::var(),
            side_a: vec!["right".into()],
            side_b: vec!["left".into()],
            sampling_fallback: false,
        }
    }

    #[test]
    fn line_has_two_decided_classes() {
        let space = line_space();
        let reps = vec![
            rep("plus_infinity", vec![Poly::var()]),
            rep("minus_infinity", vec![-&Poly::var()]),
        ];
        let report = iota_report(&space, &reps, &[], &[line_gap()]).unwrap();
        assert!(report.complete);
        assert_eq!(report.class_count, 2);
        assert!(matches!(report.pairs[0].status, PairStatus::Separated { .. }));
    }

    #[test]
    fn vase_has_one_class() {
        let space = vase_space();
        let reps = vec![
            rep("left_top", vec![Poly::from_int(-1), Poly::var()]),
            rep("right_top", vec![Poly::from_int(1), Poly::var()]),
        ];
        let report = iota_report(&space, &reps, &[vase_cross_schema()], &[]).unwrap();
        assert!(report.complete);
        assert_eq!(report.class_count, 1);
    }

    #[test]
    fn flared_vase_has_two_classes() {
        let space = flared_vase_space();
        let reps = vec![
            rep("up_left", vec![-&Poly::var(), Poly::var()]),
            rep("up_right", vec![Poly::var(), Poly::var()]),
        ];
        let gap = GapCertificate {
            name: "flared_gap".into(),
            scale: BigRational::from_integer(3.into()),
            threshold: Poly::var(),
            side_a: vec!["left_arm".into()],
            side_b: vec!["right_arm".into()],
            sampling_fallback: false,
        };
        let report = iota_report(&space, &reps, &[], &[gap]).unwrap();
        assert!(report.complete, "{:?}", report.gap_results);
        assert_eq!(report.class_count, 2);
    }

    #[test]
    fn plane_has_one_class() {
        let space = lattice_plane_space();
        let reps = vec![
            rep("east", vec![Poly::var(), Poly::zero()]),
            rep("west", vec![-&Poly::var(), Poly::zero()]),
        ];
        let report =
            iota_report(&space, &reps, &[lattice_rectangle_schema()], &[]).unwrap();
        assert!(report.complete);
        assert_eq!(report.class_count, 1);
    }

    #[test]
    fn undecided_pairs_leave_the_table_incomplete() {
        let space = flared_vase_space();
        let reps = vec![
            rep("up_left", vec![-&Poly::var(), Poly::var()]),
            rep("up_right", vec![Poly::var(), Poly::var()]),
        ];
        let report = iota_report(&space, &reps, &[], &[]).unwrap();
        assert!(!report.complete);
        assert_eq!(report.pairs[0].status, PairStatus::Unknown);
    }

    #[test]
    fn finite_representatives_rejected() {
        let space = line_space();
        let reps = vec![rep("finite", vec![Poly::from_int(7)])];
        assert!(iota_report(&space, &reps, &[], &[]).is_err());
    }

    #[test]
    fn same_piece_representatives_connect_by_a_walk() {
        // t and t + 1 both sit on the right ray; a one-step schema joins
        // them, and the line gap certificate does not apply to the pair
        let space = line_space();
        let reps = vec![
            rep("a", vec![Poly::var()]),
            rep("b", vec![Poly::from_ints(&[1, 1])]),
        ];
        let schema = ChainSchema {
            name: "nudge".into(),
            scale: BigRational::one(),
            t0: BigRational::one(),
            escape_bound: Poly::var(),
            from: vec![Poly::var()],
            to: vec![Poly::from_ints(&[1, 1])],
            segments: vec![crate::symbolic::schema::SchemaSegment {
                point: vec![crate::symbolic::poly2::Poly2::new(vec![
                    Poly::var(),
                    Poly::from_int(1),
                ])],
                steps: Poly::from_int(1),
                escape_coord: Some(crate::symbolic::schema::EscapeCoord {
                    coord: 0,
                    negative: false,
                }),
            }],
        };
        let report = iota_report(&space, &reps, &[schema], &[line_gap()]).unwrap();
        assert!(report.complete);
        assert_eq!(report.class_count, 1);
        assert!(matches!(report.pairs[0].status, PairStatus::Connected { .. }));
    }
}
