//! Derived expected values, frozen after computing them with the
//! brute-force oracle, plus oracle agreement on the shipped generators.

mod common;

use coarse_ends::filtration::{
    build_end_system, chain_components, induced_end_map, StabilityStatus,
};
use coarse_ends::maps::CoarseMapSample;
use coarse_ends::spaces::SpaceRecipe;
use coarse_ends::{FiniteCoarseInstance, MetricKind, ScaleLadder};
use common::{oracle_components, partition_groups};

fn fine_line(n: i64, step: f64) -> FiniteCoarseInstance {
    let k = (n as f64 / step).round() as i64;
    let points = (-k..=k)
        .map(|i| (i.to_string(), vec![i as f64 * step]))
        .collect();
    FiniteCoarseInstance::from_cloud(points, MetricKind::Euclidean, "0", n as f64).unwrap()
}

#[test]
fn flared_vase_annulus_splits_into_two_arms() {
    let inst = SpaceRecipe::FlaredVase { height: 100 }.generate().unwrap();
    let part = chain_components(&inst, 10.0, 3.0);
    let oracle = oracle_components(&inst, 10.0, 3.0);
    assert_eq!(partition_groups(&part), oracle);
    assert_eq!(part.count(), 2);
}

#[test]
fn vase_annulus_stays_connected_across_the_gap() {
    let inst = SpaceRecipe::Vase { height: 100 }.generate().unwrap();
    let part = chain_components(&inst, 10.0, 3.0);
    let oracle = oracle_components(&inst, 10.0, 3.0);
    assert_eq!(partition_groups(&part), oracle);
    assert_eq!(part.count(), 1);
}

#[test]
fn squares_deep_annulus_is_all_singletons() {
    let inst = SpaceRecipe::Squares { rho_max: 1e4 }.generate().unwrap();
    let part = chain_components(&inst, 5000.0, 100.0);
    // oracle: squares in (5000, 1e4] with gaps above 100 are isolated
    let isolated = (0..=100i64)
        .filter(|n| n * n >= 5000 && n * n <= 10_000)
        .count();
    assert_eq!(isolated, 30);
    assert_eq!(part.count(), 30);
    let oracle = oracle_components(&inst, 5000.0, 100.0);
    assert_eq!(partition_groups(&part), oracle);
}

#[test]
fn line_end_system_matches_oracle_cellwise() {
    let inst = SpaceRecipe::Line { n: 100 }.generate().unwrap();
    let ladder =
        ScaleLadder::new(vec![0.0, 10.0, 20.0, 40.0], vec![1.0, 2.0, 4.0], 100.0).unwrap();
    let sys = build_end_system(&inst, &ladder);
    for (i, &r) in ladder.cutoffs().iter().enumerate() {
        for (j, &s) in ladder.scales().iter().enumerate() {
            let oracle = oracle_components(&inst, r, s);
            assert_eq!(partition_groups(sys.cell(i, j)), oracle);
            assert_eq!(sys.cell(i, j).count(), if i == 0 { 1 } else { 2 });
        }
    }
    assert_eq!(
        sys.stable_end_count(3).unwrap().status,
        StabilityStatus::Stabilized(2)
    );
}

#[test]
fn grid_end_system_is_all_ones_beyond_the_hole() {
    let inst = SpaceRecipe::Grid2d { n: 50 }.generate().unwrap();
    let ladder = ScaleLadder::new(
        vec![0.0, 10.0, 20.0, 40.0],
        vec![1.0, 2.0, 4.0],
        inst.rho_max(),
    )
    .unwrap();
    let sys = build_end_system(&inst, &ladder);
    for i in 0..sys.n_cutoffs() {
        for j in 0..sys.n_scales() {
            assert_eq!(sys.cell(i, j).count(), 1, "cell ({}, {})", i, j);
        }
    }
    // spot-check two cells against the oracle
    let oracle = oracle_components(&inst, 20.0, 1.0);
    assert_eq!(partition_groups(sys.cell(2, 0)), oracle);
    assert_eq!(
        sys.stable_end_count(3).unwrap().status,
        StabilityStatus::Stabilized(1)
    );
}

#[test]
fn squares_report_is_sparse() {
    let inst = SpaceRecipe::Squares { rho_max: 1e4 }.generate().unwrap();
    let ladder = ScaleLadder::default_for(1e4).unwrap();
    let sys = build_end_system(&inst, &ladder);
    let report = sys.stable_end_count(3).unwrap();
    assert_eq!(report.status, StabilityStatus::Sparse);
}

#[test]
fn thread_counts_for_books_and_vases() {
    let flared = SpaceRecipe::FlaredVase { height: 100 }.generate().unwrap();
    let ladder = ScaleLadder::new(
        vec![0.0, 10.0, 20.0],
        vec![3.0],
        flared.rho_max(),
    )
    .unwrap();
    let sys = build_end_system(&flared, &ladder);
    assert_eq!(sys.threads(0).len(), 2);

    let book = SpaceRecipe::Book { pages: 5, height: 100 }.generate().unwrap();
    let ladder = ScaleLadder::new(vec![0.0, 10.0, 20.0], vec![1.0], 100.0).unwrap();
    let sys = build_end_system(&book, &ladder);
    let threads = sys.threads(0);
    assert_eq!(threads.len(), 5);
    // one thread per page, representatives on distinct pages
    let mut pages: Vec<String> = threads
        .iter()
        .map(|t| {
            let id = sys.instance().id(t.rep);
            id.split(':').next().unwrap().to_string()
        })
        .collect();
    pages.sort();
    pages.dedup();
    assert_eq!(pages.len(), 5);
}

#[test]
fn rounding_map_induces_a_thread_bijection() {
    let fine = fine_line(100, 0.1);
    let coarse = SpaceRecipe::Line { n: 100 }.generate().unwrap();
    let ladder = ScaleLadder::default_for(100.0).unwrap();
    let sys_fine = build_end_system(&fine, &ladder);
    let sys_coarse = build_end_system(&coarse, &ladder);
    let round = CoarseMapSample::nearest_point_map(&fine, &coarse, |c| vec![c[0]]).unwrap();
    let induced = induced_end_map(&round, &sys_fine, &sys_coarse).unwrap();
    // at the top cell both systems see two ends and the map matches sides
    let top = (sys_fine.n_cutoffs() - 1, 0);
    let image = induced.cells[top.0][top.1].as_ref().unwrap();
    assert_eq!(image.comp_map.len(), 2);
    assert_ne!(image.comp_map[0], image.comp_map[1]);
    for (c, &target) in image.comp_map.iter().enumerate() {
        let rep = sys_fine.cell(top.0, top.1).rep(c as u32);
        let rep_side = fine.coords(rep).unwrap()[0].signum();
        let image_cell = sys_coarse.cell(image.cell.0, image.cell.1);
        let target_rep = image_cell.rep(target);
        let target_side = coarse.coords(target_rep).unwrap()[0].signum();
        assert_eq!(rep_side, target_side);
    }
}

#[test]
fn random_instances_match_oracle_small() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..20 {
        let inst = if trial % 2 == 0 {
            common::random_cloud(&mut rng, 120)
        } else {
            common::random_graph(&mut rng, 120)
        };
        for (cutoff, scale) in [(0.0, 3.0), (10.0, 5.0), (25.0, 8.0)] {
            let part = chain_components(&inst, cutoff, scale);
            let oracle = oracle_components(&inst, cutoff, scale);
            assert_eq!(
                partition_groups(&part),
                oracle,
                "trial {} cell ({}, {})",
                trial,
                cutoff,
                scale
            );
        }
    }
}
