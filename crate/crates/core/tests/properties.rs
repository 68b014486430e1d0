use proptest::prelude::*;

use mbc::importance::{self, pgp2};
use mbc::similarity::{self, goodall, lin, overlap};
use mbc::{run, ClusteringState, Dataset, ImportanceMeasure, LoadOptions, MbcConfig, Measure, Rational, SimilarityMatrix};

fn build(cells: &[Vec<u8>]) -> Dataset {
    let m = cells[0].len();
    let header = (0..m).map(|j| format!("f{j}")).collect();
    let rows = cells
        .iter()
        .map(|r| r.iter().map(|c| format!("v{c}")).collect())
        .collect();
    Dataset::from_rows(header, rows, &LoadOptions::default()).unwrap()
}

/// Rows of `m` categories in `0..k`.
fn dataset(max_n: usize, max_m: usize, max_k: u8) -> impl Strategy<Value = Dataset> {
    (2..=max_n, 1..=max_m, 1..=max_k).prop_flat_map(|(n, m, k)| {
        proptest::collection::vec(proptest::collection::vec(0..k, m), n).prop_map(|cells| build(&cells))
    })
}

fn profiles(ds: &Dataset) -> Vec<&[u32]> {
    (0..ds.n()).map(|o| ds.row(o)).collect()
}

fn all_features(ds: &Dataset) -> Vec<usize> {
    (0..ds.m()).collect()
}

proptest! {
    #[test]
    fn measures_symmetric_and_bounded(ds in dataset(12, 6, 4)) {
        let freq = ds.frequency_table();
        let f = all_features(&ds);
        for i in 0..ds.n() {
            for j in 0..ds.n() {
                let (x, y) = (ds.row(i), ds.row(j));
                let o = overlap(x, y, &f).unwrap();
                prop_assert_eq!(o, overlap(y, x, &f).unwrap());
                prop_assert!((0.0..=1.0).contains(&o));
                let g = goodall(x, y, &freq, &f).unwrap();
                prop_assert_eq!(g, goodall(y, x, &freq, &f).unwrap());
                prop_assert!((0.0..=1.0).contains(&g));
                if let Ok(l) = lin(x, y, &freq, &f) {
                    prop_assert_eq!(l, lin(y, x, &freq, &f).unwrap());
                    prop_assert!((0.0..=1.0 + 1e-12).contains(&l));
                }
            }
        }
    }

    #[test]
    fn incremental_update_equals_rebuild(ds in dataset(20, 8, 4), mask in any::<u16>()) {
        let f = all_features(&ds);
        let dropped: Vec<usize> = f.iter().copied().filter(|j| mask & (1 << j) != 0).collect();
        let p = profiles(&ds);
        let sm = SimilarityMatrix::build(&p, &f);
        let updated = sm.after_drop(&p, &dropped).unwrap();
        let kept: Vec<usize> = f.iter().copied().filter(|j| !dropped.contains(j)).collect();
        let rebuilt = SimilarityMatrix::build(&p, &kept);
        prop_assert_eq!(updated.upper_values(), rebuilt.upper_values());
        prop_assert_eq!(updated.features(), rebuilt.features());
    }

    #[test]
    fn dropping_never_raises_cm(ds in dataset(15, 6, 3), drop in 0usize..6) {
        let f = all_features(&ds);
        let drop = drop % f.len();
        let p = profiles(&ds);
        let sm = SimilarityMatrix::build(&p, &f);
        let after = sm.after_drop(&p, &[drop]).unwrap();
        for ((_, _, a), (_, _, b)) in sm.pairs().zip(after.pairs()) {
            prop_assert!(b <= a && a - b <= 1);
        }
    }

    #[test]
    fn importance_shares_sum_to_one(ds in dataset(25, 8, 5)) {
        let f = all_features(&ds);
        let freq = ds.frequency_table();
        for measure in [ImportanceMeasure::Pgp, ImportanceMeasure::Ppp] {
            if let Ok(report) = importance::importance(&freq, &f, measure) {
                let total: Rational = report.values(measure).unwrap().iter().sum();
                prop_assert_eq!(total, Rational::from_integer(1));
            }
        }
    }

    #[test]
    fn pgp_invariant_under_row_order(ds in dataset(20, 6, 4), seed in any::<u64>()) {
        let mut order: Vec<usize> = (0..ds.n()).collect();
        let mut s = seed;
        for i in (1..order.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let permuted = ds.permute_rows(&order).unwrap();
        let f = all_features(&ds);
        let a = importance::pgp(&ds.frequency_table(), &f);
        let b = importance::pgp(&permuted.frequency_table(), &f);
        prop_assert_eq!(a.map(|r| r.pgp), b.map(|r| r.pgp));
    }

    #[test]
    fn pgp2_empty_is_one_and_antitone(ds in dataset(15, 6, 3), alpha in 0.0f64..3.0) {
        let f = all_features(&ds);
        let p = profiles(&ds);
        let sm = SimilarityMatrix::build(&p, &f);
        if let Ok(empty) = pgp2(&sm, &p, &[], alpha) {
            prop_assert_eq!(empty.value, Rational::from_integer(1));
            let mut previous = empty.value;
            for k in 1..=f.len() {
                let score = pgp2(&sm, &p, &f[..k], alpha).unwrap();
                prop_assert!(score.value <= previous);
                previous = score.value;
            }
        }
    }

    #[test]
    fn grouping_joins_exactly_identical_profiles(ds in dataset(30, 5, 3)) {
        let mut state = ClusteringState::new(&ds);
        state.group_matching();
        let partition = state.partition();
        let assignment = partition.assignment();
        for i in 0..ds.n() {
            for j in 0..ds.n() {
                prop_assert_eq!(assignment[i] == assignment[j], ds.row(i) == ds.row(j));
            }
        }
    }

    #[test]
    fn run_is_deterministic_and_well_formed(ds in dataset(30, 6, 4), anti_merge in any::<bool>()) {
        let config = MbcConfig { anti_merge, ..Default::default() };
        let a = run(&ds, &config).unwrap();
        let b = run(&ds, &config).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.partition.covers(ds.n()));
        prop_assert!(a.trace.windows(2).all(|w| w[0].theta > w[1].theta));
        let levels = a.dendrogram.levels();
        prop_assert!(levels.windows(2).all(|w| w[1].partition.is_coarsening_of(&w[0].partition)));
    }

    #[test]
    fn final_partition_survives_row_permutation(ds in dataset(25, 6, 3), seed in any::<u64>()) {
        let mut order: Vec<usize> = (0..ds.n()).collect();
        order.rotate_left(seed as usize % ds.n());
        if seed & 1 == 1 {
            order.reverse();
        }
        let permuted = ds.permute_rows(&order).unwrap();
        let config = MbcConfig::default();
        let a = run(&ds, &config).unwrap().partition;
        let b = run(&permuted, &config).unwrap().partition.relabel(&order);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn dendrogram_cut_is_a_level(ds in dataset(25, 5, 3), k in 1usize..10) {
        let config = MbcConfig { k: Some(k), ..Default::default() };
        let out = run(&ds, &config).unwrap();
        let cut = out.cut.unwrap();
        prop_assert_eq!(&out.dendrogram.levels()[cut.level].partition, &out.partition);
        for level in out.dendrogram.levels() {
            prop_assert!(cut.achieved.abs_diff(k) <= level.partition.len().abs_diff(k));
        }
    }

    #[test]
    fn csv_round_trip(ds in dataset(15, 5, 4)) {
        let mut text = ds.feature_names().join(",");
        text.push('\n');
        for o in 0..ds.n() {
            let row: Vec<&str> = (0..ds.m()).map(|f| ds.decode(o, f)).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let again = Dataset::from_reader(text.as_bytes(), &LoadOptions::default()).unwrap();
        prop_assert_eq!(again.n(), ds.n());
        for o in 0..ds.n() {
            prop_assert_eq!(again.row(o), ds.row(o));
        }
        for measure in [Measure::Cm, Measure::Overlap] {
            prop_assert_eq!(
                similarity::pairwise(&again, measure).unwrap(),
                similarity::pairwise(&ds, measure).unwrap()
            );
        }
    }
}
