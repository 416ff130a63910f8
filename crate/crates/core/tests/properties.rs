use mint_core::corpus::published_solutions;
use mint_core::format::{parse_matrix, serialize_matrix};
use mint_core::model::canonicalize;
use mint_core::{
    is_valid, projective_signature, ratio_signature, CoinMatrix, Criterion, WeightVector,
};
use proptest::prelude::*;

const CASES: u32 = 256;

fn valid(m: &CoinMatrix, c: Criterion) -> bool {
    is_valid(m, c).unwrap().valid
}

fn matrix(
    weighings: std::ops::RangeInclusive<usize>,
    mints: std::ops::RangeInclusive<usize>,
    max: u64,
) -> impl Strategy<Value = CoinMatrix> {
    (weighings, mints).prop_flat_map(move |(w, m)| {
        prop::collection::vec(0..=max, w * m)
            .prop_map(move |e| CoinMatrix::from_row_major(w, m, e).unwrap())
    })
}

/// An arbitrary matrix stacked on the identity, rows shuffled. Always valid
/// under both criteria: the identity rows alone pin down the fault pattern
/// by their zero positions, and by proportionality for collinearity.
fn valid_plan() -> impl Strategy<Value = CoinMatrix> {
    (1..=2usize, 1..=5usize).prop_flat_map(|(extra, m)| {
        (
            prop::collection::vec(0..=4u64, extra * m),
            Just((0..extra + m).collect::<Vec<_>>()).prop_shuffle(),
        )
            .prop_map(move |(top, order)| {
                let mut rows: Vec<Vec<u64>> = top.chunks(m).map(<[u64]>::to_vec).collect();
                rows.extend(CoinMatrix::diagonal(m).unwrap().to_rows());
                CoinMatrix::new(rows).unwrap().permute_rows(&order).unwrap()
            })
    })
}

fn corpus() -> Vec<CoinMatrix> {
    published_solutions()
        .into_iter()
        .map(|s| s.matrix)
        .collect()
}

fn vector(len: usize, max: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0..=max, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn generated_plans_are_valid(m in valid_plan()) {
        prop_assert!(valid(&m, Criterion::Ratio), "{m}");
        prop_assert!(valid(&m, Criterion::Collinear), "{m}");
    }

    #[test]
    fn ratio_valid_implies_collinear_valid(m in matrix(2..=4, 1..=4, 3)) {
        if valid(&m, Criterion::Ratio) {
            prop_assert!(valid(&m, Criterion::Collinear), "{m}");
        }
    }

    #[test]
    fn column_permutation_keeps_validity(
        (m, order) in matrix(2..=4, 1..=5, 3)
            .prop_flat_map(|m| { let n = m.mints(); (Just(m), Just((0..n).collect::<Vec<_>>()).prop_shuffle()) })
    ) {
        let p = m.permute_columns(&order).unwrap();
        prop_assert_eq!(p.total_coins(), m.total_coins());
        for c in Criterion::ALL {
            prop_assert_eq!(valid(&p, c), valid(&m, c), "{} under {}", m, c);
        }
    }

    #[test]
    fn column_deletion_keeps_validity((m, col) in valid_plan()
        .prop_filter("needs two mints", |m| m.mints() >= 2)
        .prop_flat_map(|m| { let n = m.mints(); (Just(m), 0..n) })
    ) {
        let d = m.delete_column(col).unwrap();
        for c in Criterion::ALL {
            prop_assert!(valid(&d, c), "{} minus column {} under {}", m, col, c);
        }
    }

    #[test]
    fn collinear_validity_ignores_row_duplication((m, r) in matrix(1..=3, 1..=4, 3)
        .prop_flat_map(|m| { let w = m.weighings(); (Just(m), 0..w) })
    ) {
        let d = m.with_row_appended(m.row(r).to_vec()).unwrap();
        prop_assert_eq!(valid(&d, Criterion::Collinear), valid(&m, Criterion::Collinear));
    }

    #[test]
    fn collinear_validity_ignores_row_scaling((m, r, k) in matrix(1..=3, 1..=4, 3)
        .prop_flat_map(|m| { let w = m.weighings(); (Just(m), 0..w, 1..=6u64) })
    ) {
        let s = m.with_row_scaled(r, k).unwrap();
        prop_assert_eq!(valid(&s, Criterion::Collinear), valid(&m, Criterion::Collinear));
    }

    #[test]
    fn duplicated_and_scaled_valid_plans_stay_valid((m, r, k) in valid_plan()
        .prop_flat_map(|m| { let w = m.weighings(); (Just(m), 0..w, 1..=6u64) })
    ) {
        let d = m.with_row_appended(m.row(r).to_vec()).unwrap();
        prop_assert!(valid(&d, Criterion::Collinear));
        prop_assert!(valid(&m.with_row_scaled(r, k).unwrap(), Criterion::Collinear));
    }

    #[test]
    fn collinear_validity_ignores_row_order(
        (m, order) in matrix(1..=4, 1..=4, 3)
            .prop_flat_map(|m| { let w = m.weighings(); (Just(m), Just((0..w).collect::<Vec<_>>()).prop_shuffle()) })
    ) {
        let p = m.permute_rows(&order).unwrap();
        prop_assert_eq!(valid(&p, Criterion::Collinear), valid(&m, Criterion::Collinear));
    }

    #[test]
    fn canonical_form_matches_signature_equality(
        (a, b) in (2..=4usize).prop_flat_map(|w| (vector(w, 4), vector(w, 4)))
    ) {
        let key = |c, v: &[u64]| { let mut v = v.to_vec(); canonicalize(c, &mut v); v };
        let (sa, sb) = (WeightVector(a.clone()), WeightVector(b.clone()));
        prop_assert_eq!(
            key(Criterion::Ratio, &a) == key(Criterion::Ratio, &b),
            ratio_signature(&sa).unwrap() == ratio_signature(&sb).unwrap()
        );
        prop_assert_eq!(
            key(Criterion::Collinear, &a) == key(Criterion::Collinear, &b),
            projective_signature(&sa) == projective_signature(&sb)
        );
    }

    #[test]
    fn projective_signature_is_scale_invariant(v in (1..=5usize).prop_flat_map(|w| vector(w, 50)), k in 1..=1000u64) {
        let scaled = WeightVector(v.iter().map(|x| x * k).collect());
        prop_assert_eq!(projective_signature(&scaled), projective_signature(&WeightVector(v)));
    }

    #[test]
    fn matrix_file_round_trip(m in matrix(1..=6, 1..=8, 100)) {
        prop_assert_eq!(parse_matrix(&serialize_matrix(&m)).unwrap(), m);
    }
}

#[test]
fn corpus_closure_properties() {
    for m in corpus() {
        assert!(valid(&m, Criterion::Ratio), "{m}");
        assert!(valid(&m, Criterion::Collinear), "{m}");
        let n = m.mints();
        let reversed: Vec<usize> = (0..n).rev().collect();
        let rotated: Vec<usize> = (1..n).chain([0]).collect();
        for order in [reversed, rotated] {
            let p = m.permute_columns(&order).unwrap();
            assert!(valid(&p, Criterion::Ratio) && valid(&p, Criterion::Collinear));
        }
        for col in 0..n {
            let d = m.delete_column(col).unwrap();
            assert!(valid(&d, Criterion::Ratio), "{m} minus column {col}");
            assert!(valid(&d, Criterion::Collinear), "{m} minus column {col}");
        }
        for r in 0..m.weighings() {
            let dup = m.with_row_appended(m.row(r).to_vec()).unwrap();
            assert!(valid(&dup, Criterion::Collinear));
            assert!(valid(
                &m.with_row_scaled(r, 7).unwrap(),
                Criterion::Collinear
            ));
        }
    }
}

#[test]
fn ratio_equality_without_proportionality() {
    let a = WeightVector(vec![1, 0, 2]);
    let b = WeightVector(vec![1, 0, 3]);
    assert_eq!(ratio_signature(&a).unwrap(), ratio_signature(&b).unwrap());
    assert_ne!(projective_signature(&a), projective_signature(&b));

    // columns (1,0,2) and (1,0,3) make exactly these two weight vectors
    let m = CoinMatrix::new(vec![vec![1, 1], vec![0, 0], vec![2, 3]]).unwrap();
    assert!(!valid(&m, Criterion::Ratio));
    assert!(valid(&m, Criterion::Collinear));
    let swapped = m.permute_rows(&[1, 0, 2]).unwrap();
    assert!(valid(&swapped, Criterion::Ratio));
    assert!(valid(&swapped, Criterion::Collinear));
}

#[test]
fn two_weighings_criteria_coincide() {
    let vs: Vec<WeightVector> = (0..=8u64)
        .flat_map(|a| (0..=8u64).map(move |b| WeightVector(vec![a, b])))
        .collect();
    for a in &vs {
        for b in &vs {
            let ratio = ratio_signature(a).unwrap() == ratio_signature(b).unwrap();
            let proj = projective_signature(a) == projective_signature(b);
            assert_eq!(ratio, proj, "{:?} {:?}", a.0, b.0);
        }
    }
}

#[test]
fn proportional_vectors_share_ratios() {
    let vs: Vec<WeightVector> = (0..64u64)
        .map(|i| WeightVector(vec![i >> 4, (i >> 2) & 3, i & 3]))
        .collect();
    for a in &vs {
        for b in &vs {
            if projective_signature(a) == projective_signature(b) {
                assert_eq!(ratio_signature(a).unwrap(), ratio_signature(b).unwrap());
            }
        }
    }
}
