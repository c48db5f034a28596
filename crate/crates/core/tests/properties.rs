use std::collections::BTreeSet;

use lambda_sync::catalog::{dyck, fischer_cover, full_shift, golden_mean, markov_dyck, sofic_from_graph};
use lambda_sync::flow::{expand_subshift, ExpansionContext};
use lambda_sync::intalg::{cokernel, smith_normal_form, FgAbelianGroup, IntMatrix};
use lambda_sync::ktheory::{extract_matrix_system, k0_tower, stationary_bf, Stabilization};
use lambda_sync::lgs::{build_lambda_sync_lgs, stationary_lgs, validate_lgs, LambdaGraphSystem};
use lambda_sync::oracle::{enumerate_words, is_admissible, left_extensions};
use lambda_sync::{GraphFile, Subshift, Word};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn catalog() -> Vec<Subshift> {
    vec![
        golden_mean(),
        full_shift(2).unwrap(),
        dyck(2).unwrap(),
        markov_dyck(vec![vec![1, 1], vec![1, 0]]).unwrap(),
        expand_subshift(&golden_mean(), None, None).unwrap(),
        expand_subshift(&dyck(2).unwrap(), None, None).unwrap(),
    ]
}

fn word_strategy() -> impl Strategy<Value = (usize, Vec<u16>)> {
    (0..6usize, proptest::collection::vec(0u16..5, 0..10))
}

/// Longest admissible prefix of a random word, after folding symbols into the alphabet.
fn admissible_prefix(sub: &Subshift, raw: &[u16]) -> Word {
    let k = sub.alphabet().len() as u16;
    let mut w = Word::empty();
    for &s in raw {
        let next = w.push(s % k);
        if !is_admissible(sub, &next).unwrap() {
            break;
        }
        w = next;
    }
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn language_is_factorial((i, raw) in word_strategy()) {
        let subs = catalog();
        let sub = &subs[i];
        let w = admissible_prefix(sub, &raw);
        for a in 0..=w.len() {
            for b in a..=w.len() {
                prop_assert!(is_admissible(sub, &Word(w.syms()[a..b].to_vec())).unwrap());
            }
        }
    }

    #[test]
    fn past_sets_shrink_under_extension((i, raw) in word_strategy(), split in 0usize..10, l in 0usize..3) {
        let subs = catalog();
        let sub = &subs[i];
        let w = admissible_prefix(sub, &raw);
        let mu = w.prefix(split.min(w.len()));
        let wide: BTreeSet<Word> = left_extensions(sub, &mu, l).unwrap().into_iter().collect();
        let narrow: BTreeSet<Word> = left_extensions(sub, &w, l).unwrap().into_iter().collect();
        prop_assert!(narrow.is_subset(&wide));
        prop_assert!(!narrow.is_empty());
    }

    #[test]
    fn rewriting_round_trips(raw in proptest::collection::vec(0u16..3, 0..16)) {
        let c = ExpansionContext::new(full_shift(3).unwrap().alphabet(), "2", "z").unwrap();
        let w = Word(raw);
        let x = c.xi(&w).unwrap();
        prop_assert!(!c.is_boundary_word(&x));
        prop_assert_eq!(c.eta(&x).unwrap(), w.clone());
        let lead = w.prepend(c.symbol());
        prop_assert_eq!(c.psi(&c.phi(&lead).unwrap()).unwrap(), lead);
    }

    #[test]
    fn snf_matches_determinantal_divisors(rows in proptest::collection::vec(proptest::collection::vec(-6i64..=6, 4), 1..5)) {
        let m = IntMatrix::from_i64(&rows);
        let s = smith_normal_form(&m);
        let diag: Vec<BigInt> = s.diagonal().into_iter().filter(|d| !d.is_zero()).collect();
        let mut prev = BigInt::one();
        for (k, d) in diag.iter().enumerate() {
            let dk = minors_gcd(&rows, k + 1);
            prop_assert_eq!(&prev * d, dk.clone());
            prev = dk;
        }
        prop_assert!(minors_gcd(&rows, diag.len() + 1).is_zero());
    }

    #[test]
    fn cokernel_is_unimodular_invariant(
        rows in proptest::collection::vec(proptest::collection::vec(-9i64..=9, 3), 3),
        ops in proptest::collection::vec((0usize..3, 0usize..3, -3i64..=3), 0..8),
    ) {
        let m = IntMatrix::from_i64(&rows);
        let mut u = IntMatrix::identity(3);
        let mut v = IntMatrix::identity(3);
        for (a, b, c) in ops {
            if a != b {
                let mut e = IntMatrix::identity(3);
                e.set(a, b, BigInt::from(c));
                u = e.mul(&u);
                v = v.mul(&e.transpose());
            }
        }
        prop_assert_eq!(cokernel(&u.mul(&m).mul(&v)), cokernel(&m));
    }
}

fn minors_gcd(rows: &[Vec<i64>], k: usize) -> BigInt {
    let (r, c) = (rows.len(), rows[0].len());
    let mut g = BigInt::zero();
    for rs in subsets(r, k) {
        for cs in subsets(c, k) {
            let sub: Vec<Vec<i64>> = rs.iter().map(|&i| cs.iter().map(|&j| rows[i][j]).collect()).collect();
            g = g.gcd(&BigInt::from(det(&sub)));
        }
    }
    g
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    out.extend(subsets(n - 1, k - 1).into_iter().map(|mut s| {
        s.push(n - 1);
        s
    }));
    out
}

/// Cofactor expansion.
fn det(m: &[Vec<i64>]) -> i64 {
    if m.is_empty() {
        return 1;
    }
    (0..m.len())
        .map(|j| {
            let minor: Vec<Vec<i64>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect()).collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * m[0][j] * det(&minor)
        })
        .sum()
}

#[test]
fn enumeration_is_sorted_and_factor_closed() {
    for sub in catalog() {
        let mut prev: Vec<Word> = vec![Word::empty()];
        for l in 1..=5 {
            let words = enumerate_words(&sub, l).unwrap();
            assert!(words.windows(2).all(|w| w[0] < w[1]));
            let shorter: BTreeSet<&Word> = prev.iter().collect();
            for w in &words {
                assert!(shorter.contains(&w.prefix(l - 1)) && shorter.contains(&w.suffix(l - 1)));
            }
            prev = words;
        }
    }
}

#[test]
fn markov_dyck_all_ones_is_dyck() {
    let md = markov_dyck(vec![vec![1, 1], vec![1, 1]]).unwrap();
    let d = dyck(2).unwrap();
    for l in 0..=7 {
        assert_eq!(enumerate_words(&md, l).unwrap(), enumerate_words(&d, l).unwrap());
    }
}

fn golden_presentations() -> Vec<GraphFile> {
    let parse = |s: &str| serde_json::from_str::<GraphFile>(s).unwrap();
    vec![
        parse(r#"{"states":["p","q"],"edges":[{"from":"p","to":"p","label":"a"},{"from":"p","to":"q","label":"a"},{"from":"q","to":"p","label":"b"}]}"#),
        parse(r#"{"states":["x","y"],"edges":[{"from":"x","to":"x","label":"a"},{"from":"x","to":"y","label":"b"},{"from":"y","to":"x","label":"a"}]}"#),
        parse(r#"{"states":["p","q","r"],"edges":[
            {"from":"p","to":"p","label":"a"},{"from":"p","to":"q","label":"a"},{"from":"q","to":"p","label":"b"},
            {"from":"r","to":"r","label":"a"},{"from":"r","to":"q","label":"a"},{"from":"p","to":"r","label":"a"},
            {"from":"r","to":"p","label":"a"}]}"#),
    ]
}

fn transposed_adjacency(g: &lambda_sync::LabeledGraph) -> IntMatrix {
    let a = g.adjacency();
    let rows: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    IntMatrix::from_rows(&rows, a.len()).transpose()
}

#[test]
fn fischer_covers_are_minimal_and_language_equivalent() {
    let golden = golden_mean();
    let mut groups = Vec::new();
    for g in golden_presentations() {
        let sub = sofic_from_graph(g).unwrap();
        let cover = fischer_cover(&sub).unwrap();
        assert!(cover.is_left_resolving() && cover.is_essential() && cover.is_strongly_connected());
        assert_eq!(cover.num_states(), 2);
        for l in 0..=8 {
            for w in enumerate_words(&sub, l).unwrap() {
                assert!(cover.reads(&w));
            }
            assert_eq!(enumerate_words(&sub, l).unwrap().len(), enumerate_words(&golden, l).unwrap().len());
        }
        groups.push(stationary_bf(&transposed_adjacency(&cover)).0);
    }
    assert!(groups.iter().all(|g| g == &groups[0]));
}

#[test]
fn stationary_towers_agree_with_the_cover() {
    for sub in [golden_mean(), full_shift(3).unwrap(), full_shift(4).unwrap()] {
        let cover = fischer_cover(&sub).unwrap();
        let ms = extract_matrix_system(&stationary_lgs(&cover, 4).unwrap());
        let Stabilization::Stabilized { group, .. } = k0_tower(&ms, 3).unwrap().stabilization else { panic!() };
        assert_eq!(group, stationary_bf(&transposed_adjacency(&cover)).0);
    }
}

#[test]
fn transposition_keeps_invariant_factors() {
    let m = IntMatrix::from_i64(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
    let a: Vec<BigInt> = smith_normal_form(&m).diagonal();
    let b: Vec<BigInt> = smith_normal_form(&m.transpose()).diagonal();
    assert_eq!(a, b);
    assert_eq!(cokernel(&m), FgAbelianGroup::from_diagonal(0, &[BigInt::from(2), BigInt::from(6), BigInt::from(12)]));
}

#[test]
fn stabilized_torsion_survives_an_extra_level() {
    for (sub, l) in [(full_shift(3).unwrap(), 4), (dyck(2).unwrap(), 4)] {
        let torsion = |levels| {
            let ms = extract_matrix_system(&build_lambda_sync_lgs(&sub, levels, levels + 2, levels + 4).unwrap());
            match k0_tower(&ms, 3).unwrap().stabilization {
                Stabilization::Stabilized { group, .. } => group.torsion_part(),
                Stabilization::TorsionStabilized { torsion, .. } => torsion,
                Stabilization::Undetermined => panic!("undetermined"),
            }
        };
        assert_eq!(torsion(l), torsion(l + 1));
    }
}

#[test]
fn built_systems_are_deterministic_and_round_trip() {
    for sub in catalog() {
        let a = build_lambda_sync_lgs(&sub, 3, 6, 7).unwrap();
        let b = build_lambda_sync_lgs(&sub, 3, 6, 7).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let back = LambdaGraphSystem::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert!(validate_lgs(&back).pass_from_level_1());
    }
}
