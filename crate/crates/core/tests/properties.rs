use std::collections::BTreeSet;

use proptest::prelude::*;
use sciclf::analytics::{
    expand_pairs, intrafield_stats, row_normalize, sigma_across, sigma_within, strip_blocks, Block, Matrix,
};
use sciclf::clf::predict_from_scores;
use sciclf::ingest::store::{decode_batch, encode_batch};
use sciclf::ingest::{decode_inverted_index, encode_inverted_index, vectorize, TokenSeq, VocabIndex};
use sciclf::taxonomy::Mode;
use sciclf::weaklabel::{split_corpus, AnnotatedPaper, SplitConfig, SplitRole, Triplet};

fn matrix(max_n: usize, max_v: u64) -> impl Strategy<Value = Matrix<u64>> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(0..=max_v, n * n)
            .prop_map(move |data| Matrix::from_rows(&data.chunks(n).map(<[u64]>::to_vec).collect::<Vec<_>>()).unwrap())
    })
}

/// Split `n` rows into consecutive blocks of the given sizes.
fn blocks_for(n: usize, cuts: &[usize]) -> Vec<Block> {
    let mut edges: Vec<usize> = cuts.iter().map(|c| c % n).filter(|&c| c > 0).collect();
    edges.push(0);
    edges.push(n);
    edges.sort_unstable();
    edges.dedup();
    edges.windows(2).enumerate().map(|(d, w)| Block { discipline: d as u32, start: w[0], end: w[1] }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn inverted_index_round_trip(tokens in prop::collection::vec("[A-Za-z0-9.,;:!?'-]{1,6}", 0..40)) {
        let text = tokens.join(" ");
        let rec = encode_inverted_index(9, &text);
        prop_assert_eq!(rec.index_length, tokens.len());
        prop_assert_eq!(decode_inverted_index(&rec).unwrap(), text);
    }

    #[test]
    fn normalized_rows_are_stochastic(m in matrix(8, 1000)) {
        let out = row_normalize(&m.to_f64());
        for (r, row) in out.matrix.rows().enumerate() {
            prop_assert!(row.iter().all(|v| v.is_finite() && *v >= 0.0));
            if out.zero_rows.contains(&r) {
                prop_assert!(row.iter().all(|&v| v == 0.0));
                prop_assert!(m.row(r).iter().all(|&v| v == 0));
            } else {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn within_scores_are_bounded(m in matrix(8, 50)) {
        let s = sigma_within(&m);
        for (intra, unbal) in s.intra.iter().zip(&s.unbal) {
            if let (Some(i), Some(u)) = (intra, unbal) {
                prop_assert!((0.0..=1.0).contains(i));
                prop_assert!((-1.0..=1.0).contains(u));
            }
        }
        let stats = intrafield_stats(&m);
        prop_assert_eq!(stats.kappa_total, stats.k_in.iter().sum::<u64>());
        prop_assert_eq!(stats.kappa_total, stats.k_out.iter().sum::<u64>());
    }

    #[test]
    fn across_scores_are_bounded(m in matrix(8, 50), cuts in prop::collection::vec(0usize..8, 0..4)) {
        let blocks = blocks_for(m.n(), &cuts);
        let s = sigma_across(&m, &m.transpose(), &blocks).unwrap();
        for (inter, unbal) in s.inter.iter().zip(&s.unbal_not_d) {
            if let (Some(i), Some(u)) = (inter, unbal) {
                prop_assert!((0.0..=1.0).contains(i));
                prop_assert!((-1.0..=1.0).contains(u));
            }
        }
        let stripped = strip_blocks(&m, &blocks).unwrap();
        for (i, (b, s)) in stripped.b0.as_slice().iter().zip(stripped.i_star.as_slice()).enumerate() {
            prop_assert_eq!(b + s, m.as_slice()[i]);
        }
        // keeping only the diagonal blocks leaves nothing to cross
        let s = sigma_across(&stripped.b0, &stripped.b0.transpose(), &blocks).unwrap();
        prop_assert!(s.inter.iter().flatten().all(|&v| v == 1.0));
    }

    #[test]
    fn expansion_cardinality(a in prop::collection::btree_set(0u32..20, 0..6), b in prop::collection::btree_set(0u32..20, 0..6)) {
        prop_assert_eq!(expand_pairs(&a, &b).len(), a.len() * b.len());
    }

    #[test]
    fn lower_threshold_predicts_a_superset(scores in prop::collection::vec(0.0f64..1.0, 1..10)) {
        let low: BTreeSet<usize> = predict_from_scores(&scores, Mode::Multi, 0.3).into_iter().collect();
        let high: BTreeSet<usize> = predict_from_scores(&scores, Mode::Multi, 0.5).into_iter().collect();
        prop_assert!(high.is_subset(&low));
    }

    #[test]
    fn batch_codec_round_trip(seqs in prop::collection::vec((any::<u64>(), prop::collection::vec(any::<u32>(), 0..20)), 0..10)) {
        let seqs: Vec<TokenSeq> = seqs.into_iter().map(|(paper_id, ids)| TokenSeq { paper_id, ids }).collect();
        prop_assert_eq!(decode_batch(&encode_batch(&seqs)).unwrap(), seqs);
    }

    #[test]
    fn vocab_and_vectors(docs in prop::collection::vec(prop::collection::vec("[a-e]{1,2}", 1..15), 1..8), k in 1usize..10, max_len in 1usize..12) {
        let vocab = VocabIndex::build(&docs, k).unwrap();
        prop_assert!(vocab.len() <= k);
        for doc in &docs {
            let v = vectorize(1, doc, &vocab, max_len);
            prop_assert_eq!(v.ids.len(), max_len);
            prop_assert!(v.ids.iter().all(|&id| (id as usize) <= vocab.len()));
        }
    }

    #[test]
    fn split_assigns_every_paper(strata in prop::collection::vec(0u32..4, 1..60), unmatched in 0u64..10, seed in any::<u64>()) {
        let annotated: Vec<AnnotatedPaper> = strata
            .iter()
            .enumerate()
            .map(|(i, &d)| AnnotatedPaper { paper_id: i as u64, triplets: vec![Triplet { discipline: d, field: 0, subfield: 0 }] })
            .collect();
        let pool: Vec<u64> = (1000..1000 + unmatched).collect();
        let config = SplitConfig { seed, ..Default::default() };
        let split = split_corpus(&annotated, &pool, &config).unwrap();
        prop_assert_eq!(split.roles.len(), annotated.len() + pool.len());
        for id in &pool {
            prop_assert_eq!(split.role(*id), Some(SplitRole::Test));
        }
        for d in 0..4u32 {
            let ids: Vec<u64> = annotated.iter().filter(|p| p.primary().discipline == d).map(|p| p.paper_id).collect();
            let val = ids.iter().filter(|&&id| split.role(id) == Some(SplitRole::Validation)).count();
            let expected = if ids.len() < 2 { 0 } else { (ids.len() as f64 * 0.4).round() as usize };
            prop_assert_eq!(val, expected);
        }
        prop_assert_eq!(split_corpus(&annotated, &pool, &config).unwrap(), split);
    }
}
