use invcorr::combinat::*;
use num_bigint::BigUint;
use proptest::prelude::*;

fn figure_word() -> Vec<usize> {
    vec![2, 1, 3, 6, 9, 4, 7, 8, 5]
}

fn longest_increasing_brute(word: &[usize]) -> usize {
    let n = word.len();
    (0u32..1 << n)
        .filter(|mask| {
            let sub: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| word[i]).collect();
            sub.windows(2).all(|w| w[0] < w[1])
        })
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap()
}

#[test]
fn small_shapes() {
    let id = Involution::identity(3);
    let s = rsk_shape(&id);
    assert_eq!(s.parts(), &[3]);
    assert_eq!(s.alternating_sum(), 3);
    let swap = Involution::from_cycles(2, &[(1, 2)]).unwrap();
    let s = rsk_shape(&swap);
    assert_eq!(s.parts(), &[1, 1]);
    assert_eq!(s.alternating_sum(), 0);
}

#[test]
fn figure_involution() {
    let inv = Involution::from_cycles(9, &[(1, 2), (4, 6), (5, 9)]).unwrap();
    assert_eq!(inv.word(), figure_word().as_slice());
    assert_eq!(longest_increasing_brute(inv.word()), 5);
    assert_eq!(rsk_shape(&inv).part(0), 5);
    assert_eq!(greene_lengths(&inv, 1).unwrap().lengths, vec![5]);
    assert_eq!(k_increasing_oracle(inv.word(), 1).unwrap(), 5);
}

#[test]
fn greene_examples() {
    let p = greene_lengths(&Involution::identity(3), 2).unwrap();
    assert_eq!(p.lengths, vec![3, 3]);
    assert_eq!(p.lambda_k, vec![3, 0]);
    assert_eq!(k_increasing_oracle(&[2, 1], 2).unwrap(), 2);
    assert_eq!(k_increasing_oracle(&[1, 2, 3], 1).unwrap(), 3);
    assert!(k_increasing_oracle(&(1..=11).collect::<Vec<_>>(), 1).is_err());
    assert!(greene_lengths(&Involution::identity(3), 4).is_err());
}

#[test]
fn invalid_inputs_rejected() {
    assert!(Involution::new(vec![2, 3, 1]).is_err());
    assert!(Involution::new(vec![1, 5]).is_err());
    assert!(Partition::new(vec![1, 2]).is_err());
    assert_eq!(Partition::new(vec![2, 1, 0]).unwrap().parts(), &[2, 1]);
}

#[test]
fn greene_matches_oracle_exhaustively() {
    for n in 1..=8 {
        for inv in all_involutions(n) {
            let profile = greene_lengths(&inv, n).unwrap();
            for k in 1..=n {
                assert_eq!(profile.lengths[k - 1] as usize, k_increasing_oracle(inv.word(), k).unwrap());
            }
            assert_eq!(*profile.lengths.last().unwrap() as usize, n);
            assert!(profile.lambda_k.windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(rsk_shape(&inv).alternating_sum() as usize, inv.fixed_points());
        }
    }
}

#[test]
fn involution_counts() {
    assert_eq!(count_involutions(1, 1), BigUint::from(3u32));
    assert_eq!(count_involutions(0, 7), BigUint::from(1u32));
    assert_eq!(count_involutions(2, 0), BigUint::from(3u32));
    for n in 0..=9usize {
        let all = all_involutions(n);
        for two in 0..=n / 2 {
            let m = n - 2 * two;
            let c = all.iter().filter(|i| i.two_cycles() == two).count();
            assert_eq!(count_involutions(two as u64, m as u64), BigUint::from(c));
        }
    }
}

#[test]
fn tableaux_sum_to_involution_counts() {
    for size in 0..=10u32 {
        let parts = partitions_of(size);
        for n in 0..=size / 2 {
            let m = size - 2 * n;
            let total: BigUint = parts
                .iter()
                .filter(|p| p.alternating_sum() == m as u64)
                .map(f_lambda)
                .sum();
            assert_eq!(total, count_involutions(n as u64, m as u64));
        }
    }
}

#[test]
fn t_alpha_values() {
    assert_eq!(t_alpha(0, 0.3), 1.0);
    assert_eq!(t_alpha(2, 1.0), 2.0);
    let mut sum = 0.0;
    let mut fact = 1.0;
    for n in 0..=40u64 {
        if n > 0 {
            fact *= n as f64;
        }
        sum += t_alpha(n, 1.0) / fact;
    }
    assert!((sum - 1.5f64.exp()).abs() < 1e-10);
}

#[test]
fn poissonized_pdf() {
    let e = pdf_q(&Partition::empty(), 2.0, 0.5).unwrap();
    assert!((e - (-(1.0f64).sqrt() - 1.0).exp()).abs() < 1e-15);
    let one = pdf_q(&Partition::new(vec![1]).unwrap(), 1.0, 1.0).unwrap();
    assert!((one - (-1.5f64).exp()).abs() < 1e-15);
    // oracle: involution numbers from I_N = I_{N-1} + (N-1) I_{N-2}
    let mut inv_counts = vec![1.0f64, 1.0];
    for n in 2..=16 {
        let v = inv_counts[n - 1] + (n - 1) as f64 * inv_counts[n - 2];
        inv_counts.push(v);
    }
    let mut total = 0.0;
    let mut fact = 1.0;
    for n in 0..=16u32 {
        if n > 0 {
            fact *= n as f64;
        }
        let shell: f64 = partitions_of(n).iter().map(|p| pdf_q(p, 1.0, 1.0).unwrap()).sum();
        let expected = (-1.5f64).exp() * inv_counts[n as usize] / fact;
        assert!((shell - expected).abs() < 1e-14, "size {n}");
        total += shell;
        if n == 12 {
            assert!((total - 0.999_971_072_648_133).abs() < 1e-12, "{total}");
        }
    }
    assert!((1.0 - 1e-6..=1.0 + 1e-12).contains(&total), "{total}");
    // large shapes go through the log-space route
    let big = Partition::new(vec![20, 15, 5, 1]).unwrap();
    let exact = f_lambda(&big);
    let ln_exact = exact.to_string().len() as f64; // sanity on magnitude
    assert!(ln_exact > 10.0);
    let f = num_traits::ToPrimitive::to_f64(&exact).unwrap();
    let ln_fact: f64 = (1..=41).map(|k| (k as f64).ln()).sum();
    assert!((f.ln() - ln_fact - ln_f_over_factorial(&big)).abs() < 1e-10);
}

#[test]
fn pdf_alpha_zero_supports_only_no_fixed_points() {
    let p = Partition::new(vec![2, 2]).unwrap();
    assert!(pdf_q(&p, 1.0, 0.0).unwrap() > 0.0);
    assert_eq!(pdf_q(&Partition::new(vec![3]).unwrap(), 1.0, 0.0).unwrap(), 0.0);
}

fn involution_strategy() -> impl Strategy<Value = Involution> {
    (1usize..40).prop_flat_map(|n| {
        Just((1..=n).collect::<Vec<usize>>()).prop_shuffle().prop_flat_map(move |perm| {
            (0..=n).prop_map(move |fixed| {
                let mut mapping = vec![0; n];
                for &i in &perm[..fixed] {
                    mapping[i - 1] = i;
                }
                for pair in perm[fixed..].chunks(2) {
                    if pair.len() == 2 {
                        mapping[pair[0] - 1] = pair[1];
                        mapping[pair[1] - 1] = pair[0];
                    } else {
                        mapping[pair[0] - 1] = pair[0];
                    }
                }
                Involution::new(mapping).unwrap()
            })
        })
    })
}

proptest! {
    #[test]
    fn profile_is_ordered_and_fixed_points_match(inv in involution_strategy()) {
        let n = inv.size();
        let p = greene_lengths(&inv, n).unwrap();
        prop_assert!(p.lambda_k.windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(*p.lengths.last().unwrap() as usize, n);
        prop_assert_eq!(rsk_shape(&inv).alternating_sum() as usize, inv.fixed_points());
    }
}

proptest! {
    #[test]
    fn truncated_insertion_keeps_top_rows(word in proptest::sample::subsequence((0usize..60).collect::<Vec<_>>(), 0..60).prop_shuffle(), k in 1usize..6) {
        let full = invcorr::combinat::rsk_shape_word(&word);
        let top = invcorr::combinat::rsk_top_rows(&word, k);
        let expect: Vec<u32> = (0..k).map(|j| full.part(j)).collect();
        prop_assert_eq!(top, expect);
    }
}
