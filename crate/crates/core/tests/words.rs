use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;
use pseudospace::{Letter, Word};

type L = (u8, u8);

const LETTERS: [L; 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)];

fn comparable(s: L, t: L) -> bool {
    (s.0 <= t.0 && t.1 <= s.1) || (t.0 <= s.0 && s.1 <= t.1)
}

fn commute(s: L, t: L) -> bool {
    matches!((s, t), ((0, 0), (2, 2)) | ((2, 2), (0, 0)))
}

fn sort_runs(w: &[L]) -> Vec<L> {
    let mut out = w.to_vec();
    let mut i = 0;
    while i < out.len() {
        let mut j = i;
        while j < out.len() && (out[j] == (0, 0) || out[j] == (2, 2)) {
            j += 1;
        }
        out[i..j].sort();
        i = j.max(i + 1);
    }
    out
}

/// Every word reachable by swaps and cancellations; returns the shortest ones.
fn oracle(w: &[L]) -> BTreeSet<Vec<L>> {
    let mut seen = BTreeSet::from([w.to_vec()]);
    let mut queue = VecDeque::from([w.to_vec()]);
    while let Some(v) = queue.pop_front() {
        for i in 0..v.len().saturating_sub(1) {
            let (s, t) = (v[i], v[i + 1]);
            let mut next = Vec::new();
            if commute(s, t) {
                let mut u = v.clone();
                u.swap(i, i + 1);
                next.push(u);
            }
            if comparable(s, t) {
                let mut u = v.clone();
                // Cancel the smaller letter.
                let smaller = if s.0 >= t.0 && s.1 <= t.1 { i } else { i + 1 };
                u.remove(smaller);
                next.push(u);
            }
            for u in next {
                if seen.insert(u.clone()) {
                    queue.push_back(u);
                }
            }
        }
    }
    let min = seen.iter().map(Vec::len).min().unwrap_or(0);
    seen.into_iter().filter(|v| v.len() == min).collect()
}

fn to_word(w: &[L]) -> Word {
    Word::new(w.iter().map(|&(a, b)| Letter::new(a, b).unwrap()).collect())
}

fn from_word(w: &Word) -> Vec<L> {
    w.letters().iter().map(|s| (s.lo(), s.hi())).collect()
}

fn word_strategy(max: usize) -> impl Strategy<Value = Vec<L>> {
    prop::collection::vec(prop::sample::select(LETTERS.to_vec()), 0..=max)
}

fn agrees_with_oracle(w: &[L]) -> bool {
    let shortest = oracle(w);
    let nf = from_word(&to_word(w).nonsplitting_reduce());
    let classes: BTreeSet<Vec<L>> = shortest.iter().map(|v| sort_runs(v)).collect();
    classes.len() == 1 && shortest.contains(&nf)
}

#[test]
fn normal_form_matches_oracle_up_to_length_four() {
    let mut words = vec![vec![]];
    for _ in 0..4 {
        let mut next = Vec::new();
        for w in &words {
            for &s in &LETTERS {
                let mut v: Vec<L> = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        for w in &next {
            assert!(agrees_with_oracle(w), "{}", to_word(w));
        }
        words = next;
    }
}

proptest! {
    #[test]
    fn normal_form_matches_oracle(w in word_strategy(9)) {
        prop_assert!(agrees_with_oracle(&w));
    }

    #[test]
    fn reduction_is_idempotent(w in word_strategy(12)) {
        let nf = to_word(&w).nonsplitting_reduce();
        prop_assert_eq!(nf.nonsplitting_reduce(), nf.clone());
        prop_assert!(nf.is_reduced());
    }

    #[test]
    fn reduction_respects_concatenation(u in word_strategy(8), v in word_strategy(8)) {
        let (u, v) = (to_word(&u), to_word(&v));
        let whole = u.concat(&v).nonsplitting_reduce();
        let parts = u.nonsplitting_reduce().concat_reduce(&v.nonsplitting_reduce());
        prop_assert!(whole.equal_up_to_permutation(&parts));
    }

    #[test]
    fn rewrite_steps_are_quadratic(w in word_strategy(16)) {
        let n = w.len();
        let (_, steps) = to_word(&w).reduce_with_steps();
        prop_assert!(steps <= n * n);
    }

    #[test]
    fn extension_test_matches_full_check(w in word_strategy(10), s in prop::sample::select(LETTERS.to_vec())) {
        let w = to_word(&w).nonsplitting_reduce();
        let s = Letter::new(s.0, s.1).unwrap();
        let mut ws = w.clone();
        ws.push(s);
        prop_assert_eq!(w.extends_reduced(s), ws.is_reduced());
    }

    #[test]
    fn display_round_trips(w in word_strategy(8)) {
        let w = to_word(&w);
        prop_assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
    }
}
