//! Letters (nonempty subintervals of `[0,2]`) and words over them.
//!
//! The only commuting pair is `[0]·[2]`. A word is reduced when no word in
//! its permutation class has two adjacent letters one of which contains the
//! other. Normal forms are reduced and list every adjacent commuting pair as
//! `[0]` before `[2]`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A nonempty subinterval `[lo, hi]` of `[0,2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    lo: u8,
    hi: u8,
}

impl Letter {
    pub const P0: Letter = Letter { lo: 0, hi: 0 };
    pub const P1: Letter = Letter { lo: 1, hi: 1 };
    pub const P2: Letter = Letter { lo: 2, hi: 2 };
    pub const P01: Letter = Letter { lo: 0, hi: 1 };
    pub const P12: Letter = Letter { lo: 1, hi: 2 };
    pub const P02: Letter = Letter { lo: 0, hi: 2 };

    /// All six letters, in a fixed order.
    pub const ALL: [Letter; 6] = [
        Letter::P0,
        Letter::P1,
        Letter::P2,
        Letter::P01,
        Letter::P12,
        Letter::P02,
    ];

    pub fn new(lo: u8, hi: u8) -> Result<Letter> {
        if lo > hi || hi > 2 {
            return Err(Error::InvalidLetter(format!("[{lo},{hi}]")));
        }
        Ok(Letter { lo, hi })
    }

    pub fn lo(self) -> u8 {
        self.lo
    }

    pub fn hi(self) -> u8 {
        self.hi
    }

    /// Number of levels in the interval.
    pub fn len(self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn contains_level(self, level: u8) -> bool {
        self.lo <= level && level <= self.hi
    }

    /// Interval containment, equality included.
    pub fn is_subletter_of(self, other: Letter) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn comparable(self, other: Letter) -> bool {
        self.is_subletter_of(other) || other.is_subletter_of(self)
    }

    /// Proper subletters, in `ALL` order.
    pub fn proper_subletters(self) -> Vec<Letter> {
        Letter::ALL
            .into_iter()
            .filter(|&t| t != self && t.is_subletter_of(self))
            .collect()
    }

    fn commutes_with(self, other: Letter) -> bool {
        (self == Letter::P0 && other == Letter::P2) || (self == Letter::P2 && other == Letter::P0)
    }

    fn is_commuting(self) -> bool {
        self == Letter::P0 || self == Letter::P2
    }

    /// The letter whose levels are exactly `levels`, if that set is an interval.
    pub fn from_levels(levels: &[u8]) -> Option<Letter> {
        let lo = *levels.iter().min()?;
        let hi = *levels.iter().max()?;
        if levels.len() != (hi - lo + 1) as usize {
            return None;
        }
        Letter::new(lo, hi).ok()
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}{}", self.lo, self.hi)
        }
    }
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Letter> {
        match s {
            "0" => Ok(Letter::P0),
            "1" => Ok(Letter::P1),
            "2" => Ok(Letter::P2),
            "01" => Ok(Letter::P01),
            "12" => Ok(Letter::P12),
            "02" => Ok(Letter::P02),
            _ => Err(Error::InvalidLetter(s.to_string())),
        }
    }
}

/// A finite sequence of letters.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Word {
        Word(letters)
    }

    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, s: Letter) {
        self.0.push(s);
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Swaps the commuting pair at positions `i`, `i+1`.
    pub fn permute_step(&self, i: usize) -> Result<Word> {
        if i + 1 >= self.0.len() {
            return Err(Error::BadPermutation(format!(
                "position {i} out of range for word of length {}",
                self.0.len()
            )));
        }
        if !self.0[i].commutes_with(self.0[i + 1]) {
            return Err(Error::BadPermutation(format!(
                "letters {} and {} at position {i} do not commute",
                self.0[i],
                self.0[i + 1]
            )));
        }
        let mut v = self.0.clone();
        v.swap(i, i + 1);
        Ok(Word(v))
    }

    /// Canonical representative of the permutation class: inside each maximal
    /// run of `[0]`/`[2]` letters, all `[0]` come first.
    pub fn canonical(&self) -> Word {
        let mut v = self.0.clone();
        canonical_sort(&mut v);
        Word(v)
    }

    pub fn is_reduced(&self) -> bool {
        let (nf, _) = reduce_counted(&self.0);
        nf.len() == self.0.len()
    }

    pub fn nonsplitting_reduce(&self) -> Word {
        Word(reduce_counted(&self.0).0)
    }

    /// Normal form together with the number of rewrite steps (swaps and
    /// cancellations) used to reach it.
    pub fn reduce_with_steps(&self) -> (Word, usize) {
        let (nf, steps) = reduce_counted(&self.0);
        (Word(nf), steps)
    }

    /// Whether `self·s` is reduced, assuming `self` is.
    pub fn extends_reduced(&self, s: Letter) -> bool {
        let run_start = self
            .0
            .iter()
            .rposition(|t| !t.is_commuting())
            .map_or(0, |i| i + 1);
        let run = &self.0[run_start..];
        let before = run_start.checked_sub(1).map(|i| self.0[i]);
        if s.is_commuting() {
            if run.contains(&s) {
                return false;
            }
            // s slides left past the other commuting letter.
            before.is_none_or(|t| !t.comparable(s))
        } else if run.is_empty() {
            before.is_none_or(|t| !t.comparable(s))
        } else {
            run.iter().all(|t| !t.comparable(s))
        }
    }

    pub fn concat_reduce(&self, other: &Word) -> Word {
        self.concat(other).nonsplitting_reduce()
    }

    pub fn equal_up_to_permutation(&self, other: &Word) -> bool {
        self.canonical() == other.canonical()
    }

    /// True iff every letter lies inside the level set `levels`.
    pub fn letters_within(&self, levels: &[u8]) -> bool {
        self.0
            .iter()
            .all(|s| (s.lo..=s.hi).all(|l| levels.contains(&l)))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Dot-separated letters; `e` or the empty string is the empty word.
    fn from_str(s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Word::empty());
        }
        s.split('.')
            .map(str::parse)
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Word {
        Word(v)
    }
}

/// Bubble `[2]·[0]` to `[0]·[2]`; returns the number of swaps.
fn canonical_sort(v: &mut [Letter]) -> usize {
    let mut swaps = 0;
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..v.len().saturating_sub(1) {
            if v[i] == Letter::P2 && v[i + 1] == Letter::P0 {
                v.swap(i, i + 1);
                swaps += 1;
                changed = true;
            }
        }
    }
    swaps
}

/// Finds one cancellation available in some permutation of the canonical
/// word `v`; returns the index of the letter to delete.
///
/// Within a maximal run of `[0]`/`[2]` letters every letter can be moved to
/// either end of the run, so the run behaves as a multiset whose members see
/// both outside neighbours. Letters outside runs never move.
fn find_cancellation(v: &[Letter]) -> Option<usize> {
    let n = v.len();
    let mut i = 0;
    while i < n {
        if v[i].is_commuting() {
            let start = i;
            while i < n && v[i].is_commuting() {
                i += 1;
            }
            let run = start..i;
            // Two copies of the same letter inside a run meet after permuting.
            for j in run.clone() {
                for k in (j + 1)..run.end {
                    if v[j] == v[k] {
                        return Some(k);
                    }
                }
            }
            let left = start.checked_sub(1).map(|p| v[p]);
            let right = if i < n { Some(v[i]) } else { None };
            for j in run {
                for t in [left, right].into_iter().flatten() {
                    // t is not a commuting letter, so it cannot be inside [0] or [2].
                    if v[j].is_subletter_of(t) {
                        return Some(j);
                    }
                }
            }
        } else {
            if i + 1 < n && !v[i + 1].is_commuting() && v[i].comparable(v[i + 1]) {
                return Some(if v[i].is_subletter_of(v[i + 1]) { i } else { i + 1 });
            }
            i += 1;
        }
    }
    None
}

fn reduce_counted(w: &[Letter]) -> (Vec<Letter>, usize) {
    let mut v = w.to_vec();
    let mut steps = canonical_sort(&mut v);
    while let Some(j) = find_cancellation(&v) {
        v.remove(j);
        steps += 1;
        steps += canonical_sort(&mut v);
    }
    (v, steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn permute_step_examples() {
        assert_eq!(w("0.2").permute_step(0).unwrap(), w("2.0"));
        assert_eq!(w("2.0").permute_step(0).unwrap(), w("0.2"));
        assert!(w("0.1").permute_step(0).is_err());
        assert!(w("0.2").permute_step(1).is_err());
    }

    #[test]
    fn reducedness_examples() {
        assert!(Word::empty().is_reduced());
        assert!(!w("1.01").is_reduced());
        assert!(!w("0.2.0").is_reduced());
        assert!(w("0.1.0.1").is_reduced());
        assert!(w("02").is_reduced());
        assert!(!w("02.1").is_reduced());
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(w("1.1").nonsplitting_reduce(), w("1"));
        assert_eq!(w("0.2.01").nonsplitting_reduce(), w("2.01"));
        assert_eq!(w("01.1.12").nonsplitting_reduce(), w("01.12"));
        assert_eq!(Word::empty().concat_reduce(&w("2.0")), w("0.2"));
        assert_eq!(w("0").concat_reduce(&w("01")), w("01"));
        assert_eq!(w("1").concat_reduce(&w("2")), w("1.2"));
    }

    #[test]
    fn permutation_equivalence() {
        assert!(w("0.2").equal_up_to_permutation(&w("2.0")));
        assert!(!w("0.1").equal_up_to_permutation(&w("1.0")));
        assert!(w("1.2.0.1").equal_up_to_permutation(&w("1.0.2.1")));
    }

    #[test]
    fn text_encoding() {
        assert_eq!(w("0.2.01").to_string(), "0.2.01");
        assert_eq!(Word::empty().to_string(), "e");
        assert!("0.3".parse::<Word>().is_err());
        assert!("0..1".parse::<Word>().is_err());
        assert_eq!(Letter::P02.to_string(), "02");
    }

    #[test]
    fn letter_containment_includes_equality() {
        assert!(Letter::P1.is_subletter_of(Letter::P1));
        assert!(Letter::P1.is_subletter_of(Letter::P02));
        assert!(!Letter::P0.is_subletter_of(Letter::P12));
        assert_eq!(Letter::P02.proper_subletters().len(), 5);
        assert!(Letter::P0.proper_subletters().is_empty());
        assert_eq!(Letter::from_levels(&[0, 2]), None);
        assert_eq!(Letter::from_levels(&[2, 1]), Some(Letter::P12));
    }
}
