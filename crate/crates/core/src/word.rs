//! Words in the free monoid on `d` letters.
//!
//! Letters are 1-based and stored in product order: the stored sequence
//! `(l1, ..., lN)` stands for the monomial `Z_{l1} Z_{l2} ... Z_{lN}`.
//! A word written `a = i_N ... i_1` with `z^a = z_{i_N} ... z_{i_1}` is
//! therefore stored as `(i_N, ..., i_1)`, i.e. exactly as written.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<usize>);

impl Word {
    /// The monoid unit.
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    /// Builds a word and checks every letter lies in `1..=d`.
    pub fn checked(letters: Vec<usize>, d: usize) -> Result<Self> {
        let w = Word(letters);
        w.check(d)?;
        Ok(w)
    }

    pub fn letter(j: usize) -> Self {
        Word(vec![j])
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check(&self, d: usize) -> Result<()> {
        match self.0.iter().find(|&&l| l == 0 || l > d) {
            Some(&letter) => Err(Error::LetterOutOfRange { letter, d }),
            None => Ok(()),
        }
    }

    /// Monoid product: the monomial of `u.concat(w)` is `z^u z^w`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Prepends a letter.
    pub fn prepend(&self, j: usize) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(j);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    /// Reversal.
    pub fn transpose(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// All ways to write `self = u·w`, from `u = ∅` upward.
    pub fn splits(&self) -> impl Iterator<Item = (Word, Word)> + '_ {
        (0..=self.0.len()).map(move |i| (Word(self.0[..i].to_vec()), Word(self.0[i..].to_vec())))
    }

    /// Position of this word in the graded lexicographic enumeration over `d` letters.
    pub fn index(&self, d: usize) -> usize {
        let offset: usize = (0..self.len()).map(|k| d.pow(k as u32)).sum();
        let within = self.0.iter().fold(0usize, |acc, &l| acc * d + (l - 1));
        offset + within
    }
}

pub fn word_transpose(w: &Word) -> Word {
    w.transpose()
}

/// Number of words of length at most `max_len` over `d` letters.
pub fn count_words_up_to(d: usize, max_len: usize) -> usize {
    (0..=max_len).map(|k| d.pow(k as u32)).sum()
}

/// All words of length at most `max_len`, graded lexicographic.
pub fn words_up_to(d: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * d);
        for w in &layer {
            for j in 1..=d {
                next.push(w.concat(&Word::letter(j)));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// All words of length exactly `len`, lexicographic.
pub fn words_of_len(d: usize, len: usize) -> Vec<Word> {
    let all = words_up_to(d, len);
    let start = count_words_up_to(d, len) - d.pow(len as u32);
    all[start..].to_vec()
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self.0.iter().map(|l| format!("z{l}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_matches_index() {
        for d in 1..=3 {
            let ws = words_up_to(d, 3);
            assert_eq!(ws.len(), count_words_up_to(d, 3));
            for (i, w) in ws.iter().enumerate() {
                assert_eq!(w.index(d), i);
            }
            let mut sorted = ws.clone();
            sorted.sort();
            assert_eq!(sorted, ws);
        }
    }

    #[test]
    fn transpose_reverses() {
        assert_eq!(Word::new(vec![2, 1]).transpose(), Word::new(vec![1, 2]));
        assert_eq!(Word::empty().transpose(), Word::empty());
    }

    #[test]
    fn letter_range() {
        assert!(Word::checked(vec![1, 3], 2).is_err());
        assert!(Word::checked(vec![0], 2).is_err());
        assert!(Word::checked(vec![2, 1], 2).is_ok());
    }

    #[test]
    fn splits_cover_all_cuts() {
        let w = Word::new(vec![1, 2, 1]);
        let s: Vec<_> = w.splits().collect();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|(u, v)| u.concat(v) == w));
    }
}
