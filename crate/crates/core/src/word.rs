use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element of the free semigroup on letters `1..=d`.
///
/// Letters are stored most-significant first: the word `i_N ⋯ i_1` is stored
/// as `[i_N, …, i_1]` and evaluates to `Z_{i_N} ⋯ Z_{i_1}`, i.e. the matrix
/// factors appear in storage order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    pub fn letter(i: usize) -> Self {
        Word(vec![i])
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

    /// Checks that every letter lies in `1..=d`.
    pub fn check_alphabet(&self, d: usize) -> Result<()> {
        match self.0.iter().find(|&&l| l == 0 || l > d) {
            Some(&letter) => Err(Error::LetterOutOfRange { letter, d }),
            None => Ok(()),
        }
    }

    /// `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Letter reversal `a ↦ aᵀ`.
    pub fn transpose(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// All words of length exactly `len` over `1..=d`, in lexicographic order.
    pub fn all_of_length(d: usize, len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| (1..=d).map(move |l| w.concat(&Word::letter(l))))
                .collect();
        }
        out
    }
}

/// Concatenation with an alphabet check on both operands.
pub fn word_concat(a: &Word, b: &Word, d: usize) -> Result<Word> {
    a.check_alphabet(d)?;
    b.check_alphabet(d)?;
    Ok(a.concat(b))
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}
