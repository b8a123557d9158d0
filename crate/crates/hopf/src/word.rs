//! Words over the two-letter alphabet {X, Y}.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::HopfError;

/// Maximum word length supported by the packed representation.
pub const MAX_LEN: usize = 64;

/// A word over {X, Y}, packed into a `u64` with the first letter in the
/// most significant used bit. `X` is stored as 0 and `Y` as 1.
///
/// Words order first by length and then lexicographically with `X < Y`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Word {
    bits: u64,
    len: u8,
}

/// A single letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    /// Outer integration variable paired with `u`.
    X,
    /// Inner integration variable paired with `v̄`.
    Y,
}

impl Word {
    /// The empty word, unit of the shuffle product.
    pub const EMPTY: Word = Word { bits: 0, len: 0 };

    /// Builds a word from letters.
    pub fn from_letters(letters: &[Letter]) -> Result<Self, HopfError> {
        if letters.len() > MAX_LEN {
            return Err(HopfError::WordTooLong(letters.len()));
        }
        let mut w = Word::EMPTY;
        for &l in letters {
            w = w.push(l);
        }
        Ok(w)
    }

    /// `(XY)^k` as a concatenation power.
    pub fn xy_power(k: usize) -> Self {
        let mut w = Word::EMPTY;
        for _ in 0..k {
            w = w.push(Letter::X).push(Letter::Y);
        }
        w
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.len as usize
    }

    /// True for the empty word.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Grading: the number of `X` letters.
    pub fn degree(&self) -> usize {
        self.len() - self.count_y()
    }

    fn count_y(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Letter at position `i` (0-based from the left).
    pub fn letter(&self, i: usize) -> Letter {
        debug_assert!(i < self.len());
        if (self.bits >> (self.len() - 1 - i)) & 1 == 1 {
            Letter::Y
        } else {
            Letter::X
        }
    }

    /// Appends a letter on the right.
    pub fn push(self, l: Letter) -> Self {
        debug_assert!(self.len() < MAX_LEN);
        let b = matches!(l, Letter::Y) as u64;
        Word {
            bits: (self.bits << 1) | b,
            len: self.len + 1,
        }
    }

    /// Concatenation `self · other`.
    pub fn concat(self, other: Word) -> Self {
        debug_assert!(self.len() + other.len() <= MAX_LEN);
        if other.len == 0 {
            return self;
        }
        Word {
            bits: (self.bits << other.len) | other.bits,
            len: self.len + other.len,
        }
    }

    /// Splits into the prefix of length `k` and the remaining suffix.
    pub fn split_at(self, k: usize) -> (Word, Word) {
        debug_assert!(k <= self.len());
        let rest = self.len() - k;
        let suffix_mask = if rest == 64 { u64::MAX } else { (1u64 << rest) - 1 };
        let prefix_bits = if rest == 64 { 0 } else { self.bits >> rest };
        (
            Word {
                bits: prefix_bits,
                len: k as u8,
            },
            Word {
                bits: self.bits & suffix_mask,
                len: rest as u8,
            },
        )
    }

    /// First letter and remaining word.
    fn split_first(self) -> Option<(Letter, Word)> {
        if self.len == 0 {
            return None;
        }
        let (head, tail) = self.split_at(1);
        let l = if head.bits == 1 { Letter::Y } else { Letter::X };
        Some((l, tail))
    }

    /// Equal numbers of `X` and `Y`, and every prefix has at least as many
    /// `X` as `Y`. The empty word is admissible.
    pub fn is_admissible(&self) -> bool {
        let mut balance: i32 = 0;
        for i in 0..self.len() {
            balance += match self.letter(i) {
                Letter::X => 1,
                Letter::Y => -1,
            };
            if balance < 0 {
                return false;
            }
        }
        balance == 0
    }

    /// Admissible, nonempty, and every proper nonempty prefix has strictly
    /// more `X` than `Y`.
    pub fn is_connected(&self) -> bool {
        if self.is_empty() || !self.is_admissible() {
            return false;
        }
        let mut balance: i32 = 0;
        for i in 0..self.len() - 1 {
            balance += match self.letter(i) {
                Letter::X => 1,
                Letter::Y => -1,
            };
            if balance == 0 {
                return false;
            }
        }
        true
    }
}

/// Structural class of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WordClass {
    /// Unequal letter counts or a prefix with more `Y` than `X`.
    Inadmissible,
    /// Admissible but splits into admissible factors (or empty).
    AdmissibleDisconnected,
    /// Admissible with no proper admissible prefix.
    AdmissibleConnected,
}

/// Classifies a word as inadmissible, admissible-disconnected or connected.
pub fn classify_word(w: Word) -> WordClass {
    if w.is_connected() {
        WordClass::AdmissibleConnected
    } else if w.is_admissible() {
        WordClass::AdmissibleDisconnected
    } else {
        WordClass::Inadmissible
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then(self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("1");
        }
        for i in 0..self.len() {
            f.write_str(match self.letter(i) {
                Letter::X => "X",
                Letter::Y => "Y",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = HopfError;

    /// Parses a string of `X`/`Y` letters; `"1"` and `""` give the empty word.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "1" {
            return Ok(Word::EMPTY);
        }
        let letters = s
            .chars()
            .map(|c| match c {
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                other => Err(HopfError::BadLetter(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Word::from_letters(&letters)
    }
}

/// Raw shuffle of two words over the unrestricted alphabet, with each
/// interleaving counted once. Results are passed to `sink` with multiplicity.
pub(crate) fn shuffle_words(a: Word, b: Word, sink: &mut impl FnMut(Word)) {
    fn rec(a: Word, b: Word, acc: Word, sink: &mut impl FnMut(Word)) {
        match (a.split_first(), b.split_first()) {
            (None, None) => sink(acc),
            (None, Some(_)) => sink(acc.concat(b)),
            (Some(_), None) => sink(acc.concat(a)),
            (Some((la, ra)), Some((lb, rb))) => {
                rec(ra, b, acc.push(la), sink);
                rec(a, rb, acc.push(lb), sink);
            }
        }
    }
    rec(a, b, Word::EMPTY, sink);
}
