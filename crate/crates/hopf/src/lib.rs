//! Shuffle Hopf algebra of admissible words over {X, Y}.
//!
//! An iterated integral `∫_{x₁<y₁<…} u(x₁)v̄(y₁)…` is encoded by the word
//! recording the order of its `X` (u-slot) and `Y` (v̄-slot) variables.
//! Products of such integrals are shuffles of words, the coproduct is
//! deconcatenation into admissible factors, and `−ln T` is the shuffle
//! logarithm of `1 + XY + XYXY + …`. All coefficients are exact rationals.

mod series;
mod word;

pub use series::{
    admissible_splittings, check_primitive, coproduct, logt_expansion, logt_expansion_capped,
    series_exp, series_log, shuffle, transmission_inverse_series, TensorSeries, WordSeries,
    DEFAULT_DEGREE_CAP,
};
pub use word::{classify_word, Letter, Word, WordClass, MAX_LEN};

/// Errors raised by the word algebra.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HopfError {
    /// A character other than `X` or `Y` in a word literal.
    #[error("invalid letter {0:?}; words use only X and Y")]
    BadLetter(char),
    /// Word longer than the packed representation allows.
    #[error("word of length {0} exceeds the supported maximum of 64 letters")]
    WordTooLong(usize),
    /// The coproduct is only defined on admissible words.
    #[error("word {0} is not admissible")]
    NotAdmissible(String),
    /// log needs constant term 1, exp needs constant term 0.
    #[error("constant term must be {expected}, found {found}")]
    BadConstantTerm {
        /// Required constant term.
        expected: i64,
        /// Actual constant term.
        found: String,
    },
    /// Requested expansion degree outside `1..=cap`.
    #[error("degree {degree} outside the supported range 1..={cap}")]
    DegreeOutOfRange {
        /// Requested degree.
        degree: usize,
        /// Configured cap.
        cap: usize,
    },
}
