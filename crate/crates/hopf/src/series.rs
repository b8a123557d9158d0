//! Sparse word series with exact rational coefficients, the shuffle product,
//! the admissible deconcatenation coproduct and graded log/exp.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::word::{shuffle_words, Word};
use crate::HopfError;

/// Default cap on the degree accepted by [`logt_expansion`].
pub const DEFAULT_DEGREE_CAP: usize = 8;

/// Finite formal linear combination of words with rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is equality
/// of series.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct WordSeries {
    terms: BTreeMap<Word, BigRational>,
}

/// Finite linear combination of tensors `a ⊗ b` of words.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct TensorSeries {
    terms: BTreeMap<(Word, Word), BigRational>,
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl WordSeries {
    /// The zero series.
    pub fn zero() -> Self {
        Self::default()
    }

    /// The unit `1` (empty word with coefficient one).
    pub fn one() -> Self {
        Self::word(Word::EMPTY)
    }

    /// A single word with coefficient one.
    pub fn word(w: Word) -> Self {
        Self::term(w, BigRational::one())
    }

    /// A single word with the given coefficient.
    pub fn term(w: Word, c: BigRational) -> Self {
        let mut s = Self::zero();
        s.add_term(w, c);
        s
    }

    /// Adds `c · w` in place.
    pub fn add_term(&mut self, w: Word, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    /// Coefficient of `w` (zero when absent).
    pub fn coeff(&self, w: &Word) -> BigRational {
        self.terms.get(w).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Iterates over `(word, coefficient)` in degree-then-lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Word, &BigRational)> {
        self.terms.iter()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when no term is stored.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for the zero series.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the empty word.
    pub fn constant(&self) -> BigRational {
        self.coeff(&Word::EMPTY)
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(w, v)| (*w, v * c)).collect(),
        }
    }

    /// Keeps words of length at most `2 · max_degree`.
    pub fn truncate(&self, max_degree: usize) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() <= 2 * max_degree)
                .map(|(w, c)| (*w, c.clone()))
                .collect(),
        }
    }

    /// The part made of words with exactly `degree` letters `X`.
    pub fn homogeneous(&self, degree: usize) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.degree() == degree)
                .map(|(w, c)| (*w, c.clone()))
                .collect(),
        }
    }

    /// Largest word length present, zero for the zero series.
    pub fn max_len(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    /// Shuffle product, keeping only words of length at most `max_len`.
    pub fn shuffle_truncated(&self, other: &Self, max_len: usize) -> Self {
        let mut out = Self::zero();
        let mut counts: HashMap<Word, u64> = HashMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if a.len() + b.len() > max_len {
                    continue;
                }
                counts.clear();
                shuffle_words(*a, *b, &mut |w| *counts.entry(w).or_insert(0) += 1);
                let c = ca * cb;
                for (w, n) in counts.drain() {
                    out.add_term(w, &c * int(n as i64));
                }
            }
        }
        out
    }

    /// Full shuffle product.
    pub fn shuffle(&self, other: &Self) -> Self {
        self.shuffle_truncated(other, usize::MAX)
    }

    /// Applies the admissible coproduct termwise.
    pub fn coproduct(&self) -> TensorSeries {
        let mut out = TensorSeries::default();
        for (w, c) in &self.terms {
            for (a, b) in admissible_splittings(*w) {
                out.add_term(a, b, c.clone());
            }
        }
        out
    }
}

impl Add for &WordSeries {
    type Output = WordSeries;
    fn add(self, rhs: &WordSeries) -> WordSeries {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(*w, c.clone());
        }
        out
    }
}

impl Sub for &WordSeries {
    type Output = WordSeries;
    fn sub(self, rhs: &WordSeries) -> WordSeries {
        self + &(-rhs)
    }
}

impl Neg for &WordSeries {
    type Output = WordSeries;
    fn neg(self) -> WordSeries {
        WordSeries {
            terms: self.terms.iter().map(|(w, c)| (*w, -c)).collect(),
        }
    }
}

impl fmt::Display for WordSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag.is_one() {
                write!(f, "{w}")?;
            } else {
                write!(f, "{mag}·{w}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for WordSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WordSeries({self})")
    }
}

impl TensorSeries {
    /// Adds `c · (a ⊗ b)` in place.
    pub fn add_term(&mut self, a: Word, b: Word, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let key = (a, b);
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    /// Iterates over `((a, b), coefficient)`.
    pub fn iter(&self) -> impl Iterator<Item = (&(Word, Word), &BigRational)> {
        self.terms.iter()
    }

    /// Coefficient of `a ⊗ b`.
    pub fn coeff(&self, a: Word, b: Word) -> BigRational {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `p ⊗ q` for series.
    pub fn tensor(p: &WordSeries, q: &WordSeries) -> Self {
        let mut out = Self::default();
        for (a, ca) in p.iter() {
            for (b, cb) in q.iter() {
                out.add_term(*a, *b, ca * cb);
            }
        }
        out
    }

    /// Componentwise shuffle `(a₁⊗a₂)⧢(b₁⊗b₂) = (a₁⧢b₁)⊗(a₂⧢b₂)`.
    pub fn shuffle(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for ((a1, a2), ca) in &self.terms {
            for ((b1, b2), cb) in &other.terms {
                let left = shuffle(*a1, *b1);
                let right = shuffle(*a2, *b2);
                let c = ca * cb;
                for (l, cl) in left.iter() {
                    for (r, cr) in right.iter() {
                        out.add_term(*l, *r, &c * cl * cr);
                    }
                }
            }
        }
        out
    }

    /// Keeps tensors whose total length is at most `2 · max_degree`.
    pub fn truncate(&self, max_degree: usize) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|((a, b), _)| a.len() + b.len() <= 2 * max_degree)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }
}

impl Add for &TensorSeries {
    type Output = TensorSeries;
    fn add(self, rhs: &TensorSeries) -> TensorSeries {
        let mut out = self.clone();
        for ((a, b), c) in &rhs.terms {
            out.add_term(*a, *b, c.clone());
        }
        out
    }
}

/// Raw shuffle product of two words; coefficients count interleavings.
pub fn shuffle(a: Word, b: Word) -> WordSeries {
    WordSeries::word(a).shuffle(&WordSeries::word(b))
}

/// All splittings `w = a·b` with both parts admissible, including the
/// trivial ones with the empty word. Requires `w` admissible.
pub fn admissible_splittings(w: Word) -> Vec<(Word, Word)> {
    (0..=w.len())
        .map(|k| w.split_at(k))
        .filter(|(a, b)| a.is_admissible() && b.is_admissible())
        .collect()
}

/// Coproduct of a single admissible word.
pub fn coproduct(w: Word) -> Result<TensorSeries, HopfError> {
    if !w.is_admissible() {
        return Err(HopfError::NotAdmissible(w.to_string()));
    }
    Ok(WordSeries::word(w).coproduct())
}

/// Graded logarithm under the shuffle product, exact through `max_degree`.
///
/// The constant term must equal one.
pub fn series_log(t: &WordSeries, max_degree: usize) -> Result<WordSeries, HopfError> {
    if !t.constant().is_one() {
        return Err(HopfError::BadConstantTerm {
            expected: 1,
            found: t.constant().to_string(),
        });
    }
    let a = &t.truncate(max_degree) - &WordSeries::one();
    let max_len = 2 * max_degree;
    let mut out = WordSeries::zero();
    let mut power = a.clone();
    let mut n: i64 = 1;
    while !power.is_zero() {
        let sign = if n % 2 == 1 { 1 } else { -1 };
        out = &out + &power.scale(&BigRational::new(BigInt::from(sign), BigInt::from(n)));
        power = power.shuffle_truncated(&a, max_len);
        n += 1;
    }
    Ok(out)
}

/// Graded exponential under the shuffle product, exact through `max_degree`.
///
/// The constant term must vanish.
pub fn series_exp(p: &WordSeries, max_degree: usize) -> Result<WordSeries, HopfError> {
    if !p.constant().is_zero() {
        return Err(HopfError::BadConstantTerm {
            expected: 0,
            found: p.constant().to_string(),
        });
    }
    let a = p.truncate(max_degree);
    let max_len = 2 * max_degree;
    let mut out = WordSeries::one();
    let mut power = WordSeries::one();
    let mut factorial = BigInt::one();
    let mut n: i64 = 1;
    loop {
        power = power.shuffle_truncated(&a, max_len);
        if power.is_zero() {
            break;
        }
        factorial *= BigInt::from(n);
        out = &out + &power.scale(&BigRational::new(BigInt::one(), factorial.clone()));
        n += 1;
    }
    Ok(out)
}

/// The series `1 + XY + XYXY + …` through `max_degree`.
pub fn transmission_inverse_series(max_degree: usize) -> WordSeries {
    let mut t = WordSeries::zero();
    for k in 0..=max_degree {
        t.add_term(Word::xy_power(k), BigRational::one());
    }
    t
}

/// `−ln T = log(1 + XY + XYXY + …)` through `max_degree`.
pub fn logt_expansion(max_degree: usize) -> Result<WordSeries, HopfError> {
    logt_expansion_capped(max_degree, DEFAULT_DEGREE_CAP)
}

/// As [`logt_expansion`] with an explicit degree cap.
pub fn logt_expansion_capped(max_degree: usize, cap: usize) -> Result<WordSeries, HopfError> {
    if max_degree == 0 || max_degree > cap {
        return Err(HopfError::DegreeOutOfRange {
            degree: max_degree,
            cap,
        });
    }
    series_log(&transmission_inverse_series(max_degree), max_degree)
}

/// True iff the coproduct of `p` equals `1⊗p + p⊗1`.
///
/// `p` is expected to be homogeneous of the given degree; a series with a
/// word of another degree is reported as not primitive.
pub fn check_primitive(p: &WordSeries, degree: usize) -> bool {
    if p.iter().any(|(w, _)| w.degree() != degree || !w.is_admissible()) {
        return false;
    }
    let lhs = p.coproduct();
    let one = WordSeries::one();
    let rhs = &TensorSeries::tensor(&one, p) + &TensorSeries::tensor(p, &one);
    lhs == rhs
}
