//! Exact differential polynomials in `u`, `ū` and their x-derivatives.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Gaussian rational `re + i·im`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    /// Real part.
    pub re: BigRational,
    /// Imaginary part.
    pub im: BigRational,
}

impl GaussRational {
    /// `re + i·im` from integers.
    pub fn from_ints(re: i64, im: i64) -> Self {
        Self {
            re: BigRational::from_integer(re.into()),
            im: BigRational::from_integer(im.into()),
        }
    }

    /// `p/q` as a real Gaussian rational.
    pub fn ratio(p: i64, q: i64) -> Self {
        Self {
            re: BigRational::new(p.into(), q.into()),
            im: BigRational::zero(),
        }
    }

    /// A real rational.
    pub fn real(re: BigRational) -> Self {
        Self {
            re,
            im: BigRational::zero(),
        }
    }

    /// Zero.
    pub fn zero() -> Self {
        Self::default()
    }

    /// One.
    pub fn one() -> Self {
        Self::from_ints(1, 0)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    /// `i^k` for integer `k`.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Self::from_ints(1, 0),
            1 => Self::from_ints(0, 1),
            2 => Self::from_ints(-1, 0),
            _ => Self::from_ints(0, -1),
        }
    }

    /// True when both parts vanish.
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// True when the imaginary part vanishes.
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        let n = &self.re * &self.re + &self.im * &self.im;
        if n.is_zero() {
            return None;
        }
        Some(Self {
            re: &self.re / &n,
            im: -&self.im / &n,
        })
    }

    /// Floating-point value.
    pub fn to_complex(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Add for &GaussRational {
    type Output = GaussRational;
    fn add(self, o: &GaussRational) -> GaussRational {
        GaussRational {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
}

impl Sub for &GaussRational {
    type Output = GaussRational;
    fn sub(self, o: &GaussRational) -> GaussRational {
        GaussRational {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
}

impl Mul for &GaussRational {
    type Output = GaussRational;
    fn mul(self, o: &GaussRational) -> GaussRational {
        GaussRational {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rational(&self.re)),
            (true, false) => write!(f, "{}i", fmt_rational(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(
                    f,
                    "({} {} {}i)",
                    fmt_rational(&self.re),
                    sign,
                    fmt_rational(&self.im.abs())
                )
            }
        }
    }
}

/// A factor `u^{(order)}` or `ū^{(order)}`.
///
/// Factors order with all `u` factors before all `ū` factors, then by
/// derivative order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor {
    /// True for `ū`.
    pub conj: bool,
    /// Number of x-derivatives.
    pub order: u32,
}

impl Factor {
    /// `u^{(k)}`.
    pub fn u(k: u32) -> Self {
        Self {
            conj: false,
            order: k,
        }
    }

    /// `ū^{(k)}`.
    pub fn ubar(k: u32) -> Self {
        Self { conj: true, order: k }
    }

    fn differentiated(self) -> Self {
        Self {
            conj: self.conj,
            order: self.order + 1,
        }
    }

    fn conjugated(self) -> Self {
        Self {
            conj: !self.conj,
            order: self.order,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.conj { "\\bar u" } else { "u" };
        match self.order {
            0 => write!(f, "{base}"),
            k if k <= 3 => write!(f, "{base}_{{{}}}", "x".repeat(k as usize)),
            k => write!(f, "{base}^{{({k})}}"),
        }
    }
}

/// Sorted multiset of factors; the empty monomial is the constant 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(Vec<Factor>);

impl Monomial {
    /// Builds a monomial from factors in any order.
    pub fn new(mut factors: Vec<Factor>) -> Self {
        factors.sort();
        Self(factors)
    }

    /// Factors in canonical order.
    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    /// Number of factors.
    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// Number of `ū` factors.
    pub fn conj_count(&self) -> usize {
        self.0.iter().filter(|f| f.conj).count()
    }

    /// Total number of derivatives.
    pub fn weight(&self) -> u32 {
        self.0.iter().map(|f| f.order).sum()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Monomial::new(v)
    }

    fn multiplicity(&self, f: Factor) -> usize {
        self.0.iter().filter(|&&g| g == f).count()
    }

    fn without_one(&self, f: Factor) -> Monomial {
        let mut v = self.0.clone();
        if let Some(pos) = v.iter().position(|&g| g == f) {
            v.remove(pos);
        }
        Monomial(v)
    }

    fn with(&self, f: Factor) -> Monomial {
        let mut v = self.0.clone();
        v.push(f);
        Monomial::new(v)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Finite sum of monomials with Gaussian-rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DiffPolynomial {
    terms: BTreeMap<Monomial, GaussRational>,
}

/// JSON record for one monomial.
#[derive(Serialize)]
pub struct MonomialRecord {
    /// Real part of the coefficient as `p/q`.
    pub re: String,
    /// Imaginary part of the coefficient as `p/q`.
    pub im: String,
    /// Factors as `(variable, order)` with variable `"u"` or `"ubar"`.
    pub factors: Vec<(String, u32)>,
}

impl DiffPolynomial {
    /// Zero polynomial.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Constant polynomial.
    pub fn constant(c: GaussRational) -> Self {
        Self::monomial(Monomial::default(), c)
    }

    /// `c · m`.
    pub fn monomial(m: Monomial, c: GaussRational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    /// `u^{(k)}`.
    pub fn u(k: u32) -> Self {
        Self::monomial(Monomial::new(vec![Factor::u(k)]), GaussRational::one())
    }

    /// `ū^{(k)}`.
    pub fn ubar(k: u32) -> Self {
        Self::monomial(Monomial::new(vec![Factor::ubar(k)]), GaussRational::one())
    }

    /// Adds `c · m` in place.
    pub fn add_term(&mut self, m: Monomial, c: GaussRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// Iterates over `(monomial, coefficient)`.
    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &GaussRational)> {
        self.terms.iter()
    }

    /// Coefficient of a monomial.
    pub fn coeff(&self, m: &Monomial) -> GaussRational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Number of monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when there are no monomials.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Multiplies by a scalar.
    pub fn scale(&self, c: &GaussRational) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// Part with exactly `d` factors.
    pub fn homogeneous(&self, d: usize) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Largest derivative order appearing.
    pub fn max_order(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|f| f.order))
            .max()
            .unwrap_or(0)
    }

    /// Total x-derivative by the Leibniz rule.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for i in 0..m.0.len() {
                let mut v = m.0.clone();
                v[i] = v[i].differentiated();
                out.add_term(Monomial::new(v), c.clone());
            }
        }
        out
    }

    /// Complex conjugate: swaps `u ↔ ū` and conjugates coefficients.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let v = m.0.iter().map(|f| f.conjugated()).collect();
            out.add_term(Monomial::new(v), c.conj());
        }
        out
    }

    /// Substitutes `ū^{(k)} → −ū^{(k)}`.
    pub fn negate_ubar(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let c = if m.conj_count() % 2 == 1 { -c } else { c.clone() };
            out.add_term(m.clone(), c);
        }
        out
    }

    /// Substitutes `ū → 1`, so `ū^{(k)} → 0` for `k ≥ 1`.
    pub fn ubar_to_one(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.0.iter().any(|f| f.conj && f.order > 0) {
                continue;
            }
            let v = m.0.iter().filter(|f| !f.conj).copied().collect();
            out.add_term(Monomial::new(v), c.clone());
        }
        out
    }

    /// Partial derivative with respect to the jet variable `f`.
    pub fn partial(&self, f: Factor) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let k = m.multiplicity(f);
            if k > 0 {
                out.add_term(
                    m.without_one(f),
                    c * &GaussRational::from_ints(k as i64, 0),
                );
            }
        }
        out
    }

    /// Jet variables appearing, in canonical order.
    fn variables(&self) -> Vec<Factor> {
        let mut v: Vec<Factor> = self.terms.keys().flat_map(|m| m.0.iter().copied()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Euler operator `Σ_k (−D)^k ∂/∂w^{(k)}` for `w = u` or `w = ū`.
    pub fn euler(&self, conj: bool) -> Self {
        let mut out = Self::zero();
        for f in self.variables().into_iter().filter(|f| f.conj == conj) {
            let mut t = self.partial(f);
            for _ in 0..f.order {
                t = -&t.derivative();
            }
            out = &out + &t;
        }
        out
    }

    /// True when the integrals of `self` and `other` agree for all decaying
    /// `u`, i.e. their difference is a total derivative.
    pub fn equivalent_mod_derivatives(&self, other: &Self) -> bool {
        let d = self - other;
        if !d.coeff(&Monomial::default()).is_zero() {
            return false;
        }
        d.euler(false).is_zero() && d.euler(true).is_zero()
    }

    /// Antiderivative with zero constant term via the homotopy operator.
    ///
    /// Returns `None` when `self` is not a total derivative.
    pub fn antiderivative(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        if !self.coeff(&Monomial::default()).is_zero() {
            return None;
        }
        let max_deg = self.terms.keys().map(|m| m.degree()).max().unwrap_or(0);
        let mut out = Self::zero();
        for d in 1..=max_deg {
            let part = self.homogeneous(d);
            if part.is_zero() {
                continue;
            }
            let mut acc = Self::zero();
            for f in part.variables() {
                if f.order == 0 {
                    continue;
                }
                let dp = part.partial(f);
                for k in 0..f.order {
                    let mut t = dp.clone();
                    for _ in 0..(f.order - k - 1) {
                        t = -&t.derivative();
                    }
                    let base = Factor {
                        conj: f.conj,
                        order: k,
                    };
                    acc = &acc + &t.times_factor(base);
                }
            }
            out = &out + &acc.scale(&GaussRational::ratio(1, d as i64));
        }
        if &out.derivative() == self {
            Some(out)
        } else {
            None
        }
    }

    fn times_factor(&self, f: Factor) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(m.with(f), c.clone());
        }
        out
    }

    /// Representative modulo total derivatives obtained by integrating by
    /// parts on the last factor while that factor is differentiated, appears
    /// once, and every other factor ranks at least two steps below it.
    ///
    /// Quadratic monomials `u^{(a)} ū^{(b)}` reduce to `(−1)^b u^{(a+b)} ū`.
    pub fn ibp_normal_form(&self) -> Self {
        let mut work = self.clone();
        let mut done = Self::zero();
        while let Some((m, c)) = work.terms.iter().next().map(|(m, c)| (m.clone(), c.clone())) {
            work.terms.remove(&m);
            let last = match m.0.last() {
                Some(&f) => f,
                None => {
                    done.add_term(m, c);
                    continue;
                }
            };
            let reducible = last.order >= 1
                && m.multiplicity(last) == 1
                && m.0[..m.0.len() - 1].iter().all(|g| {
                    g.conj != last.conj || g.order + 2 <= last.order
                });
            if !reducible {
                done.add_term(m, c);
                continue;
            }
            // F · w^{(n)} ≅ −F' · w^{(n−1)}
            let rest = DiffPolynomial::monomial(m.without_one(last), c);
            let lower = Factor {
                conj: last.conj,
                order: last.order - 1,
            };
            let replaced = (-&rest.derivative()).times_factor(lower);
            for (m2, c2) in replaced.terms {
                work.add_term(m2, c2);
            }
        }
        done
    }

    /// JSON-ready monomial list.
    pub fn records(&self) -> Vec<MonomialRecord> {
        self.terms
            .iter()
            .map(|(m, c)| MonomialRecord {
                re: fmt_rational(&c.re),
                im: fmt_rational(&c.im),
                factors: m
                    .0
                    .iter()
                    .map(|f| (if f.conj { "ubar" } else { "u" }.to_string(), f.order))
                    .collect(),
            })
            .collect()
    }
}

impl Add for &DiffPolynomial {
    type Output = DiffPolynomial;
    fn add(self, o: &DiffPolynomial) -> DiffPolynomial {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &DiffPolynomial {
    type Output = DiffPolynomial;
    fn sub(self, o: &DiffPolynomial) -> DiffPolynomial {
        self + &(-o)
    }
}

impl Neg for &DiffPolynomial {
    type Output = DiffPolynomial;
    fn neg(self) -> DiffPolynomial {
        self.scale(&GaussRational::from_ints(-1, 0))
    }
}

impl Mul for &DiffPolynomial {
    type Output = DiffPolynomial;
    fn mul(self, o: &DiffPolynomial) -> DiffPolynomial {
        let mut out = DiffPolynomial::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                out.add_term(a.times(b), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for DiffPolynomial {
    /// LaTeX-like text, e.g. `-1/2 u \bar u`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                if m.0.is_empty() {
                    c.to_string()
                } else if *c == GaussRational::one() {
                    m.to_string()
                } else {
                    format!("{c} {m}")
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Shorthand for an integer as a `BigInt`.
pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

/// True when `c` is exactly one.
pub fn is_one(c: &GaussRational) -> bool {
    c.re.is_one() && c.im.is_zero()
}
