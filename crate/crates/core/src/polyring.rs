//! Exact polynomial arithmetic over arbitrary-precision rationals.
//!
//! [`MPoly`] is a sparse multivariate polynomial keyed by exponent vectors in
//! graded-lexicographic order, [`UPoly`] a dense univariate one. Nothing here
//! ever rounds: every coefficient is a reduced [`Rat`].
//!
//! Powers of wide polynomials (MAXCUT objectives raised to the 9th power in
//! eight variables, say) are computed on an [`IntegerForm`]: the polynomial
//! scaled by the lcm of its denominators, so the inner loop multiplies
//! integers instead of reducing fractions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use rug::ops::Pow;
use rug::{Assign, Float, Integer};

use crate::error::{Error, Result};

/// Exact rational number, always kept in lowest terms with a positive denominator.
pub type Rat = rug::Rational;

/// Default cap on the number of terms any single product may produce.
pub const DEFAULT_TERM_CAP: usize = 10_000_000;

/// Exponent vector of a monomial.
///
/// Ordered by total degree first, then lexicographically so that `x1` sorts
/// before `x2` within a degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponents(Box<[u32]>);

impl Exponents {
    pub fn new(e: impl Into<Box<[u32]>>) -> Self {
        Exponents(e.into())
    }

    pub fn zero(nvars: usize) -> Self {
        Exponents(vec![0; nvars].into_boxed_slice())
    }

    /// The exponent vector of `x_i`.
    pub fn unit(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Exponents(e.into_boxed_slice())
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Componentwise sum; the exponent vector of the product monomial.
    pub fn add(&self, other: &Exponents) -> Exponents {
        debug_assert_eq!(self.0.len(), other.0.len());
        Exponents(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    /// True when every exponent is even.
    pub fn is_even(&self) -> bool {
        self.0.iter().all(|e| e % 2 == 0)
    }

    /// All exponent vectors in `nvars` variables of total degree `<= degree`,
    /// in canonical order.
    pub fn all_up_to(nvars: usize, degree: u32) -> Vec<Exponents> {
        let mut out = Vec::new();
        for d in 0..=degree {
            let mut cur = vec![0u32; nvars];
            push_degree(&mut out, &mut cur, 0, d);
        }
        out
    }
}

fn push_degree(out: &mut Vec<Exponents>, cur: &mut [u32], pos: usize, remaining: u32) {
    let n = cur.len();
    if n == 0 {
        if remaining == 0 {
            out.push(Exponents::new(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(Exponents::new(cur.to_vec()));
        cur[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e;
        push_degree(out, cur, pos + 1, remaining - e);
    }
    cur[pos] = 0;
}

impl Ord for Exponents {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Exponents, Rat>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rat::from(1))
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        Self::monomial(c, Exponents::zero(nvars))
    }

    /// The coordinate polynomial `x_i` (zero-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        Self::monomial(Rat::from(1), Exponents::unit(nvars, i))
    }

    pub fn monomial(c: Rat, exps: Exponents) -> Self {
        let nvars = exps.nvars();
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(exps, c);
        }
        MPoly { nvars, terms }
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs, summing repeats.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rat, Vec<u32>)>,
    {
        let mut p = MPoly::zero(nvars);
        for (c, e) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: e.len() });
            }
            p.add_term(Exponents::new(e), c);
        }
        Ok(p)
    }

    pub fn add_term(&mut self, exps: Exponents, c: Rat) {
        if c == 0 {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                *v += c;
                if *v == 0 {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Number of stored (nonzero) terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for the zero polynomial and for nonzero constants.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.degree() == 0)
    }

    /// Total degree; `0` for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Exponents::degree).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rat {
        self.terms.get(&Exponents::new(exps.to_vec())).cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &Rat) -> MPoly {
        if *c == 0 {
            return MPoly::zero(self.nvars);
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, v)| (e.clone(), Rat::from(v * c)))
            .collect();
        MPoly { nvars: self.nvars, terms }
    }

    /// Product with the default term-count guard.
    pub fn mul(&self, other: &MPoly) -> Result<MPoly> {
        self.mul_capped(other, DEFAULT_TERM_CAP)
    }

    pub fn mul_capped(&self, other: &MPoly, cap: usize) -> Result<MPoly> {
        check_dims(self.nvars, other.nvars)?;
        let mut acc: HashMap<Exponents, Rat> = HashMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.add(eb);
                let prod = Rat::from(ca * cb);
                match acc.get_mut(&e) {
                    Some(v) => *v += prod,
                    None => {
                        acc.insert(e, prod);
                        if acc.len() > cap {
                            return Err(Error::TermCapExceeded { terms: acc.len(), cap });
                        }
                    }
                }
            }
        }
        let terms = acc.into_iter().filter(|(_, v)| *v != 0).collect();
        Ok(MPoly { nvars: self.nvars, terms })
    }

    /// `self^k` by repeated squaring, with the default term-count guard.
    pub fn pow(&self, k: u32) -> Result<MPoly> {
        self.pow_capped(k, DEFAULT_TERM_CAP)
    }

    pub fn pow_capped(&self, k: u32, cap: usize) -> Result<MPoly> {
        let base = self.integer_form();
        let mut result = IntegerForm::one(self.nvars);
        let mut square = base;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul_capped(&square, cap)?;
            }
            k >>= 1;
            if k > 0 {
                square = square.mul_capped(&square, cap)?;
            }
        }
        Ok(result.to_mpoly())
    }

    /// Exact value at a rational point.
    pub fn eval(&self, point: &[Rat]) -> Result<Rat> {
        check_dims(self.nvars, point.len())?;
        let mut total = Rat::new();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e.as_slice()) {
                if k > 0 {
                    term *= Rat::from(x.pow(k as i32));
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Value at a floating-point point; coefficients are rounded to `f64`.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut term = c.to_f64();
                for (x, &k) in point.iter().zip(e.as_slice()) {
                    term *= x.powi(k as i32);
                }
                term
            })
            .sum()
    }

    /// Value at a point given as extended-precision floats, evaluated at the
    /// precision of the first coordinate (or `prec` for constants).
    pub fn eval_float(&self, point: &[Float], prec: u32) -> Float {
        debug_assert_eq!(point.len(), self.nvars);
        let mut total = Float::with_val(prec, 0);
        let mut term = Float::new(prec);
        for (e, c) in &self.terms {
            term.assign(c);
            for (x, &k) in point.iter().zip(e.as_slice()) {
                if k > 0 {
                    term *= Float::with_val(prec, x.pow(k));
                }
            }
            total += &term;
        }
        total
    }

    /// The polynomial scaled to integer coefficients, with the scale factor kept.
    pub fn integer_form(&self) -> IntegerForm {
        let mut denominator = Integer::from(1);
        for c in self.terms.values() {
            denominator.lcm_mut(c.denom());
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let scaled = Integer::from(c.numer() * Integer::from(&denominator / c.denom()));
                (e.clone(), scaled)
            })
            .collect();
        IntegerForm { nvars: self.nvars, denominator, terms }
    }

    /// Serializes in the one-term-per-line text format `num/den e1 ... en`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (e, c) in &self.terms {
            let _ = write!(out, "{}/{}", c.numer(), c.denom());
            for k in e.as_slice() {
                let _ = write!(out, " {k}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format. Lines starting with `#` and blank lines are
    /// skipped; a bare integer coefficient is accepted in place of `num/den`.
    /// When `nvars` is `None` it is inferred from the first term line.
    pub fn from_text(text: &str, nvars: Option<usize>) -> Result<MPoly> {
        let mut nvars = nvars;
        let mut poly: Option<MPoly> = nvars.map(MPoly::zero);
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let mut tokens = line.split_whitespace();
            let coef_tok = tokens.next().expect("non-empty line has a token");
            let coef = parse_rat(coef_tok)
                .ok_or_else(|| Error::Parse { line: lineno, msg: format!("bad coefficient `{coef_tok}`") })?;
            let exps = tokens
                .map(|t| {
                    t.parse::<u32>()
                        .map_err(|_| Error::Parse { line: lineno, msg: format!("bad exponent `{t}`") })
                })
                .collect::<Result<Vec<u32>>>()?;
            let n = *nvars.get_or_insert(exps.len());
            if exps.len() != n {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {n} exponents, found {}", exps.len()),
                });
            }
            poly.get_or_insert_with(|| MPoly::zero(n)).add_term(Exponents::new(exps), coef);
        }
        poly.ok_or_else(|| Error::Parse { line: 0, msg: "empty polynomial needs an explicit dimension".into() })
    }
}

/// Parses `num/den` or a bare integer.
pub fn parse_rat(s: &str) -> Option<Rat> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Integer = n.parse().ok()?;
            let d: Integer = d.parse().ok()?;
            if d == 0 {
                return None;
            }
            Some(Rat::from((n, d)))
        }
        None => s.parse::<Integer>().ok().map(Rat::from),
    }
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

impl Add<&MPoly> for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        assert_eq!(self.nvars, rhs.nvars, "adding polynomials in different numbers of variables");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub<&MPoly> for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        self + &(-rhs)
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), Rat::from(-c))).collect();
        MPoly { nvars: self.nvars, terms }
    }
}

impl Mul<&MPoly> for &MPoly {
    type Output = MPoly;
    /// Panics if the term guard trips; use [`MPoly::mul`] to handle that.
    fn mul(self, rhs: &MPoly) -> MPoly {
        MPoly::mul(self, rhs).expect("polynomial product")
    }
}

/// A polynomial written as `terms / denominator` with integer `terms`.
#[derive(Clone, Debug)]
pub struct IntegerForm {
    nvars: usize,
    denominator: Integer,
    terms: Vec<(Exponents, Integer)>,
}

impl IntegerForm {
    pub fn one(nvars: usize) -> Self {
        IntegerForm {
            nvars,
            denominator: Integer::from(1),
            terms: vec![(Exponents::zero(nvars), Integer::from(1))],
        }
    }

    pub fn denominator(&self) -> &Integer {
        &self.denominator
    }

    pub fn terms(&self) -> &[(Exponents, Integer)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn mul_capped(&self, other: &IntegerForm, cap: usize) -> Result<IntegerForm> {
        check_dims(self.nvars, other.nvars)?;
        let mut acc: HashMap<Exponents, Integer> = HashMap::with_capacity(self.terms.len().max(other.terms.len()));
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.add(eb);
                match acc.get_mut(&e) {
                    Some(v) => *v += ca * cb,
                    None => {
                        acc.insert(e, Integer::from(ca * cb));
                        if acc.len() > cap {
                            return Err(Error::TermCapExceeded { terms: acc.len(), cap });
                        }
                    }
                }
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, v)| *v != 0).collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(IntegerForm {
            nvars: self.nvars,
            denominator: Integer::from(&self.denominator * &other.denominator),
            terms,
        })
    }

    pub fn to_mpoly(&self) -> MPoly {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), Rat::from((c.clone(), self.denominator.clone()))))
            .collect();
        MPoly { nvars: self.nvars, terms }
    }
}

/// Dense univariate polynomial; `coeffs[i]` multiplies `t^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly {
    coeffs: Vec<Rat>,
}

impl UPoly {
    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        let mut p = UPoly { coeffs };
        while p.coeffs.last().is_some_and(|c| *c == 0) {
            p.coeffs.pop();
        }
        p
    }

    /// The affine polynomial `a + b t`.
    pub fn linear(a: Rat, b: Rat) -> Self {
        Self::from_coeffs(vec![a, b])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, t: &Rat) -> Rat {
        let mut acc = Rat::new();
        for c in self.coeffs.iter().rev() {
            acc *= t;
            acc += c;
        }
        acc
    }

    pub fn eval_float(&self, t: &Float) -> Float {
        let mut acc = Float::with_val(t.prec(), 0);
        for c in self.coeffs.iter().rev() {
            acc *= t;
            acc += c;
        }
        acc
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![Rat::new(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += Rat::from(a * b);
            }
        }
        UPoly::from_coeffs(out)
    }

    pub fn add(&self, other: &UPoly) -> UPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let out = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).cloned().unwrap_or_default();
                let b = other.coeffs.get(i).cloned().unwrap_or_default();
                a + b
            })
            .collect();
        UPoly::from_coeffs(out)
    }

    pub fn scale(&self, c: &Rat) -> UPoly {
        UPoly::from_coeffs(self.coeffs.iter().map(|a| Rat::from(a * c)).collect())
    }

    /// `s(f(x))` by Horner's rule; degree is `deg(s) * deg(f)`.
    pub fn compose(&self, f: &MPoly) -> Result<MPoly> {
        let n = f.nvars();
        let mut acc = MPoly::zero(n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(f)?;
            acc.add_term(Exponents::zero(n), c.clone());
        }
        Ok(acc)
    }
}

/// `s ∘ f` as a multivariate polynomial.
pub fn compose_uni(s: &UPoly, f: &MPoly) -> Result<MPoly> {
    s.compose(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::from((n, d))
    }

    fn x(n: usize, i: usize) -> MPoly {
        MPoly::var(n, i)
    }

    #[test]
    fn difference_of_squares() {
        let p = &x(2, 0) + &x(2, 1);
        let q = &x(2, 0) - &x(2, 1);
        let prod = p.mul(&q).unwrap();
        let expect = MPoly::from_terms(2, [(r(1, 1), vec![2, 0]), (r(-1, 1), vec![0, 2])]).unwrap();
        assert_eq!(prod, expect);
    }

    #[test]
    fn multiplying_by_one_is_identity() {
        let f = MPoly::from_terms(2, [(r(64, 1), vec![4, 2]), (r(-48, 1), vec![2, 2]), (r(1, 1), vec![0, 0])]).unwrap();
        assert_eq!(f.mul(&MPoly::one(2)).unwrap(), f);
    }

    #[test]
    fn square_of_x_squared_matches_pow() {
        let x2 = MPoly::monomial(r(1, 1), Exponents::new(vec![2]));
        let a = x2.mul(&x2).unwrap();
        assert_eq!(a, x2.pow(2).unwrap());
        assert_eq!(a.coeff(&[4]), r(1, 1));
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn pow_edge_cases() {
        let p = &x(3, 1) + &MPoly::constant(3, r(7, 3));
        assert_eq!(p.pow(0).unwrap(), MPoly::one(3));
        let x1 = x(1, 0);
        assert_eq!(x1.pow(5).unwrap(), MPoly::monomial(r(1, 1), Exponents::new(vec![5])));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(matches!(x(2, 0).mul(&x(3, 0)), Err(Error::DimensionMismatch { .. })));
        assert!(x(2, 0).eval(&[r(1, 1)]).is_err());
    }

    #[test]
    fn term_cap_trips() {
        let p = &(&x(3, 0) + &x(3, 1)) + &x(3, 2);
        let err = p.pow_capped(6, 20).unwrap_err();
        assert!(matches!(err, Error::TermCapExceeded { cap: 20, .. }));
    }

    #[test]
    fn compose_examples() {
        let f = &x(2, 0) + &x(2, 1);
        let id = UPoly::linear(r(0, 1), r(1, 1));
        assert_eq!(compose_uni(&id, &f).unwrap(), f);
        let sq = UPoly::from_coeffs(vec![r(0, 1), r(0, 1), r(1, 1)]);
        let expect = MPoly::from_terms(2, [(r(1, 1), vec![2, 0]), (r(2, 1), vec![1, 1]), (r(1, 1), vec![0, 2])]).unwrap();
        assert_eq!(compose_uni(&sq, &f).unwrap(), expect);

        let one_minus = UPoly::linear(r(1, 1), r(-1, 1));
        let x2 = MPoly::monomial(r(1, 1), Exponents::new(vec![2]));
        let g = compose_uni(&one_minus, &x2).unwrap();
        assert_eq!(g.eval(&[r(1, 2)]).unwrap(), r(3, 4));
        assert_eq!(g.degree(), 2);
    }

    #[test]
    fn graded_lex_order() {
        let all = Exponents::all_up_to(2, 2);
        let v: Vec<Vec<u32>> = all.iter().map(|e| e.as_slice().to_vec()).collect();
        assert_eq!(v, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(Exponents::all_up_to(8, 4).len(), 495);
    }

    #[test]
    fn text_round_trip_and_comments() {
        let text = "# Matyas\n26/1 2 0\n\n26 0 2\n-48/1 1 1\n";
        let p = MPoly::from_text(text, None).unwrap();
        assert_eq!(p.nvars(), 2);
        assert_eq!(p.coeff(&[1, 1]), r(-48, 1));
        assert_eq!(MPoly::from_text(&p.to_text(), None).unwrap(), p);
        assert!(MPoly::from_text("1/2 1 0\n3 1\n", None).is_err());
        assert!(MPoly::from_text("1/0 1\n", None).is_err());
        assert_eq!(MPoly::from_text("# nothing\n", Some(3)).unwrap(), MPoly::zero(3));
    }

    fn small_poly(nvars: usize) -> impl Strategy<Value = MPoly> {
        prop::collection::vec(((-9i64..=9), (1i64..=4), prop::collection::vec(0u32..3, nvars)), 0..5).prop_map(
            move |ts| MPoly::from_terms(nvars, ts.into_iter().map(|(n, d, e)| (Rat::from((n, d)), e))).unwrap(),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn distributive_law(p in small_poly(2), q in small_poly(2), s in small_poly(2)) {
            let lhs = (&p + &q).mul(&s).unwrap();
            let rhs = &p.mul(&s).unwrap() + &q.mul(&s).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn pow_is_folded_mul(p in small_poly(2), k in 0u32..5) {
            let mut folded = MPoly::one(2);
            for _ in 0..k {
                folded = folded.mul(&p).unwrap();
            }
            prop_assert_eq!(p.pow(k).unwrap(), folded);
        }

        #[test]
        fn composition_commutes_with_evaluation(
            f in small_poly(2),
            cs in prop::collection::vec((-5i64..=5, 1i64..=3), 0..4),
            a in (-7i64..=7, 1i64..=5),
            b in (-7i64..=7, 1i64..=5),
        ) {
            let s = UPoly::from_coeffs(cs.into_iter().map(|(n, d)| Rat::from((n, d))).collect());
            let pt = [Rat::from(a), Rat::from(b)];
            let composed = compose_uni(&s, &f).unwrap().eval(&pt).unwrap();
            prop_assert_eq!(composed, s.eval(&f.eval(&pt).unwrap()));
        }

        #[test]
        fn text_format_round_trips(p in small_poly(3)) {
            prop_assert_eq!(MPoly::from_text(&p.to_text(), Some(3)).unwrap(), p);
        }
    }
}
