//! The two upper-bound hierarchies and their optimal densities.
//!
//! The full bound minimizes `∫ f σ dλ` over sum-of-squares densities `σ` of
//! degree `2r`. With `σ = q²` and `q` in the monomial basis `{x^α : |α| ≤ r}`
//! this is the smallest generalized eigenvalue of the pair
//!
//! ```text
//! A_{αβ} = E[f x^{α+β}],    B_{αβ} = E[x^{α+β}].
//! ```
//!
//! The push-forward bound restricts to densities `s(f(x))` with `s` a
//! univariate sum of squares, which only needs the moments of `λ_f`.

use std::fmt;
use std::str::FromStr;

use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::linalg::{gen_eig_min_exact, HFloat, Precision, SymMat};
use crate::measures::{chebyshev_moments, pushforward_moments, range_enclosure_refined, Domain, MomentSeq, MomentTable};
use crate::orthopoly::{chebyshev_aux, modified_chebyshev, monic_chebyshev_moments, smallest_root, Recurrence3};
use crate::polyring::{compose_uni, Exponents, MPoly, Rat, UPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Full,
    PfmHankel,
    PfmChebyshev,
}

impl Method {
    pub fn is_pushforward(self) -> bool {
        !matches!(self, Method::Full)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Full => "full",
            Method::PfmHankel => "pfm-hankel",
            Method::PfmChebyshev => "pfm-cheb",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Method::Full),
            "pfm-hankel" | "pfm" => Ok(Method::PfmHankel),
            "pfm-cheb" => Ok(Method::PfmChebyshev),
            other => Err(Error::InvalidParameters(format!("unknown method `{other}`"))),
        }
    }
}

/// The ordered basis the eigenvector coordinates refer to.
#[derive(Clone, Debug)]
pub enum Basis {
    /// `x^α` in graded lexicographic order.
    Monomials(Vec<Exponents>),
    /// `1, t, …, t^r`.
    Powers(usize),
    /// Orthonormal `p_0, …, p_r` of `λ_f`, given by their recurrence.
    Orthonormal(Recurrence3),
}

impl Basis {
    pub fn len(&self) -> usize {
        match self {
            Basis::Monomials(v) => v.len(),
            Basis::Powers(r) => r + 1,
            Basis::Orthonormal(rec) => rec.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug)]
pub struct BoundResult {
    pub value: HFloat,
    pub r: usize,
    pub method: Method,
    pub eigvec: Vec<HFloat>,
    pub basis: Basis,
    pub domain: Domain,
    pub f: MPoly,
}

impl BoundResult {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// `r,method,value` with 12 significant digits.
    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.r, self.method, fmt_sig(&self.value, 12))
    }
}

/// Decimal rendering with `digits` significant digits.
pub fn fmt_sig(x: &HFloat, digits: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    format!("{:.*e}", digits - 1, x.to_f64())
}

fn parity_mask(e: &[u32]) -> u64 {
    e.iter().enumerate().fold(0u64, |m, (i, a)| if a % 2 == 1 { m | (1 << (i % 64)) } else { m })
}

/// Exact Gram pair `(A, B)` over the monomials of degree `≤ r`.
pub fn full_gram_pair(f: &MPoly, domain: &Domain, r: usize) -> Result<(Vec<Exponents>, SymMat<Rat>, SymMat<Rat>)> {
    domain.check(f)?;
    let n = domain.nvars;
    let basis = Exponents::all_up_to(n, r as u32);
    let table = MomentTable::new(*domain, 2 * r as u32 + f.degree());
    let fterms: Vec<(Vec<u32>, &Rat, u64)> =
        f.terms().map(|(e, c)| (e.as_slice().to_vec(), c, parity_mask(e.as_slice()))).collect();
    let masks: Vec<u64> = basis.iter().map(|e| parity_mask(e.as_slice())).collect();
    let may_use_parity = n <= 64;
    let mut sum = vec![0u32; n];
    let mut sum2 = vec![0u32; n];
    let b = SymMat::from_fn(basis.len(), |i, j| {
        if may_use_parity && masks[i] != masks[j] {
            return Rat::new();
        }
        table.moment_of_sum(basis[i].as_slice(), basis[j].as_slice()).unwrap_or_default()
    });
    let a = SymMat::from_fn(basis.len(), |i, j| {
        let mut acc = Rat::new();
        let pm = masks[i] ^ masks[j];
        for (k, (x, y)) in basis[i].as_slice().iter().zip(basis[j].as_slice()).enumerate() {
            sum[k] = x + y;
        }
        for (g, c, gm) in &fterms {
            if may_use_parity && *gm != pm {
                continue;
            }
            for k in 0..n {
                sum2[k] = sum[k] + g[k];
            }
            if let Some(m) = table.moment(&sum2) {
                acc += m * *c;
            }
        }
        acc
    });
    Ok((basis, a, b))
}

/// `f^(r)` over the monomial basis.
pub fn upper_bound_full(f: &MPoly, domain: &Domain, r: usize, prec: Precision) -> Result<BoundResult> {
    let (basis, a, b) = full_gram_pair(f, domain, r)?;
    let (value, eigvec) = gen_eig_min_exact(&a, &b, prec)?;
    Ok(BoundResult { value, r, method: Method::Full, eigvec, basis: Basis::Monomials(basis), domain: *domain, f: f.clone() })
}

/// `f^(r)` for every `r ≤ max_r`, reusing the leading blocks of one assembly.
pub fn upper_bounds_full(f: &MPoly, domain: &Domain, max_r: usize, prec: Precision) -> Result<Vec<BoundResult>> {
    let orders: Vec<usize> = (0..=max_r).collect();
    upper_bounds_full_at(f, domain, &orders, prec)
}

/// `f^(r)` for each listed order, in the given order, from one assembly.
pub fn upper_bounds_full_at(f: &MPoly, domain: &Domain, orders: &[usize], prec: Precision) -> Result<Vec<BoundResult>> {
    let max_r = orders.iter().copied().max().unwrap_or(0);
    let (basis, a, b) = full_gram_pair(f, domain, max_r)?;
    let mut out = Vec::with_capacity(orders.len());
    for &r in orders {
        let k = basis.iter().take_while(|e| e.degree() as usize <= r).count();
        let idx: Vec<usize> = (0..k).collect();
        let (value, eigvec) = gen_eig_min_exact(&a.submatrix(&idx), &b.submatrix(&idx), prec)?;
        out.push(BoundResult {
            value,
            r,
            method: Method::Full,
            eigvec,
            basis: Basis::Monomials(basis[..k].to_vec()),
            domain: *domain,
            f: f.clone(),
        });
    }
    Ok(out)
}

/// `f_pfm^(r)`, computing the push-forward moments up to order `2r+1`.
pub fn upper_bound_pfm(f: &MPoly, domain: &Domain, r: usize, method: Method, prec: Precision) -> Result<BoundResult> {
    let m = pushforward_moments(domain, f, 2 * r + 1)?;
    upper_bound_pfm_from_moments(&m, r, method, prec)
}

/// The exact Hankel pair `A = (m_{i+j+1})`, `B = (m_{i+j})`, `i, j ≤ r`.
pub fn hankel_pair(moments: &[Rat], r: usize) -> (SymMat<Rat>, SymMat<Rat>) {
    let a = SymMat::from_fn(r + 1, |i, j| moments[i + j + 1].clone());
    let b = SymMat::from_fn(r + 1, |i, j| moments[i + j].clone());
    (a, b)
}

/// `f_pfm^(r)` from precomputed moments (at least `2r+2` of them).
pub fn upper_bound_pfm_from_moments(m: &MomentSeq, r: usize, method: Method, prec: Precision) -> Result<BoundResult> {
    if m.values().len() < 2 * r + 2 {
        return Err(Error::InvalidOrder(format!("order {r} needs {} moments, {} given", 2 * r + 2, m.values().len())));
    }
    let base = |value, eigvec, basis| BoundResult {
        value,
        r,
        method,
        eigvec,
        basis,
        domain: *m.domain(),
        f: m.f().clone(),
    };
    match method {
        Method::Full => Err(Error::InvalidParameters("the full bound is not a push-forward method".into())),
        Method::PfmHankel => {
            let (a, b) = hankel_pair(m.values(), r);
            let (value, eigvec) = gen_eig_min_exact(&a, &b, prec)?;
            Ok(base(value, eigvec, Basis::Powers(r)))
        }
        Method::PfmChebyshev => {
            let mv = m.values();
            let (lo, hi) = range_enclosure_refined(m.domain(), m.f());
            if lo >= hi {
                if r == 0 {
                    let value = prec.float(Rat::from(&mv[1] / &mv[0]));
                    let eig = vec![prec.float(&mv[0]).sqrt().recip()];
                    return Ok(base(value, eig, Basis::Powers(0)));
                }
                return Err(Error::BreakdownNonPositiveBeta { step: 1 });
            }
            let t = chebyshev_moments(&mv[..2 * r + 2], &lo, &hi)?;
            let aux = chebyshev_aux(2 * r + 2, prec);
            let rec = modified_chebyshev(&monic_chebyshev_moments(&t), &aux, r + 1)?.mapped_to(&lo, &hi);
            let value = smallest_root(&rec, r + 1);
            let eigvec = rec.jacobi_matrix(r + 1).eigenvector(&value);
            Ok(base(value, eigvec, Basis::Orthonormal(rec)))
        }
    }
}

/// Best rational approximation with denominator `≤ max_den` (continued fractions).
pub fn round_to_rational(x: &HFloat, max_den: &Integer) -> Rat {
    let exact = match x.to_rational() {
        Some(q) => q,
        None => return Rat::new(),
    };
    if exact.denom() <= max_den {
        return exact;
    }
    let neg = exact < 0;
    let mut rest = Rat::from(exact.abs_ref());
    // convergents h/k
    let (mut h0, mut h1) = (Integer::from(0), Integer::from(1));
    let (mut k0, mut k1) = (Integer::from(1), Integer::from(0));
    loop {
        let a = rest.clone().floor().into_numer_denom().0;
        let h2 = Integer::from(&a * &h1) + &h0;
        let k2 = Integer::from(&a * &k1) + &k0;
        if &k2 > max_den {
            break;
        }
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = rest.clone() - Rat::from(a);
        if frac == 0 {
            break;
        }
        rest = frac.recip();
    }
    let q = if k1 == 0 { Rat::new() } else { Rat::from((h1, k1)) };
    if neg {
        -q
    } else {
        q
    }
}

/// Denominator cap for [`round_to_rational`] in density extraction.
pub fn density_denominator_cap() -> Integer {
    Integer::from(1) << 64
}

#[derive(Clone, Debug)]
pub enum DensityShape {
    /// Density `c·q(x)²`.
    Full(MPoly),
    /// Density `c·s(f(x))²`.
    Pushforward { s: UPoly, f: MPoly },
}

/// A sum-of-squares probability density `normalization · q²`.
#[derive(Clone, Debug)]
pub struct DensityPoly {
    pub shape: DensityShape,
    /// `c` with `∫ c·q² dλ = 1` exactly.
    pub normalization: Rat,
    pub domain: Domain,
    f: MPoly,
    // push-forward moments of f up to order 2r+1
    moments: Option<MomentSeq>,
}

impl DensityPoly {
    /// The polynomial `q` in the original variables (composes for push-forward densities).
    pub fn q(&self) -> Result<MPoly> {
        match &self.shape {
            DensityShape::Full(q) => Ok(q.clone()),
            DensityShape::Pushforward { s, f } => compose_uni(s, f),
        }
    }

    /// `c · q(x)²` exactly.
    pub fn eval(&self, point: &[Rat]) -> Result<Rat> {
        let q = match &self.shape {
            DensityShape::Full(q) => q.eval(point)?,
            DensityShape::Pushforward { s, f } => s.eval(&f.eval(point)?),
        };
        Ok(Rat::from(q.square_ref()) * &self.normalization)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let q = match &self.shape {
            DensityShape::Full(q) => q.eval_f64(point),
            DensityShape::Pushforward { s, f } => {
                let t = f.eval_f64(point);
                s.coeffs().iter().rev().fold(0.0, |acc, c| acc * t + c.to_f64())
            }
        };
        q * q * self.normalization.to_f64()
    }

    // ∫ q² dλ, or ∫ f q² dλ
    fn weighted_square(&self, with_f: bool) -> Result<Rat> {
        match &self.shape {
            DensityShape::Full(q) => {
                let q2 = q * q;
                let g = if with_f { &q2 * &self.f } else { q2 };
                crate::measures::poly_moment(&self.domain, &g)
            }
            DensityShape::Pushforward { s, .. } => {
                let m = self.moments.as_ref().expect("push-forward densities carry moments").values();
                let shift = usize::from(with_f);
                let c = s.coeffs();
                let mut acc = Rat::new();
                for (i, ci) in c.iter().enumerate() {
                    for (j, cj) in c.iter().enumerate() {
                        acc += Rat::from(ci * cj) * &m[i + j + shift];
                    }
                }
                Ok(acc)
            }
        }
    }

    /// `∫ c·q² dλ`; equals 1.
    pub fn integral(&self) -> Result<Rat> {
        Ok(self.weighted_square(false)? * &self.normalization)
    }

    /// `∫ f·c·q² dλ`, the bound certified by this density.
    pub fn expected_f(&self) -> Result<Rat> {
        Ok(self.weighted_square(true)? * &self.normalization)
    }
}

/// Rounds the eigenvector to rationals and normalizes the density exactly.
pub fn optimal_density(result: &BoundResult, f: &MPoly) -> Result<DensityPoly> {
    let cap = density_denominator_cap();
    let (shape, moments) = match &result.basis {
        Basis::Monomials(basis) => {
            let coeffs = result.eigvec.iter().map(|x| round_to_rational(x, &cap));
            let q = MPoly::from_terms(f.nvars(), coeffs.zip(basis).map(|(c, e)| (c, e.as_slice().to_vec())))?;
            (DensityShape::Full(q), None)
        }
        Basis::Powers(r) => {
            let coeffs = result.eigvec.iter().map(|x| round_to_rational(x, &cap)).collect();
            let m = pushforward_moments(&result.domain, f, 2 * r + 1)?;
            (DensityShape::Pushforward { s: UPoly::from_coeffs(coeffs), f: f.clone() }, Some(m))
        }
        Basis::Orthonormal(rec) => {
            // Σ y_i p_i in the power basis
            let r = rec.len() - 1;
            let prec = result.value.prec();
            let mut power = vec![Float::new(prec); r + 1];
            for (y, row) in result.eigvec.iter().zip(rec.orthonormal_coeffs(r)) {
                for (i, c) in row.iter().enumerate() {
                    power[i] += y * c;
                }
            }
            let coeffs = power.iter().map(|x| round_to_rational(x, &cap)).collect();
            let m = pushforward_moments(&result.domain, f, 2 * r + 1)?;
            (DensityShape::Pushforward { s: UPoly::from_coeffs(coeffs), f: f.clone() }, Some(m))
        }
    };
    let mut d = DensityPoly { shape, normalization: Rat::from(1), domain: result.domain, f: f.clone(), moments };
    let mass = d.weighted_square(false)?;
    if mass == 0 {
        return Err(Error::InvalidParameters("eigenvector rounded to zero".into()));
    }
    d.normalization = mass.recip();
    Ok(d)
}

/// `(point, c·q(point)²)` for every grid point, evaluated exactly.
pub fn sample_density(d: &DensityPoly, grid: &[Vec<Rat>]) -> Result<Vec<(Vec<Rat>, Rat)>> {
    grid.iter().map(|p| Ok((p.clone(), d.eval(p)?))).collect()
}

/// Regular grid with spacing `step` over `[-1,1]^n` (or the points of it in the ball).
pub fn density_grid(domain: &Domain, step: &Rat) -> Result<Vec<Vec<Rat>>> {
    if *step <= 0 || *step > 2 {
        return Err(Error::InvalidParameters(format!("grid step {step} outside (0, 2]")));
    }
    let count = (Rat::from(2) / step).floor().into_numer_denom().0.to_usize().unwrap_or(usize::MAX);
    if count > 10_000 {
        return Err(Error::InvalidParameters(format!("grid step {step} too fine")));
    }
    let axis: Vec<Rat> = (0..=count).map(|i| Rat::from(-1) + Rat::from(step * Integer::from(i))).collect();
    let n = domain.nvars;
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let p: Vec<Rat> = idx.iter().map(|&i| axis[i].clone()).collect();
        let inside = match domain.kind {
            crate::measures::DomainKind::Box => true,
            crate::measures::DomainKind::Ball => {
                let mut s = Rat::new();
                for x in &p {
                    s += Rat::from(x.square_ref());
                }
                s <= 1
            }
        };
        if inside {
            out.push(p);
        }
        let mut k = 0;
        loop {
            if k == n {
                return Ok(out);
            }
            idx[k] += 1;
            if idx[k] <= count {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::{jacobi_recurrence, theorem3_reference, JacobiParams};

    const P: Precision = Precision::DEFAULT;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::from((n, d))
    }

    fn x1() -> MPoly {
        MPoly::var(1, 0)
    }

    fn xpow(k: u32) -> MPoly {
        MPoly::monomial(rat(1, 1), Exponents::new(vec![k]))
    }

    fn matyas() -> MPoly {
        MPoly::from_terms(2, [(rat(26, 1), vec![2, 0]), (rat(26, 1), vec![0, 2]), (rat(-48, 1), vec![1, 1])]).unwrap()
    }

    fn rel(a: &HFloat, b: &HFloat) -> f64 {
        let d = Float::with_val(a.prec(), a - b).abs();
        let s = Float::with_val(a.prec(), b.abs_ref()).max(&Float::with_val(a.prec(), 1e-30));
        (d / s).to_f64()
    }

    #[test]
    fn order_zero_is_the_mean() {
        let b1 = Domain::unit_box(1);
        let v = upper_bound_full(&xpow(2), &b1, 0, P).unwrap();
        assert!(rel(&v.value, &P.float(&rat(1, 3))) < 1e-70);
        for k in 1..6 {
            for method in [Method::PfmHankel, Method::PfmChebyshev] {
                let v = upper_bound_pfm(&xpow(2 * k), &b1, 0, method, P).unwrap();
                assert!(rel(&v.value, &P.float(&rat(1, 2 * k as i64 + 1))) < 1e-60, "{method} k = {k}");
            }
        }
    }

    #[test]
    fn identity_function_matches_legendre_roots() {
        let b1 = Domain::unit_box(1);
        let leg = jacobi_recurrence(&JacobiParams::legendre(), 16, P).unwrap();
        let v = upper_bound_full(&x1(), &b1, 1, P).unwrap();
        assert!((v.value_f64() + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        for r in 0..15 {
            let full = upper_bound_full(&x1(), &b1, r, P).unwrap();
            let oracle = smallest_root(&leg, r + 1);
            assert!(rel(&full.value, &oracle) < 1e-40, "r = {r}");
            for method in [Method::PfmHankel, Method::PfmChebyshev] {
                let pfm = upper_bound_pfm(&x1(), &b1, r, method, P).unwrap();
                assert!(rel(&pfm.value, &full.value) < 1e-40, "{method} r = {r}");
            }
        }
    }

    #[test]
    fn even_powers_match_theorem3_reference() {
        let b1 = Domain::unit_box(1);
        for k in 1..=3u32 {
            for r in [1usize, 4, 8] {
                let expect = theorem3_reference(k, r, P).unwrap();
                for method in [Method::PfmHankel, Method::PfmChebyshev] {
                    let v = upper_bound_pfm(&xpow(2 * k), &b1, r, method, P).unwrap();
                    assert!(rel(&v.value, &expect) < 1e-30, "{method} k = {k} r = {r}");
                }
            }
        }
    }

    #[test]
    fn x_squared_pfm_equals_full_at_double_order() {
        let b1 = Domain::unit_box(1);
        for r in 0..6 {
            let pfm = upper_bound_pfm(&xpow(2), &b1, r, Method::PfmHankel, P).unwrap();
            let full = upper_bound_full(&xpow(2), &b1, 2 * r, P).unwrap();
            assert!(rel(&pfm.value, &full.value) < 1e-30, "r = {r}");
        }
    }

    #[test]
    fn monotone_chain_and_lower_bound() {
        let f = matyas();
        for dom in [Domain::unit_box(2), Domain::ball(2)] {
            let full = upper_bounds_full(&f, &dom, 6, P).unwrap();
            for w in full.windows(2) {
                assert!(w[1].value <= Float::with_val(256, &w[0].value + 1e-40));
            }
            assert!(full.iter().all(|b| b.value >= -1e-30));
            for r in 0..=3 {
                let pfm = upper_bound_pfm(&f, &dom, r, Method::PfmHankel, P).unwrap();
                assert!(full[2 * r].value <= Float::with_val(256, &pfm.value + 1e-30), "{dom} r = {r}");
            }
            // the single-block and the repeated-assembly paths agree
            let direct = upper_bound_full(&f, &dom, 4, P).unwrap();
            assert!(rel(&direct.value, &full[4].value) < 1e-60);
            let picked = upper_bounds_full_at(&f, &dom, &[4, 2], P).unwrap();
            assert_eq!((picked[0].r, picked[1].r), (4, 2));
            assert!(rel(&picked[0].value, &full[4].value) < 1e-60);
            assert!(rel(&picked[1].value, &full[2].value) < 1e-60);
        }
    }

    #[test]
    fn affine_equivariance() {
        let f = matyas();
        let g = &f.scale(&rat(3, 2)) + &MPoly::constant(2, rat(-7, 1));
        let dom = Domain::ball(2);
        let shift = |x: &HFloat| Float::with_val(256, x * Float::with_val(256, 1.5)) - 7u32;
        for r in [1, 3] {
            let a = upper_bound_full(&f, &dom, r, P).unwrap();
            let b = upper_bound_full(&g, &dom, r, P).unwrap();
            assert!(rel(&b.value, &shift(&a.value)) < 1e-50);
            for method in [Method::PfmHankel, Method::PfmChebyshev] {
                let a = upper_bound_pfm(&f, &dom, r, method, P).unwrap();
                let b = upper_bound_pfm(&g, &dom, r, method, P).unwrap();
                assert!(rel(&b.value, &shift(&a.value)) < 1e-50);
            }
        }
    }

    #[test]
    fn methods_agree() {
        let f = matyas();
        for r in [2, 7, 12] {
            let h = upper_bound_pfm(&f, &Domain::unit_box(2), r, Method::PfmHankel, P).unwrap();
            let c = upper_bound_pfm(&f, &Domain::unit_box(2), r, Method::PfmChebyshev, P).unwrap();
            assert!(rel(&h.value, &c.value) < 1e-20, "r = {r}");
        }
    }

    #[test]
    fn constant_function() {
        let c = MPoly::constant(2, rat(5, 1));
        let dom = Domain::unit_box(2);
        let v = upper_bound_pfm(&c, &dom, 0, Method::PfmChebyshev, P).unwrap();
        assert_eq!(v.value, P.float(5));
        assert!(matches!(
            upper_bound_pfm(&c, &dom, 2, Method::PfmChebyshev, P),
            Err(Error::BreakdownNonPositiveBeta { .. })
        ));
        assert!(matches!(
            upper_bound_pfm(&c, &dom, 2, Method::PfmHankel, P),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(rel(&upper_bound_full(&c, &dom, 2, P).unwrap().value, &P.float(5)) < 1e-60);
    }

    #[test]
    fn rational_rounding() {
        let pi = Float::with_val(256, rug::float::Constant::Pi);
        assert_eq!(round_to_rational(&pi, &Integer::from(1000)), rat(355, 113));
        assert_eq!(round_to_rational(&-pi.clone(), &Integer::from(7)), rat(-22, 7));
        assert_eq!(round_to_rational(&P.float(0.375), &Integer::from(1000)), rat(3, 8));
        let approx = round_to_rational(&pi, &density_denominator_cap());
        assert!(Float::with_val(256, &pi - &approx).abs() < 1e-37);
    }

    #[test]
    fn densities_are_normalized_and_certify_the_bound() {
        let b1 = Domain::unit_box(1);
        let r0 = upper_bound_full(&xpow(2), &b1, 0, P).unwrap();
        let d = optimal_density(&r0, &xpow(2)).unwrap();
        assert_eq!(d.eval(&[rat(1, 3)]).unwrap(), rat(1, 1));

        let r1 = upper_bound_full(&x1(), &b1, 1, P).unwrap();
        let d = optimal_density(&r1, &x1()).unwrap();
        assert_eq!(d.integral().unwrap(), rat(1, 1));
        assert!((d.expected_f().unwrap().to_f64() + 1.0 / 3f64.sqrt()).abs() < 1e-15);

        let f = matyas();
        let dom = Domain::unit_box(2);
        for res in [
            upper_bound_full(&f, &dom, 4, P).unwrap(),
            upper_bound_pfm(&f, &dom, 4, Method::PfmHankel, P).unwrap(),
            upper_bound_pfm(&f, &dom, 4, Method::PfmChebyshev, P).unwrap(),
        ] {
            let d = optimal_density(&res, &f).unwrap();
            assert_eq!(d.integral().unwrap(), rat(1, 1));
            let e = Float::with_val(256, d.expected_f().unwrap());
            assert!(rel(&e, &res.value) < 1e-25, "{}", res.method);
            // midpoint Riemann sum over a 401² grid; the box has volume 4
            let n = 401;
            let h = 2.0 / n as f64;
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let v = d.eval_f64(&[-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h]);
                    assert!(v >= 0.0);
                    s += v;
                }
            }
            s *= h * h / 4.0;
            assert!((s - 1.0).abs() < 0.01, "{} {s}", res.method);
        }
    }

    #[test]
    fn sampled_density_values() {
        let f = matyas();
        let dom = Domain::ball(2);
        let res = upper_bound_full(&f, &dom, 2, P).unwrap();
        let d = optimal_density(&res, &f).unwrap();
        let grid = density_grid(&dom, &rat(1, 4)).unwrap();
        assert!(grid.iter().all(|p| Rat::from(p[0].square_ref()) + Rat::from(p[1].square_ref()) <= 1));
        let samples = sample_density(&d, &grid).unwrap();
        assert_eq!(samples.len(), grid.len());
        assert!(samples.iter().all(|(_, v)| *v >= 0));
        assert!(sample_density(&d, &[vec![rat(0, 1)]]).is_err());
    }

    #[test]
    fn csv_row_format() {
        let v = upper_bound_full(&xpow(2), &Domain::unit_box(1), 0, P).unwrap();
        assert_eq!(v.csv_row(), "0,full,3.33333333333e-1");
        assert_eq!("pfm-cheb".parse::<Method>().unwrap(), Method::PfmChebyshev);
        assert!("nope".parse::<Method>().is_err());
    }
}
