//! Exact moments of the uniform probability measure on `[-1,1]^n` and on the
//! closed unit ball, and of push-forward measures `λ_f`.
//!
//! Normalizing to a probability measure keeps every ball moment rational:
//! for `α = 2β`,
//!
//! ```text
//! E_ball[x^α] = ∏ (2β_i − 1)!!  /  ∏_{j=1}^{|β|} (n + 2j)
//! ```
//!
//! and `E_box[x^α] = ∏ 1/(α_i + 1)`. Odd exponents integrate to zero on both.

use std::fmt;
use std::fmt::Write as _;

use rug::ops::Pow;
use rug::Integer;

use crate::error::{Error, Result};
use crate::polyring::{IntegerForm, MPoly, Rat, DEFAULT_TERM_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DomainKind {
    /// `[-1, 1]^n`
    Box,
    /// The closed Euclidean unit ball `B^n`.
    Ball,
}

/// A compact domain carrying its uniform probability measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Domain {
    pub kind: DomainKind,
    pub nvars: usize,
}

impl Domain {
    pub fn unit_box(nvars: usize) -> Self {
        Domain { kind: DomainKind::Box, nvars }
    }

    pub fn ball(nvars: usize) -> Self {
        Domain { kind: DomainKind::Ball, nvars }
    }

    /// Exact `E[x^α]` under the uniform probability measure.
    pub fn monomial_moment(&self, alpha: &[u32]) -> Rat {
        assert_eq!(alpha.len(), self.nvars, "exponent vector length must match the domain dimension");
        let mut num = Integer::from(1);
        let mut den = Integer::from(1);
        if !alpha.iter().all(|a| a % 2 == 0) {
            return Rat::new();
        }
        match self.kind {
            DomainKind::Box => {
                for &a in alpha {
                    den *= a + 1;
                }
            }
            DomainKind::Ball => {
                let mut half_total = 0u32;
                for &a in alpha {
                    let b = a / 2;
                    half_total += b;
                    for j in 1..=b {
                        num *= 2 * j - 1;
                    }
                }
                let n = self.nvars as u32;
                for j in 1..=half_total {
                    den *= n + 2 * j;
                }
            }
        }
        Rat::from((num, den))
    }

    pub fn check(&self, p: &MPoly) -> Result<()> {
        if p.nvars() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: p.nvars() });
        }
        Ok(())
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DomainKind::Box => write!(f, "box{}", self.nvars),
            DomainKind::Ball => write!(f, "ball{}", self.nvars),
        }
    }
}

/// Shorthand for [`Domain::monomial_moment`].
pub fn monomial_moment(domain: &Domain, alpha: &[u32]) -> Rat {
    domain.monomial_moment(alpha)
}

/// Memoized monomial moments for the assembly loops.
///
/// Box moments factor over coordinates and ball moments over the per-coordinate
/// double factorials and a total-degree denominator, so both reduce to small
/// lookup tables.
#[derive(Clone, Debug)]
pub struct MomentTable {
    domain: Domain,
    // Box: 1/(a+1) for every a; Ball: (2b-1)!! indexed by b = a/2.
    per_coord: Vec<Integer>,
    // Ball only: prod_{j=1}^{s} (n + 2j), indexed by s.
    total_den: Vec<Integer>,
}

impl MomentTable {
    pub fn new(domain: Domain, max_degree: u32) -> Self {
        let md = max_degree as usize;
        let mut per_coord = Vec::with_capacity(md + 1);
        let mut total_den = Vec::new();
        match domain.kind {
            DomainKind::Box => {
                for a in 0..=md {
                    per_coord.push(Integer::from(a + 1));
                }
            }
            DomainKind::Ball => {
                let mut df = Integer::from(1);
                per_coord.push(df.clone());
                for b in 1..=md / 2 {
                    df *= 2 * b - 1;
                    per_coord.push(df.clone());
                }
                let mut d = Integer::from(1);
                total_den.push(d.clone());
                for j in 1..=md / 2 {
                    d *= domain.nvars + 2 * j;
                    total_den.push(d.clone());
                }
            }
        }
        MomentTable { domain, per_coord, total_den }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Moment of the monomial with exponents `a + b` (no allocation of the sum).
    pub fn moment_of_sum(&self, a: &[u32], b: &[u32]) -> Option<Rat> {
        if a.iter().zip(b).any(|(x, y)| (x + y) % 2 == 1) {
            return None;
        }
        Some(self.even_moment(a.iter().zip(b).map(|(x, y)| x + y)))
    }

    pub fn moment(&self, alpha: &[u32]) -> Option<Rat> {
        if alpha.iter().any(|x| x % 2 == 1) {
            return None;
        }
        Some(self.even_moment(alpha.iter().copied()))
    }

    fn even_moment(&self, alpha: impl Iterator<Item = u32>) -> Rat {
        match self.domain.kind {
            DomainKind::Box => {
                let mut den = Integer::from(1);
                for a in alpha {
                    if a > 0 {
                        den *= self.lookup(a as usize);
                    }
                }
                Rat::from((Integer::from(1), den))
            }
            DomainKind::Ball => {
                let mut num = Integer::from(1);
                let mut s = 0usize;
                for a in alpha {
                    let b = (a / 2) as usize;
                    s += b;
                    if b > 0 {
                        num *= self.lookup(b);
                    }
                }
                let den = self.total_den.get(s).cloned().unwrap_or_else(|| {
                    let mut d = Integer::from(1);
                    for j in 1..=s {
                        d *= self.domain.nvars + 2 * j;
                    }
                    d
                });
                Rat::from((num, den))
            }
        }
    }

    fn lookup(&self, idx: usize) -> Integer {
        match self.per_coord.get(idx) {
            Some(v) => v.clone(),
            None => match self.domain.kind {
                DomainKind::Box => Integer::from(idx + 1),
                DomainKind::Ball => {
                    let mut df = Integer::from(1);
                    for j in 1..=idx {
                        df *= 2 * j - 1;
                    }
                    df
                }
            },
        }
    }
}

/// Exact `E[p]` by linearity.
pub fn poly_moment(domain: &Domain, p: &MPoly) -> Result<Rat> {
    domain.check(p)?;
    let table = MomentTable::new(*domain, p.degree());
    let mut total = Rat::new();
    for (e, c) in p.terms() {
        if let Some(m) = table.moment(e.as_slice()) {
            total += m * c;
        }
    }
    Ok(total)
}

fn integer_form_moment(table: &MomentTable, g: &IntegerForm) -> Rat {
    // sum of c_α * μ_α with all integer numerators first
    let mut total = Rat::new();
    for (e, c) in g.terms() {
        if let Some(m) = table.moment(e.as_slice()) {
            total += m * c;
        }
    }
    total / g.denominator()
}

/// The moments `m_k = E[f^k]`, `k = 0..=order`, of the push-forward measure.
#[derive(Clone, Debug)]
pub struct MomentSeq {
    values: Vec<Rat>,
    domain: Domain,
    f: MPoly,
}

impl MomentSeq {
    /// Wraps an externally computed sequence (used for measures that are not
    /// push-forwards of a domain, e.g. classical weights in tests).
    pub fn from_values(values: Vec<Rat>, domain: Domain, f: MPoly) -> Self {
        MomentSeq { values, domain, f }
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn f(&self) -> &MPoly {
        &self.f
    }

    /// Keeps `m_0..=m_order`.
    pub fn truncated(&self, order: usize) -> MomentSeq {
        MomentSeq {
            values: self.values[..=order.min(self.order())].to_vec(),
            domain: self.domain,
            f: self.f.clone(),
        }
    }

    /// Every moment multiplied by `c`; models a rescaled reference measure.
    pub fn scaled(&self, c: &Rat) -> MomentSeq {
        MomentSeq {
            values: self.values.iter().map(|v| Rat::from(v * c)).collect(),
            domain: self.domain,
            f: self.f.clone(),
        }
    }

    /// CSV with header `k,num,den`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,num,den\n");
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{k},{},{}", v.numer(), v.denom());
        }
        out
    }
}

pub fn pushforward_moments(domain: &Domain, f: &MPoly, order: usize) -> Result<MomentSeq> {
    pushforward_moments_capped(domain, f, order, DEFAULT_TERM_CAP)
}

pub fn pushforward_moments_capped(domain: &Domain, f: &MPoly, order: usize, cap: usize) -> Result<MomentSeq> {
    domain.check(f)?;
    let g = f.integer_form();
    let table = MomentTable::new(*domain, f.degree() * order as u32);
    let mut values = Vec::with_capacity(order + 1);
    values.push(Rat::from(1));
    let mut power = g.clone();
    for k in 1..=order {
        values.push(integer_form_moment(&table, &power));
        if k < order {
            power = power.mul_capped(&g, cap)?;
        }
    }
    Ok(MomentSeq { values, domain: *domain, f: f.clone() })
}

/// Coefficients of `T_0..=T_order` in the power basis.
pub(crate) fn chebyshev_t_coeffs(order: usize) -> Vec<Vec<Integer>> {
    let mut rows: Vec<Vec<Integer>> = Vec::with_capacity(order + 1);
    rows.push(vec![Integer::from(1)]);
    if order >= 1 {
        rows.push(vec![Integer::new(), Integer::from(1)]);
    }
    for j in 2..=order {
        let mut next = vec![Integer::new(); j + 1];
        for (i, c) in rows[j - 1].iter().enumerate() {
            next[i + 1] += Integer::from(c * 2u32);
        }
        for (i, c) in rows[j - 2].iter().enumerate() {
            next[i] -= c;
        }
        rows.push(next);
    }
    rows
}

/// `E[T_j(ℓ(f))]` for `j = 0..=order`, where `ℓ` maps `[lo, hi]` onto `[-1, 1]`.
pub fn modified_moments(domain: &Domain, f: &MPoly, lo: &Rat, hi: &Rat, order: usize) -> Result<Vec<Rat>> {
    check_interval(lo, hi)?;
    let m = pushforward_moments(domain, f, order)?;
    chebyshev_moments(m.values(), lo, hi)
}

/// Modified moments from already computed power moments `m_0..m_M`.
pub fn chebyshev_moments(moments: &[Rat], lo: &Rat, hi: &Rat) -> Result<Vec<Rat>> {
    check_interval(lo, hi)?;
    let order = moments.len().saturating_sub(1);
    let width = Rat::from(hi - lo);
    let scale = Rat::from(2) / &width;
    let shift = -Rat::from(hi + lo) / &width;

    // E[u^i] with u = scale * t + shift, via the binomial expansion.
    let mut u_moments = Vec::with_capacity(order + 1);
    let mut scale_pows = vec![Rat::from(1)];
    let mut shift_pows = vec![Rat::from(1)];
    for _ in 0..order {
        scale_pows.push(Rat::from(scale_pows.last().unwrap() * &scale));
        shift_pows.push(Rat::from(shift_pows.last().unwrap() * &shift));
    }
    for i in 0..=order {
        let mut s = Rat::new();
        for (mm, moment) in moments.iter().enumerate().take(i + 1) {
            let binom = Integer::from(i).binomial(mm as u32);
            s += Rat::from(&scale_pows[mm] * &shift_pows[i - mm]) * moment * binom;
        }
        u_moments.push(s);
    }

    let cheb = chebyshev_t_coeffs(order);
    Ok(cheb
        .iter()
        .map(|row| {
            let mut s = Rat::new();
            for (c, um) in row.iter().zip(&u_moments) {
                if *c != 0 {
                    s += Rat::from(um * c);
                }
            }
            s
        })
        .collect())
}

fn check_interval(lo: &Rat, hi: &Rat) -> Result<()> {
    if lo >= hi {
        return Err(Error::InvalidInterval { lo: lo.to_string(), hi: hi.to_string() });
    }
    Ok(())
}

/// Coefficient-bound enclosure `[lo, hi] ⊇ f(domain)`.
///
/// Each monomial ranges over `[0, 1]` when all its exponents are even and over
/// `[-1, 1]` otherwise, on the box and therefore also on the ball.
pub fn range_enclosure(domain: &Domain, f: &MPoly) -> (Rat, Rat) {
    debug_assert_eq!(domain.nvars, f.nvars());
    let mut lo = Rat::new();
    let mut hi = Rat::new();
    for (e, c) in f.terms() {
        if e.degree() == 0 {
            lo += c;
            hi += c;
        } else if e.is_even() {
            if *c > 0 {
                hi += c;
            } else {
                lo += c;
            }
        } else {
            let a = Rat::from(c.abs_ref());
            hi += &a;
            lo -= &a;
        }
    }
    (lo, hi)
}

/// Largest number of cells examined by [`range_enclosure_refined`].
pub const ENCLOSURE_CELL_BUDGET: usize = 4096;

/// `[lo, hi]` of `t^a` for `t ∈ [l, h]`.
fn power_interval(l: &Rat, h: &Rat, a: u32) -> (Rat, Rat) {
    let pl = Rat::from(l.pow(a));
    let ph = Rat::from(h.pow(a));
    if a % 2 == 1 {
        (pl, ph)
    } else if *l <= 0 && *h >= 0 {
        (Rat::new(), if pl > ph { pl } else { ph })
    } else if pl < ph {
        (pl, ph)
    } else {
        (ph, pl)
    }
}

fn interval_mul(a: &(Rat, Rat), b: &(Rat, Rat)) -> (Rat, Rat) {
    let c = [
        Rat::from(&a.0 * &b.0),
        Rat::from(&a.0 * &b.1),
        Rat::from(&a.1 * &b.0),
        Rat::from(&a.1 * &b.1),
    ];
    let lo = c.iter().min().unwrap().clone();
    let hi = c.iter().max().unwrap().clone();
    (lo, hi)
}

/// Rigorous enclosure of `f(domain)` by monomial-wise interval bounds on a
/// uniform subdivision of the box, discarding cells that miss the ball.
///
/// Never wider than [`range_enclosure`].
pub fn range_enclosure_refined(domain: &Domain, f: &MPoly) -> (Rat, Rat) {
    let (crude_lo, crude_hi) = range_enclosure(domain, f);
    let n = domain.nvars;
    if n == 0 || f.is_constant() {
        return (crude_lo, crude_hi);
    }
    let mut k = 1usize;
    while (k + 1).checked_pow(n as u32).is_some_and(|c| c <= ENCLOSURE_CELL_BUDGET) {
        k += 1;
    }
    if k == 1 {
        return (crude_lo, crude_hi);
    }
    let edges: Vec<Rat> = (0..=k).map(|i| Rat::from((2 * i as i64 - k as i64, k as i64))).collect();
    let terms: Vec<(Vec<u32>, Rat)> = f.terms().map(|(e, c)| (e.as_slice().to_vec(), c.clone())).collect();
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    let mut idx = vec![0usize; n];
    loop {
        let keep = match domain.kind {
            DomainKind::Box => true,
            DomainKind::Ball => {
                let mut s = Rat::new();
                for &i in &idx {
                    let (l, h) = (&edges[i], &edges[i + 1]);
                    if *l > 0 {
                        s += Rat::from(l.square_ref());
                    } else if *h < 0 {
                        s += Rat::from(h.square_ref());
                    }
                }
                s <= 1
            }
        };
        if keep {
            let mut cell_lo = Rat::new();
            let mut cell_hi = Rat::new();
            for (e, c) in &terms {
                let mut iv = (Rat::from(1), Rat::from(1));
                for (v, &a) in e.iter().enumerate() {
                    if a > 0 {
                        let pi = power_interval(&edges[idx[v]], &edges[idx[v] + 1], a);
                        iv = interval_mul(&iv, &pi);
                    }
                }
                let scaled = interval_mul(&iv, &(c.clone(), c.clone()));
                cell_lo += scaled.0;
                cell_hi += scaled.1;
            }
            if lo.as_ref().is_none_or(|l| cell_lo < *l) {
                lo = Some(cell_lo);
            }
            if hi.as_ref().is_none_or(|h| cell_hi > *h) {
                hi = Some(cell_hi);
            }
        }
        let mut d = 0;
        loop {
            if d == n {
                let lo = lo.unwrap_or(crude_lo.clone());
                let hi = hi.unwrap_or(crude_hi.clone());
                return (if lo > crude_lo { lo } else { crude_lo }, if hi < crude_hi { hi } else { crude_hi });
            }
            idx[d] += 1;
            if idx[d] < k {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::Exponents;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exps(e: &[u32]) -> Exponents {
        Exponents::new(e.to_vec())
    }

    fn r(n: i64, d: i64) -> Rat {
        Rat::from((n, d))
    }

    fn motzkin() -> MPoly {
        MPoly::from_terms(
            2,
            [(r(64, 1), vec![4, 2]), (r(64, 1), vec![2, 4]), (r(-48, 1), vec![2, 2]), (r(1, 1), vec![0, 0])],
        )
        .unwrap()
    }

    fn matyas() -> MPoly {
        MPoly::from_terms(2, [(r(26, 1), vec![2, 0]), (r(26, 1), vec![0, 2]), (r(-48, 1), vec![1, 1])]).unwrap()
    }

    #[test]
    fn box_moment_examples() {
        let b = Domain::unit_box(2);
        assert_eq!(b.monomial_moment(&[2, 4]), r(1, 15));
        assert_eq!(b.monomial_moment(&[3, 0]), r(0, 1));
        assert_eq!(Domain::ball(3).monomial_moment(&[2, 1, 0]), r(0, 1));
    }

    #[test]
    fn ball_moment_against_polar_quadrature_and_monte_carlo() {
        let exact = Domain::ball(2).monomial_moment(&[2, 0]);
        assert_eq!(exact, r(1, 4));

        // polar midpoint rule for (1/pi) ∫∫ r^3 cos^2 θ dr dθ
        let (nr, nt) = (400, 400);
        let mut q = 0.0;
        for i in 0..nr {
            let rr = (i as f64 + 0.5) / nr as f64;
            for j in 0..nt {
                let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / nt as f64;
                q += rr.powi(3) * th.cos().powi(2);
            }
        }
        q *= (1.0 / nr as f64) * (2.0 * std::f64::consts::PI / nt as f64) / std::f64::consts::PI;
        assert!((q - 0.25).abs() < 1e-5, "polar quadrature {q}");

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut hits, mut acc) = (0u64, 0.0f64);
        while hits < 1_000_000 {
            let x: f64 = rng.random_range(-1.0..1.0);
            let y: f64 = rng.random_range(-1.0..1.0);
            if x * x + y * y <= 1.0 {
                hits += 1;
                acc += x * x;
            }
        }
        let mean = acc / hits as f64;
        // Var[x^2] on the disk = E[x^4] - E[x^2]^2 = 1/8 - 1/16
        let sigma = (1.0 / 16.0f64 / hits as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * sigma, "mc {mean}");
    }

    #[test]
    fn ball_moments_match_closed_form_in_higher_dimension() {
        // E[x1^2] on B^n is 1/(n+2); E[x1^2 x2^2] is 1/((n+2)(n+4)).
        for n in 1..6 {
            let d = Domain::ball(n);
            let mut a = vec![0; n];
            a[0] = 2;
            assert_eq!(d.monomial_moment(&a), r(1, n as i64 + 2));
            if n >= 2 {
                a[1] = 2;
                assert_eq!(d.monomial_moment(&a), r(1, (n as i64 + 2) * (n as i64 + 4)));
            }
        }
        // B^1 is [-1,1]
        for a in 0..12 {
            assert_eq!(Domain::ball(1).monomial_moment(&[a]), Domain::unit_box(1).monomial_moment(&[a]));
        }
    }

    #[test]
    fn moment_table_agrees_with_direct_formula() {
        for dom in [Domain::unit_box(3), Domain::ball(3)] {
            let t = MomentTable::new(dom, 6);
            for e in Exponents::all_up_to(3, 10) {
                let direct = dom.monomial_moment(e.as_slice());
                let cached = t.moment(e.as_slice()).unwrap_or_default();
                assert_eq!(direct, cached, "{dom} {:?}", e);
            }
        }
    }

    #[test]
    fn poly_moment_examples() {
        let b1 = Domain::unit_box(1);
        assert_eq!(poly_moment(&b1, &MPoly::one(1)).unwrap(), r(1, 1));
        let x2 = MPoly::monomial(r(1, 1), exps(&[2]));
        assert_eq!(poly_moment(&b1, &x2).unwrap(), r(1, 3));
        assert_eq!(poly_moment(&Domain::unit_box(2), &matyas()).unwrap(), r(52, 3));
        assert!(poly_moment(&b1, &matyas()).is_err());
    }

    #[test]
    fn pushforward_identity_and_even_powers() {
        let b1 = Domain::unit_box(1);
        let x = MPoly::var(1, 0);
        let m = pushforward_moments(&b1, &x, 9).unwrap();
        for (k, v) in m.values().iter().enumerate() {
            let expect = if k % 2 == 1 { r(0, 1) } else { r(1, k as i64 + 1) };
            assert_eq!(*v, expect);
        }
        for kk in 1..=5i64 {
            let f = MPoly::monomial(r(1, 1), exps(&[2 * kk as u32]));
            let m = pushforward_moments(&b1, &f, 8).unwrap();
            for (j, v) in m.values().iter().enumerate() {
                assert_eq!(*v, r(1, 2 * kk * j as i64 + 1));
            }
        }
    }

    #[test]
    fn pushforward_matches_direct_powers() {
        let f = motzkin();
        let d = Domain::ball(2);
        let m = pushforward_moments(&d, &f, 5).unwrap();
        for k in 0..=5u32 {
            assert_eq!(m.values()[k as usize], poly_moment(&d, &f.pow(k).unwrap()).unwrap());
        }
    }

    #[test]
    fn modified_moment_examples() {
        let b1 = Domain::unit_box(1);
        let x = MPoly::var(1, 0);
        let mm = modified_moments(&b1, &x, &r(-1, 1), &r(1, 1), 4).unwrap();
        assert_eq!(mm[0], r(1, 1));
        assert_eq!(mm[2], r(-1, 3));
        let x2 = MPoly::monomial(r(1, 1), exps(&[2]));
        let mm = modified_moments(&b1, &x2, &r(0, 1), &r(1, 1), 3).unwrap();
        assert_eq!(mm[0], r(1, 1));
        assert_eq!(mm[1], r(-1, 3));
        assert!(matches!(modified_moments(&b1, &x2, &r(1, 1), &r(1, 1), 3), Err(Error::InvalidInterval { .. })));
    }

    #[test]
    fn modified_moments_by_direct_expansion() {
        // E[T_j(ℓ(f))] recomputed by composing T_j with ℓ∘f symbolically
        let f = matyas();
        let d = Domain::unit_box(2);
        let (lo, hi) = range_enclosure(&d, &f);
        let mm = modified_moments(&d, &f, &lo, &hi, 5).unwrap();
        let width = Rat::from(&hi - &lo);
        let ell = &f.scale(&(Rat::from(2) / &width)) + &MPoly::constant(2, -Rat::from(&hi + &lo) / &width);
        let cheb = chebyshev_t_coeffs(5);
        for (j, row) in cheb.iter().enumerate() {
            let t = crate::polyring::UPoly::from_coeffs(row.iter().map(|c| Rat::from(c.clone())).collect());
            let composed = t.compose(&ell).unwrap();
            assert_eq!(poly_moment(&d, &composed).unwrap(), mm[j], "j = {j}");
        }
    }

    #[test]
    fn enclosure_contains_range() {
        let b1 = Domain::unit_box(1);
        let (lo, hi) = range_enclosure(&b1, &MPoly::var(1, 0));
        assert!(lo <= -1 && hi >= 1);
        let (lo, hi) = range_enclosure(&b1, &MPoly::monomial(r(1, 1), exps(&[2])));
        assert!(lo <= 0 && hi >= 1);

        // Booth on a 1001^2 grid
        let booth = MPoly::from_terms(
            2,
            [
                (r(500, 1), vec![2, 0]),
                (r(800, 1), vec![1, 1]),
                (r(500, 1), vec![0, 2]),
                (r(-340, 1), vec![1, 0]),
                (r(-380, 1), vec![0, 1]),
                (r(74, 1), vec![0, 0]),
            ],
        )
        .unwrap();
        let (lo, hi) = range_enclosure(&Domain::unit_box(2), &booth);
        let mut gmax = f64::MIN;
        for i in 0..=1000 {
            for j in 0..=1000 {
                let p = [-1.0 + i as f64 / 500.0, -1.0 + j as f64 / 500.0];
                gmax = gmax.max(booth.eval_f64(&p));
            }
        }
        assert!(lo <= 0);
        assert!(hi.to_f64() >= gmax, "{hi} vs {gmax}");
    }

    #[test]
    fn motzkin_moments_against_monte_carlo() {
        let f = motzkin();
        let m = pushforward_moments(&Domain::unit_box(2), &f, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 200_000;
        let mut sums = [0.0f64; 7];
        let mut sq = [0.0f64; 7];
        for _ in 0..n {
            let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let v = f.eval_f64(&p);
            for k in 0..=6 {
                let t = v.powi(k as i32);
                sums[k] += t;
                sq[k] += t * t;
            }
        }
        for k in 1..=6 {
            let mean = sums[k] / n as f64;
            let var = sq[k] / n as f64 - mean * mean;
            let sigma = (var / n as f64).sqrt();
            let exact = m.values()[k].to_f64();
            assert!((mean - exact).abs() <= 3.0 * sigma, "k={k}: {mean} vs {exact}");
        }
    }

    #[test]
    fn refined_enclosure_is_tighter_and_valid() {
        let f = motzkin();
        for dom in [Domain::unit_box(2), Domain::ball(2)] {
            let (clo, chi) = range_enclosure(&dom, &f);
            let (lo, hi) = range_enclosure_refined(&dom, &f);
            assert!(lo >= clo && hi <= chi && lo < hi);
            let mut gmin = f64::MAX;
            let mut gmax = f64::MIN;
            for i in 0..=400 {
                for j in 0..=400 {
                    let p = [-1.0 + i as f64 / 200.0, -1.0 + j as f64 / 200.0];
                    if dom.kind == DomainKind::Ball && p[0] * p[0] + p[1] * p[1] > 1.0 {
                        continue;
                    }
                    let v = f.eval_f64(&p);
                    gmin = gmin.min(v);
                    gmax = gmax.max(v);
                }
            }
            assert!(lo.to_f64() <= gmin && hi.to_f64() >= gmax, "{dom}: [{lo}, {hi}] vs [{gmin}, {gmax}]");
        }
        // the ball range of the Motzkin polynomial is [0, 5]
        let (lo, hi) = range_enclosure_refined(&Domain::ball(2), &f);
        assert!(lo.to_f64() > -5.0 && hi.to_f64() < 12.0, "[{lo}, {hi}]");
    }

    #[test]
    fn csv_export() {
        let m = pushforward_moments(&Domain::unit_box(1), &MPoly::var(1, 0), 2).unwrap();
        assert_eq!(m.to_csv(), "k,num,den\n0,1,1\n1,0,1\n2,1,3\n");
    }
}
