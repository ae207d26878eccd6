//! Chebyshev needle polynomials and the resulting certificate upper bound.
//!
//! The needle of order `r` and width `h` is
//!
//! ```text
//! v(t) = ( T_r(u(t)) / T_r(u(0)) )²,    u(t) = (1 + h − 2t) / (1 − h)
//! ```
//!
//! which maps `[h, 1]` onto `[−1, 1]` and puts `t = 0` at `u(0) > 1`, where
//! `T_r` grows fastest. It has degree `2r`, equals 1 at the origin, lies in
//! `[0, 1]` on `[0, 1]` and is at most `4·exp(−½ r √h)` on `[h, 1]`.
//!
//! Composing the needle with a rescaled objective `F ∈ [0, 1]` gives a feasible
//! push-forward density, so `E[f · v(F)] / E[v(F)]` is an upper bound on
//! `f_pfm^(r)`.

use std::fmt;

use rug::Float;

use crate::error::{Error, Result};
use crate::linalg::{HFloat, Precision};
use crate::measures::{Domain, DomainKind};
use crate::polyring::{MPoly, Rat, UPoly};
use crate::quadrature::GaussLegendre;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeedleParams {
    r: usize,
    h: Rat,
}

impl NeedleParams {
    pub fn new(r: usize, h: Rat) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameters("needle order must be at least 1".into()));
        }
        if h <= 0 || h >= 1 {
            return Err(Error::InvalidParameters(format!("needle width {h} outside (0, 1)")));
        }
        Ok(NeedleParams { r, h })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn h(&self) -> &Rat {
        &self.h
    }

    /// `u(0) = (1 + h) / (1 − h)`.
    pub fn peak_argument(&self) -> Rat {
        Rat::from(1 + &self.h) / Rat::from(1 - &self.h)
    }

    /// `u(t)` as a polynomial in `t`.
    fn argument(&self) -> UPoly {
        let w = Rat::from(1 - &self.h);
        UPoly::linear(Rat::from(1 + &self.h) / &w, Rat::from(-2) / w)
    }
}

/// `T_r(u(t)) / T_r(u(0))`, whose square is the needle.
pub fn needle_root(params: &NeedleParams) -> UPoly {
    let u = params.argument();
    let mut prev = UPoly::from_coeffs(vec![Rat::from(1)]);
    let mut cur = u.clone();
    let two_u = u.scale(&Rat::from(2));
    for _ in 1..params.r {
        let next = two_u.mul(&cur).add(&prev.scale(&Rat::from(-1)));
        prev = cur;
        cur = next;
    }
    let peak = cur.eval(&Rat::new());
    cur.scale(&Rat::from(peak.recip()))
}

pub fn build_needle(params: &NeedleParams) -> UPoly {
    let s = needle_root(params);
    s.mul(&s)
}

/// `v(t)` through the Chebyshev recurrence, at the precision of `t`.
pub fn needle_value(params: &NeedleParams, t: &HFloat) -> HFloat {
    let p = t.prec();
    let w = Float::with_val(p, 1 - params.h.clone());
    let chebyshev = |u: &HFloat| -> HFloat {
        let mut prev = Float::with_val(p, 1);
        let mut cur = u.clone();
        for _ in 1..params.r {
            let mut next = Float::with_val(p, u * &cur);
            next *= 2u32;
            next -= &prev;
            prev = cur;
            cur = next;
        }
        cur
    };
    let mut u = Float::with_val(p, 1 + params.h.clone());
    u -= Float::with_val(p, t * 2u32);
    u /= &w;
    let u0 = Float::with_val(p, params.peak_argument());
    let s = chebyshev(&u) / chebyshev(&u0);
    s.square()
}

/// `4·exp(−½ r √h)`.
pub fn decay_bound(params: &NeedleParams) -> f64 {
    4.0 * (-0.5 * params.r as f64 * params.h.to_f64().sqrt()).exp()
}

/// Outcome of [`verify_needle`].
#[derive(Clone, Debug)]
pub struct NeedleReport {
    pub r: usize,
    pub h: Rat,
    pub grid_size: usize,
    /// `v(0) = 1` in exact arithmetic.
    pub peak_is_one: bool,
    pub min_on_unit: f64,
    pub max_on_unit: f64,
    pub max_on_tail: f64,
    pub decay_bound: f64,
    /// Largest `2^-k ≤ 1/(64 r²)` with `v ≥ 1/2` on `[0, 2^-k]`.
    pub near_peak_radius: Option<Rat>,
    pub failures: Vec<String>,
}

impl NeedleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for NeedleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "r={} h={} v(0)=1:{} range=[{:.3e}, {:.6}] tail_max={:.3e} bound={:.3e} radius={}",
            self.r,
            self.h,
            self.peak_is_one,
            self.min_on_unit,
            self.max_on_unit,
            self.max_on_tail,
            self.decay_bound,
            self.near_peak_radius.as_ref().map(|r| r.to_string()).unwrap_or_else(|| "none".into())
        )?;
        for msg in &self.failures {
            write!(f, "; {msg}")?;
        }
        Ok(())
    }
}

const NEAR_PEAK_POINTS: usize = 101;
const NEAR_PEAK_HALVINGS: u32 = 24;

// Enough bits that Horner's rule on the monomial coefficients keeps ~128 bits.
fn evaluation_precision(v: &UPoly) -> u32 {
    let spread = v.coeffs().iter().map(|c| c.clone().abs()).fold(Rat::new(), |a, b| a + b);
    let bits = if spread > 1 { spread.numer().significant_bits() - spread.denom().significant_bits() + 1 } else { 0 };
    192 + bits + 2 * v.coeffs().len() as u32
}

/// Checks the three needle properties and the near-peak lower bound on uniform
/// grids of `grid_size` points.
pub fn verify_needle(v: &UPoly, params: &NeedleParams, grid_size: usize) -> NeedleReport {
    let grid_size = grid_size.max(2);
    let p = evaluation_precision(v);
    let slack: HFloat = Float::with_val(p, 1) >> 100;
    let eval = |t: &Rat| v.eval_float(&Float::with_val(p, t));
    let mut failures = Vec::new();

    let peak_is_one = v.eval(&Rat::new()) == 1;
    if !peak_is_one {
        failures.push("v(0) != 1".to_string());
    }

    let last = (grid_size - 1) as u64;
    let mut lo = Float::with_val(p, f64::INFINITY);
    let mut hi = Float::with_val(p, f64::NEG_INFINITY);
    for i in 0..grid_size {
        let y = eval(&Rat::from((i as u64, last)));
        lo.min_mut(&y);
        hi.max_mut(&y);
    }
    if lo < -slack.clone() || hi > Float::with_val(p, 1 + &slack) {
        failures.push(format!("v leaves [0, 1] on [0, 1]: [{:.3e}, {:.6}]", lo.to_f64(), hi.to_f64()));
    }

    let width = Rat::from(1 - &params.h);
    let mut tail = Float::with_val(p, f64::NEG_INFINITY);
    for i in 0..grid_size {
        let t = Rat::from(&params.h + Rat::from(&width * Rat::from((i as u64, last))));
        tail.max_mut(&eval(&t));
    }
    let bound = decay_bound(params);
    if tail.to_f64() > bound {
        failures.push(format!("tail maximum {:.3e} exceeds 4 exp(-r sqrt(h)/2) = {bound:.3e}", tail.to_f64()));
    }

    let r2 = (params.r * params.r) as u64;
    let mut k = 0u32;
    while (1u64 << k) < 64 * r2 {
        k += 1;
    }
    let half = Float::with_val(p, 0.5);
    let mut radius = None;
    for extra in 0..NEAR_PEAK_HALVINGS {
        let rho = Rat::from((rug::Integer::from(1), rug::Integer::from(1) << (k + extra)));
        let ok = (0..NEAR_PEAK_POINTS).all(|i| {
            let t = Rat::from(&rho * Rat::from((i as u64, (NEAR_PEAK_POINTS - 1) as u64)));
            eval(&t) >= half
        });
        if ok {
            radius = Some(rho);
            break;
        }
    }
    if radius.is_none() {
        failures.push("no near-peak radius found".to_string());
    }

    NeedleReport {
        r: params.r,
        h: params.h.clone(),
        grid_size,
        peak_is_one,
        min_on_unit: lo.to_f64(),
        max_on_unit: hi.to_f64(),
        max_on_tail: tail.to_f64(),
        decay_bound: bound,
        near_peak_radius: radius,
        failures,
    }
}

/// Settings for [`certificate_bound`].
#[derive(Clone, Debug)]
pub struct CertificateOptions {
    /// Known `(f_min, f_max)`; a grid search is used otherwise.
    pub extrema: Option<(Rat, Rat)>,
    /// Cap applied when the width formula gives `h ≥ 1`; `None` makes that an error.
    pub h_max: Option<Rat>,
    pub prec: Precision,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions { extrema: None, h_max: Some(Rat::from((1, 2))), prec: Precision::DEFAULT }
    }
}

impl CertificateOptions {
    /// Rejects every order for which `h ≥ 1`.
    pub fn strict() -> Self {
        CertificateOptions { h_max: None, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub r: usize,
    /// `(4(N+1) log r / r)²` before clamping.
    pub h_formula: f64,
    pub h_used: Rat,
    pub f_min: Rat,
    pub f_max: Rat,
    /// `E[F · v(F)]` under the uniform probability measure.
    pub numerator: HFloat,
    /// `E[v(F)]`.
    pub denominator: HFloat,
    pub ratio: HFloat,
    /// `f_min + (f_max − f_min) · ratio`.
    pub bound: HFloat,
    pub quadrature_order: usize,
    /// Change in `ratio` when the quadrature order is doubled.
    pub quadrature_error: HFloat,
    pub degenerate: bool,
}

impl CertificateReport {
    pub fn csv_row(&self) -> String {
        use crate::hierarchy::fmt_sig;
        let p = self.ratio.prec();
        format!(
            "{},{},{},{}",
            self.r,
            fmt_sig(&Float::with_val(p, &self.h_used), 12),
            fmt_sig(&self.ratio, 12),
            fmt_sig(&self.bound, 12)
        )
    }
}

/// `h = (4(N+1) log r / r)²` with `N` the number of variables.
pub fn paper_width(n: usize, r: usize) -> f64 {
    let r = r as f64;
    (4.0 * (n as f64 + 1.0) * r.ln() / r).powi(2)
}

fn grid_extrema(f: &MPoly) -> (Rat, Rat) {
    let n = f.nvars().max(1);
    let per_axis = if n <= 2 { 1001 } else { ((1e6f64).powf(1.0 / n as f64) as usize).max(3) };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let step = 2.0 / (per_axis - 1) as f64;
    let mut idx = vec![0usize; f.nvars()];
    let mut point = vec![0.0; f.nvars()];
    loop {
        for (x, &i) in point.iter_mut().zip(&idx) {
            *x = -1.0 + step * i as f64;
        }
        let y = f.eval_f64(&point);
        lo = lo.min(y);
        hi = hi.max(y);
        let mut k = 0;
        loop {
            if k == idx.len() {
                let q = |v: f64| Rat::from_f64(v).unwrap_or_default();
                return (q(lo), q(hi));
            }
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn width_for(n: usize, r: usize, h_max: Option<&Rat>) -> Result<(f64, Rat)> {
    let formula = paper_width(n, r);
    let floor = Rat::from((1u64, 64 * (r * r) as u64));
    let mut h = Rat::from_f64(formula).unwrap_or_default();
    if formula >= 1.0 {
        match h_max {
            Some(cap) => h = cap.clone(),
            None => {
                return Err(Error::InvalidOrder(format!("r = {r} gives h = {formula:.4} >= 1; a larger order is needed")))
            }
        }
    } else if let Some(cap) = h_max {
        if h > *cap {
            h = cap.clone();
        }
    }
    if h < floor {
        h = floor;
    }
    Ok((formula, h))
}

// (E[F v(F)], E[v(F)]) with a tensor rule of the given order.
fn needle_integrals(
    f: &MPoly,
    f_min: &Rat,
    span: &Rat,
    params: &NeedleParams,
    order: usize,
    prec: Precision,
) -> (HFloat, HFloat) {
    let p = prec.bits();
    let rule = GaussLegendre::new(order, prec);
    let lo = Float::with_val(p, f_min);
    let inv_span = Float::with_val(p, span.clone().recip());
    let mut num = Float::with_val(p, 0);
    let mut den = Float::with_val(p, 0);
    let n = f.nvars();
    rule.for_each_tensor(n, |x, w| {
        let mut big_f = f.eval_float(x, p);
        big_f -= &lo;
        big_f *= &inv_span;
        let vw = needle_value(params, &big_f) * w;
        num += Float::with_val(p, &big_f * &vw);
        den += vw;
    });
    let vol = Float::with_val(p, 1) << n as u32;
    (num / &vol, den / vol)
}

/// Upper bound on `f_pfm^(r)` from the needle density `v(F(x))` on the unit box.
pub fn certificate_bound(f: &MPoly, domain: &Domain, r: usize, opts: &CertificateOptions) -> Result<CertificateReport> {
    domain.check(f)?;
    if domain.kind != DomainKind::Box {
        return Err(Error::InvalidParameters("certificates are computed on the unit box only".into()));
    }
    if r == 0 {
        return Err(Error::InvalidOrder("certificate order must be at least 1".into()));
    }
    let prec = opts.prec;
    let p = prec.bits();
    let (f_min, f_max) = match &opts.extrema {
        Some((lo, hi)) => (lo.clone(), hi.clone()),
        None => grid_extrema(f),
    };
    let (h_formula, h_used) = width_for(domain.nvars, r, opts.h_max.as_ref())?;
    let span = Rat::from(&f_max - &f_min);
    if span <= 0 {
        let z = Float::with_val(p, 0);
        return Ok(CertificateReport {
            r,
            h_formula,
            h_used,
            f_min: f_min.clone(),
            f_max,
            numerator: z.clone(),
            denominator: Float::with_val(p, 1),
            ratio: z.clone(),
            bound: Float::with_val(p, &f_min),
            quadrature_order: 1,
            quadrature_error: z,
            degenerate: true,
        });
    }
    let params = NeedleParams::new(r, h_used.clone())?;
    let deg = f.degree().max(1) as usize;
    let order = (deg * (2 * r + 1) + 2) / 2;
    let (num, den) = needle_integrals(f, &f_min, &span, &params, order, prec);
    let (num2, den2) = needle_integrals(f, &f_min, &span, &params, 2 * order, prec);
    let ratio = Float::with_val(p, &num / &den);
    let ratio2 = num2 / den2;
    let quadrature_error = Float::with_val(p, &ratio2 - &ratio).abs();
    let mut bound = Float::with_val(p, &ratio * &span);
    bound += &f_min;
    Ok(CertificateReport {
        r,
        h_formula,
        h_used,
        f_min,
        f_max,
        numerator: num,
        denominator: den,
        ratio,
        bound,
        quadrature_order: order,
        quadrature_error,
        degenerate: false,
    })
}
