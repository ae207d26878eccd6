//! Three-term recurrences of orthonormal polynomial families.
//!
//! A [`Recurrence3`] stores the monic coefficients `α_k`, `β_k` of
//!
//! ```text
//! π_{k+1}(t) = (t − α_k) π_k(t) − β_k π_{k−1}(t)
//! ```
//!
//! together with `sqrt(β_k)`, the off-diagonal of the symmetric Jacobi matrix.
//! `β_0` is the total mass of the measure. The roots of the degree-`m`
//! orthogonal polynomial are the eigenvalues of the leading `m × m` Jacobi
//! matrix.

use std::fmt::Write as _;

use rug::float::Constant;
use rug::{Assign, Float};

use crate::error::{Error, Result};
use crate::linalg::{HFloat, Precision, Tridiagonal};
use crate::polyring::Rat;

#[derive(Clone, Debug)]
pub struct Recurrence3 {
    alpha: Vec<HFloat>,
    beta: Vec<HFloat>,
    monic_beta: Vec<HFloat>,
}

impl Recurrence3 {
    /// From monic coefficients; every `β_k` must be positive.
    pub fn from_monic(alpha: Vec<HFloat>, monic_beta: Vec<HFloat>) -> Result<Self> {
        if alpha.len() != monic_beta.len() {
            return Err(Error::InvalidParameters("alpha and beta lengths differ".into()));
        }
        if let Some(step) = monic_beta.iter().position(|b| *b <= 0) {
            return Err(Error::BreakdownNonPositiveBeta { step });
        }
        let beta = monic_beta.iter().map(|b| b.clone().sqrt()).collect();
        Ok(Recurrence3 { alpha, beta, monic_beta })
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alpha(&self) -> &[HFloat] {
        &self.alpha
    }

    /// `sqrt(β_k)`: `beta[0]` is the square root of the mass, `beta[k]` for
    /// `k ≥ 1` the Jacobi-matrix off-diagonal.
    pub fn beta(&self) -> &[HFloat] {
        &self.beta
    }

    pub fn monic_beta(&self) -> &[HFloat] {
        &self.monic_beta
    }

    pub fn prec(&self) -> u32 {
        self.alpha[0].prec()
    }

    /// The `m × m` Jacobi matrix.
    pub fn jacobi_matrix(&self, m: usize) -> Tridiagonal {
        assert!(m >= 1 && m <= self.len(), "degree {m} exceeds recurrence length {}", self.len());
        Tridiagonal::new(self.alpha[..m].to_vec(), self.beta[1..m].to_vec())
    }

    /// Recurrence of the image measure under `t ↦ c·t + d`, `c > 0`.
    pub fn affine(&self, c: &HFloat, d: &HFloat) -> Recurrence3 {
        let p = self.prec();
        let c2 = Float::with_val(p, c.square_ref());
        let alpha = self.alpha.iter().map(|a| Float::with_val(p, a * c) + d).collect();
        let monic_beta: Vec<HFloat> = self
            .monic_beta
            .iter()
            .enumerate()
            .map(|(k, b)| if k == 0 { b.clone() } else { Float::with_val(p, b * &c2) })
            .collect();
        Recurrence3::from_monic(alpha, monic_beta).expect("affine image keeps beta positive")
    }

    /// Maps a recurrence on `[-1, 1]` onto `[lo, hi]`.
    pub fn mapped_to(&self, lo: &Rat, hi: &Rat) -> Recurrence3 {
        let p = self.prec();
        let c = Float::with_val(p, Rat::from(hi - lo) / 2u32);
        let d = Float::with_val(p, Rat::from(hi + lo) / 2u32);
        self.affine(&c, &d)
    }

    /// Scales the measure by `c > 0`; only `β_0` changes.
    pub fn rescaled_mass(&self, c: &HFloat) -> Recurrence3 {
        let mut mb = self.monic_beta.clone();
        mb[0] *= c;
        Recurrence3::from_monic(self.alpha.clone(), mb).expect("positive scale")
    }

    /// CSV with header `j,alpha,beta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,alpha,beta\n");
        for j in 0..self.len() {
            let _ = writeln!(out, "{j},{},{}", sci(&self.alpha[j]), sci(&self.beta[j]));
        }
        out
    }

    /// Coefficients (power basis, lowest first) of the orthonormal `p_0..p_m`.
    pub fn orthonormal_coeffs(&self, m: usize) -> Vec<Vec<HFloat>> {
        let p = self.prec();
        let mut rows: Vec<Vec<HFloat>> = Vec::with_capacity(m + 1);
        rows.push(vec![Float::with_val(p, self.beta[0].recip_ref())]);
        for k in 0..m {
            // sqrt(β_{k+1}) p_{k+1} = (t − α_k) p_k − sqrt(β_k) p_{k−1}
            let mut next = vec![Float::new(p); k + 2];
            for (i, c) in rows[k].iter().enumerate() {
                next[i + 1] += c;
                next[i] -= Float::with_val(p, c * &self.alpha[k]);
            }
            if k >= 1 {
                for (i, c) in rows[k - 1].iter().enumerate() {
                    next[i] -= Float::with_val(p, c * &self.beta[k]);
                }
            }
            for c in next.iter_mut() {
                *c /= &self.beta[k + 1];
            }
            rows.push(next);
        }
        rows
    }
}

pub(crate) fn sci(x: &HFloat) -> String {
    let v = x.to_f64();
    if v == 0.0 {
        "0".into()
    } else {
        format!("{:.11e}", v)
    }
}

/// Jacobi weight parameters for `(1 − x)^a (1 + x)^b` on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiParams {
    pub a: Rat,
    pub b: Rat,
}

impl JacobiParams {
    pub fn new(a: Rat, b: Rat) -> Result<Self> {
        if a <= -1 || b <= -1 {
            return Err(Error::InvalidParameters(format!("Jacobi parameters must exceed -1, got a = {a}, b = {b}")));
        }
        Ok(JacobiParams { a, b })
    }

    pub fn legendre() -> Self {
        JacobiParams { a: Rat::new(), b: Rat::new() }
    }

    pub fn chebyshev() -> Self {
        JacobiParams { a: Rat::from((-1, 2)), b: Rat::from((-1, 2)) }
    }
}

/// Closed-form recurrence of the Jacobi family, `α_0..α_{n−1}`, `β_0..β_{n−1}`.
pub fn jacobi_recurrence(params: &JacobiParams, n: usize, prec: Precision) -> Result<Recurrence3> {
    let JacobiParams { a, b } = JacobiParams::new(params.a.clone(), params.b.clone())?;
    if n == 0 {
        return Err(Error::InvalidParameters("recurrence length must be positive".into()));
    }
    let p = prec.bits();
    let s = Rat::from(&a + &b);
    let diff2 = Rat::from(b.square_ref()) - Rat::from(a.square_ref());
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    for k in 0..n {
        let kk = Rat::from(k as u64);
        let ak = if k == 0 {
            Rat::from(&b - &a) / (Rat::from(&s + 2u32))
        } else {
            let d = Rat::from(&kk * 2u32) + &s;
            diff2.clone() / (Rat::from(&d * (Rat::from(&d + 2u32))))
        };
        alpha.push(Float::with_val(p, &ak));
        let bk = match k {
            0 => {
                // 2^{a+b+1} Γ(a+1) Γ(b+1) / Γ(a+b+2)
                let af = Float::with_val(p, &a);
                let bf = Float::with_val(p, &b);
                let sf = Float::with_val(p, &s);
                let two_pow = Float::with_val(p, Float::with_val(p, &sf + 1u32).exp2_ref());
                let g1 = Float::with_val(p, &af + 1u32).gamma();
                let g2 = Float::with_val(p, &bf + 1u32).gamma();
                let g3 = Float::with_val(p, &sf + 2u32).gamma();
                beta.push(two_pow * g1 * g2 / g3);
                continue;
            }
            1 => {
                let s2 = Rat::from(&s + 2u32);
                Rat::from(4u32) * Rat::from(&a + 1u32) * Rat::from(&b + 1u32)
                    / (Rat::from(s2.square_ref()) * Rat::from(&s + 3u32))
            }
            _ => {
                let d = Rat::from(&kk * 2u32) + &s;
                let num = Rat::from(4u32) * &kk * Rat::from(&kk + &a) * Rat::from(&kk + &b) * Rat::from(&kk + &s);
                let den = Rat::from(d.square_ref()) * Rat::from(&d + 1u32) * Rat::from(&d - 1u32);
                num / den
            }
        };
        beta.push(Float::with_val(p, &bk));
    }
    Recurrence3::from_monic(alpha, beta)
}

/// Smallest root of the degree-`degree` orthogonal polynomial.
pub fn smallest_root(rec: &Recurrence3, degree: usize) -> HFloat {
    rec.jacobi_matrix(degree).smallest_eigenvalue()
}

/// All roots of the degree-`degree` orthogonal polynomial, increasing.
pub fn roots(rec: &Recurrence3, degree: usize) -> Vec<HFloat> {
    rec.jacobi_matrix(degree).eigenvalues()
}

/// Gautschi's modified Chebyshev algorithm.
///
/// `mod_moments[l] = ∫ π_l dμ` where `π_l` are the monic polynomials of `aux`;
/// `2n` moments yield `n` recurrence coefficients.
pub fn modified_chebyshev(mod_moments: &[Rat], aux: &Recurrence3, n: usize) -> Result<Recurrence3> {
    if n == 0 || mod_moments.len() < 2 * n {
        return Err(Error::InvalidParameters(format!("{} modified moments given, {} needed", mod_moments.len(), 2 * n)));
    }
    if aux.len() + 1 < 2 * n {
        return Err(Error::InvalidParameters(format!("auxiliary recurrence of length {} too short", aux.len())));
    }
    let p = aux.prec();
    let m = 2 * n;
    let aux_a = |l: usize| &aux.alpha()[l];
    let aux_b = |l: usize| &aux.monic_beta()[l];

    let mut prev2 = vec![Float::new(p); m];
    let mut prev: Vec<HFloat> = mod_moments[..m].iter().map(|v| Float::with_val(p, v)).collect();
    if prev[0] <= 0 {
        return Err(Error::BreakdownNonPositiveBeta { step: 0 });
    }
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    alpha.push(Float::with_val(p, &prev[1] / &prev[0]) + aux_a(0));
    beta.push(prev[0].clone());

    let mut cur = vec![Float::new(p); m];
    let mut tmp = Float::new(p);
    for k in 1..n {
        for l in k..(m - k) {
            // σ_{k,l} = σ_{k−1,l+1} − (α_{k−1} − a_l)σ_{k−1,l} − β_{k−1}σ_{k−2,l} + b_l σ_{k−1,l−1}
            cur[l].assign(&prev[l + 1]);
            tmp.assign(&alpha[k - 1] - aux_a(l));
            cur[l] -= &tmp * &prev[l];
            cur[l] -= &beta[k - 1] * &prev2[l];
            cur[l] += aux_b(l) * &prev[l - 1];
        }
        // β_k is compared against the squared length scale of the previous step
        let mut scale = Float::with_val(p, alpha[k - 1].square_ref());
        if k >= 2 {
            scale += &beta[k - 1];
        }
        if scale < 1 {
            scale.assign(1);
        }
        scale *= &prev[k - 1];
        scale >>= p - p / 8;
        if cur[k] <= scale || cur[k].is_nan() {
            return Err(Error::BreakdownNonPositiveBeta { step: k });
        }
        let mut ak = Float::with_val(p, &cur[k + 1] / &cur[k]);
        ak -= Float::with_val(p, &prev[k] / &prev[k - 1]);
        ak += aux_a(k);
        alpha.push(ak);
        beta.push(Float::with_val(p, &cur[k] / &prev[k - 1]));
        std::mem::swap(&mut prev2, &mut prev);
        std::mem::swap(&mut prev, &mut cur);
    }
    Recurrence3::from_monic(alpha, beta)
}

/// Monic Chebyshev recurrence (`α = 0`, `β_1 = 1/2`, `β_k = 1/4`) used as the
/// auxiliary family; `β_0 = π`.
pub fn chebyshev_aux(len: usize, prec: Precision) -> Recurrence3 {
    let p = prec.bits();
    let alpha = vec![Float::new(p); len];
    let beta = (0..len)
        .map(|k| match k {
            0 => Float::with_val(p, Constant::Pi),
            1 => Float::with_val(p, 0.5),
            _ => Float::with_val(p, 0.25),
        })
        .collect();
    Recurrence3::from_monic(alpha, beta).expect("positive")
}

/// `E[T_j]` to moments of the monic Chebyshev polynomials `T_j / 2^{j−1}`.
pub fn monic_chebyshev_moments(t_moments: &[Rat]) -> Vec<Rat> {
    t_moments
        .iter()
        .enumerate()
        .map(|(j, v)| if j <= 1 { v.clone() } else { Rat::from(v >> (j as u32 - 1)) })
        .collect()
}

/// `(1 + ξ)/2` with `ξ` the smallest root of the degree-`r+1` Jacobi
/// polynomial for `a = 0`, `b = −1 + 1/(2k)`.
pub fn theorem3_reference(k: u32, r: usize, prec: Precision) -> Result<HFloat> {
    if k == 0 {
        return Err(Error::InvalidParameters("k must be positive".into()));
    }
    let params = JacobiParams::new(Rat::new(), Rat::from((1, 2 * k as i64)) - 1u32)?;
    let rec = jacobi_recurrence(&params, r + 1, prec)?;
    let xi = smallest_root(&rec, r + 1);
    Ok((xi + 1u32) >> 1)
}

/// `max |∫ p_i p_j dμ − δ_ij|` over `i, j ≤ m`, with `μ` given by its exact
/// power moments (at least `2m+1` of them).
pub fn orthonormality_defect(rec: &Recurrence3, moments: &[Rat], m: usize) -> HFloat {
    let p = rec.prec();
    assert!(moments.len() > 2 * m, "need {} moments", 2 * m + 1);
    let mf: Vec<HFloat> = moments.iter().map(|v| Float::with_val(p, v)).collect();
    let coeffs = rec.orthonormal_coeffs(m);
    let mut worst = Float::new(p);
    for i in 0..=m {
        for j in 0..=i {
            let mut g = Float::new(p);
            for (a, ca) in coeffs[i].iter().enumerate() {
                let mut inner = Float::new(p);
                for (b, cb) in coeffs[j].iter().enumerate() {
                    inner += cb * &mf[a + b];
                }
                g += ca * &inner;
            }
            if i == j {
                g -= 1u32;
            }
            g.abs_mut();
            if g > worst {
                worst = g;
            }
        }
    }
    worst
}
