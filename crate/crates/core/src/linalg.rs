//! Dense symmetric eigenvalue machinery in MPFR floating point.
//!
//! Matrices are assembled exactly as [`SymMat<Rat>`] and rounded once, entry by
//! entry, into [`HFloat`]. The smallest generalized eigenvalue of `(A, B)` is
//! obtained from `L⁻¹ A L⁻ᵀ` where `B = L Lᵀ`.
//!
//! Small orders use cyclic Jacobi rotations. Above [`JACOBI_MAX_ORDER`] the
//! matrix is reduced to tridiagonal form by Householder reflections and the
//! smallest eigenvalue is isolated by Sturm bisection.

use std::cmp::Ordering;

use rug::ops::NegAssign;
use rug::{Assign, Float};

use crate::error::{Error, Result};
use crate::polyring::Rat;

/// Working floating-point type (MPFR, round-to-nearest).
pub type HFloat = Float;

pub const PRECISION_ENV: &str = "MEASBOUND_PRECISION";

/// Largest order solved by cyclic Jacobi rotations in [`sym_eig_min`].
pub const JACOBI_MAX_ORDER: usize = 64;

pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Mantissa width in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(256);
    pub const MIN: u32 = 64;

    pub fn new(bits: u32) -> Result<Self> {
        if bits < Self::MIN {
            return Err(Error::InvalidParameters(format!("precision {bits} < {} bits", Self::MIN)));
        }
        Ok(Precision(bits))
    }

    /// Reads `MEASBOUND_PRECISION`, falling back to 256 bits.
    pub fn from_env() -> Result<Self> {
        match std::env::var(PRECISION_ENV) {
            Ok(s) => {
                let bits = s
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidParameters(format!("{PRECISION_ENV}={s} is not an integer")))?;
                Precision::new(bits)
            }
            Err(_) => Ok(Precision::DEFAULT),
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn doubled(self) -> Precision {
        Precision(self.0 * 2)
    }

    pub fn zero(self) -> HFloat {
        Float::new(self.0)
    }

    pub fn float<T>(self, v: T) -> HFloat
    where
        Float: Assign<T>,
    {
        Float::with_val(self.0, v)
    }

    /// `2^(-bits)`.
    pub fn epsilon(self) -> HFloat {
        Float::with_val(self.0, 1) >> self.0
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

/// Symmetric matrix stored as a packed lower triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat<T> {
    order: usize,
    data: Vec<T>,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

impl<T> SymMat<T> {
    /// Builds the matrix from `f(i, j)` evaluated for `i >= j`.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(order * (order + 1) / 2);
        for i in 0..order {
            for j in 0..=i {
                data.push(f(i, j));
            }
        }
        SymMat { order, data }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[packed(i, j)]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[packed(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[packed(i, j)] = v;
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> SymMat<U> {
        SymMat { order: self.order, data: self.data.iter().map(&mut f).collect() }
    }

    /// Principal submatrix on `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> SymMat<T>
    where
        T: Clone,
    {
        SymMat::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]).clone())
    }
}

impl SymMat<Rat> {
    /// Entry-wise correctly rounded conversion.
    pub fn to_hfloat(&self, prec: Precision) -> SymMat<HFloat> {
        self.map(|r| prec.float(r))
    }

    pub fn is_zero_at(&self, i: usize, j: usize) -> bool {
        *self.get(i, j) == 0
    }
}

impl SymMat<HFloat> {
    pub fn identity(order: usize, prec: Precision) -> Self {
        SymMat::from_fn(order, |i, j| prec.float(if i == j { 1 } else { 0 }))
    }

    pub fn from_rows_f64(rows: &[&[f64]], prec: Precision) -> Self {
        SymMat::from_fn(rows.len(), |i, j| prec.float(rows[i][j]))
    }

    pub fn from_rat_rows(rows: &[Vec<Rat>], prec: Precision) -> Self {
        SymMat::from_fn(rows.len(), |i, j| prec.float(&rows[i][j]))
    }

    pub fn prec(&self) -> u32 {
        self.data.first().map(|x| x.prec()).unwrap_or(Precision::DEFAULT.bits())
    }

    pub fn matvec(&self, v: &[HFloat]) -> Vec<HFloat> {
        let n = self.order;
        let p = self.prec();
        let mut out = vec![Float::new(p); n];
        for i in 0..n {
            for (j, vj) in v.iter().enumerate() {
                out[i] += self.get(i, j) * vj;
            }
        }
        out
    }

    pub fn quad_form(&self, v: &[HFloat]) -> HFloat {
        dot(v, &self.matvec(v))
    }

    pub fn frobenius_norm(&self) -> HFloat {
        let mut s = Float::new(self.prec());
        for i in 0..self.order {
            for j in 0..=i {
                let x = self.get(i, j);
                if i == j {
                    s += x * x;
                } else {
                    s += Float::with_val(self.prec(), x * x) * 2u32;
                }
            }
        }
        s.sqrt()
    }

    pub fn to_dense(&self) -> Vec<Vec<HFloat>> {
        (0..self.order).map(|i| (0..self.order).map(|j| self.get(i, j).clone()).collect()).collect()
    }
}

pub fn dot(a: &[HFloat], b: &[HFloat]) -> HFloat {
    let p = a.first().map(|x| x.prec()).unwrap_or(Precision::DEFAULT.bits());
    let mut s = Float::new(p);
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

pub fn norm2(v: &[HFloat]) -> HFloat {
    dot(v, v).sqrt()
}

/// Lower-triangular Cholesky factor in packed storage.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: SymMat<HFloat>,
}

impl Cholesky {
    pub fn order(&self) -> usize {
        self.l.order()
    }

    /// `L[i][j]`, zero above the diagonal.
    pub fn entry(&self, i: usize, j: usize) -> HFloat {
        if j > i {
            Float::new(self.l.prec())
        } else {
            self.l.get(i, j).clone()
        }
    }

    pub fn pivots(&self) -> Vec<HFloat> {
        (0..self.order()).map(|i| self.l.get(i, i).clone()).collect()
    }

    /// Solves `L x = b` in place.
    pub fn solve_lower(&self, x: &mut [HFloat]) {
        let n = self.order();
        for i in 0..n {
            for k in 0..i {
                let (head, tail) = x.split_at_mut(i);
                tail[0] -= self.l.get(i, k) * &head[k];
            }
            x[i] /= self.l.get(i, i);
        }
    }

    /// Solves `Lᵀ x = b` in place.
    pub fn solve_upper(&self, x: &mut [HFloat]) {
        let n = self.order();
        for i in (0..n).rev() {
            for k in i + 1..n {
                let (head, tail) = x.split_at_mut(k);
                head[i] -= self.l.get(k, i) * &tail[0];
            }
            x[i] /= self.l.get(i, i);
        }
    }
}

/// `B = L Lᵀ`.
///
/// A pivot `d_j ≤ n·2^(1−prec)·B_jj` is reported as [`Error::NotPositiveDefinite`].
pub fn cholesky(b: &SymMat<HFloat>) -> Result<Cholesky> {
    let n = b.order();
    let prec = b.prec();
    let mut l = b.clone();
    let tol_factor = Float::with_val(prec, n.max(1)) * (Float::with_val(prec, 1) >> (prec - 1));
    for j in 0..n {
        let mut d = l.get(j, j).clone();
        for k in 0..j {
            let ljk = l.get(j, k);
            d -= ljk * ljk;
        }
        let tol = Float::with_val(prec, b.get(j, j).abs_ref()) * &tol_factor;
        if d <= tol || d.is_nan() {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d.to_string_radix(10, Some(12)) });
        }
        let d = d.sqrt();
        for i in j + 1..n {
            let mut s = l.get(i, j).clone();
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            s /= &d;
            l.set(i, j, s);
        }
        l.set(j, j, d);
    }
    Ok(Cholesky { l })
}

/// Pivots `d_k` of the exact `LDLᵀ` factorization; all positive iff the matrix
/// is positive definite (each `d_k` is a ratio of leading principal minors).
pub fn exact_pivots(m: &SymMat<Rat>) -> Vec<Rat> {
    let n = m.order();
    let mut a: Vec<Vec<Rat>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j).clone()).collect()).collect();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let p = a[k][k].clone();
        pivots.push(p.clone());
        if p == 0 {
            break;
        }
        for i in k + 1..n {
            if a[i][k] == 0 {
                continue;
            }
            let factor = Rat::from(&a[i][k] / &p);
            for j in k + 1..=i {
                let delta = Rat::from(&factor * &a[k][j]);
                a[i][j] -= delta;
            }
        }
        for i in k + 1..n {
            for j in k + 1..i {
                let v = a[i][j].clone();
                a[j][i] = v;
            }
        }
    }
    pivots
}

pub fn is_positive_definite_exact(m: &SymMat<Rat>) -> bool {
    let piv = exact_pivots(m);
    piv.len() == m.order() && piv.iter().all(|p| *p > 0)
}

/// Eigenpair returned by the solvers: `(λ_min, v)` with `‖v‖ = 1`
/// (or `vᵀBv = 1` for the generalized problem).
pub type EigenPair = (HFloat, Vec<HFloat>);

/// Smallest eigenvalue and a unit eigenvector of `S`.
pub fn sym_eig_min(s: &SymMat<HFloat>) -> Result<EigenPair> {
    if s.order() <= JACOBI_MAX_ORDER {
        sym_eig_min_jacobi(s, DEFAULT_MAX_SWEEPS)
    } else {
        sym_eig_min_tridiagonal(s)
    }
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// `2^(−prec/2)·‖S‖_F`, followed by one polishing sweep.
pub fn sym_eig_min_jacobi(s: &SymMat<HFloat>, max_sweeps: usize) -> Result<EigenPair> {
    let n = s.order();
    let prec = s.prec();
    if n == 0 {
        return Err(Error::InvalidParameters("empty matrix".into()));
    }
    let mut a = s.to_dense();
    let mut v: Vec<Vec<HFloat>> =
        (0..n).map(|i| (0..n).map(|j| Float::with_val(prec, if i == j { 1 } else { 0 })).collect()).collect();
    let norm = s.frobenius_norm();
    let tol = Float::with_val(prec, &norm >> (prec / 2));
    let eps = Float::with_val(prec, 1) >> prec;

    let mut polishing = false;
    let mut converged = n == 1;
    let mut sweeps = 0;
    let (mut g, mut h, mut theta, mut t, mut c, mut sn, mut tau, mut tmp) = (
        Float::new(prec),
        Float::new(prec),
        Float::new(prec),
        Float::new(prec),
        Float::new(prec),
        Float::new(prec),
        Float::new(prec),
        Float::new(prec),
    );
    while !converged {
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].is_zero() {
                    continue;
                }
                // negligible relative to the diagonal: drop it
                tmp.assign(a[p][p].abs_ref());
                tmp += Float::with_val(prec, a[q][q].abs_ref());
                tmp *= &eps;
                if a[p][q].cmp_abs(&tmp) != Some(Ordering::Greater) && !tmp.is_zero() {
                    a[p][q].assign(0);
                    a[q][p].assign(0);
                    continue;
                }
                // theta = (a_qq - a_pp) / (2 a_pq), t = sgn(theta) / (|theta| + sqrt(theta^2 + 1))
                theta.assign(&a[q][q] - &a[p][p]);
                theta /= &a[p][q];
                theta >>= 1;
                tmp.assign(theta.square_ref());
                tmp += 1u32;
                tmp.sqrt_mut();
                tmp += Float::with_val(prec, theta.abs_ref());
                t.assign(tmp.recip_ref());
                if theta.is_sign_negative() {
                    t.neg_assign();
                }
                c.assign(t.square_ref());
                c += 1u32;
                c.sqrt_mut();
                c.recip_mut();
                sn.assign(&t * &c);
                tau.assign(&c + 1u32);
                tau.recip_mut();
                tau *= &sn;

                h.assign(&t * &a[p][q]);
                a[p][p] -= &h;
                a[q][q] += &h;
                a[p][q].assign(0);
                a[q][p].assign(0);
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    g.assign(&a[r][p]);
                    h.assign(&a[r][q]);
                    // a_rp = g - s (h + g tau); a_rq = h + s (g - h tau)
                    tmp.assign(&g * &tau);
                    tmp += &h;
                    a[r][p] -= &sn * &tmp;
                    tmp.assign(&h * &tau);
                    tmp -= &g;
                    a[r][q] -= &sn * &tmp;
                    let (rp, rq) = (a[r][p].clone(), a[r][q].clone());
                    a[p][r] = rp;
                    a[q][r] = rq;
                }
                for row in v.iter_mut() {
                    g.assign(&row[p]);
                    h.assign(&row[q]);
                    tmp.assign(&g * &tau);
                    tmp += &h;
                    row[p] -= &sn * &tmp;
                    tmp.assign(&h * &tau);
                    tmp -= &g;
                    row[q] -= &sn * &tmp;
                }
            }
        }
        if polishing {
            converged = true;
            continue;
        }
        let mut off = Float::new(prec);
        for (p, row) in a.iter().enumerate() {
            for x in &row[p + 1..] {
                off += x * x;
            }
        }
        off <<= 1;
        off.sqrt_mut();
        if off <= tol {
            polishing = true;
            if off.is_zero() {
                converged = true;
            }
        }
    }

    let mut best = 0;
    for i in 1..n {
        if a[i][i] < a[best][best] {
            best = i;
        }
    }
    let mut vec: Vec<HFloat> = v.iter().map(|row| row[best].clone()).collect();
    normalize(&mut vec);
    Ok((a[best][best].clone(), vec))
}

fn normalize(v: &mut [HFloat]) {
    let nrm = norm2(v);
    if !nrm.is_zero() {
        for x in v.iter_mut() {
            *x /= &nrm;
        }
    }
}

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off[i]` couples rows `i` and `i+1`).
#[derive(Clone, Debug)]
pub struct Tridiagonal {
    pub diag: Vec<HFloat>,
    pub off: Vec<HFloat>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<HFloat>, off: Vec<HFloat>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal length must be order − 1");
        Tridiagonal { diag, off }
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    fn prec(&self) -> u32 {
        self.diag[0].prec()
    }

    /// Number of eigenvalues strictly less than `x`.
    pub fn sturm_count(&self, x: &HFloat) -> usize {
        let prec = self.prec();
        let tiny = Float::with_val(prec, 1) >> (2 * prec);
        let mut count = 0;
        let mut q = Float::with_val(prec, &self.diag[0] - x);
        let mut tmp = Float::new(prec);
        for i in 0..self.order() {
            if i > 0 {
                tmp.assign(self.off[i - 1].square_ref());
                tmp /= &q;
                q.assign(&self.diag[i] - x);
                q -= &tmp;
            }
            if q.is_zero() {
                q.assign(&tiny);
            }
            if q.is_sign_negative() {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (HFloat, HFloat) {
        let prec = self.prec();
        let n = self.order();
        let mut lo: Option<HFloat> = None;
        let mut hi: Option<HFloat> = None;
        for i in 0..n {
            let mut r = Float::new(prec);
            if i > 0 {
                r += Float::with_val(prec, self.off[i - 1].abs_ref());
            }
            if i + 1 < n {
                r += Float::with_val(prec, self.off[i].abs_ref());
            }
            let a = Float::with_val(prec, &self.diag[i] - &r);
            let b = Float::with_val(prec, &self.diag[i] + &r);
            if lo.as_ref().is_none_or(|l| a < *l) {
                lo = Some(a);
            }
            if hi.as_ref().is_none_or(|h| b > *h) {
                hi = Some(b);
            }
        }
        (lo.unwrap(), hi.unwrap())
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection to full precision.
    pub fn eigenvalue(&self, k: usize) -> HFloat {
        let prec = self.prec();
        let (mut lo, mut hi) = self.gershgorin();
        let scale = Float::with_val(prec, lo.abs_ref()).max(&Float::with_val(prec, hi.abs_ref()));
        let floor = Float::with_val(prec, &scale >> (prec + 2));
        let mut mid = Float::new(prec);
        let mut width = Float::new(prec);
        for _ in 0..(4 * prec + 64) {
            mid.assign(&lo + &hi);
            mid >>= 1;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(&mid) > k {
                hi.assign(&mid);
            } else {
                lo.assign(&mid);
            }
            width.assign(&hi - &lo);
            let rel = Float::with_val(prec, Float::with_val(prec, lo.abs_ref()).max(&Float::with_val(prec, hi.abs_ref())) >> prec);
            if width <= rel || width <= floor {
                break;
            }
        }
        mid.assign(&lo + &hi);
        mid >> 1
    }

    pub fn smallest_eigenvalue(&self) -> HFloat {
        self.eigenvalue(0)
    }

    /// All eigenvalues in increasing order.
    pub fn eigenvalues(&self) -> Vec<HFloat> {
        (0..self.order()).map(|k| self.eigenvalue(k)).collect()
    }

    /// Unit eigenvector for an (accurate) eigenvalue `lambda` by inverse
    /// iteration with a shift just below `lambda`.
    pub fn eigenvector(&self, lambda: &HFloat) -> Vec<HFloat> {
        let n = self.order();
        let prec = self.prec();
        if n == 1 {
            return vec![Float::with_val(prec, 1)];
        }
        let (glo, ghi) = self.gershgorin();
        let spread = Float::with_val(prec, &ghi - &glo).max(&Float::with_val(prec, 1));
        let shift = Float::with_val(prec, lambda - Float::with_val(prec, &spread >> (prec * 3 / 4)));
        let mut x: Vec<HFloat> = (0..n).map(|i| Float::with_val(prec, 1) / Float::with_val(prec, i + 1)).collect();
        normalize(&mut x);
        for _ in 0..3 {
            x = self.shifted_solve(&shift, &x);
            normalize(&mut x);
        }
        x
    }

    fn shifted_solve(&self, shift: &HFloat, rhs: &[HFloat]) -> Vec<HFloat> {
        let n = self.order();
        let prec = self.prec();
        let tiny = Float::with_val(prec, 1) >> (2 * prec);
        let mut d: Vec<HFloat> = Vec::with_capacity(n);
        let mut m: Vec<HFloat> = Vec::with_capacity(n);
        let mut y: Vec<HFloat> = Vec::with_capacity(n);
        for i in 0..n {
            let mut di = Float::with_val(prec, &self.diag[i] - shift);
            let mut yi = rhs[i].clone();
            if i > 0 {
                let mi = Float::with_val(prec, &self.off[i - 1] / &d[i - 1]);
                di -= &mi * &self.off[i - 1];
                yi -= &mi * &y[i - 1];
                m.push(mi);
            }
            if di.is_zero() {
                di.assign(&tiny);
            }
            d.push(di);
            y.push(yi);
        }
        let mut x = vec![Float::new(prec); n];
        for i in (0..n).rev() {
            let mut s = y[i].clone();
            if i + 1 < n {
                s -= &self.off[i] * &x[i + 1];
            }
            x[i] = s / &d[i];
        }
        x
    }
}

/// Householder reduction `S = Q T Qᵀ`, keeping the reflectors so that
/// eigenvectors of `T` can be mapped back in `O(n²)`.
pub struct Householder {
    pub tri: Tridiagonal,
    reflectors: Vec<(Vec<HFloat>, HFloat)>,
}

impl Householder {
    pub fn reduce(s: &SymMat<HFloat>) -> Householder {
        let n = s.order();
        let prec = s.prec();
        let mut a = s.clone();
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n.saturating_sub(1));
        let mut reflectors = Vec::new();
        let mut p = vec![Float::new(prec); n];
        let mut tmp = Float::new(prec);
        for k in 0..n.saturating_sub(1) {
            diag.push(a.get(k, k).clone());
            let m = n - k - 1;
            let mut v: Vec<HFloat> = (0..m).map(|i| a.get(k + 1 + i, k).clone()).collect();
            let sigma = norm2(&v);
            if sigma.is_zero() {
                off.push(Float::new(prec));
                reflectors.push((v, Float::new(prec)));
                continue;
            }
            let alpha = if v[0].is_sign_negative() { sigma.clone() } else { -sigma.clone() };
            v[0] -= &alpha;
            let vtv = dot(&v, &v);
            let beta = Float::with_val(prec, 2u32) / &vtv;
            // p = beta * A22 v
            for i in 0..m {
                p[i].assign(0);
            }
            for i in 0..m {
                for j in 0..=i {
                    let aij = a.get(k + 1 + i, k + 1 + j);
                    p[i] += aij * &v[j];
                    if i != j {
                        p[j] += aij * &v[i];
                    }
                }
            }
            for pi in p.iter_mut().take(m) {
                *pi *= &beta;
            }
            // w = p - (beta/2)(v·p) v
            tmp.assign(0);
            for i in 0..m {
                tmp += &v[i] * &p[i];
            }
            tmp *= &beta;
            tmp >>= 1;
            for i in 0..m {
                p[i] -= &tmp * &v[i];
            }
            for i in 0..m {
                for j in 0..=i {
                    let e = a.get_mut(k + 1 + i, k + 1 + j);
                    *e -= &v[i] * &p[j];
                    *e -= &p[i] * &v[j];
                }
            }
            off.push(alpha);
            reflectors.push((v, beta));
        }
        if n > 0 {
            diag.push(a.get(n - 1, n - 1).clone());
        }
        Householder { tri: Tridiagonal { diag, off }, reflectors }
    }

    /// Maps an eigenvector of the tridiagonal matrix back to the original basis.
    pub fn back_transform(&self, y: &[HFloat]) -> Vec<HFloat> {
        let mut x = y.to_vec();
        let prec = x[0].prec();
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if beta.is_zero() {
                continue;
            }
            let mut s = Float::new(prec);
            for (i, vi) in v.iter().enumerate() {
                s += vi * &x[k + 1 + i];
            }
            s *= beta;
            for (i, vi) in v.iter().enumerate() {
                x[k + 1 + i] -= &s * vi;
            }
        }
        x
    }
}

/// Householder tridiagonalization, Sturm bisection and inverse iteration.
pub fn sym_eig_min_tridiagonal(s: &SymMat<HFloat>) -> Result<EigenPair> {
    if s.order() == 0 {
        return Err(Error::InvalidParameters("empty matrix".into()));
    }
    let h = Householder::reduce(s);
    let lambda = h.tri.smallest_eigenvalue();
    let y = h.tri.eigenvector(&lambda);
    let mut x = h.back_transform(&y);
    normalize(&mut x);
    Ok((lambda, x))
}

/// `L⁻¹ A L⁻ᵀ` for the Cholesky factor `L` of `B`.
pub fn congruence(a: &SymMat<HFloat>, l: &Cholesky) -> SymMat<HFloat> {
    let n = a.order();
    let prec = a.prec();
    // column j of X = L⁻¹ A
    let mut xcols: Vec<Vec<HFloat>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut col: Vec<HFloat> = (0..n).map(|i| a.get(i, j).clone()).collect();
        l.solve_lower(&mut col);
        xcols.push(col);
    }
    let mut c = SymMat::from_fn(n, |_, _| Float::new(prec));
    let mut s = Float::new(prec);
    for j in 0..n {
        // C[i][j] for i >= j, using C[k][j] = C[j][k] for k < j
        for i in j..n {
            s.assign(&xcols[i][j]);
            for k in 0..i {
                let ckj = c.get(k, j);
                s -= l.l.get(i, k) * ckj;
            }
            s /= l.l.get(i, i);
            c.set(i, j, s.clone());
        }
    }
    c
}

/// Smallest `λ` with `A v = λ B v`; `v` is normalized to `vᵀ B v = 1`.
pub fn gen_eig_min(a: &SymMat<HFloat>, b: &SymMat<HFloat>) -> Result<EigenPair> {
    if a.order() != b.order() {
        return Err(Error::DimensionMismatch { expected: b.order(), got: a.order() });
    }
    let l = cholesky(b)?;
    let c = congruence(a, &l);
    let (lambda, mut y) = sym_eig_min(&c)?;
    l.solve_upper(&mut y);
    Ok((lambda, y))
}

/// Connected components of the joint sparsity pattern of `(A, B)`.
pub fn blocks(a: &SymMat<Rat>, b: &SymMat<Rat>) -> Vec<Vec<usize>> {
    let n = a.order();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in 0..i {
            if !a.is_zero_at(i, j) || !b.is_zero_at(i, j) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut label = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[label[r]].push(i);
    }
    groups
}

/// [`gen_eig_min`] applied block by block on exact matrices, embedding the
/// minimizing block eigenvector back into the full index set.
pub fn gen_eig_min_exact(a: &SymMat<Rat>, b: &SymMat<Rat>, prec: Precision) -> Result<EigenPair> {
    if a.order() != b.order() {
        return Err(Error::DimensionMismatch { expected: b.order(), got: a.order() });
    }
    let n = a.order();
    let mut best: Option<(HFloat, Vec<usize>, Vec<HFloat>)> = None;
    for idx in blocks(a, b) {
        let ab = a.submatrix(&idx).to_hfloat(prec);
        let bb = b.submatrix(&idx).to_hfloat(prec);
        let (lam, v) = gen_eig_min(&ab, &bb)?;
        let better = match &best {
            None => true,
            Some((cur, _, _)) => lam.partial_cmp(cur) == Some(Ordering::Less),
        };
        if better {
            best = Some((lam, idx, v));
        }
    }
    let (lam, idx, v) = best.ok_or_else(|| Error::InvalidParameters("empty matrix".into()))?;
    let mut full = vec![prec.zero(); n];
    for (k, i) in idx.into_iter().enumerate() {
        full[i] = v[k].clone();
    }
    Ok((lam, full))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: Precision = Precision::DEFAULT;

    fn f(x: f64) -> HFloat {
        P.float(x)
    }

    fn rat(n: i64, d: i64) -> Rat {
        Rat::from((n, d))
    }

    fn residual(s: &SymMat<HFloat>, lam: &HFloat, v: &[HFloat]) -> HFloat {
        let sv = s.matvec(v);
        let r: Vec<HFloat> = sv.iter().zip(v).map(|(a, b)| Float::with_val(a.prec(), a - Float::with_val(a.prec(), lam * b))).collect();
        norm2(&r)
    }

    fn hilbert(n: usize) -> SymMat<Rat> {
        SymMat::from_fn(n, |i, j| rat(1, (i + j + 1) as i64))
    }

    /// Characteristic polynomial coefficients (Faddeev–LeVerrier), highest first.
    fn charpoly(m: &SymMat<Rat>) -> Vec<Rat> {
        let n = m.order();
        let a: Vec<Vec<Rat>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j).clone()).collect()).collect();
        let mut coeffs = vec![rat(1, 1)];
        let mut mk: Vec<Vec<Rat>> = vec![vec![rat(0, 1); n]; n];
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{k-1} I
            let c_prev = coeffs[k - 1].clone();
            let mut next = vec![vec![rat(0, 1); n]; n];
            for i in 0..n {
                for j in 0..n {
                    let mut s = rat(0, 1);
                    for l in 0..n {
                        s += Rat::from(&a[i][l] * &mk[l][j]);
                    }
                    if i == j {
                        s += &c_prev;
                    }
                    next[i][j] = s;
                }
            }
            mk = next;
            let mut tr = rat(0, 1);
            for i in 0..n {
                for l in 0..n {
                    tr += Rat::from(&a[i][l] * &mk[l][i]);
                }
            }
            coeffs.push(-tr / Rat::from(k as i64));
        }
        coeffs
    }

    fn horner(c: &[Rat], x: &Rat) -> Rat {
        let mut acc = rat(0, 1);
        for ci in c {
            acc = acc * x + ci;
        }
        acc
    }

    #[test]
    fn cholesky_examples() {
        let l = cholesky(&SymMat::identity(4, P)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(l.entry(i, j), f(if i == j { 1.0 } else { 0.0 }));
            }
        }
        let b = SymMat::from_rows_f64(&[&[4.0, 2.0], &[2.0, 2.0]], P);
        let l = cholesky(&b).unwrap();
        assert_eq!(l.entry(0, 0), f(2.0));
        assert_eq!(l.entry(1, 0), f(1.0));
        assert_eq!(l.entry(1, 1), f(1.0));
        assert_eq!(l.entry(0, 1), f(0.0));

        let singular = SymMat::from_rows_f64(&[&[1.0, 1.0], &[1.0, 1.0]], P);
        assert!(matches!(cholesky(&singular), Err(Error::NotPositiveDefinite { index: 1, .. })));
    }

    #[test]
    fn hankel_of_x_squared_is_positive_definite() {
        // moments of t = x^2 under uniform [-1,1]: E[t^k] = 1/(2k+1)
        let r = 5;
        let h = SymMat::from_fn(r + 1, |i, j| rat(1, 2 * (i + j) as i64 + 1));
        let piv = exact_pivots(&h);
        assert!(piv.iter().all(|p| *p > 0));
        let l = cholesky(&h.to_hfloat(P)).unwrap();
        // float pivots squared match exact pivots
        for (fp, ep) in l.pivots().iter().zip(&piv) {
            let sq = Float::with_val(256, fp.square_ref());
            let rel = Float::with_val(256, &sq - ep.to_f64()).abs() / ep.to_f64();
            assert!(rel < 1e-14);
        }
    }

    #[test]
    fn exact_pivots_detect_indefinite() {
        let m = SymMat::from_fn(2, |i, j| if i == j { rat(1, 1) } else { rat(2, 1) });
        assert!(!is_positive_definite_exact(&m));
        assert!(is_positive_definite_exact(&hilbert(6)));
    }

    #[test]
    fn sym_eig_examples() {
        let d = SymMat::from_fn(3, |i, j| if i == j { f([3.0, 1.0, 2.0][i]) } else { f(0.0) });
        for solver in [sym_eig_min_jacobi as fn(&SymMat<HFloat>, usize) -> Result<EigenPair>, |s, _| sym_eig_min_tridiagonal(s)] {
            let (lam, v) = solver(&d, 100).unwrap();
            assert_eq!(lam, f(1.0));
            assert!(Float::with_val(256, v[1].abs_ref()) > f(0.999_999));
            let (lam, _) = solver(&SymMat::from_rows_f64(&[&[0.0, 1.0], &[1.0, 0.0]], P), 100).unwrap();
            assert!(Float::with_val(256, &lam + 1u32).abs() < f(1e-70));
        }
    }

    #[test]
    fn hilbert5_against_characteristic_polynomial() {
        let h = hilbert(5);
        let cp = charpoly(&h);
        // the smallest eigenvalue is near 3.288e-6, the next near 3.059e-4
        let mut lo = rat(1, 1_000_000);
        let mut hi = rat(1, 100_000);
        let slo = horner(&cp, &lo) > 0;
        assert_ne!(slo, horner(&cp, &hi) > 0);
        for _ in 0..120 {
            let mid = Rat::from(&lo + &hi) / 2;
            if (horner(&cp, &mid) > 0) == slo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = Float::with_val(256, &lo);
        let hf = h.to_hfloat(P);
        for (lam, v) in [sym_eig_min_jacobi(&hf, 100).unwrap(), sym_eig_min_tridiagonal(&hf).unwrap()] {
            let err = Float::with_val(256, &lam - &oracle).abs();
            assert!(err < 1e-20 * 3.3e-6, "err {err}");
            let bound = Float::with_val(256, hf.frobenius_norm() * 5u32) >> 128;
            assert!(residual(&hf, &lam, &v) <= bound);
        }
    }

    #[test]
    fn gen_eig_examples() {
        let a = SymMat::from_rows_f64(&[&[2.0, 0.0], &[0.0, 6.0]], P);
        let b = SymMat::from_rows_f64(&[&[1.0, 0.0], &[0.0, 2.0]], P);
        let (lam, v) = gen_eig_min(&a, &b).unwrap();
        assert!(Float::with_val(256, &lam - 2u32).abs() < f(1e-70));
        assert!(Float::with_val(256, b.quad_form(&v) - 1u32).abs() < f(1e-70));

        let a = SymMat::from_rows_f64(&[&[5.0, 1.0, 0.5], &[1.0, 3.0, 0.25], &[0.5, 0.25, 4.0]], P);
        let (l1, _) = gen_eig_min(&a, &SymMat::identity(3, P)).unwrap();
        let (l2, _) = sym_eig_min(&a).unwrap();
        assert!(Float::with_val(256, &l1 - &l2).abs() < f(1e-70));

        // f(x) = x on [-1,1], r = 1: A = [[0,1/3],[1/3,0]], B = [[1,0],[0,1/3]]
        let a = SymMat::from_rat_rows(&[vec![rat(0, 1), rat(1, 3)], vec![rat(1, 3), rat(0, 1)]], P);
        let b = SymMat::from_rat_rows(&[vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 3)]], P);
        let (lam, _) = gen_eig_min(&a, &b).unwrap();
        let expect = -(Float::with_val(256, 3).sqrt().recip());
        assert!(Float::with_val(256, &lam - &expect).abs() < f(1e-70));
        assert!((lam.to_f64() + 0.5773502692).abs() < 1e-10);
    }

    #[test]
    fn jacobi_and_tridiagonal_agree_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 2, 7, 30] {
            let s = SymMat::from_fn(n, |_, _| f(rng.random_range(-1.0..1.0)));
            let (l1, v1) = sym_eig_min_jacobi(&s, 100).unwrap();
            let (l2, v2) = sym_eig_min_tridiagonal(&s).unwrap();
            assert!(Float::with_val(256, &l1 - &l2).abs() < f(1e-60), "n = {n}");
            let bound = Float::with_val(256, s.frobenius_norm() * n as u32) >> 128;
            assert!(residual(&s, &l1, &v1) <= bound);
            assert!(residual(&s, &l2, &v2) <= bound);
        }
    }

    #[test]
    fn blocked_solve_matches_dense() {
        // two decoupled 2x2 blocks interleaved
        let a = SymMat::from_fn(4, |i, j| match (i, j) {
            (0, 0) => rat(3, 1),
            (2, 0) => rat(1, 1),
            (2, 2) => rat(2, 1),
            (1, 1) => rat(-1, 1),
            (3, 1) => rat(1, 2),
            (3, 3) => rat(1, 1),
            _ => rat(0, 1),
        });
        let b = SymMat::from_fn(4, |i, j| if i == j { rat(i as i64 + 1, 1) } else { rat(0, 1) });
        assert_eq!(blocks(&a, &b), vec![vec![0, 2], vec![1, 3]]);
        let (l1, v) = gen_eig_min_exact(&a, &b, P).unwrap();
        let (l2, _) = gen_eig_min(&a.to_hfloat(P), &b.to_hfloat(P)).unwrap();
        assert!(Float::with_val(256, &l1 - &l2).abs() < f(1e-70));
        assert!(v[0].is_zero() && v[2].is_zero());
    }

    #[test]
    fn congruence_scaling_invariance() {
        let a = SymMat::from_fn(4, |i, j| rat((i * 3 + j) as i64 - 4, (i + j + 1) as i64));
        let b = hilbert(4);
        let c = rat(7, 3);
        let (l1, _) = gen_eig_min_exact(&a, &b, P).unwrap();
        let (l2, _) = gen_eig_min_exact(&a.map(|x| Rat::from(x * &c)), &b.map(|x| Rat::from(x * &c)), P).unwrap();
        assert!(Float::with_val(256, &l1 - &l2).abs() < f(1e-60));
    }

    #[test]
    fn precision_configuration() {
        assert!(Precision::new(32).is_err());
        assert_eq!(Precision::new(512).unwrap().bits(), 512);
        assert_eq!(Precision::default().bits(), 256);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn rayleigh_quotient_bound(seed in any::<u64>(), n in 2usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = SymMat::from_fn(n, |_, _| f(rng.random_range(-2.0..2.0)));
            // B = G Gᵀ + I
            let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let b = SymMat::from_fn(n, |i, j| {
                let s: f64 = (0..n).map(|k| g[i][k] * g[j][k]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
                f(s)
            });
            let (lam, v) = gen_eig_min(&a, &b).unwrap();
            let rq = a.quad_form(&v) / b.quad_form(&v);
            let slack = Float::with_val(256, lam.abs_ref()).max(&f(1.0)) >> 200;
            prop_assert!(Float::with_val(256, &rq - &lam).abs() <= slack);
            for _ in 0..100 {
                let w: Vec<HFloat> = (0..n).map(|_| f(rng.random_range(-1.0..1.0))).collect();
                let q = a.quad_form(&w) / b.quad_form(&w);
                prop_assert!(q >= Float::with_val(256, &lam - f(1e-60)));
            }
        }
    }
}
