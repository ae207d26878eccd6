//! Test functions, random MAXCUT instances and the experiment tables.
//!
//! MAXCUT is a maximization problem. Bounds are computed for `−f` and negated,
//! so every reported MAXCUT bound is a lower bound on `OPT`.

use std::fmt::Write as _;

use rand::RngCore;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::hierarchy::{fmt_sig, upper_bound_pfm_from_moments, upper_bounds_full, Method};
use crate::linalg::{HFloat, Precision};
use crate::measures::{pushforward_moments, Domain, DomainKind};
use crate::polyring::{Exponents, MPoly, Rat};

/// Version tag written into every CSV header.
pub const SCHEMA_VERSION: u32 = 1;

/// Largest basis size used for full bounds unless explicitly overridden.
pub const FULL_BASIS_BUDGET: usize = 500;

/// Largest vertex count accepted by [`maxcut_opt`].
pub const MAXCUT_BRUTE_FORCE_MAX: usize = 24;

#[derive(Clone, Debug)]
pub struct TestFunction {
    pub name: &'static str,
    pub poly: MPoly,
    pub f_min: Rat,
    pub minimizers: Vec<Vec<Rat>>,
}

pub const TEST_FUNCTIONS: [&str; 4] = ["booth", "matyas", "camel", "motzkin"];

fn q(n: i64, d: i64) -> Rat {
    Rat::from((n, d))
}

fn poly2(terms: &[(Rat, [u32; 2])]) -> MPoly {
    MPoly::from_terms(2, terms.iter().map(|(c, e)| (c.clone(), e.to_vec()))).expect("two variables")
}

pub fn test_function(name: &str) -> Result<TestFunction> {
    let tf = match name {
        "booth" => {
            // (10x1 + 20x2 − 7)² + (20x1 + 10x2 − 5)²
            let l1 = poly2(&[(q(10, 1), [1, 0]), (q(20, 1), [0, 1]), (q(-7, 1), [0, 0])]);
            let l2 = poly2(&[(q(20, 1), [1, 0]), (q(10, 1), [0, 1]), (q(-5, 1), [0, 0])]);
            TestFunction {
                name: "booth",
                poly: &(&l1 * &l1) + &(&l2 * &l2),
                f_min: Rat::new(),
                minimizers: vec![vec![q(1, 10), q(3, 10)]],
            }
        }
        "matyas" => TestFunction {
            name: "matyas",
            poly: poly2(&[(q(26, 1), [2, 0]), (q(26, 1), [0, 2]), (q(-48, 1), [1, 1])]),
            f_min: Rat::new(),
            minimizers: vec![vec![q(0, 1), q(0, 1)]],
        },
        "camel" => TestFunction {
            name: "camel",
            poly: poly2(&[
                (q(50, 1), [2, 0]),
                (q(-2625, 4), [4, 0]),
                (q(15625, 6), [6, 0]),
                (q(25, 1), [1, 1]),
                (q(25, 1), [0, 2]),
            ]),
            f_min: Rat::new(),
            minimizers: vec![vec![q(0, 1), q(0, 1)]],
        },
        "motzkin" => TestFunction {
            name: "motzkin",
            poly: poly2(&[(q(64, 1), [4, 2]), (q(64, 1), [2, 4]), (q(-48, 1), [2, 2]), (q(1, 1), [0, 0])]),
            f_min: Rat::new(),
            minimizers: [(1, 1), (1, -1), (-1, 1), (-1, -1)].iter().map(|&(a, b)| vec![q(a, 2), q(b, 2)]).collect(),
        },
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    Ok(tf)
}

/// `f(x) = x^{2k}` in one variable.
pub fn even_power(k: u32) -> MPoly {
    MPoly::monomial(Rat::from(1), Exponents::new(vec![2 * k]))
}

fn gap_tolerance(f_min: &Rat, prec: Precision) -> HFloat {
    let scale = Float::with_val(prec.bits(), f_min.clone().abs()).max(&prec.float(1));
    scale >> (prec.bits() / 2)
}

/// `(f_pfm^(r) − f_min) / (f^(r) − f_min)` from already computed bounds.
pub fn rho_from_bounds(full: &HFloat, pfm: &HFloat, f_min: &Rat, prec: Precision) -> Result<HFloat> {
    let p = prec.bits();
    let den = Float::with_val(p, full - Float::with_val(p, f_min));
    if Float::with_val(p, den.abs_ref()) <= gap_tolerance(f_min, prec) {
        return Err(Error::DenominatorZero);
    }
    let num = Float::with_val(p, pfm - Float::with_val(p, f_min));
    Ok(num / den)
}

pub fn rho_ratio(tf: &TestFunction, domain: &Domain, r: usize, prec: Precision) -> Result<HFloat> {
    let full = crate::hierarchy::upper_bound_full(&tf.poly, domain, r, prec)?;
    let pfm = crate::hierarchy::upper_bound_pfm(&tf.poly, domain, r, Method::PfmHankel, prec)?;
    rho_from_bounds(&full.value, &pfm.value, &tf.f_min, prec)
}

/// Weighted graph on `n` vertices with dyadic weights in `(0, 1]`.
#[derive(Clone, Debug)]
pub struct MaxCutInstance {
    pub n: usize,
    pub weights: Vec<Vec<Rat>>,
    pub p: Rat,
    pub seed: u64,
}

const WEIGHT_BITS: u32 = 53;

impl MaxCutInstance {
    /// `f(x) = ¼ Σ_{i<j} w_ij (x_i − x_j)²`, the cut weight at a vertex of the cube.
    pub fn poly(&self) -> MPoly {
        let n = self.n;
        let mut terms: Vec<(Rat, Vec<u32>)> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let w = &self.weights[i][j];
                if *w == 0 {
                    continue;
                }
                let quarter = Rat::from(w / 4u32);
                let mut ei = vec![0u32; n];
                ei[i] = 2;
                let mut ej = vec![0u32; n];
                ej[j] = 2;
                let mut eij = vec![0u32; n];
                eij[i] = 1;
                eij[j] = 1;
                terms.push((quarter.clone(), ei));
                terms.push((quarter, ej));
                terms.push((-Rat::from(w / 2u32), eij));
            }
        }
        MPoly::from_terms(n, terms).expect("consistent dimension")
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|i| (i + 1..self.n).filter(|&j| self.weights[i][j] != 0).count()).sum()
    }

    /// Text form: header comment, then `i j num/den` per nonzero edge.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# maxcut schema={SCHEMA_VERSION} generator=splitmix64 n={} p={} seed={}\n",
            self.n, self.p, self.seed
        );
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.weights[i][j] != 0 {
                    let _ = writeln!(out, "{} {} {}", i, j, self.weights[i][j]);
                }
            }
        }
        out
    }
}

impl MaxCutInstance {
    /// Parses the output of [`MaxCutInstance::to_text`]. `p` and `seed` are
    /// read from the header when present.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut p = Rat::new();
        let mut seed = 0u64;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            let err = |msg: String| Error::Parse { line: lineno, msg };
            if let Some(comment) = line.strip_prefix('#') {
                for tok in comment.split_whitespace() {
                    match tok.split_once('=') {
                        Some(("n", v)) => n = Some(v.parse().map_err(|_| err(format!("bad n `{v}`")))?),
                        Some(("p", v)) => p = crate::polyring::parse_rat(v).ok_or_else(|| err(format!("bad p `{v}`")))?,
                        Some(("seed", v)) => seed = v.parse().map_err(|_| err(format!("bad seed `{v}`")))?,
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(err("expected `i j weight`".into()));
            }
            let i: usize = toks[0].parse().map_err(|_| err(format!("bad vertex `{}`", toks[0])))?;
            let j: usize = toks[1].parse().map_err(|_| err(format!("bad vertex `{}`", toks[1])))?;
            let w = crate::polyring::parse_rat(toks[2]).ok_or_else(|| err(format!("bad weight `{}`", toks[2])))?;
            if i == j || w < 0 {
                return Err(err("weights must be off-diagonal and nonnegative".into()));
            }
            edges.push((i, j, w));
        }
        let n = match n {
            Some(n) => n,
            None => edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0),
        };
        if n < 2 {
            return Err(Error::InvalidParameters("MAXCUT instance needs n >= 2".into()));
        }
        let mut weights = vec![vec![Rat::new(); n]; n];
        for (i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidParameters(format!("edge ({i}, {j}) outside n = {n}")));
            }
            weights[i][j] = w.clone();
            weights[j][i] = w;
        }
        Ok(MaxCutInstance { n, weights, p, seed })
    }
}

/// The `(index+1)`-th output of SplitMix64 started at `seed`.
pub fn instance_seed(seed: u64, index: usize) -> u64 {
    let mut g = SplitMix64::seed_from_u64(seed);
    let mut s = 0;
    for _ in 0..=index {
        s = g.next_u64();
    }
    s
}

/// Each pair `i < j` draws two 53-bit values: the first decides `w_ij = 0`
/// with probability `p`, the second gives `w_ij = (bits + 1) / 2^53`.
pub fn maxcut_gen(n: usize, p: &Rat, seed: u64) -> Result<MaxCutInstance> {
    if n < 2 {
        return Err(Error::InvalidParameters(format!("MAXCUT needs n >= 2, got {n}")));
    }
    if *p < 0 || *p > 1 {
        return Err(Error::InvalidParameters(format!("probability {p} outside [0, 1]")));
    }
    let mut g = SplitMix64::seed_from_u64(seed);
    let scale = Integer::from(1) << WEIGHT_BITS;
    // zero iff bits·den < num·2^53
    let threshold = Integer::from(p.numer() * &scale);
    let den = p.denom().clone();
    let mut weights = vec![vec![Rat::new(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let z = g.next_u64() >> (64 - WEIGHT_BITS);
            let v = g.next_u64() >> (64 - WEIGHT_BITS);
            if Integer::from(&den * z) < threshold {
                continue;
            }
            let w = Rat::from((Integer::from(v + 1), scale.clone()));
            weights[i][j] = w.clone();
            weights[j][i] = w;
        }
    }
    Ok(MaxCutInstance { n, weights, p: p.clone(), seed })
}

/// Exact `max f` over `{−1, 1}^n`, which is the box maximum by convexity.
pub fn maxcut_opt(inst: &MaxCutInstance) -> Result<Rat> {
    let n = inst.n;
    if n > MAXCUT_BRUTE_FORCE_MAX {
        return Err(Error::BudgetExceeded { n, max: MAXCUT_BRUTE_FORCE_MAX });
    }
    // weights share the denominator 2^53; work on numerators
    let scale = Integer::from(1) << WEIGHT_BITS;
    let mut edges: Vec<(usize, usize, u128)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let w = &inst.weights[i][j];
            if *w != 0 {
                let num = Rat::from(w * &scale).numer().to_u128().expect("dyadic weight");
                edges.push((i, j, num));
            }
        }
    }
    let mut best: u128 = 0;
    for mask in 0u64..(1u64 << (n - 1)) {
        // vertex 0 fixed on side 0
        let side = mask << 1;
        let mut cut: u128 = 0;
        for &(i, j, w) in &edges {
            if ((side >> i) ^ (side >> j)) & 1 == 1 {
                cut += w;
            }
        }
        best = best.max(cut);
    }
    Ok(Rat::from((Integer::from(best), scale)))
}

/// One row of MAXCUT bounds in the maximization sense.
#[derive(Clone, Debug)]
pub struct MaxCutRow {
    pub r: usize,
    pub full: Option<HFloat>,
    pub pfm: HFloat,
}

/// Lower bounds on `OPT` for `r = 0..=r_max`; full bounds are limited to
/// bases of size `≤ full_budget`.
pub fn maxcut_bounds(inst: &MaxCutInstance, r_max: usize, full_budget: usize, prec: Precision) -> Result<Vec<MaxCutRow>> {
    let g = -&inst.poly();
    let dom = Domain::unit_box(inst.n);
    let mut r_full = 0;
    while r_full < r_max && binomial(inst.n + r_full + 1, r_full + 1) <= full_budget {
        r_full += 1;
    }
    let full = upper_bounds_full(&g, &dom, r_full, prec)?;
    let m = pushforward_moments(&dom, &g, 2 * r_max + 1)?;
    let mut rows = Vec::with_capacity(r_max + 1);
    for r in 0..=r_max {
        let pfm = upper_bound_pfm_from_moments(&m, r, Method::PfmHankel, prec)?;
        rows.push(MaxCutRow { r, full: full.get(r).map(|b| -b.value.clone()), pfm: -pfm.value });
    }
    Ok(rows)
}

pub fn binomial(n: usize, k: usize) -> usize {
    Integer::from(n).binomial(k as u32).to_usize().unwrap_or(usize::MAX)
}

/// Averages of `(OPT − bound)/OPT` per order.
#[derive(Clone, Debug)]
pub struct Table3 {
    pub p: Rat,
    pub count: usize,
    pub skipped: usize,
    pub ratio: Vec<Option<f64>>,
    pub ratio_pfm: Vec<f64>,
}

impl Table3 {
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str("p,r,ratio,ratio_pfm,instances,skipped\n");
        for r in 0..self.ratio_pfm.len() {
            let ratio = self.ratio[r].map(|v| format!("{v:.11e}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{:.11e},{},{}",
                self.p,
                r,
                ratio,
                self.ratio_pfm[r],
                self.count - self.skipped,
                self.skipped
            );
        }
        out
    }
}

/// Per-instance outcome collected by [`table3_ratios`].
#[derive(Clone, Debug)]
pub struct InstanceBounds {
    pub index: usize,
    pub opt: Rat,
    pub rows: Vec<MaxCutRow>,
}

/// Bounds for `count` fresh instances; instance `i` uses [`instance_seed`]`(seed, i)`.
pub fn maxcut_batch(
    n: usize,
    p: &Rat,
    count: usize,
    r_max: usize,
    seed: u64,
    prec: Precision,
    mut progress: impl FnMut(&InstanceBounds),
) -> Result<Vec<InstanceBounds>> {
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let inst = maxcut_gen(n, p, instance_seed(seed, index))?;
        let opt = maxcut_opt(&inst)?;
        let rows = if opt == 0 { Vec::new() } else { maxcut_bounds(&inst, r_max, FULL_BASIS_BUDGET, prec)? };
        let item = InstanceBounds { index, opt, rows };
        progress(&item);
        out.push(item);
    }
    Ok(out)
}

pub fn table3_from_batch(p: &Rat, r_max: usize, batch: &[InstanceBounds]) -> Table3 {
    let usable: Vec<&InstanceBounds> = batch.iter().filter(|b| b.opt != 0).collect();
    let mut ratio = Vec::with_capacity(r_max + 1);
    let mut ratio_pfm = Vec::with_capacity(r_max + 1);
    for r in 0..=r_max {
        let mut s_full = 0.0;
        let mut s_pfm = 0.0;
        let mut have_full = !usable.is_empty();
        for b in &usable {
            let opt = b.opt.to_f64();
            let row = &b.rows[r];
            match &row.full {
                Some(v) => s_full += (opt - v.to_f64()) / opt,
                None => have_full = false,
            }
            s_pfm += (opt - row.pfm.to_f64()) / opt;
        }
        let k = usable.len().max(1) as f64;
        ratio.push(if have_full { Some(s_full / k) } else { None });
        ratio_pfm.push(if usable.is_empty() { f64::NAN } else { s_pfm / k });
    }
    Table3 { p: p.clone(), count: batch.len(), skipped: batch.len() - usable.len(), ratio, ratio_pfm }
}

pub fn table3_ratios(p: &Rat, count: usize, r_max: usize, seed: u64, prec: Precision) -> Result<Table3> {
    let batch = maxcut_batch(8, p, count, r_max, seed, prec, |_| {})?;
    Ok(table3_from_batch(p, r_max, &batch))
}

/// Header comment naming schema, seed and precision.
pub fn csv_header(kind: &str, seed: Option<u64>, prec: Precision, extra: &str) -> String {
    let mut h = format!("# measbound {kind} schema={SCHEMA_VERSION} precision={}", prec.bits());
    if let Some(s) = seed {
        let _ = write!(h, " seed={s}");
    }
    if !extra.is_empty() {
        let _ = write!(h, " {extra}");
    }
    h.push('\n');
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig3,
    Fig4,
}

/// One row of figure data.
#[derive(Clone, Debug)]
pub struct FigureRow {
    pub function: String,
    pub domain: Domain,
    pub r: usize,
    pub full: HFloat,
    pub pfm: HFloat,
    pub rho: Option<HFloat>,
}

fn figure_series(name: &str, f: &MPoly, f_min: &Rat, domain: &Domain, r_max: usize, prec: Precision) -> Result<Vec<FigureRow>> {
    let full = upper_bounds_full(f, domain, r_max, prec)?;
    let m = pushforward_moments(domain, f, 2 * r_max + 1)?;
    let mut rows = Vec::with_capacity(r_max);
    for r in 1..=r_max {
        let pfm = upper_bound_pfm_from_moments(&m, r, Method::PfmHankel, prec)?.value;
        let fv = full[r].value.clone();
        let rho = rho_from_bounds(&fv, &pfm, f_min, prec).ok();
        rows.push(FigureRow { function: name.to_string(), domain: *domain, r, full: fv, pfm, rho });
    }
    Ok(rows)
}

pub fn figure_rows(which: Figure, r_max: usize, prec: Precision) -> Result<Vec<FigureRow>> {
    let mut rows = Vec::new();
    match which {
        Figure::Fig3 => {
            for kind in [DomainKind::Box, DomainKind::Ball] {
                let dom = Domain { kind, nvars: 2 };
                for name in TEST_FUNCTIONS {
                    let tf = test_function(name)?;
                    rows.extend(figure_series(name, &tf.poly, &tf.f_min, &dom, r_max, prec)?);
                }
            }
        }
        Figure::Fig4 => {
            let dom = Domain::unit_box(1);
            for k in 1..=5u32 {
                rows.extend(figure_series(&format!("x^{}", 2 * k), &even_power(k), &Rat::new(), &dom, r_max, prec)?);
            }
        }
    }
    Ok(rows)
}

pub fn figure_csv(rows: &[FigureRow], header: &str) -> String {
    let mut out = String::from(header);
    out.push_str("function,domain,r,full,pfm,rho\n");
    for row in rows {
        let domain = match row.domain.kind {
            DomainKind::Box => "box",
            DomainKind::Ball => "ball",
        };
        let rho = row.rho.as_ref().map(|v| fmt_sig(v, 12)).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{},{}", row.function, domain, row.r, fmt_sig(&row.full, 12), fmt_sig(&row.pfm, 12), rho);
    }
    out
}

/// Parses a probability given as `1/2`, `0.75` or `1`.
pub fn parse_probability(s: &str) -> Result<Rat> {
    let p = crate::polyring::parse_rat(s)
        .or_else(|| s.parse::<f64>().ok().and_then(Rat::from_f64))
        .ok_or_else(|| Error::InvalidParameters(format!("cannot parse probability `{s}`")))?;
    if p < 0 || p > 1 {
        return Err(Error::InvalidParameters(format!("probability {p} outside [0, 1]")));
    }
    Ok(p)
}

/// Highest value of `f` on a regular grid over the unit box (used when no
/// analytic maximum is at hand).
pub fn grid_max_box(f: &MPoly, per_axis: usize) -> f64 {
    let n = f.nvars();
    let mut idx = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    let mut point = vec![0.0; n];
    let step = 2.0 / (per_axis - 1) as f64;
    loop {
        for (x, &i) in point.iter_mut().zip(&idx) {
            *x = -1.0 + step * i as f64;
        }
        best = best.max(f.eval_f64(&point));
        let mut k = 0;
        loop {
            if k == n {
                return best;
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
