//! Monte-Carlo estimates of local volume growth `vol(K ∩ B_δ(x)) ≈ η δ^N vol(Bⁿ)`.
//!
//! Regions are finite intersections `{x : g_j(x) ≥ 0}` inside a bounding box.
//! Each `g_j` is a polynomial, optionally plus multiples of the single
//! non-polynomial atom `exp(−1/x_k)` (taken as 0 for `x_k ≤ 0`).
//!
//! Region file format, one directive per line, `#` starts a comment:
//!
//! ```text
//! nvars 2
//! bbox 0 1 0 1              # lo_1 hi_1 lo_2 hi_2 ...
//! ineq 1 1 0                # x1 >= 0
//! ineq 1 0 0 ; -1 1 0       # 1 - x1 >= 0
//! ineq 1 exp 1 ; -1 0 1     # exp(-1/x1) - x2 >= 0
//! ```
//!
//! An `ineq` line lists terms separated by `;`. A term is `coef e1 ... en` for
//! a monomial or `coef exp k` for `coef · exp(−1/x_k)` with `k` counted from 1.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::polyring::{parse_rat, Exponents, MPoly, Rat};

/// Samples drawn per independent stream.
pub const BATCH_SIZE: usize = 1 << 16;

/// Ladder entries with a larger relative standard error are left out of the fit.
pub const MAX_REL_STDERR: f64 = 0.2;

/// One constraint `poly(x) + Σ c_k exp(−1/x_k) ≥ 0`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub poly: MPoly,
    pub exp_terms: Vec<(f64, usize)>,
}

impl Constraint {
    pub fn polynomial(poly: MPoly) -> Self {
        Constraint { poly, exp_terms: Vec::new() }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut v = self.poly.eval_f64(x);
        for &(c, k) in &self.exp_terms {
            if x[k] > 0.0 {
                v += c * (-1.0 / x[k]).exp();
            }
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct RegionSpec {
    pub nvars: usize,
    pub bbox: Vec<(f64, f64)>,
    pub constraints: Vec<Constraint>,
}

impl RegionSpec {
    pub fn new(bbox: Vec<(f64, f64)>, constraints: Vec<Constraint>) -> Result<Self> {
        let nvars = bbox.len();
        if nvars == 0 {
            return Err(Error::InvalidParameters("region needs at least one variable".into()));
        }
        if let Some((lo, hi)) = bbox.iter().find(|(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidInterval { lo: lo.to_string(), hi: hi.to_string() });
        }
        for c in &constraints {
            if c.poly.nvars() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: c.poly.nvars() });
            }
            if let Some(&(_, k)) = c.exp_terms.iter().find(|(_, k)| *k >= nvars) {
                return Err(Error::InvalidParameters(format!("exp atom refers to variable {}", k + 1)));
            }
        }
        Ok(RegionSpec { nvars, bbox, constraints })
    }

    /// `[-1, 1]^n`.
    pub fn unit_box(nvars: usize) -> Self {
        RegionSpec { nvars, bbox: vec![(-1.0, 1.0); nvars], constraints: Vec::new() }
    }

    /// `{0 ≤ x1 ≤ 1, 0 ≤ x2 ≤ x1²}`, a polynomial cusp at the origin.
    pub fn polynomial_cusp() -> Self {
        let x1 = MPoly::var(2, 0);
        let x2 = MPoly::var(2, 1);
        let one = MPoly::one(2);
        let cs = vec![
            Constraint::polynomial(x1.clone()),
            Constraint::polynomial(&one - &x1),
            Constraint::polynomial(x2.clone()),
            Constraint::polynomial(&(&x1 * &x1) - &x2),
        ];
        RegionSpec { nvars: 2, bbox: vec![(0.0, 1.0), (0.0, 1.0)], constraints: cs }
    }

    /// `{0 ≤ x1 ≤ 1, 0 ≤ x2 ≤ exp(−1/x1)}`, an exponential cusp at the origin.
    pub fn exponential_cusp() -> Self {
        let x1 = MPoly::var(2, 0);
        let x2 = MPoly::var(2, 1);
        let one = MPoly::one(2);
        let cs = vec![
            Constraint::polynomial(x1.clone()),
            Constraint::polynomial(&one - &x1),
            Constraint::polynomial(x2.clone()),
            Constraint { poly: -&x2, exp_terms: vec![(1.0, 0)] },
        ];
        RegionSpec { nvars: 2, bbox: vec![(0.0, 1.0), (0.0, 1.0)], constraints: cs }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.bbox).all(|(v, (lo, hi))| lo <= v && v <= hi)
            && self.constraints.iter().all(|c| c.value(x) >= 0.0)
    }

    pub fn in_bbox(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.bbox).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut nvars: Option<usize> = None;
        let mut bbox: Option<Vec<(f64, f64)>> = None;
        let mut constraints = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let err = |msg: String| Error::Parse { line: lineno, msg };
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match key {
                "nvars" => {
                    let n = rest.trim().parse::<usize>().map_err(|_| err(format!("bad nvars `{}`", rest.trim())))?;
                    nvars = Some(n);
                }
                "bbox" => {
                    let vals = rest
                        .split_whitespace()
                        .map(|t| parse_number(t).ok_or_else(|| err(format!("bad bound `{t}`"))))
                        .collect::<Result<Vec<f64>>>()?;
                    if vals.len() % 2 != 0 {
                        return Err(err("bbox needs lo/hi pairs".into()));
                    }
                    bbox = Some(vals.chunks(2).map(|c| (c[0], c[1])).collect());
                }
                "ineq" => {
                    let n = nvars.ok_or_else(|| err("`nvars` must precede `ineq`".into()))?;
                    constraints.push(parse_constraint(rest, n).map_err(err)?);
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        let n = nvars.ok_or_else(|| Error::Parse { line: 0, msg: "missing `nvars`".into() })?;
        let bbox = bbox.unwrap_or_else(|| vec![(-1.0, 1.0); n]);
        if bbox.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: bbox.len() });
        }
        RegionSpec::new(bbox, constraints)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

fn parse_number(t: &str) -> Option<f64> {
    parse_rat(t).map(|r| r.to_f64()).or_else(|| t.parse::<f64>().ok())
}

fn parse_constraint(s: &str, nvars: usize) -> std::result::Result<Constraint, String> {
    let mut poly = MPoly::zero(nvars);
    let mut exp_terms = Vec::new();
    for term in s.split(';') {
        let toks: Vec<&str> = term.split_whitespace().collect();
        let Some((c, rest)) = toks.split_first() else {
            return Err("empty term".into());
        };
        if rest.first() == Some(&"exp") {
            let c = parse_number(c).ok_or_else(|| format!("bad coefficient `{c}`"))?;
            let k = rest
                .get(1)
                .and_then(|t| t.parse::<usize>().ok())
                .filter(|&k| k >= 1 && k <= nvars)
                .ok_or_else(|| "exp term needs a variable index in 1..=nvars".to_string())?;
            exp_terms.push((c, k - 1));
            continue;
        }
        let coef = parse_rat(c).or_else(|| c.parse::<f64>().ok().and_then(Rat::from_f64));
        let coef = coef.ok_or_else(|| format!("bad coefficient `{c}`"))?;
        let exps = rest.iter().map(|t| t.parse::<u32>().map_err(|_| format!("bad exponent `{t}`"))).collect::<std::result::Result<Vec<u32>, String>>()?;
        if exps.len() != nvars {
            return Err(format!("expected {nvars} exponents, found {}", exps.len()));
        }
        poly.add_term(Exponents::new(exps), coef);
    }
    Ok(Constraint { poly, exp_terms })
}

/// `vol(Bⁿ)` for the unit ball.
pub fn unit_ball_volume(n: usize) -> f64 {
    // V_n = V_{n−2} · 2π/n
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolumeEstimate {
    pub delta: f64,
    pub samples: usize,
    pub hits: usize,
    /// Estimate of `vol(K ∩ B_δ(x)) / vol(B_δ)`.
    pub fraction: f64,
    pub stderr: f64,
}

impl VolumeEstimate {
    /// `fraction · vol(B_δ)`.
    pub fn volume(&self, n: usize) -> f64 {
        self.fraction * unit_ball_volume(n) * self.delta.powi(n as i32)
    }

    pub fn volume_stderr(&self, n: usize) -> f64 {
        self.stderr * unit_ball_volume(n) * self.delta.powi(n as i32)
    }

    pub fn rel_stderr(&self) -> f64 {
        if self.hits == 0 {
            f64::INFINITY
        } else {
            self.stderr / self.fraction
        }
    }
}

fn batch_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn count_hits(region: &RegionSpec, x: &[f64], delta: f64, samples: usize, seed: u64, stream_base: u64) -> usize {
    let n = region.nvars;
    let mut hits = 0;
    let mut point = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let batches = samples.div_ceil(BATCH_SIZE);
    for b in 0..batches {
        let mut rng = batch_rng(seed, stream_base + b as u64);
        let m = BATCH_SIZE.min(samples - b * BATCH_SIZE);
        for _ in 0..m {
            // uniform in the ball: Gaussian direction, radius δ·U^(1/n)
            let mut norm2 = 0.0;
            for d in dir.iter_mut() {
                *d = rng.sample::<f64, _>(StandardNormal);
                norm2 += *d * *d;
            }
            let u: f64 = rng.random();
            let scale = delta * u.powf(1.0 / n as f64) / norm2.sqrt();
            for ((p, c), d) in point.iter_mut().zip(x).zip(&dir) {
                *p = c + scale * d;
            }
            if region.contains(&point) {
                hits += 1;
            }
        }
    }
    hits
}

// Streams are disjoint across ladder entries: entry k uses k·2^32 + batch.
fn estimate(region: &RegionSpec, x: &[f64], delta: f64, samples: usize, seed: u64, entry: u64) -> VolumeEstimate {
    let hits = count_hits(region, x, delta, samples, seed, entry << 32);
    let f = hits as f64 / samples as f64;
    let stderr = (f * (1.0 - f) / samples as f64).sqrt();
    VolumeEstimate { delta, samples, hits, fraction: f, stderr }
}

fn check_query(region: &RegionSpec, x: &[f64]) -> Result<()> {
    if x.len() != region.nvars {
        return Err(Error::DimensionMismatch { expected: region.nvars, got: x.len() });
    }
    if !region.in_bbox(x) {
        return Err(Error::InvalidParameters("anchor lies outside the bounding box".into()));
    }
    Ok(())
}

/// Estimate of `vol(K ∩ B_δ(x)) / vol(B_δ)`, deterministic in `seed`.
pub fn local_volume(region: &RegionSpec, x: &[f64], delta: f64, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    check_query(region, x)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameters(format!("radius {delta} must be positive")));
    }
    if samples == 0 {
        return Err(Error::InvalidParameters("at least one sample is needed".into()));
    }
    Ok(estimate(region, x, delta, samples, seed, 0))
}

#[derive(Clone, Debug)]
pub struct GrowthFit {
    pub anchor: Vec<f64>,
    pub estimates: Vec<VolumeEstimate>,
    /// Indices into `estimates` used by the fit.
    pub used: Vec<usize>,
    /// Slope of `log vol` against `log δ`.
    pub exponent: Option<f64>,
    /// `exp(intercept) / vol(Bⁿ)`, the empirical counterpart of `η`.
    pub eta: Option<f64>,
    /// Largest radius in the ladder.
    pub epsilon: f64,
    /// Root mean square of the fit residuals.
    pub residual: Option<f64>,
    pub residuals: Vec<f64>,
    /// Local exponents between consecutive used entries, largest δ first.
    pub local_exponents: Vec<f64>,
    pub divergent: bool,
}

impl GrowthFit {
    /// `delta,samples,hits,fraction,stderr,volume,used`
    pub fn to_csv(&self, header: &str) -> String {
        let n = self.anchor.len();
        let mut out = String::from(header);
        out.push_str("delta,samples,hits,fraction,stderr,volume,used\n");
        for (i, e) in self.estimates.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:.11e},{},{},{:.11e},{:.11e},{:.11e},{}",
                e.delta,
                e.samples,
                e.hits,
                e.fraction,
                e.stderr,
                e.volume(n),
                self.used.contains(&i)
            );
        }
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.11e}")).unwrap_or_else(|| "nan".into());
        let _ = writeln!(
            out,
            "# fit exponent={} eta={} epsilon={:.11e} residual={} divergent={}",
            opt(self.exponent),
            opt(self.eta),
            self.epsilon,
            opt(self.residual),
            self.divergent
        );
        out
    }
}

// Expected hits under the fitted power law below which a vanishing estimate
// is not counted as evidence against it.
const VANISHING_EXPECTED_HITS: f64 = 30.0;

/// Least-squares fit of `log vol(K ∩ B_δ(x))` against `log δ` over a ladder.
///
/// The fit is flagged divergent when the local exponents increase at every
/// step as `δ` shrinks (by more than three standard errors overall), or when a
/// ladder entry sees almost no hits although the fitted power law predicts
/// plenty.
pub fn growth_exponent(region: &RegionSpec, x: &[f64], ladder: &[f64], samples: usize, seed: u64) -> Result<GrowthFit> {
    check_query(region, x)?;
    if ladder.len() < 3 {
        return Err(Error::InvalidParameters("the radius ladder needs at least 3 entries".into()));
    }
    if !ladder.windows(2).all(|w| w[0] > w[1]) || ladder.last().is_some_and(|&d| !(d > 0.0)) {
        return Err(Error::InvalidParameters("the radius ladder must be positive and strictly decreasing".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidParameters("at least one sample is needed".into()));
    }
    let n = region.nvars;
    let estimates: Vec<VolumeEstimate> =
        ladder.iter().enumerate().map(|(k, &d)| estimate(region, x, d, samples, seed, k as u64)).collect();
    if estimates.iter().all(|e| e.hits == 0) {
        return Err(Error::AnchorOutsideClosure);
    }
    let used: Vec<usize> = (0..estimates.len()).filter(|&i| estimates[i].rel_stderr() < MAX_REL_STDERR).collect();

    let xs: Vec<f64> = used.iter().map(|&i| estimates[i].delta.ln()).collect();
    let ys: Vec<f64> = used.iter().map(|&i| estimates[i].volume(n).ln()).collect();
    let (mut exponent, mut eta, mut residual, mut residuals) = (None, None, None, Vec::new());
    if used.len() >= 2 {
        let m = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / m;
        let my = ys.iter().sum::<f64>() / m;
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        residuals = xs.iter().zip(&ys).map(|(a, b)| b - (intercept + slope * a)).collect();
        residual = Some((residuals.iter().map(|r| r * r).sum::<f64>() / m).sqrt());
        exponent = Some(slope);
        eta = Some(intercept.exp() / unit_ball_volume(n));
    }

    let mut local_exponents = Vec::new();
    let mut local_var = Vec::new();
    for w in used.windows(2) {
        let (a, b) = (&estimates[w[0]], &estimates[w[1]]);
        let span = (a.delta / b.delta).ln();
        local_exponents.push((a.volume(n) / b.volume(n)).ln() / span);
        local_var.push((a.rel_stderr().powi(2) + b.rel_stderr().powi(2)) / (span * span));
    }
    let mut divergent = false;
    if local_exponents.len() >= 2 && local_exponents.windows(2).all(|w| w[1] > w[0]) {
        let first = local_exponents[0];
        let last = *local_exponents.last().unwrap();
        let sigma = (local_var[0] + local_var.last().unwrap()).sqrt();
        divergent = last - first > 3.0 * sigma;
    }
    if let (Some(s), Some(&last_used)) = (exponent, used.last()) {
        let intercept = ys.iter().zip(&xs).map(|(y, x)| y - s * x).sum::<f64>() / xs.len() as f64;
        for e in &estimates[last_used + 1..] {
            let ball = unit_ball_volume(n) * e.delta.powi(n as i32);
            let expected = samples as f64 * (intercept + s * e.delta.ln()).exp() / ball;
            let seen = e.hits as f64;
            if expected >= VANISHING_EXPECTED_HITS && seen + 3.0 * seen.sqrt().max(1.0) < expected {
                divergent = true;
            }
        }
    }

    Ok(GrowthFit {
        anchor: x.to_vec(),
        epsilon: ladder[0],
        estimates,
        used,
        exponent,
        eta,
        residual,
        residuals,
        local_exponents,
        divergent,
    })
}

/// `δ_0, δ_0/ratio, …` with `len` entries.
pub fn geometric_ladder(start: f64, ratio: f64, len: usize) -> Vec<f64> {
    (0..len).map(|k| start / ratio.powi(k as i32)).collect()
}
