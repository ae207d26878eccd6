//! Gauss–Legendre rules on `[-1, 1]` and their tensor products.

use rug::Float;

use crate::linalg::{HFloat, Precision};

/// Nodes and weights of an `order`-point rule; exact for degree `2·order − 1`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<HFloat>,
    pub weights: Vec<HFloat>,
}

const NEWTON_MAX_ITERS: usize = 100;

// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: &HFloat) -> (HFloat, HFloat) {
    let p = x.prec();
    let mut p0 = Float::with_val(p, 1);
    let mut p1 = x.clone();
    if n == 0 {
        return (p0, Float::with_val(p, 0));
    }
    for k in 1..n {
        // (k+1) P_{k+1} = (2k+1) x P_k − k P_{k−1}
        let mut next = Float::with_val(p, x * &p1);
        next *= (2 * k + 1) as u32;
        next -= Float::with_val(p, &p0 * k as u32);
        next /= (k + 1) as u32;
        p0 = p1;
        p1 = next;
    }
    // (1 − x²) P_n' = n (P_{n−1} − x P_n)
    let mut d = Float::with_val(p, x * &p1);
    d = Float::with_val(p, &p0 - &d);
    d *= n as u32;
    let one_minus = Float::with_val(p, 1) - Float::with_val(p, x.square_ref());
    d /= one_minus;
    (p1, d)
}

impl GaussLegendre {
    pub fn new(order: usize, prec: Precision) -> Self {
        assert!(order >= 1, "a Gauss rule needs at least one node");
        let p = prec.bits();
        let tol = Float::with_val(p, 1) >> (p - 4);
        let pi = Float::with_val(p, rug::float::Constant::Pi);
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        for i in 0..order {
            // Tricomi initial guess, then Newton at full precision
            let theta = Float::with_val(p, &pi * (4 * i + 3) as u32) / (4 * order + 2) as u32;
            let mut x = -theta.cos();
            let mut dp = Float::with_val(p, 0);
            for _ in 0..NEWTON_MAX_ITERS {
                let (pn, d) = legendre_with_derivative(order, &x);
                let step = pn / &d;
                x -= &step;
                dp = d;
                if step.abs() <= tol {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, &x);
            if d.is_finite() {
                dp = d;
            }
            let one_minus = Float::with_val(p, 1) - Float::with_val(p, x.square_ref());
            let w = Float::with_val(p, 2) / (one_minus * Float::with_val(p, dp.square_ref()));
            nodes.push(x);
            weights.push(w);
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `∫_{-1}^{1} g`.
    pub fn integrate(&self, mut g: impl FnMut(&HFloat) -> HFloat) -> HFloat {
        let p = self.nodes[0].prec();
        let mut total = Float::with_val(p, 0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            total += g(x) * w;
        }
        total
    }

    /// Visits every node of the `nvars`-fold tensor rule with its weight.
    pub fn for_each_tensor(&self, nvars: usize, mut visit: impl FnMut(&[HFloat], &HFloat)) {
        let p = self.nodes[0].prec();
        let q = self.order();
        let mut idx = vec![0usize; nvars];
        let mut point: Vec<HFloat> = vec![Float::with_val(p, 0); nvars];
        loop {
            let mut w = Float::with_val(p, 1);
            for (k, &i) in idx.iter().enumerate() {
                point[k].clone_from(&self.nodes[i]);
                w *= &self.weights[i];
            }
            visit(&point, &w);
            let mut k = 0;
            loop {
                if k == nvars {
                    return;
                }
                idx[k] += 1;
                if idx[k] < q {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use rug::ops::Pow;

    use super::*;

    #[test]
    fn integrates_monomials_exactly() {
        let prec = Precision::DEFAULT;
        let rule = GaussLegendre::new(6, prec);
        let tol = Float::with_val(256, 1) >> 240;
        for k in 0..=11u32 {
            let got = rule.integrate(|x| Float::with_val(256, x.pow(k)));
            let want = if k % 2 == 1 { Float::with_val(256, 0) } else { Float::with_val(256, 2) / (k + 1) };
            assert!(Float::with_val(256, &got - &want).abs() < tol, "k = {k}");
        }
    }

    #[test]
    fn weights_sum_to_two_and_nodes_are_sorted() {
        let rule = GaussLegendre::new(33, Precision::DEFAULT);
        let s: HFloat = rule.weights.iter().fold(Float::with_val(256, 0), |acc, w| acc + w);
        assert!((s - 2u32).abs() < (Float::with_val(256, 1) >> 240));
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(rule.nodes.iter().all(|x| x.clone().abs() < 1));
    }

    #[test]
    fn tensor_rule_volume() {
        let rule = GaussLegendre::new(4, Precision::DEFAULT);
        let mut vol = Float::with_val(256, 0);
        let mut count = 0;
        rule.for_each_tensor(3, |_, w| {
            vol += w;
            count += 1;
        });
        assert_eq!(count, 64);
        assert!((vol - 8u32).abs() < (Float::with_val(256, 1) >> 240));
    }
}
