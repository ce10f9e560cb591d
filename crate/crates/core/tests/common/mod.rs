//! Reference constructions written independently of the library code, used
//! as oracles by the integration tests.
#![allow(dead_code)]

use nncert::{Correlation, ScenarioShape};
use rand::Rng;

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// `p_ps (1 + V (-1)^{a+c+xz}) / 4` on `b = 0`, the complement of `1/4` on `b = 1`.
pub fn reference_ps(v: f64, p_ps: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(32);
    for x in 0..2 {
        for z in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        let s = if (a + c + x * z) % 2 == 0 { 1.0 } else { -1.0 };
                        let pr = (1.0 + v * s) / 4.0;
                        out.push(if b == 0 { p_ps * pr } else { 0.25 - p_ps * pr });
                    }
                }
            }
        }
    }
    out
}

fn random_distribution<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    // Normalized exponentials give a flat Dirichlet sample.
    let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / total).collect()
}

/// Classical correlation from a hidden-variable model with `n1`, `n2`
/// values per source, random response tables for all three parties.
pub fn random_bilocal<R: Rng>(rng: &mut R, n1: usize, n2: usize) -> Correlation {
    let w1 = random_distribution(rng, n1);
    let w2 = random_distribution(rng, n2);
    // Probability of output 1 for every party, input and hidden value.
    let pa: Vec<[f64; 2]> = (0..n1).map(|_| [rng.random(), rng.random()]).collect();
    let pc: Vec<[f64; 2]> = (0..n2).map(|_| [rng.random(), rng.random()]).collect();
    let pb: Vec<Vec<f64>> = (0..n1)
        .map(|_| (0..n2).map(|_| rng.random()).collect())
        .collect();
    let bit = |p1: f64, out: usize| if out == 1 { p1 } else { 1.0 - p1 };
    let mut values = vec![0.0; 32];
    for (i, value) in values.iter_mut().enumerate() {
        let (x, z, a, b, c) = (i >> 4 & 1, i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1);
        let mut total = 0.0;
        for l1 in 0..n1 {
            for l2 in 0..n2 {
                total += w1[l1]
                    * w2[l2]
                    * bit(pa[l1][x], a)
                    * bit(pb[l1][l2], b)
                    * bit(pc[l2][z], c);
            }
        }
        *value = total;
    }
    Correlation::new(ScenarioShape::MINIMAL, values).unwrap()
}

/// `p(a|x) p(c|z)` with Bob's output fixed to `b0`.
pub fn constant_b<R: Rng>(rng: &mut R) -> Correlation {
    let pa: [f64; 2] = [rng.random(), rng.random()];
    let pc: [f64; 2] = [rng.random(), rng.random()];
    let b0 = rng.random_range(0..2);
    let bit = |p1: f64, out: usize| if out == 1 { p1 } else { 1.0 - p1 };
    Correlation::from_fn(ScenarioShape::MINIMAL, |x, z, a, b, c| {
        if b == b0 {
            bit(pa[x], a) * bit(pc[z], c)
        } else {
            0.0
        }
    })
    .unwrap()
}

/// `p(b) p(a|b,x)` with Charlie's output fixed to `c0`.
pub fn constant_c<R: Rng>(rng: &mut R) -> Correlation {
    let pb: f64 = rng.random();
    let pa: [[f64; 2]; 2] = [[rng.random(), rng.random()], [rng.random(), rng.random()]];
    let c0 = rng.random_range(0..2);
    let bit = |p1: f64, out: usize| if out == 1 { p1 } else { 1.0 - p1 };
    Correlation::from_fn(ScenarioShape::MINIMAL, |x, _, a, b, c| {
        if c == c0 {
            bit(pb, b) * bit(pa[b][x], a)
        } else {
            0.0
        }
    })
    .unwrap()
}

/// `p(b) p(c|b,z)` with Alice's output fixed to `a0`.
pub fn constant_a<R: Rng>(rng: &mut R) -> Correlation {
    let pb: f64 = rng.random();
    let pc: [[f64; 2]; 2] = [[rng.random(), rng.random()], [rng.random(), rng.random()]];
    let a0 = rng.random_range(0..2);
    let bit = |p1: f64, out: usize| if out == 1 { p1 } else { 1.0 - p1 };
    Correlation::from_fn(ScenarioShape::MINIMAL, |_, z, a, b, c| {
        if a == a0 {
            bit(pb, b) * bit(pc[b][z], c)
        } else {
            0.0
        }
    })
    .unwrap()
}

/// Product `p(a|x) p(b) p(c|z)`.
pub fn product(pa: [f64; 2], pb: f64, pc: [f64; 2]) -> Correlation {
    let bit = |p1: f64, out: usize| if out == 1 { p1 } else { 1.0 - p1 };
    Correlation::from_fn(ScenarioShape::MINIMAL, |x, z, a, b, c| {
        bit(pa[x], a) * bit(pb, b) * bit(pc[z], c)
    })
    .unwrap()
}
