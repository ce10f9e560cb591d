//! Conditional distributions `p(a,b,c|x,z)` over the 3-chain scenario.
//!
//! Bob has no input, so the tensor is stored with index order
//! `(x, z, a, b, c)` and flat offset `((((x*|Z|+z)*|A|+a)*|B|+b)*|C|+c)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for nonnegativity and normalization checks.
pub const DEFAULT_ATOL: f64 = 1e-9;

/// Entries in `[-CLAMP_BAND, 0)` are treated as floating point noise by the
/// oracles and clamped to zero.
pub const CLAMP_BAND: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScenarioShape {
    pub card_x: usize,
    pub card_y: usize,
    pub card_z: usize,
    pub card_a: usize,
    pub card_b: usize,
    pub card_c: usize,
}

impl ScenarioShape {
    /// Binary inputs for Alice and Charlie, no input for Bob, binary outputs.
    pub const MINIMAL: ScenarioShape = ScenarioShape {
        card_x: 2,
        card_y: 1,
        card_z: 2,
        card_a: 2,
        card_b: 2,
        card_c: 2,
    };

    pub fn new(
        card_x: usize,
        card_y: usize,
        card_z: usize,
        card_a: usize,
        card_b: usize,
        card_c: usize,
    ) -> Result<Self> {
        let shape = ScenarioShape {
            card_x,
            card_y,
            card_z,
            card_a,
            card_b,
            card_c,
        };
        if [card_x, card_y, card_z, card_a, card_b, card_c].contains(&0) {
            return Err(Error::Structure(format!(
                "all cardinalities must be at least 1, got {shape}"
            )));
        }
        if card_y != 1 {
            return Err(Error::Structure(format!(
                "Bob's input must be trivial (card_y = 1), got {card_y}"
            )));
        }
        Ok(shape)
    }

    /// Number of tensor entries.
    pub fn len(&self) -> usize {
        self.card_x * self.card_z * self.card_a * self.card_b * self.card_c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn offset(&self, x: usize, z: usize, a: usize, b: usize, c: usize) -> usize {
        debug_assert!(x < self.card_x && z < self.card_z);
        debug_assert!(a < self.card_a && b < self.card_b && c < self.card_c);
        (((x * self.card_z + z) * self.card_a + a) * self.card_b + b) * self.card_c + c
    }

    pub fn is_minimal(&self) -> bool {
        *self == Self::MINIMAL
    }

    /// The shape seen after exchanging the roles of Alice and Charlie.
    pub fn mirrored(&self) -> Self {
        ScenarioShape {
            card_x: self.card_z,
            card_z: self.card_x,
            card_a: self.card_c,
            card_c: self.card_a,
            ..*self
        }
    }
}

impl std::fmt::Display for ScenarioShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "inputs {}-{}-{}, outputs {}-{}-{}",
            self.card_x, self.card_y, self.card_z, self.card_a, self.card_b, self.card_c
        )
    }
}

/// Output variable selector for [`Correlation::marginalize`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Output {
    A,
    B,
    C,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub is_valid: bool,
    pub max_negativity: f64,
    pub max_normalization_error: f64,
    /// Flat offsets of negative entries and `(x, z)` blocks (as the offset of
    /// their first entry) that break normalization.
    pub offending_indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct S2Report {
    pub in_s2: bool,
    /// Largest `|sum_b p(a,b,c|x,z) - p(a|x) p(c|z)|`.
    pub max_factorization_violation: f64,
    /// Largest change of `sum_c p(a,b,c|x,z)` across Charlie's inputs.
    pub max_ns_violation_z: f64,
    /// Largest change of `sum_a p(a,b,c|x,z)` across Alice's inputs.
    pub max_ns_violation_x: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Correlation {
    shape: ScenarioShape,
    values: Vec<f64>,
    atol: f64,
}

impl Correlation {
    pub fn new(shape: ScenarioShape, values: Vec<f64>) -> Result<Self> {
        let shape = ScenarioShape::new(
            shape.card_x,
            shape.card_y,
            shape.card_z,
            shape.card_a,
            shape.card_b,
            shape.card_c,
        )?;
        if values.len() != shape.len() {
            return Err(Error::Structure(format!(
                "shape ({shape}) needs {} entries, got {}",
                shape.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Structure(format!("entry {i} is not finite")));
        }
        Ok(Correlation {
            shape,
            values,
            atol: DEFAULT_ATOL,
        })
    }

    /// Builds a tensor by evaluating `f(x, z, a, b, c)` at every index.
    pub fn from_fn<F>(shape: ScenarioShape, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize, usize, usize) -> f64,
    {
        let mut values = Vec::with_capacity(shape.len());
        for x in 0..shape.card_x {
            for z in 0..shape.card_z {
                for a in 0..shape.card_a {
                    for b in 0..shape.card_b {
                        for c in 0..shape.card_c {
                            values.push(f(x, z, a, b, c));
                        }
                    }
                }
            }
        }
        Correlation::new(shape, values)
    }

    pub fn uniform(shape: ScenarioShape) -> Result<Self> {
        let w = 1.0 / (shape.card_a * shape.card_b * shape.card_c) as f64;
        Correlation::from_fn(shape, |_, _, _, _, _| w)
    }

    pub fn with_atol(mut self, atol: f64) -> Self {
        self.atol = atol.abs();
        self
    }

    pub fn shape(&self) -> ScenarioShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn atol(&self) -> f64 {
        self.atol
    }

    #[inline]
    pub fn get(&self, x: usize, z: usize, a: usize, b: usize, c: usize) -> f64 {
        self.values[self.shape.offset(x, z, a, b, c)]
    }

    pub fn validate(&self) -> ValidationReport {
        let s = self.shape;
        let mut max_negativity: f64 = 0.0;
        let mut max_normalization_error: f64 = 0.0;
        let mut offending_indices = Vec::new();

        for (i, &v) in self.values.iter().enumerate() {
            if v < 0.0 {
                max_negativity = max_negativity.max(-v);
                if -v > self.atol {
                    offending_indices.push(i);
                }
            }
        }
        let block = s.card_a * s.card_b * s.card_c;
        for (k, chunk) in self.values.chunks(block).enumerate() {
            let err = (chunk.iter().sum::<f64>() - 1.0).abs();
            max_normalization_error = max_normalization_error.max(err);
            if err > self.atol {
                offending_indices.push(k * block);
            }
        }
        offending_indices.sort_unstable();
        offending_indices.dedup();

        ValidationReport {
            is_valid: max_negativity <= self.atol && max_normalization_error <= self.atol,
            max_negativity,
            max_normalization_error,
            offending_indices,
        }
    }

    /// Sums out every output not listed in `keep`, at fixed inputs `(x, z)`.
    ///
    /// The result is indexed row-major over the kept outputs in `a, b, c`
    /// order regardless of the order in `keep`.
    pub fn marginalize(&self, keep: &[Output], x: usize, z: usize) -> Result<Vec<f64>> {
        let s = self.shape;
        if x >= s.card_x || z >= s.card_z {
            return Err(Error::Structure(format!(
                "inputs (x={x}, z={z}) out of range for {s}"
            )));
        }
        let ka = keep.contains(&Output::A);
        let kb = keep.contains(&Output::B);
        let kc = keep.contains(&Output::C);
        let da = if ka { s.card_a } else { 1 };
        let db = if kb { s.card_b } else { 1 };
        let dc = if kc { s.card_c } else { 1 };
        let mut out = vec![0.0; da * db * dc];
        for a in 0..s.card_a {
            for b in 0..s.card_b {
                for c in 0..s.card_c {
                    let ia = if ka { a } else { 0 };
                    let ib = if kb { b } else { 0 };
                    let ic = if kc { c } else { 0 };
                    out[(ia * db + ib) * dc + ic] += self.get(x, z, a, b, c);
                }
            }
        }
        Ok(out)
    }

    /// `p(a|x)`, averaged over Charlie's input.
    pub fn alice_marginal(&self, a: usize, x: usize) -> f64 {
        let s = self.shape;
        let mut total = 0.0;
        for z in 0..s.card_z {
            for b in 0..s.card_b {
                for c in 0..s.card_c {
                    total += self.get(x, z, a, b, c);
                }
            }
        }
        total / s.card_z as f64
    }

    /// `p(c|z)`, averaged over Alice's input.
    pub fn charlie_marginal(&self, c: usize, z: usize) -> f64 {
        let s = self.shape;
        let mut total = 0.0;
        for x in 0..s.card_x {
            for a in 0..s.card_a {
                for b in 0..s.card_b {
                    total += self.get(x, z, a, b, c);
                }
            }
        }
        total / s.card_x as f64
    }

    /// Evaluates the no-signalling and source-independence conditions that
    /// define the set reachable with arbitrary no-signalling sources.
    pub fn check_s2(&self, tol: f64) -> S2Report {
        let s = self.shape;
        let mut fact: f64 = 0.0;
        let mut ns_x: f64 = 0.0;
        let mut ns_z: f64 = 0.0;

        for x in 0..s.card_x {
            for z in 0..s.card_z {
                for a in 0..s.card_a {
                    for c in 0..s.card_c {
                        let joint: f64 = (0..s.card_b).map(|b| self.get(x, z, a, b, c)).sum();
                        let prod = self.alice_marginal(a, x) * self.charlie_marginal(c, z);
                        fact = fact.max((joint - prod).abs());
                    }
                }
            }
        }
        // sum_a p(a,b,c|x,z) must not depend on x
        for z in 0..s.card_z {
            for b in 0..s.card_b {
                for c in 0..s.card_c {
                    let reference: f64 = (0..s.card_a).map(|a| self.get(0, z, a, b, c)).sum();
                    for x in 1..s.card_x {
                        let m: f64 = (0..s.card_a).map(|a| self.get(x, z, a, b, c)).sum();
                        ns_x = ns_x.max((m - reference).abs());
                    }
                }
            }
        }
        // sum_c p(a,b,c|x,z) must not depend on z
        for x in 0..s.card_x {
            for a in 0..s.card_a {
                for b in 0..s.card_b {
                    let reference: f64 = (0..s.card_c).map(|c| self.get(x, 0, a, b, c)).sum();
                    for z in 1..s.card_z {
                        let m: f64 = (0..s.card_c).map(|c| self.get(x, z, a, b, c)).sum();
                        ns_z = ns_z.max((m - reference).abs());
                    }
                }
            }
        }

        S2Report {
            in_s2: fact <= tol && ns_x <= tol && ns_z <= tol,
            max_factorization_violation: fact,
            max_ns_violation_z: ns_z,
            max_ns_violation_x: ns_x,
        }
    }

    /// Exchanges the roles of Alice and Charlie: `(a, x) <-> (c, z)`.
    pub fn mirror(&self) -> Correlation {
        let shape = self.shape.mirrored();
        let mut values = vec![0.0; shape.len()];
        for x in 0..self.shape.card_x {
            for z in 0..self.shape.card_z {
                for a in 0..self.shape.card_a {
                    for b in 0..self.shape.card_b {
                        for c in 0..self.shape.card_c {
                            values[shape.offset(z, x, c, b, a)] = self.get(x, z, a, b, c);
                        }
                    }
                }
            }
        }
        Correlation {
            shape,
            values,
            atol: self.atol,
        }
    }

    /// Largest entrywise difference, or infinity for mismatched shapes.
    pub fn max_abs_diff(&self, other: &Correlation) -> f64 {
        if self.shape != other.shape {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }

    pub fn require_minimal(&self) -> Result<()> {
        if self.shape.is_minimal() {
            Ok(())
        } else {
            Err(Error::UnsupportedShape(self.shape.to_string()))
        }
    }

    /// Oracle input preparation: clamps entries in the noise band
    /// `[-CLAMP_BAND, 0)` to zero and renormalizes every `(x, z)` block.
    /// Larger negativity or a broken normalization is an error.
    pub fn clamped(&self) -> Result<Correlation> {
        let report = self.validate();
        if report.max_negativity > CLAMP_BAND.max(self.atol) {
            return Err(Error::InvalidCorrelation(format!(
                "negativity {:.3e} exceeds the clamp band",
                report.max_negativity
            )));
        }
        if report.max_normalization_error > self.atol {
            return Err(Error::InvalidCorrelation(format!(
                "normalization error {:.3e} exceeds atol {:.1e}",
                report.max_normalization_error, self.atol
            )));
        }
        let s = self.shape;
        let block = s.card_a * s.card_b * s.card_c;
        let mut values: Vec<f64> = self.values.iter().map(|v| v.max(0.0)).collect();
        for chunk in values.chunks_mut(block) {
            let total: f64 = chunk.iter().sum();
            chunk.iter_mut().for_each(|v| *v /= total);
        }
        Ok(Correlation {
            shape: s,
            values,
            atol: self.atol,
        })
    }
}

/// Entrywise convex combination `sum_k weights[k] * corrs[k]`.
pub fn mix(corrs: &[Correlation], weights: &[f64]) -> Result<Correlation> {
    let first = corrs
        .first()
        .ok_or_else(|| Error::Parameter("mix needs at least one correlation".into()))?;
    if corrs.len() != weights.len() {
        return Err(Error::Parameter(format!(
            "{} correlations but {} weights",
            corrs.len(),
            weights.len()
        )));
    }
    if let Some(bad) = corrs.iter().find(|c| c.shape != first.shape) {
        return Err(Error::Structure(format!(
            "cannot mix shapes ({}) and ({})",
            first.shape, bad.shape
        )));
    }
    let atol = first.atol;
    if weights.iter().any(|w| !w.is_finite() || *w < -atol) {
        return Err(Error::Parameter("mixing weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > atol {
        return Err(Error::Parameter(format!(
            "mixing weights sum to {total}, not 1"
        )));
    }
    let mut values = vec![0.0; first.shape.len()];
    for (corr, &w) in corrs.iter().zip(weights) {
        for (acc, v) in values.iter_mut().zip(&corr.values) {
            *acc += w * v;
        }
    }
    Ok(Correlation {
        shape: first.shape,
        values,
        atol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product(pa: [f64; 2], pb: f64, pc: [f64; 2]) -> Correlation {
        Correlation::from_fn(ScenarioShape::MINIMAL, |x, z, a, b, c| {
            let fa = if a == 1 { pa[x] } else { 1.0 - pa[x] };
            let fb = if b == 1 { pb } else { 1.0 - pb };
            let fc = if c == 1 { pc[z] } else { 1.0 - pc[z] };
            fa * fb * fc
        })
        .unwrap()
    }

    #[test]
    fn offsets_follow_documented_order() {
        let s = ScenarioShape::MINIMAL;
        assert_eq!(s.offset(0, 0, 0, 0, 0), 0);
        assert_eq!(s.offset(0, 0, 0, 0, 1), 1);
        assert_eq!(s.offset(0, 0, 0, 1, 0), 2);
        assert_eq!(s.offset(0, 0, 1, 0, 0), 4);
        assert_eq!(s.offset(0, 1, 0, 0, 0), 8);
        assert_eq!(s.offset(1, 0, 0, 0, 0), 16);
        assert_eq!(s.offset(1, 1, 1, 1, 1), 31);
    }

    #[test]
    fn uniform_is_valid() {
        let u = Correlation::uniform(ScenarioShape::MINIMAL).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.125));
        assert!(u.validate().is_valid);
    }

    #[test]
    fn negative_entry_is_reported() {
        let mut values = vec![0.125; 32];
        values[5] = -0.01;
        let corr = Correlation::new(ScenarioShape::MINIMAL, values).unwrap();
        let report = corr.validate();
        assert!(!report.is_valid);
        assert!((report.max_negativity - 0.01).abs() < 1e-15);
        assert!(report.offending_indices.contains(&5));
    }

    #[test]
    fn wrong_length_is_structural() {
        let err = Correlation::new(ScenarioShape::MINIMAL, vec![0.2; 5]).unwrap_err();
        assert!(matches!(err, Error::Structure(_)));
    }

    #[test]
    fn zero_cardinality_rejected() {
        assert!(ScenarioShape::new(2, 1, 0, 2, 2, 2).is_err());
        assert!(ScenarioShape::new(2, 2, 2, 2, 2, 2).is_err());
    }

    #[test]
    fn marginals_of_uniform() {
        let u = Correlation::uniform(ScenarioShape::MINIMAL).unwrap();
        assert_eq!(u.marginalize(&[Output::A], 0, 0).unwrap(), vec![0.5, 0.5]);
        let all = u
            .marginalize(&[Output::A, Output::B, Output::C], 1, 1)
            .unwrap();
        assert_eq!(all.len(), 8);
        let none = u.marginalize(&[], 1, 0).unwrap();
        assert!((none[0] - 1.0).abs() < 1e-15);
        assert!(u.marginalize(&[Output::A], 2, 0).is_err());
    }

    #[test]
    fn product_distribution_is_in_s2() {
        let p = product([0.3, 0.8], 0.4, [0.1, 0.6]);
        let report = p.check_s2(1e-12);
        assert!(report.in_s2, "{report:?}");
    }

    #[test]
    fn signalling_box_is_not_in_s2() {
        // a = z deterministically, everything else uniform.
        let p = Correlation::from_fn(ScenarioShape::MINIMAL, |_, z, a, _, _| {
            if a == z {
                0.25
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(p.validate().is_valid);
        let report = p.check_s2(1e-9);
        assert!(!report.in_s2);
        assert!(report.max_ns_violation_z > 0.4);
    }

    #[test]
    fn mix_is_idempotent_and_checks_weights() {
        let p = product([0.3, 0.8], 0.4, [0.1, 0.6]);
        let m = mix(&[p.clone(), p.clone()], &[0.5, 0.5]).unwrap();
        assert!(m.max_abs_diff(&p) < 1e-15);
        assert!(mix(&[p.clone(), p.clone()], &[0.7, 0.7]).is_err());
        assert!(mix(&[p.clone(), p.clone()], &[1.5, -0.5]).is_err());
        assert!(mix(&[p.clone()], &[0.5, 0.5]).is_err());
        let other = Correlation::uniform(ScenarioShape::new(2, 1, 2, 2, 1, 2).unwrap()).unwrap();
        assert!(mix(&[p, other], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn mirror_is_an_involution() {
        let p = product([0.3, 0.8], 0.4, [0.1, 0.6]);
        let m = p.mirror();
        assert!((m.get(1, 0, 1, 0, 0) - p.get(0, 1, 0, 0, 1)).abs() < 1e-15);
        assert_eq!(m.mirror(), p);
    }

    #[test]
    fn clamping_band() {
        let mut values = vec![0.125; 32];
        values[0] = -5e-10;
        values[1] = 0.25 + 5e-10;
        let noisy = Correlation::new(ScenarioShape::MINIMAL, values.clone()).unwrap();
        let clean = noisy.clamped().unwrap();
        assert_eq!(clean.get(0, 0, 0, 0, 0), 0.0);
        assert!(clean.validate().max_normalization_error < 1e-15);

        values[0] = -1e-6;
        let bad = Correlation::new(ScenarioShape::MINIMAL, values).unwrap();
        assert!(matches!(bad.clamped(), Err(Error::InvalidCorrelation(_))));
    }
}
