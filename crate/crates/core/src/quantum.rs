//! Dense density-matrix simulation of 3-chain experiments with two 2-qubit
//! sources.
//!
//! Wire order throughout is (Alice qubit, Bob left qubit, Bob right qubit,
//! Charlie qubit); the A-B source feeds wires 1-2 and the B-C source wires
//! 3-4.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::correlation::{Correlation, ScenarioShape};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const SPECTRUM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(dim: usize) -> Self {
        ComplexMatrix(DMatrix::identity(dim, dim))
    }

    /// Builds a matrix from row-major complex entries.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[Complex64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Structure(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Structure("matrix entries must be finite".into()));
        }
        Ok(ComplexMatrix(DMatrix::from_row_slice(rows, cols, data)))
    }

    /// Builds a real matrix from row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        let data: Vec<Complex64> = data.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        Self::from_row_slice(rows, cols, &data)
    }

    /// The rank-one projector `|psi><psi|` onto a normalized `ket`.
    pub fn projector(ket: &[Complex64]) -> Self {
        let v = nalgebra::DVector::from_column_slice(ket);
        ComplexMatrix(&v * v.adjoint())
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        ComplexMatrix(self.0.map(|z| z * factor))
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(ComplexMatrix(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(ComplexMatrix(&self.0 - &other.0))
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.nrows() != other.nrows() || self.ncols() != other.ncols() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&ComplexMatrix(self.0.adjoint()))
    }

    /// Eigenvalues in ascending order; the matrix is assumed Hermitian.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn check_same_dims(&self, other: &ComplexMatrix) -> Result<()> {
        if self.nrows() != other.nrows() || self.ncols() != other.ncols() {
            return Err(Error::Structure(format!(
                "dimension mismatch: {}x{} vs {}x{}",
                self.nrows(),
                self.ncols(),
                other.nrows(),
                other.ncols()
            )));
        }
        Ok(())
    }
}

/// Kronecker product; `m1` indexes the coarse blocks.
pub fn tensor(m1: &ComplexMatrix, m2: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(m1.0.kronecker(&m2.0))
}

pub mod pauli {
    use super::ComplexMatrix;

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    /// `(a X + b Z)`, a real observable in the X-Z plane.
    pub fn xz(a: f64, b: f64) -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[b, a, a, -b]).unwrap()
    }
}

fn real_ket(amplitudes: &[f64]) -> Vec<Complex64> {
    amplitudes.iter().map(|&r| Complex64::new(r, 0.0)).collect()
}

/// `(|00> + |11>)/sqrt(2)`.
pub fn phi_plus_ket() -> Vec<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    real_ket(&[h, 0.0, 0.0, h])
}

/// `(|01> + |10>)/sqrt(2)`.
pub fn psi_plus_ket() -> Vec<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    real_ket(&[0.0, h, h, 0.0])
}

/// `sin(theta)|01> + cos(theta)|10>`.
pub fn psi_theta_ket(theta: f64) -> Vec<Complex64> {
    real_ket(&[0.0, theta.sin(), theta.cos(), 0.0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    matrix: ComplexMatrix,
}

impl DensityState {
    /// Checks hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Structure("density matrix must be square".into()));
        }
        let herm = matrix.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::Parameter(format!(
                "density matrix not Hermitian (error {herm:.2e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Parameter(format!("trace {tr} is not 1")));
        }
        let min_ev = matrix.hermitian_eigenvalues()[0];
        if min_ev < -PSD_TOL {
            return Err(Error::Parameter(format!(
                "density matrix has negative eigenvalue {min_ev:.3e}"
            )));
        }
        Ok(DensityState { matrix })
    }

    pub fn pure(ket: &[Complex64]) -> Result<Self> {
        DensityState::new(ComplexMatrix::projector(ket))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityState {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn phi_plus() -> Self {
        DensityState::pure(&phi_plus_ket()).expect("normalized Bell state")
    }

    pub fn psi_plus() -> Self {
        DensityState::pure(&psi_plus_ket()).expect("normalized Bell state")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Isotropic noise: `v * rho + (1 - v) * I / d`.
pub fn apply_werner(rho: &DensityState, v: f64) -> Result<DensityState> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Parameter(format!("visibility {v} outside [0, 1]")));
    }
    let d = rho.dim();
    let noise = ComplexMatrix::identity(d).scale((1.0 - v) / d as f64);
    DensityState::new(rho.matrix.scale(v).add(&noise)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::Structure("a POVM needs at least one effect".into()))?;
        let dim = first.nrows();
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (k, e) in effects.iter().enumerate() {
            if !e.is_square() || e.nrows() != dim {
                return Err(Error::Structure(format!(
                    "effect {k} is {}x{}, expected {dim}x{dim}",
                    e.nrows(),
                    e.ncols()
                )));
            }
            if e.hermiticity_error() > HERMITIAN_TOL {
                return Err(Error::Parameter(format!("effect {k} is not Hermitian")));
            }
            if e.hermitian_eigenvalues()[0] < -PSD_TOL {
                return Err(Error::Parameter(format!("effect {k} is not positive")));
            }
            total = total.add(e)?;
        }
        let completeness = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if completeness > HERMITIAN_TOL {
            return Err(Error::Parameter(format!(
                "effects sum to identity only within {completeness:.2e}"
            )));
        }
        Ok(Povm { effects })
    }

    /// The two-outcome measurement `{P, I - P}`.
    pub fn binary_from_projector(projector: ComplexMatrix) -> Result<Self> {
        let dim = projector.nrows();
        let complement = ComplexMatrix::identity(dim).sub(&projector)?;
        Povm::new(vec![projector, complement])
    }

    /// The single-outcome (trivial) measurement.
    pub fn trivial(dim: usize) -> Self {
        Povm {
            effects: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }
}

/// Converts a `+-1`-valued observable `O` into the effects `(I+O)/2`
/// (outcome 0) and `(I-O)/2` (outcome 1).
pub fn projective_binary_povm(observable: &ComplexMatrix) -> Result<Povm> {
    if !observable.is_square() || observable.hermiticity_error() > SPECTRUM_TOL {
        return Err(Error::Parameter("observable must be Hermitian".into()));
    }
    let ev = observable.hermitian_eigenvalues();
    if ev.iter().any(|&l| (l.abs() - 1.0).abs() > SPECTRUM_TOL) {
        return Err(Error::Parameter(format!(
            "observable spectrum {ev:?} is not contained in {{+1, -1}}"
        )));
    }
    let id = ComplexMatrix::identity(observable.nrows());
    Povm::new(vec![
        id.add(observable)?.scale(0.5),
        id.sub(observable)?.scale(0.5),
    ])
}

#[derive(Clone, Debug)]
pub struct ChainSetup {
    pub rho_ab: DensityState,
    pub rho_bc: DensityState,
    /// One measurement per value of `x`.
    pub alice: Vec<Povm>,
    pub bob: Povm,
    /// One measurement per value of `z`.
    pub charlie: Vec<Povm>,
}

impl ChainSetup {
    pub fn shape(&self) -> Result<ScenarioShape> {
        let outcomes = |side: &[Povm], who: &str| -> Result<usize> {
            let n = side
                .first()
                .ok_or_else(|| Error::Structure(format!("{who} needs at least one setting")))?
                .outcomes();
            if side.iter().any(|m| m.outcomes() != n || m.dim() != 2) {
                return Err(Error::Structure(format!(
                    "{who}'s measurements must all act on a qubit with {n} outcomes"
                )));
            }
            Ok(n)
        };
        let card_a = outcomes(&self.alice, "Alice")?;
        let card_c = outcomes(&self.charlie, "Charlie")?;
        if self.rho_ab.dim() != 4 || self.rho_bc.dim() != 4 {
            return Err(Error::Structure("both sources must be two-qubit states".into()));
        }
        if self.bob.dim() != 4 {
            return Err(Error::Structure("Bob measures his two qubits jointly".into()));
        }
        ScenarioShape::new(
            self.alice.len(),
            1,
            self.charlie.len(),
            card_a,
            self.bob.outcomes(),
            card_c,
        )
    }
}

/// Born rule `p(a,b,c|x,z) = Tr[(rho_ab (x) rho_bc) (A_x^a (x) B^b (x) C_z^c)]`.
pub fn born_chain(setup: &ChainSetup) -> Result<Correlation> {
    let shape = setup.shape()?;
    let rho = tensor(setup.rho_ab.matrix(), setup.rho_bc.matrix());
    let rho_t = rho.as_matrix().transpose();

    // Bob (x) Charlie effects are reused across Alice's settings.
    let mut bc_effects = Vec::with_capacity(shape.card_z * shape.card_b * shape.card_c);
    for povm in &setup.charlie {
        for b_eff in setup.bob.effects() {
            for c_eff in povm.effects() {
                bc_effects.push(tensor(b_eff, c_eff));
            }
        }
    }

    Correlation::from_fn(shape, |x, z, a, b, c| {
        let bc = &bc_effects[(z * shape.card_b + b) * shape.card_c + c];
        let effect = tensor(&setup.alice[x].effects()[a], bc);
        // Tr(rho E) = sum_ij rho_ji E_ij
        rho_t.component_mul(effect.as_matrix()).sum().re
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn tensor_of_identities() {
        let id4 = tensor(&pauli::identity(), &pauli::identity());
        assert_eq!(id4, ComplexMatrix::identity(4));
    }

    #[test]
    fn tensor_block_convention() {
        let m = tensor(&pauli::x(), &pauli::z());
        assert_eq!(m.get(0, 2), c(1.0));
        assert_eq!(m.get(1, 3), c(-1.0));
        assert_eq!(m.get(0, 0), c(0.0));

        let p0 = ComplexMatrix::projector(&[c(1.0), c(0.0)]);
        let p1 = ComplexMatrix::projector(&[c(0.0), c(1.0)]);
        let d = tensor(&p0, &p1);
        let expected = ComplexMatrix::from_real(
            4,
            4,
            &[
                0.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0,
            ],
        )
        .unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn werner_endpoints() {
        let rho = DensityState::phi_plus();
        assert!(apply_werner(&rho, 1.0).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);
        let mixed = apply_werner(&rho, 0.0).unwrap();
        assert!(mixed.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) < 1e-15);
        assert!(apply_werner(&rho, 1.2).is_err());
        assert!(apply_werner(&rho, -0.1).is_err());
    }

    #[test]
    fn werner_half_spectrum() {
        let ev = apply_werner(&DensityState::phi_plus(), 0.5)
            .unwrap()
            .matrix()
            .hermitian_eigenvalues();
        let expected = [0.125, 0.125, 0.125, 0.625];
        for (l, e) in ev.iter().zip(expected) {
            assert!((l - e).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn binary_povm_of_sigma_z() {
        let povm = projective_binary_povm(&pauli::z()).unwrap();
        let e0 = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let e1 = ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(povm.effects()[0], e0);
        assert_eq!(povm.effects()[1], e1);
    }

    #[test]
    fn binary_povm_of_rotated_observable() {
        let obs = pauli::xz(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
        let povm = projective_binary_povm(&obs).unwrap();
        let d0 = povm.effects()[0].get(0, 0).re;
        let d1 = povm.effects()[0].get(1, 1).re;
        assert!((d0 - (1.0 - FRAC_1_SQRT_2) / 2.0).abs() < 1e-15);
        assert!((d1 - (1.0 + FRAC_1_SQRT_2) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn binary_povm_rejects_wrong_spectrum() {
        let err = projective_binary_povm(&pauli::xz(1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn density_state_checks() {
        let not_unit = ComplexMatrix::identity(2);
        assert!(DensityState::new(not_unit).is_err());
        let negative = ComplexMatrix::from_real(2, 2, &[1.5, 0.0, 0.0, -0.5]).unwrap();
        assert!(DensityState::new(negative).is_err());
        let non_herm = ComplexMatrix::from_real(2, 2, &[0.5, 0.3, 0.0, 0.5]).unwrap();
        assert!(DensityState::new(non_herm).is_err());
    }

    #[test]
    fn incomplete_povm_rejected() {
        let half = ComplexMatrix::identity(2).scale(0.5);
        assert!(Povm::new(vec![half.clone()]).is_err());
        assert!(Povm::new(vec![half.clone(), half]).is_ok());
        assert!(Povm::new(vec![]).is_err());
    }

    #[test]
    fn maximally_mixed_sources_give_rank_weights() {
        let bob = Povm::binary_from_projector(ComplexMatrix::projector(&psi_plus_ket())).unwrap();
        let meas = vec![
            projective_binary_povm(&pauli::x()).unwrap(),
            projective_binary_povm(&pauli::z()).unwrap(),
        ];
        let setup = ChainSetup {
            rho_ab: DensityState::maximally_mixed(4),
            rho_bc: DensityState::maximally_mixed(4),
            alice: meas.clone(),
            bob,
            charlie: meas,
        };
        let p = born_chain(&setup).unwrap();
        for x in 0..2 {
            for z in 0..2 {
                for a in 0..2 {
                    for cc in 0..2 {
                        assert!((p.get(x, z, a, 0, cc) - 1.0 / 16.0).abs() < 1e-15);
                        assert!((p.get(x, z, a, 1, cc) - 3.0 / 16.0).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn born_chain_rejects_wrong_dimensions() {
        let meas = vec![projective_binary_povm(&pauli::x()).unwrap()];
        let setup = ChainSetup {
            rho_ab: DensityState::maximally_mixed(4),
            rho_bc: DensityState::maximally_mixed(2),
            alice: meas.clone(),
            bob: Povm::trivial(4),
            charlie: meas,
        };
        assert!(matches!(born_chain(&setup), Err(Error::Structure(_))));
    }
}
