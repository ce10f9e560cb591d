//! Generators for the named correlations of the minimal 3-chain scenario.
//!
//! Quantum generators build a [`ChainSetup`] and go through [`born_chain`];
//! classical sources shared between Bob and Charlie are modelled as the
//! classically correlated state `(|00><00| + |11><11|)/2` read out by
//! Charlie in the computational basis, so every generator uses the same
//! Born-rule path.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Dirichlet, Distribution};
use serde::{Deserialize, Serialize};

use crate::correlation::{mix, Correlation, ScenarioShape};
use crate::error::{Error, Result};
use crate::quantum::{
    apply_werner, born_chain, pauli, projective_binary_povm, psi_theta_ket, tensor, ChainSetup,
    ComplexMatrix, DensityState, Povm,
};

/// Two-party box `p(a,b|x,y)` with binary inputs and outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteBox {
    values: [f64; 16],
}

impl BipartiteBox {
    pub fn from_fn<F: FnMut(usize, usize, usize, usize) -> f64>(mut f: F) -> Self {
        let mut values = [0.0; 16];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        values[Self::offset(x, y, a, b)] = f(x, y, a, b);
                    }
                }
            }
        }
        BipartiteBox { values }
    }

    fn offset(x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * 2 + y) * 2 + a) * 2 + b
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.values[Self::offset(x, y, a, b)]
    }

    pub fn values(&self) -> &[f64; 16] {
        &self.values
    }

    /// Largest deviation of any `(x, y)` block from unit sum.
    pub fn normalization_error(&self) -> f64 {
        self.values
            .chunks(4)
            .map(|c| (c.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `p(a,c|x,z)` of a minimal-shape correlation with Bob's output summed out.
    pub fn alice_charlie_marginal(corr: &Correlation) -> Result<Self> {
        corr.require_minimal()?;
        Ok(BipartiteBox::from_fn(|x, z, a, c| {
            corr.get(x, z, a, 0, c) + corr.get(x, z, a, 1, c)
        }))
    }

    /// Embeds the box as a 3-chain correlation with a single Bob outcome,
    /// Alice and Charlie playing the two parties.
    pub fn to_correlation(&self) -> Result<Correlation> {
        let shape = ScenarioShape::new(2, 1, 2, 2, 1, 2)?;
        Correlation::from_fn(shape, |x, z, a, _, c| self.get(x, z, a, c))
    }

    /// Inverse of [`BipartiteBox::to_correlation`]; also accepts minimal
    /// shapes, summing out Bob.
    pub fn from_correlation(corr: &Correlation) -> Result<Self> {
        let s = corr.shape();
        if s.card_x != 2 || s.card_z != 2 || s.card_a != 2 || s.card_c != 2 {
            return Err(Error::UnsupportedShape(s.to_string()));
        }
        Ok(BipartiteBox::from_fn(|x, z, a, c| {
            (0..s.card_b).map(|b| corr.get(x, z, a, b, c)).sum()
        }))
    }
}

fn check_unit(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::Parameter(format!("{name} = {value} outside [0, 1]")));
    }
    Ok(())
}

/// PR box with visibility `v`: `(1 + v (-1)^(a+b+xy)) / 4`.
pub fn pr_box(v: f64) -> Result<BipartiteBox> {
    check_unit("V", v)?;
    Ok(BipartiteBox::from_fn(|x, y, a, b| {
        let sign = if (a + b + x * y) % 2 == 0 { 1.0 } else { -1.0 };
        (1.0 + v * sign) / 4.0
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostSelectionParams {
    pub v: f64,
    pub p_ps: f64,
}

impl PostSelectionParams {
    pub fn new(v: f64, p_ps: f64) -> Result<Self> {
        check_unit("V", v)?;
        // The largest PR entry is (1+V)/4; the b=1 entries must stay >= 0.
        if p_ps * (1.0 + v) / 4.0 > 0.25 + 1e-15 {
            return Err(Error::Parameter(format!(
                "negative probabilities: p_ps (1+V)/4 = {} exceeds 1/4",
                p_ps * (1.0 + v) / 4.0
            )));
        }
        if !(0.0..=0.5).contains(&p_ps) {
            return Err(Error::Parameter(format!("p_ps = {p_ps} outside [0, 1/2]")));
        }
        Ok(PostSelectionParams { v, p_ps })
    }
}

/// `p(a,0,c|x,z) = p_ps PR_V(a,c|x,z)`, `p(a,1,c|x,z) = 1/4 - p_ps PR_V(a,c|x,z)`.
pub fn post_selection_box(v: f64, p_ps: f64) -> Result<Correlation> {
    let params = PostSelectionParams::new(v, p_ps)?;
    let pr = pr_box(params.v)?;
    Correlation::from_fn(ScenarioShape::MINIMAL, |x, z, a, b, c| {
        let weighted = params.p_ps * pr.get(x, z, a, c);
        if b == 0 {
            weighted
        } else {
            0.25 - weighted
        }
    })
}

/// The local test correlation `p(c|z) p(a,b|x,c)` with `p(c|z) = 1/2`:
/// perfect `a = b` correlation when `x = c`, uniform otherwise.
pub fn local_test() -> Correlation {
    Correlation::from_fn(ScenarioShape::MINIMAL, |x, _, a, b, c| {
        let p_ab = if x != c {
            0.25
        } else if a == b {
            0.5
        } else {
            0.0
        };
        0.5 * p_ab
    })
    .expect("minimal shape")
}

fn povm(observable: ComplexMatrix) -> Povm {
    projective_binary_povm(&observable).expect("+-1 valued observable")
}

/// `(X - Z)/sqrt(2)` and `(X + Z)/sqrt(2)`.
fn chsh_settings() -> Vec<Povm> {
    vec![
        povm(pauli::xz(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)),
        povm(pauli::xz(FRAC_1_SQRT_2, FRAC_1_SQRT_2)),
    ]
}

fn x_and_z() -> Vec<Povm> {
    vec![povm(pauli::x()), povm(pauli::z())]
}

fn werner_phi_plus(v: f64) -> Result<DensityState> {
    apply_werner(&DensityState::phi_plus(), v)
}

/// Classical shared bit `lambda`, uniform.
fn classical_bit_source() -> DensityState {
    let m = ComplexMatrix::from_real(
        4,
        4,
        &[
            0.5, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.5,
        ],
    )
    .expect("4x4");
    DensityState::new(m).expect("valid classical state")
}

/// Bob reads `lambda` from his right qubit and measures `settings[lambda]`
/// on his left qubit.
fn lambda_controlled_bob(settings: &[Povm]) -> Result<Povm> {
    let lambda_proj = [
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0])?,
        ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0])?,
    ];
    let mut effects = Vec::with_capacity(2);
    for b in 0..2 {
        let e = tensor(&settings[0].effects()[b], &lambda_proj[0])
            .add(&tensor(&settings[1].effects()[b], &lambda_proj[1]))?;
        effects.push(e);
    }
    Povm::new(effects)
}

/// Charlie ignores `z` and outputs `lambda`.
fn charlie_outputs_lambda() -> Vec<Povm> {
    vec![povm(pauli::z()), povm(pauli::z())]
}

/// Quantum realization of [`local_test`] with a Werner A-B state of
/// visibility `v`; the B-C source is classical and carries no noise.
pub fn local_test_noisy(v: f64) -> Result<Correlation> {
    check_unit("v", v)?;
    let setup = ChainSetup {
        rho_ab: werner_phi_plus(v)?,
        rho_bc: classical_bit_source(),
        alice: chsh_settings(),
        bob: lambda_controlled_bob(&chsh_settings())?,
        charlie: charlie_outputs_lambda(),
    };
    born_chain(&setup)
}

/// Entanglement swapping: both sources Werner(`|phi+>`, v), Bob's
/// coarse-grained Bell measurement `{|psi+><psi+|, I - |psi+><psi+|}`.
pub fn entanglement_swapping_setup(v: f64) -> Result<ChainSetup> {
    check_unit("v", v)?;
    Ok(ChainSetup {
        rho_ab: werner_phi_plus(v)?,
        rho_bc: werner_phi_plus(v)?,
        alice: chsh_settings(),
        bob: Povm::binary_from_projector(ComplexMatrix::projector(
            &crate::quantum::psi_plus_ket(),
        ))?,
        charlie: x_and_z(),
    })
}

pub fn entanglement_swapping(v: f64) -> Result<Correlation> {
    born_chain(&entanglement_swapping_setup(v)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FritzSide {
    /// Classical source between Bob and Charlie.
    R,
    /// Classical source between Alice and Bob.
    L,
}

/// Wiring embedding of CHSH: Charlie outputs a classical bit `lambda` that
/// selects Bob's measurement on a Werner(`|psi+>`, v) state shared with
/// Alice. Side `L` exchanges the roles of Alice and Charlie.
pub fn fritz(side: FritzSide, v: f64) -> Result<Correlation> {
    check_unit("v", v)?;
    let setup = ChainSetup {
        rho_ab: apply_werner(&DensityState::psi_plus(), v)?,
        rho_bc: classical_bit_source(),
        alice: chsh_settings(),
        bob: lambda_controlled_bob(&x_and_z())?,
        charlie: charlie_outputs_lambda(),
    };
    let right = born_chain(&setup)?;
    Ok(match side {
        FritzSide::R => right,
        FritzSide::L => right.mirror(),
    })
}

/// `mu * post_selection_box(v, p_ps) + (1 - mu) * local_test()`.
pub fn mnn1(mu: f64, v: f64, p_ps: f64) -> Result<Correlation> {
    check_unit("mu", mu)?;
    mix(&[post_selection_box(v, p_ps)?, local_test()], &[mu, 1.0 - mu])
}

/// Quantum flavour of [`mnn1`]: entanglement swapping mixed with the local
/// test, Werner noise `v` on every quantum state.
pub fn mnn1_quantum(mu: f64, v: f64) -> Result<Correlation> {
    check_unit("mu", mu)?;
    mix(
        &[entanglement_swapping(v)?, local_test_noisy(v)?],
        &[mu, 1.0 - mu],
    )
}

/// Both sources Werner(`|phi+>`, v); Alice and Charlie measure `X` or `Z`;
/// Bob projects onto `sin(theta)|01> + cos(theta)|10>`.
pub fn mnn2_setup(theta: f64, v: f64) -> Result<ChainSetup> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::Parameter(format!(
            "theta = {theta} outside [0, pi/2]"
        )));
    }
    check_unit("v", v)?;
    let psi: Vec<Complex64> = psi_theta_ket(theta);
    Ok(ChainSetup {
        rho_ab: werner_phi_plus(v)?,
        rho_bc: werner_phi_plus(v)?,
        alice: x_and_z(),
        bob: Povm::binary_from_projector(ComplexMatrix::projector(&psi))?,
        charlie: x_and_z(),
    })
}

pub fn mnn2(theta: f64, v: f64) -> Result<Correlation> {
    born_chain(&mnn2_setup(theta, v)?)
}

/// The named examples reachable by name from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExampleKind {
    Pr,
    Ps,
    Local,
    Es,
    FritzR,
    FritzL,
    Mnn1,
    Mnn1q,
    Mnn2,
}

impl ExampleKind {
    pub const ALL: [ExampleKind; 9] = [
        ExampleKind::Pr,
        ExampleKind::Ps,
        ExampleKind::Local,
        ExampleKind::Es,
        ExampleKind::FritzR,
        ExampleKind::FritzL,
        ExampleKind::Mnn1,
        ExampleKind::Mnn1q,
        ExampleKind::Mnn2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExampleKind::Pr => "pr",
            ExampleKind::Ps => "ps",
            ExampleKind::Local => "local",
            ExampleKind::Es => "es",
            ExampleKind::FritzR => "fritz-r",
            ExampleKind::FritzL => "fritz-l",
            ExampleKind::Mnn1 => "mnn1",
            ExampleKind::Mnn1q => "mnn1q",
            ExampleKind::Mnn2 => "mnn2",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                let known: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                Error::Parameter(format!(
                    "unknown example {name:?}; expected one of {}",
                    known.join(", ")
                ))
            })
    }

    /// Parameters that must be given.
    pub fn required(self) -> &'static [&'static str] {
        match self {
            ExampleKind::Pr => &["V"],
            ExampleKind::Ps => &["V", "pps"],
            ExampleKind::Local | ExampleKind::Es | ExampleKind::FritzR | ExampleKind::FritzL => {
                &[]
            }
            ExampleKind::Mnn1 => &["mu", "V", "pps"],
            ExampleKind::Mnn1q => &["mu"],
            ExampleKind::Mnn2 => &["theta"],
        }
    }

    /// Parameters that may be given; the visibility `v` defaults to 1.
    /// For `local`, giving `v` selects the noisy quantum realization.
    pub fn optional(self) -> &'static [&'static str] {
        match self {
            ExampleKind::Pr | ExampleKind::Ps | ExampleKind::Mnn1 => &[],
            _ => &["v"],
        }
    }

    pub fn generate(self, params: &BTreeMap<String, f64>) -> Result<Correlation> {
        for key in params.keys() {
            if !self.required().contains(&key.as_str()) && !self.optional().contains(&key.as_str())
            {
                return Err(Error::Parameter(format!(
                    "example {} takes no parameter {key:?}",
                    self.name()
                )));
            }
        }
        let get = |key: &str| {
            params.get(key).copied().ok_or_else(|| {
                Error::Parameter(format!("example {} needs parameter {key}", self.name()))
            })
        };
        let v = params.get("v").copied().unwrap_or(1.0);
        match self {
            ExampleKind::Pr => pr_box(get("V")?)?.to_correlation(),
            ExampleKind::Ps => post_selection_box(get("V")?, get("pps")?),
            ExampleKind::Local => match params.get("v") {
                Some(&v) => local_test_noisy(v),
                None => Ok(local_test()),
            },
            ExampleKind::Es => entanglement_swapping(v),
            ExampleKind::FritzR => fritz(FritzSide::R, v),
            ExampleKind::FritzL => fritz(FritzSide::L, v),
            ExampleKind::Mnn1 => mnn1(get("mu")?, get("V")?, get("pps")?),
            ExampleKind::Mnn1q => mnn1_quantum(get("mu")?, v),
            ExampleKind::Mnn2 => mnn2(get("theta")?, v),
        }
    }
}

/// Explicit two-source classical model for the minimal scenario.
///
/// Strategy `k` of Alice answers `(k >> x) & 1` on input `x`; likewise for
/// Charlie. `bob[j][k]` is the probability that Bob outputs 1 when Alice
/// holds strategy `j` and Charlie strategy `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct BilocalModel {
    pub q1: [f64; 4],
    pub q2: [f64; 4],
    pub bob: [[f64; 4]; 4],
}

impl BilocalModel {
    pub fn to_correlation(&self) -> Correlation {
        Correlation::from_fn(ScenarioShape::MINIMAL, |x, z, a, b, c| {
            let mut total = 0.0;
            for j in (0..4).filter(|j| (j >> x) & 1 == a) {
                for k in (0..4).filter(|k| (k >> z) & 1 == c) {
                    let pb = if b == 1 {
                        self.bob[j][k]
                    } else {
                        1.0 - self.bob[j][k]
                    };
                    total += self.q1[j] * self.q2[k] * pb;
                }
            }
            total
        })
        .expect("minimal shape")
    }

    /// Dirichlet(1) hidden-variable weights and uniform Bob responses.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let dirichlet = Dirichlet::new([1.0; 4]).expect("valid concentration");
        let q1 = dirichlet.sample(rng);
        let q2 = dirichlet.sample(rng);
        let mut bob = [[0.0; 4]; 4];
        for row in bob.iter_mut() {
            for cell in row.iter_mut() {
                *cell = rng.random::<f64>();
            }
        }
        BilocalModel { q1, q2, bob }
    }
}
