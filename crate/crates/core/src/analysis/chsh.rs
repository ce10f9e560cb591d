use serde::Serialize;

use crate::correlation::Correlation;
use crate::error::{Error, Result};
use crate::generators::BipartiteBox;

/// Classical bound 2, quantum bound `2 sqrt 2`, algebraic bound 4.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChshValue {
    pub value: f64,
    pub conditioning: String,
}

fn sign(bit: usize) -> f64 {
    if bit % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `sum_{x,y} (-1)^{xy} E(x,y)` with `E(x,y) = sum_{a,b} (-1)^{a+b} p(a,b|x,y)`.
pub fn chsh_value(p: &BipartiteBox) -> f64 {
    let mut total = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let mut e = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    e += sign(a + b) * p.get(x, y, a, b);
                }
            }
            total += sign(x * y) * e;
        }
    }
    total
}

pub fn chsh(p: &BipartiteBox) -> Result<ChshValue> {
    let err = p.normalization_error();
    if err > 1e-9 || p.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidCorrelation(format!(
            "box is not normalized (error {err:.3e})"
        )));
    }
    Ok(ChshValue {
        value: chsh_value(p),
        conditioning: "none".into(),
    })
}

const MIN_CONDITIONING: f64 = 1e-12;

/// CHSH of `p(a,c|x,z,b=b_val)` between Alice and Charlie.
pub fn postselected_chsh(corr: &Correlation, b_val: usize) -> Result<ChshValue> {
    corr.require_minimal()?;
    if b_val >= 2 {
        return Err(Error::Parameter(format!("outcome b={b_val} out of range")));
    }
    let mut norms = [[0.0; 2]; 2];
    for (x, row) in norms.iter_mut().enumerate() {
        for (z, n) in row.iter_mut().enumerate() {
            *n = (0..2)
                .flat_map(|a| (0..2).map(move |c| (a, c)))
                .map(|(a, c)| corr.get(x, z, a, b_val, c))
                .sum();
            if *n < MIN_CONDITIONING {
                return Err(Error::Parameter(format!(
                    "p(b={b_val}|x={x},z={z}) vanishes"
                )));
            }
        }
    }
    let conditional = BipartiteBox::from_fn(|x, z, a, c| corr.get(x, z, a, b_val, c) / norms[x][z]);
    Ok(ChshValue {
        value: chsh_value(&conditional),
        conditioning: format!("b={b_val}"),
    })
}

/// CHSH between Alice and Bob with Charlie's output `c` playing Bob's
/// input: evaluated on `p_z(a,b|x,c) = p(a,b,c|x,z) / p(c|x,z)`.
pub fn fritz_chsh(corr: &Correlation, z: usize) -> Result<ChshValue> {
    corr.require_minimal()?;
    if z >= 2 {
        return Err(Error::Parameter(format!("input z={z} out of range")));
    }
    let mut norms = [[0.0; 2]; 2];
    for (x, row) in norms.iter_mut().enumerate() {
        for (c, n) in row.iter_mut().enumerate() {
            *n = (0..2)
                .flat_map(|a| (0..2).map(move |b| (a, b)))
                .map(|(a, b)| corr.get(x, z, a, b, c))
                .sum();
            if *n < MIN_CONDITIONING {
                return Err(Error::Parameter(format!("p(c={c}|z={z}) vanishes")));
            }
        }
    }
    let conditional = BipartiteBox::from_fn(|x, c, a, b| corr.get(x, z, a, b, c) / norms[x][c]);
    Ok(ChshValue {
        value: chsh_value(&conditional),
        conditioning: format!("z={z}, conditioned on c"),
    })
}
