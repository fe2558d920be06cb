//! Polynomial truncations `q_L` of realized functions and their uniform
//! error on sampled compact sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::NcPoly;
use crate::realization::{RealizedFunction, FLAG_TOL};
use crate::tuple::MatrixTuple;
use crate::CMat;

pub const DEFAULT_WORD_CAP: usize = 4096;

/// Slack allowed between the observed error and the a-priori bound.
const BOUND_SLACK: f64 = 1e-9;

/// `q_L(Z) = D + Σ_{j=0}^{L} C (M A)^j M B` (level-`n` blocks), by Horner's
/// rule.
pub fn partial_sum_eval(f: &RealizedFunction, z: &MatrixTuple, l: usize) -> Result<CMat> {
    let m = f.state_pencil(z)?;
    let (a, b, c, d) = f.colligation().amplify(z.level());
    if f.colligation().dims().dim_x == 0 {
        return Ok(d);
    }
    let mb = &m * &b;
    let ma = &m * &a;
    let mut acc = mb.clone();
    for _ in 0..l {
        acc = &mb + &ma * acc;
    }
    Ok(d + c * acc)
}

/// `q_L` as an nc polynomial, expanding `(Q0 A)^j Q0 B` by word convolution.
/// Coefficients whose largest entry is below `coeff_tol` are dropped.
pub fn extract_nc_polynomial(f: &RealizedFunction, l: usize, coeff_tol: f64, cap: usize) -> Result<NcPoly> {
    let col = f.colligation();
    let q0 = f.q0();
    let d = q0.d();
    let constant = NcPoly::constant(d, col.d().clone())?;
    if col.dims().dim_x == 0 {
        return Ok(constant.prune(coeff_tol));
    }
    let q0x = q0.kron_identity(col.dims().dim_x);
    let g = q0x.right_mul(col.b())?;
    let ma = q0x.right_mul(col.a())?;
    let mut acc = g.clone();
    for _ in 0..l {
        acc = g.add(&ma.mul(&acc)?)?;
        if acc.num_terms() > cap {
            return Err(Error::WordCap { needed: acc.num_terms(), cap });
        }
    }
    Ok(constant.add(&acc.left_mul(col.c())?)?.prune(coeff_tol))
}

/// `ρ^{L+1} / (1 − ρ) · ‖C‖ ‖B‖`.
pub fn apriori_bound(f: &RealizedFunction, rho: f64, l: usize) -> f64 {
    let col = f.colligation();
    rho.powi(l as i32 + 1) / (1.0 - rho) * linalg::norm2(col.c()) * linalg::norm2(col.b())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TruncationReport {
    #[serde(rename = "L")]
    pub l: usize,
    /// `‖S(Z) − q_L(Z)‖` per sample.
    pub errors: Vec<f64>,
    /// Largest `‖Q0(Z)‖` over the samples (a sampled surrogate for the
    /// compact set).
    pub rho: f64,
    pub apriori_bound: f64,
    pub observed_max: f64,
}

pub fn uniform_error_report(f: &RealizedFunction, samples: &[MatrixTuple], l: usize) -> Result<TruncationReport> {
    if linalg::norm2(f.colligation().a()) > 1.0 + FLAG_TOL {
        return Err(Error::InvalidArgument("the error bound needs ‖A‖ ≤ 1".into()));
    }
    let mut rho: f64 = 0.0;
    let mut errors = Vec::with_capacity(samples.len());
    for z in samples {
        let chk = f.q0().in_domain(z)?;
        if !chk.in_domain {
            return Err(Error::OutsideDomain { norm: chk.norm });
        }
        rho = rho.max(chk.norm);
        errors.push(linalg::norm2(&(f.eval(z)? - partial_sum_eval(f, z, l)?)));
    }
    let observed_max = errors.iter().copied().fold(0.0, f64::max);
    let apriori_bound = apriori_bound(f, rho, l);
    if observed_max > apriori_bound + BOUND_SLACK {
        return Err(Error::Consistency(format!(
            "truncation error {observed_max:e} exceeds the bound {apriori_bound:e}"
        )));
    }
    Ok(TruncationReport { l, errors, rho, apriori_bound, observed_max })
}
