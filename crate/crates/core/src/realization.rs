//! Colligations, their transfer functions, and the lurking-isometry
//! synthesis of a colligation from single-point interpolation data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::json::{matrix_from_value, matrix_to_value};
use crate::kernel::{self, CpMap, DbrKernel, PsdCertificate, SzegoKernel};
use crate::linalg::{self, CMat};
use crate::poly::NcPoly;
use crate::tuple::MatrixTuple;

/// Slack allowed in `‖U‖ ≤ 1` and `‖U*U − I‖ ≈ 0` when setting flags.
pub const FLAG_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ColligationDims {
    pub dim_x: usize,
    pub dim_u: usize,
    pub dim_y: usize,
    pub r: usize,
}

impl ColligationDims {
    pub fn new(dim_x: usize, dim_u: usize, dim_y: usize, r: usize) -> Self {
        ColligationDims { dim_x, dim_u, dim_y, r }
    }

    /// Shape of `U = [A B; C D]`.
    pub fn u_shape(&self) -> (usize, usize) {
        (self.r * self.dim_x + self.dim_y, self.dim_x + self.dim_u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColligationFlag {
    Contractive,
    Unitary,
}

/// `U = [A B; C D] : X ⊕ U → (ℂ^r ⊗ X) ⊕ Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Colligation {
    dims: ColligationDims,
    a: CMat,
    b: CMat,
    c: CMat,
    d: CMat,
    flags: Vec<ColligationFlag>,
}

impl Colligation {
    pub fn new(dims: ColligationDims, a: CMat, b: CMat, c: CMat, d: CMat) -> Result<Self> {
        let ColligationDims { dim_x, dim_u, dim_y, r } = dims;
        if r == 0 {
            return Err(Error::InvalidArgument("r must be positive".into()));
        }
        let expect = [
            ("A", &a, (r * dim_x, dim_x)),
            ("B", &b, (r * dim_x, dim_u)),
            ("C", &c, (dim_y, dim_x)),
            ("D", &d, (dim_y, dim_u)),
        ];
        for (name, m, shape) in expect {
            if m.shape() != shape {
                return Err(Error::dim(format!(
                    "block {name} is {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    shape.0,
                    shape.1
                )));
            }
            if !linalg::is_finite(m) {
                return Err(Error::NonFinite);
            }
        }
        let mut col = Colligation { dims, a, b, c, d, flags: Vec::new() };
        col.flags = col.compute_flags();
        Ok(col)
    }

    /// Splits `U` into blocks.
    pub fn from_u(dims: ColligationDims, u: &CMat) -> Result<Self> {
        if u.shape() != dims.u_shape() {
            return Err(Error::dim("U does not match the colligation dimensions"));
        }
        let (rx, x) = (dims.r * dims.dim_x, dims.dim_x);
        Self::new(
            dims,
            u.view((0, 0), (rx, x)).into_owned(),
            u.view((0, x), (rx, dims.dim_u)).into_owned(),
            u.view((rx, 0), (dims.dim_y, x)).into_owned(),
            u.view((rx, x), (dims.dim_y, dims.dim_u)).into_owned(),
        )
    }

    fn compute_flags(&self) -> Vec<ColligationFlag> {
        let u = self.u_matrix();
        let mut flags = Vec::new();
        if linalg::norm2(&u) <= 1.0 + FLAG_TOL {
            flags.push(ColligationFlag::Contractive);
        }
        let (rows, cols) = u.shape();
        if rows == cols
            && linalg::norm2(&(u.adjoint() * &u - linalg::identity(cols))) <= FLAG_TOL
        {
            flags.push(ColligationFlag::Unitary);
        }
        flags
    }

    pub fn dims(&self) -> ColligationDims {
        self.dims
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn c(&self) -> &CMat {
        &self.c
    }

    pub fn d(&self) -> &CMat {
        &self.d
    }

    pub fn flags(&self) -> &[ColligationFlag] {
        &self.flags
    }

    pub fn is_contractive(&self) -> bool {
        self.flags.contains(&ColligationFlag::Contractive)
    }

    pub fn is_unitary(&self) -> bool {
        self.flags.contains(&ColligationFlag::Unitary)
    }

    pub fn u_matrix(&self) -> CMat {
        let (rows, cols) = self.dims.u_shape();
        let (rx, x) = (self.dims.r * self.dims.dim_x, self.dims.dim_x);
        let mut u = linalg::zeros(rows, cols);
        u.view_mut((0, 0), (rx, x)).copy_from(&self.a);
        u.view_mut((0, x), (rx, self.dims.dim_u)).copy_from(&self.b);
        u.view_mut((rx, 0), (self.dims.dim_y, x)).copy_from(&self.c);
        u.view_mut((rx, x), (self.dims.dim_y, self.dims.dim_u)).copy_from(&self.d);
        u
    }

    /// Certificate for `I − U*U ⪰ 0`.
    pub fn contraction_check(&self, tol: f64) -> Result<PsdCertificate> {
        let u = self.u_matrix();
        kernel::psd_check(&(linalg::identity(u.ncols()) - u.adjoint() * &u), tol)
    }

    /// Level-`n` blocks `(A ⊗ I_n, B ⊗ I_n, C ⊗ I_n, D ⊗ I_n)`.
    ///
    /// With the crate's layout (coefficient index outer, point index inner)
    /// these act on `(ℂ^r ⊗ X)^n` ordered as `(ρ, x, i)`, which is the row
    /// order of `Q0(Z) ⊗ I_X` columns used by [`RealizedFunction::eval`].
    pub fn amplify(&self, n: usize) -> (CMat, CMat, CMat, CMat) {
        let id = linalg::identity(n);
        (
            linalg::kron(&self.a, &id),
            linalg::kron(&self.b, &id),
            linalg::kron(&self.c, &id),
            linalg::kron(&self.d, &id),
        )
    }

    /// Random colligation, Haar unitary when `unitary` is set, otherwise a
    /// Gaussian matrix rescaled to norm `1 − 1e-6`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dims: ColligationDims, unitary: bool) -> Result<Self> {
        let (rows, cols) = dims.u_shape();
        if dims.r == 0 || rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("colligation dimensions must be positive".into()));
        }
        let u = if unitary {
            if rows != cols {
                return Err(Error::InvalidArgument(format!(
                    "a unitary colligation needs r*dimX + dimY = dimX + dimU (got {rows} vs {cols})"
                )));
            }
            linalg::random_unitary(rng, rows)
        } else {
            let g = linalg::random_gaussian(rng, rows, cols);
            let s = linalg::norm2(&g);
            g.unscale(s) * linalg::c(1.0 - 1e-6, 0.0)
        };
        Self::from_u(dims, &u)
    }
}

pub fn random_contractive_colligation(dims: ColligationDims, seed: u64, unitary: bool) -> Result<Colligation> {
    Colligation::random(&mut ChaCha8Rng::seed_from_u64(seed), dims, unitary)
}

#[derive(Serialize, Deserialize)]
struct ColligationRepr {
    #[serde(rename = "dimX")]
    dim_x: usize,
    #[serde(rename = "dimU")]
    dim_u: usize,
    #[serde(rename = "dimY")]
    dim_y: usize,
    r: usize,
    #[serde(rename = "A")]
    a: serde_json::Value,
    #[serde(rename = "B")]
    b: serde_json::Value,
    #[serde(rename = "C")]
    c: serde_json::Value,
    #[serde(rename = "D")]
    d: serde_json::Value,
    #[serde(default)]
    flags: Vec<ColligationFlag>,
}

impl Serialize for Colligation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ColligationRepr {
            dim_x: self.dims.dim_x,
            dim_u: self.dims.dim_u,
            dim_y: self.dims.dim_y,
            r: self.dims.r,
            a: matrix_to_value(&self.a),
            b: matrix_to_value(&self.b),
            c: matrix_to_value(&self.c),
            d: matrix_to_value(&self.d),
            flags: self.flags.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Colligation {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = ColligationRepr::deserialize(de)?;
        let dims = ColligationDims::new(r.dim_x, r.dim_u, r.dim_y, r.r);
        let parse = |v: &serde_json::Value, cols: usize| matrix_from_value(v, Some(cols)).map_err(D::Error::custom);
        let a = parse(&r.a, r.dim_x)?;
        let b = parse(&r.b, r.dim_u)?;
        let c = parse(&r.c, r.dim_x)?;
        let d = parse(&r.d, r.dim_u)?;
        Colligation::new(dims, a, b, c, d).map_err(D::Error::custom)
    }
}

/// `S(Z) = D ⊗ I_n + (C ⊗ I_n)(I − M (A ⊗ I_n))⁻¹ M (B ⊗ I_n)` with
/// `M = (Q0 ⊗ I_X)(Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizedFunction {
    colligation: Colligation,
    q0: NcPoly,
}

impl RealizedFunction {
    pub fn new(colligation: Colligation, q0: NcPoly) -> Result<Self> {
        if q0.s() != 1 {
            return Err(Error::InvalidArgument("realizations need a one-row Q0".into()));
        }
        if q0.r() != colligation.dims.r {
            return Err(Error::dim(format!(
                "Q0 has {} columns but the colligation has r = {}",
                q0.r(),
                colligation.dims.r
            )));
        }
        Ok(RealizedFunction { colligation, q0 })
    }

    pub fn colligation(&self) -> &Colligation {
        &self.colligation
    }

    pub fn q0(&self) -> &NcPoly {
        &self.q0
    }

    /// `M = (Q0 ⊗ I_X)(Z)`, of size `X n × r X n`, after a domain check.
    pub fn state_pencil(&self, z: &MatrixTuple) -> Result<CMat> {
        let chk = self.q0.in_domain(z)?;
        if !chk.in_domain {
            return Err(Error::OutsideDomain { norm: chk.norm });
        }
        self.q0.kron_identity(self.colligation.dims.dim_x).eval(z)
    }

    pub fn eval(&self, z: &MatrixTuple) -> Result<CMat> {
        let n = z.level();
        let m = self.state_pencil(z)?;
        let (a, b, c, d) = self.colligation.amplify(n);
        if self.colligation.dims.dim_x == 0 {
            return Ok(d);
        }
        let resolvent = linalg::identity(m.nrows()) - &m * &a;
        let x = linalg::solve(&resolvent, &(&m * &b))?;
        Ok(d + c * x)
    }
}

pub fn transfer_eval(f: &RealizedFunction, z: &MatrixTuple) -> Result<CMat> {
    f.eval(z)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthesisOptions {
    pub psd_tol: f64,
    pub rank_tol: f64,
    /// Gram mismatch above `100 · gram_tol · max(1, ‖D‖²)` is an internal error.
    pub gram_tol: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions { psd_tol: kernel::DEFAULT_PSD_TOL, rank_tol: kernel::DEFAULT_RANK_TOL, gram_tol: 1e-9 }
    }
}

#[derive(Clone, Debug)]
pub struct Synthesis {
    pub function: RealizedFunction,
    pub certificate: PsdCertificate,
    /// `‖Dᴴ D − Rᴴ R‖` for the two vector families.
    pub gram_residual: f64,
    /// `‖a0 S(Z0) − b0‖`.
    pub interp_residual: f64,
}

/// Builds a contractive colligation whose transfer function `S` satisfies
/// `a0 S(Z0) = b0`.
///
/// The de Branges–Rovnyak map `Γ(P) = a0(I_Y ⊗ k(P))a0* − b0(I_U ⊗ k(P))b0*`
/// at `(Z0, Z0)` is factored as `H (I_X ⊗ P) H*`; substituting
/// `P − Φ(P)` gives the Gram identity between the families
/// `D = [(M* H*)(·, i); a0*(·, i)]` and `R = [H*(·, i); b0*(·, i)]`
/// indexed by point row `i` and output row `e`. The contraction
/// `V = R D⁺` maps one family to the other and `U = V*`.
pub fn lurking_isometry_synthesize(
    q0: &NcPoly,
    z0: &MatrixTuple,
    a0: &CMat,
    b0: &CMat,
    opts: SynthesisOptions,
) -> Result<Synthesis> {
    let n = z0.level();
    let e = a0.nrows();
    if b0.nrows() != e || a0.ncols() % n != 0 || b0.ncols() % n != 0 {
        return Err(Error::dim("a0 and b0 must share rows and have columns in multiples of n"));
    }
    let (dim_y, dim_u) = (a0.ncols() / n, b0.ncols() / n);
    let r = q0.r();

    let szego = SzegoKernel::new(q0, z0, z0)?;
    let dbr = DbrKernel::new(szego, a0, a0, b0, b0)?;
    let map = CpMap::new(n, e, |p: &CMat| dbr.apply(p));
    let choi = kernel::choi_matrix(&map)?;
    let certificate = kernel::psd_check(&choi.matrix, opts.psd_tol)?;
    if !certificate.is_psd() {
        return Err(Error::NotPsd(certificate.min_eig));
    }
    let factor = kernel::kolmogorov_factor(&choi, opts.rank_tol)?;
    let x = factor.rank;
    let h = factor.h_matrix().adjoint();
    let m = q0.kron_identity(x).eval(z0)?;
    let mh = m.adjoint() * &h;

    let cols = n * e;
    let mut dmat = linalg::zeros(r * x + dim_y, cols);
    let mut rmat = linalg::zeros(x + dim_u, cols);
    for i in 0..n {
        for k in 0..e {
            let col = i * e + k;
            for rx in 0..r * x {
                dmat[(rx, col)] = mh[(rx * n + i, k)];
            }
            for y in 0..dim_y {
                dmat[(r * x + y, col)] = a0[(k, y * n + i)].conj();
            }
            for xx in 0..x {
                rmat[(xx, col)] = h[(xx * n + i, k)];
            }
            for u in 0..dim_u {
                rmat[(x + u, col)] = b0[(k, u * n + i)].conj();
            }
        }
    }
    let gram = dmat.adjoint() * &dmat - rmat.adjoint() * &rmat;
    let gram_residual = linalg::norm2(&gram);
    let scale = linalg::norm2(&dmat).powi(2).max(1.0);
    if gram_residual > 100.0 * opts.gram_tol * scale {
        return Err(Error::Consistency(format!(
            "Gram mismatch {gram_residual:e} between the isometry families"
        )));
    }
    let v = linalg::clamp_to_contraction(&(&rmat * linalg::pinv(&dmat, opts.rank_tol)));
    let dims = ColligationDims::new(x, dim_u, dim_y, r);
    let colligation = Colligation::from_u(dims, &v.adjoint())?;
    let function = RealizedFunction::new(colligation, q0.clone())?;
    let interp_residual = linalg::norm2(&(a0 * function.eval(z0)? - b0));
    Ok(Synthesis { function, certificate, gram_residual, interp_residual })
}
