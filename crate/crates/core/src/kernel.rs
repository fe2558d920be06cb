//! Completely positive maps, Choi matrices and the kernels built on the
//! generalized Szegő kernel `k_Q0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, SteinSolver};
use crate::poly::NcPoly;
use crate::tuple::MatrixTuple;

pub const DEFAULT_PSD_TOL: f64 = 1e-9;
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Relative asymmetry above which a matrix is rejected as non-Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-6;

/// Linear map on `n × n` matrices with `block_dim × block_dim` values.
pub struct CpMap<'a> {
    n: usize,
    block_dim: usize,
    apply: Box<dyn Fn(&CMat) -> Result<CMat> + 'a>,
}

impl<'a> CpMap<'a> {
    pub fn new(n: usize, block_dim: usize, apply: impl Fn(&CMat) -> Result<CMat> + 'a) -> Self {
        CpMap { n, block_dim, apply: Box::new(apply) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn apply(&self, p: &CMat) -> Result<CMat> {
        if p.shape() != (self.n, self.n) {
            return Err(Error::dim(format!("map input must be {0}x{0}", self.n)));
        }
        let out = (self.apply)(p)?;
        if out.shape() != (self.block_dim, self.block_dim) {
            return Err(Error::dim(format!(
                "map produced a {}x{} value, declared {2}x{2}",
                out.nrows(),
                out.ncols(),
                self.block_dim
            )));
        }
        Ok(out)
    }

    /// `‖M(αP + βP′) − αM(P) − βM(P′)‖` for random inputs.
    pub fn linearity_defect<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let p = linalg::random_gaussian(rng, self.n, self.n);
        let q = linalg::random_gaussian(rng, self.n, self.n);
        let (a, b) = (c(0.7, -0.3), c(-1.1, 0.4));
        let lhs = self.apply(&(&p * a + &q * b))?;
        let rhs = self.apply(&p)? * a + self.apply(&q)? * b;
        Ok(linalg::norm2(&(lhs - rhs)))
    }
}

/// `[M(E_ij)]_{i,j}` with the input index `i` outer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiMatrix {
    pub n: usize,
    pub block_dim: usize,
    #[serde(with = "crate::json::matrix")]
    pub matrix: CMat,
}

impl ChoiMatrix {
    pub fn block(&self, i: usize, j: usize) -> CMat {
        let b = self.block_dim;
        self.matrix.view((i * b, j * b), (b, b)).into_owned()
    }
}

pub fn choi_matrix(map: &CpMap<'_>) -> Result<ChoiMatrix> {
    let (n, b) = (map.n, map.block_dim);
    let mut out = linalg::zeros(n * b, n * b);
    for i in 0..n {
        for j in 0..n {
            let mut e = linalg::zeros(n, n);
            e[(i, j)] = c(1.0, 0.0);
            out.view_mut((i * b, j * b), (b, b)).copy_from(&map.apply(&e)?);
        }
    }
    Ok(ChoiMatrix { n, block_dim: b, matrix: out })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Psd,
    NotPsd,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdCertificate {
    pub verdict: Verdict,
    pub min_eig: f64,
    pub max_eig: f64,
    pub tol: f64,
    /// Minimum eigenvalue inside the dead band `±tol·max(1, max_eig)`.
    pub marginal: bool,
}

impl PsdCertificate {
    pub fn is_psd(&self) -> bool {
        self.verdict == Verdict::Psd
    }
}

/// PSD verdict `min_eig ≥ −tol·max(1, max_eig)` for a Hermitian matrix.
///
/// The matrix is symmetrized first; asymmetry beyond [`HERMITICITY_TOL`]
/// (relative to the largest entry) is an error.
pub fn psd_check(m: &CMat, tol: f64) -> Result<PsdCertificate> {
    if m.nrows() != m.ncols() {
        return Err(Error::dim("PSD check needs a square matrix"));
    }
    if !linalg::is_finite(m) {
        return Err(Error::NonFinite);
    }
    let dev = linalg::max_abs(&(m - m.adjoint()));
    if dev > HERMITICITY_TOL * linalg::max_abs(m).max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    let eig = linalg::hermitian_eigenvalues(m);
    let (min_eig, max_eig) = match (eig.first(), eig.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0.0, 0.0),
    };
    let band = tol * max_eig.max(1.0);
    let verdict = if min_eig >= -band { Verdict::Psd } else { Verdict::NotPsd };
    Ok(PsdCertificate { verdict, min_eig, max_eig, tol, marginal: min_eig.abs() <= band })
}

/// Factorization `Choi block (i, j) = B_i B_j*` with `rank` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct KolmogorovFactor {
    pub rank: usize,
    pub blocks: Vec<CMat>,
}

impl KolmogorovFactor {
    pub fn reconstruct(&self) -> CMat {
        let n = self.blocks.len();
        let b = self.blocks.first().map_or(0, |m| m.nrows());
        let mut out = linalg::zeros(n * b, n * b);
        for i in 0..n {
            for j in 0..n {
                let blk = &self.blocks[i] * self.blocks[j].adjoint();
                out.view_mut((i * b, j * b), (b, b)).copy_from(&blk);
            }
        }
        out
    }

    /// `H` of size `b × (rank·n)` (column index `(x, i)`, `x` outer) with
    /// `M(P) = H (I_rank ⊗ P) H*`.
    pub fn h_matrix(&self) -> CMat {
        let n = self.blocks.len();
        let b = self.blocks.first().map_or(0, |m| m.nrows());
        let mut h = linalg::zeros(b, self.rank * n);
        for (i, blk) in self.blocks.iter().enumerate() {
            for x in 0..self.rank {
                h.column_mut(x * n + i).copy_from(&blk.column(x));
            }
        }
        h
    }
}

/// Kolmogorov factor of a PSD Choi matrix, dropping eigenvalues below
/// `rank_tol · max_eig`.
pub fn kolmogorov_factor(choi: &ChoiMatrix, rank_tol: f64) -> Result<KolmogorovFactor> {
    let cert = psd_check(&choi.matrix, DEFAULT_PSD_TOL)?;
    if !cert.is_psd() {
        return Err(Error::NotPsd(cert.min_eig));
    }
    let (n, b) = (choi.n, choi.block_dim);
    let (vals, vecs) = linalg::hermitian_eigh(&choi.matrix);
    let top = vals.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = if top > 0.0 {
        (0..vals.len()).filter(|&k| vals[k] > rank_tol * top).collect()
    } else {
        Vec::new()
    };
    let rank = keep.len();
    let mut f = linalg::zeros(n * b, rank);
    for (col, &k) in keep.iter().enumerate() {
        let s = vals[k].sqrt();
        f.column_mut(col).copy_from(&(vecs.column(k) * c(s, 0.0)));
    }
    let blocks = (0..n).map(|i| f.rows(i * b, b).into_owned()).collect();
    Ok(KolmogorovFactor { rank, blocks })
}

/// The `n × n` blocks `Q_ρ(Z)` of a one-row polynomial evaluated at `Z`.
pub fn pencil_blocks(q0: &NcPoly, z: &MatrixTuple) -> Result<Vec<CMat>> {
    if q0.s() != 1 {
        return Err(Error::InvalidArgument(
            "the Szegő kernel is defined for polynomials with one coefficient row".into(),
        ));
    }
    let n = z.level();
    let v = q0.eval(z)?;
    Ok((0..q0.r()).map(|rho| v.columns(rho * n, n).into_owned()).collect())
}

/// `Φ_{Z,W}(P) = Q0(Z)(I_r ⊗ P)Q0(W)* = Σ_ρ Q_ρ(Z) P Q_ρ(W)*`.
pub fn phi_map(q0: &NcPoly, z: &MatrixTuple, w: &MatrixTuple, p: &CMat) -> Result<CMat> {
    if p.shape() != (z.level(), w.level()) {
        return Err(Error::dim("P must be level(Z) x level(W)"));
    }
    let zb = pencil_blocks(q0, z)?;
    let wb = pencil_blocks(q0, w)?;
    let mut out = linalg::zeros(z.level(), w.level());
    for (a, b) in zb.iter().zip(&wb) {
        out += a * p * b.adjoint();
    }
    Ok(out)
}

fn require_domain(q0: &NcPoly, z: &MatrixTuple) -> Result<f64> {
    let chk = q0.in_domain(z)?;
    if !chk.in_domain {
        return Err(Error::OutsideDomain { norm: chk.norm });
    }
    Ok(chk.norm)
}

/// `k_Q0(Z, W)` as the solution operator of `T − Φ_{Z,W}(T) = P`, with the
/// vectorized system factored once.
pub struct SzegoKernel {
    n: usize,
    m: usize,
    solver: SteinSolver,
}

impl SzegoKernel {
    pub fn new(q0: &NcPoly, z: &MatrixTuple, w: &MatrixTuple) -> Result<Self> {
        require_domain(q0, z)?;
        require_domain(q0, w)?;
        let solver = SteinSolver::new(&pencil_blocks(q0, z)?, &pencil_blocks(q0, w)?)?;
        Ok(SzegoKernel { n: z.level(), m: w.level(), solver })
    }

    pub fn levels(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn apply(&self, p: &CMat) -> Result<CMat> {
        self.solver.solve(p)
    }
}

pub fn szego_kernel_solve(q0: &NcPoly, z: &MatrixTuple, w: &MatrixTuple, p: &CMat) -> Result<CMat> {
    SzegoKernel::new(q0, z, w)?.apply(p)
}

#[derive(Clone, Debug)]
pub struct SeriesResult {
    pub value: CMat,
    /// Index `L` of the last summed term.
    pub terms: usize,
    /// `(ρ_Z ρ_W)^{L+1} / (1 − ρ_Z ρ_W) · ‖P‖`.
    pub tail_bound: f64,
}

const MAX_SERIES_TERMS: usize = 1_000_000;

/// `Σ_{k=0}^{L} Φ^k(P)`, stopping once the geometric tail bound is `≤ tol`.
pub fn szego_kernel_series(
    q0: &NcPoly,
    z: &MatrixTuple,
    w: &MatrixTuple,
    p: &CMat,
    tol: f64,
) -> Result<SeriesResult> {
    if p.shape() != (z.level(), w.level()) {
        return Err(Error::dim("P must be level(Z) x level(W)"));
    }
    let q = require_domain(q0, z)? * require_domain(q0, w)?;
    let zb = pencil_blocks(q0, z)?;
    let wb: Vec<CMat> = pencil_blocks(q0, w)?.iter().map(|b| b.adjoint()).collect();
    let pnorm = linalg::norm2(p);
    let bound = |l: usize| q.powi(l as i32 + 1) / (1.0 - q) * pnorm;
    let mut term = p.clone();
    let mut sum = p.clone();
    let mut l = 0;
    while bound(l) > tol {
        if l >= MAX_SERIES_TERMS {
            return Err(Error::OutsideDomain { norm: q.sqrt() });
        }
        let mut next = linalg::zeros(term.nrows(), term.ncols());
        for (a, b) in zb.iter().zip(&wb) {
            next += a * &term * b;
        }
        term = next;
        sum += &term;
        l += 1;
    }
    Ok(SeriesResult { value: sum, terms: l, tail_bound: bound(l) })
}

/// The de Branges–Rovnyak kernel
/// `a(Z)(I_Y ⊗ k(P))a(W)* − b(Z)(I_U ⊗ k(P))b(W)*` for fixed values of
/// `a` and `b` at `Z` and `W`.
pub struct DbrKernel<'a> {
    szego: SzegoKernel,
    az: &'a CMat,
    aw: &'a CMat,
    bz: &'a CMat,
    bw: &'a CMat,
    dim_y: usize,
    dim_u: usize,
}

impl<'a> DbrKernel<'a> {
    pub fn new(
        szego: SzegoKernel,
        az: &'a CMat,
        aw: &'a CMat,
        bz: &'a CMat,
        bw: &'a CMat,
    ) -> Result<Self> {
        let (n, m) = szego.levels();
        if az.ncols() % n != 0 || bz.ncols() % n != 0 {
            return Err(Error::dim("a(Z), b(Z) columns must be multiples of level(Z)"));
        }
        let (dim_y, dim_u) = (az.ncols() / n, bz.ncols() / n);
        if aw.ncols() != dim_y * m || bw.ncols() != dim_u * m {
            return Err(Error::dim("a(W), b(W) columns do not match a(Z), b(Z)"));
        }
        if az.nrows() != bz.nrows() || aw.nrows() != bw.nrows() {
            return Err(Error::dim("a and b must share their row space"));
        }
        Ok(DbrKernel { szego, az, aw, bz, bw, dim_y, dim_u })
    }

    pub fn out_shape(&self) -> (usize, usize) {
        (self.az.nrows(), self.aw.nrows())
    }

    pub fn apply(&self, p: &CMat) -> Result<CMat> {
        let t = self.szego.apply(p)?;
        let ty = linalg::kron(&linalg::identity(self.dim_y), &t);
        let tu = linalg::kron(&linalg::identity(self.dim_u), &t);
        Ok(self.az * ty * self.aw.adjoint() - self.bz * tu * self.bw.adjoint())
    }
}

#[allow(clippy::too_many_arguments)]
pub fn dbr_kernel(
    q0: &NcPoly,
    z: &MatrixTuple,
    w: &MatrixTuple,
    p: &CMat,
    az: &CMat,
    aw: &CMat,
    bz: &CMat,
    bw: &CMat,
) -> Result<CMat> {
    DbrKernel::new(SzegoKernel::new(q0, z, w)?, az, aw, bz, bw)?.apply(p)
}

/// Evaluator of a kernel: returns the linear map `P ↦ K(Z, W)(P)`.
pub type KernelMap<'a> = Box<dyn Fn(&CMat) -> Result<CMat> + 'a>;

/// Complete positivity of a kernel on the full envelope of a finite set:
/// Choi certificate of `K(⊕Ω, ⊕Ω)`.
pub fn cp_check_finite<'a, K>(
    kernel: K,
    omega: &[MatrixTuple],
    tol: f64,
) -> Result<(PsdCertificate, ChoiMatrix)>
where
    K: Fn(&MatrixTuple, &MatrixTuple) -> Result<KernelMap<'a>>,
{
    let refs: Vec<&MatrixTuple> = omega.iter().collect();
    let z = MatrixTuple::direct_sum_all(&refs)?;
    let map = kernel(&z, &z)?;
    let n = z.level();
    let probe = map(&linalg::zeros(n, n))?;
    if probe.nrows() != probe.ncols() {
        return Err(Error::dim("kernel diagonal values must be square"));
    }
    let cp = CpMap::new(n, probe.nrows(), map);
    let choi = choi_matrix(&cp)?;
    Ok((psd_check(&choi.matrix, tol)?, choi))
}

/// [`cp_check_finite`] for `k_Q0` itself.
pub fn szego_cp_check(q0: &NcPoly, omega: &[MatrixTuple], tol: f64) -> Result<(PsdCertificate, ChoiMatrix)> {
    cp_check_finite(
        |z, w| {
            let k = SzegoKernel::new(q0, z, w)?;
            Ok(Box::new(move |p: &CMat| k.apply(p)) as KernelMap)
        },
        omega,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar(x: f64) -> CMat {
        real_matrix(1, 1, &[x])
    }

    #[test]
    fn choi_of_identity_is_rank_one() {
        let m = CpMap::new(2, 2, |p: &CMat| Ok(p.clone()));
        let ch = choi_matrix(&m).unwrap();
        let cert = psd_check(&ch.matrix, DEFAULT_PSD_TOL).unwrap();
        assert!(cert.is_psd());
        assert!(cert.min_eig.abs() < 1e-14);
        assert!((cert.max_eig - 2.0).abs() < 1e-14);
        assert_eq!(ch.matrix[(0, 3)], c(1.0, 0.0));
    }

    #[test]
    fn transpose_is_not_cp() {
        let m = CpMap::new(2, 2, |p: &CMat| Ok(p.transpose()));
        let ch = choi_matrix(&m).unwrap();
        let cert = psd_check(&ch.matrix, DEFAULT_PSD_TOL).unwrap();
        assert_eq!(cert.verdict, Verdict::NotPsd);
        // the swap matrix has eigenvalues {1, 1, 1, -1}
        assert!((cert.min_eig + 1.0).abs() < 1e-13);
    }

    #[test]
    fn trace_map_is_cp() {
        let m = CpMap::new(2, 2, |p: &CMat| Ok(linalg::identity(2) * p.trace()));
        let ch = choi_matrix(&m).unwrap();
        assert_eq!(ch.matrix, linalg::identity(4));
    }

    #[test]
    fn psd_examples() {
        assert!(psd_check(&linalg::identity(3), 1e-9).unwrap().is_psd());
        let m = real_matrix(2, 2, &[1.0, 0.0, 0.0, -1e-3]);
        assert!(!psd_check(&m, 1e-9).unwrap().is_psd());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = linalg::random_gaussian(&mut rng, 4, 2);
        assert!(psd_check(&(&a * a.adjoint()), 1e-9).unwrap().is_psd());
        let skew = real_matrix(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(psd_check(&skew, 1e-9), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn dead_band_is_marginal() {
        let m = real_matrix(2, 2, &[1.0, 0.0, 0.0, -1e-12]);
        let cert = psd_check(&m, 1e-9).unwrap();
        assert!(cert.is_psd() && cert.marginal);
    }

    #[test]
    fn factor_edge_cases() {
        let zero = ChoiMatrix { n: 2, block_dim: 1, matrix: linalg::zeros(2, 2) };
        let f = kolmogorov_factor(&zero, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank, 0);
        assert!(f.blocks.iter().all(|b| b.ncols() == 0));
        let one = ChoiMatrix { n: 1, block_dim: 1, matrix: scalar(1.0) };
        let f = kolmogorov_factor(&one, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank, 1);
        assert!((f.blocks[0][(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn factor_reconstructs_and_h_matrix_represents_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (n, b, x) = (3, 2, 2);
        let bs: Vec<CMat> = (0..n).map(|_| linalg::random_gaussian(&mut rng, b, x)).collect();
        let map = CpMap::new(n, b, |p: &CMat| {
            let mut out = linalg::zeros(b, b);
            for i in 0..n {
                for j in 0..n {
                    out += &bs[i] * bs[j].adjoint() * p[(i, j)];
                }
            }
            Ok(out)
        });
        let ch = choi_matrix(&map).unwrap();
        let f = kolmogorov_factor(&ch, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank, x);
        assert!(linalg::max_abs(&(f.reconstruct() - &ch.matrix)) < 1e-10);
        let h = f.h_matrix();
        let p = linalg::random_gaussian(&mut rng, n, n);
        let via_h = &h * linalg::kron(&linalg::identity(x), &p) * h.adjoint();
        assert!(linalg::max_abs(&(via_h - map.apply(&p).unwrap())) < 1e-10);
    }

    #[test]
    fn phi_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = NcPoly::row_pencil(2);
        let z0 = MatrixTuple::zero(2, 2);
        let p = linalg::random_gaussian(&mut rng, 2, 2);
        assert_eq!(phi_map(&q, &z0, &z0, &p).unwrap(), linalg::zeros(2, 2));

        let z = MatrixTuple::scalars(&[c(0.1, 0.2), c(-0.3, 0.1)]).unwrap();
        let w = MatrixTuple::scalars(&[c(0.4, 0.0), c(0.2, -0.5)]).unwrap();
        let got = phi_map(&q, &z, &w, &scalar(2.0)).unwrap()[(0, 0)];
        let want = (c(0.1, 0.2) * c(0.4, 0.0) + c(-0.3, 0.1) * c(0.2, 0.5)) * 2.0;
        assert!((got - want).norm() < 1e-15);

        let q1 = NcPoly::row_pencil(1);
        let z = MatrixTuple::random(&mut rng, 1, 2);
        let w = MatrixTuple::random(&mut rng, 1, 3);
        let p = linalg::random_gaussian(&mut rng, 2, 3);
        let want = z.component(1) * &p * w.component(1).adjoint();
        assert!(linalg::max_abs(&(phi_map(&q1, &z, &w, &p).unwrap() - want)) < 1e-14);
    }

    #[test]
    fn szego_scalar_geometric() {
        let q = NcPoly::row_pencil(1);
        let z = MatrixTuple::scalars(&[c(0.5, 0.0)]).unwrap();
        let t = szego_kernel_solve(&q, &z, &z, &scalar(1.0)).unwrap();
        assert!((t[(0, 0)] - c(4.0 / 3.0, 0.0)).norm() < 1e-14);
        let s = szego_kernel_series(&q, &z, &z, &scalar(1.0), 1e-13).unwrap();
        assert!((s.value[(0, 0)] - c(4.0 / 3.0, 0.0)).norm() < 1e-13);
        let zero = szego_kernel_series(&q, &z, &z, &scalar(0.0), 1e-13).unwrap();
        assert_eq!(zero.terms, 0);
        assert_eq!(zero.value, scalar(0.0));
    }

    #[test]
    fn szego_at_origin_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = NcPoly::row_pencil(3);
        let z = MatrixTuple::zero(3, 2);
        let p = linalg::random_gaussian(&mut rng, 2, 2);
        assert!(linalg::max_abs(&(szego_kernel_solve(&q, &z, &z, &p).unwrap() - &p)) < 1e-15);
    }

    #[test]
    fn szego_outside_domain_is_rejected() {
        let q = NcPoly::row_pencil(1);
        let z = MatrixTuple::scalars(&[c(1.5, 0.0)]).unwrap();
        assert!(matches!(SzegoKernel::new(&q, &z, &z), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn dbr_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = NcPoly::row_pencil(2);
        let z = q.sample_domain_point(&mut rng, 2, 0.8).unwrap();
        let w = q.sample_domain_point(&mut rng, 2, 0.8).unwrap();
        let p = linalg::random_gaussian(&mut rng, 2, 2);
        let k = szego_kernel_solve(&q, &z, &w, &p).unwrap();
        let id = linalg::identity(4);
        let zero = linalg::zeros(4, 4);
        let got = dbr_kernel(&q, &z, &w, &p, &id, &id, &zero, &zero).unwrap();
        let want = linalg::kron(&linalg::identity(2), &k);
        assert!(linalg::max_abs(&(got - want)) < 1e-13);
        let a = linalg::random_gaussian(&mut rng, 3, 4);
        let got = dbr_kernel(&q, &z, &w, &p, &a, &a, &a, &a).unwrap();
        assert!(linalg::max_abs(&got) < 1e-13);

        // classical Pick entry (1 - |λ|²)/(1 - |z|²)
        let q1 = NcPoly::row_pencil(1);
        let z = MatrixTuple::scalars(&[c(0.3, 0.4)]).unwrap();
        let lam = CMat::from_element(1, 1, c(0.5, -0.2));
        let one = scalar(1.0);
        let got = dbr_kernel(&q1, &z, &z, &one, &one, &one, &lam, &lam).unwrap();
        let want = (1.0 - 0.29) / (1.0 - 0.25);
        assert!((got[(0, 0)] - c(want, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn cp_check_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let q = NcPoly::row_pencil(2);
        let omega: Vec<MatrixTuple> =
            (1..=2).map(|n| q.sample_domain_point(&mut rng, n, 0.9).unwrap()).collect();
        let (cert, choi) = szego_cp_check(&q, &omega, DEFAULT_PSD_TOL).unwrap();
        assert!(cert.is_psd());
        assert_eq!(choi.n, 3);

        let (cert, _) = cp_check_finite(
            |_, _| Ok(Box::new(|p: &CMat| Ok(-p.clone())) as KernelMap),
            &omega,
            DEFAULT_PSD_TOL,
        )
        .unwrap();
        assert_eq!(cert.verdict, Verdict::NotPsd);

        let h = linalg::random_gaussian(&mut rng, 2, 3);
        let (cert, _) = cp_check_finite(
            |_, _| {
                let h = h.clone();
                Ok(Box::new(move |p: &CMat| Ok(&h * p * h.adjoint())) as KernelMap)
            },
            &omega,
            DEFAULT_PSD_TOL,
        )
        .unwrap();
        assert!(cert.is_psd());
    }

    #[test]
    fn linearity_spot_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lin = CpMap::new(2, 2, |p: &CMat| Ok(p.adjoint()));
        assert!(lin.linearity_defect(&mut rng).unwrap() > 1e-3);
        let lin = CpMap::new(2, 2, |p: &CMat| Ok(p * c(0.0, 2.0)));
        assert!(lin.linearity_defect(&mut rng).unwrap() < 1e-13);
    }
}
