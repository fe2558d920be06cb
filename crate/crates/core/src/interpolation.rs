//! Feasibility certificates for interpolation problems and the end-to-end
//! solve pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::json::matrix_from_value;
use crate::kernel::{self, pencil_blocks, ChoiMatrix, CpMap, PsdCertificate, SzegoKernel};
use crate::linalg::{self, c, CMat, SteinSolver};
use crate::poly::NcPoly;
use crate::realization::{lurking_isometry_synthesize, RealizedFunction, SynthesisOptions};
use crate::tuple::MatrixTuple;

/// Data of the left-tangential problem `A0 S(Z0) = B0`.
///
/// `A0` is `e × (dimY·n)` and `B0` is `e × (dimU·n)`; their rows are not
/// structured, so `e` is any positive count (`dimE·n` in the usual setup).
#[derive(Clone, Debug, PartialEq)]
pub struct PickProblem {
    q0: NcPoly,
    z0: MatrixTuple,
    a0: CMat,
    b0: CMat,
}

impl PickProblem {
    pub fn new(q0: NcPoly, z0: MatrixTuple, a0: CMat, b0: CMat) -> Result<Self> {
        if q0.s() != 1 {
            return Err(Error::InvalidArgument("Q0 must have one coefficient row".into()));
        }
        if q0.d() != z0.d() {
            return Err(Error::dim("Q0 and Z0 have different variable counts"));
        }
        let n = z0.level();
        if a0.nrows() != b0.nrows() || a0.nrows() == 0 {
            return Err(Error::dim("A0 and B0 must share a nonempty row space"));
        }
        if a0.ncols() % n != 0 || b0.ncols() % n != 0 || a0.ncols() == 0 || b0.ncols() == 0 {
            return Err(Error::dim("A0 and B0 columns must be positive multiples of the level"));
        }
        let chk = q0.in_domain(&z0)?;
        if !chk.in_domain {
            return Err(Error::OutsideDomain { norm: chk.norm });
        }
        Ok(PickProblem { q0, z0, a0, b0 })
    }

    /// `S(Z0) = Λ0`, i.e. `A0 = I`.
    pub fn value_problem(q0: NcPoly, z0: MatrixTuple, lambda0: CMat) -> Result<Self> {
        let a0 = linalg::identity(lambda0.nrows());
        Self::new(q0, z0, a0, lambda0)
    }

    pub fn q0(&self) -> &NcPoly {
        &self.q0
    }

    pub fn z0(&self) -> &MatrixTuple {
        &self.z0
    }

    pub fn a0(&self) -> &CMat {
        &self.a0
    }

    pub fn b0(&self) -> &CMat {
        &self.b0
    }

    pub fn level(&self) -> usize {
        self.z0.level()
    }

    pub fn rows(&self) -> usize {
        self.a0.nrows()
    }

    pub fn dim_y(&self) -> usize {
        self.a0.ncols() / self.level()
    }

    pub fn dim_u(&self) -> usize {
        self.b0.ncols() / self.level()
    }
}

#[derive(Deserialize)]
struct PickRepr {
    #[serde(rename = "Q0")]
    q0: Option<NcPoly>,
    #[serde(rename = "Z0")]
    z0: MatrixTuple,
    #[serde(rename = "A0")]
    a0: Option<serde_json::Value>,
    #[serde(rename = "B0")]
    b0: serde_json::Value,
}

/// Accepts `{"Q0", "Z0", "A0", "B0"}`; `Q0` defaults to the row pencil and
/// `A0` to the identity.
impl<'de> Deserialize<'de> for PickProblem {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = PickRepr::deserialize(de)?;
        let q0 = r.q0.unwrap_or_else(|| NcPoly::row_pencil(r.z0.d()));
        let b0 = matrix_from_value(&r.b0, None).map_err(D::Error::custom)?;
        let a0 = match r.a0 {
            Some(v) => matrix_from_value(&v, None).map_err(D::Error::custom)?,
            None => linalg::identity(b0.nrows()),
        };
        PickProblem::new(q0, r.z0, a0, b0).map_err(D::Error::custom)
    }
}

/// Single-point problem on `⊕ Z^(k)` with block-diagonal data.
pub fn multi_point_to_single(problems: &[PickProblem]) -> Result<PickProblem> {
    let Some(first) = problems.first() else {
        return Err(Error::InvalidArgument("no interpolation problems given".into()));
    };
    for p in problems {
        if p.q0 != first.q0 {
            return Err(Error::InvalidArgument("problems must share Q0".into()));
        }
        if p.dim_y() != first.dim_y() || p.dim_u() != first.dim_u() {
            return Err(Error::dim("problems must share dimY and dimU"));
        }
    }
    let points: Vec<&MatrixTuple> = problems.iter().map(|p| &p.z0).collect();
    let z0 = MatrixTuple::direct_sum_all(&points)?;
    let rows: Vec<usize> = problems.iter().map(PickProblem::rows).collect();
    let levels: Vec<usize> = problems.iter().map(PickProblem::level).collect();
    let a: Vec<&CMat> = problems.iter().map(|p| &p.a0).collect();
    let b: Vec<&CMat> = problems.iter().map(|p| &p.b0).collect();
    let a0 = linalg::direct_sum_blocks(&a, 1, &rows, first.dim_y(), &levels)?;
    let b0 = linalg::direct_sum_blocks(&b, 1, &rows, first.dim_u(), &levels)?;
    PickProblem::new(first.q0.clone(), z0, a0, b0)
}

#[derive(Clone, Debug)]
pub struct PickCertificate {
    pub certificate: PsdCertificate,
    pub choi: ChoiMatrix,
    pub amplification: usize,
}

/// Choi certificate of `P ↦ A0(I_Y ⊗ k(P))A0* − B0(I_U ⊗ k(P))B0*` at the
/// `k`-fold amplification `⊕_k Z0` (default `k` = number of rows of `A0`).
///
/// At `⊕_k Z0` the kernel acts blockwise, `k(⊕Z0, ⊕Z0)(P)_{ij} =
/// k(Z0, Z0)(P_{ij})`, so a single factorization at `Z0` serves every block.
pub fn pick_certificate(p: &PickProblem, amplification: Option<usize>, tol: f64) -> Result<PickCertificate> {
    let k = amplification.unwrap_or(p.rows());
    if k == 0 {
        return Err(Error::InvalidArgument("amplification must be positive".into()));
    }
    let (n, e) = (p.level(), p.rows());
    let base = SzegoKernel::new(&p.q0, &p.z0, &p.z0)?;
    let a = linalg::amplify_value(&p.a0, 1, e, p.dim_y(), n, k)?;
    let b = linalg::amplify_value(&p.b0, 1, e, p.dim_u(), n, k)?;
    let (dy, du) = (p.dim_y(), p.dim_u());
    let big = k * n;
    let map = CpMap::new(big, k * e, |pm: &CMat| {
        let mut t = linalg::zeros(big, big);
        for i in 0..k {
            for j in 0..k {
                let blk = pm.view((i * n, j * n), (n, n)).into_owned();
                t.view_mut((i * n, j * n), (n, n)).copy_from(&base.apply(&blk)?);
            }
        }
        let ty = linalg::kron(&linalg::identity(dy), &t);
        let tu = linalg::kron(&linalg::identity(du), &t);
        Ok(&a * ty * a.adjoint() - &b * tu * b.adjoint())
    });
    let choi = kernel::choi_matrix(&map)?;
    let certificate = kernel::psd_check(&choi.matrix, tol)?;
    Ok(PickCertificate { certificate, choi, amplification: k })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub amplification: Option<usize>,
    /// Number of domain samples for the contractivity check, spread over
    /// levels 1, 2, 3.
    pub samples: usize,
    pub seed: u64,
    pub synthesis: SynthesisOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: kernel::DEFAULT_PSD_TOL,
            amplification: None,
            samples: 100,
            seed: 0,
            synthesis: SynthesisOptions::default(),
        }
    }
}

/// Largest interpolation residual accepted by [`solve_pick`], relative to
/// `max(1, ‖B0‖)`.
pub const INTERP_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct ContractivityReport {
    pub samples: usize,
    pub max_norm: f64,
}

#[derive(Clone, Debug)]
pub struct PickSolution {
    pub function: RealizedFunction,
    pub interp_residual: f64,
    pub gram_residual: f64,
    pub contractivity: ContractivityReport,
}

#[derive(Clone, Debug)]
pub struct PickOutcome {
    pub certificate: PickCertificate,
    pub solution: Option<PickSolution>,
}

/// Certify, synthesize and verify. Infeasible data gives `solution: None`.
pub fn solve_pick(p: &PickProblem, opts: SolveOptions) -> Result<PickOutcome> {
    let certificate = pick_certificate(p, opts.amplification, opts.tol)?;
    if !certificate.certificate.is_psd() {
        return Ok(PickOutcome { certificate, solution: None });
    }
    let mut syn_opts = opts.synthesis;
    syn_opts.psd_tol = opts.tol;
    let syn = lurking_isometry_synthesize(&p.q0, &p.z0, &p.a0, &p.b0, syn_opts)?;
    let scale = linalg::norm2(&p.b0).max(1.0);
    if syn.interp_residual > INTERP_TOL * scale {
        return Err(Error::Consistency(format!(
            "synthesized function misses the data by {:e}",
            syn.interp_residual
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut max_norm: f64 = 0.0;
    for s in 0..opts.samples {
        let z = p.q0.sample_domain_point(&mut rng, 1 + s % 3, 0.99)?;
        max_norm = max_norm.max(linalg::norm2(&syn.function.eval(&z)?));
    }
    Ok(PickOutcome {
        certificate,
        solution: Some(PickSolution {
            function: syn.function,
            interp_residual: syn.interp_residual,
            gram_residual: syn.gram_residual,
            contractivity: ContractivityReport { samples: opts.samples, max_norm },
        }),
    })
}

/// Function argument of the LTOA evaluations.
#[derive(Clone, Copy, Debug)]
pub enum LtoaFunction<'a> {
    Polynomial(&'a NcPoly),
    /// Must be realized over the row pencil.
    Realized(&'a RealizedFunction),
}

fn require_row_domain(z0: &MatrixTuple) -> Result<()> {
    let chk = NcPoly::row_pencil(z0.d()).in_domain(z0)?;
    if !chk.in_domain {
        return Err(Error::OutsideDomain { norm: chk.norm });
    }
    Ok(())
}

/// `Σ_w Z0^{wᵀ} X S_w` (or `Σ_w Z0^w X S_w` when `twisted`).
///
/// Realized functions are summed in closed form: the untwisted sum is
/// `X D + Σ_j Z_j K B_j` with `K − Σ_j Z_j K A_j = X C`, the twisted sum
/// contracts `(I − Σ_j Z_j ⊗ A_j)⁻¹ Σ_j Z_j ⊗ B_j` against `X C`.
pub fn ltoa_eval_with(s: LtoaFunction<'_>, z0: &MatrixTuple, x: &CMat, twisted: bool) -> Result<CMat> {
    require_row_domain(z0)?;
    let n = z0.level();
    if x.nrows() != n {
        return Err(Error::dim("X must have level(Z0) rows"));
    }
    match s {
        LtoaFunction::Polynomial(p) => {
            if p.d() != z0.d() || p.s() != x.ncols() {
                return Err(Error::dim("polynomial coefficients do not match X"));
            }
            let mut out = linalg::zeros(n, p.r());
            for (w, coef) in p.terms() {
                let word = if twisted { w.clone() } else { w.transpose() };
                out += z0.eval_word(&word)? * x * coef;
            }
            Ok(out)
        }
        LtoaFunction::Realized(f) => {
            let d = z0.d();
            if *f.q0() != NcPoly::row_pencil(d) {
                return Err(Error::InvalidArgument(
                    "LTOA evaluation of a realized function needs the row-pencil Q0".into(),
                ));
            }
            let col = f.colligation();
            let dims = col.dims();
            if x.ncols() != dims.dim_y {
                return Err(Error::dim("X must have dimY columns"));
            }
            let xd = x * col.d();
            if dims.dim_x == 0 {
                return Ok(xd);
            }
            let nx = dims.dim_x;
            let a_j = |j: usize| col.a().rows(j * nx, nx).into_owned();
            let b_j = |j: usize| col.b().rows(j * nx, nx).into_owned();
            let xc = x * col.c();
            if twisted {
                twisted_realized(z0, &xc, &xd, dims.dim_u, nx, a_j, b_j)
            } else {
                let lefts: Vec<CMat> = z0.components().to_vec();
                let rights: Vec<CMat> = (0..d).map(|j| a_j(j).adjoint()).collect();
                let k = SteinSolver::new(&lefts, &rights)?.solve(&xc)?;
                let mut out = xd;
                for j in 0..d {
                    out += z0.components()[j].clone() * &k * b_j(j);
                }
                Ok(out)
            }
        }
    }
}

fn twisted_realized(
    z0: &MatrixTuple,
    xc: &CMat,
    xd: &CMat,
    dim_u: usize,
    nx: usize,
    a_j: impl Fn(usize) -> CMat,
    b_j: impl Fn(usize) -> CMat,
) -> Result<CMat> {
    let n = z0.level();
    let mut t = linalg::identity(n * nx);
    let mut g = linalg::zeros(n * nx, n * dim_u);
    for (j, zj) in z0.components().iter().enumerate() {
        t -= linalg::kron(zj, &a_j(j));
        g += linalg::kron(zj, &b_j(j));
    }
    let g = linalg::solve(&t, &g)?;
    let mut out = xd.clone();
    for p in 0..n {
        for q in 0..dim_u {
            let mut acc = c(0.0, 0.0);
            for pp in 0..n {
                for x in 0..nx {
                    acc += g[(p * nx + x, pp * dim_u + q)] * xc[(pp, x)];
                }
            }
            out[(p, q)] += acc;
        }
    }
    Ok(out)
}

pub fn ltoa_eval(s: LtoaFunction<'_>, z0: &MatrixTuple, x: &CMat) -> Result<CMat> {
    ltoa_eval_with(s, z0, x, false)
}

pub fn twisted_ltoa_eval(s: LtoaFunction<'_>, z0: &MatrixTuple, x: &CMat) -> Result<CMat> {
    ltoa_eval_with(s, z0, x, true)
}

/// Data `(Z0, X, Y)` of the problem `(X S)^∧L(Z0) = Y`, with `X` of size
/// `n × dimY` and `Y` of size `n × dimU`.
#[derive(Clone, Debug, PartialEq)]
pub struct LtoaProblem {
    pub z0: MatrixTuple,
    pub x: CMat,
    pub y: CMat,
}

impl LtoaProblem {
    pub fn new(z0: MatrixTuple, x: CMat, y: CMat) -> Result<Self> {
        let n = z0.level();
        if x.nrows() != n || y.nrows() != n {
            return Err(Error::dim("X and Y must have level(Z0) rows"));
        }
        require_row_domain(&z0)?;
        Ok(LtoaProblem { z0, x, y })
    }
}

#[derive(Deserialize)]
struct LtoaRepr {
    #[serde(rename = "Z0")]
    z0: MatrixTuple,
    #[serde(rename = "X")]
    x: serde_json::Value,
    #[serde(rename = "Y")]
    y: serde_json::Value,
}

impl<'de> Deserialize<'de> for LtoaProblem {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = LtoaRepr::deserialize(de)?;
        let x = matrix_from_value(&r.x, None).map_err(D::Error::custom)?;
        let y = matrix_from_value(&r.y, None).map_err(D::Error::custom)?;
        LtoaProblem::new(r.z0, x, y).map_err(D::Error::custom)
    }
}

#[derive(Clone, Debug)]
pub struct LtoaCertificate {
    pub certificate: PsdCertificate,
    /// Solution of `T − Σ_i Z_i T Z_i* = X X* − Y Y*`.
    pub t: CMat,
}

pub fn ltoa_certificate(p: &LtoaProblem, tol: f64) -> Result<LtoaCertificate> {
    let comps = p.z0.components();
    let t = SteinSolver::new(comps, comps)?.solve(&(&p.x * p.x.adjoint() - &p.y * p.y.adjoint()))?;
    let certificate = kernel::psd_check(&linalg::hermitian_part(&t), tol)?;
    Ok(LtoaCertificate { certificate, t })
}

/// Choi certificate of `P ↦ I_Y ⊗ k(P) − Λ (I_U ⊗ k(P)) Λ*` at `⊕_k Z0`
/// (default `k = n`), with `k` obtained from a Stein solve at the amplified
/// level itself.
pub fn stein_dominance_certificate(
    q0: &NcPoly,
    z0: &MatrixTuple,
    lambda0: &CMat,
    amplification: Option<usize>,
    tol: f64,
) -> Result<(PsdCertificate, ChoiMatrix)> {
    let n = z0.level();
    if lambda0.nrows() % n != 0 || lambda0.ncols() % n != 0 || lambda0.is_empty() {
        return Err(Error::dim("Λ0 must be (dimY·n) x (dimU·n)"));
    }
    let (dy, du) = (lambda0.nrows() / n, lambda0.ncols() / n);
    let k = amplification.unwrap_or(n);
    if k == 0 {
        return Err(Error::InvalidArgument("amplification must be positive".into()));
    }
    let zk = z0.amplify(k)?;
    let chk = q0.in_domain(&zk)?;
    if !chk.in_domain {
        return Err(Error::OutsideDomain { norm: chk.norm });
    }
    let blocks = pencil_blocks(q0, &zk)?;
    let solver = SteinSolver::new(&blocks, &blocks)?;
    let lam = linalg::amplify_value(lambda0, dy, n, du, n, k)?;
    let big = k * n;
    let map = CpMap::new(big, dy * big, |p: &CMat| {
        let t = solver.solve(p)?;
        Ok(linalg::kron(&linalg::identity(dy), &t) - &lam * linalg::kron(&linalg::identity(du), &t) * lam.adjoint())
    });
    let choi = kernel::choi_matrix(&map)?;
    Ok((kernel::psd_check(&choi.matrix, tol)?, choi))
}

/// Randomized search for a `P ⪰ 0` that satisfies both strict-Stein
/// hypotheses at `⊕_k Z0` (`k = n·dimY`) but violates
/// `I_Y ⊗ P − Λ (I_U ⊗ P) Λ* ⪰ 0`.
///
/// Trial 0 uses `P = I`; later trials use `P = G G*` with Gaussian `G`. Each
/// candidate is moved into the hypothesis set along `P + sI` by bisection on
/// `s`. A returned `P` refutes solvability; `None` proves nothing.
pub fn strict_stein_refuter(
    q: &NcPoly,
    z0: &MatrixTuple,
    lambda0: &CMat,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<Option<CMat>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument("delta must lie in (0, 1)".into()));
    }
    if q.d() != z0.d() {
        return Err(Error::dim("Q and Z0 have different variable counts"));
    }
    let n = z0.level();
    if lambda0.nrows() % n != 0 || lambda0.ncols() % n != 0 || lambda0.is_empty() {
        return Err(Error::dim("Λ0 must be (dimY·n) x (dimU·n)"));
    }
    let (dy, du) = (lambda0.nrows() / n, lambda0.ncols() / n);
    let k = n * dy;
    let zk = z0.amplify(k)?;
    let big = k * n;
    let qk = q.eval(&zk)?;
    let lam = linalg::amplify_value(lambda0, dy, n, du, n, k)?;
    let shrink = 1.0 - delta * delta;
    let min_eig = |m: &CMat| linalg::hermitian_eigenvalues(m).first().copied().unwrap_or(0.0);
    let hypotheses = |p: &CMat| {
        let mut h1 = p.clone();
        for zj in zk.components() {
            h1 -= zj * p * zj.adjoint() * c(shrink, 0.0);
        }
        let h2 = linalg::kron(&linalg::identity(q.s()), p) * c(shrink, 0.0)
            - &qk * linalg::kron(&linalg::identity(q.r()), p) * qk.adjoint();
        min_eig(&h1) >= 0.0 && min_eig(&h2) >= 0.0
    };
    let violation = |p: &CMat| {
        let concl = linalg::kron(&linalg::identity(dy), p) - &lam * linalg::kron(&linalg::identity(du), p) * lam.adjoint();
        let scale = linalg::norm2(p).max(f64::MIN_POSITIVE);
        min_eig(&concl) < -1e-8 * scale
    };
    let id = linalg::identity(big);
    for trial in 0..trials {
        let p = if trial == 0 {
            id.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let cols = rng.random_range(1..=big);
            let g = linalg::random_gaussian(&mut rng, big, cols);
            &g * g.adjoint()
        };
        let candidate = if hypotheses(&p) {
            p
        } else {
            let mut hi = linalg::norm2(&p).max(1.0);
            let mut grown = 0;
            while !hypotheses(&(&p + &id * c(hi, 0.0))) && grown < 60 {
                hi *= 2.0;
                grown += 1;
            }
            if grown == 60 {
                continue;
            }
            let mut lo = 0.0;
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if hypotheses(&(&p + &id * c(mid, 0.0))) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            &p + &id * c(hi, 0.0)
        };
        if violation(&candidate) {
            return Ok(Some(candidate));
        }
    }
    Ok(None)
}
