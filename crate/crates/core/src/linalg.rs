//! Dense complex linear-algebra helpers shared by every module.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Matrix from real row-major entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMat {
    assert_eq!(entries.len(), rows * cols);
    CMat::from_fn(rows, cols, |i, j| c(entries[i * cols + j], 0.0))
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest singular value (0 for empty matrices).
pub fn norm2(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Thin SVD `(U, σ, V*)` with `σ` in descending order.
///
/// nalgebra's complex SVD occasionally returns inaccurate factors for
/// matrices with many exact zeros. The factorization is therefore checked
/// against `m` and, when off, recomputed on `P m Q` for fixed random
/// unitaries `P`, `Q`, which destroys the offending structure.
pub fn svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (r, cdim) = (m.nrows(), m.ncols());
    let k = r.min(cdim);
    if k == 0 {
        return (zeros(r, 0), Vec::new(), zeros(0, cdim));
    }
    let scale = max_abs(m);
    let attempt = |a: &CMat| {
        let f = a.clone().svd(true, true);
        let (u, v_t) = (f.u.expect("requested U"), f.v_t.expect("requested V"));
        let s: Vec<f64> = f.singular_values.iter().copied().collect();
        let mut us = u.clone();
        for (j, &sj) in s.iter().enumerate() {
            us.column_mut(j).scale_mut(sj);
        }
        let err = max_abs(&(us * &v_t - a));
        (u, s, v_t, err)
    };
    let ok = |err: f64| err <= 1e-12 * scale * (1.0 + ((r * cdim) as f64).sqrt()) || scale == 0.0;
    let (mut u, mut s, mut v_t, err) = attempt(m);
    if !ok(err) || s.iter().any(|x| !x.is_finite()) {
        let mut best = err;
        for round in 0..4 {
            let p = scrambler(r, 2 * round);
            let q = scrambler(cdim, 2 * round + 1);
            let (u2, s2, v2, err2) = attempt(&(&p * m * &q));
            if err2 < best {
                best = err2;
                u = p.adjoint() * u2;
                s = s2;
                v_t = v2 * q.adjoint();
            }
            if ok(err2) {
                break;
            }
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let u = CMat::from_fn(r, k, |i, j| u[(i, order[j])]);
    let v_t = CMat::from_fn(k, cdim, |i, j| v_t[(order[i], j)]);
    let s = order.iter().map(|&j| s[j]).collect();
    (u, s, v_t)
}

/// Operator norm with a finiteness check.
pub fn operator_norm(m: &CMat) -> Result<f64> {
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    Ok(norm2(m))
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    svd(m).1
}

/// Ratio of extreme singular values; infinite for rank-deficient matrices.
pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Kronecker product `a ⊗ b` (block `(i, j)` equals `a_ij · b`).
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Unitary used to scramble matrices that trip nalgebra's dense
/// factorizations (see [`svd`] and [`hermitian_eigh`]).
fn scrambler(n: usize, attempt: u64) -> CMat {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0x5eed + attempt);
    random_unitary(&mut rng, n)
}

fn spectrum_consistent(h: &CMat, vals: &[f64]) -> bool {
    let fro2: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    let trace: f64 = (0..h.nrows()).map(|i| h[(i, i)].re).sum();
    let sum: f64 = vals.iter().sum();
    let sum2: f64 = vals.iter().map(|v| v * v).sum();
    let tol = 1e-10 * fro2.max(f64::MIN_POSITIVE);
    vals.iter().all(|v| v.is_finite())
        && (sum2 - fro2).abs() <= tol
        && (sum - trace).abs() <= 1e-10 * fro2.sqrt().max(f64::MIN_POSITIVE) * (h.nrows() as f64).sqrt()
}

/// Eigenvalues (ascending) of the Hermitian part of `m`.
///
/// nalgebra's Hermitian solver can return NaN on very sparse inputs (for
/// instance Choi matrices with one nonzero per row); the spectrum is then
/// recomputed after a random unitary change of basis.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = hermitian_part(m);
    let mut v: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    let mut attempt = 0;
    while !spectrum_consistent(&h, &v) && attempt < 4 {
        let q = scrambler(h.nrows(), attempt);
        v = hermitian_part(&(&q * &h * q.adjoint())).symmetric_eigenvalues().iter().copied().collect();
        attempt += 1;
    }
    v.sort_by(f64::total_cmp);
    v
}

/// Eigenpairs of the Hermitian part of `m`, eigenvalues ascending. Checked
/// by reconstruction, with the same fallback as [`hermitian_eigenvalues`].
pub fn hermitian_eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let h = hermitian_part(m);
    let scale = max_abs(&h);
    let solve_in = |q: Option<&CMat>| {
        let target = match q {
            Some(q) => hermitian_part(&(q * &h * q.adjoint())),
            None => h.clone(),
        };
        let eig = target.symmetric_eigen();
        let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let vecs = match q {
            Some(q) => q.adjoint() * eig.eigenvectors,
            None => eig.eigenvectors,
        };
        let mut scaled = vecs.clone();
        for (j, &l) in vals.iter().enumerate() {
            scaled.column_mut(j).scale_mut(l);
        }
        let err = max_abs(&(scaled * vecs.adjoint() - &h));
        let ok = err.is_finite() && err <= 1e-12 * scale.max(f64::MIN_POSITIVE) * (1.0 + n as f64);
        (vals, vecs, ok)
    };
    let (mut vals, mut vecs, mut ok) = solve_in(None);
    let mut attempt = 0;
    while !ok && attempt < 4 {
        (vals, vecs, ok) = solve_in(Some(&scrambler(n, attempt)));
        attempt += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted = order.iter().map(|&k| vals[k]).collect();
    let vecs = CMat::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    (sorted, vecs)
}

/// Orthonormal basis (as columns) of the numerical null space of `m`:
/// right singular vectors whose singular value is at most
/// `rel_tol · max(1, σ_max)`.
pub fn nullspace(m: &CMat, rel_tol: f64) -> CMat {
    let cols = m.ncols();
    if cols == 0 {
        return zeros(0, 0);
    }
    // pad so that the thin SVD returns a full set of right singular vectors
    let padded = if m.nrows() < cols {
        let mut p = zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (_, sv, v_t) = svd(&padded);
    let thresh = rel_tol * sv.first().copied().unwrap_or(0.0).max(1.0);
    let keep: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] <= thresh).collect();
    let mut basis = zeros(cols, keep.len());
    for (j, &k) in keep.iter().enumerate() {
        for i in 0..cols {
            basis[(i, j)] = v_t[(k, i)].conj();
        }
    }
    basis
}

/// Moore–Penrose pseudo-inverse, dropping singular values below
/// `rel_tol · σ_max`.
pub fn pinv(m: &CMat, rel_tol: f64) -> CMat {
    let (r, cdim) = (m.nrows(), m.ncols());
    if r == 0 || cdim == 0 {
        return zeros(cdim, r);
    }
    let (u, sv, v_t) = svd(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let mut out = zeros(cdim, r);
    if smax == 0.0 {
        return out;
    }
    for (k, &s) in sv.iter().enumerate() {
        if s > rel_tol * smax {
            out += (v_t.row(k).adjoint() * u.column(k).adjoint()).unscale(s);
        }
    }
    out
}

/// Clamp singular values above one back to one (nearest contraction in
/// operator norm).
pub fn clamp_to_contraction(m: &CMat) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return m.clone();
    }
    let (mut u, sv, v_t) = svd(m);
    if sv.iter().all(|&s| s <= 1.0) {
        return m.clone();
    }
    for (j, &s) in sv.iter().enumerate() {
        u.column_mut(j).scale_mut(s.min(1.0));
    }
    u * v_t
}

pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::dim(format!(
            "cannot solve a {}x{} system with a {}-row right-hand side",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    if a.nrows() == 0 {
        return Ok(b.clone());
    }
    a.clone().lu().solve(b).ok_or(Error::Singular)
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    solve(a, &identity(a.nrows()))
}

/// Dense solver for the Stein-type equation `T − Σ_i L_i T R_i* = P`
/// with `L_i` of size `n × n` and `R_i` of size `m × m`.
///
/// The operator is vectorized column-major as `I − Σ_i conj(R_i) ⊗ L_i`
/// and factored once, so repeated right-hand sides are cheap.
pub struct SteinSolver {
    n: usize,
    m: usize,
    lu: Option<nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl SteinSolver {
    pub fn new(lefts: &[CMat], rights: &[CMat]) -> Result<Self> {
        if lefts.len() != rights.len() || lefts.is_empty() {
            return Err(Error::dim("Stein solver needs matching nonempty factor lists"));
        }
        let n = lefts[0].nrows();
        let m = rights[0].nrows();
        for (l, r) in lefts.iter().zip(rights) {
            if l.shape() != (n, n) || r.shape() != (m, m) {
                return Err(Error::dim("Stein factors must be square and share sizes"));
            }
        }
        let size = n * m;
        if size == 0 {
            return Ok(SteinSolver { n, m, lu: None });
        }
        let mut op = identity(size);
        for (l, r) in lefts.iter().zip(rights) {
            op -= kron(&r.map(|z| z.conj()), l);
        }
        let lu = op.lu();
        if !lu.is_invertible() {
            return Err(Error::Singular);
        }
        Ok(SteinSolver { n, m, lu: Some(lu) })
    }

    pub fn solve(&self, p: &CMat) -> Result<CMat> {
        if p.shape() != (self.n, self.m) {
            return Err(Error::dim(format!(
                "right-hand side is {}x{}, expected {}x{}",
                p.nrows(),
                p.ncols(),
                self.n,
                self.m
            )));
        }
        let Some(lu) = &self.lu else {
            return Ok(p.clone());
        };
        let rhs = nalgebra::DVector::from_column_slice(p.as_slice());
        let x = lu.solve(&rhs).ok_or(Error::Singular)?;
        Ok(CMat::from_column_slice(self.n, self.m, x.as_slice()))
    }
}

/// Direct sum of matrix values laid out as `row_coef × col_coef` grids of
/// point-level blocks. Value `k` has block size `row_levels[k] × col_levels[k]`;
/// the result has block `(i, j)` equal to the block diagonal of the `(i, j)`
/// blocks of the summands.
pub fn direct_sum_blocks(
    values: &[&CMat],
    row_coef: usize,
    row_levels: &[usize],
    col_coef: usize,
    col_levels: &[usize],
) -> Result<CMat> {
    if values.len() != row_levels.len() || values.len() != col_levels.len() {
        return Err(Error::dim("direct sum: level lists do not match values"));
    }
    for (k, v) in values.iter().enumerate() {
        if v.shape() != (row_coef * row_levels[k], col_coef * col_levels[k]) {
            return Err(Error::dim(format!(
                "direct sum: summand {k} is {}x{}, expected {}x{}",
                v.nrows(),
                v.ncols(),
                row_coef * row_levels[k],
                col_coef * col_levels[k]
            )));
        }
    }
    let rn: usize = row_levels.iter().sum();
    let cn: usize = col_levels.iter().sum();
    let mut out = zeros(row_coef * rn, col_coef * cn);
    for i in 0..row_coef {
        for j in 0..col_coef {
            let (mut ro, mut co) = (0, 0);
            for (k, v) in values.iter().enumerate() {
                let (rl, cl) = (row_levels[k], col_levels[k]);
                let blk = v.view((i * rl, j * cl), (rl, cl));
                out.view_mut((i * rn + ro, j * cn + co), (rl, cl)).copy_from(&blk);
                ro += rl;
                co += cl;
            }
        }
    }
    Ok(out)
}

/// `k`-fold direct sum of a single value (see [`direct_sum_blocks`]).
pub fn amplify_value(
    value: &CMat,
    row_coef: usize,
    row_level: usize,
    col_coef: usize,
    col_level: usize,
    k: usize,
) -> Result<CMat> {
    let vals = vec![value; k];
    direct_sum_blocks(&vals, row_coef, &vec![row_level; k], col_coef, &vec![col_level; k])
}

pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im).unscale(std::f64::consts::SQRT_2)
    })
}

/// Haar-distributed unitary via QR of a Gaussian matrix with phase fix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    if n == 0 {
        return zeros(0, 0);
    }
    let g = random_gaussian(rng, n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random matrix with condition number at most `cond` (singular values
/// spread between 1 and `cond`).
pub fn random_well_conditioned<R: Rng + ?Sized>(rng: &mut R, n: usize, cond: f64) -> CMat {
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let s = CMat::from_fn(n, n, |i, j| {
        if i == j {
            let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            c(cond.powf(t), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    u * s * v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn norm_of_diagonal() {
        let m = real_matrix(2, 2, &[0.5, 0.0, 0.0, -2.0]);
        assert!((norm2(&m) - 2.0).abs() < 1e-14);
        assert!((norm2(&identity(3)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn norm_adjoint_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = random_gaussian(&mut rng, 4, 3);
            let a = norm2(&m);
            assert!((a - norm2(&m.adjoint())).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = identity(2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(operator_norm(&m), Err(Error::NonFinite)));
    }

    #[test]
    fn stein_solver_scalar_geometric() {
        let z = CMat::from_element(1, 1, c(0.5, 0.0));
        let s = SteinSolver::new(&[z.clone()], &[z]).unwrap();
        let t = s.solve(&identity(1)).unwrap();
        assert!((t[(0, 0)].re - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn stein_solver_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let l: Vec<CMat> = (0..2).map(|_| random_gaussian(&mut rng, 3, 3).scale(0.3)).collect();
        let r: Vec<CMat> = (0..2).map(|_| random_gaussian(&mut rng, 2, 2).scale(0.3)).collect();
        let p = random_gaussian(&mut rng, 3, 2);
        let t = SteinSolver::new(&l, &r).unwrap().solve(&p).unwrap();
        let mut res = t.clone() - &p;
        for (li, ri) in l.iter().zip(&r) {
            res -= li * &t * ri.adjoint();
        }
        assert!(max_abs(&res) < 1e-12);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let m = real_matrix(1, 3, &[1.0, 1.0, 1.0]);
        let n = nullspace(&m, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!(max_abs(&(m * n)) < 1e-12);
    }

    #[test]
    fn pinv_of_partial_isometry_is_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_unitary(&mut rng, 4);
        let v = u.columns(0, 2).into_owned();
        let p = pinv(&v, 1e-12);
        assert!(max_abs(&(p - v.adjoint())) < 1e-12);
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(&mut rng, 5);
        assert!(max_abs(&(u.adjoint() * &u - identity(5))) < 1e-12);
    }

    #[test]
    fn direct_sum_blocks_layout() {
        let a = real_matrix(2, 2, &[1.0, 2.0, 3.0, 4.0]); // 2x2 grid of 1x1 blocks
        let b = real_matrix(2, 2, &[5.0, 6.0, 7.0, 8.0]);
        let s = direct_sum_blocks(&[&a, &b], 2, &[1, 1], 2, &[1, 1]).unwrap();
        let expect = real_matrix(
            4,
            4,
            &[
                1.0, 0.0, 2.0, 0.0, //
                0.0, 5.0, 0.0, 6.0, //
                3.0, 0.0, 4.0, 0.0, //
                0.0, 7.0, 0.0, 8.0,
            ],
        );
        assert_eq!(s, expect);
    }

    /// Hermitian matrix with one nonzero per row: `w` on an involution's
    /// orbit pairs, eigenvalues `±|w|`.
    fn sparse_involution(n: usize, seed: u64) -> (CMat, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = zeros(n, n);
        let mut want = Vec::new();
        let mut i = 0;
        while i + 1 < n {
            let w = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            h[(i, i + 1)] = w;
            h[(i + 1, i)] = w.conj();
            want.extend([w.norm(), -w.norm()]);
            i += 2;
        }
        if i < n {
            h[(i, i)] = c(0.5, 0.0);
            want.push(0.5);
        }
        want.sort_by(f64::total_cmp);
        (h, want)
    }

    #[test]
    fn sparse_hermitian_spectra() {
        for n in [9, 16, 81] {
            let (h, want) = sparse_involution(n, n as u64);
            let got = hermitian_eigenvalues(&h);
            assert!(got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12), "n = {n}");
            let (vals, vecs) = hermitian_eigh(&h);
            let mut scaled = vecs.clone();
            for (j, &l) in vals.iter().enumerate() {
                scaled.column_mut(j).scale_mut(l);
            }
            assert!(max_abs(&(scaled * vecs.adjoint() - &h)) < 1e-12);
        }
    }

    #[test]
    fn svd_reconstructs_sparse_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let (r, k) = (rng.random_range(1..12), rng.random_range(1..12));
            let mut m = random_gaussian(&mut rng, r, k);
            let p = rng.random_range(0.0..0.9);
            for z in m.iter_mut() {
                if rng.random_bool(p) {
                    *z = c(0.0, 0.0);
                }
            }
            let (u, s, v_t) = svd(&m);
            assert!(s.windows(2).all(|w| w[0] >= w[1]));
            let mut us = u.clone();
            for (j, &sj) in s.iter().enumerate() {
                us.column_mut(j).scale_mut(sj);
            }
            assert!(max_abs(&(us * v_t - &m)) <= 1e-12 * (1.0 + max_abs(&m)) * 12.0);
        }
    }
}
