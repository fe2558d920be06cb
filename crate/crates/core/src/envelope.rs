//! nc envelopes of finite point sets, intertwiner witnesses for membership,
//! and the one-variable nc-Zariski closure.

use nalgebra::Schur;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};
use crate::poly::NcPoly;
use crate::tuple::MatrixTuple;

pub const DEFAULT_RANK_TOL: f64 = 1e-8;
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
/// Random nullspace combinations tried per candidate direct sum.
pub const INJECTIVITY_TRIALS: usize = 20;
/// Relative singular-value cutoff for the Sylvester solution space.
const NULLSPACE_TOL: f64 = 1e-9;
const WITNESS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    DirectSum,
    Similarity,
    LeftInjectiveIntertwiner,
}

/// Certificate that `Z̃` lies in an envelope of the generators.
///
/// `matrix` is the intertwiner `ℐ` (`N × m`) with `ℐ Z̃_k = Z_k ℐ`, where `Z`
/// is the direct sum selected by `multiplicities` (level `N`) and `m` is the
/// level of `Z̃`. For the direct-sum kind it is the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeWitness {
    pub kind: WitnessKind,
    pub multiplicities: Vec<usize>,
    #[serde(with = "crate::json::matrix")]
    pub matrix: CMat,
}

impl EnvelopeWitness {
    /// `max_k ‖ℐ Z̃_k − Z_k ℐ‖`.
    pub fn residual(&self, ztilde: &MatrixTuple, generators: &[MatrixTuple]) -> Result<f64> {
        let z = nc_envelope_point(generators, &self.multiplicities)?;
        if self.matrix.shape() != (z.level(), ztilde.level()) {
            return Err(Error::dim("witness matrix has the wrong shape"));
        }
        Ok(z.components()
            .iter()
            .zip(ztilde.components())
            .map(|(zk, ztk)| linalg::norm2(&(&self.matrix * ztk - zk * &self.matrix)))
            .fold(0.0, f64::max))
    }
}

fn check_generators(generators: &[MatrixTuple], d: usize) -> Result<()> {
    if generators.is_empty() {
        return Err(Error::InvalidArgument("no generators given".into()));
    }
    if generators.iter().any(|g| g.d() != d) {
        return Err(Error::dim("generators have different variable counts"));
    }
    Ok(())
}

/// `⊕_j Z_j^{⊕ m_j}`, generators in order.
pub fn nc_envelope_point(generators: &[MatrixTuple], multiplicities: &[usize]) -> Result<MatrixTuple> {
    if generators.len() != multiplicities.len() {
        return Err(Error::dim("one multiplicity per generator is needed"));
    }
    let parts: Vec<&MatrixTuple> = generators
        .iter()
        .zip(multiplicities)
        .flat_map(|(g, &m)| std::iter::repeat_n(g, m))
        .collect();
    if parts.is_empty() {
        return Err(Error::InvalidArgument("empty direct-sum selection".into()));
    }
    MatrixTuple::direct_sum_all(&parts)
}

/// Multiplicity vectors with total `1..=max_total`, ordered by total and
/// then lexicographically.
fn multiplicity_vectors(g: usize, max_total: usize) -> Vec<Vec<usize>> {
    fn rec(g: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == g {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(g, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for total in 1..=max_total {
        rec(g, total, &mut Vec::new(), &mut out);
    }
    out
}

/// Basis (columns, vectorized column-major) of `{ℐ : ℐ Z̃_k = Z_k ℐ ∀k}`.
fn intertwiner_space(z: &MatrixTuple, ztilde: &MatrixTuple) -> CMat {
    let (n, m) = (z.level(), ztilde.level());
    let mut op = linalg::zeros(z.d() * n * m, n * m);
    for (k, (zk, ztk)) in z.components().iter().zip(ztilde.components()).enumerate() {
        let block = linalg::kron(&ztk.transpose(), &linalg::identity(n)) - linalg::kron(&linalg::identity(m), zk);
        op.view_mut((k * n * m, 0), (n * m, n * m)).copy_from(&block);
    }
    linalg::nullspace(&op, NULLSPACE_TOL)
}

fn unvec(v: &CMat, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |i, j| v[(j * rows + i, 0)])
}

fn search<F>(
    ztilde: &MatrixTuple,
    generators: &[MatrixTuple],
    max_multiplicity: Option<usize>,
    seed: u64,
    level_ok: impl Fn(usize, usize) -> bool,
    accept: F,
) -> Result<Option<(Vec<usize>, CMat)>>
where
    F: Fn(&CMat) -> bool,
{
    check_generators(generators, ztilde.d())?;
    let max_total = max_multiplicity.unwrap_or(ztilde.level());
    if max_total == 0 {
        return Err(Error::InvalidArgument("max_multiplicity must be at least 1".into()));
    }
    let m = ztilde.level();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for mult in multiplicity_vectors(generators.len(), max_total) {
        let n: usize = mult.iter().zip(generators).map(|(k, g)| k * g.level()).sum();
        if !level_ok(n, m) {
            continue;
        }
        let z = nc_envelope_point(generators, &mult)?;
        let basis = intertwiner_space(&z, ztilde);
        if basis.ncols() == 0 {
            continue;
        }
        let scale = z.components().iter().chain(ztilde.components()).map(linalg::norm2).fold(1.0, f64::max);
        for _ in 0..INJECTIVITY_TRIALS {
            let coeffs = linalg::random_gaussian(&mut rng, basis.ncols(), 1);
            let cand = unvec(&(&basis * coeffs), n, m);
            let norm = linalg::norm2(&cand);
            if norm == 0.0 {
                continue;
            }
            let cand = cand.unscale(norm);
            if !accept(&cand) {
                continue;
            }
            let resid = z
                .components()
                .iter()
                .zip(ztilde.components())
                .map(|(zk, ztk)| linalg::norm2(&(&cand * ztk - zk * &cand)))
                .fold(0.0, f64::max);
            if resid <= WITNESS_TOL * scale {
                return Ok(Some((mult, cand)));
            }
        }
    }
    Ok(None)
}

/// Is `Z̃` literally one of the direct sums `⊕_j Z_j^{⊕ m_j}` (up to `tol`
/// entrywise)?
pub fn nc_envelope_membership(
    ztilde: &MatrixTuple,
    generators: &[MatrixTuple],
    max_multiplicity: Option<usize>,
    tol: f64,
) -> Result<Option<EnvelopeWitness>> {
    check_generators(generators, ztilde.d())?;
    let max_total = max_multiplicity.unwrap_or(ztilde.level());
    for mult in multiplicity_vectors(generators.len(), max_total) {
        let n: usize = mult.iter().zip(generators).map(|(k, g)| k * g.level()).sum();
        if n != ztilde.level() {
            continue;
        }
        let z = nc_envelope_point(generators, &mult)?;
        let close = z.components().iter().zip(ztilde.components()).all(|(a, b)| linalg::max_abs(&(a - b)) <= tol);
        if close {
            return Ok(Some(EnvelopeWitness {
                kind: WitnessKind::DirectSum,
                multiplicities: mult,
                matrix: linalg::identity(n),
            }));
        }
    }
    Ok(None)
}

/// Searches for a direct sum `Z` of the generators (total multiplicity at
/// most `max_multiplicity`, default the level of `Z̃`) and an injective `ℐ`
/// with `ℐ Z̃ = Z ℐ`.
///
/// The solution space of the Sylvester system is computed exactly; inside it
/// random combinations are tried, since injective elements are generic when
/// they exist. `‖ℐ‖ = 1` and `σ_min(ℐ) > rank_tol` on return.
pub fn full_envelope_membership(
    ztilde: &MatrixTuple,
    generators: &[MatrixTuple],
    max_multiplicity: Option<usize>,
    rank_tol: f64,
    seed: u64,
) -> Result<Option<EnvelopeWitness>> {
    let found = search(ztilde, generators, max_multiplicity, seed, |n, m| n >= m, |cand| {
        linalg::singular_values(cand).last().copied().unwrap_or(0.0) > rank_tol
    })?;
    Ok(found.map(|(multiplicities, matrix)| EnvelopeWitness {
        kind: WitnessKind::LeftInjectiveIntertwiner,
        multiplicities,
        matrix,
    }))
}

/// As [`full_envelope_membership`] with square invertible `ℐ`, so that
/// `Z̃ = ℐ⁻¹ Z ℐ`; the condition number of `ℐ` must not exceed `cond_bound`.
pub fn similarity_envelope_membership(
    ztilde: &MatrixTuple,
    generators: &[MatrixTuple],
    max_multiplicity: Option<usize>,
    cond_bound: f64,
    seed: u64,
) -> Result<Option<EnvelopeWitness>> {
    let found = search(ztilde, generators, max_multiplicity, seed, |n, m| n == m, |cand| {
        linalg::condition_number(cand) <= cond_bound
    })?;
    Ok(found.map(|(multiplicities, matrix)| EnvelopeWitness { kind: WitnessKind::Similarity, multiplicities, matrix }))
}

/// Clustered spectrum with the longest Jordan chain per eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JordanData {
    pub eigenvalues: Vec<C64>,
    pub chain_lengths: Vec<usize>,
    /// Algebraic multiplicities (cluster sizes); they sum to the dimension.
    pub multiplicities: Vec<usize>,
    /// Clustering tolerance actually used.
    pub tol: f64,
    /// Set when two clusters are closer than ten tolerances or a chain length
    /// could not be read off numerically.
    pub ambiguous: bool,
}

impl JordanData {
    pub fn chain_length_at(&self, lambda: C64, tol: f64) -> Option<usize> {
        self.eigenvalues
            .iter()
            .zip(&self.chain_lengths)
            .find(|(mu, _)| (**mu - lambda).norm() <= tol)
            .map(|(_, &k)| k)
    }
}

fn schur_eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::Consistency(
        "Schur iteration did not converge".into(),
    ))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Eigenvalues clustered by single linkage, then chain lengths from the
/// nullities of `(M − λI)^k`.
///
/// Defective eigenvalues scatter by about `(n ε ‖M‖)^{1/n}` under roundoff,
/// so the effective tolerance is the larger of `cluster_tol` and ten times
/// that amount. Cluster centers are means, which are accurate to roundoff.
pub fn jordan_spectral_data(m: &CMat, cluster_tol: f64) -> Result<JordanData> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::dim("matrix must be square"));
    }
    if !linalg::is_finite(m) {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok(JordanData {
            eigenvalues: vec![],
            chain_lengths: vec![],
            multiplicities: vec![],
            tol: cluster_tol,
            ambiguous: false,
        });
    }
    let scale = linalg::norm2(m).max(1.0);
    let tol = cluster_tol.max(10.0 * (n as f64 * f64::EPSILON * scale).powf(1.0 / n as f64));
    let eig = schur_eigenvalues(m)?;

    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eig[i] - eig[j]).norm() <= tol {
                let (a, b) = (root(&mut label, i), root(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut label, i);
        if slot[r] == usize::MAX {
            slot[r] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[slot[r]].push(i);
    }

    let mut ambiguous = false;
    let mut eigenvalues = Vec::new();
    let mut chain_lengths = Vec::new();
    let mut multiplicities = Vec::new();
    for members in &clusters {
        let size = members.len();
        let center = members.iter().map(|&i| eig[i]).sum::<C64>() / c(size as f64, 0.0);
        let shifted = m - linalg::identity(n) * center;
        let mut power = linalg::identity(n);
        let mut chain = None;
        for k in 1..=size {
            power = &power * &shifted;
            let sv = linalg::singular_values(&power);
            let thresh = 1e-10 * sv.first().copied().unwrap_or(0.0).max(1.0);
            let nullity = sv.iter().filter(|&&s| s <= thresh).count();
            if nullity >= size {
                chain = Some(k);
                break;
            }
        }
        if chain.is_none() {
            ambiguous = true;
        }
        eigenvalues.push(center);
        chain_lengths.push(chain.unwrap_or(size));
        multiplicities.push(size);
    }
    for i in 0..eigenvalues.len() {
        for j in i + 1..eigenvalues.len() {
            if (eigenvalues[i] - eigenvalues[j]).norm() < 10.0 * tol {
                ambiguous = true;
            }
        }
    }
    Ok(JordanData { eigenvalues, chain_lengths, multiplicities, tol, ambiguous })
}

/// Derivative conditions at one node: `p^{(k)}(λ) = 0` for `k < vanish`, and
/// `p^{(nonvanish)}(λ) ≠ 0` when given.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteConstraint {
    pub lambda: C64,
    pub vanish: usize,
    pub nonvanish: Option<usize>,
}

/// Minimal-degree polynomial meeting the constraints, from a confluent
/// Vandermonde solve, scaled to be monic.
///
/// The nonvanishing derivative must be the first one not forced to vanish at
/// its node.
pub fn hermite_separating_poly(constraints: &[HermiteConstraint]) -> Result<NcPoly> {
    let mut nonvanish_seen = 0;
    for (i, h) in constraints.iter().enumerate() {
        if !(h.lambda.re.is_finite() && h.lambda.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(k) = h.nonvanish {
            nonvanish_seen += 1;
            if k < h.vanish {
                return Err(Error::InconsistentConstraints(format!(
                    "derivative {k} at {} must both vanish and not vanish",
                    h.lambda
                )));
            }
            if k > h.vanish {
                return Err(Error::InvalidArgument("derivative conditions must be contiguous".into()));
            }
        }
        if constraints[..i].iter().any(|o| (o.lambda - h.lambda).norm() <= 1e-12) {
            return Err(Error::InvalidArgument(format!("node {} given twice", h.lambda)));
        }
    }
    if nonvanish_seen > 1 {
        return Err(Error::InvalidArgument("at most one nonvanishing condition is allowed".into()));
    }
    let rows: Vec<(C64, usize, bool)> = constraints
        .iter()
        .flat_map(|h| {
            (0..h.vanish)
                .map(move |k| (h.lambda, k, false))
                .chain(h.nonvanish.map(|k| (h.lambda, k, true)))
        })
        .collect();
    if rows.is_empty() {
        return Ok(NcPoly::univariate(&[c(1.0, 0.0)]));
    }
    if nonvanish_seen == 0 {
        // only vanishing conditions: the minimal monic choice is the product
        let mut p = NcPoly::univariate(&[c(1.0, 0.0)]);
        for &(lambda, _, _) in &rows {
            p = p.mul(&NcPoly::univariate(&[-lambda, c(1.0, 0.0)]))?;
        }
        return Ok(p);
    }
    let size = rows.len();
    let mut vander = linalg::zeros(size, size);
    let mut rhs = linalg::zeros(size, 1);
    for (row, &(lambda, k, nonvanish)) in rows.iter().enumerate() {
        for j in k..size {
            // d^k/dz^k z^j = j!/(j-k)! z^{j-k}
            let falling: f64 = ((j - k + 1)..=j).map(|t| t as f64).product();
            vander[(row, j)] = lambda.powu((j - k) as u32) * falling;
        }
        if nonvanish {
            rhs[(row, 0)] = c(1.0, 0.0);
        }
    }
    let coeffs = linalg::solve(&vander, &rhs)?;
    let lead = coeffs[(size - 1, 0)];
    if lead.norm() == 0.0 {
        return Err(Error::Singular);
    }
    let monic: Vec<C64> = coeffs.iter().map(|&a| a / lead).collect();
    Ok(NcPoly::univariate(&monic))
}

/// Outcome of [`zariski_membership_d1`].
#[derive(Clone, Debug)]
pub struct ZariskiMembership {
    pub member: bool,
    /// Vanishes on `Ω_F` but not at `Z̃`; present exactly when not a member.
    pub separating: Option<NcPoly>,
    pub ambiguous: bool,
}

/// `Z̃` is in the closure iff each of its eigenvalues occurs in `Ω_F` with a
/// chain at least as long.
pub fn zariski_membership_d1(ztilde: &CMat, omega: &[CMat], cluster_tol: f64) -> Result<ZariskiMembership> {
    if omega.is_empty() {
        return Err(Error::InvalidArgument("Ω_F must be nonempty".into()));
    }
    let target = jordan_spectral_data(ztilde, cluster_tol)?;
    let mut ambiguous = target.ambiguous;
    // merged spectrum of Ω_F: node, longest chain, tolerance
    let mut nodes: Vec<(C64, usize, f64)> = Vec::new();
    for w in omega {
        let jd = jordan_spectral_data(w, cluster_tol)?;
        ambiguous |= jd.ambiguous;
        for (&lambda, &k) in jd.eigenvalues.iter().zip(&jd.chain_lengths) {
            match nodes.iter_mut().find(|(mu, _, t)| (*mu - lambda).norm() <= t.max(jd.tol)) {
                Some(node) => node.1 = node.1.max(k),
                None => nodes.push((lambda, k, jd.tol)),
            }
        }
    }
    let mut offending = None;
    for (&mu, &k) in target.eigenvalues.iter().zip(&target.chain_lengths) {
        let found = nodes.iter().position(|(lambda, _, t)| (*lambda - mu).norm() <= t.max(target.tol));
        match found {
            None => {
                offending = Some((mu, None));
                break;
            }
            Some(i) if nodes[i].1 < k => {
                offending = Some((mu, Some(i)));
                break;
            }
            Some(_) => {}
        }
    }
    let Some((mu, at)) = offending else {
        return Ok(ZariskiMembership { member: true, separating: None, ambiguous });
    };
    let mut constraints: Vec<HermiteConstraint> = nodes
        .iter()
        .enumerate()
        .map(|(i, &(lambda, k, _))| HermiteConstraint {
            lambda,
            vanish: k,
            nonvanish: (at == Some(i)).then_some(k),
        })
        .collect();
    if at.is_none() {
        constraints.push(HermiteConstraint { lambda: mu, vanish: 0, nonvanish: Some(0) });
    }
    let p = hermite_separating_poly(&constraints)?;
    Ok(ZariskiMembership { member: false, separating: Some(p), ambiguous })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_matrix;
    use rand::Rng;

    fn jordan(lambda: C64, k: usize) -> CMat {
        CMat::from_fn(k, k, |i, j| {
            if i == j {
                lambda
            } else if j == i + 1 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    fn block_diag(blocks: &[CMat]) -> CMat {
        let n: usize = blocks.iter().map(|b| b.nrows()).sum();
        let mut out = linalg::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            out.view_mut((off, off), b.shape()).copy_from(b);
            off += b.nrows();
        }
        out
    }

    fn one(m: CMat) -> MatrixTuple {
        MatrixTuple::new(vec![m]).unwrap()
    }

    fn eval1(p: &NcPoly, m: &CMat) -> CMat {
        p.eval(&one(m.clone())).unwrap()
    }

    #[test]
    fn envelope_point_levels() {
        let g1 = MatrixTuple::zero(2, 2);
        let g2 = MatrixTuple::zero(2, 3);
        assert_eq!(nc_envelope_point(&[g1.clone()], &[1]).unwrap(), g1);
        assert_eq!(nc_envelope_point(&[g1.clone(), g2.clone()], &[2, 0]).unwrap().level(), 4);
        assert_eq!(nc_envelope_point(&[g1.clone(), g2.clone()], &[2, 3]).unwrap().level(), 13);
        assert!(nc_envelope_point(&[g1, g2], &[0, 0]).is_err());
    }

    #[test]
    fn multiplicity_order() {
        let v = multiplicity_vectors(2, 2);
        assert_eq!(v, vec![vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn generator_is_its_own_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = MatrixTuple::random(&mut rng, 2, 3);
        let w = full_envelope_membership(&z, std::slice::from_ref(&z), Some(1), DEFAULT_RANK_TOL, 0)
            .unwrap()
            .unwrap();
        // the commutant of a generic pair is the scalars
        let phase = w.matrix[(0, 0)];
        assert!(linalg::max_abs(&(w.matrix.clone() - linalg::identity(3) * phase)) < 1e-8);
        assert!(w.residual(&z, &[z.clone()]).unwrap() < 1e-9);
    }

    #[test]
    fn invariant_subspace_restriction() {
        let gen = one(jordan(c(0.0, 0.0), 2));
        let zt = one(linalg::zeros(1, 1));
        let w = full_envelope_membership(&zt, &[gen], None, DEFAULT_RANK_TOL, 0).unwrap().unwrap();
        assert_eq!(w.kind, WitnessKind::LeftInjectiveIntertwiner);
        assert!(w.matrix[(1, 0)].norm() < 1e-12 && (w.matrix[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_intertwiner_is_rejected() {
        let gen = one(linalg::zeros(1, 1));
        let zt = one(real_matrix(1, 1, &[1.0]));
        assert!(full_envelope_membership(&zt, &[gen], Some(3), DEFAULT_RANK_TOL, 0).unwrap().is_none());
    }

    #[test]
    fn similarity_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = MatrixTuple::random(&mut rng, 2, 3);
        let alpha = linalg::random_well_conditioned(&mut rng, 3, 5.0);
        let zt = z.similarity(&alpha).unwrap();
        let w = similarity_envelope_membership(&zt, &[z.clone()], None, 1e6, 0).unwrap().unwrap();
        assert_eq!(w.kind, WitnessKind::Similarity);
        assert!(w.residual(&zt, &[z.clone()]).unwrap() < 1e-9);
        let same = similarity_envelope_membership(&z, &[z.clone()], None, 1e6, 0).unwrap().unwrap();
        assert!(linalg::condition_number(&same.matrix) < 1.0 + 1e-8);
        let bigger = MatrixTuple::random(&mut rng, 2, 2);
        assert!(similarity_envelope_membership(&bigger, &[z], Some(2), 1e6, 0).unwrap().is_none());
    }

    #[test]
    fn witness_json() {
        let w = EnvelopeWitness {
            kind: WitnessKind::LeftInjectiveIntertwiner,
            multiplicities: vec![1, 0],
            matrix: linalg::identity(2),
        };
        let v = serde_json::to_value(&w).unwrap();
        assert_eq!(v["kind"], "left-injective-intertwiner");
        assert_eq!(serde_json::from_value::<EnvelopeWitness>(v).unwrap(), w);
    }

    #[test]
    fn jordan_examples() {
        let jd = jordan_spectral_data(&jordan(c(2.0, 0.0), 3), DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(jd.chain_lengths, vec![3]);
        assert!((jd.eigenvalues[0] - c(2.0, 0.0)).norm() < 1e-10);

        let jd = jordan_spectral_data(&real_matrix(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 5.0]), 1e-8)
            .unwrap();
        let mut pairs: Vec<(f64, usize, usize)> =
            jd.eigenvalues.iter().zip(&jd.chain_lengths).zip(&jd.multiplicities).map(|((l, &k), &m)| (l.re, k, m)).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert_eq!(pairs, vec![(1.0, 1, 2), (5.0, 1, 1)]);

        let m = block_diag(&[jordan(c(0.0, 0.0), 2), linalg::zeros(1, 1)]);
        let jd = jordan_spectral_data(&m, 1e-8).unwrap();
        assert_eq!((jd.chain_lengths.clone(), jd.multiplicities.clone()), (vec![2], vec![3]));
        assert!(!jd.ambiguous);
    }

    #[test]
    fn jordan_under_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = block_diag(&[jordan(c(0.5, 0.5), 3), jordan(c(-1.0, 0.0), 1)]);
        let alpha = linalg::random_well_conditioned(&mut rng, 4, 5.0);
        let conj = &alpha * m * linalg::inverse(&alpha).unwrap();
        let jd = jordan_spectral_data(&conj, 1e-8).unwrap();
        assert_eq!(jd.multiplicities.iter().sum::<usize>(), 4);
        assert_eq!(jd.chain_length_at(c(0.5, 0.5), 1e-6), Some(3));
        assert_eq!(jd.chain_length_at(c(-1.0, 0.0), 1e-6), Some(1));
    }

    #[test]
    fn hermite_examples() {
        let p = hermite_separating_poly(&[
            HermiteConstraint { lambda: c(0.0, 0.0), vanish: 1, nonvanish: None },
            HermiteConstraint { lambda: c(1.0, 0.0), vanish: 0, nonvanish: Some(0) },
        ])
        .unwrap();
        let co = p.univariate_coefficients().unwrap();
        assert!(co.len() == 2 && co[0].norm() < 1e-15 && (co[1] - c(1.0, 0.0)).norm() < 1e-15);

        let p = hermite_separating_poly(&[HermiteConstraint { lambda: c(0.0, 0.0), vanish: 2, nonvanish: Some(2) }])
            .unwrap();
        let co = p.univariate_coefficients().unwrap();
        assert_eq!(co.len(), 3);
        assert!(co[0].norm() < 1e-15 && co[1].norm() < 1e-15 && (co[2] - c(1.0, 0.0)).norm() < 1e-15);

        let bad = HermiteConstraint { lambda: c(0.0, 0.0), vanish: 2, nonvanish: Some(1) };
        assert!(matches!(hermite_separating_poly(&[bad]), Err(Error::InconsistentConstraints(_))));
    }

    fn derivative(co: &[C64], k: usize, z: C64) -> C64 {
        co.iter()
            .enumerate()
            .skip(k)
            .map(|(j, &a)| a * ((j - k + 1)..=j).map(|t| t as f64).product::<f64>() * z.powu((j - k) as u32))
            .sum()
    }

    #[test]
    fn hermite_random_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let nodes = rng.random_range(1..=3);
            let special = rng.random_range(0..nodes);
            let cons: Vec<HermiteConstraint> = (0..nodes)
                .map(|i| {
                    let vanish = rng.random_range(0..=2);
                    HermiteConstraint {
                        lambda: c(i as f64 - 1.0, rng.random_range(-0.5..0.5)),
                        vanish,
                        nonvanish: (i == special).then_some(vanish),
                    }
                })
                .collect();
            let co = hermite_separating_poly(&cons).unwrap().univariate_coefficients().unwrap();
            for h in &cons {
                for k in 0..h.vanish {
                    assert!(derivative(&co, k, h.lambda).norm() < 1e-10);
                }
                if let Some(k) = h.nonvanish {
                    assert!(derivative(&co, k, h.lambda).norm() > 1e-6);
                }
            }
            // monic product of the vanishing factors
            let mut want = vec![c(1.0, 0.0)];
            for h in &cons {
                for _ in 0..h.vanish {
                    let mut next = vec![c(0.0, 0.0); want.len() + 1];
                    for (j, &a) in want.iter().enumerate() {
                        next[j + 1] += a;
                        next[j] -= a * h.lambda;
                    }
                    want = next;
                }
            }
            assert_eq!(co.len(), want.len());
            assert!(co.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-9));
        }
    }

    #[test]
    fn zariski_examples() {
        let zero = linalg::zeros(1, 1);
        let j2 = jordan(c(0.0, 0.0), 2);
        let res = zariski_membership_d1(&j2, std::slice::from_ref(&zero), 1e-8).unwrap();
        assert!(!res.member);
        let p = res.separating.unwrap();
        assert!(linalg::max_abs(&eval1(&p, &zero)) < 1e-12);
        assert!(linalg::norm2(&eval1(&p, &j2)) > 1e-6);
        assert_eq!(p.degree(), 1);

        assert!(zariski_membership_d1(&linalg::zeros(2, 2), std::slice::from_ref(&zero), 1e-8).unwrap().member);
        assert!(zariski_membership_d1(&zero, &[j2], 1e-8).unwrap().member);

        let res = zariski_membership_d1(&real_matrix(1, 1, &[1.0]), &[zero.clone()], 1e-8).unwrap();
        let p = res.separating.unwrap();
        assert!(linalg::max_abs(&eval1(&p, &zero)) < 1e-12);
    }

    #[test]
    fn zariski_agrees_with_full_envelope() {
        let gens = [jordan(c(0.0, 0.0), 2), real_matrix(1, 1, &[0.5])];
        let omega: Vec<MatrixTuple> = gens.iter().cloned().map(one).collect();
        let cases = [
            (block_diag(&[jordan(c(0.0, 0.0), 2), real_matrix(1, 1, &[0.5])]), true),
            (jordan(c(0.0, 0.0), 3), false),
            (jordan(c(0.5, 0.0), 2), false),
            (block_diag(&[linalg::zeros(1, 1), real_matrix(1, 1, &[0.5])]), true),
        ];
        for (zt, want) in cases {
            let z = zariski_membership_d1(&zt, &gens, 1e-8).unwrap();
            let f = full_envelope_membership(&one(zt.clone()), &omega, None, DEFAULT_RANK_TOL, 0).unwrap();
            assert_eq!(z.member, want);
            assert_eq!(f.is_some(), want);
        }
    }
}
