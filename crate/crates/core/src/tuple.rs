use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::word::Word;

/// Reject similarities whose condition number exceeds this bound.
pub const MAX_SIMILARITY_COND: f64 = 1e12;

/// A point `Z = (Z_1, …, Z_d)` of `n × n` complex matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple {
    components: Vec<CMat>,
}

impl MatrixTuple {
    pub fn new(components: Vec<CMat>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidArgument("a matrix tuple needs d >= 1 components".into()));
        };
        let n = first.nrows();
        if n == 0 {
            return Err(Error::InvalidArgument("matrix tuple level must be at least 1".into()));
        }
        for (k, z) in components.iter().enumerate() {
            if z.shape() != (n, n) {
                return Err(Error::dim(format!(
                    "component {} is {}x{}, expected {n}x{n}",
                    k + 1,
                    z.nrows(),
                    z.ncols()
                )));
            }
            if !linalg::is_finite(z) {
                return Err(Error::NonFinite);
            }
        }
        Ok(MatrixTuple { components })
    }

    /// The point `(0, …, 0)` at level `n`.
    pub fn zero(d: usize, n: usize) -> Self {
        MatrixTuple { components: vec![linalg::zeros(n, n); d] }
    }

    /// Level-one point from scalars.
    pub fn scalars(values: &[crate::C64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| CMat::from_element(1, 1, v)).collect())
    }

    pub fn d(&self) -> usize {
        self.components.len()
    }

    pub fn level(&self) -> usize {
        self.components[0].nrows()
    }

    pub fn components(&self) -> &[CMat] {
        &self.components
    }

    /// Component `Z_k` for `k` in `1..=d`.
    pub fn component(&self, k: usize) -> &CMat {
        &self.components[k - 1]
    }

    /// `Z^w = Z_{w_0} Z_{w_1} ⋯` in storage order; `Z^∅ = I_n`.
    pub fn eval_word(&self, w: &Word) -> Result<CMat> {
        w.check_alphabet(self.d())?;
        let mut acc = linalg::identity(self.level());
        for &l in w.letters() {
            acc *= self.component(l);
        }
        Ok(acc)
    }

    /// Componentwise block-diagonal sum at level `n + m`.
    pub fn direct_sum(&self, other: &MatrixTuple) -> Result<MatrixTuple> {
        Self::direct_sum_all(&[self, other])
    }

    pub fn direct_sum_all(points: &[&MatrixTuple]) -> Result<MatrixTuple> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidArgument("direct sum of an empty list".into()));
        };
        let d = first.d();
        if points.iter().any(|p| p.d() != d) {
            return Err(Error::dim("direct sum of tuples with different variable counts"));
        }
        let total: usize = points.iter().map(|p| p.level()).sum();
        let components = (0..d)
            .map(|k| {
                let mut m = linalg::zeros(total, total);
                let mut off = 0;
                for p in points {
                    let l = p.level();
                    m.view_mut((off, off), (l, l)).copy_from(&p.components[k]);
                    off += l;
                }
                m
            })
            .collect();
        Ok(MatrixTuple { components })
    }

    /// `k`-fold direct sum `Z ⊕ ⋯ ⊕ Z`.
    pub fn amplify(&self, k: usize) -> Result<MatrixTuple> {
        let v = vec![self; k];
        Self::direct_sum_all(&v)
    }

    /// `(α Z_1 α⁻¹, …, α Z_d α⁻¹)`.
    pub fn similarity(&self, alpha: &CMat) -> Result<MatrixTuple> {
        let n = self.level();
        if alpha.shape() != (n, n) {
            return Err(Error::dim("similarity matrix must be n x n"));
        }
        let cond = linalg::condition_number(alpha);
        if !(cond <= MAX_SIMILARITY_COND) {
            return Err(Error::IllConditioned { cond });
        }
        let inv = linalg::inverse(alpha)?;
        Ok(MatrixTuple { components: self.components.iter().map(|z| alpha * z * &inv).collect() })
    }

    pub fn scaled(&self, t: f64) -> MatrixTuple {
        MatrixTuple { components: self.components.iter().map(|z| z.scale(t)).collect() }
    }

    /// `‖[Z_1 ⋯ Z_d]‖`, the row-ball norm.
    pub fn row_norm(&self) -> f64 {
        let n = self.level();
        let mut row = linalg::zeros(n, n * self.d());
        for (k, z) in self.components.iter().enumerate() {
            row.view_mut((0, k * n), (n, n)).copy_from(z);
        }
        linalg::norm2(&row)
    }

    /// Largest commutator `‖Z_i Z_j − Z_j Z_i‖` over all pairs.
    pub fn commutator_norm(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.d() {
            for j in (i + 1)..self.d() {
                let (a, b) = (&self.components[i], &self.components[j]);
                worst = worst.max(linalg::norm2(&(a * b - b * a)));
            }
        }
        worst
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize) -> MatrixTuple {
        MatrixTuple { components: (0..d).map(|_| linalg::random_gaussian(rng, n, n)).collect() }
    }
}

/// Outcome of [`check_intertwining`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntertwiningCheck {
    /// `‖α Z_k − Z̃_k α‖ ≤ tol` for every `k`.
    pub points_intertwined: bool,
    /// `‖(I_s ⊗ α) V − Ṽ (I_r ⊗ α)‖ ≤ tol`.
    pub values_intertwined: bool,
}

impl IntertwiningCheck {
    pub fn holds(&self) -> bool {
        self.points_intertwined && self.values_intertwined
    }
}

/// Necessary condition for `V = f(Z)`, `Ṽ = f(Z̃)` with `f` an nc function,
/// given an intertwiner `α` (`m × n`) with `α Z = Z̃ α`.
pub fn check_intertwining(
    z: &MatrixTuple,
    zt: &MatrixTuple,
    alpha: &CMat,
    v: &CMat,
    vt: &CMat,
    tol: f64,
) -> Result<IntertwiningCheck> {
    let (n, m) = (z.level(), zt.level());
    if z.d() != zt.d() {
        return Err(Error::dim("intertwining tuples have different variable counts"));
    }
    if alpha.shape() != (m, n) {
        return Err(Error::dim(format!("alpha must be {m}x{n}")));
    }
    if v.nrows() % n != 0 || v.ncols() % n != 0 {
        return Err(Error::dim("V is not a grid of n x n blocks"));
    }
    let (s, r) = (v.nrows() / n, v.ncols() / n);
    if vt.shape() != (s * m, r * m) {
        return Err(Error::dim(format!("Vtilde must be {}x{}", s * m, r * m)));
    }
    let points_intertwined = z
        .components()
        .iter()
        .zip(zt.components())
        .all(|(zk, ztk)| linalg::norm2(&(alpha * zk - ztk * alpha)) <= tol);
    let lhs = linalg::kron(&linalg::identity(s), alpha) * v;
    let rhs = vt * linalg::kron(&linalg::identity(r), alpha);
    let values_intertwined = linalg::norm2(&(lhs - rhs)) <= tol;
    Ok(IntertwiningCheck { points_intertwined, values_intertwined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn nilpotent_pair() -> MatrixTuple {
        MatrixTuple::new(vec![
            real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn empty_word_is_identity() {
        let z = nilpotent_pair();
        assert_eq!(z.eval_word(&Word::empty()).unwrap(), linalg::identity(2));
    }

    #[test]
    fn word_product_order() {
        let z = nilpotent_pair();
        let got = z.eval_word(&Word::new(vec![1, 2])).unwrap();
        // Z1 Z2 computed by hand
        assert_eq!(got, real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        let got = z.eval_word(&Word::new(vec![2, 1])).unwrap();
        assert_eq!(got, linalg::zeros(2, 2));
    }

    #[test]
    fn jordan_square() {
        let lam = c(0.3, -0.2);
        let mut j = linalg::zeros(2, 2);
        j[(0, 0)] = lam;
        j[(1, 1)] = lam;
        j[(0, 1)] = c(1.0, 0.0);
        let z = MatrixTuple::new(vec![j]).unwrap();
        let sq = z.eval_word(&Word::new(vec![1, 1])).unwrap();
        assert!((sq[(0, 0)] - lam * lam).norm() < 1e-15);
        assert!((sq[(0, 1)] - lam * 2.0).norm() < 1e-15);
        assert!(sq[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn letter_out_of_range() {
        let z = nilpotent_pair();
        assert!(matches!(
            z.eval_word(&Word::letter(3)),
            Err(Error::LetterOutOfRange { letter: 3, d: 2 })
        ));
    }

    #[test]
    fn word_product_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = MatrixTuple::random(&mut rng, 3, 3);
        let a = Word::new(vec![1, 3, 2]);
        let b = Word::new(vec![2, 2, 1]);
        let lhs = z.eval_word(&a.concat(&b)).unwrap();
        let rhs = z.eval_word(&a).unwrap() * z.eval_word(&b).unwrap();
        assert!(linalg::max_abs(&(lhs - &rhs)) <= 1e-12 * linalg::max_abs(&rhs).max(1.0));
    }

    #[test]
    fn direct_sum_level_and_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = MatrixTuple::random(&mut rng, 2, 2);
        let w = MatrixTuple::random(&mut rng, 2, 3);
        assert_eq!(z.direct_sum(&w).unwrap().level(), 5);
        let u = MatrixTuple::random(&mut rng, 1, 3);
        assert!(z.direct_sum(&u).is_err());
    }

    #[test]
    fn similarity_roundtrip_and_rejection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = MatrixTuple::random(&mut rng, 2, 3);
        assert_eq!(z.similarity(&linalg::identity(3)).unwrap(), z);
        let a = linalg::random_well_conditioned(&mut rng, 3, 5.0);
        let back = z.similarity(&a).unwrap().similarity(&linalg::inverse(&a).unwrap()).unwrap();
        for (x, y) in back.components().iter().zip(z.components()) {
            assert!(linalg::max_abs(&(x - y)) < 1e-10);
        }
        let singular = real_matrix(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(z.similarity(&singular), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn intertwining_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let z = MatrixTuple::random(&mut rng, 2, 2);
        let v = linalg::random_gaussian(&mut rng, 2, 2);
        let chk = check_intertwining(&z, &z, &linalg::identity(2), &v, &v, 1e-12).unwrap();
        assert!(chk.holds());

        // the nilpotent/projection pair has only scalar self-intertwiners, so any
        // value passes against a scalar alpha
        let p = nilpotent_pair();
        let alpha = linalg::identity(2).scale(2.5);
        let chk = check_intertwining(&p, &p, &alpha, &v, &v, 1e-12).unwrap();
        assert!(chk.holds());

        let z0 = MatrixTuple::new(vec![real_matrix(1, 1, &[0.0])]).unwrap();
        let z1 = MatrixTuple::new(vec![real_matrix(1, 1, &[1.0])]).unwrap();
        let one = real_matrix(1, 1, &[1.0]);
        let chk = check_intertwining(&z0, &z1, &one, &one, &one, 1e-12).unwrap();
        assert!(!chk.points_intertwined);
        assert!(!chk.holds());
    }
}
