use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};
use crate::tuple::MatrixTuple;
use crate::word::Word;

/// Finitely supported map from words to `s × r` coefficient matrices,
/// `Q(z) = Σ Q_w z^w`.
///
/// The term map is kept canonical: exactly-zero coefficients are dropped, so
/// polynomial equality is equality of term maps.
#[derive(Clone, Debug, PartialEq)]
pub struct NcPoly {
    d: usize,
    s: usize,
    r: usize,
    terms: BTreeMap<Word, CMat>,
}

/// Result of a domain test `‖Q(Z)‖ < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainCheck {
    pub in_domain: bool,
    pub norm: f64,
    pub margin: f64,
}

impl NcPoly {
    pub fn new(
        d: usize,
        s: usize,
        r: usize,
        terms: impl IntoIterator<Item = (Word, CMat)>,
    ) -> Result<Self> {
        if d == 0 || s == 0 || r == 0 {
            return Err(Error::InvalidArgument("polynomial dimensions must be positive".into()));
        }
        let mut map: BTreeMap<Word, CMat> = BTreeMap::new();
        for (w, m) in terms {
            w.check_alphabet(d)?;
            if m.shape() != (s, r) {
                return Err(Error::dim(format!(
                    "coefficient of {w} is {}x{}, expected {s}x{r}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !linalg::is_finite(&m) {
                return Err(Error::NonFinite);
            }
            match map.get_mut(&w) {
                Some(acc) => *acc += m,
                None => {
                    map.insert(w, m);
                }
            }
        }
        let mut p = NcPoly { d, s, r, terms: map };
        p.canonicalize();
        Ok(p)
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|_, m| m.iter().any(|z| *z != c(0.0, 0.0)));
    }

    pub fn zero(d: usize, s: usize, r: usize) -> Self {
        NcPoly { d, s, r, terms: BTreeMap::new() }
    }

    pub fn constant(d: usize, m: CMat) -> Result<Self> {
        let (s, r) = m.shape();
        Self::new(d, s, r, [(Word::empty(), m)])
    }

    /// The row pencil `[z_1 ⋯ z_d]` (`s = 1`, `r = d`).
    pub fn row_pencil(d: usize) -> Self {
        let terms = (1..=d).map(|k| {
            let mut m = linalg::zeros(1, d);
            m[(0, k - 1)] = c(1.0, 0.0);
            (Word::letter(k), m)
        });
        Self::new(d, 1, d, terms).expect("row pencil is well formed")
    }

    /// Scalar single-variable polynomial `Σ coeffs[k] z^k`.
    pub fn univariate(coeffs: &[C64]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(k, &a)| (Word::new(vec![1; k]), CMat::from_element(1, 1, a)));
        Self::new(1, 1, 1, terms).expect("scalar coefficients are well formed")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn terms(&self) -> &BTreeMap<Word, CMat> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, w: &Word) -> Option<&CMat> {
        self.terms.get(w)
    }

    /// Length of the longest word with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn is_row_pencil(&self) -> bool {
        *self == Self::row_pencil(self.d)
    }

    /// Coefficients `c_k` of a scalar single-variable polynomial.
    pub fn univariate_coefficients(&self) -> Result<Vec<C64>> {
        if self.d != 1 || self.s != 1 || self.r != 1 {
            return Err(Error::InvalidArgument("not a scalar single-variable polynomial".into()));
        }
        let mut out = vec![c(0.0, 0.0); self.degree() + 1];
        for (w, m) in &self.terms {
            out[w.len()] = m[(0, 0)];
        }
        Ok(out)
    }

    /// `Q(Z) = Σ Q_w ⊗ Z^w`, an `sn × rn` matrix whose block `(i, j)` is
    /// `Σ (Q_w)_{ij} Z^w`.
    pub fn eval(&self, z: &MatrixTuple) -> Result<CMat> {
        if z.d() != self.d {
            return Err(Error::dim(format!(
                "polynomial in {} variables evaluated at a {}-tuple",
                self.d,
                z.d()
            )));
        }
        let n = z.level();
        let mut out = linalg::zeros(self.s * n, self.r * n);
        let mut powers: HashMap<&[usize], CMat> = HashMap::new();
        for (w, coef) in &self.terms {
            let zw = word_power(z, w.letters(), &mut powers);
            for i in 0..self.s {
                for j in 0..self.r {
                    let q = coef[(i, j)];
                    if q != c(0.0, 0.0) {
                        let mut blk = out.view_mut((i * n, j * n), (n, n));
                        blk += zw.scale(1.0) * q;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Domain test for `D_Q = {Z : ‖Q(Z)‖ < 1}`.
    pub fn in_domain(&self, z: &MatrixTuple) -> Result<DomainCheck> {
        let norm = linalg::operator_norm(&self.eval(z)?)?;
        Ok(DomainCheck { in_domain: norm < 1.0, norm, margin: 1.0 - norm })
    }

    pub fn add(&self, other: &NcPoly) -> Result<NcPoly> {
        self.check_same_shape(other)?;
        let terms = self.terms.iter().chain(other.terms.iter()).map(|(w, m)| (w.clone(), m.clone()));
        Self::new(self.d, self.s, self.r, terms)
    }

    pub fn scale(&self, a: C64) -> NcPoly {
        let mut p = NcPoly {
            d: self.d,
            s: self.s,
            r: self.r,
            terms: self.terms.iter().map(|(w, m)| (w.clone(), m * a)).collect(),
        };
        p.canonicalize();
        p
    }

    /// Product by word convolution: `(PQ)_w = Σ_{u·v = w} P_u Q_v`.
    pub fn mul(&self, other: &NcPoly) -> Result<NcPoly> {
        if self.d != other.d || self.r != other.s {
            return Err(Error::dim("polynomial product with incompatible shapes"));
        }
        let mut map: BTreeMap<Word, CMat> = BTreeMap::new();
        for (u, p) in &self.terms {
            for (v, q) in &other.terms {
                let w = u.concat(v);
                let prod = p * q;
                match map.get_mut(&w) {
                    Some(acc) => *acc += prod,
                    None => {
                        map.insert(w, prod);
                    }
                }
            }
        }
        let mut out = NcPoly { d: self.d, s: self.s, r: other.r, terms: map };
        out.canonicalize();
        Ok(out)
    }

    /// Coefficientwise `M · Q_w`.
    pub fn left_mul(&self, m: &CMat) -> Result<NcPoly> {
        if m.ncols() != self.s {
            return Err(Error::dim("left factor does not match coefficient rows"));
        }
        Self::new(self.d, m.nrows(), self.r, self.terms.iter().map(|(w, q)| (w.clone(), m * q)))
    }

    /// Coefficientwise `Q_w · M`.
    pub fn right_mul(&self, m: &CMat) -> Result<NcPoly> {
        if m.nrows() != self.r {
            return Err(Error::dim("right factor does not match coefficient columns"));
        }
        Self::new(self.d, self.s, m.ncols(), self.terms.iter().map(|(w, q)| (w.clone(), q * m)))
    }

    /// Coefficientwise `Q_w ⊗ I_x`; evaluates to the operator written
    /// `Q(Z) ⊗ I_X` elsewhere in the crate.
    pub fn kron_identity(&self, x: usize) -> NcPoly {
        let id = linalg::identity(x);
        NcPoly {
            d: self.d,
            s: self.s * x,
            r: self.r * x,
            terms: self.terms.iter().map(|(w, q)| (w.clone(), linalg::kron(q, &id))).collect(),
        }
    }

    /// Drops terms whose largest coefficient entry is below `tol`.
    pub fn prune(&self, tol: f64) -> NcPoly {
        NcPoly {
            d: self.d,
            s: self.s,
            r: self.r,
            terms: self
                .terms
                .iter()
                .filter(|(_, m)| linalg::max_abs(m) >= tol)
                .map(|(w, m)| (w.clone(), m.clone()))
                .collect(),
        }
    }

    /// Random point of `D_Q` at level `n` with `‖Q(Z)‖ ≤ max_norm`.
    ///
    /// Draws a Gaussian direction `G` and bisects on `t` so that
    /// `‖Q(tG)‖` hits a uniformly drawn target in `(0, max_norm]`.
    pub fn sample_domain_point<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        n: usize,
        max_norm: f64,
    ) -> Result<MatrixTuple> {
        if !(max_norm > 0.0 && max_norm < 1.0) {
            return Err(Error::InvalidArgument("max_norm must lie in (0, 1)".into()));
        }
        for _ in 0..100 {
            let target = max_norm * rng.random_range(0.05..=1.0);
            let g = MatrixTuple::random(rng, self.d, n);
            let f = |t: f64| -> Result<f64> { Ok(linalg::norm2(&self.eval(&g.scaled(t))?)) };
            if f(0.0)? >= target {
                continue;
            }
            let mut hi = 1.0;
            let mut grew = 0;
            while f(hi)? <= target && grew < 60 {
                hi *= 2.0;
                grew += 1;
            }
            if grew == 60 {
                return Ok(g.scaled(hi));
            }
            let mut lo = 0.0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if f(mid)? <= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(g.scaled(lo));
        }
        Err(Error::InvalidArgument("could not sample a point of the domain".into()))
    }

    fn check_same_shape(&self, other: &NcPoly) -> Result<()> {
        if (self.d, self.s, self.r) != (other.d, other.s, other.r) {
            return Err(Error::dim("polynomials have different shapes"));
        }
        Ok(())
    }
}

fn word_power<'a>(z: &MatrixTuple, w: &'a [usize], memo: &mut HashMap<&'a [usize], CMat>) -> CMat {
    if let Some(m) = memo.get(w) {
        return m.clone();
    }
    let m = match w.split_last() {
        None => linalg::identity(z.level()),
        Some((&last, prefix)) => word_power(z, prefix, memo) * z.component(last),
    };
    memo.insert(w, m.clone());
    m
}

/// Operator `Q(Z)` of `q` at `z` (free-function form of [`NcPoly::eval`]).
pub fn eval_nc_poly(q: &NcPoly, z: &MatrixTuple) -> Result<CMat> {
    q.eval(z)
}
