use super::{Matrix, Scalar};

/// LU factorization with partial pivoting in LAPACK-style band storage.
///
/// Row interchanges are applied LINPACK-style (not propagated into the
/// stored multipliers), so the upper factor has bandwidth `kl + ku`.
/// A dense matrix is just the case `kl = ku = n - 1`.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    n: usize,
    kl: usize,
    ku2: usize,
    ldab: usize,
    ab: Vec<T>,
    piv: Vec<usize>,
    norm1: f64,
    zero_pivots: usize,
}

impl<T: Scalar> BandLu<T> {
    /// Factors `a` using its detected bandwidth. Exact zero pivots are
    /// left in place and make [`condition_estimate`](Self::condition_estimate) infinite.
    pub fn factor(a: &Matrix<T>) -> Self {
        let (kl, ku) = a.bandwidth();
        Self::factor_band(a, kl, ku, false)
    }

    /// Factors `a` restricted to the band `(kl, ku)`. With `perturb_zero_pivots`
    /// a vanishing pivot is replaced by `ε‖A‖₁`, which is what inverse
    /// iteration at an exact eigenvalue needs.
    pub fn factor_band(a: &Matrix<T>, kl: usize, ku: usize, perturb_zero_pivots: bool) -> Self {
        Self::factor_with(a.rows(), kl, ku, perturb_zero_pivots, |i, j| a[(i, j)])
    }

    /// Factors the matrix whose band entries are produced by `entry(i, j)`.
    pub fn factor_with(
        n: usize,
        kl: usize,
        ku: usize,
        perturb_zero_pivots: bool,
        entry: impl Fn(usize, usize) -> T,
    ) -> Self {
        let kl = kl.min(n.saturating_sub(1));
        let ku = ku.min(n.saturating_sub(1));
        let ku2 = (kl + ku).min(n.saturating_sub(1));
        let ldab = kl + ku2 + 1;
        let mut ab = vec![T::zero(); ldab * n];
        let mut norm1 = 0.0f64;
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            let mut colsum = 0.0;
            for i in lo..=hi {
                let v = entry(i, j);
                colsum += v.abs();
                ab[j * ldab + ku2 + i - j] = v;
            }
            norm1 = norm1.max(colsum);
        }
        let mut lu = BandLu {
            n,
            kl,
            ku2,
            ldab,
            ab,
            piv: vec![0; n],
            norm1,
            zero_pivots: 0,
        };
        lu.eliminate(perturb_zero_pivots);
        lu
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ldab + self.ku2 + i - j
    }

    fn eliminate(&mut self, perturb_zero_pivots: bool) {
        let n = self.n;
        let tiny = f64::EPSILON * self.norm1.max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let base = self.idx(k, k);
            let mut p = k;
            let mut best = -1.0;
            for (off, v) in self.ab[base..=base + (last - k)].iter().enumerate() {
                let a = v.abs1();
                if a > best {
                    best = a;
                    p = k + off;
                }
            }
            self.piv[k] = p;
            let jmax = (k + self.ku2).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.ab.swap(a, b);
                }
            }
            if self.ab[base].is_zero() {
                self.zero_pivots += 1;
                if perturb_zero_pivots {
                    self.ab[base] = T::from_real(tiny);
                } else {
                    continue;
                }
            }
            let inv = T::one() / self.ab[base];
            for v in &mut self.ab[base + 1..=base + (last - k)] {
                *v *= inv;
            }
            if last == k {
                continue;
            }
            let ldab = self.ldab;
            for j in k + 1..=jmax {
                let t = self.ab[self.idx(k, j)];
                if t.is_zero() {
                    continue;
                }
                let start_j = self.idx(k + 1, j);
                let (head, tail) = self.ab.split_at_mut(j * ldab);
                let mult = &head[base + 1..=base + (last - k)];
                let dst = &mut tail[start_j - j * ldab..start_j - j * ldab + (last - k)];
                for (d, &l) in dst.iter_mut().zip(mult) {
                    *d -= l * t;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn zero_pivots(&self) -> usize {
        self.zero_pivots
    }

    /// `‖A‖₁` of the factored matrix.
    pub fn norm1(&self) -> f64 {
        self.norm1
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let t = b[k];
            if t.is_zero() {
                continue;
            }
            let last = (k + self.kl).min(n - 1);
            let base = self.idx(k, k);
            for (bi, &l) in b[k + 1..=last].iter_mut().zip(&self.ab[base + 1..=base + (last - k)]) {
                *bi -= l * t;
            }
        }
        for k in (0..n).rev() {
            b[k] /= self.ab[self.idx(k, k)];
            let t = b[k];
            if t.is_zero() {
                continue;
            }
            let first = k.saturating_sub(self.ku2);
            let start = self.idx(first, k);
            for (bi, &u) in b[first..k].iter_mut().zip(&self.ab[start..start + (k - first)]) {
                *bi -= u * t;
            }
        }
    }

    /// Solves `Aᴴ x = c` in place.
    pub fn solve_conj_transpose_in_place(&self, c: &mut [T]) {
        let n = self.n;
        assert_eq!(c.len(), n);
        for k in 0..n {
            let first = k.saturating_sub(self.ku2);
            let start = self.idx(first, k);
            let mut s = c[k];
            for (zi, &u) in c[first..k].iter().zip(&self.ab[start..start + (k - first)]) {
                s -= u.conj() * *zi;
            }
            c[k] = s / self.ab[self.idx(k, k)].conj();
        }
        for k in (0..n).rev() {
            let last = (k + self.kl).min(n - 1);
            let base = self.idx(k, k);
            let mut s = c[k];
            for (zi, &l) in c[k + 1..=last].iter().zip(&self.ab[base + 1..=base + (last - k)]) {
                s -= l.conj() * *zi;
            }
            c[k] = s;
            let p = self.piv[k];
            if p != k {
                c.swap(k, p);
            }
        }
    }

    /// Hager–Higham estimate of `‖A⁻¹‖₁`.
    pub fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 0.0;
        }
        if self.zero_pivots > 0 {
            return f64::INFINITY;
        }
        let mut x = vec![T::from_real(1.0 / n as f64); n];
        let mut est = 0.0f64;
        let mut last_j = None;
        for iter in 0..5 {
            let mut y = x.clone();
            self.solve_in_place(&mut y);
            let ynorm: f64 = y.iter().map(|v| v.abs()).sum();
            if iter > 0 && ynorm <= est {
                break;
            }
            est = ynorm;
            let mut z: Vec<T> = y
                .iter()
                .map(|&v| {
                    let a = v.abs();
                    if a == 0.0 {
                        T::one()
                    } else {
                        v.scale(1.0 / a)
                    }
                })
                .collect();
            self.solve_conj_transpose_in_place(&mut z);
            let (j, _) = z
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
            if last_j == Some(j) {
                break;
            }
            last_j = Some(j);
            x = vec![T::zero(); n];
            x[j] = T::one();
        }
        let denom = (n.max(2) - 1) as f64;
        let mut alt: Vec<T> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                T::from_real(s * (1.0 + i as f64 / denom))
            })
            .collect();
        self.solve_in_place(&mut alt);
        let alt_est = 2.0 * alt.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
        est.max(alt_est)
    }

    /// Estimated 1-norm condition number `‖A‖₁ ‖A⁻¹‖₁`.
    pub fn condition_estimate(&self) -> f64 {
        self.norm1 * self.inverse_norm1_estimate()
    }
}
