use super::{Matrix, Scalar};

/// Parlett–Reinsch diagonal balancing with power-of-two factors.
///
/// Returns the scaling `d`; the balanced matrix is `D⁻¹ A D`, which has the
/// same eigenvalues.
pub fn balance<T: Scalar>(a: &mut Matrix<T>) -> Vec<f64> {
    let n = a.rows();
    let mut d = vec![1.0; n];
    let radix = 2.0f64;
    let radix2 = radix * radix;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs1();
                    r += a[(i, j)].abs1();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix2;
            }
            g = r * radix;
            while c >= g {
                f /= radix;
                c /= radix2;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                d[i] *= f;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] = a[(i, j)].scale(inv);
                }
                for v in a.col_mut(i) {
                    *v = v.scale(f);
                }
            }
        }
        if converged {
            return d;
        }
    }
}

/// Householder reduction to upper Hessenberg form, in place (similarity).
pub fn reduce_to_hessenberg<T: Scalar>(h: &mut Matrix<T>) {
    let n = h.rows();
    assert!(h.is_square());
    if n < 3 {
        return;
    }
    let mut v = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    for k in 0..n - 2 {
        let norm = h.col(k)[k + 1..].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let tail = h.col(k)[k + 2..].iter().map(|x| x.abs1()).sum::<f64>();
        if norm == 0.0 || tail == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.abs() == 0.0 {
            T::one()
        } else {
            x0.scale(1.0 / x0.abs())
        };
        let alpha = -phase.scale(norm);
        v[k + 1..].copy_from_slice(&h.col(k)[k + 1..]);
        v[k + 1] -= alpha;
        let vnorm2: f64 = v[k + 1..].iter().map(|x| x.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        let vk = &v[k + 1..];

        // Left: H[k+1.., j] -= beta v (vᴴ H[k+1.., j]) for j > k.
        for j in k + 1..n {
            let col = &mut h.col_mut(j)[k + 1..];
            let s = col
                .iter()
                .zip(vk)
                .fold(T::zero(), |acc, (&x, &vi)| acc + vi.conj() * x)
                .scale(beta);
            for (x, &vi) in col.iter_mut().zip(vk) {
                *x -= vi * s;
            }
        }
        // Right: H[:, k+1..] -= beta (H[:, k+1..] v) vᴴ.
        w.iter_mut().for_each(|x| *x = T::zero());
        for (off, &vj) in vk.iter().enumerate() {
            let col = h.col(k + 1 + off);
            for (wi, &x) in w.iter_mut().zip(col) {
                *wi += x * vj;
            }
        }
        for (off, &vj) in vk.iter().enumerate() {
            let f = vj.conj().scale(beta);
            let col = h.col_mut(k + 1 + off);
            for (x, &wi) in col.iter_mut().zip(&w) {
                *x -= wi * f;
            }
        }
        let col = h.col_mut(k);
        col[k + 1] = alpha;
        for x in &mut col[k + 2..] {
            *x = T::zero();
        }
    }
}
