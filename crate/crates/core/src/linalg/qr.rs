//! Shifted QR iterations on upper Hessenberg matrices (eigenvalues only).

use super::{Matrix, Scalar, C64};
use crate::error::{Error, Result};

/// Plane rotation `[c s; -s̄ c]` mapping `(a, b)` to `(r, 0)`.
#[inline]
fn givens(a: C64, b: C64) -> (f64, C64, C64) {
    if b == C64::new(0.0, 0.0) {
        return (1.0, C64::new(0.0, 0.0), a);
    }
    let nb = b.norm();
    if a == C64::new(0.0, 0.0) {
        return (0.0, b.conj() / nb, C64::new(nb, 0.0));
    }
    let na = a.norm();
    let nrm = na.hypot(nb);
    let alpha = a / na;
    (na / nrm, alpha * b.conj() / nrm, alpha * nrm)
}

/// Eigenvalue of `[a b; c d]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let p = (a - d) * 0.5;
    let bc = b * c;
    let disc = (p * p + bc).sqrt();
    let plus = p + disc;
    let minus = p - disc;
    let denom = if plus.norm() >= minus.norm() { plus } else { minus };
    if denom.norm() == 0.0 {
        d
    } else {
        d - bc / denom
    }
}

/// Single-shift complex QR on an upper Hessenberg matrix (destroyed).
///
/// Deflation follows the Ahues–Tisseur criterion; an exceptional shift is
/// used every tenth iteration on a stalled block.
pub fn complex_hessenberg_eigenvalues(h: &mut Matrix<C64>) -> Result<Vec<C64>> {
    let n = h.rows();
    let zero = C64::new(0.0, 0.0);
    let mut w = vec![zero; n];
    if n == 0 {
        return Ok(w);
    }
    let ulp = f64::EPSILON;
    let smlnum = f64::MIN_POSITIVE * (n as f64 / ulp);
    let itmax = 30 * n.max(10);
    let mut total = 0usize;
    let mut i = n - 1;
    loop {
        let mut its = 0usize;
        loop {
            let mut l = i;
            while l > 0 {
                let sub = h[(l, l - 1)].abs1();
                if sub <= smlnum {
                    break;
                }
                let mut tst = h[(l - 1, l - 1)].abs1() + h[(l, l)].abs1();
                if tst == 0.0 {
                    if l >= 2 {
                        tst += h[(l - 1, l - 2)].abs1();
                    }
                    if l < i {
                        tst += h[(l + 1, l)].abs1();
                    }
                }
                if sub <= ulp * tst {
                    let up = h[(l - 1, l)].abs1();
                    let ab = sub.max(up);
                    let ba = sub.min(up);
                    let d1 = h[(l, l)].abs1();
                    let d2 = (h[(l - 1, l - 1)] - h[(l, l)]).abs1();
                    let aa = d1.max(d2);
                    let bb = d1.min(d2);
                    let s = aa + ab;
                    if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                        break;
                    }
                }
                l -= 1;
            }
            if l > 0 {
                h[(l, l - 1)] = zero;
            }
            if l == i {
                w[i] = h[(i, i)];
                break;
            }
            its += 1;
            total += 1;
            if total > itmax {
                return Err(Error::NoConvergence(format!(
                    "complex QR exceeded {itmax} iterations with {} eigenvalues left",
                    i + 1
                )));
            }
            let shift = if its.is_multiple_of(10) {
                h[(i, i)] + C64::new(0.75 * h[(i, i - 1)].re.abs() + 0.75 * h[(i, i - 1)].im.abs(), 0.0)
            } else {
                wilkinson_shift(h[(i - 1, i - 1)], h[(i - 1, i)], h[(i, i - 1)], h[(i, i)])
            };
            single_shift_sweep(h, l, i, shift);
        }
        if i == 0 {
            break;
        }
        i -= 1;
    }
    Ok(w)
}

/// One implicit bulge chase over the active block `lo..=hi`.
fn single_shift_sweep(h: &mut Matrix<C64>, lo: usize, hi: usize, shift: C64) {
    let zero = C64::new(0.0, 0.0);
    let n = h.rows();
    for k in lo..hi {
        let (x, y) = if k == lo {
            (h[(lo, lo)] - shift, h[(lo + 1, lo)])
        } else {
            (h[(k, k - 1)], h[(k + 1, k - 1)])
        };
        let (c, s, r) = givens(x, y);
        if k > lo {
            h[(k, k - 1)] = r;
            h[(k + 1, k - 1)] = zero;
        }
        let sc = s.conj();
        {
            let data = h.as_mut_slice();
            for j in k..=hi {
                let base = j * n;
                let a = data[base + k];
                let b = data[base + k + 1];
                data[base + k] = a * c + s * b;
                data[base + k + 1] = b * c - sc * a;
            }
        }
        let rmax = (k + 2).min(hi);
        let (ck, ck1) = h.cols_mut2(k, k + 1);
        for (a, b) in ck[lo..=rmax].iter_mut().zip(&mut ck1[lo..=rmax]) {
            let x = *a;
            let y = *b;
            *a = x * c + sc * y;
            *b = y * c - s * x;
        }
    }
}

/// Francis double-shift QR on a real upper Hessenberg matrix (destroyed).
///
/// Values-only variant of the classical EISPACK `hqr` iteration.
pub fn real_hessenberg_eigenvalues(h: &mut Matrix<f64>) -> Result<Vec<C64>> {
    let nn = h.rows();
    let mut wr = vec![0.0; nn];
    let mut wi = vec![0.0; nn];
    if nn == 0 {
        return Ok(Vec::new());
    }
    let eps = f64::EPSILON;
    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    let low = 0isize;
    let mut n = nn as isize - 1;
    let mut exshift = 0.0;
    let mut iter = 0usize;
    let mut total = 0usize;
    let itmax = 30 * nn.max(10);
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut x, mut y, mut w);

    macro_rules! hh {
        ($i:expr, $j:expr) => {
            h[($i as usize, $j as usize)]
        };
    }

    while n >= low {
        let mut l = n;
        while l > low {
            s = hh!(l - 1, l - 1).abs() + hh!(l, l).abs();
            if s == 0.0 {
                s = norm;
            }
            if hh!(l, l - 1).abs() < eps * s {
                break;
            }
            l -= 1;
        }
        if l == n {
            let v = hh!(n, n) + exshift;
            hh!(n, n) = v;
            wr[n as usize] = v;
            wi[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            w = hh!(n, n - 1) * hh!(n - 1, n);
            p = (hh!(n - 1, n - 1) - hh!(n, n)) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            hh!(n, n) += exshift;
            hh!(n - 1, n - 1) += exshift;
            x = hh!(n, n);
            let (a, b) = ((n - 1) as usize, n as usize);
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                wr[a] = x + z;
                wr[b] = wr[a];
                if z != 0.0 {
                    wr[b] = x - w / z;
                }
                wi[a] = 0.0;
                wi[b] = 0.0;
            } else {
                wr[a] = x + p;
                wr[b] = x + p;
                wi[a] = z;
                wi[b] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = hh!(n, n);
            y = 0.0;
            w = 0.0;
            if l < n {
                y = hh!(n - 1, n - 1);
                w = hh!(n, n - 1) * hh!(n - 1, n);
            }
            if iter == 10 {
                exshift += x;
                for i in low..=n {
                    hh!(i, i) -= x;
                }
                s = hh!(n, n - 1).abs() + hh!(n - 1, n - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        hh!(i, i) -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total += 1;
            if total > itmax {
                return Err(Error::NoConvergence(format!(
                    "real QR exceeded {itmax} iterations with {} eigenvalues left",
                    n + 1
                )));
            }

            let mut m = n - 2;
            loop {
                z = hh!(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / hh!(m + 1, m) + hh!(m, m + 1);
                q = hh!(m + 1, m + 1) - z - r - s;
                r = hh!(m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if hh!(m, m - 1).abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (hh!(m - 1, m - 1).abs() + z.abs() + hh!(m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=n {
                hh!(i, i - 2) = 0.0;
                if i > m + 2 {
                    hh!(i, i - 3) = 0.0;
                }
            }

            let mut k = m;
            while k < n {
                let notlast = k != n - 1;
                if k != m {
                    p = hh!(k, k - 1);
                    q = hh!(k + 1, k - 1);
                    r = if notlast { hh!(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        hh!(k, k - 1) = -s * x;
                    } else if l != m {
                        hh!(k, k - 1) = -hh!(k, k - 1);
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    // Rows k..k+2, columns k..=n of the active block.
                    for j in k..=n {
                        p = hh!(k, j) + q * hh!(k + 1, j);
                        if notlast {
                            p += r * hh!(k + 2, j);
                            hh!(k + 2, j) -= p * z;
                        }
                        hh!(k, j) -= p * x;
                        hh!(k + 1, j) -= p * y;
                    }
                    // Columns k..k+2, rows l..=min(n, k+3).
                    let imax = n.min(k + 3);
                    let (ku, lu) = (k as usize, l as usize);
                    let rows = lu..=imax as usize;
                    if notlast {
                        let (c0, rest) = h.cols_mut_from(ku, 3);
                        let (c1, c2) = rest.split_at_mut(nn);
                        for i in rows {
                            let pp = x * c0[i] + y * c1[i] + z * c2[i];
                            c2[i] -= pp * r;
                            c0[i] -= pp;
                            c1[i] -= pp * q;
                        }
                    } else {
                        let (c0, c1) = h.cols_mut_from(ku, 2);
                        for i in rows {
                            let pp = x * c0[i] + y * c1[i];
                            c0[i] -= pp;
                            c1[i] -= pp * q;
                        }
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| C64::new(re, im)).collect())
}
