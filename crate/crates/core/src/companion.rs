//! Polynomial roots via companion-matrix eigenvalues.
//!
//! This is the cross-check route for [`crate::rootfind`]: a completely
//! separate algorithm family (shifted Hessenberg QR iteration) that shares no
//! code with the Aberth path. Quadratic storage and cubic time keep it to
//! small and moderate degrees; the simultaneous iteration remains the primary
//! method.

use num_complex::Complex64;

use crate::{Error, Result};

/// Dense square complex matrix, row major.
struct Mat {
    n: usize,
    a: Vec<Complex64>,
}

impl Mat {
    fn zeros(n: usize) -> Self {
        Mat {
            n,
            a: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] = v;
    }
}

/// All roots of the polynomial with the given ascending coefficients, as the
/// eigenvalues of its balanced companion matrix.
pub fn companion_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
        coeffs.pop();
    }
    if coeffs.len() <= 1 {
        return Err(Error::DegreeZero);
    }
    let zero_roots = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced = &coeffs[zero_roots..];
    let mut roots = vec![Complex64::new(0.0, 0.0); zero_roots];

    let d = reduced.len() - 1;
    if d >= 1 {
        let lead = reduced[d];
        let mut m = Mat::zeros(d);
        for i in 1..d {
            m.set(i, i - 1, Complex64::new(1.0, 0.0));
        }
        for (i, &c) in reduced.iter().take(d).enumerate() {
            m.set(i, d - 1, -c / lead);
        }
        balance(&mut m);
        roots.extend(hessenberg_eigenvalues(m)?);
    }
    Ok(roots)
}

/// Diagonal similarity scaling with powers of two until row and column norms
/// are roughly equal (Parlett–Reinsch).
fn balance(m: &mut Mat) {
    let n = m.n;
    for _pass in 0..32 {
        let mut done = true;
        for i in 0..n {
            let mut row = 0.0f64;
            let mut col = 0.0f64;
            for j in 0..n {
                if j != i {
                    row += m.at(i, j).norm();
                    col += m.at(j, i).norm();
                }
            }
            if row == 0.0 || col == 0.0 {
                continue;
            }
            let start = col + row;
            let mut factor = 1.0f64;
            while col < row / 2.0 {
                col *= 2.0;
                row /= 2.0;
                factor *= 2.0;
            }
            while col >= row * 2.0 {
                col /= 2.0;
                row *= 2.0;
                factor /= 2.0;
            }
            if col + row < 0.95 * start {
                done = false;
                let inv = 1.0 / factor;
                for j in 0..n {
                    let v = m.at(i, j) * inv;
                    m.set(i, j, v);
                }
                for j in 0..n {
                    let v = m.at(j, i) * factor;
                    m.set(j, i, v);
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Complex Givens rotation `G = [[c, s], [-conj(s), c]]` with real `c` such
/// that `G [x; y] = [r; 0]`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    if y.norm() == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let xn = x.norm();
    if xn == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let t = (xn * xn + y.norm_sqr()).sqrt();
    (xn / t, (x / xn) * y.conj() / t)
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d` (Wilkinson shift).
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = (tr - disc) * 0.5;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvalues of an upper Hessenberg matrix by shifted QR with deflation.
fn hessenberg_eigenvalues(mut h: Mat) -> Result<Vec<Complex64>> {
    let n = h.n;
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n;
    let mut iters = 0usize;
    let budget = 60 * n.max(10);

    while hi > 0 {
        if hi == 1 {
            eigs.push(h.at(0, 0));
            break;
        }
        // Deflate at the first negligible subdiagonal from the bottom.
        let mut lo = 0;
        for m in (1..hi).rev() {
            let sub = h.at(m, m - 1).norm();
            if sub <= f64::EPSILON * (h.at(m - 1, m - 1).norm() + h.at(m, m).norm()) {
                h.set(m, m - 1, Complex64::new(0.0, 0.0));
                lo = m;
                break;
            }
        }
        if lo == hi - 1 {
            eigs.push(h.at(hi - 1, hi - 1));
            hi -= 1;
            iters = 0;
            continue;
        }
        if lo == hi - 2 {
            // Solve the trailing 2x2 block directly.
            let (a, b) = (h.at(lo, lo), h.at(lo, lo + 1));
            let (c, d) = (h.at(lo + 1, lo), h.at(lo + 1, lo + 1));
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr - det * 4.0).sqrt();
            eigs.push((tr + disc) * 0.5);
            eigs.push((tr - disc) * 0.5);
            hi -= 2;
            iters = 0;
            continue;
        }

        iters += 1;
        if iters > budget {
            return Err(Error::Numeric(format!(
                "QR iteration exceeded {budget} sweeps on a block of size {}",
                hi - lo
            )));
        }
        let m = hi - 1;
        let shift = if iters.is_multiple_of(10) {
            // Exceptional shift to break potential cycles.
            let kick = h.at(m, m - 1).norm()
                + if m >= 2 {
                    h.at(m - 1, m - 2).norm()
                } else {
                    0.0
                };
            h.at(m, m) + Complex64::new(0.75 * kick, 0.0)
        } else {
            wilkinson_shift(
                h.at(m - 1, m - 1),
                h.at(m - 1, m),
                h.at(m, m - 1),
                h.at(m, m),
            )
        };
        qr_sweep(&mut h, lo, hi, shift);
    }
    Ok(eigs)
}

/// One explicit shifted QR step restricted to the decoupled block
/// `[lo, hi)`: factor `H - σI = QR` with Givens rotations, form `RQ + σI`.
fn qr_sweep(h: &mut Mat, lo: usize, hi: usize, shift: Complex64) {
    let m = hi - lo;
    let mut cs = vec![0.0f64; m - 1];
    let mut sn = vec![Complex64::new(0.0, 0.0); m - 1];

    for k in lo..hi {
        let v = h.at(k, k) - shift;
        h.set(k, k, v);
    }
    for k in lo..hi - 1 {
        let (c, s) = givens(h.at(k, k), h.at(k + 1, k));
        cs[k - lo] = c;
        sn[k - lo] = s;
        for col in k..hi {
            let t1 = h.at(k, col);
            let t2 = h.at(k + 1, col);
            h.set(k, col, t1 * c + s * t2);
            h.set(k + 1, col, -s.conj() * t1 + t2 * c);
        }
        h.set(k + 1, k, Complex64::new(0.0, 0.0));
    }
    for k in lo..hi - 1 {
        let c = cs[k - lo];
        let s = sn[k - lo];
        for row in lo..=(k + 1).min(hi - 1) {
            let t1 = h.at(row, k);
            let t2 = h.at(row, k + 1);
            h.set(row, k, t1 * c + s.conj() * t2);
            h.set(row, k + 1, -s * t1 + t2 * c);
        }
    }
    for k in lo..hi {
        let v = h.at(k, k) + shift;
        h.set(k, k, v);
    }
}
