//! Matrix exponential by scaling and squaring with adaptive Padé degree
//! (Higham 2005).

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::linalg::{identity, matmul, solve, CMatrix};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn norm1(a: ArrayView2<Complex64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled(a: &CMatrix, c: f64) -> CMatrix {
    a.mapv(|z| z * c)
}

/// Padé numerator pieces `(U, V)` for degree 3..9 from precomputed even powers.
fn pade_low(a: &CMatrix, powers: &[CMatrix], b: &[f64]) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let mut odd = scaled(&identity(n), b[1]);
    let mut even = scaled(&identity(n), b[0]);
    for (j, p) in powers.iter().enumerate() {
        odd.scaled_add(Complex64::new(b[2 * j + 3], 0.0), p);
        even.scaled_add(Complex64::new(b[2 * j + 2], 0.0), p);
    }
    (matmul(a.view(), odd.view()), even)
}

fn pade13(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let b = &B13;
    let c = |x: f64| Complex64::new(x, 0.0);
    let a2 = matmul(a.view(), a.view());
    let a4 = matmul(a2.view(), a2.view());
    let a6 = matmul(a4.view(), a2.view());

    let mut inner = scaled(&a6, b[13]);
    inner.scaled_add(c(b[11]), &a4);
    inner.scaled_add(c(b[9]), &a2);
    let mut u = matmul(a6.view(), inner.view());
    u.scaled_add(c(b[7]), &a6);
    u.scaled_add(c(b[5]), &a4);
    u.scaled_add(c(b[3]), &a2);
    for i in 0..n {
        u[[i, i]] += b[1];
    }
    let u = matmul(a.view(), u.view());

    let mut inner = scaled(&a6, b[12]);
    inner.scaled_add(c(b[10]), &a4);
    inner.scaled_add(c(b[8]), &a2);
    let mut v = matmul(a6.view(), inner.view());
    v.scaled_add(c(b[6]), &a6);
    v.scaled_add(c(b[4]), &a4);
    v.scaled_add(c(b[2]), &a2);
    for i in 0..n {
        v[[i, i]] += b[0];
    }
    (u, v)
}

fn pade_solve(u: CMatrix, v: CMatrix) -> CMatrix {
    let p = &v + &u;
    let q = &v - &u;
    solve(q.view(), p.view())
}

/// `exp(A)` for a square complex matrix.
pub fn expm(a: ArrayView2<Complex64>) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return Array2::zeros((0, 0));
    }
    let a = a.to_owned();
    let norm = norm1(a.view());

    for (deg, theta) in THETA {
        if norm <= theta {
            let a2 = matmul(a.view(), a.view());
            let mut powers = vec![a2];
            while powers.len() < (deg - 1) / 2 {
                let next = matmul(powers.last().unwrap().view(), powers[0].view());
                powers.push(next);
            }
            let coeffs: &[f64] = match deg {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(&a, &powers, coeffs);
            return pade_solve(u, v);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = scaled(&a, 0.5f64.powi(s));
    let (u, v) = pade13(&a);
    let mut x = pade_solve(u, v);
    for _ in 0..s {
        x = matmul(x.view(), x.view());
    }
    x
}
