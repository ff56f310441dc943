//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use cxbox::Complex64;

/// Classical cardinal B-spline of integer degree `n` (support `[0, n+1]`)
/// by the Cox–de Boor recurrence.
pub fn cardinal_bspline(n: usize, t: f64) -> f64 {
    if n == 0 {
        return if (0.0..1.0).contains(&t) { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    (t * cardinal_bspline(n - 1, t) + (nf + 1.0 - t) * cardinal_bspline(n - 1, t - 1.0)) / nf
}

fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(row, &bi)| {
        let mut r = row.clone();
        r.push(bi);
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

fn det(cols: &[Vec<f64>]) -> f64 {
    let n = cols.len();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    det
}

fn spans(cols: &[Vec<f64>], d: usize) -> bool {
    // Gram matrix Ξ Ξ^T is invertible iff the columns span
    let gram: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| cols.iter().map(|c| c[i] * c[j]).sum()).collect()).collect();
    det(&gram.iter().map(|r| r.clone()).collect::<Vec<_>>()).abs() > 1e-10
}

/// Classical box spline `M_Ξ(x)` (unit integral) by de Boor's recurrence
/// `(n-d) M_Ξ(x) = Σ_ξ t_ξ M_{Ξ∖ξ}(x) + (1-t_ξ) M_{Ξ∖ξ}(x-ξ)`, `x = Ξt`.
pub fn box_spline_de_boor(cols: &[Vec<f64>], x: &[f64]) -> f64 {
    let d = x.len();
    let n = cols.len();
    if !spans(cols, d) {
        return 0.0;
    }
    if n == d {
        let a: Vec<Vec<f64>> = (0..d).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        return match solve(&a, x) {
            Some(t) if t.iter().all(|&ti| (0.0..1.0).contains(&ti)) => 1.0 / det(cols).abs(),
            _ => 0.0,
        };
    }
    // minimum-norm t = Ξ^T (Ξ Ξ^T)^{-1} x
    let gram: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| cols.iter().map(|c| c[i] * c[j]).sum()).collect()).collect();
    let y = solve(&gram, x).expect("spanning columns");
    let mut acc = 0.0;
    for (i, xi) in cols.iter().enumerate() {
        let t: f64 = xi.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rest: Vec<Vec<f64>> = cols.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, c)| c.clone()).collect();
        let shifted: Vec<f64> = x.iter().zip(xi).map(|(a, b)| a - b).collect();
        acc += t * box_spline_de_boor(&rest, x) + (1.0 - t) * box_spline_de_boor(&rest, &shifted);
    }
    acc / (n - d) as f64
}

/// Expands integer degrees into a classical direction multiset: column `j`
/// repeated `z_j + 1` times.
pub fn repeated_columns(columns: &[Vec<f64>], degrees: &[usize]) -> Vec<Vec<f64>> {
    columns.iter().zip(degrees).flat_map(|(c, &z)| std::iter::repeat(c.clone()).take(z + 1)).collect()
}

/// `(z, Γ(z))` pairs from the high-precision table.
pub fn gamma_table() -> Vec<(Complex64, Complex64)> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/gamma_table.csv");
    let text = std::fs::read_to_string(path).expect("gamma table present");
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.trim().parse().expect("numeric field")).collect();
            (Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))
        })
        .collect()
}

/// `Σ_{k > k_start} |binom(z+1, k)|` by direct summation to `20(k_start+50)`
/// plus the integral remainder of the `k^{-(Re z+2)}` asymptote.
pub fn binomial_tail_brute(z: Complex64, k_start: usize) -> f64 {
    let a = z + 1.0;
    let end = 20 * (k_start + 50);
    let mut b = 1.0;
    let mut sum = 0.0;
    for k in 0..end {
        if k > k_start {
            sum += b;
        }
        b *= (a - k as f64).norm() / (k as f64 + 1.0);
    }
    sum + b * end as f64 / a.re
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
