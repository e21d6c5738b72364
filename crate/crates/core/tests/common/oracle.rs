//! Support-enumeration equilibrium finder for small nondegenerate zero-sum
//! games. Independent of the simplex route in the library.

#![allow(dead_code)]

pub struct OracleEquilibrium {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
    pub value: f64,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

/// Solve the square system with Cramer-free elimination (full pivoting).
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let mut piv = c;
        for r in c..n {
            if a[r][c].abs() > a[piv][c].abs() {
                piv = r;
            }
        }
        if a[piv][c].abs() < 1e-13 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Enumerate equal-size supports; return the first pair satisfying the
/// best-response conditions.
pub fn support_enumeration(a: &[Vec<f64>]) -> Option<OracleEquilibrium> {
    let m = a.len();
    let n = a[0].len();
    let eps = 1e-10;
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                // Row mix p on `rows`, value v: sum_i p_i a[i][j] = v for j in cols.
                let mut sys = Vec::new();
                let mut rhs = Vec::new();
                for &j in &cols {
                    let mut eq: Vec<f64> = rows.iter().map(|&i| a[i][j]).collect();
                    eq.push(-1.0);
                    sys.push(eq);
                    rhs.push(0.0);
                }
                let mut norm = vec![1.0; k];
                norm.push(0.0);
                sys.push(norm);
                rhs.push(1.0);
                let Some(ps) = solve(sys, rhs) else { continue };
                let mut sys = Vec::new();
                let mut rhs = Vec::new();
                for &i in &rows {
                    let mut eq: Vec<f64> = cols.iter().map(|&j| a[i][j]).collect();
                    eq.push(-1.0);
                    sys.push(eq);
                    rhs.push(0.0);
                }
                let mut norm = vec![1.0; k];
                norm.push(0.0);
                sys.push(norm);
                rhs.push(1.0);
                let Some(qs) = solve(sys, rhs) else { continue };
                if ps[..k].iter().chain(&qs[..k]).any(|&x| x < -eps) {
                    continue;
                }
                let v = ps[k];
                let mut row = vec![0.0; m];
                let mut col = vec![0.0; n];
                for (t, &i) in rows.iter().enumerate() {
                    row[i] = ps[t];
                }
                for (t, &j) in cols.iter().enumerate() {
                    col[j] = qs[t];
                }
                let row_ok = (0..m).all(|i| (0..n).map(|j| a[i][j] * col[j]).sum::<f64>() <= v + eps);
                let col_ok = (0..n).all(|j| (0..m).map(|i| row[i] * a[i][j]).sum::<f64>() >= v - eps);
                if row_ok && col_ok {
                    return Some(OracleEquilibrium { row, col, value: v });
                }
            }
        }
    }
    None
}

/// Largest violation of the equilibrium conditions for (row, col, value).
pub fn equilibrium_violation(a: &[Vec<f64>], row: &[f64], col: &[f64], value: f64) -> f64 {
    let m = a.len();
    let n = a[0].len();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let payoff: f64 = (0..n).map(|j| a[i][j] * col[j]).sum();
        worst = worst.max(payoff - value);
        if row[i] > 1e-12 {
            worst = worst.max((payoff - value).abs());
        }
    }
    for j in 0..n {
        let payoff: f64 = (0..m).map(|i| row[i] * a[i][j]).sum();
        worst = worst.max(value - payoff);
        if col[j] > 1e-12 {
            worst = worst.max((payoff - value).abs());
        }
    }
    worst
}
