//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use tfcdr::Problem;

/// Γ(x) from a shifted Stirling series: Γ(x) = Γ(x+n)/(x(x+1)…(x+n−1)).
pub fn stirling_gamma(x: f64) -> f64 {
    let shift = 20usize;
    let z = x + shift as f64;
    let ln = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * z)
        - 1.0 / (360.0 * z.powi(3))
        + 1.0 / (1260.0 * z.powi(5))
        - 1.0 / (1680.0 * z.powi(7))
        + 1.0 / (1188.0 * z.powi(9));
    let mut g = ln.exp();
    for n in 0..shift {
        g /= x + n as f64;
    }
    g
}

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        m.swap(k, p);
        x.swap(k, p);
        for r in k + 1..n {
            let l = m[r][k] / m[k][k];
            for c in k..n {
                m[r][c] -= l * m[k][c];
            }
            x[r] -= l * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| m[k][c] * x[c]).sum();
        x[k] = (x[k] - s) / m[k][k];
    }
    x
}

/// Thomas algorithm for sub/main/super diagonals.
pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / den } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Weights written straight from their closed forms with powf.
pub struct RefWeights {
    pub lambda: f64,
}

impl RefWeights {
    fn alpha(&self) -> f64 {
        1.0 - self.lambda
    }

    fn d(&self, a: f64) -> f64 {
        a.powf(1.0 - self.lambda) - (a - 1.0).powf(1.0 - self.lambda)
    }

    fn f(&self, a: f64) -> f64 {
        let l = self.lambda;
        let b = a - 1.0;
        2.0 / (2.0 - l) * (a.powf(2.0 - l) - b.powf(2.0 - l)) - 0.5 * (a.powf(1.0 - l) + 3.0 * b.powf(1.0 - l))
    }

    /// Coefficient of δU^{m/2} for each m in the operator at the half
    /// level i + 1/2, from the expanded sum.
    pub fn half_coeffs(&self, i: usize) -> Vec<f64> {
        let (l, a) = (self.lambda, self.alpha());
        let mut w = vec![0.0; 2 * i + 1];
        if i == 0 {
            w[0] = (0.5 + a).powf(1.0 - l);
            return w;
        }
        let fi = i as f64;
        w[0] += (fi + 0.5 + a).powf(1.0 - l) - (fi + a).powf(1.0 - l);
        for k in 0..i {
            let big_a = fi + a - k as f64;
            let (d, f) = (self.d(big_a), self.f(big_a));
            w[2 * k + 2] += f;
            w[2 * k + 1] += d - f;
        }
        w[2 * i] += a.powf(1.0 - l);
        w
    }

    /// Same for the full level i + 1.
    pub fn full_coeffs(&self, i: usize) -> Vec<f64> {
        let (l, a) = (self.lambda, self.alpha());
        let mut w = vec![0.0; 2 * i + 2];
        for k in 0..=i {
            let big_a = i as f64 + 1.0 + a - k as f64;
            let (d, f) = (self.d(big_a), self.f(big_a));
            w[2 * k + 1] += f;
            w[2 * k] += d - f;
        }
        w[2 * i + 1] += a.powf(1.0 - l);
        w
    }

    pub fn scale(&self, k: f64) -> f64 {
        k.powf(1.0 - self.lambda) / stirling_gamma(2.0 - self.lambda)
    }
}

/// Dense reference for the two sub-steps: the unknown is the new level
/// itself over all M+1 nodes; boundary rows pin the boundary data, and
/// interior rows state
///   c Σ_m w_m δU^{m/2} − L_h[(1+2α)U^{new} − 2αU^{prev}] = s
/// at the shifted time. Returns all levels 0..=levels−1.
pub fn dense_reference(prob: &Problem, lambda: f64, m: usize, n: usize, levels: usize) -> Vec<Vec<f64>> {
    let rw = RefWeights { lambda };
    let alpha = 1.0 - lambda;
    let (h, k) = (prob.length() / m as f64, prob.final_time() / n as f64);
    let c = rw.scale(k);
    let x: Vec<f64> = (0..=m).map(|j| j as f64 * h).collect();
    let mut hist: Vec<Vec<f64>> = vec![x.iter().map(|&x| prob.initial(x)).collect()];
    let delta = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(a, b)| (a - b) / (k / 2.0)).collect() };
    while hist.len() < levels {
        let new = hist.len();
        let i = (new - 1) / 2;
        let w = if new % 2 == 1 { rw.half_coeffs(i) } else { rw.full_coeffs(i) };
        let t_eval = (new as f64 / 2.0 + alpha) * k;
        let t_new = new as f64 * k / 2.0;
        let prev = &hist[new - 1];
        let deltas: Vec<Vec<f64>> = (0..new - 1).map(|mm| delta(&hist[mm + 1], &hist[mm])).collect();
        let last = *w.last().unwrap();
        let (q, p) = (prob.q(t_eval), prob.p(t_eval));

        let size = m + 1;
        let mut a = vec![vec![0.0; size]; size];
        let mut b = vec![0.0; size];
        for j in 0..size {
            if j < 2 || j > m - 2 {
                a[j][j] = 1.0;
                b[j] = prob.boundary(x[j], t_new);
                continue;
            }
            // Caputo part: history terms plus last·(U^new − U^prev)/(k/2)
            let mut hist_sum = 0.0;
            for (mm, wm) in w.iter().enumerate().take(w.len() - 1) {
                hist_sum += wm * deltas[mm][j];
            }
            a[j][j] += c * last * 2.0 / k;
            let mut rhs = prob.source(x[j], t_eval) - c * hist_sum + c * last * 2.0 / k * prev[j];
            // −L_h applied to (1+2α)U^new − 2αU^prev
            let mut lh = [0.0; 5];
            let s2 = 12.0 * h * h;
            let s1 = 12.0 * h;
            let dxx = [-1.0, 16.0, -30.0, 16.0, -1.0];
            let dx = [1.0, -8.0, 0.0, 8.0, -1.0];
            for o in 0..5 {
                lh[o] = q * dxx[o] / s2 - p * dx[o] / s1;
            }
            lh[2] -= prob.g(x[j], t_eval);
            for o in 0..5 {
                let jj = j + o - 2;
                a[j][jj] -= (1.0 + 2.0 * alpha) * lh[o];
                rhs -= 2.0 * alpha * lh[o] * prev[jj];
            }
            b[j] = rhs;
        }
        hist.push(dense_solve(&a, &b));
    }
    hist
}
