//! Convex quadratic programs on the probability simplex.
//!
//! Minimizes `x'Qx / 2 - c'x` subject to `x >= 0`, `sum x = 1` with a primal
//! active-set method. Small dense problems only.

/// Iteration cap of [`simplex_qp`].
pub const MAX_ITER: usize = 4000;
/// Tolerance on the KKT multipliers, relative to the mean diagonal of `Q`.
/// Bernstein Gram matrices are nearly singular, so a multiplier of a few
/// 1e-7 can still hide an objective gap of a percent; keep this tight.
pub const TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
}

/// Solves the simplex QP for a symmetric positive definite `q` stored row
/// major. `warm` is projected onto the simplex support it defines. Returns
/// `None` on a singular subproblem or when the iteration cap is reached.
pub fn simplex_qp(q: &[f64], c: &[f64], warm: Option<&[f64]>) -> Option<QpSolution> {
    let d = c.len();
    assert_eq!(q.len(), d * d);
    let mut x = match warm {
        Some(w) if w.len() == d && w.iter().all(|v| v.is_finite() && *v >= 0.0) && w.iter().sum::<f64>() > 0.0 => {
            let s: f64 = w.iter().sum();
            w.iter().map(|v| v / s).collect()
        }
        _ => vec![1.0 / d as f64; d],
    };
    let tol = TOL * (0..d).map(|i| q[i * d + i].abs()).sum::<f64>() / d as f64;
    let mut active: Vec<bool> = x.iter().map(|&v| v <= 0.0).collect();
    let mut grad = vec![0.0; d];
    for it in 0..MAX_ITER {
        for i in 0..d {
            grad[i] = (0..d).map(|j| q[i * d + j] * x[j]).sum::<f64>() - c[i];
        }
        let free: Vec<usize> = (0..d).filter(|&i| !active[i]).collect();
        let (p, lambda) = equality_step(q, &grad, &free)?;
        let pmax = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if pmax <= 1e-13 {
            // Multipliers of the bound constraints at the current point.
            let worst = (0..d)
                .filter(|&i| active[i])
                .map(|i| (i, grad[i] + lambda))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match worst {
                Some((i, mu)) if mu < -tol => active[i] = false,
                _ => return Some(QpSolution { x, iterations: it + 1 }),
            }
            continue;
        }
        let mut step = 1.0;
        let mut blocking = None;
        for (k, &i) in free.iter().enumerate() {
            if p[k] < 0.0 {
                let r = -x[i] / p[k];
                if r < step {
                    step = r;
                    blocking = Some(i);
                }
            }
        }
        for (k, &i) in free.iter().enumerate() {
            x[i] = (x[i] + step * p[k]).max(0.0);
        }
        if let Some(i) = blocking {
            x[i] = 0.0;
            active[i] = true;
        }
    }
    None
}

/// Newton step restricted to the free face: solves
/// `[Q_FF 1; 1' 0] [p; lambda] = [-g_F; 0]`.
fn equality_step(q: &[f64], grad: &[f64], free: &[usize]) -> Option<(Vec<f64>, f64)> {
    let d = grad.len();
    let f = free.len();
    let n = f + 1;
    let mut a = vec![0.0; n * (n + 1)];
    for (r, &i) in free.iter().enumerate() {
        for (s, &j) in free.iter().enumerate() {
            a[r * (n + 1) + s] = q[i * d + j];
        }
        a[r * (n + 1) + f] = 1.0;
        a[f * (n + 1) + r] = 1.0;
        a[r * (n + 1) + n] = -grad[i];
    }
    let sol = gauss_solve(&mut a, n)?;
    Some((sol[..f].to_vec(), sol[f]))
}

/// Gaussian elimination with partial pivoting on an `n x (n+1)` augmented
/// matrix.
fn gauss_solve(a: &mut [f64], n: usize) -> Option<Vec<f64>> {
    let w = n + 1;
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r * w + col].abs().total_cmp(&a[s * w + col].abs()))?;
        if a[piv * w + col].abs() <= 1e-14 * scale {
            return None;
        }
        if piv != col {
            for k in 0..w {
                a.swap(piv * w + k, col * w + k);
            }
        }
        for r in col + 1..n {
            let m = a[r * w + col] / a[col * w + col];
            if m != 0.0 {
                for k in col..w {
                    a[r * w + k] -= m * a[col * w + k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r * w + k] * x[k]).sum();
        x[r] = (a[r * w + n] - s) / a[r * w + r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_onto_simplex() {
        // min |x - y|^2 / 2 is Euclidean projection.
        let q = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let sol = simplex_qp(&q, &[0.8, 0.6, -1.0], None).unwrap();
        assert!((sol.x[0] - 0.6).abs() < 1e-12 && (sol.x[1] - 0.4).abs() < 1e-12);
        assert_eq!(sol.x[2], 0.0);
    }

    #[test]
    fn interior_optimum() {
        let q = [2.0, 0.5, 0.5, 1.0];
        let sol = simplex_qp(&q, &[0.0, 0.0], Some(&[1.0, 0.0])).unwrap();
        // Lagrange: 2a + 0.5b = 0.5a + b  =>  b = 3a
        assert!((sol.x[0] - 0.25).abs() < 1e-12);
        assert!((sol.x[1] - 0.75).abs() < 1e-12);
    }
}
