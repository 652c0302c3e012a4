//! Small dense linear-algebra helpers: Gaussian elimination, cyclic Jacobi
//! eigendecomposition, and quadratic minimization over the standard simplex
//! (exact by face enumeration for small n, multistart projected gradient
//! otherwise).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Solve a*x = b by Gaussian elimination with partial pivoting.
/// Returns None when the system is (numerically) singular.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-13 {
            return None;
        }
        m.swap(col, piv);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = m[col][n];
        for k in (col + 1)..n {
            s -= m[col][k] * x[k];
        }
        x[col] = s / m[col][col];
    }
    Some(x)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns (eigenvalues, eigenvectors) with eigenvectors[k] the unit
/// eigenvector for eigenvalues[k], sorted ascending.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0f64, |acc, &x| acc.max(x.abs()));
    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(m[i][j].abs());
            }
        }
        if off < 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-16 * scale {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| (m[k][k], (0..n).map(|i| v[i][k]).collect()))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let vals = pairs.iter().map(|p| p.0).collect();
    let vecs = pairs.into_iter().map(|p| p.1).collect();
    (vals, vecs)
}

/// Nearest (Frobenius) positive-semidefinite matrix: clamp negative
/// eigenvalues to zero.
pub fn psd_project(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let (vals, vecs) = jacobi_eigen(a);
    let mut out = vec![vec![0.0; n]; n];
    for (lam, u) in vals.iter().zip(&vecs) {
        if *lam <= 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[i][j] += lam * u[i] * u[j];
            }
        }
    }
    out
}

fn quad(m: &[Vec<f64>], s: &[f64]) -> f64 {
    let n = s.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += s[i] * m[i][j] * s[j];
        }
    }
    acc
}

/// Exact minimum of sᵀMs over the standard simplex by enumerating support
/// sets.  Exponential in n; intended for n ≤ 4 (2ⁿ−1 faces).  Every
/// candidate evaluated is feasible, and the true minimizer's support always
/// yields a stationary candidate, so the minimum over candidates is exact.
pub fn simplex_quadratic_min_exact(m: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = m.len();
    assert!(n >= 1 && n <= 16);
    let mut best = (f64::INFINITY, vec![0.0; n]);
    for mask in 1u32..(1 << n) {
        let supp: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let k = supp.len();
        let candidate: Option<Vec<f64>> = if k == 1 {
            let mut s = vec![0.0; n];
            s[supp[0]] = 1.0;
            Some(s)
        } else {
            // stationary point of sᵀMs on the face: KKT system
            // [2 M_S  1; 1ᵀ 0] (s, λ) = (0, 1)
            let mut a = vec![vec![0.0; k + 1]; k + 1];
            for (ri, &i) in supp.iter().enumerate() {
                for (rj, &j) in supp.iter().enumerate() {
                    a[ri][rj] = m[i][j] + m[j][i];
                }
                a[ri][k] = 1.0;
                a[k][ri] = 1.0;
            }
            let mut b = vec![0.0; k + 1];
            b[k] = 1.0;
            solve(&a, &b).and_then(|sol| {
                if sol[..k].iter().all(|&x| x >= -1e-12) {
                    let mut s = vec![0.0; n];
                    for (ri, &i) in supp.iter().enumerate() {
                        s[i] = sol[ri].max(0.0);
                    }
                    let tot: f64 = s.iter().sum();
                    for x in &mut s {
                        *x /= tot;
                    }
                    Some(s)
                } else {
                    None
                }
            })
        };
        if let Some(s) = candidate {
            let val = quad(m, &s);
            if val < best.0 {
                best = (val, s);
            }
        }
    }
    best
}

/// Euclidean projection onto the standard simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut rho = 0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            rho = i;
            theta = t;
        }
    }
    let _ = rho;
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Heuristic minimum of sᵀMs over the simplex: multistart projected gradient
/// with a final exact polish on the found support.
pub fn simplex_quadratic_min_multistart(
    m: &[Vec<f64>],
    starts: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, Vec<f64>) {
    let n = m.len();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0f64, |acc, &x| acc.max(x.abs()));
    let step = 0.5 / (scale * n as f64);
    let mut best = (f64::INFINITY, vec![0.0; n]);
    for start in 0..starts {
        let mut s: Vec<f64> = if start < n {
            (0..n).map(|i| if i == start { 1.0 } else { 0.0 }).collect()
        } else {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0f64)).collect();
            project_simplex(&raw)
        };
        for _ in 0..400 {
            let grad: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| (m[i][j] + m[j][i]) * s[j]).sum::<f64>())
                .collect();
            let next: Vec<f64> = s.iter().zip(&grad).map(|(&x, &g)| x - step * g).collect();
            let next = project_simplex(&next);
            let moved: f64 = next.iter().zip(&s).map(|(a, b)| (a - b).abs()).sum();
            s = next;
            if moved < 1e-12 {
                break;
            }
        }
        // polish: exact stationary point on the discovered support
        let supp: Vec<usize> = (0..n).filter(|&i| s[i] > 1e-9).collect();
        if !supp.is_empty() && supp.len() <= 12 {
            let sub: Vec<Vec<f64>> = supp
                .iter()
                .map(|&i| supp.iter().map(|&j| m[i][j]).collect())
                .collect();
            let (val, ssub) = simplex_quadratic_min_exact(&sub);
            if val < quad(m, &s) {
                let mut full = vec![0.0; n];
                for (ri, &i) in supp.iter().enumerate() {
                    full[i] = ssub[ri];
                }
                s = full;
            }
        }
        let val = quad(m, &s);
        if val < best.0 {
            best = (val, s);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn solve_small() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        assert!(solve(&[vec![1.0, 1.0], vec![1.0, 1.0]], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn jacobi_small() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let (vals, vecs) = jacobi_eigen(&a);
        assert!((vals[0] - 1.0).abs() < 1e-10 && (vals[1] - 3.0).abs() < 1e-10);
        // residual check A v = λ v
        for k in 0..2 {
            for i in 0..2 {
                let av: f64 = (0..2).map(|j| a[i][j] * vecs[k][j]).sum();
                assert!((av - vals[k] * vecs[k][i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn simplex_min_examples() {
        // all-ones off-diagonal -1, diag 1: min at uniform = (n - n(n-1))/n² = (2-n)/n
        let m = vec![
            vec![1.0, -1.0, -1.0],
            vec![-1.0, 1.0, -1.0],
            vec![-1.0, -1.0, 1.0],
        ];
        let (v, s) = simplex_quadratic_min_exact(&m);
        assert!((v + 1.0 / 3.0).abs() < 1e-10, "v={v}");
        assert!(s.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-8));
        // identity: min 1/n
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (v, _) = simplex_quadratic_min_exact(&id);
        assert!((v - 0.5).abs() < 1e-10);
    }

    #[test]
    fn multistart_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..30 {
            let n = 3 + (trial % 2);
            let m: Vec<Vec<f64>> = {
                let mut a = vec![vec![0.0; n]; n];
                for i in 0..n {
                    for j in i..n {
                        let x = rng.gen_range(-1.0..1.0);
                        a[i][j] = x;
                        a[j][i] = x;
                    }
                }
                a
            };
            let (ve, _) = simplex_quadratic_min_exact(&m);
            let (vh, _) = simplex_quadratic_min_multistart(&m, 50, &mut rng);
            assert!(vh >= ve - 1e-9 && vh <= ve + 1e-6, "exact={ve}, heur={vh}");
        }
    }

    #[test]
    fn psd_project_idempotent_on_psd() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let p = psd_project(&a);
        for i in 0..2 {
            for j in 0..2 {
                assert!((p[i][j] - a[i][j]).abs() < 1e-10);
            }
        }
        assert!(jacobi_eigen(&[vec![0.0, 1.0], vec![1.0, 0.0]]).0[0] < -0.99);
    }
}
