//! Reference computations that share no code with the solvers they check:
//! characteristic polynomials, polynomial roots, multiset matching and the
//! closed-form spectra of uniform chains.

use num_complex::Complex64;

/// Coefficients `c[0..=n]` of `det(z I - A)` (monic, `c[n] = 1`) by the
/// Faddeev-LeVerrier recursion. `a` is row-major `n x n`.
pub fn characteristic_polynomial(a: &[Complex64], n: usize) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut c = vec![zero; n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    let mut m = vec![zero; n * n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![zero; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = zero;
                for l in 0..n {
                    s += a[i * n + l] * m[l * n + j];
                }
                next[i * n + j] = s;
            }
            next[i * n + i] += c[n - k + 1];
        }
        // c_{n-k} = -tr(A M_k) / k
        let mut tr = zero;
        for i in 0..n {
            for l in 0..n {
                tr += a[i * n + l] * next[l * n + i];
            }
        }
        c[n - k] = -tr / k as f64;
        m = next;
    }
    c
}

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

/// All roots of `sum c[k] z^k` by Aberth-Ehrlich iteration followed by Newton polishing.
pub fn polynomial_roots(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|&x| x / lead).collect();
    let bound = 1.0 + monic[..n].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * bound, std::f64::consts::TAU * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * bound {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(&monic, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !(step.norm() < 1e-6 * bound) {
                break;
            }
            *zi -= step;
        }
    }
    z
}

/// Eigenvalues of a small dense complex matrix via its characteristic polynomial.
pub fn eigenvalues_by_polynomial(a: &[Complex64], n: usize) -> Vec<Complex64> {
    polynomial_roots(&characteristic_polynomial(a, n))
}

/// Smallest achievable maximum distance over all pairings of two equal-size
/// point sets (bottleneck matching). Exact for small sets, greedy beyond 9 points.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets differ in size");
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    if n <= 9 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &mut |p| {
            let worst = p
                .iter()
                .enumerate()
                .map(|(i, &j)| (a[i] - b[j]).norm())
                .fold(0.0, f64::max);
            best = best.min(worst);
        });
        return best;
    }
    greedy_distance(a, b)
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Pairs each point of `a`, closest pairs first, with an unused point of `b`;
/// returns the largest distance in that pairing (an upper bound on the
/// bottleneck distance).
pub fn greedy_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let n = a.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let mut used_a = vec![false; n];
    let mut used_b = vec![false; n];
    let mut worst: f64 = 0.0;
    let mut matched = 0;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
            matched += 1;
            if matched == n {
                break;
            }
        }
    }
    worst
}

/// Eigenvalues `2 t cos(k pi / (L + 1))` of the uniform symmetric chain.
pub fn uniform_chain_eigenvalues(t: f64, sites: usize) -> Vec<f64> {
    (1..=sites)
        .map(|k| 2.0 * t * (k as f64 * std::f64::consts::PI / (sites as f64 + 1.0)).cos())
        .collect()
}

/// Open nonreciprocal chain with uniform `t_j = b`, `t'_j = f`, `b f > 0`:
/// eigenvalue `2 sgn(b) sqrt(b f) cos(k pi / (L+1))` with eigenvector
/// components `(f/b)^{j/2} sin(j k pi / (L+1))`, unnormalized.
pub fn uniform_nonreciprocal_mode(b: f64, f: f64, sites: usize, k: usize) -> (f64, Vec<f64>) {
    let theta = k as f64 * std::f64::consts::PI / (sites as f64 + 1.0);
    let energy = 2.0 * b.signum() * (b * f).sqrt() * theta.cos();
    let ratio = (f / b).sqrt();
    let v = (1..=sites)
        .map(|j| ratio.powi(j as i32) * (j as f64 * theta).sin())
        .collect();
    (energy, v)
}
