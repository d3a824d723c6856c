//! Brute-force oracles for tests. Nothing here shares code with the solver
//! or MDP crates: inputs are plain tables and every routine is the slowest
//! obviously-correct method.

use rand::Rng;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when the matrix is (numerically) singular.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-11 {
            return None;
        }
        a.swap(p, k);
        b.swap(p, k);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Eq,
    Ge,
}

/// One linear constraint `coeffs · x (rel) rhs`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Rel,
    pub rhs: f64,
}

/// Best objective over all basic feasible solutions of
/// `opt c·x s.t. constraints, x >= 0`, by enumerating every choice of `n`
/// active hyperplanes. Returns `None` when no vertex is feasible. Only
/// meaningful for problems whose optimum is attained (bounded objective).
pub fn vertex_enumeration(objective: &[f64], maximize: bool, constraints: &[Constraint]) -> Option<(f64, Vec<f64>)> {
    let n = objective.len();
    // Hyperplanes: constraint rows first, then x_j = 0.
    let mut planes: Vec<(Vec<f64>, f64)> = constraints.iter().map(|c| (c.coeffs.clone(), c.rhs)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e, 0.0));
    }
    let forced: Vec<usize> = constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.rel == Rel::Eq)
        .map(|(i, _)| i)
        .collect();
    assert!(forced.len() <= n, "more equalities than variables");
    let optional: Vec<usize> = (0..planes.len()).filter(|i| !forced.contains(i)).collect();
    let pick = n - forced.len();

    let scale = 1.0 + constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
    let feasible = |x: &[f64]| {
        x.iter().all(|&v| v >= -1e-9 * scale)
            && constraints.iter().all(|c| {
                let a: f64 = c.coeffs.iter().zip(x).map(|(p, q)| p * q).sum();
                match c.rel {
                    Rel::Le => a <= c.rhs + 1e-9 * scale,
                    Rel::Ge => a >= c.rhs - 1e-9 * scale,
                    Rel::Eq => (a - c.rhs).abs() <= 1e-9 * scale,
                }
            })
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx: Vec<usize> = (0..pick).collect();
    if pick > optional.len() {
        return None;
    }
    loop {
        let chosen: Vec<usize> = forced.iter().copied().chain(idx.iter().map(|&i| optional[i])).collect();
        let a: Vec<Vec<f64>> = chosen.iter().map(|&p| planes[p].0.clone()).collect();
        let b: Vec<f64> = chosen.iter().map(|&p| planes[p].1).collect();
        if let Some(x) = gauss_solve(a, b) {
            if feasible(&x) {
                let val: f64 = objective.iter().zip(&x).map(|(p, q)| p * q).sum();
                let better = match &best {
                    None => true,
                    Some((bv, _)) => (maximize && val > *bv) || (!maximize && val < *bv),
                };
                if better {
                    best = Some((val, x));
                }
            }
        }
        // Next combination in lexicographic order.
        let mut k = pick;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < optional.len() - pick + k {
                idx[k] += 1;
                for t in k + 1..pick {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
        if pick == 0 {
            return best;
        }
    }
}

/// Finite MDP as plain nested tables.
#[derive(Debug, Clone)]
pub struct TabularMdp {
    /// `transition[a][x][x']`
    pub transition: Vec<Vec<Vec<f64>>>,
    /// `reward[x][a]`
    pub reward: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
    pub discount: f64,
}

impl TabularMdp {
    pub fn n_states(&self) -> usize {
        self.initial.len()
    }

    pub fn n_actions(&self) -> usize {
        self.transition.len()
    }
}

/// Random MDP with roughly half of the transition entries zeroed.
pub fn random_mdp<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize, discount: f64) -> TabularMdp {
    let transition = (0..n_actions)
        .map(|_| {
            (0..n_states)
                .map(|_| {
                    let mut row: Vec<f64> = (0..n_states)
                        .map(|_| if rng.random_bool(0.5) { rng.random::<f64>() } else { 0.0 })
                        .collect();
                    let target = rng.random_range(0..n_states);
                    row[target] += 0.1;
                    let s: f64 = row.iter().sum();
                    row.iter().map(|v| v / s).collect()
                })
                .collect()
        })
        .collect();
    let reward = (0..n_states)
        .map(|_| (0..n_actions).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut initial: Vec<f64> = (0..n_states).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = initial.iter().sum();
    initial.iter_mut().for_each(|v| *v /= s);
    TabularMdp {
        transition,
        reward,
        initial,
        discount,
    }
}

/// Discounted value of a deterministic stationary policy, by solving
/// `(I - gamma P_pi) v = r_pi`.
pub fn policy_value(mdp: &TabularMdp, policy: &[usize]) -> Vec<f64> {
    let n = mdp.n_states();
    let a: Vec<Vec<f64>> = (0..n)
        .map(|x| {
            (0..n)
                .map(|y| (if x == y { 1.0 } else { 0.0 }) - mdp.discount * mdp.transition[policy[x]][x][y])
                .collect()
        })
        .collect();
    let b: Vec<f64> = (0..n).map(|x| mdp.reward[x][policy[x]]).collect();
    gauss_solve(a, b).expect("I - gamma P is nonsingular for gamma < 1")
}

/// Maximum of `nu · v_pi` over all `|U|^|S|` deterministic stationary policies.
pub fn best_policy_by_enumeration(mdp: &TabularMdp) -> (f64, Vec<usize>) {
    let n = mdp.n_states();
    let u = mdp.n_actions();
    let mut policy = vec![0usize; n];
    let mut best = (f64::NEG_INFINITY, policy.clone());
    loop {
        let v = policy_value(mdp, &policy);
        let val: f64 = v.iter().zip(&mdp.initial).map(|(a, b)| a * b).sum();
        if val > best.0 {
            best = (val, policy.clone());
        }
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            policy[k] += 1;
            if policy[k] < u {
                break;
            }
            policy[k] = 0;
            k += 1;
        }
    }
}

/// Optimal value function by value iteration until the sup-norm update is
/// below `tol`.
pub fn value_iteration(mdp: &TabularMdp, tol: f64) -> Vec<f64> {
    let n = mdp.n_states();
    let mut v = vec![0.0; n];
    loop {
        let next: Vec<f64> = (0..n)
            .map(|x| {
                (0..mdp.n_actions())
                    .map(|a| {
                        mdp.reward[x][a]
                            + mdp.discount * (0..n).map(|y| mdp.transition[a][x][y] * v[y]).sum::<f64>()
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if diff < tol {
            return v;
        }
    }
}

/// Exact RBF kernel `exp(-|x-y|^2 / (2 sigma^2))`.
pub fn rbf(x: &[f64], y: &[f64], bandwidth: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 / (2.0 * bandwidth * bandwidth)).exp()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}
