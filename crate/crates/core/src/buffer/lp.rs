//! Dense exact-rational simplex for `max c.x  s.t.  A x = b, x >= 0`.
//!
//! Two phases with Bland's rule (no cycling). Artificial columns are kept
//! after phase one so the final tableau also yields the dual solution
//! `y = c_B B^-1`.

use num_rational::Ratio;

pub type Q = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Q>, y: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

fn zero() -> Q {
    Q::from_integer(0)
}

struct Tableau {
    /// rows x (nvars + nart + 1); last column is the right-hand side
    t: Vec<Vec<Q>>,
    basis: Vec<usize>,
    nvars: usize,
    nart: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.nvars + self.nart
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let prow = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != zero() {
                for (v, pv) in r.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Reduced cost of column `j` for objective `c` (maximize): `c_j - c_B B^-1 A_j`.
    fn reduced(&self, c: &[Q], j: usize) -> Q {
        let mut z = zero();
        for (i, &b) in self.basis.iter().enumerate() {
            z += c[b] * self.t[i][j];
        }
        c[j] - z
    }

    /// Runs simplex iterations maximizing `c` over the columns `allowed`.
    fn optimize(&mut self, c: &[Q], allowed: usize) -> bool {
        loop {
            let entering =
                (0..allowed).find(|&j| !self.basis.contains(&j) && self.reduced(c, j) > zero());
            let Some(col) = entering else { return true };
            let rhs = self.rhs();
            let mut best: Option<(Q, usize, usize)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][col];
                if a > zero() {
                    let ratio = self.t[i][rhs] / a;
                    let key = (ratio, self.basis[i]);
                    if best.is_none_or(|(r, b, _)| key < (r, b)) {
                        best = Some((ratio, self.basis[i], i));
                    }
                }
            }
            match best {
                Some((_, _, row)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

/// Solves `max c.x  s.t.  A x = b, x >= 0`. Rows of `a` must all have length `c.len()`.
pub fn maximize_eq(c: &[Q], a: &[Vec<Q>], b: &[Q]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let mut sign = vec![Q::from_integer(1); m];
    let mut t = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = a[i].clone();
        let mut rhs = b[i];
        if rhs < zero() {
            sign[i] = -sign[i];
            rhs = -rhs;
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        row.extend((0..m).map(|k| if k == i { Q::from_integer(1) } else { zero() }));
        row.push(rhs);
        t.push(row);
    }
    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
        nvars: n,
        nart: m,
    };

    // phase one: drive artificials out (maximize -sum of artificials)
    let mut c1 = vec![zero(); n + m];
    for v in c1.iter_mut().skip(n) {
        *v = Q::from_integer(-1);
    }
    tab.optimize(&c1, n + m);
    let rhs = tab.rhs();
    let infeas: Q = (0..m)
        .filter(|&i| tab.basis[i] >= n)
        .map(|i| tab.t[i][rhs])
        .sum();
    if infeas != zero() {
        return LpOutcome::Infeasible;
    }
    // pivot remaining zero-level artificials out where possible
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| tab.t[i][j] != zero() && !tab.basis.contains(&j)) {
                tab.pivot(i, j);
            }
        }
    }

    let mut c2 = c.to_vec();
    c2.extend(std::iter::repeat_n(zero(), m));
    if !tab.optimize(&c2, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![zero(); n];
    for (i, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab.t[i][rhs];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    // y_k = c_B B^-1 e_k; the artificial block of the tableau holds B^-1
    let y = (0..m)
        .map(|k| {
            let mut s = zero();
            for (i, &bv) in tab.basis.iter().enumerate() {
                s += c2[bv] * tab.t[i][n + k];
            }
            s * sign[k]
        })
        .collect();
    LpOutcome::Optimal { x, y, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i128) -> Q {
        Q::from_integer(v)
    }

    #[test]
    fn small_lp_with_duals() {
        // max 3x + 2y  s.t.  x + y + s1 = 4,  x + 3y + s2 = 6
        let c = vec![q(3), q(2), q(0), q(0)];
        let a = vec![vec![q(1), q(1), q(1), q(0)], vec![q(1), q(3), q(0), q(1)]];
        let b = vec![q(4), q(6)];
        match maximize_eq(&c, &a, &b) {
            LpOutcome::Optimal { x, y, value } => {
                assert_eq!(value, q(12));
                assert_eq!(x[0], q(4));
                // dual optimum equals primal optimum
                assert_eq!(y[0] * q(4) + y[1] * q(6), q(12));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let a = vec![vec![q(1), q(1)]];
        assert_eq!(
            maximize_eq(&[q(0), q(0)], &a, &[q(-1)]),
            LpOutcome::Infeasible
        );
        let a = vec![vec![q(1), q(-1)]];
        assert_eq!(
            maximize_eq(&[q(0), q(1)], &a, &[q(1)]),
            LpOutcome::Unbounded
        );
    }
}
