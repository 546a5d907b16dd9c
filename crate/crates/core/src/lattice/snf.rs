use super::matrix::IntMatrix;

/// Smith normal form `u * m * v = d` together with the inverses of the
/// unimodular transforms.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
    pub rank: usize,
}

impl SmithForm {
    /// Diagonal entries `d[i][i]` for `i < min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<i64> {
        (0..self.d.rows().min(self.d.cols())).map(|i| self.d[(i, i)]).collect()
    }
}

struct Reducer {
    d: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl Reducer {
    fn swap_rows(&mut self, a: usize, b: usize) {
        self.d.swap_rows(a, b);
        self.u.swap_rows(a, b);
        self.u_inv.swap_cols(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.d.swap_cols(a, b);
        self.v.swap_cols(a, b);
        self.v_inv.swap_rows(a, b);
    }

    fn add_row(&mut self, target: usize, source: usize, k: i64) {
        self.d.add_row_multiple(target, source, k);
        self.u.add_row_multiple(target, source, k);
        self.u_inv.add_col_multiple(source, target, -k);
    }

    fn negate_row(&mut self, i: usize) {
        self.d.negate_row(i);
        self.u.negate_row(i);
        self.u_inv.negate_col(i);
    }

    /// Rows `(a, b) <- M (a, b)` for `M = [[x, y], [p, q]]` of determinant 1.
    fn rows_2x2(&mut self, a: usize, b: usize, [x, y, p, q]: [i64; 4]) {
        for m in [&mut self.d, &mut self.u] {
            for j in 0..m.cols() {
                let (s, t) = (m[(a, j)], m[(b, j)]);
                m[(a, j)] = x * s + y * t;
                m[(b, j)] = p * s + q * t;
            }
        }
        let inv = &mut self.u_inv;
        for i in 0..inv.rows() {
            let (s, t) = (inv[(i, a)], inv[(i, b)]);
            inv[(i, a)] = q * s - p * t;
            inv[(i, b)] = -y * s + x * t;
        }
    }

    /// Columns `(a, b) <- (x a + y b, p a + q b)` with `xq - yp = 1`.
    fn cols_2x2(&mut self, a: usize, b: usize, [x, y, p, q]: [i64; 4]) {
        for m in [&mut self.d, &mut self.v] {
            for i in 0..m.rows() {
                let (s, t) = (m[(i, a)], m[(i, b)]);
                m[(i, a)] = x * s + y * t;
                m[(i, b)] = p * s + q * t;
            }
        }
        let inv = &mut self.v_inv;
        for j in 0..inv.cols() {
            let (s, t) = (inv[(a, j)], inv[(b, j)]);
            inv[(a, j)] = q * s - p * t;
            inv[(b, j)] = -y * s + x * t;
        }
    }
}

/// `(g, x, y)` with `g = gcd(a, b) = x a + y b` and `g > 0` unless both vanish.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1, mut s0, mut s1, mut t0, mut t1) = (a, b, 1i64, 0i64, 0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Unimodular `[[x, y], [-b/g, a/g]]` sending `(a, b)` to `(g, 0)`.
fn bezout(a: i64, b: i64) -> [i64; 4] {
    if b % a == 0 {
        return [1, 0, -b / a, 1];
    }
    let (g, x, y) = ext_gcd(a, b);
    [x, y, -b / g, a / g]
}

/// Computes the Smith normal form of `m`. The diagonal is nonnegative and
/// satisfies the divisibility chain, zeros last.
pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows(), m.cols());
    let mut r = Reducer {
        d: m.clone(),
        u: IntMatrix::identity(rows),
        u_inv: IntMatrix::identity(rows),
        v: IntMatrix::identity(cols),
        v_inv: IntMatrix::identity(cols),
    };
    let mut rank = 0;
    for t in 0..rows.min(cols) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut pivot: Option<(usize, usize, i64)> = None;
        for i in t..rows {
            for j in t..cols {
                let a = r.d[(i, j)].abs();
                if a != 0 && pivot.is_none_or(|(_, _, b)| a < b) {
                    pivot = Some((i, j, a));
                }
            }
        }
        let Some((pi, pj, _)) = pivot else { break };
        r.swap_rows(t, pi);
        r.swap_cols(t, pj);
        loop {
            for i in t + 1..rows {
                if r.d[(i, t)] != 0 {
                    let op = bezout(r.d[(t, t)], r.d[(i, t)]);
                    r.rows_2x2(t, i, op);
                }
            }
            for j in t + 1..cols {
                if r.d[(t, j)] != 0 {
                    let op = bezout(r.d[(t, t)], r.d[(t, j)]);
                    r.cols_2x2(t, j, op);
                }
            }
            if (t + 1..rows).any(|i| r.d[(i, t)] != 0) {
                continue;
            }
            let p = r.d[(t, t)];
            let bad_row = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| r.d[(i, j)] % p != 0));
            match bad_row {
                Some(i) => r.add_row(t, i, 1),
                None => break,
            }
        }
        if r.d[(t, t)] < 0 {
            r.negate_row(t);
        }
        rank = t + 1;
    }
    SmithForm { u: r.u, u_inv: r.u_inv, d: r.d, v: r.v, v_inv: r.v_inv, rank }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check(m: &IntMatrix) -> SmithForm {
        let s = smith_normal_form(m);
        assert_eq!(s.u.mul(m).mul(&s.v), s.d);
        assert_eq!(s.u.mul(&s.u_inv), IntMatrix::identity(m.rows()));
        assert_eq!(s.v.mul(&s.v_inv), IntMatrix::identity(m.cols()));
        for i in 0..s.d.rows() {
            for j in 0..s.d.cols() {
                if i != j {
                    assert_eq!(s.d[(i, j)], 0, "off-diagonal entry in {:?}", s.d);
                }
            }
        }
        let diag = s.diagonal();
        for w in diag.windows(2) {
            assert!(w[0] >= 0 && w[1] >= 0);
            if w[0] == 0 {
                assert_eq!(w[1], 0);
            } else {
                assert_eq!(w[1] % w[0], 0, "divisibility chain broken: {diag:?}");
            }
        }
        s
    }

    #[test]
    fn diag_two_three() {
        let m = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]).unwrap();
        assert_eq!(check(&m).diagonal(), vec![1, 6]);
    }

    #[test]
    fn identity_and_zero() {
        let s = check(&IntMatrix::identity(3));
        assert_eq!(s.diagonal(), vec![1, 1, 1]);
        let s = check(&IntMatrix::zeros(1, 1));
        assert_eq!(s.diagonal(), vec![0]);
        assert_eq!(s.rank, 0);
        let s = check(&IntMatrix::zeros(0, 2));
        assert_eq!(s.rank, 0);
    }

    #[test]
    fn rectangular() {
        let m = IntMatrix::from_rows(&[vec![4, 6, 8], vec![6, 9, 12]]).unwrap();
        let s = check(&m);
        assert_eq!(s.diagonal(), vec![1, 0]);
        assert_eq!(s.rank, 1);
    }

    proptest! {
        #[test]
        fn snf_identities(rows in 1usize..5, cols in 1usize..5, seed in prop::collection::vec(-12i64..12, 25)) {
            let data: Vec<Vec<i64>> = (0..rows).map(|i| (0..cols).map(|j| seed[i * 5 + j]).collect()).collect();
            let m = IntMatrix::from_rows(&data).unwrap();
            let s = check(&m);
            prop_assert_eq!(s.u.determinant().abs(), 1);
            prop_assert_eq!(s.v.determinant().abs(), 1);
            if rows == cols {
                let prod: i64 = s.diagonal().iter().product();
                prop_assert_eq!(prod, m.determinant().abs());
            }
        }
    }
}
