//! Conservative normal-direction operators.
//!
//! ```text
//!   D1 f_j = (F_{j+1/2} - F_{j-1/2}) / h,  F_{j+1/2} = (-f_{j-1} + 7 f_j + 7 f_{j+1} - f_{j+2}) / 12
//!   D2 f_j = (S_{j+1/2} - S_{j-1/2}) / h,  S_{j+1/2} = (f_{j-1} - 15 f_j + 15 f_{j+1} - f_{j+2}) / (12 h)
//! ```
//!
//! Faces touching a boundary node drop to `(f_j + f_{j+1})/2` and `(f_{j+1} - f_j)/h`. Interior
//! rows telescope, so sums over the interior reduce to the two outermost faces. `D1` closes
//! with second-order one-sided rows at the boundary nodes; `D2` is zero there.

/// Sparse rows over the normal index, unscaled (unit spacing).
#[derive(Debug, Clone)]
pub struct NormalOp {
    pub rows: Vec<Vec<(usize, f64)>>,
    /// Power of `1/h` applied on use.
    pub power: i32,
}

fn face_value(j: usize, n: usize) -> Vec<(usize, f64)> {
    if j >= 1 && j + 2 < n {
        vec![(j - 1, -1.0 / 12.0), (j, 7.0 / 12.0), (j + 1, 7.0 / 12.0), (j + 2, -1.0 / 12.0)]
    } else {
        vec![(j, 0.5), (j + 1, 0.5)]
    }
}

fn face_slope(j: usize, n: usize) -> Vec<(usize, f64)> {
    if j >= 1 && j + 2 < n {
        vec![(j - 1, 1.0 / 12.0), (j, -15.0 / 12.0), (j + 1, 15.0 / 12.0), (j + 2, -1.0 / 12.0)]
    } else {
        vec![(j, -1.0), (j + 1, 1.0)]
    }
}

fn difference(n: usize, face: impl Fn(usize, usize) -> Vec<(usize, f64)>) -> Vec<Vec<(usize, f64)>> {
    let mut rows = vec![Vec::new(); n];
    for (j, row) in rows.iter_mut().enumerate().take(n - 1).skip(1) {
        let mut acc: Vec<(usize, f64)> = face(j, n);
        for (k, w) in face(j - 1, n) {
            acc.push((k, -w));
        }
        acc.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (k, w) in acc {
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 += w,
                _ => merged.push((k, w)),
            }
        }
        *row = merged;
    }
    rows
}

impl NormalOp {
    /// Conservative first derivative on `n` nodes.
    pub fn d1(n: usize) -> Self {
        let mut rows = difference(n, face_value);
        rows[0] = vec![(0, -1.5), (1, 2.0), (2, -0.5)];
        rows[n - 1] = vec![(n - 3, 0.5), (n - 2, -2.0), (n - 1, 1.5)];
        NormalOp { rows, power: 1 }
    }

    /// Conservative second derivative on `n` nodes, zero rows at the boundary.
    pub fn d2(n: usize) -> Self {
        NormalOp { rows: difference(n, face_slope), power: 2 }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Applies the operator to every tangential column of `src` (normal-major, `nt` per level).
    pub fn apply(&self, src: &[f64], nt: usize, h: f64, out: &mut [f64]) {
        let scale = h.powi(-self.power);
        for (j, row) in self.rows.iter().enumerate() {
            let dst = &mut out[j * nt..(j + 1) * nt];
            dst.iter_mut().for_each(|v| *v = 0.0);
            for &(k, w) in row {
                let s = &src[k * nt..(k + 1) * nt];
                let ws = w * scale;
                for (d, v) in dst.iter_mut().zip(s) {
                    *d += ws * v;
                }
            }
        }
    }

    pub fn apply_vec(&self, src: &[f64], nt: usize, h: f64) -> Vec<f64> {
        let mut out = vec![0.0; src.len()];
        self.apply(src, nt, h, &mut out);
        out
    }
}
