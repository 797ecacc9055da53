//! Single-codeword Reed-Solomon over a prime field.
//!
//! A message is `k` coefficients of a polynomial of degree `< k`; the codeword
//! symbol for node `j` (1-based) is the evaluation at `x = j`. Decoding is
//! Berlekamp-Welch, so it corrects Byzantine errors (not just erasures) up to
//! `floor((m - k) / 2)` among `m` received points.

use crate::field::PrimeField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsError {
    /// Fewer than `k` points, or the points have no polynomial within the
    /// unique-decoding radius.
    NoCodeword,
    /// Duplicate or out-of-field evaluation points.
    BadPoints,
}

#[derive(Debug, Clone, Copy)]
pub struct ReedSolomon {
    field: PrimeField,
    n: usize,
    k: usize,
}

impl ReedSolomon {
    /// `n` evaluation points `1..=n` must be distinct non-zero field elements,
    /// so `n <= q - 1`.
    pub fn new(field: PrimeField, n: usize, k: usize) -> Option<Self> {
        if k == 0 || k > n || n as u64 > field.modulus() as u64 - 1 {
            return None;
        }
        Some(ReedSolomon { field, n, k })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Evaluations of `coeffs` at `x = 1..=n`.
    pub fn encode(&self, coeffs: &[u32]) -> Vec<u32> {
        debug_assert_eq!(coeffs.len(), self.k);
        (1..=self.n as u32)
            .map(|x| self.field.eval_poly(coeffs, x))
            .collect()
    }

    /// Unique decoding from `(x, y)` points. Returns the coefficient vector
    /// (length `k`) of the only polynomial of degree `< k` that disagrees with
    /// at most `floor((m - k) / 2)` points.
    pub fn decode(&self, points: &[(u32, u32)]) -> Result<Vec<u32>, RsError> {
        self.check_points(points)?;
        let m = points.len();
        if m < self.k {
            return Err(RsError::NoCodeword);
        }
        let radius = (m - self.k) / 2;
        if let Some(p) = self.interpolate_prefix(points, &[]) {
            if self.disagreements(&p, points) <= radius {
                return Ok(p);
            }
        }
        self.berlekamp_welch(points, radius)
    }

    /// Decode with a hint: positions in `avoid` are tried last when choosing
    /// the interpolation base. Falls back to full Berlekamp-Welch.
    pub(crate) fn decode_with_hint(
        &self,
        points: &[(u32, u32)],
        avoid: &[bool],
    ) -> Result<Vec<u32>, RsError> {
        let m = points.len();
        if m < self.k {
            return Err(RsError::NoCodeword);
        }
        let radius = (m - self.k) / 2;
        if let Some(p) = self.interpolate_prefix(points, avoid) {
            if self.disagreements(&p, points) <= radius {
                return Ok(p);
            }
        }
        self.berlekamp_welch(points, radius)
    }

    fn check_points(&self, points: &[(u32, u32)]) -> Result<(), RsError> {
        let mut seen = vec![false; self.field.modulus() as usize];
        for &(x, y) in points {
            if !self.field.contains(x) || !self.field.contains(y) || x == 0 {
                return Err(RsError::BadPoints);
            }
            if std::mem::replace(&mut seen[x as usize], true) {
                return Err(RsError::BadPoints);
            }
        }
        Ok(())
    }

    pub(crate) fn disagreements(&self, coeffs: &[u32], points: &[(u32, u32)]) -> usize {
        points
            .iter()
            .filter(|&&(x, y)| self.field.eval_poly(coeffs, x) != y)
            .count()
    }

    /// Lagrange interpolation through `k` points, preferring those not marked
    /// in `avoid`.
    fn interpolate_prefix(&self, points: &[(u32, u32)], avoid: &[bool]) -> Option<Vec<u32>> {
        let mut base: Vec<(u32, u32)> = Vec::with_capacity(self.k);
        for (i, p) in points.iter().enumerate() {
            if base.len() == self.k {
                break;
            }
            if !avoid.get(i).copied().unwrap_or(false) {
                base.push(*p);
            }
        }
        if base.len() < self.k {
            for (i, p) in points.iter().enumerate() {
                if base.len() == self.k {
                    break;
                }
                if avoid.get(i).copied().unwrap_or(false) {
                    base.push(*p);
                }
            }
        }
        if base.len() < self.k {
            return None;
        }
        Some(interpolate(self.field, &base))
    }

    fn berlekamp_welch(&self, points: &[(u32, u32)], e: usize) -> Result<Vec<u32>, RsError> {
        let f = self.field;
        let k = self.k;
        // Unknowns: Q_0..Q_{e+k-1}, then E_0..E_{e-1} (E monic of degree e).
        let unknowns = e + k + e;
        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(points.len());
        for &(x, y) in points {
            let mut row = vec![0u32; unknowns + 1];
            let mut xp = 1u32;
            for coeff in row.iter_mut().take(e + k) {
                *coeff = xp;
                xp = f.mul(xp, x);
            }
            let mut xp = 1u32;
            for l in 0..e {
                row[e + k + l] = f.neg(f.mul(y, xp));
                xp = f.mul(xp, x);
            }
            // xp == x^e here
            row[unknowns] = f.mul(y, xp);
            rows.push(row);
        }
        let sol = solve(f, rows, unknowns).ok_or(RsError::NoCodeword)?;
        let q_poly = &sol[..e + k];
        let mut e_poly = sol[e + k..].to_vec();
        e_poly.push(1);
        let (quot, rem) = poly_divmod(f, q_poly, &e_poly);
        if rem.iter().any(|&c| c != 0) {
            return Err(RsError::NoCodeword);
        }
        let mut p = quot;
        p.resize(k.max(p.len()), 0);
        if p[k..].iter().any(|&c| c != 0) {
            return Err(RsError::NoCodeword);
        }
        p.truncate(k);
        if self.disagreements(&p, points) > e {
            return Err(RsError::NoCodeword);
        }
        Ok(p)
    }
}

/// Coefficients of the unique polynomial of degree `< points.len()` through
/// the given points.
pub fn interpolate(f: PrimeField, points: &[(u32, u32)]) -> Vec<u32> {
    let k = points.len();
    let mut result = vec![0u32; k];
    for (i, &(xi, yi)) in points.iter().enumerate() {
        // basis numerator prod_{j != i} (x - x_j), built incrementally
        let mut basis = vec![1u32];
        let mut denom = 1u32;
        for (j, &(xj, _)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut next = vec![0u32; basis.len() + 1];
            for (d, &c) in basis.iter().enumerate() {
                next[d + 1] = f.add(next[d + 1], c);
                next[d] = f.sub(next[d], f.mul(c, xj));
            }
            basis = next;
            denom = f.mul(denom, f.sub(xi, xj));
        }
        let scale = f.mul(yi, f.inv(denom).expect("distinct points"));
        for (d, &c) in basis.iter().enumerate() {
            result[d] = f.add(result[d], f.mul(c, scale));
        }
    }
    result
}

/// Gaussian elimination on an augmented matrix. Free variables are set to 0.
fn solve(f: PrimeField, mut rows: Vec<Vec<u32>>, unknowns: usize) -> Option<Vec<u32>> {
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..unknowns {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, p);
        let inv = f.inv(rows[r][c]).expect("non-zero pivot");
        for v in rows[r].iter_mut() {
            *v = f.mul(*v, inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let factor = row[c];
            for (v, &pv) in row.iter_mut().zip(&pivot_row).skip(c) {
                *v = f.sub(*v, f.mul(factor, pv));
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    // inconsistent row: 0 = non-zero
    if rows[r..]
        .iter()
        .any(|row| row[..unknowns].iter().all(|&v| v == 0) && row[unknowns] != 0)
    {
        return None;
    }
    let mut sol = vec![0u32; unknowns];
    for (i, &c) in pivot_cols.iter().enumerate() {
        sol[c] = rows[i][unknowns];
    }
    Some(sol)
}

/// Polynomial long division; `divisor` must have a non-zero leading term.
fn poly_divmod(f: PrimeField, num: &[u32], divisor: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let mut rem = num.to_vec();
    while rem.last() == Some(&0) {
        rem.pop();
    }
    let dlen = divisor.len();
    if rem.len() < dlen {
        return (vec![0], rem);
    }
    let lead_inv = f.inv(divisor[dlen - 1]).expect("monic divisor");
    let mut quot = vec![0u32; rem.len() - dlen + 1];
    for i in (0..quot.len()).rev() {
        let coef = f.mul(rem[i + dlen - 1], lead_inv);
        quot[i] = coef;
        if coef != 0 {
            for (j, &d) in divisor.iter().enumerate() {
                rem[i + j] = f.sub(rem[i + j], f.mul(coef, d));
            }
        }
    }
    rem.truncate(dlen - 1);
    (quot, rem)
}
