//! Linear mappings over `Z/sZ`.
//!
//! Any `n x n` matrix factors into at most `2n-1` assignment matrices with row
//! signature `1, ..., n, n-1, ..., 1`. Read as a program, each factor is one
//! linear assignment `x_k := sum_j c_j x_j`.

use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::program::{Alphabet, Assignment, InSituProgram};

/// The ring `Z/sZ` with the factorisation of `s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModRing {
    s: u64,
    factors: Vec<(u64, u32)>,
}

impl ModRing {
    pub fn new(s: u64) -> Result<Self> {
        if s < 2 {
            return Err(Error::InvalidModulus(s));
        }
        let mut factors = Vec::new();
        let mut rest = s;
        let mut p = 2u64;
        while p.saturating_mul(p) <= rest {
            if rest % p == 0 {
                let mut e = 0;
                while rest % p == 0 {
                    rest /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if rest > 1 {
            factors.push((rest, 1));
        }
        Ok(ModRing { s, factors })
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn prime_factorization(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn reduce(&self, a: u64) -> u64 {
        a % self.s
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.s as u128) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn neg(&self, a: u64) -> u64 {
        let a = a % self.s;
        if a == 0 {
            0
        } else {
            self.s - a
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.s as u128) as u64
    }

    pub fn is_unit(&self, a: u64) -> bool {
        (a % self.s).gcd(&self.s) == 1
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        let e = (a as i128 % self.s as i128).extended_gcd(&(self.s as i128));
        (e.gcd == 1).then(|| e.x.rem_euclid(self.s as i128) as u64)
    }

    /// A unit `u` with `u = a (mod m)`, where `m` divides `s` and `a` is
    /// coprime to `m`.
    fn lift_unit(&self, a: u64, m: u64) -> u64 {
        let mut u = a % m;
        while !self.is_unit(u) {
            u += m;
        }
        u
    }
}

/// Square matrix over `Z/sZ`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatrixMod {
    ring: ModRing,
    n: usize,
    entries: Vec<u64>,
}

impl MatrixMod {
    /// Entries are reduced mod `s`.
    pub fn new(ring: ModRing, rows: Vec<Vec<u64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!("row {} has {} entries, expected {n}", i + 1, row.len())));
            }
            entries.extend(row.iter().map(|&a| ring.reduce(a)));
        }
        Ok(MatrixMod { ring, n, entries })
    }

    pub fn identity(ring: ModRing, n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        MatrixMod { ring, n, entries }
    }

    pub fn ring(&self) -> &ModRing {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: u64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.entries.chunks(self.n).map(<[u64]>::to_vec).collect()
    }

    pub fn mul(&self, other: &MatrixMod) -> Result<MatrixMod> {
        if self.ring != other.ring || self.n != other.n {
            return Err(Error::DimensionMismatch("matrices over different rings or sizes".into()));
        }
        let n = self.n;
        let r = &self.ring;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = (0..n).fold(0, |acc, t| r.add(acc, r.mul(self.get(i, t), other.get(t, j))));
            }
        }
        Ok(MatrixMod { ring: self.ring.clone(), n, entries })
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        (0..self.n).map(|i| dot(&self.ring, self.row(i), x)).collect()
    }

    /// Determinant by fraction-free expansion; used only on small matrices.
    pub fn determinant(&self) -> u64 {
        fn det(r: &ModRing, m: &[Vec<u64>]) -> u64 {
            if m.len() == 1 {
                return m[0][0];
            }
            let mut acc = 0;
            for (c, &a) in m[0].iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let minor: Vec<Vec<u64>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect())
                    .collect();
                let term = r.mul(a, det(r, &minor));
                acc = if c % 2 == 0 { r.add(acc, term) } else { r.sub(acc, term) };
            }
            acc
        }
        det(&self.ring, &self.rows())
    }
}

fn dot(r: &ModRing, c: &[u64], x: &[u64]) -> u64 {
    c.iter().zip(x).fold(0, |acc, (&a, &b)| r.add(acc, r.mul(a, b)))
}

impl fmt::Display for MatrixMod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.ring.s, self.n)?;
        for row in self.entries.chunks(self.n) {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Identity matrix except on row `row`, which holds `coefficients`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AssignmentMatrix {
    row: usize,
    coefficients: Vec<u64>,
}

impl AssignmentMatrix {
    pub fn new(ring: &ModRing, row: usize, coefficients: Vec<u64>) -> Result<Self> {
        if row >= coefficients.len() {
            return Err(Error::DimensionMismatch(format!(
                "row {} out of range 1..={}",
                row + 1,
                coefficients.len()
            )));
        }
        let coefficients = coefficients.into_iter().map(|a| ring.reduce(a)).collect();
        Ok(AssignmentMatrix { row, coefficients })
    }

    pub fn identity(n: usize, row: usize) -> Self {
        let coefficients = (0..n).map(|j| u64::from(j == row)).collect();
        AssignmentMatrix { row, coefficients }
    }

    pub fn row(&self) -> usize {
        self.row
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    pub fn diagonal(&self) -> u64 {
        self.coefficients[self.row]
    }

    pub fn is_identity(&self) -> bool {
        self.coefficients.iter().enumerate().all(|(j, &a)| a == u64::from(j == self.row))
    }

    pub fn to_matrix(&self, ring: &ModRing) -> MatrixMod {
        let n = self.coefficients.len();
        let mut m = MatrixMod::identity(ring.clone(), n);
        for (j, &a) in self.coefficients.iter().enumerate() {
            m.set(self.row, j, a);
        }
        m
    }

    pub fn apply_in_place(&self, ring: &ModRing, x: &mut [u64]) {
        x[self.row] = dot(ring, &self.coefficients, x);
    }
}

/// Linear assignments in application order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearProgram {
    ring: ModRing,
    n: usize,
    factors: Vec<AssignmentMatrix>,
}

impl LinearProgram {
    pub fn new(ring: ModRing, n: usize, factors: Vec<AssignmentMatrix>) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch("n must be positive".into()));
        }
        if let Some(f) = factors.iter().find(|f| f.coefficients.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "factor on row {} has {} coefficients, expected {n}",
                f.row + 1,
                f.coefficients.len()
            )));
        }
        Ok(LinearProgram { ring, n, factors })
    }

    pub fn ring(&self) -> &ModRing {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[AssignmentMatrix] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn signature(&self) -> Vec<usize> {
        self.factors.iter().map(AssignmentMatrix::row).collect()
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        let mut v: Vec<u64> = x.iter().map(|&a| self.ring.reduce(a)).collect();
        for f in &self.factors {
            f.apply_in_place(&self.ring, &mut v);
        }
        v
    }

    /// The matrix computed by the program: last factor leftmost.
    pub fn matrix(&self) -> MatrixMod {
        let rev: Vec<AssignmentMatrix> = self.factors.iter().rev().cloned().collect();
        product(&self.ring, self.n, &rev).expect("factors validated on construction")
    }

    /// Drops identity factors.
    pub fn elide_identities(&self) -> LinearProgram {
        let factors = self.factors.iter().filter(|f| !f.is_identity()).cloned().collect();
        LinearProgram { ring: self.ring.clone(), n: self.n, factors }
    }
}

/// `lambda` with `lambda[i0] = 1` and `sum lambda_i x_i` in `g (Z/sZ)^*`,
/// where `g = gcd(x_1, ..., x_n, s)`.
///
/// A single index or a pair `i0, i1` is tried first; otherwise the multipliers
/// are built prime by prime and glued by Chinese remaindering.
pub fn unit_multipliers(ring: &ModRing, xs: &[u64], i0: usize) -> Result<Vec<u64>> {
    let s = ring.s;
    if i0 >= xs.len() {
        return Err(Error::DimensionMismatch(format!("index {} out of range 1..={}", i0 + 1, xs.len())));
    }
    let xs: Vec<u64> = xs.iter().map(|&x| ring.reduce(x)).collect();
    let g = xs.iter().fold(s, |g, &x| g.gcd(&x));
    if g == s {
        return Err(Error::ZeroColumn);
    }
    let m = s / g;
    let ys: Vec<u64> = xs.iter().map(|&x| x / g).collect();
    let mut lambda = vec![0u64; xs.len()];
    lambda[i0] = 1;
    if ys[i0].gcd(&m) == 1 {
        return Ok(lambda);
    }
    for i1 in (0..xs.len()).filter(|&i| i != i0) {
        if (ys[i0] + ys[i1]).gcd(&m) == 1 {
            lambda[i1] = 1;
            return Ok(lambda);
        }
    }

    // per prime p | m: lambda = e_{i0} if p does not divide y_{i0}, else
    // e_{i0} + e_{i1} for some y_{i1} not divisible by p
    let primes: Vec<u64> = ring.factors.iter().map(|&(p, _)| p).filter(|p| m % p == 0).collect();
    let modulus: u64 = primes.iter().product();
    for &p in &primes {
        if ys[i0] % p == 0 {
            let i1 = (0..ys.len()).find(|&i| ys[i] % p != 0).expect("gcd of ys and m is 1");
            // CRT basis element: 1 mod p, 0 mod the other primes
            let rest = modulus / p;
            let inv = ModRing::new(p).ok().and_then(|r| r.inv(rest % p)).expect("distinct primes");
            let e = (rest as u128 * inv as u128 % modulus as u128) as u64;
            lambda[i1] = (lambda[i1] + e) % modulus;
        }
    }
    lambda[i0] = 1;
    Ok(lambda)
}

/// Factors `m` into at most `2n-1` assignment matrices. The factors are
/// returned in application order `R_1, ..., R_n, L_{n-1}, ..., L_1`; identity
/// factors are kept so the signature is always `1, ..., n, n-1, ..., 1`.
pub fn decompose(m: &MatrixMod) -> LinearProgram {
    let ring = m.ring.clone();
    let n = m.n;
    let mut cur = m.clone();
    let mut rs = Vec::with_capacity(n);
    let mut ls = Vec::with_capacity(n.saturating_sub(1));

    for k in 0..n {
        let column: Vec<u64> = (k..n).map(|i| cur.get(i, k)).collect();
        if column.iter().all(|&a| a == 0) {
            // x_k := row k of the current matrix, diagonal 0
            rs.push(AssignmentMatrix { row: k, coefficients: cur.row(k).to_vec() });
            for j in 0..n {
                cur.set(k, j, u64::from(j == k));
            }
            if k + 1 < n {
                ls.push(AssignmentMatrix::identity(n, k));
            }
            continue;
        }

        let g = column.iter().fold(ring.s, |g, &a| g.gcd(&a));
        if cur.get(k, k).gcd(&ring.s) != g {
            let local = unit_multipliers(&ring, &column, 0).expect("column is nonzero");
            let mut lambda = vec![0u64; n];
            lambda[k..].copy_from_slice(&local);
            // row k += sum_{i>k} lambda_i row i
            let new_row: Vec<u64> = (0..n)
                .map(|j| (k..n).fold(0, |acc, i| ring.add(acc, ring.mul(lambda[i], cur.get(i, j)))))
                .collect();
            for (j, v) in new_row.into_iter().enumerate() {
                cur.set(k, j, v);
            }
            let inv_row = (0..n).map(|j| if j == k { 1 } else { ring.neg(lambda[j]) }).collect();
            ls.push(AssignmentMatrix { row: k, coefficients: inv_row });
        } else if k + 1 < n {
            ls.push(AssignmentMatrix::identity(n, k));
        }

        let r_row = cur.row(k).to_vec();
        let u = ring.lift_unit(r_row[k] / g, ring.s / g);
        let u_inv = ring.inv(u).expect("lifted unit");
        // column k below the diagonal becomes c_i / g * u^{-1}; subtract its
        // contribution from the other columns, then row k becomes e_k
        let below: Vec<(usize, u64)> = (k + 1..n).map(|i| (i, ring.mul(cur.get(i, k) / g, u_inv))).collect();
        for &(i, c) in &below {
            for (j, &a) in r_row.iter().enumerate() {
                if j != k {
                    cur.set(i, j, ring.sub(cur.get(i, j), ring.mul(c, a)));
                }
            }
            cur.set(i, k, c);
        }
        for j in 0..n {
            cur.set(k, j, u64::from(j == k));
        }
        rs.push(AssignmentMatrix { row: k, coefficients: r_row });
    }
    debug_assert_eq!(cur.rows(), MatrixMod::identity(ring.clone(), n).rows());

    // the last step never needs an L
    ls.truncate(n.saturating_sub(1));
    rs.extend(ls.into_iter().rev());
    LinearProgram { ring, n, factors: rs }
}

/// Inverse program: reversed order, each `x_k := a x_k + f` replaced by
/// `x_k := a^{-1} (x_k - f)`.
pub fn invert_linear_program(p: &LinearProgram) -> Result<LinearProgram> {
    let r = &p.ring;
    let mut factors = Vec::with_capacity(p.factors.len());
    for (idx, f) in p.factors.iter().enumerate().rev() {
        let a_inv = r.inv(f.diagonal()).ok_or(Error::NotInvertible(idx))?;
        let coefficients = f
            .coefficients
            .iter()
            .enumerate()
            .map(|(j, &c)| if j == f.row { a_inv } else { r.neg(r.mul(a_inv, c)) })
            .collect();
        factors.push(AssignmentMatrix { row: f.row, coefficients });
    }
    Ok(LinearProgram { ring: p.ring.clone(), n: p.n, factors })
}

/// Matrix product of `factors`, leftmost first.
pub fn product(ring: &ModRing, n: usize, factors: &[AssignmentMatrix]) -> Result<MatrixMod> {
    let mut acc = MatrixMod::identity(ring.clone(), n);
    for f in factors {
        if f.coefficients.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "factor has {} coefficients, expected {n}",
                f.coefficients.len()
            )));
        }
        acc = acc.mul(&f.to_matrix(ring))?;
    }
    Ok(acc)
}

/// The program as linear in-situ assignments over `S = Z/sZ`.
pub fn to_in_situ(p: &LinearProgram) -> Result<InSituProgram> {
    let s = usize::try_from(p.ring.s).map_err(|_| Error::InvalidModulus(p.ring.s))?;
    let alphabet = Alphabet::new(s, p.n)?;
    let assignments = p.factors.iter().map(|f| Assignment::linear(f.row, f.coefficients.clone())).collect();
    InSituProgram::new(alphabet, assignments)
}

pub fn linear_signature(n: usize) -> Vec<usize> {
    (0..n).chain((0..n.saturating_sub(1)).rev()).collect()
}
