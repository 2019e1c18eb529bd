//! Exact linear algebra over `Z/mZ`.
//!
//! Submodules of `(Z/mZ)^k` are stored by their Howell normal form, which is
//! unique for a given row space even when `m` is composite. Equality of
//! submodules is therefore equality of the stored matrices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShiftError};

pub const MAX_MODULUS: u64 = 1 << 16;

/// The ring `Z/mZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModRing {
    m: u32,
}

impl ModRing {
    pub fn new(m: u64) -> Result<Self> {
        if !(2..=MAX_MODULUS).contains(&m) {
            return Err(ShiftError::InvalidModulus(m));
        }
        Ok(ModRing { m: m as u32 })
    }

    pub fn modulus(&self) -> u32 {
        self.m
    }

    #[inline]
    pub fn reduce(&self, v: i64) -> u32 {
        v.rem_euclid(self.m as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.m as u64) as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.m as u64 - b as u64) % self.m as u64) as u32
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.m as u64) as u32
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.sub(0, a)
    }

    /// `a*x + b*y` for row operations.
    #[inline]
    fn lin(&self, a: u32, x: u32, b: u32, y: u32) -> u32 {
        ((a as u64 * x as u64 + b as u64 * y as u64) % self.m as u64) as u32
    }

    /// A unit `u` with `u * a ≡ gcd(a, m) (mod m)`.
    fn normalizing_unit(&self, a: u32) -> u32 {
        let m = self.m as i64;
        let g = gcd(a as i64, m);
        let (a1, m1) = (a as i64 / g, m / g);
        let base = if m1 == 1 { 1 } else { mod_inverse(a1.rem_euclid(m1), m1) };
        let mut u = base;
        while gcd(u, m) != 1 {
            u += m1;
        }
        (u % m) as u32
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: returns `(g, s, t)` with `s*a + t*b = g`.
fn xgcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0, s0, t0)
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    let (g, s, _) = xgcd(a, m);
    debug_assert_eq!(g, 1);
    s.rem_euclid(m)
}

/// A dense matrix over `Z/mZ`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    ring: ModRing,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl Matrix {
    pub fn zeros(ring: ModRing, rows: usize, cols: usize) -> Self {
        Matrix { ring, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ring: ModRing, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(ring: ModRing, cols: usize, rows: &[Vec<u32>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(ShiftError::RankMismatch { expected: cols, got: r.len() });
            }
            data.extend(r.iter().map(|&v| v % ring.modulus()));
        }
        Ok(Matrix { ring, rows: rows.len(), cols, data })
    }

    /// Parses `1,1;0,1` (semicolon-separated rows).
    pub fn parse(ring: ModRing, s: &str) -> Result<Self> {
        let rows: Vec<Vec<u32>> = s
            .split(';')
            .map(|r| {
                r.split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<i64>()
                            .map(|x| ring.reduce(x))
                            .map_err(|_| ShiftError::Invalid(format!("bad matrix entry `{v}`")))
                    })
                    .collect::<Result<Vec<u32>>>()
            })
            .collect::<Result<_>>()?;
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(ring, cols, &rows)
    }

    pub fn ring(&self) -> ModRing {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.ring.modulus();
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.ring, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(ShiftError::RankMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = Matrix::zeros(self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc += self.get(i, k) as u64 * other.get(k, j) as u64;
                }
                out.set(i, j, (acc % self.ring.modulus() as u64) as u32);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(ShiftError::RankMismatch { expected: self.rows * self.cols, got: other.rows * other.cols });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| self.ring.add(a, b)).collect();
        Ok(Matrix { ring: self.ring, rows: self.rows, cols: self.cols, data })
    }

    /// Matrix-vector product `A v`.
    pub fn apply(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(ShiftError::RankMismatch { expected: self.cols, got: v.len() });
        }
        let m = self.ring.modulus() as u64;
        Ok((0..self.rows)
            .map(|r| {
                let acc: u64 = self.row(r).iter().zip(v).map(|(&a, &b)| a as u64 * b as u64 % m).sum();
                (acc % m) as u32
            })
            .collect())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ";")?;
            }
            let row: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            write!(f, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Howell normal form of the row space spanned by `rows` (vectors of length `cols`).
///
/// Returns the nonzero rows. Pivots divide `m`, entries above a pivot are
/// reduced below it, and every vector of the row space whose first `j`
/// coordinates vanish is spanned by the rows with pivot column `>= j`.
pub fn howell_rows(ring: ModRing, cols: usize, rows: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let m = ring.modulus();
    let mut a: Vec<Vec<u32>> = rows.iter().filter(|r| r.iter().any(|&v| v != 0)).cloned().collect();
    let mut pivot_row = 0usize;
    for c in 0..cols {
        if pivot_row >= a.len() {
            break;
        }
        // gcd-combine column c of rows pivot_row.. into pivot_row
        for i in pivot_row + 1..a.len() {
            if a[i][c] == 0 {
                continue;
            }
            let (x, y) = (a[pivot_row][c] as i64, a[i][c] as i64);
            if x == 0 {
                a.swap(pivot_row, i);
                continue;
            }
            let (g, s, t) = xgcd(x, y);
            let (u, v) = (x / g, y / g);
            let (s, t) = (ring.reduce(s), ring.reduce(t));
            let (nu, nv) = (ring.reduce(u), ring.reduce(-v));
            let (top, bot) = (a[pivot_row].clone(), a[i].clone());
            for k in c..cols {
                a[pivot_row][k] = ring.lin(s, top[k], t, bot[k]);
                a[i][k] = ring.lin(nv, top[k], nu, bot[k]);
            }
        }
        if a[pivot_row][c] == 0 {
            continue;
        }
        let unit = ring.normalizing_unit(a[pivot_row][c]);
        for k in c..cols {
            a[pivot_row][k] = ring.mul(unit, a[pivot_row][k]);
        }
        let p = a[pivot_row][c];
        for i in 0..pivot_row {
            let q = a[i][c] / p;
            if q != 0 {
                for k in c..cols {
                    a[i][k] = ring.sub(a[i][k], ring.mul(q, a[pivot_row][k]));
                }
            }
        }
        // annihilator multiple keeps the row space but exposes hidden rows
        let ann = m / p;
        if ann != m && ann != 1 {
            let extra: Vec<u32> = a[pivot_row].iter().map(|&v| ring.mul(ann, v)).collect();
            if extra.iter().any(|&v| v != 0) {
                a.push(extra);
            }
        }
        pivot_row += 1;
    }
    a.truncate(pivot_row);
    a.retain(|r| r.iter().any(|&v| v != 0));
    a
}

fn leading(row: &[u32]) -> Option<usize> {
    row.iter().position(|&v| v != 0)
}

/// A submodule of `(Z/mZ)^rank`, stored in Howell normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Submodule {
    ring: ModRing,
    rank: usize,
    rows: Vec<Vec<u32>>,
}

impl Submodule {
    pub fn zero(ring: ModRing, rank: usize) -> Self {
        Submodule { ring, rank, rows: Vec::new() }
    }

    pub fn full(ring: ModRing, rank: usize) -> Self {
        let rows = (0..rank)
            .map(|i| {
                let mut r = vec![0; rank];
                r[i] = 1;
                r
            })
            .collect();
        Submodule { ring, rank, rows }
    }

    pub fn span(ring: ModRing, rank: usize, generators: &[Vec<u32>]) -> Result<Self> {
        for g in generators {
            if g.len() != rank {
                return Err(ShiftError::RankMismatch { expected: rank, got: g.len() });
            }
        }
        let gens: Vec<Vec<u32>> =
            generators.iter().map(|g| g.iter().map(|&v| v % ring.modulus()).collect()).collect();
        Ok(Submodule { ring, rank, rows: howell_rows(ring, rank, &gens) })
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        Submodule { ring: m.ring(), rank: m.cols(), rows: howell_rows(m.ring(), m.cols(), &m.row_vecs()) }
    }

    pub fn ring(&self) -> ModRing {
        self.ring
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Howell rows.
    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::from_rows(self.ring, self.rank, &self.rows).expect("rows have ambient rank")
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_full(&self) -> bool {
        *self == Submodule::full(self.ring, self.rank)
    }

    /// Number of elements.
    pub fn size(&self) -> u128 {
        let m = self.ring.modulus() as u128;
        self.rows.iter().map(|r| m / r[leading(r).unwrap()] as u128).product()
    }

    pub fn member(&self, v: &[u32]) -> Result<bool> {
        if v.len() != self.rank {
            return Err(ShiftError::RankMismatch { expected: self.rank, got: v.len() });
        }
        let mut v: Vec<u32> = v.iter().map(|&x| x % self.ring.modulus()).collect();
        for row in &self.rows {
            let c = leading(row).unwrap();
            let p = row[c];
            if !v[c].is_multiple_of(p) {
                return Ok(false);
            }
            let q = v[c] / p;
            if q != 0 {
                for k in c..self.rank {
                    v[k] = self.ring.sub(v[k], self.ring.mul(q, row[k]));
                }
            }
        }
        Ok(v.iter().all(|&x| x == 0))
    }

    /// Enumerates every element; each has a unique representation
    /// `sum c_i row_i` with `0 <= c_i < m / pivot_i`.
    pub fn elements(&self) -> Vec<Vec<u32>> {
        let m = self.ring.modulus();
        let orders: Vec<u32> = self.rows.iter().map(|r| m / r[leading(r).unwrap()]).collect();
        let mut out = vec![vec![0u32; self.rank]];
        for (row, &ord) in self.rows.iter().zip(&orders) {
            let mut next = Vec::with_capacity(out.len() * ord as usize);
            for base in &out {
                for c in 0..ord {
                    next.push(base.iter().zip(row).map(|(&b, &r)| self.ring.lin(1, b, c, r)).collect());
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    fn check_compatible(&self, other: &Submodule) -> Result<()> {
        if self.ring != other.ring {
            return Err(ShiftError::ModulusMismatch(self.ring.modulus(), other.ring.modulus()));
        }
        if self.rank != other.rank {
            return Err(ShiftError::RankMismatch { expected: self.rank, got: other.rank });
        }
        Ok(())
    }

    pub fn sum(&self, other: &Submodule) -> Result<Submodule> {
        self.check_compatible(other)?;
        let gens: Vec<Vec<u32>> = self.rows.iter().chain(&other.rows).cloned().collect();
        Submodule::span(self.ring, self.rank, &gens)
    }

    /// `S ∩ T` via the Zassenhaus construction.
    pub fn intersect(&self, other: &Submodule) -> Result<Submodule> {
        self.check_compatible(other)?;
        let k = self.rank;
        let mut gens = Vec::with_capacity(self.rows.len() + other.rows.len());
        for s in &self.rows {
            let mut r = s.clone();
            r.extend_from_slice(s);
            gens.push(r);
        }
        for t in &other.rows {
            let mut r = t.clone();
            r.extend(std::iter::repeat_n(0, k));
            gens.push(r);
        }
        Ok(self.tail_part(&gens, k, k))
    }

    /// Rows of the Howell form of `gens` whose first `head` columns vanish,
    /// truncated to the remaining `tail` columns.
    fn tail_part(&self, gens: &[Vec<u32>], head: usize, tail: usize) -> Submodule {
        let h = howell_rows(self.ring, head + tail, gens);
        let rows: Vec<Vec<u32>> =
            h.into_iter().filter(|r| leading(r).is_some_and(|c| c >= head)).map(|r| r[head..].to_vec()).collect();
        Submodule { ring: self.ring, rank: tail, rows: howell_rows(self.ring, tail, &rows) }
    }

    pub fn is_subset(&self, other: &Submodule) -> Result<bool> {
        self.check_compatible(other)?;
        for r in &self.rows {
            if !other.member(r)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Coordinate projection onto `coords` (in the given order; repeats allowed).
    pub fn project(&self, coords: &[usize]) -> Result<Submodule> {
        if let Some(&bad) = coords.iter().find(|&&c| c >= self.rank) {
            return Err(ShiftError::RankMismatch { expected: self.rank, got: bad + 1 });
        }
        let gens: Vec<Vec<u32>> = self.rows.iter().map(|r| coords.iter().map(|&c| r[c]).collect()).collect();
        Submodule::span(self.ring, coords.len(), &gens)
    }

    /// Preimage under the projection `(Z/m)^ambient -> (Z/m)^coords.len()`.
    pub fn preimage_under_projection(&self, ambient: usize, coords: &[usize]) -> Result<Submodule> {
        if coords.len() != self.rank {
            return Err(ShiftError::RankMismatch { expected: self.rank, got: coords.len() });
        }
        let p = LinMap::projection(self.ring, ambient, coords)?;
        p.preimage(self)
    }

    /// Direct product `S × T` in rank `rank(S) + rank(T)`.
    pub fn product(&self, other: &Submodule) -> Result<Submodule> {
        if self.ring != other.ring {
            return Err(ShiftError::ModulusMismatch(self.ring.modulus(), other.ring.modulus()));
        }
        let rank = self.rank + other.rank;
        let mut gens = Vec::new();
        for r in &self.rows {
            let mut v = r.clone();
            v.extend(std::iter::repeat_n(0, other.rank));
            gens.push(v);
        }
        for r in &other.rows {
            let mut v = vec![0; self.rank];
            v.extend_from_slice(r);
            gens.push(v);
        }
        Submodule::span(self.ring, rank, &gens)
    }
}

impl fmt::Display for Submodule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows.is_empty() {
            return write!(f, "0^{}", self.rank);
        }
        write!(f, "{}", self.matrix())
    }
}

/// A linear map `(Z/m)^domain -> (Z/m)^codomain`, `v ↦ A v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinMap {
    matrix: Matrix,
}

impl LinMap {
    /// `matrix` has `codomain` rows and `domain` columns.
    pub fn new(matrix: Matrix) -> Self {
        LinMap { matrix }
    }

    pub fn projection(ring: ModRing, ambient: usize, coords: &[usize]) -> Result<Self> {
        let mut a = Matrix::zeros(ring, coords.len(), ambient);
        for (i, &c) in coords.iter().enumerate() {
            if c >= ambient {
                return Err(ShiftError::RankMismatch { expected: ambient, got: c + 1 });
            }
            a.set(i, c, 1);
        }
        Ok(LinMap { matrix: a })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn ring(&self) -> ModRing {
        self.matrix.ring()
    }

    pub fn domain_rank(&self) -> usize {
        self.matrix.cols()
    }

    pub fn codomain_rank(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, v: &[u32]) -> Result<Vec<u32>> {
        self.matrix.apply(v)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinMap) -> Result<LinMap> {
        Ok(LinMap { matrix: self.matrix.mul(&inner.matrix)? })
    }

    /// Rows `[A^T_i | e_i]`: combinations `y` give `[(A y)^T | y]`.
    fn graph_rows(&self) -> Vec<Vec<u32>> {
        let (k, l) = (self.domain_rank(), self.codomain_rank());
        (0..k)
            .map(|i| {
                let mut r: Vec<u32> = (0..l).map(|j| self.matrix.get(j, i)).collect();
                r.extend((0..k).map(|j| u32::from(i == j)));
                r
            })
            .collect()
    }

    pub fn kernel(&self) -> Submodule {
        let (k, l) = (self.domain_rank(), self.codomain_rank());
        Submodule::zero(self.ring(), k).tail_part(&self.graph_rows(), l, k)
    }

    pub fn image(&self) -> Submodule {
        Submodule::from_matrix(&self.matrix.transpose())
    }

    /// Image of a submodule of the domain.
    pub fn image_of(&self, s: &Submodule) -> Result<Submodule> {
        if s.rank() != self.domain_rank() {
            return Err(ShiftError::RankMismatch { expected: self.domain_rank(), got: s.rank() });
        }
        let gens = s.rows().iter().map(|r| self.apply(r)).collect::<Result<Vec<_>>>()?;
        Submodule::span(self.ring(), self.codomain_rank(), &gens)
    }

    /// `{v : A v ∈ T}`.
    pub fn preimage(&self, t: &Submodule) -> Result<Submodule> {
        let (k, l) = (self.domain_rank(), self.codomain_rank());
        if t.rank() != l {
            return Err(ShiftError::RankMismatch { expected: l, got: t.rank() });
        }
        if t.ring() != self.ring() {
            return Err(ShiftError::ModulusMismatch(t.ring().modulus(), self.ring().modulus()));
        }
        let mut gens = self.graph_rows();
        for r in t.rows() {
            let mut v = r.clone();
            v.extend(std::iter::repeat_n(0, k));
            gens.push(v);
        }
        Ok(Submodule::zero(self.ring(), k).tail_part(&gens, l, k))
    }

    /// Graph `{(x, A x)}` as a submodule of rank `domain + codomain`.
    pub fn graph(&self) -> Submodule {
        let (k, l) = (self.domain_rank(), self.codomain_rank());
        let gens: Vec<Vec<u32>> = (0..k)
            .map(|i| {
                let mut r: Vec<u32> = (0..k).map(|j| u32::from(i == j)).collect();
                r.extend((0..l).map(|j| self.matrix.get(j, i)));
                r
            })
            .collect();
        Submodule::span(self.ring(), k + l, &gens).expect("graph rows have rank k + l")
    }
}

/// Solves `X · a_i = b_i` for a matrix `X` (`rows(b) × len(a)`), given
/// generator pairs `(a_i, b_i)`. Returns `None` when no such `X` exists.
pub fn solve_left(ring: ModRing, pairs: &[(Vec<u32>, Vec<u32>)], a_rank: usize, b_rank: usize) -> Option<Matrix> {
    // Row j of X satisfies x · a_i = b_i[j] for all i: a row-space membership
    // problem for the rows of A^T, solved on the augmented [A^T | I].
    let r = pairs.len();
    let aug: Vec<Vec<u32>> = (0..a_rank)
        .map(|c| {
            let mut row: Vec<u32> = pairs.iter().map(|(a, _)| a[c]).collect();
            row.extend((0..a_rank).map(|j| u32::from(j == c)));
            row
        })
        .collect();
    let h = howell_rows(ring, r + a_rank, &aug);
    let mut x = Matrix::zeros(ring, b_rank, a_rank);
    for j in 0..b_rank {
        let mut v: Vec<u32> = pairs.iter().map(|(_, b)| b[j] % ring.modulus()).collect();
        v.extend(std::iter::repeat_n(0, a_rank));
        for row in &h {
            let c = leading(row).unwrap();
            if c >= r {
                break;
            }
            let p = row[c];
            if !v[c].is_multiple_of(p) {
                return None;
            }
            let q = v[c] / p;
            if q != 0 {
                for k in c..v.len() {
                    v[k] = ring.sub(v[k], ring.mul(q, row[k]));
                }
            }
        }
        if v[..r].iter().any(|&e| e != 0) {
            return None;
        }
        // [b | 0] = sum c_i H_i + [0 | w]  ⇒  coefficients y = -w
        for c in 0..a_rank {
            x.set(j, c, ring.neg(v[r + c]));
        }
    }
    Some(x)
}

/// Outcome of following a descending chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainOutcome<T> {
    /// `value` is the first entry equal to the next `width` entries; `index` is its position.
    Stabilized { value: T, index: usize },
    /// The iteration cap ran out; `last` is the last value seen.
    Inconclusive { last: Option<T>, steps: usize },
}

/// Follows a descending chain until `width` consecutive repeats are seen.
pub fn chain_stabilize<T, I>(chain: I, cap: usize, width: usize) -> ChainOutcome<T>
where
    T: PartialEq + Clone,
    I: IntoIterator<Item = T>,
{
    let width = width.max(1);
    let mut window: Vec<T> = Vec::new();
    let mut start = 0usize;
    let mut steps = 0usize;
    for item in chain.into_iter().take(cap) {
        steps += 1;
        if window.last().is_some_and(|last| *last != item) {
            start += window.len();
            window.clear();
        }
        window.push(item);
        if window.len() > width {
            return ChainOutcome::Stabilized { value: window[0].clone(), index: start };
        }
    }
    ChainOutcome::Inconclusive { last: window.pop(), steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn ring(m: u64) -> ModRing {
        ModRing::new(m).unwrap()
    }

    /// Brute-force row space by closure under addition and scaling.
    fn row_space(r: ModRing, k: usize, gens: &[Vec<u32>]) -> BTreeSet<Vec<u32>> {
        let mut set: BTreeSet<Vec<u32>> = BTreeSet::new();
        set.insert(vec![0; k]);
        loop {
            let mut grew = false;
            let current: Vec<Vec<u32>> = set.iter().cloned().collect();
            for v in &current {
                for g in gens {
                    let w: Vec<u32> = v.iter().zip(g).map(|(&a, &b)| r.add(a, b)).collect();
                    grew |= set.insert(w);
                }
            }
            if !grew {
                return set;
            }
        }
    }

    fn all_vectors(r: ModRing, k: usize) -> Vec<Vec<u32>> {
        let m = r.modulus();
        let mut out = vec![vec![]];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|v: Vec<u32>| {
                    (0..m).map(move |x| {
                        let mut w = v.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn howell_example_mod4() {
        let s = Submodule::span(ring(4), 2, &[vec![2, 0], vec![0, 1]]).unwrap();
        assert_eq!(s.rows(), &[vec![2, 0], vec![0, 1]]);
        let expected = row_space(ring(4), 2, &[vec![2, 0], vec![0, 1]]);
        assert_eq!(expected.len(), 8);
        assert_eq!(s.elements().into_iter().collect::<BTreeSet<_>>(), expected);
    }

    #[test]
    fn howell_duplicate_row() {
        let s = Submodule::span(ring(2), 2, &[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(s.rows(), &[vec![1, 1]]);
    }

    #[test]
    fn howell_empty_is_zero() {
        let s = Submodule::span(ring(5), 3, &[]).unwrap();
        assert!(s.is_zero());
        assert_eq!(s.size(), 1);
    }

    #[test]
    fn howell_exposes_hidden_rows() {
        // (2,1) over Z/4 also spans (0,2)
        let s = Submodule::span(ring(4), 2, &[vec![2, 1]]).unwrap();
        assert_eq!(s.rows(), &[vec![2, 1], vec![0, 2]]);
        assert!(s.member(&[0, 2]).unwrap());
        assert_eq!(s.size(), 4);
    }

    #[test]
    fn xor_kernel() {
        let f = LinMap::new(Matrix::parse(ring(2), "1,1").unwrap());
        assert_eq!(f.kernel(), Submodule::span(ring(2), 2, &[vec![1, 1]]).unwrap());
    }

    #[test]
    fn nilpotent_image_and_kernel() {
        let s = LinMap::new(Matrix::parse(ring(2), "0,1;0,0").unwrap());
        let e1 = Submodule::span(ring(2), 2, &[vec![1, 0]]).unwrap();
        // enumerate all four vectors
        let mut img = BTreeSet::new();
        let mut ker = BTreeSet::new();
        for v in all_vectors(ring(2), 2) {
            let w = s.apply(&v).unwrap();
            if w.iter().all(|&x| x == 0) {
                ker.insert(v.clone());
            }
            img.insert(w);
        }
        assert_eq!(s.image().elements().into_iter().collect::<BTreeSet<_>>(), img);
        assert_eq!(s.kernel().elements().into_iter().collect::<BTreeSet<_>>(), ker);
        assert_eq!(s.image(), e1);
        assert_eq!(s.kernel(), e1);
    }

    #[test]
    fn intersect_axes() {
        let a = Submodule::span(ring(2), 2, &[vec![1, 0]]).unwrap();
        let b = Submodule::span(ring(2), 2, &[vec![0, 1]]).unwrap();
        assert!(a.intersect(&b).unwrap().is_zero());
    }

    #[test]
    fn rank_mismatch_is_error() {
        let a = Submodule::full(ring(2), 2);
        let b = Submodule::full(ring(2), 3);
        assert!(matches!(a.intersect(&b), Err(ShiftError::RankMismatch { .. })));
        assert!(a.member(&[1]).is_err());
    }

    #[test]
    fn chain_examples() {
        let s = Submodule::full(ring(3), 2);
        assert_eq!(
            chain_stabilize(std::iter::repeat(s.clone()), 10, 1),
            ChainOutcome::Stabilized { value: s, index: 0 }
        );
        let full = Submodule::full(ring(2), 1);
        let zero = Submodule::zero(ring(2), 1);
        let chain = std::iter::once(full).chain(std::iter::repeat(zero.clone()));
        assert_eq!(chain_stabilize(chain, 10, 1), ChainOutcome::Stabilized { value: zero, index: 1 });
        let strictly = (0..).map(|i: u32| 100 - i);
        assert!(matches!(chain_stabilize(strictly, 5, 1), ChainOutcome::Inconclusive { steps: 5, .. }));
    }

    #[test]
    fn kernel_image_counting_prime() {
        let r = ring(3);
        let f = LinMap::new(Matrix::parse(r, "1,2,0;2,1,0").unwrap());
        assert_eq!(f.kernel().size() * f.image().size(), 27);
    }

    #[test]
    fn kernel_image_counting_composite_by_enumeration() {
        let r = ring(4);
        let f = LinMap::new(Matrix::parse(r, "2,1;0,2").unwrap());
        let all = all_vectors(r, 2);
        let ker = all.iter().filter(|v| f.apply(v).unwrap().iter().all(|&x| x == 0)).count();
        let img: BTreeSet<_> = all.iter().map(|v| f.apply(v).unwrap()).collect();
        assert_eq!(f.kernel().size(), ker as u128);
        assert_eq!(f.image().size(), img.len() as u128);
        assert_eq!(ker * img.len(), 16);
    }

    #[test]
    fn solve_left_recovers_map() {
        let r = ring(4);
        let x = Matrix::parse(r, "1,2,3;0,1,2").unwrap();
        let pairs: Vec<_> = all_vectors(r, 3)
            .into_iter()
            .filter(|v| v[0] % 2 == 0)
            .map(|a| {
                let b = x.apply(&a).unwrap();
                (a, b)
            })
            .collect();
        let sol = solve_left(r, &pairs, 3, 2).unwrap();
        for (a, b) in &pairs {
            assert_eq!(&sol.apply(a).unwrap(), b);
        }
        // inconsistent targets: (1,0,0) ↦ 1 and (3,0,0) ↦ 1 cannot both hold linearly
        let bad = vec![(vec![1, 0, 0], vec![1]), (vec![3, 0, 0], vec![1])];
        assert!(solve_left(r, &bad, 3, 1).is_none());
    }

    fn matrix_strategy() -> impl Strategy<Value = (u64, usize, Vec<Vec<u32>>)> {
        (prop_oneof![Just(2u64), Just(4u64)], 1usize..5).prop_flat_map(|(m, k)| {
            let row = prop::collection::vec(0u32..m as u32, k);
            (Just(m), Just(k), prop::collection::vec(row, 0..5))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn howell_is_canonical((m, k, a) in matrix_strategy(), b_rows in prop::collection::vec(prop::collection::vec(0u32..4, 4), 0..5)) {
            let r = ring(m);
            let b: Vec<Vec<u32>> = b_rows.iter().map(|row| row[..k].iter().map(|&v| v % m as u32).collect()).collect();
            let ha = Submodule::span(r, k, &a).unwrap();
            let hb = Submodule::span(r, k, &b).unwrap();
            let sa = row_space(r, k, &a);
            let sb = row_space(r, k, &b);
            prop_assert_eq!(ha == hb, sa == sb);
            prop_assert_eq!(ha.elements().into_iter().collect::<BTreeSet<_>>(), sa.clone());
            prop_assert_eq!(ha.size(), sa.len() as u128);
            // reordering and scaling by a unit keeps the form
            let mut shuffled = a.clone();
            shuffled.reverse();
            let scaled: Vec<Vec<u32>> = shuffled.iter().map(|row| row.iter().map(|&v| r.mul(v, m as u32 - 1)).collect()).collect();
            prop_assert_eq!(Submodule::span(r, k, &scaled).unwrap(), ha);
        }

        #[test]
        fn preimage_galois_connection((m, k, a) in matrix_strategy(), t_gens in prop::collection::vec(prop::collection::vec(0u32..4, 2), 0..3)) {
            let r = ring(m);
            // map (Z/m)^k -> (Z/m)^2 with rows from `a` padded
            let mut rows: Vec<Vec<u32>> = a.iter().take(2).cloned().collect();
            while rows.len() < 2 { rows.push(vec![0; k]); }
            let f = LinMap::new(Matrix::from_rows(r, k, &rows).unwrap());
            let t_gens: Vec<Vec<u32>> = t_gens.iter().map(|g| g.iter().map(|&v| v % m as u32).collect()).collect();
            let t = Submodule::span(r, 2, &t_gens).unwrap();
            let pre = f.preimage(&t).unwrap();
            for v in all_vectors(r, k) {
                prop_assert_eq!(pre.member(&v).unwrap(), t.member(&f.apply(&v).unwrap()).unwrap());
            }
            let ker = f.kernel();
            for v in all_vectors(r, k) {
                prop_assert_eq!(ker.member(&v).unwrap(), f.apply(&v).unwrap().iter().all(|&x| x == 0));
            }
        }

        #[test]
        fn projection_of_intersection((m, k, a) in matrix_strategy(), b in prop::collection::vec(prop::collection::vec(0u32..4, 4), 0..4), c in prop::collection::vec(0usize..4, 1..3)) {
            let r = ring(m);
            let b: Vec<Vec<u32>> = b.iter().map(|row| row[..k].iter().map(|&v| v % m as u32).collect()).collect();
            let coords: Vec<usize> = c.into_iter().map(|x| x % k).collect();
            let s = Submodule::span(r, k, &a).unwrap();
            let t = Submodule::span(r, k, &b).unwrap();
            let st = s.intersect(&t).unwrap();
            let lhs = st.project(&coords).unwrap();
            let rhs = s.project(&coords).unwrap().intersect(&t.project(&coords).unwrap()).unwrap();
            prop_assert!(lhs.is_subset(&rhs).unwrap());
            // intersection agrees with set intersection
            let es: BTreeSet<_> = s.elements().into_iter().collect();
            let et: BTreeSet<_> = t.elements().into_iter().collect();
            let both: BTreeSet<_> = es.intersection(&et).cloned().collect();
            prop_assert_eq!(st.elements().into_iter().collect::<BTreeSet<_>>(), both);
        }

        #[test]
        fn kernel_image_product_prime(rows in prop::collection::vec(prop::collection::vec(0u32..3, 3), 1..4)) {
            let r = ring(3);
            let f = LinMap::new(Matrix::from_rows(r, 3, &rows).unwrap());
            prop_assert_eq!(f.kernel().size() * f.image().size(), 27);
        }
    }
}
