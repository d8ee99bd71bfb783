//! Sparse matrices over ℚ and fraction-free elimination.
//!
//! Vectors are scaled to integer vectors and reduced against an echelon of
//! integer pivots with cross-multiplication followed by content division, so
//! no rational arithmetic happens inside the elimination loop. The loop runs
//! on `i128` first and restarts on `BigInt` when an entry overflows.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::KernelError;
use crate::rational::{self, Rational};

pub type SparseVec = BTreeMap<usize, Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    columns: Vec<SparseVec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelImage {
    pub rank: usize,
    pub kernel: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, columns: vec![SparseVec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_columns(rows: usize, columns: Vec<SparseVec>) -> Result<Self, KernelError> {
        for (j, c) in columns.iter().enumerate() {
            if let Some((&i, _)) = c.iter().next_back() {
                if i >= rows {
                    return Err(KernelError::Shape(format!("row {i} out of range in column {j}")));
                }
            }
        }
        let columns = columns
            .into_iter()
            .map(|c| c.into_iter().filter(|(_, v)| !v.is_zero()).collect())
            .collect::<Vec<SparseVec>>();
        Ok(SparseMatrix { rows, cols: columns.len(), columns })
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, rational::int(*v));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &SparseVec {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[SparseVec] {
        &self.columns
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(|c| c.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_empty())
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.columns[j].get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        if v.is_zero() {
            self.columns[j].remove(&i);
        } else {
            self.columns[j].insert(i, v);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.columns.iter().enumerate().flat_map(|(j, c)| c.iter().map(move |(i, v)| (*i, j, v)))
    }

    pub fn mul_vec(&self, x: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (j, xj) in x {
            for (i, a) in &self.columns[*j] {
                add_into(&mut out, *i, a * xj);
            }
        }
        out
    }

    pub fn mul(&self, rhs: &SparseMatrix) -> Result<SparseMatrix, KernelError> {
        if self.cols != rhs.rows {
            return Err(KernelError::Shape(format!("{}x{} times {}x{}", self.rows, self.cols, rhs.rows, rhs.cols)));
        }
        let columns = rhs.columns.iter().map(|c| self.mul_vec(c)).collect();
        Ok(SparseMatrix { rows: self.rows, cols: rhs.cols, columns })
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = SparseMatrix::zero(self.cols, self.rows);
        for (i, j, v) in self.entries() {
            t.columns[i].insert(j, v.clone());
        }
        t
    }

    /// Keeps the listed rows, renumbered in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> SparseMatrix {
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(k, i)| (*i, k)).collect();
        let columns = self
            .columns
            .iter()
            .map(|c| c.iter().filter_map(|(i, v)| pos.get(i).map(|k| (*k, v.clone()))).collect())
            .collect();
        SparseMatrix { rows: keep.len(), cols: self.cols, columns }
    }

    pub fn select_columns(&self, keep: &[usize]) -> SparseMatrix {
        SparseMatrix {
            rows: self.rows,
            cols: keep.len(),
            columns: keep.iter().map(|j| self.columns[*j].clone()).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        rank_of(&self.columns)
    }

    /// Rank and a basis of the null space `{x : Mx = 0}`.
    pub fn kernel_and_image(&self) -> KernelImage {
        let rows = self.transpose().columns;
        let (rank, kernel) = null_space(&rows, self.cols);
        KernelImage { rank, kernel }
    }
}

impl fmt::Display for SparseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| rational::render(&self.get(i, j))).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub fn add_into(v: &mut SparseVec, i: usize, x: Rational) {
    if x.is_zero() {
        return;
    }
    match v.entry(i) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(x);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            *e.get_mut() += x;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

/// Dimension of the span of the given vectors.
pub fn rank_of(vectors: &[SparseVec]) -> usize {
    let ints: Vec<Vec<(usize, BigInt)>> = vectors.iter().map(integerize).collect();
    if let Some(small) = ints.iter().map(|v| to_small(v)).collect::<Option<Vec<_>>>() {
        if let Some(e) = Echelon::<i128>::build(small) {
            return e.pivots.len();
        }
    }
    Echelon::<BigInt>::build(ints).expect("bigint elimination cannot overflow").pivots.len()
}

/// `dim ker(d_out) − rank(d_in)`, the cohomology at the spot between them.
pub fn subquotient_dim(d_in: &SparseMatrix, d_out: &SparseMatrix) -> Result<usize, KernelError> {
    if d_in.rows() != d_out.cols() {
        return Err(KernelError::Shape(format!(
            "incoming map lands in dimension {} but outgoing map starts at {}",
            d_in.rows(),
            d_out.cols()
        )));
    }
    for (j, c) in d_in.columns.iter().enumerate() {
        let img = d_out.mul_vec(c);
        if let Some((i, v)) = img.iter().next() {
            return Err(KernelError::NotAComplex { column: j, entry: format!("row {i} = {}", rational::render(v)) });
        }
    }
    let ker = d_out.cols() - d_out.rank();
    let im = d_in.rank();
    Ok(ker - im)
}

fn integerize(v: &SparseVec) -> Vec<(usize, BigInt)> {
    let mut l = BigInt::one();
    for x in v.values() {
        l = l.lcm(x.denom());
    }
    v.iter().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (*i, x.numer() * (&l / x.denom()))).collect()
}

fn to_small(v: &[(usize, BigInt)]) -> Option<Vec<(usize, i128)>> {
    v.iter().map(|(i, x)| x.to_i128().map(|y| (*i, y))).collect()
}

trait Scalar: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    /// `a*x − b*y`, `None` on overflow.
    fn cross(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self>;
    fn gcd(&self, other: &Self) -> Self;
    fn div_exact(&self, g: &Self) -> Self;
    fn is_one_abs(&self) -> bool;
    fn negative(&self) -> bool;
    fn negate(&self) -> Self;
    fn to_big(&self) -> BigInt;
}

impl Scalar for i128 {
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn cross(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        a.checked_mul(*x)?.checked_sub(b.checked_mul(*y)?)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, g: &Self) -> Self {
        self / g
    }
    fn is_one_abs(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn negative(&self) -> bool {
        *self < 0
    }
    fn negate(&self) -> Self {
        -self
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Scalar for BigInt {
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn cross(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        Some(a * x - b * y)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, g: &Self) -> Self {
        self / g
    }
    fn is_one_abs(&self) -> bool {
        self.abs().is_one()
    }
    fn negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn negate(&self) -> Self {
        -self
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

struct Echelon<S: Scalar> {
    pivots: HashMap<usize, Vec<(usize, S)>>,
}

impl<S: Scalar> Echelon<S> {
    fn build(vectors: Vec<Vec<(usize, S)>>) -> Option<Self> {
        let mut e = Echelon { pivots: HashMap::new() };
        for v in vectors {
            e.insert(v)?;
        }
        Some(e)
    }

    fn insert(&mut self, mut v: Vec<(usize, S)>) -> Option<()> {
        while let Some(lead) = v.first().map(|(i, _)| *i) {
            match self.pivots.get(&lead) {
                None => {
                    normalize(&mut v);
                    self.pivots.insert(lead, v);
                    return Some(());
                }
                Some(p) => {
                    v = eliminate(&v, p)?;
                }
            }
        }
        Some(())
    }
}

/// Cancels the leading entry of `v` against pivot `p` (same lead index).
fn eliminate<S: Scalar>(v: &[(usize, S)], p: &[(usize, S)]) -> Option<Vec<(usize, S)>> {
    let a = &p[0].1;
    let b = &v[0].1;
    let g = a.gcd(b);
    let (a, b) = (a.div_exact(&g), b.div_exact(&g));
    let mut out = Vec::with_capacity(v.len() + p.len());
    let (mut i, mut j) = (1, 1);
    while i < v.len() || j < p.len() {
        let take_v = j >= p.len() || (i < v.len() && v[i].0 < p[j].0);
        let take_p = i >= v.len() || (j < p.len() && p[j].0 < v[i].0);
        if take_v {
            let x = S::cross(&a, &v[i].1, &b, &S::zero())?;
            out.push((v[i].0, x));
            i += 1;
        } else if take_p {
            let x = S::cross(&a, &S::zero(), &b, &p[j].1)?;
            out.push((p[j].0, x));
            j += 1;
        } else {
            let x = S::cross(&a, &v[i].1, &b, &p[j].1)?;
            if !x.is_zero() {
                out.push((v[i].0, x));
            }
            i += 1;
            j += 1;
        }
    }
    normalize(&mut out);
    Some(out)
}

fn normalize<S: Scalar>(v: &mut [(usize, S)]) {
    if v.is_empty() {
        return;
    }
    let mut g = v[0].1.clone();
    for (_, x) in v.iter().skip(1) {
        if g.is_one_abs() {
            break;
        }
        g = g.gcd(x);
    }
    if v[0].1.negative() {
        g = g.negate();
    }
    if !(g.is_one_abs() && !g.negative()) {
        for (_, x) in v.iter_mut() {
            *x = x.div_exact(&g);
        }
    }
}

/// Rank and null-space basis of the matrix whose rows are `rows`.
fn null_space(rows: &[SparseVec], ncols: usize) -> (usize, Vec<SparseVec>) {
    let ints: Vec<Vec<(usize, BigInt)>> = rows.iter().map(integerize).collect();
    let pivots: HashMap<usize, Vec<(usize, BigInt)>> =
        match ints.iter().map(|v| to_small(v)).collect::<Option<Vec<_>>>().and_then(Echelon::<i128>::build) {
            Some(e) => {
                e.pivots.into_iter().map(|(k, v)| (k, v.into_iter().map(|(i, x)| (i, x.to_big())).collect())).collect()
            }
            None => Echelon::<BigInt>::build(ints).expect("bigint").pivots,
        };
    let rank = pivots.len();
    let mut leads: Vec<usize> = pivots.keys().copied().collect();
    leads.sort_unstable();
    let mut reduced: HashMap<usize, SparseVec> = HashMap::new();
    for &l in leads.iter().rev() {
        let p = &pivots[&l];
        let lead = Rational::from_integer(p[0].1.clone());
        let mut row: SparseVec = p.iter().map(|(i, x)| (*i, Rational::from_integer(x.clone()) / &lead)).collect();
        let later: Vec<usize> = row.keys().copied().filter(|i| *i != l && reduced.contains_key(i)).collect();
        for j in later {
            let f = row.get(&j).cloned().unwrap_or_else(Rational::zero);
            if f.is_zero() {
                continue;
            }
            for (k, x) in &reduced[&j] {
                add_into(&mut row, *k, -(&f * x));
            }
        }
        reduced.insert(l, row);
    }
    let mut by_free: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
    for (&l, row) in &reduced {
        for (&j, x) in row {
            if j != l {
                by_free.entry(j).or_default().push((l, x.clone()));
            }
        }
    }
    let mut kernel = Vec::new();
    for f in 0..ncols {
        if reduced.contains_key(&f) {
            continue;
        }
        let mut v = SparseVec::new();
        v.insert(f, Rational::one());
        if let Some(list) = by_free.get(&f) {
            for (l, x) in list {
                v.insert(*l, -x.clone());
            }
        }
        kernel.push(v);
    }
    (rank, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    #[test]
    fn rank_one_with_antidiagonal_kernel() {
        let m = SparseMatrix::from_dense(&[vec![1, 1], vec![1, 1]]);
        let ki = m.kernel_and_image();
        assert_eq!(ki.rank, 1);
        assert_eq!(ki.kernel.len(), 1);
        let k = &ki.kernel[0];
        assert!(m.mul_vec(k).is_empty());
        assert_eq!(k.get(&0).cloned().unwrap() + k.get(&1).cloned().unwrap(), int(0));
    }

    #[test]
    fn zero_and_identity() {
        let z = SparseMatrix::zero(2, 3);
        let ki = z.kernel_and_image();
        assert_eq!((ki.rank, ki.kernel.len()), (0, 3));
        let id = SparseMatrix::identity(3);
        let ki = id.kernel_and_image();
        assert_eq!((ki.rank, ki.kernel.len()), (3, 0));
    }

    #[test]
    fn subquotient_trivial_cases() {
        let z = SparseMatrix::zero(3, 3);
        assert_eq!(subquotient_dim(&z, &z).unwrap(), 3);
        assert_eq!(subquotient_dim(&z, &SparseMatrix::identity(3)).unwrap(), 0);
    }

    #[test]
    fn non_complex_reports_a_column() {
        let a = SparseMatrix::identity(2);
        let b = SparseMatrix::from_dense(&[vec![0, 1]]);
        match subquotient_dim(&a, &b) {
            Err(KernelError::NotAComplex { column, .. }) => assert_eq!(column, 1),
            other => panic!("expected violation, got {other:?}"),
        }
    }

    /// Inhomogeneous bar complex of a two-element group with trivial
    /// rational coefficients, built from scratch: cochains are functions on
    /// G^n, and (df)(g_1..g_{n+1}) = f(g_2..) + Σ(-1)^i f(..g_i g_{i+1}..)
    /// + (-1)^{n+1} f(g_1..g_n).
    fn bar_differential(n: usize) -> SparseMatrix {
        let mul = |a: usize, b: usize| a ^ b;
        let index = |t: &[usize]| t.iter().fold(0, |acc, x| acc * 2 + x);
        let tuples = |k: usize| -> Vec<Vec<usize>> {
            (0..1usize << k).map(|m| (0..k).map(|i| (m >> (k - 1 - i)) & 1).collect()).collect()
        };
        let mut d = SparseMatrix::zero(1 << (n + 1), 1 << n);
        for t in tuples(n + 1) {
            let row = index(&t);
            let mut terms: Vec<(Vec<usize>, i64)> = vec![(t[1..].to_vec(), 1)];
            for i in 0..n {
                let mut s = t[..i].to_vec();
                s.push(mul(t[i], t[i + 1]));
                s.extend_from_slice(&t[i + 2..]);
                terms.push((s, if i % 2 == 0 { -1 } else { 1 }));
            }
            terms.push((t[..n].to_vec(), if (n + 1).is_multiple_of(2) { 1 } else { -1 }));
            for (s, c) in terms {
                let col = index(&s);
                let cur = d.get(row, col);
                d.set(row, col, cur + int(c));
            }
        }
        d
    }

    #[test]
    fn bar_complex_of_order_two_group() {
        let d0 = bar_differential(0);
        let d1 = bar_differential(1);
        let d2 = bar_differential(2);
        assert!(d1.mul(&d0).unwrap().is_zero());
        assert!(d2.mul(&d1).unwrap().is_zero());
        assert_eq!(subquotient_dim(&SparseMatrix::zero(1, 0), &d0).unwrap(), 1);
        assert_eq!(subquotient_dim(&d0, &d1).unwrap(), 0);
        assert_eq!(subquotient_dim(&d1, &d2).unwrap(), 0);
    }

    #[test]
    fn bigint_fallback() {
        let big = 1i64 << 62;
        let m = SparseMatrix::from_dense(&[vec![big, big - 1, 3], vec![big - 3, big, 5], vec![7, big, big]]);
        let ki = m.kernel_and_image();
        for k in &ki.kernel {
            assert!(m.mul_vec(k).is_empty());
        }
        assert_eq!(ki.rank + ki.kernel.len(), 3);
    }

    proptest! {
        #[test]
        fn rank_nullity(entries in proptest::collection::vec(-3i64..4, 30), r in 1usize..6, c in 1usize..6) {
            let rows: Vec<Vec<i64>> = (0..r).map(|i| (0..c).map(|j| entries[(i * c + j) % 30]).collect()).collect();
            let m = SparseMatrix::from_dense(&rows);
            let ki = m.kernel_and_image();
            prop_assert_eq!(ki.rank + ki.kernel.len(), c);
            prop_assert_eq!(ki.rank, m.transpose().rank());
            for k in &ki.kernel {
                prop_assert!(m.mul_vec(k).is_empty());
            }
            prop_assert_eq!(rank_of(&ki.kernel), ki.kernel.len());
        }
    }
}
