//! Finite groups given by Cayley tables, and scalar positive-definite
//! functions on them.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::linalg::{self, CMatrix, PsdCertificate, C64};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupViolation {
    Empty,
    NotSquare { row: usize },
    OutOfRange { row: usize, col: usize },
    RowNotPermutation { row: usize },
    ColumnNotPermutation { col: usize },
    NoIdentity,
    MissingInverse { element: usize },
    NotAssociative { a: usize, b: usize, c: usize },
}

/// A finite group on the elements `0..order` with multiplication table `table[a][b] = ab`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Validates a Cayley table, collecting every violated axiom.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let m = table.len();
        let mut violations = Vec::new();
        if m == 0 {
            return Err(Error::InvalidGroup(vec![GroupViolation::Empty]));
        }
        for (r, row) in table.iter().enumerate() {
            if row.len() != m {
                violations.push(GroupViolation::NotSquare { row: r });
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidGroup(violations));
        }
        for (r, row) in table.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                if x >= m {
                    violations.push(GroupViolation::OutOfRange { row: r, col: c });
                }
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidGroup(violations));
        }
        for (r, row) in table.iter().enumerate() {
            if row.iter().collect::<BTreeSet<_>>().len() != m {
                violations.push(GroupViolation::RowNotPermutation { row: r });
            }
        }
        for c in 0..m {
            if (0..m).map(|r| table[r][c]).collect::<BTreeSet<_>>().len() != m {
                violations.push(GroupViolation::ColumnNotPermutation { col: c });
            }
        }
        let identity = (0..m).find(|&e| (0..m).all(|x| table[e][x] == x && table[x][e] == x));
        let mut inverses = vec![usize::MAX; m];
        match identity {
            None => violations.push(GroupViolation::NoIdentity),
            Some(e) => {
                for (x, inv) in inverses.iter_mut().enumerate() {
                    match (0..m).find(|&y| table[x][y] == e && table[y][x] == e) {
                        Some(y) => *inv = y,
                        None => violations.push(GroupViolation::MissingInverse { element: x }),
                    }
                }
            }
        }
        'assoc: for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        violations.push(GroupViolation::NotAssociative { a, b, c });
                        break 'assoc;
                    }
                }
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidGroup(violations));
        }
        Ok(FiniteGroup {
            table,
            identity: identity.expect("checked"),
            inverses,
        })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// `ℤ/n` with element `k` the residue `k`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1, "cyclic group needs n >= 1");
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(table).expect("cyclic table is a group")
    }

    /// The group generated by permutations of `{0..degree}` (each given as an image list),
    /// enumerated breadth-first from the identity. Composition is `(στ)(x) = σ(τ(x))`.
    pub fn from_permutation_generators(degree: usize, generators: &[Vec<usize>]) -> Result<Self> {
        for g in generators {
            let set: BTreeSet<_> = g.iter().copied().collect();
            if g.len() != degree || set.len() != degree || set.iter().any(|&x| x >= degree) {
                return Err(Error::InvalidGroup(vec![GroupViolation::OutOfRange { row: 0, col: 0 }]));
            }
        }
        let id: Vec<usize> = (0..degree).collect();
        let mut elements = vec![id.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(id, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(k) = queue.pop_front() {
            for g in generators {
                let p = compose(g, &elements[k]);
                if !index.contains_key(&p) {
                    index.insert(p.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(p);
                }
            }
        }
        let table = elements
            .iter()
            .map(|a| elements.iter().map(|b| index[&compose(a, b)]).collect())
            .collect();
        Self::from_table(table)
    }

    /// Symmetric group on `n ≤ 4` letters, generated by a transposition and an n-cycle.
    pub fn symmetric(n: usize) -> Result<Self> {
        if !(1..=4).contains(&n) {
            return Err(Error::InvalidGroup(vec![GroupViolation::Empty]));
        }
        if n == 1 {
            return Ok(Self::trivial());
        }
        let mut swap: Vec<usize> = (0..n).collect();
        swap.swap(0, 1);
        let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        Self::from_permutation_generators(n, &[swap, cycle])
    }

    /// Dihedral group of order `2n` acting on an n-gon.
    pub fn dihedral(n: usize) -> Result<Self> {
        let rot: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let refl: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
        Self::from_permutation_generators(n, &[rot, refl])
    }

    pub fn direct_product(a: &Self, b: &Self) -> Self {
        let (m, k) = (a.order(), b.order());
        let table = (0..m * k)
            .map(|x| {
                (0..m * k)
                    .map(|y| a.mul(x / k, y / k) * k + b.mul(x % k, y % k))
                    .collect()
            })
            .collect();
        Self::from_table(table).expect("product of groups is a group")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Subgroup generated by `gens`, as a sorted element list.
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut set = BTreeSet::from([self.identity]);
        let mut queue: VecDeque<usize> = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        set.into_iter().collect()
    }

    /// All subgroups generated by at most two elements (every subgroup for orders ≤ 8).
    pub fn subgroups(&self) -> Vec<Vec<usize>> {
        let mut found = BTreeSet::new();
        for a in self.elements() {
            for b in self.elements() {
                found.insert(self.generated_subgroup(&[a, b]));
            }
        }
        found.into_iter().collect()
    }

    /// Left regular representation `λ_g e_x = e_{gx}` as a permutation matrix.
    pub fn left_regular_matrix(&self, g: usize) -> CMatrix {
        let m = self.order();
        let mut p = CMatrix::zeros(m, m);
        for x in 0..m {
            p[(self.mul(g, x), x)] = linalg::ONE;
        }
        p
    }
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&x| a[x]).collect()
}

/// A scalar function `η: G → ℂ`, to be tested for positive definiteness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarPDFunction {
    values: Vec<C64>,
}

impl ScalarPDFunction {
    pub fn new(group: &FiniteGroup, values: Vec<C64>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::Dimension(format!(
                "function needs {} values, found {}",
                group.order(),
                values.len()
            )));
        }
        Ok(ScalarPDFunction { values })
    }

    pub fn constant_one(group: &FiniteGroup) -> Self {
        ScalarPDFunction {
            values: vec![linalg::ONE; group.order()],
        }
    }

    /// `δ_e`.
    pub fn delta_identity(group: &FiniteGroup) -> Self {
        let mut values = vec![linalg::ZERO; group.order()];
        values[group.identity()] = linalg::ONE;
        ScalarPDFunction { values }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn value(&self, g: usize) -> C64 {
        self.values[g]
    }

    /// `M_{ij} = η(g_j⁻¹ g_i)` over the full group.
    pub fn gram_matrix(&self, group: &FiniteGroup) -> CMatrix {
        let m = group.order();
        CMatrix::from_fn(m, m, |i, j| self.values[group.mul(group.inv(j), i)])
    }

    /// PSD test of the full Gram matrix. For a finite group this decides positive
    /// definiteness on every tuple: any tuple's matrix is a principal submatrix of
    /// the full one with rows and columns duplicated.
    pub fn is_positive_definite(&self, group: &FiniteGroup, tol: f64) -> PsdCertificate {
        linalg::psd_check(&self.gram_matrix(group), tol)
    }

    /// Elements with `|η(g)| ≥ ε`.
    pub fn epsilon_support(&self, eps: f64) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&g| self.values[g].norm() >= eps)
            .collect()
    }

    pub fn pointwise_product(&self, other: &Self) -> Self {
        ScalarPDFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real, DEFAULT_TOL};

    #[test]
    fn cyclic_two_is_valid() {
        let g = FiniteGroup::from_table(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(g.identity(), 0);
        assert_eq!(g.inv(1), 1);
    }

    #[test]
    fn corrupted_cell_breaks_latin_square() {
        let mut t = FiniteGroup::cyclic(3).table().to_vec();
        t[1][2] = 1;
        let err = FiniteGroup::from_table(t).unwrap_err();
        match err {
            Error::InvalidGroup(v) => assert!(v
                .iter()
                .any(|x| matches!(x, GroupViolation::RowNotPermutation { row: 1 }))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_associative_latin_square_is_rejected() {
        // A Latin square with identity 0 that is not a group (order-5 loop).
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let err = FiniteGroup::from_table(t).unwrap_err();
        match err {
            Error::InvalidGroup(v) => assert!(v
                .iter()
                .any(|x| matches!(x, GroupViolation::NotAssociative { .. }))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn symmetric_three_from_generators() {
        // Brute-force oracle: count all permutations of three letters.
        let s3 = FiniteGroup::from_permutation_generators(3, &[vec![1, 0, 2], vec![1, 2, 0]]).unwrap();
        assert_eq!(s3.order(), 6);
        let non_commuting = (0..6)
            .flat_map(|a| (0..6).map(move |b| (a, b)))
            .filter(|&(a, b)| s3.mul(a, b) != s3.mul(b, a))
            .count();
        assert!(non_commuting > 0);
        assert_eq!(FiniteGroup::symmetric(4).unwrap().order(), 24);
        assert_eq!(FiniteGroup::dihedral(4).unwrap().order(), 8);
    }

    #[test]
    fn subgroups_of_s3() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let orders: Vec<usize> = s3.subgroups().iter().map(|h| h.len()).collect();
        // trivial, three of order 2, one of order 3, whole group
        assert_eq!(orders.len(), 6);
        assert_eq!(orders.iter().filter(|&&k| k == 2).count(), 3);
    }

    #[test]
    fn z2_positive_definiteness_threshold() {
        let g = FiniteGroup::cyclic(2);
        let pd = |t: f64| {
            ScalarPDFunction::new(&g, vec![real(1.0), real(t)])
                .unwrap()
                .is_positive_definite(&g, DEFAULT_TOL)
        };
        assert!(pd(0.5).pass);
        let bad = pd(1.5);
        assert!(!bad.pass);
        assert!((bad.min_eigenvalue + 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_and_delta_are_pd() {
        for g in [FiniteGroup::cyclic(5), FiniteGroup::symmetric(3).unwrap()] {
            assert!(ScalarPDFunction::constant_one(&g).is_positive_definite(&g, DEFAULT_TOL).pass);
            assert!(ScalarPDFunction::delta_identity(&g).is_positive_definite(&g, DEFAULT_TOL).pass);
        }
    }

    #[test]
    fn epsilon_support_examples() {
        let g = FiniteGroup::cyclic(4);
        assert_eq!(ScalarPDFunction::constant_one(&g).epsilon_support(0.5), vec![0, 1, 2, 3]);
        assert_eq!(ScalarPDFunction::delta_identity(&g).epsilon_support(0.5), vec![0]);
        let z2 = FiniteGroup::cyclic(2);
        let eta = ScalarPDFunction::new(&z2, vec![real(1.0), real(0.1)]).unwrap();
        assert_eq!(eta.epsilon_support(0.2), vec![0]);
    }
}
