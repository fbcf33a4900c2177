//! Partial actions of a finite group on a multi-matrix algebra.
//!
//! A *-isomorphism between block ideals is a dimension-preserving bijection
//! of blocks together with a unitary per target block. For each group
//! element `g` we store the domain `S_{g⁻¹}` (the blocks of `D_{g⁻¹}`), the
//! image block of each domain block, and the unitary `U_{g,j}` with
//!
//! ```text
//! α_g(a)_j = U_{g,j} · a_{b_g⁻¹(j)} · U_{g,j}*      for j ∈ S_g
//! ```
//!
//! The range of `α_g`, `S_g`, must coincide with the domain stored for `g⁻¹`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::algebra::{AlgebraElement, BlockShape, Ideal, TracialState};
use crate::group::FiniteGroup;
use crate::linalg::{self, CMatrix};
use crate::{Error, Result};

/// Data of one ideal isomorphism `α_g: D_{g⁻¹} → D_g`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialMap {
    domain: Vec<usize>,
    targets: Vec<usize>,
    unitaries: Vec<CMatrix>,
}

impl PartialMap {
    /// `targets[k]` is the image of `domain[k]`; `unitaries[k]` conjugates into that image.
    pub fn new(domain: Vec<usize>, targets: Vec<usize>, unitaries: Vec<CMatrix>) -> Result<Self> {
        if domain.len() != targets.len() || domain.len() != unitaries.len() {
            return Err(Error::InvalidAction(format!(
                "domain ({}), block map ({}) and unitaries ({}) must have equal length",
                domain.len(),
                targets.len(),
                unitaries.len()
            )));
        }
        // keep domain sorted, carrying the other two along
        let mut idx: Vec<usize> = (0..domain.len()).collect();
        idx.sort_by_key(|&k| domain[k]);
        Ok(PartialMap {
            domain: idx.iter().map(|&k| domain[k]).collect(),
            targets: idx.iter().map(|&k| targets[k]).collect(),
            unitaries: idx.iter().map(|&k| unitaries[k].clone()).collect(),
        })
    }

    pub fn empty() -> Self {
        PartialMap {
            domain: Vec::new(),
            targets: Vec::new(),
            unitaries: Vec::new(),
        }
    }

    pub fn identity(shape: &BlockShape) -> Self {
        let blocks: Vec<usize> = (0..shape.num_blocks()).collect();
        PartialMap {
            domain: blocks.clone(),
            targets: blocks,
            unitaries: shape.dims().iter().map(|&n| CMatrix::identity(n, n)).collect(),
        }
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }

    /// `(target block, unitary)` for a domain block.
    pub fn image_of(&self, block: usize) -> Option<(usize, &CMatrix)> {
        self.domain
            .binary_search(&block)
            .ok()
            .map(|k| (self.targets[k], &self.unitaries[k]))
    }

    pub fn range(&self) -> Vec<usize> {
        let mut r = self.targets.clone();
        r.sort_unstable();
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionViolation {
    /// `D_e ≠ A` or `α_e` is not the identity.
    IdentityNotTrivial { block: usize, deviation: f64 },
    NotUnitary { g: usize, block: usize, deviation: f64 },
    /// Range of `α_g` differs from the domain recorded for `g⁻¹`.
    RangeMismatch { g: usize, range: Vec<usize>, expected: Vec<usize> },
    /// `α_{g⁻¹}` is not the inverse of `α_g` on this block.
    InverseMismatch { g: usize, block: usize, deviation: f64 },
    /// `α_g∘α_h` is defined on the block but `α_{gh}` is not, or maps it elsewhere.
    CompositionDomain { g: usize, h: usize, block: usize },
    /// `α_g(α_h(x)) ≠ α_{gh}(x)` on a matrix unit of this block.
    Composition { g: usize, h: usize, block: usize, deviation: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ActionReport {
    pub valid: bool,
    pub max_deviation: f64,
    pub violations: Vec<ActionViolation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceInvarianceReport {
    pub invariant: bool,
    /// `(g, domain block, w_block, w_image)` for each mismatched weight.
    pub violations: Vec<(usize, usize, f64, f64)>,
    /// Max `|τ(α_g(x)) − τ(x)|` over matrix units of every domain.
    pub numeric_deviation: f64,
}

/// Result of restricting a global action to an ideal.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub action: PartialAction,
    /// Block indices of the ambient algebra kept in the restricted algebra, in order.
    pub blocks: Vec<usize>,
    /// Whether the orbit of the ideal covers every block (`B = Σ η_g(A)`).
    pub globalizes: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartialAction {
    group: FiniteGroup,
    shape: BlockShape,
    maps: Vec<PartialMap>,
}

impl PartialAction {
    /// Structural checks only (indices in range, block maps injective and
    /// dimension-preserving, unitary sizes); the axioms are checked by
    /// [`validate`](Self::validate).
    pub fn new(group: FiniteGroup, shape: BlockShape, maps: Vec<PartialMap>) -> Result<Self> {
        if maps.len() != group.order() {
            return Err(Error::InvalidAction(format!(
                "expected {} maps, found {}",
                group.order(),
                maps.len()
            )));
        }
        let k = shape.num_blocks();
        for (g, map) in maps.iter().enumerate() {
            let dom: BTreeSet<_> = map.domain.iter().collect();
            let tgt: BTreeSet<_> = map.targets.iter().collect();
            if dom.len() != map.domain.len() || tgt.len() != map.targets.len() {
                return Err(Error::InvalidAction(format!("map {g} repeats a block")));
            }
            for ((&i, &j), u) in map.domain.iter().zip(&map.targets).zip(&map.unitaries) {
                if i >= k || j >= k {
                    return Err(Error::InvalidAction(format!("map {g} references a block out of range")));
                }
                if shape.dim(i) != shape.dim(j) {
                    return Err(Error::InvalidAction(format!(
                        "map {g} sends block {i} (dim {}) to block {j} (dim {})",
                        shape.dim(i),
                        shape.dim(j)
                    )));
                }
                if u.shape() != (shape.dim(j), shape.dim(j)) {
                    return Err(Error::InvalidAction(format!(
                        "map {g}: unitary for block {j} has wrong size"
                    )));
                }
            }
        }
        Ok(PartialAction { group, shape, maps })
    }

    /// The trivial global action: every `α_g` is the identity of `A`.
    pub fn trivial(group: FiniteGroup, shape: BlockShape) -> Self {
        let maps = vec![PartialMap::identity(&shape); group.order()];
        PartialAction { group, shape, maps }
    }

    /// Global action permuting blocks: `perms[g][i]` is the image block of `i`,
    /// with unitaries `unitaries[g][i]` into that image (identity if `None`).
    pub fn global(
        group: FiniteGroup,
        shape: BlockShape,
        perms: Vec<Vec<usize>>,
        unitaries: Option<Vec<Vec<CMatrix>>>,
    ) -> Result<Self> {
        let k = shape.num_blocks();
        let maps = perms
            .iter()
            .enumerate()
            .map(|(g, p)| {
                let us = match &unitaries {
                    Some(u) => u[g].clone(),
                    None => p.iter().map(|&j| CMatrix::identity(shape.dim(j), shape.dim(j))).collect(),
                };
                PartialMap::new((0..k).collect(), p.clone(), us)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, shape, maps)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn shape(&self) -> &BlockShape {
        &self.shape
    }

    pub fn map(&self, g: usize) -> &PartialMap {
        &self.maps[g]
    }

    pub fn maps(&self) -> &[PartialMap] {
        &self.maps
    }

    /// `S_{g⁻¹}`, the domain blocks of `α_g`.
    pub fn domain_blocks(&self, g: usize) -> &[usize] {
        &self.maps[g].domain
    }

    /// `S_g`, the blocks of `D_g` (the domain of `α_{g⁻¹}`).
    pub fn ideal_blocks(&self, g: usize) -> &[usize] {
        &self.maps[self.group.inv(g)].domain
    }

    /// `D_g`.
    pub fn ideal(&self, g: usize) -> Ideal {
        Ideal::new(&self.shape, self.ideal_blocks(g).to_vec()).expect("blocks in range")
    }

    /// `1_g`, the unit of `D_g`.
    pub fn unit(&self, g: usize) -> AlgebraElement {
        self.ideal(g).unit()
    }

    pub fn is_global(&self) -> bool {
        self.maps.iter().all(|m| m.domain.len() == self.shape.num_blocks())
    }

    /// `α_g(a)` for `a ∈ D_{g⁻¹}`.
    pub fn apply(&self, g: usize, a: &AlgebraElement, tol: f64) -> Result<AlgebraElement> {
        if a.shape() != &self.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape.dims().to_vec(),
                found: a.shape().dims().to_vec(),
            });
        }
        let dom = self.ideal(self.group.inv(g));
        let bad = dom.violations(a, tol * (1.0 + a.max_abs()));
        if !bad.is_empty() {
            return Err(Error::DomainViolation { g, blocks: bad });
        }
        Ok(self.apply_cut(g, a))
    }

    /// `α_g(1_{g⁻¹}·a)`: blocks of `a` outside the domain are ignored.
    pub fn apply_cut(&self, g: usize, a: &AlgebraElement) -> AlgebraElement {
        let map = &self.maps[g];
        let mut out = AlgebraElement::zero(&self.shape);
        for ((&i, &j), u) in map.domain.iter().zip(&map.targets).zip(&map.unitaries) {
            *out.block_mut(j) = u * a.block(i) * u.adjoint();
        }
        out
    }

    /// Checks the partial-action axioms on matrix-unit bases:
    /// `D_e = A` and `α_e = id`; unitarity; `range(α_g) = D_g`; `α_{g⁻¹} = α_g⁻¹`;
    /// and `α_g(α_h(x)) = α_{gh}(x)` for `x` in the domain of the composition.
    pub fn validate(&self, tol: f64) -> ActionReport {
        let mut violations = Vec::new();
        let mut max_dev: f64 = 0.0;
        let grp = &self.group;
        let e = grp.identity();
        let k = self.shape.num_blocks();

        let id_map = &self.maps[e];
        for b in 0..k {
            match id_map.image_of(b) {
                Some((j, u)) if j == b => {
                    let n = self.shape.dim(b);
                    let mut dev: f64 = 0.0;
                    for x in matrix_units_of_block(n) {
                        dev = dev.max(linalg::max_abs_diff(&(u * &x * u.adjoint()), &x));
                    }
                    max_dev = max_dev.max(dev);
                    if dev > tol {
                        violations.push(ActionViolation::IdentityNotTrivial { block: b, deviation: dev });
                    }
                }
                _ => violations.push(ActionViolation::IdentityNotTrivial {
                    block: b,
                    deviation: f64::INFINITY,
                }),
            }
        }

        for g in grp.elements() {
            let map = &self.maps[g];
            for (&j, u) in map.targets.iter().zip(&map.unitaries) {
                let dev = linalg::unitary_deviation(u);
                max_dev = max_dev.max(dev);
                if dev > tol {
                    violations.push(ActionViolation::NotUnitary { g, block: j, deviation: dev });
                }
            }
            let range = map.range();
            let expected = self.maps[grp.inv(g)].domain.clone();
            if range != expected {
                violations.push(ActionViolation::RangeMismatch { g, range, expected });
            }
        }

        // inverse consistency: α_{g⁻¹}(α_g(x)) = x on every domain block
        for g in grp.elements() {
            let inv = &self.maps[grp.inv(g)];
            let map = &self.maps[g];
            for ((&i, &j), u) in map.domain.iter().zip(&map.targets).zip(&map.unitaries) {
                match inv.image_of(j) {
                    Some((back, v)) if back == i => {
                        let dev = conjugation_deviation(&(v * u), self.shape.dim(i));
                        max_dev = max_dev.max(dev);
                        if dev > tol {
                            violations.push(ActionViolation::InverseMismatch { g, block: i, deviation: dev });
                        }
                    }
                    _ => violations.push(ActionViolation::InverseMismatch {
                        g,
                        block: i,
                        deviation: f64::INFINITY,
                    }),
                }
            }
        }

        // composition α_g∘α_h ⊆ α_gh on α_h⁻¹(D_{g⁻¹})
        for g in grp.elements() {
            for h in grp.elements() {
                let gh = grp.mul(g, h);
                let (mg, mh, mgh) = (&self.maps[g], &self.maps[h], &self.maps[gh]);
                for ((&i, &j), uh) in mh.domain.iter().zip(&mh.targets).zip(&mh.unitaries) {
                    let Some((l, ug)) = mg.image_of(j) else { continue };
                    match mgh.image_of(i) {
                        Some((l2, ugh)) if l2 == l => {
                            let n = self.shape.dim(i);
                            let composite = ug * uh;
                            let mut dev: f64 = 0.0;
                            for x in matrix_units_of_block(n) {
                                let lhs = &composite * &x * composite.adjoint();
                                let rhs = ugh * &x * ugh.adjoint();
                                dev = dev.max(linalg::max_abs_diff(&lhs, &rhs));
                            }
                            max_dev = max_dev.max(dev);
                            if dev > tol {
                                violations.push(ActionViolation::Composition { g, h, block: i, deviation: dev });
                            }
                        }
                        _ => violations.push(ActionViolation::CompositionDomain { g, h, block: i }),
                    }
                }
            }
        }

        ActionReport {
            valid: violations.is_empty(),
            max_deviation: max_dev,
            violations,
        }
    }

    /// `τ(α_g(a)) = τ(a)` for all `a ∈ D_{g⁻¹}`: equivalent to `w_{b_g(i)} = w_i` on
    /// every domain block, and also measured on matrix units.
    pub fn check_invariant_trace(&self, trace: &TracialState, tol: f64) -> TraceInvarianceReport {
        let mut violations = Vec::new();
        let mut numeric: f64 = 0.0;
        for g in self.group.elements() {
            let map = &self.maps[g];
            for (&i, &j) in map.domain.iter().zip(&map.targets) {
                let (wi, wj) = (trace.weight(i), trace.weight(j));
                if (wi - wj).abs() > tol {
                    violations.push((g, i, wi, wj));
                }
            }
            for x in self.ideal(self.group.inv(g)).matrix_units() {
                let lhs = trace.eval_unchecked(&self.apply_cut(g, &x));
                let rhs = trace.eval_unchecked(&x);
                numeric = numeric.max((lhs - rhs).norm());
            }
        }
        TraceInvarianceReport {
            invariant: violations.is_empty() && numeric <= tol,
            violations,
            numeric_deviation: numeric,
        }
    }

    /// Restriction of a global action on `B` to the ideal spanned by `blocks`:
    /// `D_g = η_g(A) ∩ A`, `α_g = η_g|_{D_{g⁻¹}}`.
    pub fn restrict_global(global: &PartialAction, blocks: &[usize]) -> Result<Restriction> {
        if !global.is_global() {
            return Err(Error::InvalidAction("restriction needs a global action".into()));
        }
        let kept: Vec<usize> = blocks.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if kept.is_empty() || kept.iter().any(|&b| b >= global.shape.num_blocks()) {
            return Err(Error::InvalidAction("ideal blocks empty or out of range".into()));
        }
        let new_index: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(k, &b)| (b, k)).collect();
        let shape = BlockShape::new(kept.iter().map(|&b| global.shape.dim(b)).collect())?;
        let mut covered = BTreeSet::new();
        let mut maps = Vec::with_capacity(global.group.order());
        for g in global.group.elements() {
            let gm = &global.maps[g];
            let (mut dom, mut tgt, mut us) = (Vec::new(), Vec::new(), Vec::new());
            for &b in &kept {
                let (j, u) = gm.image_of(b).expect("global map is total");
                covered.insert(j);
                if let Some(&nj) = new_index.get(&j) {
                    dom.push(new_index[&b]);
                    tgt.push(nj);
                    us.push(u.clone());
                }
            }
            maps.push(PartialMap::new(dom, tgt, us)?);
        }
        let action = PartialAction::new(global.group.clone(), shape, maps)?;
        Ok(Restriction {
            action,
            blocks: kept,
            globalizes: covered.len() == global.shape.num_blocks(),
        })
    }

    /// Connected components of blocks under the block maps.
    pub fn block_orbits(&self) -> Vec<usize> {
        let k = self.shape.num_blocks();
        let mut label: Vec<usize> = (0..k).collect();
        fn find(l: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while l[r] != r {
                r = l[r];
            }
            l[x] = r;
            r
        }
        for map in &self.maps {
            for (&i, &j) in map.domain.iter().zip(&map.targets) {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
        (0..k).map(|x| find(&mut label, x)).collect()
    }

    /// Replace one unitary (negative controls in tests and the CLI).
    pub fn with_unitary(&self, g: usize, slot: usize, u: CMatrix) -> Self {
        let mut out = self.clone();
        out.maps[g].unitaries[slot] = u;
        out
    }
}

fn matrix_units_of_block(n: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut m = CMatrix::zeros(n, n);
            m[(i, j)] = linalg::ONE;
            out.push(m);
        }
    }
    out
}

/// Max deviation of `x ↦ w x w*` from the identity on matrix units.
fn conjugation_deviation(w: &CMatrix, n: usize) -> f64 {
    matrix_units_of_block(n)
        .iter()
        .map(|x| linalg::max_abs_diff(&(w * x * w.adjoint()), x))
        .fold(0.0, f64::max)
}

/// The W1 system: `ℤ₂` acting on `ℂ ⊕ ℂ` with `D_g` the second summand and `α_g` the identity there.
pub fn w1() -> PartialAction {
    let shape = BlockShape::new(vec![1, 1]).expect("valid");
    let maps = vec![
        PartialMap::identity(&shape),
        PartialMap::new(vec![1], vec![1], vec![CMatrix::identity(1, 1)]).expect("valid"),
    ];
    PartialAction::new(FiniteGroup::cyclic(2), shape, maps).expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_matrix, random_unitary, real, C64, DEFAULT_TOL, ZERO};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_element_acts_trivially() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let alpha = w1();
        let a = AlgebraElement::from_blocks(
            alpha.shape(),
            vec![random_matrix(&mut rng, 1, 1), random_matrix(&mut rng, 1, 1)],
        )
        .unwrap();
        assert_eq!(alpha.apply(0, &a, DEFAULT_TOL).unwrap(), a);
    }

    #[test]
    fn units_map_to_units() {
        let alpha = w1();
        let out = alpha.apply(1, &alpha.unit(1), DEFAULT_TOL).unwrap();
        assert_eq!(out, alpha.unit(1));
    }

    #[test]
    fn w1_acts_as_identity_on_second_block() {
        let alpha = w1();
        let c = C64::new(0.3, 0.7);
        let a = AlgebraElement::central(alpha.shape(), &[ZERO, c]).unwrap();
        assert_eq!(alpha.apply(1, &a, DEFAULT_TOL).unwrap(), a);
        let bad = AlgebraElement::identity(alpha.shape());
        assert!(matches!(
            alpha.apply(1, &bad, DEFAULT_TOL),
            Err(Error::DomainViolation { g: 1, ref blocks }) if blocks == &vec![0]
        ));
    }

    #[test]
    fn w1_is_valid_and_corruption_is_detected() {
        assert!(w1().validate(DEFAULT_TOL).valid);
        let bad = w1().with_unitary(1, 0, CMatrix::from_element(1, 1, real(2.0)));
        let report = bad.validate(DEFAULT_TOL);
        assert!(!report.valid);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, ActionViolation::NotUnitary { g: 1, block: 1, .. })));
    }

    #[test]
    fn global_actions_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // Z3 cycling three 2x2 blocks with coboundary unitaries V_{g·x} V_x*
        let g = FiniteGroup::cyclic(3);
        let shape = BlockShape::new(vec![2, 2, 2]).unwrap();
        let v: Vec<CMatrix> = (0..3).map(|_| random_unitary(&mut rng, 2)).collect();
        let perms: Vec<Vec<usize>> = (0..3).map(|s| (0..3).map(|x| (x + s) % 3).collect()).collect();
        let us = perms
            .iter()
            .map(|p| (0..3).map(|x| &v[p[x]] * v[x].adjoint()).collect())
            .collect();
        let alpha = PartialAction::global(g, shape, perms, Some(us)).unwrap();
        let report = alpha.validate(DEFAULT_TOL);
        assert!(report.valid, "{:?}", report.violations);
    }

    #[test]
    fn broken_composition_is_detected() {
        // Z3 cycling three blocks, with an extra twist on one generator only
        let g = FiniteGroup::cyclic(3);
        let shape = BlockShape::new(vec![2, 2, 2]).unwrap();
        let perms: Vec<Vec<usize>> = (0..3).map(|s| (0..3).map(|x| (x + s) % 3).collect()).collect();
        let alpha = PartialAction::global(g, shape, perms, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bad = alpha.with_unitary(1, 0, random_unitary(&mut rng, 2));
        let report = bad.validate(DEFAULT_TOL);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, ActionViolation::Composition { .. } | ActionViolation::InverseMismatch { .. })));
    }

    fn z3_cycle() -> PartialAction {
        let shape = BlockShape::new(vec![1, 1, 1]).unwrap();
        let perms = (0..3).map(|s| (0..3).map(|x| (x + s) % 3).collect()).collect();
        PartialAction::global(FiniteGroup::cyclic(3), shape, perms, None).unwrap()
    }

    #[test]
    fn restriction_of_whole_algebra_is_global_action() {
        let g = z3_cycle();
        let r = PartialAction::restrict_global(&g, &[0, 1, 2]).unwrap();
        assert_eq!(r.action, g);
        assert!(r.globalizes);
    }

    #[test]
    fn restriction_to_one_block_of_z3_cycle() {
        let r = PartialAction::restrict_global(&z3_cycle(), &[0]).unwrap();
        let a = &r.action;
        assert_eq!(a.ideal_blocks(0), &[0]);
        assert!(a.ideal_blocks(1).is_empty());
        assert!(a.ideal_blocks(2).is_empty());
        assert!(r.globalizes);
        assert!(a.validate(DEFAULT_TOL).valid);
    }

    #[test]
    fn restriction_of_z2_swap() {
        let shape = BlockShape::new(vec![1, 1]).unwrap();
        let swap = PartialAction::global(FiniteGroup::cyclic(2), shape, vec![vec![0, 1], vec![1, 0]], None).unwrap();
        let r = PartialAction::restrict_global(&swap, &[0]).unwrap();
        assert!(r.action.ideal_blocks(1).is_empty());
        assert!(r.action.validate(DEFAULT_TOL).valid);
    }

    #[test]
    fn restriction_of_z3_to_two_blocks_is_proper() {
        let r = PartialAction::restrict_global(&z3_cycle(), &[0, 1]).unwrap();
        let a = &r.action;
        assert_eq!(a.ideal_blocks(1), &[1]);
        assert_eq!(a.ideal_blocks(2), &[0]);
        assert!(a.validate(DEFAULT_TOL).valid);
    }

    #[test]
    fn invariant_trace_examples() {
        let alpha = w1();
        let shape = alpha.shape().clone();
        assert!(alpha.check_invariant_trace(&TracialState::new(&shape, vec![0.5, 0.5]).unwrap(), DEFAULT_TOL).invariant);

        let swap = PartialAction::global(FiniteGroup::cyclic(2), shape.clone(), vec![vec![0, 1], vec![1, 0]], None).unwrap();
        let tau = TracialState::new(&shape, vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let report = swap.check_invariant_trace(&tau, DEFAULT_TOL);
        assert!(!report.invariant);
        assert!(!report.violations.is_empty());

        let s = BlockShape::new(vec![2, 1]).unwrap();
        let triv = PartialAction::trivial(FiniteGroup::cyclic(4), s.clone());
        let tau = TracialState::normalized(&s, vec![0.3, 0.9]).unwrap();
        assert!(triv.check_invariant_trace(&tau, DEFAULT_TOL).invariant);
    }

    #[test]
    fn apply_is_a_star_isomorphism_on_its_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let shape = BlockShape::new(vec![2, 2, 1]).unwrap();
        let u = random_unitary(&mut rng, 2);
        let maps = vec![
            PartialMap::identity(&shape),
            PartialMap::new(vec![0, 1], vec![1, 0], vec![u.clone(), u.adjoint()]).unwrap(),
        ];
        let alpha = PartialAction::new(FiniteGroup::cyclic(2), shape.clone(), maps).unwrap();
        assert!(alpha.validate(DEFAULT_TOL).valid, "{:?}", alpha.validate(DEFAULT_TOL).violations);
        let dom = alpha.ideal(1);
        for _ in 0..10 {
            let rand_el = |rng: &mut ChaCha8Rng| {
                let b = shape.dims().iter().map(|&n| random_matrix(rng, n, n)).collect();
                dom.cut(&AlgebraElement::from_blocks(&shape, b).unwrap())
            };
            let (a, b) = (rand_el(&mut rng), rand_el(&mut rng));
            let fa = alpha.apply(1, &a, DEFAULT_TOL).unwrap();
            let fb = alpha.apply(1, &b, DEFAULT_TOL).unwrap();
            let fab = alpha.apply(1, &(&a * &b), DEFAULT_TOL).unwrap();
            assert!(fab.max_abs_diff(&(&fa * &fb)) < 1e-9);
            assert!(alpha.apply(1, &a.adjoint(), DEFAULT_TOL).unwrap().max_abs_diff(&fa.adjoint()) < 1e-9);
            assert!((fa.operator_norm() - a.operator_norm()).abs() < 1e-9);
            assert!(alpha.apply(1, &fa, DEFAULT_TOL).unwrap().max_abs_diff(&a) < 1e-9);
        }
    }
}
