//! Seeded generators for the property suites: groups, partial actions with
//! invariant faithful traces, positive-definite functions, τ-preserving UCP
//! maps and trace-compatible chains.
//!
//! Partial actions are produced as restrictions of global actions, so they
//! are valid by construction; the generator-validator loop in the tests
//! checks this.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::{AlgebraElement, BlockShape, TracialState};
use crate::crossed_product::{CrossedElement, CrossedProduct};
use crate::gns::{GnsSpace, LinearMap};
use crate::group::{FiniteGroup, ScalarPDFunction};
use crate::haagerup::CenterValuedPDFunction;
use crate::inductive_limit::{Chain, ChainStage, Embedding};
use crate::linalg::{self, random_matrix, random_unitary, real, CMatrix, CVector, C64, ONE, ZERO};
use crate::partial_action::{PartialAction, PartialMap};

/// Size limits for generated systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_group_order: usize,
    /// Bound on `Σ n_i`.
    pub max_fiber: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_group_order: 8,
            max_fiber: 6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RandomSystem {
    pub action: PartialAction,
    pub trace: TracialState,
}

/// Groups of order at most `max_order` from a fixed catalogue.
pub fn random_group<R: Rng + ?Sized>(rng: &mut R, max_order: usize) -> FiniteGroup {
    let z2 = FiniteGroup::cyclic(2);
    let mut catalogue: Vec<FiniteGroup> = (1..=max_order.min(8)).map(FiniteGroup::cyclic).collect();
    if max_order >= 4 {
        catalogue.push(FiniteGroup::direct_product(&z2, &z2));
    }
    if max_order >= 6 {
        catalogue.push(FiniteGroup::symmetric(3).expect("S3"));
    }
    if max_order >= 8 {
        catalogue.push(FiniteGroup::dihedral(4).expect("D4"));
        catalogue.push(FiniteGroup::direct_product(&z2, &FiniteGroup::cyclic(4)));
        catalogue.push(FiniteGroup::direct_product(&z2, &FiniteGroup::direct_product(&z2, &z2)));
    }
    catalogue.swap_remove(rng.gen_range(0..catalogue.len()))
}

/// Left cosets of `h` as sorted element lists, ordered by smallest element.
fn left_cosets(group: &FiniteGroup, h: &[usize]) -> Vec<Vec<usize>> {
    let mut cosets: Vec<Vec<usize>> = Vec::new();
    for g in group.elements() {
        if cosets.iter().any(|c| c.contains(&g)) {
            continue;
        }
        let mut c: Vec<usize> = h.iter().map(|&x| group.mul(g, x)).collect();
        c.sort_unstable();
        cosets.push(c);
    }
    cosets
}

/// A character of `h` when it is cyclic (trivial otherwise), as a map on elements.
fn random_character<R: Rng + ?Sized>(rng: &mut R, group: &FiniteGroup, h: &[usize]) -> Vec<(usize, C64)> {
    let m = h.len();
    let gen = h.iter().copied().find(|&x| group.element_order(x) == m);
    match gen {
        Some(x) => {
            let s = rng.gen_range(0..m) as f64;
            let mut out = Vec::with_capacity(m);
            let mut y = group.identity();
            for k in 0..m {
                let t = std::f64::consts::TAU * s * k as f64 / m as f64;
                out.push((y, C64::new(t.cos(), t.sin())));
                y = group.mul(y, x);
            }
            out
        }
        None => h.iter().map(|&x| (x, ONE)).collect(),
    }
}

/// A global action on `⊕_x M_n` over a disjoint union of coset spaces
/// `G/H`, with unitaries `V_{gx} χ(h(g,x)) V_x*`, and orbit-constant weights.
fn random_global<R: Rng + ?Sized>(
    rng: &mut R,
    group: &FiniteGroup,
    orbits: usize,
    max_block: usize,
) -> (PartialAction, Vec<f64>) {
    let subgroups = group.subgroups();
    let mut dims = Vec::new();
    let mut weights = Vec::new();
    let mut perms: Vec<Vec<usize>> = vec![Vec::new(); group.order()];
    let mut unitaries: Vec<Vec<CMatrix>> = vec![Vec::new(); group.order()];
    for _ in 0..orbits {
        let h = subgroups.choose(rng).expect("trivial subgroup exists").clone();
        let cosets = left_cosets(group, &h);
        let reps: Vec<usize> = cosets.iter().map(|c| c[0]).collect();
        let n = rng.gen_range(1..=max_block);
        let w = rng.gen_range(0.2..1.0);
        let chi = random_character(rng, group, &h);
        let v: Vec<CMatrix> = cosets.iter().map(|_| random_unitary(rng, n)).collect();
        let offset = dims.len();
        for _ in &cosets {
            dims.push(n);
            weights.push(w);
        }
        let coset_of = |x: usize| cosets.iter().position(|c| c.contains(&x)).expect("cosets partition G");
        for g in group.elements() {
            for (x, &r) in reps.iter().enumerate() {
                let y = coset_of(group.mul(g, r));
                let hx = group.mul(group.inv(reps[y]), group.mul(g, r));
                let c = chi.iter().find(|(e, _)| *e == hx).expect("h(g,x) ∈ H").1;
                perms[g].push(offset + y);
                unitaries[g].push(&v[y] * v[x].adjoint() * c);
            }
        }
    }
    let shape = BlockShape::new(dims).expect("positive block sizes");
    let action = PartialAction::global(group.clone(), shape, perms, Some(unitaries)).expect("consistent data");
    (action, weights)
}

/// Restriction of a random global action to a random set of blocks with
/// `Σ n_i ≤ max_fiber`, with a faithful invariant trace.
pub fn random_partial_action<R: Rng + ?Sized>(rng: &mut R, group: &FiniteGroup, max_fiber: usize) -> RandomSystem {
    let max_fiber = max_fiber.max(1);
    let orbits = rng.gen_range(1..=3);
    let max_block = rng.gen_range(1..=max_fiber.min(3));
    let (global, weights) = random_global(rng, group, orbits, max_block);
    let mut order: Vec<usize> = (0..global.shape().num_blocks()).collect();
    order.shuffle(rng);
    let p = rng.gen_range(0.3..1.0);
    let mut kept = Vec::new();
    let mut used = 0;
    for b in order {
        let n = global.shape().dim(b);
        if used + n <= max_fiber && (kept.is_empty() || rng.gen_bool(p)) {
            kept.push(b);
            used += n;
        }
    }
    let restriction = PartialAction::restrict_global(&global, &kept).expect("nonempty block set");
    let w: Vec<f64> = restriction.blocks.iter().map(|&b| weights[b]).collect();
    let trace = TracialState::normalized(restriction.action.shape(), w).expect("positive weights");
    RandomSystem {
        action: restriction.action,
        trace,
    }
}

pub fn random_system<R: Rng + ?Sized>(rng: &mut R, budget: Budget) -> RandomSystem {
    let group = random_group(rng, budget.max_group_order);
    random_partial_action(rng, &group, budget.max_fiber)
}

pub fn random_element<R: Rng + ?Sized>(rng: &mut R, shape: &BlockShape) -> AlgebraElement {
    let blocks = shape.dims().iter().map(|&n| random_matrix(rng, n, n)).collect();
    AlgebraElement::from_blocks(shape, blocks).expect("matching shape")
}

pub fn random_unitary_element<R: Rng + ?Sized>(rng: &mut R, shape: &BlockShape) -> AlgebraElement {
    let blocks = shape.dims().iter().map(|&n| random_unitary(rng, n)).collect();
    AlgebraElement::from_blocks(shape, blocks).expect("matching shape")
}

/// Random `Σ a_g δ_g` with `a_g ∈ D_g`.
pub fn random_crossed<R: Rng + ?Sized>(rng: &mut R, cp: &CrossedProduct) -> CrossedElement {
    let v = CVector::from_iterator(cp.dim(), random_matrix(rng, cp.dim(), 1).iter().copied());
    cp.from_coords(&v).expect("length matches")
}

fn random_probability<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen_range(f64::EPSILON..1.0f64).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// `η(g) = ⟨ξ, λ_g ξ⟩` for a random unit `ξ ∈ ℂ^G`, optionally averaged with
/// the constant function or multiplied by a second such function.
pub fn random_pd_eta<R: Rng + ?Sized>(rng: &mut R, group: &FiniteGroup) -> ScalarPDFunction {
    let coefficient = |rng: &mut R| {
        let xi = random_matrix(rng, group.order(), 1);
        let xi = &xi / real(xi.norm());
        let values = group
            .elements()
            .map(|g| {
                let lx = group.left_regular_matrix(g) * &xi;
                xi.dotc(&lx)
            })
            .collect();
        ScalarPDFunction::new(group, values).expect("one value per element")
    };
    let eta = coefficient(rng);
    match rng.gen_range(0..3) {
        0 => eta,
        1 => {
            let t = rng.gen_range(0.0..1.0);
            let vals = eta.values().iter().map(|z| z * t + (1.0 - t)).collect();
            ScalarPDFunction::new(group, vals).expect("one value per element")
        }
        _ => eta.pointwise_product(&coefficient(rng)),
    }
}

/// Positive-definite `h` with `h(e) = 1`: `η·1_g`, an orbit-wise version
/// `h(g)_b = η_{orbit(b)}(g)` on `D_g`, or a Schur product of the two.
pub fn random_pd_h<R: Rng + ?Sized>(rng: &mut R, action: &PartialAction) -> CenterValuedPDFunction {
    let scalar = |rng: &mut R| CenterValuedPDFunction::from_scalar(action, &random_pd_eta(rng, action.group()));
    let orbitwise = |rng: &mut R| {
        let labels = action.block_orbits();
        let mut per_orbit: Vec<(usize, ScalarPDFunction)> = Vec::new();
        for &l in &labels {
            if !per_orbit.iter().any(|(x, _)| *x == l) {
                per_orbit.push((l, random_pd_eta(rng, action.group())));
            }
        }
        let values = action
            .group()
            .elements()
            .map(|g| {
                let ideal = action.ideal(g);
                labels
                    .iter()
                    .enumerate()
                    .map(|(b, l)| {
                        if ideal.contains_block(b) {
                            per_orbit.iter().find(|(x, _)| x == l).expect("labelled").1.value(g)
                        } else {
                            ZERO
                        }
                    })
                    .collect()
            })
            .collect();
        CenterValuedPDFunction::new(action, values, 0.0).expect("supported on D_g")
    };
    match rng.gen_range(0..3) {
        0 => scalar(rng),
        1 => orbitwise(rng),
        _ => scalar(rng).schur_product(&orbitwise(rng)),
    }
}

/// A τ-preserving UCP map on `A`: a convex combination of `a ↦ τ(a)1`,
/// inner automorphisms, the diagonal pinching and automorphisms permuting
/// blocks of equal size and weight.
pub fn random_tau_preserving_ucp<R: Rng + ?Sized>(rng: &mut R, shape: &BlockShape, trace: &TracialState) -> LinearMap {
    let k = shape.num_blocks();
    let inner = rng.gen_range(0..=2);
    let p = random_probability(rng, 3 + inner);
    let one = AlgebraElement::identity(shape);
    let mut map = LinearMap::on_algebra(shape, |a| one.scale(trace.eval_unchecked(a))).scale(p[0]);
    map = map.add(
        &LinearMap::on_algebra(shape, |a| {
            let blocks = a
                .blocks()
                .iter()
                .map(|m| CMatrix::from_diagonal(&m.diagonal()))
                .collect();
            AlgebraElement::from_blocks(shape, blocks).expect("same shape")
        })
        .scale(p[1]),
    );
    // σ permutes blocks within classes of equal (n, w)
    let mut sigma: Vec<usize> = (0..k).collect();
    for b in 0..k {
        let class: Vec<usize> = (0..k)
            .filter(|&c| shape.dim(c) == shape.dim(b) && (trace.weight(c) - trace.weight(b)).abs() < 1e-12)
            .collect();
        if class[0] == b {
            let mut images = class.clone();
            images.shuffle(rng);
            for (&src, &dst) in class.iter().zip(&images) {
                sigma[src] = dst;
            }
        }
    }
    let u = random_unitary_element(rng, shape);
    map = map.add(
        &LinearMap::on_algebra(shape, |a| {
            let mut blocks = vec![CMatrix::zeros(0, 0); k];
            for b in 0..k {
                let ub = u.block(sigma[b]);
                blocks[sigma[b]] = ub * a.block(b) * ub.adjoint();
            }
            AlgebraElement::from_blocks(shape, blocks).expect("same shape")
        })
        .scale(p[2]),
    );
    for pk in &p[3..] {
        let u = random_unitary_element(rng, shape);
        map = map.add(&LinearMap::on_algebra(shape, |a| &(&u * a) * &u.adjoint()).scale(*pk));
    }
    map
}

/// `exp(iH)` for the hermitian part `H` of `h`.
fn exp_i_hermitian(h: &CMatrix) -> CMatrix {
    let (values, vectors) = linalg::hermitian_eigen(h);
    let phases = CVector::from_iterator(values.len(), values.iter().map(|x| C64::new(x.cos(), x.sin())));
    &vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint()
}

/// Unitary `u ∈ A` with `α_g(u·1_{g⁻¹}) = u·1_g` for every `g`: a random
/// unitary on one block per orbit, averaged over the stabilizer and
/// transported along the orbit.
pub fn equivariant_unitary<R: Rng + ?Sized>(rng: &mut R, action: &PartialAction) -> AlgebraElement {
    let shape = action.shape();
    let labels = action.block_orbits();
    let mut blocks: Vec<CMatrix> = shape.dims().iter().map(|&n| CMatrix::identity(n, n)).collect();
    for (r, &l) in labels.iter().enumerate() {
        if l != r {
            continue;
        }
        let n = shape.dim(r);
        let stabilizer: Vec<&CMatrix> = action
            .maps()
            .iter()
            .filter_map(|m| m.image_of(r).filter(|(t, _)| *t == r).map(|(_, u)| u))
            .collect();
        let h0 = linalg::hermitian_part(&random_matrix(rng, n, n));
        let mut h = CMatrix::zeros(n, n);
        for s in &stabilizer {
            h += *s * &h0 * s.adjoint();
        }
        let h = h / real(stabilizer.len() as f64);
        let w = exp_i_hermitian(&h);
        for (b, &lb) in labels.iter().enumerate() {
            if lb != l {
                continue;
            }
            let u = action
                .maps()
                .iter()
                .find_map(|m| m.image_of(r).filter(|(t, _)| *t == b).map(|(_, u)| u))
                .expect("orbits are single-step reachable");
            blocks[b] = u * &w * u.adjoint();
        }
    }
    AlgebraElement::from_blocks(shape, blocks).expect("matching shape")
}

/// `a ↦ Σ_b (tr(a_b)/n_b)·1_b`, the τ-preserving expectation onto the center.
pub fn central_expectation(shape: &BlockShape) -> LinearMap {
    LinearMap::on_algebra(shape, |a| {
        let scalars: Vec<C64> = a
            .blocks()
            .iter()
            .map(|m| m.trace() / real(m.nrows() as f64))
            .collect();
        AlgebraElement::central(shape, &scalars).expect("one scalar per block")
    })
}

/// A τ-preserving UCP map commuting with the action: a convex combination
/// of the identity, the central expectation and inner automorphisms by
/// equivariant unitaries.
pub fn random_equivariant_ucp<R: Rng + ?Sized>(rng: &mut R, action: &PartialAction) -> LinearMap {
    let shape = action.shape();
    let inner = rng.gen_range(1..=2);
    let p = random_probability(rng, 2 + inner);
    let mut map = LinearMap::identity(shape.linear_dim()).scale(p[0]);
    map = map.add(&central_expectation(shape).scale(p[1]));
    for pk in &p[2..] {
        let u = equivariant_unitary(rng, action);
        map = map.add(&LinearMap::on_algebra(shape, |a| &(&u * a) * &u.adjoint()).scale(*pk));
    }
    map
}

/// A unitary of the represented algebra, `exp(iH)` for random hermitian `H`.
pub fn random_unitary_in<R: Rng + ?Sized>(rng: &mut R, space: &GnsSpace) -> CVector {
    let x = random_matrix(rng, space.dim(), 1).column(0).into_owned();
    let h = space.represent(&(&x + space.adjoint_coords(&x)));
    let u = exp_i_hermitian(&h);
    space.expectation().coords_of(&u)
}

/// A UCP map on a represented algebra that need not come from any
/// coefficientwise construction: a convex combination of inner
/// automorphisms and compressions `E_B(V · V*)` by ambient unitaries.
pub fn random_general_ucp<R: Rng + ?Sized>(rng: &mut R, space: &GnsSpace) -> LinearMap {
    let terms = rng.gen_range(1..=3);
    let p = random_probability(rng, terms);
    let d = space.rep_dim();
    let expectation = space.expectation();
    let n = space.dim();
    let mut matrix = CMatrix::zeros(n, n);
    for pk in p {
        let v = if rng.gen_bool(0.5) {
            space.represent(&random_unitary_in(rng, space))
        } else {
            random_unitary(rng, d)
        };
        for (k, r) in space.rep_basis().iter().enumerate() {
            let col = expectation.coords_of(&(&v * r * v.adjoint())) * real(pk);
            let mut c = matrix.column_mut(k);
            c += col;
        }
    }
    LinearMap::from_matrix(matrix).expect("square")
}

/// Random Bratteli step from `source`: a unital multiplicity matrix with
/// every row and column nonzero and random intertwiners, keeping `Σn ≤ max_fiber`.
pub fn random_embedding<R: Rng + ?Sized>(rng: &mut R, source: &BlockShape, max_fiber: usize) -> Option<Embedding> {
    let ks = source.num_blocks();
    for _ in 0..50 {
        let kt = rng.gen_range(1..=3);
        let mut m = vec![vec![0usize; ks]; kt];
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x = if rng.gen_bool(0.5) { rng.gen_range(1..=2) } else { 0 };
            }
        }
        for (i, row) in m.iter_mut().enumerate() {
            if row.iter().all(|&x| x == 0) {
                row[rng.gen_range(0..ks)] = 1;
            }
            let _ = i;
        }
        for j in 0..ks {
            if m.iter().all(|r| r[j] == 0) {
                let i = rng.gen_range(0..kt);
                m[i][j] = 1;
            }
        }
        let dims: Vec<usize> = m
            .iter()
            .map(|row| row.iter().zip(source.dims()).map(|(a, b)| a * b).sum())
            .collect();
        if dims.iter().sum::<usize>() > max_fiber {
            continue;
        }
        let target = BlockShape::new(dims.clone()).expect("positive");
        let w = dims.iter().map(|&n| random_unitary(rng, n)).collect();
        return Some(Embedding::new(source.clone(), target, m, w).expect("consistent"));
    }
    None
}

/// A chain of `stages` algebras with trace-compatible unital embeddings.
/// Shapes are generated forward and weights backward via `w_src = mᵀ w_tgt`.
pub fn random_chain<R: Rng + ?Sized>(rng: &mut R, stages: usize, max_fiber: usize) -> Chain {
    loop {
        let k0 = rng.gen_range(1..=2);
        let first = BlockShape::new((0..k0).map(|_| rng.gen_range(1..=2)).collect()).expect("positive");
        let mut shapes = vec![first];
        let mut embeddings = Vec::new();
        let mut ok = true;
        for _ in 1..stages {
            match random_embedding(rng, shapes.last().expect("nonempty"), max_fiber) {
                Some(e) => {
                    shapes.push(e.target().clone());
                    embeddings.push(e);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let last = shapes.last().expect("nonempty");
        let w: Vec<f64> = (0..last.num_blocks()).map(|_| rng.gen_range(0.2..1.0)).collect();
        let mut traces = vec![TracialState::normalized(last, w).expect("positive")];
        for e in embeddings.iter().rev() {
            let tgt = traces.last().expect("nonempty");
            let ws = (0..e.source().num_blocks())
                .map(|j| {
                    (0..e.target().num_blocks())
                        .map(|i| e.multiplicity()[i][j] as f64 * tgt.weight(i))
                        .sum()
                })
                .collect();
            traces.push(TracialState::normalized(e.source(), ws).expect("positive"));
        }
        traces.reverse();
        let stages = shapes
            .into_iter()
            .zip(traces)
            .map(|(s, t)| ChainStage::new(s, t, None, linalg::DEFAULT_TOL).expect("faithful"))
            .collect();
        return Chain::new(stages, embeddings).expect("consistent");
    }
}

/// Target of a uniform `k`-fold amplification of an action, carried along
/// intertwiners `W`: `U′ = W_{b(i)} (I_k ⊗ U) W_i*`.
pub fn amplify_action(action: &PartialAction, k: usize, w: &[CMatrix]) -> PartialAction {
    let dims: Vec<usize> = action.shape().dims().iter().map(|&n| k * n).collect();
    let shape = BlockShape::new(dims).expect("positive");
    let ik = CMatrix::identity(k, k);
    let maps = action
        .maps()
        .iter()
        .map(|m| {
            let us = m
                .domain()
                .iter()
                .zip(m.targets())
                .zip(m.unitaries())
                .map(|((&i, &j), u)| &w[j] * linalg::kron(&ik, u) * w[i].adjoint())
                .collect();
            PartialMap::new(m.domain().to_vec(), m.targets().to_vec(), us).expect("aligned")
        })
        .collect();
    PartialAction::new(action.group().clone(), shape, maps).expect("conjugate of a valid action")
}

/// A chain of partial dynamical systems over one group with equivariant
/// uniform amplifications (`k ∈ {1, 2}` per step, at most two doublings).
pub fn random_equivariant_chain<R: Rng + ?Sized>(rng: &mut R, stages: usize, budget: Budget) -> Chain {
    let sys = random_system(rng, budget);
    let mut actions = vec![sys.action];
    let mut traces = vec![sys.trace];
    let mut embeddings = Vec::new();
    let mut doublings = 0;
    for _ in 1..stages {
        let prev = actions.last().expect("nonempty");
        let k = if doublings < 2 && rng.gen_bool(0.5) { 2 } else { 1 };
        doublings += usize::from(k == 2);
        let w: Vec<CMatrix> = prev.shape().dims().iter().map(|&n| random_unitary(rng, k * n)).collect();
        let next = amplify_action(prev, k, &w);
        let nb = prev.shape().num_blocks();
        let m = (0..nb).map(|i| (0..nb).map(|j| if i == j { k } else { 0 }).collect()).collect();
        let emb = Embedding::new(prev.shape().clone(), next.shape().clone(), m, w).expect("consistent");
        let tr = traces.last().expect("nonempty");
        let wt: Vec<f64> = tr.weights().iter().map(|x| x / k as f64).collect();
        traces.push(TracialState::new(next.shape(), wt).expect("normalized"));
        actions.push(next);
        embeddings.push(emb);
    }
    let stages = actions
        .into_iter()
        .zip(traces)
        .map(|(a, t)| ChainStage::new(a.shape().clone(), t, Some(a), 1e-9).expect("valid stage"))
        .collect();
    Chain::new(stages, embeddings).expect("consistent")
}
