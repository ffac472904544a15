//! Operator-norm lengths `ℓ(g) = ‖1 − g‖`, finite matrix groups, and the
//! filtration `Γ_t = ⟨g ∈ Γ : ℓ(g) < t⟩`, which is abelian and normal for
//! `t = 1/2` in every discrete unitary group.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{CMatrix, MatrixPairs};
use crate::matrix_model::UnitaryMatrix;
use crate::scalar::{cis, Complex, Real};
use crate::word::FiniteGroup;

pub const DEFAULT_MERGE_EPS: f64 = 1e-8;
/// Non-identity elements this close to the identity witness non-discreteness.
pub const NEAR_IDENTITY: f64 = 0.01;
pub const DEFAULT_CLOSURE_CAP: usize = 10_000;
/// Cell size of the normalized-trace lookup grid.
const TRACE_GRID: f64 = 1e-6;

/// `‖I − U‖_op`.
pub fn ell_op<T: Real>(u: &UnitaryMatrix<T>) -> T {
    let m = u.matrix();
    CMatrix::identity(m.rows()).sub(m).expect("square").op_norm()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorCheck {
    /// `ℓ_op([U, V])`
    pub lhs: f64,
    /// `2·ℓ_op(U)·ℓ_op(V)`
    pub rhs: f64,
    pub margin: f64,
}

/// `ℓ_op([U,V]) ≤ 2·ℓ_op(U)·ℓ_op(V)`, which holds for every unitary pair.
pub fn commutator_ineq_check<T: Real>(u: &UnitaryMatrix<T>, v: &UnitaryMatrix<T>) -> Result<CommutatorCheck> {
    if u.dimension() != v.dimension() {
        return Err(Error::DimensionMismatch { left: u.dimension(), right: v.dimension() });
    }
    let comm = u.mul(v)?.mul(&u.adjoint())?.mul(&v.adjoint())?;
    let lhs = ell_op(&comm).as_f64();
    let rhs = 2.0 * ell_op(u).as_f64() * ell_op(v).as_f64();
    Ok(CommutatorCheck { lhs, rhs, margin: rhs - lhs })
}

/// A finite group of unitaries with its Cayley table. Index 0 is the identity.
#[derive(Clone, Debug)]
pub struct MatrixGroup<T: Real> {
    elements: Vec<UnitaryMatrix<T>>,
    generators: Vec<usize>,
    table: Vec<usize>,
    inverses: Vec<usize>,
    merge_eps: f64,
    lookup: TraceIndex,
}

#[derive(Clone, Debug, Default)]
struct TraceIndex {
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl TraceIndex {
    fn key<T: Real>(m: &CMatrix<T>) -> (i64, i64) {
        let t = m.normalized_trace().expect("square");
        ((t.re.as_f64() / TRACE_GRID).floor() as i64, (t.im.as_f64() / TRACE_GRID).floor() as i64)
    }

    fn insert(&mut self, key: (i64, i64), index: usize) {
        self.cells.entry(key).or_default().push(index);
    }

    /// Nearest stored element within `radius` in operator norm. A change of
    /// `d` in operator norm moves the normalized trace by at most `d`, so
    /// neighbouring cells suffice while `radius < TRACE_GRID`.
    fn nearest<T: Real>(&self, elements: &[UnitaryMatrix<T>], m: &CMatrix<T>, radius: f64) -> Option<(usize, f64)> {
        let (kr, ki) = Self::key(m);
        let mut best: Option<(usize, f64)> = None;
        for dr in -1..=1 {
            for di in -1..=1 {
                let Some(cell) = self.cells.get(&(kr + dr, ki + di)) else { continue };
                for &idx in cell {
                    let other = elements[idx].matrix();
                    // Entrywise distance bounds the operator norm from below.
                    if other.max_abs_diff(m).expect("shape").as_f64() > radius {
                        continue;
                    }
                    let d = other.sub(m).expect("shape").op_norm().as_f64();
                    if d <= radius && best.is_none_or(|b| d < b.1 || (d == b.1 && idx < b.0)) {
                        best = Some((idx, d));
                    }
                }
            }
        }
        best
    }
}

/// Why a closure could not produce a finite group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonClosureReason {
    /// A new element lies within [`NEAR_IDENTITY`] of the identity.
    NearIdentity,
    /// More elements than the cap.
    CapExceeded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonClosureWitness<T: Real> {
    pub reason: NonClosureReason,
    pub element: UnitaryMatrix<T>,
    pub ell_op: f64,
    /// Generator indices whose product (left to right) gives `element`.
    pub word: Vec<usize>,
    pub elements_found: usize,
}

#[derive(Clone, Debug)]
pub enum ClosureOutcome<T: Real> {
    Group(MatrixGroup<T>),
    NonClosure(NonClosureWitness<T>),
}

impl<T: Real> ClosureOutcome<T> {
    pub fn group(self) -> Option<MatrixGroup<T>> {
        match self {
            Self::Group(g) => Some(g),
            Self::NonClosure(_) => None,
        }
    }
}

/// Breadth-first closure of `generators` under right multiplication.
///
/// A product within `merge_eps` (operator norm) of a known element is
/// identified with it; one within `(merge_eps, 10·merge_eps]` of a known
/// element is refused as ambiguous. A new element within [`NEAR_IDENTITY`]
/// of the identity, or more than `cap` elements, ends the search with a
/// [`NonClosureWitness`].
pub fn group_closure<T: Real>(generators: &[UnitaryMatrix<T>], cap: usize, merge_eps: f64) -> Result<ClosureOutcome<T>> {
    let Some(first) = generators.first() else {
        return Err(invalid("group_closure needs at least one generator"));
    };
    if cap < generators.len() {
        return Err(invalid(format!("cap {cap} is smaller than the {} generators", generators.len())));
    }
    if !(merge_eps > 0.0 && 10.0 * merge_eps < TRACE_GRID.min(NEAR_IDENTITY)) {
        return Err(invalid(format!("merge_eps = {merge_eps} outside (0, {})", TRACE_GRID / 10.0)));
    }
    let n = first.dimension();
    if let Some(g) = generators.iter().find(|g| g.dimension() != n) {
        return Err(Error::DimensionMismatch { left: n, right: g.dimension() });
    }
    let identity = UnitaryMatrix::<T>::identity(n);
    let mut elements = vec![identity];
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    let mut index = TraceIndex::default();
    index.insert(TraceIndex::key(elements[0].matrix()), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut gen_index = vec![usize::MAX; generators.len()];

    while let Some(i) = queue.pop_front() {
        let mut row = Vec::with_capacity(generators.len());
        for (j, g) in generators.iter().enumerate() {
            let p = elements[i].matrix().matmul(g.matrix())?;
            match index.nearest(&elements, &p, 10.0 * merge_eps) {
                Some((idx, d)) if d <= merge_eps => row.push(idx),
                Some((_, d)) => return Err(Error::AmbiguousMerge { distance: d }),
                None => {
                    let mut word = words[i].clone();
                    word.push(j);
                    let candidate = UnitaryMatrix::new(p, "closure")?;
                    let ell = ell_op(&candidate).as_f64();
                    if ell <= NEAR_IDENTITY {
                        return Ok(ClosureOutcome::NonClosure(NonClosureWitness {
                            reason: NonClosureReason::NearIdentity,
                            element: candidate,
                            ell_op: ell,
                            word,
                            elements_found: elements.len(),
                        }));
                    }
                    if elements.len() == cap {
                        return Ok(ClosureOutcome::NonClosure(NonClosureWitness {
                            reason: NonClosureReason::CapExceeded,
                            element: candidate,
                            ell_op: ell,
                            word,
                            elements_found: elements.len(),
                        }));
                    }
                    let idx = elements.len();
                    index.insert(TraceIndex::key(candidate.matrix()), idx);
                    elements.push(candidate);
                    words.push(word);
                    queue.push_back(idx);
                    row.push(idx);
                }
            }
            if i == 0 {
                gen_index[j] = row[j];
            }
        }
    }
    let order = elements.len();
    let mut table = vec![0usize; order * order];
    for a in 0..order {
        for b in 0..order {
            let p = elements[a].matrix().matmul(elements[b].matrix())?;
            table[a * order + b] = match index.nearest(&elements, &p, 10.0 * merge_eps) {
                Some((idx, d)) if d <= merge_eps => idx,
                Some((_, d)) => return Err(Error::AmbiguousMerge { distance: d }),
                None => return Err(invalid("closure is not closed under products; numerical drift")),
            };
        }
    }
    let inverses = (0..order)
        .map(|a| (0..order).find(|&b| table[a * order + b] == 0).ok_or_else(|| invalid("element without inverse")))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClosureOutcome::Group(MatrixGroup { elements, generators: gen_index, table, inverses, merge_eps, lookup: index }))
}

impl<T: Real> MatrixGroup<T> {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dimension(&self) -> usize {
        self.elements[0].dimension()
    }

    pub fn elements(&self) -> &[UnitaryMatrix<T>] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &UnitaryMatrix<T> {
        &self.elements[i]
    }

    /// Indices of the generators, in the order given.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn merge_eps(&self) -> f64 {
        self.merge_eps
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order() + b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// Index of the element within the merge tolerance of `m`.
    pub fn index_of(&self, m: &CMatrix<T>) -> Option<usize> {
        if m.rows() != self.dimension() || m.cols() != self.dimension() {
            return None;
        }
        self.lookup.nearest(&self.elements, m, self.merge_eps).map(|x| x.0)
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (a + 1..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Sorted indices of the subgroup generated by `gens`, closed inside the
    /// Cayley table.
    pub fn subgroup_generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(a) = queue.pop_front() {
            for &g in gens {
                let p = self.mul(a, g);
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        (0..self.order()).filter(|&i| seen[i]).collect()
    }

    /// `g S g⁻¹ ⊆ S` for every element `g`.
    pub fn is_normal(&self, subgroup: &[usize]) -> bool {
        let mut member = vec![false; self.order()];
        for &s in subgroup {
            member[s] = true;
        }
        (0..self.order()).all(|g| subgroup.iter().all(|&s| member[self.mul(self.mul(g, s), self.inverse(g))]))
    }

    pub fn is_abelian_subset(&self, subgroup: &[usize]) -> bool {
        subgroup.iter().enumerate().all(|(i, &a)| subgroup[i + 1..].iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn ell_ops(&self) -> Vec<f64> {
        self.elements.iter().map(|e| ell_op(e).as_f64()).collect()
    }

    /// The abstract group of the Cayley table, elements labelled `g0, g1, …`.
    pub fn to_finite_group(&self) -> FiniteGroup {
        let labels = (0..self.order()).map(|i| format!("g{i}")).collect();
        FiniteGroup::from_table(labels, self.table.clone()).expect("a closed Cayley table is a group")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub threshold: f64,
    pub group_order: usize,
    /// Elements with `ℓ_op < threshold`.
    pub generating_set: Vec<usize>,
    pub subgroup: Vec<usize>,
    pub abelian: bool,
    pub normal: bool,
    /// `ℓ_op` of every element of the ambient group, by index.
    pub ell_op: Vec<f64>,
}

/// `Γ_t`, its commutativity, and its normality in `G`.
pub fn gamma_filter<T: Real>(group: &MatrixGroup<T>, t: f64) -> FilterReport {
    let ells = group.ell_ops();
    let generating_set: Vec<usize> = (0..group.order()).filter(|&i| ells[i] < t).collect();
    let subgroup = group.subgroup_generated(&generating_set);
    FilterReport {
        threshold: t,
        group_order: group.order(),
        abelian: group.is_abelian_subset(&subgroup),
        normal: group.is_normal(&subgroup),
        generating_set,
        subgroup,
        ell_op: ells,
    }
}

/// The clock and shift pair of the `n`-dimensional Heisenberg irrep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergReport<T: Real> {
    pub n: usize,
    pub clock: UnitaryMatrix<T>,
    pub shift: UnitaryMatrix<T>,
    pub ell_clock: f64,
    pub ell_shift: f64,
    pub min_noncommuting_ell: f64,
    /// The scalar `λ` with `[clock, shift] = λ·I`.
    pub commutator_scalar: Complex<f64>,
    /// `‖[clock, shift] − λ·I‖_op`
    pub scalar_deviation: f64,
}

/// `clock = diag(1, ω, …, ω^{n−1})`, `ω = e^{2πi/n}`, and the cyclic
/// shift `e_j ↦ e_{j+1}`; their commutator is `ω·I`.
pub fn heisenberg_irrep<T: Real>(n: usize) -> Result<HeisenbergReport<T>> {
    if n < 2 {
        return Err(invalid("heisenberg_irrep needs n >= 2"));
    }
    let step = T::TAU() / T::from_usize(n).unwrap();
    let clock = CMatrix::diagonal(&(0..n).map(|j| cis(step * T::from_usize(j).unwrap())).collect::<Vec<_>>());
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    let shift = CMatrix::from_fn(n, n, |i, j| if i == (j + 1) % n { one } else { zero });
    let clock = UnitaryMatrix::new(clock, format!("clock({n})"))?;
    let shift = UnitaryMatrix::new(shift, format!("shift({n})"))?;
    let comm = clock.mul(&shift)?.mul(&clock.adjoint())?.mul(&shift.adjoint())?;
    let lambda = comm.normalized_trace();
    let dev = comm.matrix().sub(&CMatrix::identity(n).scale(lambda))?.op_norm();
    let (ell_clock, ell_shift) = (ell_op(&clock).as_f64(), ell_op(&shift).as_f64());
    Ok(HeisenbergReport {
        n,
        ell_clock,
        ell_shift,
        min_noncommuting_ell: ell_clock.min(ell_shift),
        commutator_scalar: Complex::new(lambda.re.as_f64(), lambda.im.as_f64()),
        scalar_deviation: dev.as_f64(),
        clock,
        shift,
    })
}

/// A named list of generators.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry<T: Real> {
    pub name: String,
    pub generators: Vec<UnitaryMatrix<T>>,
}

#[derive(Serialize, Deserialize)]
struct CatalogFile {
    entries: Vec<CatalogFileEntry>,
}

#[derive(Serialize, Deserialize)]
struct CatalogFileEntry {
    name: String,
    generators: Vec<MatrixPairs>,
}

/// `{"entries": [{"name": …, "generators": [[[re, im], …], …]}]}`.
pub fn parse_catalog<T: Real>(json: &str) -> Result<Vec<CatalogEntry<T>>> {
    let file: CatalogFile = serde_json::from_str(json).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    file.entries
        .into_iter()
        .map(|e| {
            let generators = e
                .generators
                .iter()
                .map(|g| UnitaryMatrix::new(CMatrix::from_pairs(g)?, e.name.clone()))
                .collect::<Result<Vec<_>>>()?;
            Ok(CatalogEntry { name: e.name, generators })
        })
        .collect()
}

pub fn catalog_to_json<T: Real>(entries: &[CatalogEntry<T>]) -> String {
    let file = CatalogFile {
        entries: entries
            .iter()
            .map(|e| CatalogFileEntry { name: e.name.clone(), generators: e.generators.iter().map(|g| g.matrix().to_pairs()).collect() })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

fn m2<T: Real>(a: [[(f64, f64); 2]; 2]) -> CMatrix<T> {
    CMatrix::from_fn(2, 2, |i, j| Complex::new(T::lit(a[i][j].0), T::lit(a[i][j].1)))
}

/// `iσ₁`, `iσ₂`, `iσ₃` in SU(2).
pub fn pauli_i<T: Real>() -> [CMatrix<T>; 3] {
    [
        m2([[(0., 0.), (0., 1.)], [(0., 1.), (0., 0.)]]),
        m2([[(0., 0.), (1., 0.)], [(-1., 0.), (0., 0.)]]),
        m2([[(0., 1.), (0., 0.)], [(0., 0.), (0., -1.)]]),
    ]
}

/// Quaternion group in SU(2), Pauli group `⟨X, Z⟩` in U(2), binary
/// tetrahedral group in SU(2), and `⟨e^{2πi/13}⟩` in U(1).
pub fn bundled_catalog<T: Real>() -> Vec<CatalogEntry<T>> {
    let [i1, i2, i3] = pauli_i::<T>();
    let half = T::lit(0.5);
    let tet = CMatrix::identity(2).add(&i1).and_then(|m| m.add(&i2)).and_then(|m| m.add(&i3)).expect("2x2");
    let tet = tet.scale(Complex::new(half, T::zero()));
    let x = m2([[(0., 0.), (1., 0.)], [(1., 0.), (0., 0.)]]);
    let z = m2([[(1., 0.), (0., 0.)], [(0., 0.), (-1., 0.)]]);
    let rot13 = CMatrix::diagonal(&[cis(T::TAU() / T::lit(13.0))]);
    let u = |m: CMatrix<T>, name: &str| UnitaryMatrix::new(m, name).expect("bundled generators are unitary");
    vec![
        CatalogEntry { name: "quaternion".into(), generators: vec![u(i1.clone(), "quaternion"), u(i2.clone(), "quaternion")] },
        CatalogEntry { name: "pauli".into(), generators: vec![u(x, "pauli"), u(z, "pauli")] },
        CatalogEntry {
            name: "binary-tetrahedral".into(),
            generators: vec![u(i1, "binary-tetrahedral"), u(i2, "binary-tetrahedral"), u(tet, "binary-tetrahedral")],
        },
        CatalogEntry { name: "cyclic-13".into(), generators: vec![u(rot13, "cyclic-13")] },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_model::sample_haar;
    use crate::rng::derive_seed;

    type U = UnitaryMatrix<f64>;

    fn diag(entries: &[Complex<f64>]) -> U {
        U::new(CMatrix::diagonal(entries), "test").unwrap()
    }

    fn closure(gens: &[U]) -> MatrixGroup<f64> {
        group_closure(gens, DEFAULT_CLOSURE_CAP, DEFAULT_MERGE_EPS).unwrap().group().unwrap()
    }

    #[test]
    fn ell_op_examples() {
        assert_eq!(ell_op(&U::identity(3)), 0.0);
        let minus = diag(&[Complex::new(-1.0, 0.0); 2]);
        assert!((ell_op(&minus) - 2.0).abs() < 1e-15);
        let w = cis(std::f64::consts::TAU / 3.0);
        assert!((ell_op(&diag(&[Complex::new(1.0, 0.0), w])) - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn commutator_inequality_examples() {
        let a = diag(&[cis(0.3), cis(1.1)]);
        let b = diag(&[cis(-0.7), cis(2.0)]);
        let r = commutator_ineq_check(&a, &b).unwrap();
        assert!(r.lhs < 1e-15 && r.margin >= 0.0);
        let cat = bundled_catalog::<f64>();
        let (x, z) = (&cat[1].generators[0], &cat[1].generators[1]);
        let r = commutator_ineq_check(x, z).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-14 && (r.rhs - 8.0).abs() < 1e-14);
        for s in 0..1000 {
            let u = sample_haar::<f64>(4, derive_seed(s, 0)).unwrap();
            let v = sample_haar::<f64>(4, derive_seed(s, 1)).unwrap();
            assert!(commutator_ineq_check(&u, &v).unwrap().margin >= -1e-9);
        }
        assert!(commutator_ineq_check(&U::identity(2), &U::identity(3)).is_err());
    }

    #[test]
    fn pauli_closure_has_order_eight() {
        let cat = bundled_catalog::<f64>();
        let g = closure(&cat[1].generators);
        assert_eq!(g.order(), 8);
        assert!(!g.is_abelian());
        // ±I, ±X, ±Z, ±XZ
        let x = cat[1].generators[0].matrix();
        let z = cat[1].generators[1].matrix();
        let xz = x.matmul(z).unwrap();
        for m in [CMatrix::identity(2), x.clone(), z.clone(), xz] {
            assert!(g.index_of(&m).is_some());
            assert!(g.index_of(&m.scale(Complex::new(-1.0, 0.0))).is_some());
        }
        assert_eq!(g.to_finite_group().exponent(), 4);
    }

    #[test]
    fn closure_edge_cases() {
        let g = closure(&[U::identity(2)]);
        assert_eq!(g.order(), 1);
        assert!(group_closure::<f64>(&[], 10, DEFAULT_MERGE_EPS).is_err());
        let cat = bundled_catalog::<f64>();
        assert!(group_closure(&cat[2].generators, 2, DEFAULT_MERGE_EPS).is_err());
        assert!(group_closure(&[U::identity(2), U::identity(3)], 10, DEFAULT_MERGE_EPS).is_err());
        match group_closure(&cat[2].generators, 10, DEFAULT_MERGE_EPS).unwrap() {
            ClosureOutcome::NonClosure(w) => {
                assert_eq!(w.reason, NonClosureReason::CapExceeded);
                assert_eq!(w.elements_found, 10);
            }
            ClosureOutcome::Group(_) => panic!("cap should stop the binary tetrahedral closure"),
        }
    }

    #[test]
    fn irrational_rotation_is_not_discrete() {
        let r = diag(&[cis(1.0)]);
        let ClosureOutcome::NonClosure(w) = group_closure(&[r], 10_000, DEFAULT_MERGE_EPS).unwrap() else {
            panic!("an irrational rotation generates no finite group");
        };
        assert_eq!(w.reason, NonClosureReason::NearIdentity);
        // First k with |1 − e^{ik}| ≤ 0.01: k = 333 ≈ 53·2π.
        assert_eq!(w.word.len(), 333);
        assert!((w.ell_op - (2.0 * (333.0f64 / 2.0).sin().abs())).abs() < 1e-10);
        assert!(w.ell_op < 0.01);
    }

    #[test]
    fn closure_is_deterministic() {
        let cat = bundled_catalog::<f64>();
        let a = closure(&cat[2].generators);
        let b = closure(&cat[2].generators);
        assert_eq!(a.order(), 24);
        assert_eq!(a.elements(), b.elements());
        assert_eq!(a.table, b.table);
    }

    #[test]
    fn filter_examples() {
        let cat = bundled_catalog::<f64>();
        let q = closure(&cat[0].generators);
        assert_eq!(q.order(), 8);
        let f = gamma_filter(&q, 0.5);
        assert_eq!(f.subgroup, vec![0]);
        assert!(f.abelian && f.normal);
        for (i, &l) in f.ell_op.iter().enumerate() {
            assert!(i == 0 || l >= 2f64.sqrt() - 1e-12);
        }
        let c = closure(&cat[3].generators);
        assert_eq!(c.order(), 13);
        let f = gamma_filter(&c, 0.5);
        assert_eq!(f.subgroup.len(), 13);
        assert_eq!(f.generating_set.len(), 3);
        assert!(f.abelian && f.normal);
        let expect = 2.0 * (std::f64::consts::PI / 13.0).sin();
        assert!((f.ell_op[1] - expect).abs() < 1e-12 && expect < 0.5);
        assert_eq!(gamma_filter(&c, 0.0).subgroup, vec![0]);
    }

    #[test]
    fn filters_are_monotone_and_abelian_normal_at_half() {
        for entry in bundled_catalog::<f64>() {
            let g = closure(&entry.generators);
            let f = gamma_filter(&g, 0.5);
            assert!(f.abelian && f.normal, "{}", entry.name);
            let mut prev: Vec<usize> = vec![0];
            for t in [0.1, 0.5, 1.0, 1.5, 2.0, 2.1] {
                let cur = gamma_filter(&g, t).subgroup;
                assert!(prev.iter().all(|i| cur.contains(i)));
                prev = cur;
            }
            assert_eq!(prev.len(), g.order());
        }
    }

    #[test]
    fn heisenberg_examples() {
        let h = heisenberg_irrep::<f64>(3).unwrap();
        assert!((h.ell_clock - 3f64.sqrt()).abs() < 1e-14);
        let h = heisenberg_irrep::<f64>(2).unwrap();
        assert!((h.ell_shift - 2.0).abs() < 1e-14);
        for n in 2..=12 {
            let h = heisenberg_irrep::<f64>(n).unwrap();
            assert!(h.min_noncommuting_ell >= 3f64.sqrt() - 1e-9, "n = {n}");
            let omega = cis(std::f64::consts::TAU / n as f64);
            assert!((h.commutator_scalar - omega).norm() < 1e-12);
            assert!(h.scalar_deviation < 1e-12);
            // max_k 2|sin(πk/n)|
            let best = (0..n).map(|k| 2.0 * (std::f64::consts::PI * k as f64 / n as f64).sin().abs()).fold(0.0, f64::max);
            assert!((h.ell_clock - best).abs() < 1e-12 && (h.ell_shift - best).abs() < 1e-12);
        }
        assert!(heisenberg_irrep::<f64>(1).is_err());
    }

    #[test]
    fn catalog_round_trip() {
        let cat = bundled_catalog::<f64>();
        let json = catalog_to_json(&cat);
        let back = parse_catalog::<f64>(&json).unwrap();
        assert_eq!(back.len(), 4);
        for (a, b) in cat.iter().zip(&back) {
            assert_eq!(a.name, b.name);
            for (x, y) in a.generators.iter().zip(&b.generators) {
                assert_eq!(x.matrix(), y.matrix());
            }
        }
        assert!(parse_catalog::<f64>(r#"{"entries":[{"name":"bad","generators":[[[[2,0]]]]}]}"#).is_err());
        assert!(parse_catalog::<f64>("{").is_err());
    }
}
