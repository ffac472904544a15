//! Finite subgroups of `PU(n)`: irreducibility through the commutant, the
//! adjoint fixed space in `su(n)`, the least-dimension criterion for
//! uniform discreteness, and the dihedral chain in SO(3).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cstar::{ell_op, group_closure, ClosureOutcome, MatrixGroup, DEFAULT_CLOSURE_CAP, DEFAULT_MERGE_EPS};
use crate::error::{invalid, Error, Result};
use crate::linalg::{CMatrix, MatrixPairs};
use crate::matrix_model::UnitaryMatrix;
use crate::scalar::{cis, Complex, Real};
use crate::word::FiniteGroup;

/// Singular values below this (relative to the largest, floored at one)
/// count as zero in rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// A unitary representation `π: G → U(n)` given by the image of every
/// element.
#[derive(Clone, Debug)]
pub struct FiniteRep<T: Real> {
    group: Arc<FiniteGroup>,
    images: Vec<CMatrix<T>>,
    unit_determinant: bool,
}

impl<T: Real> FiniteRep<T> {
    /// Checks unitarity of every image and `π(g)π(h) = π(gh)` for every
    /// pair, both within the unitarity tolerance of `T`.
    pub fn new(group: Arc<FiniteGroup>, images: Vec<CMatrix<T>>) -> Result<Self> {
        if images.len() != group.order() {
            return Err(invalid(format!("{} images for a group of order {}", images.len(), group.order())));
        }
        let n = images[0].rows();
        if n == 0 {
            return Err(invalid("zero-dimensional representation"));
        }
        let tol = T::unitarity_tol();
        for m in &images {
            if !m.is_square() || m.rows() != n {
                return Err(Error::DimensionMismatch { left: n, right: m.rows() });
            }
            let dev = crate::matrix_model::unitarity_deviation(m);
            if !(dev <= tol) {
                return Err(Error::NotUnitary { deviation: dev.as_f64(), tol: tol.as_f64() });
            }
        }
        for a in 0..group.order() {
            for b in 0..group.order() {
                let lhs = images[a].matmul(&images[b])?;
                let dev = lhs.max_abs_diff(&images[group.mul(a, b)])?;
                if !(dev <= tol) {
                    return Err(invalid(format!(
                        "not a homomorphism at ({}, {}): deviation {:e}",
                        group.label(a),
                        group.label(b),
                        dev.as_f64()
                    )));
                }
            }
        }
        let one = Complex::new(T::one(), T::zero());
        let unit_determinant = images.iter().all(|m| m.determinant().is_ok_and(|d| (d - one).norm() <= tol));
        Ok(Self { group, images, unit_determinant })
    }

    /// The defining representation of a matrix group.
    pub fn from_matrix_group(g: &MatrixGroup<T>) -> Result<Self> {
        Self::new(Arc::new(g.to_finite_group()), g.elements().iter().map(|e| e.matrix().clone()).collect())
    }

    pub fn trivial(group: Arc<FiniteGroup>, n: usize) -> Result<Self> {
        let images = vec![CMatrix::identity(n); group.order()];
        Self::new(group, images)
    }

    /// `ℤ/n → SU(2)`, `k ↦ diag(ω^k, ω^{−k})` with `ω = e^{2πi/n}`.
    pub fn cyclic_su2(n: usize) -> Result<Self> {
        let group = Arc::new(FiniteGroup::cyclic(n)?);
        let step = T::TAU() / T::from_usize(n).unwrap();
        let images = (0..n)
            .map(|k| {
                let theta = step * T::from_usize(k).unwrap();
                CMatrix::diagonal(&[cis(theta), cis(-theta)])
            })
            .collect();
        Self::new(group, images)
    }

    /// Block-diagonal sum of two representations of the same group.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if *self.group != *other.group {
            return Err(invalid("direct sum of representations of different groups"));
        }
        let images = self.images.iter().zip(&other.images).map(|(a, b)| a.direct_sum(b)).collect();
        Self::new(Arc::clone(&self.group), images)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dimension(&self) -> usize {
        self.images[0].rows()
    }

    pub fn images(&self) -> &[CMatrix<T>] {
        &self.images
    }

    pub fn image(&self, g: usize) -> &CMatrix<T> {
        &self.images[g]
    }

    /// Every image has determinant one (lands in SU(n)).
    pub fn unit_determinant(&self) -> bool {
        self.unit_determinant
    }

    /// Some element acts non-trivially.
    pub fn is_nontrivial(&self) -> bool {
        let id = CMatrix::identity(self.dimension());
        let tol = T::unitarity_tol();
        self.images.iter().any(|m| m.max_abs_diff(&id).map_or(true, |d| d > tol))
    }
}

/// Complex dimension of `{X : π(g)X = Xπ(g) for all g}`.
pub fn commutant_dimension<T: Real>(rep: &FiniteRep<T>) -> usize {
    let n = rep.dimension();
    let nn = n * n;
    let zero = Complex::new(T::zero(), T::zero());
    let mut rows = Vec::with_capacity(rep.images().len() * nn * nn);
    for p in rep.images() {
        // Row (i, j) of π X − X π; unknown (k, l) is X_kl.
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut c = zero;
                        if l == j {
                            c += p.get(i, k);
                        }
                        if k == i {
                            c -= p.get(l, j);
                        }
                        rows.push(c);
                    }
                }
            }
        }
    }
    let a = CMatrix::from_vec(rows.len() / nn, nn, rows).expect("shape");
    a.null_space(T::lit(RANK_TOL)).len()
}

/// Orthonormal basis of `su(n)` for the real inner product `Re tr(X*Y)`.
pub fn su_basis<T: Real>(n: usize) -> Vec<CMatrix<T>> {
    let mut basis = Vec::with_capacity(n * n - 1);
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let (re, im) = (Complex::new(h, T::zero()), Complex::new(T::zero(), h));
    for a in 0..n {
        for b in a + 1..n {
            let mut x = CMatrix::zeros(n, n);
            x.set(a, b, re);
            x.set(b, a, -re);
            basis.push(x);
            let mut y = CMatrix::zeros(n, n);
            y.set(a, b, im);
            y.set(b, a, im);
            basis.push(y);
        }
    }
    for k in 1..n {
        let norm = T::from_usize(k * (k + 1)).unwrap().sqrt();
        let mut d = CMatrix::zeros(n, n);
        for i in 0..k {
            d.set(i, i, Complex::new(T::zero(), T::one() / norm));
        }
        d.set(k, k, Complex::new(T::zero(), -T::from_usize(k).unwrap() / norm));
        basis.push(d);
    }
    basis
}

fn real_inner<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.data().iter().zip(b.data()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// The fixed space of `X ↦ π(g) X π(g)*` on `su(n)`.
#[derive(Clone, Debug)]
pub struct FixedSpace<T: Real> {
    pub basis: Vec<CMatrix<T>>,
}

impl<T: Real> FixedSpace<T> {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

pub fn adjoint_fixed_space<T: Real>(rep: &FiniteRep<T>) -> FixedSpace<T> {
    let n = rep.dimension();
    if n == 1 {
        return FixedSpace { basis: Vec::new() };
    }
    let basis = su_basis::<T>(n);
    let d = basis.len();
    let mut rows = Vec::with_capacity(rep.images().len() * d * d);
    for p in rep.images() {
        let ph = p.adjoint();
        let moved: Vec<CMatrix<T>> =
            basis.iter().map(|b| p.matmul(b).and_then(|m| m.matmul(&ph)).expect("square")).collect();
        for (m, bm) in basis.iter().enumerate() {
            for (l, ml) in moved.iter().enumerate() {
                let delta = if l == m { T::one() } else { T::zero() };
                rows.push(Complex::new(real_inner(bm, ml) - delta, T::zero()));
            }
        }
    }
    let a = CMatrix::from_vec(rows.len() / d, d, rows).expect("shape");
    let fixed = a
        .null_space(T::lit(RANK_TOL))
        .into_iter()
        .map(|coords| {
            let mut x = CMatrix::zeros(n, n);
            for (c, b) in coords.iter().zip(&basis) {
                x = x.add(&b.scale(Complex::new(c.re, T::zero()))).expect("shape");
            }
            x
        })
        .collect();
    FixedSpace { basis: fixed }
}

/// Outcome of the irreducibility and least-dimension tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub dimension: usize,
    pub irreducible: bool,
    pub commutant_dimension: usize,
    pub adjoint_fixed_dimension: usize,
    pub nontrivial: bool,
    pub min_nontrivial_irrep_dimension: usize,
    /// Nontrivial, and no nontrivial irrep has smaller dimension.
    pub least_dimension: bool,
    /// `irreducible ∧ least_dimension`: the discrete subgroups of `PU(n)`
    /// containing the image form a uniformly discrete family.
    pub guarantee: bool,
    /// `"guaranteed"` or `"inconclusive"`.
    pub status: String,
}

/// `nontrivial_irrep_dims` lists the dimensions of the nontrivial
/// irreducible representations of the group, as known character data.
pub fn least_dimension_criterion<T: Real>(rep: &FiniteRep<T>, nontrivial_irrep_dims: &[usize]) -> Result<CriterionVerdict> {
    let Some(&min_dim) = nontrivial_irrep_dims.iter().min() else {
        return Err(invalid("the list of nontrivial irrep dimensions is empty"));
    };
    if min_dim == 0 {
        return Err(invalid("irrep dimensions must be positive"));
    }
    let commutant = commutant_dimension(rep);
    let fixed = adjoint_fixed_space(rep).dimension();
    let irreducible = commutant == 1;
    let nontrivial = rep.is_nontrivial();
    let least_dimension = nontrivial && rep.dimension() <= min_dim;
    let guarantee = irreducible && least_dimension;
    Ok(CriterionVerdict {
        dimension: rep.dimension(),
        irreducible,
        commutant_dimension: commutant,
        adjoint_fixed_dimension: fixed,
        nontrivial,
        min_nontrivial_irrep_dimension: min_dim,
        least_dimension,
        guarantee,
        status: if guarantee { "guaranteed" } else { "inconclusive" }.into(),
    })
}

/// `quaternion` and `alternating-5` with their nontrivial irrep dimensions.
pub struct RepCatalogEntry<T: Real> {
    pub name: String,
    pub rep: FiniteRep<T>,
    pub nontrivial_irrep_dims: Vec<usize>,
}

fn closed_group<T: Real>(gens: Vec<CMatrix<T>>, name: &str) -> Result<MatrixGroup<T>> {
    let gens = gens.into_iter().map(|g| UnitaryMatrix::new(g, name)).collect::<Result<Vec<_>>>()?;
    match group_closure(&gens, DEFAULT_CLOSURE_CAP, DEFAULT_MERGE_EPS)? {
        ClosureOutcome::Group(g) => Ok(g),
        ClosureOutcome::NonClosure(w) => Err(invalid(format!("{name}: generators do not close ({:?})", w.reason))),
    }
}

/// The 2-dimensional irrep of the quaternion group in SU(2).
pub fn quaternion_rep<T: Real>() -> Result<FiniteRep<T>> {
    let [i1, i2, _] = crate::cstar::pauli_i::<T>();
    FiniteRep::from_matrix_group(&closed_group(vec![i1, i2], "quaternion")?)
}

/// `Alt(5)` as the rotation group of the icosahedron in SO(3): the cyclic
/// permutation of coordinates and the rotation by `2π/5` about the vertex
/// `(0, 1, φ)`.
pub fn icosahedral_rep<T: Real>() -> Result<FiniteRep<T>> {
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    let perm = CMatrix::from_fn(3, 3, |i, j| if i == (j + 1) % 3 { one } else { zero });
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let norm = (1.0 + phi * phi).sqrt();
    let rot = rotation(&[0.0, 1.0 / norm, phi / norm], std::f64::consts::TAU / 5.0);
    FiniteRep::from_matrix_group(&closed_group(vec![perm, rot], "icosahedral")?)
}

/// Rodrigues rotation by `theta` about the unit vector `axis`.
pub fn rotation<T: Real>(axis: &[f64; 3], theta: f64) -> CMatrix<T> {
    let (s, c) = theta.sin_cos();
    let [x, y, z] = *axis;
    let k = [[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]];
    CMatrix::from_fn(3, 3, |i, j| {
        let kk: f64 = (0..3).map(|m| k[i][m] * k[m][j]).sum();
        let id = if i == j { 1.0 } else { 0.0 };
        Complex::new(T::lit(id + s * k[i][j] + (1.0 - c) * kk), T::zero())
    })
}

pub fn bundled_rep_catalog<T: Real>() -> Result<Vec<RepCatalogEntry<T>>> {
    Ok(vec![
        RepCatalogEntry { name: "quaternion".into(), rep: quaternion_rep()?, nontrivial_irrep_dims: vec![1, 1, 1, 2] },
        RepCatalogEntry { name: "alternating-5".into(), rep: icosahedral_rep()?, nontrivial_irrep_dims: vec![3, 3, 4, 5] },
        RepCatalogEntry { name: "cyclic-8-su2".into(), rep: FiniteRep::cyclic_su2(8)?, nontrivial_irrep_dims: vec![1; 7] },
    ])
}

#[derive(Serialize, Deserialize)]
struct RepFile {
    entries: Vec<RepFileEntry>,
}

#[derive(Serialize, Deserialize)]
struct RepFileEntry {
    name: String,
    /// Multiplication table as text, see [`FiniteGroup::to_text`].
    group: String,
    elements: Vec<MatrixPairs>,
    #[serde(default)]
    dims: Vec<usize>,
}

/// `{"entries": [{"name", "group", "elements": [matrix, …], "dims": [...]}]}`,
/// with one matrix per group element in table order.
pub fn parse_rep_catalog<T: Real>(json: &str) -> Result<Vec<RepCatalogEntry<T>>> {
    let file: RepFile = serde_json::from_str(json).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    file.entries
        .into_iter()
        .map(|e| {
            let group = Arc::new(FiniteGroup::from_text(&e.group)?);
            let images = e.elements.iter().map(CMatrix::from_pairs).collect::<Result<Vec<_>>>()?;
            Ok(RepCatalogEntry { name: e.name, rep: FiniteRep::new(group, images)?, nontrivial_irrep_dims: e.dims })
        })
        .collect()
}

pub fn rep_catalog_to_json<T: Real>(entries: &[RepCatalogEntry<T>]) -> String {
    let file = RepFile {
        entries: entries
            .iter()
            .map(|e| RepFileEntry {
                name: e.name.clone(),
                group: e.rep.group().to_text(),
                elements: e.rep.images().iter().map(CMatrix::to_pairs).collect(),
                dims: e.nontrivial_irrep_dims.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DihedralStep {
    pub rotation_order: usize,
    pub group_order: usize,
    /// Smallest `ℓ_op` over the non-identity elements, as measured.
    pub min_nonzero_ell_op: f64,
    /// `2 sin(π/m)` for rotation order `m`.
    pub predicted: f64,
    /// The closure of the two generators has exactly the constructed elements.
    pub closed: bool,
    /// Every element of the previous step is an element of this one.
    pub contains_previous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DihedralChain {
    pub steps: Vec<DihedralStep>,
    pub strictly_decreasing: bool,
}

/// `D_m ⊂ SO(3)` for `m = n0·2^j`, `j = 0..=k`: rotations about the z-axis
/// and the half-turn about the x-axis.
pub fn dihedral_chain_demo(n0: usize, k: usize) -> Result<DihedralChain> {
    if n0 < 3 || k < 1 {
        return Err(invalid("dihedral_chain_demo needs n0 >= 3 and k >= 1"));
    }
    if k >= 20 || n0.checked_shl(k as u32).is_none_or(|m| m > 1 << 12) {
        return Err(invalid("rotation order n0·2^k must stay at most 4096"));
    }
    let flip = rotation::<f64>(&[1.0, 0.0, 0.0], std::f64::consts::PI);
    let mut steps = Vec::new();
    let mut previous: Option<Vec<CMatrix<f64>>> = None;
    for j in 0..=k {
        let m = n0 << j;
        let elems: Vec<CMatrix<f64>> = (0..m)
            .flat_map(|r| {
                let rot = rotation::<f64>(&[0.0, 0.0, 1.0], std::f64::consts::TAU * r as f64 / m as f64);
                let reflected = rot.matmul(&flip).expect("3x3");
                [rot, reflected]
            })
            .collect();
        let units = elems.iter().map(|e| UnitaryMatrix::new(e.clone(), "dihedral")).collect::<Result<Vec<_>>>()?;
        let min_ell = units.iter().map(ell_op).filter(|&l| l > DEFAULT_MERGE_EPS).fold(f64::INFINITY, f64::min);
        let closed = match group_closure(&[units[2].clone(), units[1].clone()], DEFAULT_CLOSURE_CAP, DEFAULT_MERGE_EPS)? {
            ClosureOutcome::Group(g) => g.order() == 2 * m && elems.iter().all(|e| g.index_of(e).is_some()),
            ClosureOutcome::NonClosure(_) => false,
        };
        let contains_previous = previous.as_ref().is_none_or(|prev| {
            prev.iter().all(|p| elems.iter().any(|e| e.max_abs_diff(p).expect("3x3") <= 1e-10))
        });
        steps.push(DihedralStep {
            rotation_order: m,
            group_order: 2 * m,
            min_nonzero_ell_op: min_ell,
            predicted: 2.0 * (std::f64::consts::PI / m as f64).sin(),
            closed,
            contains_previous,
        });
        previous = Some(elems);
    }
    let strictly_decreasing = steps.windows(2).all(|w| w[1].min_nonzero_ell_op < w[0].min_nonzero_ell_op);
    Ok(DihedralChain { steps, strictly_decreasing })
}
