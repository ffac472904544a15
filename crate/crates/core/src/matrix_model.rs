//! Seeded finite-dimensional unitaries: Haar samples, prescribed traces and
//! Haar corners. Large independent samples are approximately free.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{householder_qr, CMatrix, SVD_OP_NORM_MAX_DIM};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::{Complex, Real};
use crate::word::{Carrier, GroupCarrier};
use crate::algebra::{ell_bar_from_trace, ell_from_trace};

/// How a unitary was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub construction: String,
    pub seed: Option<u64>,
}

impl Provenance {
    fn new(construction: impl Into<String>, seed: Option<u64>) -> Self {
        Self { construction: construction.into(), seed }
    }
}

/// A square matrix with `‖U*U − I‖_op` within the unitarity tolerance of `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryMatrix<T: Real> {
    matrix: CMatrix<T>,
    provenance: Provenance,
}

impl<T: Real> UnitaryMatrix<T> {
    /// Validates unitarity at [`Real::unitarity_tol`].
    pub fn new(matrix: CMatrix<T>, construction: impl Into<String>) -> Result<Self> {
        Self::with_tolerance(matrix, construction, T::unitarity_tol())
    }

    pub fn with_tolerance(matrix: CMatrix<T>, construction: impl Into<String>, tol: T) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { left: matrix.rows(), right: matrix.cols() });
        }
        if matrix.rows() == 0 {
            return Err(invalid("empty matrix"));
        }
        let deviation = unitarity_deviation(&matrix);
        if !(deviation <= tol) {
            return Err(Error::NotUnitary { deviation: deviation.as_f64(), tol: tol.as_f64() });
        }
        Ok(Self { matrix, provenance: Provenance::new(construction, None) })
    }

    fn trusted(matrix: CMatrix<T>, provenance: Provenance) -> Self {
        Self { matrix, provenance }
    }

    pub fn identity(n: usize) -> Self {
        Self::trusted(CMatrix::identity(n), Provenance::new("identity", None))
    }

    pub fn dimension(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn adjoint(&self) -> Self {
        Self::trusted(self.matrix.adjoint(), Provenance::new("derived", None))
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        Ok(Self::trusted(self.matrix.matmul(&rhs.matrix)?, Provenance::new("derived", None)))
    }

    pub fn normalized_trace(&self) -> Complex<T> {
        self.matrix.normalized_trace().expect("square")
    }

    /// `‖1 − U‖₂` for the normalized trace.
    pub fn ell(&self) -> T {
        ell_from_trace(self.normalized_trace())
    }

    pub fn ell_bar(&self) -> T {
        ell_bar_from_trace(self.normalized_trace())
    }

    pub fn unitarity_deviation(&self) -> T {
        unitarity_deviation(&self.matrix)
    }

    pub fn cast<S: Real>(&self) -> UnitaryMatrix<S> {
        UnitaryMatrix { matrix: self.matrix.cast(), provenance: self.provenance.clone() }
    }
}

/// `‖U*U − I‖_op`; above [`SVD_OP_NORM_MAX_DIM`] the Frobenius norm is used,
/// which bounds it from above.
pub fn unitarity_deviation<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.rows();
    let e = m.adjoint().matmul(m).and_then(|p| p.sub(&CMatrix::identity(n)));
    match e {
        Ok(e) if n <= SVD_OP_NORM_MAX_DIM => e.op_norm(),
        Ok(e) => e.frobenius_norm(),
        Err(_) => T::infinity(),
    }
}

impl<T: Real> Carrier for UnitaryMatrix<T> {
    fn unit_like(&self) -> Self {
        Self::identity(self.dimension())
    }
    fn try_mul(&self, rhs: &Self) -> Result<Self> {
        self.mul(rhs)
    }
    fn try_inverse(&self) -> Result<Self> {
        Ok(self.adjoint())
    }
}

/// Entrywise within the unitarity tolerance of the identity.
impl<T: Real> GroupCarrier for UnitaryMatrix<T> {
    fn is_unit(&self) -> bool {
        let tol = T::unitarity_tol().sqrt();
        self.matrix.max_abs_diff(&CMatrix::identity(self.dimension())).is_ok_and(|d| d <= tol)
    }
}

/// Unit-modulus eigenvalues with weights summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSpec {
    entries: Vec<(Complex<f64>, f64)>,
}

impl SpectralSpec {
    pub fn new(entries: Vec<(Complex<f64>, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("empty spectrum"));
        }
        for (z, w) in &entries {
            if (z.norm() - 1.0).abs() > 1e-12 {
                return Err(invalid(format!("eigenvalue {z} is not of unit modulus")));
            }
            if !(0.0..=1.0).contains(w) {
                return Err(invalid(format!("weight {w} outside [0, 1]")));
            }
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("weights sum to {total}")));
        }
        Ok(Self { entries })
    }

    /// `+1` with weight `(1+α)/2`, `−1` with the rest.
    pub fn plus_minus(alpha: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&alpha) {
            return Err(invalid(format!("alpha = {alpha} outside [-1, 1]")));
        }
        let p = (1.0 + alpha) / 2.0;
        Self::new(vec![(Complex::new(1.0, 0.0), p), (Complex::new(-1.0, 0.0), 1.0 - p)])
    }

    pub fn entries(&self) -> &[(Complex<f64>, f64)] {
        &self.entries
    }

    /// Integer multiplicities summing to `n` by largest remainder; ties go
    /// to the earlier entry.
    pub fn multiplicities(&self, n: usize) -> Vec<usize> {
        let exact: Vec<f64> = self.entries.iter().map(|e| e.1 * n as f64).collect();
        let mut mult: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
        let assigned: usize = mult.iter().sum();
        let mut order: Vec<usize> = (0..exact.len()).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        for &i in order.iter().take(n.saturating_sub(assigned)) {
            mult[i] += 1;
        }
        mult
    }
}

/// Trace realized by a `±1` spectrum: `numerator / denominator` exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizedTrace {
    pub numerator: i64,
    pub denominator: usize,
}

impl RealizedTrace {
    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

fn gaussian_matrix<T: Real>(n: usize, seed: u64) -> CMatrix<T> {
    let mut rng = rng_from_seed(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex::new(T::lit(re * scale), T::lit(im * scale))
    })
}

/// Haar unitary: the `Q` factor of an i.i.d. complex Gaussian matrix with
/// the phases of `R`'s diagonal moved into `Q`. Entries are drawn row by
/// row from ChaCha8 seeded with `seed`.
pub fn sample_haar<T: Real>(n: usize, seed: u64) -> Result<UnitaryMatrix<T>> {
    if n == 0 {
        return Err(invalid("sample_haar needs N >= 1"));
    }
    let z = gaussian_matrix::<T>(n, seed);
    let (q, rdiag) = householder_qr(&z)?;
    let phases: Vec<Complex<T>> = rdiag
        .iter()
        .map(|r| if r.norm() > T::zero() { r / r.norm() } else { Complex::new(T::one(), T::zero()) })
        .collect();
    let u = CMatrix::from_fn(n, n, |i, j| q.get(i, j) * phases[j]);
    Ok(UnitaryMatrix::trusted(u, Provenance::new("haar", Some(seed))))
}

/// `W·diag(λ)·W*` with `W = sample_haar(n, seed)`.
fn conjugated_diagonal<T: Real>(eigs: &[Complex<T>], seed: u64) -> Result<CMatrix<T>> {
    let n = eigs.len();
    let w = sample_haar::<T>(n, seed)?.into_matrix();
    let wd = CMatrix::from_fn(n, n, |i, j| w.get(i, j) * eigs[j]);
    wd.matmul(&w.adjoint())
}

/// Unitary whose spectrum follows `spec` (multiplicities by largest
/// remainder), in a Haar-random eigenbasis.
pub fn unitary_with_spectrum<T: Real>(spec: &SpectralSpec, n: usize, seed: u64) -> Result<UnitaryMatrix<T>> {
    if n == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let mut eigs = Vec::with_capacity(n);
    for ((z, _), m) in spec.entries().iter().zip(spec.multiplicities(n)) {
        eigs.extend(std::iter::repeat_n(Complex::new(T::lit(z.re), T::lit(z.im)), m));
    }
    let m = conjugated_diagonal(&eigs, seed)?;
    Ok(UnitaryMatrix::trusted(m, Provenance::new("spectrum", Some(seed))))
}

/// Eigenvalue `+1` with multiplicity `round(N(1+α)/2)` and `−1` otherwise,
/// conjugated by `sample_haar(n, seed)`. A single-signed spectrum gives
/// exactly `±I`.
pub fn unitary_with_trace<T: Real>(alpha: f64, n: usize, seed: u64) -> Result<(UnitaryMatrix<T>, RealizedTrace)> {
    if n < 2 {
        return Err(invalid("unitary_with_trace needs N >= 2"));
    }
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha = {alpha} outside [-1, 1]")));
    }
    let plus = ((n as f64) * (1.0 + alpha) / 2.0).round() as usize;
    let realized = RealizedTrace { numerator: 2 * plus as i64 - n as i64, denominator: n };
    let prov = Provenance::new(format!("prescribed-trace(alpha={alpha})"), Some(seed));
    if plus == n || plus == 0 {
        let sign = if plus == n { T::one() } else { -T::one() };
        let m = CMatrix::identity(n).scale(Complex::new(sign, T::zero()));
        return Ok((UnitaryMatrix::trusted(m, prov), realized));
    }
    let eigs: Vec<Complex<T>> =
        (0..n).map(|i| Complex::new(if i < plus { T::one() } else { -T::one() }, T::zero())).collect();
    Ok((UnitaryMatrix::trusted(conjugated_diagonal(&eigs, seed)?, prov), realized))
}

/// Haar unitary of size `k = round(tN)` on a corner, identity on the
/// complement, in a Haar-random basis. Sub-seeds 1 and 2 of `seed` drive
/// the corner and the basis.
pub fn corner_haar<T: Real>(t: f64, n: usize, seed: u64) -> Result<UnitaryMatrix<T>> {
    if !(t > 0.0 && t < 1.0) {
        return Err(invalid(format!("corner fraction t = {t} outside (0, 1)")));
    }
    let k = (t * n as f64).round() as usize;
    if k < 1 || k >= n {
        return Err(invalid(format!("corner size round(tN) = {k} must lie in [1, N)")));
    }
    let corner = sample_haar::<T>(k, derive_seed(seed, 1))?.into_matrix();
    let block = corner.direct_sum(&CMatrix::identity(n - k));
    let w = sample_haar::<T>(n, derive_seed(seed, 2))?.into_matrix();
    let m = w.matmul(&block)?.matmul(&w.adjoint())?;
    Ok(UnitaryMatrix::trusted(m, Provenance::new(format!("corner(t={t})"), Some(seed))))
}

pub fn normalized_trace<T: Real>(a: &CMatrix<T>) -> Result<Complex<T>> {
    a.normalized_trace()
}

/// `‖A − B‖₂ = √τ((A−B)*(A−B))`.
pub fn two_norm_dist<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<T> {
    if !a.is_square() {
        return Err(invalid("two_norm_dist needs square matrices"));
    }
    let d = a.sub(b)?;
    Ok(d.frobenius_norm() / T::from_usize(a.rows()).unwrap().sqrt())
}

pub fn op_norm<T: Real>(a: &CMatrix<T>) -> T {
    a.op_norm()
}

/// Deviations of a pair from the free product and commutator rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreenessReport {
    pub dimension: usize,
    pub trace_u: Complex<f64>,
    pub trace_v: Complex<f64>,
    /// `|τ(UV) − τ(U)τ(V)|`.
    pub d1: f64,
    /// `|τ(UVU*V*) − (1 − (1−|τ(U)|²)(1−|τ(V)|²))|`.
    pub d2: f64,
}

pub fn freeness_report<T: Real>(u: &UnitaryMatrix<T>, v: &UnitaryMatrix<T>) -> Result<FreenessReport> {
    let n = u.dimension();
    if v.dimension() != n {
        return Err(Error::DimensionMismatch { left: n, right: v.dimension() });
    }
    let (um, vm) = (u.matrix(), v.matrix());
    let nf = T::from_usize(n).unwrap();
    let (tu, tv) = (u.normalized_trace(), v.normalized_trace());
    let uv = um.matmul(vm)?;
    let vu = vm.matmul(um)?;
    let tuv = uv.normalized_trace()?;
    // τ(UV (VU)*) = (1/N) Σ (UV)_ij conj((VU)_ij)
    let tcomm = uv.data().iter().zip(vu.data()).fold(Complex::new(T::zero(), T::zero()), |s, (&a, &b)| s + a * b.conj()) / nf;
    let one = T::one();
    let rhs = one - (one - tu.norm_sqr()) * (one - tv.norm_sqr());
    let c64 = |z: Complex<T>| Complex::new(z.re.as_f64(), z.im.as_f64());
    Ok(FreenessReport {
        dimension: n,
        trace_u: c64(tu),
        trace_v: c64(tv),
        d1: (tuv - tu * tv).norm().as_f64(),
        d2: (tcomm - Complex::new(rhs, T::zero())).norm().as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type U = UnitaryMatrix<f64>;

    #[test]
    fn haar_basic_properties() {
        let one = sample_haar::<f64>(1, 3).unwrap();
        assert!((one.matrix().get(0, 0).norm() - 1.0).abs() < 1e-15);
        assert!(sample_haar::<f64>(0, 3).is_err());
        let a = sample_haar::<f64>(17, 99).unwrap();
        assert_eq!(a, sample_haar::<f64>(17, 99).unwrap());
        assert_ne!(a, sample_haar::<f64>(17, 100).unwrap());
        assert!(a.unitarity_deviation() <= 1e-10);
    }

    #[test]
    fn haar_traces_are_small() {
        for seed in 0..10 {
            let u = sample_haar::<f64>(256, seed).unwrap();
            assert!(u.unitarity_deviation() <= 1e-10);
            assert!(u.normalized_trace().norm() <= 10.0 / 256.0, "seed {seed}");
        }
    }

    #[test]
    fn haar_corner_entry_is_uniform() {
        // |U_00|² is Uniform(0, 1) for Haar U in U(2).
        let mut xs: Vec<f64> = (0..10_000u64).map(|s| sample_haar::<f64>(2, s).unwrap().matrix().get(0, 0).norm_sqr()).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| ((i as f64 + 1.0) / n - x).abs().max((x - i as f64 / n).abs()))
            .fold(0.0, f64::max);
        assert!(ks < 0.05, "KS distance {ks}");
    }

    #[test]
    fn haar_is_thread_independent() {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| sample_haar::<f64>(150, 5).unwrap());
        let b = four.install(|| sample_haar::<f64>(150, 5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn prescribed_trace_examples() {
        let (u, r) = unitary_with_trace::<f64>(0.5, 4, 1).unwrap();
        assert_eq!(r, RealizedTrace { numerator: 2, denominator: 4 });
        assert_eq!(r.value(), 0.5);
        assert!((u.normalized_trace().re - 0.5).abs() < 1e-14);
        // Eigenvalues ±1: U² = I.
        let u2 = u.mul(&u).unwrap();
        assert!(u2.matrix().max_abs_diff(&CMatrix::identity(4)).unwrap() < 1e-13);
        let (id, r) = unitary_with_trace::<f64>(1.0, 6, 1).unwrap();
        assert_eq!(id.matrix(), &CMatrix::identity(6));
        assert_eq!(r.value(), 1.0);
        assert!(unitary_with_trace::<f64>(0.5, 1, 1).is_err());

        let (u, r) = unitary_with_trace::<f64>(0.9, 1000, 7).unwrap();
        assert_eq!(r.value(), 0.9);
        assert!((u.ell() - 0.2f64.sqrt()).abs() < 1e-12);
        assert!(u.unitarity_deviation() <= 1e-10);
    }

    #[test]
    fn corner_examples() {
        assert!(corner_haar::<f64>(0.999, 10, 1).is_err());
        assert!(corner_haar::<f64>(0.01, 10, 1).is_err());
        assert!(corner_haar::<f64>(0.0, 10, 1).is_err());
        let u = corner_haar::<f64>(0.2, 500, 42).unwrap();
        assert!(u.unitarity_deviation() <= 1e-10);
        assert!(u.normalized_trace().re >= 0.75);
        assert!((u.ell() - 0.4f64.sqrt()).abs() < 0.05);
    }

    #[test]
    fn distance_and_norm_examples() {
        let i = CMatrix::<f64>::identity(3);
        assert_eq!(normalized_trace(&i).unwrap(), Complex::new(1.0, 0.0));
        assert!((two_norm_dist(&i, &i.scale(Complex::new(-1.0, 0.0))).unwrap() - 2.0).abs() < 1e-15);
        let w = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let d = CMatrix::diagonal(&[Complex::new(1.0, 0.0), w]).sub(&CMatrix::identity(2)).unwrap();
        assert!((op_norm(&d) - 3f64.sqrt()).abs() < 1e-14);
        assert!(two_norm_dist(&i, &CMatrix::identity(2)).is_err());
        for seed in 0..5 {
            let u = sample_haar::<f64>(12, seed).unwrap();
            let dist = two_norm_dist(&CMatrix::identity(12), u.matrix()).unwrap();
            assert!((dist * dist - (2.0 - 2.0 * u.normalized_trace().re)).abs() < 1e-12);
        }
    }

    #[test]
    fn freeness_examples() {
        let u = sample_haar::<f64>(64, 1).unwrap();
        let r = freeness_report(&u, &U::identity(64)).unwrap();
        assert!(r.d1 < 1e-15 && r.d2 < 1e-14);
        let r = freeness_report(&u, &u).unwrap();
        // τ(UUU*U*) = 1, while the free prediction is near 0.
        assert!(r.d2 > 0.9);
        for seed in 0..10 {
            let u = sample_haar::<f64>(256, derive_seed(seed, 0)).unwrap();
            let v = sample_haar::<f64>(256, derive_seed(seed, 1)).unwrap();
            let r = freeness_report(&u, &v).unwrap();
            assert!(r.d1 <= 0.05 && r.d2 <= 0.05, "{r:?}");
        }
        assert!(freeness_report(&u, &U::identity(3)).is_err());
    }

    #[test]
    fn validation_rejects_non_unitary() {
        let m = CMatrix::<f64>::identity(3).scale(Complex::new(1.1, 0.0));
        assert!(matches!(U::new(m, "explicit"), Err(Error::NotUnitary { .. })));
        assert!(U::new(CMatrix::zeros(2, 3), "explicit").is_err());
        let h = sample_haar::<f64>(5, 2).unwrap();
        assert!(U::new(h.matrix().clone(), "explicit").is_ok());
    }

    #[test]
    fn spectral_spec_rounding() {
        let s = SpectralSpec::plus_minus(0.5).unwrap();
        assert_eq!(s.multiplicities(4), vec![3, 1]);
        let third = 1.0 / 3.0;
        let s = SpectralSpec::new(vec![
            (Complex::new(1.0, 0.0), third),
            (Complex::from_polar(1.0, 2.0), third),
            (Complex::new(-1.0, 0.0), 1.0 - 2.0 * third),
        ])
        .unwrap();
        assert_eq!(s.multiplicities(10).iter().sum::<usize>(), 10);
        assert!(SpectralSpec::new(vec![(Complex::new(2.0, 0.0), 1.0)]).is_err());
        let u = unitary_with_spectrum::<f64>(&s, 9, 3).unwrap();
        let tau = u.normalized_trace();
        let expect = (Complex::new(1.0, 0.0) * 3.0 + Complex::from_polar(1.0, 2.0) * 3.0 - 3.0) / 9.0;
        assert!((tau - expect).norm() < 1e-13);
    }

    #[test]
    fn single_precision_haar() {
        let u = sample_haar::<f32>(32, 4).unwrap();
        assert!(u.unitarity_deviation() <= 1e-4);
    }
}
