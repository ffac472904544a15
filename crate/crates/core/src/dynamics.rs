//! Decay of `ℓ(w_n(u, v))` along `w_1 = x`, `w_{n+1} = [w_n, yⁿxy⁻ⁿ]`.
//!
//! In the exact model `u = α + i√(1−α²)·s` lives on the `ℤ/2` factor and
//! `v` is the generator of the `ℤ` factor of `ℤ/2 ∗ ℤ`. Traces come from
//! up to three independent routes:
//!
//! * expansion: the elements are multiplied out in the group algebra while
//!   their supports fit the cap (the support of `w_n` grows roughly like
//!   the square of the previous one);
//! * walk-sum: `w_n(u, v)` is a product of `α ± i√(1−α²)·s_h` with the free
//!   involutions `s_h = vʰ s v⁻ʰ`, whose trace is summed over cancelling
//!   walks in polynomial time;
//! * recursion: `τ_{n+1} = 1 − (1 − |τ_n|²)(1 − |τ(u)|²)`, valid because the
//!   conjugates `vⁿuv⁻ⁿ` are free from each other and from `w_n`.
//!
//! Rows past the reach of the first two are flagged as extrapolated.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{
    ell_bar_from_trace, ell_from_trace, free_involution_trace, AlgebraElement, FreeProductGroup, InvolutionFactor,
    DEFAULT_SUPPORT_CAP, MAX_INVOLUTION_FACTORS,
};
use crate::error::{invalid, Error, Result};
use crate::matrix_model::{sample_haar, unitary_with_trace, Provenance, UnitaryMatrix};
use crate::rng::derive_seed;
use crate::scalar::{Complex, Real};
use crate::word::{w_sequence, FreeWord, X, Y};

pub const DEFAULT_N_MAX: usize = 7;
/// Tolerance on the bound chain in the exact model.
pub const EXACT_SLACK: f64 = 1e-10;
/// Tolerance on the bound chain in the matrix model.
pub const DEFAULT_MATRIX_SLACK: f64 = 0.05;
/// Largest `n` accepted by the decay curves.
pub const MAX_STEPS: usize = 1000;

/// Which route produced a row's trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceSource {
    Expansion,
    WalkSum,
    RecursionExtrapolated,
    Matrix,
}

impl TraceSource {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Expansion => "expansion",
            Self::WalkSum => "walk-sum",
            Self::RecursionExtrapolated => "recursion-extrapolated",
            Self::Matrix => "matrix",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub n: usize,
    pub ell: f64,
    pub ell_bar: f64,
    /// `(1/√2)^{n−1}·ℓ̄(u)ⁿ`
    pub lower: f64,
    /// `(√2)^{n−1}·ℓ(u)ⁿ`
    pub upper: f64,
    pub in_bounds: bool,
    pub trace: Complex<f64>,
    pub recursion_trace: f64,
    pub source: TraceSource,
    /// Largest disagreement between the exact routes that reached this row.
    pub cross_check: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecayModel {
    Exact { carrier: String, support_cap: usize },
    Matrix { dimension: usize, u: Provenance, v: Provenance },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub model: DecayModel,
    pub input_trace: Complex<f64>,
    pub ell_u: f64,
    pub ell_bar_u: f64,
    pub slack: f64,
    pub rows: Vec<DecayRow>,
}

/// `((1/√2)^{n−1}·ℓ̄ⁿ, (√2)^{n−1}·ℓⁿ)`.
pub fn chain_bounds(n: usize, ell_u: f64, ell_bar_u: f64) -> (f64, f64) {
    let k = (n - 1) as i32;
    let r2 = std::f64::consts::SQRT_2;
    (ell_bar_u.powi(n as i32) / r2.powi(k), r2.powi(k) * ell_u.powi(n as i32))
}

/// `τ_1 = τ(u)`, `τ_{n+1} = 1 − (1 − |τ_n|²)(1 − |τ(u)|²)`.
pub fn recursion_traces(tau_u: Complex<f64>, n_max: usize) -> Vec<Complex<f64>> {
    let a2 = tau_u.norm_sqr();
    let mut out = Vec::with_capacity(n_max);
    let mut t = tau_u;
    for _ in 0..n_max {
        out.push(t);
        t = Complex::new(1.0 - (1.0 - t.norm_sqr()) * (1.0 - a2), 0.0);
    }
    out
}

impl DecayReport {
    /// Columns `n, ell, ell_bar, lower, upper, in_bounds`, preceded by
    /// `#` lines describing the model and the trace route of each row.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        match &self.model {
            DecayModel::Exact { carrier, support_cap } => {
                let _ = writeln!(s, "# model: exact {carrier} (support cap {support_cap})");
            }
            DecayModel::Matrix { dimension, u, v } => {
                let _ = writeln!(
                    s,
                    "# model: matrix N={dimension} u={}{} v={}{}",
                    u.construction,
                    u.seed.map(|x| format!(" seed={x}")).unwrap_or_default(),
                    v.construction,
                    v.seed.map(|x| format!(" seed={x}")).unwrap_or_default()
                );
            }
        }
        let _ = writeln!(s, "# input trace: {} {}", self.input_trace.re, self.input_trace.im);
        let _ = writeln!(s, "# ell(u): {} ell_bar(u): {} slack: {}", self.ell_u, self.ell_bar_u, self.slack);
        for r in &self.rows {
            if r.source == TraceSource::RecursionExtrapolated {
                let _ = writeln!(s, "# n={} recursion-extrapolated", r.n);
            }
        }
        s.push_str("n,ell,ell_bar,lower,upper,in_bounds\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{},{}", r.n, r.ell, r.ell_bar, r.lower, r.upper, r.in_bounds);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn all_in_bounds(&self) -> bool {
        self.rows.iter().all(|r| r.in_bounds)
    }
}

fn c64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.as_f64(), z.im.as_f64())
}

/// `u` and `v` of the exact model in `ℤ/2 ∗ ℤ`.
pub fn exact_pair<T: Real>(alpha: T, support_cap: usize) -> Result<(AlgebraElement<T>, AlgebraElement<T>)> {
    let amb = Arc::new(FreeProductGroup::z2_z().with_support_cap(support_cap));
    Ok((AlgebraElement::order_two_unitary(&amb, alpha, 0)?, AlgebraElement::haar_generator(&amb, 1)?))
}

/// `τ(word(u, v))` in the exact model by the walk-sum. `None` when the
/// word has too many `x` letters for it.
pub fn walk_sum_trace<T: Real>(word: &FreeWord, alpha: T) -> Result<Option<Complex<T>>> {
    let beta = (T::one() - alpha * alpha).sqrt();
    let mut height: i64 = 0;
    let mut factors = Vec::new();
    for (g, e) in word.letters() {
        match g {
            X => {
                if factors.len() == MAX_INVOLUTION_FACTORS {
                    return Ok(None);
                }
                // u = α + iβ s, u* = α − iβ s, at the current height.
                let sign = if e > 0 { T::one() } else { -T::one() };
                factors.push(InvolutionFactor {
                    scalar: Complex::new(alpha, T::zero()),
                    coeff: Complex::new(T::zero(), sign * beta),
                    letter: height,
                });
            }
            Y => height += e,
            other => return Err(Error::MissingGenerator(other)),
        }
    }
    if height != 0 {
        // A nonzero power of v survives: the trace vanishes.
        return Ok(Some(Complex::new(T::zero(), T::zero())));
    }
    Ok(free_involution_trace(&factors))
}

/// `τ(word(u, v))` in the exact model by multiplying out the two halves
/// of the word (split at the middle `x` letter) and pairing them.
pub fn expansion_trace<T: Real>(word: &FreeWord, alpha: T, support_cap: usize) -> Result<Complex<T>> {
    let (u, v) = exact_pair(alpha, support_cap)?;
    let letters: Vec<_> = word.letters().collect();
    let xs = letters.iter().filter(|l| l.0 == X).count();
    let mut seen = 0;
    let mut cut = letters.len();
    for (i, l) in letters.iter().enumerate() {
        if seen == xs / 2 {
            cut = i;
            break;
        }
        if l.0 == X {
            seen += 1;
        }
    }
    let prefix = FreeWord::reduce(letters[..cut].iter().copied());
    let suffix = FreeWord::reduce(letters[cut..].iter().copied());
    let assignment = [u, v];
    let p = prefix.substitute(&assignment)?;
    let s = suffix.substitute(&assignment)?;
    p.trace_of_product(&s)
}

enum Expansion<T: Real> {
    Materialized(AlgebraElement<T>),
    /// `w_n = a·b`, known only through its factors.
    Pair(AlgebraElement<T>, AlgebraElement<T>),
    Exhausted,
}

pub fn decay_curve_exact<T: Real>(alpha: T, n_max: usize) -> Result<DecayReport> {
    decay_curve_exact_capped(alpha, n_max, DEFAULT_SUPPORT_CAP)
}

pub fn decay_curve_exact_capped<T: Real>(alpha: T, n_max: usize, support_cap: usize) -> Result<DecayReport> {
    if !(alpha.abs() < T::one()) {
        return Err(invalid(format!("alpha = {alpha} must satisfy |alpha| < 1")));
    }
    if n_max == 0 || n_max > MAX_STEPS {
        return Err(invalid(format!("n_max = {n_max} outside [1, {MAX_STEPS}]")));
    }
    let (u, v) = exact_pair(alpha, support_cap)?;
    let tau_u = c64(u.trace());
    let (ell_u, ell_bar_u) = (ell_from_trace(tau_u), ell_bar_from_trace(tau_u));
    let recursion = recursion_traces(tau_u, n_max);
    let v_star = v.star();

    let mut stage = Expansion::Materialized(u.clone());
    let mut conj = u.clone();
    let mut walk_open = true;
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let expanded = match &stage {
            Expansion::Materialized(w) => Some(w.trace()),
            Expansion::Pair(a, b) => Some(a.trace_of_product(b)?),
            Expansion::Exhausted => None,
        };
        let walked = if walk_open { walk_sum_trace(&w_sequence(n)?, alpha)? } else { None };
        walk_open = walked.is_some();

        let (trace, source, cross_check) = match (expanded, walked) {
            (Some(e), Some(w)) => (c64(e), TraceSource::Expansion, Some((e - w).norm().as_f64())),
            (Some(e), None) => (c64(e), TraceSource::Expansion, None),
            (None, Some(w)) => (c64(w), TraceSource::WalkSum, None),
            (None, None) => (recursion[n - 1], TraceSource::RecursionExtrapolated, None),
        };
        rows.push(make_row(n, trace, recursion[n - 1].re, source, cross_check, ell_u, ell_bar_u, EXACT_SLACK));

        if n < n_max {
            stage = match stage {
                Expansion::Materialized(w) if 2 * w.support_len() <= support_cap => {
                    conj = v.multiply(&conj)?.multiply(&v_star)?;
                    let a = w.multiply(&conj)?;
                    let b = conj.multiply(&w)?.star();
                    if a.support_len().saturating_mul(b.support_len()) <= support_cap {
                        Expansion::Materialized(a.multiply(&b)?)
                    } else if a.support_len() + b.support_len() <= support_cap {
                        Expansion::Pair(a, b)
                    } else {
                        Expansion::Exhausted
                    }
                }
                _ => Expansion::Exhausted,
            };
        }
    }
    Ok(DecayReport {
        model: DecayModel::Exact { carrier: "Z/2 * Z".into(), support_cap },
        input_trace: tau_u,
        ell_u,
        ell_bar_u,
        slack: EXACT_SLACK,
        rows,
    })
}

#[allow(clippy::too_many_arguments)]
fn make_row(
    n: usize,
    trace: Complex<f64>,
    recursion_trace: f64,
    source: TraceSource,
    cross_check: Option<f64>,
    ell_u: f64,
    ell_bar_u: f64,
    slack: f64,
) -> DecayRow {
    let (lower, upper) = chain_bounds(n, ell_u, ell_bar_u);
    let ell = ell_from_trace(trace);
    DecayRow {
        n,
        ell,
        ell_bar: ell_bar_from_trace(trace),
        lower,
        upper,
        in_bounds: lower - slack <= ell && ell <= upper + slack,
        trace,
        recursion_trace,
        source,
        cross_check,
    }
}

/// The same curve for matrices. The conjugates `VⁿUV⁻ⁿ` are updated one
/// step at a time; the last trace is read off without forming `w_{n_max}`.
pub fn decay_curve_matrix<T: Real>(
    u: &UnitaryMatrix<T>,
    v: &UnitaryMatrix<T>,
    n_max: usize,
    slack: f64,
) -> Result<DecayReport> {
    let dim = u.dimension();
    if v.dimension() != dim {
        return Err(Error::DimensionMismatch { left: dim, right: v.dimension() });
    }
    if n_max == 0 || n_max > MAX_STEPS {
        return Err(invalid(format!("n_max = {n_max} outside [1, {MAX_STEPS}]")));
    }
    let tau_u = c64(u.normalized_trace());
    let (ell_u, ell_bar_u) = (ell_from_trace(tau_u), ell_bar_from_trace(tau_u));
    let recursion = recursion_traces(tau_u, n_max);
    let nf = T::from_usize(dim).unwrap();
    let (vm, vh) = (v.matrix(), v.matrix().adjoint());

    let mut traces = vec![tau_u];
    let mut w = u.matrix().clone();
    let mut conj = u.matrix().clone();
    for n in 1..n_max {
        conj = vm.matmul(&conj)?.matmul(&vh)?;
        let a = w.matmul(&conj)?;
        let b = conj.matmul(&w)?;
        if n + 1 == n_max {
            // τ(a·b*) = (1/N) Σ a_ij conj(b_ij)
            let t = a.data().iter().zip(b.data()).fold(Complex::new(T::zero(), T::zero()), |s, (&x, &y)| s + x * y.conj());
            traces.push(c64(t / nf));
        } else {
            w = a.matmul(&b.adjoint())?;
            traces.push(c64(w.normalized_trace()?));
        }
    }
    let rows = traces
        .iter()
        .enumerate()
        .map(|(i, &t)| make_row(i + 1, t, recursion[i].re, TraceSource::Matrix, None, ell_u, ell_bar_u, slack))
        .collect();
    Ok(DecayReport {
        model: DecayModel::Matrix { dimension: dim, u: u.provenance().clone(), v: v.provenance().clone() },
        input_trace: tau_u,
        ell_u,
        ell_bar_u,
        slack,
        rows,
    })
}

/// `U = unitary_with_trace(α, N, derive_seed(seed, 0))` and
/// `V = sample_haar(N, derive_seed(seed, 1))`.
pub fn decay_curve_matrix_seeded(alpha: f64, dim: usize, seed: u64, n_max: usize, slack: f64) -> Result<DecayReport> {
    let (u, _) = unitary_with_trace::<f64>(alpha, dim, derive_seed(seed, 0))?;
    let v = sample_haar::<f64>(dim, derive_seed(seed, 1))?;
    decay_curve_matrix(&u, &v, n_max, slack)
}

/// The first `w_n` with `ℓ(w_n(u, v)) < ε` in the exact model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmallElement {
    pub n: usize,
    #[serde(serialize_with = "serialize_display")]
    pub word: FreeWord,
    pub ell: f64,
    pub trace: Complex<f64>,
    pub letter_len: u64,
}

fn serialize_display<S: serde::Serializer, D: std::fmt::Display>(d: &D, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(d)
}

/// Requires `3/4 < α < 1` (so that `ℓ(u) < 1/√2`) and `ε > 0`. Traces come
/// from the walk-sum; an `ε` whose answer lies beyond its reach is refused
/// with the index predicted by the recursion.
pub fn find_small_element<T: Real>(alpha: T, epsilon: T) -> Result<SmallElement> {
    if !(alpha > T::lit(0.75) && alpha < T::one()) {
        return Err(invalid(format!("need 3/4 < alpha < 1 (so that ell(u) < 1/sqrt 2), got {alpha}")));
    }
    if !(epsilon > T::zero()) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut n = 1;
    loop {
        let word = w_sequence(n)?;
        let Some(tau) = walk_sum_trace(&word, alpha)? else {
            let predicted = recursion_index(alpha.as_f64(), epsilon.as_f64());
            return Err(invalid(format!(
                "epsilon = {epsilon} needs n = {predicted} by the trace recursion, beyond the exact range n <= {}",
                n - 1
            )));
        };
        let ell = ell_from_trace(tau);
        if ell < epsilon {
            return Ok(SmallElement { n, letter_len: word.letter_len(), word, ell: ell.as_f64(), trace: c64(tau) });
        }
        n += 1;
    }
}

fn recursion_index(alpha: f64, epsilon: f64) -> usize {
    let mut t = alpha;
    let mut n = 1;
    while ell_from_trace(Complex::new(t, 0.0)) >= epsilon && n < usize::MAX / 2 {
        let next = 1.0 - (1.0 - t * t) * (1.0 - alpha * alpha);
        if next <= t {
            break;
        }
        t = next;
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The recursion evaluated independently, term by term.
    fn recursion_oracle(alpha: f64, n: usize) -> f64 {
        let mut t = alpha;
        for _ in 1..n {
            t = 1.0 - (1.0 - t * t) * (1.0 - alpha * alpha);
        }
        t
    }

    #[test]
    fn reference_values_at_point_nine() {
        // Frozen from the recursion oracle.
        assert!((recursion_oracle(0.9, 2) - 0.9639).abs() < 1e-15);
        let ells: Vec<f64> = (1..=5).map(|n| (2.0 - 2.0 * recursion_oracle(0.9, n)).sqrt()).collect();
        for (got, want) in ells.iter().zip([0.44721, 0.26870, 0.16414, 0.10084, 0.06208]) {
            assert!((got - want).abs() < 5e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn walk_sum_matches_expansion_on_short_words() {
        for alpha in [0.0, 0.3, -0.6, 0.9] {
            for n in 1..=3 {
                let w = w_sequence(n).unwrap();
                let ws = walk_sum_trace(&w, alpha).unwrap().unwrap();
                let ex = expansion_trace(&w, alpha, DEFAULT_SUPPORT_CAP).unwrap();
                assert!((ws - ex).norm() < 1e-13, "alpha {alpha} n {n}");
            }
            // A word with a surviving power of y.
            let w = FreeWord::reduce([(X, 1), (Y, 2), (X, -1)]);
            assert_eq!(walk_sum_trace(&w, alpha).unwrap(), Some(Complex::new(0.0, 0.0)));
            assert!(expansion_trace(&w, alpha, DEFAULT_SUPPORT_CAP).unwrap().norm() < 1e-15);
            // Not a w_n: [x, y x^2 y^-1 x]
            let w = FreeWord::reduce([(X, 1)]).commutator(&FreeWord::reduce([(Y, 1), (X, 2), (Y, -1), (X, 1)]));
            let ws = walk_sum_trace(&w, alpha).unwrap().unwrap();
            let ex = expansion_trace(&w, alpha, DEFAULT_SUPPORT_CAP).unwrap();
            assert!((ws - ex).norm() < 1e-13);
        }
    }

    #[test]
    fn exact_curve_examples() {
        let r = decay_curve_exact(0.9, 3).unwrap();
        assert!((r.rows[0].ell - 0.2f64.sqrt()).abs() < 1e-15);
        assert!((r.rows[1].ell - 0.26870).abs() < 5e-6);
        assert!(r.rows[1].lower <= 0.14143 && r.rows[1].lower >= 0.14142);
        assert!((r.rows[1].upper - 0.28284).abs() < 5e-6);
        assert!(r.all_in_bounds());
        for row in &r.rows {
            assert_eq!(row.source, TraceSource::Expansion);
            assert!(row.cross_check.unwrap() < 1e-13);
            assert!((row.trace.re - row.recursion_trace).abs() < 1e-12);
        }
        let r = decay_curve_exact(0.0, 4).unwrap();
        assert!((r.ell_u - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.rows.len(), 4);
        assert!(r.all_in_bounds());
        assert!(decay_curve_exact(1.0, 3).is_err());
        assert!(decay_curve_exact(0.5, 0).is_err());
    }

    #[test]
    fn small_cap_hands_over_to_walk_sum_then_recursion() {
        let r = decay_curve_exact_capped(0.8, 11, 1000).unwrap();
        let sources: Vec<_> = r.rows.iter().map(|x| x.source).collect();
        assert_eq!(sources[0], TraceSource::Expansion);
        assert!(sources.contains(&TraceSource::WalkSum));
        assert_eq!(sources[10], TraceSource::RecursionExtrapolated);
        for row in &r.rows {
            assert!((row.trace.re - row.recursion_trace).abs() < 1e-10, "n = {}", row.n);
        }
        let csv = r.to_csv();
        assert!(csv.contains("# n=11 recursion-extrapolated"));
        assert!(csv.lines().find(|l| !l.starts_with('#')) == Some("n,ell,ell_bar,lower,upper,in_bounds"));
    }

    #[test]
    fn matrix_curve_examples() {
        let u = unitary_with_trace::<f64>(0.9, 40, 1).unwrap().0;
        let id = UnitaryMatrix::identity(40);
        let r = decay_curve_matrix(&u, &id, 3, DEFAULT_MATRIX_SLACK).unwrap();
        assert!(r.rows[1].ell < 1e-7 && r.rows[2].ell < 1e-7);
        let r = decay_curve_matrix(&u, &id, 1, DEFAULT_MATRIX_SLACK).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!((r.rows[0].ell - u.ell()).abs() < 1e-15);
        assert!(decay_curve_matrix(&u, &UnitaryMatrix::identity(3), 2, 0.05).is_err());
    }

    #[test]
    fn matrix_curve_tracks_recursion() {
        let r = decay_curve_matrix_seeded(0.9, 200, 5, 4, DEFAULT_MATRIX_SLACK).unwrap();
        assert!(r.all_in_bounds());
        for row in &r.rows {
            let rec = ell_from_trace(Complex::new(row.recursion_trace, 0.0));
            assert!((row.ell - rec).abs() < 0.05, "{row:?}");
        }
    }

    #[test]
    fn small_element_examples() {
        assert_eq!(find_small_element(0.9, 0.5).unwrap().n, 1);
        let s = find_small_element(0.9, 0.1).unwrap();
        assert_eq!(s.n, 5);
        assert!((s.ell - 0.06208).abs() < 5e-6);
        assert_eq!(s.word, w_sequence(5).unwrap());
        assert_eq!(find_small_element(0.76, 0.9).unwrap().n, 1);
        assert!(find_small_element(0.75, 0.1).is_err());
        assert!(find_small_element(0.9, 0.0).is_err());
        assert!(find_small_element(0.9, -1.0).is_err());
        let far = find_small_element(0.76, 1e-9).unwrap_err().to_string();
        assert!(far.contains("beyond the exact range"), "{far}");
    }

    #[test]
    fn bounds_recompute() {
        let r = decay_curve_exact(0.95, 4).unwrap();
        for row in &r.rows {
            let (lo, hi) = chain_bounds(row.n, r.ell_u, r.ell_bar_u);
            assert_eq!((lo, hi), (row.lower, row.upper));
        }
    }
}
