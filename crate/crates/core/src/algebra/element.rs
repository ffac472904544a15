use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::free_product::{Factor, FreeProductGroup, GroupWord, Syllable};
use crate::error::{invalid, Error, Result};
use crate::scalar::{Complex, Real};
use crate::word::Carrier;

/// Fixed-key hasher: map contents never depend on process state.
type FixedState = BuildHasherDefault<DefaultHasher>;

/// Terms of the left factor handled per partial product. Fixed, so the
/// floating-point summation order does not depend on the thread count.
const PRODUCT_CHUNK: usize = 64;

/// Unitarity tolerance used by the length functions.
pub const LENGTH_UNITARY_TOL: f64 = 1e-9;

/// A finitely supported element `Σ c_w w` of the group algebra of a free
/// product, with the canonical trace `τ(a) = c_1`.
///
/// Terms are kept sorted by word, with no coefficient below the prune
/// threshold of `T`.
#[derive(Clone, Debug)]
pub struct AlgebraElement<T: Real> {
    ambient: Arc<FreeProductGroup>,
    terms: Vec<(GroupWord, Complex<T>)>,
}

/// One serialized term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub word: String,
    pub re: f64,
    pub im: f64,
}

impl<T: Real> PartialEq for AlgebraElement<T> {
    fn eq(&self, other: &Self) -> bool {
        same_ambient(&self.ambient, &other.ambient) && self.terms == other.terms
    }
}

fn same_ambient(a: &Arc<FreeProductGroup>, b: &Arc<FreeProductGroup>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl<T: Real> AlgebraElement<T> {
    pub fn zero(ambient: &Arc<FreeProductGroup>) -> Self {
        Self { ambient: Arc::clone(ambient), terms: Vec::new() }
    }

    pub fn one(ambient: &Arc<FreeProductGroup>) -> Self {
        Self::scalar(ambient, Complex::new(T::one(), T::zero()))
    }

    pub fn scalar(ambient: &Arc<FreeProductGroup>, c: Complex<T>) -> Self {
        Self::from_sorted(ambient, vec![(Box::new([]) as GroupWord, c)])
    }

    /// A single group element.
    pub fn word(ambient: &Arc<FreeProductGroup>, w: &[Syllable]) -> Result<Self> {
        ambient.validate_word(w)?;
        Ok(Self::from_sorted(ambient, vec![(w.into(), Complex::new(T::one(), T::zero()))]))
    }

    /// Sums duplicate words; every word must be in normal form.
    pub fn from_terms(
        ambient: &Arc<FreeProductGroup>,
        terms: impl IntoIterator<Item = (GroupWord, Complex<T>)>,
    ) -> Result<Self> {
        let mut map: HashMap<GroupWord, Complex<T>, FixedState> = HashMap::default();
        for (w, c) in terms {
            ambient.validate_word(&w)?;
            *map.entry(w).or_insert(Complex::new(T::zero(), T::zero())) += c;
        }
        Ok(Self::from_map(ambient, map))
    }

    fn from_map(ambient: &Arc<FreeProductGroup>, map: HashMap<GroupWord, Complex<T>, FixedState>) -> Self {
        let mut terms: Vec<_> = map.into_iter().collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Self::from_sorted(ambient, terms)
    }

    fn from_sorted(ambient: &Arc<FreeProductGroup>, mut terms: Vec<(GroupWord, Complex<T>)>) -> Self {
        let eps = T::prune_threshold();
        terms.retain(|(_, c)| c.norm() >= eps);
        Self { ambient: Arc::clone(ambient), terms }
    }

    /// `α·1 + i√(1−α²)·s` for the order-two generator `s` of factor `factor`:
    /// a unitary with trace `α`.
    pub fn order_two_unitary(ambient: &Arc<FreeProductGroup>, alpha: T, factor: usize) -> Result<Self> {
        if !(alpha.abs() < T::one()) {
            return Err(invalid(format!("order_two_unitary needs |alpha| < 1, got {alpha}")));
        }
        let s = match ambient.factor(factor)? {
            Factor::Finite(g) if g.order() == 2 => ambient.generator_word(factor)?,
            _ => return Err(invalid(format!("factor {factor} is not of order two"))),
        };
        let b = (T::one() - alpha * alpha).sqrt();
        Ok(Self::from_sorted(
            ambient,
            vec![(Box::new([]), Complex::new(alpha, T::zero())), (s, Complex::new(T::zero(), b))],
        ))
    }

    /// The generator of an infinite-cyclic factor: a Haar unitary,
    /// `τ(vⁿ) = 0` for all `n ≠ 0`.
    pub fn haar_generator(ambient: &Arc<FreeProductGroup>, factor: usize) -> Result<Self> {
        match ambient.factor(factor)? {
            Factor::InfiniteCyclic => Self::word(ambient, &ambient.generator_word(factor)?),
            Factor::Finite(_) => Err(invalid(format!("factor {factor} is not infinite cyclic"))),
        }
    }

    pub fn ambient(&self) -> &Arc<FreeProductGroup> {
        &self.ambient
    }

    pub fn terms(&self) -> &[(GroupWord, Complex<T>)] {
        &self.terms
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, w: &[Syllable]) -> Complex<T> {
        match self.terms.binary_search_by(|t| (*t.0).cmp(w)) {
            Ok(i) => self.terms[i].1,
            Err(_) => Complex::new(T::zero(), T::zero()),
        }
    }

    /// Coefficient of the identity.
    pub fn trace(&self) -> Complex<T> {
        match self.terms.first() {
            Some((w, c)) if w.is_empty() => *c,
            _ => Complex::new(T::zero(), T::zero()),
        }
    }

    fn check_ambient(&self, other: &Self) -> Result<()> {
        if same_ambient(&self.ambient, &other.ambient) {
            Ok(())
        } else {
            Err(Error::AmbientMismatch)
        }
    }

    /// Convolution product. Partial sums are formed over fixed chunks of
    /// the left support (possibly in parallel) and merged in chunk order.
    pub fn multiply(&self, rhs: &Self) -> Result<Self> {
        self.check_ambient(rhs)?;
        let amb = &*self.ambient;
        let cap = amb.support_cap();
        let zero = Complex::new(T::zero(), T::zero());
        let partials: Vec<Result<HashMap<GroupWord, Complex<T>, FixedState>>> = self
            .terms
            .par_chunks(PRODUCT_CHUNK)
            .map(|chunk| {
                let mut m: HashMap<GroupWord, Complex<T>, FixedState> = HashMap::default();
                for (wa, ca) in chunk {
                    for (wb, cb) in &rhs.terms {
                        *m.entry(amb.mul_words(wa, wb)).or_insert(zero) += *ca * *cb;
                    }
                    if m.len() > cap {
                        return Err(Error::SupportCapExceeded { cap, needed: m.len() });
                    }
                }
                Ok(m)
            })
            .collect();
        let mut merged: HashMap<GroupWord, Complex<T>, FixedState> = HashMap::default();
        for part in partials {
            for (w, c) in part? {
                *merged.entry(w).or_insert(zero) += c;
            }
            if merged.len() > cap {
                return Err(Error::SupportCapExceeded { cap, needed: merged.len() });
            }
        }
        Ok(Self::from_map(&self.ambient, merged))
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_ambient(rhs)?;
        let mut merged: Vec<(GroupWord, Complex<T>)> = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < rhs.terms.len() {
            let ord = match (self.terms.get(i), rhs.terms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            match ord {
                std::cmp::Ordering::Less => {
                    merged.push(self.terms[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    merged.push(rhs.terms[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    merged.push((self.terms[i].0.clone(), self.terms[i].1 + rhs.terms[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(Self::from_sorted(&self.ambient, merged))
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self::from_sorted(&self.ambient, self.terms.iter().map(|(w, x)| (w.clone(), *x * c)).collect())
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.scale(Complex::new(-T::one(), T::zero())))
    }

    /// Adjoint: the coefficient of `w` is the conjugate of that of `w⁻¹`.
    pub fn star(&self) -> Self {
        let mut terms: Vec<_> =
            self.terms.iter().map(|(w, c)| (self.ambient.inverse_word(w), c.conj())).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Self { ambient: Arc::clone(&self.ambient), terms }
    }

    /// `‖a‖₂² = τ(a*a)`, computed as `Σ |c_w|²`.
    pub fn two_norm_sq(&self) -> T {
        self.terms.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    /// `τ(a·b) = Σ_w a(w) b(w⁻¹)`, without forming the product.
    pub fn trace_of_product(&self, rhs: &Self) -> Result<Complex<T>> {
        self.check_ambient(rhs)?;
        let mut acc = Complex::new(T::zero(), T::zero());
        for (w, c) in &self.terms {
            acc += *c * rhs.coefficient(&self.ambient.inverse_word(w));
        }
        Ok(acc)
    }

    /// Largest coefficient modulus of `a*a − 1`.
    pub fn unitarity_deviation(&self) -> Result<T> {
        let d = self.star().multiply(self)?.sub(&Self::one(&self.ambient))?;
        Ok(d.terms.iter().map(|(_, c)| c.norm()).fold(T::zero(), T::max))
    }

    /// Every coefficient of `a*a − 1` has modulus at most `tol`.
    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_deviation().is_ok_and(|d| d <= tol)
    }

    fn require_unitary(&self) -> Result<()> {
        let tol = T::lit(LENGTH_UNITARY_TOL).max(T::unitarity_tol());
        let deviation = self.unitarity_deviation()?;
        if deviation <= tol {
            Ok(())
        } else {
            Err(Error::NotUnitary { deviation: deviation.as_f64(), tol: tol.as_f64() })
        }
    }

    /// `ℓ(a) = ‖1 − a‖₂ = √(2 − 2 Re τ(a))`; refuses non-unitary input.
    pub fn ell(&self) -> Result<T> {
        self.require_unitary()?;
        Ok(ell_from_trace(self.trace()))
    }

    /// `ℓ̄(a) = inf_{|λ|=1} ‖λ − a‖₂ = √(2(1 − |τ(a)|))`.
    pub fn ell_bar(&self) -> Result<T> {
        self.require_unitary()?;
        Ok(ell_bar_from_trace(self.trace()))
    }

    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(w, c)| TermRecord { word: self.ambient.word_literal(w), re: c.re.as_f64(), im: c.im.as_f64() })
            .collect()
    }

    pub fn from_records(ambient: &Arc<FreeProductGroup>, records: &[TermRecord]) -> Result<Self> {
        let terms = records
            .iter()
            .map(|r| Ok((ambient.parse_word(&r.word)?, Complex::new(T::lit(r.re), T::lit(r.im)))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(ambient, terms)
    }
}

/// `√(2 − 2 Re τ)`, clamped at zero against rounding.
pub fn ell_from_trace<T: Real>(tau: Complex<T>) -> T {
    (T::lit(2.0) - T::lit(2.0) * tau.re).max(T::zero()).sqrt()
}

/// `√(2(1 − |τ|))`, clamped at zero against rounding.
pub fn ell_bar_from_trace<T: Real>(tau: Complex<T>) -> T {
    (T::lit(2.0) * (T::one() - tau.norm())).max(T::zero()).sqrt()
}

/// Words are evaluated on unitaries, so the inverse is the adjoint.
impl<T: Real> Carrier for AlgebraElement<T> {
    fn unit_like(&self) -> Self {
        Self::one(&self.ambient)
    }
    fn try_mul(&self, rhs: &Self) -> Result<Self> {
        self.multiply(rhs)
    }
    fn try_inverse(&self) -> Result<Self> {
        Ok(self.star())
    }
}

/// Outcome of checking `τ(uvu*v*) = 1 − (1−|α|²)(1−|β|²)` by exact expansion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorIdentityCheck {
    pub alpha: f64,
    pub beta: f64,
    /// `τ(uvu*v*)` from the expanded product.
    pub lhs: Complex<f64>,
    pub rhs: f64,
    pub deviation: f64,
    /// `|τ(uv) − τ(u)τ(v)|`.
    pub product_rule_deviation: f64,
}

/// The free pair `u = order_two_unitary(α)` on the first and
/// `v = order_two_unitary(β)` on the second factor of `ℤ/2 ∗ ℤ/2`.
pub fn free_order_two_pair<T: Real>(alpha: T, beta: T) -> Result<(AlgebraElement<T>, AlgebraElement<T>)> {
    let amb = Arc::new(FreeProductGroup::z2_z2());
    Ok((
        AlgebraElement::order_two_unitary(&amb, alpha, 0)?,
        AlgebraElement::order_two_unitary(&amb, beta, 1)?,
    ))
}

pub fn verify_free_commutator_identity<T: Real>(alpha: T, beta: T) -> Result<CommutatorIdentityCheck> {
    let (u, v) = free_order_two_pair(alpha, beta)?;
    let comm = u.multiply(&v)?.multiply(&u.star())?.multiply(&v.star())?;
    let lhs = comm.trace();
    let (a2, b2) = (alpha * alpha, beta * beta);
    let rhs = T::one() - (T::one() - a2) * (T::one() - b2);
    let uv = u.multiply(&v)?.trace();
    let lhs64 = Complex::new(lhs.re.as_f64(), lhs.im.as_f64());
    Ok(CommutatorIdentityCheck {
        alpha: alpha.as_f64(),
        beta: beta.as_f64(),
        lhs: lhs64,
        rhs: rhs.as_f64(),
        deviation: (lhs - Complex::new(rhs, T::zero())).norm().as_f64(),
        product_rule_deviation: (uv - u.trace() * v.trace()).norm().as_f64(),
    })
}
