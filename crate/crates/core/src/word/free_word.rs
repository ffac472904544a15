use std::fmt;

use serde::{Deserialize, Serialize};

use super::carrier::{Carrier, GroupCarrier};
use crate::error::{invalid, Error, Result};

/// Generator index of a free group. `X = 0`, `Y = 1`.
pub type Generator = u32;

pub const X: Generator = 0;
pub const Y: Generator = 1;

/// A reduced word in a free group, stored as syllables `(generator, exponent)`.
///
/// Adjacent syllables have distinct generators and no exponent is zero; the
/// empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FreeWord {
    syllables: Vec<(Generator, i64)>,
}

/// Free reduction with a stack, linear in the number of raw syllables.
pub fn reduce_free_word(raw: &[(Generator, i64)]) -> FreeWord {
    FreeWord::reduce(raw.iter().copied())
}

/// The word `w_n` in `F_2 = ⟨x, y⟩`: `w_1 = x`, `w_{n+1} = [w_n, yⁿ x y⁻ⁿ]`.
pub fn w_sequence(n: usize) -> Result<FreeWord> {
    if n == 0 {
        return Err(invalid("w_n is defined for n >= 1"));
    }
    let x = FreeWord::generator(X);
    let mut w = x.clone();
    for k in 1..n {
        let conj = x.conjugate_by(&FreeWord::power(Y, k as i64));
        w = w.commutator(&conj);
    }
    Ok(w)
}

impl FreeWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn generator(g: Generator) -> Self {
        Self::power(g, 1)
    }

    pub fn power(g: Generator, e: i64) -> Self {
        Self::reduce([(g, e)])
    }

    pub fn reduce(raw: impl IntoIterator<Item = (Generator, i64)>) -> Self {
        let mut stack: Vec<(Generator, i64)> = Vec::new();
        for (g, e) in raw {
            if e == 0 {
                continue;
            }
            match stack.last_mut() {
                Some(top) if top.0 == g => {
                    top.1 += e;
                    if top.1 == 0 {
                        stack.pop();
                    }
                }
                _ => stack.push((g, e)),
            }
        }
        Self { syllables: stack }
    }

    pub fn syllables(&self) -> &[(Generator, i64)] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of letters `Σ |e|`.
    pub fn letter_len(&self) -> u64 {
        self.syllables.iter().map(|&(_, e)| e.unsigned_abs()).sum()
    }

    /// Letters `(generator, ±1)` in order.
    pub fn letters(&self) -> impl Iterator<Item = (Generator, i64)> + '_ {
        self.syllables
            .iter()
            .flat_map(|&(g, e)| std::iter::repeat_n((g, e.signum()), e.unsigned_abs() as usize))
    }

    /// Sum of the exponents of `g`.
    pub fn exponent_sum(&self, g: Generator) -> i64 {
        self.syllables.iter().filter(|s| s.0 == g).map(|s| s.1).sum()
    }

    pub fn inverse(&self) -> Self {
        Self {
            syllables: self.syllables.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self::reduce(self.syllables.iter().chain(rhs.syllables.iter()).copied())
    }

    /// `[a, b] = a b a⁻¹ b⁻¹`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        Self::reduce(
            self.syllables
                .iter()
                .copied()
                .chain(rhs.syllables.iter().copied())
                .chain(self.inverse().syllables)
                .chain(rhs.inverse().syllables),
        )
    }

    /// `g · self · g⁻¹`.
    pub fn conjugate_by(&self, g: &Self) -> Self {
        g.mul(self).mul(&g.inverse())
    }

    /// Evaluate the word with generator `i` sent to `assignment[i]`.
    pub fn substitute<C: Carrier>(&self, assignment: &[C]) -> Result<C> {
        let lookup = |g: Generator| assignment.get(g as usize).ok_or(Error::MissingGenerator(g));
        let unit = match assignment.first() {
            Some(c) => c.unit_like(),
            None => {
                return match self.syllables.first() {
                    Some(&(g, _)) => Err(Error::MissingGenerator(g)),
                    None => Err(invalid("empty assignment gives no carrier for the identity")),
                }
            }
        };
        let mut acc: Option<C> = None;
        for &(g, e) in &self.syllables {
            let p = lookup(g)?.try_pow(e)?;
            acc = Some(match acc {
                None => p,
                Some(a) => a.try_mul(&p)?,
            });
        }
        Ok(acc.unwrap_or(unit))
    }
}

fn generator_name(g: Generator) -> String {
    match g {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        _ => format!("g{g}"),
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return f.write_str("1");
        }
        for (i, &(g, e)) in self.syllables.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", generator_name(g))?;
            if e != 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl Carrier for FreeWord {
    fn unit_like(&self) -> Self {
        Self::identity()
    }
    fn try_mul(&self, rhs: &Self) -> Result<Self> {
        Ok(self.mul(rhs))
    }
    fn try_inverse(&self) -> Result<Self> {
        Ok(self.inverse())
    }
}

impl GroupCarrier for FreeWord {
    fn is_unit(&self) -> bool {
        self.is_identity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Letter-level cancellation, independent of the syllable stack.
    fn brute_reduce(letters: &[(Generator, i64)]) -> Vec<(Generator, i64)> {
        let mut v: Vec<(Generator, i64)> = letters.to_vec();
        loop {
            let pos = v.windows(2).position(|w| w[0].0 == w[1].0 && w[0].1 == -w[1].1);
            match pos {
                Some(p) => {
                    v.drain(p..p + 2);
                }
                None => return v,
            }
        }
    }

    fn expand(raw: &[(Generator, i64)]) -> Vec<(Generator, i64)> {
        raw.iter()
            .flat_map(|&(g, e)| std::iter::repeat_n((g, e.signum()), e.unsigned_abs() as usize))
            .collect()
    }

    #[test]
    fn cancellation_example() {
        let w = reduce_free_word(&[(X, 1), (Y, 1), (Y, -1), (X, 1)]);
        assert_eq!(w.syllables(), &[(X, 2)]);
        assert!(reduce_free_word(&[]).is_identity());
    }

    #[test]
    fn commutator_with_conjugate_has_eight_letters() {
        let x = FreeWord::generator(X);
        let yxy = x.conjugate_by(&FreeWord::generator(Y));
        let w = x.commutator(&yxy);
        let raw = [(X, 1), (Y, 1), (X, 1), (Y, -1), (X, -1), (Y, 1), (X, -1), (Y, -1)];
        assert_eq!(brute_reduce(&raw), raw.to_vec());
        assert_eq!(w.letters().collect::<Vec<_>>(), raw.to_vec());
        assert_eq!(w.to_string(), "x y x y^-1 x^-1 y x^-1 y^-1");
    }

    #[test]
    fn w_sequence_first_terms() {
        assert!(w_sequence(0).is_err());
        assert_eq!(w_sequence(1).unwrap(), FreeWord::generator(X));
        let x = FreeWord::generator(X);
        let c1 = x.conjugate_by(&FreeWord::power(Y, 1));
        let c2 = x.conjugate_by(&FreeWord::power(Y, 2));
        let w2 = x.commutator(&c1);
        assert_eq!(w_sequence(2).unwrap(), w2);
        assert_eq!(w_sequence(3).unwrap(), w2.commutator(&c2));
    }

    #[test]
    fn w_sequence_recursion_up_to_ten() {
        let x = FreeWord::generator(X);
        for n in 1..10usize {
            let c = x.conjugate_by(&FreeWord::power(Y, n as i64));
            assert_eq!(w_sequence(n + 1).unwrap(), w_sequence(n).unwrap().commutator(&c));
        }
        // x-letter count L_{n+1} = 2 L_n + 2
        let mut l = 1u64;
        for n in 1..=10 {
            let w = w_sequence(n).unwrap();
            assert_eq!(w.letters().filter(|p| p.0 == X).count() as u64, l);
            assert_eq!(w.exponent_sum(Y), 0);
            l = 2 * l + 2;
        }
    }

    #[test]
    fn substitute_needs_every_generator() {
        let w = FreeWord::reduce([(X, 1), (Y, 1)]);
        let only_x = [FreeWord::generator(X)];
        assert_eq!(w.substitute(&only_x), Err(Error::MissingGenerator(Y)));
    }

    fn raw_word() -> impl Strategy<Value = Vec<(Generator, i64)>> {
        prop::collection::vec((0u32..3, -3i64..=3), 0..24)
    }

    proptest! {
        #[test]
        fn reduction_is_idempotent(raw in raw_word()) {
            let w = reduce_free_word(&raw);
            prop_assert_eq!(reduce_free_word(w.syllables()), w.clone());
            for pair in w.syllables().windows(2) {
                prop_assert_ne!(pair[0].0, pair[1].0);
            }
            prop_assert!(w.syllables().iter().all(|s| s.1 != 0));
        }

        #[test]
        fn reduction_matches_letter_cancellation(raw in raw_word()) {
            let w = reduce_free_word(&raw);
            prop_assert_eq!(w.letters().collect::<Vec<_>>(), brute_reduce(&expand(&raw)));
        }

        #[test]
        fn inverse_cancels(raw in raw_word()) {
            let w = reduce_free_word(&raw);
            prop_assert!(w.mul(&w.inverse()).is_identity());
        }
    }
}
