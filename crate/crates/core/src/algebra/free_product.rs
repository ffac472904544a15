use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::word::FiniteGroup;

/// Default bound on the number of words in an algebra element's support.
pub const DEFAULT_SUPPORT_CAP: usize = 2_000_000;

/// A free factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    Finite(FiniteGroup),
    InfiniteCyclic,
}

/// One syllable of a normal-form word: a non-identity element of one factor.
///
/// For a finite factor `value` is the element index; for `ℤ` it is the
/// (nonzero) exponent of the generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub factor: u16,
    pub value: i32,
}

/// A normal-form word: consecutive syllables come from different factors.
/// Ordered lexicographically, with the identity (empty word) first.
pub type GroupWord = Box<[Syllable]>;

/// Free product `F_0 ∗ F_1 ∗ ⋯` of named factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeProductGroup {
    factors: Vec<(String, Factor)>,
    support_cap: usize,
}

impl FreeProductGroup {
    pub fn new(factors: Vec<(String, Factor)>) -> Result<Self> {
        if factors.is_empty() || factors.len() > u16::MAX as usize {
            return Err(invalid("free product needs between 1 and 65535 factors"));
        }
        for (name, _) in &factors {
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphabetic()) {
                return Err(invalid(format!("factor name {name:?} must be alphabetic")));
            }
        }
        Ok(Self { factors, support_cap: DEFAULT_SUPPORT_CAP })
    }

    pub fn with_support_cap(mut self, cap: usize) -> Self {
        self.support_cap = cap;
        self
    }

    /// `ℤ/2 ∗ ℤ/2` with generators `s`, `r`.
    pub fn z2_z2() -> Self {
        let z2 = FiniteGroup::cyclic(2).expect("Z/2");
        Self::new(vec![("s".into(), Factor::Finite(z2.clone())), ("r".into(), Factor::Finite(z2))])
            .expect("valid")
    }

    /// `ℤ/2 ∗ ℤ` with generators `s` (order two) and `y`.
    pub fn z2_z() -> Self {
        let z2 = FiniteGroup::cyclic(2).expect("Z/2");
        Self::new(vec![("s".into(), Factor::Finite(z2)), ("y".into(), Factor::InfiniteCyclic)])
            .expect("valid")
    }

    /// Free group on `k` generators `a, b, c, …`.
    pub fn free_group(k: usize) -> Result<Self> {
        if k > 26 {
            return Err(invalid("at most 26 named generators"));
        }
        Self::new((0..k).map(|i| (((b'a' + i as u8) as char).to_string(), Factor::InfiniteCyclic)).collect())
    }

    pub fn factors(&self) -> &[(String, Factor)] {
        &self.factors
    }

    pub fn support_cap(&self) -> usize {
        self.support_cap
    }

    pub fn factor(&self, f: usize) -> Result<&Factor> {
        self.factors.get(f).map(|x| &x.1).ok_or_else(|| invalid(format!("no factor {f}")))
    }

    /// `a·b` inside factor `f`; `None` when the product is the identity.
    fn syllable_mul(&self, f: u16, a: i32, b: i32) -> Option<i32> {
        match &self.factors[f as usize].1 {
            Factor::InfiniteCyclic => Some(a + b).filter(|&v| v != 0),
            Factor::Finite(g) => {
                let p = g.mul(a as usize, b as usize);
                (p != g.identity()).then_some(p as i32)
            }
        }
    }

    fn syllable_inverse(&self, s: Syllable) -> Syllable {
        let value = match &self.factors[s.factor as usize].1 {
            Factor::InfiniteCyclic => -s.value,
            Factor::Finite(g) => g.inverse(s.value as usize) as i32,
        };
        Syllable { factor: s.factor, value }
    }

    /// Product of normal-form words, reduced at the junction.
    pub fn mul_words(&self, a: &[Syllable], b: &[Syllable]) -> GroupWord {
        let mut out: Vec<Syllable> = Vec::with_capacity(a.len() + b.len());
        out.extend_from_slice(a);
        let mut rest = b;
        while let (Some(last), Some(first)) = (out.last().copied(), rest.first().copied()) {
            if last.factor != first.factor {
                break;
            }
            out.pop();
            rest = &rest[1..];
            if let Some(v) = self.syllable_mul(last.factor, last.value, first.value) {
                out.push(Syllable { factor: last.factor, value: v });
                break;
            }
        }
        out.extend_from_slice(rest);
        out.into_boxed_slice()
    }

    pub fn inverse_word(&self, w: &[Syllable]) -> GroupWord {
        w.iter().rev().map(|&s| self.syllable_inverse(s)).collect()
    }

    /// Checks that `w` is a normal-form word of this group.
    pub fn validate_word(&self, w: &[Syllable]) -> Result<()> {
        for (i, s) in w.iter().enumerate() {
            let ok = match self.factors.get(s.factor as usize).map(|f| &f.1) {
                None => false,
                Some(Factor::InfiniteCyclic) => s.value != 0,
                Some(Factor::Finite(g)) => {
                    s.value >= 0 && (s.value as usize) < g.order() && s.value as usize != g.identity()
                }
            };
            if !ok || (i > 0 && w[i - 1].factor == s.factor) {
                return Err(invalid(format!("word is not in normal form at syllable {i}")));
            }
        }
        Ok(())
    }

    /// The word of the generator of factor `f`: the `ℤ` generator, or for a
    /// cyclic finite factor the element labelled `1`.
    pub fn generator_word(&self, f: usize) -> Result<GroupWord> {
        let value = match self.factor(f)? {
            Factor::InfiniteCyclic => 1,
            Factor::Finite(g) => {
                g.index_of("1").ok_or_else(|| invalid(format!("factor {f} has no element labelled 1")))? as i32
            }
        };
        Ok(vec![Syllable { factor: f as u16, value }].into_boxed_slice())
    }

    /// Space-separated syllables `name^value`; `^1` is omitted and the
    /// identity is `1`. For finite factors the value is the element index.
    pub fn word_literal(&self, w: &[Syllable]) -> String {
        if w.is_empty() {
            return "1".into();
        }
        let mut s = String::new();
        for (i, syl) in w.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(&self.factors[syl.factor as usize].0);
            if syl.value != 1 {
                let _ = write!(s, "^{}", syl.value);
            }
        }
        s
    }

    pub fn parse_word(&self, text: &str) -> Result<GroupWord> {
        let text = text.trim();
        if text == "1" {
            return Ok(Box::new([]));
        }
        let mut out = Vec::new();
        for tok in text.split_whitespace() {
            let (name, value) = match tok.split_once('^') {
                Some((n, v)) => {
                    (n, v.parse::<i32>().map_err(|e| Error::Parse { line: 1, msg: format!("{tok:?}: {e}") })?)
                }
                None => (tok, 1),
            };
            let factor = self
                .factors
                .iter()
                .position(|f| f.0 == name)
                .ok_or_else(|| Error::Parse { line: 1, msg: format!("unknown factor {name:?}") })?;
            out.push(Syllable { factor: factor as u16, value });
        }
        self.validate_word(&out)?;
        Ok(out.into_boxed_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn syl(factor: u16, value: i32) -> Syllable {
        Syllable { factor, value }
    }

    #[test]
    fn involutions_cancel() {
        let g = FreeProductGroup::z2_z2();
        let s = g.generator_word(0).unwrap();
        assert!(g.mul_words(&s, &s).is_empty());
        let r = g.generator_word(1).unwrap();
        let sr = g.mul_words(&s, &r);
        assert_eq!(g.word_literal(&sr), "s r");
        assert!(g.mul_words(&sr, &g.inverse_word(&sr)).is_empty());
    }

    #[test]
    fn junction_cascades() {
        let g = FreeProductGroup::z2_z();
        // (s y^2 s) · (s y^-2 s y) = y
        let a = [syl(0, 1), syl(1, 2), syl(0, 1)];
        let b = [syl(0, 1), syl(1, -2), syl(0, 1), syl(1, 1)];
        assert_eq!(&*g.mul_words(&a, &b), &[syl(1, 1)]);
    }

    #[test]
    fn literal_round_trip() {
        let g = FreeProductGroup::z2_z();
        let w = g.parse_word("s y^-3 s y").unwrap();
        assert_eq!(g.word_literal(&w), "s y^-3 s y");
        assert!(g.parse_word("s s").is_err());
        assert!(g.parse_word("q").is_err());
        assert!(g.parse_word("y^0").is_err());
    }

    fn word_in(g: FreeProductGroup) -> impl Strategy<Value = GroupWord> {
        prop::collection::vec((0u16..2, -3i32..=3), 0..8).prop_map(move |raw| {
            raw.into_iter().fold(Box::new([]) as GroupWord, |acc, (f, v)| {
                let v = match g.factors[f as usize].1 {
                    Factor::Finite(_) => 1,
                    Factor::InfiniteCyclic if v == 0 => 1,
                    Factor::InfiniteCyclic => v,
                };
                g.mul_words(&acc, &[Syllable { factor: f, value: v }])
            })
        })
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(
            a in word_in(FreeProductGroup::z2_z()),
            b in word_in(FreeProductGroup::z2_z()),
            c in word_in(FreeProductGroup::z2_z()),
        ) {
            let g = FreeProductGroup::z2_z();
            let left = g.mul_words(&g.mul_words(&a, &b), &c);
            let right = g.mul_words(&a, &g.mul_words(&b, &c));
            prop_assert_eq!(&left, &right);
            prop_assert!(g.validate_word(&left).is_ok());
        }
    }
}
