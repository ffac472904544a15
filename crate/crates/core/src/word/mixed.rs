use std::fmt::Write as _;

use serde::Serialize;

use super::carrier::GroupCarrier;
use super::finite_group::FiniteGroup;
use crate::error::{invalid, Error, Result};

/// A word `g_0 t^{e_1} g_1 ⋯ t^{e_k} g_k` in `ℤ ∗ G`, coefficients stored as
/// element indices of a [`FiniteGroup`].
///
/// Normal form: every `e_i ≠ 0` and the interior coefficients
/// `g_1, …, g_{k−1}` are not the identity. The outer coefficients may be.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MixedWord {
    coeffs: Vec<usize>,
    exps: Vec<i64>,
}

enum Token {
    Coeff(usize),
    T(i64),
}

impl MixedWord {
    /// The identity of `ℤ ∗ G`.
    pub fn identity(group: &FiniteGroup) -> Self {
        Self { coeffs: vec![group.identity()], exps: Vec::new() }
    }

    /// The variable `t`.
    pub fn t(group: &FiniteGroup) -> Self {
        Self::t_pow(group, 1)
    }

    pub fn t_pow(group: &FiniteGroup, e: i64) -> Self {
        Self::from_tokens(group, [Token::T(e)])
    }

    /// The constant `g`.
    pub fn constant(group: &FiniteGroup, g: usize) -> Result<Self> {
        check_index(group, g)?;
        Ok(Self { coeffs: vec![g], exps: Vec::new() })
    }

    /// Normalizes `coeffs[0] t^{exps[0]} coeffs[1] ⋯`; requires
    /// `coeffs.len() == exps.len() + 1`. Zero exponents are allowed in the
    /// input and vanish.
    pub fn new(group: &FiniteGroup, coeffs: &[usize], exps: &[i64]) -> Result<Self> {
        if coeffs.len() != exps.len() + 1 {
            return Err(invalid("a mixed word needs one more coefficient than t-powers"));
        }
        for &g in coeffs {
            check_index(group, g)?;
        }
        let mut tokens = Vec::with_capacity(coeffs.len() + exps.len());
        for (i, &g) in coeffs.iter().enumerate() {
            tokens.push(Token::Coeff(g));
            if let Some(&e) = exps.get(i) {
                tokens.push(Token::T(e));
            }
        }
        Ok(Self::from_tokens(group, tokens))
    }

    fn from_tokens(group: &FiniteGroup, tokens: impl IntoIterator<Item = Token>) -> Self {
        let id = group.identity();
        let mut coeffs = vec![id];
        let mut exps: Vec<i64> = Vec::new();
        for tok in tokens {
            match tok {
                Token::Coeff(g) => {
                    let last = coeffs.last_mut().expect("nonempty");
                    *last = group.mul(*last, g);
                }
                Token::T(0) => {}
                Token::T(e) => {
                    if !exps.is_empty() && *coeffs.last().expect("nonempty") == id {
                        // t^a · 1 · t^e merges
                        coeffs.pop();
                        let last = exps.last_mut().expect("nonempty");
                        *last += e;
                        if *last == 0 {
                            exps.pop();
                        } else {
                            coeffs.push(id);
                        }
                    } else {
                        exps.push(e);
                        coeffs.push(id);
                    }
                }
            }
        }
        Self { coeffs, exps }
    }

    fn tokens(&self) -> impl Iterator<Item = Token> + '_ {
        self.coeffs.iter().enumerate().flat_map(move |(i, &g)| {
            std::iter::once(Token::Coeff(g)).chain(self.exps.get(i).map(|&e| Token::T(e)))
        })
    }

    pub fn coefficients(&self) -> &[usize] {
        &self.coeffs
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exps
    }

    /// Number of `t`-syllables.
    pub fn syllable_count(&self) -> usize {
        self.exps.len()
    }

    /// `Σ |e_i|`.
    pub fn t_length(&self) -> u64 {
        self.exps.iter().map(|e| e.unsigned_abs()).sum()
    }

    pub fn is_identity(&self, group: &FiniteGroup) -> bool {
        self.exps.is_empty() && self.coeffs[0] == group.identity()
    }

    pub fn mul(&self, rhs: &Self, group: &FiniteGroup) -> Self {
        Self::from_tokens(group, self.tokens().chain(rhs.tokens()))
    }

    pub fn inverse(&self, group: &FiniteGroup) -> Self {
        let coeffs: Vec<usize> = self.coeffs.iter().rev().map(|&g| group.inverse(g)).collect();
        let exps: Vec<i64> = self.exps.iter().rev().map(|&e| -e).collect();
        // Inversion preserves the normal form.
        Self { coeffs, exps }
    }

    /// `[a, b] = a b a⁻¹ b⁻¹`.
    pub fn commutator(&self, rhs: &Self, group: &FiniteGroup) -> Self {
        self.mul(rhs, group).mul(&self.inverse(group), group).mul(&rhs.inverse(group), group)
    }

    /// The element `w(g)` of `G`.
    pub fn evaluate(&self, group: &FiniteGroup, g: usize) -> usize {
        let mut acc = self.coeffs[0];
        for (i, &e) in self.exps.iter().enumerate() {
            acc = group.mul(acc, group.pow(g, e));
            acc = group.mul(acc, self.coeffs[i + 1]);
        }
        acc
    }

    /// Parses `g0 . t^e1 . g1 . …`; tokens are separated by `.`, each one
    /// `t`, `t^<int>` or an element label. Adjacent labels multiply.
    pub fn parse(group: &FiniteGroup, text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for raw in text.split('.') {
            let tok = raw.trim();
            if tok.is_empty() {
                return Err(Error::Parse { line: 1, msg: format!("empty token in {text:?}") });
            }
            if tok == "t" {
                tokens.push(Token::T(1));
            } else if let Some(e) = tok.strip_prefix("t^") {
                let e = e
                    .parse()
                    .map_err(|err| Error::Parse { line: 1, msg: format!("bad exponent {e:?}: {err}") })?;
                tokens.push(Token::T(e));
            } else {
                let g = group
                    .index_of(tok)
                    .ok_or_else(|| Error::Parse { line: 1, msg: format!("unknown label {tok:?}") })?;
                tokens.push(Token::Coeff(g));
            }
        }
        Ok(Self::from_tokens(group, tokens))
    }

    /// Literal form accepted by [`MixedWord::parse`]; identity outer
    /// coefficients are omitted.
    pub fn display(&self, group: &FiniteGroup) -> String {
        if self.exps.is_empty() {
            return group.label(self.coeffs[0]).to_string();
        }
        let id = group.identity();
        let mut parts: Vec<String> = Vec::new();
        for (i, &g) in self.coeffs.iter().enumerate() {
            if g != id {
                parts.push(group.label(g).to_string());
            }
            if let Some(&e) = self.exps.get(i) {
                let mut s = String::from("t");
                if e != 1 {
                    let _ = write!(s, "^{e}");
                }
                parts.push(s);
            }
        }
        parts.join(" . ")
    }
}

fn check_index(group: &FiniteGroup, g: usize) -> Result<()> {
    if g >= group.order() {
        return Err(invalid(format!("element index {g} out of range for order {}", group.order())));
    }
    Ok(())
}

/// Outcome of testing a word for being a mixed identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MixedIdentityVerdict {
    pub is_identity: bool,
    /// Least element index `g` with `w(g) ≠ 1`, when one exists.
    pub witness: Option<usize>,
    /// `w(witness)`.
    pub witness_value: Option<usize>,
}

/// Substitutes every element of `G` for `t`, in ascending index order.
pub fn is_mixed_identity(w: &MixedWord, group: &FiniteGroup) -> MixedIdentityVerdict {
    let id = group.identity();
    for g in 0..group.order() {
        let v = w.evaluate(group, g);
        if v != id {
            return MixedIdentityVerdict { is_identity: false, witness: Some(g), witness_value: Some(v) };
        }
    }
    MixedIdentityVerdict { is_identity: true, witness: None, witness_value: None }
}

/// Right-nested `[w_1, [w_2, ⋯ [w_{ℓ−1}, w_ℓ]]]`.
pub fn iterated_commutator(ws: &[MixedWord], group: &FiniteGroup) -> Result<MixedWord> {
    let (last, rest) = ws.split_last().ok_or_else(|| invalid("iterated commutator of no words"))?;
    Ok(rest.iter().rev().fold(last.clone(), |acc, w| w.commutator(&acc, group)))
}

/// Least `n ≥ 1` such that `s_1 g_n^{e_1} s_2 g_n^{e_2} ⋯ s_k g_n^{e_k} ≠ 1`,
/// where `g_n = candidates[n − 1]`. `None` if every candidate satisfies the
/// relation.
pub fn asymptotic_freeness_witness<C: GroupCarrier>(
    constraints: &[(C, i64)],
    candidates: &[C],
) -> Result<Option<usize>> {
    if constraints.is_empty() {
        return Err(invalid("empty constraint list"));
    }
    if constraints.iter().any(|(_, e)| *e == 0) {
        return Err(invalid("constraint exponents must be nonzero"));
    }
    for (n, g) in candidates.iter().enumerate() {
        let mut acc = g.unit_like();
        for (s, e) in constraints {
            acc = acc.try_mul(s)?.try_mul(&g.try_pow(*e)?)?;
        }
        if !acc.is_unit() {
            return Ok(Some(n + 1));
        }
    }
    Ok(None)
}

/// All normal-form words with at least one `t`-syllable, `Σ|e_i| ≤ depth`
/// and trailing coefficient `1`, in a fixed order. Conjugating by the
/// trailing coefficient does not change whether a word is an identity, so
/// this covers every word up to that conjugation. Stops after `limit`
/// words; the flag reports whether the enumeration was cut short.
pub fn enumerate_mixed_words(group: &FiniteGroup, depth: u64, limit: usize) -> (Vec<MixedWord>, bool) {
    fn exps_up_to(budget: u64) -> impl Iterator<Item = i64> {
        (1..=budget as i64).flat_map(|e| [e, -e])
    }
    fn rec(
        group: &FiniteGroup,
        budget: u64,
        coeffs: &mut Vec<usize>,
        exps: &mut Vec<i64>,
        out: &mut Vec<MixedWord>,
        limit: usize,
    ) -> bool {
        let id = group.identity();
        for e in exps_up_to(budget) {
            exps.push(e);
            let left = budget - e.unsigned_abs();
            coeffs.push(id);
            if out.len() >= limit {
                return false;
            }
            out.push(MixedWord { coeffs: coeffs.clone(), exps: exps.clone() });
            coeffs.pop();
            if left > 0 {
                for g in (0..group.order()).filter(|&g| g != id) {
                    coeffs.push(g);
                    let complete = rec(group, left, coeffs, exps, out, limit);
                    coeffs.pop();
                    if !complete {
                        return false;
                    }
                }
            }
            exps.pop();
        }
        true
    }
    let mut out = Vec::new();
    let mut complete = true;
    for g0 in 0..group.order() {
        let mut coeffs = vec![g0];
        let mut exps = Vec::new();
        if !rec(group, depth, &mut coeffs, &mut exps, &mut out, limit) {
            complete = false;
            break;
        }
    }
    (out, !complete)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{Carrier, FreeWord, X, Y};

    fn sym3() -> FiniteGroup {
        FiniteGroup::symmetric(3).unwrap()
    }

    #[test]
    fn normal_form_merges_interior_identities() {
        let g = sym3();
        let a = g.index_of("(12)").unwrap();
        // t · a · a · t^-1 → t · 1 · t^-1 → identity
        let w = MixedWord::new(&g, &[0, a, a, 0], &[1, 0, -1]).unwrap();
        assert!(w.is_identity(&g));
        // a t^2 · 1 · t^-1 b → a t b
        let b = g.index_of("(13)").unwrap();
        let w = MixedWord::new(&g, &[a, 0, b], &[2, -1]).unwrap();
        assert_eq!(w.coefficients(), &[a, b]);
        assert_eq!(w.exponents(), &[1]);
    }

    #[test]
    fn parse_and_display_round_trip() {
        let g = sym3();
        let w = MixedWord::parse(&g, "(12) . t^2 . (13) . t^-1").unwrap();
        assert_eq!(w.display(&g), "(12) . t^2 . (13) . t^-1");
        assert_eq!(MixedWord::parse(&g, &w.display(&g)).unwrap(), w);
        assert!(MixedWord::parse(&g, "t . (45)").is_err());
        assert!(MixedWord::parse(&g, "t . . t").is_err());
        assert!(MixedWord::parse(&g, "t^x").is_err());
    }

    #[test]
    fn group_exponent_gives_identity() {
        let g = sym3();
        let w = MixedWord::t_pow(&g, g.exponent() as i64);
        assert!(is_mixed_identity(&w, &g).is_identity);
    }

    #[test]
    fn t_is_refuted_by_first_nonidentity() {
        let g = sym3();
        let v = is_mixed_identity(&MixedWord::t(&g), &g);
        assert!(!v.is_identity);
        assert_eq!(v.witness, Some(1));
    }

    #[test]
    fn commutator_with_conjugate_in_sym3() {
        // Oracle: evaluate [t, a t a⁻¹] at every element directly.
        let g = sym3();
        let a = g.index_of("(12)").unwrap();
        let t = MixedWord::t(&g);
        let ca = MixedWord::constant(&g, a).unwrap();
        let conj = ca.mul(&t, &g).mul(&ca.inverse(&g), &g);
        let w = t.commutator(&conj, &g);
        let direct = |x: usize| {
            let y = g.mul(g.mul(a, x), g.inverse(a));
            g.mul(g.mul(x, y), g.mul(g.inverse(x), g.inverse(y)))
        };
        for x in 0..6 {
            assert_eq!(w.evaluate(&g, x), direct(x));
        }
        let v = is_mixed_identity(&w, &g);
        assert!(!v.is_identity);
        assert_eq!(g.label(v.witness.unwrap()), "(13)");
        let val = v.witness_value.unwrap();
        assert!(g.label(val) == "(123)" || g.label(val) == "(132)");
        assert_eq!(w.evaluate(&g, v.witness.unwrap()), val);
    }

    #[test]
    fn iterated_commutator_cases() {
        let g = sym3();
        let a = g.index_of("(12)").unwrap();
        let b = g.index_of("(123)").unwrap();
        let w1 = MixedWord::new(&g, &[a, 0], &[1]).unwrap();
        let w2 = MixedWord::new(&g, &[0, b], &[2]).unwrap();
        let w3 = MixedWord::new(&g, &[b, a], &[-1]).unwrap();
        assert!(iterated_commutator(&[], &g).is_err());
        assert_eq!(iterated_commutator(std::slice::from_ref(&w1), &g).unwrap(), w1);
        assert_eq!(iterated_commutator(&[w1.clone(), w2.clone()], &g).unwrap(), w1.commutator(&w2, &g));
        let w = iterated_commutator(&[w1.clone(), w2.clone(), w3.clone()], &g).unwrap();
        let comm = |x: usize, y: usize| g.mul(g.mul(x, y), g.mul(g.inverse(x), g.inverse(y)));
        for x in 0..6 {
            let step = comm(w1.evaluate(&g, x), comm(w2.evaluate(&g, x), w3.evaluate(&g, x)));
            assert_eq!(w.evaluate(&g, x), step);
            if w.evaluate(&g, x) != g.identity() {
                for wi in [&w1, &w2, &w3] {
                    assert_ne!(wi.evaluate(&g, x), g.identity());
                }
            }
        }
    }

    #[test]
    fn freeness_witness_trivial_cases() {
        let x = FreeWord::generator(X);
        let cands: Vec<FreeWord> = (1..=5).map(|n| FreeWord::power(Y, n)).collect();
        assert_eq!(asymptotic_freeness_witness(&[(x, 1)], &cands).unwrap(), Some(1));
        assert!(asymptotic_freeness_witness::<FreeWord>(&[], &cands).is_err());

        let z4 = FiniteGroup::cyclic(4).unwrap();
        let a = z4.element(1);
        let constraints = [(a, 1), (a.try_inverse().unwrap(), -1)];
        let cands: Vec<_> = (0..4).map(|i| z4.element(i)).collect();
        assert_eq!(asymptotic_freeness_witness(&constraints, &cands).unwrap(), None);
    }

    #[test]
    fn freeness_witness_matches_brute_force_scan() {
        // Brute force: concatenate letters, cancel adjacent inverse pairs.
        fn brute_is_identity(parts: &[(i64, i64, i64)], n: i64) -> bool {
            // each part: s = x^a y^b, then g^e = y^{n e}
            let mut letters: Vec<(u32, i64)> = Vec::new();
            for &(a, b, e) in parts {
                for (gen, k) in [(X, a), (Y, b), (Y, n * e)] {
                    for _ in 0..k.unsigned_abs() {
                        letters.push((gen, k.signum()));
                    }
                }
            }
            let mut stack: Vec<(u32, i64)> = Vec::new();
            for l in letters {
                if stack.last() == Some(&(l.0, -l.1)) {
                    stack.pop();
                } else {
                    stack.push(l);
                }
            }
            stack.is_empty()
        }
        let systems: Vec<Vec<(i64, i64, i64)>> = vec![
            vec![(0, -1, 1), (0, -1, 1)],
            vec![(0, -3, 1)],
            vec![(0, -2, 1), (1, 0, -1), (-1, 4, 1)],
            vec![(1, 0, 1), (-1, 0, -1)],
            vec![(0, 2, -1), (0, 1, -1), (0, 3, 2)],
        ];
        let cands: Vec<FreeWord> = (1..=8).map(|n| FreeWord::power(Y, n)).collect();
        for parts in systems {
            let constraints: Vec<(FreeWord, i64)> = parts
                .iter()
                .map(|&(a, b, e)| (FreeWord::reduce([(X, a), (Y, b)]), e))
                .collect();
            let expected = (1..=8).find(|&n| !brute_is_identity(&parts, n)).map(|n| n as usize);
            let got = asymptotic_freeness_witness(&constraints, &cands).unwrap();
            assert_eq!(got, expected, "{parts:?}");
            if let Some(n) = got {
                assert!(!brute_is_identity(&parts, n as i64));
            }
        }
    }

    #[test]
    fn enumeration_finds_t_squared_in_z2() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let (words, truncated) = enumerate_mixed_words(&z2, 2, usize::MAX);
        assert!(!truncated);
        let t2 = MixedWord::t_pow(&z2, 2);
        assert!(words.contains(&t2));
        assert!(words.iter().all(|w| w.t_length() <= 2 && w.syllable_count() >= 1));
        let (_, truncated) = enumerate_mixed_words(&z2, 4, 3);
        assert!(truncated);
    }

    #[test]
    fn enumerated_words_are_normal_and_distinct() {
        let g = sym3();
        let (words, _) = enumerate_mixed_words(&g, 3, usize::MAX);
        let set: std::collections::HashSet<_> = words.iter().collect();
        assert_eq!(set.len(), words.len());
        for w in &words {
            let renorm = MixedWord::new(&g, w.coefficients(), w.exponents()).unwrap();
            assert_eq!(&renorm, w);
        }
    }
}
