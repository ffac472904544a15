//! Trace of a product of "scalar plus involution" factors, where the
//! involutions are free in the group algebra.
//!
//! Expanding `Π_j (a_j + b_j s_{l_j})` gives one term per subset of
//! positions; a term survives the trace exactly when its letters cancel to
//! the empty word. Such cancellations are non-crossing matchings of equal
//! adjacent letters, so the sum over them is an interval recursion:
//! `O(L³·K)` for `L` factors over `K` distinct letters, instead of `2^L`.

use std::collections::BTreeMap;

use crate::scalar::{Complex, Real};

/// `scalar·1 + coeff·s_letter`, with `s_letter` an involution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvolutionFactor<T> {
    pub scalar: Complex<T>,
    pub coeff: Complex<T>,
    pub letter: i64,
}

/// Largest product length accepted by [`free_involution_trace`].
pub const MAX_INVOLUTION_FACTORS: usize = 800;

/// `τ(Π_j (a_j + b_j s_{l_j}))` for pairwise free involutions `s_l`.
///
/// Returns `None` when more than [`MAX_INVOLUTION_FACTORS`] factors are given.
pub fn free_involution_trace<T: Real>(factors: &[InvolutionFactor<T>]) -> Option<Complex<T>> {
    let len = factors.len();
    if len > MAX_INVOLUTION_FACTORS {
        return None;
    }
    let mut ids = BTreeMap::new();
    for f in factors {
        let next = ids.len();
        ids.entry(f.letter).or_insert(next);
    }
    let letter: Vec<usize> = factors.iter().map(|f| ids[&f.letter]).collect();
    // Slot `k` is "no letter forbidden".
    let k = ids.len();
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());

    // Later positions carrying the same letter.
    let mut partners: Vec<Vec<usize>> = vec![Vec::new(); len];
    for i in 0..len {
        partners[i] = (i + 1..len).filter(|&m| letter[m] == letter[i]).collect();
    }

    // f[c][i][j]: sum over subsets of [i, j) that cancel completely while
    // never reducing to letter `c` at the outermost level.
    let side = len + 1;
    let idx = |c: usize, i: usize, j: usize| (c * side + i) * side + j;
    let mut f = vec![zero; (k + 1) * side * side];
    for c in 0..=k {
        for i in 0..=len {
            f[idx(c, i, i)] = one;
        }
    }
    for width in 1..=len {
        for i in 0..=len - width {
            let j = i + width;
            let li = letter[i];
            let a = factors[i].scalar;
            let b = factors[i].coeff;
            // Position `i` is matched with `m`; the walk returns to base at `m+1`.
            let mut matched = vec![zero; k + 1];
            let mut any = false;
            for &m in partners[i].iter().take_while(|&&m| m < j) {
                let inner = b * factors[m].coeff * f[idx(li, i + 1, m)];
                if inner == zero {
                    continue;
                }
                any = true;
                for (c, acc) in matched.iter_mut().enumerate() {
                    if c != li {
                        *acc += inner * f[idx(c, m + 1, j)];
                    }
                }
            }
            for c in 0..=k {
                let mut v = a * f[idx(c, i + 1, j)];
                if any && c != li {
                    v += matched[c];
                }
                f[idx(c, i, j)] = v;
            }
        }
    }
    Some(f[idx(k, 0, len)])
}
