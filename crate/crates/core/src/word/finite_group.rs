use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;

use super::carrier::{Carrier, GroupCarrier};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Orders up to this size get an exhaustive associativity check; above it,
/// `10·n²` seeded random triples are tested.
const EXHAUSTIVE_ASSOCIATIVITY_LIMIT: usize = 64;

/// A finite group given by its multiplication table.
///
/// `table[a * order + b]` is the index of `a·b`. Identity and inverses are
/// derived from the table at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverses: Vec<usize>,
    labels: Vec<String>,
}

impl FiniteGroup {
    /// Validates the table (Latin square, identity, inverses, associativity).
    pub fn from_table(labels: Vec<String>, table: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidGroup("order must be positive".into()));
        }
        if table.len() != n * n {
            return Err(Error::InvalidGroup(format!(
                "table has {} entries, expected {}",
                table.len(),
                n * n
            )));
        }
        let mut seen_labels = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.chars().any(|c| c.is_whitespace() || c == '.') {
                return Err(Error::InvalidGroup(format!("label {l:?} is empty or contains whitespace or '.'")));
            }
            if l == "t" || l.starts_with("t^") {
                return Err(Error::InvalidGroup(format!("label {l:?} collides with the variable t")));
            }
            if seen_labels.insert(l.as_str(), i).is_some() {
                return Err(Error::InvalidGroup(format!("duplicate label {l:?}")));
            }
        }
        if let Some(&bad) = table.iter().find(|&&x| x >= n) {
            return Err(Error::InvalidGroup(format!("table entry {bad} out of range")));
        }
        for i in 0..n {
            let mut row = vec![false; n];
            let mut col = vec![false; n];
            for j in 0..n {
                row[table[i * n + j]] = true;
                col[table[j * n + i]] = true;
            }
            if row.contains(&false) || col.contains(&false) {
                return Err(Error::InvalidGroup(format!("row or column {i} is not a permutation")));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e * n + x] == x && table[x * n + e] == x))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverses = vec![0; n];
        for (a, inv) in inverses.iter_mut().enumerate() {
            // Latin square: exactly one b with a·b = e.
            let b = (0..n).find(|&b| table[a * n + b] == identity).expect("latin row");
            if table[b * n + a] != identity {
                return Err(Error::InvalidGroup(format!("element {a} has no two-sided inverse")));
            }
            *inv = b;
        }
        let group = Self { order: n, table, identity, inverses, labels };
        group.check_associativity()?;
        Ok(group)
    }

    fn check_associativity(&self) -> Result<()> {
        let n = self.order;
        let check = |a: usize, b: usize, c: usize| -> Result<()> {
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                return Err(Error::InvalidGroup(format!("not associative on ({a}, {b}, {c})")));
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_ASSOCIATIVITY_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            let mut rng = rng_from_seed(n as u64);
            for _ in 0..10 * n * n {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))?;
            }
        }
        Ok(())
    }

    /// Builds the group generated by `generators` under `mul`, elements
    /// listed in breadth-first order from `identity`.
    pub fn generated_by<E, M, L>(identity: E, generators: &[E], mul: M, label: L) -> Result<Self>
    where
        E: Clone + Eq + std::hash::Hash,
        M: Fn(&E, &E) -> E,
        L: Fn(&E) -> String,
    {
        let elems = closure(identity, generators, &mul);
        Self::from_elements(&elems, mul, label)
    }

    /// Table of a finite set closed under `mul`, in the given order.
    pub fn from_elements<E, M, L>(elems: &[E], mul: M, label: L) -> Result<Self>
    where
        E: Clone + Eq + std::hash::Hash,
        M: Fn(&E, &E) -> E,
        L: Fn(&E) -> String,
    {
        let index: HashMap<&E, usize> = elems.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let n = elems.len();
        let mut table = Vec::with_capacity(n * n);
        for a in elems {
            for b in elems {
                let p = mul(a, b);
                let idx = *index
                    .get(&p)
                    .ok_or_else(|| Error::InvalidGroup("element set not closed under product".into()))?;
                table.push(idx);
            }
        }
        Self::from_table(elems.iter().map(label).collect(), table)
    }

    /// `ℤ/n` with labels `0..n-1` (additive).
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("cyclic group of order 0".into()));
        }
        let table = (0..n).flat_map(|a| (0..n).map(move |b| (a + b) % n)).collect();
        Self::from_table((0..n).map(|k| k.to_string()).collect(), table)
    }

    /// `Sym(n)` on points `1..=n`, elements ordered by number of moved
    /// cycles then by cycle notation: for `n = 3` the order is
    /// `(), (12), (13), (23), (123), (132)`.
    pub fn symmetric(n: usize) -> Result<Self> {
        Self::permutation_group(all_permutations(n), n)
    }

    /// `Alt(n)`, ordered like [`FiniteGroup::symmetric`].
    pub fn alternating(n: usize) -> Result<Self> {
        let even = all_permutations(n).into_iter().filter(|p| parity(p) == 0).collect();
        Self::permutation_group(even, n)
    }

    /// Dihedral group of order `2m` as permutations of the `m`-gon.
    pub fn dihedral(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidGroup("dihedral group needs m >= 3".into()));
        }
        let rot: Vec<usize> = (0..m).map(|i| (i + 1) % m).collect();
        let flip: Vec<usize> = (0..m).map(|i| (m - i) % m).collect();
        let elems = closure((0..m).collect::<Vec<_>>(), &[rot, flip], &compose);
        Self::permutation_group(elems, m)
    }

    /// Quaternion group `{±1, ±i, ±j, ±k}`.
    pub fn quaternion() -> Result<Self> {
        // (sign, unit) with unit 0=1, 1=i, 2=j, 3=k.
        let elems: Vec<(i8, u8)> = (0u8..4).flat_map(|u| [(1, u), (-1, u)]).collect();
        let mul = |a: &(i8, u8), b: &(i8, u8)| -> (i8, u8) {
            // unit products: i·j = k, j·k = i, k·i = j, squares = -1
            let (s, u) = match (a.1, b.1) {
                (0, u) | (u, 0) => (1, u),
                (x, y) if x == y => (-1, 0),
                (1, 2) => (1, 3),
                (2, 1) => (-1, 3),
                (2, 3) => (1, 1),
                (3, 2) => (-1, 1),
                (3, 1) => (1, 2),
                (1, 3) => (-1, 2),
                _ => unreachable!(),
            };
            (a.0 * b.0 * s, u)
        };
        let label = |e: &(i8, u8)| {
            let u = ["1", "i", "j", "k"][e.1 as usize];
            if e.0 < 0 { format!("-{u}") } else { u.to_string() }
        };
        Self::from_elements(&elems, mul, label)
    }

    /// Klein four-group `ℤ/2 × ℤ/2`.
    pub fn klein_four() -> Result<Self> {
        let elems = [(0u8, 0u8), (1, 0), (0, 1), (1, 1)];
        Self::from_elements(&elems, |a, b| (a.0 ^ b.0, a.1 ^ b.1), |e| {
            ["e", "a", "b", "ab"][(e.0 + 2 * e.1) as usize].to_string()
        })
    }

    fn permutation_group(mut perms: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        perms.sort_by_cached_key(|p| (n - cycle_count(p), cycle_label(p)));
        Self::from_elements(&perms, compose, |p| cycle_label(p))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    #[inline]
    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn pow(&self, a: usize, e: i64) -> usize {
        let base = if e < 0 { self.inverse(a) } else { a };
        let k = (e.unsigned_abs() % self.element_order(a) as u64) as usize;
        (0..k).fold(self.identity, |acc, _| self.mul(acc, base))
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn element(&self, a: usize) -> GroupElement<'_> {
        GroupElement { group: self, index: a }
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Least common multiple of the element orders.
    pub fn exponent(&self) -> usize {
        (0..self.order).map(|a| self.element_order(a)).fold(1, |acc, o| acc / gcd(acc, o) * o)
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Text form: `order:`, `labels:` and a row-per-line `table:` block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "order: {}", self.order);
        let _ = writeln!(s, "labels: {}", self.labels.join(" "));
        s.push_str("table:\n");
        for row in self.table.chunks(self.order) {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    /// Parses the format written by [`FiniteGroup::to_text`]. Lines starting
    /// with `#` are comments; the table may be laid out freely after
    /// `table:`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut order: Option<usize> = None;
        let mut labels: Option<Vec<String>> = None;
        let mut table: Vec<usize> = Vec::new();
        let mut in_table = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: String| Error::Parse { line: lineno + 1, msg };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = match line.split_once(':') {
                Some((k, v)) if !k.trim().chars().any(|c| c.is_ascii_digit()) => (Some(k.trim()), v),
                _ => (None, line),
            };
            match key {
                Some("order") => {
                    in_table = false;
                    order = Some(rest.trim().parse().map_err(|e| err(format!("bad order: {e}")))?);
                }
                Some("labels") => {
                    in_table = false;
                    labels = Some(rest.split_whitespace().map(str::to_string).collect());
                }
                Some("table") => in_table = true,
                Some(other) => return Err(err(format!("unknown field {other:?}"))),
                None if in_table => {}
                None => return Err(err("data outside a field".into())),
            }
            if in_table {
                for tok in rest.split_whitespace() {
                    table.push(tok.parse().map_err(|e| err(format!("bad table entry {tok:?}: {e}")))?);
                }
            }
        }
        let order = order.ok_or(Error::Parse { line: 0, msg: "missing order".into() })?;
        let labels = labels.unwrap_or_else(|| (0..order).map(|k| format!("g{k}")).collect());
        if labels.len() != order {
            return Err(Error::Parse {
                line: 0,
                msg: format!("{} labels for order {order}", labels.len()),
            });
        }
        Self::from_table(labels, table)
    }
}

/// An element of a [`FiniteGroup`], usable as a word carrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupElement<'g> {
    pub group: &'g FiniteGroup,
    pub index: usize,
}

impl Carrier for GroupElement<'_> {
    fn unit_like(&self) -> Self {
        self.group.element(self.group.identity)
    }
    fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.group != rhs.group {
            return Err(Error::AmbientMismatch);
        }
        Ok(self.group.element(self.group.mul(self.index, rhs.index)))
    }
    fn try_inverse(&self) -> Result<Self> {
        Ok(self.group.element(self.group.inverse(self.index)))
    }
    fn try_pow(&self, e: i64) -> Result<Self> {
        Ok(self.group.element(self.group.pow(self.index, e)))
    }
}

impl GroupCarrier for GroupElement<'_> {
    fn is_unit(&self) -> bool {
        self.index == self.group.identity
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn closure<E, M>(identity: E, generators: &[E], mul: &M) -> Vec<E>
where
    E: Clone + Eq + std::hash::Hash,
    M: Fn(&E, &E) -> E,
{
    let mut elems = vec![identity.clone()];
    let mut seen: std::collections::HashSet<E> = [identity].into_iter().collect();
    let mut head = 0;
    while head < elems.len() {
        let cur = elems[head].clone();
        head += 1;
        for g in generators {
            let p = mul(&cur, g);
            if seen.insert(p.clone()) {
                elems.push(p);
            }
        }
    }
    elems
}

/// `(p∘q)(i) = p(q(i))`.
fn compose(p: &Vec<usize>, q: &Vec<usize>) -> Vec<usize> {
    q.iter().map(|&i| p[i]).collect()
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn cycles(p: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut c = vec![start];
        seen[start] = true;
        let mut i = p[start];
        while i != start {
            seen[i] = true;
            c.push(i);
            i = p[i];
        }
        out.push(c);
    }
    out
}

fn cycle_count(p: &[usize]) -> usize {
    cycles(p).len()
}

fn parity(p: &[usize]) -> usize {
    (p.len() - cycle_count(p)) % 2
}

fn cycle_label(p: &[usize]) -> String {
    let sep = if p.len() > 9 { "," } else { "" };
    let parts: Vec<String> = cycles(p)
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|c| {
            let pts: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            format!("({})", pts.join(sep))
        })
        .collect();
    if parts.is_empty() { "()".into() } else { parts.concat() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym3_order_and_labels() {
        let g = FiniteGroup::symmetric(3).unwrap();
        assert_eq!(g.labels(), &["()", "(12)", "(13)", "(23)", "(123)", "(132)"]);
        assert_eq!(g.identity(), 0);
        assert_eq!(g.exponent(), 6);
        assert!(!g.is_abelian());
        let t12 = g.index_of("(12)").unwrap();
        let t23 = g.index_of("(23)").unwrap();
        // (12)∘(23): 1→1→2, 2→3→3, 3→2→1
        assert_eq!(g.label(g.mul(t12, t23)), "(123)");
    }

    #[test]
    fn catalog_orders_and_exponents() {
        let cases = [
            (FiniteGroup::cyclic(1).unwrap(), 1, 1),
            (FiniteGroup::cyclic(2).unwrap(), 2, 2),
            (FiniteGroup::cyclic(12).unwrap(), 12, 12),
            (FiniteGroup::klein_four().unwrap(), 4, 2),
            (FiniteGroup::quaternion().unwrap(), 8, 4),
            (FiniteGroup::dihedral(5).unwrap(), 10, 10),
            (FiniteGroup::alternating(4).unwrap(), 12, 6),
            (FiniteGroup::symmetric(4).unwrap(), 24, 12),
            (FiniteGroup::alternating(5).unwrap(), 60, 30),
        ];
        for (g, order, exp) in cases {
            assert_eq!(g.order(), order);
            assert_eq!(g.exponent(), exp, "{}", g.to_text());
        }
    }

    #[test]
    fn text_round_trip() {
        let g = FiniteGroup::quaternion().unwrap();
        let back = FiniteGroup::from_text(&g.to_text()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn parse_with_comments_and_free_layout() {
        let text = "# Z/3\norder: 3\nlabels: e a b\ntable: 0 1 2\n 1 2 0 2 0 1\n";
        let g = FiniteGroup::from_text(text).unwrap();
        assert_eq!(g.mul(1, 1), 2);
        assert_eq!(g.inverse(1), 2);
    }

    #[test]
    fn rejects_bad_tables() {
        let labels = |n: usize| (0..n).map(|k| format!("g{k}")).collect::<Vec<_>>();
        // not a latin square
        assert!(FiniteGroup::from_table(labels(2), vec![0, 1, 0, 1]).is_err());
        // latin square without associativity (a quasigroup with identity 0)
        let loop5 = vec![
            0, 1, 2, 3, 4, //
            1, 0, 3, 4, 2, //
            2, 4, 0, 1, 3, //
            3, 2, 4, 0, 1, //
            4, 3, 1, 2, 0,
        ];
        assert!(matches!(
            FiniteGroup::from_table(labels(5), loop5),
            Err(Error::InvalidGroup(_))
        ));
        assert!(FiniteGroup::from_table(vec!["t".into()], vec![0]).is_err());
        assert!(FiniteGroup::from_text("order: 2\ntable: 0 1 1 0 1").is_err());
    }

    #[test]
    fn large_group_uses_sampled_associativity() {
        let g = FiniteGroup::symmetric(5).unwrap();
        assert_eq!(g.order(), 120);
        assert_eq!(g.exponent(), 60);
    }
}
