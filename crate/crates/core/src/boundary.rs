//! Directed edge boundaries `∂_S(A) = |{(a, s) ∈ A × S : a + s ∉ A}|`.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::groups::{standard_gens, Element, GenSet, GroupSpec};
use crate::takagi::omega_scaled_u64;

/// Default cap on the group order for which masks and translation tables are
/// allocated.
pub const DEFAULT_MAX_ORDER: u64 = 1 << 22;

/// A subset of `[0, order)` stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SubsetMask {
    words: Vec<u64>,
    order: u64,
    count: u64,
}

impl SubsetMask {
    pub fn empty(order: u64) -> Self {
        SubsetMask { words: vec![0; order.div_ceil(64) as usize], order, count: 0 }
    }

    pub fn full(order: u64) -> Self {
        let mut mask = SubsetMask::empty(order);
        for i in 0..order {
            mask.insert(i);
        }
        mask
    }

    pub fn from_indices(order: u64, indices: impl IntoIterator<Item = u64>) -> Self {
        let mut mask = SubsetMask::empty(order);
        for i in indices {
            mask.insert(i);
        }
        mask
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Number of members.
    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    #[inline]
    pub fn contains(&self, i: u64) -> bool {
        self.words[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }

    /// Returns whether `i` was newly inserted.
    #[inline]
    pub fn insert(&mut self, i: u64) -> bool {
        assert!(i < self.order, "index {i} outside mask of order {}", self.order);
        let w = &mut self.words[(i >> 6) as usize];
        let bit = 1u64 << (i & 63);
        let fresh = *w & bit == 0;
        *w |= bit;
        self.count += u64::from(fresh);
        fresh
    }

    /// Returns whether `i` was present.
    #[inline]
    pub fn remove(&mut self, i: u64) -> bool {
        let w = &mut self.words[(i >> 6) as usize];
        let bit = 1u64 << (i & 63);
        let present = *w & bit != 0;
        *w &= !bit;
        self.count -= u64::from(present);
        present
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as u64;
                bits &= bits - 1;
                Some(wi as u64 * 64 + tz)
            })
        })
    }

    pub fn complement(&self) -> Self {
        let mut out = SubsetMask::full(self.order);
        for i in self.iter() {
            out.remove(i);
        }
        out
    }

    /// Orders masks by their ascending member lists, compared
    /// lexicographically; the initial segment `{0, …, n-1}` is the smallest
    /// `n`-subset.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.words.iter().zip(&other.words) {
            let diff = a ^ b;
            if diff != 0 {
                let low = diff & diff.wrapping_neg();
                return if a & low != 0 { Ordering::Less } else { Ordering::Greater };
            }
        }
        Ordering::Equal
    }

    /// Hex digits of `Σ_{i ∈ A} 2^i`, most significant first, padded to
    /// `ceil(order / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.order.div_ceil(4).max(1) as usize;
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d as u64 * 4;
            let word = self.words.get((bit >> 6) as usize).copied().unwrap_or(0);
            let nibble = (word >> (bit & 63)) & 0xf;
            write!(out, "{nibble:x}").unwrap();
        }
        out
    }

    pub fn from_hex(order: u64, hex: &str) -> Result<Self> {
        let mut mask = SubsetMask::empty(order);
        for (d, ch) in hex.chars().rev().enumerate() {
            let nibble = ch.to_digit(16).ok_or_else(|| Error::invalid(format!("bad hex digit {ch:?}")))? as u64;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let i = d as u64 * 4 + b;
                    if i >= order {
                        return Err(Error::invalid("hex mask has bits beyond the group order"));
                    }
                    mask.insert(i);
                }
            }
        }
        Ok(mask)
    }
}

impl Serialize for SubsetMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaMode {
    Add,
    Remove,
}

/// A Cayley graph with its translation tables, shared read-only by every
/// boundary query on the same `(G, S)`.
#[derive(Clone, Debug)]
pub struct CayleyGraph {
    group: GroupSpec,
    gens: GenSet,
    plus: Vec<Vec<u32>>,
    minus: Vec<Vec<u32>>,
}

impl CayleyGraph {
    pub fn new(group: &GroupSpec, gens: &GenSet) -> Result<Self> {
        Self::with_max_order(group, gens, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(group: &GroupSpec, gens: &GenSet, max_order: u64) -> Result<Self> {
        if group.order() > max_order {
            return Err(Error::BudgetExceeded {
                what: format!("Cayley tables for group {group}"),
                required: group.order() as u128,
                budget: max_order as u128,
            });
        }
        for s in gens.elements() {
            group.index_of(s)?;
        }
        let plus = gens.elements().iter().map(|s| group.translation(s)).collect();
        let minus = gens.elements().iter().map(|s| group.translation(&group.neg(s))).collect();
        Ok(CayleyGraph { group: group.clone(), gens: gens.clone(), plus, minus })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn gens(&self) -> &GenSet {
        &self.gens
    }

    pub fn order(&self) -> u64 {
        self.group.order()
    }

    fn check_mask(&self, mask: &SubsetMask) -> Result<()> {
        if mask.order() != self.group.order() {
            return Err(Error::invalid(format!(
                "mask of order {} used with a group of order {}",
                mask.order(),
                self.group.order()
            )));
        }
        Ok(())
    }

    pub fn boundary(&self, mask: &SubsetMask) -> Result<u64> {
        self.check_mask(mask)?;
        Ok(self.boundary_unchecked(mask))
    }

    pub(crate) fn boundary_unchecked(&self, mask: &SubsetMask) -> u64 {
        let mut count = 0u64;
        for a in mask.iter() {
            for t in &self.plus {
                count += u64::from(!mask.contains(t[a as usize] as u64));
            }
        }
        count
    }

    /// `∂(A ∪ {g}) - ∂(A)` for `g ∉ A`; only `g ± s` are inspected.
    #[inline]
    pub(crate) fn add_delta_unchecked(&self, mask: &SubsetMask, g: u64) -> i64 {
        let mut delta = 0i64;
        for (p, q) in self.plus.iter().zip(&self.minus) {
            delta += i64::from(!mask.contains(p[g as usize] as u64));
            delta -= i64::from(mask.contains(q[g as usize] as u64));
        }
        delta
    }

    /// `∂(A \ {g}) - ∂(A)` for `g ∈ A`.
    #[inline]
    pub(crate) fn remove_delta_unchecked(&self, mask: &SubsetMask, g: u64) -> i64 {
        let mut delta = 0i64;
        for (p, q) in self.plus.iter().zip(&self.minus) {
            delta -= i64::from(!mask.contains(p[g as usize] as u64));
            delta += i64::from(mask.contains(q[g as usize] as u64));
        }
        delta
    }

    pub fn delta(&self, mask: &SubsetMask, g: u64, mode: DeltaMode) -> Result<i64> {
        self.check_mask(mask)?;
        if g >= self.order() {
            return Err(Error::invalid(format!("index {g} outside the group")));
        }
        match mode {
            DeltaMode::Add if mask.contains(g) => Err(Error::invalid(format!("cannot add {g}: already a member"))),
            DeltaMode::Remove if !mask.contains(g) => Err(Error::invalid(format!("cannot remove {g}: not a member"))),
            DeltaMode::Add => Ok(self.add_delta_unchecked(mask, g)),
            DeltaMode::Remove => Ok(self.remove_delta_unchecked(mask, g)),
        }
    }
}

pub fn boundary_count(group: &GroupSpec, gens: &GenSet, mask: &SubsetMask) -> Result<u64> {
    CayleyGraph::new(group, gens)?.boundary(mask)
}

pub fn boundary_delta(group: &GroupSpec, gens: &GenSet, mask: &SubsetMask, g: &Element, mode: DeltaMode) -> Result<i64> {
    let index = group.index_of(g)?;
    CayleyGraph::new(group, gens)?.delta(mask, index, mode)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LexMismatch {
    pub n: u64,
    pub boundary: u64,
    pub expected: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LexTheoremReport {
    pub m: u64,
    pub r: u32,
    pub checked: u64,
    pub mismatches: Vec<LexMismatch>,
}

impl LexTheoremReport {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty() && self.checked == self.modulus() + 1
    }

    fn modulus(&self) -> u64 {
        self.m.pow(self.r)
    }
}

/// Counts the boundary of every initial segment of `C_m^r` from scratch and
/// compares it with `m^r ω_m(n/m^r)`.
pub fn lex_theorem_check(m: u64, r: u32, max_order: u64) -> Result<LexTheoremReport> {
    let order = m
        .checked_pow(r)
        .filter(|&p| p <= max_order)
        .ok_or_else(|| Error::BudgetExceeded {
            what: format!("lex check on C_{m}^{r}"),
            required: (m as u128).checked_pow(r).unwrap_or(u128::MAX),
            budget: max_order as u128,
        })?;
    let (group, gens) = standard_gens(m, r)?;
    let graph = CayleyGraph::with_max_order(&group, &gens, max_order)?;
    let mut mismatches = Vec::new();
    let mut mask = SubsetMask::empty(order);
    for n in 0..=order {
        if n > 0 {
            mask.insert(n - 1);
        }
        let boundary = graph.boundary_unchecked(&mask);
        let expected = omega_scaled_u64(m, n as i64, r);
        if boundary != expected {
            mismatches.push(LexMismatch { n, boundary, expected });
        }
    }
    Ok(LexTheoremReport { m, r, checked: order + 1, mismatches })
}

/// Splitting of an initial segment `A` of `C_m^r` along the cosets
/// `i s_0 + ⟨S \ {s_0}⟩`, with `s_0` the first-listed generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CosetDecomposition {
    /// `n_i = |A ∩ (i s_0 + H)|`.
    pub sizes: Vec<u64>,
    /// `∂_{S_0}(A_i)`.
    pub sub_boundaries: Vec<u64>,
    pub total: u64,
}

impl CosetDecomposition {
    /// `Σ ∂_{S_0}(A_i) + (n_0 - n_{m-1})`.
    pub fn recombined(&self) -> i64 {
        let inner: u64 = self.sub_boundaries.iter().sum();
        inner as i64 + self.sizes[0] as i64 - *self.sizes.last().unwrap() as i64
    }
}

pub fn coset_decomposition(m: u64, r: u32, n: u64) -> Result<CosetDecomposition> {
    if r < 2 {
        return Err(Error::invalid("coset decomposition needs rank at least 2"));
    }
    let (group, gens) = standard_gens(m, r)?;
    let segment = crate::groups::lex_segment(m, r, n)?;
    let total = CayleyGraph::new(&group, &gens)?.boundary(&segment)?;
    let rest = CayleyGraph::new(&group, &gens.without(0))?;
    let mut sizes = Vec::with_capacity(m as usize);
    let mut sub_boundaries = Vec::with_capacity(m as usize);
    for i in 0..m {
        let part = SubsetMask::from_indices(group.order(), segment.iter().filter(|&a| a % m == i));
        sizes.push(part.len());
        sub_boundaries.push(rest.boundary_unchecked(&part));
    }
    Ok(CosetDecomposition { sizes, sub_boundaries, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{box_set, lex_segment, make_group};

    #[test]
    fn count_examples() {
        let (g, s) = standard_gens(2, 2).unwrap();
        assert_eq!(boundary_count(&g, &s, &lex_segment(2, 2, 2).unwrap()).unwrap(), 2);
        let (g, s) = standard_gens(5, 2).unwrap();
        assert_eq!(boundary_count(&g, &s, &box_set(5, 2, 2, 2).unwrap()).unwrap(), 4);
        for moduli in [vec![2, 3], vec![4, 4], vec![6]] {
            let g = make_group(&moduli).unwrap();
            let s = GenSet::units(&g);
            assert_eq!(boundary_count(&g, &s, &SubsetMask::empty(g.order())).unwrap(), 0);
            assert_eq!(boundary_count(&g, &s, &SubsetMask::full(g.order())).unwrap(), 0);
        }
    }

    #[test]
    fn count_rejects_mismatched_mask() {
        let (g, s) = standard_gens(3, 2).unwrap();
        assert!(boundary_count(&g, &s, &SubsetMask::empty(8)).is_err());
    }

    #[test]
    fn delta_examples() {
        let (g, s) = standard_gens(3, 3).unwrap();
        let graph = CayleyGraph::new(&g, &s).unwrap();
        let mut a = SubsetMask::empty(g.order());
        let d_add = graph.delta(&a, 13, DeltaMode::Add).unwrap();
        assert_eq!(d_add, 3);
        a.insert(13);
        assert_eq!(graph.delta(&a, 13, DeltaMode::Remove).unwrap(), -d_add);
        assert!(graph.delta(&a, 13, DeltaMode::Add).is_err());
        assert!(graph.delta(&a, 12, DeltaMode::Remove).is_err());
        let e = g.element_of(4).unwrap();
        assert_eq!(boundary_delta(&g, &s, &a, &e, DeltaMode::Add).unwrap(), graph.delta(&a, 4, DeltaMode::Add).unwrap());
    }

    #[test]
    fn lex_check_examples() {
        let rep = lex_theorem_check(2, 3, DEFAULT_MAX_ORDER).unwrap();
        assert!(rep.pass());
        let (g, s) = standard_gens(2, 3).unwrap();
        assert_eq!(boundary_count(&g, &s, &lex_segment(2, 3, 3).unwrap()).unwrap(), 5);
        assert_eq!(omega_scaled_u64(2, 3, 3), 5);
        let (g, s) = standard_gens(3, 2).unwrap();
        assert_eq!(boundary_count(&g, &s, &lex_segment(3, 2, 1).unwrap()).unwrap(), 2);
        assert_eq!(omega_scaled_u64(3, 1, 2), 2);
        let rep = lex_theorem_check(3, 4, DEFAULT_MAX_ORDER).unwrap();
        assert_eq!(rep.checked, 82);
        assert!(rep.pass());
        assert!(matches!(lex_theorem_check(10, 8, 1 << 20), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn mask_hex_round_trip() {
        let a = SubsetMask::from_indices(10, [0, 3, 9]);
        assert_eq!(a.to_hex(), "209");
        assert_eq!(SubsetMask::from_hex(10, &a.to_hex()).unwrap(), a);
        assert!(SubsetMask::from_hex(10, "1000").is_err());
    }

    #[test]
    fn lex_cmp_orders_member_lists() {
        let a = SubsetMask::from_indices(100, [0, 1, 70]);
        let b = SubsetMask::from_indices(100, [0, 2, 3]);
        assert_eq!(a.lex_cmp(&b), Ordering::Less);
        assert_eq!(b.lex_cmp(&a), Ordering::Greater);
        assert_eq!(a.lex_cmp(&a.clone()), Ordering::Equal);
        let seg = SubsetMask::from_indices(100, 0..3);
        assert_eq!(seg.lex_cmp(&a), Ordering::Less);
    }

    #[test]
    fn coset_decomposition_replays_recursion() {
        for m in 2..=5u64 {
            for r in 2..=3u32 {
                for n in 0..=m.pow(r) {
                    let dec = coset_decomposition(m, r, n).unwrap();
                    assert_eq!(dec.recombined(), dec.total as i64, "m={m} r={r} n={n}");
                    let (t, rho) = if n == 0 { (0, 0) } else { ((n - 1) / m, (n - 1) % m + 1) };
                    for (i, &ni) in dec.sizes.iter().enumerate() {
                        let want = if n == 0 { 0 } else if (i as u64) < rho { t + 1 } else { t };
                        assert_eq!(ni, want);
                        assert_eq!(dec.sub_boundaries[i], omega_scaled_u64(m, ni as i64, r - 1));
                    }
                }
            }
        }
    }
}
