//! Revolving-door order on `k`-subsets of `{0, …, n-1}`.
//!
//! The sequence `Γ(n, k)` is `Γ(n-1, k)` followed by the reverse of
//! `Γ(n-1, k-1)` with `n-1` added to every member; consecutive subsets differ
//! by one removal and one addition.

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k as u128 {
        // c·(n-k+i) is divisible by i after the multiplication
        c = match c.checked_mul(n as u128 - k as u128 + i) {
            Some(p) => p / i,
            None => return u128::MAX,
        };
    }
    c
}

/// The subset at position `rank` of `Γ(n, k)`, ascending.
pub fn unrank(n: u64, k: u64, rank: u128) -> Vec<u64> {
    assert!(k <= n && rank < binomial(n, k), "rank {rank} out of range for C({n}, {k})");
    let (mut n, mut k, mut rank) = (n, k, rank);
    let mut out = Vec::with_capacity(k as usize);
    while k > 0 && k < n {
        let left = binomial(n - 1, k);
        if rank >= left {
            out.push(n - 1);
            rank = binomial(n - 1, k - 1) - 1 - (rank - left);
            k -= 1;
        }
        n -= 1;
    }
    if k == n {
        out.extend((0..n).rev());
    }
    out.reverse();
    out
}

/// Position of an ascending subset in `Γ(n, k)`.
pub fn rank(n: u64, subset: &[u64]) -> u128 {
    // rank = base + sign · (rank of the remainder one level down)
    let (mut n, mut k) = (n, subset.len() as u64);
    let (mut base, mut sign) = (0i128, 1i128);
    while k > 0 && k < n {
        if subset[k as usize - 1] == n - 1 {
            let span = (binomial(n - 1, k) + binomial(n - 1, k - 1) - 1) as i128;
            base += sign * span;
            sign = -sign;
            k -= 1;
        }
        n -= 1;
    }
    base as u128
}

/// Iterates `Γ(n, k)` from a given rank, reporting each step as the
/// `(removed, added)` swap.
#[derive(Clone, Debug)]
pub struct RevolvingDoor {
    n: u64,
    current: Vec<u64>,
    rank: u128,
    total: u128,
}

impl RevolvingDoor {
    pub fn new(n: u64, k: u64) -> Self {
        Self::starting_at(n, k, 0)
    }

    pub fn starting_at(n: u64, k: u64, rank: u128) -> Self {
        RevolvingDoor { n, current: unrank(n, k, rank), rank, total: binomial(n, k) }
    }

    /// Current subset, ascending.
    pub fn current(&self) -> &[u64] {
        &self.current
    }

    pub fn rank(&self) -> u128 {
        self.rank
    }

    /// Moves to the next subset, returning the swap, or `None` at the end.
    pub fn advance(&mut self) -> Option<(u64, u64)> {
        if self.rank + 1 >= self.total {
            return None;
        }
        let swap = successor_swap(self.n, &self.current)?;
        self.rank += 1;
        let pos = self.current.binary_search(&swap.0).expect("removed element is a member");
        self.current.remove(pos);
        let ins = self.current.partition_point(|&x| x < swap.1);
        self.current.insert(ins, swap.1);
        Some(swap)
    }
}

/// The swap leading from `subset` to its successor in `Γ(n, k)`.
///
/// Walks down the recursion: at each level the subset lies in the forward
/// part (top element absent) or the reversed part (top element present). In
/// the reversed part the successor of the remainder is its predecessor in
/// `Γ(n-1, k-1)`. When the remainder is last (first) in its sub-order the step
/// crosses between parts at this level.
fn successor_swap(n: u64, subset: &[u64]) -> Option<(u64, u64)> {
    step(n, subset, true)
}

/// Swap to the next (`forward`) or previous subset of `Γ(n, |subset|)`.
fn step(n: u64, subset: &[u64], forward: bool) -> Option<(u64, u64)> {
    let k = subset.len() as u64;
    if k == 0 || k == n {
        return None;
    }
    let top = n - 1;
    let has_top = subset.last() == Some(&top);
    if !has_top {
        // forward part, Γ(n-1, k)
        if let Some(s) = step(n - 1, subset, forward) {
            return Some(s);
        }
        if forward {
            // last of Γ(n-1, k) → first of reversed part = last of Γ(n-1,k-1) ∪ {top}
            let last_inner = last_of(n - 1, k - 1);
            return Some(crossing(subset, &last_inner, top));
        }
        None
    } else {
        let rest = &subset[..subset.len() - 1];
        if let Some(s) = step(n - 1, rest, !forward) {
            return Some(s);
        }
        if !forward {
            // first of reversed part → last of Γ(n-1, k)
            let last_outer = last_of(n - 1, k);
            return Some(crossing(subset, &last_outer, u64::MAX));
        }
        None
    }
}

/// Last subset of `Γ(n, k)`.
fn last_of(n: u64, k: u64) -> Vec<u64> {
    unrank(n, k, binomial(n, k) - 1)
}

/// The single-swap difference between `from` and `to` (with `extra` added to
/// `to` unless it is `u64::MAX`).
fn crossing(from: &[u64], to: &[u64], extra: u64) -> (u64, u64) {
    let mut target: Vec<u64> = to.to_vec();
    if extra != u64::MAX {
        target.push(extra);
    }
    let removed = *from.iter().find(|x| !target.contains(x)).expect("subsets differ");
    let added = *target.iter().find(|x| !from.contains(x)).expect("subsets differ");
    (removed, added)
}
