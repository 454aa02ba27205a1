//! Finite abelian groups `C_{n_1} × … × C_{n_k}` as mixed-radix coordinate
//! spaces.
//!
//! Elements are indexed with `coords[0]` as the least significant digit. For
//! the homocyclic group `C_m^r` with its standard generators `e_1, …, e_r`,
//! this makes the coefficient of the first-listed generator the least
//! significant digit of the lexicographic order, so the `j`-th element of that
//! order is simply `element_of(j)` and initial segments are index ranges
//! `0..n`. Under this convention the first `ρ` cosets of `⟨e_2, …, e_r⟩` in a
//! segment of size `tm + ρ` each hold `t + 1` elements and the rest hold `t`.
//! The opposite convention differs by a generator-permuting automorphism and
//! gives the same boundary counts.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Serialize, Serializer};

use crate::boundary::SubsetMask;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    moduli: Vec<u64>,
    order: u64,
    exponent: u64,
}

impl GroupSpec {
    pub fn new(moduli: Vec<u64>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::invalid("a group needs at least one cyclic factor"));
        }
        if let Some(&bad) = moduli.iter().find(|&&n| n < 2) {
            return Err(Error::invalid(format!("cyclic factor of order {bad}; each must be at least 2")));
        }
        let order = moduli
            .iter()
            .try_fold(1u64, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::invalid("group order overflows u64"))?;
        let exponent = moduli.iter().fold(1u64, |acc, &n| acc.lcm(&n));
        Ok(GroupSpec { moduli, order, exponent })
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    /// Reduces each coordinate modulo its factor.
    pub fn element(&self, coords: &[i64]) -> Result<Element> {
        if coords.len() != self.moduli.len() {
            return Err(Error::invalid(format!(
                "element has {} coordinates, group has rank {}",
                coords.len(),
                self.moduli.len()
            )));
        }
        let coords = coords
            .iter()
            .zip(&self.moduli)
            .map(|(&c, &n)| c.rem_euclid(n as i64) as u64)
            .collect();
        Ok(Element { coords })
    }

    pub fn zero(&self) -> Element {
        Element { coords: vec![0; self.moduli.len()] }
    }

    pub fn index_of(&self, e: &Element) -> Result<u64> {
        if e.coords.len() != self.moduli.len() {
            return Err(Error::invalid("element rank does not match the group"));
        }
        let mut index = 0u64;
        for (&c, &n) in e.coords.iter().zip(&self.moduli).rev() {
            if c >= n {
                return Err(Error::invalid(format!("coordinate {c} out of range for C_{n}")));
            }
            index = index * n + c;
        }
        Ok(index)
    }

    pub fn element_of(&self, index: u64) -> Result<Element> {
        if index >= self.order {
            return Err(Error::invalid(format!("index {index} out of range [0, {})", self.order)));
        }
        let mut rest = index;
        let coords = self
            .moduli
            .iter()
            .map(|&n| {
                let c = rest % n;
                rest /= n;
                c
            })
            .collect();
        Ok(Element { coords })
    }

    pub fn add(&self, a: &Element, b: &Element) -> Element {
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .zip(&self.moduli)
            .map(|((&x, &y), &n)| (x + y) % n)
            .collect();
        Element { coords }
    }

    pub fn neg(&self, a: &Element) -> Element {
        let coords = a.coords.iter().zip(&self.moduli).map(|(&x, &n)| (n - x) % n).collect();
        Element { coords }
    }

    /// Index permutation `i ↦ index_of(element_of(i) + s)`.
    pub fn translation(&self, s: &Element) -> Vec<u32> {
        assert!(self.order <= u32::MAX as u64 + 1, "group too large for translation tables");
        let mut table = Vec::with_capacity(self.order as usize);
        // Odometer walk over coordinates, least significant first.
        let mut x = vec![0u64; self.moduli.len()];
        let strides: Vec<u64> = self
            .moduli
            .iter()
            .scan(1u64, |acc, &n| {
                let s = *acc;
                *acc *= n;
                Some(s)
            })
            .collect();
        for _ in 0..self.order {
            let mut target = 0u64;
            for i in 0..x.len() {
                target += ((x[i] + s.coords[i]) % self.moduli[i]) * strides[i];
            }
            table.push(target as u32);
            for (xi, &mi) in x.iter_mut().zip(&self.moduli) {
                *xi += 1;
                if *xi < mi {
                    break;
                }
                *xi = 0;
            }
        }
        table
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.moduli.iter().map(u64::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl Serialize for GroupSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.moduli.serialize(serializer)
    }
}

/// `"3,3"` → `C_3 × C_3`.
impl FromStr for GroupSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let moduli = s
            .split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|_| Error::invalid(format!("bad group literal {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        GroupSpec::new(moduli)
    }
}

/// `make_group`.
pub fn make_group(moduli: &[u64]) -> Result<GroupSpec> {
    GroupSpec::new(moduli.to_vec())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Element {
    coords: Vec<u64>,
}

impl Element {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

/// An ordered set of distinct nonzero group elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct GenSet {
    elements: Vec<Element>,
}

impl GenSet {
    pub fn new(group: &GroupSpec, elements: Vec<Element>) -> Result<Self> {
        for (i, e) in elements.iter().enumerate() {
            group.index_of(e)?;
            if e.is_zero() {
                return Err(Error::invalid("the zero element cannot be a generator"));
            }
            if elements[..i].contains(e) {
                return Err(Error::invalid(format!("duplicate generator {:?}", e.coords)));
            }
        }
        Ok(GenSet { elements })
    }

    /// Parses `"1,0;0,1"`.
    pub fn parse(group: &GroupSpec, literal: &str) -> Result<Self> {
        let elements = literal
            .split(';')
            .filter(|t| !t.trim().is_empty())
            .map(|t| {
                let coords = t
                    .split(',')
                    .map(|c| c.trim().parse::<i64>().map_err(|_| Error::invalid(format!("bad generator literal {t:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                group.element(&coords)
            })
            .collect::<Result<Vec<_>>>()?;
        GenSet::new(group, elements)
    }

    /// Unit vectors `e_1, …, e_k` of the group's coordinates.
    pub fn units(group: &GroupSpec) -> Self {
        let elements = (0..group.rank())
            .map(|i| {
                let mut coords = vec![0; group.rank()];
                coords[i] = 1;
                Element { coords }
            })
            .collect();
        GenSet { elements }
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn negated(&self, group: &GroupSpec) -> Self {
        GenSet { elements: self.elements.iter().map(|e| group.neg(e)).collect() }
    }

    pub fn reversed(&self) -> Self {
        GenSet { elements: self.elements.iter().rev().cloned().collect() }
    }

    /// The set without its `i`-th element.
    pub fn without(&self, i: usize) -> Self {
        let mut elements = self.elements.clone();
        elements.remove(i);
        GenSet { elements }
    }

    pub fn to_literal(&self) -> String {
        self.elements
            .iter()
            .map(|e| e.coords.iter().map(u64::to_string).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Whether repeated addition of generators reaches every element from 0.
pub fn is_generating(group: &GroupSpec, gens: &GenSet) -> bool {
    let order = group.order() as usize;
    let tables: Vec<Vec<u32>> = gens.elements().iter().map(|s| group.translation(s)).collect();
    let mut seen = vec![false; order];
    let mut queue = VecDeque::from([0u32]);
    seen[0] = true;
    let mut reached = 1usize;
    while let Some(i) = queue.pop_front() {
        for t in &tables {
            let j = t[i as usize];
            if !seen[j as usize] {
                seen[j as usize] = true;
                reached += 1;
                queue.push_back(j);
            }
        }
    }
    reached == order
}

/// `C_m^r` with generators `e_1, …, e_r` in that order.
pub fn standard_gens(m: u64, r: u32) -> Result<(GroupSpec, GenSet)> {
    if r == 0 {
        return Err(Error::invalid("rank must be at least 1"));
    }
    let group = GroupSpec::new(vec![m; r as usize])?;
    let gens = GenSet::units(&group);
    Ok((group, gens))
}

/// The `n` lexicographically smallest elements of `C_m^r`: indices `0..n`.
pub fn lex_segment(m: u64, r: u32, n: u64) -> Result<SubsetMask> {
    let (group, _) = standard_gens(m, r)?;
    if n > group.order() {
        return Err(Error::invalid(format!("segment length {n} exceeds group order {}", group.order())));
    }
    Ok(SubsetMask::from_indices(group.order(), 0..n))
}

/// `{x : x_i ≤ t - 1 for i ≤ k}` in `C_m^r`, of size `t^k m^{r-k}`.
pub fn box_set(m: u64, r: u32, k: u32, t: u64) -> Result<SubsetMask> {
    let (group, _) = standard_gens(m, r)?;
    if k < 1 || k > r {
        return Err(Error::invalid(format!("box depth k = {k} outside [1, {r}]")));
    }
    if t < 1 || t >= m {
        return Err(Error::invalid(format!("box side t = {t} outside [1, {}]", m - 1)));
    }
    let members = (0..group.order()).filter(|&i| {
        let mut rest = i;
        (0..k).all(|_| {
            let c = rest % m;
            rest /= m;
            c < t
        })
    });
    Ok(SubsetMask::from_indices(group.order(), members))
}
