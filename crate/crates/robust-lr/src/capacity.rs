//! Finite-outcome capacity algebra.
//!
//! A belief function on a finite outcome space is stored through its Möbius
//! masses (the law of a random set). Lower and upper capacities, Choquet
//! integrals and core optimization are all derived from those masses.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Sense};

/// Largest supported number of outcomes.
pub const MAX_OUTCOMES: usize = 16;

/// Tolerance below which a Möbius mass counts as genuinely negative.
pub const NOT_BELIEF_TOL: f64 = -1e-10;

/// Masses below this value are pruned after construction.
pub const PRUNE_TOL: f64 = 1e-14;

/// Ordered list of distinct outcome labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSpace {
    labels: Arc<[String]>,
}

impl OutcomeSpace {
    /// Build a space from distinct labels; `2 <= L <= 16`.
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 || labels.len() > MAX_OUTCOMES {
            return Err(Error::InvalidInput(format!(
                "outcome count {} outside 2..=16",
                labels.len()
            )));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::InvalidInput(format!("duplicate outcome label {a}")));
            }
        }
        Ok(Self { labels: labels.into() })
    }

    /// Number of outcomes `L`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false; spaces hold at least two outcomes.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Outcome labels in order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index of a label.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The full set `S`.
    pub fn full(&self) -> SubsetMask {
        SubsetMask(((1u64 << self.len()) - 1) as u32)
    }

    /// Number of subsets, `2^L`.
    pub fn subset_count(&self) -> usize {
        1 << self.len()
    }

    /// Every nonempty proper subset, in increasing mask order.
    pub fn proper_subsets(&self) -> impl Iterator<Item = SubsetMask> {
        (1..self.full().0).map(SubsetMask)
    }

    /// Mask of a set of labels.
    pub fn mask_of(&self, labels: &[&str]) -> Result<SubsetMask> {
        let mut bits = 0u32;
        for l in labels {
            let i = self
                .index_of(l)
                .ok_or_else(|| Error::InvalidInput(format!("unknown outcome {l}")))?;
            bits |= 1 << i;
        }
        Ok(SubsetMask(bits))
    }

    /// Checks that a mask only uses the low `L` bits.
    pub fn check(&self, a: SubsetMask) -> Result<()> {
        if a.0 & !self.full().0 != 0 {
            return Err(Error::InvalidInput(format!("mask {} exceeds outcome space", a.0)));
        }
        Ok(())
    }
}

/// An `L`-bit mask identifying a subset of the outcome space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SubsetMask(pub u32);

impl SubsetMask {
    /// The empty set.
    pub const EMPTY: SubsetMask = SubsetMask(0);

    /// Singleton `{s}`.
    pub fn singleton(s: usize) -> Self {
        SubsetMask(1 << s)
    }

    /// Membership test.
    pub fn contains(self, s: usize) -> bool {
        self.0 >> s & 1 == 1
    }

    /// Subset test `self ⊆ other`.
    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    /// Nonempty intersection test.
    pub fn intersects(self, other: SubsetMask) -> bool {
        self.0 & other.0 != 0
    }

    /// Complement within a space of `l` outcomes.
    pub fn complement(self, l: usize) -> SubsetMask {
        SubsetMask(!self.0 & (((1u64 << l) - 1) as u32))
    }

    /// Cardinality.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// True for the empty set.
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Indices of members in increasing order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&s| self.contains(s))
    }

    /// Build from member indices.
    pub fn from_members(members: impl IntoIterator<Item = usize>) -> Self {
        SubsetMask(members.into_iter().fold(0, |b, s| b | 1 << s))
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Möbius masses of a belief function: the law of a random set.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefMass {
    space: OutcomeSpace,
    // Sorted by mask, no duplicates, every mass > PRUNE_TOL.
    masses: Vec<(SubsetMask, f64)>,
}

impl BeliefMass {
    /// Validate, merge duplicates, prune tiny masses and renormalize.
    pub fn new(space: OutcomeSpace, entries: impl IntoIterator<Item = (SubsetMask, f64)>) -> Result<Self> {
        let mut map: BTreeMap<SubsetMask, f64> = BTreeMap::new();
        for (k, m) in entries {
            space.check(k)?;
            if k.is_empty() {
                if m.abs() > PRUNE_TOL {
                    return Err(Error::InvalidInput("mass on the empty set".into()));
                }
                continue;
            }
            if !m.is_finite() || m < -PRUNE_TOL {
                return Err(Error::InvalidInput(format!("invalid mass {m} on subset {k}")));
            }
            *map.entry(k).or_insert(0.0) += m;
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("masses sum to {total}, not 1")));
        }
        let kept: Vec<(SubsetMask, f64)> = map.into_iter().filter(|(_, m)| *m > PRUNE_TOL).collect();
        let kept_total: f64 = kept.iter().map(|(_, m)| m).sum();
        let masses = kept.into_iter().map(|(k, m)| (k, m / kept_total)).collect();
        Ok(Self { space, masses })
    }

    /// Additive mass of a pmf (singletons only).
    pub fn from_pmf(space: OutcomeSpace, pmf: &[f64]) -> Result<Self> {
        if pmf.len() != space.len() {
            return Err(Error::InvalidInput("pmf length differs from outcome count".into()));
        }
        Self::new(space, pmf.iter().enumerate().map(|(s, &p)| (SubsetMask::singleton(s), p)))
    }

    /// Weighted mixture of masses over one outcome space.
    pub fn mixture(components: &[(f64, &BeliefMass)]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidInput("empty mixture".into()))?;
        let space = first.1.space.clone();
        let mut entries = Vec::new();
        for (w, m) in components {
            if m.space != space {
                return Err(Error::InvalidInput("mixture components differ in outcome space".into()));
            }
            entries.extend(m.masses.iter().map(|(k, v)| (*k, w * v)));
        }
        Self::new(space, entries)
    }

    /// The outcome space.
    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    /// Focal sets and their masses, sorted by mask.
    pub fn focal(&self) -> &[(SubsetMask, f64)] {
        &self.masses
    }

    /// Mass of one subset (zero if not focal).
    pub fn mass(&self, k: SubsetMask) -> f64 {
        self.masses
            .binary_search_by_key(&k, |(m, _)| *m)
            .map(|i| self.masses[i].1)
            .unwrap_or(0.0)
    }

    /// True when every focal set is a singleton.
    pub fn is_additive(&self) -> bool {
        self.masses.iter().all(|(k, _)| k.len() == 1)
    }

    /// Lower capacity `ν(A) = Σ_{K ⊆ A} m(K)`.
    pub fn lower(&self, a: SubsetMask) -> f64 {
        self.masses.iter().filter(|(k, _)| k.is_subset_of(a)).fold(0.0, |acc, (_, m)| acc + m)
    }

    /// Upper capacity `ν*(A) = 1 - ν(A^c)`.
    pub fn upper(&self, a: SubsetMask) -> f64 {
        1.0 - self.lower(a.complement(self.space.len()))
    }

    /// Table of `ν` over all `2^L` subsets by a fast zeta transform.
    pub fn lower_table(&self) -> CapacityTable {
        let l = self.space.len();
        let mut v = vec![0.0; 1 << l];
        for (k, m) in &self.masses {
            v[k.0 as usize] += m;
        }
        for bit in 0..l {
            for a in 0..v.len() {
                if a >> bit & 1 == 1 {
                    v[a] += v[a ^ (1 << bit)];
                }
            }
        }
        v[0] = 0.0;
        CapacityTable { space: self.space.clone(), values: v }
    }

    /// Table of `ν*` over all subsets.
    pub fn upper_table(&self) -> CapacityTable {
        let lower = self.lower_table();
        let full = self.space.full().0 as usize;
        let values = (0..lower.values.len()).map(|a| 1.0 - lower.values[full ^ a]).collect();
        CapacityTable { space: self.space.clone(), values }
    }

    /// Choquet integral with respect to `ν`: `Σ_K min_{s∈K} f(s) m(K)`.
    pub fn choquet_lower(&self, f: &[f64]) -> f64 {
        self.masses
            .iter()
            .map(|(k, m)| m * k.members().map(|s| f[s]).fold(f64::INFINITY, f64::min))
            .sum()
    }

    /// Choquet integral with respect to `ν*`: `Σ_K max_{s∈K} f(s) m(K)`.
    pub fn choquet_upper(&self, f: &[f64]) -> f64 {
        self.masses
            .iter()
            .map(|(k, m)| m * k.members().map(|s| f[s]).fold(f64::NEG_INFINITY, f64::max))
            .sum()
    }

    /// Point of the core spreading every mass evenly over its focal set.
    ///
    /// This point satisfies `p(A) > ν(A)` for every event `A` that some focal
    /// set straddles, so it lies in the relative interior of the core.
    pub fn barycenter(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.space.len()];
        for (k, m) in &self.masses {
            let share = m / k.len() as f64;
            for s in k.members() {
                p[s] += share;
            }
        }
        p
    }

    /// True when `p` is a pmf dominating `ν` up to `tol`.
    pub fn in_core(&self, p: &[f64], tol: f64) -> bool {
        if p.len() != self.space.len() || p.iter().any(|&x| x < -tol) {
            return false;
        }
        if (p.iter().sum::<f64>() - 1.0).abs() > tol {
            return false;
        }
        let nu = self.lower_table();
        let full = self.space.full().0;
        (1..full).all(|a| {
            let pa: f64 = SubsetMask(a).members().map(|s| p[s]).sum();
            pa >= nu.values[a as usize] - tol
        })
    }

    /// Serializable form with labels and decimal-string bitmask keys.
    pub fn to_json(&self) -> BeliefMassJson {
        BeliefMassJson {
            labels: self.space.labels().to_vec(),
            masses: self.masses.iter().map(|(k, m)| (k.0.to_string(), *m)).collect(),
        }
    }

    /// Parse the serialized form.
    pub fn from_json(json: &BeliefMassJson) -> Result<Self> {
        let space = OutcomeSpace::new(json.labels.iter().cloned())?;
        let mut entries = Vec::new();
        for (k, m) in &json.masses {
            let bits: u32 = k
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad subset key {k}")))?;
            entries.push((SubsetMask(bits), *m));
        }
        Self::new(space, entries)
    }
}

/// JSON layout of a belief mass.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BeliefMassJson {
    /// Outcome labels in order.
    pub labels: Vec<String>,
    /// Map from decimal bitmask string to mass.
    pub masses: BTreeMap<String, f64>,
}

/// A set function evaluated on every subset, indexed by mask.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityTable {
    space: OutcomeSpace,
    values: Vec<f64>,
}

impl CapacityTable {
    /// Build from `2^L` values indexed by mask; checks `ν(∅) = 0`, `ν(S) = 1`, monotonicity.
    pub fn new(space: OutcomeSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.subset_count() {
            return Err(Error::InvalidInput("capacity table has wrong length".into()));
        }
        let full = space.full().0 as usize;
        if values[0].abs() > 1e-12 || (values[full] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("capacity must vanish on ∅ and equal 1 on S".into()));
        }
        for a in 0..values.len() {
            for bit in 0..space.len() {
                if a >> bit & 1 == 0 && values[a] > values[a | 1 << bit] + 1e-12 {
                    return Err(Error::InvalidInput(format!("capacity not monotone at subset {a}")));
                }
            }
        }
        Ok(Self { space, values })
    }

    /// The outcome space.
    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    /// Value on one subset.
    pub fn get(&self, a: SubsetMask) -> f64 {
        self.values[a.0 as usize]
    }

    /// All values indexed by mask.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Lower capacity `ν(A)`.
pub fn lower_capacity(mass: &BeliefMass, a: SubsetMask) -> f64 {
    mass.lower(a)
}

/// Upper capacity `ν*(A) = 1 - ν(A^c)`.
pub fn upper_capacity(mass: &BeliefMass, a: SubsetMask) -> f64 {
    mass.upper(a)
}

/// Möbius inversion of a capacity table.
pub fn mobius_inverse(table: &CapacityTable) -> Result<BeliefMass> {
    let l = table.space.len();
    let mut m = table.values.clone();
    for bit in 0..l {
        for a in 0..m.len() {
            if a >> bit & 1 == 1 {
                m[a] -= m[a ^ (1 << bit)];
            }
        }
    }
    for (k, &v) in m.iter().enumerate().skip(1) {
        if v < NOT_BELIEF_TOL {
            return Err(Error::NotBeliefFunction { mask: k as u32, mass: v });
        }
    }
    let entries: Vec<(SubsetMask, f64)> = m
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &v)| (SubsetMask(k as u32), v.max(0.0)))
        .collect();
    let total: f64 = entries.iter().map(|e| e.1).sum();
    BeliefMass::new(table.space.clone(), entries.into_iter().map(|(k, v)| (k, v / total)))
}

/// Choquet integral of `f` with respect to the lower capacity.
pub fn choquet_lower(mass: &BeliefMass, f: &[f64]) -> f64 {
    mass.choquet_lower(f)
}

/// Choquet integral of `f` with respect to the upper capacity.
pub fn choquet_upper(mass: &BeliefMass, f: &[f64]) -> f64 {
    mass.choquet_upper(f)
}

/// Optimization direction for [`core_lp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Minimize over the core.
    Min,
    /// Maximize over the core.
    Max,
}

/// Optimize `Σ f(s) p(s)` over the core by the dense simplex method.
///
/// The program is solved through its dual, which has one row per outcome and
/// one column per event with positive lower capacity; the optimizing pmf is
/// read off the row duals.
pub fn core_lp(mass: &BeliefMass, f: &[f64], direction: Direction) -> Result<(f64, Vec<f64>)> {
    let l = mass.space.len();
    if f.len() != l || f.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("integrand must be finite with one value per outcome".into()));
    }
    let sign = match direction {
        Direction::Min => 1.0,
        Direction::Max => -1.0,
    };
    let g: Vec<f64> = f.iter().map(|v| sign * v).collect();
    let shift = g.iter().cloned().fold(f64::INFINITY, f64::min);
    let g: Vec<f64> = g.iter().map(|v| v - shift).collect();
    let nu = mass.lower_table();
    let events: Vec<u32> = (1..mass.space.full().0)
        .filter(|&a| nu.values[a as usize] > 0.0)
        .collect();
    // Dual: max Σ ν(A) y_A + z  s.t.  Σ_{A∋s} y_A + z <= g(s), y >= 0, z free.
    let mut objective: Vec<f64> = events.iter().map(|&a| -nu.values[a as usize]).collect();
    objective.push(-1.0);
    objective.push(1.0);
    let mut lp = LinearProgram::new(objective);
    for s in 0..l {
        let mut row: Vec<f64> = events.iter().map(|&a| if a >> s & 1 == 1 { 1.0 } else { 0.0 }).collect();
        row.push(1.0);
        row.push(-1.0);
        lp.push(row, Sense::Le, g[s]);
    }
    let sol = lp.solve()?;
    let mut p: Vec<f64> = sol.duals.iter().map(|d| (-d).max(0.0)).collect();
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return Err(Error::LpNumericalFailure("core LP returned a null pmf".into()));
    }
    p.iter_mut().for_each(|x| *x /= total);
    let value = f.iter().zip(&p).map(|(a, b)| a * b).sum();
    Ok((value, p))
}

/// Minimal total mass of a nonnegative vector dominating `w` on every event.
///
/// Cores of capacities `ν0`, `ν1` intersect exactly when this value for
/// `w = max(ν0, ν1)` equals one.
pub fn domination_mass(space: &OutcomeSpace, w: &[f64]) -> Result<f64> {
    let l = space.len();
    let events: Vec<usize> = (1..=space.full().0 as usize).filter(|&a| w[a] > 0.0).collect();
    // Dual: max Σ w(A) y_A s.t. Σ_{A∋s} y_A <= 1, y >= 0.
    let objective: Vec<f64> = events.iter().map(|&a| -w[a]).collect();
    let mut lp = LinearProgram::new(objective);
    for s in 0..l {
        let row = events.iter().map(|&a| if a >> s & 1 == 1 { 1.0 } else { 0.0 }).collect();
        lp.push(row, Sense::Le, 1.0);
    }
    Ok(-lp.solve()?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::cdf;

    fn entry_space() -> OutcomeSpace {
        OutcomeSpace::new(["(0,0)", "(1,1)", "(1,0)", "(0,1)"]).unwrap()
    }

    fn entry_mass(t1: f64, t2: f64) -> BeliefMass {
        let (a, b) = (cdf(t1), cdf(t2));
        BeliefMass::new(
            entry_space(),
            [
                (SubsetMask(0b0001), 0.25),
                (SubsetMask(0b0010), a * b),
                (SubsetMask(0b0100), 0.25 - a * b + a / 2.0),
                (SubsetMask(0b1000), 0.25 - a * b + b / 2.0),
                (SubsetMask(0b1100), (0.5 - a) * (0.5 - b)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_and_full_sets() {
        let m = entry_mass(-1.0, -1.0);
        assert_eq!(m.lower(SubsetMask::EMPTY), 0.0);
        assert!((m.upper(m.space().full()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn entry_game_capacities_at_minus_one() {
        let m = entry_mass(-1.0, -1.0);
        let phi = cdf(-1.0);
        assert!((m.lower(SubsetMask(0b0100)) - (0.25 - phi * phi + phi / 2.0)).abs() < 1e-15);
        assert!((m.upper(SubsetMask(0b0100)) - 0.5 * (1.0 - phi)).abs() < 1e-15);
        assert!((m.lower(SubsetMask(0b1100)) - (0.75 - phi * phi)).abs() < 1e-15);
        // Seven-digit reference values, rounded.
        let a10 = SubsetMask(0b0100);
        assert!((m.lower(a10) - 0.304_156_3).abs() < 5e-7);
        assert!((m.upper(a10) - 0.420_672_5).abs() < 5e-7);
        let both = SubsetMask(0b1100);
        assert!((m.choquet_lower(&[0.0, 0.0, 1.0, 1.0]) - 0.724_828_8).abs() < 5e-7);
        assert!((m.lower(both) - 0.724_828_8).abs() < 5e-7);
        assert!((m.choquet_upper(&[0.0, 0.0, 1.0, 0.0]) - 0.420_672_5).abs() < 5e-7);
    }

    #[test]
    fn symmetric_point_is_uniform() {
        let m = entry_mass(0.0, 0.0);
        let a = SubsetMask(0b0110);
        assert!((m.lower(a) - 0.5).abs() < 1e-15);
        assert!(m.is_additive());
        for k in 1..16 {
            let k = SubsetMask(k);
            assert!((m.lower(k) - m.upper(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn mobius_inverse_recovers_entry_masses() {
        let m = entry_mass(-1.0, -1.0);
        let back = mobius_inverse(&m.lower_table()).unwrap();
        for (k, v) in m.focal() {
            assert!((back.mass(*k) - v).abs() < 1e-12);
        }
        assert!((back.mass(SubsetMask(0b1100)) - 0.116_516_1).abs() < 5e-7);
        let phi = cdf(-1.0);
        assert!((back.mass(SubsetMask(0b1100)) - (0.5 - phi) * (0.5 - phi)).abs() < 1e-14);
    }

    #[test]
    fn mobius_inverse_rejects_non_belief_table() {
        let space = OutcomeSpace::new(["a", "b"]).unwrap();
        let t = CapacityTable::new(space, vec![0.0, 0.6, 0.6, 1.0]).unwrap();
        match mobius_inverse(&t) {
            Err(Error::NotBeliefFunction { mask, mass }) => {
                assert_eq!(mask, 3);
                assert!((mass + 0.2).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn additive_table_gives_singleton_masses() {
        let space = OutcomeSpace::new(["a", "b", "c"]).unwrap();
        let m = BeliefMass::from_pmf(space, &[0.2, 0.3, 0.5]).unwrap();
        let back = mobius_inverse(&m.lower_table()).unwrap();
        assert!(back.is_additive());
        assert_eq!(back.focal().len(), 3);
    }

    #[test]
    fn core_lp_matches_choquet_on_entry_game() {
        let m = entry_mass(-1.0, -1.0);
        let f = [0.0, 0.0, 1.0, 1.0];
        let (v, p) = core_lp(&m, &f, Direction::Min).unwrap();
        assert!((v - 0.724_828_8).abs() < 5e-7);
        assert!(m.in_core(&p, 1e-12));
        let (v, _) = core_lp(&m, &[0.0; 4], Direction::Max).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn core_lp_on_additive_mass() {
        let space = OutcomeSpace::new(["a", "b", "c"]).unwrap();
        let m = BeliefMass::from_pmf(space, &[0.2, 0.3, 0.5]).unwrap();
        let (v, p) = core_lp(&m, &[1.0, -2.0, 4.0], Direction::Max).unwrap();
        assert!((v - (0.2 - 0.6 + 2.0)).abs() < 1e-12);
        assert!((p[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let m = entry_mass(-0.5, -1.5);
        let text = serde_json::to_string(&m.to_json()).unwrap();
        let back = BeliefMass::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        for ((k1, v1), (k2, v2)) in back.focal().iter().zip(m.focal()) {
            assert_eq!(k1, k2);
            assert!((v1 - v2).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_masses_are_rejected() {
        let space = OutcomeSpace::new(["a", "b"]).unwrap();
        assert!(BeliefMass::new(space.clone(), [(SubsetMask(1), 0.5)]).is_err());
        assert!(BeliefMass::new(space.clone(), [(SubsetMask(4), 1.0)]).is_err());
        assert!(OutcomeSpace::new(["a", "a"]).is_err());
        assert!(OutcomeSpace::new(["a"]).is_err());
    }
}
