//! Inference systems over a finite universe of judgments.
//!
//! A system is given by inverse rule enumeration: for a judgment `j`,
//! [`InferenceSystem::premise_candidates`] lists the premise sets of all rules
//! concluding `j`. Interpretations are computed relative to a universe, which
//! is usually the set reachable from some goals (see [`reachable_universe`]).

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use thiserror::Error;

pub trait InferenceSystem {
    type Judgment: Clone + Eq + Hash + Debug;

    /// Premise sets of every rule whose conclusion is `j`. Each set must be finite.
    fn premise_candidates(&self, j: &Self::Judgment) -> Vec<Vec<Self::Judgment>>;
}

impl<S: InferenceSystem + ?Sized> InferenceSystem for &S {
    type Judgment = S::Judgment;

    fn premise_candidates(&self, j: &Self::Judgment) -> Vec<Vec<Self::Judgment>> {
        (**self).premise_candidates(j)
    }
}

/// Rules of both systems.
#[derive(Clone, Copy, Debug)]
pub struct Union<A, B>(pub A, pub B);

impl<A, B> InferenceSystem for Union<A, B>
where
    A: InferenceSystem,
    B: InferenceSystem<Judgment = A::Judgment>,
{
    type Judgment = A::Judgment;

    fn premise_candidates(&self, j: &Self::Judgment) -> Vec<Vec<Self::Judgment>> {
        let mut out = self.0.premise_candidates(j);
        out.extend(self.1.premise_candidates(j));
        out
    }
}

/// A pair ⟨I, I_co⟩ of rules and corules over the same judgments.
#[derive(Clone, Debug)]
pub struct GeneralizedSystem<I, K> {
    pub rules: I,
    pub corules: K,
}

impl<I, K> GeneralizedSystem<I, K>
where
    I: InferenceSystem,
    K: InferenceSystem<Judgment = I::Judgment>,
{
    pub fn new(rules: I, corules: K) -> Self {
        GeneralizedSystem { rules, corules }
    }

    pub fn with_corules(&self) -> Union<&I, &K> {
        Union(&self.rules, &self.corules)
    }
}

/// A finite set of judgments.
pub type Universe<J> = HashSet<J>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InferenceError {
    #[error("reachable universe exceeds the cap of {cap} judgments")]
    UniverseOverflow { cap: usize },
}

/// Closes `goals` under premise enumeration. Fails once more than `cap`
/// judgments have been found.
pub fn reachable_universe<S: InferenceSystem>(
    sys: &S,
    goals: impl IntoIterator<Item = S::Judgment>,
    cap: usize,
) -> Result<Universe<S::Judgment>, InferenceError> {
    let mut seen: Universe<S::Judgment> = HashSet::new();
    let mut todo = Vec::new();
    for g in goals {
        if seen.insert(g.clone()) {
            todo.push(g);
        }
    }
    if seen.len() > cap {
        return Err(InferenceError::UniverseOverflow { cap });
    }
    while let Some(j) = todo.pop() {
        for premises in sys.premise_candidates(&j) {
            for p in premises {
                if seen.insert(p.clone()) {
                    if seen.len() > cap {
                        return Err(InferenceError::UniverseOverflow { cap });
                    }
                    todo.push(p);
                }
            }
        }
    }
    Ok(seen)
}

/// Rules restricted to the universe, in index form.
struct Indexed<J> {
    items: Vec<J>,
    rules: Vec<Vec<Vec<usize>>>,
}

impl<J: Clone + Eq + Hash> Indexed<J> {
    fn new<S: InferenceSystem<Judgment = J>>(sys: &S, universe: &Universe<J>) -> Self {
        let items: Vec<J> = universe.iter().cloned().collect();
        let index: HashMap<&J, usize> = items.iter().enumerate().map(|(i, j)| (j, i)).collect();
        let rules = items
            .iter()
            .map(|j| {
                sys.premise_candidates(j)
                    .into_iter()
                    .filter_map(|ps| ps.iter().map(|p| index.get(p).copied()).collect())
                    .collect()
            })
            .collect();
        Indexed { items, rules }
    }

    fn lfp(&self) -> Vec<bool> {
        let mut x = vec![false; self.items.len()];
        loop {
            let mut changed = false;
            for (i, rules) in self.rules.iter().enumerate() {
                if !x[i] && rules.iter().any(|ps| ps.iter().all(|&p| x[p])) {
                    x[i] = true;
                    changed = true;
                }
            }
            if !changed {
                return x;
            }
        }
    }

    fn gfp(&self, mut x: Vec<bool>) -> Vec<bool> {
        loop {
            let mut changed = false;
            for (i, rules) in self.rules.iter().enumerate() {
                if x[i] && !rules.iter().any(|ps| ps.iter().all(|&p| x[p])) {
                    x[i] = false;
                    changed = true;
                }
            }
            if !changed {
                return x;
            }
        }
    }

    fn collect(&self, x: &[bool]) -> HashSet<J> {
        self.items.iter().zip(x).filter(|(_, &b)| b).map(|(j, _)| j.clone()).collect()
    }
}

/// Least set closed under the rules of `sys` within `universe`.
pub fn interp_inductive<S: InferenceSystem>(
    sys: &S,
    universe: &Universe<S::Judgment>,
) -> HashSet<S::Judgment> {
    let ix = Indexed::new(sys, universe);
    ix.collect(&ix.lfp())
}

/// Largest consistent subset of `universe`.
pub fn interp_coinductive<S: InferenceSystem>(
    sys: &S,
    universe: &Universe<S::Judgment>,
) -> HashSet<S::Judgment> {
    let ix = Indexed::new(sys, universe);
    let all = vec![true; ix.items.len()];
    ix.collect(&ix.gfp(all))
}

/// Flexible coinductive interpretation: the coinductive interpretation of the
/// rules restricted to the inductive interpretation of rules plus corules.
pub fn interp_corules<I, K>(
    gis: &GeneralizedSystem<I, K>,
    universe: &Universe<I::Judgment>,
) -> HashSet<I::Judgment>
where
    I: InferenceSystem,
    K: InferenceSystem<Judgment = I::Judgment>,
{
    let bound = interp_inductive(&gis.with_corules(), universe);
    let ix = Indexed::new(&gis.rules, universe);
    let start: Vec<bool> = ix.items.iter().map(|j| bound.contains(j)).collect();
    ix.collect(&ix.gfp(start))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundedCoinductionFailure<J: Debug> {
    #[error("{0:?} is not derivable with the corules")]
    Unbounded(J),
    #[error("{0:?} has no rule with all premises in the candidate set")]
    Inconsistent(J),
}

/// Checks the two hypotheses of the bounded coinduction principle for `x`.
/// On success every member of `x` belongs to [`interp_corules`].
pub fn bounded_coinduction_check<I, K>(
    gis: &GeneralizedSystem<I, K>,
    x: &HashSet<I::Judgment>,
    universe: &Universe<I::Judgment>,
) -> Result<(), BoundedCoinductionFailure<I::Judgment>>
where
    I: InferenceSystem,
    K: InferenceSystem<Judgment = I::Judgment>,
{
    let mut scope = universe.clone();
    scope.extend(x.iter().cloned());
    let bound = interp_inductive(&gis.with_corules(), &scope);
    for j in x {
        if !bound.contains(j) {
            return Err(BoundedCoinductionFailure::Unbounded(j.clone()));
        }
    }
    for j in x {
        let ok = gis
            .rules
            .premise_candidates(j)
            .iter()
            .any(|ps| ps.iter().all(|p| x.contains(p)));
        if !ok {
            return Err(BoundedCoinductionFailure::Inconsistent(j.clone()));
        }
    }
    Ok(())
}

/// An eventually periodic list `prefix · period^ω`; finite when `period` is empty.
/// Values are kept normalized so that equal lists compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalList {
    prefix: Vec<u64>,
    period: Vec<u64>,
}

impl RationalList {
    pub fn new(prefix: Vec<u64>, period: Vec<u64>) -> Self {
        let mut l = RationalList { prefix, period };
        l.normalize();
        l
    }

    pub fn finite(items: Vec<u64>) -> Self {
        Self::new(items, Vec::new())
    }

    pub fn prefix(&self) -> &[u64] {
        &self.prefix
    }

    pub fn period(&self) -> &[u64] {
        &self.period
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty() && self.period.is_empty()
    }

    /// Head and tail, or `None` for the empty list.
    pub fn uncons(&self) -> Option<(u64, RationalList)> {
        if let Some((&h, rest)) = self.prefix.split_first() {
            return Some((h, RationalList::new(rest.to_vec(), self.period.clone())));
        }
        let (&h, rest) = self.period.split_first()?;
        let mut rotated = rest.to_vec();
        rotated.push(h);
        Some((h, RationalList::new(Vec::new(), rotated)))
    }

    pub fn cons(&self, x: u64) -> RationalList {
        let mut prefix = vec![x];
        prefix.extend_from_slice(&self.prefix);
        RationalList::new(prefix, self.period.clone())
    }

    fn normalize(&mut self) {
        let n = self.period.len();
        if let Some(p) = (1..=n).find(|&p| n % p == 0 && (p..n).all(|i| self.period[i] == self.period[i - p])) {
            self.period.truncate(p);
        }
        while let (Some(&a), Some(&b)) = (self.prefix.last(), self.period.last()) {
            if a != b {
                break;
            }
            self.prefix.pop();
            self.period.rotate_right(1);
        }
    }
}

impl Display for RationalList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[u64]| xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        if self.period.is_empty() {
            write!(f, "[{}]", join(&self.prefix))
        } else {
            write!(f, "[{}|{}]", join(&self.prefix), join(&self.period))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{input}`: {reason}")]
pub struct ParseListError {
    input: String,
    reason: &'static str,
}

impl FromStr for RationalList {
    type Err = ParseListError;

    /// `[1,2]` is finite, `[1|2,3]` is `1:(2:3)^ω`, `L` abbreviates `[|1,2]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| ParseListError { input: s.to_string(), reason };
        let t = s.trim();
        if t == "L" {
            return Ok(RationalList::new(Vec::new(), vec![1, 2]));
        }
        let inner = t
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| err("expected brackets"))?;
        let nums = |part: &str| -> Result<Vec<u64>, ParseListError> {
            part.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| x.parse().map_err(|_| err("expected natural numbers")))
                .collect()
        };
        match inner.split_once('|') {
            Some((pre, per)) => {
                let period = nums(per)?;
                if period.is_empty() {
                    return Err(err("empty period"));
                }
                Ok(RationalList::new(nums(pre)?, period))
            }
            None => Ok(RationalList::finite(nums(inner)?)),
        }
    }
}

/// The judgment `maxElem(l, n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MaxElem {
    pub list: RationalList,
    pub value: u64,
}

impl MaxElem {
    pub fn new(list: RationalList, value: u64) -> Self {
        MaxElem { list, value }
    }
}

impl Display for MaxElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "maxElem({}, {})", self.list, self.value)
    }
}

impl FromStr for MaxElem {
    type Err = ParseListError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| ParseListError { input: s.to_string(), reason };
        let t = s.trim();
        let t = t.strip_prefix("maxElem").unwrap_or(t).trim();
        let t = t.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(t);
        let (list, value) = t.rsplit_once(',').ok_or_else(|| err("expected `list, value`"))?;
        let value = value.trim().parse().map_err(|_| err("expected a natural number"))?;
        Ok(MaxElem::new(list.parse()?, value))
    }
}

/// Rules `maxElem(x:[], x)` and `maxElem(u, y) ⟹ maxElem(x:u, max(x, y))`.
#[derive(Clone, Copy, Debug, Default)]
pub struct MaxElemRules;

/// The coaxiom `maxElem(x:u, x)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct MaxElemCorules;

impl InferenceSystem for MaxElemRules {
    type Judgment = MaxElem;

    fn premise_candidates(&self, j: &MaxElem) -> Vec<Vec<MaxElem>> {
        let Some((x, tail)) = j.list.uncons() else {
            return Vec::new();
        };
        let z = j.value;
        let mut out = Vec::new();
        if tail.is_empty() && x == z {
            out.push(Vec::new());
        }
        if x < z {
            out.push(vec![MaxElem::new(tail, z)]);
        } else if x == z {
            out.extend((0..=z).map(|y| vec![MaxElem::new(tail.clone(), y)]));
        }
        out
    }
}

impl InferenceSystem for MaxElemCorules {
    type Judgment = MaxElem;

    fn premise_candidates(&self, j: &MaxElem) -> Vec<Vec<MaxElem>> {
        match j.list.uncons() {
            Some((x, _)) if x == j.value => vec![Vec::new()],
            _ => Vec::new(),
        }
    }
}

pub fn max_elem_system() -> GeneralizedSystem<MaxElemRules, MaxElemCorules> {
    GeneralizedSystem::new(MaxElemRules, MaxElemCorules)
}
