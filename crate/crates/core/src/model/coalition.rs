use std::fmt;

use serde::{Deserialize, Serialize};

/// A set of agents allowed to exchange local state at one step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coalition(Vec<usize>);

impl Coalition {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self(members)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, agent: usize) -> bool {
        self.0.binary_search(&agent).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Coalition {
    /// Agents are printed 1-based (`{R1,R3}`); the empty coalition prints as `{}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "R{}", m + 1)?;
        }
        write!(f, "}}")
    }
}

/// All communication actions for `n` agents with bound `k`.
///
/// `k = 0` yields the single empty coalition. Otherwise exactly the size-`k`
/// subsets in lexicographic order, followed by smaller non-empty subsets when
/// `allow_smaller` is set.
pub fn enumerate_coalitions(n: usize, k: usize, allow_smaller: bool) -> Vec<Coalition> {
    if k == 0 {
        return vec![Coalition::empty()];
    }
    let mut out = subsets_of_size(n, k);
    if allow_smaller {
        for size in (1..k).rev() {
            out.extend(subsets_of_size(n, size));
        }
    }
    out
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Coalition> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(Coalition(idx.clone()));
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_agents_pairs() {
        let cs = enumerate_coalitions(3, 2, false);
        let got: Vec<_> = cs.iter().map(|c| c.members().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(cs[1].to_string(), "{R1,R3}");
    }

    #[test]
    fn zero_bound_is_empty_coalition() {
        assert_eq!(enumerate_coalitions(1, 0, false), vec![Coalition::empty()]);
        assert_eq!(enumerate_coalitions(4, 0, true), vec![Coalition::empty()]);
    }

    #[test]
    fn smaller_coalitions_on_request() {
        let cs = enumerate_coalitions(3, 2, true);
        assert_eq!(cs.len(), 6);
        assert!(cs.iter().all(|c| !c.is_empty() && c.len() <= 2));
    }

    #[test]
    fn full_coalition() {
        let cs = enumerate_coalitions(3, 3, false);
        assert_eq!(cs, vec![Coalition::new(vec![2, 0, 1])]);
    }
}
