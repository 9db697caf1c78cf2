use serde::{Deserialize, Serialize};

/// Nonnegative integers `l_1..l_m` with `sum = m` and every proper prefix
/// sum `l_1 + .. + l_p >= p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexTuple(Vec<usize>);

impl IndexTuple {
    /// Checked constructor; `None` unless the entries satisfy the constraints.
    pub fn new(entries: Vec<usize>) -> Option<Self> {
        if is_member(&entries) {
            Some(IndexTuple(entries))
        } else {
            None
        }
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }
}

pub fn is_member(entries: &[usize]) -> bool {
    let m = entries.len();
    let mut partial = 0;
    for (p, &l) in entries.iter().enumerate() {
        partial += l;
        if p + 1 < m && partial < p + 1 {
            return false;
        }
    }
    partial == m
}

/// All tuples of the given order, lexicographically descending. Order 0
/// yields the single empty tuple.
pub fn enumerate_pm(m: usize) -> Vec<IndexTuple> {
    fn rec(m: usize, prefix: &mut Vec<usize>, sum: usize, out: &mut Vec<IndexTuple>) {
        let p = prefix.len();
        if p == m {
            if sum == m {
                out.push(IndexTuple(prefix.clone()));
            }
            return;
        }
        let lo = if p + 1 < m { (p + 1).saturating_sub(sum) } else { m - sum };
        for l in (lo..=m - sum).rev() {
            prefix.push(l);
            rec(m, prefix, sum + l, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, &mut Vec::with_capacity(m), 0, &mut out);
    out
}

/// `|P_m|` by dynamic programming over (position, prefix sum).
pub fn count_pm(m: usize) -> u64 {
    if m == 0 {
        return 1;
    }
    let mut ways = vec![0u64; m + 1];
    ways[0] = 1;
    for p in 1..=m {
        let mut next = vec![0u64; m + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for t in s..=m {
                if p < m && t < p {
                    continue;
                }
                next[t] += w;
            }
        }
        ways = next;
    }
    ways[m]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn brute_force(m: usize) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        let total = (m + 1).pow(m as u32);
        for code in 0..total {
            let mut c = code;
            let t: Vec<usize> = (0..m)
                .map(|_| {
                    let d = c % (m + 1);
                    c /= m + 1;
                    d
                })
                .collect();
            if t.iter().sum::<usize>() != m {
                continue;
            }
            if (1..m).all(|p| t[..p].iter().sum::<usize>() >= p) {
                out.insert(t);
            }
        }
        out
    }

    #[test]
    fn small_orders() {
        assert_eq!(enumerate_pm(0), vec![IndexTuple(vec![])]);
        assert_eq!(enumerate_pm(1), vec![IndexTuple(vec![1])]);
        assert_eq!(enumerate_pm(2), vec![IndexTuple(vec![2, 0]), IndexTuple(vec![1, 1])]);
        assert!(IndexTuple::new(vec![0, 2]).is_none());
        assert!(IndexTuple::new(vec![1, 2, 0]).is_some());
    }

    #[test]
    fn matches_brute_force() {
        for m in 1..=7 {
            let listed: Vec<Vec<usize>> = enumerate_pm(m).into_iter().map(|t| t.0).collect();
            let set: BTreeSet<Vec<usize>> = listed.iter().cloned().collect();
            assert_eq!(set.len(), listed.len(), "duplicates at m={m}");
            assert_eq!(set, brute_force(m), "m={m}");
            assert_eq!(count_pm(m), listed.len() as u64);
            assert!(count_pm(m) <= 4u64.pow(m as u32));
        }
    }
}
