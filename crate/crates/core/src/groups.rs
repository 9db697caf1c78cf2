//! Finite groups given by Cayley tables.
//!
//! Elements are dense indices `0..order` and the identity is always index 0.

use crate::error::{QdError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    labels: Vec<String>,
}

impl FiniteGroup {
    /// Builds a group from raw tables without checking the axioms.
    ///
    /// Use [`verify_group_axioms`] on the result when the tables come from outside.
    pub fn from_tables(name: &str, mul: Vec<Vec<usize>>, inv: Vec<usize>) -> Self {
        let order = mul.len();
        let labels = (0..order).map(|i| i.to_string()).collect();
        FiniteGroup {
            name: name.to_string(),
            order,
            mul,
            inv,
            labels,
        }
    }

    /// Cayley table of a list of permutations that is closed under composition
    /// and starts with the identity.
    fn from_permutations(name: &str, perms: Vec<Vec<usize>>) -> Self {
        let order = perms.len();
        let index_of = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed set");
        let mut mul = vec![vec![0; order]; order];
        let mut inv = vec![0; order];
        for (a, pa) in perms.iter().enumerate() {
            for (b, pb) in perms.iter().enumerate() {
                // (a*b)(x) = a(b(x))
                let prod: Vec<usize> = pb.iter().map(|&x| pa[x]).collect();
                mul[a][b] = index_of(&prod);
            }
            let mut pinv = vec![0; pa.len()];
            for (x, &y) in pa.iter().enumerate() {
                pinv[y] = x;
            }
            inv[a] = index_of(&pinv);
        }
        let labels = perms.iter().map(|p| cycle_notation(p)).collect();
        FiniteGroup {
            name: name.to_string(),
            order,
            mul,
            inv,
            labels,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    /// `g^{-1} h g`
    #[inline]
    pub fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(self.inv(g), h), g)
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn is_abelian(&self) -> bool {
        self.elements()
            .all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Product of a sequence, left to right: `seq[0] * seq[1] * ...`.
    pub fn product<I: IntoIterator<Item = usize>>(&self, seq: I) -> usize {
        seq.into_iter().fold(0, |acc, x| self.mul(acc, x))
    }
}

fn cycle_notation(p: &[usize]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        out.push('(');
        let mut x = start;
        loop {
            seen[x] = true;
            out.push_str(&(x + 1).to_string());
            x = p[x];
            if x == start {
                break;
            }
        }
        out.push(')');
    }
    if out.is_empty() {
        "e".to_string()
    } else {
        out
    }
}

pub fn make_cyclic(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(QdError::invalid("cyclic group order must be at least 1"));
    }
    let mul = (0..n)
        .map(|a| (0..n).map(|b| (a + b) % n).collect())
        .collect();
    let inv = (0..n).map(|a| (n - a) % n).collect();
    let mut g = FiniteGroup::from_tables(&format!("Z{n}"), mul, inv);
    g.labels = (0..n).map(|a| a.to_string()).collect();
    Ok(g)
}

fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                rec(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Symmetric group on three letters; lexicographic order puts the identity first.
pub fn make_symmetric_3() -> FiniteGroup {
    FiniteGroup::from_permutations("S3", all_permutations(3))
}

/// Symmetries of a square acting on its corners 0..3.
pub fn make_dihedral_4() -> FiniteGroup {
    let rot = vec![1, 2, 3, 0];
    let refl = vec![0, 3, 2, 1];
    let compose = |a: &Vec<usize>, b: &Vec<usize>| -> Vec<usize> { b.iter().map(|&x| a[x]).collect() };
    let mut perms: Vec<Vec<usize>> = vec![vec![0, 1, 2, 3]];
    let mut frontier = perms.clone();
    while let Some(p) = frontier.pop() {
        for gen in [&rot, &refl] {
            let q = compose(gen, &p);
            if !perms.contains(&q) {
                perms.push(q.clone());
                frontier.push(q);
            }
        }
    }
    perms[1..].sort();
    FiniteGroup::from_permutations("D4", perms)
}

/// Looks up a shipped group by its CLI name (`Z<n>`, `S3`, `D4`).
pub fn group_by_name(name: &str) -> Result<FiniteGroup> {
    match name {
        "S3" => Ok(make_symmetric_3()),
        "D4" => Ok(make_dihedral_4()),
        _ => {
            let n = name
                .strip_prefix('Z')
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| QdError::invalid(format!("unknown group '{name}'")))?;
            make_cyclic(n)
        }
    }
}

pub fn verify_group_axioms(g: &FiniteGroup) -> Result<bool> {
    let n = g.order;
    if n == 0 || g.mul.len() != n || g.inv.len() != n || g.mul.iter().any(|row| row.len() != n) {
        return Err(QdError::invalid(format!(
            "group tables do not match order {n}"
        )));
    }
    if g.mul.iter().flatten().chain(g.inv.iter()).any(|&x| x >= n) {
        return Err(QdError::invalid("group table entry out of range"));
    }
    let is_perm = |items: Vec<usize>| {
        let mut seen = vec![false; n];
        items.into_iter().all(|x| !std::mem::replace(&mut seen[x], true))
    };
    for a in 0..n {
        if !is_perm(g.mul[a].clone()) || !is_perm((0..n).map(|b| g.mul[b][a]).collect()) {
            return Ok(false);
        }
        if g.mul[0][a] != a || g.mul[a][0] != a || g.mul[a][g.inv[a]] != 0 {
            return Ok(false);
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if g.mul[g.mul[a][b]][c] != g.mul[a][g.mul[b][c]] {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_examples() {
        let z2 = make_cyclic(2).unwrap();
        assert_eq!(z2.mul(1, 1), 0);
        let z1 = make_cyclic(1).unwrap();
        assert_eq!(z1.order(), 1);
        assert_eq!(z1.mul(0, 0), 0);
        assert_eq!(make_cyclic(3).unwrap().inv(1), 2);
        assert!(matches!(make_cyclic(0), Err(QdError::InvalidArgument(_))));
    }

    #[test]
    fn symmetric_3_shape() {
        let s3 = make_symmetric_3();
        assert_eq!(s3.order(), 6);
        assert_eq!(s3.label(0), "e");
        assert!(!s3.is_abelian());
        let t12 = (0..6).find(|&a| s3.label(a) == "(12)").unwrap();
        let t13 = (0..6).find(|&a| s3.label(a) == "(13)").unwrap();
        assert_ne!(s3.mul(t12, t13), s3.mul(t13, t12));
        let c1 = (0..6).find(|&a| s3.label(a) == "(123)").unwrap();
        let c2 = (0..6).find(|&a| s3.label(a) == "(132)").unwrap();
        assert_eq!(s3.inv(c1), c2);
    }

    #[test]
    fn shipped_groups_satisfy_axioms() {
        for name in ["Z1", "Z2", "Z3", "Z4", "S3", "D4"] {
            let g = group_by_name(name).unwrap();
            assert!(verify_group_axioms(&g).unwrap(), "{name}");
            for a in g.elements() {
                assert_eq!(g.inv(g.inv(a)), a);
            }
        }
        assert_eq!(make_dihedral_4().order(), 8);
        assert!(!make_dihedral_4().is_abelian());
        assert!(group_by_name("Q8").is_err());
    }

    #[test]
    fn broken_tables_are_rejected() {
        let bad = FiniteGroup::from_tables("bad", vec![vec![0, 1], vec![1, 1]], vec![0, 1]);
        assert!(!verify_group_axioms(&bad).unwrap());
        let ragged = FiniteGroup::from_tables("ragged", vec![vec![0, 1], vec![1]], vec![0, 1]);
        assert!(matches!(verify_group_axioms(&ragged), Err(QdError::InvalidArgument(_))));
    }
}
