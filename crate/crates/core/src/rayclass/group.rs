//! Finite abelian groups given by generators and relations, normalised
//! through the Smith normal form.

use std::fmt;

use crate::error::{Error, Result};

/// A finite abelian group `Z^n / R`, where the rows of `R` are relations
/// between `n` labelled generators.
///
/// Elements are canonically represented by coordinates `c_i mod d_i` with
/// respect to the invariant factors `d_1 | d_2 | ... | d_k` (all `> 1`).
#[derive(Clone, PartialEq, Eq)]
pub struct FinAbGroup {
    labels: Vec<String>,
    relations: Vec<Vec<i64>>,
    invariants: Vec<i64>,
    /// n x k: generator exponents -> canonical coordinates.
    to_snf: Vec<Vec<i64>>,
    /// k x n: canonical generator j as generator exponents.
    from_snf: Vec<Vec<i64>>,
}

struct SnfWork {
    a: Vec<Vec<i128>>,
    v: Vec<Vec<i128>>,
    vinv: Vec<Vec<i128>>,
}

impl SnfWork {
    fn col_axpy(&mut self, j: usize, t: usize, q: i128) {
        // col_j -= q * col_t
        for row in self.a.iter_mut() {
            row[j] -= q * row[t];
        }
        for row in self.v.iter_mut() {
            row[j] -= q * row[t];
        }
        // inverse: row_t += q * row_j
        let rj = self.vinv[j].clone();
        for (x, y) in self.vinv[t].iter_mut().zip(rj) {
            *x += q * y;
        }
    }

    fn col_swap(&mut self, i: usize, j: usize) {
        for row in self.a.iter_mut() {
            row.swap(i, j);
        }
        for row in self.v.iter_mut() {
            row.swap(i, j);
        }
        self.vinv.swap(i, j);
    }

    fn row_axpy(&mut self, i: usize, t: usize, q: i128) {
        let rt = self.a[t].clone();
        for (x, y) in self.a[i].iter_mut().zip(rt) {
            *x -= q * y;
        }
    }
}

type Transform = Vec<Vec<i128>>;

/// Smith normal form of a relation matrix. Returns the full diagonal and
/// the column transform with its inverse.
fn smith(relations: &[Vec<i64>], n: usize) -> Result<(Vec<i128>, Transform, Transform)> {
    let identity = |n: usize| -> Vec<Vec<i128>> {
        (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
    };
    let mut w = SnfWork {
        a: relations
            .iter()
            .map(|r| {
                assert_eq!(r.len(), n, "relation length must match generator count");
                r.iter().map(|&x| x as i128).collect()
            })
            .collect(),
        v: identity(n),
        vinv: identity(n),
    };
    let rows = w.a.len();
    let mut diag = vec![];
    for t in 0..n.min(rows) {
        loop {
            // Pivot: smallest nonzero entry in the lower-right block.
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..n {
                    if w.a[i][j] != 0 && best.is_none_or(|(bi, bj)| w.a[i][j].abs() < w.a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break;
            };
            w.a.swap(t, pi);
            if pj != t {
                w.col_swap(t, pj);
            }
            let mut clean = true;
            for i in t + 1..rows {
                let q = w.a[i][t].div_euclid(w.a[t][t]);
                if q != 0 {
                    w.row_axpy(i, t, q);
                }
                if w.a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = w.a[t][j].div_euclid(w.a[t][t]);
                if q != 0 {
                    w.col_axpy(j, t, q);
                }
                if w.a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Divisibility condition on the rest of the block.
            let p = w.a[t][t];
            let bad = (t + 1..rows).find(|&i| (t + 1..n).any(|j| w.a[i][j] % p != 0));
            match bad {
                Some(i) => {
                    // row_t += row_i
                    w.row_axpy(t, i, -1);
                }
                None => break,
            }
        }
        if t < rows {
            if w.a[t][t] < 0 {
                for x in w.a[t].iter_mut() {
                    *x = -*x;
                }
            }
            diag.push(w.a[t][t]);
        }
        // Keep the transform entries bounded.
        if w.v.iter().flatten().any(|x| x.abs() > 1 << 100) {
            return Err(Error::Internal("Smith normal form transform overflow".into()));
        }
    }
    while diag.len() < n {
        diag.push(0);
    }
    Ok((diag, w.v, w.vinv))
}

impl FinAbGroup {
    /// The group generated by `labels.len()` generators subject to `relations`.
    pub fn from_relations(labels: Vec<String>, relations: Vec<Vec<i64>>) -> Result<Self> {
        let n = labels.len();
        let (diag, v, vinv) = smith(&relations, n)?;
        if diag.contains(&0) {
            return Err(Error::InvalidInput("relations do not define a finite group".into()));
        }
        let keep: Vec<usize> = (0..n).filter(|&j| diag[j] != 1).collect();
        let invariants: Vec<i64> = keep.iter().map(|&j| diag[j] as i64).collect();
        let to_snf = (0..n)
            .map(|i| keep.iter().zip(&invariants).map(|(&j, &d)| v[i][j].rem_euclid(d as i128) as i64).collect())
            .collect();
        let from_snf = keep
            .iter()
            .map(|&j| {
                vinv[j]
                    .iter()
                    .map(|&x| i64::try_from(x).map_err(|_| Error::Internal("SNF inverse overflow".into())))
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FinAbGroup { labels, relations, invariants, to_snf, from_snf })
    }

    /// The group with generators labelled `g0, g1, ...` and the given relations.
    pub fn snf(relations: &[Vec<i64>]) -> Result<Self> {
        let n = relations.first().map_or(0, |r| r.len());
        let labels = (0..n).map(|i| format!("g{i}")).collect();
        FinAbGroup::from_relations(labels, relations.to_vec())
    }

    pub fn trivial() -> Self {
        FinAbGroup {
            labels: vec![],
            relations: vec![],
            invariants: vec![],
            to_snf: vec![],
            from_snf: vec![],
        }
    }

    /// Cyclic group of order `n` with one generator.
    pub fn cyclic(n: i64, label: &str) -> Result<Self> {
        FinAbGroup::from_relations(vec![label.to_string()], vec![vec![n]])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn relations(&self) -> &[Vec<i64>] {
        &self.relations
    }

    pub fn num_generators(&self) -> usize {
        self.labels.len()
    }

    /// Invariant factors `d_1 | d_2 | ...`, each greater than one.
    pub fn invariants(&self) -> &[i64] {
        &self.invariants
    }

    pub fn order(&self) -> i64 {
        self.invariants.iter().product()
    }

    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    pub fn identity(&self) -> Vec<i64> {
        vec![0; self.rank()]
    }

    /// Canonical coordinates of the element with the given generator exponents.
    pub fn reduce(&self, exponents: &[i64]) -> Vec<i64> {
        assert_eq!(exponents.len(), self.num_generators());
        (0..self.rank())
            .map(|j| {
                let d = self.invariants[j] as i128;
                let s: i128 = exponents.iter().zip(&self.to_snf).map(|(&e, row)| e as i128 * row[j] as i128).sum();
                s.rem_euclid(d) as i64
            })
            .collect()
    }

    /// Generator exponents representing canonical coordinates `c`.
    pub fn lift(&self, c: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.num_generators()];
        for (cj, row) in c.iter().zip(&self.from_snf) {
            for (o, r) in out.iter_mut().zip(row) {
                *o += cj * r;
            }
        }
        out
    }

    pub fn normalize(&self, c: &[i64]) -> Vec<i64> {
        c.iter().zip(&self.invariants).map(|(x, d)| x.rem_euclid(*d)).collect()
    }

    pub fn add(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        x.iter().zip(y).zip(&self.invariants).map(|((a, b), d)| (a + b).rem_euclid(*d)).collect()
    }

    pub fn neg(&self, x: &[i64]) -> Vec<i64> {
        x.iter().zip(&self.invariants).map(|(a, d)| (-a).rem_euclid(*d)).collect()
    }

    pub fn scale(&self, x: &[i64], k: i64) -> Vec<i64> {
        x.iter()
            .zip(&self.invariants)
            .map(|(a, d)| ((*a as i128 * k as i128).rem_euclid(*d as i128)) as i64)
            .collect()
    }

    pub fn is_identity(&self, x: &[i64]) -> bool {
        x.iter().zip(&self.invariants).all(|(a, d)| a.rem_euclid(*d) == 0)
    }

    /// Order of an element given in canonical coordinates.
    pub fn element_order(&self, x: &[i64]) -> i64 {
        x.iter()
            .zip(&self.invariants)
            .map(|(a, d)| d / crate::arith::gcd(*a, *d))
            .fold(1, crate::arith::lcm)
    }

    /// Every element in canonical coordinates, in lexicographic order.
    pub fn elements(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for &d in &self.invariants {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..d).map(move |i| {
                        let mut p = prefix.clone();
                        p.push(i);
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// The quotient by the subgroup generated by `gens` (canonical coordinates).
    /// The quotient's presentation generators are this group's canonical generators.
    pub fn quotient(&self, gens: &[Vec<i64>]) -> Result<FinAbGroup> {
        let k = self.rank();
        let mut rels: Vec<Vec<i64>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { self.invariants[i] } else { 0 }).collect())
            .collect();
        rels.extend(gens.iter().map(|g| self.normalize(g)));
        let labels = (0..k).map(|i| format!("e{i}")).collect();
        FinAbGroup::from_relations(labels, rels)
    }

    /// Order of the subgroup generated by `gens`.
    pub fn subgroup_order(&self, gens: &[Vec<i64>]) -> Result<i64> {
        Ok(self.order() / self.quotient(gens)?.order())
    }

    pub fn subgroup_contains(&self, gens: &[Vec<i64>], x: &[i64]) -> Result<bool> {
        let q = self.quotient(gens)?;
        Ok(q.is_identity(&q.reduce(x)))
    }

    /// Same invariant factors.
    pub fn is_isomorphic(&self, other: &FinAbGroup) -> bool {
        self.invariants == other.invariants
    }
}

impl fmt::Debug for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinAbGroup{:?}", self.invariants)
    }
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariants.is_empty() {
            return write!(f, "trivial group");
        }
        let parts: Vec<String> = self.invariants.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn diag_2_3_is_z6() {
        let g = FinAbGroup::snf(&[vec![2, 0], vec![0, 3]]).unwrap();
        assert_eq!(g.invariants(), &[6]);
    }

    #[test]
    fn identity_is_trivial() {
        let g = FinAbGroup::snf(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(g.order(), 1);
        assert!(g.invariants().is_empty());
    }

    #[test]
    fn single_relation_z7() {
        let g = FinAbGroup::snf(&[vec![7]]).unwrap();
        assert_eq!(g.invariants(), &[7]);
        assert_eq!(g.reduce(&[9]), vec![2]);
    }

    #[test]
    fn redundant_rows_and_infinite_detection() {
        let g = FinAbGroup::snf(&[vec![4, 6], vec![6, 4], vec![2, 2], vec![8, 8]]).unwrap();
        assert_eq!(g.invariants(), &[2, 2]);
        assert!(FinAbGroup::snf(&[vec![2, 0]]).is_err());
    }

    #[test]
    fn quotient_and_membership() {
        let g = FinAbGroup::snf(&[vec![2, 0], vec![0, 4]]).unwrap();
        assert_eq!(g.invariants(), &[2, 4]);
        let h = vec![g.reduce(&[0, 2])];
        assert_eq!(g.subgroup_order(&h).unwrap(), 2);
        assert!(g.subgroup_contains(&h, &g.reduce(&[0, 6])).unwrap());
        assert!(!g.subgroup_contains(&h, &g.reduce(&[1, 0])).unwrap());
    }

    fn relation_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..4).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::vec(-12i64..12, n), n..n + 3)
                .prop_map(move |mut rows| {
                    for (i, r) in rows.iter_mut().enumerate().take(n) {
                        r[i] += 25;
                    }
                    rows
                })
                .prop_filter("finite", |rows| FinAbGroup::snf(rows).is_ok())
        })
    }

    proptest! {
        #[test]
        fn snf_is_consistent(rows in relation_matrix()) {
            let g = FinAbGroup::snf(&rows).unwrap();
            for w in g.invariants().windows(2) {
                prop_assert_eq!(w[1] % w[0], 0);
            }
            // Every relation maps to the identity.
            for r in &rows {
                prop_assert!(g.is_identity(&g.reduce(r)));
            }
            // lift/reduce round trip on all canonical elements.
            if g.order() <= 5000 {
                for c in g.elements() {
                    prop_assert_eq!(g.reduce(&g.lift(&c)), c);
                }
            }
            // The order equals |det| of any full-rank square submatrix built from the lattice: check via index.
            let n = rows[0].len();
            let mut count = 0;
            let bound: i64 = 6;
            // Brute force: number of distinct images of a box must not exceed the order.
            let mut seen = std::collections::HashSet::new();
            let mut idx = vec![0i64; n];
            loop {
                seen.insert(g.reduce(&idx));
                count += 1;
                let mut k = 0;
                while k < n {
                    idx[k] += 1;
                    if idx[k] < bound { break; }
                    idx[k] = 0;
                    k += 1;
                }
                if k == n { break; }
            }
            prop_assert!(seen.len() as i64 <= g.order());
            prop_assert!(count > 0);
        }
    }
}
