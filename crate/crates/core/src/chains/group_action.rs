use std::collections::HashSet;

use num_traits::{One, Signed, Zero};

use super::RowStochasticMatrix;
use crate::rational::Rational;
use crate::{Error, Result};

/// An explicit finite group acting on `0..state_count`, with a weight `w`
/// on group elements and a weight `v` on states.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupActionTable {
    actions: Vec<Vec<usize>>,
    weight_w: Vec<Rational>,
    weight_v: Vec<Rational>,
}

impl GroupActionTable {
    /// `actions[g][x]` is the image of state `x` under element `g`.
    ///
    /// Checks that every element permutes the states, that the identity is
    /// present, that the set is closed under composition, and that both
    /// weights are strictly positive.
    pub fn new(
        actions: Vec<Vec<usize>>,
        weight_w: Vec<Rational>,
        weight_v: Vec<Rational>,
    ) -> Result<Self> {
        let states = weight_v.len();
        if actions.is_empty() {
            return Err(Error::InvalidAction("empty group".into()));
        }
        if weight_w.len() != actions.len() {
            return Err(Error::DimensionMismatch {
                expected: actions.len(),
                got: weight_w.len(),
            });
        }
        for (g, act) in actions.iter().enumerate() {
            if act.len() != states {
                return Err(Error::DimensionMismatch {
                    expected: states,
                    got: act.len(),
                });
            }
            let mut hit = vec![false; states];
            for &y in act {
                if y >= states || std::mem::replace(&mut hit[y], true) {
                    return Err(Error::InvalidAction(format!("element {g} is not a bijection")));
                }
            }
        }
        if weight_w.iter().chain(&weight_v).any(|w| !w.is_positive()) {
            return Err(Error::Domain("weights must be strictly positive".into()));
        }
        let elements: HashSet<&[usize]> = actions.iter().map(Vec::as_slice).collect();
        let identity: Vec<usize> = (0..states).collect();
        if !elements.contains(identity.as_slice()) {
            return Err(Error::InvalidAction("identity element missing".into()));
        }
        let mut composed = vec![0usize; states];
        for g in &actions {
            for h in &actions {
                for (x, c) in composed.iter_mut().enumerate() {
                    *c = h[g[x]];
                }
                if !elements.contains(composed.as_slice()) {
                    return Err(Error::InvalidAction("not closed under composition".into()));
                }
            }
        }
        Ok(Self {
            actions,
            weight_w,
            weight_v,
        })
    }

    pub fn state_count(&self) -> usize {
        self.weight_v.len()
    }

    pub fn group_order(&self) -> usize {
        self.actions.len()
    }

    pub fn act(&self, g: usize, x: usize) -> usize {
        self.actions[g][x]
    }

    /// Elements fixing `x`.
    pub fn stabilizer(&self, x: usize) -> Vec<usize> {
        (0..self.group_order()).filter(|&g| self.actions[g][x] == x).collect()
    }

    /// States fixed by `g`.
    pub fn fixed_points(&self, g: usize) -> Vec<usize> {
        (0..self.state_count()).filter(|&x| self.actions[g][x] == x).collect()
    }

    /// `W(x) = sum of w over the stabilizer of x`.
    pub fn stabilizer_weight(&self, x: usize) -> Rational {
        self.stabilizer(x).iter().map(|&g| &self.weight_w[g]).sum()
    }

    /// `V(g) = sum of v over the fixed points of g`.
    pub fn fixed_weight(&self, g: usize) -> Rational {
        self.fixed_points(g).iter().map(|&x| &self.weight_v[x]).sum()
    }

    /// Orbits, each sorted, ordered by smallest member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.state_count()];
        let mut out = Vec::new();
        for x in 0..self.state_count() {
            if seen[x] {
                continue;
            }
            let mut orbit: Vec<usize> = self.actions.iter().map(|a| a[x]).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &y in &orbit {
                seen[y] = true;
            }
            out.push(orbit);
        }
        out
    }

    /// Normalized `W(x) v(x)`.
    pub fn stationary(&self) -> Vec<Rational> {
        let raw: Vec<Rational> = (0..self.state_count())
            .map(|x| self.stabilizer_weight(x) * &self.weight_v[x])
            .collect();
        let total: Rational = raw.iter().sum();
        raw.into_iter().map(|r| r / &total).collect()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
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

/// The symmetric group `S_n` permuting the coordinates of words in `[k]^n`.
/// Word `x` is encoded as `sum_i x_i k^i`. `w(s) = theta^{c(s)}`;
/// `v(x) = prod_i gamma[x_i]` with `gamma[0] = 1` implicit, so
/// `gammas` holds the weights of colors `1..k`.
pub fn words_table(k: usize, n: usize, theta: &Rational, gammas: &[Rational]) -> Result<GroupActionTable> {
    if k < 2 || n == 0 {
        return Err(Error::Domain("need k >= 2 and n >= 1".into()));
    }
    if gammas.len() != k - 1 {
        return Err(Error::DimensionMismatch {
            expected: k - 1,
            got: gammas.len(),
        });
    }
    let states = k.checked_pow(n as u32).filter(|&s| s <= 1 << 20).ok_or(Error::OutOfRange {
        what: "word length",
        value: n,
        max: 20,
    })?;
    let digits = |mut x: usize| -> Vec<usize> {
        (0..n)
            .map(|_| {
                let d = x % k;
                x /= k;
                d
            })
            .collect()
    };
    let perms = permutations(n);
    let mut actions = Vec::with_capacity(perms.len());
    let mut weight_w = Vec::with_capacity(perms.len());
    for sigma in &perms {
        let act = (0..states)
            .map(|x| {
                let d = digits(x);
                (0..n).rev().fold(0, |acc, i| acc * k + d[sigma[i]])
            })
            .collect();
        actions.push(act);
        let cycles = crate::distributions::cycle_lengths(sigma).len();
        weight_w.push(num_traits::pow(theta.clone(), cycles));
    }
    let weight_v = (0..states)
        .map(|x| {
            digits(x)
                .into_iter()
                .filter(|&d| d > 0)
                .fold(Rational::one(), |acc, d| acc * &gammas[d - 1])
        })
        .collect();
    GroupActionTable::new(actions, weight_w, weight_v)
}

/// `S_n` on binary strings with `w(s) = theta^{c(s)}` and `v = 1`.
pub fn binary_strings_table(n: usize, theta: &Rational) -> Result<GroupActionTable> {
    words_table(2, n, theta, &[Rational::one()])
}

/// Full-state twisted kernel
/// `K(x, y) = v(y) / W(x) * sum_{g in G_x and G_y} w(g) / V(g)`.
pub fn generic_twisted_matrix(table: &GroupActionTable) -> RowStochasticMatrix {
    let states = table.state_count();
    let mut acc = vec![vec![Rational::zero(); states]; states];
    for g in 0..table.group_order() {
        let fixed = table.fixed_points(g);
        let share = &table.weight_w[g] / table.fixed_weight(g);
        for &x in &fixed {
            for &y in &fixed {
                acc[x][y] += &share;
            }
        }
    }
    for (x, row) in acc.iter_mut().enumerate() {
        let w = table.stabilizer_weight(x);
        for (y, entry) in row.iter_mut().enumerate() {
            *entry = &*entry * &table.weight_v[y] / &w;
        }
    }
    RowStochasticMatrix::new(acc).expect("twisted kernel rows are probability vectors")
}

/// Kernel on classes: `L(a, b) = sum_{q in class b} K(rep(a), q)` with the
/// smallest member as representative. Only meaningful when the kernel is
/// lumpable for these classes.
pub fn lumped_kernel(matrix: &RowStochasticMatrix, classes: &[Vec<usize>]) -> Result<RowStochasticMatrix> {
    let entries = classes
        .iter()
        .map(|from| {
            let rep = *from.first().ok_or(Error::Domain("empty class".into()))?;
            Ok(classes
                .iter()
                .map(|to| to.iter().map(|&q| matrix.get(rep, q)).sum())
                .collect())
        })
        .collect::<Result<Vec<Vec<Rational>>>>()?;
    RowStochasticMatrix::new(entries)
}

/// Dynkin defect: the largest `|K(x, O) - K(y, O)|` over states `x, y` in a
/// common orbit and orbits `O`. Zero exactly when the chain lumps to orbits.
pub fn lumpability_check(table: &GroupActionTable) -> Rational {
    let k = generic_twisted_matrix(table);
    let orbits = table.orbits();
    let mut worst = Rational::zero();
    for orbit in &orbits {
        let sums: Vec<Vec<Rational>> = orbit
            .iter()
            .map(|&x| {
                orbits
                    .iter()
                    .map(|target| target.iter().map(|&q| k.get(x, q)).sum())
                    .collect()
            })
            .collect();
        for other in &sums[1..] {
            for (a, b) in sums[0].iter().zip(other) {
                let d = (a - b).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn validation() {
        let v = vec![int(1); 2];
        assert!(GroupActionTable::new(vec![vec![0, 1]], vec![int(1)], v.clone()).is_ok());
        // identity missing
        assert!(GroupActionTable::new(vec![vec![1, 0]], vec![int(1)], v.clone()).is_err());
        // not a bijection
        assert!(GroupActionTable::new(vec![vec![0, 0]], vec![int(1)], v.clone()).is_err());
        // nonpositive weight
        assert!(GroupActionTable::new(vec![vec![0, 1]], vec![int(0)], v.clone()).is_err());
        // not closed: a 3-cycle without its square
        assert!(GroupActionTable::new(
            vec![vec![0, 1, 2], vec![1, 2, 0]],
            vec![int(1), int(1)],
            vec![int(1); 3]
        )
        .is_err());
    }

    #[test]
    fn uniform_burnside_on_three_bits() {
        let table = binary_strings_table(3, &int(1)).unwrap();
        assert_eq!(table.group_order(), 6);
        let orbits = table.orbits();
        assert_eq!(orbits.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 3, 3, 1]);
        let pi = table.stationary();
        for orbit in &orbits {
            let mass: Rational = orbit.iter().map(|&x| &pi[x]).sum();
            assert_eq!(mass, ratio(1, 4));
        }
        let k = generic_twisted_matrix(&table);
        assert_eq!(k.left_apply(&pi).unwrap(), pi);
        assert!(k.detailed_balance_defect(&pi).unwrap().is_zero());
        assert!(lumpability_check(&table).is_zero());
    }

    #[test]
    fn ewens_weights_on_three_bits() {
        let table = binary_strings_table(3, &int(2)).unwrap();
        let pi = table.stationary();
        let k = generic_twisted_matrix(&table);
        assert!(k.detailed_balance_defect(&pi).unwrap().is_zero());
        let bb = crate::distributions::BetaBinomialParams::symmetric(3, int(2)).unwrap().pmf_vec();
        for orbit in table.orbits() {
            let count = orbit[0].count_ones() as usize;
            let mass: Rational = orbit.iter().map(|&x| &pi[x]).sum();
            assert_eq!(mass, bb[count]);
        }
    }
}
