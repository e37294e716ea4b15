//! Exact rational feasibility: Fourier–Motzkin elimination with Farkas
//! multipliers, and a phase-one simplex with Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::linalg::Rat;

/// `coeffs · x >= rhs`
#[derive(Clone, Debug, PartialEq)]
pub struct Ineq {
    pub coeffs: Vec<Rat>,
    pub rhs: Rat,
}

impl Ineq {
    pub fn new(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        Ineq { coeffs, rhs }
    }
}

#[derive(Clone, Debug)]
pub enum FmOutcome {
    Feasible(Vec<Rat>),
    /// Nonnegative multipliers on the input inequalities whose combination
    /// reads `0 >= c` with `c > 0`.
    Infeasible(Vec<Rat>),
}

#[derive(Clone)]
struct Tracked {
    coeffs: Vec<Rat>,
    rhs: Rat,
    mult: Vec<Rat>,
}

fn normalize(t: &mut Tracked) {
    // scale so the first nonzero coefficient has absolute value one
    if let Some(p) = t.coeffs.iter().find(|c| !c.is_zero()) {
        let s = p.abs().recip();
        if !s.is_one() {
            for c in t.coeffs.iter_mut() {
                *c *= &s;
            }
            t.rhs *= &s;
            for m in t.mult.iter_mut() {
                *m *= &s;
            }
        }
    }
}

/// Decides `{x : A x >= b}` by eliminating variables from the last one down.
pub fn fourier_motzkin(nvars: usize, ineqs: &[Ineq]) -> FmOutcome {
    let m = ineqs.len();
    let mut cur: Vec<Tracked> = ineqs
        .iter()
        .enumerate()
        .map(|(i, q)| {
            assert_eq!(q.coeffs.len(), nvars);
            let mut mult = vec![Rat::zero(); m];
            mult[i] = Rat::one();
            let mut t = Tracked { coeffs: q.coeffs.clone(), rhs: q.rhs.clone(), mult };
            normalize(&mut t);
            t
        })
        .collect();
    let mut stages: Vec<Vec<Tracked>> = Vec::with_capacity(nvars);
    for k in (0..nvars).rev() {
        stages.push(cur.clone());
        let mut next = Vec::new();
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for t in cur.into_iter() {
            if t.coeffs[k].is_positive() {
                pos.push(t);
            } else if t.coeffs[k].is_negative() {
                neg.push(t);
            } else {
                next.push(t);
            }
        }
        for p in &pos {
            for n in &neg {
                let a = -n.coeffs[k].clone();
                let b = p.coeffs[k].clone();
                let mut t = Tracked {
                    coeffs: p.coeffs.iter().zip(&n.coeffs).map(|(x, y)| &a * x + &b * y).collect(),
                    rhs: &a * &p.rhs + &b * &n.rhs,
                    mult: p.mult.iter().zip(&n.mult).map(|(x, y)| &a * x + &b * y).collect(),
                };
                t.coeffs[k] = Rat::zero();
                normalize(&mut t);
                if !next.iter().any(|o: &Tracked| o.coeffs == t.coeffs && o.rhs >= t.rhs) {
                    next.retain(|o| !(o.coeffs == t.coeffs && o.rhs <= t.rhs));
                    next.push(t);
                }
            }
        }
        cur = next;
    }
    if let Some(bad) = cur.iter().find(|t| t.rhs.is_positive()) {
        return FmOutcome::Infeasible(bad.mult.clone());
    }
    // back substitution, x_0 first
    let mut x = vec![Rat::zero(); nvars];
    for (idx, k) in (0..nvars).enumerate() {
        let stage = &stages[nvars - 1 - idx];
        let mut lo: Option<Rat> = None;
        let mut hi: Option<Rat> = None;
        for t in stage {
            let a = &t.coeffs[k];
            if a.is_zero() {
                continue;
            }
            let mut rest = t.rhs.clone();
            for j in 0..k {
                rest -= &t.coeffs[j] * &x[j];
            }
            let bound = rest / a;
            if a.is_positive() {
                if lo.as_ref().is_none_or(|l| &bound > l) {
                    lo = Some(bound);
                }
            } else if hi.as_ref().is_none_or(|h| &bound < h) {
                hi = Some(bound);
            }
        }
        x[k] = match (lo, hi) {
            (Some(l), Some(h)) => {
                if l.is_zero() || h.is_zero() || (l.is_negative() && h.is_positive()) {
                    Rat::zero()
                } else {
                    l
                }
            }
            (Some(l), None) => {
                if l.is_negative() {
                    Rat::zero()
                } else {
                    l
                }
            }
            (None, Some(h)) => {
                if h.is_positive() {
                    Rat::zero()
                } else {
                    h
                }
            }
            (None, None) => Rat::zero(),
        };
    }
    debug_assert!(ineqs.iter().all(|q| crate::linalg::dot(&q.coeffs, &x) >= q.rhs));
    FmOutcome::Feasible(x)
}

/// Feasibility of `{x : E x = e, G x >= g, x_i >= 0 for i in nonneg}` by
/// phase-one simplex. Returns a feasible point.
pub fn simplex_feasible(nvars: usize, nonneg: &[bool], eqs: &[Ineq], ges: &[Ineq]) -> Option<Vec<Rat>> {
    assert_eq!(nonneg.len(), nvars);
    // column layout: structural (split when free), then one slack per >= row
    let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(nvars);
    let mut ncols = 0usize;
    for &nn in nonneg {
        if nn {
            col_of.push((ncols, None));
            ncols += 1;
        } else {
            col_of.push((ncols, Some(ncols + 1)));
            ncols += 2;
        }
    }
    let nslack = ges.len();
    let nstruct = ncols + nslack;
    let nrows = eqs.len() + ges.len();
    let width = nstruct + nrows + 1;
    let mut tab: Vec<Vec<Rat>> = Vec::with_capacity(nrows + 1);
    for (r, q) in eqs.iter().chain(ges.iter()).enumerate() {
        let mut row = vec![Rat::zero(); width];
        for (i, c) in q.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (p, n) = col_of[i];
            row[p] = c.clone();
            if let Some(n) = n {
                row[n] = -c.clone();
            }
        }
        if r >= eqs.len() {
            row[ncols + (r - eqs.len())] = -Rat::one();
        }
        row[width - 1] = q.rhs.clone();
        if row[width - 1].is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        row[nstruct + r] = Rat::one();
        tab.push(row);
    }
    // reduced costs of the phase-one objective
    let mut cost = vec![Rat::zero(); width];
    for row in &tab {
        for j in 0..nstruct {
            cost[j] -= &row[j];
        }
        cost[width - 1] -= &row[width - 1];
    }
    let mut basis: Vec<usize> = (0..nrows).map(|r| nstruct + r).collect();
    while let Some(enter) = (0..nstruct + nrows).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Rat)> = None;
        for (r, row) in tab.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = &row[width - 1] / &row[enter];
            match &leave {
                Some((lr, best)) if ratio > *best || (ratio == *best && basis[r] > basis[*lr]) => {}
                _ => leave = Some((r, ratio)),
            }
        }
        let Some((lr, _)) = leave else { break };
        pivot(&mut tab, &mut cost, lr, enter);
        basis[lr] = enter;
    }
    if !cost[width - 1].is_zero() {
        return None;
    }
    let mut y = vec![Rat::zero(); nstruct];
    for (r, &b) in basis.iter().enumerate() {
        if b < nstruct {
            y[b] = tab[r][width - 1].clone();
        }
    }
    let x: Vec<Rat> = col_of
        .iter()
        .map(|&(p, n)| match n {
            Some(n) => &y[p] - &y[n],
            None => y[p].clone(),
        })
        .collect();
    debug_assert!(eqs.iter().all(|q| crate::linalg::dot(&q.coeffs, &x) == q.rhs));
    debug_assert!(ges.iter().all(|q| crate::linalg::dot(&q.coeffs, &x) >= q.rhs));
    Some(x)
}

fn pivot(tab: &mut [Vec<Rat>], cost: &mut [Rat], lr: usize, enter: usize) {
    let inv = tab[lr][enter].recip();
    for v in tab[lr].iter_mut() {
        if !v.is_zero() {
            *v *= &inv;
        }
    }
    let prow = tab[lr].clone();
    let nz: Vec<usize> = (0..prow.len()).filter(|&j| !prow[j].is_zero()).collect();
    for (r, row) in tab.iter_mut().enumerate() {
        if r == lr || row[enter].is_zero() {
            continue;
        }
        let f = row[enter].clone();
        for &j in &nz {
            row[j] -= &f * &prow[j];
        }
    }
    if !cost[enter].is_zero() {
        let f = cost[enter].clone();
        for &j in &nz {
            cost[j] -= &f * &prow[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    fn q(c: &[i64], r: i64) -> Ineq {
        Ineq::new(c.iter().map(|&x| rat(x, 1)).collect(), rat(r, 1))
    }

    #[test]
    fn fm_feasible_and_infeasible() {
        // x >= 1, y >= 1, x + y <= 3
        let sys = vec![q(&[1, 0], 1), q(&[0, 1], 1), q(&[-1, -1], -3)];
        match fourier_motzkin(2, &sys) {
            FmOutcome::Feasible(x) => assert!(x[0] >= rat(1, 1) && x[1] >= rat(1, 1)),
            _ => panic!("expected feasible"),
        }
        // x >= 1, -x >= 0
        let sys = vec![q(&[1], 1), q(&[-1], 0)];
        match fourier_motzkin(1, &sys) {
            FmOutcome::Infeasible(m) => {
                assert!(m.iter().all(|v| !v.is_negative()));
                assert!(m.iter().any(|v| v.is_positive()));
            }
            _ => panic!("expected infeasible"),
        }
    }

    #[test]
    fn simplex_agrees_with_fm() {
        let ges = vec![q(&[1, 2], 2), q(&[3, -1], 1), q(&[-1, -1], -5)];
        let x = simplex_feasible(2, &[false, false], &[], &ges).expect("feasible");
        for g in &ges {
            assert!(crate::linalg::dot(&g.coeffs, &x) >= g.rhs);
        }
        let bad = vec![q(&[1, 1], 3), q(&[-1, -1], -2)];
        assert!(simplex_feasible(2, &[false, false], &[], &bad).is_none());
        assert!(matches!(fourier_motzkin(2, &bad), FmOutcome::Infeasible(_)));
        let eqs = vec![q(&[1, 1], 1)];
        let x = simplex_feasible(2, &[true, true], &eqs, &[]).unwrap();
        assert_eq!(&x[0] + &x[1], rat(1, 1));
    }
}
