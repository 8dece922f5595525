//! Membership in `P_m`, the kernel of `D^m` on continuous functions:
//! sums of `theta_k`, each a polynomial in `x_k` of degree `< m_k` whose
//! coefficients do not depend on `x_k`.

use num_traits::Zero;

use super::multi_index::MultiIndex;
use super::piecewise::PiecewisePoly;
use crate::poly::Poly;
use crate::rational::{q, Q};

/// Single-polynomial criterion: no monomial `x^beta` with `beta >= m`.
/// With `m = 0` this reduces to `h = 0`.
pub fn p_m_member_monomial(h: &Poly, m: &MultiIndex) -> bool {
    !h.has_monomial_dominating(&m.0)
}

/// Per-axis test nodes: every grid point plus `deg + m_k + 2` equispaced
/// interior points in each cell.
pub fn test_grid(h: &PiecewisePoly, m: &MultiIndex) -> Vec<Vec<Q>> {
    (0..h.dim())
        .map(|k| {
            let deg = h.cells().iter().map(|p| p.degree_in(k)).max().unwrap_or(0);
            let per_cell = (deg + m.0[k] + 2) as i64;
            let pts = h.axis_points(k);
            let mut out = vec![pts[0].clone()];
            for w in pts.windows(2) {
                let step = (&w[1] - &w[0]) / q(per_cell + 1);
                for i in 1..=per_cell {
                    out.push(&w[0] + &step * q(i));
                }
                out.push(w[1].clone());
            }
            out
        })
        .collect()
}

/// Tensor divided-difference annihilator: applies divided differences of
/// order `m_k` along every axis with `m_k > 0` over consecutive node windows
/// and checks that the result vanishes.
pub fn p_m_member_divided(h: &PiecewisePoly, m: &MultiIndex) -> bool {
    let grid = test_grid(h, m);
    let n = h.dim();
    let mut shape: Vec<usize> = grid.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();
    let mut vals: Vec<Q> = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let x: Vec<Q> = (0..n).map(|k| grid[k][idx[k]].clone()).collect();
        vals.push(h.eval(&x));
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    for k in 0..n {
        let order = m.0[k] as usize;
        if order == 0 {
            continue;
        }
        if shape[k] <= order {
            return vals.iter().all(Zero::is_zero);
        }
        vals = divided_along(&vals, &shape, k, &grid[k], order);
        shape[k] -= order;
    }
    vals.iter().all(Zero::is_zero)
}

fn divided_along(vals: &[Q], shape: &[usize], k: usize, nodes: &[Q], order: usize) -> Vec<Q> {
    let inner: usize = shape[k + 1..].iter().product();
    let outer: usize = shape[..k].iter().product();
    let len = shape[k];
    let new_len = len - order;
    let mut out = vec![Q::zero(); outer * new_len * inner];
    for o in 0..outer {
        for i in 0..inner {
            let mut col: Vec<Q> = (0..len).map(|j| vals[(o * len + j) * inner + i].clone()).collect();
            for r in 1..=order {
                for j in 0..len - r {
                    col[j] = (&col[j + 1] - &col[j]) / (&nodes[j + r] - &nodes[j]);
                }
            }
            for j in 0..new_len {
                out[(o * new_len + j) * inner + i] = col[j].clone();
            }
        }
    }
    out
}

/// Decides `h in P_m`, using the monomial criterion on a single cell.
pub fn p_m_member(h: &PiecewisePoly, m: &MultiIndex) -> bool {
    let h = h.simplify();
    if h.cells().len() == 1 {
        p_m_member_monomial(&h.cells()[0], m)
    } else {
        p_m_member_divided(&h, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::Interval;

    fn on_box(p: Poly) -> PiecewisePoly {
        let n = p.nvars();
        PiecewisePoly::polynomial(Interval::symmetric(n), p)
    }

    #[test]
    fn examples() {
        let x1x2 = Poly::monomial(vec![1, 1], q(1));
        let x1sq_x2 = Poly::monomial(vec![2, 1], q(1));
        let m = MultiIndex(vec![2, 1]);
        assert!(p_m_member_monomial(&x1x2, &m));
        assert!(p_m_member_divided(&on_box(x1x2), &m));
        assert!(!p_m_member_monomial(&x1sq_x2, &m));
        assert!(!p_m_member_divided(&on_box(x1sq_x2), &m));
        let z = MultiIndex(vec![0]);
        assert!(p_m_member(&on_box(Poly::zero(1)), &z));
        assert!(!p_m_member(&on_box(Poly::one(1)), &z));
    }

    #[test]
    fn piecewise_members() {
        let i = Interval::symmetric(1);
        let r = PiecewisePoly::ramp(i);
        assert!(!p_m_member(&r, &MultiIndex(vec![2])));
        assert!(!p_m_member(&r, &MultiIndex(vec![5])));
        // a kink in x_2 alone is a degree-0 polynomial in x_1
        let i2 = Interval::symmetric(2);
        let k2 = PiecewisePoly::ramp_affine(i2, 1, q(1), q(0)).unwrap();
        assert!(p_m_member(&k2, &MultiIndex(vec![1, 0])));
        assert!(!p_m_member(&k2, &MultiIndex(vec![0, 1])));
    }
}
