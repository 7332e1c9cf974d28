//! Numerical minimization of |T₁(0,U)|² + |T₂(0,U)|² over U ∈ U(2).
//!
//! The fiber is parameterized by four angles,
//!   U(φ,t,a,b) = e^{iφ}·(cos t·e^{ia}   sin t·e^{ib};
//!                        −sin t·e^{−ib}  cos t·e^{−ia}),
//! which covers U(2). The search is a coarse deterministic grid followed by
//! Nelder-Mead refinement from the best cell; the result never exceeds the
//! best grid value.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::fiber::{FiberExp, FiberVar, UPoly};

/// A point of U(2) with its angle coordinates.
#[derive(Debug, Clone, Copy)]
pub struct U2Point {
    pub phi: f64,
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub matrix: [[Complex64; 2]; 2],
}

/// Build the unitary matrix from the four angles.
pub fn u2_from_angles(phi: f64, t: f64, a: f64, b: f64) -> U2Point {
    let e = |x: f64| Complex64::new(x.cos(), x.sin());
    let (ct, st) = (t.cos(), t.sin());
    let global = e(phi);
    let matrix = [
        [global * ct * e(a), global * st * e(b)],
        [-global * st * e(-b), global * ct * e(-a)],
    ];
    U2Point {
        phi,
        t,
        a,
        b,
        matrix,
    }
}

/// ‖U*U − Id‖∞ for a 2×2 matrix.
pub fn unitarity_defect(m: &[[Complex64; 2]; 2]) -> f64 {
    let mut defect: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..2 {
                s += m[k][i].conj() * m[k][j];
            }
            if i == j {
                s -= Complex64::new(1.0, 0.0);
            }
            defect = defect.max(s.norm());
        }
    }
    defect
}

/// The two obstruction functions at the origin: exact fiber polynomials with
/// coefficients converted to double precision.
#[derive(Debug, Clone)]
pub struct ObstructionAtOrigin {
    pub t1: Vec<(FiberExp, Complex64)>,
    pub t2: Vec<(FiberExp, Complex64)>,
}

impl ObstructionAtOrigin {
    pub fn from_upolys(t1: &UPoly, t2: &UPoly) -> ObstructionAtOrigin {
        let conv = |p: &UPoly| -> Vec<(FiberExp, Complex64)> {
            p.eval_series_origin()
                .into_iter()
                .map(|(e, c)| (e, c.to_c64()))
                .collect()
        };
        ObstructionAtOrigin {
            t1: conv(t1),
            t2: conv(t2),
        }
    }

    pub fn from_exact(
        t1: BTreeMap<FiberExp, crate::rational::GaussRational>,
        t2: BTreeMap<FiberExp, crate::rational::GaussRational>,
    ) -> ObstructionAtOrigin {
        ObstructionAtOrigin {
            t1: t1.into_iter().map(|(e, c)| (e, c.to_c64())).collect(),
            t2: t2.into_iter().map(|(e, c)| (e, c.to_c64())).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.t1.is_empty() && self.t2.is_empty()
    }
}

fn eval_poly(p: &[(FiberExp, Complex64)], u: &U2Point) -> Complex64 {
    let vals = [
        u.matrix[0][0],
        u.matrix[0][1],
        u.matrix[1][0],
        u.matrix[1][1],
        u.matrix[0][0].conj(),
        u.matrix[0][1].conj(),
        u.matrix[1][0].conj(),
        u.matrix[1][1].conj(),
    ];
    let mut acc = Complex64::new(0.0, 0.0);
    for (e, c) in p {
        let mut term = *c;
        for v in FiberVar::ALL {
            let k = e.0[v.index()];
            for _ in 0..k {
                term *= vals[v.index()];
            }
        }
        acc += term;
    }
    acc
}

/// |T₁(U)|² + |T₂(U)|² with P,Q,R,S bound to the matrix entries and barred
/// symbols to their conjugates.
pub fn eval_obstruction_norm(obs: &ObstructionAtOrigin, u: &U2Point) -> f64 {
    eval_poly(&obs.t1, u).norm_sqr() + eval_poly(&obs.t2, u).norm_sqr()
}

/// Deterministic Nelder-Mead on ℝⁿ (standard reflection/expansion/
/// contraction/shrink coefficients).
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step: f64,
    max_iters: usize,
) -> (f64, Vec<f64>) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    for _ in 0..max_iters {
        // sort simplex by value (stable: deterministic tie-breaking)
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let reorder: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let revals: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        simplex = reorder;
        values = revals;

        if (values[n] - values[0]).abs() < 1e-15 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64)
            .collect();
        let combine = |coef: f64| -> Vec<f64> {
            (0..n)
                .map(|d| centroid[d] + coef * (simplex[n][d] - centroid[d]))
                .collect()
        };
        let reflected = combine(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = combine(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let contracted = combine(0.5);
            let fc = f(&contracted);
            if fc < values[n] {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    for d in 0..n {
                        simplex[i][d] = simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    (values[best], simplex[best].clone())
}

/// Coarse grid over the four angles followed by Nelder-Mead refinement from
/// the best cell. Deterministic; the reported minimum never exceeds the best
/// grid value. Exactly zero polynomials short-circuit to (0, Id).
pub fn minimize_over_u2(
    obs: &ObstructionAtOrigin,
    grid: usize,
    iters: usize,
) -> (f64, U2Point) {
    assert!(grid >= 4, "grid must be at least 4 per axis");
    if obs.is_zero() {
        return (0.0, u2_from_angles(0.0, 0.0, 0.0, 0.0));
    }
    let tau = 2.0 * std::f64::consts::PI;
    let half_pi = 0.5 * std::f64::consts::PI;
    let mut best_val = f64::INFINITY;
    let mut best_angles = [0.0f64; 4];
    for ip in 0..grid {
        let phi = tau * ip as f64 / grid as f64;
        for it in 0..grid {
            let t = half_pi * it as f64 / (grid - 1) as f64;
            for ia in 0..grid {
                let a = tau * ia as f64 / grid as f64;
                for ib in 0..grid {
                    let b = tau * ib as f64 / grid as f64;
                    let val = eval_obstruction_norm(obs, &u2_from_angles(phi, t, a, b));
                    if val < best_val {
                        best_val = val;
                        best_angles = [phi, t, a, b];
                    }
                }
            }
        }
    }
    let objective =
        |x: &[f64]| eval_obstruction_norm(obs, &u2_from_angles(x[0], x[1], x[2], x[3]));
    let (nm_val, nm_x) = nelder_mead(objective, &best_angles, 0.15, iters);
    if nm_val < best_val {
        (
            nm_val,
            u2_from_angles(nm_x[0], nm_x[1], nm_x[2], nm_x[3]),
        )
    } else {
        (
            best_val,
            u2_from_angles(
                best_angles[0],
                best_angles[1],
                best_angles[2],
                best_angles[3],
            ),
        )
    }
}
