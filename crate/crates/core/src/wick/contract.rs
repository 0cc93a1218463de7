//! Contraction of a pairing integral
//! `Σ Π_a w_a(i_a) Π_{a<b} φ_ab(i_a, i_b)` by variable elimination.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest table a degree-2 elimination may build.
const MAX_TABLE: usize = 1 << 24;
/// Largest number of inner products a single elimination step may cost.
const MAX_WORK: f64 = 4e10;

/// One pair variable: on-shell nodes and their weighted integrand values.
#[derive(Clone, Debug)]
pub(crate) struct Var {
    pub k: Vec<f64>,
    pub omega: Vec<f64>,
    pub w: Vec<Complex64>,
}

impl Var {
    fn len(&self) -> usize {
        self.w.len()
    }
}

#[derive(Clone, Debug)]
enum Factor {
    /// `exp(−(i/2) c (k_a ω_b − ω_a k_b))`
    Lazy(f64),
    /// Row-major `[i_a][i_b]`.
    Table(Vec<Complex64>),
}

#[derive(Clone, Debug)]
struct Edge {
    a: usize,
    b: usize,
    f: Factor,
}

#[inline]
fn coupling_phase(c: f64, ka: f64, oa: f64, kb: f64, ob: f64) -> Complex64 {
    let (s, co) = (-0.5 * c * (ka * ob - oa * kb)).sin_cos();
    Complex64::new(co, s)
}

fn entry(edge: &Edge, vars: &[Option<Var>], ia: usize, ib: usize) -> Complex64 {
    match &edge.f {
        Factor::Lazy(c) => {
            let (va, vb) = (vars[edge.a].as_ref().unwrap(), vars[edge.b].as_ref().unwrap());
            coupling_phase(*c, va.k[ia], va.omega[ia], vb.k[ib], vb.omega[ib])
        }
        Factor::Table(t) => t[ia * vars[edge.b].as_ref().unwrap().len() + ib],
    }
}

/// Value of the factor with `v` at index `i` and `u` at index `j`.
fn oriented(edge: &Edge, vars: &[Option<Var>], v: usize, i: usize, j: usize) -> Complex64 {
    if edge.a == v {
        entry(edge, vars, i, j)
    } else {
        entry(edge, vars, j, i)
    }
}

fn other(edge: &Edge, v: usize) -> usize {
    if edge.a == v {
        edge.b
    } else {
        edge.a
    }
}

/// Evaluates the contraction. Couplings are `(a, b, c_ab)` with `a < b`.
pub(crate) fn contract(vars: Vec<Var>, couplings: &[(usize, usize, f64)]) -> Result<Complex64> {
    let edges = couplings
        .iter()
        .filter(|(_, _, c)| *c != 0.0)
        .map(|&(a, b, c)| Edge { a, b, f: Factor::Lazy(c) })
        .collect();
    eliminate(vars.into_iter().map(Some).collect(), edges)
}

fn eliminate(mut vars: Vec<Option<Var>>, mut edges: Vec<Edge>) -> Result<Complex64> {
    let mut total = Complex64::new(1.0, 0.0);
    loop {
        let alive: Vec<usize> = (0..vars.len()).filter(|&v| vars[v].is_some()).collect();
        if alive.is_empty() {
            return Ok(total);
        }
        let degree = |v: usize| edges.iter().filter(|e| e.a == v || e.b == v).count();
        let v = *alive.iter().min_by_key(|&&v| (degree(v), v)).expect("nonempty");
        let incident: Vec<usize> = (0..edges.len()).filter(|&e| edges[e].a == v || edges[e].b == v).collect();
        match incident.len() {
            0 => {
                let var = vars[v].take().unwrap();
                total *= var.w.iter().fold(Complex64::new(0.0, 0.0), |acc, x| acc + x);
            }
            1 => {
                let e = edges.remove(incident[0]);
                let u = other(&e, v);
                let nv = vars[v].as_ref().unwrap().len();
                let nu = vars[u].as_ref().unwrap().len();
                check_work(nv as f64 * nu as f64)?;
                let msg: Vec<Complex64> = {
                    let vars_ref = &vars;
                    let wv = &vars_ref[v].as_ref().unwrap().w;
                    (0..nu)
                        .into_par_iter()
                        .map(|j| {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (i, w) in wv.iter().enumerate() {
                                acc += w * oriented(&e, vars_ref, v, i, j);
                            }
                            acc
                        })
                        .collect()
                };
                let var_u = vars[u].as_mut().unwrap();
                for (x, m) in var_u.w.iter_mut().zip(msg) {
                    *x *= m;
                }
                vars[v] = None;
            }
            2 => {
                let e2 = edges.remove(incident[1]);
                let e1 = edges.remove(incident[0]);
                let (u1, u2) = {
                    let (x, y) = (other(&e1, v), other(&e2, v));
                    if x < y {
                        (x, y)
                    } else {
                        (y, x)
                    }
                };
                let (e1, e2) = if other(&e1, v) == u1 { (e1, e2) } else { (e2, e1) };
                let nv = vars[v].as_ref().unwrap().len();
                let n1 = vars[u1].as_ref().unwrap().len();
                let n2 = vars[u2].as_ref().unwrap().len();
                if n1 * n2 > MAX_TABLE {
                    return Err(Error::UnderResolved(format!("contraction table {n1}x{n2} too large")));
                }
                check_work(nv as f64 * n1 as f64 * n2 as f64)?;
                let table: Vec<Complex64> = {
                    let vars_ref = &vars;
                    let wv = &vars_ref[v].as_ref().unwrap().w;
                    // rows of u1 scaled by w_v, then a product with the rows of u2
                    let p1: Vec<Vec<Complex64>> = (0..n1)
                        .into_par_iter()
                        .map(|j| (0..nv).map(|i| wv[i] * oriented(&e1, vars_ref, v, i, j)).collect())
                        .collect();
                    let p2: Vec<Vec<Complex64>> =
                        (0..n2).into_par_iter().map(|l| (0..nv).map(|i| oriented(&e2, vars_ref, v, i, l)).collect()).collect();
                    p1.par_iter()
                        .flat_map_iter(|row| {
                            p2.iter().map(move |col| row.iter().zip(col).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b))
                        })
                        .collect()
                };
                vars[v] = None;
                if let Some(pos) = edges.iter().position(|e| e.a == u1 && e.b == u2) {
                    let old = edges.remove(pos);
                    let merged: Vec<Complex64> = {
                        let vars_ref = &vars;
                        (0..n1 * n2).map(|t| table[t] * entry(&old, vars_ref, t / n2, t % n2)).collect()
                    };
                    edges.push(Edge { a: u1, b: u2, f: Factor::Table(merged) });
                } else {
                    edges.push(Edge { a: u1, b: u2, f: Factor::Table(table) });
                }
            }
            _ => {
                // condition on v: every remaining term is evaluated per index of v
                let nv = vars[v].as_ref().unwrap().len();
                let rest: Result<Vec<Complex64>> = (0..nv)
                    .map(|i| {
                        let mut sub = vars.clone();
                        let wv = sub[v].take().unwrap().w[i];
                        for &ei in &incident {
                            let e = &edges[ei];
                            let u = other(e, v);
                            let row: Vec<Complex64> =
                                (0..sub[u].as_ref().unwrap().len()).map(|j| oriented(e, &vars, v, i, j)).collect();
                            for (x, r) in sub[u].as_mut().unwrap().w.iter_mut().zip(row) {
                                *x *= r;
                            }
                        }
                        let sub_edges: Vec<Edge> =
                            edges.iter().filter(|e| e.a != v && e.b != v).cloned().collect();
                        Ok(wv * eliminate(sub, sub_edges)?)
                    })
                    .collect();
                let s = rest?.into_iter().fold(Complex64::new(0.0, 0.0), |acc, x| acc + x);
                return Ok(total * s);
            }
        }
    }
}

fn check_work(w: f64) -> Result<()> {
    if w > MAX_WORK {
        return Err(Error::UnderResolved(format!("contraction step needs {w:.2e} products")));
    }
    Ok(())
}
