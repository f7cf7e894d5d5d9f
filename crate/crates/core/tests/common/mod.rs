#![allow(dead_code)]

use argmaxlab::seed::{rng_from_seed, LabRng};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Maximize `h'z - h'Vh/2` over `{h : b + G h <= 0}` by coarse-to-fine grid
/// search on `[-12, 12]^d`.
pub fn brute_force_qp(
    v: &DMatrix<f64>,
    z: &DVector<f64>,
    g: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Vec<f64> {
    let d = v.nrows();
    let f = |h: &DVector<f64>| h.dot(z) - 0.5 * h.dot(&(v * h));
    let feasible =
        |h: &DVector<f64>| (0..g.nrows()).all(|j| b[j] + g.row(j).transpose().dot(h) <= 0.0);
    let mut center = DVector::zeros(d);
    let mut step = 0.5;
    let mut half = 24usize;
    let mut best = DVector::zeros(d);
    while step > 2e-6 {
        let side = 2 * half + 1;
        let total = side.pow(d as u32);
        let mut best_val = f64::NEG_INFINITY;
        let mut h = DVector::zeros(d);
        for idx in 0..total {
            let mut r = idx;
            for k in 0..d {
                h[k] = center[k] + ((r % side) as f64 - half as f64) * step;
                r /= side;
            }
            if feasible(&h) {
                let val = f(&h);
                if val > best_val {
                    best_val = val;
                    best.copy_from(&h);
                }
            }
        }
        assert!(best_val.is_finite(), "no feasible grid point");
        center = best.clone();
        step /= 2.0;
        half = 8;
    }
    best.iter().copied().collect()
}

/// Exact maximizer by enumerating candidate active sets: for each subset
/// `S` of at most `d` rows solve the equality-constrained problem on
/// `b_S + G_S h = 0` and keep the best feasible candidate.
pub fn enumerate_qp(
    v: &DMatrix<f64>,
    z: &DVector<f64>,
    g: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Vec<f64> {
    let (d, m) = (v.nrows(), g.nrows());
    let f = |h: &DVector<f64>| h.dot(z) - 0.5 * h.dot(&(v * h));
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << m) {
        let rows: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 1).collect();
        let k = rows.len();
        if k > d {
            continue;
        }
        let mut kkt = DMatrix::zeros(d + k, d + k);
        let mut rhs = DVector::zeros(d + k);
        kkt.view_mut((0, 0), (d, d)).copy_from(v);
        rhs.rows_mut(0, d).copy_from(z);
        for (i, &j) in rows.iter().enumerate() {
            for c in 0..d {
                kkt[(d + i, c)] = g[(j, c)];
                kkt[(c, d + i)] = g[(j, c)];
            }
            rhs[d + i] = -b[j];
        }
        let Some(sol) = kkt.lu().solve(&rhs) else {
            continue;
        };
        let h = sol.rows(0, d).into_owned();
        if (0..m).all(|j| b[j] + g.row(j).transpose().dot(&h) <= 1e-9) {
            let val = f(&h);
            if best.as_ref().is_none_or(|(bv, _)| val > *bv) {
                best = Some((val, h));
            }
        }
    }
    best.expect("origin is feasible, so some candidate is")
        .1
        .iter()
        .copied()
        .collect()
}

pub fn qp_value(v: &DMatrix<f64>, z: &DVector<f64>, h: &[f64]) -> f64 {
    let h = DVector::from_column_slice(h);
    h.dot(z) - 0.5 * h.dot(&(v * &h))
}

/// Random instance with `d <= 3`, at most 4 constraints, origin interior.
pub struct QpInstance {
    pub v: DMatrix<f64>,
    pub z: DVector<f64>,
    pub g: DMatrix<f64>,
    pub b: DVector<f64>,
}

pub fn random_qp(rng: &mut LabRng) -> QpInstance {
    let d = rng.random_range(1..=3);
    let m = rng.random_range(0..=4);
    let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let v = &a * a.transpose() + DMatrix::identity(d, d) * 0.5;
    let u = DVector::from_fn(d, |_, _| rng.random_range(-2.5..2.5));
    let z = &v * u;
    let g = DMatrix::from_fn(m, d, |_, _| rng.random_range(-1.0..1.0));
    let b = DVector::from_fn(m, |j, _| -rng.random_range(0.2..1.5) * g.row(j).norm());
    QpInstance { v, z, g, b }
}

pub fn rng(seed: u64) -> LabRng {
    rng_from_seed(seed)
}

/// `sup |F_a - F_b|` by evaluating both ECDFs at every sample point.
pub fn ks_brute(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |xs: &[f64], x: f64| xs.iter().filter(|&&v| v <= x).count() as f64 / xs.len() as f64;
    a.iter()
        .chain(b)
        .map(|&x| (ecdf(a, x) - ecdf(b, x)).abs())
        .fold(0.0, f64::max)
}

pub fn configs_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}
