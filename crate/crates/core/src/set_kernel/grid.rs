use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{LabError, Result};

/// Round to 12 significant digits. Grid points are stored in this canonical
/// form so set identities do not depend on how a coordinate was computed.
pub fn canonical(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// A finite point cloud in `dim`-dimensional space, sorted lexicographically
/// without duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSet {
    dim: usize,
    coords: Vec<f64>,
}

impl GridSet {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            coords: Vec::new(),
        }
    }

    /// Build from a flat row-major coordinate buffer.
    pub fn from_flat(dim: usize, mut coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::InvalidArgument(
                "dimension must be positive".into(),
            ));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(LabError::InvalidArgument(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|x| !x.is_finite()) {
            return Err(LabError::InvalidArgument(format!(
                "grid coordinates must be finite, got {bad}"
            )));
        }
        coords.iter_mut().for_each(|x| *x = canonical(*x));
        let n = coords.len() / dim;
        let sorted = (1..n).all(|i| {
            lex_cmp(
                &coords[(i - 1) * dim..i * dim],
                &coords[i * dim..(i + 1) * dim],
            ) == Ordering::Less
        });
        if sorted {
            return Ok(Self { dim, coords });
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            lex_cmp(
                &coords[a * dim..(a + 1) * dim],
                &coords[b * dim..(b + 1) * dim],
            )
        });
        let mut out: Vec<f64> = Vec::with_capacity(coords.len());
        for i in idx {
            let p = &coords[i * dim..(i + 1) * dim];
            let len = out.len();
            if len >= dim && lex_cmp(&out[len - dim..], p) == Ordering::Equal {
                continue;
            }
            out.extend_from_slice(p);
        }
        Ok(Self { dim, coords: out })
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(LabError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        Self::from_flat(dim, flat)
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::from_flat(1, values)
    }

    /// Regular grid `lo + j * step` on a box, inclusive of the upper corner
    /// when it falls on the lattice.
    pub fn lattice(bounds: &BoxBounds, step: f64) -> Result<Self> {
        if step <= 0.0 || !step.is_finite() {
            return Err(LabError::InvalidArgument(format!(
                "grid step must be positive, got {step}"
            )));
        }
        let counts: Vec<usize> = bounds
            .lo
            .iter()
            .zip(&bounds.hi)
            .map(|(lo, hi)| ((hi - lo) / step + 1e-9).floor() as usize + 1)
            .collect();
        let total: usize = counts.iter().product();
        let dim = bounds.dim();
        let mut coords = Vec::with_capacity(total * dim);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            for (k, &j) in idx.iter().enumerate() {
                coords.push(bounds.lo[k] + j as f64 * step);
            }
            for k in (0..dim).rev() {
                idx[k] += 1;
                if idx[k] < counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Self::from_flat(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        if p.len() != self.dim {
            return false;
        }
        let q: Vec<f64> = p.iter().map(|&x| canonical(x)).collect();
        let n = self.len();
        let (mut lo, mut hi) = (0, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match lex_cmp(self.point(mid), &q) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn filter(&self, mut keep: impl FnMut(&[f64]) -> bool) -> Self {
        let mut coords = Vec::new();
        for p in self.points() {
            if keep(p) {
                coords.extend_from_slice(p);
            }
        }
        Self {
            dim: self.dim,
            coords,
        }
    }

    pub fn intersect_box(&self, bounds: &BoxBounds) -> Self {
        self.filter(|p| bounds.contains(p))
    }

    /// Apply `x -> scale * (x - center)` coordinatewise to every point.
    pub fn affine_image(&self, center: &[f64], scale: &[f64]) -> Result<Self> {
        if center.len() != self.dim || scale.len() != self.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                got: center.len().min(scale.len()),
            });
        }
        let coords = self
            .coords
            .chunks_exact(self.dim)
            .flat_map(|p| {
                p.iter()
                    .zip(center)
                    .zip(scale)
                    .map(|((x, c), s)| s * (x - c))
            })
            .collect();
        Self::from_flat(self.dim, coords)
    }

    /// Maximal runs of consecutive 1-D points with gaps at most `max_gap`,
    /// as `(first, last)` pairs.
    pub fn components_1d(&self, max_gap: f64) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        if self.dim != 1 {
            return out;
        }
        for &x in &self.coords {
            match out.last_mut() {
                Some((_, hi)) if x - *hi <= max_gap => *hi = x,
                _ => out.push((x, x)),
            }
        }
        out
    }

    /// One point per row, coordinates comma separated, header `x1,...,xd`.
    pub fn to_csv(&self) -> String {
        let mut s = (1..=self.dim)
            .map(|i| format!("x{i}"))
            .collect::<Vec<_>>()
            .join(",");
        s.push('\n');
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| LabError::InvalidArgument("empty grid CSV".into()))?;
        let dim = header.split(',').count();
        let mut coords = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim {
                return Err(LabError::InvalidArgument(format!(
                    "grid CSV row {} has {} fields, expected {dim}",
                    i + 2,
                    fields.len()
                )));
            }
            for f in fields {
                coords.push(f.trim().parse::<f64>().map_err(|e| {
                    LabError::InvalidArgument(format!("grid CSV row {}: {e}", i + 2))
                })?);
            }
        }
        Self::from_flat(dim, coords)
    }
}

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoxBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(LabError::InvalidArgument(
                "box bounds need matching nonempty lo/hi".into(),
            ));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite())
        {
            return Err(LabError::InvalidArgument(format!(
                "box bounds must satisfy lo <= hi, got {lo:?} / {hi:?}"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (l, h))| *x >= l - 1e-12 && *x <= h + 1e-12)
    }
}
