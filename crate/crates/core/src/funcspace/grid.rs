use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::{axis_sign, TestFunction};
use crate::error::{Error, Result};

/// Largest number of samples a grid may hold.
pub const MAX_GRID_SAMPLES: usize = 1 << 26;

const MAGIC: &[u8; 4] = b"TQGF";
const FORMAT_VERSION: u32 = 1;

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, direction: FftDirection) -> Plan {
    static PLANS: OnceLock<RwLock<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let plans = PLANS.get_or_init(|| RwLock::new(HashMap::new()));
    let key = (n, direction == FftDirection::Forward);
    if let Some(p) = plans.read().expect("fft plan cache").get(&key) {
        return p.clone();
    }
    let p = FftPlanner::new().plan_fft(n, direction);
    plans.write().expect("fft plan cache").entry(key).or_insert(p).clone()
}

/// Samples on a uniform box, `x_j = lo + j·(hi − lo)/count`, stored
/// row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub counts: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(lo: &[f64], hi: &[f64], counts: &[usize]) -> Result<Self> {
        let d = lo.len();
        if hi.len() != d || counts.len() != d {
            return Err(Error::LengthMismatch { expected: d, got: hi.len().min(counts.len()) });
        }
        let mut total = 1usize;
        for (a, (l, h)) in counts.iter().zip(lo.iter().zip(hi)) {
            if *a == 0 || !(h > l) {
                return Err(Error::InvalidParameter("empty grid axis".into()));
            }
            total = total.checked_mul(*a).filter(|t| *t <= MAX_GRID_SAMPLES).ok_or(Error::GridOverflow(MAX_GRID_SAMPLES))?;
        }
        Ok(Self { lo: lo.to_vec(), hi: hi.to_vec(), counts: counts.to_vec(), values: vec![Complex64::new(0.0, 0.0); total] })
    }

    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(lo: &[f64], hi: &[f64], counts: &[usize], f: F) -> Result<Self> {
        let mut g = Self::zeros(lo, hi, counts)?;
        let mut x = vec![0.0; lo.len()];
        for i in 0..g.values.len() {
            g.point_into(i, &mut x);
            g.values[i] = f(&x);
        }
        Ok(g)
    }

    /// Samples a test function; the boundary must be below `1e-12` of the peak.
    pub fn sample(f: &TestFunction, lo: &[f64], hi: &[f64], counts: &[usize]) -> Result<Self> {
        let g = Self::from_fn(lo, hi, counts, |x| f.eval(x))?;
        let ratio = g.boundary_ratio();
        if ratio > 1e-12 {
            return Err(Error::UnderResolved(format!("boundary magnitude {ratio:.3e} of peak exceeds 1e-12")));
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.counts[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for a in (0..self.dim().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.counts[a + 1];
        }
        s
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.counts[a];
            flat /= self.counts[a];
        }
        idx
    }

    pub fn point_into(&self, flat: usize, out: &mut [f64]) {
        let mut flat = flat;
        for a in (0..self.dim()).rev() {
            let j = flat % self.counts[a];
            flat /= self.counts[a];
            out[a] = self.lo[a] + j as f64 * self.spacing(a);
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.point_into(flat, &mut x);
        x
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest magnitude on the outer faces relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.peak();
        if peak == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.values.len() {
            let idx = self.multi_index(i);
            if idx.iter().zip(&self.counts).any(|(j, n)| *j == 0 || *j + 1 == *n) {
                worst = worst.max(self.values[i].norm());
            }
        }
        worst / peak
    }

    pub fn l2_norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_volume()
    }

    /// Applies a 1-d transform along `axis` to every line of the array.
    fn transform_axis(&mut self, axis: usize, direction: FftDirection) {
        let n = self.counts[axis];
        let stride = self.strides()[axis];
        let fft = plan(n, direction);
        let outer = self.values.len() / (n * stride);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * n * stride + inner;
                for (j, l) in line.iter_mut().enumerate() {
                    *l = self.values[base + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, l) in line.iter().enumerate() {
                    self.values[base + j * stride] = *l;
                }
            }
        }
    }

    fn scale_axis<F: Fn(usize) -> Complex64>(&mut self, axis: usize, factor: F) {
        let n = self.counts[axis];
        let stride = self.strides()[axis];
        let table: Vec<Complex64> = (0..n).map(factor).collect();
        for (i, v) in self.values.iter_mut().enumerate() {
            *v *= table[(i / stride) % n];
        }
    }

    /// Momentum grid `p_k = (k − N/2)·Δp`, `Δp = 2π/(N·Δx)`. Every axis must
    /// have an even count.
    pub fn fourier(&self) -> GridFunction {
        self.fourier_slots(self.dim())
    }

    /// Transform of a function of several `d`-dimensional slots; axis `a`
    /// carries the pairing sign of component `a mod d`.
    pub fn fourier_slots(&self, d: usize) -> GridFunction {
        let mut out = self.clone();
        for a in 0..self.dim() {
            let n = self.counts[a];
            assert!(n % 2 == 0, "fourier needs even sample counts");
            let dx = self.spacing(a);
            let dp = 2.0 * std::f64::consts::PI / (n as f64 * dx);
            let s = axis_sign(a % d);
            let x0 = self.lo[a];
            out.scale_axis(a, |j| if j % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(-1.0, 0.0) });
            let dir = if s > 0.0 { FftDirection::Inverse } else { FftDirection::Forward };
            out.transform_axis(a, dir);
            out.scale_axis(a, |k| {
                let p = (k as f64 - (n / 2) as f64) * dp;
                Complex64::from_polar(dx, s * p * x0)
            });
            out.lo[a] = -((n / 2) as f64) * dp;
            out.hi[a] = out.lo[a] + n as f64 * dp;
        }
        out
    }

    /// Inverse of [`GridFunction::fourier`]; `x_lo` is the lower corner of
    /// the position box.
    pub fn inverse_fourier(&self, x_lo: &[f64]) -> GridFunction {
        self.inverse_fourier_slots(x_lo, self.dim())
    }

    pub fn inverse_fourier_slots(&self, x_lo: &[f64], d: usize) -> GridFunction {
        let mut out = self.clone();
        for a in 0..self.dim() {
            let n = self.counts[a];
            assert!(n % 2 == 0, "fourier needs even sample counts");
            let dp = self.spacing(a);
            let dx = 2.0 * std::f64::consts::PI / (n as f64 * dp);
            let s = axis_sign(a % d);
            let p0 = self.lo[a];
            let x0 = x_lo[a];
            out.scale_axis(a, |k| Complex64::from_polar(1.0, -s * (p0 + k as f64 * dp) * x0));
            let dir = if s > 0.0 { FftDirection::Forward } else { FftDirection::Inverse };
            out.transform_axis(a, dir);
            let norm = 1.0 / (n as f64 * dx);
            out.scale_axis(a, |j| Complex64::new(if j % 2 == 0 { norm } else { -norm }, 0.0));
            out.lo[a] = x0;
            out.hi[a] = x0 + n as f64 * dx;
        }
        out
    }

    /// Reorders axes so that new axis `a` is old axis `perm[a]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<GridFunction> {
        let d = self.dim();
        let mut seen = vec![false; d];
        if perm.len() != d || perm.iter().any(|&p| p >= d || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation of {d} axes")));
        }
        let lo: Vec<f64> = perm.iter().map(|&p| self.lo[p]).collect();
        let hi: Vec<f64> = perm.iter().map(|&p| self.hi[p]).collect();
        let counts: Vec<usize> = perm.iter().map(|&p| self.counts[p]).collect();
        let mut out = GridFunction::zeros(&lo, &hi, &counts)?;
        let old_strides = self.strides();
        for i in 0..out.values.len() {
            let idx = out.multi_index(i);
            let src: usize = idx.iter().zip(perm).map(|(j, &p)| j * old_strides[p]).sum();
            out.values[i] = self.values[src];
        }
        Ok(out)
    }

    /// `‖g − f‖₂ / ‖f‖₂` over the grid points for a reference function `f`.
    pub fn relative_l2_defect<F: Fn(&[f64]) -> Complex64>(&self, f: F) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        let mut x = vec![0.0; self.dim()];
        for (i, v) in self.values.iter().enumerate() {
            self.point_into(i, &mut x);
            let r = f(&x);
            num += (v - r).norm_sqr();
            den += r.norm_sqr();
        }
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    /// Binary export: magic, version, `d`, per-axis boxes, counts, then
    /// interleaved little-endian `re, im` doubles.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.dim() as u32).to_le_bytes())?;
        for a in 0..self.dim() {
            w.write_all(&self.lo[a].to_le_bytes())?;
            w.write_all(&self.hi[a].to_le_bytes())?;
        }
        for &n in &self.counts {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Config("not a grid function file".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Config(format!("unsupported grid format version {version}")));
        }
        let d = read_u32(&mut r)? as usize;
        if d == 0 || d > 16 {
            return Err(Error::Config(format!("implausible grid dimension {d}")));
        }
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for _ in 0..d {
            lo.push(read_f64(&mut r)?);
            hi.push(read_f64(&mut r)?);
        }
        let mut counts = Vec::with_capacity(d);
        for _ in 0..d {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            counts.push(u64::from_le_bytes(b) as usize);
        }
        let mut g = Self::zeros(&lo, &hi, &counts)?;
        for v in g.values.iter_mut() {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            *v = Complex64::new(re, im);
        }
        Ok(g)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
