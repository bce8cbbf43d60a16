//! The `cos_q` and `sin_q` transforms on the even and odd sublattices.
//!
//! A [`SublatticeSeq`] stores `f(q^{−2k})` (even family) or `f(q^{−2k+1})`
//! (odd family) for `k` in a window. Both transforms are their own inverse.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{QSpecial, SpecialError, Trig};

#[derive(Debug, Error)]
pub enum FourierError {
    #[error("dropped tail {tail:e} exceeds tolerance {tol:e}")]
    NotConverged { tail: f64, tol: f64 },
    #[error("window [{k_min}, {k_max}] does not cover the step at {start} and its decay")]
    WindowTooSmall { k_min: i32, k_max: i32, start: i32 },
    #[error("sequences mix even and odd families")]
    FamilyMismatch,
    #[error("malformed sequence table: {0}")]
    Format(String),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Even,
    Odd,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SublatticeSeq {
    family: Family,
    k_min: i32,
    values: Vec<Complex64>,
}

impl SublatticeSeq {
    pub fn new(family: Family, k_min: i32, values: Vec<Complex64>) -> Self {
        SublatticeSeq { family, k_min, values }
    }

    pub fn from_fn(family: Family, k_min: i32, k_max: i32, f: impl Fn(i32) -> Complex64) -> Self {
        SublatticeSeq { family, k_min, values: (k_min..=k_max).map(f).collect() }
    }

    pub fn zeros(family: Family, k_min: i32, k_max: i32) -> Self {
        Self::from_fn(family, k_min, k_max, |_| Complex64::new(0.0, 0.0))
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_min + self.values.len() as i32 - 1
    }

    /// Value at `k`, zero outside the window.
    pub fn get(&self, k: i32) -> Complex64 {
        let i = k - self.k_min;
        if i < 0 || i as usize >= self.values.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[i as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (self.k_min + i as i32, v))
    }

    /// The lattice point `q^{−2k}` or `q^{−2k+1}`.
    pub fn point(&self, q: f64, k: i32) -> f64 {
        match self.family {
            Family::Even => q.powi(-2 * k),
            Family::Odd => q.powi(-2 * k + 1),
        }
    }

    /// `Σ_k (point) |f|²`, the norm preserved by the transforms.
    pub fn weighted_norm_sq(&self, q: f64) -> f64 {
        self.iter().map(|(k, v)| self.point(q, k) * v.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &SublatticeSeq) -> f64 {
        let lo = self.k_min.min(other.k_min);
        let hi = self.k_max().max(other.k_max());
        (lo..=hi).map(|k| (self.get(k) - other.get(k)).norm()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), FourierError> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "re", "im", "family"])?;
        let fam = match self.family {
            Family::Even => "even",
            Family::Odd => "odd",
        };
        for (k, v) in self.iter() {
            wr.write_record([k.to_string(), v.re.to_string(), v.im.to_string(), fam.to_string()])?;
        }
        wr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, FourierError> {
        #[derive(Deserialize)]
        struct Row {
            k: i32,
            re: f64,
            im: f64,
            family: Family,
        }
        let mut rows = Vec::new();
        for rec in csv::Reader::from_reader(r).deserialize() {
            let row: Row = rec?;
            rows.push(row);
        }
        let first = rows.first().ok_or_else(|| FourierError::Format("no rows".into()))?;
        let family = first.family;
        let k_min = rows.iter().map(|r| r.k).min().unwrap_or(0);
        let k_max = rows.iter().map(|r| r.k).max().unwrap_or(0);
        let mut seq = SublatticeSeq::zeros(family, k_min, k_max);
        for r in rows {
            if r.family != family {
                return Err(FourierError::FamilyMismatch);
            }
            seq.values[(r.k - k_min) as usize] = Complex64::new(r.re, r.im);
        }
        Ok(seq)
    }
}

/// A transformed sequence and the largest kernel product at the window edges.
#[derive(Clone, Debug)]
pub struct Transform {
    pub seq: SublatticeSeq,
    pub tail_bound: f64,
}

pub struct QFourier {
    special: QSpecial,
    n_q: f64,
    tol: f64,
}

impl QFourier {
    pub fn new(q: f64) -> Result<Self, FourierError> {
        let special = QSpecial::new(q)?;
        let n_q = special.n_q();
        Ok(QFourier { special, n_q, tol: 1e-12 })
    }

    /// Relative tail tolerance; the default is `1e-12`.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn special(&self) -> &QSpecial {
        &self.special
    }

    pub fn n_q(&self) -> f64 {
        self.n_q
    }

    /// `g_n = N_q Σ_k q^{−2k} K(q^{−2(k+n)}) f_k` for `n` in `[n_min, n_max]`.
    pub fn transform(&self, kind: Trig, f: &SublatticeSeq, n_min: i32, n_max: i32) -> Result<Transform, FourierError> {
        let q = self.special.q();
        let kernel = |j: i32| self.special.on_even_lattice(kind, j);
        let mut out = Vec::with_capacity((n_max - n_min + 1).max(0) as usize);
        let mut tail: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for n in n_min..=n_max {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, v) in f.iter() {
                let t = v * (q.powi(-2 * k) * kernel(-(k + n)));
                acc += t;
                if k == f.k_min() || k == f.k_max() {
                    tail = tail.max(self.n_q * t.norm());
                }
            }
            let g = acc * self.n_q;
            scale = scale.max(g.norm());
            out.push(g);
        }
        if tail > self.tol * scale.max(1.0) {
            return Err(FourierError::NotConverged { tail, tol: self.tol * scale.max(1.0) });
        }
        Ok(Transform { seq: SublatticeSeq::new(f.family(), n_min, out), tail_bound: tail })
    }

    pub fn qft_cos(&self, f: &SublatticeSeq) -> Result<Transform, FourierError> {
        self.transform(Trig::Cos, f, f.k_min(), f.k_max())
    }

    pub fn qft_sin(&self, f: &SublatticeSeq) -> Result<Transform, FourierError> {
        self.transform(Trig::Sin, f, f.k_min(), f.k_max())
    }

    pub fn inverse_cos(&self, g: &SublatticeSeq) -> Result<Transform, FourierError> {
        self.qft_cos(g)
    }

    pub fn inverse_sin(&self, g: &SublatticeSeq) -> Result<Transform, FourierError> {
        self.qft_sin(g)
    }

    /// `Θ(q^{2n} − q^{2M})` as an even-family sequence: one for `k ≥ −M`.
    pub fn step_function(m: i32, k_min: i32, k_max: i32) -> SublatticeSeq {
        SublatticeSeq::from_fn(Family::Even, k_min, k_max, |k| {
            Complex64::new(if k >= -m { 1.0 } else { 0.0 }, 0.0)
        })
    }

    /// Closed form of the step transform at the point `q^{2k}`:
    /// `N_q q^{−2k} sin_q(q^{2(k+M)})`.
    pub fn step_closed_form(&self, m: i32, k: i32) -> f64 {
        self.n_q * self.special.q().powi(-2 * k) * self.special.on_even_lattice(Trig::Sin, k + m)
    }

    /// Transform of the step with jump at `M`, sampled at points `q^{2k}` for
    /// `k` in `[-k_out, k_out]`; the input window is `[k_min, k_max]`.
    pub fn qft_step(&self, m: i32, k_min: i32, k_max: i32, k_out: i32) -> Result<StepTransform, FourierError> {
        if k_min > -m || k_max <= -m {
            return Err(FourierError::WindowTooSmall { k_min, k_max, start: -m });
        }
        let theta = Self::step_function(m, k_min, k_max);
        let t = self.transform(Trig::Cos, &theta, -k_out, k_out).map_err(|e| match e {
            FourierError::NotConverged { .. } => FourierError::WindowTooSmall { k_min, k_max, start: -m },
            other => other,
        })?;
        // index n of the sequence is the point q^{2k} with k = −n
        let computed = (-k_out..=k_out).map(|k| (k, t.seq.get(-k).re)).collect();
        let closed = (-k_out..=k_out).map(|k| (k, self.step_closed_form(m, k))).collect();
        Ok(StepTransform { computed, closed, tail_bound: t.tail_bound })
    }

    /// Transforms the closed form back, returning `g(q^{2n})` for `n` in `[-n_out, n_out]`.
    pub fn step_round_trip(&self, m: i32, k_min: i32, k_max: i32, n_out: i32) -> Result<Vec<(i32, f64)>, FourierError> {
        // closed form at point q^{2k} is the sequence entry at index −k
        let seq = SublatticeSeq::from_fn(Family::Even, k_min, k_max, |idx| {
            Complex64::new(self.step_closed_form(m, -idx), 0.0)
        });
        let back = self.transform(Trig::Cos, &seq, -n_out, n_out)?;
        Ok((-n_out..=n_out).map(|n| (n, back.seq.get(-n).re)).collect())
    }
}

#[derive(Clone, Debug)]
pub struct StepTransform {
    /// `(k, value)` at the point `q^{2k}`
    pub computed: Vec<(i32, f64)>,
    pub closed: Vec<(i32, f64)>,
    pub tail_bound: f64,
}

impl StepTransform {
    pub fn max_deviation(&self) -> f64 {
        self.computed
            .iter()
            .zip(&self.closed)
            .map(|((_, a), (_, b))| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_seq(rng: &mut ChaCha8Rng, family: Family) -> SublatticeSeq {
        let mut values = vec![Complex64::new(0.0, 0.0); 81];
        for v in &mut values[34..47] {
            *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        SublatticeSeq::new(family, -40, values)
    }

    #[test]
    fn zero_maps_to_zero() {
        let qf = QFourier::new(2.0).unwrap();
        let z = SublatticeSeq::zeros(Family::Even, -10, 10);
        assert_eq!(qf.qft_cos(&z).unwrap().seq, z);
        assert_eq!(qf.qft_sin(&z).unwrap().seq, z);
    }

    #[test]
    fn round_trip_and_isometry() {
        let qf = QFourier::new(2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for family in [Family::Even, Family::Odd] {
            let f = random_seq(&mut rng, family);
            for kind in [Trig::Cos, Trig::Sin] {
                let g = qf.transform(kind, &f, -40, 40).unwrap().seq;
                let back = qf.transform(kind, &g, -40, 40).unwrap().seq;
                assert!(back.max_abs_diff(&f) < 1e-8);
                let (a, b) = (f.weighted_norm_sq(2.0), g.weighted_norm_sq(2.0));
                assert!((a - b).abs() < 1e-10 * a);
            }
        }
    }

    #[test]
    fn step_transform_matches_closed_form() {
        let qf = QFourier::new(2.0).unwrap();
        let st = qf.qft_step(0, -40, 60, 10).unwrap();
        assert!(st.max_deviation() < 1e-8);
        let back = qf.step_round_trip(0, -40, 60, 10).unwrap();
        for (n, v) in back {
            let want = if n <= 0 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-8, "n = {n}: {v}");
        }
        assert!(matches!(qf.qft_step(0, 5, 60, 10), Err(FourierError::WindowTooSmall { .. })));
    }

    #[test]
    fn step_shift_in_m() {
        let qf = QFourier::new(2.0).unwrap();
        for k in -5..5 {
            let a = qf.step_closed_form(0, k + 1);
            let b = qf.step_closed_form(1, k);
            assert!((a * 4.0 - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn csv_round_trip() {
        let s = SublatticeSeq::from_fn(Family::Odd, -3, 3, |k| Complex64::new(k as f64 / 7.0, 0.1));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(SublatticeSeq::read_csv(buf.as_slice()).unwrap(), s);
    }
}
