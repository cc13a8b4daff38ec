//! Partition sufficient statistics for all subkey hypotheses at once.
//!
//! For hypothesis `k` and output bit `b`, the traces with bit `b` of
//! `S(d ^ k)` set form the positive partition. Binning the traces by their
//! data value `d` turns each partition sum into the XOR correlation
//! `sum_d F(d) g_b(d ^ k)` with `g_b(x) = bit_b(S(x))`, which the
//! Walsh-Hadamard transform diagonalizes.

use crate::cipher::SBox;

/// In-place unnormalized Walsh-Hadamard transform; `a.len()` is a power of two.
pub(crate) fn fwht(a: &mut [f64]) {
    let n = a.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (x, y) = (a[i], a[i + h]);
                a[i] = x + y;
                a[i + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// Transformed bit indicators of one S-box, shared by every lane using it.
#[derive(Clone, Debug)]
pub struct SelectionKernel {
    width: usize,
    /// `bit_spectra[b]` is the transform of `x -> bit b of S(x)`.
    bit_spectra: Vec<Vec<f64>>,
}

/// Positive-partition counts, sums and sums of squares, indexed
/// `[bit][hypothesis]` with `bit` counted from the LSB of the output.
pub(crate) struct PositiveSums {
    pub count: Vec<Vec<f64>>,
    pub sum: Vec<Vec<f64>>,
    pub sum_sq: Vec<Vec<f64>>,
    pub total_count: f64,
    pub total_sum: f64,
    pub total_sum_sq: f64,
}

impl SelectionKernel {
    pub fn new(sbox: &SBox) -> Self {
        let width = sbox.width();
        let bit_spectra = (0..width)
            .map(|b| {
                let mut g: Vec<f64> = sbox.table().iter().map(|&y| f64::from((y >> b) & 1)).collect();
                fwht(&mut g);
                g
            })
            .collect();
        SelectionKernel { width, bit_spectra }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub(crate) fn positive_sums(&self, features: &[f64], data: &[u8]) -> PositiveSums {
        let n = 1usize << self.width;
        let mut cnt = vec![0.0; n];
        let mut s1 = vec![0.0; n];
        let mut s2 = vec![0.0; n];
        for (&f, &d) in features.iter().zip(data) {
            let d = d as usize;
            cnt[d] += 1.0;
            s1[d] += f;
            s2[d] += f * f;
        }
        let total_count = features.len() as f64;
        let total_sum = s1.iter().sum();
        let total_sum_sq = s2.iter().sum();
        fwht(&mut cnt);
        fwht(&mut s1);
        fwht(&mut s2);

        let correlate = |spectrum: &[f64], g: &[f64]| -> Vec<f64> {
            let mut out: Vec<f64> = spectrum.iter().zip(g).map(|(a, b)| a * b).collect();
            fwht(&mut out);
            let scale = 1.0 / n as f64;
            out.iter_mut().for_each(|v| *v *= scale);
            out
        };
        let mut count = Vec::with_capacity(self.width);
        let mut sum = Vec::with_capacity(self.width);
        let mut sum_sq = Vec::with_capacity(self.width);
        for g in &self.bit_spectra {
            count.push(correlate(&cnt, g).into_iter().map(f64::round).collect());
            sum.push(correlate(&s1, g));
            sum_sq.push(correlate(&s2, g));
        }
        PositiveSums {
            count,
            sum,
            sum_sq,
            total_count,
            total_sum,
            total_sum_sq,
        }
    }
}
