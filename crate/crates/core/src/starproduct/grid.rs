use num_complex::Complex64;

use crate::geometry::spectral::{signed_mode, Fft2};
use crate::geometry::Grid;

struct Derivatives {
    fft: Fft2,
    spectrum: Vec<Complex64>,
    kq: Vec<f64>,
    kp: Vec<f64>,
}

impl Derivatives {
    fn new(g: &Grid, fft: &Fft2) -> Self {
        let s = g.space;
        let mut spectrum = g.data.clone();
        fft.forward(&mut spectrum);
        let kq = (0..s.nq).map(|i| s.wavenumber(signed_mode(i, s.nq), 0).0).collect();
        let kp = (0..s.np).map(|j| s.wavenumber(0, signed_mode(j, s.np)).1).collect();
        Self { fft: fft.clone(), spectrum, kq, kp }
    }

    fn get(&self, dq: u32, dp: u32) -> Vec<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let np = self.kp.len();
        let mut out = self.spectrum.clone();
        for (a, &kq) in self.kq.iter().enumerate() {
            let fq = (i * kq).powu(dq);
            for (b, &kp) in self.kp.iter().enumerate() {
                out[a * np + b] *= fq * (i * kp).powu(dp);
            }
        }
        self.fft.inverse(&mut out);
        out
    }
}

/// Truncated bidifferential series `Σ_{n ≤ order} (iħ/2)^n/n! · f Pⁿ g`
/// with pseudo-spectral derivatives. Used to cross-check the exact Fourier path.
pub fn grid_moyal_product(f: &Grid, g: &Grid, hbar: f64, order: u32) -> Grid {
    let s = f.space;
    let fft = Fft2::new(s.nq, s.np);
    let (df, dg) = (Derivatives::new(f, &fft), Derivatives::new(g, &fft));
    let mut out = vec![Complex64::new(0.0, 0.0); f.data.len()];
    let mut coeff = Complex64::new(1.0, 0.0);
    for n in 0..=order {
        if n > 0 {
            coeff *= Complex64::new(0.0, hbar / 2.0) / n as f64;
        }
        let mut binom = 1.0;
        for k in 0..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let a = df.get(n - k, k);
            let b = dg.get(k, n - k);
            let w = coeff * sign * binom;
            for ((o, x), y) in out.iter_mut().zip(&a).zip(&b) {
                *o += w * x * y;
            }
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
    }
    Grid { space: s, data: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FourierSeries, PhaseSpace};
    use crate::starproduct::twisted_product;

    #[test]
    fn residual_shrinks_with_truncation_order() {
        let s = PhaseSpace::standard_torus(32).unwrap();
        let f = FourierSeries::cosine(2, 1).plus(&FourierSeries::sine(1, 0));
        let g = FourierSeries::cosine(1, 3);
        let hbar = 0.4;
        let exact = twisted_product(&s, &f, &g, hbar).to_grid(&s);
        let (fg, gg) = (f.to_grid(&s), g.to_grid(&s));
        let errors: Vec<f64> =
            [2, 4, 6, 8].iter().map(|&n| grid_moyal_product(&fg, &gg, hbar, n).l2_distance(&exact)).collect();
        for w in errors.windows(2) {
            assert!(w[1] < w[0], "{errors:?}");
        }
        assert!(errors[3] < 1e-5, "{errors:?}");
    }
}
