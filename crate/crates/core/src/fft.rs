//! Discrete Fourier transforms and circular convolution / cross-correlation.
//!
//! Conventions: `dft(x)_k = sum_j exp(-2 pi i (k-1)(j-1) / m) x_j` (unnormalized)
//! and `idft = dft^{-1}`, which carries the `1/m` factor. Lengths must be
//! powers of two.

use std::cell::RefCell;

use rustfft::FftPlanner;

pub use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn check_len(m: usize) -> Result<()> {
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m));
    }
    Ok(())
}

/// In-place forward transform.
pub fn dft_in_place(buf: &mut [Complex64]) -> Result<()> {
    check_len(buf.len())?;
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
    Ok(())
}

/// In-place inverse transform, including the `1/m` scaling.
pub fn idft_in_place(buf: &mut [Complex64]) -> Result<()> {
    check_len(buf.len())?;
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    Ok(())
}

pub fn dft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut buf = x.to_vec();
    dft_in_place(&mut buf)?;
    Ok(buf)
}

pub fn idft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut buf = x.to_vec();
    idft_in_place(&mut buf)?;
    Ok(buf)
}

/// Forward transform of a real vector.
pub fn dft_real(x: &[f64]) -> Result<Vec<Complex64>> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft_in_place(&mut buf)?;
    Ok(buf)
}

fn check_pair(x: &[Complex64], y: &[Complex64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    check_len(x.len())
}

/// Circular convolution `x * y`, computed as `idft(dft x . dft y)`.
pub fn circ_conv(x: &[Complex64], y: &[Complex64]) -> Result<Vec<Complex64>> {
    check_pair(x, y)?;
    let fx = dft(x)?;
    let mut fy = dft(y)?;
    fy.iter_mut().zip(&fx).for_each(|(b, a)| *b *= a);
    idft_in_place(&mut fy)?;
    Ok(fy)
}

/// Circular cross-correlation `x (star) y`, computed as `idft(conj(dft x) . dft y)`.
pub fn circ_xcorr(x: &[Complex64], y: &[Complex64]) -> Result<Vec<Complex64>> {
    check_pair(x, y)?;
    let fx = dft(x)?;
    let mut fy = dft(y)?;
    fy.iter_mut().zip(&fx).for_each(|(b, a)| *b *= a.conj());
    idft_in_place(&mut fy)?;
    Ok(fy)
}

pub(crate) fn to_complex(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_complex(rng: &mut ChaCha8Rng, m: usize) -> Vec<Complex64> {
        (0..m).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    // O(m^2) oracles straight from the summation definitions (0-based here).
    fn direct_dft(x: &[Complex64]) -> Vec<Complex64> {
        let m = x.len();
        (0..m)
            .map(|k| {
                (0..m)
                    .map(|j| x[j] * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * j) as f64 / m as f64))
                    .sum()
            })
            .collect()
    }

    fn direct_conv(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let m = x.len();
        (0..m).map(|j| (0..m).map(|i| x[i] * y[(j + m - i) % m]).sum()).collect()
    }

    fn direct_xcorr(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let m = x.len();
        (0..m).map(|j| (0..m).map(|i| x[i].conj() * y[(j + i) % m]).sum()).collect()
    }

    #[test]
    fn delta_transforms_to_ones() {
        let mut e1 = vec![Complex64::new(0.0, 0.0); 8];
        e1[0] = Complex64::new(1.0, 0.0);
        let f = dft(&e1).unwrap();
        assert!(f.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn matches_direct_dft_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let m = 1 << rng.gen_range(0..8);
            let x = random_complex(&mut rng, m);
            let f = dft(&x).unwrap();
            assert!(max_abs_diff(&f, &direct_dft(&x)) < 1e-9);
            assert!(max_abs_diff(&idft(&f).unwrap(), &x) < 1e-9);
        }
    }

    #[test]
    fn linearity() {
        let a = to_complex(&[1.0, 0.0, 0.0, 0.0]);
        let b = to_complex(&[0.0, 1.0, 0.0, 0.0]);
        let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let lhs = dft(&sum).unwrap();
        let rhs: Vec<Complex64> = dft(&a).unwrap().iter().zip(dft(&b).unwrap()).map(|(x, y)| x + y).collect();
        assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(matches!(dft(&to_complex(&[1.0, 2.0, 3.0])), Err(Error::NotPowerOfTwo(3))));
        assert!(dft(&[]).is_err());
        assert!(circ_conv(&to_complex(&[1.0, 2.0]), &to_complex(&[1.0, 2.0, 3.0, 4.0])).is_err());
    }

    #[test]
    fn convolution_identity_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_complex(&mut rng, 16);
        let mut e1 = vec![Complex64::new(0.0, 0.0); 16];
        e1[0] = Complex64::new(1.0, 0.0);
        assert!(max_abs_diff(&circ_conv(&x, &e1).unwrap(), &x) < 1e-12);
    }

    #[test]
    fn convolution_theorem_both_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in 1..=10 {
            let m = 1 << p;
            let x = random_complex(&mut rng, m);
            let y = random_complex(&mut rng, m);
            let tol = 1e-9 * m as f64;
            assert!(max_abs_diff(&circ_conv(&x, &y).unwrap(), &direct_conv(&x, &y)) < tol);
            assert!(max_abs_diff(&circ_xcorr(&x, &y).unwrap(), &direct_xcorr(&x, &y)) < tol);
            // F(x * y) = Fx . Fy and F(x star y) = conj(Fx) . Fy
            let (fx, fy) = (dft(&x).unwrap(), dft(&y).unwrap());
            let conv: Vec<_> = fx.iter().zip(&fy).map(|(a, b)| a * b).collect();
            let xcorr: Vec<_> = fx.iter().zip(&fy).map(|(a, b)| a.conj() * b).collect();
            assert!(max_abs_diff(&dft(&direct_conv(&x, &y)).unwrap(), &conv) < tol);
            assert!(max_abs_diff(&dft(&direct_xcorr(&x, &y)).unwrap(), &xcorr) < tol);
        }
    }

    #[test]
    fn first_component_of_xcorr_is_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let x: Vec<f64> = (0..32).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..32).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let inner: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let e1 = circ_xcorr(&to_complex(&x), &to_complex(&y)).unwrap()[0];
            assert!((e1.re - inner).abs() < 1e-9 && e1.im.abs() < 1e-9);

            // On frequency-domain operands the same extraction carries 1/m.
            let (a, b) = (random_complex(&mut rng, 32), random_complex(&mut rng, 32));
            let prod: Vec<_> = a.iter().zip(&b).map(|(u, v)| u * v.conj()).collect();
            let want: Complex64 = a.iter().zip(&b).map(|(u, v)| u * v.conj()).sum::<Complex64>() / 32.0;
            assert!((idft(&prod).unwrap()[0] - want).norm() < 1e-9);
        }
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in 1..=10 {
            let m = 1 << p;
            let x = random_complex(&mut rng, m);
            let lhs: f64 = dft(&x).unwrap().iter().map(|z| z.norm_sqr()).sum();
            let rhs: f64 = m as f64 * x.iter().map(|z| z.norm_sqr()).sum::<f64>();
            assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
        }
    }
}
