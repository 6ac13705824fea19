//! Complex DFT kernels: iterative radix-2 for power-of-two lengths and
//! Bluestein's chirp-z reformulation for everything else.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Unnormalized forward DFT, `X[k] = sum_n x[n] exp(-2 pi i k n / len)`.
pub(crate) fn forward(buf: &mut [Complex64]) {
    transform(buf, false);
}

/// Unnormalized inverse DFT (positive exponent, no `1/len` scaling).
pub(crate) fn inverse(buf: &mut [Complex64]) {
    transform(buf, true);
}

fn transform(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        radix2(buf, inverse);
    } else {
        bluestein(buf, inverse);
    }
}

/// `exp(sign * 2 pi i * num / den)`, with `num` reduced modulo `den` first so
/// large indices do not lose precision in the angle.
fn unit_root(num: u64, den: u64, sign: f64) -> Complex64 {
    let reduced = num % den;
    let angle = sign * 2.0 * PI * (reduced as f64) / (den as f64);
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

fn radix2(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    let bits = n.trailing_zeros();

    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| unit_root(k as u64, n as u64, sign))
        .collect();

    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let step = n / size;
        for start in (0..n).step_by(size) {
            for k in 0..half {
                let w = twiddles[k * step];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        size *= 2;
    }
}

fn bluestein(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    let m = (2 * n - 1).next_power_of_two();
    let sign = if inverse { 1.0 } else { -1.0 };

    // chirp[k] = exp(sign * pi i k^2 / n); k^2 is taken modulo 2n.
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let k = k as u64;
            unit_root(k * k, 2 * n as u64, sign)
        })
        .collect();

    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for (slot, (x, c)) in a.iter_mut().zip(buf.iter().zip(&chirp)) {
        *slot = x * c;
    }

    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        let c = chirp[k].conj();
        b[k] = c;
        b[m - k] = c;
    }

    radix2(&mut a, false);
    radix2(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    radix2(&mut a, true);

    let scale = 1.0 / m as f64;
    for (out, (conv, c)) in buf.iter_mut().zip(a.iter().zip(&chirp)) {
        *out = conv * c * scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(input: &[Complex64]) -> Vec<Complex64> {
        let n = input.len();
        (0..n)
            .map(|k| {
                input
                    .iter()
                    .enumerate()
                    .map(|(j, x)| x * unit_root((k * j) as u64, n as u64, -1.0))
                    .sum()
            })
            .collect()
    }

    fn signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let t = i as f64;
                Complex64::new(libm::sin(0.37 * t) + 0.1 * t, libm::cos(1.3 * t))
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_mixed_lengths() {
        for n in [1usize, 2, 3, 5, 8, 12, 16, 31, 64, 100] {
            let input = signal(n);
            let expected = naive(&input);
            let mut got = input.clone();
            forward(&mut got);
            for (g, e) in got.iter().zip(&expected) {
                assert!((g - e).norm() < 1e-9, "n={n}: {g} vs {e}");
            }
        }
    }

    #[test]
    fn inverse_undoes_forward_up_to_scale() {
        for n in [6usize, 32, 182] {
            let input = signal(n);
            let mut buf = input.clone();
            forward(&mut buf);
            inverse(&mut buf);
            for (b, x) in buf.iter().zip(&input) {
                assert!((b / n as f64 - x).norm() < 1e-10);
            }
        }
    }
}
