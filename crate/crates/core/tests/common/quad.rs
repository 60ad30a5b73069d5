//! Composite Simpson quadrature of the squashed density in pre-squash space.

use tanhshift::dist::SquashedGaussian1D;

pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

/// Integral of `pdf(y)` over (-1, 1) via `y = tanh t`, `dy = (1 - tanh^2 t) dt`.
pub fn total_mass(d: &SquashedGaussian1D) -> f64 {
    let lo = (d.mu() - 10.0 * d.sigma()).max(-14.0);
    let hi = (d.mu() + 10.0 * d.sigma()).min(14.0);
    simpson(
        |t| {
            let y = t.tanh();
            d.pdf(y).unwrap() * (1.0 - y * y)
        },
        lo,
        hi,
        20_000,
    )
}
