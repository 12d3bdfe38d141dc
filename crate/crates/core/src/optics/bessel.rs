//! First-order Bessel function and the Airy intensity profile.

/// First zero of `J₁(x)` for `x > 0`.
pub const J1_FIRST_ZERO: f64 = 3.831_705_970_207_512;

/// Bessel function of the first kind, order one.
///
/// Evaluates the integral `J₁(x) = (1/π) ∫₀^π cos(τ − x·sin τ) dτ` with the
/// trapezoidal rule. The integrand extends to a smooth periodic function, so
/// the rule converges geometrically once the node count exceeds `|x|`.
pub fn j1(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x < 0.0 {
        return -j1(-x);
    }
    let nodes = (x.ceil() as usize).max(16) + 48;
    let step = std::f64::consts::PI / nodes as f64;
    // The endpoint terms cos(0) and cos(π) carry half weight each and cancel.
    let sum: f64 = (1..nodes)
        .map(|k| {
            let tau = k as f64 * step;
            (tau - x * tau.sin()).cos()
        })
        .sum();
    sum / nodes as f64
}

/// Normalized Airy intensity `|2·J₁(x)/x|²`, equal to 1 at `x = 0`.
pub fn airy_intensity(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-8 {
        // 2J₁(x)/x = 1 − x²/8 + …
        return 1.0 - x * x / 4.0;
    }
    let amplitude = 2.0 * j1(x) / x;
    amplitude * amplitude
}
