//! Romberg extrapolation of the composite trapezoid rule.

const MIN_LEVELS: usize = 4;
const MAX_LEVELS: usize = 16;

/// `∫_a^b f`. The starting panel count should resolve any oscillation in `f`.
///
/// Stops when successive extrapolants agree to `rel_tol` of the result, or to
/// a few ulps of `∫|f|` when cancellation makes the result itself tiny.
pub(crate) fn romberg(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, rel_tol: f64) -> f64 {
    let panels = panels.max(1);
    let mut h = (b - a) / panels as f64;
    let (fa, fb) = (f(a), f(b));
    let mut trap = 0.5 * (fa + fb);
    let mut magnitude = 0.5 * (fa.abs() + fb.abs());
    for k in 1..panels {
        let v = f(a + k as f64 * h);
        trap += v;
        magnitude += v.abs();
    }
    trap *= h;
    let floor = 8.0 * f64::EPSILON * magnitude * h;

    let mut prev_row = vec![trap];
    let mut count = panels;
    for level in 1..MAX_LEVELS {
        // refine: add the midpoints of the current panels
        let mut mid = 0.0;
        for k in 0..count {
            mid += f(a + (k as f64 + 0.5) * h);
        }
        let refined = 0.5 * prev_row[0] + 0.5 * h * mid;
        h *= 0.5;
        count *= 2;

        let mut row = Vec::with_capacity(level + 1);
        row.push(refined);
        let mut factor = 1.0;
        for m in 1..=level {
            factor *= 4.0;
            let extrapolated = row[m - 1] + (row[m - 1] - prev_row[m - 1]) / (factor - 1.0);
            row.push(extrapolated);
        }
        let best = row[level];
        let change = (best - prev_row[level - 1]).abs();
        if !best.is_finite() {
            return best;
        }
        if level >= MIN_LEVELS && change <= rel_tol * best.abs() + floor {
            return best;
        }
        prev_row = row;
    }
    prev_row[prev_row.len() - 1]
}

/// `2∫_0^R f(ρ) cos(ξρ) dρ`, the Fourier transform of the even extension of `f`
/// truncated to `[-R, R]`.
pub(crate) fn even_cosine_transform(f: &(impl Fn(f64) -> f64 + ?Sized), xi: f64, radius: f64) -> f64 {
    let oscillations = (xi.abs() * radius / std::f64::consts::PI).ceil() as usize;
    let panels = 32 + 8 * oscillations;
    2.0 * romberg(|r| f(r) * (xi * r).cos(), 0.0, radius, panels, 1e-14)
}
