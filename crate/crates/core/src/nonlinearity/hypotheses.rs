//! Sampled certification of the structural hypotheses on the nonlinearity.
//!
//! Each predicate is an inequality `lhs ≤ rhs` evaluated on a uniform lattice
//! over a box in the `(u₁, u₂)` plane. The box must cover the range a
//! simulation visits for the certificate to mean anything.

use serde::{Deserialize, Serialize};

use super::NonlinearitySpec;
use crate::exec::Execution;

/// Absolute plus relative allowance: a sample fails when
/// `rhs − lhs < −(abs + rel·max(|lhs|, |rhs|))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-9, rel: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub u1: [f64; 2],
    pub u2: [f64; 2],
    /// Lattice points per axis (default 201).
    pub per_axis: usize,
    #[serde(default)]
    pub tolerance: Tolerance,
    #[serde(skip)]
    pub execution: Execution,
}

impl SampleBox {
    pub fn new(u1: [f64; 2], u2: [f64; 2]) -> Self {
        SampleBox {
            u1,
            u2,
            per_axis: 201,
            tolerance: Tolerance::default(),
            execution: Execution::default(),
        }
    }

    /// `[−r, r]²`.
    pub fn square(r: f64) -> Self {
        Self::new([-r, r], [-r, r])
    }

    pub fn with_per_axis(mut self, per_axis: usize) -> Self {
        self.per_axis = per_axis;
        self
    }

    pub fn with_tolerance(mut self, tolerance: Tolerance) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn contains(&self, a: f64, b: f64) -> bool {
        a >= self.u1[0] && a <= self.u1[1] && b >= self.u2[0] && b <= self.u2[1]
    }

    fn coordinate(range: [f64; 2], k: usize, per_axis: usize) -> f64 {
        if per_axis == 1 {
            0.5 * (range[0] + range[1])
        } else {
            range[0] + (range[1] - range[0]) * k as f64 / (per_axis - 1) as f64
        }
    }

    pub fn samples(&self) -> usize {
        self.per_axis.max(1).pow(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub predicate: String,
    pub sample_box: SampleBox,
    pub samples: usize,
    /// `rhs − lhs` at the most violated sample (negative means violated).
    pub worst_margin: f64,
    /// Allowance applied at that sample.
    pub allowance: f64,
    pub worst_point: [f64; 2],
    pub passed: bool,
}

#[derive(Clone, Copy)]
struct Sample {
    margin: f64,
    allowance: f64,
    point: [f64; 2],
}

impl Sample {
    fn score(&self) -> f64 {
        let s = self.margin + self.allowance;
        if s.is_nan() {
            f64::NEG_INFINITY
        } else {
            s
        }
    }
}

/// Visits every lattice point and keeps the most violated one. Rows may run
/// in parallel; the reduction walks rows in order, so the result is the same
/// for every execution policy.
fn sweep(name: String, region: &SampleBox, eval: impl Fn(f64, f64) -> (f64, f64) + Sync + Send) -> HypothesisReport {
    let per_axis = region.per_axis.max(1);
    let rows = region.execution.map_indexed(per_axis, |i| {
        let a = SampleBox::coordinate(region.u1, i, per_axis);
        let mut worst: Option<Sample> = None;
        for k in 0..per_axis {
            let b = SampleBox::coordinate(region.u2, k, per_axis);
            let (margin, allowance) = eval(a, b);
            let s = Sample {
                margin,
                allowance,
                point: [a, b],
            };
            match worst {
                Some(w) if w.score() <= s.score() => {}
                _ => worst = Some(s),
            }
        }
        worst.expect("at least one sample per row")
    });
    let worst = rows
        .into_iter()
        .reduce(|w, s| if s.score() < w.score() { s } else { w })
        .expect("at least one row");
    HypothesisReport {
        predicate: name,
        sample_box: *region,
        samples: per_axis * per_axis,
        worst_margin: worst.margin,
        allowance: worst.allowance,
        worst_point: worst.point,
        passed: worst.score() >= 0.0,
    }
}

/// Margin and allowance for `lhs ≤ rhs`.
fn inequality(lhs: f64, rhs: f64, tol: Tolerance) -> (f64, f64) {
    (rhs - lhs, tol.abs + tol.rel * lhs.abs().max(rhs.abs()))
}

/// Exactness `∂g₁/∂u₂ = ∂g₂/∂u₁` by central differences with step `h`.
/// The allowance is `tol + h²` to absorb the truncation error.
pub fn check_exactness(spec: &NonlinearitySpec, region: &SampleBox, h: f64, tol: f64) -> HypothesisReport {
    sweep("exactness".into(), region, |a, b| {
        let d12 = (spec.g1(a, b + h) - spec.g1(a, b - h)) / (2.0 * h);
        let d21 = (spec.g2(a + h, b) - spec.g2(a - h, b)) / (2.0 * h);
        (-(d12 - d21).abs(), tol + h * h)
    })
}

/// `(g₁, g₂)` against central differences of `G`.
pub fn check_gradient_consistency(spec: &NonlinearitySpec, region: &SampleBox, h: f64, tol: f64) -> HypothesisReport {
    sweep("gradient_consistency".into(), region, |a, b| {
        let d1 = (spec.potential(a + h, b) - spec.potential(a - h, b)) / (2.0 * h);
        let d2 = (spec.potential(a, b + h) - spec.potential(a, b - h)) / (2.0 * h);
        let err = (d1 - spec.g1(a, b)).abs().max((d2 - spec.g2(a, b)).abs());
        (-err, tol)
    })
}

/// `u₁f₁ + u₂f₂ ≤ 2(1+2ν)F`, the growth condition for finite-time blow-up.
pub fn check_blowup_growth(spec: &NonlinearitySpec, nu: f64, region: &SampleBox) -> HypothesisReport {
    let tol = region.tolerance;
    sweep(format!("blowup_growth(nu={nu})"), region, |a, b| {
        let lhs = a * spec.f1(a, b) + b * spec.f2(a, b);
        let rhs = 2.0 * (1.0 + 2.0 * nu) * spec.density(a, b);
        inequality(lhs, rhs, tol)
    })
}

/// `G(a,b) ≥ −k(a²+b²)`, the lower bound behind global existence for smooth kernels.
pub fn check_global_g_bound(spec: &NonlinearitySpec, k: f64, region: &SampleBox) -> HypothesisReport {
    let tol = region.tolerance;
    sweep(format!("global_g_bound(k={k})"), region, |a, b| {
        inequality(-k * (a * a + b * b), spec.potential(a, b), tol)
    })
}

/// `|g_i(a,b)|^{q_i} ≤ C[G(a,b) + k(a²+b²)]` for `i = 1, 2`, the bound behind
/// global existence for mildly singular kernels.
pub fn check_global_g_power_bound(
    spec: &NonlinearitySpec,
    c: f64,
    k: f64,
    q1: f64,
    q2: f64,
    region: &SampleBox,
) -> HypothesisReport {
    let tol = region.tolerance;
    sweep(
        format!("global_g_power_bound(C={c},k={k},q1={q1},q2={q2})"),
        region,
        |a, b| {
            let rhs = c * (spec.potential(a, b) + k * (a * a + b * b));
            let first = inequality(spec.g1(a, b).abs().powf(q1), rhs, tol);
            let second = inequality(spec.g2(a, b).abs().powf(q2), rhs, tol);
            if first.0 + first.1 <= second.0 + second.1 {
                first
            } else {
                second
            }
        },
    )
}
