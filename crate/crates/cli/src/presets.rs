//! Built-in scenarios, one per qualitative regime of the system.

use std::f64::consts::PI;

use crate::config::{
    CertificateConfig, ConfigError, DiagnosticsConfig, EvolutionSection, ExperimentConfig, FieldConfig, GridConfig,
    HypothesisConfig, InitialConfig, KernelConfig, NonlinearityConfig, OutputConfig,
};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    build: fn() -> ExperimentConfig,
}

impl Preset {
    /// The preset with every default filled in.
    pub fn config(&self) -> ExperimentConfig {
        (self.build)().resolved().expect("built-in presets are valid")
    }
}

pub fn list_presets() -> &'static [Preset] {
    &PRESETS
}

pub fn preset(name: &str) -> Result<ExperimentConfig, ConfigError> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .map(Preset::config)
        .ok_or_else(|| ConfigError::UnknownPreset(name.to_owned()))
}

static PRESETS: [Preset; 6] = [
    Preset {
        name: "linear-dispersion",
        summary:
            "g = 0, exponential kernel, cos x on a long period; every snapshot is compared with the exact solution",
        build: linear_dispersion,
    },
    Preset {
        name: "energy-conservation",
        summary: "defocusing quartic coupling with zero-mean bumps; the energy stays constant",
        build: energy_conservation,
    },
    Preset {
        name: "blowup-negative-energy",
        summary: "focusing quartic, negative initial energy; certified blow-up before the Levine bound",
        build: blowup_negative_energy,
    },
    Preset {
        name: "blowup-positive-energy",
        summary: "focusing quartic, positive energy with A^2 < E(0)B; certified and blows up",
        build: blowup_positive_energy,
    },
    Preset {
        name: "global-smooth-kernel",
        summary: "Gaussian kernel, defocusing quartic with G >= 0; global solution",
        build: global_smooth_kernel,
    },
    Preset {
        name: "global-singular-kernel",
        summary: "exponential kernel through its radial profile, defocusing quartic; global solution",
        build: global_singular_kernel,
    },
];

fn exponential_pair() -> (KernelConfig, KernelConfig) {
    (KernelConfig::named("exponential"), KernelConfig::named("exponential"))
}

fn base(name: &str, description: &str, grid: GridConfig, nonlinearity: NonlinearityConfig) -> ExperimentConfig {
    let (kernel1, kernel2) = exponential_pair();
    ExperimentConfig {
        name: name.into(),
        description: description.into(),
        grid,
        kernel1,
        kernel2,
        nonlinearity,
        initial: InitialConfig::default(),
        evolution: EvolutionSection::new(1e-3, 1.0),
        diagnostics: DiagnosticsConfig::default(),
        output: OutputConfig::default(),
    }
}

fn linear_dispersion() -> ExperimentConfig {
    let mut cfg = base(
        "linear-dispersion",
        "u1 = cos(t/sqrt 2) cos x for the exponential kernel",
        GridConfig {
            n: 512,
            period: 16.0 * PI,
        },
        NonlinearityConfig::linear(),
    );
    cfg.initial.phi1 = FieldConfig::cosine(1.0, 1.0);
    cfg.evolution = EvolutionSection::new(1e-3, 1.0);
    cfg.diagnostics.oracle = true;
    cfg
}

/// Bumps shared by the two defocusing presets.
fn defocusing_data() -> InitialConfig {
    InitialConfig {
        phi1: FieldConfig::gaussian(1.0, 1.0, 0.0),
        phi2: FieldConfig::gaussian(0.5, 1.5, 3.0),
        psi1: FieldConfig::gaussian(0.3, 1.0, -2.0),
        psi2: FieldConfig::default(),
    }
}

fn energy_conservation() -> ExperimentConfig {
    let mut cfg = base(
        "energy-conservation",
        "E(t) is constant for the quartic family with kappa1 = kappa2 = 1",
        GridConfig { n: 256, period: 32.0 },
        NonlinearityConfig::quartic(1.0, 1.0),
    );
    cfg.initial = defocusing_data();
    cfg.evolution = EvolutionSection::new(1e-3, 10.0);
    cfg.diagnostics.hypotheses = vec![
        HypothesisConfig::visited("exactness", &[]),
        HypothesisConfig::visited("global_g_bound", &[("k", 0.0)]),
    ];
    cfg
}

/// `u1·f1 + u2·f2 ≤ 2(1+2ν)F` on the range the run reaches.
fn focusing(name: &str, description: &str) -> ExperimentConfig {
    let mut cfg = base(
        name,
        description,
        GridConfig { n: 256, period: 32.0 },
        NonlinearityConfig::quartic(-1.0, 0.0),
    );
    cfg.initial.phi1 = FieldConfig::gaussian(2.0, 1.0, 0.0);
    cfg.evolution = EvolutionSection {
        stride: 10,
        ..EvolutionSection::new(1e-4, 10.0)
    };
    cfg.diagnostics.certificate = Some(CertificateConfig { nu: 0.5 });
    cfg.diagnostics.hypotheses = vec![HypothesisConfig::visited("blowup_growth", &[("nu", 0.5)])];
    cfg
}

fn blowup_negative_energy() -> ExperimentConfig {
    focusing(
        "blowup-negative-energy",
        "E(0) = -0.83 for a centred bump of amplitude 2; zero initial velocity",
    )
}

fn blowup_positive_energy() -> ExperimentConfig {
    let mut cfg = focusing(
        "blowup-positive-energy",
        "a velocity bump away from the displacement makes E(0) > 0 while keeping A^2 < E(0)B",
    );
    cfg.initial.psi1 = FieldConfig::gaussian(1.0, 1.0, 16.0);
    cfg
}

fn global_smooth_kernel() -> ExperimentConfig {
    let mut cfg = base(
        "global-smooth-kernel",
        "Gaussian kernel of width 0.05 with G >= 0",
        GridConfig { n: 256, period: 64.0 },
        NonlinearityConfig::quartic(1.0, 0.0),
    );
    let k = KernelConfig::with_params("gaussian", &[("width", 0.05)]);
    cfg.kernel1 = k.clone();
    cfg.kernel2 = k;
    cfg.initial = defocusing_data();
    cfg.evolution = EvolutionSection::new(1e-2, 50.0);
    cfg.diagnostics.hypotheses = vec![HypothesisConfig::visited("global_g_bound", &[("k", 0.0)])];
    cfg
}

fn global_singular_kernel() -> ExperimentConfig {
    let mut cfg = base(
        "global-singular-kernel",
        "gamma(r) = exp(-r)/2 applied as gamma'' * w - lambda w; |g_i|^(4/3) <= 4G",
        GridConfig { n: 256, period: 64.0 },
        NonlinearityConfig::quartic(1.0, 0.0),
    );
    let k = KernelConfig {
        descriptor: Some("exponential".into()),
        ..KernelConfig::named("mildly_singular")
    };
    cfg.kernel1 = k.clone();
    cfg.kernel2 = k;
    cfg.initial = defocusing_data();
    cfg.evolution = EvolutionSection::new(1e-2, 50.0);
    let q = 4.0 / 3.0;
    cfg.diagnostics.hypotheses = vec![HypothesisConfig::visited(
        "global_g_power_bound",
        &[("c", 4.0), ("k", 0.0), ("q1", q), ("q2", q)],
    )];
    cfg
}
