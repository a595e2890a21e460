//! Independent reference models shared by the test targets.
#![allow(dead_code)]

use hybridamp::config::{
    flat_attenuation_table, load_scenario, parse_scenario, zero_raman_gain_table, ChannelGrid,
    Direction, FibreSpec, PumpSpec, ScenarioConfig,
};
use hybridamp::nli::{nli_power, nli_power_for_launch, NliSettings};
use hybridamp::pipeline::evaluate;
use hybridamp::raman::{solve_span, PropagationMode, RamanConvention, SolverSettings, SpanSolution};
use hybridamp::table::Table;
use hybridamp::units::{
    db_per_km_to_per_m, db_to_linear, dbm_to_w, frequency_to_wavelength, ps_nm2_km_to_si,
    ps_nm_km_to_si, wavelength_to_frequency, BOLTZMANN, PLANCK,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

pub const T: f64 = 300.0;

pub fn fibre_with(length: f64, attenuation: Table, raman: Table) -> FibreSpec {
    FibreSpec::new(length, attenuation, raman, 17e-6, 57.0, 1.3e-3, 80e-12, 1550e-9).unwrap()
}

/// Attenuation falling linearly from 0.25 dB/km at 1450 nm to 0.18 at 1630 nm.
pub fn sloped_attenuation() -> Table {
    Table::new(
        vec![1450e-9, 1630e-9],
        vec![db_per_km_to_per_m(0.25), db_per_km_to_per_m(0.18)],
    )
    .unwrap()
}

/// Triangular gain profile peaking at 13 THz (1/(W m)).
pub fn triangle_gain(peak: f64) -> Table {
    Table::new(vec![0.0, 13e12, 26e12], vec![0.0, peak, 0.0]).unwrap()
}

pub fn tight() -> SolverSettings {
    SolverSettings {
        integration_tolerance: 1e-11,
        bvp_tolerance_db: 1e-11,
        bvp_max_iterations: 500,
        ..SolverSettings::default()
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn smf(length: f64) -> FibreSpec {
    FibreSpec::new(
        length,
        flat_attenuation_table(0.2),
        zero_raman_gain_table(),
        ps_nm_km_to_si(21.0),
        ps_nm2_km_to_si(0.067),
        0.55e-3,
        150e-12,
        1550e-9,
    )
    .unwrap()
}

pub fn shipped(name: &str) -> ScenarioConfig {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    load_scenario(path).unwrap()
}

/// Independent model of the coupled equations in physical units for one
/// backward pump, integrated with classical RK4 at a fixed step and closed
/// with a secant shooting on the pump power at z = 0.
pub struct BruteForce {
    f: Vec<f64>,
    alpha: Vec<f64>,
    c: Vec<Vec<f64>>,
    k: Vec<Vec<f64>>,
    n_ch: usize,
}

impl BruteForce {
    pub fn new(grid: &ChannelGrid, fibre: &FibreSpec, pump: &PumpSpec, convention: RamanConvention) -> Self {
        let mut f = grid.frequencies().to_vec();
        f.push(pump.frequency());
        let n = f.len();
        let alpha = f.iter().map(|&x| fibre.attenuation_at(x).unwrap()).collect();
        let mut c = vec![vec![0.0; n]; n];
        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let df = (f[i] - f[j]).abs();
                let g = fibre.raman_gain_at(df).unwrap();
                c[i][j] = if f[j] > f[i] {
                    g
                } else {
                    match convention {
                        RamanConvention::AsPrinted => -g * f[j] / f[i],
                        RamanConvention::PhotonConserving => -g * f[i] / f[j],
                    }
                };
                let kappa = 1.0 / (1.0 - (-PLANCK * df / (BOLTZMANN * T)).exp());
                k[i][j] = c[i][j] * 2.0 * PLANCK * kappa * grid.bandwidth() * f[i];
            }
        }
        BruteForce { f, alpha, c, k, n_ch: grid.n_channels() }
    }

    /// State: channel powers, channel ASE, pump power.
    fn rhs(&self, s: &[f64]) -> Vec<f64> {
        let n = self.n_ch;
        let np = self.f.len();
        let mut t = vec![0.0; np];
        for i in 0..n {
            t[i] = s[i] + s[n + i];
        }
        t[n] = s[2 * n];
        let mut d = vec![0.0; s.len()];
        for i in 0..n {
            let net: f64 = (0..np).map(|j| self.c[i][j] * t[j]).sum();
            let spont: f64 = (0..np).map(|j| self.k[i][j] * t[j]).sum();
            d[i] = (-self.alpha[i] + net) * s[i];
            d[n + i] = (-self.alpha[i] + net) * s[n + i] + spont;
        }
        let net: f64 = (0..np).map(|j| self.c[n][j] * t[j]).sum();
        d[2 * n] = (self.alpha[n] - net) * s[2 * n];
        d
    }

    pub fn integrate(&self, start: &[f64], length: f64, h: f64, mut visit: impl FnMut(f64, &[f64])) -> Vec<f64> {
        let steps = (length / h).round() as usize;
        let mut s = start.to_vec();
        visit(0.0, &s);
        let axpy = |s: &[f64], k: &[f64], a: f64| -> Vec<f64> { s.iter().zip(k).map(|(x, y)| x + a * y).collect() };
        for step in 0..steps {
            let k1 = self.rhs(&s);
            let k2 = self.rhs(&axpy(&s, &k1, h / 2.0));
            let k3 = self.rhs(&axpy(&s, &k2, h / 2.0));
            let k4 = self.rhs(&axpy(&s, &k3, h));
            for i in 0..s.len() {
                s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            visit((step + 1) as f64 * h, &s);
        }
        s
    }

    pub fn shoot(&self, p0: &[f64], a0: &[f64], pump_at_l: f64, length: f64, h: f64) -> Vec<f64> {
        let start = |pp: f64| [p0, a0, &[pp]].concat();
        let miss = |pp: f64| self.integrate(&start(pp), length, h, |_, _| {})[2 * self.n_ch] - pump_at_l;
        let a_p = self.alpha[self.n_ch];
        let (mut x0, mut x1) = (pump_at_l * (-a_p * length).exp(), pump_at_l * (-a_p * length).exp() * 1.1);
        let (mut m0, mut m1) = (miss(x0), miss(x1));
        for _ in 0..60 {
            if m1 == m0 || (m1 / pump_at_l).abs() < 1e-15 {
                break;
            }
            let x2 = x1 - m1 * (x1 - x0) / (m1 - m0);
            x0 = x1;
            m0 = m1;
            x1 = x2;
            m1 = miss(x1);
        }
        start(x1)
    }
}

/// Dual-polarisation split-step Fourier propagation of a Gaussian-distributed
/// Nyquist channel over one lossy span. The NLI is the part of the output
/// field not explained by linear propagation or by a uniform nonlinear phase
/// rotation, measured over the channel band and referred to the span input.
pub fn split_step_nli(
    symbol_rate: f64,
    power: f64,
    length: f64,
    alpha: f64,
    beta2: f64,
    beta3: f64,
    gamma: f64,
    seed: u64,
) -> f64 {
    let n = 4096usize;
    let df = 100e6;
    let h = 100.0;
    let steps = (length / h).round() as usize;

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let freq = |k: usize| if k < n / 2 { k as f64 * df } else { (k as f64 - n as f64) * df };
    let in_band: Vec<usize> = (0..n).filter(|&k| freq(k).abs() < symbol_rate / 2.0).collect();
    let m = in_band.len() as f64;

    let linear = |dz: f64| -> Vec<Complex64> {
        (0..n)
            .map(|k| {
                let w = 2.0 * std::f64::consts::PI * freq(k);
                let phase = (beta2 / 2.0 * w * w - beta3 / 6.0 * w * w * w) * dz;
                Complex64::from_polar((-alpha * dz / 2.0).exp(), phase)
            })
            .collect()
    };
    let half = linear(h / 2.0);
    let full = linear(length);
    let l_eff = (1.0 - (-alpha * h).exp()) / alpha;
    let gamma_m = 8.0 / 9.0 * gamma;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = (power / 2.0 / m / 2.0).sqrt();
    let spectra: Vec<Vec<Complex64>> = (0..2)
        .map(|_| {
            let mut s = vec![Complex64::new(0.0, 0.0); n];
            for &k in &in_band {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                s[k] = Complex64::new(re, im) * sigma;
            }
            s
        })
        .collect();

    // time-domain fields: x_n = sum_k S_k e^{2 pi i k n / N}
    let mut fields: Vec<Vec<Complex64>> = spectra.clone();
    for f in fields.iter_mut() {
        inv.process(f);
    }
    for _ in 0..steps {
        for f in fields.iter_mut() {
            fwd.process(f);
            for (x, hk) in f.iter_mut().zip(&half) {
                *x *= hk / n as f64;
            }
            inv.process(f);
        }
        for i in 0..n {
            let p = fields[0][i].norm_sqr() + fields[1][i].norm_sqr();
            let rot = Complex64::from_polar(1.0, gamma_m * p * l_eff);
            fields[0][i] *= rot;
            fields[1][i] *= rot;
        }
        for f in fields.iter_mut() {
            fwd.process(f);
            for (x, hk) in f.iter_mut().zip(&half) {
                *x *= hk / n as f64;
            }
            inv.process(f);
        }
    }

    let mut nli = 0.0;
    for (f, s) in fields.iter_mut().zip(&spectra) {
        fwd.process(f);
        let out: Vec<Complex64> = f.iter().map(|x| x / n as f64).collect();
        let lin: Vec<Complex64> = s.iter().zip(&full).map(|(a, b)| a * b).collect();
        let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
        for &k in &in_band {
            num += out[k] * lin[k].conj();
            den += lin[k].norm_sqr();
        }
        let c = num / den;
        for &k in &in_band {
            nli += (out[k] - c * lin[k]).norm_sqr();
        }
    }
    nli / (-alpha * length).exp()
}

pub fn photon_flux(span: &SpanSolution, grid: &ChannelGrid, pumps: &[PumpSpec], k: usize) -> (f64, f64) {
    let mut net = 0.0;
    let mut scale = 0.0;
    for (i, &f) in grid.frequencies().iter().enumerate() {
        net += span.signal_powers[[i, k]] / f;
        scale += span.signal_powers[[i, k]] / f;
    }
    for (p, pump) in pumps.iter().enumerate() {
        let flux = span.pump_powers[[p, k]] / pump.frequency();
        scale += flux;
        match pump.direction {
            Direction::Forward => net += flux,
            Direction::Backward => net -= flux,
        }
    }
    (net, scale)
}

/// Largest relative deviation from `exp(-alpha z)` of a pump-free span.
pub fn decay_worst_rel() -> f64 {
    let grid = ChannelGrid::uniform(1550e-9, 1, 100e9, dbm_to_w(0.0)).unwrap();
    let fibre = fibre_with(57e3, flat_attenuation_table(0.2), zero_raman_gain_table());
    let span = solve_span(&grid, &fibre, &[], &[0.0], T, &SolverSettings::default()).unwrap();
    let alpha = db_per_km_to_per_m(0.2);
    let mut worst = rel(span.output_powers()[0], dbm_to_w(-11.4));
    for (k, &z) in span.z.iter().enumerate() {
        worst = worst.max(rel(span.rho[[0, k]], (-alpha * z).exp()));
        worst = worst.max(rel(span.signal_powers[[0, k]], 1e-3 * (-alpha * z).exp()));
    }
    worst
}

/// Solver minus closed-form net gain (dB) for an undepleted backward pump.
pub fn undepleted_gain_gap_db() -> f64 {
    let f_s = wavelength_to_frequency(1550e-9);
    let pump = PumpSpec::backward(frequency_to_wavelength(f_s + 13e12), 0.5);
    let grid = ChannelGrid::uniform(1550e-9, 1, 100e9, 1e-3).unwrap();
    let fibre = fibre_with(57e3, sloped_attenuation(), triangle_gain(0.19e-3));
    let settings = SolverSettings { pump_depletion: false, ..SolverSettings::default() };
    let span = solve_span(&grid, &fibre, &[pump], &[0.0], T, &settings).unwrap();

    let l = fibre.span_length;
    let a_s = fibre.attenuation_at(f_s).unwrap();
    let a_p = fibre.attenuation_at(pump.frequency()).unwrap();
    let g = fibre.raman_gain_at(13e12).unwrap();
    let log_gain = g * 0.5 * (1.0 - (-a_p * l).exp()) / a_p - a_s * l;
    let expected_db = 10.0 * log_gain / std::f64::consts::LN_10;
    db(span.output_powers()[0] / 1e-3) - expected_db
}

/// Largest relative deviation between the adaptive solver and the 1 m RK4
/// shooting model for three channels and a backward pump.
pub fn brute_force_worst_rel(convention: RamanConvention) -> f64 {
    let grid = ChannelGrid::uniform(1560e-9, 3, 2e12, dbm_to_w(5.0)).unwrap();
    let length = 40e3;
    let fibre = fibre_with(length, sloped_attenuation(), triangle_gain(0.19e-3));
    let pump = PumpSpec::backward(frequency_to_wavelength(grid.center_frequency() + 13e12), 0.4);
    let ase_in = [1e-7, 2e-7, 3e-7];
    let settings = SolverSettings { raman_convention: convention, ..tight() };
    let span = solve_span(&grid, &fibre, &[pump], &ase_in, T, &settings).unwrap();

    let oracle = BruteForce::new(&grid, &fibre, &pump, convention);
    let start = oracle.shoot(grid.launch_powers(), &ase_in, 0.4, length, 1.0);
    let mut worst: f64 = 0.0;
    let stride = (span.z[1] - span.z[0]).round() as usize;
    let mut sample = 0usize;
    oracle.integrate(&start, length, 1.0, |z, s| {
        if (z.round() as usize) % stride != 0 {
            return;
        }
        let k = sample;
        sample += 1;
        assert!((span.z[k] - z).abs() < 1e-6);
        for i in 0..3 {
            worst = worst.max(rel(span.signal_powers[[i, k]], s[i]));
            worst = worst.max(rel(span.ase_powers[[i, k]], s[3 + i]));
        }
        worst = worst.max(rel(span.pump_powers[[0, k]], s[6]));
    });
    assert_eq!(sample, span.n_samples());
    worst
}

/// Largest drift of the net photon flux along lossless, noise-free spans
/// with co- and counter-propagating pumps, relative to the total flux.
pub fn photon_flux_worst_drift() -> f64 {
    let grid = ChannelGrid::uniform(1560e-9, 5, 1e12, dbm_to_w(15.0)).unwrap();
    let fibre = fibre_with(57e3, flat_attenuation_table(1e-12), triangle_gain(0.19e-3));
    let settings = SolverSettings {
        raman_convention: RamanConvention::PhotonConserving,
        spontaneous_emission: false,
        ..tight()
    };
    let cases = [
        vec![PumpSpec::forward(1455e-9, 0.4), PumpSpec::forward(1480e-9, 0.2)],
        vec![PumpSpec::backward(1455e-9, 0.4), PumpSpec::forward(1480e-9, 0.2)],
    ];
    let mut worst: f64 = 0.0;
    for pumps in cases {
        let span = solve_span(&grid, &fibre, &pumps, &[0.0; 5], T, &settings).unwrap();
        // the channels must actually exchange power for the check to mean anything
        assert!(rel(span.output_powers()[0], span.output_powers()[4]) > 1e-3);
        let (n0, scale) = photon_flux(&span, &grid, &pumps, 0);
        for k in 0..span.n_samples() {
            let (n, _) = photon_flux(&span, &grid, &pumps, k);
            worst = worst.max((n - n0).abs() / scale);
        }
    }
    worst
}

const FLAT_EDFA: &str = r#"{
    "name": "flat",
    "channels": {"center_wavelength_nm": 1560, "count": 7, "symbol_rate_gbaud": 100, "total_launch_power_dbm": 8},
    "fibre": {"span_length_km": 57, "flat_attenuation_db_per_km": 0.2, "dispersion_ps_nm_km": 21,
              "dispersion_slope_ps_nm2_km": 0.067, "gamma_per_w_km": 0.55, "effective_area_um2": 150},
    "pumps": [],
    "amplifier": {"bands": [{"min_wavelength_nm": 1500, "max_wavelength_nm": 1620, "noise_figure_db": 5}]},
    "spans": 1,
    "nli": {"quadrature_points_per_axis": 16}
}"#;

/// Largest relative deviation of the pipeline's SNR_ASE from
/// `P / (N 2 (G - 1) n_sp h f B)` for an EDFA-only flat-loss link.
pub fn ase_oracle_worst_rel(n_spans: usize, mode: PropagationMode) -> f64 {
    let mut s = parse_scenario(FLAT_EDFA, None).unwrap();
    s.fibre = s.fibre.with_raman_gain(zero_raman_gain_table()).unwrap();
    s.n_spans = n_spans;
    s.propagation = mode;
    let gain = db_to_linear(0.2 * 57.0);
    let n_sp = db_to_linear(5.0) / 2.0;
    let eval = evaluate(&s).unwrap();
    let mut worst: f64 = 0.0;
    for (i, &snr) in eval.snr_ase.iter().enumerate() {
        let f = s.grid.frequencies()[i];
        let p = s.grid.launch_powers()[i];
        let expected = p / (n_spans as f64 * 2.0 * (gain - 1.0) * n_sp * PLANCK * f * s.grid.bandwidth());
        worst = worst.max(rel(snr, expected));
        assert_eq!(eval.link.per_channel[i].snr_ase, snr);
    }
    worst
}

pub fn first_span(s: &ScenarioConfig) -> SpanSolution {
    let ase = vec![0.0; s.grid.n_channels()];
    solve_span(&s.grid, &s.fibre, &s.pumps, &ase, s.amplifier.temperature, &s.solver).unwrap()
}

/// Largest deviation of NLI(2P) / NLI(P) from 8 on the reference grid.
pub fn cubic_worst_rel(s: &ScenarioConfig, span: &SpanSolution, channels: &[usize]) -> f64 {
    let settings = NliSettings::default();
    let doubled: Vec<f64> = s.grid.launch_powers().iter().map(|p| 2.0 * p).collect();
    channels
        .iter()
        .map(|&ch| {
            let base = nli_power(&s.grid, &s.fibre, span, ch, &settings).unwrap();
            let scaled = nli_power_for_launch(&s.grid, &s.fibre, span, ch, &doubled, &settings).unwrap();
            rel(scaled, 8.0 * base)
        })
        .fold(0.0, f64::max)
}

/// Largest relative NLI change when the quadrature resolution doubles.
pub fn convergence_worst_rel(s: &ScenarioConfig, span: &SpanSolution, channels: &[usize]) -> f64 {
    let coarse = NliSettings::default();
    let fine = NliSettings { quadrature_points_per_axis: 2 * coarse.quadrature_points_per_axis, ..coarse.clone() };
    channels
        .iter()
        .map(|&ch| {
            let a = nli_power(&s.grid, &s.fibre, span, ch, &coarse).unwrap();
            let b = nli_power(&s.grid, &s.fibre, span, ch, &fine).unwrap();
            rel(a, b)
        })
        .fold(0.0, f64::max)
}

/// Model minus split-step NLI (dB) for one 100 GBd channel at 0 dBm over a
/// pump-free 57 km span.
pub fn split_step_gap_db() -> f64 {
    let symbol_rate = 100e9;
    let grid = ChannelGrid::uniform(1550e-9, 1, symbol_rate, dbm_to_w(0.0)).unwrap();
    let fibre = smf(57e3);
    let span = solve_span(&grid, &fibre, &[], &[0.0], T, &SolverSettings::default()).unwrap();
    let settings = NliSettings { bandwidth_points: 8, ..NliSettings::default() };
    let model = nli_power(&grid, &fibre, &span, 0, &settings).unwrap();

    let alpha = db_per_km_to_per_m(0.2);
    let (beta2, beta3) = fibre.dispersion_at(grid.center_frequency());
    let runs = 6;
    let oracle: f64 = (0..runs)
        .map(|seed| split_step_nli(symbol_rate, 1e-3, 57e3, alpha, beta2, beta3, 0.55e-3, seed))
        .sum::<f64>()
        / runs as f64;
    db(model) - db(oracle)
}
