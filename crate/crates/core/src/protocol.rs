//! Reference and interleaved benchmarking experiments.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordGroup, CliffordIndex, PhysicalGate, Target};
use crate::dynamics::{GatePropagators, NoiseModel, ShotNoise};
use crate::linalg::Mat2;
use crate::pulse::{PulseSettings, PulseShape};
use crate::rng::{self, StreamRng, DOMAIN_SEQUENCE, DOMAIN_SHOT};
use crate::state::QubitState;
use crate::{Error, Result};

/// Default cap on the number of simulated shots in one experiment.
pub const DEFAULT_MAX_TOTAL_SHOTS: u64 = 2_000_000_000;

/// State-preparation and measurement errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpamModel {
    /// Probability of preparing `|↑⟩` instead of `|↓⟩`.
    pub init_error: f64,
    /// P(report ↑ | state ↑).
    pub readout_fidelity_up: f64,
    /// P(report ↓ | state ↓).
    pub readout_fidelity_down: f64,
}

impl Default for SpamModel {
    fn default() -> Self {
        SpamModel::ideal()
    }
}

impl SpamModel {
    pub const fn ideal() -> Self {
        SpamModel { init_error: 0.0, readout_fidelity_up: 1.0, readout_fidelity_down: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("init_error", self.init_error),
            ("readout_fidelity_up", self.readout_fidelity_up),
            ("readout_fidelity_down", self.readout_fidelity_down),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Domain { name, value });
            }
        }
        Ok(())
    }

    /// Pass a projective outcome through the readout confusion matrix.
    fn report(&self, state_up: bool, u: f64) -> bool {
        if state_up {
            u < self.readout_fidelity_up
        } else {
            u >= self.readout_fidelity_down
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TargetPolicy {
    #[default]
    RandomPerSequence,
    AlwaysDown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbConfig {
    /// Sequence lengths N.
    pub lengths: Vec<u32>,
    /// Random sequences per length (K).
    #[serde(alias = "k")]
    pub sequences_per_length: u32,
    /// Shots per sequence (r).
    #[serde(alias = "r")]
    pub shots_per_sequence: u32,
    #[serde(default)]
    pub interleaved_gate: Option<PhysicalGate>,
    #[serde(default)]
    pub target_policy: TargetPolicy,
    #[serde(default)]
    pub seed: u64,
    pub pulse: PulseSettings,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub spam: SpamModel,
    /// Draw the random Cliffords of an interleaved run from the reference
    /// run's sequence streams.
    #[serde(default)]
    pub share_reference_sequences: bool,
    #[serde(default = "default_max_total_shots")]
    pub max_total_shots: u64,
}

fn default_max_total_shots() -> u64 {
    DEFAULT_MAX_TOTAL_SHOTS
}

/// Electron sequence lengths, 1 to 512 in powers of two.
pub const ELECTRON_LENGTHS: [u32; 10] = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512];
/// Nuclear sequence lengths, up to 1000.
pub const NUCLEAR_LENGTHS: [u32; 10] = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000];

impl RbConfig {
    /// Ideal square pulses on the electron grid, K = 15, r = 200.
    pub fn new(pulse: PulseSettings) -> Self {
        RbConfig {
            lengths: ELECTRON_LENGTHS.to_vec(),
            sequences_per_length: 15,
            shots_per_sequence: 200,
            interleaved_gate: None,
            target_policy: TargetPolicy::RandomPerSequence,
            seed: 0,
            pulse,
            noise: NoiseModel::ideal(),
            spam: SpamModel::ideal(),
            share_reference_sequences: false,
            max_total_shots: DEFAULT_MAX_TOTAL_SHOTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() {
            return Err(Error::InvalidConfig("lengths must not be empty"));
        }
        if self.lengths.contains(&0) {
            return Err(Error::InvalidConfig("every sequence length must be at least 1"));
        }
        if self.lengths.iter().enumerate().any(|(i, n)| self.lengths[..i].contains(n)) {
            return Err(Error::InvalidConfig("sequence lengths must be distinct"));
        }
        if self.sequences_per_length == 0 {
            return Err(Error::InvalidConfig("sequences_per_length must be at least 1"));
        }
        if self.shots_per_sequence == 0 {
            return Err(Error::InvalidConfig("shots_per_sequence must be at least 1"));
        }
        if !(self.pulse.pi_duration > 0.0 && self.pulse.pi_duration.is_finite()) {
            return Err(Error::Domain { name: "pi_duration", value: self.pulse.pi_duration });
        }
        self.noise.validate()?;
        self.spam.validate()?;
        Ok(())
    }

    pub fn total_shots(&self) -> u64 {
        self.lengths.len() as u64
            * u64::from(self.sequences_per_length)
            * u64::from(self.shots_per_sequence)
    }

    /// Coordinate separating random streams of different experiment variants.
    fn variant(&self) -> u64 {
        match self.interleaved_gate {
            None => 0,
            Some(g) => 1 + PhysicalGate::ALL.iter().position(|x| *x == g).unwrap_or(0) as u64,
        }
    }

    fn sequence_variant(&self) -> u64 {
        if self.share_reference_sequences {
            0
        } else {
            self.variant()
        }
    }

    pub fn sequence_rng(&self, n: u32, k: u32) -> StreamRng {
        rng::stream(self.seed, &[DOMAIN_SEQUENCE, self.sequence_variant(), u64::from(n), u64::from(k)])
    }

    pub fn shot_rng(&self, n: u32, k: u32, shot: u32) -> StreamRng {
        rng::stream(
            self.seed,
            &[DOMAIN_SHOT, self.variant(), u64::from(n), u64::from(k), u64::from(shot)],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Random,
    Interleaved,
    Recovery,
}

/// One benchmarking sequence: N random Cliffords, optionally each followed by
/// the interleaved gate, then the recovery Clifford.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RbSequence {
    pub n: u32,
    pub random: Vec<CliffordIndex>,
    pub interleaved: Option<CliffordIndex>,
    pub recovery: CliffordIndex,
    pub target: Target,
}

impl RbSequence {
    pub fn is_interleaved(&self) -> bool {
        self.interleaved.is_some()
    }

    /// The full gate stream in application order.
    pub fn steps(&self) -> impl Iterator<Item = (CliffordIndex, StepKind)> + '_ {
        self.random
            .iter()
            .flat_map(move |&c| {
                core::iter::once((c, StepKind::Random))
                    .chain(self.interleaved.map(|g| (g, StepKind::Interleaved)))
            })
            .chain(core::iter::once((self.recovery, StepKind::Recovery)))
    }

    pub fn cliffords(&self) -> Vec<CliffordIndex> {
        self.steps().map(|(c, _)| c).collect()
    }
}

/// Draw a random sequence of length `n` and its recovery gate.
pub fn generate_sequence<R: Rng + ?Sized>(
    group: &CliffordGroup,
    n: u32,
    rng: &mut R,
    policy: TargetPolicy,
    interleaved_gate: Option<PhysicalGate>,
) -> Result<RbSequence> {
    let interleaved = interleaved_gate.map(|g| group.single_gate_element(g)).transpose()?;
    let random: Vec<CliffordIndex> = (0..n)
        .map(|_| CliffordIndex::new(rng.random_range(1..=24u8)).expect("range is 1..=24"))
        .collect();
    let target = match policy {
        TargetPolicy::RandomPerSequence => {
            if rng.random::<bool>() {
                Target::Up
            } else {
                Target::Down
            }
        }
        TargetPolicy::AlwaysDown => Target::Down,
    };
    let mut net = CliffordIndex::IDENTITY;
    for &c in &random {
        net = group.compose(net, c);
        if let Some(g) = interleaved {
            net = group.compose(net, g);
        }
    }
    let recovery = group.recovery_for(net, target);
    Ok(RbSequence { n, random, interleaved, recovery, target })
}

/// Unitaries of all 24 elements as realised by one set of gate propagators.
#[derive(Debug, Clone)]
pub struct CliffordUnitaries([Mat2; 24]);

impl CliffordUnitaries {
    pub fn new(group: &CliffordGroup, gates: &GatePropagators) -> Self {
        let mut table = [Mat2::ZERO; 24];
        for (slot, e) in group.elements().iter().enumerate() {
            table[slot] = gates.sequence(&e.decomposition);
        }
        CliffordUnitaries(table)
    }

    pub fn get(&self, index: CliffordIndex) -> &Mat2 {
        &self.0[usize::from(index.get() - 1)]
    }
}

/// Evolve `initial` through every step of `sequence`, applying the configured
/// depolarisation after each Clifford and the idle evolution, if any.
pub fn evolve_sequence(
    sequence: &RbSequence,
    unitaries: &CliffordUnitaries,
    noise: &NoiseModel,
    draw: &ShotNoise,
    initial: QubitState,
) -> QubitState {
    let idle = GatePropagators::idle(noise, draw);
    let mut state = initial;
    for (c, kind) in sequence.steps() {
        state = state.evolve(unitaries.get(c));
        let p = match kind {
            StepKind::Interleaved => noise.depolarizing_interleaved,
            StepKind::Random | StepKind::Recovery => noise.depolarizing_per_clifford,
        };
        state = state.depolarize_unchecked(p);
        if let Some((factor, precession)) = idle {
            state = state.evolve(&precession).dephase(factor);
        }
    }
    state
}

/// Everything a shot needs besides its sequence and random stream.
#[derive(Debug, Clone, Copy)]
pub struct ShotSettings<'a> {
    pub group: &'a CliffordGroup,
    pub pulse: &'a PulseSettings,
    pub noise: &'a NoiseModel,
    pub spam: &'a SpamModel,
}

impl<'a> ShotSettings<'a> {
    pub fn from_config(group: &'a CliffordGroup, config: &'a RbConfig) -> Self {
        ShotSettings { group, pulse: &config.pulse, noise: &config.noise, spam: &config.spam }
    }
}

/// Simulate one single-shot measurement of `sequence`; returns whether `↑`
/// was reported.
///
/// Random numbers are consumed in a fixed order: preparation, two normal
/// deviates for the quasi-static noise, projective outcome, readout.
pub fn run_shot<R: Rng + ?Sized>(
    sequence: &RbSequence,
    settings: &ShotSettings<'_>,
    rng: &mut R,
) -> Result<bool> {
    let prepared_up = rng.random::<f64>() < settings.spam.init_error;
    let draw = ShotNoise::draw(settings.noise, rng);
    let gates = GatePropagators::new(settings.pulse, settings.noise, &draw)?;
    let unitaries = CliffordUnitaries::new(settings.group, &gates);
    let initial = if prepared_up { QubitState::up() } else { QubitState::down() };
    let p_up = evolve_sequence(sequence, &unitaries, settings.noise, &draw, initial).p_up();
    let state_up = rng.random::<f64>() < p_up;
    Ok(settings.spam.report(state_up, rng.random::<f64>()))
}

/// Shot outcomes of one sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RbRecord {
    pub n: u32,
    pub k: u32,
    pub target: Target,
    /// Reported `↑` per shot.
    pub outcomes: Vec<bool>,
}

impl RbRecord {
    pub fn p_up(&self) -> f64 {
        if self.outcomes.is_empty() {
            return f64::NAN;
        }
        self.outcomes.iter().filter(|&&o| o).count() as f64 / self.outcomes.len() as f64
    }

    /// Fraction of shots reporting the target state.
    pub fn success(&self) -> f64 {
        match self.target {
            Target::Up => self.p_up(),
            Target::Down => 1.0 - self.p_up(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbDataset {
    pub config: RbConfig,
    /// Ordered by the position of N in `config.lengths`, then k.
    pub records: Vec<RbRecord>,
}

impl RbDataset {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn is_interleaved(&self) -> bool {
        self.config.interleaved_gate.is_some()
    }
}

/// A validated experiment ready to simulate records in any order.
#[derive(Debug, Clone)]
pub struct ExperimentRunner {
    config: RbConfig,
    group: CliffordGroup,
    // Shared unitaries when no shot draws random physical parameters.
    fixed_unitaries: Option<CliffordUnitaries>,
}

impl ExperimentRunner {
    pub fn new(config: RbConfig) -> Result<Self> {
        config.validate()?;
        let requested = config.total_shots();
        if requested > config.max_total_shots {
            return Err(Error::ResourceLimit { requested, cap: config.max_total_shots });
        }
        let group = CliffordGroup::build()?;
        let fixed_unitaries = if config.noise.is_stochastic() {
            None
        } else {
            let gates = GatePropagators::new(&config.pulse, &config.noise, &ShotNoise::NONE)?;
            Some(CliffordUnitaries::new(&group, &gates))
        };
        Ok(ExperimentRunner { config, group, fixed_unitaries })
    }

    pub fn config(&self) -> &RbConfig {
        &self.config
    }

    pub fn group(&self) -> &CliffordGroup {
        &self.group
    }

    /// `(N, k)` pairs in dataset order.
    pub fn jobs(&self) -> Vec<(u32, u32)> {
        let k_max = self.config.sequences_per_length;
        self.config
            .lengths
            .iter()
            .flat_map(|&n| (0..k_max).map(move |k| (n, k)))
            .collect()
    }

    pub fn sequence(&self, n: u32, k: u32) -> Result<RbSequence> {
        let mut rng = self.config.sequence_rng(n, k);
        generate_sequence(
            &self.group,
            n,
            &mut rng,
            self.config.target_policy,
            self.config.interleaved_gate,
        )
    }

    pub fn run_record(&self, n: u32, k: u32) -> Result<RbRecord> {
        let sequence = self.sequence(n, k)?;
        let settings = ShotSettings::from_config(&self.group, &self.config);
        let shots = self.config.shots_per_sequence;
        let mut outcomes = Vec::with_capacity(shots as usize);
        match &self.fixed_unitaries {
            Some(unitaries) => {
                // Same stream layout as `run_shot`, with the deterministic
                // evolution hoisted out of the shot loop.
                let noise = &self.config.noise;
                let p_from_down =
                    evolve_sequence(&sequence, unitaries, noise, &ShotNoise::NONE, QubitState::down()).p_up();
                let p_from_up = if self.config.spam.init_error > 0.0 {
                    evolve_sequence(&sequence, unitaries, noise, &ShotNoise::NONE, QubitState::up()).p_up()
                } else {
                    p_from_down
                };
                for shot in 0..shots {
                    let mut rng = self.config.shot_rng(n, k, shot);
                    let prepared_up = rng.random::<f64>() < self.config.spam.init_error;
                    let _ = ShotNoise::draw(noise, &mut rng);
                    let p_up = if prepared_up { p_from_up } else { p_from_down };
                    let state_up = rng.random::<f64>() < p_up;
                    outcomes.push(self.config.spam.report(state_up, rng.random::<f64>()));
                }
            }
            None => {
                for shot in 0..shots {
                    let mut rng = self.config.shot_rng(n, k, shot);
                    outcomes.push(run_shot(&sequence, &settings, &mut rng)?);
                }
            }
        }
        Ok(RbRecord { n, k, target: sequence.target, outcomes })
    }

    /// Assemble a dataset from records produced in any order.
    pub fn assemble(&self, mut records: Vec<RbRecord>) -> RbDataset {
        let position = |n: u32| self.config.lengths.iter().position(|&x| x == n).unwrap_or(usize::MAX);
        records.sort_by_key(|r| (position(r.n), r.k));
        RbDataset { config: self.config.clone(), records }
    }

    pub fn run(&self) -> Result<RbDataset> {
        let records = self
            .jobs()
            .into_iter()
            .map(|(n, k)| self.run_record(n, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.assemble(records))
    }
}

/// Run every sequence and shot of `config` serially.
pub fn run_experiment(config: &RbConfig) -> Result<RbDataset> {
    ExperimentRunner::new(config.clone())?.run()
}

/// Ideal square π pulses of the given duration.
pub fn square_pulse(pi_duration: f64) -> PulseSettings {
    PulseSettings { shape: PulseShape::Square, pi_duration }
}
