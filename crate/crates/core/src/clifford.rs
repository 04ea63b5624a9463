//! The single-qubit Clifford group as sequences of physical pulses.
//!
//! Elements are numbered 1..=24 and each one is realised by a fixed list of at
//! most three physical gates drawn from `{I, X, Y, ±X/2, ±Y/2}`. Gates in a
//! decomposition are listed in the order they are applied.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{Mat2, C64, IDENTITY};
use crate::{Error, Result};

/// Entries with modulus below this are treated as zero when fixing the phase.
pub const PHASE_ZERO_THRESHOLD: f64 = 1e-12;
/// Entrywise tolerance for equality of canonical unitaries.
pub const UNITARY_TOLERANCE: f64 = 1e-9;
/// Mean number of physical gates per Clifford element (45 / 24).
pub const MEAN_GATES_PER_CLIFFORD: f64 = 1.875;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// One physical pulse, or the identity (no pulse).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhysicalGate {
    #[serde(rename = "I")]
    Identity,
    #[serde(rename = "X")]
    X,
    #[serde(rename = "Y")]
    Y,
    #[serde(rename = "X/2")]
    HalfX,
    #[serde(rename = "Y/2")]
    HalfY,
    #[serde(rename = "-X/2")]
    MinusHalfX,
    #[serde(rename = "-Y/2")]
    MinusHalfY,
}

impl PhysicalGate {
    pub const ALL: [PhysicalGate; 7] = [
        PhysicalGate::Identity,
        PhysicalGate::X,
        PhysicalGate::Y,
        PhysicalGate::HalfX,
        PhysicalGate::HalfY,
        PhysicalGate::MinusHalfX,
        PhysicalGate::MinusHalfY,
    ];

    /// The six pulsed gates, in the row order used for interleaved reports.
    pub const PULSED: [PhysicalGate; 6] = [
        PhysicalGate::X,
        PhysicalGate::Y,
        PhysicalGate::HalfX,
        PhysicalGate::HalfY,
        PhysicalGate::MinusHalfX,
        PhysicalGate::MinusHalfY,
    ];

    /// Rotation axis, `None` for the identity.
    pub fn axis(self) -> Option<Axis> {
        match self {
            PhysicalGate::Identity => None,
            PhysicalGate::X | PhysicalGate::HalfX | PhysicalGate::MinusHalfX => Some(Axis::X),
            PhysicalGate::Y | PhysicalGate::HalfY | PhysicalGate::MinusHalfY => Some(Axis::Y),
        }
    }

    /// Signed rotation angle in units of π.
    pub fn angle_in_pi(self) -> f64 {
        match self {
            PhysicalGate::Identity => 0.0,
            PhysicalGate::X | PhysicalGate::Y => 1.0,
            PhysicalGate::HalfX | PhysicalGate::HalfY => 0.5,
            PhysicalGate::MinusHalfX | PhysicalGate::MinusHalfY => -0.5,
        }
    }

    /// Drive phase and (unsigned) rotation angle of the pulse realising this
    /// gate. A negative rotation is a pulse with the drive phase advanced by π.
    pub fn pulse_parameters(self) -> Option<(f64, f64)> {
        let axis = self.axis()?;
        let base = match axis {
            Axis::X => 0.0,
            Axis::Y => PI / 2.0,
        };
        let angle = self.angle_in_pi();
        let phase = if angle < 0.0 { base + PI } else { base };
        Some((phase, angle.abs() * PI))
    }

    /// `exp(-i θ σ_axis / 2)`.
    pub fn unitary(self) -> Mat2 {
        match self.axis() {
            None => IDENTITY,
            Some(axis) => {
                let n = match axis {
                    Axis::X => [1.0, 0.0, 0.0],
                    Axis::Y => [0.0, 1.0, 0.0],
                };
                Mat2::su2_rotation(self.angle_in_pi() * PI, n)
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PhysicalGate::Identity => "I",
            PhysicalGate::X => "X",
            PhysicalGate::Y => "Y",
            PhysicalGate::HalfX => "X/2",
            PhysicalGate::HalfY => "Y/2",
            PhysicalGate::MinusHalfX => "-X/2",
            PhysicalGate::MinusHalfY => "-Y/2",
        }
    }

    pub fn from_label(label: &str) -> Option<PhysicalGate> {
        PhysicalGate::ALL.into_iter().find(|g| g.label() == label)
    }
}

impl fmt::Display for PhysicalGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// 1-based index into the Clifford table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CliffordIndex(u8);

impl CliffordIndex {
    pub const IDENTITY: CliffordIndex = CliffordIndex(1);

    pub fn new(index: u8) -> Option<Self> {
        (1..=24).contains(&index).then_some(CliffordIndex(index))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    fn slot(self) -> usize {
        usize::from(self.0 - 1)
    }

    fn from_slot(slot: usize) -> Self {
        CliffordIndex(slot as u8 + 1)
    }
}

impl fmt::Display for CliffordIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A 2×2 unitary with its global phase fixed: the first entry (row-major) with
/// modulus above [`PHASE_ZERO_THRESHOLD`] is real and non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalUnitary(Mat2);

impl CanonicalUnitary {
    pub fn new(u: Mat2) -> Self {
        CanonicalUnitary(canonicalize(&u))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn approx_eq(&self, other: &CanonicalUnitary) -> bool {
        self.0.max_abs_diff(&other.0) < UNITARY_TOLERANCE
    }
}

pub fn canonicalize(u: &Mat2) -> Mat2 {
    let pivot = u.0.iter().flatten().find(|z| z.norm() > PHASE_ZERO_THRESHOLD);
    match pivot {
        Some(z) => {
            let phase = z.conj() / z.norm();
            let mut out = u.scale(phase);
            // Pin the pivot exactly so repeated canonicalisation is a no-op.
            for entry in out.0.iter_mut().flatten() {
                if entry.norm() > PHASE_ZERO_THRESHOLD {
                    *entry = C64::new(entry.norm(), 0.0);
                    break;
                }
            }
            out
        }
        None => *u,
    }
}

#[derive(Debug, Clone)]
pub struct CliffordElement {
    pub index: CliffordIndex,
    pub decomposition: Vec<PhysicalGate>,
    pub unitary: CanonicalUnitary,
}

impl CliffordElement {
    /// Physical gates in this element, counting a bare identity as one.
    pub fn gate_count(&self) -> usize {
        self.decomposition.len()
    }
}

use PhysicalGate::{HalfX as X2, HalfY as Y2, MinusHalfX as MX2, MinusHalfY as MY2};

/// Decompositions of the 24 elements, in application order.
pub const CLIFFORD_TABLE: [&[PhysicalGate]; 24] = [
    &[PhysicalGate::Identity],
    &[Y2, X2],
    &[MX2, MY2],
    &[PhysicalGate::X],
    &[MY2, MX2],
    &[X2, MY2],
    &[PhysicalGate::Y],
    &[MY2, X2],
    &[X2, Y2],
    &[PhysicalGate::X, PhysicalGate::Y],
    &[Y2, MX2],
    &[MX2, Y2],
    &[Y2, PhysicalGate::X],
    &[MX2],
    &[X2, MY2, MX2],
    &[MY2],
    &[X2],
    &[X2, Y2, X2],
    &[MY2, PhysicalGate::X],
    &[X2, PhysicalGate::Y],
    &[X2, MY2, X2],
    &[Y2],
    &[MX2, PhysicalGate::Y],
    &[X2, Y2, MX2],
];

/// The σz eigenstates used as protocol targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Up,
    Down,
}

impl Target {
    pub fn ket(self) -> [C64; 2] {
        match self {
            Target::Up => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            Target::Down => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Target::Up => "up",
            Target::Down => "down",
        }
    }

    fn slot(self) -> usize {
        match self {
            Target::Up => 0,
            Target::Down => 1,
        }
    }
}

/// Product of the decomposition's gate unitaries, in application order.
pub fn decomposition_unitary(gates: &[PhysicalGate]) -> Mat2 {
    gates.iter().fold(IDENTITY, |acc, g| g.unitary() * acc)
}

/// Result of the exhaustive structural checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupCheck {
    pub distinct: bool,
    pub closed: bool,
    pub inverses: bool,
    pub mean_gate_count: f64,
}

impl GroupCheck {
    pub fn passed(&self) -> bool {
        self.distinct
            && self.closed
            && self.inverses
            && (self.mean_gate_count - MEAN_GATES_PER_CLIFFORD).abs() < 1e-12
    }
}

/// The built group with its multiplication and recovery tables. Immutable once
/// built.
#[derive(Debug, Clone)]
pub struct CliffordGroup {
    elements: Vec<CliffordElement>,
    // product[a][b] = slot of "apply a then b"
    product: [[u8; 24]; 24],
    // recovery[g][target] = lowest element c with (g then c)|↓⟩ ∝ target
    recovery: [[u8; 2]; 24],
    single_gate: [Option<CliffordIndex>; 7],
}

/// Build the group and verify distinctness and closure.
pub fn build_clifford_group() -> Result<CliffordGroup> {
    CliffordGroup::build()
}

impl CliffordGroup {
    pub fn build() -> Result<CliffordGroup> {
        let elements: Vec<CliffordElement> = CLIFFORD_TABLE
            .iter()
            .enumerate()
            .map(|(slot, gates)| CliffordElement {
                index: CliffordIndex::from_slot(slot),
                decomposition: gates.to_vec(),
                unitary: CanonicalUnitary::new(decomposition_unitary(gates)),
            })
            .collect();

        for (i, a) in elements.iter().enumerate() {
            if elements[i + 1..].iter().any(|b| a.unitary.approx_eq(&b.unitary)) {
                return Err(Error::GroupConsistency("two elements share a unitary"));
            }
        }

        let lookup = |u: &Mat2| -> Option<usize> {
            let cu = CanonicalUnitary::new(*u);
            elements.iter().position(|e| e.unitary.approx_eq(&cu))
        };

        let mut product = [[0u8; 24]; 24];
        for (a, ea) in elements.iter().enumerate() {
            for (b, eb) in elements.iter().enumerate() {
                let u = *eb.unitary.matrix() * *ea.unitary.matrix();
                let slot = lookup(&u).ok_or(Error::GroupConsistency("group is not closed"))?;
                product[a][b] = slot as u8;
            }
        }

        let maps_down_to = |slot: usize, target: Target| -> bool {
            let out = elements[slot].unitary.matrix().apply(Target::Down.ket());
            let t = target.ket();
            let overlap = t[0].conj() * out[0] + t[1].conj() * out[1];
            overlap.norm_sqr() > 1.0 - UNITARY_TOLERANCE
        };
        let mut recovery = [[0u8; 2]; 24];
        for (g, row) in recovery.iter_mut().enumerate() {
            for target in [Target::Up, Target::Down] {
                let c = (0..24)
                    .find(|&c| maps_down_to(usize::from(product[g][c]), target))
                    .ok_or(Error::GroupConsistency("no recovery element"))?;
                row[target.slot()] = c as u8;
            }
        }

        let mut single_gate = [None; 7];
        for (i, gate) in PhysicalGate::ALL.iter().enumerate() {
            single_gate[i] = elements
                .iter()
                .find(|e| e.decomposition.as_slice() == [*gate])
                .map(|e| e.index);
        }

        Ok(CliffordGroup { elements, product, recovery, single_gate })
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    pub fn element(&self, index: CliffordIndex) -> &CliffordElement {
        &self.elements[index.slot()]
    }

    pub fn indices(&self) -> impl Iterator<Item = CliffordIndex> + '_ {
        self.elements.iter().map(|e| e.index)
    }

    /// The element equal to "apply `a`, then `b`".
    pub fn compose(&self, a: CliffordIndex, b: CliffordIndex) -> CliffordIndex {
        CliffordIndex::from_slot(usize::from(self.product[a.slot()][b.slot()]))
    }

    /// Compose by unitary lookup rather than the cached table.
    pub fn compose_by_lookup(&self, a: CliffordIndex, b: CliffordIndex) -> Result<CliffordIndex> {
        let u = *self.element(b).unitary.matrix() * *self.element(a).unitary.matrix();
        self.lookup(&u).ok_or(Error::NoMatch)
    }

    pub fn lookup(&self, u: &Mat2) -> Option<CliffordIndex> {
        let cu = CanonicalUnitary::new(*u);
        self.elements.iter().find(|e| e.unitary.approx_eq(&cu)).map(|e| e.index)
    }

    pub fn inverse(&self, a: CliffordIndex) -> CliffordIndex {
        let slot = self.product[a.slot()]
            .iter()
            .position(|&s| s == 0)
            .expect("closure verified at build");
        CliffordIndex::from_slot(slot)
    }

    /// Net element of a sequence applied left to right.
    pub fn sequence_product(&self, sequence: &[CliffordIndex]) -> CliffordIndex {
        sequence.iter().fold(CliffordIndex::IDENTITY, |acc, &c| self.compose(acc, c))
    }

    /// Lowest-index element that, appended to `sequence`, sends `|↓⟩` to the
    /// target eigenstate up to global phase.
    pub fn recovery_gate(&self, sequence: &[CliffordIndex], target: Target) -> CliffordIndex {
        let net = self.sequence_product(sequence);
        self.recovery_for(net, target)
    }

    pub fn recovery_for(&self, net: CliffordIndex, target: Target) -> CliffordIndex {
        CliffordIndex::from_slot(usize::from(self.recovery[net.slot()][target.slot()]))
    }

    /// The element whose decomposition is exactly one physical gate.
    pub fn single_gate_element(&self, gate: PhysicalGate) -> Result<CliffordIndex> {
        let pos = PhysicalGate::ALL.iter().position(|g| *g == gate).unwrap_or(0);
        self.single_gate[pos].ok_or(Error::UnknownGate(gate.label()))
    }

    pub fn mean_gate_count(&self) -> f64 {
        let total: usize = self.elements.iter().map(CliffordElement::gate_count).sum();
        total as f64 / self.elements.len() as f64
    }

    /// Exhaustive 24×24 closure and inverse check by unitary lookup.
    pub fn check(&self) -> GroupCheck {
        let distinct = self
            .elements
            .iter()
            .enumerate()
            .all(|(i, a)| self.elements[i + 1..].iter().all(|b| !a.unitary.approx_eq(&b.unitary)));
        let mut closed = true;
        let mut inverses = true;
        for a in self.indices() {
            let mut has_inverse = false;
            for b in self.indices() {
                match self.compose_by_lookup(a, b) {
                    Ok(c) => has_inverse |= c == CliffordIndex::IDENTITY,
                    Err(_) => closed = false,
                }
            }
            inverses &= has_inverse;
        }
        GroupCheck { distinct, closed, inverses, mean_gate_count: self.mean_gate_count() }
    }
}
