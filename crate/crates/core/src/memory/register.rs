//! Temporal-mode register: absorption into and recall from memory slots.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{MixedFockState, ModeKind};
use crate::scalar::Real;

use super::spec::{multimode_capacity, MemorySpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemorySlot<T> {
    pub index: usize,
    /// Path label of the memory modes holding the excitation.
    pub memory_path: String,
    /// Optical path the photon arrived on.
    pub source_path: String,
    pub absorbed_at_ns: T,
}

/// Which efficiency governs recall.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecallEfficiency {
    /// Memory alone.
    #[default]
    Intrinsic,
    /// Including optical losses to the detector.
    EndToEnd,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TemporalModeRegister<T> {
    name: String,
    spec: MemorySpec<T>,
    slot_spacing_ns: T,
    slots: Vec<Option<MemorySlot<T>>>,
}

impl<T: Real> TemporalModeRegister<T> {
    /// One slot per pump pulse that fits within the storage time.
    pub fn new(name: &str, spec: MemorySpec<T>, repetition_rate_hz: T) -> Result<Self> {
        spec.validate()?;
        let cap = multimode_capacity(&spec, repetition_rate_hz).repetition_limited;
        Self::with_capacity(name, spec, repetition_rate_hz, cap)
    }

    pub fn with_capacity(name: &str, spec: MemorySpec<T>, repetition_rate_hz: T, capacity: usize) -> Result<Self> {
        spec.validate()?;
        if capacity == 0 {
            return Err(Error::OutOfRange {
                name: "capacity",
                reason: "register needs at least one slot".into(),
            });
        }
        Ok(Self {
            name: name.to_string(),
            spec,
            slot_spacing_ns: T::lit(1e9) / repetition_rate_hz,
            slots: vec![None; capacity],
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> &MemorySpec<T> {
        &self.spec
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_spacing_ns(&self) -> T {
        self.slot_spacing_ns
    }

    pub fn slot(&self, index: usize) -> Result<Option<&MemorySlot<T>>> {
        self.slots
            .get(index)
            .map(Option::as_ref)
            .ok_or(Error::SlotOutOfRange { slot: index, capacity: self.slots.len() })
    }

    pub fn occupied(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn first_free(&self) -> Option<usize> {
        self.slots.iter().position(Option::is_none)
    }

    pub fn memory_path(&self, index: usize) -> String {
        format!("{}-{}", self.name, index)
    }

    /// Marks slot `index` as holding an excitation from `source_path`.
    pub fn reserve(&mut self, index: usize, source_path: &str, time_ns: T) -> Result<&MemorySlot<T>> {
        if self.slot(index)?.is_some() {
            return Err(Error::SlotOccupied(index));
        }
        let memory_path = self.memory_path(index);
        Ok(self.slots[index].insert(MemorySlot {
            index,
            memory_path,
            source_path: source_path.to_string(),
            absorbed_at_ns: time_ns,
        }))
    }

    /// Frees slot `index`, returning what it held.
    pub fn release(&mut self, index: usize) -> Result<MemorySlot<T>> {
        self.slot(index)?;
        self.slots[index].take().ok_or(Error::SlotEmpty(index))
    }

    /// Maps the optical modes of `path` onto the memory modes of slot `index`.
    /// With absorption probability below one, the unabsorbed part is lost.
    pub fn absorb(&mut self, state: &MixedFockState<T>, path: &str, index: usize, time_ns: T) -> Result<MixedFockState<T>> {
        if self.slot(index)?.is_some() {
            return Err(Error::SlotOccupied(index));
        }
        let mut s = state.clone();
        if self.spec.absorption_probability < T::one() {
            s = s.loss(path, self.spec.absorption_probability)?;
        }
        let s = s.relabel_path(path, ModeKind::Optical, &self.memory_path(index), ModeKind::Memory)?;
        self.reserve(index, path, time_ns)?;
        Ok(s)
    }

    /// Re-emits slot `index` onto optical path `out_path` after `storage_ns`,
    /// applying the recall efficiency at that storage time, and frees the slot.
    pub fn retrieve(
        &mut self,
        state: &MixedFockState<T>,
        index: usize,
        storage_ns: T,
        out_path: &str,
        efficiency: RecallEfficiency,
    ) -> Result<MixedFockState<T>> {
        let slot = self.slot(index)?.cloned().ok_or(Error::SlotEmpty(index))?;
        let eta = match efficiency {
            RecallEfficiency::Intrinsic => self.spec.efficiency_at(storage_ns)?,
            RecallEfficiency::EndToEnd => self.spec.end_to_end_at(storage_ns)?,
        };
        let t = (eta / self.spec.absorption_probability).min(T::one());
        let s = state.relabel_path(&slot.memory_path, ModeKind::Memory, out_path, ModeKind::Optical)?;
        let s = if t < T::one() { s.loss(out_path, t)? } else { s };
        self.release(index)?;
        Ok(s)
    }

    pub fn clear(&mut self) {
        self.slots.iter_mut().for_each(|s| *s = None);
    }
}
