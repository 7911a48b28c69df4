use std::ops::Range;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegisterKind {
    /// `count` digits, each in `Z_modulus`.
    Digits {
        modulus: u64,
        count: usize,
    },
    Qubit,
    /// An `bits`-bit string stored as one integer slot.
    Bits {
        bits: u32,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    #[serde(flatten)]
    pub kind: RegisterKind,
}

impl Register {
    fn width(&self) -> usize {
        match self.kind {
            RegisterKind::Digits { count, .. } => count,
            _ => 1,
        }
    }

    fn slot_modulus(&self) -> u64 {
        match self.kind {
            RegisterKind::Digits { modulus, .. } => modulus,
            RegisterKind::Qubit => 2,
            RegisterKind::Bits { bits } => 1u64 << bits,
        }
    }
}

/// Ordered registers. A basis label is a flat vector of slot values: one
/// slot per digit, qubit or bit string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    offsets: Vec<usize>,
    width: usize,
}

impl RegisterLayout {
    pub fn new(registers: Vec<Register>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(registers.len());
        let mut width = 0;
        for (i, r) in registers.iter().enumerate() {
            if registers[..i].iter().any(|o| o.name == r.name) {
                return Err(Error::Register(format!("duplicate register name {:?}", r.name)));
            }
            match r.kind {
                RegisterKind::Digits { modulus, count } if modulus < 2 || count == 0 => {
                    return Err(Error::Register(format!("register {:?} has empty digit space", r.name)));
                }
                RegisterKind::Bits { bits } if bits == 0 || bits > 62 => {
                    return Err(Error::Register(format!("register {:?} has unsupported width {bits}", r.name)));
                }
                _ => {}
            }
            offsets.push(width);
            width += r.width();
        }
        Ok(RegisterLayout { registers, offsets, width })
    }

    pub fn builder() -> LayoutBuilder {
        LayoutBuilder::default()
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    /// Number of slots in a label.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::Register(format!("no register named {name:?}")))
    }

    pub fn slots(&self, name: &str) -> Result<Range<usize>> {
        let i = self.index_of(name)?;
        Ok(self.offsets[i]..self.offsets[i] + self.registers[i].width())
    }

    /// First (or only) slot of a register.
    pub fn slot(&self, name: &str) -> Result<usize> {
        Ok(self.slots(name)?.start)
    }

    pub fn register_of_slot(&self, slot: usize) -> Result<&Register> {
        if slot >= self.width {
            return Err(Error::Register(format!("slot {slot} out of range")));
        }
        let i = self.offsets.partition_point(|&o| o <= slot) - 1;
        Ok(&self.registers[i])
    }

    pub fn slot_modulus(&self, slot: usize) -> Result<u64> {
        Ok(self.register_of_slot(slot)?.slot_modulus())
    }

    /// Size of the full label space.
    pub fn dimension(&self) -> BigInt {
        let mut d = BigInt::from(1);
        for r in &self.registers {
            d *= BigInt::from(r.slot_modulus()).pow(r.width() as u32);
        }
        d
    }

    pub fn zero_label(&self) -> Vec<u64> {
        vec![0; self.width]
    }

    pub fn check_label(&self, label: &[u64]) -> Result<()> {
        if label.len() != self.width {
            return Err(Error::Register(format!("label has {} slots, layout has {}", label.len(), self.width)));
        }
        for (s, &v) in label.iter().enumerate() {
            if v >= self.slot_modulus(s)? {
                return Err(Error::Register(format!("slot {s} value {v} out of range")));
            }
        }
        Ok(())
    }

    /// Layout of the named registers (in layout order) and the slot indices
    /// they occupy here.
    pub fn restrict(&self, names: &[&str]) -> Result<(RegisterLayout, Vec<usize>)> {
        for n in names {
            self.index_of(n)?;
        }
        let mut regs = Vec::new();
        let mut slots = Vec::new();
        for r in &self.registers {
            if names.contains(&r.name.as_str()) {
                regs.push(r.clone());
                slots.extend(self.slots(&r.name)?);
            }
        }
        Ok((RegisterLayout::new(regs)?, slots))
    }
}

#[derive(Default)]
pub struct LayoutBuilder {
    registers: Vec<Register>,
}

impl LayoutBuilder {
    pub fn digits(mut self, name: &str, modulus: u64, count: usize) -> Self {
        self.registers.push(Register { name: name.into(), kind: RegisterKind::Digits { modulus, count } });
        self
    }

    pub fn qubit(mut self, name: &str) -> Self {
        self.registers.push(Register { name: name.into(), kind: RegisterKind::Qubit });
        self
    }

    pub fn bits(mut self, name: &str, bits: u32) -> Self {
        self.registers.push(Register { name: name.into(), kind: RegisterKind::Bits { bits } });
        self
    }

    pub fn build(self) -> Result<RegisterLayout> {
        RegisterLayout::new(self.registers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_and_dimension() {
        let l = RegisterLayout::builder().digits("x", 6, 2).bits("v", 3).qubit("b").build().unwrap();
        assert_eq!(l.width(), 4);
        assert_eq!(l.slots("x").unwrap(), 0..2);
        assert_eq!(l.slot("b").unwrap(), 3);
        assert_eq!(l.slot_modulus(2).unwrap(), 8);
        assert_eq!(l.dimension(), BigInt::from(36 * 8 * 2));
        assert!(l.check_label(&[5, 5, 7, 1]).is_ok());
        assert!(l.check_label(&[6, 0, 0, 0]).is_err());
        let (sub, slots) = l.restrict(&["b", "x"]).unwrap();
        assert_eq!(sub.width(), 3);
        assert_eq!(slots, vec![0, 1, 3]);
    }

    #[test]
    fn rejects_duplicates() {
        assert!(RegisterLayout::builder().qubit("a").qubit("a").build().is_err());
        assert!(RegisterLayout::builder().digits("x", 1, 2).build().is_err());
    }
}
