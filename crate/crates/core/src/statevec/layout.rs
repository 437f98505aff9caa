use serde::Serialize;

use super::StateError;

pub const MAX_LABEL_BITS: usize = 128;

/// Ordered named registers packed into one `u128` label.
///
/// The first register occupies the most significant bits, so sorting labels
/// numerically sorts them lexicographically register by register.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegisterLayout {
    regs: Vec<(String, usize)>,
    total: usize,
}

impl RegisterLayout {
    pub fn new<S: AsRef<str>>(regs: &[(S, usize)]) -> Result<Self, StateError> {
        let mut layout = Self { regs: Vec::new(), total: 0 };
        for (name, width) in regs {
            layout = layout.push(name.as_ref(), *width)?;
        }
        Ok(layout)
    }

    pub fn empty() -> Self {
        Self { regs: Vec::new(), total: 0 }
    }

    /// Layout with one more register appended at the least significant end.
    pub fn push(&self, name: &str, width: usize) -> Result<Self, StateError> {
        if width == 0 {
            return Err(StateError::ZeroWidth(name.to_string()));
        }
        if self.index(name).is_some() {
            return Err(StateError::DuplicateRegister(name.to_string()));
        }
        if self.total + width > MAX_LABEL_BITS {
            return Err(StateError::LayoutTooWide(self.total + width));
        }
        let mut regs = self.regs.clone();
        regs.push((name.to_string(), width));
        Ok(Self { regs, total: self.total + width })
    }

    /// Concatenation; `other`'s registers become the low bits.
    pub fn concat(&self, other: &Self) -> Result<Self, StateError> {
        let mut out = self.clone();
        for (name, width) in &other.regs {
            out = out.push(name, *width)?;
        }
        Ok(out)
    }

    pub fn total_width(&self) -> usize {
        self.total
    }

    pub fn registers(&self) -> &[(String, usize)] {
        &self.regs
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.regs.iter().map(|(n, _)| n.as_str())
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.regs.iter().position(|(n, _)| n == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index(name).is_some()
    }

    pub fn width(&self, name: &str) -> Result<usize, StateError> {
        self.index(name)
            .map(|i| self.regs[i].1)
            .ok_or_else(|| StateError::UnknownRegister(name.to_string()))
    }

    /// Shift of the register's least significant bit within a label.
    pub fn shift(&self, name: &str) -> Result<usize, StateError> {
        let i = self.index(name).ok_or_else(|| StateError::UnknownRegister(name.to_string()))?;
        let after: usize = self.regs[i + 1..].iter().map(|(_, w)| w).sum();
        Ok(after)
    }

    /// Field accessor for one register.
    pub fn field(&self, name: &str) -> Result<Field, StateError> {
        Ok(Field { shift: self.shift(name)?, width: self.width(name)? })
    }

    /// Label built from per-register values, in layout order.
    pub fn pack(&self, values: &[u128]) -> Result<u128, StateError> {
        if values.len() != self.regs.len() {
            return Err(StateError::ArityMismatch { expected: self.regs.len(), got: values.len() });
        }
        let mut label = 0u128;
        for ((name, width), &v) in self.regs.iter().zip(values) {
            if v & !mask(*width) != 0 {
                return Err(StateError::ValueTooWide { register: name.clone(), width: *width });
            }
            label = shl(label, *width) | v;
        }
        Ok(label)
    }

    pub fn unpack(&self, label: u128) -> Vec<u128> {
        let mut shift = self.total;
        self.regs
            .iter()
            .map(|(_, w)| {
                shift -= w;
                (label >> shift) & mask(*w)
            })
            .collect()
    }

    /// `label` rendered as register bit strings joined by `|`.
    pub fn render(&self, label: u128) -> String {
        self.regs
            .iter()
            .zip(self.unpack(label))
            .map(|((_, w), v)| format!("{:0width$b}", v, width = *w))
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// Position of one register inside a packed label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Field {
    pub shift: usize,
    pub width: usize,
}

impl Field {
    pub fn get(&self, label: u128) -> u128 {
        (label >> self.shift) & mask(self.width)
    }

    pub fn set(&self, label: u128, value: u128) -> u128 {
        let m = mask(self.width) << self.shift;
        (label & !m) | ((value & mask(self.width)) << self.shift)
    }

    pub fn mask(&self) -> u128 {
        mask(self.width) << self.shift
    }
}

pub(crate) fn mask(width: usize) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

pub(crate) fn shl(x: u128, by: usize) -> u128 {
    if by >= 128 {
        0
    } else {
        x << by
    }
}
