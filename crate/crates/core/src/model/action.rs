use std::fmt;

use super::ModelError;

/// One-based arm identifier.
///
/// Action indices run over `1..=K` where `K` is the environment's action
/// count; the zero-based view is available for slice addressing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(usize);

impl ActionId {
    /// Builds an action from its one-based index.
    pub fn new(index: usize) -> Result<Self, ModelError> {
        if index == 0 {
            return Err(ModelError::InvalidAction { index, count: 0 });
        }
        Ok(Self(index))
    }

    /// Builds an action from a zero-based slice position.
    pub fn from_zero_based(position: usize) -> Self {
        Self(position + 1)
    }

    /// One-based index.
    pub fn get(self) -> usize {
        self.0
    }

    /// Zero-based slice position.
    pub fn zero_based(self) -> usize {
        self.0 - 1
    }

    /// Iterates all actions of a `K`-armed problem in index order.
    pub fn all(count: usize) -> impl Iterator<Item = ActionId> {
        (1..=count).map(ActionId)
    }

    /// Checks the index against an environment's action count.
    pub fn validate(self, count: usize) -> Result<Self, ModelError> {
        if self.0 > count {
            Err(ModelError::InvalidAction {
                index: self.0,
                count,
            })
        } else {
            Ok(self)
        }
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
