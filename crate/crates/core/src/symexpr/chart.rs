use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use super::poly::Name;
use crate::error::{Error, Result};

pub const MAX_DIM: usize = 8;

/// A coordinate chart. The declared coordinate order is the orientation:
/// `dx_1 ∧ … ∧ dx_n` is the positive volume form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chart {
    name: Name,
    coords: Arc<[Name]>,
}

impl Chart {
    pub fn new(name: &str, coords: &[&str]) -> Result<Arc<Chart>> {
        let names: Vec<Name> = coords.iter().map(|c| Name::from(*c)).collect();
        Chart::from_names(Name::from(name), names)
    }

    pub fn from_names(name: Name, coords: Vec<Name>) -> Result<Arc<Chart>> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::Invalid(format!(
                "chart `{name}` must have 1..={MAX_DIM} coordinates, got {}",
                coords.len()
            )));
        }
        let mut seen = HashSet::new();
        for c in &coords {
            if !seen.insert(c.clone()) {
                return Err(Error::Invalid(format!("duplicate coordinate `{c}` in chart `{name}`")));
            }
        }
        Ok(Arc::new(Chart { name, coords: coords.into() }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &Arc<[Name]> {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &Name {
        &self.coords[i]
    }

    pub fn index_of(&self, v: &str) -> Result<usize> {
        self.coords
            .iter()
            .position(|c| &**c == v)
            .ok_or_else(|| Error::UnknownCoordinate(format!("{v} (chart {})", self.name)))
    }

    pub fn same_as(&self, other: &Chart) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ChartMismatch(self.name.to_string(), other.name.to_string()))
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
