//! Pieces shared by every bound report: direction, target quantity, and the
//! [`Bound`] trait the oracle certifies against.

use serde::{Deserialize, Serialize};

use crate::gamble::Gamble;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// The bounded quantity is at most the bound.
    #[serde(rename = "<=")]
    AtMost,
    /// The bounded quantity is at least the bound.
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Lower prevision.
    Lower,
    /// Upper prevision.
    Upper,
    /// A generic measure satisfying monotonicity, translation invariance and
    /// positive homogeneity.
    Measure,
    /// The conjugate of [`Quantity::Measure`].
    ConjugateMeasure,
    /// A dF-coherent (linear) prevision.
    Precise,
}

impl Quantity {
    fn prefix(self) -> &'static str {
        match self {
            Quantity::Lower => "lpr",
            Quantity::Upper => "upr",
            Quantity::Measure => "mu",
            Quantity::ConjugateMeasure => "conj-mu",
            Quantity::Precise => "P",
        }
    }
}

/// What a bound is about: `quantity(of)`. When `values` is present the target
/// gamble is known atom by atom and the bound can be certified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub quantity: Quantity,
    pub of: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl Target {
    pub fn new(quantity: Quantity, of: impl Into<String>) -> Self {
        Target {
            quantity,
            of: of.into(),
            values: None,
        }
    }

    pub fn describe(&self) -> String {
        format!("{}({})", self.quantity.prefix(), self.of)
    }

    pub fn with_values(mut self, g: &Gamble) -> Self {
        self.values = Some(g.values().to_vec());
        self
    }
}

/// Anything that states `target (<= | >=) bound`.
pub trait Bound {
    fn target(&self) -> &Target;
    fn direction(&self) -> Direction;
    /// `None` when the inequality did not apply.
    fn bound(&self) -> Option<f64>;
    fn rule(&self) -> String;
}
