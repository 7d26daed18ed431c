//! Finite partitions, gambles, events and assessments.
//!
//! Everything here is immutable once built. A [`Partition`] is cheap to clone
//! (the labels sit behind an `Arc`), so gambles carry their own copy and can be
//! shared freely across threads.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jensen::FunctionSpec;

/// Two stored reals closer than this are the same point of an image set.
pub const IMAGE_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq, Eq)]
pub struct Partition {
    atoms: Arc<[String]>,
}

impl Partition {
    pub fn new<I, S>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let atoms: Vec<String> = atoms.into_iter().map(Into::into).collect();
        if atoms.is_empty() {
            return Err(Error::EmptyPartition);
        }
        let mut seen = HashSet::new();
        for a in &atoms {
            if a.is_empty() || !seen.insert(a.as_str()) {
                return Err(Error::BadAtomLabel(a.clone()));
            }
        }
        Ok(Partition { atoms: atoms.into() })
    }

    /// Partition with labels `w1..wn`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| format!("w{i}")))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.atoms.iter()).finish()
    }
}

/// A bounded real-valued map on a finite partition.
#[derive(Clone, PartialEq)]
pub struct Gamble {
    partition: Partition,
    values: Vec<f64>,
}

impl fmt::Debug for Gamble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gamble{:?}", self.values)
    }
}

impl Gamble {
    pub fn new(partition: &Partition, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.len() {
            return Err(Error::DimensionMismatch {
                expected: partition.len(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Gamble {
            partition: partition.clone(),
            values,
        })
    }

    pub fn constant(partition: &Partition, c: f64) -> Result<Self> {
        Self::new(partition, vec![c; partition.len()])
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(inf, sup)` of the gamble.
    pub fn bounds(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn inf(&self) -> f64 {
        self.bounds().0
    }

    pub fn sup(&self) -> f64 {
        self.bounds().1
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// Distinct values, sorted, merged within [`IMAGE_TOL`].
    pub fn image(&self) -> Vec<f64> {
        image_of(self.values.iter().copied())
    }

    /// Expectation under a probability vector on the same partition.
    pub fn expectation(&self, p: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), self.values.len());
        self.values.iter().zip(p).map(|(x, q)| x * q).sum()
    }

    /// Pointwise map. Panics if `f` produces a non-finite value; use
    /// [`Gamble::try_map`] for fallible maps.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Gamble {
        self.try_map(f).expect("map produced a non-finite value")
    }

    pub fn try_map(&self, f: impl Fn(f64) -> f64) -> Result<Gamble> {
        Gamble::new(&self.partition, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Gamble, f: impl Fn(f64, f64) -> f64) -> Result<Gamble> {
        if self.partition != other.partition {
            return Err(Error::PartitionMismatch);
        }
        Gamble::new(
            &self.partition,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn neg(&self) -> Gamble {
        self.map(|v| -v)
    }

    pub fn shift(&self, c: f64) -> Gamble {
        self.map(|v| v + c)
    }

    pub fn scale(&self, c: f64) -> Gamble {
        self.map(|v| v * c)
    }

    /// Indicator of `(self <= c)`.
    pub fn indicator_le(&self, c: f64) -> Gamble {
        self.map(|v| if v <= c { 1.0 } else { 0.0 })
    }

    /// Indicator of `(self >= c)`.
    pub fn indicator_ge(&self, c: f64) -> Gamble {
        self.map(|v| if v >= c { 1.0 } else { 0.0 })
    }

    /// Indicator of `(self < c)`.
    pub fn indicator_lt(&self, c: f64) -> Gamble {
        self.map(|v| if v < c { 1.0 } else { 0.0 })
    }

    /// Indicator of `(self > c)`.
    pub fn indicator_gt(&self, c: f64) -> Gamble {
        self.map(|v| if v > c { 1.0 } else { 0.0 })
    }

    /// The conditional gamble `self | b`.
    pub fn restrict(&self, b: &Event) -> Result<ConditionalGamble> {
        if b.partition != self.partition {
            return Err(Error::PartitionMismatch);
        }
        if b.members.is_empty() {
            return Err(Error::EmptyConditioningEvent);
        }
        Ok(ConditionalGamble {
            base: self.clone(),
            condition: b.clone(),
        })
    }

    /// Nearest image points at or below / at or above `k`.
    pub fn hole_bracket(&self, k: f64) -> Result<HoleBracket> {
        let (lo, hi) = self.bounds();
        if !(k >= lo - IMAGE_TOL && k <= hi + IMAGE_TOL) {
            return Err(Error::OutOfRange { value: k, lo, hi });
        }
        let image = self.image();
        if let Some(&x) = image.iter().find(|&&x| (x - k).abs() <= IMAGE_TOL) {
            return Ok(HoleBracket {
                lower: x,
                upper: x,
                strict: false,
            });
        }
        let lower = image
            .iter()
            .copied()
            .filter(|&x| x <= k)
            .fold(f64::NEG_INFINITY, f64::max);
        let upper = image.iter().copied().filter(|&x| x >= k).fold(f64::INFINITY, f64::min);
        Ok(HoleBracket {
            lower,
            upper,
            strict: lower < upper,
        })
    }

    /// `f(self)`, checking that every value lies in the domain of `f`.
    pub fn apply(&self, f: &FunctionSpec) -> Result<Gamble> {
        let (lo, hi) = f.domain();
        if let Some(&value) = self.values.iter().find(|&&v| v < lo || v > hi) {
            return Err(Error::DomainMismatch { value, lo, hi });
        }
        self.try_map(|v| f.eval(v))
    }
}

pub(crate) fn image_of(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| (*a - *b).abs() <= IMAGE_TOL);
    v
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    partition: Partition,
    members: BTreeSet<usize>,
}

impl Event {
    pub fn new(partition: &Partition, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&i) = members.iter().find(|&&i| i >= partition.len()) {
            return Err(Error::AtomOutOfRange(i));
        }
        Ok(Event {
            partition: partition.clone(),
            members,
        })
    }

    pub fn sure(partition: &Partition) -> Self {
        Event {
            partition: partition.clone(),
            members: (0..partition.len()).collect(),
        }
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn indicator(&self) -> Gamble {
        let values = (0..self.partition.len())
            .map(|i| if self.members.contains(&i) { 1.0 } else { 0.0 })
            .collect();
        Gamble {
            partition: self.partition.clone(),
            values,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConditionalGamble {
    base: Gamble,
    condition: Event,
}

impl ConditionalGamble {
    pub fn base(&self) -> &Gamble {
        &self.base
    }

    pub fn condition(&self) -> &Event {
        &self.condition
    }

    /// Values on the conditioning atoms, in atom order.
    pub fn values(&self) -> Vec<f64> {
        self.condition.members.iter().map(|&i| self.base.values[i]).collect()
    }

    pub fn image(&self) -> Vec<f64> {
        image_of(self.values().into_iter())
    }
}

/// The pair `(l(k), u(k))` of image points surrounding `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoleBracket {
    pub lower: f64,
    pub upper: f64,
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub name: String,
    pub gamble: Gamble,
    pub lower: f64,
}

/// Encodes `upr(g) = upper` as a lower assessment on `-g`. Applying it twice
/// gives back the original entry.
pub fn conjugate_entry(name: &str, g: &Gamble, upper: f64) -> Entry {
    let name = match name.strip_prefix('-') {
        Some(rest) => rest.to_string(),
        None => format!("-{name}"),
    };
    Entry {
        name,
        gamble: g.neg(),
        lower: -upper,
    }
}

/// Lower previsions on a finite set of gambles over one partition.
#[derive(Clone, Debug, PartialEq)]
pub struct Assessment {
    partition: Partition,
    entries: Vec<Entry>,
}

impl Assessment {
    pub fn new(partition: &Partition) -> Self {
        Assessment {
            partition: partition.clone(),
            entries: Vec::new(),
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push_lower(&mut self, name: impl Into<String>, gamble: Gamble, lower: f64) -> Result<()> {
        self.push(Entry {
            name: name.into(),
            gamble,
            lower,
        })
    }

    /// Adds an upper assessment through its conjugate lower entry.
    pub fn push_upper(&mut self, name: &str, gamble: Gamble, upper: f64) -> Result<()> {
        let entry = conjugate_entry(name, &gamble, upper);
        self.push(entry)
    }

    pub fn push(&mut self, entry: Entry) -> Result<()> {
        if entry.gamble.partition != self.partition {
            return Err(Error::PartitionMismatch);
        }
        if !entry.lower.is_finite() {
            return Err(Error::NonFinite {
                index: self.entries.len(),
                value: entry.lower,
            });
        }
        if self.entries.iter().any(|e| e.name == entry.name) {
            return Err(Error::DuplicateName(entry.name));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn with_lower(mut self, name: impl Into<String>, gamble: Gamble, lower: f64) -> Result<Self> {
        self.push_lower(name, gamble, lower)?;
        Ok(self)
    }

    pub fn with_upper(mut self, name: &str, gamble: Gamble, upper: f64) -> Result<Self> {
        self.push_upper(name, gamble, upper)?;
        Ok(self)
    }

    pub fn entry(&self, name: &str) -> Result<&Entry> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    /// The gamble called `name`, also found through a conjugate `-name` entry
    /// made from an upper value.
    pub fn gamble(&self, name: &str) -> Result<Gamble> {
        if let Ok(e) = self.entry(name) {
            return Ok(e.gamble.clone());
        }
        self.entry(&format!("-{name}"))
            .map(|e| e.gamble.neg())
            .map_err(|_| Error::UnknownName(name.to_string()))
    }

    /// Registers `gamble` under `name` with the vacuous lower value `inf gamble`.
    pub fn with_gamble(self, name: impl Into<String>, gamble: Gamble) -> Result<Self> {
        let lower = gamble.inf();
        self.with_lower(name, gamble, lower)
    }

    /// Pins every atom probability: `P(ω_i) = p_i` as lower and upper.
    pub fn precise(partition: &Partition, p: &[f64]) -> Result<Self> {
        if p.len() != partition.len() {
            return Err(Error::DimensionMismatch {
                expected: partition.len(),
                got: p.len(),
            });
        }
        let mut a = Assessment::new(partition);
        for (i, &pi) in p.iter().enumerate() {
            let ind = Event::new(partition, [i])?.indicator();
            let name = format!("atom{i}");
            a.push_upper(&name, ind.clone(), pi)?;
            a.push_lower(name, ind, pi)?;
        }
        Ok(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jensen::FunctionSpec;

    fn three() -> Partition {
        Partition::numbered(3).unwrap()
    }

    fn x_three() -> Gamble {
        Gamble::new(&three(), vec![-1.0, 1.0, 2.0]).unwrap()
    }

    #[test]
    fn partition_rejects_duplicates_and_empty() {
        assert_eq!(Partition::new(Vec::<String>::new()), Err(Error::EmptyPartition));
        assert!(matches!(Partition::new(["a", "a"]), Err(Error::BadAtomLabel(_))));
        assert!(matches!(Partition::new(["a", ""]), Err(Error::BadAtomLabel(_))));
    }

    #[test]
    fn gamble_validates_length_and_finiteness() {
        assert!(matches!(
            Gamble::new(&three(), vec![1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
        assert!(matches!(
            Gamble::new(&three(), vec![1.0, f64::NAN, 2.0]),
            Err(Error::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn bounds_of_examples() {
        assert_eq!(x_three().bounds(), (-1.0, 2.0));
        assert_eq!(Gamble::constant(&three(), 4.5).unwrap().bounds(), (4.5, 4.5));
        let ind = Event::new(&three(), [1]).unwrap().indicator();
        assert_eq!(ind.values(), &[0.0, 1.0, 0.0]);
        assert_eq!(ind.bounds(), (0.0, 1.0));
    }

    #[test]
    fn restriction_image() {
        let b = Event::new(&three(), [1, 2]).unwrap();
        assert_eq!(x_three().restrict(&b).unwrap().image(), vec![1.0, 2.0]);
        let c = Gamble::constant(&three(), 5.0).unwrap();
        assert_eq!(c.restrict(&b).unwrap().image(), vec![5.0]);
        let empty = Event::new(&three(), []).unwrap();
        assert!(matches!(x_three().restrict(&empty), Err(Error::EmptyConditioningEvent)));
    }

    #[test]
    fn conjugate_entry_examples() {
        let e = conjugate_entry("X", &x_three(), 2.0);
        assert_eq!(e.name, "-X");
        assert_eq!(e.gamble.values(), &[1.0, -1.0, -2.0]);
        assert_eq!(e.lower, -2.0);
        let back = conjugate_entry(&e.name, &e.gamble, e.lower);
        assert_eq!(back.name, "X");
        assert_eq!(back.gamble, x_three());
        assert_eq!(back.lower, 2.0);

        let c = Gamble::constant(&three(), 3.0).unwrap();
        let e = conjugate_entry("c", &c, 3.0);
        assert_eq!(e.gamble.values(), &[-3.0; 3]);
        assert_eq!(e.lower, -3.0);
    }

    #[test]
    fn hole_bracket_examples() {
        let hb = x_three().hole_bracket(0.75).unwrap();
        assert_eq!(
            hb,
            HoleBracket {
                lower: -1.0,
                upper: 1.0,
                strict: true
            }
        );
        let hb = x_three().hole_bracket(1.0).unwrap();
        assert_eq!(
            hb,
            HoleBracket {
                lower: 1.0,
                upper: 1.0,
                strict: false
            }
        );
        assert!(matches!(x_three().hole_bracket(3.0), Err(Error::OutOfRange { .. })));
        // attained endpoints give a non-strict bracket
        assert!(!x_three().hole_bracket(-1.0).unwrap().strict);
        assert!(!x_three().hole_bracket(2.0).unwrap().strict);
    }

    #[test]
    fn hole_bracket_tolerates_rounding() {
        let hb = x_three().hole_bracket(1.0 + 1e-13).unwrap();
        assert!(!hb.strict);
        assert_eq!(hb.lower, 1.0);
    }

    #[test]
    fn apply_function_examples() {
        let sq = FunctionSpec::power(2, -10.0, 10.0).unwrap();
        assert_eq!(x_three().apply(&sq).unwrap().values(), &[1.0, 1.0, 4.0]);
        let id = FunctionSpec::identity(-10.0, 10.0);
        assert_eq!(x_three().apply(&id).unwrap(), x_three());
        let narrow = FunctionSpec::power(2, 0.0, 3.0).unwrap();
        assert!(matches!(x_three().apply(&narrow), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn assessment_rejects_duplicates_and_foreign_partitions() {
        let mut a = Assessment::new(&three());
        a.push_lower("X", x_three(), 0.75).unwrap();
        assert!(matches!(
            a.push_lower("X", x_three(), 0.5),
            Err(Error::DuplicateName(_))
        ));
        let other = Gamble::new(&Partition::numbered(2).unwrap(), vec![0.0, 1.0]).unwrap();
        assert_eq!(a.push_lower("Y", other, 0.5), Err(Error::PartitionMismatch));
        a.push_upper("X", x_three(), 2.0).unwrap();
        assert_eq!(a.entry("-X").unwrap().lower, -2.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn gamble_strategy() -> impl Strategy<Value = Gamble> {
            prop::collection::vec(-5i32..=5, 1..7).prop_map(|v| {
                let p = Partition::numbered(v.len()).unwrap();
                Gamble::new(&p, v.into_iter().map(|x| x as f64 * 0.5).collect()).unwrap()
            })
        }

        proptest! {
            #[test]
            fn bracket_surrounds_query(g in gamble_strategy(), t in 0.0f64..=1.0) {
                let (lo, hi) = g.bounds();
                let k = lo + t * (hi - lo);
                let hb = g.hole_bracket(k).unwrap();
                prop_assert!(hb.lower <= k + IMAGE_TOL && k <= hb.upper + IMAGE_TOL);
                let in_image = g.image().iter().any(|&x| (x - k).abs() <= IMAGE_TOL);
                prop_assert_eq!(!hb.strict, in_image);
            }

            #[test]
            fn conjugate_is_involution(g in gamble_strategy(), u in -10.0f64..10.0) {
                let once = conjugate_entry("Y", &g, u);
                let twice = conjugate_entry(&once.name, &once.gamble, once.lower);
                prop_assert_eq!(twice.name, "Y");
                prop_assert_eq!(twice.gamble, g);
                prop_assert_eq!(twice.lower, u);
            }

            #[test]
            fn apply_commutes_with_restriction(g in gamble_strategy(), mask in prop::collection::vec(any::<bool>(), 6)) {
                let members: Vec<usize> = (0..g.len()).filter(|&i| mask[i]).collect();
                prop_assume!(!members.is_empty());
                let b = Event::new(g.partition(), members).unwrap();
                let sq = FunctionSpec::power(2, -10.0, 10.0).unwrap();
                let lhs = g.apply(&sq).unwrap().restrict(&b).unwrap().values();
                let rhs: Vec<f64> = g.restrict(&b).unwrap().values().iter().map(|v| v * v).collect();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn squares_are_nonnegative(g in gamble_strategy()) {
                let sq = FunctionSpec::power(2, -10.0, 10.0).unwrap();
                prop_assert!(g.apply(&sq).unwrap().inf() >= 0.0);
            }
        }
    }
}
