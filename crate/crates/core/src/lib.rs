//! Bounds for imprecise previsions: consistency checks, natural extension,
//! Jensen-type inequalities and tail bounds, with an LP oracle to certify
//! them.

pub mod consistency;
pub mod error;
pub mod gamble;
pub mod jensen;
pub mod lp;
pub mod oracle;
pub mod report;
pub mod tailbounds;

pub use error::{Error, Result};
pub use gamble::{Assessment, Entry, Event, Gamble, Partition};
pub use report::{Bound, Direction, Quantity, Target};
