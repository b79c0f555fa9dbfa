//! Advance reservations of a limited resource over slotted time.
//!
//! A [`Tree`] covers a fixed universe of `n` slots whose shape is given by a
//! list of per-level branching factors. It supports adding and removing
//! reservations (a bandwidth held over a half-open slot interval), asking
//! for the largest total reservation over an interval, and capacity-checked
//! admission, each in time proportional to the tree height.
//!
//! ```
//! use advseg_core::{Interval, Reservation, Tree, TreeConfig};
//!
//! let mut tree = Tree::new(TreeConfig::new(300, vec![2, 3, 2], 0)?)?;
//! tree.insert(&Reservation::from_slots(2, 9, 40)?)?;
//! tree.insert(&Reservation::from_slots(5, 12, 25)?)?;
//! assert_eq!(tree.max_reserved(Interval::new(0, 6)?)?, 65);
//! assert_eq!(tree.max_reserved(Interval::new(9, 12)?)?, 25);
//! # Ok::<(), advseg_core::Error>(())
//! ```
//!
//! The [`finger`] module restarts queries from inside the tree, [`window`]
//! maps unbounded absolute time onto a fixed tree, and [`harness`] holds the
//! brute-force oracle used to test all of the above.

pub mod config;
pub mod error;
pub mod finger;
pub mod harness;
pub mod layout;
pub mod tree;
pub mod window;

pub use config::{Bandwidth, Interval, Preset, Reservation, Slot, TreeConfig};
pub use error::{Error, Result};
pub use finger::{query_with_finger, Finger, PathEntry};
pub use layout::{level_table, LevelTable};
pub use tree::{build, Admission, AuditViolation, NodeRecord, Tree};
pub use window::WrappingWindow;
