//! Analogical explanation of observed behavior.
//!
//! * [`kr`]: micro-theory language, predicate categories, expression graphs.
//! * [`sme`]: structure mapping between a base and a target experience.
//! * [`synthesis`]: iterative blending of partial analogies over a library.
//! * [`report`]: serializable result views and DOT output.

pub mod kr;
pub mod report;
pub mod sme;
pub mod synthesis;
