pub mod formula;
pub mod kripke;
pub mod theories;
pub mod potentialist;
pub mod control;
pub mod synthesis;
pub mod settheory;
pub mod artificial;
