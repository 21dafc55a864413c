pub mod arith;
pub mod cert;
pub mod checks;
pub mod chern;
pub mod dsl;
pub mod oracle;
pub mod ring;
pub mod selftest;
