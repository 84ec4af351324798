pub mod cli;
pub mod coverage;
pub mod detect;
pub mod envelope;
pub mod gsn;
pub mod pipeline;
pub(crate) mod kv;
pub mod trajectory;

/// How data-parallel stages run. Both modes produce identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}
