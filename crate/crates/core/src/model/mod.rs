//! Networks, route values and the policy expression language.

pub mod eval;
pub mod expr;
pub mod gen;
pub mod network;
pub mod sort;
pub mod typecheck;
pub mod value;

pub use eval::{eval, eval_bool, EvalError, ValueEnv};
pub use expr::Expr;
pub use network::{
    check_merge_laws, validate_network, Diagnostic, NetworkInstance, SymbolicVar, Topology,
};
pub use sort::Sort;
pub use typecheck::{sort_check, SortEnv, TypeError};
pub use value::Value;
