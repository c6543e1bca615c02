/// Enumeration caps and the execution strategy.
///
/// Every brute-force enumeration in the crate is guarded by one of these
/// caps. Exceeding a cap is reported as [`crate::Error::Cap`], never as a
/// silently truncated result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    /// Largest number of domain atoms of a first-order predicate that may
    /// appear as an argument of a second-order predicate (so that argument
    /// values are enumerable as bitmasks). Hard ceiling 63.
    pub max_so_arg_atoms: usize,
    /// Largest carrier materialized for a single predicate value.
    pub max_carrier: usize,
    /// Largest number of exact completions explored by one supervaluation,
    /// ultimate approximation or model enumeration.
    pub max_completions: usize,
    /// Largest number of defined domain atoms for the `3^n` partial stable
    /// enumeration.
    pub max_defined_atoms: usize,
    /// Largest `|T| + |U|` for the subset checks of prudence and braveness.
    pub max_subset_atoms: usize,
    /// Largest number of unknown elements in one aggregate set.
    pub max_aggregate_unknowns: usize,
    /// Use the rayon-backed parallel enumerators when compiled in.
    pub parallel: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_so_arg_atoms: 9,
            max_carrier: 1 << 16,
            max_completions: 1 << 20,
            max_defined_atoms: 12,
            max_subset_atoms: 16,
            max_aggregate_unknowns: 20,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

impl Config {
    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }
}
