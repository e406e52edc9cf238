//! The four drug-trial count tables used throughout the tests, CLI fixtures
//! and benchmarks.
//!
//! Variables use the labels `Drug: No/Yes`, `Recovered: No/Yes`,
//! `Sex: Female/Male` and `Age: 40+/<40`.

use crate::tables::{ContingencyTable, Variable};

fn var(name: &str, states: [&str; 2]) -> Variable {
    Variable::new(name, states).expect("fixture variable")
}

fn drug() -> Variable {
    var("Drug", ["No", "Yes"])
}

fn recovered() -> Variable {
    var("Recovered", ["No", "Yes"])
}

fn sex() -> Variable {
    var("Sex", ["Female", "Male"])
}

fn age() -> Variable {
    var("Age", ["40+", "<40"])
}

fn build(variables: Vec<Variable>, cells: &[(&[&str], u64)]) -> ContingencyTable {
    ContingencyTable::from_cells(variables, cells).expect("fixture table")
}

/// Pooled drug trial: 40% recovery on placebo, 50% on the drug.
pub fn table3() -> ContingencyTable {
    build(
        vec![drug(), recovered()],
        &[
            (&["No", "No"], 240),
            (&["No", "Yes"], 160),
            (&["Yes", "No"], 200),
            (&["Yes", "Yes"], 200),
        ],
    )
}

/// The same trial split by sex; the drug is worse for both sexes.
pub fn table4() -> ContingencyTable {
    build(
        vec![sex(), drug(), recovered()],
        &[
            (&["Female", "No", "No"], 210),
            (&["Female", "No", "Yes"], 90),
            (&["Female", "Yes", "No"], 80),
            (&["Female", "Yes", "Yes"], 20),
            (&["Male", "No", "No"], 30),
            (&["Male", "No", "Yes"], 70),
            (&["Male", "Yes", "No"], 120),
            (&["Male", "Yes", "Yes"], 180),
        ],
    )
}

/// A balanced second trial: four groups of 200, drug better overall and for
/// both sexes.
pub fn table5() -> ContingencyTable {
    build(
        vec![sex(), drug(), recovered()],
        &[
            (&["Female", "No", "No"], 108),
            (&["Female", "No", "Yes"], 92),
            (&["Female", "Yes", "No"], 92),
            (&["Female", "Yes", "Yes"], 108),
            (&["Male", "No", "No"], 84),
            (&["Male", "No", "Yes"], 116),
            (&["Male", "Yes", "No"], 56),
            (&["Male", "Yes", "Yes"], 144),
        ],
    )
}

/// The balanced trial further split by age; the drug is worse in all four
/// age-by-sex groups.
pub fn table6() -> ContingencyTable {
    build(
        vec![age(), sex(), drug(), recovered()],
        &[
            (&["40+", "Female", "No", "No"], 96),
            (&["40+", "Female", "No", "Yes"], 64),
            (&["40+", "Female", "Yes", "No"], 28),
            (&["40+", "Female", "Yes", "Yes"], 12),
            (&["40+", "Male", "No", "No"], 80),
            (&["40+", "Male", "No", "Yes"], 80),
            (&["40+", "Male", "Yes", "No"], 24),
            (&["40+", "Male", "Yes", "Yes"], 16),
            (&["<40", "Female", "No", "No"], 12),
            (&["<40", "Female", "No", "Yes"], 28),
            (&["<40", "Female", "Yes", "No"], 64),
            (&["<40", "Female", "Yes", "Yes"], 96),
            (&["<40", "Male", "No", "No"], 4),
            (&["<40", "Male", "No", "Yes"], 36),
            (&["<40", "Male", "Yes", "No"], 32),
            (&["<40", "Male", "Yes", "Yes"], 128),
        ],
    )
}
