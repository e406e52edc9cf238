//! Building blocks for studying Simpson's-paradox reversals in categorical
//! trial data.
//!
//! * [`tables`] holds n-way contingency tables, stratified risk differences,
//!   reversal detection and the confounder subset scan.
//! * [`paradox_bn`] builds the hidden-confounder network family
//!   `X1..Xn -> Recovered <- Drug <- Xn` and evaluates it exactly.
//! * [`trial_sim`] forward-samples synthetic trials from that network.
//! * [`rct_design`] does the factorial control-group arithmetic.
//! * [`golden`] carries the classic drug-trial count tables used as fixtures.

pub mod csv_io;
pub mod error;
pub mod golden;
pub mod paradox_bn;
pub mod rct_design;
pub mod tables;
pub mod trial_sim;

pub use error::{Error, Result};
pub use paradox_bn::{
    build_npt, case1_recovery, case2_recovery, certify_reversal, exact_joint, JointDistribution,
    MaterializedNpt, ParadoxBnSpec, ReversalCertificate,
};
pub use rct_design::{allocate, group_count, subjects_required, DesignPlan, DesignSpec, Factor};
pub use tables::{
    association, detect_reversal, from_records, marginalize, scan_confounders, weighted_average,
    AssociationSummary, ContingencyTable, Outcome, ScanHit, StratifiedAssociation, Treatment,
    Variable,
};
pub use trial_sim::{sample, to_table, TrialDataset, TrialRecord};
