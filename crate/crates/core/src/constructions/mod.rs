//! Finite-scale realizations of the constructions: coset codings, the
//! trivial-stabilizer coloring, the distinguishing step with its CSP, the
//! splitting schedules, free-image colorings and the witness pipeline.
//!
//! Every containment a construction relies on is re-checked and recorded as
//! an [`Audit`]; nothing is taken on trust.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub mod bounds;
pub mod pipeline;
pub mod schedule;
pub mod stabilizers;
pub mod step;

pub use bounds::{bound_report, exact_threshold_base_case, BoundReport};
pub use pipeline::{
    find_witnesses, witness_pipeline, DistinguishingWitness, PipelineOptions, PipelineReport, Witnesses,
};
pub use schedule::{
    approx_local_rule, free_image_coloring, schedule_sets, stage_sft, ApproxReport, Certificate, FreeImageOptions,
    FreeImageReport, Schedule, ScheduleEntry, ScheduleKind, ScheduleOptions,
};
pub use stabilizers::{
    compute_h, q_map, rule_stab, trivial_stab_coloring, verify_coset_coding, CosetCodingReport, StabScope, StabSet,
    TrivialStabReport,
};
pub use step::{
    e_set, probability_audit, step_csp, step_sets, ESet, ProbabilityAudit, StepCsp, StepExponents, StepInput,
    StepPartition, StepSets,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditStatus {
    Pass,
    Fail,
}

/// One asserted property with the evidence behind its verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub name: String,
    pub status: AuditStatus,
    pub tag: String,
    pub witness: Value,
}

impl Audit {
    pub fn passed(&self) -> bool {
        self.status == AuditStatus::Pass
    }
}

/// Collects audits under a common tag.
#[derive(Clone, Debug, Default)]
pub struct AuditLog {
    tag: String,
    items: Vec<Audit>,
}

impl AuditLog {
    pub fn new(tag: &str) -> Self {
        AuditLog { tag: tag.to_string(), items: Vec::new() }
    }

    pub fn record(&mut self, name: impl Into<String>, ok: bool, witness: Value) -> bool {
        self.items.push(Audit {
            name: name.into(),
            status: if ok { AuditStatus::Pass } else { AuditStatus::Fail },
            tag: self.tag.clone(),
            witness,
        });
        ok
    }

    pub fn extend(&mut self, other: Vec<Audit>) {
        self.items.extend(other);
    }

    pub fn all_pass(&self) -> bool {
        self.items.iter().all(Audit::passed)
    }

    pub fn into_vec(self) -> Vec<Audit> {
        self.items
    }
}

pub fn all_pass(audits: &[Audit]) -> bool {
    audits.iter().all(Audit::passed)
}
