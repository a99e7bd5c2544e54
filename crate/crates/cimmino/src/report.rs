//! Machine-readable JSON reports for the CLI.
//!
//! Key order is fixed by struct declaration order so reports diff cleanly as
//! golden files. Identical inputs produce byte-identical reports; wall-clock
//! timings are only filled in when explicitly requested (`timings` is null
//! otherwise) to keep that property by default.

use crate::augment::{AugmentMode, AugmentedSystem};
use crate::graph::{BlockPartition, BlockStructure, DiagBlockKind, LevelStructure, NodeKind};
use crate::solver::{SolveReport, Timings};
use crate::sparse::Permutation;
use crate::verify::{ConjectureProbe, SuiteResult};
use serde::Serialize;

#[derive(Serialize)]
struct SolveReportJson<'a> {
    mode: &'a str,
    m: usize,
    n: usize,
    p: usize,
    q: usize,
    #[serde(rename = "residualNorm")]
    residual_norm: f64,
    #[serde(rename = "normalResidual")]
    normal_residual: Option<f64>,
    #[serde(rename = "yNorm")]
    y_norm: f64,
    #[serde(rename = "orthogonalityError")]
    orthogonality_error: f64,
    #[serde(rename = "sConditionEstimate")]
    s_condition_estimate: f64,
    timings: Option<&'a Timings>,
    x: &'a [f64],
    r: Option<&'a [f64]>,
    warnings: &'a [String],
}

pub fn solve_report_json(report: &SolveReport, with_timings: bool) -> String {
    let json = SolveReportJson {
        mode: &report.mode,
        m: report.m,
        n: report.n,
        p: report.p,
        q: report.q,
        residual_norm: report.residual_norm,
        normal_residual: report.normal_residual,
        y_norm: report.y_norm,
        orthogonality_error: report.orthogonality_error,
        s_condition_estimate: report.s_condition,
        timings: with_timings.then_some(&report.timings),
        x: &report.x,
        r: report.residual.as_deref(),
        warnings: &report.warnings,
    };
    serde_json::to_string_pretty(&json).expect("report serializes")
}

#[derive(Serialize)]
struct ReorderReportJson {
    mode: &'static str,
    m: usize,
    n: usize,
    levels: usize,
    #[serde(rename = "levelSizes")]
    level_sizes: Vec<usize>,
    #[serde(rename = "levelKinds")]
    level_kinds: Vec<&'static str>,
    structure: &'static str,
    #[serde(rename = "rowPerm")]
    row_perm: Vec<usize>,
    #[serde(rename = "colPerm")]
    col_perm: Vec<usize>,
    #[serde(rename = "rowBlockBounds")]
    row_block_bounds: Vec<usize>,
    #[serde(rename = "colBlockBounds")]
    col_block_bounds: Vec<usize>,
    #[serde(rename = "diagBlocks", skip_serializing_if = "Option::is_none")]
    diag_blocks: Option<Vec<&'static str>>,
}

pub fn reorder_report_json(
    mode: &'static str,
    m: usize,
    n: usize,
    levels: &LevelStructure,
    row_perm: &Permutation,
    col_perm: &Permutation,
    blocks: &BlockPartition,
) -> String {
    let json = ReorderReportJson {
        mode,
        m,
        n,
        levels: levels.levels.len(),
        level_sizes: levels.sizes(),
        level_kinds: levels
            .levels
            .iter()
            .map(|l| match l.kind {
                NodeKind::Row => "row",
                NodeKind::Col => "column",
            })
            .collect(),
        structure: match blocks.structure {
            BlockStructure::Bidiagonal => "bidiagonal",
            BlockStructure::Tridiagonal => "tridiagonal",
        },
        row_perm: row_perm.forward().to_vec(),
        col_perm: col_perm.forward().to_vec(),
        row_block_bounds: blocks.row_bounds.clone(),
        col_block_bounds: blocks.col_bounds.clone(),
        diag_blocks: (blocks.structure == BlockStructure::Tridiagonal).then(|| {
            blocks
                .diag_kinds
                .iter()
                .map(|k| match k {
                    DiagBlockKind::Identity => "identity",
                    DiagBlockKind::Zero => "zero",
                })
                .collect()
        }),
    };
    serde_json::to_string_pretty(&json).expect("report serializes")
}

#[derive(Serialize)]
struct AugmentReportJson {
    mode: &'static str,
    m: usize,
    n: usize,
    nbar: usize,
    q: usize,
    #[serde(rename = "rowBlockBounds")]
    row_block_bounds: Vec<usize>,
    signs: Vec<f64>,
    #[serde(rename = "orthogonalityError")]
    orthogonality_error: f64,
}

pub fn augment_report_json(aug: &AugmentedSystem, orthogonality_error: f64) -> String {
    let json = AugmentReportJson {
        mode: match aug.mode {
            AugmentMode::Consistent => "consistent",
            AugmentMode::AugmentedTridiagonal => "augmented-tridiagonal",
        },
        m: aug.nrows(),
        n: aug.a_cols,
        nbar: aug.nbar(),
        q: aug.q,
        row_block_bounds: aug.row_bounds.clone(),
        signs: aug.signs.clone(),
        orthogonality_error,
    };
    serde_json::to_string_pretty(&json).expect("report serializes")
}

#[derive(Serialize)]
struct ProbeReportJson<'a> {
    m: usize,
    q: usize,
    #[serde(rename = "rankAbar")]
    rank_abar: usize,
    #[serde(rename = "fullRowRank")]
    full_row_rank: bool,
    #[serde(rename = "intersectionDim")]
    intersection_dim: usize,
    #[serde(rename = "wRank")]
    w_rank: usize,
    #[serde(rename = "sRank")]
    s_rank: usize,
    #[serde(rename = "chainHolds")]
    chain_holds: bool,
    observations: &'a [String],
}

pub fn probe_report_json(probe: &ConjectureProbe) -> String {
    let json = ProbeReportJson {
        m: probe.m,
        q: probe.q,
        rank_abar: probe.rank_abar,
        full_row_rank: probe.full_row_rank,
        intersection_dim: probe.intersection_dim,
        w_rank: probe.w_rank,
        s_rank: probe.s_rank,
        chain_holds: probe.chain_holds,
        observations: &probe.observations,
    };
    serde_json::to_string_pretty(&json).expect("report serializes")
}

#[derive(Serialize)]
struct SuiteJson<'a> {
    name: &'a str,
    cases: usize,
    failures: usize,
    observations: &'a [String],
}

pub fn check_report_json(suites: &[SuiteResult]) -> String {
    let json: Vec<SuiteJson> = suites
        .iter()
        .map(|s| SuiteJson {
            name: s.name,
            cases: s.cases,
            failures: s.failures,
            observations: &s.observations,
        })
        .collect();
    serde_json::to_string_pretty(&json).expect("report serializes")
}
