//! Measurements on traces and on the underlying contagion: prevalence and
//! stationarity, emergent complexity, the lower bound and its constants,
//! finite-scale lemma checks, and central-time scans.

pub mod bounds;
pub mod emergence;
pub mod lemmas;
pub mod measure;
pub mod prevalence;
pub mod report;
pub mod scan;
pub mod sis;

pub use bounds::{
    c6_ratio, calibrate, corollary_condition_check, from_micro, smallest_m, theorem1_lower_bound, to_micro,
    BoundConstants, BoundReport, CalibrationSpec, GrowthCondition, MICRO,
};
pub use emergence::{eac_node, eac_per_node, eeac};
pub use lemmas::{
    check_lemma1, check_lemma4, check_lemma5, fit_c4, gibbs_check, isolated_sums, ladder_population, lemma1_cell,
    lemma1_ladder, GibbsReport, IsolatedSums, Lemma1Cell, Lemma1Check, Lemma4Check, Lemma5Check,
};
pub use measure::{calibrate_experiment, measure, Calibration, Measurement};
pub use prevalence::{
    average_prevalence, density_infected, density_tagged, detect_stationary, theoretical_prevalence, PrevalenceSeries,
    StationarityReport, DEFAULT_TOLERANCE, DEFAULT_WINDOW,
};
pub use report::{
    write_bound_report_csv, write_eeac_ladder_csv, write_prevalence_csv, write_sweep_csv, RunSummary, SweepRow,
    BOUND_REPORT_HEADER, EEAC_LADDER_HEADER, PREVALENCE_HEADER, SWEEP_HEADER,
};
pub use scan::{central_time_scan, ladder_slope, ScanPoint, ScanResult};
pub use sis::{estimate_prevalence, prevalence_law_slope, simulate_sis, SisEstimate, SisRun};
