#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvdsim/cohort.hpp"
#include "cvdsim/emr.hpp"
#include "cvdsim/lexicon.hpp"

namespace cvdsim {

/// Cohort row recovered from the three EMR tables. BMI and the exact event
/// day are not recoverable; cvd_time carries month resolution only.
struct ReconstructedRow {
    std::int64_t patient_id = 0;
    double age = 0.0;
    int irsd_quintile = 0;
    std::optional<Smoking> smoking;  // nullopt where masked in the master table
    bool diabetes = false;
    bool ckd = false;
    bool af = false;
    double hba1c = std::numeric_limits<double>::quiet_NaN();  // % after harmonisation
    double egfr = std::numeric_limits<double>::quiet_NaN();
    double sbp = std::numeric_limits<double>::quiet_NaN();
    bool cvd_event = false;
    double cvd_time = 0.0;  // years since 2017-01-01 anchor, month resolution
};

struct QualityReport {
    std::size_t patients = 0;
    std::size_t chronic_rows = 0;
    std::size_t measurement_rows = 0;
    std::size_t missing_smoking = 0;
    std::size_t converted_hba1c_units = 0;
    std::size_t unmatched_labels = 0;
    std::vector<std::string> unmatched_label_values;
    std::size_t orphan_chronic_rows = 0;
    std::size_t orphan_measurement_rows = 0;
    std::vector<std::int64_t> orphan_patient_ids;
    std::size_t unknown_descriptions = 0;
    std::size_t patients_missing_biomarkers = 0;
    // Deliberately destroyed by the transform and unrecoverable here.
    std::vector<std::string> unrecoverable = {"BMI", "exact event day (month resolution only)"};
};

/// Back-convert a measurement to percent units: "%" passes through,
/// "mmol/mol" is inverted; any other unit is a DataContractError.
double harmonise_hba1c(double value, std::string_view unit);

/// Continuous years for a coarse YYYY-MM stamp: anchor 2017-01-01, day 15 of
/// the recorded month. The event flag does not change the rule; censored rows
/// restore to the administrative boundary of their censor month.
double restore_time(std::string_view cvd_time_ym, bool cvd_event);

/// Rebuild the analysis-ready cohort from the three tables.
/// Rows come back sorted by patient id. Duplicate (patient, measure) pairs
/// are a DataContractError; orphan ids are recorded in the report.
std::pair<std::vector<ReconstructedRow>, QualityReport> rebuild_cohort(
    std::span<const EmrMasterRow> master, std::span<const ChronicDiseaseRow> chronic,
    std::span<const MeasurementRow> measurements, const Lexicon& lexicon);

}  // namespace cvdsim
