#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvdsim/events.hpp"
#include "cvdsim/reconstruct.hpp"
#include "cvdsim/stats.hpp"

namespace cvdsim {

std::string calibration_report_json(const CalibrationReport& report);

/// "<0.001" below 1e-3, else three decimals.
std::string format_p_value(double p);

void write_summary_csv(const std::filesystem::path& path, const CohortSummary& s);
/// Human-readable block table of the cohort summary.
std::string format_summary_text(const CohortSummary& s);
void write_strata_csv(const std::filesystem::path& path,
                      std::span<const StratumSummary> strata, std::string_view key_name);
void write_correlation_csv(const std::filesystem::path& path, const CorrelationMatrix& m);
void write_hr_table_csv(const std::filesystem::path& path, const CoxFitResult& fit);
void write_forest_csv(const std::filesystem::path& path, std::span<const ForestRow> rows);
void write_comparison_csv(const std::filesystem::path& path, const IrsdComparison& cmp);
std::string quality_report_json(const QualityReport& report);

// ---------------------------------------------------------------------------
// Tolerance manifest: target checks encoded as data so `validate` judges its
// own outputs.
// ---------------------------------------------------------------------------

struct ToleranceCheck {
    std::string id;
    std::string metric;
    std::string description;
    // Either target +/- tol, or an explicit [lo, hi] range.
    std::optional<double> target;
    std::optional<double> tol;
    std::optional<double> lo;
    std::optional<double> hi;
};

std::vector<ToleranceCheck> load_tolerances(const std::filesystem::path& path);

struct CheckResult {
    std::string id;
    std::string metric;
    std::string description;
    std::string bound;  // rendered acceptance interval
    double value = 0.0;
    bool skipped = false;  // metric not computable from the provided inputs
    bool pass = false;
};

/// Every scalar the manifest can reference, computed from whichever inputs
/// are available.
class MetricSet {
public:
    void add(const std::string& name, double value) { values_[name] = value; }
    std::optional<double> get(const std::string& name) const;

    static MetricSet from_inputs(std::span<const CohortRow> cohort,
                                 const CohortSummary& summary,
                                 std::span<const StratumSummary> irsd_strata,
                                 const CoxFitResult* fit, const EmrTables* emr,
                                 const Lexicon* lexicon,
                                 std::span<const ReconstructedRow> reconstructed);

private:
    std::map<std::string, double> values_;
};

std::vector<CheckResult> run_checks(std::span<const ToleranceCheck> checks,
                                    const MetricSet& metrics);

/// One line per check ("PASS <id> <metric> ...") plus a tail summary.
std::string render_check_lines(std::span<const CheckResult> results);
std::string check_results_json(std::span<const CheckResult> results);
bool all_passed(std::span<const CheckResult> results);

}  // namespace cvdsim
