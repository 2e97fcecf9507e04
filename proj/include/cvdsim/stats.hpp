#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvdsim/cohort.hpp"
#include "cvdsim/emr.hpp"
#include "cvdsim/lexicon.hpp"
#include "cvdsim/reconstruct.hpp"

namespace cvdsim {

struct ContinuousSummary {
    double mean = 0.0;
    double sd = 0.0;  // sample SD (n-1); 0 for a single observation
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Quantile with linear interpolation between order statistics
/// (position (n-1)*p), matching the reference tooling.
double quantile(std::span<const double> sorted_values, double p);

ContinuousSummary summarize_values(std::vector<double> values);

struct CohortSummary {
    std::size_t n = 0;
    ContinuousSummary age, bmi, sbp, egfr, hba1c;
    std::array<double, 5> irsd_pct{};  // index 0 = quintile 1
    double smoking_non_pct = 0.0;
    double smoking_ex_pct = 0.0;
    double smoking_current_pct = 0.0;
    double diabetes_pct = 0.0;
    double ckd_pct = 0.0;
    double af_pct = 0.0;
    double event_rate_pct = 0.0;
    double mean_follow_up_years = 0.0;
};

CohortSummary summarize_cohort(std::span<const CohortRow> cohort);

enum class StratifyKey { IrsdQuintile, AgeBand };

StratifyKey stratify_key_from_string(std::string_view s);

/// Age bands: N 18-29, A 30-39, B 40-49, C 50-59, D 60-74, K >= 75.
std::string age_band(double age);

struct StratumSummary {
    std::string key;
    std::size_t n = 0;
    double age_median = 0.0;
    double age_q1 = 0.0;
    double age_q3 = 0.0;
    double diabetes_pct = 0.0;
    double ckd_pct = 0.0;
    double af_pct = 0.0;
    ContinuousSummary bmi, sbp, egfr, hba1c;
    double event_rate_pct = 0.0;
};

std::vector<StratumSummary> stratify(std::span<const CohortRow> cohort, StratifyKey key);

struct CorrelationMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd r;
    // Pairs left undefined because one variable has zero variance.
    std::vector<std::pair<std::string, std::string>> undefined;
};

/// Pearson correlations over IRSD, age, smoking ordinal (non<ex<current),
/// BMI, DM, CKD, HbA1c, eGFR, SBP, AF, event.
CorrelationMatrix correlation_matrix(std::span<const CohortRow> cohort);

struct IrsdComparison {
    std::array<double, 5> ckd_only_pct{};
    std::array<double, 5> t2dm_only_pct{};
    std::size_t ckd_only_n = 0;
    std::size_t t2dm_only_n = 0;
    bool defined = true;  // false when a cohort is empty
};

/// Q1-style exercise: mutually exclusive CKD-only / T2DM-only cohorts from
/// the EMR tables, summarised as IRSD prevalence vectors.
IrsdComparison cohort_compare_irsd(std::span<const EmrMasterRow> master,
                                   std::span<const ChronicDiseaseRow> chronic,
                                   const Lexicon& lexicon);

// ---------------------------------------------------------------------------
// Cox proportional hazards (Breslow ties, ridge penalty, Newton-Raphson)
// ---------------------------------------------------------------------------

struct CoxOptions {
    double penalizer = 0.05;  // adds -penalizer*||beta||^2/2 to the log partial likelihood
    double tol = 1e-7;        // convergence: max |delta beta|
    int max_iter = 100;
    bool include_bmi = true;  // false when fitting reconstructed cohorts
};

struct CoxTerm {
    std::string name;
    double beta = 0.0;
    double se = 0.0;
    double hr = 0.0;
    double hr_lo95 = 0.0;
    double hr_hi95 = 0.0;
    double p = 1.0;
};

struct CoxFitResult {
    std::vector<CoxTerm> terms;
    double log_partial_likelihood = 0.0;  // unpenalised, at the solution
    int iterations = 0;
    std::vector<std::string> dropped;  // low-variance columns removed pre-fit
    std::size_t n = 0;
    std::size_t events = 0;
    std::string objective;  // exact objective, recorded for reproducibility

    const CoxTerm& term(std::string_view name) const;
};

struct CoxLogLik {
    double ll = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
};

/// Breslow log partial likelihood with analytic gradient and Hessian,
/// unpenalised. Exposed for the finite-difference and brute-force oracles.
CoxLogLik cox_partial_loglik(const Eigen::MatrixXd& X, std::span<const double> time,
                             std::span<const std::uint8_t> event,
                             const Eigen::VectorXd& beta);

/// Newton-Raphson maximisation with step-halving on any likelihood decrease.
/// Throws FitError on non-convergence or a singular information matrix.
CoxFitResult fit_cox_matrix(const Eigen::MatrixXd& X, std::span<const double> time,
                            std::span<const std::uint8_t> event,
                            const std::vector<std::string>& names, const CoxOptions& options);

/// The standard model: age-30, AF, CKD, DM, HbA1c, BMI, eGFR, SBP, smoking
/// dummies (ref non), IRSD dummies (ref quintile 5); columns with variance
/// below 1e-6 overall or within events / non-events are dropped and named.
CoxFitResult fit_cox(std::span<const CohortRow> cohort, const CoxOptions& options = {});

/// Same model on a reconstructed cohort (no BMI; masked smoking treated as
/// the reference category).
CoxFitResult fit_cox_reconstructed(std::span<const ReconstructedRow> cohort,
                                   CoxOptions options = {});

struct ForestRow {
    std::string display_name;
    double hr = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Plot-ready forest table in fit order, with display renames
/// ("Age", "smoke (cur)", "IRSD: q", "Diabetes mellitus", ...).
std::vector<ForestRow> emit_forest_data(const CoxFitResult& fit);

}  // namespace cvdsim
