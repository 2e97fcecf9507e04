#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "cvdsim/cohort.hpp"
#include "cvdsim/rng.hpp"

namespace cvdsim {

/// Proportional-hazards event model with a constant (exponential) baseline.
///
/// The linear predictor measures covariates relative to a reference
/// individual: age 30, non-smoker, no chronic disease, continuous biomarkers
/// at the population centre. Hazard ratios are invariant to the centring;
/// it only fixes the interpretation of baseline_rate.
struct HazardModel {
    double log_hr_age_per_year;
    double log_hr_af;
    double log_hr_ckd;
    double log_hr_dm;
    double log_hr_hba1c_per_unit;
    double log_hr_bmi_per_unit;
    double log_hr_egfr_per_unit;
    double log_hr_sbp_per_mmhg;
    double log_hr_smoke_current;
    double log_hr_smoke_ex;

    double ref_age = 30.0;
    double ref_hba1c = 4.79;
    double ref_bmi = 28.29;
    double ref_egfr = 82.97;
    double ref_sbp = 122.07;

    double baseline_rate = 0.0;  // events per person-year; set by calibration
    double horizon = 5.0;        // administrative censoring horizon, years

    static HazardModel defaults();
};

double linear_predictor(const CohortRow& row, const HazardModel& model);

/// Expected five-year incidence (1/n) * sum_i (1 - exp(-horizon * rate * e^lp_i))
/// at the given baseline rate; analytic, no Monte Carlo.
double expected_incidence(std::span<const double> exp_lp, double baseline_rate,
                          double horizon);

struct CalibrationReport {
    double baseline_rate = 0.0;
    int iterations = 0;
    double target_incidence = 0.0;
    double achieved_expected_incidence = 0.0;
    double realised_incidence = -1.0;  // filled after simulation, if run
};

/// Bisection on the baseline rate over [1e-8, 1] until the analytic expected
/// incidence matches `target` within `tol`. Throws CalibrationError when the
/// target is unreachable inside the bracket.
CalibrationReport calibrate_baseline_hazard(std::span<const CohortRow> cohort,
                                            HazardModel& model, double target,
                                            double tol = 1e-6, int max_iter = 200);

/// Draw one exponential event time for `row`; returns (event, time) with
/// administrative censoring at the horizon.
std::pair<bool, double> sample_event_time(RngStream& stream, const CohortRow& row,
                                          const HazardModel& model);

/// Fill cvd_event / cvd_time for every row, in index order.
void simulate_events(RngStream& stream, std::span<CohortRow> cohort,
                     const HazardModel& model);

/// Full generation pipeline: covariates, calibration, event simulation.
std::vector<CohortRow> generate_cohort(std::uint64_t master_seed, std::size_t n,
                                       const ParameterSet& params, double target_incidence,
                                       CalibrationReport* report = nullptr);

}  // namespace cvdsim
