#include "cvdsim/events.hpp"

#include <cmath>
#include <limits>

#include "cvdsim/errors.hpp"

namespace cvdsim {

HazardModel HazardModel::defaults() {
    HazardModel m{};
    m.log_hr_age_per_year = std::log(1.03);
    m.log_hr_af = std::log(2.90);
    m.log_hr_ckd = 0.0;  // direct effect zero; CKD acts through eGFR and SBP
    m.log_hr_dm = std::log(4.15);
    m.log_hr_hba1c_per_unit = std::log(1.37);
    m.log_hr_bmi_per_unit = std::log(1.01);
    m.log_hr_egfr_per_unit = std::log(0.98);
    m.log_hr_sbp_per_mmhg = std::log(1.01);
    m.log_hr_smoke_current = std::log(1.18);
    m.log_hr_smoke_ex = std::log(1.17);
    return m;
}

double linear_predictor(const CohortRow& row, const HazardModel& m) {
    double lp = m.log_hr_age_per_year * (row.age - m.ref_age);
    lp += m.log_hr_af * (row.af ? 1.0 : 0.0);
    lp += m.log_hr_ckd * (row.ckd ? 1.0 : 0.0);
    lp += m.log_hr_dm * (row.diabetes ? 1.0 : 0.0);
    lp += m.log_hr_hba1c_per_unit * (row.hba1c - m.ref_hba1c);
    lp += m.log_hr_bmi_per_unit * (row.bmi - m.ref_bmi);
    lp += m.log_hr_egfr_per_unit * (row.egfr - m.ref_egfr);
    lp += m.log_hr_sbp_per_mmhg * (row.sbp - m.ref_sbp);
    if (row.smoking == Smoking::Current) lp += m.log_hr_smoke_current;
    if (row.smoking == Smoking::Ex) lp += m.log_hr_smoke_ex;
    return lp;
}

double expected_incidence(std::span<const double> exp_lp, double baseline_rate,
                          double horizon) {
    double sum = 0.0;
    for (double e : exp_lp) {
        sum += -std::expm1(-horizon * baseline_rate * e);
    }
    return sum / static_cast<double>(exp_lp.size());
}

CalibrationReport calibrate_baseline_hazard(std::span<const CohortRow> cohort,
                                            HazardModel& model, double target, double tol,
                                            int max_iter) {
    if (cohort.empty()) {
        throw CalibrationError("calibration requires a non-empty cohort");
    }
    if (!(target > 0.0 && target < 1.0)) {
        throw CalibrationError("target incidence " + std::to_string(target) +
                               " outside (0, 1)");
    }

    std::vector<double> exp_lp(cohort.size());
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        exp_lp[i] = std::exp(linear_predictor(cohort[i], model));
    }

    double lo = 1e-8;
    double hi = 1.0;
    const double f_lo = expected_incidence(exp_lp, lo, model.horizon);
    const double f_hi = expected_incidence(exp_lp, hi, model.horizon);
    if (f_lo > target) {
        throw CalibrationError("target incidence " + std::to_string(target) +
                               " below reach of bracket floor 1e-8");
    }
    if (f_hi < target) {
        throw CalibrationError("target incidence " + std::to_string(target) +
                               " above reach of bracket ceiling 1.0");
    }

    CalibrationReport report;
    report.target_incidence = target;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        mid = 0.5 * (lo + hi);
        const double f = expected_incidence(exp_lp, mid, model.horizon);
        report.iterations = it + 1;
        if (std::abs(f - target) <= tol) {
            break;
        }
        if (f < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    model.baseline_rate = mid;
    report.baseline_rate = mid;
    report.achieved_expected_incidence = expected_incidence(exp_lp, mid, model.horizon);
    if (std::abs(report.achieved_expected_incidence - target) > tol) {
        throw CalibrationError("bisection did not reach tolerance after " +
                               std::to_string(max_iter) + " iterations");
    }
    return report;
}

std::pair<bool, double> sample_event_time(RngStream& stream, const CohortRow& row,
                                          const HazardModel& model) {
    const double rate = model.baseline_rate * std::exp(linear_predictor(row, model));
    // T = -ln(1-U)/rate with U in [0,1); rate 0 censors everything.
    const double u = stream.next_uniform();
    const double t = rate > 0.0 ? -std::log1p(-u) / rate
                                : std::numeric_limits<double>::infinity();
    if (t <= model.horizon) {
        return {true, t};
    }
    return {false, model.horizon};
}

void simulate_events(RngStream& stream, std::span<CohortRow> cohort,
                     const HazardModel& model) {
    for (auto& row : cohort) {
        const auto [event, time] = sample_event_time(stream, row, model);
        row.cvd_event = event;
        row.cvd_time = time;
    }
}

std::vector<CohortRow> generate_cohort(std::uint64_t master_seed, std::size_t n,
                                       const ParameterSet& params, double target_incidence,
                                       CalibrationReport* report) {
    auto cohort = generate_covariates(master_seed, n, params);
    HazardModel model = HazardModel::defaults();
    auto rep = calibrate_baseline_hazard(cohort, model, target_incidence);
    auto s_event = derive_stream(master_seed, "event");
    simulate_events(s_event, cohort, model);

    std::size_t events = 0;
    for (const auto& row : cohort) {
        events += row.cvd_event ? 1 : 0;
    }
    rep.realised_incidence = static_cast<double>(events) / static_cast<double>(n);
    if (report != nullptr) {
        *report = rep;
    }
    return cohort;
}

}  // namespace cvdsim
