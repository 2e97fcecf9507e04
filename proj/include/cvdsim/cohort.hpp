#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvdsim/params.hpp"
#include "cvdsim/rng.hpp"

namespace cvdsim {

enum class Smoking : std::uint8_t { Non = 0, Ex = 1, Current = 2 };

std::string_view to_string(Smoking s);
Smoking smoking_from_string(std::string_view s);

/// One clean-cohort individual. Event fields are filled by the event engine;
/// covariate generation leaves them as (false, 0).
struct CohortRow {
    int irsd_quintile = 0;  // 1..5, 1 = most disadvantaged
    double age = 0.0;       // years, clipped to [18, 90]
    Smoking smoking = Smoking::Non;
    double bmi = 0.0;  // kg/m^2, clipped to [15, 60]
    bool diabetes = false;
    bool ckd = false;
    double hba1c = 0.0;  // %
    double egfr = 0.0;   // mL/min/1.73m^2
    double sbp = 0.0;    // mmHg
    bool af = false;
    bool cvd_event = false;
    double cvd_time = 0.0;  // years; (0, 5], censored rows exactly 5.0
};

double logistic(double x);
double logit(double p);

std::vector<int> sample_irsd(RngStream& stream, std::size_t n, const ParameterSet& p);

std::vector<double> sample_age(RngStream& stream, std::size_t n, const ParameterSet& p);

/// Per-quintile categorical smoking draw; unknown quintile values throw.
std::vector<Smoking> sample_smoking(RngStream& stream, std::span<const int> irsd,
                                    const ParameterSet& p);

/// Quintile BMI means mu_q = mu_center + delta*(q_center - q), with mu_center
/// solving sum_q w_q * mu_q = bmi_mean. Index 0 = quintile 1.
std::array<double, 5> bmi_means_by_irsd(const ParameterSet& p);

std::vector<double> sample_bmi(RngStream& stream, std::span<const int> irsd,
                               const ParameterSet& p);

double diabetes_probability(double age, double bmi, const ParameterSet& p);
std::vector<std::uint8_t> sample_diabetes(RngStream& stream, std::span<const double> age,
                                          std::span<const double> bmi,
                                          const ParameterSet& p);

double ckd_probability(double age, double bmi, bool diabetes, Smoking smoking,
                       const ParameterSet& p);
std::vector<std::uint8_t> sample_ckd(RngStream& stream, std::span<const double> age,
                                     std::span<const double> bmi,
                                     std::span<const std::uint8_t> diabetes,
                                     std::span<const Smoking> smoking,
                                     const ParameterSet& p);

/// Two-component conditional normal; clipped at 0 only to exclude physically
/// impossible negatives (probability < 1e-13 under the non-diabetic component).
std::vector<double> sample_hba1c(RngStream& stream, std::span<const std::uint8_t> diabetes,
                                 const ParameterSet& p);

double egfr_mean(double age, bool ckd, const ParameterSet& p);
std::vector<double> sample_egfr(RngStream& stream, std::span<const double> age,
                                std::span<const std::uint8_t> ckd, const ParameterSet& p);

double sbp_mean(double age, double bmi, bool diabetes, bool ckd, Smoking smoking,
                const ParameterSet& p);
std::vector<double> sample_sbp(RngStream& stream, std::span<const double> age,
                               std::span<const double> bmi,
                               std::span<const std::uint8_t> diabetes,
                               std::span<const std::uint8_t> ckd,
                               std::span<const Smoking> smoking, const ParameterSet& p);

double af_probability(double age, bool ckd, Smoking smoking, const ParameterSet& p);
std::vector<std::uint8_t> sample_af(RngStream& stream, std::span<const double> age,
                                    std::span<const std::uint8_t> ckd,
                                    std::span<const Smoking> smoking,
                                    const ParameterSet& p);

/// Sample all covariates in topological order under per-stage streams derived
/// from `master_seed`. Event fields are left unset.
std::vector<CohortRow> generate_covariates(std::uint64_t master_seed, std::size_t n,
                                           const ParameterSet& p);

}  // namespace cvdsim
