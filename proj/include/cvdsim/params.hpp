#pragma once

#include <array>
#include <filesystem>

namespace cvdsim {

/// Per-quintile smoking probabilities (non / current / ex), summing to 1.
struct SmokingTriple {
    double non;
    double current;
    double ex;
};

/// Every named constant of the generative model, in one versioned value.
/// Defaults reproduce the published population targets; see data/params.json
/// for the checked-in copy.
struct ParameterSet {
    // Socioeconomic quintile weights, index 0 = quintile 1 (most disadvantaged).
    std::array<double, 5> irsd_weights{0.2136, 0.1622, 0.2393, 0.1678, 0.2171};

    double age_mean = 49.80;
    double age_sd = 12.39;
    double age_min = 18.0;
    double age_max = 90.0;

    std::array<SmokingTriple, 5> smoking_by_irsd{{
        {0.64, 0.16, 0.20},
        {0.695, 0.125, 0.18},
        {0.73, 0.10, 0.17},
        {0.775, 0.075, 0.15},
        {0.81, 0.05, 0.14},
    }};

    double bmi_mean = 28.29;
    double bmi_sd = 4.98;
    double bmi_min = 15.0;
    double bmi_max = 60.0;
    double delta_bmi = 0.6;  // mean shift per quintile step away from the centre
    int q_center = 3;

    struct Diabetes {
        double base_prev = 0.0553;
        double or10_age = 1.8;  // odds ratio per 10 years
        double or5_bmi = 1.7;   // odds ratio per 5 BMI units
    } dm;

    struct Ckd {
        double target_prev = 0.0045;
        double or10_age = 1.4;
        double or_dm = 3.0;
        double or5_bmi = 1.5;
        double or_ex = 1.2;
        double or_current = 1.4;
    } ckd;

    struct Hba1c {
        double mean_nodm = 4.60;
        double sd_nodm = 0.60;
        double mean_dm = 7.10;
        double sd_dm = 1.20;
    } hba1c;

    struct Egfr {
        double mean = 82.97;
        double beta_age = -0.18;  // per year
        double resid_sd = 5.0;
        double delta_ckd = -31.0;
    } egfr;

    struct Sbp {
        double intercept = 122.07;
        double beta_age = 0.38;
        double beta_bmi = 1.0;
        double delta_ex = 1.7;
        double delta_current = 3.8;
        double delta_dm = 8.0;
        double delta_ckd = 12.0;
        double resid_sd = 14.0;
    } sbp;

    struct Af {
        double target_prev = 0.0057;
        double or10_age = 1.7;
        double or_ckd = 3.0;
        double or_ex = 1.1;
        double or_current = 1.3;
    } af;

    static ParameterSet defaults() { return ParameterSet{}; }

    /// Throws InvalidParameterError naming the first violated invariant
    /// (weight sums, smoking triples, positive SDs, prevalence ranges, bounds).
    void validate() const;
};

/// Load and validate a parameter set from a JSON file.
ParameterSet load_parameters(const std::filesystem::path& path);

}  // namespace cvdsim
