#include "cvdsim/cohort.hpp"

#include <algorithm>
#include <cmath>

#include "cvdsim/errors.hpp"

namespace cvdsim {

std::string_view to_string(Smoking s) {
    switch (s) {
        case Smoking::Non: return "non";
        case Smoking::Ex: return "ex";
        case Smoking::Current: return "current";
    }
    throw InvalidParameterError("invalid smoking value");
}

Smoking smoking_from_string(std::string_view s) {
    if (s == "non") return Smoking::Non;
    if (s == "ex") return Smoking::Ex;
    if (s == "current") return Smoking::Current;
    throw ParseError("unknown smoking status: '" + std::string(s) + "'");
}

double logistic(double x) {
    // Evaluate on the negative branch only, so large |x| cannot overflow.
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidParameterError("logit requires p in (0, 1)");
    }
    return std::log(p / (1.0 - p));
}

namespace {

int quintile_index(int q) {
    if (q < 1 || q > 5) {
        throw InvalidParameterError("IRSD quintile " + std::to_string(q) +
                                    " outside 1..5");
    }
    return q - 1;
}

}  // namespace

std::vector<int> sample_irsd(RngStream& stream, std::size_t n, const ParameterSet& p) {
    const auto idx = stream.categorical(p.irsd_weights, n);
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<int>(idx[i]) + 1;
    }
    return out;
}

std::vector<double> sample_age(RngStream& stream, std::size_t n, const ParameterSet& p) {
    auto age = stream.normal(p.age_mean, p.age_sd, n);
    for (auto& a : age) {
        a = std::clamp(a, p.age_min, p.age_max);
    }
    return age;
}

std::vector<Smoking> sample_smoking(RngStream& stream, std::span<const int> irsd,
                                    const ParameterSet& p) {
    std::vector<Smoking> out(irsd.size());
    for (std::size_t i = 0; i < irsd.size(); ++i) {
        const auto& t = p.smoking_by_irsd[quintile_index(irsd[i])];
        const double probs[3] = {t.non, t.current, t.ex};
        switch (stream.next_categorical(probs)) {
            case 0: out[i] = Smoking::Non; break;
            case 1: out[i] = Smoking::Current; break;
            default: out[i] = Smoking::Ex; break;
        }
    }
    return out;
}

std::array<double, 5> bmi_means_by_irsd(const ParameterSet& p) {
    double s = 0.0;
    for (int q = 1; q <= 5; ++q) {
        s += p.irsd_weights[q - 1] * (p.q_center - q);
    }
    const double mu_center = p.bmi_mean - p.delta_bmi * s;
    std::array<double, 5> mu{};
    for (int q = 1; q <= 5; ++q) {
        mu[q - 1] = mu_center + p.delta_bmi * (p.q_center - q);
    }
    return mu;
}

std::vector<double> sample_bmi(RngStream& stream, std::span<const int> irsd,
                               const ParameterSet& p) {
    const auto mu = bmi_means_by_irsd(p);
    std::vector<double> out(irsd.size());
    for (std::size_t i = 0; i < irsd.size(); ++i) {
        const double v = stream.next_normal(mu[quintile_index(irsd[i])], p.bmi_sd);
        out[i] = std::clamp(v, p.bmi_min, p.bmi_max);
    }
    return out;
}

double diabetes_probability(double age, double bmi, const ParameterSet& p) {
    const double lin = logit(p.dm.base_prev) +
                       std::log(p.dm.or10_age) * (age - p.age_mean) / 10.0 +
                       std::log(p.dm.or5_bmi) / 5.0 * (bmi - p.bmi_mean);
    return logistic(lin);
}

std::vector<std::uint8_t> sample_diabetes(RngStream& stream, std::span<const double> age,
                                          std::span<const double> bmi,
                                          const ParameterSet& p) {
    std::vector<double> prob(age.size());
    for (std::size_t i = 0; i < age.size(); ++i) {
        prob[i] = diabetes_probability(age[i], bmi[i], p);
    }
    return stream.bernoulli(prob);
}

double ckd_probability(double age, double bmi, bool diabetes, Smoking smoking,
                       const ParameterSet& p) {
    double lin = logit(p.ckd.target_prev);
    lin += std::log(p.ckd.or10_age) / 10.0 * (age - p.age_mean);
    lin += std::log(p.ckd.or_dm) * (diabetes ? 1.0 : 0.0);
    lin += std::log(p.ckd.or5_bmi) / 5.0 * (bmi - p.bmi_mean);
    if (smoking == Smoking::Ex) lin += std::log(p.ckd.or_ex);
    if (smoking == Smoking::Current) lin += std::log(p.ckd.or_current);
    return logistic(lin);
}

std::vector<std::uint8_t> sample_ckd(RngStream& stream, std::span<const double> age,
                                     std::span<const double> bmi,
                                     std::span<const std::uint8_t> diabetes,
                                     std::span<const Smoking> smoking,
                                     const ParameterSet& p) {
    std::vector<double> prob(age.size());
    for (std::size_t i = 0; i < age.size(); ++i) {
        prob[i] = ckd_probability(age[i], bmi[i], diabetes[i] != 0, smoking[i], p);
    }
    return stream.bernoulli(prob);
}

std::vector<double> sample_hba1c(RngStream& stream, std::span<const std::uint8_t> diabetes,
                                 const ParameterSet& p) {
    std::vector<double> out(diabetes.size());
    for (std::size_t i = 0; i < diabetes.size(); ++i) {
        const double v = diabetes[i] ? stream.next_normal(p.hba1c.mean_dm, p.hba1c.sd_dm)
                                     : stream.next_normal(p.hba1c.mean_nodm, p.hba1c.sd_nodm);
        out[i] = std::max(v, 0.0);
    }
    return out;
}

double egfr_mean(double age, bool ckd, const ParameterSet& p) {
    return p.egfr.mean + p.egfr.beta_age * (age - p.age_mean) +
           p.egfr.delta_ckd * (ckd ? 1.0 : 0.0);
}

std::vector<double> sample_egfr(RngStream& stream, std::span<const double> age,
                                std::span<const std::uint8_t> ckd, const ParameterSet& p) {
    std::vector<double> out(age.size());
    for (std::size_t i = 0; i < age.size(); ++i) {
        out[i] = stream.next_normal(egfr_mean(age[i], ckd[i] != 0, p), p.egfr.resid_sd);
    }
    return out;
}

double sbp_mean(double age, double bmi, bool diabetes, bool ckd, Smoking smoking,
                const ParameterSet& p) {
    double shift_smoke = 0.0;
    if (smoking == Smoking::Ex) shift_smoke = p.sbp.delta_ex;
    if (smoking == Smoking::Current) shift_smoke = p.sbp.delta_current;
    return p.sbp.intercept + p.sbp.beta_age * (age - p.age_mean) +
           p.sbp.beta_bmi * (bmi - p.bmi_mean) + p.sbp.delta_dm * (diabetes ? 1.0 : 0.0) +
           p.sbp.delta_ckd * (ckd ? 1.0 : 0.0) + shift_smoke;
}

std::vector<double> sample_sbp(RngStream& stream, std::span<const double> age,
                               std::span<const double> bmi,
                               std::span<const std::uint8_t> diabetes,
                               std::span<const std::uint8_t> ckd,
                               std::span<const Smoking> smoking, const ParameterSet& p) {
    std::vector<double> out(age.size());
    for (std::size_t i = 0; i < age.size(); ++i) {
        out[i] = stream.next_normal(
            sbp_mean(age[i], bmi[i], diabetes[i] != 0, ckd[i] != 0, smoking[i], p),
            p.sbp.resid_sd);
    }
    return out;
}

double af_probability(double age, bool ckd, Smoking smoking, const ParameterSet& p) {
    double lin = logit(p.af.target_prev);
    lin += std::log(p.af.or10_age) / 10.0 * (age - p.age_mean);
    lin += std::log(p.af.or_ckd) * (ckd ? 1.0 : 0.0);
    if (smoking == Smoking::Ex) lin += std::log(p.af.or_ex);
    if (smoking == Smoking::Current) lin += std::log(p.af.or_current);
    return logistic(lin);
}

std::vector<std::uint8_t> sample_af(RngStream& stream, std::span<const double> age,
                                    std::span<const std::uint8_t> ckd,
                                    std::span<const Smoking> smoking,
                                    const ParameterSet& p) {
    std::vector<double> prob(age.size());
    for (std::size_t i = 0; i < age.size(); ++i) {
        prob[i] = af_probability(age[i], ckd[i] != 0, smoking[i], p);
    }
    return stream.bernoulli(prob);
}

std::vector<CohortRow> generate_covariates(std::uint64_t master_seed, std::size_t n,
                                           const ParameterSet& p) {
    p.validate();

    // Topological order: IRSD, age -> smoking, BMI -> diabetes -> CKD ->
    // HbA1c, eGFR, SBP, AF. One stream per stage, rows in index order.
    auto s_irsd = derive_stream(master_seed, "irsd");
    auto s_age = derive_stream(master_seed, "age");
    auto s_smoking = derive_stream(master_seed, "smoking");
    auto s_bmi = derive_stream(master_seed, "bmi");
    auto s_dm = derive_stream(master_seed, "diabetes");
    auto s_ckd = derive_stream(master_seed, "ckd");
    auto s_hba1c = derive_stream(master_seed, "hba1c");
    auto s_egfr = derive_stream(master_seed, "egfr");
    auto s_sbp = derive_stream(master_seed, "sbp");
    auto s_af = derive_stream(master_seed, "af");

    const auto irsd = sample_irsd(s_irsd, n, p);
    const auto age = sample_age(s_age, n, p);
    const auto smoking = sample_smoking(s_smoking, irsd, p);
    const auto bmi = sample_bmi(s_bmi, irsd, p);
    const auto dm = sample_diabetes(s_dm, age, bmi, p);
    const auto ckd = sample_ckd(s_ckd, age, bmi, dm, smoking, p);
    const auto hba1c = sample_hba1c(s_hba1c, dm, p);
    const auto egfr = sample_egfr(s_egfr, age, ckd, p);
    const auto sbp = sample_sbp(s_sbp, age, bmi, dm, ckd, smoking, p);
    const auto af = sample_af(s_af, age, ckd, smoking, p);

    std::vector<CohortRow> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i] = CohortRow{irsd[i],   age[i],  smoking[i],  bmi[i],
                            dm[i] != 0, ckd[i] != 0, hba1c[i], egfr[i],
                            sbp[i],    af[i] != 0, false,      0.0};
    }
    return rows;
}

}  // namespace cvdsim
