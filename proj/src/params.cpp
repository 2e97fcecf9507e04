#include "cvdsim/params.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cvdsim/errors.hpp"

namespace cvdsim {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw InvalidParameterError("parameter set invalid: " + what);
    }
}

void check_prevalence(double p, const std::string& name) {
    require(p > 0.0 && p < 1.0, name + " must lie in (0, 1)");
}

}  // namespace

void ParameterSet::validate() const {
    double wsum = 0.0;
    for (double w : irsd_weights) {
        require(w > 0.0, "irsd weight must be positive");
        wsum += w;
    }
    require(std::abs(wsum - 1.0) <= 1e-9, "irsd weights must sum to 1 within 1e-9");

    for (std::size_t q = 0; q < smoking_by_irsd.size(); ++q) {
        const auto& t = smoking_by_irsd[q];
        require(t.non >= 0 && t.current >= 0 && t.ex >= 0,
                "smoking probabilities for quintile " + std::to_string(q + 1) +
                    " must be non-negative");
        require(std::abs(t.non + t.current + t.ex - 1.0) <= 1e-9,
                "smoking probabilities for quintile " + std::to_string(q + 1) +
                    " must sum to 1 within 1e-9");
    }

    require(age_sd > 0.0, "age_sd must be positive");
    require(age_min < age_max, "age_min must be below age_max");
    require(bmi_sd > 0.0, "bmi_sd must be positive");
    require(bmi_min < bmi_max, "bmi_min must be below bmi_max");
    require(hba1c.sd_nodm > 0.0 && hba1c.sd_dm > 0.0, "hba1c SDs must be positive");
    require(egfr.resid_sd > 0.0, "egfr resid_sd must be positive");
    require(sbp.resid_sd > 0.0, "sbp resid_sd must be positive");

    check_prevalence(dm.base_prev, "dm.base_prev");
    check_prevalence(ckd.target_prev, "ckd.target_prev");
    check_prevalence(af.target_prev, "af.target_prev");
}

ParameterSet load_parameters(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open parameter file: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("parameter file " + path.string() + ": " + e.what());
    }

    ParameterSet p;
    try {
        j.at("irsd_weights").get_to(p.irsd_weights);
        p.age_mean = j.at("age").at("mean");
        p.age_sd = j.at("age").at("sd");
        p.age_min = j.at("age").at("min");
        p.age_max = j.at("age").at("max");
        const auto& smoking = j.at("smoking_by_irsd");
        for (std::size_t q = 0; q < 5; ++q) {
            const auto& t = smoking.at(q);
            p.smoking_by_irsd[q] = {t.at("non"), t.at("current"), t.at("ex")};
        }
        const auto& bmi = j.at("bmi");
        p.bmi_mean = bmi.at("mean");
        p.bmi_sd = bmi.at("sd");
        p.bmi_min = bmi.at("min");
        p.bmi_max = bmi.at("max");
        p.delta_bmi = bmi.at("delta_per_quintile");
        p.q_center = bmi.at("q_center");
        const auto& dm = j.at("diabetes");
        p.dm = {dm.at("base_prev"), dm.at("or10_age"), dm.at("or5_bmi")};
        const auto& ckd = j.at("ckd");
        p.ckd = {ckd.at("target_prev"), ckd.at("or10_age"), ckd.at("or_dm"),
                 ckd.at("or5_bmi"),     ckd.at("or_ex"),    ckd.at("or_current")};
        const auto& h = j.at("hba1c");
        p.hba1c = {h.at("mean_nodm"), h.at("sd_nodm"), h.at("mean_dm"), h.at("sd_dm")};
        const auto& e = j.at("egfr");
        p.egfr = {e.at("mean"), e.at("beta_age"), e.at("resid_sd"), e.at("delta_ckd")};
        const auto& s = j.at("sbp");
        p.sbp = {s.at("intercept"), s.at("beta_age"), s.at("beta_bmi"),
                 s.at("delta_ex"),  s.at("delta_current"), s.at("delta_dm"),
                 s.at("delta_ckd"), s.at("resid_sd")};
        const auto& af = j.at("af");
        p.af = {af.at("target_prev"), af.at("or10_age"), af.at("or_ckd"),
                af.at("or_ex"), af.at("or_current")};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("parameter file " + path.string() + ": " + e.what());
    }

    p.validate();
    return p;
}

}  // namespace cvdsim
