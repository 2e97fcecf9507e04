#include "cvdsim/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "cvdsim/csv.hpp"
#include "cvdsim/errors.hpp"

namespace cvdsim {

namespace {

std::string fmt(double v, int decimals = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open for writing: " + path.string());
    }
    return out;
}

}  // namespace

std::string calibration_report_json(const CalibrationReport& r) {
    nlohmann::ordered_json j;
    j["baseline_rate_per_year"] = r.baseline_rate;
    j["bisection_iterations"] = r.iterations;
    j["target_incidence"] = r.target_incidence;
    j["achieved_expected_incidence"] = r.achieved_expected_incidence;
    if (r.realised_incidence >= 0.0) {
        j["realised_incidence"] = r.realised_incidence;
    }
    return j.dump(2) + "\n";
}

std::string format_p_value(double p) {
    if (p < 1e-3) {
        return "<0.001";
    }
    return fmt(p, 3);
}

void write_summary_csv(const std::filesystem::path& path, const CohortSummary& s) {
    auto out = open_out(path);
    out << "statistic,value\n";
    out << "n," << s.n << '\n';
    const auto cont = [&](const char* name, const ContinuousSummary& c) {
        out << name << "_mean," << fmt(c.mean) << '\n';
        out << name << "_sd," << fmt(c.sd) << '\n';
        out << name << "_median," << fmt(c.median) << '\n';
        out << name << "_q1," << fmt(c.q1) << '\n';
        out << name << "_q3," << fmt(c.q3) << '\n';
        out << name << "_min," << fmt(c.min) << '\n';
        out << name << "_max," << fmt(c.max) << '\n';
    };
    cont("age", s.age);
    cont("bmi", s.bmi);
    cont("sbp", s.sbp);
    cont("egfr", s.egfr);
    cont("hba1c", s.hba1c);
    for (int q = 1; q <= 5; ++q) {
        out << "irsd_q" << q << "_pct," << fmt(s.irsd_pct[q - 1]) << '\n';
    }
    out << "smoking_non_pct," << fmt(s.smoking_non_pct) << '\n';
    out << "smoking_ex_pct," << fmt(s.smoking_ex_pct) << '\n';
    out << "smoking_current_pct," << fmt(s.smoking_current_pct) << '\n';
    out << "diabetes_pct," << fmt(s.diabetes_pct) << '\n';
    out << "ckd_pct," << fmt(s.ckd_pct) << '\n';
    out << "af_pct," << fmt(s.af_pct) << '\n';
    out << "event_rate_pct," << fmt(s.event_rate_pct) << '\n';
    out << "mean_follow_up_years," << fmt(s.mean_follow_up_years) << '\n';
}

std::string format_summary_text(const CohortSummary& s) {
    std::ostringstream out;
    const auto line = [&](const std::string& label, const std::string& value) {
        out << "  " << label;
        for (std::size_t i = label.size(); i < 34; ++i) out << ' ';
        out << value << '\n';
    };
    const auto cont = [&](const std::string& name, const ContinuousSummary& c) {
        line(name, "Mean (SD): " + fmt(c.mean, 2) + " (" + fmt(c.sd, 2) + ")");
        line("", "Median [IQR]: " + fmt(c.median, 2) + " [" + fmt(c.q1, 2) + ", " +
                     fmt(c.q3, 2) + "]");
        line("", "Range: " + fmt(c.min, 2) + "-" + fmt(c.max, 2));
    };
    out << "Synthetic cohort characteristics (N = " << s.n << ")\n";
    out << "----------------------------------------------------------\n";
    cont("Age (years)", s.age);
    out << "  IRSD quintile distribution\n";
    for (int q = 1; q <= 5; ++q) {
        line("", "Q" + std::to_string(q) + ": " + fmt(s.irsd_pct[q - 1], 2) + "%");
    }
    out << "  Smoking status\n";
    line("", "Non-smoker: " + fmt(s.smoking_non_pct, 2) + "%");
    line("", "Ex-smoker: " + fmt(s.smoking_ex_pct, 2) + "%");
    line("", "Current smoker: " + fmt(s.smoking_current_pct, 2) + "%");
    out << "  Chronic disease prevalence\n";
    line("", "Diabetes: " + fmt(s.diabetes_pct, 2) + "%");
    line("", "Chronic kidney disease: " + fmt(s.ckd_pct, 3) + "%");
    line("", "Atrial fibrillation: " + fmt(s.af_pct, 3) + "%");
    cont("Body mass index (kg/m2)", s.bmi);
    cont("Systolic blood pressure (mmHg)", s.sbp);
    cont("eGFR (mL/min/1.73m2)", s.egfr);
    cont("HbA1c (%)", s.hba1c);
    out << "----------------------------------------------------------\n";
    line("CVD event rate", fmt(s.event_rate_pct, 2) + "%");
    line("Mean follow-up (years)", fmt(s.mean_follow_up_years, 2));
    return out.str();
}

void write_strata_csv(const std::filesystem::path& path,
                      std::span<const StratumSummary> strata, std::string_view key_name) {
    auto out = open_out(path);
    out << key_name
        << ",n,age_median,age_q1,age_q3,diabetes_pct,ckd_pct,af_pct,bmi_mean,bmi_sd,"
           "sbp_mean,sbp_sd,egfr_mean,egfr_sd,hba1c_mean,hba1c_sd,event_pct\n";
    for (const auto& s : strata) {
        out << s.key << ',' << s.n << ',' << fmt(s.age_median) << ',' << fmt(s.age_q1) << ','
            << fmt(s.age_q3) << ',' << fmt(s.diabetes_pct) << ',' << fmt(s.ckd_pct) << ','
            << fmt(s.af_pct) << ',' << fmt(s.bmi.mean) << ',' << fmt(s.bmi.sd) << ','
            << fmt(s.sbp.mean) << ',' << fmt(s.sbp.sd) << ',' << fmt(s.egfr.mean) << ','
            << fmt(s.egfr.sd) << ',' << fmt(s.hba1c.mean) << ',' << fmt(s.hba1c.sd) << ','
            << fmt(s.event_rate_pct) << '\n';
    }
}

void write_correlation_csv(const std::filesystem::path& path, const CorrelationMatrix& m) {
    auto out = open_out(path);
    out << "variable";
    for (const auto& name : m.names) {
        out << ',' << name;
    }
    out << '\n';
    for (std::size_t a = 0; a < m.names.size(); ++a) {
        out << m.names[a];
        for (std::size_t b = 0; b < m.names.size(); ++b) {
            const double v = m.r(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            out << ',' << (std::isnan(v) ? std::string("undefined") : fmt(v, 6));
        }
        out << '\n';
    }
}

void write_hr_table_csv(const std::filesystem::path& path, const CoxFitResult& fit) {
    auto out = open_out(path);
    out << "covariate,beta,se,hr,hr_lo95,hr_hi95,p_value\n";
    for (const auto& t : fit.terms) {
        out << t.name << ',' << fmt(t.beta, 6) << ',' << fmt(t.se, 6) << ',' << fmt(t.hr, 4)
            << ',' << fmt(t.hr_lo95, 4) << ',' << fmt(t.hr_hi95, 4) << ','
            << format_p_value(t.p) << '\n';
    }
}

void write_forest_csv(const std::filesystem::path& path, std::span<const ForestRow> rows) {
    auto out = open_out(path);
    out << "covariate,hr,lo95,hi95\n";
    for (const auto& r : rows) {
        out << r.display_name << ',' << fmt(r.hr, 4) << ',' << fmt(r.lo, 4) << ','
            << fmt(r.hi, 4) << '\n';
    }
}

void write_comparison_csv(const std::filesystem::path& path, const IrsdComparison& cmp) {
    auto out = open_out(path);
    out << "irsd_quintile,ckd_only_pct,t2dm_only_pct\n";
    if (!cmp.defined) {
        return;  // header only; a degenerate comparison carries no rows
    }
    for (int q = 1; q <= 5; ++q) {
        out << q << ',' << fmt(cmp.ckd_only_pct[q - 1]) << ','
            << fmt(cmp.t2dm_only_pct[q - 1]) << '\n';
    }
}

std::string quality_report_json(const QualityReport& r) {
    nlohmann::ordered_json j;
    j["patients"] = r.patients;
    j["chronic_rows"] = r.chronic_rows;
    j["measurement_rows"] = r.measurement_rows;
    j["missing_smoking"] = r.missing_smoking;
    j["converted_hba1c_units"] = r.converted_hba1c_units;
    j["unmatched_labels"] = r.unmatched_labels;
    j["unmatched_label_values"] = r.unmatched_label_values;
    j["orphan_chronic_rows"] = r.orphan_chronic_rows;
    j["orphan_measurement_rows"] = r.orphan_measurement_rows;
    j["orphan_patient_ids"] = r.orphan_patient_ids;
    j["unknown_descriptions"] = r.unknown_descriptions;
    j["patients_missing_biomarkers"] = r.patients_missing_biomarkers;
    j["unrecoverable"] = r.unrecoverable;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Tolerance manifest
// ---------------------------------------------------------------------------

std::vector<ToleranceCheck> load_tolerances(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open tolerance manifest: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("tolerance manifest " + path.string() + ": " + e.what());
    }
    std::vector<ToleranceCheck> checks;
    for (const auto& entry : j.at("checks")) {
        ToleranceCheck c;
        c.id = entry.at("id");
        c.metric = entry.at("metric");
        c.description = entry.value("description", "");
        if (entry.contains("target")) {
            c.target = entry.at("target").get<double>();
            c.tol = entry.at("tol").get<double>();
        } else {
            c.lo = entry.at("lo").get<double>();
            c.hi = entry.at("hi").get<double>();
        }
        checks.push_back(std::move(c));
    }
    return checks;
}

std::optional<double> MetricSet::get(const std::string& name) const {
    const auto it = values_.find(name);
    if (it == values_.end()) {
        return std::nullopt;
    }
    return it->second;
}

MetricSet MetricSet::from_inputs(std::span<const CohortRow> cohort,
                                 const CohortSummary& summary,
                                 std::span<const StratumSummary> irsd_strata,
                                 const CoxFitResult* fit, const EmrTables* emr,
                                 const Lexicon* lexicon,
                                 std::span<const ReconstructedRow> reconstructed) {
    MetricSet m;
    m.add("dm_prev_pct", summary.diabetes_pct);
    m.add("ckd_prev_pct", summary.ckd_pct);
    m.add("af_prev_pct", summary.af_pct);
    m.add("age_mean", summary.age.mean);
    m.add("bmi_mean", summary.bmi.mean);
    m.add("sbp_mean", summary.sbp.mean);
    m.add("egfr_mean", summary.egfr.mean);
    m.add("hba1c_mean", summary.hba1c.mean);
    m.add("smoking_non_pct", summary.smoking_non_pct);
    m.add("smoking_ex_pct", summary.smoking_ex_pct);
    m.add("smoking_current_pct", summary.smoking_current_pct);
    m.add("event_rate_pct", summary.event_rate_pct);
    m.add("mean_follow_up_years", summary.mean_follow_up_years);

    if (irsd_strata.size() == 5) {
        m.add("irsd_q1_dm_pct", irsd_strata[0].diabetes_pct);
        m.add("irsd_q5_dm_pct", irsd_strata[4].diabetes_pct);
        m.add("irsd_q1_bmi_mean", irsd_strata[0].bmi.mean);
        m.add("irsd_q5_sbp_mean", irsd_strata[4].sbp.mean);
        bool monotone = true;
        for (std::size_t q = 1; q < 5; ++q) {
            monotone = monotone &&
                       irsd_strata[q].diabetes_pct <= irsd_strata[q - 1].diabetes_pct;
        }
        m.add("dm_monotone_q1_to_q5", monotone ? 1.0 : 0.0);
    }

    if (fit != nullptr) {
        const auto add_hr = [&](const char* metric, const char* term) {
            for (const auto& t : fit->terms) {
                if (t.name == term) {
                    m.add(metric, t.hr);
                    return;
                }
            }
        };
        add_hr("hr_age", "age");
        add_hr("hr_af", "AF");
        add_hr("hr_ckd", "CKD");
        add_hr("hr_diabetes", "diabetes");
        add_hr("hr_hba1c", "HbA1c");
        add_hr("hr_bmi", "BMI");
        add_hr("hr_egfr", "eGFR");
        add_hr("hr_sbp", "SBP");
        add_hr("hr_smoke_current", "smoke_current");
        add_hr("hr_smoke_ex", "smoke_ex");
        add_hr("hr_irsd_1", "irsd_1");
        add_hr("hr_irsd_2", "irsd_2");
        add_hr("hr_irsd_3", "irsd_3");
        add_hr("hr_irsd_4", "irsd_4");
    }

    if (emr != nullptr) {
        std::size_t non = 0, missing = 0;
        for (const auto& row : emr->master) {
            non += row.smoking_status == "non";
            missing += row.smoking_status == kMissingSmoking;
        }
        if (non + missing > 0) {
            m.add("smoking_missing_frac_pct",
                  100.0 * static_cast<double>(missing) / static_cast<double>(non + missing));
        }
        std::size_t hba1c_rows = 0, mmol_rows = 0;
        for (const auto& row : emr->measurements) {
            if (row.measure == Measure::Hba1c) {
                ++hba1c_rows;
                mmol_rows += row.unit == kUnitMmolMol;
            }
        }
        if (hba1c_rows > 0) {
            m.add("hba1c_mmol_frac_pct",
                  100.0 * static_cast<double>(mmol_rows) / static_cast<double>(hba1c_rows));
        }
        if (lexicon != nullptr) {
            std::unordered_map<std::string, std::size_t> label_counts;
            std::size_t dm_rows = 0;
            for (const auto& row : emr->chronic) {
                if (classify_diagnosis(row.category, *lexicon) == Condition::Diabetes) {
                    ++dm_rows;
                    ++label_counts[row.category];
                }
            }
            if (dm_rows > 0) {
                std::size_t top = 0;
                for (const auto& [label, count] : label_counts) {
                    top = std::max(top, count);
                }
                m.add("dm_dominant_label_pct",
                      100.0 * static_cast<double>(top) / static_cast<double>(dm_rows));
            }
        }
    }

    if (!reconstructed.empty() && reconstructed.size() == cohort.size()) {
        // Reconstructed rows are sorted by patient id, which preserves the
        // source row order (the id encoding is strictly increasing).
        std::size_t flag_mismatch = 0, irsd_mismatch = 0, event_mismatch = 0;
        double hba1c_max = 0.0, egfr_max = 0.0, sbp_max = 0.0, age_max = 0.0, time_max = 0.0;
        for (std::size_t i = 0; i < cohort.size(); ++i) {
            const auto& src = cohort[i];
            const auto& rec = reconstructed[i];
            flag_mismatch += src.diabetes != rec.diabetes;
            flag_mismatch += src.ckd != rec.ckd;
            flag_mismatch += src.af != rec.af;
            irsd_mismatch += src.irsd_quintile != rec.irsd_quintile;
            event_mismatch += src.cvd_event != rec.cvd_event;
            hba1c_max = std::max(hba1c_max, std::abs(src.hba1c - rec.hba1c));
            egfr_max = std::max(egfr_max, std::abs(src.egfr - rec.egfr));
            sbp_max = std::max(sbp_max, std::abs(src.sbp - rec.sbp));
            age_max = std::max(age_max, std::abs(src.age - rec.age));
            if (src.cvd_event) {
                time_max = std::max(time_max, std::abs(src.cvd_time - rec.cvd_time));
            }
        }
        m.add("roundtrip_flag_mismatches", static_cast<double>(flag_mismatch));
        m.add("roundtrip_irsd_mismatches", static_cast<double>(irsd_mismatch));
        m.add("roundtrip_event_mismatches", static_cast<double>(event_mismatch));
        m.add("roundtrip_hba1c_max_abs", hba1c_max);
        m.add("roundtrip_egfr_max_abs", egfr_max);
        m.add("roundtrip_sbp_max_abs", sbp_max);
        m.add("roundtrip_age_max_abs", age_max);
        m.add("roundtrip_event_time_max_abs", time_max);
    }

    return m;
}

std::vector<CheckResult> run_checks(std::span<const ToleranceCheck> checks,
                                    const MetricSet& metrics) {
    std::vector<CheckResult> out;
    for (const auto& c : checks) {
        CheckResult r;
        r.id = c.id;
        r.metric = c.metric;
        r.description = c.description;
        const auto value = metrics.get(c.metric);
        if (c.target) {
            r.bound = fmt(*c.target, 4) + " +/- " + fmt(*c.tol, 4);
        } else {
            r.bound = "[" + fmt(*c.lo, 4) + ", " + fmt(*c.hi, 4) + "]";
        }
        if (!value) {
            r.skipped = true;
        } else {
            r.value = *value;
            if (c.target) {
                r.pass = std::abs(*value - *c.target) <= *c.tol;
            } else {
                r.pass = *value >= *c.lo && *value <= *c.hi;
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string render_check_lines(std::span<const CheckResult> results) {
    std::ostringstream out;
    std::size_t passed = 0, failed = 0, skipped = 0;
    for (const auto& r : results) {
        if (r.skipped) {
            ++skipped;
            out << "SKIP  " << r.id << "  " << r.metric << "  (inputs not provided)\n";
            continue;
        }
        (r.pass ? passed : failed) += 1;
        out << (r.pass ? "PASS" : "FAIL") << "  " << r.id << "  " << r.metric << "  value "
            << fmt(r.value, 4) << "  expected " << r.bound;
        if (!r.description.empty()) {
            out << "  # " << r.description;
        }
        out << '\n';
    }
    out << "checks: " << passed << " passed, " << failed << " failed, " << skipped
        << " skipped\n";
    return out.str();
}

std::string check_results_json(std::span<const CheckResult> results) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["metric"] = r.metric;
        j["description"] = r.description;
        j["expected"] = r.bound;
        if (r.skipped) {
            j["status"] = "skipped";
        } else {
            j["value"] = r.value;
            j["status"] = r.pass ? "pass" : "fail";
        }
        arr.push_back(std::move(j));
    }
    nlohmann::ordered_json root;
    root["checks"] = std::move(arr);
    root["all_passed"] = all_passed(results);
    return root.dump(2) + "\n";
}

bool all_passed(std::span<const CheckResult> results) {
    return std::all_of(results.begin(), results.end(),
                       [](const CheckResult& r) { return r.skipped || r.pass; });
}

}  // namespace cvdsim
