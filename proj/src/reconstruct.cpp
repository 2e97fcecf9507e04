#include "cvdsim/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "cvdsim/calendar.hpp"
#include "cvdsim/errors.hpp"

namespace cvdsim {

double harmonise_hba1c(double value, std::string_view unit) {
    if (unit == kUnitPercent) {
        return value;
    }
    if (unit == kUnitMmolMol) {
        return value / 10.929 + 2.15;
    }
    throw DataContractError("HbA1c row has unknown unit '" + std::string(unit) + "'");
}

double restore_time(std::string_view cvd_time_ym, bool /*cvd_event*/) {
    return years_from_year_month(parse_year_month(cvd_time_ym));
}

std::pair<std::vector<ReconstructedRow>, QualityReport> rebuild_cohort(
    std::span<const EmrMasterRow> master, std::span<const ChronicDiseaseRow> chronic,
    std::span<const MeasurementRow> measurements, const Lexicon& lexicon) {
    QualityReport report;
    report.patients = master.size();
    report.chronic_rows = chronic.size();
    report.measurement_rows = measurements.size();

    std::vector<ReconstructedRow> rows(master.size());
    std::unordered_map<std::int64_t, std::size_t> index;
    index.reserve(master.size());
    for (std::size_t i = 0; i < master.size(); ++i) {
        const auto& m = master[i];
        if (!index.emplace(m.patient_id, i).second) {
            throw DataContractError("duplicate patient_id " + std::to_string(m.patient_id) +
                                    " in master table");
        }
        auto& r = rows[i];
        r.patient_id = m.patient_id;
        r.age = m.age_at_2024 - 7.0;
        r.irsd_quintile = m.irsd_quintile;
        if (m.smoking_status == kMissingSmoking) {
            r.smoking = std::nullopt;
            ++report.missing_smoking;
        } else {
            r.smoking = smoking_from_string(m.smoking_status);
        }
        r.cvd_event = m.cvd_event != 0;
        r.cvd_time = restore_time(m.cvd_time, r.cvd_event);
    }

    std::unordered_set<std::int64_t> orphan_ids;

    // Presence-only flags: any matching diagnosis row sets the indicator;
    // unmatched labels are reported, never guessed into a condition.
    for (const auto& c : chronic) {
        const auto it = index.find(c.patient_id);
        if (it == index.end()) {
            ++report.orphan_chronic_rows;
            orphan_ids.insert(c.patient_id);
            continue;
        }
        const auto condition = classify_diagnosis(c.category, lexicon);
        if (!condition) {
            ++report.unmatched_labels;
            if (report.unmatched_label_values.size() < 20 &&
                std::find(report.unmatched_label_values.begin(),
                          report.unmatched_label_values.end(),
                          c.category) == report.unmatched_label_values.end()) {
                report.unmatched_label_values.push_back(c.category);
            }
            continue;
        }
        auto& r = rows[it->second];
        switch (*condition) {
            case Condition::Diabetes: r.diabetes = true; break;
            case Condition::Ckd: r.ckd = true; break;
            case Condition::Af: r.af = true; break;
        }
    }

    // One canonical value per (patient, biomarker); duplicates are a hard
    // contract violation rather than a silent keep-first.
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(measurements.size());
    const auto lexicon_has = [](const LabelDistribution& d, const std::string& s) {
        return std::find(d.labels.begin(), d.labels.end(), s) != d.labels.end();
    };
    for (const auto& m : measurements) {
        const auto it = index.find(m.patient_id);
        if (it == index.end()) {
            ++report.orphan_measurement_rows;
            orphan_ids.insert(m.patient_id);
            continue;
        }
        const auto key = static_cast<std::uint64_t>(it->second) * 4u +
                         static_cast<std::uint64_t>(m.measure);
        if (!seen.insert(key).second) {
            throw DataContractError("duplicate measurement for patient " +
                                    std::to_string(m.patient_id) + ", measure " +
                                    std::string(to_string(m.measure)));
        }
        auto& r = rows[it->second];
        switch (m.measure) {
            case Measure::Hba1c:
                if (m.unit == kUnitMmolMol) {
                    ++report.converted_hba1c_units;
                }
                r.hba1c = harmonise_hba1c(m.value, m.unit);
                if (!lexicon_has(lexicon.hba1c_descriptions, m.description)) {
                    ++report.unknown_descriptions;
                }
                break;
            case Measure::Egfr:
                if (m.unit != kUnitEgfr) {
                    throw DataContractError("eGFR row for patient " +
                                            std::to_string(m.patient_id) +
                                            " has unit '" + m.unit + "'");
                }
                r.egfr = m.value;
                if (!lexicon_has(lexicon.egfr_descriptions, m.description)) {
                    ++report.unknown_descriptions;
                }
                break;
            case Measure::Sbp:
                if (m.unit != kUnitMmHg) {
                    throw DataContractError("SBP row for patient " +
                                            std::to_string(m.patient_id) +
                                            " has unit '" + m.unit + "'");
                }
                r.sbp = m.value;
                if (!lexicon_has(lexicon.sbp_descriptions, m.description)) {
                    ++report.unknown_descriptions;
                }
                break;
        }
    }

    for (const auto& r : rows) {
        if (std::isnan(r.hba1c) || std::isnan(r.egfr) || std::isnan(r.sbp)) {
            ++report.patients_missing_biomarkers;
        }
    }
    report.orphan_patient_ids.assign(orphan_ids.begin(), orphan_ids.end());
    std::sort(report.orphan_patient_ids.begin(), report.orphan_patient_ids.end());

    std::sort(rows.begin(), rows.end(),
              [](const ReconstructedRow& a, const ReconstructedRow& b) {
                  return a.patient_id < b.patient_id;
              });
    return {std::move(rows), std::move(report)};
}

}  // namespace cvdsim
