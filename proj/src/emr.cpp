#include "cvdsim/emr.hpp"

#include <algorithm>
#include <cmath>

#include "cvdsim/errors.hpp"

namespace cvdsim {

std::string_view to_string(Measure m) {
    switch (m) {
        case Measure::Hba1c: return "HbA1c";
        case Measure::Egfr: return "eGFR";
        case Measure::Sbp: return "SBP";
    }
    throw InvalidParameterError("invalid measure value");
}

Measure measure_from_string(std::string_view s) {
    if (s == "HbA1c") return Measure::Hba1c;
    if (s == "eGFR") return Measure::Egfr;
    if (s == "SBP") return Measure::Sbp;
    throw ParseError("unknown measure: '" + std::string(s) + "'");
}

std::int64_t encode_patient_id(std::int64_t index) {
    if (index < 0) {
        throw InvalidParameterError("patient index must be >= 0");
    }
    return (index * index - 77) * 3 + 500;
}

double hba1c_percent_to_mmol(double percent) {
    return (percent - 2.15) * 10.929;
}

namespace {

double round2(double x) {
    return std::round(x * 100.0) / 100.0;
}

int months_in_range(const MessinessConfig& c) {
    return (c.date_max.year - c.date_min.year) * 12 + (c.date_max.month - c.date_min.month) + 1;
}

YearMonth month_at(const MessinessConfig& c, std::uint64_t offset) {
    const int idx = c.date_min.month - 1 + static_cast<int>(offset);
    return {c.date_min.year + idx / 12, idx % 12 + 1};
}

YearMonth uniform_month(RngStream& stream, const MessinessConfig& c) {
    return month_at(c, stream.next_below(static_cast<std::uint64_t>(months_in_range(c))));
}

// Uniformly chosen k distinct indices out of the given pool (partial
// Fisher-Yates on a copy), used for exact-fraction selections.
std::vector<std::size_t> choose_k(RngStream& stream, std::vector<std::size_t> pool,
                                  std::size_t k) {
    k = std::min(k, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(stream.next_below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

std::string draw_label(RngStream& stream, const LabelDistribution& dist) {
    return dist.labels[stream.next_categorical(dist.probs)];
}

template <typename Row>
void apply_permutation(std::vector<Row>& rows, const std::vector<std::size_t>& perm) {
    std::vector<Row> shuffled(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        shuffled[i] = std::move(rows[perm[i]]);
    }
    rows = std::move(shuffled);
}

}  // namespace

std::vector<EmrMasterRow> build_master(std::span<const CohortRow> cohort,
                                       const MessinessConfig& config,
                                       std::uint64_t master_seed) {
    std::vector<EmrMasterRow> out(cohort.size());
    std::vector<std::size_t> non_smoker_rows;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const auto& src = cohort[i];
        auto& row = out[i];
        row.patient_id = encode_patient_id(static_cast<std::int64_t>(i));
        row.age_at_2024 = round2(src.age + 7.0);
        row.irsd_quintile = src.irsd_quintile;
        row.smoking_status = std::string(to_string(src.smoking));
        row.cvd_event = src.cvd_event ? 1 : 0;
        row.cvd_time = src.cvd_event ? format_year_month(year_month_from_years(src.cvd_time))
                                     : std::string(kCensorMonth);
        if (src.smoking == Smoking::Non) {
            non_smoker_rows.push_back(i);
        }
    }

    auto s_missing = derive_stream(master_seed, "smoking_missing");
    const auto k = static_cast<std::size_t>(
        std::llround(config.smoking_missing_frac * static_cast<double>(non_smoker_rows.size())));
    for (std::size_t i : choose_k(s_missing, non_smoker_rows, k)) {
        out[i].smoking_status = std::string(kMissingSmoking);
    }
    return out;
}

std::vector<ChronicDiseaseRow> build_chronic(std::span<const CohortRow> cohort,
                                             const Lexicon& lexicon,
                                             const MessinessConfig& config,
                                             std::uint64_t master_seed) {
    auto s_label_dm = derive_stream(master_seed, "label_diabetes");
    auto s_label_ckd = derive_stream(master_seed, "label_ckd");
    auto s_label_af = derive_stream(master_seed, "label_af");
    auto s_date = derive_stream(master_seed, "chronic_date");

    // One row per set flag, emitted condition-by-condition like the source
    // long-form expansion, then permuted.
    std::vector<ChronicDiseaseRow> rows;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        if (cohort[i].diabetes) {
            rows.push_back({encode_patient_id(static_cast<std::int64_t>(i)),
                            draw_label(s_label_dm, lexicon.diabetes_terms), {}});
        }
    }
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        if (cohort[i].ckd) {
            rows.push_back({encode_patient_id(static_cast<std::int64_t>(i)),
                            draw_label(s_label_ckd, lexicon.ckd_terms), {}});
        }
    }
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        if (cohort[i].af) {
            rows.push_back({encode_patient_id(static_cast<std::int64_t>(i)),
                            draw_label(s_label_af, lexicon.af_terms), {}});
        }
    }
    for (auto& row : rows) {
        row.date = uniform_month(s_date, config);
    }

    auto s_shuffle = derive_stream(master_seed, "shuffle_chronic");
    apply_permutation(rows, s_shuffle.permutation(rows.size()));
    return rows;
}

std::vector<MeasurementRow> build_measurements(std::span<const CohortRow> cohort,
                                               const Lexicon& lexicon,
                                               const MessinessConfig& config,
                                               std::uint64_t master_seed) {
    const std::size_t n = cohort.size();
    std::vector<MeasurementRow> rows;
    rows.reserve(3 * n);

    auto s_desc_hba1c = derive_stream(master_seed, "desc_hba1c");
    auto s_desc_egfr = derive_stream(master_seed, "desc_egfr");
    auto s_desc_sbp = derive_stream(master_seed, "desc_sbp");
    auto s_date = derive_stream(master_seed, "meas_date");

    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back({encode_patient_id(static_cast<std::int64_t>(i)), Measure::Hba1c,
                        cohort[i].hba1c, draw_label(s_desc_hba1c, lexicon.hba1c_descriptions),
                        {}, std::string(kUnitPercent)});
    }
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back({encode_patient_id(static_cast<std::int64_t>(i)), Measure::Egfr,
                        cohort[i].egfr, draw_label(s_desc_egfr, lexicon.egfr_descriptions),
                        {}, std::string(kUnitEgfr)});
    }
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back({encode_patient_id(static_cast<std::int64_t>(i)), Measure::Sbp,
                        cohort[i].sbp, draw_label(s_desc_sbp, lexicon.sbp_descriptions),
                        {}, std::string(kUnitMmHg)});
    }
    for (auto& row : rows) {
        row.date = uniform_month(s_date, config);
    }

    // Convert an exact 5% subsample of HbA1c rows to mmol/mol.
    auto s_convert = derive_stream(master_seed, "hba1c_convert");
    std::vector<std::size_t> hba1c_rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        hba1c_rows[i] = i;  // HbA1c block occupies the first n rows
    }
    const auto k = static_cast<std::size_t>(
        std::llround(config.hba1c_convert_frac * static_cast<double>(n)));
    for (std::size_t i : choose_k(s_convert, hba1c_rows, k)) {
        rows[i].value = hba1c_percent_to_mmol(rows[i].value);
        rows[i].unit = std::string(kUnitMmolMol);
    }

    auto s_shuffle = derive_stream(master_seed, "shuffle_meas");
    apply_permutation(rows, s_shuffle.permutation(rows.size()));
    return rows;
}

EmrTables messify(std::span<const CohortRow> cohort, const Lexicon& lexicon,
                  const MessinessConfig& config, std::uint64_t master_seed) {
    return {build_master(cohort, config, master_seed),
            build_chronic(cohort, lexicon, config, master_seed),
            build_measurements(cohort, lexicon, config, master_seed)};
}

}  // namespace cvdsim
