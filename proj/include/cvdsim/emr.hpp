#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cvdsim/calendar.hpp"
#include "cvdsim/cohort.hpp"
#include "cvdsim/lexicon.hpp"
#include "cvdsim/rng.hpp"

namespace cvdsim {

enum class Measure : std::uint8_t { Hba1c = 0, Egfr = 1, Sbp = 2 };

std::string_view to_string(Measure m);
Measure measure_from_string(std::string_view s);

inline constexpr std::string_view kUnitPercent = "%";
inline constexpr std::string_view kUnitMmolMol = "mmol/mol";
inline constexpr std::string_view kUnitMmHg = "mmHg";
inline constexpr std::string_view kUnitEgfr = "mL/min/1.73m2";
inline constexpr std::string_view kMissingSmoking = "N/A";
inline constexpr std::string_view kCensorMonth = "2022-12";

struct EmrMasterRow {
    std::int64_t patient_id = 0;
    double age_at_2024 = 0.0;  // baseline age + 7, rounded to 2 d.p.
    int irsd_quintile = 0;
    std::string smoking_status;  // "non", "current", "ex", or "N/A"
    int cvd_event = 0;
    std::string cvd_time;  // YYYY-MM; censored rows exactly "2022-12"
};

struct ChronicDiseaseRow {
    std::int64_t patient_id = 0;
    std::string category;  // free-text disease label
    YearMonth date;
};

struct MeasurementRow {
    std::int64_t patient_id = 0;
    Measure measure = Measure::Hba1c;
    double value = 0.0;
    std::string description;
    YearMonth date;
    std::string unit;
};

/// Messiness constants of the transform; vocabularies come from the lexicon.
struct MessinessConfig {
    double smoking_missing_frac = 0.1566;  // applied to non-smokers only
    double hba1c_convert_frac = 0.05;      // % -> mmol/mol conversions
    YearMonth date_min{2012, 1};
    YearMonth date_max{2016, 12};
};

struct EmrTables {
    std::vector<EmrMasterRow> master;
    std::vector<ChronicDiseaseRow> chronic;
    std::vector<MeasurementRow> measurements;
};

/// Synthetic identifier for source row index i: (i^2 - 77) * 3 + 500.
/// Strictly increasing, hence injective; 64-bit (exceeds 2^32 for large i).
std::int64_t encode_patient_id(std::int64_t index);

/// HbA1c percent -> IFCC mmol/mol.
double hba1c_percent_to_mmol(double percent);

std::vector<EmrMasterRow> build_master(std::span<const CohortRow> cohort,
                                       const MessinessConfig& config,
                                       std::uint64_t master_seed);

std::vector<ChronicDiseaseRow> build_chronic(std::span<const CohortRow> cohort,
                                             const Lexicon& lexicon,
                                             const MessinessConfig& config,
                                             std::uint64_t master_seed);

std::vector<MeasurementRow> build_measurements(std::span<const CohortRow> cohort,
                                               const Lexicon& lexicon,
                                               const MessinessConfig& config,
                                               std::uint64_t master_seed);

/// All three tables in one pass.
EmrTables messify(std::span<const CohortRow> cohort, const Lexicon& lexicon,
                  const MessinessConfig& config, std::uint64_t master_seed);

}  // namespace cvdsim
