#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cvdsim/cohort.hpp"
#include "cvdsim/emr.hpp"
#include "cvdsim/reconstruct.hpp"

namespace cvdsim {

/// Shortest round-trip decimal representation (std::to_chars); parsing the
/// result recovers the identical double.
std::string format_double(double v);

/// Fixed two-decimal formatting (ages in the master table).
std::string format_fixed2(double v);

double parse_double(std::string_view s, const std::string& context);
std::int64_t parse_int(std::string_view s, const std::string& context);

std::vector<std::string> split_csv_line(std::string_view line);

inline constexpr std::string_view kCohortHeader =
    "IRSD_quintile,Age,smoking_status,BMI,diabetes,CKD,HbA1c,eGFR,SBP,AF,cvd_event,cvd_time";
inline constexpr std::string_view kMasterHeader =
    "Patient_ID,Age_At_2024,IRSD_Quintile,SMOKING_STATUS,CVD_Event,CVD_Time";
inline constexpr std::string_view kChronicHeader = "Patient_ID,Category,Date";
inline constexpr std::string_view kMeasurementHeader =
    "Patient_ID,Measure,Value,Description,Date,Unit";
inline constexpr std::string_view kReconstructedHeader =
    "IRSD_quintile,Age,smoking_status,diabetes,CKD,HbA1c,eGFR,SBP,AF,cvd_event,cvd_time";

void write_cohort_csv(const std::filesystem::path& path, std::span<const CohortRow> rows);
std::vector<CohortRow> read_cohort_csv(const std::filesystem::path& path);

void write_master_csv(const std::filesystem::path& path, std::span<const EmrMasterRow> rows);
std::vector<EmrMasterRow> read_master_csv(const std::filesystem::path& path);

void write_chronic_csv(const std::filesystem::path& path,
                       std::span<const ChronicDiseaseRow> rows);
std::vector<ChronicDiseaseRow> read_chronic_csv(const std::filesystem::path& path);

void write_measurement_csv(const std::filesystem::path& path,
                           std::span<const MeasurementRow> rows);
std::vector<MeasurementRow> read_measurement_csv(const std::filesystem::path& path);

void write_reconstructed_csv(const std::filesystem::path& path,
                             std::span<const ReconstructedRow> rows);
std::vector<ReconstructedRow> read_reconstructed_csv(const std::filesystem::path& path);

}  // namespace cvdsim
