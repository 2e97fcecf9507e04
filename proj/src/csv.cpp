#include "cvdsim/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "cvdsim/calendar.hpp"
#include "cvdsim/errors.hpp"

namespace cvdsim {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ParseError(context + ": cannot parse number '" + std::string(s) + "'");
    }
    return v;
}

std::int64_t parse_int(std::string_view s, const std::string& context) {
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ParseError(context + ": cannot parse integer '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // '\n' endings on all platforms
    if (!out) {
        throw Error("cannot open for writing: " + path.string());
    }
    return out;
}

class CsvReader {
public:
    CsvReader(const std::filesystem::path& path, std::string_view expected_header,
              std::size_t columns)
        : path_(path.string()), in_(path), columns_(columns) {
        if (!in_) {
            throw Error("cannot open for reading: " + path_);
        }
        std::string header;
        if (!std::getline(in_, header)) {
            throw DataContractError(path_ + ": empty file, expected header '" +
                                    std::string(expected_header) + "'");
        }
        if (!header.empty() && header.back() == '\r') {
            header.pop_back();
        }
        if (header != expected_header) {
            throw DataContractError(path_ + ": header mismatch, expected '" +
                                    std::string(expected_header) + "', got '" + header + "'");
        }
    }

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty()) {
                continue;
            }
            fields = split_csv_line(line);
            if (fields.size() != columns_) {
                throw DataContractError(context() + ": expected " + std::to_string(columns_) +
                                        " columns, got " + std::to_string(fields.size()));
            }
            return true;
        }
        return false;
    }

    std::string context() const { return path_ + ":" + std::to_string(line_no_ + 1); }

private:
    std::string path_;
    std::ifstream in_;
    std::size_t columns_;
    std::size_t line_no_ = 0;
};

int parse_flag(std::string_view s, const std::string& context) {
    if (s == "0") return 0;
    if (s == "1") return 1;
    throw ParseError(context + ": flag must be 0 or 1, got '" + std::string(s) + "'");
}

}  // namespace

void write_cohort_csv(const std::filesystem::path& path, std::span<const CohortRow> rows) {
    auto out = open_out(path);
    out << kCohortHeader << '\n';
    for (const auto& r : rows) {
        out << r.irsd_quintile << ',' << format_double(r.age) << ',' << to_string(r.smoking)
            << ',' << format_double(r.bmi) << ',' << (r.diabetes ? 1 : 0) << ','
            << (r.ckd ? 1 : 0) << ',' << format_double(r.hba1c) << ','
            << format_double(r.egfr) << ',' << format_double(r.sbp) << ',' << (r.af ? 1 : 0)
            << ',' << (r.cvd_event ? 1 : 0) << ',' << format_double(r.cvd_time) << '\n';
    }
}

std::vector<CohortRow> read_cohort_csv(const std::filesystem::path& path) {
    CsvReader reader(path, kCohortHeader, 12);
    std::vector<CohortRow> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const auto ctx = reader.context();
        CohortRow r;
        r.irsd_quintile = static_cast<int>(parse_int(f[0], ctx));
        r.age = parse_double(f[1], ctx);
        r.smoking = smoking_from_string(f[2]);
        r.bmi = parse_double(f[3], ctx);
        r.diabetes = parse_flag(f[4], ctx) != 0;
        r.ckd = parse_flag(f[5], ctx) != 0;
        r.hba1c = parse_double(f[6], ctx);
        r.egfr = parse_double(f[7], ctx);
        r.sbp = parse_double(f[8], ctx);
        r.af = parse_flag(f[9], ctx) != 0;
        r.cvd_event = parse_flag(f[10], ctx) != 0;
        r.cvd_time = parse_double(f[11], ctx);
        if (r.irsd_quintile < 1 || r.irsd_quintile > 5) {
            throw DataContractError(ctx + ": IRSD_quintile outside 1..5");
        }
        rows.push_back(r);
    }
    return rows;
}

void write_master_csv(const std::filesystem::path& path, std::span<const EmrMasterRow> rows) {
    auto out = open_out(path);
    out << kMasterHeader << '\n';
    for (const auto& r : rows) {
        out << r.patient_id << ',' << format_fixed2(r.age_at_2024) << ',' << r.irsd_quintile
            << ',' << r.smoking_status << ',' << r.cvd_event << ',' << r.cvd_time << '\n';
    }
}

std::vector<EmrMasterRow> read_master_csv(const std::filesystem::path& path) {
    CsvReader reader(path, kMasterHeader, 6);
    std::vector<EmrMasterRow> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const auto ctx = reader.context();
        EmrMasterRow r;
        r.patient_id = parse_int(f[0], ctx);
        r.age_at_2024 = parse_double(f[1], ctx);
        r.irsd_quintile = static_cast<int>(parse_int(f[2], ctx));
        r.smoking_status = f[3];
        r.cvd_event = parse_flag(f[4], ctx);
        r.cvd_time = f[5];
        parse_year_month(r.cvd_time);  // validate format early
        if (r.smoking_status != "non" && r.smoking_status != "current" &&
            r.smoking_status != "ex" && r.smoking_status != kMissingSmoking) {
            throw DataContractError(ctx + ": SMOKING_STATUS '" + r.smoking_status +
                                    "' not one of non/current/ex/N/A");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_chronic_csv(const std::filesystem::path& path,
                       std::span<const ChronicDiseaseRow> rows) {
    auto out = open_out(path);
    out << kChronicHeader << '\n';
    for (const auto& r : rows) {
        out << r.patient_id << ',' << r.category << ',' << format_year_month(r.date) << '\n';
    }
}

std::vector<ChronicDiseaseRow> read_chronic_csv(const std::filesystem::path& path) {
    CsvReader reader(path, kChronicHeader, 3);
    std::vector<ChronicDiseaseRow> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        rows.push_back({parse_int(f[0], reader.context()), f[1], parse_year_month(f[2])});
    }
    return rows;
}

void write_measurement_csv(const std::filesystem::path& path,
                           std::span<const MeasurementRow> rows) {
    auto out = open_out(path);
    out << kMeasurementHeader << '\n';
    for (const auto& r : rows) {
        out << r.patient_id << ',' << to_string(r.measure) << ',' << format_double(r.value)
            << ',' << r.description << ',' << format_year_month(r.date) << ',' << r.unit
            << '\n';
    }
}

std::vector<MeasurementRow> read_measurement_csv(const std::filesystem::path& path) {
    CsvReader reader(path, kMeasurementHeader, 6);
    std::vector<MeasurementRow> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const auto ctx = reader.context();
        MeasurementRow r;
        r.patient_id = parse_int(f[0], ctx);
        r.measure = measure_from_string(f[1]);
        r.value = parse_double(f[2], ctx);
        r.description = f[3];
        r.date = parse_year_month(f[4]);
        r.unit = f[5];
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_reconstructed_csv(const std::filesystem::path& path,
                             std::span<const ReconstructedRow> rows) {
    auto out = open_out(path);
    out << kReconstructedHeader << '\n';
    for (const auto& r : rows) {
        out << r.irsd_quintile << ',' << format_double(r.age) << ','
            << (r.smoking ? to_string(*r.smoking) : kMissingSmoking) << ','
            << (r.diabetes ? 1 : 0) << ',' << (r.ckd ? 1 : 0) << ','
            << format_double(r.hba1c) << ',' << format_double(r.egfr) << ','
            << format_double(r.sbp) << ',' << (r.af ? 1 : 0) << ',' << (r.cvd_event ? 1 : 0)
            << ',' << format_double(r.cvd_time) << '\n';
    }
}

std::vector<ReconstructedRow> read_reconstructed_csv(const std::filesystem::path& path) {
    CsvReader reader(path, kReconstructedHeader, 11);
    std::vector<ReconstructedRow> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const auto ctx = reader.context();
        ReconstructedRow r;
        r.irsd_quintile = static_cast<int>(parse_int(f[0], ctx));
        r.age = parse_double(f[1], ctx);
        r.smoking = f[2] == kMissingSmoking ? std::optional<Smoking>{}
                                            : smoking_from_string(f[2]);
        r.diabetes = parse_flag(f[3], ctx) != 0;
        r.ckd = parse_flag(f[4], ctx) != 0;
        r.hba1c = parse_double(f[5], ctx);
        r.egfr = parse_double(f[6], ctx);
        r.sbp = parse_double(f[7], ctx);
        r.af = parse_flag(f[8], ctx) != 0;
        r.cvd_event = parse_flag(f[9], ctx) != 0;
        r.cvd_time = parse_double(f[10], ctx);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace cvdsim
