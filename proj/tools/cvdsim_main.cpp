// Command-line entry point: generate / messify / reconstruct / validate / report.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvdsim/csv.hpp"
#include "cvdsim/defaults.hpp"
#include "cvdsim/errors.hpp"
#include "cvdsim/events.hpp"
#include "cvdsim/lexicon.hpp"
#include "cvdsim/params.hpp"
#include "cvdsim/reports.hpp"
#include "cvdsim/stats.hpp"

namespace fs = std::filesystem;
using namespace cvdsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDataContract = 2;
constexpr int kExitNumerical = 3;

struct RunConfig {
    std::uint64_t seed = kDefaultMasterSeed;
    std::size_t n = kDefaultCohortSize;
    double target_incidence = kDefaultTargetIncidence;
    fs::path out = "out";
    fs::path lexicon;     // empty -> built-in default lexicon
    fs::path params;      // empty -> built-in default parameters
    fs::path tolerances;  // empty -> built-in default manifest
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

// INI-style `key = value` lines; '#' or ';' comments; [sections] ignored.
void apply_config_file(const fs::path& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidParameterError("cannot open config file: " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.resize(comment);
        line = trim(line);
        if (line.empty() || line.front() == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidParameterError(path.string() + ":" + std::to_string(line_no) +
                                        ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "n") {
            cfg.n = std::stoull(value);
        } else if (key == "target_incidence") {
            cfg.target_incidence = std::stod(value);
        } else if (key == "out") {
            cfg.out = value;
        } else if (key == "lexicon") {
            cfg.lexicon = value;
        } else if (key == "params") {
            cfg.params = value;
        } else if (key == "tolerances") {
            cfg.tolerances = value;
        } else {
            throw InvalidParameterError(path.string() + ":" + std::to_string(line_no) +
                                        ": unknown config key '" + key + "'");
        }
    }
}

Lexicon resolve_lexicon(const RunConfig& cfg) {
    return cfg.lexicon.empty() ? Lexicon::defaults() : load_lexicon(cfg.lexicon);
}

ParameterSet resolve_params(const RunConfig& cfg) {
    return cfg.params.empty() ? ParameterSet::defaults() : load_parameters(cfg.params);
}

void require_exists(const fs::path& path, const std::string& what) {
    if (!fs::exists(path)) {
        throw DataContractError(what + " not found: " + path.string());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open for writing: " + path.string());
    }
    out << text;
}

int cmd_generate(const RunConfig& cfg) {
    if (cfg.n < 1) {
        throw InvalidParameterError("cohort size n must be >= 1");
    }
    if (!(cfg.target_incidence > 0.0 && cfg.target_incidence < 1.0)) {
        throw InvalidParameterError("target incidence must lie in (0, 1)");
    }
    fs::create_directories(cfg.out);
    const auto params = resolve_params(cfg);
    CalibrationReport report;
    const auto cohort = generate_cohort(cfg.seed, cfg.n, params, cfg.target_incidence, &report);
    write_cohort_csv(cfg.out / "data_asset_1.csv", cohort);
    write_text(cfg.out / "calibration.json", calibration_report_json(report));
    std::cout << "wrote " << (cfg.out / "data_asset_1.csv").string() << " (" << cohort.size()
              << " rows), baseline rate " << report.baseline_rate << " after "
              << report.iterations << " bisection steps\n";
    return kExitOk;
}

int cmd_messify(const RunConfig& cfg, const fs::path& cohort_path) {
    require_exists(cohort_path, "cohort file");
    fs::create_directories(cfg.out);
    const auto cohort = read_cohort_csv(cohort_path);
    const auto lexicon = resolve_lexicon(cfg);
    const auto tables = messify(cohort, lexicon, MessinessConfig{}, cfg.seed);
    write_master_csv(cfg.out / "patient_master_summary.csv", tables.master);
    write_chronic_csv(cfg.out / "patient_chronic_diseases.csv", tables.chronic);
    write_measurement_csv(cfg.out / "patient_meas_and_path.csv", tables.measurements);
    std::cout << "wrote master (" << tables.master.size() << "), chronic ("
              << tables.chronic.size() << "), measurements (" << tables.measurements.size()
              << ") under " << cfg.out.string() << '\n';
    return kExitOk;
}

int cmd_reconstruct(const RunConfig& cfg, const fs::path& master_path,
                    const fs::path& chronic_path, const fs::path& meas_path) {
    require_exists(master_path, "master table");
    require_exists(chronic_path, "chronic table");
    require_exists(meas_path, "measurement table");
    fs::create_directories(cfg.out);
    const auto master = read_master_csv(master_path);
    const auto chronic = read_chronic_csv(chronic_path);
    const auto measurements = read_measurement_csv(meas_path);
    const auto lexicon = resolve_lexicon(cfg);
    const auto [rows, report] = rebuild_cohort(master, chronic, measurements, lexicon);
    write_reconstructed_csv(cfg.out / "reconstructed_cohort.csv", rows);
    write_text(cfg.out / "quality_report.json", quality_report_json(report));
    std::cout << "reconstructed " << rows.size() << " patients; " << report.unmatched_labels
              << " unmatched labels, " << report.missing_smoking << " missing smoking, "
              << report.converted_hba1c_units << " unit conversions\n";
    if (!report.orphan_patient_ids.empty()) {
        std::cerr << "error: " << report.orphan_patient_ids.size()
                  << " orphan patient ids (first: " << report.orphan_patient_ids.front()
                  << "); see quality_report.json\n";
        return kExitDataContract;
    }
    return kExitOk;
}

int cmd_validate(const RunConfig& cfg, const fs::path& cohort_path, const fs::path& master_path,
                 const fs::path& chronic_path, const fs::path& meas_path,
                 const fs::path& reconstructed_path) {
    require_exists(cohort_path, "cohort file");
    fs::create_directories(cfg.out);
    const auto cohort = read_cohort_csv(cohort_path);
    if (cohort.empty()) {
        throw DataContractError("cohort file has no rows: " + cohort_path.string());
    }
    const auto lexicon = resolve_lexicon(cfg);

    const auto summary = summarize_cohort(cohort);
    const auto irsd_strata = stratify(cohort, StratifyKey::IrsdQuintile);
    const auto age_strata = stratify(cohort, StratifyKey::AgeBand);
    const auto correlations = correlation_matrix(cohort);
    const auto fit = fit_cox(cohort, CoxOptions{});
    const auto forest = emit_forest_data(fit);

    write_summary_csv(cfg.out / "summary.csv", summary);
    write_text(cfg.out / "summary.txt", format_summary_text(summary));
    write_strata_csv(cfg.out / "strata_irsd.csv", irsd_strata, "irsd_quintile");
    write_strata_csv(cfg.out / "strata_age_band.csv", age_strata, "age_band");
    write_correlation_csv(cfg.out / "correlations.csv", correlations);
    write_hr_table_csv(cfg.out / "cox_hr.csv", fit);
    write_forest_csv(cfg.out / "forest_data.csv", forest);

    EmrTables emr;
    const EmrTables* emr_ptr = nullptr;
    if (!master_path.empty()) {
        require_exists(master_path, "master table");
        require_exists(chronic_path, "chronic table");
        emr.master = read_master_csv(master_path);
        emr.chronic = read_chronic_csv(chronic_path);
        if (!meas_path.empty()) {
            emr.measurements = read_measurement_csv(meas_path);
        }
        emr_ptr = &emr;
        write_comparison_csv(cfg.out / "irsd_comparison.csv",
                             cohort_compare_irsd(emr.master, emr.chronic, lexicon));
    }

    std::vector<ReconstructedRow> reconstructed;
    if (!reconstructed_path.empty()) {
        require_exists(reconstructed_path, "reconstructed cohort");
        reconstructed = read_reconstructed_csv(reconstructed_path);
        const auto recon_fit = fit_cox_reconstructed(reconstructed, CoxOptions{});
        write_hr_table_csv(cfg.out / "cox_hr_reconstructed.csv", recon_fit);
        // Clean-vs-reconstructed hazard-ratio agreement, relative per covariate.
        std::ofstream agree(cfg.out / "cox_hr_agreement.csv", std::ios::binary);
        agree << "covariate,hr_clean,hr_reconstructed,rel_diff\n";
        for (const auto& t : recon_fit.terms) {
            const auto& clean = fit.term(t.name);
            const double rel = std::abs(t.hr - clean.hr) / clean.hr;
            agree << t.name << ',' << clean.hr << ',' << t.hr << ',' << rel << '\n';
        }
    }

    const auto checks = cfg.tolerances.empty()
                            ? load_tolerances_builtin()
                            : load_tolerances(cfg.tolerances);
    const auto metrics =
        MetricSet::from_inputs(cohort, summary, irsd_strata, &fit, emr_ptr,
                               &lexicon, reconstructed);
    const auto results = run_checks(checks, metrics);
    const auto lines = render_check_lines(results);
    std::cout << lines;
    write_text(cfg.out / "validation_results.json", check_results_json(results));
    write_text(cfg.out / "validation_results.txt", lines);

    return all_passed(results) ? kExitOk : kExitNumerical;
}

int cmd_report(const RunConfig& cfg, const fs::path& cohort_path) {
    require_exists(cohort_path, "cohort file");
    fs::create_directories(cfg.out);
    const auto cohort = read_cohort_csv(cohort_path);
    if (cohort.empty()) {
        throw DataContractError("cohort file has no rows: " + cohort_path.string());
    }
    const auto summary = summarize_cohort(cohort);
    const auto text = format_summary_text(summary);
    write_summary_csv(cfg.out / "summary.csv", summary);
    write_text(cfg.out / "summary.txt", text);
    write_strata_csv(cfg.out / "strata_irsd.csv", stratify(cohort, StratifyKey::IrsdQuintile),
                     "irsd_quintile");
    write_strata_csv(cfg.out / "strata_age_band.csv", stratify(cohort, StratifyKey::AgeBand),
                     "age_band");
    std::cout << text;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic synthetic cardiovascular cohort engine"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    std::string seed_str;
    std::optional<std::size_t> n_flag;
    std::optional<double> incidence_flag;
    std::string out_flag, lexicon_flag, params_flag, tolerances_flag;

    app.add_option("--config", config_path, "INI-style config file (flags override it)");
    app.add_option("--seed", seed_str, "master seed");
    app.add_option("--n", n_flag, "cohort size");
    app.add_option("--target-incidence", incidence_flag, "five-year incidence target");
    app.add_option("--out", out_flag, "output directory");
    app.add_option("--lexicon", lexicon_flag, "lexicon JSON file");
    app.add_option("--params", params_flag, "parameter JSON file");
    app.add_option("--tolerances", tolerances_flag, "tolerance manifest JSON file");

    auto* generate = app.add_subcommand("generate", "generate the clean cohort CSV");
    std::string cohort_path, master_path, chronic_path, meas_path, reconstructed_path;
    auto* messify_cmd = app.add_subcommand("messify", "split a cohort into the EMR tables");
    messify_cmd->add_option("--cohort", cohort_path, "clean cohort CSV")->required();
    auto* reconstruct_cmd =
        app.add_subcommand("reconstruct", "rebuild a cohort from the EMR tables");
    reconstruct_cmd->add_option("--master", master_path, "master summary CSV")->required();
    reconstruct_cmd->add_option("--chronic", chronic_path, "chronic diseases CSV")->required();
    reconstruct_cmd->add_option("--measurements", meas_path, "measurements CSV")->required();
    auto* validate_cmd =
        app.add_subcommand("validate", "statistical reports plus tolerance checks");
    validate_cmd->add_option("--cohort", cohort_path, "clean cohort CSV")->required();
    validate_cmd->add_option("--master", master_path, "master summary CSV");
    validate_cmd->add_option("--chronic", chronic_path, "chronic diseases CSV");
    validate_cmd->add_option("--measurements", meas_path, "measurements CSV");
    validate_cmd->add_option("--reconstructed", reconstructed_path, "reconstructed cohort CSV");
    auto* report_cmd = app.add_subcommand("report", "summary and stratification tables");
    report_cmd->add_option("--cohort", cohort_path, "cohort CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (!config_path.empty()) {
            apply_config_file(config_path, cfg);
        }
        if (!seed_str.empty()) cfg.seed = std::stoull(seed_str);
        if (n_flag) cfg.n = *n_flag;
        if (incidence_flag) cfg.target_incidence = *incidence_flag;
        if (!out_flag.empty()) cfg.out = out_flag;
        if (!lexicon_flag.empty()) cfg.lexicon = lexicon_flag;
        if (!params_flag.empty()) cfg.params = params_flag;
        if (!tolerances_flag.empty()) cfg.tolerances = tolerances_flag;

        if (generate->parsed()) {
            return cmd_generate(cfg);
        }
        if (messify_cmd->parsed()) {
            return cmd_messify(cfg, cohort_path);
        }
        if (reconstruct_cmd->parsed()) {
            return cmd_reconstruct(cfg, master_path, chronic_path, meas_path);
        }
        if (validate_cmd->parsed()) {
            return cmd_validate(cfg, cohort_path, master_path, chronic_path, meas_path,
                                reconstructed_path);
        }
        if (report_cmd->parsed()) {
            return cmd_report(cfg, cohort_path);
        }
        std::cerr << "error: no subcommand\n";
        return kExitUsage;
    } catch (const InvalidParameterError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataContractError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitDataContract;
    } catch (const CalibrationError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const FitError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataContract;
    }
}
