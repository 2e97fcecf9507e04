#include "cvdsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "cvdsim/errors.hpp"

namespace cvdsim {

double quantile(std::span<const double> sorted_values, double p) {
    if (sorted_values.empty()) {
        throw InvalidParameterError("quantile of empty sample");
    }
    const std::size_t n = sorted_values.size();
    const double pos = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

ContinuousSummary summarize_values(std::vector<double> values) {
    if (values.empty()) {
        throw InvalidParameterError("summary of empty sample");
    }
    ContinuousSummary s;
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.sd = std::sqrt(ss / (n - 1.0));
    }
    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.max = values.back();
    s.median = quantile(values, 0.5);
    s.q1 = quantile(values, 0.25);
    s.q3 = quantile(values, 0.75);
    return s;
}

namespace {

double pct(std::size_t count, std::size_t total) {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(total);
}

template <typename Getter>
std::vector<double> column(std::span<const CohortRow> cohort, Getter get) {
    std::vector<double> out;
    out.reserve(cohort.size());
    for (const auto& row : cohort) {
        out.push_back(get(row));
    }
    return out;
}

}  // namespace

CohortSummary summarize_cohort(std::span<const CohortRow> cohort) {
    if (cohort.empty()) {
        throw InvalidParameterError("summarize_cohort requires a non-empty cohort");
    }
    CohortSummary s;
    s.n = cohort.size();
    s.age = summarize_values(column(cohort, [](const auto& r) { return r.age; }));
    s.bmi = summarize_values(column(cohort, [](const auto& r) { return r.bmi; }));
    s.sbp = summarize_values(column(cohort, [](const auto& r) { return r.sbp; }));
    s.egfr = summarize_values(column(cohort, [](const auto& r) { return r.egfr; }));
    s.hba1c = summarize_values(column(cohort, [](const auto& r) { return r.hba1c; }));

    std::array<std::size_t, 5> irsd_counts{};
    std::size_t non = 0, ex = 0, cur = 0, dm = 0, ckd = 0, af = 0, events = 0;
    double follow_up = 0.0;
    for (const auto& r : cohort) {
        ++irsd_counts[static_cast<std::size_t>(r.irsd_quintile - 1)];
        non += r.smoking == Smoking::Non;
        ex += r.smoking == Smoking::Ex;
        cur += r.smoking == Smoking::Current;
        dm += r.diabetes;
        ckd += r.ckd;
        af += r.af;
        events += r.cvd_event;
        follow_up += r.cvd_time;
    }
    for (std::size_t q = 0; q < 5; ++q) {
        s.irsd_pct[q] = pct(irsd_counts[q], s.n);
    }
    s.smoking_non_pct = pct(non, s.n);
    s.smoking_ex_pct = pct(ex, s.n);
    s.smoking_current_pct = pct(cur, s.n);
    s.diabetes_pct = pct(dm, s.n);
    s.ckd_pct = pct(ckd, s.n);
    s.af_pct = pct(af, s.n);
    s.event_rate_pct = pct(events, s.n);
    s.mean_follow_up_years = follow_up / static_cast<double>(s.n);
    return s;
}

StratifyKey stratify_key_from_string(std::string_view s) {
    if (s == "irsd") return StratifyKey::IrsdQuintile;
    if (s == "age_band") return StratifyKey::AgeBand;
    throw InvalidParameterError("unknown stratification key: '" + std::string(s) + "'");
}

std::string age_band(double age) {
    if (age < 30) return "N";
    if (age < 40) return "A";
    if (age < 50) return "B";
    if (age < 60) return "C";
    if (age < 75) return "D";
    return "K";
}

std::vector<StratumSummary> stratify(std::span<const CohortRow> cohort, StratifyKey key) {
    std::vector<std::string> stratum_keys;
    if (key == StratifyKey::IrsdQuintile) {
        stratum_keys = {"1", "2", "3", "4", "5"};
    } else {
        stratum_keys = {"N", "A", "B", "C", "D", "K"};
    }

    std::unordered_map<std::string, std::vector<CohortRow>> groups;
    for (const auto& row : cohort) {
        const std::string k = key == StratifyKey::IrsdQuintile
                                  ? std::to_string(row.irsd_quintile)
                                  : age_band(row.age);
        groups[k].push_back(row);
    }

    std::vector<StratumSummary> out;
    for (const auto& k : stratum_keys) {
        const auto it = groups.find(k);
        if (it == groups.end()) {
            continue;
        }
        const auto& rows = it->second;
        StratumSummary s;
        s.key = k;
        s.n = rows.size();
        auto ages = column(rows, [](const auto& r) { return r.age; });
        std::sort(ages.begin(), ages.end());
        s.age_median = quantile(ages, 0.5);
        s.age_q1 = quantile(ages, 0.25);
        s.age_q3 = quantile(ages, 0.75);
        std::size_t dm = 0, ckd = 0, af = 0, events = 0;
        for (const auto& r : rows) {
            dm += r.diabetes;
            ckd += r.ckd;
            af += r.af;
            events += r.cvd_event;
        }
        s.diabetes_pct = pct(dm, s.n);
        s.ckd_pct = pct(ckd, s.n);
        s.af_pct = pct(af, s.n);
        s.event_rate_pct = pct(events, s.n);
        s.bmi = summarize_values(column(rows, [](const auto& r) { return r.bmi; }));
        s.sbp = summarize_values(column(rows, [](const auto& r) { return r.sbp; }));
        s.egfr = summarize_values(column(rows, [](const auto& r) { return r.egfr; }));
        s.hba1c = summarize_values(column(rows, [](const auto& r) { return r.hba1c; }));
        out.push_back(std::move(s));
    }
    return out;
}

CorrelationMatrix correlation_matrix(std::span<const CohortRow> cohort) {
    CorrelationMatrix out;
    out.names = {"IRSD", "age", "smoking", "BMI", "diabetes", "CKD",
                 "HbA1c", "eGFR", "SBP", "AF", "cvd_event"};
    const std::size_t p = out.names.size();
    const std::size_t n = cohort.size();
    Eigen::MatrixXd X(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = cohort[i];
        // Smoking temporarily encoded as an ordinal: non < ex < current.
        X(i, 0) = r.irsd_quintile;
        X(i, 1) = r.age;
        X(i, 2) = static_cast<double>(r.smoking);
        X(i, 3) = r.bmi;
        X(i, 4) = r.diabetes;
        X(i, 5) = r.ckd;
        X(i, 6) = r.hba1c;
        X(i, 7) = r.egfr;
        X(i, 8) = r.sbp;
        X(i, 9) = r.af;
        X(i, 10) = r.cvd_event;
    }
    const Eigen::RowVectorXd mean = X.colwise().mean();
    const Eigen::MatrixXd centered = X.rowwise() - mean;
    const Eigen::VectorXd sd =
        (centered.array().square().colwise().sum() / static_cast<double>(n)).sqrt();

    out.r = Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t a = 0; a < p; ++a) {
        out.r(a, a) = 1.0;
        for (std::size_t b = a + 1; b < p; ++b) {
            if (sd(a) == 0.0 || sd(b) == 0.0) {
                out.undefined.emplace_back(out.names[a], out.names[b]);
                continue;
            }
            const double cov =
                (centered.col(a).array() * centered.col(b).array()).sum() /
                static_cast<double>(n);
            out.r(a, b) = out.r(b, a) = cov / (sd(a) * sd(b));
        }
    }
    return out;
}

IrsdComparison cohort_compare_irsd(std::span<const EmrMasterRow> master,
                                   std::span<const ChronicDiseaseRow> chronic,
                                   const Lexicon& lexicon) {
    std::unordered_map<std::int64_t, int> flags;  // bit 0 = CKD, bit 1 = T2DM
    for (const auto& row : chronic) {
        const auto c = classify_diagnosis(row.category, lexicon);
        if (!c) continue;
        if (*c == Condition::Ckd) flags[row.patient_id] |= 1;
        if (*c == Condition::Diabetes) flags[row.patient_id] |= 2;
    }

    IrsdComparison out;
    std::array<std::size_t, 5> ckd_counts{}, t2dm_counts{};
    for (const auto& m : master) {
        const auto it = flags.find(m.patient_id);
        if (it == flags.end()) continue;
        const auto q = static_cast<std::size_t>(m.irsd_quintile - 1);
        if (it->second == 1) {
            ++ckd_counts[q];
            ++out.ckd_only_n;
        } else if (it->second == 2) {
            ++t2dm_counts[q];
            ++out.t2dm_only_n;
        }
    }
    out.defined = out.ckd_only_n > 0 && out.t2dm_only_n > 0;
    for (std::size_t q = 0; q < 5; ++q) {
        out.ckd_only_pct[q] = pct(ckd_counts[q], out.ckd_only_n);
        out.t2dm_only_pct[q] = pct(t2dm_counts[q], out.t2dm_only_n);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cox model
// ---------------------------------------------------------------------------

namespace {

struct SortedData {
    Eigen::MatrixXd X;  // descending time order
    std::vector<double> time;
    std::vector<std::uint8_t> event;
};

SortedData sort_descending(const Eigen::MatrixXd& X, std::span<const double> time,
                           std::span<const std::uint8_t> event) {
    const auto n = static_cast<std::size_t>(X.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return time[a] > time[b]; });
    SortedData out;
    out.X.resize(X.rows(), X.cols());
    out.time.resize(n);
    out.event.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(order[i]));
        out.time[i] = time[order[i]];
        out.event[i] = event[order[i]];
    }
    return out;
}

// Breslow sweep over risk sets. Processing rows in descending time order and
// grouping exact ties keeps every subject with t_j >= t in the risk set of t.
CoxLogLik loglik_sorted(const SortedData& d, const Eigen::VectorXd& beta, bool need_derivs) {
    const auto n = static_cast<std::size_t>(d.X.rows());
    const auto p = d.X.cols();
    CoxLogLik out;
    out.grad = Eigen::VectorXd::Zero(p);
    out.hess = Eigen::MatrixXd::Zero(p, p);

    const Eigen::VectorXd eta = d.X * beta;
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);

    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && d.time[j] == d.time[i]) {
            const double w = std::exp(eta(static_cast<Eigen::Index>(j)));
            s0 += w;
            if (need_derivs) {
                const auto xj = d.X.row(static_cast<Eigen::Index>(j)).transpose();
                s1.noalias() += w * xj;
                s2.noalias() += w * xj * xj.transpose();
            }
            ++j;
        }
        for (std::size_t k = i; k < j; ++k) {
            if (!d.event[k]) continue;
            out.ll += eta(static_cast<Eigen::Index>(k)) - std::log(s0);
            if (need_derivs) {
                const Eigen::VectorXd sbar = s1 / s0;
                out.grad += d.X.row(static_cast<Eigen::Index>(k)).transpose() - sbar;
                out.hess -= s2 / s0 - sbar * sbar.transpose();
            }
        }
        i = j;
    }
    return out;
}

std::string covariate_list(const std::vector<std::string>& names,
                           const std::vector<int>& cols) {
    std::string out;
    for (int c : cols) {
        if (!out.empty()) out += ", ";
        out += names[static_cast<std::size_t>(c)];
    }
    return out;
}

double wald_p(double z) {
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

}  // namespace

CoxLogLik cox_partial_loglik(const Eigen::MatrixXd& X, std::span<const double> time,
                             std::span<const std::uint8_t> event,
                             const Eigen::VectorXd& beta) {
    return loglik_sorted(sort_descending(X, time, event), beta, true);
}

CoxFitResult fit_cox_matrix(const Eigen::MatrixXd& X, std::span<const double> time,
                            std::span<const std::uint8_t> event,
                            const std::vector<std::string>& names,
                            const CoxOptions& options) {
    const auto n = static_cast<std::size_t>(X.rows());
    const auto p = X.cols();
    if (n != time.size() || n != event.size() ||
        static_cast<std::size_t>(p) != names.size()) {
        throw InvalidParameterError("fit_cox_matrix: inconsistent input sizes");
    }
    std::size_t n_events = 0;
    for (auto e : event) n_events += e != 0;
    if (n_events < 2) {
        throw FitError("Cox fit requires at least 2 events, got " +
                       std::to_string(n_events));
    }

    const SortedData d = sort_descending(X, time, event);
    const double pen = options.penalizer;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    CoxLogLik cur = loglik_sorted(d, beta, true);
    double obj = cur.ll - 0.5 * pen * beta.squaredNorm();
    int iterations = 0;
    bool converged = false;
    Eigen::MatrixXd info;  // penalised negative Hessian at the solution

    for (int it = 0; it < options.max_iter; ++it) {
        iterations = it + 1;
        const Eigen::VectorXd grad_pen = cur.grad - pen * beta;
        info = -cur.hess + pen * Eigen::MatrixXd::Identity(p, p);

        const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            throw FitError(
                "singular information matrix; check covariates for collinearity (" +
                covariate_list(names, [&] {
                    std::vector<int> all(static_cast<std::size_t>(p));
                    std::iota(all.begin(), all.end(), 0);
                    return all;
                }()) + ")");
        }
        const Eigen::VectorXd delta = ldlt.solve(grad_pen);

        // Step-halving whenever the penalised objective would decrease.
        double step = 1.0;
        Eigen::VectorXd candidate;
        CoxLogLik cand_ll;
        double cand_obj = 0.0;
        for (;;) {
            candidate = beta + step * delta;
            cand_ll = loglik_sorted(d, candidate, true);
            cand_obj = cand_ll.ll - 0.5 * pen * candidate.squaredNorm();
            if (cand_obj >= obj - 1e-12 || step <= 1.0 / 1024.0) {
                break;
            }
            step *= 0.5;
        }
        const double max_update = (step * delta).cwiseAbs().maxCoeff();
        beta = candidate;
        cur = cand_ll;
        obj = cand_obj;
        if (max_update < options.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw FitError("Cox fit did not converge after " + std::to_string(iterations) +
                       " iterations (last objective " + std::to_string(obj) + ")");
    }

    info = -cur.hess + pen * Eigen::MatrixXd::Identity(p, p);
    const Eigen::MatrixXd covariance = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));

    CoxFitResult result;
    result.n = n;
    result.events = n_events;
    result.iterations = iterations;
    result.log_partial_likelihood = cur.ll;
    result.objective =
        "Breslow log partial likelihood - " + std::to_string(pen) + "/2 * ||beta||^2";
    for (Eigen::Index k = 0; k < p; ++k) {
        CoxTerm t;
        t.name = names[static_cast<std::size_t>(k)];
        t.beta = beta(k);
        t.se = std::sqrt(covariance(k, k));
        t.hr = std::exp(t.beta);
        t.hr_lo95 = std::exp(t.beta - 1.96 * t.se);
        t.hr_hi95 = std::exp(t.beta + 1.96 * t.se);
        t.p = wald_p(t.beta / t.se);
        result.terms.push_back(std::move(t));
    }
    return result;
}

const CoxTerm& CoxFitResult::term(std::string_view name) const {
    for (const auto& t : terms) {
        if (t.name == name) return t;
    }
    throw InvalidParameterError("no Cox term named '" + std::string(name) + "'");
}

namespace {

struct DesignMatrix {
    Eigen::MatrixXd X;
    std::vector<std::string> names;
};

// Drop any column with variance below 1e-6 overall or within the event /
// non-event subsets (population variance).
DesignMatrix drop_low_variance(Eigen::MatrixXd X, std::vector<std::string> names,
                               std::span<const std::uint8_t> event,
                               std::vector<std::string>& dropped) {
    const auto n = X.rows();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        double s[2] = {0, 0}, ss[2] = {0, 0};
        std::size_t cnt[2] = {0, 0};
        for (Eigen::Index i = 0; i < n; ++i) {
            const int g = event[static_cast<std::size_t>(i)] ? 1 : 0;
            s[g] += X(i, c);
            ss[g] += X(i, c) * X(i, c);
            ++cnt[g];
        }
        const double mean_all = (s[0] + s[1]) / static_cast<double>(n);
        const double var_all =
            (ss[0] + ss[1]) / static_cast<double>(n) - mean_all * mean_all;
        bool low = var_all < 1e-6;
        for (int g = 0; g < 2 && !low; ++g) {
            if (cnt[g] == 0) {
                low = true;
                break;
            }
            const double m = s[g] / static_cast<double>(cnt[g]);
            low = ss[g] / static_cast<double>(cnt[g]) - m * m < 1e-6;
        }
        if (low) {
            dropped.push_back(names[static_cast<std::size_t>(c)]);
        } else {
            keep.push_back(c);
        }
    }
    DesignMatrix out;
    out.X.resize(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.X.col(static_cast<Eigen::Index>(k)) = X.col(keep[k]);
        out.names.push_back(names[static_cast<std::size_t>(keep[k])]);
    }
    return out;
}

const std::vector<std::string> kModelColumns = {
    "age",      "AF",       "CKD",    "diabetes", "HbA1c",  "BMI",    "eGFR",
    "SBP",      "smoke_current", "smoke_ex", "irsd_1", "irsd_2", "irsd_3", "irsd_4"};

}  // namespace

CoxFitResult fit_cox(std::span<const CohortRow> cohort, const CoxOptions& options) {
    const auto n = static_cast<Eigen::Index>(cohort.size());
    Eigen::MatrixXd X(n, 14);
    std::vector<double> time(cohort.size());
    std::vector<std::uint8_t> event(cohort.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = cohort[static_cast<std::size_t>(i)];
        X(i, 0) = r.age - 30.0;
        X(i, 1) = r.af;
        X(i, 2) = r.ckd;
        X(i, 3) = r.diabetes;
        X(i, 4) = r.hba1c;
        X(i, 5) = r.bmi;
        X(i, 6) = r.egfr;
        X(i, 7) = r.sbp;
        X(i, 8) = r.smoking == Smoking::Current;
        X(i, 9) = r.smoking == Smoking::Ex;
        X(i, 10) = r.irsd_quintile == 1;
        X(i, 11) = r.irsd_quintile == 2;
        X(i, 12) = r.irsd_quintile == 3;
        X(i, 13) = r.irsd_quintile == 4;
        time[static_cast<std::size_t>(i)] = r.cvd_time;
        event[static_cast<std::size_t>(i)] = r.cvd_event ? 1 : 0;
    }
    auto names = kModelColumns;
    if (!options.include_bmi) {
        // Remove the BMI column (index 5).
        Eigen::MatrixXd Xr(n, 13);
        Xr << X.leftCols(5), X.rightCols(8);
        X = std::move(Xr);
        names.erase(names.begin() + 5);
    }
    std::vector<std::string> dropped;
    auto design = drop_low_variance(std::move(X), std::move(names), event, dropped);
    auto result = fit_cox_matrix(design.X, time, event, design.names, options);
    result.dropped = std::move(dropped);
    return result;
}

CoxFitResult fit_cox_reconstructed(std::span<const ReconstructedRow> cohort,
                                   CoxOptions options) {
    options.include_bmi = false;
    std::vector<CohortRow> rows(cohort.size());
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        const auto& r = cohort[i];
        if (std::isnan(r.hba1c) || std::isnan(r.egfr) || std::isnan(r.sbp)) {
            throw DataContractError("patient " + std::to_string(r.patient_id) +
                                    " is missing a biomarker; cannot fit");
        }
        auto& c = rows[i];
        c.irsd_quintile = r.irsd_quintile;
        c.age = r.age;
        // Masked smoking is treated as the reference category.
        c.smoking = r.smoking.value_or(Smoking::Non);
        c.diabetes = r.diabetes;
        c.ckd = r.ckd;
        c.hba1c = r.hba1c;
        c.egfr = r.egfr;
        c.sbp = r.sbp;
        c.af = r.af;
        c.cvd_event = r.cvd_event;
        c.cvd_time = r.cvd_time;
    }
    return fit_cox(rows, options);
}

std::vector<ForestRow> emit_forest_data(const CoxFitResult& fit) {
    static const std::unordered_map<std::string, std::string> display = {
        {"age", "Age"},
        {"AF", "Atrial fibrillation"},
        {"CKD", "Chronic kidney disease"},
        {"diabetes", "Diabetes mellitus"},
        {"HbA1c", "HbA1c (%)"},
        {"BMI", "Body mass index"},
        {"eGFR", "eGFR"},
        {"SBP", "Systolic blood pressure"},
        {"smoke_current", "smoke (cur)"},
        {"smoke_ex", "smoke (ex)"},
    };
    std::vector<ForestRow> rows;
    for (const auto& t : fit.terms) {
        ForestRow row;
        if (const auto it = display.find(t.name); it != display.end()) {
            row.display_name = it->second;
        } else if (t.name.rfind("irsd_", 0) == 0) {
            row.display_name = "IRSD: " + t.name.substr(5);
        } else {
            row.display_name = t.name;
        }
        row.hr = t.hr;
        row.lo = t.hr_lo95;
        row.hi = t.hr_hi95;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace cvdsim
