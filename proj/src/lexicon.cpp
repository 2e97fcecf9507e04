#include "cvdsim/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cvdsim/errors.hpp"

namespace cvdsim {

std::string_view to_string(Condition c) {
    switch (c) {
        case Condition::Diabetes: return "diabetes";
        case Condition::Ckd: return "CKD";
        case Condition::Af: return "AF";
    }
    throw InvalidParameterError("invalid condition value");
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_word_char(unsigned char c) {
    return std::isalnum(c) != 0;
}

// Case-insensitive match of `pattern` (already lowercase) inside `text_lower`
// with non-word characters or string edges on both sides.
bool word_match(const std::string& text_lower, const std::string& pattern) {
    if (pattern.empty()) return false;
    std::size_t pos = 0;
    while ((pos = text_lower.find(pattern, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_word_char(text_lower[pos - 1]);
        const std::size_t end = pos + pattern.size();
        const bool right_ok = end == text_lower.size() || !is_word_char(text_lower[end]);
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

bool matches_any(const std::string& text_lower, const std::vector<std::string>& patterns) {
    for (const auto& p : patterns) {
        if (word_match(text_lower, p)) return true;
    }
    return false;
}

void check_distribution(const LabelDistribution& d, std::size_t expected_len,
                        const std::string& name) {
    if (d.labels.size() != expected_len) {
        throw InvalidParameterError("lexicon " + name + ": expected " +
                                    std::to_string(expected_len) + " labels, got " +
                                    std::to_string(d.labels.size()));
    }
    if (d.probs.size() != d.labels.size()) {
        throw InvalidParameterError("lexicon " + name +
                                    ": label and probability lists differ in length");
    }
    double sum = 0.0;
    for (double p : d.probs) {
        if (!(p > 0.0)) {
            throw InvalidParameterError("lexicon " + name +
                                        ": probabilities must be positive");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidParameterError("lexicon " + name + ": probabilities sum to " +
                                    std::to_string(sum) + ", expected 1");
    }
    for (const auto& label : d.labels) {
        if (label.empty() || label.find(',') != std::string::npos ||
            label.find('\n') != std::string::npos) {
            throw InvalidParameterError("lexicon " + name + ": label '" + label +
                                        "' is empty or contains a comma/newline");
        }
    }
}

}  // namespace

Lexicon Lexicon::defaults() {
    Lexicon lex;
    lex.diabetes_terms = {
        {"Diabetes", "T2DM", "Type 2 diabetes mellitus", "ICD10: E11", "ICD9: 250.00",
         "Diabetes mellitus type II"},
        {0.40, 0.20, 0.15, 0.15, 0.05, 0.05}};
    lex.af_terms = {
        {"AF", "Atrial fibrillation", "A-fib", "ICD10: I48",
         "Paroxysmal atrial fibrillation", "Atrial fibrillation and flutter"},
        {0.45, 0.30, 0.075, 0.075, 0.05, 0.05}};
    lex.ckd_terms = {
        {"CKD", "Chronic kidney disease", "Chronic renal failure", "Renal insufficiency",
         "ICD10: N18", "CKD stage 3", "Chronic kidney failure"},
        {0.45, 0.25, 0.05, 0.05, 0.05, 0.10, 0.05}};

    // Residual mass beyond the published category shares (55/15/10/5/4 for
    // HbA1c) is spread over the remaining variants; see the note field.
    lex.hba1c_descriptions = {
        {"HbA1c", "HBA1C", "A1C", "Glycated hemoglobin", "LOINC 4548-4", "Hb A1c",
         "Haemoglobin A1c", "hba1c", "HbA1c (DCCT)", "Glycohemoglobin"},
        {0.55, 0.15, 0.10, 0.05, 0.04, 0.04, 0.03, 0.02, 0.01, 0.01}};
    lex.egfr_descriptions = {
        {"eGFR", "EGFR", "GFR", "Estimated GFR", "Estimated glomerular filtration rate",
         "LOINC 33914-3", "eGFR (CKD-EPI)", "egfr", "eGFR mL/min", "eGRF"},
        {0.60, 0.12, 0.08, 0.07, 0.05, 0.03, 0.02, 0.015, 0.012, 0.003}};
    lex.sbp_descriptions = {
        {"SBP", "Systolic BP", "BP Systolic", "Systolic blood pressure", "SYSTOLIC BP",
         "sbp", "Systolic  BP", "BP (systolic)", "LOINC 8480-6", "Syst BP",
         "Blood pressure - systolic", "Systloic BP"},
        {0.50, 0.15, 0.10, 0.08, 0.05, 0.04, 0.03, 0.02, 0.015, 0.01, 0.008, 0.007}};

    lex.diabetes_patterns = {"t2dm", "diabetes", "e11", "250.00"};
    lex.ckd_patterns = {"ckd", "chronic kidney", "chronic renal", "renal insufficiency",
                        "n18"};
    lex.af_patterns = {"af", "a-fib", "atrial fibrillation", "i48"};

    lex.note =
        "Label lists carry the published category shares; the residual mass "
        "(e.g. 11% for HbA1c) is spread over the remaining variants, which is "
        "a choice of this file.";
    return lex;
}

const LabelDistribution& Lexicon::terms_for(Condition c) const {
    switch (c) {
        case Condition::Diabetes: return diabetes_terms;
        case Condition::Ckd: return ckd_terms;
        case Condition::Af: return af_terms;
    }
    throw InvalidParameterError("invalid condition value");
}

void Lexicon::validate() const {
    check_distribution(diabetes_terms, 6, "diabetes_terms");
    check_distribution(af_terms, 6, "af_terms");
    check_distribution(ckd_terms, 7, "ckd_terms");
    check_distribution(hba1c_descriptions, 10, "hba1c_descriptions");
    check_distribution(egfr_descriptions, 10, "egfr_descriptions");
    check_distribution(sbp_descriptions, 12, "sbp_descriptions");

    if (diabetes_patterns.empty() || ckd_patterns.empty() || af_patterns.empty()) {
        throw InvalidParameterError("lexicon: every condition needs at least one pattern");
    }

    // Every chronic label must be claimed by exactly one condition.
    const std::pair<Condition, const LabelDistribution*> vocabularies[] = {
        {Condition::Diabetes, &diabetes_terms},
        {Condition::Ckd, &ckd_terms},
        {Condition::Af, &af_terms},
    };
    for (const auto& [cond, dist] : vocabularies) {
        for (const auto& label : dist->labels) {
            const auto text = lower(label);
            int hits = 0;
            Condition hit_cond = cond;
            if (matches_any(text, diabetes_patterns)) { ++hits; hit_cond = Condition::Diabetes; }
            if (matches_any(text, ckd_patterns)) { ++hits; hit_cond = Condition::Ckd; }
            if (matches_any(text, af_patterns)) { ++hits; hit_cond = Condition::Af; }
            if (hits != 1 || hit_cond != cond) {
                throw InvalidParameterError(
                    "lexicon exclusivity violation: label '" + label + "' of condition " +
                    std::string(to_string(cond)) + " is matched by " + std::to_string(hits) +
                    " pattern list(s)");
            }
        }
    }
}

std::optional<Condition> classify_diagnosis(std::string_view label, const Lexicon& lexicon) {
    const auto text = lower(label);
    if (matches_any(text, lexicon.ckd_patterns)) return Condition::Ckd;
    if (matches_any(text, lexicon.diabetes_patterns)) return Condition::Diabetes;
    if (matches_any(text, lexicon.af_patterns)) return Condition::Af;
    return std::nullopt;
}

namespace {

LabelDistribution distribution_from_json(const nlohmann::json& j, const std::string& name) {
    LabelDistribution d;
    try {
        j.at("labels").get_to(d.labels);
        j.at("probs").get_to(d.probs);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("lexicon entry " + name + ": " + e.what());
    }
    return d;
}

nlohmann::ordered_json distribution_to_json(const LabelDistribution& d) {
    return {{"labels", d.labels}, {"probs", d.probs}};
}

}  // namespace

Lexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open lexicon file: " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("lexicon file " + path.string() + ": " + e.what());
    }

    Lexicon lex;
    try {
        lex.diabetes_terms = distribution_from_json(j.at("diabetes_terms"), "diabetes_terms");
        lex.af_terms = distribution_from_json(j.at("af_terms"), "af_terms");
        lex.ckd_terms = distribution_from_json(j.at("ckd_terms"), "ckd_terms");
        lex.hba1c_descriptions =
            distribution_from_json(j.at("hba1c_descriptions"), "hba1c_descriptions");
        lex.egfr_descriptions =
            distribution_from_json(j.at("egfr_descriptions"), "egfr_descriptions");
        lex.sbp_descriptions =
            distribution_from_json(j.at("sbp_descriptions"), "sbp_descriptions");
        j.at("diabetes_patterns").get_to(lex.diabetes_patterns);
        j.at("ckd_patterns").get_to(lex.ckd_patterns);
        j.at("af_patterns").get_to(lex.af_patterns);
        lex.note = j.value("note", "");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("lexicon file " + path.string() + ": " + e.what());
    }

    lex.validate();
    return lex;
}

std::string lexicon_to_json(const Lexicon& lexicon) {
    nlohmann::ordered_json j;
    j["note"] = lexicon.note;
    j["diabetes_terms"] = distribution_to_json(lexicon.diabetes_terms);
    j["af_terms"] = distribution_to_json(lexicon.af_terms);
    j["ckd_terms"] = distribution_to_json(lexicon.ckd_terms);
    j["hba1c_descriptions"] = distribution_to_json(lexicon.hba1c_descriptions);
    j["egfr_descriptions"] = distribution_to_json(lexicon.egfr_descriptions);
    j["sbp_descriptions"] = distribution_to_json(lexicon.sbp_descriptions);
    j["diabetes_patterns"] = lexicon.diabetes_patterns;
    j["ckd_patterns"] = lexicon.ckd_patterns;
    j["af_patterns"] = lexicon.af_patterns;
    return j.dump(2) + "\n";
}

}  // namespace cvdsim
