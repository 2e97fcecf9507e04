#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cvdsim {

enum class Condition { Diabetes, Ckd, Af };

std::string_view to_string(Condition c);

/// A label vocabulary with its sampling probabilities.
struct LabelDistribution {
    std::vector<std::string> labels;
    std::vector<double> probs;
};

/// Checked-in vocabularies and matching patterns for the EMR transform and
/// the reconstruction step. A validated lexicon guarantees that every label
/// it can emit is classified back to exactly one condition.
struct Lexicon {
    LabelDistribution diabetes_terms;  // 6 labels
    LabelDistribution af_terms;        // 6 labels
    LabelDistribution ckd_terms;       // 7 labels
    LabelDistribution hba1c_descriptions;  // 10 labels
    LabelDistribution egfr_descriptions;   // 10 labels
    LabelDistribution sbp_descriptions;    // 12 labels

    // Case-insensitive word-boundary patterns, one list per condition.
    std::vector<std::string> diabetes_patterns;
    std::vector<std::string> ckd_patterns;
    std::vector<std::string> af_patterns;

    std::string note;  // free-text provenance note carried in the file

    static Lexicon defaults();

    /// Checks list lengths, probability sums, label charset (no commas or
    /// newlines), and mutual exclusivity of the patterns over all labels.
    /// Throws InvalidParameterError naming the offending entry.
    void validate() const;

    const LabelDistribution& terms_for(Condition c) const;
};

/// Case-insensitive word-boundary match of `label` against the per-condition
/// pattern lists; returns nullopt when nothing matches.
std::optional<Condition> classify_diagnosis(std::string_view label, const Lexicon& lexicon);

/// Load and validate a lexicon from a JSON file.
Lexicon load_lexicon(const std::filesystem::path& path);

/// Serialise (used to emit the checked-in default file).
std::string lexicon_to_json(const Lexicon& lexicon);

}  // namespace cvdsim
