#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bca/dense.hpp"

namespace bca {

// Strict semispace classification of a single answer. The neutrality
// element sits in both opinion semispaces; everything else is strictly on
// one side.
enum class Semispace : int { Negative = -1, Neutral = 0, Positive = 1 };

// Ordered answer options of one bipolar question, running from the most
// negative to the most positive label. A question may declare an explicit
// neutral option; otherwise an odd-sized scale treats its middle option as
// implicitly neutral and an even-sized scale has no neutral option at all
// (the semispaces split at the midpoint).
struct AnswerSpace {
    std::vector<std::string> options;
    std::optional<int> neutral_index;

    int option_count() const { return static_cast<int>(options.size()); }

    // Index of the neutrality element (explicit or implicit), or -1 when
    // the question has none.
    int effective_neutral_index() const;

    Semispace semispace_of(int option_index) const;

    void validate() const;
};

Semispace semispace_of(const AnswerSpace& question, int option_index);

struct Survey {
    struct Question {
        std::string id;
        AnswerSpace answers;
    };
    std::vector<Question> questions;

    int question_count() const { return static_cast<int>(questions.size()); }
    int question_index(const std::string& id) const;  // -1 when absent
    void validate() const;
};

// N x Q categorical survey answers stored as option indices.
struct ResponseMatrix {
    Survey survey;
    std::vector<std::string> respondent_ids;
    std::vector<std::vector<int>> rows;

    std::size_t respondent_count() const { return rows.size(); }
    void validate() const;
};

// N x Q responses mapped to [0,1]: option h of an H-option question maps to
// h/(H-1).
struct NumericMatrix {
    DenseMatrix values;
};

// Schema document: {"questions":[{"id":str,"options":[str,...],
// "neutral_index":int|null},...]}
Survey parse_survey_schema(const std::string& schema_json);
std::string survey_to_json(const Survey& survey);

// Responses: UTF-8 CSV, first row = question ids (optionally preceded by a
// respondent_id column), one respondent per row. Cells are option labels
// (matched case-insensitively after trimming) or 0-based integer indices.
ResponseMatrix load_responses(const std::string& csv_text, const Survey& survey);
std::string responses_to_csv(const ResponseMatrix& responses);

NumericMatrix numeric_map(const ResponseMatrix& responses);

}  // namespace bca
