#include "bca/survey.hpp"

#include <charconv>
#include <map>
#include <set>

#include "json.hpp"

#include "bca/csv.hpp"
#include "bca/errors.hpp"

namespace bca {

using nlohmann::json;

int AnswerSpace::effective_neutral_index() const {
    if (neutral_index.has_value()) return *neutral_index;
    const int h = option_count();
    if (h % 2 == 1) return (h - 1) / 2;  // implicit middle neutral
    return -1;                           // even scale, no neutral
}

Semispace AnswerSpace::semispace_of(int option_index) const {
    const int h = option_count();
    if (option_index < 0 || option_index >= h) {
        throw DataError("semispace_of: option index out of range");
    }
    const int neutral = effective_neutral_index();
    if (neutral >= 0) {
        if (option_index == neutral) return Semispace::Neutral;
        return option_index < neutral ? Semispace::Negative : Semispace::Positive;
    }
    return option_index < h / 2 ? Semispace::Negative : Semispace::Positive;
}

void AnswerSpace::validate() const {
    if (option_count() < 2) {
        throw ConfigError("answer space needs at least 2 options");
    }
    if (neutral_index.has_value() &&
        (*neutral_index < 0 || *neutral_index >= option_count())) {
        throw ConfigError("neutral_index out of range");
    }
    std::set<std::string> seen;
    for (const auto& label : options) {
        const std::string key = to_lower(trim(label));
        if (key.empty()) throw ConfigError("empty option label");
        if (!seen.insert(key).second) {
            throw ConfigError("option labels collide case-insensitively: '" + label + "'");
        }
    }
}

Semispace semispace_of(const AnswerSpace& question, int option_index) {
    return question.semispace_of(option_index);
}

int Survey::question_index(const std::string& id) const {
    for (std::size_t i = 0; i < questions.size(); ++i) {
        if (questions[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

void Survey::validate() const {
    if (question_count() < 2) {
        throw ConfigError("survey needs at least 2 questions");
    }
    std::set<std::string> ids;
    for (const auto& q : questions) {
        if (q.id.empty()) throw ConfigError("empty question id");
        if (!ids.insert(q.id).second) {
            throw ConfigError("duplicate question id: '" + q.id + "'");
        }
        q.answers.validate();
    }
}

void ResponseMatrix::validate() const {
    survey.validate();
    if (respondent_ids.size() != rows.size()) {
        throw DataError("respondent id count does not match row count");
    }
    const int q = survey.question_count();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<int>(rows[i].size()) != q) {
            throw DataError("response row " + std::to_string(i) + " has wrong length");
        }
        for (int j = 0; j < q; ++j) {
            const int h = survey.questions[j].answers.option_count();
            if (rows[i][j] < 0 || rows[i][j] >= h) {
                throw DataError("response out of range at row " + std::to_string(i) +
                                ", question '" + survey.questions[j].id + "'");
            }
        }
    }
}

Survey parse_survey_schema(const std::string& schema_json) {
    json doc;
    try {
        doc = json::parse(schema_json);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed schema JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("questions") || !doc["questions"].is_array()) {
        throw ConfigError("schema JSON must be an object with a 'questions' array");
    }
    Survey survey;
    for (const auto& jq : doc["questions"]) {
        try {
            Survey::Question q;
            q.id = jq.at("id").get<std::string>();
            for (const auto& opt : jq.at("options")) {
                q.answers.options.push_back(opt.get<std::string>());
            }
            if (jq.contains("neutral_index") && !jq["neutral_index"].is_null()) {
                q.answers.neutral_index = jq["neutral_index"].get<int>();
            }
            survey.questions.push_back(std::move(q));
        } catch (const json::exception& e) {
            throw ConfigError(std::string("malformed question entry: ") + e.what());
        }
    }
    survey.validate();
    return survey;
}

std::string survey_to_json(const Survey& survey) {
    json jqs = json::array();
    for (const auto& q : survey.questions) {
        json jq;
        jq["id"] = q.id;
        jq["options"] = q.answers.options;
        if (q.answers.neutral_index.has_value()) {
            jq["neutral_index"] = *q.answers.neutral_index;
        } else {
            jq["neutral_index"] = nullptr;
        }
        jqs.push_back(std::move(jq));
    }
    json doc;
    doc["questions"] = std::move(jqs);
    return doc.dump(2) + "\n";
}

namespace {

// Resolves one CSV cell to an option index: unique case-insensitive label
// match first, then a bare integer as a 0-based index.
int resolve_cell(const std::string& raw, const AnswerSpace& answers,
                 std::size_t row_1based, const std::string& question_id) {
    const std::string cell = trim(raw);
    const auto fail = [&](const std::string& why) -> int {
        throw DataError("row " + std::to_string(row_1based) + ", question '" + question_id +
                        "': " + why + " (cell '" + raw + "')");
    };
    if (cell.empty()) return fail("missing value");

    const std::string key = to_lower(cell);
    int match = -1;
    for (int h = 0; h < answers.option_count(); ++h) {
        if (to_lower(trim(answers.options[h])) == key) {
            if (match >= 0) return fail("ambiguous label");  // guarded by validate()
            match = h;
        }
    }
    if (match >= 0) return match;

    int idx = 0;
    const char* b = cell.data();
    const char* e = b + cell.size();
    auto res = std::from_chars(b, e, idx);
    if (res.ec == std::errc() && res.ptr == e) {
        if (idx < 0 || idx >= answers.option_count()) return fail("option index out of range");
        return idx;
    }
    return fail("unknown option label");
}

}  // namespace

ResponseMatrix load_responses(const std::string& csv_text, const Survey& survey) {
    survey.validate();
    const auto cells = parse_csv(csv_text);
    if (cells.empty()) throw DataError("responses CSV is empty");

    const auto& header = cells[0];
    std::size_t first_col = 0;
    bool has_id_column = false;
    if (!header.empty() && to_lower(trim(header[0])) == "respondent_id") {
        has_id_column = true;
        first_col = 1;
    }
    const std::size_t q = static_cast<std::size_t>(survey.question_count());
    if (header.size() - first_col != q) {
        throw DataError("responses CSV has " + std::to_string(header.size() - first_col) +
                        " question columns, survey has " + std::to_string(q));
    }
    for (std::size_t j = 0; j < q; ++j) {
        if (trim(header[first_col + j]) != survey.questions[j].id) {
            throw DataError("header column '" + header[first_col + j] +
                            "' does not match question id '" + survey.questions[j].id + "'");
        }
    }

    ResponseMatrix out;
    out.survey = survey;
    for (std::size_t r = 1; r < cells.size(); ++r) {
        const auto& row = cells[r];
        if (row.size() != header.size()) {
            throw DataError("row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                            " cells, expected " + std::to_string(header.size()));
        }
        out.respondent_ids.push_back(has_id_column ? trim(row[0])
                                                   : std::to_string(r - 1));
        std::vector<int> indices(q);
        for (std::size_t j = 0; j < q; ++j) {
            indices[j] = resolve_cell(row[first_col + j], survey.questions[j].answers, r,
                                      survey.questions[j].id);
        }
        out.rows.push_back(std::move(indices));
    }
    out.validate();
    return out;
}

std::string responses_to_csv(const ResponseMatrix& responses) {
    std::string out = "respondent_id";
    for (const auto& q : responses.survey.questions) {
        out += ",";
        out += csv_escape(q.id);
    }
    out += "\n";
    for (std::size_t i = 0; i < responses.rows.size(); ++i) {
        out += csv_escape(responses.respondent_ids[i]);
        for (int v : responses.rows[i]) {
            out += ",";
            out += std::to_string(v);
        }
        out += "\n";
    }
    return out;
}

NumericMatrix numeric_map(const ResponseMatrix& responses) {
    const std::size_t n = responses.respondent_count();
    const std::size_t q = static_cast<std::size_t>(responses.survey.question_count());
    NumericMatrix out;
    out.values = DenseMatrix(n, q);
    for (std::size_t j = 0; j < q; ++j) {
        const double denom =
            static_cast<double>(responses.survey.questions[j].answers.option_count() - 1);
        for (std::size_t i = 0; i < n; ++i) {
            out.values.at(i, j) = static_cast<double>(responses.rows[i][j]) / denom;
        }
    }
    return out;
}

}  // namespace bca
