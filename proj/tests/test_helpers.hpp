#pragma once

#include <string>
#include <vector>

#include "bca/adjacency.hpp"
#include "bca/survey.hpp"

namespace bca::testing {

// Survey with q identical questions of h ordered options each; odd h gets
// the implicit middle neutral made explicit.
inline Survey uniform_survey(int q, int h) {
    Survey survey;
    for (int i = 0; i < q; ++i) {
        Survey::Question question;
        question.id = "q" + std::to_string(i + 1);
        for (int o = 0; o < h; ++o) {
            question.answers.options.push_back("o" + std::to_string(o));
        }
        if (h % 2 == 1) question.answers.neutral_index = (h - 1) / 2;
        survey.questions.push_back(std::move(question));
    }
    return survey;
}

inline ResponseMatrix make_responses(Survey survey, std::vector<std::vector<int>> rows) {
    ResponseMatrix rm;
    rm.survey = std::move(survey);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rm.respondent_ids.push_back("r" + std::to_string(i + 1));
    }
    rm.rows = std::move(rows);
    rm.validate();
    return rm;
}

// The three-respondent, three-question 7-point example: A and C share a
// construal, B does not. Option order runs Strongly Disagree .. Strongly
// Agree, so Somewhat Agree = 4, Strongly Agree = 6, Somewhat Disagree = 2.
inline ResponseMatrix motivating_example() {
    return make_responses(uniform_survey(3, 7), {{4, 4, 4},    // A
                                                 {4, 4, 2},    // B
                                                 {4, 4, 6}});  // C
}

inline double entry(const AdjacencyMatrix& adj, std::size_t i, std::size_t j) {
    return adj.values.at(i, j);
}

}  // namespace bca::testing
