#include <string>
#include <vector>

#include "doctest.h"

#include "bca/csv.hpp"
#include "bca/errors.hpp"
#include "bca/survey.hpp"

using namespace bca;

namespace {

const char* kLikert7Schema = R"({
  "questions": [
    {"id": "q1",
     "options": ["Strongly Disagree", "Disagree", "Somewhat Disagree",
                 "Neither Agree nor Disagree",
                 "Somewhat Agree", "Agree", "Strongly Agree"],
     "neutral_index": 3},
    {"id": "q2",
     "options": ["Strongly Disagree", "Disagree", "Somewhat Disagree",
                 "Neither Agree nor Disagree",
                 "Somewhat Agree", "Agree", "Strongly Agree"],
     "neutral_index": 3}
  ]
})";

const char* kBinarySchema = R"({
  "questions": [
    {"id": "m1", "options": ["against", "in favor"]},
    {"id": "m2", "options": ["against", "in favor"]}
  ]
})";

}  // namespace

TEST_SUITE_BEGIN("survey");

TEST_CASE("seven point likert with explicit neutral") {
    const Survey survey = parse_survey_schema(kLikert7Schema);
    REQUIRE(survey.question_count() == 2);
    const AnswerSpace& q = survey.questions[0].answers;
    CHECK(q.semispace_of(6) == Semispace::Positive);   // Strongly Agree
    CHECK(q.semispace_of(4) == Semispace::Positive);
    CHECK(q.semispace_of(3) == Semispace::Neutral);    // Neither Agree nor Disagree
    CHECK(q.semispace_of(2) == Semispace::Negative);
    CHECK(q.semispace_of(0) == Semispace::Negative);
}

TEST_CASE("binary question with implicit neutrality") {
    const Survey survey = parse_survey_schema(kBinarySchema);
    const AnswerSpace& q = survey.questions[0].answers;
    CHECK(q.effective_neutral_index() == -1);
    CHECK(q.semispace_of(0) == Semispace::Negative);  // against
    CHECK(q.semispace_of(1) == Semispace::Positive);  // in favor
}

TEST_CASE("implicit neutrality conventions") {
    AnswerSpace odd;
    odd.options = {"a", "b", "c", "d", "e"};
    odd.validate();
    CHECK(odd.effective_neutral_index() == 2);
    CHECK(odd.semispace_of(2) == Semispace::Neutral);
    CHECK(odd.semispace_of(1) == Semispace::Negative);
    CHECK(odd.semispace_of(3) == Semispace::Positive);

    AnswerSpace even;
    even.options = {"a", "b", "c", "d"};
    even.validate();
    CHECK(even.effective_neutral_index() == -1);
    CHECK(even.semispace_of(1) == Semispace::Negative);
    CHECK(even.semispace_of(2) == Semispace::Positive);
}

TEST_CASE("semispace partition property") {
    // Non-neutral options split cleanly into the two strict semispaces.
    for (int h = 2; h <= 9; ++h) {
        AnswerSpace space;
        for (int i = 0; i < h; ++i) space.options.push_back("opt" + std::to_string(i));
        space.validate();
        int neutral_count = 0;
        int prev = -2;
        for (int i = 0; i < h; ++i) {
            const Semispace s = space.semispace_of(i);
            if (s == Semispace::Neutral) {
                ++neutral_count;
                CHECK(i == space.effective_neutral_index());
            }
            CHECK(static_cast<int>(s) >= prev);  // monotone classification
            prev = static_cast<int>(s);
        }
        CHECK(neutral_count == (h % 2 == 1 ? 1 : 0));
    }
}

TEST_CASE("schema validation errors") {
    CHECK_THROWS_AS(parse_survey_schema("{"), ConfigError);
    CHECK_THROWS_AS(parse_survey_schema(R"({"questions": []})"), ConfigError);
    // single-option question
    CHECK_THROWS_AS(parse_survey_schema(
                        R"({"questions":[{"id":"a","options":["x"]},
                                          {"id":"b","options":["x","y"]}]})"),
                    ConfigError);
    // duplicate ids
    CHECK_THROWS_AS(parse_survey_schema(
                        R"({"questions":[{"id":"a","options":["x","y"]},
                                          {"id":"a","options":["x","y"]}]})"),
                    ConfigError);
    // neutral index out of range
    CHECK_THROWS_AS(parse_survey_schema(
                        R"({"questions":[{"id":"a","options":["x","y"],"neutral_index":5},
                                          {"id":"b","options":["x","y"]}]})"),
                    ConfigError);
    // one question only
    CHECK_THROWS_AS(parse_survey_schema(
                        R"({"questions":[{"id":"a","options":["x","y"]}]})"),
                    ConfigError);
    // case-colliding labels
    CHECK_THROWS_AS(parse_survey_schema(
                        R"({"questions":[{"id":"a","options":["Yes","yes"]},
                                          {"id":"b","options":["x","y"]}]})"),
                    ConfigError);
}

TEST_CASE("schema round trip") {
    const Survey survey = parse_survey_schema(kLikert7Schema);
    const std::string serialized = survey_to_json(survey);
    const Survey again = parse_survey_schema(serialized);
    REQUIRE(again.question_count() == survey.question_count());
    for (int i = 0; i < survey.question_count(); ++i) {
        CHECK(again.questions[i].id == survey.questions[i].id);
        CHECK(again.questions[i].answers.options == survey.questions[i].answers.options);
        CHECK(again.questions[i].answers.neutral_index ==
              survey.questions[i].answers.neutral_index);
    }
    CHECK(survey_to_json(again) == serialized);  // serialization idempotent
}

TEST_CASE("load responses by label and index") {
    const Survey survey = parse_survey_schema(kBinarySchema);
    const std::string csv =
        "respondent_id,m1,m2\n"
        "alice,against,in favor\n"
        "bob,  IN FAVOR , 0\n"
        "carol,1,1\n";
    const ResponseMatrix rm = load_responses(csv, survey);
    REQUIRE(rm.respondent_count() == 3);
    CHECK(rm.respondent_ids == std::vector<std::string>{"alice", "bob", "carol"});
    CHECK(rm.rows[0] == std::vector<int>{0, 1});
    CHECK(rm.rows[1] == std::vector<int>{1, 0});  // label match wins, trim + case folded
    CHECK(rm.rows[2] == std::vector<int>{1, 1});
}

TEST_CASE("load responses without id column") {
    const Survey survey = parse_survey_schema(kBinarySchema);
    const ResponseMatrix rm = load_responses("m1,m2\n0,1\n", survey);
    REQUIRE(rm.respondent_count() == 1);
    CHECK(rm.respondent_ids[0] == "0");
}

TEST_CASE("load responses errors name the offender") {
    const Survey survey = parse_survey_schema(kLikert7Schema);
    const std::string typo = "q1,q2\nAgre,Agree\n";
    try {
        load_responses(typo, survey);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 1") != std::string::npos);
        CHECK(msg.find("q1") != std::string::npos);
        CHECK(msg.find("Agre") != std::string::npos);
    }
    CHECK_THROWS_AS(load_responses("q1,q2\nAgree,\n", survey), DataError);   // missing cell
    CHECK_THROWS_AS(load_responses("q1,q2\n9,0\n", survey), DataError);      // index range
    CHECK_THROWS_AS(load_responses("q1,wrong\n0,0\n", survey), DataError);   // header mismatch
    CHECK_THROWS_AS(load_responses("q1\n0\n", survey), DataError);           // missing column
    CHECK_THROWS_AS(load_responses("q1,q2\n0\n", survey), DataError);        // short row
}

TEST_CASE("header-only file gives an empty matrix") {
    const Survey survey = parse_survey_schema(kBinarySchema);
    const ResponseMatrix rm = load_responses("m1,m2\n", survey);
    CHECK(rm.respondent_count() == 0);
}

TEST_CASE("numeric map fixed points") {
    // 3-point last option -> 1; 5-point index 3 -> 0.75; 7-point index 5 -> 5/6.
    Survey survey;
    for (int h : {3, 5, 7}) {
        Survey::Question q;
        q.id = "h" + std::to_string(h);
        for (int i = 0; i < h; ++i) q.answers.options.push_back("o" + std::to_string(i));
        survey.questions.push_back(std::move(q));
    }
    ResponseMatrix rm;
    rm.survey = survey;
    rm.respondent_ids = {"r1"};
    rm.rows = {{2, 3, 5}};
    const NumericMatrix num = numeric_map(rm);
    CHECK(num.values.at(0, 0) == 1.0);
    CHECK(num.values.at(0, 1) == 0.75);
    CHECK(num.values.at(0, 2) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("numeric map is monotone and hits the extremes") {
    for (int h = 2; h <= 9; ++h) {
        Survey survey;
        for (int qn = 0; qn < 2; ++qn) {
            Survey::Question q;
            q.id = "q" + std::to_string(qn);
            for (int i = 0; i < h; ++i) q.answers.options.push_back("o" + std::to_string(i));
            survey.questions.push_back(std::move(q));
        }
        ResponseMatrix rm;
        rm.survey = survey;
        for (int i = 0; i < h; ++i) {
            rm.respondent_ids.push_back(std::to_string(i));
            rm.rows.push_back({i, i});
        }
        const NumericMatrix num = numeric_map(rm);
        CHECK(num.values.at(0, 0) == 0.0);
        CHECK(num.values.at(static_cast<std::size_t>(h - 1), 0) == 1.0);
        for (int i = 1; i < h; ++i) {
            CHECK(num.values.at(static_cast<std::size_t>(i), 0) >
                  num.values.at(static_cast<std::size_t>(i - 1), 0));
        }
    }
}

TEST_CASE("loading is deterministic") {
    const Survey survey = parse_survey_schema(kLikert7Schema);
    const std::string csv = "q1,q2\nAgree,Disagree\n3,4\n";
    const ResponseMatrix a = load_responses(csv, survey);
    const ResponseMatrix b = load_responses(csv, survey);
    CHECK(a.rows == b.rows);
    CHECK(numeric_map(a).values == numeric_map(b).values);
    CHECK(responses_to_csv(a) == responses_to_csv(b));
}

TEST_CASE("csv parser handles quoting") {
    const auto rows = parse_csv("a,\"b,c\",\"d\"\"e\"\r\n1,2,3\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"a", "b,c", "d\"e"});
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK_THROWS_AS(parse_csv("\"unterminated"), DataError);
}

TEST_SUITE_END();
