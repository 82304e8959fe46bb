#include "bca/adjacency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "bca/csv.hpp"
#include "bca/errors.hpp"
#include "bca/mathx.hpp"
#include "bca/rng.hpp"

namespace bca {

const char* method_name(MethodTag tag) {
    switch (tag) {
        case MethodTag::BCA: return "bca";
        case MethodTag::RCA: return "rca";
        case MethodTag::CCA: return "cca";
        case MethodTag::RRCA: return "rrca";
    }
    return "?";
}

void AdjacencyMatrix::validate() const {
    const std::size_t n = values.rows;
    if (values.cols != n) throw DataError("adjacency matrix must be square");
    for (std::size_t i = 0; i < n; ++i) {
        if (values.at(i, i) != 0.0) throw DataError("adjacency diagonal must be zero");
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = values.at(i, j);
            if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
                throw DataError("adjacency entry outside [0,1]");
            }
            if (v != values.at(j, i)) throw DataError("adjacency matrix must be symmetric");
        }
    }
}

void MethodConfig::validate() const {
    if (rca_edge_removal.enabled) {
        if (rca_edge_removal.iterations < 1) {
            throw ConfigError("rca bootstrap iterations must be >= 1");
        }
        if (!(rca_edge_removal.alpha > 0.0 && rca_edge_removal.alpha < 1.0)) {
            throw ConfigError("rca bootstrap alpha must lie in (0,1)");
        }
    }
    if (!(cca_significance_alpha > 0.0 && cca_significance_alpha < 1.0)) {
        throw ConfigError("cca significance alpha must lie in (0,1)");
    }
}

namespace {

// Movement classes of one respondent's answers to a question pair, derived
// from the strict semispace signs. PP/NN use the full semispaces (the
// neutral option belongs to both), NP/PN use the strict ones; the all-
// neutral pair is its own case.
enum Move : std::uint8_t { kPP = 0, kNN = 1, kNP = 2, kPN = 3, kNeutralPair = 4 };

inline Move move_class(int sign_k, int sign_l) {
    if (sign_k == 0 && sign_l == 0) return kNeutralPair;
    if (sign_k >= 0 && sign_l >= 0) return kPP;
    if (sign_k <= 0 && sign_l <= 0) return kNN;
    if (sign_k < 0) return kNP;
    return kPN;
}

// pi by movement class: same class +1, conjugate class -1 (PP<->NN,
// NP<->PN), otherwise 0; pairs at exact neutrality score +1 against staying
// moves and 0 against switching moves.
constexpr int kPiTable[5][5] = {
    //            PP  NN  NP  PN  nn
    /* PP */ {1, -1, 0, 0, 1},
    /* NN */ {-1, 1, 0, 0, 1},
    /* NP */ {0, 0, 1, -1, 0},
    /* PN */ {0, 0, -1, 1, 0},
    /* nn */ {1, 1, 0, 0, 1},
};

inline int sign_of(Semispace s) { return static_cast<int>(s); }

// Per-respondent movement-class rows over all question pairs (k < l,
// row-major), used by the O(N^2) pair sweeps.
std::vector<std::vector<std::uint8_t>> movement_rows(const ResponseMatrix& responses) {
    const int q = responses.survey.question_count();
    const std::size_t n = responses.respondent_count();
    std::vector<std::vector<int>> signs(n, std::vector<int>(q));
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < q; ++j) {
            signs[i][j] =
                sign_of(responses.survey.questions[j].answers.semispace_of(responses.rows[i][j]));
        }
    }
    const std::size_t pairs = static_cast<std::size_t>(q) * (q - 1) / 2;
    std::vector<std::vector<std::uint8_t>> rows(n, std::vector<std::uint8_t>(pairs));
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t p = 0;
        for (int k = 0; k < q - 1; ++k) {
            for (int l = k + 1; l < q; ++l, ++p) {
                rows[i][p] = move_class(signs[i][k], signs[i][l]);
            }
        }
    }
    return rows;
}

void require_pairable(const ResponseMatrix& responses) {
    responses.validate();
    if (responses.respondent_count() < 2) {
        throw DataError("insufficient respondents: need at least 2");
    }
    if (responses.survey.question_count() < 2) {
        throw DataError("adjacency needs at least 2 questions");
    }
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Numeric gaps u_k - u_l per question pair for one respondent.
std::vector<std::vector<double>> gap_rows(const NumericMatrix& numeric) {
    const std::size_t n = numeric.values.rows;
    const int q = static_cast<int>(numeric.values.cols);
    const std::size_t pairs = static_cast<std::size_t>(q) * (q - 1) / 2;
    std::vector<std::vector<double>> rows(n, std::vector<double>(pairs));
    for (std::size_t i = 0; i < n; ++i) {
        const double* r = numeric.values.row(i);
        std::size_t p = 0;
        for (int k = 0; k < q - 1; ++k) {
            for (int l = k + 1; l < q; ++l, ++p) {
                rows[i][p] = r[k] - r[l];
            }
        }
    }
    return rows;
}

double relationality_from_gaps(const double* gu, const double* gv, std::size_t pairs) {
    double sum = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
        const double du = gu[p];
        const double dv = gv[p];
        const double delta = 1.0 - std::fabs(std::fabs(du) - std::fabs(dv));
        sum += (du * dv >= 0.0) ? delta : -delta;
    }
    return sum / static_cast<double>(pairs);
}

}  // namespace

int pairwise_polarity(Semispace u_k, Semispace u_l, Semispace v_k, Semispace v_l) {
    const Move a = move_class(sign_of(u_k), sign_of(u_l));
    const Move b = move_class(sign_of(v_k), sign_of(v_l));
    return kPiTable[a][b];
}

double polarity(std::span<const int> u, std::span<const int> v, const Survey& survey) {
    const int q = survey.question_count();
    if (q < 2) throw DataError("polarity needs at least 2 questions");
    if (static_cast<int>(u.size()) != q || static_cast<int>(v.size()) != q) {
        throw DataError("polarity: answer rows must have one entry per question");
    }
    long sum = 0;
    long pairs = 0;
    for (int k = 0; k < q - 1; ++k) {
        const auto& ak = survey.questions[k].answers;
        for (int l = k + 1; l < q; ++l) {
            const auto& al = survey.questions[l].answers;
            sum += pairwise_polarity(ak.semispace_of(u[k]), al.semispace_of(u[l]),
                                     ak.semispace_of(v[k]), al.semispace_of(v[l]));
            ++pairs;
        }
    }
    return static_cast<double>(sum) / static_cast<double>(pairs);
}

double relationality(std::span<const double> u_num, std::span<const double> v_num) {
    const std::size_t q = u_num.size();
    if (q != v_num.size()) throw DataError("relationality: rows differ in length");
    if (q < 2) throw DataError("relationality needs at least 2 questions");
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t k = 0; k + 1 < q; ++k) {
        for (std::size_t l = k + 1; l < q; ++l, ++pairs) {
            const double du = u_num[k] - u_num[l];
            const double dv = v_num[k] - v_num[l];
            const double delta = 1.0 - std::fabs(std::fabs(du) - std::fabs(dv));
            sum += (du * dv >= 0.0) ? delta : -delta;
        }
    }
    return sum / static_cast<double>(pairs);
}

AdjacencyMatrix bca_adjacency(const ResponseMatrix& responses) {
    require_pairable(responses);
    const std::size_t n = responses.respondent_count();
    const auto rows = movement_rows(responses);
    const std::size_t pairs = rows[0].size();

    AdjacencyMatrix adj;
    adj.method_tag = MethodTag::BCA;
    adj.values = DenseMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* ri = rows[i].data();
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::uint8_t* rj = rows[j].data();
            long sum = 0;
            for (std::size_t p = 0; p < pairs; ++p) {
                sum += kPiTable[ri[p]][rj[p]];
            }
            const double val =
                clamp01(std::fabs(static_cast<double>(sum) / static_cast<double>(pairs)));
            adj.values.at(i, j) = val;
            adj.values.at(j, i) = val;
        }
    }
    return adj;
}

AdjacencyMatrix rca_adjacency(const ResponseMatrix& responses, const MethodConfig& config) {
    require_pairable(responses);
    config.validate();
    const std::size_t n = responses.respondent_count();
    const int q = responses.survey.question_count();
    const NumericMatrix numeric = numeric_map(responses);
    const auto gaps = gap_rows(numeric);
    const std::size_t pairs = gaps[0].size();

    DenseMatrix rel(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = relationality_from_gaps(gaps[i].data(), gaps[j].data(), pairs);
            rel.at(i, j) = r;
            rel.at(j, i) = r;
        }
    }

    AdjacencyMatrix adj;
    adj.method_tag = MethodTag::RCA;
    adj.values = DenseMatrix(n, n);

    if (!config.rca_edge_removal.enabled) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double val = clamp01(std::fabs(rel.at(i, j)));
                adj.values.at(i, j) = val;
                adj.values.at(j, i) = val;
            }
        }
        return adj;
    }

    // Per-pair permutation bootstrap: the null re-draws each respondent's
    // own answers in a random question order and recomputes relationality.
    // An edge survives only when the observed value sits strictly inside
    // one of the two alpha/2 tails of its pair's null. Equivalently, with B
    // draws and cutoff c = ceil(B * alpha/2), the edge is kept when fewer
    // than c null values are <= R (lower tail) or fewer than c are >= R
    // (upper tail). Counting makes the decision exact and allows stopping
    // as soon as both counters pass the cutoff, which is what makes the
    // test affordable; each pair draws from its own seed substream, so the
    // result is independent of any parallel schedule.
    // Bootstrap null: draw two distinct respondents and permute each one's
    // answer vector across questions, which keeps every answer profile but
    // destroys the question alignment the relationality measures. The null
    // does not depend on which observed pair is tested, so one set of draws
    // serves the whole matrix.
    //
    // Removal band: critical values are the ceil(B*a/2)-th and
    // ceil(B*(1-a/2))-th order statistics of the B null draws; an edge
    // survives when its relationality is at or below the lower critical
    // value, or strictly above the upper one. Relationality distributions
    // are heavily discrete, so the boundary convention is load-bearing:
    // values tied with the null's upper extreme count as insignificant
    // (they are exactly what the null produces), while the lower critical
    // value itself is already deep in the alpha/2 tail.
    const int iters = config.rca_edge_removal.iterations;
    Rng rng(config.rca_edge_removal.seed);
    std::vector<double> u(q), v(q), null_rel;
    null_rel.reserve(static_cast<std::size_t>(iters));
    for (int t = 0; t < iters; ++t) {
        const auto i1 =
            static_cast<std::size_t>(rng.next_int(0, static_cast<std::int64_t>(n) - 1));
        auto i2 = static_cast<std::size_t>(rng.next_int(0, static_cast<std::int64_t>(n) - 2));
        if (i2 >= i1) ++i2;
        for (int p = 0; p < q; ++p) {
            u[p] = numeric.values.at(i1, p);
            v[p] = numeric.values.at(i2, p);
        }
        rng.shuffle(u);
        rng.shuffle(v);
        null_rel.push_back(relationality(u, v));
    }
    std::sort(null_rel.begin(), null_rel.end());
    const double a2 = config.rca_edge_removal.alpha / 2.0;
    const auto order_stat = [&](double p) {
        const auto k = static_cast<std::size_t>(std::ceil(p * iters));
        return null_rel[std::min(std::max<std::size_t>(k, 1), static_cast<std::size_t>(iters)) - 1];
    };
    const double lo = order_stat(a2);
    const double hi = order_stat(1.0 - a2);

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = rel.at(i, j);
            const double val = (r <= lo || r > hi) ? clamp01(std::fabs(r)) : 0.0;
            adj.values.at(i, j) = val;
            adj.values.at(j, i) = val;
        }
    }
    return adj;
}

AdjacencyMatrix cca_adjacency(const ResponseMatrix& responses, const MethodConfig& config) {
    require_pairable(responses);
    config.validate();
    const std::size_t n = responses.respondent_count();
    const std::size_t q = static_cast<std::size_t>(responses.survey.question_count());
    const NumericMatrix numeric = numeric_map(responses);

    // Centered rows and norms; a respondent is "constant" when all numeric
    // answers coincide.
    DenseMatrix centered(n, q);
    std::vector<double> norm(n, 0.0);
    std::vector<bool> constant(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const double* r = numeric.values.row(i);
        double mean = 0.0;
        double mn = r[0], mx = r[0];
        for (std::size_t j = 0; j < q; ++j) {
            mean += r[j];
            mn = std::min(mn, r[j]);
            mx = std::max(mx, r[j]);
        }
        mean /= static_cast<double>(q);
        constant[i] = (mn == mx);
        double ss = 0.0;
        for (std::size_t j = 0; j < q; ++j) {
            const double c = r[j] - mean;
            centered.at(i, j) = c;
            ss += c * c;
        }
        norm[i] = std::sqrt(ss);
    }

    const bool test_significance = q >= 3;  // t-test needs Q-2 >= 1 df
    AdjacencyMatrix adj;
    adj.method_tag = MethodTag::CCA;
    adj.values = DenseMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double val = 0.0;
            if (constant[i] && constant[j]) {
                // Constant respondents are fully correlated with each other
                // (the "null construal"), under either policy's spirit; the
                // drop policy isolates them entirely instead.
                val = (config.cca_constant_policy == CcaConstantPolicy::ZeroEdge) ? 1.0 : 0.0;
            } else if (constant[i] || constant[j]) {
                val = 0.0;
            } else {
                double r = 0.0;
                const double* ci = centered.row(i);
                const double* cj = centered.row(j);
                for (std::size_t p = 0; p < q; ++p) r += ci[p] * cj[p];
                r /= norm[i] * norm[j];
                r = std::clamp(r, -1.0, 1.0);
                if (!test_significance ||
                    pearson_p_two_sided(r, q) < config.cca_significance_alpha) {
                    val = clamp01(std::fabs(r));
                }
            }
            adj.values.at(i, j) = val;
            adj.values.at(j, i) = val;
        }
    }
    return adj;
}

AdjacencyMatrix rrca_adjacency(const ResponseMatrix& responses, const MethodConfig& config) {
    require_pairable(responses);
    config.validate();
    const std::size_t n = responses.respondent_count();
    const NumericMatrix numeric = numeric_map(responses);
    const auto gaps = gap_rows(numeric);
    const std::size_t pairs = gaps[0].size();

    AdjacencyMatrix adj;
    adj.method_tag = MethodTag::RRCA;
    adj.values = DenseMatrix(n, n);

    if (!config.rrca_second_difference) {
        // Binarized gaps make each term depend only on gap signs:
        // lambda * delta' is +1 when both gaps vanish, sign(du)*sign(dv)
        // otherwise.
        std::vector<std::vector<std::int8_t>> sg(n, std::vector<std::int8_t>(pairs));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t p = 0; p < pairs; ++p) {
                const double d = gaps[i][p];
                sg[i][p] = (d > 0.0) ? 1 : (d < 0.0 ? -1 : 0);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::int8_t* si = sg[i].data();
            for (std::size_t j = i + 1; j < n; ++j) {
                const std::int8_t* sj = sg[j].data();
                long sum = 0;
                for (std::size_t p = 0; p < pairs; ++p) {
                    sum += (si[p] == 0 && sj[p] == 0) ? 1 : si[p] * sj[p];
                }
                const double mean = static_cast<double>(sum) / static_cast<double>(pairs);
                const double val = clamp01(mean * mean);
                adj.values.at(i, j) = val;
                adj.values.at(j, i) = val;
            }
        }
        return adj;
    }

    // Experimental difference-in-differences variant (flag-gated): the
    // schematic term becomes 1 - |du - dv|, signed by lambda as usual.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t p = 0; p < pairs; ++p) {
                const double du = gaps[i][p];
                const double dv = gaps[j][p];
                const double dd = 1.0 - std::fabs(du - dv);
                sum += (du * dv >= 0.0) ? dd : -dd;
            }
            const double mean = sum / static_cast<double>(pairs);
            const double val = clamp01(mean * mean);
            adj.values.at(i, j) = val;
            adj.values.at(j, i) = val;
        }
    }
    return adj;
}

std::string adjacency_to_csv(const AdjacencyMatrix& adj,
                             const std::vector<std::string>& respondent_ids) {
    const std::size_t n = adj.size();
    if (respondent_ids.size() != n) {
        throw DataError("adjacency_to_csv: id count does not match matrix size");
    }
    std::string out = "respondent_id";
    for (const auto& id : respondent_ids) {
        out += ",";
        out += csv_escape(id);
    }
    out += "\n";
    for (std::size_t i = 0; i < n; ++i) {
        out += csv_escape(respondent_ids[i]);
        for (std::size_t j = 0; j < n; ++j) {
            out += ",";
            out += fmt_double(adj.values.at(i, j));
        }
        out += "\n";
    }
    return out;
}

}  // namespace bca
