#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bca/dense.hpp"
#include "bca/survey.hpp"

namespace bca {

enum class MethodTag { BCA, RCA, CCA, RRCA };
const char* method_name(MethodTag tag);

// N x N respondent-similarity matrix: symmetric, zero diagonal, entries in
// [0,1]. This is the interface between adjacency methods and partitioners.
struct AdjacencyMatrix {
    DenseMatrix values;
    MethodTag method_tag = MethodTag::BCA;

    std::size_t size() const { return values.rows; }
    void validate() const;
};

// Pairwise polarity pi in {-1,0,+1} of two respondents' answers to a pair
// of questions, given the semispace classification of each answer. +1 when
// both moved the same way (or stayed put on the same side), -1 when they
// moved opposite ways, 0 otherwise; pairs sitting exactly on (neutral,
// neutral) follow their own rule.
int pairwise_polarity(Semispace u_k, Semispace u_l, Semispace v_k, Semispace v_l);

// Mean pairwise polarity over all question pairs; symmetric, in [-1,1],
// P(u,u) = 1. Inputs are option-index rows of the given survey.
double polarity(std::span<const int> u, std::span<const int> v, const Survey& survey);

// Goldberg relationality of two numeric rows (values in [0,1]); symmetric,
// in [-1,1].
double relationality(std::span<const double> u_num, std::span<const double> v_num);

struct RcaEdgeRemoval {
    bool enabled = true;
    int iterations = 1000;
    double alpha = 0.05;
    // Substream seed for the bootstrap null distribution.
    std::uint64_t seed = 0;
};

enum class CcaConstantPolicy { ZeroEdge, DropRespondent };

struct MethodConfig {
    RcaEdgeRemoval rca_edge_removal;
    double cca_significance_alpha = 0.01;
    CcaConstantPolicy cca_constant_policy = CcaConstantPolicy::ZeroEdge;
    bool rrca_second_difference = false;

    void validate() const;
};

// |P(u_i, u_j)| for every pair; no edge removal.
AdjacencyMatrix bca_adjacency(const ResponseMatrix& responses);

// |R(u_i, u_j)| with bootstrap edge removal (answers resampled per question
// from the column's empirical distribution; two-sided test against the
// null quantiles).
AdjacencyMatrix rca_adjacency(const ResponseMatrix& responses, const MethodConfig& config);

// |corr(u_i, u_j)| of numeric rows, insignificant correlations zeroed
// (two-sided t-test over the Q paired observations). Constant respondents
// follow the configured policy; two constant respondents are fully
// correlated.
AdjacencyMatrix cca_adjacency(const ResponseMatrix& responses, const MethodConfig& config);

// Squared mean of sign-binarized relationality terms; no edge removal.
AdjacencyMatrix rrca_adjacency(const ResponseMatrix& responses, const MethodConfig& config);

// Dense CSV export, header and first column carry respondent ids.
std::string adjacency_to_csv(const AdjacencyMatrix& adj,
                             const std::vector<std::string>& respondent_ids);

}  // namespace bca
