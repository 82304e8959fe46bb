#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "bca/partition.hpp"
#include "bca/simulate.hpp"

namespace bca {

// Result of removing unit clusters (single-respondent clusters) from a
// partition before scoring.
struct StripResult {
    Partition partition;             // over the kept respondents, compacted
    std::vector<std::size_t> kept;   // original indices of kept respondents
    int removed_count = 0;           // number of unit clusters removed
};

// Throws DataError when every cluster is a unit cluster (empty effective
// partition).
StripResult strip_unit_clusters(const Partition& part);

// Fraction of records with an exactly correct construal count.
double cpa(const std::vector<std::pair<int, int>>& k_est_true);
// Mean absolute deviation of the estimated construal count.
double mad(const std::vector<std::pair<int, int>>& k_est_true);

enum class NmiNormalization { ArithmeticMean, Max };

// Normalized mutual information of two partitions over the same respondent
// set; 1 iff identical up to relabeling. Normalization defaults to the
// arithmetic mean of the two label entropies.
double nmi(const Partition& est, const Partition& truth,
           NmiNormalization norm = NmiNormalization::ArithmeticMean);

// Scaled NMI: nmi * min(K_est, K_true) / max(K_est, K_true).
double snmi(double nmi_value, int k_est, int k_true);

// Frobenius distance sqrt(trace((A-B)(A-B)')).
double frobenius(const CorrelationMatrix& a, const CorrelationMatrix& b);

// Per-cluster Pearson correlation matrices of the numeric answers, ordered
// by cluster id. Constant columns within a cluster contribute zero
// correlations (unit diagonal). Throws DataError when a cluster has fewer
// than two members.
std::vector<CorrelationMatrix> estimate_cluster_correlations(const NumericMatrix& numeric,
                                                             const Partition& part);

// Injective pairing between estimated and true construals realizing the
// bottleneck dissimilarity. assignment[k] is the true index matched to
// estimated matrix k; -1 marks a match to an identity-augmented slot.
struct PairingResult {
    std::vector<int> assignment;
    double bottleneck_value = 0.0;
};

// min over injective pairings of the max Frobenius distance. When more
// construals are estimated than exist, the true collection is augmented
// with identity matrices.
PairingResult collection_dissimilarity_pairing(const std::vector<CorrelationMatrix>& estimated,
                                               const std::vector<CorrelationMatrix>& truth);
double collection_dissimilarity(const std::vector<CorrelationMatrix>& estimated,
                                const std::vector<CorrelationMatrix>& truth);

struct CdisResult {
    double raw = 0.0;        // D(estimated, true)
    double benchmark = 0.0;  // D^b, same computation with true membership
    double ratio = 0.0;      // raw / benchmark (inf when benchmark is 0)
    bool benchmark_zero = false;
};

// Correlational dissimilarity of a (unit-cluster-stripped) estimated
// partition against the dataset's true correlation structure, plus the
// known-membership benchmark. Clusters too small to estimate a correlation
// matrix contribute an identity estimate.
CdisResult cdis(const SyntheticDataset& dataset, const StripResult& stripped);

}  // namespace bca
