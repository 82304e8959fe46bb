#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bca/adjacency.hpp"

namespace bca {

// Cluster assignment: labels are 0-based and contiguous, every cluster
// non-empty.
struct Partition {
    std::vector<int> labels;
    int n_clusters = 0;

    std::size_t size() const { return labels.size(); }
    void validate() const;

    // Compacts arbitrary labels: clusters are renumbered by their smallest
    // member index, which makes the labeling deterministic and stable under
    // respondent permutations (up to the permutation itself).
    static Partition from_labels(const std::vector<int>& raw);
};

// True when the two partitions induce the same grouping up to cluster
// relabeling.
bool partitions_equivalent(const Partition& a, const Partition& b);

enum class PartitionAlgorithm { Newman, Louvain };
const char* algorithm_name(PartitionAlgorithm a);

struct PartitionerConfig {
    PartitionAlgorithm algorithm = PartitionAlgorithm::Newman;
    std::uint64_t louvain_seed = 0;
    int louvain_passes = 64;
    double modularity_tolerance = 1e-10;

    void validate() const;
};

// Weighted Newman modularity of a partition; invariant under cluster
// relabeling and under rescaling of the adjacency matrix.
double modularity(const AdjacencyMatrix& adj, const Partition& part);

// Newman's leading-eigenvector method: recursive spectral bisection of the
// (generalized) modularity matrix with Kernighan-Lin-style refinement.
// Deterministic; the input is internally normalized by its largest entry so
// the stopping tolerances act scale-free and results are invariant under
// rescaling of the adjacency matrix.
Partition newman_partition(const AdjacencyMatrix& adj, const PartitionerConfig& config);

// Standard two-phase Louvain on the weighted graph; node visit order is
// shuffled by louvain_seed, equal-gain moves break ties toward the lowest
// community id. Same seed, same output.
Partition louvain_partition(const AdjacencyMatrix& adj, const PartitionerConfig& config);

Partition run_partitioner(const AdjacencyMatrix& adj, const PartitionerConfig& config);

// Two-column CSV: respondent_id, cluster_id.
std::string partition_to_csv(const Partition& part,
                             const std::vector<std::string>& respondent_ids);

}  // namespace bca
