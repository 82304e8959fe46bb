#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bca/adjacency.hpp"
#include "bca/metrics.hpp"
#include "bca/partition.hpp"
#include "bca/simulate.hpp"

namespace bca {

// One clustering method to run: adjacency flavor plus partitioner. Default
// pairings: BCA/RCA/CCA with Newman, RRCA with Louvain; "bca-l" is the
// Louvain variant of BCA.
struct MethodSpec {
    MethodTag method = MethodTag::BCA;
    PartitionAlgorithm partitioner = PartitionAlgorithm::Newman;
    std::string label;

    static MethodSpec parse(const std::string& token);
};
std::vector<MethodSpec> parse_method_list(const std::string& comma_separated);
PartitionAlgorithm default_partitioner(MethodTag method);

// Scoring outcome of one method on one dataset.
struct DatasetScore {
    std::string method_label;
    bool error = false;
    std::string error_step;     // adjacency | partition | metrics
    std::string error_message;
    int k_true = 0;
    int k_est_raw = 0;          // clusters before unit-cluster stripping
    int k_est = 0;              // clusters after stripping
    int unit_clusters = 0;
    double nmi_value = 0.0;
    double snmi_value = 0.0;
    double cdis_raw = 0.0;
    double cdis_ratio = 0.0;
    bool cdis_infinite = false;
};

struct DatasetRecord {
    std::int64_t index = 0;
    int n_respondents = 0;
    int n_questions = 0;
    int k_true = 0;
    std::vector<DatasetScore> scores;  // in method-list order
};

// Runs one method end-to-end on a generated dataset and scores it against
// the ground truth. Failures are captured in the returned record, tagged
// with the step that failed.
DatasetScore score_method(const SyntheticDataset& ds, const MethodSpec& spec);

struct MethodAggregate {
    std::string method_label;
    int n_total = 0;
    int n_error = 0;
    int n_scored = 0;
    double error_rate = 0.0;
    double cpa = 0.0;
    double mad = 0.0;
    double cdis_ratio_mean = 0.0;
    double cdis_raw_mean = 0.0;
    double snmi_mean = 0.0;
    double nmi_mean = 0.0;
    double unit_cluster_rate = 0.0;  // share of scored datasets with >= 1 unit cluster
};

MethodAggregate aggregate_scores(const std::string& label,
                                 const std::vector<const DatasetScore*>& scores);

struct ExperimentOptions {
    DgpConfig config;
    std::int64_t n_datasets = 0;
    std::uint64_t master_seed = 0;
    std::vector<MethodSpec> methods;
    std::filesystem::path out_dir;
    int workers = 1;
};

// Seeded, resumable batch run. Per-dataset results land in
// out_dir/records/ds_NNNNNN.json (existing records are reused); report.csv,
// aggregates.json and manifest.json are rebuilt at the end. Every output
// byte is a function of (config, seed, methods) only, independent of worker
// count and scheduling.
void run_experiment(const ExperimentOptions& options);

// CLI entry points. They throw ConfigError/DataError/NumericError; the
// binary maps these to exit codes.
void cmd_simulate(const DgpConfig& config, std::int64_t n_datasets, std::uint64_t seed,
                  const std::filesystem::path& out_dir, bool keep_latent);

struct ClusterOptions {
    std::filesystem::path input;            // dataset dir or responses CSV
    std::optional<std::filesystem::path> schema;  // required for bare CSV input
    MethodTag method = MethodTag::BCA;
    std::optional<PartitionAlgorithm> partitioner;  // defaulted per method
    MethodConfig method_config;
    std::uint64_t seed = 42;
    std::filesystem::path out_dir = ".";
    bool write_adjacency = false;
};
void cmd_cluster(const ClusterOptions& options);

struct EvaluateOptions {
    std::filesystem::path partition_file;
    std::optional<std::filesystem::path> truth_file;   // defaulted from dataset dir
    std::optional<std::filesystem::path> dataset_dir;  // enables CDIS
    std::optional<std::filesystem::path> out_file;
};
// Returns the JSON record it printed.
std::string cmd_evaluate(const EvaluateOptions& options);

}  // namespace bca
