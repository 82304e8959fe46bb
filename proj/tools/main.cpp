// bca: construal clustering from bipolar survey data.
//
// Subcommands: simulate (synthetic datasets), cluster (one method on one
// input), evaluate (score a partition against ground truth), experiment
// (seeded batch runs with aggregate reports).

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "bca/errors.hpp"
#include "bca/experiment.hpp"
#include "bca/simulate.hpp"
#include "bca/version.hpp"

namespace {

int run(int argc, char** argv) {
    CLI::App app{"Construal clustering for bipolar survey data"};
    app.set_version_flag("--version", bca::kVersion);
    app.require_subcommand(1);

    std::uint64_t seed = 42;
    int workers = 1;
    std::string out_dir = ".";
    app.add_option("--seed", seed, "Master seed")->capture_default_str();
    app.add_option("--workers", workers, "Worker threads for batch runs")
        ->capture_default_str();
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.fallthrough();

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate synthetic datasets");
    std::string sim_config = "exp1";
    std::int64_t sim_n = 1;
    bool keep_latent = false;
    std::string k_choices;
    sim->add_option("--config", sim_config, "exp1, exp2, or a JSON config path")
        ->capture_default_str();
    sim->add_option("--n", sim_n, "Number of datasets")->capture_default_str();
    sim->add_flag("--keep-latent", keep_latent, "Also write latent positions");
    sim->add_option("--k-choices", k_choices,
                    "Restrict the construal-count draw, e.g. 2,3,4");

    // cluster
    auto* clu = app.add_subcommand("cluster", "Cluster one dataset or CSV");
    std::string clu_input;
    std::string clu_schema;
    std::string clu_method = "bca";
    std::string clu_partitioner;
    bool rca_no_edge_removal = false;
    int rca_iterations = 1000;
    double rca_alpha = 0.05;
    double cca_alpha = 0.01;
    std::string cca_policy = "zero-edge";
    bool rrca_second_difference = false;
    bool write_adjacency = false;
    clu->add_option("--input", clu_input, "Dataset directory or responses CSV")->required();
    clu->add_option("--schema", clu_schema, "Survey schema JSON (for CSV input)");
    clu->add_option("--method", clu_method, "bca|rca|cca|rrca")->capture_default_str();
    clu->add_option("--partitioner", clu_partitioner,
                    "newman|louvain (defaults per method)");
    clu->add_flag("--rca-no-edge-removal", rca_no_edge_removal,
                  "Disable the RCA bootstrap edge removal");
    clu->add_option("--rca-iterations", rca_iterations, "Bootstrap iterations")
        ->capture_default_str();
    clu->add_option("--rca-alpha", rca_alpha, "Bootstrap significance level")
        ->capture_default_str();
    clu->add_option("--cca-alpha", cca_alpha, "CCA significance level")
        ->capture_default_str();
    clu->add_option("--cca-constant-policy", cca_policy, "zero-edge|drop-respondent")
        ->capture_default_str();
    clu->add_flag("--rrca-second-difference", rrca_second_difference,
                  "Experimental RRCA difference-in-differences variant");
    clu->add_flag("--write-adjacency", write_adjacency, "Also export adjacency.csv");

    // evaluate
    auto* eva = app.add_subcommand("evaluate", "Score a partition against ground truth");
    std::string eva_partition;
    std::string eva_truth;
    std::string eva_dataset;
    std::string eva_out;
    eva->add_option("--partition", eva_partition, "Partition CSV")->required();
    eva->add_option("--truth", eva_truth, "Ground-truth CSV");
    eva->add_option("--dataset", eva_dataset, "Dataset directory (enables CDIS)");
    eva->add_option("--out-file", eva_out, "Also write the JSON record here");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Batch simulation experiment");
    std::string exp_name = "exp1";
    std::int64_t exp_n = 10;
    std::string exp_methods = "bca,rca,cca,rrca";
    std::string exp_k_choices;
    exp->add_option("--name", exp_name, "exp1, exp2, or a JSON config path")
        ->capture_default_str();
    exp->add_option("--n", exp_n, "Number of datasets")->capture_default_str();
    exp->add_option("--methods", exp_methods, "Comma-separated method list")
        ->capture_default_str();
    exp->add_option("--k-choices", exp_k_choices,
                    "Restrict the construal-count draw, e.g. 2,3,4");

    CLI11_PARSE(app, argc, argv);

    const auto apply_k_choices = [](bca::DgpConfig& cfg, const std::string& spec) {
        if (spec.empty()) return;
        std::vector<std::int64_t> ks;
        std::size_t start = 0;
        while (start <= spec.size()) {
            const std::size_t comma = spec.find(',', start);
            const std::string tok =
                spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (!tok.empty()) ks.push_back(std::stoll(tok));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        cfg.num_construals = bca::IntDraw::from_choices(ks);
        cfg.validate();
    };

    if (sim->parsed()) {
        bca::DgpConfig cfg = bca::resolve_dgp_config(sim_config);
        apply_k_choices(cfg, k_choices);
        bca::cmd_simulate(cfg, sim_n, seed, out_dir, keep_latent);
        std::cout << "wrote " << sim_n << " dataset(s) to " << out_dir << "\n";
        return 0;
    }

    if (clu->parsed()) {
        bca::ClusterOptions opt;
        opt.input = clu_input;
        if (!clu_schema.empty()) opt.schema = clu_schema;
        opt.method = bca::MethodSpec::parse(clu_method).method;
        if (!clu_partitioner.empty()) {
            if (clu_partitioner == "newman") {
                opt.partitioner = bca::PartitionAlgorithm::Newman;
            } else if (clu_partitioner == "louvain") {
                opt.partitioner = bca::PartitionAlgorithm::Louvain;
            } else {
                throw bca::ConfigError("unknown partitioner '" + clu_partitioner + "'");
            }
        }
        opt.method_config.rca_edge_removal.enabled = !rca_no_edge_removal;
        opt.method_config.rca_edge_removal.iterations = rca_iterations;
        opt.method_config.rca_edge_removal.alpha = rca_alpha;
        opt.method_config.cca_significance_alpha = cca_alpha;
        if (cca_policy == "zero-edge") {
            opt.method_config.cca_constant_policy = bca::CcaConstantPolicy::ZeroEdge;
        } else if (cca_policy == "drop-respondent") {
            opt.method_config.cca_constant_policy = bca::CcaConstantPolicy::DropRespondent;
        } else {
            throw bca::ConfigError("unknown constant policy '" + cca_policy + "'");
        }
        opt.method_config.rrca_second_difference = rrca_second_difference;
        opt.seed = seed;
        opt.out_dir = out_dir;
        opt.write_adjacency = write_adjacency;
        bca::cmd_cluster(opt);
        std::cout << "wrote partition to " << (opt.out_dir / "partition.csv") << "\n";
        return 0;
    }

    if (eva->parsed()) {
        bca::EvaluateOptions opt;
        opt.partition_file = eva_partition;
        if (!eva_truth.empty()) opt.truth_file = eva_truth;
        if (!eva_dataset.empty()) opt.dataset_dir = eva_dataset;
        if (!eva_out.empty()) opt.out_file = eva_out;
        std::cout << bca::cmd_evaluate(opt);
        return 0;
    }

    if (exp->parsed()) {
        bca::ExperimentOptions opt;
        opt.config = bca::resolve_dgp_config(exp_name);
        apply_k_choices(opt.config, exp_k_choices);
        opt.n_datasets = exp_n;
        opt.master_seed = seed;
        opt.methods = bca::parse_method_list(exp_methods);
        opt.out_dir = out_dir;
        opt.workers = workers;
        bca::run_experiment(opt);
        std::cout << "experiment report written to " << (opt.out_dir / "aggregates.json")
                  << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const bca::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const bca::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const bca::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
