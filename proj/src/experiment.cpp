#include "bca/experiment.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"

#include "bca/csv.hpp"
#include "bca/errors.hpp"
#include "bca/rng.hpp"
#include "bca/version.hpp"

namespace bca {

using nlohmann::json;

namespace {

enum Stream : std::uint64_t {
    kMethodStream = 21,
    kBootstrapStream = 22,
    kLouvainSeedStream = 23,
};

std::uint64_t label_hash(const std::string& label) {
    std::uint64_t h = 0xBADC0DE5ULL;
    for (unsigned char ch : label) h = mix64(h ^ ch);
    return h;
}

std::string padded_number(std::int64_t v, int width) {
    std::string raw = std::to_string(v);
    if (static_cast<int>(raw.size()) < width) {
        raw.insert(raw.begin(), static_cast<std::size_t>(width) - raw.size(), '0');
    }
    return raw;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("short write: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

PartitionAlgorithm default_partitioner(MethodTag method) {
    return method == MethodTag::RRCA ? PartitionAlgorithm::Louvain
                                     : PartitionAlgorithm::Newman;
}

MethodSpec MethodSpec::parse(const std::string& token) {
    std::string base = to_lower(trim(token));
    std::optional<PartitionAlgorithm> override;
    if (base.size() > 2 && base.compare(base.size() - 2, 2, "-l") == 0) {
        override = PartitionAlgorithm::Louvain;
        base = base.substr(0, base.size() - 2);
    } else if (base.size() > 2 && base.compare(base.size() - 2, 2, "-n") == 0) {
        override = PartitionAlgorithm::Newman;
        base = base.substr(0, base.size() - 2);
    }
    MethodSpec spec;
    if (base == "bca") {
        spec.method = MethodTag::BCA;
    } else if (base == "rca") {
        spec.method = MethodTag::RCA;
    } else if (base == "cca") {
        spec.method = MethodTag::CCA;
    } else if (base == "rrca") {
        spec.method = MethodTag::RRCA;
    } else {
        throw ConfigError("unknown method '" + token + "'");
    }
    spec.partitioner = override.value_or(default_partitioner(spec.method));
    spec.label = to_lower(trim(token));
    return spec;
}

std::vector<MethodSpec> parse_method_list(const std::string& comma_separated) {
    std::vector<MethodSpec> out;
    std::set<std::string> seen;
    std::size_t start = 0;
    const std::string& s = comma_separated;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        const std::string token =
            s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!trim(token).empty()) {
            MethodSpec spec = MethodSpec::parse(token);
            if (!seen.insert(spec.label).second) {
                throw ConfigError("duplicate method '" + spec.label + "'");
            }
            out.push_back(std::move(spec));
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw ConfigError("method list is empty");
    return out;
}

DatasetScore score_method(const SyntheticDataset& ds, const MethodSpec& spec) {
    DatasetScore score;
    score.method_label = spec.label;
    score.k_true = ds.true_membership.n_clusters;
    const std::uint64_t method_seed =
        derive_seed(ds.dataset_seed, {kMethodStream, label_hash(spec.label)});

    std::string step = "adjacency";
    try {
        MethodConfig mc;
        mc.rca_edge_removal.seed = derive_seed(method_seed, {kBootstrapStream});
        AdjacencyMatrix adj;
        switch (spec.method) {
            case MethodTag::BCA: adj = bca_adjacency(ds.responses); break;
            case MethodTag::RCA: adj = rca_adjacency(ds.responses, mc); break;
            case MethodTag::CCA: adj = cca_adjacency(ds.responses, mc); break;
            case MethodTag::RRCA: adj = rrca_adjacency(ds.responses, mc); break;
        }

        step = "partition";
        PartitionerConfig pc;
        pc.algorithm = spec.partitioner;
        pc.louvain_seed = derive_seed(method_seed, {kLouvainSeedStream});
        const Partition part = run_partitioner(adj, pc);

        step = "metrics";
        score.k_est_raw = part.n_clusters;
        const StripResult stripped = strip_unit_clusters(part);
        score.k_est = stripped.partition.n_clusters;
        score.unit_clusters = stripped.removed_count;

        std::vector<int> truth_kept;
        truth_kept.reserve(stripped.kept.size());
        for (std::size_t i : stripped.kept) {
            truth_kept.push_back(ds.true_membership.labels[i]);
        }
        const Partition truth = Partition::from_labels(truth_kept);
        score.nmi_value = nmi(stripped.partition, truth);
        score.snmi_value = snmi(score.nmi_value, score.k_est, score.k_true);

        const CdisResult cd = cdis(ds, stripped);
        score.cdis_raw = cd.raw;
        score.cdis_ratio = cd.ratio;
        score.cdis_infinite = cd.benchmark_zero;
    } catch (const ConfigError& e) {
        score.error = true;
        score.error_step = step;
        score.error_message = e.what();
    } catch (const DataError& e) {
        score.error = true;
        score.error_step = step;
        score.error_message = e.what();
    } catch (const NumericError& e) {
        score.error = true;
        score.error_step = step;
        score.error_message = e.what();
    }
    return score;
}

namespace {

json score_to_json(const DatasetScore& s) {
    json j;
    j["error"] = s.error;
    j["error_step"] = s.error_step;
    j["error_message"] = s.error_message;
    j["k_est_raw"] = s.k_est_raw;
    j["k_est"] = s.k_est;
    j["unit_clusters"] = s.unit_clusters;
    j["nmi"] = s.nmi_value;
    j["snmi"] = s.snmi_value;
    j["cdis_raw"] = s.cdis_raw;
    if (s.cdis_infinite) {
        j["cdis_ratio"] = nullptr;
    } else {
        j["cdis_ratio"] = s.cdis_ratio;
    }
    return j;
}

DatasetScore score_from_json(const std::string& label, int k_true, const json& j) {
    DatasetScore s;
    s.method_label = label;
    s.k_true = k_true;
    s.error = j.at("error").get<bool>();
    s.error_step = j.at("error_step").get<std::string>();
    s.error_message = j.at("error_message").get<std::string>();
    s.k_est_raw = j.at("k_est_raw").get<int>();
    s.k_est = j.at("k_est").get<int>();
    s.unit_clusters = j.at("unit_clusters").get<int>();
    s.nmi_value = j.at("nmi").get<double>();
    s.snmi_value = j.at("snmi").get<double>();
    s.cdis_raw = j.at("cdis_raw").get<double>();
    if (j.at("cdis_ratio").is_null()) {
        s.cdis_infinite = true;
        s.cdis_ratio = std::numeric_limits<double>::infinity();
    } else {
        s.cdis_ratio = j.at("cdis_ratio").get<double>();
    }
    return s;
}

json record_to_json(const DatasetRecord& r) {
    json scores;
    for (const auto& s : r.scores) scores[s.method_label] = score_to_json(s);
    json j;
    j["index"] = r.index;
    j["n"] = r.n_respondents;
    j["q"] = r.n_questions;
    j["k_true"] = r.k_true;
    j["scores"] = std::move(scores);
    return j;
}

// Returns nothing when the record does not match the expected shape; the
// caller recomputes it.
std::optional<DatasetRecord> record_from_json(const json& j, std::int64_t index,
                                              const std::vector<MethodSpec>& methods) {
    try {
        if (j.at("index").get<std::int64_t>() != index) return std::nullopt;
        DatasetRecord r;
        r.index = index;
        r.n_respondents = j.at("n").get<int>();
        r.n_questions = j.at("q").get<int>();
        r.k_true = j.at("k_true").get<int>();
        const auto& scores = j.at("scores");
        for (const auto& m : methods) {
            if (!scores.contains(m.label)) return std::nullopt;
            r.scores.push_back(score_from_json(m.label, r.k_true, scores.at(m.label)));
        }
        return r;
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

}  // namespace

MethodAggregate aggregate_scores(const std::string& label,
                                 const std::vector<const DatasetScore*>& scores) {
    MethodAggregate agg;
    agg.method_label = label;
    agg.n_total = static_cast<int>(scores.size());
    std::vector<std::pair<int, int>> counts;
    double cdis_sum = 0.0, cdis_raw_sum = 0.0, snmi_sum = 0.0, nmi_sum = 0.0;
    int units = 0;
    int cdis_n = 0;
    for (const DatasetScore* s : scores) {
        if (s->error) {
            ++agg.n_error;
            continue;
        }
        ++agg.n_scored;
        counts.emplace_back(s->k_est, s->k_true);
        if (!s->cdis_infinite) {
            cdis_sum += s->cdis_ratio;
            cdis_raw_sum += s->cdis_raw;
            ++cdis_n;
        }
        snmi_sum += s->snmi_value;
        nmi_sum += s->nmi_value;
        if (s->unit_clusters > 0) ++units;
    }
    if (agg.n_total > 0) {
        agg.error_rate = static_cast<double>(agg.n_error) / agg.n_total;
    }
    if (agg.n_scored > 0) {
        agg.cpa = cpa(counts);
        agg.mad = mad(counts);
        agg.snmi_mean = snmi_sum / agg.n_scored;
        agg.nmi_mean = nmi_sum / agg.n_scored;
        agg.unit_cluster_rate = static_cast<double>(units) / agg.n_scored;
    }
    if (cdis_n > 0) {
        agg.cdis_ratio_mean = cdis_sum / cdis_n;
        agg.cdis_raw_mean = cdis_raw_sum / cdis_n;
    }
    return agg;
}

namespace {

json aggregate_to_json(const MethodAggregate& a) {
    json j;
    j["n_total"] = a.n_total;
    j["n_scored"] = a.n_scored;
    j["n_error"] = a.n_error;
    j["error_rate"] = a.error_rate;
    j["cpa"] = a.cpa;
    j["mad"] = a.mad;
    j["cdis_ratio_mean"] = a.cdis_ratio_mean;
    j["cdis_raw_mean"] = a.cdis_raw_mean;
    j["snmi_mean"] = a.snmi_mean;
    j["nmi_mean"] = a.nmi_mean;
    j["unit_cluster_rate"] = a.unit_cluster_rate;
    return j;
}

std::string build_report_csv(const std::vector<DatasetRecord>& records) {
    std::string out =
        "dataset_index,method,status,error_step,k_true,k_est_raw,k_est,unit_clusters,"
        "nmi,snmi,cdis_raw,cdis_ratio,n_respondents,n_questions\n";
    for (const auto& r : records) {
        for (const auto& s : r.scores) {
            out += std::to_string(r.index);
            out += ",";
            out += s.method_label;
            if (s.error) {
                out += ",error," + s.error_step + "," + std::to_string(r.k_true);
                out += ",,,,,,,";
            } else {
                out += ",ok,," + std::to_string(r.k_true);
                out += "," + std::to_string(s.k_est_raw);
                out += "," + std::to_string(s.k_est);
                out += "," + std::to_string(s.unit_clusters);
                out += "," + fmt_double(s.nmi_value);
                out += "," + fmt_double(s.snmi_value);
                out += "," + fmt_double(s.cdis_raw);
                out += ",";
                out += s.cdis_infinite ? "inf" : fmt_double(s.cdis_ratio);
            }
            out += "," + std::to_string(r.n_respondents);
            out += "," + std::to_string(r.n_questions);
            out += "\n";
        }
    }
    return out;
}

}  // namespace

void run_experiment(const ExperimentOptions& options) {
    options.config.validate();
    if (options.methods.empty()) throw ConfigError("experiment needs at least one method");
    if (options.n_datasets < 0) throw ConfigError("n_datasets must be >= 0");
    if (options.workers < 1) throw ConfigError("workers must be >= 1");

    std::error_code ec;
    std::filesystem::create_directories(options.out_dir / "records", ec);
    if (ec) throw DataError("cannot create output directory: " + options.out_dir.string());

    // Guard against resuming into a directory that belongs to a different
    // run; the per-dataset records are only reusable for identical inputs.
    json run_config;
    run_config["config"] = json::parse(dgp_config_to_json(options.config));
    run_config["config_hash"] = dgp_config_hash(options.config);
    run_config["master_seed"] = options.master_seed;
    run_config["n_datasets"] = options.n_datasets;
    {
        json methods = json::array();
        for (const auto& m : options.methods) methods.push_back(m.label);
        run_config["methods"] = std::move(methods);
    }
    const auto run_config_path = options.out_dir / "run_config.json";
    const std::string run_config_text = run_config.dump(2) + "\n";
    if (std::filesystem::exists(run_config_path)) {
        if (read_text_file(run_config_path) != run_config_text) {
            throw ConfigError("output directory holds a different run (run_config.json differs)");
        }
    } else {
        write_file_atomic(run_config_path, run_config_text);
    }

    const auto n = static_cast<std::size_t>(options.n_datasets);
    std::vector<DatasetRecord> records(n);
    std::atomic<std::int64_t> next{0};
    std::atomic<std::int64_t> done{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            const std::int64_t idx = next.fetch_add(1);
            if (idx >= options.n_datasets) return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) return;
            }
            try {
                const auto rec_path =
                    options.out_dir / "records" / ("ds_" + padded_number(idx, 6) + ".json");
                std::optional<DatasetRecord> rec;
                if (std::filesystem::exists(rec_path)) {
                    try {
                        rec = record_from_json(json::parse(read_text_file(rec_path)), idx,
                                               options.methods);
                    } catch (const json::exception&) {
                        rec = std::nullopt;
                    }
                }
                if (!rec.has_value()) {
                    const SyntheticDataset ds =
                        generate_dataset(options.config, options.master_seed, idx);
                    DatasetRecord fresh;
                    fresh.index = idx;
                    fresh.n_respondents = static_cast<int>(ds.responses.respondent_count());
                    fresh.n_questions = ds.responses.survey.question_count();
                    fresh.k_true = ds.true_membership.n_clusters;
                    for (const auto& m : options.methods) {
                        fresh.scores.push_back(score_method(ds, m));
                    }
                    write_file_atomic(rec_path, record_to_json(fresh).dump(2) + "\n");
                    rec = std::move(fresh);
                }
                records[static_cast<std::size_t>(idx)] = std::move(*rec);
                const std::int64_t finished = done.fetch_add(1) + 1;
                if (finished % 25 == 0 || finished == options.n_datasets) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    std::cerr << "[experiment] " << finished << "/" << options.n_datasets
                              << " datasets scored\n";
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int thread_count =
        static_cast<int>(std::min<std::int64_t>(options.workers,
                                                std::max<std::int64_t>(options.n_datasets, 1)));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);

    // Reports are rebuilt from the records in index order, so their bytes
    // depend only on (config, seed, methods).
    write_file_atomic(options.out_dir / "report.csv", build_report_csv(records));

    json aggregates;
    aggregates["experiment"] = options.config.name;
    aggregates["config_hash"] = dgp_config_hash(options.config);
    aggregates["master_seed"] = options.master_seed;
    aggregates["n_datasets"] = options.n_datasets;
    {
        json methods_order = json::array();
        for (const auto& m : options.methods) methods_order.push_back(m.label);
        aggregates["methods_order"] = std::move(methods_order);
    }
    json per_method;
    for (std::size_t mi = 0; mi < options.methods.size(); ++mi) {
        std::vector<const DatasetScore*> scores;
        scores.reserve(records.size());
        for (const auto& r : records) scores.push_back(&r.scores[mi]);
        per_method[options.methods[mi].label] =
            aggregate_to_json(aggregate_scores(options.methods[mi].label, scores));
    }
    aggregates["methods"] = std::move(per_method);

    // Per-true-K breakout (Appendix-style reporting).
    std::map<int, std::vector<const DatasetRecord*>> by_k;
    for (const auto& r : records) by_k[r.k_true].push_back(&r);
    json by_true_k;
    for (const auto& [k, recs] : by_k) {
        json row;
        for (std::size_t mi = 0; mi < options.methods.size(); ++mi) {
            std::vector<const DatasetScore*> scores;
            scores.reserve(recs.size());
            for (const DatasetRecord* r : recs) scores.push_back(&r->scores[mi]);
            row[options.methods[mi].label] =
                aggregate_to_json(aggregate_scores(options.methods[mi].label, scores));
        }
        by_true_k[std::to_string(k)] = std::move(row);
    }
    aggregates["by_true_k"] = std::move(by_true_k);
    write_file_atomic(options.out_dir / "aggregates.json", aggregates.dump(2) + "\n");

    json manifest;
    manifest["kind"] = "experiment";
    manifest["version"] = kVersion;
    manifest["experiment"] = options.config.name;
    manifest["config_hash"] = dgp_config_hash(options.config);
    manifest["master_seed"] = options.master_seed;
    manifest["n_datasets"] = options.n_datasets;
    {
        json methods = json::array();
        for (const auto& m : options.methods) {
            json jm;
            jm["label"] = m.label;
            jm["method"] = method_name(m.method);
            jm["partitioner"] = algorithm_name(m.partitioner);
            methods.push_back(std::move(jm));
        }
        manifest["methods"] = std::move(methods);
    }
    {
        json statuses = json::array();
        for (const auto& r : records) {
            json st;
            st["index"] = r.index;
            json per;
            for (const auto& s : r.scores) {
                if (s.error) {
                    json err;
                    err["step"] = s.error_step;
                    err["message"] = s.error_message;
                    per[s.method_label] = std::move(err);
                } else {
                    per[s.method_label] = "ok";
                }
            }
            st["methods"] = std::move(per);
            statuses.push_back(std::move(st));
        }
        manifest["datasets"] = std::move(statuses);
    }
    write_file_atomic(options.out_dir / "manifest.json", manifest.dump(2) + "\n");
}

void cmd_simulate(const DgpConfig& config, std::int64_t n_datasets, std::uint64_t seed,
                  const std::filesystem::path& out_dir, bool keep_latent) {
    config.validate();
    if (n_datasets < 0) throw ConfigError("n_datasets must be >= 0");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) {
        throw DataError("cannot create output directory: " + out_dir.string());
    }

    json datasets = json::array();
    for (std::int64_t idx = 0; idx < n_datasets; ++idx) {
        const SyntheticDataset ds = generate_dataset(config, seed, idx);
        const std::string dir_name = "ds_" + padded_number(idx, 6);
        write_dataset(ds, out_dir / dir_name, keep_latent);
        json entry;
        entry["index"] = idx;
        entry["dir"] = dir_name;
        entry["status"] = "ok";
        entry["n_respondents"] = ds.responses.respondent_count();
        datasets.push_back(std::move(entry));
    }

    json manifest;
    manifest["kind"] = "simulate";
    manifest["version"] = kVersion;
    manifest["master_seed"] = seed;
    manifest["config_hash"] = dgp_config_hash(config);
    manifest["config"] = json::parse(dgp_config_to_json(config));
    manifest["n_datasets"] = n_datasets;
    manifest["datasets"] = std::move(datasets);
    write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

void cmd_cluster(const ClusterOptions& options) {
    ResponseMatrix responses;
    if (std::filesystem::is_directory(options.input)) {
        const Survey survey =
            parse_survey_schema(read_text_file(options.input / "schema.json"));
        responses = load_responses(read_text_file(options.input / "responses.csv"), survey);
    } else {
        if (!options.schema.has_value()) {
            throw ConfigError("CSV input needs --schema");
        }
        const Survey survey = parse_survey_schema(read_text_file(*options.schema));
        responses = load_responses(read_text_file(options.input), survey);
    }
    if (responses.respondent_count() < 2) {
        throw DataError("insufficient respondents: need at least 2");
    }

    MethodConfig mc = options.method_config;
    mc.rca_edge_removal.seed = derive_seed(options.seed, {kBootstrapStream});

    AdjacencyMatrix adj;
    switch (options.method) {
        case MethodTag::BCA: adj = bca_adjacency(responses); break;
        case MethodTag::RCA: adj = rca_adjacency(responses, mc); break;
        case MethodTag::CCA: adj = cca_adjacency(responses, mc); break;
        case MethodTag::RRCA: adj = rrca_adjacency(responses, mc); break;
    }

    PartitionerConfig pc;
    pc.algorithm = options.partitioner.value_or(default_partitioner(options.method));
    pc.louvain_seed = derive_seed(options.seed, {kLouvainSeedStream});
    const Partition part = run_partitioner(adj, pc);

    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) throw DataError("cannot create output directory: " + options.out_dir.string());
    write_file_atomic(options.out_dir / "partition.csv",
                      partition_to_csv(part, responses.respondent_ids));
    if (options.write_adjacency) {
        write_file_atomic(options.out_dir / "adjacency.csv",
                          adjacency_to_csv(adj, responses.respondent_ids));
    }

    json echo;
    echo["method"] = method_name(options.method);
    echo["partitioner"] = algorithm_name(pc.algorithm);
    echo["seed"] = options.seed;
    echo["n_respondents"] = responses.respondent_count();
    echo["n_clusters"] = part.n_clusters;
    echo["rca_edge_removal"] = mc.rca_edge_removal.enabled;
    echo["rca_iterations"] = mc.rca_edge_removal.iterations;
    echo["rca_alpha"] = mc.rca_edge_removal.alpha;
    echo["cca_significance_alpha"] = mc.cca_significance_alpha;
    echo["cca_constant_policy"] =
        mc.cca_constant_policy == CcaConstantPolicy::ZeroEdge ? "zero-edge" : "drop-respondent";
    echo["rrca_second_difference"] = mc.rrca_second_difference;
    echo["version"] = kVersion;
    write_file_atomic(options.out_dir / "cluster_config.json", echo.dump(2) + "\n");
}

namespace {

// respondent_id -> cluster label, from a two-column CSV.
std::map<std::string, int> read_label_file(const std::filesystem::path& path) {
    const auto rows = parse_csv(read_text_file(path));
    if (rows.size() < 2) throw DataError("label file has no data rows: " + path.string());
    std::map<std::string, int> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 2) {
            throw DataError("label file needs two columns: " + path.string());
        }
        const std::string id = trim(rows[r][0]);
        if (!out.emplace(id, static_cast<int>(parse_long(rows[r][1]))).second) {
            throw DataError("duplicate respondent id '" + id + "' in " + path.string());
        }
    }
    return out;
}

}  // namespace

std::string cmd_evaluate(const EvaluateOptions& options) {
    if (!options.truth_file.has_value() && !options.dataset_dir.has_value()) {
        throw ConfigError("evaluate needs --truth or --dataset for ground truth");
    }

    const auto est_by_id = read_label_file(options.partition_file);

    std::optional<SyntheticDataset> dataset;
    if (options.dataset_dir.has_value()) {
        dataset = read_dataset(*options.dataset_dir);
    }

    // Canonical respondent order: the dataset's when present, otherwise the
    // truth file's row order.
    std::vector<std::string> ids;
    std::vector<int> truth_labels;
    if (dataset.has_value() && !options.truth_file.has_value()) {
        ids = dataset->responses.respondent_ids;
        truth_labels = dataset->true_membership.labels;
    } else {
        const auto rows = parse_csv(read_text_file(*options.truth_file));
        if (rows.size() < 2) throw DataError("truth file has no data rows");
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (rows[r].size() != 2) throw DataError("truth file needs two columns");
            ids.push_back(trim(rows[r][0]));
            truth_labels.push_back(static_cast<int>(parse_long(rows[r][1])));
        }
        if (dataset.has_value()) {
            // Align to the dataset row order for CDIS.
            std::map<std::string, int> truth_by_id;
            for (std::size_t i = 0; i < ids.size(); ++i) truth_by_id[ids[i]] = truth_labels[i];
            ids = dataset->responses.respondent_ids;
            truth_labels.clear();
            for (const auto& id : ids) {
                const auto it = truth_by_id.find(id);
                if (it == truth_by_id.end()) {
                    throw DataError("truth file is missing respondent '" + id + "'");
                }
                truth_labels.push_back(it->second);
            }
        }
    }

    if (est_by_id.size() != ids.size()) {
        throw DataError("partition and ground truth cover different respondent sets");
    }
    std::vector<int> est_labels;
    est_labels.reserve(ids.size());
    for (const auto& id : ids) {
        const auto it = est_by_id.find(id);
        if (it == est_by_id.end()) {
            throw DataError("partition file is missing respondent '" + id + "'");
        }
        est_labels.push_back(it->second);
    }

    const Partition est = Partition::from_labels(est_labels);
    const Partition truth = Partition::from_labels(truth_labels);
    const int k_true = truth.n_clusters;

    const StripResult stripped = strip_unit_clusters(est);
    std::vector<int> truth_kept;
    truth_kept.reserve(stripped.kept.size());
    for (std::size_t i : stripped.kept) truth_kept.push_back(truth.labels[i]);
    const Partition truth_stripped = Partition::from_labels(truth_kept);

    const double nmi_value = nmi(stripped.partition, truth_stripped);

    json out;
    out["version"] = kVersion;
    out["n_respondents"] = ids.size();
    out["k_true"] = k_true;
    out["k_est_raw"] = est.n_clusters;
    out["k_est"] = stripped.partition.n_clusters;
    out["unit_clusters"] = stripped.removed_count;
    out["nmi"] = nmi_value;
    out["snmi"] = snmi(nmi_value, stripped.partition.n_clusters, k_true);

    if (dataset.has_value()) {
        if (dataset->construals.empty()) {
            throw DataError("dataset has no true correlation matrices; cannot compute CDIS");
        }
        // CDIS needs the estimated partition aligned with dataset rows,
        // which the join above guarantees.
        SyntheticDataset& ds = *dataset;
        ds.true_membership = truth;
        const CdisResult cd = cdis(ds, stripped);
        out["cdis_raw"] = cd.raw;
        if (cd.benchmark_zero) {
            out["cdis_ratio"] = nullptr;
        } else {
            out["cdis_ratio"] = cd.ratio;
        }
    }

    const std::string text = out.dump(2) + "\n";
    if (options.out_file.has_value()) {
        write_file_atomic(*options.out_file, text);
    }
    return text;
}

}  // namespace bca
