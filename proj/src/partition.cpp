#include "bca/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "bca/csv.hpp"
#include "bca/errors.hpp"
#include "bca/rng.hpp"

namespace bca {

const char* algorithm_name(PartitionAlgorithm a) {
    return a == PartitionAlgorithm::Newman ? "newman" : "louvain";
}

void Partition::validate() const {
    if (labels.empty()) throw DataError("partition has no respondents");
    if (n_clusters < 1) throw DataError("partition needs at least one cluster");
    std::vector<int> count(static_cast<std::size_t>(n_clusters), 0);
    for (int lab : labels) {
        if (lab < 0 || lab >= n_clusters) throw DataError("partition label out of range");
        ++count[static_cast<std::size_t>(lab)];
    }
    for (int c : count) {
        if (c == 0) throw DataError("partition has an empty cluster");
    }
}

Partition Partition::from_labels(const std::vector<int>& raw) {
    if (raw.empty()) throw DataError("partition has no respondents");
    // Renumber clusters by smallest member index.
    std::map<int, int> first_seen;
    int next = 0;
    for (int lab : raw) {
        if (first_seen.emplace(lab, next).second) ++next;
    }
    Partition out;
    out.labels.reserve(raw.size());
    for (int lab : raw) out.labels.push_back(first_seen[lab]);
    out.n_clusters = next;
    out.validate();
    return out;
}

bool partitions_equivalent(const Partition& a, const Partition& b) {
    if (a.labels.size() != b.labels.size()) return false;
    if (a.n_clusters != b.n_clusters) return false;
    std::map<int, int> fwd;
    std::map<int, int> bwd;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        const int la = a.labels[i];
        const int lb = b.labels[i];
        auto f = fwd.emplace(la, lb);
        if (!f.second && f.first->second != lb) return false;
        auto g = bwd.emplace(lb, la);
        if (!g.second && g.first->second != la) return false;
    }
    return true;
}

void PartitionerConfig::validate() const {
    if (louvain_passes < 1) throw ConfigError("louvain_passes must be >= 1");
    if (!(modularity_tolerance > 0.0)) throw ConfigError("modularity_tolerance must be > 0");
}

namespace {

void check_adjacency_input(const AdjacencyMatrix& adj) {
    const std::size_t n = adj.size();
    if (adj.values.cols != n) throw DataError("adjacency matrix must be square");
    if (n < 2) throw DataError("insufficient respondents: need at least 2");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = adj.values.at(i, j);
            if (!std::isfinite(v)) throw DataError("adjacency entry not finite");
            if (v < 0.0) throw DataError("adjacency entries must be nonnegative");
            if (adj.values.at(j, i) != v) throw DataError("adjacency matrix must be symmetric");
        }
    }
}

struct Graph {
    std::size_t n = 0;
    const DenseMatrix* w = nullptr;
    std::vector<double> degree;
    double two_m = 0.0;
};

Graph make_graph(const DenseMatrix& w) {
    Graph g;
    g.n = w.rows;
    g.w = &w;
    g.degree.assign(g.n, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) {
        double s = 0.0;
        const double* row = w.row(i);
        for (std::size_t j = 0; j < g.n; ++j) s += row[j];
        g.degree[i] = s;
        g.two_m += s;
    }
    return g;
}

// Deterministic start vector for the power iteration: all ones plus a fixed
// hash-based perturbation (the all-ones direction is an exact eigenvector
// of the modularity matrix, so it must be broken).
double start_perturbation(std::size_t i) {
    const std::uint64_t h = mix64(0x5EEDBA5Eull + i);
    return 2.0e-2 * (static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5);
}

constexpr double kEigSplitGainTol = 1e-12;
constexpr int kPowerMaxIter = 10000;

// One community of the recursive bisection, as original-vertex indices.
struct SplitResult {
    bool split = false;
    std::vector<std::size_t> left, right;
};

// Connected components of the subgraph induced by `members`; separating
// disconnected parts always increases modularity, and the spectral step
// assumes a connected graph (the leading eigenvector localizes on one
// component otherwise).
std::vector<std::vector<std::size_t>> subgraph_components(
    const Graph& g, const std::vector<std::size_t>& members) {
    const std::size_t m = members.size();
    std::vector<char> seen(m, 0);
    std::vector<std::vector<std::size_t>> comps;
    for (std::size_t s = 0; s < m; ++s) {
        if (seen[s]) continue;
        std::vector<std::size_t> stack{s};
        seen[s] = 1;
        std::vector<std::size_t> comp;
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            stack.pop_back();
            comp.push_back(members[a]);
            const double* row = g.w->row(members[a]);
            for (std::size_t b = 0; b < m; ++b) {
                if (!seen[b] && row[members[b]] > 0.0) {
                    seen[b] = 1;
                    stack.push_back(b);
                }
            }
        }
        comps.push_back(std::move(comp));
    }
    return comps;
}

SplitResult try_split(const Graph& g, const std::vector<std::size_t>& members,
                      double eig_tol) {
    SplitResult res;
    const std::size_t m = members.size();
    if (m < 2) return res;

    // Generalized modularity matrix of the subgraph:
    // Bg[i][j] = W[ij] - k_i k_j / 2m - delta_ij * f_i,
    // f_i = sum_j (W[ij] - k_i k_j / 2m) over the subgraph.
    DenseMatrix bg(m, m);
    for (std::size_t a = 0; a < m; ++a) {
        const std::size_t i = members[a];
        const double* row = g.w->row(i);
        double fsum = 0.0;
        for (std::size_t b = 0; b < m; ++b) {
            const std::size_t j = members[b];
            const double v = row[j] - g.degree[i] * g.degree[j] / g.two_m;
            bg.at(a, b) = v;
            fsum += v;
        }
        bg.at(a, a) -= fsum;
    }

    // Shifted power iteration for the algebraically largest eigenvalue.
    double shift = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
        double s = 0.0;
        for (std::size_t b = 0; b < m; ++b) s += std::fabs(bg.at(a, b));
        shift = std::max(shift, s);
    }
    if (shift == 0.0) return res;

    std::vector<double> v(m), next(m);
    for (std::size_t a = 0; a < m; ++a) v[a] = 1.0 + start_perturbation(a);
    double vnorm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    for (auto& x : v) x /= vnorm;

    double rayleigh = 0.0;
    bool converged = false;
    for (int it = 0; it < kPowerMaxIter; ++it) {
        for (std::size_t a = 0; a < m; ++a) {
            const double* row = bg.row(a);
            double s = shift * v[a];
            for (std::size_t b = 0; b < m; ++b) s += row[b] * v[b];
            next[a] = s;
        }
        const double rq = std::inner_product(v.begin(), v.end(), next.begin(), 0.0);
        const double nn = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
        if (nn == 0.0) return res;
        for (std::size_t a = 0; a < m; ++a) v[a] = next[a] / nn;
        if (it > 0 && std::fabs(rq - rayleigh) < 1e-10) {
            rayleigh = rq;
            converged = true;
            break;
        }
        rayleigh = rq;
    }
    if (!converged) return res;  // declare indivisible
    const double lambda1 = rayleigh - shift;
    if (lambda1 <= eig_tol) return res;

    // Sign split on the leading eigenvector.
    std::vector<double> s(m);
    for (std::size_t a = 0; a < m; ++a) s[a] = (v[a] < 0.0) ? -1.0 : 1.0;

    std::vector<double> bs(m);  // Bg * s
    for (std::size_t a = 0; a < m; ++a) {
        const double* row = bg.row(a);
        double acc = 0.0;
        for (std::size_t b = 0; b < m; ++b) acc += row[b] * s[b];
        bs[a] = acc;
    }
    const double q = std::inner_product(s.begin(), s.end(), bs.begin(), 0.0);

    // Modularity gain of the bisection: q / (4m).
    if (q / (2.0 * g.two_m) <= kEigSplitGainTol) return res;
    for (std::size_t a = 0; a < m; ++a) {
        (s[a] > 0.0 ? res.left : res.right).push_back(members[a]);
    }
    if (res.left.empty() || res.right.empty()) return res;
    res.split = true;
    return res;
}

// Splits vertices into zero-degree singletons and the positive-degree core.
struct DegreeSplit {
    std::vector<std::size_t> active;
    std::vector<std::size_t> isolated;
};

DegreeSplit degree_split(const DenseMatrix& w) {
    DegreeSplit out;
    for (std::size_t i = 0; i < w.rows; ++i) {
        double s = 0.0;
        const double* row = w.row(i);
        for (std::size_t j = 0; j < w.cols; ++j) s += row[j];
        (s > 0.0 ? out.active : out.isolated).push_back(i);
    }
    return out;
}

Partition assemble_partition(std::size_t n, const std::vector<std::vector<std::size_t>>& groups) {
    std::vector<int> labels(n, -1);
    // Deterministic labeling: clusters ordered by smallest member.
    std::vector<std::size_t> order(groups.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return *std::min_element(groups[a].begin(), groups[a].end()) <
               *std::min_element(groups[b].begin(), groups[b].end());
    });
    int next = 0;
    for (std::size_t gi : order) {
        for (std::size_t v : groups[gi]) labels[v] = next;
        ++next;
    }
    Partition part;
    part.labels = std::move(labels);
    part.n_clusters = next;
    part.validate();
    return part;
}

}  // namespace

double modularity(const AdjacencyMatrix& adj, const Partition& part) {
    check_adjacency_input(adj);
    part.validate();
    const std::size_t n = adj.size();
    if (part.labels.size() != n) throw DataError("partition size does not match adjacency");

    Graph g = make_graph(adj.values);
    if (g.two_m <= 0.0) throw NumericError("modularity undefined on an all-zero adjacency");

    std::vector<double> within(static_cast<std::size_t>(part.n_clusters), 0.0);
    std::vector<double> total(static_cast<std::size_t>(part.n_clusters), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(part.labels[i]);
        total[c] += g.degree[i];
        const double* row = adj.values.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (part.labels[j] == part.labels[i]) within[c] += row[j];
        }
    }
    double q = 0.0;
    for (std::size_t c = 0; c < within.size(); ++c) {
        const double t = total[c] / g.two_m;
        q += within[c] / g.two_m - t * t;
    }
    return q;
}

Partition newman_partition(const AdjacencyMatrix& adj, const PartitionerConfig& config) {
    check_adjacency_input(adj);
    config.validate();

    const auto ds = degree_split(adj.values);
    if (ds.active.empty()) {
        throw NumericError("adjacency matrix has no edges");
    }

    // Normalize by the largest entry: modularity and the eigenvector are
    // scale-free, and this keeps the fixed tolerances scale-free as well
    // (results invariant under rescaling of the adjacency matrix).
    double amax = 0.0;
    for (double v : adj.values.data) amax = std::max(amax, v);
    DenseMatrix w = adj.values;
    for (double& v : w.data) v /= amax;

    Graph g = make_graph(w);

    std::vector<std::vector<std::size_t>> final_groups;
    std::vector<std::vector<std::size_t>> stack;
    stack.push_back(ds.active);
    while (!stack.empty()) {
        std::vector<std::size_t> group = std::move(stack.back());
        stack.pop_back();
        if (group.size() == 1) {
            final_groups.push_back(std::move(group));
            continue;
        }
        auto comps = subgraph_components(g, group);
        if (comps.size() > 1) {
            for (auto& c : comps) stack.push_back(std::move(c));
            continue;
        }
        SplitResult sr = try_split(g, group, config.modularity_tolerance);
        if (!sr.split) {
            final_groups.push_back(std::move(group));
        } else {
            stack.push_back(std::move(sr.left));
            stack.push_back(std::move(sr.right));
        }
    }
    for (std::size_t v : ds.isolated) final_groups.push_back({v});
    return assemble_partition(adj.size(), final_groups);
}

namespace {

constexpr std::uint64_t kLouvainStreamTag = 0x10CA1ull;

struct LouvainLevel {
    DenseMatrix w;
    std::vector<double> degree;
    double two_m = 0.0;
};

LouvainLevel level_from(const DenseMatrix& w) {
    LouvainLevel lvl;
    lvl.w = w;
    lvl.degree.assign(w.rows, 0.0);
    for (std::size_t i = 0; i < w.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < w.cols; ++j) s += w.at(i, j);
        lvl.degree[i] = s;
        lvl.two_m += s;
    }
    return lvl;
}

}  // namespace

Partition louvain_partition(const AdjacencyMatrix& adj, const PartitionerConfig& config) {
    check_adjacency_input(adj);
    config.validate();

    const auto ds = degree_split(adj.values);
    if (ds.active.empty()) throw NumericError("adjacency matrix has no edges");

    const std::size_t n_active = ds.active.size();
    DenseMatrix w0(n_active, n_active);
    for (std::size_t a = 0; a < n_active; ++a) {
        for (std::size_t b = 0; b < n_active; ++b) {
            w0.at(a, b) = adj.values.at(ds.active[a], ds.active[b]);
        }
    }

    // node_comm maps original active vertices through all aggregation levels.
    std::vector<std::size_t> vertex_comm(n_active);
    std::iota(vertex_comm.begin(), vertex_comm.end(), 0);

    LouvainLevel lvl = level_from(w0);
    for (int level = 0; level < 64; ++level) {
        const std::size_t n = lvl.w.rows;
        std::vector<int> comm(n);
        std::iota(comm.begin(), comm.end(), 0);
        std::vector<double> comm_tot = lvl.degree;

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(config.louvain_seed, {kLouvainStreamTag, static_cast<std::uint64_t>(level)}));
        rng.shuffle(order);

        std::vector<double> wtoc(n, 0.0);
        std::vector<int> touched;
        bool any_move = false;
        for (int pass = 0; pass < config.louvain_passes; ++pass) {
            int moves = 0;
            for (std::size_t oi = 0; oi < n; ++oi) {
                const std::size_t i = order[oi];
                const int a = comm[i];
                // Weights from i to each neighboring community (self-loop
                // excluded; it never changes under a move).
                touched.clear();
                const double* row = lvl.w.row(i);
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == i || row[j] == 0.0) continue;
                    const int c = comm[j];
                    if (wtoc[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
                    wtoc[static_cast<std::size_t>(c)] += row[j];
                }
                std::sort(touched.begin(), touched.end());

                comm_tot[static_cast<std::size_t>(a)] -= lvl.degree[i];
                const double ki = lvl.degree[i];
                // Gain (up to the 1/m factor) of joining community c:
                // w(i,c) - k_i * tot_c / 2m. Staying in a is the baseline.
                double best_gain = wtoc[static_cast<std::size_t>(a)] -
                                   ki * comm_tot[static_cast<std::size_t>(a)] / lvl.two_m;
                int best_c = a;
                for (int c : touched) {
                    if (c == a) continue;
                    const double gain = wtoc[static_cast<std::size_t>(c)] -
                                        ki * comm_tot[static_cast<std::size_t>(c)] / lvl.two_m;
                    if (gain > best_gain || (gain == best_gain && c < best_c)) {
                        best_gain = gain;
                        best_c = c;
                    }
                }
                comm[i] = best_c;
                comm_tot[static_cast<std::size_t>(best_c)] += ki;
                if (best_c != a) {
                    ++moves;
                    any_move = true;
                }
                for (int c : touched) wtoc[static_cast<std::size_t>(c)] = 0.0;
                wtoc[static_cast<std::size_t>(a)] = 0.0;
            }
            if (moves == 0) break;
        }

        // Compact community ids (ascending) and aggregate.
        std::map<int, std::size_t> remap;
        for (std::size_t i = 0; i < n; ++i) remap.emplace(comm[i], 0);
        std::size_t next = 0;
        for (auto& kv : remap) kv.second = next++;
        const std::size_t nc = next;
        if (!any_move || nc == n) break;

        for (auto& vc : vertex_comm) {
            vc = remap[comm[vc]];
        }
        DenseMatrix agg(nc, nc, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ci = remap[comm[i]];
            for (std::size_t j = 0; j < n; ++j) {
                agg.at(ci, remap[comm[j]]) += lvl.w.at(i, j);
            }
        }
        lvl = level_from(agg);
    }

    std::vector<std::vector<std::size_t>> groups(lvl.w.rows);
    for (std::size_t a = 0; a < n_active; ++a) {
        groups[vertex_comm[a]].push_back(ds.active[a]);
    }
    for (std::size_t v : ds.isolated) groups.push_back({v});
    return assemble_partition(adj.size(), groups);
}

Partition run_partitioner(const AdjacencyMatrix& adj, const PartitionerConfig& config) {
    return config.algorithm == PartitionAlgorithm::Newman ? newman_partition(adj, config)
                                                          : louvain_partition(adj, config);
}

std::string partition_to_csv(const Partition& part,
                             const std::vector<std::string>& respondent_ids) {
    if (respondent_ids.size() != part.labels.size()) {
        throw DataError("partition_to_csv: id count does not match partition");
    }
    std::string out = "respondent_id,cluster_id\n";
    for (std::size_t i = 0; i < part.labels.size(); ++i) {
        out += csv_escape(respondent_ids[i]);
        out += ",";
        out += std::to_string(part.labels[i]);
        out += "\n";
    }
    return out;
}

}  // namespace bca
