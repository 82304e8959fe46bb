#include "bca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bca/errors.hpp"
#include "bca/mathx.hpp"

namespace bca {

StripResult strip_unit_clusters(const Partition& part) {
    part.validate();
    std::vector<int> sizes(static_cast<std::size_t>(part.n_clusters), 0);
    for (int lab : part.labels) ++sizes[static_cast<std::size_t>(lab)];

    StripResult out;
    std::vector<int> remap(static_cast<std::size_t>(part.n_clusters), -1);
    int next = 0;
    for (int c = 0; c < part.n_clusters; ++c) {
        if (sizes[static_cast<std::size_t>(c)] == 1) {
            ++out.removed_count;
        } else {
            remap[static_cast<std::size_t>(c)] = next++;
        }
    }
    if (next == 0) {
        throw DataError("every cluster is a unit cluster; nothing left to score");
    }
    for (std::size_t i = 0; i < part.labels.size(); ++i) {
        const int m = remap[static_cast<std::size_t>(part.labels[i])];
        if (m >= 0) {
            out.kept.push_back(i);
            out.partition.labels.push_back(m);
        }
    }
    out.partition.n_clusters = next;
    out.partition.validate();
    return out;
}

double cpa(const std::vector<std::pair<int, int>>& k_est_true) {
    if (k_est_true.empty()) throw DataError("cpa: empty record list");
    std::size_t hits = 0;
    for (const auto& [est, truth] : k_est_true) {
        if (est == truth) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(k_est_true.size());
}

double mad(const std::vector<std::pair<int, int>>& k_est_true) {
    if (k_est_true.empty()) throw DataError("mad: empty record list");
    double sum = 0.0;
    for (const auto& [est, truth] : k_est_true) {
        sum += std::fabs(static_cast<double>(est) - static_cast<double>(truth));
    }
    return sum / static_cast<double>(k_est_true.size());
}

double nmi(const Partition& est, const Partition& truth, NmiNormalization norm) {
    est.validate();
    truth.validate();
    const std::size_t n = est.labels.size();
    if (truth.labels.size() != n) {
        throw DataError("nmi: partitions cover different respondent sets");
    }
    const auto ke = static_cast<std::size_t>(est.n_clusters);
    const auto kt = static_cast<std::size_t>(truth.n_clusters);
    std::vector<double> joint(ke * kt, 0.0);
    std::vector<double> pe(ke, 0.0), pt(kt, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = static_cast<std::size_t>(est.labels[i]);
        const auto b = static_cast<std::size_t>(truth.labels[i]);
        joint[a * kt + b] += inv_n;
        pe[a] += inv_n;
        pt[b] += inv_n;
    }
    double mi = 0.0;
    for (std::size_t a = 0; a < ke; ++a) {
        for (std::size_t b = 0; b < kt; ++b) {
            const double p = joint[a * kt + b];
            if (p > 0.0) mi += p * std::log(p / (pe[a] * pt[b]));
        }
    }
    double he = 0.0, ht = 0.0;
    for (double p : pe) {
        if (p > 0.0) he -= p * std::log(p);
    }
    for (double p : pt) {
        if (p > 0.0) ht -= p * std::log(p);
    }
    const double denom =
        norm == NmiNormalization::ArithmeticMean ? 0.5 * (he + ht) : std::max(he, ht);
    if (denom <= 0.0) {
        // Both partitions single-cluster: identical by definition.
        return 1.0;
    }
    return std::clamp(mi / denom, 0.0, 1.0);
}

double snmi(double nmi_value, int k_est, int k_true) {
    if (k_est < 1 || k_true < 1) throw DataError("snmi: cluster counts must be >= 1");
    if (!(nmi_value >= 0.0 && nmi_value <= 1.0)) throw DataError("snmi: nmi outside [0,1]");
    const double scale = static_cast<double>(std::min(k_est, k_true)) /
                         static_cast<double>(std::max(k_est, k_true));
    return nmi_value * scale;
}

double frobenius(const CorrelationMatrix& a, const CorrelationMatrix& b) {
    if (a.dim() != b.dim()) throw DataError("frobenius: dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.m.data.size(); ++i) {
        const double d = a.m.data[i] - b.m.data[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

namespace {

// Pearson correlation matrix of the numeric answers over a subset of rows.
// Constant columns contribute zero correlations and a unit diagonal.
CorrelationMatrix correlation_of_rows(const NumericMatrix& numeric,
                                      const std::vector<std::size_t>& rows) {
    const auto q = numeric.values.cols;
    const double n = static_cast<double>(rows.size());
    std::vector<double> mean(q, 0.0);
    for (std::size_t r : rows) {
        const double* row = numeric.values.row(r);
        for (std::size_t j = 0; j < q; ++j) mean[j] += row[j];
    }
    for (auto& m : mean) m /= n;

    DenseMatrix cov(q, q, 0.0);
    for (std::size_t r : rows) {
        const double* row = numeric.values.row(r);
        for (std::size_t a = 0; a < q; ++a) {
            const double da = row[a] - mean[a];
            for (std::size_t b = a; b < q; ++b) {
                cov.at(a, b) += da * (row[b] - mean[b]);
            }
        }
    }
    CorrelationMatrix out = CorrelationMatrix::identity(static_cast<int>(q));
    for (std::size_t a = 0; a < q; ++a) {
        for (std::size_t b = a + 1; b < q; ++b) {
            const double va = cov.at(a, a);
            const double vb = cov.at(b, b);
            double r = 0.0;
            if (va > 0.0 && vb > 0.0) {
                r = std::clamp(cov.at(a, b) / std::sqrt(va * vb), -1.0, 1.0);
            }
            out.m.at(a, b) = r;
            out.m.at(b, a) = r;
        }
    }
    return out;
}

}  // namespace

std::vector<CorrelationMatrix> estimate_cluster_correlations(const NumericMatrix& numeric,
                                                             const Partition& part) {
    part.validate();
    if (part.labels.size() != numeric.values.rows) {
        throw DataError("estimate_cluster_correlations: partition does not match matrix");
    }
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(part.n_clusters));
    for (std::size_t i = 0; i < part.labels.size(); ++i) {
        members[static_cast<std::size_t>(part.labels[i])].push_back(i);
    }
    std::vector<CorrelationMatrix> out;
    out.reserve(members.size());
    for (std::size_t c = 0; c < members.size(); ++c) {
        if (members[c].size() < 2) {
            throw DataError("cluster " + std::to_string(c) +
                            " has fewer than 2 members; cannot estimate correlations");
        }
        out.push_back(correlation_of_rows(numeric, members[c]));
    }
    return out;
}

namespace {

struct PairingSearch {
    const DenseMatrix* dist = nullptr;  // est x truth distances
    const std::vector<double>* d_identity = nullptr;
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_assign;
    std::vector<int> assign;
    std::vector<char> used;

    // K_hat <= K: assign every estimated matrix an unused true index.
    void search_est_to_truth(std::size_t k, double current_max) {
        const std::size_t k_hat = dist->rows;
        if (current_max >= best) return;
        if (k == k_hat) {
            best = current_max;
            best_assign = assign;
            return;
        }
        for (std::size_t t = 0; t < dist->cols; ++t) {
            if (used[t]) continue;
            used[t] = 1;
            assign[k] = static_cast<int>(t);
            search_est_to_truth(k + 1, std::max(current_max, dist->at(k, t)));
            used[t] = 0;
        }
    }

    // K_hat > K: choose which estimated matrix covers each true one; all
    // leftover estimated matrices pair with identity-augmented slots. The
    // identity slots are interchangeable, so this reduced search is exact.
    double leftover_max(const std::vector<char>& taken) const {
        double m = 0.0;
        for (std::size_t e = 0; e < taken.size(); ++e) {
            if (!taken[e]) m = std::max(m, (*d_identity)[e]);
        }
        return m;
    }

    void search_truth_to_est(std::size_t t, double current_max, std::vector<char>& taken) {
        if (current_max >= best) return;
        if (t == dist->cols) {
            const double total = std::max(current_max, leftover_max(taken));
            if (total < best) {
                best = total;
                best_assign = assign;
            }
            return;
        }
        for (std::size_t e = 0; e < dist->rows; ++e) {
            if (taken[e]) continue;
            taken[e] = 1;
            assign[e] = static_cast<int>(t);
            search_truth_to_est(t + 1, std::max(current_max, dist->at(e, t)), taken);
            assign[e] = -1;
            taken[e] = 0;
        }
    }
};

}  // namespace

PairingResult collection_dissimilarity_pairing(const std::vector<CorrelationMatrix>& estimated,
                                               const std::vector<CorrelationMatrix>& truth) {
    if (estimated.empty() || truth.empty()) {
        throw DataError("collection_dissimilarity: both collections must be non-empty");
    }
    const std::size_t k_hat = estimated.size();
    const std::size_t k = truth.size();
    const int dim = truth[0].dim();
    for (const auto& m : truth) {
        if (m.dim() != dim) throw DataError("collection_dissimilarity: dimension mismatch");
    }
    for (const auto& m : estimated) {
        if (m.dim() != dim) throw DataError("collection_dissimilarity: dimension mismatch");
    }

    DenseMatrix dist(k_hat, k);
    for (std::size_t e = 0; e < k_hat; ++e) {
        for (std::size_t t = 0; t < k; ++t) {
            dist.at(e, t) = frobenius(estimated[e], truth[t]);
        }
    }

    // Guard the enumeration size: P(k_hat, k) assignments.
    double combos = 1.0;
    for (std::size_t i = 0; i < std::min(k, k_hat); ++i) {
        combos *= static_cast<double>(std::max(k, k_hat) - i);
    }
    if (combos > 5e7) {
        throw NumericError("collection_dissimilarity: pairing search too large");
    }

    PairingSearch search;
    search.dist = &dist;
    search.assign.assign(k_hat, -1);

    if (k_hat <= k) {
        search.used.assign(k, 0);
        search.search_est_to_truth(0, 0.0);
    } else {
        const CorrelationMatrix ident = CorrelationMatrix::identity(dim);
        std::vector<double> d_identity(k_hat, 0.0);
        for (std::size_t e = 0; e < k_hat; ++e) d_identity[e] = frobenius(estimated[e], ident);
        search.d_identity = &d_identity;
        std::vector<char> taken(k_hat, 0);
        search.search_truth_to_est(0, 0.0, taken);
    }

    PairingResult out;
    out.assignment = std::move(search.best_assign);
    out.bottleneck_value = search.best;
    return out;
}

double collection_dissimilarity(const std::vector<CorrelationMatrix>& estimated,
                                const std::vector<CorrelationMatrix>& truth) {
    return collection_dissimilarity_pairing(estimated, truth).bottleneck_value;
}

CdisResult cdis(const SyntheticDataset& dataset, const StripResult& stripped) {
    const NumericMatrix numeric = numeric_map(dataset.responses);

    // Estimated construal correlations from the stripped partition; a
    // too-small cluster (cannot happen after stripping, but the rule is kept
    // for robustness) contributes the "no structure" identity estimate.
    const int dim = dataset.responses.survey.question_count();
    std::vector<std::vector<std::size_t>> members(
        static_cast<std::size_t>(stripped.partition.n_clusters));
    for (std::size_t i = 0; i < stripped.partition.labels.size(); ++i) {
        members[static_cast<std::size_t>(stripped.partition.labels[i])].push_back(
            stripped.kept[i]);
    }
    std::vector<CorrelationMatrix> estimated;
    estimated.reserve(members.size());
    for (const auto& rows : members) {
        if (rows.size() < 2) {
            estimated.push_back(CorrelationMatrix::identity(dim));
        } else {
            estimated.push_back(correlation_of_rows(numeric, rows));
        }
    }

    std::vector<CorrelationMatrix> truth;
    truth.reserve(dataset.construals.size());
    for (const auto& c : dataset.construals) truth.push_back(c.correlation);

    // Benchmark: identical estimation with the true membership.
    std::vector<std::vector<std::size_t>> true_members(
        static_cast<std::size_t>(dataset.true_membership.n_clusters));
    for (std::size_t i = 0; i < dataset.true_membership.labels.size(); ++i) {
        true_members[static_cast<std::size_t>(dataset.true_membership.labels[i])].push_back(i);
    }
    std::vector<CorrelationMatrix> benchmark_est;
    benchmark_est.reserve(true_members.size());
    for (const auto& rows : true_members) {
        if (rows.size() < 2) {
            benchmark_est.push_back(CorrelationMatrix::identity(dim));
        } else {
            benchmark_est.push_back(correlation_of_rows(numeric, rows));
        }
    }

    CdisResult out;
    out.raw = collection_dissimilarity(estimated, truth);
    out.benchmark = collection_dissimilarity(benchmark_est, truth);
    if (out.benchmark == 0.0) {
        out.benchmark_zero = true;
        out.ratio = std::numeric_limits<double>::infinity();
    } else {
        out.ratio = out.raw / out.benchmark;
    }
    return out;
}

}  // namespace bca
