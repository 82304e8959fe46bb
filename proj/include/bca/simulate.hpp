#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bca/dense.hpp"
#include "bca/partition.hpp"
#include "bca/rng.hpp"
#include "bca/survey.hpp"

namespace bca {

// Correlation matrix of one construal's Gaussian copula: symmetric, unit
// diagonal, positive semidefinite (a tolerant triangular factorization must
// succeed). Off-diagonal entries of +-1 are allowed and describe comonotone
// question pairs.
struct CorrelationMatrix {
    DenseMatrix m;

    int dim() const { return static_cast<int>(m.rows); }
    void validate() const;
    static CorrelationMatrix identity(int q);

    bool operator==(const CorrelationMatrix&) const = default;
};

// Lower-triangular factor L with A ~= L L^T. Tolerates semidefinite pivots
// (they produce zero columns); throws NumericError when the matrix is not
// numerically PSD.
DenseMatrix cholesky_psd(const DenseMatrix& a, double pivot_tol = 1e-10);

struct ConstrualSpec {
    CorrelationMatrix correlation;
    int population = 0;
};

// Question-specific response thresholds. H-1 strictly increasing cut points
// partition [0,1] into H subintervals; the neutral subinterval is centered
// at neutral_position = (1 - skewness)/2 and the remaining thresholds are
// symmetric about it.
struct ThresholdSet {
    std::string question_id;
    int option_count = 0;       // H_q
    double skewness = 0.0;      // b_q
    double neutral_position = 0.5;  // n_q*
    std::vector<double> thresholds;

    void validate() const;
};

struct SyntheticDataset {
    ResponseMatrix responses;
    Partition true_membership;
    std::vector<ConstrualSpec> construals;
    std::vector<ThresholdSet> thresholds;
    DenseMatrix latent_positions;  // N x Q, always retained in memory
    std::uint64_t master_seed = 0;
    std::uint64_t dataset_seed = 0;
    std::int64_t index = 0;
};

// One integer-valued DGP parameter: either uniform over [lo,hi] or uniform
// over an explicit choice set.
struct IntDraw {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    std::vector<std::int64_t> choices;  // non-empty overrides lo/hi

    static IntDraw fixed(std::int64_t v) { return IntDraw{v, v, {}}; }
    static IntDraw range(std::int64_t lo, std::int64_t hi) { return IntDraw{lo, hi, {}}; }
    static IntDraw from_choices(std::vector<std::int64_t> c);

    bool is_fixed() const;
    std::int64_t min_value() const;
    std::int64_t max_value() const;
    std::int64_t draw(Rng& rng) const;
};

struct DgpConfig {
    std::string name = "custom";
    IntDraw num_construals;
    IntDraw num_questions;
    IntDraw population;            // per construal
    IntDraw options_per_question;  // odd values only
    double skewness_lo = -0.2;
    double skewness_hi = 0.2;
    // Non-empty: fixed per-construal correlation matrices (requires fixed
    // num_construals/num_questions). Empty: random vine-generated matrices.
    std::vector<CorrelationMatrix> fixed_correlations;

    void validate() const;
};

DgpConfig experiment1_config();
DgpConfig experiment2_config();
DgpConfig dgp_config_from_json(const std::string& text);
std::string dgp_config_to_json(const DgpConfig& config);
// Hash of the canonical JSON form, as a fixed-width hex string.
std::string dgp_config_hash(const DgpConfig& config);
// Resolves "exp1"/"exp2" or a path to a JSON config file.
DgpConfig resolve_dgp_config(const std::string& name_or_path);

// Q(Q-1)/2 partial correlations, i.i.d. from the beta mixture: component
// c in {-1,0,+1} with P = 0.3/0.4/0.3, Beta(1,40)/(40,40)/(40,1), mapped by
// 2B - 1.
std::vector<double> gen_partial_correlations(int q, Rng& rng);
// One draw from a fixed mixture component (exposed for the test oracles).
double partial_correlation_component(int component, Rng& rng);

// C-vine recursion from partial to unconditional correlations. Near-PSD
// results are repaired by a 1e-8 diagonal jitter (then renormalized); if
// the factorization still fails, throws NumericError.
CorrelationMatrix partials_to_correlation(const std::vector<double>& partials, int q);

// Mixture partials + vine construction, redrawing on the (rare) numerical
// rejection.
CorrelationMatrix random_correlation(int q, Rng& rng);

// n x Q copula sample: Z ~ N(0, Sigma) via the triangular factor, mapped
// through the normal CDF coordinate-wise. Marginals are uniform on [0,1].
DenseMatrix sample_copula(const CorrelationMatrix& corr, std::size_t n, Rng& rng);

// Inverse-CDF draw from N(mu, sigma^2) conditioned to (lo, hi).
double sample_truncated_normal(double mu, double lo, double hi, double sigma, Rng& rng);

// Thresholds for an odd H_q >= 3 and skewness b in [-0.2, 0.2]. The stored
// skewness is snapped to the exactly representable 1 - 2*n_q*.
ThresholdSet gen_thresholds(int h_q, double b_q, Rng& rng);

// 0-based option index of the subinterval containing x_star; boundary hits
// resolve to the lower interval.
int latent_to_response(double x_star, const ThresholdSet& thresholds);

// Runs the full generation pipeline. Identical (config, master_seed, index)
// triples produce bit-identical datasets.
SyntheticDataset generate_dataset(const DgpConfig& config, std::uint64_t master_seed,
                                  std::int64_t dataset_index = 0);

// Dataset directory: responses.csv, schema.json, truth.csv, sigma_<k>.csv,
// thresholds.json, manifest.json, optionally latent.csv.
void write_dataset(const SyntheticDataset& ds, const std::filesystem::path& dir,
                   bool keep_latent = false);
SyntheticDataset read_dataset(const std::filesystem::path& dir);

}  // namespace bca
