#include "bca/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "bca/csv.hpp"
#include "bca/errors.hpp"
#include "bca/mathx.hpp"
#include "bca/version.hpp"

namespace bca {

using nlohmann::json;

namespace {

// Stream tags for the per-dataset substreams. Generation consumes each
// stream independently, so the draw order is pinned by construction and
// adding parallelism across datasets can never change output.
enum Stream : std::uint64_t {
    kDatasetStream = 1,
    kStructureStream = 2,
    kCorrelationStream = 3,
    kPopulationStream = 4,
    kThresholdStream = 5,
    kCopulaStream = 6,
};

constexpr double kPivotTol = 1e-10;
constexpr double kDiagJitter = 1e-8;

}  // namespace

CorrelationMatrix CorrelationMatrix::identity(int q) {
    CorrelationMatrix out;
    out.m = DenseMatrix(static_cast<std::size_t>(q), static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) out.m.at(i, i) = 1.0;
    return out;
}

void CorrelationMatrix::validate() const {
    const std::size_t q = m.rows;
    if (q == 0 || m.cols != q) throw ConfigError("correlation matrix must be square");
    for (std::size_t i = 0; i < q; ++i) {
        if (m.at(i, i) != 1.0) throw ConfigError("correlation matrix needs a unit diagonal");
        for (std::size_t j = i + 1; j < q; ++j) {
            const double v = m.at(i, j);
            if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
                throw ConfigError("correlation entry outside [-1,1]");
            }
            if (v != m.at(j, i)) throw ConfigError("correlation matrix must be symmetric");
        }
    }
    cholesky_psd(m, kPivotTol);  // throws when not numerically PSD
}

DenseMatrix cholesky_psd(const DenseMatrix& a, double pivot_tol) {
    const std::size_t n = a.rows;
    if (a.cols != n) throw NumericError("cholesky_psd: matrix must be square");
    // Any clearly positive pivot takes the ordinary sqrt path; pivot_tol
    // only bounds how negative a pivot may be before the matrix counts as
    // indefinite. Pivots inside the noise band are treated as semidefinite
    // zero directions.
    constexpr double kStrictPivot = 1e-12;
    DenseMatrix l(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a.at(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l.at(j, k) * l.at(j, k);
        if (d > kStrictPivot) {
            const double ljj = std::sqrt(d);
            l.at(j, j) = ljj;
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = a.at(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
                l.at(i, j) = s / ljj;
            }
        } else if (d >= -pivot_tol) {
            // Semidefinite direction: the pivot column must vanish too,
            // otherwise the matrix is indefinite.
            l.at(j, j) = 0.0;
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = a.at(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
                if (std::fabs(s) > 1e-7) {
                    throw NumericError("cholesky_psd: matrix is not positive semidefinite");
                }
                l.at(i, j) = 0.0;
            }
        } else {
            throw NumericError("cholesky_psd: negative pivot");
        }
    }
    return l;
}

void ThresholdSet::validate() const {
    if (option_count < 2) throw ConfigError("threshold set needs H >= 2");
    if (static_cast<int>(thresholds.size()) != option_count - 1) {
        throw ConfigError("threshold set needs H-1 cut points");
    }
    double prev = 0.0;
    for (double t : thresholds) {
        if (!(t > prev && t < 1.0)) {
            throw ConfigError("thresholds must be strictly increasing inside (0,1)");
        }
        prev = t;
    }
    if (neutral_position != (1.0 - skewness) / 2.0) {
        throw ConfigError("neutral_position must equal (1 - skewness)/2");
    }
}

IntDraw IntDraw::from_choices(std::vector<std::int64_t> c) {
    IntDraw d;
    d.choices = std::move(c);
    if (d.choices.empty()) throw ConfigError("empty choice set");
    d.lo = *std::min_element(d.choices.begin(), d.choices.end());
    d.hi = *std::max_element(d.choices.begin(), d.choices.end());
    return d;
}

bool IntDraw::is_fixed() const {
    if (!choices.empty()) return choices.size() == 1;
    return lo == hi;
}

std::int64_t IntDraw::min_value() const { return lo; }
std::int64_t IntDraw::max_value() const { return hi; }

std::int64_t IntDraw::draw(Rng& rng) const {
    if (!choices.empty()) {
        return choices[static_cast<std::size_t>(
            rng.next_int(0, static_cast<std::int64_t>(choices.size()) - 1))];
    }
    return rng.next_int(lo, hi);
}

void DgpConfig::validate() const {
    if (num_construals.min_value() < 1) throw ConfigError("num_construals must be >= 1");
    if (num_questions.min_value() < 2) throw ConfigError("num_questions must be >= 2");
    if (population.min_value() < 1) throw ConfigError("population must be >= 1");
    if (options_per_question.min_value() < 3) {
        throw ConfigError("options_per_question must be >= 3");
    }
    const auto check_odd = [](std::int64_t v) {
        if (v % 2 == 0) throw ConfigError("options_per_question supports odd values only");
    };
    if (!options_per_question.choices.empty()) {
        for (auto v : options_per_question.choices) check_odd(v);
    } else {
        check_odd(options_per_question.lo);
        if (!options_per_question.is_fixed()) {
            throw ConfigError("options_per_question ranges must be given as an odd choice set");
        }
    }
    if (!(skewness_lo <= skewness_hi) || skewness_lo < -0.2 || skewness_hi > 0.2) {
        throw ConfigError("skewness range must lie inside [-0.2, 0.2]");
    }
    if (!fixed_correlations.empty()) {
        if (!num_construals.is_fixed() ||
            num_construals.min_value() != static_cast<std::int64_t>(fixed_correlations.size())) {
            throw ConfigError("fixed correlations require a matching fixed num_construals");
        }
        if (!num_questions.is_fixed()) {
            throw ConfigError("fixed correlations require a fixed num_questions");
        }
        for (const auto& c : fixed_correlations) {
            if (c.dim() != num_questions.min_value()) {
                throw ConfigError("fixed correlation dimension must equal num_questions");
            }
            c.validate();
        }
    }
}

DgpConfig experiment1_config() {
    DgpConfig cfg;
    cfg.name = "exp1";
    cfg.num_construals = IntDraw::fixed(2);
    cfg.num_questions = IntDraw::fixed(3);
    cfg.population = IntDraw::range(200, 400);
    cfg.options_per_question = IntDraw::fixed(5);
    cfg.skewness_lo = -0.2;
    cfg.skewness_hi = 0.2;

    CorrelationMatrix s1 = CorrelationMatrix::identity(3);
    s1.m.at(0, 1) = s1.m.at(1, 0) = 1.0;
    s1.m.at(0, 2) = s1.m.at(2, 0) = 0.7;
    s1.m.at(1, 2) = s1.m.at(2, 1) = 0.7;
    CorrelationMatrix s2 = CorrelationMatrix::identity(3);
    s2.m.at(0, 1) = s2.m.at(1, 0) = 1.0;
    s2.m.at(0, 2) = s2.m.at(2, 0) = -0.7;
    s2.m.at(1, 2) = s2.m.at(2, 1) = -0.7;
    cfg.fixed_correlations = {s1, s2};
    return cfg;
}

DgpConfig experiment2_config() {
    DgpConfig cfg;
    cfg.name = "exp2";
    cfg.num_construals = IntDraw::from_choices({2, 3, 4, 5, 6});
    cfg.num_questions = IntDraw::range(10, 20);
    cfg.population = IntDraw::range(200, 400);
    cfg.options_per_question = IntDraw::from_choices({3, 5, 7});
    cfg.skewness_lo = -0.2;
    cfg.skewness_hi = 0.2;
    return cfg;
}

namespace {

json int_draw_to_json(const IntDraw& d) {
    json out;
    if (!d.choices.empty()) {
        out["choices"] = d.choices;
    } else if (d.lo == d.hi) {
        out["fixed"] = d.lo;
    } else {
        out["range"] = {d.lo, d.hi};
    }
    return out;
}

IntDraw int_draw_from_json(const json& j, const char* field) {
    if (!j.is_object()) throw ConfigError(std::string(field) + ": expected an object");
    if (j.contains("fixed")) return IntDraw::fixed(j["fixed"].get<std::int64_t>());
    if (j.contains("range")) {
        const auto r = j["range"].get<std::vector<std::int64_t>>();
        if (r.size() != 2 || r[0] > r[1]) {
            throw ConfigError(std::string(field) + ": range must be [lo, hi]");
        }
        return IntDraw::range(r[0], r[1]);
    }
    if (j.contains("choices")) {
        return IntDraw::from_choices(j["choices"].get<std::vector<std::int64_t>>());
    }
    throw ConfigError(std::string(field) + ": expected fixed/range/choices");
}

json correlation_to_json(const CorrelationMatrix& c) {
    json rows = json::array();
    for (int i = 0; i < c.dim(); ++i) {
        json row = json::array();
        for (int j = 0; j < c.dim(); ++j) row.push_back(c.m.at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

CorrelationMatrix correlation_from_json(const json& rows) {
    const std::size_t q = rows.size();
    CorrelationMatrix out;
    out.m = DenseMatrix(q, q);
    for (std::size_t i = 0; i < q; ++i) {
        if (rows[i].size() != q) throw ConfigError("correlation matrix rows must be square");
        for (std::size_t j = 0; j < q; ++j) out.m.at(i, j) = rows[i][j].get<double>();
    }
    return out;
}

}  // namespace

std::string dgp_config_to_json(const DgpConfig& config) {
    json doc;
    doc["name"] = config.name;
    doc["num_construals"] = int_draw_to_json(config.num_construals);
    doc["num_questions"] = int_draw_to_json(config.num_questions);
    doc["population"] = int_draw_to_json(config.population);
    doc["options_per_question"] = int_draw_to_json(config.options_per_question);
    doc["skewness"] = {config.skewness_lo, config.skewness_hi};
    if (config.fixed_correlations.empty()) {
        doc["correlations"] = "random";
    } else {
        json fixed = json::array();
        for (const auto& c : config.fixed_correlations) fixed.push_back(correlation_to_json(c));
        doc["correlations"] = {{"fixed", std::move(fixed)}};
    }
    return doc.dump(2) + "\n";
}

DgpConfig dgp_config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed DGP config JSON: ") + e.what());
    }
    try {
        DgpConfig cfg;
        cfg.name = doc.value("name", std::string("custom"));
        cfg.num_construals = int_draw_from_json(doc.at("num_construals"), "num_construals");
        cfg.num_questions = int_draw_from_json(doc.at("num_questions"), "num_questions");
        cfg.population = int_draw_from_json(doc.at("population"), "population");
        cfg.options_per_question =
            int_draw_from_json(doc.at("options_per_question"), "options_per_question");
        const auto skew = doc.at("skewness").get<std::vector<double>>();
        if (skew.size() != 2) throw ConfigError("skewness must be [lo, hi]");
        cfg.skewness_lo = skew[0];
        cfg.skewness_hi = skew[1];
        if (doc.contains("correlations") && doc["correlations"].is_object()) {
            for (const auto& rows : doc["correlations"].at("fixed")) {
                cfg.fixed_correlations.push_back(correlation_from_json(rows));
            }
        }
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid DGP config: ") + e.what());
    }
}

std::string dgp_config_hash(const DgpConfig& config) {
    const std::string canon = dgp_config_to_json(config);
    std::uint64_t h = 0xC0FFEE123456789ULL;
    for (unsigned char ch : canon) h = mix64(h ^ ch);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

DgpConfig resolve_dgp_config(const std::string& name_or_path) {
    if (name_or_path == "exp1") return experiment1_config();
    if (name_or_path == "exp2") return experiment2_config();
    std::ifstream in(name_or_path);
    if (!in) throw ConfigError("cannot open DGP config: " + name_or_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return dgp_config_from_json(text);
}

double partial_correlation_component(int component, Rng& rng) {
    double a = 40.0, b = 40.0;
    if (component == -1) {
        a = 1.0;
        b = 40.0;
    } else if (component == 1) {
        a = 40.0;
        b = 1.0;
    } else if (component != 0) {
        throw ConfigError("partial correlation component must be -1, 0, or +1");
    }
    const double beta = beta_sample(a, b, rng);
    // Keep the result strictly inside (-1,1); the vine recursion divides by
    // sqrt(1 - p^2).
    return std::clamp(2.0 * beta - 1.0, -1.0 + 1e-12, 1.0 - 1e-12);
}

std::vector<double> gen_partial_correlations(int q, Rng& rng) {
    if (q < 2) throw ConfigError("gen_partial_correlations needs Q >= 2");
    const std::size_t count = static_cast<std::size_t>(q) * (q - 1) / 2;
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = rng.next_double();
        const int component = (u < 0.4) ? 0 : (u < 0.7 ? -1 : 1);
        out.push_back(partial_correlation_component(component, rng));
    }
    return out;
}

namespace {

CorrelationMatrix vine_to_correlation(const std::vector<double>& partials, int q) {
    // Partial correlation matrix in C-vine order: p[0][j] unconditional,
    // p[i][j] partial given variables 0..i-1.
    DenseMatrix p(static_cast<std::size_t>(q), static_cast<std::size_t>(q), 0.0);
    std::size_t idx = 0;
    for (int i = 0; i < q - 1; ++i) {
        for (int j = i + 1; j < q; ++j) p.at(i, j) = partials[idx++];
    }
    CorrelationMatrix out = CorrelationMatrix::identity(q);
    for (int i = 0; i < q - 1; ++i) {
        for (int j = i + 1; j < q; ++j) {
            double r = p.at(i, j);
            for (int k = i - 1; k >= 0; --k) {
                r = r * std::sqrt((1.0 - p.at(k, i) * p.at(k, i)) *
                                  (1.0 - p.at(k, j) * p.at(k, j))) +
                    p.at(k, i) * p.at(k, j);
            }
            out.m.at(i, j) = r;
            out.m.at(j, i) = r;
        }
    }
    return out;
}

bool strictly_factorizable(const DenseMatrix& a) {
    try {
        cholesky_psd(a, 1e-12);
        return true;
    } catch (const NumericError&) {
        return false;
    }
}

}  // namespace

CorrelationMatrix partials_to_correlation(const std::vector<double>& partials, int q) {
    if (q < 2) throw ConfigError("partials_to_correlation needs Q >= 2");
    if (partials.size() != static_cast<std::size_t>(q) * (q - 1) / 2) {
        throw ConfigError("partials_to_correlation: expected Q(Q-1)/2 entries");
    }
    for (double v : partials) {
        if (!(v > -1.0 && v < 1.0)) {
            throw ConfigError("partial correlations must lie strictly inside (-1,1)");
        }
    }
    CorrelationMatrix out = vine_to_correlation(partials, q);
    if (strictly_factorizable(out.m)) return out;

    // Numerically near-PSD: jitter the diagonal, renormalize back to unit
    // diagonal, and retry; anything that still fails is rejected.
    const double scale = 1.0 + kDiagJitter;
    for (int i = 0; i < q; ++i) {
        for (int j = i + 1; j < q; ++j) {
            const double v = out.m.at(i, j) / scale;
            out.m.at(i, j) = v;
            out.m.at(j, i) = v;
        }
    }
    if (!strictly_factorizable(out.m)) {
        throw NumericError("partials_to_correlation: matrix is not positive definite");
    }
    return out;
}

CorrelationMatrix random_correlation(int q, Rng& rng) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        const auto partials = gen_partial_correlations(q, rng);
        try {
            return partials_to_correlation(partials, q);
        } catch (const NumericError&) {
            // redraw
        }
    }
    throw NumericError("random_correlation: persistent factorization failure");
}

DenseMatrix sample_copula(const CorrelationMatrix& corr, std::size_t n, Rng& rng) {
    if (n < 1) throw ConfigError("sample_copula needs n >= 1");
    const int q = corr.dim();
    const DenseMatrix l = cholesky_psd(corr.m, kPivotTol);
    DenseMatrix out(n, static_cast<std::size_t>(q));
    std::vector<double> eps(static_cast<std::size_t>(q));
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < q; ++j) eps[static_cast<std::size_t>(j)] = rng.next_normal();
        for (int j = 0; j < q; ++j) {
            double z = 0.0;
            const double* lrow = l.row(static_cast<std::size_t>(j));
            for (int k = 0; k <= j; ++k) z += lrow[k] * eps[static_cast<std::size_t>(k)];
            out.at(i, static_cast<std::size_t>(j)) = norm_cdf(z);
        }
    }
    return out;
}

double sample_truncated_normal(double mu, double lo, double hi, double sigma, Rng& rng) {
    if (!(lo < hi)) throw ConfigError("sample_truncated_normal: need lo < hi");
    if (!(sigma > 0.0)) throw ConfigError("sample_truncated_normal: need sigma > 0");
    const double plo = norm_cdf((lo - mu) / sigma);
    const double phi = norm_cdf((hi - mu) / sigma);
    if (!(phi > plo)) throw NumericError("sample_truncated_normal: degenerate interval");
    const double p = plo + rng.next_double() * (phi - plo);
    double x = mu + sigma * norm_ppf(std::clamp(p, 1e-300, 1.0 - 1e-16));
    // Inverse-CDF rounding can land exactly on a bound; keep the support open.
    x = std::min(std::max(x, std::nextafter(lo, hi)), std::nextafter(hi, lo));
    return x;
}

ThresholdSet gen_thresholds(int h_q, double b_q, Rng& rng) {
    if (h_q < 3 || h_q % 2 == 0) throw ConfigError("gen_thresholds needs odd H >= 3");
    if (!(b_q >= -0.2 && b_q <= 0.2)) throw ConfigError("gen_thresholds needs b in [-0.2, 0.2]");

    ThresholdSet ts;
    ts.option_count = h_q;
    const double n_star = (1.0 - b_q) / 2.0;
    // Snap the stored skewness to the exactly representable 1 - 2*n_star so
    // the identity (1 - n*) - n* = b holds bit-for-bit.
    ts.neutral_position = n_star;
    ts.skewness = 1.0 - 2.0 * n_star;

    const int hbar = (h_q - 1) / 2;
    ts.thresholds.assign(static_cast<std::size_t>(h_q - 1), 0.0);

    const double l1 = std::min(n_star, 1.0 - n_star);
    const double z = sample_truncated_normal(1.0 / h_q, 0.0, 1.0, 0.025, rng);
    const double pi1 = l1 * z;
    ts.thresholds[static_cast<std::size_t>(hbar - 1)] = n_star - pi1;
    ts.thresholds[static_cast<std::size_t>(hbar)] = n_star + pi1;

    double l_prev = l1;
    double pi_prev = pi1;
    for (int eta = 2; eta <= hbar; ++eta) {
        const double l_eta = l_prev - pi_prev;
        const double pi_eta =
            sample_truncated_normal(l1 / hbar, 0.0, l_eta, 0.025, rng);
        ts.thresholds[static_cast<std::size_t>(hbar + eta - 1)] =
            ts.thresholds[static_cast<std::size_t>(hbar + eta - 2)] + pi_eta;
        ts.thresholds[static_cast<std::size_t>(hbar - eta)] =
            ts.thresholds[static_cast<std::size_t>(hbar - eta + 1)] - pi_eta;
        l_prev = l_eta;
        pi_prev = pi_eta;
    }
    ts.validate();
    return ts;
}

int latent_to_response(double x_star, const ThresholdSet& thresholds) {
    if (!(x_star >= 0.0 && x_star <= 1.0)) {
        throw DataError("latent_to_response: position outside [0,1]");
    }
    const auto& t = thresholds.thresholds;
    // First threshold >= x: boundary hits resolve to the lower interval.
    const auto it = std::lower_bound(t.begin(), t.end(), x_star);
    return static_cast<int>(it - t.begin());
}

namespace {

std::string padded_number(std::int64_t v, int width) {
    std::string raw = std::to_string(v);
    if (static_cast<int>(raw.size()) < width) {
        raw.insert(raw.begin(), static_cast<std::size_t>(width) - raw.size(), '0');
    }
    return raw;
}

Survey make_survey(const std::vector<int>& options_per_question) {
    Survey survey;
    for (std::size_t qi = 0; qi < options_per_question.size(); ++qi) {
        Survey::Question q;
        q.id = "q" + std::to_string(qi + 1);
        const int h = options_per_question[qi];
        for (int o = 1; o <= h; ++o) q.answers.options.push_back("o" + std::to_string(o));
        q.answers.neutral_index = (h - 1) / 2;
        survey.questions.push_back(std::move(q));
    }
    return survey;
}

}  // namespace

SyntheticDataset generate_dataset(const DgpConfig& config, std::uint64_t master_seed,
                                  std::int64_t dataset_index) {
    config.validate();
    SyntheticDataset ds;
    ds.master_seed = master_seed;
    ds.index = dataset_index;
    ds.dataset_seed =
        derive_seed(master_seed, {kDatasetStream, static_cast<std::uint64_t>(dataset_index)});

    // Step 1: structure.
    Rng structure_rng(derive_seed(ds.dataset_seed, {kStructureStream}));
    const int k = static_cast<int>(config.num_construals.draw(structure_rng));
    const int q = static_cast<int>(config.num_questions.draw(structure_rng));

    // Step 2: correlation matrices.
    Rng corr_rng(derive_seed(ds.dataset_seed, {kCorrelationStream}));
    std::vector<CorrelationMatrix> sigmas;
    if (!config.fixed_correlations.empty()) {
        sigmas = config.fixed_correlations;
    } else {
        sigmas.reserve(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) sigmas.push_back(random_correlation(q, corr_rng));
    }

    // Step 3: populations.
    Rng pop_rng(derive_seed(ds.dataset_seed, {kPopulationStream}));
    std::vector<int> populations;
    populations.reserve(static_cast<std::size_t>(k));
    std::size_t n = 0;
    for (int c = 0; c < k; ++c) {
        const int pop = static_cast<int>(config.population.draw(pop_rng));
        populations.push_back(pop);
        n += static_cast<std::size_t>(pop);
    }

    // Step 4: question structure and thresholds.
    Rng thr_rng(derive_seed(ds.dataset_seed, {kThresholdStream}));
    std::vector<int> options(static_cast<std::size_t>(q));
    ds.thresholds.reserve(static_cast<std::size_t>(q));
    for (int j = 0; j < q; ++j) {
        const int h = static_cast<int>(config.options_per_question.draw(thr_rng));
        options[static_cast<std::size_t>(j)] = h;
        const double b = thr_rng.next_double(config.skewness_lo, config.skewness_hi);
        ThresholdSet ts = gen_thresholds(h, b, thr_rng);
        ts.question_id = "q" + std::to_string(j + 1);
        ds.thresholds.push_back(std::move(ts));
    }

    // Step 5: latent positions per construal via the Gaussian copula.
    Rng cop_rng(derive_seed(ds.dataset_seed, {kCopulaStream}));
    ds.latent_positions = DenseMatrix(n, static_cast<std::size_t>(q));
    std::vector<int> membership(n);
    std::size_t row = 0;
    for (int c = 0; c < k; ++c) {
        const DenseMatrix latent =
            sample_copula(sigmas[static_cast<std::size_t>(c)],
                          static_cast<std::size_t>(populations[static_cast<std::size_t>(c)]),
                          cop_rng);
        for (std::size_t i = 0; i < latent.rows; ++i, ++row) {
            membership[row] = c;
            for (int j = 0; j < q; ++j) {
                ds.latent_positions.at(row, static_cast<std::size_t>(j)) =
                    latent.at(i, static_cast<std::size_t>(j));
            }
        }
    }

    // Step 6: map latents to observed answers.
    ds.responses.survey = make_survey(options);
    ds.responses.respondent_ids.reserve(n);
    ds.responses.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        ds.responses.respondent_ids.push_back("r" + padded_number(static_cast<std::int64_t>(i + 1), 6));
        std::vector<int> answers(static_cast<std::size_t>(q));
        for (int j = 0; j < q; ++j) {
            answers[static_cast<std::size_t>(j)] = latent_to_response(
                ds.latent_positions.at(i, static_cast<std::size_t>(j)),
                ds.thresholds[static_cast<std::size_t>(j)]);
        }
        ds.responses.rows.push_back(std::move(answers));
    }

    ds.true_membership.labels = std::move(membership);
    ds.true_membership.n_clusters = k;
    for (int c = 0; c < k; ++c) {
        ds.construals.push_back(ConstrualSpec{sigmas[static_cast<std::size_t>(c)],
                                              populations[static_cast<std::size_t>(c)]});
    }

    ds.responses.validate();
    ds.true_membership.validate();
    return ds;
}

namespace {

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

std::string matrix_to_csv(const DenseMatrix& m) {
    std::string out;
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (j) out += ",";
            out += fmt_double(m.at(i, j));
        }
        out += "\n";
    }
    return out;
}

DenseMatrix matrix_from_csv(const std::string& text) {
    const auto rows = parse_csv(text);
    if (rows.empty()) throw DataError("empty matrix CSV");
    DenseMatrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols) throw DataError("ragged matrix CSV");
        for (std::size_t j = 0; j < m.cols; ++j) {
            m.at(i, j) = parse_double(rows[i][j]);
        }
    }
    return m;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

void write_dataset(const SyntheticDataset& ds, const std::filesystem::path& dir,
                   bool keep_latent) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create dataset directory: " + dir.string());

    write_file_atomic(dir / "schema.json", survey_to_json(ds.responses.survey));
    write_file_atomic(dir / "responses.csv", responses_to_csv(ds.responses));

    std::string truth = "respondent_id,construal_id\n";
    for (std::size_t i = 0; i < ds.responses.respondent_ids.size(); ++i) {
        truth += csv_escape(ds.responses.respondent_ids[i]);
        truth += ",";
        truth += std::to_string(ds.true_membership.labels[i]);
        truth += "\n";
    }
    write_file_atomic(dir / "truth.csv", truth);

    for (std::size_t c = 0; c < ds.construals.size(); ++c) {
        write_file_atomic(dir / ("sigma_" + std::to_string(c + 1) + ".csv"),
                          matrix_to_csv(ds.construals[c].correlation.m));
    }

    json thr = json::array();
    for (const auto& ts : ds.thresholds) {
        json jt;
        jt["question_id"] = ts.question_id;
        jt["option_count"] = ts.option_count;
        jt["skewness"] = ts.skewness;
        jt["neutral_position"] = ts.neutral_position;
        jt["thresholds"] = ts.thresholds;
        thr.push_back(std::move(jt));
    }
    json thr_doc;
    thr_doc["questions"] = std::move(thr);
    write_file_atomic(dir / "thresholds.json", thr_doc.dump(2) + "\n");

    if (keep_latent) {
        write_file_atomic(dir / "latent.csv", matrix_to_csv(ds.latent_positions));
    }

    json manifest;
    manifest["index"] = ds.index;
    manifest["master_seed"] = ds.master_seed;
    manifest["dataset_seed"] = ds.dataset_seed;
    manifest["n_respondents"] = ds.responses.respondent_count();
    manifest["n_questions"] = ds.responses.survey.question_count();
    manifest["n_construals"] = ds.construals.size();
    manifest["populations"] = [&] {
        std::vector<int> pops;
        for (const auto& c : ds.construals) pops.push_back(c.population);
        return pops;
    }();
    manifest["version"] = kVersion;
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

SyntheticDataset read_dataset(const std::filesystem::path& dir) {
    SyntheticDataset ds;
    const Survey survey = parse_survey_schema(read_text_file(dir / "schema.json"));
    ds.responses = load_responses(read_text_file(dir / "responses.csv"), survey);

    // Ground truth membership, joined by respondent id.
    const auto truth_rows = parse_csv(read_text_file(dir / "truth.csv"));
    if (truth_rows.size() != ds.responses.respondent_count() + 1) {
        throw DataError("truth.csv row count does not match responses");
    }
    std::map<std::string, int> by_id;
    for (std::size_t r = 1; r < truth_rows.size(); ++r) {
        if (truth_rows[r].size() != 2) throw DataError("truth.csv needs two columns");
        by_id[trim(truth_rows[r][0])] = static_cast<int>(parse_long(truth_rows[r][1]));
    }
    std::vector<int> labels;
    labels.reserve(ds.responses.respondent_count());
    for (const auto& id : ds.responses.respondent_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError("truth.csv is missing respondent '" + id + "'");
        labels.push_back(it->second);
    }
    ds.true_membership = Partition::from_labels(labels);

    json manifest;
    try {
        manifest = json::parse(read_text_file(dir / "manifest.json"));
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed dataset manifest: ") + e.what());
    }
    ds.index = manifest.value("index", std::int64_t{0});
    ds.master_seed = manifest.value("master_seed", std::uint64_t{0});
    ds.dataset_seed = manifest.value("dataset_seed", std::uint64_t{0});

    const auto n_construals = manifest.at("n_construals").get<std::size_t>();
    std::vector<int> populations(n_construals, 0);
    if (manifest.contains("populations")) {
        populations = manifest["populations"].get<std::vector<int>>();
    }
    for (std::size_t c = 0; c < n_construals; ++c) {
        CorrelationMatrix corr;
        corr.m = matrix_from_csv(
            read_text_file(dir / ("sigma_" + std::to_string(c + 1) + ".csv")));
        ds.construals.push_back(ConstrualSpec{std::move(corr), populations[c]});
    }

    if (std::filesystem::exists(dir / "thresholds.json")) {
        json thr;
        try {
            thr = json::parse(read_text_file(dir / "thresholds.json"));
        } catch (const json::exception& e) {
            throw DataError(std::string("malformed thresholds.json: ") + e.what());
        }
        for (const auto& jt : thr.at("questions")) {
            ThresholdSet ts;
            ts.question_id = jt.at("question_id").get<std::string>();
            ts.option_count = jt.at("option_count").get<int>();
            ts.skewness = jt.at("skewness").get<double>();
            ts.neutral_position = jt.at("neutral_position").get<double>();
            ts.thresholds = jt.at("thresholds").get<std::vector<double>>();
            ds.thresholds.push_back(std::move(ts));
        }
    }
    if (std::filesystem::exists(dir / "latent.csv")) {
        ds.latent_positions = matrix_from_csv(read_text_file(dir / "latent.csv"));
    }
    return ds;
}

}  // namespace bca
