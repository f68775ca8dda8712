#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cphs/domain.hpp"

namespace cphs::metrics {

struct KnownMoments {
    double mean = 0.0;
    double variance = 0.0;
};

// One bounded continuous function over the (scalar) sample space.
struct Hypothesis {
    enum class Kind { Identity, Polynomial, SmoothBin };

    std::string name;
    Kind kind = Kind::Identity;
    int degree = 1;        // Polynomial
    double center = 0.0;   // Polynomial / SmoothBin
    double scale = 1.0;    // Polynomial normalization
    double width = 1.0;    // SmoothBin half-width
    double bound = 1.0;    // declared sup-norm over the working domain

    double eval(double x) const;
    // True when E[h] is determined by (mean, variance) alone.
    bool moment_computable() const;
    double expectation(const KnownMoments& m) const;
};

struct HypothesisSet {
    std::vector<Hypothesis> items;

    void validate() const;  // non-empty, finite declared bounds

    static HypothesisSet identity();
    // Identity plus centered polynomials of degree 2..max_degree,
    // normalized by half_width over [center-half_width, center+half_width].
    static HypothesisSet polynomials(int max_degree, double center, double half_width);
    // Tent kernels centered on an equally spaced grid.
    static HypothesisSet smoothed_bins(double lo, double hi, int count);
};

// Weighted scalar samples; weights are positive and sum to 1 (within 1e-9).
class EmpiricalDistribution {
public:
    EmpiricalDistribution(std::vector<double> values, std::vector<double> weights);
    static EmpiricalDistribution from_samples(std::vector<double> values);

    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return values_.size(); }
    double mean() const;
    double expectation(const Hypothesis& h) const;

    // Optional known-moments annotation (specification distributions).
    std::optional<KnownMoments> moments;

private:
    std::vector<double> values_;
    std::vector<double> weights_;
};

double hypothesis_loss(const EmpiricalDistribution& f, const EmpiricalDistribution& reference,
                       const HypothesisSet& hypotheses);
// Moments-only reference; every hypothesis must be moment-computable.
double hypothesis_loss(const EmpiricalDistribution& f, const KnownMoments& reference,
                       const HypothesisSet& hypotheses);

// Exact 1-D W1 as the integral of |CDF_a - CDF_b|.
double wasserstein1(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

// 1 iff eta > 1/2; ties go to 0.
int bayes_optimal_label(double eta);

struct GapCheck {
    double gap;
    double bound;
    bool violation;  // single-run observation gap > epsilon
};

GapCheck generalization_gap_check(double train_error, double test_error, std::size_t n, double epsilon);

// ---------------------------------------------------------------------------
// Curves on an illuminance bin grid

struct BinGrid {
    std::vector<double> centers_lux;

    // n centers equally spaced in log10 space over [lo_lux, hi_lux].
    static BinGrid log_spaced(double lo_lux, double hi_lux, int n);
    bool operator==(const BinGrid& other) const = default;
    std::size_t size() const { return centers_lux.size(); }
};

struct Curve {
    BinGrid grid;
    std::vector<double> probability;
};

// Mean absolute deviation between two curves on the same grid.
double target_discrepancy(const Curve& model_curve, const Curve& target_curve);

void write_curve_csv(std::ostream& out, const Curve& curve);
Curve read_curve_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Context-restricted evaluation

struct LabeledRecord {
    domain::ContextVector context;
    bool acted;  // observed switch action
};

struct BehaviorHandle {
    std::function<double(const domain::ContextVector&)> probability;
    bool probabilistic = true;  // false: hard classifier via p > 1/2
};

// Thrown when a predicate matches no record.
struct EmptyContextError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Misclassification rate (classifier mode) or per-bin mean absolute
// deviation between predicted probability and observed action rate
// (probabilistic mode), restricted to records satisfying the predicate.
double context_restricted_error(const BehaviorHandle& model, const std::vector<LabeledRecord>& dataset,
                                const domain::ContextPredicate& predicate,
                                const BinGrid& bins = BinGrid::log_spaced(200.0, 700.0, 11));

}  // namespace cphs::metrics
