#include "cphs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cphs/text.hpp"

namespace cphs {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace cphs

namespace cphs::metrics {

double Hypothesis::eval(double x) const {
    switch (kind) {
        case Kind::Identity:
            return x;
        case Kind::Polynomial: {
            double base = (x - center) / scale;
            double r = 1.0;
            for (int i = 0; i < degree; ++i) r *= base;
            return r;
        }
        case Kind::SmoothBin: {
            double d = std::fabs(x - center) / width;
            return d >= 1.0 ? 0.0 : 1.0 - d;
        }
    }
    throw std::logic_error("Hypothesis: bad kind");
}

bool Hypothesis::moment_computable() const {
    if (kind == Kind::Identity) return true;
    return kind == Kind::Polynomial && degree <= 2;
}

double Hypothesis::expectation(const KnownMoments& m) const {
    switch (kind) {
        case Kind::Identity:
            return m.mean;
        case Kind::Polynomial: {
            double d = m.mean - center;
            if (degree == 1) return d / scale;
            if (degree == 2) return (m.variance + d * d) / (scale * scale);
            break;
        }
        case Kind::SmoothBin:
            break;
    }
    throw std::invalid_argument("hypothesis '" + name + "' is not determined by (mean, variance)");
}

void HypothesisSet::validate() const {
    if (items.empty()) throw std::invalid_argument("HypothesisSet: must be non-empty");
    for (const auto& h : items)
        if (!std::isfinite(h.bound)) throw std::invalid_argument("HypothesisSet: non-finite bound for " + h.name);
}

HypothesisSet HypothesisSet::identity() {
    HypothesisSet hs;
    Hypothesis h;
    h.name = "id";
    h.kind = Hypothesis::Kind::Identity;
    h.bound = 1e308;  // finite declared bound; samples live in a bounded working range
    hs.items.push_back(h);
    return hs;
}

HypothesisSet HypothesisSet::polynomials(int max_degree, double center, double half_width) {
    if (max_degree < 1) throw std::invalid_argument("polynomials: max_degree >= 1");
    if (!(half_width > 0.0)) throw std::invalid_argument("polynomials: half_width > 0");
    HypothesisSet hs = identity();
    for (int d = 1; d <= max_degree; ++d) {
        Hypothesis h;
        h.name = "poly" + std::to_string(d);
        h.kind = Hypothesis::Kind::Polynomial;
        h.degree = d;
        h.center = center;
        h.scale = half_width;
        h.bound = 1.0;  // |((x-c)/w)^d| <= 1 on [c-w, c+w]
        hs.items.push_back(h);
    }
    return hs;
}

HypothesisSet HypothesisSet::smoothed_bins(double lo, double hi, int count) {
    if (count < 1 || !(lo < hi)) throw std::invalid_argument("smoothed_bins: bad grid");
    HypothesisSet hs;
    double step = (hi - lo) / static_cast<double>(count);
    for (int i = 0; i < count; ++i) {
        Hypothesis h;
        h.name = "bin" + std::to_string(i);
        h.kind = Hypothesis::Kind::SmoothBin;
        h.center = lo + (static_cast<double>(i) + 0.5) * step;
        h.width = step;
        h.bound = 1.0;
        hs.items.push_back(h);
    }
    return hs;
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> values, std::vector<double> weights)
    : values_(std::move(values)), weights_(std::move(weights)) {
    if (values_.empty()) throw std::invalid_argument("EmpiricalDistribution: sample list non-empty");
    if (values_.size() != weights_.size())
        throw std::invalid_argument("EmpiricalDistribution: values/weights size mismatch");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w > 0.0)) throw std::invalid_argument("EmpiricalDistribution: weights must be positive");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw std::invalid_argument("EmpiricalDistribution: weights must sum to 1");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("EmpiricalDistribution: non-finite sample");
}

EmpiricalDistribution EmpiricalDistribution::from_samples(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("EmpiricalDistribution: sample list non-empty");
    std::vector<double> w(values.size(), 1.0 / static_cast<double>(values.size()));
    // re-normalize the tail weight so the sum is exactly 1 in floating point
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) sum += w[i];
    w.back() = 1.0 - sum;
    return EmpiricalDistribution(std::move(values), std::move(w));
}

double EmpiricalDistribution::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * weights_[i];
    return s;
}

double EmpiricalDistribution::expectation(const Hypothesis& h) const {
    double s = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) s += h.eval(values_[i]) * weights_[i];
    return s;
}

double hypothesis_loss(const EmpiricalDistribution& f, const EmpiricalDistribution& reference,
                       const HypothesisSet& hypotheses) {
    hypotheses.validate();
    double worst = 0.0;
    for (const auto& h : hypotheses.items)
        worst = std::max(worst, std::fabs(f.expectation(h) - reference.expectation(h)));
    return worst;
}

double hypothesis_loss(const EmpiricalDistribution& f, const KnownMoments& reference,
                       const HypothesisSet& hypotheses) {
    hypotheses.validate();
    double worst = 0.0;
    for (const auto& h : hypotheses.items) {
        if (!h.moment_computable())
            throw std::invalid_argument(
                "hypothesis_loss: hypothesis '" + h.name + "' unsupported with a moments-only reference");
        worst = std::max(worst, std::fabs(f.expectation(h) - h.expectation(reference)));
    }
    return worst;
}

double wasserstein1(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    // events: value -> (weight in a, weight in b)
    std::map<double, std::pair<double, double>> events;
    for (std::size_t i = 0; i < a.size(); ++i) events[a.values()[i]].first += a.weights()[i];
    for (std::size_t i = 0; i < b.size(); ++i) events[b.values()[i]].second += b.weights()[i];

    double total = 0.0;
    double fa = 0.0, fb = 0.0;
    double prev = 0.0;
    bool first = true;
    for (const auto& [x, w] : events) {
        if (!first) total += std::fabs(fa - fb) * (x - prev);
        fa += w.first;
        fb += w.second;
        prev = x;
        first = false;
    }
    return total;
}

int bayes_optimal_label(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("bayes_optimal_label: eta must be in [0,1]");
    return eta > 0.5 ? 1 : 0;
}

GapCheck generalization_gap_check(double train_error, double test_error, std::size_t n, double epsilon) {
    if (!(train_error >= 0.0 && train_error <= 1.0) || !(test_error >= 0.0 && test_error <= 1.0))
        throw std::invalid_argument("generalization_gap_check: errors must be in [0,1]");
    if (n < 1) throw std::invalid_argument("generalization_gap_check: n >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("generalization_gap_check: epsilon > 0");
    GapCheck out;
    out.gap = std::fabs(test_error - train_error);
    out.bound = std::min(1.0, 2.0 * std::exp(-2.0 * static_cast<double>(n) * epsilon * epsilon));
    out.violation = out.gap > epsilon;
    return out;
}

BinGrid BinGrid::log_spaced(double lo_lux, double hi_lux, int n) {
    if (!(lo_lux > 0.0 && hi_lux > lo_lux)) throw std::invalid_argument("BinGrid: requires 0 < lo < hi");
    if (n < 1) throw std::invalid_argument("BinGrid: n >= 1");
    BinGrid g;
    if (n == 1) {
        g.centers_lux.push_back(std::sqrt(lo_lux * hi_lux));
        return g;
    }
    double llo = std::log10(lo_lux), lhi = std::log10(hi_lux);
    for (int i = 0; i < n; ++i) {
        double t = llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1);
        g.centers_lux.push_back(std::pow(10.0, t));
    }
    return g;
}

double target_discrepancy(const Curve& model_curve, const Curve& target_curve) {
    if (!(model_curve.grid == target_curve.grid))
        throw std::invalid_argument("target_discrepancy: curves must share a bin grid");
    if (model_curve.probability.size() != model_curve.grid.size() ||
        target_curve.probability.size() != target_curve.grid.size())
        throw std::invalid_argument("target_discrepancy: curve length does not match grid");
    double s = 0.0;
    for (std::size_t i = 0; i < model_curve.probability.size(); ++i)
        s += std::fabs(model_curve.probability[i] - target_curve.probability[i]);
    return s / static_cast<double>(model_curve.probability.size());
}

void write_curve_csv(std::ostream& out, const Curve& curve) {
    out << "bin_center_lux,probability\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i)
        out << fmt_double(curve.grid.centers_lux[i]) << ',' << fmt_double(curve.probability[i]) << '\n';
}

Curve read_curve_csv(std::istream& in) {
    Curve curve;
    std::string line;
    if (!std::getline(in, line) || trim(line) != "bin_center_lux,probability")
        throw std::runtime_error("curve csv: bad header");
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2) throw std::runtime_error("curve csv: expected 2 columns");
        curve.grid.centers_lux.push_back(std::stod(fields[0]));
        curve.probability.push_back(std::stod(fields[1]));
    }
    if (curve.grid.centers_lux.empty()) throw std::runtime_error("curve csv: no rows");
    return curve;
}

double context_restricted_error(const BehaviorHandle& model, const std::vector<LabeledRecord>& dataset,
                                const domain::ContextPredicate& predicate, const BinGrid& bins) {
    predicate.validate();
    std::vector<const LabeledRecord*> matched;
    for (const auto& r : dataset)
        if (predicate.matches(r.context)) matched.push_back(&r);
    if (matched.empty()) throw EmptyContextError("context_restricted_error: predicate matches no record");

    if (!model.probabilistic) {
        std::size_t wrong = 0;
        for (const auto* r : matched) {
            bool predicted = model.probability(r->context) > 0.5;
            if (predicted != r->acted) ++wrong;
        }
        return static_cast<double>(wrong) / static_cast<double>(matched.size());
    }

    // nearest bin center in log10 space
    auto bin_of = [&bins](double lux) {
        double lx = std::log10(std::max(lux, 1e-9));
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::max();
        for (std::size_t i = 0; i < bins.size(); ++i) {
            double d = std::fabs(lx - std::log10(bins.centers_lux[i]));
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    };

    std::vector<double> pred_sum(bins.size(), 0.0), act_sum(bins.size(), 0.0);
    std::vector<std::size_t> count(bins.size(), 0);
    for (const auto* r : matched) {
        std::size_t b = bin_of(r->context.work_lux);
        pred_sum[b] += model.probability(r->context);
        act_sum[b] += r->acted ? 1.0 : 0.0;
        ++count[b];
    }
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t b = 0; b < bins.size(); ++b) {
        if (count[b] == 0) continue;
        double n = static_cast<double>(count[b]);
        total += std::fabs(pred_sum[b] / n - act_sum[b] / n);
        ++used;
    }
    return total / static_cast<double>(used);
}

}  // namespace cphs::metrics
