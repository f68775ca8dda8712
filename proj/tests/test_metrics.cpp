#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "cphs/metrics.hpp"
#include "cphs/rng.hpp"

using namespace cphs;
using namespace cphs::metrics;

namespace {

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

EmpiricalDistribution dist(std::vector<double> v, std::vector<double> w) {
    return EmpiricalDistribution(std::move(v), std::move(w));
}

// Minimum-cost perfect matching between equal-weight sample sets, by brute
// force over permutations. Independent of the CDF-integral implementation.
double w1_matching(std::vector<double> a, std::vector<double> b) {
    std::vector<std::size_t> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) cost += std::fabs(a[i] - b[perm[i]]);
        best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("empirical distributions validate their weights") {
    CHECK_THROWS(dist({}, {}));
    CHECK_THROWS(dist({1.0}, {0.5, 0.5}));
    CHECK_THROWS(dist({1.0, 2.0}, {0.6, 0.5}));     // sums to 1.1
    CHECK_THROWS(dist({1.0, 2.0}, {1.1, -0.1}));    // negative weight
    CHECK_THROWS(dist({std::nan(""), 2.0}, {0.5, 0.5}));
    CHECK_NOTHROW(dist({1.0, 2.0}, {0.25, 0.75}));
}

TEST_CASE("weighted mean and hypothesis expectations") {
    auto d = dist({1.0, 2.0, 4.0, 8.0}, {0.4, 0.3, 0.2, 0.1});
    CHECK(near(d.mean(), 2.6, 1e-15));  // oracle: dot product by hand

    Hypothesis id;
    id.kind = Hypothesis::Kind::Identity;
    CHECK(near(d.expectation(id), d.mean(), 1e-15));

    Hypothesis sq;
    sq.kind = Hypothesis::Kind::Polynomial;
    sq.degree = 2;
    sq.center = 2.0;
    sq.scale = 2.0;
    // E[((x-2)/2)^2] = (0.4*1 + 0 + 0.2*4 + 0.1*36) / 4
    CHECK(near(d.expectation(sq), (0.4 + 0.8 + 3.6) / 4.0, 1e-15));

    Hypothesis tent;
    tent.kind = Hypothesis::Kind::SmoothBin;
    tent.center = 2.0;
    tent.width = 2.0;
    // tent(1)=0.5 tent(2)=1 tent(4)=0 tent(8)=0
    CHECK(near(d.expectation(tent), 0.4 * 0.5 + 0.3, 1e-15));
}

TEST_CASE("from_samples weights are exactly normalized") {
    for (std::size_t n : {1u, 3u, 7u, 10u, 97u}) {
        std::vector<double> v(n, 1.0);
        auto d = EmpiricalDistribution::from_samples(v);
        double sum = 0.0;
        for (double w : d.weights()) sum += w;
        CHECK(sum == 1.0);
    }
}

TEST_CASE("hypothesis loss is the largest expectation gap") {
    auto f = dist({0.0, 1.0}, {0.5, 0.5});
    auto ref = dist({0.25}, {1.0});
    CHECK(near(hypothesis_loss(f, ref, HypothesisSet::identity()), 0.25, 1e-15));

    HypothesisSet hs = HypothesisSet::polynomials(2, 0.0, 1.0);
    // id gap 0.25; poly1 = same; poly2: E_f = 0.5, E_ref = 0.0625 -> 0.4375
    CHECK(near(hypothesis_loss(f, ref, hs), 0.4375, 1e-15));
}

TEST_CASE("moment reference with identity reduces to a mean gap") {
    Rng rng(31);
    for (int i = 0; i < 50; ++i) {
        std::size_t n = 1 + static_cast<std::size_t>(rng.below(20));
        std::vector<double> vals, wts;
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            vals.push_back(rng.uniform(-5.0, 5.0));
            wts.push_back(rng.uniform(0.05, 1.0));
            total += wts.back();
        }
        for (double& w : wts) w /= total;
        double drift = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) drift += wts[k];
        wts.back() = 1.0 - drift;
        auto f = dist(vals, wts);
        KnownMoments m{rng.uniform(-5.0, 5.0), 1.0};
        CHECK(near(hypothesis_loss(f, m, HypothesisSet::identity()), std::fabs(f.mean() - m.mean), 1e-12));
    }
}

TEST_CASE("moment reference rejects hypotheses it cannot score") {
    auto f = dist({0.0, 1.0}, {0.5, 0.5});
    HypothesisSet hs = HypothesisSet::smoothed_bins(0.0, 1.0, 3);
    CHECK_THROWS_AS(hypothesis_loss(f, KnownMoments{0.5, 0.1}, hs), std::invalid_argument);
}

TEST_CASE("wasserstein1 on point masses and a weighted instance") {
    CHECK(near(wasserstein1(dist({0.3}, {1.0}), dist({0.8}, {1.0})), 0.5, 1e-15));
    CHECK(wasserstein1(dist({0.3}, {1.0}), dist({0.3}, {1.0})) == 0.0);
    // oracle: piecewise CDF-difference integral computed independently
    auto a = dist({0.1, 0.5, 0.9}, {0.2, 0.3, 0.5});
    auto b = dist({0.2, 0.4, 1.0}, {0.5, 0.25, 0.25});
    CHECK(near(wasserstein1(a, b), 0.26, 1e-12));
    CHECK(near(wasserstein1(b, a), 0.26, 1e-12));  // symmetry
}

TEST_CASE("wasserstein1 equals the matching oracle on equal weights") {
    // frozen instance, oracle value 0.835
    std::vector<double> va{0.31, 2.7, -1.2, 0.05};
    std::vector<double> vb{1.5, -0.4, 0.9, 2.2};
    CHECK(near(wasserstein1(EmpiricalDistribution::from_samples(va),
                            EmpiricalDistribution::from_samples(vb)),
               0.835, 1e-12));

    Rng rng(77);
    for (int i = 0; i < 30; ++i) {
        std::vector<double> xs, ys;
        for (int k = 0; k < 6; ++k) {
            xs.push_back(rng.uniform(-3.0, 3.0));
            ys.push_back(rng.uniform(-3.0, 3.0));
        }
        double lib = wasserstein1(EmpiricalDistribution::from_samples(xs),
                                  EmpiricalDistribution::from_samples(ys));
        CHECK(near(lib, w1_matching(xs, ys), 1e-9));
    }
}

TEST_CASE("wasserstein1 triangle inequality and shift linearity") {
    Rng rng(78);
    for (int i = 0; i < 30; ++i) {
        std::vector<double> xs, ys, zs;
        for (int k = 0; k < 5; ++k) {
            xs.push_back(rng.uniform(-2.0, 2.0));
            ys.push_back(rng.uniform(-2.0, 2.0));
            zs.push_back(rng.uniform(-2.0, 2.0));
        }
        auto a = EmpiricalDistribution::from_samples(xs);
        auto b = EmpiricalDistribution::from_samples(ys);
        auto c = EmpiricalDistribution::from_samples(zs);
        CHECK(wasserstein1(a, c) <= wasserstein1(a, b) + wasserstein1(b, c) + 1e-12);

        double shift = rng.uniform(0.0, 1.0);
        std::vector<double> shifted = xs;
        for (double& v : shifted) v += shift;
        CHECK(near(wasserstein1(a, EmpiricalDistribution::from_samples(shifted)), shift, 1e-12));
    }
}

TEST_CASE("bayes label thresholds at one half with ties to zero") {
    CHECK(bayes_optimal_label(0.0) == 0);
    CHECK(bayes_optimal_label(0.5) == 0);
    CHECK(bayes_optimal_label(std::nextafter(0.5, 1.0)) == 1);
    CHECK(bayes_optimal_label(1.0) == 1);
}

TEST_CASE("bayes rule minimizes risk over all labelings") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = 2 + static_cast<std::size_t>(rng.below(7));  // up to 8 atoms
        std::vector<double> p1(n), p0(n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            p1[i] = rng.uniform(0.0, 1.0);
            p0[i] = rng.uniform(0.0, 1.0);
            total += p1[i] + p0[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            p1[i] /= total;  // P(X=i, Y=1)
            p0[i] /= total;  // P(X=i, Y=0)
        }
        double bayes_risk = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double eta = p1[i] / (p1[i] + p0[i]);
            bayes_risk += bayes_optimal_label(eta) == 1 ? p0[i] : p1[i];
        }
        for (std::size_t mask = 0; mask < (1u << n); ++mask) {
            double risk = 0.0;
            for (std::size_t i = 0; i < n; ++i) risk += (mask >> i) & 1 ? p0[i] : p1[i];
            CHECK(bayes_risk <= risk + 1e-15);
        }
    }
}

TEST_CASE("generalization gap check applies the exponential bound") {
    GapCheck g = generalization_gap_check(0.10, 0.13, 500, 0.05);
    CHECK(near(g.gap, 0.03, 1e-15));
    CHECK(near(g.bound, 0.1641699972477976, 1e-12));  // oracle: 2 exp(-2 N eps^2)
    CHECK_FALSE(g.violation);
    GapCheck v = generalization_gap_check(0.10, 0.17, 2000, 0.03);
    CHECK(near(v.bound, 0.05464744489458514, 1e-12));
    CHECK(v.violation);
}

TEST_CASE("log-spaced grid matches the closed form") {
    BinGrid g = BinGrid::log_spaced(200.0, 700.0, 11);
    REQUIRE(g.size() == 11);
    double lo = std::log10(200.0), hi = std::log10(700.0);
    for (int k = 0; k < 11; ++k) {
        double want = std::pow(10.0, lo + k * (hi - lo) / 10.0);
        CHECK(near(g.centers_lux[static_cast<std::size_t>(k)], want, 1e-9 * want));
    }
    CHECK(near(g.centers_lux[5], 374.1657386773942, 1e-9));  // sqrt(200*700)
    CHECK(g == BinGrid::log_spaced(200.0, 700.0, 11));
    CHECK_FALSE(g == BinGrid::log_spaced(200.0, 700.0, 9));
    CHECK_THROWS(BinGrid::log_spaced(700.0, 200.0, 11));
    CHECK_THROWS(BinGrid::log_spaced(200.0, 700.0, 0));
    CHECK(near(BinGrid::log_spaced(200.0, 700.0, 1).centers_lux[0], 374.16573867739413, 1e-9));
}

TEST_CASE("target discrepancy is mean absolute deviation on a shared grid") {
    BinGrid g = BinGrid::log_spaced(200.0, 700.0, 3);
    Curve a{g, {0.2, 0.5, 0.8}};
    Curve b{g, {0.3, 0.5, 0.4}};
    CHECK(near(target_discrepancy(a, b), (0.1 + 0.0 + 0.4) / 3.0, 1e-15));
    CHECK(target_discrepancy(a, a) == 0.0);
    Curve other{BinGrid::log_spaced(100.0, 700.0, 3), {0.1, 0.1, 0.1}};
    CHECK_THROWS(target_discrepancy(a, other));
}

TEST_CASE("curve csv round-trips exactly") {
    BinGrid g = BinGrid::log_spaced(200.0, 700.0, 5);
    Curve c{g, {0.1, 0.25, 1.0 / 3.0, 0.5, 0.9}};
    std::ostringstream os;
    write_curve_csv(os, c);
    std::istringstream is(os.str());
    Curve back = read_curve_csv(is);
    CHECK(back.grid.centers_lux == c.grid.centers_lux);
    CHECK(back.probability == c.probability);
    CHECK(os.str().rfind("bin_center_lux,probability\n", 0) == 0);
}

TEST_CASE("context restricted error in probabilistic mode") {
    BinGrid g = BinGrid::log_spaced(200.0, 700.0, 2);  // centers 200 and 700
    std::vector<LabeledRecord> data;
    auto add = [&](double lux, bool acted, bool occ) {
        LabeledRecord r;
        r.context.work_lux = lux;
        r.context.occupancy = occ;
        data.push_back(r);
        data.back().acted = acted;
    };
    // bin 200: rates 1/2; bin 700: rate 1
    add(210.0, true, true);
    add(190.0, false, true);
    add(680.0, true, true);
    add(205.0, true, false);  // excluded by the predicate below

    BehaviorHandle model;
    model.probabilistic = true;
    model.probability = [](const domain::ContextVector&) { return 0.25; };

    domain::ContextPredicate only_occupied;
    only_occupied.occupancy = true;

    // per-bin MAD: |0.25-0.5| and |0.25-1| averaged over occupied bins
    CHECK(near(context_restricted_error(model, data, only_occupied, g), (0.25 + 0.75) / 2.0, 1e-12));

    BehaviorHandle classifier;
    classifier.probabilistic = false;
    classifier.probability = [](const domain::ContextVector& c) { return c.work_lux < 400.0 ? 0.9 : 0.1; };
    // occupied records: predictions 1,1,0 vs acted 1,0,1 -> 2/3 misclassified
    CHECK(near(context_restricted_error(classifier, data, only_occupied, g), 2.0 / 3.0, 1e-12));

    domain::ContextPredicate nothing;
    nothing.work_lux = domain::ValueRange{1e6, 2e6};
    CHECK_THROWS_AS(context_restricted_error(model, data, nothing, g), EmptyContextError);
}
