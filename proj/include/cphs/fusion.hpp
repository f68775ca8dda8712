#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cphs/config.hpp"
#include "cphs/domain.hpp"
#include "cphs/metrics.hpp"
#include "cphs/mlp.hpp"
#include "cphs/sted.hpp"

namespace cphs::fusion {

struct TrainingConfig {
    int max_epochs = 200;
    int batch_size = 32;
    double learning_rate = 0.05;
    double discrepancy_threshold = 0.0;  // stop once discrepancy <= threshold
    std::uint64_t seed = 0;
    metrics::BinGrid grid = metrics::BinGrid::log_spaced(200.0, 700.0, 11);

    int noise_dim = 4;
    int hidden_units = 16;
    int hidden_layers = 2;
    int eval_draws = 256;        // Monte-Carlo size for augmented_predict
    bool bernoulli_real = false; // real samples carry Bernoulli draws, not probabilities

    void validate() const;
    static TrainingConfig from_config(const Config& cfg);  // [fusion] section
};

// Standardized log10-lux feature; queries outside the training range are
// clamped to the range edges.
struct FeatureScaler {
    double mean = 0.0;
    double stddev = 1.0;
    double lo_log10 = 0.0;
    double hi_log10 = 1.0;

    double clamp_log10(double work_lux) const;
    double transform(double work_lux) const;
};

// Context samples annotated with the design model's probability there.
struct ModelSample {
    domain::ContextVector context;
    double probability = 0.0;
};

struct ExistingDataset {
    domain::HuntModel model;
    std::vector<ModelSample> samples;
};

ExistingDataset make_existing_dataset(const sted::StedSchedule& schedule,
                                      const domain::HuntModel& model);

struct AugmentedModel {
    Mlp generator;
    FeatureScaler scaler;
    domain::HuntModel existing;  // supplies the model-probability input channel
    metrics::BinGrid grid;
    // Frozen Monte-Carlo banks so prediction is deterministic and the
    // persisted model reloads bit-exact.
    std::vector<std::array<double, 2>> ive_bank;  // (feature, response) pairs
    std::vector<std::vector<double>> noise_bank;  // eval_draws x noise_dim
    std::vector<double> curve_cache;              // probability per grid bin
};

double augmented_predict(const AugmentedModel& model, double work_lux);
metrics::Curve predict_curve(const AugmentedModel& model);

void write_augmented_model(std::ostream& os, const AugmentedModel& model);
AugmentedModel read_augmented_model(std::istream& is);

struct EpochStats {
    int epoch = 0;
    double generator_loss = 0.0;
    double discriminator_loss = 0.0;
    double discrepancy = 0.0;
};

struct TrainingHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = 0;  // argmin discrepancy
    std::string pairing_policy = "uniform-random-per-batch";
};

void write_history_csv(std::ostream& os, const TrainingHistory& history);

struct TrainingError : std::runtime_error {
    int epoch;
    explicit TrainingError(const std::string& what, int epoch_index)
        : std::runtime_error(what), epoch(epoch_index) {}
};

// Adversarial fusion: the generator consumes one existing-model sample, one
// stated-choice sample and a noise vector; the discriminator judges
// (feature, probability) pairs against the performance target.
std::pair<AugmentedModel, TrainingHistory> train_gan(const ExistingDataset& existing,
                                                     const std::vector<sted::EventRecord>& ive,
                                                     const domain::ProbitTarget& target,
                                                     const TrainingConfig& config);

// ---------------------------------------------------------------------------
// Approximate design problem: convex mixture of auxiliary distributions.

struct DesignReport {
    std::vector<double> weights;  // on the simplex
    double achieved_loss = 0.0;
    bool loss_within_epsilon = false;
    double nearest_w1 = 0.0;      // W1 to the closest auxiliary distribution
    double declared_alpha = 0.0;
    bool within_beta = false;     // nearest_w1 + declared_alpha <= beta
};

std::pair<metrics::EmpiricalDistribution, DesignReport> solve_approximate_design(
    const std::vector<metrics::EmpiricalDistribution>& auxiliaries,
    const metrics::KnownMoments& known_moments, const metrics::HypothesisSet& hypotheses,
    double epsilon, double beta, double declared_alpha);

}  // namespace cphs::fusion
