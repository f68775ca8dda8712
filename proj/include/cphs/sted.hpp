#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cphs/config.hpp"
#include "cphs/domain.hpp"
#include "cphs/rng.hpp"

namespace cphs::sted {

enum class Scenario { NoArtificial, PossibleArtificial, Artificial };
enum class Channel { Ive, Physical };
enum class Action { SwitchOn, SwitchOff, NoAction };

const char* to_string(Scenario v);
const char* to_string(Channel v);
const char* to_string(Action v);
Scenario scenario_from_string(const std::string& s);
Channel channel_from_string(const std::string& s);
Action action_from_string(const std::string& s);

struct Slot {
    domain::ContextVector context;
    Scenario scenario = Scenario::PossibleArtificial;
};

struct StedSchedule {
    std::vector<Slot> slots;

    std::array<std::size_t, domain::kEventTypeCount> event_counts() const;
    std::array<std::size_t, domain::kSeasonCount> season_counts() const;
};

struct ScheduleConfig {
    // slots per event type, in EventType order
    std::array<int, domain::kEventTypeCount> event_counts{36, 36, 18, 18, 18, 18, 36};
    int subjects = 1;
    std::uint64_t schedule_seed = 0;  // illuminance jitter stream

    double jitter_sigma = 0.25;   // lognormal jitter on outdoor illuminance
    double transfer_up = 0.04;    // daylight transfer coefficient, blinds up
    double transfer_down = 0.008; // daylight transfer coefficient, blinds down
    double lamp_lux = 300.0;      // contribution of ceiling lights
    double ambient_lux = 5.0;     // floor on work-area illuminance
    std::array<double, domain::kSeasonCount> outdoor_peak{30000.0, 60000.0, 20000.0, 8000.0};
    double artificial_below = 1500.0;      // outdoor lux: scenario "artificial"
    double no_artificial_above = 12000.0;  // outdoor lux: scenario "no_artificial"

    void validate() const;
    static ScheduleConfig from_config(const Config& cfg);
};

// Deterministic schedule: slot order is event-type major, seasons assigned
// round-robin over the global slot index (per-season totals balance whenever
// the total is divisible by four), indoor configurations cycle with a
// shifted period so they do not alias with the season cycle.
StedSchedule build_sted_schedule(const ScheduleConfig& config);

struct EventRecord {
    int subject_id = 0;
    int slot = 0;
    domain::ContextVector context;
    Action action = Action::NoAction;
    Channel channel = Channel::Ive;
};

using BehaviorFn = std::function<double(const domain::ContextVector&)>;

// One record per slot (per subject). The Bernoulli draw from the model's
// switch-on probability is mapped onto the action that is legal in the
// slot's light state: a hit switches the lights (on if they are off, off if
// they are on), a miss is no_action.
std::vector<EventRecord> run_stated_choice(const StedSchedule& schedule, const BehaviorFn& model,
                                           Channel channel, std::uint64_t seed, int subjects = 1);

// A ground-truth model with a bounded coefficient shift; the profile
// distance from the truth is verified at construction.
struct AuxiliaryModel {
    domain::GroundTruthScm model;
    double radius = 0.0;            // declared alpha
    double measured_distance = 0.0; // construction-time estimate

    BehaviorFn behavior() const;
};

struct PerturbConfig {
    double scale = 0.3;          // coefficient shift half-range
    int max_rejections = 200;
    int grid_points = 64;        // Monte-Carlo context grid size
    std::uint64_t grid_seed = 0x5eedc0de;
};

// W1 distance between two response-probability profiles evaluated on a
// seeded Monte-Carlo grid of contexts.
double profile_distance(const BehaviorFn& a, const BehaviorFn& b, std::uint64_t grid_seed,
                        int grid_points = 64);

domain::ContextVector sample_context(Rng& rng);

std::vector<AuxiliaryModel> perturb_ground_truth(const domain::GroundTruthScm& truth, double alpha,
                                                 int k, std::uint64_t seed,
                                                 const PerturbConfig& opts = {});

struct CoverageReport {
    std::size_t selected = 0;        // slots satisfying phi_approx
    double overlap_fraction = 0.0;   // of those, fraction also satisfying phi
};

// Sample responses on the slots satisfying the approximating predicate.
std::pair<std::vector<EventRecord>, CoverageReport> restricted_sample(
    const StedSchedule& schedule, const BehaviorFn& model, const domain::ContextPredicate& phi,
    const domain::ContextPredicate& phi_approx, Channel channel, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Dataset CSV (column order is part of the interface)

void write_dataset_csv(std::ostream& out, const StedSchedule& schedule,
                       const std::vector<EventRecord>& records);

struct DatasetFile {
    std::vector<EventRecord> records;
    std::vector<Scenario> scenarios;  // parallel to records
};

DatasetFile read_dataset_csv(std::istream& in);

}  // namespace cphs::sted
