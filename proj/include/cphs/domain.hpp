#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cphs/config.hpp"

namespace cphs::domain {

enum class LeaveStatus { None, Short, Long };
enum class EventType { Initial, Arrival, ShortLeave, ShortReturn, LongLeave, LongReturn, Departure };
enum class Season { Spring, Summer, Fall, Winter };
enum class Blinds { Up, Down };

inline constexpr int kEventTypeCount = 7;
inline constexpr int kSeasonCount = 4;

const char* to_string(LeaveStatus v);
const char* to_string(EventType v);
const char* to_string(Season v);
const char* to_string(Blinds v);
LeaveStatus leave_from_string(const std::string& s);
EventType event_from_string(const std::string& s);
Season season_from_string(const std::string& s);
Blinds blinds_from_string(const std::string& s);

// One occupant-context snapshot.
struct ContextVector {
    double work_lux = 0.0;
    double outdoor_lux = 0.0;
    bool occupancy = false;
    LeaveStatus leave = LeaveStatus::None;
    EventType event = EventType::Initial;
    Season season = Season::Spring;
    double time_of_day = 0.0;  // hours in [0,24)
    Blinds blinds = Blinds::Up;
    bool lights_on = false;

    void validate() const;  // throws std::invalid_argument
};

// Switch-on probability curve over work-area illuminance:
//   p(E) = a + c / (1 + exp(b * (log10(E) - m)))
struct HuntModel {
    double a = 0.0;  // baseline probability
    double c = 1.0;  // range
    double b = 1.0;  // slope, > 0
    double m = 2.0;  // midpoint in log10-lux

    void validate() const;
    static HuntModel from_config(const Config& cfg);
};

double hunt_probability(const HuntModel& model, double work_lux);

// Performance target: p(E) = Phi(beta0 + beta1 * log10(E))
struct ProbitTarget {
    double beta0 = 0.0;
    double beta1 = 0.0;

    void validate() const;
    static ProbitTarget from_config(const Config& cfg);
};

double probit_probability(const ProbitTarget& model, double work_lux);

// Hidden simulator truth: logistic response over the full context.
// Illuminances enter as log10(1 + E) so the model is defined at 0 lux.
struct GroundTruthScm {
    double intercept = 0.0;
    double w_log_work = 0.0;
    double w_log_outdoor = 0.0;
    double w_occupancy = 0.0;
    double w_leave_short = 0.0;
    double w_leave_long = 0.0;
    std::array<double, kEventTypeCount> w_event{};  // by EventType order
    std::uint64_t seed_salt = 0;

    static GroundTruthScm from_config(const Config& cfg);
};

double scm_probability(const GroundTruthScm& model, const ContextVector& context);

// ---------------------------------------------------------------------------
// Design variables

struct VarDomain {
    enum class Kind { Interval, FiniteSet };
    Kind kind = Kind::Interval;
    double lo = 0.0, hi = 1.0;        // Interval
    std::vector<std::string> labels;  // FiniteSet

    void validate() const;
};

struct DistributionSpec {
    enum class Kind { Point, Uniform, Categorical };
    Kind kind = Kind::Point;
    double point = 0.0;
    double lo = 0.0, hi = 1.0;
    std::vector<std::pair<std::string, double>> categories;  // label -> probability

    // Parse descriptors like "point 0.5", "uniform 0 1",
    // "categorical up:0.5 down:0.5".
    static DistributionSpec parse(const std::string& text);
};

using AssignedValue = std::variant<double, std::string>;
using Assignment = std::map<std::string, AssignedValue>;

struct DesignVariable {
    std::string name;
    VarDomain domain;
    DistributionSpec distribution;

    void validate() const;  // support must lie inside the domain
};

struct CphsDesign {
    std::vector<DesignVariable> variables;

    void validate() const;  // unique names, each variable valid
    static CphsDesign from_config(const Config& cfg);  // [design.variables.*]
};

Assignment sample_design(const CphsDesign& design, std::uint64_t seed);

// Named scalar evaluator over an assignment plus its target value.
struct DesignSpecification {
    enum class Evaluator { Constant, Linear };
    Evaluator evaluator = Evaluator::Constant;
    double constant = 0.0;
    double bias = 0.0;
    std::vector<std::pair<std::string, double>> weights;  // Linear: sum w_i * x_i + bias
    double target_value = 0.0;

    static DesignSpecification from_config(const Config& cfg);  // [design.specification]
};

double evaluate_specification(const DesignSpecification& spec, const Assignment& assignment);

// ---------------------------------------------------------------------------
// Context predicates: a conjunction of per-field constraints. Unset fields
// are unconstrained. Construction validates that each constraint is
// individually satisfiable, which over the product context space makes the
// conjunction satisfiable.

struct ValueRange {
    double lo;
    double hi;
};

struct ContextPredicate {
    std::optional<ValueRange> work_lux;
    std::optional<ValueRange> outdoor_lux;
    std::optional<ValueRange> time_of_day;
    std::optional<std::set<Season>> seasons;
    std::optional<std::set<EventType>> events;
    std::optional<std::set<LeaveStatus>> leaves;
    std::optional<std::set<Blinds>> blinds;
    std::optional<bool> occupancy;
    std::optional<bool> lights_on;

    void validate() const;
    bool matches(const ContextVector& c) const;

    static ContextPredicate everything();
};

}  // namespace cphs::domain
