#include "cphs/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cphs/rng.hpp"
#include "cphs/stats.hpp"

namespace cphs::domain {

const char* to_string(LeaveStatus v) {
    switch (v) {
        case LeaveStatus::None: return "none";
        case LeaveStatus::Short: return "short";
        case LeaveStatus::Long: return "long";
    }
    throw std::invalid_argument("bad LeaveStatus");
}

const char* to_string(EventType v) {
    switch (v) {
        case EventType::Initial: return "initial";
        case EventType::Arrival: return "arrival";
        case EventType::ShortLeave: return "short_leave";
        case EventType::ShortReturn: return "short_return";
        case EventType::LongLeave: return "long_leave";
        case EventType::LongReturn: return "long_return";
        case EventType::Departure: return "departure";
    }
    throw std::invalid_argument("bad EventType");
}

const char* to_string(Season v) {
    switch (v) {
        case Season::Spring: return "spring";
        case Season::Summer: return "summer";
        case Season::Fall: return "fall";
        case Season::Winter: return "winter";
    }
    throw std::invalid_argument("bad Season");
}

const char* to_string(Blinds v) {
    switch (v) {
        case Blinds::Up: return "up";
        case Blinds::Down: return "down";
    }
    throw std::invalid_argument("bad Blinds");
}

namespace {
[[noreturn]] void bad_enum(const std::string& what, const std::string& s) {
    throw std::invalid_argument("unknown " + what + " value '" + s + "'");
}
}  // namespace

LeaveStatus leave_from_string(const std::string& s) {
    if (s == "none") return LeaveStatus::None;
    if (s == "short") return LeaveStatus::Short;
    if (s == "long") return LeaveStatus::Long;
    bad_enum("leave_status", s);
}

EventType event_from_string(const std::string& s) {
    for (int i = 0; i < kEventTypeCount; ++i)
        if (s == to_string(static_cast<EventType>(i))) return static_cast<EventType>(i);
    bad_enum("event_type", s);
}

Season season_from_string(const std::string& s) {
    for (int i = 0; i < kSeasonCount; ++i)
        if (s == to_string(static_cast<Season>(i))) return static_cast<Season>(i);
    bad_enum("season", s);
}

Blinds blinds_from_string(const std::string& s) {
    if (s == "up") return Blinds::Up;
    if (s == "down") return Blinds::Down;
    bad_enum("blinds", s);
}

void ContextVector::validate() const {
    if (!std::isfinite(work_lux) || work_lux < 0.0)
        throw std::invalid_argument("ContextVector: work_lux must be finite and >= 0");
    if (!std::isfinite(outdoor_lux) || outdoor_lux < 0.0)
        throw std::invalid_argument("ContextVector: outdoor_lux must be finite and >= 0");
    if (!(time_of_day >= 0.0 && time_of_day < 24.0))
        throw std::invalid_argument("ContextVector: time_of_day must be in [0,24)");
    int e = static_cast<int>(event);
    if (e < 0 || e >= kEventTypeCount) throw std::invalid_argument("ContextVector: bad event_type");
    int s = static_cast<int>(season);
    if (s < 0 || s >= kSeasonCount) throw std::invalid_argument("ContextVector: bad season");
}

void HuntModel::validate() const {
    if (!(a >= 0.0)) throw std::invalid_argument("HuntModel: a must be >= 0");
    if (!(a + c <= 1.0)) throw std::invalid_argument("HuntModel: a + c must be <= 1");
    if (!(b > 0.0)) throw std::invalid_argument("HuntModel: b must be > 0");
    if (!std::isfinite(m)) throw std::invalid_argument("HuntModel: m must be finite");
}

HuntModel HuntModel::from_config(const Config& cfg) {
    HuntModel h;
    h.a = cfg.get_double("hunt", "a");
    h.c = cfg.get_double("hunt", "c");
    h.b = cfg.get_double("hunt", "b");
    h.m = cfg.get_double("hunt", "m");
    h.validate();
    return h;
}

double hunt_probability(const HuntModel& model, double work_lux) {
    if (!(work_lux > 0.0)) throw std::domain_error("hunt_probability: work_lux must be > 0");
    double p = model.a + model.c / (1.0 + std::exp(model.b * (std::log10(work_lux) - model.m)));
    return std::clamp(p, 0.0, 1.0);
}

void ProbitTarget::validate() const {
    if (!std::isfinite(beta0) || !std::isfinite(beta1))
        throw std::invalid_argument("ProbitTarget: coefficients must be finite");
}

ProbitTarget ProbitTarget::from_config(const Config& cfg) {
    ProbitTarget t;
    t.beta0 = cfg.get_double("probit_target", "beta0");
    t.beta1 = cfg.get_double("probit_target", "beta1");
    t.validate();
    return t;
}

double probit_probability(const ProbitTarget& model, double work_lux) {
    if (!(work_lux > 0.0)) throw std::domain_error("probit_probability: work_lux must be > 0");
    return stats::normal_cdf(model.beta0 + model.beta1 * std::log10(work_lux));
}

GroundTruthScm GroundTruthScm::from_config(const Config& cfg) {
    GroundTruthScm g;
    g.intercept = cfg.get_double("scm", "intercept");
    g.w_log_work = cfg.get_double("scm", "w_log_work");
    g.w_log_outdoor = cfg.get_double("scm", "w_log_outdoor");
    g.w_occupancy = cfg.get_double("scm", "w_occupancy");
    g.w_leave_short = cfg.get_double("scm", "w_leave_short");
    g.w_leave_long = cfg.get_double("scm", "w_leave_long");
    for (int i = 0; i < kEventTypeCount; ++i) {
        std::string key = std::string("w_event_") + to_string(static_cast<EventType>(i));
        g.w_event[static_cast<std::size_t>(i)] = cfg.get_double("scm", key, 0.0);
    }
    g.seed_salt = cfg.get_u64("scm", "seed_salt", 0);
    return g;
}

double scm_probability(const GroundTruthScm& model, const ContextVector& context) {
    context.validate();
    double z = model.intercept;
    z += model.w_log_work * std::log10(1.0 + context.work_lux);
    z += model.w_log_outdoor * std::log10(1.0 + context.outdoor_lux);
    z += model.w_occupancy * (context.occupancy ? 1.0 : 0.0);
    if (context.leave == LeaveStatus::Short) z += model.w_leave_short;
    if (context.leave == LeaveStatus::Long) z += model.w_leave_long;
    z += model.w_event[static_cast<std::size_t>(context.event)];
    return 1.0 / (1.0 + std::exp(-z));
}

// ---------------------------------------------------------------------------

void VarDomain::validate() const {
    if (kind == Kind::Interval) {
        if (!(lo < hi)) throw std::invalid_argument("VarDomain: interval requires lo < hi");
    } else {
        if (labels.empty()) throw std::invalid_argument("VarDomain: finite set must be non-empty");
        std::set<std::string> seen(labels.begin(), labels.end());
        if (seen.size() != labels.size()) throw std::invalid_argument("VarDomain: duplicate labels");
    }
}

DistributionSpec DistributionSpec::parse(const std::string& text) {
    std::istringstream in(text);
    std::string kind;
    in >> kind;
    DistributionSpec d;
    if (kind == "point") {
        d.kind = Kind::Point;
        if (!(in >> d.point)) throw std::invalid_argument("distribution: point requires a value");
    } else if (kind == "uniform") {
        d.kind = Kind::Uniform;
        if (!(in >> d.lo >> d.hi)) throw std::invalid_argument("distribution: uniform requires lo hi");
        if (!(d.lo < d.hi)) throw std::invalid_argument("distribution: uniform requires lo < hi");
    } else if (kind == "categorical") {
        d.kind = Kind::Categorical;
        std::string item;
        double total = 0.0;
        while (in >> item) {
            auto colon = item.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("distribution: categorical items are label:prob");
            std::string label = item.substr(0, colon);
            double p = std::stod(item.substr(colon + 1));
            if (!(p > 0.0)) throw std::invalid_argument("distribution: categorical probabilities must be > 0");
            d.categories.emplace_back(label, p);
            total += p;
        }
        if (d.categories.empty()) throw std::invalid_argument("distribution: categorical requires items");
        if (std::fabs(total - 1.0) > 1e-9)
            throw std::invalid_argument("distribution: categorical probabilities must sum to 1");
    } else {
        throw std::invalid_argument("distribution: unknown kind '" + kind + "'");
    }
    return d;
}

void DesignVariable::validate() const {
    if (name.empty()) throw std::invalid_argument("DesignVariable: empty name");
    domain.validate();
    switch (distribution.kind) {
        case DistributionSpec::Kind::Point:
            if (domain.kind != VarDomain::Kind::Interval)
                throw std::invalid_argument("DesignVariable " + name + ": point distribution needs interval domain");
            if (distribution.point < domain.lo || distribution.point > domain.hi)
                throw std::invalid_argument("DesignVariable " + name + ": point outside domain");
            break;
        case DistributionSpec::Kind::Uniform:
            if (domain.kind != VarDomain::Kind::Interval)
                throw std::invalid_argument("DesignVariable " + name + ": uniform distribution needs interval domain");
            if (distribution.lo < domain.lo || distribution.hi > domain.hi)
                throw std::invalid_argument("DesignVariable " + name + ": uniform support outside domain");
            break;
        case DistributionSpec::Kind::Categorical: {
            if (domain.kind != VarDomain::Kind::FiniteSet)
                throw std::invalid_argument("DesignVariable " + name + ": categorical needs finite-set domain");
            std::set<std::string> allowed(domain.labels.begin(), domain.labels.end());
            for (const auto& [label, p] : distribution.categories)
                if (!allowed.count(label))
                    throw std::invalid_argument("DesignVariable " + name + ": label '" + label + "' outside domain");
            break;
        }
    }
}

void CphsDesign::validate() const {
    std::set<std::string> names;
    for (const auto& v : variables) {
        v.validate();
        if (!names.insert(v.name).second)
            throw std::invalid_argument("CphsDesign: duplicate variable name '" + v.name + "'");
    }
}

CphsDesign CphsDesign::from_config(const Config& cfg) {
    CphsDesign design;
    const std::string prefix = "design.variables.";
    for (const auto& section : cfg.sections_with_prefix(prefix)) {
        DesignVariable var;
        var.name = section.substr(prefix.size());
        std::string dom = cfg.get(section, "domain");
        std::istringstream in(dom);
        std::string kind;
        in >> kind;
        if (kind == "interval") {
            var.domain.kind = VarDomain::Kind::Interval;
            if (!(in >> var.domain.lo >> var.domain.hi))
                throw std::invalid_argument("domain: interval requires lo hi");
        } else if (kind == "set") {
            var.domain.kind = VarDomain::Kind::FiniteSet;
            std::string label;
            while (in >> label) var.domain.labels.push_back(label);
        } else {
            throw std::invalid_argument("domain: unknown kind '" + kind + "'");
        }
        var.distribution = DistributionSpec::parse(cfg.get(section, "distribution"));
        design.variables.push_back(std::move(var));
    }
    design.validate();
    return design;
}

Assignment sample_design(const CphsDesign& design, std::uint64_t seed) {
    design.validate();
    Assignment out;
    Rng rng(seed);
    for (const auto& var : design.variables) {
        switch (var.distribution.kind) {
            case DistributionSpec::Kind::Point:
                out[var.name] = var.distribution.point;
                break;
            case DistributionSpec::Kind::Uniform:
                out[var.name] = rng.uniform(var.distribution.lo, var.distribution.hi);
                break;
            case DistributionSpec::Kind::Categorical: {
                double u = rng.uniform();
                double acc = 0.0;
                std::string chosen = var.distribution.categories.back().first;
                for (const auto& [label, p] : var.distribution.categories) {
                    acc += p;
                    if (u < acc) {
                        chosen = label;
                        break;
                    }
                }
                out[var.name] = chosen;
                break;
            }
        }
    }
    return out;
}

DesignSpecification DesignSpecification::from_config(const Config& cfg) {
    DesignSpecification spec;
    std::string kind = cfg.get("design.specification", "evaluator");
    if (kind == "constant") {
        spec.evaluator = Evaluator::Constant;
        spec.constant = cfg.get_double("design.specification", "value");
    } else if (kind == "linear") {
        spec.evaluator = Evaluator::Linear;
        spec.bias = cfg.get_double("design.specification", "bias", 0.0);
        for (const auto& item : cfg.get_list("design.specification", "weights")) {
            auto colon = item.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("specification weights are name:weight");
            spec.weights.emplace_back(trim(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        }
    } else {
        throw std::invalid_argument("specification: unknown evaluator '" + kind + "'");
    }
    spec.target_value = cfg.get_double("design.specification", "target", 0.0);
    return spec;
}

double evaluate_specification(const DesignSpecification& spec, const Assignment& assignment) {
    if (spec.evaluator == DesignSpecification::Evaluator::Constant) return spec.constant;
    double total = spec.bias;
    for (const auto& [name, weight] : spec.weights) {
        auto it = assignment.find(name);
        if (it == assignment.end())
            throw std::invalid_argument("evaluate_specification: assignment is missing variable '" + name + "'");
        const double* value = std::get_if<double>(&it->second);
        if (!value)
            throw std::invalid_argument("evaluate_specification: variable '" + name + "' is not numeric");
        total += weight * *value;
    }
    return total;
}

// ---------------------------------------------------------------------------

void ContextPredicate::validate() const {
    auto check_range = [](const std::optional<ValueRange>& r, const char* field) {
        if (r && !(r->lo <= r->hi))
            throw std::invalid_argument(std::string("ContextPredicate: empty range for ") + field);
    };
    check_range(work_lux, "work_lux");
    check_range(outdoor_lux, "outdoor_lux");
    check_range(time_of_day, "time_of_day");
    if (seasons && seasons->empty()) throw std::invalid_argument("ContextPredicate: empty season set");
    if (events && events->empty()) throw std::invalid_argument("ContextPredicate: empty event set");
    if (leaves && leaves->empty()) throw std::invalid_argument("ContextPredicate: empty leave set");
    if (blinds && blinds->empty()) throw std::invalid_argument("ContextPredicate: empty blinds set");
}

bool ContextPredicate::matches(const ContextVector& c) const {
    auto in_range = [](const std::optional<ValueRange>& r, double v) {
        return !r || (v >= r->lo && v <= r->hi);
    };
    if (!in_range(work_lux, c.work_lux)) return false;
    if (!in_range(outdoor_lux, c.outdoor_lux)) return false;
    if (!in_range(time_of_day, c.time_of_day)) return false;
    if (seasons && !seasons->count(c.season)) return false;
    if (events && !events->count(c.event)) return false;
    if (leaves && !leaves->count(c.leave)) return false;
    if (blinds && !blinds->count(c.blinds)) return false;
    if (occupancy && *occupancy != c.occupancy) return false;
    if (lights_on && *lights_on != c.lights_on) return false;
    return true;
}

ContextPredicate ContextPredicate::everything() { return ContextPredicate{}; }

}  // namespace cphs::domain
