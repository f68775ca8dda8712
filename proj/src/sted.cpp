#include "cphs/sted.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cphs/metrics.hpp"
#include "cphs/text.hpp"

namespace cphs::sted {

const char* to_string(Scenario v) {
    switch (v) {
        case Scenario::NoArtificial: return "no_artificial";
        case Scenario::PossibleArtificial: return "possible_artificial";
        case Scenario::Artificial: return "artificial";
    }
    throw std::invalid_argument("bad Scenario");
}

const char* to_string(Channel v) {
    switch (v) {
        case Channel::Ive: return "ive";
        case Channel::Physical: return "physical";
    }
    throw std::invalid_argument("bad Channel");
}

const char* to_string(Action v) {
    switch (v) {
        case Action::SwitchOn: return "switch_on";
        case Action::SwitchOff: return "switch_off";
        case Action::NoAction: return "no_action";
    }
    throw std::invalid_argument("bad Action");
}

Scenario scenario_from_string(const std::string& s) {
    if (s == "no_artificial") return Scenario::NoArtificial;
    if (s == "possible_artificial") return Scenario::PossibleArtificial;
    if (s == "artificial") return Scenario::Artificial;
    throw std::invalid_argument("unknown scenario '" + s + "'");
}

Channel channel_from_string(const std::string& s) {
    if (s == "ive") return Channel::Ive;
    if (s == "physical") return Channel::Physical;
    throw std::invalid_argument("unknown channel '" + s + "'");
}

Action action_from_string(const std::string& s) {
    if (s == "switch_on") return Action::SwitchOn;
    if (s == "switch_off") return Action::SwitchOff;
    if (s == "no_action") return Action::NoAction;
    throw std::invalid_argument("unknown action '" + s + "'");
}

std::array<std::size_t, domain::kEventTypeCount> StedSchedule::event_counts() const {
    std::array<std::size_t, domain::kEventTypeCount> counts{};
    for (const auto& slot : slots) counts[static_cast<std::size_t>(slot.context.event)]++;
    return counts;
}

std::array<std::size_t, domain::kSeasonCount> StedSchedule::season_counts() const {
    std::array<std::size_t, domain::kSeasonCount> counts{};
    for (const auto& slot : slots) counts[static_cast<std::size_t>(slot.context.season)]++;
    return counts;
}

void ScheduleConfig::validate() const {
    long total = 0;
    for (int c : event_counts) {
        if (c < 0) throw std::invalid_argument("ScheduleConfig: negative event count");
        total += c;
    }
    if (total == 0) throw std::invalid_argument("ScheduleConfig: zero-total event breakdown");
    if (subjects < 1) throw std::invalid_argument("ScheduleConfig: subjects >= 1");
    if (!(jitter_sigma >= 0.0)) throw std::invalid_argument("ScheduleConfig: jitter_sigma >= 0");
    if (!(transfer_up >= 0.0 && transfer_down >= 0.0))
        throw std::invalid_argument("ScheduleConfig: transfer coefficients >= 0");
    if (!(ambient_lux > 0.0)) throw std::invalid_argument("ScheduleConfig: ambient_lux > 0");
    if (!(artificial_below <= no_artificial_above))
        throw std::invalid_argument("ScheduleConfig: scenario thresholds out of order");
}

ScheduleConfig ScheduleConfig::from_config(const Config& cfg) {
    ScheduleConfig sc;
    for (int i = 0; i < domain::kEventTypeCount; ++i) {
        auto name = domain::to_string(static_cast<domain::EventType>(i));
        sc.event_counts[static_cast<std::size_t>(i)] =
            static_cast<int>(cfg.get_int("schedule", name, sc.event_counts[static_cast<std::size_t>(i)]));
    }
    sc.subjects = static_cast<int>(cfg.get_int("schedule", "subjects", sc.subjects));
    sc.schedule_seed = cfg.get_u64("schedule", "schedule_seed", sc.schedule_seed);
    sc.jitter_sigma = cfg.get_double("schedule", "jitter_sigma", sc.jitter_sigma);
    sc.transfer_up = cfg.get_double("schedule", "transfer_up", sc.transfer_up);
    sc.transfer_down = cfg.get_double("schedule", "transfer_down", sc.transfer_down);
    sc.lamp_lux = cfg.get_double("schedule", "lamp_lux", sc.lamp_lux);
    sc.ambient_lux = cfg.get_double("schedule", "ambient_lux", sc.ambient_lux);
    const char* season_names[] = {"peak_spring", "peak_summer", "peak_fall", "peak_winter"};
    for (int i = 0; i < domain::kSeasonCount; ++i)
        sc.outdoor_peak[static_cast<std::size_t>(i)] =
            cfg.get_double("schedule", season_names[i], sc.outdoor_peak[static_cast<std::size_t>(i)]);
    sc.artificial_below = cfg.get_double("schedule", "artificial_below", sc.artificial_below);
    sc.no_artificial_above = cfg.get_double("schedule", "no_artificial_above", sc.no_artificial_above);
    sc.validate();
    return sc;
}

namespace {

struct EventProfile {
    bool occupancy;
    domain::LeaveStatus leave;
    std::vector<double> times;
};

const EventProfile& profile_for(domain::EventType type) {
    using domain::EventType;
    using domain::LeaveStatus;
    static const std::array<EventProfile, domain::kEventTypeCount> profiles = {{
        {false, LeaveStatus::None, {6.5, 7.0, 7.5}},     // initial
        {true, LeaveStatus::None, {8.0, 8.5, 9.0}},      // arrival
        {false, LeaveStatus::Short, {10.0, 14.0, 15.5}}, // short_leave
        {true, LeaveStatus::Short, {10.5, 14.5, 16.0}},  // short_return
        {false, LeaveStatus::Long, {11.5, 12.0}},        // long_leave
        {true, LeaveStatus::Long, {13.0, 13.5}},         // long_return
        {false, LeaveStatus::None, {17.0, 17.5, 18.5}},  // departure
    }};
    return profiles[static_cast<std::size_t>(type)];
}

struct Daylight {
    double sunrise;
    double sunset;
};

const Daylight& daylight_for(domain::Season season) {
    static const std::array<Daylight, domain::kSeasonCount> hours = {{
        {6.5, 18.5},  // spring
        {5.5, 20.0},  // summer
        {6.75, 18.0}, // fall
        {7.5, 17.0},  // winter
    }};
    return hours[static_cast<std::size_t>(season)];
}

double daylight_fraction(domain::Season season, double t) {
    const auto& d = daylight_for(season);
    if (t <= d.sunrise || t >= d.sunset) return 0.0;
    return std::sin(3.14159265358979323846 * (t - d.sunrise) / (d.sunset - d.sunrise));
}

}  // namespace

StedSchedule build_sted_schedule(const ScheduleConfig& config) {
    config.validate();
    StedSchedule schedule;
    Rng jitter(derive_seed(config.schedule_seed, 0, "schedule-illuminance"));
    int global = 0;
    for (int type_idx = 0; type_idx < domain::kEventTypeCount; ++type_idx) {
        auto type = static_cast<domain::EventType>(type_idx);
        const auto& profile = profile_for(type);
        int count = config.event_counts[static_cast<std::size_t>(type_idx)];
        for (int i = 0; i < count; ++i, ++global) {
            Slot slot;
            auto& ctx = slot.context;
            ctx.event = type;
            ctx.season = static_cast<domain::Season>(global % domain::kSeasonCount);
            ctx.occupancy = profile.occupancy;
            ctx.leave = profile.leave;
            ctx.time_of_day = profile.times[static_cast<std::size_t>(i) % profile.times.size()];

            // indoor configuration, shifted cycle so it does not alias with
            // the 4-periodic season assignment
            int cfg_idx = (i + i / 4) % 4;
            ctx.lights_on = cfg_idx >= 2;
            ctx.blinds = (cfg_idx % 2 == 0) ? domain::Blinds::Up : domain::Blinds::Down;

            double base = config.outdoor_peak[static_cast<std::size_t>(ctx.season)] *
                          daylight_fraction(ctx.season, ctx.time_of_day);
            double z = jitter.normal();  // drawn for every slot to keep streams aligned
            ctx.outdoor_lux = base > 0.0 ? base * std::exp(config.jitter_sigma * z) : 0.0;

            double transfer = ctx.blinds == domain::Blinds::Up ? config.transfer_up : config.transfer_down;
            ctx.work_lux = config.ambient_lux + transfer * ctx.outdoor_lux +
                           (ctx.lights_on ? config.lamp_lux : 0.0);

            if (ctx.outdoor_lux >= config.no_artificial_above)
                slot.scenario = Scenario::NoArtificial;
            else if (ctx.outdoor_lux <= config.artificial_below)
                slot.scenario = Scenario::Artificial;
            else
                slot.scenario = Scenario::PossibleArtificial;

            ctx.validate();
            schedule.slots.push_back(std::move(slot));
        }
    }
    return schedule;
}

std::vector<EventRecord> run_stated_choice(const StedSchedule& schedule, const BehaviorFn& model,
                                           Channel channel, std::uint64_t seed, int subjects) {
    if (schedule.slots.empty()) throw std::invalid_argument("run_stated_choice: empty schedule");
    if (subjects < 1) throw std::invalid_argument("run_stated_choice: subjects >= 1");
    std::vector<EventRecord> records;
    records.reserve(schedule.slots.size() * static_cast<std::size_t>(subjects));
    for (int subject = 0; subject < subjects; ++subject) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(subject), "stated-choice"));
        for (std::size_t k = 0; k < schedule.slots.size(); ++k) {
            const auto& ctx = schedule.slots[k].context;
            double p = model(ctx);
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument("run_stated_choice: model probability outside [0,1]");
            EventRecord rec;
            rec.subject_id = subject;
            rec.slot = static_cast<int>(k);
            rec.context = ctx;
            rec.channel = channel;
            bool act = rng.bernoulli(p);
            rec.action = act ? (ctx.lights_on ? Action::SwitchOff : Action::SwitchOn) : Action::NoAction;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

BehaviorFn AuxiliaryModel::behavior() const {
    auto m = model;
    return [m](const domain::ContextVector& ctx) { return domain::scm_probability(m, ctx); };
}

domain::ContextVector sample_context(Rng& rng) {
    domain::ContextVector ctx;
    ctx.work_lux = std::pow(10.0, rng.uniform(0.0, 3.3));
    ctx.outdoor_lux = std::pow(10.0, rng.uniform(0.0, 4.7));
    ctx.occupancy = rng.bernoulli(0.5);
    ctx.leave = static_cast<domain::LeaveStatus>(rng.below(3));
    ctx.event = static_cast<domain::EventType>(rng.below(domain::kEventTypeCount));
    ctx.season = static_cast<domain::Season>(rng.below(domain::kSeasonCount));
    ctx.time_of_day = rng.uniform(0.0, 24.0);
    ctx.blinds = rng.bernoulli(0.5) ? domain::Blinds::Down : domain::Blinds::Up;
    ctx.lights_on = rng.bernoulli(0.5);
    return ctx;
}

double profile_distance(const BehaviorFn& a, const BehaviorFn& b, std::uint64_t grid_seed,
                        int grid_points) {
    if (grid_points < 1) throw std::invalid_argument("profile_distance: grid_points >= 1");
    Rng rng(derive_seed(grid_seed, 0, "profile-grid"));
    std::vector<double> pa, pb;
    pa.reserve(static_cast<std::size_t>(grid_points));
    pb.reserve(static_cast<std::size_t>(grid_points));
    for (int i = 0; i < grid_points; ++i) {
        auto ctx = sample_context(rng);
        pa.push_back(a(ctx));
        pb.push_back(b(ctx));
    }
    return metrics::wasserstein1(metrics::EmpiricalDistribution::from_samples(std::move(pa)),
                                 metrics::EmpiricalDistribution::from_samples(std::move(pb)));
}

std::vector<AuxiliaryModel> perturb_ground_truth(const domain::GroundTruthScm& truth, double alpha,
                                                 int k, std::uint64_t seed, const PerturbConfig& opts) {
    if (!(alpha > 0.0)) throw std::invalid_argument("perturb_ground_truth: alpha > 0");
    if (k < 1) throw std::invalid_argument("perturb_ground_truth: k >= 1");
    auto truth_fn = [&truth](const domain::ContextVector& ctx) { return domain::scm_probability(truth, ctx); };

    std::vector<AuxiliaryModel> out;
    for (int j = 0; j < k; ++j) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j), "perturb-model"));
        double best_distance = std::numeric_limits<double>::max();
        bool accepted = false;
        for (int attempt = 0; attempt < opts.max_rejections && !accepted; ++attempt) {
            domain::GroundTruthScm cand = truth;
            cand.intercept += rng.uniform(-opts.scale, opts.scale);
            cand.w_log_work += rng.uniform(-opts.scale, opts.scale);
            cand.w_log_outdoor += rng.uniform(-opts.scale, opts.scale);
            cand.w_occupancy += rng.uniform(-opts.scale, opts.scale);
            cand.w_leave_short += rng.uniform(-opts.scale, opts.scale);
            cand.w_leave_long += rng.uniform(-opts.scale, opts.scale);
            auto cand_fn = [cand](const domain::ContextVector& ctx) {
                return domain::scm_probability(cand, ctx);
            };
            double d = profile_distance(truth_fn, cand_fn, opts.grid_seed, opts.grid_points);
            best_distance = std::min(best_distance, d);
            if (d <= alpha) {
                out.push_back(AuxiliaryModel{cand, alpha, d});
                accepted = true;
            }
        }
        if (!accepted)
            throw std::runtime_error("perturb_ground_truth: could not satisfy alpha=" +
                                     fmt_double(alpha) + " after " + std::to_string(opts.max_rejections) +
                                     " draws (best achieved " + fmt_double(best_distance) + ")");
    }
    return out;
}

std::pair<std::vector<EventRecord>, CoverageReport> restricted_sample(
    const StedSchedule& schedule, const BehaviorFn& model, const domain::ContextPredicate& phi,
    const domain::ContextPredicate& phi_approx, Channel channel, std::uint64_t seed) {
    phi.validate();
    phi_approx.validate();
    StedSchedule filtered;
    std::vector<int> original_slots;
    std::size_t overlap = 0;
    for (std::size_t k = 0; k < schedule.slots.size(); ++k) {
        if (!phi_approx.matches(schedule.slots[k].context)) continue;
        filtered.slots.push_back(schedule.slots[k]);
        original_slots.push_back(static_cast<int>(k));
        if (phi.matches(schedule.slots[k].context)) ++overlap;
    }
    if (filtered.slots.empty())
        throw std::runtime_error("restricted_sample: approximating predicate matches no slot");

    auto records = run_stated_choice(filtered, model, channel, seed);
    for (auto& rec : records) rec.slot = original_slots[static_cast<std::size_t>(rec.slot)];

    CoverageReport report;
    report.selected = filtered.slots.size();
    report.overlap_fraction = static_cast<double>(overlap) / static_cast<double>(filtered.slots.size());
    return {std::move(records), report};
}

void write_dataset_csv(std::ostream& out, const StedSchedule& schedule,
                       const std::vector<EventRecord>& records) {
    out << "subject_id,slot,channel,event_type,season,scenario,time_of_day,work_lux,outdoor_lux,"
           "occupancy,leave_status,blinds,lights_on_before,action\n";
    for (const auto& rec : records) {
        if (rec.slot < 0 || static_cast<std::size_t>(rec.slot) >= schedule.slots.size())
            throw std::invalid_argument("write_dataset_csv: record slot outside schedule");
        const auto& ctx = rec.context;
        out << rec.subject_id << ',' << rec.slot << ',' << to_string(rec.channel) << ','
            << domain::to_string(ctx.event) << ',' << domain::to_string(ctx.season) << ','
            << to_string(schedule.slots[static_cast<std::size_t>(rec.slot)].scenario) << ','
            << fmt_double(ctx.time_of_day) << ',' << fmt_double(ctx.work_lux) << ','
            << fmt_double(ctx.outdoor_lux) << ',' << (ctx.occupancy ? "true" : "false") << ','
            << domain::to_string(ctx.leave) << ',' << domain::to_string(ctx.blinds) << ','
            << (ctx.lights_on ? "true" : "false") << ',' << to_string(rec.action) << '\n';
    }
}

DatasetFile read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("dataset csv: missing header");
    const std::string expected =
        "subject_id,slot,channel,event_type,season,scenario,time_of_day,work_lux,outdoor_lux,"
        "occupancy,leave_status,blinds,lights_on_before,action";
    if (trim(line) != expected) throw std::runtime_error("dataset csv: bad header");
    DatasetFile file;
    auto parse_bool = [](const std::string& s) {
        if (s == "true") return true;
        if (s == "false") return false;
        throw std::runtime_error("dataset csv: bad boolean '" + s + "'");
    };
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 14) throw std::runtime_error("dataset csv: expected 14 columns");
        EventRecord rec;
        rec.subject_id = std::stoi(f[0]);
        rec.slot = std::stoi(f[1]);
        rec.channel = channel_from_string(f[2]);
        rec.context.event = domain::event_from_string(f[3]);
        rec.context.season = domain::season_from_string(f[4]);
        file.scenarios.push_back(scenario_from_string(f[5]));
        rec.context.time_of_day = std::stod(f[6]);
        rec.context.work_lux = std::stod(f[7]);
        rec.context.outdoor_lux = std::stod(f[8]);
        rec.context.occupancy = parse_bool(f[9]);
        rec.context.leave = domain::leave_from_string(f[10]);
        rec.context.blinds = domain::blinds_from_string(f[11]);
        rec.context.lights_on = parse_bool(f[12]);
        rec.action = action_from_string(f[13]);
        file.records.push_back(std::move(rec));
    }
    return file;
}

}  // namespace cphs::sted
