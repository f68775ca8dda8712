#include <doctest.h>

#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "cphs/config.hpp"
#include "cphs/rng.hpp"
#include "cphs/sted.hpp"
#include "cphs/stats.hpp"

using namespace cphs;
using namespace cphs::sted;

namespace {
bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

domain::GroundTruthScm small_truth() {
    domain::GroundTruthScm scm;
    scm.intercept = 3.0;
    scm.w_log_work = -1.6;
    scm.w_occupancy = 1.0;
    return scm;
}
}  // namespace

TEST_CASE("schedule carries the reference event plan") {
    StedSchedule s = build_sted_schedule(ScheduleConfig{});
    CHECK(s.slots.size() == 180);
    CHECK(s.event_counts() == std::array<std::size_t, 7>{36, 36, 18, 18, 18, 18, 36});
    CHECK(s.season_counts() == std::array<std::size_t, 4>{45, 45, 45, 45});
}

TEST_CASE("schedule contexts are valid and scenario tags follow outdoor light") {
    ScheduleConfig cfg;
    StedSchedule s = build_sted_schedule(cfg);
    for (const auto& slot : s.slots) {
        CHECK_NOTHROW(slot.context.validate());
        CHECK(slot.context.work_lux >= cfg.ambient_lux);
        if (slot.context.outdoor_lux >= cfg.no_artificial_above)
            CHECK(slot.scenario == Scenario::NoArtificial);
        else if (slot.context.outdoor_lux <= cfg.artificial_below)
            CHECK(slot.scenario == Scenario::Artificial);
        else
            CHECK(slot.scenario == Scenario::PossibleArtificial);
    }
}

TEST_CASE("indoor configuration cycle starts as specified") {
    StedSchedule s = build_sted_schedule(ScheduleConfig{});
    // (i + i/4) % 4 for i = 0..3 -> configurations 0,1,2,3
    CHECK(s.slots[0].context.lights_on == false);
    CHECK(s.slots[0].context.blinds == domain::Blinds::Up);
    CHECK(s.slots[1].context.lights_on == false);
    CHECK(s.slots[1].context.blinds == domain::Blinds::Down);
    CHECK(s.slots[2].context.lights_on == true);
    CHECK(s.slots[2].context.blinds == domain::Blinds::Up);
    CHECK(s.slots[3].context.lights_on == true);
    CHECK(s.slots[3].context.blinds == domain::Blinds::Down);
    // season follows the global slot index
    for (int i = 0; i < 8; ++i)
        CHECK(s.slots[static_cast<std::size_t>(i)].context.season ==
              static_cast<domain::Season>(i % 4));
}

TEST_CASE("work illuminance composes ambient, daylight transfer and lamps") {
    ScheduleConfig cfg;
    StedSchedule s = build_sted_schedule(cfg);
    for (const auto& slot : s.slots) {
        const auto& c = slot.context;
        double transfer = c.blinds == domain::Blinds::Up ? cfg.transfer_up : cfg.transfer_down;
        double want = cfg.ambient_lux + transfer * c.outdoor_lux + (c.lights_on ? cfg.lamp_lux : 0.0);
        CHECK(near(c.work_lux, want, 1e-9 * want));
    }
}

TEST_CASE("schedules are deterministic in the schedule seed") {
    ScheduleConfig cfg;
    StedSchedule a = build_sted_schedule(cfg);
    StedSchedule b = build_sted_schedule(cfg);
    REQUIRE(a.slots.size() == b.slots.size());
    bool same = true;
    for (std::size_t i = 0; i < a.slots.size(); ++i)
        same = same && a.slots[i].context.outdoor_lux == b.slots[i].context.outdoor_lux;
    CHECK(same);

    cfg.schedule_seed = 99;
    StedSchedule c = build_sted_schedule(cfg);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.slots.size(); ++i)
        any_diff = any_diff || a.slots[i].context.outdoor_lux != c.slots[i].context.outdoor_lux;
    CHECK(any_diff);
}

TEST_CASE("stated choice maps hits onto the legal switch") {
    StedSchedule s = build_sted_schedule(ScheduleConfig{});
    auto always = [](const domain::ContextVector&) { return 1.0; };
    auto never = [](const domain::ContextVector&) { return 0.0; };

    auto hits = run_stated_choice(s, always, Channel::Ive, 1);
    REQUIRE(hits.size() == s.slots.size());
    for (const auto& r : hits) {
        CHECK(r.channel == Channel::Ive);
        if (r.context.lights_on)
            CHECK(r.action == Action::SwitchOff);
        else
            CHECK(r.action == Action::SwitchOn);
    }

    auto misses = run_stated_choice(s, never, Channel::Physical, 1);
    for (const auto& r : misses) CHECK(r.action == Action::NoAction);
}

TEST_CASE("stated choice is seeded per subject") {
    StedSchedule s = build_sted_schedule(ScheduleConfig{});
    auto truth = small_truth();
    auto model = [&truth](const domain::ContextVector& c) { return domain::scm_probability(truth, c); };

    auto a = run_stated_choice(s, model, Channel::Ive, 7, 3);
    auto b = run_stated_choice(s, model, Channel::Ive, 7, 3);
    REQUIRE(a.size() == 3 * s.slots.size());
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i)
        same = same && a[i].action == b[i].action && a[i].subject_id == b[i].subject_id;
    CHECK(same);

    auto c = run_stated_choice(s, model, Channel::Ive, 8, 3);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) any_diff = any_diff || a[i].action != c[i].action;
    CHECK(any_diff);

    // subjects see the same contexts but draw independent responses
    bool subject_diff = false;
    for (std::size_t i = 0; i < s.slots.size(); ++i)
        subject_diff = subject_diff || a[i].action != a[i + s.slots.size()].action;
    CHECK(subject_diff);
}

TEST_CASE("empirical hit rate tracks the model probability") {
    ScheduleConfig cfg;
    cfg.subjects = 30;
    StedSchedule s = build_sted_schedule(cfg);
    auto flat = [](const domain::ContextVector&) { return 0.3; };
    auto records = run_stated_choice(s, flat, Channel::Ive, 5, cfg.subjects);
    double hits = 0;
    for (const auto& r : records) hits += r.action != Action::NoAction ? 1 : 0;
    double rate = hits / static_cast<double>(records.size());
    CHECK(rate > 0.27);  // 5400 draws, sd ~ 0.006
    CHECK(rate < 0.33);
}

TEST_CASE("profile distance is a metric on response profiles") {
    auto p3 = [](const domain::ContextVector&) { return 0.3; };
    auto p4 = [](const domain::ContextVector&) { return 0.4; };
    CHECK(profile_distance(p3, p3, 42) == 0.0);
    CHECK(near(profile_distance(p3, p4, 42), 0.1, 1e-12));
    CHECK(near(profile_distance(p3, p4, 42), profile_distance(p4, p3, 42), 1e-15));
}

TEST_CASE("sampled contexts are valid") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) CHECK_NOTHROW(sample_context(rng).validate());
}

TEST_CASE("auxiliary models stay within their declared radius") {
    auto truth = small_truth();
    const double alpha = 0.1;
    auto axs = perturb_ground_truth(truth, alpha, 3, 11);
    REQUIRE(axs.size() == 3);
    auto truth_fn = [&truth](const domain::ContextVector& c) { return domain::scm_probability(truth, c); };
    for (const auto& aux : axs) {
        CHECK(aux.radius == alpha);
        CHECK(aux.measured_distance <= alpha);
        // independent re-measure on a fresh context grid; allow 3 sigma of
        // Monte-Carlo error around the declared radius
        std::vector<double> re;
        for (std::uint64_t g = 1; g <= 8; ++g)
            re.push_back(profile_distance(truth_fn, aux.behavior(), g, 256));
        double m = stats::mean(re.data(), re.size());
        double sd = std::sqrt(stats::variance(re.data(), re.size()));
        CHECK(m <= alpha + 3.0 * sd / std::sqrt(8.0) + 1e-9);
    }

    auto again = perturb_ground_truth(truth, alpha, 3, 11);
    for (std::size_t i = 0; i < axs.size(); ++i)
        CHECK(axs[i].measured_distance == again[i].measured_distance);
}

TEST_CASE("restricted sampling reports predicate coverage") {
    StedSchedule s = build_sted_schedule(ScheduleConfig{});
    domain::ContextPredicate phi;
    phi.occupancy = true;
    domain::ContextPredicate approx;
    approx.events = std::set<domain::EventType>{domain::EventType::Arrival, domain::EventType::ShortReturn,
                                                domain::EventType::LongReturn, domain::EventType::Departure};

    auto always = [](const domain::ContextVector&) { return 1.0; };
    auto [records, coverage] = restricted_sample(s, always, phi, approx, Channel::Ive, 9);

    std::size_t expect_selected = 0, overlap = 0;
    for (const auto& slot : s.slots) {
        if (!approx.matches(slot.context)) continue;
        ++expect_selected;
        if (phi.matches(slot.context)) ++overlap;
    }
    CHECK(records.size() == expect_selected);
    CHECK(coverage.selected == expect_selected);
    CHECK(near(coverage.overlap_fraction,
               static_cast<double>(overlap) / static_cast<double>(expect_selected), 1e-15));
    for (const auto& r : records) CHECK(approx.matches(r.context));
}

TEST_CASE("dataset csv round-trips records") {
    ScheduleConfig cfg;
    cfg.subjects = 2;
    StedSchedule s = build_sted_schedule(cfg);
    auto truth = small_truth();
    auto model = [&truth](const domain::ContextVector& c) { return domain::scm_probability(truth, c); };
    auto records = run_stated_choice(s, model, Channel::Ive, 4, cfg.subjects);

    std::ostringstream os;
    write_dataset_csv(os, s, records);
    std::istringstream is(os.str());
    DatasetFile back = read_dataset_csv(is);
    REQUIRE(back.records.size() == records.size());
    REQUIRE(back.scenarios.size() == records.size());
    bool same = true;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& x = records[i];
        const auto& y = back.records[i];
        same = same && x.subject_id == y.subject_id && x.slot == y.slot && x.action == y.action &&
               x.channel == y.channel && x.context.work_lux == y.context.work_lux &&
               x.context.outdoor_lux == y.context.outdoor_lux && x.context.event == y.context.event &&
               x.context.season == y.context.season && x.context.blinds == y.context.blinds &&
               x.context.lights_on == y.context.lights_on && x.context.leave == y.context.leave;
        same = same && back.scenarios[i] == s.slots[static_cast<std::size_t>(x.slot)].scenario;
    }
    CHECK(same);

    std::istringstream bad("wrong,header\n1,2,3\n");
    CHECK_THROWS(read_dataset_csv(bad));
}

TEST_CASE("schedule config parses event counts by name") {
    Config cfg = Config::from_string(
        "[schedule]\n"
        "initial = 8\narrival = 8\nshort_leave = 4\nshort_return = 4\n"
        "long_leave = 4\nlong_return = 4\ndeparture = 8\n"
        "subjects = 3\nschedule_seed = 21\njitter_sigma = 0.1\n"
        "transfer_up = 0.05\ntransfer_down = 0.01\nlamp_lux = 250\nambient_lux = 4\n"
        "peak_spring = 10000\npeak_summer = 20000\npeak_fall = 9000\npeak_winter = 4000\n"
        "artificial_below = 1200\nno_artificial_above = 11000\n");
    ScheduleConfig sc = ScheduleConfig::from_config(cfg);
    CHECK(sc.event_counts == std::array<int, 7>{8, 8, 4, 4, 4, 4, 8});
    CHECK(sc.subjects == 3);
    CHECK(sc.schedule_seed == 21);
    CHECK(sc.outdoor_peak == std::array<double, 4>{10000.0, 20000.0, 9000.0, 4000.0});
    StedSchedule s = build_sted_schedule(sc);
    CHECK(s.slots.size() == 40);

    ScheduleConfig bad;
    bad.subjects = 0;
    CHECK_THROWS(bad.validate());
    bad = ScheduleConfig{};
    bad.event_counts[0] = -1;
    CHECK_THROWS(bad.validate());
}
