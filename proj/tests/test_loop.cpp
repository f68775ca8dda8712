#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cphs/loop.hpp"

using namespace cphs;
using namespace cphs::loop;

namespace {

const char* kTinyConfig = R"(
[hunt]
a = 0.05
c = 0.70
b = 2.0
m = 2.2

[probit_target]
beta0 = 6.5
beta1 = -2.6

[scm]
intercept = 3.0
w_log_work = -1.6
w_log_outdoor = -1.2
w_occupancy = 2.0
w_leave_short = 0
w_leave_long = 0

[schedule]
subjects = 2
schedule_seed = 7

[fusion]
max_epochs = 5
batch_size = 32
learning_rate = 0.08
eval_draws = 32
grid_bins = 7

[causal]
nodes = action, event_type, occupancy, outdoor_lux, work_lux
edges = event_type -> occupancy, event_type -> outdoor_lux, event_type -> work_lux, outdoor_lux -> work_lux, occupancy -> action, work_lux -> action
treatments = occupancy
outcome = action
alpha_sig = 0.001
edit_budget = 3

[loop]
epsilon = 0.000001
max_iterations = 2
aux_count = 1
)";

LoopConfig tiny_config() {
    LoopConfig lc = LoopConfig::from_config(Config::from_string(kTinyConfig));
    lc.master_seed = 23;
    return lc;
}

const LoopResult& tiny_result() {
    static LoopResult result = run_design_loop(tiny_config());
    return result;
}

sted::EventRecord record_at(double work_lux, sted::Action action) {
    sted::EventRecord r;
    r.context.work_lux = work_lux;
    r.context.outdoor_lux = 5000.0;
    r.context.time_of_day = 10.0;
    r.context.occupancy = true;
    r.action = action;
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("termination reasons have stable names") {
    CHECK(std::string(to_string(Termination::GraphConverged)) == "graph_converged");
    CHECK(std::string(to_string(Termination::DiscrepancyMet)) == "discrepancy_met");
    CHECK(std::string(to_string(Termination::MaxIterations)) == "max_iterations");
}

TEST_CASE("loop config parses every section") {
    LoopConfig lc = tiny_config();
    CHECK(lc.hunt.a == 0.05);
    CHECK(lc.target.beta1 == -2.6);
    CHECK(lc.truth.w_occupancy == 2.0);
    CHECK(lc.schedule.subjects == 2);
    CHECK(lc.training.max_epochs == 5);
    CHECK(lc.training.grid.size() == 7);
    CHECK(lc.pilot.nodes().size() == 5);
    CHECK(lc.pilot.has_edge("work_lux", "action"));
    CHECK(lc.treatments == std::vector<std::string>{"occupancy"});
    CHECK(lc.outcome == "action");
    CHECK(lc.alpha_sig == 0.001);
    CHECK(lc.edit_budget == 3);
    CHECK(lc.max_iterations == 2);

    LoopConfig bad = lc;
    bad.outcome = "zz";
    CHECK_THROWS(bad.validate());
    bad = lc;
    bad.max_iterations = 0;
    CHECK_THROWS(bad.validate());
    bad = lc;
    bad.treatments = {"zz"};
    CHECK_THROWS(bad.validate());
}

TEST_CASE("empirical rates bin records by nearest log center") {
    metrics::BinGrid grid = metrics::BinGrid::log_spaced(100.0, 1000.0, 3);
    std::vector<sted::EventRecord> records{
        record_at(100.0, sted::Action::SwitchOn),
        record_at(120.0, sted::Action::NoAction),
        record_at(400.0, sted::Action::SwitchOff),  // any switch counts as acting
        record_at(50.0, sted::Action::SwitchOn),    // below the half-step margin
        record_at(2000.0, sted::Action::SwitchOn),  // above it
    };
    metrics::Curve curve = empirical_rate_curve(records, grid);
    REQUIRE(curve.probability.size() == 3);
    CHECK(curve.probability[0] == 0.5);
    CHECK(curve.probability[1] == 1.0);
    CHECK(curve.probability[2] == 0.0);  // empty bin reports zero
}

TEST_CASE("record tables expose the standard column layout") {
    sted::EventRecord r = record_at(250.0, sted::Action::SwitchOn);
    r.context.leave = domain::LeaveStatus::Short;
    r.context.event = domain::EventType::Arrival;
    r.context.season = domain::Season::Winter;
    r.context.blinds = domain::Blinds::Down;
    r.context.lights_on = true;
    sted::EventRecord quiet = record_at(300.0, sted::Action::NoAction);

    causal::DataTable table = table_from_records({r, quiet});
    table.validate();
    CHECK(table.names ==
          std::vector<std::string>{"work_lux", "outdoor_lux", "time_of_day", "occupancy",
                                   "leave_status", "event_type", "season", "blinds", "lights_on",
                                   "action"});
    CHECK(table.rows() == 2);
    CHECK(!table.discrete[0]);
    CHECK(!table.discrete[2]);
    CHECK(table.discrete[3]);
    CHECK(table.columns[0][0] == 250.0);
    CHECK(table.columns[4][0] == 1.0);  // short leave
    CHECK(table.columns[5][0] == 1.0);  // arrival
    CHECK(table.columns[6][0] == 3.0);  // winter
    CHECK(table.columns[7][0] == 1.0);  // blinds down
    CHECK(table.columns[8][0] == 1.0);
    CHECK(table.columns[9][0] == 1.0);
    CHECK(table.columns[9][1] == 0.0);  // no_action maps to zero
}

TEST_CASE("design loop history tracks its running best") {
    const LoopResult& result = tiny_result();
    REQUIRE(!result.history.empty());
    CHECK(result.history.size() <= 2);

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < result.history.size(); ++i) {
        const IterationRecord& r = result.history[i];
        CHECK(r.iteration == int(i) + 1);
        CHECK(r.existing_discrepancy == result.history.front().existing_discrepancy);
        best = std::min(best, r.augmented_discrepancy);
        CHECK(r.best_discrepancy == best);
    }

    const metrics::BinGrid& grid = tiny_config().training.grid;
    CHECK(result.target_curve.grid.size() == grid.size());
    CHECK(result.augmented_curve.probability.size() == grid.size());
    CHECK(result.existing_curve.probability.size() == grid.size());
    CHECK(result.ive_records.size() == result.schedule.slots.size() * 2);
    CHECK(result.facility_records.size() == result.schedule.slots.size() * 2);

    // The cached ive curve is the empirical rate of the kept ive records.
    metrics::Curve recomputed = empirical_rate_curve(result.ive_records, result.ive_curve.grid);
    CHECK(recomputed.probability == result.ive_curve.probability);
    CHECK(result.initial_pilot == tiny_config().pilot);
}

TEST_CASE("design loop reruns reproduce every artifact byte") {
    const LoopResult& first = tiny_result();
    LoopResult second = run_design_loop(tiny_config());

    std::ostringstream c1, c2, h1, h2;
    write_curves_csv(c1, first);
    write_curves_csv(c2, second);
    write_loop_history_csv(h1, first.history, first.reason);
    write_loop_history_csv(h2, second.history, second.reason);
    CHECK(c1.str() == c2.str());
    CHECK(h1.str() == h2.str());
    CHECK(first.final_graph == second.final_graph);
}

TEST_CASE("loop history csv carries the reason only on the last row") {
    std::vector<IterationRecord> history;
    history.push_back({1, 0.5, 0.25, 0.25, 2, 3, 1});
    history.push_back({2, 0.5, 0.125, 0.125, 0, 0, 0});
    std::ostringstream os;
    write_loop_history_csv(os, history, Termination::GraphConverged);
    CHECK(os.str() ==
          "iteration,existing_discrepancy,augmented_discrepancy,best_discrepancy,graph_distance,"
          "rejected_implications,edits,termination\n"
          "1,0.5,0.25,0.25,2,3,1,\n"
          "2,0.5,0.125,0.125,0,0,0,graph_converged\n");
}

TEST_CASE("curves csv lists series in a fixed order") {
    LoopResult result;
    metrics::BinGrid grid = metrics::BinGrid::log_spaced(100.0, 1000.0, 2);
    auto curve = [&](double p0, double p1) {
        metrics::Curve c;
        c.grid = grid;
        c.probability = {p0, p1};
        return c;
    };
    result.target_curve = curve(0.5, 0.25);
    result.augmented_curve = curve(0.75, 0.5);
    result.existing_curve = curve(1.0, 0.125);
    result.ive_curve = curve(0.0, 0.25);

    std::ostringstream os;
    write_curves_csv(os, result);
    CHECK(os.str() ==
          "series,bin_center_lux,probability\n"
          "target,100,0.5\n"
          "target,1000,0.25\n"
          "augmented,100,0.75\n"
          "augmented,1000,0.5\n"
          "existing,100,1\n"
          "existing,1000,0.125\n"
          "ive,100,0\n"
          "ive,1000,0.25\n");
}

TEST_CASE("report svg draws four labelled series") {
    const LoopResult& result = tiny_result();
    std::ostringstream os;
    write_report_svg(os, result);
    std::string svg = os.str();
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("performance target") != std::string::npos);
    CHECK(svg.find("augmented model") != std::string::npos);
    CHECK(svg.find("existing model") != std::string::npos);
    CHECK(svg.find("IVE empirical rate") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("Probability of switching on") != std::string::npos);
}

TEST_CASE("emitted reports are complete, sized, and reproducible") {
    namespace fs = std::filesystem;
    const LoopResult& result = tiny_result();
    fs::path dir1 = fs::temp_directory_path() / "cphs_emit_a";
    fs::path dir2 = fs::temp_directory_path() / "cphs_emit_b";
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    std::vector<std::string> names = emit_report(result, dir1.string());
    std::vector<std::string> expected{"curves.csv",       "loop_history.csv",
                                      "training_history.csv", "augmented_model.txt",
                                      "independence_report.csv", "ive_dataset.csv",
                                      "facility_dataset.csv", "pilot_graph.txt",
                                      "final_graph.txt",   "report.svg",
                                      "manifest.txt"};
    CHECK(names == expected);
    for (const std::string& n : names) CHECK(fs::exists(dir1 / n));

    // manifest lines are "name size" and must match the bytes on disk
    std::istringstream manifest(slurp(dir1 / "manifest.txt"));
    std::string name;
    std::size_t size = 0, lines = 0;
    while (manifest >> name >> size) {
        ++lines;
        CHECK(fs::file_size(dir1 / name) == size);
    }
    CHECK(lines == names.size() - 1);  // the manifest does not list itself

    std::ostringstream curves;
    write_curves_csv(curves, result);
    CHECK(slurp(dir1 / "curves.csv") == curves.str());

    std::ifstream gin(dir1 / "final_graph.txt");
    CHECK(causal::read_graph(gin) == result.final_graph);

    std::ifstream min(dir1 / "augmented_model.txt");
    fusion::AugmentedModel model = fusion::read_augmented_model(min);
    for (double lux : result.augmented_curve.grid.centers_lux)
        CHECK(fusion::augmented_predict(model, lux) ==
              fusion::augmented_predict(result.augmented, lux));

    emit_report(result, dir2.string());
    for (const std::string& n : names) CHECK(slurp(dir1 / n) == slurp(dir2 / n));

    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("stage errors carry their loop position") {
    StageError err(2, "fuse", "loss diverged");
    CHECK(err.iteration == 2);
    CHECK(err.stage == "fuse");
    CHECK(std::string(err.what()) == "iteration 2, stage fuse: loss diverged");
}
