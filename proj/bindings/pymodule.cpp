#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cphs/causal.hpp"
#include "cphs/config.hpp"
#include "cphs/domain.hpp"
#include "cphs/fusion.hpp"
#include "cphs/loop.hpp"
#include "cphs/metrics.hpp"
#include "cphs/rng.hpp"
#include "cphs/sted.hpp"

namespace py = pybind11;
using namespace cphs;

namespace {

causal::CausalGraph make_graph(const std::vector<std::string>& nodes,
                               const std::vector<std::pair<std::string, std::string>>& edges) {
    causal::CausalGraph g(nodes);
    for (const auto& [parent, child] : edges) g.add_edge(parent, child);
    return g;
}

void write_artifact(const std::string& out_dir, const std::string& name,
                    const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir), ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + out_dir +
                                 "': " + ec.message());
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + name + "' under '" + out_dir + "'");
    out << content;
}

template <typename F>
std::string rendered(F&& writer) {
    std::ostringstream os;
    writer(os);
    return os.str();
}

py::list curve_to_list(const metrics::Curve& curve) {
    py::list out;
    for (std::size_t i = 0; i < curve.grid.size(); ++i)
        out.append(py::make_tuple(curve.grid.centers_lux[i], curve.probability[i]));
    return out;
}

loop::LoopConfig load_loop_config(const std::string& config_path, std::uint64_t seed) {
    loop::LoopConfig lc = loop::LoopConfig::from_config(Config::from_file(config_path));
    lc.master_seed = seed;
    return lc;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Occupant-behavior design loop: schedules, fusion training, causal checks";

    m.def(
        "hunt_probability",
        [](double a, double c, double b, double mm, double work_lux) {
            domain::HuntModel h{a, c, b, mm};
            h.validate();
            return domain::hunt_probability(h, work_lux);
        },
        py::arg("a"), py::arg("c"), py::arg("b"), py::arg("m"), py::arg("work_lux"),
        "Switch-on probability of the sigmoid-over-log10-lux behavior curve");

    m.def(
        "probit_probability",
        [](double beta0, double beta1, double work_lux) {
            domain::ProbitTarget t{beta0, beta1};
            t.validate();
            return domain::probit_probability(t, work_lux);
        },
        py::arg("beta0"), py::arg("beta1"), py::arg("work_lux"),
        "Performance-target switch-on probability");

    m.def(
        "wasserstein1",
        [](const std::vector<double>& values_a, const std::vector<double>& values_b,
           const std::vector<double>& weights_a, const std::vector<double>& weights_b) {
            metrics::EmpiricalDistribution a =
                weights_a.empty() ? metrics::EmpiricalDistribution::from_samples(values_a)
                                  : metrics::EmpiricalDistribution(values_a, weights_a);
            metrics::EmpiricalDistribution b =
                weights_b.empty() ? metrics::EmpiricalDistribution::from_samples(values_b)
                                  : metrics::EmpiricalDistribution(values_b, weights_b);
            return metrics::wasserstein1(a, b);
        },
        py::arg("values_a"), py::arg("values_b"), py::arg("weights_a") = std::vector<double>{},
        py::arg("weights_b") = std::vector<double>{},
        "Earth-mover distance between two weighted scalar samples");

    m.def(
        "d_separated",
        [](const std::vector<std::string>& nodes,
           const std::vector<std::pair<std::string, std::string>>& edges, const std::string& x,
           const std::string& y, const std::vector<std::string>& z) {
            return causal::d_separated(make_graph(nodes, edges), x, y, {z.begin(), z.end()});
        },
        py::arg("nodes"), py::arg("edges"), py::arg("x"), py::arg("y"),
        py::arg("z") = std::vector<std::string>{});

    m.def(
        "implied_independencies",
        [](const std::vector<std::string>& nodes,
           const std::vector<std::pair<std::string, std::string>>& edges,
           std::size_t max_conditioning) {
            py::list out;
            for (const causal::Independence& ind :
                 causal::implied_independencies(make_graph(nodes, edges), max_conditioning))
                out.append(py::make_tuple(ind.x, ind.y, ind.z));
            return out;
        },
        py::arg("nodes"), py::arg("edges"), py::arg("max_conditioning") = 2);

    m.def(
        "adjustment_set",
        [](const std::vector<std::string>& nodes,
           const std::vector<std::pair<std::string, std::string>>& edges,
           const std::string& treatment, const std::string& outcome) {
            causal::AdjustmentResult r =
                causal::adjustment_set(make_graph(nodes, edges), treatment, outcome);
            return py::make_tuple(r.feasible,
                                  std::vector<std::string>(r.set.begin(), r.set.end()));
        },
        py::arg("nodes"), py::arg("edges"), py::arg("treatment"), py::arg("outcome"));

    m.def(
        "schedule_event_counts",
        [](const std::string& config_path) {
            sted::ScheduleConfig sc =
                sted::ScheduleConfig::from_config(Config::from_file(config_path));
            auto counts = sted::build_sted_schedule(sc).event_counts();
            return std::vector<std::size_t>(counts.begin(), counts.end());
        },
        py::arg("config_path"),
        "Event-type counts of the built schedule, in enum declaration order");

    m.def(
        "simulate",
        [](const std::string& config_path, std::uint64_t seed, const std::string& out_dir) {
            Config cfg = Config::from_file(config_path);
            sted::ScheduleConfig sc = sted::ScheduleConfig::from_config(cfg);
            domain::GroundTruthScm truth = domain::GroundTruthScm::from_config(cfg);
            sted::StedSchedule schedule = sted::build_sted_schedule(sc);
            std::vector<sted::EventRecord> records = sted::run_stated_choice(
                schedule,
                [&truth](const domain::ContextVector& c) {
                    return domain::scm_probability(truth, c);
                },
                sted::Channel::Ive, derive_seed(seed, 0, "simulate"), sc.subjects);
            if (!out_dir.empty())
                write_artifact(out_dir, "ive_dataset.csv", rendered([&](std::ostream& os) {
                                   sted::write_dataset_csv(os, schedule, records);
                               }));
            py::dict out;
            out["records"] = records.size();
            out["slots"] = schedule.slots.size();
            return out;
        },
        py::arg("config_path"), py::arg("seed") = 0, py::arg("out_dir") = "");

    m.def(
        "fuse",
        [](const std::string& config_path, std::uint64_t seed, const std::string& out_dir) {
            loop::LoopConfig lc = load_loop_config(config_path, seed);
            sted::StedSchedule schedule = sted::build_sted_schedule(lc.schedule);
            fusion::ExistingDataset existing = fusion::make_existing_dataset(schedule, lc.hunt);
            std::vector<sted::AuxiliaryModel> aux = sted::perturb_ground_truth(
                lc.truth, lc.alpha, 1, derive_seed(seed, 0, "perturb"));
            std::vector<sted::EventRecord> ive =
                sted::run_stated_choice(schedule, aux.front().behavior(), sted::Channel::Ive,
                                        derive_seed(seed, 1, "ive"), lc.schedule.subjects);
            fusion::TrainingConfig tc = lc.training;
            tc.seed = derive_seed(seed, 1, "fuse");
            auto [model, history] = fusion::train_gan(existing, ive, lc.target, tc);
            if (!out_dir.empty()) {
                write_artifact(out_dir, "augmented_model.txt", rendered([&](std::ostream& os) {
                                   fusion::write_augmented_model(os, model);
                               }));
                write_artifact(out_dir, "training_history.csv", rendered([&](std::ostream& os) {
                                   fusion::write_history_csv(os, history);
                               }));
            }
            py::dict out;
            out["epochs"] = history.epochs.size();
            out["best_epoch"] = history.best_epoch;
            out["curve"] = curve_to_list(fusion::predict_curve(model));
            return out;
        },
        py::arg("config_path"), py::arg("seed") = 0, py::arg("out_dir") = "");

    m.def(
        "causal_check",
        [](const std::string& config_path, std::uint64_t seed, const std::string& out_dir) {
            loop::LoopConfig lc = load_loop_config(config_path, seed);
            sted::StedSchedule schedule = sted::build_sted_schedule(lc.schedule);
            std::vector<sted::EventRecord> facility = sted::run_stated_choice(
                schedule,
                [&lc](const domain::ContextVector& c) {
                    return domain::scm_probability(lc.truth, c);
                },
                sted::Channel::Physical, derive_seed(seed, 1, "facility"), lc.schedule.subjects);
            causal::DataTable table = loop::table_from_records(facility);
            causal::IndependenceTestReport report =
                causal::test_implications(lc.pilot, table, lc.alpha_sig, lc.test_options);
            std::map<std::string, double> effects;
            for (const std::string& treatment : lc.treatments) {
                causal::AdjustmentResult adj =
                    causal::adjustment_set(lc.pilot, treatment, lc.outcome);
                if (!adj.feasible) continue;
                std::vector<std::string> covariates(adj.set.begin(), adj.set.end());
                effects[treatment] = causal::estimate_ate_ipw(table, treatment, lc.outcome,
                                                              covariates, lc.stabilized_ipw)
                                         .first;
            }
            auto [refined, plan] = causal::refine_graph(lc.pilot, report, effects, lc.edit_budget,
                                                        lc.negligibility);
            if (!out_dir.empty()) {
                write_artifact(out_dir, "independence_report.csv",
                               rendered([&](std::ostream& os) {
                                   causal::write_report_csv(os, report);
                               }));
                write_artifact(out_dir, "final_graph.txt", rendered([&](std::ostream& os) {
                                   causal::write_graph(os, refined);
                               }));
            }
            int rejected = 0;
            for (const causal::IndependenceTest& t : report.tests) rejected += t.rejected;
            py::dict out;
            out["tests"] = report.tests.size();
            out["rejected"] = rejected;
            out["effects"] = effects;
            out["added_edges"] = plan.added_edges;
            out["removed_variables"] = plan.remove_variables;
            return out;
        },
        py::arg("config_path"), py::arg("seed") = 0, py::arg("out_dir") = "");

    m.def(
        "run_loop",
        [](const std::string& config_path, std::uint64_t seed, const std::string& out_dir) {
            loop::LoopResult result = loop::run_design_loop(load_loop_config(config_path, seed));
            std::vector<std::string> files;
            if (!out_dir.empty()) files = loop::emit_report(result, out_dir);

            py::list history;
            for (const loop::IterationRecord& r : result.history) {
                py::dict row;
                row["iteration"] = r.iteration;
                row["existing_discrepancy"] = r.existing_discrepancy;
                row["augmented_discrepancy"] = r.augmented_discrepancy;
                row["best_discrepancy"] = r.best_discrepancy;
                row["graph_distance"] = r.graph_distance;
                row["rejected_implications"] = r.rejected_implications;
                row["edits"] = r.edits;
                history.append(row);
            }
            std::vector<std::pair<std::string, std::string>> edges(
                result.final_graph.edges().begin(), result.final_graph.edges().end());

            py::dict out;
            out["termination"] = std::string(loop::to_string(result.reason));
            out["iterations"] = result.history.size();
            out["existing_discrepancy"] = result.history.front().existing_discrepancy;
            out["best_discrepancy"] = result.history.back().best_discrepancy;
            out["history"] = history;
            out["final_edges"] = edges;
            out["augmented_curve"] = curve_to_list(result.augmented_curve);
            out["files"] = files;
            return out;
        },
        py::arg("config_path"), py::arg("seed") = 0, py::arg("out_dir") = "",
        "Full design loop; emits the artifact set when out_dir is given");
}
