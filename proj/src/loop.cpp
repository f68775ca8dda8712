#include "cphs/loop.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "cphs/rng.hpp"
#include "cphs/text.hpp"

namespace cphs::loop {

const char* to_string(Termination t) {
    switch (t) {
        case Termination::GraphConverged: return "graph_converged";
        case Termination::DiscrepancyMet: return "discrepancy_met";
        case Termination::MaxIterations: return "max_iterations";
    }
    throw std::logic_error("unreachable termination reason");
}

void LoopConfig::validate() const {
    hunt.validate();
    target.validate();
    schedule.validate();
    training.validate();
    if (max_iterations < 1) throw std::invalid_argument("loop: max_iterations must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("loop: epsilon must be > 0");
    if (!(beta > 0.0)) throw std::invalid_argument("loop: beta must be > 0");
    if (!(alpha > 0.0)) throw std::invalid_argument("loop: alpha must be > 0");
    if (!(alpha_sig > 0.0 && alpha_sig < 1.0))
        throw std::invalid_argument("loop: alpha_sig must be in (0,1)");
    if (!(negligibility > 0.0)) throw std::invalid_argument("loop: negligibility must be > 0");
    if (aux_count < 1) throw std::invalid_argument("loop: aux_count must be >= 1");
    if (pilot.nodes().empty()) throw std::invalid_argument("loop: pilot graph has no nodes");
    if (!pilot.has_node(outcome))
        throw std::invalid_argument("loop: outcome '" + outcome + "' is not a pilot graph node");
    for (const std::string& t : treatments)
        if (!pilot.has_node(t))
            throw std::invalid_argument("loop: treatment '" + t + "' is not a pilot graph node");
}

LoopConfig LoopConfig::from_config(const Config& cfg) {
    LoopConfig lc;
    lc.hunt = domain::HuntModel::from_config(cfg);
    lc.target = domain::ProbitTarget::from_config(cfg);
    lc.truth = domain::GroundTruthScm::from_config(cfg);
    lc.schedule = sted::ScheduleConfig::from_config(cfg);
    lc.training = fusion::TrainingConfig::from_config(cfg);

    for (const std::string& node : cfg.get_list("causal", "nodes")) lc.pilot.add_node(node);
    for (const std::string& edge : cfg.get_list("causal", "edges", {})) {
        std::size_t arrow = edge.find("->");
        if (arrow == std::string::npos)
            throw std::invalid_argument("causal edges must look like 'parent -> child', got '" +
                                        edge + "'");
        lc.pilot.add_edge(trim(edge.substr(0, arrow)), trim(edge.substr(arrow + 2)));
    }
    lc.treatments = cfg.get_list("causal", "treatments", {});
    lc.outcome = cfg.get("causal", "outcome", "action");
    lc.alpha_sig = cfg.get_double("causal", "alpha_sig", 0.01);
    lc.negligibility = cfg.get_double("causal", "negligibility", 0.02);
    lc.edit_budget = cfg.get_u64("causal", "edit_budget", 4);
    lc.test_options.quantile_bins = int(cfg.get_int("causal", "quantile_bins", 3));
    lc.test_options.max_conditioning = cfg.get_u64("causal", "max_conditioning", 2);

    lc.epsilon = cfg.get_double("loop", "epsilon", 0.02);
    lc.beta = cfg.get_double("loop", "beta", 0.5);
    lc.alpha = cfg.get_double("loop", "alpha", 0.1);
    lc.max_iterations = int(cfg.get_int("loop", "max_iterations", 3));
    lc.graph_distance_floor = cfg.get_u64("loop", "graph_distance_floor", 0);
    lc.aux_count = int(cfg.get_int("loop", "aux_count", 1));
    lc.stabilized_ipw = cfg.get_bool("loop", "stabilized_ipw", true);
    lc.validate();
    return lc;
}

metrics::Curve empirical_rate_curve(const std::vector<sted::EventRecord>& records,
                                    const metrics::BinGrid& grid) {
    std::vector<double> log_centers;
    for (double c : grid.centers_lux) log_centers.push_back(std::log10(c));
    double half_step = grid.size() > 1
                           ? (log_centers.back() - log_centers.front()) / (2.0 * double(grid.size() - 1))
                           : 0.5;
    std::vector<double> acted(grid.size(), 0.0), total(grid.size(), 0.0);
    for (const sted::EventRecord& r : records) {
        double lv = std::log10(r.context.work_lux);
        if (lv < log_centers.front() - half_step || lv > log_centers.back() + half_step) continue;
        std::size_t best = 0;
        for (std::size_t i = 1; i < log_centers.size(); ++i)
            if (std::abs(lv - log_centers[i]) < std::abs(lv - log_centers[best])) best = i;
        total[best] += 1.0;
        if (r.action != sted::Action::NoAction) acted[best] += 1.0;
    }
    metrics::Curve curve;
    curve.grid = grid;
    for (std::size_t i = 0; i < grid.size(); ++i)
        curve.probability.push_back(total[i] > 0.0 ? acted[i] / total[i] : 0.0);
    return curve;
}

causal::DataTable table_from_records(const std::vector<sted::EventRecord>& records) {
    causal::DataTable table;
    auto add = [&](const std::string& name, bool discrete) {
        table.names.push_back(name);
        table.discrete.push_back(discrete);
        table.columns.emplace_back();
        table.columns.back().reserve(records.size());
    };
    add("work_lux", false);
    add("outdoor_lux", false);
    add("time_of_day", false);
    add("occupancy", true);
    add("leave_status", true);
    add("event_type", true);
    add("season", true);
    add("blinds", true);
    add("lights_on", true);
    add("action", true);
    for (const sted::EventRecord& r : records) {
        const domain::ContextVector& c = r.context;
        table.columns[0].push_back(c.work_lux);
        table.columns[1].push_back(c.outdoor_lux);
        table.columns[2].push_back(c.time_of_day);
        table.columns[3].push_back(c.occupancy ? 1.0 : 0.0);
        table.columns[4].push_back(double(int(c.leave)));
        table.columns[5].push_back(double(int(c.event)));
        table.columns[6].push_back(double(int(c.season)));
        table.columns[7].push_back(double(int(c.blinds)));
        table.columns[8].push_back(double(int(c.lights_on)));
        table.columns[9].push_back(r.action != sted::Action::NoAction ? 1.0 : 0.0);
    }
    return table;
}

namespace {

template <typename F>
decltype(auto) stage(int iteration, const char* name, F&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(iteration, name, e.what());
    }
}

metrics::Curve model_curve(const metrics::BinGrid& grid,
                           const std::function<double(double)>& probability) {
    metrics::Curve curve;
    curve.grid = grid;
    for (double c : grid.centers_lux) curve.probability.push_back(probability(c));
    return curve;
}

}  // namespace

LoopResult run_design_loop(const LoopConfig& config) {
    config.validate();

    LoopResult result;
    const metrics::BinGrid& grid = config.training.grid;
    result.target_curve =
        model_curve(grid, [&](double e) { return probit_probability(config.target, e); });
    result.existing_curve =
        model_curve(grid, [&](double e) { return hunt_probability(config.hunt, e); });
    result.initial_pilot = config.pilot;
    result.final_graph = config.pilot;

    result.schedule = stage(0, "schedule",
                            [&] { return sted::build_sted_schedule(config.schedule); });
    const sted::StedSchedule& schedule = result.schedule;
    double existing_discrepancy =
        metrics::target_discrepancy(result.existing_curve, result.target_curve);

    std::vector<sted::AuxiliaryModel> auxiliaries = stage(0, "perturb", [&] {
        return sted::perturb_ground_truth(config.truth, config.alpha, config.aux_count,
                                          derive_seed(config.master_seed, 0, "perturb"));
    });

    sted::BehaviorFn truth_behavior = [scm = config.truth](const domain::ContextVector& c) {
        return domain::scm_probability(scm, c);
    };

    causal::CausalGraph pilot = config.pilot;
    std::vector<std::string> treatments = config.treatments;
    double best_discrepancy = std::numeric_limits<double>::infinity();
    result.reason = Termination::MaxIterations;

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        fusion::ExistingDataset existing = stage(iter, "existing", [&] {
            return fusion::make_existing_dataset(schedule, config.hunt);
        });

        const sted::AuxiliaryModel& aux = auxiliaries[std::size_t(iter - 1) % auxiliaries.size()];
        std::vector<sted::EventRecord> ive_records = stage(iter, "ive", [&] {
            return sted::run_stated_choice(schedule, aux.behavior(), sted::Channel::Ive,
                                           derive_seed(config.master_seed, std::uint64_t(iter), "ive"),
                                           config.schedule.subjects);
        });

        fusion::TrainingConfig tc = config.training;
        tc.seed = derive_seed(config.master_seed, std::uint64_t(iter), "fuse");
        auto [augmented, training] = stage(iter, "fuse", [&] {
            return fusion::train_gan(existing, ive_records, config.target, tc);
        });
        metrics::Curve augmented_curve = fusion::predict_curve(augmented);
        double discrepancy = metrics::target_discrepancy(augmented_curve, result.target_curve);

        std::vector<sted::EventRecord> facility_records = stage(iter, "facility", [&] {
            return sted::run_stated_choice(
                schedule, truth_behavior, sted::Channel::Physical,
                derive_seed(config.master_seed, std::uint64_t(iter), "facility"),
                config.schedule.subjects);
        });

        causal::IndependenceTestReport report;
        causal::CausalGraph refined;
        causal::FeedbackPlan plan;
        std::size_t distance = 0;
        stage(iter, "causal", [&] {
            causal::DataTable table = table_from_records(facility_records);
            report = causal::test_implications(pilot, table, config.alpha_sig, config.test_options);
            std::map<std::string, double> effects;
            for (const std::string& treatment : treatments) {
                if (!pilot.has_node(treatment)) continue;
                causal::AdjustmentResult adj = causal::adjustment_set(pilot, treatment, config.outcome);
                if (!adj.feasible) continue;
                std::vector<std::string> covariates(adj.set.begin(), adj.set.end());
                auto [ate, diag] = causal::estimate_ate_ipw(table, treatment, config.outcome,
                                                            covariates, config.stabilized_ipw);
                (void)diag;
                effects[treatment] = ate;
            }
            std::tie(refined, plan) = causal::refine_graph(pilot, report, effects,
                                                           config.edit_budget, config.negligibility);
            distance = causal::graph_distance(pilot, refined);
            return 0;
        });

        int rejected = 0;
        for (const causal::IndependenceTest& t : report.tests) rejected += t.rejected;

        IterationRecord record;
        record.iteration = iter;
        record.existing_discrepancy = existing_discrepancy;
        record.augmented_discrepancy = discrepancy;
        record.best_discrepancy = std::min(best_discrepancy, discrepancy);
        record.graph_distance = distance;
        record.rejected_implications = rejected;
        record.edits = plan.added_edges.size() + plan.remove_variables.size();
        result.history.push_back(record);
        result.plans.push_back(plan);
        result.last_report = report;
        result.final_graph = refined;

        if (discrepancy < best_discrepancy) {
            best_discrepancy = discrepancy;
            result.augmented = std::move(augmented);
            result.training = std::move(training);
            result.augmented_curve = augmented_curve;
            result.ive_curve = empirical_rate_curve(ive_records, grid);
            result.ive_records = std::move(ive_records);
            result.facility_records = std::move(facility_records);
        }

        if (distance <= config.graph_distance_floor) {
            result.reason = Termination::GraphConverged;
            break;
        }
        if (discrepancy <= config.epsilon) {
            result.reason = Termination::DiscrepancyMet;
            break;
        }

        // Feedback: the refined graph seeds the next iteration; treatments
        // referencing removed variables drop out of the probe set.
        pilot = refined;
        std::vector<std::string> kept;
        for (const std::string& t : treatments)
            if (pilot.has_node(t)) kept.push_back(t);
        treatments = std::move(kept);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Artifacts

void write_loop_history_csv(std::ostream& os, const std::vector<IterationRecord>& history,
                            Termination reason) {
    os << "iteration,existing_discrepancy,augmented_discrepancy,best_discrepancy,graph_distance,"
          "rejected_implications,edits,termination\n";
    for (std::size_t i = 0; i < history.size(); ++i) {
        const IterationRecord& r = history[i];
        os << r.iteration << "," << fmt_double(r.existing_discrepancy) << ","
           << fmt_double(r.augmented_discrepancy) << "," << fmt_double(r.best_discrepancy) << ","
           << r.graph_distance << "," << r.rejected_implications << "," << r.edits << ","
           << (i + 1 == history.size() ? to_string(reason) : "") << "\n";
    }
}

void write_curves_csv(std::ostream& os, const LoopResult& result) {
    os << "series,bin_center_lux,probability\n";
    auto emit = [&](const char* name, const metrics::Curve& curve) {
        for (std::size_t i = 0; i < curve.grid.size(); ++i)
            os << name << "," << fmt_double(curve.grid.centers_lux[i]) << ","
               << fmt_double(curve.probability[i]) << "\n";
    };
    emit("target", result.target_curve);
    emit("augmented", result.augmented_curve);
    emit("existing", result.existing_curve);
    emit("ive", result.ive_curve);
}

namespace {

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

struct SvgMapper {
    double x0 = 90, x1 = 660, y0 = 440, y1 = 50;  // pixel corners (y inverted)
    double lo = 200, hi = 700;

    double x(double lux) const { return x0 + (lux - lo) / (hi - lo) * (x1 - x0); }
    double y(double p) const { return y0 + std::clamp(p, 0.0, 1.0) * (y1 - y0); }
};

void svg_series(std::ostream& os, const SvgMapper& m, const metrics::Curve& curve,
                const char* color, const char* marker) {
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        if (i) os << " ";
        os << svg_num(m.x(curve.grid.centers_lux[i])) << "," << svg_num(m.y(curve.probability[i]));
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        double px = m.x(curve.grid.centers_lux[i]);
        double py = m.y(curve.probability[i]);
        if (std::string(marker) == "circle") {
            os << "<circle cx=\"" << svg_num(px) << "\" cy=\"" << svg_num(py)
               << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
        } else if (std::string(marker) == "square") {
            os << "<rect x=\"" << svg_num(px - 3) << "\" y=\"" << svg_num(py - 3)
               << "\" width=\"6\" height=\"6\" fill=\"" << color << "\"/>\n";
        } else if (std::string(marker) == "diamond") {
            os << "<polygon fill=\"" << color << "\" points=\"" << svg_num(px) << ","
               << svg_num(py - 4) << " " << svg_num(px + 4) << "," << svg_num(py) << " "
               << svg_num(px) << "," << svg_num(py + 4) << " " << svg_num(px - 4) << ","
               << svg_num(py) << "\"/>\n";
        } else {
            os << "<polygon fill=\"" << color << "\" points=\"" << svg_num(px) << ","
               << svg_num(py - 4) << " " << svg_num(px + 4) << "," << svg_num(py + 3) << " "
               << svg_num(px - 4) << "," << svg_num(py + 3) << "\"/>\n";
        }
    }
}

}  // namespace

void write_report_svg(std::ostream& os, const LoopResult& result) {
    SvgMapper m;
    m.lo = 200.0;
    m.hi = 700.0;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"520\" "
          "viewBox=\"0 0 720 520\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"720\" height=\"520\" fill=\"white\"/>\n";
    os << "<rect x=\"" << svg_num(m.x0) << "\" y=\"" << svg_num(m.y1) << "\" width=\""
       << svg_num(m.x1 - m.x0) << "\" height=\"" << svg_num(m.y0 - m.y1)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int lux = 200; lux <= 700; lux += 100) {
        double px = m.x(lux);
        os << "<line x1=\"" << svg_num(px) << "\" y1=\"" << svg_num(m.y0) << "\" x2=\""
           << svg_num(px) << "\" y2=\"" << svg_num(m.y0 + 5) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << svg_num(px) << "\" y=\"" << svg_num(m.y0 + 20)
           << "\" font-size=\"12\" text-anchor=\"middle\">" << lux << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        double p = i / 5.0;
        double py = m.y(p);
        os << "<line x1=\"" << svg_num(m.x0 - 5) << "\" y1=\"" << svg_num(py) << "\" x2=\""
           << svg_num(m.x0) << "\" y2=\"" << svg_num(py) << "\" stroke=\"black\"/>\n";
        char label[8];
        std::snprintf(label, sizeof label, "%.1f", p);
        os << "<text x=\"" << svg_num(m.x0 - 10) << "\" y=\"" << svg_num(py + 4)
           << "\" font-size=\"12\" text-anchor=\"end\">" << label << "</text>\n";
    }
    os << "<text x=\"" << svg_num((m.x0 + m.x1) / 2) << "\" y=\"" << svg_num(m.y0 + 45)
       << "\" font-size=\"14\" text-anchor=\"middle\">Work area illuminance (Lux)</text>\n";
    os << "<text x=\"25\" y=\"" << svg_num((m.y0 + m.y1) / 2)
       << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 25 "
       << svg_num((m.y0 + m.y1) / 2) << ")\">Probability of switching on</text>\n";

    svg_series(os, m, result.target_curve, "#1f77b4", "circle");
    svg_series(os, m, result.augmented_curve, "#d62728", "square");
    svg_series(os, m, result.existing_curve, "#2ca02c", "triangle");
    svg_series(os, m, result.ive_curve, "#9467bd", "diamond");

    const char* names[4] = {"performance target", "augmented model", "existing model",
                            "IVE empirical rate"};
    const char* colors[4] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    double lx = 470, ly = 60;
    os << "<rect x=\"" << svg_num(lx - 10) << "\" y=\"" << svg_num(ly - 15)
       << "\" width=\"190\" height=\"80\" fill=\"white\" stroke=\"black\"/>\n";
    for (int s = 0; s < 4; ++s) {
        double py = ly + 18 * s;
        os << "<line x1=\"" << svg_num(lx) << "\" y1=\"" << svg_num(py) << "\" x2=\""
           << svg_num(lx + 24) << "\" y2=\"" << svg_num(py) << "\" stroke=\"" << colors[s]
           << "\" stroke-width=\"1.5\"/>\n";
        os << "<circle cx=\"" << svg_num(lx + 12) << "\" cy=\"" << svg_num(py)
           << "\" r=\"3\" fill=\"" << colors[s] << "\"/>\n";
        os << "<text x=\"" << svg_num(lx + 32) << "\" y=\"" << svg_num(py + 4)
           << "\" font-size=\"12\">" << names[s] << "</text>\n";
    }
    os << "</svg>\n";
}

std::vector<std::string> emit_report(const LoopResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir), ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + out_dir +
                                 "': " + ec.message());

    // Render everything first so an unwritable directory fails cleanly.
    std::vector<std::pair<std::string, std::string>> files;
    auto render = [&](const std::string& name, auto&& writer) {
        std::ostringstream os;
        writer(os);
        files.emplace_back(name, os.str());
    };
    render("curves.csv", [&](std::ostream& os) { write_curves_csv(os, result); });
    render("loop_history.csv",
           [&](std::ostream& os) { write_loop_history_csv(os, result.history, result.reason); });
    render("training_history.csv",
           [&](std::ostream& os) { fusion::write_history_csv(os, result.training); });
    render("augmented_model.txt",
           [&](std::ostream& os) { fusion::write_augmented_model(os, result.augmented); });
    render("independence_report.csv",
           [&](std::ostream& os) { causal::write_report_csv(os, result.last_report); });
    render("ive_dataset.csv", [&](std::ostream& os) {
        sted::write_dataset_csv(os, result.schedule, result.ive_records);
    });
    render("facility_dataset.csv", [&](std::ostream& os) {
        sted::write_dataset_csv(os, result.schedule, result.facility_records);
    });
    render("pilot_graph.txt",
           [&](std::ostream& os) { causal::write_graph(os, result.initial_pilot); });
    render("final_graph.txt", [&](std::ostream& os) { causal::write_graph(os, result.final_graph); });
    render("report.svg", [&](std::ostream& os) { write_report_svg(os, result); });

    std::ostringstream manifest;
    for (const auto& [name, content] : files) manifest << name << " " << content.size() << "\n";
    files.emplace_back("manifest.txt", manifest.str());

    std::vector<std::string> written;
    for (const auto& [name, content] : files) {
        fs::path path = fs::path(out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
        out << content;
        if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
        written.push_back(name);
    }
    return written;
}

}  // namespace cphs::loop
