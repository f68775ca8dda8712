#include "cphs/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cphs/loop.hpp"
#include "cphs/rng.hpp"

namespace cphs {

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "Master seed (default 0)");
    cmd->add_option("--out", args.out_dir, "Output directory")->required();
}

void write_file(const std::string& out_dir, const std::string& name, const std::string& content) {
    std::error_code ec;
    fs::create_directories(fs::path(out_dir), ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + out_dir +
                                 "': " + ec.message());
    fs::path path = fs::path(out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

template <typename F>
std::string rendered(F&& writer) {
    std::ostringstream os;
    writer(os);
    return os.str();
}

int run_simulate(const CommonArgs& args) {
    Config cfg = Config::from_file(args.config_path);
    sted::ScheduleConfig sc = sted::ScheduleConfig::from_config(cfg);
    domain::GroundTruthScm truth = domain::GroundTruthScm::from_config(cfg);
    sted::StedSchedule schedule = sted::build_sted_schedule(sc);
    std::vector<sted::EventRecord> records = sted::run_stated_choice(
        schedule,
        [&truth](const domain::ContextVector& c) { return domain::scm_probability(truth, c); },
        sted::Channel::Ive, derive_seed(args.seed, 0, "simulate"), sc.subjects);
    write_file(args.out_dir, "ive_dataset.csv", rendered([&](std::ostream& os) {
                   sted::write_dataset_csv(os, schedule, records);
               }));
    return 0;
}

int run_fuse(const CommonArgs& args) {
    Config cfg = Config::from_file(args.config_path);
    loop::LoopConfig lc = loop::LoopConfig::from_config(cfg);
    lc.master_seed = args.seed;

    sted::StedSchedule schedule = sted::build_sted_schedule(lc.schedule);
    fusion::ExistingDataset existing = fusion::make_existing_dataset(schedule, lc.hunt);
    std::vector<sted::AuxiliaryModel> aux = sted::perturb_ground_truth(
        lc.truth, lc.alpha, 1, derive_seed(args.seed, 0, "perturb"));
    std::vector<sted::EventRecord> ive = sted::run_stated_choice(
        schedule, aux.front().behavior(), sted::Channel::Ive, derive_seed(args.seed, 1, "ive"),
        lc.schedule.subjects);

    fusion::TrainingConfig tc = lc.training;
    tc.seed = derive_seed(args.seed, 1, "fuse");
    auto [model, history] = fusion::train_gan(existing, ive, lc.target, tc);

    write_file(args.out_dir, "augmented_model.txt",
               rendered([&](std::ostream& os) { fusion::write_augmented_model(os, model); }));
    write_file(args.out_dir, "training_history.csv",
               rendered([&](std::ostream& os) { fusion::write_history_csv(os, history); }));
    write_file(args.out_dir, "ive_dataset.csv", rendered([&](std::ostream& os) {
                   sted::write_dataset_csv(os, schedule, ive);
               }));
    return 0;
}

int run_causal(const CommonArgs& args) {
    Config cfg = Config::from_file(args.config_path);
    loop::LoopConfig lc = loop::LoopConfig::from_config(cfg);

    sted::StedSchedule schedule = sted::build_sted_schedule(lc.schedule);
    std::vector<sted::EventRecord> facility = sted::run_stated_choice(
        schedule,
        [&lc](const domain::ContextVector& c) { return domain::scm_probability(lc.truth, c); },
        sted::Channel::Physical, derive_seed(args.seed, 1, "facility"), lc.schedule.subjects);

    causal::DataTable table = loop::table_from_records(facility);
    causal::IndependenceTestReport report =
        causal::test_implications(lc.pilot, table, lc.alpha_sig, lc.test_options);
    std::map<std::string, double> effects;
    for (const std::string& treatment : lc.treatments) {
        causal::AdjustmentResult adj = causal::adjustment_set(lc.pilot, treatment, lc.outcome);
        if (!adj.feasible) continue;
        std::vector<std::string> covariates(adj.set.begin(), adj.set.end());
        effects[treatment] = causal::estimate_ate_ipw(table, treatment, lc.outcome, covariates,
                                                      lc.stabilized_ipw)
                                 .first;
    }
    auto [refined, plan] =
        causal::refine_graph(lc.pilot, report, effects, lc.edit_budget, lc.negligibility);

    write_file(args.out_dir, "facility_dataset.csv", rendered([&](std::ostream& os) {
                   sted::write_dataset_csv(os, schedule, facility);
               }));
    write_file(args.out_dir, "independence_report.csv",
               rendered([&](std::ostream& os) { causal::write_report_csv(os, report); }));
    write_file(args.out_dir, "pilot_graph.txt",
               rendered([&](std::ostream& os) { causal::write_graph(os, lc.pilot); }));
    write_file(args.out_dir, "final_graph.txt",
               rendered([&](std::ostream& os) { causal::write_graph(os, refined); }));
    return 0;
}

loop::LoopResult run_loop_from(const CommonArgs& args) {
    Config cfg = Config::from_file(args.config_path);
    loop::LoopConfig lc = loop::LoopConfig::from_config(cfg);
    lc.master_seed = args.seed;
    return loop::run_design_loop(lc);
}

int run_loop(const CommonArgs& args) {
    loop::LoopResult result = run_loop_from(args);
    loop::emit_report(result, args.out_dir);
    return 0;
}

int run_report(const CommonArgs& args) {
    loop::LoopResult result = run_loop_from(args);
    write_file(args.out_dir, "curves.csv",
               rendered([&](std::ostream& os) { loop::write_curves_csv(os, result); }));
    write_file(args.out_dir, "loop_history.csv", rendered([&](std::ostream& os) {
                   loop::write_loop_history_csv(os, result.history, result.reason);
               }));
    write_file(args.out_dir, "pilot_graph.txt",
               rendered([&](std::ostream& os) { causal::write_graph(os, result.initial_pilot); }));
    write_file(args.out_dir, "final_graph.txt",
               rendered([&](std::ostream& os) { causal::write_graph(os, result.final_graph); }));
    write_file(args.out_dir, "report.svg",
               rendered([&](std::ostream& os) { loop::write_report_svg(os, result); }));
    return 0;
}

}  // namespace

int cli_dispatch(int argc, char** argv) {
    CLI::App app{"Context-aware behavior-model design loop"};
    app.require_subcommand(1);

    CommonArgs simulate_args, fuse_args, causal_args, loop_args, report_args;
    CLI::App* simulate =
        app.add_subcommand("simulate", "Generate a stated-choice dataset from the schedule");
    add_common(simulate, simulate_args);
    CLI::App* fuse =
        app.add_subcommand("fuse", "Train the augmented model against the performance target");
    add_common(fuse, fuse_args);
    CLI::App* causal_cmd =
        app.add_subcommand("causal", "Test causal assumptions on facility data and refine");
    add_common(causal_cmd, causal_args);
    CLI::App* loop_cmd = app.add_subcommand("loop", "Run the full design loop and emit artifacts");
    add_common(loop_cmd, loop_args);
    CLI::App* report_cmd = app.add_subcommand("report", "Run the loop and emit report artifacts");
    add_common(report_cmd, report_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        if (simulate->parsed()) return run_simulate(simulate_args);
        if (fuse->parsed()) return run_fuse(fuse_args);
        if (causal_cmd->parsed()) return run_causal(causal_args);
        if (loop_cmd->parsed()) return run_loop(loop_args);
        if (report_cmd->parsed()) return run_report(report_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cerr << app.help();
    return 1;
}

}  // namespace cphs
