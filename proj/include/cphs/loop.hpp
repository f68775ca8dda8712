#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cphs/causal.hpp"
#include "cphs/config.hpp"
#include "cphs/domain.hpp"
#include "cphs/fusion.hpp"
#include "cphs/metrics.hpp"
#include "cphs/sted.hpp"

namespace cphs::loop {

struct LoopConfig {
    domain::HuntModel hunt;
    domain::ProbitTarget target;
    domain::GroundTruthScm truth;
    sted::ScheduleConfig schedule;
    fusion::TrainingConfig training;

    causal::CausalGraph pilot;
    std::vector<std::string> treatments;
    std::string outcome = "action";
    causal::TestOptions test_options;
    double alpha_sig = 0.01;
    double negligibility = 0.02;
    std::size_t edit_budget = 4;

    double epsilon = 0.02;   // discrepancy termination threshold
    double beta = 0.5;       // mixture distance bound
    double alpha = 0.1;      // auxiliary model radius
    int max_iterations = 3;
    std::size_t graph_distance_floor = 0;
    int aux_count = 1;
    bool stabilized_ipw = true;

    std::uint64_t master_seed = 0;

    void validate() const;
    static LoopConfig from_config(const Config& cfg);
};

struct IterationRecord {
    int iteration = 0;
    double existing_discrepancy = 0.0;
    double augmented_discrepancy = 0.0;
    double best_discrepancy = 0.0;  // best so far across iterations
    std::size_t graph_distance = 0;
    int rejected_implications = 0;
    std::size_t edits = 0;  // edges added plus variables removed
};

enum class Termination { GraphConverged, DiscrepancyMet, MaxIterations };

const char* to_string(Termination t);

struct LoopResult {
    std::vector<IterationRecord> history;
    Termination reason = Termination::MaxIterations;

    fusion::AugmentedModel augmented;  // best iteration's model
    fusion::TrainingHistory training;  // its training history
    causal::CausalGraph initial_pilot;
    causal::CausalGraph final_graph;
    causal::IndependenceTestReport last_report;
    std::vector<causal::FeedbackPlan> plans;

    metrics::Curve target_curve;
    metrics::Curve existing_curve;
    metrics::Curve augmented_curve;
    metrics::Curve ive_curve;  // empirical switch rates from the IVE dataset

    sted::StedSchedule schedule;
    std::vector<sted::EventRecord> ive_records;
    std::vector<sted::EventRecord> facility_records;
};

// Stage errors are rethrown with iteration and stage context attached.
struct StageError : std::runtime_error {
    int iteration;
    std::string stage;
    StageError(int iteration_index, const std::string& stage_name, const std::string& what)
        : std::runtime_error("iteration " + std::to_string(iteration_index) + ", stage " +
                             stage_name + ": " + what),
          iteration(iteration_index),
          stage(stage_name) {}
};

LoopResult run_design_loop(const LoopConfig& config);

// Observed switch rate per bin; records map to the nearest bin center in
// log space.
metrics::Curve empirical_rate_curve(const std::vector<sted::EventRecord>& records,
                                    const metrics::BinGrid& grid);

causal::DataTable table_from_records(const std::vector<sted::EventRecord>& records);

void write_loop_history_csv(std::ostream& os, const std::vector<IterationRecord>& history,
                            Termination reason);

// Writes curves.csv, report.svg, loop_history.csv, graph files, datasets,
// the trained model and manifest.txt under out_dir; returns relative paths.
std::vector<std::string> emit_report(const LoopResult& result, const std::string& out_dir);

void write_curves_csv(std::ostream& os, const LoopResult& result);
void write_report_svg(std::ostream& os, const LoopResult& result);

}  // namespace cphs::loop
