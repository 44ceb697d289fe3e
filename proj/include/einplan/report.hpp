#pragma once

#include <nlohmann/json.hpp>

#include "einplan/executor.hpp"
#include "einplan/schedule.hpp"

namespace einplan {

using ojson = nlohmann::ordered_json;

ojson tree_to_json(const ContractionTree& tree);
ojson bound_to_json(const IoBound& bound);
ojson partition_to_json(const PartitionResult& part, const Sdg& sdg);
ojson schedule_to_json(const Schedule& sched, bool include_messages);
ojson plan_to_json(const RedistributionPlan& plan, bool include_messages);

/// Full reports emitted by the CLI. Field order is stable; the format tag is
/// "einplan/v1".
ojson bound_report(const Pipeline& pipe, double fast_mem);
ojson plan_report(const Pipeline& pipe, double fast_mem, bool include_messages);
ojson run_report(const Pipeline& pipe, double fast_mem, const SimulationReport& sim);

}  // namespace einplan
