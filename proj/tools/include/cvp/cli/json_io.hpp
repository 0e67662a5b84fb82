#pragma once

#include <string>

#include "json.hpp"

#include "cvp/cli/config.hpp"
#include "cvp/diagnostics.hpp"
#include "cvp/exhaustion.hpp"
#include "cvp/solver.hpp"

namespace cvp::cli {

/// Finite numbers as-is, otherwise the strings "inf", "-inf", "nan".
json number(double v);

json to_json(const Point& p);
json to_json(const DiscreteMeasure& m);
json to_json(const TestSet& s);
json to_json(const TestSetFamily& f);
json to_json(const ELReport& r);
json to_json(const LevelSolution& s, bool with_grid);
json to_json(const PhiTable& t);
json to_json(const PhiCheck& c);
json to_json(const ConditionBReport& r);
json to_json(const NontrivialityVerdict& v);
json to_json(const MinimalityReport& r);
json to_json(const ClosureReport& r);
json to_json(const DimensionReport& r, bool with_local);
json to_json(const ClassReport& r);
json to_json(const ConvergenceTrace& t);

/// Inverse of to_json(LevelSolution, true) given the space the solution lives in.
LevelSolution level_solution_from_json(const json& j, const SpaceConfig& space);

}  // namespace cvp::cli
