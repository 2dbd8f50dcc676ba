#pragma once

#include "training.hpp"

#include <string>
#include <vector>

namespace idrl {

struct CurvePoint {
  long step = 0;
  double mean = 0.0;
  double std = 0.0;
};

struct Curve {
  std::string label;
  std::vector<CurvePoint> points;
};

// One run: band is the eval-episode std from metrics.csv.
Curve curve_from_metrics(const std::string& label, const std::vector<MetricsRow>& rows);

// Several seeds of the same run: mean and population std of eval_return_mean
// across seeds at every step present in all of them.
Curve aggregate_seeds(const std::string& label, const std::vector<std::vector<MetricsRow>>& runs);

std::string render_svg(const std::vector<Curve>& curves, const std::string& title);

}  // namespace idrl
