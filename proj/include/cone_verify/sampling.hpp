#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cone_verify/fields.hpp"
#include "cone_verify/linalg.hpp"

namespace cone_verify {

enum class SamplingStrategy { Grid, Random };
std::string to_string(SamplingStrategy s);
SamplingStrategy sampling_strategy_from_string(const std::string& s);

struct RegionSamplingPlan {
  SamplingStrategy strategy = SamplingStrategy::Random;
  /// Random: exact count. Grid: ceil(count^(1/n)) nodes per axis, nodes
  /// outside a ball region or inside a skip ball dropped.
  std::size_t count = 100;
  std::uint64_t seed = 1;
  /// Points closer than this to a listed singularity are not sampled.
  double skip_singularity_radius = 0.0;
};

/// Samples of field.region(); throws ConfigError for an unbounded region.
std::vector<Vector> sample_region(const VectorFieldModel& field, const RegionSamplingPlan& plan);

/// Worker count: CONE_VERIFY_THREADS if set to a positive integer, else the
/// hardware concurrency (at least 1).
unsigned worker_count();

/// Calls job(i) for i in [0, count) on `threads` workers (0 = worker_count()).
/// The first exception thrown by a job is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job,
                  unsigned threads = 0);

}  // namespace cone_verify
