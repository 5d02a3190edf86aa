#include "cone_verify/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "cone_verify/errors.hpp"

namespace cone_verify {

std::string to_string(SamplingStrategy s) {
  return s == SamplingStrategy::Grid ? "grid" : "random";
}

SamplingStrategy sampling_strategy_from_string(const std::string& s) {
  if (s == "grid") return SamplingStrategy::Grid;
  if (s == "random") return SamplingStrategy::Random;
  throw ConfigError("unknown sampling strategy '" + s + "' (grid or random)");
}

namespace {

bool outside_skip_balls(const VectorFieldModel& field, const Vector& x, double radius) {
  if (radius <= 0.0) return true;
  for (const auto& s : field.singularities())
    if (norm(x - s) < radius) return false;
  return true;
}

std::vector<std::pair<double, double>> bounding_box(const Region& region) {
  if (region.kind() == Region::Kind::Box) return region.bounds();
  std::vector<std::pair<double, double>> b;
  for (double c : region.center()) b.emplace_back(c - region.radius(), c + region.radius());
  return b;
}

}  // namespace

std::vector<Vector> sample_region(const VectorFieldModel& field, const RegionSamplingPlan& plan) {
  const Region& region = field.region();
  if (region.kind() == Region::Kind::Unbounded)
    throw ConfigError("sampling needs a bounded region (box or ball)");
  const std::size_t n = field.dimension();
  std::vector<Vector> out;
  if (plan.count == 0) return out;

  if (plan.strategy == SamplingStrategy::Grid) {
    const auto box = bounding_box(region);
    auto per_axis = static_cast<std::size_t>(
        std::ceil(std::pow(static_cast<double>(plan.count), 1.0 / static_cast<double>(n)) - 1e-9));
    per_axis = std::max<std::size_t>(per_axis, 1);
    std::vector<std::size_t> counter(n, 0);
    while (true) {
      Vector x(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto [lo, hi] = box[i];
        x[i] = per_axis == 1 ? 0.5 * (lo + hi)
                             : lo + (hi - lo) * static_cast<double>(counter[i]) /
                                        static_cast<double>(per_axis - 1);
      }
      if (region.contains(x) && outside_skip_balls(field, x, plan.skip_singularity_radius))
        out.push_back(std::move(x));
      std::size_t axis = 0;
      while (axis < n && ++counter[axis] == per_axis) counter[axis++] = 0;
      if (axis == n) break;
    }
    return out;
  }

  std::mt19937_64 rng(plan.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::size_t attempts = 0;
  while (out.size() < plan.count) {
    if (++attempts > 1000 * plan.count + 100000)
      throw ConfigError("skip balls cover the region; no samples found");
    Vector x(n);
    if (region.kind() == Region::Kind::Box) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto [lo, hi] = region.bounds()[i];
        x[i] = lo + (hi - lo) * unit(rng);
      }
    } else {
      Vector g(n);
      for (double& v : g) v = gauss(rng);
      const double len = norm(g);
      if (len == 0.0) continue;
      const double r = region.radius() * std::pow(unit(rng), 1.0 / static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) x[i] = region.center()[i] + r * g[i] / len;
      if (!region.contains(x)) continue;
    }
    if (!outside_skip_balls(field, x, plan.skip_singularity_radius)) continue;
    out.push_back(std::move(x));
  }
  return out;
}

unsigned worker_count() {
  if (const char* env = std::getenv("CONE_VERIFY_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job,
                  unsigned threads) {
  if (threads == 0) threads = worker_count();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace cone_verify
