#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace invkit {

/// Uniform grid coordinate: index j of `count` samples on [lo, hi].
inline double grid_coord(double lo, double hi, int count, int j) {
  if (count == 1) return lo;
  return lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count - 1);
}

std::vector<double> linspace(double lo, double hi, int count);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
/// written to per-index slots; reductions happen at the caller afterwards so
/// the outcome is deterministic.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Writes via a temp file in the same directory, then renames.
void write_file_atomic(const std::string& path, const std::string& content);

/// Shortest exact decimal form of a double ("%.17g").
std::string format_double(double x);

/// Global worker-count default used by the CLI (--threads / env fallback).
int& default_thread_count();

}  // namespace invkit
