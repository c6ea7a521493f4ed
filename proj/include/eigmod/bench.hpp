#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "eigmod/types.hpp"

namespace eigmod {

enum class BenchMethod { rank1_twice, rank2, rank_k_sturm, direct_evd, perturbation };

std::string to_string(BenchMethod m);
std::optional<BenchMethod> parse_method(const std::string& name);

/// One measured run. wall_time covers the eigenvalue-update stage of the
/// method (the quantity whose growth the scaling study compares); quality
/// columns are validated from a full assembly computed outside the timer.
struct BenchRecord {
  std::string method;
  std::size_t n = 0;
  std::size_t k = 0;
  double wall_time = 0.0;      // seconds, median of trials
  double residual_fro = 0.0;
  double ortho_err = 0.0;
  double eig_err_2norm = 0.0;  // vs the Jacobi oracle
  bool parallel = false;
};

struct ExponentFit {
  std::string method;
  double p = 0.0;
  double r2 = 0.0;
  std::vector<std::size_t> sizes;
};

struct BenchConfig {
  std::vector<std::size_t> sizes;
  std::size_t rank = 2;
  std::size_t trials = 3;
  std::vector<BenchMethod> methods;
  std::uint64_t seed = 0;
  double norm = 0.5;  // Frobenius norm of the update factor
};

/// Runs every method on identical seeded instances per size. Instance
/// generation and the oracle decomposition are excluded from timing.
std::vector<BenchRecord> run_bench(const BenchConfig& cfg);

/// Least-squares exponent of t ~ n^p on (log n, log t); requires >= 3 sizes.
ExponentFit fit_exponent(const std::string& method, const std::vector<std::size_t>& sizes,
                         const Vec& times);

/// Fits appended for each method present in `records` (median times per size).
std::vector<ExponentFit> fit_all(const std::vector<BenchRecord>& records);

}  // namespace eigmod
