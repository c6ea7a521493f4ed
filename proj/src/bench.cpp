#include "eigmod/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "eigmod/baseline.hpp"
#include "eigmod/core.hpp"
#include "eigmod/eigvec.hpp"
#include "eigmod/kernels.hpp"
#include "eigmod/rootfind.hpp"
#include "eigmod/secular.hpp"

namespace eigmod {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

double median(Vec v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Vec matrix_column(const Matrix& m, std::size_t j) {
  Vec col(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) col[i] = m(i, j);
  return col;
}

// One rank-1 update in the current eigenbasis: new eigenvalues plus,
// optionally, the basis-coordinate eigenvector matrix (needed to push the
// next update through).
std::pair<Vec, Matrix> rank1_basis_update(const Vec& lambda, const Vec& z, int sigma, double tol,
                                          bool build_basis) {
  const std::size_t n = lambda.size();
  TransformedUpdate tu;
  tu.u = Matrix(n, 1);
  for (std::size_t i = 0; i < n; ++i) tu.u(i, 0) = z[i];
  tu.signs = {sigma};

  const DeflatedProblem dp = deflate_problem(lambda, tu);
  Vec roots;
  if (dp.coeffs.size() > 0) {
    double scale = 1.0;
    for (double l : lambda) scale = std::max(scale, std::fabs(l));
    Vec zeta(dp.coeffs.size());
    for (std::size_t i = 0; i < dp.coeffs.size(); ++i)
      zeta[i] = std::sqrt(std::fabs(dp.coeffs.weights[i]));
    roots = solve_rank1(dp.coeffs.poles, zeta, sigma, tol / std::max(1.0, scale));
  }

  struct Entry {
    double value;
    bool is_root;
    std::size_t payload;
  };
  std::vector<Entry> entries;
  entries.reserve(n);
  for (std::size_t r = 0; r < roots.size(); ++r) entries.push_back({roots[r], true, r});
  for (std::size_t idx : dp.unchanged) entries.push_back({lambda[idx], false, idx});
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.value < b.value; });

  Vec values(n);
  for (std::size_t col = 0; col < n; ++col) values[col] = entries[col].value;

  Matrix basis;
  if (build_basis) {
    basis = Matrix(n, n);
    for (std::size_t col = 0; col < n; ++col) {
      const Entry& e = entries[col];
      if (!e.is_root) {
        basis(e.payload, col) = 1.0;
        continue;
      }
      double norm2 = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const double w = z[s] / (lambda[s] - e.value);
        basis(s, col) = w;
        norm2 += w * w;
      }
      const double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t s = 0; s < n; ++s) basis(s, col) *= inv;
    }
  }
  return {std::move(values), std::move(basis)};
}

struct InstanceMetrics {
  double residual_fro = 0.0;
  double ortho_err = 0.0;
  double eig_err_2norm = 0.0;
};

double eig_err(const Vec& got, const Vec& oracle) {
  double s = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double d = got[i] - oracle[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double residual_against(const SpectralDecomposition& d, const SymmetricDense& target) {
  const SymmetricDense got = reconstruct(d);
  double s = 0.0;
  for (std::size_t i = 0; i < target.n; ++i)
    for (std::size_t j = 0; j < target.n; ++j) {
      const double diff = got.entries(i, j) - target.entries(i, j);
      s += diff * diff;
    }
  return std::sqrt(s);
}

}  // namespace

std::string to_string(BenchMethod m) {
  switch (m) {
    case BenchMethod::rank1_twice: return "rank1_twice";
    case BenchMethod::rank2: return "rank2";
    case BenchMethod::rank_k_sturm: return "rank_k_sturm";
    case BenchMethod::direct_evd: return "direct_evd";
    case BenchMethod::perturbation: return "perturbation";
  }
  return "unknown";
}

std::optional<BenchMethod> parse_method(const std::string& name) {
  if (name == "rank1_twice") return BenchMethod::rank1_twice;
  if (name == "rank2") return BenchMethod::rank2;
  if (name == "rank_k_sturm") return BenchMethod::rank_k_sturm;
  if (name == "direct_evd") return BenchMethod::direct_evd;
  if (name == "perturbation") return BenchMethod::perturbation;
  return std::nullopt;
}

std::vector<BenchRecord> run_bench(const BenchConfig& cfg) {
  if (cfg.sizes.empty()) throw std::invalid_argument("bench: no sizes");
  if (cfg.methods.empty()) throw std::invalid_argument("bench: no methods");
  if (cfg.rank < 1) throw std::invalid_argument("bench: rank must be >= 1");
  const bool wants_rank2_arms =
      std::any_of(cfg.methods.begin(), cfg.methods.end(), [](BenchMethod m) {
        return m == BenchMethod::rank1_twice || m == BenchMethod::rank2;
      });
  if (wants_rank2_arms && cfg.rank != 2)
    throw std::invalid_argument("bench: rank1_twice and rank2 require --rank 2");

  std::vector<BenchRecord> records;
  for (const std::size_t n : cfg.sizes) {
    if (cfg.rank > n) throw std::invalid_argument("bench: rank exceeds size");
    const std::uint64_t inst_seed = cfg.seed * 1000003ull + n;
    auto [d, u0] = random_instance(n, cfg.rank, cfg.norm, inst_seed);

    LowRankUpdate u;
    if (cfg.rank == 2) {
      // The paper-style rank-2 arm: a one-row-one-column style update split
      // into a signed pair.
      const Vec a = matrix_column(u0.kmat, 0);
      const Vec b = matrix_column(u0.kmat, 1);
      auto [u1, u2] = rank2_split(a, b);
      u.kmat = Matrix(n, 2);
      for (std::size_t i = 0; i < n; ++i) {
        u.kmat(i, 0) = u1[i];
        u.kmat(i, 1) = u2[i];
      }
      u.signs = {1, -1};
    } else {
      u = u0;
    }

    const double tol = default_tolerance(d.lambda, u);
    const SymmetricDense target = apply_update(reconstruct(d), u);
    const SpectralDecomposition oracle = jacobi_evd(target);

    for (const BenchMethod method : cfg.methods) {
      Vec times;
      Vec last_values;
      EigenvalueUpdate last_plan;
      SpectralDecomposition last_direct;
      SpectralDecomposition last_pert;

      const std::size_t runs = cfg.trials + 1;  // first run is warm-up
      for (std::size_t run = 0; run < runs; ++run) {
        const auto t0 = clock_type::now();
        switch (method) {
          case BenchMethod::rank2:
            last_plan = update_eigenvalues_full(d, u, tol);
            last_values = last_plan.values;
            break;
          case BenchMethod::rank_k_sturm:
            last_plan = update_eigenvalues_full(d, u, tol, LocateStrategy::sturm);
            last_values = last_plan.values;
            break;
          case BenchMethod::rank1_twice: {
            const Vec k0 = matrix_column(u.kmat, 0);
            const Vec k1 = matrix_column(u.kmat, 1);
            const Vec z1 = kernels::gemv_t(d.q, k0);
            auto [v1, basis1] = rank1_basis_update(d.lambda, z1, u.signs[0], tol, true);
            const Vec z2raw = kernels::gemv_t(d.q, k1);
            const Vec z2 = kernels::gemv_t(basis1, z2raw);
            auto [v2, unused] = rank1_basis_update(v1, z2, u.signs[1], tol, false);
            last_values = std::move(v2);
            break;
          }
          case BenchMethod::direct_evd:
            last_direct = jacobi_evd(target);
            last_values = last_direct.lambda;
            break;
          case BenchMethod::perturbation:
            last_pert = perturbation_update(d, u);
            last_values = last_pert.lambda;
            break;
        }
        const double dt = seconds_since(t0);
        if (run > 0) times.push_back(dt);
      }

      InstanceMetrics met;
      met.eig_err_2norm = method == BenchMethod::direct_evd ? 0.0 : eig_err(last_values, oracle.lambda);
      switch (method) {
        case BenchMethod::rank2:
        case BenchMethod::rank_k_sturm: {
          const SpectralDecomposition full = assemble_eigenvectors(d, last_plan);
          met.residual_fro = residual_against(full, target);
          met.ortho_err = kernels::ortho_error(full.q);
          break;
        }
        case BenchMethod::rank1_twice: {
          const Vec k0 = matrix_column(u.kmat, 0);
          const Vec k1 = matrix_column(u.kmat, 1);
          const Vec z1 = kernels::gemv_t(d.q, k0);
          auto [v1, basis1] = rank1_basis_update(d.lambda, z1, u.signs[0], tol, true);
          const Matrix q1 = kernels::gemm_nn(d.q, basis1);
          const Vec z2raw = kernels::gemv_t(d.q, k1);
          const Vec z2 = kernels::gemv_t(basis1, z2raw);
          auto [v2, basis2] = rank1_basis_update(v1, z2, u.signs[1], tol, true);
          SpectralDecomposition full;
          full.lambda = v2;
          full.q = kernels::gemm_nn(q1, basis2);
          met.residual_fro = residual_against(full, target);
          met.ortho_err = kernels::ortho_error(full.q);
          break;
        }
        case BenchMethod::direct_evd: {
          met.residual_fro = residual_against(last_direct, target);
          met.ortho_err = kernels::ortho_error(last_direct.q);
          break;
        }
        case BenchMethod::perturbation: {
          met.residual_fro = residual_against(last_pert, target);
          met.ortho_err = kernels::ortho_error(last_pert.q);
          break;
        }
      }

      BenchRecord rec;
      rec.method = to_string(method);
      rec.n = n;
      rec.k = u.rank();
      rec.wall_time = median(times);
      rec.residual_fro = met.residual_fro;
      rec.ortho_err = met.ortho_err;
      rec.eig_err_2norm = met.eig_err_2norm;
      rec.parallel = kernels::parallel();
      records.push_back(std::move(rec));
    }
  }
  return records;
}

ExponentFit fit_exponent(const std::string& method, const std::vector<std::size_t>& sizes,
                         const Vec& times) {
  if (sizes.size() < 3 || sizes.size() != times.size())
    throw std::invalid_argument("fit_exponent: need >= 3 (size, time) pairs");
  const std::size_t m = sizes.size();
  Vec x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = std::log(static_cast<double>(sizes[i]));
    y[i] = std::log(std::max(times[i], 1e-12));
  }
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(m);
  ym /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
    syy += (y[i] - ym) * (y[i] - ym);
  }
  ExponentFit fit;
  fit.method = method;
  fit.sizes = sizes;
  fit.p = sxy / sxx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

std::vector<ExponentFit> fit_all(const std::vector<BenchRecord>& records) {
  std::vector<std::string> methods;
  for (const BenchRecord& r : records)
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
      methods.push_back(r.method);

  std::vector<ExponentFit> fits;
  for (const std::string& m : methods) {
    std::vector<std::size_t> sizes;
    Vec times;
    for (const BenchRecord& r : records)
      if (r.method == m) {
        sizes.push_back(r.n);
        times.push_back(r.wall_time);
      }
    if (sizes.size() >= 3) fits.push_back(fit_exponent(m, sizes, times));
  }
  return fits;
}

}  // namespace eigmod
