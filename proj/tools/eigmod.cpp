#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "eigmod/baseline.hpp"
#include "eigmod/bench.hpp"
#include "eigmod/core.hpp"
#include "eigmod/eigvec.hpp"
#include "eigmod/io.hpp"
#include "eigmod/kernels.hpp"
#include "eigmod/locate.hpp"
#include "eigmod/rootfind.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct UpdateArgs {
  std::string matrix_path;
  std::vector<std::string> eigen_paths;
  std::string update_path;
  std::string signs;
  double tol = 0.0;
  std::string out_prefix;
};

struct BenchArgs {
  std::string sizes = "100,200,400";
  std::size_t rank = 2;
  std::size_t trials = 3;
  std::string methods = "rank2,direct_evd";
  std::uint64_t seed = 0;
  double norm = 0.5;
  std::string out = "bench.csv";
};

struct CompareArgs {
  std::size_t n = 100;
  std::string ranks = "1..10";
  double norm = 0.01;
  std::uint64_t seed = 0;
  std::string out = "compare.csv";
};

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto dots = tok.find("..");
    if (dots != std::string::npos) {
      const long lo = std::stol(tok.substr(0, dots));
      const long hi = std::stol(tok.substr(dots + 2));
      if (lo < 1 || hi < lo) throw std::invalid_argument("bad range '" + tok + "'");
      for (long v = lo; v <= hi; ++v) out.push_back(static_cast<std::size_t>(v));
    } else if (!tok.empty()) {
      const long v = std::stol(tok);
      if (v < 1) throw std::invalid_argument("sizes/ranks must be positive");
      out.push_back(static_cast<std::size_t>(v));
    }
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Loads a decomposition either from a Matrix Market matrix (decomposed with
// the Jacobi baseline) or from Q/lambda CSV files.
eigmod::SpectralDecomposition load_decomposition(const UpdateArgs& args) {
  if (!args.matrix_path.empty()) {
    const eigmod::SymmetricDense a = eigmod::read_matrix_market(args.matrix_path);
    return eigmod::jacobi_evd(a);
  }
  if (args.eigen_paths.size() != 2)
    throw eigmod::FormatError("either --matrix or --eigen <q.csv> <lambda.csv> is required");
  eigmod::SpectralDecomposition d;
  d.q = eigmod::read_csv_matrix(args.eigen_paths[0]).values;
  const eigmod::Matrix lam = eigmod::read_csv_matrix(args.eigen_paths[1]).values;
  if (lam.cols() == 1) {
    d.lambda.resize(lam.rows());
    for (std::size_t i = 0; i < lam.rows(); ++i) d.lambda[i] = lam(i, 0);
  } else if (lam.rows() == 1) {
    d.lambda.resize(lam.cols());
    for (std::size_t j = 0; j < lam.cols(); ++j) d.lambda[j] = lam(0, j);
  } else {
    throw eigmod::FormatError(args.eigen_paths[1] + ": eigenvalues must be a single column or row");
  }
  eigmod::validate_decomposition(d);
  return d;
}

eigmod::LowRankUpdate load_update(const UpdateArgs& args, std::size_t n) {
  if (args.update_path.empty()) throw eigmod::FormatError("--update is required");
  const eigmod::CsvMatrix k = eigmod::read_csv_matrix(args.update_path);
  eigmod::LowRankUpdate u;
  u.kmat = k.values;
  if (u.kmat.rows() != n)
    throw eigmod::FormatError(args.update_path + ": row count does not match the matrix size");
  if (!args.signs.empty())
    u.signs = eigmod::parse_signs(args.signs);
  else if (k.signs)
    u.signs = *k.signs;
  else
    u.signs.assign(u.kmat.cols(), 1);
  if (u.signs.size() != u.kmat.cols())
    throw eigmod::FormatError("sign count does not match the update rank");
  return u;
}

int cmd_update(const UpdateArgs& args) {
  const eigmod::SpectralDecomposition d = load_decomposition(args);
  const eigmod::LowRankUpdate u = load_update(args, d.size());
  const double tol = args.tol > 0.0 ? args.tol : eigmod::default_tolerance(d.lambda, u);

  const eigmod::UpdateResult res = eigmod::update_decomposition(d, u, tol);

  eigmod::Matrix lam(res.decomposition.lambda.size(), 1);
  for (std::size_t i = 0; i < lam.rows(); ++i) lam(i, 0) = res.decomposition.lambda[i];
  eigmod::write_csv_matrix(args.out_prefix + "_lambda.csv", lam);
  eigmod::write_csv_matrix(args.out_prefix + "_q.csv", res.decomposition.q);

  nlohmann::json summary{{"n", d.size()},
                         {"k", u.rank()},
                         {"residual_fro", res.residual_fro},
                         {"ortho_err", res.ortho_err},
                         {"wall_time", res.wall_time}};
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_locate(const UpdateArgs& args) {
  const eigmod::SpectralDecomposition d = load_decomposition(args);
  const eigmod::LowRankUpdate u = load_update(args, d.size());

  const eigmod::TransformedUpdate tu = eigmod::transform_update(d, u);
  const eigmod::DeflatedProblem dp = eigmod::deflate_problem(d.lambda, tu);
  eigmod::LocationVector loc;
  if (dp.coeffs.size() == 0) {
    loc.counts.assign(1, 0);
  } else if (tu.rank() == 2) {
    loc = eigmod::locate_rank2(dp.coeffs, eigmod::classify_shift(tu.signs));
  } else {
    loc = eigmod::locate_rank_k(dp.coeffs, tu.signs).loc;
  }
  for (std::size_t i = 0; i < loc.counts.size(); ++i)
    std::cout << (i ? "," : "") << loc.counts[i];
  std::cout << "\n";
  return 0;
}

int cmd_bench(const BenchArgs& args) {
  eigmod::BenchConfig cfg;
  cfg.sizes = parse_size_list(args.sizes);
  cfg.rank = args.rank;
  cfg.trials = std::max<std::size_t>(1, args.trials);
  cfg.seed = args.seed;
  cfg.norm = args.norm;
  std::stringstream ss(args.methods);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto m = eigmod::parse_method(tok);
    if (!m) throw std::invalid_argument("unknown method '" + tok + "'");
    cfg.methods.push_back(*m);
  }

  const std::vector<eigmod::BenchRecord> records = eigmod::run_bench(cfg);
  std::vector<eigmod::ExponentFit> fits;
  if (cfg.sizes.size() >= 3) {
    fits = eigmod::fit_all(records);
  } else {
    std::cerr << "exponent fit refused: need at least 3 sizes\n";
  }

  std::ofstream out(args.out);
  if (!out) throw eigmod::FormatError(args.out + ": cannot open for writing");
  out << "record,method,n,k,wall_time,residual_fro,ortho_err,eig_err_2norm,parallel,p,r2,sizes\n";
  for (const auto& r : records)
    out << "bench," << r.method << "," << r.n << "," << r.k << "," << fmt(r.wall_time) << ","
        << fmt(r.residual_fro) << "," << fmt(r.ortho_err) << "," << fmt(r.eig_err_2norm) << ","
        << (r.parallel ? 1 : 0) << ",,,\n";
  for (const auto& f : fits) {
    out << "fit," << f.method << ",,,,,,,," << fmt(f.p) << "," << fmt(f.r2) << ",";
    for (std::size_t i = 0; i < f.sizes.size(); ++i) out << (i ? "|" : "") << f.sizes[i];
    out << "\n";
  }
  for (const auto& f : fits)
    std::cout << "fit " << f.method << ": p = " << f.p << " (r2 = " << f.r2 << ")\n";
  return 0;
}

int cmd_compare(const CompareArgs& args) {
  const std::vector<std::size_t> ranks = parse_size_list(args.ranks);
  if (args.n < 1) throw std::invalid_argument("--n must be positive");

  std::ofstream out(args.out);
  if (!out) throw eigmod::FormatError(args.out + ": cannot open for writing");
  out << "method,rank,n,norm,eig_err_2norm,residual_fro,ortho_err,wall_time\n";

  using clock_type = std::chrono::steady_clock;
  for (const std::size_t k : ranks) {
    if (k > args.n) throw std::invalid_argument("rank exceeds n");
    auto [d, u] = eigmod::random_instance(args.n, k, args.norm, args.seed * 1000003ull + k);
    const double tol = eigmod::default_tolerance(d.lambda, u);
    const eigmod::SymmetricDense target = eigmod::apply_update(eigmod::reconstruct(d), u);

    const auto t0 = clock_type::now();
    const eigmod::SpectralDecomposition oracle = eigmod::jacobi_evd(target);
    const double t_direct = std::chrono::duration<double>(clock_type::now() - t0).count();

    const eigmod::UpdateResult proposed = eigmod::update_decomposition(d, u, tol);

    const auto t1 = clock_type::now();
    const eigmod::SpectralDecomposition pert = eigmod::perturbation_update(d, u);
    const double t_pert = std::chrono::duration<double>(clock_type::now() - t1).count();

    auto eig_err = [&](const eigmod::Vec& got) {
      double s = 0.0;
      for (std::size_t i = 0; i < got.size(); ++i) {
        const double diff = got[i] - oracle.lambda[i];
        s += diff * diff;
      }
      return std::sqrt(s);
    };
    auto residual = [&](const eigmod::SpectralDecomposition& dec) {
      const eigmod::SymmetricDense got = eigmod::reconstruct(dec);
      double s = 0.0;
      for (std::size_t i = 0; i < target.n; ++i)
        for (std::size_t j = 0; j < target.n; ++j) {
          const double diff = got.entries(i, j) - target.entries(i, j);
          s += diff * diff;
        }
      return std::sqrt(s);
    };

    out << "direct_evd," << k << "," << args.n << "," << fmt(args.norm) << ",0,"
        << fmt(residual(oracle)) << "," << fmt(eigmod::kernels::ortho_error(oracle.q)) << ","
        << fmt(t_direct) << "\n";
    out << "proposed," << k << "," << args.n << "," << fmt(args.norm) << ","
        << fmt(eig_err(proposed.decomposition.lambda)) << "," << fmt(proposed.residual_fro) << ","
        << fmt(proposed.ortho_err) << "," << fmt(proposed.wall_time) << "\n";
    out << "perturbation," << k << "," << args.n << "," << fmt(args.norm) << ","
        << fmt(eig_err(pert.lambda)) << "," << fmt(residual(pert)) << ","
        << fmt(eigmod::kernels::ortho_error(pert.q)) << "," << fmt(t_pert) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-rank spectral updates for dense symmetric matrices"};
  app.require_subcommand(1);
  bool parallel = false;
  app.add_flag("--parallel", parallel, "enable the OpenMP kernel paths");

  UpdateArgs upd;
  CLI::App* update = app.add_subcommand("update", "update a known eigendecomposition");
  update->add_option("--matrix", upd.matrix_path, "Matrix Market file (decomposed first)");
  update->add_option("--eigen", upd.eigen_paths, "Q and lambda CSV files")->expected(2);
  update->add_option("--update", upd.update_path, "update factor K as CSV")->required();
  update->add_option("--signs", upd.signs, "sign signature, e.g. +1,-1");
  update->add_option("--tol", upd.tol, "root tolerance (default 1e-12 * scale)");
  update->add_option("--out", upd.out_prefix, "output file prefix")->required();

  UpdateArgs loc = upd;
  CLI::App* locate = app.add_subcommand("locate", "print the location vector for an update");
  locate->add_option("--matrix", loc.matrix_path, "Matrix Market file (decomposed first)");
  locate->add_option("--eigen", loc.eigen_paths, "Q and lambda CSV files")->expected(2);
  locate->add_option("--update", loc.update_path, "update factor K as CSV")->required();
  locate->add_option("--signs", loc.signs, "sign signature, e.g. +1,-1");

  BenchArgs ben;
  CLI::App* bench = app.add_subcommand("bench", "scaling benchmark with exponent fits");
  bench->add_option("--sizes", ben.sizes, "comma list or a..b range (default 100,200,400)");
  bench->add_option("--rank", ben.rank, "update rank (default 2)");
  bench->add_option("--trials", ben.trials, "timed trials per point (default 3)");
  bench->add_option("--methods", ben.methods,
                    "comma list of rank1_twice,rank2,rank_k_sturm,direct_evd,perturbation");
  bench->add_option("--seed", ben.seed, "instance seed");
  bench->add_option("--norm", ben.norm, "update factor norm (default 0.5)");
  bench->add_option("--out", ben.out, "output CSV (default bench.csv)");

  CompareArgs cmp;
  CLI::App* compare = app.add_subcommand("compare", "accuracy sweep across update ranks");
  compare->add_option("--n", cmp.n, "matrix size (default 100)");
  compare->add_option("--ranks", cmp.ranks, "comma list or a..b range (default 1..10)");
  compare->add_option("--norm", cmp.norm, "update factor norm (default 0.01)");
  compare->add_option("--seed", cmp.seed, "instance seed");
  compare->add_option("--out", cmp.out, "output CSV (default compare.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  eigmod::kernels::set_parallel(parallel);

  try {
    if (update->parsed()) return cmd_update(upd);
    if (locate->parsed()) return cmd_locate(loc);
    if (bench->parsed()) return cmd_bench(ben);
    if (compare->parsed()) return cmd_compare(cmp);
  } catch (const eigmod::NumericalError& e) {
    std::cerr << "numerical failure at stage '" << e.stage() << "': " << e.what() << "\n";
    return kExitNumerical;
  } catch (const eigmod::FormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
