// elld: constants, explicit-formula density comparisons, exact character-sum
// moments, convergence diagnostics, and biased-subfamily construction for two
// parametric elliptic-curve families.  Reports are deterministic byte streams
// for a fixed config: stable field order, %.15g reals, exact rationals as
// "num/den".  Thread count changes performance only, never bytes, so it is
// deliberately not echoed into the report config.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <elld/charsums.hpp>
#include <elld/constants.hpp>
#include <elld/density.hpp>
#include <elld/report.hpp>
#include <elld/verify.hpp>

namespace {

using namespace elld;

struct Options {
  std::string family = "f1";
  long long q = 1, a0 = 1, b0 = 1;
  double X = 1e6;
  double rho = 0.2;
  std::string kind = "fejer";
  long long p = 0;
  int nu = 0;
  int n = 3;
  std::string sign = "minus";
  TruncationParams trunc;
  std::string format = "json";
  std::string out = "-";
  int threads = 0;  // 0 keeps the hardware default
};

FamilyId parse_family(const std::string& f) {
  return f == "f1" ? FamilyId::f1 : FamilyId::f2;
}

TestKind parse_kind(const std::string& k) {
  return k == "fejer" ? TestKind::fejer : TestKind::cosine_sq;
}

JsonValue trunc_json(const TruncationParams& t) {
  auto j = JsonValue::object();
  j.set("P", JsonValue::integer(t.P));
  j.set("P_Q", JsonValue::integer(t.P_Q));
  j.set("L_max", JsonValue::integer(t.L_max));
  j.set("T", JsonValue::integer(t.T));
  j.set("quad_tol", JsonValue::real(t.quad_tol));
  return j;
}

JsonValue family_config(const Options& o, const char* command) {
  auto cfg = JsonValue::object();
  cfg.set("command", JsonValue::str(command));
  cfg.set("family", JsonValue::str(o.family));
  cfg.set("q", JsonValue::integer(o.q));
  cfg.set("a0", JsonValue::integer(o.a0));
  cfg.set("b0", JsonValue::integer(o.b0));
  return cfg;
}

JsonValue row_json(const ConvergenceRow& r) {
  auto j = JsonValue::object();
  j.set("X", JsonValue::real(r.X));
  j.set("observed", JsonValue::real(r.observed));
  j.set("predicted", JsonValue::real(r.predicted));
  j.set("ratio", JsonValue::real(r.ratio));
  j.set("residual_scaled", JsonValue::real(r.residual_scaled));
  j.set("out_of_range", JsonValue::boolean(r.out_of_range));
  return j;
}

std::string run_constants(const Options& o) {
  const FamilyId fam = parse_family(o.family);
  validate_and_residues(fam, o.q, o.a0, o.b0);
  const auto weight = default_weight();
  const auto crep = c_constants(fam, weight, o.trunc);
  const auto drep = d_constants(fam, o.q, o.trunc);
  const double e = e_constant(fam, o.q, o.a0, o.b0);

  auto root = JsonValue::object();
  auto& cfg = root.set("config", family_config(o, "constants"));
  cfg.set("trunc", trunc_json(o.trunc));

  auto& res = root.set("results", JsonValue::object());
  auto& cmap = res.set("c", JsonValue::object());
  for (int i = 1; i <= 6; ++i) cmap.set("c" + std::to_string(i), JsonValue::real(crep.c[i]));
  res.set("c_sum", JsonValue::real(crep.c_sum()));
  auto& dmap = res.set("d", JsonValue::object());
  for (int i = 1; i <= 6; ++i) dmap.set("d" + std::to_string(i), JsonValue::real(drep.d[i]));
  res.set("d_sum", JsonValue::real(drep.d_sum()));
  res.set("e", JsonValue::real(e));
  // coefficient of phihat(0)/log X in the predicted 1-level density
  res.set("lower_order_sum", JsonValue::real(e + drep.d_sum() + crep.c_sum()));

  auto& diag = root.set("diagnostics", JsonValue::object());
  auto& tails = diag.set("tails", JsonValue::object());
  for (const auto& [k, v] : crep.tails) tails.set(k, JsonValue::real(v));
  diag.set("d2_flagged", JsonValue::boolean(drep.d2_flagged));
  return root.dump();
}

std::string run_density(const Options& o) {
  const FamilyId fam = parse_family(o.family);
  const FamilyParams params = validate_and_residues(fam, o.q, o.a0, o.b0);
  const auto test = make_test_function(parse_kind(o.kind), o.rho);
  const ScaledFamily s = make_scaled(params, o.X, default_weight());
  const DensityReport rep = compare_report(s, test, o.trunc);

  auto root = JsonValue::object();
  auto& cfg = root.set("config", family_config(o, "density"));
  cfg.set("X", JsonValue::real(o.X));
  cfg.set("rho", JsonValue::real(o.rho));
  cfg.set("kind", JsonValue::str(o.kind));
  cfg.set("trunc", trunc_json(o.trunc));

  auto& res = root.set("results", JsonValue::object());
  res.set("W_X", JsonValue::real(rep.W_X));
  res.set("empirical", JsonValue::real(rep.empirical));
  res.set("predicted", JsonValue::real(rep.predicted));
  res.set("residual", JsonValue::real(rep.residual));
  res.set("residual_scaled", JsonValue::real(rep.residual_scaled));

  auto& diag = root.set("diagnostics", JsonValue::object());
  diag.set("A", JsonValue::real(s.A));
  diag.set("B", JsonValue::real(s.B));
  diag.set("log_X", JsonValue::real(std::log(o.X)));
  return root.dump();
}

std::string run_charsum(const Options& o) {
  const FamilyId fam = parse_family(o.family);
  bool prime = o.p >= 3 && o.p % 2 == 1;
  for (long long d = 3; d * d <= o.p && prime; d += 2)
    if (o.p % d == 0) prime = false;
  if (!prime) throw domain_error("charsum: p must be an odd prime");
  const ExactMoment m = Q_exact(fam, o.p, o.nu);

  auto root = JsonValue::object();
  auto& cfg = root.set("config", JsonValue::object());
  cfg.set("command", JsonValue::str("charsum"));
  cfg.set("family", JsonValue::str(o.family));
  cfg.set("p", JsonValue::integer(o.p));
  cfg.set("nu", JsonValue::integer(o.nu));

  auto& res = root.set("results", JsonValue::object());
  res.set("Q", JsonValue::rational(m.is_zero() ? bigrat(0) : m.value()));
  res.set("is_zero", JsonValue::boolean(m.is_zero()));

  auto& diag = root.set("diagnostics", JsonValue::object());
  diag.set("numerator", JsonValue::str(m.numerator.str()));
  diag.set("half_power", JsonValue::integer(m.half_power));
  return root.dump();
}

std::string run_verify(const Options& o) {
  const FamilyId fam = parse_family(o.family);
  const FamilyParams params = validate_and_residues(fam, o.q, o.a0, o.b0);
  const auto weight = default_weight();
  const double e10 = std::log10(o.X);
  const std::vector<double> grid = {std::pow(10.0, e10 - 3.0), std::pow(10.0, e10 - 1.5), o.X};

  const auto fs = family_size_check(params, weight, grid);
  const auto alc = avg_log_conductor_check(params, weight, grid, o.trunc);
  std::vector<std::pair<long long, ConvergenceRow>> pd;
  for (long long p : {3LL, 5LL, 7LL})
    if (o.q % p != 0) pd.emplace_back(p, p_divides_density_check(params, weight, o.X, p));
  const auto rad = avg_log_radical_check(params, weight, o.X, o.trunc);

  if (o.format == "csv") {
    std::string out = csv_row(
        {"check", "X", "observed", "predicted", "ratio", "residual_scaled", "out_of_range"});
    auto add = [&](const std::string& name, const ConvergenceRow& r) {
      out += csv_row({name, fmt_real(r.X), fmt_real(r.observed), fmt_real(r.predicted),
                      fmt_real(r.ratio), fmt_real(r.residual_scaled),
                      r.out_of_range ? "true" : "false"});
    };
    for (const auto& r : fs) add("family_size", r);
    for (const auto& r : alc) add("avg_log_conductor", r);
    for (const auto& [p, r] : pd) add("p_divides_" + std::to_string(p), r);
    add("avg_log_radical", rad);
    return out;
  }

  auto root = JsonValue::object();
  auto& cfg = root.set("config", family_config(o, "verify"));
  cfg.set("X", JsonValue::real(o.X));
  cfg.set("trunc", trunc_json(o.trunc));

  auto& res = root.set("results", JsonValue::object());
  auto& fs_arr = res.set("family_size", JsonValue::array());
  for (const auto& r : fs) fs_arr.push(row_json(r));
  auto& alc_arr = res.set("avg_log_conductor", JsonValue::array());
  for (const auto& r : alc) alc_arr.push(row_json(r));
  auto& pd_arr = res.set("p_divides", JsonValue::array());
  for (const auto& [p, r] : pd) {
    auto j = JsonValue::object();
    j.set("p", JsonValue::integer(p));
    auto row = row_json(r);
    j.set("row", std::move(row));
    pd_arr.push(std::move(j));
  }
  res.set("avg_log_radical", row_json(rad));

  auto& diag = root.set("diagnostics", JsonValue::object());
  auto& garr = diag.set("X_grid", JsonValue::array());
  for (double x : grid) garr.push(JsonValue::real(x));
  return root.dump();
}

std::string run_bias(const Options& o) {
  const FamilyId fam = parse_family(o.family);
  const BiasSign sign = o.sign == "minus" ? BiasSign::minus : BiasSign::plus;
  const BiasSpec b = bias_builder(fam, o.n, sign);

  auto root = JsonValue::object();
  auto& cfg = root.set("config", JsonValue::object());
  cfg.set("command", JsonValue::str("bias"));
  cfg.set("family", JsonValue::str(o.family));
  cfg.set("n", JsonValue::integer(o.n));
  cfg.set("sign", JsonValue::str(o.sign));

  double log_q = 0;
  for (const auto& pp : b.per_prime) log_q += std::log((double)pp.p);

  auto& res = root.set("results", JsonValue::object());
  res.set("q_n", JsonValue::str(b.q_n.str()));
  res.set("a0", JsonValue::str(b.a0n.str()));
  res.set("b0", JsonValue::str(b.b0n.str()));
  res.set("log_q", JsonValue::real(log_q));
  res.set("e", JsonValue::real(b.e_value));
  res.set("growth_ratio", JsonValue::real(b.growth_ratio));
  auto& arr = res.set("per_prime", JsonValue::array());
  for (const auto& pp : b.per_prime) {
    auto j = JsonValue::object();
    j.set("p", JsonValue::integer(pp.p));
    j.set("a_res", JsonValue::integer(pp.a_res));
    j.set("b_res", JsonValue::integer(pp.b_res));
    j.set("lambda", JsonValue::real(pp.lambda));
    arr.push(std::move(j));
  }
  root.set("diagnostics", JsonValue::object());
  return root.dump();
}

void emit(const std::string& text, const std::string& out) {
  if (out == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw resource_error("cannot open output file '" + out + "'");
  f << text;
  if (!f) throw resource_error("failed writing output file '" + out + "'");
}

void add_family_opts(CLI::App* cmd, Options& o) {
  cmd->add_option("--family", o.family, "family id")->check(CLI::IsMember({"f1", "f2"}));
  cmd->add_option("--q", o.q, "residue modulus factor q (odd)");
  cmd->add_option("--a0", o.a0, "residue of a mod q");
  cmd->add_option("--b0", o.b0, "residue of b mod q");
}

void add_trunc_opts(CLI::App* cmd, Options& o) {
  cmd->add_option("--P", o.trunc.P, "prime cutoff for absolutely convergent sums");
  cmd->add_option("--PQ", o.trunc.P_Q, "prime cutoff for the local-factor sum");
  cmd->add_option("--Lmax", o.trunc.L_max, "l cutoff in the Q-series cross-check");
  cmd->add_option("--T", o.trunc.T, "theta cutoff for the R-integral");
  cmd->add_option("--quad-tol", o.trunc.quad_tol, "adaptive quadrature tolerance");
}

void add_io_opts(CLI::App* cmd, Options& o) {
  cmd->add_option("--format", o.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", o.out, "output path ('-' for stdout)");
  cmd->add_option("--threads", o.threads, "worker thread count (default: hardware)");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"elliptic-curve family statistics: density constants, explicit-formula\n"
               "comparisons, exact character sums, convergence checks, biased subfamilies"};
  app.require_subcommand(1);

  CLI::App* constants = app.add_subcommand("constants", "lower-order density constants");
  add_family_opts(constants, o);
  add_trunc_opts(constants, o);
  add_io_opts(constants, o);

  CLI::App* density = app.add_subcommand("density", "empirical vs predicted 1-level density");
  add_family_opts(density, o);
  density->add_option("--X", o.X, "conductor scale")->default_val(1e6);
  density->add_option("--rho", o.rho, "support parameter of the test pair (default 0.2)");
  density->add_option("--kind", o.kind, "test-function kind")
      ->check(CLI::IsMember({"fejer", "cosine_sq"}));
  add_trunc_opts(density, o);
  add_io_opts(density, o);

  CLI::App* charsum = app.add_subcommand("charsum", "exact moment Q(p^nu)");
  charsum->add_option("--family", o.family, "family id")->check(CLI::IsMember({"f1", "f2"}));
  charsum->add_option("--p", o.p, "odd prime")->required();
  charsum->add_option("--nu", o.nu, "prime-power exponent")->required();
  add_io_opts(charsum, o);

  CLI::App* verify = app.add_subcommand("verify", "convergence diagnostics on an X grid");
  add_family_opts(verify, o);
  verify->add_option("--X", o.X, "top of the X grid (grid spans 3 decades)")->default_val(1e8);
  add_trunc_opts(verify, o);
  add_io_opts(verify, o);

  CLI::App* bias = app.add_subcommand("bias", "extremal-lambda biased subfamily");
  bias->add_option("--family", o.family, "family id")->check(CLI::IsMember({"f1", "f2"}));
  bias->add_option("--n", o.n, "use all odd primes p <= n")->required();
  bias->add_option("--sign", o.sign, "which extremal a_p to pick per prime")
      ->check(CLI::IsMember({"minus", "plus"}));
  add_io_opts(bias, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 64;
  }

  if (o.format == "csv" && !app.got_subcommand(verify)) {
    std::cerr << "csv output is only available for the grid-valued verify report\n"
              << app.help() << std::flush;
    return 64;
  }
  if (o.threads > 0) set_threads(o.threads);

  try {
    std::string report;
    if (app.got_subcommand(constants)) report = run_constants(o);
    else if (app.got_subcommand(density)) report = run_density(o);
    else if (app.got_subcommand(charsum)) report = run_charsum(o);
    else if (app.got_subcommand(verify)) report = run_verify(o);
    else report = run_bias(o);
    emit(report, o.out);
    return 0;
  } catch (const resource_error& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 3;
  } catch (const numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 70;
  }
}
