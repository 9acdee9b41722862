#include "doa/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "doa/document.hpp"
#include "doa/elimination.hpp"
#include "doa/functional.hpp"
#include "doa/oracle.hpp"
#include "doa/reference_example.hpp"

namespace doa::cli {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v, int digits = 15) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string fmt(Complex z) {
  const double tiny = 1e-15 * std::max(1.0, std::abs(z));
  if (std::abs(z.imag()) <= tiny) return fmt(z.real());
  if (std::abs(z.real()) <= tiny) return fmt(z.imag()) + "i";
  return fmt(z.real()) + (z.imag() < 0 ? "-" : "+") + fmt(std::abs(z.imag())) + "i";
}

Complex parse_lambda(const std::string& text) {
  std::stringstream ss(text);
  double re = 0.0, im = 0.0;
  char comma = 0;
  if (!(ss >> re)) throw UsageError("--lambda expects re[,im], got '" + text + "'");
  if (ss >> comma) {
    if (comma != ',' || !(ss >> im)) throw UsageError("--lambda expects re[,im], got '" + text + "'");
  }
  std::string rest;
  if (ss >> rest) throw UsageError("--lambda expects re[,im], got '" + text + "'");
  return {re, im};
}

// One-line description of a scalar field: its value when constant, else a range.
std::string summarize(const MatrixField& c) {
  Complex first = c.value(0);
  double scale = 0.0, spread = 0.0, lo = INFINITY, hi = 0.0;
  for (std::size_t n = 0; n < c.node_count(); ++n) {
    Complex v = c.value(n);
    scale = std::max(scale, std::abs(v));
    spread = std::max(spread, std::abs(v - first));
    lo = std::min(lo, std::abs(v));
    hi = std::max(hi, std::abs(v));
  }
  if (spread <= 1e-12 * std::max(scale, 1e-300)) return fmt(first);
  return "{min_abs: " + fmt(lo) + ", max_abs: " + fmt(hi) + "}";
}

std::string summarize(const FieldTuple& t) {
  std::string s = "[";
  for (std::size_t j = 0; j < t.size(); ++j) s += (j ? ", " : "") + summarize(t[j]);
  return s + "]";
}

json field_json(const MatrixField& c) {
  json values = json::array();
  for (std::size_t n = 0; n < c.node_count(); ++n) values.push_back({c.value(n).real(), c.value(n).imag()});
  return {{"grid", c.spec().points_per_dim()}, {"values", std::move(values)}};
}

json tuple_json(const FieldTuple& t) {
  json comps = json::array();
  for (std::size_t j = 0; j < t.size(); ++j) {
    json c = field_json(t[j]);
    c["component"] = j;
    c["summary"] = summarize(t[j]);
    comps.push_back(std::move(c));
  }
  return comps;
}

void write_tuple_csv(const FieldTuple& t, std::ostream& os) {
  os << "component,node,coordinates,re,im\n";
  for (std::size_t j = 0; j < t.size(); ++j) {
    const auto& c = t[j];
    for (std::size_t n = 0; n < c.node_count(); ++n) {
      os << j << ',' << n << ',';
      auto k = c.spec().node_coordinates(n);
      for (std::size_t i = 0; i < k.size(); ++i) os << (i ? ";" : "") << fmt(k[i], 17);
      os << ',' << fmt(c.value(n).real(), 17) << ',' << fmt(c.value(n).imag(), 17) << '\n';
    }
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << content;
}

struct Common {
  std::string file;
  std::string lambda;
  double zero_tol = kDefaultZeroTol;
};

DefectOperator load(const Common& c) {
  OperatorDocument doc = load_document(c.file);
  std::optional<Complex> lambda;
  if (!c.lambda.empty()) lambda = parse_lambda(c.lambda);
  return build_operator(doc, lambda);
}

unsigned worker_count() {
  if (const char* env = std::getenv("DOA_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    throw UsageError("DOA_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_det(const Common& c, const std::string& format, const std::string& output, std::ostream& out) {
  DefectOperator op = load(c);
  EliminationOutcome outcome = eliminate(op, c.zero_tol);
  json diag = json::array();
  for (const auto& d : outcome.diagnostics)
    diag.push_back({{"step", d.step}, {"min_abs_pi", d.min_abs_pi}, {"max_abs_pi", d.max_abs_pi},
                    {"scale", d.scale}, {"condition", d.condition}});
  if (!outcome.invertible()) {
    const auto& f = outcome.failure();
    GridSpec tail = op.spec().trailing(f.step);
    std::string coords;
    auto node = tail.linear_index(f.witness_node);
    auto k = tail.node_coordinates(node);
    for (std::size_t i = 0; i < k.size(); ++i) coords += (i ? ", " : "") + ("k" + std::to_string(f.step + i + 1)) + "=" + fmt(k[i]);
    out << "non-invertible: step " << f.step << ", node [";
    for (std::size_t i = 0; i < f.witness_node.size(); ++i) out << (i ? ", " : "") << f.witness_node[i];
    out << "] (" << coords << "), min |pi_" << f.step << "| = " << fmt(f.min_abs_pi) << '\n';
    if (!output.empty())
      write_file(output, json{{"invertible", false}, {"step", f.step}, {"witness_node", f.witness_node},
                              {"min_abs_pi", f.min_abs_pi}, {"diagnostics", diag}}.dump(2) + "\n");
    return kNotInvertible;
  }
  const auto& pi = outcome.factorization().pi;
  out << "pi = " << summarize(pi) << '\n';
  for (std::size_t j = 0; j < pi.size(); ++j)
    out << "  pi_" << j << ": min |pi| = " << fmt(outcome.diagnostics[j].min_abs_pi)
        << ", max |pi| = " << fmt(outcome.diagnostics[j].max_abs_pi) << '\n';
  if (!output.empty()) {
    if (format == "csv") {
      std::ostringstream ss;
      write_tuple_csv(pi, ss);
      write_file(output, ss.str());
    } else {
      write_file(output, json{{"invertible", true}, {"pi", tuple_json(pi)}, {"diagnostics", diag}}.dump(2) + "\n");
    }
  }
  return kOk;
}

int cmd_trace(const Common& c, std::ostream& out) {
  VectorTrace t = trace(load(c));
  out << json{{"command", "trace"}, {"summary", summarize(t)}, {"tau", tuple_json(t)}}.dump(2) << '\n';
  return kOk;
}

int cmd_trace_norm(const Common& c, std::ostream& out) {
  double v = trace_norm(load(c));
  out << json{{"command", "trace-norm"}, {"summary", fmt(v)}, {"trace_norm", v}}.dump(2) << '\n';
  return kOk;
}

int cmd_power_traces(const Common& c, int n_max, std::ostream& out) {
  if (n_max < 1) throw UsageError("--n-max must be >= 1");
  auto traces = power_traces(load(c), n_max);
  json rows = json::array();
  for (int n = 1; n <= n_max; ++n)
    rows.push_back({{"n", n}, {"summary", summarize(traces[n - 1])}, {"tau", tuple_json(traces[n - 1])}});
  out << json{{"command", "power-traces"}, {"powers", std::move(rows)}}.dump(2) << '\n';
  return kOk;
}

struct SweepOptions {
  double re_min = -3.0, re_max = 1.0, im_min = 0.0, im_max = 0.0;
  int samples = 401;
  int im_samples = 0;
  std::string output;
};

int cmd_spectrum(const Common& c, const SweepOptions& s, std::ostream& out) {
  if (s.samples < 1) throw UsageError("--samples must be >= 1");
  if (s.re_min > s.re_max || s.im_min > s.im_max) throw UsageError("sweep bounds must satisfy min <= max");
  int im_samples = s.im_samples > 0 ? s.im_samples : (s.im_min == s.im_max ? 1 : s.samples);
  DefectOperator op = load(c);
  std::vector<Complex> lambdas;
  auto axis = [](double lo, double hi, int count, int i) {
    return count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  };
  for (int b = 0; b < im_samples; ++b)
    for (int a = 0; a < s.samples; ++a)
      lambdas.emplace_back(axis(s.re_min, s.re_max, s.samples, a), axis(s.im_min, s.im_max, im_samples, b));
  SpectrumScan scan = spectrum_scan(op, lambdas, c.zero_tol, worker_count());

  std::ostringstream csv;
  csv << "re_lambda,im_lambda,degree";
  for (std::size_t j = 0; j <= op.levels(); ++j) csv << ",min_abs_pi_" << j;
  csv << '\n';
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    csv << fmt(lambdas[i].real(), 17) << ',' << fmt(lambdas[i].imag(), 17) << ',' << scan.degrees[i];
    for (std::size_t j = 0; j <= op.levels(); ++j)
      csv << ',' << (j < scan.min_abs_pi[i].size() ? fmt(scan.min_abs_pi[i][j], 17) : std::string("nan"));
    csv << '\n';
  }
  if (s.output.empty()) {
    out << csv.str();
  } else {
    write_file(s.output, csv.str());
  }
  return kOk;
}

int cmd_inverse(const Common& c, std::ostream& out) {
  DefectOperator op = load(c);
  EliminationOutcome outcome = eliminate(op, c.zero_tol);
  if (!outcome.invertible()) {
    out << "non-invertible: step " << outcome.failure().step << '\n';
    return kNotInvertible;
  }
  DefectOperator inv = inverse_from(outcome.factorization(), op.levels());
  json widths = json::array();
  for (std::size_t j = 1; j <= inv.levels(); ++j) widths.push_back(inv.width(j));
  json report{{"command", "inverse"}, {"level_widths", widths}, {"pi", summarize(outcome.factorization().pi)}};
  if (op.spec().node_count() * static_cast<std::size_t>(op.m()) <= kDenseCap)
    report["dense_residual"] = dense_inverse_check(op, c.zero_tol);
  out << report.dump(2) << '\n';
  return kOk;
}

int cmd_example3(std::size_t grid, std::ostream& out) {
  if (grid < 4) throw UsageError("--grid must be >= 4");
  auto checks = example::run_checks(grid);
  example::print_checks(checks, out);
  bool ok = std::all_of(checks.begin(), checks.end(), [](const auto& x) { return x.pass; });
  out << (ok ? "all checks passed" : "some checks FAILED") << '\n';
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vector determinants, traces and spectra of periodic operators with defects", "doa"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool with_lambda = true) {
    sub->add_option("file", common.file, "operator document (JSON)")->required();
    if (with_lambda) sub->add_option("--lambda", common.lambda, "value bound to 'lambda' in formulas: re[,im]");
    sub->add_option("--zero-tol", common.zero_tol, "relative zero threshold for pi_j")->check(CLI::PositiveNumber);
  };

  std::string format = "json", output;
  auto* det = app.add_subcommand("det", "vector determinant / invertibility test");
  add_common(det);
  det->add_option("--out", format, "format of --output")->check(CLI::IsMember({"json", "csv"}));
  det->add_option("--output", output, "file for full per-node determinant grids");

  auto* tr = app.add_subcommand("trace", "vector trace");
  add_common(tr);
  auto* tn = app.add_subcommand("trace-norm", "trace norm");
  add_common(tn);
  int n_max = 6;
  auto* pt = app.add_subcommand("power-traces", "traces of powers 1..n-max");
  add_common(pt);
  pt->add_option("--n-max", n_max, "highest power");

  SweepOptions sweep;
  auto* sp = app.add_subcommand("spectrum", "spectrum degree D(lambda) sweep as CSV");
  add_common(sp);
  sp->add_option("--re-min", sweep.re_min);
  sp->add_option("--re-max", sweep.re_max);
  sp->add_option("--im-min", sweep.im_min);
  sp->add_option("--im-max", sweep.im_max);
  sp->add_option("--samples", sweep.samples, "samples along the real axis");
  sp->add_option("--im-samples", sweep.im_samples, "samples along the imaginary axis");
  sp->add_option("--output", sweep.output, "CSV file (default stdout)");

  auto* inv = app.add_subcommand("inverse", "build the inverse and report its structure");
  add_common(inv);

  std::size_t grid = 8;
  auto* ex = app.add_subcommand("example3", "run the built-in worked example checks");
  ex->add_option("--grid", grid, "points per axis");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kUsage;
  }

  try {
    if (det->parsed()) return cmd_det(common, format, output, out);
    if (tr->parsed()) return cmd_trace(common, out);
    if (tn->parsed()) return cmd_trace_norm(common, out);
    if (pt->parsed()) return cmd_power_traces(common, n_max, out);
    if (sp->parsed()) return cmd_spectrum(common, sweep, out);
    if (inv->parsed()) return cmd_inverse(common, out);
    if (ex->parsed()) return cmd_example3(grid, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace doa::cli
