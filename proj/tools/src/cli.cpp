#include "lrp_cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <lrp/error.hpp>
#include <lrp/estimation.hpp>
#include <lrp/identities.hpp>
#include <lrp/model.hpp>
#include <lrp/network.hpp>
#include <lrp/renorm.hpp>
#include <lrp/serialize.hpp>
#include <lrp/solver.hpp>

#include "lrp_cli/plot.hpp"

namespace lrp::cli {
namespace {

namespace fs = std::filesystem;

struct Common {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string log_level = "info";
};

struct SampleArgs {
  double beta = 1.0;
  Site n = 0;
  std::optional<Site> lo, hi;
  std::uint64_t replicate = 0;
  std::optional<Site> radius;
  double truncation_factor = 8.0;
  std::string out;
};

struct ResistArgs {
  double beta = 1.0;
  Site n = 0;
  std::vector<Site> pair;
  std::uint64_t replicate = 0;
  bool emit_flow = false;
  std::string out;
};

struct VerifyArgs {
  std::string suite = "all";
  std::size_t trials = 500;
  std::string out;
};

struct ClassifyArgs {
  double beta = 1.0;
  std::size_t blocks = 16;
  ClassifyParams params;
  std::string mode = "power";
  double truncation_factor = 8.0;
  std::uint64_t replicate = 0;
  std::string out;
};

struct ScalingArgs {
  double beta = 1.0;
  std::string scales = "16..1024";
  std::size_t replicates = 200;
  double truncation_factor = 8.0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  Site box_to_box_max_scale = 256;
  std::string pairs = "4x8,8x8,8x16";
  bool no_point_to_box = false;
  std::string out = "report.json";
  std::string csv;
  std::string plot;
};

struct ReportArgs {
  std::string csv;
  std::string out = "plot.svg";
  std::string title;
};

bool is_usage(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::invalid_distance:
    case ErrorCode::empty_window:
    case ErrorCode::truncation:
    case ErrorCode::invalid_query:
    case ErrorCode::invalid_scale:
      return true;
    default:
      return false;
  }
}

void error_line(std::ostream& err, std::string_view code, std::string_view message) {
  err << Json{{"error", code}, {"message", message}}.dump() << '\n';
}

template <typename T>
T parse_integer(std::string_view text, std::string_view what) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    fail(ErrorCode::invalid_argument, std::string(what) + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

/// "a..b" doubles from a up to b; otherwise a comma-separated list.
std::vector<Site> parse_scales(std::string_view text) {
  std::vector<Site> out;
  if (const auto dots = text.find(".."); dots != text.npos) {
    const auto a = parse_integer<Site>(text.substr(0, dots), "--scales");
    const auto b = parse_integer<Site>(text.substr(dots + 2), "--scales");
    if (a < 2 || b < a) fail(ErrorCode::invalid_argument, "--scales range must satisfy 2 <= a <= b");
    for (Site n = a; n <= b; n *= 2) out.push_back(n);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    out.push_back(parse_integer<Site>(text.substr(start, comma == text.npos ? text.npos : comma - start),
                                      "--scales"));
    if (comma == text.npos) break;
    start = comma + 1;
  }
  return out;
}

/// "4x8,8x8" into (m, n) pairs; an empty string gives no pairs.
std::vector<std::pair<Site, Site>> parse_pairs(std::string_view text) {
  std::vector<std::pair<Site, Site>> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == text.npos ? text.npos : comma - start);
    const auto x = item.find('x');
    if (x == item.npos) fail(ErrorCode::invalid_argument, "--pairs entries look like 4x8");
    out.emplace_back(parse_integer<Site>(item.substr(0, x), "--pairs"),
                     parse_integer<Site>(item.substr(x + 1), "--pairs"));
    if (out.back().first < 1 || out.back().second < 1) {
      fail(ErrorCode::invalid_argument, "--pairs entries must be positive");
    }
    if (comma == text.npos) break;
    start = comma + 1;
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::invalid_argument, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Runner {
 public:
  Runner(const Common& common, std::ostream& out) : common_(common), out_(out) {}

  fs::path resolve(const std::string& path) const {
    const fs::path p(path);
    return p.is_absolute() ? p : fs::path(common_.out_dir) / p;
  }

  // Writes `content` to `path` when given; otherwise the content itself is
  // the command's output.
  bool emit(const std::string& path, const std::string& content) {
    if (path.empty()) {
      out_ << content;
      return false;
    }
    write_atomic(resolve(path), content);
    return true;
  }

  void summary(const std::string& line) {
    if (common_.log_level != "quiet") out_ << line << '\n';
  }

  int sample(const SampleArgs& a) {
    ModelParams params{a.beta, common_.seed};
    params.validate();
    LrpSample s;
    if (a.radius) {
      if (*a.radius < 1) fail(ErrorCode::invalid_argument, "--radius must be positive");
      if (!(a.truncation_factor > 1.0)) fail(ErrorCode::invalid_argument, "--truncation-factor must exceed 1");
      const auto t = std::max<Site>(*a.radius + 1, static_cast<Site>(std::ceil(a.truncation_factor * static_cast<double>(*a.radius))));
      s = sample_with_contracted_complement(params, {0, 0}, *a.radius, t, {}, a.replicate);
    } else {
      const Site lo = a.lo.value_or(0);
      const Site hi = a.hi.value_or(a.n > 0 ? lo + a.n - 1 : lo);
      if (!a.hi && a.n < 1) fail(ErrorCode::invalid_argument, "give --n or --hi");
      s = sample_window(params, lo, hi, {}, a.replicate);
    }
    if (emit(a.out, dump(to_json(s)))) {
      summary("sample: window [" + std::to_string(s.lo) + ", " + std::to_string(s.hi) + "], " +
              std::to_string(s.long_edge_count()) + " long edges -> " + resolve(a.out).string());
    }
    return kExitOk;
  }

  int resist(const ResistArgs& a) {
    ModelParams params{a.beta, common_.seed};
    params.validate();
    if (a.n < 2) fail(ErrorCode::invalid_argument, "--n must be at least 2");
    for (const Site x : a.pair) {
      if (x < 0 || x >= a.n) {
        fail(ErrorCode::invalid_query, "--pair endpoint " + std::to_string(x) + " lies outside [0, n)");
      }
    }
    if (a.pair[0] == a.pair[1]) fail(ErrorCode::invalid_query, "--pair endpoints coincide");
    const auto s = sample_window(params, 0, a.n - 1, {}, a.replicate);
    auto net = std::make_shared<const Network>(network_from_sample(s));
    const auto r = two_point_resistance(net, net->at(a.pair[0]), net->at(a.pair[1]));
    auto doc = to_json(r, a.emit_flow);
    doc["pair"] = a.pair;
    doc["beta"] = a.beta;
    doc["seed"] = common_.seed;
    doc["n"] = a.n;
    doc["replicate"] = a.replicate;
    if (emit(a.out, dump(doc))) {
      summary("resist: R(" + std::to_string(a.pair[0]) + ", " + std::to_string(a.pair[1]) + ") = " +
              doc["value"].dump() + " -> " + resolve(a.out).string());
    }
    return kExitOk;
  }

  int verify(const VerifyArgs& a) {
    if (a.trials < 1) fail(ErrorCode::invalid_argument, "--trials must be positive");
    std::vector<Suite> suites;
    for (const auto s : all_suites()) {
      if (a.suite == "all" || a.suite == to_string(s)) suites.push_back(s);
    }
    Json reports = Json::array();
    std::size_t failures = 0;
    for (const auto s : suites) {
      const auto r = run_suite(s, a.trials, common_.seed);
      failures += r.failures;
      reports.push_back(to_json(r));
    }
    const Json doc = {{"seed", common_.seed},
                      {"trials", a.trials},
                      {"suites", reports},
                      {"failures", failures},
                      {"passed", failures == 0}};
    if (emit(a.out, dump(doc))) {
      summary("verify: " + std::to_string(suites.size()) + " suites, " + std::to_string(failures) +
              " failures -> " + resolve(a.out).string());
    }
    return failures == 0 ? kExitOk : kExitVerifyFailed;
  }

  int classify(ClassifyArgs a) {
    ModelParams params{a.beta, common_.seed};
    params.validate();
    a.params.mode = a.mode == "power" ? ThresholdMode::power : ThresholdMode::lambda_hat;
    a.params.validate();
    if (a.blocks < 3) fail(ErrorCode::invalid_argument, "--blocks must be at least 3");
    if (!(a.truncation_factor > 1.0)) fail(ErrorCode::invalid_argument, "--truncation-factor must exceed 1");
    const Site span = static_cast<Site>(a.blocks) * a.params.m;
    const Site radius = span / 2;
    const Site truncation = std::max<Site>(radius + 1, static_cast<Site>(std::ceil(a.truncation_factor * static_cast<double>(radius))));
    const auto s = sample_with_contracted_complement(params, {0, 0}, radius, truncation, {}, a.replicate);
    const auto rows = lrp::classify(s, a.params);
    std::size_t determinate = 0, very_good = 0;
    const auto red = std::make_unique<bool[]>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].indeterminate) continue;
      ++determinate;
      if (rows[i].very_good) ++very_good;
      red[i] = !rows[i].very_good;
    }
    const auto rg = renormalize(s, a.params.m);
    const auto comps = red_components(rg, std::span<const bool>(red.get(), rows.size()));
    if (emit(a.out, classification_csv(rows))) {
      summary("classify: " + std::to_string(very_good) + "/" + std::to_string(determinate) +
              " very good blocks, largest red component " +
              std::to_string(comps.sizes.empty() ? 0 : comps.sizes.front()) + " -> " +
              resolve(a.out).string());
    }
    return kExitOk;
  }

  int scaling(const ScalingArgs& a) {
    ScalingConfig config;
    config.beta = a.beta;
    config.scales = parse_scales(a.scales);
    config.options.replicates = a.replicates;
    config.options.seed = common_.seed;
    config.options.threads = a.threads;
    config.options.truncation_factor = a.truncation_factor;
    config.point_to_box = !a.no_point_to_box;
    config.box_to_box_max_scale = a.box_to_box_max_scale;
    config.multiplicativity_pairs = parse_pairs(a.pairs);
    config.validate();
    if (a.out.empty()) fail(ErrorCode::invalid_argument, "--out must name a file");

    const auto report = run_scaling(config);
    write_atomic(resolve(a.out), dump(to_json(report)));
    if (!a.csv.empty()) write_atomic(resolve(a.csv), series_csv(report));
    if (!a.plot.empty()) {
      std::vector<SeriesPoint> points;
      for (const auto& e : report.estimates) {
        points.push_back({e.n, e.mean, e.ci95.lo, e.ci95.hi, e.std_error, std::string(to_string(e.quantity)), 0});
      }
      write_atomic(resolve(a.plot), render_plot(points, "beta = " + format_exponent(a.beta)).svg);
    }
    summary("scaling: delta_hat = " + format_exponent(report.lambda_fit.delta_hat) + " +/- " +
            format_exponent(report.lambda_fit.std_error) + ", r^2 = " +
            format_exponent(report.lambda_fit.r_squared) + " -> " + resolve(a.out).string());
    return kExitOk;
  }

  int report(const ReportArgs& a) {
    const auto text = read_file(resolve(a.csv));
    const auto points = parse_series_csv(text);
    const auto plot = render_plot(points, a.title);
    write_atomic(resolve(a.out), plot.svg);
    std::string line = "report: " + std::to_string(points.size()) + " points";
    for (const auto& f : plot.fits) {
      if (f.fit) line += ", " + (f.series.empty() ? std::string("series") : f.series) + " delta_hat = " + format_exponent(f.fit->delta_hat);
    }
    summary(line + " -> " + resolve(a.out).string());
    return kExitOk;
  }

 private:
  const Common& common_;
  std::ostream& out_;
};

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator and verification toolkit for critical long-range percolation networks", "lrp"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Common common;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Master seed (LRP_SEED overrides)")->capture_default_str();
    sub->add_option("--out-dir", common.out_dir, "Directory that relative paths resolve against")
        ->capture_default_str();
    sub->add_option("--log-level", common.log_level, "quiet suppresses the summary line")
        ->check(CLI::IsMember({"quiet", "info"}))
        ->capture_default_str();
  };
  const auto beta_option = [](CLI::App* sub, double& beta) {
    sub->add_option("--beta", beta, "Model parameter beta > 0")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Draw one LRP configuration and write it as JSON");
  beta_option(sample, sa.beta);
  sample->add_option("--n", sa.n, "Window [lo, lo + n - 1]")->check(CLI::PositiveNumber);
  sample->add_option("--lo", sa.lo, "First window site (default 0)");
  sample->add_option("--hi", sa.hi, "Last window site");
  sample->add_option("--radius", sa.radius,
                     "Sample [-radius, radius] with the rest of Z contracted into one vertex");
  sample->add_option("--truncation-factor", sa.truncation_factor,
                     "With --radius: explicit exterior sites reach factor * radius")
      ->capture_default_str();
  sample->add_option("--replicate", sa.replicate, "Replicate index")->capture_default_str();
  sample->add_option("--out", sa.out, "Output JSON (stdout when omitted)");
  add_common(sample);

  ResistArgs ra;
  auto* resist = app.add_subcommand("resist", "Effective resistance between two sites of [0, n)");
  beta_option(resist, ra.beta);
  resist->add_option("--n", ra.n, "Window length")->required()->check(CLI::Range(Site{2}, Site{1} << 40));
  resist->add_option("--pair", ra.pair, "Two sites in [0, n)")->required()->expected(2);
  resist->add_option("--replicate", ra.replicate, "Replicate index")->capture_default_str();
  resist->add_flag("--emit-flow", ra.emit_flow, "Include the unit current on every edge");
  resist->add_option("--out", ra.out, "Output JSON (stdout when omitted)");
  add_common(resist);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run the randomized identity suites");
  std::vector<std::string> suite_names{"all"};
  for (const auto s : all_suites()) suite_names.emplace_back(to_string(s));
  verify->add_option("--suite", va.suite, "Suite to run")
      ->check(CLI::IsMember(suite_names))
      ->capture_default_str();
  verify->add_option("--trials", va.trials, "Trials per suite")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--out", va.out, "Output JSON (stdout when omitted)");
  add_common(verify);

  ClassifyArgs ca;
  auto* classify = app.add_subcommand("classify", "Classify the blocks of one sample as CSV");
  beta_option(classify, ca.beta);
  classify->add_option("--m", ca.params.m, "Block length")->check(CLI::PositiveNumber)->capture_default_str();
  classify->add_option("--blocks", ca.blocks, "Number of blocks")->check(CLI::Range(3, 1 << 20))->capture_default_str();
  classify->add_option("--max-boundary-points", ca.params.max_boundary_points,
                       "Largest number of boundary points of an m-good block")
      ->capture_default_str();
  classify->add_option("--delta", ca.params.delta, "Exponent of the power threshold")->capture_default_str();
  classify->add_option("--alpha1", ca.params.alpha1, "Separation radius as a fraction of m")->capture_default_str();
  classify->add_option("--alpha2", ca.params.alpha2, "Energy threshold prefactor")->capture_default_str();
  classify->add_option("--threshold-mode", ca.mode, "power: alpha2 * m^delta; lambda-hat: alpha2 * lambda")
      ->check(CLI::IsMember({"power", "lambda-hat"}))
      ->capture_default_str();
  classify->add_option("--lambda-hat", ca.params.lambda_hat, "Estimate of the scale function at m");
  classify->add_option("--truncation-factor", ca.truncation_factor,
                       "Explicit exterior sites reach factor * radius")
      ->capture_default_str();
  classify->add_option("--replicate", ca.replicate, "Replicate index")->capture_default_str();
  classify->add_option("--out", ca.out, "Output CSV (stdout when omitted)");
  add_common(classify);

  ScalingArgs sc;
  auto* scaling = app.add_subcommand("scaling", "Monte Carlo scaling campaign");
  beta_option(scaling, sc.beta);
  scaling->add_option("--scales", sc.scales, "a..b doubles from a to b, or a comma list")->capture_default_str();
  scaling->add_option("--replicates", sc.replicates, "Replicates per scale")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 32))
      ->capture_default_str();
  scaling->add_option("--truncation-factor", sc.truncation_factor,
                      "Explicit exterior sites reach factor * n")
      ->capture_default_str();
  scaling->add_option("--threads", sc.threads, "Worker threads (default: logical cores)")
      ->check(CLI::Range(1u, 4096u));
  scaling->add_option("--box-to-box-max-scale", sc.box_to_box_max_scale,
                      "Largest scale of the conditioned box-to-box series (0: none)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  scaling->add_option("--pairs", sc.pairs, "Multiplicativity pairs, e.g. 4x8,8x8")->capture_default_str();
  scaling->add_flag("--no-point-to-box", sc.no_point_to_box, "Skip the point-to-box series");
  scaling->add_option("--out", sc.out, "Report JSON")->capture_default_str();
  scaling->add_option("--csv", sc.csv, "Series CSV for plotting");
  scaling->add_option("--plot", sc.plot, "SVG plot of all series");
  add_common(scaling);

  ReportArgs pa;
  auto* report = app.add_subcommand("report", "Render a series CSV as a log-log SVG plot");
  report->alias("plot");
  report->add_option("--csv", pa.csv, "Input series CSV")->required();
  report->add_option("--out", pa.out, "Output SVG")->capture_default_str();
  report->add_option("--title", pa.title, "Plot title");
  add_common(report);

  std::vector<const char*> argv{"lrp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    error_line(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (const char* env = std::getenv("LRP_SEED"); env != nullptr && *env != '\0') {
      common.seed = parse_integer<std::uint64_t>(env, "LRP_SEED");
    }
    Runner runner(common, out);
    if (*sample) return runner.sample(sa);
    if (*resist) return runner.resist(ra);
    if (*verify) return runner.verify(va);
    if (*classify) return runner.classify(ca);
    if (*scaling) return runner.scaling(sc);
    return runner.report(pa);
  } catch (const Error& e) {
    error_line(err, to_string(e.code()), e.what());
    return is_usage(e.code()) ? kExitUsage : kExitNumeric;
  } catch (const std::exception& e) {
    error_line(err, "internal", e.what());
    return kExitNumeric;
  }
}

}  // namespace lrp::cli
