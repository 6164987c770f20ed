#include "pif/cli.hpp"

#include <algorithm>
#include <signal.h>

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "pif/error.hpp"
#include "pif/fit.hpp"
#include "pif/image_io.hpp"
#include "pif/metrics.hpp"
#include "pif/service.hpp"

namespace pif {
namespace {

// Raised for flag values that parse but do not make sense.
struct UsageFailure {
  std::string message;
};

template <class F>
auto as_usage(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw UsageFailure{e.what()};
  }
}

double parse_number(std::string_view text, std::string_view what) {
  // from_chars for double is missing from older standard libraries.
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorCode::InvalidArgument, "bad number '" + s + "' in " + std::string(what));
  }
  return v;
}

int output_depth(int requested, int source) { return requested == 0 ? source : requested; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

struct PerturbArgs {
  std::string in, out;
  std::vector<std::string> sets;
  int bit_depth = 0;
};

struct FitArgs {
  std::vector<std::string> refs;
  std::string out;
  std::string name = "fitted";
  FitConfig config;
  bool progress = false;
};

struct ApplyArgs {
  std::string preset, in, out;
  std::string concepts = "all";
  std::string mode = "absolute";
  int bit_depth = 0;
};

struct EvalArgs {
  std::string a, b;
  std::string format = "json";
};

struct ServeArgs {
  ServiceConfig config;
};

int run_perturb(const PerturbArgs& a) {
  const ConceptParams params = as_usage([&] {
    ConceptParams p = neutral_params();
    for (const auto& s : a.sets) apply_assignment(p, s);
    return p;
  });
  const DecodedImage src = load_image_info(a.in);
  save_image(perturb(src.image, params), a.out, output_depth(a.bit_depth, src.bit_depth));
  return 0;
}

int run_fit(const FitArgs& a) {
  as_usage([&] { a.config.validate(); });
  const auto files = collect_reference_files(a.refs);
  if (files.empty()) throw Error(ErrorCode::InvalidArgument, "no reference images found");
  std::vector<RasterImage> refs;
  for (const auto& f : files) refs.push_back(load_image(f));
  FitProgressCallback progress;
  if (a.progress) {
    progress = [](const FitProgress& p) {
      std::fprintf(stderr, "iteration %d loss %.6g\n", p.iteration, p.loss);
    };
  }
  FitResult r = fit_style(refs, a.config, {}, progress);
  r.preset.name = a.name;
  r.preset.created_at = reproducible_created_at(files);
  write_text(a.out, encode_preset(r.preset) + "\n");
  std::printf("iterations %d converged %s loss %.6g\n", r.report.iterations,
              r.report.converged ? "yes" : "no", r.report.final_loss);
  return 0;
}

int run_apply(const ApplyArgs& a) {
  const ConceptMask mask = as_usage([&] { return parse_concept_list(a.concepts); });
  const auto bytes = read_file_bytes(a.preset);
  const StylePreset preset = decode_preset(std::string_view(
      reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  const ApplyMode mode = *mode_from_name(a.mode);
  const DecodedImage src = load_image_info(a.in);
  save_image(apply_style(src.image, preset, mode, mask), a.out,
             output_depth(a.bit_depth, src.bit_depth));
  return 0;
}

int run_eval(const EvalArgs& a) {
  const MetricReport r = evaluate_pair(load_image(a.a), load_image(a.b));
  std::cout << (a.format == "table" ? report_table(r) : report_json(r) + "\n");
  return 0;
}

int run_serve(ServiceConfig flags, const ServiceOverrides& given) {
  const ServiceConfig config = as_usage([&] { return resolve_service_config(std::move(flags), given); });
  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  Service service(config);
  const int port = service.start();
  std::printf("listening on %s:%d (data %s, %d workers)\n", config.host.c_str(), port,
              config.data_dir.string().c_str(), config.workers);
  std::fflush(stdout);
  int sig = 0;
  sigwait(&signals, &sig);
  service.stop();
  return 0;
}

}  // namespace

void apply_assignment(ConceptParams& params, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::InvalidArgument,
                "expected name=value or name=strength:hue, got '" + std::string(assignment) + "'");
  }
  const std::string_view name = assignment.substr(0, eq);
  const std::string_view value = assignment.substr(eq + 1);
  const auto id = concept_from_name(name);
  if (!id) throw Error(ErrorCode::InvalidArgument, "unknown concept '" + std::string(name) + "'");
  const auto colon = value.find(':');
  ConceptValue v;
  if (is_hue_concept(*id)) {
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::TypeMismatch, std::string(name) + " takes strength:hue");
    }
    v = StrengthHue{parse_number(value.substr(0, colon), assignment),
                    parse_number(value.substr(colon + 1), assignment)};
  } else {
    if (colon != std::string_view::npos) {
      throw Error(ErrorCode::TypeMismatch, std::string(name) + " takes a single value");
    }
    v = Scalar{parse_number(value, assignment)};
  }
  ConceptParams next = params;
  next.set(*id, v);
  next.validate();
  params = next;
}

ConceptMask parse_concept_list(std::string_view csv) {
  if (csv == "all") return ConceptMask::all();
  ConceptMask mask;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const std::string_view item =
        csv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!item.empty()) {
      const auto id = concept_from_name(item);
      if (!id) throw Error(ErrorCode::InvalidArgument, "unknown concept '" + std::string(item) + "'");
      mask.insert(*id);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return mask;
}

std::vector<std::filesystem::path> collect_reference_files(const std::vector<std::string>& args) {
  std::vector<std::filesystem::path> out;
  for (const auto& arg : args) {
    const std::filesystem::path p(arg);
    if (!std::filesystem::is_directory(p)) {
      out.push_back(p);
      continue;
    }
    std::vector<std::filesystem::path> found;
    for (const auto& entry : std::filesystem::directory_iterator(p)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") found.push_back(entry.path());
    }
    std::sort(found.begin(), found.end());
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Photographic style fitting and transfer"};
  app.require_subcommand(1);

  PerturbArgs perturb_args;
  auto* perturb_cmd = app.add_subcommand("perturb", "Apply concept adjustments to an image");
  perturb_cmd->add_option("--in", perturb_args.in, "Input image")->required();
  perturb_cmd->add_option("--out", perturb_args.out, "Output PNG")->required();
  perturb_cmd->add_option("--set", perturb_args.sets, "name=value or name=strength:hue");
  perturb_cmd->add_option("--bit-depth", perturb_args.bit_depth, "8 or 16 (default: source)")
      ->check(CLI::IsMember({8, 16}));

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Learn a preset from reference images");
  fit_cmd->add_option("--refs", fit_args.refs, "Reference images or directories")->required();
  fit_cmd->add_option("--out", fit_args.out, "Output preset JSON")->required();
  fit_cmd->add_option("--name", fit_args.name, "Preset name");
  fit_cmd->add_option("--seed", fit_args.config.seed, "RNG seed");
  fit_cmd->add_option("--iters", fit_args.config.max_outer_iterations, "Outer iteration cap");
  fit_cmd->add_option("--subset", fit_args.config.subset_size, "Concepts per iteration");
  fit_cmd->add_option("--evals", fit_args.config.line_search_evals, "Evaluations per line search");
  fit_cmd->add_option("--tol", fit_args.config.convergence_tol, "Convergence tolerance");
  fit_cmd->add_option("--long-edge", fit_args.config.downsample_long_edge, "Fitting resolution");
  fit_cmd->add_option("--edge-weight", fit_args.config.loss_edge_weight, "Edge loss weight");
  fit_cmd->add_flag("--progress", fit_args.progress, "Print per-iteration loss to stderr");

  ApplyArgs apply_args;
  auto* apply_cmd = app.add_subcommand("apply", "Render a preset onto a content image");
  apply_cmd->add_option("--preset", apply_args.preset, "Preset JSON")->required();
  apply_cmd->add_option("--in", apply_args.in, "Content image")->required();
  apply_cmd->add_option("--out", apply_args.out, "Output PNG")->required();
  apply_cmd->add_option("--concepts", apply_args.concepts, "Comma-separated concepts or all");
  apply_cmd->add_option("--mode", apply_args.mode, "absolute or relative")
      ->check(CLI::IsMember({"absolute", "relative"}));
  apply_cmd->add_option("--bit-depth", apply_args.bit_depth, "8 or 16 (default: source)")
      ->check(CLI::IsMember({8, 16}));

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Compare two images");
  eval_cmd->add_option("--a", eval_args.a, "First image")->required();
  eval_cmd->add_option("--b", eval_args.b, "Second image")->required();
  eval_cmd->add_option("--format", eval_args.format, "json or table")
      ->check(CLI::IsMember({"json", "table"}));

  std::string stats_in;
  auto* stats_cmd = app.add_subcommand("stats", "Print concept statistics of an image");
  stats_cmd->add_option("--in", stats_in, "Image")->required();

  ServiceConfig serve_config;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--host", serve_config.host, "Bind address");
  auto* port_opt = serve_cmd->add_option("--port", serve_config.port, "Port (0 for any)");
  auto* dir_opt = serve_cmd->add_option("--data-dir", serve_config.data_dir, "Data directory");
  auto* workers_opt = serve_cmd->add_option("--workers", serve_config.workers, "Fit workers");
  serve_cmd->add_option("--max-upload", serve_config.max_upload_bytes, "Upload limit in bytes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    std::cerr << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    if (perturb_cmd->parsed()) return run_perturb(perturb_args);
    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (apply_cmd->parsed()) return run_apply(apply_args);
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (stats_cmd->parsed()) {
      std::cout << stats_json(concept_stats(load_image(stats_in))) << "\n";
      return 0;
    }
    if (serve_cmd->parsed()) {
      return run_serve(serve_config, ServiceOverrides{port_opt->count() > 0, dir_opt->count() > 0,
                                                      workers_opt->count() > 0});
    }
  } catch (const UsageFailure& e) {
    std::cerr << "error: " << e.message << "\n\n" << active->help();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace pif
