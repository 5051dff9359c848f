#include "saic/cli.hpp"

#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "saic/dataio.hpp"
#include "saic/pipeline.hpp"
#include "saic/protocol_server.hpp"
#include "saic/reference_backend.hpp"

namespace saic::cli {

namespace {

struct Overrides {
  std::string config;
  std::string backend;
  int workers = -1;
  std::optional<std::uint64_t> seed;
  std::string timings_out;
};

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::ParseError:
    case Errc::SchemaError:
    case Errc::ConfigError:
    case Errc::InvalidArgument:
    case Errc::InvalidRatio:
    case Errc::UnknownTemplate:
    case Errc::MissingRun:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

RunConfig resolve_config(const Overrides& o) {
  if (o.config.empty()) throw Error(Errc::ConfigError, "--config is required");
  RunConfig config = load_config(o.config);
  if (o.backend == "reference") config.backend.mode = BackendMode::reference;
  if (o.backend == "live") config.backend.mode = BackendMode::live;
  if (o.workers >= 0) config.workers = o.workers;
  if (o.seed) config.seed = *o.seed;
  return config;
}

void emit_timings(const AugmentSummary& summary, const Overrides& o) {
  const auto text = dump_stable(summary.timings.to_json());
  std::cerr << "stage timings: " << summary.timings.to_json().dump() << "\n";
  if (!o.timings_out.empty()) write_text_file(o.timings_out, text);
}

int finish_augment(const RunConfig& config, const AugmentSummary& s, const Overrides& o) {
  emit_timings(s, o);
  std::cout << "planned " << s.planned << ", kept " << s.kept << ", failed " << s.failed << " (background-style "
            << s.stats.background_kept << ", self-style " << s.stats.self_kept << ")\n";
  if (s.failure_budget_exceeded(config.max_failure_fraction)) {
    std::cerr << "error: " << s.failed << " of " << s.planned << " entries failed; see "
              << (config.output_dir / "failures.jsonl").string() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "run configuration (JSON)")->required();
  cmd->add_option("--backend", o.backend, "override backend mode")->check(CLI::IsMember({"live", "reference"}));
  cmd->add_option("--workers", o.workers, "worker threads (0 = one per processor)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", o.seed, "override the root seed");
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Style-aligned abnormal cell synthesis toolkit", "saic"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");

  Overrides o;
  auto* build_bank = app.add_subcommand("build-bank", "sample the abnormal cell bank from the dataset");
  auto* plan = app.add_subcommand("plan", "write the augmentation plan");
  auto* augment = app.add_subcommand("augment", "compose, filter and emit the augmented dataset");
  auto* filter = app.add_subcommand("filter", "re-judge the pairs of an existing run");
  auto* eval = app.add_subcommand("eval", "compute FID, fidelity, style projection and tail statistics");
  auto* report = app.add_subcommand("report", "print the evaluation report of a run");
  for (auto* cmd : {build_bank, plan, augment, filter, eval, report}) add_common(cmd, o);
  for (auto* cmd : {augment, filter}) cmd->add_option("--timings-out", o.timings_out, "write stage timings here");

  auto* serve = app.add_subcommand("serve-reference", "serve the reference backends over the v1 protocol");
  std::string host = "127.0.0.1";
  int port = 8000;
  int dim = backends::kDefaultEmbeddingDim;
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--embedding-dim", dim)->check(CLI::Range(8, 65536));

  auto* convert = app.add_subcommand("convert", "convert a dataset between canonical, COCO and YOLO layouts");
  std::string in_path, out_path, from = "coco_json", to = "canonical_json";
  convert->add_option("input", in_path)->required();
  convert->add_option("output", out_path)->required();
  convert->add_option("--from", from)->check(CLI::IsMember({"canonical_json", "coco_json", "yolo_txt"}));
  convert->add_option("--to", to)->check(CLI::IsMember({"canonical_json", "coco_json", "yolo_txt"}));

  auto* subset = app.add_subcommand("subset", "stratified subset of a canonical dataset");
  double ratio = 1.0;
  std::uint64_t subset_seed = 0;
  subset->add_option("input", in_path)->required();
  subset->add_option("output", out_path)->required();
  subset->add_option("--ratio", ratio)->required();
  subset->add_option("--seed", subset_seed)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*serve) {
      protocol::ProtocolServer server(backends::make_reference_backends(dim));
      spdlog::info("serving reference backends on {}:{}", host, port);
      server.listen_blocking(host, port);
      return kExitOk;
    }
    if (*convert) {
      const auto ds = dataio::import_dataset(in_path, dataio::format_from_string(from));
      dataio::export_dataset(ds, dataio::format_from_string(to), out_path);
      std::cout << ds.images.size() << " images, " << ds.annotations.size() << " annotations\n";
      return kExitOk;
    }
    if (*subset) {
      const auto ds = dataio::import_dataset(in_path, dataio::Format::canonical_json);
      const auto out = dataio::sample_subset(ds, ratio, subset_seed);
      dataio::export_dataset(out, dataio::Format::canonical_json, out_path);
      std::cout << out.images.size() << " images, " << out.annotations.size() << " annotations\n";
      return kExitOk;
    }

    const RunConfig config = resolve_config(o);
    if (*report) {
      std::cout << report_text(config.output_dir);
      return kExitOk;
    }
    auto backend_set = make_backends(config);
    if (*build_bank) {
      const auto bank = build_bank_stage(config, backend_set);
      std::cout << "bank: " << bank.size() << " cells in " << config.bank_dir.string() << "\n";
    } else if (*plan) {
      const auto p = plan_stage(config);
      std::cout << "plan: " << p.entries.size() << " entries in " << (config.output_dir / "plan.json").string() << "\n";
    } else if (*augment) {
      return finish_augment(config, augment_stage(config, backend_set), o);
    } else if (*filter) {
      return finish_augment(config, filter_stage(config, backend_set), o);
    } else if (*eval) {
      eval_stage(config, backend_set);
      std::cout << report_text(config.output_dir);
    }
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace saic::cli
