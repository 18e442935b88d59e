#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "occspot/config.hpp"
#include "occspot/error.hpp"
#include "occspot/pipeline.hpp"

namespace fs = std::filesystem;
using namespace occspot;

namespace {

enum ExitCode { kOk = 0, kUnexpected = 1, kConfig = 2, kData = 3, kNumerical = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string manifest;

  void add_to(CLI::App* app, bool with_config = true) {
    if (with_config) {
      app->add_option("--config", config, "pipeline config JSON (defaults apply when omitted)");
      app->add_option("--seed", seed, "root seed, overrides config.seed");
    }
    app->add_option("--manifest", manifest, "run manifest path");
  }

  PipelineConfig load() const {
    PipelineConfig c = config.empty() ? PipelineConfig{} : load_config(config);
    if (seed) c.seed = *seed;
    return c;
  }
};

void finish(const RunManifest& m, const std::string& manifest, const fs::path& default_manifest, bool print) {
  const fs::path path = manifest.empty() ? default_manifest : fs::path(manifest);
  if (!path.empty()) write_manifest(path, m);
  if (print) std::cout << m.results.dump(2) << "\n";
}

fs::path beside(const fs::path& out) {
  fs::path p = out;
  p += ".manifest.json";
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"occspot: occupancy pre-training toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common gen_c;
  std::string gen_out;
  std::size_t gen_n = 4;
  std::string gen_beams = "source";
  auto* gen = app.add_subcommand("gen-scenes", "generate synthetic labeled sequences");
  gen_c.add_to(gen);
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--scenes", gen_n, "number of scenes");
  gen->add_option("--beams", gen_beams, "sensor: source or target")->check(CLI::IsMember({"source", "target"}));

  Common occ_c;
  std::string occ_seq, occ_out;
  std::optional<std::size_t> occ_key;
  auto* occ = app.add_subcommand("make-occ", "occupancy ground truth for one sequence");
  occ_c.add_to(occ);
  occ->add_option("sequence", occ_seq, "sequence directory")->required();
  occ->add_option("out", occ_out, "output grid (.spog)")->required();
  occ->add_option("--keyframe", occ_key, "keyframe index (default: middle frame)");

  Common rs_c;
  double rs_factor = 1.0;
  std::uint64_t rs_seed = 0;
  std::string rs_in, rs_out;
  auto* rs = app.add_subcommand("resample", "beam re-sampling of one frame");
  rs_c.add_to(rs, false);
  rs->add_option("--factor", rs_factor, "fraction of beams kept, in (0, 1]")->required();
  rs->add_option("--seed", rs_seed, "seed");
  rs->add_option("in", rs_in, "input frame (.sptc)")->required();
  rs->add_option("out", rs_out, "output frame (.sptc)")->required();

  Common bw_c;
  std::string bw_stats;
  auto* bw = app.add_subcommand("balance-weights", "class sampling weights from instance statistics");
  bw_c.add_to(bw, false);
  bw->add_option("stats", bw_stats, "statistics JSON")->required();

  Common pt_c;
  std::string pt_out = "pretrain.spck";
  auto* pt = app.add_subcommand("pretrain", "occupancy pre-training");
  pt_c.add_to(pt);
  pt->add_option("--out", pt_out, "output checkpoint");

  Common ft_c;
  std::string ft_ckpt, ft_out = "finetune.spck";
  std::size_t ft_labels = 10;
  bool ft_scratch = false;
  auto* ft = app.add_subcommand("finetune", "downstream segmentation fine-tuning");
  ft_c.add_to(ft);
  auto* ckpt_opt = ft->add_option("--ckpt", ft_ckpt, "pre-trained checkpoint");
  ft->add_flag("--scratch", ft_scratch, "train from scratch")->excludes(ckpt_opt);
  ft->add_option("--labels", ft_labels, "number of labeled scenes");
  ft->add_option("--out", ft_out, "output checkpoint");

  Common ev_c;
  std::string ev_ckpt, ev_data;
  bool ev_all = false;
  auto* ev = app.add_subcommand("eval-miou", "mIoU of a checkpoint on a generated dataset");
  ev_c.add_to(ev);
  ev->add_option("ckpt", ev_ckpt, "checkpoint")->required();
  ev->add_option("dataset", ev_data, "dataset directory from gen-scenes")->required();
  ev->add_flag("--all-cells", ev_all, "score empty cells too");

  Common th_c;
  std::size_t th_sweeps = 1000;
  std::uint64_t th_seed = 0;
  auto* th = app.add_subcommand("theory-check", "randomized checks of the information-theoretic bounds");
  th_c.add_to(th, false);
  th->add_option("--sweeps", th_sweeps, "random cases per check");
  th->add_option("--seed", th_seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (gen->parsed()) {
      const auto m = gen_scenes(gen_c.load(), gen_out, gen_n, gen_beams == "target");
      finish(m, gen_c.manifest, {}, false);
    } else if (occ->parsed()) {
      const auto m = make_occ(occ_c.load(), occ_seq, occ_out, occ_key);
      finish(m, occ_c.manifest, beside(occ_out), true);
    } else if (rs->parsed()) {
      const auto m = resample(rs_factor, rs_seed, rs_in, rs_out);
      finish(m, rs_c.manifest, beside(rs_out), true);
    } else if (bw->parsed()) {
      finish(balance_weights(bw_stats), bw_c.manifest, {}, true);
    } else if (pt->parsed()) {
      const auto m = pretrain(pt_c.load(), pt_out);
      finish(m, pt_c.manifest, beside(pt_out), true);
    } else if (ft->parsed()) {
      if (!ft_scratch && ft_ckpt.empty()) throw ConfigError("finetune: pass --ckpt <file> or --scratch");
      std::optional<fs::path> ckpt;
      if (!ft_scratch) ckpt = ft_ckpt;
      const auto m = finetune(ft_c.load(), ckpt, ft_labels, ft_out);
      finish(m, ft_c.manifest, beside(ft_out), true);
    } else if (ev->parsed()) {
      finish(eval_miou(ev_c.load(), ev_ckpt, ev_data, ev_all), ev_c.manifest, {}, true);
    } else if (th->parsed()) {
      finish(theory_check(th_sweeps, th_seed), th_c.manifest, {}, true);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::out_of_range& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnexpected;
  }
  return kOk;
}
