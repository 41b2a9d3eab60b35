// Experiment runner CLI. Thin wrapper over the C API: every subcommand takes
// a JSON config and writes its artifacts into --out.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "nqe_capi.h"

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  int workers = 0;
  std::int64_t seed = -1;
};

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config_path, "JSON config file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", opt.seed, "Override the config seed");
  sub->add_option("--workers", opt.workers, "Worker threads (0 = all cores)");
  sub->add_option("--out", opt.out_dir, "Output directory");
}

int run(const std::string& name, const Options& opt) {
  std::ifstream f(opt.config_path, std::ios::binary);
  if (!f) {
    std::fprintf(stderr, "config: cannot read %s\n", opt.config_path.c_str());
    return 2;
  }
  std::ostringstream buf;
  buf << f.rdbuf();

  nqe_session* session = nqe_session_create();
  if (!session) {
    std::fprintf(stderr, "error: out of memory\n");
    return 1;
  }
  const int rc = nqe_run(session, name.c_str(), buf.str().c_str(), opt.out_dir.c_str(),
                         opt.workers, opt.seed);
  if (rc != NQE_OK) std::fprintf(stderr, "%s\n", nqe_last_error(session));
  nqe_session_destroy(session);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum embedding workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", nqe_version());

  const char* names[] = {"train-nqe", "train-qcnn", "kernel-study", "metrics-report",
                         "compare-embeddings"};
  const char* descs[] = {
      "Train a neural embedding and report separability metrics",
      "Train the quantum convolutional classifier on an embedding",
      "Kernel generalization/variance/rank study across embeddings",
      "Trace-distance, purity, expressibility and effective-dimension report",
      "Train the classifier across embedding variants and compare"};

  Options opts[5];
  for (int i = 0; i < 5; ++i) add_common(app.add_subcommand(names[i], descs[i]), opts[i]);

  CLI11_PARSE(app, argc, argv);

  for (int i = 0; i < 5; ++i)
    if (app.get_subcommand(names[i])->parsed()) return run(names[i], opts[i]);
  return 1;
}
